//! Connected-sum expressions over catalog atoms.
//!
//! An expression is a tree whose leaves are closed atoms and whose internal
//! nodes are sums along 2-spheres (`#`) or along projective planes (`#^`,
//! written `SumP2` here). A projective-plane sum consumes one singular site
//! on each side; which sites are consumed is part of the expression, since
//! the homeomorphism type of the result can depend on it.
//!
//! Expressions are immutable values. The structural content that every
//! downstream invariant consumes, the multiset of atom occurrences and the
//! pairing of consumed sites, is exposed as a [`JoinGraph`].

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::catalog::AtomSpec;
use crate::normalizer::NormalizeError;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("site `{0}` not found (or path does not reach an atom carrying it)")]
    SiteNotFound(String),
    #[error("site `{0}` is already consumed by another sum")]
    SiteAlreadyConsumed(String),
    #[error("atom `{0}` declares inconsistent flags: irreducible but not prime")]
    InconsistentFlags(String),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Left,
    Right,
}

/// Position of an atom occurrence inside an expression tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TreePath(pub Vec<Branch>);

impl TreePath {
    pub fn root() -> Self {
        TreePath(Vec::new())
    }
}

/// Reference to one singular site of one atom occurrence: the path walks
/// from the referencing node down to the atom that owns the site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteRef {
    pub path: TreePath,
    pub site: String,
}

impl SiteRef {
    pub fn new(path: TreePath, site: impl Into<String>) -> Self {
        SiteRef { path, site: site.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceExpr {
    Atom(Arc<AtomSpec>),
    SumS2(Box<SpaceExpr>, Box<SpaceExpr>),
    SumP2 {
        left: Box<SpaceExpr>,
        left_site: SiteRef,
        right: Box<SpaceExpr>,
        right_site: SiteRef,
    },
}

impl SpaceExpr {
    pub fn atom(spec: Arc<AtomSpec>) -> SpaceExpr {
        SpaceExpr::Atom(spec)
    }

    /// Sum along a 2-sphere. Always defined: every closed space has
    /// manifold points to sum along, and their choice does not matter.
    pub fn sum_s2(a: SpaceExpr, b: SpaceExpr) -> SpaceExpr {
        SpaceExpr::SumS2(Box::new(a), Box::new(b))
    }

    /// Sum along a projective plane, consuming an open singular site on
    /// each side.
    pub fn sum_p2(
        a: SpaceExpr,
        sa: SiteRef,
        b: SpaceExpr,
        sb: SiteRef,
    ) -> Result<SpaceExpr, ExprError> {
        a.check_site_open(&sa)?;
        b.check_site_open(&sb)?;
        Ok(SpaceExpr::SumP2 {
            left: Box::new(a),
            left_site: sa,
            right: Box::new(b),
            right_site: sb,
        })
    }

    pub fn subexpr(&self, path: &TreePath) -> Option<&SpaceExpr> {
        let mut cur = self;
        for step in &path.0 {
            cur = match (cur, step) {
                (SpaceExpr::SumS2(l, _), Branch::Left) => l,
                (SpaceExpr::SumS2(_, r), Branch::Right) => r,
                (SpaceExpr::SumP2 { left, .. }, Branch::Left) => left,
                (SpaceExpr::SumP2 { right, .. }, Branch::Right) => right,
                (SpaceExpr::Atom(_), _) => return None,
            };
        }
        Some(cur)
    }

    fn check_site_open(&self, site: &SiteRef) -> Result<(), ExprError> {
        match self.subexpr(&site.path) {
            Some(SpaceExpr::Atom(atom)) if atom.site(&site.site).is_some() => {}
            _ => return Err(ExprError::SiteNotFound(site.site.clone())),
        }
        let consumed = self.consumed_sites();
        if consumed.iter().any(|(p, s)| *p == site.path && s == &site.site) {
            return Err(ExprError::SiteAlreadyConsumed(site.site.clone()));
        }
        Ok(())
    }

    /// Absolute (path, site) pairs consumed by the sums inside this tree.
    fn consumed_sites(&self) -> Vec<(TreePath, String)> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut |prefix, node| {
            if let SpaceExpr::SumP2 { left_site, right_site, .. } = node {
                for (branch, site) in [(Branch::Left, left_site), (Branch::Right, right_site)] {
                    let mut abs = prefix.to_vec();
                    abs.push(branch);
                    abs.extend(site.path.0.iter().copied());
                    out.push((TreePath(abs), site.site.clone()));
                }
            }
        });
        out
    }

    fn walk<'a>(
        &'a self,
        prefix: &mut Vec<Branch>,
        visit: &mut impl FnMut(&[Branch], &'a SpaceExpr),
    ) {
        visit(prefix, self);
        match self {
            SpaceExpr::Atom(_) => {}
            SpaceExpr::SumS2(l, r) => {
                prefix.push(Branch::Left);
                l.walk(prefix, visit);
                prefix.pop();
                prefix.push(Branch::Right);
                r.walk(prefix, visit);
                prefix.pop();
            }
            SpaceExpr::SumP2 { left, right, .. } => {
                prefix.push(Branch::Left);
                left.walk(prefix, visit);
                prefix.pop();
                prefix.push(Branch::Right);
                right.walk(prefix, visit);
                prefix.pop();
            }
        }
    }

    /// Atom occurrences in depth-first, left-to-right order with their
    /// absolute paths.
    pub fn atom_occurrences(&self) -> Vec<(TreePath, Arc<AtomSpec>)> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut |prefix, node| {
            if let SpaceExpr::Atom(atom) = node {
                out.push((TreePath(prefix.to_vec()), atom.clone()));
            }
        });
        out
    }

    /// Unconsumed singular sites as absolute (path, site id) pairs, in
    /// depth-first order.
    pub fn available_sites(&self) -> Vec<(TreePath, String)> {
        let consumed = self.consumed_sites();
        let mut out = Vec::new();
        for (path, atom) in self.atom_occurrences() {
            for site in &atom.singular_sites {
                let taken =
                    consumed.iter().any(|(p, s)| *p == path && s == &site.id);
                if !taken {
                    out.push((path.clone(), site.id.clone()));
                }
            }
        }
        out
    }

    /// Find the `occurrence`-th (1-based) open site with the given id, in
    /// depth-first order. This is the resolution rule of the surface
    /// language.
    pub fn find_open_site(&self, id: &str, occurrence: usize) -> Result<SiteRef, ExprError> {
        let mut seen = 0usize;
        for (path, site) in self.available_sites() {
            if site == id {
                seen += 1;
                if seen == occurrence {
                    return Ok(SiteRef::new(path, site));
                }
            }
        }
        Err(ExprError::SiteNotFound(id.to_string()))
    }

    /// 1-based index of an open site among the open sites sharing its id,
    /// in depth-first order. Inverse of [`Self::find_open_site`].
    pub fn open_site_ordinal(&self, site: &SiteRef) -> Option<usize> {
        let mut seen = 0usize;
        for (path, id) in self.available_sites() {
            if id == site.site {
                seen += 1;
                if path == site.path {
                    return Some(seen);
                }
            }
        }
        None
    }

    /// Number of topologically singular points of the described space.
    pub fn singular_count(&self) -> usize {
        self.available_sites().len()
    }

    pub fn is_manifold_expr(&self) -> bool {
        self.atom_occurrences().iter().all(|(_, a)| a.flags.manifold)
    }

    /// Orientability of a manifold expression: all summands orientable.
    /// `None` when some flag is missing; singular expressions are reported
    /// as non-orientable (their manifold part always is).
    pub fn orientable(&self) -> Option<bool> {
        if self.singular_count() > 0 {
            return Some(false);
        }
        let mut all_known = true;
        for (_, atom) in self.atom_occurrences() {
            match atom.flags.orientable {
                Some(false) => return Some(false),
                Some(true) => {}
                None => all_known = false,
            }
        }
        if all_known {
            Some(true)
        } else {
            None
        }
    }
}

impl fmt::Display for SpaceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::io::format_expr(self))
    }
}

/// An atom occurrence index paired with one of its site ids. Occurrences
/// are numbered in depth-first, left-to-right order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccurrenceSite {
    pub occurrence: usize,
    pub site: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Join {
    pub left: OccurrenceSite,
    pub right: OccurrenceSite,
}

/// The tree-shape-free content of an expression: atom occurrences plus the
/// pairing of consumed sites. Two expressions with the same join graph
/// describe the same space regardless of how their sums are nested.
#[derive(Debug, Clone)]
pub struct JoinGraph {
    pub atoms: Vec<Arc<AtomSpec>>,
    pub joins: Vec<Join>,
}

impl JoinGraph {
    pub fn open_sites(&self) -> Vec<OccurrenceSite> {
        let mut out = Vec::new();
        for (occ, atom) in self.atoms.iter().enumerate() {
            for site in &atom.singular_sites {
                let taken = self.joins.iter().any(|j| {
                    (j.left.occurrence == occ && j.left.site == site.id)
                        || (j.right.occurrence == occ && j.right.site == site.id)
                });
                if !taken {
                    out.push(OccurrenceSite { occurrence: occ, site: site.id.clone() });
                }
            }
        }
        out
    }
}

/// Flatten an expression into its [`JoinGraph`].
pub fn join_graph(e: &SpaceExpr) -> JoinGraph {
    let occurrences = e.atom_occurrences();
    let index_of = |path: &TreePath| -> usize {
        occurrences
            .iter()
            .position(|(p, _)| p == path)
            .expect("validated site paths reach atoms")
    };

    let mut joins = Vec::new();
    e.walk(&mut Vec::new(), &mut |prefix, node| {
        if let SpaceExpr::SumP2 { left_site, right_site, .. } = node {
            let absolute = |branch: Branch, site: &SiteRef| {
                let mut abs = prefix.to_vec();
                abs.push(branch);
                abs.extend(site.path.0.iter().copied());
                OccurrenceSite {
                    occurrence: index_of(&TreePath(abs)),
                    site: site.site.clone(),
                }
            };
            joins.push(Join {
                left: absolute(Branch::Left, left_site),
                right: absolute(Branch::Right, right_site),
            });
        }
    });

    JoinGraph { atoms: occurrences.into_iter().map(|(_, a)| a).collect(), joins }
}

/// `true` exactly when the normal form is a single atom flagged prime (the
/// empty normal form stands for the 3-sphere, which is prime); `false` for
/// composite normal forms; `None` when the single atom's flag is missing.
pub fn is_prime(e: &SpaceExpr) -> Result<Option<bool>, ExprError> {
    let nf = crate::normalizer::normal_form(e)?;
    match nf.summand_atoms().as_slice() {
        [] => Ok(Some(true)),
        [atom] => Ok(atom.flags.prime),
        _ => Ok(Some(false)),
    }
}

/// Irreducibility from declared flags plus the two coherence implications:
/// irreducible spaces are prime, and a prime space that is neither sphere
/// bundle over the circle and has no non-separating projective plane is
/// irreducible. Composite normal forms are never irreducible.
pub fn is_irreducible(e: &SpaceExpr) -> Result<Option<bool>, ExprError> {
    let nf = crate::normalizer::normal_form(e)?;
    let atoms = nf.summand_atoms();
    match atoms.as_slice() {
        [] => Ok(Some(true)), // the 3-sphere
        [atom] => {
            let flags = &atom.flags;
            if flags.irreducible == Some(true) && flags.prime == Some(false) {
                return Err(ExprError::InconsistentFlags(atom.name.clone()));
            }
            if let Some(known) = flags.irreducible {
                return Ok(Some(known));
            }
            if flags.prime == Some(false) {
                return Ok(Some(false));
            }
            let bundle = atom.name == "S2xS1" || atom.name == "S2~S1";
            if flags.prime == Some(true)
                && !bundle
                && flags.has_nonseparating_p2 == Some(false)
            {
                return Ok(Some(true));
            }
            Ok(None)
        }
        _ => Ok(Some(false)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{AtomFlags, AtomSpec, Catalog};

    fn catalog() -> Catalog {
        Catalog::builtin()
    }

    fn atom(c: &Catalog, name: &str) -> SpaceExpr {
        SpaceExpr::atom(c.atom(name).unwrap())
    }

    fn site(e: &SpaceExpr, id: &str) -> SiteRef {
        e.find_open_site(id, 1).unwrap()
    }

    #[test]
    fn sphere_sum_adds_singular_counts() {
        let c = catalog();
        let susp = atom(&c, "Susp(P2)");
        let e = SpaceExpr::sum_s2(susp.clone(), susp.clone());
        assert_eq!(e.singular_count(), 4);
        assert_eq!(atom(&c, "S3").singular_count(), 0);
        assert_eq!(susp.singular_count(), 2);
    }

    #[test]
    fn plane_sum_consumes_two_sites() {
        let c = catalog();
        let q = atom(&c, "Q");
        let e = SpaceExpr::sum_p2(q.clone(), site(&q, "q1"), q.clone(), site(&q, "q1")).unwrap();
        assert_eq!(e.singular_count(), 4 + 4 - 2);
    }

    #[test]
    fn plane_sum_rejects_missing_site() {
        let c = catalog();
        let q = atom(&c, "Q");
        let bogus = SiteRef::new(TreePath::root(), "nope");
        let err =
            SpaceExpr::sum_p2(q.clone(), bogus, q.clone(), site(&q, "q1")).unwrap_err();
        assert_eq!(err, ExprError::SiteNotFound("nope".to_string()));
    }

    #[test]
    fn plane_sum_rejects_consumed_site() {
        let c = catalog();
        let q = atom(&c, "Q");
        let x1 = SpaceExpr::sum_p2(q.clone(), site(&q, "q1"), q.clone(), site(&q, "q1")).unwrap();
        // q1 of the left copy is consumed inside x1.
        let stale = SiteRef::new(TreePath(vec![Branch::Left]), "q1");
        let err = SpaceExpr::sum_p2(x1, stale, q.clone(), site(&q, "q2")).unwrap_err();
        assert_eq!(err, ExprError::SiteAlreadyConsumed("q1".to_string()));
    }

    #[test]
    fn join_graph_forgets_nesting() {
        let c = catalog();
        let susp = atom(&c, "Susp(P2)");
        let s1 = atom(&c, "S2xS1");
        let left = SpaceExpr::sum_s2(susp.clone(), s1.clone());
        let right = SpaceExpr::sum_s2(s1.clone(), susp.clone());
        let jg_left = join_graph(&left);
        let jg_right = join_graph(&right);
        let names = |jg: &JoinGraph| {
            let mut v: Vec<String> = jg.atoms.iter().map(|a| a.name.clone()).collect();
            v.sort();
            v
        };
        assert_eq!(names(&jg_left), names(&jg_right));
        assert!(jg_left.joins.is_empty());
    }

    #[test]
    fn open_site_ordinals_round_trip() {
        let c = catalog();
        let q = atom(&c, "Q");
        let x1 = SpaceExpr::sum_p2(q.clone(), site(&q, "q1"), q.clone(), site(&q, "q1")).unwrap();
        // Both copies still expose q3; the second one has ordinal 2.
        let second = x1.find_open_site("q3", 2).unwrap();
        assert_eq!(second.path, TreePath(vec![Branch::Right]));
        assert_eq!(x1.open_site_ordinal(&second), Some(2));
        assert!(x1.find_open_site("q3", 3).is_err());
    }

    #[test]
    fn primality_of_atoms_and_sums() {
        let c = catalog();
        let susp = atom(&c, "Susp(P2)");
        assert_eq!(is_prime(&susp).unwrap(), Some(true));
        assert_eq!(is_prime(&atom(&c, "S3")).unwrap(), Some(true));
        let sum = SpaceExpr::sum_s2(susp.clone(), susp.clone());
        assert_eq!(is_prime(&sum).unwrap(), Some(false));
        let xg = SpaceExpr::atom(c.xg_atom(1).unwrap());
        assert_eq!(is_prime(&xg).unwrap(), Some(true));
        assert_eq!(is_prime(&atom(&c, "Q")).unwrap(), Some(false));
    }

    #[test]
    fn primality_unknown_without_flags() {
        let c = catalog();
        let opaque = SpaceExpr::atom(std::sync::Arc::new(AtomSpec {
            name: "mystery".to_string(),
            singular_sites: vec![SingularSite::plain("a"), SingularSite::plain("b")],
            h1: None,
            flags: AtomFlags { manifold: false, amphichiral: true, ..Default::default() },
            double_branched_cover: None,
            graph: None,
        }));
        assert_eq!(is_prime(&opaque).unwrap(), None);
        assert_eq!(is_irreducible(&opaque).unwrap(), None);
        let _ = c;
    }

    use crate::catalog::SingularSite;

    #[test]
    fn irreducibility_of_atoms_and_sums() {
        let c = catalog();
        assert_eq!(is_irreducible(&atom(&c, "S2xS1")).unwrap(), Some(false));
        assert_eq!(is_irreducible(&atom(&c, "Susp(P2)")).unwrap(), Some(true));
        let xg = SpaceExpr::atom(c.xg_atom(2).unwrap());
        assert_eq!(is_irreducible(&xg).unwrap(), Some(false));
        let sum = SpaceExpr::sum_s2(atom(&c, "Susp(P2)"), atom(&c, "Susp(P2)"));
        assert_eq!(is_irreducible(&sum).unwrap(), Some(false));
    }

    #[test]
    fn irreducibility_derived_from_prime_flags() {
        // prime and not a sphere bundle and no non-separating plane
        // forces irreducibility.
        let derived = SpaceExpr::atom(std::sync::Arc::new(AtomSpec {
            name: "derived".to_string(),
            singular_sites: vec![SingularSite::plain("a"), SingularSite::plain("b")],
            h1: None,
            flags: AtomFlags {
                manifold: false,
                prime: Some(true),
                has_nonseparating_p2: Some(false),
                amphichiral: true,
                ..Default::default()
            },
            double_branched_cover: None,
            graph: None,
        }));
        assert_eq!(is_irreducible(&derived).unwrap(), Some(true));
    }

    #[test]
    fn inconsistent_flags_are_reported() {
        let bad = SpaceExpr::atom(std::sync::Arc::new(AtomSpec {
            name: "bad".to_string(),
            singular_sites: Vec::new(),
            h1: None,
            flags: AtomFlags {
                manifold: true,
                irreducible: Some(true),
                prime: Some(false),
                amphichiral: true,
                ..Default::default()
            },
            double_branched_cover: None,
            graph: None,
        }));
        assert_eq!(
            is_irreducible(&bad).unwrap_err(),
            ExprError::InconsistentFlags("bad".to_string())
        );
    }

    #[test]
    fn orientability_of_expressions() {
        let c = catalog();
        assert_eq!(atom(&c, "S2xS1").orientable(), Some(true));
        assert_eq!(atom(&c, "S2~S1").orientable(), Some(false));
        assert_eq!(atom(&c, "Susp(P2)").orientable(), Some(false));
        let mixed = SpaceExpr::sum_s2(atom(&c, "S2xS1"), atom(&c, "S2~S1"));
        assert_eq!(mixed.orientable(), Some(false));
    }
}
