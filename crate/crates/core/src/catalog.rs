//! Registry of boundary blocks and closed prime spaces.
//!
//! The built-in catalog ships the singular blocks (cone over the projective
//! plane, `B(pt)`, `B(S2)`, `B(S4)`), the six manifold blocks (geminus,
//! dipus, bipod, quadripus, tetrapod, octopod), the closed atoms the
//! calculus needs (`S3`, `Susp(P2)`, the two sphere bundles over the
//! circle, the capped blocks), and a few auxiliary manifolds that serve as
//! double branched covers. Capping, doubling, and gluing consult closed
//! tables keyed by name; pairs outside the tables degrade to opaque specs
//! carrying only derivable invariants.
//!
//! A catalog is immutable once loaded and all operations here are pure.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::SpaceExpr;
use crate::homology::AbelianGroup;
use crate::p2graph::{Color, ColoredGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("unknown catalog name `{0}`")]
    UnknownName(String),
    #[error("block `{0}` has no projective-plane boundary component")]
    NoProjectivePlaneBoundary(String),
    #[error("block `{0}` has no unique gluing boundary component")]
    AmbiguousBoundary(String),
    #[error("boundary kinds of `{0}` and `{1}` do not match")]
    BoundaryMismatch(String, String),
    #[error("Xg genus must be at least 1, got {0}")]
    InvalidGenus(u32),
    #[error("invalid catalog entry `{name}`: {reason}")]
    Invalid { name: String, reason: String },
    #[error("user catalog may not redefine built-in `{0}`")]
    RedefinesBuiltin(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryKind {
    Sphere,
    ProjectivePlane,
    Torus,
    KleinBottle,
}

impl BoundaryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryKind::Sphere => "sphere",
            BoundaryKind::ProjectivePlane => "p2",
            BoundaryKind::Torus => "torus",
            BoundaryKind::KleinBottle => "klein",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sphere" | "s2" => Some(BoundaryKind::Sphere),
            "p2" | "projective" => Some(BoundaryKind::ProjectivePlane),
            "torus" | "t2" => Some(BoundaryKind::Torus),
            "klein" | "kl" => Some(BoundaryKind::KleinBottle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryComponent {
    pub kind: BoundaryKind,
    pub label: String,
}

/// A topologically singular point. The space of directions at such a point
/// is always a projective plane, so only the identifier and the optional
/// image of the order-2 boundary class in the owning atom's H₁ are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularSite {
    pub id: String,
    /// Coordinates over the owning atom's H₁ generators (free then torsion).
    pub h1_image: Option<Vec<i128>>,
}

impl SingularSite {
    pub fn plain(id: impl Into<String>) -> Self {
        SingularSite { id: id.into(), h1_image: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AtomFlags {
    pub manifold: bool,
    pub orientable: Option<bool>,
    pub prime: Option<bool>,
    pub irreducible: Option<bool>,
    pub simply_connected: Option<bool>,
    pub has_nonseparating_p2: Option<bool>,
    /// Mirror images are identified throughout: every built-in closed atom
    /// admits an orientation-reversing self-homeomorphism or is
    /// non-orientable. Recorded as an assumption, never computed.
    pub amphichiral: bool,
}

/// Declared colored P²-graph of an atom's manifold part, with the
/// correspondence between singular sites and white boundary vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclaredGraph {
    pub graph: ColoredGraph,
    pub site_whites: BTreeMap<String, String>,
}

/// A closed space: the unit of the expression algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpec {
    pub name: String,
    pub singular_sites: Vec<SingularSite>,
    pub h1: Option<AbelianGroup>,
    pub flags: AtomFlags,
    pub double_branched_cover: Option<String>,
    pub graph: Option<DeclaredGraph>,
}

impl AtomSpec {
    pub fn site(&self, id: &str) -> Option<&SingularSite> {
        self.singular_sites.iter().find(|s| s.id == id)
    }

    pub fn site_count(&self) -> usize {
        self.singular_sites.len()
    }

    pub fn is_singular(&self) -> bool {
        !self.singular_sites.is_empty()
    }
}

/// A space with non-empty boundary, used by the capping, doubling, and
/// gluing operations and by generalized surgery.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub name: String,
    pub boundary: Vec<BoundaryComponent>,
    pub singular_sites: Vec<SingularSite>,
    pub double_cover: Option<String>,
    pub involution_note: Option<String>,
    pub fixed_point_count: usize,
}

impl BlockSpec {
    pub fn p2_components(&self) -> Vec<&BoundaryComponent> {
        self.boundary.iter().filter(|c| c.kind == BoundaryKind::ProjectivePlane).collect()
    }

    fn non_p2_components(&self) -> Vec<&BoundaryComponent> {
        self.boundary.iter().filter(|c| c.kind != BoundaryKind::ProjectivePlane).collect()
    }
}

#[derive(Debug, Clone)]
pub enum Entry {
    Atom(Arc<AtomSpec>),
    Block(Arc<BlockSpec>),
}

impl Entry {
    pub fn name(&self) -> &str {
        match self {
            Entry::Atom(a) => &a.name,
            Entry::Block(b) => &b.name,
        }
    }
}

/// Result of capping the projective-plane boundary of a block.
#[derive(Debug, Clone)]
pub enum Capped {
    Atom(Arc<AtomSpec>),
    Block(Arc<BlockSpec>),
}

impl Capped {
    pub fn name(&self) -> &str {
        match self {
            Capped::Atom(a) => &a.name,
            Capped::Block(b) => &b.name,
        }
    }
}

/// Result of gluing two blocks along their (unique, matching) boundary.
#[derive(Debug, Clone)]
pub enum Glued {
    Closed(SpaceExpr),
    Block(Arc<BlockSpec>),
}

pub struct Catalog {
    entries: BTreeMap<String, Entry>,
    builtins: Vec<String>,
}

/// Known gluing results, keyed by unordered block-name pairs.
const GLUE_TABLE: &[((&str, &str), TableResult)] = &[
    (("D3", "D3"), TableResult::Atom("S3")),
    (("B(S2)", "D3"), TableResult::Atom("Susp(P2)")),
    (("K(P2)", "K(P2)"), TableResult::Atom("Susp(P2)")),
    (("B(pt)", "B(pt)"), TableResult::Sum(&["Susp(P2)", "Susp(P2)"])),
    (("B(S2)", "B(S2)"), TableResult::Sum(&["Susp(P2)", "Susp(P2)"])),
    (("B(S4)", "B(S4)"), TableResult::Atom("T3/beta")),
    (("quadripus", "quadripus"), TableResult::Block("octopod")),
];

/// Known capping results: block name -> catalog name of the capped space.
const CAP_TABLE: &[(&str, &str)] = &[
    ("K(P2)", "Susp(P2)"),
    ("geminus", "B(pt)"),
    ("quadripus", "B(S4)"),
    ("octopod", "T3/beta"),
    ("bipod", "capped_bipod"),
    ("tetrapod", "capped_tetrapod"),
];

#[derive(Debug, Clone, Copy)]
enum TableResult {
    Atom(&'static str),
    Sum(&'static [&'static str]),
    Block(&'static str),
}

/// The five non-negatively curved blocks whose pairwise gluings are
/// enumerated by [`Catalog::enumerate_gluings`].
pub const GLUING_BLOCKS: [&str; 5] = ["D3", "K(P2)", "B(pt)", "B(S2)", "B(S4)"];

impl Catalog {
    /// The built-in catalog, parsed from the embedded catalog file.
    pub fn builtin() -> Catalog {
        let entries = crate::io::catalog_text::parse_catalog(BUILTIN_CATALOG)
            .expect("embedded catalog must parse");
        let mut catalog = Catalog { entries: BTreeMap::new(), builtins: Vec::new() };
        for entry in entries {
            catalog
                .insert(entry)
                .expect("embedded catalog must validate");
        }
        catalog
            .validate_cover_references()
            .expect("embedded cover references must resolve to orientable manifolds");
        catalog.builtins = catalog.entries.keys().cloned().collect();
        catalog
    }

    /// Merge user entries; rejects redefinition of built-ins and anything
    /// failing validation.
    pub fn merge(&mut self, entries: Vec<Entry>) -> Result<(), CatalogError> {
        for entry in entries {
            if self.builtins.iter().any(|b| b == entry.name()) {
                return Err(CatalogError::RedefinesBuiltin(entry.name().to_string()));
            }
            self.insert(entry)?;
        }
        self.validate_cover_references()
    }

    /// A resolvable double branched cover of a closed atom must itself be a
    /// closed orientable manifold atom. Unresolved names are allowed (they
    /// may live outside the catalog).
    fn validate_cover_references(&self) -> Result<(), CatalogError> {
        for entry in self.entries.values() {
            let Entry::Atom(atom) = entry else { continue };
            let Some(cover) = &atom.double_branched_cover else { continue };
            match self.entries.get(cover) {
                Some(Entry::Atom(c))
                    if c.flags.manifold && c.flags.orientable != Some(false) => {}
                None => {}
                _ => {
                    return Err(CatalogError::Invalid {
                        name: atom.name.clone(),
                        reason: format!(
                            "double branched cover `{cover}` is not a closed orientable \
                             manifold atom"
                        ),
                    })
                }
            }
        }
        Ok(())
    }

    fn insert(&mut self, entry: Entry) -> Result<(), CatalogError> {
        match &entry {
            Entry::Atom(a) => validate_atom(a)?,
            Entry::Block(b) => validate_block(b)?,
        }
        self.entries.insert(entry.name().to_string(), entry);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Result<&Entry, CatalogError> {
        self.entries.get(name).ok_or_else(|| CatalogError::UnknownName(name.to_string()))
    }

    pub fn atom(&self, name: &str) -> Result<Arc<AtomSpec>, CatalogError> {
        match self.lookup(name)? {
            Entry::Atom(a) => Ok(a.clone()),
            Entry::Block(_) => Err(CatalogError::Invalid {
                name: name.to_string(),
                reason: "expected a closed atom, found a block with boundary".to_string(),
            }),
        }
    }

    pub fn block(&self, name: &str) -> Result<Arc<BlockSpec>, CatalogError> {
        match self.lookup(name)? {
            Entry::Block(b) => Ok(b.clone()),
            Entry::Atom(_) => Err(CatalogError::Invalid {
                name: name.to_string(),
                reason: "expected a block with boundary, found a closed atom".to_string(),
            }),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = &Entry> {
        self.entries.values()
    }

    /// Replace every projective-plane boundary component with a cone,
    /// adding one singular site per capped component. Known blocks resolve
    /// through the capping table.
    pub fn cap_off(&self, block: &BlockSpec) -> Result<Capped, CatalogError> {
        if block.p2_components().is_empty() {
            return Err(CatalogError::NoProjectivePlaneBoundary(block.name.clone()));
        }
        if let Some((_, target)) = CAP_TABLE.iter().find(|(b, _)| *b == block.name) {
            return Ok(match self.lookup(target)? {
                Entry::Atom(a) => Capped::Atom(a.clone()),
                Entry::Block(b) => Capped::Block(b.clone()),
            });
        }

        let mut sites = block.singular_sites.clone();
        for comp in block.p2_components() {
            sites.push(SingularSite::plain(format!("cap_{}", comp.label)));
        }
        let remaining: Vec<BoundaryComponent> =
            block.non_p2_components().into_iter().cloned().collect();
        let name = format!("cap({})", block.name);
        if remaining.is_empty() {
            if !sites.len().is_multiple_of(2) {
                return Err(CatalogError::Invalid {
                    name,
                    reason: format!(
                        "capping closes the block with an odd singular count {}",
                        sites.len()
                    ),
                });
            }
            Ok(Capped::Atom(Arc::new(AtomSpec {
                name,
                singular_sites: sites,
                h1: None,
                flags: AtomFlags { manifold: false, amphichiral: true, ..Default::default() },
                double_branched_cover: block.double_cover.clone(),
                graph: None,
            })))
        } else {
            // Capping restores the excised fixed points as singular sites.
            let fixed_point_count = sites.len();
            Ok(Capped::Block(Arc::new(BlockSpec {
                name,
                boundary: remaining,
                singular_sites: sites,
                double_cover: block.double_cover.clone(),
                involution_note: block.involution_note.clone(),
                fixed_point_count,
            })))
        }
    }

    /// Glue two blocks along their matching boundary. Table pairs return
    /// the recorded space; single-boundary pairs of equal kind outside the
    /// table return an opaque closed atom.
    pub fn glue(&self, a: &BlockSpec, b: &BlockSpec) -> Result<Glued, CatalogError> {
        let key = if a.name <= b.name {
            (a.name.as_str(), b.name.as_str())
        } else {
            (b.name.as_str(), a.name.as_str())
        };
        if let Some((_, result)) = GLUE_TABLE.iter().find(|(pair, _)| *pair == key) {
            return Ok(match result {
                TableResult::Atom(name) => Glued::Closed(SpaceExpr::atom(self.atom(name)?)),
                TableResult::Sum(names) => {
                    let mut parts = names.iter();
                    let first = SpaceExpr::atom(self.atom(parts.next().expect("non-empty"))?);
                    let expr = parts.try_fold(first, |acc, name| {
                        Ok::<_, CatalogError>(SpaceExpr::sum_s2(acc, SpaceExpr::atom(self.atom(name)?)))
                    })?;
                    Glued::Closed(expr)
                }
                TableResult::Block(name) => Glued::Block(self.block(name)?),
            });
        }

        if a.boundary.len() != 1 || b.boundary.len() != 1 {
            return Err(CatalogError::AmbiguousBoundary(if a.boundary.len() != 1 {
                a.name.clone()
            } else {
                b.name.clone()
            }));
        }
        if a.boundary[0].kind != b.boundary[0].kind {
            return Err(CatalogError::BoundaryMismatch(a.name.clone(), b.name.clone()));
        }

        let (first, second) = if a.name <= b.name { (a, b) } else { (b, a) };
        let mut sites = Vec::new();
        for (prefix, part) in [("l_", first), ("r_", second)] {
            for site in &part.singular_sites {
                sites.push(SingularSite::plain(format!("{prefix}{}", site.id)));
            }
        }
        let name = format!("glue({},{})", first.name, second.name);
        if sites.len() % 2 != 0 {
            return Err(CatalogError::Invalid {
                name,
                reason: format!("glued space has odd singular count {}", sites.len()),
            });
        }
        Ok(Glued::Closed(SpaceExpr::atom(Arc::new(AtomSpec {
            name,
            flags: AtomFlags {
                manifold: sites.is_empty(),
                amphichiral: true,
                ..Default::default()
            },
            singular_sites: sites,
            h1: None,
            double_branched_cover: None,
            graph: None,
        }))))
    }

    /// Double a block along its gluing boundary: projective-plane boundary
    /// components are capped first, after which exactly one component must
    /// remain (or the block had a single component to begin with). Pairs
    /// outside the gluing table come back as opaque `double(name)` atoms
    /// carrying only their derived singular count.
    pub fn double_along(&self, block: &BlockSpec) -> Result<SpaceExpr, CatalogError> {
        let subject: Arc<BlockSpec> = if block.boundary.len() == 1 {
            Arc::new(block.clone())
        } else {
            match self.cap_off(block)? {
                Capped::Block(b) if b.boundary.len() == 1 => b,
                _ => return Err(CatalogError::AmbiguousBoundary(block.name.clone())),
            }
        };
        let key = (subject.name.as_str(), subject.name.as_str());
        if GLUE_TABLE.iter().any(|(pair, _)| *pair == key) {
            return match self.glue(&subject, &subject)? {
                Glued::Closed(expr) => Ok(expr),
                Glued::Block(_) => unreachable!("gluing single-boundary blocks closes them"),
            };
        }
        let sites: Vec<SingularSite> = ["l_", "r_"]
            .iter()
            .flat_map(|prefix| {
                subject
                    .singular_sites
                    .iter()
                    .map(move |s| SingularSite::plain(format!("{prefix}{}", s.id)))
            })
            .collect();
        Ok(SpaceExpr::atom(Arc::new(AtomSpec {
            name: format!("double({})", block.name),
            flags: AtomFlags {
                manifold: sites.is_empty(),
                amphichiral: true,
                ..Default::default()
            },
            singular_sites: sites,
            h1: None,
            double_branched_cover: None,
            graph: None,
        })))
    }

    /// All boundary-compatible unordered pairs over the five blocks of the
    /// gluing theorem, with their realized closed spaces. Deterministic.
    pub fn enumerate_gluings(&self) -> Vec<((String, String), SpaceExpr)> {
        let mut out = Vec::new();
        for (i, left) in GLUING_BLOCKS.iter().enumerate() {
            for right in &GLUING_BLOCKS[i..] {
                let a = self.block(left).expect("gluing blocks are built in");
                let b = self.block(right).expect("gluing blocks are built in");
                if a.boundary[0].kind != b.boundary[0].kind {
                    continue;
                }
                match self.glue(&a, &b).expect("table covers compatible pairs") {
                    Glued::Closed(expr) => {
                        out.push(((left.to_string(), right.to_string()), expr))
                    }
                    Glued::Block(_) => unreachable!("five-block gluings are closed"),
                }
            }
        }
        out
    }

    /// The genus-`g` member of the infinite prime, non-irreducible family:
    /// the quotient of a product of a genus-`g` surface with a circle by an
    /// involution, with two singular cones removed and the resulting
    /// boundary planes identified. Singular count `4g + 2`.
    pub fn xg_atom(&self, g: u32) -> Result<Arc<AtomSpec>, CatalogError> {
        if g == 0 {
            return Err(CatalogError::InvalidGenus(g));
        }
        let count = 4 * g as usize + 2;
        let sites = (1..=count).map(|i| SingularSite::plain(format!("x{i}"))).collect();
        Ok(Arc::new(AtomSpec {
            name: format!("Xg({g})"),
            singular_sites: sites,
            h1: None,
            flags: AtomFlags {
                manifold: false,
                orientable: None,
                prime: Some(true),
                irreducible: Some(false),
                simply_connected: None,
                has_nonseparating_p2: Some(true),
                amphichiral: true,
            },
            double_branched_cover: None,
            graph: None,
        }))
    }
}

/// Parity, flag coherence, and graph-shape checks applied to every atom at
/// load time. Catalogs that break them are rejected outright.
pub fn validate_atom(a: &AtomSpec) -> Result<(), CatalogError> {
    let fail = |reason: String| CatalogError::Invalid { name: a.name.clone(), reason };
    if !a.singular_sites.len().is_multiple_of(2) {
        return Err(fail(format!("odd singular count {}", a.singular_sites.len())));
    }
    if a.flags.manifold != a.singular_sites.is_empty() {
        return Err(fail("manifold flag must match emptiness of singular sites".to_string()));
    }
    if a.flags.irreducible == Some(true) && a.flags.prime == Some(false) {
        return Err(fail("irreducible atoms are prime".to_string()));
    }
    if a.flags.prime == Some(true) && a.flags.irreducible == Some(false) {
        let excused = a.name == "S2xS1"
            || a.name == "S2~S1"
            || a.flags.has_nonseparating_p2 == Some(true);
        if !excused {
            return Err(fail(
                "a prime, non-irreducible space must be one of the sphere bundles over the \
                 circle or contain a non-separating projective plane"
                    .to_string(),
            ));
        }
    }
    let mut seen = Vec::new();
    for site in &a.singular_sites {
        if seen.contains(&&site.id) {
            return Err(fail(format!("duplicate site id `{}`", site.id)));
        }
        seen.push(&site.id);
        if let Some(image) = &site.h1_image {
            match &a.h1 {
                None => {
                    return Err(fail(format!(
                        "site `{}` declares an H1 image but the atom has no H1",
                        site.id
                    )))
                }
                Some(h1) => {
                    let gens = h1.rank() + h1.torsion().len();
                    if image.len() != gens {
                        return Err(fail(format!(
                            "site `{}` image has {} coordinates, H1 has {} generators",
                            site.id,
                            image.len(),
                            gens
                        )));
                    }
                }
            }
        }
    }
    if let Some(decl) = &a.graph {
        if !decl.graph.satisfies_degree_law() {
            return Err(fail("declared graph violates the degree laws".to_string()));
        }
        let whites: Vec<&str> = decl
            .graph
            .vertices()
            .filter(|(_, c)| *c == Color::White)
            .map(|(id, _)| id)
            .collect();
        if whites.len() != a.singular_sites.len() {
            return Err(fail(format!(
                "declared graph has {} white vertices for {} sites",
                whites.len(),
                a.singular_sites.len()
            )));
        }
        let mut used_whites = Vec::new();
        for site in &a.singular_sites {
            match decl.site_whites.get(&site.id) {
                Some(w) if decl.graph.color_of(w) == Some(Color::White) => {
                    if used_whites.contains(&w) {
                        return Err(fail(format!(
                            "white vertex `{w}` is claimed by more than one site"
                        )));
                    }
                    used_whites.push(w);
                }
                Some(w) => {
                    return Err(fail(format!("site `{}` maps to non-white vertex `{w}`", site.id)))
                }
                None => return Err(fail(format!("site `{}` has no white vertex", site.id))),
            }
        }
    }
    Ok(())
}

pub fn validate_block(b: &BlockSpec) -> Result<(), CatalogError> {
    let fail = |reason: String| CatalogError::Invalid { name: b.name.clone(), reason };
    if b.boundary.is_empty() {
        return Err(fail("blocks must have non-empty boundary".to_string()));
    }
    if !b.singular_sites.is_empty() && b.fixed_point_count != b.singular_sites.len() {
        return Err(fail(format!(
            "fixed point count {} does not equal singular site count {}",
            b.fixed_point_count,
            b.singular_sites.len()
        )));
    }
    if b.singular_sites.is_empty() && b.fixed_point_count > 0 {
        let p2 = b.p2_components().len();
        if b.fixed_point_count != p2 {
            return Err(fail(format!(
                "fixed point count {} does not equal the {} projective-plane boundary \
                 components that replace the excised fixed points",
                b.fixed_point_count, p2
            )));
        }
    }
    let mut labels = Vec::new();
    for comp in &b.boundary {
        if labels.contains(&&comp.label) {
            return Err(fail(format!("duplicate boundary label `{}`", comp.label)));
        }
        labels.push(&comp.label);
    }
    Ok(())
}

const BUILTIN_CATALOG: &str = include_str!("catalog_builtin.cat");

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalizer::normal_form;

    fn catalog() -> Catalog {
        Catalog::builtin()
    }

    #[test]
    fn lookup_b_s4() {
        let c = catalog();
        let b = c.block("B(S4)").unwrap();
        assert_eq!(b.boundary.len(), 1);
        assert_eq!(b.boundary[0].kind, BoundaryKind::Torus);
        assert_eq!(b.singular_sites.len(), 4);
        assert_eq!(b.double_cover.as_deref(), Some("T2xI"));
        assert_eq!(b.fixed_point_count, 4);
    }

    #[test]
    fn lookup_s3() {
        let c = catalog();
        let a = c.atom("S3").unwrap();
        assert!(a.flags.manifold);
        assert!(a.singular_sites.is_empty());
        assert!(a.h1.as_ref().unwrap().is_trivial());
        assert_eq!(a.flags.prime, Some(true));
    }

    #[test]
    fn lookup_octopod() {
        let c = catalog();
        let b = c.block("octopod").unwrap();
        assert_eq!(b.boundary.len(), 8);
        assert!(b.boundary.iter().all(|c| c.kind == BoundaryKind::ProjectivePlane));
        assert_eq!(b.fixed_point_count, 8);
    }

    #[test]
    fn lookup_unknown_name() {
        assert_eq!(
            catalog().lookup("nonsense").unwrap_err(),
            CatalogError::UnknownName("nonsense".to_string())
        );
    }

    #[test]
    fn capping_table() {
        let c = catalog();
        let cap = |name: &str| c.cap_off(&c.block(name).unwrap()).unwrap();
        assert_eq!(cap("geminus").name(), "B(pt)");
        assert_eq!(cap("quadripus").name(), "B(S4)");
        assert_eq!(cap("octopod").name(), "T3/beta");
        assert_eq!(cap("bipod").name(), "capped_bipod");
        assert_eq!(cap("tetrapod").name(), "capped_tetrapod");
        assert_eq!(cap("K(P2)").name(), "Susp(P2)");
    }

    #[test]
    fn capped_bipod_is_not_simply_connected() {
        let c = catalog();
        match c.cap_off(&c.block("bipod").unwrap()).unwrap() {
            Capped::Atom(a) => {
                assert_eq!(a.flags.simply_connected, Some(false));
                assert_eq!(a.singular_sites.len(), 2);
            }
            Capped::Block(_) => panic!("capping the bipod closes it"),
        }
    }

    #[test]
    fn cap_has_no_p2_boundary_left() {
        let c = catalog();
        // dipus is not in the capping table; the opaque result keeps the
        // Klein bottle and gains one site per capped plane.
        match c.cap_off(&c.block("dipus").unwrap()).unwrap() {
            Capped::Block(b) => {
                assert_eq!(b.name, "cap(dipus)");
                assert!(b.p2_components().is_empty());
                assert_eq!(b.boundary.len(), 1);
                assert_eq!(b.boundary[0].kind, BoundaryKind::KleinBottle);
                assert_eq!(b.singular_sites.len(), 2);
                assert_eq!(b.double_cover.as_deref(), Some("Kl~xI"));
                assert_eq!(b.fixed_point_count, 2);
                validate_block(&b).expect("capped specs satisfy the block invariants");
                // Idempotence on the projective-plane boundary set.
                assert_eq!(
                    c.cap_off(&b).unwrap_err(),
                    CatalogError::NoProjectivePlaneBoundary("cap(dipus)".to_string())
                );
            }
            Capped::Atom(_) => panic!("dipus keeps its Klein bottle boundary"),
        }
    }

    #[test]
    fn cap_requires_p2_boundary() {
        let c = catalog();
        assert_eq!(
            c.cap_off(&c.block("D3").unwrap()).unwrap_err(),
            CatalogError::NoProjectivePlaneBoundary("D3".to_string())
        );
    }

    #[test]
    fn doubling_table() {
        let c = catalog();
        let double = |name: &str| {
            let expr = c.double_along(&c.block(name).unwrap()).unwrap();
            normal_form(&expr).unwrap().to_string()
        };
        assert_eq!(double("B(pt)"), "Susp(P2) # Susp(P2)");
        assert_eq!(double("B(S2)"), "Susp(P2) # Susp(P2)");
        assert_eq!(double("B(S4)"), "T3/beta");
        assert_eq!(double("D3"), "S3");
        assert_eq!(double("K(P2)"), "Susp(P2)");
    }

    #[test]
    fn doubling_rejects_ambiguous_boundary() {
        let c = catalog();
        assert_eq!(
            c.double_along(&c.block("bipod").unwrap()).unwrap_err(),
            CatalogError::AmbiguousBoundary("bipod".to_string())
        );
    }

    #[test]
    fn doubling_commutes_with_capping() {
        // double(quadripus) caps first, so it must agree with capping the
        // glued pair: cap(quadripus u quadripus) = cap(octopod) = T3/beta.
        let c = catalog();
        let doubled = c.double_along(&c.block("quadripus").unwrap()).unwrap();
        let glued = match c.glue(&c.block("quadripus").unwrap(), &c.block("quadripus").unwrap()) {
            Ok(Glued::Block(b)) => b,
            other => panic!("expected the octopod block, got {other:?}"),
        };
        assert_eq!(glued.name, "octopod");
        let capped = match c.cap_off(&glued).unwrap() {
            Capped::Atom(a) => SpaceExpr::atom(a),
            Capped::Block(_) => panic!("capping the octopod closes it"),
        };
        assert_eq!(normal_form(&doubled).unwrap(), normal_form(&capped).unwrap());
    }

    #[test]
    fn gluing_table_and_symmetry() {
        let c = catalog();
        let glue = |a: &str, b: &str| {
            match c.glue(&c.block(a).unwrap(), &c.block(b).unwrap()).unwrap() {
                Glued::Closed(e) => normal_form(&e).unwrap().to_string(),
                Glued::Block(b) => format!("block:{}", b.name),
            }
        };
        assert_eq!(glue("D3", "D3"), "S3");
        assert_eq!(glue("K(P2)", "K(P2)"), "Susp(P2)");
        assert_eq!(glue("D3", "B(S2)"), "Susp(P2)");
        assert_eq!(glue("B(S2)", "D3"), "Susp(P2)");
        assert_eq!(glue("B(pt)", "B(pt)"), "Susp(P2) # Susp(P2)");
        assert_eq!(glue("B(S4)", "B(S4)"), "T3/beta");
        assert_eq!(glue("quadripus", "quadripus"), "block:octopod");
    }

    #[test]
    fn gluing_rejects_mismatched_boundary() {
        let c = catalog();
        let err = c.glue(&c.block("D3").unwrap(), &c.block("B(S4)").unwrap()).unwrap_err();
        assert_eq!(err, CatalogError::BoundaryMismatch("D3".to_string(), "B(S4)".to_string()));
        let err = c.glue(&c.block("B(pt)").unwrap(), &c.block("B(S4)").unwrap()).unwrap_err();
        assert_eq!(
            err,
            CatalogError::BoundaryMismatch("B(pt)".to_string(), "B(S4)".to_string())
        );
    }

    #[test]
    fn opaque_glue_is_symmetric() {
        let c = catalog();
        let a = c.block("D2xS1").unwrap();
        let b = c.block("Kl~xI").unwrap();
        let name = |g: Glued| match g {
            Glued::Closed(SpaceExpr::Atom(atom)) => atom.name.clone(),
            other => panic!("expected an opaque atom, got {other:?}"),
        };
        let ab = name(c.glue(&a, &b).unwrap());
        let ba = name(c.glue(&b, &a).unwrap());
        assert_eq!(ab, ba);
        assert_eq!(ab, "glue(D2xS1,Kl~xI)");
    }

    #[test]
    fn enumerate_gluings_is_the_six_pairs() {
        let c = catalog();
        let gluings = c.enumerate_gluings();
        let pairs: Vec<(String, String)> = gluings.iter().map(|(p, _)| p.clone()).collect();
        assert_eq!(
            pairs,
            vec![
                ("D3".to_string(), "D3".to_string()),
                ("D3".to_string(), "B(S2)".to_string()),
                ("K(P2)".to_string(), "K(P2)".to_string()),
                ("B(pt)".to_string(), "B(pt)".to_string()),
                ("B(S2)".to_string(), "B(S2)".to_string()),
                ("B(S4)".to_string(), "B(S4)".to_string()),
            ]
        );
        // Klein bottle vs torus: no such pair.
        assert!(!pairs.contains(&("B(pt)".to_string(), "B(S4)".to_string())));

        let mut classes: Vec<String> = gluings
            .iter()
            .map(|(_, e)| normal_form(e).unwrap().to_string())
            .collect();
        classes.sort();
        classes.dedup();
        assert_eq!(classes, vec!["S3", "Susp(P2)", "Susp(P2) # Susp(P2)", "T3/beta"]);

        // Stable across runs.
        let again = c.enumerate_gluings();
        let pairs_again: Vec<(String, String)> = again.iter().map(|(p, _)| p.clone()).collect();
        assert_eq!(pairs, pairs_again);
    }

    /// Independent fixed-point oracle for the parametric family, from the
    /// Euler characteristic count for branched double covers of surfaces
    /// and circles: an involution of a closed surface F with k isolated
    /// fixed points satisfies chi(F) = 2 chi(F/inv) - k.
    fn fixed_points_of_product_involution(g: i64) -> i64 {
        let chi_surface = 2 - 2 * g;
        let chi_sphere = 2;
        let hyperelliptic_fixed = 2 * chi_sphere - chi_surface; // on F_g, quotient S^2
        let chi_circle = 0;
        let chi_interval = 1;
        let conjugation_fixed = 2 * chi_interval - chi_circle; // on S^1, quotient I
        hyperelliptic_fixed * conjugation_fixed
    }

    #[test]
    fn xg_singular_count_matches_fixed_point_oracle() {
        let c = catalog();
        for g in 1..=10u32 {
            // Two singular points are cut out and their boundary planes
            // identified, so the family member loses exactly two.
            let expected = fixed_points_of_product_involution(g as i64) - 2;
            let atom = c.xg_atom(g).unwrap();
            assert_eq!(atom.singular_sites.len() as i64, expected);
            assert_eq!(atom.singular_sites.len(), 4 * g as usize + 2);
        }
    }

    #[test]
    fn xg_flags_and_growth() {
        let c = catalog();
        let mut last = 0;
        for g in 1..=6u32 {
            let atom = c.xg_atom(g).unwrap();
            assert_eq!(atom.flags.prime, Some(true));
            assert_eq!(atom.flags.irreducible, Some(false));
            assert_eq!(atom.flags.has_nonseparating_p2, Some(true));
            assert_eq!(atom.singular_sites.len() % 4, 2);
            assert!(atom.singular_sites.len() > last);
            last = atom.singular_sites.len();
        }
        assert_eq!(c.xg_atom(0).unwrap_err(), CatalogError::InvalidGenus(0));
    }

    #[test]
    fn builtin_capped_results_have_even_sites() {
        let c = catalog();
        for entry in c.entries() {
            if let Entry::Atom(a) = entry {
                assert_eq!(a.singular_sites.len() % 2, 0, "{}", a.name);
            }
        }
    }

    fn bare_atom(name: &str, sites: usize) -> AtomSpec {
        AtomSpec {
            name: name.to_string(),
            singular_sites: (0..sites).map(|i| SingularSite::plain(format!("s{i}"))).collect(),
            h1: None,
            flags: AtomFlags { manifold: sites == 0, amphichiral: true, ..Default::default() },
            double_branched_cover: None,
            graph: None,
        }
    }

    #[test]
    fn validation_rejects_odd_parity() {
        let atom = bare_atom("bad", 3);
        assert!(matches!(validate_atom(&atom), Err(CatalogError::Invalid { .. })));
    }

    #[test]
    fn validation_rejects_irreducible_non_prime() {
        let mut atom = bare_atom("bad", 2);
        atom.flags.irreducible = Some(true);
        atom.flags.prime = Some(false);
        assert!(matches!(validate_atom(&atom), Err(CatalogError::Invalid { .. })));
    }

    #[test]
    fn validation_applies_prime_not_irreducible_filter() {
        let mut atom = bare_atom("bad", 2);
        atom.flags.prime = Some(true);
        atom.flags.irreducible = Some(false);
        assert!(matches!(validate_atom(&atom), Err(CatalogError::Invalid { .. })));
        atom.flags.has_nonseparating_p2 = Some(true);
        assert!(validate_atom(&atom).is_ok());
    }

    #[test]
    fn validation_checks_fixed_point_count() {
        let block = BlockSpec {
            name: "bad".to_string(),
            boundary: vec![BoundaryComponent {
                kind: BoundaryKind::Torus,
                label: "t".to_string(),
            }],
            singular_sites: vec![SingularSite::plain("a"), SingularSite::plain("b")],
            double_cover: None,
            involution_note: None,
            fixed_point_count: 3,
        };
        assert!(matches!(validate_block(&block), Err(CatalogError::Invalid { .. })));
    }

    #[test]
    fn validation_rejects_shared_white_vertices() {
        use crate::p2graph::{Color, ColoredGraph};
        let mut g = ColoredGraph::new();
        g.add_vertex("b", Color::Black);
        g.add_vertex("w1", Color::White);
        g.add_vertex("w2", Color::White);
        g.add_edge_ids("b", "w1").unwrap();
        g.add_edge_ids("b", "w2").unwrap();
        let mut atom = bare_atom("shared", 2);
        atom.graph = Some(DeclaredGraph {
            graph: g,
            site_whites: [("s0".to_string(), "w1".to_string()), ("s1".to_string(), "w1".to_string())]
                .into_iter()
                .collect(),
        });
        let err = validate_atom(&atom).unwrap_err();
        assert!(matches!(err, CatalogError::Invalid { .. }));
    }

    #[test]
    fn merge_rejects_singular_cover_references() {
        let mut c = catalog();
        let mut atom = bare_atom("fake", 2);
        atom.double_branched_cover = Some("Susp(P2)".to_string());
        let err = c.merge(vec![Entry::Atom(Arc::new(atom))]).unwrap_err();
        assert!(matches!(err, CatalogError::Invalid { .. }));
        // Unresolved cover names are tolerated.
        let mut c = catalog();
        let mut atom = bare_atom("fine", 2);
        atom.double_branched_cover = Some("SomeExternalManifold".to_string());
        c.merge(vec![Entry::Atom(Arc::new(atom))]).unwrap();
    }

    #[test]
    fn merge_rejects_builtin_redefinition() {
        let mut c = catalog();
        let err = c
            .merge(vec![Entry::Atom(Arc::new(bare_atom("S3", 0)))])
            .unwrap_err();
        assert_eq!(err, CatalogError::RedefinesBuiltin("S3".to_string()));
    }
}
