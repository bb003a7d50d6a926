//! Symbolic double branched covers.
//!
//! Every topologically singular closed space is the quotient of a closed
//! orientable manifold by an orientation-reversing involution with isolated
//! fixed points; the catalog records that manifold per atom. Covers of
//! sums compose:
//!
//! * `cover(X #^ Y) = cover(X) # cover(Y)`: the two branch sets merge
//!   across the glued plane, whose preimage is the summing sphere;
//! * `cover(X # Y) = cover(X) # cover(Y) # S2xS1` when both sides are
//!   singular: the summing sphere lifts to two spheres, leaving a handle;
//! * `cover(X # N) = cover(X) # N # N` when `N` is a manifold: the sphere
//!   lifts to two disjoint copies of `N` minus a ball.
//!
//! These rules are engine-derived; the test suite cross-checks their H₁
//! against independently known covers before trusting them. The quotient
//! relation also transfers irreducibility in both directions.

use thiserror::Error;

use crate::catalog::Catalog;
use crate::expr::{is_irreducible, ExprError, SpaceExpr};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverError {
    #[error("manifolds have no double branched cover")]
    ManifoldInput,
    #[error("irreducibility flags of `{0}` and its cover contradict each other")]
    InconsistentFlags(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// The double branched cover of a singular expression, or `None` when some
/// singular atom lacks a cover entry.
pub fn double_branched_cover(
    catalog: &Catalog,
    e: &SpaceExpr,
) -> Result<Option<SpaceExpr>, CoverError> {
    if e.singular_count() == 0 {
        return Err(CoverError::ManifoldInput);
    }
    Ok(cover_expr(catalog, e))
}

fn cover_expr(catalog: &Catalog, e: &SpaceExpr) -> Option<SpaceExpr> {
    match e {
        SpaceExpr::Atom(atom) => {
            let name = atom.double_branched_cover.as_deref()?;
            let spec = catalog.atom(name).ok()?;
            Some(SpaceExpr::atom(spec))
        }
        SpaceExpr::SumP2 { left, right, .. } => {
            let l = cover_expr(catalog, left)?;
            let r = cover_expr(catalog, right)?;
            Some(SpaceExpr::sum_s2(l, r))
        }
        SpaceExpr::SumS2(l, r) => {
            match (l.singular_count() > 0, r.singular_count() > 0) {
                (true, true) => {
                    let cl = cover_expr(catalog, l)?;
                    let cr = cover_expr(catalog, r)?;
                    let handle = SpaceExpr::atom(catalog.atom("S2xS1").ok()?);
                    Some(SpaceExpr::sum_s2(SpaceExpr::sum_s2(cl, cr), handle))
                }
                (true, false) => {
                    let cl = cover_expr(catalog, l)?;
                    Some(SpaceExpr::sum_s2(
                        SpaceExpr::sum_s2(cl, (**r).clone()),
                        (**r).clone(),
                    ))
                }
                (false, true) => {
                    let cr = cover_expr(catalog, r)?;
                    Some(SpaceExpr::sum_s2(
                        SpaceExpr::sum_s2(cr, (**l).clone()),
                        (**l).clone(),
                    ))
                }
                (false, false) => unreachable!("recursion never enters manifold subtrees"),
            }
        }
    }
}

/// Transfer the irreducibility flag across the branched covering: a
/// singular space is irreducible exactly when its cover is. Returns the
/// flag of whichever side knows it; errors when both sides know and
/// disagree; `None` for manifold input or when nothing is known.
pub fn irreducibility_transfer(
    catalog: &Catalog,
    e: &SpaceExpr,
) -> Result<Option<bool>, CoverError> {
    if e.singular_count() == 0 {
        return Ok(None);
    }
    let own = is_irreducible(e)?;
    let cover = match double_branched_cover(catalog, e)? {
        Some(cover) => is_irreducible(&cover)?,
        None => None,
    };
    match (own, cover) {
        (Some(a), Some(b)) if a != b => Err(CoverError::InconsistentFlags(e.to_string())),
        (Some(a), _) => Ok(Some(a)),
        (None, other) => Ok(other),
    }
}

/// One piece of a candidate two-sheeted cover: `sheets` copies of `base`
/// sit over the base piece of that name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub name: String,
    pub sheets: u8,
    pub base: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryRef {
    pub piece: String,
    pub boundary: String,
}

/// Combinatorial description of a candidate two-sheeted covering space:
/// pieces with sheet counts over named base pieces, plus a pairing of
/// piece boundaries describing how the total space is assembled.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PieceCover {
    pub pieces: Vec<Piece>,
    pub matchings: Vec<(BoundaryRef, BoundaryRef)>,
}

/// Check the degree-2 contract: sheet counts in {1,2}, total degree exactly
/// 2 over every base piece, matchings a perfect pairing (no boundary used
/// twice, all pieces known), and a connected total space.
pub fn verify_two_sheeted(pc: &PieceCover) -> bool {
    if pc.pieces.is_empty() {
        return false;
    }
    let mut names = Vec::new();
    for p in &pc.pieces {
        if !(1..=2).contains(&p.sheets) || names.contains(&&p.name) {
            return false;
        }
        names.push(&p.name);
    }
    let mut degree: std::collections::BTreeMap<&str, u8> = Default::default();
    for p in &pc.pieces {
        *degree.entry(p.base.as_str()).or_insert(0) += p.sheets;
    }
    if degree.values().any(|&d| d != 2) {
        return false;
    }

    let index_of = |name: &str| pc.pieces.iter().position(|p| p.name == name);
    let mut used: Vec<(&str, &str)> = Vec::new();
    let mut parent: Vec<usize> = (0..pc.pieces.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in &pc.matchings {
        let (Some(ia), Some(ib)) = (index_of(&a.piece), index_of(&b.piece)) else {
            return false;
        };
        for end in [a, b] {
            let key = (end.piece.as_str(), end.boundary.as_str());
            if used.contains(&key) {
                return false;
            }
            used.push(key);
        }
        let (ra, rb) = (find(&mut parent, ia), find(&mut parent, ib));
        parent[ra] = rb;
    }
    let root = find(&mut parent, 0);
    (0..pc.pieces.len()).all(|i| find(&mut parent, i) == root)
}
