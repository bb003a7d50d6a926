//! Seeded generators for randomized checks: used by the test suites and by
//! the CLI self-test. Everything here is deterministic in the seed.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::prelude::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::catalog::{AtomSpec, Catalog, Entry};
use crate::expr::{join_graph, Branch, SiteRef, SpaceExpr, TreePath};

/// Closed atoms usable as random leaves, plus two members of the
/// parametric family.
pub fn atom_pool(catalog: &Catalog) -> Vec<Arc<AtomSpec>> {
    let mut pool: Vec<Arc<AtomSpec>> = catalog
        .entries()
        .filter_map(|e| match e {
            Entry::Atom(a) => Some(a.clone()),
            Entry::Block(_) => None,
        })
        .collect();
    pool.push(catalog.xg_atom(1).expect("genus 1 is valid"));
    pool.push(catalog.xg_atom(2).expect("genus 2 is valid"));
    pool
}

/// A random closed expression with at most `max_atoms` leaves, biased
/// toward projective-plane sums whenever both sides have open sites.
pub fn random_expr(catalog: &Catalog, rng: &mut ChaCha8Rng, max_atoms: usize) -> SpaceExpr {
    let pool = atom_pool(catalog);
    let n = rng.random_range(1..=max_atoms.max(1));
    let mut pieces: Vec<SpaceExpr> = (0..n)
        .map(|_| SpaceExpr::atom(pool.choose(rng).expect("pool is non-empty").clone()))
        .collect();
    while pieces.len() > 1 {
        let a = pieces.swap_remove(rng.random_range(0..pieces.len()));
        let b = pieces.swap_remove(rng.random_range(0..pieces.len()));
        let sa = a.available_sites();
        let sb = b.available_sites();
        let joined = if !sa.is_empty() && !sb.is_empty() && rng.random_bool(0.6) {
            let (pa, ia) = sa.choose(rng).expect("non-empty").clone();
            let (pb, ib) = sb.choose(rng).expect("non-empty").clone();
            SpaceExpr::sum_p2(a, SiteRef::new(pa, ia), b, SiteRef::new(pb, ib))
                .expect("chosen sites are open")
        } else {
            SpaceExpr::sum_s2(a, b)
        };
        pieces.push(joined);
    }
    pieces.pop().expect("one piece remains")
}

/// Rebuild an expression with the same join graph but a random nesting:
/// sums are re-applied in random order and operand sides are swapped at
/// random. The result describes the same space, so its normal form must be
/// byte-identical to the original's.
pub fn reshuffle(e: &SpaceExpr, rng: &mut ChaCha8Rng) -> SpaceExpr {
    struct Piece {
        expr: SpaceExpr,
        occs: BTreeMap<usize, TreePath>,
    }

    let jg = join_graph(e);
    let mut pieces: Vec<Piece> = jg
        .atoms
        .iter()
        .enumerate()
        .map(|(occ, atom)| Piece {
            expr: SpaceExpr::atom(atom.clone()),
            occs: BTreeMap::from([(occ, TreePath::root())]),
        })
        .collect();

    let reroot = |occs: BTreeMap<usize, TreePath>, branch: Branch| -> BTreeMap<usize, TreePath> {
        occs.into_iter()
            .map(|(occ, mut path)| {
                path.0.insert(0, branch);
                (occ, path)
            })
            .collect()
    };

    let mut joins = jg.joins.clone();
    while !joins.is_empty() {
        let join = joins.swap_remove(rng.random_range(0..joins.len()));
        let (mut left_end, mut right_end) = (join.left, join.right);
        if rng.random_bool(0.5) {
            std::mem::swap(&mut left_end, &mut right_end);
        }
        let li = pieces
            .iter()
            .position(|p| p.occs.contains_key(&left_end.occurrence))
            .expect("occurrence belongs to a piece");
        let left = pieces.swap_remove(li);
        let ri = pieces
            .iter()
            .position(|p| p.occs.contains_key(&right_end.occurrence))
            .expect("joins never form cycles");
        let right = pieces.swap_remove(ri);

        let lref = SiteRef::new(left.occs[&left_end.occurrence].clone(), left_end.site);
        let rref = SiteRef::new(right.occs[&right_end.occurrence].clone(), right_end.site);
        let expr = SpaceExpr::sum_p2(left.expr, lref, right.expr, rref)
            .expect("original joins use open sites");
        let mut occs = reroot(left.occs, Branch::Left);
        occs.extend(reroot(right.occs, Branch::Right));
        pieces.push(Piece { expr, occs });
    }

    while pieces.len() > 1 {
        let a = pieces.swap_remove(rng.random_range(0..pieces.len()));
        let b = pieces.swap_remove(rng.random_range(0..pieces.len()));
        let mut occs = reroot(a.occs, Branch::Left);
        occs.extend(reroot(b.occs, Branch::Right));
        pieces.push(Piece { expr: SpaceExpr::sum_s2(a.expr, b.expr), occs });
    }
    pieces.pop().expect("one piece remains").expr
}
