//! First homology via integer Smith normal form.
//!
//! `AbelianGroup` is the value type for H₁ data throughout the crate: a
//! finitely generated abelian group stored in invariant-factor form
//! (free rank plus a divisibility chain of torsion coefficients). Groups
//! are produced by reducing integer relation matrices with
//! [`smith_normal_form`].
//!
//! For a topologically singular space the H₁ carried by the catalog and
//! computed by [`h1`] is the first homology of the *manifold part* (the
//! space with open cone neighborhoods of its singular points removed).
//! For a manifold the two notions coincide. The manifold part is what the
//! gluing rules compose: a sum along a 2-sphere is a direct sum, a sum
//! along a projective plane is a Mayer–Vietoris amalgamation identifying
//! the two order-2 boundary classes.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::expr::{join_graph, OccurrenceSite, SpaceExpr};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HomologyError {
    /// Exact integer arithmetic overflowed `i128` during reduction.
    #[error("integer overflow during Smith normal form reduction")]
    Overflow,
}

fn add(a: i128, b: i128) -> Result<i128, HomologyError> {
    a.checked_add(b).ok_or(HomologyError::Overflow)
}

fn mul(a: i128, b: i128) -> Result<i128, HomologyError> {
    a.checked_mul(b).ok_or(HomologyError::Overflow)
}

/// Dense integer matrix with exact (checked) arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i128>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let mut m = IntMatrix::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i128 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i128) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, HomologyError> {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0i128;
                for k in 0..self.cols {
                    acc = add(acc, mul(self.get(i, k), other.get(k, j))?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            let (x, y) = (self.get(a, j), self.get(b, j));
            self.set(a, j, y);
            self.set(b, j, x);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            let (x, y) = (self.get(i, a), self.get(i, b));
            self.set(i, a, y);
            self.set(i, b, x);
        }
    }

    /// row[a] += q * row[b]
    fn add_row(&mut self, a: usize, b: usize, q: i128) -> Result<(), HomologyError> {
        for j in 0..self.cols {
            let v = add(self.get(a, j), mul(q, self.get(b, j))?)?;
            self.set(a, j, v);
        }
        Ok(())
    }

    /// col[a] += q * col[b]
    fn add_col(&mut self, a: usize, b: usize, q: i128) -> Result<(), HomologyError> {
        for i in 0..self.rows {
            let v = add(self.get(i, a), mul(q, self.get(i, b))?)?;
            self.set(i, a, v);
        }
        Ok(())
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            self.set(a, j, -self.get(a, j));
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Result of a Smith normal form reduction: `u * a * v = d` with `u`, `v`
/// unimodular and `d` diagonal with `diag[0] | diag[1] | ...`.
#[derive(Debug, Clone)]
pub struct Snf {
    /// Diagonal entries, length `min(rows, cols)`, zeros at the tail.
    pub diag: Vec<i128>,
    /// Number of non-zero diagonal entries.
    pub rank: usize,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

/// Reduce `a` to Smith normal form by elementary row and column operations.
pub fn smith_normal_form(a: &IntMatrix) -> Result<Snf, HomologyError> {
    let mut m = a.clone();
    let mut u = IntMatrix::identity(a.rows());
    let mut v = IntMatrix::identity(a.cols());
    let bound = a.rows().min(a.cols());

    let mut t = 0;
    'corner: while t < bound {
        // Re-select the non-zero entry of smallest magnitude as the pivot on
        // every round; this keeps intermediate entries small.
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..m.rows() {
                for j in t..m.cols() {
                    let e = m.get(i, j).unsigned_abs();
                    if e != 0
                        && pivot.is_none_or(|(pi, pj)| e < m.get(pi, pj).unsigned_abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break 'corner };
            m.swap_rows(t, pi);
            u.swap_rows(t, pi);
            m.swap_cols(t, pj);
            v.swap_cols(t, pj);
            let p = m.get(t, t);

            // Knock the pivot's row and column down to remainders. If any
            // remainder survives it is smaller than the pivot, so the next
            // round picks a strictly smaller one.
            let mut clean = true;
            for i in t + 1..m.rows() {
                let q = m.get(i, t).div_euclid(p);
                if q != 0 {
                    m.add_row(i, t, -q)?;
                    u.add_row(i, t, -q)?;
                }
                if m.get(i, t) != 0 {
                    clean = false;
                }
            }
            for j in t + 1..m.cols() {
                let q = m.get(t, j).div_euclid(p);
                if q != 0 {
                    m.add_col(j, t, -q)?;
                    v.add_col(j, t, -q)?;
                }
                if m.get(t, j) != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }

            // Divisibility of the remaining block: fold an offending row
            // into the pivot row and reduce again; the pivot gcd shrinks.
            for i in t + 1..m.rows() {
                for j in t + 1..m.cols() {
                    if m.get(i, j) % p != 0 {
                        m.add_row(t, i, 1)?;
                        u.add_row(t, i, 1)?;
                        continue 'corner;
                    }
                }
            }

            if m.get(t, t) < 0 {
                m.negate_row(t);
                u.negate_row(t);
            }
            t += 1;
            break;
        }
    }

    let diag: Vec<i128> = (0..bound).map(|i| m.get(i, i)).collect();
    let rank = diag.iter().filter(|&&d| d != 0).count();
    Ok(Snf { diag, rank, u, v })
}

/// Finitely generated abelian group in invariant-factor form:
/// `Z^rank + Z/d1 + ... + Z/dk` with `d1 | d2 | ... | dk`, each `di >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbelianGroup {
    rank: usize,
    torsion: Vec<i128>,
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        AbelianGroup { rank: 0, torsion: Vec::new() }
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroup { rank, torsion: Vec::new() }
    }

    /// Build from explicit invariant factors; panics unless they form a
    /// divisibility chain of entries `>= 2`.
    pub fn new(rank: usize, torsion: Vec<i128>) -> Self {
        assert!(torsion.iter().all(|&d| d >= 2), "torsion coefficients must be >= 2");
        assert!(
            torsion.windows(2).all(|w| w[1] % w[0] == 0),
            "torsion coefficients must form a divisibility chain"
        );
        AbelianGroup { rank, torsion }
    }

    /// The group presented by `gens` generators and the given relation rows.
    pub fn from_presentation(
        gens: usize,
        relations: &[Vec<i128>],
    ) -> Result<Self, HomologyError> {
        let (group, _) = reduce_presentation(gens, relations)?;
        Ok(group)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn torsion(&self) -> &[i128] {
        &self.torsion
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    /// Parse the textual form used by catalog files: `0`, `Z`, `Z^2 + Z/2`.
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        if text == "0" {
            return Some(AbelianGroup::trivial());
        }
        let mut rank = 0usize;
        let mut torsion = Vec::new();
        for part in text.split('+') {
            let part = part.trim();
            if part == "Z" {
                rank += 1;
            } else if let Some(r) = part.strip_prefix("Z^") {
                rank += r.parse::<usize>().ok()?;
            } else {
                let d = part.strip_prefix("Z/")?;
                let d = d.parse::<i128>().ok()?;
                if d < 2 {
                    return None;
                }
                torsion.push(d);
            }
        }
        torsion.sort_unstable();
        if !torsion.windows(2).all(|w| w[1] % w[0] == 0) {
            return None;
        }
        Some(AbelianGroup { rank, torsion })
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        if self.rank == 1 {
            parts.push("Z".to_string());
        } else if self.rank > 1 {
            parts.push(format!("Z^{}", self.rank));
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// An element of a reduced group, stored as coordinates in the reduced
/// basis: `free` rank coordinates plus one residue per torsion factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    pub free: Vec<i128>,
    pub torsion: Vec<i128>,
}

impl GroupElement {
    pub fn is_zero(&self) -> bool {
        self.free.iter().all(|&c| c == 0) && self.torsion.iter().all(|&c| c == 0)
    }
}

/// Carries an element of `Z^gens` through the reduction of a presentation.
#[derive(Debug, Clone)]
pub struct ElementMapper {
    v: IntMatrix,
    kinds: Vec<CoordKind>,
}

#[derive(Debug, Clone, Copy)]
enum CoordKind {
    Killed,
    Torsion(i128),
    Free,
}

impl ElementMapper {
    pub fn map(&self, coords: &[i128]) -> Result<GroupElement, HomologyError> {
        assert_eq!(coords.len(), self.v.rows(), "coordinate length mismatch");
        let row = IntMatrix::from_rows(&[coords.to_vec()]);
        let mapped = row.mul(&self.v)?;
        let mut free = Vec::new();
        let mut torsion = Vec::new();
        for (j, kind) in self.kinds.iter().enumerate() {
            let c = mapped.get(0, j);
            match kind {
                CoordKind::Killed => {}
                CoordKind::Torsion(d) => torsion.push(c.rem_euclid(*d)),
                CoordKind::Free => free.push(c),
            }
        }
        Ok(GroupElement { free, torsion })
    }
}

/// Reduce `Z^gens / <relations>` to invariant-factor form, returning the
/// group together with a mapper that carries generator coordinates into the
/// reduced basis.
pub fn reduce_presentation(
    gens: usize,
    relations: &[Vec<i128>],
) -> Result<(AbelianGroup, ElementMapper), HomologyError> {
    let matrix = if relations.is_empty() {
        IntMatrix::zero(1, gens)
    } else {
        IntMatrix::from_rows(relations)
    };
    assert_eq!(matrix.cols(), gens, "relation width must equal generator count");
    let snf = smith_normal_form(&matrix)?;
    let mut kinds = vec![CoordKind::Free; gens];
    let mut torsion = Vec::new();
    for (i, &d) in snf.diag.iter().enumerate() {
        if d == 1 {
            kinds[i] = CoordKind::Killed;
        } else if d > 1 {
            kinds[i] = CoordKind::Torsion(d);
            torsion.push(d);
        }
    }
    let rank = kinds.iter().filter(|k| matches!(k, CoordKind::Free)).count();
    let group = AbelianGroup { rank, torsion };
    Ok((group, ElementMapper { v: snf.v, kinds }))
}

/// H₁ data for an expression: the group of its manifold part plus the class
/// of every still-open singular site, when the catalog data determines them.
#[derive(Debug, Clone)]
pub struct H1Data {
    pub group: AbelianGroup,
    /// Classes of the unconsumed sites; `None` where the owning atom does
    /// not declare an image for the site.
    pub site_classes: BTreeMap<OccurrenceSite, Option<GroupElement>>,
}

/// First homology of the manifold part of `e`, or `None` when some atom
/// lacks H₁ data or some consumed site lacks an image class.
pub fn h1(e: &SpaceExpr) -> Result<Option<AbelianGroup>, HomologyError> {
    Ok(h1_data(e)?.map(|d| d.group))
}

/// As [`h1`], but also reporting the classes of the open sites.
pub fn h1_data(e: &SpaceExpr) -> Result<Option<H1Data>, HomologyError> {
    let jg = join_graph(e);

    // Generator layout: per occurrence, the free generators of its declared
    // H1 followed by its torsion generators.
    let mut offsets = Vec::with_capacity(jg.atoms.len());
    let mut gens = 0usize;
    for atom in &jg.atoms {
        let Some(group) = &atom.h1 else { return Ok(None) };
        offsets.push(gens);
        gens += group.rank() + group.torsion().len();
    }

    let mut relations: Vec<Vec<i128>> = Vec::new();
    for (k, atom) in jg.atoms.iter().enumerate() {
        let group = atom.h1.as_ref().expect("checked above");
        for (t, &d) in group.torsion().iter().enumerate() {
            let mut row = vec![0i128; gens];
            row[offsets[k] + group.rank() + t] = d;
            relations.push(row);
        }
    }

    // One amalgamation relation per join: the two boundary classes of the
    // glued projective plane are identified.
    let embed = |occ: usize, site: &str, row: &mut Vec<i128>, sign: i128| -> Option<()> {
        let atom = &jg.atoms[occ];
        let image = atom.site(site)?.h1_image.as_ref()?;
        for (j, &c) in image.iter().enumerate() {
            row[offsets[occ] + j] += sign * c;
        }
        Some(())
    };
    for join in &jg.joins {
        let mut row = vec![0i128; gens];
        if embed(join.left.occurrence, &join.left.site, &mut row, 1).is_none() {
            return Ok(None);
        }
        if embed(join.right.occurrence, &join.right.site, &mut row, -1).is_none() {
            return Ok(None);
        }
        relations.push(row);
    }

    let (group, mapper) = reduce_presentation(gens, &relations)?;

    let mut site_classes = BTreeMap::new();
    for open in jg.open_sites() {
        let atom = &jg.atoms[open.occurrence];
        let class = match atom.site(&open.site).and_then(|s| s.h1_image.as_ref()) {
            Some(image) => {
                let mut coords = vec![0i128; gens];
                for (j, &c) in image.iter().enumerate() {
                    coords[offsets[open.occurrence] + j] = c;
                }
                Some(mapper.map(&coords)?)
            }
            None => None,
        };
        site_classes.insert(open, class);
    }

    Ok(Some(H1Data { group, site_classes }))
}



#[cfg(test)]
mod catalog_h1_oracles {
    //! The H1 values shipped in the catalog for non-obvious atoms, derived
    //! here from presentations so the data is not free-floating.

    use super::*;
    use crate::catalog::Catalog;

    #[test]
    fn suspension_manifold_part_is_a_product_over_the_plane() {
        // The manifold part is P^2 x I, and H1(P^2) = <a | 2a>.
        let (expected, _) = reduce_presentation(1, &[vec![2]]).unwrap();
        let c = Catalog::builtin();
        assert_eq!(c.atom("Susp(P2)").unwrap().h1.as_ref(), Some(&expected));
    }

    #[test]
    fn torus_bundle_matches_its_mapping_torus_presentation() {
        // Monodromy -id: t x t^-1 = x^-1 and t y t^-1 = y^-1, abelianized
        // to 2x = 2y = 0 with t free.
        let (expected, _) = reduce_presentation(3, &[vec![2, 0, 0], vec![0, 2, 0]]).unwrap();
        let c = Catalog::builtin();
        assert_eq!(c.atom("T2flip").unwrap().h1.as_ref(), Some(&expected));
    }

    #[test]
    fn three_torus_is_free_of_rank_three() {
        let c = Catalog::builtin();
        assert_eq!(c.atom("T3").unwrap().h1, Some(AbelianGroup::free(3)));
    }
}
