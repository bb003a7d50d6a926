//! Normal prime decomposition as a canonical form.
//!
//! Normalization runs on the join graph of an expression, so the result is
//! independent of how the sums were nested. Two rewrite rules fire until
//! exhaustion, each deleting one atom occurrence:
//!
//! * R1: a 3-sphere summand under `#` is dropped.
//! * R2: a `Susp(P2)` absorbed by `#^` is dropped; the site it consumed on
//!   the other side stays open (the singular point survives), and when the
//!   suspension was summed on both of its sites the two neighbors become
//!   joined directly.
//!
//! The remaining occurrences are then sorted: `#`-summands into a multiset
//! of manifold primes plus a count of non-orientable sphere bundles over
//! the circle, and each connected `#^`-assembly into a cluster carrying its
//! sorted atom multiset and the canonical label of its composed colored
//! P²-graph. Clusters compare equal exactly when both parts agree; site
//! permutations that change the graph class stay distinct.
//!
//! Rule application order is irrelevant to the result; a seeded order is
//! supported so that confluence is testable, and a fuel bound turns any
//! non-terminating rule bug into a hard error.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::prelude::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::catalog::{AtomSpec, Catalog};
use crate::expr::{join_graph, Join, SiteRef, SpaceExpr, TreePath};
use crate::homology::{h1, AbelianGroup, HomologyError};
use crate::p2graph::{canonical_label, CanonicalLabel, ColoredGraph};

const SPHERE: &str = "S3";
const SUSPENSION: &str = "Susp(P2)";
const TWISTED_BUNDLE: &str = "S2~S1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("rewrite fuel exhausted after {0} steps: rule system bug")]
    FuelExhausted(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompareError {
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

/// Redex selection policy. The normal form is the same either way; `Seeded`
/// exists so confluence can be exercised.
#[derive(Debug, Clone, Copy)]
pub enum RuleOrder {
    Deterministic,
    Seeded(u64),
}

/// One maximal `#^`-assembly of singular atoms in a normal form.
#[derive(Debug, Clone)]
pub struct Cluster {
    /// Member atoms sorted by name.
    pub atoms: Vec<Arc<AtomSpec>>,
    /// Canonical label of the composed colored P²-graph; `None` when a
    /// member has no declared graph or the composition hits the degenerate
    /// parallel-pair pattern.
    pub label: Option<CanonicalLabel>,
    /// The composed graph itself, when the label is defined.
    pub graph: Option<ColoredGraph>,
    /// Canonical encoding of the join tree; print order and tie-breaking.
    structure: String,
    /// Canonical representative expression, reparseable.
    pub expr: SpaceExpr,
}

impl Cluster {
    fn names(&self) -> Vec<&str> {
        self.atoms.iter().map(|a| a.name.as_str()).collect()
    }

    fn sort_key(&self) -> (Vec<&str>, Option<&CanonicalLabel>, &str) {
        (self.names(), self.label.as_ref(), &self.structure)
    }

    /// Clusters are equal when their atom multisets agree and their graph
    /// labels agree; without graph data the exact join structure decides.
    fn same_class(&self, other: &Cluster) -> bool {
        if self.names() != other.names() {
            return false;
        }
        match (&self.label, &other.label) {
            (Some(a), Some(b)) => a == b,
            _ => self.structure == other.structure,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NormalForm {
    /// Prime manifold summands other than the non-orientable sphere
    /// bundle, sorted by name.
    pub manifold_summands: Vec<Arc<AtomSpec>>,
    /// Occurrences of `S2~S1`.
    pub s2_bundles: Vec<Arc<AtomSpec>>,
    /// Singular clusters, sorted by (atom multiset, graph label).
    pub clusters: Vec<Cluster>,
}

impl NormalForm {
    pub fn s2_bundle_count(&self) -> usize {
        self.s2_bundles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifold_summands.is_empty() && self.s2_bundles.is_empty() && self.clusters.is_empty()
    }

    /// Every atom of the decomposition, clusters flattened.
    pub fn summand_atoms(&self) -> Vec<Arc<AtomSpec>> {
        let mut out: Vec<Arc<AtomSpec>> = Vec::new();
        for c in &self.clusters {
            out.extend(c.atoms.iter().cloned());
        }
        out.extend(self.manifold_summands.iter().cloned());
        out.extend(self.s2_bundles.iter().cloned());
        out
    }

    /// Sorted cluster graph labels, when every cluster has one.
    pub fn graph_labels(&self) -> Option<Vec<CanonicalLabel>> {
        let mut labels = Vec::with_capacity(self.clusters.len());
        for c in &self.clusters {
            labels.push(c.label.clone()?);
        }
        labels.sort();
        Some(labels)
    }
}

impl PartialEq for NormalForm {
    fn eq(&self, other: &Self) -> bool {
        let names = |v: &[Arc<AtomSpec>]| -> Vec<String> {
            v.iter().map(|a| a.name.clone()).collect()
        };
        names(&self.manifold_summands) == names(&other.manifold_summands)
            && self.s2_bundles.len() == other.s2_bundles.len()
            && self.clusters.len() == other.clusters.len()
            && self
                .clusters
                .iter()
                .zip(&other.clusters)
                .all(|(a, b)| a.same_class(b))
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{SPHERE}");
        }
        let mut parts: Vec<String> = Vec::new();
        for c in &self.clusters {
            parts.push(crate::io::format_expr(&c.expr));
        }
        for m in &self.manifold_summands {
            parts.push(m.name.clone());
        }
        for b in &self.s2_bundles {
            parts.push(b.name.clone());
        }
        write!(f, "{}", parts.join(" # "))
    }
}

pub fn normal_form(e: &SpaceExpr) -> Result<NormalForm, NormalizeError> {
    normal_form_with(e, RuleOrder::Deterministic)
}

pub fn normal_form_with(e: &SpaceExpr, order: RuleOrder) -> Result<NormalForm, NormalizeError> {
    let jg = join_graph(e);
    let mut atoms: Vec<Option<Arc<AtomSpec>>> = jg.atoms.into_iter().map(Some).collect();
    let mut joins: Vec<Join> = jg.joins;
    let mut rng = match order {
        RuleOrder::Deterministic => None,
        RuleOrder::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };

    // Each firing removes one occurrence, so the live count is a strictly
    // decreasing measure; the fuel bound enforces it.
    let fuel = atoms.len() + 1;
    for step in 0..=fuel {
        let mut redexes: Vec<usize> = Vec::new();
        for (occ, atom) in atoms.iter().enumerate() {
            let Some(atom) = atom else { continue };
            let r1 = atom.name == SPHERE;
            let r2 = atom.name == SUSPENSION && incident(&joins, occ).next().is_some();
            if r1 || r2 {
                redexes.push(occ);
            }
        }
        let Some(&target) = (match rng.as_mut() {
            Some(rng) => redexes.choose(rng),
            None => redexes.first(),
        }) else {
            break;
        };
        if step == fuel {
            return Err(NormalizeError::FuelExhausted(fuel));
        }

        let incident_joins: Vec<usize> = incident(&joins, target).collect();
        match incident_joins.as_slice() {
            [] => {} // R1: isolated 3-sphere
            [j] => {
                // R2, pendant absorption: the partner's site reopens.
                joins.remove(*j);
            }
            [j1, j2] => {
                // R2, chain absorption: fuse the two partner sites.
                let a = other_end(&joins[*j1], target).clone();
                let b = other_end(&joins[*j2], target).clone();
                let (hi, lo) = (*j2.max(j1), *j1.min(j2));
                joins.remove(hi);
                joins.remove(lo);
                joins.push(Join { left: a, right: b });
            }
            _ => unreachable!("the suspension has two sites, so at most two joins"),
        }
        atoms[target] = None;
    }

    // Sort the survivors into the three layers of the decomposition.
    let mut manifold_summands = Vec::new();
    let mut s2_bundles = Vec::new();
    let mut singular: BTreeMap<usize, Arc<AtomSpec>> = BTreeMap::new();
    for (occ, atom) in atoms.iter().enumerate() {
        let Some(atom) = atom else { continue };
        if atom.flags.manifold {
            if atom.name == TWISTED_BUNDLE {
                s2_bundles.push(atom.clone());
            } else {
                manifold_summands.push(atom.clone());
            }
        } else {
            singular.insert(occ, atom.clone());
        }
    }
    manifold_summands.sort_by(|a, b| a.name.cmp(&b.name));

    let mut clusters: Vec<Cluster> = components(&singular, &joins)
        .into_iter()
        .map(|(members, edges)| build_cluster(&singular, members, edges))
        .collect();
    clusters.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    Ok(NormalForm { manifold_summands, s2_bundles, clusters })
}

fn incident<'a>(joins: &'a [Join], occ: usize) -> impl Iterator<Item = usize> + 'a {
    joins
        .iter()
        .enumerate()
        .filter(move |(_, j)| j.left.occurrence == occ || j.right.occurrence == occ)
        .map(|(i, _)| i)
}

fn other_end(join: &Join, occ: usize) -> &crate::expr::OccurrenceSite {
    if join.left.occurrence == occ {
        &join.right
    } else {
        &join.left
    }
}

/// Connected components of the singular occurrences under the live joins.
fn components(
    singular: &BTreeMap<usize, Arc<AtomSpec>>,
    joins: &[Join],
) -> Vec<(Vec<usize>, Vec<Join>)> {
    let mut parent: BTreeMap<usize, usize> = singular.keys().map(|&k| (k, k)).collect();
    fn find(parent: &mut BTreeMap<usize, usize>, x: usize) -> usize {
        let p = parent[&x];
        if p == x {
            x
        } else {
            let root = find(parent, p);
            parent.insert(x, root);
            root
        }
    }
    for j in joins {
        let a = find(&mut parent, j.left.occurrence);
        let b = find(&mut parent, j.right.occurrence);
        parent.insert(a, b);
    }
    let mut by_root: BTreeMap<usize, (Vec<usize>, Vec<Join>)> = BTreeMap::new();
    for &occ in singular.keys() {
        let root = find(&mut parent, occ);
        by_root.entry(root).or_default().0.push(occ);
    }
    for j in joins {
        let root = find(&mut parent, j.left.occurrence);
        by_root.entry(root).or_default().1.push(j.clone());
    }
    by_root.into_values().collect()
}

/// Canonicalize one cluster: AHU-style minimal encoding of its join tree
/// (atom names on vertices, consumed site ids on edge ends), the composed
/// colored graph when available, and a canonical representative expression
/// rebuilt from the minimal rooting.
fn build_cluster(
    singular: &BTreeMap<usize, Arc<AtomSpec>>,
    members: Vec<usize>,
    edges: Vec<Join>,
) -> Cluster {
    let local: BTreeMap<usize, usize> =
        members.iter().enumerate().map(|(i, &occ)| (occ, i)).collect();
    let specs: Vec<Arc<AtomSpec>> = members.iter().map(|occ| singular[occ].clone()).collect();

    // adjacency[v] = (neighbor, site at v, site at neighbor)
    let mut adjacency: Vec<Vec<(usize, String, String)>> = vec![Vec::new(); members.len()];
    for j in &edges {
        let a = local[&j.left.occurrence];
        let b = local[&j.right.occurrence];
        adjacency[a].push((b, j.left.site.clone(), j.right.site.clone()));
        adjacency[b].push((a, j.right.site.clone(), j.left.site.clone()));
    }

    fn encode(
        v: usize,
        parent: Option<usize>,
        specs: &[Arc<AtomSpec>],
        adjacency: &[Vec<(usize, String, String)>],
    ) -> String {
        let mut parts: Vec<String> = adjacency[v]
            .iter()
            .filter(|(n, _, _)| Some(*n) != parent)
            .map(|(n, mine, theirs)| {
                format!("{mine},{theirs}:{}", encode(*n, Some(v), specs, adjacency))
            })
            .collect();
        parts.sort();
        format!("{}{{{}}}", specs[v].name, parts.join(";"))
    }

    let (root, structure) = (0..members.len())
        .map(|r| (r, encode(r, None, &specs, &adjacency)))
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("clusters are non-empty");

    fn rebuild(
        v: usize,
        parent: Option<usize>,
        specs: &[Arc<AtomSpec>],
        adjacency: &[Vec<(usize, String, String)>],
    ) -> (SpaceExpr, TreePath) {
        let mut children: Vec<(String, &(usize, String, String))> = adjacency[v]
            .iter()
            .filter(|(n, _, _)| Some(*n) != parent)
            .map(|edge| {
                let key = format!(
                    "{},{}:{}",
                    edge.1,
                    edge.2,
                    encode(edge.0, Some(v), specs, adjacency)
                );
                (key, edge)
            })
            .collect();
        children.sort_by(|a, b| a.0.cmp(&b.0));

        let mut expr = SpaceExpr::atom(specs[v].clone());
        let mut anchor = TreePath::root();
        for (_, (child, mine, theirs)) in children {
            let (child_expr, child_anchor) = rebuild(*child, Some(v), specs, adjacency);
            expr = SpaceExpr::sum_p2(
                expr,
                SiteRef::new(anchor.clone(), mine.clone()),
                child_expr,
                SiteRef::new(child_anchor, theirs.clone()),
            )
            .expect("cluster joins reference open sites by construction");
            anchor.0.insert(0, crate::expr::Branch::Left);
        }
        (expr, anchor)
    }
    let (expr, _) = rebuild(root, None, &specs, &adjacency);

    // Compose the colored graph when every member declares one.
    let graph = specs.iter().map(|s| s.graph.as_ref()).collect::<Option<Vec<_>>>().map(
        |declared| {
            let parts: Vec<(String, &ColoredGraph)> = declared
                .iter()
                .enumerate()
                .map(|(i, d)| (format!("{i}."), &d.graph))
                .collect();
            let borrowed: Vec<(&str, &ColoredGraph)> =
                parts.iter().map(|(p, g)| (p.as_str(), *g)).collect();
            let mut composed = ColoredGraph::disjoint_union(&borrowed);
            for j in &edges {
                let a = local[&j.left.occurrence];
                let b = local[&j.right.occurrence];
                let wa = format!("{a}.{}", declared[a].site_whites[&j.left.site]);
                let wb = format!("{b}.{}", declared[b].site_whites[&j.right.site]);
                composed
                    .compose_whites(&wa, &wb)
                    .expect("site-to-white maps are validated at catalog load");
            }
            composed
        },
    );
    let (graph, label) = match graph {
        Some(g) if g.has_degenerate_parallel_pair() => (None, None),
        Some(g) => {
            let label = canonical_label(&g);
            (Some(g), Some(label))
        }
        None => (None, None),
    };

    let mut atoms = specs;
    atoms.sort_by(|a, b| a.name.cmp(&b.name));
    Cluster { atoms, label, graph, structure, expr }
}

/// Disjoint union of the cluster graphs of the normal form; `None` when a
/// cluster member lacks declared graph data. Manifold summands carry no
/// projective planes and contribute nothing.
pub fn graph_of(e: &SpaceExpr) -> Result<Option<ColoredGraph>, NormalizeError> {
    let nf = normal_form(e)?;
    let mut parts: Vec<(String, ColoredGraph)> = Vec::new();
    for (i, c) in nf.clusters.iter().enumerate() {
        match &c.graph {
            Some(g) => parts.push((format!("c{i}."), g.clone())),
            None => return Ok(None),
        }
    }
    let borrowed: Vec<(&str, &ColoredGraph)> =
        parts.iter().map(|(p, g)| (p.as_str(), g)).collect();
    Ok(Some(ColoredGraph::disjoint_union(&borrowed)))
}

/// A witness that two expressions describe different spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    SingularCount { left: usize, right: usize },
    Orientability { left: bool, right: bool },
    Homology { left: AbelianGroup, right: AbelianGroup },
    GraphClass { left: String, right: String },
    CoverHomology { left: AbelianGroup, right: AbelianGroup },
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::SingularCount { .. } => "singular-count",
            Certificate::Orientability { .. } => "orientability",
            Certificate::Homology { .. } => "H1",
            Certificate::GraphClass { .. } => "colored P2-graph",
            Certificate::CoverHomology { .. } => "cover-H1",
        }
    }

    pub fn sides(&self) -> (String, String) {
        match self {
            Certificate::SingularCount { left, right } => (left.to_string(), right.to_string()),
            Certificate::Orientability { left, right } => (left.to_string(), right.to_string()),
            Certificate::Homology { left, right }
            | Certificate::CoverHomology { left, right } => (left.to_string(), right.to_string()),
            Certificate::GraphClass { left, right } => (left.clone(), right.clone()),
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, r) = self.sides();
        write!(f, "{} certificate ({l} vs {r})", self.kind())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Yes,
    No(Certificate),
    Unknown,
}

/// Three-valued equivalence: `Yes` exactly when the normal forms are
/// identical, `No` only with a separating certificate, `Unknown` otherwise.
pub fn equivalent(
    catalog: &Catalog,
    a: &SpaceExpr,
    b: &SpaceExpr,
) -> Result<Equivalence, CompareError> {
    if normal_form(a)? == normal_form(b)? {
        return Ok(Equivalence::Yes);
    }
    match distinguish(catalog, a, b)? {
        Some(cert) => Ok(Equivalence::No(cert)),
        None => Ok(Equivalence::Unknown),
    }
}

/// Run the invariant battery in fixed order (singular count, orientability
/// flags, H₁, colored graph class, H₁ of the double branched cover) and
/// return the first separating certificate, if any.
pub fn distinguish(
    catalog: &Catalog,
    a: &SpaceExpr,
    b: &SpaceExpr,
) -> Result<Option<Certificate>, CompareError> {
    let (ca, cb) = (a.singular_count(), b.singular_count());
    if ca != cb {
        return Ok(Some(Certificate::SingularCount { left: ca, right: cb }));
    }

    if let (Some(oa), Some(ob)) = (a.orientable(), b.orientable()) {
        if oa != ob {
            return Ok(Some(Certificate::Orientability { left: oa, right: ob }));
        }
    }

    if let (Some(ha), Some(hb)) = (h1(a)?, h1(b)?) {
        if ha != hb {
            return Ok(Some(Certificate::Homology { left: ha, right: hb }));
        }
    }

    let (nfa, nfb) = (normal_form(a)?, normal_form(b)?);
    if let (Some(la), Some(lb)) = (nfa.graph_labels(), nfb.graph_labels()) {
        if la != lb {
            let render = |labels: Vec<CanonicalLabel>| {
                labels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
            };
            return Ok(Some(Certificate::GraphClass { left: render(la), right: render(lb) }));
        }
    }

    let cover_h1 = |e: &SpaceExpr| -> Result<Option<AbelianGroup>, CompareError> {
        if e.singular_count() == 0 {
            return Ok(None);
        }
        match crate::cover::double_branched_cover(catalog, e) {
            Ok(Some(cover)) => Ok(h1(&cover)?),
            _ => Ok(None),
        }
    };
    if let (Some(ha), Some(hb)) = (cover_h1(a)?, cover_h1(b)?) {
        if ha != hb {
            return Ok(Some(Certificate::CoverHomology { left: ha, right: hb }));
        }
    }

    Ok(None)
}
