//! Colored P²-graphs and their isomorphism invariants.
//!
//! The graph of a compact 3-manifold cut along a complete system of
//! two-sided projective planes: one vertex per complement component,
//! colored white when the component is a product collar `P^2 x I` meeting
//! the boundary, black otherwise; one edge per plane of the system (loops
//! allowed when a plane is non-separating). White vertices always have
//! degree 1 and black vertices even degree.
//!
//! Composition under the singular connected sum deletes the two white
//! vertices that correspond to the consumed sites and joins their
//! neighbors by a fresh edge; the degree laws are preserved.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex `{0}` is not white")]
    NotWhite(String),
    #[error("vertex `{0}` does not exist")]
    VertexMissing(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Black,
    White,
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::Black => write!(f, "black"),
            Color::White => write!(f, "white"),
        }
    }
}

/// Undirected multigraph with colored vertices; loops allowed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColoredGraph {
    ids: Vec<String>,
    colors: Vec<Color>,
    /// Edge endpoints as indices into `ids`; unordered, stored low-high.
    edges: Vec<(usize, usize)>,
}

impl ColoredGraph {
    pub fn new() -> Self {
        ColoredGraph::default()
    }

    pub fn add_vertex(&mut self, id: impl Into<String>, color: Color) {
        let id = id.into();
        assert!(!self.ids.contains(&id), "duplicate vertex id `{id}`");
        self.ids.push(id);
        self.colors.push(color);
    }

    pub fn add_edge_ids(&mut self, a: &str, b: &str) -> Result<(), GraphError> {
        let ia = self.index_of(a)?;
        let ib = self.index_of(b)?;
        self.edges.push((ia.min(ib), ia.max(ib)));
        Ok(())
    }

    fn index_of(&self, id: &str) -> Result<usize, GraphError> {
        self.ids
            .iter()
            .position(|v| v == id)
            .ok_or_else(|| GraphError::VertexMissing(id.to_string()))
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = (&str, Color)> {
        self.ids.iter().map(String::as_str).zip(self.colors.iter().copied())
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|&(a, b)| (self.ids[a].as_str(), self.ids[b].as_str()))
    }

    pub fn color_of(&self, id: &str) -> Option<Color> {
        self.ids.iter().position(|v| v == id).map(|i| self.colors[i])
    }

    /// Degree with loops counted twice.
    pub fn degree(&self, index: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| match (a == index, b == index) {
                (true, true) => 2,
                (true, false) | (false, true) => 1,
                _ => 0,
            })
            .sum()
    }

    fn loops_at(&self, index: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == index && b == index).count()
    }

    /// Every white vertex has degree exactly 1 and no white carries a loop;
    /// every black vertex has even degree.
    pub fn satisfies_degree_law(&self) -> bool {
        self.colors.iter().enumerate().all(|(i, color)| match color {
            Color::White => self.degree(i) == 1 && self.loops_at(i) == 0,
            Color::Black => self.degree(i).is_multiple_of(2),
        })
    }

    /// Pendant white counts per black vertex, ordered along the black
    /// subgraph when it is a path; used for the worked two-summand examples.
    pub fn pendant_profile(&self) -> Option<Vec<usize>> {
        let blacks: Vec<usize> = (0..self.ids.len())
            .filter(|&i| self.colors[i] == Color::Black)
            .collect();
        if blacks.is_empty() {
            return None;
        }
        let black_neighbors = |i: usize| -> Vec<usize> {
            let mut out = Vec::new();
            for &(a, b) in &self.edges {
                if a == i && self.colors[b] == Color::Black && b != i {
                    out.push(b);
                }
                if b == i && self.colors[a] == Color::Black && a != i {
                    out.push(a);
                }
            }
            out
        };
        // Walk the black path from one endpoint.
        let endpoints: Vec<usize> = blacks
            .iter()
            .copied()
            .filter(|&i| black_neighbors(i).len() <= 1)
            .collect();
        let start = *endpoints.first()?;
        let mut order = vec![start];
        let mut prev = None;
        loop {
            let cur = *order.last().unwrap();
            let next: Vec<usize> = black_neighbors(cur)
                .into_iter()
                .filter(|&n| Some(n) != prev)
                .collect();
            match next.len() {
                0 => break,
                1 => {
                    prev = Some(cur);
                    order.push(next[0]);
                }
                _ => return None, // not a path
            }
        }
        if order.len() != blacks.len() {
            return None;
        }
        let profile: Vec<usize> = order
            .iter()
            .map(|&i| {
                self.edges
                    .iter()
                    .filter(|&&(a, b)| {
                        (a == i && self.colors[b] == Color::White)
                            || (b == i && self.colors[a] == Color::White)
                    })
                    .count()
            })
            .collect();
        // Canonical reading direction.
        let mut rev = profile.clone();
        rev.reverse();
        Some(profile.min(rev))
    }

    /// Disjoint union, prefixing ids to keep them unique.
    pub fn disjoint_union(parts: &[(&str, &ColoredGraph)]) -> ColoredGraph {
        let mut out = ColoredGraph::new();
        for (prefix, g) in parts {
            let base = out.ids.len();
            for (id, color) in g.vertices() {
                out.ids.push(format!("{prefix}{id}"));
                out.colors.push(color);
            }
            for &(a, b) in &g.edges {
                out.edges.push((base + a, base + b));
            }
        }
        out
    }

    /// Remove the white vertices `wa` and `wb` (their pendant edges with
    /// them) and join their former neighbors by one new edge.
    pub fn compose_whites(&mut self, wa: &str, wb: &str) -> Result<(), GraphError> {
        let ia = self.index_of(wa)?;
        let ib = self.index_of(wb)?;
        for (idx, name) in [(ia, wa), (ib, wb)] {
            if self.colors[idx] != Color::White {
                return Err(GraphError::NotWhite(name.to_string()));
            }
        }
        let neighbor = |w: usize| -> Option<usize> {
            self.edges.iter().find_map(|&(a, b)| {
                if a == w {
                    Some(b)
                } else if b == w {
                    Some(a)
                } else {
                    None
                }
            })
        };
        let na = neighbor(ia).ok_or_else(|| GraphError::VertexMissing(format!("{wa} neighbor")))?;
        let nb = neighbor(ib).ok_or_else(|| GraphError::VertexMissing(format!("{wb} neighbor")))?;
        self.edges.retain(|&(a, b)| a != ia && b != ia && a != ib && b != ib);
        self.edges.push((na.min(nb), na.max(nb)));
        // Drop the two whites, remapping edge indices.
        let mut keep: Vec<usize> = (0..self.ids.len()).filter(|&i| i != ia && i != ib).collect();
        keep.sort_unstable();
        let remap: BTreeMap<usize, usize> =
            keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        self.ids = keep.iter().map(|&i| std::mem::take(&mut self.ids[i])).collect();
        self.colors = keep.iter().map(|&i| self.colors[i]).collect();
        for e in &mut self.edges {
            let a = remap[&e.0];
            let b = remap[&e.1];
            *e = (a.min(b), a.max(b));
        }
        Ok(())
    }

    /// The reduction pattern left out of scope: two black vertices joined by
    /// two or more parallel edges where one of them has no other incidences.
    /// Graphs showing it are reported as indeterminate rather than reduced.
    pub fn has_degenerate_parallel_pair(&self) -> bool {
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &(a, b) in &self.edges {
            if a != b && self.colors[a] == Color::Black && self.colors[b] == Color::Black {
                *counts.entry((a, b)).or_insert(0) += 1;
            }
        }
        counts.iter().any(|(&(a, b), &n)| {
            n >= 2 && (self.degree(a) == n || self.degree(b) == n)
        })
    }

    /// Adjacency-list exchange format: one `id color: n1,n2,...` line per
    /// vertex, neighbors repeated with multiplicity.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = String::new();
        for (i, id) in self.ids.iter().enumerate() {
            let mut neighbors = Vec::new();
            for &(a, b) in &self.edges {
                if a == i {
                    neighbors.push(self.ids[b].clone());
                }
                if b == i && a != b {
                    neighbors.push(self.ids[a].clone());
                }
            }
            neighbors.sort();
            out.push_str(&format!("{id} {}: {}\n", self.colors[i], neighbors.join(",")));
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph p2 {\n");
        for (i, id) in self.ids.iter().enumerate() {
            let style = match self.colors[i] {
                Color::Black => "[shape=circle, style=filled, fillcolor=black, fontcolor=white]",
                Color::White => "[shape=circle]",
            };
            out.push_str(&format!("  \"{id}\" {style};\n"));
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!("  \"{}\" -- \"{}\";\n", self.ids[a], self.ids[b]));
        }
        out.push_str("}\n");
        out
    }
}

/// Compose two graphs at a white vertex of each: disjoint union (left ids
/// prefixed `l.`, right ids `r.`), then delete the two whites and join
/// their neighbors. This is how the invariant extends across a glued
/// projective plane.
pub fn compose_p2(
    a: &ColoredGraph,
    wa: &str,
    b: &ColoredGraph,
    wb: &str,
) -> Result<ColoredGraph, GraphError> {
    let mut union = ColoredGraph::disjoint_union(&[("l.", a), ("r.", b)]);
    union.compose_whites(&format!("l.{wa}"), &format!("r.{wb}"))?;
    Ok(union)
}

/// Color-preserving multigraph isomorphism by backtracking over a
/// degree/color partition of the vertices.
pub fn is_isomorphic(a: &ColoredGraph, b: &ColoredGraph) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let sig = |g: &ColoredGraph, i: usize| (g.colors[i], g.degree(i), g.loops_at(i));
    let mut sig_a: Vec<_> = (0..a.vertex_count()).map(|i| sig(a, i)).collect();
    let mut sig_b: Vec<_> = (0..b.vertex_count()).map(|i| sig(b, i)).collect();
    sig_a.sort_unstable();
    sig_b.sort_unstable();
    if sig_a != sig_b {
        return false;
    }

    let n = a.vertex_count();
    let mult_matrix = |g: &ColoredGraph| -> Vec<Vec<usize>> {
        let mut m = vec![vec![0usize; n]; n];
        for &(x, y) in &g.edges {
            m[x][y] += 1;
            if x != y {
                m[y][x] += 1;
            }
        }
        m
    };
    let (ma, mb) = (mult_matrix(a), mult_matrix(b));
    let mut assign: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];

    fn backtrack(
        a: &ColoredGraph,
        b: &ColoredGraph,
        ma: &[Vec<usize>],
        mb: &[Vec<usize>],
        assign: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let depth = assign.len();
        if depth == a.vertex_count() {
            return true;
        }
        for cand in 0..b.vertex_count() {
            if used[cand]
                || a.colors[depth] != b.colors[cand]
                || a.degree(depth) != b.degree(cand)
                || ma[depth][depth] != mb[cand][cand]
            {
                continue;
            }
            if (0..depth).any(|prev| ma[depth][prev] != mb[cand][assign[prev]]) {
                continue;
            }
            assign.push(cand);
            used[cand] = true;
            if backtrack(a, b, ma, mb, assign, used) {
                return true;
            }
            assign.pop();
            used[cand] = false;
        }
        false
    }

    backtrack(a, b, &ma, &mb, &mut assign, &mut used)
}

/// Canonical byte label: equal labels exactly when the graphs are
/// isomorphic. Computed by minimizing the serialized adjacency over vertex
/// orderings compatible with iterated partition refinement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalLabel(Vec<u8>);

impl CanonicalLabel {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for CanonicalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "g-empty");
        }
        write!(f, "g")?;
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

pub fn canonical_label(g: &ColoredGraph) -> CanonicalLabel {
    if g.is_empty() {
        return CanonicalLabel(Vec::new());
    }
    let n = g.vertex_count();
    let mult: Vec<Vec<u8>> = {
        let mut m = vec![vec![0u8; n]; n];
        for &(a, b) in &g.edges {
            m[a][b] = m[a][b].saturating_add(1);
            if a != b {
                m[b][a] = m[b][a].saturating_add(1);
            }
        }
        m
    };

    // Iterated refinement: cells keyed by (color, degree, loops) and then by
    // the multiset of (cell, multiplicity) of the neighbors.
    let refine = |cells: Vec<Vec<usize>>| -> Vec<Vec<usize>> {
        let mut cells = cells;
        loop {
            let mut cell_of = vec![0usize; n];
            for (ci, cell) in cells.iter().enumerate() {
                for &v in cell {
                    cell_of[v] = ci;
                }
            }
            let mut next: Vec<Vec<usize>> = Vec::new();
            let mut changed = false;
            for cell in &cells {
                let mut buckets: BTreeMap<Vec<(usize, u8)>, Vec<usize>> = BTreeMap::new();
                for &v in cell {
                    let mut key: Vec<(usize, u8)> = (0..n)
                        .filter(|&w| mult[v][w] > 0)
                        .map(|w| (cell_of[w], mult[v][w]))
                        .collect();
                    key.sort_unstable();
                    buckets.entry(key).or_default().push(v);
                }
                if buckets.len() > 1 {
                    changed = true;
                }
                next.extend(buckets.into_values());
            }
            cells = next;
            if !changed {
                return cells;
            }
        }
    };

    let initial = {
        let mut buckets: BTreeMap<(Color, usize, usize), Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            buckets.entry((g.colors[v], g.degree(v), g.loops_at(v))).or_default().push(v);
        }
        buckets.into_values().collect::<Vec<_>>()
    };

    let encode = |order: &[usize]| -> Vec<u8> {
        let mut bytes = Vec::with_capacity(1 + n + n * n / 2);
        bytes.push(n as u8);
        for &v in order {
            bytes.push(match g.colors[v] {
                Color::Black => 0,
                Color::White => 1,
            });
        }
        for i in 0..n {
            for j in i..n {
                bytes.push(mult[order[i]][order[j]]);
            }
        }
        bytes
    };

    // Minimize over refinement-compatible orderings, pruning candidates
    // that discovered automorphisms have already shown equivalent: each
    // pair of leaves with equal encodings yields an automorphism, and
    // within a cell only one vertex per orbit needs expanding.
    struct Search<'a> {
        refine: &'a dyn Fn(Vec<Vec<usize>>) -> Vec<Vec<usize>>,
        encode: &'a dyn Fn(&[usize]) -> Vec<u8>,
        best: Option<(Vec<u8>, Vec<usize>)>,
        autos: Vec<Vec<usize>>,
        n: usize,
    }

    impl Search<'_> {
        fn orbits(&self) -> Vec<usize> {
            let mut parent: Vec<usize> = (0..self.n).collect();
            fn find(parent: &mut [usize], mut x: usize) -> usize {
                while parent[x] != x {
                    parent[x] = parent[parent[x]];
                    x = parent[x];
                }
                x
            }
            for auto in &self.autos {
                for (v, &image) in auto.iter().enumerate() {
                    let (a, b) = (find(&mut parent, v), find(&mut parent, image));
                    parent[a] = b;
                }
            }
            let mut out = Vec::with_capacity(self.n);
            for v in 0..self.n {
                let root = find(&mut parent, v);
                out.push(root);
            }
            out
        }

        fn run(&mut self, cells: Vec<Vec<usize>>) {
            let Some(split) = cells.iter().position(|c| c.len() > 1) else {
                let order: Vec<usize> = cells.iter().map(|c| c[0]).collect();
                let enc = (self.encode)(&order);
                match &self.best {
                    Some((best_enc, best_order)) if *best_enc == enc => {
                        let mut auto = vec![0usize; self.n];
                        for (a, b) in best_order.iter().zip(&order) {
                            auto[*a] = *b;
                        }
                        self.autos.push(auto);
                    }
                    Some((best_enc, _)) if *best_enc < enc => {}
                    _ => self.best = Some((enc, order)),
                }
                return;
            };
            let cell = cells[split].clone();
            let mut tried: Vec<usize> = Vec::new();
            for &v in &cell {
                let orbits = self.orbits();
                if tried.iter().any(|&u| orbits[u] == orbits[v]) {
                    continue;
                }
                tried.push(v);
                let mut next = Vec::with_capacity(cells.len() + 1);
                for (ci, c) in cells.iter().enumerate() {
                    if ci == split {
                        next.push(vec![v]);
                        next.push(c.iter().copied().filter(|&w| w != v).collect());
                    } else {
                        next.push(c.clone());
                    }
                }
                self.run((self.refine)(next));
            }
        }
    }

    let mut search = Search { refine: &refine, encode: &encode, best: None, autos: Vec::new(), n };
    search.run(refine(initial));
    CanonicalLabel(search.best.expect("non-empty graph has at least one ordering").0)
}
