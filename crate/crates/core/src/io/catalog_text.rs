//! The catalog file format: one record per atom or block.
//!
//! ```text
//! atom Susp(P2)
//! site north image 1
//! site south image 1
//! h1 Z/2
//! flag manifold false
//! flag prime true
//! cover S3
//! graph-vertex wn white site north
//! graph-vertex ws white site south
//! graph-edge wn ws
//! end
//!
//! block D3
//! boundary sphere s
//! end
//! ```
//!
//! Blank lines and `#` comments are ignored. Site images are coordinate
//! vectors over the atom's H₁ generators, free generators first. Blocks
//! additionally accept `fixed-points <n>` and `involution <text>` lines.
//! The built-in catalog ships in this format; user files loaded with
//! `--catalog` are merged and may not redefine built-in names.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::catalog::{
    AtomFlags, AtomSpec, BlockSpec, BoundaryComponent, BoundaryKind, DeclaredGraph, Entry,
    SingularSite,
};
use crate::homology::AbelianGroup;
use crate::p2graph::{Color, ColoredGraph};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("catalog line {line}: {message}")]
pub struct CatalogFileError {
    pub line: usize,
    pub message: String,
}

pub fn parse_catalog(text: &str) -> Result<Vec<Entry>, CatalogFileError> {
    let mut entries = Vec::new();
    let mut record: Option<Record> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let fail = |message: String| CatalogFileError { line, message };
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let (keyword, rest) = match content.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (content, ""),
        };

        match (&mut record, keyword) {
            (None, "atom") if !rest.is_empty() => {
                record = Some(Record::atom(rest));
            }
            (None, "block") if !rest.is_empty() => {
                record = Some(Record::block(rest));
            }
            (None, _) => {
                return Err(fail(format!("expected `atom <name>` or `block <name>`, got `{content}`")))
            }
            (Some(rec), "end") => {
                entries.push(rec.finish().map_err(fail)?);
                record = None;
            }
            (Some(rec), _) => rec.field(keyword, rest).map_err(fail)?,
        }
    }
    if record.is_some() {
        return Err(CatalogFileError {
            line: text.lines().count(),
            message: "unterminated record: missing `end`".to_string(),
        });
    }
    Ok(entries)
}

struct Record {
    name: String,
    is_atom: bool,
    sites: Vec<SingularSite>,
    h1: Option<AbelianGroup>,
    flags: AtomFlags,
    cover: Option<String>,
    boundary: Vec<BoundaryComponent>,
    fixed_points: usize,
    involution: Option<String>,
    graph_vertices: Vec<(String, Color, Option<String>)>,
    graph_edges: Vec<(String, String)>,
}

impl Record {
    fn atom(name: &str) -> Record {
        Record::new(name, true)
    }

    fn block(name: &str) -> Record {
        Record::new(name, false)
    }

    fn new(name: &str, is_atom: bool) -> Record {
        Record {
            name: name.to_string(),
            is_atom,
            sites: Vec::new(),
            h1: None,
            // Mirror identification is an assumption recorded per atom.
            flags: AtomFlags { amphichiral: true, ..Default::default() },
            cover: None,
            boundary: Vec::new(),
            fixed_points: 0,
            involution: None,
            graph_vertices: Vec::new(),
            graph_edges: Vec::new(),
        }
    }

    fn field(&mut self, keyword: &str, rest: &str) -> Result<(), String> {
        let words: Vec<&str> = rest.split_whitespace().collect();
        match keyword {
            "site" => match words.as_slice() {
                [id] => self.sites.push(SingularSite::plain(*id)),
                [id, "image", coords] => {
                    let image = coords
                        .split(',')
                        .map(|c| c.trim().parse::<i128>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| format!("bad image coordinates `{coords}`"))?;
                    self.sites.push(SingularSite { id: id.to_string(), h1_image: Some(image) });
                }
                _ => return Err(format!("bad site line `{rest}`")),
            },
            "h1" if self.is_atom => {
                self.h1 =
                    Some(AbelianGroup::parse(rest).ok_or(format!("bad h1 group `{rest}`"))?);
            }
            "flag" if self.is_atom => {
                let [name, value] = words.as_slice() else {
                    return Err(format!("bad flag line `{rest}`"));
                };
                let value = match *value {
                    "true" => true,
                    "false" => false,
                    other => return Err(format!("bad flag value `{other}`")),
                };
                match *name {
                    "manifold" => self.flags.manifold = value,
                    "orientable" => self.flags.orientable = Some(value),
                    "prime" => self.flags.prime = Some(value),
                    "irreducible" => self.flags.irreducible = Some(value),
                    "simply_connected" => self.flags.simply_connected = Some(value),
                    "has_nonseparating_p2" => self.flags.has_nonseparating_p2 = Some(value),
                    "amphichiral" => self.flags.amphichiral = value,
                    other => return Err(format!("unknown flag `{other}`")),
                }
            }
            "cover" => self.cover = Some(rest.to_string()),
            "boundary" if !self.is_atom => {
                let [kind, label] = words.as_slice() else {
                    return Err(format!("bad boundary line `{rest}`"));
                };
                let kind =
                    BoundaryKind::parse(kind).ok_or(format!("unknown boundary kind `{kind}`"))?;
                self.boundary.push(BoundaryComponent { kind, label: label.to_string() });
            }
            "fixed-points" if !self.is_atom => {
                self.fixed_points =
                    rest.parse().map_err(|_| format!("bad fixed point count `{rest}`"))?;
            }
            "involution" if !self.is_atom => self.involution = Some(rest.to_string()),
            "graph-vertex" if self.is_atom => match words.as_slice() {
                [id, color] | [id, color, "site", _] => {
                    if self.graph_vertices.iter().any(|(v, _, _)| v == id) {
                        return Err(format!("duplicate graph vertex `{id}`"));
                    }
                    let color = match *color {
                        "black" => Color::Black,
                        "white" => Color::White,
                        other => return Err(format!("unknown vertex color `{other}`")),
                    };
                    let site = match words.as_slice() {
                        [_, _, "site", s] => Some(s.to_string()),
                        _ => None,
                    };
                    self.graph_vertices.push((id.to_string(), color, site));
                }
                _ => return Err(format!("bad graph-vertex line `{rest}`")),
            },
            "graph-edge" if self.is_atom => {
                let [a, b] = words.as_slice() else {
                    return Err(format!("bad graph-edge line `{rest}`"));
                };
                self.graph_edges.push((a.to_string(), b.to_string()));
            }
            other => {
                return Err(format!(
                    "unknown field `{other}` in {} record",
                    if self.is_atom { "atom" } else { "block" }
                ))
            }
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<Entry, String> {
        if self.is_atom {
            let graph = if self.graph_vertices.is_empty() {
                None
            } else {
                let mut g = ColoredGraph::new();
                let mut site_whites = BTreeMap::new();
                for (id, color, site) in &self.graph_vertices {
                    g.add_vertex(id.clone(), *color);
                    if let Some(site) = site {
                        site_whites.insert(site.clone(), id.clone());
                    }
                }
                for (a, b) in &self.graph_edges {
                    g.add_edge_ids(a, b).map_err(|e| e.to_string())?;
                }
                Some(DeclaredGraph { graph: g, site_whites })
            };
            // A record without an explicit manifold flag is a manifold
            // exactly when it has no sites.
            if self.sites.is_empty() {
                self.flags.manifold = true;
            }
            Ok(Entry::Atom(Arc::new(AtomSpec {
                name: self.name.clone(),
                singular_sites: std::mem::take(&mut self.sites),
                h1: self.h1.take(),
                flags: self.flags,
                double_branched_cover: self.cover.take(),
                graph,
            })))
        } else {
            Ok(Entry::Block(Arc::new(BlockSpec {
                name: self.name.clone(),
                boundary: std::mem::take(&mut self.boundary),
                singular_sites: std::mem::take(&mut self.sites),
                double_cover: self.cover.take(),
                involution_note: self.involution.take(),
                fixed_point_count: self.fixed_points,
            })))
        }
    }
}
