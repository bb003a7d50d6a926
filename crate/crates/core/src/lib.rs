//! Symbolic calculus for closed three-dimensional Alexandrov spaces.
//!
//! Spaces are expressions over a catalog of closed atoms and boundary
//! blocks, combined by connected sums along 2-spheres (`#`) and along
//! projective planes at chosen singular sites (`#^`). The engine
//! normalizes expressions to their unique normal prime decomposition,
//! separates non-homeomorphic spaces with certificates (singular-point
//! counts, first homology, colored P²-graph classes, double-branched-cover
//! invariants), validates generalized Dehn surgery descriptions, and emits
//! 4-dimensional filling recipes.
//!
//! Everything is a pure function of immutable values; the catalog is
//! read-only after loading and all types are safe to share across threads.

pub mod catalog;
pub mod cover;
pub mod expr;
pub mod homology;
pub mod io;
pub mod normalizer;
pub mod p2graph;
pub mod surgery;
pub mod testkit;

pub use catalog::{
    AtomFlags, AtomSpec, BlockSpec, BoundaryComponent, BoundaryKind, Capped, Catalog,
    CatalogError, DeclaredGraph, Entry, Glued, SingularSite,
};
pub use cover::{double_branched_cover, irreducibility_transfer, verify_two_sheeted, PieceCover};
pub use expr::{is_irreducible, is_prime, ExprError, SiteRef, SpaceExpr, TreePath};
pub use homology::{h1, smith_normal_form, AbelianGroup, HomologyError, IntMatrix, Snf};
pub use io::{format_expr, parse_expr, ParseError};
pub use normalizer::{
    distinguish, equivalent, graph_of, normal_form, normal_form_with, Certificate, Cluster,
    Equivalence, NormalForm, NormalizeError, RuleOrder,
};
pub use p2graph::{canonical_label, is_isomorphic, CanonicalLabel, Color, ColoredGraph};
pub use surgery::{
    filling_4d, realize, surgery_skeleton, validate, BaseSpace, Filling, FillingRecipe4D,
    LinkComponent, Slope, SurgeryDescription, SurgeryError,
};
