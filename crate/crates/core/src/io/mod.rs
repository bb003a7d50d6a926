//! Surface syntax: the expression language, the catalog file format, and
//! the line-oriented surgery and piece-cover formats.

pub mod catalog_text;
pub mod files;
mod parse;

pub use parse::{parse_expr, ParseError, ParseErrorKind, Span};

use crate::expr::SpaceExpr;

/// Render an expression in the surface language with canonical spacing.
/// Parsing the output reproduces the tree exactly; site references that
/// would re-resolve to a different occurrence are qualified as `site@n`
/// (the n-th open site of that name, depth-first).
pub fn format_expr(e: &SpaceExpr) -> String {
    fmt_expr(e)
}

fn fmt_expr(e: &SpaceExpr) -> String {
    match e {
        SpaceExpr::SumS2(l, r) => format!("{} # {}", fmt_expr(l), fmt_term(r)),
        _ => fmt_term(e),
    }
}

fn fmt_term(e: &SpaceExpr) -> String {
    match e {
        SpaceExpr::Atom(a) => a.name.clone(),
        SpaceExpr::SumS2(..) => format!("({})", fmt_expr(e)),
        SpaceExpr::SumP2 { left, left_site, right, right_site } => {
            let ls = site_text(left, left_site);
            let rs = site_text(right, right_site);
            format!("{} #^{{{ls},{rs}}} {}", fmt_term(left), fmt_primary(right))
        }
    }
}

fn fmt_primary(e: &SpaceExpr) -> String {
    match e {
        SpaceExpr::Atom(a) => a.name.clone(),
        _ => format!("({})", fmt_expr(e)),
    }
}

fn site_text(operand: &SpaceExpr, site: &crate::expr::SiteRef) -> String {
    let ordinal = operand
        .open_site_ordinal(site)
        .expect("sites of a well-formed tree are open in their operands");
    if ordinal == 1 {
        site.site.clone()
    } else {
        format!("{}@{ordinal}", site.site)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Catalog, CatalogError, Entry};
    use crate::expr::{Branch, SiteRef, TreePath};
    use crate::io::parse::ParseErrorKind;

    fn catalog() -> Catalog {
        Catalog::builtin()
    }

    #[test]
    fn parse_sphere_sum() {
        let c = catalog();
        let e = parse_expr(&c, "Susp(P2) # S3").unwrap();
        match &e {
            SpaceExpr::SumS2(l, r) => {
                assert!(matches!(&**l, SpaceExpr::Atom(a) if a.name == "Susp(P2)"));
                assert!(matches!(&**r, SpaceExpr::Atom(a) if a.name == "S3"));
            }
            other => panic!("unexpected shape {other:?}"),
        }
    }

    #[test]
    fn parse_plane_sum_resolves_sites_per_operand() {
        let c = catalog();
        let e = parse_expr(&c, "Q #^{q1,q1} Q").unwrap();
        assert_eq!(e.singular_count(), 6);
        match &e {
            SpaceExpr::SumP2 { left_site, right_site, .. } => {
                assert_eq!(left_site.site, "q1");
                assert_eq!(right_site.site, "q1");
                assert_eq!(left_site.path, TreePath::root());
            }
            other => panic!("unexpected shape {other:?}"),
        }
    }

    #[test]
    fn parse_constructors() {
        let c = catalog();
        assert!(
            matches!(parse_expr(&c, "cap(octopod)").unwrap(), SpaceExpr::Atom(a) if a.name == "T3/beta")
        );
        assert_eq!(parse_expr(&c, "glue(D3,B(S2))").unwrap().to_string(), "Susp(P2)");
        assert_eq!(parse_expr(&c, "Xg(2)").unwrap().singular_count(), 10);
        assert_eq!(
            parse_expr(&c, "double(B(pt))").unwrap().to_string(),
            "Susp(P2) # Susp(P2)"
        );
    }

    #[test]
    fn hat_binds_tighter_than_hash() {
        let c = catalog();
        let e = parse_expr(&c, "S2xS1 # Q #^{q1,q1} Q").unwrap();
        match &e {
            SpaceExpr::SumS2(l, r) => {
                assert!(matches!(&**l, SpaceExpr::Atom(_)));
                assert!(matches!(&**r, SpaceExpr::SumP2 { .. }));
            }
            other => panic!("unexpected shape {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_spans() {
        let c = catalog();
        let err = parse_expr(&c, "S3 # NoSuchSpace").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownAtom("NoSuchSpace".to_string()));
        assert_eq!((err.span.start, err.span.end), (5, 16));

        let err = parse_expr(&c, "D3").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NotClosed("D3".to_string()));

        let err = parse_expr(&c, "Q #^{zz,q1} Q").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::SiteNotFound("zz".to_string()));
        assert_eq!((err.span.start, err.span.end), (5, 7));

        let err = parse_expr(&c, "S3 # # S3").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));

        let err = parse_expr(&c, "cap(D3)").unwrap_err();
        assert_eq!(
            err.kind,
            ParseErrorKind::Catalog(CatalogError::NoProjectivePlaneBoundary("D3".to_string()))
        );

        let err = parse_expr(&c, "cap(geminus)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::NotClosed(_)));

        let err = parse_expr(&c, "glue(quadripus,quadripus)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::NotClosed(_)));
    }

    #[test]
    fn format_parse_round_trip_on_trees() {
        let c = catalog();
        for text in [
            "S3",
            "Susp(P2) # S3",
            "S3 # (Susp(P2) # S2~S1)",
            "Q #^{q1,q1} Q",
            "(Q #^{q1,q1} Q) #^{q2,q2} Q",
            "Q #^{q2,q2} (Q #^{q1,q1} Q)",
            "(S2xS1 # Susp(P2)) #^{north,q3} Q",
            "T3/beta #^{t1,q1} Q # S2~S1",
        ] {
            let tree = parse_expr(&c, text).unwrap();
            let printed = format_expr(&tree);
            let reparsed = parse_expr(&c, &printed).unwrap();
            assert_eq!(tree, reparsed, "{text} -> {printed}");
        }
    }

    #[test]
    fn ambiguous_sites_format_with_ordinals() {
        let c = catalog();
        let q = SpaceExpr::atom(c.atom("Q").unwrap());
        let inner = SpaceExpr::sum_p2(
            q.clone(),
            SiteRef::new(TreePath::root(), "q1"),
            q.clone(),
            SiteRef::new(TreePath::root(), "q1"),
        )
        .unwrap();
        // Join the *second* copy's q3 outward: plain `q3` would resolve to
        // the first copy, so the formatter must qualify it.
        let e = SpaceExpr::sum_p2(
            inner,
            SiteRef::new(TreePath(vec![Branch::Right]), "q3"),
            q.clone(),
            SiteRef::new(TreePath::root(), "q2"),
        )
        .unwrap();
        let printed = format_expr(&e);
        assert_eq!(printed, "Q #^{q1,q1} Q #^{q3@2,q2} Q");
        assert_eq!(parse_expr(&c, &printed).unwrap(), e);
    }

    #[test]
    fn catalog_file_parses_records() {
        let text = "\
# a user space
atom widget
site a
site b
h1 Z/2
flag prime true
flag irreducible true
end

block washer
boundary torus t
end
";
        let entries = catalog_text::parse_catalog(text).unwrap();
        assert_eq!(entries.len(), 2);
        match &entries[0] {
            Entry::Atom(a) => {
                assert_eq!(a.name, "widget");
                assert_eq!(a.singular_sites.len(), 2);
                assert!(!a.flags.manifold);
            }
            other => panic!("expected atom, got {other:?}"),
        }

        let mut c = catalog();
        c.merge(entries).unwrap();
        assert!(c.atom("widget").is_ok());
        assert_eq!(parse_expr(&c, "widget # S3").unwrap().singular_count(), 2);
    }

    #[test]
    fn catalog_file_reports_line_numbers() {
        let err = catalog_text::parse_catalog("atom x\nbogus line here\nend\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = catalog_text::parse_catalog("atom x\nsite a\n").unwrap_err();
        assert!(err.message.contains("end"));
    }

    #[test]
    fn catalog_file_rejects_duplicate_graph_vertices() {
        let err = catalog_text::parse_catalog(
            "atom x\nsite a\nsite b\ngraph-vertex v black\ngraph-vertex v black\nend\n",
        )
        .unwrap_err();
        assert_eq!(err.line, 5);
        assert!(err.message.contains("duplicate graph vertex"));
    }

    #[test]
    fn catalog_load_rejects_parity_violations() {
        let text = "atom odd\nsite a\nsite b\nsite c\nend\n";
        let entries = catalog_text::parse_catalog(text).unwrap();
        let mut c = catalog();
        assert!(matches!(c.merge(entries), Err(CatalogError::Invalid { .. })));
    }
}
