//! Generalized Dehn surgery descriptions and 4-dimensional filling recipes.
//!
//! A description names a base (the 3-sphere or the non-orientable
//! 2-sphere bundle over the circle), a link whose components are filled by
//! solid tori or solid Klein bottles, and a count of solid-Klein-bottle
//! regions replaced by `B(pt)` pieces. Each replacement contributes exactly
//! two singular points to the realized space.
//!
//! The skeleton direction is existential: every closed space arises from
//! some such description, but the link itself is not computable here, so
//! skeletons carry an explicit placeholder component rather than fabricated
//! link data.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::catalog::{AtomFlags, AtomSpec, Catalog, CatalogError, SingularSite};
use crate::expr::SpaceExpr;
use crate::normalizer::{normal_form, NormalizeError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SurgeryError {
    #[error("slope {0}/{1} is not coprime")]
    NonCoprimeSlope(i64, i64),
    #[error("incompatible filling: {0}")]
    IncompatibleFilling(String),
    #[error("odd singular count {0}: catalog corruption")]
    OddSingularCount(usize),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseSpace {
    S3,
    S2TwistS1,
}

impl BaseSpace {
    pub fn atom_name(self) -> &'static str {
        match self {
            BaseSpace::S3 => "S3",
            BaseSpace::S2TwistS1 => "S2~S1",
        }
    }
}

impl fmt::Display for BaseSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atom_name())
    }
}

/// Filling slope in normal form: coprime, `q >= 0`, and `(1, 0)` for the
/// trivial filling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slope {
    p: i64,
    q: i64,
}

impl Slope {
    pub fn new(p: i64, q: i64) -> Result<Slope, SurgeryError> {
        if gcd(p.unsigned_abs(), q.unsigned_abs()) != 1 {
            return Err(SurgeryError::NonCoprimeSlope(p, q));
        }
        let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
        let p = if q == 0 { 1 } else { p };
        Ok(Slope { p, q })
    }

    pub fn trivial() -> Slope {
        Slope { p: 1, q: 0 }
    }

    pub fn is_trivial(self) -> bool {
        self.q == 0
    }

    pub fn parts(self) -> (i64, i64) {
        (self.p, self.q)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Filling {
    SolidTorus(Slope),
    SolidKleinBottle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkComponent {
    pub id: String,
    pub filling: Filling,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurgeryDescription {
    pub base: BaseSpace,
    pub components: Vec<LinkComponent>,
    /// Solid-Klein-bottle regions replaced by `B(pt)` pieces.
    pub bpt_sites: usize,
}

impl SurgeryDescription {
    pub fn empty(base: BaseSpace) -> Self {
        SurgeryDescription { base, components: Vec::new(), bpt_sites: 0 }
    }
}

impl fmt::Display for SurgeryDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "base {}", self.base)?;
        for c in &self.components {
            match &c.filling {
                Filling::SolidTorus(slope) => {
                    writeln!(f, "component {} torus {slope}", c.id)?
                }
                Filling::SolidKleinBottle => writeln!(f, "component {} kleinbottle", c.id)?,
            }
        }
        if self.bpt_sites > 0 {
            writeln!(f, "bpt {}", self.bpt_sites)?;
        }
        Ok(())
    }
}

/// Check base/filling compatibility. Slopes are coprime and normalized by
/// construction; `B(pt)` replacements need a non-orientability source, so a
/// positive count over the 3-sphere requires a solid-Klein-bottle filling.
pub fn validate(d: &SurgeryDescription) -> Result<(), SurgeryError> {
    if d.bpt_sites >= 1 && d.base == BaseSpace::S3 {
        let has_kb = d
            .components
            .iter()
            .any(|c| matches!(c.filling, Filling::SolidKleinBottle));
        if !has_kb {
            return Err(SurgeryError::IncompatibleFilling(
                "B(pt) replacement sites over S3 require a solid Klein bottle filling"
                    .to_string(),
            ));
        }
    }
    debug_assert!((2 * d.bpt_sites).is_multiple_of(2), "realized singular count is even");
    Ok(())
}

/// Realize a description as a closed expression. Trivially filled
/// components change nothing and are dropped; the remaining table covers
/// the bare bases and the single `B(pt)` replacement of the core solid
/// Klein bottle of `S2~S1`. Everything else yields an opaque atom carrying
/// only its derived singular count.
pub fn realize(catalog: &Catalog, d: &SurgeryDescription) -> Result<SpaceExpr, SurgeryError> {
    validate(d)?;
    let essential: Vec<&LinkComponent> = d
        .components
        .iter()
        .filter(|c| !matches!(c.filling, Filling::SolidTorus(s) if s.is_trivial()))
        .collect();

    if essential.is_empty() {
        if d.bpt_sites == 0 {
            return Ok(SpaceExpr::atom(catalog.atom(d.base.atom_name())?));
        }
        if d.base == BaseSpace::S2TwistS1 && d.bpt_sites == 1 {
            return Ok(SpaceExpr::atom(catalog.atom("Susp(P2)")?));
        }
    }

    // The opaque name stays within the expression lexer's alphabet so the
    // realized expression can be reprinted.
    let mut name = format!("surgery({}", d.base);
    for c in &essential {
        match &c.filling {
            Filling::SolidTorus(s) => {
                name.push_str(&format!("_{}_{}/{}", c.id, s.p, s.q));
            }
            Filling::SolidKleinBottle => name.push_str(&format!("_{}_Kl", c.id)),
        }
    }
    name.push_str(&format!("_bpt_{})", d.bpt_sites));

    let sites = (1..=2 * d.bpt_sites)
        .map(|i| SingularSite::plain(format!("s{i}")))
        .collect::<Vec<_>>();
    let orientable = if d.bpt_sites == 0 {
        let all_torus = essential
            .iter()
            .all(|c| matches!(c.filling, Filling::SolidTorus(_)));
        if d.base == BaseSpace::S3 && all_torus {
            Some(true)
        } else {
            None
        }
    } else {
        None
    };
    Ok(SpaceExpr::atom(Arc::new(AtomSpec {
        name,
        flags: AtomFlags {
            manifold: sites.is_empty(),
            orientable,
            amphichiral: true,
            ..Default::default()
        },
        singular_sites: sites,
        h1: None,
        double_branched_cover: None,
        graph: None,
    })))
}

/// The constructive shape of the surgery theorem for `e`: the right base,
/// one explicit placeholder link component (the link exists but is not
/// computed), and one `B(pt)` site per pair of singular points.
pub fn surgery_skeleton(e: &SpaceExpr) -> Result<SurgeryDescription, SurgeryError> {
    let count = e.singular_count();
    if !count.is_multiple_of(2) {
        return Err(SurgeryError::OddSingularCount(count));
    }
    let base = if count > 0 {
        BaseSpace::S2TwistS1
    } else if e.orientable() == Some(true) {
        BaseSpace::S3
    } else {
        BaseSpace::S2TwistS1
    };

    let nf = normal_form(e)?;
    let is_base_itself = match base {
        BaseSpace::S3 => nf.is_empty(),
        BaseSpace::S2TwistS1 => {
            count == 0
                && nf.manifold_summands.is_empty()
                && nf.clusters.is_empty()
                && nf.s2_bundle_count() == 1
        }
    };
    let components = if is_base_itself {
        Vec::new()
    } else {
        vec![LinkComponent {
            id: "placeholder".to_string(),
            filling: Filling::SolidTorus(Slope::trivial()),
        }]
    };
    Ok(SurgeryDescription { base, components, bpt_sites: count / 2 })
}

/// Recipe for a compact 4-space bounding `e`: a handlebody over the
/// skeleton's link plus one `D2 x D2 / tau` piece per pair of singular
/// points.
#[derive(Debug, Clone, PartialEq)]
pub struct FillingRecipe4D {
    pub two_handles: usize,
    pub y_pieces: usize,
    pub boundary: SpaceExpr,
}

pub fn filling_4d(e: &SpaceExpr) -> Result<FillingRecipe4D, SurgeryError> {
    let skeleton = surgery_skeleton(e)?;
    Ok(FillingRecipe4D {
        two_handles: skeleton.components.len(),
        y_pieces: skeleton.bpt_sites,
        boundary: e.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::{h1, reduce_presentation, AbelianGroup};
    use crate::io::parse_expr;

    fn catalog() -> Catalog {
        Catalog::builtin()
    }

    #[test]
    fn slope_normal_form() {
        assert_eq!(Slope::new(3, -4).unwrap().parts(), (-3, 4));
        assert_eq!(Slope::new(-1, 0).unwrap().parts(), (1, 0));
        assert_eq!(Slope::new(0, 1).unwrap().parts(), (0, 1));
        assert_eq!(Slope::new(2, 0).unwrap_err(), SurgeryError::NonCoprimeSlope(2, 0));
        assert_eq!(Slope::new(4, 6).unwrap_err(), SurgeryError::NonCoprimeSlope(4, 6));
        assert_eq!(Slope::new(0, 0).unwrap_err(), SurgeryError::NonCoprimeSlope(0, 0));
        assert_eq!(Slope::new(3, 4).unwrap().to_string(), "3/4");
    }

    #[test]
    fn validate_classical_description() {
        let d = SurgeryDescription {
            base: BaseSpace::S3,
            components: vec![LinkComponent {
                id: "unknot".to_string(),
                filling: Filling::SolidTorus(Slope::new(0, 1).unwrap()),
            }],
            bpt_sites: 0,
        };
        assert!(validate(&d).is_ok());
    }

    #[test]
    fn validate_needs_a_nonorientability_source() {
        let mut d = SurgeryDescription::empty(BaseSpace::S3);
        d.bpt_sites = 1;
        assert!(matches!(validate(&d), Err(SurgeryError::IncompatibleFilling(_))));
        d.components.push(LinkComponent {
            id: "k".to_string(),
            filling: Filling::SolidKleinBottle,
        });
        assert!(validate(&d).is_ok());

        let mut over_bundle = SurgeryDescription::empty(BaseSpace::S2TwistS1);
        over_bundle.bpt_sites = 1;
        assert!(validate(&over_bundle).is_ok());
    }

    #[test]
    fn realize_the_bases() {
        let c = catalog();
        let s3 = realize(&c, &SurgeryDescription::empty(BaseSpace::S3)).unwrap();
        assert_eq!(s3.to_string(), "S3");
        let bundle = realize(&c, &SurgeryDescription::empty(BaseSpace::S2TwistS1)).unwrap();
        assert_eq!(bundle.to_string(), "S2~S1");
    }

    #[test]
    fn realize_single_replacement_is_the_suspension() {
        let c = catalog();
        let mut d = SurgeryDescription::empty(BaseSpace::S2TwistS1);
        d.bpt_sites = 1;
        let realized = realize(&c, &d).unwrap();
        assert_eq!(realized.to_string(), "Susp(P2)");
        // Independent oracle: H1 of the manifold part of the replacement
        // result, (solid Klein bottle) u_Kl (geminus), by Mayer-Vietoris.
        // Generators u, v (the two core plane classes of the geminus) and
        // c (the solid Klein bottle core); the boundary Klein bottle maps
        // its infinite-order generator to u on one side and c on the other,
        // and its order-2 generator to u + v and 0.
        let (oracle, _) = reduce_presentation(
            3,
            &[
                vec![2, 0, 0],  // 2u = 0
                vec![0, 2, 0],  // 2v = 0
                vec![1, 0, -1], // u = c
                vec![1, 1, 0],  // u + v = 0
            ],
        )
        .unwrap();
        assert_eq!(oracle, AbelianGroup::new(0, vec![2]));
        assert_eq!(h1(&realized).unwrap(), Some(oracle));
    }

    #[test]
    fn realize_drops_trivial_fillings() {
        let c = catalog();
        let d = SurgeryDescription {
            base: BaseSpace::S2TwistS1,
            components: vec![LinkComponent {
                id: "k".to_string(),
                filling: Filling::SolidTorus(Slope::trivial()),
            }],
            bpt_sites: 1,
        };
        assert_eq!(realize(&c, &d).unwrap().to_string(), "Susp(P2)");
    }

    #[test]
    fn realize_unknown_descriptions_opaquely() {
        let c = catalog();
        let d = SurgeryDescription {
            base: BaseSpace::S2TwistS1,
            components: vec![LinkComponent {
                id: "k1".to_string(),
                filling: Filling::SolidTorus(Slope::new(3, 4).unwrap()),
            }],
            bpt_sites: 2,
        };
        let realized = realize(&c, &d).unwrap();
        assert_eq!(realized.singular_count(), 4);
        assert_eq!(realized.to_string(), "surgery(S2~S1_k1_3/4_bpt_2)");

        let orientable = SurgeryDescription {
            base: BaseSpace::S3,
            components: vec![LinkComponent {
                id: "k1".to_string(),
                filling: Filling::SolidTorus(Slope::new(0, 1).unwrap()),
            }],
            bpt_sites: 0,
        };
        let realized = realize(&c, &orientable).unwrap();
        assert_eq!(realized.singular_count(), 0);
        assert_eq!(realized.orientable(), Some(true));
    }

    #[test]
    fn skeleton_shapes() {
        let c = catalog();
        let pair = parse_expr(&c, "Susp(P2) # Susp(P2)").unwrap();
        let d = surgery_skeleton(&pair).unwrap();
        assert_eq!(d.base, BaseSpace::S2TwistS1);
        assert_eq!(d.bpt_sites, 2);
        assert_eq!(d.components.len(), 1);
        assert!(validate(&d).is_ok());

        let s3 = surgery_skeleton(&parse_expr(&c, "S3").unwrap()).unwrap();
        assert_eq!(s3, SurgeryDescription::empty(BaseSpace::S3));

        let bundle = surgery_skeleton(&parse_expr(&c, "S2~S1").unwrap()).unwrap();
        assert_eq!(bundle, SurgeryDescription::empty(BaseSpace::S2TwistS1));

        let xg = surgery_skeleton(&parse_expr(&c, "Xg(1)").unwrap()).unwrap();
        assert_eq!(xg.bpt_sites, 3);
        assert_eq!(xg.base, BaseSpace::S2TwistS1);

        let orientable = surgery_skeleton(&parse_expr(&c, "S2xS1").unwrap()).unwrap();
        assert_eq!(orientable.base, BaseSpace::S3);
        assert_eq!(orientable.components.len(), 1);
    }

    #[test]
    fn skeleton_realization_preserves_the_singular_count() {
        let c = catalog();
        for text in ["Susp(P2)", "Susp(P2) # Susp(P2)", "Xg(2)", "S2xS1", "T3/beta"] {
            let e = parse_expr(&c, text).unwrap();
            let d = surgery_skeleton(&e).unwrap();
            let realized = realize(&c, &d).unwrap();
            assert_eq!(realized.singular_count(), e.singular_count(), "{text}");
        }
    }

    #[test]
    fn filling_recipes() {
        let c = catalog();
        let susp = parse_expr(&c, "Susp(P2)").unwrap();
        let recipe = filling_4d(&susp).unwrap();
        assert_eq!(recipe.y_pieces, 1);
        assert_eq!(recipe.boundary, susp);

        let manifold = filling_4d(&parse_expr(&c, "S2xS1").unwrap()).unwrap();
        assert_eq!(manifold.y_pieces, 0);

        let x2 = filling_4d(&parse_expr(&c, "Q #^{q2,q2} Q").unwrap()).unwrap();
        assert_eq!(x2.y_pieces, 3);
        assert_eq!(x2.two_handles, 1);
    }

    #[test]
    fn odd_singular_counts_are_catalog_corruption() {
        use crate::catalog::{AtomFlags, AtomSpec, SingularSite};
        let broken = SpaceExpr::atom(Arc::new(AtomSpec {
            name: "broken".to_string(),
            singular_sites: vec![SingularSite::plain("only")],
            h1: None,
            flags: AtomFlags { manifold: false, amphichiral: true, ..Default::default() },
            double_branched_cover: None,
            graph: None,
        }));
        assert_eq!(
            surgery_skeleton(&broken).unwrap_err(),
            SurgeryError::OddSingularCount(1)
        );
        assert_eq!(filling_4d(&broken).unwrap_err(), SurgeryError::OddSingularCount(1));
    }

    #[test]
    fn description_display_round_trips() {
        let d = SurgeryDescription {
            base: BaseSpace::S2TwistS1,
            components: vec![
                LinkComponent {
                    id: "k1".to_string(),
                    filling: Filling::SolidTorus(Slope::new(-3, 4).unwrap()),
                },
                LinkComponent { id: "k2".to_string(), filling: Filling::SolidKleinBottle },
            ],
            bpt_sites: 2,
        };
        let text = d.to_string();
        let parsed = crate::io::files::parse_surgery(&text).unwrap();
        assert_eq!(parsed, d);
    }
}
