//! Built-in fixture gallery.
//!
//! | name             | kind      | r | m | notes                                           |
//! |------------------|-----------|---|---|-------------------------------------------------|
//! | `se2`            | action    | 3 | 2 | rotations and translations of the plane         |
//! | `gl3`            | action    | 9 | 2 | projective action, all nine gl(3) directions    |
//! | `sim2`           | action    | 4 | 2 | se2 plus scaling; square Lie matrix at n = 2    |
//! | `polar`          | action    | 1 | 2 | `r d/dtheta`; vanishes at the origin            |
//! | `bump`           | action    | 2 | 2 | `hstep(x) d/dy`, `hstep(-x) d/dy`; smooth only  |
//! | `monomials3`     | functions | 3 | - | `1, x, x^2` on the line                         |
//! | `dependent-pair` | functions | 2 | - | `x, 2x` on the line                             |
//!
//! Singular loci: `polar` has a zero generator at the origin (and `sqrt` is
//! not analytic there); `gl3` keeps the Euler field `-x d/dx - y d/dy`, which
//! equals minus the sum of the two diagonal scalings and so acts trivially
//! together with them; `bump` is not analytic along `x = 0`.

use super::io::load_document;
use super::{ActionSpec, Document, FunctionFamily};
use crate::error::{Error, Result};

pub const FIXTURE_NAMES: [&str; 7] = [
    "se2",
    "gl3",
    "sim2",
    "polar",
    "bump",
    "monomials3",
    "dependent-pair",
];

const SOURCES: [(&str, &str); 7] = [
    ("se2", include_str!("../../fixtures/se2.json")),
    ("gl3", include_str!("../../fixtures/gl3.json")),
    ("sim2", include_str!("../../fixtures/sim2.json")),
    ("polar", include_str!("../../fixtures/polar.json")),
    ("bump", include_str!("../../fixtures/bump.json")),
    ("monomials3", include_str!("../../fixtures/monomials3.json")),
    (
        "dependent-pair",
        include_str!("../../fixtures/dependent-pair.json"),
    ),
];

const BUMP_FAMILY: &str = include_str!("../../fixtures/bump-family.json");

pub type Fixture = Document;

impl Document {
    pub fn into_action(self) -> Option<ActionSpec> {
        match self {
            Document::Action(a) => Some(a),
            Document::Functions(_) => None,
        }
    }

    pub fn into_functions(self) -> Option<FunctionFamily> {
        match self {
            Document::Functions(f) => Some(f),
            Document::Action(_) => None,
        }
    }
}

/// The JSON text of a gallery fixture.
pub fn fixture_source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn builtin_fixture(name: &str) -> Result<Fixture> {
    let text = fixture_source(name).ok_or_else(|| Error::UnknownFixture(name.to_string()))?;
    load_document(text)
}

/// `(hstep(x), hstep(-x))` on the line: the function family whose induced
/// translation action is the `bump` fixture.
pub fn bump_family() -> FunctionFamily {
    load_document(BUMP_FAMILY)
        .ok()
        .and_then(Document::into_functions)
        .expect("bundled bump family is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actionmodel::{family_to_json, load_family, load_spec, spec_to_json};

    #[test]
    fn every_fixture_loads_and_round_trips() {
        for name in FIXTURE_NAMES {
            match builtin_fixture(name).unwrap() {
                Document::Action(spec) => {
                    assert_eq!(spec.name, name);
                    assert_eq!(load_spec(&spec_to_json(&spec)).unwrap(), spec);
                }
                Document::Functions(f) => {
                    assert_eq!(f.name, name);
                    assert_eq!(load_family(&family_to_json(&f)).unwrap(), f);
                }
            }
        }
        let f = bump_family();
        assert_eq!(load_family(&family_to_json(&f)).unwrap(), f);
    }

    #[test]
    fn fixture_shapes() {
        let shape = |name: &str| {
            let s = builtin_fixture(name).unwrap().into_action().unwrap();
            (s.group_dim(), s.dim(), s.is_polynomial())
        };
        assert_eq!(shape("se2"), (3, 2, true));
        assert_eq!(shape("gl3"), (9, 2, true));
        assert_eq!(shape("sim2"), (4, 2, true));
        assert_eq!(shape("polar"), (1, 2, false));
        assert_eq!(shape("bump"), (2, 2, false));

        let m3 = builtin_fixture("monomials3")
            .unwrap()
            .into_functions()
            .unwrap();
        assert_eq!((m3.len(), m3.xdim(), m3.qdim), (3, 1, 1));
        assert!(builtin_fixture("nope").is_err());
    }

    #[test]
    fn se2_rotation_field() {
        let s = builtin_fixture("se2").unwrap().into_action().unwrap();
        assert_eq!(
            s.generators[2].eval_float(&[2.0, 3.0]).unwrap(),
            vec![3.0, -2.0]
        );
    }

    #[test]
    fn bump_regions() {
        let s = builtin_fixture("bump").unwrap().into_action().unwrap();
        assert_eq!(
            s.region("pos").unwrap().bounds(),
            &[(0.1, 1.0), (-1.0, 1.0)]
        );
        assert!(s.region("sym").is_some());
    }
}
