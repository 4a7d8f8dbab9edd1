use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ActionSpec, FunctionFamily, Region};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionDoc {
    kind: String,
    name: String,
    dim: usize,
    coordinates: Vec<String>,
    generators: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    regions: BTreeMap<String, Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    analytic_hint: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionsDoc {
    kind: String,
    name: String,
    xdim: usize,
    xcoordinates: Vec<String>,
    qdim: usize,
    functions: Vec<Vec<String>>,
}

/// Either kind of input document.
#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Action(ActionSpec),
    Functions(FunctionFamily),
}

fn bad_json(e: serde_json::Error) -> Error {
    Error::Spec(format!("malformed document: {e}"))
}

/// Parses an action or function-family document, dispatching on `kind`.
pub fn load_document(text: &str) -> Result<Document> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(bad_json)?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| Error::Spec("missing string field `kind`".into()))?;
    match kind {
        "action" => {
            let doc: ActionDoc = serde_json::from_value(value).map_err(bad_json)?;
            action_from_doc(doc).map(Document::Action)
        }
        "functions" => {
            let doc: FunctionsDoc = serde_json::from_value(value).map_err(bad_json)?;
            family_from_doc(doc).map(Document::Functions)
        }
        other => Err(Error::Spec(format!(
            "unknown kind `{other}`, expected `action` or `functions`"
        ))),
    }
}

pub fn load_spec(text: &str) -> Result<ActionSpec> {
    match load_document(text)? {
        Document::Action(spec) => Ok(spec),
        Document::Functions(_) => Err(Error::Spec(
            "expected an action document, found kind `functions`".into(),
        )),
    }
}

pub fn load_family(text: &str) -> Result<FunctionFamily> {
    match load_document(text)? {
        Document::Functions(f) => Ok(f),
        Document::Action(_) => Err(Error::Spec(
            "expected a function-family document, found kind `action`".into(),
        )),
    }
}

fn action_from_doc(doc: ActionDoc) -> Result<ActionSpec> {
    if doc.dim != doc.coordinates.len() {
        return Err(Error::Spec(format!(
            "dim is {} but {} coordinates are declared",
            doc.dim,
            doc.coordinates.len()
        )));
    }
    let mut spec = ActionSpec::from_strings(&doc.name, &doc.coordinates, &doc.generators)?;
    spec.analytic_hint = doc.analytic_hint;
    for (name, bounds) in doc.regions {
        let region = Region::new(bounds.iter().map(|[lo, hi]| (*lo, *hi)).collect())
            .map_err(|e| Error::Spec(format!("region `{name}`: {e}")))?;
        spec = spec.with_region(&name, region)?;
    }
    Ok(spec)
}

fn family_from_doc(doc: FunctionsDoc) -> Result<FunctionFamily> {
    if doc.xdim != doc.xcoordinates.len() {
        return Err(Error::Spec(format!(
            "xdim is {} but {} coordinates are declared",
            doc.xdim,
            doc.xcoordinates.len()
        )));
    }
    FunctionFamily::from_strings(&doc.name, &doc.xcoordinates, doc.qdim, &doc.functions)
}

pub fn spec_to_json(spec: &ActionSpec) -> String {
    let doc = ActionDoc {
        kind: "action".into(),
        name: spec.name.clone(),
        dim: spec.dim(),
        coordinates: spec.coords.clone(),
        generators: spec
            .generators
            .iter()
            .map(|g| {
                g.coefficients
                    .iter()
                    .map(|c| c.source().to_string())
                    .collect()
            })
            .collect(),
        regions: spec
            .regions
            .iter()
            .map(|(name, r)| {
                (
                    name.clone(),
                    r.bounds().iter().map(|&(lo, hi)| [lo, hi]).collect(),
                )
            })
            .collect(),
        analytic_hint: spec.analytic_hint,
    };
    serde_json::to_string_pretty(&doc).expect("action document serializes")
}

pub fn family_to_json(family: &FunctionFamily) -> String {
    let doc = FunctionsDoc {
        kind: "functions".into(),
        name: family.name.clone(),
        xdim: family.xdim(),
        xcoordinates: family.xcoords.clone(),
        qdim: family.qdim,
        functions: family
            .functions
            .iter()
            .map(|f| f.iter().map(|c| c.source().to_string()).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("function document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SE2: &str = r#"{"kind": "action", "name": "se2", "dim": 2,
        "coordinates": ["x", "y"],
        "generators": [["1", "0"], ["0", "1"], ["y", "-x"]]}"#;

    #[test]
    fn loads_action_document() {
        let spec = load_spec(SE2).unwrap();
        assert_eq!(spec.dim(), 2);
        assert_eq!(spec.group_dim(), 3);
        assert!(spec.is_polynomial());
        assert_eq!(load_spec(&spec_to_json(&spec)).unwrap(), spec);
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = SE2.replace("\"dim\": 2,", "\"dim\": 2, \"extra\": 1,");
        assert!(matches!(load_spec(&text), Err(Error::Spec(m)) if m.contains("extra")));
    }

    #[test]
    fn rejects_dimension_mismatch_and_arity() {
        let text = SE2.replace("\"dim\": 2", "\"dim\": 3");
        assert!(load_spec(&text).is_err());
        let text = SE2.replace("[\"y\", \"-x\"]", "[\"y\"]");
        assert!(matches!(load_spec(&text), Err(Error::Spec(m)) if m.contains("generator 3")));
    }

    #[test]
    fn kind_dispatch() {
        assert!(load_family(SE2).is_err());
        let text = SE2.replace("\"action\"", "\"group\"");
        assert!(load_document(&text).is_err());
        assert!(load_document("not json").is_err());
        assert!(load_document("{}").is_err());
    }

    #[test]
    fn regions_are_validated() {
        let text = SE2.replace(
            "\"dim\": 2,",
            "\"dim\": 2, \"regions\": {\"bad\": [[1, 0], [0, 1]]},",
        );
        assert!(load_spec(&text).is_err());
        let text = SE2.replace(
            "\"dim\": 2,",
            "\"dim\": 2, \"regions\": {\"thin\": [[0, 1]]},",
        );
        assert!(load_spec(&text).is_err());
    }
}
