//! The canonical interchange format.
//!
//! A complex is a JSON document with fields `n` (ambient dimension),
//! `terms` (map from degree to a list of twist integers) and `diffs` (map
//! from degree to a row-major matrix of polynomial strings in the CLI
//! syntax). Absent differentials are zero. Chain maps carry `source`,
//! `target` and a `maps` field of the same matrix shape.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::complex::{ChainMap, FreeTerm, LineBundleComplex, PolyMatrix, Twist};
use crate::error::{Error, Result};
use crate::poly::parse_poly;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexDoc {
    pub n: usize,
    #[serde(default)]
    pub terms: BTreeMap<String, Vec<i64>>,
    #[serde(default)]
    pub diffs: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainMapDoc {
    pub source: ComplexDoc,
    pub target: ComplexDoc,
    #[serde(default)]
    pub maps: BTreeMap<String, Vec<Vec<String>>>,
}

fn parse_degree(key: &str, field: &str) -> Result<i64> {
    key.trim()
        .parse::<i64>()
        .map_err(|_| Error::Parse(format!("field `{field}`: key `{key}` is not an integer degree")))
}

fn parse_matrix(
    n: usize,
    rows: &[Vec<String>],
    target: &FreeTerm,
    source: &FreeTerm,
    field: &str,
) -> Result<PolyMatrix> {
    if rows.len() != target.len() || rows.iter().any(|r| r.len() != source.len()) {
        return Err(Error::Parse(format!(
            "field `{field}`: matrix must be {} x {}",
            target.len(),
            source.len()
        )));
    }
    let mut m = PolyMatrix::zero_map(n, target, source);
    for (r, row) in rows.iter().enumerate() {
        for (c, text) in row.iter().enumerate() {
            let deg = target.twist(r).0 - source.twist(c).0;
            let p = parse_poly(text, n, deg).map_err(|e| {
                Error::Parse(format!("field `{field}`, entry ({r}, {c}): {e}"))
            })?;
            m.set(r, c, p);
        }
    }
    Ok(m)
}

impl ComplexDoc {
    pub fn from_complex(c: &LineBundleComplex) -> Self {
        let terms = c
            .terms()
            .iter()
            .map(|(&i, t)| (i.to_string(), t.0.iter().map(|&Twist(d)| d).collect()))
            .collect();
        let diffs = c
            .diffs()
            .iter()
            .map(|(&i, d)| {
                let rows = (0..d.rows())
                    .map(|r| (0..d.cols()).map(|c| d.get(r, c).to_string()).collect())
                    .collect();
                (i.to_string(), rows)
            })
            .collect();
        ComplexDoc {
            n: c.n(),
            terms,
            diffs,
        }
    }

    pub fn to_complex(&self) -> Result<LineBundleComplex> {
        let mut terms = BTreeMap::new();
        for (key, twists) in &self.terms {
            let deg = parse_degree(key, "terms")?;
            terms.insert(deg, FreeTerm(twists.iter().map(|&d| Twist(d)).collect()));
        }
        let mut diffs = BTreeMap::new();
        for (key, rows) in &self.diffs {
            let deg = parse_degree(key, "diffs")?;
            let target = terms.get(&(deg + 1)).cloned().unwrap_or_default();
            let source = terms.get(&deg).cloned().unwrap_or_default();
            let m = parse_matrix(self.n, rows, &target, &source, &format!("diffs[{key}]"))?;
            diffs.insert(deg, m);
        }
        LineBundleComplex::new(self.n, terms, diffs)
    }
}

impl ChainMapDoc {
    pub fn from_chain_map(f: &ChainMap) -> Self {
        let maps = f
            .maps()
            .iter()
            .map(|(&i, m)| {
                let rows = (0..m.rows())
                    .map(|r| (0..m.cols()).map(|c| m.get(r, c).to_string()).collect())
                    .collect();
                (i.to_string(), rows)
            })
            .collect();
        ChainMapDoc {
            source: ComplexDoc::from_complex(&f.source),
            target: ComplexDoc::from_complex(&f.target),
            maps,
        }
    }

    pub fn to_chain_map(&self) -> Result<ChainMap> {
        let source = self.source.to_complex()?;
        let target = self.target.to_complex()?;
        source.validate().map_err(Error::from)?;
        target.validate().map_err(Error::from)?;
        let mut maps = BTreeMap::new();
        for (key, rows) in &self.maps {
            let deg = parse_degree(key, "maps")?;
            let m = parse_matrix(
                self.source.n,
                rows,
                &target.term(deg),
                &source.term(deg),
                &format!("maps[{key}]"),
            )?;
            maps.insert(deg, m);
        }
        ChainMap::new(source, target, maps)
    }
}

/// Parses a complex from JSON text, validating it.
pub fn complex_from_json(text: &str) -> Result<LineBundleComplex> {
    let doc: ComplexDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    let c = doc.to_complex()?;
    c.validate().map_err(Error::from)?;
    Ok(c)
}

/// Serializes a complex to canonical JSON text.
pub fn complex_to_json(c: &LineBundleComplex) -> String {
    serde_json::to_string_pretty(&ComplexDoc::from_complex(c)).expect("serialization")
}

/// Parses a chain map (with embedded source and target) from JSON text.
pub fn chain_map_from_json(text: &str) -> Result<ChainMap> {
    let doc: ChainMapDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    doc.to_chain_map()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::HomogPoly;

    fn euler_complex() -> LineBundleComplex {
        let mut terms = BTreeMap::new();
        terms.insert(-1, FreeTerm(vec![Twist(-1)]));
        terms.insert(0, FreeTerm(vec![Twist(0), Twist(0)]));
        let mut d = PolyMatrix::zero_map(1, &terms[&0], &terms[&-1]);
        d.set(0, 0, HomogPoly::variable(1, 1));
        d.set(1, 0, HomogPoly::variable(1, 0).neg());
        let mut diffs = BTreeMap::new();
        diffs.insert(-1, d);
        LineBundleComplex::new(1, terms, diffs).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let c = euler_complex();
        let text = complex_to_json(&c);
        let back = complex_from_json(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn parse_errors_cite_field() {
        let bad = r#"{"n": 1, "terms": {"zero": [0]}}"#;
        let err = complex_from_json(bad).unwrap_err();
        assert!(err.to_string().contains("terms"));
        let bad = r#"{"n": 1, "terms": {"0": [0], "1": [0]}, "diffs": {"0": [["x9"]]}}"#;
        let err = complex_from_json(bad).unwrap_err();
        assert!(err.to_string().contains("diffs[0]"));
    }

    #[test]
    fn missing_diffs_mean_zero() {
        let text = r#"{"n": 2, "terms": {"0": [0, -1]}}"#;
        let c = complex_from_json(text).unwrap();
        assert_eq!(c.term(0).len(), 2);
        assert!(c.diffs().is_empty());
    }

    #[test]
    fn invalid_complex_is_rejected() {
        // x0 then x0 again does not square to zero.
        let text = r#"{
            "n": 1,
            "terms": {"0": [-2], "1": [-1], "2": [0]},
            "diffs": {"0": [["x0"]], "1": [["x0"]]}
        }"#;
        assert!(complex_from_json(text).is_err());
    }
}
