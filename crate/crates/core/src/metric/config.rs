//! JSON metric documents.
//!
//! Schema (see `docs/config-schema.md`):
//!
//! ```json
//! {
//!   "dim": 2,
//!   "signature": [1, 1],
//!   "components": { "G_11": "exp(2*x)", "G_22": "exp(2*x)" },
//!   "domain": { "box": [[null, null], [0, 3.14]], "radius": 10 },
//!   "sample_points": [[0.1, 0.2]]
//! }
//! ```
//!
//! `catalog: {name, params}` replaces `components`. Unknown keys are
//! rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{catalog_construct, default_variables, Domain, MetricField, Params, Provenance, Signature};
use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDoc {
    pub dim: usize,
    pub signature: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<CatalogRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sample_points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogRef {
    pub name: String,
    #[serde(default)]
    pub params: Params,
}

/// Open box (`null` for an unbounded side) and optional ball radius.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDoc {
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[Option<f64>; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

/// Maps a JSON error to [`Error::Config`] with its position.
pub fn json_error(e: serde_json::Error) -> Error {
    Error::Config {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse_metric_doc(text: &str) -> Result<MetricDoc> {
    serde_json::from_str(text).map_err(json_error)
}

/// Parses one component expression. Without explicit coordinate names the
/// variables are `x1..xn`, with `x, y, z` as aliases when `n <= 3`.
pub fn parse_expression(src: &str, n: usize, coordinates: Option<&[String]>, key: &str) -> Result<Expr> {
    let err = |e: crate::expr::ExprError| Error::Expression {
        key: key.to_string(),
        column: e.column,
        message: e.message,
    };
    match coordinates {
        Some(names) => Expr::parse(src, names).map_err(err),
        None => {
            let mut names = default_variables(n);
            if n <= 3 {
                names.extend(["x", "y", "z"].iter().take(n).map(|s| s.to_string()));
            }
            let e = Expr::parse(src, &names).map_err(err)?;
            Ok(e.map_vars(&|i| i % n))
        }
    }
}

/// `G_ij` (single digits, `n <= 9`) or `G_i_j`, 1-based.
fn component_index(key: &str, n: usize) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("component key `{key}` is not of the form G_ij or G_i_j"));
    let rest = key.strip_prefix("G_").ok_or_else(bad)?;
    let (i, j) = match rest.split_once('_') {
        Some((a, b)) => (a.parse::<usize>().map_err(|_| bad())?, b.parse::<usize>().map_err(|_| bad())?),
        None if rest.len() == 2 && n <= 9 => {
            let d: Vec<usize> = rest.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect::<Option<_>>().ok_or_else(bad)?;
            (d[0], d[1])
        }
        None => return Err(bad()),
    };
    if i == 0 || j == 0 || i > n || j > n {
        return Err(Error::InvalidArgument(format!("component key `{key}` out of range for dim {n}")));
    }
    Ok((i - 1, j - 1))
}

fn domain_from_doc(doc: Option<&DomainDoc>, n: usize) -> Result<Domain> {
    let mut d = Domain::unbounded(n);
    if let Some(doc) = doc {
        if let Some(b) = &doc.bounds {
            if b.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: b.len() });
            }
            for (slot, [lo, hi]) in d.bounds.iter_mut().zip(b) {
                *slot = (lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY));
            }
        }
        if let Some(r) = doc.radius {
            if !(r > 0.0) {
                return Err(Error::ParameterOutOfRange {
                    name: "radius".into(),
                    value: r,
                    reason: "domain radius must be positive".into(),
                });
            }
            d.radius = Some(r);
        }
    }
    Ok(d)
}

fn intersect(a: &Domain, b: &Domain) -> Domain {
    Domain {
        bounds: a.bounds.iter().zip(&b.bounds).map(|(x, y)| (x.0.max(y.0), x.1.min(y.1))).collect(),
        radius: match (a.radius, b.radius) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        },
    }
}

/// Deterministic interior points used when a document declares none.
fn probe_points(d: &Domain) -> Vec<Vec<f64>> {
    let n = d.bounds.len();
    (0..5)
        .map(|k| {
            let mut p: Vec<f64> = d
                .bounds
                .iter()
                .enumerate()
                .map(|(i, &(lo, hi))| {
                    let f = (0.17 + 0.13 * k as f64 + 0.07 * i as f64).fract();
                    match (lo.is_finite(), hi.is_finite()) {
                        (true, true) => lo + f * (hi - lo),
                        (true, false) => lo + 0.2 + f,
                        (false, true) => hi - 0.2 - f,
                        (false, false) => f - 0.5,
                    }
                })
                .collect();
            if let Some(r) = d.radius {
                let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm >= 0.5 * r {
                    p.iter_mut().for_each(|x| *x *= 0.5 * r / norm);
                }
            }
            p
        })
        .filter(|p| p.len() == n && d.contains(p))
        .collect()
}

/// Builds a metric from a document.
pub fn load_metric(doc: &MetricDoc) -> Result<MetricField> {
    let n = doc.dim;
    if n == 0 {
        return Err(Error::InvalidArgument("dim must be >= 1".into()));
    }
    if doc.signature.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: doc.signature.len() });
    }
    let sig = Signature::from_list(&doc.signature)?;
    if let Some(c) = &doc.coordinates {
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.len() });
        }
    }
    for p in &doc.sample_points {
        if p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.len() });
        }
    }
    let doc_domain = domain_from_doc(doc.domain.as_ref(), n)?;
    let mut m = match (&doc.catalog, &doc.components) {
        (Some(cat), None) => {
            let m = catalog_construct(&cat.name, &cat.params)?;
            if m.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
            }
            if m.signature() != sig {
                let s = m.signature();
                return Err(Error::SignatureMismatch {
                    point: vec![],
                    declared: (sig.n_minus, sig.n_plus),
                    found: (s.n_minus, s.n_plus),
                });
            }
            let domain = intersect(m.domain(), &doc_domain);
            m.with_domain(domain)
        }
        (None, Some(table)) => from_components(table, n, sig, doc, doc_domain)?,
        _ => {
            return Err(Error::InvalidArgument(
                "metric document needs exactly one of `catalog` or `components`".into(),
            ))
        }
    };
    if let Some(l) = &doc.label {
        m.label = l.clone();
    }
    for p in &doc.sample_points {
        if !m.domain().contains(p) {
            return Err(Error::OutsideDomain(p.clone()));
        }
        m.check_signature(p)?;
    }
    Ok(m)
}

fn from_components(
    table: &BTreeMap<String, String>,
    n: usize,
    sig: Signature,
    doc: &MetricDoc,
    domain: Domain,
) -> Result<MetricField> {
    let coords = doc.coordinates.as_deref();
    let mut cells: Vec<Option<(String, Expr)>> = vec![None; n * n];
    for (key, src) in table {
        let (i, j) = component_index(key, n)?;
        if cells[i * n + j].is_some() {
            return Err(Error::InvalidArgument(format!("component G_{}_{} given twice", i + 1, j + 1)));
        }
        cells[i * n + j] = Some((src.clone(), parse_expression(src, n, coords, key)?));
    }
    for i in 0..n {
        if cells[i * n + i].is_none() {
            return Err(Error::InvalidArgument(format!("missing diagonal component G_{}_{}", i + 1, i + 1)));
        }
    }
    let probes = if doc.sample_points.is_empty() { probe_points(&domain) } else { doc.sample_points.clone() };
    let mut comps = vec![Expr::constant(0.0); n * n];
    for i in 0..n {
        for j in i..n {
            let e = match (&cells[i * n + j], &cells[j * n + i]) {
                (Some((_, a)), None) | (None, Some((_, a))) => a.clone(),
                (None, None) => Expr::constant(0.0),
                (Some((sa, a)), Some((sb, b))) => {
                    if sa == sb {
                        a.clone()
                    } else {
                        for p in &probes {
                            let (va, vb) = (a.eval(p), b.eval(p));
                            let diff = (va - vb).abs();
                            if diff.is_finite() && diff > 1e-10 * va.abs().max(vb.abs()).max(1.0) {
                                return Err(Error::AsymmetricComponents { i: i + 1, j: j + 1, diff });
                            }
                        }
                        Expr::constant(0.5) * (a.clone() + b.clone())
                    }
                }
            };
            comps[j * n + i] = e.clone();
            comps[i * n + j] = e;
        }
    }
    let label = doc.label.clone().unwrap_or_else(|| "components".to_string());
    let vars = coords.map(|c| c.to_vec()).unwrap_or_else(|| default_variables(n));
    let m = MetricField::from_expressions(sig, comps, domain, label).with_variables(vars);
    if doc.sample_points.is_empty() {
        for p in &probes {
            if m.components(p).as_slice().iter().all(|v| v.is_finite()) {
                m.check_signature(p)?;
            }
        }
    }
    Ok(m)
}

fn domain_doc(d: &Domain) -> Option<DomainDoc> {
    let finite = |x: f64| x.is_finite().then_some(x);
    let bounded = d.bounds.iter().any(|b| b.0.is_finite() || b.1.is_finite());
    let doc = DomainDoc {
        bounds: bounded.then(|| d.bounds.iter().map(|b| [finite(b.0), finite(b.1)]).collect()),
        radius: d.radius,
    };
    (doc != DomainDoc::default()).then_some(doc)
}

/// Serializes a metric: catalog metrics by reference, others as a
/// component table. Closure-backed fields cannot be serialized.
pub fn to_document(m: &MetricField) -> Result<MetricDoc> {
    match m.provenance() {
        Provenance::Catalog { name, params } => Ok(MetricDoc {
            dim: m.dim(),
            signature: m.signature().to_list(),
            label: None,
            catalog: Some(CatalogRef { name: name.clone(), params: params.clone() }),
            components: None,
            domain: None,
            coordinates: None,
            sample_points: vec![],
        }),
        _ => to_expression_document(m),
    }
}

/// Upper-triangle component table with fully parenthesized expressions.
pub fn to_expression_document(m: &MetricField) -> Result<MetricDoc> {
    let es = m
        .expressions()
        .ok_or_else(|| Error::InvalidArgument("closure-backed metric has no document form".into()))?;
    let n = m.dim();
    let vars = m.variables();
    let mut table = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            table.insert(format!("G_{}_{}", i + 1, j + 1), es[i * n + j].display(vars).to_string());
        }
    }
    let custom = vars != default_variables(n).as_slice();
    Ok(MetricDoc {
        dim: n,
        signature: m.signature().to_list(),
        label: Some(m.label().to_string()),
        catalog: None,
        components: Some(table),
        domain: domain_doc(m.domain()),
        coordinates: custom.then(|| vars.to_vec()),
        sample_points: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::evaluate_metric;

    #[test]
    fn catalog_pass_through() {
        let doc = parse_metric_doc(r#"{"dim": 2, "signature": [1, 1], "catalog": {"name": "euclidean", "params": {"n": 2}}}"#).unwrap();
        let m = load_metric(&doc).unwrap();
        assert_eq!(evaluate_metric(&m, &[0.3, 9.0]).unwrap().g.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn expression_table() {
        let doc = parse_metric_doc(
            r#"{"dim": 2, "signature": [1, 1],
                "components": {"G_11": "exp(2*x)", "G_22": "exp(2*x)", "G_12": "0"}}"#,
        )
        .unwrap();
        let m = load_metric(&doc).unwrap();
        let g = evaluate_metric(&m, &[1.0, 0.0]).unwrap().g;
        let e2 = 2f64.exp();
        assert_eq!(g.as_slice(), &[e2, 0.0, 0.0, e2]);
    }

    #[test]
    fn asymmetric_components_rejected() {
        let doc = parse_metric_doc(
            r#"{"dim": 2, "signature": [1, 1],
                "components": {"G_11": "2", "G_22": "2", "G_12": "1", "G_21": "0"}}"#,
        )
        .unwrap();
        assert!(matches!(load_metric(&doc), Err(Error::AsymmetricComponents { i: 1, j: 2, .. })));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_metric_doc("{\n  \"dim\": 2,\n  \"signatur\": [1, 1]\n}").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err:?}");
        let doc = parse_metric_doc(r#"{"dim": 1, "signature": [1], "components": {"G_11": "1 + * x"}}"#).unwrap();
        assert!(matches!(load_metric(&doc), Err(Error::Expression { column: 5, .. })));
    }

    #[test]
    fn signature_checked_at_sample_points() {
        let doc = parse_metric_doc(
            r#"{"dim": 2, "signature": [1, 1], "components": {"G_11": "x", "G_22": "1"},
                "sample_points": [[0.5, 0.0], [-0.5, 0.0]]}"#,
        )
        .unwrap();
        assert!(matches!(load_metric(&doc), Err(Error::SignatureMismatch { .. })));
        let doc = parse_metric_doc(r#"{"dim": 3, "signature": [1, 1], "catalog": {"name": "euclidean"}}"#).unwrap();
        assert!(matches!(load_metric(&doc), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn keys_and_coordinates() {
        assert_eq!(component_index("G_12", 3).unwrap(), (0, 1));
        assert_eq!(component_index("G_10_2", 10).unwrap(), (9, 1));
        assert!(component_index("G_04", 4).is_err());
        assert!(component_index("H_11", 4).is_err());
        let doc = parse_metric_doc(
            r#"{"dim": 2, "signature": [-1, 1], "coordinates": ["t", "r"],
                "components": {"G_11": "-1", "G_22": "exp(t)"}}"#,
        )
        .unwrap();
        let m = load_metric(&doc).unwrap();
        assert_eq!(evaluate_metric(&m, &[0.0, 4.0]).unwrap().g[[1, 1]], 1.0);
        let back = to_document(&m).unwrap();
        assert_eq!(back.coordinates.as_deref(), Some(&["t".to_string(), "r".to_string()][..]));
    }
}
