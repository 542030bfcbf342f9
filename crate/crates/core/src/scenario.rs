//! Scenario documents: a metric (inline or by file) plus the suites,
//! grids, tolerance and seed for a verification run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::config::{json_error, CatalogRef, DomainDoc};
use crate::metric::{load_metric, parse_metric_doc, Domain, MetricDoc, MetricField, Provenance};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Curvature,
    NormalChart,
    Expansion,
    Conformal,
    Embed,
    Algebra,
    #[default]
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] =
        [Suite::Curvature, Suite::NormalChart, Suite::Expansion, Suite::Conformal, Suite::Embed, Suite::Algebra];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Curvature => "curvature",
            Suite::NormalChart => "normal-chart",
            Suite::Expansion => "expansion",
            Suite::Conformal => "conformal",
            Suite::Embed => "embed",
            Suite::Algebra => "algebra",
            Suite::All => "all",
        }
    }

    /// The concrete suites this selection runs, in report order.
    pub fn expand(self) -> Vec<Suite> {
        if self == Suite::All {
            Self::EACH.to_vec()
        } else {
            vec![self]
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::EACH
            .iter()
            .chain(&[Suite::All])
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

/// Metric document keys, `metric_file` as an alternative, and run keys.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Vec<i64>>,
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
    /// Path to a metric document, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_file: Option<String>,
    #[serde(default)]
    pub suite: Suite,
    /// Evaluation points for pointwise checks.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    /// Normal-coordinate radii for chart and expansion checks.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radii: Vec<f64>,
    /// Overrides every residual tolerance (slope windows keep theirs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Chart origin; defaults to the first point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(json_error)?;
        if let Some(t) = s.tolerance {
            if !(t > 0.0) {
                return Err(Error::ParameterOutOfRange {
                    name: "tolerance".into(),
                    value: t,
                    reason: "must be positive".into(),
                });
            }
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        let mut s = Self::parse(&text)?;
        if let Some(f) = &s.metric_file {
            let p = path.parent().unwrap_or(Path::new(".")).join(f);
            s.metric_file = Some(p.to_string_lossy().into_owned());
        }
        Ok(s)
    }

    fn has_inline_metric(&self) -> bool {
        self.dim.is_some() || self.signature.is_some() || self.catalog.is_some() || self.components.is_some()
    }

    /// The metric document, inline or read from `metric_file`.
    pub fn metric_doc(&self) -> Result<MetricDoc> {
        if let Some(f) = &self.metric_file {
            if self.has_inline_metric() {
                return Err(Error::InvalidArgument("give either metric_file or inline metric keys, not both".into()));
            }
            let text = std::fs::read_to_string(f)
                .map_err(|e| Error::InvalidArgument(format!("cannot read metric file {f}: {e}")))?;
            return parse_metric_doc(&text);
        }
        let missing = |k: &str| Error::Config { line: 0, column: 0, message: format!("missing field `{k}`") };
        Ok(MetricDoc {
            dim: self.dim.ok_or_else(|| missing("dim"))?,
            signature: self.signature.clone().ok_or_else(|| missing("signature"))?,
            label: self.label.clone(),
            catalog: self.catalog.clone(),
            components: self.components.clone(),
            domain: self.domain.clone(),
            coordinates: self.coordinates.clone(),
            sample_points: self.sample_points.clone(),
        })
    }

    pub fn metric(&self) -> Result<(MetricDoc, MetricField)> {
        let doc = self.metric_doc()?;
        let m = load_metric(&doc)?;
        Ok((doc, m))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Sectional curvature when the metric is a constant-curvature catalog
/// entry.
pub fn known_curvature(m: &MetricField) -> Option<f64> {
    let Provenance::Catalog { name, params } = m.provenance() else {
        return None;
    };
    match name.as_str() {
        "euclidean" | "minkowski" => Some(0.0),
        "sphere_polar" => params.get("R").map(|r| 1.0 / (r * r)),
        "hyperbolic_polar" => params.get("K").copied().or_else(|| params.get("R").map(|r| -1.0 / (r * r))),
        "constant_curvature_stereographic" => params.get("K").copied(),
        _ => None,
    }
}

/// Conformal factor `ψ` with `G = e^{2ψ} η` for catalog entries written in
/// that form, as an expression string over `x1..xn`.
pub fn known_conformal_factor(m: &MetricField) -> Option<String> {
    let Provenance::Catalog { name, params } = m.provenance() else {
        return None;
    };
    let n = m.dim();
    let sig = m.signature();
    let quad = || {
        (0..n)
            .map(|i| format!("{}x{}^2", if sig.eta(i) < 0.0 { "-" } else { "+" }, i + 1))
            .collect::<String>()
    };
    match name.as_str() {
        "euclidean" | "minkowski" => Some("0".into()),
        "constant_curvature_stereographic" => {
            let k = params.get("K").copied().unwrap_or(1.0);
            Some(format!("-log(1 + ({k})*(0{})/4)", quad()))
        }
        "conformal_flat_generic" => {
            let a = params.get("a").copied().unwrap_or(0.3);
            let b = params.get("b").copied().unwrap_or(0.2);
            Some(format!("({a})*sin(x1) + ({b})*x1*x2"))
        }
        _ => None,
    }
}

/// Deterministic interior sample points: finite sides are shrunk by 10%,
/// half-open sides get a unit interval, free coordinates use `[−1, 1]`, and
/// a ball domain is sampled within half its radius.
pub fn sample_points(domain: &Domain, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let ranges: Vec<(f64, f64)> = domain
        .bounds
        .iter()
        .map(|&(lo, hi)| match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo)),
            (true, false) => (lo + 0.1, lo + 1.1),
            (false, true) => (hi - 1.1, hi - 0.1),
            (false, false) => (-1.0, 1.0),
        })
        .collect();
    let shrink = domain.radius.map(|r| 0.5 * r);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > 10_000 * count.max(1) {
            return Err(Error::InvalidArgument("could not sample interior points of the domain".into()));
        }
        let p: Vec<f64> = ranges.iter().map(|&(a, b)| rng.random_range(a..=b)).collect();
        if let Some(r) = shrink {
            if p.iter().map(|x| x * x).sum::<f64>().sqrt() >= r {
                continue;
            }
        }
        if domain.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH.iter().chain(&[Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), *s);
        }
        assert!("everything".parse::<Suite>().is_err());
        assert_eq!(Suite::All.expand().len(), 6);
    }

    #[test]
    fn inline_and_missing_metric() {
        let s = Scenario::parse(r#"{"dim": 2, "signature": [1, 1], "catalog": {"name": "sphere_polar"}, "suite": "normal-chart", "seed": 4}"#).unwrap();
        let (_, m) = s.metric().unwrap();
        assert_eq!(known_curvature(&m), Some(1.0));
        assert_eq!(s.suite, Suite::NormalChart);
        let bad = Scenario::parse(r#"{"suite": "curvature"}"#).unwrap();
        assert!(matches!(bad.metric_doc(), Err(Error::Config { .. })));
        assert!(matches!(Scenario::parse(r#"{"dim": 2, "bogus": 1}"#), Err(Error::Config { line: 1, .. })));
        assert!(Scenario::parse(r#"{"tolerance": -1}"#).is_err());
    }

    #[test]
    fn samples_are_interior_and_seeded() {
        let d = Domain { bounds: vec![(0.0, 3.0), (f64::NEG_INFINITY, f64::INFINITY)], radius: None };
        let a = sample_points(&d, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = sample_points(&d, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p[0] > 0.29 && p[0] < 2.71));
        let ball = Domain::ball(3, 2.0);
        let c = sample_points(&ball, 10, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(c.iter().all(|p| p.iter().map(|x| x * x).sum::<f64>() < 1.0));
    }
}
