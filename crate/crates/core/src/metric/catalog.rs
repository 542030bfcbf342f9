//! Built-in analytic metrics.

use std::f64::consts::PI;

use super::{Domain, MetricField, Params, Provenance, Signature};
use crate::error::{Error, Result};
use crate::expr::{Expr, Func};

/// Margin keeping polar charts away from their axes.
pub const POLAR_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// `(parameter, default-and-range description)`.
    pub parameters: &'static [(&'static str, &'static str)],
    pub summary: &'static str,
}

const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "euclidean",
        parameters: &[("n", "dimension >= 1, default 2")],
        summary: "identity metric",
    },
    CatalogEntry {
        name: "minkowski",
        parameters: &[("n", "dimension >= 2, default 2")],
        summary: "diag(-1, 1, ..., 1)",
    },
    CatalogEntry {
        name: "sphere_polar",
        parameters: &[("R", "radius > 0, default 1"), ("n", "dimension >= 2, default 2")],
        summary: "round sphere in hyperspherical angles (theta_1, ..., phi)",
    },
    CatalogEntry {
        name: "hyperbolic_polar",
        parameters: &[
            ("R", "radius > 0, default 1 (alternative to K)"),
            ("K", "curvature < 0 (alternative to R)"),
            ("n", "dimension >= 2, default 2"),
        ],
        summary: "hyperbolic space R^2 (dchi^2 + sinh^2 chi dOmega^2)",
    },
    CatalogEntry {
        name: "constant_curvature_stereographic",
        parameters: &[
            ("K", "curvature, any finite value, default 1"),
            ("n", "dimension >= 1, default 2"),
            ("n_minus", "negative entries of eta, 0 <= n_minus <= n, default 0"),
        ],
        summary: "(1 + K Omega.Omega / 4)^-2 eta",
    },
    CatalogEntry {
        name: "conformal_flat_generic",
        parameters: &[
            ("n", "dimension >= 2, default 4"),
            ("a", "default 0.3"),
            ("b", "default 0.2"),
            ("n_minus", "default 0"),
        ],
        summary: "exp(2 sigma) eta with sigma = a sin(x1) + b x1 x2",
    },
];

pub fn catalog_entries() -> &'static [CatalogEntry] {
    ENTRIES
}

struct Reader<'a> {
    entry: &'static CatalogEntry,
    params: &'a Params,
    resolved: Params,
}

impl Reader<'_> {
    fn real(&mut self, key: &str, default: Option<f64>) -> Result<Option<f64>> {
        let v = self.params.get(key).copied().or(default);
        if let Some(v) = v {
            if !v.is_finite() {
                return Err(range(key, v, "must be finite"));
            }
            self.resolved.insert(key.to_string(), v);
        }
        Ok(v)
    }

    fn count(&mut self, key: &str, default: usize, min: usize) -> Result<usize> {
        let v = self.real(key, Some(default as f64))?.unwrap();
        if v.fract() != 0.0 || v < min as f64 || v > 64.0 {
            return Err(range(key, v, &format!("must be an integer in [{min}, 64]")));
        }
        Ok(v as usize)
    }

    fn finish(self) -> Result<Params> {
        for k in self.params.keys() {
            if !self.entry.parameters.iter().any(|(p, _)| p == k) {
                return Err(Error::InvalidArgument(format!(
                    "unknown parameter `{k}` for catalog metric `{}`",
                    self.entry.name
                )));
            }
        }
        Ok(self.resolved)
    }
}

fn range(name: &str, value: f64, reason: &str) -> Error {
    Error::ParameterOutOfRange {
        name: name.to_string(),
        value,
        reason: reason.to_string(),
    }
}

fn c(v: f64) -> Expr {
    Expr::constant(v)
}

fn sq(e: Expr) -> Expr {
    e.pow(c(2.0))
}

fn diagonal(n: usize, mut entry: impl FnMut(usize) -> Expr) -> Vec<Expr> {
    (0..n * n)
        .map(|k| if k / n == k % n { entry(k / n) } else { c(0.0) })
        .collect()
}

/// `R² (1, f², f² sin²x2, f² sin²x2 sin²x3, ...)` with `f = S(x1)`.
fn polar(n: usize, radius: f64, first: Func) -> Vec<Expr> {
    let r2 = radius * radius;
    diagonal(n, |k| {
        let mut e = c(r2);
        for j in 0..k {
            let f = if j == 0 { first } else { Func::Sin };
            e = e * sq(Expr::call(f, Expr::var(j)));
        }
        e
    })
}

fn polar_domain(n: usize, first_lower: f64, first_upper: f64) -> Domain {
    let mut d = Domain::unbounded(n);
    d.bounds[0] = (first_lower, first_upper);
    for b in d.bounds.iter_mut().take(n - 1).skip(1) {
        *b = (POLAR_MARGIN, PI - POLAR_MARGIN);
    }
    d
}

/// Builds a catalog metric; unknown names and out-of-range parameters are
/// errors. Missing parameters take the documented defaults.
pub fn catalog_construct(name: &str, params: &Params) -> Result<MetricField> {
    let entry = ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownCatalog(name.to_string()))?;
    let mut rd = Reader {
        entry,
        params,
        resolved: Params::new(),
    };
    let (sig, comps, domain, label) = match name {
        "euclidean" => {
            let n = rd.count("n", 2, 1)?;
            let sig = Signature::riemannian(n);
            (sig, diagonal(n, |_| c(1.0)), Domain::unbounded(n), format!("euclidean({n})"))
        }
        "minkowski" => {
            let n = rd.count("n", 2, 2)?;
            let sig = Signature::lorentzian(n);
            (sig, diagonal(n, |a| c(sig.eta(a))), Domain::unbounded(n), format!("minkowski({n})"))
        }
        "sphere_polar" => {
            let r = rd.real("R", Some(1.0))?.unwrap();
            if r <= 0.0 {
                return Err(range("R", r, "radius must be positive"));
            }
            let n = rd.count("n", 2, 2)?;
            let domain = polar_domain(n, POLAR_MARGIN, PI - POLAR_MARGIN);
            (Signature::riemannian(n), polar(n, r, Func::Sin), domain, format!("sphere_polar(R={r}, n={n})"))
        }
        "hyperbolic_polar" => {
            let r = rd.params.get("R").copied();
            let k = rd.params.get("K").copied();
            let radius = match (r, k) {
                (Some(_), Some(_)) => {
                    return Err(Error::InvalidArgument(
                        "hyperbolic_polar takes R or K, not both".into(),
                    ))
                }
                (None, Some(_)) => {
                    let k = rd.real("K", None)?.unwrap();
                    if k >= 0.0 {
                        return Err(range("K", k, "curvature must be negative"));
                    }
                    1.0 / (-k).sqrt()
                }
                _ => {
                    let r = rd.real("R", Some(1.0))?.unwrap();
                    if r <= 0.0 {
                        return Err(range("R", r, "radius must be positive"));
                    }
                    r
                }
            };
            let n = rd.count("n", 2, 2)?;
            let domain = polar_domain(n, POLAR_MARGIN, f64::INFINITY);
            (
                Signature::riemannian(n),
                polar(n, radius, Func::Sinh),
                domain,
                format!("hyperbolic_polar(R={radius}, n={n})"),
            )
        }
        "constant_curvature_stereographic" => {
            let k = rd.real("K", Some(1.0))?.unwrap();
            let n = rd.count("n", 2, 1)?;
            let n_minus = rd.count("n_minus", 0, 0)?;
            if n_minus > n {
                return Err(range("n_minus", n_minus as f64, "must not exceed n"));
            }
            let sig = Signature::new(n_minus, n - n_minus)?;
            let comps = if k == 0.0 {
                diagonal(n, |a| c(sig.eta(a)))
            } else {
                let mut dot = c(0.0);
                for a in 0..n {
                    dot = dot + c(sig.eta(a)) * sq(Expr::var(a));
                }
                let factor = (c(1.0) + c(k / 4.0) * dot).pow(c(-2.0));
                diagonal(n, |a| c(sig.eta(a)) * factor.clone())
            };
            let domain = if k < 0.0 || (k != 0.0 && n_minus > 0) {
                Domain::ball(n, 2.0 / k.abs().sqrt())
            } else {
                Domain::unbounded(n)
            };
            (sig, comps, domain, format!("constant_curvature_stereographic(K={k}, n={n})"))
        }
        "conformal_flat_generic" => {
            let n = rd.count("n", 4, 2)?;
            let a = rd.real("a", Some(0.3))?.unwrap();
            let b = rd.real("b", Some(0.2))?.unwrap();
            let n_minus = rd.count("n_minus", 0, 0)?;
            if n_minus > n {
                return Err(range("n_minus", n_minus as f64, "must not exceed n"));
            }
            let sig = Signature::new(n_minus, n - n_minus)?;
            let sigma = c(a) * Expr::call(Func::Sin, Expr::var(0)) + c(b) * Expr::var(0) * Expr::var(1);
            let factor = Expr::call(Func::Exp, c(2.0) * sigma);
            let comps = diagonal(n, |i| c(sig.eta(i)) * factor.clone());
            (sig, comps, Domain::unbounded(n), format!("conformal_flat_generic(n={n}, a={a}, b={b})"))
        }
        _ => unreachable!(),
    };
    let resolved = rd.finish()?;
    Ok(MetricField::from_expressions(sig, comps, domain, label).with_provenance(Provenance::Catalog {
        name: name.to_string(),
        params: resolved,
    }))
}
