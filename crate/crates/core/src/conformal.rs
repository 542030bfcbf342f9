//! Angular-momentum functionals, Cartan's constant-curvature coefficient,
//! the conformal factor `σ`, the stereographic standard form, and the
//! curvature identities relating two conformally related metrics.

use crate::curvature::{conformal_laplacians, ricci_scalar};
use crate::diff::DifferentiationStrategy;
use crate::error::{Error, Result};
use crate::metric::{evaluate_metric, MetricField, ScalarField, Signature};
use crate::tensor::{Tensor2, Tensor3, Tensor4};

/// `L^{AB} = z^B ż^A − z^A ż^B`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularMomentum {
    pub l: Tensor2,
}

impl AngularMomentum {
    /// `Σ_{A<B} η_AA η_BB (L^{AB})²`
    pub fn sum_squares(&self, signature: Signature) -> f64 {
        let n = self.l.dim();
        let mut s = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                s += signature.eta(a) * signature.eta(b) * self.l[[a, b]].powi(2);
            }
        }
        s
    }
}

pub fn angular_momentum(z: &[f64], zdot: &[f64]) -> Result<AngularMomentum> {
    if z.len() != zdot.len() {
        return Err(Error::DimensionMismatch { expected: z.len(), found: zdot.len() });
    }
    Ok(AngularMomentum {
        l: Tensor2::from_fn(z.len(), |[a, b]| z[b] * zdot[a] - z[a] * zdot[b]),
    })
}

/// Below this `r√|K|` the coefficient comes from its power series.
pub const CARTAN_SERIES_SWITCH: f64 = 1e-3;

/// `x − sin x` (or `x − sinh x`), summed termwise for `x < 1` so the
/// cancellation does not eat the leading `x³/6`.
fn x_minus_s(x: f64, hyperbolic: bool) -> f64 {
    if x >= 1.0 {
        return if hyperbolic { x - x.sinh() } else { x - x.sin() };
    }
    let mut term = x * x * x / 6.0;
    let mut sum = 0.0f64;
    let mut k = 3.0;
    while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
        sum += term;
        term *= x * x / ((k + 1.0) * (k + 2.0));
        if !hyperbolic {
            term = -term;
        }
        k += 2.0;
    }
    if hyperbolic {
        -sum
    } else {
        sum
    }
}

/// `c(r) = (|K| r² − S²(r√|K|)) / (|K| r⁴)` with `S = sin` for `K > 0` and
/// `sinh` for `K < 0`. Returns 0 for `K = 0` (the flat limit) and `K/3` at
/// `r = 0`.
pub fn cartan_coefficient(k: f64, r: f64) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let x = r.abs() * k.abs().sqrt();
    if x < CARTAN_SERIES_SWITCH {
        let y = k * r * r;
        return k * (1.0 / 3.0 - 2.0 * y / 45.0 + y * y / 315.0 - 2.0 * y * y * y / 14175.0);
    }
    let s = if k > 0.0 { x.sin() } else { x.sinh() };
    x_minus_s(x, k < 0.0) * (x + s) / (k.abs() * r.powi(4))
}

/// Normal-form metric of constant curvature `K` at frame point `v`:
/// `G̃_AB = η_AB − c(r)(r² η_AB − v_A v_B)`, `r² = η(v, v)`.
pub fn normal_form_metric(k: f64, signature: Signature, v: &[f64]) -> Result<Tensor2> {
    let n = signature.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.len() });
    }
    let r2 = signature.dot(v, v);
    if r2 < 0.0 {
        return Err(Error::InvalidArgument(format!("normal form needs η(v, v) >= 0, got {r2}")));
    }
    let c = cartan_coefficient(k, r2.sqrt());
    let low: Vec<f64> = (0..n).map(|a| signature.eta(a) * v[a]).collect();
    Ok(Tensor2::from_fn(n, |[a, b]| {
        let eta = if a == b { signature.eta(a) } else { 0.0 };
        eta - c * (r2 * eta - low[a] * low[b])
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConformalFactorReport {
    pub sigma: f64,
    /// `exp(2σ)`
    pub factor: f64,
    /// `exp(−2σ) = 1 + c Σ L²`
    pub inverse_factor: f64,
    pub cartan: f64,
    pub l_squared: f64,
}

/// Constant-curvature conformal factor for a unit-speed curve with
/// angular momentum `l` at radius `r`.
pub fn conformal_factor(k: f64, r: f64, l: &AngularMomentum, signature: Signature) -> Result<ConformalFactorReport> {
    let c = cartan_coefficient(k, r);
    let l2 = l.sum_squares(signature);
    let inv = 1.0 + c * l2;
    if inv <= 0.0 || !inv.is_finite() {
        return Err(Error::NonPositiveFactor(inv));
    }
    Ok(ConformalFactorReport {
        sigma: -0.5 * inv.ln(),
        factor: 1.0 / inv,
        inverse_factor: inv,
        cartan: c,
        l_squared: l2,
    })
}

/// `exp(−2σ)` in the general form built from supplied `A`, `B` tensors,
/// with `ε_(B)` read as `η_(B)(B)`.
pub fn general_conformal_factor(signature: Signature, a: &Tensor3, b: &Tensor4, l: &AngularMomentum) -> f64 {
    let n = signature.dim();
    let mut s = 0.0;
    for [p, q, c, d] in b.indices() {
        let lp = l.l[[p, q]] * l.l[[c, d]];
        if lp == 0.0 {
            continue;
        }
        let aa: f64 = (0..n).map(|m| signature.eta(m) * a[[m, q, p]] * a[[m, c, d]]).sum();
        s += (0.5 * signature.eta(q) * b[[p, q, c, d]] + aa) * lp;
    }
    1.0 + 0.5 * s
}

/// Along a curve `s ↦ (v(s), v'(s))` in normal coordinates, compares
/// `exp(2σ) η(v', v')` with the normal-form `ds²`. Returns the largest
/// relative mismatch over `params`.
pub fn conformal_curve_check(
    k: f64,
    signature: Signature,
    curve: &dyn Fn(f64) -> (Vec<f64>, Vec<f64>),
    params: &[f64],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &s in params {
        let (v, dv) = curve(s);
        let g = normal_form_metric(k, signature, &v)?;
        let ds2: f64 = g.indices().map(|[a, b]| g[[a, b]] * dv[a] * dv[b]).sum();
        if ds2 <= 0.0 {
            return Err(Error::InvalidArgument(format!("curve is not spacelike at s = {s}")));
        }
        let speed = ds2.sqrt();
        let zdot: Vec<f64> = dv.iter().map(|x| x / speed).collect();
        let l = angular_momentum(&v, &zdot)?;
        let r = signature.dot(&v, &v).max(0.0).sqrt();
        let rep = conformal_factor(k, r, &l, signature)?;
        let lhs = rep.factor * signature.dot(&dv, &dv);
        worst = worst.max((lhs - ds2).abs() / ds2);
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StereographicPoint {
    pub omega: Vec<f64>,
    /// `∂Ω^i/∂v^j`
    pub jacobian: Tensor2,
    /// `max |Jᵀ g_Ω J − G̃(v)|` against the normal form.
    pub pullback_residual: f64,
}

/// Maps the normal-polar point `r·v̂` to `Ω = ρ(r) v̂` with
/// `ρ = (2/√|K|) tan(r√|K|/2)` (`tanh` for `K < 0`), in which the metric
/// reads `(1 + K Ω²/4)^{-2} dΩ²`.
pub fn stereographic_transform(k: f64, r: f64, direction: &[f64]) -> Result<StereographicPoint> {
    let n = direction.len();
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || r < 0.0 {
        return Err(Error::InvalidArgument("need r >= 0 and a nonzero direction".into()));
    }
    let u: Vec<f64> = direction.iter().map(|x| x / norm).collect();
    let sk = k.abs().sqrt();
    if k > 0.0 && r * sk >= std::f64::consts::PI {
        return Err(Error::StereographicBlowup(r * sk));
    }
    let half = 0.5 * r * sk;
    let (rho, drho) = if k > 0.0 {
        (2.0 / sk * half.tan(), 1.0 / half.cos().powi(2))
    } else if k < 0.0 {
        (2.0 / sk * half.tanh(), 1.0 / half.cosh().powi(2))
    } else {
        (r, 1.0)
    };
    // ρ/r → 1 as r → 0
    let ratio = if r == 0.0 { 1.0 } else { rho / r };
    let omega: Vec<f64> = u.iter().map(|x| rho * x).collect();
    let jacobian = Tensor2::from_fn(n, |[i, j]| {
        let id = if i == j { ratio } else { 0.0 };
        id + (drho - ratio) * u[i] * u[j]
    });
    let o2: f64 = omega.iter().map(|x| x * x).sum();
    let conf = (1.0 + k * o2 / 4.0).powi(-2);
    let pulled = Tensor2::from_fn(n, |[a, b]| conf * (0..n).map(|i| jacobian[[i, a]] * jacobian[[i, b]]).sum::<f64>());
    let v: Vec<f64> = u.iter().map(|x| r * x).collect();
    let want = normal_form_metric(k, Signature::riemannian(n), &v)?;
    Ok(StereographicPoint {
        omega,
        jacobian,
        pullback_residual: pulled.max_abs_diff(&want),
    })
}

/// Residuals of the curvature identities between `g` and `g' = e^{2ψ} g`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalRelationReport {
    /// `max |g' − e^{2ψ} g| / max |g'|`
    pub mismatch: f64,
    /// `ψ_{μν} = ψ_{;μν} − ψ_{,μ}ψ_{,ν}`
    pub psi_mn: Tensor2,
    pub delta1: f64,
    pub delta2: f64,
    /// General identity expressing `ψ_{μν}` through both Ricci tensors.
    pub residual_general: f64,
    /// Same identity with `R'_{μν} = (R'/n) g'_{μν}` substituted; present
    /// when `g'` is classified Einstein.
    pub residual_einstein: Option<f64>,
    pub einstein_prime: bool,
}

pub const CONFORMAL_MISMATCH_TOL: f64 = 1e-8;

pub fn conformal_relation_check(
    g: &MetricField,
    g_prime: &MetricField,
    psi: &ScalarField,
    p: &[f64],
    d: DifferentiationStrategy,
) -> Result<ConformalRelationReport> {
    let n = g.dim();
    if g_prime.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g_prime.dim() });
    }
    if n < 3 {
        return Err(Error::DimensionTooSmall { op: "conformal_relation_check", n, min: 3 });
    }
    let gv = evaluate_metric(g, p)?;
    let gpv = evaluate_metric(g_prime, p)?;
    let e2 = (2.0 * psi.eval(p)).exp();
    let mismatch = gv.g.indices().map(|[a, b]| (gpv.g[[a, b]] - e2 * gv.g[[a, b]]).abs()).fold(0.0, f64::max)
        / gpv.g.max_abs();
    if !(mismatch <= CONFORMAL_MISMATCH_TOL) {
        return Err(Error::NotConformallyRelated(mismatch));
    }
    let ops = conformal_laplacians(g, psi, p, d)?;
    let rc = ricci_scalar(g, p, d)?;
    let rp = ricci_scalar(g_prime, p, d)?;
    let nf = n as f64;
    let c1 = 1.0 / (nf - 2.0);
    let c2 = 1.0 / (2.0 * (nf - 1.0) * (nf - 2.0));
    let general = Tensor2::from_fn(n, |[a, b]| {
        c1 * (rp.ricci[[a, b]] - rc.ricci[[a, b]]) - c2 * (gpv.g[[a, b]] * rp.scalar - gv.g[[a, b]] * rc.scalar)
            - 0.5 * ops.delta1 * gv.g[[a, b]]
    });
    let einstein = Tensor2::from_fn(n, |[a, b]| {
        -c1 * rc.ricci[[a, b]]
            + c2 * gv.g[[a, b]] * rc.scalar
            + (c1 / nf - c2) * gpv.g[[a, b]] * rp.scalar
            - 0.5 * ops.delta1 * gv.g[[a, b]]
    });
    Ok(ConformalRelationReport {
        mismatch,
        residual_general: ops.psi_mn.max_abs_diff(&general),
        residual_einstein: rp.einstein.then(|| ops.psi_mn.max_abs_diff(&einstein)),
        einstein_prime: rp.einstein,
        psi_mn: ops.psi_mn,
        delta1: ops.delta1,
        delta2: ops.delta2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{catalog_construct, Params};
    use std::f64::consts::PI;

    #[test]
    fn angular_momentum_examples() {
        let l = angular_momentum(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(l.l[[0, 1]], -1.0);
        assert_eq!(l.l[[1, 0]], 1.0);
        let radial = angular_momentum(&[0.3, -0.2, 0.5], &[0.6, -0.4, 1.0]).unwrap();
        assert_eq!(radial.l.max_abs(), 0.0);
    }

    #[test]
    fn cartan_values_and_branch_continuity() {
        let direct = (PI * PI / 4.0 - 1.0) / (PI.powi(4) / 16.0);
        assert!((cartan_coefficient(1.0, PI / 2.0) - direct).abs() < 1e-15);
        assert!((direct - 0.24102901849440175).abs() < 1e-15);
        assert_eq!(cartan_coefficient(0.0, 0.7), 0.0);
        for k in [1.0, -1.0, 4.0, -0.25] {
            let rs = CARTAN_SERIES_SWITCH / f64::sqrt(f64::abs(k));
            let below = cartan_coefficient(k, rs * (1.0 - 1e-12));
            let above = cartan_coefficient(k, rs * (1.0 + 1e-12));
            assert!((below - above).abs() < 1e-12, "K={k}: {below} vs {above}");
            assert!((cartan_coefficient(k, 0.0) - k / 3.0).abs() < 1e-15);
        }
        // x² − sin²x = x⁴/3 − 2x⁶/45 + ...
        let x: f64 = 0.1;
        let series = 1.0 / 3.0 - 2.0 * x * x / 45.0 + x.powi(4) / 315.0 - 2.0 * x.powi(6) / 14175.0;
        assert!((cartan_coefficient(1.0, x) - series).abs() < 1e-12);
    }

    #[test]
    fn conformal_factor_examples() {
        let sig = Signature::riemannian(2);
        let l = angular_momentum(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
        let rep = conformal_factor(1.0, 1.0, &l, sig).unwrap();
        assert!((rep.inverse_factor - (1.0 + 1f64.cos().powi(2))).abs() < 1e-14);
        let zero = angular_momentum(&[0.0, 1.0], &[0.0, 2.0]).unwrap();
        assert_eq!(conformal_factor(1.0, 1.0, &zero, sig).unwrap().sigma, 0.0);
        assert_eq!(conformal_factor(0.0, 1.0, &l, sig).unwrap().factor, 1.0);
        let big = AngularMomentum { l: Tensor2::from_fn(2, |[a, b]| 10.0 * (b as f64 - a as f64)) };
        assert!(matches!(conformal_factor(-1.0, 3.0, &big, sig), Err(Error::NonPositiveFactor(_))));
    }

    #[test]
    fn curve_identity_holds() {
        let sig = Signature::riemannian(3);
        let curve = |s: f64| {
            (vec![0.3 + 0.2 * s, 0.5 * s.sin(), 0.1 * s * s], vec![0.2, 0.5 * s.cos(), 0.2 * s])
        };
        let params: Vec<f64> = (0..20).map(|i| 0.1 * i as f64).collect();
        for k in [1.0, -1.0, 0.5] {
            assert!(conformal_curve_check(k, sig, &curve, &params).unwrap() < 1e-12);
        }
    }

    #[test]
    fn stereographic_examples() {
        let p = stereographic_transform(1.0, PI / 2.0, &[1.0, 0.0]).unwrap();
        assert!((p.omega[0] - 2.0).abs() < 1e-15 && p.omega[1] == 0.0);
        let z = stereographic_transform(1.0, 0.0, &[0.0, 1.0]).unwrap();
        assert_eq!(z.omega, vec![0.0, 0.0]);
        assert!(z.pullback_residual < 1e-15);
        let flat = stereographic_transform(1e-12, 0.8, &[0.6, 0.8]).unwrap();
        assert!((flat.omega[0] - 0.48).abs() < 1e-9);
        assert!(matches!(stereographic_transform(1.0, PI, &[1.0, 0.0]), Err(Error::StereographicBlowup(_))));
        for k in [1.0, -1.0] {
            let p = stereographic_transform(k, 1.3, &[0.3, -0.4, 0.5]).unwrap();
            assert!(p.pullback_residual < 1e-13, "K={k}: {}", p.pullback_residual);
        }
    }

    fn flat3() -> MetricField {
        let p: Params = [("n".to_string(), 3.0)].into();
        catalog_construct("euclidean", &p).unwrap()
    }

    #[test]
    fn conformal_relation_identities() {
        let d = DifferentiationStrategy::DualForward;
        let g = flat3();
        let zero = ScalarField::constant(0.0);
        let rep = conformal_relation_check(&g, &g, &zero, &[0.1, 0.2, 0.3], d).unwrap();
        assert_eq!(rep.residual_general, 0.0);
        let p: Params = [("n".to_string(), 3.0), ("K".to_string(), 1.0)].into();
        let st = catalog_construct("constant_curvature_stereographic", &p).unwrap();
        let psi = ScalarField::parse("-log(1 + (x1^2 + x2^2 + x3^2)/4)", 3).unwrap();
        let rep = conformal_relation_check(&g, &st, &psi, &[0.3, -0.2, 0.4], d).unwrap();
        assert!(rep.einstein_prime);
        assert!(rep.residual_general < 1e-12, "{rep:?}");
        assert!(rep.residual_einstein.unwrap() < 1e-12);
        // non-conformal pair
        let other = ScalarField::parse("x1", 3).unwrap();
        assert!(matches!(
            conformal_relation_check(&g, &st, &other, &[0.3, -0.2, 0.4], d),
            Err(Error::NotConformallyRelated(_))
        ));
        let e2: Params = [("n".to_string(), 2.0)].into();
        let g2 = catalog_construct("euclidean", &e2).unwrap();
        assert!(matches!(
            conformal_relation_check(&g2, &g2, &zero, &[0.0, 0.0], d),
            Err(Error::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn general_form_reduces_to_one_without_tensors() {
        let sig = Signature::riemannian(3);
        let l = angular_momentum(&[0.1, 0.2, 0.3], &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(general_conformal_factor(sig, &Tensor3::zeros(3), &Tensor4::zeros(3), &l), 1.0);
    }
}
