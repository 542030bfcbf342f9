//! Normal tensors, the Taylor expansion of the metric in normal
//! coordinates, and the frame ODEs for the `A` and `B` tensors.

use crate::curvature::CurvatureBundle;
use crate::error::{Error, Result};
use crate::geodesic::NormalChart;
use crate::metric::Signature;
use crate::tensor::{Tensor2, Tensor3, Tensor4};

/// `D^ρ_{μλν} = (1/3)(R^ρ_{μλν} + R^ρ_{λμν})`, stored `[ρ, μ, λ, ν]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalTensorD {
    pub d: Tensor4,
}

impl NormalTensorD {
    /// `max |D^ρ_{μλν} − D^ρ_{λμν}|`
    pub fn symmetry_residual(&self) -> f64 {
        let d = &self.d;
        d.indices().map(|[r, m, l, v]| (d[[r, m, l, v]] - d[[r, l, m, v]]).abs()).fold(0.0, f64::max)
    }

    /// `max |D^ρ_{μλν} + D^ρ_{λνμ} + D^ρ_{νμλ}|`
    pub fn cyclic_residual(&self) -> f64 {
        let d = &self.d;
        d.indices()
            .map(|[r, m, l, v]| (d[[r, m, l, v]] + d[[r, l, v, m]] + d[[r, v, m, l]]).abs())
            .fold(0.0, f64::max)
    }

    /// `max |D^ρ_{μλν} − D^ρ_{μνλ} − R^ρ_{μλν}|`
    pub fn reconstruction_residual(&self, riemann_up: &Tensor4) -> f64 {
        let d = &self.d;
        d.indices()
            .map(|[r, m, l, v]| (d[[r, m, l, v]] - d[[r, m, v, l]] - riemann_up[[r, m, l, v]]).abs())
            .fold(0.0, f64::max)
    }
}

pub fn normal_tensor_d(bundle: &CurvatureBundle) -> NormalTensorD {
    let r = &bundle.riemann_up;
    NormalTensorD {
        d: Tensor4::from_fn(r.dim(), |[a, m, l, v]| (r[[a, m, l, v]] + r[[a, l, m, v]]) / 3.0),
    }
}

/// Predicted `G̃(v)` in both algebraic forms.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionPrediction {
    /// `η + (1/3) R_{AγBδ} vv [+ (1/6) R_{AγBδ;σ} vvv]`
    pub contracted: Tensor2,
    /// `η − (1/12)[R_{AγBδ} + ½ v^σ R_{AγBδ;σ}] (v^γ dv^A − v^A dv^γ)(v^B dv^δ − v^δ dv^B)`
    pub antisymmetrized: Tensor2,
}

/// Truncated normal-coordinate metric at frame vector `v`.
///
/// The bundle's frame components are used, so `v` is a normal coordinate
/// with `G̃(0) = η`. Order 3 requires `∇R` in the bundle.
pub fn metric_expansion(bundle: &CurvatureBundle, v: &[f64], order: u32) -> Result<ExpansionPrediction> {
    if order != 2 && order != 3 {
        return Err(Error::UnsupportedOrder(order));
    }
    let n = bundle.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.len() });
    }
    let r = bundle.riemann_frame();
    let nabla = if order == 3 {
        Some(bundle.nabla_riemann_frame().ok_or_else(|| {
            Error::InvalidArgument("order-3 expansion needs a bundle with nabla_riemann".into())
        })?)
    } else {
        None
    };
    // effective curvature T_{AγBδ} = R + ½ v^σ R_{;σ}
    let t = Tensor4::from_fn(n, |[a, c, b, d]| {
        let mut x = r[[a, c, b, d]];
        if let Some(nr) = &nabla {
            x += 0.5 * (0..n).map(|s| nr[[a, c, b, d, s]] * v[s]).sum::<f64>();
        }
        x
    });
    let eta = bundle.signature.eta_matrix();
    let contracted = Tensor2::from_fn(n, |[a, b]| {
        let mut s = 0.0;
        for c in 0..n {
            for d in 0..n {
                s += t[[a, c, b, d]] * v[c] * v[d];
            }
        }
        eta[[a, b]] + s / 3.0
    });
    // Expand the product of the two bivectors as a quadratic form in dv.
    // (v^γ dv^α − v^α dv^γ) contributes +v^γ at slot α and −v^α at slot γ.
    let mut q = Tensor2::<f64>::zeros(n);
    for al in 0..n {
        for ga in 0..n {
            for be in 0..n {
                for de in 0..n {
                    let coef = t[[al, ga, be, de]];
                    if coef == 0.0 {
                        continue;
                    }
                    // first factor: dv^α·v^γ − dv^γ·v^α ; second: dv^δ·v^β − dv^β·v^δ
                    let f1 = [(al, v[ga]), (ga, -v[al])];
                    let f2 = [(de, v[be]), (be, -v[de])];
                    for &(i, x) in &f1 {
                        for &(j, y) in &f2 {
                            let w = coef * x * y;
                            q[[i, j]] += 0.5 * w;
                            q[[j, i]] += 0.5 * w;
                        }
                    }
                }
            }
        }
    }
    let antisymmetrized = Tensor2::from_fn(n, |[a, b]| eta[[a, b]] - q[[a, b]] / 12.0);
    Ok(ExpansionPrediction { contracted, antisymmetrized })
}

/// Prediction versus integrated pullback along one ray.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionReport {
    pub order: u32,
    pub direction: Vec<f64>,
    pub radii: Vec<f64>,
    pub predicted: Vec<Tensor2>,
    pub measured: Vec<Tensor2>,
    /// Max-abs component residual per radius.
    pub residuals: Vec<f64>,
    /// Least-squares slope of `log residual` against `log r`.
    pub slope: f64,
    /// `max |contracted − antisymmetrized|` over the radii.
    pub form_agreement: f64,
}

pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Compares the truncated expansion with `pullback_metric_normal` at
/// `r · direction` for each radius. `bundle` must be taken at the chart
/// origin with the chart's frame.
pub fn expansion_study(
    chart: &NormalChart,
    bundle: &CurvatureBundle,
    direction: &[f64],
    radii: &[f64],
    order: u32,
) -> Result<ExpansionReport> {
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    let dir: Vec<f64> = direction.iter().map(|x| x / norm).collect();
    let mut report = ExpansionReport {
        order,
        direction: dir.clone(),
        radii: radii.to_vec(),
        predicted: vec![],
        measured: vec![],
        residuals: vec![],
        slope: f64::NAN,
        form_agreement: 0.0,
    };
    for &r in radii {
        let v: Vec<f64> = dir.iter().map(|x| r * x).collect();
        let pred = metric_expansion(bundle, &v, order)?;
        let meas = chart.pullback_metric_normal(&v)?;
        report.residuals.push(pred.contracted.max_abs_diff(&meas));
        report.form_agreement = report.form_agreement.max(pred.contracted.max_abs_diff(&pred.antisymmetrized));
        report.predicted.push(pred.contracted);
        report.measured.push(meas);
    }
    if radii.len() >= 2 && report.residuals.iter().all(|&x| x > 0.0) {
        report.slope = log_log_slope(radii, &report.residuals);
    }
    Ok(report)
}

/// Frame curvature as it enters the `A`/`B` equations for a space of
/// constant sectional curvature `K`: `K(η_AC η_BD − η_AD η_BC)`.
///
/// This is the negative of the library's Riemann convention; with it the
/// integrated hypersurface metric reproduces Cartan's closed form.
pub fn ode_curvature(signature: Signature, k: f64) -> Tensor4 {
    let eta = |a: usize, b: usize| if a == b { signature.eta(a) } else { 0.0 };
    Tensor4::from_fn(signature.dim(), |[a, b, c, d]| k * (eta(a, c) * eta(b, d) - eta(a, d) * eta(b, c)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameOdeSolution {
    pub signature: Signature,
    pub z: Vec<f64>,
    pub t: Vec<f64>,
    /// `A_{(A)(C)(D)}(t)` on the grid.
    pub a: Vec<Tensor3>,
    /// `B_{(A)(B)(C)(D)}(t)` when requested.
    pub b: Option<Vec<Tensor4>>,
    /// `max_t |A_{ACD} + A_{ADC}|`
    pub a_antisymmetry: f64,
}

/// Integrates the `A` equation (and optionally the `B` equation) for a
/// constant-curvature frame model with `A(0) = A'(0) = 0`, `B(0) = B'(0) = 0`,
/// along the hypersurface point `z`.
pub fn integrate_frame_ode(
    k: f64,
    signature: Signature,
    z: &[f64],
    t_end: f64,
    steps: usize,
    with_b: bool,
) -> Result<FrameOdeSolution> {
    if !k.is_finite() {
        return Err(Error::InvalidArgument(format!("curvature must be finite, got {k}")));
    }
    if steps < 10 {
        return Err(Error::InvalidArgument(format!("need at least 10 steps, got {steps}")));
    }
    let n = signature.dim();
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: z.len() });
    }
    let r = ode_curvature(signature, k);
    let eta = |a: usize| signature.eta(a);
    // S_A^P = z^L z^M R_{ALMN} η^{NP};  Q_{AB}^{PM} = z^L R_{ABLN} η^{NP} z^M
    let s = Tensor2::from_fn(n, |[a, p]| {
        let mut x = 0.0;
        for l in 0..n {
            for m in 0..n {
                x += z[l] * z[m] * r[[a, l, m, p]] * eta(p);
            }
        }
        x
    });
    let q = Tensor4::from_fn(n, |[a, b, p, m]| (0..n).map(|l| z[l] * r[[a, b, l, p]] * eta(p) * z[m]).sum::<f64>());
    let zr = Tensor3::from_fn(n, |[a, c, d]| (0..n).map(|b| z[b] * r[[a, b, c, d]]).sum::<f64>());
    let n3 = n * n * n;
    let n4 = n3 * n;
    let len = 2 * n3 + if with_b { 2 * n4 } else { 0 };
    let rhs = |t: f64, y: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; len];
        out[..n3].copy_from_slice(&y[n3..2 * n3]);
        for a in 0..n {
            for cd in 0..n * n {
                let mut x = t * zr.as_slice()[a * n * n + cd];
                for p in 0..n {
                    x += s[[a, p]] * y[p * n * n + cd];
                }
                out[n3 + a * n * n + cd] = x;
            }
        }
        if with_b {
            let (b0, b1) = (2 * n3, 2 * n3 + n4);
            out[b0..b1].copy_from_slice(&y[b1..]);
            for ab in 0..n * n {
                for cd in 0..n * n {
                    let mut x = t * r.as_slice()[ab * n * n + cd];
                    for pm in 0..n * n {
                        x += q.as_slice()[ab * n * n + pm] * y[b0 + pm * n * n + cd];
                    }
                    out[b1 + ab * n * n + cd] = x;
                }
            }
        }
        out
    };
    let h = t_end / steps as f64;
    let stride = (steps / 1000).max(1);
    let mut y = vec![0.0; len];
    let unpack_a = |y: &[f64]| Tensor3::from_fn(n, |[a, c, d]| y[(a * n + c) * n + d]);
    let unpack_b = |y: &[f64]| Tensor4::from_fn(n, |[a, b, c, d]| y[2 * n3 + ((a * n + b) * n + c) * n + d]);
    let mut sol = FrameOdeSolution {
        signature,
        z: z.to_vec(),
        t: vec![0.0],
        a: vec![unpack_a(&y)],
        b: with_b.then(|| vec![unpack_b(&y)]),
        a_antisymmetry: 0.0,
    };
    let axpy = |a: &[f64], b: &[f64], c: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + c * y).collect() };
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + 0.5 * h, &axpy(&y, &k1, 0.5 * h));
        let k3 = rhs(t + 0.5 * h, &axpy(&y, &k2, 0.5 * h));
        let k4 = rhs(t + h, &axpy(&y, &k3, h));
        for j in 0..len {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if (i + 1) % stride == 0 || i + 1 == steps {
            sol.t.push(if i + 1 == steps { t_end } else { t + h });
            sol.a.push(unpack_a(&y));
            if let Some(b) = sol.b.as_mut() {
                b.push(unpack_b(&y));
            }
        }
    }
    sol.a_antisymmetry = sol
        .a
        .iter()
        .flat_map(|a| a.indices().map(move |[x, c, d]| (a[[x, c, d]] + a[[x, d, c]]).abs()))
        .fold(0.0, f64::max);
    Ok(sol)
}

impl FrameOdeSolution {
    /// Hypersurface metric `h_CD = M^A_C η_AB M^B_D` at the last grid
    /// point, with `M^A_C = t δ^A_C + η^{AA} A_{ABC} z^B`.
    pub fn hypersurface_metric(&self) -> Tensor2 {
        let n = self.z.len();
        let t = *self.t.last().unwrap();
        let a = self.a.last().unwrap();
        let sig = self.signature;
        let m = Tensor2::from_fn(n, |[x, c]| {
            let d = if x == c { t } else { 0.0 };
            d + sig.eta(x) * (0..n).map(|b| a[[x, b, c]] * self.z[b]).sum::<f64>()
        });
        Tensor2::from_fn(n, |[c, d]| (0..n).map(|x| m[[x, c]] * sig.eta(x) * m[[x, d]]).sum())
    }

    /// `h(w, w)/η(w, w)` for a unit vector `w` η-orthogonal to `z`; this
    /// equals `1 − c(r) r²` for Cartan's coefficient `c`.
    pub fn transverse_coefficient(&self) -> Result<f64> {
        let n = self.z.len();
        let sig = self.signature;
        let zz = sig.dot(&self.z, &self.z);
        // Gram–Schmidt of a coordinate axis against z
        let w = (0..n)
            .map(|ax| {
                let mut w = vec![0.0; n];
                w[ax] = 1.0;
                if zz != 0.0 {
                    let c = sig.dot(&w, &self.z) / zz;
                    w.iter_mut().zip(&self.z).for_each(|(x, z)| *x -= c * z);
                }
                w
            })
            .max_by(|a, b| sig.dot(a, a).abs().total_cmp(&sig.dot(b, b).abs()))
            .filter(|w| sig.dot(w, w).abs() > 1e-12)
            .ok_or_else(|| Error::InvalidArgument("no transverse direction (n < 2)".into()))?;
        let h = self.hypersurface_metric();
        let hw: f64 = h.indices().map(|[c, d]| h[[c, d]] * w[c] * w[d]).sum();
        Ok(hw / sig.dot(&w, &w))
    }
}

/// Symmetry residuals of the `B` tensor and its consistency with `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct BSymmetryReport {
    /// `max_t |B_{ABCD} + B_{BACD}|`
    pub first_pair: f64,
    /// `max_t |B_{ABCD} + B_{ABDC}|`
    pub last_pair: f64,
    /// `max_t |A_{ACD} − z^B B_{ABCD}|`
    pub a_consistency: f64,
}

pub fn b_tensor_checks(sol: &FrameOdeSolution) -> Result<BSymmetryReport> {
    let bs = sol
        .b
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("solution was integrated without B".into()))?;
    let n = sol.z.len();
    let mut rep = BSymmetryReport { first_pair: 0.0, last_pair: 0.0, a_consistency: 0.0 };
    for (b, a) in bs.iter().zip(&sol.a) {
        for [p, q, c, d] in b.indices() {
            rep.first_pair = rep.first_pair.max((b[[p, q, c, d]] + b[[q, p, c, d]]).abs());
            rep.last_pair = rep.last_pair.max((b[[p, q, c, d]] + b[[p, q, d, c]]).abs());
        }
        for [x, c, d] in a.indices() {
            let zb: f64 = (0..n).map(|q| sol.z[q] * b[[x, q, c, d]]).sum();
            rep.a_consistency = rep.a_consistency.max((a[[x, c, d]] - zb).abs());
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::cartan_coefficient;
    use crate::curvature::constant_curvature_frame;

    fn cc_bundle(k: f64, n: usize) -> CurvatureBundle {
        let sig = Signature::riemannian(n);
        CurvatureBundle::from_frame_curvature(sig, constant_curvature_frame(sig, k), Some(crate::tensor::Tensor5::zeros(n)))
    }

    #[test]
    fn d_tensor_identities_on_constant_curvature() {
        let b = cc_bundle(2.0, 3);
        let d = normal_tensor_d(&b);
        assert!(d.symmetry_residual() < 1e-15);
        assert!(d.cyclic_residual() < 1e-12);
        assert!(d.reconstruction_residual(&b.riemann_up) < 1e-12);
        let flat = cc_bundle(0.0, 3);
        assert_eq!(normal_tensor_d(&flat).d.max_abs(), 0.0);
    }

    #[test]
    fn expansion_forms_agree_and_match_series() {
        let b = cc_bundle(1.0, 2);
        let v = [0.1, 0.0];
        let p = metric_expansion(&b, &v, 2).unwrap();
        assert!(p.contracted.max_abs_diff(&p.antisymmetrized) < 1e-15);
        let want = 1.0 - 0.01 / 3.0;
        assert!((p.contracted[[1, 1]] - want).abs() < 1e-15);
        assert!((p.contracted[[1, 1]] - (0.1f64.sin() / 0.1).powi(2)).abs() < 7e-6);
        assert_eq!(p.contracted[[0, 0]], 1.0);
        let p3 = metric_expansion(&b, &v, 3).unwrap();
        assert!(p3.contracted.max_abs_diff(&p.contracted) < 1e-15);
        assert!(matches!(metric_expansion(&b, &v, 4), Err(Error::UnsupportedOrder(4))));
        let flat = cc_bundle(0.0, 2);
        let z = metric_expansion(&flat, &[0.3, 0.2], 3).unwrap();
        assert_eq!(z.contracted, Signature::riemannian(2).eta_matrix());
    }

    #[test]
    fn frame_ode_matches_cartan() {
        let sig = Signature::riemannian(2);
        for (k, r) in [(1.0, 1.0), (-1.0, 1.0), (0.5, 0.5)] {
            let sol = integrate_frame_ode(k, sig, &[r, 0.0], 1.0, 10_000, false).unwrap();
            let want = 1.0 - cartan_coefficient(k, r) * r * r;
            assert!((sol.transverse_coefficient().unwrap() - want).abs() < 1e-10, "K={k}");
            assert!(sol.a_antisymmetry < 1e-15);
        }
        let flat = integrate_frame_ode(0.0, sig, &[1.0, 0.0], 1.0, 100, true).unwrap();
        assert!(flat.a.iter().all(|a| a.max_abs() == 0.0));
        assert!(integrate_frame_ode(1.0, sig, &[1.0, 0.0], 1.0, 9, false).is_err());
        assert!(integrate_frame_ode(f64::NAN, sig, &[1.0, 0.0], 1.0, 100, false).is_err());
    }

    #[test]
    fn b_tensor_symmetries_and_fault_detection() {
        let sig = Signature::riemannian(3);
        let mut sol = integrate_frame_ode(1.0, sig, &[0.6, 0.3, -0.2], 1.0, 2000, true).unwrap();
        let rep = b_tensor_checks(&sol).unwrap();
        assert!(rep.first_pair < 1e-12 && rep.last_pair < 1e-12, "{rep:?}");
        assert!(rep.a_consistency < 1e-10, "{rep:?}");
        let b = sol.b.as_mut().unwrap().last_mut().unwrap();
        b[[0, 1, 0, 2]] += 1e-3;
        let rep = b_tensor_checks(&sol).unwrap();
        assert!((rep.first_pair - 1e-3).abs() < 1e-9);
        assert!((rep.last_pair - 1e-3).abs() < 1e-9);
    }
}
