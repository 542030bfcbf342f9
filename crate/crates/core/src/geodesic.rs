//! Geodesics, normal-coordinate charts and conjugate points.
//!
//! The geodesic equation is integrated together with its variational
//! (Jacobi) system. The Jacobi matrix `Y(t)` with `Y(0) = 0`, `Y'(0) = E`
//! is the differential of the exponential map, used both for the
//! pulled-back metric and for conjugate-point monitoring.

use nalgebra::DMatrix;

use crate::curvature::{christoffel, connection_jet, frame_at_point, Frame};
use crate::diff::DifferentiationStrategy;
use crate::error::{Error, Result};
use crate::metric::{evaluate_metric, MetricField};
use crate::tensor::Tensor2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorSettings {
    /// Fixed RK4 steps per unit of affine parameter.
    pub steps_per_unit: usize,
    /// Use the adaptive Dormand–Prince pair with this local tolerance
    /// instead of fixed steps (plain geodesics only).
    pub adaptive_tol: Option<f64>,
    /// Refuse exp beyond the first conjugate point.
    pub monitor_conjugate: bool,
    pub strategy: DifferentiationStrategy,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            steps_per_unit: 1000,
            adaptive_tol: None,
            monitor_conjugate: true,
            strategy: DifferentiationStrategy::Auto,
        }
    }
}

impl IntegratorSettings {
    pub fn with_steps(steps_per_unit: usize) -> Self {
        Self {
            steps_per_unit,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSolution {
    pub samples: Vec<GeodesicSample>,
    /// `max |g(γ', γ') − g(γ'(0), γ'(0))|` over the samples.
    pub energy_drift: f64,
}

impl GeodesicSolution {
    pub fn end(&self) -> &GeodesicSample {
        self.samples.last().unwrap()
    }
}

fn as_exit(e: Error, t: f64) -> Error {
    match e {
        Error::OutsideDomain(_) | Error::StencilOutsideDomain(_) | Error::SingularMetric { .. } => {
            Error::DomainExit { t }
        }
        e => e,
    }
}

/// Flat state `[x, u, Y, Y']` with `k` Jacobi columns (`Y` row-major n×k).
struct Flow<'a> {
    m: &'a MetricField,
    n: usize,
    k: usize,
    d: DifferentiationStrategy,
}

impl Flow<'_> {
    fn rhs(&self, t: f64, s: &[f64]) -> Result<Vec<f64>> {
        let (n, k) = (self.n, self.k);
        let x = &s[..n];
        let u = &s[n..2 * n];
        let mut out = vec![0.0; s.len()];
        out[..n].copy_from_slice(u);
        let (gamma, dgamma) = if k == 0 {
            (christoffel(self.m, x, self.d).map_err(|e| as_exit(e, t))?, None)
        } else {
            let (g, dg) = connection_jet(self.m, x, self.d).map_err(|e| as_exit(e, t))?;
            (g, Some(dg))
        };
        for r in 0..n {
            let mut a = 0.0;
            for mu in 0..n {
                for l in 0..n {
                    a -= gamma[[r, mu, l]] * u[mu] * u[l];
                }
            }
            out[n + r] = a;
        }
        if let Some(dg) = dgamma {
            let y = &s[2 * n..2 * n + n * k];
            let yp = &s[2 * n + n * k..];
            let (oy, oyp) = out[2 * n..].split_at_mut(n * k);
            oy.copy_from_slice(yp);
            for r in 0..n {
                for c in 0..k {
                    let mut a = 0.0;
                    for mu in 0..n {
                        for l in 0..n {
                            let uu = u[mu] * u[l];
                            for sg in 0..n {
                                a -= dg[[r, mu, l, sg]] * y[sg * k + c] * uu;
                            }
                            a -= 2.0 * gamma[[r, mu, l]] * u[mu] * yp[l * k + c];
                        }
                    }
                    oyp[r * k + c] = a;
                }
            }
        }
        Ok(out)
    }

    fn rk4(&self, t: f64, s: &[f64], h: f64) -> Result<Vec<f64>> {
        let axpy = |a: &[f64], b: &[f64], c: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + c * y).collect() };
        let k1 = self.rhs(t, s)?;
        let k2 = self.rhs(t + 0.5 * h, &axpy(s, &k1, 0.5 * h))?;
        let k3 = self.rhs(t + 0.5 * h, &axpy(s, &k2, 0.5 * h))?;
        let k4 = self.rhs(t + h, &axpy(s, &k3, h))?;
        Ok((0..s.len())
            .map(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect())
    }

    /// One Dormand–Prince 5(4) step: (5th-order state, error estimate).
    fn dopri(&self, t: f64, s: &[f64], h: f64) -> Result<(Vec<f64>, f64)> {
        const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
        const A: [&[f64]; 6] = [
            &[1.0 / 5.0],
            &[3.0 / 40.0, 9.0 / 40.0],
            &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
            &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
            &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
            &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
        ];
        const E: [f64; 7] = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let mut ks = vec![self.rhs(t, s)?];
        for (i, row) in A.iter().enumerate() {
            let st: Vec<f64> = (0..s.len())
                .map(|j| s[j] + h * row.iter().zip(&ks).map(|(a, k)| a * k[j]).sum::<f64>())
                .collect();
            ks.push(self.rhs(t + C[i] * h, &st)?);
        }
        let next: Vec<f64> = (0..s.len())
            .map(|j| s[j] + h * A[5].iter().zip(&ks).map(|(a, k)| a * k[j]).sum::<f64>())
            .collect();
        let err = (0..s.len())
            .map(|j| (h * E.iter().zip(&ks).map(|(e, k)| e * k[j]).sum::<f64>()).abs() / (1.0 + next[j].abs()))
            .fold(0.0, f64::max);
        Ok((next, err))
    }
}

fn speed2(m: &MetricField, x: &[f64], v: &[f64]) -> Result<f64> {
    let g = evaluate_metric(m, x)?.g;
    Ok(g.indices().map(|[a, b]| g[[a, b]] * v[a] * v[b]).sum())
}

/// Integrates `γ'' = −Γ(γ', γ')` from `(p0, v0)` over `[0, t_end]`.
pub fn integrate_geodesic(
    m: &MetricField,
    p0: &[f64],
    v0: &[f64],
    t_end: f64,
    settings: &IntegratorSettings,
) -> Result<GeodesicSolution> {
    let n = m.dim();
    if v0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v0.len() });
    }
    if !(t_end >= 0.0) || !t_end.is_finite() || v0.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("t_end and v0 must be finite, t_end >= 0".into()));
    }
    evaluate_metric(m, p0)?;
    let flow = Flow { m, n, k: 0, d: settings.strategy };
    let e0 = speed2(m, p0, v0)?;
    let mut state: Vec<f64> = p0.iter().chain(v0).copied().collect();
    let mut samples = vec![GeodesicSample { t: 0.0, x: p0.to_vec(), v: v0.to_vec() }];
    let sample = |t: f64, s: &[f64]| GeodesicSample { t, x: s[..n].to_vec(), v: s[n..].to_vec() };
    match settings.adaptive_tol {
        None => {
            let steps = ((settings.steps_per_unit as f64 * t_end).ceil() as usize).max(1);
            let h = t_end / steps as f64;
            let stride = (steps / 1000).max(1);
            for i in 0..steps {
                let t = i as f64 * h;
                state = flow.rk4(t, &state, h)?;
                if (i + 1) % stride == 0 || i + 1 == steps {
                    samples.push(sample(t + h, &state));
                }
            }
        }
        Some(tol) => {
            let mut t = 0.0;
            let mut h = (t_end / 100.0).min(0.1);
            while t < t_end {
                h = h.min(t_end - t);
                if h < 1e-12 * t_end.max(1.0) {
                    return Err(Error::StepUnderflow { t });
                }
                let (next, err) = flow.dopri(t, &state, h)?;
                if err <= tol {
                    t += h;
                    state = next;
                    samples.push(sample(t, &state));
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
                h *= fac;
            }
        }
    }
    if samples.len() == 1 {
        samples.push(sample(t_end, &state));
    }
    let mut drift: f64 = 0.0;
    for s in &samples {
        drift = drift.max((speed2(m, &s.x, &s.v)? - e0).abs());
    }
    Ok(GeodesicSolution { samples, energy_drift: drift })
}

/// Differential of exp along a geodesic, sampled on the integration grid.
struct JacobiTrack {
    t: Vec<f64>,
    states: Vec<Vec<f64>>,
}

/// Scale-free degeneracy measures of `Y(t)`: `det(Y)/tⁿ` and
/// `σ_min(Y)/σ_max(Y)`.
fn degeneracy(n: usize, t: f64, s: &[f64]) -> (f64, f64) {
    let y = DMatrix::from_row_slice(n, n, &s[2 * n..2 * n + n * n]);
    let det = y.determinant() / t.powi(n as i32);
    let sv = y.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    (det, if hi > 0.0 { lo / hi } else { 0.0 })
}

const RATIO_CANDIDATE: f64 = 1e-3;
const RATIO_ACCEPT: f64 = 1e-6;

impl Flow<'_> {
    fn jacobi_track(&self, x0: &[f64], u0: &[f64], y0p: &Tensor2, t_end: f64, steps: usize) -> Result<JacobiTrack> {
        let n = self.n;
        let mut s: Vec<f64> = x0.iter().chain(u0).copied().collect();
        s.extend(std::iter::repeat_n(0.0, n * n));
        s.extend(y0p.as_slice());
        let h = t_end / steps as f64;
        let mut track = JacobiTrack { t: vec![0.0], states: vec![s.clone()] };
        for i in 0..steps {
            s = self.rk4(i as f64 * h, &s, h)?;
            track.t.push((i + 1) as f64 * h);
            track.states.push(s.clone());
        }
        Ok(track)
    }

    /// State at `t0 + tau` by one RK4 step from a stored grid state.
    fn at(&self, t0: f64, s0: &[f64], tau: f64) -> Result<Vec<f64>> {
        if tau == 0.0 {
            return Ok(s0.to_vec());
        }
        self.rk4(t0, s0, tau)
    }

    /// First conjugate parameter on the track, excluding `t = 0`.
    fn first_conjugate(&self, tr: &JacobiTrack) -> Result<Option<f64>> {
        let n = self.n;
        let vals: Vec<(f64, f64)> = tr
            .t
            .iter()
            .zip(&tr.states)
            .map(|(&t, s)| if t == 0.0 { (1.0, 1.0) } else { degeneracy(n, t, s) })
            .collect();
        for i in 1..vals.len() {
            // sign change of det(Y)/tⁿ
            if i >= 2 && vals[i - 1].0 * vals[i].0 < 0.0 {
                let (t0, s0) = (tr.t[i - 1], &tr.states[i - 1]);
                let (mut a, mut b) = (0.0, tr.t[i] - t0);
                let fa = vals[i - 1].0;
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    let fm = degeneracy(n, t0 + mid, &self.at(t0, s0, mid)?).0;
                    if fm * fa > 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                return Ok(Some(t0 + 0.5 * (a + b)));
            }
            // even-multiplicity zero: interior local minimum of the ratio
            if i >= 2 && i + 1 < vals.len() {
                let r = vals[i].1;
                if r < RATIO_CANDIDATE && r <= vals[i - 1].1 && r <= vals[i + 1].1 {
                    let (t0, s0) = (tr.t[i - 1], &tr.states[i - 1]);
                    let width = tr.t[i + 1] - t0;
                    let f = |tau: f64| -> Result<f64> { Ok(degeneracy(n, t0 + tau, &self.at(t0, s0, tau)?).1) };
                    let g = 0.5 * (5f64.sqrt() - 1.0);
                    let (mut a, mut b) = (0.0, width);
                    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
                    let (mut fc, mut fd) = (f(c)?, f(d)?);
                    for _ in 0..80 {
                        if fc < fd {
                            b = d;
                            d = c;
                            fd = fc;
                            c = b - g * (b - a);
                            fc = f(c)?;
                        } else {
                            a = c;
                            c = d;
                            fc = fd;
                            d = a + g * (b - a);
                            fd = f(d)?;
                        }
                    }
                    let tm = 0.5 * (a + b);
                    if f(tm)? < RATIO_ACCEPT {
                        return Ok(Some(t0 + tm));
                    }
                }
            }
        }
        Ok(None)
    }
}

/// Normal-coordinate chart at `origin`: frame vectors `e_(A)` map normal
/// coordinates `v^A` to initial coordinate velocities.
#[derive(Clone, Debug)]
pub struct NormalChart {
    pub metric: MetricField,
    pub origin: Vec<f64>,
    pub frame: Frame,
    pub settings: IntegratorSettings,
}

/// Endpoint of `exp(v)` and the differential `∂x/∂v^A` (coordinate rows,
/// frame columns).
#[derive(Clone, Debug)]
pub struct ExpResult {
    pub point: Vec<f64>,
    pub jacobian: Tensor2,
}

impl NormalChart {
    pub fn new(metric: MetricField, origin: &[f64], settings: IntegratorSettings) -> Result<Self> {
        let frame = frame_at_point(&metric, origin)?;
        Ok(Self { metric, origin: origin.to_vec(), frame, settings })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn flow(&self, k: usize) -> Flow<'_> {
        Flow { m: &self.metric, n: self.dim(), k, d: self.settings.strategy }
    }

    fn steps_for(&self, length: f64) -> usize {
        ((self.settings.steps_per_unit as f64 * length.max(1.0)).ceil() as usize).max(10)
    }

    /// `exp(v)` with its differential; refuses a conjugate point strictly
    /// before `t = 1` when monitoring is on.
    pub fn exp_with_jacobian(&self, v: &[f64]) -> Result<ExpResult> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(ExpResult {
                point: self.origin.clone(),
                jacobian: self.frame.inv.clone(),
            });
        }
        let u0 = self.frame.to_coords(v);
        let flow = self.flow(n);
        let track = flow.jacobi_track(&self.origin, &u0, &self.frame.inv, 1.0, self.steps_for(norm))?;
        if self.settings.monitor_conjugate {
            if let Some(tc) = flow.first_conjugate(&track)? {
                if tc < 1.0 - 1e-9 {
                    return Err(Error::ConjugatePoint { t: tc });
                }
            }
        }
        let last = track.states.last().unwrap();
        Ok(ExpResult {
            point: last[..n].to_vec(),
            jacobian: Tensor2::from_fn(n, |[r, c]| last[2 * n + r * n + c]),
        })
    }

    pub fn exp_map(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.exp_with_jacobian(v)?.point)
    }

    /// First conjugate parameter along the unit-frame-speed geodesic with
    /// initial frame direction `direction`, up to `t_max`.
    pub fn detect_conjugate(&self, direction: &[f64], t_max: f64) -> Result<Option<f64>> {
        let n = self.dim();
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !(t_max > 0.0) {
            return Err(Error::InvalidArgument("direction must be nonzero and t_max positive".into()));
        }
        let dir: Vec<f64> = direction.iter().map(|x| x / norm).collect();
        let u0 = self.frame.to_coords(&dir);
        let flow = self.flow(n);
        let track = flow.jacobi_track(&self.origin, &u0, &self.frame.inv, t_max, self.steps_for(t_max))?;
        flow.first_conjugate(&track)
    }

    /// Inverse of [`exp_map`](Self::exp_map) by damped Newton shooting.
    pub fn log_map(&self, q: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if q.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: q.len() });
        }
        const TOL: f64 = 1e-10;
        const MAX_ITER: usize = 50;
        let resid = |x: &[f64]| -> f64 { x.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() };
        if resid(&self.origin) < TOL {
            return Ok(vec![0.0; n]);
        }
        let diff: Vec<f64> = q.iter().zip(&self.origin).map(|(a, b)| 0.9 * (a - b)).collect();
        let mut v = self.frame.to_frame(&diff);
        let mut refused: Option<f64> = None;
        let mut cur = match self.exp_with_jacobian(&v) {
            Ok(x) => x,
            Err(Error::ConjugatePoint { t }) => {
                // shrink the start until it is inside the pre-conjugate ball
                v.iter_mut().for_each(|c| *c *= 0.5 * t);
                self.exp_with_jacobian(&v)?
            }
            Err(e) => return Err(e),
        };
        let mut r = resid(&cur.point);
        let mut iterations = 0;
        while r >= TOL && iterations < MAX_ITER {
            iterations += 1;
            let jac = DMatrix::from_fn(n, n, |i, j| cur.jacobian[[i, j]]);
            let f = DMatrix::from_iterator(n, 1, cur.point.iter().zip(q).map(|(a, b)| a - b));
            let Some(delta) = jac.lu().solve(&f) else {
                break;
            };
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = v.iter().zip(delta.iter()).map(|(a, d)| a - step * d).collect();
                match self.exp_with_jacobian(&trial) {
                    Ok(xt) => {
                        let rt = resid(&xt.point);
                        if rt < r {
                            v = trial;
                            cur = xt;
                            r = rt;
                            accepted = true;
                            break;
                        }
                    }
                    Err(Error::ConjugatePoint { t }) => {
                        let len = trial.iter().map(|c| c * c).sum::<f64>().sqrt();
                        refused = Some(t * len);
                    }
                    Err(Error::DomainExit { .. }) => {}
                    Err(e) => return Err(e),
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let distance = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        // the converged vector must also sit inside the pre-conjugate ball
        if distance > 0.0 {
            let probe = self.detect_conjugate(&v, distance * (1.0 + 1e-3));
            if let Ok(Some(tc)) = probe {
                return Err(Error::BeyondConjugate { conjugate: tc, distance });
            }
        }
        if r >= TOL {
            if let Some(tc) = refused {
                return Err(Error::BeyondConjugate { conjugate: tc, distance });
            }
            return Err(Error::NoConvergence { iterations, residual: r });
        }
        Ok(v)
    }

    /// Metric in normal coordinates, `G̃(v) = Jᵀ G(exp v) J`, with `J` the
    /// integrated differential of exp.
    pub fn pullback_metric_normal(&self, v: &[f64]) -> Result<Tensor2> {
        let n = self.dim();
        if v.iter().all(|&c| c == 0.0) {
            return Ok(self.frame.signature.eta_matrix());
        }
        let ex = self.exp_with_jacobian(v)?;
        let g = evaluate_metric(&self.metric, &ex.point).map_err(|e| as_exit(e, 1.0))?.g;
        let j = &ex.jacobian;
        Ok(Tensor2::from_fn(n, |[a, b]| {
            let mut s = 0.0;
            for r in 0..n {
                for c in 0..n {
                    s += j[[r, a]] * g[[r, c]] * j[[c, b]];
                }
            }
            s
        }))
    }
}

/// `max_A |(G̃(v) v)_A − (η v)_A|`, the Gauss-lemma residual.
pub fn gauss_lemma_residual(chart: &NormalChart, v: &[f64]) -> Result<f64> {
    let g = chart.pullback_metric_normal(v)?;
    let n = v.len();
    Ok((0..n)
        .map(|a| {
            let lhs: f64 = (0..n).map(|b| g[[a, b]] * v[b]).sum();
            (lhs - chart.frame.signature.eta(a) * v[a]).abs()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{catalog_construct, Params};
    use std::f64::consts::PI;

    fn cat(name: &str, kv: &[(&str, f64)]) -> MetricField {
        let p: Params = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        catalog_construct(name, &p).unwrap()
    }

    #[test]
    fn straight_lines_and_rest() {
        let e = cat("euclidean", &[]);
        let s = integrate_geodesic(&e, &[0.0, 0.0], &[1.0, 0.0], 3.0, &IntegratorSettings::default()).unwrap();
        assert!((s.end().x[0] - 3.0).abs() < 1e-12 && s.end().x[1] == 0.0);
        let s = integrate_geodesic(&e, &[0.5, 0.5], &[0.0, 0.0], 2.0, &IntegratorSettings::default()).unwrap();
        assert!(s.samples.iter().all(|x| x.x == vec![0.5, 0.5]));
        assert!(s.samples.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn great_circle_returns() {
        let s = cat("sphere_polar", &[]);
        let sol = integrate_geodesic(&s, &[PI / 2.0, 0.0], &[0.0, 1.0], 2.0 * PI, &IntegratorSettings::default()).unwrap();
        let end = &sol.end().x;
        assert!((end[0] - PI / 2.0).abs() < 1e-6);
        assert!((end[1] - 2.0 * PI).abs() < 1e-6);
        assert!(sol.energy_drift < 1e-8);
    }

    #[test]
    fn adaptive_pair_agrees_with_rk4() {
        let s = cat("sphere_polar", &[]);
        let st = IntegratorSettings { adaptive_tol: Some(1e-11), ..Default::default() };
        let a = integrate_geodesic(&s, &[1.0, 0.0], &[0.3, 0.8], 2.0, &st).unwrap();
        let b = integrate_geodesic(&s, &[1.0, 0.0], &[0.3, 0.8], 2.0, &IntegratorSettings::default()).unwrap();
        for k in 0..2 {
            assert!((a.end().x[k] - b.end().x[k]).abs() < 1e-8);
        }
        let under = IntegratorSettings { adaptive_tol: Some(1e-300), ..Default::default() };
        assert!(matches!(
            integrate_geodesic(&s, &[1.0, 0.0], &[0.3, 0.8], 2.0, &under),
            Err(Error::StepUnderflow { .. })
        ));
    }

    #[test]
    fn exp_and_log_on_flat_chart() {
        let e = cat("euclidean", &[]);
        let chart = NormalChart::new(e, &[1.0, -1.0], IntegratorSettings::default()).unwrap();
        assert_eq!(chart.exp_map(&[0.0, 0.0]).unwrap(), vec![1.0, -1.0]);
        let x = chart.exp_map(&[0.3, 0.4]).unwrap();
        assert!((x[0] - 1.3).abs() < 1e-13 && (x[1] + 0.6).abs() < 1e-13);
        let v = chart.log_map(&[2.0, 0.5]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-10 && (v[1] - 1.5).abs() < 1e-10);
        assert_eq!(chart.log_map(&[1.0, -1.0]).unwrap(), vec![0.0, 0.0]);
        let eye = Tensor2::from_fn(2, |[a, b]| (a == b) as u8 as f64);
        assert!(chart.pullback_metric_normal(&[0.4, 0.1]).unwrap().max_abs_diff(&eye) < 1e-12);
        assert_eq!(chart.detect_conjugate(&[1.0, 1.0], 10.0).unwrap(), None);
    }

    #[test]
    fn quarter_circle_arclength() {
        let s = cat("sphere_polar", &[]);
        let chart = NormalChart::new(s.clone(), &[PI / 2.0, 0.0], IntegratorSettings::default()).unwrap();
        let x = chart.exp_map(&[0.0, PI / 2.0]).unwrap();
        assert!((x[0] - PI / 2.0).abs() < 1e-9 && (x[1] - PI / 2.0).abs() < 1e-9);
        // arclength of the sampled path
        let sol = integrate_geodesic(&s, &[PI / 2.0, 0.0], &[0.0, PI / 2.0], 1.0, &IntegratorSettings::default()).unwrap();
        let len: f64 = sol
            .samples
            .windows(2)
            .map(|w| {
                let mid: Vec<f64> = (0..2).map(|k| 0.5 * (w[0].x[k] + w[1].x[k])).collect();
                let dx: Vec<f64> = (0..2).map(|k| w[1].x[k] - w[0].x[k]).collect();
                speed2(&s, &mid, &dx).unwrap().sqrt()
            })
            .sum();
        assert!((len - PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn conjugate_points() {
        let s = cat("sphere_polar", &[]);
        let chart = NormalChart::new(s, &[PI / 2.0, 0.0], IntegratorSettings::default()).unwrap();
        let t = chart.detect_conjugate(&[0.0, 1.0], 4.0).unwrap().unwrap();
        assert!((t - PI).abs() < 1e-4, "{t}");
        assert!(matches!(chart.exp_map(&[0.0, 3.5]), Err(Error::ConjugatePoint { .. })));
        let err = chart.log_map(&[PI / 2.0, PI]).unwrap_err();
        assert!(matches!(err, Error::BeyondConjugate { .. }), "{err:?}");

        let h = cat("hyperbolic_polar", &[("K", -1.0)]);
        let chart = NormalChart::new(h, &[1.0, 0.0], IntegratorSettings::default()).unwrap();
        assert_eq!(chart.detect_conjugate(&[1.0, 0.0], 10.0).unwrap(), None);
    }

    #[test]
    fn even_multiplicity_conjugate_point_on_three_sphere() {
        // both transverse Jacobi fields vanish together: no sign change
        let s = cat("sphere_polar", &[("n", 3.0)]);
        let chart = NormalChart::new(s, &[PI / 2.0, PI / 2.0, 0.0], IntegratorSettings::default()).unwrap();
        let t = chart.detect_conjugate(&[0.0, 0.0, 1.0], 4.0).unwrap().unwrap();
        assert!((t - PI).abs() < 1e-4, "{t}");
    }

    #[test]
    fn sphere_pullback_transverse_factor() {
        let m = cat("constant_curvature_stereographic", &[("K", 1.0)]);
        let chart = NormalChart::new(m, &[0.0, 0.0], IntegratorSettings::default()).unwrap();
        for r in [0.3, 1.0, 2.0] {
            let g = chart.pullback_metric_normal(&[r, 0.0]).unwrap();
            assert!((g[[0, 0]] - 1.0).abs() < 1e-9);
            assert!((g[[1, 1]] - r.sin().powi(2) / (r * r)).abs() < 1e-9, "r={r}");
            assert!(gauss_lemma_residual(&chart, &[r * 0.6, r * 0.8]).unwrap() < 1e-9);
        }
        let v = chart.log_map(&chart.exp_map(&[0.7, -1.2]).unwrap()).unwrap();
        assert!((v[0] - 0.7).abs() < 1e-9 && (v[1] + 1.2).abs() < 1e-9);
    }
}
