//! Null-cone embedding of conformally flat metrics into flat `n+2` space,
//! and quadric hypersurfaces `η(x, x) = εR²` in flat `n+1` space with their
//! conformal Killing fields.

use crate::diff::{stencil, DifferentiationStrategy, FdOrder};
use crate::error::{Error, Result};
use crate::metric::{ScalarField, Signature};
use crate::tensor::{invert, Tensor2};

/// Diagonal of the extended flat metric `(η, +1, −1)`.
pub fn extended_eta(signature: Signature) -> Vec<f64> {
    let mut e: Vec<f64> = (0..signature.dim()).map(|a| signature.eta(a)).collect();
    e.extend([1.0, -1.0]);
    e
}

fn diag_dot(eta: &[f64], u: &[f64], v: &[f64]) -> f64 {
    eta.iter().zip(u).zip(v).map(|((e, a), b)| e * a * b).sum()
}

/// `y = e^σ (z, z·z − ¼, z·z + ¼)`.
pub fn cone_embed(sigma: &ScalarField, signature: Signature, z: &[f64]) -> Result<Vec<f64>> {
    let n = signature.dim();
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: z.len() });
    }
    let s = sigma.eval(z);
    if !s.is_finite() {
        return Err(Error::OutsideDomain(z.to_vec()));
    }
    let e = s.exp();
    let zz = signature.dot(z, z);
    let mut y: Vec<f64> = z.iter().map(|x| e * x).collect();
    y.push(e * (zz - 0.25));
    y.push(e * (zz + 0.25));
    Ok(y)
}

/// `|η_bold(y, y)|`, relative to the Euclidean size of `y` when that
/// exceeds one.
pub fn null_residual(signature: Signature, y: &[f64]) -> f64 {
    let eta = extended_eta(signature);
    let scale = y.iter().map(|v| v * v).sum::<f64>().max(1.0);
    diag_dot(&eta, y, y).abs() / scale
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConePullback {
    /// `Jᵀ η_bold J`
    pub pullback: Tensor2,
    /// `e^{2σ} η`
    pub expected: Tensor2,
    pub residual: f64,
}

/// Pulls the extended flat metric back through `y(z)`, with `∂σ` taken by
/// the given strategy.
pub fn cone_pullback_check(
    sigma: &ScalarField,
    signature: Signature,
    z: &[f64],
    d: DifferentiationStrategy,
) -> Result<ConePullback> {
    let n = signature.dim();
    cone_embed(sigma, signature, z)?;
    let e = sigma.eval(z).exp();
    let jet = sigma.jet(z, 1, d, &|_| true)?;
    let ds: Vec<f64> = (0..n).map(|a| jet.d1(0, a)).collect();
    let zz = signature.dot(z, z);
    // J[a][b] = ∂y^a/∂z^b for the first n rows. The last two rows are
    // P ∓ Q with P_b = e(∂_bσ z·z + 2 z_b), Q_b = e ∂_bσ / 4, and their
    // (+1, −1) contribution collapses to −2(P_a Q_b + Q_a P_b).
    let j = Tensor2::from_fn(n, |[a, b]| e * (ds[b] * z[a] + if a == b { 1.0 } else { 0.0 }));
    let p: Vec<f64> = (0..n).map(|b| e * (ds[b] * zz + 2.0 * signature.eta(b) * z[b])).collect();
    let q: Vec<f64> = ds.iter().map(|d| e * d / 4.0).collect();
    let pullback = Tensor2::from_fn(n, |[a, b]| {
        (0..n).map(|r| signature.eta(r) * j[[r, a]] * j[[r, b]]).sum::<f64>() - 2.0 * (p[a] * q[b] + q[a] * p[b])
    });
    let expected = Tensor2::from_fn(n, |[a, b]| if a == b { e * e * signature.eta(a) } else { 0.0 });
    Ok(ConePullback {
        residual: pullback.max_abs_diff(&expected),
        pullback,
        expected,
    })
}

/// Constraint residual above which a point counts as off the surface.
pub const ON_SURFACE_TOL: f64 = 1e-10;

/// The quadric `{x : η(x, x) = εR²}` in flat `n+1` space, with unit normal
/// `N = x/R` (so `η(N, N) = ε`). Its curvature label is `K = ε/R²`.
#[derive(Clone, Debug, PartialEq)]
pub struct HypersurfaceModel {
    pub ambient: Signature,
    pub radius: f64,
    pub epsilon: f64,
}

impl HypersurfaceModel {
    /// `Sⁿ(R)` in Euclidean `n+1` space.
    pub fn sphere(n: usize, radius: f64) -> Result<Self> {
        Self::new(Signature::riemannian(n + 1), radius, 1.0)
    }

    /// Upper sheet `Hⁿ(R)` in Minkowski `n+1` space, `η = diag(−1, 1, …)`.
    pub fn hyperbolic(n: usize, radius: f64) -> Result<Self> {
        Self::new(Signature::lorentzian(n + 1), radius, -1.0)
    }

    pub fn new(ambient: Signature, radius: f64, epsilon: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::ParameterOutOfRange {
                name: "R".into(),
                value: radius,
                reason: "radius must be positive and finite".into(),
            });
        }
        if epsilon != 1.0 && epsilon != -1.0 {
            return Err(Error::InvalidArgument(format!("epsilon must be ±1, got {epsilon}")));
        }
        Ok(Self { ambient, radius, epsilon })
    }

    pub fn curvature(&self) -> f64 {
        self.epsilon / (self.radius * self.radius)
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim() - 1
    }

    /// `|η(x, x) − εR²| / R²`
    pub fn constraint_residual(&self, x: &[f64]) -> f64 {
        (self.ambient.dot(x, x) - self.epsilon * self.radius.powi(2)).abs() / self.radius.powi(2)
    }

    pub fn check_on(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.ambient.dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient.dim(), found: x.len() });
        }
        let r = self.constraint_residual(x);
        if !(r <= ON_SURFACE_TOL) {
            return Err(Error::OffSurface(r));
        }
        Ok(())
    }

    pub fn normal(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| v / self.radius).collect()
    }

    /// `C − ε⟨C, N⟩N`, the part of `C` tangent at `x`.
    pub fn project(&self, c: &[f64], x: &[f64]) -> Vec<f64> {
        let f = self.epsilon * self.ambient.dot(c, x) / self.radius.powi(2);
        c.iter().zip(x).map(|(c, x)| c - f * x).collect()
    }

    /// `λ_U = −ε⟨U, N⟩/R`, the conformal factor of `Ū` at `x`.
    pub fn lambda(&self, u: &[f64], x: &[f64]) -> f64 {
        -self.epsilon * self.ambient.dot(u, x) / self.radius.powi(2)
    }

    /// `[Ū, V̄](x) = ε(⟨U, x⟩V − ⟨V, x⟩U)/R²`
    pub fn commutator(&self, u: &[f64], v: &[f64], x: &[f64]) -> Vec<f64> {
        let f = self.epsilon / self.radius.powi(2);
        let (ux, vx) = (self.ambient.dot(u, x), self.ambient.dot(v, x));
        u.iter().zip(v).map(|(u, v)| f * (ux * v - vx * u)).collect()
    }
}

/// `C̄ = C − ε⟨C, N⟩N` after checking `x` lies on the surface.
pub fn surface_project(model: &HypersurfaceModel, c: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    model.check_on(x)?;
    if c.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: c.len() });
    }
    Ok(model.project(c, x))
}

/// Orthographic chart about `x0`: `x(s) = x0·√(1 − q(s)/(εR²)) + Σ s_i e_i`,
/// with `e_i` an η-orthonormal tangent basis and `q(s) = Σ η(e_i, e_i) s_i²`.
#[derive(Clone, Debug)]
pub struct OrthographicChart {
    pub model: HypersurfaceModel,
    pub x0: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
}

impl OrthographicChart {
    pub fn new(model: &HypersurfaceModel, x0: &[f64]) -> Result<Self> {
        model.check_on(x0)?;
        let amb = model.ambient;
        let mut cands: Vec<Vec<f64>> = (0..amb.dim())
            .map(|k| {
                let mut e = vec![0.0; amb.dim()];
                e[k] = 1.0;
                model.project(&e, x0)
            })
            .collect();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut norms = Vec::new();
        for _ in 0..model.dim() {
            let (idx, nn) = cands
                .iter()
                .enumerate()
                .map(|(i, c)| (i, amb.dot(c, c)))
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .unwrap();
            if nn.abs() < 1e-10 {
                return Err(Error::InvalidArgument("degenerate tangent space".into()));
            }
            let e: Vec<f64> = cands.swap_remove(idx).iter().map(|v| v / nn.abs().sqrt()).collect();
            let sign = nn.signum();
            for c in cands.iter_mut() {
                let f = amb.dot(c, &e) * sign;
                c.iter_mut().zip(&e).for_each(|(c, e)| *c -= f * e);
            }
            basis.push(e);
            norms.push(sign);
        }
        Ok(Self { model: model.clone(), x0: x0.to_vec(), basis, norms })
    }

    fn q(&self, s: &[f64]) -> f64 {
        s.iter().zip(&self.norms).map(|(s, n)| n * s * s).sum()
    }

    pub fn point(&self, s: &[f64]) -> Result<Vec<f64>> {
        let f = 1.0 - self.q(s) / (self.model.epsilon * self.model.radius.powi(2));
        if f <= 0.0 {
            return Err(Error::OutsideDomain(s.to_vec()));
        }
        let w = f.sqrt();
        let mut x: Vec<f64> = self.x0.iter().map(|v| w * v).collect();
        for (si, e) in s.iter().zip(&self.basis) {
            x.iter_mut().zip(e).for_each(|(x, e)| *x += si * e);
        }
        Ok(x)
    }

    /// Tangent vectors `∂x/∂s_i` as ambient vectors.
    pub fn tangents(&self, s: &[f64]) -> Result<Vec<Vec<f64>>> {
        let er2 = self.model.epsilon * self.model.radius.powi(2);
        let f = 1.0 - self.q(s) / er2;
        if f <= 0.0 {
            return Err(Error::OutsideDomain(s.to_vec()));
        }
        let w = f.sqrt();
        Ok((0..s.len())
            .map(|i| {
                let dw = -self.norms[i] * s[i] / (er2 * w);
                self.x0.iter().zip(&self.basis[i]).map(|(x, e)| dw * x + e).collect()
            })
            .collect())
    }

    pub fn induced_metric(&self, s: &[f64]) -> Result<Tensor2> {
        let t = self.tangents(s)?;
        Ok(Tensor2::from_fn(s.len(), |[i, j]| self.model.ambient.dot(&t[i], &t[j])))
    }

    /// Chart components of a tangent ambient vector `w` at `x(s)`.
    pub fn components(&self, s: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let t = self.tangents(s)?;
        let g = Tensor2::from_fn(s.len(), |[i, j]| self.model.ambient.dot(&t[i], &t[j]));
        let inv = invert(&g).ok_or(Error::SingularMetric { point: s.to_vec(), det: 0.0 })?;
        let proj: Vec<f64> = t.iter().map(|ti| self.model.ambient.dot(ti, w)).collect();
        Ok((0..s.len()).map(|i| (0..s.len()).map(|j| inv[[i, j]] * proj[j]).sum()).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LieDerivativeReport {
    /// `(L_ξ g')_{ij}` in the orthographic chart at `x`.
    pub lie: Tensor2,
    pub metric: Tensor2,
    /// `tr(g'^{-1} L) / 2n`
    pub lambda_fit: f64,
    pub lambda_expected: f64,
    /// `max |L − 2 λ_expected g'|`
    pub residual: f64,
}

/// Default chart step for the order-4 differences, relative to `R`.
pub const LIE_STEP: f64 = 1e-3;

/// Lie derivative of the induced metric along an ambient vector field,
/// projected to the surface, by order-4 central differences in the
/// orthographic chart at `x`.
pub fn lie_derivative_of_field(
    model: &HypersurfaceModel,
    x: &[f64],
    field: &dyn Fn(&[f64]) -> Vec<f64>,
    lambda_expected: f64,
    step: f64,
) -> Result<LieDerivativeReport> {
    let chart = OrthographicChart::new(model, x)?;
    let n = model.dim();
    let h = step * model.radius;
    let xi_at = |s: &[f64]| -> Result<Vec<f64>> {
        let p = chart.point(s)?;
        chart.components(s, &model.project(&field(&p), &p))
    };
    let (offs, wts) = stencil(1, FdOrder::Fourth);
    let mut dxi = Tensor2::<f64>::zeros(n); // [k, i] = ∂_i ξ^k
    let mut dg = vec![Tensor2::<f64>::zeros(n); n]; // dg[k] = ∂_k g'
    for i in 0..n {
        for (o, w) in offs.iter().zip(wts) {
            let mut s = vec![0.0; n];
            s[i] = o * h;
            let xi = xi_at(&s)?;
            let g = chart.induced_metric(&s)?;
            for k in 0..n {
                dxi[[k, i]] += w * xi[k] / h;
            }
            for [a, b] in g.indices().collect::<Vec<_>>() {
                dg[i][[a, b]] += w * g[[a, b]] / h;
            }
        }
    }
    let zero = vec![0.0; n];
    let xi = xi_at(&zero)?;
    let g = chart.induced_metric(&zero)?;
    let lie = Tensor2::from_fn(n, |[i, j]| {
        (0..n)
            .map(|k| xi[k] * dg[k][[i, j]] + g[[k, j]] * dxi[[k, i]] + g[[i, k]] * dxi[[k, j]])
            .sum::<f64>()
    });
    let inv = invert(&g).ok_or(Error::SingularMetric { point: x.to_vec(), det: 0.0 })?;
    let trace: f64 = lie.indices().map(|[i, j]| inv[[i, j]] * lie[[j, i]]).sum();
    let residual = lie.indices().map(|[i, j]| (lie[[i, j]] - 2.0 * lambda_expected * g[[i, j]]).abs()).fold(0.0, f64::max);
    Ok(LieDerivativeReport {
        lambda_fit: trace / (2.0 * n as f64),
        lambda_expected,
        residual,
        lie,
        metric: g,
    })
}

/// `L_Ū g' = 2 λ_U g'` for the projection `Ū` of a constant ambient `U`.
pub fn lie_derivative_check(model: &HypersurfaceModel, u: &[f64], x: &[f64]) -> Result<LieDerivativeReport> {
    model.check_on(x)?;
    if u.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: u.len() });
    }
    let uu = u.to_vec();
    lie_derivative_of_field(model, x, &move |_| uu.clone(), model.lambda(u, x), LIE_STEP)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorReport {
    /// `[Ū, V̄](x)` as an ambient vector.
    pub value: Vec<f64>,
    /// `|⟨[Ū, V̄], N⟩|`
    pub normal_component: f64,
    /// `max |L_{[Ū,V̄]} g'|` at `x`.
    pub killing_residual: f64,
}

pub fn projected_commutator(model: &HypersurfaceModel, u: &[f64], v: &[f64], x: &[f64]) -> Result<CommutatorReport> {
    model.check_on(x)?;
    if u.len() != x.len() || v.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: u.len().min(v.len()) });
    }
    let value = model.commutator(u, v, x);
    let normal_component = model.ambient.dot(&value, &model.normal(x)).abs();
    let (m, uu, vv) = (model.clone(), u.to_vec(), v.to_vec());
    let field = move |p: &[f64]| m.commutator(&uu, &vv, p);
    let lie = lie_derivative_of_field(model, x, &field, 0.0, LIE_STEP)?;
    Ok(CommutatorReport { value, normal_component, killing_residual: lie.lie.max_abs() })
}
