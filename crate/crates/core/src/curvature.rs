//! Pointwise curvature: Christoffel symbols, Riemann/Ricci/scalar,
//! covariant derivative of Riemann, Weyl tensor, frames and the conformal
//! operators `Δ1`, `Δ2`, `ψ_{μν}`.
//!
//! Sign convention (see `docs/conventions.md`):
//! `R^ρ_{μλν} = ∂_ν Γ^ρ_{μλ} − ∂_λ Γ^ρ_{μν} + Γ^σ_{μλ} Γ^ρ_{σν} − Γ^σ_{μν} Γ^ρ_{σλ}`,
//! `R_{μν} = R^ρ_{μρν}`. The unit sphere has `R_{θφθφ} = −sin²θ` and scalar
//! curvature `−2`.

use nalgebra::SymmetricEigen;

use crate::diff::{DifferentiationStrategy, Jet};
use crate::dual::{Dual, Real};
use crate::error::{Error, Result};
use crate::metric::{evaluate_metric, MetricField, ScalarField, Signature};
use crate::tensor::{invert, Tensor2, Tensor3, Tensor4, Tensor5};

/// Metric components and their first two partials, `dg[[i, j, a]] = ∂_a g_ij`.
#[derive(Clone, Debug)]
pub struct MetricJet<T> {
    pub g: Tensor2<T>,
    pub dg: Tensor3<T>,
    pub ddg: Tensor4<T>,
}

impl MetricJet<f64> {
    pub fn from_jet(j: &Jet) -> Self {
        let n = j.n;
        Self {
            g: Tensor2::from_fn(n, |[i, k]| j.value(i * n + k)),
            dg: Tensor3::from_fn(n, |[i, k, a]| j.d1(i * n + k, a)),
            ddg: Tensor4::from_fn(n, |[i, k, a, b]| j.d2(i * n + k, a, b)),
        }
    }

    /// Directional derivative along coordinate `s` carried in the dual part.
    fn along(j: &Jet, s: usize) -> MetricJet<Dual<f64>> {
        let n = j.n;
        MetricJet {
            g: Tensor2::from_fn(n, |[i, k]| Dual::new(j.value(i * n + k), j.d1(i * n + k, s))),
            dg: Tensor3::from_fn(n, |[i, k, a]| Dual::new(j.d1(i * n + k, a), j.d2(i * n + k, a, s))),
            ddg: Tensor4::from_fn(n, |[i, k, a, b]| {
                Dual::new(j.d2(i * n + k, a, b), j.d3(i * n + k, a, b, s))
            }),
        }
    }
}

/// Connection and curvature computed from a [`MetricJet`].
#[derive(Clone, Debug)]
pub struct Geometry<T> {
    pub inv: Tensor2<T>,
    /// `Γ^ρ_{μλ}` stored `[ρ, μ, λ]`.
    pub christoffel: Tensor3<T>,
    /// `R_{ρμλν}`.
    pub riemann_lower: Tensor4<T>,
}

/// Inverse metric, first-kind `Γ_{σμλ}` and `Γ^ρ_{μλ}` from `g` and `∂g`.
pub fn connection<T: Real>(g: &Tensor2<T>, dg: &Tensor3<T>) -> Option<(Tensor2<T>, Tensor3<T>, Tensor3<T>)> {
    let n = g.dim();
    let inv = invert(g)?;
    let half = T::from_f64(0.5);
    let g1 = Tensor3::from_fn(n, |[s, m, l]| half * (dg[[s, l, m]] + dg[[s, m, l]] - dg[[m, l, s]]));
    let gamma = Tensor3::from_fn(n, |[r, m, l]| {
        (0..n).fold(T::zero(), |acc, s| acc + inv[[r, s]] * g1[[s, m, l]])
    });
    Some((inv, g1, gamma))
}

/// Connection and lowered Riemann tensor for any scalar type.
pub fn geometry<T: Real>(j: &MetricJet<T>) -> Option<Geometry<T>> {
    let n = j.g.dim();
    let (inv, g1, gamma) = connection(&j.g, &j.dg)?;
    let half = T::from_f64(0.5);
    // ∂_ν Γ_{σμλ}
    let dg1 = |s: usize, m: usize, l: usize, v: usize| {
        half * (j.ddg[[s, l, m, v]] + j.ddg[[s, m, l, v]] - j.ddg[[m, l, s, v]])
    };
    let riemann_lower = Tensor4::from_fn(n, |[r, m, l, v]| {
        let mut acc = dg1(r, m, l, v) - dg1(r, m, v, l);
        for a in 0..n {
            acc = acc - j.dg[[r, a, v]] * gamma[[a, m, l]] + j.dg[[r, a, l]] * gamma[[a, m, v]];
            acc = acc + gamma[[a, m, l]] * g1[[r, a, v]] - gamma[[a, m, v]] * g1[[r, a, l]];
        }
        acc
    });
    Some(Geometry {
        inv,
        christoffel: gamma,
        riemann_lower,
    })
}

fn metric_jet(m: &MetricField, p: &[f64], order: usize, d: DifferentiationStrategy) -> Result<Jet> {
    evaluate_metric(m, p)?;
    m.jet(p, order, d)
}

fn singular(p: &[f64]) -> Error {
    Error::SingularMetric {
        point: p.to_vec(),
        det: 0.0,
    }
}

pub fn christoffel(m: &MetricField, p: &[f64], d: DifferentiationStrategy) -> Result<Tensor3> {
    let j = metric_jet(m, p, 1, d)?;
    let n = m.dim();
    let mj = MetricJet {
        g: Tensor2::from_fn(n, |[i, k]| j.value(i * n + k)),
        dg: Tensor3::from_fn(n, |[i, k, a]| j.d1(i * n + k, a)),
        ddg: Tensor4::zeros(n),
    };
    Ok(geometry(&mj).ok_or_else(|| singular(p))?.christoffel)
}

/// `Γ^ρ_{μλ}` and its partials `∂_σ Γ^ρ_{μλ}` stored `[ρ, μ, λ, σ]`.
pub fn connection_jet(m: &MetricField, p: &[f64], d: DifferentiationStrategy) -> Result<(Tensor3, Tensor4)> {
    let j = m.jet(p, 2, d)?;
    let n = m.dim();
    let (_, _, gamma) = connection(
        &Tensor2::from_fn(n, |[i, k]| j.value(i * n + k)),
        &Tensor3::from_fn(n, |[i, k, a]| j.d1(i * n + k, a)),
    )
    .ok_or_else(|| singular(p))?;
    let mut dgamma = Tensor4::zeros(n);
    for s in 0..n {
        let g = Tensor2::from_fn(n, |[i, k]| Dual::new(j.value(i * n + k), j.d1(i * n + k, s)));
        let dg = Tensor3::from_fn(n, |[i, k, a]| Dual::new(j.d1(i * n + k, a), j.d2(i * n + k, a, s)));
        let (_, _, gd) = connection(&g, &dg).ok_or_else(|| singular(p))?;
        for [r, mu, l] in gd.indices().collect::<Vec<_>>() {
            dgamma[[r, mu, l, s]] = gd[[r, mu, l]].eps;
        }
    }
    Ok((gamma, dgamma))
}

/// `max |∂_μ G_{λπ} − Γ^ρ_{μλ} G_{ρπ} − Γ^ρ_{μπ} G_{λρ}|` with `Γ` from
/// strategy `d` and `∂G` from strategy `reference`.
pub fn compatibility_residual(
    m: &MetricField,
    p: &[f64],
    d: DifferentiationStrategy,
    reference: DifferentiationStrategy,
) -> Result<f64> {
    let gamma = christoffel(m, p, d)?;
    let j = metric_jet(m, p, 1, reference)?;
    let n = m.dim();
    let g = |a: usize, b: usize| j.value(a * n + b);
    let mut worst: f64 = 0.0;
    for mu in 0..n {
        for l in 0..n {
            for pi in 0..n {
                let rebuilt: f64 = (0..n)
                    .map(|r| gamma[[r, mu, l]] * g(r, pi) + gamma[[r, mu, pi]] * g(l, r))
                    .sum();
                worst = worst.max((j.d1(l * n + pi, mu) - rebuilt).abs());
            }
        }
    }
    Ok(worst)
}

/// Raises the first index: `R^ρ_{μλν} = G^{ρα} R_{αμλν}`.
pub fn raise_first(inv: &Tensor2, low: &Tensor4) -> Tensor4 {
    let n = inv.dim();
    Tensor4::from_fn(n, |[r, m, l, v]| (0..n).map(|a| inv[[r, a]] * low[[a, m, l, v]]).sum())
}

/// `(R^ρ_{μλν}, R_{ρμλν})`.
pub fn riemann(m: &MetricField, p: &[f64], d: DifferentiationStrategy) -> Result<(Tensor4, Tensor4)> {
    let j = metric_jet(m, p, 2, d)?;
    let geo = geometry(&MetricJet::from_jet(&j)).ok_or_else(|| singular(p))?;
    Ok((raise_first(&geo.inv, &geo.riemann_lower), geo.riemann_lower))
}

pub fn ricci_from_riemann(inv: &Tensor2, low: &Tensor4) -> (Tensor2, f64) {
    let n = inv.dim();
    // R_{μν} = R^ρ_{μρν} = G^{ρα} R_{αμρν}
    let ricci = Tensor2::from_fn(n, |[m, v]| {
        let mut s = 0.0;
        for r in 0..n {
            for a in 0..n {
                s += inv[[r, a]] * low[[a, m, r, v]];
            }
        }
        s
    });
    let scalar = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| inv[[a, b]] * ricci[[a, b]])
        .sum();
    (ricci, scalar)
}

/// Ricci tensor, scalar curvature and the two classification flags.
#[derive(Clone, Debug, PartialEq)]
pub struct RicciReport {
    pub ricci: Tensor2,
    pub scalar: f64,
    /// `max |R_{μν} − (R/n) G_{μν}|`
    pub einstein_residual: f64,
    pub einstein: bool,
    /// `K = −R / (n(n−1))`, the sectional curvature of the best
    /// constant-curvature fit.
    pub fitted_curvature: f64,
    /// `max |R_{abcd} − K (G_ad G_bc − G_ac G_bd)|`
    pub constant_curvature_residual: f64,
    pub constant_curvature: bool,
}

pub fn classify(g: &Tensor2, inv: &Tensor2, low: &Tensor4, tol: f64) -> RicciReport {
    let n = g.dim();
    let (ricci, scalar) = ricci_from_riemann(inv, low);
    let einstein_residual = ricci
        .indices()
        .map(|[a, b]| (ricci[[a, b]] - scalar / n as f64 * g[[a, b]]).abs())
        .fold(0.0, f64::max);
    let k = if n > 1 { -scalar / (n * (n - 1)) as f64 } else { 0.0 };
    let constant_curvature_residual = low
        .indices()
        .map(|[a, b, c, e]| (low[[a, b, c, e]] - k * (g[[a, e]] * g[[b, c]] - g[[a, c]] * g[[b, e]])).abs())
        .fold(0.0, f64::max);
    RicciReport {
        ricci,
        scalar,
        einstein_residual,
        einstein: einstein_residual < tol,
        fitted_curvature: k,
        constant_curvature_residual,
        constant_curvature: constant_curvature_residual < tol,
    }
}

/// Ricci data with flags decided at `10 · tol(d)`.
pub fn ricci_scalar(m: &MetricField, p: &[f64], d: DifferentiationStrategy) -> Result<RicciReport> {
    let j = metric_jet(m, p, 2, d)?;
    let mj = MetricJet::from_jet(&j);
    let geo = geometry(&mj).ok_or_else(|| singular(p))?;
    Ok(classify(&mj.g, &geo.inv, &geo.riemann_lower, 10.0 * d.tolerance()))
}

fn nabla_from_jet(j: &Jet, p: &[f64]) -> Result<(Geometry<f64>, Tensor5)> {
    let n = j.n;
    let geo = geometry(&MetricJet::from_jet(j)).ok_or_else(|| singular(p))?;
    let (gam, r) = (&geo.christoffel, &geo.riemann_lower);
    let mut out = Tensor5::zeros(n);
    for s in 0..n {
        let dual = geometry(&MetricJet::along(j, s)).ok_or_else(|| singular(p))?;
        for [a, c, b, e] in r.indices().collect::<Vec<_>>() {
            let mut v = dual.riemann_lower[[a, c, b, e]].eps;
            for l in 0..n {
                v -= gam[[l, s, a]] * r[[l, c, b, e]]
                    + gam[[l, s, c]] * r[[a, l, b, e]]
                    + gam[[l, s, b]] * r[[a, c, l, e]]
                    + gam[[l, s, e]] * r[[a, c, b, l]];
            }
            out[[a, c, b, e, s]] = v;
        }
    }
    Ok((geo, out))
}

/// `R_{αγβδ;σ}` stored `[α, γ, β, δ, σ]`.
pub fn nabla_riemann(m: &MetricField, p: &[f64], d: DifferentiationStrategy) -> Result<Tensor5> {
    let j = metric_jet(m, p, 3, d)?;
    Ok(nabla_from_jet(&j, p)?.1)
}

pub fn weyl_from(g: &Tensor2, inv: &Tensor2, low: &Tensor4) -> Tensor4 {
    let n = g.dim() as f64;
    let (ric, s) = ricci_from_riemann(inv, low);
    Tensor4::from_fn(g.dim(), |[a, b, c, d]| {
        low[[a, b, c, d]]
            - (g[[a, c]] * ric[[b, d]] - g[[a, d]] * ric[[b, c]] - g[[b, c]] * ric[[a, d]]
                + g[[b, d]] * ric[[a, c]])
                / (n - 2.0)
            + s / ((n - 1.0) * (n - 2.0)) * (g[[a, c]] * g[[b, d]] - g[[a, d]] * g[[b, c]])
    })
}

/// Weyl tensor `C_{ρμλν}`; needs `n >= 3`.
pub fn weyl(m: &MetricField, p: &[f64], d: DifferentiationStrategy) -> Result<Tensor4> {
    if m.dim() < 3 {
        return Err(Error::DimensionTooSmall {
            op: "weyl",
            n: m.dim(),
            min: 3,
        });
    }
    let j = metric_jet(m, p, 2, d)?;
    let mj = MetricJet::from_jet(&j);
    let geo = geometry(&mj).ok_or_else(|| singular(p))?;
    Ok(weyl_from(&mj.g, &geo.inv, &geo.riemann_lower))
}

/// `(Δ1ψ, Δ2ψ, ψ_{μν})` with `ψ_{μν} = ψ_{;μν} − ψ_{,μ} ψ_{,ν}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalOperators {
    pub delta1: f64,
    pub delta2: f64,
    pub psi_mn: Tensor2,
    pub gradient: Vec<f64>,
    pub hessian: Tensor2,
}

pub fn conformal_laplacians(
    m: &MetricField,
    psi: &ScalarField,
    p: &[f64],
    d: DifferentiationStrategy,
) -> Result<ConformalOperators> {
    let n = m.dim();
    let v = evaluate_metric(m, p)?;
    let gamma = christoffel(m, p, d)?;
    let s = psi.jet(p, 2, d, &|q| m.domain().contains(q))?;
    let gradient: Vec<f64> = (0..n).map(|a| s.d1(0, a)).collect();
    let hessian = Tensor2::from_fn(n, |[a, b]| {
        s.d2(0, a, b) - (0..n).map(|r| gamma[[r, a, b]] * gradient[r]).sum::<f64>()
    });
    let psi_mn = Tensor2::from_fn(n, |[a, b]| hessian[[a, b]] - gradient[a] * gradient[b]);
    let contract = |t: &dyn Fn(usize, usize) -> f64| -> f64 {
        hessian.indices().map(|[a, b]| v.inv[[a, b]] * t(a, b)).sum()
    };
    Ok(ConformalOperators {
        delta1: contract(&|a, b| gradient[a] * gradient[b]),
        delta2: contract(&|a, b| hessian[[a, b]]),
        psi_mn,
        gradient,
        hessian,
    })
}

/// Vielbein `E_Λ^{(A)}` stored `[A, Λ]`, with its inverse `e_{(A)}^Λ`
/// stored `[Λ, A]`, so `G = Eᵀ η E`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub signature: Signature,
    pub e: Tensor2,
    pub inv: Tensor2,
}

impl Frame {
    /// Coordinate components of a frame vector: `u^Λ = e_{(A)}^Λ v^A`.
    pub fn to_coords(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n).map(|l| (0..n).map(|a| self.inv[[l, a]] * v[a]).sum()).collect()
    }

    /// Frame components of a coordinate vector: `v^A = E_Λ^{(A)} u^Λ`.
    pub fn to_frame(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        (0..n).map(|a| (0..n).map(|l| self.e[[a, l]] * u[l]).sum()).collect()
    }

    /// All four indices of a covariant tensor moved to the frame.
    pub fn lower4(&self, t: &Tensor4) -> Tensor4 {
        let n = t.dim();
        let e = &self.inv;
        // contract one index at a time
        let step = |src: &Tensor4, slot: usize| {
            Tensor4::from_fn(n, |idx| {
                (0..n)
                    .map(|l| {
                        let mut j = idx;
                        j[slot] = l;
                        e[[l, idx[slot]]] * src[j]
                    })
                    .sum()
            })
        };
        (0..4).fold(t.clone(), |acc, slot| step(&acc, slot))
    }

    pub fn lower5(&self, t: &Tensor5) -> Tensor5 {
        let n = t.dim();
        let e = &self.inv;
        let step = |src: &Tensor5, slot: usize| {
            Tensor5::from_fn(n, |idx| {
                (0..n)
                    .map(|l| {
                        let mut j = idx;
                        j[slot] = l;
                        e[[l, idx[slot]]] * src[j]
                    })
                    .sum()
            })
        };
        (0..5).fold(t.clone(), |acc, slot| step(&acc, slot))
    }

    pub fn lower2(&self, t: &Tensor2) -> Tensor2 {
        let n = t.dim();
        Tensor2::from_fn(n, |[a, b]| {
            let mut s = 0.0;
            for l in 0..n {
                for k in 0..n {
                    s += self.inv[[l, a]] * self.inv[[k, b]] * t[[l, k]];
                }
            }
            s
        })
    }
}

/// Orthonormal frame of a symmetric matrix with the given signature.
///
/// Rows are `sqrt|λ| vᵀ` for eigenpairs `(λ, v)`. Negative eigenvalues
/// come first; within a sign group rows are ordered by the axis of their
/// largest eigenvector component (eigenvalue breaks ties), and that
/// component is made positive. Axis-aligned matrices therefore get
/// diagonal frames in axis order.
pub fn frame_from_matrix(g: &Tensor2, signature: Signature) -> Result<Frame> {
    let n = g.dim();
    let eig = SymmetricEigen::new(g.to_matrix());
    let scale = g.max_abs().max(f64::MIN_POSITIVE);
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect()))
        .collect();
    if pairs.iter().any(|(l, _)| l.abs() < 1e-14 * scale) {
        return Err(Error::SingularMetric {
            point: vec![],
            det: pairs.iter().map(|p| p.0).product(),
        });
    }
    let neg = pairs.iter().filter(|p| p.0 < 0.0).count();
    if neg != signature.n_minus {
        return Err(Error::SignatureMismatch {
            point: vec![],
            declared: (signature.n_minus, signature.n_plus),
            found: (neg, n - neg),
        });
    }
    let dominant = |v: &[f64]| {
        (0..v.len())
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap()
    };
    for (_, v) in pairs.iter_mut() {
        if v[dominant(v)] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    pairs.sort_by(|a, b| {
        (a.0 > 0.0)
            .cmp(&(b.0 > 0.0))
            .then(dominant(&a.1).cmp(&dominant(&b.1)))
            .then(a.0.total_cmp(&b.0))
    });
    let e = Tensor2::from_fn(n, |[a, l]| pairs[a].0.abs().sqrt() * pairs[a].1[l]);
    let inv = invert(&e).ok_or(Error::SingularMetric {
        point: vec![],
        det: 0.0,
    })?;
    Ok(Frame { signature, e, inv })
}

pub fn frame_at_point(m: &MetricField, p: &[f64]) -> Result<Frame> {
    let v = evaluate_metric(m, p)?;
    frame_from_matrix(&v.g, m.signature()).map_err(|e| match e {
        Error::SingularMetric { det, .. } => Error::SingularMetric { point: p.to_vec(), det },
        Error::SignatureMismatch { declared, found, .. } => Error::SignatureMismatch {
            point: p.to_vec(),
            declared,
            found,
        },
        e => e,
    })
}

/// Everything curvature-related at one point.
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    pub point: Vec<f64>,
    pub signature: Signature,
    pub g: Tensor2,
    pub inv: Tensor2,
    pub christoffel: Tensor3,
    pub riemann_up: Tensor4,
    pub riemann_lower: Tensor4,
    pub ricci: Tensor2,
    pub scalar: f64,
    pub nabla_riemann: Option<Tensor5>,
    pub frame: Frame,
}

impl CurvatureBundle {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// `R_{ABCD}` in the frame.
    pub fn riemann_frame(&self) -> Tensor4 {
        self.frame.lower4(&self.riemann_lower)
    }

    pub fn nabla_riemann_frame(&self) -> Option<Tensor5> {
        self.nabla_riemann.as_ref().map(|t| self.frame.lower5(t))
    }

    /// Builds a bundle directly from frame curvature at an orthonormal
    /// origin (`G = η`, `Γ = 0`).
    pub fn from_frame_curvature(signature: Signature, riemann: Tensor4, nabla: Option<Tensor5>) -> Self {
        let n = signature.dim();
        let eta = signature.eta_matrix();
        let riemann_up = raise_first(&eta, &riemann);
        let (ricci, scalar) = ricci_from_riemann(&eta, &riemann);
        let id = Tensor2::from_fn(n, |[a, b]| (a == b) as u8 as f64);
        CurvatureBundle {
            point: vec![0.0; n],
            signature,
            g: eta.clone(),
            inv: eta,
            christoffel: Tensor3::zeros(n),
            riemann_up,
            riemann_lower: riemann,
            ricci,
            scalar,
            nabla_riemann: nabla,
            frame: Frame {
                signature,
                e: id.clone(),
                inv: id,
            },
        }
    }
}

/// Full bundle; `with_nabla` requests third derivatives for `∇R`.
pub fn curvature_bundle(
    m: &MetricField,
    p: &[f64],
    d: DifferentiationStrategy,
    with_nabla: bool,
) -> Result<CurvatureBundle> {
    let v = evaluate_metric(m, p)?;
    let frame = frame_at_point(m, p)?;
    let j = m.jet(p, if with_nabla { 3 } else { 2 }, d)?;
    let (geo, nabla) = if with_nabla {
        let (g, t) = nabla_from_jet(&j, p)?;
        (g, Some(t))
    } else {
        (geometry(&MetricJet::from_jet(&j)).ok_or_else(|| singular(p))?, None)
    };
    let (ricci, scalar) = ricci_from_riemann(&geo.inv, &geo.riemann_lower);
    Ok(CurvatureBundle {
        point: p.to_vec(),
        signature: m.signature(),
        g: v.g,
        inv: geo.inv.clone(),
        riemann_up: raise_first(&geo.inv, &geo.riemann_lower),
        christoffel: geo.christoffel,
        riemann_lower: geo.riemann_lower,
        ricci,
        scalar,
        nabla_riemann: nabla,
        frame,
    })
}

/// Largest violation of the four index symmetries and the first Bianchi
/// identity of a lowered Riemann tensor.
pub fn riemann_symmetry_residual(r: &Tensor4) -> f64 {
    r.indices()
        .map(|[a, b, c, d]| {
            let x = r[[a, b, c, d]];
            [
                (x + r[[b, a, c, d]]).abs(),
                (x + r[[a, b, d, c]]).abs(),
                (x - r[[c, d, a, b]]).abs(),
                (x + r[[a, c, d, b]] + r[[a, d, b, c]]).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Constant-curvature frame tensor `(1/R²)(η_AD η_BC − η_AC η_BD)` with
/// `1/R²` replaced by a signed `K`.
pub fn constant_curvature_frame(signature: Signature, k: f64) -> Tensor4 {
    let eta = |a: usize, b: usize| if a == b { signature.eta(a) } else { 0.0 };
    Tensor4::from_fn(signature.dim(), |[a, b, c, d]| k * (eta(a, d) * eta(b, c) - eta(a, c) * eta(b, d)))
}
