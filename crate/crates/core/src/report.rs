//! Verification reports: each suite turns module checks into pass/fail
//! records with a computed value, an expected value and a tolerance.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    casimir, commutation_check, curvature_generator_identity, generator_vector_field, jacobi_residual, so_generators,
};
use crate::conformal::{
    cartan_coefficient, conformal_curve_check, conformal_relation_check, stereographic_transform, CARTAN_SERIES_SWITCH,
};
use crate::curvature::{
    compatibility_residual, constant_curvature_frame, curvature_bundle, riemann_symmetry_residual, weyl_from,
    CurvatureBundle,
};
use crate::diff::DifferentiationStrategy;
use crate::embedding::{
    cone_embed, cone_pullback_check, lie_derivative_check, null_residual, projected_commutator, HypersurfaceModel,
};
use crate::error::{Error, Result};
use crate::expansion::{expansion_study, integrate_frame_ode, metric_expansion, normal_tensor_d};
use crate::expr::Expr;
use crate::geodesic::{gauss_lemma_residual, IntegratorSettings, NormalChart};
use crate::metric::{MetricDoc, MetricField, ScalarField};
use crate::scenario::{known_conformal_factor, known_curvature, sample_points, Scenario, Suite};
use crate::conformal::normal_form_metric;

/// Every anchor a record may carry.
pub const ANCHORS: &[&str] = &[
    "curvature.riemann-symmetries",
    "curvature.metric-compatibility",
    "curvature.scalar-constant-curvature",
    "curvature.nabla-riemann-constant-curvature",
    "curvature.weyl-conformally-flat",
    "normal-tensor.reconstruction",
    "normal-tensor.cyclic-sum",
    "chart.gauss-lemma",
    "chart.log-exp",
    "chart.cartan-closed-form",
    "expansion.forms-agree",
    "expansion.slope",
    "expansion.exact",
    "expansion.third-order-vanishes",
    "frame-ode.cartan",
    "conformal.cartan-branch-continuity",
    "conformal.cartan-small-r",
    "conformal.stereographic-pullback",
    "conformal.curve-identity",
    "conformal.relation-general",
    "conformal.relation-einstein",
    "cone.null",
    "cone.pullback",
    "hypersurface.conformal-killing",
    "hypersurface.commutator-tangent",
    "hypersurface.commutator-killing",
    "algebra.commutation",
    "algebra.jacobi",
    "algebra.casimir-commutes",
    "algebra.casimir-scalar",
    "algebra.curvature-generators",
    "algebra.embedding-bridge",
    "suite.setup",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub anchor: String,
    /// `None` when the check raised an error.
    pub computed: Option<f64>,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Record {
    /// Passes when `|computed − expected| <= tolerance`.
    pub fn compare(name: impl Into<String>, anchor: &str, computed: Result<f64>, expected: f64, tolerance: f64) -> Self {
        debug_assert!(ANCHORS.contains(&anchor), "{anchor}");
        match computed {
            Ok(c) => Record {
                name: name.into(),
                anchor: anchor.into(),
                computed: Some(c),
                expected,
                tolerance,
                pass: (c - expected).abs() <= tolerance,
                error: None,
            },
            Err(e) => Record {
                name: name.into(),
                anchor: anchor.into(),
                computed: None,
                expected,
                tolerance,
                pass: false,
                error: Some(e.to_string()),
            },
        }
    }

    /// Nonnegative residual checked against zero.
    pub fn residual(name: impl Into<String>, anchor: &str, r: Result<f64>, tolerance: f64) -> Self {
        Self::compare(name, anchor, r, 0.0, tolerance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub scenario: Scenario,
    pub metric: String,
    pub records: Vec<Record>,
    pub pass: bool,
    /// Wall seconds per suite; only present when requested, since it
    /// breaks byte-identical output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub threads: Option<usize>,
    pub timing: bool,
}

/// Inputs shared by the suites. Random draws happen up front, in a fixed
/// order, so parallel execution cannot change them.
struct Ctx {
    m: MetricField,
    points: Vec<Vec<f64>>,
    origin: Vec<f64>,
    radii: Vec<f64>,
    expansion_radii: Vec<f64>,
    tol: Option<f64>,
    d: DifferentiationStrategy,
    k: Option<f64>,
    psi: Option<String>,
    direction: Vec<f64>,
    cone_samples: Vec<Vec<f64>>,
    surface: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
    stereo_dirs: Vec<Vec<f64>>,
    curve: (Vec<f64>, Vec<f64>),
}

impl Ctx {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

fn hypersurface_model(n: usize, k: Option<f64>) -> Result<HypersurfaceModel> {
    match k {
        Some(k) if k > 0.0 => HypersurfaceModel::sphere(n, 1.0 / k.sqrt()),
        Some(k) if k < 0.0 => HypersurfaceModel::hyperbolic(n, 1.0 / (-k).sqrt()),
        _ => HypersurfaceModel::sphere(n, 1.0),
    }
}

/// Point on the model surface from a random ambient direction.
fn surface_point(model: &HypersurfaceModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n1 = model.ambient.dim();
    let r = model.radius;
    if model.epsilon > 0.0 {
        unit(rng, n1).iter().map(|x| r * x).collect()
    } else {
        let y: Vec<f64> = (1..n1).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let t = (r * r + y.iter().map(|v| v * v).sum::<f64>()).sqrt();
        std::iter::once(t).chain(y).collect()
    }
}

fn build_ctx(s: &Scenario, doc: &MetricDoc, m: MetricField) -> Result<Ctx> {
    let n = m.dim();
    let mut rng = s.rng();
    let mut points = if !s.points.is_empty() {
        s.points.clone()
    } else if !doc.sample_points.is_empty() {
        doc.sample_points.clone()
    } else if let Some(o) = &s.origin {
        vec![o.clone()]
    } else {
        Vec::new()
    };
    // drawn even when unused so later draws do not depend on the point source
    let drawn = sample_points(m.domain(), 3, &mut rng)?;
    if points.is_empty() {
        points = drawn;
    }
    for p in &points {
        if p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.len() });
        }
    }
    let origin = s.origin.clone().unwrap_or_else(|| points[0].clone());
    if origin.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: origin.len() });
    }
    let radii = if s.radii.is_empty() { vec![0.1, 0.5, 1.0] } else { s.radii.clone() };
    let expansion_radii = if s.radii.len() >= 3 { s.radii.clone() } else { vec![0.4, 0.2, 0.1, 0.05] };
    let k = known_curvature(&m);
    let direction = {
        // spacelike in the frame so the closed forms apply
        let mut v = unit(&mut rng, n);
        for (a, x) in v.iter_mut().enumerate() {
            if m.signature().eta(a) < 0.0 {
                *x *= 0.25;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / norm).collect()
    };
    let cone_samples = (0..200).map(|_| (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect()).collect();
    let model = hypersurface_model(n, k)?;
    let surface = (0..20)
        .map(|_| {
            let x = surface_point(&model, &mut rng);
            let u = (0..n + 1).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let v = (0..n + 1).map(|_| rng.random_range(-1.0..=1.0)).collect();
            (x, u, v)
        })
        .collect();
    let stereo_dirs = (0..5).map(|_| unit(&mut rng, n)).collect();
    let curve = (
        (0..n).map(|_| rng.random_range(-0.3..=0.3)).collect(),
        (0..n).map(|_| rng.random_range(-0.3..=0.3)).collect(),
    );
    Ok(Ctx {
        psi: known_conformal_factor(&m),
        m,
        points,
        origin,
        radii,
        expansion_radii,
        tol: s.tolerance,
        d: DifferentiationStrategy::Auto,
        k,
        direction,
        cone_samples,
        surface,
        stereo_dirs,
        curve,
    })
}

fn relative_scale(b: &CurvatureBundle) -> f64 {
    b.riemann_up.max_abs().max(1.0)
}

fn curvature_suite(c: &Ctx) -> Vec<Record> {
    let n = c.m.dim();
    let per_point = |(i, p): (usize, &Vec<f64>)| -> Vec<Record> {
        let tag = |s: &str| format!("{s}[{i}]");
        let b = match curvature_bundle(&c.m, p, c.d, true) {
            Ok(b) => b,
            Err(e) => return vec![Record::residual(tag("curvature"), "suite.setup", Err(e), 0.0)],
        };
        let scale = relative_scale(&b);
        let dt = normal_tensor_d(&b);
        let mut out = vec![
            Record::residual(tag("riemann_symmetries"), "curvature.riemann-symmetries", Ok(riemann_symmetry_residual(&b.riemann_lower)), c.tol(1e-6)),
            Record::residual(tag("metric_compatibility"), "curvature.metric-compatibility", compatibility_residual(&c.m, p, c.d, c.d), c.tol(1e-8)),
            Record::residual(tag("d_reconstruction"), "normal-tensor.reconstruction", Ok(dt.reconstruction_residual(&b.riemann_up) / scale), c.tol(1e-10)),
            Record::residual(tag("d_cyclic_sum"), "normal-tensor.cyclic-sum", Ok(dt.cyclic_residual() / scale), c.tol(1e-12)),
        ];
        if let Some(k) = c.k {
            let expected = -((n * (n - 1)) as f64) * k;
            out.push(Record::compare(tag("scalar_curvature"), "curvature.scalar-constant-curvature", Ok(b.scalar), expected, c.tol(1e-8 * expected.abs().max(1.0))));
            let nab = b.nabla_riemann.as_ref().map_or(f64::NAN, |t| t.max_abs());
            out.push(Record::residual(tag("nabla_riemann"), "curvature.nabla-riemann-constant-curvature", Ok(nab), c.tol(1e-5)));
        }
        if n >= 3 && (c.k.is_some() || c.psi.is_some()) {
            let w = weyl_from(&b.g, &b.inv, &b.riemann_lower).max_abs();
            out.push(Record::residual(tag("weyl"), "curvature.weyl-conformally-flat", Ok(w), c.tol(1e-6)));
        }
        out
    };
    c.points.par_iter().enumerate().map(per_point).collect::<Vec<_>>().into_iter().flatten().collect()
}

fn chart(c: &Ctx) -> Result<NormalChart> {
    NormalChart::new(c.m.clone(), &c.origin, IntegratorSettings::default())
}

fn chart_directions(c: &Ctx) -> Vec<Vec<f64>> {
    let n = c.m.dim();
    let mut dirs: Vec<Vec<f64>> = (0..n)
        .map(|a| (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
        .collect();
    dirs.push(c.direction.clone());
    dirs
}

fn normal_chart_suite(c: &Ctx) -> Vec<Record> {
    let ch = match chart(c) {
        Ok(ch) => ch,
        Err(e) => return vec![Record::residual("normal_chart", "suite.setup", Err(e), 0.0)],
    };
    let sig = c.m.signature();
    let jobs: Vec<(f64, usize, Vec<f64>)> = c
        .radii
        .iter()
        .flat_map(|&r| chart_directions(c).into_iter().enumerate().map(move |(j, d)| (r, j, d)))
        .collect();
    jobs.par_iter()
        .map(|(r, j, dir)| {
            let v: Vec<f64> = dir.iter().map(|x| r * x).collect();
            let tag = |s: &str| format!("{s}[r={r},dir={j}]");
            let mut out = vec![
                Record::residual(tag("gauss_lemma"), "chart.gauss-lemma", gauss_lemma_residual(&ch, &v), c.tol(1e-8)),
                Record::residual(
                    tag("log_exp"),
                    "chart.log-exp",
                    ch.exp_map(&v).and_then(|q| ch.log_map(&q)).map(|w| w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)),
                    c.tol(1e-8),
                ),
            ];
            if let Some(k) = c.k {
                if sig.dot(&v, &v) >= 0.0 {
                    let res = ch
                        .pullback_metric_normal(&v)
                        .and_then(|g| Ok(g.max_abs_diff(&normal_form_metric(k, sig, &v)?)));
                    out.push(Record::residual(tag("pullback_closed_form"), "chart.cartan-closed-form", res, c.tol(1e-6)));
                }
            }
            out
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn expansion_suite(c: &Ctx) -> Vec<Record> {
    let setup = chart(c).and_then(|ch| Ok((curvature_bundle(&c.m, &c.origin, c.d, true)?, ch)));
    let (b, ch) = match setup {
        Ok(x) => x,
        Err(e) => return vec![Record::residual("expansion", "suite.setup", Err(e), 0.0)],
    };
    let mut out = Vec::new();
    let flat = c.k == Some(0.0);
    for order in [2u32, 3] {
        let tag = |s: &str| format!("{s}[order={order}]");
        match expansion_study(&ch, &b, &c.direction, &c.expansion_radii, order) {
            Ok(rep) => {
                out.push(Record::residual(tag("forms_agree"), "expansion.forms-agree", Ok(rep.form_agreement), c.tol(1e-12)));
                let tiny = rep.residuals.iter().all(|&x| x < 1e-10);
                if flat || tiny {
                    let worst = rep.residuals.iter().copied().fold(0.0, f64::max);
                    out.push(Record::residual(tag("exact"), "expansion.exact", Ok(worst), c.tol(1e-10)));
                } else {
                    let window = if order == 2 { 0.3 } else { 0.4 };
                    out.push(Record::compare(tag("slope"), "expansion.slope", Ok(rep.slope), (order + 2) as f64, window));
                }
            }
            Err(e) => out.push(Record::residual(tag("study"), "suite.setup", Err(e), 0.0)),
        }
    }
    if let Some(k) = c.k {
        let diff = c
            .expansion_radii
            .iter()
            .map(|&r| {
                let v: Vec<f64> = c.direction.iter().map(|x| r * x).collect();
                let p2 = metric_expansion(&b, &v, 2)?;
                let p3 = metric_expansion(&b, &v, 3)?;
                Ok(p2.contracted.max_abs_diff(&p3.contracted))
            })
            .try_fold(0.0f64, |acc, r: Result<f64>| Ok::<f64, Error>(acc.max(r?)));
        out.push(Record::residual("third_order_term", "expansion.third-order-vanishes", diff, c.tol(1e-10)));
        let sig = c.m.signature();
        if sig.n_minus == 0 {
            let n = c.m.dim();
            let frame: Vec<Record> = c
                .radii
                .par_iter()
                .filter(|&&r| k <= 0.0 || r * k.sqrt() < std::f64::consts::PI)
                .map(|&r| {
                    let mut z = vec![0.0; n];
                    z[0] = r;
                    let got = integrate_frame_ode(k, sig, &z, 1.0, 10_000, false).and_then(|s| s.transverse_coefficient());
                    let want = 1.0 - cartan_coefficient(k, r) * r * r;
                    Record::compare(format!("frame_ode[r={r}]"), "frame-ode.cartan", got, want, c.tol(1e-6))
                })
                .collect();
            out.extend(frame);
        }
    }
    out
}

fn flat_metric(m: &MetricField) -> MetricField {
    let sig = m.signature();
    let n = sig.dim();
    let comps = (0..n * n)
        .map(|k| Expr::constant(if k / n == k % n { sig.eta(k / n) } else { 0.0 }))
        .collect();
    MetricField::from_expressions(sig, comps, m.domain().clone(), "flat")
}

fn conformal_suite(c: &Ctx) -> Vec<Record> {
    let n = c.m.dim();
    let sig = c.m.signature();
    let mut out = Vec::new();
    let k = match c.k {
        Some(k) => k,
        None => match crate::curvature::ricci_scalar(&c.m, &c.origin, c.d) {
            Ok(r) => r.fitted_curvature,
            Err(e) => return vec![Record::residual("conformal", "suite.setup", Err(e), 0.0)],
        },
    };
    if k != 0.0 {
        let rs = CARTAN_SERIES_SWITCH / k.abs().sqrt();
        let jump = (cartan_coefficient(k, rs * (1.0 - 1e-9)) - cartan_coefficient(k, rs * (1.0 + 1e-9))).abs();
        out.push(Record::residual(format!("cartan_continuity[K={k}]"), "conformal.cartan-branch-continuity", Ok(jump), c.tol(1e-12)));
    }
    out.push(Record::compare(
        format!("cartan_small_r[K={k}]"),
        "conformal.cartan-small-r",
        Ok(cartan_coefficient(k, 1e-6)),
        k / 3.0,
        c.tol(1e-8),
    ));
    if sig.n_minus == 0 {
        for &r in &c.radii {
            if k > 0.0 && r * k.sqrt() >= std::f64::consts::PI {
                continue;
            }
            let worst = c
                .stereo_dirs
                .iter()
                .map(|d| stereographic_transform(k, r, d).map(|p| p.pullback_residual))
                .try_fold(0.0f64, |acc, r| Ok::<f64, Error>(acc.max(r?)));
            out.push(Record::residual(format!("stereographic[r={r}]"), "conformal.stereographic-pullback", worst, c.tol(1e-8)));
        }
        let (a, b) = c.curve.clone();
        let curve = move |s: f64| -> (Vec<f64>, Vec<f64>) {
            (a.iter().zip(&b).map(|(a, b)| a + s * b + 0.1 * s * s).collect(), b.iter().map(|b| b + 0.2 * s).collect())
        };
        let params: Vec<f64> = (0..10).map(|i| 0.1 * i as f64).collect();
        out.push(Record::residual("curve_identity", "conformal.curve-identity", conformal_curve_check(k, sig, &curve, &params), c.tol(1e-8)));
    }
    if let (Some(src), true) = (&c.psi, n >= 3) {
        match ScalarField::parse(src, n) {
            Ok(psi) => {
                let flat = flat_metric(&c.m);
                let recs: Vec<Vec<Record>> = c
                    .points
                    .par_iter()
                    .enumerate()
                    .map(|(i, p)| match conformal_relation_check(&flat, &c.m, &psi, p, c.d) {
                        Ok(rep) => {
                            let mut v = vec![Record::residual(format!("relation_general[{i}]"), "conformal.relation-general", Ok(rep.residual_general), c.tol(1e-6))];
                            if let Some(e) = rep.residual_einstein {
                                v.push(Record::residual(format!("relation_einstein[{i}]"), "conformal.relation-einstein", Ok(e), c.tol(1e-6)));
                            }
                            v
                        }
                        Err(e) => vec![Record::residual(format!("relation_general[{i}]"), "conformal.relation-general", Err(e), 0.0)],
                    })
                    .collect();
                out.extend(recs.into_iter().flatten());
            }
            Err(e) => out.push(Record::residual("relation_general", "suite.setup", Err(e), 0.0)),
        }
    }
    out
}

/// Conformal factors used for the cone checks.
pub const CONE_SIGMAS: [&str; 3] = ["0.3*sin(x1)", "0.2*x1*x1 - 0.1*x1", "0.25*cos(x1) + 0.05*x1^3"];

fn embed_suite(c: &Ctx) -> Vec<Record> {
    let n = c.m.dim();
    let sig = c.m.signature();
    let mut out = Vec::new();
    for (j, src) in CONE_SIGMAS.iter().enumerate() {
        let sigma = match ScalarField::parse(src, n) {
            Ok(s) => s,
            Err(e) => {
                out.push(Record::residual(format!("cone_sigma[{j}]"), "suite.setup", Err(e), 0.0));
                continue;
            }
        };
        let null = c
            .cone_samples
            .iter()
            .map(|z| cone_embed(&sigma, sig, z).map(|y| null_residual(sig, &y)))
            .try_fold(0.0f64, |acc, r| Ok::<f64, Error>(acc.max(r?)));
        out.push(Record::residual(format!("cone_null[sigma={j}]"), "cone.null", null, c.tol(1e-12)));
        let pull = c
            .cone_samples
            .iter()
            .take(3)
            .map(|z| cone_pullback_check(&sigma, sig, z, DifferentiationStrategy::fd4()).map(|p| p.residual))
            .try_fold(0.0f64, |acc, r| Ok::<f64, Error>(acc.max(r?)));
        out.push(Record::residual(format!("cone_pullback[sigma={j}]"), "cone.pullback", pull, c.tol(1e-7)));
    }
    let model = match hypersurface_model(n, c.k) {
        Ok(m) => m,
        Err(e) => {
            out.push(Record::residual("hypersurface", "suite.setup", Err(e), 0.0));
            return out;
        }
    };
    let rows: Vec<Result<(f64, f64, f64)>> = c
        .surface
        .par_iter()
        .map(|(x, u, v)| {
            let lie = lie_derivative_check(&model, u, x)?;
            let com = projected_commutator(&model, u, v, x)?;
            Ok(((lie.lambda_fit - lie.lambda_expected).abs(), com.normal_component, com.killing_residual))
        })
        .collect();
    let col = |f: fn(&(f64, f64, f64)) -> f64| -> Result<f64> {
        rows.iter().try_fold(0.0f64, |acc, r| match r {
            Ok(t) => Ok(acc.max(f(t))),
            Err(e) => Err(e.clone()),
        })
    };
    out.push(Record::residual("conformal_killing_lambda", "hypersurface.conformal-killing", col(|t| t.0), c.tol(1e-6)));
    out.push(Record::residual("commutator_tangent", "hypersurface.commutator-tangent", col(|t| t.1), c.tol(1e-12)));
    out.push(Record::residual("commutator_killing", "hypersurface.commutator-killing", col(|t| t.2), c.tol(1e-6)));
    out
}

fn algebra_suite(c: &Ctx) -> Vec<Record> {
    let sig = c.m.signature();
    let g = match so_generators(sig.n_plus, sig.n_minus) {
        Ok(g) => g,
        Err(e) => return vec![Record::residual("algebra", "suite.setup", Err(e), 0.0)],
    };
    let name = format!("so({},{})", sig.n_plus, sig.n_minus);
    let cas = casimir(&g);
    let mut out = vec![
        Record::residual(format!("commutation[{name}]"), "algebra.commutation", Ok(commutation_check(&g)), 0.0),
        Record::residual(format!("jacobi[{name}]"), "algebra.jacobi", Ok(jacobi_residual(&g)), 0.0),
        Record::residual(format!("casimir_commutes[{name}]"), "algebra.casimir-commutes", Ok(cas.commutator_residual), 0.0),
    ];
    if sig.n_minus == 0 {
        let got = cas.scalar.ok_or_else(|| Error::InvalidArgument("Casimir is not a multiple of the identity".into()));
        out.push(Record::compare(format!("casimir_scalar[{name}]"), "algebra.casimir-scalar", got, (sig.dim() - 1) as f64, 0.0));
    }
    let radius = match c.k {
        Some(k) if k != 0.0 => 1.0 / k.abs().sqrt(),
        _ => 1.0,
    };
    let curv = constant_curvature_frame(sig, 1.0 / (radius * radius));
    out.push(Record::residual(
        format!("curvature_generators[{name},R={radius}]"),
        "algebra.curvature-generators",
        curvature_generator_identity(&curv, radius, &g),
        c.tol(1e-12),
    ));
    // so(n+1) acting on the ambient space of the model hypersurface
    let bridge = hypersurface_model(sig.dim(), c.k).and_then(|model| {
        let amb = model.ambient;
        let ga = so_generators(amb.n_plus, amb.n_minus)?;
        let f = model.epsilon / model.radius.powi(2);
        c.surface.iter().try_fold(0.0f64, |acc, (x, u, v)| {
            let w = generator_vector_field(&ga, u, v, x);
            let com = projected_commutator(&model, u, v, x)?.value;
            Ok(w.iter().zip(&com).fold(acc, |a, (w, c)| a.max((f * w - c).abs())))
        })
    });
    out.push(Record::residual("embedding_bridge", "algebra.embedding-bridge", bridge, c.tol(1e-12)));
    out
}

pub(crate) struct StudyInputs {
    pub m: MetricField,
    pub origin: Vec<f64>,
    pub direction: Vec<f64>,
    pub radii: Vec<f64>,
}

/// Metric, origin, seeded unit direction and radii, resolved exactly as
/// `run_scenario` resolves them.
pub(crate) fn study_inputs(s: &Scenario) -> Result<StudyInputs> {
    let (doc, m) = s.metric()?;
    let c = build_ctx(s, &doc, m)?;
    Ok(StudyInputs { m: c.m, origin: c.origin, direction: c.direction, radii: c.radii })
}

fn run_suite(c: &Ctx, s: Suite) -> Vec<Record> {
    match s {
        Suite::Curvature => curvature_suite(c),
        Suite::NormalChart => normal_chart_suite(c),
        Suite::Expansion => expansion_suite(c),
        Suite::Conformal => conformal_suite(c),
        Suite::Embed => embed_suite(c),
        Suite::Algebra => algebra_suite(c),
        Suite::All => unreachable!("expanded before dispatch"),
    }
}

/// Runs the selected suites. Output is identical for any thread count;
/// records keep suite order, then point/radius order within a suite.
pub fn run_scenario(s: &Scenario, opts: RunOptions) -> Result<Report> {
    let (doc, m) = s.metric()?;
    let label = m.label().to_string();
    let ctx = build_ctx(s, &doc, m)?;
    let suites = s.suite.expand();
    let work = || -> Vec<(Vec<Record>, f64)> {
        suites
            .par_iter()
            .map(|&su| {
                let t0 = Instant::now();
                let r = run_suite(&ctx, su);
                (r, t0.elapsed().as_secs_f64())
            })
            .collect()
    };
    let results = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let mut records = Vec::new();
    let mut timing = BTreeMap::new();
    for (su, (recs, secs)) in suites.iter().zip(results) {
        for mut r in recs {
            r.name = format!("{}.{}", su.name(), r.name);
            records.push(r);
        }
        timing.insert(su.name().to_string(), secs);
    }
    Ok(Report {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: s.clone(),
        metric: label,
        pass: records.iter().all(|r| r.pass),
        records,
        timing: opts.timing.then_some(timing),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(json: &str) -> Scenario {
        Scenario::parse(json).unwrap()
    }

    #[test]
    fn euclidean_curvature_suite_passes() {
        let s = scenario(r#"{"dim": 3, "signature": [1,1,1], "catalog": {"name": "euclidean", "params": {"n": 3}}, "suite": "curvature"}"#);
        let r = run_scenario(&s, RunOptions::default()).unwrap();
        assert!(r.pass, "{:#?}", r.records);
        assert!(r.records.iter().all(|x| x.computed == Some(0.0) || x.anchor == "curvature.scalar-constant-curvature"));
        assert!(r.timing.is_none());
    }

    #[test]
    fn unreachable_tolerance_fails_with_records() {
        let s = scenario(r#"{"dim": 2, "signature": [1,1], "catalog": {"name": "sphere_polar"}, "suite": "curvature", "tolerance": 1e-30, "points": [[0.7, 0.3], [1.1, -0.4]]}"#);
        let r = run_scenario(&s, RunOptions::default()).unwrap();
        assert!(!r.pass);
        assert!(r.records.iter().all(|x| x.computed.is_some()));
    }

    #[test]
    fn anchors_are_listed() {
        let s = scenario(r#"{"dim": 2, "signature": [1,1], "catalog": {"name": "sphere_polar"}, "origin": [1.2, 0.3], "radii": [0.1, 0.5]}"#);
        let r = run_scenario(&s, RunOptions::default()).unwrap();
        assert!(r.records.iter().all(|x| ANCHORS.contains(&x.anchor.as_str())));
        let names: Vec<_> = r.records.iter().map(|x| x.name.split('.').next().unwrap().to_string()).collect();
        assert_eq!(names.first().unwrap(), "curvature");
        assert_eq!(names.last().unwrap(), "algebra");
    }
}
