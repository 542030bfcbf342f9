//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line with
//! the measured value and its bound, then asserts.

use std::f64::consts::PI;

use normcoord::algebra::{casimir, commutation_check, jacobi_residual, so_generators, ExactMatrix};
use normcoord::conformal::cartan_coefficient;
use normcoord::curvature::{curvature_bundle, riemann_symmetry_residual, weyl};
use normcoord::diff::DifferentiationStrategy;
use normcoord::embedding::{cone_embed, cone_pullback_check, lie_derivative_check, null_residual, projected_commutator, HypersurfaceModel};
use normcoord::expansion::{expansion_study, integrate_frame_ode, metric_expansion, normal_tensor_d};
use normcoord::geodesic::{IntegratorSettings, NormalChart};
use normcoord::metric::{catalog_construct, Domain, MetricField, Params, ScalarField, Signature};
use normcoord::report::{run_scenario, RunOptions};
use normcoord::scenario::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(label: &str, pass: bool, detail: String) -> bool {
    println!("[{}] {label}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn catalog(name: &str, params: &[(&str, f64)]) -> MetricField {
    let p: Params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    catalog_construct(name, &p).unwrap()
}

fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / s).collect()
}

/// Normal-coordinate metric `dr² + f(r)² dθ²` written in Cartesian
/// normal coordinates.
fn polar_oracle(v: &[f64], f: impl Fn(f64) -> f64) -> [[f64; 2]; 2] {
    let r = v[0].hypot(v[1]);
    let (u0, u1) = (v[0] / r, v[1] / r);
    let t = f(r).powi(2) / (r * r);
    let uu = [[u0 * u0, u0 * u1], [u1 * u0, u1 * u1]];
    let mut g = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let id = if a == b { 1.0 } else { 0.0 };
            g[a][b] = uu[a][b] + t * (id - uu[a][b]);
        }
    }
    g
}

fn polar_residual(m: MetricField, origin: &[f64], headings: &[f64], f: impl Fn(f64) -> f64 + Copy) -> f64 {
    let chart = NormalChart::new(m, origin, IntegratorSettings::default()).unwrap();
    let mut worst = 0.0f64;
    for k in 0..=16 {
        let r = 0.05 + (PI / 2.0 - 0.05) * k as f64 / 16.0;
        for &a in headings {
            let v = [r * a.cos(), r * a.sin()];
            let g = chart.pullback_metric_normal(&v).unwrap();
            let want = polar_oracle(&v, f);
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((g[[i, j]] - want[i][j]).abs());
                }
            }
        }
    }
    worst
}

#[test]
fn constant_curvature_normal_chart_matches_closed_form() {
    // from the equator, headings that stay clear of the coordinate poles
    let sphere = polar_residual(catalog("sphere_polar", &[("R", 1.0)]), &[PI / 2.0, 0.3], &[PI / 2.0, PI / 3.0, 2.0 * PI / 3.0, -PI / 4.0], f64::sin);
    let hyper = polar_residual(catalog("hyperbolic_polar", &[("K", -1.0)]), &[2.0, 0.3], &[0.0, PI / 3.0, PI / 2.0, -2.0 * PI / 3.0], f64::sinh);
    let ok = verdict(
        "normal-chart metric vs dr² + sin²r dθ² (K=1) and sinh² (K=-1), r in [0.05, π/2]",
        sphere < 1e-6 && hyper < 1e-6,
        format!("max residual {sphere:.2e} / {hyper:.2e} (< 1e-6)"),
    );
    assert!(ok);
}

#[test]
fn frame_ode_reproduces_cartan_coefficient() {
    let mut worst = 0.0f64;
    for k in [1.0f64, -1.0] {
        for i in 1..=8 {
            let r = 0.2 * i as f64;
            let s = if k > 0.0 { r.sin() } else { r.sinh() };
            let want = (k.abs() * r * r - s * s) / (k.abs() * r.powi(4));
            let sol = integrate_frame_ode(k, Signature::riemannian(3), &[r, 0.0, 0.0], 1.0, 10_000, false).unwrap();
            let got = (1.0 - sol.transverse_coefficient().unwrap()) / (r * r);
            worst = worst.max((got - want).abs());
        }
    }
    let limit = [1.0f64, -1.0].iter().map(|&k| (cartan_coefficient(k, 1e-6) - k / 3.0).abs()).fold(0.0, f64::max);
    let ok = verdict(
        "frame ODE (10^4 RK4 steps) vs (|K|r²-S²)/(|K|r⁴), K=±1; r→0 limit K/3",
        worst < 1e-6 && limit < 1e-8,
        format!("max deviation {worst:.2e} (< 1e-6), limit error {limit:.2e} (< 1e-8)"),
    );
    assert!(ok);
}

const SLOPE_RADII: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

fn expansion_slope(m: MetricField, origin: &[f64], direction: &[f64], order: u32) -> f64 {
    let chart = NormalChart::new(m.clone(), origin, IntegratorSettings::default()).unwrap();
    let b = curvature_bundle(&m, origin, DifferentiationStrategy::Auto, true).unwrap();
    expansion_study(&chart, &b, direction, &SLOPE_RADII, order).unwrap().slope
}

fn sphere_slope(order: u32) -> f64 {
    expansion_slope(catalog("sphere_polar", &[("R", 1.0)]), &[1.2, 0.3], &[0.6, 0.8], order)
}

fn generic_slope(order: u32) -> f64 {
    expansion_slope(catalog("conformal_flat_generic", &[("n", 4.0)]), &[0.2, 0.1, 0.0, 0.0], &[0.5, 0.5, 0.5, 0.5], order)
}

fn slope_verdict(label: &str, slope: f64, want: f64, window: f64) -> bool {
    verdict(label, (slope - want).abs() <= window, format!("slope {slope:.3} (want {want} ± {window})"))
}

#[test]
fn expansion_order2_slope_sphere() {
    assert!(slope_verdict("order-2 truncation slope, sphere", sphere_slope(2), 4.0, 0.3));
}

#[test]
fn expansion_order2_slope_generic_conformal() {
    assert!(slope_verdict("order-2 truncation slope, generic conformal", generic_slope(2), 4.0, 0.3));
}

#[test]
fn expansion_order3_slope_sphere() {
    assert!(slope_verdict("order-3 truncation slope, sphere", sphere_slope(3), 5.0, 0.4));
}

#[test]
fn expansion_order3_slope_generic_conformal() {
    assert!(slope_verdict("order-3 truncation slope, generic conformal", generic_slope(3), 5.0, 0.4));
}

#[test]
fn expansion_order3_term_vanishes_on_constant_curvature() {
    let cases = [
        (catalog("sphere_polar", &[("R", 1.0)]), vec![1.2, 0.3]),
        (catalog("hyperbolic_polar", &[("K", -1.0)]), vec![1.0, 0.3]),
        (catalog("constant_curvature_stereographic", &[("K", 0.5), ("n", 3.0)]), vec![0.2, -0.1, 0.3]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for (m, p) in &cases {
        let b = curvature_bundle(m, p, DifferentiationStrategy::Auto, true).unwrap();
        for _ in 0..10 {
            let v: Vec<f64> = unit(&mut rng, p.len()).iter().map(|x| 0.5 * x).collect();
            let d = metric_expansion(&b, &v, 3).unwrap().contracted.max_abs_diff(&metric_expansion(&b, &v, 2).unwrap().contracted);
            worst = worst.max(d);
        }
    }
    assert!(verdict("order-3 term on constant curvature", worst < 1e-10, format!("max {worst:.2e} (< 1e-10)")));
}

#[test]
fn hypercone_null_and_pullback() {
    let sigmas = ["0.3*sin(x1)", "0.2*x1*x2 - 0.1*x3^2", "0.25*cos(x1 + x2) + 0.05*x4^3"];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut null, mut pull) = (0.0f64, 0.0f64);
    for sig in [Signature::riemannian(4), Signature::lorentzian(4)] {
        for src in sigmas {
            let sigma = ScalarField::parse(src, 4).unwrap();
            for _ in 0..10_000 / (2 * sigmas.len()) + 1 {
                let z: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
                null = null.max(null_residual(sig, &cone_embed(&sigma, sig, &z).unwrap()));
            }
            for _ in 0..5 {
                let z: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
                let rep = cone_pullback_check(&sigma, sig, &z, DifferentiationStrategy::fd4()).unwrap();
                let e2 = (2.0 * sigma.eval(&z)).exp();
                for a in 0..4 {
                    for b in 0..4 {
                        let want = if a == b { e2 * sig.eta(a) } else { 0.0 };
                        pull = pull.max((rep.pullback[[a, b]] - want).abs());
                    }
                }
            }
        }
    }
    let ok = verdict(
        "hypercone null residual (10^4 samples) and pullback = exp(2σ)η, 3 σ × 2 signatures",
        null < 1e-12 && pull < 1e-7,
        format!("null {null:.2e} (< 1e-12), pullback {pull:.2e} (< 1e-7)"),
    );
    assert!(ok);
}

#[test]
fn weyl_witnesses_conformal_flatness() {
    let flat = catalog("euclidean", &[("n", 4.0)]);
    let mut fields: Vec<MetricField> = ["0.3*sin(x1) + 0.2*x1*x2", "0.1*x1^2 - 0.2*x3*x4 + 0.05*x2", "0.2*cos(x1 + x3)*exp(0.1*x4)"]
        .iter()
        .map(|s| flat.conformal_rescale(&ScalarField::parse(s, 4).unwrap()).unwrap())
        .collect();
    fields.push(catalog("conformal_flat_generic", &[("n", 4.0), ("n_minus", 1.0)]));
    let p = [0.3, -0.2, 0.4, 0.1];
    let flat_max = fields
        .iter()
        .map(|m| weyl(m, &p, DifferentiationStrategy::Auto).unwrap().max_abs())
        .fold(0.0, f64::max);
    let s2 = catalog("sphere_polar", &[("R", 1.0)]);
    let prod = s2.product(&s2).unwrap();
    let w = weyl(&prod, &[1.1, 0.2, 0.9, -0.4], DifferentiationStrategy::Auto).unwrap().max_abs();
    let ok = verdict(
        "Weyl of exp(2σ)η vanishes (n=4); Weyl of S²×S² is large",
        flat_max < 1e-6 && w > 0.1,
        format!("conformally flat max {flat_max:.2e} (< 1e-6), S²×S² {w:.3} (> 0.1)"),
    );
    assert!(ok);
}

#[test]
fn conformal_killing_structure_on_sphere_and_hyperboloid() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut lam, mut tangent, mut killing) = (0.0f64, 0.0f64, 0.0f64);
    for model in [HypersurfaceModel::sphere(2, 1.5).unwrap(), HypersurfaceModel::hyperbolic(2, 0.8).unwrap()] {
        let r = model.radius;
        for _ in 0..100 {
            let x: Vec<f64> = if model.epsilon > 0.0 {
                unit(&mut rng, 3).iter().map(|c| r * c).collect()
            } else {
                let y: Vec<f64> = (0..2).map(|_| rng.random_range(-1.5..1.5)).collect();
                vec![(r * r + y[0] * y[0] + y[1] * y[1]).sqrt(), y[0], y[1]]
            };
            let u: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            // ⟨U, N⟩ with N = x/R, signed by the sheet
            let expected = -model.epsilon * model.ambient.dot(&u, &x) / (r * r);
            let rep = lie_derivative_check(&model, &u, &x).unwrap();
            lam = lam.max((rep.lambda_fit - expected).abs());
            let com = projected_commutator(&model, &u, &v, &x).unwrap();
            tangent = tangent.max(com.normal_component);
            killing = killing.max(com.killing_residual);
        }
    }
    let ok = verdict(
        "λ_U fit, commutator tangency and Killing property on S² and H² (100 samples each)",
        lam < 1e-6 && tangent < 1e-12 && killing < 1e-6,
        format!("λ {lam:.2e} (< 1e-6), normal {tangent:.2e} (< 1e-12), Killing {killing:.2e} (< 1e-6)"),
    );
    assert!(ok);
}

#[test]
fn generator_algebra_is_exact() {
    let mut worst = 0.0f64;
    for (p, q) in [(3, 0), (4, 0), (3, 1)] {
        let g = so_generators(p, q).unwrap();
        worst = worst.max(commutation_check(&g)).max(jacobi_residual(&g));
    }
    let cas = casimir(&so_generators(3, 0).unwrap());
    let id = ExactMatrix::identity(3);
    let two_i = &id + &id;
    let casimir_exact = (&cas.matrix - &two_i).is_zero();
    let ok = verdict(
        "commutation relations and Jacobi for so(3), so(4), so(1,3); C₂ = 2I on so(3)",
        worst == 0.0 && casimir_exact,
        format!("max residual {worst:e} (== 0), C₂ = 2I: {casimir_exact}"),
    );
    assert!(ok);
}

/// Smooth non-diagonal metric near `η` with random coefficients.
fn random_metric(rng: &mut ChaCha8Rng, sig: Signature) -> MetricField {
    let mut c = || rng.random_range(-0.15..0.15);
    let srcs = [
        format!("{} + {}*sin(x1) + {}*x2*x3", sig.eta(0), c(), c()),
        format!("{}*cos(x1 + x2)", c()),
        format!("{}*x1*x3", c()),
        format!("{} + {}*x3^2 + {}*sin(x2)", sig.eta(1), c(), c()),
        format!("{}*exp(x1)", c()),
        format!("{} + {}*exp(x1*x2)", sig.eta(2), c()),
    ];
    let comps = [0, 1, 2, 1, 3, 4, 2, 4, 5]
        .iter()
        .map(|&k| ScalarField::parse(&srcs[k], 3).unwrap().expression().unwrap().clone())
        .collect();
    MetricField::from_expressions(sig, comps, Domain::unbounded(3), "random")
}

#[test]
fn curvature_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut sym, mut recon, mut cyclic) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..20 {
        let sig = if i % 2 == 0 { Signature::riemannian(3) } else { Signature::lorentzian(3) };
        let m = random_metric(&mut rng, sig);
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(-0.5..0.5)).collect();
        let fd = curvature_bundle(&m, &p, DifferentiationStrategy::fd4(), false).unwrap();
        sym = sym.max(riemann_symmetry_residual(&fd.riemann_lower));
        let b = curvature_bundle(&m, &p, DifferentiationStrategy::DualForward, false).unwrap();
        let scale = b.riemann_up.max_abs().max(1.0);
        let d = normal_tensor_d(&b);
        recon = recon.max(d.reconstruction_residual(&b.riemann_up) / scale);
        cyclic = cyclic.max(d.cyclic_residual() / scale);
    }
    let mut nabla = 0.0f64;
    for (m, p) in [
        (catalog("sphere_polar", &[("R", 2.0), ("n", 3.0)]), vec![1.0, 0.7, 0.2]),
        (catalog("hyperbolic_polar", &[("K", -0.5), ("n", 3.0)]), vec![1.3, 1.1, -0.4]),
        (catalog("constant_curvature_stereographic", &[("K", 0.7), ("n", 4.0)]), vec![0.1, 0.3, -0.2, 0.4]),
    ] {
        let b = curvature_bundle(&m, &p, DifferentiationStrategy::Auto, true).unwrap();
        nabla = nabla.max(b.nabla_riemann.unwrap().max_abs());
    }
    let ok = verdict(
        "Riemann symmetries + Bianchi (FD4, random metrics), D-tensor identities, ∇R on constant curvature",
        sym < 1e-6 && recon < 1e-10 && cyclic < 1e-12 && nabla < 1e-5,
        format!("sym {sym:.2e} (< 1e-6), reconstruction {recon:.2e} (< 1e-10), cyclic {cyclic:.2e} (< 1e-12), ∇R {nabla:.2e} (< 1e-5)"),
    );
    assert!(ok);
}

#[test]
fn reports_are_byte_identical_across_thread_counts() {
    let s = Scenario::parse(
        r#"{"dim": 2, "signature": [1, 1], "catalog": {"name": "sphere_polar"}, "origin": [1.2, 0.3], "seed": 21}"#,
    )
    .unwrap();
    let render = |threads| serde_json::to_string_pretty(&run_scenario(&s, RunOptions { threads: Some(threads), timing: false }).unwrap()).unwrap();
    let one = render(1);
    let same = [2, 4, 8].iter().all(|&t| render(t) == one);
    assert!(verdict("same scenario + seed gives byte-identical reports on 1, 2, 4, 8 threads", same, format!("{} bytes, identical: {same}", one.len())));
}
