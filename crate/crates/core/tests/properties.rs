use normcoord::algebra::{generator_vector_field, so_generators};
use normcoord::conformal::angular_momentum;
use normcoord::curvature::{curvature_bundle, riemann_symmetry_residual};
use normcoord::diff::DifferentiationStrategy;
use normcoord::embedding::{cone_embed, null_residual, projected_commutator, HypersurfaceModel};
use normcoord::expansion::normal_tensor_d;
use normcoord::metric::{Domain, MetricField, ScalarField, Signature};
use proptest::prelude::*;

/// Non-diagonal 3-metric near `η` with random smooth perturbations.
fn perturbed_metric(sig: Signature, c: &[f64; 6]) -> MetricField {
    let srcs = [
        format!("{} + {}*sin(x1) + {}*x2*x3", sig.eta(0), c[0], c[1]),
        format!("{}*cos(x1 + x2)", c[2]),
        format!("{}*x1*x3", c[3]),
        format!("{}*cos(x1 + x2)", c[2]),
        format!("{} + {}*x3^2", sig.eta(1), c[4]),
        "0".to_string(),
        format!("{}*x1*x3", c[3]),
        "0".to_string(),
        format!("{} + {}*exp(x1*x2)", sig.eta(2), c[5]),
    ];
    let comps = srcs
        .iter()
        .map(|s| ScalarField::parse(s, 3).unwrap().expression().unwrap().clone())
        .collect();
    MetricField::from_expressions(sig, comps, Domain::unbounded(3), "perturbed")
}

fn coeffs() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-0.15f64..0.15)
}

fn point3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.5f64..0.5, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn riemann_symmetries_and_normal_tensor(c in coeffs(), p in point3(), lorentz in any::<bool>()) {
        let sig = if lorentz { Signature::lorentzian(3) } else { Signature::riemannian(3) };
        let m = perturbed_metric(sig, &c);
        let b = curvature_bundle(&m, &p, DifferentiationStrategy::DualForward, false).unwrap();
        let scale = b.riemann_up.max_abs().max(1.0);
        prop_assert!(riemann_symmetry_residual(&b.riemann_lower) < 1e-12 * scale);
        let d = normal_tensor_d(&b);
        prop_assert!(d.symmetry_residual() < 1e-13 * scale);
        prop_assert!(d.cyclic_residual() < 1e-12 * scale);
        prop_assert!(d.reconstruction_residual(&b.riemann_up) < 1e-10 * scale);
    }

    #[test]
    fn cone_points_are_null(a in -0.5f64..0.5, b in -0.5f64..0.5, z in prop::collection::vec(-2.0f64..2.0, 4), n_minus in 0usize..=2) {
        let sig = Signature::new(n_minus, 4 - n_minus).unwrap();
        let sigma = ScalarField::parse(&format!("{a}*sin(x1) + {b}*x2*x4"), 4).unwrap();
        let y = cone_embed(&sigma, sig, &z).unwrap();
        prop_assert!(null_residual(sig, &y) < 1e-12);
    }

    #[test]
    fn angular_momentum_square_is_rotation_invariant(
        z in prop::collection::vec(-1.0f64..1.0, 3),
        zd in prop::collection::vec(-1.0f64..1.0, 3),
        theta in -3.0f64..3.0,
    ) {
        let sig = Signature::riemannian(3);
        let rot = |v: &[f64]| vec![theta.cos() * v[0] - theta.sin() * v[1], theta.sin() * v[0] + theta.cos() * v[1], v[2]];
        let before = angular_momentum(&z, &zd).unwrap().sum_squares(sig);
        let after = angular_momentum(&rot(&z), &rot(&zd)).unwrap().sum_squares(sig);
        prop_assert!((before - after).abs() < 1e-12 * before.abs().max(1.0));
    }

    #[test]
    fn angular_momentum_square_is_boost_invariant(
        z in prop::collection::vec(-1.0f64..1.0, 3),
        zd in prop::collection::vec(-1.0f64..1.0, 3),
        rapidity in -1.5f64..1.5,
    ) {
        let sig = Signature::lorentzian(3);
        let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
        let boost = |v: &[f64]| vec![ch * v[0] + sh * v[1], sh * v[0] + ch * v[1], v[2]];
        let before = angular_momentum(&z, &zd).unwrap().sum_squares(sig);
        let after = angular_momentum(&boost(&z), &boost(&zd)).unwrap().sum_squares(sig);
        prop_assert!((before - after).abs() < 1e-11 * before.abs().max(1.0));
    }

    #[test]
    fn projected_commutators_are_tangent_and_match_generators(
        dir in prop::collection::vec(-1.0f64..1.0, 3),
        u in prop::collection::vec(-1.0f64..1.0, 3),
        v in prop::collection::vec(-1.0f64..1.0, 3),
        radius in 0.5f64..3.0,
    ) {
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(norm > 0.1);
        let x: Vec<f64> = dir.iter().map(|d| radius * d / norm).collect();
        let model = HypersurfaceModel::sphere(2, radius).unwrap();
        let com = projected_commutator(&model, &u, &v, &x).unwrap();
        prop_assert!(com.normal_component < 1e-12);
        let g = so_generators(3, 0).unwrap();
        let w = generator_vector_field(&g, &u, &v, &x);
        for (a, b) in w.iter().zip(&com.value) {
            prop_assert!((a / (radius * radius) - b).abs() < 1e-12);
        }
    }
}
