mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use truncspec::airy::{ai_prime_zero, ai_zero, model_nu};
use truncspec::asymptotics::{branch_1d, AsymptoticBranch, Orientation, Profile};
use truncspec::expr::{Exponent, Func, Node, PotentialExpr};
use truncspec::operator::{assemble, Grid1D, OperatorSpec, TridiagComplex};
use truncspec::verify::{match_and_fit, pt_symmetry_defect, SweepPoint, CRITICAL_GRADIENT_EPS};
use truncspec::{Boundary, C64};

fn leaf() -> impl Strategy<Value = Node> {
    prop_oneof![
        3 => Just(Node::Var("x".into())),
        2 => (-3.0..3.0f64).prop_map(|v| Node::constant((v * 100.0).round() / 100.0, 0.0)),
        1 => (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Node::constant(re, im)),
        1 => (0.2..4.0f64).prop_map(|k| Node::Pow(
            Box::new(Node::Call(Func::Abs, Box::new(Node::Var("x".into())))),
            Exponent::new(k),
        )),
    ]
}

/// Smooth expressions in `x`, valid away from the origin.
fn expression() -> impl Strategy<Value = Node> {
    leaf().prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::Div(
                Box::new(a),
                Box::new(Node::Call(Func::Exp, Box::new(b))),
            )),
            (inner.clone(), 0u8..3).prop_map(|(a, f)| Node::Call([Func::Exp, Func::Sin, Func::Cos][f as usize], Box::new(a))),
            (inner, -2i32..5).prop_map(|(a, k)| Node::Pow(Box::new(a), Exponent::new(k as f64))),
        ]
    })
}

fn sample_point() -> impl Strategy<Value = f64> {
    prop_oneof![0.3..2.0f64, -2.0..-0.3f64]
}

fn pt_polynomial() -> impl Strategy<Value = PotentialExpr> {
    prop::collection::vec(-2.0..2.0f64, 4).prop_map(|c| {
        let text = format!("{} + ({})*i*x + {}*x^2 + ({})*i*x^3", c[0], c[1], c[2].abs(), c[3]);
        PotentialExpr::parse(&text).unwrap()
    })
}

fn real_polynomial() -> impl Strategy<Value = PotentialExpr> {
    prop::collection::vec(-2.0..2.0f64, 4).prop_map(|c| {
        PotentialExpr::parse(&format!("{} + ({})*x + ({})*x^2 + ({})*x^3", c[0], c[1], c[2], c[3])).unwrap()
    })
}

fn random_tridiagonal() -> impl Strategy<Value = TridiagComplex> {
    (5usize..40).prop_flat_map(|n| {
        prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), n).prop_map(move |d| {
            let off = vec![C64::new(-1.0, 0.0); n - 1];
            TridiagComplex::new(off.clone(), d.into_iter().map(|(re, im)| C64::new(re, im)).collect(), off)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printing_then_parsing_is_identity(node in expression()) {
        let e = PotentialExpr::from_node(node).folded();
        let again = PotentialExpr::parse(&e.to_string()).unwrap().folded();
        prop_assert_eq!(e, again);
    }

    #[test]
    fn derivative_matches_central_differences(node in expression(), x in sample_point()) {
        let e = PotentialExpr::from_node(node);
        let b = truncspec::expr::Bindings::new();
        let value = e.eval_at("x", x, &b);
        let slope = e.differentiate("x").eval_at("x", x, &b);
        prop_assume!(matches!((&value, &slope), (Ok(v), Ok(d)) if v.norm() < 1e6 && d.norm() < 1e6));
        common::check_derivative(&e, x).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn scaled_potential_gives_scaled_matrix(
        q in pt_polynomial(),
        length in 0.5..6.0f64,
        sigma in 0.2..5.0f64,
        n in 3usize..80,
    ) {
        common::check_scaling_similarity(&q, length, sigma, n).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn reflected_potential_gives_reversed_matrix(q in pt_polynomial(), s in 0.5..5.0f64, n in 3usize..80) {
        common::check_reversal(&q, s, n).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn real_potential_gives_symmetric_matrix(q in real_polynomial(), s in 0.5..5.0f64, n in 3usize..80) {
        common::check_hermitian(&q, s, n).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn pt_symmetric_spectrum_is_conjugation_closed(q in pt_polynomial(), s in 0.5..3.0f64, n in 4usize..50) {
        let spec = OperatorSpec::new(q, (-s, s)).unwrap();
        let a = assemble(&spec, &Grid1D::new(-s, s, n).unwrap()).unwrap();
        common::check_conjugation_closure(&a).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn real_symmetric_spectrum_is_real(q in real_polynomial(), s in 0.5..4.0f64, n in 3usize..60) {
        let a = assemble(&OperatorSpec::new(q, (-s, s)).unwrap(), &Grid1D::new(-s, s, n).unwrap()).unwrap();
        common::check_real_spectrum(&a).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn spectrum_scales_with_matrix(a in random_tridiagonal(), sigma2 in 0.25..16.0f64) {
        common::check_similarity_invariance(&a, sigma2).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn graph_norm_constant_decreases(
        eps in 0.0..CRITICAL_GRADIENT_EPS,
        eps1 in 1e-6..0.5f64,
        step in 1e-4..0.05f64,
    ) {
        prop_assume!(truncspec::verify::graph_norm_constant(eps, eps1).is_ok());
        common::check_graph_norm(eps, eps1, step).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn rotation_preserves_modulus(k in 1usize..=20, omega in 0.0..PI, neumann in any::<bool>()) {
        let (bc, mu) = if neumann {
            (Boundary::Neumann, ai_prime_zero(k).unwrap())
        } else {
            (Boundary::Dirichlet, ai_zero(k).unwrap())
        };
        let nu = model_nu(k, omega, bc).unwrap();
        prop_assert!((nu.norm() - mu.abs()).abs() <= 4.0 * f64::EPSILON * mu.abs());
    }

    #[test]
    fn airy_ode_holds(r in 0.0..6.0f64, theta in -PI..PI) {
        let z = C64::from_polar(r, theta);
        let residual = common::airy_ode_residual(z).map_err(TestCaseError::fail)?;
        prop_assert!(residual <= 1e-9, "{} at {}", residual, z);
    }

    #[test]
    fn orientation_flip_conjugates_prediction(alpha in 1.0..4.0f64, s in 2.0..20.0f64, k in 1usize..6) {
        let profile = Profile::parse(&format!("abs(x)^{alpha}")).unwrap();
        let left = branch_1d(&profile, k, Boundary::Dirichlet, Orientation::Left).unwrap();
        let right = branch_1d(&profile, k, Boundary::Dirichlet, Orientation::Right).unwrap();
        prop_assert_eq!(right.leading(s).unwrap(), left.leading(s).unwrap().conj());
        let (lead, shift) = (left.leading(s).unwrap(), left.shift(s).unwrap());
        let bound = 4.0 * f64::EPSILON * (lead.norm() + shift.norm());
        prop_assert!((lead - shift - left.scale(s).unwrap() * left.nu_eff()).norm() <= bound);
    }

    #[test]
    fn matching_is_a_partial_injection(
        values in prop::collection::vec((-4.0..4.0f64, -4.0..4.0f64), 0..12),
        centers in prop::collection::vec((-4.0..4.0f64, -4.0..4.0f64), 1..6),
        window in 0.1..3.0f64,
    ) {
        let eigenvalues: Vec<C64> = values.into_iter().map(|(re, im)| C64::new(re, im)).collect();
        let branches: Vec<AsymptoticBranch> = centers
            .iter()
            .enumerate()
            .map(|(j, &(re, im))| {
                AsymptoticBranch::new(j + 1, C64::new(re, im), false, Arc::new(|_| Ok(1.0)), Arc::new(|_| Ok(C64::new(0.0, 0.0))))
                    .with_label(format!("b{j}"))
            })
            .collect();
        let report = match_and_fit(&[SweepPoint { parameter: 1.0, eigenvalues: eigenvalues.clone() }], &branches, window);
        let matches = &report.points[0].matches;
        for m in matches {
            let used = matches.iter().filter(|o| o.lambda == m.lambda).count();
            let available = eigenvalues.iter().filter(|z| **z == m.lambda).count();
            prop_assert!(used <= available);
            prop_assert_eq!(matches.iter().filter(|o| o.branch == m.branch).count(), 1);
            prop_assert!((m.lambda - m.predicted).norm() <= window);
        }
    }

    #[test]
    fn conjugation_closed_sets_have_zero_defect(values in prop::collection::vec((-4.0..4.0f64, -4.0..4.0f64), 0..10)) {
        let mut set: Vec<C64> = values.iter().map(|&(re, im)| C64::new(re, im)).collect();
        set.extend(values.iter().map(|&(re, im)| C64::new(re, -im)));
        prop_assert_eq!(pt_symmetry_defect(&set), 0.0);
    }
}

#[test]
fn zeros_interlace() {
    let mut previous = 0.0;
    for k in 1..=20 {
        let (mu, mu_prime) = (ai_zero(k).unwrap(), ai_prime_zero(k).unwrap());
        assert!(mu < mu_prime && mu_prime < previous, "k = {k}");
        previous = mu;
    }
}

#[test]
fn graph_norm_vanishes_at_critical_gradient() {
    common::check_graph_norm_boundary().unwrap();
}

#[test]
fn trace_sums_settle_across_truncations() {
    common::check_trace_cauchy().unwrap();
}

#[test]
fn resolvent_gap_shrinks_with_truncation() {
    common::check_resolvent_gap_decreases().unwrap();
}
