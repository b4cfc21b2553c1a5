use proptest::prelude::*;
use res112::bifurcations::f_quartic;
use res112::critical_values::{classify_fiber, ComponentKind};
use res112::model::{t2_action, ModelParams};
use res112::monodromy::*;
use res112::reduced_dynamics::{equilibria, ReducedParams, Stability};
use res112::Error;

fn v(mu: f64, ell: f64, h: f64) -> LoopValue {
    LoopValue::new(mu, 0.5 * (mu + ell), h)
}

fn params(delta: f64) -> ModelParams {
    ModelParams::with_detuning(delta, 1.0)
}

fn cfg() -> MonodromyConfig {
    MonodromyConfig::default()
}

fn run(delta: f64, values: &[LoopValue]) -> Result<LoopWinding, Error> {
    monodromy_vector(values, &params(delta), &cfg())
}

fn two_component_points(w: &LoopWinding, delta: f64) -> usize {
    let rp = ReducedParams::new(delta, 1.0);
    w.track
        .iter()
        .filter(|t| {
            let r = classify_fiber(t.value.casimirs(), rp, t.value.h).unwrap();
            r.count(ComponentKind::Torus3) == 2
        })
        .count()
}

/// Period ∫ dR/√(−F) over the R-interval, by Gauss–Chebyshev quadrature of
/// the smooth factor left after removing the two simple roots.
fn quadrature_period(value: LoopValue, delta: f64, iv: (f64, f64)) -> f64 {
    let q = f_quartic(value.h, ReducedParams::new(delta, 1.0), value.casimirs());
    let (m, w) = (0.5 * (iv.0 + iv.1), 0.5 * (iv.1 - iv.0));
    let n = 400;
    let mut sum = 0.0;
    for k in 0..n {
        let x = ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
        let r = m + w * x;
        let g = -q.eval(r) / ((r - iv.0) * (iv.1 - r));
        sum += 1.0 / g.sqrt();
    }
    std::f64::consts::PI * sum / n as f64
}

#[test]
fn generators_at_zero_detuning() {
    let p = params(0.0);
    let mut total = MonodromyVector::ZERO;
    let mut product = MonodromyMatrix::IDENTITY;
    for g in Generator::ALL {
        let (_, w) = generator_vector(g, &p, 64, &cfg()).unwrap();
        assert_eq!(w.vector, g.expected(), "{}", g.name());
        assert!((w.winding.0 - w.winding.0.round()).abs() < 0.02);
        assert!((w.winding.1 - w.winding.1.round()).abs() < 0.02);
        assert!(w.max_step < 0.25);
        total = total + w.vector;
        product = compose(product, to_matrix(w.vector));
    }
    assert_eq!(total, MonodromyVector::ZERO);
    assert_eq!(product, MonodromyMatrix::IDENTITY);
}

#[test]
fn generators_in_island_regimes() {
    for delta in [-1.0, 0.3] {
        for g in Generator::ALL {
            let (_, w) = generator_vector(g, &params(delta), 64, &cfg()).unwrap();
            assert_eq!(w.vector, g.expected(), "δ = {delta}, {}", g.name());
        }
    }
}

#[test]
fn only_the_c12_generator_above_the_unstable_range() {
    let p = params(1.5);
    let (_, w) = generator_vector(Generator::Gamma3, &p, 64, &cfg()).unwrap();
    assert_eq!(w.vector, MonodromyVector::new(-1, 0));
    for g in [Generator::Gamma1, Generator::Gamma2] {
        assert!(matches!(generator_loop(g, &p, 64), Err(Error::Unsupported(_))));
    }
}

#[test]
fn loops_through_elliptic_faces_at_negative_detuning() {
    // Around C12 at ℓ = −2, detouring into the two-component region through
    // its elliptic face and back out again.
    let mut c12 = vec![
        v(0.15, -2.0, 0.0),
        v(0.0, -2.0, 0.5),
        v(-0.15, -2.0, 0.0),
        v(0.0, -2.0, -0.5),
        v(0.15, -2.0, -0.1),
        v(0.15, -1.0, 0.05),
        v(0.05, -0.3, 0.0),
        v(0.05, -0.3, -0.040),
        v(0.05, -0.15, -0.055),
        v(0.05, -0.15, 0.0),
    ];
    c12.reverse();
    let w = run(-1.0, &polygon_loop(&c12, 40)).unwrap();
    assert_eq!(w.vector, Generator::Gamma3.expected());
    assert!(two_component_points(&w, -1.0) > 10);

    let q = |dl: f64, dh: f64| v(-0.5, 0.5 + dl, -0.375 + dh);
    let c13 = vec![
        q(0.2, 0.0),
        q(0.0, 0.15),
        q(-0.2, 0.0),
        v(-0.05, -0.3, 0.0),
        v(-0.05, -0.3, -0.04),
        v(-0.05, -0.15, -0.055),
        v(-0.05, -0.15, 0.0),
        q(0.0, -0.15),
    ];
    let w = run(-1.0, &polygon_loop(&c13, 40)).unwrap();
    assert_eq!(w.vector, Generator::Gamma2.expected());
    assert!(two_component_points(&w, -1.0) > 10);
}

#[test]
fn loops_through_elliptic_faces_at_positive_detuning() {
    let mut c12 = vec![
        v(0.1, -0.5, 0.0),
        v(0.0, -0.5, 0.3),
        v(-0.1, -0.5, 0.0),
        v(0.0, -0.5, -0.2),
        v(0.1, -0.5, -0.05),
        v(0.01, -0.01, 0.001),
        v(0.01, 0.0, 0.004),
        v(0.01, 0.015, 0.003),
        v(0.05, 0.0, -0.02),
    ];
    c12.reverse();
    let w = run(0.3, &polygon_loop(&c12, 40)).unwrap();
    assert_eq!(w.vector, Generator::Gamma3.expected());
    assert!(two_component_points(&w, 0.3) > 10);

    let q = |dl: f64, dh: f64| v(-0.7, 0.7 + dl, 0.455 + dh);
    let c13 = vec![
        q(0.06, 0.0),
        q(0.0, 0.008),
        q(-0.06, 0.0),
        v(-0.3, 0.2, 0.1),
        v(-0.01, -0.01, 0.001),
        v(-0.01, 0.0, 0.004),
        v(-0.01, 0.015, 0.003),
        v(-0.3, 0.4, 0.1),
        q(0.0, -0.008),
    ];
    let w = run(0.3, &polygon_loop(&c13, 40)).unwrap();
    assert_eq!(w.vector, Generator::Gamma2.expected());
    assert!(two_component_points(&w, 0.3) > 10);
}

#[test]
fn crossing_a_hyperbolic_face_is_rejected() {
    // Enters the two-component region from below, through its hyperbolic face.
    let c12 = vec![
        v(0.15, -2.0, 0.0),
        v(0.0, -2.0, 0.5),
        v(-0.15, -2.0, 0.0),
        v(0.0, -2.0, -0.5),
        v(0.15, -2.0, -0.1),
        v(0.15, -1.0, 0.05),
        v(0.05, -0.3, 0.0),
        v(0.05, -0.3, -0.040),
        v(0.05, -0.15, -0.055),
    ];
    assert!(matches!(run(-1.0, &polygon_loop(&c12, 40)), Err(Error::CriticalValue(_))));

    let q = |dl: f64, dh: f64| v(-0.7, 0.7 + dl, 0.455 + dh);
    let c13 = vec![
        q(0.06, 0.0),
        q(0.0, 0.008),
        q(-0.06, 0.0),
        v(-0.01, -0.01, 0.001),
        v(-0.01, 0.0, 0.004),
        v(-0.01, 0.015, 0.003),
        v(-0.3, 0.3, 0.0),
        q(0.0, -0.008),
    ];
    assert!(matches!(run(0.3, &polygon_loop(&c13, 40)), Err(Error::CriticalValue(_))));
}

#[test]
fn contractible_loop_has_no_monodromy() {
    // Small circle at δ = 0 away from every thread.
    let values: Vec<LoopValue> = (0..=48)
        .map(|k| {
            let phi = std::f64::consts::TAU * (k % 48) as f64 / 48.0;
            LoopValue::new(0.4, 0.6 + 0.05 * phi.cos(), 1.0 + 0.1 * phi.sin())
        })
        .collect();
    let w = run(0.0, &values).unwrap();
    assert_eq!(w.vector, MonodromyVector::ZERO);
}

#[test]
fn reversing_a_loop_negates_the_vector() {
    let lp = generator_loop(Generator::Gamma1, &params(0.0), 64).unwrap();
    let mut rev = lp.values.clone();
    rev.reverse();
    let w = run(0.0, &rev).unwrap();
    assert_eq!(w.vector, -Generator::Gamma1.expected());
}

#[test]
fn loops_of_other_radii_and_planes_agree() {
    let lp = generator_loop(Generator::Gamma2, &params(0.0), 64).unwrap();
    let (rs, rh) = lp.radii;
    for scale in [0.5, 0.25] {
        let values: Vec<LoopValue> = (0..=40)
            .map(|k| {
                let phi = std::f64::consts::TAU * (k % 40) as f64 / 40.0;
                LoopValue::new(-lp.ell_c, scale * rs * phi.cos(), lp.h_c + scale * rh * phi.sin())
            })
            .collect();
        assert_eq!(run(0.0, &values).unwrap().vector, MonodromyVector::new(0, 1));
    }
    // Tilted plane: μ varies along with ι.
    let values: Vec<LoopValue> = (0..=40)
        .map(|k| {
            let phi = std::f64::consts::TAU * (k % 40) as f64 / 40.0;
            let s = 0.5 * rs * phi.cos();
            LoopValue::new(-lp.ell_c + 0.3 * s, s, lp.h_c + 0.5 * rh * phi.sin())
        })
        .collect();
    assert_eq!(run(0.0, &values).unwrap().vector, MonodromyVector::new(0, 1));
}

#[test]
fn generators_with_full_normal_form_coefficients() {
    let p = ModelParams {
        alpha: 0.3,
        beta: -0.2,
        lambda1: 0.05,
        lambda2: -0.04,
        gamma1: 0.1,
        gamma2: -0.05,
        gamma3: 0.07,
        ..ModelParams::with_detuning(0.0, 1.0)
    };
    for g in Generator::ALL {
        let (_, w) = generator_vector(g, &p, 64, &cfg()).unwrap();
        assert_eq!(w.vector, g.expected(), "{}", g.name());
    }
}

#[test]
fn loop_must_be_closed() {
    let values = vec![v(0.1, 0.5, 1.0), v(0.2, 0.5, 1.0), v(0.2, 0.6, 1.0)];
    assert!(matches!(run(0.0, &values), Err(Error::Invalid(_))));
}

#[test]
fn rotation_numbers_close_the_orbit() {
    let value = v(0.3, 0.2, 0.5);
    let r = rotation_numbers(value, ComponentSelector::Highest, &params(0.0), &cfg()).unwrap();
    assert!((0.0..1.0).contains(&r.theta_n) && (0.0..1.0).contains(&r.theta_j));
    assert!(r.t_red > 0.0);
    assert!(r.closure_residual <= 1e-8, "{}", r.closure_residual);
    assert!(r.phase_error <= 1e-6);
    assert!(r.energy_drift <= 1e-9, "{}", r.energy_drift);
    assert!(r.momentum_drift <= 1e-9);
}

#[test]
fn reduced_period_matches_quadrature() {
    for (delta, value) in [(0.0, v(0.3, 0.2, 0.5)), (-1.0, v(0.05, -0.3, -0.02)), (0.3, v(-0.2, 0.4, 0.8))] {
        let r = rotation_numbers(value, ComponentSelector::Highest, &params(delta), &cfg()).unwrap();
        let t = quadrature_period(value, delta, r.r_interval);
        assert!((r.t_red - t).abs() <= 1e-7 * t, "δ = {delta}: {} vs {t}", r.t_red);
    }
}

#[test]
fn start_point_does_not_matter() {
    let p = params(0.0);
    let value = v(0.3, 0.2, 0.5);
    let start = fiber_start(value, ComponentSelector::Highest, &p).unwrap();
    let base = rotation_numbers_from(&start, &p, &cfg()).unwrap();
    for (s, t) in [(0.25, 0.0), (0.1, 0.7), (0.93, 0.41)] {
        let r = rotation_numbers_from(&t2_action(&start, s, t), &p, &cfg()).unwrap();
        assert!((r.theta_n - base.theta_n).abs() < 1e-7);
        assert!((r.theta_j - base.theta_j).abs() < 1e-7);
    }
}

#[test]
fn both_components_inside_the_tetrahedron() {
    let (mu, ell) = (0.05, -0.3);
    let rp = ReducedParams::new(-1.0, 1.0);
    let eq = equilibria(res112::model::CasimirValues::new(mu, ell), rp).unwrap();
    let e = eq.iter().find(|e| e.stability == Stability::Elliptic && e.r < 0.1).unwrap();
    let hyp = eq.iter().find(|e| e.stability == Stability::Hyperbolic).unwrap();
    let inside = v(mu, ell, 0.5 * (e.h + hyp.h));
    for sel in [ComponentSelector::Lowest, ComponentSelector::Highest] {
        let r = rotation_numbers(inside, sel, &params(-1.0), &cfg()).unwrap();
        assert!(r.closure_residual <= 1e-8);
    }
    // The small component shrinks onto the elliptic circle; its period tends
    // to π/√(F″/2) there.
    let f2 = f_quartic(e.h, rp, inside.casimirs()).deriv(2, e.r);
    let limit = std::f64::consts::PI / (0.5 * f2).sqrt();
    let mut errs = Vec::new();
    for eps in [1e-4, 1e-5, 1e-6] {
        let r = rotation_numbers(v(mu, ell, e.h - eps), ComponentSelector::Lowest, &params(-1.0), &cfg()).unwrap();
        errs.push((r.t_red - limit).abs() / limit);
    }
    assert!(errs[2] < 1e-3, "{errs:?}");
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn matrix_group_law() {
    let a = to_matrix(MonodromyVector::new(1, -1));
    let b = to_matrix(MonodromyVector::new(0, 1));
    assert_eq!(compose(a, b), to_matrix(MonodromyVector::new(1, 0)));
    assert_eq!(
        to_matrix(MonodromyVector::new(-1, 0)).inverse().unwrap(),
        to_matrix(MonodromyVector::new(1, 0))
    );
}

proptest! {
    #[test]
    fn matrices_add_and_invert(a in -50i64..50, b in -50i64..50, c in -50i64..50, d in -50i64..50) {
        let (u, w) = (MonodromyVector::new(a, b), MonodromyVector::new(c, d));
        prop_assert_eq!(compose(to_matrix(u), to_matrix(w)), to_matrix(u + w));
        prop_assert_eq!(to_matrix(u).determinant(), 1);
        prop_assert_eq!(to_matrix(u).inverse().unwrap(), to_matrix(-u));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn rotation_numbers_are_fiber_invariants(s in 0.0f64..1.0, t in 0.0f64..1.0, h in 0.2f64..0.8) {
        let p = params(0.0);
        let value = v(0.3, 0.2, h);
        let start = fiber_start(value, ComponentSelector::Highest, &p).unwrap();
        let base = rotation_numbers_from(&start, &p, &cfg()).unwrap();
        let r = rotation_numbers_from(&t2_action(&start, s, t), &p, &cfg()).unwrap();
        let d = |x: f64| (x - x.round()).abs();
        prop_assert!(d(r.theta_n - base.theta_n) < 1e-7);
        prop_assert!(d(r.theta_j - base.theta_j) < 1e-7);
    }
}
