use num_complex::Complex64;
use proptest::prelude::*;
use res112::model::*;
use res112::reduced_dynamics::*;
use res112::reduced_space::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn coord() -> impl Strategy<Value = f64> {
    -3.0f64..3.0
}

fn triple() -> impl Strategy<Value = [f64; 3]> {
    [coord(), coord(), coord()]
}

/// A point on the reduced space at height `dr` above the tip, at angle `phi`.
fn on_surface(cas: CasimirValues, dr: f64, phi: f64) -> InvariantPoint {
    let r = r_min(cas) + dr;
    let s = section_sq(r, cas).max(0.0).sqrt();
    InvariantPoint::new(r, s * phi.cos(), s * phi.sin())
}

#[test]
fn single_mode_states() {
    let only3 = FullState::from_amplitudes([Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0)]);
    let red = reduce(&only3);
    assert_eq!(isotropy_class(&only3, DEFAULT_EPS_Z), Isotropy::C12);
    assert_eq!((red.n, red.l, red.point.r, red.point.x, red.point.y), (0.0, -2.0, 0.0, 0.0, 0.0));
    assert_eq!(tip_class(red.casimirs(), DEFAULT_EPS_C).kind, TipKind::Cone);
}

#[test]
fn stable_normal_mode_is_the_minimum() {
    // μ = 0, ℓ = −4 with λ outside [−2, 2]: the tip is a stable equilibrium
    // and H increases away from it
    for lambda in [2.5, 4.0] {
        let cas = CasimirValues::new(0.0, -4.0);
        let rp = ReducedParams::new(lambda, 1.0);
        assert_eq!(h_min(cas, rp).unwrap(), tip_energy(cas, rp));
    }
}

#[test]
fn drift_over_a_thousand_time_units() {
    for &(lambda, mu, ell) in &[(0.0, 0.3, 0.1), (-1.0, 0.05, -0.3), (0.3, -0.2, 0.5), (1.5, 0.0, -1.0)] {
        let cas = CasimirValues::new(mu, ell);
        let start = on_surface(cas, 0.5, 1.2);
        let tr = integrate_orbit(start, cas, ReducedParams::new(lambda, 1.0), 1000.0, 1e-10, false).unwrap();
        assert!(tr.max_syzygy_drift <= 1e-9 && tr.max_energy_drift <= 1e-9, "{lambda} {mu} {ell}: {tr:?}");
    }
}

#[test]
fn period_of_a_small_oscillation() {
    // near a non-degenerate elliptic equilibrium the first return time tends
    // to 2π over the frequency of the linearised flow
    let cas = CasimirValues::new(0.3, 0.1);
    let rp = ReducedParams::new(0.0, 1.0);
    let eq = equilibria(cas, rp)
        .unwrap()
        .into_iter()
        .find(|e| e.stability == Stability::Elliptic)
        .unwrap();
    let period = |eps: f64| {
        let r = eq.r + eps;
        let s = section_sq(r, cas);
        let x = if eq.x < 0.0 { -s.sqrt() } else { s.sqrt() };
        reduced_period(InvariantPoint::new(r, x, 0.0), cas, rp, 1e-12, 200.0).unwrap()
    };
    let (a, b) = (period(1e-3), period(5e-4));
    assert!(rel(a, b) < 1e-3, "{a} {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn oscillator_round_trip(q in triple(), p in triple()) {
        let (x, y) = from_oscillator(q, p);
        let (q2, p2) = to_oscillator(x, y);
        for k in 0..3 {
            prop_assert!((q2[k] - q[k]).abs() <= 1e-14 * (1.0 + q[k].abs()));
            prop_assert!((p2[k] - p[k]).abs() <= 1e-14 * (1.0 + p[k].abs()));
        }
    }

    #[test]
    fn reduction_lies_on_its_reduced_space(q in triple(), p in triple()) {
        let red = reduce(&FullState::from_oscillator(q, p));
        let s = syzygy_residual(red.point, red.casimirs());
        prop_assert!(s.abs() <= 1e-12 * red.point.r.abs().powi(3).max(1.0));
        prop_assert!(red.point.r >= r_min(red.casimirs()) - 1e-12);
        prop_assert!(rel(red.l, 2.0 * red.j - red.n) <= 1e-15);
    }

    #[test]
    fn reduction_is_invariant_under_the_torus(q in triple(), p in triple(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let st = FullState::from_oscillator(q, p);
        let moved = t2_action(&st, s, t);
        let (a, b) = (reduce(&st), reduce(&moved));
        for (u, v) in [(a.n, b.n), (a.l, b.l), (a.point.r, b.point.r), (a.point.x, b.point.x), (a.point.y, b.point.y)] {
            prop_assert!(rel(u, v) <= 1e-12, "{u} {v}");
        }
    }

    #[test]
    fn isotropy_is_invariant_under_the_torus(q in triple(), p in triple(), mask in 0u8..8, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let mut z = FullState::from_oscillator(q, p).amplitudes();
        for (k, zk) in z.iter_mut().enumerate() {
            if mask & (1 << k) != 0 {
                *zk = Complex64::new(0.0, 0.0);
            }
        }
        let st = FullState::from_amplitudes(z);
        prop_assert_eq!(isotropy_class(&st, DEFAULT_EPS_Z), isotropy_class(&t2_action(&st, s, t), DEFAULT_EPS_Z));
    }

    #[test]
    fn bracket_is_the_triple_product(r in 0.0f64..3.0, x in coord(), y in coord(), mu in coord(), ell in coord()) {
        let (p, cas) = (InvariantPoint::new(r, x, y), CasimirValues::new(mu, ell));
        let b = structure_matrix(p, cas);
        let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            prop_assert_eq!(b[i][i], 0.0);
            for j in 0..3 {
                prop_assert_eq!(b[i][j], -b[j][i]);
                prop_assert!(rel(b[i][j], triple_product_bracket(e[i], e[j], p, cas)) <= 1e-12);
            }
        }
    }

    #[test]
    fn kappa_scaling_round_trip(v in [coord(), coord(), coord(), coord(), coord(), coord(), coord()], kappa in prop_oneof![0.1f64..5.0, -5.0f64..-0.1]) {
        let sv = ScaledValues { lambda: v[0], mu: v[1], ell: v[2], r: v[3], x: v[4], y: v[5], h: v[6] };
        let back = to_unit_kappa(kappa_scaling(sv, kappa).unwrap(), kappa).unwrap();
        for (a, b) in [(sv.lambda, back.lambda), (sv.mu, back.mu), (sv.ell, back.ell), (sv.r, back.r), (sv.x, back.x), (sv.y, back.y), (sv.h, back.h)] {
            prop_assert!(rel(a, b) <= 1e-14);
        }
    }

    #[test]
    fn tip_class_is_symmetric_in_mu(mu in coord(), ell in coord()) {
        let (a, b) = (tip_class(CasimirValues::new(mu, ell), DEFAULT_EPS_C), tip_class(CasimirValues::new(-mu, ell), DEFAULT_EPS_C));
        prop_assert_eq!(a, b);
        prop_assert!(a.r_min >= 0.0);
    }

    #[test]
    fn field_is_tangent_to_both_level_sets(dr in 0.0f64..3.0, phi in 0.0f64..6.3, mu in coord(), ell in coord(), lambda in coord()) {
        let cas = CasimirValues::new(mu, ell);
        let rp = ReducedParams::new(lambda, 1.0);
        let p = on_surface(cas, dr, phi);
        let f = vector_field(p, cas, rp);
        let (gs, gh) = (syzygy_gradient(p, cas), reduced_h_gradient(p, rp));
        let scale = 1.0 + dot(f, f).sqrt() * (dot(gs, gs).sqrt() + dot(gh, gh).sqrt());
        prop_assert!(dot(f, gs).abs() <= 1e-13 * scale);
        prop_assert!(dot(f, gh).abs() <= 1e-13 * scale);
    }

    #[test]
    fn regular_equilibria_are_stationary(mu in coord(), ell in coord(), lambda in coord()) {
        let cas = CasimirValues::new(mu, ell);
        let rp = ReducedParams::new(lambda, 1.0);
        for e in equilibria(cas, rp).unwrap() {
            if e.stability == Stability::SingularTip {
                continue;
            }
            let p = e.point();
            prop_assert!(syzygy_residual(p, cas).abs() <= 1e-8 * p.r.abs().powi(3).max(1.0));
            let f = vector_field(p, cas, rp);
            let g = syzygy_gradient(p, cas);
            prop_assert!(dot(f, f).sqrt() <= 1e-7 * (1.0 + dot(g, g).sqrt()) * (1.0 + (lambda + p.r).abs()), "{e:?} {f:?}");
        }
    }

    #[test]
    fn h_min_is_below_every_equilibrium(mu in coord(), ell in coord(), lambda in coord()) {
        let cas = CasimirValues::new(mu, ell);
        let rp = ReducedParams::new(lambda, 1.0);
        let hm = h_min(cas, rp).unwrap();
        prop_assert!(hm <= tip_energy(cas, rp));
        for e in equilibria(cas, rp).unwrap() {
            prop_assert!(hm <= e.h);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conservation_along_orbits(dr in 0.05f64..2.0, phi in 0.0f64..6.3, mu in -1.5f64..1.5, ell in -1.5f64..1.5, lambda in -1.5f64..1.5, tol in prop_oneof![Just(1e-8), Just(1e-10)]) {
        let cas = CasimirValues::new(mu, ell);
        let rp = ReducedParams::new(lambda, 1.0);
        let tr = integrate_orbit(on_surface(cas, dr, phi), cas, rp, 50.0, tol, false).unwrap();
        prop_assert!(tr.max_syzygy_drift <= 10.0 * tol, "{tr:?}");
        prop_assert!(tr.max_energy_drift <= 10.0 * tol);
    }
}
