use std::collections::BTreeSet;

use proptest::prelude::*;
use res112::bifurcations::catalog::{sample_args, Sign};
use res112::bifurcations::{
    a0_root, catalog_point, catalog_point_kappa0, classify_multiple_root, f_quartic,
    families_present, solve_bifurcations_numeric, tag_event, EventKind, Family, FamilyArg,
    OracleConfig, OracleMode,
};
use res112::model::{to_unit_kappa, CasimirValues, ScaledValues};
use res112::reduced_dynamics::ReducedParams;
use res112::reduced_space::r_min;

const SWEEP: [f64; 6] = [-1.0, 0.3, 0.48, 0.52, 0.75, 1.5];

fn check_sweep(mode: OracleMode) {
    let cfg = OracleConfig { mode, ..Default::default() };
    let rep = solve_bifurcations_numeric(1.0, &SWEEP, &cfg).unwrap();
    assert!(rep.failures.is_empty(), "{:?}", rep.failures);
    assert!(rep.unmatched.is_empty(), "unmatched: {:?}", &rep.unmatched[..rep.unmatched.len().min(5)]);
    for &l in &SWEEP {
        let found: BTreeSet<Family> = rep
            .events
            .iter()
            .filter(|e| e.lambda == l)
            .filter(|e| tag_event(e, 1e-6).is_some())
            .filter_map(|e| e.family)
            .collect();
        for fam in families_present(l, 1.0) {
            assert!(found.contains(&fam), "{mode:?}: λ={l} missing {fam}; found {found:?}");
        }
    }
}

#[test]
fn oracle_recovers_catalog_by_factorization() {
    check_sweep(OracleMode::Factorization);
}

#[test]
fn oracle_recovers_catalog_by_newton() {
    check_sweep(OracleMode::Newton);
}

#[test]
fn oracle_events_scale_with_kappa() {
    let cfg = OracleConfig::default();
    let one = solve_bifurcations_numeric(1.0, &SWEEP, &cfg).unwrap();
    let halves: Vec<f64> = SWEEP.iter().map(|l| l / 2.0).collect();
    let two = solve_bifurcations_numeric(2.0, &halves, &cfg).unwrap();
    assert!(two.unmatched.is_empty());
    assert_eq!(one.events.len(), two.events.len());
    for ev in &two.events {
        let v = to_unit_kappa(
            ScaledValues { lambda: ev.lambda, mu: ev.mu, ell: ev.ell, r: ev.a, x: 0.0, y: 0.0, h: ev.h },
            2.0,
        )
        .unwrap();
        let d = one
            .events
            .iter()
            .filter(|e| e.lambda == v.lambda)
            .map(|e| (e.mu - v.mu).abs().max((e.ell - v.ell).abs()).max((e.a - v.r).abs()))
            .fold(f64::INFINITY, f64::min);
        assert!(d <= 1e-8, "{ev:?} maps {d:e} away");
    }
}

#[test]
fn kappa0_sweep_has_no_cusp_or_supercritical() {
    let cfg = OracleConfig { mode: OracleMode::Newton, ..Default::default() };
    let lambdas = [-2.0, -1.0, -0.3, 0.3, 1.0, 2.0];
    let rep = solve_bifurcations_numeric(0.0, &lambdas, &cfg).unwrap();
    assert!(!rep.events.is_empty());
    assert!(rep.unmatched.is_empty(), "{:?}", &rep.unmatched[..rep.unmatched.len().min(5)]);
    for ev in &rep.events {
        assert!(
            matches!(ev.kind, EventKind::CentreSaddle | EventKind::HopfSub),
            "{ev:?}"
        );
    }
}

#[test]
fn degenerate_points_are_quadruple_roots() {
    for (fam, expect) in [
        (Family::HhDeg1, (0.5, 0.5, 0.5)),
        (Family::HhDeg2, (0.5, -0.5, 0.5)),
        (Family::HhDeg3, (1.0, 0.0, -1.0)),
    ] {
        let p = catalog_point(fam, FamilyArg::Point, 1.0).unwrap();
        assert_eq!((p.lambda, p.mu, p.ell), expect);
        let ev = p.event();
        let q = ev.quartic();
        assert_eq!(q.deriv(4, p.a), 6.0);
        assert!((p.a - (1.0 - p.lambda)).abs() <= 1e-10);
        assert!((p.b.unwrap() - p.a).abs() <= 1e-10);
        assert!(q.deriv(3, p.a).abs() <= 1e-10);
    }
}

#[test]
fn kappa0_catalog_is_triple_root() {
    for fam in Family::KAPPA0 {
        for arg in sample_args(fam, 0.0, 100) {
            let p = catalog_point_kappa0(fam, arg).unwrap();
            let ev = p.event();
            assert!(ev.scaled_residual() <= 1e-9, "{p:?}");
            let kind = classify_multiple_root(ev.a, &ev.quartic(), ev.casimirs()).unwrap();
            assert_eq!(kind, fam.kind());
        }
    }
}

#[test]
fn cs_closure_limits_to_hopf_points() {
    // CS2 and CS3 meet at HHsub1 as a tends to the upper end of both ranges.
    let l: f64 = 0.3;
    let top = 1.0 - l - (1.0 - 2.0 * l).sqrt();
    let a = top * (1.0 - 1e-9);
    let hh = catalog_point(Family::HhSub1, FamilyArg::Curve { lambda: l }, 1.0).unwrap();
    let cs2 = catalog_point(Family::Cs2, FamilyArg::Surface { lambda: l, a, sign: Sign::Plus }, 1.0)
        .unwrap();
    let cs3 = catalog_point(Family::Cs3, FamilyArg::Surface { lambda: l, a, sign: Sign::Plus }, 1.0)
        .unwrap();
    for p in [cs2, cs3] {
        assert!((p.mu - hh.mu).abs() < 1e-6 && (p.ell - hh.ell).abs() < 1e-6, "{p:?} vs {hh:?}");
    }
    // κ = 0: the CS families end on the Hopf line as a → λ²/2.
    let l = 1.3;
    let a = 0.5 * l * l * (1.0 - 1e-12);
    let hh = catalog_point_kappa0(Family::HhSub1K0, FamilyArg::Curve { lambda: l }).unwrap();
    let cs = catalog_point_kappa0(Family::Cs2K0, FamilyArg::Surface { lambda: l, a, sign: Sign::Plus })
        .unwrap();
    assert!((cs.mu - hh.mu).abs() < 1e-5 && (cs.ell - hh.ell).abs() < 1e-5);
}

#[test]
fn cusp_edges_bound_cs4() {
    let l = 0.75;
    let edge = catalog_point(Family::Cusp2, FamilyArg::Curve { lambda: l }, 1.0).unwrap();
    let a = edge.a * (1.0 + 1e-9);
    let cs4 = catalog_point(Family::Cs4, FamilyArg::Surface { lambda: l, a, sign: Sign::Plus }, 1.0)
        .unwrap();
    assert!((cs4.mu - edge.mu).abs() < 1e-6 && (cs4.ell - edge.ell).abs() < 1e-6);
}

#[test]
fn a0_tends_to_zero_at_upper_end() {
    assert!(a0_root(1.0 - 1e-6, 1.0).unwrap() < 1e-5);
    assert!(a0_root(1.0, 1.0).is_err());
    assert!(a0_root(0.0, 1.0).is_err());
}

proptest! {
    #[test]
    fn fourth_derivative_is_six_kappa_squared(
        h in -5.0..5.0f64, l in -3.0..3.0f64, k in -3.0..3.0f64,
        mu in -3.0..3.0f64, ell in -3.0..3.0f64, r in -5.0..5.0f64,
    ) {
        let q = f_quartic(h, ReducedParams::new(l, k), CasimirValues::new(mu, ell));
        prop_assert!((q.deriv(4, r) - 6.0 * k * k).abs() <= 1e-12 * (1.0 + k * k));
        let direct = (h - l * r - 0.5 * k * r * r).powi(2) - (r * r - mu * mu) * (r - ell);
        prop_assert!((q.eval(r) - direct).abs() <= 1e-13 * q.magnitude(r).max(1.0));
    }

    #[test]
    fn quartic_is_nonnegative_at_the_tip(
        h in -5.0..5.0f64, l in -3.0..3.0f64, k in -3.0..3.0f64,
        mu in -3.0..3.0f64, ell in -3.0..3.0f64,
    ) {
        let cas = CasimirValues::new(mu, ell);
        let q = f_quartic(h, ReducedParams::new(l, k), cas);
        let r = r_min(cas);
        prop_assert!(q.eval(r) >= -1e-12 * q.magnitude(r).max(1.0));
    }
}
