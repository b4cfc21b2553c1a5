//! Numerical solver for the triple-root system F(a) = F′(a) = F″(a) = 0 that
//! does not use the closed-form families. Its events are tagged afterwards
//! by the nearest catalog stratum.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::catalog::tag_event;
use super::{classify_multiple_root, f_quartic, remaining_root, BifurcationEvent};
use crate::error::{Error, Result};
use crate::model::CasimirValues;
use crate::poly;
use crate::reduced_dynamics::ReducedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMode {
    /// Eliminate ℓ and h via the factorization F = (κ²/4)(R−a)³(R−b) and
    /// solve the resulting quadratic in μ² at each a.
    Factorization,
    /// Damped Newton on (F, F′, F″) in the unknowns (h, μ², ℓ) at each a,
    /// seeded over several decades of h.
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub mode: OracleMode,
    /// Number of points in each of the logarithmic and linear a-grids.
    pub grid: usize,
    /// Largest a scanned; defaults to a bound covering every family.
    pub a_max: Option<f64>,
    pub match_radius: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { mode: OracleMode::Factorization, grid: 2000, a_max: None, match_radius: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaFailure {
    pub lambda: f64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// Every event found, tagged where a stratum lies within the match radius.
    pub events: Vec<BifurcationEvent>,
    /// Events with no stratum within the match radius.
    pub unmatched: Vec<BifurcationEvent>,
    /// Admissible solutions too close to a degenerate boundary to classify.
    pub ambiguous: usize,
    pub failures: Vec<LambdaFailure>,
}

/// Scans each λ for triple roots of F in [R_min, ∞). κ = 0 is accepted only
/// in Newton mode.
pub fn solve_bifurcations_numeric(
    kappa: f64,
    lambdas: &[f64],
    cfg: &OracleConfig,
) -> Result<OracleReport> {
    if !kappa.is_finite() {
        return Err(Error::Invalid("kappa must be finite".into()));
    }
    if kappa == 0.0 && cfg.mode == OracleMode::Factorization {
        return Err(Error::Invalid("factorization mode needs κ ≠ 0; use Newton mode".into()));
    }
    if cfg.grid < 2 {
        return Err(Error::Invalid("oracle grid needs at least 2 points".into()));
    }
    type Sweep = Result<(Vec<BifurcationEvent>, usize)>;
    let per: Vec<(f64, Sweep)> = lambdas
        .par_iter()
        .map(|&l| (l, sweep_lambda(kappa, l, cfg)))
        .collect();
    let mut report = OracleReport::default();
    for (lambda, res) in per {
        match res {
            Ok((events, ambiguous)) => {
                report.ambiguous += ambiguous;
                for mut ev in events {
                    match tag_event(&ev, cfg.match_radius) {
                        Some((fam, _)) => ev.family = Some(fam),
                        None => report.unmatched.push(ev),
                    }
                    report.events.push(ev);
                }
            }
            Err(e) => report.failures.push(LambdaFailure { lambda, message: e.to_string() }),
        }
    }
    Ok(report)
}

fn sweep_lambda(k: f64, l: f64, cfg: &OracleConfig) -> Result<(Vec<BifurcationEvent>, usize)> {
    if !l.is_finite() {
        return Err(Error::Invalid(format!("λ = {l} is not finite")));
    }
    let a_max = cfg.a_max.unwrap_or_else(|| default_a_max(k, l));
    let n = cfg.grid;
    let mut grid: Vec<f64> = (0..n)
        .map(|i| a_max * 1e-6_f64.powf(1.0 - i as f64 / (n - 1) as f64))
        .chain((1..=n).map(|i| a_max * i as f64 / n as f64))
        .collect();
    grid.sort_by(f64::total_cmp);
    let mut acc = Acc { k, l, events: Vec::new(), ambiguous: 0 };
    for &a in &grid {
        for (h, m, ell) in solve_at(k, l, a, cfg.mode) {
            acc.push(a, h, m, ell);
        }
    }
    if k != 0.0 {
        // F‴(a) = 0 singles out the cusp position.
        let a_c = 1.0 / (k * k) - l / k;
        if a_c > 0.0 {
            for (h, m, ell) in solve_at(k, l, a_c, cfg.mode) {
                acc.push(a_c, h, m, ell);
            }
        }
    }
    for (a, h, m, ell) in tip_solutions(k, l) {
        acc.push(a, h, m, ell);
    }
    let mut events = acc.events;
    events.sort_by(|x, y| {
        x.a.total_cmp(&y.a).then(x.mu.total_cmp(&y.mu)).then(x.ell.total_cmp(&y.ell))
    });
    events.dedup_by(|x, y| {
        let s = 1e-9 * (1.0 + x.a.abs() + x.ell.abs());
        (x.a - y.a).abs() <= s && (x.mu - y.mu).abs() <= s && (x.ell - y.ell).abs() <= s
    });
    Ok((events, acc.ambiguous))
}

fn default_a_max(k: f64, l: f64) -> f64 {
    if k == 0.0 {
        l * l + 1.0
    } else {
        (4.0 * (1.0 + (k * l).abs()) + 1.0) / (k * k)
    }
}

struct Acc {
    k: f64,
    l: f64,
    events: Vec<BifurcationEvent>,
    ambiguous: usize,
}

impl Acc {
    /// Keeps admissible solutions (μ² ≥ 0, a ≥ R_min) and classifies them.
    fn push(&mut self, a: f64, h: f64, m: f64, ell: f64) {
        if !(a.is_finite() && h.is_finite() && m.is_finite() && ell.is_finite()) {
            return;
        }
        if m < -1e-12 * a * a {
            return;
        }
        let mu = m.max(0.0).sqrt();
        if a < mu.max(ell) - 1e-10 * a.abs().max(1.0) {
            return;
        }
        let rp = ReducedParams::new(self.l, self.k);
        let signs: &[f64] = if mu > 0.0 { &[1.0, -1.0] } else { &[1.0] };
        for &s in signs {
            let cas = CasimirValues::new(s * mu, ell);
            let q = f_quartic(h, rp, cas);
            match classify_multiple_root(a, &q, cas) {
                Ok(kind) => self.events.push(BifurcationEvent {
                    kind,
                    a,
                    b: remaining_root(a, rp),
                    h,
                    lambda: self.l,
                    mu: s * mu,
                    ell,
                    kappa: self.k,
                    family: None,
                }),
                Err(Error::Ambiguous(_)) => self.ambiguous += 1,
                Err(_) => {}
            }
        }
    }
}

/// Triple roots located at the tip. On the line μ = 0, ℓ ≤ 0 the tip is
/// R = 0 and F(0) = h², F′(0) = μ², F″(0) = 2(λ² + ℓ). On the cone lines
/// ℓ = |μ| = r the tip is R = r, F(r) = 0 forces h = λr + κr²/2 and then
/// F″(r) = 2(λ + κr)² − 4r.
fn tip_solutions(k: f64, l: f64) -> Vec<(f64, f64, f64, f64)> {
    let mut out = vec![(0.0, 0.0, 0.0, -l * l)];
    let quad = [l * l, 2.0 * k * l - 2.0, k * k];
    let rs = if k == 0.0 {
        vec![0.5 * l * l]
    } else {
        poly::real_roots_isolated(&quad, 0.0, poly::cauchy_bound(&quad), 1e-14)
    };
    for r in rs {
        if r > 0.0 {
            let r = poly::polish(&quad, r);
            out.push((r, l * r + 0.5 * k * r * r, r * r, r));
        }
    }
    out
}

/// Solutions (h, μ², ℓ) of the triple-root system at a given a.
pub fn solve_at(k: f64, l: f64, a: f64, mode: OracleMode) -> Vec<(f64, f64, f64)> {
    match mode {
        OracleMode::Factorization => factorization_solutions(k, l, a),
        OracleMode::Newton => newton_solutions(k, l, a),
    }
}

fn factorization_solutions(k: f64, l: f64, a: f64) -> Vec<(f64, f64, f64)> {
    let (k2, k3) = (k * k, k * k * k);
    let ell_h = |m: f64| {
        let ell = (-2.0 * k3 * a.powi(3) - 6.0 * k2 * a * a * l + 3.0 * k * a * a
            - 6.0 * k * a * l * l
            + 6.0 * a * l
            - 2.0 * l.powi(3)
            + k * m)
            / (2.0 * l);
        let h = (m + 3.0 * a * a - 2.0 * k2 * a.powi(3) - 3.0 * k * a * a * l) / (2.0 * l);
        (h, m, ell)
    };
    if l == 0.0 {
        // μ² is fixed by the R¹ coefficient and ℓ solves a quadratic.
        let b = 4.0 / k2 - 3.0 * a;
        let m = (2.0 * k2 * a - 3.0) * a * a;
        let q = [
            3.0 * k2 * k2 * a.powi(4) - 10.0 * k2 * a.powi(3) + 9.0 * a * a,
            -2.0 * k2 * k2 * a.powi(3) + 6.0 * k2 * a * a - 6.0 * a,
            1.0,
        ];
        return quadratic_roots(&q)
            .into_iter()
            .map(|ell| {
                let h = (4.0 * ell - 3.0 * k2 * a * a - 3.0 * k2 * a * b) / (4.0 * k);
                (h, m, ell)
            })
            .collect();
    }
    if 2.0 * k * l == 1.0 {
        // Q(μ²) = (2κ²a − 1)³(μ² − 2κ²a³).
        let c = 2.0 * k2 * a - 1.0;
        if c.abs() > 1e-12 {
            return vec![ell_h(2.0 * k2 * a.powi(3))];
        }
        // a = 1/(2κ²): μ² is free along the cusp line.
        let top = 1.0 / (k2 * k2);
        return (0..=64).map(|i| ell_h(top * i as f64 / 64.0)).collect();
    }
    let q1 = 4.0 * k3 * a.powi(3) * l - 4.0 * k2 * a.powi(3) + 12.0 * k2 * a * a * l * l
        - 12.0 * k * a * a * l
        + 6.0 * a * a
        + 12.0 * k * a * l.powi(3)
        - 12.0 * a * l * l
        + 4.0 * l.powi(4);
    let q0 = 4.0 * k2 * k2 * a.powi(6) + 12.0 * k3 * a.powi(5) * l - 12.0 * k2 * a.powi(5)
        + 12.0 * k2 * a.powi(4) * l * l
        - 18.0 * k * a.powi(4) * l
        + 9.0 * a.powi(4)
        + 4.0 * k * a.powi(3) * l.powi(3)
        - 4.0 * a.powi(3) * l * l;
    quadratic_roots(&[q0, q1, 1.0 - 2.0 * k * l]).into_iter().map(ell_h).collect()
}

/// Real roots of c0 + c1 x + c2 x², with a double root reported once.
fn quadratic_roots(c: &[f64; 3]) -> Vec<f64> {
    let [c0, c1, c2] = *c;
    if c2 == 0.0 {
        return if c1 == 0.0 { Vec::new() } else { vec![-c0 / c1] };
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    let scale = c1 * c1 + (4.0 * c2 * c0).abs();
    if disc < -1e-14 * scale {
        return Vec::new();
    }
    let sq = disc.max(0.0).sqrt();
    if sq == 0.0 {
        return vec![-c1 / (2.0 * c2)];
    }
    let q = -0.5 * (c1 + sq.copysign(c1));
    let mut r = vec![q / c2];
    if q != 0.0 {
        r.push(c0 / q);
    }
    r
}

/// F, F′, F″ at a for F(R) = (h − λR − κR²/2)² − (R² − m)(R − ℓ), with their
/// Jacobian in (h, m, ℓ) and a magnitude for the rounding level.
fn system(k: f64, l: f64, a: f64, v: &Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>, f64) {
    let (h, m, ell) = (v[0], v[1], v[2]);
    let p = h - l * a - 0.5 * k * a * a;
    let dp = -l - k * a;
    let f0 = p * p - (a * a - m) * (a - ell);
    let f1 = 2.0 * p * dp - (2.0 * a * (a - ell) + a * a - m);
    let f2 = 2.0 * dp * dp - 2.0 * k * p - 6.0 * a + 2.0 * ell;
    let jac = Matrix3::new(
        2.0 * p, a - ell, a * a - m,
        2.0 * dp, 1.0, 2.0 * a,
        -2.0 * k, 0.0, 2.0,
    );
    let pa = h.abs() + (l * a).abs() + 0.5 * (k * a * a).abs();
    let mag = pa * pa + (a * a + m.abs()) * (a.abs() + ell.abs()) + dp * dp + a.abs() + 1.0;
    (Vector3::new(f0, f1, f2), jac, mag)
}

fn newton_solutions(k: f64, l: f64, a: f64) -> Vec<(f64, f64, f64)> {
    let dp = -l - k * a;
    let mut seeds = vec![0.0];
    for j in -8..=6 {
        let s = 10f64.powf(j as f64 / 2.0);
        seeds.push(s);
        seeds.push(-s);
    }
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    for p0 in seeds {
        // Start on F′ = F″ = 0, which is linear in (m, ℓ) for fixed h.
        let ell = 3.0 * a + k * p0 - dp * dp;
        let m = a * a + 2.0 * a * (a - ell) - 2.0 * p0 * dp;
        let h = p0 + l * a + 0.5 * k * a * a;
        let Some(v) = newton(k, l, a, Vector3::new(h, m, ell)) else { continue };
        let sol = (v[0], v[1], v[2]);
        let close = |x: &(f64, f64, f64)| {
            let s = 1e-7 * (1.0 + sol.0.abs() + sol.1.abs() + sol.2.abs());
            (x.0 - sol.0).abs() <= s && (x.1 - sol.1).abs() <= s && (x.2 - sol.2).abs() <= s
        };
        if !out.iter().any(close) {
            out.push(sol);
        }
    }
    out
}

fn newton(k: f64, l: f64, a: f64, mut v: Vector3<f64>) -> Option<Vector3<f64>> {
    let (mut r, mut jac, mut mag) = system(k, l, a, &v);
    for _ in 0..80 {
        let norm = r.amax();
        if norm <= 1e-14 * mag {
            return Some(v);
        }
        let step = jac.lu().solve(&r)?;
        let mut damp = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let cand = v - step * damp;
            let (rc, jc, mc) = system(k, l, a, &cand);
            if rc.amax() < norm {
                v = cand;
                (r, jac, mag) = (rc, jc, mc);
                improved = true;
                break;
            }
            damp *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (r.amax() <= 1e-12 * mag).then_some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifurcations::{EventKind, Family};

    #[test]
    fn both_modes_agree_at_a_sample() {
        for (l, a) in [(0.3, 0.1), (-1.0, 0.2), (0.75, 0.1), (0.75, 0.3), (0.1, 0.05)] {
            let mut f = factorization_solutions(1.0, l, a);
            let mut n = newton_solutions(1.0, l, a);
            f.sort_by(|x, y| x.0.total_cmp(&y.0));
            n.sort_by(|x, y| x.0.total_cmp(&y.0));
            assert_eq!(f.len(), n.len(), "λ={l} a={a}: {f:?} vs {n:?}");
            for (x, y) in f.iter().zip(&n) {
                assert!((x.0 - y.0).abs() < 1e-9 && (x.1 - y.1).abs() < 1e-9, "{x:?} {y:?}");
            }
        }
    }

    #[test]
    fn lambda_two_has_only_hhsup3() {
        let cfg = OracleConfig { grid: 400, ..Default::default() };
        let rep = solve_bifurcations_numeric(1.0, &[2.0], &cfg).unwrap();
        assert!(rep.unmatched.is_empty());
        assert_eq!(rep.events.len(), 1);
        let ev = rep.events[0];
        assert_eq!(ev.family, Some(Family::HhSup3));
        assert_eq!(ev.kind, EventKind::HopfSuper);
        assert_eq!((ev.mu, ev.ell), (0.0, -4.0));
    }

    #[test]
    fn lambda_zero_special_points() {
        let cfg = OracleConfig { grid: 400, ..Default::default() };
        let rep = solve_bifurcations_numeric(1.0, &[0.0], &cfg).unwrap();
        for ev in &rep.events {
            let on_origin = ev.mu.abs() < 1e-9 && ev.ell.abs() < 1e-9;
            let on_sup = (ev.mu.abs() - 2.0).abs() < 1e-9 && (ev.ell - 2.0).abs() < 1e-9;
            assert!(on_origin || on_sup, "{ev:?}");
        }
    }
}
