//! One-degree-of-freedom dynamics of H_λ = X + λR + (κ/2)R² on a reduced
//! phase space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cross, syzygy_gradient, syzygy_residual, CasimirValues, InvariantPoint, ModelParams};
use crate::ode::{Dop853, OdeSystem, Tolerances};
use crate::poly;
use crate::reduced_space::{r_min, section_sq, section_sq_slope, tip_class, TipKind, DEFAULT_EPS_C};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub lambda: f64,
    pub kappa: f64,
}

impl ReducedParams {
    pub fn new(lambda: f64, kappa: f64) -> Self {
        ReducedParams { lambda, kappa }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    Elliptic,
    Hyperbolic,
    Degenerate,
    SingularTip,
}

/// Equilibrium of the reduced flow; Y = 0 always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub r: f64,
    pub x: f64,
    pub h: f64,
    pub stability: Stability,
    /// S′(R) for regular equilibria.
    pub quintic_deriv: Option<f64>,
}

impl Equilibrium {
    pub fn point(&self) -> InvariantPoint {
        InvariantPoint::new(self.r, self.x, 0.0)
    }
}

pub fn reduced_h(p: InvariantPoint, rp: ReducedParams) -> f64 {
    p.x + rp.lambda * p.r + 0.5 * rp.kappa * p.r * p.r
}

pub fn reduced_h_gradient(p: InvariantPoint, rp: ReducedParams) -> [f64; 3] {
    [rp.lambda + rp.kappa * p.r, 1.0, 0.0]
}

/// (Ṙ, Ẋ, Ẏ) = ∇H × ∇S = (2Y, −2Y(λ+κR), 2X(λ+κR) + 3R² − 2ℓR − μ²).
pub fn vector_field(p: InvariantPoint, cas: CasimirValues, rp: ReducedParams) -> [f64; 3] {
    cross(reduced_h_gradient(p, rp), syzygy_gradient(p, cas))
}

/// Energy of the tip point (R_min, 0, 0).
pub fn tip_energy(cas: CasimirValues, rp: ReducedParams) -> f64 {
    let r = r_min(cas);
    rp.lambda * r + 0.5 * rp.kappa * r * r
}

/// Coefficients of S(R) = 4(κR+λ)²(R−ℓ)(R²−μ²) − (3R²−2ℓR−μ²)².
pub fn equilibrium_quintic(cas: CasimirValues, rp: ReducedParams) -> Vec<f64> {
    let (mu, ell) = (cas.mu, cas.ell);
    let lin = [rp.lambda, rp.kappa];
    let first = poly::scale(
        &poly::mul(&poly::mul(&lin, &lin), &poly::mul(&[-ell, 1.0], &[-mu * mu, 0.0, 1.0])),
        4.0,
    );
    let slope = [-mu * mu, -2.0 * ell, 3.0];
    let second = poly::mul(&slope, &slope);
    poly::add(&first, &poly::scale(&second, -1.0))
}

const MERGE_TOL: f64 = 1e-9;
const IMAG_TOL: f64 = 1e-7;

/// Regular equilibria from the real roots of S in (R_min, ∞), plus the tip
/// when it is singular.
pub fn equilibria(cas: CasimirValues, rp: ReducedParams) -> Result<Vec<Equilibrium>> {
    let s = equilibrium_quintic(cas, rp);
    let ds = poly::derivative(&s);
    let r0 = r_min(cas);
    let tip = tip_class(cas, DEFAULT_EPS_C).kind;
    // A singular tip is a double (cone) or triple (cusp) root of S.
    let reg = match tip {
        TipKind::Smooth => s.clone(),
        TipKind::Cone => poly::deflate(&s, r0, 2),
        TipKind::Cusp => poly::deflate(&s, r0, 3),
    };
    let bound = poly::cauchy_bound(&reg).max(r0 + 1.0);
    let mut out = Vec::new();
    if poly::degree(&reg).is_some_and(|d| d > 0) {
        let roots = poly::real_roots_companion(&reg, r0, bound, IMAG_TOL, MERGE_TOL)?;
        for r in roots {
            if r <= r0 + MERGE_TOL * (1.0 + r0.abs()) {
                continue;
            }
            out.push(regular_equilibrium(r, cas, rp, &ds));
        }
    }
    if tip != TipKind::Smooth {
        out.push(Equilibrium {
            r: r0,
            x: 0.0,
            h: tip_energy(cas, rp),
            stability: Stability::SingularTip,
            quintic_deriv: None,
        });
    }
    Ok(out)
}

fn regular_equilibrium(r: f64, cas: CasimirValues, rp: ReducedParams, ds: &[f64]) -> Equilibrium {
    let x2 = section_sq(r, cas).max(0.0).sqrt();
    let level_slope = -(rp.lambda + rp.kappa * r);
    let surf = section_sq_slope(r, cas);
    // tangency on the branch X = σX₂ means 2X₂·X₁′ = σ·(X₂²)′
    let mismatch = |sigma: f64| (2.0 * x2 * level_slope - sigma * surf).abs();
    let sigma = if mismatch(1.0) <= mismatch(-1.0) { 1.0 } else { -1.0 };
    let x = sigma * x2;
    let d = poly::eval(ds, r);
    let dtol = 1e-9 * poly::eval_abs(ds, r);
    let stability = if d > dtol {
        Stability::Elliptic
    } else if d < -dtol {
        Stability::Hyperbolic
    } else {
        Stability::Degenerate
    };
    let p = InvariantPoint::new(r, x, 0.0);
    Equilibrium { r, x, h: reduced_h(p, rp), stability, quintic_deriv: Some(d) }
}

/// Minimum of H_λ on the reduced space (κ > 0).
pub fn h_min(cas: CasimirValues, rp: ReducedParams) -> Result<f64> {
    if !(rp.kappa > 0.0) {
        return Err(Error::Unsupported("h_min needs kappa > 0".into()));
    }
    let eqs = equilibria(cas, rp)?;
    Ok(eqs.iter().map(|e| e.h).fold(tip_energy(cas, rp), f64::min))
}

struct ReducedFlow {
    cas: CasimirValues,
    rp: ReducedParams,
}

impl OdeSystem for ReducedFlow {
    fn dim(&self) -> usize {
        3
    }
    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let v = vector_field(InvariantPoint::new(y[0], y[1], y[2]), self.cas, self.rp);
        dy.copy_from_slice(&v);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<InvariantPoint>,
    /// First return time to the start, when detection was requested.
    pub period: Option<f64>,
    pub max_syzygy_drift: f64,
    pub max_energy_drift: f64,
}

/// Adaptive integration of the reduced flow up to `t_end`.
///
/// `tol` bounds the drift of S and H over the whole run. Local errors add up
/// roughly in proportion to the elapsed time, so the per-step tolerance is
/// `tol / (10 (1 + t_end))`, floored near round-off.
pub fn integrate_orbit(
    start: InvariantPoint,
    cas: CasimirValues,
    rp: ReducedParams,
    t_end: f64,
    tol: f64,
    detect_period: bool,
) -> Result<Trajectory> {
    check_on_surface(start, cas)?;
    let flow = ReducedFlow { cas, rp };
    let s0 = syzygy_residual(start, cas);
    let h0 = reduced_h(start, rp);
    let mut traj = Trajectory {
        times: vec![0.0],
        points: vec![start],
        period: None,
        max_syzygy_drift: 0.0,
        max_energy_drift: 0.0,
    };
    if is_stationary(start, cas, rp) {
        traj.times.push(t_end);
        traj.points.push(start);
        return Ok(traj);
    }
    let local = (tol / (10.0 * (1.0 + t_end.abs()))).max(2e-15);
    let mut ig = Dop853::new(&flow, &start.as_array(), Tolerances::uniform(local));
    let mut section = detect_period.then(|| Section::new(start, cas, rp));
    while ig.t() < t_end {
        let before = ig.clone();
        let remaining = t_end - ig.t();
        if remaining <= 1e-15 * (1.0 + t_end) {
            break;
        }
        ig.step(remaining)?;
        let y = ig.y();
        let p = InvariantPoint::new(y[0], y[1], y[2]);
        traj.max_syzygy_drift = traj.max_syzygy_drift.max((syzygy_residual(p, cas) - s0).abs());
        traj.max_energy_drift = traj.max_energy_drift.max((reduced_h(p, rp) - h0).abs());
        if let Some(sec) = section.as_mut() {
            if let Some(tau) = sec.crossing(&before, ig.t() - before.t(), ig.y())? {
                traj.period = Some(before.t() + tau);
                section = None;
            }
        }
        traj.times.push(ig.t());
        traj.points.push(p);
    }
    Ok(traj)
}

/// First return time of the reduced orbit through `start`.
pub fn reduced_period(
    start: InvariantPoint,
    cas: CasimirValues,
    rp: ReducedParams,
    tol: f64,
    t_max: f64,
) -> Result<f64> {
    check_on_surface(start, cas)?;
    if is_stationary(start, cas, rp) {
        return Err(Error::Invalid("start point is an equilibrium".into()));
    }
    let flow = ReducedFlow { cas, rp };
    let mut ig = Dop853::new(&flow, &start.as_array(), Tolerances::uniform(tol));
    let mut sec = Section::new(start, cas, rp);
    while ig.t() < t_max {
        let before = ig.clone();
        ig.step(t_max - ig.t())?;
        if let Some(tau) = sec.crossing(&before, ig.t() - before.t(), ig.y())? {
            return Ok(before.t() + tau);
        }
    }
    Err(Error::Integration(format!("no return to the start point before t = {t_max}")))
}

fn check_on_surface(start: InvariantPoint, cas: CasimirValues) -> Result<()> {
    let res = syzygy_residual(start, cas).abs();
    if res > 1e-8 * start.r.abs().powi(3).max(1.0) {
        return Err(Error::Invalid(format!("start point is off the reduced space (residual {res:e})")));
    }
    Ok(())
}

fn is_stationary(p: InvariantPoint, cas: CasimirValues, rp: ReducedParams) -> bool {
    let v = vector_field(p, cas, rp);
    let scale = 1.0 + p.r * p.r + p.x.abs() + p.y.abs();
    v.iter().all(|c| c.abs() <= 1e-13 * scale)
}

/// Poincaré plane through the start point, normal to the field there.
struct Section {
    origin: [f64; 3],
    normal: [f64; 3],
    max_dist: f64,
    prev_g: f64,
}

impl Section {
    fn new(start: InvariantPoint, cas: CasimirValues, rp: ReducedParams) -> Self {
        Section { origin: start.as_array(), normal: vector_field(start, cas, rp), max_dist: 0.0, prev_g: 0.0 }
    }

    fn g(&self, y: &[f64]) -> f64 {
        (0..3).map(|i| (y[i] - self.origin[i]) * self.normal[i]).sum()
    }

    fn dist(&self, y: &[f64]) -> f64 {
        (0..3).map(|i| (y[i] - self.origin[i]).powi(2)).sum::<f64>().sqrt()
    }

    /// Step offset of a return crossing inside the last step, if any.
    fn crossing<S: OdeSystem>(&mut self, before: &Dop853<'_, S>, h: f64, y: &[f64]) -> Result<Option<f64>> {
        let g_new = self.g(y);
        let d = self.dist(y);
        self.max_dist = self.max_dist.max(d);
        let g_old = self.prev_g;
        self.prev_g = g_new;
        if !(g_old < 0.0 && g_new >= 0.0) || d > 0.25 * self.max_dist {
            return Ok(None);
        }
        let tau = poly::bisect(|s| self.g(&before.trial(s)), 0.0, h);
        Ok(Some(tau))
    }
}

/// (∂H/∂N, ∂H/∂J) of the full normal form at fixed reduced R.
pub fn internal_frequencies(r: f64, cas: CasimirValues, mp: &ModelParams) -> (f64, f64) {
    let (mu, ell) = (cas.mu, cas.ell);
    let dn = mp.beta - mp.alpha
        + (mp.gamma1 - mp.gamma2) * mu
        + (mp.gamma2 - mp.gamma3) * ell
        + (mp.lambda1 - mp.lambda2) * r;
    let dj = 2.0 * (mp.alpha + mp.gamma2 * mu + mp.gamma3 * ell + mp.lambda2 * r);
    (dn, dj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_h_examples() {
        let rp = ReducedParams::new(0.0, 1.0);
        assert_eq!(reduced_h(InvariantPoint::new(0.0, 0.0, 0.0), rp), 0.0);
        assert_eq!(reduced_h(InvariantPoint::new(1.0, 1.0, 0.0), rp), 1.5);
    }

    #[test]
    fn field_of_x_alone() {
        let rp = ReducedParams::new(0.0, 0.0);
        let v = vector_field(InvariantPoint::new(0.7, 0.2, -0.4), CasimirValues::new(0.1, 0.3), rp);
        assert_eq!(v[0], -0.8);
    }

    #[test]
    fn frequencies_examples() {
        let mp = ModelParams { alpha: 1.0, kappa: 0.0, ..Default::default() };
        assert_eq!(internal_frequencies(0.3, CasimirValues::new(0.2, 0.1), &mp), (-1.0, 2.0));
    }

    #[test]
    fn h_min_at_cusp_with_positive_detuning() {
        let v = h_min(CasimirValues::new(0.0, 0.0), ReducedParams::new(1.0, 1.0)).unwrap();
        assert_eq!(v, 0.0);
        assert!(h_min(CasimirValues::new(0.0, 0.0), ReducedParams::new(1.0, 0.0)).is_err());
    }
}
