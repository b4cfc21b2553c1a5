//! Hamiltonian monodromy by continuation of rotation numbers.
//!
//! For a regular value (μ, ι, h) and a T³ component of its fiber, the full
//! flow is integrated for one reduced period T_red. The end point differs
//! from the start by the T²-action Φ(s, t); (s, t) mod 1 are the rotation
//! numbers (θ_N, θ_J). Along a closed loop of regular values their lift
//! changes by an integer vector (m_N, m_J).

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical_values::{classify_fiber, tip_curvature, ComponentKind, FiberReport, Thread};
use crate::error::{Error, Result};
use crate::model::{detuning_lambda, reduce, CasimirValues, FullState, ModelParams};
use crate::ode::{Dop853, OdeSystem, Tolerances};
use crate::poly;
use crate::reduced_dynamics::{h_min, ReducedParams};

/// Sign applied to the raw winding of (θ_N, θ_J). Loops are oriented as
/// described on [`generator_loop`]; with that orientation the loop around
/// C13 gives (0, 1).
pub const ORIENT: f64 = 1.0;

/// A value of the energy-momentum map in (μ, ι, h) coordinates; h is the
/// value of H_λ = X + λR + κR²/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopValue {
    pub mu: f64,
    pub iota: f64,
    pub h: f64,
}

impl LoopValue {
    pub fn new(mu: f64, iota: f64, h: f64) -> Self {
        LoopValue { mu, iota, h }
    }

    pub fn casimirs(&self) -> CasimirValues {
        CasimirValues::from_mu_iota(self.mu, self.iota)
    }

    fn lerp(a: LoopValue, b: LoopValue, s: f64) -> LoopValue {
        LoopValue::new(a.mu + s * (b.mu - a.mu), a.iota + s * (b.iota - a.iota), a.h + s * (b.h - a.h))
    }
}

/// Which T³ component of a fiber to use. Components are ordered by R.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub enum ComponentSelector {
    Index(usize),
    Lowest,
    #[default]
    Highest,
    /// The component whose R-interval contains this R.
    Containing(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Largest accepted change of a rotation number between neighbours.
    pub max_jump: f64,
    pub max_points: usize,
    /// Largest accepted distance of the winding from an integer.
    pub integrality: f64,
    pub closure_tol: f64,
    pub phase_tol: f64,
    pub selector: ComponentSelector,
}

impl Default for MonodromyConfig {
    fn default() -> Self {
        MonodromyConfig {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 200_000,
            max_jump: 0.25,
            max_points: 10_000,
            integrality: 0.05,
            closure_tol: 1e-8,
            phase_tol: 1e-6,
            selector: ComponentSelector::Highest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationData {
    pub theta_n: f64,
    pub theta_j: f64,
    pub t_red: f64,
    /// |z(T) − Φ(s,t) z(0)| relative to |z(0)|.
    pub closure_residual: f64,
    /// Mismatch of the z₁ phase against 2π(s + t), in radians.
    pub phase_error: f64,
    pub energy_drift: f64,
    pub momentum_drift: f64,
    pub r_interval: (f64, f64),
}

/// Hamiltonian vector field of the full normal form on R⁶, stored as
/// (Re z₁, Im z₁, Re z₂, Im z₂, Re z₃, Im z₃).
pub struct FullFlow {
    pub params: ModelParams,
}

impl FullFlow {
    /// (∂H/∂I₁, ∂H/∂I₂, ∂H/∂I₃).
    fn action_gradient(&self, i: [f64; 3]) -> [f64; 3] {
        let p = &self.params;
        let n = i[0] - i[1];
        let l = i[0] + i[1] - 2.0 * i[2];
        let r = i[0] + i[1];
        let h_n = p.beta + p.lambda1 * r + p.gamma1 * n + p.gamma2 * l;
        let h_l = p.alpha + p.lambda2 * r + p.gamma2 * n + p.gamma3 * l;
        let h_r = p.delta + p.kappa * r + p.lambda1 * n + p.lambda2 * l;
        [h_n + h_l + h_r, -h_n + h_l + h_r, -2.0 * h_l]
    }
}

impl OdeSystem for FullFlow {
    fn dim(&self) -> usize {
        6
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let z = unpack(y);
        let act = [0.5 * z[0].norm_sqr(), 0.5 * z[1].norm_sqr(), 0.5 * z[2].norm_sqr()];
        let g = self.action_gradient(act);
        let i = Complex64::i();
        let dz = [
            i * (z[1].conj() * z[2].conj() + z[0] * g[0]),
            i * (z[0].conj() * z[2].conj() + z[1] * g[1]),
            i * (z[0].conj() * z[1].conj() + z[2] * g[2]),
        ];
        pack_into(&dz, dy);
    }
}

fn unpack(y: &[f64]) -> [Complex64; 3] {
    [Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]), Complex64::new(y[4], y[5])]
}

fn pack_into(z: &[Complex64; 3], out: &mut [f64]) {
    for k in 0..3 {
        out[2 * k] = z[k].re;
        out[2 * k + 1] = z[k].im;
    }
}

fn pack(z: &[Complex64; 3]) -> Vec<f64> {
    let mut v = vec![0.0; 6];
    pack_into(z, &mut v);
    v
}

fn reduced_params(params: &ModelParams, cas: CasimirValues) -> ReducedParams {
    ReducedParams::new(detuning_lambda(params, cas), params.kappa)
}

fn torus3_intervals(report: &FiberReport) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = report
        .components
        .iter()
        .filter(|c| c.kind == ComponentKind::Torus3)
        .map(|c| c.r_interval)
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn select(intervals: &[(f64, f64)], sel: ComponentSelector) -> Option<(f64, f64)> {
    match sel {
        ComponentSelector::Index(k) => intervals.get(k).copied(),
        ComponentSelector::Lowest => intervals.first().copied(),
        ComponentSelector::Highest => intervals.last().copied(),
        ComponentSelector::Containing(r) => intervals.iter().copied().find(|&(a, b)| a <= r && r <= b),
    }
}

/// Point of the selected component with Y = 0 at its largest R, lifted to
/// R⁶ with z₁, z₂ real positive.
pub fn fiber_start(value: LoopValue, sel: ComponentSelector, params: &ModelParams) -> Result<FullState> {
    let (state, _) = start_on_component(value, sel, params)?;
    Ok(state)
}

fn start_on_component(
    value: LoopValue,
    sel: ComponentSelector,
    params: &ModelParams,
) -> Result<(FullState, (f64, f64))> {
    let cas = value.casimirs();
    let rp = reduced_params(params, cas);
    let report = classify_fiber(cas, rp, value.h)?;
    let intervals = torus3_intervals(&report);
    let iv = select(&intervals, sel).ok_or_else(|| {
        Error::CriticalValue(format!("no regular T³ component at {value:?} (fiber {})", report.summary()))
    })?;
    check_flag(&report, iv, value)?;
    Ok((lift(cas, rp, value.h, iv.1), iv))
}

/// A near-degenerate fiber is accepted only when the degeneracy sits away
/// from the selected component.
fn check_flag(report: &FiberReport, iv: (f64, f64), value: LoopValue) -> Result<()> {
    let Some(f) = &report.flag else {
        return Ok(());
    };
    let away = report.flag_at.is_some_and(|r| {
        let gap = 1e-9 * (1.0 + iv.1.abs());
        r < iv.0 - gap || r > iv.1 + gap
    });
    if away {
        Ok(())
    } else {
        Err(Error::CriticalValue(format!("near-degenerate fiber at {value:?}: {f}")))
    }
}

fn lift(cas: CasimirValues, rp: ReducedParams, h: f64, r: f64) -> FullState {
    let x = h - rp.lambda * r - 0.5 * rp.kappa * r * r;
    let a1 = (r + cas.mu).max(0.0).sqrt();
    let a2 = (r - cas.mu).max(0.0).sqrt();
    let a3 = (r - cas.ell).max(0.0).sqrt();
    let z3 = if x < 0.0 { -a3 } else { a3 };
    FullState::from_amplitudes([Complex64::new(a1, 0.0), Complex64::new(a2, 0.0), Complex64::new(z3, 0.0)])
}

/// Rotation numbers of the selected T³ component of the fiber over `value`.
pub fn rotation_numbers(
    value: LoopValue,
    sel: ComponentSelector,
    params: &ModelParams,
    cfg: &MonodromyConfig,
) -> Result<RotationData> {
    params.validate()?;
    let (state, iv) = start_on_component(value, sel, params)?;
    let mut data = rotation_numbers_from(&state, params, cfg)?;
    data.r_interval = iv;
    Ok(data)
}

/// Rotation numbers of the torus through an arbitrary full-space point.
pub fn rotation_numbers_from(state: &FullState, params: &ModelParams, cfg: &MonodromyConfig) -> Result<RotationData> {
    let z0 = state.amplitudes();
    if z0.iter().any(|z| z.norm() <= 1e-12) {
        return Err(Error::Invalid("start point lies on a coordinate plane z_j = 0".into()));
    }
    let red0 = reduce(state);
    let cas = red0.casimirs();
    let h0 = params.normal_form(cas, red0.point);
    let flow = FullFlow { params: *params };
    let y0 = pack(&z0);
    let mut ig = Dop853::new(&flow, &y0, Tolerances { rtol: cfg.rtol, atol: cfg.atol }).with_max_steps(cfg.max_steps);
    let p0 = red0.point.as_array();
    let v0 = reduced_velocity(&flow, &y0);
    if v0.iter().map(|c| c * c).sum::<f64>().sqrt() <= 1e-13 * (1.0 + p0[0].abs()) {
        return Err(Error::CriticalValue("start point is a relative equilibrium".into()));
    }
    let g = |y: &[f64]| {
        let p = reduced_point(y);
        (0..3).map(|k| (p[k] - p0[k]) * v0[k]).sum::<f64>()
    };
    let dist = |y: &[f64]| {
        let p = reduced_point(y);
        (0..3).map(|k| (p[k] - p0[k]).powi(2)).sum::<f64>().sqrt()
    };
    let mut max_dist: f64 = 0.0;
    let mut g_prev = 0.0;
    let mut energy_drift: f64 = 0.0;
    let mut momentum_drift: f64 = 0.0;
    let t_red;
    let y_end;
    loop {
        let before = ig.clone();
        ig.step(f64::INFINITY)?;
        let y = ig.y().to_vec();
        let red = reduce(&FullState::from_amplitudes(unpack(&y)));
        energy_drift = energy_drift.max((params.normal_form(red.casimirs(), red.point) - h0).abs());
        momentum_drift = momentum_drift.max((red.n - red0.n).abs()).max((red.l - red0.l).abs());
        let g_new = g(&y);
        let d = dist(&y);
        max_dist = max_dist.max(d);
        if g_prev < 0.0 && g_new >= 0.0 && d <= 0.25 * max_dist {
            let h = ig.t() - before.t();
            let tau = poly::bisect(|s| g(&before.trial(s)), 0.0, h);
            t_red = before.t() + tau;
            y_end = before.trial(tau);
            break;
        }
        g_prev = g_new;
    }
    let z1 = unpack(&y_end);
    let ratio = |k: usize| (z1[k] / z0[k]).arg();
    let s = (-ratio(1) / TAU).rem_euclid(1.0);
    let t = (-ratio(2) / TAU).rem_euclid(1.0);
    let expected = Complex64::from_polar(1.0, TAU * (s + t));
    let phase_error = (z1[0] / (z0[0] * expected)).arg().abs();
    let moved = crate::model::t2_action(state, s, t).amplitudes();
    let norm0 = z0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let closure = (0..3).map(|k| (z1[k] - moved[k]).norm_sqr()).sum::<f64>().sqrt() / norm0;
    if phase_error > cfg.phase_tol {
        return Err(Error::Integration(format!("z₁ phase mismatch {phase_error:e} rad")));
    }
    if closure > cfg.closure_tol {
        return Err(Error::Integration(format!("closure residual {closure:e}")));
    }
    Ok(RotationData {
        theta_n: s,
        theta_j: t,
        t_red,
        closure_residual: closure,
        phase_error,
        energy_drift,
        momentum_drift,
        r_interval: (f64::NAN, f64::NAN),
    })
}

fn reduced_point(y: &[f64]) -> [f64; 3] {
    let z = unpack(y);
    let w = z[0] * z[1] * z[2];
    [0.5 * (z[0].norm_sqr() + z[1].norm_sqr()), w.re, w.im]
}

/// d/dt (R, X, Y) at a full-space point.
fn reduced_velocity(flow: &FullFlow, y: &[f64]) -> [f64; 3] {
    let mut dy = [0.0; 6];
    flow.rhs(y, &mut dy);
    let z = unpack(y);
    let dz = unpack(&dy);
    let dr = z[0].re * dz[0].re + z[0].im * dz[0].im + z[1].re * dz[1].re + z[1].im * dz[1].im;
    let dw = dz[0] * z[1] * z[2] + z[0] * dz[1] * z[2] + z[0] * z[1] * dz[2];
    [dr, dw.re, dw.im]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonodromyVector {
    pub m_n: i64,
    pub m_j: i64,
}

impl MonodromyVector {
    pub const ZERO: MonodromyVector = MonodromyVector { m_n: 0, m_j: 0 };

    pub fn new(m_n: i64, m_j: i64) -> Self {
        MonodromyVector { m_n, m_j }
    }

    pub fn to_matrix(self) -> MonodromyMatrix {
        to_matrix(self)
    }
}

impl std::ops::Add for MonodromyVector {
    type Output = MonodromyVector;
    fn add(self, o: MonodromyVector) -> MonodromyVector {
        MonodromyVector::new(self.m_n + o.m_n, self.m_j + o.m_j)
    }
}

impl std::ops::Neg for MonodromyVector {
    type Output = MonodromyVector;
    fn neg(self) -> MonodromyVector {
        MonodromyVector::new(-self.m_n, -self.m_j)
    }
}

impl std::fmt::Display for MonodromyVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.m_n, self.m_j)
    }
}

/// Integer 3×3 matrix acting on the homology basis (g_N, g_J, g).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonodromyMatrix(pub [[i64; 3]; 3]);

pub fn to_matrix(v: MonodromyVector) -> MonodromyMatrix {
    MonodromyMatrix([[1, 0, v.m_n], [0, 1, v.m_j], [0, 0, 1]])
}

/// Matrix product a·b.
pub fn compose(a: MonodromyMatrix, b: MonodromyMatrix) -> MonodromyMatrix {
    let mut out = [[0i64; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a.0[i][k] * b.0[k][j]).sum();
        }
    }
    let m = MonodromyMatrix(out);
    if let (Some(va), Some(vb)) = (a.vector(), b.vector()) {
        debug_assert_eq!(m, to_matrix(va + vb));
    }
    m
}

impl MonodromyMatrix {
    pub const IDENTITY: MonodromyMatrix = MonodromyMatrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]]);

    /// The vector when the matrix has the unitriangular form of [`to_matrix`].
    pub fn vector(&self) -> Option<MonodromyVector> {
        let v = MonodromyVector::new(self.0[0][2], self.0[1][2]);
        (to_matrix(v) == *self).then_some(v)
    }

    pub fn determinant(&self) -> i64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse of a unimodular matrix (adjugate).
    pub fn inverse(&self) -> Result<MonodromyMatrix> {
        let d = self.determinant();
        if d.abs() != 1 {
            return Err(Error::Invalid(format!("determinant {d} is not ±1")));
        }
        let m = &self.0;
        let mut inv = [[0i64; 3]; 3];
        for (i, row) in inv.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let (r0, r1) = minor_index(j);
                let (c0, c1) = minor_index(i);
                let minor = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                *cell = sign * minor * d;
            }
        }
        Ok(MonodromyMatrix(inv))
    }
}

fn minor_index(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Outcome of continuing rotation numbers around a loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopWinding {
    pub vector: MonodromyVector,
    /// Oriented winding before rounding.
    pub winding: (f64, f64),
    pub points: usize,
    /// Largest unwrapped change of a rotation number between neighbours.
    pub max_step: f64,
    pub track: Vec<TrackPoint>,
}

/// One value of a refined loop with the tracked component and the lifted
/// (unwrapped) rotation numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub value: LoopValue,
    pub r_interval: (f64, f64),
    pub theta_n: f64,
    pub theta_j: f64,
    pub t_red: f64,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    value: LoopValue,
    iv: (f64, f64),
    rot: RotationData,
}

fn endpoint_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs() + (a.1 - b.1).abs()
}

/// Largest endpoint change accepted between neighbouring values.
fn track_window(prev: (f64, f64)) -> f64 {
    0.02 * (prev.1 - prev.0) + 1e-9 * (1.0 + prev.1.abs())
}

/// Component of `report` continuing the component `prev`: the one with the
/// nearest R-interval ends. `None` when the nearest is not close enough to
/// decide, so the caller refines.
fn track(prev: (f64, f64), value: LoopValue, report: &FiberReport) -> Result<Option<(f64, f64)>> {
    let mut ranked: Vec<(f64, ComponentKind, (f64, f64))> = report
        .components
        .iter()
        .map(|c| (endpoint_distance(prev, c.r_interval), c.kind, c.r_interval))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let Some(&(d, kind, iv)) = ranked.first() else {
        return Err(Error::CriticalValue(format!("empty fiber at {value:?}")));
    };
    let second = ranked.get(1).map_or(f64::INFINITY, |r| r.0);
    if d > track_window(prev) || second <= 2.0 * d {
        return Ok(None);
    }
    if kind != ComponentKind::Torus3 {
        return Err(Error::CriticalValue(format!(
            "tracked component becomes {} at {value:?}",
            kind.name()
        )));
    }
    check_flag(report, iv, value)?;
    Ok(Some(iv))
}

fn classify_at(value: LoopValue, params: &ModelParams) -> Result<FiberReport> {
    let cas = value.casimirs();
    classify_fiber(cas, reduced_params(params, cas), value.h)
}

#[derive(Debug, Clone)]
struct Tracked {
    value: LoopValue,
    iv: (f64, f64),
    kinds: Vec<(ComponentKind, usize)>,
}

/// Tracks the component from `a` to `b`. Where the fiber type changes the
/// segment is bisected down to `EVENT_WIDTH` of its length; there the
/// tracked interval must be continuous, which holds when another component
/// is born or dies and fails when the tracked one splits or merges.
fn track_segment(
    a: &Tracked,
    b: LoopValue,
    b_report: &FiberReport,
    params: &ModelParams,
    out: &mut Vec<Tracked>,
    frac: f64,
) -> Result<()> {
    const EVENT_WIDTH: f64 = 1e-12;
    let kinds = b_report.multiset();
    let event = kinds != a.kinds;
    let cand = track(a.iv, b, b_report)?;
    if let Some(iv) = cand {
        let jump = endpoint_distance(a.iv, iv);
        let settled = !event || frac <= EVENT_WIDTH;
        if settled {
            if event && jump > 1e-6 * (1.0 + a.iv.1.abs()) {
                return Err(Error::CriticalValue(format!(
                    "tracked component merges or splits between {:?} and {b:?}",
                    a.value
                )));
            }
            out.push(Tracked { value: b, iv, kinds });
            return Ok(());
        }
    } else if frac <= EVENT_WIDTH {
        return Err(Error::CriticalValue(format!(
            "tracked component merges or splits between {:?} and {b:?}",
            a.value
        )));
    }
    let mid = LoopValue::lerp(a.value, b, 0.5);
    let mid_report = classify_at(mid, params)?;
    track_segment(a, mid, &mid_report, params, out, 0.5 * frac)?;
    let m = out.last().unwrap().clone();
    track_segment(&m, b, b_report, params, out, 0.5 * frac)
}

fn evaluate(value: LoopValue, iv: (f64, f64), params: &ModelParams, cfg: &MonodromyConfig) -> Result<Node> {
    let sel = ComponentSelector::Containing(0.5 * (iv.0 + iv.1));
    let rot = rotation_numbers(value, sel, params, cfg)?;
    Ok(Node { value, iv, rot })
}

fn unwrap_step(a: &RotationData, b: &RotationData) -> (f64, f64) {
    let d = |x: f64| x - x.round();
    (d(b.theta_n - a.theta_n), d(b.theta_j - a.theta_j))
}

/// Continues the rotation numbers around a closed loop of values and
/// returns the winding.
pub fn monodromy_vector(loop_values: &[LoopValue], params: &ModelParams, cfg: &MonodromyConfig) -> Result<LoopWinding> {
    params.validate()?;
    if loop_values.len() < 3 {
        return Err(Error::Invalid("a loop needs at least three values".into()));
    }
    let first = loop_values[0];
    let last = *loop_values.last().unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs());
    if !(close(first.mu, last.mu) && close(first.iota, last.iota) && close(first.h, last.h)) {
        return Err(Error::Invalid("loop is not closed (first value differs from last)".into()));
    }
    if loop_values.len() > cfg.max_points {
        return Err(Error::Invalid(format!("loop has more than {} values", cfg.max_points)));
    }

    let reports: Vec<FiberReport> = loop_values.par_iter().map(|&v| classify_at(v, params)).collect::<Result<_>>()?;
    let first_iv = select(&torus3_intervals(&reports[0]), cfg.selector).ok_or_else(|| {
        Error::CriticalValue(format!("no regular T³ component at {first:?} (fiber {})", reports[0].summary()))
    })?;
    check_flag(&reports[0], first_iv, first)?;
    let mut tracked = vec![Tracked { value: first, iv: first_iv, kinds: reports[0].multiset() }];
    for (k, rep) in reports.iter().enumerate().skip(1) {
        let a = tracked.last().unwrap().clone();
        track_segment(&a, loop_values[k], rep, params, &mut tracked, 1.0)?;
        if tracked.len() > cfg.max_points {
            return Err(Error::CriticalValue(format!("more than {} values needed to track the component", cfg.max_points)));
        }
    }
    let end_iv = tracked.last().unwrap().iv;
    if endpoint_distance(end_iv, first_iv) > 1e-6 * (1.0 + first_iv.1.abs()) {
        return Err(Error::CriticalValue("loop returns on a different component".into()));
    }
    let nodes: Vec<Node> = tracked
        .par_iter()
        .map(|t| evaluate(t.value, t.iv, params, cfg))
        .collect::<Result<_>>()?;

    let mut total = (0.0, 0.0);
    let mut max_step: f64 = 0.0;
    let mut count = nodes.len();
    let mut track_out = vec![TrackPoint {
        value: nodes[0].value,
        r_interval: nodes[0].iv,
        theta_n: nodes[0].rot.theta_n,
        theta_j: nodes[0].rot.theta_j,
        t_red: nodes[0].rot.t_red,
    }];
    for w in nodes.windows(2) {
        refine(w[0], w[1], params, cfg, &mut total, &mut max_step, &mut count, &mut track_out, 0)?;
    }
    let winding = (ORIENT * total.0, ORIENT * total.1);
    let off = (winding.0 - winding.0.round()).abs().max((winding.1 - winding.1.round()).abs());
    if off > cfg.integrality {
        return Err(Error::NonInteger(format!("winding ({:.6}, {:.6})", winding.0, winding.1)));
    }
    Ok(LoopWinding {
        vector: MonodromyVector::new(winding.0.round() as i64, winding.1.round() as i64),
        winding,
        points: count,
        max_step,
        track: track_out,
    })
}

#[allow(clippy::too_many_arguments)]
fn refine(
    a: Node,
    b: Node,
    params: &ModelParams,
    cfg: &MonodromyConfig,
    total: &mut (f64, f64),
    max_step: &mut f64,
    count: &mut usize,
    track_out: &mut Vec<TrackPoint>,
    depth: usize,
) -> Result<()> {
    let (dn, dj) = unwrap_step(&a.rot, &b.rot);
    let step = dn.abs().max(dj.abs());
    if step < cfg.max_jump {
        total.0 += dn;
        total.1 += dj;
        *max_step = max_step.max(step);
        let prev = *track_out.last().unwrap();
        track_out.push(TrackPoint {
            value: b.value,
            r_interval: b.iv,
            theta_n: prev.theta_n + dn,
            theta_j: prev.theta_j + dj,
            t_red: b.rot.t_red,
        });
        return Ok(());
    }
    if *count >= cfg.max_points || depth > 40 {
        return Err(Error::CriticalValue(format!(
            "rotation numbers jump by {step:.3} between {:?} and {:?} after refinement",
            a.value, b.value
        )));
    }
    let mid = LoopValue::lerp(a.value, b.value, 0.5);
    let report = classify_at(mid, params)?;
    let iv = track(a.iv, mid, &report)?
        .filter(|&iv| endpoint_distance(iv, b.iv) <= track_window(b.iv))
        .ok_or_else(|| Error::CriticalValue(format!("component tracking breaks near {mid:?}")))?;
    let m = evaluate(mid, iv, params, cfg)?;
    *count += 1;
    refine(a, m, params, cfg, total, max_step, count, track_out, depth + 1)?;
    refine(m, b, params, cfg, total, max_step, count, track_out, depth + 1)
}

/// Named loops around the three tip curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    Gamma1,
    Gamma2,
    Gamma3,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::Gamma1, Generator::Gamma2, Generator::Gamma3];

    pub fn thread(self) -> Thread {
        match self {
            Generator::Gamma1 => Thread::C23,
            Generator::Gamma2 => Thread::C13,
            Generator::Gamma3 => Thread::C12,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::Gamma1 => "gamma1",
            Generator::Gamma2 => "gamma2",
            Generator::Gamma3 => "gamma3",
        }
    }

    pub fn from_name(s: &str) -> Option<Generator> {
        Generator::ALL.into_iter().find(|g| g.name() == s)
    }

    /// Vector the loop is expected to produce.
    pub fn expected(self) -> MonodromyVector {
        match self {
            Generator::Gamma1 => MonodromyVector::new(1, -1),
            Generator::Gamma2 => MonodromyVector::new(0, 1),
            Generator::Gamma3 => MonodromyVector::new(-1, 0),
        }
    }
}

/// A generator loop together with the thread point it encircles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorLoop {
    pub generator: Generator,
    pub ell_c: f64,
    pub h_c: f64,
    /// Radii in the two loop directions (ι or μ, then h).
    pub radii: (f64, f64),
    pub values: Vec<LoopValue>,
}

/// Unstable ℓ-interval of a thread, scanned with the ℓ-dependent λ.
pub fn unstable_interval(thread: Thread, params: &ModelParams) -> Option<(f64, f64)> {
    const N: usize = 2000;
    let k = params.kappa;
    let t = k * params.delta;
    let span = (4.0 + 2.0 * t.abs() + t * t) / (k * k) + 2.0 * params.delta * params.delta;
    let (a, b) = match thread {
        Thread::C12 => (-span, 0.0),
        _ => (0.0, span),
    };
    let unstable = |ell: f64| {
        let cas = thread.casimirs(ell);
        tip_curvature(cas, reduced_params(params, cas)) < 0.0
    };
    let xs: Vec<f64> = (1..N).map(|i| a + (b - a) * i as f64 / N as f64).collect();
    let i0 = xs.iter().position(|&x| unstable(x))?;
    let mut i1 = i0;
    while i1 + 1 < xs.len() && unstable(xs[i1 + 1]) {
        i1 += 1;
    }
    let edge = |good: f64, bad: f64| {
        let (mut g, mut b) = (good, bad);
        for _ in 0..200 {
            let m = 0.5 * (g + b);
            if unstable(m) {
                g = m;
            } else {
                b = m;
            }
        }
        g
    };
    let lo = if i0 == 0 { a } else { edge(xs[i0], xs[i0 - 1]) };
    let hi = if i1 + 1 == xs.len() { b } else { edge(xs[i1], xs[i1 + 1]) };
    Some((lo, hi))
}

/// Loop around the unstable part of a thread, with `n` segments.
///
/// * γ1 (C23): plane μ = ℓ_c, clockwise in (ι, h) around (ℓ_c, h_c).
/// * γ2 (C13): plane μ = −ℓ_c, counterclockwise in (ι, h) around (0, h_c).
/// * γ3 (C12): plane ι = ℓ_c/2, (μ, h) = (ρ sin φ, h_c + ρ_h cos φ) with φ
///   increasing.
///
/// The radii start at half the height of the thread above the minimum and
/// are halved until every vertex has the same regular fiber type.
pub fn generator_loop(gen: Generator, params: &ModelParams, n: usize) -> Result<GeneratorLoop> {
    params.validate()?;
    if !(params.kappa > 0.0) {
        return Err(Error::Unsupported("generator loops need κ > 0".into()));
    }
    let thread = gen.thread();
    let (lo, hi) = unstable_interval(thread, params)
        .ok_or_else(|| Error::Unsupported(format!("thread {} has no unstable part here", thread.name())))?;
    let ell_c = match thread {
        Thread::C12 => hi - (0.5 * (hi - lo)).min(1.0),
        _ => 0.5 * (lo + hi),
    };
    let cas_c = thread.casimirs(ell_c);
    let rp_c = reduced_params(params, cas_c);
    let h_c = thread.h_c(ell_c, rp_c);
    let hm = h_min(cas_c, rp_c)?;
    let mut rho_h = 0.5 * (h_c - hm);
    let mut rho_s = 0.25 * (ell_c - lo).min(hi - ell_c).min(1.0);
    let n = n.max(8);
    let mut last_err = None;
    for _ in 0..12 {
        let values = loop_values(gen, ell_c, h_c, rho_s, rho_h, n);
        match homogeneous(&values, params) {
            Ok(()) => {
                return Ok(GeneratorLoop { generator: gen, ell_c, h_c, radii: (rho_s, rho_h), values });
            }
            Err(e) => last_err = Some(e),
        }
        rho_h *= 0.5;
        rho_s *= 0.5;
    }
    Err(last_err.unwrap_or_else(|| Error::CriticalValue("no admissible loop radius".into())))
}

fn loop_values(gen: Generator, ell_c: f64, h_c: f64, rho_s: f64, rho_h: f64, n: usize) -> Vec<LoopValue> {
    (0..=n)
        .map(|k| {
            let phi = TAU * (k % n) as f64 / n as f64;
            let (c, s) = (phi.cos(), phi.sin());
            match gen {
                Generator::Gamma1 => LoopValue::new(ell_c, ell_c + rho_s * c, h_c - rho_h * s),
                Generator::Gamma2 => LoopValue::new(-ell_c, rho_s * c, h_c + rho_h * s),
                Generator::Gamma3 => LoopValue::new(rho_s * s, 0.5 * ell_c, h_c + rho_h * c),
            }
        })
        .collect()
}

fn homogeneous(values: &[LoopValue], params: &ModelParams) -> Result<()> {
    let reports: Vec<FiberReport> = values
        .par_iter()
        .map(|v| classify_fiber(v.casimirs(), reduced_params(params, v.casimirs()), v.h))
        .collect::<Result<_>>()?;
    let kinds = reports[0].multiset();
    for (v, r) in values.iter().zip(&reports) {
        if r.is_critical || r.flag.is_some() || r.count(ComponentKind::Torus3) == 0 || r.multiset() != kinds {
            return Err(Error::CriticalValue(format!("loop vertex {v:?} has fiber {}", r.summary())));
        }
    }
    Ok(())
}

/// Closed polygon through `vertices` (the first is repeated at the end),
/// with `per_edge` segments on each edge.
pub fn polygon_loop(vertices: &[LoopValue], per_edge: usize) -> Vec<LoopValue> {
    let per_edge = per_edge.max(1);
    let mut out = Vec::with_capacity(vertices.len() * per_edge + 1);
    for (k, &a) in vertices.iter().enumerate() {
        let b = vertices[(k + 1) % vertices.len()];
        for i in 0..per_edge {
            out.push(LoopValue::lerp(a, b, i as f64 / per_edge as f64));
        }
    }
    if let Some(&first) = vertices.first() {
        out.push(first);
    }
    out
}

/// Builds and runs a generator loop.
pub fn generator_vector(
    gen: Generator,
    params: &ModelParams,
    n: usize,
    cfg: &MonodromyConfig,
) -> Result<(GeneratorLoop, LoopWinding)> {
    let lp = generator_loop(gen, params, n)?;
    let w = monodromy_vector(&lp.values, params, cfg)?;
    Ok((lp, w))
}
