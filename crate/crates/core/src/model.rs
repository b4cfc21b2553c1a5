//! Normal-form parameters, phase-space states, the T²-invariant polynomials
//! and their Poisson structure.
//!
//! Oscillator coordinates (q, p) carry the complex amplitudes
//! z_j = p_j + i q_j with actions I_j = |z_j|²/2. The invariants are
//! N = I₁ − I₂, L = I₁ + I₂ − 2I₃, J = (N + L)/2, R = I₁ + I₂ and
//! X + iY = z₁z₂z₃. Brackets follow {F, G} = F_q·G_p − F_p·G_q, which gives
//! {R, X} = 2Y.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the truncated normal form
/// H = αL + βN + δR + X + (κ/2)R² + (λ₁N + λ₂L)R + γ₁N²/2 + γ₂NL + γ₃L²/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub kappa: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            alpha: 0.0,
            beta: 0.0,
            delta: 0.0,
            kappa: 1.0,
            lambda1: 0.0,
            lambda2: 0.0,
            gamma1: 0.0,
            gamma2: 0.0,
            gamma3: 0.0,
        }
    }
}

impl ModelParams {
    /// Vertical-plane parameters: only δ and κ set.
    pub fn with_detuning(delta: f64, kappa: f64) -> Self {
        ModelParams { delta, kappa, ..Default::default() }
    }

    pub fn is_kappa_zero(&self) -> bool {
        self.kappa == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.alpha, self.beta, self.delta, self.kappa, self.lambda1, self.lambda2, self.gamma1,
            self.gamma2, self.gamma3,
        ];
        if fields.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Invalid("model parameters must be finite".into()))
        }
    }

    /// Full normal form evaluated at Casimir values and a reduced point.
    pub fn normal_form(&self, cas: CasimirValues, p: InvariantPoint) -> f64 {
        let (n, l, r) = (cas.mu, cas.ell, p.r);
        self.alpha * l
            + self.beta * n
            + self.delta * r
            + p.x
            + 0.5 * self.kappa * r * r
            + (self.lambda1 * n + self.lambda2 * l) * r
            + 0.5 * self.gamma1 * n * n
            + self.gamma2 * n * l
            + 0.5 * self.gamma3 * l * l
    }
}

/// Which coordinate chart a [`FullState`] stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    Oscillator,
    Original,
}

/// A point of R⁶ held in one chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    chart: Chart,
    first: [f64; 3],
    second: [f64; 3],
}

impl FullState {
    pub fn from_oscillator(q: [f64; 3], p: [f64; 3]) -> Self {
        FullState { chart: Chart::Oscillator, first: q, second: p }
    }

    pub fn from_original(x: [f64; 3], y: [f64; 3]) -> Self {
        FullState { chart: Chart::Original, first: x, second: y }
    }

    /// State with the given complex amplitudes z_j = p_j + i q_j.
    pub fn from_amplitudes(z: [Complex64; 3]) -> Self {
        FullState::from_oscillator([z[0].im, z[1].im, z[2].im], [z[0].re, z[1].re, z[2].re])
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    /// (q, p)
    pub fn oscillator(&self) -> ([f64; 3], [f64; 3]) {
        match self.chart {
            Chart::Oscillator => (self.first, self.second),
            Chart::Original => to_oscillator(self.first, self.second),
        }
    }

    /// (x, y)
    pub fn original(&self) -> ([f64; 3], [f64; 3]) {
        match self.chart {
            Chart::Original => (self.first, self.second),
            Chart::Oscillator => from_oscillator(self.first, self.second),
        }
    }

    pub fn amplitudes(&self) -> [Complex64; 3] {
        let (q, p) = self.oscillator();
        [
            Complex64::new(p[0], q[0]),
            Complex64::new(p[1], q[1]),
            Complex64::new(p[2], q[2]),
        ]
    }

    pub fn actions(&self) -> [f64; 3] {
        let (q, p) = self.oscillator();
        [
            0.5 * (p[0] * p[0] + q[0] * q[0]),
            0.5 * (p[1] * p[1] + q[1] * q[1]),
            0.5 * (p[2] * p[2] + q[2] * q[2]),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.first.iter().chain(self.second.iter()).all(|v| v.is_finite())
    }
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// (x, y) from (q, p):
/// x₁ = (q₁ − p₂)/√2, x₂ = (q₂ − p₁)/√2, y₁ = (q₂ + p₁)/√2, y₂ = (q₁ + p₂)/√2,
/// x₃ = q₃, y₃ = p₃.
pub fn from_oscillator(q: [f64; 3], p: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let x = [SQRT_HALF * (q[0] - p[1]), SQRT_HALF * (q[1] - p[0]), q[2]];
    let y = [SQRT_HALF * (q[1] + p[0]), SQRT_HALF * (q[0] + p[1]), p[2]];
    (x, y)
}

/// Inverse of [`from_oscillator`] (the 4×4 block is orthogonal, so this is
/// its transpose).
pub fn to_oscillator(x: [f64; 3], y: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let q = [SQRT_HALF * (x[0] + y[1]), SQRT_HALF * (x[1] + y[0]), x[2]];
    let p = [SQRT_HALF * (y[0] - x[1]), SQRT_HALF * (y[1] - x[0]), y[2]];
    (q, p)
}

/// A point (R, X, Y) of invariant space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantPoint {
    pub r: f64,
    pub x: f64,
    pub y: f64,
}

impl InvariantPoint {
    pub fn new(r: f64, x: f64, y: f64) -> Self {
        InvariantPoint { r, x, y }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r, self.x, self.y]
    }
}

/// Values μ of N and ℓ of L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CasimirValues {
    pub mu: f64,
    pub ell: f64,
}

impl CasimirValues {
    pub fn new(mu: f64, ell: f64) -> Self {
        CasimirValues { mu, ell }
    }

    /// From the values (μ, ι) of (N, J), using L = 2J − N.
    pub fn from_mu_iota(mu: f64, iota: f64) -> Self {
        CasimirValues { mu, ell: 2.0 * iota - mu }
    }

    pub fn iota(&self) -> f64 {
        0.5 * (self.mu + self.ell)
    }
}

/// Output of [`reduce`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub n: f64,
    pub l: f64,
    pub j: f64,
    pub point: InvariantPoint,
}

impl Reduction {
    pub fn casimirs(&self) -> CasimirValues {
        CasimirValues::new(self.n, self.l)
    }
}

pub fn reduce(state: &FullState) -> Reduction {
    let [i1, i2, i3] = state.actions();
    let z = state.amplitudes();
    let w = z[0] * z[1] * z[2];
    let n = i1 - i2;
    let l = i1 + i2 - 2.0 * i3;
    Reduction { n, l, j: 0.5 * (n + l), point: InvariantPoint::new(i1 + i2, w.re, w.im) }
}

/// S = X² + Y² − (R² − μ²)(R − ℓ).
pub fn syzygy_residual(p: InvariantPoint, cas: CasimirValues) -> f64 {
    p.x * p.x + p.y * p.y - (p.r * p.r - cas.mu * cas.mu) * (p.r - cas.ell)
}

/// ∇S in (R, X, Y).
pub fn syzygy_gradient(p: InvariantPoint, cas: CasimirValues) -> [f64; 3] {
    let (r, mu, ell) = (p.r, cas.mu, cas.ell);
    [-(3.0 * r * r - 2.0 * ell * r - mu * mu), 2.0 * p.x, 2.0 * p.y]
}

/// Bracket matrix B with B[i][j] = {e_i, e_j} for (R, X, Y).
pub fn structure_matrix(p: InvariantPoint, cas: CasimirValues) -> [[f64; 3]; 3] {
    let rx = 2.0 * p.y;
    let ry = -2.0 * p.x;
    let xy = cas.mu * cas.mu + 2.0 * cas.ell * p.r - 3.0 * p.r * p.r;
    [[0.0, rx, ry], [-rx, 0.0, xy], [-ry, -xy, 0.0]]
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// {f, g} = ⟨∇f × ∇g | ∇S⟩ from gradients in (R, X, Y).
pub fn triple_product_bracket(
    grad_f: [f64; 3],
    grad_g: [f64; 3],
    p: InvariantPoint,
    cas: CasimirValues,
) -> f64 {
    dot(cross(grad_f, grad_g), syzygy_gradient(p, cas))
}

/// Non-trivial isotropy of the T²-action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Isotropy {
    Trivial,
    C12,
    C13,
    C23,
    C123,
}

pub const DEFAULT_EPS_Z: f64 = 1e-12;

/// Isotropy class with vanishing decided by |z_j|² ≤ eps_z.
pub fn isotropy_class(state: &FullState, eps_z: f64) -> Isotropy {
    let z = state.amplitudes();
    let zero = |k: usize| z[k].norm_sqr() <= eps_z;
    match (zero(0), zero(1), zero(2)) {
        (true, true, true) => Isotropy::C123,
        (true, true, false) => Isotropy::C12,
        (true, false, true) => Isotropy::C13,
        (false, true, true) => Isotropy::C23,
        _ => Isotropy::Trivial,
    }
}

/// Φ(s, t): (z₁, z₂, z₃) ↦ (e^{2πi(s+t)} z₁, e^{−2πis} z₂, e^{−2πit} z₃),
/// generated by the flows of N (angle s) and J (angle t).
pub fn t2_action(state: &FullState, s: f64, t: f64) -> FullState {
    let tau = std::f64::consts::TAU;
    let z = state.amplitudes();
    let rot = |a: f64| Complex64::from_polar(1.0, tau * a);
    FullState::from_amplitudes([z[0] * rot(s + t), z[1] * rot(-s), z[2] * rot(-t)])
}

/// λ = δ + λ₁μ + λ₂ℓ.
pub fn detuning_lambda(params: &ModelParams, cas: CasimirValues) -> f64 {
    params.delta + params.lambda1 * cas.mu + params.lambda2 * cas.ell
}

/// A bundle of reduced data that transforms under the κ-scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledValues {
    pub lambda: f64,
    pub mu: f64,
    pub ell: f64,
    pub r: f64,
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

/// (λ, μ, ℓ, R, X, Y, H) ↦ (κ⁻¹λ, κ⁻²μ, κ⁻²ℓ, κ⁻²R, κ⁻³X, κ⁻³Y, κ⁻³H).
///
/// Read as a map on values this carries data of the κ = 1 system to the
/// equivalent data of the system with coefficient κ. [`to_unit_kappa`] is its
/// inverse.
pub fn kappa_scaling(v: ScaledValues, kappa: f64) -> Result<ScaledValues> {
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::Invalid("kappa scaling needs a finite nonzero kappa".into()));
    }
    Ok(apply_powers(v, 1.0 / kappa))
}

/// Maps data of the system with coefficient κ to the κ = 1 system:
/// (κλ, κ²μ, κ²ℓ, κ²R, κ³X, κ³Y, κ³H).
pub fn to_unit_kappa(v: ScaledValues, kappa: f64) -> Result<ScaledValues> {
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::Invalid("kappa scaling needs a finite nonzero kappa".into()));
    }
    Ok(apply_powers(v, kappa))
}

fn apply_powers(v: ScaledValues, s: f64) -> ScaledValues {
    let s2 = s * s;
    let s3 = s2 * s;
    ScaledValues {
        lambda: s * v.lambda,
        mu: s2 * v.mu,
        ell: s2 * v.ell,
        r: s2 * v.r,
        x: s3 * v.x,
        y: s3 * v.y,
        h: s3 * v.h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_change_example() {
        let s = FullState::from_oscillator([2f64.sqrt(), 0.0, 0.0], [0.0; 3]);
        let (x, y) = s.original();
        assert!((x[0] - 1.0).abs() < 1e-15 && x[1] == 0.0 && x[2] == 0.0);
        assert!(y[0] == 0.0 && (y[1] - 1.0).abs() < 1e-15 && y[2] == 0.0);
        let n_xy = x[0] * y[1] - x[1] * y[0];
        assert!((n_xy - reduce(&s).n).abs() < 1e-15);
    }

    #[test]
    fn reduce_examples() {
        let one = Complex64::new(1.0, 0.0);
        let r = reduce(&FullState::from_amplitudes([one, one, one]));
        assert_eq!((r.n, r.l, r.point.r, r.point.x, r.point.y), (0.0, 0.0, 1.0, 1.0, 0.0));
        let zero = Complex64::new(0.0, 0.0);
        let r = reduce(&FullState::from_amplitudes([zero, zero, Complex64::new(2f64.sqrt(), 0.0)]));
        assert!((r.l + 2.0).abs() < 1e-15 && r.n == 0.0 && r.point.r == 0.0);
    }

    #[test]
    fn syzygy_examples() {
        let c = CasimirValues::new(0.0, 0.0);
        assert_eq!(syzygy_residual(InvariantPoint::new(1.0, 1.0, 0.0), c), 0.0);
        assert_eq!(syzygy_residual(InvariantPoint::new(0.0, 0.0, 0.0), c), 0.0);
        assert_eq!(syzygy_residual(InvariantPoint::new(2.0, 0.0, 0.0), c), -8.0);
    }

    #[test]
    fn structure_matrix_example() {
        let m = structure_matrix(InvariantPoint::new(1.0, 1.0, 0.0), CasimirValues::new(0.0, 0.0));
        assert_eq!((m[0][1], m[0][2], m[1][2]), (0.0, -2.0, -3.0));
        let m = structure_matrix(InvariantPoint::new(0.0, 0.0, 0.0), CasimirValues::new(0.7, -1.0));
        assert_eq!((m[0][1], m[0][2]), (0.0, 0.0));
        assert!((m[1][2] - 0.49).abs() < 1e-15);
    }

    #[test]
    fn isotropy_examples() {
        let z0 = Complex64::new(0.0, 0.0);
        let z1 = Complex64::new(0.3, -0.2);
        let cls = |z| isotropy_class(&FullState::from_amplitudes(z), DEFAULT_EPS_Z);
        assert_eq!(cls([z0, z0, z0]), Isotropy::C123);
        assert_eq!(cls([z0, z0, z1]), Isotropy::C12);
        assert_eq!(cls([z0, z1, z0]), Isotropy::C13);
        assert_eq!(cls([z1, z0, z0]), Isotropy::C23);
        assert_eq!(cls([z1, z1, z1]), Isotropy::Trivial);
    }

    #[test]
    fn detuning_examples() {
        let c = CasimirValues::new(1.0, 1.0);
        assert_eq!(detuning_lambda(&ModelParams::with_detuning(-1.0, 1.0), c), -1.0);
        let p = ModelParams { lambda1: 1.0, lambda2: 2.0, ..Default::default() };
        assert_eq!(detuning_lambda(&p, c), 3.0);
    }

    #[test]
    fn kappa_scaling_examples() {
        let v = ScaledValues { lambda: 2.0, mu: 4.0, ell: 8.0, r: 0.0, x: 0.0, y: 0.0, h: 0.0 };
        let s = kappa_scaling(v, 2.0).unwrap();
        assert_eq!((s.lambda, s.mu, s.ell), (1.0, 1.0, 2.0));
        assert_eq!(kappa_scaling(v, 1.0).unwrap(), v);
        assert!(kappa_scaling(v, 0.0).is_err());
        let back = to_unit_kappa(s, 2.0).unwrap();
        assert_eq!(back, v);
    }
}
