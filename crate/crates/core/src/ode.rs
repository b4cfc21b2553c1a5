//! Explicit adaptive Dormand–Prince 8(5,3) integrator for autonomous systems.
//!
//! The driver exposes single accepted steps so callers can monitor
//! invariants and locate events themselves; `trial` re-runs one step of a
//! chosen size from the current state for event refinement.

use crate::error::{Error, Result};

const STAGES: usize = 12;
const A: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
];
const B: [f64; STAGES] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];
const E3: [f64; STAGES + 1] = [
    -0.18980075407240762,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    -0.4226823213237919,
    -0.1521609496625161,
    0.20136540080403034,
    0.02265179219836082,
    0.0,
];
const E5: [f64; STAGES + 1] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
    0.0,
];

/// Right-hand side of an autonomous system y' = f(y).
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, y: &[f64], dy: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Tolerances { rtol: tol, atol: tol }
    }
}

pub struct Dop853<'a, S: OdeSystem> {
    sys: &'a S,
    tol: Tolerances,
    t: f64,
    y: Vec<f64>,
    f: Vec<f64>,
    h: f64,
    k: Vec<Vec<f64>>,
    steps: usize,
    max_steps: usize,
}

impl<'a, S: OdeSystem> Clone for Dop853<'a, S> {
    fn clone(&self) -> Self {
        Dop853 {
            sys: self.sys,
            tol: self.tol,
            t: self.t,
            y: self.y.clone(),
            f: self.f.clone(),
            h: self.h,
            k: self.k.clone(),
            steps: self.steps,
            max_steps: self.max_steps,
        }
    }
}

fn rms_scaled(v: &[f64], scale: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(a, b)| (a / b) * (a / b)).sum();
    (s / v.len() as f64).sqrt()
}

impl<'a, S: OdeSystem> Dop853<'a, S> {
    pub fn new(sys: &'a S, y0: &[f64], tol: Tolerances) -> Self {
        let n = sys.dim();
        assert_eq!(y0.len(), n, "state dimension mismatch");
        let mut f = vec![0.0; n];
        sys.rhs(y0, &mut f);
        let mut me = Dop853 {
            sys,
            tol,
            t: 0.0,
            y: y0.to_vec(),
            f,
            h: 0.0,
            k: vec![vec![0.0; n]; STAGES + 1],
            steps: 0,
            max_steps: 50_000_000,
        };
        me.h = me.initial_step();
        me
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn scale(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(x, y)| self.tol.atol + self.tol.rtol * x.abs().max(y.abs()))
            .collect()
    }

    fn initial_step(&self) -> f64 {
        let n = self.y.len();
        let scale: Vec<f64> = self.y.iter().map(|x| self.tol.atol + self.tol.rtol * x.abs()).collect();
        let d0 = rms_scaled(&self.y, &scale);
        let d1 = rms_scaled(&self.f, &scale);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: Vec<f64> = (0..n).map(|i| self.y[i] + h0 * self.f[i]).collect();
        let mut f1 = vec![0.0; n];
        self.sys.rhs(&y1, &mut f1);
        let diff: Vec<f64> = (0..n).map(|i| f1[i] - self.f[i]).collect();
        let d2 = rms_scaled(&diff, &scale) / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1)
    }

    /// One step of size h from (y, f); fills the stage buffer and returns
    /// the new state.
    fn rk_step(sys: &S, y: &[f64], f: &[f64], h: f64, k: &mut [Vec<f64>]) -> Vec<f64> {
        let n = y.len();
        k[0].copy_from_slice(f);
        let mut tmp = vec![0.0; n];
        for s in 1..STAGES {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                tmp[i] = y[i] + h * acc;
            }
            sys.rhs(&tmp, &mut k[s]);
        }
        let mut y_new = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..STAGES {
                acc += B[j] * k[j][i];
            }
            y_new[i] = y[i] + h * acc;
        }
        sys.rhs(&y_new, &mut k[STAGES]);
        y_new
    }

    /// State after a single step of size `h` from the current point, without
    /// error control.
    pub fn trial(&self, h: f64) -> Vec<f64> {
        let mut k = vec![vec![0.0; self.y.len()]; STAGES + 1];
        Self::rk_step(self.sys, &self.y, &self.f, h, &mut k)
    }

    /// Takes one accepted step of size at most `h_max`.
    pub fn step(&mut self, h_max: f64) -> Result<()> {
        if self.steps >= self.max_steps {
            return Err(Error::Integration(format!("step budget of {} exhausted", self.max_steps)));
        }
        let n = self.y.len();
        let mut h = self.h.min(h_max);
        let mut rejected = false;
        loop {
            let floor = 1e-13 * (1.0 + self.t.abs());
            if h < floor {
                return Err(Error::Singular(format!("step {h:e} at t = {}", self.t)));
            }
            let y_new = Self::rk_step(self.sys, &self.y, &self.f, h, &mut self.k);
            let scale = self.scale(&self.y, &y_new);
            let mut e5 = 0.0;
            let mut e3 = 0.0;
            for (i, sc) in scale.iter().enumerate() {
                let mut a5 = 0.0;
                let mut a3 = 0.0;
                for j in 0..=STAGES {
                    a5 += E5[j] * self.k[j][i];
                    a3 += E3[j] * self.k[j][i];
                }
                e5 += (a5 / sc).powi(2);
                e3 += (a3 / sc).powi(2);
            }
            let err = if e5 == 0.0 && e3 == 0.0 {
                0.0
            } else {
                h * e5 / ((e5 + 0.01 * e3) * n as f64).sqrt()
            };
            if !err.is_finite() {
                h *= 0.2;
                rejected = true;
                continue;
            }
            if err <= 1.0 {
                let mut factor = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-1.0 / 8.0)).min(10.0) };
                if rejected {
                    factor = factor.min(1.0);
                }
                self.t += h;
                self.y = y_new;
                self.f.copy_from_slice(&self.k[STAGES]);
                let proposed = h * factor.max(0.2);
                let truncated = h >= h_max && h < self.h;
                self.h = if truncated { self.h.max(proposed) } else { proposed };
                self.steps += 1;
                return Ok(());
            }
            h *= (0.9 * err.powf(-1.0 / 8.0)).max(0.2);
            rejected = true;
        }
    }

    /// Integrates up to exactly `t_end`, calling `observe` after each step.
    pub fn run_to<F: FnMut(f64, &[f64])>(&mut self, t_end: f64, mut observe: F) -> Result<()> {
        while self.t < t_end {
            let remaining = t_end - self.t;
            if remaining <= 1e-15 * (1.0 + t_end.abs()) {
                break;
            }
            self.step(remaining)?;
            observe(self.t, &self.y);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn harmonic_oscillator_one_period() {
        let sys = Oscillator;
        let mut ig = Dop853::new(&sys, &[1.0, 0.0], Tolerances::uniform(1e-12));
        ig.run_to(2.0 * std::f64::consts::PI, |_, _| {}).unwrap();
        assert!((ig.y()[0] - 1.0).abs() < 1e-10);
        assert!(ig.y()[1].abs() < 1e-10);
    }

    #[test]
    fn trial_step_matches_exact_flow() {
        let sys = Oscillator;
        let ig = Dop853::new(&sys, &[1.0, 0.0], Tolerances::uniform(1e-12));
        let y = ig.trial(0.1);
        assert!((y[0] - 0.1f64.cos()).abs() < 1e-13);
    }
}
