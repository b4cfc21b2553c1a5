//! Bifurcations of the reduced system as multiple roots of the quartic
//! F(R) = (h − λR − (κ/2)R²)² − (R² − μ²)(R − ℓ), closed-form families and a
//! numerical solver that finds them independently.

pub mod catalog;
pub mod oracle;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CasimirValues;
use crate::poly;
use crate::reduced_dynamics::ReducedParams;
use crate::reduced_space::{r_min, tip_class, TipKind, DEFAULT_EPS_C};

pub use catalog::{
    a0_root, catalog_point, catalog_point_kappa0, families_present, families_present_kappa0,
    tag_event, CatalogPoint, FamilyArg,
};
pub use oracle::{solve_bifurcations_numeric, OracleConfig, OracleMode, OracleReport};

/// F(R) with coefficients c0..c4 in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartic {
    pub c: [f64; 5],
}

impl Quartic {
    pub fn eval(&self, r: f64) -> f64 {
        poly::eval(&self.c, r)
    }

    /// k-th derivative at r.
    pub fn deriv(&self, k: usize, r: f64) -> f64 {
        poly::eval_derivative(&self.c, k, r)
    }

    /// Sum of monomial magnitudes at r.
    pub fn magnitude(&self, r: f64) -> f64 {
        poly::eval_abs(&self.c, r)
    }
}

pub fn f_quartic(h: f64, rp: ReducedParams, cas: CasimirValues) -> Quartic {
    let (l, k) = (rp.lambda, rp.kappa);
    let (m2, ell) = (cas.mu * cas.mu, cas.ell);
    Quartic {
        c: [
            h * h - m2 * ell,
            -2.0 * h * l + m2,
            l * l - h * k + ell,
            l * k - 1.0,
            0.25 * k * k,
        ],
    }
}

/// Scale for residuals of F and its derivatives near a root a.
pub fn residual_scale(a: f64, kappa: f64) -> f64 {
    let a = a.abs();
    (a.powi(4) * kappa * kappa).max(a.powi(3)).max(1.0)
}

/// The simple root b in F = (κ²/4)(R−a)³(R−b): b = 4(1 − κλ)/κ² − 3a.
/// Undefined for κ = 0, where F is cubic.
pub fn remaining_root(a: f64, rp: ReducedParams) -> Option<f64> {
    if rp.kappa == 0.0 {
        None
    } else {
        Some(4.0 * (1.0 - rp.kappa * rp.lambda) / (rp.kappa * rp.kappa) - 3.0 * a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    CentreSaddle,
    Cusp,
    HopfSub,
    HopfSuper,
    HopfDegenerate,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EventKind::CentreSaddle => "CentreSaddle",
            EventKind::Cusp => "Cusp",
            EventKind::HopfSub => "HopfSub",
            EventKind::HopfSuper => "HopfSuper",
            EventKind::HopfDegenerate => "HopfDegenerate",
        };
        f.write_str(s)
    }
}

/// Named strata of the bifurcation set. The `K0` variants belong to the
/// κ = 0 catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Cs1,
    Cs2,
    Cs3,
    Cs4,
    Cusp1,
    Cusp2,
    Cusp3,
    HhSub1,
    HhSub2,
    HhSub3,
    HhSup1,
    HhSup2,
    HhSup3,
    HhDeg1,
    HhDeg2,
    HhDeg3,
    Cs1K0,
    Cs2K0,
    Cs3K0,
    HhSub1K0,
    HhSub2K0,
    HhSub3K0,
}

impl Family {
    pub const UNIT: [Family; 16] = [
        Family::Cs1,
        Family::Cs2,
        Family::Cs3,
        Family::Cs4,
        Family::Cusp1,
        Family::Cusp2,
        Family::Cusp3,
        Family::HhSub1,
        Family::HhSub2,
        Family::HhSub3,
        Family::HhSup1,
        Family::HhSup2,
        Family::HhSup3,
        Family::HhDeg1,
        Family::HhDeg2,
        Family::HhDeg3,
    ];

    pub const KAPPA0: [Family; 6] = [
        Family::Cs1K0,
        Family::Cs2K0,
        Family::Cs3K0,
        Family::HhSub1K0,
        Family::HhSub2K0,
        Family::HhSub3K0,
    ];

    pub fn kind(self) -> EventKind {
        use Family::*;
        match self {
            Cs1 | Cs2 | Cs3 | Cs4 | Cs1K0 | Cs2K0 | Cs3K0 => EventKind::CentreSaddle,
            Cusp1 | Cusp2 | Cusp3 => EventKind::Cusp,
            HhSub1 | HhSub2 | HhSub3 | HhSub1K0 | HhSub2K0 | HhSub3K0 => EventKind::HopfSub,
            HhSup1 | HhSup2 | HhSup3 => EventKind::HopfSuper,
            HhDeg1 | HhDeg2 | HhDeg3 => EventKind::HopfDegenerate,
        }
    }

    pub fn is_kappa0(self) -> bool {
        Family::KAPPA0.contains(&self)
    }

    pub fn name(self) -> &'static str {
        use Family::*;
        match self {
            Cs1 => "CS1",
            Cs2 => "CS2",
            Cs3 => "CS3",
            Cs4 => "CS4",
            Cusp1 => "Cusp1",
            Cusp2 => "Cusp2",
            Cusp3 => "Cusp3",
            HhSub1 => "HHsub1",
            HhSub2 => "HHsub2",
            HhSub3 => "HHsub3",
            HhSup1 => "HHsup1",
            HhSup2 => "HHsup2",
            HhSup3 => "HHsup3",
            HhDeg1 => "HHdeg1",
            HhDeg2 => "HHdeg2",
            HhDeg3 => "HHdeg3",
            Cs1K0 => "CS1_k0",
            Cs2K0 => "CS2_k0",
            Cs3K0 => "CS3_k0",
            HhSub1K0 => "HHsub1_k0",
            HhSub2K0 => "HHsub2_k0",
            HhSub3K0 => "HHsub3_k0",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::UNIT
            .iter()
            .chain(Family::KAPPA0.iter())
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub kind: EventKind,
    pub a: f64,
    pub b: Option<f64>,
    pub h: f64,
    pub lambda: f64,
    pub mu: f64,
    pub ell: f64,
    pub kappa: f64,
    pub family: Option<Family>,
}

impl BifurcationEvent {
    pub fn casimirs(&self) -> CasimirValues {
        CasimirValues::new(self.mu, self.ell)
    }

    pub fn reduced_params(&self) -> ReducedParams {
        ReducedParams::new(self.lambda, self.kappa)
    }

    pub fn quartic(&self) -> Quartic {
        f_quartic(self.h, self.reduced_params(), self.casimirs())
    }

    /// max(|F(a)|, |F′(a)|, |F″(a)|) divided by [`residual_scale`].
    pub fn scaled_residual(&self) -> f64 {
        triple_root_residual(self.a, &self.quartic(), self.kappa)
    }
}

pub fn triple_root_residual(a: f64, q: &Quartic, kappa: f64) -> f64 {
    let r = (0..3).map(|k| q.deriv(k, a).abs()).fold(0.0, f64::max);
    r / residual_scale(a, kappa)
}

/// Tolerances for [`classify_multiple_root_with`]. Quantities inside
/// `band` times a tolerance but outside the tolerance itself are ambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyTolerances {
    pub residual: f64,
    pub tip_gap: f64,
    pub third: f64,
    pub band: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        ClassifyTolerances { residual: 1e-9, tip_gap: 1e-10, third: 1e-9, band: 10.0 }
    }
}

pub fn classify_multiple_root(a: f64, q: &Quartic, cas: CasimirValues) -> Result<EventKind> {
    classify_multiple_root_with(a, q, cas, ClassifyTolerances::default())
}

/// Type of a triple root a of F in [R_min, ∞) from its position relative to
/// R_min and the sign of F‴(a).
pub fn classify_multiple_root_with(
    a: f64,
    q: &Quartic,
    cas: CasimirValues,
    tol: ClassifyTolerances,
) -> Result<EventKind> {
    let kappa = (4.0 * q.c[4]).sqrt();
    let res = triple_root_residual(a, q, kappa);
    if !(res <= tol.residual) {
        return Err(Error::Invalid(format!(
            "R = {a} is not a triple root of F (scaled residual {res:.3e})"
        )));
    }
    let r0 = r_min(cas);
    let gap = a - r0;
    let gap_tol = tol.tip_gap * a.abs().max(1.0);
    if gap < -gap_tol {
        return Err(Error::Invalid(format!("triple root {a} lies below R_min = {r0}")));
    }
    let f3 = q.deriv(3, a);
    let f3_tol = tol.third * 6.0 * (q.c[3].abs() + 1.0 + 4.0 * q.c[4] * a.abs());
    let at_tip = gap.abs() <= gap_tol;
    let flat = f3.abs() <= f3_tol;
    let tip_unclear = !at_tip && gap <= tol.band * gap_tol;
    let third_unclear = !flat && f3.abs() <= tol.band * f3_tol;
    if tip_unclear || third_unclear {
        return Err(Error::Ambiguous(format!(
            "degenerate boundary: a − R_min = {gap:.3e} (tol {gap_tol:.1e}), F‴(a) = {f3:.3e} (tol {f3_tol:.1e})"
        )));
    }
    Ok(match (at_tip, flat) {
        (true, true) => EventKind::HopfDegenerate,
        (true, false) if f3 > 0.0 => EventKind::HopfSuper,
        (true, false) => EventKind::HopfSub,
        (false, true) => EventKind::Cusp,
        (false, false) => EventKind::CentreSaddle,
    })
}

/// Endpoint of an instability interval together with the Hopf type of the
/// tip there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEnd {
    pub lambda: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstabilityInterval {
    pub lo: IntervalEnd,
    pub hi: IntervalEnd,
}

impl InstabilityInterval {
    pub fn contains(&self, lambda: f64) -> bool {
        lambda > self.lo.lambda && lambda < self.hi.lambda
    }
}

/// The λ-interval on which the singular tip is unstable, i.e. where
/// F″(R_min) = 2(λ + κR_min)² − 6R_min + 2ℓ < 0 at the tip energy. Endpoints
/// are Hopf points typed by the sign of F‴(R_min) = 6(κλ − 1) + 6κ²R_min.
pub fn instability_interval(cas: CasimirValues, kappa: f64) -> Result<Option<InstabilityInterval>> {
    if !kappa.is_finite() {
        return Err(Error::Invalid("kappa must be finite".into()));
    }
    let tip = tip_class(cas, DEFAULT_EPS_C);
    if tip.kind == TipKind::Smooth {
        return Ok(None);
    }
    let r = tip.r_min;
    let disc = 3.0 * r - cas.ell;
    if disc <= 0.0 {
        return Ok(None);
    }
    let s = disc.sqrt();
    let end = |lambda: f64| {
        let f3 = 6.0 * (kappa * lambda - 1.0) + 6.0 * kappa * kappa * r;
        let scale = 6.0 * (kappa * lambda).abs() + 6.0 + 6.0 * kappa * kappa * r.abs();
        let kind = if f3.abs() <= 1e-12 * scale {
            EventKind::HopfDegenerate
        } else if f3 > 0.0 {
            EventKind::HopfSuper
        } else {
            EventKind::HopfSub
        };
        IntervalEnd { lambda, kind }
    };
    Ok(Some(InstabilityInterval { lo: end(-kappa * r - s), hi: end(-kappa * r + s) }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_example() {
        let q = f_quartic(0.0, ReducedParams::new(0.0, 1.0), CasimirValues::new(0.0, 0.0));
        assert_eq!(q.c, [0.0, 0.0, 0.0, -1.0, 0.25]);
        assert_eq!(q.deriv(4, 3.7), 6.0);
    }

    #[test]
    fn classification_examples() {
        let cas = CasimirValues::new(0.0, 0.0);
        let q = f_quartic(0.0, ReducedParams::new(0.0, 1.0), cas);
        assert_eq!(classify_multiple_root(0.0, &q, cas).unwrap(), EventKind::HopfSub);

        let cas = CasimirValues::new(0.0, -2.25);
        let q = f_quartic(0.0, ReducedParams::new(1.5, 1.0), cas);
        assert_eq!(classify_multiple_root(0.0, &q, cas).unwrap(), EventKind::HopfSuper);

        let cas = CasimirValues::new(0.0, -1.0);
        let q = f_quartic(0.0, ReducedParams::new(1.0, 1.0), cas);
        assert_eq!(classify_multiple_root(0.0, &q, cas).unwrap(), EventKind::HopfDegenerate);
    }

    #[test]
    fn non_root_is_rejected() {
        let cas = CasimirValues::new(0.3, 0.1);
        let q = f_quartic(1.0, ReducedParams::new(0.2, 1.0), cas);
        assert!(classify_multiple_root(0.5, &q, cas).is_err());
    }

    #[test]
    fn interval_examples() {
        let iv = instability_interval(CasimirValues::new(0.0, -4.0), 1.0).unwrap().unwrap();
        assert_eq!((iv.lo.lambda, iv.hi.lambda), (-2.0, 2.0));
        assert_eq!((iv.lo.kind, iv.hi.kind), (EventKind::HopfSub, EventKind::HopfSuper));

        let iv = instability_interval(CasimirValues::new(0.0, -0.25), 1.0).unwrap().unwrap();
        assert_eq!((iv.lo.lambda, iv.hi.lambda), (-0.5, 0.5));
        assert_eq!((iv.lo.kind, iv.hi.kind), (EventKind::HopfSub, EventKind::HopfSub));

        let iv = instability_interval(CasimirValues::new(2.0, 2.0), 1.0).unwrap().unwrap();
        assert_eq!((iv.lo.lambda, iv.hi.lambda), (-4.0, 0.0));
        assert_eq!(iv.hi.kind, EventKind::HopfSuper);

        assert!(instability_interval(CasimirValues::new(0.5, 0.2), 1.0).unwrap().is_none());
    }
}
