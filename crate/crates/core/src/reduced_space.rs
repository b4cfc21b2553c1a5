//! Geometry of the reduced phase spaces: surfaces of revolution
//! X² + Y² = (R² − μ²)(R − ℓ), R ≥ R_min, and the type of their tip.

use serde::{Deserialize, Serialize};

use crate::model::CasimirValues;

pub const DEFAULT_EPS_C: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TipKind {
    Smooth,
    Cone,
    Cusp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TipClass {
    pub kind: TipKind,
    pub r_min: f64,
}

/// R_min = max(|μ|, ℓ).
pub fn r_min(cas: CasimirValues) -> f64 {
    cas.mu.abs().max(cas.ell)
}

/// Roots {μ, −μ, ℓ} of the section polynomial in descending order.
pub fn ordered_roots(cas: CasimirValues) -> [f64; 3] {
    let mut a = [cas.mu, -cas.mu, cas.ell];
    a.sort_by(|x, y| y.partial_cmp(x).unwrap());
    a
}

/// Cusp when all three roots coincide, cone when the two largest do.
pub fn tip_class(cas: CasimirValues, eps_c: f64) -> TipClass {
    let [a1, a2, a3] = ordered_roots(cas);
    let kind = if a1 - a3 <= eps_c {
        TipKind::Cusp
    } else if a1 - a2 <= eps_c {
        TipKind::Cone
    } else {
        TipKind::Smooth
    };
    TipClass { kind, r_min: r_min(cas) }
}

/// X₂(R)² = (R² − μ²)(R − ℓ); negative values lie off the surface.
pub fn section_sq(r: f64, cas: CasimirValues) -> f64 {
    (r * r - cas.mu * cas.mu) * (r - cas.ell)
}

/// d/dR of [`section_sq`]: 3R² − 2ℓR − μ².
pub fn section_sq_slope(r: f64, cas: CasimirValues) -> f64 {
    3.0 * r * r - 2.0 * cas.ell * r - cas.mu * cas.mu
}

/// Coefficients of (R² − μ²)(R − ℓ) in ascending order.
pub fn section_poly(cas: CasimirValues) -> [f64; 4] {
    let m2 = cas.mu * cas.mu;
    [m2 * cas.ell, -m2, -cas.ell, 1.0]
}

/// Samples of the upper profile curve X = √section_sq for R in [R_min, r_max].
pub fn section_curve(cas: CasimirValues, r_max: f64, n: usize) -> Vec<(f64, f64)> {
    let r0 = r_min(cas);
    if n < 2 || r_max <= r0 {
        return Vec::new();
    }
    (0..n)
        .map(|k| {
            let r = r0 + (r_max - r0) * k as f64 / (n - 1) as f64;
            (r, section_sq(r, cas).max(0.0).sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_min_examples() {
        assert_eq!(r_min(CasimirValues::new(0.0, 0.0)), 0.0);
        assert_eq!(r_min(CasimirValues::new(-3.0, 1.0)), 3.0);
        assert_eq!(r_min(CasimirValues::new(1.0, 2.0)), 2.0);
    }

    #[test]
    fn tip_examples() {
        let k = |mu, ell| tip_class(CasimirValues::new(mu, ell), DEFAULT_EPS_C).kind;
        assert_eq!(k(0.0, 0.0), TipKind::Cusp);
        assert_eq!(k(1.0, 1.0), TipKind::Cone);
        assert_eq!(k(0.0, -1.0), TipKind::Cone);
        assert_eq!(k(0.5, 0.2), TipKind::Smooth);
        assert_eq!(k(0.0, 1.0), TipKind::Smooth);
    }

    #[test]
    fn section_examples() {
        assert_eq!(section_sq(1.0, CasimirValues::new(0.0, 0.0)), 1.0);
        assert_eq!(section_sq(2.0, CasimirValues::new(1.0, 0.0)), 6.0);
        assert_eq!(section_sq(1.0, CasimirValues::new(1.0, 1.0)), 0.0);
    }
}
