//! Slices of the bifurcation set at fixed ℓ, drawn in the (λ, μ) plane.

use rayon::prelude::*;

use crate::bifurcations::catalog::{sample_args, surface_a_range, Sign};
use crate::bifurcations::oracle::solve_at;
use crate::bifurcations::{
    catalog_point, catalog_point_kappa0, families_present, families_present_kappa0,
    solve_bifurcations_numeric, BifurcationEvent, CatalogPoint, Family, FamilyArg, OracleConfig,
    OracleMode,
};
use crate::error::Result;

use super::output::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct BifdiagConfig {
    pub kappa: f64,
    pub ells: Vec<f64>,
    /// Closed λ-window; empty when lo ≥ hi.
    pub lambda_window: (f64, f64),
    pub grid: usize,
    /// Bisection tolerance in a and λ.
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicePoint {
    pub ell_slice: f64,
    pub family: Option<Family>,
    pub oracle: bool,
    pub lambda: f64,
    pub mu: f64,
    pub ell: f64,
    pub a: f64,
    pub h: f64,
}

const NEWTON_GRID: usize = 1000;

/// Points of the bifurcation set on the planes ℓ = const.
pub fn slice_points(cfg: &BifdiagConfig) -> Result<Vec<SlicePoint>> {
    let lambdas = lambda_grid(cfg);
    if lambdas.is_empty() {
        return Ok(Vec::new());
    }
    let mode = if cfg.kappa == 0.0 { OracleMode::Newton } else { OracleMode::Factorization };
    // Newton starts are far costlier than factorization roots; a coarser
    // a-grid still lands on every κ = 0 family
    let grid = if mode == OracleMode::Newton { NEWTON_GRID } else { OracleConfig::default().grid };
    let report = solve_bifurcations_numeric(cfg.kappa, &lambdas, &OracleConfig { mode, grid, ..Default::default() })?;
    let mut out = Vec::new();
    for &ell in &cfg.ells {
        let mut pts: Vec<SlicePoint> = lambdas
            .par_iter()
            .flat_map_iter(|&l| surface_crossings(cfg, l, ell))
            .collect();
        pts.extend(curve_crossings(cfg, &lambdas, ell));
        pts.extend(oracle_crossings(cfg, &report.events, &lambdas, ell, mode));
        pts.sort_by(|p, q| {
            p.oracle
                .cmp(&q.oracle)
                .then(p.family.cmp(&q.family))
                .then(p.lambda.total_cmp(&q.lambda))
                .then(p.mu.total_cmp(&q.mu))
        });
        out.extend(pts);
    }
    Ok(out)
}

fn lambda_grid(cfg: &BifdiagConfig) -> Vec<f64> {
    let (lo, hi) = cfg.lambda_window;
    if !(lo < hi) || cfg.grid < 2 {
        return Vec::new();
    }
    (0..cfg.grid).map(|i| lo + (hi - lo) * i as f64 / (cfg.grid - 1) as f64).collect()
}

fn point(family: Family, arg: FamilyArg, kappa: f64) -> Option<CatalogPoint> {
    if kappa == 0.0 {
        catalog_point_kappa0(family, arg).ok()
    } else {
        catalog_point(family, arg, kappa).ok()
    }
}

fn families(kappa: f64) -> Vec<Family> {
    if kappa == 0.0 {
        Family::KAPPA0.to_vec()
    } else {
        Family::UNIT.to_vec()
    }
}

fn is_surface(f: Family) -> bool {
    use Family::*;
    matches!(f, Cs1 | Cs2 | Cs3 | Cs4 | Cs1K0 | Cs2K0 | Cs3K0)
}

fn from_catalog(ell_slice: f64, p: &CatalogPoint) -> SlicePoint {
    SlicePoint {
        ell_slice,
        family: Some(p.family),
        oracle: false,
        lambda: p.lambda,
        mu: p.mu,
        ell: p.ell,
        a: p.a,
        h: p.h,
    }
}

/// Bisection for a sign change of `f` on [lo, hi].
fn bisect<F: Fn(f64) -> Option<f64>>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo)?;
    for _ in 0..200 {
        if hi - lo <= tol * (1.0 + lo.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Crossings of the surface families with ℓ = `ell` at one λ.
fn surface_crossings(cfg: &BifdiagConfig, lambda: f64, ell: f64) -> Vec<SlicePoint> {
    const NA: usize = 400;
    let k = cfg.kappa;
    let present = if k == 0.0 { families_present_kappa0(lambda) } else { families_present(lambda, k) };
    let mut out = Vec::new();
    for fam in present.into_iter().filter(|&f| is_surface(f)) {
        let Some((lo, hi)) = surface_a_range(fam, lambda, k) else { continue };
        let at = |a: f64| point(fam, FamilyArg::Surface { lambda, a, sign: Sign::Plus }, k);
        let g = |a: f64| at(a).map(|p| p.ell - ell);
        let xs: Vec<f64> = (0..=NA).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / (NA + 1) as f64).collect();
        let vals: Vec<Option<f64>> = xs.iter().map(|&a| g(a)).collect();
        for i in 0..NA {
            let (Some(u), Some(v)) = (vals[i], vals[i + 1]) else { continue };
            if (u < 0.0) == (v < 0.0) && u != 0.0 {
                continue;
            }
            let Some(a) = bisect(g, xs[i], xs[i + 1], cfg.tol) else { continue };
            let signs: &[Sign] = match fam {
                Family::Cs3 | Family::Cs4 | Family::Cs3K0 => &[Sign::Plus, Sign::Minus],
                _ => &[Sign::Plus],
            };
            for &sign in signs {
                if let Some(p) = point(fam, FamilyArg::Surface { lambda, a, sign }, k) {
                    out.push(from_catalog(ell, &p));
                }
            }
        }
    }
    out
}

/// Curve and point families meet a plane ℓ = const in isolated points.
fn curve_crossings(cfg: &BifdiagConfig, lambdas: &[f64], ell: f64) -> Vec<SlicePoint> {
    let k = cfg.kappa;
    let (lo, hi) = cfg.lambda_window;
    let inside = |l: f64| l >= lo && l <= hi;
    let mut out = Vec::new();
    for fam in families(k).into_iter().filter(|&f| !is_surface(f)) {
        match fam {
            Family::HhDeg1 | Family::HhDeg2 | Family::HhDeg3 => {
                if let Some(p) = point(fam, FamilyArg::Point, k) {
                    if (p.ell - ell).abs() <= 1e-12 * (1.0 + ell.abs()) && inside(p.lambda) {
                        out.push(from_catalog(ell, &p));
                    }
                }
            }
            Family::Cusp3 => {
                let k2 = k * k;
                let m2 = (ell - 0.25 / k2) / k2;
                if m2 > 0.0 && m2.sqrt() < 0.5 / k2 && inside(0.5 / k) {
                    for mu in [-m2.sqrt(), m2.sqrt()] {
                        if let Some(p) = point(fam, FamilyArg::Line { mu }, k) {
                            out.push(from_catalog(ell, &p));
                        }
                    }
                }
            }
            _ => {
                let g = |l: f64| point(fam, FamilyArg::Curve { lambda: l }, k).map(|p| p.ell - ell);
                let vals: Vec<Option<f64>> = lambdas.iter().map(|&l| g(l)).collect();
                for i in 0..lambdas.len().saturating_sub(1) {
                    let (Some(u), Some(v)) = (vals[i], vals[i + 1]) else { continue };
                    if (u < 0.0) == (v < 0.0) && u != 0.0 {
                        continue;
                    }
                    if let Some(l) = bisect(g, lambdas[i], lambdas[i + 1], cfg.tol) {
                        if let Some(p) = point(fam, FamilyArg::Curve { lambda: l }, k) {
                            out.push(from_catalog(ell, &p));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Crossings found from the oracle's events alone: consecutive events of one
/// stratum and one μ-sign that straddle the plane, refined by bisection in a
/// with the oracle solution nearest to the chord.
fn oracle_crossings(
    cfg: &BifdiagConfig,
    events: &[BifurcationEvent],
    lambdas: &[f64],
    ell: f64,
    mode: OracleMode,
) -> Vec<SlicePoint> {
    let k = cfg.kappa;
    lambdas
        .par_iter()
        .flat_map_iter(|&l| {
            let mut mine: Vec<&BifurcationEvent> = events
                .iter()
                .filter(|e| e.lambda == l && e.family.is_some_and(is_surface))
                .collect();
            mine.sort_by(|x, y| {
                x.family
                    .cmp(&y.family)
                    .then((x.mu < 0.0).cmp(&(y.mu < 0.0)))
                    .then(x.a.total_cmp(&y.a))
            });
            let mut out = Vec::new();
            for w in mine.windows(2) {
                let (p, q) = (w[0], w[1]);
                if p.family != q.family || (p.mu < 0.0) != (q.mu < 0.0) {
                    continue;
                }
                let (u, v) = (p.ell - ell, q.ell - ell);
                if (u < 0.0) == (v < 0.0) && u != 0.0 {
                    continue;
                }
                // adjacent samples only: the chord must stay short
                if (q.a - p.a).abs() > 0.05 * (1.0 + p.a.abs()) {
                    continue;
                }
                let sign = if p.mu < 0.0 { -1.0 } else { 1.0 };
                let sol = |a: f64| -> Option<(f64, f64, f64)> {
                    let s = (a - p.a) / (q.a - p.a);
                    let (m0, l0) = (p.mu * p.mu + s * (q.mu * q.mu - p.mu * p.mu), p.ell + s * (q.ell - p.ell));
                    solve_at(k, l, a, mode)
                        .into_iter()
                        .filter(|&(_, m, _)| m >= -1e-12)
                        .min_by(|x, y| {
                            let dx = (x.1 - m0).abs() + (x.2 - l0).abs();
                            let dy = (y.1 - m0).abs() + (y.2 - l0).abs();
                            dx.total_cmp(&dy)
                        })
                };
                let (lo, hi) = if p.a < q.a { (p.a, q.a) } else { (q.a, p.a) };
                let Some(a) = bisect(|a| sol(a).map(|s| s.2 - ell), lo, hi, cfg.tol) else { continue };
                let Some((h, m, e)) = sol(a) else { continue };
                out.push(SlicePoint {
                    ell_slice: ell,
                    family: p.family,
                    oracle: true,
                    lambda: l,
                    mu: sign * m.max(0.0).sqrt(),
                    ell: e,
                    a,
                    h,
                });
            }
            out
        })
        .collect()
}

pub const SLICE_COLUMNS: [&str; 10] =
    ["ell_slice", "family", "kind", "provenance", "lambda", "mu", "ell", "a", "h", "kappa"];

pub fn slice_table(cfg: &BifdiagConfig, pts: &[SlicePoint]) -> Table {
    let mut t = Table::new(&SLICE_COLUMNS);
    for p in pts {
        t.push(vec![
            p.ell_slice.into(),
            p.family.map_or("untagged".to_string(), |f| f.name().to_string()).into(),
            p.family.map_or(String::new(), |f| f.kind().to_string()).into(),
            if p.oracle { "numeric-oracle" } else { "catalog" }.into(),
            p.lambda.into(),
            p.mu.into(),
            p.ell.into(),
            p.a.into(),
            p.h.into(),
            cfg.kappa.into(),
        ]);
    }
    t
}

/// Samples of every stratum in (λ, μ, ℓ); `n` per family.
pub fn surface_table(kappa: f64, n: usize) -> Table {
    let mut t = Table::new(&["family", "kind", "provenance", "lambda", "mu", "ell", "a", "h", "kappa"]);
    for fam in families(kappa) {
        for arg in sample_args(fam, kappa, n) {
            if let Some(p) = point(fam, arg, kappa) {
                t.push(vec![
                    fam.name().into(),
                    fam.kind().to_string().into(),
                    "catalog".into(),
                    p.lambda.into(),
                    p.mu.into(),
                    p.ell.into(),
                    p.a.into(),
                    p.h.into(),
                    kappa.into(),
                ]);
            }
        }
    }
    t
}
