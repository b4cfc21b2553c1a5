//! Closed-form parametrizations of the bifurcation families, for κ ≠ 0 and
//! for κ = 0.

use serde::{Deserialize, Serialize};

use super::{remaining_root, BifurcationEvent, Family};
use crate::error::{Error, Result};
use crate::model::{kappa_scaling, ScaledValues};
use crate::poly;
use crate::reduced_dynamics::ReducedParams;

/// Sign choice for the ± families CS3 and CS4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Parameters selecting a point of a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FamilyArg {
    /// Two-parameter families: detuning λ and the triple root a. `sign` is
    /// used only by the ± families.
    Surface { lambda: f64, a: f64, sign: Sign },
    /// One-parameter families indexed by λ.
    Curve { lambda: f64 },
    /// The cusp line at fixed λ = 1/(2κ), indexed by μ.
    Line { mu: f64 },
    Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalogPoint {
    pub family: Family,
    pub lambda: f64,
    pub mu: f64,
    pub ell: f64,
    pub a: f64,
    pub b: Option<f64>,
    pub h: f64,
    pub kappa: f64,
    /// Set for points on the closure of a family but outside its open range
    /// (CS1/CS2 at κλ = ½).
    pub boundary: bool,
}

impl CatalogPoint {
    pub fn event(&self) -> BifurcationEvent {
        BifurcationEvent {
            kind: self.family.kind(),
            a: self.a,
            b: self.b,
            h: self.h,
            lambda: self.lambda,
            mu: self.mu,
            ell: self.ell,
            kappa: self.kappa,
            family: Some(self.family),
        }
    }
}

fn out_of_range(family: Family, what: String) -> Error {
    Error::OutOfRange(format!("{family}: {what}"))
}

fn check_open(family: Family, name: &str, x: f64, lo: f64, hi: f64) -> Result<()> {
    if x > lo && x < hi {
        Ok(())
    } else {
        Err(out_of_range(family, format!("{name} = {x} outside ({lo}, {hi})")))
    }
}

fn sqrt_clamped(x: f64, scale: f64) -> Result<f64> {
    if x >= 0.0 {
        Ok(x.sqrt())
    } else if x >= -1e-13 * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::OutOfRange(format!("negative radicand {x}")))
    }
}

/// μ±²(a, λ) for κ ≠ 0:
/// (±2|λ|w^{3/2} + P(a, λ)) / (2κλ − 1) with w = (κa + λ)² − 2a.
pub fn mu_sq_pm(a: f64, lambda: f64, kappa: f64, sign: f64) -> Result<f64> {
    let (k, l) = (kappa, lambda);
    let w = (k * a + l).powi(2) - 2.0 * a;
    let sw = sqrt_clamped(w, (k * a + l).powi(2) + 2.0 * a.abs())?;
    let p = 2.0 * k.powi(3) * a.powi(3) * l - 2.0 * k * k * a.powi(3)
        + 6.0 * k * k * a * a * l * l
        - 6.0 * k * a * a * l
        + 3.0 * a * a
        + 6.0 * k * a * l.powi(3)
        - 6.0 * a * l * l
        + 2.0 * l.powi(4);
    Ok((sign * 2.0 * l.abs() * sw * sw * sw + p) / (2.0 * k * l - 1.0))
}

/// ℓ and h of a triple root a given μ², λ ≠ 0:
/// 2λℓ = −2κ³a³ − 6κ²a²λ + 3κa² − 6κaλ² + 6aλ − 2λ³ + κμ²,
/// 2λh = μ² + 3a² − 2κ²a³ − 3κa²λ.
pub fn ell_and_h(a: f64, lambda: f64, kappa: f64, mu_sq: f64) -> (f64, f64) {
    let (k, l) = (kappa, lambda);
    let ell = (-2.0 * k.powi(3) * a.powi(3) - 6.0 * k * k * a * a * l + 3.0 * k * a * a
        - 6.0 * k * a * l * l
        + 6.0 * a * l
        - 2.0 * l.powi(3)
        + k * mu_sq)
        / (2.0 * l);
    let h = (mu_sq + 3.0 * a * a - 2.0 * k * k * a.powi(3) - 3.0 * k * a * a * l) / (2.0 * l);
    (ell, h)
}

/// Positive root a₀ of
/// g(a) = 4κ⁴a³ + (12κ³λ − 12κ²)a² + (12κ²λ² − 18κλ + 9)a + 4κλ³ − 4λ².
/// Defined for κλ < 1, λ ≠ 0, where g(0) < 0 and the positive
/// root is unique.
pub fn a0_root(lambda: f64, kappa: f64) -> Result<f64> {
    if kappa == 0.0 || !kappa.is_finite() || !lambda.is_finite() {
        return Err(Error::Invalid("a0_root needs finite λ and nonzero κ".into()));
    }
    let t = kappa * lambda;
    if !(t < 1.0) || t == 0.0 {
        return Err(Error::OutOfRange(format!(
            "κλ = {t}: outside 0 ≠ κλ < 1 the cubic g has no sign change on a > 0 \
             (g(a) > 0 for all a > 0 when κλ ≥ 1)"
        )));
    }
    // In A = κ²a the cubic is g₁(A; κλ)/κ².
    let g = [
        4.0 * t.powi(3) - 4.0 * t * t,
        12.0 * t * t - 18.0 * t + 9.0,
        12.0 * t - 12.0,
        4.0,
    ];
    let hi = poly::cauchy_bound(&g);
    let roots: Vec<f64> = poly::real_roots_isolated(&g, 0.0, hi, 1e-14)
        .into_iter()
        .filter(|&x| x > 0.0)
        .collect();
    match roots.as_slice() {
        [x] => Ok(poly::polish(&g, *x) / (kappa * kappa)),
        _ => Err(Error::NoConvergence(format!(
            "g has {} positive roots at κλ = {t}",
            roots.len()
        ))),
    }
}

/// Open a-interval of a surface family at λ (κ > 0 frame), if the family
/// exists there. CS1/CS2 at κλ = ½ return their closure interval.
pub fn surface_a_range(family: Family, lambda: f64, kappa: f64) -> Option<(f64, f64)> {
    let k2 = kappa * kappa;
    if family.is_kappa0() {
        let l2 = lambda * lambda;
        return match family {
            _ if lambda == 0.0 => None,
            Family::Cs1K0 | Family::Cs2K0 => Some((0.0, 0.5 * l2)),
            Family::Cs3K0 => Some((4.0 * l2 / 9.0, 0.5 * l2)),
            _ => None,
        };
    }
    if kappa <= 0.0 {
        return surface_a_range(family, kappa * lambda, 1.0).map(|(lo, hi)| (lo / k2, hi / k2));
    }
    let t = kappa * lambda;
    let lower_cs = |t: f64| 1.0 - t - (1.0 - 2.0 * t).sqrt();
    match family {
        Family::Cs1 | Family::Cs2 => {
            if t == 0.0 || t >= 1.0 {
                None
            } else if t < 0.5 {
                Some((0.0, lower_cs(t) / k2))
            } else if t == 0.5 {
                Some((0.0, 0.5 / k2))
            } else {
                Some((0.0, (1.0 - t) / k2))
            }
        }
        Family::Cs3 if t < 0.5 && t != 0.0 => {
            a0_root(lambda, kappa).ok().map(|a0| (a0, lower_cs(t) / k2))
        }
        Family::Cs4 if t > 0.5 && t < 1.0 => {
            a0_root(lambda, kappa).ok().map(|a0| ((1.0 - t) / k2, a0))
        }
        _ => None,
    }
}

/// Families of the κ ≠ 0 catalog present at λ.
pub fn families_present(lambda: f64, kappa: f64) -> Vec<Family> {
    use Family::*;
    let t = kappa * lambda;
    let mut out = Vec::new();
    if t < 0.5 {
        out.extend([Cs1, Cs2]);
        if t != 0.0 {
            out.push(Cs3);
        }
        out.extend([HhSub1, HhSub2, HhSub3, HhSup1, HhSup2]);
        if t == 0.0 {
            out.retain(|f| !matches!(f, Cs1 | Cs2));
        }
    } else if t == 0.5 {
        out.extend([Cs1, Cs2, Cusp3, HhSub3, HhDeg1, HhDeg2]);
    } else if t < 1.0 {
        out.extend([Cs1, Cs2, Cs4, Cusp1, Cusp2, HhSub3]);
    } else if t == 1.0 {
        out.push(HhDeg3);
    } else {
        out.push(HhSup3);
    }
    out
}

pub fn families_present_kappa0(lambda: f64) -> Vec<Family> {
    if lambda == 0.0 || !lambda.is_finite() {
        Vec::new()
    } else {
        Family::KAPPA0.to_vec()
    }
}

/// Closed-form point of a κ ≠ 0 family. κ < 0 is mapped to κ = 1 and back
/// through the κ-scaling.
pub fn catalog_point(family: Family, arg: FamilyArg, kappa: f64) -> Result<CatalogPoint> {
    if family.is_kappa0() {
        return Err(Error::Invalid(format!("{family} belongs to the κ = 0 catalog")));
    }
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::Invalid("catalog_point needs a finite nonzero κ".into()));
    }
    if kappa > 0.0 {
        return positive_kappa(family, arg, kappa, true);
    }
    let k2 = kappa * kappa;
    let unit_arg = match arg {
        FamilyArg::Surface { lambda, a, sign } => {
            FamilyArg::Surface { lambda: kappa * lambda, a: k2 * a, sign }
        }
        FamilyArg::Curve { lambda } => FamilyArg::Curve { lambda: kappa * lambda },
        FamilyArg::Line { mu } => FamilyArg::Line { mu: k2 * mu },
        FamilyArg::Point => FamilyArg::Point,
    };
    let p = positive_kappa(family, unit_arg, 1.0, true)?;
    let v = kappa_scaling(
        ScaledValues { lambda: p.lambda, mu: p.mu, ell: p.ell, r: p.a, x: 0.0, y: 0.0, h: p.h },
        kappa,
    )?;
    Ok(CatalogPoint {
        family,
        lambda: v.lambda,
        mu: v.mu,
        ell: v.ell,
        a: v.r,
        b: p.b.map(|b| b / k2),
        h: v.h,
        kappa,
        boundary: p.boundary,
    })
}

fn positive_kappa(family: Family, arg: FamilyArg, k: f64, check: bool) -> Result<CatalogPoint> {
    use Family::*;
    let k2 = k * k;
    let mut boundary = false;
    let (lambda, mu, ell, a, h) = match (family, arg) {
        (Cs1 | Cs2 | Cs3 | Cs4, FamilyArg::Surface { lambda, a, sign }) => {
            let t = k * lambda;
            if check {
                let (lo, hi) = surface_a_range(family, lambda, k).ok_or_else(|| {
                    out_of_range(family, format!("no points at κλ = {t}"))
                })?;
                check_open(family, "a", a, lo, hi)?;
            }
            let mu_sign = match family {
                Cs1 => -1.0,
                Cs2 => 1.0,
                _ => sign.value(),
            };
            if t == 0.5 {
                // κλ = ½: F factors through (2κ²a − 1)³(μ² − 2κ²a³).
                boundary = true;
                let m2 = 2.0 * k2 * a.powi(3);
                let ell = (6.0 * k2 * a - 1.0) / (4.0 * k2);
                (lambda, mu_sign * m2.sqrt(), ell, a, 1.5 * k * a * a)
            } else {
                let branch = if family == Cs3 { 1.0 } else { -1.0 };
                let m2 = mu_sq_pm(a, lambda, k, branch)?;
                let mu = sqrt_clamped(m2, a * a)?;
                let (ell, h) = ell_and_h(a, lambda, k, m2);
                (lambda, mu_sign * mu, ell, a, h)
            }
        }
        (Cusp1 | Cusp2, FamilyArg::Curve { lambda }) => {
            let t = k * lambda;
            if check {
                check_open(family, "κλ", t, 0.5, 1.0)?;
            }
            let s = (2.0 * t - 1.0).max(0.0).sqrt();
            let sign = if family == Cusp1 { -1.0 } else { 1.0 };
            let mu = sign * (t - s) / k2;
            let ell = (1.0 - t - s) / k2;
            let a = (1.0 - t) / k2;
            let (_, h) = ell_and_h(a, lambda, k, mu * mu);
            (lambda, mu, ell, a, h)
        }
        (Cusp3, FamilyArg::Line { mu }) => {
            if check {
                check_open(family, "μ", mu, -0.5 / k2, 0.5 / k2)?;
            }
            let ell = 0.25 / k2 + k2 * mu * mu;
            (0.5 / k, mu, ell, 0.5 / k2, 0.125 / (k2 * k) + k * mu * mu)
        }
        (HhSub1 | HhSub2 | HhSup1 | HhSup2, FamilyArg::Curve { lambda }) => {
            let t = k * lambda;
            if check && !(t < 0.5) {
                return Err(out_of_range(family, format!("κλ = {t} not below ½")));
            }
            let root = (1.0 - 2.0 * t).max(0.0).sqrt();
            let r = match family {
                HhSub1 | HhSub2 => (1.0 - t - root) / k2,
                _ => (1.0 - t + root) / k2,
            };
            let sign = if matches!(family, HhSub1 | HhSup1) { 1.0 } else { -1.0 };
            (lambda, sign * r, r, r, lambda * r + 0.5 * k * r * r)
        }
        (HhSub3 | HhSup3, FamilyArg::Curve { lambda }) => {
            let t = k * lambda;
            if check {
                let ok = if family == HhSub3 { t < 1.0 } else { t > 1.0 };
                if !ok {
                    return Err(out_of_range(family, format!("κλ = {t}")));
                }
            }
            (lambda, 0.0, -lambda * lambda, 0.0, 0.0)
        }
        (HhDeg1 | HhDeg2, FamilyArg::Point) => {
            let r = 0.5 / k2;
            let lambda = 0.5 / k;
            let sign = if family == HhDeg1 { 1.0 } else { -1.0 };
            (lambda, sign * r, r, r, lambda * r + 0.5 * k * r * r)
        }
        (HhDeg3, FamilyArg::Point) => (1.0 / k, 0.0, -1.0 / k2, 0.0, 0.0),
        (f, arg) => {
            return Err(Error::Invalid(format!("{f} cannot be parametrized by {arg:?}")));
        }
    };
    Ok(CatalogPoint {
        family,
        lambda,
        mu,
        ell,
        a,
        b: remaining_root(a, ReducedParams::new(lambda, k)),
        h,
        kappa: k,
        boundary,
    })
}

/// Closed-form point of a κ = 0 family; requires λ ≠ 0.
pub fn catalog_point_kappa0(family: Family, arg: FamilyArg) -> Result<CatalogPoint> {
    kappa0(family, arg, true)
}

fn kappa0(family: Family, arg: FamilyArg, check: bool) -> Result<CatalogPoint> {
    use Family::*;
    if !family.is_kappa0() {
        return Err(Error::Invalid(format!("{family} is not a κ = 0 family")));
    }
    let lambda = match arg {
        FamilyArg::Surface { lambda, .. } | FamilyArg::Curve { lambda } => lambda,
        _ => return Err(Error::Invalid(format!("{family} cannot be parametrized by {arg:?}"))),
    };
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(out_of_range(family, "needs λ ≠ 0".into()));
    }
    let l2 = lambda * lambda;
    let (mu, ell, a, h) = match (family, arg) {
        (Cs1K0 | Cs2K0 | Cs3K0, FamilyArg::Surface { a, sign, .. }) => {
            if check {
                let (lo, hi) = surface_a_range(family, lambda, 0.0).unwrap();
                check_open(family, "a", a, lo, hi)?;
            }
            let w = sqrt_clamped(l2 - 2.0 * a, l2)?;
            let branch = if family == Cs3K0 { -1.0 } else { 1.0 };
            let m2 = -3.0 * a * a + 6.0 * a * l2 - 2.0 * l2 * l2
                + branch * 2.0 * lambda.abs() * w * w * w;
            let mu = sqrt_clamped(m2, l2 * l2)?;
            let mu_sign = match family {
                Cs1K0 => -1.0,
                Cs2K0 => 1.0,
                _ => sign.value(),
            };
            (mu_sign * mu, 3.0 * a - l2, a, (m2 + 3.0 * a * a) / (2.0 * lambda))
        }
        (HhSub1K0 | HhSub2K0, FamilyArg::Curve { .. }) => {
            let r = 0.5 * l2;
            let sign = if family == HhSub1K0 { 1.0 } else { -1.0 };
            (sign * r, r, r, lambda * r)
        }
        (HhSub3K0, FamilyArg::Curve { .. }) => (0.0, -l2, 0.0, 0.0),
        (f, arg) => {
            return Err(Error::Invalid(format!("{f} cannot be parametrized by {arg:?}")));
        }
    };
    Ok(CatalogPoint { family, lambda, mu, ell, a, b: None, h, kappa: 0.0, boundary: false })
}

/// Nearest stratum of the same kind as the event in (λ, μ, ℓ), if one lies
/// within `radius`; returns the family and the distance.
pub fn tag_event(ev: &BifurcationEvent, radius: f64) -> Option<(Family, f64)> {
    let candidates = if ev.kappa == 0.0 {
        families_present_kappa0(ev.lambda)
    } else {
        families_present(ev.lambda, ev.kappa)
    };
    candidates
        .into_iter()
        .filter(|f| f.kind() == ev.kind)
        .filter_map(|f| stratum_distance(f, ev).map(|d| (f, d)))
        .filter(|&(_, d)| d <= radius)
        .min_by(|x, y| x.1.total_cmp(&y.1))
}

fn distance(p: &CatalogPoint, ev: &BifurcationEvent) -> f64 {
    let d = [p.lambda - ev.lambda, p.mu - ev.mu, p.ell - ev.ell];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Distance from an event to the point of `family` with the same a (surface
/// families) or the same λ (curves and points).
fn stratum_distance(family: Family, ev: &BifurcationEvent) -> Option<f64> {
    let k = ev.kappa;
    let eval = |arg: FamilyArg| -> Option<CatalogPoint> {
        if family.is_kappa0() {
            kappa0(family, arg, false).ok()
        } else if k > 0.0 {
            positive_kappa(family, arg, k, false).ok()
        } else {
            catalog_point(family, arg, k).ok()
        }
    };
    match family {
        Family::Cs1 | Family::Cs2 | Family::Cs3 | Family::Cs4 | Family::Cs1K0 | Family::Cs2K0
        | Family::Cs3K0 => {
            let (lo, hi) = surface_a_range(family, ev.lambda, k)?;
            let slack = 1e-6 * ev.a.abs().max(1.0);
            if ev.a < lo - slack || ev.a > hi + slack {
                return None;
            }
            [Sign::Plus, Sign::Minus]
                .iter()
                .filter_map(|&sign| eval(FamilyArg::Surface { lambda: ev.lambda, a: ev.a, sign }))
                .map(|p| distance(&p, ev))
                .reduce(f64::min)
        }
        Family::Cusp3 => {
            let bound = 0.5 / (k * k);
            let mu = ev.mu.clamp(-bound, bound);
            eval(FamilyArg::Line { mu }).map(|p| distance(&p, ev))
        }
        Family::HhDeg1 | Family::HhDeg2 | Family::HhDeg3 => {
            eval(FamilyArg::Point).map(|p| distance(&p, ev))
        }
        _ => eval(FamilyArg::Curve { lambda: ev.lambda }).map(|p| distance(&p, ev)),
    }
}

/// Deterministic interior samples of a family: `n` arguments spread over a
/// bounded window of its parameter range.
pub fn sample_args(family: Family, kappa: f64, n: usize) -> Vec<FamilyArg> {
    use Family::*;
    let golden = 0.618_033_988_749_894_9_f64;
    let frac = |i: usize, off: f64| ((i as f64 + 0.5) * golden + off).fract();
    let lerp = |lo: f64, hi: f64, u: f64| lo + (hi - lo) * (0.02 + 0.96 * u);
    // λ-window in the κλ variable.
    let window = |fam: Family| -> (f64, f64) {
        match fam {
            Cs1 | Cs2 => (-3.0, 0.98),
            Cs3 | HhSub1 | HhSub2 | HhSup1 | HhSup2 => (-3.0, 0.49),
            Cs4 | Cusp1 | Cusp2 => (0.51, 0.99),
            HhSub3 => (-3.0, 0.99),
            HhSup3 => (1.01, 4.0),
            _ => (-3.0, 3.0),
        }
    };
    let unit_lambda = |t: f64| if kappa == 0.0 { t } else { t / kappa };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let u = frac(i, 0.0);
        let v = frac(i, 0.5);
        let arg = match family {
            HhDeg1 | HhDeg2 | HhDeg3 => FamilyArg::Point,
            Cusp3 => FamilyArg::Line { mu: lerp(-0.5, 0.5, u) / (kappa * kappa) },
            Cusp1 | Cusp2 | HhSub1 | HhSub2 | HhSub3 | HhSup1 | HhSup2 | HhSup3 => {
                let (lo, hi) = window(family);
                FamilyArg::Curve { lambda: unit_lambda(lerp(lo, hi, u)) }
            }
            HhSub1K0 | HhSub2K0 | HhSub3K0 => {
                let l = lerp(0.1, 3.0, u);
                FamilyArg::Curve { lambda: if i % 2 == 0 { l } else { -l } }
            }
            Cs1 | Cs2 | Cs3 | Cs4 | Cs1K0 | Cs2K0 | Cs3K0 => {
                let sign = if i % 2 == 0 { Sign::Plus } else { Sign::Minus };
                let lambda = if family.is_kappa0() {
                    let l = lerp(0.1, 3.0, u);
                    if i % 3 == 0 { -l } else { l }
                } else {
                    let (lo, hi) = window(family);
                    let mut t = lerp(lo, hi, u);
                    if t.abs() < 0.02 {
                        t = 0.02_f64.copysign(t);
                    }
                    if (t - 0.5).abs() < 0.01 {
                        t = 0.5 + 0.01_f64.copysign(t - 0.5);
                    }
                    unit_lambda(t)
                };
                match surface_a_range(family, lambda, kappa) {
                    Some((lo, hi)) => FamilyArg::Surface { lambda, a: lerp(lo, hi, v), sign },
                    None => continue,
                }
            }
        };
        out.push(arg);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifurcations::classify_multiple_root;

    fn pt(f: Family, arg: FamilyArg) -> CatalogPoint {
        catalog_point(f, arg, 1.0).unwrap()
    }

    #[test]
    fn point_examples() {
        let p = pt(Family::HhDeg1, FamilyArg::Point);
        assert_eq!((p.lambda, p.mu, p.ell), (0.5, 0.5, 0.5));
        let p = pt(Family::HhDeg2, FamilyArg::Point);
        assert_eq!((p.lambda, p.mu, p.ell), (0.5, -0.5, 0.5));
        let p = pt(Family::HhDeg3, FamilyArg::Point);
        assert_eq!((p.lambda, p.mu, p.ell), (1.0, 0.0, -1.0));
        let p = pt(Family::Cusp3, FamilyArg::Line { mu: 0.0 });
        assert_eq!((p.lambda, p.mu, p.ell), (0.5, 0.0, 0.25));
        let p = pt(Family::HhSub3, FamilyArg::Curve { lambda: 0.3 });
        assert_eq!((p.lambda, p.mu), (0.3, 0.0));
        assert!((p.ell + 0.09).abs() < 1e-15);
        let p = pt(Family::HhSup1, FamilyArg::Curve { lambda: 0.0 });
        assert_eq!((p.lambda, p.mu, p.ell), (0.0, 2.0, 2.0));
    }

    #[test]
    fn kappa0_examples() {
        let p = catalog_point_kappa0(Family::HhSub1K0, FamilyArg::Curve { lambda: 1.0 }).unwrap();
        assert_eq!((p.lambda, p.mu, p.ell), (1.0, 0.5, 0.5));
        let p = catalog_point_kappa0(Family::HhSub3K0, FamilyArg::Curve { lambda: 1.0 }).unwrap();
        assert_eq!((p.lambda, p.mu, p.ell), (1.0, 0.0, -1.0));
        assert!(catalog_point_kappa0(Family::HhSub3K0, FamilyArg::Curve { lambda: 0.0 }).is_err());
    }

    #[test]
    fn out_of_range_rejected() {
        let bad = FamilyArg::Surface { lambda: 0.3, a: 5.0, sign: Sign::Plus };
        assert!(catalog_point(Family::Cs1, bad, 1.0).is_err());
        assert!(catalog_point(Family::Cusp1, FamilyArg::Curve { lambda: 0.3 }, 1.0).is_err());
        assert!(catalog_point(Family::HhSup3, FamilyArg::Curve { lambda: 0.9 }, 1.0).is_err());
    }

    #[test]
    fn a0_sign_change() {
        let a0 = a0_root(0.75, 1.0).unwrap();
        let g = |a: f64| {
            let l = 0.75;
            4.0 * a.powi(3) + (12.0 * l - 12.0) * a * a + (12.0 * l * l - 18.0 * l + 9.0) * a
                + 4.0 * l.powi(3)
                - 4.0 * l * l
        };
        assert!(g(a0).abs() < 1e-13);
        assert!(g(0.0) < 0.0);
        assert!(a0_root(1.2, 1.0).is_err());
        assert!(a0_root(0.9999, 1.0).unwrap() < 1e-3);
    }

    #[test]
    fn samples_are_triple_roots_of_their_kind() {
        for kappa in [1.0, 2.0, 0.7, -1.0] {
            for fam in Family::UNIT {
                for arg in sample_args(fam, kappa, 20) {
                    let p = catalog_point(fam, arg, kappa).unwrap();
                    let ev = p.event();
                    assert!(ev.scaled_residual() < 1e-9, "{fam} κ={kappa} {p:?}");
                    let kind = classify_multiple_root(ev.a, &ev.quartic(), ev.casimirs());
                    assert_eq!(kind.unwrap(), fam.kind(), "{fam} κ={kappa} {p:?}");
                }
            }
        }
    }
}
