//! Fibers of the energy-momentum map (N, L, H_λ) and the set of its critical
//! values.
//!
//! On the reduced space the level set H = h is {X = h − λR − κR²/2,
//! Y² = −F(R)}, so its connected components are the connected components of
//! {F ≤ 0} ∩ [R_min, ∞). Each one lifts to a component of the fiber.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bifurcations::{f_quartic, Quartic};
use crate::error::{Error, Result};
use crate::model::CasimirValues;
use crate::poly;
use crate::reduced_dynamics::{equilibria, h_min, tip_energy, ReducedParams, Stability};
use crate::reduced_space::{r_min, tip_class, TipKind, DEFAULT_EPS_C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComponentKind {
    Point,
    Circle,
    Torus2,
    Torus3,
    PinchedTorusTimesT1,
    FigureEightTimesT2,
    CuspPinchedT3,
}

impl ComponentKind {
    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::Point => "Point",
            ComponentKind::Circle => "Circle",
            ComponentKind::Torus2 => "Torus2",
            ComponentKind::Torus3 => "Torus3",
            ComponentKind::PinchedTorusTimesT1 => "PinchedTorusTimesT1",
            ComponentKind::FigureEightTimesT2 => "FigureEightTimesT2",
            ComponentKind::CuspPinchedT3 => "CuspPinchedT3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentDescriptor {
    pub kind: ComponentKind,
    /// Range of R covered by the reduced component.
    pub r_interval: (f64, f64),
    pub through_tip: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    pub components: Vec<ComponentDescriptor>,
    pub is_critical: bool,
    /// Set when a root multiplicity or sign sits within the gray band of the
    /// tolerance; the components are then a best guess.
    pub flag: Option<String>,
    /// R of the flagged node, when the flag is local to one place.
    pub flag_at: Option<f64>,
}

impl FiberReport {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn count(&self, kind: ComponentKind) -> usize {
        self.components.iter().filter(|c| c.kind == kind).count()
    }

    /// Sorted kinds with multiplicities.
    pub fn multiset(&self) -> Vec<(ComponentKind, usize)> {
        let mut kinds: Vec<ComponentKind> = self.components.iter().map(|c| c.kind).collect();
        kinds.sort();
        let mut out: Vec<(ComponentKind, usize)> = Vec::new();
        for k in kinds {
            match out.last_mut() {
                Some((last, n)) if *last == k => *n += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    /// "Torus2 ×1 + Torus3 ×1", or "Empty".
    pub fn summary(&self) -> String {
        if self.components.is_empty() {
            return "Empty".into();
        }
        self.multiset()
            .iter()
            .map(|(k, n)| format!("{} ×{}", k.name(), n))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Zero test for F at a node: |F| ≤ `zero`·(monomial magnitude). Values up
/// to `band` times that are flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberTolerances {
    pub zero: f64,
    pub band: f64,
    pub eps_c: f64,
}

impl Default for FiberTolerances {
    fn default() -> Self {
        FiberTolerances { zero: 1e-11, band: 100.0, eps_c: DEFAULT_EPS_C }
    }
}

pub fn classify_fiber(cas: CasimirValues, rp: ReducedParams, h: f64) -> Result<FiberReport> {
    classify_fiber_with(cas, rp, h, FiberTolerances::default())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    /// A node or a simple root; `critical` marks critical points of F.
    At { x: f64, sign: i8, critical: bool },
    /// Open interval on which F has a constant sign.
    Open { sign: i8 },
}

pub fn classify_fiber_with(
    cas: CasimirValues,
    rp: ReducedParams,
    h: f64,
    tol: FiberTolerances,
) -> Result<FiberReport> {
    if !(rp.kappa > 0.0) {
        return Err(Error::Unsupported("fiber classification needs κ > 0".into()));
    }
    if !(h.is_finite() && rp.lambda.is_finite() && cas.mu.is_finite() && cas.ell.is_finite()) {
        return Err(Error::Invalid("non-finite fiber value".into()));
    }
    let q = f_quartic(h, rp, cas);
    let tip = tip_class(cas, tol.eps_c);
    let r0 = tip.r_min;
    let hi = poly::cauchy_bound(&q.c).max(r0.abs() + 1.0) + r0.abs();
    let dq = poly::derivative(&q.c);
    let crit: Vec<f64> = poly::real_roots_isolated(&dq, r0, hi, 1e-14)
        .into_iter()
        .filter(|&x| x > r0 && x < hi)
        .collect();

    let mut flag: Option<String> = None;
    let mut flag_at: Option<f64> = None;
    let mut sign_of = |x: f64| -> i8 {
        let (f, m) = (q.eval(x), q.magnitude(x).max(f64::MIN_POSITIVE));
        if f.abs() <= tol.zero * m {
            0
        } else {
            if f.abs() <= tol.band * tol.zero * m && flag.is_none() {
                flag = Some(format!("F({x}) = {f:.3e} is within the tolerance band"));
                flag_at = Some(x);
            }
            if f > 0.0 { 1 } else { -1 }
        }
    };
    let mut nodes: Vec<(f64, i8, bool)> = Vec::with_capacity(crit.len() + 2);
    nodes.push((r0, sign_of(r0), false));
    for &c in &crit {
        nodes.push((c, sign_of(c), true));
    }
    nodes.push((hi, sign_of(hi), false));
    // F(R_min) = (X₁(R_min))² ≥ 0; negative values are rounding.
    if nodes[0].1 < 0 {
        nodes[0].1 = 0;
    }

    let mut pieces = Vec::new();
    for w in 0..nodes.len() {
        let (x, s, c) = nodes[w];
        pieces.push(Piece::At { x, sign: s, critical: c });
        if w + 1 == nodes.len() {
            break;
        }
        let (y, t, _) = nodes[w + 1];
        if s * t < 0 {
            let root = poly::bisect(|r| q.eval(r), x, y);
            pieces.push(Piece::Open { sign: s });
            pieces.push(Piece::At { x: root, sign: 0, critical: false });
            pieces.push(Piece::Open { sign: t });
        } else if s != 0 || t != 0 {
            pieces.push(Piece::Open { sign: if s != 0 { s } else { t } });
        } else {
            if flag.is_none() {
                flag = Some(format!("F vanishes on [{x}, {y}] within tolerance"));
                flag_at = None;
            }
            pieces.push(Piece::Open { sign: 0 });
        }
    }

    let mut components = Vec::new();
    let mut degenerate = false;
    let mut i = 0;
    while i < pieces.len() {
        let nonpos = |p: &Piece| match p {
            Piece::At { sign, .. } | Piece::Open { sign } => *sign <= 0,
        };
        if !nonpos(&pieces[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < pieces.len() && nonpos(&pieces[i + 1]) {
            i += 1;
        }
        let run = &pieces[start..=i];
        i += 1;
        let (c, deg) = component_from_run(run, r0, tip.kind, &q);
        degenerate |= deg;
        components.push(c);
    }
    if degenerate {
        flag = Some("degenerate (higher-order) root of F".into());
        flag_at = None;
    }
    let is_critical = degenerate
        || components.iter().any(|c| c.kind != ComponentKind::Torus3)
        || flag.is_some();
    Ok(FiberReport { components, is_critical, flag, flag_at })
}

fn component_from_run(
    run: &[Piece],
    r0: f64,
    tip: TipKind,
    q: &Quartic,
) -> (ComponentDescriptor, bool) {
    let points: Vec<(f64, i8, bool)> = run
        .iter()
        .filter_map(|p| match *p {
            Piece::At { x, sign, critical } => Some((x, sign, critical)),
            Piece::Open { .. } => None,
        })
        .collect();
    let lo = points.first().map_or(r0, |p| p.0);
    let hi = points.last().map_or(r0, |p| p.0);
    let through_tip = lo == r0;
    let mut degenerate = false;
    if run.len() == 1 {
        let kind = if through_tip {
            match tip {
                TipKind::Smooth => ComponentKind::Torus2,
                TipKind::Cone => ComponentKind::Circle,
                TipKind::Cusp => ComponentKind::Point,
            }
        } else {
            ComponentKind::Torus2
        };
        return (ComponentDescriptor { kind, r_interval: (lo, hi), through_tip }, false);
    }
    // Zero critical points strictly inside the run are saddle connections;
    // at the ends they are higher-order roots.
    let inner_saddles = points[1..points.len() - 1]
        .iter()
        .filter(|p| p.1 == 0 && p.2)
        .count();
    let end_crit = [points[0], points[points.len() - 1]]
        .iter()
        .any(|p| p.1 == 0 && p.2);
    if end_crit || inner_saddles > 1 {
        degenerate = true;
    }
    let kind = if inner_saddles > 0 {
        if through_tip && tip != TipKind::Smooth {
            degenerate = true;
        }
        ComponentKind::FigureEightTimesT2
    } else if through_tip {
        match tip {
            TipKind::Smooth => ComponentKind::Torus3,
            TipKind::Cone => ComponentKind::PinchedTorusTimesT1,
            TipKind::Cusp => ComponentKind::CuspPinchedT3,
        }
    } else {
        ComponentKind::Torus3
    };
    if through_tip && tip == TipKind::Smooth && q.deriv(1, r0) >= 0.0 {
        degenerate = true;
    }
    (ComponentDescriptor { kind, r_interval: (lo, hi), through_tip }, degenerate)
}

/// Curves of tip values: C23 is μ = ℓ > 0, C13 is μ = −ℓ with ℓ > 0, C12 is
/// μ = 0 with ℓ < 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Thread {
    C23,
    C13,
    C12,
}

impl Thread {
    pub const ALL: [Thread; 3] = [Thread::C23, Thread::C13, Thread::C12];

    pub fn name(self) -> &'static str {
        match self {
            Thread::C23 => "C23",
            Thread::C13 => "C13",
            Thread::C12 => "C12",
        }
    }

    pub fn casimirs(self, ell: f64) -> CasimirValues {
        match self {
            Thread::C23 => CasimirValues::new(ell, ell),
            Thread::C13 => CasimirValues::new(-ell, ell),
            Thread::C12 => CasimirValues::new(0.0, ell),
        }
    }

    /// Energy of the tip along the curve.
    pub fn h_c(self, ell: f64, rp: ReducedParams) -> f64 {
        tip_energy(self.casimirs(ell), rp)
    }

    /// Allowed ℓ-range of the curve.
    pub fn ell_domain(self) -> (f64, f64) {
        match self {
            Thread::C12 => (f64::NEG_INFINITY, 0.0),
            _ => (0.0, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadSegment {
    pub thread: Thread,
    /// ℓ-interval where the tip is unstable (F″(R_min) < 0 at h_c).
    pub unstable: Option<(f64, f64)>,
    /// ℓ-intervals, inside the scanned window, where h_c > h_min.
    pub detached: Vec<(f64, f64)>,
    /// Ends of `detached` that are not ends of the scanned window or of the
    /// unstable interval: places where the curve leaves the surface B.
    pub detach_points: Vec<f64>,
    pub window: (f64, f64),
}

/// Unstable and detached parts of the three tip curves at fixed λ (κ > 0).
pub fn thread_segments(rp: ReducedParams) -> Result<Vec<ThreadSegment>> {
    if !(rp.kappa > 0.0) {
        return Err(Error::Unsupported("thread segments need κ > 0".into()));
    }
    let (l, k) = (rp.lambda, rp.kappa);
    let t = k * l;
    let span = (4.0 + 2.0 * t.abs() + t * t) / (k * k);
    Thread::ALL
        .iter()
        .map(|&thread| {
            let unstable = match thread {
                Thread::C12 => Some((f64::NEG_INFINITY, -l * l)),
                _ if t < 0.5 => {
                    let s = (1.0 - 2.0 * t).sqrt();
                    let lo = ((1.0 - t - s) / (k * k)).max(0.0);
                    let hi = (1.0 - t + s) / (k * k);
                    (hi > 0.0).then_some((lo, hi))
                }
                _ => None,
            };
            let window = match thread {
                Thread::C12 => (-span - l * l, 0.0),
                _ => (0.0, span + unstable.map_or(0.0, |u| u.1)),
            };
            let detached = detached_intervals(thread, rp, window)?;
            let detach_points = detached
                .iter()
                .flat_map(|&(a, b)| [a, b])
                .filter(|&x| {
                    let at = |y: f64| y.is_finite() && (x - y).abs() <= 1e-8 * (1.0 + y.abs());
                    !at(window.0) && !at(window.1)
                        && !unstable.is_some_and(|(u0, u1)| at(u0) || at(u1))
                })
                .collect();
            Ok(ThreadSegment { thread, unstable, detached, detach_points, window })
        })
        .collect()
}

fn gap(thread: Thread, rp: ReducedParams, ell: f64) -> Result<f64> {
    let cas = thread.casimirs(ell);
    let hc = tip_energy(cas, rp);
    let hm = h_min(cas, rp)?;
    Ok(hc - hm)
}

/// An unstable tip is never the minimum; a stable one is detached when some
/// other equilibrium lies strictly lower.
fn is_detached(thread: Thread, rp: ReducedParams, ell: f64) -> Result<bool> {
    let cas = thread.casimirs(ell);
    let hc = tip_energy(cas, rp);
    if tip_curvature(cas, rp) < 0.0 {
        return Ok(true);
    }
    Ok(gap(thread, rp, ell)? > 1e-12 * (1.0 + hc.abs() + r_min(cas).powi(2)))
}

/// F″(R_min) at the tip energy: 2(λ + κR_min)² − 6R_min + 2ℓ.
pub fn tip_curvature(cas: CasimirValues, rp: ReducedParams) -> f64 {
    let r = r_min(cas);
    2.0 * (rp.lambda + rp.kappa * r).powi(2) - 6.0 * r + 2.0 * cas.ell
}

fn detached_intervals(thread: Thread, rp: ReducedParams, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    const N: usize = 400;
    let (a, b) = window;
    // Interior samples only: the window ends are tip-degenerate for cone curves.
    let xs: Vec<f64> = (1..N).map(|i| a + (b - a) * i as f64 / N as f64).collect();
    let flags: Vec<bool> = xs
        .iter()
        .map(|&x| is_detached(thread, rp, x))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut start: Option<f64> = if flags[0] { Some(a) } else { None };
    for i in 1..xs.len() {
        if flags[i] != flags[i - 1] {
            let edge = bisect_predicate(|x| is_detached(thread, rp, x), xs[i - 1], xs[i], flags[i - 1])?;
            if flags[i] {
                start = Some(edge);
            } else if let Some(s) = start.take() {
                out.push((s, edge));
            }
        }
    }
    if let Some(s) = start {
        out.push((s, b));
    }
    Ok(out)
}

/// Boundary between `left_value` and its negation on [lo, hi], to 1e−10.
fn bisect_predicate<P: Fn(f64) -> Result<bool>>(
    p: P,
    mut lo: f64,
    mut hi: f64,
    left_value: bool,
) -> Result<f64> {
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if p(mid)? == left_value {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Critical heights above one node (μ, ℓ) of a slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceNode {
    pub mu: f64,
    pub ell: f64,
    pub h_min: Option<f64>,
    /// Tip energy when the tip is singular and lies above the surface B.
    pub thread_h: Option<f64>,
    /// (R, h) of elliptic equilibria above h_min.
    pub elliptic_faces: Vec<(f64, f64)>,
    /// (R, h) of hyperbolic equilibria.
    pub hyperbolic_faces: Vec<(f64, f64)>,
    /// (R, h) of every elliptic equilibrium, including the minimum.
    pub elliptic_all: Vec<(f64, f64)>,
    pub flags: Vec<String>,
}

/// Samples the critical set over a (μ, ℓ) grid; each height is checked
/// against [`classify_fiber`] and disagreements are flagged.
pub fn critical_slice(rp: ReducedParams, mus: &[f64], ells: &[f64]) -> Result<Vec<SliceNode>> {
    if !(rp.kappa > 0.0) {
        return Err(Error::Unsupported("critical slices need κ > 0".into()));
    }
    let grid: Vec<(f64, f64)> =
        mus.iter().flat_map(|&m| ells.iter().map(move |&l| (m, l))).collect();
    Ok(grid.par_iter().map(|&(mu, ell)| slice_node(rp, mu, ell)).collect())
}

fn slice_node(rp: ReducedParams, mu: f64, ell: f64) -> SliceNode {
    let cas = CasimirValues::new(mu, ell);
    let mut node = SliceNode {
        mu,
        ell,
        h_min: None,
        thread_h: None,
        elliptic_faces: Vec::new(),
        hyperbolic_faces: Vec::new(),
        elliptic_all: Vec::new(),
        flags: Vec::new(),
    };
    let eqs = match equilibria(cas, rp) {
        Ok(e) => e,
        Err(e) => {
            node.flags.push(e.to_string());
            return node;
        }
    };
    let hm = eqs.iter().map(|e| e.h).fold(tip_energy(cas, rp), f64::min);
    node.h_min = Some(hm);
    let above = |h: f64| h > hm + 1e-12 * (1.0 + h.abs());
    for e in &eqs {
        match e.stability {
            Stability::Elliptic => {
                node.elliptic_all.push((e.r, e.h));
                if above(e.h) {
                    node.elliptic_faces.push((e.r, e.h));
                }
            }
            Stability::Hyperbolic => node.hyperbolic_faces.push((e.r, e.h)),
            Stability::SingularTip => {
                if above(e.h) {
                    node.thread_h = Some(e.h);
                }
            }
            Stability::Degenerate => node.flags.push(format!("degenerate equilibrium at R = {}", e.r)),
        }
    }
    let mut check = |h: f64, want: ComponentKind, what: &str| match classify_fiber(cas, rp, h) {
        Ok(rep) if rep.count(want) >= 1 => {}
        Ok(rep) => node.flags.push(format!("{what} at h = {h}: fiber is {}", rep.summary())),
        Err(e) => node.flags.push(format!("{what} at h = {h}: {e}")),
    };
    for &(_, h) in &node.elliptic_faces.clone() {
        check(h, ComponentKind::Torus2, "elliptic face");
    }
    for &(_, h) in &node.hyperbolic_faces.clone() {
        check(h, ComponentKind::FigureEightTimesT2, "hyperbolic face");
    }
    if let Some(h) = node.thread_h {
        let kind = tip_class(cas, DEFAULT_EPS_C).kind;
        // at a cusp F = λ²R² − R³ + …, so λ = 0 is already unstable
        let curv = tip_curvature(cas, rp);
        let unstable = curv < 0.0 || (kind == TipKind::Cusp && curv <= 0.0);
        let want = match (kind, unstable) {
            (TipKind::Cusp, true) => ComponentKind::CuspPinchedT3,
            (TipKind::Cusp, false) => ComponentKind::Point,
            (_, true) => ComponentKind::PinchedTorusTimesT1,
            (_, false) => ComponentKind::Circle,
        };
        check(h, want, "thread");
    }
    node
}

/// ℓ-positions along each μ-row where the two elliptic heights swap order:
/// the crossing loci of the two sheets of elliptic critical values.
pub fn sheet_crossings(nodes: &[SliceNode]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in nodes.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        if p.mu != q.mu || p.elliptic_all.len() != 2 || q.elliptic_all.len() != 2 {
            continue;
        }
        let d = |n: &SliceNode| n.elliptic_all[0].1 - n.elliptic_all[1].1;
        let (dp, dq) = (d(p), d(q));
        if dp * dq < 0.0 {
            let s = dp / (dp - dq);
            out.push((p.mu, p.ell + s * (q.ell - p.ell)));
        }
    }
    out
}
