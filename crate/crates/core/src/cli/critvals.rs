//! Critical-value data above a (μ, ℓ) window at fixed δ.

use rayon::prelude::*;

use crate::critical_values::{critical_slice, sheet_crossings, thread_segments, tip_curvature, SliceNode, Thread};
use crate::error::Result;
use crate::model::{detuning_lambda, CasimirValues, ModelParams};
use crate::reduced_dynamics::{h_min, tip_energy, ReducedParams};

use super::output::{Cell, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct CritvalsConfig {
    pub params: ModelParams,
    /// Half-width of the square (μ, ℓ) window.
    pub range: f64,
    pub grid: usize,
}

impl CritvalsConfig {
    fn is_flat(&self) -> bool {
        self.params.lambda1 == 0.0 && self.params.lambda2 == 0.0
    }

    fn rp(&self, cas: CasimirValues) -> ReducedParams {
        ReducedParams::new(detuning_lambda(&self.params, cas), self.params.kappa)
    }
}

pub struct CritvalsData {
    pub nodes: Vec<SliceNode>,
    pub threads: Table,
    pub loci: Table,
}

fn axis(range: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| -range + 2.0 * range * i as f64 / (n - 1) as f64).collect()
}

pub fn compute(cfg: &CritvalsConfig) -> Result<CritvalsData> {
    let g = axis(cfg.range, cfg.grid);
    let nodes = if cfg.is_flat() {
        critical_slice(ReducedParams::new(cfg.params.delta, cfg.params.kappa), &g, &g)?
    } else {
        let grid: Vec<(f64, f64)> = g.iter().flat_map(|&m| g.iter().map(move |&l| (m, l))).collect();
        grid.par_iter()
            .map(|&(mu, ell)| {
                let rp = cfg.rp(CasimirValues::new(mu, ell));
                critical_slice(rp, &[mu], &[ell]).map(|mut v| v.remove(0))
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(CritvalsData { threads: thread_table(cfg)?, loci: loci_table(cfg, &nodes)?, nodes })
}

pub fn sheet_table(cfg: &CritvalsConfig, nodes: &[SliceNode]) -> Table {
    let mut t = Table::new(&["mu", "ell", "lambda", "sheet", "r", "h", "provenance", "flags"]);
    for nd in nodes {
        let lambda = detuning_lambda(&cfg.params, CasimirValues::new(nd.mu, nd.ell));
        let flags = nd.flags.join("; ");
        let mut row = |sheet: &str, r: Option<f64>, h: f64| {
            t.push(vec![
                nd.mu.into(),
                nd.ell.into(),
                lambda.into(),
                sheet.into(),
                r.into(),
                h.into(),
                "numeric-oracle".into(),
                flags.clone().into(),
            ])
        };
        if let Some(h) = nd.h_min {
            row("B", None, h);
        }
        for &(r, h) in &nd.elliptic_faces {
            row("F_e", Some(r), h);
        }
        for &(r, h) in &nd.hyperbolic_faces {
            row("F_h", Some(r), h);
        }
        if let Some(h) = nd.thread_h {
            row("thread", None, h);
        }
    }
    t
}

fn thread_table(cfg: &CritvalsConfig) -> Result<Table> {
    let mut t = Table::new(&[
        "thread", "ell", "mu", "lambda", "h_c", "h_min", "tip_curvature", "unstable", "detached", "provenance",
    ]);
    if !(cfg.params.kappa > 0.0) {
        return Ok(t);
    }
    let n = cfg.grid.max(2);
    for thread in Thread::ALL {
        let reach = cfg.range.max(if cfg.is_flat() { window_reach(cfg, thread)? } else { 0.0 });
        let ells: Vec<f64> = (1..=n)
            .map(|i| reach * i as f64 / n as f64)
            .map(|x| if thread == Thread::C12 { -x } else { x })
            .collect();
        let rows: Vec<Vec<Cell>> = ells
            .par_iter()
            .map(|&ell| {
                let cas = thread.casimirs(ell);
                let rp = cfg.rp(cas);
                let hc = tip_energy(cas, rp);
                let hm = h_min(cas, rp)?;
                let curv = tip_curvature(cas, rp);
                Ok(vec![
                    thread.name().into(),
                    ell.into(),
                    cas.mu.into(),
                    rp.lambda.into(),
                    hc.into(),
                    hm.into(),
                    curv.into(),
                    (curv < 0.0).into(),
                    (curv < 0.0 || hc > hm + 1e-12 * (1.0 + hc.abs())).into(),
                    "numeric-oracle".into(),
                ])
            })
            .collect::<Result<_>>()?;
        for r in rows {
            t.push(r);
        }
    }
    Ok(t)
}

/// Extent of the scanned thread window, so the whole unstable part shows.
fn window_reach(cfg: &CritvalsConfig, thread: Thread) -> Result<f64> {
    let rp = ReducedParams::new(cfg.params.delta, cfg.params.kappa);
    let segs = thread_segments(rp)?;
    let seg = segs.iter().find(|s| s.thread == thread).expect("every thread has a segment");
    let end = match thread {
        Thread::C12 => seg.unstable.map_or(0.0, |u| -u.1),
        _ => seg.unstable.map_or(0.0, |u| u.1),
    };
    Ok((1.25 * end).max(0.0))
}

fn loci_table(cfg: &CritvalsConfig, nodes: &[SliceNode]) -> Result<Table> {
    let mut t = Table::new(&["locus", "thread", "mu", "ell", "lambda", "provenance"]);
    if cfg.is_flat() && cfg.params.kappa > 0.0 {
        let lambda = cfg.params.delta;
        for s in thread_segments(ReducedParams::new(lambda, cfg.params.kappa))? {
            if let Some((a, b)) = s.unstable {
                for (name, x) in [("unstable_lo", a), ("unstable_hi", b)] {
                    if x.is_finite() {
                        let cas = s.thread.casimirs(x);
                        t.push(vec![
                            name.into(),
                            s.thread.name().into(),
                            cas.mu.into(),
                            x.into(),
                            lambda.into(),
                            "closed-form".into(),
                        ]);
                    }
                }
            }
            for &x in &s.detach_points {
                let cas = s.thread.casimirs(x);
                t.push(vec![
                    "detach".into(),
                    s.thread.name().into(),
                    cas.mu.into(),
                    x.into(),
                    lambda.into(),
                    "numeric-oracle".into(),
                ]);
            }
        }
    }
    for (mu, ell) in sheet_crossings(nodes) {
        let lambda = detuning_lambda(&cfg.params, CasimirValues::new(mu, ell));
        t.push(vec![
            "sheet_crossing".into(),
            Cell::Empty,
            mu.into(),
            ell.into(),
            lambda.into(),
            "numeric-oracle".into(),
        ]);
    }
    Ok(t)
}
