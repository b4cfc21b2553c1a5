//! Command-line front end. Flags take precedence over `RES112_*` environment
//! variables, which take precedence over defaults.

pub mod bifdiag;
pub mod critvals;
pub mod output;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::critical_values::{classify_fiber_with, FiberTolerances};
use crate::error::Error;
use crate::model::{detuning_lambda, kappa_scaling, to_unit_kappa, CasimirValues, ModelParams, ScaledValues};
use crate::monodromy::{
    generator_vector, monodromy_vector, polygon_loop, Generator, LoopValue, LoopWinding, MonodromyConfig,
};
use crate::reduced_dynamics::ReducedParams;
use crate::selfcheck;

pub use output::{Cell, Format, Table};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "res112", version, about = "Bifurcations, critical values and monodromy of the 1:1:-2 resonance")]
pub struct Cli {
    #[command(flatten)]
    pub globals: Globals,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Globals {
    /// Coefficient κ of the quadratic R term.
    #[arg(long, global = true, env = "RES112_KAPPA", default_value_t = 1.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Constant part δ of the detuning.
    #[arg(long, global = true, env = "RES112_DELTA", default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
    /// Slope of the detuning in μ.
    #[arg(long, global = true, env = "RES112_LAMBDA1", default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda1: f64,
    /// Slope of the detuning in ℓ.
    #[arg(long, global = true, env = "RES112_LAMBDA2", default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda2: f64,
    /// Grid size: λ-nodes (bifdiag), nodes per axis (critvals), loop points (monodromy).
    #[arg(long, global = true, env = "RES112_GRID")]
    pub grid: Option<usize>,
    /// Tolerance: bisection (bifdiag), zero test of F (fiber), ODE rtol (monodromy).
    #[arg(long, global = true, env = "RES112_TOL")]
    pub tol: Option<f64>,
    #[arg(long, global = true, env = "RES112_FORMAT", value_enum)]
    pub format: Option<Format>,
    /// Output directory (bifdiag, critvals) or file (other commands).
    #[arg(long, global = true, env = "RES112_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "RES112_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Slices of the bifurcation set at fixed ℓ, plus samples of every stratum.
    Bifdiag {
        /// Comma-separated ℓ values.
        #[arg(long, env = "RES112_ELL", value_delimiter = ',', allow_hyphen_values = true, required = true)]
        ell: Vec<f64>,
        /// λ-window as LO,HI; empty when LO ≥ HI.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1.5,1.5")]
        lambda_window: Vec<f64>,
    },
    /// B-heights, tetrahedron faces, threads and loci at fixed δ.
    Critvals {
        /// Half-width of the (μ, ℓ) window.
        #[arg(long, default_value_t = 1.0)]
        range: f64,
    },
    /// Components of the fiber over (μ, ℓ, h).
    Fiber {
        #[arg(long, env = "RES112_MU", allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, env = "RES112_ELL", allow_negative_numbers = true)]
        ell: f64,
        #[arg(long, env = "RES112_H", allow_negative_numbers = true)]
        h: f64,
    },
    /// Monodromy along a generator loop (gamma1|gamma2|gamma3) or a polygon
    /// "mu,ell,h;mu,ell,h;...".
    Monodromy {
        #[arg(long = "loop", allow_hyphen_values = true)]
        loop_spec: String,
    },
    /// Maps reduced values to κ = 1, or back with --from-unit.
    Scale {
        #[arg(long, env = "RES112_MU", default_value_t = 0.0, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, env = "RES112_ELL", default_value_t = 0.0, allow_negative_numbers = true)]
        ell: f64,
        #[arg(long, env = "RES112_H", default_value_t = 0.0, allow_negative_numbers = true)]
        h: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        y: f64,
        #[arg(long)]
        from_unit: bool,
    },
    /// Runs the acceptance criteria.
    Selfcheck {
        /// Comma-separated criterion numbers; all when absent.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

/// Validated run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub globals: Globals,
    pub command: Command,
}

impl RunConfig {
    /// Collects every problem into one report.
    pub fn new(cli: Cli) -> Result<Self, CliError> {
        let g = &cli.globals;
        let mut errs: Vec<String> = Vec::new();
        let params = ModelParams {
            delta: g.delta,
            kappa: g.kappa,
            lambda1: g.lambda1,
            lambda2: g.lambda2,
            ..Default::default()
        };
        if let Err(e) = params.validate() {
            errs.push(e.to_string());
        }
        if g.grid.is_some_and(|n| n < 2) {
            errs.push("--grid must be at least 2".into());
        }
        if g.tol.is_some_and(|t| !(t > 0.0 && t < 1.0)) {
            errs.push("--tol must lie in (0, 1)".into());
        }
        if g.workers == Some(0) {
            errs.push("--workers must be positive".into());
        }
        let needs_kappa = !matches!(cli.command, Command::Bifdiag { .. } | Command::Selfcheck { .. });
        if needs_kappa && !(g.kappa > 0.0) {
            errs.push(format!("this command needs κ > 0 (got {})", g.kappa));
        }
        match &cli.command {
            Command::Bifdiag { ell, lambda_window } => {
                if ell.iter().any(|x| !x.is_finite()) {
                    errs.push("--ell values must be finite".into());
                }
                if lambda_window.len() != 2 || lambda_window.iter().any(|x| !x.is_finite()) {
                    errs.push("--lambda-window takes two finite values LO,HI".into());
                }
                if g.delta != 0.0 || g.lambda1 != 0.0 || g.lambda2 != 0.0 {
                    errs.push("bifdiag works in the detuning λ itself; --delta/--lambda1/--lambda2 do not apply".into());
                }
                if g.kappa < 0.0 {
                    errs.push("bifdiag needs κ ≥ 0".into());
                }
            }
            Command::Critvals { range } => {
                if !(*range > 0.0 && range.is_finite()) {
                    errs.push("--range must be positive".into());
                }
                if g.tol.is_some() {
                    errs.push("critvals uses the default fiber tolerances; drop --tol".into());
                }
            }
            Command::Fiber { mu, ell, h } => {
                if ![mu, ell, h].iter().all(|x| x.is_finite()) {
                    errs.push("--mu, --ell and --h must be finite".into());
                }
            }
            Command::Monodromy { loop_spec } => {
                if let Err(e) = parse_loop(loop_spec) {
                    errs.push(e);
                }
            }
            Command::Scale { .. } => {
                if g.kappa == 0.0 {
                    errs.push("scale needs κ ≠ 0".into());
                }
            }
            Command::Selfcheck { only } => {
                for id in only {
                    if !(1..=11).contains(id) {
                        errs.push(format!("no criterion {id}"));
                    }
                }
            }
        }
        if errs.is_empty() {
            Ok(RunConfig { params, globals: cli.globals, command: cli.command })
        } else {
            Err(CliError::Validation(errs.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum LoopSpec {
    Named(Generator),
    Polygon(Vec<(f64, f64, f64)>),
}

fn parse_loop(s: &str) -> Result<LoopSpec, String> {
    if let Some(g) = Generator::from_name(s.trim()) {
        return Ok(LoopSpec::Named(g));
    }
    let mut verts = Vec::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let xs: Vec<f64> = part
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("bad loop vertex {part:?}"))?;
        match xs.as_slice() {
            [m, l, h] if xs.iter().all(|x| x.is_finite()) => verts.push((*m, *l, *h)),
            _ => return Err(format!("loop vertex {part:?} is not mu,ell,h")),
        }
    }
    if verts.is_empty() {
        return Err(format!("--loop {s:?} is neither gamma1|gamma2|gamma3 nor a vertex list"));
    }
    let mut distinct = verts.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(format!("--loop needs at least three distinct vertices, got {}", distinct.len()));
    }
    Ok(LoopSpec::Polygon(verts))
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match RunConfig::new(cli).and_then(|cfg| execute(&cfg)) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("res112: {e}");
            e.exit_code()
        }
    }
}

/// Runs a validated configuration; returns what goes to stdout.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    if let Some(n) = cfg.globals.workers {
        // fails only when a pool already exists, which is then reused
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let g = &cfg.globals;
    match &cfg.command {
        Command::Bifdiag { ell, lambda_window } => {
            let c = bifdiag::BifdiagConfig {
                kappa: g.kappa,
                ells: ell.clone(),
                lambda_window: (lambda_window[0], lambda_window[1]),
                grid: g.grid.unwrap_or(301),
                tol: g.tol.unwrap_or(1e-13),
            };
            let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let paths = run_bifdiag(&c, &dir, g.format.unwrap_or(Format::Csv))?;
            Ok(list_paths(&paths))
        }
        Command::Critvals { range } => {
            let c = critvals::CritvalsConfig { params: cfg.params, range: *range, grid: g.grid.unwrap_or(101) };
            let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let paths = run_critvals(&c, &dir, g.format.unwrap_or(Format::Csv))?;
            Ok(list_paths(&paths))
        }
        Command::Fiber { mu, ell, h } => emit(g, fiber_text(cfg, *mu, *ell, *h)?),
        Command::Monodromy { loop_spec } => emit(g, monodromy_text(cfg, loop_spec)?),
        Command::Scale { mu, ell, h, r, x, y, from_unit } => {
            let v = ScaledValues { lambda: g.delta, mu: *mu, ell: *ell, r: *r, x: *x, y: *y, h: *h };
            let s = if *from_unit { kappa_scaling(v, g.kappa)? } else { to_unit_kappa(v, g.kappa)? };
            let out = match g.format {
                Some(f) => {
                    let mut t = Table::new(&["lambda", "mu", "ell", "r", "x", "y", "h", "kappa"]);
                    let k = if *from_unit { g.kappa } else { 1.0 };
                    t.push(vec![
                        s.lambda.into(),
                        s.mu.into(),
                        s.ell.into(),
                        s.r.into(),
                        s.x.into(),
                        s.y.into(),
                        s.h.into(),
                        k.into(),
                    ]);
                    bytes_to_string(t.render(f)?)
                }
                None => format!(
                    "lambda = {}\nmu = {}\nell = {}\nr = {}\nx = {}\ny = {}\nh = {}\n",
                    s.lambda, s.mu, s.ell, s.r, s.x, s.y, s.h
                ),
            };
            emit(g, out)
        }
        Command::Selfcheck { only } => {
            let ids: Vec<u32> = if only.is_empty() { (1..=11).collect() } else { only.clone() };
            let mut text = String::new();
            let mut failed = 0;
            for id in ids {
                let r = selfcheck::run_criterion(id);
                let _ = writeln!(text, "{}", r.line());
                if !r.passed {
                    failed += 1;
                }
            }
            if failed > 0 {
                print!("{text}");
                return Err(CliError::Numerical(format!("{failed} criteria failed")));
            }
            Ok(text)
        }
    }
}

fn bytes_to_string(b: Vec<u8>) -> String {
    String::from_utf8(b).expect("tables are UTF-8")
}

fn list_paths(paths: &[PathBuf]) -> String {
    paths.iter().map(|p| format!("{}\n", p.display())).collect()
}

/// Writes to --out when given, otherwise returns the text for stdout.
fn emit(g: &Globals, text: String) -> Result<String, CliError> {
    match &g.out {
        Some(path) => {
            output::write_file(path, text.as_bytes())?;
            Ok(format!("{}\n", path.display()))
        }
        None => Ok(text),
    }
}

pub fn run_bifdiag(c: &bifdiag::BifdiagConfig, dir: &Path, format: Format) -> Result<Vec<PathBuf>, CliError> {
    let pts = bifdiag::slice_points(c)?;
    output::ensure_dir(dir)?;
    let slices = bifdiag::slice_table(c, &pts).write(dir, "bifdiag_slices", format)?;
    let surface = bifdiag::surface_table(c.kappa, c.grid).write(dir, "bifdiag_surface", format)?;
    Ok(vec![slices, surface])
}

pub fn run_critvals(c: &critvals::CritvalsConfig, dir: &Path, format: Format) -> Result<Vec<PathBuf>, CliError> {
    let data = critvals::compute(c)?;
    output::ensure_dir(dir)?;
    Ok(vec![
        critvals::sheet_table(c, &data.nodes).write(dir, "critvals_sheets", format)?,
        data.threads.write(dir, "critvals_threads", format)?,
        data.loci.write(dir, "critvals_loci", format)?,
    ])
}

fn fiber_text(cfg: &RunConfig, mu: f64, ell: f64, h: f64) -> Result<String, CliError> {
    let cas = CasimirValues::new(mu, ell);
    let rp = ReducedParams::new(detuning_lambda(&cfg.params, cas), cfg.params.kappa);
    let mut tol = FiberTolerances::default();
    if let Some(t) = cfg.globals.tol {
        tol.zero = t;
    }
    let rep = classify_fiber_with(cas, rp, h, tol)?;
    Ok(match cfg.globals.format {
        None => {
            let mut s = format!("{}\n", rep.summary());
            if let Some(f) = &rep.flag {
                let _ = writeln!(s, "flag: {f}");
            }
            s
        }
        Some(Format::Json) => {
            let v = json!({
                "mu": mu, "ell": ell, "h": h, "lambda": rp.lambda, "kappa": rp.kappa,
                "summary": rep.summary(), "report": rep,
            });
            format!("{v}\n")
        }
        Some(Format::Csv) => {
            let mut t = Table::new(&["kind", "r_lo", "r_hi", "through_tip", "critical", "flag"]);
            for c in &rep.components {
                t.push(vec![
                    c.kind.name().into(),
                    c.r_interval.0.into(),
                    c.r_interval.1.into(),
                    c.through_tip.into(),
                    rep.is_critical.into(),
                    rep.flag.clone().unwrap_or_default().into(),
                ]);
            }
            bytes_to_string(t.render(Format::Csv)?)
        }
    })
}

fn monodromy_text(cfg: &RunConfig, spec: &str) -> Result<String, CliError> {
    let mut mc = MonodromyConfig::default();
    if let Some(t) = cfg.globals.tol {
        mc.rtol = t;
    }
    let n = cfg.globals.grid.unwrap_or(64);
    let (name, w): (String, LoopWinding) = match parse_loop(spec).map_err(CliError::Validation)? {
        LoopSpec::Named(g) => {
            let (_, w) = generator_vector(g, &cfg.params, n, &mc)?;
            (g.name().to_string(), w)
        }
        LoopSpec::Polygon(vs) => {
            let verts: Vec<LoopValue> =
                vs.iter().map(|&(m, l, h)| LoopValue::new(m, 0.5 * (m + l), h)).collect();
            let per_edge = (n / verts.len()).max(1);
            let w = monodromy_vector(&polygon_loop(&verts, per_edge), &cfg.params, &mc)?;
            ("polygon".to_string(), w)
        }
    };
    let m = w.vector.to_matrix();
    Ok(match cfg.globals.format {
        None => {
            let mut s = String::new();
            let _ = writeln!(s, "loop: {name}");
            let _ = writeln!(s, "vector: {}", w.vector);
            let _ = writeln!(s, "matrix:");
            for row in m.0 {
                let _ = writeln!(s, "  {:>3} {:>3} {:>3}", row[0], row[1], row[2]);
            }
            let _ = writeln!(s, "winding: ({:.6}, {:.6})", w.winding.0, w.winding.1);
            let _ = writeln!(s, "points: {}  max step: {:.4}", w.points, w.max_step);
            s
        }
        Some(Format::Json) => {
            let v = json!({
                "loop": name, "m_n": w.vector.m_n, "m_j": w.vector.m_j, "matrix": m.0,
                "winding": [w.winding.0, w.winding.1], "points": w.points, "max_step": w.max_step,
                "delta": cfg.params.delta, "kappa": cfg.params.kappa,
            });
            format!("{v}\n")
        }
        Some(Format::Csv) => {
            let mut t = Table::new(&["mu", "iota", "h", "r_lo", "r_hi", "theta_n", "theta_j", "t_red"]);
            for p in &w.track {
                t.push(vec![
                    p.value.mu.into(),
                    p.value.iota.into(),
                    p.value.h.into(),
                    p.r_interval.0.into(),
                    p.r_interval.1.into(),
                    p.theta_n.into(),
                    p.theta_j.into(),
                    p.t_red.into(),
                ]);
            }
            bytes_to_string(t.render(Format::Csv)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("res112").chain(args.iter().copied()))
            .map_err(|e| CliError::Validation(e.to_string()))?;
        RunConfig::new(cli)
    }

    #[test]
    fn negative_lists_parse() {
        let c = parse(&["bifdiag", "--ell", "-1.25,-0.125,0", "--lambda-window", "-1,0.5"]);
        match c.unwrap().command {
            Command::Bifdiag { ell, lambda_window } => {
                assert_eq!(ell, vec![-1.25, -0.125, 0.0]);
                assert_eq!(lambda_window, vec![-1.0, 0.5]);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn errors_are_aggregated() {
        let e = parse(&["fiber", "--mu", "0", "--ell", "0", "--h", "0", "--kappa", "0", "--grid", "1"]).unwrap_err();
        let CliError::Validation(m) = e else { panic!() };
        assert!(m.contains("--grid") && m.contains("κ > 0"), "{m}");
    }

    #[test]
    fn bifdiag_rejects_a_fixed_delta() {
        assert!(matches!(parse(&["bifdiag", "--ell", "0", "--delta", "-1"]), Err(CliError::Validation(_))));
    }

    #[test]
    fn loop_specs() {
        assert_eq!(parse_loop("gamma2"), Ok(LoopSpec::Named(Generator::Gamma2)));
        let tri = vec![(0.1, 0.2, 0.3), (0.1, 0.2, 0.4), (0.2, 0.2, 0.3)];
        assert_eq!(parse_loop("0.1,0.2,0.3; 0.1,0.2,0.4;0.2,0.2,0.3"), Ok(LoopSpec::Polygon(tri)));
        assert!(parse_loop("0.1,0.2,0.3").is_err());
        assert!(parse_loop("0.1,0.2,0.3;0.1,0.2,0.3;0.1,0.2,0.3").is_err());
        assert!(parse_loop("0.1,0.2").is_err());
        assert!(parse_loop("").is_err());
    }

    #[test]
    fn fiber_summary() {
        let c = parse(&["fiber", "--mu", "0", "--ell", "0", "--h", "0"]).unwrap();
        assert_eq!(execute(&c).unwrap(), "CuspPinchedT3 ×1\n");
    }
}
