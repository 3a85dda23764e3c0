//! The `switchdiff` command-line front end.
//!
//! Every command reads a JSON [`RunConfig`], applies flag overrides, writes
//! its outputs into `--out` together with a `manifest.json`, and exits with
//! 0 on success, 2 on a configuration error and 3 on a numerical failure.

mod config;

pub use config::{
    BvpConfig, DensityConfig, InvariantConfig, RecurrenceConfig, RunConfig, SpectralConfig, StartConfig,
};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functionals::{
    all_ones, classify_recurrence, richardson_ratio, solve_exit_time, solve_hitting, tendency_analysis,
};
use crate::model::{classify_boundaries, SwitchingDiffusionModel, WrightFisherParams};
use crate::montecarlo::simulate_indexed;
use crate::spectral::{InvariantDistribution, SpectralBasis};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "switchdiff", version, about = "Switching diffusions: spectral densities, functionals, simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration (a previous manifest.json also works).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub truncation: Option<usize>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    #[arg(long, global = true)]
    pub step: Option<f64>,
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample paths to paths.csv.
    Simulate {
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        phase: Option<usize>,
    },
    /// Transition density table (density.csv) or interval probabilities (prob.json).
    Density {
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        x: Option<f64>,
        /// `lo,hi`
        #[arg(long, value_parser = parse_interval)]
        interval: Option<(f64, f64)>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Hitting probabilities of `d` before `c` (bvp.csv).
    Hitprob(BvpArgs),
    /// Expected exit times from `(c, d)` (bvp.csv).
    Exittime(BvpArgs),
    /// Invariant density components (invariant.csv).
    Invariant {
        #[arg(long)]
        points: Option<usize>,
    },
    /// Phase thresholds and regime as JSON on stdout.
    Thresholds,
    /// Recurrence trend over a margin schedule (recurrence.json).
    Recurrence {
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args)]
pub struct BvpArgs {
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub d: Option<f64>,
    /// Also solve on refined grids and report the Richardson ratio.
    #[arg(long)]
    pub refine: bool,
}

fn parse_interval(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((parse(lo)?, parse(hi)?))
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Density { .. } => "density",
            Command::Hitprob(_) => "hitprob",
            Command::Exittime(_) => "exittime",
            Command::Invariant { .. } => "invariant",
            Command::Thresholds => "thresholds",
            Command::Recurrence { .. } => "recurrence",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: RunConfig,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
    pub duration_secs: f64,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub diagnostics: serde_json::Value,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. }
        | Error::DimensionMismatch { .. }
        | Error::OutOfDomain { .. }
        | Error::Empty(_)
        | Error::MissingWeight
        | Error::NotWrightFisher
        | Error::Json(_) => EXIT_CONFIG,
        Error::Nullspace { .. } | Error::Orthonormality { .. } | Error::Singular { .. } | Error::Numeric(_) => {
            EXIT_NUMERIC
        }
        Error::Io(_) => EXIT_IO,
    }
}

/// Loads the config and applies the command's flags.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .common
        .config
        .as_ref()
        .ok_or_else(|| invalid("config", "pass --config <file>"))?;
    let mut cfg = RunConfig::load(path)?;
    let c = &cli.common;
    if let Some(s) = c.seed {
        cfg.simulation.seed = s;
    }
    if let Some(m) = c.truncation {
        cfg.spectral.truncation = m;
    }
    if let Some(n) = c.grid {
        cfg.bvp.grid = n;
    }
    if let Some(n) = c.paths {
        cfg.simulation.n_paths = n;
    }
    if let Some(h) = c.step {
        cfg.simulation.step = h;
    }
    if let Some(t) = c.horizon {
        cfg.simulation.horizon = t;
    }
    match &cli.command {
        Command::Simulate { x0, phase } => {
            cfg.start.x = x0.unwrap_or(cfg.start.x);
            cfg.start.phase = phase.unwrap_or(cfg.start.phase);
        }
        Command::Density { t, x, interval, points } => {
            let d = &mut cfg.density;
            d.t = t.unwrap_or(d.t);
            d.x = x.unwrap_or(d.x);
            d.points = points.unwrap_or(d.points);
            if interval.is_some() {
                d.interval = *interval;
            }
        }
        Command::Hitprob(a) | Command::Exittime(a) => {
            cfg.bvp.c = a.c.or(cfg.bvp.c);
            cfg.bvp.d = a.d.or(cfg.bvp.d);
            cfg.bvp.refine |= a.refine;
        }
        Command::Invariant { points } => cfg.invariant.points = points.unwrap_or(cfg.invariant.points),
        Command::Recurrence { epsilons } => {
            if let Some(e) = epsilons {
                cfg.recurrence.epsilons = e.clone();
            }
        }
        Command::Thresholds => {}
    }
    Ok(cfg)
}

/// Runs one command and writes its manifest.
pub fn execute(command: &str, cfg: &RunConfig, out: &Path) -> Result<RunManifest> {
    let started = Instant::now();
    std::fs::create_dir_all(out)?;
    let model = cfg.model.build()?;
    let mut ctx = Outputs {
        dir: out.to_path_buf(),
        files: Vec::new(),
    };
    let diagnostics = match command {
        "simulate" => simulate(&model, cfg, &mut ctx)?,
        "density" => density(&wf(&cfg.model)?, cfg, &mut ctx)?,
        "hitprob" | "exittime" => bvp(&model, cfg, command == "hitprob", &mut ctx)?,
        "invariant" => invariant(&wf(&cfg.model)?, cfg, &mut ctx)?,
        "thresholds" => {
            let report = serde_json::to_string_pretty(&tendency_analysis(&wf(&cfg.model)?))?;
            println!("{report}");
            ctx.write("thresholds.json", |w| Ok(writeln!(w, "{report}")?))?;
            serde_json::Value::Null
        }
        "recurrence" => {
            let report = classify_recurrence(&model, &cfg.recurrence.epsilons)?;
            ctx.write("recurrence.json", |w| Ok(writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?))?;
            serde_json::json!({ "verdict": report.verdict })
        }
        other => return Err(invalid("command", format!("unknown command `{other}`"))),
    };
    let manifest = RunManifest {
        command: command.to_string(),
        config: cfg.clone(),
        seed: cfg.simulation.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: ctx.files.clone(),
        duration_secs: started.elapsed().as_secs_f64(),
        diagnostics,
    };
    ctx.write("manifest.json", |w| Ok(writeln!(w, "{}", serde_json::to_string_pretty(&manifest)?)?))?;
    Ok(manifest)
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    if let Ok(v) = std::env::var("SWITCHDIFF_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                // fails only if a pool already exists
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: SWITCHDIFF_THREADS must be a positive integer, got `{v}`");
                return EXIT_CONFIG;
            }
        }
    }
    let result = resolve(&cli).and_then(|cfg| execute(cli.command.name(), &cfg, &cli.common.out));
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
        if name != "manifest.json" {
            self.files.push(name.to_string());
        }
        Ok(())
    }
}

fn wf(d: &crate::model::ModelDescriptor) -> Result<WrightFisherParams> {
    d.wright_fisher_params().ok_or(Error::NotWrightFisher)?
}

fn simulate(m: &SwitchingDiffusionModel, cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let sim = &cfg.simulation;
    if let Some(w) = sim.step_warning(m)? {
        eprintln!("warning: {w}");
    }
    let mut absorbed = 0;
    out.write("paths.csv", |w| {
        writeln!(w, "path,time,position,phase")?;
        for p in 0..sim.n_paths {
            let s = simulate_indexed(m, cfg.start.x, cfg.start.phase, sim, p as u64)?;
            absorbed += usize::from(s.absorbed_at.is_some());
            for ((t, x), i) in s.times.iter().zip(&s.positions).zip(&s.phases) {
                writeln!(w, "{p},{t:.16e},{x:.16e},{i}")?;
            }
        }
        Ok(())
    })?;
    Ok(serde_json::json!({ "absorbed_paths": absorbed }))
}

/// Contents of `prob.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbReport {
    pub t: f64,
    pub x: f64,
    pub interval: (f64, f64),
    pub truncation: usize,
    pub matrix: crate::PhaseMatrix,
    pub row_sums: Vec<f64>,
    pub tail_bound: f64,
    pub orthonormality_defect: f64,
    /// `(n, j)` slots sharing one eigenvalue.
    pub degenerate_groups: Vec<Vec<(usize, usize)>>,
}

fn density(p: &WrightFisherParams, cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let d = &cfg.density;
    let basis = SpectralBasis::wright_fisher(p, cfg.spectral.truncation)?;
    let n = p.n_phases;
    let defect = basis.orthonormality_defect()?;
    let tail = basis.tail_bound(d.t);
    match d.interval {
        Some(iv) => {
            let m = basis.transition_probability(d.t, d.x, iv)?;
            let body = ProbReport {
                t: d.t,
                x: d.x,
                interval: iv,
                truncation: basis.truncation(),
                row_sums: m.row_sums(),
                matrix: m,
                tail_bound: tail,
                orthonormality_defect: defect,
                degenerate_groups: basis.degenerate_groups().to_vec(),
            };
            out.write("prob.json", |w| Ok(writeln!(w, "{}", serde_json::to_string_pretty(&body)?)?))?;
        }
        None => {
            if d.points == 0 {
                return Err(invalid("density.points", "must be positive"));
            }
            out.write("density.csv", |w| {
                let mut header = vec!["y".to_string()];
                for i in 1..=n {
                    for j in 1..=n {
                        header.push(format!("p{i}_{j}"));
                    }
                }
                writeln!(w, "{}", header.join(","))?;
                for s in 1..=d.points {
                    let y = s as f64 / (d.points + 1) as f64;
                    let k = basis.transition_density(d.t, d.x, y)?;
                    let mut row = vec![format!("{y:.16e}")];
                    row.extend((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|ij| format!("{:.16e}", k[ij])));
                    writeln!(w, "{}", row.join(","))?;
                }
                Ok(())
            })?;
        }
    }
    Ok(serde_json::json!({ "tail_bound": tail, "orthonormality_defect": defect }))
}

fn bvp(m: &SwitchingDiffusionModel, cfg: &RunConfig, hitting: bool, out: &mut Outputs) -> Result<serde_json::Value> {
    let (c, d) = cfg.bvp.interval()?;
    let n = m.n_phases();
    let solve = |g: usize| {
        if hitting {
            solve_hitting(m, c, d, g)
        } else {
            solve_exit_time(m, c, d, &all_ones(n), g)
        }
    };
    let sol = solve(cfg.bvp.grid)?;
    out.write("bvp.csv", |w| sol.write_csv(w))?;
    let mut diag = serde_json::json!({ "min_entry": sol.min_entry(), "max_entry": sol.max_entry() });
    if cfg.bvp.refine {
        let ratio = richardson_ratio(solve, cfg.bvp.grid)?;
        println!("richardson_ratio {ratio:.16e}");
        diag["richardson_ratio"] = ratio.into();
    }
    Ok(diag)
}

fn invariant(p: &WrightFisherParams, cfg: &RunConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let points = cfg.invariant.points;
    if points < 2 {
        return Err(invalid("invariant.points", "need at least 2 points"));
    }
    let inv = InvariantDistribution::new(p)?;
    let boundaries = classify_boundaries(p);
    if inv.boundary_atoms() {
        eprintln!(
            "warning: alpha or beta is negative; the table covers the density part only and any boundary atoms are not represented"
        );
    }
    out.write("invariant.csv", |w| {
        let header: Vec<String> = std::iter::once("y".to_string())
            .chain((1..=p.n_phases).map(|j| format!("psi{j}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for s in 0..points {
            // clustered at the endpoints, where y^alpha (1-y)^beta may be non-smooth
            let y = if s + 1 == points {
                1.0
            } else {
                (std::f64::consts::FRAC_PI_2 * s as f64 / (points - 1) as f64).sin().powi(2)
            };
            let row: Vec<String> = std::iter::once(y)
                .chain(inv.closed_form(y)?)
                .map(|v| format!("{v:.16e}"))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    })?;
    Ok(serde_json::json!({ "summary": inv.summary(), "boundaries": boundaries }))
}
