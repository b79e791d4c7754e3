//! Command-line driver: `savwave <converge|energy|run> ...`, writing CSV.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{self, convergence_study, l2_error, ritz_projection, NRule};
use crate::error::{Error, Result};
use crate::fem::FeSpace;
use crate::mesh::Mesh;
use crate::problems::Problem;
use crate::sav::{EnergyRecord, Scheme, StepperContext};
use crate::DEFAULT_TOL;

/// Exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 1;
/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "savwave", version, about = "Energy-conserving SAV finite element solver for nonlinear wave equations")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Convergence table against the exact solution.
    Converge(CliArgs),
    /// Discrete-energy trace of the unforced problem.
    Energy(CliArgs),
    /// Single trajectory with a final-state summary.
    Run(CliArgs),
}

#[derive(Debug, Args)]
struct CliArgs {
    /// Problem identifier (klein-gordon-2d, sine-gordon-3d).
    #[arg(long)]
    problem: String,
    /// Polynomial degree (1 or 2).
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// Subdivisions per axis, or a comma-separated list for `converge`.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,
    /// Number of time steps.
    #[arg(long, conflicts_with = "n_rule")]
    n: Option<usize>,
    /// Time steps as a function of M: eq-m or eq-m-3/2.
    #[arg(long)]
    n_rule: Option<String>,
    /// Final time.
    #[arg(long)]
    t: f64,
    /// sav, lcn, or both (energy only).
    #[arg(long, default_value = "sav")]
    scheme: String,
    /// Relative residual tolerance of the linear solves.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Output CSV path (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `run` only: write dof coordinates and final coefficients here.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Converge,
    Energy,
    Run,
}

impl Command {
    fn as_str(self) -> &'static str {
        match self {
            Self::Converge => "converge",
            Self::Energy => "energy",
            Self::Run => "run",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Steps {
    Fixed(usize),
    Rule(NRule),
}

impl Steps {
    pub fn for_m(self, m: usize) -> usize {
        match self {
            Self::Fixed(n) => n,
            Self::Rule(rule) => rule.steps(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    Sav,
    Lcn,
    Both,
}

impl SchemeChoice {
    fn as_str(self) -> &'static str {
        match self {
            Self::Sav => "sav",
            Self::Lcn => "lcn",
            Self::Both => "both",
        }
    }

    fn single(self) -> Option<Scheme> {
        match self {
            Self::Sav => Some(Scheme::Sav),
            Self::Lcn => Some(Scheme::Lcn),
            Self::Both => None,
        }
    }
}

/// Validated command-line configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub problem: String,
    pub degree: usize,
    pub m: Vec<usize>,
    pub steps: Steps,
    pub t_final: f64,
    pub scheme: SchemeChoice,
    pub tol: f64,
    pub output_path: Option<PathBuf>,
    pub dump_path: Option<PathBuf>,
}

/// Outcome of argument parsing that is not a config.
#[derive(Debug)]
pub enum ParseOutcome {
    /// `--help` / `--version` text; print and exit 0.
    Info(String),
    /// Usage error text; print and exit 2.
    Usage(String),
}

impl RunConfig {
    /// Parses `savwave <command> ...` (the first item is the program name).
    pub fn parse_from<I, T>(args: I) -> std::result::Result<Self, ParseOutcome>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args).map_err(|e| {
            let text = e.render().to_string();
            if e.use_stderr() {
                ParseOutcome::Usage(text)
            } else {
                ParseOutcome::Info(text)
            }
        })?;
        let (command, a) = match cli.command {
            CliCommand::Converge(a) => (Command::Converge, a),
            CliCommand::Energy(a) => (Command::Energy, a),
            CliCommand::Run(a) => (Command::Run, a),
        };
        Self::from_cli(command, a).map_err(|e| ParseOutcome::Usage(e.to_string()))
    }

    fn from_cli(command: Command, a: CliArgs) -> Result<Self> {
        Problem::by_name(&a.problem)?;
        if a.degree != 1 && a.degree != 2 {
            return Err(Error::Config(format!("--degree must be 1 or 2, got {}", a.degree)));
        }
        if a.m.contains(&0) {
            return Err(Error::Config("--m values must be positive".into()));
        }
        if command != Command::Converge && a.m.len() != 1 {
            return Err(Error::Config(format!("{} takes a single --m value", command.as_str())));
        }
        let steps = match (a.n, a.n_rule) {
            (Some(0), _) => return Err(Error::Config("--n must be at least 1".into())),
            (Some(n), _) => Steps::Fixed(n),
            (None, Some(rule)) => Steps::Rule(rule.parse()?),
            (None, None) => Steps::Rule(NRule::EqM),
        };
        if !(a.t > 0.0) || !a.t.is_finite() {
            return Err(Error::Config(format!("--t must be positive, got {}", a.t)));
        }
        if !(a.tol > 0.0) {
            return Err(Error::Config(format!("--tol must be positive, got {}", a.tol)));
        }
        let scheme = match a.scheme.as_str() {
            "sav" => SchemeChoice::Sav,
            "lcn" => SchemeChoice::Lcn,
            "both" if command == Command::Energy => SchemeChoice::Both,
            other => {
                return Err(Error::Config(format!(
                    "--scheme '{other}' is not valid for {}",
                    command.as_str()
                )))
            }
        };
        if a.dump.is_some() && command != Command::Run {
            return Err(Error::Config("--dump is only accepted by run".into()));
        }
        Ok(Self {
            command,
            problem: a.problem,
            degree: a.degree,
            m: a.m,
            steps,
            t_final: a.t,
            scheme,
            tol: a.tol,
            output_path: a.out,
            dump_path: a.dump,
        })
    }

    /// Arguments that reproduce this config (program name included).
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec![
            "savwave".to_string(),
            self.command.as_str().to_string(),
            "--problem".into(),
            self.problem.clone(),
            "--degree".into(),
            self.degree.to_string(),
            "--m".into(),
            self.m.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(","),
        ];
        match self.steps {
            Steps::Fixed(n) => args.extend(["--n".into(), n.to_string()]),
            Steps::Rule(r) => args.extend(["--n-rule".into(), r.as_str().to_string()]),
        }
        args.extend([
            "--t".into(),
            self.t_final.to_string(),
            "--scheme".into(),
            self.scheme.as_str().to_string(),
            "--tol".into(),
            self.tol.to_string(),
        ]);
        if let Some(p) = &self.output_path {
            args.extend(["--out".into(), p.display().to_string()]);
        }
        if let Some(p) = &self.dump_path {
            args.extend(["--dump".into(), p.display().to_string()]);
        }
        args
    }
}

/// Real-number CSV formatting: 12 significant digits, scientific notation.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.11e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// Runs the configured command and returns the CSV text of its primary
/// output. `run --dump` also writes the solution file.
pub fn execute(cfg: &RunConfig) -> Result<String> {
    let problem = Problem::by_name(&cfg.problem)?;
    match cfg.command {
        Command::Converge => cmd_converge(cfg, &problem),
        Command::Energy => cmd_energy(cfg, &problem),
        Command::Run => cmd_run(cfg, &problem),
    }
}

fn context(cfg: &RunConfig, problem: Problem, m: usize, n: usize) -> Result<StepperContext> {
    let mesh = Arc::new(Mesh::uniform(problem.dim, m)?);
    let space = Arc::new(FeSpace::new(mesh, cfg.degree, problem.bc)?);
    StepperContext::new(space, problem, cfg.t_final / n as f64, cfg.tol)
}

fn cmd_converge(cfg: &RunConfig, problem: &Problem) -> Result<String> {
    let rows = match cfg.steps {
        Steps::Rule(rule) => convergence_study(problem, cfg.degree, &cfg.m, rule, cfg.t_final, cfg.tol)?,
        Steps::Fixed(n) => {
            use rayon::prelude::*;
            if cfg.m.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config("m list must be strictly increasing".into()));
            }
            let mut rows = cfg
                .m
                .par_iter()
                .map(|&m| analysis::error_report(problem, cfg.degree, m, n, cfg.t_final, cfg.tol))
                .collect::<Result<Vec<_>>>()?;
            analysis::fill_orders(&mut rows)?;
            rows
        }
    };
    let mut out = String::from("m,n,h,tau,l2_error,l2_order,h1_superclose,h1_order\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.m,
            r.n_steps,
            fmt_real(r.h),
            fmt_real(r.tau),
            fmt_real(r.l2_error),
            fmt_opt(r.l2_order),
            fmt_real(r.h1_superclose),
            fmt_opt(r.h1_order)
        )
        .unwrap();
    }
    Ok(out)
}

/// Energy traces of the unforced problem for each requested scheme.
pub fn energy_traces(cfg: &RunConfig) -> Result<Vec<(Scheme, Vec<EnergyRecord>)>> {
    let problem = Problem::by_name(&cfg.problem)?.conservation_variant();
    let m = cfg.m[0];
    let n = cfg.steps.for_m(m);
    let ctx = context(cfg, problem, m, n)?;
    let schemes = match cfg.scheme.single() {
        Some(s) => vec![s],
        None => vec![Scheme::Sav, Scheme::Lcn],
    };
    schemes
        .into_iter()
        .map(|s| ctx.run(s, n, true).map(|(_, trace)| (s, trace)))
        .collect()
}

fn cmd_energy(cfg: &RunConfig, _problem: &Problem) -> Result<String> {
    let traces = energy_traces(cfg)?;
    let mut out = String::new();
    if traces.len() == 1 {
        out.push_str("step,time,energy\n");
        for r in &traces[0].1 {
            writeln!(out, "{},{},{}", r.step, fmt_real(r.time), fmt_real(r.energy)).unwrap();
        }
    } else {
        out.push_str("step,time,energy_sav,energy_lcn\n");
        for (a, b) in traces[0].1.iter().zip(&traces[1].1) {
            writeln!(out, "{},{},{},{}", a.step, fmt_real(a.time), fmt_real(a.energy), fmt_real(b.energy)).unwrap();
        }
    }
    Ok(out)
}

fn cmd_run(cfg: &RunConfig, problem: &Problem) -> Result<String> {
    let scheme = cfg
        .scheme
        .single()
        .ok_or_else(|| Error::Config("run needs a single scheme".into()))?;
    let m = cfg.m[0];
    let n = cfg.steps.for_m(m);
    let ctx = context(cfg, problem.clone(), m, n)?;
    let (state, _) = ctx.run(scheme, n, false)?;
    let energy = ctx.discrete_energy(&state)?;
    let (l2, sc) = match &problem.exact {
        Some(exact) => {
            let u_t = exact.at(state.time());
            let ritz = ritz_projection(ctx.space(), &u_t, cfg.tol)?;
            (
                Some(l2_error(ctx.space(), &state.u, &u_t)?),
                Some(analysis::h1_norm_diff_with(ctx.mass(), ctx.stiffness(), ritz.coeffs(), &state.u)?),
            )
        }
        None => (None, None),
    };
    if let Some(path) = &cfg.dump_path {
        std::fs::write(path, solution_dump(ctx.space(), &state.u))
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut out = String::from("problem,scheme,m,n,t_final,energy,l2_error,h1_superclose\n");
    writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        cfg.problem,
        cfg.scheme.as_str(),
        m,
        n,
        fmt_real(state.time()),
        fmt_real(energy),
        fmt_opt(l2),
        fmt_opt(sc)
    )
    .unwrap();
    Ok(out)
}

/// `x,y[,z],u` rows, one per dof.
pub fn solution_dump(space: &FeSpace, coeffs: &[f64]) -> String {
    let axes = ["x", "y", "z"];
    let mut out = axes[..space.dim()].join(",");
    out.push_str(",u\n");
    for (i, c) in coeffs.iter().enumerate() {
        for x in space.dof_coord(i) {
            out.push_str(&fmt_real(*x));
            out.push(',');
        }
        out.push_str(&fmt_real(*c));
        out.push('\n');
    }
    out
}

/// Maps a library error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidInput(_) | Error::InvalidDimension(_) | Error::UnsupportedDegree(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}
