//! `conefix`: solve, verify and fit from the command line.

mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use conefix_core::catalog;
use conefix_core::{fit_constants, solve, FitFamily, FitOutcome, StopConfig};

use config::{parse_x0, resolve_problem, FileConfig};
use report::{AxiomsJson, CertificateJson, SolveSummary, TraceFormat};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_VIOLATIONS: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

const SEED_ENV: &str = "CONEFIX_SEED";
const DEFAULT_SAMPLES: usize = 10_000;

const CONFIG_HELP: &str = "\
Config file (--config): flat TOML, one key per flag, dashes as underscores.
Keys: entry, inline, x0, tol, max_iters, apriori, seed, n, what, family,
      alpha, beta, gamma, s, r, dim, k, out, format.
Flags override the file. The seed falls back to $CONEFIX_SEED, then 0.

Inline definitions: <space>[,T=<map>][,S=<map>][,TS=<map>]
  spaces: interval[:k]  l1[:dim]  min-metric[:k]
  maps:   identity  zero  scale:<c>  tanthird  sinthird  cosform  (default identity)

Exit codes: 0 ok, 1 config or domain error, 2 not converged,
            3 verification violations, 4 fit infeasible.";

#[derive(Parser)]
#[command(name = "conefix", version, about = "Common fixed points in partial cone metric spaces", after_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the alternating iteration and write its trace.
    Solve(SolveArgs),
    /// Check the metric axioms or a contraction condition on samples.
    Verify(VerifyArgs),
    /// Fit contraction constants of minimal rate.
    Fit(FitArgs),
    /// List the built-in entries.
    List,
}

#[derive(Args)]
struct ProblemArgs {
    /// Flat TOML file with default values for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in entry id (see `conefix list`).
    #[arg(long)]
    entry: Option<String>,
    /// Inline space and maps, e.g. `interval:1,T=scale:0.5,S=sinthird`.
    #[arg(long)]
    inline: Option<String>,
    /// Dimension of the l1 entry.
    #[arg(long)]
    dim: Option<usize>,
    /// Second-coordinate weight of the interval entries.
    #[arg(long)]
    k: Option<f64>,
    /// Sampling seed [default: $CONEFIX_SEED or 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Contraction family: kannan, kannan-sym, reich, reich-sym, rational, implicit-linear, max.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Starting point: scalar, `[a,b,...]`, `max`, `zero` or `rand` [default: max].
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Residual tolerance [default: 1e-10].
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap [default: 100000].
    #[arg(long)]
    max_iters: Option<usize>,
    /// Also stop once the a-priori bound is below tol (needs a contraction).
    #[arg(long)]
    apriori: bool,
    /// Trace output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace format: json-lines or csv [default: json-lines].
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// What to check: axioms or contraction.
    #[arg(long)]
    what: Option<String>,
    /// Number of samples [default: 10000].
    #[arg(short = 'n')]
    n: Option<usize>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of sample pairs [default: 10000].
    #[arg(short = 'n')]
    n: Option<usize>,
}

impl ProblemArgs {
    fn into_config(self) -> Result<(FileConfig, FileConfig)> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let flags = FileConfig {
            entry: self.entry,
            inline: self.inline,
            dim: self.dim,
            k: self.k,
            seed: self.seed,
            family: self.family,
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            s: self.s,
            r: self.r,
            ..FileConfig::default()
        };
        Ok((flags, file))
    }
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => match v.trim().parse() {
            Ok(seed) => Ok(Some(seed)),
            Err(_) => bail!("{SEED_ENV} must be a nonnegative integer, got `{v}`"),
        },
        Err(_) => Ok(None),
    }
}

fn seed_of(cfg: &FileConfig) -> Result<u64> {
    Ok(match cfg.seed {
        Some(seed) => seed,
        None => env_seed()?.unwrap_or(0),
    })
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let (mut flags, file) = args.problem.into_config()?;
    flags.x0 = args.x0;
    flags.tol = args.tol;
    flags.max_iters = args.max_iters;
    flags.apriori = args.apriori.then_some(true);
    flags.out = args.out;
    flags.format = args.format;
    let cfg = flags.or(file);

    let format: TraceFormat = cfg.format.as_deref().unwrap_or("json-lines").parse()?;
    let problem = resolve_problem(&cfg)?;
    let seed = seed_of(&cfg)?;
    let x0 = parse_x0(cfg.x0.as_deref().unwrap_or("max"), &problem.space, seed)?;
    let defaults = StopConfig::default();
    let stop = StopConfig {
        tol: cfg.tol.unwrap_or(defaults.tol),
        max_iters: cfg.max_iters.unwrap_or(defaults.max_iters),
        use_apriori: cfg.apriori.unwrap_or(false),
    };
    if stop.use_apriori && problem.spec.is_none() {
        bail!("--apriori needs a contraction (entry spec or --family)");
    }

    let result = solve(&problem.space, &problem.maps, &x0, &stop, problem.spec.as_ref())?;
    if let Some(path) = &cfg.out {
        report::write_trace(path, format, &result.trace, result.x_star.dim())?;
    }
    let summary = SolveSummary::new(&problem, &result)?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(if result.converged() { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let (mut flags, file) = args.problem.into_config()?;
    flags.what = args.what;
    flags.n = args.n;
    let cfg = flags.or(file);

    let problem = resolve_problem(&cfg)?;
    let seed = seed_of(&cfg)?;
    let n = cfg.n.unwrap_or(DEFAULT_SAMPLES);
    let pass = match cfg.what.as_deref() {
        Some("axioms") => {
            let rep = problem.space.check_axioms(seed, n)?;
            println!("{}", serde_json::to_string(&AxiomsJson::new(&rep))?);
            rep.pass()
        }
        Some("contraction") => {
            let Some(spec) = problem.spec else {
                bail!("no contraction to verify: give --family for inline definitions");
            };
            let cert = spec.verify_sampled(&problem.space, &problem.maps, seed, n)?;
            println!("{}", serde_json::to_string(&CertificateJson::new(&cert)?)?);
            cert.pass()
        }
        Some(other) => bail!("unknown --what `{other}` (expected axioms or contraction)"),
        None => bail!("--what is required (axioms or contraction)"),
    };
    Ok(if pass { EXIT_OK } else { EXIT_VIOLATIONS })
}

fn cmd_fit(args: FitArgs) -> Result<u8> {
    let (mut flags, file) = args.problem.into_config()?;
    flags.n = args.n;
    let cfg = flags.or(file);

    let Some(family_name) = cfg.family.clone() else {
        bail!("--family is required for fit");
    };
    let family: FitFamily = family_name.parse()?;
    // The family names the search, not a spec to check.
    let problem = resolve_problem(&FileConfig {
        family: None,
        alpha: None,
        beta: None,
        gamma: None,
        s: None,
        r: None,
        ..cfg.clone()
    })?;
    let seed = seed_of(&cfg)?;
    let outcome = fit_constants(family, &problem.space, &problem.maps, seed, cfg.n.unwrap_or(DEFAULT_SAMPLES))?;
    println!("{}", serde_json::to_string(&outcome)?);
    Ok(match outcome {
        FitOutcome::Fitted { .. } => EXIT_OK,
        FitOutcome::Infeasible => EXIT_INFEASIBLE,
    })
}

fn cmd_list() -> Result<u8> {
    for e in catalog::catalog() {
        println!("{:<20} {}", e.id, e.description);
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Fit(a) => cmd_fit(a),
        Command::List => cmd_list(),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
