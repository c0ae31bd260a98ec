//! Command-line front end. `run_command` does all the work and returns the
//! exit code together with the text for stdout and stderr, so the binary is a
//! thin wrapper and tests can drive commands directly.
//!
//! Exit codes: 0 success, 2 usage, 3 instance file unreadable or invalid,
//! 4 verification failed, 5 internal invariant violated.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::algorithms::{deferred_acceptance, enumerate_stable_set, AlgorithmError, ProposingSide};
use crate::engine::{default_max_periods, discounted_payoff, simulate, EngineError};
use crate::experiment::{run_experiment, ExperimentConfig};
use crate::generate::{generate_market, MAX_SIDE};
use crate::instance::{parse_instance, serialize_instance};
use crate::market::{CommitmentRegime, MarketInstance, Matching};
use crate::restabilization::{firm_threshold, restabilize, worker_threshold, RestabilizationError};
use crate::strategies::{
    profile_firm_commit_flexible, profile_firm_commit_restrictive, profile_idle,
    profile_no_commitment, profile_target_offers, profile_worker_commit_flexible,
    profile_worker_commit_restrictive, FlexibleMode, StationaryStrategyProfile, StrategyError,
};
use crate::verifier::{sig5, verify_equilibrium, StateScope, Verdict, VerifyError, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_VERIFICATION_FAILED: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutcome {
    fn ok(stdout: String) -> Self {
        CommandOutcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(code: i32, stderr: impl Into<String>) -> Self {
        let mut stderr = stderr.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        CommandOutcome { code, stdout: String::new(), stderr }
    }
}

#[derive(Parser, Debug)]
#[command(name = "dynmatch", about = "Stable matchings in repeated decentralized markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProfileName {
    NoCommit,
    FirmRestrictive,
    FirmFlexible,
    WorkerRestrictive,
    WorkerFlexible,
    TargetOffers,
    Idle,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Text,
    Kv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List every stable matching and mark the two side-optimal ones.
    StableSet { file: PathBuf },
    /// Play a profile from the empty matching and print the trace.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        regime: CommitmentRegime,
        #[arg(long, value_enum)]
        profile: ProfileName,
        #[arg(long, default_value = "firmOpt")]
        mu: String,
        #[arg(long)]
        max_periods: Option<usize>,
        #[arg(long, default_value = "rejected-set")]
        flexible_mode: FlexibleMode,
    },
    /// Print the discount thresholds of every worker and firm at a stable matching.
    Thresholds {
        file: PathBuf,
        #[arg(long)]
        mu: String,
    },
    /// Run the vacancy chain after a worker resigns.
    Restabilize {
        file: PathBuf,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        worker: String,
    },
    /// Check a profile for profitable unilateral deviations.
    Verify {
        file: PathBuf,
        #[arg(long)]
        regime: CommitmentRegime,
        #[arg(long, value_enum)]
        profile: ProfileName,
        #[arg(long)]
        mu: String,
        #[arg(long, default_value = "path")]
        scope: StateScope,
        #[arg(long, default_value = "rejected-set")]
        flexible_mode: FlexibleMode,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Run the theorem suite over seeded random markets.
    Experiment {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 4)]
        max_side: usize,
        #[arg(long, default_value = "path")]
        scope: StateScope,
        #[arg(long, default_value = "rejected-set")]
        flexible_mode: FlexibleMode,
    },
    /// Print a random market in the instance format.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        firms: usize,
        #[arg(long)]
        workers: usize,
    },
}

/// Resolves `firmOpt`, `workerOpt`, `empty` or a pair list `f1:w1,f2:w2`.
pub fn parse_matching(m: &MarketInstance, text: &str) -> Result<Matching, String> {
    match text {
        "firmOpt" => return Ok(deferred_acceptance(m, ProposingSide::Firms)),
        "workerOpt" => return Ok(deferred_acceptance(m, ProposingSide::Workers)),
        "empty" => return Ok(m.empty_matching()),
        _ => {}
    }
    let mut pairs = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (f, w) = item
            .split_once(':')
            .ok_or_else(|| format!("expected `firm:worker`, got `{item}`"))?;
        pairs.push((f.trim(), w.trim()));
    }
    m.matching_from_names(&pairs).map_err(|e| e.to_string())
}

fn build_profile(
    m: &MarketInstance,
    name: ProfileName,
    mu: &Matching,
    mode: FlexibleMode,
) -> Result<StationaryStrategyProfile, StrategyError> {
    match name {
        ProfileName::NoCommit => profile_no_commitment(m, mu),
        ProfileName::FirmRestrictive => profile_firm_commit_restrictive(m, mu),
        ProfileName::FirmFlexible => profile_firm_commit_flexible(m, mu, mode),
        ProfileName::WorkerRestrictive => profile_worker_commit_restrictive(m, mu),
        ProfileName::WorkerFlexible => profile_worker_commit_flexible(m, mu),
        ProfileName::TargetOffers => profile_target_offers(m, mu),
        ProfileName::Idle => Ok(profile_idle(m)),
    }
}

fn load(path: &PathBuf) -> Result<MarketInstance, CommandOutcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CommandOutcome::fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    parse_instance(&text)
        .map_err(|e| CommandOutcome::fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn engine_failure(e: EngineError) -> CommandOutcome {
    CommandOutcome::fail(EXIT_INTERNAL, format!("error: {e}"))
}

fn verify_failure(e: VerifyError) -> CommandOutcome {
    match e {
        VerifyError::Algorithm(AlgorithmError::InstanceTooLarge { .. }) => {
            CommandOutcome::fail(EXIT_USAGE, format!("error: {e}"))
        }
        other => CommandOutcome::fail(EXIT_INTERNAL, format!("error: {other}")),
    }
}

/// Runs one command line (`args[0]` is the program name).
pub fn run_command<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                CommandOutcome::ok(text)
            } else {
                CommandOutcome::fail(code, text)
            };
        }
    };
    match dispatch(cli.command) {
        Ok(out) | Err(out) => out,
    }
}

fn dispatch(command: Command) -> Result<CommandOutcome, CommandOutcome> {
    let usage = |msg: String| CommandOutcome::fail(EXIT_USAGE, format!("error: {msg}"));
    match command {
        Command::StableSet { file } => {
            let m = load(&file)?;
            let rep = enumerate_stable_set(&m).map_err(|e| match e {
                AlgorithmError::InstanceTooLarge { .. } => usage(e.to_string()),
                other => CommandOutcome::fail(EXIT_INTERNAL, format!("error: {other}")),
            })?;
            let mut out = String::new();
            writeln!(out, "matchings {}", rep.all_matchings_count).unwrap();
            writeln!(out, "stable {}", rep.stable.len()).unwrap();
            for (i, mu) in rep.stable.iter().enumerate() {
                let mut tags = Vec::new();
                if *mu == rep.firm_optimal {
                    tags.push("firm-optimal");
                }
                if *mu == rep.worker_optimal {
                    tags.push("worker-optimal");
                }
                write!(out, "{} {}", i + 1, m.display_matching(mu)).unwrap();
                if !tags.is_empty() {
                    write!(out, " [{}]", tags.join(", ")).unwrap();
                }
                out.push('\n');
            }
            Ok(CommandOutcome::ok(out))
        }
        Command::Simulate { file, regime, profile, mu, max_periods, flexible_mode } => {
            let m = load(&file)?;
            let mu = parse_matching(&m, &mu).map_err(usage)?;
            let p = build_profile(&m, profile, &mu, flexible_mode).map_err(|e| usage(e.to_string()))?;
            let max = max_periods.unwrap_or_else(|| default_max_periods(&m));
            let trace = simulate(&m, regime, &p, max).map_err(engine_failure)?;
            let mut out = String::new();
            writeln!(out, "regime {regime}").unwrap();
            writeln!(out, "profile {}", p.descriptor()).unwrap();
            writeln!(out, "mu {}", m.display_matching(&mu)).unwrap();
            out.push_str(&trace.render(&m));
            for a in m.agents() {
                let v = discounted_payoff(&m, &trace, a).value;
                writeln!(
                    out,
                    "payoff {} {} ({})",
                    m.agent_name(a),
                    v,
                    sig5(crate::engine::big_to_f64(&v))
                )
                .unwrap();
            }
            Ok(CommandOutcome::ok(out))
        }
        Command::Thresholds { file, mu } => {
            let m = load(&file)?;
            let mu = parse_matching(&m, &mu).map_err(usage)?;
            let not_stable = |e: RestabilizationError| usage(e.to_string());
            let mut out = String::new();
            writeln!(out, "mu {}", m.display_matching(&mu)).unwrap();
            for w in m.workers() {
                let c = worker_threshold(&m, &mu, w).map_err(not_stable)?;
                write!(out, "worker {} c {} ({})", m.worker_name(w), c, sig5(c.value())).unwrap();
                if let Ok(r) = restabilize(&m, &mu, w) {
                    write!(
                        out,
                        " k {} nu {}",
                        r.periods_waited,
                        m.display_matching(&r.final_matching)
                    )
                    .unwrap();
                }
                out.push('\n');
            }
            for f in m.firms() {
                let c = firm_threshold(&m, &mu, f).map_err(not_stable)?;
                writeln!(out, "firm {} c {} ({})", m.firm_name(f), c, sig5(c.value())).unwrap();
            }
            Ok(CommandOutcome::ok(out))
        }
        Command::Restabilize { file, mu, worker } => {
            let m = load(&file)?;
            let mu = parse_matching(&m, &mu).map_err(usage)?;
            let w = m
                .worker_id(&worker)
                .ok_or_else(|| usage(format!("unknown worker `{worker}`")))?;
            match restabilize(&m, &mu, w) {
                Ok(r) => {
                    let mut out = String::new();
                    writeln!(out, "worker {}", worker).unwrap();
                    writeln!(out, "initial {}", m.display_matching(&r.initial)).unwrap();
                    writeln!(out, "final {}", m.display_matching(&r.final_matching)).unwrap();
                    writeln!(out, "periods_waited {}", r.periods_waited).unwrap();
                    out.push_str(&r.render(&m));
                    Ok(CommandOutcome::ok(out))
                }
                Err(e @ RestabilizationError::NoImprovingOffer(_)) => {
                    Ok(CommandOutcome::ok(format!("worker {worker}\noutcome {e}\n")))
                }
                Err(e) => Err(usage(e.to_string())),
            }
        }
        Command::Verify { file, regime, profile, mu, scope, flexible_mode, format } => {
            let m = load(&file)?;
            let mu = parse_matching(&m, &mu).map_err(usage)?;
            let p = build_profile(&m, profile, &mu, flexible_mode).map_err(|e| usage(e.to_string()))?;
            let options = VerifyOptions { scope, ..VerifyOptions::default() };
            let report = verify_equilibrium(&m, regime, &p, options).map_err(verify_failure)?;
            let text = match format {
                ReportFormat::Text => report.render(&m),
                ReportFormat::Kv => report.render_kv(&m),
            };
            let code = match report.verdict {
                Verdict::Equilibrium => EXIT_OK,
                Verdict::NotEquilibrium => EXIT_VERIFICATION_FAILED,
            };
            Ok(CommandOutcome { code, stdout: text, stderr: String::new() })
        }
        Command::Experiment { seed, instances, max_side, scope, flexible_mode } => {
            if !(1..=MAX_SIDE).contains(&max_side) {
                return Err(usage(format!("--max-side must be between 1 and {MAX_SIDE}")));
            }
            let config = ExperimentConfig { seed, instances, max_side, scope, flexible_mode };
            let report = run_experiment(&config);
            let code = if report.all_passed() { EXIT_OK } else { EXIT_VERIFICATION_FAILED };
            Ok(CommandOutcome { code, stdout: report.render(), stderr: String::new() })
        }
        Command::Generate { seed, firms, workers } => {
            if !(1..=MAX_SIDE).contains(&firms) || !(1..=MAX_SIDE).contains(&workers) {
                return Err(usage(format!("sides must have between 1 and {MAX_SIDE} agents")));
            }
            Ok(CommandOutcome::ok(serialize_instance(&generate_market(seed, firms, workers))))
        }
    }
}
