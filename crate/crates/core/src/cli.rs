//! Command-line front end. `main.rs` only forwards to [`run`].
//!
//! Exit codes: 0 success, 1 usage, 2 parse, 3 model validity, 4 solver
//! non-convergence.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::detection::{estimate_delay, estimate_false_alarm, llr_full, llr_limited, DelayReport, LlrMode};
use crate::error::Error;
use crate::ext::format_sig12;
use crate::linear::{
    simulate_linear_ensemble, tradeoff_full_linear, tradeoff_limited_linear, LinearSystem, LinearTradeoffSolution,
};
use crate::mdp::{simulate, MdpScenario};
use crate::metrics::{privacy_level, PrivacyReport};
use crate::synthesis::{
    best_privacy_full, best_privacy_limited, tradeoff_full, tradeoff_limited, SynthesisConfig, SynthesisResult,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_MODEL: u8 = 3;
pub const EXIT_NOT_CONVERGED: u8 = 4;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "PRIVCHANGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "privchange", version, about = "Privacy of abrupt changes in MDPs and linear systems")]
pub struct Cli {
    /// Base seed for every randomized routine.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    Privacy,
    Tradeoff,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Information rates and privacy levels of a scenario's policies.
    Metrics { scenario: PathBuf },
    /// Synthesize policies for best privacy or a privacy-utility trade-off.
    Synthesize {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        mode: LlrMode,
        #[arg(long, value_enum, default_value = "privacy")]
        objective: Objective,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        rho: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        lambda: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Best privacy against `P_θ = θP₀ + (1−θ)P₁` over a grid of θ.
    SweepTheta {
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,0.9,1")]
        grid: Vec<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Closed-form linear trade-off solutions for one cell or a (ρ, λ) grid.
    Linear {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "limited")]
        mode: LlrMode,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        rho: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        lambda: f64,
        /// Comma-separated ρ grid; overrides --rho.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        sweep_rho: Option<Vec<f64>>,
        /// Comma-separated λ grid; overrides --lambda.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        sweep_lambda: Option<Vec<f64>>,
    },
    /// Monte Carlo CUSUM detection delay and false-alarm time.
    Detect {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        mode: LlrMode,
        #[arg(long, default_value_t = 8.0, allow_negative_numbers = true)]
        threshold: f64,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        /// Trajectory length; defaults to ν + 2000.
        #[arg(long)]
        horizon: Option<usize>,
        /// Also write raw `seed,stopping_time,nu` rows here.
        #[arg(long)]
        raw: Option<PathBuf>,
    },
    /// Simulate a scenario: one MDP trajectory with its LLRs, or per-step
    /// `‖x_t‖²` statistics of a linear system.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        /// Linear scenarios only: number of runs.
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        /// Linear scenarios only: use the optimal offsets for this mode (zeros when absent).
        #[arg(long, value_enum)]
        mode: Option<LlrMode>,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// SynthesisConfig JSON; individual flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub ccp_max_iters: Option<usize>,
    #[arg(long)]
    pub ccp_tol: Option<f64>,
    #[arg(long)]
    pub inner_max_iters: Option<usize>,
    #[arg(long)]
    pub inner_tol: Option<f64>,
    #[arg(long)]
    pub epsilon_floor: Option<f64>,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> Result<SynthesisConfig, Failure> {
        let mut cfg = match &self.config {
            Some(p) => SynthesisConfig::from_json(&read(p)?).map_err(Failure::from)?,
            None => SynthesisConfig::default(),
        };
        cfg.seed = seed;
        if let Some(v) = self.restarts {
            cfg.restarts = v;
        }
        if let Some(v) = self.ccp_max_iters {
            cfg.ccp_max_iters = v;
        }
        if let Some(v) = self.ccp_tol {
            cfg.ccp_tol = v;
        }
        if let Some(v) = self.inner_max_iters {
            cfg.inner_max_iters = v;
        }
        if let Some(v) = self.inner_tol {
            cfg.inner_tol = v;
        }
        if let Some(v) = self.epsilon_floor {
            cfg.epsilon_floor = v;
        }
        cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
        Ok(cfg)
    }
}

/// Error with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) | Error::Io(_) => EXIT_PARSE,
            Error::InvalidArgument(_) | Error::LambdaNonpositive(_) => EXIT_USAGE,
            Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_MODEL,
        };
        Self { code, message: e.to_string() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure { code: EXIT_PARSE, message: format!("{}: {e}", path.display()) })
}

fn load_mdp(path: &Path) -> Result<MdpScenario, Failure> {
    MdpScenario::from_json(&read(path)?).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("{}: {e}", path.display()),
    })
}

fn load_linear(path: &Path) -> Result<LinearSystem, Failure> {
    LinearSystem::from_json(&read(path)?).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn is_linear_scenario(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.as_object().map(|o| o.contains_key("A")))
        .unwrap_or(false)
}

fn csv_field(v: f64) -> String {
    format_sig12(v)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure { code: EXIT_PARSE, message: format!("{}: {e}", p.display()) }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure { code: EXIT_PARSE, message: e.to_string() })
        }
    }
}

/// Parse arguments, run, and return the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, e.g. on repeated in-process calls.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Run a parsed command.
pub fn execute(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Metrics { scenario } => cmd_metrics(cli, scenario),
        Command::Synthesize { scenario, mode, objective, rho, lambda, solver } => {
            cmd_synthesize(cli, scenario, *mode, *objective, *rho, *lambda, solver)
        }
        Command::SweepTheta { scenario, grid, solver } => cmd_sweep_theta(cli, scenario, grid, solver),
        Command::Linear { scenario, mode, rho, lambda, sweep_rho, sweep_lambda } => {
            let rhos = sweep_rho.clone().unwrap_or_else(|| vec![*rho]);
            let lambdas = sweep_lambda.clone().unwrap_or_else(|| vec![*lambda]);
            cmd_linear(cli, scenario, *mode, &rhos, &lambdas)
        }
        Command::Detect { scenario, mode, threshold, runs, horizon, raw } => {
            cmd_detect(cli, scenario, *mode, *threshold, *runs, *horizon, raw.as_deref())
        }
        Command::Simulate { scenario, horizon, runs, mode, rho, lambda } => {
            cmd_simulate(cli, scenario, *horizon, *runs, *mode, *rho, *lambda)
        }
    }
}

fn cmd_metrics(cli: &Cli, path: &Path) -> Result<u8, Failure> {
    let sc = load_mdp(path)?.change_scenario()?;
    let report = PrivacyReport::compute(&sc.m0, &sc.m1, &sc.pi0, &sc.pi1)?;
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => format!(
            "i_f,i_l,i_l_lower,privacy_f,privacy_l\n{},{},{},{},{}\n",
            csv_field(report.i_f),
            csv_field(report.i_l),
            csv_field(report.i_l_lower),
            csv_field(report.privacy_full),
            csv_field(report.privacy_limited)
        ),
    };
    emit(&cli.output, &text)?;
    Ok(EXIT_OK)
}

fn check_rho_lambda(rho: f64, lambda: f64) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Failure::usage(format!("--rho must lie in [0,1], got {rho}")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Failure::usage(format!("--lambda must be finite and >= 0, got {lambda}")));
    }
    Ok(())
}

fn synthesis_csv(r: &SynthesisResult) -> String {
    format!(
        "objective,rate,privacy_level,value,feasibility_residual,iterations,converged,restart_index\n{},{},{},{},{},{},{},{}\n",
        csv_field(r.objective),
        csv_field(r.rate),
        csv_field(privacy_level(r.rate)),
        csv_field(r.value),
        csv_field(r.feasibility_residual),
        r.iterations,
        r.converged,
        r.restart_index
    )
}

fn cmd_synthesize(
    cli: &Cli,
    path: &Path,
    mode: LlrMode,
    objective: Objective,
    rho: f64,
    lambda: f64,
    solver: &SolverArgs,
) -> Result<u8, Failure> {
    check_rho_lambda(rho, lambda)?;
    let cfg = solver.config(cli.seed)?;
    let sc = load_mdp(path)?;
    let (m0, m1) = (&sc.m0, &sc.m1);
    let result = match (mode, objective) {
        (LlrMode::Full, Objective::Privacy) => best_privacy_full(m0, m1)?,
        (LlrMode::Limited, Objective::Privacy) => best_privacy_limited(m0, m1, &cfg)?,
        (LlrMode::Full, Objective::Tradeoff) => tradeoff_full(m0, m1, rho, lambda, &cfg)?,
        (LlrMode::Limited, Objective::Tradeoff) => tradeoff_limited(m0, m1, rho, lambda, &cfg)?,
    };
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&result),
        Format::Csv => synthesis_csv(&result),
    };
    emit(&cli.output, &text)?;
    let summary = format!(
        "objective {} rate {} privacy {} value {} converged {}",
        format_sig12(result.objective),
        format_sig12(result.rate),
        format_sig12(privacy_level(result.rate)),
        format_sig12(result.value),
        result.converged
    );
    if cli.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(if result.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

#[derive(Debug, Clone, Serialize)]
struct ThetaRow {
    theta: f64,
    #[serde(with = "crate::ext::serde_f64")]
    i_f_best: f64,
    #[serde(with = "crate::ext::serde_f64")]
    i_l_best: f64,
    #[serde(with = "crate::ext::serde_f64")]
    privacy_f: f64,
    #[serde(with = "crate::ext::serde_f64")]
    privacy_l: f64,
    converged: bool,
}

fn cmd_sweep_theta(cli: &Cli, path: &Path, grid: &[f64], solver: &SolverArgs) -> Result<u8, Failure> {
    if grid.is_empty() || grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Failure::usage("--grid must be a nonempty list of values in [0,1]"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Failure::usage("--grid must be sorted"));
    }
    let cfg = solver.config(cli.seed)?;
    let sc = load_mdp(path)?;
    let rows: Vec<ThetaRow> = grid
        .par_iter()
        .map(|&theta| {
            let m_theta = sc.m0.mixture(&sc.m1, theta)?;
            let full = best_privacy_full(&sc.m0, &m_theta)?;
            let lim = best_privacy_limited(&sc.m0, &m_theta, &cfg)?;
            Ok(ThetaRow {
                theta,
                i_f_best: full.rate,
                i_l_best: lim.rate,
                privacy_f: privacy_level(full.rate),
                privacy_l: privacy_level(lim.rate),
                converged: lim.converged,
            })
        })
        .collect::<Result<_, Error>>()?;
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = String::from("theta,i_f_best,i_l_best,privacy_f,privacy_l\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    csv_field(r.theta),
                    csv_field(r.i_f_best),
                    csv_field(r.i_l_best),
                    csv_field(r.privacy_f),
                    csv_field(r.privacy_l)
                ));
            }
            s
        }
    };
    emit(&cli.output, &text)?;
    Ok(if rows.iter().all(|r| r.converged) { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

#[derive(Debug, Clone, Serialize)]
struct LinearRow {
    rho: f64,
    lambda: f64,
    valid: bool,
    alpha0: Vec<f64>,
    alpha1: Vec<f64>,
    #[serde(with = "crate::ext::serde_f64")]
    value: f64,
    #[serde(with = "crate::ext::serde_f64")]
    rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn cmd_linear(cli: &Cli, path: &Path, mode: LlrMode, rhos: &[f64], lambdas: &[f64]) -> Result<u8, Failure> {
    if rhos.is_empty() || lambdas.is_empty() {
        return Err(Failure::usage("grids must be nonempty"));
    }
    if let Some(r) = rhos.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Failure::usage(format!("rho {r} outside [0,1]")));
    }
    let sys = load_linear(path)?;
    let m = sys.m();
    let mut rows = Vec::new();
    for &rho in rhos {
        for &lambda in lambdas {
            let sol: Result<LinearTradeoffSolution, Error> = match mode {
                LlrMode::Full => tradeoff_full_linear(&sys, rho, lambda),
                LlrMode::Limited => tradeoff_limited_linear(&sys, rho, lambda),
            };
            rows.push(match sol {
                Ok(s) => LinearRow {
                    rho,
                    lambda,
                    valid: true,
                    alpha0: s.alpha0.iter().copied().collect(),
                    alpha1: s.alpha1.iter().copied().collect(),
                    value: s.value,
                    rate: s.rate,
                    error: None,
                },
                Err(e @ Error::LambdaNonpositive(_)) => LinearRow {
                    rho,
                    lambda,
                    valid: false,
                    alpha0: vec![f64::NAN; m],
                    alpha1: vec![f64::NAN; m],
                    value: f64::NAN,
                    rate: f64::NAN,
                    error: Some(e.to_string()),
                },
                Err(e) => return Err(e.into()),
            });
        }
    }
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = String::from("rho,lambda");
            for i in 1..=m {
                s.push_str(&format!(",alpha0_{i}"));
            }
            for i in 1..=m {
                s.push_str(&format!(",alpha1_{i}"));
            }
            s.push_str(",V,I\n");
            for r in &rows {
                s.push_str(&format!("{},{}", csv_field(r.rho), csv_field(r.lambda)));
                let rest: Vec<f64> = r.alpha0.iter().chain(&r.alpha1).copied().chain([r.value, r.rate]).collect();
                for v in rest {
                    s.push(',');
                    if r.valid {
                        s.push_str(&csv_field(v));
                    } else {
                        s.push_str("invalid");
                    }
                }
                s.push('\n');
            }
            s
        }
    };
    emit(&cli.output, &text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct DetectOutput<'a> {
    delay: &'a DelayReport,
    false_alarm: &'a DelayReport,
}

fn report_csv_row(kind: &str, r: &DelayReport) -> String {
    format!(
        "{kind},{},{},{},{},{},{},{}\n",
        match r.mode {
            LlrMode::Full => "full",
            LlrMode::Limited => "limited",
        },
        csv_field(r.threshold),
        r.runs,
        r.censored,
        r.horizon,
        csv_field(r.mean_delay),
        csv_field(r.ci_halfwidth)
    )
}

fn cmd_detect(
    cli: &Cli,
    path: &Path,
    mode: LlrMode,
    threshold: f64,
    runs: usize,
    horizon: Option<usize>,
    raw: Option<&Path>,
) -> Result<u8, Failure> {
    if !(threshold > 0.0) {
        return Err(Failure::usage(format!("--threshold must be positive, got {threshold}")));
    }
    if runs == 0 {
        return Err(Failure::usage("--runs must be >= 1"));
    }
    let sc = load_mdp(path)?.change_scenario()?;
    let horizon = horizon.unwrap_or(sc.nu + 2000);
    let delay = estimate_delay(&sc, mode, threshold, runs, horizon, cli.seed)?;
    let fa = estimate_false_alarm(&sc, mode, threshold, runs, horizon, cli.seed)?;
    if let Some(p) = raw {
        let mut text = delay.raw_csv();
        text.push_str(fa.raw_csv().lines().skip(1).map(|l| format!("{l}\n")).collect::<String>().as_str());
        std::fs::write(p, text).map_err(|e| Failure { code: EXIT_PARSE, message: format!("{}: {e}", p.display()) })?;
    }
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&DetectOutput { delay: &delay, false_alarm: &fa }),
        Format::Csv => {
            let mut s = String::from("kind,mode,threshold,runs,censored,horizon,mean,ci_halfwidth\n");
            s.push_str(&report_csv_row("delay", &delay));
            s.push_str(&report_csv_row("false_alarm", &fa));
            s
        }
    };
    emit(&cli.output, &text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct TrajectoryOutput {
    states: Vec<usize>,
    actions: Vec<usize>,
    nu: usize,
    seed: u64,
    #[serde(with = "crate::ext::serde_vec_f64")]
    llr_full: Vec<f64>,
    #[serde(with = "crate::ext::serde_vec_f64")]
    llr_limited: Vec<f64>,
}

fn cmd_simulate(
    cli: &Cli,
    path: &Path,
    horizon: usize,
    runs: usize,
    mode: Option<LlrMode>,
    rho: f64,
    lambda: f64,
) -> Result<u8, Failure> {
    if horizon == 0 {
        return Err(Failure::usage("--horizon must be >= 1"));
    }
    let text = read(path)?;
    if is_linear_scenario(&text) {
        let sys = load_linear(path)?;
        let (a0, a1) = match mode {
            None => (DVector::zeros(sys.m()), DVector::zeros(sys.m())),
            Some(mode) => {
                check_rho_lambda(rho, lambda)?;
                let s = match mode {
                    LlrMode::Full => tradeoff_full_linear(&sys, rho, lambda)?,
                    LlrMode::Limited => tradeoff_limited_linear(&sys, rho, lambda)?,
                };
                (s.alpha0, s.alpha1)
            }
        };
        let stochastic = mode == Some(LlrMode::Full);
        let stats = simulate_linear_ensemble(&sys, &a0, &a1, horizon, runs, cli.seed, stochastic)?;
        let out = match cli.format.unwrap_or(Format::Csv) {
            Format::Json => to_json(&stats),
            Format::Csv => {
                let mut s = String::from("step,mean_xsq,ci_low,ci_high\n");
                for r in &stats {
                    s.push_str(&format!(
                        "{},{},{},{}\n",
                        r.step,
                        csv_field(r.mean_xsq),
                        csv_field(r.ci_low),
                        csv_field(r.ci_high)
                    ));
                }
                s
            }
        };
        emit(&cli.output, &out)?;
        return Ok(EXIT_OK);
    }
    let sc = load_mdp(path)?.change_scenario()?;
    let traj = simulate(&sc, horizon, cli.seed)?;
    let zf = llr_full(&sc, &traj)?.z;
    let zl = llr_limited(&sc, &traj)?.z;
    let out = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&TrajectoryOutput {
            states: traj.states.clone(),
            actions: traj.actions.clone(),
            nu: traj.nu,
            seed: traj.seed,
            llr_full: zf,
            llr_limited: zl,
        }),
        Format::Csv => {
            let mut s = String::from("t,state,action,post_change,llr_full,llr_limited\n");
            for t in 0..traj.len() {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    t + 1,
                    traj.states[t],
                    traj.actions[t],
                    u8::from(t + 1 >= traj.nu),
                    csv_field(zf[t]),
                    csv_field(zl[t])
                ));
            }
            s
        }
    };
    emit(&cli.output, &out)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_lambda_is_usage_error() {
        let code = run(["privchange", "synthesize", "nofile.json", "--objective", "tradeoff", "--lambda", "-1"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn missing_file_is_parse_error() {
        assert_eq!(run(["privchange", "metrics", "/nonexistent/scenario.json"]), EXIT_PARSE);
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(["privchange", "frobnicate"]), EXIT_USAGE);
    }
}
