//! Command-line surface for `gapdyn`: scenario files, CSV and SVG output,
//! and the subcommands behind the `gapdyn` binary.
//!
//! Results go to stdout as `key=value` lines (or CSV for `sweep`). Every
//! failure is one line on stderr, `error=<Name> detail=<text>`, and the exit
//! status says what kind: 1 usage, 2 bad input data, 3 numerical failure.

pub mod config;
pub mod csv_io;
pub mod svg;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use gapdyn::{
    budget_residual, classify, estimate_ar2, estimate_mle, euler_residual, production, profit,
    recovery_metrics, steady_state_rate, DsgeBlockParams, DsgePoint, EstimationError,
    OscillatorParams, Regime, ShockSpec, Trajectory, DEFAULT_BAND, DEFAULT_CRITICAL_TOL,
};

pub use config::{parse_config, run_scenario, ConfigError, Integrator, ScenarioConfig};

/// Environment variable overriding config seeds (a `--seed` flag wins over it).
pub const SEED_ENV: &str = "GAPDYN_SEED";

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub name: String,
    pub detail: String,
    pub code: i32,
}

impl CliError {
    fn new(name: &str, detail: impl std::fmt::Display, code: i32) -> Self {
        CliError {
            name: name.to_string(),
            detail: detail.to_string().replace('\n', " "),
            code,
        }
    }

    fn usage(detail: impl std::fmt::Display) -> Self {
        Self::new("Usage", detail, EXIT_USAGE)
    }

    /// Numerical failures exit 3; everything else is a problem with the input.
    fn from_name(name: &str, detail: impl std::fmt::Display) -> Self {
        let code = match name {
            "Degenerate" | "NonStationary" | "Divergence" => EXIT_NUMERICAL,
            _ => EXIT_DATA,
        };
        Self::new(name, detail, code)
    }

    pub fn line(&self) -> String {
        format!("error={} detail={}", self.name, self.detail)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::from_name(e.name(), e)
    }
}

impl From<config::RunError> for CliError {
    fn from(e: config::RunError) -> Self {
        Self::from_name(e.name, e.detail)
    }
}

impl From<csv_io::CsvError> for CliError {
    fn from(e: csv_io::CsvError) -> Self {
        Self::from_name(e.name(), e)
    }
}

impl From<EstimationError> for CliError {
    fn from(e: EstimationError) -> Self {
        Self::from_name(e.name(), e)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gapdyn",
    version,
    about = "Output-gap dynamics as a damped oscillator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct OutputArgs {
    /// Trajectory CSV (t,y,ydot,eps)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Chart of Y(t)
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Overrides the config's shock seed and GAPDYN_SEED
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ar2,
    Mle,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and print recovery metrics
    Simulate {
        /// Scenario file; the critically damped default when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the damping regime and discriminant γ² − 4α
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// Relative width of the critical band
        #[arg(long, default_value_t = DEFAULT_CRITICAL_TOL)]
        tol: f64,
    },
    /// Estimate (γ, α, σ) from a t,y CSV
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "ar2")]
        method: MethodArg,
    },
    /// Response to a single impulse, starting from rest
    Impulse {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        magnitude: f64,
        #[arg(long, default_value_t = 0.0)]
        at: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recovery metrics over an evenly spaced range of γ, one CSV row each
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        gamma_from: f64,
        #[arg(long)]
        gamma_to: f64,
        #[arg(long)]
        gamma_steps: usize,
        /// Write rows here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// DSGE residuals at a point
    Check {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        sigma_c: f64,
        #[arg(long, default_value_t = 0.3)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        a_tfp: f64,
        /// Comma-separated key=value overrides of c,l,b,b_next,r,w,n,k,y,p,r_k
        /// plus c_next (default c) and r_next (default steady-state rate)
        #[arg(long)]
        point: Option<String>,
    },
    /// The three-regime figure (γ = 0.5, 2, 4) as SVG
    Figure {
        #[arg(long)]
        svg: PathBuf,
    },
}

fn seed_override(flag: Option<u64>, env: Option<&str>) -> Result<Option<u64>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match env {
        None => Ok(None),
        Some(text) => text.trim().parse().map(Some).map_err(|_| {
            CliError::new(
                "BadValue",
                format!("{SEED_ENV}='{text}' is not a u64"),
                EXIT_DATA,
            )
        }),
    }
}

fn load_config(path: Option<&Path>) -> Result<ScenarioConfig, CliError> {
    match path {
        None => Ok(ScenarioConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::new("Io", format!("{}: {e}", p.display()), EXIT_DATA))?;
            Ok(parse_config(&text)?)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::new("Io", format!("{}: {e}", path.display()), EXIT_DATA))
}

fn regime_of(cfg: &ScenarioConfig) -> Result<Regime, CliError> {
    Ok(cfg.params()?.regime())
}

fn emit(out: &mut dyn Write, lines: &[(&str, String)]) -> Result<(), CliError> {
    for (k, v) in lines {
        writeln!(out, "{k}={v}").map_err(|e| CliError::new("Io", e, EXIT_DATA))?;
    }
    Ok(())
}

fn simulate_and_report(
    cfg: &ScenarioConfig,
    output: &OutputArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let traj = run_scenario(cfg)?;
    let metrics =
        recovery_metrics(&traj, DEFAULT_BAND).map_err(|e| CliError::from_name(e.name(), e))?;
    if let Some(path) = &output.out {
        write_file(path, &csv_io::trajectory_csv(&traj))?;
    }
    let regime = regime_of(cfg)?;
    if let Some(path) = &output.svg {
        let title = format!(
            "Output gap, {} (gamma={}, alpha={})",
            regime.label(),
            cfg.gamma,
            cfg.alpha
        );
        write_file(path, &svg::render_svg(&[&traj], &[regime.label()], &title))?;
    }
    emit(
        out,
        &[
            ("regime", regime.name().to_string()),
            ("integrator", cfg.integrator.name().to_string()),
            ("n_steps", traj.len().to_string()),
            ("settling_time", metrics.settling_time.to_string()),
            ("overshoot", metrics.overshoot.to_string()),
            ("zero_crossings", metrics.zero_crossings.to_string()),
            ("terminal_abs", metrics.terminal_abs.to_string()),
        ],
    )
}

fn parse_point(text: &str) -> Result<(DsgePoint, Option<f64>, Option<f64>), CliError> {
    let mut pt = DsgePoint::default();
    let (mut c_next, mut r_next) = (None, None);
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || CliError::new("BadValue", format!("point entry '{item}'"), EXIT_DATA);
        let (key, value) = item.split_once('=').ok_or_else(bad)?;
        let v: f64 = value.trim().parse().map_err(|_| bad())?;
        let slot = match key.trim() {
            "c" => &mut pt.c,
            "l" => &mut pt.l,
            "b" => &mut pt.b,
            "b_next" => &mut pt.b_next,
            "r" => &mut pt.r,
            "w" => &mut pt.w,
            "n" => &mut pt.n,
            "k" => &mut pt.k,
            "y" => &mut pt.y,
            "p" => &mut pt.p,
            "r_k" => &mut pt.r_k,
            "c_next" => {
                c_next = Some(v);
                continue;
            }
            "r_next" => {
                r_next = Some(v);
                continue;
            }
            other => {
                return Err(CliError::new(
                    "UnknownKey",
                    format!("point key '{other}'"),
                    EXIT_DATA,
                ))
            }
        };
        *slot = v;
    }
    let pt = pt
        .validate()
        .map_err(|e| CliError::from_name(e.name(), e))?;
    Ok((pt, c_next, r_next))
}

fn sweep_rows(base: &ScenarioConfig, from: f64, to: f64, steps: usize) -> Result<String, CliError> {
    if steps == 0 {
        return Err(CliError::usage("--gamma-steps must be at least 1"));
    }
    if !(from.is_finite() && to.is_finite()) || (steps > 1 && to <= from) {
        return Err(CliError::usage("need finite --gamma-from < --gamma-to"));
    }
    let gammas: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                from
            } else {
                from + (to - from) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();

    // every γ is independent; results are collected back in γ order
    let results: Vec<Result<String, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = gammas
            .iter()
            .map(|&gamma| {
                scope.spawn(move || {
                    let cfg = ScenarioConfig {
                        gamma,
                        ..base.clone()
                    }
                    .validate()?;
                    let traj: Trajectory = run_scenario(&cfg)?;
                    let m = recovery_metrics(&traj, DEFAULT_BAND)
                        .map_err(|e| CliError::from_name(e.name(), e))?;
                    Ok(format!(
                        "{gamma},{},{},{},{},{}\n",
                        regime_of(&cfg)?.name(),
                        m.settling_time,
                        m.overshoot,
                        m.zero_crossings,
                        m.terminal_abs
                    ))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join().unwrap_or_else(|_| {
                    Err(CliError::new("Panic", "worker panicked", EXIT_NUMERICAL))
                })
            })
            .collect()
    });

    let mut csv =
        String::from("gamma,regime,settling_time,overshoot,zero_crossings,terminal_abs\n");
    for row in results {
        csv.push_str(&row?);
    }
    Ok(csv)
}

/// Runs one parsed command. `env_seed` is the raw value of `GAPDYN_SEED`.
pub fn execute(cmd: Command, env_seed: Option<&str>, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Simulate { config, output } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(seed) = seed_override(output.seed, env_seed)? {
                cfg.shock = cfg.shock.with_seed(seed);
            }
            simulate_and_report(&cfg, &output, out)
        }
        Command::Classify { gamma, alpha, tol } => {
            let params = OscillatorParams::new(gamma, alpha)
                .map_err(|e| CliError::from_name(e.name(), e))?;
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(CliError::new(
                    "InvariantViolation",
                    "tol must be non-negative",
                    EXIT_DATA,
                ));
            }
            emit(
                out,
                &[
                    ("regime", classify(&params, tol).name().to_string()),
                    ("discriminant", params.discriminant().to_string()),
                ],
            )
        }
        Command::Estimate { input, method } => {
            let series = csv_io::read_series_csv(&input)?.to_observed()?;
            let r = match method {
                MethodArg::Ar2 => estimate_ar2(&series)?,
                MethodArg::Mle => estimate_mle(&series, None)?,
            };
            let regime = r.params().map(|p| p.regime().name()).unwrap_or("none");
            emit(
                out,
                &[
                    ("method", r.method.name().to_string()),
                    ("gamma_hat", r.gamma_hat.to_string()),
                    ("alpha_hat", r.alpha_hat.to_string()),
                    ("sigma_hat", r.sigma_hat.to_string()),
                    ("loglik", r.loglik.to_string()),
                    ("converged", r.converged.to_string()),
                    ("n_obs", r.n_obs.to_string()),
                    ("dt", series.dt().to_string()),
                    ("regime", regime.to_string()),
                ],
            )
        }
        Command::Impulse {
            config,
            magnitude,
            at,
            output,
        } => {
            let base = load_config(config.as_deref())?;
            let cfg = ScenarioConfig {
                y0: 0.0,
                ydot0: 0.0,
                shock: ShockSpec::Impulse { at, magnitude },
                ..base
            }
            .validate()?;
            simulate_and_report(&cfg, &output, out)
        }
        Command::Sweep {
            config,
            gamma_from,
            gamma_to,
            gamma_steps,
            out: path,
            seed,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(seed) = seed_override(seed, env_seed)? {
                cfg.shock = cfg.shock.with_seed(seed);
            }
            let csv = sweep_rows(&cfg, gamma_from, gamma_to, gamma_steps)?;
            match path {
                Some(p) => write_file(&p, &csv),
                None => out
                    .write_all(csv.as_bytes())
                    .map_err(|e| CliError::new("Io", e, EXIT_DATA)),
            }
        }
        Command::Check {
            beta,
            sigma_c,
            theta,
            a_tfp,
            point,
        } => {
            let params = DsgeBlockParams::new(beta, sigma_c, theta, a_tfp)
                .map_err(|e| CliError::from_name(e.name(), e))?;
            let (pt, c_next, r_next) = parse_point(point.as_deref().unwrap_or(""))?;
            let r_star = steady_state_rate(&params);
            let euler = euler_residual(
                pt.c,
                c_next.unwrap_or(pt.c),
                r_next.unwrap_or(r_star),
                &params,
            )
            .map_err(|e| CliError::from_name(e.name(), e))?;
            let output =
                production(pt.k, pt.n, &params).map_err(|e| CliError::from_name(e.name(), e))?;
            emit(
                out,
                &[
                    ("euler_residual", euler.to_string()),
                    ("budget_residual", budget_residual(&pt).to_string()),
                    ("profit", profit(&pt).to_string()),
                    ("production", output.to_string()),
                    ("steady_state_rate", r_star.to_string()),
                ],
            )
        }
        Command::Figure { svg: path } => {
            let trajs = [0.5, 2.0, 4.0].map(|gamma| {
                run_scenario(&ScenarioConfig {
                    gamma,
                    ..Default::default()
                })
            });
            let mut refs = Vec::new();
            for t in &trajs {
                refs.push(t.as_ref().map_err(|e| CliError::from(e.clone()))?);
            }
            let labels = [
                Regime::UnderDamped.label(),
                Regime::CriticallyDamped.label(),
                Regime::OverDamped.label(),
            ];
            write_file(&path, &svg::render_svg(&refs, &labels, svg::PAPER_TITLE))
        }
    }
}

/// Parses `args` (program name first) and runs them; returns the exit status.
pub fn run<I, S>(args: I, env_seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let detail = e.to_string();
            let first = detail
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            let _ = writeln!(err, "{}", CliError::usage(first).line());
            return EXIT_USAGE;
        }
    };
    match execute(cli.command, env_seed, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.line());
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["gapdyn"];
        full.extend_from_slice(args);
        let code = run(full, None, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn classify_over_damped() {
        let (code, out, _) = call(&["classify", "--gamma", "4.0", "--alpha", "1.0"]);
        assert_eq!(code, 0);
        assert_eq!(out, "regime=over-damped\ndiscriminant=12\n");
    }

    #[test]
    fn classify_negative_alpha_is_data_error() {
        let (code, _, err) = call(&["classify", "--gamma", "1", "--alpha", "-1"]);
        assert_eq!(code, EXIT_DATA);
        assert!(
            err.starts_with("error=OutOfRange detail=")
                || err.starts_with("error=InvariantViolation detail="),
            "{err}"
        );
        assert_eq!(err.lines().count(), 1);
    }

    #[test]
    fn usage_errors_exit_one() {
        let (code, _, err) = call(&["classify", "--gamma", "x"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.starts_with("error=Usage detail="));
        assert_eq!(err.lines().count(), 1);
        assert_eq!(call(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn simulate_default_metrics() {
        let (code, out, err) = call(&["simulate"]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("regime=critically-damped\n"));
        assert!(out.contains("n_steps=201\n"));
        assert!(out.contains("zero_crossings=0\n"));
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(seed_override(Some(3), Some("9")).unwrap(), Some(3));
        assert_eq!(seed_override(None, Some("9")).unwrap(), Some(9));
        assert_eq!(seed_override(None, None).unwrap(), None);
        assert_eq!(
            seed_override(None, Some("nine")).unwrap_err().code,
            EXIT_DATA
        );
    }

    #[test]
    fn sweep_rows_ordered() {
        let csv = sweep_rows(&ScenarioConfig::default(), 0.5, 4.0, 8).unwrap();
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 8);
        let gammas: Vec<f64> = rows
            .iter()
            .map(|r| r.split(',').next().unwrap().parse().unwrap())
            .collect();
        assert!(gammas.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(gammas[0], 0.5);
        assert_eq!(gammas[7], 4.0);
        assert!(sweep_rows(&ScenarioConfig::default(), 1.0, 1.0, 3).is_err());
        assert_eq!(
            sweep_rows(&ScenarioConfig::default(), 1.0, 1.0, 1)
                .unwrap()
                .lines()
                .count(),
            2
        );
    }

    #[test]
    fn check_steady_state() {
        let (code, out, err) = call(&["check", "--beta", "0.99", "--sigma-c", "2"]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("euler_residual=0\n"), "{out}");
        assert!(out.contains("budget_residual=0\n"));
        let (_, out, _) = call(&[
            "check",
            "--beta",
            "0.99",
            "--sigma-c",
            "2",
            "--point",
            "c=1,c_next=1.1,r_next=0.05",
        ]);
        let v: f64 = out
            .lines()
            .next()
            .unwrap()
            .trim_start_matches("euler_residual=")
            .parse()
            .unwrap();
        assert!((v - 0.140909090909).abs() < 1e-11);
        let (code, _, err) = call(&[
            "check",
            "--beta",
            "0.99",
            "--sigma-c",
            "2",
            "--point",
            "q=1",
        ]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.starts_with("error=UnknownKey"));
    }

    #[test]
    fn impulse_from_rest() {
        let (code, out, err) = call(&["impulse", "--magnitude", "1", "--at", "0"]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("n_steps=201"));
        let (code, _, err) = call(&["impulse", "--magnitude", "1", "--at", "99"]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.starts_with("error=ImpulseOutsideGrid"), "{err}");
    }
}
