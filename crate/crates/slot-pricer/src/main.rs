//! `slot-pricer`: command-line interface for the slot-pricing solver.
//!
//! Exit codes: 0 success, 1 infeasible optimum (`-inf`), 2 input
//! validation, 3 mode rejection (e.g. `bounds` on a distance without a
//! strong-convexity parameter).

mod io;

use std::path::PathBuf;
use std::time::Instant;

use clap::{ArgAction, Parser, Subcommand};

use slot_pricing::continuous::{self, delta_max, derive_constants};
use slot_pricing::oracle;
use slot_pricing::real::ExtendedReal;
use slot_pricing::{solve, PriceProfile, SolveMode};

use io::{
    load_instance, slot_reports, BoundRow, CommandEcho, ConstantsReport, JsonReal, Payload,
    ResultFile, RESULT_SCHEMA,
};

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_MODE: u8 = 3;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    ModeRejection(String),
    #[error("cannot write output: {0}")]
    Output(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::ModeRejection(_) => EXIT_MODE,
            CliError::Output(_) => EXIT_VALIDATION,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "slot-pricer",
    version,
    about = "Revenue-maximizing time-slot pricing: exact solves over finite price sets and certified bounds for continuous prices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for the solver (default: all cores). Results do not
    /// depend on the thread count.
    #[arg(long, global = true, env = "SLOT_PRICER_THREADS")]
    threads: Option<usize>,
    /// Write the JSON result (or CSV for `envelope`) to this file instead
    /// of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve exactly over a finite price set.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated explicit price set.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        prices: Option<Vec<f64>>,
        /// Solve over the clamped grid of multiples of this resolution.
        #[arg(long, conflicts_with = "prices")]
        grid: Option<f64>,
    },
    /// Certified lower/upper bounds on the continuous-price optimum.
    Bounds {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated grid resolutions, processed coarsest first.
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
        /// Warn when a requested delta exceeds the sharp-analysis threshold
        /// 8 / (L^2 alpha). Disable with --warn-delta-max=false.
        #[arg(long, action = ArgAction::Set, default_value_t = true,
              num_args = 0..=1, default_missing_value = "true")]
        warn_delta_max: bool,
    },
    /// Evaluate a given price profile: regions, loads, revenue, feasibility.
    Check {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        profile: Vec<f64>,
    },
    /// Brute-force enumeration over a finite price set.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        prices: Vec<f64>,
        /// Maximum number of profiles to enumerate.
        #[arg(long, default_value_t = oracle::DEFAULT_ENUM_LIMIT)]
        limit: u64,
    },
    /// Sample the lower cost envelope and region boundaries to CSV
    /// (columns: x, envelope, slot, served).
    Envelope {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        profile: Vec<f64>,
        /// Number of uniform sample points (region boundaries are added).
        #[arg(long, default_value_t = 512)]
        samples: u64,
        /// Left end of the sampled range (default: support and slots, padded).
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        /// Right end of the sampled range.
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
    },
    /// Check an instance file against the schema and report its shape.
    Validate {
        #[arg(long)]
        instance: PathBuf,
    },
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(threads) = cli.threads {
            builder = builder.num_threads(threads);
        }
        match builder.build() {
            Ok(pool) => pool,
            Err(e) => {
                eprintln!("error: cannot build thread pool: {e}");
                return std::process::ExitCode::from(EXIT_VALIDATION);
            }
        }
    };
    let outcome = pool.install(|| run(&cli));
    match outcome {
        Ok(code) => std::process::ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Solve {
            instance,
            prices,
            grid,
        } => run_solve(cli, instance, prices.as_deref(), *grid),
        Command::Bounds {
            instance,
            deltas,
            warn_delta_max,
        } => run_bounds(cli, instance, deltas, *warn_delta_max),
        Command::Check { instance, profile } => run_check(cli, instance, profile),
        Command::Oracle {
            instance,
            prices,
            limit,
        } => run_oracle(cli, instance, prices, *limit),
        Command::Envelope {
            instance,
            profile,
            samples,
            from,
            to,
        } => run_envelope(cli, instance, profile, *samples, *from, *to),
        Command::Validate { instance } => run_validate(cli, instance),
    }
}

fn load(path: &std::path::Path) -> Result<io::LoadedInstance, CliError> {
    load_instance(path).map_err(|e| CliError::Validation(e.to_string()))
}

fn sorted_prices(prices: &[f64]) -> Result<Vec<f64>, CliError> {
    if prices.is_empty() {
        return Err(CliError::Validation("price set must be non-empty".into()));
    }
    if prices.iter().any(|p| !p.is_finite()) {
        return Err(CliError::Validation("prices must be finite".into()));
    }
    let mut sorted = prices.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    Ok(sorted)
}

fn check_profile_len(profile: &[f64], n: usize) -> Result<(), CliError> {
    if profile.len() != n {
        return Err(CliError::Validation(format!(
            "profile has {} prices but the instance has {n} slots",
            profile.len()
        )));
    }
    if profile.iter().any(|p| !p.is_finite()) {
        return Err(CliError::Validation("profile prices must be finite".into()));
    }
    Ok(())
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.output {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(CliError::Output),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit_result(cli: &Cli, result: &ResultFile) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(result).expect("result serialization cannot fail");
    emit(cli, &text)
}

fn run_solve(
    cli: &Cli,
    path: &std::path::Path,
    prices: Option<&[f64]>,
    grid: Option<f64>,
) -> Result<u8, CliError> {
    let loaded = load(path)?;
    let price_set = match (prices, grid) {
        (Some(prices), None) => sorted_prices(prices)?,
        (None, Some(delta)) => {
            if delta <= 0.0 {
                return Err(CliError::Validation(format!(
                    "--grid must be positive, got {delta}"
                )));
            }
            loaded.instance.price_grid(delta)
        }
        (None, None) => {
            return Err(CliError::Validation(
                "one of --prices or --grid is required".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects conflicting flags"),
    };
    let start = Instant::now();
    let result = solve(&loaded.instance, &price_set, SolveMode::Exact);
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let report = loaded.instance.compute_regions(&result.profile);
    let mut echo = CommandEcho::new("solve", cli.threads);
    echo.prices = Some(price_set);
    echo.grid = grid;
    let infeasible = result.value == ExtendedReal::NegInf;
    emit_result(
        cli,
        &ResultFile {
            schema: RESULT_SCHEMA,
            instance_hash: loaded.hash,
            command: echo,
            payload: Payload::Solve {
                value: JsonReal(result.value),
                profile: result.profile.prices().to_vec(),
                slots: slot_reports(&report),
                revenue: report.revenue,
                feasible: report.feasible,
                transitions: result.transitions,
            },
            wall_time_ms,
        },
    )?;
    Ok(if infeasible { EXIT_INFEASIBLE } else { 0 })
}

fn run_bounds(
    cli: &Cli,
    path: &std::path::Path,
    deltas: &[f64],
    warn_delta_max: bool,
) -> Result<u8, CliError> {
    let loaded = load(path)?;
    if deltas.is_empty() || deltas.iter().any(|&d| d.is_nan() || d <= 0.0) {
        return Err(CliError::Validation(
            "--deltas must be a non-empty list of positive resolutions".into(),
        ));
    }
    let constants =
        derive_constants(&loaded.instance).map_err(|e| CliError::ModeRejection(e.to_string()))?;
    let threshold = delta_max(&constants);
    let mut warnings = Vec::new();
    if warn_delta_max {
        for &delta in deltas {
            if delta > threshold {
                warnings.push(format!(
                    "delta {delta} exceeds delta_max = 8/(L^2 alpha) = {threshold}; \
                     bounds remain valid but the gap analysis is loose"
                ));
            }
        }
    }
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(|a, b| f64::total_cmp(b, a));
    let start = Instant::now();
    let reports = continuous::gap_sweep(&loaded.instance, &sorted)
        .map_err(|e| CliError::ModeRejection(e.to_string()))?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut echo = CommandEcho::new("bounds", cli.threads);
    echo.deltas = Some(sorted);
    emit_result(
        cli,
        &ResultFile {
            schema: RESULT_SCHEMA,
            instance_hash: loaded.hash,
            command: echo,
            payload: Payload::Bounds {
                constants: ConstantsReport::new(&constants, threshold),
                reports: reports.iter().map(BoundRow::from).collect(),
                warnings,
            },
            wall_time_ms,
        },
    )?;
    Ok(0)
}

fn run_check(cli: &Cli, path: &std::path::Path, profile: &[f64]) -> Result<u8, CliError> {
    let loaded = load(path)?;
    check_profile_len(profile, loaded.instance.n())?;
    let start = Instant::now();
    let report = loaded
        .instance
        .compute_regions(&PriceProfile::new(profile.to_vec()));
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut echo = CommandEcho::new("check", cli.threads);
    echo.profile = Some(profile.to_vec());
    emit_result(
        cli,
        &ResultFile {
            schema: RESULT_SCHEMA,
            instance_hash: loaded.hash,
            command: echo,
            payload: Payload::Check {
                profile: profile.to_vec(),
                slots: slot_reports(&report),
                revenue: report.revenue,
                feasible: report.feasible,
            },
            wall_time_ms,
        },
    )?;
    Ok(0)
}

fn run_oracle(
    cli: &Cli,
    path: &std::path::Path,
    prices: &[f64],
    limit: u64,
) -> Result<u8, CliError> {
    let loaded = load(path)?;
    let price_set = sorted_prices(prices)?;
    let start = Instant::now();
    let result = oracle::enumerate_opt(&loaded.instance, &price_set, limit)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut echo = CommandEcho::new("oracle", cli.threads);
    echo.prices = Some(price_set);
    echo.limit = Some(limit);
    let infeasible = result.value == ExtendedReal::NegInf;
    emit_result(
        cli,
        &ResultFile {
            schema: RESULT_SCHEMA,
            instance_hash: loaded.hash,
            command: echo,
            payload: Payload::Oracle {
                value: JsonReal(result.value),
                argmax_profiles: result.argmax_profiles,
                profiles_evaluated: result.profiles_evaluated,
            },
            wall_time_ms,
        },
    )?;
    Ok(if infeasible { EXIT_INFEASIBLE } else { 0 })
}

fn run_envelope(
    cli: &Cli,
    path: &std::path::Path,
    profile: &[f64],
    samples: u64,
    from: Option<f64>,
    to: Option<f64>,
) -> Result<u8, CliError> {
    let loaded = load(path)?;
    let instance = &loaded.instance;
    check_profile_len(profile, instance.n())?;
    if samples < 2 {
        return Err(CliError::Validation("--samples must be at least 2".into()));
    }
    let support = instance.population().support();
    let lo = from.unwrap_or_else(|| support.lo().min(instance.slot_time(0)) - 1.0);
    let hi = to.unwrap_or_else(|| {
        support
            .hi()
            .max(instance.slot_time(instance.n() - 1))
            + 1.0
    });
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(CliError::Validation(format!(
            "empty sampling range [{lo}, {hi}]"
        )));
    }

    let price_profile = PriceProfile::new(profile.to_vec());
    let report = instance.compute_regions(&price_profile);
    let mut xs: Vec<f64> = (0..samples)
        .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
        .collect();
    for slot in &report.slots {
        if let Some(envelope) = slot.envelope {
            for endpoint in [envelope.lo, envelope.hi] {
                if let ExtendedReal::Finite(x) = endpoint {
                    if (lo..=hi).contains(&x) {
                        xs.push(x);
                    }
                }
            }
        }
        if let Some(served) = slot.served {
            for x in [served.lo(), served.hi()] {
                if (lo..=hi).contains(&x) {
                    xs.push(x);
                }
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut csv = String::from("x,envelope,slot,served\n");
    for &x in &xs {
        let (slot, envelope) = (0..instance.n())
            .map(|j| (j, instance.distance().eval(x - instance.slot_time(j)) + profile[j]))
            .min_by(|a, b| f64::total_cmp(&a.1, &b.1))
            .expect("instance has at least one slot");
        // slack keeps inserted boundary rows inside their closed region
        let served = envelope <= 1e-12;
        csv.push_str(&format!("{x},{envelope},{},{served}\n", slot + 1));
    }
    emit(cli, csv.trim_end_matches('\n'))?;
    Ok(0)
}

fn run_validate(cli: &Cli, path: &std::path::Path) -> Result<u8, CliError> {
    let loaded = load(path)?;
    let name = loaded
        .file
        .metadata
        .as_ref()
        .and_then(|m| m.name.as_deref())
        .unwrap_or("unnamed");
    emit(
        cli,
        &format!(
            "ok: {name} ({} slots, {} density pieces, total mass {}, hash {})",
            loaded.instance.n(),
            loaded.instance.population().densities().len(),
            loaded.instance.population().total_mass(),
            loaded.hash,
        ),
    )?;
    Ok(0)
}
