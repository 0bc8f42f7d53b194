//! Command-line front end shared by the `snspm` binary.
//!
//! Exit codes: 0 success, 1 I/O failure or failed validation, 2 invalid
//! parameters or configuration, 3 numerically degenerate evaluation.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::attack::Verdict;
use crate::error::{Error, Result};
use crate::mc::{self, Analytic, McSummary};
use crate::params::ProtocolParams;
use crate::povm::Regime;
use crate::presets::{self, PresetKind};
use crate::rates::{rate_point, Variant};
use crate::sweep::{self, Grid, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "snspm",
    version,
    about = "Key rates and attack analysis for SNS phase-matching QKD"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the rate at a single distance.
    Rate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        variant: Option<Variant>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Rate-distance curve as CSV.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        variant: Option<Variant>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Largest distance with a positive rate.
    MaxDistance {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        variant: Option<Variant>,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 2000.0)]
        hi: f64,
    },
    /// Double-POVM attack error against the signal error rate.
    Attack {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare a loss-only Monte Carlo run with the closed forms.
    McValidate {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "N", default_value_t = 1_000_000)]
        rounds: u64,
        #[arg(long, default_value_t = 0.1)]
        mu: f64,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Per-round CSV trace of the first rounds.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        trace_cap: usize,
    },
    /// Recompute a published curve and check its reach.
    Reproduce {
        target: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Constant sending probability maximizing the rate at one distance.
    Optimize {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        variant: Option<Variant>,
        #[arg(long = "L")]
        distance_km: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct Source {
    /// JSON parameter file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named parameter set.
    #[arg(long)]
    pub preset: Option<String>,
    /// `key=value`, applied after the config or preset.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    LossOnly,
    Realistic,
}

impl clap::builder::ValueParserFactory for Variant {
    type Parser = clap::builder::ValueParser;

    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Variant>().map_err(|e| e.to_string()))
    }
}

struct Loaded {
    params: ProtocolParams,
    preset: Option<presets::Preset>,
}

impl Source {
    fn load(&self) -> Result<Loaded> {
        let (mut params, preset) = match (&self.config, &self.preset) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "use either --config or --preset, not both".into(),
                ))
            }
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                (ProtocolParams::from_json(&text)?, None)
            }
            (None, Some(name)) => {
                let p = presets::find(name)?;
                (p.params.clone(), Some(p))
            }
            (None, None) => {
                return Err(Error::Config(
                    "no parameters: pass --config or --preset".into(),
                ))
            }
        };
        for o in &self.overrides {
            params.apply_override(o)?;
        }
        Ok(Loaded { params, preset })
    }
}

impl Loaded {
    fn variant(&self, requested: Option<Variant>) -> Variant {
        requested.unwrap_or(match self.preset.as_ref().map(|p| p.kind) {
            Some(PresetKind::Rate(v)) => v,
            _ => Variant::Real,
        })
    }

    fn grid(&self, args: &GridArgs) -> Result<Grid> {
        let default = self
            .preset
            .as_ref()
            .map(|p| p.grid.clone())
            .unwrap_or(Grid {
                start: 0.0,
                stop: 1000.0,
                step: 1.0,
            });
        Grid::new(
            args.start.unwrap_or(default.start),
            args.stop.unwrap_or(default.stop),
            args.step.unwrap_or(default.step),
        )
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Where the human-readable summary goes: stdout when the CSV goes to a
/// file, stderr when the CSV itself is on stdout.
fn summary_sink(output: Option<&Path>) -> Box<dyn Write> {
    if output.is_some() {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_domain() {
        EXIT_DOMAIN
    } else if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_FAIL
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_DOMAIN } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Rate {
            source,
            variant,
            output,
        } => {
            let loaded = source.load()?;
            let variant = loaded.variant(variant);
            let point = rate_point(&loaded.params, variant)?;
            println!(
                "L_km={} variant={} rate={:e} e_signal={} chi={:e} p_conclusive={:e} P_sns={:e} P_ss={:e} P_nn={:e}",
                point.distance_km,
                variant,
                point.rate,
                point.e_signal.map_or("undefined".to_string(), |e| format!("{e:e}")),
                point.chi,
                point.p_conclusive,
                point.p_sns,
                point.p_ss,
                point.p_nn
            );
            if let Some(path) = output {
                let row = sweep::Row {
                    distance_km: point.distance_km,
                    result: Ok(point),
                };
                sweep::write_rate_csv(&[row], variant, open_output(Some(&path))?)?;
            }
            Ok(EXIT_OK)
        }
        Command::Sweep {
            source,
            variant,
            grid,
            output,
        } => {
            let loaded = source.load()?;
            let spec = SweepSpec {
                variant: loaded.variant(variant),
                grid: loaded.grid(&grid)?,
                params: loaded.params,
            };
            let rows = sweep::sweep(&spec)?;
            sweep::write_rate_csv(&rows, spec.variant, open_output(output.as_deref())?)?;
            let failed = report_failures(&rows, output.as_deref())?;
            let positive = rows
                .iter()
                .take_while(|r| matches!(&r.result, Ok(p) if p.rate > 0.0))
                .last()
                .map(|r| r.distance_km);
            let mut out = summary_sink(output.as_deref());
            match positive {
                Some(l) => writeln!(out, "points={} last_positive_km={l}", rows.len())?,
                None => writeln!(out, "points={} last_positive_km=none", rows.len())?,
            }
            Ok(if failed { EXIT_NUMERICAL } else { EXIT_OK })
        }
        Command::MaxDistance {
            source,
            variant,
            lo,
            hi,
        } => {
            let loaded = source.load()?;
            let variant = loaded.variant(variant);
            let l = sweep::max_distance(&loaded.params, variant, lo, hi)?;
            println!("max_distance_km={l:.3} variant={variant}");
            Ok(EXIT_OK)
        }
        Command::Attack {
            source,
            regime,
            grid,
            output,
        } => {
            let loaded = source.load()?;
            let regime = match regime {
                Some(RegimeArg::LossOnly) => Regime::Ideal,
                Some(RegimeArg::Realistic) => Regime::Realistic,
                None => match loaded.preset.as_ref().map(|p| p.kind) {
                    Some(PresetKind::Attack(r)) => r,
                    _ => Regime::Realistic,
                },
            };
            let rows = sweep::attack_sweep(&loaded.params, regime, &loaded.grid(&grid)?)?;
            sweep::write_attack_csv(&rows, open_output(output.as_deref())?)?;
            let failed = report_failures(&rows, output.as_deref())?;
            writeln!(summary_sink(output.as_deref()), "{}", attack_summary(&rows))?;
            Ok(if failed { EXIT_NUMERICAL } else { EXIT_OK })
        }
        Command::McValidate {
            seed,
            rounds,
            mu,
            epsilon,
            eta,
            output,
            trace,
            trace_cap,
        } => {
            let cap = if trace.is_some() { trace_cap } else { 0 };
            let (summary, records) = mc::simulate_traced(mu, epsilon, eta, rounds, seed, cap)?;
            if let Some(path) = trace {
                mc::write_trace(&records, File::create(path)?)?;
            }
            let ok = print_mc_table(&summary, &Analytic::loss_only(mu, epsilon, eta))?;
            let mut out = open_output(output.as_deref())?;
            writeln!(out, "{}", McSummary::CSV_HEADER)?;
            summary.write_csv_row(&mut out)?;
            out.flush()?;
            Ok(if ok { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Reproduce { target, output } => reproduce(&target, output.as_deref()),
        Command::Optimize {
            source,
            variant,
            distance_km,
        } => {
            let loaded = source.load()?;
            let variant = loaded.variant(variant);
            let l = distance_km.unwrap_or(loaded.params.distance_km);
            let opt = sweep::optimize_epsilon(&loaded.params, variant, l)?;
            println!(
                "L_km={l} variant={variant} epsilon_opt={:.5} rate_opt={:e} rate_configured={:e}",
                opt.epsilon, opt.rate, opt.rate_configured
            );
            Ok(EXIT_OK)
        }
    }
}

fn report_failures<T>(rows: &[sweep::Row<T>], output: Option<&Path>) -> Result<bool> {
    let mut failed = false;
    let mut out = summary_sink(output);
    for row in rows {
        if let Err(msg) = &row.result {
            writeln!(out, "L_km={}: {msg}", row.distance_km)?;
            failed = true;
        }
    }
    Ok(failed)
}

fn attack_summary(rows: &[sweep::Row<crate::attack::AttackReport>]) -> String {
    let reports: Vec<_> = rows.iter().filter_map(|r| r.result.as_ref().ok()).collect();
    let detectable = reports.iter().all(|r| r.detectable());
    let min_ratio = reports
        .iter()
        .filter_map(|r| r.ratio.map(|x| (x, r.distance_km)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let undetected = reports
        .iter()
        .filter(|r| r.verdict == Verdict::Undetected)
        .count();
    match min_ratio {
        Some((ratio, l)) => format!(
            "points={} min_ratio={ratio:.4} at L_km={l} undetected_points={undetected} detectable_everywhere={detectable}",
            reports.len()
        ),
        None => format!(
            "points={} baseline_error=0 undetected_points={undetected} detectable_everywhere={detectable}",
            reports.len()
        ),
    }
}

fn print_mc_table(summary: &McSummary, analytic: &Analytic) -> Result<bool> {
    println!(
        "seed={} rng={} N={} correlation={}",
        summary.seed,
        summary.rng,
        summary.rounds,
        summary.correlation()
    );
    println!(
        "{:<14} {:>14} {:>14} {:>10}",
        "statistic", "empirical", "expected", "z"
    );
    let mut ok = summary.correlated == summary.conclusive;
    for row in mc::empirical_vs_analytic(summary, analytic)? {
        let z = match row.z {
            Some(z) => {
                ok &= z.abs() < 4.0;
                format!("{z:.3}")
            }
            None => "skipped (zero variance)".to_string(),
        };
        println!(
            "{:<14} {:>14.6e} {:>14.6e} {:>10}",
            row.statistic, row.empirical, row.expected, z
        );
    }
    println!("check: {}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn reproduce(target: &str, output: Option<&Path>) -> Result<i32> {
    let preset = presets::find(target)?;
    match preset.kind {
        PresetKind::Rate(variant) => {
            let spec = SweepSpec {
                params: preset.params.clone(),
                variant,
                grid: preset.grid.clone(),
            };
            let rows = sweep::sweep(&spec)?;
            sweep::write_rate_csv(&rows, variant, open_output(output)?)?;
            report_failures(&rows, output)?;
            let l =
                sweep::max_distance(&preset.params, variant, preset.grid.start, preset.grid.stop)?;
            let mut out = summary_sink(output);
            match preset.expected {
                Some(expected) => {
                    let pass = expected.contains(l);
                    writeln!(
                        out,
                        "{} max_distance_km={l:.1} expected={} band check: {}",
                        preset.name,
                        expected.describe(),
                        if pass { "PASS" } else { "FAIL" }
                    )?;
                    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
                }
                None => {
                    writeln!(out, "{} max_distance_km={l:.1}", preset.name)?;
                    Ok(EXIT_OK)
                }
            }
        }
        PresetKind::Attack(regime) => {
            let rows = sweep::attack_sweep(&preset.params, regime, &preset.grid)?;
            sweep::write_attack_csv(&rows, open_output(output)?)?;
            report_failures(&rows, output)?;
            let pass = rows
                .iter()
                .all(|r| matches!(&r.result, Ok(rep) if rep.detectable()));
            writeln!(
                summary_sink(output),
                "{} {} detectability check: {}",
                preset.name,
                attack_summary(&rows),
                if pass { "PASS" } else { "FAIL" }
            )?;
            Ok(if pass { EXIT_OK } else { EXIT_FAIL })
        }
    }
}
