use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use decoy_aoi::experiments::{self, run_sweep_with_seed, Metric, RECIPES};
use decoy_aoi::scenario::{load_scenario_with_seed, DEFAULT_SEED};
use decoy_aoi::{closed_loop_paoi, compare_with_analytic, sim, DetectorTable, Error, Scenario, SweepSpec};

const SEED_ENV: &str = "DECOY_AOI_SEED";

#[derive(Parser)]
#[command(name = "decoy-aoi", version, about = "Peak age of information under reactive jamming with decoys")]
#[command(after_help = "The default seed can be set with the DECOY_AOI_SEED environment variable; \
a seed in the scenario file or --seed takes precedence. Set RUST_LOG for diagnostics.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form model and print the intermediates as JSON.
    Analytic { scenario: PathBuf },
    /// Run the Monte Carlo simulation and print its statistics as JSON.
    Simulate {
        scenario: PathBuf,
        /// Number of service-time slots to simulate.
        #[arg(long)]
        slots: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write one CSV line per block to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also evaluate the closed form and report whether it lies inside the
        /// simulation's 99% interval.
        #[arg(long)]
        compare: bool,
    },
    /// Run a sweep from a spec file or a bundled recipe (fig4a, fig4b, fig5a, fig5b, fig6).
    Sweep {
        spec: String,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Defaults to svg for a .svg output file, csv otherwise.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Quantity plotted in SVG output; defaults to the spec's metric.
        #[arg(long, value_enum)]
        metric: Option<MetricArg>,
    },
    /// Check a scenario file and print it with all defaults applied.
    Validate { scenario: PathBuf },
    /// Detector lookup tables.
    DetectorTable {
        #[command(subcommand)]
        command: TableCommand,
    },
}

#[derive(Subcommand)]
enum TableCommand {
    /// Validate a table file against the schema.
    Check { file: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    PBusy,
    PJ,
    PLoss,
    Paoi,
    JammerAvgPower,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::PBusy => Metric::PBusy,
            MetricArg::PJ => Metric::PJ,
            MetricArg::PLoss => Metric::PLoss,
            MetricArg::Paoi => Metric::Paoi,
            MetricArg::JammerAvgPower => Metric::JammerAvgPower,
        }
    }
}

fn default_seed() -> Result<u64, Error> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Invalid {
            field: SEED_ENV.into(),
            reason: format!("not an unsigned integer: {v:?}"),
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn load(path: &Path) -> Result<Scenario, Error> {
    load_scenario_with_seed(path, default_seed()?)
}

fn print_json(value: &Value) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sweep_spec(arg: &str) -> Result<SweepSpec, Error> {
    let path = Path::new(arg);
    if path.is_file() {
        return SweepSpec::load(path);
    }
    experiments::recipe(arg).ok_or_else(|| Error::Invalid {
        field: "spec".into(),
        reason: format!("{arg:?} is neither a file nor a recipe (recipes: {})", RECIPES.join(", ")),
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analytic { scenario } => {
            let s = load(&scenario)?;
            let result = closed_loop_paoi(&s)?;
            print_json(&json!({ "scenario": s, "analytic": result }))
        }
        Command::Simulate {
            scenario,
            slots,
            seed,
            trace,
            compare,
        } => {
            let mut s = load(&scenario)?;
            if let Some(n) = slots {
                s.n_slots = n;
            }
            if let Some(seed) = seed {
                s.seed = seed;
            }
            s.validate()?;
            if let Some(path) = &trace {
                let file = File::create(path).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
                let stats = sim::run_traced(&s, file)?;
                if !compare {
                    return print_json(&json!({ "seed": s.seed, "n_slots": s.n_slots, "stats": stats }));
                }
            }
            if compare {
                let c = compare_with_analytic(&s)?;
                print_json(&json!({ "seed": s.seed, "n_slots": s.n_slots, "comparison": c }))
            } else {
                let stats = sim::run(&s)?;
                print_json(&json!({ "seed": s.seed, "n_slots": s.n_slots, "stats": stats }))
            }
        }
        Command::Sweep {
            spec,
            out,
            format,
            metric,
        } => {
            let spec = sweep_spec(&spec)?;
            let format = format.unwrap_or_else(|| match out.as_deref().and_then(Path::extension) {
                Some(ext) if ext.eq_ignore_ascii_case("svg") => Format::Svg,
                _ => Format::Csv,
            });
            let table = run_sweep_with_seed(&spec, default_seed()?)?;
            let text = match format {
                Format::Csv => table.to_csv(),
                Format::Svg => table.to_svg(metric.map(Metric::from).unwrap_or(spec.metric)),
            };
            write_output(out.as_deref(), &text)?;
            log::info!("{} rows", table.rows.len());
            Ok(())
        }
        Command::Validate { scenario } => {
            let s = load(&scenario)?;
            let roc = s.roc()?;
            print_json(&json!({ "valid": true, "scenario": s, "roc": roc }))
        }
        Command::DetectorTable {
            command: TableCommand::Check { file },
        } => {
            let table = DetectorTable::load(&file)?;
            let monotone = table.p_detect.iter().all(|row| row.windows(2).all(|w| w[1] >= w[0]));
            if !monotone {
                log::warn!("p_detect decreases with SNR somewhere in {}", file.display());
            }
            print_json(&json!({
                "valid": true,
                "packet_sizes": table.packet_sizes,
                "snr_points": table.snr_db.len(),
                "snr_db_range": [table.snr_db[0], table.snr_db[table.snr_db.len() - 1]],
                "p_detect_monotone": monotone,
                "metadata": table.metadata,
            }))
        }
    }
}

fn error_summary(e: &Error) -> Value {
    let mut summary = json!({ "kind": e.kind(), "message": e.to_string() });
    match e {
        Error::Parse { line, column, .. } => {
            summary["line"] = json!(line);
            summary["column"] = json!(column);
        }
        Error::Invalid { field, .. } => summary["field"] = json!(field),
        Error::Io { path, .. } => summary["path"] = json!(path),
        Error::Unstable { rho } => summary["rho"] = json!(rho),
        Error::SweepPoint {
            parameter,
            value,
            source,
        } => {
            summary["parameter"] = json!(parameter);
            summary["value"] = json!(value);
            summary["cause"] = error_summary(source);
        }
        _ => {}
    }
    summary
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": error_summary(&e) }));
            ExitCode::FAILURE
        }
    }
}
