use affcurve::cli::{self, Outcome};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "affcurve",
    version,
    about = "Affine-geometric curve invariants, Jacobian inequality scans, and averaging-operator probes"
)]
struct Cli {
    /// JSON run configuration (overrides per-command flags)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path for the report (JSON) or plot data (CSV with --format csv)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed for randomized commands
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = auto); results are independent of this value
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Torsion profile, ratio-function reports, hypothesis verdicts
    Analyze {
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, num_args = 2)]
        region: Option<Vec<f64>>,
    },
    /// Scan the geometric Jacobian inequality ratio over parameter tuples
    Gi {
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, num_args = 2)]
        region: Option<Vec<f64>>,
    },
    /// Scan the X-ray iteration-map Jacobian lower-bound ratio
    XrayGi,
    /// Probe near-injectivity of an X-ray iteration map
    Injectivity,
    /// Compare the recursive Jacobian factorization with the direct determinant
    IdentityCheck {
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long)]
        tuples: Option<usize>,
    },
    /// Restricted-weak-type extremizer search or single-pair evaluation
    Norms {
        #[arg(long)]
        curve: Option<PathBuf>,
        /// affine | unweighted (use --config for the θ-dependent weights)
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Affine-measure mass against convex hull volume over a window
    HullProbe {
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, num_args = 2)]
        region: Option<Vec<f64>>,
    },
    /// Piecewise |L| ∼ C|t−a|^k decomposition of a polynomial curve's torsion
    Decompose {
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long, num_args = 2)]
        region: Option<Vec<f64>>,
    },
    /// θ_loc/θ_glob and the unweighted exponent-region vertices
    ExponentRegion {
        #[arg(long)]
        curve: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Gi { .. } => "gi",
            Command::XrayGi => "xray-gi",
            Command::Injectivity => "injectivity",
            Command::IdentityCheck { .. } => "identity-check",
            Command::Norms { .. } => "norms",
            Command::HullProbe { .. } => "hull-probe",
            Command::Decompose { .. } => "decompose",
            Command::ExponentRegion { .. } => "exponent-region",
        }
    }
}

fn read_json(path: &PathBuf) -> Result<Value, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid JSON in {}: {e}", path.display()))
}

fn insert_opt<T: serde::Serialize>(obj: &mut Value, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        obj[key] = json!(v);
    }
}

/// Assemble a run config from per-command flags when --config is absent.
fn config_from_flags(cmd: &Command) -> Result<Value, String> {
    let need_curve = |curve: &Option<PathBuf>| -> Result<Value, String> {
        match curve {
            Some(p) => read_json(p),
            None => Err("either --config or --curve is required".to_string()),
        }
    };
    match cmd {
        Command::Analyze {
            curve,
            samples,
            region,
        } => {
            let mut cfg = json!({ "curve": need_curve(curve)? });
            insert_opt(&mut cfg, "samples", samples);
            insert_opt(&mut cfg, "region", region);
            Ok(cfg)
        }
        Command::Gi { curve, n, region } => {
            let mut cfg = json!({ "curve": need_curve(curve)? });
            insert_opt(&mut cfg, "n", n);
            insert_opt(&mut cfg, "region", region);
            Ok(cfg)
        }
        Command::IdentityCheck { curve, tuples } => {
            let mut cfg = json!({ "curve": need_curve(curve)? });
            insert_opt(&mut cfg, "tuples", tuples);
            Ok(cfg)
        }
        Command::Norms {
            curve,
            weight,
            p,
            q,
            budget,
        } => {
            let weight = match weight.as_deref() {
                Some("affine") | None => json!({ "variant": "affine" }),
                Some("unweighted") => json!({ "variant": "unweighted" }),
                Some(other) => {
                    return Err(format!(
                        "unknown weight '{other}' (use --config for θ-dependent weights)"
                    ))
                }
            };
            let mut cfg = json!({
                "curve": need_curve(curve)?,
                "weight": weight,
                "p": p.ok_or("--p is required")?,
                "q": q.ok_or("--q is required")?,
            });
            insert_opt(&mut cfg, "budget", budget);
            Ok(cfg)
        }
        Command::HullProbe { curve, n, region } => {
            let mut cfg = json!({ "curve": need_curve(curve)? });
            insert_opt(&mut cfg, "n", n);
            insert_opt(&mut cfg, "region", region);
            Ok(cfg)
        }
        Command::Decompose { curve, region } => {
            let mut cfg = json!({ "curve": need_curve(curve)? });
            insert_opt(&mut cfg, "region", region);
            Ok(cfg)
        }
        Command::ExponentRegion { curve } => Ok(json!({ "curve": need_curve(curve)? })),
        Command::XrayGi | Command::Injectivity => {
            Err("this command takes its parameters from --config".to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = std::env::var("AFFCURVE_LOG").map_or(false, |v| !v.is_empty() && v != "0");
    let name = cli.command.name();
    let config = match &cli.config {
        Some(path) => read_json(path),
        None => config_from_flags(&cli.command),
    };
    let config = match config {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("affcurve: config error: {msg}");
            return ExitCode::from(cli::EXIT_CONFIG as u8);
        }
    };
    if log {
        eprintln!("affcurve: running '{name}' with seed {}", cli.seed);
    }
    let Outcome {
        exit,
        report,
        csv,
        error,
    } = cli::execute(name, &config, cli.seed);
    if let Some(err) = &error {
        eprintln!("affcurve: {err}");
    }
    if let Some(report) = &report {
        let rendered = serde_json::to_string_pretty(report).expect("report serialization");
        match (&cli.out, matches!(cli.format, Format::Csv)) {
            (Some(path), true) => {
                // CSV plot data to --out, report JSON to stdout
                let data = csv.unwrap_or_default();
                if let Err(e) = std::fs::write(path, data) {
                    eprintln!("affcurve: cannot write {}: {e}", path.display());
                    return ExitCode::from(cli::EXIT_CONFIG as u8);
                }
                println!("{rendered}");
            }
            (Some(path), false) => {
                if let Err(e) = std::fs::write(path, &rendered) {
                    eprintln!("affcurve: cannot write {}: {e}", path.display());
                    return ExitCode::from(cli::EXIT_CONFIG as u8);
                }
            }
            (None, true) => {
                if let Some(data) = csv {
                    println!("{data}");
                }
            }
            (None, false) => println!("{rendered}"),
        }
    }
    if log {
        if let Some(r) = &report {
            eprintln!("affcurve: finished in {:.1} ms (exit {exit})", r.timings_ms);
        }
    }
    ExitCode::from(exit as u8)
}
