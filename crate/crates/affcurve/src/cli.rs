//! Command dispatch: typed configs in, machine-readable reports out.
//!
//! Exit code contract: 0 success, 2 config error (message carries a
//! JSON-pointer-style field path), 3 numeric error (embedded in the report),
//! 4 analysis completed but the checked hypothesis fails (report emitted).

use crate::config::{
    resolve_region, AnalyzeConfig, DecomposeConfig, ExponentRegionConfig, GiConfig,
    HullProbeConfig, IdentityCheckConfig, InjectivityConfig, NormsConfig, XrayGiConfig,
};
use crate::error::{Error, Result};
use crate::geometry::{self, TorsionProfile};
use crate::hypothesis::{
    check_almost_log_concave, check_almost_monotone, convex_hull_probe, FunctionSamples,
    MonotoneClass, Verdict,
};
use crate::operators::{self, ExponentPair};
use crate::quad::QuadOpts;
use crate::{gi, poly, xray};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    /// wall-clock time; not part of the config hash
    pub timings_ms: f64,
    pub payload: Value,
}

#[derive(Debug)]
pub struct Outcome {
    pub exit: i32,
    pub report: Option<Report>,
    pub csv: Option<String>,
    pub error: Option<String>,
}

fn exit_class(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::Input(_)
        | Error::Arity { .. }
        | Error::Domain { .. }
        | Error::UnsupportedOrder { .. }
        | Error::Range(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn parse_config<T: serde::de::DeserializeOwned>(config: &Value) -> Result<T> {
    let mut track = serde_path_to_error::Track::new();
    let de = serde_path_to_error::Deserializer::new(config, &mut track);
    T::deserialize(de).map_err(|e| Error::Config {
        field: format!("/{}", track.path().to_string().replace('.', "/")),
        message: e.to_string(),
    })
}

/// Run `command` on the given raw config.  Deterministic for fixed
/// (command, config, seed, version): the payload is byte-identical.
pub fn execute(command: &str, config: &Value, seed: u64) -> Outcome {
    let start = std::time::Instant::now();
    let hash = {
        let canonical = serde_json::to_vec(config).unwrap_or_default();
        let mut h = Sha256::new();
        h.update(&canonical);
        format!("{:x}", h.finalize())
    };
    let result = match command {
        "analyze" => parse_config::<AnalyzeConfig>(config).and_then(|c| run_analyze(&c)),
        "gi" => parse_config::<GiConfig>(config).and_then(|c| run_gi(&c, seed)),
        "xray-gi" => parse_config::<XrayGiConfig>(config).and_then(|c| run_xray_gi(&c, seed)),
        "injectivity" => {
            parse_config::<InjectivityConfig>(config).and_then(|c| run_injectivity(&c, seed))
        }
        "identity-check" => {
            parse_config::<IdentityCheckConfig>(config).and_then(|c| run_identity_check(&c, seed))
        }
        "norms" => parse_config::<NormsConfig>(config).and_then(|c| run_norms(&c, seed)),
        "hull-probe" => parse_config::<HullProbeConfig>(config).and_then(|c| run_hull_probe(&c)),
        "decompose" => parse_config::<DecomposeConfig>(config).and_then(|c| run_decompose(&c)),
        "exponent-region" => {
            parse_config::<ExponentRegionConfig>(config).and_then(|c| run_exponent_region(&c))
        }
        other => Err(Error::input(format!("unknown command '{other}'"))),
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok(CommandOutput {
            payload,
            csv,
            hypothesis_violated,
        }) => Outcome {
            exit: if hypothesis_violated {
                EXIT_HYPOTHESIS
            } else {
                EXIT_OK
            },
            report: Some(Report {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config_hash: hash,
                seed,
                timings_ms: elapsed,
                payload,
            }),
            csv,
            error: None,
        },
        Err(e) => {
            let exit = exit_class(&e);
            let report = if exit == EXIT_NUMERIC {
                // numeric failures still emit a report carrying the error
                Some(Report {
                    command: command.to_string(),
                    version: env!("CARGO_PKG_VERSION").to_string(),
                    config_hash: hash,
                    seed,
                    timings_ms: elapsed,
                    payload: json!({ "error": e.to_string() }),
                })
            } else {
                None
            };
            Outcome {
                exit,
                report,
                csv: None,
                error: Some(e.to_string()),
            }
        }
    }
}

struct CommandOutput {
    payload: Value,
    csv: Option<String>,
    hypothesis_violated: bool,
}

fn run_analyze(cfg: &AnalyzeConfig) -> Result<CommandOutput> {
    let curve = cfg.curve.build()?;
    let d = curve.dim();
    let (lo, hi) = resolve_region(&curve, cfg.region)?;
    let profile = TorsionProfile::sample(&curve, lo, hi, cfg.samples)?;
    let lam_min = profile.lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let lam_max = profile
        .lambdas
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut all_pass = true;
    // |L| almost-log-concavity
    let l_samples = FunctionSamples::from_fn(
        |t| geometry::torsion(&curve, t, d).map(f64::abs),
        lo,
        hi,
        cfg.samples,
    )?;
    let log_concavity = check_almost_log_concave(&l_samples, cfg.logconcave_m)?;
    all_pass &= log_concavity.verdict == Verdict::Pass;
    // |B^k| almost-monotonicity, k = 1..d
    let mut bk_reports = Vec::new();
    for k in 1..=d {
        let entry = match FunctionSamples::from_fn(
            |t| geometry::ratio_functions(&curve, t, k).map(|(_, b)| b.abs()),
            lo,
            hi,
            cfg.samples,
        ) {
            Ok(samples) => {
                let min = samples.values.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = samples
                    .values
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max);
                let report = check_almost_monotone(&samples, cfg.monotone_c)?;
                all_pass &= report.class != MonotoneClass::Neither;
                json!({ "k": k, "min": min, "max": max, "monotone": report })
            }
            Err(e) => {
                all_pass = false;
                json!({ "k": k, "error": e.to_string() })
            }
        };
        bk_reports.push(entry);
    }
    let tau = gi::operational_tau(&curve, lo, hi, cfg.samples)
        .ok()
        .flatten();
    let payload = json!({
        "dim": d,
        "region": [lo, hi],
        "lambda": { "min": lam_min, "max": lam_max },
        "log_concavity": log_concavity,
        "bk": bk_reports,
        "operational_tau": tau,
        "verdict": if all_pass { "pass" } else { "fail" },
    });
    Ok(CommandOutput {
        payload,
        csv: Some(profile.to_csv()),
        hypothesis_violated: !all_pass,
    })
}

fn run_gi(cfg: &GiConfig, seed: u64) -> Result<CommandOutput> {
    let curve = cfg.curve.build()?;
    let (lo, hi) = resolve_region(&curve, cfg.region)?;
    let report = gi::gi_scan(&curve, lo, hi, cfg.sampler, cfg.n, seed)?;
    let violated = !(report.inf_ratio > 0.0) || report.underflow;
    let mut csv = String::from("bin_lo,bin_hi,count\n");
    for b in &report.histogram {
        csv.push_str(&format!("{},{},{}\n", b.lo, b.hi, b.count));
    }
    Ok(CommandOutput {
        payload: serde_json::to_value(&report).unwrap(),
        csv: Some(csv),
        hypothesis_violated: violated,
    })
}

fn run_xray_gi(cfg: &XrayGiConfig, seed: u64) -> Result<CommandOutput> {
    let curve = cfg.curve.build()?;
    let d = curve.dim();
    if cfg.param_box.len() != d + 1 {
        return Err(Error::Config {
            field: "/param_box".into(),
            message: format!("need {} parameter ranges, got {}", d + 1, cfg.param_box.len()),
        });
    }
    let spec = cfg.map.build();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inf = f64::INFINITY;
    let mut argmin = Vec::new();
    let mut valid = 0usize;
    let mut rejected = 0usize;
    for _ in 0..cfg.n {
        let params: Vec<f64> = cfg
            .param_box
            .iter()
            .map(|&[a, b]| rng.gen_range(a..b))
            .collect();
        match xray::xray_gi_ratio(&spec, &curve, &params) {
            Ok(r) => {
                valid += 1;
                if r < inf {
                    inf = r;
                    argmin = params;
                }
            }
            Err(_) => rejected += 1,
        }
    }
    let violated = valid == 0 || !(inf > 0.0);
    Ok(CommandOutput {
        payload: json!({
            "n": cfg.n,
            "valid": valid,
            "rejected": rejected,
            "inf_ratio": if valid > 0 { inf } else { f64::NAN },
            "argmin": argmin,
        }),
        csv: None,
        hypothesis_violated: violated,
    })
}

fn run_injectivity(cfg: &InjectivityConfig, seed: u64) -> Result<CommandOutput> {
    let curve = cfg.curve.build()?;
    let spec = cfg.map.build();
    let box_: Vec<(f64, f64)> = cfg.param_box.iter().map(|&[a, b]| (a, b)).collect();
    let report = xray::injectivity_probe(&spec, &curve, &box_, cfg.n, cfg.tol, seed)?;
    Ok(CommandOutput {
        payload: serde_json::to_value(&report).unwrap(),
        csv: None,
        hypothesis_violated: false,
    })
}

fn run_identity_check(cfg: &IdentityCheckConfig, seed: u64) -> Result<CommandOutput> {
    let curve = cfg.curve.build()?;
    let d = curve.dim();
    let (lo, hi) = resolve_region(&curve, cfg.region)?;
    let opts = QuadOpts::with_tol(cfg.quad_tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel = 0.0f64;
    let mut worst = Vec::new();
    let mut sum_rel = 0.0;
    for _ in 0..cfg.tuples {
        let mut tuple: Vec<f64>;
        loop {
            tuple = (0..d).map(|_| rng.gen_range(lo..hi)).collect();
            tuple.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if tuple.windows(2).all(|w| w[0] < w[1]) {
                break;
            }
        }
        let direct = geometry::jacobian_direct(&curve, &tuple)?;
        let recursive = geometry::jacobian_recursive(&curve, &tuple, &opts)?;
        let rel = (recursive - direct).abs() / direct.abs().max(1e-300);
        sum_rel += rel;
        if rel > max_rel {
            max_rel = rel;
            worst = tuple;
        }
    }
    Ok(CommandOutput {
        payload: json!({
            "tuples": cfg.tuples,
            "max_rel_err": max_rel,
            "mean_rel_err": sum_rel / cfg.tuples.max(1) as f64,
            "worst_tuple": worst,
        }),
        csv: None,
        hypothesis_violated: false,
    })
}

fn run_norms(cfg: &NormsConfig, seed: u64) -> Result<CommandOutput> {
    let curve = cfg.curve.build()?;
    let pq = ExponentPair::new(cfg.p, cfg.q)?;
    if let Some(sets) = &cfg.sets {
        if sets.e.boxes.is_empty() {
            return Err(Error::Config {
                field: "/sets/E/boxes".into(),
                message: "at least one box is required".into(),
            });
        }
        if sets.f.boxes.is_empty() {
            return Err(Error::Config {
                field: "/sets/F/boxes".into(),
                message: "at least one box is required".into(),
            });
        }
        let lambda = operators::pairing(&curve, &sets.e, &sets.f, &cfg.weight, &QuadOpts::default())?;
        let ratio = operators::rwt_ratio(lambda, sets.e.measure(), sets.f.measure(), &pq)?;
        let diag =
            operators::rwt_diagnostics(lambda, sets.e.measure(), sets.f.measure(), curve.dim())?;
        return Ok(CommandOutput {
            payload: json!({ "lambda": lambda, "ratio": ratio, "diagnostics": diag }),
            csv: None,
            hypothesis_violated: false,
        });
    }
    let report = operators::extremizer_search(&curve, &cfg.weight, &pq, cfg.budget, seed)?;
    let mut csv = String::from("label,ratio,lambda,alpha,beta,slack\n");
    for r in &report.records {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.label,
            r.ratio,
            r.diagnostics.lambda,
            r.diagnostics.alpha,
            r.diagnostics.beta,
            r.diagnostics.slack
        ));
    }
    Ok(CommandOutput {
        payload: serde_json::to_value(&report).unwrap(),
        csv: Some(csv),
        hypothesis_violated: false,
    })
}

fn run_hull_probe(cfg: &HullProbeConfig) -> Result<CommandOutput> {
    let curve = cfg.curve.build()?;
    let d = curve.dim();
    let (lo, hi) = resolve_region(&curve, cfg.region)?;
    let mut series = Vec::new();
    let mut n = cfg.n.max(d + 2);
    let mut ns = Vec::new();
    for _ in 0..4 {
        ns.push(n);
        if n / 2 < 2 * (d + 2) {
            break;
        }
        n /= 2;
    }
    ns.reverse();
    for &m in &ns {
        let ratio = convex_hull_probe(&curve, lo, hi, m)?;
        series.push(json!({ "n": m, "ratio": ratio }));
    }
    let final_ratio = series.last().and_then(|v| v["ratio"].as_f64()).unwrap();
    let mut csv = String::from("n,ratio\n");
    for s in &series {
        csv.push_str(&format!("{},{}\n", s["n"], s["ratio"]));
    }
    Ok(CommandOutput {
        payload: json!({ "region": [lo, hi], "series": series, "ratio": final_ratio }),
        csv: Some(csv),
        hypothesis_violated: false,
    })
}

fn run_decompose(cfg: &DecomposeConfig) -> Result<CommandOutput> {
    let curve = cfg.curve.build()?;
    let (lo, hi) = resolve_region(&curve, cfg.region)?;
    let l = poly::poly_torsion(&curve)?;
    let z = poly::real_parts_of_roots(&l)?;
    let pieces = poly::decompose(&l, &z, lo, hi)?;
    let factors = poly::verify_comparability(&pieces, &l, cfg.verify_samples)?;
    let worst = factors.iter().cloned().fold(1.0f64, f64::max);
    let mut csv = String::from("lo,hi,anchor,order,constant,comparability_factor\n");
    for (p, f) in pieces.iter().zip(&factors) {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.lo, p.hi, p.anchor, p.order, p.constant, f
        ));
    }
    Ok(CommandOutput {
        payload: json!({
            "region": [lo, hi],
            "torsion_degree": l.degree(),
            "pieces": pieces,
            "comparability_factors": factors,
            "worst_factor": worst,
        }),
        csv: Some(csv),
        hypothesis_violated: false,
    })
}

fn run_exponent_region(cfg: &ExponentRegionConfig) -> Result<CommandOutput> {
    let curve = cfg.curve.build()?;
    let region = poly::exponent_region(&curve)?;
    let mut csv = String::from("inv_p,inv_q\n");
    for v in &region.vertices {
        csv.push_str(&format!("{},{}\n", v[0], v[1]));
    }
    Ok(CommandOutput {
        payload: serde_json::to_value(&region).unwrap(),
        csv: Some(csv),
        hypothesis_violated: false,
    })
}
