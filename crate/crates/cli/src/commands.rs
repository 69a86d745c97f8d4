use std::path::{Path, PathBuf};

use pingpong_core::contraction::{exact_freeness_crosscheck, pingpong_certificate, ContractionError, FreenessCertificate};
use pingpong_core::growth::{
    default_bin_width, estimate_delta, growth_indicator_estimate, limit_cone_sample, poincare_partial_sum,
    samples_of, ConeGrowth, GrowthError, Sample, WindowPolicy,
};
use pingpong_core::io::records_to_jsonl;
use pingpong_core::orbit::Cone;
use pingpong_core::CartanVector;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::output::{unix_timestamp, OutDir};
use crate::pipeline::{build_semigroup, enumerate, load_generators, sampling_budget};
use crate::{CliError, CliResult};

/// Result of a command that ran to completion (possibly with a nonzero verdict).
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub message: String,
    pub files: Vec<PathBuf>,
}

fn out_dir(cfg: &PipelineConfig) -> CliResult<OutDir> {
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    OutDir::create(&dir)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthRow {
    pub t: f64,
    pub n: u64,
    pub log_n: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeRow {
    pub angle: f64,
    pub tau_hat: Option<f64>,
    pub sample_size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthSummary {
    pub delta_hat: f64,
    pub fit_window: (f64, f64),
    pub fit_residual: f64,
    pub fit_points: usize,
    pub bin_width: f64,
    pub sample_size: usize,
    pub counts_by_radius: std::collections::BTreeMap<usize, u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitConeSummary {
    pub floor: f64,
    pub cartan: Vec<Vec<f64>>,
    pub jordan: Vec<Vec<f64>>,
    /// Smallest simple-root value over the Cartan samples.
    pub min_root: Option<f64>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub timestamp: u64,
    pub command: String,
    pub radius: usize,
    pub records: usize,
    pub growth: GrowthSummary,
    pub poincare_at_target: Option<f64>,
    pub limit_cone: LimitConeSummary,
    pub direction: Vec<f64>,
    pub growth_indicator: Vec<(f64, ConeGrowth)>,
}

fn growth_error(e: GrowthError) -> CliError {
    match e {
        GrowthError::TooFewRecords { .. } | GrowthError::DegenerateFit => {
            CliError::Budget(format!("{e}; enlarge the radius"))
        }
        other => CliError::Config(other.to_string()),
    }
}

pub fn cmd_analyze(cfg: &PipelineConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    let gens = load_generators(cfg)?;
    let n = gens[0].dim();
    eprintln!("analyze: enumerating radius {}", cfg.radius);
    let records = enumerate(cfg, &gens)?;
    let samples = samples_of(&records);
    let bin = cfg.bin_width.unwrap_or_else(|| default_bin_width(&samples));
    let window = WindowPolicy::default();
    eprintln!("analyze: fitting δ on {} records", records.len());
    let growth = estimate_delta(&samples, bin, &window).map_err(growth_error)?;
    let limit = limit_cone_sample(&records, cfg.limit_floor, cfg.gap_tol).map_err(growth_error)?;
    let direction = match &cfg.direction {
        Some(v) => v.clone(),
        None => Cone::chamber_cover(n).axis().coords().to_vec(),
    };
    if direction.len() != n {
        return Err(CliError::Config("direction dimension differs from generators".into()));
    }
    let with_kappa: Vec<(Sample, CartanVector)> =
        records.iter().map(|r| (Sample::from(r), r.kappa.clone())).collect();
    eprintln!("analyze: growth indicator over {} angles", cfg.angles.len());
    let curve = growth_indicator_estimate(&with_kappa, &direction, &cfg.angles, bin, &window).map_err(growth_error)?;

    let out = out_dir(cfg)?;
    let growth_rows: Vec<GrowthRow> = growth
        .cumulative
        .iter()
        .map(|&(t, c)| GrowthRow {
            t,
            n: c,
            log_n: if c > 0 { (c as f64).ln() } else { f64::NEG_INFINITY },
        })
        .collect();
    let cone_rows: Vec<ConeRow> = curve
        .iter()
        .map(|(a, c)| ConeRow {
            angle: *a,
            tau_hat: c.tau_hat,
            sample_size: c.sample_size,
        })
        .collect();
    let norms: Vec<f64> = samples.iter().map(|s| s.norm).collect();
    let report = AnalyzeReport {
        timestamp: unix_timestamp(),
        command: "analyze".into(),
        radius: cfg.radius,
        records: records.len(),
        growth: GrowthSummary {
            delta_hat: growth.delta_hat,
            fit_window: growth.fit_window,
            fit_residual: growth.fit_residual,
            fit_points: growth.fit_points,
            bin_width: growth.bin_width,
            sample_size: growth.sample_size,
            counts_by_radius: growth.counts_by_radius.clone(),
        },
        poincare_at_target: (cfg.target_delta > 0.0).then(|| poincare_partial_sum(&norms, cfg.target_delta)),
        limit_cone: LimitConeSummary {
            floor: limit.floor,
            min_root: limit.cartan.iter().map(|v| v.min_root()).reduce(f64::min),
            cartan: limit.cartan.iter().map(|v| v.coords().to_vec()).collect(),
            jordan: limit.jordan.iter().map(|v| v.coords().to_vec()).collect(),
            warning: limit.warning.clone(),
        },
        direction,
        growth_indicator: curve,
    };
    let files = vec![
        out.json("report.json", &report)?,
        out.csv("growth.csv", &growth_rows)?,
        out.csv("cone.csv", &cone_rows)?,
    ];
    Ok(Outcome {
        exit_code: 0,
        message: format!("delta_hat = {:.6} from {} records", report.growth.delta_hat, report.records),
        files,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramRow {
    pub upper: f64,
    pub count: u64,
}

pub fn cmd_build_semigroup(cfg: &PipelineConfig) -> CliResult<Outcome> {
    eprintln!("build-semigroup: radius {}, ε = {}, δ = {}", cfg.radius, cfg.epsilon, cfg.target_delta);
    let built = build_semigroup(cfg)?;
    let out = out_dir(cfg)?;
    let mut files = vec![out.json("report.json", &built.report)?];
    files.push(out.text("packing.jsonl", &records_to_jsonl(&built.packing))?);
    files.push(out.csv("calibration.csv", &built.report.calibration)?);
    if let Some(cert) = &built.certificate {
        files.push(out.json("certificate.json", cert)?);
    }
    if let Some(d) = &built.report.defects {
        let rows: Vec<HistogramRow> = d.histogram.iter().map(|&(upper, count)| HistogramRow { upper, count }).collect();
        files.push(out.csv("defects.csv", &rows)?);
    }
    let samples = samples_of(&built.all_records);
    if let Ok(g) = estimate_delta(&samples, default_bin_width(&samples), &WindowPolicy::default()) {
        let rows: Vec<GrowthRow> = g
            .cumulative
            .iter()
            .map(|&(t, c)| GrowthRow {
                t,
                n: c,
                log_n: if c > 0 { (c as f64).ln() } else { f64::NEG_INFINITY },
            })
            .collect();
        files.push(out.csv("growth.csv", &rows)?);
    }
    Ok(Outcome {
        exit_code: built.report.exit_code,
        message: built.report.message.clone(),
        files,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifyReport {
    pub timestamp: u64,
    pub command: String,
    pub epsilon: f64,
    pub seed: u64,
    pub generators: usize,
    pub verdict: String,
    pub failures: Vec<String>,
}

pub fn cmd_certify(cfg: &PipelineConfig) -> CliResult<Outcome> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 0.5) {
        return Err(CliError::Config("epsilon must lie in (0, 0.5)".into()));
    }
    let gens = load_generators(cfg)?;
    if gens.len() < 2 {
        return Err(CliError::Config("certify needs at least two generators".into()));
    }
    let budget = sampling_budget(cfg);
    eprintln!("certify: {} generators at ε = {}", gens.len(), cfg.epsilon);
    let mut cert = match pingpong_certificate(&gens, cfg.epsilon, &budget) {
        Ok(c) => c,
        Err(ContractionError::NotLoxodromicAt { index }) => {
            return Err(CliError::Certificate(format!("NotLoxodromic: generator {index} has no attracting flag")))
        }
        Err(e) => return Err(CliError::Config(e.to_string())),
    };
    if let Some(len) = cfg.exact_check {
        eprintln!("certify: exact crosscheck to length {len}");
        match exact_freeness_crosscheck(&gens, len) {
            Ok(x) => cert.exact_crosscheck = Some(x),
            Err(ContractionError::BudgetExceeded(n)) => {
                return Err(CliError::Budget(format!("{n} words exceed the exact-check cap")))
            }
            Err(e) => return Err(CliError::Config(e.to_string())),
        }
        cert.finalize();
    }
    let out = out_dir(cfg)?;
    let passed = cert.verdict.passed();
    let report = CertifyReport {
        timestamp: unix_timestamp(),
        command: "certify".into(),
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        generators: gens.len(),
        verdict: if passed { "pass" } else { "fail" }.into(),
        failures: cert.failures.clone(),
    };
    let files = vec![out.json("certificate.json", &cert)?, out.json("report.json", &report)?];
    let message = if passed {
        "certificate passed".to_string()
    } else {
        format!("certificate failed: {}", cert.failures.join(", "))
    };
    Ok(Outcome {
        exit_code: if passed { 0 } else { 1 },
        message,
        files,
    })
}

/// Checks a stored certificate from its JSON alone.
pub fn cmd_revalidate(path: &Path) -> CliResult<Outcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cert: FreenessCertificate =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("certificate: {e}")))?;
    cert.revalidate().map_err(CliError::Certificate)?;
    if !cert.verdict.passed() {
        return Err(CliError::Certificate(format!("stored verdict is fail: {}", cert.failures.join(", "))));
    }
    Ok(Outcome {
        exit_code: 0,
        message: "certificate re-validates".into(),
        files: Vec::new(),
    })
}
