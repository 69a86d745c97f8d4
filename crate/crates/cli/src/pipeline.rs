//! Enumerate → filter → calibrate → pack → sum condition → certify → post-checks.

use std::collections::BTreeMap;

use pingpong_core::cartan::symmetric_space_distance;
use pingpong_core::contraction::{
    exact_freeness_crosscheck, pingpong_certificate, ContractionError, DisjointnessOverride, FreenessCertificate,
    SamplingBudget,
};
use pingpong_core::flag::{attracting_flag, repelling_flag, transversality_margin, Flag, OppositeFlag};
use pingpong_core::group::GroupElement;
use pingpong_core::growth::{
    anosov_points, anosov_slope, coarse_subadditivity, generator_sum, property_three_check, subadditivity_defect,
    AnosovFit, CoarseSubadditivity, DefectStats, PropertyThree,
};
use pingpong_core::io::{parse_generators, MatrixSpec};
use pingpong_core::orbit::{
    enumerate_ball, greedy_disjoint_pack, packing_order, zariski_heuristic, Cone, Dedup, EnumerateOptions, FilterSpec,
    OrbitError, OrbitRecord, ShadowMode, ZariskiReport,
};
use pingpong_core::symshadow::{calibrate_radius, flag_shadow_in_sym_shadow, CalibrationRow, SymError};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::{CliError, CliResult};

/// Packing radius over the largest sampled distance; fresh probes can land
/// slightly beyond the calibration sample.
pub const RADIUS_SAFETY: f64 = 1.25;

pub fn load_generators(cfg: &PipelineConfig) -> CliResult<Vec<GroupElement>> {
    let path = &cfg.generators_path;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read generators {}: {e}", path.display())))?;
    let gens = parse_generators(&text).map_err(|e| CliError::Config(format!("generators: {e}")))?;
    if let Some(n) = cfg.n {
        if gens[0].dim() != n {
            return Err(CliError::Config(format!("config says n = {n}, generators have n = {}", gens[0].dim())));
        }
    }
    Ok(gens)
}

pub fn orbit_error(e: OrbitError) -> CliError {
    match e {
        OrbitError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

pub fn enumerate(cfg: &PipelineConfig, gens: &[GroupElement]) -> CliResult<Vec<OrbitRecord>> {
    let dedup = if gens.iter().all(|g| g.exact().is_some()) {
        Dedup::Exact
    } else {
        Dedup::FloatTolerant
    };
    let opts = EnumerateOptions {
        dedup,
        symmetric: cfg.symmetric,
        node_cap: cfg.budgets.node_cap,
    };
    enumerate_ball(gens, cfg.radius, &opts).map_err(orbit_error)
}

pub fn sampling_budget(cfg: &PipelineConfig) -> SamplingBudget {
    SamplingBudget {
        samples: cfg.budgets.samples,
        seed: cfg.seed,
        gap_tol: cfg.gap_tol,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnchorReport {
    pub source: String,
    pub word: Option<Vec<usize>>,
    pub x: Flag,
    pub y: OppositeFlag,
    pub zeta: f64,
    /// ε < ζ(x, y)/8.
    pub epsilon_bound_holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Attempt {
    pub n_min: f64,
    pub width: Option<f64>,
    pub candidates: usize,
    pub radius_r: f64,
    pub packed: Vec<Vec<usize>>,
    pub generator_sum: f64,
    pub sum_condition: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSumCheck {
    pub target_delta: f64,
    pub value: f64,
    pub holds: bool,
    pub property_three: Option<PropertyThree>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checklist {
    pub contraction: bool,
    pub zariski: Option<String>,
    pub generator_sum: bool,
    pub anosov: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectedGenerator {
    pub word: Vec<usize>,
    pub matrix: MatrixSpec,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildReport {
    pub timestamp: u64,
    pub command: String,
    pub seed: u64,
    pub epsilon: f64,
    pub target_delta: f64,
    pub radius: usize,
    pub records: usize,
    pub anchors: AnchorReport,
    pub attempts: Vec<Attempt>,
    pub calibration: Vec<CalibrationRow>,
    pub selected: Vec<SelectedGenerator>,
    pub certificate_verdict: Option<String>,
    pub failures: Vec<String>,
    pub generator_sum: Option<GeneratorSumCheck>,
    pub subadditivity: Option<CoarseSubadditivity>,
    pub defects: Option<DefectStats>,
    pub anosov: Option<AnosovFit>,
    pub zariski: Option<ZariskiReport>,
    pub checklist: Option<Checklist>,
    pub notes: Vec<String>,
    pub exit_code: i32,
    pub message: String,
}

pub struct BuildOutput {
    pub report: BuildReport,
    pub certificate: Option<FreenessCertificate>,
    pub packing: Vec<OrbitRecord>,
    pub all_records: Vec<OrbitRecord>,
}

fn pick_auto_anchor(records: &[OrbitRecord], gap_tol: f64) -> Option<&OrbitRecord> {
    let mut best: Option<(&OrbitRecord, f64)> = None;
    for r in records {
        let root = r.kappa.min_root();
        if best.is_some_and(|(_, b)| root <= b) {
            continue;
        }
        if attracting_flag(&r.matrix, gap_tol).is_ok() && repelling_flag(&r.matrix, gap_tol).is_ok() {
            best = Some((r, root));
        }
    }
    best.map(|(r, _)| r)
}

fn resolve_anchors(cfg: &PipelineConfig, records: &[OrbitRecord]) -> CliResult<AnchorReport> {
    let auto = if cfg.anchor_x.explicit().is_none() || cfg.anchor_y.explicit().is_none() {
        Some(
            pick_auto_anchor(records, cfg.gap_tol)
                .ok_or_else(|| CliError::Exhausted("no loxodromic record to anchor on".into()))?,
        )
    } else {
        None
    };
    let x = match (cfg.anchor_x.explicit(), auto) {
        (Some(x), _) => x.clone(),
        (None, Some(r)) => attracting_flag(&r.matrix, cfg.gap_tol).expect("checked loxodromic"),
        (None, None) => unreachable!(),
    };
    let y = match (cfg.anchor_y.explicit(), auto) {
        (Some(y), _) => y.clone(),
        (None, Some(r)) => repelling_flag(&r.matrix, cfg.gap_tol).expect("checked loxodromic"),
        (None, None) => unreachable!(),
    };
    let n = records.first().map(|r| r.matrix.dim()).unwrap_or(x.dim());
    if x.dim() != n || y.dim() != n {
        return Err(CliError::Config("anchor dimension differs from generators".into()));
    }
    let zeta = transversality_margin(&x, &y);
    let holds = cfg.epsilon < zeta / 8.0;
    let explicit_both = auto.is_none();
    if explicit_both && !holds {
        return Err(CliError::Config(format!(
            "epsilon {} must be below ζ(anchor_x, anchor_y)/8 = {}",
            cfg.epsilon,
            zeta / 8.0
        )));
    }
    Ok(AnchorReport {
        source: if explicit_both { "explicit".into() } else { "auto".into() },
        word: auto.map(|r| r.word.clone()),
        x,
        y,
        zeta,
        epsilon_bound_holds: holds,
    })
}

/// Lower median; words in an annulus around it have comparable lengths.
fn median_norm(records: &[&OrbitRecord]) -> f64 {
    let mut norms: Vec<f64> = records.iter().map(|r| r.norm()).collect();
    if norms.is_empty() {
        return 0.0;
    }
    norms.sort_by(f64::total_cmp);
    norms[(norms.len() - 1) / 2]
}

/// Words whose enumeration stays within `cap` for `k` letters.
fn affordable_len(k: usize, wanted: usize, cap: u64) -> usize {
    let mut total: u64 = 0;
    let mut level: u64 = 1;
    for len in 1..=wanted {
        level = level.saturating_mul(k as u64);
        total = total.saturating_add(level);
        if total > cap {
            return (len - 1).max(1);
        }
    }
    wanted.max(1)
}

struct Calibrator<'a> {
    eps: f64,
    probes: usize,
    budget: &'a SamplingBudget,
    cache: BTreeMap<Vec<usize>, CalibrationRow>,
}

impl Calibrator<'_> {
    fn radius_for(&mut self, recs: &[&OrbitRecord]) -> CliResult<(f64, usize)> {
        let mut r: f64 = 0.0;
        let mut used = 0;
        for rec in recs {
            if !self.cache.contains_key(&rec.word) {
                match calibrate_radius(std::slice::from_ref(&rec.matrix), self.eps, self.probes, self.budget) {
                    Ok(row) => {
                        self.cache.insert(rec.word.clone(), row);
                    }
                    Err(SymError::Contraction(_)) | Err(SymError::Lie(_)) => continue,
                    Err(e) => return Err(CliError::Config(e.to_string())),
                }
            }
            r = r.max(RADIUS_SAFETY * self.cache[&rec.word].r_min_zero_violation);
            used += 1;
        }
        Ok((r, used))
    }
}

fn contraction_error(e: ContractionError) -> CliError {
    match e {
        ContractionError::NotLoxodromicAt { index } => {
            CliError::Certificate(format!("NotLoxodromic: generator {index} has no attracting flag"))
        }
        ContractionError::NotLoxodromic => CliError::Certificate("NotLoxodromic".into()),
        ContractionError::BudgetExceeded(n) => CliError::Budget(format!("{n} words exceed the exact-check cap")),
        other => CliError::Config(other.to_string()),
    }
}

/// Runs the full build; `Err` only for failures that leave nothing to report.
pub fn build_semigroup(cfg: &PipelineConfig) -> CliResult<BuildOutput> {
    cfg.validate()?;
    let gens = load_generators(cfg)?;
    let records = enumerate(cfg, &gens)?;
    let n = gens[0].dim();
    let anchors = resolve_anchors(cfg, &records)?;
    let cone = cfg.cone.clone().unwrap_or_else(|| Cone::chamber_cover(n));
    if cone.axis().dim() != n {
        return Err(CliError::Config("cone dimension differs from generators".into()));
    }
    let budget = sampling_budget(cfg);
    let mut notes = Vec::new();
    if !anchors.epsilon_bound_holds {
        notes.push(format!(
            "auto anchors give ζ(x, y) = {:.4}; ε < ζ/8 does not hold, flag filter runs unchecked",
            anchors.zeta
        ));
    }
    let filter_eps = cfg.epsilon / 2.0;
    let base_spec = FilterSpec::new_unchecked(cone, anchors.x.clone(), anchors.y.clone(), f64::MIN, None, filter_eps)
        .map_err(orbit_error)?;
    let eligible: Vec<&OrbitRecord> = records
        .iter()
        .filter(|r| base_spec.accepts(r) && attracting_flag(&r.matrix, cfg.gap_tol).is_ok())
        .collect();
    let mut pinned_records = Vec::new();
    for w in &cfg.pinned {
        if w.iter().any(|&l| l >= gens.len()) {
            return Err(CliError::Config(format!("pinned word {w:?} uses an unknown letter")));
        }
        let g = GroupElement::word(&gens, w);
        pinned_records.push(OrbitRecord::from_word(w.clone(), g).map_err(orbit_error)?);
    }

    let mut report = BuildReport {
        timestamp: crate::output::unix_timestamp(),
        command: "build-semigroup".into(),
        seed: cfg.seed,
        epsilon: cfg.epsilon,
        target_delta: cfg.target_delta,
        radius: cfg.radius,
        records: records.len(),
        anchors,
        attempts: Vec::new(),
        calibration: Vec::new(),
        selected: Vec::new(),
        certificate_verdict: None,
        failures: Vec::new(),
        generator_sum: None,
        subadditivity: None,
        defects: None,
        anosov: None,
        zariski: None,
        checklist: None,
        notes,
        exit_code: 4,
        message: String::new(),
    };

    let n_min = cfg.n_min.unwrap_or_else(|| median_norm(&eligible));
    let mut calibrator = Calibrator {
        eps: cfg.epsilon,
        probes: cfg.budgets.probes,
        budget: &budget,
        cache: BTreeMap::new(),
    };
    let retries = if cfg.width.is_some() { cfg.budgets.max_retries } else { 0 };
    let mut selection: Option<(Vec<OrbitRecord>, f64)> = None;
    if eligible.is_empty() && pinned_records.is_empty() {
        report.message = "no enumerated record passes the cone and flag filters".into();
        return Ok(finish(report, None, Vec::new(), records));
    }
    for attempt in 0..=retries {
        let width = cfg.width.map(|w| w * 2f64.powi(attempt as i32));
        let mut candidates: Vec<OrbitRecord> = pinned_records.clone();
        for r in &eligible {
            let norm = r.norm();
            let inside = norm >= n_min && width.is_none_or(|w| norm < n_min + w);
            if inside && !candidates.iter().any(|c| c.word == r.word) {
                candidates.push((*r).clone());
            }
        }
        let mut attempt_report = Attempt {
            n_min,
            width,
            candidates: candidates.len(),
            radius_r: 0.0,
            packed: Vec::new(),
            generator_sum: 0.0,
            sum_condition: false,
        };
        if candidates.len() < 2 {
            report.attempts.push(attempt_report);
            continue;
        }
        let order = packing_order(&candidates);
        let mut calib: Vec<&OrbitRecord> = candidates[..pinned_records.len()].iter().collect();
        calib.extend(
            order
                .iter()
                .filter(|&&i| i >= pinned_records.len())
                .take(cfg.budgets.calibration_elements)
                .map(|&i| &candidates[i]),
        );
        let (r, used) = calibrator.radius_for(&calib)?;
        if used == 0 || !(r > 0.0) {
            report.attempts.push(attempt_report);
            continue;
        }
        let pinned_idx: Vec<usize> = (0..pinned_records.len()).collect();
        let packed = greedy_disjoint_pack(&candidates, r, ShadowMode::SymmetricSpace, &pinned_idx).map_err(orbit_error)?;
        let chosen: Vec<OrbitRecord> = packed.iter().map(|&i| candidates[i].clone()).collect();
        let norms: Vec<f64> = chosen.iter().map(|c| c.norm()).collect();
        let sum = generator_sum(&norms, cfg.target_delta);
        attempt_report.radius_r = r;
        attempt_report.packed = chosen.iter().map(|c| c.word.clone()).collect();
        attempt_report.generator_sum = sum;
        attempt_report.sum_condition = sum >= 1.0 && chosen.len() >= 2;
        let ok = attempt_report.sum_condition;
        report.attempts.push(attempt_report);
        if ok {
            selection = Some((chosen, r));
            break;
        }
    }
    report.calibration = calibrator.cache.values().cloned().collect();
    let Some((chosen, r)) = selection else {
        report.message = format!(
            "no annulus within {} widenings reached Σ exp(−δ‖κ‖) ≥ 1 at δ = {}",
            retries, cfg.target_delta
        );
        return Ok(finish(report, None, Vec::new(), records));
    };

    report.selected = chosen
        .iter()
        .map(|c| SelectedGenerator {
            word: c.word.clone(),
            matrix: MatrixSpec::from_element(&c.matrix),
            norm: c.norm(),
        })
        .collect();
    let s: Vec<GroupElement> = chosen.iter().map(|c| c.matrix.clone()).collect();
    let mut cert = match pingpong_certificate(&s, cfg.epsilon, &budget) {
        Ok(c) => c,
        Err(e) => {
            let err = contraction_error(e);
            report.failures = vec![err.to_string()];
            report.message = err.to_string();
            report.exit_code = err.exit_code();
            return Ok(finish_with_code(report, None, chosen, records));
        }
    };
    add_sym_overrides(&mut cert, &s, r, cfg, &budget, &mut report.notes)?;
    if let Some(len) = cfg.exact_check {
        match exact_freeness_crosscheck(&s, len) {
            Ok(x) => cert.exact_crosscheck = Some(x),
            Err(ContractionError::ExactEntriesMissing(i)) => {
                report.notes.push(format!("exact check skipped: selected generator {i} has no exact entries"))
            }
            Err(e) => return Err(contraction_error(e)),
        }
    }
    cert.finalize();

    post_checks(&mut report, &s, cfg)?;
    let passed = cert.verdict.passed();
    report.certificate_verdict = Some(if passed { "pass" } else { "fail" }.into());
    report.failures = cert.failures.clone();
    report.checklist = Some(Checklist {
        contraction: cert.per_generator.iter().all(|c| c.passed()),
        zariski: report.zariski.as_ref().map(|z| z.verdict.clone()),
        generator_sum: report.generator_sum.as_ref().is_some_and(|g| g.holds),
        anosov: report.anosov.as_ref().map(|a| a.pass),
    });
    if passed {
        report.exit_code = 0;
        report.message = format!("certified free semigroup on {} generators", s.len());
    } else {
        report.exit_code = 1;
        report.message = format!("certificate failed: {}", cert.failures.join(", "));
    }
    Ok(finish_with_code(report, Some(cert), chosen, records))
}

fn finish(mut report: BuildReport, cert: Option<FreenessCertificate>, packing: Vec<OrbitRecord>, all: Vec<OrbitRecord>) -> BuildOutput {
    report.exit_code = 4;
    finish_with_code(report, cert, packing, all)
}

fn finish_with_code(
    report: BuildReport,
    certificate: Option<FreenessCertificate>,
    packing: Vec<OrbitRecord>,
    all_records: Vec<OrbitRecord>,
) -> BuildOutput {
    BuildOutput {
        report,
        certificate,
        packing,
        all_records,
    }
}

/// Pairs whose attracting flags are too close for the flag test get the
/// symmetric-space argument instead, when it applies.
fn add_sym_overrides(
    cert: &mut FreenessCertificate,
    s: &[GroupElement],
    r: f64,
    cfg: &PipelineConfig,
    budget: &SamplingBudget,
    notes: &mut Vec<String>,
) -> CliResult<()> {
    let eps = cfg.epsilon;
    let probe_budget = SamplingBudget {
        seed: budget.seed.wrapping_add(1),
        ..budget.clone()
    };
    let mut inclusion: BTreeMap<usize, Option<usize>> = BTreeMap::new();
    let mut included = |i: usize| -> CliResult<Option<usize>> {
        if let Some(v) = inclusion.get(&i) {
            return Ok(*v);
        }
        let v = match flag_shadow_in_sym_shadow(&s[i], eps, r, cfg.budgets.probes, &probe_budget) {
            Ok(rep) if rep.holds && rep.probes > 0 => Some(rep.probes),
            Ok(_) | Err(SymError::NotCertified) | Err(SymError::Contraction(_)) => None,
            Err(e) => return Err(CliError::Config(e.to_string())),
        };
        inclusion.insert(i, v);
        Ok(v)
    };
    let k = s.len();
    for i in 0..k {
        for j in (i + 1)..k {
            if cert.shadow_disjointness[i][j] > 2.0 * eps {
                continue;
            }
            let (Some(pi), Some(pj)) = (included(i)?, included(j)?) else {
                notes.push(format!("no symmetric-space evidence for pair ({i}, {j})"));
                continue;
            };
            let d = symmetric_space_distance(&s[i], &s[j]).map_err(|e| CliError::Config(e.to_string()))?;
            let kappa = |g: &GroupElement| pingpong_core::cartan::cartan_projection(g).expect("group element");
            let threshold = 4.0 * r + kappa(&s[i]).distance(&kappa(&s[j]));
            let o = DisjointnessOverride {
                i,
                j,
                radius: r,
                distance: d,
                threshold,
                inclusion_probes: pi + pj,
            };
            if o.valid() {
                cert.disjointness_overrides.push(o);
            } else {
                notes.push(format!("pair ({i}, {j}): d_X = {d:.4} does not exceed {threshold:.4}"));
            }
        }
    }
    Ok(())
}

fn post_checks(report: &mut BuildReport, s: &[GroupElement], cfg: &PipelineConfig) -> CliResult<()> {
    let k = s.len();
    let norms: Vec<f64> = report.selected.iter().map(|g| g.norm).collect();
    let value = generator_sum(&norms, cfg.target_delta);
    let p3_len = affordable_len(k, 5, cfg.budgets.check_words / k as u64);
    let property_three = property_three_check(s, cfg.target_delta, p3_len).ok();
    report.generator_sum = Some(GeneratorSumCheck {
        target_delta: cfg.target_delta,
        value,
        holds: value >= 1.0,
        property_three,
    });

    let sub_len = {
        let mut l = 1;
        for cand in 1..=3 {
            let words: u64 = (1..=cand).map(|i| (k as u64).saturating_pow(i as u32)).sum();
            if words.saturating_mul(words) <= cfg.budgets.pair_budget as u64 {
                l = cand;
            }
        }
        l
    };
    report.subadditivity = coarse_subadditivity(s, sub_len, &report.anchors.x).ok();

    let check_len = affordable_len(k, cfg.budgets.check_len, cfg.budgets.check_words);
    let words = enumerate_ball(s, check_len, &EnumerateOptions::default()).map_err(orbit_error)?;
    let elements: Vec<GroupElement> = words
        .iter()
        .filter(|w| w.length() <= sub_len)
        .map(|w| w.matrix.clone())
        .collect();
    report.defects = subadditivity_defect(&elements, cfg.budgets.pair_budget, cfg.seed).ok();
    report.anosov = anosov_slope(&anosov_points(&words)).ok();
    // Exact products keep the span test free of roundoff on long words.
    let zariski_words = if s.iter().all(|g| g.exact().is_some()) {
        let opts = EnumerateOptions {
            dedup: Dedup::Exact,
            ..EnumerateOptions::default()
        };
        enumerate_ball(s, check_len.min(3), &opts).map_err(orbit_error)?
    } else {
        words.clone()
    };
    report.zariski = zariski_heuristic(&zariski_words, cfg.gap_tol).ok();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affordable_lengths() {
        assert_eq!(affordable_len(2, 8, 510), 8);
        assert_eq!(affordable_len(2, 8, 509), 7);
        assert_eq!(affordable_len(100, 8, 10), 1);
    }
}
