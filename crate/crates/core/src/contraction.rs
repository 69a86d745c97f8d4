//! ε-contraction certificates, the sufficient criterion for 2ε-contraction,
//! flag shadows, shadow inclusion, ping-pong freeness certificates and the
//! exact word-collision cross-check.
//!
//! All ε-neighbourhoods of the non-transverse locus are measured with the
//! transversality margin ζ. Certificates are Monte-Carlo witnesses: the
//! Lipschitz estimate is a sampled maximum times [`LIPSCHITZ_SAFETY`].

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flag::{
    attracting_flag, flag_distance, opposite_distance, repelling_flag, transversality_margin, Flag,
    FlagError, OppositeFlag,
};
use crate::group::GroupElement;
use crate::linalg::max_abs_diff;
use crate::rational::RationalMatrix;
use crate::sampling::{perturb_flag, sample_band, sample_region, seeded_rng};

pub const DEFAULT_SAMPLES: usize = 4000;
pub const DEFAULT_GAP_TOL: f64 = 1e-6;
pub const MIN_SAMPLES: usize = 1000;
pub const LIPSCHITZ_SAFETY: f64 = 1.5;
/// Step used for the local (near-pair) Lipschitz probes.
const NEAR_STEP: f64 = 1e-4;
/// Cap on enumerated words for the exact cross-check.
pub const EXACT_WORD_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContractionError {
    #[error("element is not loxodromic")]
    NotLoxodromic,
    #[error("generator {index} is not loxodromic")]
    NotLoxodromicAt { index: usize },
    #[error("sampler could not populate the admissible region (epsilon too large?)")]
    InsufficientBudget,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(Hypothesis),
    #[error("element is not certified contracting")]
    NotCertified,
    #[error("exact entries missing for generator {0}")]
    ExactEntriesMissing(usize),
    #[error("word budget exceeded: {0} words")]
    BudgetExceeded(u64),
    #[error(transparent)]
    Flag(FlagError),
}

impl From<FlagError> for ContractionError {
    fn from(e: FlagError) -> Self {
        match e {
            FlagError::NotLoxodromic { .. } => ContractionError::NotLoxodromic,
            other => ContractionError::Flag(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Separation,
    ImageInBall,
    Lipschitz,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Hypothesis::Separation => "separation ζ(x⁺, y⁻) ≥ 6ε",
            Hypothesis::ImageInBall => "image inside the ε-ball of x⁺",
            Hypothesis::Lipschitz => "ε-Lipschitz on the admissible region",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingBudget {
    pub samples: usize,
    pub seed: u64,
    pub gap_tol: f64,
}

impl Default for SamplingBudget {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            gap_tol: DEFAULT_GAP_TOL,
        }
    }
}

impl SamplingBudget {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionCertificate {
    pub epsilon: f64,
    pub element_id: String,
    pub attracting: Flag,
    pub repelling: OppositeFlag,
    /// ζ(x⁺, x⁻) − 2ε.
    pub margin_a: f64,
    /// max sampled d(g·f, x⁺).
    pub image_radius: f64,
    /// Sampled maximum Lipschitz ratio before the safety factor.
    pub lipschitz_observed: f64,
    /// `LIPSCHITZ_SAFETY × lipschitz_observed`.
    pub lipschitz_bound: f64,
    pub samples: usize,
    pub seed: u64,
    pub verdict: Verdict,
}

impl ContractionCertificate {
    /// Recomputes the verdict from the stored margins.
    pub fn consistent(&self) -> bool {
        let expected = self.margin_a >= 0.0
            && self.image_radius <= self.epsilon
            && self.lipschitz_bound <= self.epsilon;
        (self.lipschitz_bound - LIPSCHITZ_SAFETY * self.lipschitz_observed).abs()
            <= 1e-12 * (1.0 + self.lipschitz_bound)
            && Verdict::from_bool(expected) == self.verdict
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

pub fn element_id(g: &GroupElement) -> String {
    format!("{:016x}", g.fingerprint())
}

/// Flags from the admissible region `{ζ(·, y) ≥ eps}`: half uniform, half from
/// the band `eps ≤ ζ ≤ 1.1·eps`.
pub fn admissible_samples(
    y: &OppositeFlag,
    eps: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Flag>, ContractionError> {
    let uniform = count - count / 2;
    let mut out = Vec::with_capacity(count);
    for _ in 0..uniform {
        let f = sample_region(y, eps, 2000, rng).ok_or(ContractionError::InsufficientBudget)?;
        out.push(f);
    }
    for _ in 0..count / 2 {
        let f = sample_band(y, eps, 200, rng).ok_or(ContractionError::InsufficientBudget)?;
        out.push(f);
    }
    Ok(out)
}

/// Evidence gathered by pushing admissible flags through `g`.
struct PushEvidence {
    image_radius: f64,
    lipschitz: f64,
}

fn push_evidence(
    g: &GroupElement,
    target: &Flag,
    y: &OppositeFlag,
    eps: f64,
    samples: &[Flag],
    rng: &mut ChaCha8Rng,
) -> PushEvidence {
    let images: Vec<Flag> = samples.iter().map(|f| f.act(g)).collect();
    let image_radius = images
        .iter()
        .map(|im| flag_distance(im, target))
        .fold(0.0, f64::max);
    let mut lipschitz: f64 = 0.0;
    let mut ratio = |a: &Flag, b: &Flag, ga: &Flag, gb: &Flag| {
        let d = flag_distance(a, b);
        if d > 1e-9 {
            lipschitz = lipschitz.max(flag_distance(ga, gb) / d);
        }
    };
    // Antithetic near pairs: ±δ along the same random direction, kept only if admissible.
    for (f, gf) in samples.iter().zip(&images) {
        let seed: u64 = rng.random();
        for sign in [1.0, -1.0] {
            let mut local = seeded_rng(seed, 0);
            let p = perturb_flag(f, sign * NEAR_STEP, &mut local);
            if transversality_margin(&p, y) >= eps {
                let gp = p.act(g);
                ratio(f, &p, gf, &gp);
            }
        }
    }
    // Far pairs: consecutive samples.
    for i in 1..samples.len() {
        ratio(&samples[i - 1], &samples[i], &images[i - 1], &images[i]);
    }
    PushEvidence {
        image_radius,
        lipschitz,
    }
}

fn validate_params(eps: f64, budget: &SamplingBudget) -> Result<(), ContractionError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ContractionError::InvalidParameter(format!("epsilon {eps} outside (0, 1)")));
    }
    if budget.samples < MIN_SAMPLES {
        return Err(ContractionError::InvalidParameter(format!(
            "budget {} below {MIN_SAMPLES} samples",
            budget.samples
        )));
    }
    if !(budget.gap_tol > 0.0) {
        return Err(ContractionError::InvalidParameter("gap_tol must be positive".into()));
    }
    Ok(())
}

/// Tests whether `g` is ε-contracting (ζ-variant) by sampling.
pub fn check_contracting(
    g: &GroupElement,
    eps: f64,
    budget: &SamplingBudget,
) -> Result<ContractionCertificate, ContractionError> {
    validate_params(eps, budget)?;
    let plus = attracting_flag(g, budget.gap_tol)?;
    let minus = repelling_flag(g, budget.gap_tol)?;
    let margin_a = transversality_margin(&plus, &minus) - 2.0 * eps;
    let mut rng = seeded_rng(g.fingerprint(), budget.seed);
    let samples = admissible_samples(&minus, eps, budget.samples, &mut rng)?;
    let ev = push_evidence(g, &plus, &minus, eps, &samples, &mut rng);
    let lipschitz_bound = LIPSCHITZ_SAFETY * ev.lipschitz;
    let verdict = Verdict::from_bool(margin_a >= 0.0 && ev.image_radius <= eps && lipschitz_bound <= eps);
    Ok(ContractionCertificate {
        epsilon: eps,
        element_id: element_id(g),
        attracting: plus,
        repelling: minus,
        margin_a,
        image_radius: ev.image_radius,
        lipschitz_observed: ev.lipschitz,
        lipschitz_bound,
        samples: budget.samples,
        seed: budget.seed,
        verdict,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionOutcome {
    /// 2ε certificate of `g`.
    pub certificate: ContractionCertificate,
    /// d(x_g⁺, x⁺).
    pub attracting_offset: f64,
    /// opposite-flag distance between x_g⁻ and y⁻.
    pub repelling_offset: f64,
    pub image_radius: f64,
    pub lipschitz_bound: f64,
    pub holds: bool,
}

/// If `g` maps `{ζ(·, y⁻) ≥ ε}` into the ε-ball of `x⁺` ε-Lipschitzly, with
/// ζ(x⁺, y⁻) ≥ 6ε, then `g` should be 2ε-contracting with fixed data near (x⁺, y⁻).
pub fn criterion_42(
    g: &GroupElement,
    x_plus: &Flag,
    y_minus: &OppositeFlag,
    eps: f64,
    budget: &SamplingBudget,
) -> Result<CriterionOutcome, ContractionError> {
    validate_params(eps, budget)?;
    let sep = transversality_margin(x_plus, y_minus);
    if sep < 6.0 * eps {
        return Err(ContractionError::Precondition(format!(
            "ζ(x⁺, y⁻) = {sep:.6} < 6ε = {:.6}",
            6.0 * eps
        )));
    }
    let mut rng = seeded_rng(g.fingerprint() ^ 0x42, budget.seed);
    let samples = admissible_samples(y_minus, eps, budget.samples, &mut rng)?;
    let ev = push_evidence(g, x_plus, y_minus, eps, &samples, &mut rng);
    if ev.image_radius > eps {
        return Err(ContractionError::HypothesisViolated(Hypothesis::ImageInBall));
    }
    let lipschitz_bound = LIPSCHITZ_SAFETY * ev.lipschitz;
    if lipschitz_bound > eps {
        return Err(ContractionError::HypothesisViolated(Hypothesis::Lipschitz));
    }
    if 2.0 * eps >= 1.0 {
        return Err(ContractionError::InvalidParameter("2ε must be below 1".into()));
    }
    let certificate = check_contracting(g, 2.0 * eps, budget)?;
    let attracting_offset = flag_distance(&certificate.attracting, x_plus);
    let repelling_offset = opposite_distance(&certificate.repelling, y_minus);
    let holds = certificate.passed() && attracting_offset <= eps && repelling_offset <= eps;
    Ok(CriterionOutcome {
        certificate,
        attracting_offset,
        repelling_offset,
        image_radius: ev.image_radius,
        lipschitz_bound,
        holds,
    })
}

/// The flag shadow S_r(g) = g(F ∖ N_r(Z_{x_g⁻})).
#[derive(Debug, Clone)]
pub struct Shadow {
    pub element: GroupElement,
    pub r: f64,
    pub center: Flag,
    pub repelling: OppositeFlag,
    /// Sampled max distance of shadow points from the center.
    pub containment_radius: f64,
}

impl Shadow {
    pub fn new(g: &GroupElement, r: f64, budget: &SamplingBudget) -> Result<Self, ContractionError> {
        if !(r > 0.0 && r < 1.0) {
            return Err(ContractionError::InvalidParameter(format!("shadow radius {r} outside (0, 1)")));
        }
        let center = attracting_flag(g, budget.gap_tol)?;
        let repelling = repelling_flag(g, budget.gap_tol)?;
        let mut rng = seeded_rng(g.fingerprint() ^ 0x5AD0, budget.seed);
        let samples = admissible_samples(&repelling, r, budget.samples.max(2), &mut rng)?;
        let containment_radius = samples
            .iter()
            .map(|f| flag_distance(&f.act(g), &center))
            .fold(0.0, f64::max);
        Ok(Self {
            element: g.clone(),
            r,
            center,
            repelling,
            containment_radius,
        })
    }

    /// Points of the shadow obtained by pushing admissible flags through `g`.
    pub fn sample_points(&self, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Flag>, ContractionError> {
        Ok(admissible_samples(&self.repelling, self.r, count, rng)?
            .iter()
            .map(|f| f.act(&self.element))
            .collect())
    }
}

pub fn shadow_membership(s: &Shadow, f: &Flag) -> bool {
    let back = f.act(&s.element.inverse());
    transversality_margin(&back, &s.repelling) >= s.r
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionOutcome {
    pub holds: bool,
    pub probes: usize,
    pub violations: usize,
    /// Smallest observed ζ(γ⁻¹p, x_γ⁻) over probes p.
    pub min_margin: f64,
}

/// Samples S_{2ε}(η) and counts points outside S_{4ε}(γ); no certification required.
pub fn shadow_inclusion_probe(
    gamma: &GroupElement,
    eta: &GroupElement,
    eps: f64,
    budget: &SamplingBudget,
) -> Result<InclusionOutcome, ContractionError> {
    let eta_minus = repelling_flag(eta, budget.gap_tol)?;
    let gamma_minus = repelling_flag(gamma, budget.gap_tol)?;
    let gamma_inv = gamma.inverse();
    let mut rng = seeded_rng(eta.fingerprint() ^ gamma.fingerprint().rotate_left(17), budget.seed);
    let r = (2.0 * eps).min(0.999);
    let samples = admissible_samples(&eta_minus, r, budget.samples, &mut rng)?;
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for f in &samples {
        let p = f.act(eta);
        let z = transversality_margin(&p.act(&gamma_inv), &gamma_minus);
        min_margin = min_margin.min(z);
        if z < 4.0 * eps {
            violations += 1;
        }
    }
    Ok(InclusionOutcome {
        holds: violations == 0,
        probes: samples.len(),
        violations,
        min_margin,
    })
}

/// Checks S_{2ε}(η) ⊂ S_{4ε}(γ) for η = γ·ζ, both certified at ε or 2ε.
pub fn shadow_inclusion_check(
    gamma: &GroupElement,
    eta: &GroupElement,
    zeta_gen: &GroupElement,
    eps: f64,
    budget: &SamplingBudget,
) -> Result<InclusionOutcome, ContractionError> {
    let product = gamma.mul_float(zeta_gen);
    let scale = eta.matrix().amax().max(1.0);
    if max_abs_diff(product.matrix(), eta.matrix()) > 1e-9 * scale {
        return Err(ContractionError::Precondition("eta is not gamma·zeta".into()));
    }
    for h in [gamma, eta] {
        let certified = [eps, 2.0 * eps]
            .iter()
            .filter(|&&e| e < 1.0)
            .any(|&e| check_contracting(h, e, budget).map(|c| c.passed()).unwrap_or(false));
        if !certified {
            return Err(ContractionError::NotCertified);
        }
    }
    shadow_inclusion_probe(gamma, eta, eps, budget)
}

/// Exact cross-check summary stored in a freeness certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactCrosscheck {
    pub max_len: usize,
    pub words: u64,
    pub collisions: u64,
    pub witnesses: Vec<(Vec<usize>, Vec<usize>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreenessCertificate {
    pub epsilon: f64,
    pub generators: Vec<String>,
    pub per_generator: Vec<ContractionCertificate>,
    /// ζ(x_i⁺, x_j⁻); the diagonal holds each generator's own margin.
    pub pairwise_separation: Vec<Vec<f64>>,
    /// d(x_i⁺, x_j⁺).
    pub shadow_disjointness: Vec<Vec<f64>>,
    /// Pairs certified disjoint by a route other than center separation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disjointness_overrides: Vec<DisjointnessOverride>,
    pub failures: Vec<String>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_crosscheck: Option<ExactCrosscheck>,
}

/// Evidence that S_{2ε}(g_i) ∩ S_{2ε}(g_j) = ∅ via symmetric-space shadows:
/// both flag shadows sit inside O_R(o, g·o), and those two are disjoint
/// because d_X(g_i·o, g_j·o) > 4R + ‖κ(g_i) − κ(g_j)‖.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisjointnessOverride {
    pub i: usize,
    pub j: usize,
    pub radius: f64,
    pub distance: f64,
    pub threshold: f64,
    pub inclusion_probes: usize,
}

impl DisjointnessOverride {
    pub fn valid(&self) -> bool {
        self.distance > self.threshold && self.inclusion_probes > 0
    }
}

impl FreenessCertificate {
    /// Recomputes failures and verdict from the stored margins only.
    pub fn recompute_failures(&self) -> Vec<String> {
        let eps = self.epsilon;
        let k = self.per_generator.len();
        let mut failures = Vec::new();
        for (i, c) in self.per_generator.iter().enumerate() {
            if !c.passed() {
                failures.push(format!("contraction[{i}]"));
            }
        }
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                if !(self.pairwise_separation[i][j] >= 6.0 * eps) {
                    failures.push(format!("pairwise_separation[{i}][{j}]"));
                }
                let overridden = self
                    .disjointness_overrides
                    .iter()
                    .any(|o| o.valid() && ((o.i, o.j) == (i, j) || (o.i, o.j) == (j, i)));
                if !(self.shadow_disjointness[i][j] > 2.0 * eps) && !overridden {
                    failures.push(format!("shadow_disjointness[{i}][{j}]"));
                }
            }
        }
        if let Some(x) = &self.exact_crosscheck {
            if x.collisions > 0 {
                failures.push("exact_crosscheck".into());
            }
        }
        failures
    }

    pub fn finalize(&mut self) {
        self.failures = self.recompute_failures();
        self.verdict = Verdict::from_bool(self.failures.is_empty());
    }

    /// Structural and numerical self-consistency of a stored certificate.
    pub fn revalidate(&self) -> Result<(), String> {
        let k = self.per_generator.len();
        if k < 2 || self.generators.len() != k {
            return Err("generator count mismatch".into());
        }
        if self.pairwise_separation.len() != k
            || self.shadow_disjointness.len() != k
            || self.pairwise_separation.iter().chain(&self.shadow_disjointness).any(|r| r.len() != k)
        {
            return Err("margin matrices have wrong shape".into());
        }
        for (i, c) in self.per_generator.iter().enumerate() {
            if !c.consistent() {
                return Err(format!("certificate {i} verdict disagrees with its margins"));
            }
            if c.element_id != self.generators[i] {
                return Err(format!("certificate {i} refers to another element"));
            }
            if (c.epsilon - self.epsilon).abs() > 0.0 {
                return Err(format!("certificate {i} uses a different epsilon"));
            }
            let sep = transversality_margin(&c.attracting, &c.repelling);
            if (sep - 2.0 * c.epsilon - c.margin_a).abs() > 1e-9 {
                return Err(format!("certificate {i} margin_a does not match its flags"));
            }
        }
        for i in 0..k {
            for j in 0..k {
                let a = &self.per_generator[i];
                let b = &self.per_generator[j];
                let sep = transversality_margin(&a.attracting, &b.repelling);
                if (sep - self.pairwise_separation[i][j]).abs() > 1e-9 {
                    return Err(format!("pairwise_separation[{i}][{j}] does not match stored flags"));
                }
                let d = flag_distance(&a.attracting, &b.attracting);
                if (d - self.shadow_disjointness[i][j]).abs() > 1e-9 {
                    return Err(format!("shadow_disjointness[{i}][{j}] does not match stored flags"));
                }
            }
        }
        let failures = self.recompute_failures();
        if failures != self.failures {
            return Err(format!("recorded failures {:?} differ from recomputed {:?}", self.failures, failures));
        }
        if Verdict::from_bool(failures.is_empty()) != self.verdict {
            return Err("verdict disagrees with failures".into());
        }
        Ok(())
    }
}

/// Ping-pong witness for the semigroup generated by `gens`.
pub fn pingpong_certificate(
    gens: &[GroupElement],
    eps: f64,
    budget: &SamplingBudget,
) -> Result<FreenessCertificate, ContractionError> {
    if gens.len() < 2 {
        return Err(ContractionError::InvalidParameter("need at least 2 generators".into()));
    }
    validate_params(eps, budget)?;
    let per_generator: Vec<ContractionCertificate> = gens
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            check_contracting(g, eps, budget).map_err(|e| match e {
                ContractionError::NotLoxodromic => ContractionError::NotLoxodromicAt { index: i },
                other => other,
            })
        })
        .collect::<Result<_, _>>()?;
    let k = gens.len();
    let pairwise_separation = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| transversality_margin(&per_generator[i].attracting, &per_generator[j].repelling))
                .collect()
        })
        .collect();
    let shadow_disjointness = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| flag_distance(&per_generator[i].attracting, &per_generator[j].attracting))
                .collect()
        })
        .collect();
    let mut cert = FreenessCertificate {
        epsilon: eps,
        generators: gens.iter().map(element_id).collect(),
        per_generator,
        pairwise_separation,
        shadow_disjointness,
        disjointness_overrides: Vec::new(),
        failures: Vec::new(),
        verdict: Verdict::Fail,
        exact_crosscheck: None,
    };
    cert.finalize();
    Ok(cert)
}

/// Enumerates all nonempty words up to `max_len` exactly and counts pairs of
/// distinct words with equal matrices.
pub fn exact_freeness_crosscheck(
    gens: &[GroupElement],
    max_len: usize,
) -> Result<ExactCrosscheck, ContractionError> {
    if max_len < 1 {
        return Err(ContractionError::InvalidParameter("max_len must be at least 1".into()));
    }
    let exact: Vec<&RationalMatrix> = gens
        .iter()
        .enumerate()
        .map(|(i, g)| g.exact().ok_or(ContractionError::ExactEntriesMissing(i)))
        .collect::<Result<_, _>>()?;
    let k = gens.len() as u64;
    let mut total: u64 = 0;
    let mut level: u64 = 1;
    for _ in 0..max_len {
        level = level.saturating_mul(k);
        total = total.saturating_add(level);
        if total > EXACT_WORD_CAP {
            return Err(ContractionError::BudgetExceeded(total));
        }
    }
    let mut seen: HashMap<RationalMatrix, (Vec<usize>, u64)> = HashMap::new();
    let mut collisions = 0u64;
    let mut witnesses = Vec::new();
    let mut frontier: Vec<(Vec<usize>, RationalMatrix)> = exact
        .iter()
        .enumerate()
        .map(|(i, m)| (vec![i], (*m).clone()))
        .collect();
    let mut words = 0u64;
    for len in 1..=max_len {
        for (w, m) in &frontier {
            words += 1;
            match seen.get_mut(m) {
                Some((first, count)) => {
                    collisions += *count;
                    if witnesses.len() < 16 {
                        witnesses.push((first.clone(), w.clone()));
                    }
                    *count += 1;
                }
                None => {
                    seen.insert(m.clone(), (w.clone(), 1));
                }
            }
        }
        if len == max_len {
            break;
        }
        frontier = frontier
            .par_iter()
            .flat_map_iter(|(w, m)| {
                exact.iter().enumerate().map(move |(i, s)| {
                    let mut w2 = w.clone();
                    w2.push(i);
                    (w2, m.mul(s))
                })
            })
            .collect();
    }
    Ok(ExactCrosscheck {
        max_len,
        words,
        collisions,
        witnesses,
    })
}
