//! Growth estimators over finite orbit samples: partial Poincaré sums, the
//! critical-exponent regression, cone growth rates and the growth-indicator
//! curve, limit-cone samples, subadditivity defects and the Anosov linear bound.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cartan::{cartan_projection, iwasawa_cocycle, jordan_projection, CartanVector, LieError};
use crate::flag::Flag;
use crate::group::GroupElement;
use crate::linalg::CompensatedSum;
use crate::orbit::{Cone, OrbitError, OrbitRecord};
use crate::sampling::seeded_rng;

pub const MIN_RECORDS: usize = 100;
pub const DEFAULT_LIMIT_FLOOR: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("too few records: {got} < {need}")]
    TooFewRecords { got: usize, need: usize },
    #[error("fit window holds fewer than two distinct points")]
    DegenerateFit,
    #[error("direction must be interior to the chamber")]
    InvalidDirection,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// One orbit point reduced to what the counting estimators need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub length: usize,
    pub norm: f64,
}

impl From<&OrbitRecord> for Sample {
    fn from(r: &OrbitRecord) -> Self {
        Sample {
            length: r.length(),
            norm: r.norm(),
        }
    }
}

pub fn samples_of(records: &[OrbitRecord]) -> Vec<Sample> {
    records.iter().map(Sample::from).collect()
}

/// Σ exp(−s·‖κ‖), compensated and merged pairwise.
pub fn poincare_partial_sum(norms: &[f64], s: f64) -> f64 {
    assert!(s >= 0.0, "exponent must be nonnegative");
    norms
        .par_iter()
        .fold(CompensatedSum::default, |mut acc, &x| {
            acc.add((-s * x).exp());
            acc
        })
        .reduce(CompensatedSum::default, CompensatedSum::merge)
        .value()
}

pub fn poincare_partial_sum_records(records: &[OrbitRecord], s: f64) -> f64 {
    let norms: Vec<f64> = records.iter().map(|r| r.norm()).collect();
    poincare_partial_sum(&norms, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPolicy {
    /// Fraction of the T-range dropped at the low end.
    pub drop_low: f64,
    pub drop_high: f64,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        Self {
            drop_low: 0.2,
            drop_high: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub counts_by_radius: BTreeMap<usize, u64>,
    pub bin_width: f64,
    /// (upper bin edge T, cumulative count N(T)).
    pub cumulative: Vec<(f64, u64)>,
    pub delta_hat: f64,
    pub fit_window: (f64, f64),
    pub fit_residual: f64,
    pub fit_points: usize,
    pub sample_size: usize,
}

/// Least-squares line; returns (slope, intercept, rms residual).
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    Some((slope, icpt, (rss / n).sqrt()))
}

/// Fits log N(T) ≈ δ·T + b over the trimmed T-range.
pub fn estimate_delta(samples: &[Sample], bin_width: f64, window: &WindowPolicy) -> Result<GrowthReport, GrowthError> {
    if samples.len() < MIN_RECORDS {
        return Err(GrowthError::TooFewRecords {
            got: samples.len(),
            need: MIN_RECORDS,
        });
    }
    if !(bin_width > 0.0) {
        return Err(GrowthError::InvalidParameter("bin width must be positive".into()));
    }
    let mut counts_by_radius = BTreeMap::new();
    for s in samples {
        *counts_by_radius.entry(s.length).or_insert(0u64) += 1;
    }
    let mut norms: Vec<f64> = samples.iter().map(|s| s.norm).collect();
    norms.sort_by(f64::total_cmp);
    let (t_lo, t_hi) = (norms[0], *norms.last().unwrap());
    let range = t_hi - t_lo;
    if !(range > 0.0) {
        return Err(GrowthError::DegenerateFit);
    }
    let bins = ((range / bin_width).ceil() as usize).max(1);
    let mut cumulative = Vec::with_capacity(bins);
    let mut idx = 0;
    for b in 1..=bins {
        let t = t_lo + b as f64 * bin_width;
        while idx < norms.len() && norms[idx] <= t {
            idx += 1;
        }
        cumulative.push((t, idx as u64));
    }
    let w_lo = t_lo + window.drop_low * range;
    let w_hi = t_hi - window.drop_high * range;
    let (xs, ys): (Vec<f64>, Vec<f64>) = cumulative
        .iter()
        .filter(|(t, c)| *t >= w_lo && *t <= w_hi && *c > 0)
        .map(|(t, c)| (*t, (*c as f64).ln()))
        .unzip();
    let (slope, _, resid) = least_squares(&xs, &ys).ok_or(GrowthError::DegenerateFit)?;
    Ok(GrowthReport {
        counts_by_radius,
        bin_width,
        cumulative,
        delta_hat: slope.max(0.0),
        fit_window: (w_lo, w_hi),
        fit_residual: resid,
        fit_points: xs.len(),
        sample_size: samples.len(),
    })
}

/// Default bin width: 1/200 of the observed norm range.
pub fn default_bin_width(samples: &[Sample]) -> f64 {
    let lo = samples.iter().map(|s| s.norm).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.norm).fold(0.0, f64::max);
    ((hi - lo) / 200.0).max(1e-6)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitConeSample {
    pub cartan: Vec<CartanVector>,
    pub jordan: Vec<CartanVector>,
    pub floor: f64,
    pub warning: Option<String>,
}

pub fn limit_cone_sample(records: &[OrbitRecord], floor: f64, gap_tol: f64) -> Result<LimitConeSample, GrowthError> {
    let mut cartan = Vec::new();
    let mut jordan = Vec::new();
    for r in records.iter().filter(|r| r.norm() >= floor) {
        cartan.push(r.kappa.normalized().expect("norm above floor"));
        let l = jordan_projection(&r.matrix)?;
        if l.min_root() > gap_tol {
            jordan.push(l.normalized().expect("loxodromic λ is nonzero"));
        }
    }
    let warning = cartan
        .is_empty()
        .then(|| format!("no records with ‖κ‖ ≥ {floor}"));
    Ok(LimitConeSample {
        cartan,
        jordan,
        floor,
        warning,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeGrowth {
    pub cone: Cone,
    pub tau_hat: Option<f64>,
    pub sample_size: usize,
    pub error: Option<String>,
}

/// τ̂_C for the cones (v, angle); the small-angle end estimates ψ(v).
pub fn growth_indicator_estimate(
    samples: &[(Sample, CartanVector)],
    v: &[f64],
    angles: &[f64],
    bin_width: f64,
    window: &WindowPolicy,
) -> Result<Vec<(f64, ConeGrowth)>, GrowthError> {
    let dir = CartanVector::new(v.to_vec()).map_err(|_| GrowthError::InvalidDirection)?;
    if !(dir.min_root() > 0.0) {
        return Err(GrowthError::InvalidDirection);
    }
    angles
        .iter()
        .map(|&angle| {
            let cone = Cone::new(v, angle)?;
            let inside: Vec<Sample> = samples
                .iter()
                .filter(|(_, k)| cone.contains(k))
                .map(|(s, _)| *s)
                .collect();
            let (tau_hat, error) = match estimate_delta(&inside, bin_width, window) {
                Ok(rep) => (Some(rep.delta_hat), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Ok((
                angle,
                ConeGrowth {
                    cone,
                    tau_hat,
                    sample_size: inside.len(),
                    error,
                },
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectStats {
    pub max_defect: f64,
    pub mean_defect: f64,
    pub pairs: usize,
    /// (upper edge, count), 20 equal bins over [0, max].
    pub histogram: Vec<(f64, u64)>,
}

pub fn defect(g: &GroupElement, h: &GroupElement) -> Result<f64, LieError> {
    let kg = cartan_projection(g)?;
    let kh = cartan_projection(h)?;
    let kgh = cartan_projection(&g.mul_float(h))?;
    Ok(kgh
        .coords()
        .iter()
        .zip(kg.coords())
        .zip(kh.coords())
        .map(|((a, b), c)| (a - b - c).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// ‖κ(gh) − κ(g) − κ(h)‖ over all ordered pairs when they fit in
/// `pair_budget`, otherwise over `pair_budget` seeded random pairs.
pub fn subadditivity_defect(elements: &[GroupElement], pair_budget: usize, seed: u64) -> Result<DefectStats, GrowthError> {
    let k = elements.len();
    if k == 0 || pair_budget == 0 {
        return Err(GrowthError::InvalidParameter("need elements and a positive pair budget".into()));
    }
    let pairs: Vec<(usize, usize)> = if k * k <= pair_budget {
        (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect()
    } else {
        let mut rng = seeded_rng(k as u64, seed);
        (0..pair_budget)
            .map(|_| (rng.random_range(0..k), rng.random_range(0..k)))
            .collect()
    };
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| defect(&elements[i], &elements[j]))
        .collect::<Result<_, _>>()?;
    let max_defect = values.iter().copied().fold(0.0, f64::max);
    let mean_defect = values.iter().copied().collect::<CompensatedSum>().value() / values.len() as f64;
    let bins = 20;
    let width = if max_defect > 0.0 { max_defect / bins as f64 } else { 1.0 };
    let mut histogram: Vec<(f64, u64)> = (1..=bins).map(|b| (b as f64 * width, 0)).collect();
    for v in &values {
        let b = ((v / width) as usize).min(bins - 1);
        histogram[b].1 += 1;
    }
    Ok(DefectStats {
        max_defect,
        mean_defect,
        pairs: values.len(),
        histogram,
    })
}

/// max ‖B(g, x) − κ(g)‖ over the given elements.
pub fn busemann_cartan_constant(elements: &[GroupElement], x: &Flag) -> Result<f64, LieError> {
    elements
        .par_iter()
        .map(|g| {
            let b = iwasawa_cocycle(g, x.frame());
            let k = cartan_projection(g)?;
            Ok(b.iter()
                .zip(k.coords())
                .map(|(a, c)| (a - c).powi(2))
                .sum::<f64>()
                .sqrt())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnosovFit {
    /// Slope C in min_α α(κ(g)) ≥ C·|g| − c.
    pub c_hat: f64,
    pub c_offset: f64,
    pub min_ratio: f64,
    pub linear_sse: f64,
    pub log_sse: f64,
    pub pass: bool,
}

/// Fits the per-length lower envelope of min simple-root values.
/// `points` are (word length, min_α α(κ)).
pub fn anosov_slope(points: &[(usize, f64)]) -> Result<AnosovFit, GrowthError> {
    let mut envelope: BTreeMap<usize, f64> = BTreeMap::new();
    for &(len, v) in points {
        if len == 0 {
            return Err(GrowthError::InvalidParameter("word length 0".into()));
        }
        let e = envelope.entry(len).or_insert(f64::INFINITY);
        *e = e.min(v);
    }
    let xs: Vec<f64> = envelope.keys().map(|&l| l as f64).collect();
    let ys: Vec<f64> = envelope.values().copied().collect();
    let min_ratio = points
        .iter()
        .map(|&(l, v)| v / l as f64)
        .fold(f64::INFINITY, f64::min);
    let (c_hat, linear_sse, log_sse) = if xs.len() >= 2 {
        let (slope, icpt, rms) = least_squares(&xs, &ys).ok_or(GrowthError::DegenerateFit)?;
        let _ = icpt;
        let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let (_, _, rms_log) = least_squares(&logs, &ys).ok_or(GrowthError::DegenerateFit)?;
        let n = xs.len() as f64;
        (slope, rms * rms * n, rms_log * rms_log * n)
    } else if xs.len() == 1 {
        (ys[0] / xs[0], 0.0, 0.0)
    } else {
        return Err(GrowthError::DegenerateFit);
    };
    let c_offset = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| c_hat * x - y)
        .fold(0.0, f64::max);
    // An exact linear envelope has zero SSE; compare with relative slack.
    let pass = c_hat > 0.0 && linear_sse <= log_sse * (1.0 + 1e-9) + 1e-18;
    Ok(AnosovFit {
        c_hat,
        c_offset,
        min_ratio,
        linear_sse,
        log_sse,
        pass,
    })
}

pub fn anosov_points(records: &[OrbitRecord]) -> Vec<(usize, f64)> {
    records.iter().map(|r| (r.length(), r.kappa.min_root())).collect()
}

/// Σ_{ζ∈S} exp(−δ‖κ(ζ)‖), summed in input order.
pub fn generator_sum(norms: &[f64], delta: f64) -> f64 {
    norms.iter().map(|x| (-delta * x).exp()).collect::<CompensatedSum>().value()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyThree {
    pub max_len: usize,
    pub words_checked: usize,
    pub violations: usize,
    /// min over γ of log Σ_ζ e^{−δ‖κ(γζ)‖} + δ‖κ(γ)‖.
    pub min_log_slack: f64,
}

/// Checks Σ_{ζ∈S} e^{−δ‖κ(γζ)‖} ≥ e^{−δ‖κ(γ)‖} for every word γ of length
/// ≤ `max_len`, the empty word included.
pub fn property_three_check(gens: &[GroupElement], delta: f64, max_len: usize) -> Result<PropertyThree, GrowthError> {
    if gens.is_empty() {
        return Err(GrowthError::InvalidParameter("no generators".into()));
    }
    let n = gens[0].dim();
    let mut words = vec![GroupElement::identity(n)];
    if max_len > 0 {
        let opts = crate::orbit::EnumerateOptions::default();
        words.extend(crate::orbit::enumerate_ball(gens, max_len, &opts)?.into_iter().map(|r| r.matrix));
    }
    let slacks: Vec<f64> = words
        .par_iter()
        .map(|g| {
            let base = cartan_projection(g)?.norm();
            let mut terms = Vec::with_capacity(gens.len());
            for z in gens {
                terms.push(cartan_projection(&g.mul_float(z))?.norm());
            }
            Ok(generator_sum(&terms, delta).ln() + delta * base)
        })
        .collect::<Result<_, LieError>>()?;
    Ok(PropertyThree {
        max_len,
        words_checked: slacks.len(),
        violations: slacks.iter().filter(|&&s| s < -1e-12).count(),
        min_log_slack: slacks.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseSubadditivity {
    pub max_len: usize,
    pub pairs: usize,
    pub max_defect: f64,
    /// max ‖B(w, x) − κ(w)‖ over all words w = g, h, gh of the pairs.
    pub busemann_cartan: f64,
    /// Also over the translated flags: max ‖B(g, h·x) − κ(g)‖.
    pub busemann_cartan_translated: f64,
    pub holds: bool,
}

fn gap(b: &[f64], k: &CartanVector) -> f64 {
    b.iter()
        .zip(k.coords())
        .map(|(a, c)| (a - c).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Defects over all ordered pairs of words of length ≤ `max_len`, compared
/// with three times the measured Busemann–Cartan constant at `x`.
pub fn coarse_subadditivity(gens: &[GroupElement], max_len: usize, x: &Flag) -> Result<CoarseSubadditivity, GrowthError> {
    let opts = crate::orbit::EnumerateOptions::default();
    let words: Vec<GroupElement> = crate::orbit::enumerate_ball(gens, max_len, &opts)?
        .into_iter()
        .map(|r| r.matrix)
        .collect();
    let singles: Vec<(CartanVector, f64)> = words
        .par_iter()
        .map(|w| {
            let k = cartan_projection(w)?;
            let c = gap(&iwasawa_cocycle(w, x.frame()), &k);
            Ok((k, c))
        })
        .collect::<Result<_, LieError>>()?;
    let per_pair: Vec<(f64, f64, f64)> = (0..words.len())
        .into_par_iter()
        .flat_map_iter(|i| (0..words.len()).map(move |j| (i, j)))
        .map(|(i, j)| {
            let gh = words[i].mul_float(&words[j]);
            let kgh = cartan_projection(&gh)?;
            let d = kgh
                .coords()
                .iter()
                .zip(singles[i].0.coords())
                .zip(singles[j].0.coords())
                .map(|((a, b), c)| (a - b - c).powi(2))
                .sum::<f64>()
                .sqrt();
            let c_gh = gap(&iwasawa_cocycle(&gh, x.frame()), &kgh);
            let hx = x.act(&words[j]);
            let c_t = gap(&iwasawa_cocycle(&words[i], hx.frame()), &singles[i].0);
            Ok((d, c_gh, c_t))
        })
        .collect::<Result<_, LieError>>()?;
    let max_defect = per_pair.iter().map(|t| t.0).fold(0.0, f64::max);
    let busemann_cartan = per_pair
        .iter()
        .map(|t| t.1)
        .chain(singles.iter().map(|s| s.1))
        .fold(0.0, f64::max);
    let busemann_cartan_translated = per_pair.iter().map(|t| t.2).fold(busemann_cartan, f64::max);
    Ok(CoarseSubadditivity {
        max_len,
        pairs: per_pair.len(),
        max_defect,
        busemann_cartan,
        busemann_cartan_translated,
        holds: max_defect <= 3.0 * busemann_cartan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{enumerate_ball, EnumerateOptions};

    #[test]
    fn poincare_basics() {
        assert_eq!(poincare_partial_sum(&[], 1.0), 0.0);
        assert!((poincare_partial_sum(&[2.0], 1.0) - (-2f64).exp()).abs() < 1e-15);
        let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.3).collect();
        assert!(poincare_partial_sum(&xs, 0.5) <= poincare_partial_sum(&xs, 0.4));
    }

    #[test]
    fn free_counting_at_zero_exponent() {
        let a = GroupElement::exp_diagonal(&[2.0, -2.0]);
        let b = a.conjugate_by(&GroupElement::rotation(1.0));
        let recs = enumerate_ball(&[a, b], 6, &EnumerateOptions::default()).unwrap();
        assert_eq!(poincare_partial_sum_records(&recs, 0.0), (1u64 << 7) as f64 - 2.0);
    }

    #[test]
    fn cyclic_growth_is_subexponential() {
        let samples: Vec<Sample> = (1..=400).map(|k| Sample { length: k, norm: 0.7 * k as f64 }).collect();
        let rep = estimate_delta(&samples, 0.35, &WindowPolicy::default()).unwrap();
        assert!(rep.delta_hat < 0.05, "{}", rep.delta_hat);
    }

    #[test]
    fn too_few_and_degenerate() {
        let few: Vec<Sample> = (0..10).map(|k| Sample { length: 1, norm: k as f64 }).collect();
        assert!(matches!(estimate_delta(&few, 1.0, &WindowPolicy::default()), Err(GrowthError::TooFewRecords { .. })));
        let flat: Vec<Sample> = (0..200).map(|_| Sample { length: 1, norm: 3.0 }).collect();
        assert_eq!(estimate_delta(&flat, 1.0, &WindowPolicy::default()).unwrap_err(), GrowthError::DegenerateFit);
    }

    #[test]
    fn commuting_diagonals_have_zero_defect() {
        let g = GroupElement::exp_diagonal(&[2.0, 0.5, -2.5]);
        let h = GroupElement::exp_diagonal(&[1.0, 0.0, -1.0]);
        assert!(defect(&g, &h).unwrap() < 1e-12);
    }

    #[test]
    fn inverse_pair_cancels() {
        let g = GroupElement::exp_diagonal(&[3.0, -3.0]).conjugate_by(&GroupElement::rotation(0.3));
        let d = defect(&g, &g.inverse()).unwrap();
        let k = cartan_projection(&g).unwrap().norm();
        assert!((d - 2.0 * k).abs() < 1e-9);
    }

    #[test]
    fn anosov_of_single_diagonal() {
        let g = GroupElement::exp_diagonal(&[1.5, -1.5]);
        let recs = enumerate_ball(&[g], 8, &EnumerateOptions::default()).unwrap();
        let fit = anosov_slope(&anosov_points(&recs)).unwrap();
        assert!((fit.c_hat - 3.0).abs() < 1e-9);
        assert!(fit.c_offset < 1e-9);
        assert!(fit.pass);
    }

    #[test]
    fn unipotent_fails_anosov() {
        let u = GroupElement::from_row_slice(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let recs = enumerate_ball(&[u], 8, &EnumerateOptions::default()).unwrap();
        let fit = anosov_slope(&anosov_points(&recs)).unwrap();
        assert!(!fit.pass, "{fit:?}");
    }

    #[test]
    fn limit_cone_of_diagonal() {
        let g = GroupElement::exp_diagonal(&[2.0, 1.0, -3.0]);
        let recs = enumerate_ball(&[g], 5, &EnumerateOptions::default()).unwrap();
        let s = limit_cone_sample(&recs, 0.0, 1e-6).unwrap();
        let first = s.cartan[0].clone();
        assert!(s.cartan.iter().all(|v| v.distance(&first) < 1e-12));
        let empty = limit_cone_sample(&recs, 1e6, 1e-6).unwrap();
        assert!(empty.cartan.is_empty() && empty.warning.is_some());
    }
}
