//! Shadows in the symmetric space: O_R(p, q) is the set of flags `kP` whose
//! Weyl-chamber ray `k·exp(a⁺)·o` from `p` passes within `R` of `q`.
//!
//! Membership is decided by minimizing `H ↦ ‖κ(exp(−H)·kᵀ·q)‖` over `H ∈ a⁺`
//! (coarse grid, then Nelder–Mead). The value found is an upper bound on the
//! true minimum, so a positive answer is certain and a negative one is
//! best-effort.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cartan::{cartan_projection, CartanVector, LieError};
use crate::contraction::{admissible_samples, check_contracting, ContractionError, SamplingBudget};
use crate::flag::{attracting_flag, cartan_flags, repelling_flag, Flag, FlagError};
use crate::group::GroupElement;
use crate::sampling::{haar_flag, perturb_flag, seeded_rng};

pub const GRID_RAYS: usize = 9;
pub const GRID_RADII: usize = 20;
pub const REFINE_ITERATIONS: usize = 200;
pub const REFINE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymError {
    #[error("flag is not a verified member of the shadow")]
    MembershipUnverified,
    #[error("element is not certified 2ε-contracting")]
    NotCertified,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
}

impl From<FlagError> for SymError {
    fn from(e: FlagError) -> Self {
        SymError::Contraction(e.into())
    }
}

#[derive(Debug, Clone)]
pub struct SymShadowQuery {
    pub base: GroupElement,
    pub target: GroupElement,
    pub r: f64,
}

impl SymShadowQuery {
    /// O_R(o, target·o).
    pub fn from_origin(target: &GroupElement, r: f64) -> Result<Self, SymError> {
        Self::new(GroupElement::identity(target.dim()), target.clone(), r)
    }

    pub fn new(base: GroupElement, target: GroupElement, r: f64) -> Result<Self, SymError> {
        if !(r > 0.0) {
            return Err(SymError::InvalidParameter(format!("R = {r} must be positive")));
        }
        if base.dim() != target.dim() {
            return Err(SymError::InvalidParameter("dimension mismatch".into()));
        }
        Ok(Self { base, target, r })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymMembership {
    pub member: bool,
    /// Upper bound for min over H ∈ a⁺ of d_X(k·exp(H)·o, q).
    pub achieved: f64,
    pub minimizer: CartanVector,
}

/// H = Σ tᵢ ωᵢ with ωᵢ the fundamental coweights, so that αᵢ(H) = tᵢ.
fn coweight_combination(t: &[f64]) -> Vec<f64> {
    let n = t.len() + 1;
    let mut h = vec![0.0; n];
    for (i, &ti) in t.iter().enumerate() {
        let k = i + 1;
        let mean = k as f64 / n as f64;
        for (j, hj) in h.iter_mut().enumerate() {
            *hj += ti * if j < k { 1.0 - mean } else { -mean };
        }
    }
    h
}

fn roots_of(h: &[f64]) -> Vec<f64> {
    h.windows(2).map(|w| (w[0] - w[1]).max(0.0)).collect()
}

/// ‖κ(exp(−H)·kᵀ·q)‖ with the inverse `q⁻¹·k·exp(H)` tracked alongside.
struct Objective<'a> {
    kt_q: DMatrix<f64>,
    q_inv_k: DMatrix<f64>,
    _target: &'a GroupElement,
}

impl<'a> Objective<'a> {
    fn new(frame: &DMatrix<f64>, target: &'a GroupElement) -> Self {
        Self {
            kt_q: frame.transpose() * target.matrix(),
            q_inv_k: target.inverse_matrix() * frame,
            _target: target,
        }
    }

    fn eval_h(&self, h: &[f64]) -> f64 {
        let n = h.len();
        let mut m = self.kt_q.clone();
        let mut inv = self.q_inv_k.clone();
        for i in 0..n {
            let (down, up) = ((-h[i]).exp(), h[i].exp());
            m.row_mut(i).scale_mut(down);
            inv.column_mut(i).scale_mut(up);
        }
        let g = GroupElement::from_parts(m, inv);
        cartan_projection(&g).map(|c| c.norm()).unwrap_or(f64::INFINITY)
    }

    fn eval_t(&self, t: &[f64]) -> f64 {
        let clamped: Vec<f64> = t.iter().map(|x| x.max(0.0)).collect();
        self.eval_h(&coweight_combination(&clamped))
    }
}

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Unit-norm (in H-space) ray directions in root coordinates.
fn grid_rays(m: usize, kappa_dir: Option<&[f64]>) -> Vec<Vec<f64>> {
    let mut rays: Vec<Vec<f64>> = Vec::new();
    for j in 0..GRID_RAYS {
        let t: Vec<f64> = if m == 1 {
            vec![1.0]
        } else if j < m {
            (0..m).map(|i| if i == j { 1.0 } else { 0.0 }).collect()
        } else if j == m {
            vec![1.0; m]
        } else {
            (0..m).map(|i| halton(j + 1, PRIMES[i % PRIMES.len()]) + 0.05).collect()
        };
        rays.push(t);
        if m == 1 {
            break;
        }
    }
    if let Some(k) = kappa_dir {
        rays.push(k.to_vec());
    }
    rays.into_iter()
        .filter_map(|t| {
            let h = coweight_combination(&t);
            let norm = h.iter().map(|x| x * x).sum::<f64>().sqrt();
            (norm > 0.0).then(|| t.iter().map(|x| x / norm).collect())
        })
        .collect()
}

/// Minimizes over `t ≥ 0` with Nelder–Mead, clamping trial points.
fn nelder_mead(obj: &Objective, start: Vec<f64>, step: f64) -> (Vec<f64>, f64) {
    let m = start.len();
    let clamp = |v: Vec<f64>| v.into_iter().map(|x| x.max(0.0)).collect::<Vec<f64>>();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m + 1);
    let f0 = obj.eval_t(&start);
    simplex.push((start.clone(), f0));
    for i in 0..m {
        let mut p = start.clone();
        p[i] += step;
        let p = clamp(p);
        let f = obj.eval_t(&p);
        simplex.push((p, f));
    }
    for _ in 0..REFINE_ITERATIONS {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[m].1);
        if worst - best < REFINE_TOL * (1.0 + best.abs()) && best < REFINE_TOL {
            break;
        }
        let centroid: Vec<f64> = (0..m)
            .map(|j| simplex[..m].iter().map(|p| p.0[j]).sum::<f64>() / m as f64)
            .collect();
        let along = |c: f64| -> Vec<f64> {
            clamp((0..m).map(|j| centroid[j] + c * (simplex[m].0[j] - centroid[j])).collect())
        };
        let xr = along(-1.0);
        let fr = obj.eval_t(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = obj.eval_t(&xe);
            simplex[m] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[m - 1].1 {
            simplex[m] = (xr, fr);
        } else {
            let xc = along(0.5);
            let fc = obj.eval_t(&xc);
            if fc < simplex[m].1 {
                simplex[m] = (xc, fc);
            } else {
                let b = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    let q = clamp((0..m).map(|j| b[j] + 0.5 * (p.0[j] - b[j])).collect());
                    let fq = obj.eval_t(&q);
                    *p = (q, fq);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Minimum search for a flag frame against `target` (base point o).
fn minimize_from_origin(frame: &DMatrix<f64>, target: &GroupElement) -> Result<(f64, Vec<f64>), SymError> {
    let n = target.dim();
    let m = n - 1;
    let obj = Objective::new(frame, target);
    let kappa = cartan_projection(target)?;
    let scale = 1.5 * kappa.norm();
    let kappa_t = roots_of(kappa.coords());
    let mut best_t = vec![0.0; m];
    let mut best = obj.eval_t(&best_t);
    // κ(target) itself: exact for the flag of the target's own K-factor.
    let fk = obj.eval_t(&kappa_t);
    if fk < best {
        best = fk;
        best_t = kappa_t.clone();
    }
    if scale > 0.0 {
        for ray in grid_rays(m, Some(&kappa_t)) {
            for j in 1..=GRID_RADII {
                let r = scale * j as f64 / GRID_RADII as f64;
                let t: Vec<f64> = ray.iter().map(|x| x * r).collect();
                let f = obj.eval_t(&t);
                if f < best {
                    best = f;
                    best_t = t;
                }
            }
        }
        let step = (scale / GRID_RADII as f64).max(1e-3);
        let (t, f) = nelder_mead(&obj, best_t.clone(), step);
        if f < best {
            best = f;
            best_t = t;
        }
    }
    Ok((best, coweight_combination(&best_t)))
}

pub fn sym_shadow_membership(query: &SymShadowQuery, f: &Flag) -> Result<SymMembership, SymError> {
    // O_R(p, q) = p·O_R(o, p⁻¹q)
    let base_inv = query.base.inverse();
    let target = base_inv.mul_float(&query.target);
    let flag = f.act(&base_inv);
    let (achieved, h) = minimize_from_origin(flag.frame(), &target)?;
    Ok(SymMembership {
        member: achieved <= query.r,
        achieved,
        minimizer: CartanVector::from_raw(h),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservationOne {
    pub lhs: f64,
    pub bound: f64,
    pub holds: bool,
}

/// d_X(k·exp(κ(γ))·o, γ·o) ≤ 2R for members `kP` of O_R(o, γ·o).
pub fn shadow_observation_1(f: &Flag, gamma: &GroupElement, r: f64) -> Result<ObservationOne, SymError> {
    let q = SymShadowQuery::from_origin(gamma, r)?;
    if !sym_shadow_membership(&q, f)?.member {
        return Err(SymError::MembershipUnverified);
    }
    let kappa = cartan_projection(gamma)?;
    let lhs = Objective::new(f.frame(), gamma).eval_h(kappa.coords());
    let bound = 2.0 * r;
    Ok(ObservationOne {
        lhs,
        bound,
        holds: lhs <= bound + 1e-7,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservationTwo {
    pub intersects: bool,
    pub probes: usize,
    pub distance: f64,
    pub bound: f64,
    pub distance_bound_holds: bool,
}

/// Looks for a common flag of O_R(o, g₁·o) and O_R(o, g₂·o); if one is found,
/// checks d_X(g₁·o, g₂·o) ≤ 4R + ‖κ(g₁) − κ(g₂)‖.
pub fn shadow_observation_2(
    g1: &GroupElement,
    g2: &GroupElement,
    r: f64,
    probe_budget: usize,
    seed: u64,
) -> Result<ObservationTwo, SymError> {
    let q1 = SymShadowQuery::from_origin(g1, r)?;
    let q2 = SymShadowQuery::from_origin(g2, r)?;
    let k1 = cartan_projection(g1)?;
    let k2 = cartan_projection(g2)?;
    let distance = crate::cartan::symmetric_space_distance(g1, g2)?;
    let bound = 4.0 * r + k1.distance(&k2);
    let mut rng = seeded_rng(g1.fingerprint() ^ g2.fingerprint().rotate_left(7), seed);
    let n = g1.dim();
    let mut probes: Vec<Flag> = vec![cartan_flags(g1).0, cartan_flags(g2).0];
    while probes.len() < probe_budget.max(2) {
        let base = probes[probes.len() % 2].clone();
        let kind: u32 = rng.random_range(0..3);
        let p = match kind {
            0 => haar_flag(n, &mut rng),
            _ => {
                let step = 10f64.powf(rng.random_range(-4.0..0.0));
                perturb_flag(&base, step, &mut rng)
            }
        };
        probes.push(p);
    }
    probes.truncate(probe_budget.max(2));
    let hits: Vec<bool> = probes
        .par_iter()
        .map(|f| {
            let a = sym_shadow_membership(&q1, f).map(|m| m.member).unwrap_or(false);
            a && sym_shadow_membership(&q2, f).map(|m| m.member).unwrap_or(false)
        })
        .collect();
    let intersects = hits.iter().any(|&h| h);
    Ok(ObservationTwo {
        intersects,
        probes: probes.len(),
        distance,
        bound,
        distance_bound_holds: !intersects || distance <= bound + 1e-6,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShadowInclusionReport {
    pub holds: bool,
    pub violations: usize,
    pub probes: usize,
    /// Largest achieved distance over the probes: the smallest R with no violation.
    pub max_achieved: f64,
    pub warning: Option<String>,
}

/// Probes S_{2ε}(g) and counts points outside O_R(o, g·o); no certification.
pub fn flag_shadow_in_sym_shadow_probe(
    g: &GroupElement,
    eps: f64,
    r: f64,
    probe_budget: usize,
    budget: &SamplingBudget,
) -> Result<ShadowInclusionReport, SymError> {
    if probe_budget == 0 {
        return Ok(ShadowInclusionReport {
            holds: true,
            violations: 0,
            probes: 0,
            max_achieved: 0.0,
            warning: Some("no probes: inclusion holds vacuously".into()),
        });
    }
    let q = SymShadowQuery::from_origin(g, r)?;
    let minus = repelling_flag(g, budget.gap_tol)?;
    let _ = attracting_flag(g, budget.gap_tol)?;
    let mut rng = seeded_rng(g.fingerprint() ^ 0x0B5E, budget.seed);
    let sources = admissible_samples(&minus, (2.0 * eps).min(0.999), probe_budget, &mut rng)?;
    let results: Vec<f64> = sources
        .par_iter()
        .map(|f| sym_shadow_membership(&q, &f.act(g)).map(|m| m.achieved))
        .collect::<Result<_, _>>()?;
    let violations = results.iter().filter(|&&a| a > r).count();
    let max_achieved = results.iter().copied().fold(0.0, f64::max);
    Ok(ShadowInclusionReport {
        holds: violations == 0,
        violations,
        probes: results.len(),
        max_achieved,
        warning: None,
    })
}

/// S_{2ε}(g) ⊂ O_R(o, g·o) for `g` certified 2ε-contracting.
pub fn flag_shadow_in_sym_shadow(
    g: &GroupElement,
    eps: f64,
    r: f64,
    probe_budget: usize,
    budget: &SamplingBudget,
) -> Result<ShadowInclusionReport, SymError> {
    if !(2.0 * eps < 1.0) || !check_contracting(g, 2.0 * eps, budget)?.passed() {
        return Err(SymError::NotCertified);
    }
    flag_shadow_in_sym_shadow_probe(g, eps, r, probe_budget, budget)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub epsilon: f64,
    pub n: usize,
    pub r_min_zero_violation: f64,
    pub probes: usize,
}

/// Smallest R with no violations for every element, taken as the largest
/// achieved distance over all probes (membership is monotone in R).
pub fn calibrate_radius(
    elements: &[GroupElement],
    eps: f64,
    probe_budget: usize,
    budget: &SamplingBudget,
) -> Result<CalibrationRow, SymError> {
    if elements.is_empty() {
        return Err(SymError::InvalidParameter("nothing to calibrate".into()));
    }
    let mut r_min: f64 = 0.0;
    let mut probes = 0;
    for g in elements {
        let rep = flag_shadow_in_sym_shadow_probe(g, eps, f64::MAX, probe_budget, budget)?;
        r_min = r_min.max(rep.max_achieved);
        probes += rep.probes;
    }
    Ok(CalibrationRow {
        epsilon: eps,
        n: elements[0].dim(),
        r_min_zero_violation: r_min,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn own_k_flag_is_member() {
        let g = GroupElement::from_row_slice(3, &[2.0, 1.0, 0.0, 1.0, 1.0, 0.5, 0.0, 0.0, 1.0]).unwrap();
        let (k, _) = cartan_flags(&g);
        let q = SymShadowQuery::from_origin(&g, 0.01).unwrap();
        let m = sym_shadow_membership(&q, &k).unwrap();
        assert!(m.member && m.achieved < 1e-9, "{}", m.achieved);
    }

    #[test]
    fn identity_target_contains_everything() {
        let q = SymShadowQuery::from_origin(&GroupElement::identity(2), 0.1).unwrap();
        let f = Flag::from_direction(&[0.3, 0.7]).unwrap();
        assert!(sym_shadow_membership(&q, &f).unwrap().member);
    }

    #[test]
    fn opposite_axis_is_far() {
        let g = GroupElement::exp_diagonal(&[5.0, -5.0]);
        let q = SymShadowQuery::from_origin(&g, 1.0).unwrap();
        let f = Flag::from_direction(&[0.0, 1.0]).unwrap();
        let m = sym_shadow_membership(&q, &f).unwrap();
        assert!(!m.member);
        assert!(m.achieved >= 5.0);
    }

    #[test]
    fn coweights_have_unit_roots() {
        let h = coweight_combination(&[1.0, 2.0, 3.0]);
        let r = roots_of(&h);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(h.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn observation_one_on_own_flag() {
        let g = GroupElement::exp_diagonal(&[3.0, -3.0]).mul(&GroupElement::rotation(0.4));
        let (k, _) = cartan_flags(&g);
        let o = shadow_observation_1(&k, &g, 0.5).unwrap();
        assert!(o.holds && o.lhs < 1e-9);
        let far = Flag::from_direction(&[-k.frame()[(1, 0)], k.frame()[(0, 0)]]).unwrap();
        assert_eq!(shadow_observation_1(&far, &g, 0.5).unwrap_err(), SymError::MembershipUnverified);
    }

    #[test]
    fn zero_probe_budget_is_vacuous() {
        let g = GroupElement::exp_diagonal(&[5.0, -5.0]);
        let rep = flag_shadow_in_sym_shadow_probe(&g, 0.1, 0.5, 0, &SamplingBudget::default()).unwrap();
        assert!(rep.holds && rep.violations == 0 && rep.warning.is_some());
    }
}
