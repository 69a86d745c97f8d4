//! Word-ball enumeration, the filtered sets selected by cone, norm window and
//! flag proximity, greedy packing with disjoint shadows, and a Zariski-density
//! heuristic.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cartan::{
    cartan_projection, jordan_projection, kak_decomposition, CartanVector, KakDecomposition,
    LieError,
};
use crate::flag::{cartan_flags, flag_distance, opposite_distance, transversality_margin, Flag, OppositeFlag};
use crate::group::GroupElement;
use crate::linalg::numerical_rank;
use crate::rational::RationalMatrix;

pub const DEFAULT_NODE_CAP: u64 = 10_000_000;
/// Rounding quantum for float-tolerant deduplication.
pub const FLOAT_DEDUP_QUANTUM: f64 = 1e-9;
/// Records examined by the exact span test.
pub const EXACT_SPAN_RECORDS: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("enumeration would visit {nodes} nodes, above the cap of {cap}")]
    BudgetExceeded { nodes: u64, cap: u64 },
    #[error("exact deduplication needs exact entries on every generator")]
    DedupUnavailable,
    #[error("invalid enumeration request: {0}")]
    InvalidRequest(String),
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("invalid filter: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// Round cone `{v ∈ a⁺ : ∠(v, axis) < half_angle}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConeRepr", into = "ConeRepr")]
pub struct Cone {
    axis: CartanVector,
    half_angle: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeRepr {
    pub axis: Vec<f64>,
    pub half_angle: f64,
}

impl TryFrom<ConeRepr> for Cone {
    type Error = OrbitError;
    fn try_from(r: ConeRepr) -> Result<Self, OrbitError> {
        Cone::new(&r.axis, r.half_angle)
    }
}

impl From<Cone> for ConeRepr {
    fn from(c: Cone) -> Self {
        ConeRepr {
            axis: c.axis.coords().to_vec(),
            half_angle: c.half_angle,
        }
    }
}

impl Cone {
    /// `axis` is normalized; it must lie in the open chamber.
    pub fn new(axis: &[f64], half_angle: f64) -> Result<Self, OrbitError> {
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(OrbitError::InvalidCone(format!("half angle {half_angle} outside (0, π/2)")));
        }
        let v = CartanVector::new(axis.to_vec()).map_err(|e| OrbitError::InvalidCone(e.to_string()))?;
        if !(v.min_root() > 0.0) {
            return Err(OrbitError::InvalidCone("axis must be interior to the chamber".into()));
        }
        Ok(Self {
            axis: v.normalized().expect("nonzero interior vector"),
            half_angle,
        })
    }

    /// A cone around the barycentric direction containing the whole open chamber.
    pub fn chamber_cover(n: usize) -> Self {
        let rho: Vec<f64> = (0..n).map(|i| (n as f64 - 1.0) / 2.0 - i as f64).collect();
        let axis = CartanVector::new(rho).expect("rho is in the chamber").normalized().unwrap();
        let mut widest: f64 = 0.0;
        for k in 1..n {
            // fundamental coweight: k ones then zeros, recentred
            let mean = k as f64 / n as f64;
            let w: Vec<f64> = (0..n).map(|i| if i < k { 1.0 - mean } else { -mean }).collect();
            widest = widest.max(angle_between(axis.coords(), &w));
        }
        let half_angle = (widest + 1e-6).min(std::f64::consts::FRAC_PI_2 - 1e-9);
        Self { axis, half_angle }
    }

    pub fn axis(&self) -> &CartanVector {
        &self.axis
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn contains(&self, v: &CartanVector) -> bool {
        if v.norm() == 0.0 || v.min_root() < -1e-12 {
            return false;
        }
        angle_between(v.coords(), self.axis.coords()) < self.half_angle
    }

    pub fn with_half_angle(&self, half_angle: f64) -> Result<Self, OrbitError> {
        Cone::new(self.axis.coords(), half_angle)
    }
}

pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Dedup {
    Exact,
    FloatTolerant,
    #[default]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumerateOptions {
    pub dedup: Dedup,
    /// Also use inverses of the generators (reduced words in the group).
    pub symmetric: bool,
    pub node_cap: u64,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            dedup: Dedup::None,
            symmetric: false,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrbitRecord {
    /// Letter indices; with symmetric enumeration `k + i` is the inverse of generator `i`.
    pub word: Vec<usize>,
    pub matrix: GroupElement,
    pub kappa: CartanVector,
    pub kak: KakDecomposition,
    /// k·P
    pub k_flag: Flag,
    /// ℓ⁻¹·P⁻
    pub l_flag: OppositeFlag,
}

impl OrbitRecord {
    pub fn from_word(word: Vec<usize>, matrix: GroupElement) -> Result<Self, OrbitError> {
        let kappa = cartan_projection(&matrix)?;
        let kak = kak_decomposition(&matrix)?;
        let (k_flag, l_flag) = cartan_flags(&matrix);
        Ok(Self {
            word,
            matrix,
            kappa,
            kak,
            k_flag,
            l_flag,
        })
    }

    pub fn length(&self) -> usize {
        self.word.len()
    }

    pub fn norm(&self) -> f64 {
        self.kappa.norm()
    }
}

/// Number of reduced words of each length `1..=radius`.
pub fn ball_sizes(letters: usize, radius: usize, symmetric: bool) -> Vec<u64> {
    let mut out = Vec::with_capacity(radius);
    let mut level: u64 = if symmetric { 2 * letters as u64 } else { letters as u64 };
    let branch: u64 = if symmetric { (2 * letters as u64).saturating_sub(1) } else { letters as u64 };
    for _ in 0..radius {
        out.push(level);
        level = level.saturating_mul(branch);
    }
    out
}

enum Key {
    Exact(RationalMatrix),
    Float(Vec<i64>),
}

fn float_key(m: &DMatrix<f64>) -> Vec<i64> {
    m.iter().map(|x| (x / FLOAT_DEDUP_QUANTUM).round() as i64).collect()
}

/// Every reduced word up to `radius`, level by level, in lexicographic order
/// within a level. Duplicate matrices are dropped (and not expanded) under
/// the chosen deduplication policy.
pub fn enumerate_ball(
    generators: &[GroupElement],
    radius: usize,
    opts: &EnumerateOptions,
) -> Result<Vec<OrbitRecord>, OrbitError> {
    if radius < 1 {
        return Err(OrbitError::InvalidRequest("radius must be at least 1".into()));
    }
    if generators.is_empty() {
        return Err(OrbitError::InvalidRequest("no generators".into()));
    }
    let n = generators[0].dim();
    if generators.iter().any(|g| g.dim() != n) {
        return Err(OrbitError::InvalidRequest("generators have different dimensions".into()));
    }
    let nodes: u64 = ball_sizes(generators.len(), radius, opts.symmetric)
        .iter()
        .fold(0u64, |a, b| a.saturating_add(*b));
    if nodes > opts.node_cap {
        return Err(OrbitError::BudgetExceeded {
            nodes,
            cap: opts.node_cap,
        });
    }
    let k = generators.len();
    let mut letters: Vec<GroupElement> = generators.to_vec();
    if opts.symmetric {
        letters.extend(generators.iter().map(|g| g.inverse()));
    }
    let exact = opts.dedup == Dedup::Exact;
    if exact && letters.iter().any(|g| g.exact().is_none()) {
        return Err(OrbitError::DedupUnavailable);
    }
    if !exact {
        letters = letters.into_iter().map(|g| g.without_exact()).collect();
    }
    let inverse_of = |a: usize| if a < k { a + k } else { a - k };
    let mut seen_exact: HashSet<RationalMatrix> = HashSet::new();
    let mut seen_float: HashSet<Vec<i64>> = HashSet::new();
    let mut keep = |m: &GroupElement| -> bool {
        let key = match opts.dedup {
            Dedup::None => return true,
            Dedup::Exact => Key::Exact(m.exact().expect("exact letters").clone()),
            Dedup::FloatTolerant => Key::Float(float_key(m.matrix())),
        };
        match key {
            Key::Exact(r) => seen_exact.insert(r),
            Key::Float(f) => seen_float.insert(f),
        }
    };

    let mut out: Vec<OrbitRecord> = Vec::new();
    let mut frontier: Vec<(Vec<usize>, GroupElement)> = Vec::new();
    for (i, g) in letters.iter().enumerate() {
        if keep(g) {
            frontier.push((vec![i], g.clone()));
        }
    }
    for len in 1..=radius {
        let records: Vec<OrbitRecord> = frontier
            .par_iter()
            .map(|(w, m)| OrbitRecord::from_word(w.clone(), m.clone()))
            .collect::<Result<_, _>>()?;
        out.extend(records);
        if len == radius {
            break;
        }
        let children: Vec<(Vec<usize>, GroupElement)> = frontier
            .par_iter()
            .flat_map_iter(|(w, m)| {
                let last = *w.last().expect("nonempty word");
                let letters = &letters;
                (0..letters.len())
                    .filter(move |&a| !(opts.symmetric && a == inverse_of(last)))
                    .map(move |a| {
                        let mut w2 = w.clone();
                        w2.push(a);
                        let prod = if exact { m.mul(&letters[a]) } else { m.mul_float(&letters[a]) };
                        (w2, prod)
                    })
            })
            .collect();
        frontier = children.into_iter().filter(|(_, m)| keep(m)).collect();
    }
    Ok(out)
}

/// Filter `Γ_{C,x,y,n,ε}` (or its annular version when `width` is set).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterSpec {
    pub cone: Cone,
    pub x: Flag,
    pub y: OppositeFlag,
    pub n_min: f64,
    #[serde(default)]
    pub width: Option<f64>,
    pub epsilon: f64,
}

impl FilterSpec {
    /// Enforces `ε < ζ(x, y)/8`.
    pub fn new(
        cone: Cone,
        x: Flag,
        y: OppositeFlag,
        n_min: f64,
        width: Option<f64>,
        epsilon: f64,
    ) -> Result<Self, OrbitError> {
        let spec = Self::new_unchecked(cone, x, y, n_min, width, epsilon)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Skips the `ε < ζ(x, y)/8` bound (other checks still apply).
    pub fn new_unchecked(
        cone: Cone,
        x: Flag,
        y: OppositeFlag,
        n_min: f64,
        width: Option<f64>,
        epsilon: f64,
    ) -> Result<Self, OrbitError> {
        if x.dim() != y.dim() || x.dim() != cone.axis().dim() {
            return Err(OrbitError::InvalidSpec("dimension mismatch".into()));
        }
        if !(epsilon > 0.0) || !n_min.is_finite() {
            return Err(OrbitError::InvalidSpec("epsilon must be positive and n_min finite".into()));
        }
        if let Some(w) = width {
            if !(w > 0.0) {
                return Err(OrbitError::InvalidSpec("width must be positive".into()));
            }
        }
        Ok(Self {
            cone,
            x,
            y,
            n_min,
            width,
            epsilon,
        })
    }

    pub fn validate(&self) -> Result<(), OrbitError> {
        let z = transversality_margin(&self.x, &self.y);
        if !(self.epsilon < z / 8.0) {
            return Err(OrbitError::InvalidSpec(format!(
                "epsilon {} must be below ζ(x, y)/8 = {}",
                self.epsilon,
                z / 8.0
            )));
        }
        Ok(())
    }

    pub fn accepts(&self, r: &OrbitRecord) -> bool {
        let norm = r.norm();
        if norm < self.n_min {
            return false;
        }
        if let Some(w) = self.width {
            if norm >= self.n_min + w {
                return false;
            }
        }
        self.cone.contains(&r.kappa)
            && flag_distance(&r.k_flag, &self.x) < self.epsilon
            && opposite_distance(&r.l_flag, &self.y) < self.epsilon
    }
}

pub fn filter_gamma_set(records: &[OrbitRecord], spec: &FilterSpec) -> Vec<OrbitRecord> {
    records.iter().filter(|r| spec.accepts(r)).cloned().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShadowMode {
    SymmetricSpace,
    Flag,
}

/// Certain (one-sided) disjointness of O_R(o, a·o) and O_R(o, b·o): a common
/// flag would force d_X(a·o, b·o) ≤ 4R + ‖κ(a) − κ(b)‖.
pub fn sym_shadows_disjoint(a: &OrbitRecord, b: &OrbitRecord, r: f64) -> Result<bool, OrbitError> {
    let d = crate::cartan::symmetric_space_distance(&a.matrix, &b.matrix)?;
    Ok(d > 4.0 * r + a.kappa.distance(&b.kappa))
}

/// In flag mode, R is a flag-distance radius around each k-flag.
pub fn shadows_disjoint(a: &OrbitRecord, b: &OrbitRecord, r: f64, mode: ShadowMode) -> Result<bool, OrbitError> {
    match mode {
        ShadowMode::SymmetricSpace => sym_shadows_disjoint(a, b, r),
        ShadowMode::Flag => Ok(flag_distance(&a.k_flag, &b.k_flag) > 2.0 * r),
    }
}

/// Candidate order: ascending ‖κ‖, ties by word.
pub fn packing_order(candidates: &[OrbitRecord]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..candidates.len()).collect();
    idx.sort_by(|&a, &b| {
        candidates[a]
            .norm()
            .total_cmp(&candidates[b].norm())
            .then_with(|| candidates[a].word.cmp(&candidates[b].word))
    });
    idx
}

/// Greedy maximal subset with pairwise disjoint shadows. `pinned` indices (at
/// most two) are always included, even if their own shadows meet; the rest
/// must avoid them. Returns indices into `candidates`.
pub fn greedy_disjoint_pack(
    candidates: &[OrbitRecord],
    r: f64,
    mode: ShadowMode,
    pinned: &[usize],
) -> Result<Vec<usize>, OrbitError> {
    if candidates.is_empty() {
        return Err(OrbitError::InvalidRequest("no candidates to pack".into()));
    }
    if !(r > 0.0) {
        return Err(OrbitError::InvalidRequest("R must be positive".into()));
    }
    if pinned.len() > 2 || pinned.iter().any(|&p| p >= candidates.len()) {
        return Err(OrbitError::InvalidRequest("at most two valid pinned indices".into()));
    }
    let mut chosen: Vec<usize> = Vec::new();
    for &p in pinned {
        if !chosen.contains(&p) {
            chosen.push(p);
        }
    }
    for i in packing_order(candidates).into_iter().filter(|i| !pinned.contains(i)) {
        let mut ok = true;
        for &j in &chosen {
            if !shadows_disjoint(&candidates[i], &candidates[j], r, mode)? {
                ok = false;
                break;
            }
        }
        if ok {
            chosen.push(i);
        }
    }
    Ok(chosen)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZariskiReport {
    pub span_dimension: usize,
    pub full_matrix_algebra: bool,
    pub jordan_rank: usize,
    pub jordan_full: bool,
    pub loxodromic_count: usize,
    pub verdict: String,
}

pub const ZARISKI_CONSISTENT: &str = "consistent with Zariski dense";
pub const ZARISKI_INCONCLUSIVE: &str = "inconclusive";

/// Dimension of the span of the matrices, adding one at a time. A matrix
/// counts when its residual against the current basis exceeds `tol` relative
/// to its own norm, so long, nearly rank-one words cannot drown the short ones.
fn greedy_span_dimension<'a>(mats: impl Iterator<Item = &'a DMatrix<f64>>, full: usize, tol: f64) -> usize {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for m in mats {
        if basis.len() == full {
            break;
        }
        let norm = m.norm();
        if !(norm > 0.0) {
            continue;
        }
        let mut v = DVector::from_iterator(m.len(), m.iter().map(|x| x / norm));
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let r = v.norm();
        if r > tol {
            basis.push(v / r);
        }
    }
    basis.len()
}

/// Necessary-condition screen only; never proves density.
pub fn zariski_heuristic(records: &[OrbitRecord], gap_tol: f64) -> Result<ZariskiReport, OrbitError> {
    if records.len() < 2 {
        return Err(OrbitError::InvalidRequest("need at least 2 records".into()));
    }
    let n = records[0].matrix.dim();
    let exact: Option<Vec<&RationalMatrix>> = records.iter().map(|r| r.matrix.exact()).collect();
    let span_dimension = match exact {
        Some(ms) => crate::rational::span_dimension(ms.into_iter().take(EXACT_SPAN_RECORDS)),
        None => greedy_span_dimension(records.iter().map(|r| r.matrix.matrix()), n * n, 1e-9),
    };
    let mut lambdas = Vec::new();
    let mut loxodromic_count = 0;
    for r in records {
        let l = jordan_projection(&r.matrix)?;
        if l.min_root() > gap_tol {
            loxodromic_count += 1;
        }
        if l.norm() > gap_tol {
            lambdas.push(l);
        }
    }
    let jordan_rank = if lambdas.is_empty() {
        0
    } else {
        let m = DMatrix::from_fn(n, lambdas.len(), |i, j| lambdas[j].coords()[i] / lambdas[j].norm());
        numerical_rank(&m, 1e-6)
    };
    let full_matrix_algebra = span_dimension == n * n;
    let jordan_full = jordan_rank == n - 1;
    let verdict = if full_matrix_algebra && jordan_full && loxodromic_count > 0 {
        ZARISKI_CONSISTENT
    } else {
        ZARISKI_INCONCLUSIVE
    };
    Ok(ZariskiReport {
        span_dimension,
        full_matrix_algebra,
        jordan_rank,
        jordan_full,
        loxodromic_count,
        verdict: verdict.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sanov() -> Vec<GroupElement> {
        vec![
            GroupElement::from_exact(RationalMatrix::from_integers(&[&[1, 2], &[0, 1]], 1).unwrap()).unwrap(),
            GroupElement::from_exact(RationalMatrix::from_integers(&[&[1, 0], &[2, 1]], 1).unwrap()).unwrap(),
        ]
    }

    #[test]
    fn single_generator_powers() {
        let g = GroupElement::exp_diagonal(&[1.0, -1.0]);
        let recs = enumerate_ball(&[g], 3, &EnumerateOptions::default()).unwrap();
        assert_eq!(recs.len(), 3);
        for (i, r) in recs.iter().enumerate() {
            assert_eq!(r.word, vec![0; i + 1]);
            assert!((r.kappa.coords()[0] - (i + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn two_generators_radius_two() {
        let recs = enumerate_ball(&sanov(), 2, &EnumerateOptions::default()).unwrap();
        assert_eq!(recs.len(), 6);
    }

    #[test]
    fn sanov_ball_is_free() {
        let opts = EnumerateOptions {
            dedup: Dedup::Exact,
            symmetric: true,
            ..Default::default()
        };
        let recs = enumerate_ball(&sanov(), 4, &opts).unwrap();
        assert_eq!(recs.len(), 4 + 12 + 36 + 108);
    }

    #[test]
    fn exact_dedup_needs_exact_entries() {
        let g = GroupElement::exp_diagonal(&[1.0, -1.0]);
        let opts = EnumerateOptions {
            dedup: Dedup::Exact,
            ..Default::default()
        };
        assert_eq!(enumerate_ball(&[g], 2, &opts).unwrap_err(), OrbitError::DedupUnavailable);
    }

    #[test]
    fn node_cap_is_enforced() {
        let opts = EnumerateOptions {
            node_cap: 100,
            ..Default::default()
        };
        assert!(matches!(
            enumerate_ball(&sanov(), 10, &opts),
            Err(OrbitError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn float_dedup_drops_repeats() {
        let g = GroupElement::exp_diagonal(&[1.0, -1.0]);
        let opts = EnumerateOptions {
            dedup: Dedup::FloatTolerant,
            ..Default::default()
        };
        let recs = enumerate_ball(&[g.clone(), g], 3, &opts).unwrap();
        assert_eq!(recs.len(), 3);
    }

    #[test]
    fn cone_membership() {
        let c = Cone::new(&[1.0, 0.0, -1.0], 0.2).unwrap();
        assert!(c.contains(&CartanVector::new(vec![2.0, 0.0, -2.0]).unwrap()));
        assert!(!c.contains(&CartanVector::new(vec![2.0, 2.0, -4.0]).unwrap()));
        assert!(Cone::new(&[1.0, 1.0, -2.0], 0.2).is_err());
        let cover = Cone::chamber_cover(3);
        assert!(cover.contains(&CartanVector::new(vec![2.0, 1.999, -3.999]).unwrap()));
        assert!(cover.contains(&CartanVector::new(vec![4.0, -1.999, -2.001]).unwrap()));
    }

    #[test]
    fn filter_respects_norm_window() {
        let recs = enumerate_ball(&sanov(), 3, &EnumerateOptions::default()).unwrap();
        let max = recs.iter().map(|r| r.norm()).fold(0.0, f64::max);
        let spec = FilterSpec::new(
            Cone::chamber_cover(2),
            Flag::standard(2),
            OppositeFlag::standard(2),
            max + 1.0,
            None,
            0.1,
        )
        .unwrap();
        assert!(filter_gamma_set(&recs, &spec).is_empty());
    }

    #[test]
    fn spec_rejects_large_epsilon() {
        let err = FilterSpec::new(
            Cone::chamber_cover(2),
            Flag::standard(2),
            OppositeFlag::standard(2),
            0.0,
            None,
            0.2,
        )
        .unwrap_err();
        assert!(matches!(err, OrbitError::InvalidSpec(_)));
    }

    #[test]
    fn identical_candidates_pack_to_one() {
        let g = sanov()[0].mul(&sanov()[1]);
        let a = OrbitRecord::from_word(vec![0, 1], g.clone()).unwrap();
        let b = OrbitRecord::from_word(vec![0, 1], g).unwrap();
        let picked = greedy_disjoint_pack(&[a, b], 0.5, ShadowMode::SymmetricSpace, &[]).unwrap();
        assert_eq!(picked.len(), 1);
    }

    #[test]
    fn zariski_examples() {
        let g = GroupElement::exp_diagonal(&[1.0, -1.0]);
        let recs = enumerate_ball(&[g], 4, &EnumerateOptions::default()).unwrap();
        let z = zariski_heuristic(&recs, 1e-6).unwrap();
        assert_eq!(z.span_dimension, 2);
        assert_eq!(z.verdict, ZARISKI_INCONCLUSIVE);
        let opts = EnumerateOptions {
            symmetric: true,
            ..Default::default()
        };
        let recs = enumerate_ball(&sanov(), 4, &opts).unwrap();
        let z = zariski_heuristic(&recs, 1e-6).unwrap();
        assert_eq!(z.span_dimension, 4);
        assert_eq!(z.verdict, ZARISKI_CONSISTENT);
        let rot = enumerate_ball(&[GroupElement::rotation(0.3)], 4, &EnumerateOptions::default()).unwrap();
        let z = zariski_heuristic(&rot, 1e-6).unwrap();
        assert_eq!(z.loxodromic_count, 0);
        assert_eq!(z.verdict, ZARISKI_INCONCLUSIVE);
    }
}
