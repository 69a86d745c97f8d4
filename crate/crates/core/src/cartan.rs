//! Cartan and Jordan projections, KA⁺K decomposition, Iwasawa cocycle and the
//! symmetric-space distance for SL(n, ℝ).
//!
//! Long words have singular values spread over many orders of magnitude, and a
//! single SVD only resolves the small ones to absolute precision `eps·σ₁`. The
//! projections therefore read the top half of the spectrum from `g` and the
//! bottom half from `g⁻¹` (which every [`GroupElement`] carries); for odd `n`
//! the middle coordinate is fixed by the zero-sum condition.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::GroupElement;
use crate::linalg::{exterior_power, merge_frames, qr_positive, reverse_columns, singular_values_sorted, svd_sorted};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("matrix is numerically singular")]
    SingularMatrix,
    #[error("invalid Cartan vector: {0}")]
    InvalidCartanVector(String),
    #[error("Schur iteration did not converge")]
    SchurFailed,
}

/// A point of the closed positive Weyl chamber: nonincreasing, zero-sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanVector {
    coords: Vec<f64>,
}

/// Tolerance for the zero-sum invariant.
pub const ZERO_SUM_TOL: f64 = 1e-9;
const ORDER_TOL: f64 = 1e-12;

impl CartanVector {
    pub fn new(coords: Vec<f64>) -> Result<Self, LieError> {
        if coords.len() < 2 {
            return Err(LieError::InvalidCartanVector("need at least 2 coordinates".into()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(LieError::InvalidCartanVector("non-finite coordinate".into()));
        }
        let sum: f64 = coords.iter().sum();
        let scale = coords.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if sum.abs() > ZERO_SUM_TOL * scale {
            return Err(LieError::InvalidCartanVector(format!("coordinates sum to {sum}")));
        }
        if coords.windows(2).any(|w| w[0] < w[1] - ORDER_TOL * scale) {
            return Err(LieError::InvalidCartanVector("coordinates are not nonincreasing".into()));
        }
        Ok(Self { coords })
    }

    /// Sorts, recenters and wraps; used on numerically produced coordinates.
    pub fn from_raw(mut coords: Vec<f64>) -> Self {
        coords.sort_by(|a, b| b.total_cmp(a));
        let mean = coords.iter().sum::<f64>() / coords.len() as f64;
        for c in &mut coords {
            *c -= mean;
        }
        Self { coords }
    }

    pub fn zero(n: usize) -> Self {
        Self { coords: vec![0.0; n] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Euclidean distance between coordinate vectors.
    pub fn distance(&self, other: &CartanVector) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, s: f64) -> Vec<f64> {
        self.coords.iter().map(|x| x * s).collect()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(&self) -> Option<CartanVector> {
        let r = self.norm();
        (r > 0.0).then(|| CartanVector {
            coords: self.scaled(1.0 / r),
        })
    }

    pub fn min_root(&self) -> f64 {
        self.coords
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootValue {
    /// 1-based root index.
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct KakDecomposition {
    pub k: DMatrix<f64>,
    pub a: CartanVector,
    pub l: DMatrix<f64>,
}

impl KakDecomposition {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DVector::from_iterator(self.a.dim(), self.a.coords().iter().map(|x| x.exp()));
        &self.k * DMatrix::from_diagonal(&d) * &self.l
    }
}

/// Merges "top half from `g`" and "bottom half from `g⁻¹`" log-spectra.
/// `top` and `top_inv` are sorted-descending logs of the respective spectra.
fn hybrid_coords(top: &[f64], top_inv: &[f64]) -> Vec<f64> {
    let n = top.len();
    let h = n / 2;
    let mut c = vec![0.0; n];
    for i in 0..h {
        c[i] = top[i];
        c[n - 1 - i] = -top_inv[i];
    }
    if n % 2 == 1 {
        let rest: f64 = c.iter().sum();
        c[h] = -rest;
    }
    c
}

fn hybrid_from_spectra(s: &[f64], t: &[f64]) -> Result<CartanVector, LieError> {
    // Only the leading halves are consumed; the trailing entries may underflow.
    let h = (s.len() / 2).max(1);
    if s[..h].iter().chain(&t[..h]).any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(LieError::SingularMatrix);
    }
    let ls: Vec<f64> = s.iter().map(|x| x.max(f64::MIN_POSITIVE).ln()).collect();
    let lt: Vec<f64> = t.iter().map(|x| x.max(f64::MIN_POSITIVE).ln()).collect();
    Ok(CartanVector::from_raw(hybrid_coords(&ls, &lt)))
}

/// κ(g): sorted logs of the singular values.
pub fn cartan_projection(g: &GroupElement) -> Result<CartanVector, LieError> {
    let s = singular_values_sorted(g.matrix());
    let t = singular_values_sorted(g.inverse_matrix());
    hybrid_from_spectra(&s, &t)
}

/// `g = k · exp(a) · l` with `k, l ∈ SO(n)`.
pub fn kak_decomposition(g: &GroupElement) -> Result<KakDecomposition, LieError> {
    let a = cartan_projection(g)?;
    let svd = svd_sorted(g.matrix());
    let mut k = svd.u;
    let mut l = svd.v_t;
    if k.determinant() < 0.0 {
        let last = k.ncols() - 1;
        k.column_mut(last).neg_mut();
        l.row_mut(last).neg_mut();
    }
    Ok(KakDecomposition { k, a, l })
}

/// Orthonormal frame of left singular vectors of `m`, ordered by decreasing
/// singular value. The trailing half is taken from `m⁻ᵀ` (same left singular
/// vectors, reversed order), where those directions are dominant.
pub fn singular_frame(m: &DMatrix<f64>, m_inv_t: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let top = refine_leading(m, svd_sorted(m).u, n - n / 2);
    let bottom = reverse_columns(&refine_leading(m_inv_t, svd_sorted(m_inv_t).u, n / 2));
    merge_frames(&top, &bottom)
}

/// One subspace-iteration step on the leading `k` left singular vectors.
/// The SVD leaves errors of order eps·σ₁/σ_k; after the step they are damped
/// by (σ_{k+1}/σ_k)².
fn refine_leading(m: &DMatrix<f64>, mut u: DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let scale = m.amax();
    if k == 0 || !(scale > 0.0) || !scale.is_finite() {
        return u;
    }
    let ms = m / scale;
    let block = u.columns(0, k).into_owned();
    let y = &ms * (ms.transpose() * &block);
    let (q, _) = crate::linalg::qr_positive(&y);
    for j in 0..k {
        let mut c = q.column(j).into_owned();
        if !c.iter().all(|x| x.is_finite()) {
            return u;
        }
        if c.dot(&block.column(j)) < 0.0 {
            c.neg_mut();
        }
        u.set_column(j, &c);
    }
    u
}

/// Eigenvalues of `m` as `(re, im)` pairs, read from the real Schur form.
pub fn schur_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<(f64, f64)>, LieError> {
    let n = m.nrows();
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-15, 10_000)
        .ok_or(LieError::SchurFailed)?;
    let (_, t) = schur.unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let det = t[(i, i)] * t[(i + 1, i + 1)] - t[(i, i + 1)] * t[(i + 1, i)];
            let tr = t[(i, i)] + t[(i + 1, i + 1)];
            let disc = tr * tr - 4.0 * det;
            if disc >= 0.0 {
                // Unreduced block with real eigenvalues.
                let r = disc.sqrt();
                let big = (tr + tr.signum() * r) / 2.0;
                let small = if big != 0.0 { det / big } else { 0.0 };
                out.push((big, 0.0));
                out.push((small, 0.0));
            } else {
                let im = (-disc).sqrt() / 2.0;
                out.push((tr / 2.0, im));
                out.push((tr / 2.0, -im));
            }
            i += 2;
        } else {
            out.push((t[(i, i)], 0.0));
            i += 1;
        }
    }
    Ok(out)
}

/// Eigenvalue moduli of `m`, sorted decreasing.
pub fn eigenvalue_moduli(m: &DMatrix<f64>) -> Result<Vec<f64>, LieError> {
    let mut out: Vec<f64> = schur_eigenvalues(m)?
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// Real eigenvalues sorted by decreasing modulus; `None` if any is non-real.
pub fn real_eigenvalues_by_modulus(m: &DMatrix<f64>) -> Result<Option<Vec<f64>>, LieError> {
    let ev = schur_eigenvalues(m)?;
    if ev.iter().any(|&(_, im)| im != 0.0) {
        return Ok(None);
    }
    let mut re: Vec<f64> = ev.into_iter().map(|(r, _)| r).collect();
    re.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    Ok(Some(re))
}

/// λ(g): sorted logs of eigenvalue moduli.
pub fn jordan_projection(g: &GroupElement) -> Result<CartanVector, LieError> {
    let s = eigenvalue_moduli(g.matrix())?;
    let t = eigenvalue_moduli(g.inverse_matrix())?;
    hybrid_from_spectra(&s, &t)
}

/// ι(h) = −w₀h: reverse and negate.
pub fn opposition_involution(h: &CartanVector) -> CartanVector {
    CartanVector {
        coords: h.coords.iter().rev().map(|x| -x).collect(),
    }
}

pub fn simple_root_values(h: &CartanVector) -> Vec<RootValue> {
    h.coords
        .windows(2)
        .enumerate()
        .map(|(i, w)| RootValue {
            index: i + 1,
            value: w[0] - w[1],
        })
        .collect()
}

/// B(g, F) for the flag with orthonormal frame `frame`.
pub fn iwasawa_cocycle(g: &GroupElement, frame: &DMatrix<f64>) -> Vec<f64> {
    let n = g.dim();
    let h = n / 2;
    let (_, r) = qr_positive(&(g.matrix() * frame));
    // g⁻ᵀk = Q R⁻ᵀ; reversing columns turns R⁻ᵀ upper triangular with diagonal 1/R_{n-1-j}.
    let (_, r_inv) = qr_positive(&reverse_columns(&(g.inverse_matrix().transpose() * frame)));
    let mut b = vec![0.0; n];
    for i in 0..h {
        b[i] = r[(i, i)].ln();
        b[n - 1 - i] = -r_inv[(i, i)].ln();
    }
    if n % 2 == 1 {
        let rest: f64 = b.iter().sum();
        b[h] = -rest;
    }
    b
}

/// d_X(g·o, h·o) = ‖κ(g⁻¹h)‖.
pub fn symmetric_space_distance(g: &GroupElement, h: &GroupElement) -> Result<f64, LieError> {
    Ok(cartan_projection(&g.inverse().mul_float(h))?.norm())
}

pub fn is_loxodromic(g: &GroupElement, gap_tol: f64) -> bool {
    match jordan_projection(g) {
        Ok(l) => l.min_root() > gap_tol,
        Err(_) => false,
    }
}

/// κ(gᵐ)/m computed through exterior powers: the k-th partial sum of κ(gᵐ) is
/// log σ₁((Λᵏg)ᵐ), and the powers are renormalized at every step.
pub fn cartan_of_power_normalized(g: &GroupElement, m: usize) -> CartanVector {
    assert!(m >= 1);
    let n = g.dim();
    let mut partial = vec![0.0; n + 1];
    for (k, slot) in partial.iter_mut().enumerate().take(n).skip(1) {
        let base = exterior_power(g.matrix(), k);
        let mut acc = base.clone();
        let mut log_scale = 0.0;
        for _ in 1..m {
            acc = &acc * &base;
            let s = acc.amax();
            if s > 0.0 {
                acc /= s;
                log_scale += s.ln();
            }
        }
        let top = singular_values_sorted(&acc)[0];
        *slot = (log_scale + top.ln()) / m as f64;
    }
    CartanVector::from_raw((0..n).map(|i| partial[i + 1] - partial[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, orthogonality_defect};
    use approx::assert_abs_diff_eq;

    fn el(n: usize, d: &[f64]) -> GroupElement {
        GroupElement::from_row_slice(n, d).unwrap()
    }

    #[test]
    fn cartan_of_identity_and_diagonal() {
        let id = GroupElement::identity(3);
        assert_eq!(cartan_projection(&id).unwrap().coords(), &[0.0, 0.0, 0.0]);
        let e = std::f64::consts::E;
        let g = GroupElement::diagonal(&[e, 1.0, 1.0 / e]).unwrap();
        let k = cartan_projection(&g).unwrap();
        for (a, b) in k.coords().iter().zip([1.0, 0.0, -1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn cartan_of_antidiagonal() {
        // gᵀg = diag(1/4, 4)
        let g = el(2, &[0.0, 2.0, -0.5, 0.0]);
        let k = cartan_projection(&g).unwrap();
        assert_abs_diff_eq!(k.coords()[0], 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(k.coords()[1], -(2f64.ln()), epsilon = 1e-12);
    }

    #[test]
    fn kak_reconstructs_with_special_orthogonal_factors() {
        let g = el(3, &[2.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.3, -0.2, 1.0]);
        let kak = kak_decomposition(&g).unwrap();
        assert!(max_abs_diff(&kak.reconstruct(), g.matrix()) < 1e-10);
        assert!(orthogonality_defect(&kak.k) < 1e-12);
        assert!(orthogonality_defect(&kak.l) < 1e-12);
        assert!(kak.k.determinant() > 0.0 && kak.l.determinant() > 0.0);
    }

    #[test]
    fn jordan_of_golden_matrix() {
        let g = el(2, &[2.0, 1.0, 1.0, 1.0]);
        let l = jordan_projection(&g).unwrap();
        let phi2 = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert_abs_diff_eq!(l.coords()[0], phi2, epsilon = 1e-12);
        assert_abs_diff_eq!(l.coords()[1], -phi2, epsilon = 1e-12);
    }

    #[test]
    fn jordan_of_rotation_is_zero() {
        let l = jordan_projection(&GroupElement::rotation(0.7)).unwrap();
        assert!(l.norm() < 1e-12);
        assert!(!is_loxodromic(&GroupElement::rotation(0.7), 1e-6));
    }

    #[test]
    fn unipotent_is_not_loxodromic() {
        assert!(!is_loxodromic(&el(2, &[1.0, 1.0, 0.0, 1.0]), 1e-6));
        assert!(is_loxodromic(&GroupElement::diagonal(&[3.0, 1.0 / 3.0]).unwrap(), 0.1));
    }

    #[test]
    fn opposition_and_roots() {
        let h = CartanVector::new(vec![3.0, -1.0, -2.0]).unwrap();
        assert_eq!(opposition_involution(&h).coords(), &[2.0, 1.0, -3.0]);
        let r = simple_root_values(&CartanVector::new(vec![5.0, 1.0, -6.0]).unwrap());
        assert_eq!(r.iter().map(|x| x.value).collect::<Vec<_>>(), vec![4.0, 7.0]);
        assert_eq!(r[1].index, 2);
    }

    #[test]
    fn cartan_vector_validation() {
        assert!(CartanVector::new(vec![1.0, 0.0]).is_err());
        assert!(CartanVector::new(vec![-1.0, 1.0]).is_err());
        assert!(CartanVector::new(vec![0.0]).is_err());
    }

    #[test]
    fn iwasawa_of_diagonal_on_standard_flag() {
        let g = GroupElement::exp_diagonal(&[3.0, -1.0, -2.0]);
        let b = iwasawa_cocycle(&g, &DMatrix::identity(3, 3));
        for (x, y) in b.iter().zip([3.0, -1.0, -2.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn distance_examples() {
        let g = GroupElement::exp_diagonal(&[2.0, -2.0]);
        let id = GroupElement::identity(2);
        assert_abs_diff_eq!(symmetric_space_distance(&id, &g).unwrap(), 8f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(symmetric_space_distance(&g, &g).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn long_power_keeps_small_singular_values() {
        let g = el(2, &[2.0, 1.0, 1.0, 1.0]);
        let p = g.pow(40);
        let k = cartan_projection(&p).unwrap();
        let phi2 = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((k.coords()[0] - 40.0 * phi2).abs() < 1e-9);
        assert!((k.coords()[1] + 40.0 * phi2).abs() < 1e-9);
    }

    #[test]
    fn cesaro_power_matches_jordan() {
        let g = el(3, &[2.0, 1.0, 0.0, 1.0, 1.0, 0.5, 0.0, 0.0, 1.0]);
        let c = cartan_of_power_normalized(&g, 64);
        let l = jordan_projection(&g).unwrap();
        assert!(c.distance(&l) < 0.05);
    }
}
