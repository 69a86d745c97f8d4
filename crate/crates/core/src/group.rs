//! Elements of SL(n, ℝ), optionally carrying exact rational entries.
//!
//! Every element stores its inverse alongside its entries. Products update both
//! (`(gh)⁻¹ = h⁻¹g⁻¹`), so the inverse of a long word is never obtained by
//! inverting an ill-conditioned float matrix. The bottom half of the Cartan
//! and Jordan projections is read off the inverse for that reason.

use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};
use num::{BigRational, One};
use thiserror::Error;

use crate::rational::{RationalError, RationalMatrix};

/// Ingestion tolerance on `|det g − 1|`.
pub const DET_TOLERANCE: f64 = 1e-9;

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("matrix must be square with 2 ≤ n ≤ {MAX_DIM}, got {rows}×{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("determinant {det} is not 1 within {DET_TOLERANCE:e}")]
    Determinant { det: f64 },
    #[error("exact determinant is {0}, not 1")]
    ExactDeterminant(String),
    #[error("float entries disagree with exact entries at ({row}, {col})")]
    ExactMismatch { row: usize, col: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Rational(#[from] RationalError),
}

#[derive(Clone, Debug)]
pub struct GroupElement {
    entries: DMatrix<f64>,
    inverse: DMatrix<f64>,
    exact: Option<RationalMatrix>,
}

impl GroupElement {
    /// Validated constructor: square, finite, `|det − 1| ≤ 1e-9`.
    pub fn new(entries: DMatrix<f64>) -> Result<Self, GroupError> {
        check_shape(&entries)?;
        let det = entries.determinant();
        if !det.is_finite() || (det - 1.0).abs() > DET_TOLERANCE {
            return Err(GroupError::Determinant { det });
        }
        let inverse = entries
            .clone()
            .try_inverse()
            .ok_or(GroupError::Determinant { det })?;
        Ok(Self {
            entries,
            inverse,
            exact: None,
        })
    }

    /// For matrices that are computed products rather than user input: the
    /// tolerance is scaled by the Hadamard bound Π‖columns‖, which is the
    /// size of the rounding error of a float determinant.
    pub fn new_computed(entries: DMatrix<f64>) -> Result<Self, GroupError> {
        check_shape(&entries)?;
        let det = entries.determinant();
        let hadamard: f64 = entries.column_iter().map(|c| c.norm()).product();
        if !det.is_finite() || (det - 1.0).abs() > DET_TOLERANCE * hadamard.max(1.0) {
            return Err(GroupError::Determinant { det });
        }
        let inverse = entries
            .clone()
            .try_inverse()
            .ok_or(GroupError::Determinant { det })?;
        Ok(Self {
            entries,
            inverse,
            exact: None,
        })
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self, GroupError> {
        if data.len() != n * n {
            return Err(GroupError::Shape {
                rows: n,
                cols: data.len() / n.max(1),
            });
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    /// Exact constructor: determinant must be exactly 1.
    pub fn from_exact(exact: RationalMatrix) -> Result<Self, GroupError> {
        let n = exact.dim();
        if !(2..=MAX_DIM).contains(&n) {
            return Err(GroupError::Shape { rows: n, cols: n });
        }
        let det = exact.determinant();
        if det != BigRational::one() {
            return Err(GroupError::ExactDeterminant(det.to_string()));
        }
        let inverse = exact.inverse()?;
        let entries = exact.to_f64();
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(GroupError::NonFinite);
        }
        Ok(Self {
            entries,
            inverse: inverse.to_f64(),
            exact: Some(exact),
        })
    }

    /// Float entries plus an exact companion that must agree with them.
    pub fn with_exact(entries: DMatrix<f64>, exact: RationalMatrix) -> Result<Self, GroupError> {
        let g = Self::from_exact(exact)?;
        check_shape(&entries)?;
        if entries.nrows() != g.dim() {
            return Err(GroupError::DimensionMismatch(entries.nrows(), g.dim()));
        }
        for i in 0..g.dim() {
            for j in 0..g.dim() {
                let a = entries[(i, j)];
                let b = g.entries[(i, j)];
                if (a - b).abs() > 1e-12 * (1.0 + b.abs()) {
                    return Err(GroupError::ExactMismatch { row: i, col: j });
                }
            }
        }
        Ok(g)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
            inverse: DMatrix::identity(n, n),
            exact: Some(RationalMatrix::identity(n)),
        }
    }

    /// `diag(d)`; the product of `d` must be 1.
    pub fn diagonal(d: &[f64]) -> Result<Self, GroupError> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    /// `exp(diag(h))` for a zero-sum vector `h`, built without a determinant round trip.
    pub fn exp_diagonal(h: &[f64]) -> Self {
        let n = h.len();
        Self {
            entries: DMatrix::from_fn(n, n, |i, j| if i == j { h[i].exp() } else { 0.0 }),
            inverse: DMatrix::from_fn(n, n, |i, j| if i == j { (-h[i]).exp() } else { 0.0 }),
            exact: None,
        }
    }

    /// Planar rotation by `theta` in SL(2, ℝ).
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_orthogonal(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    /// Wraps an orthogonal matrix of determinant +1; the inverse is its transpose.
    pub fn from_orthogonal(k: DMatrix<f64>) -> Self {
        let inverse = k.transpose();
        Self {
            entries: k,
            inverse,
            exact: None,
        }
    }

    /// Trusted constructor for matrices known to lie in SL(n) by construction.
    pub(crate) fn from_parts(entries: DMatrix<f64>, inverse: DMatrix<f64>) -> Self {
        Self {
            entries,
            inverse,
            exact: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn inverse_matrix(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn exact(&self) -> Option<&RationalMatrix> {
        self.exact.as_ref()
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            entries: self.inverse.clone(),
            inverse: self.entries.clone(),
            exact: self.exact.as_ref().and_then(|e| e.inverse().ok()),
        }
    }

    /// Product `self · other`; exact entries are multiplied when both sides have them.
    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in product");
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(a.mul(b)),
            _ => None,
        };
        GroupElement {
            entries: &self.entries * &other.entries,
            inverse: &other.inverse * &self.inverse,
            exact,
        }
    }

    /// Product that skips the exact companion.
    pub fn mul_float(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            entries: &self.entries * &other.entries,
            inverse: &other.inverse * &self.inverse,
            exact: None,
        }
    }

    /// `self · k · other` shortcut is not needed; conjugation `h g h⁻¹`.
    pub fn conjugate_by(&self, h: &GroupElement) -> GroupElement {
        h.mul(self).mul(&h.inverse())
    }

    pub fn pow(&self, k: usize) -> GroupElement {
        let mut acc = GroupElement::identity(self.dim());
        if self.exact.is_none() {
            acc.exact = None;
        }
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Product of a word in the given letters.
    pub fn word(letters: &[GroupElement], word: &[usize]) -> GroupElement {
        assert!(!word.is_empty(), "empty word");
        let mut acc = letters[word[0]].clone();
        for &w in &word[1..] {
            acc = acc.mul(&letters[w]);
        }
        acc
    }

    pub fn without_exact(mut self) -> GroupElement {
        self.exact = None;
        self
    }

    /// Stable 64-bit fingerprint of the float entries (bit patterns).
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.dim().hash(&mut h);
        for x in self.entries.iter() {
            x.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

fn check_shape(m: &DMatrix<f64>) -> Result<(), GroupError> {
    let (r, c) = m.shape();
    if r != c || !(2..=MAX_DIM).contains(&r) {
        return Err(GroupError::Shape { rows: r, cols: c });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(GroupError::NonFinite);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn rejects_wrong_determinant() {
        let err = GroupElement::from_row_slice(2, &[2.0, 0.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, GroupError::Determinant { .. }));
    }

    #[test]
    fn rejects_non_square_and_tiny() {
        assert!(GroupElement::new(DMatrix::from_element(2, 3, 1.0)).is_err());
        assert!(GroupElement::new(DMatrix::from_element(1, 1, 1.0)).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let err = GroupElement::from_row_slice(2, &[f64::NAN, 0.0, 0.0, 1.0]).unwrap_err();
        assert_eq!(err, GroupError::NonFinite);
    }

    #[test]
    fn exact_determinant_must_be_one() {
        let m = RationalMatrix::from_integers(&[&[2, 0], &[0, 1]], 1).unwrap();
        assert!(matches!(
            GroupElement::from_exact(m),
            Err(GroupError::ExactDeterminant(_))
        ));
    }

    #[test]
    fn product_tracks_inverse_and_exact() {
        let a = GroupElement::from_exact(
            RationalMatrix::from_integers(&[&[1, 2], &[0, 1]], 1).unwrap(),
        )
        .unwrap();
        let b = GroupElement::from_exact(
            RationalMatrix::from_integers(&[&[1, 0], &[2, 1]], 1).unwrap(),
        )
        .unwrap();
        let ab = a.mul(&b);
        let id = ab.matrix() * ab.inverse_matrix();
        assert!(max_abs_diff(&id, &DMatrix::identity(2, 2)) < 1e-12);
        assert_eq!(ab.exact().unwrap().to_f64(), *ab.matrix());
    }

    #[test]
    fn mismatched_exact_is_rejected() {
        let exact = RationalMatrix::from_integers(&[&[1, 2], &[0, 1]], 1).unwrap();
        let floats = DMatrix::from_row_slice(2, 2, &[1.0, 2.5, 0.0, 1.0]);
        assert!(matches!(
            GroupElement::with_exact(floats, exact),
            Err(GroupError::ExactMismatch { row: 0, col: 1 })
        ));
    }
}
