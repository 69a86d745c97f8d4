//! Full flags and opposite flags in ℝⁿ, the SL(n) action on them, the
//! projector metric, the transversality margin ζ, and the attracting and
//! repelling flags of loxodromic elements.
//!
//! A [`Flag`] stores an orthonormal frame whose first `i` columns span `V_i`;
//! an [`OppositeFlag`] stores one whose last `i` columns span `W_i`. Frames are
//! never sign-canonicalized: every comparison goes through subspaces.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cartan::{jordan_projection, real_eigenvalues_by_modulus, singular_frame, LieError};
use crate::group::GroupElement;
use crate::linalg::{
    merge_frames, numerical_rank, orthogonality_defect, qr_positive, reverse_columns,
    smallest_singular_value, spectral_norm, svd_sorted,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlagError {
    #[error("frame is rank deficient")]
    RankDeficient,
    #[error("frame is not square")]
    Shape,
    #[error("element is not loxodromic at gap tolerance {gap_tol:e}")]
    NotLoxodromic { gap_tol: f64 },
    #[error("flag kind does not match")]
    WrongKind,
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// Relative rank threshold for accepting a frame.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FlagRepr", into = "FlagRepr")]
pub struct Flag {
    frame: DMatrix<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FlagRepr", into = "FlagRepr")]
pub struct OppositeFlag {
    frame: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlagKind {
    Flag,
    Opposite,
}

/// Wire form: `{ "frame": [[...]], "kind": "flag" | "opposite" }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagRepr {
    pub frame: Vec<Vec<f64>>,
    pub kind: FlagKind,
}

impl FlagRepr {
    fn matrix(&self) -> Result<DMatrix<f64>, FlagError> {
        crate::linalg::matrix_from_rows(&self.frame).ok_or(FlagError::Shape)
    }
}

impl TryFrom<FlagRepr> for Flag {
    type Error = FlagError;
    fn try_from(r: FlagRepr) -> Result<Self, FlagError> {
        if r.kind != FlagKind::Flag {
            return Err(FlagError::WrongKind);
        }
        Flag::from_orthonormal(r.matrix()?)
    }
}

impl From<Flag> for FlagRepr {
    fn from(f: Flag) -> Self {
        FlagRepr {
            frame: crate::linalg::matrix_to_rows(&f.frame),
            kind: FlagKind::Flag,
        }
    }
}

impl TryFrom<FlagRepr> for OppositeFlag {
    type Error = FlagError;
    fn try_from(r: FlagRepr) -> Result<Self, FlagError> {
        if r.kind != FlagKind::Opposite {
            return Err(FlagError::WrongKind);
        }
        OppositeFlag::from_orthonormal(r.matrix()?)
    }
}

impl From<OppositeFlag> for FlagRepr {
    fn from(f: OppositeFlag) -> Self {
        FlagRepr {
            frame: crate::linalg::matrix_to_rows(&f.frame),
            kind: FlagKind::Opposite,
        }
    }
}

fn check_full_rank(m: &DMatrix<f64>) -> Result<(), FlagError> {
    if m.nrows() != m.ncols() || m.nrows() < 2 {
        return Err(FlagError::Shape);
    }
    if m.iter().any(|x| !x.is_finite()) || numerical_rank(m, RANK_TOL) < m.nrows() {
        return Err(FlagError::RankDeficient);
    }
    Ok(())
}

/// Orthonormalizes columns starting from the last one.
fn qr_from_last(m: &DMatrix<f64>) -> DMatrix<f64> {
    reverse_columns(&qr_positive(&reverse_columns(m)).0)
}

/// Orthonormal frame for `g·V_•`, using `g` for the leading subspaces and
/// `g⁻ᵀ` (acting on complements) for the trailing ones.
fn push_frame(g: &GroupElement, frame: &DMatrix<f64>) -> DMatrix<f64> {
    let top = qr_positive(&(g.matrix() * frame)).0;
    let bottom = qr_from_last(&(g.inverse_matrix().transpose() * frame));
    merge_frames(&top, &bottom)
}

impl Flag {
    pub fn standard(n: usize) -> Self {
        Self {
            frame: DMatrix::identity(n, n),
        }
    }

    /// Flag through the given frame, orthonormalized in column order.
    pub fn from_frame(m: &DMatrix<f64>) -> Result<Self, FlagError> {
        check_full_rank(m)?;
        Ok(Self {
            frame: qr_positive(m).0,
        })
    }

    /// Wraps a frame already orthonormal to 1e-9.
    pub fn from_orthonormal(frame: DMatrix<f64>) -> Result<Self, FlagError> {
        if frame.nrows() != frame.ncols() || frame.nrows() < 2 {
            return Err(FlagError::Shape);
        }
        if !(orthogonality_defect(&frame) <= 1e-9) {
            return Err(FlagError::RankDeficient);
        }
        Ok(Self { frame })
    }

    /// The flag whose first line is spanned by `v`, completed by coordinate axes.
    pub fn from_direction(v: &[f64]) -> Result<Self, FlagError> {
        let n = v.len();
        let pivot = (0..n)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()))
            .ok_or(FlagError::Shape)?;
        let mut m = DMatrix::zeros(n, n);
        m.set_column(0, &DVector::from_column_slice(v));
        let mut c = 1;
        for j in (0..n).filter(|&j| j != pivot) {
            m[(j, c)] = 1.0;
            c += 1;
        }
        Self::from_frame(&m)
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    /// `g · self`.
    pub fn act(&self, g: &GroupElement) -> Flag {
        Flag {
            frame: push_frame(g, &self.frame),
        }
    }
}

impl OppositeFlag {
    pub fn standard(n: usize) -> Self {
        Self {
            frame: DMatrix::identity(n, n),
        }
    }

    /// Opposite flag through the given frame, orthonormalized from the last column.
    pub fn from_frame(m: &DMatrix<f64>) -> Result<Self, FlagError> {
        check_full_rank(m)?;
        Ok(Self {
            frame: qr_from_last(m),
        })
    }

    pub fn from_orthonormal(frame: DMatrix<f64>) -> Result<Self, FlagError> {
        let f = Flag::from_orthonormal(frame)?;
        Ok(Self { frame: f.frame })
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    /// The same filtration read as an ordinary flag (columns reversed).
    pub fn as_reversed_flag(&self) -> Flag {
        Flag {
            frame: reverse_columns(&self.frame),
        }
    }

    pub fn from_reversed_flag(f: &Flag) -> OppositeFlag {
        OppositeFlag {
            frame: reverse_columns(&f.frame),
        }
    }

    /// `g · self`.
    pub fn act(&self, g: &GroupElement) -> OppositeFlag {
        OppositeFlag::from_reversed_flag(&self.as_reversed_flag().act(g))
    }
}

pub fn flag_from_frame(m: &DMatrix<f64>) -> Result<Flag, FlagError> {
    Flag::from_frame(m)
}

pub fn act_on_flag(g: &GroupElement, f: &Flag) -> Flag {
    f.act(g)
}

pub fn act_on_opposite(g: &GroupElement, y: &OppositeFlag) -> OppositeFlag {
    y.act(g)
}

/// Projector metric on leading-column filtrations of two orthonormal frames.
fn leading_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.ncols();
    let mut d: f64 = 0.0;
    for i in 1..n {
        // ‖Π_A − Π_B‖ = ‖B_⊥ᵀ A_i‖ for equal-dimensional subspaces.
        let cross = b.columns(i, n - i).transpose() * a.columns(0, i);
        d = d.max(spectral_norm(&cross));
    }
    d.min(1.0)
}

/// max over levels of the operator norm of the projector difference.
/// Both orders are evaluated so that symmetry holds bit for bit.
pub fn flag_distance(f1: &Flag, f2: &Flag) -> f64 {
    leading_distance(&f1.frame, &f2.frame).max(leading_distance(&f2.frame, &f1.frame))
}

pub fn opposite_distance(y1: &OppositeFlag, y2: &OppositeFlag) -> f64 {
    let (a, b) = (reverse_columns(&y1.frame), reverse_columns(&y2.frame));
    leading_distance(&a, &b).max(leading_distance(&b, &a))
}

/// ζ(x, y): min over levels of the smallest singular value of `[x_{1..i} | y_{i+1..n}]`.
pub fn transversality_margin(x: &Flag, y: &OppositeFlag) -> f64 {
    let n = x.dim();
    let mut m = f64::INFINITY;
    for i in 1..n {
        let mut cat = DMatrix::zeros(n, n);
        cat.columns_mut(0, i).copy_from(&x.frame.columns(0, i));
        cat.columns_mut(i, n - i).copy_from(&y.frame.columns(i, n - i));
        m = m.min(smallest_singular_value(&cat));
    }
    m.clamp(0.0, 1.0)
}

/// Unit null vector of `m − μI` (right singular vector of the smallest singular value).
fn eigenvector(m: &DMatrix<f64>, mu: f64) -> DVector<f64> {
    let n = m.nrows();
    let shifted = m - DMatrix::identity(n, n) * mu;
    let svd = svd_sorted(&shifted);
    svd.v_t.row(n - 1).transpose()
}

/// Frame whose first `i` columns span the top-`i` eigenvectors of `m`, for `count` columns.
fn dominant_eigenframe(m: &DMatrix<f64>, count: usize) -> Result<DMatrix<f64>, FlagError> {
    let n = m.nrows();
    let ev = real_eigenvalues_by_modulus(m)?.ok_or(FlagError::NotLoxodromic { gap_tol: 0.0 })?;
    let mut cols = DMatrix::identity(n, n);
    for (i, &mu) in ev.iter().take(count).enumerate() {
        cols.set_column(i, &eigenvector(m, mu));
    }
    // Remaining columns are placeholders; only the first `count` are consumed.
    Ok(qr_positive(&cols).0)
}

fn require_loxodromic(g: &GroupElement, gap_tol: f64) -> Result<(), FlagError> {
    let l = jordan_projection(g)?;
    if l.min_root() > gap_tol {
        Ok(())
    } else {
        Err(FlagError::NotLoxodromic { gap_tol })
    }
}

/// x_g⁺: V_i spanned by the eigenvectors of the `i` largest eigenvalue moduli.
pub fn attracting_flag(g: &GroupElement, gap_tol: f64) -> Result<Flag, FlagError> {
    require_loxodromic(g, gap_tol)?;
    let n = g.dim();
    let h = n / 2;
    let not_lox = |e| match e {
        FlagError::NotLoxodromic { .. } => FlagError::NotLoxodromic { gap_tol },
        other => other,
    };
    let top = dominant_eigenframe(g.matrix(), n - h).map_err(not_lox)?;
    // Complements V_i^⊥ are spanned by dominant eigenvectors of g⁻ᵀ.
    let inv_t = g.inverse_matrix().transpose();
    let bottom = reverse_columns(&dominant_eigenframe(&inv_t, h).map_err(not_lox)?);
    Ok(Flag {
        frame: merge_frames(&top, &bottom),
    })
}

/// x_g⁻: W_i spanned by the eigenvectors of the `i` smallest moduli.
pub fn repelling_flag(g: &GroupElement, gap_tol: f64) -> Result<OppositeFlag, FlagError> {
    let f = attracting_flag(&g.inverse(), gap_tol)?;
    Ok(OppositeFlag::from_reversed_flag(&f))
}

/// The flags `k·P` and `ℓ⁻¹·P⁻` of the KA⁺K factors of `g`.
pub fn cartan_flags(g: &GroupElement) -> (Flag, OppositeFlag) {
    let k = singular_frame(g.matrix(), &g.inverse_matrix().transpose());
    // Right singular vectors of g are left singular vectors of gᵀ.
    let v = singular_frame(&g.matrix().transpose(), g.inverse_matrix());
    (Flag { frame: k }, OppositeFlag { frame: v })
}
