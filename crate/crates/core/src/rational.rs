//! Exact rational square matrices.
//!
//! Entries are kept in lowest terms (guaranteed by `BigRational`), so two
//! matrices are equal exactly when their entry vectors are equal. That makes
//! the entry vector usable as a hash key for word-collision detection.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalError {
    #[error("cannot parse rational entry {0:?}: expected \"p\" or \"p/q\" with q ≠ 0")]
    Parse(String),
    #[error("entry string too long ({0} bytes)")]
    TooLong(usize),
    #[error("matrix is not square or is empty")]
    Shape,
    #[error("matrix is singular")]
    Singular,
}

/// Longest accepted textual entry; keeps adversarial inputs from allocating huge integers.
pub const MAX_ENTRY_LEN: usize = 4096;

/// Parses `"p"` or `"p/q"` with integer `p`, nonzero integer `q`.
pub fn parse_rational(s: &str) -> Result<BigRational, RationalError> {
    if s.len() > MAX_ENTRY_LEN {
        return Err(RationalError::TooLong(s.len()));
    }
    let t = s.trim();
    if t.is_empty() {
        return Err(RationalError::Parse(s.to_string()));
    }
    BigRational::from_str(t).map_err(|_| RationalError::Parse(s.to_string()))
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<BigRational>,
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        write!(f, "RationalMatrix{rows:?}")
    }
}

impl RationalMatrix {
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self, RationalError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(RationalError::Shape);
        }
        Ok(Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_strings(rows: &[Vec<String>]) -> Result<Self, RationalError> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(parsed)
    }

    /// Builds a matrix from integer numerators over a common denominator.
    pub fn from_integers(rows: &[&[i64]], denominator: i64) -> Result<Self, RationalError> {
        if denominator == 0 {
            return Err(RationalError::Parse("0 denominator".into()));
        }
        let d = BigInt::from(denominator);
        Self::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&x| BigRational::new(BigInt::from(x), d.clone()))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![BigRational::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = BigRational::one();
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            self.get(i, j).to_f64().unwrap_or(f64::NAN)
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigRational::zero();
                for k in 0..n {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc += a * b;
                }
                entries.push(acc);
            }
        }
        Self { n, entries }
    }

    /// Determinant by Gaussian elimination over ℚ.
    pub fn determinant(&self) -> BigRational {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return BigRational::zero();
            };
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col].clone();
            det *= &p;
            for r in col + 1..n {
                if a[r * n + col].is_zero() {
                    continue;
                }
                let f = &a[r * n + col] / &p;
                for j in col..n {
                    let v = &f * &a[col * n + j];
                    a[r * n + j] -= v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan elimination over ℚ.
    pub fn inverse(&self) -> Result<Self, RationalError> {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut inv = Self::identity(n).entries;
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| !a[r * n + col].is_zero())
                .ok_or(RationalError::Singular)?;
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                    inv.swap(piv * n + j, col * n + j);
                }
            }
            let p = a[col * n + col].clone();
            for j in 0..n {
                a[col * n + j] = &a[col * n + j] / &p;
                inv[col * n + j] = &inv[col * n + j] / &p;
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let f = a[r * n + col].clone();
                for j in 0..n {
                    let va = &f * &a[col * n + j];
                    a[r * n + j] -= va;
                    let vi = &f * &inv[col * n + j];
                    inv[r * n + j] -= vi;
                }
            }
        }
        Ok(Self { n, entries: inv })
    }

    /// Largest absolute numerator or denominator bit length; a cheap size measure.
    pub fn max_bits(&self) -> u64 {
        self.entries
            .iter()
            .map(|e| e.numer().abs().bits().max(e.denom().bits()))
            .max()
            .unwrap_or(0)
    }
}

/// Exact dimension of the linear span of the given matrices (as vectors).
pub fn span_dimension<'a>(mats: impl IntoIterator<Item = &'a RationalMatrix>) -> usize {
    let mut basis: Vec<(usize, Vec<BigRational>)> = Vec::new();
    let mut full = None;
    for m in mats {
        let len = m.entries.len();
        if full == Some(basis.len()) {
            break;
        }
        full.get_or_insert(len);
        let mut v = m.entries.clone();
        for (p, b) in &basis {
            if !v[*p].is_zero() {
                let c = v[*p].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= &c * y;
                }
            }
        }
        if let Some(p) = v.iter().position(|x| !x.is_zero()) {
            let c = v[p].clone();
            for x in v.iter_mut() {
                *x /= &c;
            }
            basis.push((p, v));
        }
    }
    basis.len()
}
