//! Small dense linear-algebra helpers shared by the geometric modules.
//!
//! Everything here works on `DMatrix<f64>` of modest size (n ≤ 8 in practice).

use nalgebra::{DMatrix, DVector};

/// Singular value decomposition with singular values sorted in decreasing order.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

pub fn svd_sorted(m: &DMatrix<f64>) -> SortedSvd {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let s = svd.singular_values;
    let k = s.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let mut u_sorted = DMatrix::zeros(u.nrows(), k);
    let mut vt_sorted = DMatrix::zeros(k, v_t.ncols());
    let mut s_sorted = DVector::zeros(k);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        vt_sorted.set_row(dst, &v_t.row(src));
        s_sorted[dst] = s[src];
    }
    SortedSvd {
        u: u_sorted,
        singular_values: s_sorted,
        v_t: vt_sorted,
    }
}

/// Singular values only, sorted decreasing.
pub fn singular_values_sorted(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value; closed forms for vectors.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.norm();
    }
    singular_values_sorted(m)[0]
}

/// Smallest singular value of a square matrix.
pub fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].abs();
    }
    *singular_values_sorted(m).last().unwrap_or(&0.0)
}

/// Thin QR factorization `m = q r` normalized so that `r` has a nonnegative diagonal.
pub fn qr_positive(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..r.nrows().min(r.ncols()) {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
            r.row_mut(i).neg_mut();
        }
    }
    (q, r)
}

/// Reverse the column order of a matrix.
pub fn reverse_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    DMatrix::from_fn(m.nrows(), n, |i, j| m[(i, n - 1 - j)])
}

/// Orthonormal frame built from the leading half of `top` and the trailing half of
/// `bottom` (both in flag order). For odd `n` the middle column comes from `top`.
/// The leading block is kept exactly; the rest is orthogonalized against it.
pub fn merge_frames(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let n = top.ncols();
    let h = n / 2;
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    for i in 0..h {
        cols.push(top.column(i).into_owned());
    }
    for i in 0..h {
        cols.push(bottom.column(n - 1 - i).into_owned());
    }
    if n % 2 == 1 {
        cols.push(top.column(h).into_owned());
    }
    let (q, _) = qr_positive(&DMatrix::from_columns(&cols));
    let mut frame = DMatrix::zeros(n, n);
    for i in 0..h {
        frame.set_column(i, &q.column(i));
        frame.set_column(n - 1 - i, &q.column(h + i));
    }
    if n % 2 == 1 {
        frame.set_column(h, &q.column(2 * h));
    }
    frame
}

/// `max |aᵢⱼ − bᵢⱼ|`.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Deviation from orthogonality, `max |mᵀm − I|`.
pub fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.ncols();
    max_abs_diff(&(m.transpose() * m), &DMatrix::identity(n, n))
}

/// Numerical rank using a relative singular-value threshold.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values_sorted(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// All k-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// The k-th exterior power of `m` in the basis of sorted k-subsets.
pub fn exterior_power(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let idx = subsets(n, k);
    let dim = idx.len();
    DMatrix::from_fn(dim, dim, |a, b| {
        let rows = &idx[a];
        let cols = &idx[b];
        DMatrix::from_fn(k, k, |i, j| m[(rows[i], cols[j])]).determinant()
    })
}

/// Neumaier-compensated summation accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(mut self, other: CompensatedSum) -> CompensatedSum {
        self.add(other.sum);
        self.add(other.comp);
        self
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Converts a row-major nested vector into a matrix; `None` if ragged or empty.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first()?.len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
