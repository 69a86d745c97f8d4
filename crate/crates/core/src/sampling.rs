//! Seeded samplers: Haar frames, random SL(n) elements, and flags drawn from
//! the admissible region `{f : ζ(f, y) ≥ ε}` or its thin inner band.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::flag::{transversality_margin, Flag, OppositeFlag};
use crate::group::GroupElement;
use crate::linalg::qr_positive;

/// Deterministic stream keyed by an element fingerprint and a global seed.
pub fn seeded_rng(key: u64, seed: u64) -> ChaCha8Rng {
    // splitmix64 finalizer over the pair
    let mut z = key ^ seed.rotate_left(29) ^ 0x9E37_79B9_7F4A_7C15;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Haar-distributed orthogonal matrix.
pub fn haar_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let g = gaussian_matrix(n, n, rng);
        let (q, r) = qr_positive(&g);
        if (0..n).all(|i| r[(i, i)] > 1e-12) {
            return q;
        }
    }
}

/// Haar orthogonal matrix with determinant +1.
pub fn haar_special_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut q = haar_orthogonal(n, rng);
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

pub fn haar_flag<R: Rng>(n: usize, rng: &mut R) -> Flag {
    Flag::from_orthonormal(haar_orthogonal(n, rng)).expect("Haar frame is orthonormal")
}

/// Standard-normal matrix scaled to determinant 1, rejected above `cond_cap`.
pub fn random_sl<R: Rng>(n: usize, cond_cap: f64, rng: &mut R) -> GroupElement {
    loop {
        let mut m = gaussian_matrix(n, n, rng);
        let det = m.determinant();
        if det == 0.0 || !det.is_finite() {
            continue;
        }
        if det < 0.0 {
            m.row_mut(0).neg_mut();
        }
        m /= det.abs().powf(1.0 / n as f64);
        let s = crate::linalg::singular_values_sorted(&m);
        if s[0] / s[n - 1] > cond_cap {
            continue;
        }
        if let Ok(g) = GroupElement::new(m) {
            return g;
        }
    }
}

/// Small rotation `exp(δA)` (via QR of `I + δA`, A skew with Gaussian entries),
/// applied on the left of the frame.
pub fn perturb_flag<R: Rng>(f: &Flag, delta: f64, rng: &mut R) -> Flag {
    let n = f.dim();
    let a = gaussian_matrix(n, n, rng);
    let skew = (&a - a.transpose()) * (0.5 / (n as f64).sqrt());
    let (q, _) = qr_positive(&(DMatrix::identity(n, n) + skew * delta));
    Flag::from_orthonormal(&q * f.frame()).expect("rotated frame is orthonormal")
}

/// A flag not transverse to `y` at a random level.
pub fn non_transverse_flag<R: Rng>(y: &OppositeFlag, rng: &mut R) -> Flag {
    let n = y.dim();
    let level = rng.random_range(1..n);
    let mut m = haar_orthogonal(n, rng);
    // Put column `level − 1` inside W_{n−level} = span of y's last n − level columns.
    let coeffs = gaussian_matrix(n - level, 1, rng);
    let v = y.frame().columns(level, n - level) * coeffs;
    m.set_column(level - 1, &v.column(0));
    let (q, _) = qr_positive(&m);
    Flag::from_orthonormal(q).expect("orthonormal")
}

/// Rejection sampler for `{f : ζ(f, y) ≥ eps}`; `None` after `max_tries` misses.
pub fn sample_region<R: Rng>(y: &OppositeFlag, eps: f64, max_tries: usize, rng: &mut R) -> Option<Flag> {
    for _ in 0..max_tries {
        let f = haar_flag(y.dim(), rng);
        if transversality_margin(&f, y) >= eps {
            return Some(f);
        }
    }
    None
}

/// Sample with `eps ≤ ζ(f, y) ≤ 1.1·eps`: bisect along a frame segment from an
/// admissible flag toward a non-transverse one.
pub fn sample_band<R: Rng>(y: &OppositeFlag, eps: f64, max_tries: usize, rng: &mut R) -> Option<Flag> {
    let upper = 1.1 * eps;
    for _ in 0..max_tries {
        let start = sample_region(y, upper, 64, rng)?;
        let end = non_transverse_flag(y, rng);
        let target = rng.random_range(eps..=upper);
        let at = |t: f64| {
            let m = start.frame() * (1.0 - t) + end.frame() * t;
            Flag::from_frame(&m).ok()
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut best = start.clone();
        let mut ok = true;
        for _ in 0..48 {
            let mid = 0.5 * (lo + hi);
            match at(mid) {
                Some(f) if transversality_margin(&f, y) >= target => {
                    lo = mid;
                    best = f;
                }
                Some(_) => hi = mid,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let z = transversality_margin(&best, y);
        if z >= eps && z <= upper {
            return Some(best);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthogonality_defect;

    #[test]
    fn same_key_same_stream() {
        let a: Vec<u64> = (0..4).map({
            let mut r = seeded_rng(7, 9);
            move |_| r.random()
        }).collect();
        let b: Vec<u64> = (0..4).map({
            let mut r = seeded_rng(7, 9);
            move |_| r.random()
        }).collect();
        assert_eq!(a, b);
        let mut c = seeded_rng(7, 10);
        assert_ne!(a[0], c.random::<u64>());
    }

    #[test]
    fn haar_frames_are_orthonormal() {
        let mut rng = seeded_rng(1, 1);
        for n in 2..6 {
            assert!(orthogonality_defect(&haar_orthogonal(n, &mut rng)) < 1e-12);
            assert!(haar_special_orthogonal(n, &mut rng).determinant() > 0.0);
        }
    }

    #[test]
    fn random_sl_respects_cap() {
        let mut rng = seeded_rng(2, 3);
        for _ in 0..50 {
            let g = random_sl(3, 1e2, &mut rng);
            let s = crate::linalg::singular_values_sorted(g.matrix());
            assert!(s[0] / s[2] <= 1e2);
            assert!((g.matrix().determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn non_transverse_has_zero_margin() {
        let mut rng = seeded_rng(3, 3);
        let y = OppositeFlag::standard(4);
        for _ in 0..20 {
            assert!(transversality_margin(&non_transverse_flag(&y, &mut rng), &y) < 1e-10);
        }
    }

    #[test]
    fn band_samples_lie_in_band() {
        let mut rng = seeded_rng(4, 4);
        for n in [2usize, 3] {
            let y = OppositeFlag::standard(n);
            for _ in 0..30 {
                let f = sample_band(&y, 0.1, 50, &mut rng).unwrap();
                let z = transversality_margin(&f, &y);
                assert!((0.1..=0.11).contains(&z), "ζ = {z}");
            }
        }
    }
}
