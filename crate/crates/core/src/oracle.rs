//! Reference computations for tests. Each one takes a different route from
//! the code it checks: scalar Gauss-Jordan elimination for inverses, a full
//! SVD of the whole matrix for truncation ranks, and explicit constructions
//! with known spectra.

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{complex_gaussian, random_orthonormal, ComplexMatrix};

/// Gauss-Jordan inverse with partial pivoting on plain row-major storage.
pub fn gauss_jordan_inverse(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.nrows();
    let w = 2 * n;
    let mut m: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n * w];
    for i in 0..n {
        for j in 0..n {
            m[i * w + j] = a[(i, j)];
        }
        m[i * w + n + i] = Complex64::new(1.0, 0.0);
    }
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&x, &y| m[x * w + col].norm().total_cmp(&m[y * w + col].norm()))?;
        if m[pivot * w + col].norm() == 0.0 {
            return None;
        }
        if pivot != col {
            for j in 0..w {
                m.swap(col * w + j, pivot * w + j);
            }
        }
        let inv_p = Complex64::new(1.0, 0.0) / m[col * w + col];
        for j in 0..w {
            m[col * w + j] *= inv_p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[i * w + col];
            if f.norm() == 0.0 {
                continue;
            }
            for j in 0..w {
                let v = m[col * w + j];
                m[i * w + j] -= f * v;
            }
        }
    }
    Some(ComplexMatrix::from_fn(n, n, |i, j| m[i * w + n + j]))
}

/// Smallest `r` whose leading singular values hold `η` of the energy, from
/// the full SVD of `a` (0 for a zero matrix).
pub fn energy_truncation_rank(a: &ComplexMatrix, eta: f64) -> usize {
    let mut sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    truncation_rank_of_spectrum(&sv, eta)
}

/// Same rule applied to a known spectrum.
pub fn truncation_rank_of_spectrum(sigma: &[f64], eta: f64) -> usize {
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 0;
    }
    let mut acc = 0.0;
    for (j, s) in sigma.iter().enumerate() {
        acc += s * s;
        if acc >= eta * total {
            return j + 1;
        }
    }
    sigma.len()
}

/// `U diag(σ) Vᴴ` with Haar-random `U`, `V`.
pub fn with_spectrum<R: Rng + ?Sized>(sigma: &[f64], rng: &mut R) -> ComplexMatrix {
    let k = sigma.len();
    let u = random_orthonormal(k, k, rng);
    let v = random_orthonormal(k, k, rng);
    let mut us = u;
    for (j, &s) in sigma.iter().enumerate() {
        us.column_mut(j).scale_mut(s);
    }
    us * v.adjoint()
}

/// Random Hermitian positive-definite matrix `G Gᴴ / K + shift · I`.
pub fn hermitian_pd<R: Rng + ?Sized>(k: usize, shift: f64, rng: &mut R) -> ComplexMatrix {
    let g = complex_gaussian(k, k, rng);
    let mut a = &g * g.adjoint() / Complex64::new(k as f64, 0.0);
    for i in 0..k {
        a[(i, i)] += Complex64::new(shift, 0.0);
    }
    a
}

/// Exact rank-`r` Hermitian perturbation `Q diag(λ) Qᴴ` with eigenvalues
/// `λ` of either sign and magnitude in `[lo, hi]`, returned as the dense
/// matrix together with the factor `(U = Q, σ = |λ|, V = Q sign(λ))`.
pub fn hermitian_low_rank<R: Rng + ?Sized>(
    k: usize,
    r: usize,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> (ComplexMatrix, crate::lowrank::LowRankFactor) {
    let q = random_orthonormal(k, r, rng);
    let mut lambda: Vec<f64> = (0..r)
        .map(|_| {
            let mag = lo + (hi - lo) * rng.random::<f64>();
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    lambda.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut v = q.clone();
    let mut ql = q.clone();
    for (j, &l) in lambda.iter().enumerate() {
        ql.column_mut(j).scale_mut(l);
        if l < 0.0 {
            v.column_mut(j).scale_mut(-1.0);
        }
    }
    let dense = ql * q.adjoint();
    let factor = crate::lowrank::LowRankFactor {
        u: q,
        sigma: lambda.iter().map(|l| l.abs()).collect(),
        v,
    };
    (dense, factor)
}
