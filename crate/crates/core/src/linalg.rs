//! Dense complex helpers shared by the inverse tracker, the channel model and
//! the precoder. Everything here works on `nalgebra` dynamic matrices of
//! `Complex64`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{dim_mismatch, Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Condition estimate above which a Hermitian matrix is treated as singular.
pub const SINGULAR_COND: f64 = 1e14;

/// Condition estimate above which the Woodbury auxiliary matrix is rejected.
pub const AUXILIARY_COND: f64 = 1e12;

pub fn frobenius_sq(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    frobenius_sq(m).sqrt()
}

/// `‖a − b‖_F / ‖b‖_F`, or the absolute error when `b` is zero.
pub fn relative_frobenius_error(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let diff = frobenius(&(a - b));
    let scale = frobenius(b);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Relative Frobenius distance between `a` and its conjugate transpose.
pub fn hermitian_defect(a: &ComplexMatrix) -> f64 {
    let scale = frobenius(a);
    let diff = frobenius(&(a - a.adjoint()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Induced 1-norm (maximum absolute column sum).
pub fn one_norm(a: &ComplexMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Distance of `a · b` from the identity in Frobenius norm.
pub fn identity_defect(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    frobenius(&(a * b - ComplexMatrix::identity(n, n)))
}

fn require_square(op: &'static str, a: &ComplexMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(dim_mismatch(
            op,
            "square matrix",
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    Ok(())
}

/// Inverse of a Hermitian matrix by Cholesky factor-then-solve.
///
/// Indefinite (but nonsingular) Hermitian input falls back to a pivoted LU
/// solve. The result is rejected with [`Error::SingularMatrix`] when the
/// 1-norm condition number `‖A‖₁‖A⁻¹‖₁` exceeds [`SINGULAR_COND`].
pub fn direct_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_square("direct_inverse", a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let inv = match cholesky_inverse(a) {
        Some(inv) => inv,
        None => a.clone().lu().try_inverse().ok_or(Error::SingularMatrix {
            cond: f64::INFINITY,
        })?,
    };
    let cond = one_norm(a) * one_norm(&inv);
    if !cond.is_finite() || cond > SINGULAR_COND {
        return Err(Error::SingularMatrix { cond });
    }
    Ok(inv)
}

/// `A⁻¹ = L⁻ᴴ L⁻¹` from the factorization `A = L Lᴴ`. `None` unless every
/// pivot is real and positive (the input is read as Hermitian; only its
/// lower triangle is used).
fn cholesky_inverse(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.nrows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    // Forward substitution for L⁻¹, column by column.
    let mut l_inv = ComplexMatrix::zeros(n, n);
    for c in 0..n {
        l_inv[(c, c)] = Complex64::new(1.0 / l[(c, c)].re, 0.0);
        for i in c + 1..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in c..i {
                s += l[(i, k)] * l_inv[(k, c)];
            }
            l_inv[(i, c)] = -s / l[(i, i)].re;
        }
    }
    let mut inv = l_inv.adjoint() * &l_inv;
    for i in 0..n {
        inv[(i, i)].im = 0.0;
        for j in i + 1..n {
            inv[(j, i)] = inv[(i, j)].conj();
        }
    }
    Some(inv)
}

/// Pivoted-LU inverse of a general square matrix together with its 1-norm
/// condition number. `None` when the LU factorization hits an exact zero pivot.
pub fn lu_inverse(a: &ComplexMatrix) -> Result<Option<(ComplexMatrix, f64)>> {
    require_square("lu_inverse", a)?;
    Ok(a.clone().lu().try_inverse().map(|inv| {
        let cond = one_norm(a) * one_norm(&inv);
        (inv, cond)
    }))
}

/// Thin QR basis of `y` (rows ≥ cols), with column phases fixed so that the
/// diagonal of `R` is real and nonnegative.
pub fn thin_qr(y: &ComplexMatrix) -> ComplexMatrix {
    let qr = y.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols().min(r.nrows()) {
        let d = r[(j, j)];
        let mag = d.norm();
        if mag > 0.0 {
            let phase = d / mag;
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Singular value decomposition `b = U diag(σ) Vᴴ` with σ sorted in
/// non-increasing order. Returns `(U, σ, V)` with thin factors.
pub fn svd_sorted(b: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let svd = b.clone().svd(true, true);
    let u = svd.u.expect("U requested");
    let v = svd.v_t.expect("Vᴴ requested").adjoint();
    let sigma = svd.singular_values;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));
    let u_sorted = ComplexMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v_sorted = ComplexMatrix::from_fn(v.nrows(), order.len(), |i, j| v[(i, order[j])]);
    let s_sorted = order.iter().map(|&i| sigma[i]).collect();
    (u_sorted, s_sorted, v_sorted)
}

/// One circularly symmetric complex Gaussian sample with `E|z|² = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. CN(0, 1) entries, drawn in column-major order.
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data: Vec<Complex64> = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data)
}

/// Haar-distributed matrix with orthonormal columns (QR of a Gaussian draw).
pub fn random_orthonormal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    thin_qr(&complex_gaussian(rows, cols, rng))
}

/// Largest deviation of `qᴴq` from the identity, entrywise.
pub fn orthonormality_defect(q: &ComplexMatrix) -> f64 {
    let g = q.adjoint() * q;
    let n = g.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}
