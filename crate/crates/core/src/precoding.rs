//! RZF digital precoding and the Shannon sum-rate KPI.

use num_complex::Complex64;

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::ComplexMatrix;

/// Digital precoder scaled to the total power budget.
#[derive(Debug, Clone)]
pub struct Precoder {
    /// `N_RF × K`, already scaled.
    pub f_bb: ComplexMatrix,
    /// Factor applied to `H_effᴴ A⁻¹` to meet the power constraint.
    pub scale: f64,
    pub p_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub per_ut_rate: Vec<f64>,
    pub sum_rate: f64,
    pub sinr: Vec<f64>,
}

/// `F_BB = H_effᴴ A⁻¹`, scaled so that `‖F_RF F_BB‖_F² = P_t`.
pub fn rzf_precoder(
    h_eff: &ComplexMatrix,
    a_inv: &ComplexMatrix,
    f_rf: &ComplexMatrix,
    p_t: f64,
) -> Result<Precoder> {
    if f_rf.ncols() != h_eff.ncols() {
        return Err(dim_mismatch(
            "rzf_precoder",
            format!("F_RF with {} columns", h_eff.ncols()),
            format!("{}", f_rf.ncols()),
        ));
    }
    let rf_gram = f_rf.adjoint() * f_rf;
    rzf_precoder_with_gram(h_eff, a_inv, &rf_gram, p_t)
}

/// [`rzf_precoder`] with `F_RFᴴ F_RF` supplied, so the power of the hybrid
/// precoder is `tr(F_BBᴴ (F_RFᴴ F_RF) F_BB)` without forming `F_RF F_BB`.
pub fn rzf_precoder_with_gram(
    h_eff: &ComplexMatrix,
    a_inv: &ComplexMatrix,
    rf_gram: &ComplexMatrix,
    p_t: f64,
) -> Result<Precoder> {
    let k = h_eff.nrows();
    if a_inv.shape() != (k, k) {
        return Err(dim_mismatch(
            "rzf_precoder",
            format!("{k}x{k} inverse"),
            format!("{}x{}", a_inv.nrows(), a_inv.ncols()),
        ));
    }
    if rf_gram.shape() != (h_eff.ncols(), h_eff.ncols()) {
        return Err(dim_mismatch(
            "rzf_precoder",
            format!("{0}x{0} F_RF Gram", h_eff.ncols()),
            format!("{}x{}", rf_gram.nrows(), rf_gram.ncols()),
        ));
    }
    let mut f_bb = h_eff.adjoint() * a_inv;
    let power = (f_bb.adjoint() * rf_gram * &f_bb).trace().re;
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::ZeroPrecoder);
    }
    let scale = (p_t / power).sqrt();
    f_bb *= Complex64::new(scale, 0.0);
    Ok(Precoder { f_bb, scale, p_t })
}

/// Sum rate `Σ log₂(1 + SINR_n)` over the full channel `h` (`K × N_t`).
pub fn sum_rate(
    h: &ComplexMatrix,
    f_rf: &ComplexMatrix,
    precoder: &Precoder,
    noise: &[f64],
) -> Result<RateReport> {
    if h.ncols() != f_rf.nrows() {
        return Err(dim_mismatch(
            "sum_rate",
            format!("F_RF with {} rows", h.ncols()),
            format!("{}", f_rf.nrows()),
        ));
    }
    sum_rate_through_beams(&(h * f_rf), &precoder.f_bb, noise)
}

/// Sum rate from the beam-domain channel `G = H F_RF` (`K × N_RF`).
///
/// With `E = G F_BB`, UT `n` sees signal `|E_nn|²` and interference
/// `Σ_{i≠n} |E_ni|²`.
pub fn sum_rate_through_beams(
    g: &ComplexMatrix,
    f_bb: &ComplexMatrix,
    noise: &[f64],
) -> Result<RateReport> {
    let k = g.nrows();
    if f_bb.nrows() != g.ncols() || f_bb.ncols() != k || noise.len() != k {
        return Err(dim_mismatch(
            "sum_rate",
            format!("F_BB {}x{k} and {k} noise terms", g.ncols()),
            format!(
                "F_BB {}x{}, {} noise terms",
                f_bb.nrows(),
                f_bb.ncols(),
                noise.len()
            ),
        ));
    }
    if let Some(bad) = noise.iter().find(|&&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be positive, got {bad}"
        )));
    }
    let e = g * f_bb;
    let mut sinr = Vec::with_capacity(k);
    let mut per_ut_rate = Vec::with_capacity(k);
    for n in 0..k {
        let signal = e[(n, n)].norm_sqr();
        let interference: f64 = (0..k)
            .filter(|&i| i != n)
            .map(|i| e[(n, i)].norm_sqr())
            .sum();
        let s = signal / (interference + noise[n]);
        sinr.push(s);
        per_ut_rate.push((1.0 + s).log2());
    }
    Ok(RateReport {
        sum_rate: per_ut_rate.iter().sum(),
        per_ut_rate,
        sinr,
    })
}
