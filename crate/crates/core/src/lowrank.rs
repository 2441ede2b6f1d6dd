//! Tracking the inverse of the regularized Gram matrix `A = H Hᴴ + αI`
//! across perturbations of the effective channel.
//!
//! The update pipeline for one step is:
//!
//! 1. form the exact Gram correction `ΔA = H ΔHᴴ + ΔH Hᴴ + ΔH ΔHᴴ`
//!    ([`gram_delta`]);
//! 2. approximate `ΔA ≈ U_r Σ_r V_rᴴ` with the adaptive randomized SVD
//!    ([`arsvd`]), which grows its sketch until a fraction η of the Frobenius
//!    energy is captured;
//! 3. if `r / K ≤ 0.5` apply the Woodbury identity ([`woodbury_update`]),
//!    otherwise invert the new Gram matrix directly ([`update_inverse`]).

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{cost_full, cost_sketch, cost_wb_arsvd};
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{
    complex_gaussian, direct_inverse, frobenius_sq, lu_inverse, svd_sorted, thin_qr, ComplexMatrix,
    AUXILIARY_COND,
};

/// Largest `k_est / K` for which the Woodbury path is taken.
pub const WOODBURY_RANK_RATIO: f64 = 0.5;

/// Regularized Gram matrix, its inverse and the running cost tally.
#[derive(Debug, Clone)]
pub struct GramState {
    pub a: ComplexMatrix,
    pub a_inv: ComplexMatrix,
    pub alpha: f64,
    pub cost_accum: f64,
}

impl GramState {
    /// Number of users `K` (the Gram matrix dimension).
    pub fn users(&self) -> usize {
        self.a.nrows()
    }
}

/// Truncated factorization `U_r diag(σ) V_rᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactor {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

impl LowRankFactor {
    pub fn empty(k: usize) -> Self {
        Self {
            u: ComplexMatrix::zeros(k, 0),
            sigma: Vec::new(),
            v: ComplexMatrix::zeros(k, 0),
        }
    }

    /// Estimated rank `k_est`.
    pub fn k_est(&self) -> usize {
        self.sigma.len()
    }

    /// Dense `U_r Σ_r V_rᴴ`.
    pub fn to_dense(&self) -> ComplexMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.adjoint()
    }
}

/// Parameters of the adaptive randomized SVD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArSvdConfig {
    /// Energy fraction η ∈ (0, 1] to retain.
    pub eta: f64,
    pub k_init: usize,
    /// Oversampling columns added to the working rank.
    pub oversampling: usize,
    pub max_iter: usize,
}

impl Default for ArSvdConfig {
    fn default() -> Self {
        Self {
            eta: 0.9,
            k_init: 2,
            oversampling: 1,
            max_iter: 8,
        }
    }
}

impl ArSvdConfig {
    pub fn with_eta(eta: f64) -> Self {
        Self {
            eta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "eta must lie in (0, 1], got {}",
                self.eta
            )));
        }
        if self.k_init == 0 {
            return Err(Error::InvalidArgument("k_init must be >= 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("i_max must be >= 1".into()));
        }
        Ok(())
    }
}

/// Everything the arSVD loop knows when it returns.
#[derive(Debug, Clone)]
pub struct ArSvdOutcome {
    pub factor: LowRankFactor,
    /// Iterations used (0 for a zero input).
    pub iterations: usize,
    /// `false` when the iteration budget ran out and the rank-`d` tail was returned.
    pub converged: bool,
    /// `η‖ΔA‖_F²`.
    pub target_energy: f64,
    /// `Σ_{j≤k_est} σ_j²` of the returned factor.
    pub captured_energy: f64,
}

/// Builds `A = H Hᴴ + αI` and inverts it directly. Charges `K³`.
pub fn gram_matrix(h_eff: &ComplexMatrix, alpha: f64) -> Result<GramState> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "regularization must be nonnegative, got {alpha}"
        )));
    }
    let k = h_eff.nrows();
    if k == 0 {
        return Err(Error::InvalidArgument(
            "effective channel has no rows".into(),
        ));
    }
    let mut a = h_eff * h_eff.adjoint();
    for i in 0..k {
        a[(i, i)] += Complex64::new(alpha, 0.0);
    }
    let a_inv = direct_inverse(&a)?;
    Ok(GramState {
        a,
        a_inv,
        alpha,
        cost_accum: cost_full(k),
    })
}

/// Exact Gram correction `ΔA = H ΔHᴴ + ΔH Hᴴ + ΔH ΔHᴴ`.
pub fn gram_delta(h_eff: &ComplexMatrix, dh_eff: &ComplexMatrix) -> Result<ComplexMatrix> {
    if h_eff.shape() != dh_eff.shape() {
        return Err(dim_mismatch(
            "gram_delta",
            format!("{}x{}", h_eff.nrows(), h_eff.ncols()),
            format!("{}x{}", dh_eff.nrows(), dh_eff.ncols()),
        ));
    }
    // H ΔHᴴ + (H ΔHᴴ)ᴴ is Hermitian by construction; symmetrize ΔH ΔHᴴ too so
    // rounding cannot leave an anti-Hermitian residue.
    let cross = h_eff * dh_eff.adjoint();
    let quad = dh_eff * dh_eff.adjoint();
    let mut delta = &cross + cross.adjoint() + &quad;
    let k = delta.nrows();
    for i in 0..k {
        delta[(i, i)].im = 0.0;
        for j in i + 1..k {
            let avg = (delta[(i, j)] + delta[(j, i)].conj()) * 0.5;
            delta[(i, j)] = avg;
            delta[(j, i)] = avg.conj();
        }
    }
    Ok(delta)
}

/// Woodbury update of `state` by `U_r Σ_r V_rᴴ`.
///
/// Evaluation order (intermediates never exceed `K×r` / `r×r` before the
/// final `K×K` combine):
/// `A⁻¹U` → `VᴴA⁻¹U` → `(Σ⁻¹ + VᴴA⁻¹U)⁻¹` → `(A⁻¹U)(…)⁻¹(VᴴA⁻¹)` → subtract.
pub fn woodbury_update(state: &GramState, lr: &LowRankFactor) -> Result<GramState> {
    let k = state.users();
    let r = lr.k_est();
    if r == 0 {
        return Err(Error::InvalidArgument(
            "Woodbury update needs a factor of rank >= 1".into(),
        ));
    }
    if lr.u.shape() != (k, r) || lr.v.shape() != (k, r) {
        return Err(dim_mismatch(
            "woodbury_update",
            format!("U, V of shape {k}x{r}"),
            format!(
                "U {}x{}, V {}x{}",
                lr.u.nrows(),
                lr.u.ncols(),
                lr.v.nrows(),
                lr.v.ncols()
            ),
        ));
    }
    if lr.sigma.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument(
            "singular values must be strictly positive".into(),
        ));
    }

    let ainv_u = &state.a_inv * &lr.u;
    let v_h = lr.v.adjoint();
    let mut aux = &v_h * &ainv_u;
    for (j, &s) in lr.sigma.iter().enumerate() {
        aux[(j, j)] += Complex64::new(1.0 / s, 0.0);
    }
    let aux_inv = match lu_inverse(&aux)? {
        Some((inv, cond)) if cond.is_finite() && cond <= AUXILIARY_COND => inv,
        Some((_, cond)) => return Err(Error::SingularAuxiliary { cond }),
        None => {
            return Err(Error::SingularAuxiliary {
                cond: f64::INFINITY,
            })
        }
    };
    let v_h_ainv = &v_h * &state.a_inv;
    let correction = (&ainv_u * aux_inv) * v_h_ainv;

    Ok(GramState {
        a: &state.a + lr.to_dense(),
        a_inv: &state.a_inv - correction,
        alpha: state.alpha,
        cost_accum: state.cost_accum + cost_wb_arsvd(k, r),
    })
}

/// Adaptive randomized SVD; see [`arsvd_detailed`].
pub fn arsvd<R: Rng + ?Sized>(
    da: &ComplexMatrix,
    cfg: &ArSvdConfig,
    rng: &mut R,
) -> Result<LowRankFactor> {
    arsvd_detailed(da, cfg, rng).map(|o| o.factor)
}

/// Adaptive randomized SVD of a square matrix.
///
/// Each pass draws a `K×d` CN(0, 1) sketch with `d = min(k₀ + p, K)`, projects
/// `ΔA` onto the range of `ΔA Ω` and takes the SVD of the small `d×K`
/// projection. The smallest `r` whose leading singular values reach
/// `η‖ΔA‖_F²` is returned; otherwise `k₀` doubles and a fresh sketch is drawn.
/// When the iteration budget runs out the full rank-`d` factor of the last
/// pass is returned. A zero input yields the empty factor without drawing.
pub fn arsvd_detailed<R: Rng + ?Sized>(
    da: &ComplexMatrix,
    cfg: &ArSvdConfig,
    rng: &mut R,
) -> Result<ArSvdOutcome> {
    cfg.validate()?;
    let k = da.nrows();
    if da.ncols() != k {
        return Err(dim_mismatch(
            "arsvd",
            "square matrix",
            format!("{}x{}", da.nrows(), da.ncols()),
        ));
    }
    let total = frobenius_sq(da);
    let target = cfg.eta * total;
    if total == 0.0 || k == 0 {
        return Ok(ArSvdOutcome {
            factor: LowRankFactor::empty(k),
            iterations: 0,
            converged: true,
            target_energy: 0.0,
            captured_energy: 0.0,
        });
    }

    let mut k0 = cfg.k_init;
    let mut last: Option<(ComplexMatrix, Vec<f64>, ComplexMatrix)> = None;
    for iteration in 1..=cfg.max_iter {
        let d = (k0 + cfg.oversampling).min(k);
        let omega = complex_gaussian(k, d, rng);
        let y = da * omega;
        let q = thin_qr(&y);
        let b = q.adjoint() * da;
        let (u_hat, sigma, v_hat) = svd_sorted(&b);
        let u_approx = q * u_hat;

        let mut cumulative = 0.0;
        let hit = sigma.iter().position(|s| {
            cumulative += s * s;
            cumulative >= target
        });
        if let Some(idx) = hit {
            let r = idx + 1;
            let factor = truncate(&u_approx, &sigma, &v_hat, r);
            return Ok(ArSvdOutcome {
                captured_energy: energy(&factor.sigma),
                factor,
                iterations: iteration,
                converged: true,
                target_energy: target,
            });
        }
        last = Some((u_approx, sigma, v_hat));
        k0 = k0.saturating_mul(2);
    }

    let (u_approx, sigma, v_hat) = last.expect("max_iter >= 1");
    // Directions with exactly zero projected energy cannot enter a Woodbury
    // update (Σ⁻¹ would blow up), so the tail keeps only positive values.
    let d = sigma.iter().take_while(|&&s| s > 0.0).count();
    let factor = truncate(&u_approx, &sigma, &v_hat, d);
    Ok(ArSvdOutcome {
        captured_energy: energy(&factor.sigma),
        factor,
        iterations: cfg.max_iter,
        converged: false,
        target_energy: target,
    })
}

fn energy(sigma: &[f64]) -> f64 {
    sigma.iter().map(|s| s * s).sum()
}

fn truncate(u: &ComplexMatrix, sigma: &[f64], v: &ComplexMatrix, r: usize) -> LowRankFactor {
    LowRankFactor {
        u: u.columns(0, r).into_owned(),
        sigma: sigma[..r].to_vec(),
        v: v.columns(0, r).into_owned(),
    }
}

/// Which inversion path the dispatcher took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionMethod {
    Woodbury,
    Full,
    None,
}

impl InversionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            InversionMethod::Woodbury => "woodbury",
            InversionMethod::Full => "full",
            InversionMethod::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub method: InversionMethod,
    pub k_est: usize,
    /// Cost units charged for this step.
    pub cost: f64,
    /// The Woodbury path was chosen but its auxiliary matrix was singular.
    pub singular_fallback: bool,
}

/// One dispatcher step: tracks `A⁻¹` from the channel `h_eff` to `h_eff + dh_eff`.
///
/// `state` must hold the inverse for `h_eff`. Costs charged:
/// * `none` (zero correction): nothing;
/// * `woodbury`: `K² + K²r + r³ + r²K`;
/// * `full`: `K³` plus the sketch `K²r + r²K`.
pub fn update_inverse<R: Rng + ?Sized>(
    state: &GramState,
    h_eff: &ComplexMatrix,
    dh_eff: &ComplexMatrix,
    cfg: &ArSvdConfig,
    rng: &mut R,
) -> Result<(GramState, UpdateReport)> {
    let k = state.users();
    if h_eff.nrows() != k {
        return Err(dim_mismatch(
            "update_inverse",
            format!("{k} channel rows"),
            format!("{}", h_eff.nrows()),
        ));
    }
    let delta = gram_delta(h_eff, dh_eff)?;
    let factor = arsvd(&delta, cfg, rng)?;
    let k_est = factor.k_est();

    if k_est == 0 {
        let cost = cost_sketch(k, 0);
        let mut next = state.clone();
        next.cost_accum += cost;
        return Ok((
            next,
            UpdateReport {
                method: InversionMethod::None,
                k_est,
                cost,
                singular_fallback: false,
            },
        ));
    }

    let mut singular_fallback = false;
    if (k_est as f64) / (k as f64) <= WOODBURY_RANK_RATIO {
        match woodbury_update(state, &factor) {
            Ok(next) => {
                let cost = cost_wb_arsvd(k, k_est);
                return Ok((
                    next,
                    UpdateReport {
                        method: InversionMethod::Woodbury,
                        k_est,
                        cost,
                        singular_fallback: false,
                    },
                ));
            }
            Err(Error::SingularAuxiliary { .. }) => singular_fallback = true,
            Err(e) => return Err(e),
        }
    }

    let h_next = h_eff + dh_eff;
    let mut next = gram_matrix(&h_next, state.alpha)?;
    let cost = cost_full(k) + cost_sketch(k, k_est);
    next.cost_accum = state.cost_accum + cost;
    Ok((
        next,
        UpdateReport {
            method: InversionMethod::Full,
            k_est,
            cost,
            singular_fallback,
        },
    ))
}
