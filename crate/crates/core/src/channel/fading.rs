use rand::Rng;

use crate::linalg::{complex_normal, ComplexVector};

/// Upper bound on the linear Rician factor; larger values are treated as
/// this (pure LOS for all practical purposes).
pub const K_R_CAP: f64 = 1e12;

/// Rician mixture `√(K/(K+1)) h_los + √(1/(K+1)) h_nlos`.
///
/// `h_nlos` has i.i.d. CN(0, ‖h_los‖²/N) entries, so its expected squared norm
/// equals `‖h_los‖²` and `K` is the LOS/NLOS power ratio.
pub fn rician_channel<R: Rng + ?Sized>(
    h_los: &ComplexVector,
    k_r: f64,
    rng: &mut R,
) -> ComplexVector {
    let nlos = nlos_component(h_los, rng);
    mix(h_los, &nlos, k_r)
}

/// One NLOS draw scaled to the mean per-element LOS power of `h_los`.
pub fn nlos_component<R: Rng + ?Sized>(h_los: &ComplexVector, rng: &mut R) -> ComplexVector {
    let n = h_los.len();
    let std = (h_los.norm_squared() / n as f64).sqrt();
    ComplexVector::from_iterator(n, (0..n).map(|_| complex_normal(rng) * std))
}

pub fn mix(h_los: &ComplexVector, h_nlos: &ComplexVector, k_r: f64) -> ComplexVector {
    let k = k_r.clamp(0.0, K_R_CAP);
    let w_los = (k / (k + 1.0)).sqrt();
    let w_nlos = (1.0 / (k + 1.0)).sqrt();
    h_los * num_complex::Complex64::new(w_los, 0.0)
        + h_nlos * num_complex::Complex64::new(w_nlos, 0.0)
}
