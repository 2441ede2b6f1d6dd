//! Time-varying LEO downlink channel: pass geometry, array manifold, Rician
//! fading and best-power DFT beam steering.
//!
//! Channel rows follow the downlink convention `y_n = h_nᴴ x`: row `n` of
//! `H̃` is `a(θ_n, φ_n)ᴴ` and row `n` of `H` is the conjugated Rician vector.
//! The effective channel `H_eff = H̃ F_RF` is built from the LOS manifold only.

pub mod array;
pub mod fading;
pub mod link;
pub mod orbit;

use rand::Rng;

pub use array::{
    array_manifold, assign_beams, dft_codebook, grid_axes, grid_manifold, select_beams,
    ArrayGeometry, BeamSelection, Codebook,
};
pub use fading::{rician_channel, K_R_CAP};
pub use link::{fspl_db, los_gain, UserTerminal};
pub use orbit::{orbital_speed, LookAngles, OrbitState, PassGeometry, EARTH_RADIUS_M};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::linalg::{complex_normal, ComplexMatrix, ComplexVector};

/// Channel state at one update instant.
#[derive(Debug, Clone)]
pub struct ChannelSnapshot {
    /// Full channel, `K × N_t`.
    pub h: ComplexMatrix,
    /// Unit-gain LOS manifold rows, `K × N_t`.
    pub h_tilde: ComplexMatrix,
    /// Analog steering, `N_t × N_RF`.
    pub f_rf: ComplexMatrix,
    pub beam_indices: Vec<usize>,
    /// `H̃ F_RF`, `K × N_RF`.
    pub h_eff: ComplexMatrix,
    /// LOS amplitude gains γ_n.
    pub gains: Vec<f64>,
    pub orbit: OrbitState,
    pub timestamp_s: f64,
}

/// A configured pass with placed UTs.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub geometry: ArrayGeometry,
    pub codebook: Codebook,
    pub pass: PassGeometry,
    pub uts: Vec<UserTerminal>,
    ut_positions: Vec<orbit::Vec3>,
}

impl Scenario {
    /// Places `K` UTs uniformly over the footprint disk.
    pub fn new<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Self> {
        let lat0 = config.centroid_lat_deg.to_radians();
        let lon0 = config.centroid_lon_deg.to_radians();
        let positions = (0..config.k)
            .map(|_| orbit::sample_in_disk(lat0, lon0, config.footprint_radius_m, rng))
            .collect();
        Self::with_positions(config, positions)
    }

    /// Scenario with UTs at the given geodetic `(lat, lon)` in radians.
    pub fn with_positions(config: &ScenarioConfig, positions: Vec<(f64, f64)>) -> Result<Self> {
        let wavelength = config.wavelength();
        let geometry = ArrayGeometry::uniform_planar(
            config.array_nx,
            config.array_ny,
            config.element_spacing_wl,
            wavelength,
        );
        let codebook = dft_codebook(&geometry)?;
        let pass = PassGeometry::new(
            config.altitude_m,
            config.pass_s,
            config.centroid_lat_deg.to_radians(),
            config.centroid_lon_deg.to_radians(),
            config.track_heading_deg.to_radians(),
            config.min_elevation_deg,
        );
        let noise = config.noise_variance();
        let k_r = config.k_r_linear();
        let uts: Vec<UserTerminal> = positions
            .iter()
            .map(|&(lat, lon)| UserTerminal {
                lat_rad: lat,
                lon_rad: lon,
                alt_m: 0.0,
                antenna_gain_dbi: config.ut_gain_dbi,
                rician_k: k_r,
                noise_variance: noise,
            })
            .collect();
        let ut_positions = uts
            .iter()
            .map(|u| orbit::ecef(u.lat_rad, u.lon_rad, u.alt_m))
            .collect();
        Ok(Self {
            config: config.clone(),
            geometry,
            codebook,
            pass,
            uts,
            ut_positions,
        })
    }

    pub fn users(&self) -> usize {
        self.uts.len()
    }

    pub fn noise_variances(&self) -> Vec<f64> {
        self.uts.iter().map(|u| u.noise_variance).collect()
    }

    pub fn gains(&self, orbit: &OrbitState) -> Vec<f64> {
        orbit
            .angles
            .iter()
            .zip(&self.uts)
            .map(|(a, ut)| {
                los_gain(
                    a.slant_range_m,
                    self.config.carrier_hz,
                    1.0,
                    ut,
                    self.config.atmospheric_loss_db,
                )
            })
            .collect()
    }

    /// LOS gain at nadir (slant range equal to the altitude).
    pub fn reference_gain(&self) -> f64 {
        let ut = self.uts.first().cloned().unwrap_or(UserTerminal {
            lat_rad: 0.0,
            lon_rad: 0.0,
            alt_m: 0.0,
            antenna_gain_dbi: self.config.ut_gain_dbi,
            rician_k: 0.0,
            noise_variance: self.config.noise_variance(),
        });
        los_gain(
            self.config.altitude_m,
            self.config.carrier_hz,
            1.0,
            &ut,
            self.config.atmospheric_loss_db,
        )
    }

    /// RZF regularization: the configured value, else
    /// `alpha_scale · K σ² / (P_t γ_ref²)`.
    ///
    /// The precoder is designed on the unit-gain channel `H̃ F_RF`, so the
    /// noise-to-power ratio is referred to that scale through the nadir gain.
    pub fn alpha(&self) -> f64 {
        self.config.alpha.unwrap_or_else(|| {
            let g = self.reference_gain();
            self.config.alpha_scale * self.config.k as f64 * self.config.noise_variance()
                / (self.config.p_t_w * g * g)
        })
    }

    /// LOS manifold rows `a(θ_n, φ_n)ᴴ`.
    pub fn manifold_rows(&self, orbit: &OrbitState) -> ComplexMatrix {
        let n_t = self.geometry.n_elements();
        let wl = self.config.wavelength();
        let mut h_tilde = ComplexMatrix::zeros(self.users(), n_t);
        for (n, a) in orbit.angles.iter().enumerate() {
            let v = grid_manifold(a.theta, a.phi, &self.geometry, wl);
            for m in 0..n_t {
                h_tilde[(n, m)] = v[m].conj();
            }
        }
        h_tilde
    }

    /// Best-power beam assignment for the LOS rows at `orbit`. Equivalent
    /// to [`select_beams`] on [`manifold_rows`](Self::manifold_rows), but
    /// uses the separable form of grid-array rows and DFT codewords.
    pub fn select_beams(&self, orbit: &OrbitState) -> Result<BeamSelection> {
        let k = self.users();
        let n_rf = self.config.n_rf;
        if k > n_rf || n_rf > self.codebook.len() {
            return select_beams(&self.manifold_rows(orbit), &self.codebook, n_rf);
        }
        let wl = self.config.wavelength();
        let powers: Vec<Vec<f64>> = orbit
            .angles
            .iter()
            .map(|a| {
                let (ax, ay) = grid_axes(a.theta, a.phi, &self.geometry, wl);
                let cx: Vec<_> = ax.iter().map(|z| z.conj()).collect();
                let cy: Vec<_> = ay.iter().map(|z| z.conj()).collect();
                self.codebook.separable_powers(&cx, &cy)
            })
            .collect();
        let indices = assign_beams(&powers, n_rf, self.codebook.len());
        Ok(BeamSelection {
            f_rf: self.codebook.matrix(&indices),
            indices,
        })
    }
}

/// Satellite and look-angle state at `t ∈ [0, pass_s]`.
pub fn propagate_pass(scenario: &Scenario, t: f64) -> Result<OrbitState> {
    if !(0.0..=scenario.config.pass_s).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "t = {t} s outside the pass [0, {}] s",
            scenario.config.pass_s
        )));
    }
    scenario.pass.propagate(t, &scenario.ut_positions)
}

/// Channel snapshot at `t` with a fresh NLOS draw and per-snapshot beam
/// selection.
pub fn snapshot<R: Rng + ?Sized>(
    scenario: &Scenario,
    t: f64,
    rng: &mut R,
) -> Result<ChannelSnapshot> {
    let nlos = draw_nlos(scenario, rng);
    assemble(scenario, t, &nlos, None)
}

fn draw_nlos<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Vec<ComplexVector> {
    let n_t = scenario.geometry.n_elements();
    (0..scenario.users())
        .map(|_| ComplexVector::from_iterator(n_t, (0..n_t).map(|_| complex_normal(rng))))
        .collect()
}

/// Builds a snapshot from unit-variance NLOS draws (one `N_t` vector per UT),
/// optionally reusing a previous beam assignment.
fn assemble(
    scenario: &Scenario,
    t: f64,
    unit_nlos: &[ComplexVector],
    beams: Option<&[usize]>,
) -> Result<ChannelSnapshot> {
    let orbit = propagate_pass(scenario, t)?;
    let gains = scenario.gains(&orbit);
    let h_tilde = scenario.manifold_rows(&orbit);
    let n_t = h_tilde.ncols();

    let mut h = ComplexMatrix::zeros(scenario.users(), n_t);
    let inv_sqrt_nt = 1.0 / (n_t as f64).sqrt();
    for (n, ut) in scenario.uts.iter().enumerate() {
        let k = ut.rician_k.clamp(0.0, K_R_CAP);
        let w_los = (k / (k + 1.0)).sqrt() * gains[n];
        // ‖h_los‖² = γ², so the per-element NLOS std is γ/√N_t.
        let w_nlos = (1.0 / (k + 1.0)).sqrt() * gains[n] * inv_sqrt_nt;
        for m in 0..n_t {
            h[(n, m)] = h_tilde[(n, m)] * w_los + unit_nlos[n][m].conj() * w_nlos;
        }
    }

    let selection = match beams {
        Some(indices) => BeamSelection {
            f_rf: scenario.codebook.matrix(indices),
            indices: indices.to_vec(),
        },
        None => scenario.select_beams(&orbit)?,
    };
    let h_eff = &h_tilde * &selection.f_rf;
    Ok(ChannelSnapshot {
        h,
        h_tilde,
        f_rf: selection.f_rf,
        beam_indices: selection.indices,
        h_eff,
        gains,
        orbit,
        timestamp_s: t,
    })
}

/// The snapshot sequence of one pass at the configured update rate, with
/// NLOS block fading and beam-hold handled across snapshots.
pub struct ChannelSequence<'a, R: Rng> {
    scenario: &'a Scenario,
    rng: R,
    index: usize,
    nlos: Vec<ComplexVector>,
    beams: Vec<usize>,
}

impl<'a, R: Rng> ChannelSequence<'a, R> {
    pub fn new(scenario: &'a Scenario, rng: R) -> Self {
        Self {
            scenario,
            rng,
            index: 0,
            nlos: Vec::new(),
            beams: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.scenario.config.snapshot_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn next_snapshot(&mut self) -> Option<Result<ChannelSnapshot>> {
        if self.index >= self.len() {
            return None;
        }
        let i = self.index;
        self.index += 1;
        let cfg = &self.scenario.config;
        let t = i as f64 / cfg.update_rate_hz;
        if i.is_multiple_of(cfg.nlos_block) {
            self.nlos = draw_nlos(self.scenario, &mut self.rng);
        }
        let hold = !i.is_multiple_of(cfg.beam_hold);
        let beams = hold.then_some(self.beams.as_slice());
        let snap = assemble(self.scenario, t, &self.nlos, beams);
        if let Ok(s) = &snap {
            self.beams.clone_from(&s.beam_indices);
        }
        Some(snap)
    }
}

impl<R: Rng> Iterator for ChannelSequence<'_, R> {
    type Item = Result<ChannelSnapshot>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_snapshot()
    }
}
