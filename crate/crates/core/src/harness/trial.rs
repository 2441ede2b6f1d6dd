use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{channel_seed, method_seed, Method};
use crate::channel::{propagate_pass, ChannelSequence, Scenario};
use crate::config::ScenarioConfig;
use crate::cost::cost_full;
use crate::error::{dim_mismatch, Result};
use crate::linalg::ComplexMatrix;
use crate::lowrank::{gram_matrix, update_inverse, GramState, InversionMethod};
use crate::precoding::{rzf_precoder_with_gram, sum_rate_through_beams};

/// Outcome of one precoder update instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotRecord {
    pub t_s: f64,
    pub sum_rate: f64,
    pub method: InversionMethod,
    pub k_est: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub method_label: String,
    #[serde(skip)]
    pub method: Method,
    pub trial_index: u64,
    pub snapshots: Vec<SnapshotRecord>,
    pub mean_sum_rate: f64,
    pub total_cost_units: f64,
}

/// Per-method state carried along the pass.
struct Tracker {
    method: Method,
    state: Option<GramState>,
    rng: ChaCha8Rng,
    since_full: usize,
    records: Vec<SnapshotRecord>,
}

impl Tracker {
    fn step(
        &mut self,
        cfg: &ScenarioConfig,
        alpha: f64,
        prev_h_eff: Option<&ComplexMatrix>,
        h_eff: &ComplexMatrix,
    ) -> Result<(InversionMethod, usize, f64)> {
        let k = h_eff.nrows();
        let reset_due = cfg.reset_interval > 0 && self.since_full >= cfg.reset_interval;
        let tracked = match (self.method, prev_h_eff, self.state.as_ref()) {
            (Method::WbArsvd { eta }, Some(prev), Some(state)) if !reset_due => {
                let dh = h_eff - prev;
                Some(update_inverse(
                    state,
                    prev,
                    &dh,
                    &cfg.arsvd(eta),
                    &mut self.rng,
                )?)
            }
            _ => None,
        };
        match tracked {
            Some((next, report)) => {
                if report.method == InversionMethod::Full {
                    self.since_full = 0;
                } else {
                    self.since_full += 1;
                }
                self.state = Some(next);
                Ok((report.method, report.k_est, report.cost))
            }
            None => {
                self.state = Some(gram_matrix(h_eff, alpha)?);
                self.since_full = 0;
                Ok((InversionMethod::Full, 0, cost_full(k)))
            }
        }
    }
}

/// Runs several methods over the same simulated pass (same UT drop and
/// NLOS draws), each with its own sketch stream.
pub fn run_trial_methods(
    cfg: &ScenarioConfig,
    methods: &[Method],
    trial_index: u64,
) -> Result<Vec<TrialResult>> {
    let sketch_seeds: Vec<u64> = methods
        .iter()
        .map(|m| method_seed(cfg.seed, m, trial_index))
        .collect();
    run_trial_seeded(
        cfg,
        methods,
        trial_index,
        channel_seed(cfg.seed, trial_index),
        &sketch_seeds,
    )
}

/// [`run_trial_methods`] with explicit seeds for the channel stream and for
/// each method's sketch stream.
pub fn run_trial_seeded(
    cfg: &ScenarioConfig,
    methods: &[Method],
    trial_index: u64,
    channel_seed: u64,
    sketch_seeds: &[u64],
) -> Result<Vec<TrialResult>> {
    if sketch_seeds.len() != methods.len() {
        return Err(dim_mismatch(
            "run_trial_seeded",
            format!("{} sketch seeds", methods.len()),
            format!("{}", sketch_seeds.len()),
        ));
    }
    let mut channel_rng = ChaCha8Rng::seed_from_u64(channel_seed);
    let scenario = Scenario::new(cfg, &mut channel_rng)?;
    let alpha = scenario.alpha();
    let noise = scenario.noise_variances();

    let mut trackers: Vec<Tracker> = methods
        .iter()
        .zip(sketch_seeds)
        .map(|(&method, &seed)| Tracker {
            method,
            state: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            since_full: 0,
            records: Vec::with_capacity(cfg.snapshot_count()),
        })
        .collect();

    let mut prev_h_eff: Option<ComplexMatrix> = None;
    for snap in ChannelSequence::new(&scenario, channel_rng) {
        let snap = snap?;
        let g = &snap.h * &snap.f_rf;
        let rf_gram = snap.f_rf.adjoint() * &snap.f_rf;
        for tracker in trackers.iter_mut() {
            let (method, k_est, cost) =
                tracker.step(cfg, alpha, prev_h_eff.as_ref(), &snap.h_eff)?;
            let a_inv = &tracker.state.as_ref().expect("state set by step").a_inv;
            let precoder = rzf_precoder_with_gram(&snap.h_eff, a_inv, &rf_gram, cfg.p_t_w)?;
            let rates = sum_rate_through_beams(&g, &precoder.f_bb, &noise)?;
            tracker.records.push(SnapshotRecord {
                t_s: snap.timestamp_s,
                sum_rate: rates.sum_rate,
                method,
                k_est,
                cost,
            });
        }
        prev_h_eff = Some(snap.h_eff);
    }

    Ok(trackers
        .into_iter()
        .map(|t| {
            let n = t.records.len().max(1) as f64;
            TrialResult {
                method_label: t.method.label(),
                method: t.method,
                trial_index,
                mean_sum_rate: t.records.iter().map(|r| r.sum_rate).sum::<f64>() / n,
                total_cost_units: t.records.iter().map(|r| r.cost).sum(),
                snapshots: t.records,
            }
        })
        .collect())
}

/// One method over trial `trial_index` of the campaign seeded by `cfg.seed`.
pub fn run_trial(cfg: &ScenarioConfig, method: Method, trial_index: u64) -> Result<TrialResult> {
    let mut out = run_trial_methods(cfg, &[method], trial_index)?;
    Ok(out.pop().expect("one method"))
}

/// Look angles, slant range and LOS gain of one UT at one update instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryRow {
    pub t_s: f64,
    pub ut_index: usize,
    pub theta_rad: f64,
    pub phi_rad: f64,
    pub slant_range_m: f64,
    pub gain_db: f64,
}

/// The deterministic pass geometry of trial `trial_index` (same UT drop as
/// [`run_trial_methods`]).
pub fn trial_geometry(cfg: &ScenarioConfig, trial_index: u64) -> Result<Vec<GeometryRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(channel_seed(cfg.seed, trial_index));
    let scenario = Scenario::new(cfg, &mut rng)?;
    let mut rows = Vec::with_capacity(cfg.snapshot_count() * cfg.k);
    for i in 0..cfg.snapshot_count() {
        let t = i as f64 / cfg.update_rate_hz;
        let orbit = propagate_pass(&scenario, t)?;
        let gains = scenario.gains(&orbit);
        for (n, (a, g)) in orbit.angles.iter().zip(gains).enumerate() {
            rows.push(GeometryRow {
                t_s: t,
                ut_index: n,
                theta_rad: a.theta,
                phi_rad: a.phi,
                slant_range_m: a.slant_range_m,
                gain_db: 20.0 * g.log10(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_covers_every_ut_and_instant() {
        let cfg = ScenarioConfig {
            pass_s: 2.0,
            k: 4,
            ..ScenarioConfig::default()
        };
        let rows = trial_geometry(&cfg, 0).unwrap();
        assert_eq!(rows.len(), 40 * 4);
        assert!(rows
            .iter()
            .all(|r| r.slant_range_m >= cfg.altitude_m * 0.999));
        assert!(rows.iter().all(|r| r.gain_db < 0.0));
        assert_eq!(rows, trial_geometry(&cfg, 0).unwrap());
    }
}
