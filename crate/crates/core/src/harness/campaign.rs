use serde::Serialize;

use super::{ecdf, map_indexed, methods_for, run_trial_methods, Execution, Method, TrialResult};
use crate::config::ScenarioConfig;
use crate::cost::cost_ratio;
use crate::error::Result;
use crate::lowrank::InversionMethod;

/// Aggregates of one method over all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub label: String,
    pub eta: Option<f64>,
    pub trials: usize,
    pub snapshots: usize,
    pub mean_sum_rate: f64,
    pub mean_cost_per_snapshot: f64,
    pub total_cost_units: f64,
    pub savings_pct: f64,
    pub degradation_pct: f64,
    pub woodbury_steps: usize,
    pub full_steps: usize,
    pub none_steps: usize,
    pub mean_k_est: f64,
    pub median_k_est: f64,
    /// `k_est_histogram[r]` counts tracked updates that estimated rank `r`.
    pub k_est_histogram: Vec<usize>,
    #[serde(skip)]
    pub pooled_sum_rates: Vec<f64>,
    #[serde(skip)]
    pub trial_mean_sum_rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub eta: Option<f64>,
    pub savings_pct: f64,
    pub degradation_pct: f64,
}

/// Savings and sum-rate degradation against the conventional baseline.
/// The baseline comes first; η rows follow in descending η.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn row(&self, eta: f64) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.eta == Some(eta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// Every snapshot of every trial is one sample.
    Snapshot,
    /// One sample per trial: its mean sum rate.
    TrialMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcdfSeries {
    pub label: String,
    pub pooling: Pooling,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub methods: Vec<MethodSummary>,
    pub table: ComparisonTable,
    pub ecdfs: Vec<EcdfSeries>,
}

impl CampaignResult {
    pub fn summary(&self, method: &Method) -> Option<&MethodSummary> {
        let label = method.label();
        self.methods.iter().find(|m| m.label == label)
    }
}

fn median(sorted: &[usize]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2] as f64,
        n => (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0,
    }
}

fn summarize(method: Method, k: usize, per_trial: &[&TrialResult]) -> MethodSummary {
    let mut pooled = Vec::new();
    let mut trial_means = Vec::with_capacity(per_trial.len());
    let mut total_cost = 0.0;
    let (mut woodbury, mut full, mut none) = (0, 0, 0);
    let mut histogram = vec![0usize; k + 1];
    let mut ranks = Vec::new();
    for t in per_trial {
        trial_means.push(t.mean_sum_rate);
        total_cost += t.total_cost_units;
        for (i, s) in t.snapshots.iter().enumerate() {
            pooled.push(s.sum_rate);
            match s.method {
                InversionMethod::Woodbury => woodbury += 1,
                InversionMethod::Full => full += 1,
                InversionMethod::None => none += 1,
            }
            // The first snapshot and forced resets are plain inversions
            // without a rank estimate.
            let tracked = matches!(method, Method::WbArsvd { .. })
                && i > 0
                && (s.k_est > 0 || s.method != InversionMethod::Full);
            if tracked {
                histogram[s.k_est.min(k)] += 1;
                ranks.push(s.k_est);
            }
        }
    }
    ranks.sort_unstable();
    let n = pooled.len().max(1) as f64;
    MethodSummary {
        label: method.label(),
        eta: method.eta(),
        trials: per_trial.len(),
        snapshots: pooled.len(),
        mean_sum_rate: pooled.iter().sum::<f64>() / n,
        mean_cost_per_snapshot: total_cost / n,
        total_cost_units: total_cost,
        savings_pct: 0.0,
        degradation_pct: 0.0,
        woodbury_steps: woodbury,
        full_steps: full,
        none_steps: none,
        mean_k_est: if ranks.is_empty() {
            0.0
        } else {
            ranks.iter().sum::<usize>() as f64 / ranks.len() as f64
        },
        median_k_est: median(&ranks),
        k_est_histogram: histogram,
        pooled_sum_rates: pooled,
        trial_mean_sum_rates: trial_means,
    }
}

/// Runs `cfg.mc_runs` trials of the conventional baseline and one WB-arSVD
/// method per entry of `cfg.eta_list`.
///
/// Savings are `1 − cost_wb / cost_conv` and degradation
/// `1 − rate_wb / rate_conv`, both on campaign means, in percent.
pub fn run_campaign(cfg: &ScenarioConfig, exec: Execution) -> Result<CampaignResult> {
    let methods = methods_for(&cfg.eta_list);
    let trials: Vec<Vec<TrialResult>> = map_indexed(cfg.mc_runs, exec, |i| {
        run_trial_methods(cfg, &methods, i as u64)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut summaries: Vec<MethodSummary> = methods
        .iter()
        .enumerate()
        .map(|(m, &method)| {
            let per_trial: Vec<&TrialResult> = trials.iter().map(|t| &t[m]).collect();
            summarize(method, cfg.k, &per_trial)
        })
        .collect();

    let base_cost = summaries[0].mean_cost_per_snapshot;
    let base_rate = summaries[0].mean_sum_rate;
    for s in summaries.iter_mut().skip(1) {
        s.savings_pct = 100.0 * (1.0 - s.mean_cost_per_snapshot / base_cost);
        s.degradation_pct = 100.0 * (1.0 - s.mean_sum_rate / base_rate);
    }

    let mut rows: Vec<ComparisonRow> = summaries
        .iter()
        .map(|s| ComparisonRow {
            label: s.label.clone(),
            eta: s.eta,
            savings_pct: s.savings_pct,
            degradation_pct: s.degradation_pct,
        })
        .collect();
    rows[1..].sort_by(|a, b| b.eta.unwrap_or(0.0).total_cmp(&a.eta.unwrap_or(0.0)));

    let mut ecdfs = Vec::with_capacity(2 * summaries.len());
    for s in &summaries {
        ecdfs.push(EcdfSeries {
            label: s.label.clone(),
            pooling: Pooling::Snapshot,
            points: ecdf(&s.pooled_sum_rates)?,
        });
        ecdfs.push(EcdfSeries {
            label: s.label.clone(),
            pooling: Pooling::TrialMean,
            points: ecdf(&s.trial_mean_sum_rates)?,
        });
    }

    Ok(CampaignResult {
        methods: summaries,
        table: ComparisonTable { rows },
        ecdfs,
    })
}

/// `(r, cost_wb_arsvd(K, r) / cost_full(K))` for `r = 1..=K`.
pub fn complexity_curve(k: usize) -> Vec<(usize, f64)> {
    (1..=k).map(|r| (r, cost_ratio(k, r))).collect()
}
