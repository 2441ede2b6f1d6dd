use leowb_core::cost::{cost_full, cost_sketch, cost_wb_arsvd, crossover_rank};
use leowb_core::harness::{
    methods_for, run_campaign, run_trial, run_trial_methods, run_trial_seeded, Execution, Method,
    TrialResult,
};
use leowb_core::lowrank::InversionMethod;
use leowb_core::{parse_config_str, ScenarioConfig};

fn config(overrides: &[&str]) -> ScenarioConfig {
    let owned: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    parse_config_str("", &owned).unwrap()
}

fn short_pass(extra: &[&str]) -> ScenarioConfig {
    let mut o = vec!["pass_s=3", "mc_runs=3", "eta_list=0.9,0.65"];
    o.extend_from_slice(extra);
    config(&o)
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

#[test]
fn parallel_and_sequential_campaigns_agree() {
    let cfg = short_pass(&[]);
    let par = run_campaign(&cfg, Execution::Parallel).unwrap();
    let seq = run_campaign(&cfg, Execution::Sequential).unwrap();
    assert_eq!(par, seq);
}

#[test]
fn campaign_is_reproducible() {
    let cfg = short_pass(&[]);
    let a = run_campaign(&cfg, Execution::Parallel).unwrap();
    let b = run_campaign(&cfg, Execution::Parallel).unwrap();
    assert_eq!(a.table, b.table);
    let other = run_campaign(&short_pass(&["seed=7"]), Execution::Parallel).unwrap();
    assert_ne!(a.table, other.table);
}

#[test]
fn snapshot_count_follows_rate_and_duration() {
    let cfg = short_pass(&[]);
    for r in run_trial_methods(&cfg, &methods_for(&cfg.eta_list), 0).unwrap() {
        assert_eq!(r.snapshots.len(), 60);
    }
}

#[test]
fn conventional_row_is_zero() {
    let res = run_campaign(&short_pass(&[]), Execution::Parallel).unwrap();
    let base = &res.table.rows[0];
    assert_eq!(base.eta, None);
    assert_eq!((base.savings_pct, base.degradation_pct), (0.0, 0.0));
    let etas: Vec<_> = res.table.rows[1..].iter().map(|r| r.eta.unwrap()).collect();
    assert_eq!(etas, vec![0.9, 0.65]);
}

fn audit(k: usize, r: &TrialResult) {
    let expected: f64 = r
        .snapshots
        .iter()
        .map(|s| match (r.method, s.method) {
            (Method::Conventional, InversionMethod::Full) => cost_full(k),
            (Method::Conventional, m) => panic!("conventional took path {m:?}"),
            (_, InversionMethod::Woodbury) => cost_wb_arsvd(k, s.k_est),
            (_, InversionMethod::Full) => cost_full(k) + cost_sketch(k, s.k_est),
            (_, InversionMethod::None) => 0.0,
        })
        .sum();
    assert_eq!(r.total_cost_units, expected, "{}", r.method_label);
    let per_snapshot: f64 = r.snapshots.iter().map(|s| s.cost).sum();
    assert_eq!(r.total_cost_units, per_snapshot);
}

#[test]
fn cost_audit_has_no_hidden_paths() {
    for extra in [&[][..], &["reset_interval=7"][..]] {
        let cfg = short_pass(extra);
        for trial in 0..2 {
            for r in run_trial_methods(&cfg, &methods_for(&cfg.eta_list), trial).unwrap() {
                audit(cfg.k, &r);
            }
        }
    }
}

#[test]
fn reset_interval_forces_direct_inversions() {
    let cfg = short_pass(&["reset_interval=10", "eta_list=0.65"]);
    let r = run_trial(&cfg, Method::WbArsvd { eta: 0.65 }, 0).unwrap();
    for i in (0..r.snapshots.len()).step_by(11) {
        assert_eq!(r.snapshots[i].method, InversionMethod::Full, "snapshot {i}");
    }
}

#[test]
fn single_snapshot_pass_is_identical_across_methods() {
    let cfg = config(&["pass_s=1", "update_rate_Hz=1", "eta_list=0.65"]);
    let rs = run_trial_methods(&cfg, &methods_for(&cfg.eta_list), 0).unwrap();
    assert_eq!(rs[0].snapshots.len(), 1);
    assert_eq!(rs[0].snapshots[0].sum_rate, rs[1].snapshots[0].sum_rate);
}

#[test]
fn perturbations_are_low_rank_in_los_dominated_regime() {
    let cfg = config(&["pass_s=30", "eta_list=0.9"]);
    let mut ranks = Vec::new();
    for trial in 0..2 {
        let r = run_trial(&cfg, Method::WbArsvd { eta: 0.9 }, trial).unwrap();
        ranks.extend(r.snapshots.iter().skip(1).map(|s| s.k_est));
    }
    let m = median(ranks);
    assert!(m < cfg.k as f64 / 2.0, "median k_est {m}");
}

#[test]
fn tracking_is_cheaper_when_ranks_are_below_crossover() {
    let cfg = config(&["pass_s=10", "eta_list=0.8"]);
    let rs = run_trial_methods(&cfg, &methods_for(&cfg.eta_list), 0).unwrap();
    let ranks: Vec<usize> = rs[1].snapshots.iter().skip(1).map(|s| s.k_est).collect();
    assert!(median(ranks) < crossover_rank(cfg.k).unwrap() as f64);
    assert!(rs[1].total_cost_units < rs[0].total_cost_units);
}

#[test]
fn full_energy_tracking_matches_direct_inversion() {
    let eta = 1.0 - 1e-12;
    let cfg = config(&["pass_s=10", "K_R_dB=300"]);
    let methods = [Method::Conventional, Method::WbArsvd { eta }];
    for trial in 0..2 {
        let a = run_trial_seeded(&cfg, &methods, trial, 100 + trial, &[1, 2]).unwrap();
        let b = run_trial_seeded(&cfg, &methods, trial, 100 + trial, &[3, 4]).unwrap();
        let rel = (a[1].mean_sum_rate / a[0].mean_sum_rate - 1.0).abs();
        assert!(rel < 1e-3, "trial {trial}: {rel}");
        let decisions = |r: &TrialResult| -> Vec<(InversionMethod, usize)> {
            r.snapshots.iter().map(|s| (s.method, s.k_est)).collect()
        };
        assert_eq!(decisions(&a[1]), decisions(&b[1]));
    }
}

#[test]
fn seed_count_must_match_methods() {
    let cfg = short_pass(&[]);
    assert!(run_trial_seeded(&cfg, &[Method::Conventional], 0, 1, &[]).is_err());
}
