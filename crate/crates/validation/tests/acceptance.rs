//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.
//!
//! The Monte Carlo criteria go through the `leowb campaign` command with
//! the shipped defaults (50 trials, 120 s passes, K = 16, seed 42), so this
//! takes a few minutes.

use std::fs;
use std::path::Path;
use std::time::Instant;

use leowb_cli::run_cli;
use leowb_core::cost::{cost_ratio, crossover_rank};
use leowb_core::harness::{
    channel_seed, ecdf, kolmogorov_distance, method_seed, methods_for, run_campaign,
    run_trial_seeded, Execution, TrialResult,
};
use leowb_core::linalg::{direct_inverse, frobenius_sq, relative_frobenius_error};
use leowb_core::lowrank::{arsvd_detailed, woodbury_update, GramState, InversionMethod};
use leowb_core::oracle::{
    energy_truncation_rank, gauss_jordan_inverse, hermitian_low_rank, hermitian_pd, with_spectrum,
};
use leowb_core::{parse_config_str, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn woodbury_exactness() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for (i, k) in [4usize, 8, 16, 32, 64]
        .into_iter()
        .cycle()
        .take(1000)
        .enumerate()
    {
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + i as u64);
        let r = rng.random_range(1..=k / 2);
        let a = hermitian_pd(k, 1.0, &mut rng);
        let (delta, factor) = hermitian_low_rank(k, r, 0.05, 0.6, &mut rng);
        let state = GramState {
            a_inv: direct_inverse(&a).expect("PD matrix"),
            a: a.clone(),
            alpha: 0.0,
            cost_accum: 0.0,
        };
        let oracle = gauss_jordan_inverse(&(&a + &delta)).expect("PD matrix");
        let err = match woodbury_update(&state, &factor) {
            Ok(next) => relative_frobenius_error(&next.a_inv, &oracle),
            Err(_) => f64::INFINITY,
        };
        if err.is_nan() || err >= 1e-8 {
            failures += 1;
        }
        worst = worst.max(err);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < 30.0,
        format!(
            "1000 instances, worst relative error {worst:.2e}, {failures} above 1e-8, {secs:.1} s"
        ),
    )
}

fn arsvd_equivalence() -> Outcome {
    let start = Instant::now();
    let defaults = ScenarioConfig::default();
    let spectrum: Vec<f64> = (1..=16).map(|j| 2f64.powi(-j)).collect();
    let mut passed = true;
    let mut parts = Vec::new();
    for eta in [0.65, 0.8, 0.9] {
        let cfg = defaults.arsvd(eta);
        let (mut agree, mut bound_violations) = (0, 0);
        for i in 0..200u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(i);
            let da = with_spectrum(&spectrum, &mut rng);
            let expected = energy_truncation_rank(&da, eta);
            let out = arsvd_detailed(&da, &cfg, &mut rng).expect("valid config");
            if out.factor.k_est() == expected {
                agree += 1;
            }
            if out.converged {
                let residual = frobenius_sq(&(&da - out.factor.to_dense()));
                if residual > (1.0 - eta) * 1.05 * frobenius_sq(&da) {
                    bound_violations += 1;
                }
            }
        }
        passed &= agree >= 198 && bound_violations == 0;
        parts.push(format!(
            "eta {eta}: {agree}/200 (bound violations {bound_violations})"
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    passed &= secs < 10.0;
    outcome(
        passed,
        format!(
            "k_init {}, p {}, i_max {}; {}; {secs:.1} s",
            defaults.k_init,
            defaults.p,
            defaults.i_max,
            parts.join(", ")
        ),
    )
}

fn complexity_crossover() -> Outcome {
    let cross = crossover_rank(100);
    let at_half = cost_ratio(100, 50);
    outcome(
        cross == Some(55) && (at_half - 0.885).abs() <= 1e-12 && cost_ratio(100, 54) <= 1.0,
        format!("K = 100: crossover r = {cross:?}, ratio(50) = {at_half}"),
    )
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap_or_default()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn table_reproduction(out: &Path) -> Outcome {
    let rows = read_csv(&out.join("comparison_table.csv"));
    let targets = [(0.9, 30.6, 1.6), (0.8, 47.7, 5.8), (0.65, 61.2, 9.5)];
    let mut passed = rows.len() == 4;
    let mut parts = Vec::new();
    let mut measured = Vec::new();
    for (eta, save_ref, degr_ref) in targets {
        let Some(row) = rows.iter().find(|r| r[1].parse::<f64>().ok() == Some(eta)) else {
            return outcome(false, format!("no row for eta {eta}"));
        };
        let save: f64 = row[2].parse().unwrap_or(f64::NAN);
        let degr: f64 = row[3].parse().unwrap_or(f64::NAN);
        passed &= (save - save_ref).abs() <= 10.0 && (degr - degr_ref).abs() <= 5.0;
        parts.push(format!("eta {eta}: savings {save:.1}% (ref {save_ref}), degradation {degr:.2}% (ref {degr_ref})"));
        measured.push((save, degr));
    }
    let monotone = measured
        .windows(2)
        .all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1);
    outcome(
        passed && monotone,
        format!("{}; strictly monotone: {monotone}", parts.join("; ")),
    )
}

fn ecdf_ordering(out: &Path, summary: &Value) -> Outcome {
    let rate = |label: &str| -> f64 {
        summary["methods"]
            .as_array()
            .and_then(|m| m.iter().find(|s| s["label"] == label))
            .and_then(|s| s["mean_sum_rate"].as_f64())
            .unwrap_or(f64::NAN)
    };
    let labels = [
        "conventional",
        "wb_arsvd_eta0.9",
        "wb_arsvd_eta0.8",
        "wb_arsvd_eta0.65",
    ];
    let rates: Vec<f64> = labels.iter().map(|l| rate(l)).collect();
    let ordered = rates.windows(2).all(|w| w[0] >= w[1]);

    let mut csvs_ok = true;
    for label in labels {
        for name in [
            format!("ecdf_{label}.csv"),
            format!("ecdf_{label}_trial_mean.csv"),
        ] {
            let text = fs::read_to_string(out.join(&name)).unwrap_or_default();
            let pts: Vec<(f64, f64)> = text
                .lines()
                .skip(1)
                .filter_map(|l| {
                    let (x, p) = l.split_once(',')?;
                    Some((x.parse().ok()?, p.parse().ok()?))
                })
                .collect();
            csvs_ok &= text.starts_with("value,cdf\n")
                && !pts.is_empty()
                && pts.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
                && pts.last().map(|p| p.1) == Some(1.0);
        }
    }

    // The ecdf of seeded draws from known laws stays within the 1% critical
    // value of the Kolmogorov statistic.
    let n = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let uniform: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let exponential: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let critical = 1.628 / (n as f64).sqrt();
    let d_uniform = kolmogorov_distance(&ecdf(&uniform).unwrap(), |x| x.clamp(0.0, 1.0));
    let d_exp = kolmogorov_distance(&ecdf(&exponential).unwrap(), |x| 1.0 - (-x.max(0.0)).exp());
    let ks_ok = d_uniform < critical && d_exp < critical;

    outcome(
        ordered && csvs_ok && ks_ok,
        format!(
            "mean sum rates {:.4} >= {:.4} >= {:.4} >= {:.4}: {ordered}; ECDF CSVs well formed: {csvs_ok}; \
             Kolmogorov D = {d_uniform:.4} / {d_exp:.4} < {critical:.4}",
            rates[0], rates[1], rates[2], rates[3]
        ),
    )
}

fn full_energy_equivalence() -> Outcome {
    let eta = 1.0 - 1e-12;
    let cfg = parse_config_str(
        "",
        &[
            "K_R_dB=300".into(),
            "mc_runs=4".into(),
            format!("eta_list=[{eta:?}]"),
        ],
    )
    .expect("valid overrides");
    let campaign = match run_campaign(&cfg, Execution::Parallel) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("campaign failed: {e}")),
    };
    let conv = campaign.methods[0].mean_sum_rate;
    let wb = campaign.methods[1].mean_sum_rate;
    let rel = (wb / conv - 1.0).abs();

    let decisions = |r: &TrialResult| -> Vec<(InversionMethod, usize)> {
        r.snapshots.iter().map(|s| (s.method, s.k_est)).collect()
    };
    let methods = methods_for(&cfg.eta_list);
    let mut same_decisions = true;
    for trial in 0..cfg.mc_runs as u64 {
        let seeds = |master: u64| -> Vec<u64> {
            methods
                .iter()
                .map(|m| method_seed(master, m, trial))
                .collect()
        };
        let ch = channel_seed(cfg.seed, trial);
        let a = run_trial_seeded(&cfg, &methods, trial, ch, &seeds(1)).expect("trial");
        let b = run_trial_seeded(&cfg, &methods, trial, ch, &seeds(2)).expect("trial");
        same_decisions &= decisions(&a[1]) == decisions(&b[1]);
    }
    let wb_summary = &campaign.methods[1];
    outcome(
        rel < 1e-3 && same_decisions,
        format!(
            "LOS only, {} trials: relative sum-rate gap {rel:.2e}; decisions identical across sketch seeds: \
             {same_decisions} (woodbury {}, full {}, none {})",
            cfg.mc_runs, wb_summary.woodbury_steps, wb_summary.full_steps, wb_summary.none_steps
        ),
    )
}

fn determinism(a: &Path, b: &Path, summary: &Value) -> Outcome {
    let names: Vec<&str> = summary["artifacts"]
        .as_array()
        .map(|v| v.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    let differing: Vec<&str> = names
        .iter()
        .copied()
        .filter(|n| match (fs::read(a.join(n)), fs::read(b.join(n))) {
            (Ok(x), Ok(y)) => x != y,
            _ => true,
        })
        .collect();
    outcome(
        !names.is_empty() && differing.is_empty(),
        format!(
            "{} artifacts compared, differing: {differing:?}",
            names.len()
        ),
    )
}

fn campaign(out: &Path) -> u8 {
    run_cli([
        "leowb",
        "campaign",
        "--seed",
        "42",
        "--out-dir",
        out.to_str().unwrap(),
    ])
}

fn main() {
    let work = tempfile::tempdir().expect("temp dir");
    let first = work.path().join("run1");
    let second = work.path().join("run2");

    let mut results: Vec<(&str, Outcome)> = vec![
        ("woodbury exactness", woodbury_exactness()),
        ("arsvd oracle equivalence", arsvd_equivalence()),
        ("complexity crossover", complexity_crossover()),
    ];

    let start = Instant::now();
    let code = campaign(&first);
    eprintln!(
        "campaign finished in {:.0} s",
        start.elapsed().as_secs_f64()
    );
    let summary: Value = fs::read_to_string(first.join("summary.json"))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or(Value::Null);
    if code != 0 || summary.is_null() {
        let failed = || outcome(false, format!("campaign exited with {code}"));
        results.push(("table reproduction", failed()));
        results.push(("ecdf ordering", failed()));
    } else {
        results.push(("table reproduction", table_reproduction(&first)));
        results.push(("ecdf ordering", ecdf_ordering(&first, &summary)));
    }
    results.push(("full-energy equivalence", full_energy_equivalence()));
    let code = campaign(&second);
    results.push((
        "determinism",
        if code == 0 {
            determinism(&first, &second, &summary)
        } else {
            outcome(false, format!("second campaign exited with {code}"))
        },
    ));

    println!();
    for (name, o) in &results {
        println!(
            "{} {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    let failed = results.iter().filter(|(_, o)| !o.passed).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
