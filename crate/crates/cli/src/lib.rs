//! The `leowb` command line: config resolution, subcommand dispatch and
//! artifact output.

mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use leowb_core::channel::Scenario;
use leowb_core::config::FULL_SCALE_RUNS;
use leowb_core::cost::crossover_rank;
use leowb_core::harness::{
    channel_seed, complexity_curve, methods_for, mix_seed, run_campaign, run_trial_methods,
    trial_geometry, CampaignResult, Execution, Pooling,
};
use leowb_core::linalg::frobenius_sq;
use leowb_core::lowrank::{arsvd_detailed, ArSvdConfig};
use leowb_core::oracle::{energy_truncation_rank, with_spectrum};
use leowb_core::{parse_config, parse_config_str, ConfigError, ScenarioConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use output::{json_bytes, opt, write_atomic, Csv};

#[derive(Debug, Parser)]
#[command(
    name = "leowb",
    version,
    about = "LEO multi-user RZF precoding with Woodbury/arSVD inverse tracking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo comparison of conventional RZF against WB-arSVD for each η.
    Campaign {
        #[command(flatten)]
        common: Common,
        /// Run trials one after another instead of on the rayon pool.
        #[arg(long)]
        sequential: bool,
    },
    /// Per-snapshot traces of a single trial.
    Trial {
        #[command(flatten)]
        common: Common,
        /// Trial index within the campaign seeded by --seed.
        #[arg(long, default_value_t = 0)]
        trial: u64,
        /// Also dump the pass geometry.
        #[arg(long)]
        geometry: bool,
    },
    /// Cost ratio of WB-arSVD over full inversion for r = 1..=K.
    ComplexityCurve {
        #[arg(long = "K", default_value_t = 100)]
        k: usize,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// arSVD rank estimates against full-SVD truncation on matrices with
    /// spectrum 2^-j.
    ArsvdBench {
        #[arg(long, default_value_t = 200)]
        matrices: usize,
        #[arg(long, default_value_t = 16)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.65, 0.8, 0.9])]
        eta: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        k_init: usize,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 8)]
        i_max: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (TOML, or JSON). Defaults apply without one.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Config override, applied after the file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Monte Carlo trial count.
    #[arg(long, conflicts_with = "full_scale")]
    runs: Option<usize>,
    /// Comma-separated η list.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// 500 trials.
    #[arg(long)]
    full_scale: bool,
}

impl Common {
    /// File, then `--set`, then the dedicated flags.
    fn resolve(&self) -> Result<ScenarioConfig, ConfigError> {
        let mut overrides = self.set.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(runs) = self.runs {
            overrides.push(format!("mc_runs={runs}"));
        }
        if self.full_scale {
            overrides.push(format!("mc_runs={FULL_SCALE_RUNS}"));
        }
        if let Some(eta) = &self.eta {
            let items: Vec<String> = eta.iter().map(|e| format!("{e:?}")).collect();
            overrides.push(format!("eta_list=[{}]", items.join(",")));
        }
        match &self.config {
            Some(path) => parse_config(path, &overrides),
            None => parse_config_str("", &overrides),
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("simulation error: {0}")]
    Simulation(#[from] leowb_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 1,
            CliError::Simulation(_) | CliError::Io { .. } => 2,
        }
    }
}

/// Collects artifacts in memory so nothing is written unless the whole
/// computation succeeded.
struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn new() -> Self {
        Self { files: Vec::new() }
    }

    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    fn write(self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for (name, bytes) in self.files {
            write_atomic(dir, &name, &bytes).map_err(|source| CliError::Io {
                path: dir.join(&name),
                source,
            })?;
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    json_bytes(value).expect("summary values serialize")
}

/// α as used by every trial (it depends only on the config).
fn resolved_alpha(cfg: &ScenarioConfig) -> Result<f64, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(channel_seed(cfg.seed, 0));
    Ok(Scenario::new(cfg, &mut rng)?.alpha())
}

fn curve_csv(k: usize) -> Vec<u8> {
    let mut csv = Csv::new(&["r", "ratio"]);
    for (r, ratio) in complexity_curve(k) {
        csv.row([r.to_string(), ratio.to_string()]);
    }
    csv.into_bytes()
}

fn campaign_artifacts(
    cfg: &ScenarioConfig,
    result: &CampaignResult,
) -> Result<Artifacts, CliError> {
    let mut out = Artifacts::new();
    for series in &result.ecdfs {
        let name = match series.pooling {
            Pooling::Snapshot => format!("ecdf_{}.csv", series.label),
            Pooling::TrialMean => format!("ecdf_{}_trial_mean.csv", series.label),
        };
        let mut csv = Csv::new(&["value", "cdf"]);
        for &(x, p) in &series.points {
            csv.row([x, p]);
        }
        out.add(name, csv.into_bytes());
    }

    let mut table = Csv::new(&["method", "eta", "savings_pct", "degradation_pct"]);
    for row in &result.table.rows {
        table.row([
            row.label.clone(),
            opt(row.eta),
            row.savings_pct.to_string(),
            row.degradation_pct.to_string(),
        ]);
    }
    out.add("comparison_table.csv", table.into_bytes());
    out.add("complexity_curve.csv", curve_csv(cfg.k));

    let mut artifacts = out.names();
    artifacts.push("summary.json".into());
    let summary = json!({
        "command": "campaign",
        "seed": cfg.seed,
        "config": cfg,
        "alpha_resolved": resolved_alpha(cfg)?,
        "noise_variance_W": cfg.noise_variance(),
        "snapshots_per_trial": cfg.snapshot_count(),
        "methods": result.methods,
        "table": result.table.rows,
        "crossover_rank": crossover_rank(cfg.k),
        "artifacts": artifacts,
    });
    out.add("summary.json", to_json(&summary));
    Ok(out)
}

fn campaign(common: &Common, sequential: bool) -> Result<(), CliError> {
    let cfg = common.resolve()?;
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let start = Instant::now();
    let result = run_campaign(&cfg, exec)?;
    let artifacts = campaign_artifacts(&cfg, &result)?;
    artifacts.write(&common.out_dir)?;

    println!(
        "{:<22} {:>8} {:>12} {:>16}",
        "method", "eta", "savings_%", "degradation_%"
    );
    for row in &result.table.rows {
        println!(
            "{:<22} {:>8} {:>12.2} {:>16.2}",
            row.label,
            opt(row.eta),
            row.savings_pct,
            row.degradation_pct
        );
    }
    eprintln!(
        "{} trials x {} snapshots in {:.1} s; artifacts in {}",
        cfg.mc_runs,
        cfg.snapshot_count(),
        start.elapsed().as_secs_f64(),
        common.out_dir.display()
    );
    Ok(())
}

fn trial(common: &Common, index: u64, geometry: bool) -> Result<(), CliError> {
    let cfg = common.resolve()?;
    if index >= cfg.mc_runs as u64 {
        return Err(CliError::Usage(format!(
            "--trial {index} is outside the campaign's {} trials",
            cfg.mc_runs
        )));
    }
    let methods = methods_for(&cfg.eta_list);
    let results = run_trial_methods(&cfg, &methods, index)?;
    let mut out = Artifacts::new();
    for r in &results {
        let mut csv = Csv::new(&["t_s", "sum_rate", "method", "k_est", "cost"]);
        for s in &r.snapshots {
            csv.row([
                s.t_s.to_string(),
                s.sum_rate.to_string(),
                s.method.as_str().to_string(),
                s.k_est.to_string(),
                s.cost.to_string(),
            ]);
        }
        out.add(format!("trial_{}.csv", r.method_label), csv.into_bytes());
    }
    if geometry {
        let mut csv = Csv::new(&[
            "t",
            "ut_index",
            "theta_rad",
            "phi_rad",
            "slant_range_m",
            "gain_dB",
        ]);
        for g in trial_geometry(&cfg, index)? {
            csv.row([
                g.t_s.to_string(),
                g.ut_index.to_string(),
                g.theta_rad.to_string(),
                g.phi_rad.to_string(),
                g.slant_range_m.to_string(),
                g.gain_db.to_string(),
            ]);
        }
        out.add("geometry.csv", csv.into_bytes());
    }
    let mut artifacts = out.names();
    artifacts.push("trial_summary.json".into());
    let per_method: Vec<_> = results
        .iter()
        .map(|r| {
            json!({
                "label": r.method_label,
                "mean_sum_rate": r.mean_sum_rate,
                "total_cost_units": r.total_cost_units,
            })
        })
        .collect();
    let summary = json!({
        "command": "trial",
        "seed": cfg.seed,
        "trial": index,
        "config": cfg,
        "alpha_resolved": resolved_alpha(&cfg)?,
        "methods": per_method,
        "artifacts": artifacts,
    });
    out.add("trial_summary.json", to_json(&summary));
    out.write(&common.out_dir)?;
    for r in &results {
        println!(
            "{:<22} mean sum rate {:.4} bit/s/Hz",
            r.method_label, r.mean_sum_rate
        );
    }
    Ok(())
}

fn complexity(k: usize, out_dir: &Path) -> Result<(), CliError> {
    if k == 0 {
        return Err(CliError::Usage("--K must be at least 1".into()));
    }
    let mut out = Artifacts::new();
    out.add("complexity_curve.csv", curve_csv(k));
    out.write(out_dir)?;
    match crossover_rank(k) {
        Some(r) => println!("K = {k}: WB-arSVD costs more than full inversion from r = {r}"),
        None => println!("K = {k}: WB-arSVD is cheaper for every r"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn arsvd_bench(
    matrices: usize,
    k: usize,
    etas: &[f64],
    k_init: usize,
    p: usize,
    i_max: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    if k == 0 || matrices == 0 {
        return Err(CliError::Usage(
            "--k and --matrices must be positive".into(),
        ));
    }
    let spectrum: Vec<f64> = (1..=k).map(|j| 2f64.powi(-(j as i32))).collect();
    let mut csv = Csv::new(&[
        "matrix",
        "eta",
        "k_est",
        "k_oracle",
        "iterations",
        "converged",
        "residual_fraction",
    ]);
    let mut agreement = Vec::with_capacity(etas.len());
    for &eta in etas {
        let cfg = ArSvdConfig {
            eta,
            k_init,
            oversampling: p,
            max_iter: i_max,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let mut agree = 0;
        for i in 0..matrices {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, i as u64]));
            let da = with_spectrum(&spectrum, &mut rng);
            let expected = energy_truncation_rank(&da, eta);
            let outcome = arsvd_detailed(&da, &cfg, &mut rng)?;
            let residual = frobenius_sq(&(&da - outcome.factor.to_dense())) / frobenius_sq(&da);
            if outcome.factor.k_est() == expected {
                agree += 1;
            }
            csv.row([
                i.to_string(),
                eta.to_string(),
                outcome.factor.k_est().to_string(),
                expected.to_string(),
                outcome.iterations.to_string(),
                outcome.converged.to_string(),
                residual.to_string(),
            ]);
        }
        agreement.push((eta, agree));
    }
    let mut out = Artifacts::new();
    out.add("arsvd_bench.csv", csv.into_bytes());
    out.write(out_dir)?;
    for (eta, agree) in agreement {
        println!("eta {eta}: {agree}/{matrices} match the full-SVD truncation rank");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Campaign { common, sequential } => campaign(&common, sequential),
        Command::Trial {
            common,
            trial: index,
            geometry,
        } => trial(&common, index, geometry),
        Command::ComplexityCurve { k, out_dir } => complexity(k, &out_dir),
        Command::ArsvdBench {
            matrices,
            k,
            eta,
            k_init,
            p,
            i_max,
            seed,
            out_dir,
        } => arsvd_bench(matrices, k, &eta, k_init, p, i_max, seed, &out_dir),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Errors are reported on standard error.
pub fn run_cli<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("leowb: {e}");
            e.exit_code()
        }
    }
}
