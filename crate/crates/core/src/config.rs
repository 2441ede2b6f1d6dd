//! Scenario configuration: defaults, TOML/JSON parsing, `key=value`
//! overrides and range validation.
//!
//! Keys mirror the simulation-parameter table of the experiment
//! (`carrier_Hz`, `N_RF`, `K_R_dB`, ...). A missing key takes its default; an
//! unknown key is rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lowrank::ArSvdConfig;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(rename = "carrier_Hz")]
    pub carrier_hz: f64,
    pub altitude_m: f64,
    pub array_nx: usize,
    pub array_ny: usize,
    /// Element spacing in wavelengths.
    pub element_spacing_wl: f64,
    #[serde(rename = "N_RF")]
    pub n_rf: usize,
    #[serde(rename = "P_t_W")]
    pub p_t_w: f64,
    /// Number of served UTs.
    #[serde(rename = "K")]
    pub k: usize,
    pub pass_s: f64,
    #[serde(rename = "update_rate_Hz")]
    pub update_rate_hz: f64,
    pub mc_runs: usize,
    pub eta_list: Vec<f64>,
    pub k_init: usize,
    pub p: usize,
    pub i_max: usize,
    #[serde(rename = "K_R_dB")]
    pub k_r_db: f64,
    pub footprint_radius_m: f64,
    #[serde(rename = "bandwidth_Hz")]
    pub bandwidth_hz: f64,
    #[serde(rename = "noise_temperature_K")]
    pub noise_temperature_k: f64,
    /// Overrides the thermal noise `kTB` when set.
    #[serde(rename = "noise_variance_W")]
    pub noise_variance_w: Option<f64>,
    #[serde(rename = "ut_gain_dBi")]
    pub ut_gain_dbi: f64,
    #[serde(rename = "atmospheric_loss_dB")]
    pub atmospheric_loss_db: f64,
    pub min_elevation_deg: f64,
    pub centroid_lat_deg: f64,
    pub centroid_lon_deg: f64,
    pub track_heading_deg: f64,
    /// RZF regularization; `None` selects `alpha_scale · K σ̄² / (P_t γ_ref²)`.
    pub alpha: Option<f64>,
    pub alpha_scale: f64,
    /// NLOS components are held for this many snapshots.
    pub nlos_block: usize,
    /// Analog beams are re-selected every this many snapshots.
    pub beam_hold: usize,
    /// Forced full re-inversion after this many tracked updates (0 = never).
    pub reset_interval: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 18e9,
            altitude_m: 600e3,
            array_nx: 16,
            array_ny: 16,
            element_spacing_wl: 0.5,
            n_rf: 16,
            p_t_w: 100.0,
            k: 16,
            pass_s: 120.0,
            update_rate_hz: 20.0,
            mc_runs: 50,
            eta_list: vec![0.9, 0.8, 0.65],
            k_init: 2,
            p: 1,
            i_max: 8,
            k_r_db: 10.0,
            footprint_radius_m: 185e3,
            bandwidth_hz: 50e6,
            noise_temperature_k: 290.0,
            noise_variance_w: None,
            ut_gain_dbi: 39.7,
            atmospheric_loss_db: 0.0,
            min_elevation_deg: 10.0,
            centroid_lat_deg: 0.0,
            centroid_lon_deg: 0.0,
            track_heading_deg: 0.0,
            alpha: None,
            alpha_scale: 2.0,
            nlos_block: 1,
            beam_hold: 1,
            reset_interval: 0,
            seed: 42,
        }
    }
}

/// Monte Carlo run count of the full-scale experiment.
pub const FULL_SCALE_RUNS: usize = 500;

const BOLTZMANN: f64 = 1.380_649e-23;

impl ScenarioConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn n_elements(&self) -> usize {
        self.array_nx * self.array_ny
    }

    pub fn snapshot_count(&self) -> usize {
        (self.pass_s * self.update_rate_hz).round() as usize
    }

    pub fn snapshot_interval_s(&self) -> f64 {
        1.0 / self.update_rate_hz
    }

    /// Per-UT noise variance in watts: the override, else `k T B`.
    pub fn noise_variance(&self) -> f64 {
        self.noise_variance_w
            .unwrap_or(BOLTZMANN * self.noise_temperature_k * self.bandwidth_hz)
    }

    /// Rician factor as a linear power ratio, capped at 1e12.
    pub fn k_r_linear(&self) -> f64 {
        10f64.powf(self.k_r_db / 10.0).min(crate::channel::K_R_CAP)
    }

    pub fn arsvd(&self, eta: f64) -> ArSvdConfig {
        ArSvdConfig {
            eta,
            k_init: self.k_init,
            oversampling: self.p,
            max_iter: self.i_max,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let range = |msg: String| Err(ConfigError::Range(msg));
        let positive = [
            ("carrier_Hz", self.carrier_hz),
            ("altitude_m", self.altitude_m),
            ("element_spacing_wl", self.element_spacing_wl),
            ("P_t_W", self.p_t_w),
            ("pass_s", self.pass_s),
            ("update_rate_Hz", self.update_rate_hz),
            ("bandwidth_Hz", self.bandwidth_hz),
            ("noise_temperature_K", self.noise_temperature_k),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return range(format!("{key} must be a positive finite number, got {v}"));
            }
        }
        if !(self.footprint_radius_m >= 0.0) {
            return range(format!(
                "footprint_radius_m must be nonnegative, got {}",
                self.footprint_radius_m
            ));
        }
        if self.array_nx == 0 || self.array_ny == 0 {
            return range("array dimensions must be positive".into());
        }
        if self.k == 0 {
            return range("K must be at least 1".into());
        }
        if self.k > self.n_rf {
            return range(format!(
                "K = {} exceeds N_RF = {} (need K <= N_RF <= N_t)",
                self.k, self.n_rf
            ));
        }
        if self.n_rf > self.n_elements() {
            return range(format!(
                "N_RF = {} exceeds N_t = {} (need K <= N_RF <= N_t)",
                self.n_rf,
                self.n_elements()
            ));
        }
        let snaps = self.pass_s * self.update_rate_hz;
        if (snaps - snaps.round()).abs() > 1e-9 || snaps.round() < 1.0 {
            return range(format!(
                "pass_s x update_rate_Hz must be a positive integer, got {snaps}"
            ));
        }
        if self.mc_runs == 0 {
            return range("mc_runs must be at least 1".into());
        }
        for &eta in &self.eta_list {
            if !(eta > 0.0 && eta <= 1.0) {
                return range(format!("eta values must lie in (0, 1], got {eta}"));
            }
        }
        if self.k_init == 0 || self.i_max == 0 {
            return range("k_init and i_max must be at least 1".into());
        }
        if self.k_r_db.is_nan() {
            return range("K_R_dB must be a number".into());
        }
        if let Some(n) = self.noise_variance_w {
            if !(n > 0.0) {
                return range(format!("noise_variance_W must be positive, got {n}"));
            }
        }
        if !(self.alpha_scale > 0.0 && self.alpha_scale.is_finite()) {
            return range(format!(
                "alpha_scale must be positive, got {}",
                self.alpha_scale
            ));
        }
        if let Some(a) = self.alpha {
            if !(a >= 0.0) {
                return range(format!("alpha must be nonnegative, got {a}"));
            }
        }
        if self.nlos_block == 0 || self.beam_hold == 0 {
            return range("nlos_block and beam_hold must be at least 1".into());
        }
        if !(0.0..90.0).contains(&self.min_elevation_deg) {
            return range(format!(
                "min_elevation_deg must lie in [0, 90), got {}",
                self.min_elevation_deg
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("bad override: {0}")]
    Override(String),
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn unknown_field(message: &str) -> Option<String> {
    let rest = message.split("unknown field `").nth(1)?;
    Some(rest.split('`').next()?.to_string())
}

/// Parses a TOML document (or JSON, when it starts with `{`) into a raw table.
pub fn parse_table(text: &str) -> Result<toml::Table, ConfigError> {
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        let table: toml::Table =
            serde_json::from_value(strip_nulls(value)).map_err(|e| ConfigError::Parse {
                line: 1,
                column: 1,
                message: e.to_string(),
            })?;
        return Ok(table);
    }
    text.parse::<toml::Table>().map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

fn strip_nulls(value: serde_json::Value) -> serde_json::Value {
    match value {
        serde_json::Value::Object(map) => serde_json::Value::Object(
            map.into_iter()
                .filter(|(_, v)| !v.is_null())
                .map(|(k, v)| (k, strip_nulls(v)))
                .collect(),
        ),
        other => other,
    }
}

/// Parses the right-hand side of a `key=value` override. Bare
/// comma-separated lists become arrays; anything that is not a TOML literal
/// is taken as a string.
fn override_value(raw: &str) -> Result<toml::Value, ConfigError> {
    let raw = raw.trim();
    let literal = if raw.contains(',') && !raw.starts_with('[') {
        format!("[{raw}]")
    } else {
        raw.to_string()
    };
    let doc = format!("v = {literal}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => Ok(t.remove("v").expect("parsed key")),
        Err(_) if !raw.contains(',') => Ok(toml::Value::String(raw.to_string())),
        Err(e) => Err(ConfigError::Override(format!("`{raw}`: {}", e.message()))),
    }
}

/// Applies `key=value` overrides to a raw table.
pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<(), ConfigError> {
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| ConfigError::Override(format!("`{item}` is not KEY=VALUE")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Override(format!("`{item}` has an empty key")));
        }
        let mut value = override_value(value)?;
        // Integer-valued overrides of float keys (`P_t_W=100`) are fine; the
        // reverse is caught by deserialization.
        if let toml::Value::Integer(i) = value {
            if FLOAT_KEYS.contains(&key) {
                value = toml::Value::Float(i as f64);
            }
        }
        table.insert(key.to_string(), value);
    }
    Ok(())
}

const FLOAT_KEYS: &[&str] = &[
    "carrier_Hz",
    "altitude_m",
    "element_spacing_wl",
    "P_t_W",
    "pass_s",
    "update_rate_Hz",
    "K_R_dB",
    "footprint_radius_m",
    "bandwidth_Hz",
    "noise_temperature_K",
    "noise_variance_W",
    "ut_gain_dBi",
    "atmospheric_loss_dB",
    "min_elevation_deg",
    "centroid_lat_deg",
    "centroid_lon_deg",
    "track_heading_deg",
    "alpha",
    "alpha_scale",
];

fn promote_integers(table: &mut toml::Table) {
    for key in FLOAT_KEYS {
        if let Some(toml::Value::Integer(i)) = table.get(*key) {
            let f = *i as f64;
            table.insert(key.to_string(), toml::Value::Float(f));
        }
    }
    // A single value (`eta_list=0.9`) is a one-element list.
    if let Some(v @ (toml::Value::Integer(_) | toml::Value::Float(_))) = table.get("eta_list") {
        let single = v.clone();
        table.insert("eta_list".into(), toml::Value::Array(vec![single]));
    }
    if let Some(toml::Value::Array(items)) = table.get_mut("eta_list") {
        for item in items.iter_mut() {
            if let toml::Value::Integer(i) = item {
                *item = toml::Value::Float(*i as f64);
            }
        }
    }
}

/// Resolves a raw table into a validated [`ScenarioConfig`].
pub fn from_table(mut table: toml::Table) -> Result<ScenarioConfig, ConfigError> {
    promote_integers(&mut table);
    let cfg: ScenarioConfig =
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| {
                let message = e.message().to_string();
                match unknown_field(&message) {
                    Some(key) => ConfigError::UnknownKey(key),
                    None => ConfigError::Parse {
                        line: 0,
                        column: 0,
                        message,
                    },
                }
            })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parses config text, applies overrides, fills defaults and validates.
pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<ScenarioConfig, ConfigError> {
    let mut table = parse_table(text)?;
    apply_overrides(&mut table, overrides)?;
    from_table(table)
}

/// Reads and resolves a config file.
pub fn parse_config(path: &Path, overrides: &[String]) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = parse_config_str("", &[]).unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!((cfg.array_nx, cfg.array_ny), (16, 16));
        assert_eq!(cfg.altitude_m, 600e3);
        assert_eq!(cfg.carrier_hz, 18e9);
        assert!((10.0 * cfg.p_t_w.log10() - 20.0).abs() < 1e-12);
        assert_eq!(cfg.k_r_db, 10.0);
        assert_eq!(cfg.update_rate_hz, 20.0);
        assert_eq!(cfg.snapshot_count(), 2400);
    }

    #[test]
    fn eta_list_override() {
        let cfg = parse_config_str("", &["eta_list=0.9,0.8,0.65".into()]).unwrap();
        assert_eq!(cfg.eta_list, vec![0.9, 0.8, 0.65]);
    }

    #[test]
    fn too_many_users_is_a_range_error() {
        let err = parse_config_str("", &["K=32".into()]).unwrap_err();
        assert!(matches!(err, ConfigError::Range(_)), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_config_str("bogus = 3\n", &[]).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey("bogus".into()));
    }

    #[test]
    fn parse_error_reports_position() {
        let err = parse_config_str("K = 4\naltitude_m = = 3\n", &[]).unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_input_is_accepted() {
        let cfg = parse_config_str(r#"{"K": 8, "P_t_W": 50, "alpha": null}"#, &[]).unwrap();
        assert_eq!(cfg.k, 8);
        assert_eq!(cfg.p_t_w, 50.0);
        assert_eq!(cfg.alpha, None);
    }

    #[test]
    fn json_parse_error_reports_line() {
        let err = parse_config_str("{\n\"K\": 8,\n\"P_t_W\": }\n", &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn overrides_win_over_file_values() {
        let cfg = parse_config_str("K = 4\n", &["K=8".into(), "alpha=0.5".into()]).unwrap();
        assert_eq!(cfg.k, 8);
        assert_eq!(cfg.alpha, Some(0.5));
        let single = parse_config_str("", &["eta_list=0.9".into()]).unwrap();
        assert_eq!(single.eta_list, vec![0.9]);
        let one = parse_config_str("eta_list = 1\n", &[]).unwrap();
        assert_eq!(one.eta_list, vec![1.0]);
    }

    #[test]
    fn integer_literals_for_float_keys() {
        let cfg = parse_config_str("altitude_m = 550000\n", &[]).unwrap();
        assert_eq!(cfg.altitude_m, 550e3);
    }

    #[test]
    fn fractional_snapshot_count_is_rejected() {
        let err = parse_config_str("pass_s = 1.01\nupdate_rate_Hz = 20.0\n", &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Range(_)));
    }

    #[test]
    fn thermal_noise_default() {
        let cfg = ScenarioConfig::default();
        let dbw = 10.0 * cfg.noise_variance().log10();
        // -203.98 dBW/Hz + 76.99 dB-Hz
        assert!((dbw + 126.99).abs() < 0.01, "{dbw}");
    }

    #[test]
    fn malformed_override() {
        assert!(matches!(
            parse_config_str("", &["K".into()]),
            Err(ConfigError::Override(_))
        ));
    }
}
