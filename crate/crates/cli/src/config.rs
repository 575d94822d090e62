//! Flat TOML experiment configuration with `key=value` overrides.

use std::path::Path;

use ftn_core::channel::{EnergyConvention, PulseNormalization, TransmissionConfig};
use ftn_core::{PrecoderMode, PulseShape};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Every parameter of every subcommand. Keys not listed here are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Packing factor `ρ ∈ (0, 1]`.
    pub rho: f64,
    /// RRC roll-off; 0 selects sinc pulses.
    pub beta: f64,
    /// Nyquist bandwidth `W`; the symbol time is `T = 1/(2W)`.
    pub bandwidth: f64,
    pub pulse_normalization: PulseNormalization,

    /// Gramian order.
    pub n: usize,
    pub symbol_samples: usize,

    pub rho_values: Vec<f64>,
    /// Nyquist slots `n` of the localization sweep; the grid holds `⌊n/ρ⌋` pulses.
    pub sweep_n: usize,
    pub m_values: Vec<usize>,
    pub worst_case_m: usize,
    pub alternating_m: usize,
    pub waveform_points: usize,

    pub approx_rhos: Vec<f64>,
    /// Delay of the target pulse, in symbol times.
    pub target_delay: f64,
    /// Basis shifts cover `[0, basis_span]` symbol times.
    pub basis_span: f64,

    pub snr_db: Vec<f64>,
    pub min_bits: u64,
    pub block_m: usize,
    pub es: f64,
    pub precoder_mode: PrecoderMode,
    pub energy_convention: EnergyConvention,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// `P/(N0·W)`.
    pub snr_ratio: f64,
    pub capacity_rho_min: f64,
    pub capacity_points: usize,
    pub beta_values: Vec<f64>,

    pub effective_n: Vec<usize>,
    pub ell: i64,
    /// Spacing of the effective-pulse grid; defaults to `T/(1+β)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_prime: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rho: 0.9,
            beta: 0.0,
            bandwidth: 0.5,
            pulse_normalization: PulseNormalization::UnitEnergy,
            n: 256,
            symbol_samples: 512,
            rho_values: vec![0.7, 0.81, 0.9, 1.0],
            sweep_n: 20,
            m_values: vec![0, 5, 10, 15, 20, 30],
            worst_case_m: 15,
            alternating_m: 400,
            waveform_points: 2001,
            approx_rhos: vec![0.5, 1.0 / 3.0, 0.25],
            target_delay: 6.0,
            basis_span: 4.0,
            snr_db: vec![0.0, 2.0, 4.0, 6.0, 8.0],
            min_bits: 100_000,
            block_m: 256,
            es: 1.0,
            precoder_mode: PrecoderMode::ExactEigen,
            energy_convention: EnergyConvention::PerSample,
            seed: None,
            snr_ratio: 10.0,
            capacity_rho_min: 0.5,
            capacity_points: 100,
            beta_values: vec![0.0, 0.1, 0.22, 0.5, 1.0],
            effective_n: vec![8, 32, 128],
            ell: 0,
            t_prime: None,
        }
    }
}

impl ExperimentConfig {
    /// Reads `path` (if any), applies `overrides` in order and validates.
    /// `path` may also be a sidecar written by a previous run.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str::<toml::Table>(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        // A `.meta.toml` sidecar re-runs with the configuration it echoes.
        if table.contains_key("command") {
            if let Some(toml::Value::Table(inner)) = table.remove("config") {
                table = inner;
            }
        }
        for (key, raw) in overrides {
            table.insert(key.clone(), parse_value(raw));
        }
        let config: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn symbol_time(&self) -> f64 {
        0.5 / self.bandwidth
    }

    /// Unit-energy pulse of the configured family.
    pub fn unit_pulse(&self) -> ftn_core::Result<PulseShape> {
        PulseShape::rrc(self.beta, self.symbol_time())
    }

    /// The pulse with the configured normalization at packing `rho`.
    pub fn scaled_pulse(&self, rho: f64) -> ftn_core::Result<PulseShape> {
        let p = self.unit_pulse()?;
        Ok(match self.pulse_normalization {
            PulseNormalization::UnitEnergy => p,
            PulseNormalization::SqrtRho => p.with_gain(rho.sqrt()),
        })
    }

    pub fn effective_t_prime(&self) -> f64 {
        self.t_prime
            .unwrap_or(self.symbol_time() / (1.0 + self.beta))
    }

    pub fn transmission(&self, seed: u64) -> TransmissionConfig {
        TransmissionConfig {
            rho: self.rho,
            beta: self.beta,
            bandwidth: self.bandwidth,
            block_m: self.block_m,
            es: self.es,
            seed,
            precoder_mode: self.precoder_mode,
            energy_convention: self.energy_convention,
            pulse_normalization: self.pulse_normalization,
            ..TransmissionConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let in_rho_range = |v: f64| v > 0.0 && v <= 1.0;
        let in_beta_range = |v: f64| (0.0..=1.0).contains(&v);
        require(in_rho_range(self.rho), || {
            format!("rho must lie in (0, 1], got {}", self.rho)
        })?;
        require(in_beta_range(self.beta), || {
            format!("beta must lie in [0, 1], got {}", self.beta)
        })?;
        require(self.bandwidth.is_finite() && self.bandwidth > 0.0, || {
            format!("bandwidth must be positive, got {}", self.bandwidth)
        })?;
        require(self.n >= 1, || "n must be at least 1".into())?;
        require(self.symbol_samples >= 2, || {
            "symbol_samples must be at least 2".into()
        })?;

        require(!self.rho_values.is_empty(), || "rho_values is empty".into())?;
        for &r in &self.rho_values {
            require(in_rho_range(r), || {
                format!("rho_values entries must lie in (0, 1], got {r}")
            })?;
        }
        require(self.sweep_n >= 1, || "sweep_n must be at least 1".into())?;
        require(!self.m_values.is_empty(), || "m_values is empty".into())?;
        require(self.m_values.windows(2).all(|w| w[0] <= w[1]), || {
            "m_values must be nondecreasing".into()
        })?;
        require(self.alternating_m >= 2, || {
            "alternating_m must be at least 2".into()
        })?;
        require(self.waveform_points >= 2, || {
            "waveform_points must be at least 2".into()
        })?;

        require(!self.approx_rhos.is_empty(), || {
            "approx_rhos is empty".into()
        })?;
        for &r in &self.approx_rhos {
            require(in_rho_range(r), || {
                format!("approx_rhos entries must lie in (0, 1], got {r}")
            })?;
        }
        require(self.target_delay.is_finite(), || {
            "target_delay must be finite".into()
        })?;
        require(
            self.basis_span.is_finite() && self.basis_span >= 0.0,
            || format!("basis_span must be non-negative, got {}", self.basis_span),
        )?;

        require(!self.snr_db.is_empty(), || "snr_db is empty".into())?;
        for &s in &self.snr_db {
            require(!s.is_nan() && s != f64::NEG_INFINITY, || {
                format!("snr_db entries must be finite or +inf, got {s}")
            })?;
        }
        require(self.min_bits >= 1, || "min_bits must be at least 1".into())?;
        require(self.block_m >= 1, || "block_m must be at least 1".into())?;
        require(self.es.is_finite() && self.es >= 0.0, || {
            format!("es must be non-negative, got {}", self.es)
        })?;

        require(self.snr_ratio.is_finite() && self.snr_ratio >= 0.0, || {
            format!("snr_ratio must be non-negative, got {}", self.snr_ratio)
        })?;
        require(in_rho_range(self.capacity_rho_min), || {
            format!(
                "capacity_rho_min must lie in (0, 1], got {}",
                self.capacity_rho_min
            )
        })?;
        require(self.capacity_points >= 2, || {
            "capacity_points must be at least 2".into()
        })?;
        for &b in &self.beta_values {
            require(in_beta_range(b), || {
                format!("beta_values entries must lie in [0, 1], got {b}")
            })?;
        }

        require(!self.effective_n.is_empty(), || {
            "effective_n is empty".into()
        })?;
        for &n in &self.effective_n {
            require(n >= 1 && (self.ell.unsigned_abs() as usize) <= n, || {
                format!(
                    "effective_n entry {n} must be at least max(1, |ell|) = {}",
                    self.ell.abs().max(1)
                )
            })?;
        }
        if let Some(t) = self.t_prime {
            require(t.is_finite() && t > 0.0, || {
                format!("t_prime must be positive, got {t}")
            })?;
        }
        Ok(())
    }
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

/// Parses an override value as a TOML value; `a/b` becomes the float
/// quotient and anything else unparseable is kept as a string.
pub fn parse_value(raw: &str) -> toml::Value {
    let raw = raw.trim();
    if let Ok(mut t) = toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        if let Some(v) = t.remove("v") {
            return v;
        }
    }
    if let Some((num, den)) = raw.split_once('/') {
        if let (Ok(a), Ok(b)) = (num.trim().parse::<f64>(), den.trim().parse::<f64>()) {
            return toml::Value::Float(a / b);
        }
    }
    toml::Value::String(raw.to_string())
}

/// Splits `key=value`.
pub fn parse_assignment(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty key in `{s}`"));
    }
    Ok((k.to_string(), v.to_string()))
}
