//! Capacity formulas for the FTN signal model.
//!
//! Power and bandwidth enter only through `P/(N0·W)`; absolute units are
//! left to the caller. All logarithms are base 2.
//!
//! [`ftn_naive_capacity`] is the value obtained by treating the `1/ρ` times
//! more FTN samples as independent channel uses at the same power. It grows
//! without bound as `ρ → 0`, which is impossible for a channel of fixed
//! bandwidth; [`paradox_gap`] measures the excess over the Nyquist value.
//! The average-power bound behind it assumes the FTN signal stays localized
//! in time, which the [`crate::localization`] module shows to be false.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{FtnError, Result};
use crate::export::csv_writer;

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    FtnError::ensure_finite(name, v)?;
    if v < 0.0 {
        return Err(FtnError::invalid(format!(
            "{name} must be non-negative, got {v}"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    FtnError::ensure_finite(name, v)?;
    if v <= 0.0 {
        return Err(FtnError::invalid(format!(
            "{name} must be positive, got {v}"
        )));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    FtnError::ensure_finite("rho", rho)?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(FtnError::invalid(format!(
            "rho must lie in (0, 1], got {rho}"
        )));
    }
    Ok(())
}

/// `½·log₂(1 + 2Es/N0)` bits per real sample.
pub fn capacity_per_sample(es: f64, n0: f64) -> Result<f64> {
    check_nonnegative("Es", es)?;
    check_positive("N0", n0)?;
    Ok(0.5 * (2.0 * es / n0).ln_1p() / std::f64::consts::LN_2)
}

/// `(W/ρ)·log₂(1 + ρP/(N0W))` bits per second.
pub fn ftn_naive_capacity(rho: f64, w: f64, p: f64, n0: f64) -> Result<f64> {
    check_rho(rho)?;
    check_positive("W", w)?;
    check_nonnegative("P", p)?;
    check_positive("N0", n0)?;
    Ok(w / rho * (1.0 + rho * p / (n0 * w)).log2())
}

/// `(1+β)W·log₂(1 + P/(N0W(1+β)))` bits per second: Shannon capacity over
/// the bandwidth the RRC pulse actually occupies.
pub fn precoded_rrc_capacity(beta: f64, w: f64, p: f64, n0: f64) -> Result<f64> {
    FtnError::ensure_finite("beta", beta)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(FtnError::invalid(format!(
            "beta must lie in [0, 1], got {beta}"
        )));
    }
    check_positive("W", w)?;
    check_nonnegative("P", p)?;
    check_positive("N0", n0)?;
    let wb = (1.0 + beta) * w;
    Ok(wb * (1.0 + p / (n0 * wb)).log2())
}

/// `C(ρ) − C(1)`; strictly positive for `ρ < 1` and `P > 0`.
pub fn paradox_gap(rho: f64, w: f64, p: f64, n0: f64) -> Result<f64> {
    Ok(ftn_naive_capacity(rho, w, p, n0)? - ftn_naive_capacity(1.0, w, p, n0)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityPoint {
    pub rho: f64,
    pub beta: f64,
    pub bandwidth: f64,
    pub power: f64,
    pub n0: f64,
    /// Bits per second.
    pub value: f64,
}

/// One row of a capacity sweep at `W = N0 = 1`, `P = snr_ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub rho_or_beta: f64,
    pub snr_ratio: f64,
    pub capacity: f64,
}

/// [`ftn_naive_capacity`] over `rhos` at `P/(N0W) = snr_ratio`.
pub fn naive_capacity_sweep(rhos: &[f64], snr_ratio: f64) -> Result<Vec<CapacityRow>> {
    rhos.iter()
        .map(|&rho| {
            Ok(CapacityRow {
                rho_or_beta: rho,
                snr_ratio,
                capacity: ftn_naive_capacity(rho, 1.0, snr_ratio, 1.0)?,
            })
        })
        .collect()
}

/// [`precoded_rrc_capacity`] over `betas` at `P/(N0W) = snr_ratio`.
pub fn precoded_capacity_sweep(betas: &[f64], snr_ratio: f64) -> Result<Vec<CapacityRow>> {
    betas
        .iter()
        .map(|&beta| {
            Ok(CapacityRow {
                rho_or_beta: beta,
                snr_ratio,
                capacity: precoded_rrc_capacity(beta, 1.0, snr_ratio, 1.0)?,
            })
        })
        .collect()
}

/// CSV with columns `rho_or_beta, snr_ratio, capacity`.
pub fn write_capacity_csv<W: Write>(w: W, rows: &[CapacityRow]) -> Result<()> {
    let mut out = csv_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
