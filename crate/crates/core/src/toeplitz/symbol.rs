//! Associated functions (symbols) of FTN Gramians.
//!
//! For pulses `h_k(t) = h(t − kτ)` the Gramian is Toeplitz and its symbol is
//! the folded power spectrum
//!
//! ```text
//! f(z) = (1/τ) Σ_ℓ |H((z + 2πℓ)/τ)|²,   z ∈ [−π, π].
//! ```
//!
//! Band-limited pulses make the sum finite. Closed forms exist for the sinc
//! (an indicator) and for the RRC (a piecewise sine profile whose shape
//! depends on whether `(1+β)ρ` is below or above one).

use std::f64::consts::PI;

use crate::error::{FtnError, Result};
use crate::pulse::{PulseKind, PulseShape};

/// `(1/τ) Σ_ℓ |G((z + 2πℓ)/τ)|²`, summing exactly the aliases that land
/// inside the pulse's spectral support.
pub fn folded_spectrum(p: &PulseShape, tau: f64, z: f64) -> Result<f64> {
    FtnError::ensure_finite("z", z)?;
    FtnError::ensure_finite("tau", tau)?;
    if tau <= 0.0 {
        return Err(FtnError::invalid(format!(
            "shift must be positive, got {tau}"
        )));
    }
    Ok(folded_unchecked(p, tau, z))
}

fn folded_unchecked(p: &PulseShape, tau: f64, z: f64) -> f64 {
    let reach = p.angular_support() * tau;
    let lo = ((-reach - z) / (2.0 * PI)).ceil() as i64;
    let hi = ((reach - z) / (2.0 * PI)).floor() as i64;
    (lo..=hi)
        .map(|l| p.spectrum((z + 2.0 * PI * l as f64) / tau).powi(2))
        .sum::<f64>()
        / tau
}

/// Closed-form symbol of the RRC Gramian with pulses `√ρ·g_β(t − kρT)`.
///
/// Valid for `ρ ∈ (0, 1]`, `β ∈ (0, 1]`; the two branch families agree when
/// `(1+β)ρ = 1`.
pub fn rrc_associated_function(rho: f64, beta: f64, z: f64) -> Result<f64> {
    FtnError::ensure_finite("z", z)?;
    FtnError::ensure_finite("rho", rho)?;
    FtnError::ensure_finite("beta", beta)?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(FtnError::invalid(format!(
            "rho must lie in (0, 1], got {rho}"
        )));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(FtnError::invalid(format!(
            "beta must lie in (0, 1], got {beta}"
        )));
    }
    Ok(rrc_symbol(rho, beta, z))
}

fn rrc_symbol(rho: f64, beta: f64, z: f64) -> f64 {
    let az = wrap(z).abs();
    let flat_edge = (1.0 - beta) * rho * PI;
    let rolloff = |az: f64| 0.5 * (1.0 - ((az - rho * PI) / (2.0 * beta * rho)).sin());
    if az <= flat_edge {
        return 1.0;
    }
    if (1.0 + beta) * rho <= 1.0 {
        if az <= (1.0 + beta) * rho * PI {
            rolloff(az)
        } else {
            0.0
        }
    } else if az <= (2.0 - (1.0 + beta) * rho) * PI {
        rolloff(az)
    } else {
        let s = (PI * (1.0 - rho) / (2.0 * beta * rho)).sin();
        1.0 - s * ((az - PI) / (2.0 * beta * rho)).cos()
    }
}

/// Maps `z` into `[−π, π]`.
fn wrap(z: f64) -> f64 {
    if (-PI..=PI).contains(&z) {
        z
    } else {
        z - 2.0 * PI * ((z + PI) / (2.0 * PI)).floor()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    /// `level·1{|z| ≤ ρπ}`
    Indicator { rho: f64, level: f64 },
    /// `level·f_RRC(z; ρ, β)`
    RaisedCosine { rho: f64, beta: f64, level: f64 },
    /// Folded spectrum evaluated term by term.
    Folded { pulse: PulseShape, tau: f64 },
}

/// A non-negative symbol on `[−π, π]` with cached extrema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociatedFunction {
    form: Form,
    inf: f64,
    sup: f64,
}

impl AssociatedFunction {
    /// Symbol for pulses `p(t − kτ)`. Closed forms are used where available.
    pub fn for_pulse(p: &PulseShape, tau: f64) -> Result<Self> {
        FtnError::ensure_finite("tau", tau)?;
        if tau <= 0.0 {
            return Err(FtnError::invalid(format!(
                "shift must be positive, got {tau}"
            )));
        }
        let rho = tau / p.symbol_time;
        // f = (1/τ)·gain²·T·(shape) = (gain²/ρ)·(shape)
        let level = p.energy() / rho;
        let form = match p.kind {
            PulseKind::Sinc if rho <= 1.0 => Form::Indicator { rho, level },
            PulseKind::RootRaisedCosine if rho <= 1.0 => Form::RaisedCosine {
                rho,
                beta: p.rolloff,
                level,
            },
            _ => Form::Folded { pulse: *p, tau },
        };
        Ok(Self::from_form(form))
    }

    fn from_form(form: Form) -> Self {
        let (inf, sup) = match form {
            Form::Indicator { rho, level } => (if rho < 1.0 { 0.0 } else { level }, level),
            Form::RaisedCosine { rho, beta, level } => {
                let inf = if (1.0 + beta) * rho <= 1.0 {
                    0.0
                } else {
                    level * (1.0 - (PI * (1.0 - rho) / (2.0 * beta * rho)).sin())
                };
                (inf.max(0.0), level)
            }
            Form::Folded { pulse, tau } => {
                // Dense sampling; the folded spectra here are piecewise smooth
                // and even, so [0, π] suffices.
                let n = 20_000;
                (0..=n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                    let v = folded_unchecked(&pulse, tau, PI * i as f64 / n as f64);
                    (lo.min(v), hi.max(v))
                })
            }
        };
        AssociatedFunction { form, inf, sup }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self.form {
            Form::Indicator { rho, level } => {
                if wrap(z).abs() <= rho * PI {
                    level
                } else {
                    0.0
                }
            }
            Form::RaisedCosine { rho, beta, level } => level * rrc_symbol(rho, beta, z),
            Form::Folded { pulse, tau } => folded_unchecked(&pulse, tau, wrap(z)),
        }
    }

    pub fn inf(&self) -> f64 {
        self.inf
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    /// Points in `(0, π)` where the symbol changes formula; used to place
    /// quadrature breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match self.form {
            Form::Indicator { rho, .. } => vec![rho * PI],
            Form::RaisedCosine { rho, beta, .. } => vec![
                (1.0 - beta) * rho * PI,
                (1.0 + beta) * rho * PI,
                (2.0 - (1.0 + beta) * rho) * PI,
            ],
            Form::Folded { pulse, tau } => {
                let mut v = Vec::new();
                for edge in pulse.spectral_breakpoints() {
                    let z = edge * tau;
                    for l in -4..=4 {
                        v.push((z + 2.0 * PI * l as f64).abs());
                    }
                }
                v
            }
        };
        pts.retain(|z| *z > 0.0 && *z < PI);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Samples `f(2πℓ/n − π)`, `ℓ = 1..=n`.
    pub fn grid_samples(&self, n: usize) -> Vec<f64> {
        (1..=n)
            .map(|l| self.eval(2.0 * PI * l as f64 / n as f64 - PI))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::CompositeRule;
    use approx::assert_abs_diff_eq;

    const BETA: f64 = 0.22;

    fn scaled_rrc(rho: f64) -> PulseShape {
        PulseShape::rrc(BETA, 1.0).unwrap().with_gain(rho.sqrt())
    }

    #[test]
    fn folded_sinc_at_origin() {
        let p = PulseShape::sinc(0.5).unwrap();
        assert_abs_diff_eq!(folded_spectrum(&p, 0.5, 0.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(folded_spectrum(&p, 0.5, 0.6 * PI).unwrap(), 0.0);
    }

    #[test]
    fn folded_rrc_boundary_case() {
        let rho = 1.0 / (1.0 + BETA);
        let p = scaled_rrc(rho);
        assert_abs_diff_eq!(folded_spectrum(&p, rho, 0.0).unwrap(), 1.0, epsilon = 1e-14);
        // 1 − sin(π(1−ρ)/(2βρ)) with π(1−ρ)/(2βρ) = π/2
        assert_abs_diff_eq!(folded_spectrum(&p, rho, PI).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            rrc_associated_function(rho, BETA, PI).unwrap(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn closed_form_matches_folding_on_a_grid() {
        for rho in [0.5, 0.7, 0.81, 1.0 / 1.22, 0.82, 0.9, 1.0] {
            let p = scaled_rrc(rho);
            for i in 0..=400 {
                let z = -PI + 2.0 * PI * i as f64 / 400.0;
                let a = rrc_associated_function(rho, BETA, z).unwrap();
                let b = folded_spectrum(&p, rho, z).unwrap();
                assert!((a - b).abs() < 1e-9, "rho {rho} z {z}: {a} vs {b}");
            }
        }
        let a = rrc_associated_function(0.9, BETA, 0.95 * PI).unwrap();
        let b = folded_spectrum(&scaled_rrc(0.9), 0.9, 0.95 * PI).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }

    #[test]
    fn zero_outside_band_when_sparse() {
        let (rho, beta) = (0.5, 0.22);
        let z = 0.5 * ((1.0 + beta) * rho * PI + PI);
        assert_eq!(rrc_associated_function(rho, beta, z).unwrap(), 0.0);
        assert_eq!(rrc_associated_function(rho, beta, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn branches_agree_at_boundary() {
        let rho = 1.0 / (1.0 + BETA);
        for i in 0..1000 {
            let z = -PI + 2.0 * PI * (i as f64 + 0.5) / 1000.0;
            let az = z.abs();
            // Evaluate both branch families explicitly.
            let leq = if az <= (1.0 - BETA) * rho * PI {
                1.0
            } else if az <= (1.0 + BETA) * rho * PI {
                0.5 * (1.0 - ((az - rho * PI) / (2.0 * BETA * rho)).sin())
            } else {
                0.0
            };
            let geq = if az <= (1.0 - BETA) * rho * PI {
                1.0
            } else if az <= (2.0 - (1.0 + BETA) * rho) * PI {
                0.5 * (1.0 - ((az - rho * PI) / (2.0 * BETA * rho)).sin())
            } else {
                1.0 - (PI * (1.0 - rho) / (2.0 * BETA * rho)).sin()
                    * ((az - PI) / (2.0 * BETA * rho)).cos()
            };
            assert!((leq - geq).abs() < 1e-9);
        }
    }

    #[test]
    fn mean_of_symbol_is_c0() {
        for rho in [0.5, 0.82, 0.9, 1.0] {
            let p = scaled_rrc(rho);
            let f = AssociatedFunction::for_pulse(&p, rho).unwrap();
            let mut br = vec![-PI];
            br.extend(f.breakpoints().iter().rev().map(|z| -z));
            br.extend(f.breakpoints());
            br.push(PI);
            let mean = CompositeRule::with_breakpoints(&br).integrate(|z| f.eval(z)) / (2.0 * PI);
            assert_abs_diff_eq!(mean, rho, epsilon = 1e-12);
        }
    }

    #[test]
    fn extrema() {
        let f = AssociatedFunction::for_pulse(&PulseShape::sinc(0.5).unwrap(), 0.9).unwrap();
        assert_eq!(f.inf(), 0.0);
        assert_abs_diff_eq!(f.sup(), 1.0 / 0.9, epsilon = 1e-15);
        let f = AssociatedFunction::for_pulse(&scaled_rrc(0.9), 0.9).unwrap();
        assert_abs_diff_eq!(f.inf(), 0.287_305_83, epsilon = 1e-8);
        assert_abs_diff_eq!(f.inf(), f.eval(PI), epsilon = 1e-14);
        assert_abs_diff_eq!(f.sup(), 1.0, epsilon = 1e-15);
        // a pulse wider than the symbol time falls back to folding
        let wide = PulseShape::sinc(0.5).unwrap();
        let f = AssociatedFunction::for_pulse(&wide, 1.5).unwrap();
        assert_abs_diff_eq!(f.eval(0.3), 1.0 / 1.5, epsilon = 1e-14);
    }

    #[test]
    fn invalid_symbol_arguments() {
        assert!(rrc_associated_function(1.2, 0.2, 0.0).is_err());
        assert!(rrc_associated_function(0.9, 0.0, 0.0).is_err());
        assert!(folded_spectrum(&scaled_rrc(0.9), 0.0, 0.0).is_err());
    }
}
