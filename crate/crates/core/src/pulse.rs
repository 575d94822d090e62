//! Band-limited pulse families.
//!
//! Two families are modelled: the Nyquist sinc pulse
//! `g(t) = √(2W)·sinc(2Wt)` and the root-raised-cosine (RRC) pulse with
//! roll-off `β` and symbol time `T = 1/(2W)`. Both are real, even and have
//! unit energy before the optional amplitude gain is applied. An RRC pulse
//! with `β = 0` is the sinc pulse.
//!
//! Removable singularities (`t = 0` for both families, `|t| = T/(4β)` for
//! the RRC) are evaluated by a fourth-order Taylor expansion inside a
//! relative neighbourhood of `1e-4` around the singular point.
//!
//! [`pulse_inner_product`] integrates products of shifted pulses by adaptive
//! quadrature and is the oracle every closed form in the crate is tested
//! against.

use std::f64::consts::{FRAC_PI_2, PI};

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{FtnError, Result};
use crate::quadrature::{integrate_adaptive, AdaptiveOptions};

/// Distance from a removable singularity (in units of `T`) inside which the
/// Taylor expansion replaces the direct formula.
const SERIES_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    Sinc,
    RootRaisedCosine,
}

/// A pulse from one of the two supported families, optionally scaled by an
/// amplitude gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub kind: PulseKind,
    /// One-sided Nyquist bandwidth `W = 1/(2T)` in Hz. The RRC occupies
    /// `W(1+β)`; see [`PulseShape::occupied_bandwidth`].
    pub bandwidth: f64,
    /// Roll-off `β ∈ [0, 1]`; always 0 for the sinc.
    pub rolloff: f64,
    /// Symbol time `T = 1/(2W)` in seconds.
    pub symbol_time: f64,
    /// Amplitude gain applied on top of the unit-energy pulse.
    pub gain: f64,
}

impl PulseShape {
    pub fn sinc(bandwidth: f64) -> Result<Self> {
        FtnError::ensure_finite("bandwidth", bandwidth)?;
        if bandwidth <= 0.0 {
            return Err(FtnError::invalid(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(PulseShape {
            kind: PulseKind::Sinc,
            bandwidth,
            rolloff: 0.0,
            symbol_time: 0.5 / bandwidth,
            gain: 1.0,
        })
    }

    /// Root-raised-cosine pulse. `rolloff = 0` yields the sinc pulse of the
    /// same symbol time.
    pub fn rrc(rolloff: f64, symbol_time: f64) -> Result<Self> {
        check_rolloff(rolloff)?;
        check_symbol_time(symbol_time)?;
        if rolloff == 0.0 {
            return Self::sinc(0.5 / symbol_time);
        }
        Ok(PulseShape {
            kind: PulseKind::RootRaisedCosine,
            bandwidth: 0.5 / symbol_time,
            rolloff,
            symbol_time,
            gain: 1.0,
        })
    }

    pub fn with_gain(mut self, gain: f64) -> Self {
        self.gain = gain;
        self
    }

    pub fn energy(&self) -> f64 {
        self.gain * self.gain
    }

    /// Linear bandwidth actually occupied, `W(1+β)`.
    pub fn occupied_bandwidth(&self) -> f64 {
        self.bandwidth * (1.0 + self.rolloff)
    }

    /// Largest angular frequency where the spectrum is non-zero.
    pub fn angular_support(&self) -> f64 {
        (1.0 + self.rolloff) * PI / self.symbol_time
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = t / self.symbol_time;
        let unit = match self.kind {
            PulseKind::Sinc => normalized_sinc(x),
            PulseKind::RootRaisedCosine => rrc_normalized(x, self.rolloff),
        };
        self.gain * unit / self.symbol_time.sqrt()
    }

    /// Fourier transform `G(ω) = ∫ g(t) e^{-iωt} dt` (real, since `g` is even).
    pub fn spectrum(&self, omega: f64) -> f64 {
        self.gain * spectrum_unchecked(omega, self.rolloff, self.symbol_time)
    }

    /// Angular frequencies where the spectrum changes formula, positive side
    /// only, ascending.
    pub fn spectral_breakpoints(&self) -> Vec<f64> {
        let edge = PI / self.symbol_time;
        if self.rolloff == 0.0 {
            vec![edge]
        } else {
            vec![(1.0 - self.rolloff) * edge, (1.0 + self.rolloff) * edge]
        }
    }

    /// Closed-form autocorrelation `⟨g, g(· − lag)⟩`: the raised-cosine
    /// impulse response (a plain sinc when `β = 0`).
    pub fn autocorrelation(&self, lag: f64) -> f64 {
        self.energy() * raised_cosine(lag / self.symbol_time, self.rolloff)
    }
}

fn check_rolloff(beta: f64) -> Result<()> {
    FtnError::ensure_finite("roll-off", beta)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(FtnError::invalid(format!(
            "roll-off must lie in [0, 1], got {beta}"
        )));
    }
    Ok(())
}

fn check_symbol_time(t: f64) -> Result<()> {
    FtnError::ensure_finite("symbol time", t)?;
    if t <= 0.0 {
        return Err(FtnError::invalid(format!(
            "symbol time must be positive, got {t}"
        )));
    }
    Ok(())
}

/// `√(2W)·sinc(2Wt)` with `sinc(x) = sin(πx)/(πx)`.
pub fn eval_sinc(t: f64, bandwidth: f64) -> Result<f64> {
    FtnError::ensure_finite("t", t)?;
    Ok(PulseShape::sinc(bandwidth)?.eval(t))
}

/// Unit-energy root-raised-cosine pulse `g_β(t)`; `β = 0` gives
/// `sinc(t/T)/√T`.
pub fn eval_rrc(t: f64, beta: f64, symbol_time: f64) -> Result<f64> {
    FtnError::ensure_finite("t", t)?;
    Ok(PulseShape::rrc(beta, symbol_time)?.eval(t))
}

/// Spectrum of the unit-energy RRC pulse: flat `√T` up to `(1−β)π/T`, a
/// sine-shaped roll-off up to `(1+β)π/T`, zero beyond.
pub fn rrc_spectrum(omega: f64, beta: f64, symbol_time: f64) -> Result<f64> {
    FtnError::ensure_finite("omega", omega)?;
    check_rolloff(beta)?;
    check_symbol_time(symbol_time)?;
    Ok(spectrum_unchecked(omega, beta, symbol_time))
}

fn spectrum_unchecked(omega: f64, beta: f64, t: f64) -> f64 {
    let w = omega.abs();
    let edge = PI / t;
    if w <= (1.0 - beta) * edge {
        t.sqrt()
    } else if w <= (1.0 + beta) * edge {
        let s = (t / (2.0 * beta) * (w - edge)).sin();
        (0.5 * t).sqrt() * (1.0 - s).max(0.0).sqrt()
    } else {
        0.0
    }
}

/// `sin(πx)/(πx)`.
pub fn normalized_sinc(x: f64) -> f64 {
    if x.abs() < SERIES_RADIUS {
        let y = (PI * x).powi(2);
        1.0 - y / 6.0 + y * y / 120.0
    } else {
        sin_pi(x) / (PI * x)
    }
}

/// `sin(πx)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    // x mod 2 is exact; reflect into [-1/2, 1/2] where π·r loses nothing.
    let r = x % 2.0;
    let r = if r > 1.0 {
        r - 2.0
    } else if r < -1.0 {
        r + 2.0
    } else {
        r
    };
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// `√T·g_β(xT)`: the RRC pulse in units where `T = 1`.
fn rrc_normalized(x: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return normalized_sinc(x);
    }
    let ax = x.abs();
    let x_sing = 0.25 / beta;
    if ax < SERIES_RADIUS {
        rrc_series(0.0, ax, beta)
    } else if (ax - x_sing).abs() < SERIES_RADIUS {
        rrc_series(x_sing, ax - x_sing, beta)
    } else {
        let num = ((1.0 - beta) * PI * ax).sin() + 4.0 * beta * ax * ((1.0 + beta) * PI * ax).cos();
        let den = PI * ax * (1.0 - (4.0 * beta * ax).powi(2));
        num / den
    }
}

/// Fourth-order Taylor expansion of `N(x)/D(x)` about a common simple zero
/// `x_s` of numerator `N(x) = sin((1−β)πx) + 4βx·cos((1+β)πx)` and
/// denominator `D(x) = πx(1 − 16β²x²)`, evaluated at offset `u`.
fn rrc_series(x_s: f64, u: f64, beta: f64) -> f64 {
    let a = (1.0 - beta) * PI;
    let b = (1.0 + beta) * PI;
    // Taylor coefficients N^(k)(x_s)/k!, k = 1..=5 (N(x_s) = 0).
    let mut num = [0.0; 5];
    let mut fact = 1.0;
    for k in 1..=5usize {
        fact *= k as f64;
        let kf = k as f64;
        let dsin = a.powi(k as i32) * (a * x_s + kf * FRAC_PI_2).sin();
        let dxcos = x_s * b.powi(k as i32) * (b * x_s + kf * FRAC_PI_2).cos()
            + kf * b.powi(k as i32 - 1) * (b * x_s + (kf - 1.0) * FRAC_PI_2).cos();
        num[k - 1] = (dsin + 4.0 * beta * dxcos) / fact;
    }
    // D(x) = πx − 16β²πx³ expanded about x_s, constant term dropped.
    let c = 16.0 * beta * beta * PI;
    let den = [PI - 3.0 * c * x_s * x_s, -3.0 * c * x_s, -c, 0.0, 0.0];
    // Series division q = num / den.
    let mut q = [0.0; 5];
    for k in 0..5 {
        let mut acc = num[k];
        for j in 1..=k {
            acc -= den[j] * q[k - j];
        }
        q[k] = acc / den[0];
    }
    q.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

/// Raised-cosine impulse response `sinc(x)·cos(πβx)/(1 − 4β²x²)` in units
/// of `T`. This is the autocorrelation of the unit-energy RRC pulse.
pub fn raised_cosine(x: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return normalized_sinc(x);
    }
    let y = 2.0 * beta * x.abs();
    let u = y - 1.0;
    let ratio = if u.abs() < SERIES_RADIUS {
        // cos(πy/2)/(1 − y²) = sin(πu/2)/(u(2+u)) near y = 1
        let v = FRAC_PI_2 * u;
        let v2 = v * v;
        FRAC_PI_2 * (1.0 - v2 / 6.0 + v2 * v2 / 120.0) / (2.0 + u)
    } else {
        (FRAC_PI_2 * y).cos() / (1.0 - y * y)
    };
    normalized_sinc(x) * ratio
}

/// A closed time interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        FtnError::ensure_finite("interval start", a)?;
        FtnError::ensure_finite("interval end", b)?;
        if !(a < b) {
            return Err(FtnError::invalid(format!(
                "interval needs a < b, got [{a}, {b}]"
            )));
        }
        Ok(Interval { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, t: f64) -> bool {
        self.a <= t && t <= self.b
    }
}

/// Uniform grid of pulse shifts `0, τ, 2τ, …` with `τ = ρT`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeShiftGrid {
    pub rho: f64,
    pub count: usize,
    pub step: f64,
}

impl TimeShiftGrid {
    pub fn new(rho: f64, count: usize, symbol_time: f64) -> Result<Self> {
        FtnError::ensure_finite("rho", rho)?;
        check_symbol_time(symbol_time)?;
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(FtnError::invalid(format!(
                "packing factor must lie in (0, 1], got {rho}"
            )));
        }
        if count == 0 {
            return Err(FtnError::invalid("grid needs at least one pulse"));
        }
        Ok(TimeShiftGrid {
            rho,
            count,
            step: rho * symbol_time,
        })
    }

    /// The FTN grid carrying as many pulses as fit `n` Nyquist slots:
    /// `m = ⌊n/ρ⌋`.
    pub fn from_nyquist(n: usize, rho: f64, symbol_time: f64) -> Result<Self> {
        FtnError::ensure_finite("rho", rho)?;
        if !(rho > 0.0) {
            return Err(FtnError::invalid(format!(
                "packing factor must be positive, got {rho}"
            )));
        }
        // A tiny slack keeps n/ρ from flooring below an exact integer.
        let m = ((n as f64 / rho) * (1.0 + 1e-12)).floor() as usize;
        Self::new(rho, m, symbol_time)
    }

    pub fn shift(&self, k: usize) -> f64 {
        self.step * k as f64
    }

    pub fn shifts(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|k| self.shift(k))
    }
}

/// Controls for [`pulse_inner_product_with`].
#[derive(Debug, Clone, Copy)]
pub struct InnerProductOptions {
    /// Half-width of the integration range, in symbol times, used when no
    /// window is given.
    pub truncation: f64,
    /// Absolute tolerance per quadrature panel.
    pub panel_tolerance: f64,
}

impl Default for InnerProductOptions {
    fn default() -> Self {
        InnerProductOptions {
            truncation: 500.0,
            panel_tolerance: 1e-10,
        }
    }
}

/// `∫_window g(t − τ₁) g(t − τ₂) dt`, or over all of ℝ when `window` is
/// `None`.
pub fn pulse_inner_product(
    p: &PulseShape,
    tau1: f64,
    tau2: f64,
    window: Option<Interval>,
) -> Result<f64> {
    pulse_inner_product_with(p, tau1, tau2, window, &InnerProductOptions::default())
}

pub fn pulse_inner_product_with(
    p: &PulseShape,
    tau1: f64,
    tau2: f64,
    window: Option<Interval>,
    opts: &InnerProductOptions,
) -> Result<f64> {
    FtnError::ensure_finite("tau1", tau1)?;
    FtnError::ensure_finite("tau2", tau2)?;
    let t = p.symbol_time;
    let qopts = AdaptiveOptions {
        panel_tolerance: opts.panel_tolerance,
        initial_panel: 0.5 * t / (1.0 + p.rolloff),
        ..Default::default()
    };
    let integrand = |s: f64| p.eval(s - tau1) * p.eval(s - tau2);

    if let Some(w) = window {
        return Ok(integrate_adaptive(integrand, w.a, w.b, &qopts)?.value);
    }

    let centre = 0.5 * (tau1 + tau2);
    let half = opts.truncation * t;
    if half <= (tau1 - tau2).abs() {
        return Err(FtnError::invalid(
            "truncation range must exceed the separation of the two pulses",
        ));
    }
    let (lo, hi) = (centre - half, centre + half);
    let body = integrate_adaptive(integrand, lo, hi, &qopts)?.value;

    if p.rolloff == 0.0 {
        Ok(body + sinc_tail(p, tau1, tau2, hi) + sinc_tail(p, -tau1, -tau2, -lo))
    } else {
        // RRC pulses decay as 1/t²: the squared tail beyond distance d from
        // either pulse is below T³/(96π²β²d³) per side.
        let d = half - 0.5 * (tau1 - tau2).abs();
        let bound = 2.0 * p.energy() * t.powi(3) / (96.0 * PI * PI * p.rolloff.powi(2) * d.powi(3));
        debug!("rrc inner product truncated at ±{half}: tail bound {bound:.2e}");
        Ok(body)
    }
}

/// `∫_U^∞ g(t − a) g(t − b) dt` for sinc pulses, from the exact
/// non-oscillatory part plus a three-term asymptotic expansion of the
/// oscillatory part.
fn sinc_tail(p: &PulseShape, a: f64, b: f64, upper: f64) -> f64 {
    let kappa = 2.0 * PI * p.bandwidth;
    let scale = p.energy() * 2.0 * p.bandwidth / (2.0 * kappa * kappa);
    let (da, db) = (upper - a, upper - b);
    let smooth = if (a - b).abs() < 1e-12 * upper.abs().max(1.0) {
        1.0 / da
    } else {
        (db / da).ln() / (a - b)
    };
    let omega = 2.0 * kappa;
    let theta = omega * upper - kappa * (a + b);
    let psi = 1.0 / (da * db);
    let s = 1.0 / da + 1.0 / db;
    let dpsi = -psi * s;
    let ddpsi = psi * (s * s + 1.0 / (da * da) + 1.0 / (db * db));
    let oscillating = -theta.sin() * psi / omega - theta.cos() * dpsi / omega.powi(2)
        + theta.sin() * ddpsi / omega.powi(3);
    scale * ((kappa * (a - b)).cos() * smooth - oscillating)
}
