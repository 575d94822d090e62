//! Matched-filter AWGN channel for precoded FTN blocks.
//!
//! A block of `m` samples `X` is precoded to `A = KX` with `K ≈ H^{−1/2}`,
//! sent through the matched-filter model `Y = HA + H^{1/2}V` with
//! `V ~ N(0, N0/2)` i.i.d., and decoded as `S = KY`. With the exact
//! precoder `S = X + V`: one independent scalar AWGN channel per sample.
//!
//! Noise is parameterized by `σ = 10^{−SNR/20}` and `N0 = 2σ²`, so each
//! decoded sample carries noise of variance `σ²`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::error::{FtnError, Result};
use crate::export::csv_writer;
use crate::pulse::PulseShape;
use crate::toeplitz::{inverse_sqrt_circulant, PrecoderMode, PrecodingOperator, ToeplitzGramian};

/// Identifier of the per-block random stream, recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64(seed ^ block_index)";

/// Two-sided 95% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// How the per-sample symbol energy relates to the configured `Es`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyConvention {
    /// Every sample carries `Es`, whatever `ρ`: the energy per block grows
    /// as `ρ` shrinks.
    PerSample,
    /// The transmit power of the `ρ = 1` system is kept: each of the `1/ρ`
    /// times more samples carries `ρEs`.
    ConstantPower,
}

impl EnergyConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnergyConvention::PerSample => "per-sample",
            EnergyConvention::ConstantPower => "constant-power",
        }
    }

    pub fn effective_energy(&self, es: f64, rho: f64) -> f64 {
        match self {
            EnergyConvention::PerSample => es,
            EnergyConvention::ConstantPower => rho * es,
        }
    }
}

/// Amplitude of the transmitted pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseNormalization {
    /// Unit-energy pulses; `c_0 = 1`.
    UnitEnergy,
    /// Pulses scaled by `√ρ`; `c_0 = ρ` and the RRC symbol peaks at 1.
    SqrtRho,
}

impl PulseNormalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            PulseNormalization::UnitEnergy => "unit-energy",
            PulseNormalization::SqrtRho => "sqrt-rho",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionConfig {
    pub rho: f64,
    /// Roll-off; 0 selects sinc pulses.
    pub beta: f64,
    /// One-sided Nyquist bandwidth `W` in Hz; `T = 1/(2W)`.
    pub bandwidth: f64,
    pub block_m: usize,
    /// Energy per sample of the `ρ = 1` reference system.
    pub es: f64,
    /// One-sided noise density; per-sample noise variance is `N0/2`.
    pub n0: f64,
    pub seed: u64,
    pub precoder_mode: PrecoderMode,
    pub energy_convention: EnergyConvention,
    pub pulse_normalization: PulseNormalization,
}

impl Default for TransmissionConfig {
    fn default() -> Self {
        TransmissionConfig {
            rho: 1.0,
            beta: 0.0,
            bandwidth: 0.5,
            block_m: 256,
            es: 1.0,
            n0: 2.0,
            seed: 0,
            precoder_mode: PrecoderMode::ExactEigen,
            energy_convention: EnergyConvention::PerSample,
            pulse_normalization: PulseNormalization::UnitEnergy,
        }
    }
}

impl TransmissionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho", self.rho),
            ("beta", self.beta),
            ("bandwidth", self.bandwidth),
            ("es", self.es),
            ("n0", self.n0),
        ] {
            FtnError::ensure_finite(name, v)?;
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(FtnError::invalid(format!(
                "rho must lie in (0, 1], got {}",
                self.rho
            )));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(FtnError::invalid(format!(
                "beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        if self.bandwidth <= 0.0 {
            return Err(FtnError::invalid("bandwidth must be positive"));
        }
        if self.block_m == 0 {
            return Err(FtnError::invalid("block_m must be at least 1"));
        }
        if self.es < 0.0 || self.n0 < 0.0 {
            return Err(FtnError::invalid("es and n0 must be non-negative"));
        }
        Ok(())
    }

    /// The transmit pulse with the configured amplitude normalization.
    pub fn pulse(&self) -> Result<PulseShape> {
        let t = 0.5 / self.bandwidth;
        let p = PulseShape::rrc(self.beta, t)?;
        Ok(match self.pulse_normalization {
            PulseNormalization::UnitEnergy => p,
            PulseNormalization::SqrtRho => p.with_gain(self.rho.sqrt()),
        })
    }

    pub fn gramian(&self) -> Result<ToeplitzGramian> {
        let p = self.pulse()?;
        ToeplitzGramian::from_pulse(&p, self.rho * p.symbol_time, self.block_m)
    }

    pub fn effective_energy(&self) -> f64 {
        self.energy_convention.effective_energy(self.es, self.rho)
    }
}

/// `H`, `H^{1/2}` and the precoder, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct MatchedFilterChannel {
    gramian: ToeplitzGramian,
    dense: DMatrix<f64>,
    sqrt: DMatrix<f64>,
    precoder: PrecodingOperator,
}

impl MatchedFilterChannel {
    /// One eigen-decomposition of `H` yields both `H^{1/2}` and the exact
    /// `H^{−1/2}`; the circulant precoder is built from the symbol instead.
    pub fn new(gramian: ToeplitzGramian, mode: PrecoderMode) -> Result<Self> {
        let eig = gramian.spectral_decomposition()?;
        let precoder = match mode {
            PrecoderMode::ExactEigen => {
                crate::toeplitz::inverse_sqrt_exact_from(&gramian, &eig, None)?
            }
            PrecoderMode::CirculantFft => inverse_sqrt_circulant(&gramian, gramian.order())?,
        };
        Ok(MatchedFilterChannel {
            dense: gramian.to_dense(),
            sqrt: eig.apply_function(|l| l.max(0.0).sqrt()),
            gramian,
            precoder,
        })
    }

    pub fn from_config(config: &TransmissionConfig) -> Result<Self> {
        config.validate()?;
        Self::new(config.gramian()?, config.precoder_mode)
    }

    pub fn gramian(&self) -> &ToeplitzGramian {
        &self.gramian
    }

    pub fn precoder(&self) -> &PrecodingOperator {
        &self.precoder
    }

    pub fn sqrt_gramian(&self) -> &DMatrix<f64> {
        &self.sqrt
    }

    pub fn order(&self) -> usize {
        self.gramian.order()
    }
}

/// `A = K·X`.
pub fn precode(x: &[f64], k: &PrecodingOperator) -> Result<Vec<f64>> {
    k.apply(x)
}

/// `S = K·Y`.
pub fn decode(y: &[f64], k: &PrecodingOperator) -> Result<Vec<f64>> {
    k.apply(y)
}

/// `Y = HA + H^{1/2}V` with `V_k ~ N(0, N0/2)` drawn from `rng`.
pub fn channel_pass<R: Rng + ?Sized>(
    a: &[f64],
    channel: &MatchedFilterChannel,
    n0: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = channel.order();
    if a.len() != n {
        return Err(FtnError::DimensionMismatch {
            expected: n,
            got: a.len(),
        });
    }
    FtnError::ensure_finite("n0", n0)?;
    if n0 < 0.0 {
        return Err(FtnError::invalid("noise density must be non-negative"));
    }
    let mut y = &channel.dense * DVector::from_column_slice(a);
    if n0 > 0.0 {
        let sd = (0.5 * n0).sqrt();
        let v = DVector::from_fn(n, |_, _| sd * rng.sample::<f64, _>(StandardNormal));
        y += &channel.sqrt * v;
    }
    Ok(y.as_slice().to_vec())
}

/// `σ = 10^{−SNR/20}`. `+∞` dB maps to the noiseless channel.
pub fn snr_to_sigma(snr_db: f64) -> Result<f64> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(FtnError::invalid(format!(
            "SNR must be finite or +inf, got {snr_db}"
        )));
    }
    Ok(10f64.powf(-snr_db / 20.0))
}

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Uncoded BPSK bit-error rate `Q(√(2Es/N0))`.
pub fn bpsk_ber(es: f64, n0: f64) -> f64 {
    if n0 == 0.0 {
        return if es > 0.0 { 0.0 } else { 0.5 };
    }
    q_function((2.0 * es / n0).sqrt())
}

/// `(1 − rate)·payload_bits`, where `rate` is a block- or bit-error rate.
pub fn throughput(rate: f64, payload_bits: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(FtnError::invalid(format!(
            "error rate must lie in [0, 1], got {rate}"
        )));
    }
    Ok((1.0 - rate) * payload_bits as f64)
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if errors == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let high = if errors == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (low, high)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockResult {
    pub sent_bits: Vec<u8>,
    pub decoded_soft: Vec<f64>,
    pub decoded_bits: Vec<u8>,
    pub bit_errors: usize,
    pub block_error: bool,
}

/// BPSK `b ↦ (1 − 2b)√Es` over one block; decisions `S > 0 ↦ 0`,
/// `S ≤ 0 ↦ 1`.
pub fn simulate_block<R: Rng + ?Sized>(
    channel: &MatchedFilterChannel,
    es: f64,
    n0: f64,
    rng: &mut R,
) -> Result<BlockResult> {
    let m = channel.order();
    let amp = es.sqrt();
    let sent_bits: Vec<u8> = (0..m).map(|_| rng.random_range(0..2u8)).collect();
    let x: Vec<f64> = sent_bits
        .iter()
        .map(|b| (1.0 - 2.0 * *b as f64) * amp)
        .collect();
    let a = precode(&x, channel.precoder())?;
    let y = channel_pass(&a, channel, n0, rng)?;
    let decoded_soft = decode(&y, channel.precoder())?;
    let decoded_bits: Vec<u8> = decoded_soft.iter().map(|s| u8::from(*s <= 0.0)).collect();
    let bit_errors = sent_bits
        .iter()
        .zip(&decoded_bits)
        .filter(|(a, b)| a != b)
        .count();
    Ok(BlockResult {
        sent_bits,
        decoded_soft,
        decoded_bits,
        bit_errors,
        block_error: bit_errors > 0,
    })
}

/// The random stream of block `block_index`.
pub fn block_rng(seed: u64, block_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ block_index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub rho: f64,
    pub beta: f64,
    pub n: usize,
    pub precoder_mode: PrecoderMode,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ber_oracle: f64,
    pub blocks: u64,
    pub block_errors: u64,
    pub energy_convention: EnergyConvention,
    pub pulse_normalization: PulseNormalization,
}

impl BerPoint {
    pub fn bler(&self) -> f64 {
        self.block_errors as f64 / self.blocks as f64
    }

    /// Three binomial standard deviations of the oracle rate at this sample
    /// size.
    pub fn oracle_half_width(&self) -> f64 {
        3.0 * (self.ber_oracle * (1.0 - self.ber_oracle) / self.bits as f64).sqrt()
    }
}

/// Monte Carlo BER of hard-decision BPSK at each SNR.
///
/// Each point uses `⌈min_bits/m⌉` blocks. Block `b` of SNR point `i` draws
/// from [`block_rng`] with index `i·blocks + b`, so the result does not
/// depend on the thread count.
pub fn run_ber(
    config: &TransmissionConfig,
    snr_grid: &[f64],
    min_bits: u64,
) -> Result<Vec<BerPoint>> {
    let channel = MatchedFilterChannel::from_config(config)?;
    run_ber_on(&channel, config, snr_grid, min_bits)
}

/// [`run_ber`] with a prebuilt channel.
pub fn run_ber_on(
    channel: &MatchedFilterChannel,
    config: &TransmissionConfig,
    snr_grid: &[f64],
    min_bits: u64,
) -> Result<Vec<BerPoint>> {
    let m = channel.order() as u64;
    let blocks = min_bits.div_ceil(m).max(1);
    let es = config.effective_energy();
    snr_grid
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let sigma = snr_to_sigma(snr_db)?;
            let n0 = 2.0 * sigma * sigma;
            let (errors, block_errors) = (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let mut rng = block_rng(config.seed, i as u64 * blocks + b);
                    simulate_block(channel, es, n0, &mut rng)
                        .map(|r| (r.bit_errors as u64, u64::from(r.block_error)))
                })
                .try_reduce(|| (0, 0), |x, y| Ok((x.0 + y.0, x.1 + y.1)))?;
            let bits = blocks * m;
            let (ci_low, ci_high) = wilson_interval(errors, bits);
            Ok(BerPoint {
                snr_db,
                rho: config.rho,
                beta: config.beta,
                n: m as usize,
                precoder_mode: channel.precoder().mode(),
                bits,
                errors,
                ber: errors as f64 / bits as f64,
                ci_low,
                ci_high,
                ber_oracle: bpsk_ber(es, n0),
                blocks,
                block_errors,
                energy_convention: config.energy_convention,
                pulse_normalization: config.pulse_normalization,
            })
        })
        .collect()
}

/// CSV with columns `snr_db, rho, beta, n, precoder_mode, bits, errors,
/// ber, ci_low, ci_high`, followed by the oracle, block counts and the
/// energy and pulse conventions.
pub fn write_ber_csv<W: Write>(w: W, points: &[BerPoint]) -> Result<()> {
    let mut out = csv_writer(w);
    for p in points {
        out.serialize(p)?;
    }
    out.flush()?;
    Ok(())
}

/// Outcome of a test that decoded noise vectors have covariance `σ²I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhitenessReport {
    pub samples: usize,
    /// Largest `|Σ̂_kℓ − σ²δ_kℓ|` in units of its standard error.
    pub max_standard_errors: f64,
    /// Largest off-diagonal sample correlation in absolute value.
    pub max_abs_correlation: f64,
    /// Likelihood-ratio statistic for `Σ = σ²I` (known mean zero).
    pub chi_square: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
}

impl WhitenessReport {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value > level
    }
}

/// Tests zero-mean vectors for covariance `variance·I`.
///
/// Entry `(k, ℓ)` of the sample covariance has standard error
/// `variance·√((1 + δ_kℓ)/N)` under the null.
pub fn whiteness_test(vectors: &[Vec<f64>], variance: f64) -> Result<WhitenessReport> {
    let samples = vectors.len();
    let n = vectors
        .first()
        .map(|v| v.len())
        .ok_or_else(|| FtnError::invalid("no samples"))?;
    if !(variance > 0.0) {
        return Err(FtnError::invalid("variance must be positive"));
    }
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for v in vectors {
        if v.len() != n {
            return Err(FtnError::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let col = DVector::from_column_slice(v);
        cov += &col * col.transpose();
    }
    cov /= samples as f64;
    let sn = samples as f64;
    let mut max_se: f64 = 0.0;
    let mut max_corr: f64 = 0.0;
    for k in 0..n {
        for l in 0..n {
            let diag = k == l;
            let target = if diag { variance } else { 0.0 };
            let se = variance * ((1.0 + f64::from(u8::from(diag))) / sn).sqrt();
            max_se = max_se.max((cov[(k, l)] - target).abs() / se);
            if !diag {
                max_corr = max_corr.max((cov[(k, l)] / (cov[(k, k)] * cov[(l, l)]).sqrt()).abs());
            }
        }
    }
    let scaled = &cov / variance;
    let det = scaled
        .clone()
        .cholesky()
        .map(|c| c.determinant())
        .ok_or_else(|| FtnError::NumericFailure {
            what: "sample covariance is not positive definite".into(),
            error_estimate: f64::NAN,
        })?;
    let chi_square = sn * (scaled.trace() - det.ln() - n as f64);
    let dof = (n * (n + 1) / 2) as f64;
    let dist = ChiSquared::new(dof).map_err(|e| FtnError::invalid(e.to_string()))?;
    Ok(WhitenessReport {
        samples,
        max_standard_errors: max_se,
        max_abs_correlation: max_corr,
        chi_square,
        degrees_of_freedom: dof,
        p_value: 1.0 - dist.cdf(chi_square),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::build_rrc_gramian;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn rrc_channel(rho: f64, m: usize) -> MatchedFilterChannel {
        MatchedFilterChannel::new(
            build_rrc_gramian(rho, 0.22, m).unwrap(),
            PrecoderMode::ExactEigen,
        )
        .unwrap()
    }

    #[test]
    fn sigma_convention() {
        assert_eq!(snr_to_sigma(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(snr_to_sigma(20.0).unwrap(), 0.1, epsilon = 1e-16);
        assert_abs_diff_eq!(
            snr_to_sigma(20.0 * 2f64.log10()).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_eq!(snr_to_sigma(f64::INFINITY).unwrap(), 0.0);
        assert!(snr_to_sigma(f64::NAN).is_err());
    }

    #[test]
    fn q_function_values() {
        assert_abs_diff_eq!(q_function(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(q_function(1.0), 0.158_655_253_931_457_05, epsilon = 1e-10);
        assert_abs_diff_eq!(q_function(3.0), 1.349_898_031_630_094_6e-3, epsilon = 1e-13);
    }

    #[test]
    fn throughput_accounting() {
        assert_eq!(throughput(1.0, 123).unwrap(), 0.0);
        assert_eq!(throughput(0.0, 4000).unwrap(), 4000.0);
        assert_eq!(throughput(0.25, 4000).unwrap(), 3000.0);
        assert!(throughput(1.5, 4000).is_err());
        assert!(throughput(-0.1, 4000).is_err());
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        let (lo, hi) = wilson_interval(50, 1000);
        assert!(lo < 0.05 && 0.05 < hi);
        assert_abs_diff_eq!(lo, 0.038_15, epsilon = 1e-4);
        assert_abs_diff_eq!(hi, 0.065_33, epsilon = 1e-4);
        let (lo, hi) = wilson_interval(0, 1000);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.005);
    }

    #[test]
    fn noiseless_pass_is_h_times_a() {
        let ch = rrc_channel(0.9, 16);
        let a: Vec<f64> = (0..16).map(|k| (k as f64 * 0.7).sin()).collect();
        let y = channel_pass(&a, &ch, 0.0, &mut block_rng(1, 0)).unwrap();
        let expected = ch.gramian().mul_vec(&a).unwrap();
        for (u, v) in y.iter().zip(&expected) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-13);
        }
    }

    #[test]
    fn identity_channel_is_scalar_awgn() {
        let h = crate::toeplitz::build_sinc_gramian(1.0, 4).unwrap();
        let ch = MatchedFilterChannel::new(h, PrecoderMode::ExactEigen).unwrap();
        let a = [1.0, -1.0, 0.5, 2.0];
        let mut r1 = block_rng(9, 3);
        let mut r2 = block_rng(9, 3);
        let y = channel_pass(&a, &ch, 0.5, &mut r1).unwrap();
        for (k, yk) in y.iter().enumerate() {
            let v: f64 = 0.5 * r2.sample::<f64, _>(StandardNormal);
            assert_abs_diff_eq!(*yk, a[k] + v, epsilon = 1e-14);
        }
    }

    #[test]
    fn noiseless_roundtrip() {
        let ch = rrc_channel(0.9, 128);
        let x: Vec<f64> = (0..128)
            .map(|k| if k % 3 == 0 { 1.0 } else { -1.0 })
            .collect();
        let a = precode(&x, ch.precoder()).unwrap();
        let s = decode(
            &channel_pass(&a, &ch, 0.0, &mut block_rng(0, 0)).unwrap(),
            ch.precoder(),
        )
        .unwrap();
        for (u, v) in s.iter().zip(&x) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-8);
        }
        let energy = ch.gramian().quadratic_form(&a).unwrap();
        assert_abs_diff_eq!(energy, 128.0, epsilon = 1e-8 * 128.0);
    }

    #[test]
    fn received_noise_covariance_is_scaled_gramian() {
        let h = crate::toeplitz::build_sinc_gramian(0.9, 8).unwrap();
        let ch = MatchedFilterChannel::new(h, PrecoderMode::ExactEigen).unwrap();
        let n0 = 2.0;
        let draws = 100_000;
        let mut rng = block_rng(42, 0);
        let mut cov = DMatrix::<f64>::zeros(8, 8);
        for _ in 0..draws {
            let y = DVector::from_vec(channel_pass(&[0.0; 8], &ch, n0, &mut rng).unwrap());
            cov += &y * y.transpose();
        }
        cov /= draws as f64;
        let target = ch.gramian().to_dense() * (n0 / 2.0);
        for k in 0..8 {
            for l in 0..8 {
                // Var(Y_k Y_l) = Σ_kk Σ_ll + Σ_kl² for Gaussians
                let se = ((target[(k, k)] * target[(l, l)] + target[(k, l)].powi(2))
                    / draws as f64)
                    .sqrt();
                assert!(
                    (cov[(k, l)] - target[(k, l)]).abs() < 3.0 * se + 1e-12,
                    "({k},{l})"
                );
            }
        }
    }

    #[test]
    fn decoded_noise_is_white() {
        let ch = rrc_channel(0.9, 8);
        let n0 = 2.0;
        let mut rng = block_rng(5, 0);
        let noise: Vec<Vec<f64>> = (0..100_000)
            .map(|_| {
                decode(
                    &channel_pass(&[0.0; 8], &ch, n0, &mut rng).unwrap(),
                    ch.precoder(),
                )
                .unwrap()
            })
            .collect();
        let report = whiteness_test(&noise, n0 / 2.0).unwrap();
        assert!(report.max_standard_errors < 4.5, "{report:?}");
        assert!(report.max_abs_correlation < 0.05);
        assert!(report.passes(0.01), "{report:?}");
        assert_eq!(report.degrees_of_freedom, 36.0);
    }

    #[test]
    fn whiteness_test_rejects_correlated_noise() {
        let mut rng = block_rng(11, 0);
        let v: Vec<Vec<f64>> = (0..20_000)
            .map(|_| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                vec![a, 0.3 * a + b]
            })
            .collect();
        assert!(!whiteness_test(&v, 1.0).unwrap().passes(0.01));
    }

    #[test]
    fn energy_budget_over_random_blocks() {
        let ch = rrc_channel(0.9, 32);
        let mut rng = block_rng(3, 0);
        let blocks = 10_000;
        let mut sent = 0.0;
        let mut transmitted = 0.0;
        for _ in 0..blocks {
            let x: Vec<f64> = (0..32)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            sent += x.iter().map(|v| v * v).sum::<f64>();
            let a = precode(&x, ch.precoder()).unwrap();
            transmitted += ch.gramian().quadratic_form(&a).unwrap();
        }
        assert!(((transmitted - sent) / sent).abs() < 1e-8);
        let expected = 32.0 * blocks as f64;
        assert!(((sent - expected) / expected).abs() < 0.01);
    }

    #[test]
    fn noiseless_ber_is_zero_and_oracle_matches_q1() {
        let config = TransmissionConfig {
            rho: 0.9,
            beta: 0.22,
            block_m: 64,
            seed: 17,
            ..Default::default()
        };
        let pts = run_ber(&config, &[f64::INFINITY, 0.0], 20_000).unwrap();
        assert_eq!(pts[0].errors, 0);
        assert_eq!(pts[0].ber_oracle, 0.0);
        assert_abs_diff_eq!(pts[1].ber_oracle, 0.158_655_253_931_457_05, epsilon = 1e-10);
        assert!((pts[1].ber - pts[1].ber_oracle).abs() < pts[1].oracle_half_width());
        assert_eq!(pts[1].bits, 20_032);
    }

    #[test]
    fn run_ber_is_deterministic() {
        let config = TransmissionConfig {
            rho: 0.9,
            beta: 0.22,
            block_m: 32,
            seed: 99,
            ..Default::default()
        };
        let a = run_ber(&config, &[2.0, 4.0], 5_000).unwrap();
        let b = run_ber(&config, &[2.0, 4.0], 5_000).unwrap();
        assert_eq!(a, b);
        let ch = MatchedFilterChannel::from_config(&config).unwrap();
        let r1 = simulate_block(&ch, 1.0, 0.5, &mut block_rng(99, 7)).unwrap();
        let r2 = simulate_block(&ch, 1.0, 0.5, &mut block_rng(99, 7)).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.sent_bits.len(), 32);
        assert_eq!(
            r1.bit_errors,
            r1.sent_bits
                .iter()
                .zip(&r1.decoded_bits)
                .filter(|(a, b)| a != b)
                .count()
        );
    }

    #[test]
    fn ber_csv_header() {
        let config = TransmissionConfig {
            block_m: 8,
            ..Default::default()
        };
        let pts = run_ber(&config, &[0.0], 80).unwrap();
        let mut buf = Vec::new();
        write_ber_csv(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "snr_db,rho,beta,n,precoder_mode,bits,errors,ber,ci_low,ci_high,ber_oracle,blocks,block_errors,energy_convention,pulse_normalization\n"
        ));
        assert!(text.contains(",exact-eigen,"));
        assert!(text.contains(",per-sample,unit-energy\n"));
    }

    #[test]
    fn config_validation() {
        let bad = |f: fn(&mut TransmissionConfig)| {
            let mut c = TransmissionConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.rho = 0.0));
        assert!(bad(|c| c.rho = 1.5));
        assert!(bad(|c| c.beta = -0.1));
        assert!(bad(|c| c.block_m = 0));
        assert!(bad(|c| c.n0 = -1.0));
        assert!(bad(|c| c.es = f64::NAN));
        assert!(TransmissionConfig::default().validate().is_ok());
    }

    #[test]
    fn energy_conventions() {
        assert_eq!(EnergyConvention::PerSample.effective_energy(2.0, 0.5), 2.0);
        assert_eq!(
            EnergyConvention::ConstantPower.effective_energy(2.0, 0.5),
            1.0
        );
        let c = TransmissionConfig {
            rho: 0.81,
            pulse_normalization: PulseNormalization::SqrtRho,
            ..Default::default()
        };
        assert_abs_diff_eq!(
            c.gramian().unwrap().coefficients()[0],
            0.81,
            epsilon = 1e-15
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn decisions_follow_sign(seed in any::<u64>()) {
            let ch = MatchedFilterChannel::new(
                crate::toeplitz::build_sinc_gramian(1.0, 16).unwrap(),
                PrecoderMode::ExactEigen,
            ).unwrap();
            let r = simulate_block(&ch, 1.0, 1.0, &mut block_rng(seed, 0)).unwrap();
            for (s, b) in r.decoded_soft.iter().zip(&r.decoded_bits) {
                prop_assert_eq!(*b, u8::from(*s <= 0.0));
            }
            prop_assert_eq!(r.block_error, r.bit_errors > 0);
        }
    }
}
