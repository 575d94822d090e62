//! Time localization of FTN signals.
//!
//! A signal `X(t) = Σ A_k g(t − τ_k)` has energy `AᵀHA` and energy
//! `AᵀH(Ω)A` inside an interval `Ω`, where `H(Ω)` is the Gramian with the
//! integrals restricted to `Ω`. Everything here is phrased through those two
//! matrices: the concentration ratio, the worst-case leakage (a generalized
//! eigenproblem), least-squares approximation of a band-limited target and
//! the effective pulse seen after `H^{−1/2}` precoding.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FtnError, Result};
use crate::export::csv_writer;
use crate::pulse::PulseShape;
use crate::quadrature::CompositeRule;
use crate::toeplitz::{inverse_sqrt_exact, SpectralDecomposition, ToeplitzGramian};

pub use crate::pulse::{Interval, TimeShiftGrid};

/// Relative eigenvalue floor below which `H` is treated as singular in the
/// generalized eigenproblem.
pub const LOCALIZATION_RCOND: f64 = 1e-12;

/// Relative pivot floor for the least-squares QR factorization.
pub const LEAST_SQUARES_RCOND: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub interval: Interval,
    /// Fraction of the signal's energy inside `interval`.
    pub concentration: f64,
    /// `1 − concentration`.
    pub mu: f64,
    /// Largest eigenvalue of `I − H⁻¹H(Ω)`: the leakage of the worst signal.
    pub worst_case_outside: f64,
}

/// Quadrature grid on `omega` with panels at most `T/(2(1+β))` wide.
fn window_rule(p: &PulseShape, omega: Interval) -> Result<CompositeRule> {
    CompositeRule::new(omega.a, omega.b, 0.5 * p.symbol_time / (1.0 + p.rolloff))
}

/// Rows `√w_i·g(t_i − τ_k)`, one per pulse.
fn weighted_samples(grid: &TimeShiftGrid, p: &PulseShape, rule: &CompositeRule) -> DMatrix<f64> {
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    DMatrix::from_fn(grid.count, rule.len(), |k, i| {
        sw[i] * p.eval(rule.nodes[i] - grid.shift(k))
    })
}

/// `H(Ω)_{kℓ} = ∫_Ω g(t − τ_k) g(t − τ_ℓ) dt`, all entries from one shared
/// composite Gauss–Legendre grid.
pub fn windowed_gramian(
    grid: &TimeShiftGrid,
    p: &PulseShape,
    omega: Interval,
) -> Result<DMatrix<f64>> {
    let rule = window_rule(p, omega)?;
    let s = weighted_samples(grid, p, &rule);
    let h = &s * s.transpose();
    Ok((&h + h.transpose()) * 0.5)
}

/// The full Gramian of the grid, from the closed-form autocorrelation.
pub fn full_gramian(grid: &TimeShiftGrid, p: &PulseShape) -> Result<ToeplitzGramian> {
    ToeplitzGramian::from_pulse(p, grid.step, grid.count)
}

/// `∫_Ω X(t)² dt / ‖X‖²` for `X(t) = Σ A_k g(t − τ_k)`.
pub fn concentration_ratio(
    coeffs: &[f64],
    grid: &TimeShiftGrid,
    p: &PulseShape,
    omega: Interval,
) -> Result<f64> {
    if coeffs.len() != grid.count {
        return Err(FtnError::DimensionMismatch {
            expected: grid.count,
            got: coeffs.len(),
        });
    }
    let total = full_gramian(grid, p)?.quadratic_form(coeffs)?;
    if !(total > 0.0) {
        return Err(FtnError::invalid("signal has zero energy"));
    }
    // AᵀH(Ω)A = Σ_i w_i X(t_i)², without forming H(Ω).
    let rule = window_rule(p, omega)?;
    let inside: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(t, w)| {
            let x: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| a * p.eval(t - grid.shift(k)))
                .sum();
            w * x * x
        })
        .sum();
    Ok(inside / total)
}

/// Largest `λ` of `(H − H(Ω))v = λHv` with its eigenvector normalized to
/// `vᵀHv = 1`.
///
/// Solved as the symmetric problem `L⁻¹(H − H(Ω))L⁻ᵀ` with `H = LLᵀ`.
pub fn max_energy_outside(h: &DMatrix<f64>, h_omega: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(FtnError::invalid("Gramian must be square"));
    }
    if h_omega.nrows() != n || h_omega.ncols() != n {
        return Err(FtnError::DimensionMismatch {
            expected: n,
            got: h_omega.nrows(),
        });
    }
    let eig = SpectralDecomposition::new(h)?;
    let threshold = LOCALIZATION_RCOND * eig.max();
    if !(eig.min() > threshold) {
        return Err(FtnError::IllConditioned {
            min_eigenvalue: eig.min(),
            threshold,
            hint: Some(
                "the shifted pulses are numerically dependent; increase ρ or shorten the block"
                    .into(),
            ),
        });
    }
    let sym = (h + h.transpose()) * 0.5;
    let l = Cholesky::new(sym)
        .ok_or_else(|| FtnError::IllConditioned {
            min_eigenvalue: eig.min(),
            threshold,
            hint: Some("Cholesky factorization failed".into()),
        })?
        .unpack();
    let diff = h - h_omega;
    let left = l
        .solve_lower_triangular(&diff)
        .ok_or_else(|| FtnError::NumericFailure {
            what: "triangular solve".into(),
            error_estimate: f64::NAN,
        })?;
    let reduced =
        l.solve_lower_triangular(&left.transpose())
            .ok_or_else(|| FtnError::NumericFailure {
                what: "triangular solve".into(),
                error_estimate: f64::NAN,
            })?;
    let red = SpectralDecomposition::new(&reduced)?;
    let w = red.vectors.column(n - 1).into_owned();
    let v = l
        .transpose()
        .solve_upper_triangular(&w)
        .ok_or_else(|| FtnError::NumericFailure {
            what: "triangular solve".into(),
            error_estimate: f64::NAN,
        })?;
    Ok((red.max(), v))
}

/// `Ω_m = [−mT, (m + n − 1)T]`.
pub fn nested_interval(n: usize, m: usize, symbol_time: f64) -> Result<Interval> {
    Interval::new(
        -(m as f64) * symbol_time,
        (m + n) as f64 * symbol_time - symbol_time,
    )
}

/// Worst-case outside energy on the nested intervals `Ω_m` for a grid of
/// `⌊n/ρ⌋` pulses. Points are computed in parallel and returned in the
/// order of `m_values`.
pub fn outside_energy_sweep(
    grid: &TimeShiftGrid,
    p: &PulseShape,
    n: usize,
    m_values: &[usize],
) -> Result<Vec<SweepPoint>> {
    if m_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(FtnError::invalid("m values must be nondecreasing"));
    }
    let h = full_gramian(grid, p)?.to_dense();
    m_values
        .par_iter()
        .map(|&m| {
            let omega = nested_interval(n, m, p.symbol_time)?;
            let (lambda_max, _) = max_energy_outside(&h, &windowed_gramian(grid, p, omega)?)?;
            Ok(SweepPoint {
                rho: grid.rho,
                n,
                m,
                lambda_max,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub rho: f64,
    pub n: usize,
    pub m: usize,
    pub lambda_max: f64,
}

/// CSV with columns `rho, n, m, lambda_max`.
pub fn write_sweep_csv<W: Write>(w: W, points: &[SweepPoint]) -> Result<()> {
    let mut out = csv_writer(w);
    for p in points {
        out.serialize(p)?;
    }
    out.flush()?;
    Ok(())
}

/// Concentration, its complement and the worst-case leakage for one
/// signal on one interval.
pub fn localization_report(
    coeffs: &[f64],
    grid: &TimeShiftGrid,
    p: &PulseShape,
    omega: Interval,
) -> Result<LocalizationReport> {
    let concentration = concentration_ratio(coeffs, grid, p, omega)?;
    let h = full_gramian(grid, p)?.to_dense();
    let (worst_case_outside, _) = max_energy_outside(&h, &windowed_gramian(grid, p, omega)?)?;
    Ok(LocalizationReport {
        interval: omega,
        concentration,
        mu: 1.0 - concentration,
        worst_case_outside,
    })
}

/// A band-limited approximation target described by its spectrum.
pub trait BandLimited: Sync {
    /// `X(ω) = ∫ x(t) e^{−iωt} dt`.
    fn spectrum(&self, omega: f64) -> Complex64;
    /// Angular frequencies on `[0, ∞)` where the spectrum changes formula;
    /// the last one bounds the support.
    fn breakpoints(&self) -> Vec<f64>;
    fn eval(&self, t: f64) -> f64;
}

/// `amplitude·g(t − delay)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedPulse {
    pub pulse: PulseShape,
    pub delay: f64,
    pub amplitude: f64,
}

impl ShiftedPulse {
    pub fn new(pulse: PulseShape, delay: f64) -> Self {
        ShiftedPulse {
            pulse,
            delay,
            amplitude: 1.0,
        }
    }
}

impl BandLimited for ShiftedPulse {
    fn spectrum(&self, omega: f64) -> Complex64 {
        Complex64::from_polar(
            self.amplitude * self.pulse.spectrum(omega),
            -omega * self.delay,
        )
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.pulse.spectral_breakpoints()
    }

    fn eval(&self, t: f64) -> f64 {
        self.amplitude * self.pulse.eval(t - self.delay)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresFit {
    pub coeffs: Vec<f64>,
    /// `‖target − Σ A_k h_k‖₂`.
    pub residual: f64,
    pub target_norm: f64,
    /// Inner products `b_k = ⟨target, h_k⟩`.
    pub projections: Vec<f64>,
}

impl LeastSquaresFit {
    pub fn relative_error(&self) -> f64 {
        self.residual / self.target_norm
    }

    /// `‖target‖² − bᵀA`, the residual energy expressed through the normal
    /// equations.
    pub fn residual_energy(&self) -> f64 {
        self.target_norm.powi(2)
            - self
                .projections
                .iter()
                .zip(&self.coeffs)
                .map(|(b, a)| b * a)
                .sum::<f64>()
    }

    /// Samples of the approximation `Σ A_k g(t − τ_k)`.
    pub fn evaluate(&self, grid: &TimeShiftGrid, p: &PulseShape, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * p.eval(t - grid.shift(k)))
            .sum()
    }
}

/// Gauss–Legendre nodes on `[−Ω, Ω]` with breaks at `±edges` and panels no
/// wider than `max_panel`.
fn frequency_rule(mut edges: Vec<f64>, max_panel: f64) -> CompositeRule {
    edges.retain(|e| *e > 0.0);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut breaks: Vec<f64> = edges.iter().rev().map(|e| -e).collect();
    breaks.push(0.0);
    breaks.extend(edges.iter().copied());
    let mut refined = vec![breaks[0]];
    for pair in breaks.windows(2) {
        let pieces = ((pair[1] - pair[0]) / max_panel).ceil().max(1.0) as usize;
        for i in 1..=pieces {
            refined.push(pair[0] + (pair[1] - pair[0]) * i as f64 / pieces as f64);
        }
    }
    CompositeRule::with_breakpoints(&refined)
}

/// Best `L₂(ℝ)` approximation of `target` by the shifted pulses of `grid`.
///
/// The problem is posed in the frequency domain (Parseval) and solved by
/// Householder QR on the real and imaginary parts, which stays accurate
/// where the normal equations `HA = b` have lost all precision.
pub fn ftn_least_squares(
    target: &dyn BandLimited,
    grid: &TimeShiftGrid,
    p: &PulseShape,
) -> Result<LeastSquaresFit> {
    let mut edges = p.spectral_breakpoints();
    edges.extend(target.breakpoints());
    let support = edges.iter().copied().fold(0.0, f64::max);
    let last_shift = grid.shift(grid.count - 1);
    // Keep each panel under about one period of the fastest phase term.
    let reach = (last_shift.abs() + 1.0).max(target_reach(target, support)) + p.symbol_time;
    let rule = frequency_rule(edges, PI / reach);

    let nodes = rule.len();
    let cols = grid.count;
    let mut phi = DMatrix::<f64>::zeros(2 * nodes, cols);
    let mut rhs = DVector::<f64>::zeros(2 * nodes);
    for (i, (&w, &wt)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let s = (wt / (2.0 * PI)).sqrt();
        let g = p.spectrum(w);
        for k in 0..cols {
            let e = Complex64::from_polar(s * g, -w * grid.shift(k));
            phi[(2 * i, k)] = e.re;
            phi[(2 * i + 1, k)] = e.im;
        }
        let t = target.spectrum(w) * s;
        rhs[2 * i] = t.re;
        rhs[2 * i + 1] = t.im;
    }

    let qr = phi.clone().qr();
    let r = qr.r();
    let pivots: Vec<f64> = r.diagonal().iter().map(|v| v.abs()).collect();
    let largest = pivots.iter().copied().fold(0.0, f64::max);
    let smallest = pivots.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = LEAST_SQUARES_RCOND * largest;
    if !(smallest > threshold) {
        return Err(FtnError::IllConditioned {
            // Singular values of Φ are square roots of the eigenvalues of H.
            min_eigenvalue: smallest * smallest,
            threshold: threshold * threshold,
            hint: Some("basis pulses are numerically dependent; increase ρ".into()),
        });
    }
    let qtb = qr.q().transpose() * &rhs;
    let a = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| FtnError::NumericFailure {
            what: "least-squares back substitution".into(),
            error_estimate: f64::NAN,
        })?;
    let residual = (&phi * &a - &rhs).norm();
    let projections = (phi.transpose() * &rhs).as_slice().to_vec();
    Ok(LeastSquaresFit {
        coeffs: a.as_slice().to_vec(),
        residual,
        target_norm: rhs.norm(),
        projections,
    })
}

/// Rough time extent of the target, used only to size frequency panels:
/// the largest group delay on a coarse grid, read off the phase slope.
fn target_reach(target: &dyn BandLimited, support: f64) -> f64 {
    let h = 1e-3 * support.max(1e-9);
    (1..64)
        .map(|i| {
            let w = support * i as f64 / 64.0;
            let a = target.spectrum(w - h);
            let b = target.spectrum(w + h);
            if a.norm() == 0.0 || b.norm() == 0.0 {
                return 0.0;
            }
            ((b / a).arg() / (2.0 * h)).abs()
        })
        .fold(0.0, f64::max)
}

/// `ξ_ℓ(t) = Σ_k [H^{−1/2}]_{ℓk} g(t − kT′)` for `k, ℓ ∈ {−n, …, n}`,
/// sampled at `t_samples`.
pub fn effective_pulse(
    n: usize,
    ell: isize,
    p: &PulseShape,
    t_prime: f64,
    t_samples: &[f64],
) -> Result<Vec<f64>> {
    let row = effective_row(n, ell, p, t_prime)?;
    Ok(t_samples
        .iter()
        .map(|t| {
            row.iter()
                .enumerate()
                .map(|(j, c)| c * p.eval(t - (j as f64 - n as f64) * t_prime))
                .sum()
        })
        .collect())
}

/// Row `ℓ` of `H^{−1/2}` for the `2n+1` pulses `g(t − kT′)`, `|k| ≤ n`.
fn effective_row(n: usize, ell: isize, p: &PulseShape, t_prime: f64) -> Result<Vec<f64>> {
    FtnError::ensure_finite("T'", t_prime)?;
    if !(t_prime > 0.0) {
        return Err(FtnError::invalid("T' must be positive"));
    }
    if ell.unsigned_abs() > n {
        return Err(FtnError::invalid(format!("index {ell} outside -{n}..={n}")));
    }
    let size = 2 * n + 1;
    let h = ToeplitzGramian::from_pulse(p, t_prime, size)?;
    let k = inverse_sqrt_exact(&h, None)?.to_dense();
    let r = (n as isize + ell) as usize;
    Ok(k.row(r).iter().copied().collect())
}

/// Unit-energy sinc of bandwidth `1/(2T′)` delayed by `ℓT′`: the limit of
/// the effective pulse.
pub fn reference_pulse(t: f64, ell: isize, t_prime: f64) -> f64 {
    crate::pulse::normalized_sinc(t / t_prime - ell as f64) / t_prime.sqrt()
}

/// `‖ξ_ℓ − ξ_ref‖₂`, computed in the frequency domain against the flat
/// spectrum `√T′·e^{−iωℓT′}` on `|ω| ≤ π/T′`.
pub fn effective_pulse_distance(n: usize, ell: isize, p: &PulseShape, t_prime: f64) -> Result<f64> {
    let row = effective_row(n, ell, p, t_prime)?;
    let edge = PI / t_prime;
    let mut edges = p.spectral_breakpoints();
    edges.push(edge);
    let rule = frequency_rule(edges, PI / ((2 * n + 2) as f64 * t_prime));
    let sq: f64 = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(&w, &wt)| {
            let sum: Complex64 = row
                .iter()
                .enumerate()
                .map(|(j, c)| Complex64::from_polar(*c, -w * (j as f64 - n as f64) * t_prime))
                .sum();
            let xi = sum * p.spectrum(w);
            let reference = if w.abs() <= edge {
                Complex64::from_polar(t_prime.sqrt(), -w * ell as f64 * t_prime)
            } else {
                Complex64::new(0.0, 0.0)
            };
            wt * (xi - reference).norm_sqr()
        })
        .sum();
    Ok((sq / (2.0 * PI)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::pulse_inner_product;
    use approx::assert_abs_diff_eq;

    fn sinc() -> PulseShape {
        PulseShape::sinc(0.5).unwrap()
    }

    #[test]
    fn single_pulse_fully_concentrated() {
        let grid = TimeShiftGrid::new(1.0, 1, 1.0).unwrap();
        let r = concentration_ratio(
            &[1.0],
            &grid,
            &sinc(),
            Interval::new(-20000.0, 20000.0).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-4);
        let rrc = PulseShape::rrc(0.22, 1.0).unwrap();
        let r = concentration_ratio(&[1.0], &grid, &rrc, Interval::new(-300.0, 300.0).unwrap())
            .unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn zero_signal_rejected() {
        let grid = TimeShiftGrid::new(0.9, 3, 1.0).unwrap();
        let omega = Interval::new(0.0, 1.0).unwrap();
        assert!(matches!(
            concentration_ratio(&[0.0; 3], &grid, &sinc(), omega),
            Err(FtnError::InvalidArgument(_))
        ));
    }

    #[test]
    fn windowed_gramian_limits() {
        let p = PulseShape::rrc(0.22, 1.0).unwrap();
        let grid = TimeShiftGrid::new(0.9, 6, 1.0).unwrap();
        let wide = windowed_gramian(&grid, &p, Interval::new(-400.0, 405.0).unwrap()).unwrap();
        let full = full_gramian(&grid, &p).unwrap().to_dense();
        assert!((wide - &full).amax() < 1e-6);
        let tiny = windowed_gramian(&grid, &p, Interval::new(2.0, 2.0 + 1e-9).unwrap()).unwrap();
        assert!(tiny.amax() < 1e-8);
    }

    #[test]
    fn windowed_entries_match_adaptive_quadrature() {
        let p = sinc();
        let grid = TimeShiftGrid::from_nyquist(20, 0.81, 1.0).unwrap();
        let omega = nested_interval(20, 15, 1.0).unwrap();
        assert_eq!((omega.a, omega.b), (-15.0, 34.0));
        let hw = windowed_gramian(&grid, &p, omega).unwrap();
        for (k, l) in [(0, 0), (3, 7), (11, 23), (23, 23)] {
            let q = pulse_inner_product(&p, grid.shift(k), grid.shift(l), Some(omega)).unwrap();
            assert_abs_diff_eq!(hw[(k, l)], q, epsilon = 1e-8);
        }
    }

    #[test]
    fn windowed_gramian_is_loewner_bounded() {
        let p = sinc();
        let grid = TimeShiftGrid::from_nyquist(10, 0.9, 1.0).unwrap();
        let hw = windowed_gramian(&grid, &p, Interval::new(-2.0, 11.0).unwrap()).unwrap();
        let h = full_gramian(&grid, &p).unwrap().to_dense();
        assert!(SpectralDecomposition::new(&hw).unwrap().min() > -1e-9);
        assert!(SpectralDecomposition::new(&(h - hw)).unwrap().min() > -1e-9);
    }

    #[test]
    fn no_leakage_when_window_is_everything() {
        let h = full_gramian(&TimeShiftGrid::new(0.9, 8, 1.0).unwrap(), &sinc())
            .unwrap()
            .to_dense();
        let (lambda, _) = max_energy_outside(&h, &h).unwrap();
        assert_abs_diff_eq!(lambda, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn worst_case_vector_realizes_its_eigenvalue() {
        let p = sinc();
        let grid = TimeShiftGrid::from_nyquist(20, 0.81, 1.0).unwrap();
        let omega = nested_interval(20, 5, 1.0).unwrap();
        let h = full_gramian(&grid, &p).unwrap();
        let (lambda, v) =
            max_energy_outside(&h.to_dense(), &windowed_gramian(&grid, &p, omega).unwrap())
                .unwrap();
        assert_abs_diff_eq!(h.quadratic_form(v.as_slice()).unwrap(), 1.0, epsilon = 1e-8);
        let inside = concentration_ratio(v.as_slice(), &grid, &p, omega).unwrap();
        assert_abs_diff_eq!(1.0 - inside, lambda, epsilon = 1e-6);
        assert!((0.0..=1.0 + 1e-9).contains(&lambda));
    }

    #[test]
    fn sweep_is_monotone_and_ordered_in_rho() {
        let ms = [0, 5, 10, 15, 20, 30];
        let run = |rho: f64| {
            let grid = TimeShiftGrid::from_nyquist(20, rho, 1.0).unwrap();
            outside_energy_sweep(&grid, &sinc(), 20, &ms).unwrap()
        };
        let slow = run(0.81);
        let nyq = run(1.0);
        for pts in [&slow, &nyq] {
            assert!(pts
                .windows(2)
                .all(|w| w[1].lambda_max <= w[0].lambda_max + 1e-9));
        }
        assert!(slow[3].lambda_max > 0.5);
        assert_abs_diff_eq!(slow[3].lambda_max, 0.5154, epsilon = 5e-4);
        assert!(nyq
            .iter()
            .zip(&slow)
            .all(|(a, b)| a.lambda_max < b.lambda_max));
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &slow).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("rho,n,m,lambda_max\n0.81,20,0,"));
    }

    #[test]
    fn sweep_rejects_decreasing_m() {
        let grid = TimeShiftGrid::from_nyquist(4, 0.9, 1.0).unwrap();
        assert!(outside_energy_sweep(&grid, &sinc(), 4, &[3, 1]).is_err());
    }

    #[test]
    fn least_squares_reproduces_a_basis_member() {
        let p = sinc();
        let grid = TimeShiftGrid::new(0.5, 9, 1.0).unwrap();
        let fit = ftn_least_squares(&ShiftedPulse::new(p, grid.shift(0)), &grid, &p).unwrap();
        assert!(fit.relative_error() < 1e-10);
        assert_abs_diff_eq!(fit.coeffs[0], 1.0, epsilon = 1e-8);
        for a in &fit.coeffs[1..] {
            assert_abs_diff_eq!(*a, 0.0, epsilon = 1e-8);
        }
        assert!(fit.residual_energy() > -1e-9);
    }

    #[test]
    fn projections_are_inner_products() {
        let p = sinc();
        let grid = TimeShiftGrid::new(0.5, 9, 1.0).unwrap();
        let target = ShiftedPulse::new(p, 6.0);
        let fit = ftn_least_squares(&target, &grid, &p).unwrap();
        for k in [0, 4, 8] {
            // ⟨g(· − 6), g(· − τ_k)⟩ = sinc(6 − τ_k)
            let expected = crate::pulse::normalized_sinc(6.0 - grid.shift(k));
            assert_abs_diff_eq!(fit.projections[k], expected, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(fit.target_norm, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.relative_error(), 0.867_647_415_1, epsilon = 1e-6);
        let t = 2.0;
        let direct: f64 = fit
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * p.eval(t - grid.shift(k)))
            .sum();
        assert_abs_diff_eq!(fit.evaluate(&grid, &p, t), direct, epsilon = 1e-15);
    }

    #[test]
    fn effective_pulse_trivial_at_nyquist() {
        let p = sinc();
        let ts = [-3.3, -1.0, 0.0, 0.4, 2.5, 7.0];
        let xi = effective_pulse(4, 2, &p, 1.0, &ts).unwrap();
        for (v, t) in xi.iter().zip(ts) {
            assert_abs_diff_eq!(*v, p.eval(t - 2.0), epsilon = 1e-13);
            assert_abs_diff_eq!(*v, reference_pulse(t, 2, 1.0), epsilon = 1e-13);
        }
        assert!(effective_pulse_distance(4, 2, &p, 1.0).unwrap() < 1e-12);
        assert!(effective_pulse(4, 5, &p, 1.0, &ts).is_err());
    }

    #[test]
    fn effective_pulse_distance_matches_time_domain() {
        let beta = 0.22;
        let p = PulseShape::rrc(beta, 1.0).unwrap();
        let tp = 1.0 / (1.0 + beta);
        let n = 8;
        let d = effective_pulse_distance(n, 0, &p, tp).unwrap();
        assert_abs_diff_eq!(d, 0.15145, epsilon = 5e-5);
        // crude time-domain cross-check on a long window
        let rule = CompositeRule::new(-400.0, 400.0, 0.25).unwrap();
        let xi = effective_pulse(n, 0, &p, tp, &rule.nodes).unwrap();
        let sq: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .zip(&xi)
            .map(|((t, w), x)| w * (x - reference_pulse(*t, 0, tp)).powi(2))
            .sum();
        assert_abs_diff_eq!(sq.sqrt(), d, epsilon = 2e-3);
    }
}
