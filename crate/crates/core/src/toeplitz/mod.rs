//! FTN Gramians as symmetric Toeplitz operators.
//!
//! A [`ToeplitzGramian`] stores the first row `c_0, …, c_{n−1}` of
//! `[H]_{kℓ} = c_{|k−ℓ|}` together with the symbol it was generated from,
//! when one is known in closed form. Dense materialization is only used for
//! eigen-decompositions, which are capped at [`MAX_DENSE_ORDER`].

mod precoder;
mod symbol;

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub use precoder::{
    asymptotic_toeplitz_defect, inverse_sqrt_circulant, inverse_sqrt_circulant_from_coefficients,
    inverse_sqrt_exact, inverse_sqrt_exact_from, PrecoderMode, PrecodingOperator,
};
pub use symbol::{folded_spectrum, rrc_associated_function, AssociatedFunction};

use crate::error::{FtnError, Result};
use crate::export::csv_writer;
use crate::pulse::PulseShape;

/// Largest order for which dense eigen-decompositions are offered.
pub const MAX_DENSE_ORDER: usize = 4096;

#[derive(Debug, Clone)]
pub struct ToeplitzGramian {
    coefficients: Vec<f64>,
    symbol: Option<AssociatedFunction>,
    pulse: Option<PulseShape>,
    shift: Option<f64>,
}

/// Sinc Gramian `c_k = sinc(ρk)` for unit-energy sinc pulses with `T = 1`.
pub fn build_sinc_gramian(rho: f64, m: usize) -> Result<ToeplitzGramian> {
    check_rho(rho)?;
    ToeplitzGramian::from_pulse(&PulseShape::sinc(0.5)?, rho, m)
}

/// RRC Gramian for the √ρ-scaled pulses `√ρ·g_β(t − kρT)` with `T = 1`:
/// `c_k = ρ·sinc(ρk)·cos(πβρk)/(1 − 4β²ρ²k²)`.
pub fn build_rrc_gramian(rho: f64, beta: f64, n: usize) -> Result<ToeplitzGramian> {
    check_rho(rho)?;
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(FtnError::invalid(format!(
            "beta must lie in (0, 1], got {beta}"
        )));
    }
    let pulse = PulseShape::rrc(beta, 1.0)?.with_gain(rho.sqrt());
    ToeplitzGramian::from_pulse(&pulse, rho, n)
}

fn check_rho(rho: f64) -> Result<()> {
    FtnError::ensure_finite("rho", rho)?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(FtnError::invalid(format!(
            "packing factor must lie in (0, 1], got {rho}"
        )));
    }
    Ok(())
}

impl ToeplitzGramian {
    /// Gramian of `p(t − kτ)`, `k = 0..n`, with closed-form coefficients and
    /// the associated symbol attached.
    pub fn from_pulse(p: &PulseShape, tau: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(FtnError::invalid("Gramian order must be at least 1"));
        }
        let symbol = AssociatedFunction::for_pulse(p, tau)?;
        Ok(ToeplitzGramian {
            coefficients: (0..n).map(|k| p.autocorrelation(k as f64 * tau)).collect(),
            symbol: Some(symbol),
            pulse: Some(*p),
            shift: Some(tau),
        })
    }

    /// A symmetric Toeplitz matrix with no known symbol.
    pub fn from_coefficients(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(FtnError::invalid("Gramian order must be at least 1"));
        }
        if let Some(bad) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(FtnError::invalid(format!("non-finite coefficient {bad}")));
        }
        Ok(ToeplitzGramian {
            coefficients,
            symbol: None,
            pulse: None,
            shift: None,
        })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn symbol(&self) -> Option<&AssociatedFunction> {
        self.symbol.as_ref()
    }

    /// The generating pulse, including the amplitude gain in force.
    pub fn pulse(&self) -> Option<&PulseShape> {
        self.pulse.as_ref()
    }

    pub fn shift(&self) -> Option<f64> {
        self.shift
    }

    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.coefficients[k.abs_diff(l)]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.order();
        DMatrix::from_fn(n, n, |k, l| self.entry(k, l))
    }

    /// `H·x` in `O(n²)` without materializing `H`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.order();
        if x.len() != n {
            return Err(FtnError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        Ok((0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(l, xl)| self.entry(k, l) * xl)
                    .sum()
            })
            .collect())
    }

    /// `xᵀ H x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        Ok(self.mul_vec(x)?.iter().zip(x).map(|(a, b)| a * b).sum())
    }

    pub fn spectral_decomposition(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::new(&self.to_dense())
    }

    /// Default threshold below which an eigenvalue counts as numerically
    /// zero: `1e-10·sup f`, or `1e-10·c_0` when no symbol is attached.
    pub fn default_tolerance(&self) -> f64 {
        let scale = self
            .symbol
            .map(|s| s.sup())
            .unwrap_or(self.coefficients[0].abs());
        1e-10 * scale
    }

    /// CSV with columns `k, c_k`.
    pub fn write_coefficients_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv_writer(w);
        out.write_record(["k", "c_k"])?;
        for (k, c) in self.coefficients.iter().enumerate() {
            out.write_record([k.to_string(), c.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    /// CSV with columns `z, f_z` on `samples` points of the grid
    /// `2πℓ/samples − π`.
    pub fn write_symbol_csv<W: Write>(&self, w: W, samples: usize) -> Result<()> {
        let symbol = self
            .symbol
            .ok_or_else(|| FtnError::invalid("Gramian has no attached symbol"))?;
        let mut out = csv_writer(w);
        out.write_record(["z", "f_z"])?;
        for l in 1..=samples {
            let z = 2.0 * std::f64::consts::PI * l as f64 / samples as f64 - std::f64::consts::PI;
            out.write_record([z.to_string(), symbol.eval(z).to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Eigen-decomposition `H = V Λ Vᵀ` of a symmetric matrix, eigenvalues in
/// ascending order.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(FtnError::invalid("matrix must be square"));
        }
        if n > MAX_DENSE_ORDER {
            return Err(FtnError::invalid(format!(
                "dense eigen-decomposition limited to order {MAX_DENSE_ORDER}, got {n}; use the circulant path"
            )));
        }
        let sym = (m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 100 * n.max(10)).ok_or_else(|| {
            FtnError::NumericFailure {
                what: format!("symmetric eigen-decomposition of order {n}"),
                error_estimate: f64::NAN,
            }
        })?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(SpectralDecomposition { values, vectors })
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V φ(Λ) Vᵀ`.
    pub fn apply_function(&self, phi: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |r, c| {
            self.vectors[(r, c)] * phi(self.values[c])
        });
        let m = &scaled * self.vectors.transpose();
        (&m + m.transpose()) * 0.5
    }
}

/// Ascending eigenvalues of the dense materialization.
pub fn eigenvalues(h: &ToeplitzGramian) -> Result<Vec<f64>> {
    let n = h.order();
    if n > MAX_DENSE_ORDER {
        return Err(FtnError::invalid(format!(
            "dense eigenvalues limited to order {MAX_DENSE_ORDER}, got {n}"
        )));
    }
    let eig =
        SymmetricEigen::try_new(h.to_dense(), f64::EPSILON, 100 * n.max(10)).ok_or_else(|| {
            FtnError::NumericFailure {
                what: format!("symmetric eigenvalues of order {n}"),
                error_estimate: f64::NAN,
            }
        })?;
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `(1/n) Σ_ℓ [F(λ_ℓ) − F(f(2πℓ/n − π))]`; tends to zero as `n` grows when
/// eigenvalues and symbol samples are equally distributed.
pub fn szego_distribution_gap(h: &ToeplitzGramian, test_fn: impl Fn(f64) -> f64) -> Result<f64> {
    let symbol = h
        .symbol()
        .ok_or_else(|| FtnError::invalid("distribution gap needs an attached symbol"))?;
    let lambdas = eigenvalues(h)?;
    let n = lambdas.len();
    let samples = symbol.grid_samples(n);
    Ok(lambdas
        .iter()
        .zip(&samples)
        .map(|(l, f)| test_fn(*l) - test_fn(*f))
        .sum::<f64>()
        / n as f64)
}
