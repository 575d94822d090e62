//! Realizations of `K = H^{−1/2}`.
//!
//! The exact path diagonalizes the dense Gramian. The fast path replaces
//! `H` by a circulant whose eigenvalues are the symbol sampled on the DFT
//! grid, so that `K` becomes a pointwise multiplier between two FFTs.
//! DFT bin `j` is mapped to `z_j = 2πj/n` wrapped into `(−π, π]`; for even
//! `n` this is exactly the grid `2πℓ/n − π`, `ℓ = 1..=n`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{SpectralDecomposition, ToeplitzGramian};
use crate::error::{FtnError, Result};
use crate::pulse::PulseKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecoderMode {
    ExactEigen,
    CirculantFft,
}

impl PrecoderMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PrecoderMode::ExactEigen => "exact-eigen",
            PrecoderMode::CirculantFft => "circulant-fft",
        }
    }
}

impl fmt::Display for PrecoderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone)]
enum Repr {
    Dense(DMatrix<f64>),
    Circulant {
        multipliers: Vec<f64>,
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
}

/// An immutable application of `H^{−1/2}`; cheap to share across threads.
#[derive(Clone)]
pub struct PrecodingOperator {
    mode: PrecoderMode,
    order: usize,
    min_eigenvalue: f64,
    repr: Repr,
}

impl fmt::Debug for PrecodingOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrecodingOperator")
            .field("mode", &self.mode)
            .field("order", &self.order)
            .field("min_eigenvalue", &self.min_eigenvalue)
            .finish_non_exhaustive()
    }
}

impl PrecodingOperator {
    pub fn identity(n: usize) -> Self {
        PrecodingOperator {
            mode: PrecoderMode::ExactEigen,
            order: n,
            min_eigenvalue: 1.0,
            repr: Repr::Dense(DMatrix::identity(n, n)),
        }
    }

    /// `V Λ^{−1/2} Vᵀ` from an existing decomposition, refusing eigenvalues
    /// below `tol`.
    pub fn from_decomposition(eig: &SpectralDecomposition, tol: f64) -> Result<Self> {
        let min = eig.min();
        if !(min >= tol) || min <= 0.0 {
            return Err(FtnError::IllConditioned {
                min_eigenvalue: min,
                threshold: tol,
                hint: None,
            });
        }
        Ok(PrecodingOperator {
            mode: PrecoderMode::ExactEigen,
            order: eig.values.len(),
            min_eigenvalue: min,
            repr: Repr::Dense(eig.apply_function(|l| 1.0 / l.sqrt())),
        })
    }

    fn circulant(eigenvalues: Vec<f64>) -> Self {
        let n = eigenvalues.len();
        let mut planner = FftPlanner::new();
        let min_eigenvalue = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        PrecodingOperator {
            mode: PrecoderMode::CirculantFft,
            order: n,
            min_eigenvalue,
            repr: Repr::Circulant {
                multipliers: eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect(),
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            },
        }
    }

    pub fn mode(&self) -> PrecoderMode {
        self.mode
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Smallest eigenvalue of `H` (exact mode) or of its circulant surrogate.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// DFT-domain multipliers `1/√f(z_j)` in natural FFT bin order; `None`
    /// for the exact operator.
    pub fn multipliers(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Circulant { multipliers, .. } => Some(multipliers),
            Repr::Dense(_) => None,
        }
    }

    /// `K·x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.order {
            return Err(FtnError::DimensionMismatch {
                expected: self.order,
                got: x.len(),
            });
        }
        Ok(match &self.repr {
            Repr::Dense(k) => (k * DVector::from_column_slice(x)).as_slice().to_vec(),
            Repr::Circulant {
                multipliers,
                forward,
                inverse,
            } => {
                let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
                forward.process(&mut buf);
                for (b, m) in buf.iter_mut().zip(multipliers) {
                    *b *= *m;
                }
                inverse.process(&mut buf);
                let scale = 1.0 / self.order as f64;
                buf.iter().map(|c| c.re * scale).collect()
            }
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.repr {
            Repr::Dense(k) => k.clone(),
            Repr::Circulant { .. } => {
                let n = self.order;
                let mut e0 = vec![0.0; n];
                e0[0] = 1.0;
                let col = self.apply(&e0).expect("order matches");
                DMatrix::from_fn(n, n, |r, c| col[(r + n - c) % n])
            }
        }
    }
}

fn conditioning_hint(h: &ToeplitzGramian) -> Option<String> {
    let p = h.pulse()?;
    let rho = h.shift()? / p.symbol_time;
    Some(match p.kind {
        PulseKind::RootRaisedCosine => format!(
            "(1+β)ρ = {:.4}; the symbol vanishes on a set of positive measure when (1+β)ρ < 1 \
             and at z = ±π when (1+β)ρ = 1, so increase ρ or β",
            (1.0 + p.rolloff) * rho
        ),
        PulseKind::Sinc => format!(
            "sinc pulses at ρ = {rho:.4} < 1 have a symbol that vanishes for |z| > ρπ; \
             use ρ = 1 or an RRC pulse with (1+β)ρ > 1"
        ),
    })
}

fn attach_hint(err: FtnError, h: &ToeplitzGramian) -> FtnError {
    match conditioning_hint(h) {
        Some(hint) => err.with_hint(hint),
        None => err,
    }
}

/// Exact `H^{−1/2}` through a symmetric eigen-decomposition.
///
/// `min_lambda_tol` defaults to `1e-10·sup f`.
pub fn inverse_sqrt_exact(
    h: &ToeplitzGramian,
    min_lambda_tol: Option<f64>,
) -> Result<PrecodingOperator> {
    inverse_sqrt_exact_from(h, &h.spectral_decomposition()?, min_lambda_tol)
}

/// [`inverse_sqrt_exact`] reusing a decomposition of `h` computed elsewhere.
pub fn inverse_sqrt_exact_from(
    h: &ToeplitzGramian,
    eig: &SpectralDecomposition,
    min_lambda_tol: Option<f64>,
) -> Result<PrecodingOperator> {
    let tol = min_lambda_tol.unwrap_or_else(|| h.default_tolerance());
    PrecodingOperator::from_decomposition(eig, tol).map_err(|e| attach_hint(e, h))
}

/// Circulant `H^{−1/2}` of order `n` built from the attached symbol.
pub fn inverse_sqrt_circulant(h: &ToeplitzGramian, n: usize) -> Result<PrecodingOperator> {
    if n == 0 {
        return Err(FtnError::invalid("operator order must be at least 1"));
    }
    let symbol = h
        .symbol()
        .ok_or_else(|| FtnError::invalid("circulant precoding needs an attached symbol"))?;
    if !(symbol.inf() > 0.0) {
        return Err(attach_hint(
            FtnError::IllConditioned {
                min_eigenvalue: symbol.inf(),
                threshold: 0.0,
                hint: None,
            },
            h,
        ));
    }
    let values = (0..n).map(|j| symbol.eval(dft_frequency(j, n))).collect();
    Ok(PrecodingOperator::circulant(values))
}

/// Circulant `H^{−1/2}` from the Strang wrap of the coefficient row: the
/// circulant's first column is `c_0, c_1, …, c_{⌊n/2⌋}, …, c_2, c_1`.
pub fn inverse_sqrt_circulant_from_coefficients(h: &ToeplitzGramian) -> Result<PrecodingOperator> {
    let n = h.order();
    let c = h.coefficients();
    let mut col: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(c[k.min(n - k)], 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut col);
    let values: Vec<f64> = col.iter().map(|v| v.re).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = h.default_tolerance();
    if !(min > tol) {
        return Err(attach_hint(
            FtnError::IllConditioned {
                min_eigenvalue: min,
                threshold: tol,
                hint: None,
            },
            h,
        ));
    }
    Ok(PrecodingOperator::circulant(values))
}

fn dft_frequency(j: usize, n: usize) -> f64 {
    let z = 2.0 * PI * j as f64 / n as f64;
    if z > PI {
        z - 2.0 * PI
    } else {
        z
    }
}

/// `(1/n)‖K − τ(K)‖_F²`, where `τ(K)` is the Toeplitz matrix whose diagonals
/// are the diagonal means of `K`.
pub fn asymptotic_toeplitz_defect(k: &PrecodingOperator) -> f64 {
    let m = k.to_dense();
    let n = m.nrows();
    let mut total = 0.0;
    for d in -(n as isize - 1)..=(n as isize - 1) {
        let entries: Vec<f64> = (0..n)
            .filter_map(|r| {
                let c = r as isize + d;
                (c >= 0 && (c as usize) < n).then(|| m[(r, c as usize)])
            })
            .collect();
        let mean = entries.iter().sum::<f64>() / entries.len() as f64;
        total += entries.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    }
    total / n as f64
}
