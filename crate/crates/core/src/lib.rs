//! Faster-than-Nyquist (FTN) signaling toolkit.
//!
//! Pulses `g(t − kρT)` packed closer than the Nyquist spacing `T` are no
//! longer orthogonal. Their Gramian `H` is a symmetric Toeplitz matrix whose
//! symbol is the folded pulse power spectrum. The crate builds these
//! Gramians, precodes with `H^{−1/2}` to turn the matched-filter channel
//! into a white one, measures how well FTN signals stay localized in time,
//! and evaluates the capacity formulas that go with the model.
//!
//! | module | contents |
//! |---|---|
//! | [`pulse`] | sinc and RRC pulses, inner-product oracle |
//! | [`toeplitz`] | Gramians, symbols, eigen-diagnostics, precoders |
//! | [`localization`] | concentration, worst-case leakage, least squares, effective pulses |
//! | [`channel`] | matched-filter AWGN simulation and BER |
//! | [`capacity`] | capacity formulas |
//! | [`quadrature`] | Gauss–Legendre rules |

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod error;
pub mod export;
pub mod localization;
pub mod pulse;
pub mod quadrature;
pub mod toeplitz;

pub use error::{FtnError, Result};
pub use pulse::{Interval, PulseKind, PulseShape, TimeShiftGrid};
pub use toeplitz::{
    build_rrc_gramian, build_sinc_gramian, AssociatedFunction, PrecoderMode, PrecodingOperator,
    ToeplitzGramian,
};
