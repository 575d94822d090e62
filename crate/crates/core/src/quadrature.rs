//! Gauss–Legendre quadrature.
//!
//! Two flavours are provided. [`integrate_adaptive`] bisects panels until a
//! 16-point rule and its two-halves refinement agree to the requested
//! absolute tolerance; it is the reference path for every closed-form check
//! in the crate. [`CompositeRule`] lays a fixed set of panels over an
//! interval and exposes the nodes and weights directly so that many
//! integrands sharing the same grid (all entries of a windowed Gramian, say)
//! can be evaluated in one matrix product.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{FtnError, Result};

/// Number of nodes of the base rule used on each panel.
pub const BASE_ORDER: usize = 16;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Computed by Newton iteration on the Legendre recurrence; accurate to a few
/// ulps for the orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th largest root.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

fn base_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(BASE_ORDER))
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = base_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(w)
        .map(|(xi, wi)| wi * f(mid + half * xi))
        .sum::<f64>()
        * half
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    /// Absolute tolerance applied per panel.
    pub panel_tolerance: f64,
    /// Width of the initial panels the interval is cut into before any
    /// refinement. Oscillatory integrands need this below one period.
    pub initial_panel: f64,
    pub max_depth: u32,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            panel_tolerance: 1e-10,
            initial_panel: 1.0,
            max_depth: 30,
        }
    }
}

/// Adaptive composite Gauss–Legendre integration of `f` over `[a, b]`.
///
/// Fails with [`FtnError::NumericFailure`] when some panel still disagrees
/// with its refinement after `max_depth` bisections.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> Result<Estimate> {
    FtnError::ensure_finite("lower limit", a)?;
    FtnError::ensure_finite("upper limit", b)?;
    if b < a {
        let est = integrate_adaptive(f, b, a, opts)?;
        return Ok(Estimate {
            value: -est.value,
            ..est
        });
    }
    if b == a {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    if !(opts.initial_panel > 0.0) || !(opts.panel_tolerance > 0.0) {
        return Err(FtnError::invalid(
            "quadrature panel width and tolerance must be positive",
        ));
    }

    let pieces = ((b - a) / opts.initial_panel).ceil().max(1.0) as usize;
    let step = (b - a) / pieces as f64;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut worst = 0.0f64;
    let mut failed = false;

    // Explicit stack: (left, right, coarse estimate, depth).
    let mut stack = Vec::with_capacity(64);
    for i in 0..pieces {
        let l = a + step * i as f64;
        let r = if i + 1 == pieces { b } else { l + step };
        stack.push((l, r, panel(&f, l, r), 0u32));
        evaluations += BASE_ORDER;
        while let Some((l, r, coarse, depth)) = stack.pop() {
            let m = 0.5 * (l + r);
            let left = panel(&f, l, m);
            let right = panel(&f, m, r);
            evaluations += 2 * BASE_ORDER;
            let fine = left + right;
            let diff = (fine - coarse).abs();
            if diff <= opts.panel_tolerance || !fine.is_finite() {
                value += fine;
                error += diff;
            } else if depth >= opts.max_depth {
                value += fine;
                error += diff;
                worst = worst.max(diff);
                failed = true;
            } else {
                stack.push((m, r, right, depth + 1));
                stack.push((l, m, left, depth + 1));
            }
        }
    }

    if failed || !value.is_finite() {
        return Err(FtnError::NumericFailure {
            what: format!("adaptive quadrature on [{a}, {b}]"),
            error_estimate: if value.is_finite() { worst } else { f64::NAN },
        });
    }
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// A fixed composite Gauss–Legendre rule: equal panels over `[a, b]`, each
/// carrying the 16-point base rule.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    /// Panels no wider than `max_panel`.
    pub fn new(a: f64, b: f64, max_panel: f64) -> Result<Self> {
        FtnError::ensure_finite("lower limit", a)?;
        FtnError::ensure_finite("upper limit", b)?;
        if !(b > a) {
            return Err(FtnError::invalid(format!(
                "composite rule needs a < b, got [{a}, {b}]"
            )));
        }
        if !(max_panel > 0.0) {
            return Err(FtnError::invalid("panel width must be positive"));
        }
        let pieces = ((b - a) / max_panel).ceil().max(1.0) as usize;
        Ok(Self::with_breakpoints(
            &(0..=pieces)
                .map(|i| a + (b - a) * i as f64 / pieces as f64)
                .collect::<Vec<_>>(),
        ))
    }

    /// One panel between each pair of consecutive breakpoints. Breakpoints
    /// must be sorted; zero-width panels are skipped.
    pub fn with_breakpoints(breaks: &[f64]) -> Self {
        let (x, w) = base_rule();
        let mut nodes = Vec::with_capacity(breaks.len() * BASE_ORDER);
        let mut weights = Vec::with_capacity(breaks.len() * BASE_ORDER);
        for pair in breaks.windows(2) {
            let (l, r) = (pair[0], pair[1]);
            if r <= l {
                continue;
            }
            let half = 0.5 * (r - l);
            let mid = 0.5 * (r + l);
            for (xi, wi) in x.iter().zip(w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        CompositeRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * f(*t))
            .sum()
    }
}
