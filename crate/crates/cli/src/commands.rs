use std::io::Write;

use ftn_core::capacity::{
    naive_capacity_sweep, paradox_gap, precoded_capacity_sweep, write_capacity_csv,
};
use ftn_core::channel::{run_ber, write_ber_csv};
use ftn_core::export::{csv_writer, write_waveform_csv};
use ftn_core::localization::{
    concentration_ratio, effective_pulse, effective_pulse_distance, ftn_least_squares,
    full_gramian, max_energy_outside, nested_interval, outside_energy_sweep, reference_pulse,
    windowed_gramian, write_sweep_csv, ShiftedPulse, SweepPoint,
};
use ftn_core::toeplitz::{inverse_sqrt_exact_from, MAX_DENSE_ORDER};
use ftn_core::{Interval, PulseShape, TimeShiftGrid, ToeplitzGramian};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Outputs;

/// Relative `L₂` error the `ρ = 1/4` fit of a sinc delayed by six symbol
/// times must stay under.
pub const APPROX_THRESHOLD: f64 = 0.00841;

/// Claimed lower bound on the worst-case outside energy at `ρ = 0.81`,
/// `n = 20`, `m = 15`.
const SWEEP_CLAIM: f64 = 0.5;

fn report(pass: bool, text: impl std::fmt::Display) {
    println!("[{}] {text}", if pass { "PASS" } else { "FAIL" });
}

fn linspace(a: f64, b: f64, points: usize) -> Vec<f64> {
    let step = (b - a) / (points - 1) as f64;
    (0..points).map(|i| a + step * i as f64).collect()
}

/// Header row, then one row per sample across `columns`.
fn write_columns<W: Write>(w: W, header: &[String], columns: &[Vec<f64>]) -> ftn_core::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(header)?;
    let rows = columns.first().map_or(0, Vec::len);
    for i in 0..rows {
        out.write_record(columns.iter().map(|c| c[i].to_string()))?;
    }
    out.flush()?;
    Ok(())
}

fn superpose(coeffs: &[f64], grid: &TimeShiftGrid, p: &PulseShape, t: &[f64]) -> Vec<f64> {
    t.iter()
        .map(|&t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * p.eval(t - grid.shift(k)))
                .sum()
        })
        .collect()
}

pub fn gramian(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let t = cfg.symbol_time();
    let h = ToeplitzGramian::from_pulse(&cfg.scaled_pulse(cfg.rho)?, cfg.rho * t, cfg.n)?;
    out.csv("gramian_coefficients.csv", |w| h.write_coefficients_csv(w))?;
    out.csv("gramian_symbol.csv", |w| {
        h.write_symbol_csv(w, cfg.symbol_samples)
    })?;

    let symbol = *h.symbol().expect("pulse Gramians carry their symbol");
    println!(
        "n = {}, rho = {}, beta = {}, (1+beta)rho = {:.4}, symbol range [{:.6e}, {:.6e}]",
        cfg.n,
        cfg.rho,
        cfg.beta,
        (1.0 + cfg.beta) * cfg.rho,
        symbol.inf(),
        symbol.sup()
    );
    if cfg.n > MAX_DENSE_ORDER {
        println!("order above {MAX_DENSE_ORDER}: eigenvalue summary skipped");
        return Ok(());
    }

    let eig = h.spectral_decomposition()?;
    let lambdas: Vec<f64> = eig.values.iter().copied().collect();
    let mut samples = symbol.grid_samples(cfg.n);
    let gap = |f: fn(f64) -> f64| {
        lambdas
            .iter()
            .zip(&samples)
            .map(|(l, s)| f(*l) - f(*s))
            .sum::<f64>()
            / cfg.n as f64
    };
    let (gap_x, gap_x2) = (gap(|x| x), gap(|x| x * x));
    samples.sort_by(f64::total_cmp);

    out.csv("gramian_eigenvalues.csv", |w| {
        let index: Vec<f64> = (0..cfg.n).map(|i| i as f64).collect();
        write_columns(
            w,
            &["index".into(), "lambda".into(), "symbol_sample".into()],
            &[index, lambdas.clone(), samples.clone()],
        )
    })?;
    out.csv("gramian_summary.csv", |w| {
        let mut csv = csv_writer(w);
        csv.write_record([
            "n",
            "rho",
            "beta",
            "packing_product",
            "lambda_min",
            "lambda_max",
            "symbol_inf",
            "symbol_sup",
            "szego_gap_x",
            "szego_gap_x2",
        ])?;
        csv.write_record([
            cfg.n.to_string(),
            cfg.rho.to_string(),
            cfg.beta.to_string(),
            ((1.0 + cfg.beta) * cfg.rho).to_string(),
            eig.min().to_string(),
            eig.max().to_string(),
            symbol.inf().to_string(),
            symbol.sup().to_string(),
            gap_x.to_string(),
            gap_x2.to_string(),
        ])?;
        csv.flush()?;
        Ok(())
    })?;
    println!(
        "eigenvalues [{:.6e}, {:.6e}]; distribution gap F=x {gap_x:.3e}, F=x^2 {gap_x2:.3e}",
        eig.min(),
        eig.max()
    );

    let k = inverse_sqrt_exact_from(&h, &eig, None)?;
    println!(
        "H^(-1/2) available: smallest eigenvalue {:.6e} above tolerance {:.1e}",
        k.min_eigenvalue(),
        h.default_tolerance()
    );
    Ok(())
}

pub fn localize(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let t = cfg.symbol_time();
    let p = cfg.unit_pulse()?;

    let mut rows: Vec<Vec<SweepPoint>> = Vec::new();
    for &rho in &cfg.rho_values {
        let grid = TimeShiftGrid::from_nyquist(cfg.sweep_n, rho, t)?;
        rows.push(outside_energy_sweep(&grid, &p, cfg.sweep_n, &cfg.m_values)?);
    }
    let flat: Vec<SweepPoint> = rows.iter().flatten().copied().collect();
    out.csv("localize_sweep.csv", |w| write_sweep_csv(w, &flat))?;
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .map(|s| format!("m={} {:.4}", s.m, s.lambda_max))
            .collect();
        println!("rho = {}: {}", row[0].rho, cells.join(", "));
    }
    for s in &flat {
        if (s.rho - 0.81).abs() < 1e-12 && s.n == 20 && s.m == 15 {
            report(
                s.lambda_max > SWEEP_CLAIM,
                format!(
                    "worst-case outside energy at rho=0.81, n=20, m=15 is {:.4} > {SWEEP_CLAIM}",
                    s.lambda_max
                ),
            );
        }
    }
    if let Some(top) = cfg.rho_values.iter().position(|&r| r == 1.0) {
        if cfg.rho_values.len() > 1 {
            let smallest = (0..cfg.m_values.len()).all(|j| {
                rows.iter()
                    .enumerate()
                    .all(|(i, r)| i == top || r[j].lambda_max > rows[top][j].lambda_max)
            });
            report(
                smallest,
                "rho = 1 has the smallest worst-case outside energy for every m",
            );
        }
    }

    let grid = TimeShiftGrid::from_nyquist(cfg.sweep_n, cfg.rho, t)?;
    let omega = nested_interval(cfg.sweep_n, cfg.worst_case_m, t)?;
    let h = full_gramian(&grid, &p)?.to_dense();
    let (lambda, v) = max_energy_outside(&h, &windowed_gramian(&grid, &p, omega)?)?;
    let pad = omega.length();
    let ts = linspace(omega.a - pad, omega.b + pad, cfg.waveform_points);
    let wave = superpose(v.as_slice(), &grid, &p, &ts);
    out.csv("localize_worst_case.csv", |w| {
        write_waveform_csv(w, &ts, &wave)
    })?;
    println!(
        "worst-case signal at rho = {}, m = {}: {:.4} of its energy outside [{}, {}]",
        cfg.rho, cfg.worst_case_m, lambda, omega.a, omega.b
    );

    let m = cfg.alternating_m;
    let grid = TimeShiftGrid::new(cfg.rho, m, t)?;
    let step = grid.step;
    let alt: Vec<f64> = (0..m)
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let windows = [
        Interval::new(-step, step * m as f64)?,
        Interval::new(0.0, step * (m - 1) as f64)?,
    ];
    let mut conc = Vec::new();
    for omega in windows {
        conc.push(concentration_ratio(&alt, &grid, &p, omega)?);
    }
    out.csv("localize_alternating.csv", |w| {
        let mut csv = csv_writer(w);
        csv.write_record([
            "rho",
            "m",
            "interval_a",
            "interval_b",
            "concentration",
            "mu",
        ])?;
        for (omega, c) in windows.iter().zip(&conc) {
            csv.write_record([
                cfg.rho.to_string(),
                m.to_string(),
                omega.a.to_string(),
                omega.b.to_string(),
                c.to_string(),
                (1.0 - c).to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })?;
    let ts = linspace(-20.0 * t, step * m as f64 + 20.0 * t, cfg.waveform_points);
    let wave = superpose(&alt, &grid, &p, &ts);
    out.csv("localize_alternating_waveform.csv", |w| {
        write_waveform_csv(w, &ts, &wave)
    })?;
    println!(
        "alternating signs, rho = {}, m = {m}: concentration {:.4} on [-rho T, rho m T], {:.4} on [0, rho (m-1) T]",
        cfg.rho, conc[0], conc[1]
    );
    Ok(())
}

pub fn approx(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let t = cfg.symbol_time();
    let p = cfg.unit_pulse()?;
    let target = ShiftedPulse::new(p, cfg.target_delay * t);
    let lo = cfg.target_delay.min(0.0) - 4.0;
    let hi = cfg.target_delay.max(cfg.basis_span) + 4.0;
    let ts: Vec<f64> = linspace(lo * t, hi * t, cfg.waveform_points);

    let mut header = vec!["t".to_string(), "target".to_string()];
    let mut columns = vec![
        ts.clone(),
        ts.iter().map(|&x| p.eval(x - target.delay)).collect(),
    ];
    let mut fits = Vec::new();
    for &rho in &cfg.approx_rhos {
        let count = (cfg.basis_span / rho + 1e-9).floor() as usize + 1;
        let grid = TimeShiftGrid::new(rho, count, t)?;
        let fit = ftn_least_squares(&target, &grid, &p)?;
        header.push(format!("rho_{rho:.4}"));
        columns.push(ts.iter().map(|&x| fit.evaluate(&grid, &p, x)).collect());
        println!(
            "rho = {rho:.4}: {count} pulses, relative L2 error {:.6}",
            fit.relative_error()
        );
        fits.push((rho, count, fit));
    }
    out.csv("approx_summary.csv", |w| {
        let mut csv = csv_writer(w);
        csv.write_record(["rho", "pulses", "relative_error", "residual", "target_norm"])?;
        for (rho, count, fit) in &fits {
            csv.write_record([
                rho.to_string(),
                count.to_string(),
                fit.relative_error().to_string(),
                fit.residual.to_string(),
                fit.target_norm.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })?;
    out.csv("approx_waveforms.csv", |w| {
        write_columns(w, &header, &columns)
    })?;

    let pinned = cfg.beta == 0.0 && cfg.target_delay == 6.0 && cfg.basis_span == 4.0;
    for (rho, _, fit) in &fits {
        if pinned && (rho - 0.25).abs() < 1e-12 {
            report(
                fit.relative_error() < APPROX_THRESHOLD,
                format!(
                    "rho = 1/4 relative error {:.6} below {APPROX_THRESHOLD}",
                    fit.relative_error()
                ),
            );
        }
    }
    Ok(())
}

pub fn simulate(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let seed = cfg.seed.ok_or_else(|| {
        CliError::Config("simulate needs an explicit seed (--seed or seed = ...)".into())
    })?;
    let points = run_ber(&cfg.transmission(seed), &cfg.snr_db, cfg.min_bits)?;
    out.csv("simulate_ber.csv", |w| write_ber_csv(w, &points))?;
    for p in &points {
        let tol = (p.ci_high - p.ci_low) / 2.0 + p.oracle_half_width();
        let inside = (p.ber - p.ber_oracle).abs() <= tol;
        report(
            inside,
            format!(
                "snr {} dB: ber {:.4e} [{:.4e}, {:.4e}] vs Q-function {:.4e} ({} bits)",
                p.snr_db, p.ber, p.ci_low, p.ci_high, p.ber_oracle, p.bits
            ),
        );
    }
    Ok(())
}

pub fn capacity(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    out.note(
        "the naive FTN capacity rests on an average-power bound that assumes the FTN signal \
         stays localized in time; localized signals do not exist for rho < 1, so the values \
         overstate what the channel supports",
    );
    let rhos = linspace(cfg.capacity_rho_min, 1.0, cfg.capacity_points);
    let naive = naive_capacity_sweep(&rhos, cfg.snr_ratio)?;
    out.csv("capacity_naive.csv", |w| write_capacity_csv(w, &naive))?;
    let precoded = precoded_capacity_sweep(&cfg.beta_values, cfg.snr_ratio)?;
    out.csv("capacity_precoded.csv", |w| {
        write_capacity_csv(w, &precoded)
    })?;

    let decreasing = naive.windows(2).all(|w| w[1].capacity < w[0].capacity);
    report(
        decreasing,
        format!(
            "naive capacity strictly decreasing on {} points of rho in [{}, 1]",
            rhos.len(),
            cfg.capacity_rho_min
        ),
    );
    println!(
        "excess over the Nyquist capacity at rho = {}: {:.6} bit/s per Hz",
        cfg.capacity_rho_min,
        paradox_gap(cfg.capacity_rho_min, 1.0, cfg.snr_ratio, 1.0)?
    );
    for r in &precoded {
        println!(
            "beta = {}: precoded capacity {:.6}",
            r.rho_or_beta, r.capacity
        );
    }
    println!(
        "caveat: naive values assume time-localized FTN signals, which do not exist for rho < 1"
    );
    Ok(())
}

pub fn effective(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let p = cfg.unit_pulse()?;
    let tp = cfg.effective_t_prime();
    let ell = cfg.ell as isize;
    let mut distances = Vec::new();
    for &n in &cfg.effective_n {
        distances.push(effective_pulse_distance(n, ell, &p, tp)?);
    }
    out.csv("effective_pulse_distance.csv", |w| {
        let mut csv = csv_writer(w);
        csv.write_record(["n", "ell", "t_prime", "distance"])?;
        for (n, d) in cfg.effective_n.iter().zip(&distances) {
            csv.write_record([
                n.to_string(),
                ell.to_string(),
                tp.to_string(),
                d.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })?;

    let centre = ell as f64 * tp;
    let ts = linspace(centre - 8.0 * tp, centre + 8.0 * tp, cfg.waveform_points);
    let mut header = vec!["t".to_string(), "reference".to_string()];
    let mut columns = vec![
        ts.clone(),
        ts.iter().map(|&t| reference_pulse(t, ell, tp)).collect(),
    ];
    for &n in &cfg.effective_n {
        header.push(format!("n_{n}"));
        columns.push(effective_pulse(n, ell, &p, tp, &ts)?);
    }
    out.csv("effective_pulse_waveforms.csv", |w| {
        write_columns(w, &header, &columns)
    })?;

    for (n, d) in cfg.effective_n.iter().zip(&distances) {
        println!("n = {n}: L2 distance to the reference pulse {d:.6}");
    }
    if distances.len() > 1 {
        report(
            distances.windows(2).all(|w| w[1] < w[0]),
            "distance decreases along the n sweep",
        );
    }
    Ok(())
}
