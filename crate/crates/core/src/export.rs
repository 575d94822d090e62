//! CSV output: comma-separated, `.` decimal point, header row, LF endings.

use std::io::Write;

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Writes a `(t, amplitude)` waveform table.
pub fn write_waveform_csv<W: Write>(w: W, t: &[f64], amplitude: &[f64]) -> crate::Result<()> {
    if t.len() != amplitude.len() {
        return Err(crate::FtnError::DimensionMismatch {
            expected: t.len(),
            got: amplitude.len(),
        });
    }
    let mut out = csv_writer(w);
    out.write_record(["t", "amplitude"])?;
    for (x, y) in t.iter().zip(amplitude) {
        out.write_record([x.to_string(), y.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
