use std::io::Write;

use super::study::StudyRow;
use super::{preconditioner_name, DriverError};

pub const CSV_HEADER: [&str; 11] = [
    "h",
    "ndofs",
    "kappa",
    "degree",
    "bc",
    "pc",
    "rel_l2_error",
    "rel_h1_error",
    "iterations",
    "converged",
    "wall_time_seconds",
];

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one CSV record per row. Failed runs keep their configuration columns
/// and get `NaN` errors. Wall times are written as zero unless
/// `include_timing` is set, so that identical runs give identical bytes.
pub fn write_csv<W: Write>(out: W, rows: &[StudyRow], include_timing: bool) -> Result<(), DriverError> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        let spec = &row.spec;
        let record = match &row.outcome {
            Ok(r) => [
                real(r.h),
                r.ndofs.to_string(),
                real(r.kappa),
                r.degree.to_string(),
                r.bc.name().to_string(),
                preconditioner_name(r.pc).to_string(),
                real(r.rel_l2_error),
                real(r.rel_h1_error),
                r.iterations.to_string(),
                r.converged.to_string(),
                real(if include_timing { r.wall_time_seconds } else { 0.0 }),
            ],
            Err(_) => [
                real(f64::NAN),
                "0".to_string(),
                real(spec.kappa),
                spec.degree.to_string(),
                spec.bc.name().to_string(),
                preconditioner_name(spec.pc).to_string(),
                real(f64::NAN),
                real(f64::NAN),
                "0".to_string(),
                "false".to_string(),
                real(0.0),
            ],
        };
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| DriverError::Csv(e.into()))?;
    Ok(())
}
