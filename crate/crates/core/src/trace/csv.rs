use std::io::{Read, Write};

use super::{Command, JointUnit, Trace, TraceError};
use crate::scalar::Scalar;
use crate::time::Micros;

/// Reads a `t_ms,j1,...,jd` trace. The period is taken from the first two
/// timestamps and every later row must sit on that schedule.
pub fn read_trace_csv<T: Scalar, R: Read>(reader: R, unit: JointUnit) -> Result<Trace<T>, TraceError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| TraceError::Csv(e.to_string()))?.clone();
    if headers.len() < 2 || &headers[0] != "t_ms" {
        return Err(TraceError::Csv("expected header `t_ms,j1,...,jd`".into()));
    }
    let dim = headers.len() - 1;

    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| TraceError::Csv(e.to_string()))?;
        if rec.len() != dim + 1 {
            return Err(TraceError::DimensionMismatch { seq: line, expected: dim, found: rec.len().saturating_sub(1) });
        }
        let parse = |s: &str| -> Result<f64, TraceError> {
            s.parse::<f64>().map_err(|_| TraceError::Csv(format!("row {}: cannot parse `{s}`", line + 1)))
        };
        times.push(Micros::from_ms(parse(&rec[0])?));
        let joints = rec.iter().skip(1).map(|s| parse(s).map(T::lit)).collect::<Result<Vec<T>, _>>()?;
        rows.push(joints);
    }
    if rows.len() < 2 {
        return Err(TraceError::InvalidTrace("need at least two rows to infer the period".into()));
    }
    let period = times[1] - times[0];
    let samples = rows
        .into_iter()
        .zip(times)
        .enumerate()
        .map(|(i, (joints, t))| Command::new(i, joints, t))
        .collect();
    Trace::from_samples(period, samples, unit)
}

/// Writes the trace with six decimals per field.
pub fn write_trace_csv<T: Scalar, W: Write>(trace: &Trace<T>, mut w: W) -> Result<(), TraceError> {
    let mut line = String::from("t_ms");
    for j in 1..=trace.dim() {
        line.push_str(&format!(",j{j}"));
    }
    writeln!(w, "{line}")?;
    for c in trace.samples() {
        line.clear();
        line.push_str(&format!("{:.6}", c.gen_time().as_ms()));
        for v in c.joints() {
            line.push_str(&format!(",{:.6}", v.as_f64()));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
