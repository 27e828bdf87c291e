use std::path::Path;

use nesim_core::IterationTrace;

use crate::error::CliError;

pub const TRACE_HEADER: [&str; 7] = [
    "k",
    "rel_error",
    "consensus_residual",
    "dual_sum_norm",
    "delta_x_norm",
    "delta_z_phi",
    "rate_product",
];

/// 17 significant digits; round-trips every finite f64 exactly.
fn field(v: f64) -> String {
    format!("{:.16e}", v)
}

pub fn trace_to_csv(trace: &[IterationTrace]) -> String {
    let mut out = String::with_capacity(32 + 160 * trace.len());
    out.push_str(&TRACE_HEADER.join(","));
    out.push('\n');
    for row in trace {
        out.push_str(&row.k.to_string());
        for v in [
            row.rel_error,
            row.consensus_residual,
            row.dual_sum_norm,
            row.delta_x_norm,
            row.delta_z_phi,
            row.rate_product,
        ] {
            out.push(',');
            out.push_str(&field(v));
        }
        out.push('\n');
    }
    out
}

pub fn write_trace(path: &Path, trace: &[IterationTrace]) -> Result<(), CliError> {
    std::fs::write(path, trace_to_csv(trace))
        .map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

pub fn read_trace(path: &Path) -> Result<Vec<IterationTrace>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    parse_trace(&text).map_err(|message| CliError::Csv { path: path.to_path_buf(), message })
}

pub fn parse_trace(text: &str) -> Result<Vec<IterationTrace>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| "empty file".to_string())?;
    let expected = TRACE_HEADER.join(",");
    if header != expected {
        return Err(format!("header is \"{}\", expected \"{}\"", header, expected));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != TRACE_HEADER.len() {
            return Err(format!(
                "line {}: expected {} fields, got {}",
                line_no,
                TRACE_HEADER.len(),
                fields.len()
            ));
        }
        let k = fields[0]
            .parse::<u64>()
            .map_err(|e| format!("line {}: bad k: {}", line_no, e))?;
        let mut values = [0.0f64; 6];
        for (slot, raw) in values.iter_mut().zip(&fields[1..]) {
            *slot = raw
                .parse::<f64>()
                .map_err(|e| format!("line {}: bad value \"{}\": {}", line_no, raw, e))?;
        }
        rows.push(IterationTrace {
            k,
            rel_error: values[0],
            consensus_residual: values[1],
            dual_sum_norm: values[2],
            delta_x_norm: values[3],
            delta_z_phi: values[4],
            rate_product: values[5],
        });
    }
    Ok(rows)
}

/// Field-by-field bit equality; NaN payloads must match too.
pub fn traces_bitwise_equal(a: &[IterationTrace], b: &[IterationTrace]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.k == y.k
                && x.rel_error.to_bits() == y.rel_error.to_bits()
                && x.consensus_residual.to_bits() == y.consensus_residual.to_bits()
                && x.dual_sum_norm.to_bits() == y.dual_sum_norm.to_bits()
                && x.delta_x_norm.to_bits() == y.delta_x_norm.to_bits()
                && x.delta_z_phi.to_bits() == y.delta_z_phi.to_bits()
                && x.rate_product.to_bits() == y.rate_product.to_bits()
        })
}
