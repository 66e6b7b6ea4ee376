use std::io::Write;

use serde::Serialize;

use super::field::DiscField;
use crate::output::fmt_f64;

/// Writes `rho,theta,re,im` rows for every node.
pub fn write_field_csv<W: Write>(field: &DiscField, mut out: W) -> std::io::Result<()> {
    writeln!(out, "rho,theta,re,im")?;
    let g = field.grid();
    for ir in 0..g.n_rings() {
        for j in 0..g.n_theta() {
            let v = field.at(ir, j);
            writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(g.rho()[ir]),
                fmt_f64(g.theta(j)),
                fmt_f64(v.re),
                fmt_f64(v.im)
            )?;
        }
    }
    Ok(())
}

/// JSON-ready snapshot of a field with its grid metadata.
#[derive(Debug, Clone, Serialize)]
pub struct FieldRecord {
    pub n_theta: usize,
    pub n_rho: usize,
    pub rho: Vec<f64>,
    /// `[re, im]` pairs in ring-major order.
    pub values: Vec<[f64; 2]>,
}

pub fn field_to_json(field: &DiscField) -> FieldRecord {
    let g = field.grid();
    FieldRecord {
        n_theta: g.n_theta(),
        n_rho: g.n_rho(),
        rho: g.rho().to_vec(),
        values: field.values().iter().map(|v| [v.re, v.im]).collect(),
    }
}
