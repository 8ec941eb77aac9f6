//! CSV and manifest writers. Numbers use C-style `%.12e` formatting so
//! identical runs give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{hermitize, Superoperator};
use crate::propagator::Trajectory;

/// `printf("%.12e", x)`.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::config(
        "output.path",
        format!("cannot write {}: {e}", path.display()),
    )
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| io_error(path, e))
}

/// Header `time_ps,rho_1_1_re,rho_1_1_im,...` with 1-based indices, one row
/// per sample. States are Hermitized for reporting.
pub fn trajectory_csv(traj: &Trajectory, pairs: &[(usize, usize)]) -> String {
    let mut out = String::from("time_ps");
    for &(i, j) in pairs {
        let _ = write!(out, ",rho_{0}_{1}_re,rho_{0}_{1}_im", i + 1, j + 1);
    }
    out.push('\n');
    for (t, rho) in traj.times().iter().zip(traj.states()) {
        let h = hermitize(rho);
        out.push_str(&sci(*t));
        for &(i, j) in pairs {
            let z = h[(i, j)];
            out.push(',');
            out.push_str(&sci(z.re));
            out.push(',');
            out.push_str(&sci(z.im));
        }
        out.push('\n');
    }
    out
}

/// One row of the Γ comparison table; values in cm⁻¹.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorRow {
    pub delta_cm: f64,
    pub variant: &'static str,
    pub re: f64,
    pub im: f64,
    pub oracle_re: f64,
    pub oracle_im: f64,
    pub rel_err_re: f64,
    pub rel_err_im: f64,
}

pub const TENSOR_HEADER: &str = "delta_cm,variant,re,im,oracle_re,oracle_im,rel_err_re,rel_err_im";

pub fn tensor_csv(rows: &[TensorRow]) -> String {
    let mut out = format!("{TENSOR_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            sci(r.delta_cm),
            r.variant,
            sci(r.re),
            sci(r.im),
            sci(r.oracle_re),
            sci(r.oracle_im),
            sci(r.rel_err_re),
            sci(r.rel_err_im)
        );
    }
    out
}

/// Nonzero entries as `row,col,re,im`; indices are 0-based positions in
/// the column-major vectorization, `(i, j) ↦ i + j·dim`.
pub fn generator_csv(l: &Superoperator) -> String {
    let mut out = String::from("row,col,re,im\n");
    for ((r, c), z) in l.matrix().indexed_iter() {
        if z.re != 0.0 || z.im != 0.0 {
            let _ = writeln!(out, "{r},{c},{},{}", sci(z.re), sci(z.im));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelEntry {
    pub file: String,
    pub form: String,
    pub secular: bool,
    pub variant: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timescale_ps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    /// τ(e)/τ(a): secular against non-secular Lindblad, both with Γ⁽²⁾.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secular_slowdown: Option<f64>,
    /// τ(a)/τ(c): Γ⁽²⁾ against Γ⁽¹⁾, both non-secular Lindblad.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma1_compression: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub model: String,
    pub dim: usize,
    pub t_final_ps: f64,
    pub samples: usize,
    pub max_asymmetry_cm: f64,
    pub ratios: Ratios,
    pub panels: BTreeMap<String, PanelEntry>,
}

impl Manifest {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("manifest", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_scientific_format() {
        assert_eq!(sci(1.0), "1.000000000000e+00");
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(sci(1.234e123), "1.234000000000e+123");
    }

    #[test]
    fn tensor_csv_has_eight_columns() {
        let row = TensorRow {
            delta_cm: 0.0,
            variant: "gamma1",
            re: 1.0,
            im: 0.0,
            oracle_re: 1.0,
            oracle_im: 0.0,
            rel_err_re: 0.0,
            rel_err_im: 0.0,
        };
        let csv = tensor_csv(&[row]);
        for line in csv.lines() {
            assert_eq!(line.split(',').count(), 8);
        }
    }
}
