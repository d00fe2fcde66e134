//! Text serialisation of results: the coefficient report (key-value
//! document or CSV row) and commented CSV tables.
//!
//! Floats are always written with [`fmt_float`] (nine significant digits)
//! so identical inputs give byte-identical files.

use std::io::Write;

use crate::error::Result;
use crate::mecoeff::{classify_squeezing, Converged, MECoefficients, Squeezing};
use crate::rydberg::{ExperimentEstimate, RydbergTransition};

/// Nine significant digits in scientific notation.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.8e}")
}

/// Everything reported for one coefficient evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientReport {
    /// Input parameters, already formatted, in display order.
    pub inputs: Vec<(String, String)>,
    pub coeffs: MECoefficients,
    pub squeezing: Squeezing,
    pub qmax_used: i32,
    /// Relative change of the coefficients under refinement.
    pub convergence_estimate: f64,
}

impl CoefficientReport {
    /// Output columns after the inputs, in CSV order.
    pub const COLUMNS: [&'static str; 18] = [
        "gammaN",
        "gammaNp1",
        "gammaM_re",
        "gammaM_im",
        "gamma",
        "N",
        "M_abs",
        "M_arg",
        "phi_squeeze",
        "gamma_x",
        "gamma_y",
        "gammaN_minus_gammaAbsM",
        "absM_over_N_plus_half",
        "delta_shift",
        "squeezing_class",
        "ratio_to_bound",
        "qmax_used",
        "convergence_estimate",
    ];

    pub fn new(inputs: Vec<(String, String)>, run: &Converged) -> Result<Self> {
        Self::from_coeffs(inputs, run.coeffs, run.qmax_used, run.convergence_estimate)
    }

    pub fn from_coeffs(
        inputs: Vec<(String, String)>,
        coeffs: MECoefficients,
        qmax_used: i32,
        convergence_estimate: f64,
    ) -> Result<Self> {
        let squeezing = classify_squeezing(&coeffs)?;
        Ok(Self {
            inputs,
            coeffs,
            squeezing,
            qmax_used,
            convergence_estimate,
        })
    }

    /// Values matching [`Self::COLUMNS`].
    pub fn values(&self) -> Vec<String> {
        let c = &self.coeffs;
        let m = c.big_m();
        let abs_gm = c.gamma_m.norm();
        vec![
            fmt_float(c.gamma_n),
            fmt_float(c.gamma_np1),
            fmt_float(c.gamma_m.re),
            fmt_float(c.gamma_m.im),
            fmt_float(c.gamma()),
            fmt_float(c.big_n()),
            fmt_float(m.norm()),
            fmt_float(m.arg()),
            fmt_float(c.phi_squeeze()),
            fmt_float(c.gamma_x()),
            fmt_float(c.gamma_y()),
            fmt_float(c.gamma_n - abs_gm),
            fmt_float(abs_gm / (c.gamma_n + 0.5 * c.gamma())),
            fmt_float(c.delta_shift),
            self.squeezing.class.to_string(),
            fmt_float(self.squeezing.ratio_to_bound),
            self.qmax_used.to_string(),
            fmt_float(self.convergence_estimate),
        ]
    }

    /// Inputs followed by every output column.
    pub fn fields(&self) -> Vec<(String, String)> {
        let mut out = self.inputs.clone();
        out.extend(
            Self::COLUMNS
                .iter()
                .map(|k| k.to_string())
                .zip(self.values()),
        );
        out
    }

    pub fn to_key_value(&self) -> String {
        key_value_document(&self.fields())
    }
}

/// `key = value` lines.
pub fn key_value_document(fields: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in fields {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(v);
        s.push('\n');
    }
    s
}

pub fn transition_fields(t: &RydbergTransition) -> Vec<(String, String)> {
    vec![
        ("n".into(), t.n.to_string()),
        ("radial_R_a0".into(), fmt_float(t.radial_r)),
        ("angular_A".into(), fmt_float(t.angular_a)),
        ("dipole_d_ea0".into(), fmt_float(t.dipole_d)),
    ]
}

pub fn estimate_fields(e: &ExperimentEstimate) -> Vec<(String, String)> {
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_else(|| "n/a".into());
    let mut out = vec![
        ("omega_a_rad_per_s".into(), fmt_float(e.omega_a)),
        ("kappa_per_s".into(), fmt_float(e.kappa)),
        ("temperature_K".into(), fmt_float(e.temperature)),
        ("dipole_ea0".into(), fmt_float(e.dipole)),
        ("gamma_0_per_s".into(), fmt_float(e.gamma_0)),
        ("gamma_T_per_s".into(), fmt_float(e.gamma_t)),
        ("g_per_s".into(), fmt_float(e.g)),
        ("gamma_c_per_s".into(), opt(e.gamma_c)),
        ("gamma_x_inverse_s".into(), opt(e.gamma_x_inv)),
    ];
    for g in &e.gates {
        let key = format!("valid[{}]", g.name);
        let verdict = if g.passed { "pass" } else { "fail" };
        out.push((key, format!("{verdict} ({} vs {})", fmt_float(g.larger), fmt_float(g.smaller))));
    }
    out
}

/// A CSV table preceded by `#` comment lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            comments: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn push_floats(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|v| fmt_float(*v)).collect());
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        for c in &self.comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_string_lossy(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8_lossy(&buf).into_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn sample() -> CoefficientReport {
        let c = MECoefficients {
            delta_shift: 0.25,
            gamma_n: 2.0,
            gamma_np1: 3.0,
            gamma_m: Complex64::new(0.0, 1.0),
        };
        CoefficientReport::from_coeffs(vec![("z".into(), fmt_float(1.0))], c, 20, 1e-9).unwrap()
    }

    #[test]
    fn float_format_is_nine_digits() {
        assert_eq!(fmt_float(207.4912345678), "2.07491235e2");
        assert_eq!(fmt_float(-0.5), "-5.00000000e-1");
    }

    #[test]
    fn report_columns_line_up() {
        let r = sample();
        assert_eq!(r.values().len(), CoefficientReport::COLUMNS.len());
        let kv = r.to_key_value();
        assert!(kv.starts_with("z = 1.00000000e0\n"));
        assert!(kv.contains("gammaN_minus_gammaAbsM = 1.00000000e0\n"));
        assert!(kv.contains("squeezing_class = classical\n"));
        assert!(kv.contains("qmax_used = 20\n"));
    }

    #[test]
    fn csv_table_layout() {
        let mut t = CsvTable::new(["a", "b"]);
        t.comment("version 0");
        t.push_floats(&[1.0, 2.5]);
        assert_eq!(t.to_string_lossy(), "# version 0\na,b\n1.00000000e0,2.50000000e0\n");
    }
}
