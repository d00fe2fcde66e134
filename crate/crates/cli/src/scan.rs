//! One-dimensional parameter scans.

use rayon::prelude::*;
use thermosqueeze::dynamics::driven_widths;
use thermosqueeze::report::{fmt_float, CoefficientReport, CsvTable};

use crate::config::{ModelSpec, ScanSpec, ScanVar};
use crate::error::{CliError, CliResult};
use crate::model::{evaluate, Tables};

/// Input columns leading every coefficient row.
pub fn input_fields(spec: &ModelSpec) -> Vec<(String, String)> {
    let mut v = vec![
        ("z".to_string(), fmt_float(spec.z)),
        ("m".to_string(), fmt_float(spec.m)),
        ("omega_a".to_string(), fmt_float(spec.omega_a)),
        ("n_a".to_string(), fmt_float(spec.n_a)),
    ];
    if let Some(t) = spec.time {
        v.push(("time".to_string(), fmt_float(t)));
    }
    v
}

/// Status of one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Ok,
    DomainError,
    NonConvergence,
}

impl PointStatus {
    fn of(e: &CliError) -> Self {
        if e.exit_code() == 3 {
            PointStatus::NonConvergence
        } else {
            PointStatus::DomainError
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::DomainError => "domain_error",
            PointStatus::NonConvergence => "non_convergence",
        }
    }
}

/// A scan table and the worst failure met.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub table: CsvTable,
    pub statuses: Vec<PointStatus>,
}

impl ScanResult {
    /// 0 when every point succeeded, 3 if any point failed to converge,
    /// otherwise 2 if any point was outside the domain.
    pub fn exit_code(&self) -> i32 {
        if self.statuses.contains(&PointStatus::NonConvergence) {
            3
        } else if self.statuses.contains(&PointStatus::DomainError) {
            2
        } else {
            0
        }
    }
}

struct Row {
    inputs: Vec<(String, String)>,
    values: Result<Vec<String>, CliError>,
}

fn point_spec(base: &ModelSpec, var: ScanVar, v: f64) -> ModelSpec {
    let mut s = base.clone();
    match var {
        ScanVar::Z => s.z = v,
        ScanVar::M => s.m = v,
        ScanVar::NA => s.n_a = v,
        ScanVar::OmegaA => s.omega_a = v,
        ScanVar::Phi => {}
    }
    s
}

fn report_values(spec: &ModelSpec, tables: &Tables, phi: Option<f64>) -> CliResult<Vec<String>> {
    spec.validate().map_err(|e| CliError::Core(thermosqueeze::Error::Domain(e.to_string())))?;
    let run = evaluate(spec, tables)?;
    let report = CoefficientReport::new(input_fields(spec), &run)?;
    let mut values = report.values();
    if let Some(phi) = phi {
        let (gp, big) = driven_widths(&run.coeffs, phi);
        values.push(fmt_float(gp));
        values.push(fmt_float(big));
    }
    Ok(values)
}

/// Header row for coefficient tables: inputs, report columns, extras, status.
pub fn report_columns(inputs: &[(String, String)], extra: &[&str]) -> Vec<String> {
    let mut cols: Vec<String> = inputs.iter().map(|(k, _)| k.clone()).collect();
    cols.extend(CoefficientReport::COLUMNS.iter().map(|c| c.to_string()));
    cols.extend(extra.iter().map(|c| c.to_string()));
    cols.push("status".to_string());
    cols
}

/// Evaluates every grid point (concurrently, bounded by `scan.threads`)
/// and returns the rows in input order. Failed points keep their inputs,
/// leave the results empty and record the failure in the status column.
pub fn run_scan(base: &ModelSpec, scan: &ScanSpec, tables: &Tables, comments: Vec<String>) -> CliResult<ScanResult> {
    let is_phi = scan.var == ScanVar::Phi;
    let extra: &[&str] = if is_phi { &["gamma_phi", "Gamma_phi"] } else { &[] };

    let eval_point = |&v: &f64| -> Row {
        let spec = point_spec(base, scan.var, v);
        let mut inputs = input_fields(&spec);
        if is_phi {
            inputs.push(("phi".to_string(), fmt_float(v)));
        }
        let values = report_values(&spec, tables, is_phi.then_some(v));
        Row { inputs, values }
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = scan.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::usage(format!("cannot start {} scan threads: {e}", scan.threads.unwrap_or(0))))?;
    let rows: Vec<Row> = pool.install(|| scan.values.par_iter().map(eval_point).collect());

    let mut probe_inputs = input_fields(base);
    if is_phi {
        probe_inputs.push(("phi".to_string(), String::new()));
    }
    let columns = report_columns(&probe_inputs, extra);
    let width = columns.len() - probe_inputs.len() - 1;
    let mut table = CsvTable::new(columns);
    table.comments = comments;
    let mut statuses = Vec::with_capacity(rows.len());
    for (row, v) in rows.into_iter().zip(&scan.values) {
        let mut cells: Vec<String> = row.inputs.into_iter().map(|(_, val)| val).collect();
        match row.values {
            Ok(values) => {
                cells.extend(values);
                cells.push(PointStatus::Ok.as_str().to_string());
                statuses.push(PointStatus::Ok);
            }
            Err(e) => {
                let status = PointStatus::of(&e);
                log::warn!("{} = {}: {e}", scan.var.as_str(), fmt_float(*v));
                cells.extend(std::iter::repeat(String::new()).take(width));
                cells.push(format!("{}: {e}", status.as_str()));
                statuses.push(status);
            }
        }
        table.rows.push(cells);
    }
    Ok(ScanResult { table, statuses })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan(var: ScanVar, values: Vec<f64>, threads: Option<usize>) -> ScanResult {
        run_scan(
            &ModelSpec::default(),
            &ScanSpec { var, values, threads },
            &Tables::default(),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn rows_follow_input_order_regardless_of_threads() {
        let values = vec![3.0, 0.5, 2.0, 1.0, 1.5];
        let one = scan(ScanVar::Z, values.clone(), Some(1));
        let many = scan(ScanVar::Z, values, Some(4));
        assert_eq!(one.table, many.table);
        assert_eq!(one.table.rows[0][0], fmt_float(3.0));
        assert_eq!(one.exit_code(), 0);
    }

    #[test]
    fn bad_points_are_marked_and_the_scan_continues() {
        let r = scan(ScanVar::Z, vec![1.0, 0.3, 2.0], None);
        assert_eq!(r.statuses, vec![PointStatus::Ok, PointStatus::DomainError, PointStatus::Ok]);
        assert_eq!(r.exit_code(), 2);
        let row = &r.table.rows[1];
        assert_eq!(row.len(), r.table.columns.len());
        assert!(row.last().unwrap().starts_with("domain_error"));
        assert_eq!(row[4], "");
        let r = scan(ScanVar::M, vec![0.0], None);
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn phi_scan_adds_width_columns() {
        let r = scan(ScanVar::Phi, vec![0.0, std::f64::consts::PI], None);
        let cols = &r.table.columns;
        let gp = cols.iter().position(|c| c == "gamma_phi").unwrap();
        let a: f64 = r.table.rows[0][gp].parse().unwrap();
        let b: f64 = r.table.rows[1][gp].parse().unwrap();
        assert!(b < a);
        assert_eq!(cols.last().unwrap(), "status");
    }
}
