//! Command-line front end for the `thermosqueeze` library: configuration
//! parsing, command dispatch, parameter scans and figure data.
//!
//! Every output starts with `#` comment lines naming the program version,
//! the command, the unit convention and the full resolved parameter set.
//! Floats are written with nine significant digits, so identical
//! configurations give byte-identical output.

pub mod config;
pub mod error;
pub mod figures;
pub mod model;
pub mod scan;

use std::fs;
use std::io::Write;

use thermosqueeze::dynamics::{
    evolve_bloch, fluorescence_spectrum, linear_grid, resonance_fluorescence, steady_state, BlochVector,
    Linewidths,
};
use thermosqueeze::mecoeff::resonant_rwa_coefficients;
use thermosqueeze::report::{
    estimate_fields, fmt_float, key_value_document, transition_fields, CoefficientReport, CsvTable,
};
use thermosqueeze::reservoir::{generic_response, Occupation, PvQuadrature};
use thermosqueeze::rydberg::{circuit_qed_estimate, dipole_moment, rate_estimate};
use thermosqueeze::{LorentzianReservoir, Response};

pub use config::{parse_config, Format, Job, RunConfig};
pub use error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const UNITS_NORMALIZED: &str = "units: frequencies in units of kappa, rates in units of gamma_c";
pub const UNITS_SI: &str = "units: SI (angular frequencies in rad/s, rates in 1/s, K); dipole in e*a0";

/// Comment lines opening every output.
pub fn header(command: &str, units: &str, params: &[(String, String)]) -> Vec<String> {
    let mut h = vec![format!("thermosqueeze {VERSION} {command}"), units.to_string()];
    h.extend(params.iter().map(|(k, v)| format!("{k} = {v}")));
    h
}

/// A finished command: its text and the exit status to report.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, exit_code: 0 }
    }
}

fn keyvalue_text(comments: &[String], fields: &[(String, String)]) -> String {
    let mut s: String = comments.iter().map(|c| format!("# {c}\n")).collect();
    s.push_str(&key_value_document(fields));
    s
}

/// One-row table of `fields`.
fn single_row(comments: Vec<String>, fields: &[(String, String)]) -> CsvTable {
    let mut t = CsvTable::new(fields.iter().map(|(k, _)| k.clone()));
    t.comments = comments;
    t.rows.push(fields.iter().map(|(_, v)| v.clone()).collect());
    t
}

fn render(format: Format, comments: Vec<String>, fields: &[(String, String)]) -> String {
    match format {
        Format::Keyvalue => keyvalue_text(&comments, fields),
        Format::Csv => single_row(comments, fields).to_string_lossy(),
    }
}

fn coeffs_command(spec: &config::ModelSpec, format: Format) -> CliResult<Outcome> {
    let tables = model::Tables::load(spec)?;
    let run = model::evaluate(spec, &tables)?;
    let report = CoefficientReport::new(scan::input_fields(spec), &run)?;
    let comments = header("coeffs", UNITS_NORMALIZED, &spec.params());
    Ok(Outcome::ok(match format {
        Format::Keyvalue => keyvalue_text(&comments, &report.fields()),
        Format::Csv => {
            let mut t = CsvTable::new(scan::report_columns(&report.inputs, &[]));
            t.comments = comments;
            let mut row: Vec<String> = report.inputs.iter().map(|(_, v)| v.clone()).collect();
            row.extend(report.values());
            row.push("ok".into());
            t.rows.push(row);
            t.to_string_lossy()
        }
    }))
}

fn scan_command(spec: &config::ModelSpec, s: &config::ScanSpec) -> CliResult<Outcome> {
    let tables = model::Tables::load(spec)?;
    let mut params = spec.params();
    params.push(("scan_var".into(), s.var.as_str().into()));
    params.push(("scan_points".into(), s.values.len().to_string()));
    let result = scan::run_scan(spec, s, &tables, header("scan", UNITS_NORMALIZED, &params))?;
    Ok(Outcome {
        text: result.table.to_string_lossy(),
        exit_code: result.exit_code(),
    })
}

fn response_command(spec: &config::ModelSpec, g: &config::GridSpec) -> CliResult<Outcome> {
    let tables = model::Tables::load(spec)?;
    let mut params = spec.params();
    let table = match (&spec.reservoir, &tables.reservoir) {
        (config::ReservoirSource::Tabulated { temperature, .. }, Some(res)) => {
            let occupation = match temperature {
                Some(t) => Occupation::Planck { temperature: *t },
                None => Occupation::Fixed { n: spec.n_a },
            };
            let res = res.with_occupation(occupation)?;
            let w = res.grid();
            let (lo, hi) = (g.from.unwrap_or(w[1]), g.to.unwrap_or(w[w.len() - 2]));
            params.push(("grid".into(), format!("[{}, {}] x {}", fmt_float(lo), fmt_float(hi), g.points)));
            let mut t = CsvTable::new(["omega", "gamma_T", "delta_T", "error_estimate"]);
            t.comments = header("response", UNITS_NORMALIZED, &params);
            let pv = PvQuadrature::default();
            for w in linear_grid(lo, hi, g.points) {
                let p = generic_response(w, &res, &pv)?;
                t.push_floats(&[w, p.gamma_t, p.delta_t, p.error_estimate]);
            }
            t
        }
        _ => {
            let res = LorentzianReservoir::new(spec.omega_a, 1.0, spec.n_a, 1.0)?;
            let (lo, hi) = (g.from.unwrap_or(-2.0 * spec.omega_a), g.to.unwrap_or(2.0 * spec.omega_a));
            params.push(("grid".into(), format!("[{}, {}] x {}", fmt_float(lo), fmt_float(hi), g.points)));
            let mut t = CsvTable::new(["omega", "gamma_T", "delta_T"]);
            t.comments = header("response", UNITS_NORMALIZED, &params);
            for w in linear_grid(lo, hi, g.points) {
                t.push_floats(&[w, res.gamma_t(w), res.delta_t(w)]);
            }
            t
        }
    };
    Ok(Outcome::ok(table.to_string_lossy()))
}

fn dynamics_command(spec: &config::ModelSpec, d: &config::DynamicsSpec) -> CliResult<Outcome> {
    let tables = model::Tables::load(spec)?;
    let c = model::evaluate(spec, &tables)?.coeffs;
    let s0 = BlochVector::new(d.s0[0], d.s0[1], d.s0[2])?;
    let t_max = d.t_max.unwrap_or(5.0 / c.gamma_x());
    let ss = steady_state(&c)?;
    let mut params = spec.params();
    params.push(("s0".into(), format!("{}, {}, {}", fmt_float(s0.sx), fmt_float(s0.sy), fmt_float(s0.sz))));
    params.push(("t_max".into(), fmt_float(t_max)));
    params.push(("gamma_x".into(), fmt_float(c.gamma_x())));
    params.push(("gamma_y".into(), fmt_float(c.gamma_y())));
    params.push(("steady_state_sz".into(), fmt_float(ss.sz)));
    let mut t = CsvTable::new(["t", "sx", "sy", "sz", "excited_population", "dipole_correlation"]);
    t.comments = header("dynamics", UNITS_NORMALIZED, &params);
    for time in linear_grid(0.0, t_max, d.points) {
        let s = evolve_bloch(s0, &c, time)?;
        t.push_floats(&[
            time,
            s.sx,
            s.sy,
            s.sz,
            s.excited_population(),
            thermosqueeze::dynamics::dipole_correlation(&c, time),
        ]);
    }
    Ok(Outcome::ok(t.to_string_lossy()))
}

fn spectrum_command(spec: &config::ModelSpec, s: &config::SpectrumSpec) -> CliResult<Outcome> {
    let tables = model::Tables::load(spec)?;
    let c = model::evaluate(spec, &tables)?.coeffs;
    let span = s.span.unwrap_or(10.0 * c.gamma_y());
    let curve = fluorescence_spectrum(&c, &linear_grid(-span, span, s.points))?;
    let mut params = spec.params();
    params.push(("span".into(), fmt_float(span)));
    if let Linewidths::Quadrature { gamma_x, gamma_y } = curve.linewidths {
        params.push(("gamma_x".into(), fmt_float(gamma_x)));
        params.push(("gamma_y".into(), fmt_float(gamma_y)));
    }
    let mut t = CsvTable::new(["detuning", "S"]);
    t.comments = header("spectrum", UNITS_NORMALIZED, &params);
    for (w, v) in curve.omega_grid.iter().zip(&curve.values) {
        t.push_floats(&[*w, *v]);
    }
    Ok(Outcome::ok(t.to_string_lossy()))
}

fn resfluor_command(spec: &config::ModelSpec, r: &config::ResfluorSpec) -> CliResult<Outcome> {
    let tables = model::Tables::load(spec)?;
    let c = model::evaluate(spec, &tables)?.coeffs;
    let rabi = r.rabi.unwrap_or(20.0 * c.gamma_y());
    let span = r.span.unwrap_or(2.0 * rabi);
    let curve = resonance_fluorescence(&c, rabi, r.phi, &linear_grid(-span, span, r.points))?;
    let unmod = model::evaluate_unmodulated(spec, &tables)?;
    let mut params = spec.params();
    params.push(("rabi".into(), fmt_float(rabi)));
    params.push(("phi".into(), fmt_float(r.phi)));
    params.push(("span".into(), fmt_float(span)));
    if let Linewidths::Driven { gamma_phi, big_gamma_phi } = curve.linewidths {
        params.push(("gamma_phi".into(), fmt_float(gamma_phi)));
        params.push(("Gamma_phi".into(), fmt_float(big_gamma_phi)));
    }
    if let Some(d) = curve.drive {
        params.push(("theta".into(), fmt_float(d.theta)));
    }
    params.push(("unmodulated_gamma_phi".into(), fmt_float(unmod.gamma_n + 0.5 * unmod.gamma())));
    if tables.reservoir.is_none() {
        let rwa = resonant_rwa_coefficients(&LorentzianReservoir::new(spec.omega_a, 1.0, spec.n_a, 1.0)?);
        params.push(("unmodulated_gamma_phi_rwa".into(), fmt_float(rwa.gamma_n + 0.5 * rwa.gamma())));
    }
    let mut t = CsvTable::new(["detuning", "S"]);
    t.comments = header("resfluor", UNITS_NORMALIZED, &params);
    for (w, v) in curve.omega_grid.iter().zip(&curve.values) {
        t.push_floats(&[*w, *v]);
    }
    Ok(Outcome::ok(t.to_string_lossy()))
}

fn rydberg_command(n: u32, format: Format) -> CliResult<Outcome> {
    let tr = dipole_moment(n)?;
    let params = vec![("n".to_string(), n.to_string())];
    let comments = header("rydberg", "units: radial integral in a0, dipole in e*a0", &params);
    Ok(Outcome::ok(render(format, comments, &transition_fields(&tr))))
}

fn estimate_command(e: &config::EstimateSpec, format: Format) -> CliResult<Outcome> {
    let (est, mode) = match e.mode {
        config::EstimateMode::Thermal => {
            let d = match e.dipole {
                Some(d) => d,
                None => dipole_moment(e.n)?.dipole_d,
            };
            (rate_estimate(d, e.omega, e.kappa, e.temperature)?, "thermal")
        }
        config::EstimateMode::Circuit => (circuit_qed_estimate(e.omega, e.kappa, e.dipole.unwrap_or(1e4))?, "circuit"),
    };
    let params = vec![
        ("mode".to_string(), mode.to_string()),
        ("omega".to_string(), fmt_float(e.omega)),
        ("kappa".to_string(), fmt_float(e.kappa)),
        ("temperature".to_string(), fmt_float(est.temperature)),
        ("dipole".to_string(), fmt_float(est.dipole)),
    ];
    let comments = header("estimate", UNITS_SI, &params);
    if !est.all_gates_pass() {
        log::warn!("some validity conditions fail; see the valid[...] entries");
    }
    Ok(Outcome::ok(render(format, comments, &estimate_fields(&est))))
}

fn figures_command(f: &config::FiguresSpec) -> CliResult<Outcome> {
    let written = figures::emit_figure_data(&f.which, &f.out_dir)?;
    Ok(Outcome::ok(
        written.iter().map(|p| format!("{}\n", p.display())).collect(),
    ))
}

/// Runs a resolved command and returns its text.
pub fn execute(cfg: &RunConfig) -> CliResult<Outcome> {
    match &cfg.job {
        Job::Coeffs(m) => coeffs_command(m, cfg.format),
        Job::Scan(m, s) => scan_command(m, s),
        Job::Response(m, g) => response_command(m, g),
        Job::Dynamics(m, d) => dynamics_command(m, d),
        Job::Spectrum(m, s) => spectrum_command(m, s),
        Job::Resfluor(m, r) => resfluor_command(m, r),
        Job::Rydberg { n } => rydberg_command(*n, cfg.format),
        Job::Estimate(e) => estimate_command(e, cfg.format),
        Job::Figures(f) => figures_command(f),
    }
}

/// Runs `cfg` and writes its output; returns the exit status.
pub fn run(cfg: &RunConfig) -> CliResult<i32> {
    let out = execute(cfg)?;
    match &cfg.output {
        Some(path) => fs::write(path, &out.text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(out.text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(out.exit_code)
}
