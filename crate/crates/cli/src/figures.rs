//! Plot-ready data for the figures, all at ω_a = 10κ and n_a = 10³.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use thermosqueeze::dynamics::{driven_widths, fluorescence_value, linear_grid};
use thermosqueeze::report::{fmt_float, CsvTable};
use thermosqueeze::{Error, LorentzianReservoir, MECoefficients, Response};

use crate::config::ModelSpec;
use crate::error::{CliError, CliResult};
use crate::model::{evaluate, evaluate_unmodulated, Tables};
use crate::{header, UNITS_NORMALIZED};

pub const FIGURE_IDS: [&str; 9] = [
    "fig1", "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig4a", "fig4b",
];

/// Scale applied to the unmodulated spectrum in fig3a.
pub const UNMODULATED_SCALE: f64 = 5.0;

fn model(z: f64, m: f64) -> ModelSpec {
    ModelSpec {
        z,
        m,
        ..ModelSpec::default()
    }
}

fn coeffs(z: f64, m: f64) -> CliResult<MECoefficients> {
    Ok(evaluate(&model(z, m), &Tables::default())?.coeffs)
}

fn z_grid() -> Vec<f64> {
    (1..=19).map(|k| 0.5 * k as f64).collect()
}

fn table(id: &str, what: &str, params: Vec<(String, String)>, columns: &[&str]) -> CsvTable {
    let mut t = CsvTable::new(columns.iter().copied());
    t.comments = header(&format!("figures {id}"), UNITS_NORMALIZED, &params);
    t.comment(what.to_string());
    t
}

fn base_params(extra: &[(&str, String)]) -> Vec<(String, String)> {
    let d = ModelSpec::default();
    let mut p = vec![
        ("omega_a".to_string(), fmt_float(d.omega_a)),
        ("n_a".to_string(), fmt_float(d.n_a)),
        ("qmax".to_string(), d.qmax.to_string()),
    ];
    p.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    p
}

fn response_figure() -> CliResult<CsvTable> {
    let d = ModelSpec::default();
    let res = LorentzianReservoir::normalized(d.omega_a, d.n_a)?;
    let mut t = table(
        "fig1",
        "cavity reservoir response on [-2 omega_a, 2 omega_a]",
        base_params(&[]),
        &["omega", "gamma_T", "delta_T"],
    );
    for w in linear_grid(-2.0 * d.omega_a, 2.0 * d.omega_a, 801) {
        t.push_floats(&[w, res.gamma_t(w), res.delta_t(w)]);
    }
    Ok(t)
}

const SQUEEZE_COLUMNS: [&str; 4] = ["gammaN", "gamma_absM", "gammaN_minus_gammaAbsM", "absM_over_N_plus_half"];

fn squeeze_values(c: &MECoefficients) -> [f64; 4] {
    let gm = c.gamma_m.norm();
    [c.gamma_n, gm, c.gamma_n - gm, gm / (c.gamma_n + 0.5 * c.gamma())]
}

fn z_scan_figure(id: &str, m: f64) -> CliResult<CsvTable> {
    let mut cols = vec!["z"];
    cols.extend(SQUEEZE_COLUMNS);
    let mut t = table(
        id,
        "squeezing against modulation strength z",
        base_params(&[("m", fmt_float(m))]),
        &cols,
    );
    for z in z_grid() {
        let mut row = vec![z];
        row.extend(squeeze_values(&coeffs(z, m)?));
        t.push_floats(&row);
    }
    Ok(t)
}

fn m_scan_figure() -> CliResult<CsvTable> {
    let mut cols = vec!["m"];
    cols.extend(SQUEEZE_COLUMNS);
    let mut t = table(
        "fig2c",
        "squeezing against modulation frequency ratio m = 2/k",
        base_params(&[("z", fmt_float(1.0))]),
        &cols,
    );
    for k in 1..=8 {
        let m = 2.0 / k as f64;
        let mut row = vec![m];
        row.extend(squeeze_values(&coeffs(1.0, m)?));
        t.push_floats(&row);
    }
    Ok(t)
}

fn ratio_figure() -> CliResult<CsvTable> {
    let mut t = table(
        "fig2d",
        "ratio gamma|M| / gamma(N + 1/2) against z",
        base_params(&[("m", fmt_float(2.0))]),
        &["z", "absM_over_N_plus_half"],
    );
    for z in z_grid() {
        t.push_floats(&[z, squeeze_values(&coeffs(z, 2.0)?)[3]]);
    }
    Ok(t)
}

fn spectrum_figure(id: &str) -> CliResult<CsvTable> {
    let (z, m) = (3.0, 2.0);
    let c = coeffs(z, m)?;
    let params = base_params(&[("z", fmt_float(z)), ("m", fmt_float(m))]);
    let grid = linear_grid(-3000.0, 3000.0, 1201);
    if id == "fig3a" {
        let u = evaluate_unmodulated(&model(z, m), &Tables::default())?;
        let mut t = table(
            id,
            "fluorescence spectrum with and without modulation (the latter multiplied by 5)",
            params,
            &["detuning", "S_modulated", "S_unmodulated_x5"],
        );
        for w in grid {
            t.push_floats(&[w, fluorescence_value(&c, w), UNMODULATED_SCALE * fluorescence_value(&u, w)]);
        }
        Ok(t)
    } else {
        // a single Lorentzian of width γ(N + 1/2) with the same total weight
        let width = c.gamma_n + 0.5 * c.gamma();
        let n = c.big_n();
        let weight = 2.0 * n / (2.0 * n + 1.0);
        let mut t = table(
            id,
            "modulated fluorescence spectrum and an equal-area Lorentzian of width gamma(N + 1/2)",
            params,
            &["detuning", "S_modulated", "lorentzian"],
        );
        t.comment(format!("lorentzian_width = {}", fmt_float(width)));
        for w in grid {
            let l = weight / PI * width / (width * width + w * w);
            t.push_floats(&[w, fluorescence_value(&c, w), l]);
        }
        Ok(t)
    }
}

/// Relative phases of fig4, in column order.
pub const FIG4_PHASES: [(&str, f64); 3] = [("pi", PI), ("half_pi", PI / 2.0), ("0", 0.0)];

fn central_peak_figure(id: &str, z: f64) -> CliResult<CsvTable> {
    let m = 2.0;
    let c = coeffs(z, m)?;
    let cols: Vec<String> = std::iter::once("detuning".to_string())
        .chain(FIG4_PHASES.iter().map(|(name, _)| format!("central_phi_{name}")))
        .collect();
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = table(
        id,
        "central resonance-fluorescence peak gamma_phi/(gamma_phi^2 + w^2) for phi = pi, pi/2, 0",
        base_params(&[("z", fmt_float(z)), ("m", fmt_float(m))]),
        &col_refs,
    );
    let widths: Vec<f64> = FIG4_PHASES.iter().map(|(_, phi)| driven_widths(&c, *phi).0).collect();
    for ((name, _), w) in FIG4_PHASES.iter().zip(&widths) {
        t.comment(format!("gamma_phi[{name}] = {}", fmt_float(*w)));
    }
    for d in linear_grid(-1000.0, 1000.0, 801) {
        let mut row = vec![d];
        row.extend(widths.iter().map(|w| w / (w * w + d * d)));
        t.push_floats(&row);
    }
    Ok(t)
}

/// The data table of one figure.
pub fn figure_table(id: &str) -> CliResult<CsvTable> {
    match id {
        "fig1" => response_figure(),
        "fig2a" => z_scan_figure(id, 2.0),
        "fig2b" => z_scan_figure(id, 1.0),
        "fig2c" => m_scan_figure(),
        "fig2d" => ratio_figure(),
        "fig3a" | "fig3b" => spectrum_figure(id),
        "fig4a" => central_peak_figure(id, 1.0),
        "fig4b" => central_peak_figure(id, 3.0),
        _ => Err(CliError::Core(Error::Domain(format!(
            "unknown figure id '{id}' (known: {}, all)",
            FIGURE_IDS.join(", ")
        )))),
    }
}

/// Expands "all" and checks every id before anything is written.
pub fn expand_ids(which: &[String]) -> CliResult<Vec<String>> {
    let mut ids = Vec::new();
    for w in which {
        if w == "all" {
            ids.extend(FIGURE_IDS.iter().map(|s| s.to_string()));
        } else if FIGURE_IDS.contains(&w.as_str()) {
            ids.push(w.clone());
        } else {
            figure_table(w)?;
        }
    }
    Ok(ids)
}

/// Writes `<out_dir>/<id>.csv` for each requested figure.
pub fn emit_figure_data(which: &[String], out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    let ids = expand_ids(which)?;
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for id in ids {
        let path = out_dir.join(format!("{id}.csv"));
        figure_table(&id)?.write_to(fs::File::create(&path)?)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_figure_is_a_domain_error() {
        let e = figure_table("fig9").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(expand_ids(&["all".into()]).unwrap().len(), 9);
    }

    #[test]
    fn fig1_layout() {
        let t = figure_table("fig1").unwrap();
        assert_eq!(t.columns, vec!["omega", "gamma_T", "delta_T"]);
        assert_eq!(t.rows.len(), 801);
        assert_eq!(t.rows[0][0], fmt_float(-20.0));
        assert!(t.comments[0].starts_with("thermosqueeze "));
    }

    #[test]
    fn fig3b_lorentzian_has_the_spectrum_weight() {
        let t = figure_table("fig3b").unwrap();
        let c = coeffs(3.0, 2.0).unwrap();
        let width = c.gamma_n + 0.5 * c.gamma();
        let n = c.big_n();
        let centre = &t.rows[600];
        assert_eq!(centre[0], fmt_float(0.0));
        let peak: f64 = centre[2].parse().unwrap();
        let want = 2.0 * n / (2.0 * n + 1.0) / (PI * width);
        assert!((peak / want - 1.0).abs() < 1e-8);
    }
}
