//! Observable consequences of the long-time coefficients: Bloch-vector
//! relaxation, dipole correlation, and fluorescence spectra.
//!
//! The quadratures are taken in the frame rotated by the squeezing angle φ,
//! σ_x = e^{iφ}σ_+ + h.c., σ_y = -ie^{iφ}σ_+ + h.c., in which the constant
//! coefficient equations of motion decouple.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mecoeff::MECoefficients;

/// Allowed excess of |s|² over one.
pub const BLOCH_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl BlochVector {
    pub fn new(sx: f64, sy: f64, sz: f64) -> Result<Self> {
        let v = Self { sx, sy, sz };
        if !(v.norm_sqr() <= 1.0 + BLOCH_NORM_TOL) {
            return Err(Error::domain(format!(
                "Bloch vector ({sx}, {sy}, {sz}) lies outside the unit ball"
            )));
        }
        Ok(v)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.sx * self.sx + self.sy * self.sy + self.sz * self.sz
    }

    /// Excited-state population (1 + sz)/2.
    pub fn excited_population(&self) -> f64 {
        0.5 * (1.0 + self.sz)
    }
}

fn check_gamma(c: &MECoefficients) -> Result<()> {
    let g = c.gamma();
    if !(g > 0.0) {
        return Err(Error::domain(format!("net decay rate must be positive, got {g}")));
    }
    Ok(())
}

/// Quadrature decay rates (γ_x, γ_y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingRates {
    pub gamma_x: f64,
    pub gamma_y: f64,
}

pub fn dephasing_rates(c: &MECoefficients) -> DephasingRates {
    DephasingRates {
        gamma_x: c.gamma_x(),
        gamma_y: c.gamma_y(),
    }
}

/// Linewidth γ(N + 1/2) the dipole would have without squeezing.
pub fn thermal_linewidth(c: &MECoefficients) -> f64 {
    c.gamma_n + 0.5 * c.gamma()
}

/// Closed-form relaxation of the Bloch vector under constant coefficients.
pub fn evolve_bloch(s0: BlochVector, c: &MECoefficients, t: f64) -> Result<BlochVector> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    check_gamma(c)?;
    let two_n1 = 2.0 * c.big_n() + 1.0;
    let sz_ss = -1.0 / two_n1;
    Ok(BlochVector {
        sx: s0.sx * (-c.gamma_x() * t).exp(),
        sy: s0.sy * (-c.gamma_y() * t).exp(),
        sz: (s0.sz - sz_ss) * (-c.gamma() * two_n1 * t).exp() + sz_ss,
    })
}

/// Fixed point (0, 0, -1/(2N+1)).
pub fn steady_state(c: &MECoefficients) -> Result<BlochVector> {
    check_gamma(c)?;
    Ok(BlochVector {
        sx: 0.0,
        sy: 0.0,
        sz: -1.0 / (2.0 * c.big_n() + 1.0),
    })
}

/// Steady-state excited population N/(2N+1).
fn excited_fraction(c: &MECoefficients) -> f64 {
    let n = c.big_n();
    n / (2.0 * n + 1.0)
}

/// ⟨σ_+(t)σ_-(0)⟩ in the steady state, ½·N/(2N+1)·[e^{-γ_x|t|} + e^{-γ_y|t|}].
pub fn dipole_correlation(c: &MECoefficients, t: f64) -> f64 {
    let p = excited_fraction(c);
    let a = t.abs();
    0.5 * p * ((-c.gamma_x() * a).exp() + (-c.gamma_y() * a).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Fluorescence,
    ResonanceFluorescence,
}

impl SpectrumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumKind::Fluorescence => "fluorescence",
            SpectrumKind::ResonanceFluorescence => "resonance_fluorescence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Linewidths {
    /// Undriven: the two quadrature rates.
    Quadrature { gamma_x: f64, gamma_y: f64 },
    /// Driven: central width γ_φ and side-peak width Γ_φ.
    Driven { gamma_phi: f64, big_gamma_phi: f64 },
}

/// Drive parameters of the resonance-fluorescence spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    /// Rabi frequency Ω.
    pub rabi: f64,
    /// Drive phase θ, recovered from φ_rel = 2(θ - φ).
    pub theta: f64,
    pub phi_rel: f64,
}

/// A spectrum sampled against the detuning ω - ω_a.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub kind: SpectrumKind,
    pub omega_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub linewidths: Linewidths,
    pub drive: Option<Drive>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Input("frequency grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("frequency grid must be strictly increasing".into()));
    }
    Ok(())
}

fn lorentzian(width: f64, detuning: f64) -> f64 {
    width / (width * width + detuning * detuning)
}

/// S(ω) = (1/π)·N/(2N+1)·[γ_x/(γ_x² + ω²) + γ_y/(γ_y² + ω²)].
pub fn fluorescence_value(c: &MECoefficients, detuning: f64) -> f64 {
    let p = excited_fraction(c);
    p / PI * (lorentzian(c.gamma_x(), detuning) + lorentzian(c.gamma_y(), detuning))
}

pub fn fluorescence_spectrum(c: &MECoefficients, omega_grid: &[f64]) -> Result<SpectrumCurve> {
    check_gamma(c)?;
    check_grid(omega_grid)?;
    Ok(SpectrumCurve {
        kind: SpectrumKind::Fluorescence,
        omega_grid: omega_grid.to_vec(),
        values: omega_grid.iter().map(|&w| fluorescence_value(c, w)).collect(),
        linewidths: Linewidths::Quadrature {
            gamma_x: c.gamma_x(),
            gamma_y: c.gamma_y(),
        },
        drive: None,
    })
}

/// Central and side-peak widths of the driven spectrum for relative phase φ_rel:
/// γ_φ = γ(N + |M|cos φ_rel + 1/2), Γ_φ = (3/2)γ(N - |M|cos φ_rel/3 + 1/2).
pub fn driven_widths(c: &MECoefficients, phi_rel: f64) -> (f64, f64) {
    let g = c.gamma();
    let (n, m) = (c.big_n(), c.big_m().norm());
    let cos = phi_rel.cos();
    (g * (n + m * cos + 0.5), 1.5 * g * (n - m * cos / 3.0 + 0.5))
}

/// Three-Lorentzian spectrum with unit prefactor: a central peak of width
/// γ_φ and side peaks of width Γ_φ at ±Ω.
pub fn resonance_fluorescence(
    c: &MECoefficients,
    rabi: f64,
    phi_rel: f64,
    omega_grid: &[f64],
) -> Result<SpectrumCurve> {
    check_gamma(c)?;
    check_grid(omega_grid)?;
    if !(rabi > 0.0) || !rabi.is_finite() {
        return Err(Error::domain(format!("Rabi frequency must be > 0, got {rabi}")));
    }
    let (gp, big_gp) = driven_widths(c, phi_rel);
    if rabi < 10.0 * c.gamma_y() {
        log::warn!(
            "Rabi frequency {rabi} is not much larger than the decay rates (gamma_y = {}); \
             the three-peak form assumes strong driving",
            c.gamma_y()
        );
    }
    let values = omega_grid
        .iter()
        .map(|&w| lorentzian(gp, w) + lorentzian(big_gp, w + rabi) + lorentzian(big_gp, w - rabi))
        .collect();
    Ok(SpectrumCurve {
        kind: SpectrumKind::ResonanceFluorescence,
        omega_grid: omega_grid.to_vec(),
        values,
        linewidths: Linewidths::Driven {
            gamma_phi: gp,
            big_gamma_phi: big_gp,
        },
        drive: Some(Drive {
            rabi,
            theta: 0.5 * phi_rel + c.phi_squeeze(),
            phi_rel,
        }),
    })
}

/// `n` equally spaced points on [lo, hi].
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
