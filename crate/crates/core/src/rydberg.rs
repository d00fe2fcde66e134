//! Circular Rydberg transition dipole element and order-of-magnitude rate
//! estimates for an experiment, in SI units.
//!
//! Transition |n, n-1, n-1⟩ → |n, n-2, n-2⟩ of hydrogen: d = R·A with the
//! radial integral R (units of a₀) and the angular factor A.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mecoeff::sinusoidal_coefficients;
use crate::reservoir::LorentzianReservoir;
use crate::specfun::{clebsch_gordan, log_gamma, AngularMomentumLabels};

/// CODATA 2018 values.
pub mod constants {
    /// Elementary charge, C.
    pub const E_CHARGE: f64 = 1.602_176_634e-19;
    /// Reduced Planck constant, J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Speed of light, m/s.
    pub const C_LIGHT: f64 = 299_792_458.0;
    /// Vacuum permittivity, F/m.
    pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
    /// Bohr radius, m.
    pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
    /// Boltzmann constant, J/K.
    pub const K_BOLTZMANN: f64 = 1.380_649e-23;
}

use constants::*;

/// Factor that "≫" stands for in the validity checks.
pub const MUCH_GREATER: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RydbergTransition {
    pub n: u32,
    /// Radial integral, units of a₀.
    pub radial_r: f64,
    /// Angular factor, dimensionless.
    pub angular_a: f64,
    /// Dipole element R·A, units of e·a₀.
    pub dipole_d: f64,
}

fn check_n(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("principal quantum number must be >= 2, got {n}")));
    }
    Ok(())
}

/// R = √(1/((2n-1)!(2n-2)!))·½·[(n-1)Γ(2n+1) - ½Γ(2n+2)], in a₀.
///
/// The bracket is formed as a signed difference of logarithms so that no
/// factorial is ever materialised.
pub fn radial_integral(n: u32) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    let ln_a = (nf - 1.0).ln() + log_gamma(2.0 * nf + 1.0)?;
    let ln_b = 0.5f64.ln() + log_gamma(2.0 * nf + 2.0)?;
    // a - b with a < b for every n: sign is negative, magnitude e^{ln_b}(1 - e^{ln_a - ln_b})
    let (sign, ln_mag) = if ln_a >= ln_b {
        (1.0, ln_a + (-(ln_b - ln_a).exp()).ln_1p())
    } else {
        (-1.0, ln_b + (-(ln_a - ln_b).exp()).ln_1p())
    };
    let ln_norm = -0.5 * (log_gamma(2.0 * nf)? + log_gamma(2.0 * nf - 1.0)?);
    Ok(sign * (ln_norm + 0.5f64.ln() + ln_mag).exp())
}

fn cg(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> Result<f64> {
    Ok(clebsch_gordan(AngularMomentumLabels::new(j1, m1, j2, m2, j, m)?))
}

/// A = √((2n-3)/(2(2n-1)))·⟨n-2 0; 1 0|n-1 0⟩·[⟨n-2 n-2; 1 -1|n-1 n-1⟩ - ⟨n-2 n-2; 1 1|n-1 n-1⟩].
///
/// The first bracket entry violates m1 + m2 = M and vanishes, so A is
/// negative with Condon-Shortley phases: A = -√((n-1)/(2(2n-1))).
pub fn angular_factor(n: u32) -> Result<f64> {
    check_n(n)?;
    let l = n as f64 - 2.0;
    let pre = ((2.0 * n as f64 - 3.0) / (2.0 * (2.0 * n as f64 - 1.0))).sqrt();
    let c0 = cg(l, 0.0, 1.0, 0.0, l + 1.0, 0.0)?;
    let c_minus = cg(l, l, 1.0, -1.0, l + 1.0, l + 1.0)?;
    let c_plus = cg(l, l, 1.0, 1.0, l + 1.0, l + 1.0)?;
    Ok(pre * c0 * (c_minus - c_plus))
}

pub fn dipole_moment(n: u32) -> Result<RydbergTransition> {
    let radial_r = radial_integral(n)?;
    let angular_a = angular_factor(n)?;
    Ok(RydbergTransition {
        n,
        radial_r,
        angular_a,
        dipole_d: radial_r * angular_a,
    })
}

fn positive(v: f64, name: &str) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain(format!("{name} must be > 0, got {v}")));
    }
    Ok(())
}

/// Free-space spontaneous emission rate d²ω³/(3πε₀ħc³) in s⁻¹, for d in e·a₀
/// and ω_a in rad/s.
pub fn spontaneous_rate(d_ea0: f64, omega_a: f64) -> Result<f64> {
    positive(d_ea0.abs(), "dipole")?;
    positive(omega_a, "omega_a")?;
    let d = d_ea0 * E_CHARGE * BOHR_RADIUS;
    Ok(d * d * omega_a.powi(3) / (3.0 * PI * EPSILON_0 * HBAR * C_LIGHT.powi(3)))
}

/// Thermal decay rate (3/2π)·γ₀·k_B T/(ħκ) in s⁻¹.
pub fn thermal_rate_estimate(gamma_0: f64, temperature: f64, kappa: f64) -> Result<f64> {
    positive(gamma_0, "gamma_0")?;
    positive(kappa, "kappa")?;
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::domain(format!("temperature must be >= 0, got {temperature}")));
    }
    Ok(3.0 / (2.0 * PI) * gamma_0 * K_BOLTZMANN * temperature / (HBAR * kappa))
}

/// Vacuum Rabi coupling g = d·√(ω_a/(2ε₀ħV)) for a mode volume V = λ_a³.
pub fn vacuum_coupling(d_ea0: f64, omega_a: f64) -> Result<f64> {
    positive(d_ea0.abs(), "dipole")?;
    positive(omega_a, "omega_a")?;
    let lambda = 2.0 * PI * C_LIGHT / omega_a;
    let volume = lambda.powi(3);
    let d = d_ea0.abs() * E_CHARGE * BOHR_RADIUS;
    Ok(d * (omega_a / (2.0 * EPSILON_0 * HBAR * volume)).sqrt())
}

/// One "a ≫ b" requirement, taken to mean a ≥ 10·b.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityGate {
    pub name: &'static str,
    pub larger: f64,
    pub smaller: f64,
    pub passed: bool,
}

impl ValidityGate {
    fn new(name: &'static str, larger: f64, smaller: f64) -> Self {
        let passed = larger >= MUCH_GREATER * smaller;
        if !passed {
            log::warn!("validity condition {name} fails: {larger:.3e} vs {smaller:.3e}");
        }
        Self {
            name,
            larger,
            smaller,
            passed,
        }
    }
}

/// Rates for an experiment; all frequencies and rates in s⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentEstimate {
    pub omega_a: f64,
    pub kappa: f64,
    /// Kelvin.
    pub temperature: f64,
    /// Dipole element, e·a₀.
    pub dipole: f64,
    pub gamma_0: f64,
    pub gamma_t: f64,
    pub g: f64,
    pub gamma_c: Option<f64>,
    /// Slow-quadrature lifetime for the n_a = 0, z = 1, m = 2 operating point.
    pub gamma_x_inv: Option<f64>,
    pub gates: Vec<ValidityGate>,
}

impl ExperimentEstimate {
    pub fn all_gates_pass(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }
}

fn gates(omega_a: f64, kappa: f64, g: f64, gamma_0: f64, gamma_t: f64) -> Vec<ValidityGate> {
    vec![
        ValidityGate::new("omega_a >> kappa", omega_a, kappa),
        ValidityGate::new("kappa >> g", kappa, g),
        ValidityGate::new("kappa >> gamma_0", kappa, gamma_0),
        ValidityGate::new("kappa >> gamma_T", kappa, gamma_t),
    ]
}

/// Thermal-cavity estimate: γ₀ from the dipole, γ_T from the temperature.
pub fn rate_estimate(d_ea0: f64, omega_a: f64, kappa: f64, temperature: f64) -> Result<ExperimentEstimate> {
    let gamma_0 = spontaneous_rate(d_ea0, omega_a)?;
    let gamma_t = thermal_rate_estimate(gamma_0, temperature, kappa)?;
    let g = vacuum_coupling(d_ea0, omega_a)?;
    Ok(ExperimentEstimate {
        omega_a,
        kappa,
        temperature,
        dipole: d_ea0,
        gamma_0,
        gamma_t,
        g,
        gamma_c: None,
        gamma_x_inv: None,
        gates: gates(omega_a, kappa, g, gamma_0, gamma_t),
    })
}

/// Zero-temperature cavity estimate: γ_c = 2π·4g²/κ, and the slow
/// quadrature lifetime 1/γ_x using the n_a = 0, z = 1, m = 2, ω_a = 10κ
/// coefficients in units of γ_c.
pub fn circuit_qed_estimate(omega_a: f64, kappa: f64, d_ea0: f64) -> Result<ExperimentEstimate> {
    positive(kappa, "kappa")?;
    let gamma_0 = spontaneous_rate(d_ea0, omega_a)?;
    let g = vacuum_coupling(d_ea0, omega_a)?;
    let gamma_c = 2.0 * PI * 4.0 * g * g / kappa;
    let quantum = sinusoidal_coefficients(1.0, 2.0, &LorentzianReservoir::normalized(10.0, 0.0)?, 20)?;
    let gamma_x = quantum.gamma_x() * gamma_c;
    Ok(ExperimentEstimate {
        omega_a,
        kappa,
        temperature: 0.0,
        dipole: d_ea0,
        gamma_0,
        gamma_t: 0.0,
        g,
        gamma_c: Some(gamma_c),
        gamma_x_inv: Some(1.0 / gamma_x),
        gates: gates(omega_a, kappa, g, gamma_0, 0.0),
    })
}
