//! Independent oracles for values the library computes by other means.

use num_bigint::BigUint;
use thermosqueeze::mecoeff::{default_pair_tol, longtime_coefficients};
use thermosqueeze::modulation::{numeric_fourier, sinusoidal_fourier, PeriodicDelta};
use thermosqueeze::reservoir::{generic_response, Occupation, PvQuadrature};
use thermosqueeze::specfun::{bessel_j, log_gamma};
use thermosqueeze::{GenericReservoir, LorentzianReservoir, Response};

/// ln(n!) from the exact integer, via its leading 17 digits and length.
fn ln_factorial_exact(n: u32) -> f64 {
    let mut f = BigUint::from(1u32);
    for k in 2..=n {
        f *= k;
    }
    let digits = f.to_str_radix(10);
    let keep = digits.len().min(17);
    let lead: f64 = digits[..keep].parse().unwrap();
    lead.ln() + (digits.len() - keep) as f64 * std::f64::consts::LN_10
}

#[test]
fn log_gamma_against_big_integer_factorials() {
    for &n in &[5u32, 20, 50, 102, 150, 200] {
        let want = ln_factorial_exact(n);
        let got = log_gamma(n as f64 + 1.0).unwrap();
        assert!((got - want).abs() < 1e-13 * want, "ln({n}!): {got} vs {want}");
    }
}

/// Power series Σ_k (-1)^k (x/2)^{2k+n} / (k!(n+k)!), summed until negligible.
fn bessel_series(n: u32, x: f64) -> f64 {
    let mut term = (x / 2.0).powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
    let mut sum = 0.0;
    for k in 0..200 {
        sum += term;
        term *= -(x * x / 4.0) / ((k + 1) as f64 * (n + k + 1) as f64);
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

#[test]
fn bessel_against_power_series() {
    for &x in &[0.1, 0.5, 1.0, 2.0, 4.0] {
        for n in 0..=30u32 {
            let want = bessel_series(n, x);
            let got = bessel_j(n as i32, x).unwrap();
            assert!((got - want).abs() < 1e-12 * want.abs() + 1e-16, "J_{n}({x})");
        }
    }
}

#[test]
fn hot_lorentzian_principal_value_matches_closed_form() {
    let r = LorentzianReservoir::normalized(10.0, 1e3).unwrap();
    let grid: Vec<f64> = (0..60001).map(|i| -30.0 + i as f64 * 1e-3).collect();
    let g0 = grid.iter().map(|&w| r.g0(w)).collect();
    let tab = GenericReservoir::new(grid, g0, Occupation::Fixed { n: 1e3 }).unwrap();
    let pv = PvQuadrature::default();
    // error budget relative to the largest |Δ_T| on the grid
    let scale = (0..=6000)
        .map(|i| r.delta_t(-30.0 + i as f64 * 0.01).abs())
        .fold(0.0, f64::max);
    for &w in &[0.0, 9.0, 10.0, 11.0] {
        let p = generic_response(w, &tab, &pv).unwrap();
        let exact = r.delta_t(w);
        assert!((p.delta_t - exact).abs() < 1e-6 * scale, "w={w}: {} vs {exact}", p.delta_t);
    }
}

#[test]
fn numeric_and_bessel_sidebands_give_same_coefficients() {
    let r = LorentzianReservoir::normalized(10.0, 1e3).unwrap();
    let delta = PeriodicDelta::sinusoidal(1.0, 2.0, 10.0).unwrap();
    let numeric = numeric_fourier(&delta, 20, 4096).unwrap();
    let bessel = sinusoidal_fourier(1.0, 2.0, 10.0, 20).unwrap();
    let tol = default_pair_tol(10.0) * 1e3;
    let a = longtime_coefficients(&numeric, &r, 10.0, tol);
    let b = longtime_coefficients(&bessel, &r, 10.0, tol);
    assert!((a.gamma_n - b.gamma_n).abs() < 1e-6 * b.gamma_n);
    assert!((a.gamma_np1 - b.gamma_np1).abs() < 1e-6 * b.gamma_np1);
    // the numeric phase is referenced to t = 0 exactly like the Bessel form
    assert!((a.gamma_m - b.gamma_m).norm() < 1e-6 * b.gamma_np1, "{} vs {}", a.gamma_m, b.gamma_m);
}
