//! Master-equation coefficients {Δ, γN, γ(N+1), γM} of the effective
//! squeezed reservoir, their derived quantities, and squeezing classification.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modulation::{sinusoidal_fourier, validate_squeezing_constraint, FourierModulation};
use crate::reservoir::{LorentzianReservoir, Response};
use crate::specfun::{bessel_j, bessel_j_range, sinc_kernel, BesselOrderRange};

/// Relative change allowed when the sideband window is doubled.
pub const QMAX_REL_TOL: f64 = 1e-6;
/// Relative change allowed when the finite-time quadrature is refined.
pub const QUAD_REL_TOL: f64 = 1e-4;
/// Class-boundary tolerance; values within it fall into the lower class.
pub const CLASS_TOL: f64 = 1e-9;
/// Largest sideband window tried by the automatic truncation check.
pub const QMAX_LIMIT: i32 = 320;

/// The four master-equation rates. γ, N and M follow from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MECoefficients {
    /// Hamiltonian correction Δ; informational only.
    pub delta_shift: f64,
    pub gamma_n: f64,
    pub gamma_np1: f64,
    pub gamma_m: Complex64,
}

impl MECoefficients {
    /// Net decay rate γ = γ(N+1) - γN.
    pub fn gamma(&self) -> f64 {
        self.gamma_np1 - self.gamma_n
    }

    pub fn big_n(&self) -> f64 {
        self.gamma_n / self.gamma()
    }

    pub fn big_m(&self) -> Complex64 {
        self.gamma_m / self.gamma()
    }

    /// Squeezing angle φ = arg(M)/2.
    pub fn phi_squeeze(&self) -> f64 {
        0.5 * self.gamma_m.arg()
    }

    /// Decay rate of the squeezed quadrature, γ(N - |M| + 1/2).
    pub fn gamma_x(&self) -> f64 {
        self.gamma_n - self.gamma_m.norm() + 0.5 * self.gamma()
    }

    /// Decay rate of the anti-squeezed quadrature, γ(N + |M| + 1/2).
    pub fn gamma_y(&self) -> f64 {
        self.gamma_n + self.gamma_m.norm() + 0.5 * self.gamma()
    }

    /// Largest relative difference between two coefficient sets, measured
    /// against the larger of γN and γ(N+1).
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        let scale = self
            .gamma_n
            .abs()
            .max(self.gamma_np1.abs())
            .max(f64::MIN_POSITIVE);
        [
            (self.gamma_n - other.gamma_n).abs(),
            (self.gamma_np1 - other.gamma_np1).abs(),
            (self.gamma_m - other.gamma_m).norm(),
            (self.delta_shift - other.delta_shift).abs(),
        ]
        .iter()
        .fold(0.0_f64, |a, b| a.max(*b))
            / scale
    }
}

/// Position of |M| relative to the classical (N) and quantum (√(N(N+1))) bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SqueezingClass {
    None,
    Classical,
    Quantum,
    Unphysical,
}

impl SqueezingClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SqueezingClass::None => "none",
            SqueezingClass::Classical => "classical",
            SqueezingClass::Quantum => "quantum",
            SqueezingClass::Unphysical => "unphysical",
        }
    }
}

impl std::fmt::Display for SqueezingClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Squeezing class plus |M|/√(N(N+1)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squeezing {
    pub class: SqueezingClass,
    pub ratio_to_bound: f64,
}

pub fn classify_squeezing(c: &MECoefficients) -> Result<Squeezing> {
    let gamma = c.gamma();
    if !(gamma > 0.0) {
        return Err(Error::domain(format!("net decay rate must be positive, got {gamma}")));
    }
    let n = c.big_n();
    if n < 0.0 {
        return Err(Error::domain(format!("N must be >= 0, got {n}")));
    }
    let m = c.big_m().norm();
    let bound = (n * (n + 1.0)).sqrt();
    let ratio_to_bound = if bound > 0.0 {
        m / bound
    } else if m == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let slack = |v: f64| v + CLASS_TOL * v.max(1.0);
    let class = if m < CLASS_TOL {
        SqueezingClass::None
    } else if m <= slack(n) {
        SqueezingClass::Classical
    } else if m <= slack(bound) {
        SqueezingClass::Quantum
    } else {
        SqueezingClass::Unphysical
    };
    Ok(Squeezing {
        class,
        ratio_to_bound,
    })
}

/// Default resonance tolerance for the γM pairing, 1e-9·ω_a.
pub fn default_pair_tol(omega_a: f64) -> f64 {
    1e-9 * omega_a
}

/// Long-time (Markovian) coefficients for an arbitrary sideband set.
///
/// γM collects the pairs with |ν_q + ν_q' + 2ω_a| < `pair_tol`; if there
/// are none, γM = 0 and a warning is logged.
pub fn longtime_coefficients(
    fm: &FourierModulation,
    resp: &dyn Response,
    omega_a: f64,
    pair_tol: f64,
) -> MECoefficients {
    let mut gamma_n = 0.0;
    let mut gamma_np1 = 0.0;
    let mut delta_shift = 0.0;
    let mut gamma_m = Complex64::new(0.0, 0.0);
    let mut pairs = 0usize;

    for s in &fm.terms {
        let w = omega_a + s.nu;
        let weight = s.eps.norm_sqr();
        let (g_up, g_down) = (resp.gamma_t(w), resp.gamma_t(-w));
        let (d_up, d_down) = (resp.delta_t(w), resp.delta_t(-w));
        gamma_n += weight * g_down;
        gamma_np1 += weight * g_up;
        delta_shift += weight * (d_up - d_down);

        let bracket = Complex64::new(0.5 * (g_up + g_down), d_up - d_down);
        for p in &fm.terms {
            if (s.nu + p.nu + 2.0 * omega_a).abs() < pair_tol {
                gamma_m += s.eps * p.eps * bracket;
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        log::warn!("no sideband pair satisfies the squeezing resonance; gammaM = 0");
    }
    MECoefficients {
        delta_shift,
        gamma_n,
        gamma_np1,
        gamma_m,
    }
}

/// Coefficients together with how the sideband truncation was checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Converged {
    pub coeffs: MECoefficients,
    pub qmax_used: i32,
    /// Relative change when the sideband window was doubled.
    pub convergence_estimate: f64,
}

/// Bessel-sum coefficients for δ(t) = z·m·ω_a[1 - sin(m·ω_a·t)] on a
/// Lorentzian cavity, with the γM phase factor e^{-2iz}(-1)^{1/m+z}
/// taken on the principal branch e^{iπ(1/m+z)}.
///
/// The sum over q runs over -qmax..=qmax; the result is recomputed with
/// 2·qmax and must agree to [`QMAX_REL_TOL`]. If it does not, the window is
/// doubled until it does (up to [`QMAX_LIMIT`]).
pub fn sinusoidal_coefficients(z: f64, m: f64, res: &LorentzianReservoir, qmax: i32) -> Result<MECoefficients> {
    sinusoidal_converged(z, m, res, qmax).map(|c| c.coeffs)
}

pub fn sinusoidal_converged(z: f64, m: f64, res: &LorentzianReservoir, qmax: i32) -> Result<Converged> {
    sinusoidal_converged_with(z, m, res, res.omega_a, qmax)
}

/// [`sinusoidal_converged`] for an arbitrary reservoir response, with the
/// atomic frequency given explicitly.
pub fn sinusoidal_converged_with(
    z: f64,
    m: f64,
    resp: &dyn Response,
    omega_a: f64,
    qmax: i32,
) -> Result<Converged> {
    if qmax < 20 {
        return Err(Error::domain(format!("qmax must be >= 20, got {qmax}")));
    }
    let constraint = validate_squeezing_constraint(z, m);
    if !constraint.valid {
        return Err(Error::domain(format!(
            "squeezing term needs 2z and 2/m integer, got z = {z}, m = {m}"
        )));
    }
    let mut q = qmax;
    let mut base = sinusoidal_sum(z, m, resp, omega_a, q, constraint.q_pairing)?;
    loop {
        let doubled = sinusoidal_sum(z, m, resp, omega_a, 2 * q, constraint.q_pairing)?;
        let estimate = doubled.max_rel_diff(&base);
        if estimate <= QMAX_REL_TOL {
            return Ok(Converged {
                coeffs: base,
                qmax_used: q,
                convergence_estimate: estimate,
            });
        }
        if 2 * q > QMAX_LIMIT {
            return Err(Error::NonConvergence {
                what: format!("Bessel sum at qmax = {q}"),
                estimate,
                tolerance: QMAX_REL_TOL,
            });
        }
        log::info!("Bessel sum not converged at qmax = {q} (change {estimate:.2e}); doubling");
        q *= 2;
        base = doubled;
    }
}

fn sinusoidal_sum(
    z: f64,
    m: f64,
    res: &dyn Response,
    omega_a: f64,
    qmax: i32,
    pairing: i32,
) -> Result<MECoefficients> {
    // validates z, m and ω_a exactly as the sideband decomposition does
    sinusoidal_fourier(z, m, omega_a, 1)?;
    let range = BesselOrderRange::symmetric(qmax)?;
    let jq = bessel_j_range(range, z)?;
    let prefactor = Complex64::from_polar(1.0, -2.0 * z) * Complex64::from_polar(1.0, PI * (1.0 / m + z));

    let mut c = MECoefficients {
        delta_shift: 0.0,
        gamma_n: 0.0,
        gamma_np1: 0.0,
        gamma_m: Complex64::new(0.0, 0.0),
    };
    for (q, j) in range.orders().zip(jq) {
        let w = omega_a * (1.0 + m * z + m * q as f64);
        let (g_up, g_down) = (res.gamma_t(w), res.gamma_t(-w));
        let (d_up, d_down) = (res.delta_t(w), res.delta_t(-w));
        c.gamma_n += j * j * g_down;
        c.gamma_np1 += j * j * g_up;
        c.delta_shift += j * j * (d_up - d_down);
        let partner = bessel_j(-q + pairing, z)?;
        c.gamma_m += prefactor * (j * partner) * Complex64::new(0.5 * (g_up + g_down), d_up - d_down);
    }
    Ok(c)
}

/// Textbook rotating-wave coefficients of an unmodulated atom on resonance
/// with the cavity: only the resonant peak contributes, γN = γ_c·n_a and
/// γ(N+1) = γ_c(n_a + 1), with no shift and no squeezing. The full
/// unmodulated model differs from this by the far off-resonant image of the
/// cavity line at -ω_a, a relative correction of order (κ/ω_a)².
pub fn resonant_rwa_coefficients(res: &LorentzianReservoir) -> MECoefficients {
    MECoefficients {
        delta_shift: 0.0,
        gamma_n: res.gamma_c * res.n_a,
        gamma_np1: res.gamma_c * (res.n_a + 1.0),
        gamma_m: Complex64::new(0.0, 0.0),
    }
}

/// Frequency quadrature for the finite-time kernel integrals
/// ∫ δ_t(ω) f(ω + c) dω with δ_t = sin(ωt)/(πω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Half-width of the integration window around each frequency.
    pub window: f64,
    /// Minimum number of Simpson points over the window.
    pub min_points: usize,
    /// Points per kernel oscillation period 2π/t.
    pub points_per_period: f64,
    /// Allowed relative change when the point count is doubled.
    pub rel_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            window: 10.0,
            min_points: 2001,
            points_per_period: 16.0,
            rel_tol: QUAD_REL_TOL,
        }
    }
}

impl QuadConfig {
    fn points(&self, t: f64) -> usize {
        let by_kernel = (self.points_per_period * self.window * t / PI).ceil() as usize;
        let n = by_kernel.max(self.min_points).max(3);
        n | 1
    }
}

/// Simpson weights multiplied by the normalised kernel, on a symmetric grid,
/// plus the kernel tails beyond the window with f frozen at the window edge,
/// ∫_W^∞ sin(ωt)/(πω) f(c ± ω) dω ≈ f(c ± W)·(1 - ∫_{-W}^{W} δ_t)/2.
/// The tail term is used only once the window holds many kernel
/// oscillations (Wt ≥ 20π); for shorter times it is dropped.
struct KernelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    window: f64,
    tail_weight: f64,
}

impl KernelRule {
    fn new(t: f64, window: f64, points: usize) -> Self {
        let h = 2.0 * window / (points - 1) as f64;
        let mut nodes = Vec::with_capacity(points);
        let mut weights = Vec::with_capacity(points);
        for k in 0..points {
            let w = -window + k as f64 * h;
            let simpson = if k == 0 || k == points - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            nodes.push(w);
            weights.push(simpson * h / 3.0 * sinc_kernel(w, t) / PI);
        }
        let mass: f64 = weights.iter().sum();
        let tail_weight = if window * t >= 20.0 * PI { 0.5 * (1.0 - mass) } else { 0.0 };
        Self {
            nodes,
            weights,
            window,
            tail_weight,
        }
    }

    fn apply<F: Fn(f64) -> f64>(&self, f: F, c: f64) -> f64 {
        let inner: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(w, k)| k * f(w + c))
            .sum();
        inner + self.tail_weight * (f(c + self.window) + f(c - self.window))
    }
}

/// Kernel-smoothed response at ±(ω_a + ν_q) for every sideband.
struct Smoothed {
    g_up: f64,
    g_down: f64,
    d_up: f64,
    d_down: f64,
}

fn smooth_all(fm: &FourierModulation, resp: &dyn Response, omega_a: f64, rule: &KernelRule) -> Vec<Smoothed> {
    fm.terms
        .iter()
        .map(|s| {
            let c = omega_a + s.nu;
            Smoothed {
                g_up: rule.apply(|w| resp.gamma_t(w), c),
                g_down: rule.apply(|w| resp.gamma_t(w), -c),
                d_up: rule.apply(|w| resp.delta_t(w), c),
                d_down: rule.apply(|w| resp.delta_t(w), -c),
            }
        })
        .collect()
}

fn assemble(fm: &FourierModulation, omega_a: f64, t: f64, k: &[Smoothed]) -> MECoefficients {
    let mut c = MECoefficients {
        delta_shift: 0.0,
        gamma_n: 0.0,
        gamma_np1: 0.0,
        gamma_m: Complex64::new(0.0, 0.0),
    };
    for (s, ks) in fm.terms.iter().zip(k) {
        let bracket = Complex64::new(0.5 * (ks.g_up + ks.g_down), ks.d_up - ks.d_down);
        for p in &fm.terms {
            let a = s.eps * p.eps.conj() * Complex64::from_polar(1.0, (s.nu - p.nu) * t);
            c.gamma_n += a.re * ks.g_down + 2.0 * a.im * ks.d_down;
            c.gamma_np1 += a.re * ks.g_up - 2.0 * a.im * ks.d_up;
            c.delta_shift += a.re * (ks.d_up - ks.d_down) + a.im * 0.5 * (ks.g_up + ks.g_down);
            let phase = Complex64::from_polar(1.0, (s.nu + p.nu + 2.0 * omega_a) * t);
            c.gamma_m += s.eps * p.eps * phase * bracket;
        }
    }
    c
}

/// Finite-time coefficients, keeping the oscillating cross terms.
///
/// The window integrals use `quad`; they are repeated with twice the
/// points and must agree to `quad.rel_tol`.
pub fn nonmarkov_coefficients(
    t: f64,
    fm: &FourierModulation,
    resp: &dyn Response,
    omega_a: f64,
    quad: &QuadConfig,
) -> Result<MECoefficients> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be > 0, got {t}")));
    }
    let n = quad.points(t);
    let coarse = assemble(fm, omega_a, t, &smooth_all(fm, resp, omega_a, &KernelRule::new(t, quad.window, n)));
    let fine = assemble(
        fm,
        omega_a,
        t,
        &smooth_all(fm, resp, omega_a, &KernelRule::new(t, quad.window, 2 * n - 1)),
    );
    let estimate = fine.max_rel_diff(&coarse);
    if estimate > quad.rel_tol {
        return Err(Error::NonConvergence {
            what: format!("finite-time kernel quadrature at t = {t}"),
            estimate,
            tolerance: quad.rel_tol,
        });
    }
    Ok(fine)
}

/// Period over which the oscillating finite-time terms average out:
/// 2π over the sideband spacing, or π/ω_a without modulation.
pub fn averaging_period(fm: &FourierModulation, omega_a: f64) -> f64 {
    match fm.fundamental {
        Some(f) if f > 0.0 => TAU / f,
        _ => PI / omega_a,
    }
}

/// Finite-time coefficients averaged over one [`averaging_period`]
/// starting at `t`, with `samples` equally spaced evaluations.
pub fn nonmarkov_period_average(
    t: f64,
    fm: &FourierModulation,
    resp: &dyn Response,
    omega_a: f64,
    quad: &QuadConfig,
    samples: usize,
) -> Result<MECoefficients> {
    let samples = samples.max(1);
    let period = averaging_period(fm, omega_a);
    let mut acc = MECoefficients {
        delta_shift: 0.0,
        gamma_n: 0.0,
        gamma_np1: 0.0,
        gamma_m: Complex64::new(0.0, 0.0),
    };
    for k in 0..samples {
        let tk = t + period * k as f64 / samples as f64;
        let c = nonmarkov_coefficients(tk, fm, resp, omega_a, quad)?;
        acc.delta_shift += c.delta_shift;
        acc.gamma_n += c.gamma_n;
        acc.gamma_np1 += c.gamma_np1;
        acc.gamma_m += c.gamma_m;
    }
    let s = samples as f64;
    acc.delta_shift /= s;
    acc.gamma_n /= s;
    acc.gamma_np1 /= s;
    acc.gamma_m /= s;
    Ok(acc)
}

/// N and M (in units of the flat coupling rate) for a flat thermal spectrum
/// and a modulation with only the ε_0 and ε_{-2} sidebands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatCase {
    pub n_over_unit: f64,
    pub m_over_unit: Complex64,
}

pub fn flat_case_oracle(n: f64, eps0: Complex64, epsm2: Complex64) -> FlatCase {
    FlatCase {
        n_over_unit: eps0.norm_sqr() * n + epsm2.norm_sqr() * (n + 1.0),
        m_over_unit: eps0 * epsm2 * (2.0 * n + 1.0),
    }
}
