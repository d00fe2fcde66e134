//! Level-spacing modulation δ(t) and its sideband decomposition
//! ε(t) = exp(i∫_0^t δ) = Σ_q ε_q exp(iν_q t).

use std::f64::consts::TAU;
use std::fmt;
use std::io::Read;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{bessel_j_range, BesselOrderRange};

/// Default sideband truncation, q ∈ [-20, 20].
pub const DEFAULT_QMAX: i32 = 20;
/// Default number of samples per period for numerically decomposed modulation.
pub const DEFAULT_QUAD_POINTS: usize = 4096;
/// Parseval deficit above which a numeric decomposition is rejected.
pub const PARSEVAL_LIMIT: f64 = 1e-4;

/// δ(t) over one period, either tabulated on a uniform grid or as a closure.
#[derive(Clone)]
pub enum DeltaSource {
    /// Samples at t_k = k·T/n, k = 0..n (the endpoint t = T is not stored).
    Tabulated(Vec<f64>),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for DeltaSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaSource::Tabulated(v) => write!(f, "Tabulated({} samples)", v.len()),
            DeltaSource::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// A periodic modulation δ(t) with period `period`.
#[derive(Debug, Clone)]
pub struct PeriodicDelta {
    period: f64,
    source: DeltaSource,
}

impl PeriodicDelta {
    pub fn from_fn<F>(period: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_period(period)?;
        Ok(Self {
            period,
            source: DeltaSource::Function(Arc::new(f)),
        })
    }

    /// Uniform samples at t_k = k·period/n.
    pub fn from_samples(period: f64, samples: Vec<f64>) -> Result<Self> {
        check_period(period)?;
        if samples.len() < 4 {
            return Err(Error::Input(format!(
                "need at least 4 samples of delta(t), got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("delta(t) samples must be finite".into()));
        }
        Ok(Self {
            period,
            source: DeltaSource::Tabulated(samples),
        })
    }

    /// The sinusoidal drive δ(t) = z·m·ω_a·[1 - sin(m·ω_a·t)] as a generic input.
    pub fn sinusoidal(z: f64, m: f64, omega_a: f64) -> Result<Self> {
        check_sinusoidal(z, m, omega_a)?;
        let w = m * omega_a;
        Self::from_fn(TAU / w, move |t| z * w * (1.0 - (w * t).sin()))
    }

    /// Two-column CSV `(t, delta)` whose first and last rows are t = 0 and
    /// t = T; spacing must be uniform. Lines starting with `#` are skipped.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let (t, d) = read_two_columns(reader)?;
        if t.len() < 5 {
            return Err(Error::Input("modulation table needs at least 5 rows".into()));
        }
        let n = t.len() - 1;
        let period = t[n] - t[0];
        let dt = period / n as f64;
        for (k, tk) in t.iter().enumerate() {
            let want = t[0] + k as f64 * dt;
            if (tk - want).abs() > 1e-6 * dt {
                return Err(Error::Input(format!(
                    "modulation table must be uniformly spaced (row {k}: t = {tk}, expected {want})"
                )));
            }
        }
        Self::from_samples(period, d[..n].to_vec())
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// δ at `n` uniform points t_k = k·T/n.
    fn sample(&self, n: usize) -> Vec<f64> {
        let h = self.period / n as f64;
        match &self.source {
            DeltaSource::Function(f) => (0..n).map(|k| f(k as f64 * h)).collect(),
            DeltaSource::Tabulated(v) if v.len() == n => v.clone(),
            DeltaSource::Tabulated(v) => {
                let len = v.len();
                let at = |i: isize| v[i.rem_euclid(len as isize) as usize];
                (0..n)
                    .map(|k| {
                        // periodic four-point Lagrange
                        let s = k as f64 * len as f64 / n as f64;
                        let i = s.floor() as isize;
                        let u = s - i as f64;
                        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
                        -u * (u - 1.0) * (u - 2.0) / 6.0 * p0
                            + (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0 * p1
                            - (u + 1.0) * u * (u - 2.0) / 2.0 * p2
                            + (u + 1.0) * u * (u - 1.0) / 6.0 * p3
                    })
                    .collect()
            }
        }
    }
}

pub(crate) fn read_two_columns<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::Input(format!("row {row}: expected two columns")));
        }
        let (x, y) = match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => (x, y),
            // a non-numeric first row is a header
            _ if row == 0 && a.is_empty() => continue,
            _ => return Err(Error::Input(format!("row {row}: non-numeric value"))),
        };
        a.push(x);
        b.push(y);
    }
    Ok((a, b))
}

fn check_period(period: f64) -> Result<()> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::domain(format!("modulation period must be > 0, got {period}")));
    }
    Ok(())
}

fn check_sinusoidal(z: f64, m: f64, omega_a: f64) -> Result<()> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::domain(format!("modulation depth z must be finite and >= 0, got {z}")));
    }
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::domain(format!("modulation rate m must be finite and > 0, got {m}")));
    }
    if !omega_a.is_finite() || omega_a <= 0.0 {
        return Err(Error::domain(format!("omega_a must be finite and > 0, got {omega_a}")));
    }
    Ok(())
}

/// Which level-spacing modulation is applied.
#[derive(Debug, Clone)]
pub enum ModulationSpec {
    None,
    /// δ(t) = z·m·ω_a·[1 - sin(m·ω_a·t)].
    Sinusoidal { z: f64, m: f64 },
    GenericPeriodic(PeriodicDelta),
}

impl ModulationSpec {
    /// Sideband decomposition; `omega_a` only scales the sinusoidal case.
    pub fn fourier(&self, omega_a: f64, qmax: i32, quad_points: usize) -> Result<FourierModulation> {
        match self {
            ModulationSpec::None => Ok(FourierModulation::unmodulated()),
            ModulationSpec::Sinusoidal { z, m } => sinusoidal_fourier(*z, *m, omega_a, qmax),
            ModulationSpec::GenericPeriodic(d) => numeric_fourier(d, qmax, quad_points),
        }
    }
}

/// One sideband: amplitude ε_q at frequency ν_q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sideband {
    pub q: i32,
    pub eps: Complex64,
    pub nu: f64,
}

/// Truncated sideband decomposition of ε(t).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierModulation {
    pub terms: Vec<Sideband>,
    pub qmax: i32,
    /// Sideband spacing 2π/T, when the modulation is periodic.
    pub fundamental: Option<f64>,
}

impl FourierModulation {
    /// ε(t) = 1.
    pub fn unmodulated() -> Self {
        Self {
            terms: vec![Sideband {
                q: 0,
                eps: Complex64::new(1.0, 0.0),
                nu: 0.0,
            }],
            qmax: 0,
            fundamental: None,
        }
    }

    /// Σ_q |ε_q|².
    pub fn parseval_sum(&self) -> f64 {
        self.terms.iter().map(|s| s.eps.norm_sqr()).sum()
    }

    pub fn term(&self, q: i32) -> Option<&Sideband> {
        self.terms.iter().find(|s| s.q == q)
    }
}

/// ε_q = e^{-iz} i^q J_q(z), ν_q = (z+q)·m·ω_a for q ∈ [-qmax, qmax].
pub fn sinusoidal_fourier(z: f64, m: f64, omega_a: f64, qmax: i32) -> Result<FourierModulation> {
    check_sinusoidal(z, m, omega_a)?;
    if qmax < 1 {
        return Err(Error::domain(format!("qmax must be >= 1, got {qmax}")));
    }
    let range = BesselOrderRange::symmetric(qmax)?;
    let jq = bessel_j_range(range, z)?;
    let phase = Complex64::from_polar(1.0, -z);
    let terms = range
        .orders()
        .zip(jq)
        .map(|(q, j)| Sideband {
            q,
            eps: phase * i_pow(q) * j,
            nu: (z + q as f64) * m * omega_a,
        })
        .collect();
    Ok(FourierModulation {
        terms,
        qmax,
        fundamental: Some(m * omega_a),
    })
}

/// i^q for integer q, exact.
pub(crate) fn i_pow(q: i32) -> Complex64 {
    match q.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Sideband decomposition of an arbitrary periodic δ(t).
///
/// The phase ∫δ is accumulated with the trapezoid rule plus the
/// Euler-Maclaurin end correction -(h²/12)[δ'(t) - δ'(0)], which makes it
/// fourth-order. The mean of δ becomes a common frequency offset, so
/// ν_q = mean(δ) + 2πq/T, and ε_q is the trapezoid (DFT) projection of the
/// periodic remainder.
pub fn numeric_fourier(delta: &PeriodicDelta, qmax: i32, quad_points: usize) -> Result<FourierModulation> {
    if qmax < 1 {
        return Err(Error::domain(format!("qmax must be >= 1, got {qmax}")));
    }
    if quad_points < 64 {
        return Err(Error::domain(format!("quad_points must be >= 64, got {quad_points}")));
    }
    let n = quad_points;
    let period = delta.period;
    let h = period / n as f64;
    let d = delta.sample(n);
    let at = |k: usize| d[k % n];
    let mean = d.iter().sum::<f64>() / n as f64;
    let deriv = |k: usize| (at(k + 1) - d[(k + n - 1) % n]) / (2.0 * h);
    let d0 = deriv(0);

    let mut psi = Vec::with_capacity(n);
    let mut acc = 0.0;
    for k in 0..n {
        let t = k as f64 * h;
        let corrected = acc - h * h / 12.0 * (deriv(k) - d0);
        psi.push(corrected - mean * t);
        acc += 0.5 * h * (at(k) + at(k + 1));
    }

    let phases: Vec<Complex64> = psi.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    let omega0 = TAU / period;
    let terms: Vec<Sideband> = (-qmax..=qmax)
        .map(|q| {
            let step = Complex64::from_polar(1.0, -TAU * q as f64 / n as f64);
            let mut tw = Complex64::new(1.0, 0.0);
            let mut s = Complex64::new(0.0, 0.0);
            for (k, p) in phases.iter().enumerate() {
                if k % 256 == 0 {
                    tw = Complex64::from_polar(1.0, -TAU * q as f64 * k as f64 / n as f64);
                }
                s += p * tw;
                tw *= step;
            }
            Sideband {
                q,
                eps: s / n as f64,
                nu: mean + q as f64 * omega0,
            }
        })
        .collect();

    let fm = FourierModulation {
        terms,
        qmax,
        fundamental: Some(omega0),
    };
    let deficit = 1.0 - fm.parseval_sum();
    if deficit > PARSEVAL_LIMIT {
        return Err(Error::NonConvergence {
            what: format!("sideband sum truncated at qmax = {qmax}"),
            estimate: deficit,
            tolerance: PARSEVAL_LIMIT,
        });
    }
    Ok(fm)
}

/// Result of checking whether a sinusoidal drive can make the squeezing
/// term secular.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SqueezingConstraint {
    pub valid: bool,
    /// q' - (-q): resonant partner of q is q' = -q + q_pairing.
    pub q_pairing: i32,
}

/// ν_q + ν_{q'} + 2ω_a = 0 has integer solutions iff 2z and 2/m are integers.
pub fn validate_squeezing_constraint(z: f64, m: f64) -> SqueezingConstraint {
    let is_int = |v: f64| v.is_finite() && (v - v.round()).abs() < 1e-9;
    let two_z = 2.0 * z;
    let two_over_m = 2.0 / m;
    let valid = m > 0.0 && is_int(two_z) && is_int(two_over_m);
    let offset = -two_z - two_over_m;
    SqueezingConstraint {
        valid,
        q_pairing: if offset.is_finite() { offset.round() as i32 } else { 0 },
    }
}

/// ε(t) = Σ_q ε_q e^{iν_q t}.
pub fn eval_eps(t: f64, fm: &FourierModulation) -> Complex64 {
    fm.terms
        .iter()
        .map(|s| s.eps * Complex64::from_polar(1.0, s.nu * t))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unmodulated_limit() {
        let fm = sinusoidal_fourier(0.0, 2.0, 10.0, 20).unwrap();
        for s in &fm.terms {
            if s.q == 0 {
                assert_eq!(s.eps, Complex64::new(1.0, 0.0));
                assert_eq!(s.nu, 0.0);
            } else {
                assert_eq!(s.eps.norm(), 0.0);
            }
        }
        let u = FourierModulation::unmodulated();
        for &t in &[0.0, 1.0, 123.4] {
            assert_eq!(eval_eps(t, &u), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn sinusoidal_sidebands() {
        let fm = sinusoidal_fourier(1.0, 2.0, 10.0, 20).unwrap();
        // J_0(1), power series
        assert!((fm.term(0).unwrap().eps.norm() - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert_eq!(fm.term(0).unwrap().nu, 20.0);
        assert_eq!(fm.term(-2).unwrap().nu, -20.0);
        assert!(fm.terms.windows(2).all(|w| w[1].nu > w[0].nu));
        assert!((1.0 - fm.parseval_sum()).abs() < 1e-8);
    }

    #[test]
    fn sinusoidal_rejects_bad_parameters() {
        assert!(sinusoidal_fourier(1.0, 0.0, 10.0, 20).is_err());
        assert!(sinusoidal_fourier(1.0, 2.0, -1.0, 20).is_err());
        assert!(sinusoidal_fourier(f64::NAN, 2.0, 10.0, 20).is_err());
        assert!(sinusoidal_fourier(1.0, 2.0, 10.0, 0).is_err());
    }

    #[test]
    fn parseval_for_sufficient_qmax() {
        for &z in &[0.5, 1.0, 3.0, 9.5] {
            let qmax = (z as i32) + 15;
            let fm = sinusoidal_fourier(z, 2.0, 10.0, qmax).unwrap();
            assert!((1.0 - fm.parseval_sum()).abs() <= 1e-8, "z={z}");
        }
    }

    #[test]
    fn eval_eps_at_origin_and_period() {
        let fm = sinusoidal_fourier(1.0, 2.0, 10.0, 20).unwrap();
        let e0 = eval_eps(0.0, &fm);
        // ε(0) = exp(i·0) = 1 by construction of ∫_0^0 δ
        assert!((e0 - Complex64::new(1.0, 0.0)).norm() < 1e-8);
        let period = TAU / 20.0;
        // ε is periodic up to the uniform phase ramp e^{i z m ω_a T} = e^{i 2π z}
        let e1 = eval_eps(period, &fm);
        assert!((e1 - e0).norm() < 1e-8);
    }

    #[test]
    fn squeezing_constraint() {
        assert_eq!(
            validate_squeezing_constraint(1.0, 2.0),
            SqueezingConstraint { valid: true, q_pairing: -3 }
        );
        assert!(!validate_squeezing_constraint(0.3, 2.0).valid);
        assert!(!validate_squeezing_constraint(1.0, 0.7).valid);
        assert_eq!(
            validate_squeezing_constraint(9.5, 2.0),
            SqueezingConstraint { valid: true, q_pairing: -20 }
        );
        assert!(validate_squeezing_constraint(1.0, 2.0 / 3.0).valid);
    }

    #[test]
    fn numeric_fourier_trivial_inputs() {
        let zero = PeriodicDelta::from_fn(1.0, |_| 0.0).unwrap();
        let fm = numeric_fourier(&zero, 5, 256).unwrap();
        for s in &fm.terms {
            let want = if s.q == 0 { 1.0 } else { 0.0 };
            assert!((s.eps.norm() - want).abs() < 1e-14);
        }
        let c = 3.7;
        let ramp = PeriodicDelta::from_fn(2.0, move |_| c).unwrap();
        let fm = numeric_fourier(&ramp, 5, 256).unwrap();
        let s0 = fm.term(0).unwrap();
        assert!((s0.eps.norm() - 1.0).abs() < 1e-14);
        assert!((s0.nu - c).abs() < 1e-12);
        assert!(fm.terms.iter().filter(|s| s.q != 0).all(|s| s.eps.norm() < 1e-14));
    }

    #[test]
    fn numeric_matches_bessel_decomposition() {
        for &z in &[0.5, 1.0, 3.0] {
            let analytic = sinusoidal_fourier(z, 2.0, 10.0, 20).unwrap();
            let delta = PeriodicDelta::sinusoidal(z, 2.0, 10.0).unwrap();
            let numeric = numeric_fourier(&delta, 20, DEFAULT_QUAD_POINTS).unwrap();
            for (a, b) in analytic.terms.iter().zip(&numeric.terms) {
                assert_eq!(a.q, b.q);
                assert!((a.eps - b.eps).norm() < 1e-8, "z={z} q={}: {} vs {}", a.q, a.eps, b.eps);
                assert!((a.nu - b.nu).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn numeric_from_resampled_table() {
        let delta = PeriodicDelta::sinusoidal(1.0, 2.0, 10.0).unwrap();
        let t = delta.period();
        let samples: Vec<f64> = (0..2048)
            .map(|k| 20.0 * (1.0 - (20.0 * k as f64 * t / 2048.0).sin()))
            .collect();
        let table = PeriodicDelta::from_samples(t, samples).unwrap();
        let a = numeric_fourier(&table, 20, 4096).unwrap();
        let b = sinusoidal_fourier(1.0, 2.0, 10.0, 20).unwrap();
        for (x, y) in a.terms.iter().zip(&b.terms) {
            assert!((x.eps - y.eps).norm() < 1e-6);
        }
    }

    #[test]
    fn numeric_reports_truncation() {
        let delta = PeriodicDelta::sinusoidal(12.0, 2.0, 10.0).unwrap();
        assert!(matches!(
            numeric_fourier(&delta, 3, 4096),
            Err(Error::NonConvergence { .. })
        ));
        assert!(numeric_fourier(&delta, 3, 32).is_err());
    }

    #[test]
    fn csv_table_round_trip() {
        let mut s = String::from("t,delta\n");
        let n = 512;
        let period = PI;
        for k in 0..=n {
            let t = k as f64 * period / n as f64;
            s.push_str(&format!("{t},{}\n", 2.0 * (2.0 * t).cos()));
        }
        let d = PeriodicDelta::from_csv(s.as_bytes()).unwrap();
        assert!((d.period() - period).abs() < 1e-12);
        let fm = numeric_fourier(&d, 10, 512).unwrap();
        // ∫δ = sin(2t), so ε = e^{i sin 2t} = Σ J_q(1) e^{i2qt}
        let j1 = crate::specfun::bessel_j(1, 1.0).unwrap();
        assert!((fm.term(1).unwrap().eps - Complex64::new(j1, 0.0)).norm() < 1e-9);

        let bad = "0,1\n0.1,1\n0.3,1\n0.4,1\n0.5,1\n";
        assert!(PeriodicDelta::from_csv(bad.as_bytes()).is_err());
    }

    proptest::proptest! {
        #[test]
        fn eps_is_unimodular(z in 0.0f64..10.0, frac in 0.0f64..1.0) {
            let fm = sinusoidal_fourier(z, 2.0, 10.0, 40).unwrap();
            let t = frac * TAU / 20.0;
            let v = eval_eps(t, &fm);
            proptest::prop_assert!((v.norm() - 1.0).abs() < 1e-6);
        }
    }
}
