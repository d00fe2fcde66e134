//! Special functions used by the coefficient formulas.
//!
//! Everything here is a deterministic pure function of its arguments.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest Bessel order accepted by [`bessel_j`].
pub const MAX_BESSEL_ORDER: i32 = 1000;

const RESCALE_THRESHOLD: f64 = 1e250;

/// Inclusive window of Bessel orders `qmin..=qmax`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BesselOrderRange {
    pub qmin: i32,
    pub qmax: i32,
}

impl BesselOrderRange {
    pub fn new(qmin: i32, qmax: i32) -> Result<Self> {
        if qmin > qmax {
            return Err(Error::domain(format!("empty Bessel order range {qmin}..={qmax}")));
        }
        if qmin.abs().max(qmax.abs()) > MAX_BESSEL_ORDER {
            return Err(Error::domain(format!(
                "Bessel order range {qmin}..={qmax} exceeds |q| <= {MAX_BESSEL_ORDER}"
            )));
        }
        Ok(Self { qmin, qmax })
    }

    /// Window `-q..=q`.
    pub fn symmetric(q: i32) -> Result<Self> {
        Self::new(-q.abs(), q.abs())
    }

    pub fn len(&self) -> usize {
        (self.qmax - self.qmin + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn orders(&self) -> impl Iterator<Item = i32> {
        self.qmin..=self.qmax
    }
}

/// Miller backward recurrence for J_0(x) ..= J_nmax(x), x > 0.
///
/// The recurrence J_{k-1} = (2k/x) J_k - J_{k+1} is started well above
/// max(nmax, x) and normalised with J_0 + 2 Σ J_{2k} = 1.
fn miller(nmax: usize, x: f64) -> Vec<f64> {
    let top = nmax.max(x.ceil() as usize);
    let mut start = top + 20 + (60.0 * top as f64).sqrt().ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    let mut out = vec![0.0; nmax + 1];
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-30; // J_k
    let mut norm = 0.0;

    let mut k = start;
    loop {
        if k <= nmax {
            out[k] = j_cur;
        }
        if k == 0 {
            norm += j_cur;
            break;
        }
        if k % 2 == 0 {
            norm += 2.0 * j_cur;
        }
        let j_prev = (2.0 * k as f64 / x) * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        k -= 1;

        if j_cur.abs() > RESCALE_THRESHOLD {
            let s = 1.0 / RESCALE_THRESHOLD;
            j_cur *= s;
            j_next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }

    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

fn parity_sign(odd: bool) -> f64 {
    if odd {
        -1.0
    } else {
        1.0
    }
}

fn check_bessel_args(q: i32, z: f64) -> Result<()> {
    if !z.is_finite() {
        return Err(Error::domain(format!("Bessel argument must be finite, got {z}")));
    }
    if q.abs() > MAX_BESSEL_ORDER {
        return Err(Error::domain(format!(
            "Bessel order {q} exceeds |q| <= {MAX_BESSEL_ORDER}"
        )));
    }
    Ok(())
}

/// Integer-order Bessel function of the first kind, J_q(z).
///
/// Negative orders and arguments are reduced with
/// J_{-q}(z) = (-1)^q J_q(z) and J_q(-z) = (-1)^q J_q(z), so both parity
/// relations hold bit-for-bit.
pub fn bessel_j(q: i32, z: f64) -> Result<f64> {
    check_bessel_args(q, z)?;
    let n = q.unsigned_abs() as usize;
    if z == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let value = miller(n, z.abs())[n];
    let odd = n % 2 == 1 && ((q < 0) != (z < 0.0));
    Ok(parity_sign(odd) * value)
}

/// J_q(z) for every q in `range`, in increasing order of q.
pub fn bessel_j_range(range: BesselOrderRange, z: f64) -> Result<Vec<f64>> {
    check_bessel_args(range.qmin, z)?;
    check_bessel_args(range.qmax, z)?;
    let nmax = range.qmin.unsigned_abs().max(range.qmax.unsigned_abs()) as usize;
    let table = if z == 0.0 {
        let mut t = vec![0.0; nmax + 1];
        t[0] = 1.0;
        t
    } else {
        miller(nmax, z.abs())
    };
    Ok(range
        .orders()
        .map(|q| {
            let n = q.unsigned_abs() as usize;
            let odd = n % 2 == 1 && ((q < 0) != (z < 0.0));
            parity_sign(odd) * table[n]
        })
        .collect())
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0 (Lanczos, g = 7, with reflection below 1/2).
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEFFS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// ln(n!).
pub fn log_factorial(n: u32) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma_pos(n as f64 + 1.0)
    }
}

/// Angular-momentum labels for ⟨j1 m1; j2 m2 | J M⟩, stored as doubled
/// integers so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngularMomentumLabels {
    pub two_j1: i32,
    pub two_m1: i32,
    pub two_j2: i32,
    pub two_m2: i32,
    pub two_j: i32,
    pub two_m: i32,
}

fn doubled(v: f64, name: &str) -> Result<i32> {
    let d = 2.0 * v;
    let r = d.round();
    if !v.is_finite() || (d - r).abs() > 1e-9 || r.abs() > 1e6 {
        return Err(Error::domain(format!("{name} = {v} is not a half-integer")));
    }
    Ok(r as i32)
}

impl AngularMomentumLabels {
    pub fn new(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> Result<Self> {
        Self::from_doubled(
            doubled(j1, "j1")?,
            doubled(m1, "m1")?,
            doubled(j2, "j2")?,
            doubled(m2, "m2")?,
            doubled(j, "J")?,
            doubled(m, "M")?,
        )
    }

    pub fn from_doubled(
        two_j1: i32,
        two_m1: i32,
        two_j2: i32,
        two_m2: i32,
        two_j: i32,
        two_m: i32,
    ) -> Result<Self> {
        for (tj, tm, name) in [
            (two_j1, two_m1, "j1/m1"),
            (two_j2, two_m2, "j2/m2"),
            (two_j, two_m, "J/M"),
        ] {
            if tj < 0 || tm.abs() > tj || (tj - tm) % 2 != 0 {
                return Err(Error::domain(format!(
                    "invalid {name} pair: 2j = {tj}, 2m = {tm}"
                )));
            }
        }
        Ok(Self {
            two_j1,
            two_m1,
            two_j2,
            two_m2,
            two_j,
            two_m,
        })
    }

    fn triangle(&self) -> bool {
        let (a, b, c) = (self.two_j1, self.two_j2, self.two_j);
        c >= (a - b).abs() && c <= a + b && (a + b + c) % 2 == 0
    }
}

/// Clebsch-Gordan coefficient ⟨j1 m1; j2 m2 | J M⟩ (Condon-Shortley phase).
///
/// Racah's closed-form sum, with every factorial taken in log-space so
/// that j of order 50 stays finite.
pub fn clebsch_gordan(l: AngularMomentumLabels) -> f64 {
    if l.two_m != l.two_m1 + l.two_m2 || !l.triangle() {
        return 0.0;
    }
    // All of these are non-negative integers once the triangle rule holds.
    let half = |v: i32| -> i32 { v / 2 };
    let j1_j2_mj = half(l.two_j1 + l.two_j2 - l.two_j);
    let j_j1_mj2 = half(l.two_j + l.two_j1 - l.two_j2);
    let j_mj1_j2 = half(l.two_j - l.two_j1 + l.two_j2);
    let sum_all = half(l.two_j1 + l.two_j2 + l.two_j);
    let j1_m_m1 = half(l.two_j1 - l.two_m1);
    let j1_p_m1 = half(l.two_j1 + l.two_m1);
    let j2_m_m2 = half(l.two_j2 - l.two_m2);
    let j2_p_m2 = half(l.two_j2 + l.two_m2);
    let j_m_m = half(l.two_j - l.two_m);
    let j_p_m = half(l.two_j + l.two_m);

    let lf = |n: i32| log_factorial(n as u32);

    let log_pref = 0.5
        * (((l.two_j + 1) as f64).ln() + lf(j_j1_mj2) + lf(j_mj1_j2) + lf(j1_j2_mj)
            - lf(sum_all + 1)
            + lf(j_p_m)
            + lf(j_m_m)
            + lf(j1_m_m1)
            + lf(j1_p_m1)
            + lf(j2_m_m2)
            + lf(j2_p_m2));

    // J - j2 + m1 and J - j1 - m2
    let c1 = half(l.two_j - l.two_j2 + l.two_m1);
    let c2 = half(l.two_j - l.two_j1 - l.two_m2);
    let kmin = 0.max(-c1).max(-c2);
    let kmax = j1_j2_mj.min(j1_m_m1).min(j2_p_m2);
    if kmin > kmax {
        return 0.0;
    }

    let terms: Vec<(f64, f64)> = (kmin..=kmax)
        .map(|k| {
            let log_den = lf(k)
                + lf(j1_j2_mj - k)
                + lf(j1_m_m1 - k)
                + lf(j2_p_m2 - k)
                + lf(c1 + k)
                + lf(c2 + k);
            (parity_sign(k % 2 != 0), log_pref - log_den)
        })
        .collect();
    let lmax = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms.iter().map(|(sg, lg)| sg * (lg - lmax).exp()).sum();
    s * lmax.exp()
}

/// Finite-time kernel t·sinc(ωt) = sin(ωt)/ω.
///
/// Its integral over the real line is π; it narrows to π·δ(ω) as t grows.
pub fn sinc_kernel(omega: f64, t: f64) -> f64 {
    let x = omega * t;
    if x.abs() < 1e-4 {
        let x2 = x * x;
        t * (1.0 - x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        t * x.sin() / x
    }
}
