//! Small quadrature and interpolation helpers shared by the numeric modules.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// ∫_a^∞ f(u) du for f decaying at least like 1/u², via u = a + s·L/(1-s).
pub fn semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, nodes: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (x, w) = nodes;
    x.iter()
        .zip(w)
        .map(|(&xi, &wi)| {
            let s = 0.5 * (xi + 1.0);
            let u = a + scale * s / (1.0 - s);
            let jac = scale / ((1.0 - s) * (1.0 - s));
            0.5 * wi * f(u) * jac
        })
        .sum()
}

/// Composite Simpson rule over uniformly spaced samples; `y.len()` must be odd.
pub fn simpson(y: &[f64], h: f64) -> f64 {
    debug_assert!(y.len() % 2 == 1 && y.len() >= 3);
    let n = y.len() - 1;
    let mut s = y[0] + y[n];
    for (i, v) in y.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// Index `i` with `x[i] <= v < x[i+1]`, clamped to a valid cell.
pub fn locate(x: &[f64], v: f64) -> usize {
    let n = x.len();
    if v <= x[0] {
        return 0;
    }
    if v >= x[n - 1] {
        return n - 2;
    }
    match x.binary_search_by(|p| p.partial_cmp(&v).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    }
}

/// Four-point Lagrange interpolation on a strictly increasing grid.
///
/// Exact at the nodes; falls back to fewer points at the ends of the table.
pub fn interp_cubic(x: &[f64], y: &[f64], v: f64) -> f64 {
    let n = x.len();
    if n == 1 {
        return y[0];
    }
    let i = locate(x, v);
    if v == x[i] {
        return y[i];
    }
    if v == x[i + 1] {
        return y[i + 1];
    }
    let lo = i.saturating_sub(1);
    let hi = (i + 2).min(n - 1);
    let lo = if hi - lo < 3 && hi == n - 1 { hi.saturating_sub(3) } else { lo };
    let hi = if hi - lo < 3 { (lo + 3).min(n - 1) } else { hi };
    let mut s = 0.0;
    for a in lo..=hi {
        let mut l = 1.0;
        for b in lo..=hi {
            if a != b {
                l *= (v - x[b]) / (x[a] - x[b]);
            }
        }
        s += l * y[a];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = gauss_legendre(16);
        let s: f64 = gl.0.iter().zip(&gl.1).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        let wsum: f64 = gl.1.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn semi_infinite_tail() {
        let gl = gauss_legendre(64);
        let s = semi_infinite(|u| 1.0 / (u * u * u), 2.0, 2.0, &gl);
        assert!((s - 0.125).abs() < 1e-13);
    }

    #[test]
    fn cubic_interp_exact_for_cubics() {
        let x: Vec<f64> = vec![0.0, 0.3, 1.1, 1.5, 2.0, 3.2];
        let f = |v: f64| 1.0 - v + 0.5 * v * v - 0.2 * v * v * v;
        let y: Vec<f64> = x.iter().map(|&v| f(v)).collect();
        for &v in &[0.05, 0.7, 1.3, 1.99, 3.0] {
            assert!((interp_cubic(&x, &y, v) - f(v)).abs() < 1e-12);
        }
    }

    #[test]
    fn simpson_exact_for_cubic() {
        let h = 0.25;
        let y: Vec<f64> = (0..9).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&y, h) - 2f64.powi(4) / 4.0).abs() < 1e-13);
    }
}
