//! Reservoir models and their temperature-dependent response
//! γ_T(ω) = 2π G_T(ω), Δ_T(ω) = P∫ G_T(ω')/(ω' - ω) dω', where
//! G_T(ω) = G_0(ω)[1 + n(ω)] + G_0(-ω) n(-ω).

use std::f64::consts::{PI, TAU};
use std::io::Read;

use crate::error::{Error, Result};
use crate::modulation::read_two_columns;
use crate::quadrature::{gauss_legendre, interp_cubic, semi_infinite, simpson};

/// A reservoir response pair evaluable at any real frequency.
pub trait Response: Send + Sync {
    /// γ_T(ω), a rate.
    fn gamma_t(&self, omega: f64) -> f64;
    /// Δ_T(ω), a rate.
    fn delta_t(&self, omega: f64) -> f64;
}

/// Thermal occupation 1/(e^{ω/T} - 1) with ħ = k_B = 1.
pub fn planck_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain(format!("Planck occupation needs omega > 0, got {omega}")));
    }
    if !(temperature >= 0.0) {
        return Err(Error::domain(format!("temperature must be >= 0, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// A single damped cavity mode seen by the atom in the bad-cavity limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianReservoir {
    /// Cavity (and atomic) resonance.
    pub omega_a: f64,
    /// Cavity linewidth.
    pub kappa: f64,
    /// Thermal occupation at ω_a.
    pub n_a: f64,
    /// Unmodulated decay rate into the cavity, 2π·4g²/κ.
    pub gamma_c: f64,
}

impl LorentzianReservoir {
    pub fn new(omega_a: f64, kappa: f64, n_a: f64, gamma_c: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::domain(format!("kappa must be > 0, got {kappa}")));
        }
        if !(omega_a > 0.0) || !omega_a.is_finite() {
            return Err(Error::domain(format!("omega_a must be > 0, got {omega_a}")));
        }
        if !(n_a >= 0.0) || !n_a.is_finite() {
            return Err(Error::domain(format!("n_a must be >= 0, got {n_a}")));
        }
        if !(gamma_c > 0.0) || !gamma_c.is_finite() {
            return Err(Error::domain(format!("gamma_c must be > 0, got {gamma_c}")));
        }
        if omega_a < 5.0 * kappa {
            log::warn!(
                "omega_a = {omega_a} is below 5 kappa; the Lorentzian bad-cavity spectrum is not reliable"
            );
        }
        Ok(Self {
            omega_a,
            kappa,
            n_a,
            gamma_c,
        })
    }

    /// κ = γ_c = 1: the unit system every figure is drawn in.
    pub fn normalized(omega_a: f64, n_a: f64) -> Result<Self> {
        Self::new(omega_a, 1.0, n_a, 1.0)
    }

    /// Coupling spectrum G_0(ω) (Lorentzian at ω_a with peak γ_c/2π).
    pub fn g0(&self, omega: f64) -> f64 {
        let x = 2.0 * (omega - self.omega_a) / self.kappa;
        self.gamma_c / TAU / (1.0 + x * x)
    }
}

pub fn lorentzian_gamma_t(omega: f64, res: &LorentzianReservoir) -> f64 {
    let up = 2.0 * (omega - res.omega_a) / res.kappa;
    let down = 2.0 * (omega + res.omega_a) / res.kappa;
    res.gamma_c * ((res.n_a + 1.0) / (1.0 + up * up) + res.n_a / (1.0 + down * down))
}

/// Exact Hilbert transform of the Lorentzian G_T.
pub fn lorentzian_delta_t(omega: f64, res: &LorentzianReservoir) -> f64 {
    let hw2 = 0.25 * res.kappa * res.kappa;
    let q = 0.25 * res.kappa;
    let x = res.omega_a - omega;
    let y = res.omega_a + omega;
    res.gamma_c * ((res.n_a + 1.0) * q * x / (x * x + hw2) - res.n_a * q * y / (y * y + hw2))
}

impl Response for LorentzianReservoir {
    fn gamma_t(&self, omega: f64) -> f64 {
        lorentzian_gamma_t(omega, self)
    }

    fn delta_t(&self, omega: f64) -> f64 {
        lorentzian_delta_t(omega, self)
    }
}

/// How the reservoir occupation n(ω) is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Occupation {
    /// Planck distribution at this temperature (energy units, ħ = 1).
    Planck { temperature: f64 },
    /// Frequency-independent occupation.
    Fixed { n: f64 },
}

impl Occupation {
    /// n(|ω|); at ω = 0 the Planck value is taken at the smallest positive float.
    pub fn at(&self, omega: f64) -> f64 {
        match *self {
            Occupation::Fixed { n } => n,
            Occupation::Planck { temperature } => {
                let w = omega.abs().max(f64::MIN_POSITIVE);
                planck_occupation(w, temperature).unwrap_or(0.0)
            }
        }
    }
}

/// A coupling spectrum G_0(ω) = D(ω)|g(ω)|² tabulated on a frequency grid.
#[derive(Debug, Clone)]
pub struct GenericReservoir {
    grid: Vec<f64>,
    g0: Vec<f64>,
    occupation: Occupation,
    g_t: Vec<f64>,
    uniform_step: Option<f64>,
}

impl GenericReservoir {
    pub fn new(grid: Vec<f64>, g0: Vec<f64>, occupation: Occupation) -> Result<Self> {
        if grid.len() != g0.len() {
            return Err(Error::Input("frequency grid and G0 differ in length".into()));
        }
        if grid.len() < 8 {
            return Err(Error::Input("spectrum table needs at least 8 points".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Input("frequency grid must be strictly increasing".into()));
        }
        if g0.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Input("G0 must be finite and non-negative".into()));
        }
        match occupation {
            Occupation::Fixed { n } if !(n >= 0.0) => {
                return Err(Error::domain(format!("occupation must be >= 0, got {n}")))
            }
            Occupation::Planck { temperature } if !(temperature >= 0.0) => {
                return Err(Error::domain(format!("temperature must be >= 0, got {temperature}")))
            }
            _ => {}
        }

        let n = grid.len();
        let step = (grid[n - 1] - grid[0]) / (n - 1) as f64;
        let uniform = grid
            .iter()
            .enumerate()
            .all(|(i, w)| (w - (grid[0] + i as f64 * step)).abs() <= 1e-9 * step.max(w.abs()));

        let mut res = Self {
            grid,
            g0,
            occupation,
            g_t: Vec::new(),
            uniform_step: uniform.then_some(step),
        };
        res.g_t = res.grid.iter().map(|&w| res.g_t_direct(w)).collect();
        Ok(res)
    }

    /// Two-column CSV `(omega_over_kappa, G0)`.
    pub fn from_csv<R: Read>(reader: R, occupation: Occupation) -> Result<Self> {
        let (w, g) = read_two_columns(reader)?;
        Self::new(w, g, occupation)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// The same coupling spectrum with a different occupation.
    pub fn with_occupation(&self, occupation: Occupation) -> Result<Self> {
        Self::new(self.grid.clone(), self.g0.clone(), occupation)
    }

    pub fn occupation(&self) -> Occupation {
        self.occupation
    }

    /// G_0 with zero outside the table.
    pub fn g0(&self, omega: f64) -> f64 {
        if omega < self.grid[0] || omega > self.grid[self.grid.len() - 1] {
            0.0
        } else {
            interp_cubic(&self.grid, &self.g0, omega).max(0.0)
        }
    }

    fn g_t_direct(&self, omega: f64) -> f64 {
        let n = self.occupation.at(omega);
        self.g0(omega) * (1.0 + n) + self.g0(-omega) * n
    }

    /// G_T on the table's own grid.
    pub fn g_t_samples(&self) -> &[f64] {
        &self.g_t
    }

    /// G_T interpolated from its tabulated values.
    pub fn g_t(&self, omega: f64) -> f64 {
        if omega < self.grid[0] || omega > self.grid[self.grid.len() - 1] {
            return 0.0;
        }
        if let Some(i) = self.node_index(omega) {
            return self.g_t[i];
        }
        interp_cubic(&self.grid, &self.g_t, omega).max(0.0)
    }

    fn node_index(&self, omega: f64) -> Option<usize> {
        let h = self.uniform_step?;
        let s = (omega - self.grid[0]) / h;
        let r = s.round();
        ((s - r).abs() < 1e-9 && r >= 0.0 && (r as usize) < self.grid.len()).then_some(r as usize)
    }
}

/// Extrapolation of G_T beyond the ends of the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailModel {
    /// G_T is zero outside the table.
    None,
    /// 1/G_T continued as the quadratic through three points near each end,
    /// i.e. a Lorentzian tail; used only where that continuation decays.
    InverseQuadratic,
}

/// Principal-value quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvQuadrature {
    /// Half-width, in grid cells, of the window where points are paired
    /// symmetrically around the pole.
    pub pair_cells: usize,
    pub tail: TailModel,
    /// Allowed error relative to the scale of Δ_T.
    pub rel_tol: f64,
}

impl Default for PvQuadrature {
    fn default() -> Self {
        Self {
            pair_cells: 8,
            tail: TailModel::InverseQuadratic,
            rel_tol: 1e-5,
        }
    }
}

/// One evaluation of the response of a tabulated reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponsePoint {
    pub gamma_t: f64,
    pub delta_t: f64,
    /// Richardson estimate of the grid-quadrature error in Δ_T.
    pub error_estimate: f64,
    /// Part of Δ_T coming from the extrapolated tails.
    pub tail_contribution: f64,
}

/// γ_T and Δ_T of a tabulated reservoir at `omega`.
///
/// The pole is removed by pairing G_T(ω+u) with G_T(ω-u) over
/// `pair_cells` cells (Simpson in u); the rest of the table uses the
/// trapezoid rule on nodes aligned symmetrically with the pole.
pub fn generic_response(omega: f64, res: &GenericReservoir, pv: &PvQuadrature) -> Result<ResponsePoint> {
    let g = &res.grid;
    let n = g.len();
    if !(omega >= g[1] && omega <= g[n - 2]) {
        return Err(Error::domain(format!(
            "omega = {omega} must lie inside the tabulated grid [{}, {}] by at least one cell",
            g[1],
            g[n - 2]
        )));
    }
    let i = crate::quadrature::locate(g, omega);
    let h = g[i + 1] - g[i];

    let fine = pv_grid(omega, res, h, pv.pair_cells);
    let coarse = pv_grid(omega, res, 2.0 * h, pv.pair_cells);
    let error_estimate = (fine - coarse).abs() / 3.0;

    let tail_contribution = match pv.tail {
        TailModel::None => 0.0,
        TailModel::InverseQuadratic => tail_integral(omega, res),
    };
    let delta_t = fine + tail_contribution;

    let scale = 0.5 * PI * res.g_t.iter().cloned().fold(0.0, f64::max);
    if error_estimate > pv.rel_tol * scale {
        return Err(Error::NonConvergence {
            what: format!("principal-value integral at omega = {omega}"),
            estimate: error_estimate,
            tolerance: pv.rel_tol * scale,
        });
    }

    Ok(ResponsePoint {
        gamma_t: TAU * res.g_t(omega),
        delta_t,
        error_estimate,
        tail_contribution,
    })
}

/// PV ∫ over the table with step `h`.
fn pv_grid(x: f64, res: &GenericReservoir, h: f64, pair_cells: usize) -> f64 {
    let g = &res.grid;
    let (lo, hi) = (g[0], g[g.len() - 1]);
    let room = ((x - lo).min(hi - x) / h).floor() as usize;
    let mut p = pair_cells.min(room).max(1);
    if p > 1 && p % 2 == 1 {
        p -= 1;
    }

    let gt = |w: f64| res.g_t(w);
    let paired = |u: f64| (gt(x + u) - gt(x - u)) / u;
    let f0 = (4.0 * paired(0.5 * h) - paired(h)) / 3.0;
    let mut inner_y = Vec::with_capacity(p + 1);
    inner_y.push(f0);
    for j in 1..=p {
        inner_y.push(paired(j as f64 * h));
    }
    let inner = if p >= 2 {
        simpson(&inner_y, h)
    } else {
        0.5 * h * (inner_y[0] + inner_y[1])
    };

    let a = p as f64 * h;
    let outer = |sign: f64, end: f64| -> f64 {
        // nodes x ± (a + k h) until the table edge, then a partial cell
        let mut s = 0.0;
        let mut k = 0usize;
        let mut prev_u = a;
        let mut prev_f = gt(x + sign * a) / (sign * a);
        loop {
            let u = a + (k + 1) as f64 * h;
            let w = x + sign * u;
            let past = if sign > 0.0 { w >= end } else { w <= end };
            let (u, w) = if past { ((end - x) * sign, end) } else { (u, w) };
            let f = gt(w) / (w - x);
            s += 0.5 * (u - prev_u) * (prev_f + f);
            if past {
                break;
            }
            prev_u = u;
            prev_f = f;
            k += 1;
        }
        s
    };
    inner + outer(1.0, hi) + outer(-1.0, lo)
}

/// Quadratic through three points, returned as (α, β, γ) for αw² + βw + γ.
fn quadratic_through(p: [(f64, f64); 3]) -> (f64, f64, f64) {
    let [(x0, y0), (x1, y1), (x2, y2)] = p;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let alpha = (d12 - d01) / (x2 - x0);
    let beta = d01 - alpha * (x0 + x1);
    let gamma = y0 - alpha * x0 * x0 - beta * x0;
    (alpha, beta, gamma)
}

/// Tail contributions ∫_{hi}^{∞} + ∫_{-∞}^{lo} of G_T/(ω' - x) under the
/// inverse-quadratic continuation.
fn tail_integral(x: f64, res: &GenericReservoir) -> f64 {
    let g = &res.grid;
    let n = g.len();
    let span = g[n - 1] - g[0];
    let nodes = gauss_legendre(64);

    let one_side = |end: f64, inward: f64| -> f64 {
        let pts: Vec<(f64, f64)> = [0.0, span / 40.0, span / 20.0]
            .iter()
            .map(|d| {
                let w = end - inward * d;
                (w, res.g_t(w))
            })
            .collect();
        if pts.iter().any(|p| !(p.1 > 0.0)) {
            return 0.0;
        }
        let (alpha, beta, gamma) =
            quadratic_through([(pts[0].0, 1.0 / pts[0].1), (pts[1].0, 1.0 / pts[1].1), (pts[2].0, 1.0 / pts[2].1)]);
        if !(alpha > 0.0) {
            return 0.0;
        }
        let vertex = -beta / (2.0 * alpha);
        // the continuation must decay monotonically away from the table
        if (end - vertex) * inward <= 0.0 {
            return 0.0;
        }
        let scale = (end - vertex).abs();
        // integrate over the outward distance s ≥ 0 from the table edge
        semi_infinite(
            |s| {
                let w = end + inward * s;
                let q = alpha * w * w + beta * w + gamma;
                1.0 / (q * (w - x))
            },
            0.0,
            scale,
            &nodes,
        )
    };
    one_side(g[n - 1], 1.0) + one_side(g[0], -1.0)
}

/// γ_T, Δ_T of a tabulated reservoir sampled once and interpolated.
///
/// Outside the sampled range γ_T is zero and Δ_T follows the far-field
/// form -W/(ω - c), with W = ∫G_T and c its centroid.
#[derive(Debug, Clone)]
pub struct TabulatedResponse {
    omega: Vec<f64>,
    gamma: Vec<f64>,
    delta: Vec<f64>,
    weight: f64,
    centroid: f64,
    /// Largest Richardson estimate met while sampling.
    pub max_error_estimate: f64,
}

impl TabulatedResponse {
    /// Samples every `stride`-th node of the reservoir grid, keeping
    /// `2·pair_cells` cells away from either edge so the pole window fits.
    pub fn from_generic(res: &GenericReservoir, pv: &PvQuadrature, stride: usize) -> Result<Self> {
        let g = res.grid();
        let n = g.len();
        let stride = stride.max(1);
        let margin = 2 * pv.pair_cells.max(1);
        if n <= 2 * margin + 4 {
            return Err(Error::Input(format!(
                "spectrum table needs more than {} points for tabulation",
                2 * margin + 4
            )));
        }
        let (first, last) = (margin, n - 1 - margin);
        let mut idx: Vec<usize> = (first..=last).step_by(stride).collect();
        if *idx.last().unwrap() != last {
            idx.push(last);
        }
        let mut omega = Vec::with_capacity(idx.len());
        let mut gamma = Vec::with_capacity(idx.len());
        let mut delta = Vec::with_capacity(idx.len());
        let mut max_err: f64 = 0.0;
        for i in idx {
            let p = generic_response(g[i], res, pv)?;
            omega.push(g[i]);
            gamma.push(p.gamma_t);
            delta.push(p.delta_t);
            max_err = max_err.max(p.error_estimate);
        }

        let gt = res.g_t_samples();
        let mut weight = 0.0;
        let mut first = 0.0;
        for k in 0..n - 1 {
            let dw = g[k + 1] - g[k];
            weight += 0.5 * dw * (gt[k] + gt[k + 1]);
            first += 0.5 * dw * (gt[k] * g[k] + gt[k + 1] * g[k + 1]);
        }
        let centroid = if weight > 0.0 { first / weight } else { 0.0 };
        Ok(Self {
            omega,
            gamma,
            delta,
            weight,
            centroid,
            max_error_estimate: max_err,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }
}

impl Response for TabulatedResponse {
    fn gamma_t(&self, omega: f64) -> f64 {
        let (lo, hi) = self.range();
        if omega < lo || omega > hi {
            0.0
        } else {
            interp_cubic(&self.omega, &self.gamma, omega).max(0.0)
        }
    }

    fn delta_t(&self, omega: f64) -> f64 {
        let (lo, hi) = self.range();
        if omega < lo || omega > hi {
            -self.weight / (omega - self.centroid)
        } else {
            interp_cubic(&self.omega, &self.delta, omega)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cavity_res(n_a: f64) -> LorentzianReservoir {
        LorentzianReservoir::normalized(10.0, n_a).unwrap()
    }

    #[test]
    fn planck_values() {
        assert_eq!(planck_occupation(1.0, 0.0).unwrap(), 0.0);
        assert!((planck_occupation(2f64.ln(), 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(planck_occupation(0.0, 1.0).is_err());
        assert!(planck_occupation(-1.0, 1.0).is_err());
    }

    #[test]
    fn lorentzian_gamma_values() {
        let r = cavity_res(0.0);
        assert!((lorentzian_gamma_t(10.0, &r) - 1.0).abs() < 1e-3);
        // the mirror term is 0 at n_a = 0, so the on-resonance value is exact
        assert_eq!(lorentzian_gamma_t(10.0, &r), 1.0);
        assert!((lorentzian_gamma_t(10.5, &r) - 0.5).abs() < 1e-15);
        assert!((lorentzian_gamma_t(9.5, &r) - 0.5).abs() < 1e-15);
        let hot = cavity_res(1e3);
        let want = 1001.0 + 1000.0 / 1601.0;
        assert!((lorentzian_gamma_t(10.0, &hot) - want).abs() < 1e-12);
    }

    #[test]
    fn lorentzian_delta_values() {
        let r = cavity_res(1e3);
        let want = -1e3 * 0.25 * 20.0 / (400.0 + 0.25);
        assert!((lorentzian_delta_t(10.0, &r) - want).abs() < 1e-12);
        assert!((want + 12.492).abs() < 1e-3);
        let cold = cavity_res(0.0);
        assert!((lorentzian_delta_t(9.5, &cold) - 0.25).abs() < 1e-15);
        assert!(lorentzian_delta_t(1e9, &r).abs() < 1e-5);
        assert!(lorentzian_delta_t(-1e9, &r).abs() < 1e-5);
        // 9.5 maximises the dispersive curve
        for &w in &[9.3, 9.45, 9.55, 9.7] {
            assert!(lorentzian_delta_t(w, &cold) < 0.25);
        }
    }

    #[test]
    fn detailed_balance_ordering() {
        for &n_a in &[0.0, 0.5, 1.0, 1e3] {
            for &wa in &[5.0, 10.0, 50.0] {
                let r = LorentzianReservoir::normalized(wa, n_a).unwrap();
                assert!(r.gamma_t(wa) > r.gamma_t(-wa));
                assert!(r.gamma_t(wa) - r.gamma_t(-wa) <= 1.0);
            }
        }
    }

    #[test]
    fn lorentzian_validation() {
        assert!(LorentzianReservoir::new(10.0, 0.0, 1.0, 1.0).is_err());
        assert!(LorentzianReservoir::new(10.0, 1.0, -1.0, 1.0).is_err());
        assert!(LorentzianReservoir::new(10.0, 1.0, 1.0, 0.0).is_err());
        assert!(LorentzianReservoir::new(3.0, 1.0, 1.0, 1.0).is_ok());
    }

    fn tabulated_lorentzian(n_a: f64, half: f64, points: usize) -> GenericReservoir {
        let r = cavity_res(n_a);
        let grid: Vec<f64> = (0..points)
            .map(|i| -half + 2.0 * half * i as f64 / (points - 1) as f64)
            .collect();
        let g0 = grid.iter().map(|&w| r.g0(w)).collect();
        GenericReservoir::new(grid, g0, Occupation::Fixed { n: n_a }).unwrap()
    }

    #[test]
    fn generic_g_t_reproduces_lorentzian() {
        let tab = tabulated_lorentzian(3.0, 30.0, 6001);
        let r = cavity_res(3.0);
        for &w in &[-12.0, -10.0, 0.0, 9.5, 10.0, 25.0] {
            assert!((TAU * tab.g_t(w) - r.gamma_t(w)).abs() < 1e-12);
        }
    }

    #[test]
    fn pv_matches_closed_form_single_lorentzian() {
        let tab = tabulated_lorentzian(0.0, 30.0, 60001);
        let r = cavity_res(0.0);
        let pv = PvQuadrature::default();
        let scale = 0.25;
        for &w in &[0.0, 9.0, 9.5, 10.0, 10.5, 11.0, -10.0, 20.0] {
            let p = generic_response(w, &tab, &pv).unwrap();
            let exact = r.delta_t(w);
            assert!(
                (p.delta_t - exact).abs() < 1e-6 * scale,
                "w={w}: {} vs {exact}",
                p.delta_t
            );
            assert!((p.gamma_t - r.gamma_t(w)).abs() < 1e-12);
        }
    }

    #[test]
    fn pv_even_spectrum_gives_zero() {
        let grid: Vec<f64> = (0..2001).map(|i| -10.0 + i as f64 * 0.01).collect();
        let g0: Vec<f64> = grid.iter().map(|w| (-w * w).exp()).collect();
        let res = GenericReservoir::new(grid, g0, Occupation::Fixed { n: 0.0 }).unwrap();
        let p = generic_response(0.0, &res, &PvQuadrature::default()).unwrap();
        assert!(p.delta_t.abs() < 1e-12, "{}", p.delta_t);
    }

    #[test]
    fn pv_flat_window() {
        let c = 0.7;
        let grid: Vec<f64> = (0..4001).map(|i| -200.0 + i as f64 * 0.1).collect();
        let g0 = vec![c; grid.len()];
        // G_T = G0(ω) + G0(-ω)·0 with n = 0
        let res = GenericReservoir::new(grid, g0, Occupation::Fixed { n: 0.0 }).unwrap();
        let pv = PvQuadrature {
            tail: TailModel::None,
            ..Default::default()
        };
        let p = generic_response(0.0, &res, &pv).unwrap();
        assert!(p.delta_t.abs() < 1e-12);
        assert!((p.gamma_t - TAU * c).abs() < 1e-12);
        // off centre: P∫_{-W}^{W} c/(w'-x) = c ln((W - x)/(W + x))
        let x = 30.0;
        let p = generic_response(x, &res, &pv).unwrap();
        let want = c * ((200.0 - x) / (200.0 + x)).ln();
        assert!((p.delta_t - want).abs() < 1e-6, "{} vs {want}", p.delta_t);
    }

    #[test]
    fn pv_off_node_frequency() {
        let tab = tabulated_lorentzian(0.0, 30.0, 30001);
        let r = cavity_res(0.0);
        let w = 9.8237;
        let p = generic_response(w, &tab, &PvQuadrature::default()).unwrap();
        assert!((p.delta_t - r.delta_t(w)).abs() < 1e-5 * 0.25);
    }

    #[test]
    fn pv_rejects_edges() {
        let tab = tabulated_lorentzian(0.0, 30.0, 601);
        let pv = PvQuadrature::default();
        assert!(matches!(generic_response(-30.0, &tab, &pv), Err(Error::Domain(_))));
        assert!(matches!(generic_response(31.0, &tab, &pv), Err(Error::Domain(_))));
    }

    #[test]
    fn pv_reports_unresolved_grid() {
        // a 0.02-wide line on a 0.1 grid is not resolved
        let grid: Vec<f64> = (0..401).map(|i| -20.0 + i as f64 * 0.1).collect();
        let g0: Vec<f64> = grid.iter().map(|w| 1.0 / (1.0 + (w - 3.05f64).powi(2) / 1e-4)).collect();
        let res = GenericReservoir::new(grid, g0, Occupation::Fixed { n: 0.0 }).unwrap();
        assert!(matches!(
            generic_response(3.0, &res, &PvQuadrature::default()),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn generic_input_validation() {
        let occ = Occupation::Fixed { n: 0.0 };
        let g: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert!(GenericReservoir::new(g.clone(), vec![1.0; 9], occ).is_err());
        assert!(GenericReservoir::new(g.clone(), vec![-1.0; 10], occ).is_err());
        let mut bad = g.clone();
        bad[4] = bad[3];
        assert!(GenericReservoir::new(bad, vec![1.0; 10], occ).is_err());
        let csv = "omega_over_kappa,G0\n0,1\n1,1\n2,1\n3,1\n4,1\n5,1\n6,1\n7,1\n";
        assert!(GenericReservoir::from_csv(csv.as_bytes(), occ).is_ok());
    }

    #[test]
    fn tabulated_response_interpolates() {
        let tab = tabulated_lorentzian(2.0, 30.0, 12001);
        let resp = TabulatedResponse::from_generic(&tab, &PvQuadrature::default(), 4).unwrap();
        let r = cavity_res(2.0);
        for &w in &[-10.0, -3.3, 0.0, 9.77, 10.0, 10.5] {
            assert!((resp.gamma_t(w) - r.gamma_t(w)).abs() < 1e-4 * 3.0);
            assert!((resp.delta_t(w) - r.delta_t(w)).abs() < 1e-3);
        }
        // far field falls off like -W/ω
        assert!(resp.delta_t(1e4).abs() < 1e-2);
    }

    proptest::proptest! {
        #[test]
        fn gamma_t_non_negative(w in -100.0f64..100.0, n_a in 0.0f64..1e4, wa in 5.0f64..100.0) {
            let r = LorentzianReservoir::normalized(wa, n_a).unwrap();
            proptest::prop_assert!(r.gamma_t(w) >= 0.0);
        }
    }
}
