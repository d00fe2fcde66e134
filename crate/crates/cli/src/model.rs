//! Turning a [`ModelSpec`] into master-equation coefficients.

use std::fs::File;
use std::sync::Arc;

use thermosqueeze::mecoeff::{
    default_pair_tol, longtime_coefficients, nonmarkov_coefficients, sinusoidal_converged_with, Converged,
    QuadConfig, QMAX_LIMIT, QMAX_REL_TOL,
};
use thermosqueeze::modulation::{numeric_fourier, sinusoidal_fourier, FourierModulation, PeriodicDelta};
use thermosqueeze::reservoir::{Occupation, PvQuadrature, TabulatedResponse};
use thermosqueeze::{Error, GenericReservoir, LorentzianReservoir, MECoefficients, Response};

use crate::config::{ModelSpec, ModulationSource, ReservoirSource};
use crate::error::CliResult;

/// Target number of samples when tabulating a reservoir response.
pub const TABLE_SAMPLES: usize = 2000;

/// Input tables read once and shared between scan points.
#[derive(Debug, Clone, Default)]
pub struct Tables {
    pub reservoir: Option<Arc<GenericReservoir>>,
    pub delta: Option<Arc<PeriodicDelta>>,
}

impl Tables {
    pub fn load(spec: &ModelSpec) -> CliResult<Self> {
        let reservoir = match &spec.reservoir {
            ReservoirSource::Lorentzian => None,
            ReservoirSource::Tabulated { path, .. } => Some(Arc::new(GenericReservoir::from_csv(
                File::open(path)?,
                Occupation::Fixed { n: 0.0 },
            )?)),
        };
        let delta = match &spec.modulation {
            ModulationSource::Sinusoidal => None,
            ModulationSource::Tabulated(path) => Some(Arc::new(PeriodicDelta::from_csv(File::open(path)?)?)),
        };
        Ok(Self { reservoir, delta })
    }
}

/// The reservoir response for `spec`.
pub fn response(spec: &ModelSpec, tables: &Tables) -> CliResult<Box<dyn Response>> {
    match (&spec.reservoir, &tables.reservoir) {
        (ReservoirSource::Tabulated { temperature, stride, .. }, Some(table)) => {
            let occupation = match temperature {
                Some(t) => Occupation::Planck { temperature: *t },
                None => Occupation::Fixed { n: spec.n_a },
            };
            let res = table.with_occupation(occupation)?;
            let stride = stride.unwrap_or_else(|| (res.grid().len() / TABLE_SAMPLES).max(1));
            Ok(Box::new(TabulatedResponse::from_generic(&res, &PvQuadrature::default(), stride)?))
        }
        _ => Ok(Box::new(LorentzianReservoir::new(spec.omega_a, 1.0, spec.n_a, 1.0)?)),
    }
}

fn sidebands(spec: &ModelSpec, tables: &Tables, qmax: i32) -> CliResult<FourierModulation> {
    Ok(match &tables.delta {
        Some(delta) => numeric_fourier(delta, qmax, spec.quad_points)?,
        None => sinusoidal_fourier(spec.z, spec.m, spec.omega_a, qmax)?,
    })
}

/// Long-time coefficients of a tabulated modulation, doubling the sideband
/// window until the result settles.
fn converged_generic(spec: &ModelSpec, tables: &Tables, resp: &dyn Response) -> CliResult<Converged> {
    let tol = default_pair_tol(spec.omega_a);
    let at = |q| -> CliResult<MECoefficients> {
        Ok(longtime_coefficients(&sidebands(spec, tables, q)?, resp, spec.omega_a, tol))
    };
    let mut q = spec.qmax;
    let mut base = at(q)?;
    loop {
        let doubled = at(2 * q)?;
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
                what: format!("sideband sum at qmax = {q}"),
                estimate,
                tolerance: QMAX_REL_TOL,
            }
            .into());
        }
        log::info!("sideband sum not converged at qmax = {q} (change {estimate:.2e}); doubling");
        q *= 2;
        base = doubled;
    }
}

/// Coefficients for one parameter set.
///
/// The sinusoidal modulation uses the closed Bessel-product form (which
/// also requires the resonance constraint); a tabulated modulation uses the
/// general sideband sums. With a finite `time` the finite-time kernel
/// integrals replace the long-time sums at the sideband window found
/// converged in the long-time limit.
pub fn evaluate(spec: &ModelSpec, tables: &Tables) -> CliResult<Converged> {
    let resp = response(spec, tables)?;
    let long = match tables.delta {
        None => sinusoidal_converged_with(spec.z, spec.m, resp.as_ref(), spec.omega_a, spec.qmax)?,
        Some(_) => converged_generic(spec, tables, resp.as_ref())?,
    };
    match spec.time {
        None => Ok(long),
        Some(t) => {
            let fm = sidebands(spec, tables, long.qmax_used)?;
            let coeffs = nonmarkov_coefficients(t, &fm, resp.as_ref(), spec.omega_a, &QuadConfig::default())?;
            Ok(Converged { coeffs, ..long })
        }
    }
}

/// Coefficients of the unmodulated atom with the same reservoir.
pub fn evaluate_unmodulated(spec: &ModelSpec, tables: &Tables) -> CliResult<MECoefficients> {
    let resp = response(spec, tables)?;
    let fm = FourierModulation::unmodulated();
    Ok(match spec.time {
        None => longtime_coefficients(&fm, resp.as_ref(), spec.omega_a, default_pair_tol(spec.omega_a)),
        Some(t) => nonmarkov_coefficients(t, &fm, resp.as_ref(), spec.omega_a, &QuadConfig::default())?,
    })
}
