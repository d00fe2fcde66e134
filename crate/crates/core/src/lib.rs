//! Effective squeezed-reservoir master-equation coefficients for a two-level
//! system whose level spacing is periodically modulated while it is coupled to
//! a thermal reservoir.
//!
//! Units: frequencies are measured in units of the cavity linewidth κ and
//! rates in units of the unmodulated cavity decay rate γ_c, except in
//! [`rydberg`], which works in SI.
//!
//! The pipeline is
//! [`modulation`] (sideband decomposition ε_q, ν_q) →
//! [`reservoir`] (response γ_T, Δ_T) →
//! [`mecoeff`] (γN, γ(N+1), γM, Δ) →
//! [`dynamics`] (dephasing, spectra).

pub mod dynamics;
pub mod error;
pub mod mecoeff;
pub mod modulation;
pub mod quadrature;
pub mod report;
pub mod reservoir;
pub mod rydberg;
pub mod specfun;

pub use error::{Error, Result};
pub use mecoeff::{MECoefficients, SqueezingClass};
pub use modulation::{FourierModulation, ModulationSpec};
pub use reservoir::{GenericReservoir, LorentzianReservoir, Response};
