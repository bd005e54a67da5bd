//! Superconducting resonator spectroscopy: forward models for notch-type
//! and coupled-pair resonators, steady-state photon numbers, the
//! photon-to-current calibration, nonlinear loss, and spectrum fitters.
//!
//! ```
//! use sctrap::resonator::{notch_s21, ResonatorParams};
//!
//! let p = ResonatorParams::new(6.116e9, 6e4, 1e4).unwrap();
//! let dip = notch_s21(p.f_r, &p).norm();
//! assert!((dip - (1.0 - p.q_tot() / p.q_ext)).abs() < 1e-12);
//! ```

mod fit;
mod models;
mod trace;

pub use fit::{fit_coupled, fit_notch, Background, FitReport, ParamUncertainty};
pub use models::{
    coupled_amplitudes, coupled_s11, current_from_photons, nonlinear_q, notch_s21, steady_state_photons,
    with_nonlinear_loss, Drive, Mode, NonlinearDissipation, ResonatorParams,
};
pub use trace::{SpectrumTrace, TraceKind};
