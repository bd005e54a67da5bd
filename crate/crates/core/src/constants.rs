//! Physical constants (CODATA 2018) and ion species data.
//!
//! Everything in the crate works in SI units; conversions from user-facing
//! units happen once, at the config boundary (see [`crate::units`]).

use std::f64::consts::PI;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permeability, N/A².
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Atomic mass constant, kg.
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;
/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Joules per electron-volt.
pub const EV: f64 = ELEMENTARY_CHARGE;

/// Relative atomic mass of ⁹Be.
pub const BE9_ATOMIC_MASS_U: f64 = 9.012_183_1;

/// Relative permittivity of silicon.
pub const EPS_SILICON: f64 = 11.9;

/// Angular frequency (rad/s) from an ordinary frequency in Hz.
#[inline]
pub fn angular(f_hz: f64) -> f64 {
    2.0 * PI * f_hz
}

/// Ordinary frequency (Hz) from an angular frequency in rad/s.
#[inline]
pub fn ordinary(omega: f64) -> f64 {
    omega / (2.0 * PI)
}
