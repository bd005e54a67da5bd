use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{angular, HBAR};
use crate::error::{Error, Result};

/// Parameters of one resonator, or of an identical top/bottom pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorParams {
    /// Bare resonance frequency, Hz.
    pub f_r: f64,
    pub q_int: f64,
    pub q_ext: f64,
    /// Coupling between the two resonators, Hz; the normal modes sit at `f_r ± g_m`.
    pub g_m: f64,
    /// Top/bottom detuning, Hz. Carried for bookkeeping; the models assume zero.
    pub delta_bt: f64,
    /// Current per square root of photon number, A.
    pub k_current: f64,
}

impl ResonatorParams {
    pub fn new(f_r: f64, q_int: f64, q_ext: f64) -> Result<Self> {
        let p = Self { f_r, q_int, q_ext, g_m: 0.0, delta_bt: 0.0, k_current: 0.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_coupling(mut self, g_m: f64) -> Result<Self> {
        self.g_m = g_m;
        self.validate()?;
        Ok(self)
    }

    pub fn with_current_coefficient(mut self, k_current: f64) -> Result<Self> {
        self.k_current = k_current;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.f_r > 0.0
            && self.f_r.is_finite()
            && self.q_int > 0.0
            && self.q_ext > 0.0
            && !self.q_ext.is_nan()
            && self.g_m >= 0.0
            && self.g_m.is_finite()
            && self.k_current >= 0.0
            && self.k_current.is_finite()
            && self.delta_bt.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Configuration(format!("invalid resonator parameters {self:?}")))
        }
    }

    /// Loaded quality factor. `q_int = ∞` is allowed and gives `q_ext`.
    pub fn q_tot(&self) -> f64 {
        1.0 / (1.0 / self.q_int + 1.0 / self.q_ext)
    }

    pub fn omega_r(&self) -> f64 {
        angular(self.f_r)
    }

    /// Total energy decay rate `ω_r/Q_tot`, rad/s.
    pub fn kappa(&self) -> f64 {
        self.omega_r() / self.q_tot()
    }

    /// External (port) decay rate `ω_r/Q_ext`, rad/s.
    pub fn kappa_ext(&self) -> f64 {
        self.omega_r() / self.q_ext
    }
}

/// Power-law nonlinear loss, `Q_nl = Q_ext (P_c/P_nl)^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearDissipation {
    pub p_c: f64,
    pub r: f64,
}

impl NonlinearDissipation {
    pub fn new(p_c: f64, r: f64) -> Result<Self> {
        if !(p_c > 0.0 && p_c.is_finite() && r > 0.0 && r.is_finite()) {
            return Err(Error::Configuration(format!("nonlinear dissipation needs P_c > 0 and r > 0, got {p_c}, {r}")));
        }
        Ok(Self { p_c, r })
    }
}

/// Which port(s) of the coupled pair are driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Drive {
    /// Both ports in phase; couples only to the H mode.
    Symmetric,
    /// Both ports in anti-phase; couples only to the AH mode.
    Antisymmetric,
    SinglePort,
}

/// Mode addressed by a photon-number calculation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Bare,
    /// Anti-Helmholtz-like, at `f_r − g_m`.
    AH,
    /// Helmholtz-like, at `f_r + g_m`.
    H,
}

impl Mode {
    pub fn frequency(self, params: &ResonatorParams) -> f64 {
        match self {
            Mode::Bare => params.f_r,
            Mode::AH => params.f_r - params.g_m,
            Mode::H => params.f_r + params.g_m,
        }
    }
}

/// Ideal notch-type transmission (no cable background).
pub fn notch_s21(f: f64, params: &ResonatorParams) -> Complex64 {
    let q = params.q_tot();
    let x = (f - params.f_r) / params.f_r;
    Complex64::new(1.0, 0.0) - (q / params.q_ext) / Complex64::new(1.0, 2.0 * q * x)
}

/// Steady-state intracavity amplitudes `[a_t, a_b]` of the coupled pair for
/// port inputs `[a_in,t, a_in,b]` (same photon-flux normalisation), at drive
/// frequency `f`. Solves the 2×2 linear system directly.
pub fn coupled_amplitudes(f: f64, params: &ResonatorParams, inputs: [Complex64; 2]) -> [Complex64; 2] {
    let delta = angular(f - params.f_r);
    let g = angular(params.g_m);
    let diag = Complex64::new(params.kappa() / 2.0, -delta);
    // (κ/2 − iΔ) a_t + i g a_b = √κe a_in,t, and the mirror equation for a_b.
    let off = Complex64::new(0.0, g);
    let s = params.kappa_ext().sqrt();
    let (b0, b1) = (inputs[0] * s, inputs[1] * s);
    let det = diag * diag - off * off;
    [(b0 * diag - off * b1) / det, (diag * b1 - off * b0) / det]
}

/// Reflection seen at the top port of the coupled pair.
///
/// The drive power does not enter a linear model; it is accepted so that a
/// call site reads the same as for [`steady_state_photons`] and is checked for
/// sanity only.
pub fn coupled_s11(f: f64, drive_power: f64, params: &ResonatorParams, drive: Drive) -> Complex64 {
    debug_assert!(drive_power >= 0.0);
    let one = Complex64::new(1.0, 0.0);
    let inputs = match drive {
        Drive::Symmetric => [one, one],
        Drive::Antisymmetric => [one, -one],
        Drive::SinglePort => [one, Complex64::new(0.0, 0.0)],
    };
    let a = coupled_amplitudes(f, params, inputs);
    one - params.kappa_ext().sqrt() * a[0]
}

/// Mean photon number of the driven mode, in the linear regime.
///
/// `n = κ_ext P / (ħ ω_d ((κ/2)² + Δ²))` with Δ the detuning of the drive
/// from the selected mode.
pub fn steady_state_photons(drive_power: f64, f_drive: f64, params: &ResonatorParams, mode: Mode) -> f64 {
    if drive_power == 0.0 {
        return 0.0;
    }
    let omega_d = angular(f_drive);
    let delta = angular(f_drive - mode.frequency(params));
    let half_kappa = params.kappa() / 2.0;
    params.kappa_ext() * drive_power / (HBAR * omega_d * (half_kappa * half_kappa + delta * delta))
}

pub fn current_from_photons(n_photons: f64, k_current: f64) -> f64 {
    k_current * n_photons.max(0.0).sqrt()
}

pub fn nonlinear_q(p_nl: f64, nl: &NonlinearDissipation, q_ext: f64) -> f64 {
    q_ext * (nl.p_c / p_nl).powf(nl.r)
}

/// Adds a nonlinear loss channel in parallel with the linear ones.
pub fn with_nonlinear_loss(params: &ResonatorParams, q_nl: f64) -> ResonatorParams {
    let mut p = *params;
    p.q_int = 1.0 / (1.0 / params.q_int + 1.0 / q_nl);
    p
}
