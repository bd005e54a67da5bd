//! Time-domain simulation of the single-sideband gate.
//!
//! Two ions (spins `↑`/`↓`) share one rocking mode truncated at `n_max`
//! phonons. The full interaction-picture Hamiltonian is
//!
//! ```text
//! H/ħ = Σⱼ Ω_C/2 (σ⁺ⱼ + σ⁻ⱼ) + sgn(bⱼ) Ω_S/2 (e^{−iδt} a†σ⁻ⱼ + e^{iδt} a σ⁺ⱼ)
//! ```
//!
//! and the ideal gate it approximates when `Ω_C ≫ Ω_S, δ` is the
//! spin-dependent force `H'/ħ = Ω_S/2 (e^{−iδt} a† + e^{iδt} a) S_x` with
//! `S_x = ½ Σⱼ sgn(bⱼ) σ_x,ⱼ`, written in the frame rotating with the
//! carrier. The reference trajectory from [`evolve_effective`] is rotated
//! back into the frame of [`evolve`] so the two can be compared directly.
//!
//! Integration is classical RK4 with the Hamiltonian frozen at the step
//! midpoint. The norm is not renormalized; it is checked.

use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::HBAR;
use crate::error::{Error, Result};

/// Largest tolerated norm drift over a trajectory.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// Default number of steps per radian of the fastest rate in the problem.
const STEPS_PER_RADIAN: f64 = 160.0;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    fn bit(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// Pure state on spin ⊗ spin ⊗ Fock(0..=n_max).
///
/// Index of `|s₁ s₂⟩⊗|n⟩` is `(2·s₁ + s₂)·(n_max + 1) + n`, with `↑ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: DVector<C>,
    n_max: usize,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<C>, n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::Configuration("Fock truncation n_max must be at least 1".into()));
        }
        if amplitudes.len() != 4 * (n_max + 1) {
            return Err(Error::Configuration(format!(
                "state has {} amplitudes, expected {}",
                amplitudes.len(),
                4 * (n_max + 1)
            )));
        }
        let s = Self { amplitudes: DVector::from_vec(amplitudes), n_max };
        if (s.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Configuration(format!("state norm {} is not 1", s.norm())));
        }
        Ok(s)
    }

    /// `|s₁ s₂⟩ ⊗ |n⟩`.
    pub fn basis(s1: Spin, s2: Spin, n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::Configuration(format!("Fock level {n} exceeds n_max = {n_max}")));
        }
        let mut a = vec![ZERO; 4 * (n_max + 1)];
        a[(2 * s1.bit() + s2.bit()) * (n_max + 1) + n] = C::new(1.0, 0.0);
        Self::new(a, n_max)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C] {
        self.amplitudes.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &QuantumState) -> C {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Populations of |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩ summed over phonon number.
    pub fn spin_populations(&self) -> [f64; 4] {
        let m = self.n_max + 1;
        let mut p = [0.0; 4];
        for (k, pk) in p.iter_mut().enumerate() {
            *pk = (0..m).map(|n| self.amplitudes[k * m + n].norm_sqr()).sum();
        }
        p
    }

    /// Two-spin density matrix after tracing out the motion.
    pub fn reduced_spin(&self) -> Matrix4<C> {
        let m = self.n_max + 1;
        Matrix4::from_fn(|a, b| (0..m).map(|n| self.amplitudes[a * m + n] * self.amplitudes[b * m + n].conj()).sum())
    }

    /// Motional density matrix after tracing out both spins.
    pub fn reduced_motion(&self) -> DMatrix<C> {
        let m = self.n_max + 1;
        DMatrix::from_fn(m, m, |p, q| (0..4).map(|s| self.amplitudes[s * m + p] * self.amplitudes[s * m + q].conj()).sum())
    }

    pub fn motional_purity(&self) -> f64 {
        let rho = self.reduced_motion();
        (&rho * &rho).trace().re
    }
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence(rho: &Matrix4<C>) -> f64 {
    // ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y); in the |↑↑⟩,|↑↓⟩,|↓↑⟩,|↓↓⟩ basis σ_y⊗σ_y is
    // the anti-diagonal with signs (−1, 1, 1, −1).
    let yy = Matrix4::from_fn(|a, b| {
        if a + b == 3 {
            C::new(if a == 0 || a == 3 { -1.0 } else { 1.0 }, 0.0)
        } else {
            ZERO
        }
    });
    let tilde = yy * rho.conjugate() * yy;
    let eig = SymmetricEigen::new(*rho);
    let sqrt_rho = eig.eigenvectors
        * Matrix4::from_diagonal(&eig.eigenvalues.map(|v| C::new(v.max(0.0).sqrt(), 0.0)))
        * eig.eigenvectors.adjoint();
    let r = sqrt_rho * tilde * sqrt_rho;
    let r = (r + r.adjoint()) * C::new(0.5, 0.0);
    let mut lambdas: Vec<f64> = SymmetricEigen::new(r).eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}

/// Drive parameters; rates in rad/s, times in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SSDriveConfig {
    pub omega_c: f64,
    pub omega_s: f64,
    pub delta: f64,
    /// sgn(b_j) of each ion in the rocking mode.
    pub b_signs: [f64; 2],
    pub duration: f64,
    pub dt: f64,
    pub n_max: usize,
}

impl SSDriveConfig {
    /// Config with the default step: the duration split into whole steps no
    /// longer than `1/160` of a radian of the fastest rate.
    pub fn new(omega_c: f64, omega_s: f64, delta: f64, duration: f64, n_max: usize) -> Result<Self> {
        let mut cfg = Self { omega_c, omega_s, delta, b_signs: [1.0, -1.0], duration, dt: duration, n_max };
        cfg.dt = duration / (duration * cfg.fastest_rate() * STEPS_PER_RADIAN).ceil().max(1.0);
        cfg.validate()?;
        Ok(cfg)
    }

    /// The reference design point: `δ = Ω_S = 2π×2 kHz`, `Ω_C = ratio·Ω_S`,
    /// one gate time `2π/δ`.
    pub fn reference(ratio: f64, n_max: usize) -> Result<Self> {
        let omega_s = crate::constants::angular(2e3);
        Self::new(ratio * omega_s, omega_s, omega_s, 2.0 * std::f64::consts::PI / omega_s, n_max)
    }

    fn fastest_rate(&self) -> f64 {
        self.omega_c.abs().max(self.delta.abs()).max(self.omega_s.abs() * (self.n_max as f64).sqrt())
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Configuration("duration must be positive".into()));
        }
        if self.n_max < 1 {
            return Err(Error::Configuration("n_max must be at least 1".into()));
        }
        if self.b_signs.iter().any(|s| s.abs() != 1.0) {
            return Err(Error::Configuration("b_signs must be ±1".into()));
        }
        let limit = 2.0 * std::f64::consts::PI / (50.0 * self.fastest_rate());
        if !(self.dt > 0.0) || self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Configuration(format!("dt = {:.3e} s exceeds the stability limit {limit:.3e} s", self.dt)));
        }
        let steps = self.duration / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps {
            return Err(Error::Configuration("duration must be a whole number of steps".into()));
        }
        Ok(())
    }
}

/// Time-independent pieces of a Hamiltonian of the form
/// `H(t) = H₀ + e^{−iδt} A + e^{iδt} A†`, in rad/s (i.e. H/ħ).
struct Pieces {
    h0: DMatrix<C>,
    a: DMatrix<C>,
    delta: f64,
}

impl Pieces {
    fn at(&self, t: f64) -> DMatrix<C> {
        let ph = C::from_polar(1.0, -self.delta * t);
        let a = &self.a * ph;
        &self.h0 + &a + a.adjoint()
    }
}

fn index(s1: usize, s2: usize, n: usize, n_max: usize) -> usize {
    (2 * s1 + s2) * (n_max + 1) + n
}

fn flip(s: usize) -> usize {
    1 - s
}

fn full_pieces(cfg: &SSDriveConfig) -> Pieces {
    let m = cfg.n_max + 1;
    let dim = 4 * m;
    let mut h0 = DMatrix::zeros(dim, dim);
    let mut a = DMatrix::zeros(dim, dim);
    for s1 in 0..2 {
        for s2 in 0..2 {
            for n in 0..m {
                let from = index(s1, s2, n, cfg.n_max);
                // carrier flips either spin
                h0[(index(flip(s1), s2, n, cfg.n_max), from)] += C::new(cfg.omega_c / 2.0, 0.0);
                h0[(index(s1, flip(s2), n, cfg.n_max), from)] += C::new(cfg.omega_c / 2.0, 0.0);
                // a†σ⁻ⱼ: ↑ → ↓ while adding a phonon
                if n + 1 < m {
                    let amp = (n as f64 + 1.0).sqrt() / 2.0 * cfg.omega_s;
                    if s1 == 0 {
                        a[(index(1, s2, n + 1, cfg.n_max), from)] += C::new(cfg.b_signs[0] * amp, 0.0);
                    }
                    if s2 == 0 {
                        a[(index(s1, 1, n + 1, cfg.n_max), from)] += C::new(cfg.b_signs[1] * amp, 0.0);
                    }
                }
            }
        }
    }
    Pieces { h0, a, delta: cfg.delta }
}

fn effective_pieces(cfg: &SSDriveConfig) -> Pieces {
    let m = cfg.n_max + 1;
    let dim = 4 * m;
    let mut a = DMatrix::zeros(dim, dim);
    for s1 in 0..2 {
        for s2 in 0..2 {
            for n in 0..m - 1 {
                let from = index(s1, s2, n, cfg.n_max);
                let amp = (n as f64 + 1.0).sqrt() * cfg.omega_s / 2.0 / 2.0;
                // a† ⊗ ½ Σ sgn(bⱼ) σ_x,ⱼ
                a[(index(flip(s1), s2, n + 1, cfg.n_max), from)] += C::new(cfg.b_signs[0] * amp, 0.0);
                a[(index(s1, flip(s2), n + 1, cfg.n_max), from)] += C::new(cfg.b_signs[1] * amp, 0.0);
            }
        }
    }
    Pieces { h0: DMatrix::zeros(dim, dim), a, delta: cfg.delta }
}

/// The full Hamiltonian at time `t`, in joules.
pub fn build_ss_hamiltonian(cfg: &SSDriveConfig, t: f64) -> DMatrix<C> {
    full_pieces(cfg).at(t) * C::new(HBAR, 0.0)
}

/// The effective (spin-dependent force) Hamiltonian at time `t`, in joules,
/// in the frame rotating with the carrier.
pub fn build_effective_hamiltonian(cfg: &SSDriveConfig, t: f64) -> DMatrix<C> {
    effective_pieces(cfg).at(t) * C::new(HBAR, 0.0)
}

/// States sampled along an evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
}

impl Trajectory {
    pub fn final_state(&self) -> &QuantumState {
        self.states.last().expect("trajectories hold at least the initial state")
    }

    /// Largest |‖ψ‖ − 1| over the samples.
    pub fn max_norm_drift(&self) -> f64 {
        self.states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// How many samples (including both end points) to keep.
pub const DEFAULT_SAMPLES: usize = 201;

fn integrate(
    pieces: &Pieces,
    cfg: &SSDriveConfig,
    psi0: &QuantumState,
    samples: usize,
    frame: impl Fn(f64, &DVector<C>) -> DVector<C>,
) -> Result<Trajectory> {
    cfg.validate()?;
    if psi0.n_max != cfg.n_max {
        return Err(Error::Configuration(format!(
            "state truncation {} differs from drive truncation {}",
            psi0.n_max, cfg.n_max
        )));
    }
    let steps = cfg.steps();
    let samples = samples.clamp(2, steps + 1);
    let mut marks: Vec<usize> = (0..samples).map(|k| k * steps / (samples - 1)).collect();
    marks.dedup();
    let mut psi = psi0.amplitudes.clone();
    let mut times = vec![0.0];
    let mut states = vec![QuantumState { amplitudes: frame(0.0, &psi), n_max: cfg.n_max }];
    let mut next = 1;
    let dt = cfg.dt;
    let minus_i = -I;
    for step in 0..steps {
        let t = step as f64 * dt;
        let h = pieces.at(t + dt / 2.0);
        // constant H over the step: RK4 for ψ' = −iHψ
        let k1 = (&h * &psi) * minus_i;
        let k2 = (&h * (&psi + &k1 * C::new(dt / 2.0, 0.0))) * minus_i;
        let k3 = (&h * (&psi + &k2 * C::new(dt / 2.0, 0.0))) * minus_i;
        let k4 = (&h * (&psi + &k3 * C::new(dt, 0.0))) * minus_i;
        psi += (k1 + k2 * C::new(2.0, 0.0) + k3 * C::new(2.0, 0.0) + k4) * C::new(dt / 6.0, 0.0);
        if next < marks.len() && step + 1 == marks[next] {
            let t_now = (step + 1) as f64 * dt;
            let drift = (psi.norm() - 1.0).abs();
            if drift > NORM_TOLERANCE {
                return Err(Error::Integrator(format!(
                    "norm drifted by {drift:.2e} by t = {t_now:.3e} s; reduce dt (now {dt:.3e} s)"
                )));
            }
            times.push(t_now);
            states.push(QuantumState { amplitudes: frame(t_now, &psi), n_max: cfg.n_max });
            next += 1;
        }
    }
    Ok(Trajectory { times, states })
}

/// Integrates the full Hamiltonian, keeping `DEFAULT_SAMPLES` snapshots.
pub fn evolve(cfg: &SSDriveConfig, psi0: &QuantumState) -> Result<Trajectory> {
    evolve_sampled(cfg, psi0, DEFAULT_SAMPLES)
}

pub fn evolve_sampled(cfg: &SSDriveConfig, psi0: &QuantumState, samples: usize) -> Result<Trajectory> {
    integrate(&full_pieces(cfg), cfg, psi0, samples, |_, psi| psi.clone())
}

/// `exp(−i Ω_C t/2 Σⱼ σ_x,ⱼ)` applied to a state vector.
fn carrier_rotation(cfg: &SSDriveConfig, t: f64, psi: &DVector<C>) -> DVector<C> {
    let theta = cfg.omega_c * t / 2.0;
    let (c, s) = (C::new(theta.cos(), 0.0), C::new(0.0, -theta.sin()));
    let m = cfg.n_max + 1;
    let mut out = psi.clone();
    for spin in 0..2 {
        let src = out.clone();
        for s1 in 0..2 {
            for s2 in 0..2 {
                let (f1, f2) = if spin == 0 { (flip(s1), s2) } else { (s1, flip(s2)) };
                for n in 0..m {
                    out[index(s1, s2, n, cfg.n_max)] = c * src[index(s1, s2, n, cfg.n_max)] + s * src[index(f1, f2, n, cfg.n_max)];
                }
            }
        }
    }
    out
}

/// Integrates the effective Hamiltonian. Samples are rotated by the carrier
/// evolution so they live in the same frame as [`evolve`]'s.
pub fn evolve_effective(cfg: &SSDriveConfig, psi0: &QuantumState) -> Result<Trajectory> {
    evolve_effective_sampled(cfg, psi0, DEFAULT_SAMPLES)
}

pub fn evolve_effective_sampled(cfg: &SSDriveConfig, psi0: &QuantumState, samples: usize) -> Result<Trajectory> {
    // Start from the same lab-frame state: undo the (trivial at t = 0) rotation.
    integrate(&effective_pieces(cfg), cfg, psi0, samples, |t, psi| carrier_rotation(cfg, t, psi))
}

/// Gate error of a trajectory against the reference, at the final time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Infidelity {
    /// `1 − |⟨ψ_ideal|ψ⟩|²` on the full spin ⊗ motion space.
    pub full: f64,
    /// `1 − Tr(ρ_ideal ρ)` on the spins alone, motion traced out.
    pub spin: f64,
}

fn infidelity_of(full: &QuantumState, ideal: &QuantumState) -> Infidelity {
    // Normalized overlaps: the integrator's norm drift is a diagnostic and
    // should not masquerade as gate error.
    let (ni, nf) = (ideal.norm().powi(2), full.norm().powi(2));
    let overlap = ideal.overlap(full).norm_sqr() / (ni * nf);
    let (ri, rf) = (ideal.reduced_spin(), full.reduced_spin());
    let spin_f = (ri * rf).trace().re / (ni * nf);
    Infidelity { full: (1.0 - overlap).clamp(0.0, 1.0), spin: (1.0 - spin_f).clamp(0.0, 1.0) }
}

pub fn bell_infidelity(full: &Trajectory, ideal: &Trajectory) -> Result<Infidelity> {
    let same = full.times.len() == ideal.times.len()
        && full.times.iter().zip(&ideal.times).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1e-30));
    if !same {
        return Err(Error::Alignment(format!(
            "trajectories sampled on different grids ({} vs {} points)",
            full.times.len(),
            ideal.times.len()
        )));
    }
    if full.final_state().dim() != ideal.final_state().dim() {
        return Err(Error::Alignment("trajectories use different Fock truncations".into()));
    }
    Ok(infidelity_of(full.final_state(), ideal.final_state()))
}

/// Initial state used throughout: `|↑↓⟩ ⊗ |0⟩`.
pub fn initial_state(n_max: usize) -> QuantumState {
    QuantumState::basis(Spin::Up, Spin::Down, 0, n_max).expect("n_max ≥ 1")
}

/// One simulated gate against its reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioPoint {
    pub ratio: f64,
    pub infidelity: Infidelity,
}

/// Gate error as a function of `Ω_C/Ω_S`, other parameters from `base`.
/// Each ratio gets its own default step. Runs in parallel; output sorted.
pub fn infidelity_vs_ratio(ratios: &[f64], base: &SSDriveConfig) -> Result<Vec<RatioPoint>> {
    if let Some(r) = ratios.iter().find(|r| !(**r >= 2.0)) {
        return Err(Error::Configuration(format!("Rabi ratio {r} is below 2")));
    }
    let mut sorted = ratios.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .par_iter()
        .map(|&ratio| {
            let mut cfg = SSDriveConfig::new(ratio * base.omega_s, base.omega_s, base.delta, base.duration, base.n_max)?;
            cfg.b_signs = base.b_signs;
            let psi0 = initial_state(cfg.n_max);
            let full = evolve_sampled(&cfg, &psi0, 2)?;
            let ideal = evolve_effective_sampled(&cfg, &psi0, 2)?;
            Ok(RatioPoint { ratio, infidelity: bell_infidelity(&full, &ideal)? })
        })
        .collect()
}

/// CSV with `t_s`, the four spin populations, and the spin and full-space
/// fidelities against the reference at every sample.
pub fn write_trajectory_csv(full: &Trajectory, ideal: &Trajectory, path: &Path) -> Result<()> {
    bell_infidelity(full, ideal)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t_s", "P_uu", "P_ud", "P_du", "P_dd", "spin_fidelity", "full_fidelity"])?;
    for ((t, s), r) in full.times.iter().zip(&full.states).zip(&ideal.states) {
        let p = s.spin_populations();
        let inf = infidelity_of(s, r);
        let mut row = vec![format!("{t:e}")];
        row.extend(p.iter().map(|v| format!("{v:e}")));
        row.push(format!("{:e}", 1.0 - inf.spin));
        row.push(format!("{:e}", 1.0 - inf.full));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
