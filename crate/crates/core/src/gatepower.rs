//! Microwave input-power budgets for resonator-driven two-qubit gates.
//!
//! Two schemes are modelled. In the Mølmer–Sørensen (MS) scheme, red and
//! blue sidebands sit `±ω_rock` away from the AH mode and reach the ions
//! through its Lorentzian tails. In the single-sideband (SS) scheme, a red
//! sideband resonates with the AH mode and a strong carrier goes through the
//! tail of the H mode, which sits `2g_m` higher. Every power below is
//! "photons needed" × "input power per photon":
//!
//! ```text
//! P_MS = ħ (4ω_rock² + (ω_r/Q_tot)²) Q_ext · n_M
//! P_C  = ħ (4(2g_m − ω_rock)² + (ω_r/Q_tot)²) Q_ext / 2 · n_C
//! P_R  = ħ (ω_r/Q_tot)² Q_ext / 2 · n_S
//! ```
//!
//! where `n_X = (Ω_X / Ω_X,1)²` and `Ω_X,1` is the Rabi rate produced by one
//! photon. Couplings enter as magnitudes: power does not care about phase.
//!
//! ```
//! use sctrap::gatepower::{ms_power, GatePhysics};
//!
//! let budget = ms_power(&GatePhysics::reference(), 1e6, 122.0);
//! assert!((budget.p_total - 12.9e-3).abs() < 0.1e-3);
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{angular, HBAR};
use crate::error::{Error, Result};

/// Every coupling parameter entering the power budgets. Angles in degrees,
/// rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GatePhysics {
    /// Magnetic transition moment μ∥, J/T.
    pub mu_parallel: f64,
    /// AH-mode single-photon field gradient along the HF axis, T/m.
    pub dbdr_single_photon: f64,
    /// H-mode single-photon field, T.
    pub b_h0: f64,
    /// Rocking-mode amplitude of each ion.
    pub b_j: f64,
    /// Zero-point motion, m.
    pub q0: f64,
    /// Angle of the DC field in the trap plane.
    pub phi_deg: f64,
    pub theta_hf_deg: f64,
    pub g_m: f64,
    pub omega_rock: f64,
    pub omega_r: f64,
    pub omega_m: f64,
    pub omega_s: f64,
    pub omega_c: f64,
}

impl GatePhysics {
    /// The reference design parameter set used for the power maps.
    pub fn reference() -> Self {
        let omega_s = angular(2e3);
        Self {
            mu_parallel: -9.28e-24,
            dbdr_single_photon: 1.2e-6,
            b_h0: 5.9e-11,
            b_j: std::f64::consts::FRAC_1_SQRT_2,
            q0: 9.30e-9,
            phi_deg: 45.0,
            theta_hf_deg: 36.0,
            g_m: angular(30e6),
            omega_rock: angular(4.4e6),
            omega_r: angular(1.074e9),
            omega_m: angular(1e3),
            omega_s,
            omega_c: 15.0 * omega_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let values = [
            self.mu_parallel,
            self.dbdr_single_photon,
            self.b_h0,
            self.b_j,
            self.q0,
            self.phi_deg,
            self.theta_hf_deg,
            self.g_m,
            self.omega_rock,
            self.omega_r,
            self.omega_m,
            self.omega_s,
            self.omega_c,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Configuration("gate physics parameters must be finite".into()));
        }
        if self.b_j.abs() > 1.0 {
            return Err(Error::Configuration(format!("|b_j| = {} exceeds 1", self.b_j.abs())));
        }
        if self.omega_r <= 0.0 {
            return Err(Error::Configuration("resonator frequency must be positive".into()));
        }
        Ok(())
    }

    fn cos_phi(&self) -> f64 {
        self.phi_deg.to_radians().cos()
    }
}

/// Sideband Rabi rate produced by a single AH-mode photon, rad/s.
pub fn sideband_rabi_per_photon(p: &GatePhysics) -> f64 {
    (p.mu_parallel * p.dbdr_single_photon * p.b_j * p.q0 * p.cos_phi()).abs() / HBAR
}

/// Carrier Rabi rate produced by a single H-mode photon, rad/s.
pub fn carrier_rabi_per_photon(p: &GatePhysics) -> f64 {
    (p.mu_parallel * p.b_h0 * p.cos_phi()).abs() / HBAR
}

/// Photons needed for a target Rabi rate given the per-photon rate.
pub fn photons_for(target: f64, per_photon: f64) -> f64 {
    if target == 0.0 {
        0.0
    } else {
        (target / per_photon).powi(2)
    }
}

/// Zero-point motion `√(ħ/2Mω)` of a mode of mass `mass` (kg) and angular frequency `omega`.
pub fn zero_point_motion(mass: f64, omega: f64) -> f64 {
    (HBAR / (2.0 * mass * omega)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    MS,
    SS,
}

impl Scheme {
    pub fn component_names(self) -> &'static [&'static str] {
        match self {
            Scheme::MS => &["P_MS"],
            Scheme::SS => &["P_C", "P_R"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    pub scheme: Scheme,
    #[serde(rename = "P_total_W")]
    pub p_total: f64,
    /// Component name → W.
    pub components: BTreeMap<String, f64>,
    pub q_int: f64,
    pub q_ext: f64,
}

fn q_tot(q_int: f64, q_ext: f64) -> f64 {
    1.0 / (1.0 / q_int + 1.0 / q_ext)
}

fn components(p: &GatePhysics, q_int: f64, q_ext: f64, scheme: Scheme) -> Vec<f64> {
    let kappa = p.omega_r / q_tot(q_int, q_ext);
    match scheme {
        Scheme::MS => {
            let n = photons_for(p.omega_m, sideband_rabi_per_photon(p));
            vec![HBAR * (4.0 * p.omega_rock.powi(2) + kappa * kappa) * q_ext * n]
        }
        Scheme::SS => {
            let n_c = photons_for(p.omega_c, carrier_rabi_per_photon(p));
            let n_s = photons_for(p.omega_s, sideband_rabi_per_photon(p));
            let detuning = 2.0 * p.g_m - p.omega_rock;
            vec![
                HBAR * (4.0 * detuning * detuning + kappa * kappa) * q_ext / 2.0 * n_c,
                HBAR * kappa * kappa * q_ext / 2.0 * n_s,
            ]
        }
    }
}

fn total(p: &GatePhysics, q_int: f64, q_ext: f64, scheme: Scheme) -> f64 {
    components(p, q_int, q_ext, scheme).iter().sum()
}

fn budget(p: &GatePhysics, q_int: f64, q_ext: f64, scheme: Scheme) -> PowerBudget {
    let parts = components(p, q_int, q_ext, scheme);
    PowerBudget {
        scheme,
        p_total: parts.iter().sum(),
        components: scheme.component_names().iter().map(|s| s.to_string()).zip(parts).collect(),
        q_int,
        q_ext,
    }
}

pub fn ms_power(p: &GatePhysics, q_int: f64, q_ext: f64) -> PowerBudget {
    budget(p, q_int, q_ext, Scheme::MS)
}

pub fn ss_power(p: &GatePhysics, q_int: f64, q_ext: f64) -> PowerBudget {
    budget(p, q_int, q_ext, Scheme::SS)
}

pub fn scheme_power(p: &GatePhysics, q_int: f64, q_ext: f64, scheme: Scheme) -> PowerBudget {
    budget(p, q_int, q_ext, scheme)
}

/// Where the two competing Q_ext dependencies cross when Q_int → ∞.
pub fn asymptotic_optimum(p: &GatePhysics, scheme: Scheme) -> f64 {
    match scheme {
        Scheme::MS => p.omega_r / (2.0 * p.omega_rock),
        Scheme::SS => {
            // P = c_C·Q + c_R/Q with every 1/Q term collected into c_R.
            let n_c = photons_for(p.omega_c, carrier_rabi_per_photon(p));
            let n_s = photons_for(p.omega_s, sideband_rabi_per_photon(p));
            let c_c = 2.0 * HBAR * (2.0 * p.g_m - p.omega_rock).powi(2) * n_c;
            let c_r = HBAR * p.omega_r.powi(2) * (n_c + n_s) / 2.0;
            (c_r / c_c).sqrt()
        }
    }
}

/// Q_ext minimizing the scheme's total input power at fixed Q_int.
///
/// Scans a log grid of four decades either side of the asymptotic optimum,
/// checks that the objective has a single interior minimum there, then
/// polishes with golden-section search in log Q_ext.
pub fn optimal_q_ext(p: &GatePhysics, q_int: f64, scheme: Scheme) -> Result<f64> {
    let center = asymptotic_optimum(p, scheme).ln();
    if !center.is_finite() {
        return Err(Error::Optimization(format!("no finite asymptotic optimum for {scheme:?}")));
    }
    let f = |lq: f64| total(p, q_int, lq.exp(), scheme);
    let n = 161;
    let grid: Vec<f64> = (0..n).map(|k| center - 9.2 + 18.4 * k as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let interior_minima: Vec<usize> = (1..n - 1).filter(|&k| vals[k] <= vals[k - 1] && vals[k] <= vals[k + 1]).collect();
    let k = match interior_minima.as_slice() {
        [k] => *k,
        [] => return Err(Error::Optimization("minimum lies outside the search range".into())),
        _ => return Err(Error::Optimization("power is not unimodal in Q_ext".into())),
    };
    let (mut a, mut b) = (grid[k - 1], grid[k + 1]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// The scheme's power at its optimal Q_ext.
pub fn minimum_power(p: &GatePhysics, q_int: f64, scheme: Scheme) -> Result<PowerBudget> {
    let q = optimal_q_ext(p, q_int, scheme)?;
    Ok(budget(p, q_int, q, scheme))
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// Dense evaluation over a Q_int × Q_ext grid, Q_int-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMap {
    pub scheme: Scheme,
    pub q_int: Vec<f64>,
    pub q_ext: Vec<f64>,
    pub budgets: Vec<PowerBudget>,
}

#[derive(Debug, Serialize)]
struct PowerMapManifest<'a> {
    scheme: Scheme,
    parameters: &'a GatePhysics,
    axes: [&'static str; 2],
    log_axes: bool,
    value_unit: &'static str,
    columns: Vec<String>,
    global_minimum: &'a PowerBudget,
    row_minima: Vec<RowMinimum>,
}

#[derive(Debug, Serialize)]
struct RowMinimum {
    q_int: f64,
    optimal_q_ext: Option<f64>,
    #[serde(rename = "P_min_W")]
    p_min: Option<f64>,
}

impl PowerMap {
    pub fn get(&self, i_int: usize, j_ext: usize) -> &PowerBudget {
        &self.budgets[i_int * self.q_ext.len() + j_ext]
    }

    /// Grid point with the smallest total power.
    pub fn global_minimum(&self) -> &PowerBudget {
        self.budgets
            .iter()
            .min_by(|a, b| a.p_total.total_cmp(&b.p_total))
            .expect("power maps are never empty")
    }

    /// Writes `<stem>.csv` (header `Q_int,Q_ext,P_W,<components>`) and a JSON
    /// descriptor with axes, minima and the parameters used.
    pub fn write(&self, physics: &GatePhysics, dir: &Path, stem: &str) -> Result<[PathBuf; 2]> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&csv_path)?;
        let comps = self.scheme.component_names();
        let mut header = vec!["Q_int".to_string(), "Q_ext".into(), "P_W".into()];
        header.extend(comps.iter().map(|c| format!("{c}_W")));
        w.write_record(&header)?;
        for b in &self.budgets {
            let mut row = vec![format!("{:e}", b.q_int), format!("{:e}", b.q_ext), format!("{:e}", b.p_total)];
            row.extend(comps.iter().map(|c| format!("{:e}", b.components[*c])));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(&csv_path, e))?;
        let row_minima = self
            .q_int
            .iter()
            .map(|&qi| {
                let q = optimal_q_ext(physics, qi, self.scheme).ok();
                RowMinimum { q_int: qi, optimal_q_ext: q, p_min: q.map(|q| total(physics, qi, q, self.scheme)) }
            })
            .collect();
        let manifest = PowerMapManifest {
            scheme: self.scheme,
            parameters: physics,
            axes: ["Q_int", "Q_ext"],
            log_axes: true,
            value_unit: "W",
            columns: header,
            global_minimum: self.global_minimum(),
            row_minima,
        };
        let json_path = dir.join(format!("{stem}.json"));
        std::fs::write(&json_path, serde_json::to_string_pretty(&manifest)? + "\n").map_err(|e| Error::io(&json_path, e))?;
        Ok([csv_path, json_path])
    }
}

pub fn power_map(p: &GatePhysics, q_int_grid: &[f64], q_ext_grid: &[f64], scheme: Scheme) -> Result<PowerMap> {
    if q_int_grid.is_empty() || q_ext_grid.is_empty() {
        return Err(Error::Configuration("power map grids must be nonempty".into()));
    }
    if q_int_grid.iter().chain(q_ext_grid).any(|q| !(*q > 0.0)) {
        return Err(Error::Configuration("quality factors must be positive".into()));
    }
    let budgets = q_int_grid
        .par_iter()
        .flat_map_iter(|&qi| q_ext_grid.iter().map(move |&qe| budget(p, qi, qe, scheme)))
        .collect();
    Ok(PowerMap { scheme, q_int: q_int_grid.to_vec(), q_ext: q_ext_grid.to_vec(), budgets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn single_photon_rates() {
        let p = GatePhysics::reference();
        // written out by hand: |μ|·∂B/∂r·|b|·q0·cos45° / ħ
        let s = 9.28e-24 * 1.2e-6 * (0.5f64).sqrt() * 9.30e-9 * (0.5f64).sqrt() / 1.054_571_817e-34;
        assert!(rel(sideband_rabi_per_photon(&p), s) < 1e-12);
        assert!(rel(sideband_rabi_per_photon(&p), 4.91e-4) < 1e-3);
        let c = 9.28e-24 * 5.9e-11 * (0.5f64).sqrt() / 1.054_571_817e-34;
        assert!(rel(carrier_rabi_per_photon(&p), c) < 1e-12);
        assert!(rel(carrier_rabi_per_photon(&p), 3.67) < 1e-3);
        assert!(rel(photons_for(p.omega_m, s), 1.64e14) < 2e-3);
        assert!(rel(photons_for(p.omega_c, c), 2.64e9) < 2e-3);
        let q = GatePhysics { phi_deg: 90.0, ..p };
        assert!(sideband_rabi_per_photon(&q) < 1e-18);
        assert!(carrier_rabi_per_photon(&q) < 1e-15);
    }

    #[test]
    fn ms_spot_value_and_optimum() {
        let p = GatePhysics::reference();
        let b = ms_power(&p, 1e6, 122.0);
        assert!(rel(b.p_total, 12.9e-3) < 5e-3);
        assert_eq!(b.components["P_MS"], b.p_total);
        let q = optimal_q_ext(&p, f64::INFINITY, Scheme::MS).unwrap();
        assert!((q - 1.074e9 / (2.0 * 4.4e6)).abs() < 1e-3, "{q}");
        // brute-force grid agrees
        let grid = log_grid(10.0, 1e4, 20001);
        let best = grid.iter().cloned().min_by(|a, b| total(&p, 1e6, *a, Scheme::MS).total_cmp(&total(&p, 1e6, *b, Scheme::MS))).unwrap();
        let q6 = optimal_q_ext(&p, 1e6, Scheme::MS).unwrap();
        assert!(rel(best, q6) < 1e-3);
        assert_eq!(ms_power(&GatePhysics { omega_m: 0.0, ..p }, 1e6, 100.0).p_total, 0.0);
    }

    #[test]
    fn ss_closed_form_minimum() {
        let p = GatePhysics::reference();
        // P(Q) = A·Q + B/Q with A, B assembled independently from the raw numbers
        let hbar = 1.054_571_817e-34;
        let (g, wr, wk) = (2.0 * PI * 30e6, 2.0 * PI * 1.074e9, 2.0 * PI * 4.4e6);
        let n_c = (15.0 * 2.0 * PI * 2e3 / (9.28e-24 * 5.9e-11 * 0.5f64.sqrt() / hbar)).powi(2);
        let n_s = (2.0 * PI * 2e3 / (9.28e-24 * 1.2e-6 * 0.5 * 9.30e-9 / hbar)).powi(2);
        let a = hbar * 4.0 * (2.0 * g - wk).powi(2) * n_c / 2.0;
        let b = hbar * wr * wr * (n_c + n_s) / 2.0;
        let (q_star, p_star) = ((b / a).sqrt(), 2.0 * (a * b).sqrt());
        assert!(rel(q_star, 4815.0) < 1e-3, "{q_star}");
        assert!(rel(p_star, 0.653e-3) < 1e-3, "{p_star}");
        let q = optimal_q_ext(&p, f64::INFINITY, Scheme::SS).unwrap();
        assert!(rel(q, q_star) < 1e-6);
        let m = minimum_power(&p, f64::INFINITY, Scheme::SS).unwrap();
        assert!(rel(m.p_total, p_star) < 1e-9);
        assert!(total(&p, f64::INFINITY, q / 10.0, Scheme::SS) > m.p_total);
        assert!(total(&p, f64::INFINITY, q * 10.0, Scheme::SS) > m.p_total);
        let zero = GatePhysics { omega_s: 0.0, omega_c: 0.0, ..p };
        assert_eq!(ss_power(&zero, 1e4, 100.0).p_total, 0.0);
    }

    #[test]
    fn reference_design_minima() {
        let p = GatePhysics::reference();
        for qi in [1e4, 1e6] {
            let m = minimum_power(&p, qi, Scheme::MS).unwrap();
            assert!(rel(m.p_total, 14e-3) < 0.2, "MS at Q_int={qi}: {}", m.p_total);
        }
        let ss = minimum_power(&p, f64::INFINITY, Scheme::SS).unwrap();
        assert!(rel(ss.p_total, 0.65e-3) < 0.1);
        let ss4 = minimum_power(&p, 1e4, Scheme::SS).unwrap();
        assert!(rel(ss4.p_total, 1.0e-3) < 0.15, "{}", ss4.p_total);
        assert!(ss.p_total <= minimum_power(&p, f64::INFINITY, Scheme::MS).unwrap().p_total);
    }

    #[test]
    fn map_asymptotes() {
        let p = GatePhysics::reference();
        let slope = |scheme: Scheme, q1: f64, q2: f64| {
            (total(&p, 1e8, q2, scheme) / total(&p, 1e8, q1, scheme)).ln() / (q2 / q1).ln()
        };
        let q_ms = asymptotic_optimum(&p, Scheme::MS);
        assert!((slope(Scheme::MS, q_ms / 100.0, q_ms / 20.0) + 1.0).abs() < 0.05);
        assert!((slope(Scheme::MS, q_ms * 20.0, q_ms * 100.0) - 1.0).abs() < 0.05);
        let q_ss = asymptotic_optimum(&p, Scheme::SS);
        assert!((slope(Scheme::SS, q_ss / 100.0, q_ss / 20.0) + 1.0).abs() < 0.05);
        assert!((slope(Scheme::SS, q_ss * 20.0, q_ss * 100.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn map_consistency_and_minimum_location() {
        let p = GatePhysics::reference();
        let one = power_map(&p, &[1e5], &[300.0], Scheme::SS).unwrap();
        assert_eq!(one.budgets[0], ss_power(&p, 1e5, 300.0));
        let qe = log_grid(10.0, 1e6, 50);
        let map = power_map(&p, &[1e7], &qe, Scheme::SS).unwrap();
        let best = map.global_minimum().q_ext;
        let opt = optimal_q_ext(&p, 1e7, Scheme::SS).unwrap();
        let cell = (qe[1] / qe[0]).ln();
        assert!((best / opt).ln().abs() <= cell);
        assert!(power_map(&p, &[], &qe, Scheme::MS).is_err());
    }

    #[test]
    fn map_files() {
        let p = GatePhysics::reference();
        let map = power_map(&p, &log_grid(1e3, 1e6, 3), &log_grid(10.0, 1e5, 4), Scheme::SS).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let [csv_path, _] = map.write(&p, dir.path(), "ss").unwrap();
        let text = std::fs::read_to_string(csv_path).unwrap();
        assert!(text.starts_with("Q_int,Q_ext,P_W,P_C_W,P_R_W\n"));
        assert_eq!(text.lines().count(), 13);
    }

    #[test]
    fn zero_point_motion_of_beryllium() {
        let m = crate::constants::BE9_ATOMIC_MASS_U * crate::constants::ATOMIC_MASS;
        let q0 = zero_point_motion(m, angular(4.4e6));
        // computed independently: √(1.0546e-34 / (2 · 1.4965e-26 kg · 2.7646e7 s⁻¹)) = 1.1289e-8 m
        assert!(rel(q0, 1.1289e-8) < 1e-4, "{q0}");
    }

    proptest! {
        #[test]
        fn powers_scale_quadratically(s in 0.1f64..10.0, qi in 1e2f64..1e8, qe in 1.0f64..1e6) {
            let p = GatePhysics::reference();
            let q = GatePhysics { omega_m: s * p.omega_m, omega_s: s * p.omega_s, omega_c: s * p.omega_c, ..p };
            prop_assert!(rel(ms_power(&q, qi, qe).p_total, s * s * ms_power(&p, qi, qe).p_total) < 1e-12);
            let (a, b) = (ss_power(&p, qi, qe), ss_power(&q, qi, qe));
            prop_assert!(rel(b.components["P_C"], s * s * a.components["P_C"]) < 1e-12);
            prop_assert!(rel(b.components["P_R"], s * s * a.components["P_R"]) < 1e-12);
        }

        #[test]
        fn more_internal_q_never_costs_power(qi in 1e2f64..1e8, f in 1.01f64..100.0, qe in 1.0f64..1e6) {
            let p = GatePhysics::reference();
            for scheme in [Scheme::MS, Scheme::SS] {
                let (a, b) = (total(&p, qi, qe, scheme), total(&p, qi * f, qe, scheme));
                prop_assert!(b <= a * (1.0 + 1e-12));
                let budget = scheme_power(&p, qi, qe, scheme);
                prop_assert!((budget.components.values().sum::<f64>() - budget.p_total).abs() <= 1e-15 * budget.p_total);
            }
        }

        #[test]
        fn field_angle_sign_is_irrelevant(phi in -89.0f64..89.0, qe in 1.0f64..1e6) {
            let p = GatePhysics { phi_deg: phi, ..GatePhysics::reference() };
            let m = GatePhysics { phi_deg: -phi, ..p };
            prop_assert_eq!(ms_power(&p, 1e5, qe).p_total, ms_power(&m, 1e5, qe).p_total);
            prop_assert_eq!(ss_power(&p, 1e5, qe).p_total, ss_power(&m, 1e5, qe).p_total);
        }
    }
}
