//! Spectrum fitters.
//!
//! Both fitters follow the same plan: strip the cable delay using the trace
//! ends, get rough resonance parameters from the geometry of the trace in
//! the complex plane, then refine every parameter (including the complex
//! background `a·e^{iα}·e^{−2πi(f−f₀)τ}`) jointly with Levenberg–Marquardt on
//! the real and imaginary residuals. Quality factors are fitted in log space
//! so they stay positive.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::models::{coupled_s11, notch_s21, Drive, ResonatorParams};
use super::trace::{SpectrumTrace, TraceKind};
use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, LmOptions, LmSolution};

/// Complex background `amplitude · e^{i·phase} · e^{−2πi(f − reference)·delay}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub amplitude: f64,
    #[serde(rename = "phase_rad")]
    pub phase: f64,
    #[serde(rename = "delay_s")]
    pub delay: f64,
    #[serde(rename = "reference_frequency_Hz")]
    pub reference_frequency: f64,
}

impl Background {
    pub fn identity(reference_frequency: f64) -> Self {
        Self { amplitude: 1.0, phase: 0.0, delay: 0.0, reference_frequency }
    }

    pub fn factor(&self, f: f64) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase - 2.0 * PI * (f - self.reference_frequency) * self.delay)
    }
}

/// One-sigma uncertainties of the resonator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamUncertainty {
    pub f_r: f64,
    pub q_int: f64,
    pub q_ext: f64,
    pub g_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub kind: TraceKind,
    pub params: ResonatorParams,
    pub uncertainties: ParamUncertainty,
    pub background: Background,
    /// Order of the rows/columns of `covariance`. Entries named `ln_*` are
    /// the natural log of the parameter.
    pub parameter_names: Vec<String>,
    pub covariance: Vec<Vec<f64>>,
    /// √(Σ|residual|²) over the trace.
    pub residual_norm: f64,
    pub iterations: usize,
}

impl FitReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::io(path, e))
    }
}

fn expect_kind(trace: &SpectrumTrace, kind: TraceKind) -> Result<()> {
    if trace.kind != kind {
        return Err(Error::Configuration(format!("expected a {kind:?} trace, got {:?}", trace.kind)));
    }
    Ok(())
}

fn reference_frequency(trace: &SpectrumTrace) -> f64 {
    let f = trace.frequencies();
    0.5 * (f[0] + f[f.len() - 1])
}

fn unwrap(phases: &mut [f64]) {
    for k in 1..phases.len() {
        let d = phases[k] - phases[k - 1];
        phases[k] -= (2.0 * PI) * (d / (2.0 * PI)).round();
    }
}

/// Cable delay from the outer 10% of the trace at each end: a common slope
/// with independent offsets, so a resonance between them does not bias it.
fn estimate_delay(f: &[f64], s: &[Complex64]) -> f64 {
    let n = f.len();
    let m = (n / 10).max(3).min(n / 2);
    let mut slope_num = 0.0;
    let mut slope_den = 0.0;
    for range in [0..m, n - m..n] {
        let mut ph: Vec<f64> = s[range.clone()].iter().map(|z| z.arg()).collect();
        unwrap(&mut ph);
        let fs = &f[range];
        let fm = fs.iter().sum::<f64>() / m as f64;
        let pm = ph.iter().sum::<f64>() / m as f64;
        for (fi, pi) in fs.iter().zip(&ph) {
            slope_num += (fi - fm) * (pi - pm);
            slope_den += (fi - fm) * (fi - fm);
        }
    }
    -slope_num / slope_den / (2.0 * PI)
}

/// Algebraic (Kåsa) circle fit, returning centre and radius.
fn fit_circle(z: &[Complex64]) -> Option<(Complex64, f64)> {
    use nalgebra::{Matrix3, Vector3};
    let mut a = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for p in z {
        let row = Vector3::new(p.re, p.im, 1.0);
        let rhs = -(p.re * p.re + p.im * p.im);
        a += row * row.transpose();
        b += row * rhs;
    }
    let sol = a.lu().solve(&b)?;
    let c = Complex64::new(-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = c.norm_sqr() - sol[2];
    (r2 > 0.0).then(|| (c, r2.sqrt()))
}

/// Noise scale from successive differences of the outer samples.
fn noise_estimate(s: &[Complex64]) -> f64 {
    let n = s.len();
    let m = (n / 10).max(3).min(n / 2);
    let mut acc = 0.0;
    let mut count = 0;
    for range in [0..m, n - m..n] {
        for w in s[range].windows(2) {
            acc += (w[1] - w[0]).norm_sqr();
            count += 1;
        }
    }
    (acc / (2.0 * count as f64)).sqrt()
}

fn fit_failure(reason: impl Into<String>, residual: f64) -> Error {
    Error::FitFailure { reason: reason.into(), residual }
}

fn residuals(trace: &SpectrumTrace, model: impl Fn(f64) -> Complex64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * trace.len());
    for (&f, s) in trace.frequencies().iter().zip(trace.s_values()) {
        let d = model(f) - s;
        out.push(d.re);
        out.push(d.im);
    }
    out
}

fn cov_rows(sol: &LmSolution) -> Result<nalgebra::DMatrix<f64>> {
    sol.covariance()
        .ok_or_else(|| fit_failure("singular Jacobian at the solution", sol.rss.sqrt()))
}

/// Rough notch parameters (f_r, Q_l, Q_ext, background) from the circle.
fn notch_initial(trace: &SpectrumTrace) -> Result<(f64, f64, f64, Background)> {
    let f = trace.frequencies();
    let f0 = reference_frequency(trace);
    let tau = estimate_delay(f, trace.s_values());
    let z: Vec<Complex64> = f
        .iter()
        .zip(trace.s_values())
        .map(|(&fi, s)| s * Complex64::from_polar(1.0, 2.0 * PI * (fi - f0) * tau))
        .collect();
    let (zc, r) = fit_circle(&z).ok_or_else(|| Error::NoResonance("trace does not trace out a circle".into()))?;
    let rms = (z.iter().map(|p| ((p - zc).norm() - r).powi(2)).sum::<f64>() / z.len() as f64).sqrt();
    let mut theta: Vec<f64> = z.iter().map(|p| (p - zc).arg()).collect();
    unwrap(&mut theta);
    let sweep = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - theta.iter().cloned().fold(f64::INFINITY, f64::min);
    if r < 3.0 * rms || sweep < PI / 2.0 {
        return Err(Error::NoResonance(format!(
            "circle radius {r:.3e} against scatter {rms:.3e}, angular sweep {:.0}°",
            sweep.to_degrees()
        )));
    }
    // Resonance where the trace moves fastest along the circle.
    let k_fast = (1..z.len())
        .max_by(|&a, &b| {
            let va = (theta[a] - theta[a - 1]).abs() / (f[a] - f[a - 1]);
            let vb = (theta[b] - theta[b - 1]).abs() / (f[b] - f[b - 1]);
            va.total_cmp(&vb)
        })
        .unwrap_or(1);
    let fr0 = 0.5 * (f[k_fast] + f[k_fast - 1]);
    let span = f[f.len() - 1] - f[0];
    // θ(f) = θ₀ + 2·atan(2Q_l(1 − f/f_r)); scan Q_l on a log grid, then polish.
    let phase_resid = |p: &[f64]| -> Vec<f64> {
        let (th0, ql, fr) = (p[0], p[1].exp(), p[2]);
        f.iter()
            .zip(&theta)
            .map(|(&fi, &t)| {
                let d = t - (th0 + 2.0 * (2.0 * ql * (1.0 - fi / fr)).atan());
                d - 2.0 * PI * (d / (2.0 * PI)).round()
            })
            .collect()
    };
    let th_mid = theta[k_fast];
    let (ql_lo, ql_hi) = ((fr0 / span).ln(), (fr0 / (span / f.len() as f64)).ln() + 1.0);
    let mut best = (f64::INFINITY, [th_mid, ql_lo, fr0]);
    for k in 0..=40 {
        let lq = ql_lo + (ql_hi - ql_lo) * k as f64 / 40.0;
        let cost: f64 = phase_resid(&[th_mid, lq, fr0]).iter().map(|v| v * v).sum();
        if cost < best.0 {
            best = (cost, [th_mid, lq, fr0]);
        }
    }
    let df = span / f.len() as f64;
    let sol = levenberg_marquardt(phase_resid, &best.1, &[1e-7, 1e-6, 1e-4 * df], LmOptions::default())?;
    let (th0, ql, fr) = (sol.x[0], sol.x[1].exp(), sol.x[2]);
    let off = zc + Complex64::from_polar(r, th0 + PI);
    let a = off.norm();
    let q_ext = (ql * a / (2.0 * r)).max(ql * 1.0001);
    let bg = Background { amplitude: a, phase: off.arg(), delay: tau, reference_frequency: f0 };
    Ok((fr, ql, q_ext, bg))
}

/// Fits a notch-type S21 trace.
pub fn fit_notch(trace: &SpectrumTrace) -> Result<FitReport> {
    expect_kind(trace, TraceKind::NotchS21)?;
    let (fr0, ql0, qe0, bg0) = notch_initial(trace)?;
    let f = trace.frequencies();
    let span = f[f.len() - 1] - f[0];
    if span * ql0 / fr0 < 5.0 {
        return Err(fit_failure(
            format!("trace spans {:.1} linewidths, need at least 5", span * ql0 / fr0),
            f64::NAN,
        ));
    }
    let qi0 = 1.0 / (1.0 / ql0 - 1.0 / qe0);
    let f_ref = bg0.reference_frequency;
    let unpack = |p: &[f64]| -> (ResonatorParams, Background) {
        let params = ResonatorParams { f_r: p[0], q_int: p[1].exp(), q_ext: p[2].exp(), g_m: 0.0, delta_bt: 0.0, k_current: 0.0 };
        let bg = Background { amplitude: p[3].exp(), phase: p[4], delay: p[5], reference_frequency: f_ref };
        (params, bg)
    };
    let x0 = [fr0, qi0.ln(), qe0.ln(), bg0.amplitude.ln(), bg0.phase, bg0.delay];
    let steps = [1e-5 * fr0 / ql0, 1e-6, 1e-6, 1e-7, 1e-7, 1e-7 / (2.0 * PI * span)];
    let sol = levenberg_marquardt(
        |p| {
            let (params, bg) = unpack(p);
            residuals(trace, |fi| bg.factor(fi) * notch_s21(fi, &params))
        },
        &x0,
        &steps,
        LmOptions::default(),
    )?;
    let (params, background) = unpack(&sol.x);
    finish(trace, sol, params, background, &["f_r", "ln_Q_int", "ln_Q_ext", "ln_amplitude", "phase", "delay"], None)
}

fn finish(
    trace: &SpectrumTrace,
    sol: LmSolution,
    params: ResonatorParams,
    background: Background,
    names: &[&str],
    g_index: Option<usize>,
) -> Result<FitReport> {
    let f = trace.frequencies();
    let residual_norm = sol.rss.sqrt();
    if !residual_norm.is_finite() || params.validate().is_err() {
        return Err(fit_failure("fit diverged to invalid parameters", residual_norm));
    }
    if params.f_r < f[0] || params.f_r > f[f.len() - 1] {
        return Err(fit_failure(format!("fitted f_r = {:.6e} Hz lies outside the trace", params.f_r), residual_norm));
    }
    let cov = cov_rows(&sol)?;
    let sd = |k: usize| cov[(k, k)].max(0.0).sqrt();
    let (iq_int, iq_ext) = if g_index.is_some() { (2, 3) } else { (1, 2) };
    let uncertainties = ParamUncertainty {
        f_r: sd(0),
        q_int: params.q_int * sd(iq_int),
        q_ext: params.q_ext * sd(iq_ext),
        g_m: g_index.map_or(0.0, sd),
    };
    let covariance = (0..cov.nrows()).map(|i| (0..cov.ncols()).map(|j| cov[(i, j)]).collect()).collect();
    Ok(FitReport {
        kind: trace.kind,
        params,
        uncertainties,
        background,
        parameter_names: names.iter().map(|s| s.to_string()).collect(),
        covariance,
        residual_norm,
        iterations: sol.iterations,
    })
}

/// Fits the single-port reflection of a coupled resonator pair.
pub fn fit_coupled(trace: &SpectrumTrace) -> Result<FitReport> {
    expect_kind(trace, TraceKind::ReflectionS11)?;
    let f = trace.frequencies();
    let n = f.len();
    let f_ref = reference_frequency(trace);
    let span = f[n - 1] - f[0];
    let tau = estimate_delay(f, trace.s_values());
    let z: Vec<Complex64> = f
        .iter()
        .zip(trace.s_values())
        .map(|(&fi, s)| s * Complex64::from_polar(1.0, 2.0 * PI * (fi - f_ref) * tau))
        .collect();
    let m = (n / 10).max(3).min(n / 2);
    let ends: Vec<Complex64> = z[..m].iter().chain(&z[n - m..]).copied().collect();
    let a0 = ends.iter().map(|p| p.norm()).sum::<f64>() / ends.len() as f64;
    let alpha0 = ends.iter().map(|p| p / p.norm()).sum::<Complex64>().arg();
    let back = Complex64::from_polar(a0, alpha0);
    let resp: Vec<f64> = z.iter().map(|p| (Complex64::new(1.0, 0.0) - p / back).norm()).collect();
    let sigma = noise_estimate(&z) / a0;
    let peak = resp.iter().cloned().fold(0.0, f64::max);
    if peak < 5.0 * sigma.max(1e-12) {
        return Err(Error::NoResonance(format!("largest response {peak:.3e} is within the noise {sigma:.3e}")));
    }
    // Local maxima of the response, strongest first.
    let mut peaks: Vec<usize> = (1..n - 1).filter(|&i| resp[i] > resp[i - 1] && resp[i] >= resp[i + 1]).collect();
    peaks.sort_by(|&a, &b| resp[b].total_cmp(&resp[a]));
    peaks.retain(|&i| resp[i] > 0.3 * peak);
    let width_at = |i: usize| -> f64 {
        let half = resp[i] / 2f64.sqrt();
        let mut lo = i;
        while lo > 0 && resp[lo] > half {
            lo -= 1;
        }
        let mut hi = i;
        while hi < n - 1 && resp[hi] > half {
            hi += 1;
        }
        (f[hi] - f[lo]).max(2.0 * span / n as f64)
    };
    let first = peaks[0];
    let (fr0, g0) = match peaks.iter().find(|&&j| (f[j] - f[first]).abs() > width_at(first)) {
        Some(&j) => (0.5 * (f[first] + f[j]), 0.5 * (f[first] - f[j]).abs()),
        None => (f[first], 0.25 * width_at(first)),
    };
    let qt0 = fr0 / width_at(first);
    let ratio = resp[first].clamp(0.02, 0.98);
    let qe0 = qt0 / ratio;
    let qi0 = 1.0 / (1.0 / qt0 - 1.0 / qe0);

    let unpack = |p: &[f64]| -> (ResonatorParams, Background) {
        let params = ResonatorParams {
            f_r: p[0],
            q_int: p[2].exp(),
            q_ext: p[3].exp(),
            g_m: p[1].abs(),
            delta_bt: 0.0,
            k_current: 0.0,
        };
        let bg = Background { amplitude: p[4].exp(), phase: p[5], delay: p[6], reference_frequency: f_ref };
        (params, bg)
    };
    let x0 = [fr0, g0, qi0.ln(), qe0.ln(), a0.ln(), alpha0, tau];
    let lw = fr0 / qt0;
    let steps = [1e-5 * lw, 1e-5 * lw, 1e-6, 1e-6, 1e-7, 1e-7, 1e-7 / (2.0 * PI * span)];
    let sol = levenberg_marquardt(
        |p| {
            let (params, bg) = unpack(p);
            residuals(trace, |fi| bg.factor(fi) * coupled_s11(fi, 0.0, &params, Drive::SinglePort))
        },
        &x0,
        &steps,
        LmOptions::default(),
    )?;
    let (params, background) = unpack(&sol.x);
    finish(
        trace,
        sol,
        params,
        background,
        &["f_r", "g_m", "ln_Q_int", "ln_Q_ext", "ln_amplitude", "phase", "delay"],
        Some(1),
    )
}
