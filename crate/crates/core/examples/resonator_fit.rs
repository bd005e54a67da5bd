//! Fits a noisy notch trace and a coupled-pair reflection trace.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sctrap::resonator::*;

fn main() -> sctrap::Result<()> {
    let truth = ResonatorParams::new(6.116e9, 6e4, 1e4)?;
    let linewidth = truth.f_r / truth.q_tot();
    let freqs: Vec<f64> = (0..801).map(|k| truth.f_r + linewidth * (-10.0 + 0.025 * k as f64)).collect();
    // cable background: attenuation, phase offset and 20 ns of delay
    let bg = Background { amplitude: 0.3, phase: 0.5, delay: 20e-9, reference_frequency: truth.f_r };
    let clean = SpectrumTrace::synthesize(freqs, TraceKind::NotchS21, |f| bg.factor(f) * notch_s21(f, &truth))?;
    let noisy = clean.with_noise(0.003, &mut ChaCha8Rng::seed_from_u64(1));

    let fit = fit_notch(&noisy)?;
    let (p, u) = (fit.params, fit.uncertainties);
    println!("notch fit after {} iterations:", fit.iterations);
    println!("  f_r   = {:.6} GHz ± {:.1} Hz", p.f_r / 1e9, u.f_r);
    println!("  Q_int = {:.0} ± {:.0}  (true 60000)", p.q_int, u.q_int);
    println!("  Q_ext = {:.0} ± {:.0}  (true 10000)", p.q_ext, u.q_ext);
    println!("  delay = {:.2} ns", fit.background.delay * 1e9);

    let pair = ResonatorParams::new(1.074e9, 1600.0, 800.0)?.with_coupling(30e6)?;
    let freqs: Vec<f64> = (0..1201).map(|k| 0.974e9 + 0.2e9 * k as f64 / 1200.0).collect();
    let trace = SpectrumTrace::synthesize(freqs, TraceKind::ReflectionS11, |f| coupled_s11(f, 0.0, &pair, Drive::SinglePort))?;
    let fit = fit_coupled(&trace)?;
    let p = fit.params;
    println!("coupled fit: f_r = {:.4} GHz, g_m = {:.2} MHz, Q_int = {:.0}, Q_ext = {:.0}", p.f_r / 1e9, p.g_m / 1e6, p.q_int, p.q_ext);
    for mode in [Mode::AH, Mode::H] {
        let f = mode.frequency(&p);
        let s = coupled_s11(f, 0.0, &p, Drive::SinglePort);
        println!("  {mode:?} mode at {:.3} GHz, |S11| = {:.3}", f / 1e9, Complex64::norm(s));
    }
    Ok(())
}
