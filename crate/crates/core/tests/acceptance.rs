//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report reads top to
//! bottom. Criteria that the two-dimensional models cannot reach are listed
//! in `KNOWN_DEVIATIONS`; they still print FAIL with their measured values,
//! but only a failure outside that list makes the process exit non-zero.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use sctrap::cli::{parse_config, run_in};
use sctrap::constants::angular;
use sctrap::fieldsolver::*;
use sctrap::gatedynamics::{infidelity_vs_ratio, SSDriveConfig};
use sctrap::gatepower::{log_grid, minimum_power, optimal_q_ext, power_map, GatePhysics, Scheme};
use sctrap::resonator::{coupled_s11, fit_coupled, fit_notch, notch_s21, Drive, ResonatorParams, SpectrumTrace, TraceKind};

/// `(criterion, check)` pairs that are expected to fail; see README.
const KNOWN_DEVIATIONS: &[(u32, &str)] = &[(4, "infidelity band"), (5, "trap"), (6, "thickness factor")];

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name, pass, detail: detail.into() }
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn runtime(name: &'static str, elapsed: Duration, limit_s: f64) -> Check {
    let s = elapsed.as_secs_f64();
    Check::new(name, s < limit_s, format!("{s:.2} s (limit {limit_s} s)"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

// ------------------------------------------------------------------ 1 - 3

fn ms_minimum() -> Vec<Check> {
    let p = GatePhysics::reference();
    let t = Instant::now();
    let mut checks = Vec::new();
    for q_int in [1e4, 1e6] {
        let b = minimum_power(&p, q_int, Scheme::MS).unwrap();
        checks.push(Check::new(
            "P_MS min ≈ 14 mW ±20%",
            within(b.p_total, 14e-3, 0.20),
            format!("Q_int = {q_int:e}: {:.3} mW at Q_ext = {:.1}", b.p_total * 1e3, b.q_ext),
        ));
    }
    checks.push(runtime("runtime", t.elapsed(), 1.0));
    checks
}

fn ss_minimum() -> Vec<Check> {
    let p = GatePhysics::reference();
    let t = Instant::now();
    let inf = minimum_power(&p, f64::INFINITY, Scheme::SS).unwrap();
    let low = minimum_power(&p, 1e4, Scheme::SS).unwrap();
    vec![
        Check::new(
            "Q_int → ∞: 0.65 mW ±10%",
            within(inf.p_total, 0.65e-3, 0.10),
            format!("{:.4} mW at Q_ext = {:.0}", inf.p_total * 1e3, inf.q_ext),
        ),
        Check::new(
            "Q_int = 1e4: 1.0 mW ±15%",
            within(low.p_total, 1.0e-3, 0.15),
            format!("{:.4} mW at Q_ext = {:.0}", low.p_total * 1e3, low.q_ext),
        ),
        runtime("runtime", t.elapsed(), 1.0),
    ]
}

/// Least-squares slope of log P against log Q_ext over the selected points.
fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(q, p) in points {
        let (x, y) = (q.ln(), p.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn asymptotes() -> Vec<Check> {
    let p = GatePhysics::reference();
    let t = Instant::now();
    let q_int = log_grid(1e3, 1e9, 50);
    let q_ext = log_grid(1.0, 1e6, 50);
    let mut checks = Vec::new();
    for scheme in [Scheme::MS, Scheme::SS] {
        let map = power_map(&p, &q_int, &q_ext, scheme).unwrap();
        // Top row: the internal loss is negligible there.
        let row = q_int.len() - 1;
        let q_star = optimal_q_ext(&p, q_int[row], scheme).unwrap();
        let pts: Vec<(f64, f64)> = (0..q_ext.len()).map(|j| (q_ext[j], map.get(row, j).p_total)).collect();
        let low: Vec<_> = pts.iter().copied().filter(|(q, _)| *q < q_star / 10.0).collect();
        let high: Vec<_> = pts.iter().copied().filter(|(q, _)| *q > q_star * 10.0).collect();
        let (sl, sh) = (loglog_slope(&low), loglog_slope(&high));
        checks.push(Check::new(
            if scheme == Scheme::MS { "MS slopes −1/+1 ±0.05" } else { "SS slopes −1/+1 ±0.05" },
            (sl + 1.0).abs() <= 0.05 && (sh - 1.0).abs() <= 0.05,
            format!("{scheme:?}: {sl:.4} ({} pts) / {sh:.4} ({} pts), Q* = {q_star:.0}", low.len(), high.len()),
        ));
    }
    checks.push(runtime("runtime", t.elapsed(), 10.0));
    checks
}

// ---------------------------------------------------------------------- 4

fn gate_infidelity() -> Vec<Check> {
    let t = Instant::now();
    let omega_s = angular(2e3);
    let base = SSDriveConfig::new(15.0 * omega_s, omega_s, omega_s, 0.5e-3, 10).unwrap();
    let points = infidelity_vs_ratio(&[5.0, 10.0, 15.0, 20.0], &base).unwrap();
    let at15 = points.iter().find(|p| p.ratio == 15.0).unwrap().infidelity;
    let full: Vec<f64> = points.iter().map(|p| p.infidelity.full).collect();
    let sweep = points.iter().map(|p| format!("{}: {:.3e}", p.ratio, p.infidelity.full)).collect::<Vec<_>>().join(", ");
    vec![
        Check::new(
            "infidelity band",
            at15.full >= 7e-4 / 3.0 && at15.full <= 7e-4 * 3.0,
            format!("ratio 15: {:.3e} (spin-only {:.3e}); band [{:.2e}, {:.2e}]", at15.full, at15.spin, 7e-4 / 3.0, 2.1e-3),
        ),
        Check::new("monotone sweep", full.windows(2).all(|w| w[1] <= w[0]), sweep),
        runtime("runtime", t.elapsed(), 300.0),
    ]
}

// ---------------------------------------------------------------------- 5

fn trap() -> Vec<Check> {
    let t = Instant::now();
    let cfg = parse_config(&configs_dir().join("trap_flipchip.toml")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = run_in(&cfg, dir.path());
    let elapsed = t.elapsed();
    let r = &manifest.results;
    let mut checks = Vec::new();
    match r.get("trap") {
        Some(tr) => {
            let g = |k: &str| tr[k].as_f64().unwrap_or(f64::NAN);
            let depth = g("trap_depth_meV");
            let angle_ok = |v: f64, target: f64| ((v - target + 90.0).rem_euclid(180.0) - 90.0).abs() <= 10.0;
            let pass = within(g("omega_HF_Hz"), 4.8e6, 0.2)
                && within(g("omega_LF_Hz"), 4.5e6, 0.2)
                && angle_ok(g("theta_HF_deg"), 36.0)
                && angle_ok(g("theta_LF_deg"), -53.0)
                && within(depth, 60.0, 0.3)
                && within(g("q_HF"), 0.19, 0.15)
                && within(g("a_HF"), 0.85e-3, 0.3)
                && within(g("a_LF"), -1.7e-3, 0.3);
            checks.push(Check::new(
                "trap",
                pass,
                format!(
                    "{:.2}/{:.2} MHz, axes {:.1}°/{:.1}°, depth {depth:.1} meV, q {:.3}, a ({:.2e}, {:.2e})",
                    g("omega_HF_Hz") / 1e6,
                    g("omega_LF_Hz") / 1e6,
                    g("theta_HF_deg"),
                    g("theta_LF_deg"),
                    g("q_HF"),
                    g("a_HF"),
                    g("a_LF")
                ),
            ));
        }
        None => {
            let po = &r["pseudo_only"];
            checks.push(Check::new(
                "trap",
                false,
                format!(
                    "{}; RF-only: {:.2}/{:.2} MHz, q {:.3}, depth {:.1} meV",
                    manifest.error.as_deref().unwrap_or("no trap reported"),
                    po["omega_HF_Hz"].as_f64().unwrap_or(f64::NAN) / 1e6,
                    po["omega_LF_Hz"].as_f64().unwrap_or(f64::NAN) / 1e6,
                    po["q_HF_from_frequency"].as_f64().unwrap_or(f64::NAN),
                    po["trap_depth_meV"].as_f64().unwrap_or(f64::NAN),
                ),
            ));
        }
    }
    checks.push(runtime("runtime", elapsed, 120.0));
    checks
}

// ---------------------------------------------------------------------- 6

const LAMBDA: f64 = DEFAULT_LAMBDA0;

fn cpw_solve(dims: CoplanarDims, opts: &MeshOptions, current: f64) -> FieldMap {
    let geo = CrossSectionGeometry::coplanar(dims, LAMBDA);
    let mesh = Arc::new(build_mesh_with(&geo, opts).unwrap());
    solve_magnetoquasistatic(mesh, &geo, current, 0.0).unwrap()
}

fn corner(map: &FieldMap) -> f64 {
    electrode_corner_fields(map, 0, LAMBDA).unwrap().iter().map(|c| c.1).fold(0.0, f64::max)
}

fn london_slope(t: f64) -> f64 {
    let opts = MeshOptions::new(25e-9, 1.3).with_focus([-0.3e-6, 0.3e-6, t - 0.4e-6, t + 0.05e-6], 5e-9);
    let map = cpw_solve(CoplanarDims::new(10e-6, 5e-6, t), &opts, 1.0);
    let mesh = map.mesh();
    let i = (0..mesh.nx()).min_by(|&a, &b| mesh.x()[a].abs().total_cmp(&mesh.x()[b].abs())).unwrap();
    let pts: Vec<(f64, f64)> = (0..mesh.nz())
        .map(|j| (t - mesh.z()[j], map.magnitude(mesh.node_index(i, j)).ln()))
        .filter(|(d, _)| *d >= LAMBDA && *d <= 5.0 * LAMBDA)
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 * p.0, b + p.0 * p.1));
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn sweep(values: &[f64], dims: impl Fn(f64) -> CoplanarDims) -> Vec<f64> {
    values.iter().map(|&v| corner(&cpw_solve(dims(v), &MeshOptions::new(25e-9, 1.3), 1.0))).collect()
}

fn describe(values: &[f64], b: &[f64]) -> String {
    values.iter().zip(b).map(|(v, b)| format!("{:.1}:{:.1}", v * 1e6, b * 1e3)).collect::<Vec<_>>().join(" ")
}

fn field_physics() -> Vec<Check> {
    let mut checks = Vec::new();
    let t = Instant::now();
    let base = CoplanarDims::new(10e-6, 5e-6, 1.2e-6);
    let map = cpw_solve(base, &MeshOptions::new(25e-9, 1.3), 1.0);
    let solve_time = t.elapsed();
    let enclosed = ampere_loop_integral(&map, [-7.5e-6, 7.5e-6, -2.5e-6, 3.7e-6]).unwrap();
    checks.push(Check::new("Ampère loop 1%", (enclosed - 1.0).abs() < 0.01, format!("{enclosed:.6} A of 1 A")));

    let slope = london_slope(1.2e-6);
    checks.push(Check::new(
        "London slope 2%",
        within(slope, -1.0 / LAMBDA, 0.02),
        format!("{:.4e} /m vs {:.4e} /m", slope, -1.0 / LAMBDA),
    ));

    let with_ground = |d: CoplanarDims| CoplanarDims { ground_width: default_ground_width(d.w, d.s), ..d };
    let ts = [1e-6, 2e-6, 3e-6, 4e-6, 5e-6];
    let bt = sweep(&ts, |t| CoplanarDims { t, ..base });
    let factor = bt[0] / bt[4];
    checks.push(Check::new("thickness factor", within(factor, 1.4, 0.15 / 1.4), format!("B(1 µm)/B(5 µm) = {factor:.3}, target 1.4 ± 0.15")));

    let ws = [10e-6, 20e-6, 30e-6, 40e-6, 50e-6];
    let ss = [2.5e-6, 5e-6, 10e-6, 15e-6, 25e-6];
    let bw = sweep(&ws, |w| with_ground(CoplanarDims { w, ..base }));
    let bs = sweep(&ss, |s| with_ground(CoplanarDims { s, ..base }));
    let strictly_down = |b: &[f64]| b.windows(2).all(|w| w[1] < w[0]);
    for (name, vals, b) in [("monotone in t", &ts[..], &bt), ("monotone in w", &ws[..], &bw), ("monotone in s", &ss[..], &bs)] {
        checks.push(Check::new(name, strictly_down(b), format!("µm:mT {}", describe(vals, b))));
    }
    checks.push(runtime("runtime per solve", solve_time, 300.0));
    checks
}

// ---------------------------------------------------------------------- 7

fn breakdown() -> Vec<Check> {
    let b: Vec<f64> = [(10e-6, 0.48), (50e-6, 1.1)]
        .iter()
        .map(|&(w, i)| corner(&cpw_solve(CoplanarDims::new(w, w / 2.0, 1.2e-6), &MeshOptions::new(25e-9, 1.3), i)))
        .collect();
    let (lo, hi) = (b[0].min(b[1]), b[0].max(b[1]));
    let mean = (b[0] + b[1]) / 2.0;
    vec![
        Check::new("constant within ±30%", hi / lo <= 1.3, format!("{:.1} mT / {:.1} mT", b[0] * 1e3, b[1] * 1e3)),
        Check::new("centred near 70 mT", within(mean, 70e-3, 0.3), format!("mean {:.1} mT", mean * 1e3)),
    ]
}

// ---------------------------------------------------------------------- 8

fn gradient() -> Vec<Check> {
    let geo = FlipChipLayout::default().microwave(LAMBDA).unwrap();
    let opts = MeshOptions::new(25e-9, 1.3).with_focus([-20e-6, 20e-6, -20e-6, 20e-6], 1e-6);
    let mesh = Arc::new(build_mesh_with(&geo, &opts).unwrap());
    let grad = |current: f64, deg: f64| {
        let map = solve_magnetoquasistatic(mesh.clone(), &geo, current, 0.0).unwrap();
        let d = deg.to_radians();
        field_gradient_at(&map, [0.0, 0.0], [d.cos(), d.sin()], Component::X).unwrap().re
    };
    let (hf, lf) = (grad(1.0, 36.0), grad(1.0, -53.0));
    let (hf2, hf_rev) = (grad(2.0, 36.0), grad(-1.0, 36.0));
    vec![
        Check::new(
            "72 / 56 T/m per A ±25%",
            within(hf.abs(), 72.0, 0.25) && within(lf.abs(), 56.0, 0.25),
            format!("HF {hf:.2} T/m, LF {lf:.2} T/m"),
        ),
        Check::new(
            "linear and odd in I",
            (hf2 - 2.0 * hf).abs() <= 1e-9 * hf.abs() && (hf_rev + hf).abs() <= 1e-9 * hf.abs(),
            format!("2 A: {hf2:.4}, −1 A: {hf_rev:.4}"),
        ),
    ]
}

// ---------------------------------------------------------------------- 9

fn max_rel_error(pairs: &[(f64, f64)]) -> f64 {
    pairs.iter().map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max)
}

fn resonators() -> Vec<Check> {
    let t = Instant::now();
    let notch = ResonatorParams::new(6.116e9, 6e4, 1e4).unwrap();
    let lw = notch.f_r / notch.q_tot();
    let f: Vec<f64> = (0..801).map(|k| notch.f_r + lw * (-10.0 + 20.0 * k as f64 / 800.0)).collect();
    let trace = SpectrumTrace::synthesize(f, TraceKind::NotchS21, |f| notch_s21(f, &notch)).unwrap();
    let fit = fit_notch(&trace).unwrap().params;
    let e_notch = max_rel_error(&[(fit.f_r, notch.f_r), (fit.q_int, notch.q_int), (fit.q_ext, notch.q_ext)]);

    let pair = ResonatorParams::new(1.074e9, 1600.0, 800.0).unwrap().with_coupling(30e6).unwrap();
    let n = 1201;
    let f: Vec<f64> = (0..n).map(|k| 0.974e9 + 0.2e9 * k as f64 / (n - 1) as f64).collect();
    let step = f[1] - f[0];
    let s = |f: f64| coupled_s11(f, 0.0, &pair, Drive::SinglePort);
    let trace = SpectrumTrace::synthesize(f.clone(), TraceKind::ReflectionS11, s).unwrap();
    let fit = fit_coupled(&trace).unwrap().params;
    let e_coupled = max_rel_error(&[
        (fit.f_r, pair.f_r),
        (fit.q_int, pair.q_int),
        (fit.q_ext, pair.q_ext),
        (fit.g_m, pair.g_m),
    ]);
    let mag: Vec<f64> = f.iter().map(|&f| Complex64::norm(s(f))).collect();
    let dips: Vec<f64> = (1..n - 1).filter(|&k| mag[k] < mag[k - 1] && mag[k] <= mag[k + 1]).map(|k| f[k]).collect();
    let dips_ok = dips.len() == 2 && (dips[0] - 1.044e9).abs() <= step && (dips[1] - 1.104e9).abs() <= step;
    vec![
        Check::new("notch round trip < 0.1%", e_notch < 1e-3, format!("max relative error {e_notch:.1e}")),
        Check::new("coupled round trip < 0.1%", e_coupled < 1e-3, format!("max relative error {e_coupled:.1e}")),
        Check::new(
            "dips at 1.044/1.104 GHz",
            dips_ok,
            format!(
                "dips at {} GHz, grid step {:.0} kHz",
                dips.iter().map(|d| format!("{:.5}", d / 1e9)).collect::<Vec<_>>().join(", "),
                step / 1e3
            ),
        ),
        runtime("runtime", t.elapsed(), 10.0),
    ]
}

// --------------------------------------------------------------------- 10

fn run_cli(config: &Path, out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_toolkit"))
        .arg(parse_config(config).unwrap().command.to_string())
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap_or(-1)
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        if name != sctrap::cli::TIMINGS_FILE {
            out.insert(name, std::fs::read(&p).unwrap());
        }
    }
    out
}

fn determinism() -> Vec<Check> {
    let mut configs: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    configs.sort();
    let tmp = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    let mut compared = 0;
    for cfg in &configs {
        let stem = cfg.file_stem().unwrap().to_string_lossy().into_owned();
        let (a, b) = (tmp.path().join(format!("{stem}_a")), tmp.path().join(format!("{stem}_b")));
        let (ca, cb) = (run_cli(cfg, &a), run_cli(cfg, &b));
        let (fa, fb) = (files(&a), files(&b));
        compared += fa.len();
        if ca != cb || fa != fb || fa.is_empty() {
            differing.push(stem);
        }
    }
    vec![Check::new(
        "byte-identical reruns",
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} configs, {compared} files", configs.len())
        } else {
            format!("differ: {}", differing.join(", "))
        },
    )]
}

fn main() {
    let criteria: [(u32, &str, fn() -> Vec<Check>); 10] = [
        (1, "MS power minimum", ms_minimum),
        (2, "SS power minimum", ss_minimum),
        (3, "power-map asymptotes", asymptotes),
        (4, "SS gate infidelity", gate_infidelity),
        (5, "trap analysis", trap),
        (6, "field solver physics", field_physics),
        (7, "constant breakdown field", breakdown),
        (8, "gradient reproduction", gradient),
        (9, "resonator fitting", resonators),
        (10, "determinism", determinism),
    ];
    let mut unexpected = Vec::new();
    let mut known = Vec::new();
    for (id, title, f) in criteria {
        let checks = f();
        let pass = checks.iter().all(|c| c.pass);
        println!("criterion {id:>2} {}: {title}", if pass { "PASS" } else { "FAIL" });
        for c in &checks {
            let expected = KNOWN_DEVIATIONS.contains(&(id, c.name));
            let tag = match (c.pass, expected) {
                (true, _) => "ok  ",
                (false, true) => "dev ",
                (false, false) => "FAIL",
            };
            println!("    [{tag}] {}: {}", c.name, c.detail);
            if !c.pass {
                if expected {
                    known.push(format!("{id}/{}", c.name));
                } else {
                    unexpected.push(format!("{id}/{}", c.name));
                }
            }
        }
    }
    if !known.is_empty() {
        println!("known deviations: {}", known.join(", "));
    }
    if unexpected.is_empty() {
        println!("acceptance: no unexpected failures");
    } else {
        println!("acceptance: unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
