//! One pipeline per command. Each reads its sections from the config, runs
//! the library, and reports files, results and warnings into a
//! [`RunContext`]; a pipeline that fails halfway keeps what it produced.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value as Json};

use super::config::RunConfig;
use super::plotdata::{describe_line, emit_plotdata, Axis, PlotResults, Table};
use crate::constants::{ordinary, EV};
use crate::error::{Error, Result};
use crate::fieldsolver::{
    ampere_loop_integral, build_mesh_with, corner_field, field_gradient_at, solve_electrostatic, solve_magnetoquasistatic,
    Component, CoplanarDims, CrossSectionGeometry, FieldMap, FlipChipLayout, Mesh, MeshOptions, Point, DEFAULT_LAMBDA0,
};
use crate::gatedynamics::{
    bell_infidelity, concurrence, evolve_effective_sampled, evolve_sampled, infidelity_vs_ratio, initial_state,
    write_trajectory_csv, SSDriveConfig, DEFAULT_SAMPLES, NORM_TOLERANCE,
};
use crate::gatepower::{log_grid, minimum_power, power_map, GatePhysics, Scheme};
use crate::resonator::{
    coupled_s11, fit_coupled, fit_notch, notch_s21, Background, Drive, FitReport, ResonatorParams, SpectrumTrace,
    TraceKind,
};
use crate::trapstatics::{
    analyze_trap, hessian_modes, mathieu_q, potential_slice, pseudopotential_map, trap_depth, IonSpecies, ModeAnalysis,
    TrapInputs,
};

/// Accumulates everything a run produces.
#[derive(Debug)]
pub(crate) struct RunContext {
    pub out_dir: PathBuf,
    pub outputs: Vec<PathBuf>,
    pub results: Map<String, Json>,
    pub warnings: Vec<String>,
    pub timings: Vec<(String, f64)>,
}

impl RunContext {
    pub fn new(out_dir: PathBuf) -> Self {
        Self { out_dir, outputs: Vec::new(), results: Map::new(), warnings: Vec::new(), timings: Vec::new() }
    }

    fn timed<T>(&mut self, op: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t0 = Instant::now();
        let r = f();
        self.timings.push((op.to_string(), t0.elapsed().as_secs_f64()));
        r
    }

    fn record(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("results are plain data");
        self.results.insert(key.to_string(), v);
    }

    fn emit(&mut self, files: impl IntoIterator<Item = PathBuf>) {
        self.outputs.extend(files);
    }

    fn plot(&mut self, results: PlotResults<'_>, kind: &str, stem: &str) -> Result<()> {
        let files = emit_plotdata(results, kind, &self.out_dir, stem)?;
        self.emit(files);
        Ok(())
    }
}

/// JSON number, with non-finite values spelled out (JSON has no `inf`).
fn num(x: f64) -> Json {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn mesh_options(cfg: &RunConfig, h: f64, focus: Option<(f64, f64)>) -> Result<MeshOptions> {
    let mut o = MeshOptions::new(cfg.number_or("mesh", "h", h), cfg.number_or("mesh", "growth", 1.3));
    if let Some(f) = cfg.number("mesh", "domain_factor") {
        o = o.with_domain_factor(f);
    }
    if let Some(m) = cfg.number("mesh", "max_cell") {
        o = o.with_max_cell(m);
    }
    if let Some(n) = cfg.integer("mesh", "node_budget") {
        if n <= 0 {
            return Err(Error::Configuration("node_budget must be positive".into()));
        }
        o = o.with_node_budget(n as usize);
    }
    let half = cfg.number("mesh", "focus_half_width").or(focus.map(|f| f.0));
    let cell = cfg.number("mesh", "focus_cell").or(focus.map(|f| f.1));
    if let (Some(hw), Some(c)) = (half, cell) {
        o = o.with_focus([-hw, hw, -hw, hw], c);
    }
    Ok(o)
}

fn layout(cfg: &RunConfig) -> FlipChipLayout {
    let d = FlipChipLayout::default();
    let g = |k: &str, v: f64| cfg.number_or("geometry", k, v);
    FlipChipLayout {
        chip_gap: g("chip_gap", d.chip_gap),
        rf_width: g("rf_width", d.rf_width),
        rf_dc_gap: g("rf_dc_gap", d.rf_dc_gap),
        dc_width: g("dc_width", d.dc_width),
        rf_mw_distance: g("rf_mw_distance", d.rf_mw_distance),
        mw_width: g("mw_width", d.mw_width),
        edge_gap: g("edge_gap", d.edge_gap),
        ground_width: g("ground_width", d.ground_width),
        film_thickness: g("film_thickness", d.film_thickness),
    }
}

// ---------------------------------------------------------------- field-solve

pub(crate) fn field_solve(cfg: &RunConfig, ctx: &mut RunContext) -> Result<()> {
    let lambda = cfg.number_or("geometry", "lambda", DEFAULT_LAMBDA0);
    let current = cfg.require("source", "I")?;
    let freq = cfg.number_or("source", "f", 0.0);
    match cfg.text("geometry", "kind") {
        Some("flip-chip-mw") => flip_chip_gradient(cfg, ctx, lambda, current, freq),
        _ => coplanar(cfg, ctx, lambda, current, freq),
    }
}

fn coplanar_dims(cfg: &RunConfig) -> Result<CoplanarDims> {
    let mut d = CoplanarDims::new(cfg.require("geometry", "w")?, cfg.require("geometry", "s")?, cfg.require("geometry", "t")?);
    if let Some(g) = cfg.number("geometry", "ground_width") {
        d.ground_width = g;
    }
    Ok(d)
}

struct CpwSolve {
    map: FieldMap,
    corners: Vec<(Point, f64)>,
}

fn solve_cpw(cfg: &RunConfig, dims: CoplanarDims, lambda: f64, current: f64, freq: f64) -> Result<CpwSolve> {
    let geometry = CrossSectionGeometry::coplanar(dims, lambda);
    let mesh = Arc::new(build_mesh_with(&geometry, &mesh_options(cfg, 25e-9, None)?)?);
    let map = solve_magnetoquasistatic(mesh.clone(), &geometry, current, freq)?;
    let radius = cfg.number_or("probe", "corner_radius", lambda);
    let corners = signal_corners(&mesh, &map, radius)?;
    Ok(CpwSolve { map, corners })
}

fn signal_corners(mesh: &Mesh, map: &FieldMap, radius: f64) -> Result<Vec<(Point, f64)>> {
    mesh.corners()
        .iter()
        .filter(|c| c.electrode == 0)
        .map(|c| Ok((c.point, corner_field(map, c.point, radius)?)))
        .collect()
}

fn max_corner(corners: &[(Point, f64)]) -> f64 {
    corners.iter().map(|c| c.1).fold(0.0, f64::max)
}

fn coplanar(cfg: &RunConfig, ctx: &mut RunContext, lambda: f64, current: f64, freq: f64) -> Result<()> {
    for k in ["chip_gap", "rf_width", "rf_dc_gap", "dc_width", "rf_mw_distance", "mw_width", "edge_gap", "film_thickness"] {
        if cfg.number("geometry", k).is_some() {
            return Err(Error::Configuration(format!("`{k}` applies only to flip-chip geometries")));
        }
    }
    let dims = coplanar_dims(cfg)?;
    let solve = ctx.timed("coplanar solve", || solve_cpw(cfg, dims, lambda, current, freq))?;
    ctx.plot(PlotResults::FieldMap(&solve.map), "fieldmap", "field_map")?;
    let corners: Vec<Json> =
        solve.corners.iter().map(|(p, b)| json!({"x_m": p[0], "z_m": p[1], "B_T": b})).collect();
    ctx.record("corner_fields", corners);
    ctx.record("max_corner_field_T", max_corner(&solve.corners));
    ctx.record("solver_residual", solve.map.residual());

    let margin = cfg.number_or("probe", "loop_margin", dims.s / 2.0);
    let rect = [-dims.w / 2.0 - margin, dims.w / 2.0 + margin, -margin, dims.t + margin];
    let enclosed = ampere_loop_integral(&solve.map, rect)?;
    let rel = (enclosed - current).abs() / current.abs();
    ctx.record("ampere_loop", json!({"rect_m": rect, "enclosed_A": enclosed, "relative_error": rel}));
    if rel > 0.01 {
        ctx.warnings.push(format!("Ampère loop recovers {enclosed:.6} A of {current:.6} A"));
    }

    if cfg.has_section("sweep") {
        let param = cfg.text("sweep", "parameter").unwrap_or("w").to_string();
        let values = cfg.list("sweep", "values").unwrap_or_default().to_vec();
        let currents = match cfg.list("sweep", "I_list") {
            Some(c) if c.len() != values.len() => {
                return Err(Error::Configuration(format!(
                    "I_list has {} entries but the sweep has {} values",
                    c.len(),
                    values.len()
                )))
            }
            Some(c) => c.to_vec(),
            None => vec![current; values.len()],
        };
        let s_over_w = cfg.number("sweep", "s_over_w");
        let mut table = Table::new(vec![
            Axis::linear(&format!("{param}_m"), "m"),
            Axis::linear("I_A", "A"),
            Axis::linear("B_corner_T", "T"),
        ]);
        let mut points = Vec::new();
        for (&v, &i) in values.iter().zip(&currents) {
            let mut d = dims;
            match param.as_str() {
                "w" => {
                    d.w = v;
                    if let Some(r) = s_over_w {
                        d.s = r * v;
                    }
                }
                "s" => d.s = v,
                _ => d.t = v,
            }
            if cfg.number("geometry", "ground_width").is_none() {
                d.ground_width = crate::fieldsolver::default_ground_width(d.w, d.s);
            }
            let s = ctx.timed(&format!("sweep {param} = {v:e} m"), || solve_cpw(cfg, d, lambda, i, freq))?;
            let b = max_corner(&s.corners);
            table.push(vec![v, i, b]);
            points.push(json!({"value_m": v, "I_A": i, "B_corner_T": b}));
        }
        ctx.plot(PlotResults::Table(&table), "line", "sweep")?;
        let bs: Vec<f64> = table.rows.iter().map(|r| r[2]).collect();
        let monotone_decreasing = bs.windows(2).all(|w| w[1] <= w[0]);
        let (lo, hi) = bs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        ctx.record(
            "sweep",
            json!({
                "parameter": param,
                "points": points,
                "monotone_decreasing": monotone_decreasing,
                "first_over_last": bs[0] / bs[bs.len() - 1],
                "max_over_min": hi / lo,
            }),
        );
    }
    Ok(())
}

fn flip_chip_gradient(cfg: &RunConfig, ctx: &mut RunContext, lambda: f64, current: f64, freq: f64) -> Result<()> {
    for k in ["w", "s", "t"] {
        if cfg.number("geometry", k).is_some() {
            return Err(Error::Configuration(format!("`{k}` applies only to coplanar geometries")));
        }
    }
    let lay = layout(cfg);
    let geo = lay.microwave(lambda)?;
    let opts = mesh_options(cfg, 25e-9, Some((20e-6, 1e-6)))?;
    let map = ctx.timed("microwave solve", || {
        let mesh = Arc::new(build_mesh_with(&geo, &opts)?);
        solve_magnetoquasistatic(mesh, &geo, current, freq)
    })?;
    ctx.plot(PlotResults::FieldMap(&map), "fieldmap", "field_map")?;
    let component = match cfg.text("probe", "component") {
        Some("z") => Component::Z,
        _ => Component::X,
    };
    let center = [0.0, 0.0];
    let grad = |deg: f64| -> Result<f64> {
        let t = deg.to_radians();
        Ok(field_gradient_at(&map, center, [t.cos(), t.sin()], component)?.re)
    };
    let (th_hf, th_lf) = (cfg.number_or("probe", "theta_HF", 36.0), cfg.number_or("probe", "theta_LF", -53.0));
    let (g_hf, g_lf) = (grad(th_hf)?, grad(th_lf)?);
    let b0 = map.vector_at(center)?;
    ctx.record("component", if component == Component::X { "Bx" } else { "Bz" });
    ctx.record(
        "gradient",
        json!({
            "theta_HF_deg": th_hf,
            "theta_LF_deg": th_lf,
            "HF_T_per_m": g_hf,
            "LF_T_per_m": g_lf,
            "HF_T_per_m_per_A": g_hf / current,
            "LF_T_per_m_per_A": g_lf / current,
        }),
    );
    ctx.record("B_center_T", [b0[0].norm(), b0[1].norm()]);
    ctx.record("solver_residual", map.residual());
    Ok(())
}

// --------------------------------------------------------------- trap-analyze

fn mode_summary(m: &ModeAnalysis, omega_rf: f64) -> Json {
    let mut v = json!({
        "omega_HF_Hz": ordinary(m.omega_hf),
        "omega_LF_Hz": ordinary(m.omega_lf),
        "theta_HF_deg": m.theta_hf,
        "theta_LF_deg": m.theta_lf,
        "minimum_location_m": m.minimum_location,
        "q_HF_from_frequency": mathieu_q(m.omega_hf, omega_rf).ok(),
    });
    if let Some(d) = m.trap_depth {
        v["trap_depth_meV"] = json!(d * 1e3);
    }
    if let Some(p) = &m.mathieu {
        v["a_HF"] = json!(p.hf.a);
        v["a_LF"] = json!(p.lf.a);
        v["q_HF"] = json!(p.hf.q);
        v["q_LF"] = json!(p.lf.q);
    }
    if let Some(s) = m.stable {
        v["stable"] = json!(s);
    }
    v
}

fn slice_table(potential: &FieldMap, center: Point, angle: f64, half: f64, n: usize) -> Result<Table> {
    let slice = potential_slice(potential, center, angle, half, n)?;
    let floor = slice.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut t = Table::new(vec![Axis::linear("s_m", "m"), Axis::linear("potential_meV", "meV")]);
    for (s, v) in slice {
        t.push(vec![s, (v - floor) / EV * 1e3]);
    }
    Ok(t)
}

pub(crate) fn trap_analyze(cfg: &RunConfig, ctx: &mut RunContext) -> Result<()> {
    let omega_rf = cfg.require("drive", "Omega_rf")?;
    let v_rf = cfg.require("drive", "V_rf")?;
    let v_inner = cfg.number_or("drive", "V_inner", 0.0);
    if let Some(v) = cfg.number("drive", "V_endcap") {
        ctx.record("V_endcap_V", v);
        ctx.warnings.push(format!(
            "endcap voltage {v} V acts along the trap axis and has no counterpart in the radial cross-section; recorded only"
        ));
    }
    let omega_axial = cfg.number("drive", "omega_axial");
    if omega_axial.is_none() {
        ctx.warnings.push("axial frequency not supplied: not computed by the 2D model".into());
    }
    let be9 = IonSpecies::be9();
    let ion = IonSpecies::new(
        cfg.text("ion", "name").unwrap_or(&be9.name),
        cfg.number_or("ion", "mass", be9.mass),
        cfg.number_or("ion", "charge", be9.charge),
    )?;
    let lambda = cfg.number_or("geometry", "lambda", DEFAULT_LAMBDA0);
    let geo = layout(cfg).electrostatic(lambda)?;
    let opts = mesh_options(cfg, 25e-9, Some((15e-6, 1e-6)))?;
    let mesh = ctx.timed("mesh", || Ok(Arc::new(build_mesh_with(&geo, &opts)?)))?;
    let volts = |rf: f64, dc: f64| BTreeMap::from([("rf".to_string(), rf), ("dc".to_string(), dc)]);
    let rf = ctx.timed("rf solve", || solve_electrostatic(mesh.clone(), &geo, &volts(v_rf, 0.0)))?;
    let e_rf = rf.electric_field()?;
    let dc = if v_inner != 0.0 {
        Some(ctx.timed("dc solve", || solve_electrostatic(mesh.clone(), &geo, &volts(0.0, v_inner)))?)
    } else {
        None
    };
    let half = cfg.number_or("analysis", "search_half_width", 20e-6);
    let region = [-half, half, -half, half];
    let slice_half = cfg.number_or("analysis", "slice_half_length", 40e-6);
    let slice_n = cfg.count_or("analysis", "slice_points", 201)?;

    // Pure-RF analysis first, so a DC configuration that destroys the trap
    // still leaves the pseudopotential results behind.
    let pseudo = pseudopotential_map(&e_rf, &ion, omega_rf)?;
    ctx.plot(PlotResults::FieldMap(&pseudo), "fieldmap", "pseudopotential")?;
    let mut pm = ctx.timed("pseudopotential modes", || hessian_modes(&pseudo, &ion, region))?;
    pm.trap_depth = Some(trap_depth(&pseudo, pm.minimum_location)?);
    ctx.record("pseudo_only", mode_summary(&pm, omega_rf));
    for (axis, angle) in [("HF", pm.theta_hf), ("LF", pm.theta_lf)] {
        let t = slice_table(&pseudo, pm.minimum_location, angle, slice_half, slice_n)?;
        ctx.plot(PlotResults::Table(&t), "line", &format!("pseudo_slice_{axis}"))?;
    }

    let inputs = TrapInputs { rf_field: &e_rf, dc_potential: dc.as_ref(), ion: &ion, omega_rf, omega_axial, search_region: region };
    let (report, total) = ctx.timed("trap analysis", || analyze_trap(&inputs))?;
    ctx.plot(PlotResults::FieldMap(&total), "fieldmap", "total_potential")?;
    let m = &report.modes;
    for (axis, angle) in [("HF", m.theta_hf), ("LF", m.theta_lf)] {
        let t = slice_table(&total, m.minimum_location, angle, slice_half, slice_n)?;
        ctx.plot(PlotResults::Table(&t), "line", &format!("slice_{axis}"))?;
    }
    ctx.record("trap", mode_summary(m, omega_rf));
    ctx.record("stability", json!({"HF": report.stability_hf, "LF": report.stability_lf}));
    if let Some(w) = report.omega_axial {
        ctx.record("omega_axial_Hz", ordinary(w));
    }
    let path = ctx.out_dir.join("trap_report.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| Error::io(&path, e))?;
    ctx.emit([path]);
    ctx.warnings.extend(report.warnings);
    Ok(())
}

// -------------------------------------------------------------- resonator-fit

fn synthesize(cfg: &RunConfig, coupled: bool) -> Result<(SpectrumTrace, ResonatorParams)> {
    let mut p = ResonatorParams::new(
        cfg.require("synthesis", "f_r")?,
        cfg.require("synthesis", "Q_int")?,
        cfg.require("synthesis", "Q_ext")?,
    )?;
    if coupled {
        p = p.with_coupling(cfg.require("synthesis", "g_m")?)?;
    }
    let n = cfg.count_or("synthesis", "points", 801)?;
    let linewidth = p.f_r / p.q_tot();
    let default_span = if coupled { 5.0 * p.g_m + 20.0 * linewidth } else { 20.0 * linewidth };
    let half = cfg.number_or("synthesis", "span", default_span) / 2.0;
    if n < 8 {
        return Err(Error::Configuration("a synthesized trace needs at least 8 points".into()));
    }
    let freqs: Vec<f64> = (0..n).map(|k| p.f_r - half + 2.0 * half * k as f64 / (n - 1) as f64).collect();
    let bg = Background {
        amplitude: cfg.number_or("synthesis", "amplitude", 1.0),
        phase: cfg.number_or("synthesis", "phase", 0.0).to_radians(),
        delay: cfg.number_or("synthesis", "delay", 0.0),
        reference_frequency: p.f_r,
    };
    let mut trace = if coupled {
        SpectrumTrace::synthesize(freqs, TraceKind::ReflectionS11, |f| bg.factor(f) * coupled_s11(f, 0.0, &p, Drive::SinglePort))?
    } else {
        SpectrumTrace::synthesize(freqs, TraceKind::NotchS21, |f| bg.factor(f) * notch_s21(f, &p))?
    };
    let sigma = cfg.number_or("synthesis", "noise_sigma", 0.0);
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Configuration("noise_sigma must be finite and non-negative".into()));
    }
    if sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        trace = trace.with_noise(sigma, &mut rng);
        trace.noise_sigma = Some(sigma);
    }
    trace.input_power = cfg.number_or("synthesis", "power", 0.0);
    Ok((trace, p))
}

fn model_value(report: &FitReport, f: f64) -> Complex64 {
    let s = match report.kind {
        TraceKind::NotchS21 => notch_s21(f, &report.params),
        TraceKind::ReflectionS11 => coupled_s11(f, 0.0, &report.params, Drive::SinglePort),
    };
    report.background.factor(f) * s
}

pub(crate) fn resonator_fit(cfg: &RunConfig, ctx: &mut RunContext) -> Result<()> {
    let coupled = cfg.text("fit", "model") == Some("coupled");
    let kind = if coupled { TraceKind::ReflectionS11 } else { TraceKind::NotchS21 };
    let (trace, truth) = match (cfg.path("io", "trace"), cfg.has_section("synthesis")) {
        (Some(_), true) => {
            return Err(Error::Configuration("give either [io] trace or a [synthesis] section, not both".into()))
        }
        (Some(path), false) => (SpectrumTrace::read(&path, Some(kind))?, None),
        (None, true) => {
            let (t, p) = synthesize(cfg, coupled)?;
            ctx.emit(t.write(&ctx.out_dir, "trace")?);
            (t, Some(p))
        }
        (None, false) => {
            return Err(Error::MissingField { section: "synthesis".into(), field: "f_r (or [io] trace)".into() })
        }
    };
    let report = ctx.timed("fit", || if coupled { fit_coupled(&trace) } else { fit_notch(&trace) })?;
    let path = ctx.out_dir.join("fit_report.json");
    report.write_json(&path)?;
    ctx.emit([path]);

    let mut curve = Table::new(vec![
        Axis::linear("frequency_Hz", "Hz"),
        Axis::linear("data_re", "1"),
        Axis::linear("data_im", "1"),
        Axis::linear("model_re", "1"),
        Axis::linear("model_im", "1"),
    ]);
    for (&f, s) in trace.frequencies().iter().zip(trace.s_values()) {
        let m = model_value(&report, f);
        curve.push(vec![f, s.re, s.im, m.re, m.im]);
    }
    ctx.plot(PlotResults::Table(&curve), "line", "fit_curve")?;

    let p = &report.params;
    let mut fitted = json!({
        "f_r_Hz": p.f_r,
        "Q_int": num(p.q_int),
        "Q_ext": p.q_ext,
        "sigma_f_r_Hz": report.uncertainties.f_r,
        "sigma_Q_int": report.uncertainties.q_int,
        "sigma_Q_ext": report.uncertainties.q_ext,
    });
    if coupled {
        fitted["g_m_Hz"] = json!(p.g_m);
        fitted["sigma_g_m_Hz"] = json!(report.uncertainties.g_m);
    }
    ctx.record("fit", fitted);
    if let Some(t) = truth {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        let mut errors = json!({
            "f_r": rel(p.f_r, t.f_r),
            "Q_int": rel(p.q_int, t.q_int),
            "Q_ext": rel(p.q_ext, t.q_ext),
        });
        if coupled {
            errors["g_m"] = json!(rel(p.g_m, t.g_m));
        }
        ctx.record("relative_error_vs_synthesis", errors);
    }
    Ok(())
}

// ----------------------------------------------------------------- gate-power

fn physics(cfg: &RunConfig) -> Result<GatePhysics> {
    let r = |k: &str| cfg.require("physics", k);
    let p = GatePhysics {
        mu_parallel: r("mu_parallel")?,
        dbdr_single_photon: r("dBdr")?,
        b_h0: r("B_H0")?,
        b_j: r("b_j")?,
        q0: r("q0")?,
        phi_deg: r("phi")?,
        theta_hf_deg: cfg.number_or("physics", "theta_HF", 36.0),
        g_m: r("g_m")?,
        omega_rock: r("omega_rock")?,
        omega_r: r("omega_r")?,
        omega_m: r("Omega_M")?,
        omega_s: r("Omega_S")?,
        omega_c: r("Omega_C")?,
    };
    p.validate()?;
    Ok(p)
}

pub(crate) fn gate_power(cfg: &RunConfig, ctx: &mut RunContext) -> Result<()> {
    let p = physics(cfg)?;
    let schemes: &[Scheme] = match cfg.text("grid", "scheme").unwrap_or("both") {
        "MS" => &[Scheme::MS],
        "SS" => &[Scheme::SS],
        _ => &[Scheme::MS, Scheme::SS],
    };
    let grid = |axis: &str, lo: f64, hi: f64, n: usize| -> Result<Vec<f64>> {
        let lo = cfg.number_or("grid", &format!("{axis}_min"), lo);
        let hi = cfg.number_or("grid", &format!("{axis}_max"), hi);
        let n = cfg.count_or("grid", &format!("{axis}_points"), n)?;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
            return Err(Error::Configuration(format!("{axis} grid needs 0 < min < max < inf and at least 2 points")));
        }
        Ok(log_grid(lo, hi, n))
    };
    let q_int = grid("Q_int", 1e3, 1e7, 50)?;
    let q_ext = grid("Q_ext", 1.0, 1e6, 50)?;
    let minima_q = cfg.list("grid", "minima_Q_int").map(<[f64]>::to_vec).unwrap_or(vec![1e4, 1e6, f64::INFINITY]);
    for &scheme in schemes {
        let name = format!("{scheme:?}");
        let map = ctx.timed(&format!("{name} power map"), || power_map(&p, &q_int, &q_ext, scheme))?;
        ctx.plot(PlotResults::PowerMap { map: &map, physics: &p }, "heatmap", &format!("power_map_{name}"))?;
        let g = map.global_minimum();
        let mut minima = Vec::new();
        let mut table = Table::new(vec![
            Axis::log("Q_int", "1"),
            Axis::log("Q_ext_opt", "1"),
            Axis::log("P_min_W", "W"),
        ]);
        for &qi in &minima_q {
            match minimum_power(&p, qi, scheme) {
                Ok(b) => {
                    table.push(vec![qi, b.q_ext, b.p_total]);
                    minima.push(json!({"Q_int": num(qi), "Q_ext_opt": b.q_ext, "P_min_W": b.p_total, "components_W": b.components}));
                }
                Err(e) => ctx.warnings.push(format!("{name} minimum at Q_int = {qi:e}: {e}")),
            }
        }
        ctx.plot(PlotResults::Table(&table), "line", &format!("minima_{name}"))?;
        ctx.record(
            &name,
            json!({
                "grid_minimum": {"Q_int": g.q_int, "Q_ext": g.q_ext, "P_W": g.p_total},
                "minima": minima,
            }),
        );
    }
    Ok(())
}

// ------------------------------------------------------------------- gate-sim

fn drive_config(cfg: &RunConfig) -> Result<SSDriveConfig> {
    let omega_s = cfg.require("drive", "Omega_S")?;
    let ratio = cfg.require("drive", "ratio")?;
    let delta = cfg.number_or("drive", "delta", omega_s);
    let duration = cfg.number_or("drive", "duration", 2.0 * PI / delta);
    let n_max = cfg.count_or("drive", "n_max", 10)?;
    let mut d = SSDriveConfig::new(ratio * omega_s, omega_s, delta, duration, n_max)?;
    if let Some(signs) = cfg.list("drive", "b_signs") {
        let [a, b] = signs else {
            return Err(Error::Configuration("b_signs needs exactly two entries".into()));
        };
        d.b_signs = [*a, *b];
    }
    if let Some(dt) = cfg.number("drive", "dt") {
        let steps = duration / dt;
        if (steps - steps.round()).abs() > 1e-9 * steps {
            return Err(Error::Configuration(format!("dt = {dt:e} s does not divide the duration {duration:e} s")));
        }
        d.dt = duration / steps.round();
    }
    d.validate()?;
    Ok(d)
}

pub(crate) fn gate_sim(cfg: &RunConfig, ctx: &mut RunContext) -> Result<()> {
    let d = drive_config(cfg)?;
    let samples = cfg.count_or("drive", "samples", DEFAULT_SAMPLES)?;
    let psi0 = initial_state(d.n_max);
    let full = ctx.timed("full evolution", || evolve_sampled(&d, &psi0, samples))?;
    let ideal = ctx.timed("effective evolution", || evolve_effective_sampled(&d, &psi0, samples))?;
    let inf = bell_infidelity(&full, &ideal)?;
    let path = ctx.out_dir.join("trajectory.csv");
    write_trajectory_csv(&full, &ideal, &path)?;
    let desc = describe_line(
        &path,
        &["t_s", "P_uu", "P_ud", "P_du", "P_dd", "spin_fidelity", "full_fidelity"]
            .iter()
            .map(|c| Axis::linear(c, if *c == "t_s" { "s" } else { "1" }))
            .collect::<Vec<_>>(),
    )?;
    ctx.emit([path, desc]);
    let drift = full.max_norm_drift().max(ideal.max_norm_drift());
    if drift > NORM_TOLERANCE {
        ctx.warnings.push(format!("state norm drifted by {drift:.2e} (tolerance {NORM_TOLERANCE:e})"));
    }
    ctx.record(
        "gate",
        json!({
            "ratio": d.omega_c / d.omega_s,
            "infidelity_full": inf.full,
            "infidelity_spin": inf.spin,
            "concurrence_final": concurrence(&full.final_state().reduced_spin()),
            "concurrence_reference": concurrence(&ideal.final_state().reduced_spin()),
            "steps": d.steps(),
            "dt_s": d.dt,
            "n_max": d.n_max,
            "max_norm_drift": drift,
        }),
    );
    if let Some(ratios) = cfg.list("study", "ratio_list") {
        let points = ctx.timed("ratio study", || infidelity_vs_ratio(ratios, &d))?;
        let mut t = Table::new(vec![
            Axis::linear("ratio", "1"),
            Axis::log("infidelity_full", "1"),
            Axis::log("infidelity_spin", "1"),
        ]);
        for pt in &points {
            t.push(vec![pt.ratio, pt.infidelity.full, pt.infidelity.spin]);
        }
        ctx.plot(PlotResults::Table(&t), "line", "infidelity_vs_ratio")?;
        let monotone = points.windows(2).all(|w| w[1].infidelity.full <= w[0].infidelity.full);
        ctx.record("study", json!({"points": points, "monotone_non_increasing": monotone}));
    }
    Ok(())
}
