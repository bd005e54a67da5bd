//! Run configs: TOML with unit-suffixed keys, validated against a
//! per-command schema and converted to SI at the parse boundary.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::{match_key, to_si, KeyMatch, Quantity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    FieldSolve,
    TrapAnalyze,
    ResonatorFit,
    GatePower,
    GateSim,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Command::FieldSolve, Command::TrapAnalyze, Command::ResonatorFit, Command::GatePower, Command::GateSim];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::FieldSolve => "field-solve",
            Command::TrapAnalyze => "trap-analyze",
            Command::ResonatorFit => "resonator-fit",
            Command::GatePower => "gate-power",
            Command::GateSim => "gate-sim",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown command `{s}` (expected one of field-solve, trap-analyze, resonator-fit, gate-power, gate-sim)")))
    }
}

/// A parsed config value, already in SI units.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    List(Vec<f64>),
    Integer(i64),
    Text(String),
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Kind {
    Number(Quantity),
    List(Quantity),
    Integer,
    /// Free text if the list is empty, otherwise one of the listed words.
    Text(&'static [&'static str]),
    /// A file-system path, resolved against the config's directory.
    Path,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Field {
    pub name: &'static str,
    pub kind: Kind,
    pub required: bool,
}

const fn req(name: &'static str, kind: Kind) -> Field {
    Field { name, kind, required: true }
}

const fn opt(name: &'static str, kind: Kind) -> Field {
    Field { name, kind, required: false }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Section {
    pub name: &'static str,
    pub required: bool,
    pub fields: &'static [Field],
}

use Quantity as Q;

const LEN: Kind = Kind::Number(Q::Length);
const DIMLESS: Kind = Kind::Number(Q::Dimensionless);
const RATE: Kind = Kind::Number(Q::AngularFrequency);

const IO: Section = Section { name: "io", required: false, fields: &[opt("output_dir", Kind::Path), opt("trace", Kind::Path)] };

const LAYOUT_FIELDS: &[Field] = &[
    opt("lambda", LEN),
    opt("chip_gap", LEN),
    opt("rf_width", LEN),
    opt("rf_dc_gap", LEN),
    opt("dc_width", LEN),
    opt("rf_mw_distance", LEN),
    opt("mw_width", LEN),
    opt("edge_gap", LEN),
    opt("ground_width", LEN),
    opt("film_thickness", LEN),
];

const MESH: Section = Section {
    name: "mesh",
    required: false,
    fields: &[
        opt("h", LEN),
        opt("growth", DIMLESS),
        opt("domain_factor", DIMLESS),
        opt("max_cell", LEN),
        opt("focus_half_width", LEN),
        opt("focus_cell", LEN),
        opt("node_budget", Kind::Integer),
    ],
};

const FIELD_SOLVE: &[Section] = &[
    IO,
    Section {
        name: "geometry",
        required: true,
        fields: &[
            req("kind", Kind::Text(&["coplanar", "flip-chip-mw"])),
            opt("w", LEN),
            opt("s", LEN),
            opt("t", LEN),
            opt("lambda", LEN),
            opt("ground_width", LEN),
            opt("chip_gap", LEN),
            opt("rf_width", LEN),
            opt("rf_dc_gap", LEN),
            opt("dc_width", LEN),
            opt("rf_mw_distance", LEN),
            opt("mw_width", LEN),
            opt("edge_gap", LEN),
            opt("film_thickness", LEN),
        ],
    },
    Section {
        name: "source",
        required: true,
        fields: &[req("I", Kind::Number(Q::Current)), opt("f", Kind::Number(Q::Frequency))],
    },
    MESH,
    Section {
        name: "probe",
        required: false,
        fields: &[
            opt("theta_HF", Kind::Number(Q::Angle)),
            opt("theta_LF", Kind::Number(Q::Angle)),
            opt("component", Kind::Text(&["x", "z"])),
            opt("loop_margin", LEN),
            opt("corner_radius", LEN),
        ],
    },
    Section {
        name: "sweep",
        required: false,
        fields: &[
            req("parameter", Kind::Text(&["w", "s", "t"])),
            req("values", Kind::List(Q::Length)),
            opt("s_over_w", DIMLESS),
            opt("I_list", Kind::List(Q::Current)),
        ],
    },
];

const TRAP_ANALYZE: &[Section] = &[
    IO,
    Section { name: "geometry", required: false, fields: LAYOUT_FIELDS },
    Section {
        name: "drive",
        required: true,
        fields: &[
            req("Omega_rf", RATE),
            req("V_rf", Kind::Number(Q::Voltage)),
            opt("V_inner", Kind::Number(Q::Voltage)),
            opt("V_endcap", Kind::Number(Q::Voltage)),
            opt("omega_axial", RATE),
        ],
    },
    Section {
        name: "ion",
        required: false,
        fields: &[opt("name", Kind::Text(&[])), opt("mass", Kind::Number(Q::Mass)), opt("charge", Kind::Number(Q::Charge))],
    },
    MESH,
    Section {
        name: "analysis",
        required: false,
        fields: &[opt("search_half_width", LEN), opt("slice_half_length", LEN), opt("slice_points", Kind::Integer)],
    },
];

const RESONATOR_FIT: &[Section] = &[
    IO,
    Section { name: "fit", required: true, fields: &[req("model", Kind::Text(&["notch", "coupled"]))] },
    Section {
        name: "synthesis",
        required: false,
        fields: &[
            req("f_r", Kind::Number(Q::Frequency)),
            req("Q_int", DIMLESS),
            req("Q_ext", DIMLESS),
            opt("g_m", Kind::Number(Q::Frequency)),
            opt("points", Kind::Integer),
            opt("span", Kind::Number(Q::Frequency)),
            opt("noise_sigma", DIMLESS),
            opt("amplitude", DIMLESS),
            opt("phase", Kind::Number(Q::Angle)),
            opt("delay", Kind::Number(Q::Time)),
            opt("power", Kind::Number(Q::Power)),
        ],
    },
];

const GATE_POWER: &[Section] = &[
    IO,
    Section {
        name: "physics",
        required: true,
        fields: &[
            req("mu_parallel", Kind::Number(Q::MagneticMoment)),
            req("dBdr", Kind::Number(Q::FieldGradient)),
            req("B_H0", Kind::Number(Q::MagneticField)),
            req("b_j", DIMLESS),
            req("q0", LEN),
            req("phi", Kind::Number(Q::Angle)),
            opt("theta_HF", Kind::Number(Q::Angle)),
            req("g_m", RATE),
            req("omega_rock", RATE),
            req("omega_r", RATE),
            req("Omega_M", RATE),
            req("Omega_S", RATE),
            req("Omega_C", RATE),
        ],
    },
    Section {
        name: "grid",
        required: false,
        fields: &[
            opt("scheme", Kind::Text(&["MS", "SS", "both"])),
            opt("Q_int_min", DIMLESS),
            opt("Q_int_max", DIMLESS),
            opt("Q_int_points", Kind::Integer),
            opt("Q_ext_min", DIMLESS),
            opt("Q_ext_max", DIMLESS),
            opt("Q_ext_points", Kind::Integer),
            opt("minima_Q_int", Kind::List(Q::Dimensionless)),
        ],
    },
];

const GATE_SIM: &[Section] = &[
    IO,
    Section {
        name: "drive",
        required: true,
        fields: &[
            req("Omega_S", RATE),
            req("ratio", DIMLESS),
            opt("delta", RATE),
            opt("duration", Kind::Number(Q::Time)),
            opt("dt", Kind::Number(Q::Time)),
            opt("n_max", Kind::Integer),
            opt("b_signs", Kind::List(Q::Dimensionless)),
            opt("samples", Kind::Integer),
        ],
    },
    Section { name: "study", required: false, fields: &[opt("ratio_list", Kind::List(Q::Dimensionless))] },
];

pub(crate) fn schema(cmd: Command) -> &'static [Section] {
    match cmd {
        Command::FieldSolve => FIELD_SOLVE,
        Command::TrapAnalyze => TRAP_ANALYZE,
        Command::ResonatorFit => RESONATOR_FIT,
        Command::GatePower => GATE_POWER,
        Command::GateSim => GATE_SIM,
    }
}

/// A validated run description. All numbers are SI; rates are rad/s,
/// angles degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    /// Section → canonical field name → value.
    pub sections: BTreeMap<String, BTreeMap<String, Value>>,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, path, &base)
}

/// Parses config text; `path` only labels error messages.
pub fn parse_config_str(text: &str, path: &Path, base_dir: &Path) -> Result<RunConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
        Error::Parse { path: path.to_path_buf(), line, column, message: e.message().trim().to_string() }
    })?;
    let command: Command = match table.get("command") {
        Some(toml::Value::String(s)) => s.parse()?,
        Some(_) => return Err(Error::Configuration("`command` must be a string".into())),
        None => return Err(Error::MissingField { section: "top level".into(), field: "command".into() }),
    };
    let seed = match table.get("seed") {
        None => 0,
        Some(toml::Value::Integer(n)) if *n >= 0 => *n as u64,
        Some(_) => return Err(Error::Configuration("`seed` must be a non-negative integer".into())),
    };
    let schema = schema(command);
    let mut sections = BTreeMap::new();
    for (key, value) in &table {
        if key == "command" || key == "seed" {
            continue;
        }
        let Some(section) = schema.iter().find(|s| s.name == key) else {
            return Err(Error::UnknownKey { section: "top level".into(), key: key.clone() });
        };
        let toml::Value::Table(entries) = value else {
            return Err(Error::Configuration(format!("`{key}` must be a [section]")));
        };
        sections.insert(key.clone(), parse_section(section, entries)?);
    }
    for s in schema {
        match sections.get(s.name) {
            None if s.required => {
                let field = s.fields.iter().find(|f| f.required).map_or("", |f| f.name);
                return Err(Error::MissingField { section: s.name.into(), field: field.into() });
            }
            None => {}
            Some(values) => {
                if let Some(f) = s.fields.iter().find(|f| f.required && !values.contains_key(f.name)) {
                    return Err(Error::MissingField { section: s.name.into(), field: f.name.into() });
                }
            }
        }
    }
    Ok(RunConfig { command, seed, sections, base_dir: base_dir.to_path_buf() })
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn parse_section(section: &Section, entries: &toml::Table) -> Result<BTreeMap<String, Value>> {
    let mut out = BTreeMap::new();
    for (key, raw) in entries {
        let (field, suffix) = resolve_key(section, key)?;
        if out.contains_key(field.name) {
            return Err(Error::Configuration(format!("`{}` given twice in [{}] (under different units)", field.name, section.name)));
        }
        out.insert(field.name.to_string(), convert(field, suffix, key, raw)?);
    }
    Ok(out)
}

/// Finds the schema field a key refers to, preferring a match whose unit
/// suffix is valid, so `I_list_A` resolves to `I_list` rather than `I`.
fn resolve_key<'a, 'k>(section: &'a Section, key: &'k str) -> Result<(&'a Field, Option<&'k str>)> {
    let mut bad_suffix = None;
    for field in section.fields {
        let q = quantity(field.kind);
        match match_key(key, field.name, q) {
            KeyMatch::NoMatch => {}
            KeyMatch::Suffix(None) if q == Q::Dimensionless => return Ok((field, None)),
            KeyMatch::Suffix(None) => {
                bad_suffix.get_or_insert((field, String::new()));
            }
            KeyMatch::Suffix(Some(sfx)) => {
                if to_si(q, sfx, 1.0).is_some() {
                    return Ok((field, Some(sfx)));
                }
                bad_suffix.get_or_insert((field, sfx.to_string()));
            }
        }
    }
    match bad_suffix {
        Some((field, sfx)) => {
            let q = quantity(field.kind);
            let message = if sfx.is_empty() {
                format!("`{}` needs a unit suffix (one of {})", field.name, q.accepted().join(", "))
            } else {
                format!("unknown unit suffix `{sfx}` for `{}` (expected one of {})", field.name, q.accepted().join(", "))
            };
            Err(Error::Unit { key: key.to_string(), message })
        }
        None => Err(Error::UnknownKey { section: section.name.into(), key: key.to_string() }),
    }
}

fn quantity(kind: Kind) -> Quantity {
    match kind {
        Kind::Number(q) | Kind::List(q) => q,
        _ => Q::Dimensionless,
    }
}

fn number(raw: &toml::Value) -> Option<f64> {
    match raw {
        toml::Value::Float(x) => Some(*x),
        toml::Value::Integer(n) => Some(*n as f64),
        _ => None,
    }
}

fn convert(field: &Field, suffix: Option<&str>, key: &str, raw: &toml::Value) -> Result<Value> {
    let wrong = |what: &str| Error::Configuration(format!("`{key}` must be {what}"));
    let si = |q: Quantity, x: f64| -> Result<f64> {
        let v = match suffix {
            Some(s) => to_si(q, s, x).expect("suffix validated in resolve_key"),
            None => x,
        };
        if v.is_nan() {
            return Err(wrong("a number"));
        }
        Ok(v)
    };
    match field.kind {
        Kind::Number(q) => Ok(Value::Number(si(q, number(raw).ok_or_else(|| wrong("a number"))?)?)),
        Kind::List(q) => {
            let items = raw.as_array().ok_or_else(|| wrong("an array of numbers"))?;
            let v = items
                .iter()
                .map(|x| si(q, number(x).ok_or_else(|| wrong("an array of numbers"))?))
                .collect::<Result<Vec<_>>>()?;
            if v.is_empty() {
                return Err(wrong("a nonempty array"));
            }
            Ok(Value::List(v))
        }
        Kind::Integer => match raw {
            toml::Value::Integer(n) => Ok(Value::Integer(*n)),
            _ => Err(wrong("an integer")),
        },
        Kind::Text(allowed) => {
            let s = raw.as_str().ok_or_else(|| wrong("a string"))?;
            if !allowed.is_empty() && !allowed.contains(&s) {
                return Err(wrong(&format!("one of {}", allowed.join(", "))));
            }
            Ok(Value::Text(s.to_string()))
        }
        Kind::Path => Ok(Value::Text(raw.as_str().ok_or_else(|| wrong("a path string"))?.to_string())),
    }
}

impl RunConfig {
    fn get(&self, section: &str, name: &str) -> Option<&Value> {
        self.sections.get(section)?.get(name)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    pub fn number(&self, section: &str, name: &str) -> Option<f64> {
        match self.get(section, name)? {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn number_or(&self, section: &str, name: &str, default: f64) -> f64 {
        self.number(section, name).unwrap_or(default)
    }

    pub fn require(&self, section: &str, name: &str) -> Result<f64> {
        self.number(section, name)
            .ok_or_else(|| Error::MissingField { section: section.into(), field: name.into() })
    }

    pub fn list(&self, section: &str, name: &str) -> Option<&[f64]> {
        match self.get(section, name)? {
            Value::List(v) => Some(v),
            _ => None,
        }
    }

    pub fn integer(&self, section: &str, name: &str) -> Option<i64> {
        match self.get(section, name)? {
            Value::Integer(n) => Some(*n),
            _ => None,
        }
    }

    /// A non-negative integer field, with a default.
    pub fn count_or(&self, section: &str, name: &str, default: usize) -> Result<usize> {
        match self.integer(section, name) {
            None => Ok(default),
            Some(n) if n >= 0 => Ok(n as usize),
            Some(_) => Err(Error::Configuration(format!("`{name}` in [{section}] must be non-negative"))),
        }
    }

    pub fn text(&self, section: &str, name: &str) -> Option<&str> {
        match self.get(section, name)? {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    /// A path field resolved against the config's directory.
    pub fn path(&self, section: &str, name: &str) -> Option<PathBuf> {
        self.text(section, name).map(|p| self.base_dir.join(p))
    }

    /// Output directory from `[io] output_dir`, defaulting to `out/` next to
    /// the config.
    pub fn output_dir(&self) -> PathBuf {
        self.path("io", "output_dir").unwrap_or_else(|| self.base_dir.join("out"))
    }

    /// Serializes back to config text with SI suffixes. Parsing the result
    /// (with the same base directory) reproduces `self` exactly.
    pub fn to_toml_string(&self) -> String {
        let mut root = toml::Table::new();
        root.insert("command".into(), toml::Value::String(self.command.as_str().into()));
        root.insert("seed".into(), toml::Value::Integer(self.seed as i64));
        for section in schema(self.command) {
            let Some(values) = self.sections.get(section.name) else { continue };
            let mut t = toml::Table::new();
            for field in section.fields {
                let Some(v) = values.get(field.name) else { continue };
                let key = match quantity(field.kind).si_suffix() {
                    Some(s) if matches!(field.kind, Kind::Number(_) | Kind::List(_)) => format!("{}_{s}", field.name),
                    _ => field.name.to_string(),
                };
                let tv = match v {
                    Value::Number(x) => toml::Value::Float(*x),
                    Value::List(xs) => toml::Value::Array(xs.iter().map(|x| toml::Value::Float(*x)).collect()),
                    Value::Integer(n) => toml::Value::Integer(*n),
                    Value::Text(s) => toml::Value::String(s.clone()),
                };
                t.insert(key, tv);
            }
            root.insert(section.name.into(), toml::Value::Table(t));
        }
        toml::to_string(&root).expect("config tables always serialize")
    }

    /// Canonical SI echo of the config as JSON, for manifests.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "command": self.command,
            "seed": self.seed,
            "sections": self.sections,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config_str(text, Path::new("test.toml"), Path::new("."))
    }

    const GATE_POWER_MIN: &str = r#"
command = "gate-power"
[physics]
mu_parallel_J_per_T = -9.28e-24
dBdr_T_per_m = 1.2e-6
B_H0_T = 5.9e-11
b_j = 0.7071067811865476
q0_nm = 9.30
phi_deg = 45
g_m_MHz = 30
omega_rock_MHz = 4.4
omega_r_GHz = 1.074
Omega_M_kHz = 1
Omega_S_kHz = 2
Omega_C_kHz = 30
"#;

    #[test]
    fn gate_power_echoes_si() {
        let c = parse(GATE_POWER_MIN).unwrap();
        assert_eq!(c.command, Command::GatePower);
        let w = c.number("physics", "omega_rock").unwrap();
        assert!((w - 2.0 * std::f64::consts::PI * 4.4e6).abs() < 1e-6);
        assert!((w - 2.7646e7).abs() / 2.7646e7 < 1e-4);
        assert!((c.number("physics", "q0").unwrap() - 9.30e-9).abs() < 1e-22);
        assert_eq!(c.number("physics", "phi").unwrap(), 45.0);
    }

    #[test]
    fn missing_required_field_is_named() {
        let e = parse("command = \"trap-analyze\"\n[drive]\nV_rf_V = 10\n").unwrap_err();
        assert!(e.to_string().contains("Omega_rf"), "{e}");
        assert!(e.is_usage());
    }

    #[test]
    fn duplicate_keys_are_rejected_with_position() {
        let e = parse("command = \"gate-sim\"\n[drive]\nratio = 15\nratio = 16\nOmega_S_kHz = 2\n").unwrap_err();
        match e {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("{other}"),
        }
        let e = parse("command = \"gate-sim\"\n[drive]\nratio = 15\nOmega_S_kHz = 2\nOmega_S_Hz = 2000\n").unwrap_err();
        assert!(matches!(e, Error::Configuration(_)), "{e}");
    }

    #[test]
    fn unknown_keys_and_units() {
        let e = parse("command = \"gate-sim\"\n[drive]\nratio = 15\nOmega_S_kHz = 2\nfoo = 1\n").unwrap_err();
        assert!(matches!(e, Error::UnknownKey { ref key, .. } if key == "foo"), "{e}");
        let e = parse("command = \"gate-sim\"\n[drive]\nratio = 15\nOmega_S_furlongs = 2\n").unwrap_err();
        assert!(matches!(e, Error::Unit { ref message, .. } if message.contains("furlongs")), "{e}");
        let e = parse("command = \"gate-sim\"\n[nope]\n").unwrap_err();
        assert!(matches!(e, Error::UnknownKey { .. }), "{e}");
        let e = parse("command = \"gate-sim\"\n[drive]\nratio = 15\nOmega_S = 2\n").unwrap_err();
        assert!(matches!(e, Error::Unit { .. }), "{e}");
    }

    #[test]
    fn list_suffixes_resolve_to_the_longer_name() {
        let c = parse(
            "command = \"field-solve\"\n[geometry]\nkind = \"coplanar\"\n[source]\nI_A = 1\n[sweep]\nparameter = \"w\"\nvalues_um = [10, 50]\nI_list_A = [0.48, 1.1]\n",
        )
        .unwrap();
        assert_eq!(c.list("sweep", "I_list").unwrap(), &[0.48, 1.1]);
        let v = c.list("sweep", "values").unwrap();
        assert!((v[0] - 10e-6).abs() < 1e-18 && (v[1] - 50e-6).abs() < 1e-18, "{v:?}");
    }

    #[test]
    fn syntax_errors_report_line_and_column() {
        let e = parse("command = \"gate-sim\"\n[drive\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn emission_round_trips() {
        let c = parse(GATE_POWER_MIN).unwrap();
        let text = c.to_toml_string();
        let d = parse(&text).unwrap();
        assert_eq!(c, d);
        assert_eq!(text, d.to_toml_string());
        let inf = parse("command = \"gate-power\"\n[grid]\nminima_Q_int = [1e4, inf]\n").err();
        // physics section still required
        assert!(matches!(inf, Some(Error::MissingField { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn emitted_si_form_is_a_fixed_point(
                w_um in 0.5f64..100.0,
                v_rf in 0.1f64..300.0,
                f_mhz in 1.0f64..200.0,
                mass_u in 1.0f64..200.0,
                seed in 0u64..1000,
            ) {
                let text = format!(
                    "command = \"trap-analyze\"\nseed = {seed}\n[geometry]\nrf_width_um = {w_um}\n\
                     [drive]\nOmega_rf_MHz = {f_mhz}\nV_rf_mV = {}\n[ion]\nmass_u = {mass_u}\n",
                    v_rf * 1e3
                );
                let first = parse(&text).unwrap();
                let emitted = first.to_toml_string();
                let second = parse(&emitted).unwrap();
                prop_assert_eq!(second.to_toml_string(), emitted);
                prop_assert_eq!(second.seed, seed);
                let v = second.number("drive", "V_rf").unwrap();
                prop_assert!((v - v_rf).abs() <= 1e-12 * v_rf);
                let w = second.number("drive", "Omega_rf").unwrap();
                prop_assert!((w - 2.0 * std::f64::consts::PI * f_mhz * 1e6).abs() <= 1e-9 * w);
            }
        }
    }
}
