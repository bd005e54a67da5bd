//! Plain-text plot data: a CSV plus a `<stem>.plot.json` descriptor naming
//! the axes, their units and scales. Nothing is drawn in-process.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fieldsolver::FieldMap;
use crate::gatepower::{GatePhysics, PowerMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    Heatmap,
    Line,
    Fieldmap,
}

impl FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heatmap" => Ok(PlotKind::Heatmap),
            "line" => Ok(PlotKind::Line),
            "fieldmap" => Ok(PlotKind::Fieldmap),
            other => Err(Error::Usage(format!("unsupported plot kind `{other}` (heatmap, line, fieldmap)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    /// CSV column header.
    pub column: String,
    pub unit: String,
    pub log: bool,
}

impl Axis {
    pub fn linear(column: &str, unit: &str) -> Self {
        Self { column: column.into(), unit: unit.into(), log: false }
    }

    pub fn log(column: &str, unit: &str) -> Self {
        Self { column: column.into(), unit: unit.into(), log: true }
    }
}

/// Column-oriented numeric table. For heatmaps the first two columns are
/// the axes and the rest are values; for lines the first column is x.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<Axis>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<Axis>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = self.columns.iter().map(|c| c.column.as_str()).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Results that can be turned into plot data.
#[derive(Debug, Clone, Copy)]
pub enum PlotResults<'a> {
    PowerMap { map: &'a PowerMap, physics: &'a GatePhysics },
    Table(&'a Table),
    FieldMap(&'a FieldMap),
}

#[derive(Debug, Serialize)]
struct Descriptor<'a> {
    kind: PlotKind,
    data: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    sidecar: Option<String>,
    x: &'a Axis,
    y: &'a Axis,
    values: &'a [Axis],
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn write_descriptor(dir: &Path, stem: &str, d: &Descriptor<'_>) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.plot.json"));
    std::fs::write(&path, serde_json::to_string_pretty(d)? + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes plot data for `results` as `kind` into `dir` and returns every
/// file written. Asking for a kind the results cannot provide (or an
/// unknown kind name) is a usage error.
pub fn emit_plotdata(results: PlotResults<'_>, kind: &str, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let kind: PlotKind = kind.parse()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match (results, kind) {
        (PlotResults::PowerMap { map, physics }, PlotKind::Heatmap) => {
            let [csv, json] = map.write(physics, dir, stem)?;
            let mut values = vec![Axis::log("P_W", "W")];
            values.extend(map.scheme.component_names().iter().map(|c| Axis::log(&format!("{c}_W"), "W")));
            let d = Descriptor {
                kind,
                data: file_name(&csv),
                sidecar: Some(file_name(&json)),
                x: &Axis::log("Q_ext", "1"),
                y: &Axis::log("Q_int", "1"),
                values: &values,
            };
            let desc = write_descriptor(dir, stem, &d)?;
            Ok(vec![csv, json, desc])
        }
        (PlotResults::Table(t), PlotKind::Heatmap) if t.columns.len() >= 3 => {
            let csv = dir.join(format!("{stem}.csv"));
            t.write_csv(&csv)?;
            let d = Descriptor { kind, data: file_name(&csv), sidecar: None, x: &t.columns[1], y: &t.columns[0], values: &t.columns[2..] };
            let desc = write_descriptor(dir, stem, &d)?;
            Ok(vec![csv, desc])
        }
        (PlotResults::Table(t), PlotKind::Line) if t.columns.len() >= 2 => {
            let csv = dir.join(format!("{stem}.csv"));
            t.write_csv(&csv)?;
            let d = Descriptor { kind, data: file_name(&csv), sidecar: None, x: &t.columns[0], y: &t.columns[1], values: &t.columns[1..] };
            let desc = write_descriptor(dir, stem, &d)?;
            Ok(vec![csv, desc])
        }
        (PlotResults::FieldMap(map), PlotKind::Fieldmap) => {
            let files = map.export(dir, stem)?;
            let unit = map.kind().unit();
            let values: Vec<Axis> = map.kind().column_names().iter().map(|c| Axis::linear(c, unit)).collect();
            let d = Descriptor {
                kind,
                data: file_name(&files[0]),
                sidecar: Some(file_name(&files[1])),
                x: &Axis::linear("x_m", "m"),
                y: &Axis::linear("z_m", "m"),
                values: &values,
            };
            let desc = write_descriptor(dir, stem, &d)?;
            Ok(files.into_iter().chain(std::iter::once(desc)).collect())
        }
        (_, kind) => Err(Error::Usage(format!("these results cannot be emitted as a {kind:?} plot"))),
    }
}

/// Descriptor for a line CSV written by a module's own exporter.
pub fn describe_line(csv: &Path, columns: &[Axis]) -> Result<PathBuf> {
    let dir = csv.parent().unwrap_or(Path::new("."));
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let d = Descriptor { kind: PlotKind::Line, data: file_name(csv), sidecar: None, x: &columns[0], y: &columns[1], values: &columns[1..] };
    write_descriptor(dir, &stem, &d)
}
