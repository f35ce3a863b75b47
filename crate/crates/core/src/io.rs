//! CSV and JSON files read and written by the command-line front end.
//!
//! Input schemas (header row required, `.` as decimal separator, extra
//! columns ignored):
//!
//! * life table: `age,lx[,ex]`, one row per integer age, the last row being
//!   the open age. A published `ex` on that row closes the table unless a
//!   terminal rate is given explicitly.
//! * expectancy schedule: `age,ex` without `lx`.
//! * deaths and exposures: `age,deaths,exposure`.
//! * fitted model: a JSON object with `a`, `b`, `c`, `sigma2`.
//!
//! All numeric output uses fixed decimals and a fixed column order so that
//! reruns are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ggm::{FitResult, GgmParams, MortalityData};
use crate::lifetable::{terminal_rate_from_expectancy, LifeTable};
use crate::metrics::{FactorMatrix, GridLayout, ScenarioComparison};
use crate::rounding::fixed;
use crate::source::{ExpectancySchedule, MortalitySource, SourceCatalog};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    LifeTable,
    Schedule,
    Deaths,
}

struct Table {
    path: String,
    headers: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&path.display().to_string(), &text)
    }

    fn parse(path: &str, text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = rdr.headers()?.iter().map(|h| h.to_ascii_lowercase()).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse {
                path: path.to_string(),
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            rows.push((line, rec));
        }
        Ok(Self { path: path.to_string(), headers, rows })
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.column(name).ok_or_else(|| Error::MissingColumn {
            path: self.path.clone(),
            column: name.to_string(),
        })
    }

    fn kind(&self) -> Result<InputKind> {
        if self.column("lx").is_some() {
            Ok(InputKind::LifeTable)
        } else if self.column("deaths").is_some() || self.column("exposure").is_some() {
            Ok(InputKind::Deaths)
        } else if self.column("ex").is_some() {
            Ok(InputKind::Schedule)
        } else {
            Err(Error::MissingColumn { path: self.path.clone(), column: "lx".into() })
        }
    }

    fn field(&self, line: u64, rec: &csv::StringRecord, col: usize, name: &str) -> Result<Option<f64>> {
        let raw = rec.get(col).unwrap_or("");
        if raw.is_empty() {
            return Ok(None);
        }
        raw.parse::<f64>().map(Some).map_err(|_| Error::Parse {
            path: self.path.clone(),
            line,
            message: format!("column {name}: cannot parse {raw:?} as a number"),
        })
    }

    fn number(&self, line: u64, rec: &csv::StringRecord, col: usize, name: &str) -> Result<f64> {
        self.field(line, rec, col, name)?.ok_or_else(|| Error::Parse {
            path: self.path.clone(),
            line,
            message: format!("column {name} is empty"),
        })
    }

    fn age(&self, line: u64, rec: &csv::StringRecord, col: usize) -> Result<u32> {
        let raw = rec.get(col).unwrap_or("");
        raw.parse::<u32>().map_err(|_| Error::Parse {
            path: self.path.clone(),
            line,
            message: format!("age must be a non-negative integer, got {raw:?}"),
        })
    }

    fn ages(&self, col: usize) -> Result<Vec<u32>> {
        self.rows.iter().map(|(line, rec)| self.age(*line, rec, col)).collect()
    }

    fn parse_error(&self, line: u64, message: impl Into<String>) -> Error {
        Error::Parse { path: self.path.clone(), line, message: message.into() }
    }
}

/// Kind of tabular input in `path`, judged from its header.
pub fn detect_kind(path: &Path) -> Result<InputKind> {
    Table::read(path)?.kind()
}

fn lifetable_from(t: &Table, terminal_m: Option<f64>, label: &str) -> Result<LifeTable> {
    let age_col = t.require("age")?;
    let lx_col = t.require("lx")?;
    let ex_col = t.column("ex");
    if t.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let ages = t.ages(age_col)?;
    for (i, w) in ages.windows(2).enumerate() {
        if w[1] != w[0] + 1 {
            return Err(t.parse_error(t.rows[i + 1].0, format!("ages must be consecutive, {} follows {}", w[1], w[0])));
        }
    }
    let lx = t
        .rows
        .iter()
        .map(|(line, rec)| t.number(*line, rec, lx_col, "lx"))
        .collect::<Result<Vec<_>>>()?;
    let (last_line, last) = t.rows.last().expect("non-empty");
    let m = match (terminal_m, ex_col) {
        (Some(m), _) => m,
        (None, Some(col)) => match t.field(*last_line, last, col, "ex")? {
            Some(e) => terminal_rate_from_expectancy(e)?,
            None => return Err(t.parse_error(*last_line, "no ex on the open-age row; pass --terminal-m")),
        },
        (None, None) => {
            return Err(t.parse_error(*last_line, "terminal closing needs an ex column or --terminal-m"))
        }
    };
    let open_age = *ages.last().expect("non-empty");
    Ok(LifeTable::rebuild_from_lx(&lx, open_age, m)?.with_label(label))
}

/// Reads and rebuilds a life table. Published `dx`/`Lx` columns are ignored.
pub fn read_lifetable(path: &Path, terminal_m: Option<f64>) -> Result<LifeTable> {
    let t = Table::read(path)?;
    lifetable_from(&t, terminal_m, &file_label(path))
}

pub fn parse_lifetable(name: &str, text: &str, terminal_m: Option<f64>) -> Result<LifeTable> {
    let t = Table::parse(name, text)?;
    lifetable_from(&t, terminal_m, name)
}

fn schedule_from(t: &Table, label: &str) -> Result<ExpectancySchedule> {
    let age_col = t.require("age")?;
    let ex_col = t.require("ex")?;
    let pairs = t
        .rows
        .iter()
        .map(|(line, rec)| Ok((t.age(*line, rec, age_col)?, t.number(*line, rec, ex_col, "ex")?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpectancySchedule::new(pairs)?.with_label(label))
}

pub fn read_schedule(path: &Path) -> Result<ExpectancySchedule> {
    schedule_from(&Table::read(path)?, &file_label(path))
}

fn deaths_from(t: &Table) -> Result<MortalityData> {
    let age_col = t.require("age")?;
    let d_col = t.require("deaths")?;
    let e_col = t.require("exposure")?;
    let mut ages = Vec::new();
    let mut deaths = Vec::new();
    let mut exposures = Vec::new();
    for (line, rec) in &t.rows {
        ages.push(t.age(*line, rec, age_col)?);
        deaths.push(t.number(*line, rec, d_col, "deaths")?);
        exposures.push(t.number(*line, rec, e_col, "exposure")?);
    }
    MortalityData::new(ages, deaths, exposures)
}

pub fn read_mortality_data(path: &Path) -> Result<MortalityData> {
    deaths_from(&Table::read(path)?)
}

/// Serialized fit: parameters plus the diagnostics of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub sigma2: f64,
    pub loglik: f64,
    pub converged: bool,
    pub age_min: u32,
    pub age_max: u32,
}

impl From<&FitResult> for FitRecord {
    fn from(r: &FitResult) -> Self {
        let p = r.params;
        FitRecord {
            a: p.a(),
            b: p.b(),
            c: p.c(),
            sigma2: p.sigma2(),
            loglik: r.loglik,
            converged: r.converged,
            age_min: r.age_range.0,
            age_max: r.age_range.1,
        }
    }
}

pub fn fit_record_csv(r: &FitRecord) -> String {
    format!(
        "a,b,c,sigma2,loglik,converged,age_min,age_max\n{:e},{:e},{:e},{:e},{:e},{},{},{}\n",
        r.a, r.b, r.c, r.sigma2, r.loglik, r.converged, r.age_min, r.age_max
    )
}

/// Reads fitted parameters from a JSON file: either a bare parameter
/// object or a full fit record.
pub fn read_params(path: &Path) -> Result<GgmParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    #[derive(Deserialize)]
    struct P {
        a: f64,
        b: f64,
        c: f64,
        sigma2: f64,
    }
    let p: P = serde_json::from_str(&text)?;
    GgmParams::new(p.a, p.b, p.c, p.sigma2)
}

fn file_label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Loads any supported mortality source: `.json` is a fitted model; a CSV
/// with `lx` is a life table; a CSV with only `age,ex` is a schedule.
pub fn load_source(path: &Path, terminal_m: Option<f64>) -> Result<MortalitySource> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        return Ok(MortalitySource::Model(read_params(path)?));
    }
    let t = Table::read(path)?;
    match t.kind()? {
        InputKind::LifeTable => Ok(MortalitySource::Table(lifetable_from(&t, terminal_m, &file_label(path))?)),
        InputKind::Schedule => Ok(MortalitySource::Schedule(schedule_from(&t, &file_label(path))?)),
        InputKind::Deaths => Err(Error::Usage(format!(
            "{}: deaths/exposure data is not a mortality source; fit it first",
            path.display()
        ))),
    }
}

/// Loads every `<table year>.csv` / `<table year>.json` in `dir`.
pub fn load_catalog(dir: &Path, terminal_m: Option<f64>) -> Result<SourceCatalog> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    let mut catalog = SourceCatalog::new();
    for path in entries {
        let ext = path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase());
        if !matches!(ext.as_deref(), Some("csv") | Some("json")) {
            continue;
        }
        let Some(year) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse::<i32>().ok()) else {
            continue;
        };
        if catalog.get(year).is_some() {
            return Err(Error::Usage(format!("two sources for table year {year} in {}", dir.display())));
        }
        catalog.insert(year, load_source(&path, terminal_m)?);
    }
    Ok(catalog)
}

pub fn lifetable_csv(t: &LifeTable) -> String {
    let mut out = String::from("age,lx,dx,qx,Lx,mx,Tx,ex\n");
    for (i, age) in t.ages().enumerate() {
        let qx = t.qx(age).expect("age in range");
        let _ = writeln!(
            out,
            "{age},{},{},{},{},{},{},{}",
            fixed(t.lx()[i], 6),
            fixed(t.dx()[i], 6),
            fixed(qx, 10),
            fixed(t.person_years()[i], 6),
            fixed(t.mx()[i], 10),
            fixed(t.tx()[i], 6),
            fixed(t.ex()[i], 6),
        );
    }
    out
}

/// Ages reported in the life-table summary.
pub const SUMMARY_AGES: [u32; 3] = [50, 65, 80];

pub fn lifetable_summary_csv(tables: &[&LifeTable]) -> String {
    let mut out = String::from("label,e50,e65,e80\n");
    for t in tables {
        let cells: Vec<String> = SUMMARY_AGES
            .iter()
            .map(|&a| t.life_expectancy(a).map(|e| fixed(e, 6)).unwrap_or_default())
            .collect();
        let _ = writeln!(out, "{},{}", t.label(), cells.join(","));
    }
    out
}

pub fn schedule_csv(pairs: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("age,e,e_rounded\n");
    for (age, e, r) in pairs {
        let _ = writeln!(out, "{},{},{}", fixed(*age, 1), fixed(*e, 6), fixed(*r, 1));
    }
    out
}

/// Appendix-style matrix: rows of contribution time, one column per age,
/// blank where the combination is infeasible.
pub fn matrix_csv(layout: GridLayout, ages: &[u32], rows: &[u32], m: &FactorMatrix, decimals: usize) -> String {
    let corner = match layout {
        GridLayout::Contribution => "ct",
        GridLayout::Effective(_) => "ect",
    };
    let mut out = String::from(corner);
    for a in ages {
        let _ = write!(out, ",{a}");
    }
    out.push('\n');
    for (row, cells) in rows.iter().zip(m) {
        let _ = write!(out, "{row}");
        for c in cells {
            out.push(',');
            if let Some(v) = c {
                out.push_str(&fixed(*v, decimals));
            }
        }
        out.push('\n');
    }
    out
}

/// Writes the three matrices of a comparison; returns the file names.
pub fn write_comparison(dir: &Path, cmp: &ScenarioComparison) -> Result<Vec<String>> {
    let stem = format!("{}_{}", cmp.ssf_year, cmp.rule_mode.as_str());
    let g = &cmp.grid;
    let files = [
        (format!("{stem}_official.csv"), &cmp.factor_official),
        (format!("{stem}_counterfactual.csv"), &cmp.factor_counterfactual),
        (format!("{stem}_discrepancy.csv"), &cmp.discrepancy),
    ];
    let mut names = Vec::new();
    for (name, m) in files {
        write_file(&dir.join(&name), &matrix_csv(g.layout, &g.ages, &g.rows, m, 3))?;
        names.push(name);
    }
    Ok(names)
}

/// Parses an appendix-style matrix back into row labels, ages and cells.
pub fn parse_matrix(name: &str, text: &str) -> Result<(Vec<u32>, Vec<u32>, FactorMatrix)> {
    let t = Table::parse(name, text)?;
    let ages = t.headers[1..]
        .iter()
        .map(|h| h.parse::<u32>().map_err(|_| t.parse_error(1, format!("bad age header {h:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (line, rec) in &t.rows {
        rows.push(t.age(*line, rec, 0)?);
        cells.push((1..=ages.len()).map(|c| t.field(*line, rec, c, "cell")).collect::<Result<Vec<_>>>()?);
    }
    Ok((rows, ages, cells))
}

/// Record of one command run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub overrides: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub out_dir: String,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, out_dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            overrides: BTreeMap::new(),
            seed: None,
            out_dir: out_dir.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_file(&dir.join("manifest.json"), &text)
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
