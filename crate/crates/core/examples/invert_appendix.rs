//! Recovers the life expectancies behind the published factor tables.
//!
//! Each column of an appendix fragment shares one rounded life expectancy.
//! Scanning e over one-decimal values and keeping those that reproduce
//! every printed cell of the column pins e down. The factor is evaluated
//! here from scratch so the recovered values do not depend on the library.
//!
//! Columns where every cell is clamped to 1.000 only bound e from below;
//! the smallest admissible value is taken.
//!
//! Run with `--write` to refresh `data/evectors/`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const A: f64 = 0.31;
/// Extra years of female workers in the 2015 fragments.
const FEMALE_BONUS: f64 = 5.0;
const FEMALE_POINTS: f64 = 85.0;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fragment {
    /// Rows are contribution time; plain factor.
    Contribution,
    /// Rows are a female worker's effective contribution time; the points
    /// rule clamps the factor at one once age plus ECT reaches 85.
    FemaleCombined,
}

struct Matrix {
    ages: Vec<u32>,
    rows: Vec<u32>,
    cells: Vec<Vec<Option<f64>>>,
}

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn read_matrix(path: &Path) -> Matrix {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().expect("header");
    let ages = header.split(',').skip(1).map(|a| a.parse().expect("age")).collect();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let mut fields = line.split(',');
        rows.push(fields.next().expect("row").parse().expect("row label"));
        cells.push(fields.map(|c| if c.is_empty() { None } else { Some(c.parse().expect("cell")) }).collect());
    }
    Matrix { ages, rows, cells }
}

fn thousandths(v: f64) -> i64 {
    (v * 1000.0 + 0.5 + 1e-9).floor() as i64
}

fn printed(kind: Fragment, x: f64, row: f64, e: f64) -> i64 {
    let ct = match kind {
        Fragment::Contribution => row,
        Fragment::FemaleCombined => row + FEMALE_BONUS,
    };
    let f = ct * A / e * (1.0 + (x + ct * A) / 100.0);
    let shown = match kind {
        Fragment::FemaleCombined if x + row >= FEMALE_POINTS => f.max(1.0),
        _ => f,
    };
    thousandths(shown)
}

/// All one-decimal e in [5, 60] consistent with one column.
fn admissible(kind: Fragment, m: &Matrix, col: usize) -> Vec<f64> {
    let x = m.ages[col] as f64;
    (50..=600)
        .map(|k| k as f64 / 10.0)
        .filter(|&e| {
            m.rows.iter().zip(&m.cells).all(|(&row, cells)| match cells[col] {
                Some(v) => printed(kind, x, row as f64, e) == thousandths(v),
                None => true,
            })
        })
        .collect()
}

pub struct Inversion {
    pub ages: Vec<u32>,
    pub e: Vec<f64>,
    /// Ages where e is only bounded from below.
    pub lower_bounded: Vec<u32>,
}

fn invert(kind: Fragment, m: &Matrix) -> Inversion {
    let mut e = Vec::new();
    let mut lower_bounded = Vec::new();
    for (col, &age) in m.ages.iter().enumerate() {
        let ok = admissible(kind, m, col);
        assert!(!ok.is_empty(), "no e reproduces column {age}");
        let contiguous = ok.windows(2).all(|w| (w[1] - w[0] - 0.1).abs() < 1e-9);
        assert!(contiguous, "column {age} admits a disconnected set of e");
        if ok.len() > 1 {
            lower_bounded.push(age);
        }
        e.push(ok[0]);
    }
    Inversion { ages: m.ages.clone(), e, lower_bounded }
}

pub fn schedule_csv(inv: &Inversion) -> String {
    let mut s = String::from("age,ex\n");
    for (age, e) in inv.ages.iter().zip(&inv.e) {
        let _ = writeln!(s, "{age},{e:.1}");
    }
    s
}

/// Appendix fragment, its layout, and where the recovered schedule goes
/// (named by the year of the table behind the factor).
const JOBS: [(&str, Fragment, &str); 4] = [
    ("ssf2012_ibge.csv", Fragment::Contribution, "ibge/2010.csv"),
    ("ssf2012_ggm.csv", Fragment::Contribution, "ggm/2010.csv"),
    ("ssf2015_ibge_combined.csv", Fragment::FemaleCombined, "ibge/2013.csv"),
    ("ssf2015_ggm_combined.csv", Fragment::FemaleCombined, "ggm/2013.csv"),
];

/// Recovered schedules keyed by their fixture path.
pub fn recovered() -> Vec<(String, Inversion)> {
    let dir = data_dir();
    JOBS.iter()
        .map(|(fragment, kind, target)| {
            let m = read_matrix(&dir.join("appendix").join(fragment));
            (target.to_string(), invert(*kind, &m))
        })
        .collect()
}

pub fn run_example(write: bool) {
    let out = data_dir().join("evectors");
    for (target, inv) in recovered() {
        let values: Vec<String> = inv.e.iter().map(|e| format!("{e:.1}")).collect();
        println!("{target}: {}", values.join(" "));
        if !inv.lower_bounded.is_empty() {
            println!("  lower bounds only at ages {:?}", inv.lower_bounded);
        }
        if write {
            let path = out.join(&target);
            std::fs::create_dir_all(path.parent().expect("parent")).expect("mkdir");
            std::fs::write(&path, schedule_csv(&inv)).expect("write fixture");
        }
    }
}

fn main() {
    let write = std::env::args().any(|a| a == "--write");
    run_example(write);
}
