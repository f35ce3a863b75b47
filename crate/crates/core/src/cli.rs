//! Batch command-line front end.
//!
//! Every subcommand writes its CSV outputs plus a `manifest.json` into
//! `--out-dir`. Exit codes: 0 on success, 2 for input errors, 3 for
//! numerical failures.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::ggm::{self, FitOptions};
use crate::io::{self, FitRecord, InputKind, RunManifest};
use crate::lifetable::LifeTable;
use crate::metrics::{self, factor_matrix, Grid, GridLayout, NraResult, NraRule, SweepOutcome};
use crate::rounding::{fixed, round_half_up};
use crate::rules::{RuleConfig, Scenario, WorkerClass};
use crate::source::{ExpectancyMode, MortalitySource};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ssfactor", version, about = "Life tables, mortality fits and social security factor metrics")]
pub struct Cli {
    /// JSON file with rule constants; absent fields keep their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Benefit ceiling C (overrides the config file).
    #[arg(long, global = true)]
    pub ceiling: Option<f64>,
    /// Benefit floor W (overrides the config file).
    #[arg(long, global = true)]
    pub floor: Option<f64>,
    /// Contribution rate A (overrides the config file).
    #[arg(long, global = true)]
    pub contribution_rate: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rebuild life tables from lx and summarise e at 50, 65 and 80.
    Lifetable(LifetableArgs),
    /// Fit the gamma-Gompertz-Makeham model by Poisson likelihood.
    Fit(FitArgs),
    /// Factor matrix for one year in the appendix layout.
    SsfTable(SsfTableArgs),
    /// Normal retirement age.
    Nra(NraArgs),
    /// Contribution time that makes the factor equal to one.
    Ct1(Ct1Args),
    /// Official versus counterfactual factors for one year.
    Compare(CompareArgs),
    /// Comparisons over a range of years.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct LifetableArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Death rate of the open interval; otherwise taken from its `ex`.
    #[arg(long)]
    pub terminal_m: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Deaths/exposure CSV or a life-table CSV.
    pub input: PathBuf,
    #[arg(long)]
    pub terminal_m: Option<f64>,
    #[arg(long, default_value_t = 30)]
    pub min_age: u32,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Age step of the fitted e-vector.
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    /// Run the starts one after another instead of in parallel.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    /// Rows are contribution time.
    Contribution,
    /// Rows are effective contribution time of `--class`.
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Floor,
    Exact,
}

impl From<ModeArg> for ExpectancyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Floor => ExpectancyMode::Floor,
            ModeArg::Exact => ExpectancyMode::Exact,
        }
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, value_enum, default_value = "contribution")]
    pub layout: LayoutArg,
    #[arg(long, value_enum, default_value = "female_worker")]
    pub class: WorkerClass,
    /// Columns, as `first-last`.
    #[arg(long, value_parser = parse_range, default_value = "43-60")]
    pub ages: (u32, u32),
    /// Rows, as `first-last`.
    #[arg(long, value_parser = parse_range, default_value = "35-52")]
    pub rows: (u32, u32),
}

impl GridArgs {
    fn grid(&self) -> Grid {
        Grid {
            ages: (self.ages.0..=self.ages.1).collect(),
            rows: (self.rows.0..=self.rows.1).collect(),
            layout: match self.layout {
                LayoutArg::Contribution => GridLayout::Contribution,
                LayoutArg::Effective => GridLayout::Effective(self.class),
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Table, schedule or fitted-model file, or a directory of `<year>.csv|json`.
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Table year to use instead of the factor year minus two.
    #[arg(long)]
    pub table_year: Option<i32>,
    #[arg(long)]
    pub terminal_m: Option<f64>,
    #[arg(long, value_enum, default_value = "floor")]
    pub e_mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct SsfTableArgs {
    #[arg(long)]
    pub year: i32,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct NraArgs {
    #[arg(long, value_enum, default_value = "combined")]
    pub rule: NraRule,
    #[arg(long, value_enum)]
    pub class: Vec<WorkerClass>,
    #[arg(long, default_value_t = 18.0)]
    pub entry_age: f64,
    #[arg(long)]
    pub year: i32,
    #[command(flatten)]
    pub source: SourceArgs,
}

#[derive(Debug, Args)]
pub struct Ct1Args {
    /// Factor year; selects the table through the two-year lag.
    #[arg(long, required_unless_present = "e")]
    pub year: Option<i32>,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Use this life expectancy instead of a source (needs `--age`).
    #[arg(long, requires = "age")]
    pub e: Option<f64>,
    /// Single age; otherwise every age of `--ages`.
    #[arg(long)]
    pub age: Option<f64>,
    #[arg(long, value_parser = parse_range, default_value = "43-70")]
    pub ages: (u32, u32),
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub year: i32,
    /// Official source: file or directory.
    #[arg(long)]
    pub official: PathBuf,
    /// Counterfactual source: file or directory.
    #[arg(long)]
    pub counterfactual: PathBuf,
    #[arg(long)]
    pub table_year: Option<i32>,
    #[arg(long)]
    pub terminal_m: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Factor years, as `first-last`.
    #[arg(long, value_parser = parse_year_range)]
    pub years: (i32, i32),
    /// Directory of official sources named by table year.
    #[arg(long)]
    pub official: PathBuf,
    /// Directory of counterfactual sources named by table year.
    #[arg(long)]
    pub counterfactual: PathBuf,
    #[arg(long)]
    pub terminal_m: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

fn split_range(s: &str) -> std::result::Result<(&str, &str), String> {
    s.split_once("..=")
        .or_else(|| s.split_once(".."))
        .or_else(|| s.split_once('-'))
        .or(Some((s, s)))
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| format!("bad range {s:?}"))
}

fn parse_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = split_range(s)?;
    let lo: u32 = a.parse().map_err(|_| format!("bad range start {a:?}"))?;
    let hi: u32 = b.parse().map_err(|_| format!("bad range end {b:?}"))?;
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

fn parse_year_range(s: &str) -> std::result::Result<(i32, i32), String> {
    let (lo, hi) = parse_range(s)?;
    Ok((lo as i32, hi as i32))
}

/// Maps an error to its process exit code.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn config(cli: &Cli, manifest: &mut RunManifest) -> Result<RuleConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            manifest.inputs.push(path.display().to_string());
            RuleConfig::load(path)?
        }
        None => RuleConfig::default(),
    };
    if let Some(c) = cli.ceiling {
        cfg.ceiling = Some(c);
        manifest.overrides.insert("ceiling".into(), c.to_string());
    }
    if let Some(w) = cli.floor {
        cfg.floor = Some(w);
        manifest.overrides.insert("floor".into(), w.to_string());
    }
    if let Some(a) = cli.contribution_rate {
        cfg.contribution_rate = a;
        manifest.overrides.insert("contribution_rate".into(), a.to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// A file is used as is; a directory is resolved through the table-year lag.
fn resolve_source(
    path: &Path,
    ssf_year: i32,
    table_year: Option<i32>,
    terminal_m: Option<f64>,
) -> Result<MortalitySource> {
    if path.is_dir() {
        let catalog = io::load_catalog(path, terminal_m)?;
        catalog.resolve(ssf_year, table_year).cloned()
    } else {
        io::load_source(path, terminal_m)
    }
}

struct Output<'a> {
    dir: &'a Path,
    manifest: RunManifest,
}

impl Output<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        io::write_file(&self.dir.join(name), contents)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn finish(self) -> Result<()> {
        self.manifest.write(self.dir)
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let (name, seed) = match &cli.command {
        Command::Lifetable(_) => ("lifetable", None),
        Command::Fit(_) => ("fit", Some(cli.seed)),
        Command::SsfTable(_) => ("ssf-table", None),
        Command::Nra(_) => ("nra", None),
        Command::Ct1(_) => ("ct1", None),
        Command::Compare(_) => ("compare", None),
        Command::Sweep(_) => ("sweep", None),
    };
    let mut manifest = RunManifest::new(name, &cli.out_dir);
    manifest.seed = seed;
    let cfg = config(cli, &mut manifest)?;
    let mut out = Output { dir: &cli.out_dir, manifest };
    match &cli.command {
        Command::Lifetable(a) => cmd_lifetable(a, &mut out)?,
        Command::Fit(a) => cmd_fit(a, cli.seed, &mut out)?,
        Command::SsfTable(a) => cmd_ssf_table(a, &cfg, &mut out)?,
        Command::Nra(a) => cmd_nra(a, &cfg, &mut out)?,
        Command::Ct1(a) => cmd_ct1(a, &cfg, &mut out)?,
        Command::Compare(a) => cmd_compare(a, &cfg, &mut out)?,
        Command::Sweep(a) => cmd_sweep(a, &cfg, &mut out)?,
    }
    out.finish()
}

fn note_terminal(out: &mut Output<'_>, terminal_m: Option<f64>) {
    if let Some(m) = terminal_m {
        out.manifest.overrides.insert("terminal_m".into(), m.to_string());
    }
}

fn cmd_lifetable(args: &LifetableArgs, out: &mut Output<'_>) -> Result<()> {
    note_terminal(out, args.terminal_m);
    let mut tables: Vec<LifeTable> = Vec::new();
    for path in &args.inputs {
        out.manifest.inputs.push(path.display().to_string());
        let t = io::read_lifetable(path, args.terminal_m)?;
        if tables.iter().any(|o| o.label() == t.label()) {
            return Err(Error::Usage(format!("two inputs share the name {:?}", t.label())));
        }
        tables.push(t);
    }
    for t in &tables {
        out.write(&format!("{}_table.csv", t.label()), &io::lifetable_csv(t))?;
    }
    let refs: Vec<&LifeTable> = tables.iter().collect();
    out.write("summary.csv", &io::lifetable_summary_csv(&refs))
}

fn cmd_fit(args: &FitArgs, seed: u64, out: &mut Output<'_>) -> Result<()> {
    note_terminal(out, args.terminal_m);
    out.manifest.inputs.push(args.input.display().to_string());
    for (k, v) in [
        ("min_age", args.min_age.to_string()),
        ("restarts", args.restarts.to_string()),
        ("tol", args.tol.to_string()),
        ("step", args.step.to_string()),
    ] {
        out.manifest.overrides.insert(k.into(), v);
    }
    if !(args.step.is_finite() && args.step > 0.0) {
        return Err(Error::NonPositive { name: "step", value: args.step });
    }
    let data = match io::detect_kind(&args.input)? {
        InputKind::Deaths => io::read_mortality_data(&args.input)?,
        InputKind::LifeTable => {
            let t = io::read_lifetable(&args.input, args.terminal_m)?;
            ggm::mortality_data_from_lifetable(&t, args.min_age)?
        }
        InputKind::Schedule => {
            return Err(Error::Usage(format!(
                "{}: an expectancy schedule cannot be fitted; provide deaths/exposure or lx",
                args.input.display()
            )))
        }
    };
    let options = FitOptions {
        min_age: args.min_age,
        restarts: args.restarts,
        seed,
        tol: args.tol,
        parallel: !args.sequential,
    };
    let result = ggm::fit(&data, &options)?;
    let record = FitRecord::from(&result);
    out.write("fit.csv", &io::fit_record_csv(&record))?;
    let mut json = serde_json::to_string_pretty(&record)?;
    json.push('\n');
    out.write("fit.json", &json)?;

    let steps = (80.0 / args.step).round() as usize;
    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let age = 30.0 + i as f64 * args.step;
        if age > 110.0 + 1e-9 {
            break;
        }
        let e = ggm::remaining_life_expectancy(&result.params, age)?;
        rows.push((age, e, round_half_up(e, 1)));
    }
    out.write("evector.csv", &io::schedule_csv(&rows))
}

fn scenario_source(args: &SourceArgs, year: i32, out: &mut Output<'_>) -> Result<MortalitySource> {
    let path = args
        .source
        .as_ref()
        .ok_or_else(|| Error::Usage("this command needs --source".into()))?;
    out.manifest.inputs.push(path.display().to_string());
    note_terminal(out, args.terminal_m);
    if let Some(t) = args.table_year {
        out.manifest.overrides.insert("table_year".into(), t.to_string());
    }
    resolve_source(path, year, args.table_year, args.terminal_m)
}

fn cmd_ssf_table(args: &SsfTableArgs, cfg: &RuleConfig, out: &mut Output<'_>) -> Result<()> {
    let source = scenario_source(&args.source, args.year, out)?;
    let scenario = Scenario::new(args.year, &source, cfg).with_mode(args.source.e_mode.into());
    let grid = args.grid.grid();
    for mode in grid.modes_for_year(args.year, cfg) {
        let m = factor_matrix(&scenario, &grid, mode)?;
        let name = format!("ssf_{}_{}.csv", args.year, mode.as_str());
        out.write(&name, &io::matrix_csv(grid.layout, &grid.ages, &grid.rows, &m, 3))?;
    }
    Ok(())
}

fn nra_csv(results: &[NraResult], year: i32) -> String {
    let mut s = String::from("class,entry_age,year,rule,nra,ect\n");
    for r in results {
        s.push_str(&format!(
            "{},{},{year},{},{},{}\n",
            r.class,
            fixed(r.entry_age, 2),
            r.rule.as_str(),
            fixed(r.nra, 4),
            fixed(r.ect_at_nra, 4)
        ));
    }
    s
}

fn cmd_nra(args: &NraArgs, cfg: &RuleConfig, out: &mut Output<'_>) -> Result<()> {
    let classes = if args.class.is_empty() { WorkerClass::ALL.to_vec() } else { args.class.clone() };
    let mut results = Vec::new();
    if args.rule == NraRule::Points {
        for class in classes {
            let nra = metrics::nra_by_points(class, args.entry_age, args.year, cfg)?;
            if args.entry_age + 1e-9 < cfg.min_entry_age {
                return Err(Error::EntryAgeTooLow { entry: args.entry_age, min: cfg.min_entry_age });
            }
            results.push(NraResult {
                class,
                entry_age: args.entry_age,
                nra,
                ect_at_nra: nra - args.entry_age,
                rule: NraRule::Points,
            });
        }
    } else {
        let source = scenario_source(&args.source, args.year, out)?;
        let scenario = Scenario::new(args.year, &source, cfg);
        for class in classes {
            results.push(metrics::nra(class, args.entry_age, &scenario, args.rule)?);
        }
    }
    for r in &results {
        println!("{} {} nra={} ect={}", r.class, r.rule.as_str(), fixed(r.nra, 4), fixed(r.ect_at_nra, 4));
    }
    out.write("nra.csv", &nra_csv(&results, args.year))
}

fn cmd_ct1(args: &Ct1Args, cfg: &RuleConfig, out: &mut Output<'_>) -> Result<()> {
    let rate = cfg.contribution_rate;
    let ages: Vec<f64> = match args.age {
        Some(a) => vec![a],
        None => (args.ages.0..=args.ages.1).map(f64::from).collect(),
    };
    let rows: Vec<(f64, f64)> = match (args.e, args.year) {
        (Some(e), _) => {
            out.manifest.overrides.insert("e".into(), e.to_string());
            ages.iter().map(|&x| (x, e)).collect()
        }
        (None, Some(year)) => {
            let source = scenario_source(&args.source, year, out)?;
            let scenario = Scenario::new(year, &source, cfg).with_mode(args.source.e_mode.into());
            ages.iter().map(|&x| Ok((x, scenario.rounded_e(x)?))).collect::<Result<_>>()?
        }
        (None, None) => return Err(Error::Usage("ct1 needs --e or --year with --source".into())),
    };
    let mut s = String::from("age,e,ct1");
    for class in WorkerClass::ALL {
        s.push_str(&format!(",feasible_{class}"));
    }
    s.push('\n');
    for (x, e) in rows {
        let ct = metrics::ct1(x, e, rate)?;
        s.push_str(&format!("{},{},{}", fixed(x, 1), fixed(e, 1), fixed(ct, 2)));
        for class in WorkerClass::ALL {
            s.push(',');
            s.push_str(metrics::ct1_feasibility(x, ct, class, cfg).as_str());
        }
        s.push('\n');
        if args.age.is_some() {
            println!("ct1({}, e={}) = {}", fixed(x, 1), fixed(e, 1), fixed(ct, 2));
        }
    }
    out.write("ct1.csv", &s)
}

fn cmd_compare(args: &CompareArgs, cfg: &RuleConfig, out: &mut Output<'_>) -> Result<()> {
    note_terminal(out, args.terminal_m);
    for p in [&args.official, &args.counterfactual] {
        out.manifest.inputs.push(p.display().to_string());
    }
    let official = resolve_source(&args.official, args.year, args.table_year, args.terminal_m)?;
    let counterfactual = resolve_source(&args.counterfactual, args.year, args.table_year, args.terminal_m)?;
    let grid = args.grid.grid();
    for mode in grid.modes_for_year(args.year, cfg) {
        let cmp = metrics::compare(args.year, &official, &counterfactual, &grid, cfg, mode)?;
        let names = io::write_comparison(out.dir, &cmp)?;
        out.manifest.outputs.extend(names);
    }
    Ok(())
}

/// Mean and largest absolute value over the populated cells.
fn cell_stats(m: &metrics::FactorMatrix) -> Option<(f64, f64)> {
    let cells: Vec<f64> = m.iter().flatten().flatten().copied().collect();
    if cells.is_empty() {
        return None;
    }
    let mean = cells.iter().sum::<f64>() / cells.len() as f64;
    let max = cells.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    Some((mean, max))
}

fn cmd_sweep(args: &SweepArgs, cfg: &RuleConfig, out: &mut Output<'_>) -> Result<()> {
    note_terminal(out, args.terminal_m);
    for p in [&args.official, &args.counterfactual] {
        out.manifest.inputs.push(p.display().to_string());
    }
    let official = io::load_catalog(&args.official, args.terminal_m)?;
    let counterfactual = io::load_catalog(&args.counterfactual, args.terminal_m)?;
    let years: Vec<i32> = (args.years.0..=args.years.1).collect();
    let grid = args.grid.grid();
    let mut series = String::from("year,metric,value,source\n");
    for (year, label, cat) in years
        .iter()
        .flat_map(|&y| [(y, "official", &official), (y, "counterfactual", &counterfactual)])
    {
        if let Ok(src) = cat.resolve(year, None) {
            for age in io::SUMMARY_AGES {
                if let Ok(e) = src.expectancy(age as f64, ExpectancyMode::Floor) {
                    series.push_str(&format!("{year},e{age},{},{label}\n", fixed(e, 6)));
                }
            }
        }
    }
    let mut failures = Vec::new();
    for outcome in metrics::sweep(&years, &official, &counterfactual, &grid, cfg) {
        match outcome {
            SweepOutcome::Compared(cmp) => {
                let names = io::write_comparison(out.dir, &cmp)?;
                out.manifest.outputs.extend(names);
                if let Some((mean, max)) = cell_stats(&cmp.discrepancy) {
                    let mode = cmp.rule_mode.as_str();
                    series.push_str(&format!("{},discrepancy_mean_{mode},{},comparison\n", cmp.ssf_year, fixed(mean, 6)));
                    series.push_str(&format!("{},discrepancy_max_abs_{mode},{},comparison\n", cmp.ssf_year, fixed(max, 6)));
                }
            }
            SweepOutcome::Failed { ssf_year, error } => {
                eprintln!("warning: {ssf_year} skipped: {error}");
                failures.push((ssf_year, error));
            }
        }
    }
    out.write("series.csv", &series)?;
    if failures.len() == years.len() {
        let (_, error) = failures.into_iter().next().expect("at least one year");
        return Err(error);
    }
    Ok(())
}
