//! Official against model-based factors, year by year.

use std::path::Path;

use ssfactor::io;
use ssfactor::metrics::{self, Grid, GridLayout, SweepOutcome};
use ssfactor::rules::{RuleConfig, RuleMode, WorkerClass};

pub fn run_example() -> ssfactor::Result<()> {
    let cfg = RuleConfig::default();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/evectors");
    let official = io::load_catalog(&root.join("ibge"), None)?;
    let model = io::load_catalog(&root.join("ggm"), None)?;

    // Ages both vintages cover, rows of total contribution time.
    let grid = Grid { ages: (48..=60).collect(), rows: (35..=44).collect(), layout: GridLayout::Contribution };
    for outcome in metrics::sweep(&[2012, 2013, 2014, 2015], &official, &model, &grid, &cfg) {
        match outcome {
            SweepOutcome::Compared(cmp) => {
                let cells: Vec<f64> = cmp.discrepancy.iter().flatten().flatten().copied().collect();
                let max = cells.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                println!("{} {:<8} {} cells, largest |discrepancy| {max:.3}%", cmp.ssf_year, cmp.rule_mode.as_str(), cells.len());
            }
            SweepOutcome::Failed { ssf_year, error } => println!("{ssf_year} skipped: {error}"),
        }
    }

    // 2015 in the layout of the published fragment, points rule included.
    let grid = Grid {
        ages: (48..=65).collect(),
        rows: (30..=47).collect(),
        layout: GridLayout::Effective(WorkerClass::FemaleWorker),
    };
    let (o, m) = (official.resolve(2015, None)?, model.resolve(2015, None)?);
    let cmp = metrics::compare(2015, o, m, &grid, &cfg, RuleMode::Combined)?;
    let row = 1; // ECT 31
    let col = grid.ages.iter().position(|&a| a == 63).expect("age 63 on the grid");
    println!(
        "female worker, 63, ECT 31: {:.3} vs {:.3}, discrepancy {:.3}%",
        cmp.factor_official[row][col].unwrap_or(f64::NAN),
        cmp.factor_counterfactual[row][col].unwrap_or(f64::NAN),
        cmp.discrepancy[row][col].unwrap_or(f64::NAN)
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
