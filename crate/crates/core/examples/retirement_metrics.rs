//! Contribution time for a unit factor and normal retirement ages.

use std::path::Path;

use ssfactor::io;
use ssfactor::metrics::{self, NraRule};
use ssfactor::rules::{RuleConfig, Scenario, WorkerClass};

pub fn run_example() -> ssfactor::Result<()> {
    let cfg = RuleConfig::default();
    let a = cfg.contribution_rate;

    let ct = metrics::ct1(60.0, 21.4, a)?;
    println!("ct1(60, e = 21.4) = {ct:.2}");
    for class in WorkerClass::ALL {
        println!("  {class:<15} {}", metrics::ct1_feasibility(60.0, ct, class, &cfg).as_str());
    }

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/evectors/ibge");
    let catalog = io::load_catalog(&dir, None)?;
    let source = catalog.resolve(2015, None)?;
    let scenario = Scenario::new(2015, source, &cfg);

    println!("class            entry  rule       nra     ect");
    for class in [WorkerClass::MaleWorker, WorkerClass::FemaleTeacher] {
        for entry in [18.0, 23.0] {
            for rule in [NraRule::Points, NraRule::Combined] {
                let r = metrics::nra(class, entry, &scenario, rule)?;
                println!("{class:<15} {entry:>6.1}  {:<8} {:>6.2} {:>7.2}", rule.as_str(), r.nra, r.ect_at_nra);
            }
        }
    }
    let later = metrics::nra_by_points(WorkerClass::MaleWorker, 18.0, 2019, &cfg)?;
    println!("male worker entering at 18 under the 2019 thresholds: {later}");
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
