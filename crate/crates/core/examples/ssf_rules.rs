//! The factor, the points rule and what they do to a benefit.

use ssfactor::rules::{self, RuleConfig, RuleMode, Scenario, WorkerClass};
use ssfactor::source::{ExpectancySchedule, MortalitySource};

pub fn run_example() -> ssfactor::Result<()> {
    let cfg = RuleConfig::default();
    let a = cfg.contribution_rate;

    let f = rules::ssf(43.0, 35.0, 35.1, a)?;
    println!("age 43, 35 years, e 35.1: factor {f:.4}");

    // A female worker at 63 with 31 effective years, 2015.
    let schedule = ExpectancySchedule::new([(63, 19.6)])?.with_label("e-2013");
    let source = MortalitySource::Schedule(schedule);
    let scenario = Scenario::new(2015, &source, &cfg);
    let class = WorkerClass::FemaleWorker;
    let ect = rules::effective_ct(31.0, class, &cfg)?;
    println!("effective ct 31 counts as {} years (feasible {})", ect.ct, ect.feasible);
    for mode in [RuleMode::SsfOnly, RuleMode::Combined] {
        let f = rules::combined_factor(63.0, 31.0, class, &scenario, mode)?;
        println!("{:<9} factor {f:.4}", mode.as_str());
    }
    println!("points met: {}", rules::meets_points(63.0, 31.0, class, 2015, &cfg)?);

    let f = rules::ssf(55.0, 30.0, 26.5, a)?;
    for (c, w) in [(5000.0, 788.0), (1200.0, 788.0), (5000.0, 1500.0)] {
        println!("mean 2500, ceiling {c}, floor {w}: benefit {:.2}", rules::benefit(2500.0, f, c, w)?);
    }
    for months in [0, 30, 60] {
        println!("transition after {months} months: {:.4}", rules::transition_factor(f, months)?);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
