//! Fitting the gamma-Gompertz-Makeham hazard to simulated deaths.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use ssfactor::ggm::{self, FitOptions, GgmParams, MortalityData};

fn simulate(p: &GgmParams, seed: u64) -> ssfactor::Result<MortalityData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ages: Vec<u32> = (30..100).collect();
    let exposures: Vec<f64> = ages.iter().map(|&x| 200_000.0 * (-0.02 * (x as f64 - 30.0)).exp()).collect();
    let deaths = ages
        .iter()
        .zip(&exposures)
        .map(|(&x, &e)| {
            let mean = ggm::hazard(p, x as f64 + 0.5) * e;
            Poisson::new(mean).expect("positive mean").sample(&mut rng)
        })
        .collect();
    MortalityData::new(ages, deaths, exposures)
}

pub fn run_example() -> ssfactor::Result<()> {
    let truth = GgmParams::new(3e-5, 0.105, 8e-4, 0.12)?;
    let data = simulate(&truth, 7)?;
    let options = FitOptions { restarts: 16, ..FitOptions::default() };
    let fit = ggm::fit(&data, &options)?;
    let p = fit.params;

    println!("          true        fitted");
    for (name, t, f) in [
        ("a", truth.a(), p.a()),
        ("b", truth.b(), p.b()),
        ("c", truth.c(), p.c()),
        ("sigma2", truth.sigma2(), p.sigma2()),
    ] {
        println!("{name:<7} {t:>11.4e} {f:>11.4e}");
    }
    println!("loglik {:.4}, converged {}, ages {:?}", fit.loglik, fit.converged, fit.age_range);
    println!("plateau {:.3} (true {:.3})", p.plateau(), truth.plateau());
    for x in [60.0, 65.0, 80.0] {
        println!("e({x}) = {:.3}", ggm::remaining_life_expectancy(&p, x)?);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
