//! Rebuilding a period life table from survivors and closing it.
//!
//! The survivors come from a smooth hazard, so the rebuilt expectancies can
//! be set against the model's own values.

use ssfactor::ggm::{self, GgmParams};
use ssfactor::io;
use ssfactor::lifetable::LifeTable;

fn synthetic_lx(p: &GgmParams, open_age: u32) -> Vec<f64> {
    (0..=open_age).map(|x| 100_000.0 * ggm::survival(p, x as f64)).collect()
}

pub fn run_example() -> ssfactor::Result<()> {
    // Toy table: three ages, open at 2.
    let toy = io::parse_lifetable("toy", "age,lx\n0,100\n1,60\n2,30\n", Some(0.4))?;
    println!("toy e0 = {:.4}, e_open = {:.4}", toy.ex()[0], toy.ex()[2]);

    let p = GgmParams::new(2.5e-5, 0.11, 6e-4, 0.15)?;
    let lx = synthetic_lx(&p, 90);
    // Close the table with the model's hazard at the open age.
    let m_open = ggm::hazard(&p, 90.5);
    let table = LifeTable::rebuild_from_lx(&lx, 90, m_open)?.with_label("synthetic");

    println!("age       lx        qx       ex   model e");
    for age in [0, 30, 50, 65, 80, 90] {
        println!(
            "{age:>3} {:>10.1} {:>9.6} {:>8.3} {:>9.3}",
            table.lx()[age as usize],
            table.qx(age)?,
            table.life_expectancy(age)?,
            ggm::remaining_life_expectancy(&p, age as f64)?
        );
    }

    print!("{}", io::lifetable_summary_csv(&[&table]));
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
