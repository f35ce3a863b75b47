//! Planning metrics derived from the factor: relative discrepancy between
//! two mortality sources, the normal retirement age, and the contribution
//! time that makes the factor exactly one.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rules::{
    factor_given_e, rule_modes_for_year, ssf, RuleConfig, RuleMode, Scenario, WorkerClass,
};
use crate::source::{ExpectancyMode, MortalitySource, SourceCatalog};

/// Ages searched for a retirement-age crossing.
pub const NRA_AGE_LIMIT: f64 = 100.0;

/// Width of the final bisection bracket for the retirement age.
pub const NRA_TOL: f64 = 1e-6;

/// `(f_cf / f_official − 1)·100`.
pub fn relative_discrepancy(f_cf: f64, f_official: f64) -> Result<f64> {
    if !(f_official.is_finite() && f_official != 0.0) {
        return Err(Error::NonPositive { name: "official factor", value: f_official });
    }
    Ok((f_cf / f_official - 1.0) * 100.0)
}

/// Contribution time at which the factor at age `x` equals one.
///
/// With `u = CT·A` the condition is `u² + (100 + x)·u − 100·e = 0`; the
/// positive root is taken in the cancellation-free form.
pub fn ct1(x: f64, e: f64, a: f64) -> Result<f64> {
    for (name, v) in [("age", x), ("life expectancy", e), ("contribution rate", a)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonPositive { name, value: v });
        }
    }
    let p = 100.0 + x;
    let u = 200.0 * e / (p + (p * p + 400.0 * e).sqrt());
    Ok(u / a)
}

/// Largest contribution time reachable at age `x` by a full career.
pub fn max_ct(x: f64, class: WorkerClass, cfg: &RuleConfig) -> f64 {
    x - cfg.min_entry_age + cfg.bonus(class)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ct1Feasibility {
    Feasible,
    /// Would need a career starting before the minimum entry age.
    InfeasibleEntryAge,
    /// Below the class's minimum contribution line, where any eligible
    /// retiree already has a factor above one.
    BelowMinEct,
}

impl Ct1Feasibility {
    pub fn as_str(self) -> &'static str {
        match self {
            Ct1Feasibility::Feasible => "feasible",
            Ct1Feasibility::InfeasibleEntryAge => "infeasible_entry_age",
            Ct1Feasibility::BelowMinEct => "below_min_ect",
        }
    }
}

pub fn ct1_feasibility(x: f64, ct1: f64, class: WorkerClass, cfg: &RuleConfig) -> Ct1Feasibility {
    if ct1 > max_ct(x, class, cfg) + 1e-9 {
        Ct1Feasibility::InfeasibleEntryAge
    } else if ct1 + 1e-9 < cfg.min_ect(class) + cfg.bonus(class) {
        Ct1Feasibility::BelowMinEct
    } else {
        Ct1Feasibility::Feasible
    }
}

/// Rule under which the normal retirement age is sought.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum NraRule {
    /// Factor reaches one.
    Ssf,
    /// Age plus contribution reaches the year's points.
    Points,
    /// Whichever of the two comes first.
    Combined,
}

impl NraRule {
    pub fn as_str(self) -> &'static str {
        match self {
            NraRule::Ssf => "ssf",
            NraRule::Points => "points",
            NraRule::Combined => "combined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NraResult {
    pub class: WorkerClass,
    pub entry_age: f64,
    pub nra: f64,
    pub ect_at_nra: f64,
    pub rule: NraRule,
}

/// Full-career factor at age `x` with the expectancy held at `e`.
fn career_factor(x: f64, entry_age: f64, bonus: f64, e: f64, a: f64) -> Result<f64> {
    ssf(x, x - entry_age + bonus, e, a)
}

fn nra_by_factor(class: WorkerClass, entry_age: f64, scenario: &Scenario<'_>) -> Result<f64> {
    let cfg = scenario.config;
    let a = cfg.contribution_rate;
    let bonus = cfg.bonus(class);
    let earliest = entry_age + cfg.min_ect(class);
    let mut k = earliest.floor();
    while k < NRA_AGE_LIMIT {
        // e is constant on [k, k+1) under the floor convention.
        let e = crate::source::rounded_e_for_ssf(scenario.source, k, ExpectancyMode::Floor)?;
        let start = earliest.max(k);
        let end = k + 1.0;
        if career_factor(start, entry_age, bonus, e, a)? >= 1.0 {
            return Ok(start);
        }
        if career_factor(end, entry_age, bonus, e, a)? >= 1.0 {
            let (mut lo, mut hi) = (start, end);
            while hi - lo > NRA_TOL * 1e-3 {
                let mid = 0.5 * (lo + hi);
                if career_factor(mid, entry_age, bonus, e, a)? >= 1.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(hi);
        }
        k += 1.0;
    }
    Err(Error::NoCrossing {
        limit: NRA_AGE_LIMIT,
        detail: format!("{class} entering at {entry_age} never reaches a factor of 1"),
    })
}

/// Age at which a full career started at `entry_age` meets the points
/// rule of `year`. Needs no mortality source.
pub fn nra_by_points(class: WorkerClass, entry_age: f64, year: i32, cfg: &RuleConfig) -> Result<f64> {
    let threshold = cfg.points_threshold(class, year)?;
    let bonus = if class.is_teacher() { cfg.teacher_point_bonus } else { 0.0 };
    // x + (x − y) + bonus = points
    let by_points = (threshold + entry_age - bonus) / 2.0;
    Ok(by_points.max(entry_age + cfg.min_ect(class)))
}

/// Normal retirement age after a full career started at `entry_age`.
pub fn nra(class: WorkerClass, entry_age: f64, scenario: &Scenario<'_>, rule: NraRule) -> Result<NraResult> {
    let cfg = scenario.config;
    if !(entry_age.is_finite() && entry_age + 1e-9 >= cfg.min_entry_age) {
        return Err(Error::EntryAgeTooLow { entry: entry_age, min: cfg.min_entry_age });
    }
    let age = match rule {
        NraRule::Ssf => nra_by_factor(class, entry_age, scenario)?,
        NraRule::Points => nra_by_points(class, entry_age, scenario.ssf_year, cfg)?,
        NraRule::Combined => {
            let points = nra_by_points(class, entry_age, scenario.ssf_year, cfg).ok();
            match (nra_by_factor(class, entry_age, scenario), points) {
                (Ok(f), Some(p)) => f.min(p),
                (Ok(f), None) => f,
                (Err(_), Some(p)) => p,
                (Err(e), None) => return Err(e),
            }
        }
    };
    Ok(NraResult { class, entry_age, nra: age, ect_at_nra: age - entry_age, rule })
}

/// Row semantics of a factor grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "class")]
pub enum GridLayout {
    /// Rows are total contribution time; any class.
    Contribution,
    /// Rows are effective contribution time of one class.
    Effective(WorkerClass),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub ages: Vec<u32>,
    pub rows: Vec<u32>,
    pub layout: GridLayout,
}

impl Grid {
    fn cell_feasible(&self, x: f64, row: f64, cfg: &RuleConfig) -> bool {
        match self.layout {
            GridLayout::Contribution => {
                x - row + cfg.max_bonus() + 1e-9 >= cfg.min_entry_age
                    && row + 1e-9 >= cfg.min_contribution_line()
            }
            GridLayout::Effective(class) => {
                x - row + 1e-9 >= cfg.min_entry_age && row + 1e-9 >= cfg.min_ect(class)
            }
        }
    }

    /// Rule modes the layout can express in `year`.
    pub fn modes_for_year(&self, year: i32, cfg: &RuleConfig) -> Vec<RuleMode> {
        match self.layout {
            GridLayout::Contribution => vec![RuleMode::SsfOnly],
            GridLayout::Effective(_) => rule_modes_for_year(year, cfg),
        }
    }
}

/// Factor matrix, rows × ages; `None` marks infeasible cells.
pub type FactorMatrix = Vec<Vec<Option<f64>>>;

/// Factors of one scenario over `grid`.
pub fn factor_matrix(scenario: &Scenario<'_>, grid: &Grid, mode: RuleMode) -> Result<FactorMatrix> {
    let cfg = scenario.config;
    let mut columns: Vec<Option<f64>> = Vec::with_capacity(grid.ages.len());
    for &x in &grid.ages {
        let needed = grid.rows.iter().any(|&r| grid.cell_feasible(x as f64, r as f64, cfg));
        columns.push(if needed { Some(scenario.rounded_e(x as f64)?) } else { None });
    }
    let mut matrix = Vec::with_capacity(grid.rows.len());
    for &row in &grid.rows {
        let mut cells = Vec::with_capacity(grid.ages.len());
        for (&x, e) in grid.ages.iter().zip(&columns) {
            let (xf, rf) = (x as f64, row as f64);
            let cell = match e {
                Some(e) if grid.cell_feasible(xf, rf, cfg) => Some(match grid.layout {
                    GridLayout::Contribution => ssf(xf, rf, *e, cfg.contribution_rate)?,
                    GridLayout::Effective(class) => {
                        factor_given_e(xf, rf, class, *e, scenario.ssf_year, cfg, mode)?
                    }
                }),
                _ => None,
            };
            cells.push(cell);
        }
        matrix.push(cells);
    }
    Ok(matrix)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioComparison {
    pub ssf_year: i32,
    pub rule_mode: RuleMode,
    pub grid: Grid,
    pub factor_official: FactorMatrix,
    pub factor_counterfactual: FactorMatrix,
    /// Percent, from unrounded factors.
    pub discrepancy: FactorMatrix,
}

/// Official and counterfactual factors for one year and rule mode.
pub fn compare(
    ssf_year: i32,
    official: &MortalitySource,
    counterfactual: &MortalitySource,
    grid: &Grid,
    cfg: &RuleConfig,
    mode: RuleMode,
) -> Result<ScenarioComparison> {
    let off = factor_matrix(&Scenario::new(ssf_year, official, cfg), grid, mode)?;
    let cf = factor_matrix(&Scenario::new(ssf_year, counterfactual, cfg), grid, mode)?;
    let discrepancy = off
        .iter()
        .zip(&cf)
        .map(|(ro, rc)| {
            ro.iter()
                .zip(rc)
                .map(|(o, c)| match (o, c) {
                    (Some(o), Some(c)) => relative_discrepancy(*c, *o).map(Some),
                    _ => Ok(None),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioComparison {
        ssf_year,
        rule_mode: mode,
        grid: grid.clone(),
        factor_official: off,
        factor_counterfactual: cf,
        discrepancy,
    })
}

#[derive(Debug)]
pub enum SweepOutcome {
    Compared(ScenarioComparison),
    Failed { ssf_year: i32, error: Error },
}

/// Comparisons for every year, each against the sources of year − 2.
///
/// Years run in parallel; output follows the order of `years`, with one
/// entry per rule mode in force. A year whose sources cannot be resolved
/// yields a [`SweepOutcome::Failed`] entry and the sweep carries on.
pub fn sweep(
    years: &[i32],
    official: &SourceCatalog,
    counterfactual: &SourceCatalog,
    grid: &Grid,
    cfg: &RuleConfig,
) -> Vec<SweepOutcome> {
    let per_year: Vec<Vec<SweepOutcome>> = years
        .par_iter()
        .map(|&year| {
            let sources = official
                .resolve(year, None)
                .and_then(|o| counterfactual.resolve(year, None).map(|c| (o, c)));
            let (o, c) = match sources {
                Ok(s) => s,
                Err(error) => return vec![SweepOutcome::Failed { ssf_year: year, error }],
            };
            grid.modes_for_year(year, cfg)
                .into_iter()
                .map(|mode| match compare(year, o, c, grid, cfg, mode) {
                    Ok(cmp) => SweepOutcome::Compared(cmp),
                    Err(error) => SweepOutcome::Failed { ssf_year: year, error },
                })
                .collect()
        })
        .collect();
    per_year.into_iter().flatten().collect()
}
