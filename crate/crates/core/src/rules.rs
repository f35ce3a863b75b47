//! The Social Security Factor and the rules around it.
//!
//! The factor for retirement age `x`, contribution time `CT`, rate `A` and
//! life expectancy `e` is
//!
//! ```text
//! f = (CT·A / e) · (1 + (x + CT·A) / 100)
//! ```
//!
//! `CT` is the effective contribution time plus a bonus that depends on the
//! worker class. From 2015 a points rule coexists with the factor: when age
//! plus effective contribution time (plus a teacher bonus) reaches the
//! year's threshold, the factor is never allowed to reduce the benefit.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::source::{rounded_e_for_ssf, ExpectancyMode, MortalitySource};

/// Slack for comparisons of sums of decimal ages and years.
const POINTS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum WorkerClass {
    MaleWorker,
    FemaleWorker,
    MaleTeacher,
    FemaleTeacher,
}

impl WorkerClass {
    pub const ALL: [WorkerClass; 4] = [
        WorkerClass::MaleWorker,
        WorkerClass::FemaleWorker,
        WorkerClass::MaleTeacher,
        WorkerClass::FemaleTeacher,
    ];

    pub fn is_female(self) -> bool {
        matches!(self, WorkerClass::FemaleWorker | WorkerClass::FemaleTeacher)
    }

    pub fn is_teacher(self) -> bool {
        matches!(self, WorkerClass::MaleTeacher | WorkerClass::FemaleTeacher)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WorkerClass::MaleWorker => "male_worker",
            WorkerClass::FemaleWorker => "female_worker",
            WorkerClass::MaleTeacher => "male_teacher",
            WorkerClass::FemaleTeacher => "female_teacher",
        }
    }
}

impl fmt::Display for WorkerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for WorkerClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        WorkerClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown worker class {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointsThreshold {
    pub female: f64,
    pub male: f64,
}

/// Legal constants. Deserialises from partial JSON: absent fields keep
/// their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleConfig {
    /// The constant `A` of the factor formula.
    pub contribution_rate: f64,
    /// Years added to the effective contribution time, per class.
    pub bonuses: BTreeMap<WorkerClass, f64>,
    /// Minimum effective contribution time, per class.
    pub min_ect: BTreeMap<WorkerClass, f64>,
    /// Points thresholds per calendar year.
    pub points: BTreeMap<i32, PointsThreshold>,
    pub teacher_point_bonus: f64,
    /// Benefit ceiling `C`.
    pub ceiling: Option<f64>,
    /// Benefit floor `W`.
    pub floor: Option<f64>,
    /// Youngest age at which a career may start.
    pub min_entry_age: f64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        use WorkerClass::*;
        let bonuses = [(MaleWorker, 0.0), (FemaleWorker, 5.0), (MaleTeacher, 5.0), (FemaleTeacher, 10.0)];
        let min_ect = [(MaleWorker, 35.0), (FemaleWorker, 30.0), (MaleTeacher, 30.0), (FemaleTeacher, 25.0)];
        let mut points: BTreeMap<i32, PointsThreshold> =
            (2015..=2018).map(|y| (y, PointsThreshold { female: 85.0, male: 95.0 })).collect();
        points.insert(2019, PointsThreshold { female: 86.0, male: 96.0 });
        Self {
            contribution_rate: 0.31,
            bonuses: bonuses.into_iter().collect(),
            min_ect: min_ect.into_iter().collect(),
            points,
            teacher_point_bonus: 5.0,
            ceiling: None,
            floor: None,
            min_entry_age: 18.0,
        }
    }
}

impl RuleConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RuleConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.contribution_rate.is_finite() && self.contribution_rate > 0.0) {
            return Err(Error::Config(format!(
                "contribution_rate must be positive, got {}",
                self.contribution_rate
            )));
        }
        for class in WorkerClass::ALL {
            match self.bonuses.get(&class) {
                Some(b) if b.is_finite() && *b >= 0.0 => {}
                Some(b) => return Err(Error::Config(format!("bonus for {class} must be >= 0, got {b}"))),
                None => return Err(Error::Config(format!("missing bonus for {class}"))),
            }
            match self.min_ect.get(&class) {
                Some(m) if m.is_finite() && *m >= 0.0 => {}
                Some(m) => return Err(Error::Config(format!("min_ect for {class} must be >= 0, got {m}"))),
                None => return Err(Error::Config(format!("missing min_ect for {class}"))),
            }
        }
        for (year, p) in &self.points {
            if p.female.partial_cmp(&p.male) != Some(std::cmp::Ordering::Less) {
                return Err(Error::Config(format!(
                    "year {year}: female points {} must be below male points {}",
                    p.female, p.male
                )));
            }
        }
        if let (Some(c), Some(w)) = (self.ceiling, self.floor) {
            if w > c {
                return Err(Error::FloorAboveCeiling { floor: w, ceiling: c });
            }
        }
        Ok(())
    }

    pub fn bonus(&self, class: WorkerClass) -> f64 {
        self.bonuses.get(&class).copied().unwrap_or(0.0)
    }

    pub fn min_ect(&self, class: WorkerClass) -> f64 {
        self.min_ect.get(&class).copied().unwrap_or(0.0)
    }

    pub fn max_bonus(&self) -> f64 {
        WorkerClass::ALL.iter().map(|&c| self.bonus(c)).fold(0.0, f64::max)
    }

    /// Smallest contribution time any class can retire with.
    pub fn min_contribution_line(&self) -> f64 {
        WorkerClass::ALL
            .iter()
            .map(|&c| self.min_ect(c) + self.bonus(c))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn points_threshold(&self, class: WorkerClass, year: i32) -> Result<f64> {
        let p = self.points.get(&year).ok_or(Error::NoPointsForYear(year))?;
        Ok(if class.is_female() { p.female } else { p.male })
    }

    /// First year in which the points rule applies, if any.
    pub fn first_points_year(&self) -> Option<i32> {
        self.points.keys().next().copied()
    }
}

/// Which rule produces the factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleMode {
    /// The factor alone.
    SsfOnly,
    /// The factor, floored at 1 when the points rule is met.
    Combined,
}

impl RuleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleMode::SsfOnly => "ssf",
            RuleMode::Combined => "combined",
        }
    }
}

/// Rule modes in force in `year`. The first points year runs both, since
/// the points rule arrived mid-year.
pub fn rule_modes_for_year(year: i32, cfg: &RuleConfig) -> Vec<RuleMode> {
    match cfg.first_points_year() {
        Some(first) if year == first => vec![RuleMode::SsfOnly, RuleMode::Combined],
        Some(_) if cfg.points.contains_key(&year) => vec![RuleMode::Combined],
        _ => vec![RuleMode::SsfOnly],
    }
}

/// A calendar year bound to a mortality source and rule set.
#[derive(Debug, Clone, Copy)]
pub struct Scenario<'a> {
    pub ssf_year: i32,
    pub source: &'a MortalitySource,
    pub config: &'a RuleConfig,
    pub e_mode: ExpectancyMode,
}

impl<'a> Scenario<'a> {
    pub fn new(ssf_year: i32, source: &'a MortalitySource, config: &'a RuleConfig) -> Self {
        Self { ssf_year, source, config, e_mode: ExpectancyMode::Floor }
    }

    pub fn with_mode(mut self, e_mode: ExpectancyMode) -> Self {
        self.e_mode = e_mode;
        self
    }

    pub fn rounded_e(&self, x: f64) -> Result<f64> {
        rounded_e_for_ssf(self.source, x, self.e_mode)
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}

/// The factor, unrounded. `e` is expected already floored and rounded.
pub fn ssf(x: f64, ct: f64, e: f64, a: f64) -> Result<f64> {
    positive("age", x)?;
    positive("contribution time", ct)?;
    positive("life expectancy", e)?;
    positive("contribution rate", a)?;
    let u = ct * a;
    Ok(u / e * (1.0 + (x + u) / 100.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCt {
    pub ct: f64,
    /// Whether the effective time reaches the class minimum.
    pub feasible: bool,
}

/// `CT = ECT + β(class)`.
pub fn effective_ct(ect: f64, class: WorkerClass, cfg: &RuleConfig) -> Result<EffectiveCt> {
    if !(ect.is_finite() && ect >= 0.0) {
        return Err(Error::NonPositive { name: "effective contribution time", value: ect });
    }
    Ok(EffectiveCt {
        ct: ect + cfg.bonus(class),
        feasible: ect + POINTS_EPS >= cfg.min_ect(class),
    })
}

/// Benefit clamped to `[floor, ceiling]`.
pub fn benefit(mean_salary: f64, factor: f64, ceiling: f64, floor: f64) -> Result<f64> {
    positive("mean salary", mean_salary)?;
    positive("ceiling", ceiling)?;
    positive("floor", floor)?;
    if !factor.is_finite() || factor < 0.0 {
        return Err(Error::NonPositive { name: "factor", value: factor });
    }
    if floor > ceiling {
        return Err(Error::FloorAboveCeiling { floor, ceiling });
    }
    Ok((factor * mean_salary).min(ceiling).max(floor))
}

/// Factor phased in over 60 months after the rule's enactment.
pub fn transition_factor(ssf_value: f64, months: i64) -> Result<f64> {
    if !(0..=60).contains(&months) {
        return Err(Error::TransitionMonths(months));
    }
    let n = months as f64;
    Ok(ssf_value * n / 60.0 + (60.0 - n) / 60.0)
}

/// Whether `(x, ect)` meets the points rule in `year`.
pub fn meets_points(x: f64, ect: f64, class: WorkerClass, year: i32, cfg: &RuleConfig) -> Result<bool> {
    let threshold = cfg.points_threshold(class, year)?;
    let bonus = if class.is_teacher() { cfg.teacher_point_bonus } else { 0.0 };
    Ok(x + ect + bonus + POINTS_EPS >= threshold && ect + POINTS_EPS >= cfg.min_ect(class))
}

/// Factor for a worker of `class` retiring at `x` with effective time `ect`.
///
/// Under [`RuleMode::Combined`], in a year with a points threshold, a worker
/// meeting the points rule gets `max(1, f)`.
pub fn combined_factor(
    x: f64,
    ect: f64,
    class: WorkerClass,
    scenario: &Scenario<'_>,
    mode: RuleMode,
) -> Result<f64> {
    let e = scenario.rounded_e(x)?;
    factor_given_e(x, ect, class, e, scenario.ssf_year, scenario.config, mode)
}

/// [`combined_factor`] with the life expectancy already looked up.
pub(crate) fn factor_given_e(
    x: f64,
    ect: f64,
    class: WorkerClass,
    e: f64,
    year: i32,
    cfg: &RuleConfig,
    mode: RuleMode,
) -> Result<f64> {
    let eff = effective_ct(ect, class, cfg)?;
    if !eff.feasible {
        return Err(Error::Ineligible { class, ect, min: cfg.min_ect(class) });
    }
    let f = ssf(x, eff.ct, e, cfg.contribution_rate)?;
    let points_apply = mode == RuleMode::Combined && cfg.points.contains_key(&year);
    if points_apply && meets_points(x, ect, class, year, cfg)? {
        Ok(f.max(1.0))
    } else {
        Ok(f)
    }
}
