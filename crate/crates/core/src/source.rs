//! Where life expectancies come from.
//!
//! A factor computation needs `e` at the retirement age. It can be read off
//! a rebuilt life table, a published schedule of (age, e) pairs, or computed
//! from fitted hazard parameters. Tables and schedules only know integer
//! ages, so the age is floored first; a fitted model may also be evaluated
//! at the exact age. Either way the value is rounded to one decimal, the
//! precision at which expectancies are published.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ggm::{self, GgmParams};
use crate::lifetable::LifeTable;
use crate::rounding::round_half_up;

/// The factor for calendar year `t` uses the table of year `t - 2`.
pub const TABLE_LAG: i32 = 2;

/// Life expectancy per integer age as published, without the table behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectancySchedule {
    ex: BTreeMap<u32, f64>,
    label: String,
}

impl ExpectancySchedule {
    pub fn new(pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut ex = BTreeMap::new();
        for (age, e) in pairs {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::NonPositive { name: "life expectancy", value: e });
            }
            if ex.insert(age, e).is_some() {
                return Err(Error::InvalidData(format!("duplicate age {age} in schedule")));
            }
        }
        if ex.is_empty() {
            return Err(Error::EmptyTable);
        }
        Ok(Self { ex, label: String::new() })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn get(&self, age: u32) -> Option<f64> {
        self.ex.get(&age).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.ex.iter().map(|(&a, &e)| (a, e))
    }

    fn lookup(&self, age: u32) -> Result<f64> {
        self.get(age).ok_or_else(|| Error::AgeOutOfRange {
            age: age as f64,
            start: *self.ex.keys().next().expect("non-empty"),
            open: *self.ex.keys().next_back().expect("non-empty"),
        })
    }
}

/// How a fractional retirement age is mapped to a life expectancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpectancyMode {
    /// Floor the age, then look up (the official convention).
    #[default]
    Floor,
    /// Evaluate at the exact age. Only fitted models support it; tables and
    /// schedules fall back to [`ExpectancyMode::Floor`].
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MortalitySource {
    Table(LifeTable),
    Schedule(ExpectancySchedule),
    Model(GgmParams),
}

impl MortalitySource {
    pub fn label(&self) -> String {
        match self {
            MortalitySource::Table(t) => t.label().to_string(),
            MortalitySource::Schedule(s) => s.label().to_string(),
            MortalitySource::Model(p) => {
                format!("ggm(a={:e}, b={}, c={:e}, sigma2={})", p.a(), p.b(), p.c(), p.sigma2())
            }
        }
    }

    /// Unrounded life expectancy at `x` under `mode`.
    pub fn expectancy(&self, x: f64, mode: ExpectancyMode) -> Result<f64> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::NonPositive { name: "age", value: x });
        }
        let floor = x.floor() as u32;
        match (self, mode) {
            (MortalitySource::Table(t), _) => t.life_expectancy(floor),
            (MortalitySource::Schedule(s), _) => s.lookup(floor),
            (MortalitySource::Model(p), ExpectancyMode::Floor) => {
                ggm::remaining_life_expectancy(p, floor as f64)
            }
            (MortalitySource::Model(p), ExpectancyMode::Exact) => ggm::remaining_life_expectancy(p, x),
        }
    }
}

/// Life expectancy as it enters the factor formula: looked up per `mode`,
/// then rounded half-up to one decimal.
pub fn rounded_e_for_ssf(source: &MortalitySource, x: f64, mode: ExpectancyMode) -> Result<f64> {
    Ok(round_half_up(source.expectancy(x, mode)?, 1))
}

/// Mortality sources indexed by the year of the table.
#[derive(Debug, Clone, Default)]
pub struct SourceCatalog {
    sources: BTreeMap<i32, MortalitySource>,
}

impl SourceCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, table_year: i32, source: MortalitySource) {
        self.sources.insert(table_year, source);
    }

    pub fn table_years(&self) -> Vec<i32> {
        self.sources.keys().copied().collect()
    }

    pub fn get(&self, table_year: i32) -> Option<&MortalitySource> {
        self.sources.get(&table_year)
    }

    pub fn table_year_for(ssf_year: i32) -> i32 {
        ssf_year - TABLE_LAG
    }

    /// Source used by the factor of `ssf_year`, honouring an explicit
    /// table-year override.
    pub fn resolve(&self, ssf_year: i32, table_year: Option<i32>) -> Result<&MortalitySource> {
        let table_year = table_year.unwrap_or_else(|| Self::table_year_for(ssf_year));
        self.get(table_year).ok_or_else(|| Error::MissingVintage {
            ssf_year,
            table_year,
            known: self.table_years(),
        })
    }
}
