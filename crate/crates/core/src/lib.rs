//! Period life tables, gamma-Gompertz-Makeham mortality fits and the
//! Brazilian Social Security Factor.
//!
//! The pieces fit together as follows: a [`LifeTable`] is rebuilt from
//! survivors, a [`GgmParams`] model is fitted to deaths and exposures with
//! [`ggm::fit`], and either one becomes a [`MortalitySource`] whose life
//! expectancies feed the factor rules in [`rules`] and the retirement
//! metrics in [`metrics`].

pub mod cli;
pub mod error;
pub mod ggm;
pub mod io;
pub mod lifetable;
pub mod metrics;
pub mod optim;
pub mod quadrature;
pub mod rounding;
pub mod rules;
pub mod source;

pub use error::{Error, Result};
pub use ggm::{FitOptions, FitResult, GgmParams, MortalityData};
pub use lifetable::LifeTable;
pub use metrics::{Grid, GridLayout, NraRule};
pub use rules::{RuleConfig, RuleMode, Scenario, WorkerClass};
pub use source::{ExpectancyMode, ExpectancySchedule, MortalitySource, SourceCatalog};
