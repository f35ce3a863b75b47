//! Gamma-Gompertz-Makeham mortality.
//!
//! The hazard is `a·e^{bx} / (1 + σ²·(a/b)·(e^{bx} − 1)) + c`. With gamma
//! frailty of variance σ² the population hazard flattens towards the plateau
//! `b/σ² + c`; at σ² = 0 it is the plain Gompertz-Makeham law.
//!
//! Death counts are modelled as Poisson with mean `μ(x + ½)·E_x` for the
//! single-year bin `[x, x+1)`.

mod fit;

pub use fit::{fit, FitOptions, FitResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifetable::LifeTable;
use crate::quadrature::{integrate, QuadOptions};

/// Variance below which frailty is reported as absent.
pub const SIGMA2_ZERO: f64 = 1e-10;

/// Longest integration horizon for remaining life expectancy, in years.
pub const MAX_HORIZON: f64 = 1000.0;

/// Survival ratio at which the integration horizon is cut.
pub const SURVIVAL_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct GgmParams {
    a: f64,
    b: f64,
    c: f64,
    sigma2: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    a: f64,
    b: f64,
    c: f64,
    sigma2: f64,
}

impl TryFrom<RawParams> for GgmParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        GgmParams::new(r.a, r.b, r.c, r.sigma2)
    }
}

impl From<GgmParams> for RawParams {
    fn from(p: GgmParams) -> Self {
        RawParams { a: p.a, b: p.b, c: p.c, sigma2: p.sigma2 }
    }
}

impl GgmParams {
    pub fn new(a: f64, b: f64, c: f64, sigma2: f64) -> Result<Self> {
        if ![a, b, c, sigma2].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite value in (a={a}, b={b}, c={c}, sigma2={sigma2})"
            )));
        }
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::InvalidParams(format!("a and b must be positive, got a={a}, b={b}")));
        }
        if c < 0.0 || sigma2 < 0.0 {
            return Err(Error::InvalidParams(format!(
                "c and sigma2 must be non-negative, got c={c}, sigma2={sigma2}"
            )));
        }
        Ok(Self { a, b, c, sigma2 })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.sigma2]
    }

    /// Limit of the hazard as age grows; infinite without frailty.
    pub fn plateau(&self) -> f64 {
        if self.sigma2 > 0.0 {
            self.b / self.sigma2 + self.c
        } else {
            f64::INFINITY
        }
    }
}

/// Force of mortality at age `x`.
pub fn hazard(p: &GgmParams, x: f64) -> f64 {
    let ebx = (p.b * x).exp();
    if ebx.is_infinite() {
        return p.plateau();
    }
    let den = 1.0 + p.sigma2 * (p.a / p.b) * (p.b * x).exp_m1();
    p.a * ebx / den + p.c
}

/// `ln S(x)`, the negative cumulative hazard from age 0.
pub fn log_survival(p: &GgmParams, x: f64) -> f64 {
    let gompertz = (p.a / p.b) * (p.b * x).exp_m1();
    let frailty = if p.sigma2 > 0.0 {
        (p.sigma2 * gompertz).ln_1p() / p.sigma2
    } else {
        gompertz
    };
    -p.c * x - frailty
}

/// Probability of surviving from birth to age `x`.
pub fn survival(p: &GgmParams, x: f64) -> f64 {
    log_survival(p, x).exp()
}

/// Remaining life expectancy at a possibly fractional age.
///
/// Integrates `S(x+t)/S(x)` up to the first `t` where the ratio drops below
/// [`SURVIVAL_CUTOFF`] (at most [`MAX_HORIZON`] years) and adds the
/// constant-hazard tail `S(x+T)/S(x) / μ(x+T)` beyond it.
pub fn remaining_life_expectancy(p: &GgmParams, x: f64) -> Result<f64> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::NonPositive { name: "age", value: x });
    }
    let log_s0 = log_survival(p, x);
    if !log_s0.is_finite() {
        return Err(Error::DivergentIntegral {
            age: x,
            reason: "survival to the starting age is zero".into(),
        });
    }
    let log_ratio = |t: f64| log_survival(p, x + t) - log_s0;
    let cutoff = SURVIVAL_CUTOFF.ln();

    let horizon = if log_ratio(MAX_HORIZON) >= cutoff {
        MAX_HORIZON
    } else {
        let (mut lo, mut hi) = (0.0, MAX_HORIZON);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if log_ratio(mid) >= cutoff {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };

    let body = integrate(|t| log_ratio(t).exp(), 0.0, horizon, QuadOptions::default())?;
    let tail_hazard = hazard(p, x + horizon);
    let tail = log_ratio(horizon).exp() / tail_hazard;
    if !tail.is_finite() || tail > body.value {
        return Err(Error::DivergentIntegral {
            age: x,
            reason: format!(
                "more than half of the remaining lifetime lies beyond {MAX_HORIZON} years \
                 (hazard at the horizon {tail_hazard:e})"
            ),
        });
    }
    Ok(body.value + tail)
}

/// Death counts and exposures per single-year age, sorted by age.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalityData {
    ages: Vec<u32>,
    deaths: Vec<f64>,
    exposures: Vec<f64>,
}

impl MortalityData {
    /// Builds a data set; cells may arrive in any order and are sorted by age.
    pub fn new(ages: Vec<u32>, deaths: Vec<f64>, exposures: Vec<f64>) -> Result<Self> {
        if ages.len() != deaths.len() || ages.len() != exposures.len() {
            return Err(Error::InvalidData(format!(
                "length mismatch: {} ages, {} deaths, {} exposures",
                ages.len(),
                deaths.len(),
                exposures.len()
            )));
        }
        if ages.is_empty() {
            return Err(Error::EmptyData);
        }
        let mut cells: Vec<(u32, f64, f64)> =
            ages.into_iter().zip(deaths).zip(exposures).map(|((x, d), e)| (x, d, e)).collect();
        cells.sort_by_key(|c| c.0);
        for w in cells.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidData(format!("duplicate age {}", w[0].0)));
            }
        }
        for &(x, d, e) in &cells {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidData(format!("deaths at age {x} must be >= 0, got {d}")));
            }
            if !(e.is_finite() && e >= 0.0) {
                return Err(Error::InvalidData(format!("exposure at age {x} must be >= 0, got {e}")));
            }
            if d > 0.0 && e == 0.0 {
                return Err(Error::InvalidData(format!("deaths without exposure at age {x}")));
            }
        }
        Ok(Self {
            ages: cells.iter().map(|c| c.0).collect(),
            deaths: cells.iter().map(|c| c.1).collect(),
            exposures: cells.iter().map(|c| c.2).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.ages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ages.is_empty()
    }

    pub fn ages(&self) -> &[u32] {
        &self.ages
    }

    pub fn deaths(&self) -> &[f64] {
        &self.deaths
    }

    pub fn exposures(&self) -> &[f64] {
        &self.exposures
    }

    /// Cells at or above `min_age`.
    pub fn from_age(&self, min_age: u32) -> Result<Self> {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.ages[i] >= min_age).collect();
        Self::new(
            keep.iter().map(|&i| self.ages[i]).collect(),
            keep.iter().map(|&i| self.deaths[i]).collect(),
            keep.iter().map(|&i| self.exposures[i]).collect(),
        )
    }
}

/// Fitting data from a rebuilt table: `D = dx`, `E = Lx` for ages
/// `min_age..open_age`. The open interval is left out.
pub fn mortality_data_from_lifetable(t: &LifeTable, min_age: u32) -> Result<MortalityData> {
    if min_age >= t.open_age() {
        return Err(Error::InvalidData(format!(
            "min age {min_age} must be below the open age {}",
            t.open_age()
        )));
    }
    let first = min_age.max(t.start_age());
    let lo = (first - t.start_age()) as usize;
    let hi = (t.open_age() - t.start_age()) as usize;
    MortalityData::new(
        (first..t.open_age()).collect(),
        t.dx()[lo..hi].to_vec(),
        t.person_years()[lo..hi].to_vec(),
    )
}

/// One Poisson cell, `D·ln(m) − m` with `m = μ·E`, the `ln D!` constant dropped.
pub fn poisson_term(deaths: f64, expected: f64) -> f64 {
    if deaths == 0.0 {
        -expected
    } else if expected <= 0.0 {
        f64::NEG_INFINITY
    } else {
        deaths * expected.ln() - expected
    }
}

/// Poisson log-likelihood with the hazard taken at mid-bin.
pub fn log_likelihood(p: &GgmParams, data: &MortalityData) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    Ok(cells(data).map(|(x, d, e)| poisson_term(d, hazard(p, x + 0.5) * e)).sum())
}

fn cells(data: &MortalityData) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
    data.ages
        .iter()
        .zip(&data.deaths)
        .zip(&data.exposures)
        .map(|((&x, &d), &e)| (x as f64, d, e))
}

/// Partial derivatives of the hazard with respect to `(a, b, c, σ²)`.
pub fn hazard_gradient(p: &GgmParams, x: f64) -> [f64; 4] {
    let GgmParams { a, b, sigma2, .. } = *p;
    let ebx = (b * x).exp();
    let k = (b * x).exp_m1();
    let den = 1.0 + sigma2 * (a / b) * k;
    let num = a * ebx;
    let den2 = den * den;
    let d_den_a = sigma2 * k / b;
    let d_den_b = sigma2 * a * (x * ebx / b - k / (b * b));
    [
        ebx / den - num * d_den_a / den2,
        a * x * ebx / den - num * d_den_b / den2,
        1.0,
        -num * (a / b) * k / den2,
    ]
}

/// Score vector and expected (Fisher) information of the log-likelihood in
/// the natural parameters.
pub fn score_and_information(p: &GgmParams, data: &MortalityData) -> ([f64; 4], [[f64; 4]; 4]) {
    let mut score = [0.0; 4];
    let mut info = [[0.0; 4]; 4];
    for (x, d, e) in cells(data) {
        let mid = x + 0.5;
        let mu = hazard(p, mid);
        let grad = hazard_gradient(p, mid);
        let resid = d / mu - e;
        let w = e / mu;
        for i in 0..4 {
            score[i] += resid * grad[i];
            for j in 0..4 {
                info[i][j] += w * grad[i] * grad[j];
            }
        }
    }
    (score, info)
}
