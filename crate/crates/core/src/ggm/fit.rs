//! Maximum-likelihood fitting of the gamma-Gompertz-Makeham hazard.
//!
//! Every start runs a simplex search on log-scaled parameters and is then
//! polished by Fisher scoring on the same scale. The best polished start
//! wins; ties go to the lower start index, so the parallel and sequential
//! paths return identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{log_likelihood, score_and_information, GgmParams, MortalityData, SIGMA2_ZERO};
use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};

/// Offset keeping the log of `c` and `σ²` finite at zero.
const LOG_SHIFT: f64 = 1e-12;

/// Minimum number of age cells accepted by [`fit`].
pub const MIN_CELLS: usize = 8;

/// Log-scale start boxes for `(a, b, c, σ²)`.
const START_BOX: [(f64, f64); 4] = [(1e-8, 1e-2), (0.01, 0.3), (1e-7, 0.05), (1e-6, 1.0)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Youngest age used in the fit.
    pub min_age: u32,
    /// Number of multi-start points.
    pub restarts: usize,
    pub seed: u64,
    /// Relative tolerance on the simplex objective.
    pub tol: f64,
    pub parallel: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { min_age: 30, restarts: 32, seed: 1, tol: 1e-10, parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: GgmParams,
    pub loglik: f64,
    pub converged: bool,
    pub n_restarts_used: usize,
    pub age_range: (u32, u32),
}

#[derive(Debug, Clone)]
struct StartOutcome {
    eta: [f64; 4],
    loglik: f64,
    converged: bool,
}

fn to_eta(theta: [f64; 4]) -> [f64; 4] {
    [theta[0].ln(), theta[1].ln(), (theta[2] + LOG_SHIFT).ln(), (theta[3] + LOG_SHIFT).ln()]
}

fn from_eta(eta: &[f64]) -> [f64; 4] {
    [
        eta[0].exp(),
        eta[1].exp(),
        (eta[2].exp() - LOG_SHIFT).max(0.0),
        (eta[3].exp() - LOG_SHIFT).max(0.0),
    ]
}

fn params_from_eta(eta: &[f64]) -> Option<GgmParams> {
    let t = from_eta(eta);
    GgmParams::new(t[0], t[1], t[2], t[3]).ok()
}

fn loglik_at(eta: &[f64], data: &MortalityData) -> f64 {
    match params_from_eta(eta) {
        Some(p) => log_likelihood(&p, data).unwrap_or(f64::NEG_INFINITY),
        None => f64::NEG_INFINITY,
    }
}

/// Halton points in `[0,1)^4` with a seeded Cranley-Patterson rotation.
fn start_points(n: usize, seed: u64) -> Vec<[f64; 4]> {
    const BASES: [u64; 4] = [2, 3, 5, 7];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>());
    (1..=n as u64)
        .map(|i| {
            std::array::from_fn(|k| {
                let u = radical_inverse(i, BASES[k]) + shift[k];
                let u = u - u.floor();
                let (lo, hi) = START_BOX[k];
                (lo.ln() + u * (hi.ln() - lo.ln())).exp()
            })
        })
        .collect()
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Solves `m·x = v` by Gaussian elimination with partial pivoting.
fn solve(mut m: Vec<Vec<f64>>, mut v: Vec<f64>) -> Option<Vec<f64>> {
    let n = v.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 || !m[piv][col].is_finite() {
            return None;
        }
        m.swap(col, piv);
        v.swap(col, piv);
        let (head, tail) = m.split_at_mut(col + 1);
        let pivot = &head[col];
        for (i, r) in tail.iter_mut().enumerate() {
            let f = r[col] / pivot[col];
            for (dst, src) in r[col..].iter_mut().zip(&pivot[col..]) {
                *dst -= f * src;
            }
            v[col + 1 + i] -= f * v[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (v[row] - s) / m[row][row];
    }
    Some(x)
}

/// Fisher scoring on the log scale. `c` and `σ²` sitting on zero with a
/// score pointing outwards are held fixed.
fn polish(mut eta: [f64; 4], data: &MortalityData) -> ([f64; 4], f64, bool) {
    let floor = LOG_SHIFT.ln();
    let mut ll = loglik_at(&eta, data);
    if !ll.is_finite() {
        return (eta, ll, false);
    }
    for _ in 0..200 {
        let Some(p) = params_from_eta(&eta) else { break };
        let (score, info) = score_and_information(&p, data);
        let jac: [f64; 4] = std::array::from_fn(|i| eta[i].exp());
        let g: [f64; 4] = std::array::from_fn(|i| score[i] * jac[i]);
        let free: Vec<usize> =
            (0..4).filter(|&i| !(i >= 2 && eta[i] <= floor + 1e-9 && g[i] <= 0.0)).collect();
        let m: Vec<Vec<f64>> = free
            .iter()
            .map(|&i| free.iter().map(|&j| info[i][j] * jac[i] * jac[j]).collect())
            .collect();
        let rhs: Vec<f64> = free.iter().map(|&i| g[i]).collect();
        let Some(step) = solve(m, rhs) else { break };

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut trial = eta;
            for (k, &i) in free.iter().enumerate() {
                trial[i] += t * step[k];
                if i >= 2 {
                    trial[i] = trial[i].max(floor);
                }
            }
            let ll_trial = loglik_at(&trial, data);
            // Near the optimum the change in ℓ is below its rounding noise.
            if ll_trial.is_finite() && ll_trial >= ll - 1e-13 * ll.abs() {
                accepted = Some((trial, ll_trial));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, ll_trial)) = accepted else { break };
        let moved = (0..4).map(|i| (trial[i] - eta[i]).abs()).fold(0.0, f64::max);
        eta = trial;
        ll = ll_trial;
        if moved < 1e-11 {
            return (eta, ll, true);
        }
    }
    (eta, ll, false)
}

fn run_start(theta0: [f64; 4], data: &MortalityData, tol: f64) -> StartOutcome {
    let eta0 = to_eta(theta0);
    let nm = nelder_mead(
        |eta| -loglik_at(eta, data),
        &eta0,
        NelderMeadOptions { initial_step: 0.5, f_tol: tol, x_tol: 1e-6, max_iter: 4000 },
    );
    let mut eta = [0.0; 4];
    eta.copy_from_slice(&nm.x);
    let (eta, loglik, polished) = polish(eta, data);
    StartOutcome { eta, loglik, converged: polished }
}

/// Fits the hazard to `data` by Poisson maximum likelihood.
pub fn fit(data: &MortalityData, options: &FitOptions) -> Result<FitResult> {
    let data = data.from_age(options.min_age).map_err(|e| match e {
        Error::EmptyData => Error::TooFewCells { got: 0, need: MIN_CELLS },
        other => other,
    })?;
    if data.len() < MIN_CELLS {
        return Err(Error::TooFewCells { got: data.len(), need: MIN_CELLS });
    }
    if data.deaths().iter().all(|&d| d == 0.0) {
        return Err(Error::NoDeaths);
    }
    if options.restarts == 0 {
        return Err(Error::Usage("at least one restart is required".into()));
    }

    let starts = start_points(options.restarts, options.seed);
    let outcomes: Vec<StartOutcome> = if options.parallel {
        starts.par_iter().map(|s| run_start(*s, &data, options.tol)).collect()
    } else {
        starts.iter().map(|s| run_start(*s, &data, options.tol)).collect()
    };

    let best = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.loglik.is_finite())
        .fold(None::<(usize, &StartOutcome)>, |acc, (i, o)| match acc {
            Some((_, b)) if b.loglik >= o.loglik => acc,
            _ => Some((i, o)),
        })
        .map(|(_, o)| o)
        .ok_or_else(|| Error::InvalidData("no start produced a finite likelihood".into()))?;

    let mut theta = from_eta(&best.eta);
    if theta[3] < SIGMA2_ZERO {
        theta[3] = 0.0;
    }
    let params = GgmParams::new(theta[0], theta[1], theta[2], theta[3])?;
    let loglik = log_likelihood(&params, &data)?;
    let ages = data.ages();
    Ok(FitResult {
        params,
        loglik,
        converged: best.converged,
        n_restarts_used: outcomes.len(),
        age_range: (ages[0], ages[ages.len() - 1]),
    })
}
