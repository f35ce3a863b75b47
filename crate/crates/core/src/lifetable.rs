//! Complete period life tables.
//!
//! A table is rebuilt from its survivorship column alone: deaths and
//! person-years are derived from `lx` under a uniform distribution of deaths
//! within each single-year interval, and the open-ended interval is closed
//! with a constant hazard, so that `e` at the open age is `1 / m`.
//! Published `dx` or `Lx` columns are never trusted.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LifeTable {
    start_age: u32,
    open_age: u32,
    lx: Vec<f64>,
    dx: Vec<f64>,
    big_lx: Vec<f64>,
    mx: Vec<f64>,
    tx: Vec<f64>,
    ex: Vec<f64>,
    label: String,
}

/// Closes the open-ended interval under a constant hazard `m_inf`.
///
/// Returns `(e_open, L_open)`.
pub fn close_open_interval(l_open: f64, m_inf: f64) -> Result<(f64, f64)> {
    if !(m_inf.is_finite() && m_inf > 0.0) {
        return Err(Error::InvalidTerminalRate(m_inf));
    }
    if !(l_open.is_finite() && l_open > 0.0) {
        return Err(Error::NonPositive { name: "survivors at the open age", value: l_open });
    }
    let e_open = 1.0 / m_inf;
    Ok((e_open, e_open * l_open))
}

/// Terminal hazard implied by a published terminal life expectancy.
pub fn terminal_rate_from_expectancy(e_open: f64) -> Result<f64> {
    if !(e_open.is_finite() && e_open > 0.0) {
        return Err(Error::NonPositive { name: "terminal life expectancy", value: e_open });
    }
    Ok(1.0 / e_open)
}

impl LifeTable {
    /// Rebuilds every column from `lx`, whose last entry is the open age.
    ///
    /// `lx[i]` is the number of survivors at exact age
    /// `open_age - (lx.len() - 1) + i`.
    pub fn rebuild_from_lx(lx: &[f64], open_age: u32, terminal_m: f64) -> Result<Self> {
        if lx.is_empty() {
            return Err(Error::EmptyTable);
        }
        let n = lx.len();
        if (open_age as usize) + 1 < n {
            return Err(Error::InvalidOpenAge { open_age, len: n });
        }
        let start_age = open_age - (n as u32 - 1);

        for (i, &l) in lx.iter().enumerate() {
            if !l.is_finite() || l < 0.0 {
                return Err(Error::InvalidLx { age: start_age + i as u32, value: l });
            }
        }
        if lx[0] <= 0.0 {
            return Err(Error::NonPositiveRadix { age: start_age, value: lx[0] });
        }
        for (i, w) in lx.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(Error::NonMonotoneLx {
                    age: start_age + i as u32 + 1,
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        let l_open = lx[n - 1];
        if l_open <= 0.0 {
            return Err(Error::CannotClose { age: open_age });
        }
        let (e_open, big_l_open) = close_open_interval(l_open, terminal_m)?;

        let mut dx = Vec::with_capacity(n);
        let mut big_lx = Vec::with_capacity(n);
        let mut mx = Vec::with_capacity(n);
        for w in lx.windows(2) {
            let d = w[0] - w[1];
            // UDD: deaths spread evenly over the year.
            let big_l = w[1] + 0.5 * d;
            dx.push(d);
            big_lx.push(big_l);
            mx.push(d / big_l);
        }
        dx.push(l_open);
        big_lx.push(big_l_open);
        mx.push(terminal_m);

        let mut tx = vec![0.0; n];
        let mut acc = 0.0;
        for i in (0..n).rev() {
            acc += big_lx[i];
            tx[i] = acc;
        }
        let mut ex: Vec<f64> = tx.iter().zip(lx).map(|(t, l)| t / l).collect();
        // Exact closing identity rather than T/l round-off.
        ex[n - 1] = e_open;

        Ok(Self {
            start_age,
            open_age,
            lx: lx.to_vec(),
            dx,
            big_lx,
            mx,
            tx,
            ex,
            label: String::new(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn start_age(&self) -> u32 {
        self.start_age
    }

    /// First age of the open-ended interval.
    pub fn open_age(&self) -> u32 {
        self.open_age
    }

    pub fn len(&self) -> usize {
        self.lx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lx.is_empty()
    }

    pub fn ages(&self) -> impl Iterator<Item = u32> + '_ {
        self.start_age..=self.open_age
    }

    pub fn lx(&self) -> &[f64] {
        &self.lx
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    /// Person-years lived in each interval (`Lx`).
    pub fn person_years(&self) -> &[f64] {
        &self.big_lx
    }

    pub fn mx(&self) -> &[f64] {
        &self.mx
    }

    /// Person-years lived above each age (`Tx`).
    pub fn tx(&self) -> &[f64] {
        &self.tx
    }

    pub fn ex(&self) -> &[f64] {
        &self.ex
    }

    pub fn terminal_rate(&self) -> f64 {
        self.mx[self.mx.len() - 1]
    }

    fn index(&self, age: u32) -> Result<usize> {
        if age < self.start_age || age > self.open_age {
            return Err(Error::AgeOutOfRange {
                age: age as f64,
                start: self.start_age,
                open: self.open_age,
            });
        }
        Ok((age - self.start_age) as usize)
    }

    /// One-year survival probability `p_x`; zero at the open age.
    pub fn px(&self, age: u32) -> Result<f64> {
        let i = self.index(age)?;
        Ok(if age == self.open_age { 0.0 } else { self.lx[i + 1] / self.lx[i] })
    }

    pub fn qx(&self, age: u32) -> Result<f64> {
        Ok(1.0 - self.px(age)?)
    }

    /// Remaining life expectancy at exact integer age, unrounded.
    pub fn life_expectancy(&self, age: u32) -> Result<f64> {
        Ok(self.ex[self.index(age)?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(1.0)
    }

    #[test]
    fn two_age_table() {
        let t = LifeTable::rebuild_from_lx(&[100.0, 50.0], 1, 0.5).unwrap();
        assert_eq!(t.start_age(), 0);
        assert!(close(t.life_expectancy(1).unwrap(), 2.0));
        assert!(close(t.person_years()[1], 100.0));
        assert!(close(t.life_expectancy(0).unwrap(), 1.75));
    }

    #[test]
    fn three_age_table_by_hand() {
        // d = [40, 30, 30], L = [80, 45, 75], T0 = 200
        let t = LifeTable::rebuild_from_lx(&[100.0, 60.0, 30.0], 2, 0.4).unwrap();
        assert_eq!(t.dx(), &[40.0, 30.0, 30.0]);
        assert_eq!(t.person_years(), &[80.0, 45.0, 75.0]);
        assert!(close(t.tx()[0], 200.0));
        assert!(close(t.life_expectancy(0).unwrap(), 2.0));
        assert!(close(t.life_expectancy(1).unwrap(), 2.0));
        assert!(close(t.life_expectancy(2).unwrap(), 2.5));
        assert!(close(t.qx(0).unwrap(), 0.4));
        assert_eq!(t.px(2).unwrap(), 0.0);
    }

    #[test]
    fn closing_examples() {
        assert_eq!(close_open_interval(50.0, 0.5).unwrap(), (2.0, 100.0));
        assert_eq!(close_open_interval(1.0, 1.0).unwrap(), (1.0, 1.0));
        let (e, l) = close_open_interval(41_849.0, 0.108_695_65).unwrap();
        assert!((e - 9.2).abs() < 1e-6);
        assert!((l - 385_011.0).abs() < 1.0);
        assert!(close_open_interval(50.0, 0.0).is_err());
        assert!(close_open_interval(50.0, -1.0).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        match LifeTable::rebuild_from_lx(&[100.0, 60.0, 70.0], 2, 0.4) {
            Err(Error::NonMonotoneLx { age, .. }) => assert_eq!(age, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            LifeTable::rebuild_from_lx(&[100.0, 0.0], 1, 0.4),
            Err(Error::CannotClose { age: 1 })
        ));
        assert!(matches!(
            LifeTable::rebuild_from_lx(&[0.0, 0.0], 1, 0.4),
            Err(Error::NonPositiveRadix { .. })
        ));
        assert!(LifeTable::rebuild_from_lx(&[100.0, 50.0], 1, 0.0).is_err());
        assert!(LifeTable::rebuild_from_lx(&[], 1, 0.5).is_err());
        assert!(LifeTable::rebuild_from_lx(&[3.0, 2.0, 1.0], 1, 0.5).is_err());
    }

    #[test]
    fn out_of_range_age() {
        let t = LifeTable::rebuild_from_lx(&[100.0, 60.0, 30.0], 12, 0.4).unwrap();
        assert_eq!(t.start_age(), 10);
        assert!(t.life_expectancy(9).is_err());
        assert!(t.life_expectancy(13).is_err());
        assert!(close(t.life_expectancy(12).unwrap(), 2.5));
    }

    #[test]
    fn lx_round_trips() {
        let lx = [100_000.0, 99_123.5, 98_000.25, 50_000.0];
        let t = LifeTable::rebuild_from_lx(&lx, 83, 0.2).unwrap();
        assert_eq!(t.lx(), &lx);
    }
}
