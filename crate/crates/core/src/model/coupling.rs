use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::series::{hurwitz_zeta, periodic_power_sum, power_sum, tail_bound, Bounded};

/// `|J(r)| <= amplitude * r^-exponent` beyond the end of a coupling table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEnvelope {
    pub amplitude: f64,
    pub exponent: f64,
}

/// How `J(r)` depends on the distance `r`.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingLaw {
    /// `J(r) = beta * r^-alpha`.
    Power { beta: f64, alpha: f64 },
    /// `J(r) = beta * values[r-1]`; unknown past the table except for the envelope.
    Table { beta: f64, values: Arc<Vec<f64>>, envelope: Option<PowerEnvelope> },
}

/// Pair coupling as a function of distance, cut off at `range`.
///
/// The model coupling is `J(r)` for `r <= range` (and inside the table) and
/// zero beyond. Every sum reports how far it may be from the same sum with the
/// uncut coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    law: CouplingLaw,
    range: Option<u64>,
}

impl Coupling {
    pub fn power(beta: f64, alpha: f64, range: Option<u64>) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(invalid(format!("alpha must exceed 1, got {alpha}")));
        }
        check_beta(beta)?;
        check_range(range)?;
        Ok(Coupling { law: CouplingLaw::Power { beta, alpha }, range })
    }

    pub fn table(beta: f64, values: Vec<f64>, envelope: Option<PowerEnvelope>, range: Option<u64>) -> Result<Self> {
        check_beta(beta)?;
        check_range(range)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("coupling table has non-finite entries"));
        }
        if let Some(e) = envelope {
            if !(e.exponent > 1.0) || !(e.amplitude >= 0.0) {
                return Err(invalid("envelope needs amplitude >= 0 and exponent > 1"));
            }
        }
        Ok(Coupling { law: CouplingLaw::Table { beta, values: Arc::new(values), envelope }, range })
    }

    pub fn law(&self) -> &CouplingLaw {
        &self.law
    }

    pub fn range(&self) -> Option<u64> {
        self.range
    }

    pub fn beta(&self) -> f64 {
        match &self.law {
            CouplingLaw::Power { beta, .. } | CouplingLaw::Table { beta, .. } => *beta,
        }
    }

    /// The same law without the distance cutoff.
    pub fn untruncated(&self) -> Coupling {
        Coupling { law: self.law.clone(), range: None }
    }

    pub fn with_range(&self, range: Option<u64>) -> Result<Coupling> {
        check_range(range)?;
        Ok(Coupling { law: self.law.clone(), range })
    }

    /// Largest distance with a possibly nonzero model coupling (`None` = unbounded).
    pub fn support_end(&self) -> Option<u64> {
        match &self.law {
            CouplingLaw::Power { .. } => self.range,
            CouplingLaw::Table { values, .. } => {
                let len = values.len() as u64;
                Some(self.range.map_or(len, |r| r.min(len)))
            }
        }
    }

    /// Model coupling at distance `r >= 1`.
    pub fn value(&self, r: u64) -> f64 {
        if r == 0 || self.range.is_some_and(|end| r > end) {
            return 0.0;
        }
        match &self.law {
            CouplingLaw::Power { beta, alpha } => {
                if *beta == 0.0 {
                    0.0
                } else {
                    beta * (r as f64).powf(-alpha)
                }
            }
            CouplingLaw::Table { beta, values, .. } => values.get((r - 1) as usize).map_or(0.0, |v| beta * v),
        }
    }

    /// Bound on `sum |J(r)|` over distances in `[from, to]` that the model drops.
    pub fn omitted(&self, from: u64, to: Option<u64>) -> Result<f64> {
        let from = from.max(1);
        match &self.law {
            CouplingLaw::Power { beta, alpha } => {
                let Some(end) = self.range else { return Ok(0.0) };
                let start = from.max(end + 1);
                if *beta == 0.0 || to.is_some_and(|t| t < start) {
                    return Ok(0.0);
                }
                let s = match to {
                    None => tail_bound(*alpha, start - 1),
                    Some(t) => power_sum(*alpha, start, Some(t))?.upper(),
                };
                Ok(beta * s)
            }
            CouplingLaw::Table { beta, values, envelope } => {
                if *beta == 0.0 {
                    return Ok(0.0);
                }
                let len = values.len() as u64;
                let end = self.support_end().unwrap_or(len);
                let start = from.max(end + 1);
                if to.is_some_and(|t| t < start) {
                    return Ok(0.0);
                }
                let table_hi = to.map_or(len, |t| t.min(len));
                let mut total = 0.0;
                for r in start..=table_hi {
                    total += values[(r - 1) as usize].abs();
                }
                if to.is_none_or(|t| t > len) {
                    let env = envelope.ok_or(Error::UncertifiedTail)?;
                    let lo = start.max(len + 1);
                    let s = match to {
                        None => tail_bound(env.exponent, lo - 1),
                        Some(t) => power_sum(env.exponent, lo, Some(t))?.upper(),
                    };
                    total += env.amplitude * s;
                }
                Ok(beta * total)
            }
        }
    }

    /// `sum_t J(r0 + t) c_t` where `c` runs through `head` and then repeats
    /// `tail` forever (or stops after `head` if `tail` is `None`).
    ///
    /// The error bound covers the distances dropped by the cutoff.
    pub fn weighted_sum(&self, r0: u64, head: &[f64], tail: Option<&[f64]>) -> Result<Bounded> {
        if r0 == 0 {
            return Err(invalid("coupling distances start at 1"));
        }
        let mut sum = Bounded::ZERO;
        let mut cmax = head.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for (t, &c) in head.iter().enumerate() {
            if c != 0.0 {
                sum.value += self.value(r0 + t as u64) * c;
            }
        }
        sum.error += 4.0 * f64::EPSILON * sum.value.abs() * (head.len() as f64).max(1.0).log2();
        let r1 = r0 + head.len() as u64;
        let last = match tail {
            Some(pattern) => {
                cmax = pattern.iter().fold(cmax, |m, c| m.max(c.abs()));
                sum = sum + self.periodic(r1, pattern)?;
                None
            }
            None => {
                if head.is_empty() {
                    return Ok(Bounded::ZERO);
                }
                Some(r1 - 1)
            }
        };
        if cmax > 0.0 {
            sum.error += cmax * self.omitted(r0, last)?;
        }
        Ok(sum)
    }

    /// `sum_{r >= r1} J(r) pattern[(r - r1) mod p]` over the model support.
    fn periodic(&self, r1: u64, pattern: &[f64]) -> Result<Bounded> {
        let end = self.support_end();
        if end.is_some_and(|e| e < r1) {
            return Ok(Bounded::ZERO);
        }
        match &self.law {
            CouplingLaw::Power { beta, alpha } => {
                if *beta == 0.0 {
                    return Ok(Bounded::ZERO);
                }
                Ok(periodic_power_sum(*alpha, r1, end, pattern)? * *beta)
            }
            CouplingLaw::Table { .. } => {
                let end = end.unwrap();
                let p = pattern.len() as u64;
                let mut s = 0.0;
                for r in r1..=end {
                    s += self.value(r) * pattern[((r - r1) % p) as usize];
                }
                Ok(Bounded::new(s, 4.0 * f64::EPSILON * s.abs() * ((end - r1 + 1) as f64).log2().max(1.0)))
            }
        }
    }

    /// `sum_{r >= s} |J(r)|` for the uncut coupling.
    pub fn abs_tail(&self, s: u64) -> Result<Bounded> {
        let s = s.max(1);
        match &self.law {
            CouplingLaw::Power { beta, alpha } => {
                if *beta == 0.0 {
                    return Ok(Bounded::ZERO);
                }
                Ok(hurwitz_zeta(*alpha, s as f64)? * *beta)
            }
            CouplingLaw::Table { beta, values, envelope } => {
                if *beta == 0.0 {
                    return Ok(Bounded::ZERO);
                }
                let len = values.len() as u64;
                let mut total = 0.0;
                for r in s..=len {
                    total += values[(r - 1) as usize].abs();
                }
                let env = envelope.ok_or(Error::UncertifiedTail)?;
                let lo = s.max(len + 1);
                let rest = env.amplitude * tail_bound(env.exponent, lo - 1);
                Ok(Bounded::new(beta * total, beta * rest))
            }
        }
    }

    /// `sum_{r >= 1} r^k |J(r)|^2` for the uncut coupling (`k` in {0, 1}).
    pub fn weighted_square_total(&self, k: i32) -> Result<Bounded> {
        match &self.law {
            CouplingLaw::Power { beta, alpha } => {
                if *beta == 0.0 {
                    return Ok(Bounded::ZERO);
                }
                Ok(hurwitz_zeta(2.0 * alpha - k as f64, 1.0)? * (beta * beta))
            }
            CouplingLaw::Table { beta, values, envelope } => {
                if *beta == 0.0 {
                    return Ok(Bounded::ZERO);
                }
                let mut total = 0.0;
                for (i, v) in values.iter().enumerate() {
                    total += ((i + 1) as f64).powi(k) * v * v;
                }
                let env = envelope.ok_or(Error::UncertifiedTail)?;
                let s = 2.0 * env.exponent - k as f64;
                if s <= 1.0 {
                    return Err(Error::Divergent("weighted square sum of the envelope diverges".into()));
                }
                let rest = env.amplitude * env.amplitude * tail_bound(s, values.len() as u64);
                Ok(Bounded::new(beta * beta * total, beta * beta * rest))
            }
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid(format!("beta must be finite and >= 0, got {beta}")));
    }
    Ok(())
}

fn check_range(range: Option<u64>) -> Result<()> {
    if range == Some(0) {
        return Err(invalid("tail truncation must be at least 1"));
    }
    Ok(())
}
