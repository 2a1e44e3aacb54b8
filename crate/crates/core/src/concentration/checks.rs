use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::concentration::local::LocalFunction;
use crate::concentration::matrices::DobrushinMatrices;
use crate::config::{Boundary, Window};
use crate::error::{invalid, Error, Result};
use crate::gibbs::{window_gibbs, SampleSet, WindowMeasure};
use crate::model::PairInteraction;
use crate::stats::{batch_means, rhat, DEFAULT_BATCHES, SIGMA_MARGIN};

/// Largest tolerated R-hat for sampled measures.
pub const RHAT_LIMIT: f64 = 1.1;

/// The measure a check integrates against.
#[derive(Debug, Clone, Copy)]
pub enum Measure<'a> {
    Exact(&'a WindowMeasure),
    /// Independent chains on the same window.
    Sampled(&'a [SampleSet]),
}

/// Values of `F` under a measure: weighted atoms or equally weighted draws.
enum Law {
    Atoms(Vec<(f64, f64)>),
    Draws(Vec<f64>),
}

impl Law {
    fn of(measure: Measure<'_>, f: &LocalFunction) -> Result<Law> {
        match measure {
            Measure::Exact(m) => {
                let n = m.window.len();
                let atoms = m
                    .probs
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| Ok((p, f.eval_on(&m.window, &m.alphabet.word(k, n))?)))
                    .collect::<Result<_>>()?;
                Ok(Law::Atoms(atoms))
            }
            Measure::Sampled(sets) => {
                if sets.is_empty() {
                    return Err(invalid("no samples"));
                }
                if sets.len() >= 2 {
                    let per_chain: Vec<Vec<f64>> = sets
                        .iter()
                        .map(|s| s.iter().map(|row| f.eval_on(&s.window, row)).collect::<Result<_>>())
                        .collect::<Result<_>>()?;
                    let r = rhat(&per_chain)?;
                    if r > RHAT_LIMIT {
                        return Err(Error::SamplerNotConverged { rhat: r });
                    }
                    return Ok(Law::Draws(per_chain.concat()));
                }
                let s = &sets[0];
                Ok(Law::Draws(s.iter().map(|row| f.eval_on(&s.window, row)).collect::<Result<_>>()?))
            }
        }
    }

    fn mean(&self) -> f64 {
        match self {
            Law::Atoms(a) => a.iter().map(|(p, v)| p * v).sum(),
            Law::Draws(d) => d.iter().sum::<f64>() / d.len() as f64,
        }
    }

    /// `E[g(F)]` with its standard error (0 for exact laws).
    fn expect(&self, g: impl Fn(f64) -> f64) -> (f64, f64) {
        match self {
            Law::Atoms(a) => (a.iter().map(|(p, v)| p * g(*v)).sum(), 0.0),
            Law::Draws(d) => {
                let xs: Vec<f64> = d.iter().map(|v| g(*v)).collect();
                let e = batch_means(&xs, DEFAULT_BATCHES);
                (e.mean, if e.std_err.is_finite() { e.std_err } else { 0.0 })
            }
        }
    }
}

/// One inequality `lhs <= rhs`, with `margin = 3 sigma` for sampled measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub function: String,
    /// `t`, `m` or the lag, when the check has one.
    pub param: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl CheckReport {
    fn new(check: &str, f: &str, param: Option<f64>, lhs: f64, std_err: f64, rhs: f64) -> Self {
        let margin = SIGMA_MARGIN * std_err;
        CheckReport { check: check.into(), function: f.into(), param, lhs, rhs, margin, pass: lhs - margin <= rhs }
    }
}

pub fn write_reports_csv<W: Write>(reports: &[CheckReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "function", "param", "lhs", "rhs", "margin", "pass"])?;
    for r in reports {
        w.write_record([
            r.check.clone(),
            r.function.clone(),
            r.param.map_or(String::new(), |p| format!("{p:.16e}")),
            format!("{:.16e}", r.lhs),
            format!("{:.16e}", r.rhs),
            format!("{:.16e}", r.margin),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `D = 4 / (1 - bar_c)^2` for an interaction in the Dobrushin regime.
pub fn concentration_constant(inter: &PairInteraction) -> Result<f64> {
    let c = inter.require_uniqueness()?;
    Ok(4.0 / (1.0 - c).powi(2))
}

/// `E[e^{F - EF}] <= e^{D ||delta F||^2}`.
pub fn gcb_check(measure: Measure<'_>, f: &LocalFunction, d: f64) -> Result<CheckReport> {
    let law = Law::of(measure, f)?;
    let mean = law.mean();
    let (lhs, se) = law.expect(|v| (v - mean).exp());
    let rhs = (d * f.delta_norm()?).exp();
    Ok(CheckReport::new("gcb", f.name(), None, lhs, se, rhs))
}

/// `P(F - EF >= t) <= exp(-2 t^2 / (D ||delta F||^2))` for each `t`.
pub fn tail_check(measure: Measure<'_>, f: &LocalFunction, d: f64, t_grid: &[f64]) -> Result<Vec<CheckReport>> {
    let law = Law::of(measure, f)?;
    let mean = law.mean();
    let norm = f.delta_norm()?;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let (lhs, se) = law.expect(|v| if v - mean >= t { 1.0 } else { 0.0 });
            let rhs = if norm == 0.0 { if t > 0.0 { 0.0 } else { 1.0 } } else { (-2.0 * t * t / (d * norm)).exp() };
            CheckReport::new("tail", f.name(), Some(t), lhs, se, rhs)
        })
        .collect())
}

/// `E|F - EF|^m <= (D ||delta F||^2 / 2)^{m/2} m Gamma(m/2)` for each `m`.
pub fn moment_check(measure: Measure<'_>, f: &LocalFunction, d: f64, m_grid: &[u32]) -> Result<Vec<CheckReport>> {
    let law = Law::of(measure, f)?;
    let mean = law.mean();
    let norm = f.delta_norm()?;
    m_grid
        .iter()
        .map(|&m| {
            if m == 0 {
                return Err(invalid("moment order must be at least 1"));
            }
            let mf = m as f64;
            let (lhs, se) = law.expect(|v| (v - mean).abs().powf(mf));
            let rhs = (d * norm / 2.0).powf(mf / 2.0) * mf * gamma(mf / 2.0);
            Ok(CheckReport::new("moment", f.name(), Some(mf), lhs, se, rhs))
        })
        .collect()
}

/// `|cov(sigma_0, sigma_i)| <= 1/4 sum D_{jk} delta_k sigma_0 delta_{j-i} sigma_0`
/// under the exact window measure, for each lag `i`.
pub fn covariance_bound_check(
    inter: &PairInteraction,
    window: &Window,
    boundary: &Boundary,
    lags: &[i64],
) -> Result<Vec<CheckReport>> {
    inter.require_uniqueness()?;
    if !window.contains(0) {
        return Err(invalid("the window must contain the origin"));
    }
    for &i in lags {
        if !window.contains(i) {
            return Err(Error::InvalidParameter(format!("lag {i} outside window")));
        }
    }
    let mu = window_gibbs(inter, window, boundary)?;
    let dm = DobrushinMatrices::new(inter, window)?;
    let a = inter.alphabet();
    let spread = a.span();
    let n = window.len();
    let words: Vec<Vec<i8>> = (0..mu.len()).map(|k| a.word(k, n)).collect();
    let e = |f: &dyn Fn(&[i8]) -> f64| -> f64 { mu.probs.iter().zip(&words).map(|(p, w)| p * f(w)).sum() };
    let i0 = window.index(0).unwrap();
    let m0 = e(&|w| w[i0] as f64);
    lags.iter()
        .map(|&i| {
            let ii = window.index(i).unwrap();
            let mi = e(&|w| w[ii] as f64);
            let cov = e(&|w| w[i0] as f64 * w[ii] as f64) - m0 * mi;
            let bound = 0.25 * spread * spread * dm.dbar_entry(i, 0)? + 0.25 * spread * spread * dm.remainder;
            Ok(CheckReport::new("covariance", "spin(0),spin(i)", Some(i as f64), cov.abs(), 0.0, bound + 1e-14))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tail;

    #[test]
    fn free_spin_moments() {
        let inter = PairInteraction::dyson(2.0, 0.0).unwrap();
        let m = window_gibbs(&inter, &Window::site(0), &Boundary::free()).unwrap();
        let f = LocalFunction::spin(0);
        let g = gcb_check(Measure::Exact(&m), &f, 4.0).unwrap();
        assert!((g.lhs - 1f64.cosh()).abs() < 1e-15);
        assert!(g.pass);
        let mo = moment_check(Measure::Exact(&m), &f, 4.0, &[2]).unwrap();
        assert!((mo[0].lhs - 1.0).abs() < 1e-15);
        assert!((mo[0].rhs - 16.0).abs() < 1e-12);
        let t = tail_check(Measure::Exact(&m), &f, 4.0, &[0.0, 2.1]).unwrap();
        assert_eq!(t[0].rhs, 1.0);
        assert_eq!(t[1].lhs, 0.0);
    }

    #[test]
    fn covariance_at_lag_three() {
        let inter = PairInteraction::dyson(2.0, 0.1).unwrap();
        let w = Window::new(-5, 6).unwrap();
        let r = covariance_bound_check(&inter, &w, &Boundary::uniform(Tail::AllPlus), &[1, 3]).unwrap();
        assert!(r.iter().all(|c| c.pass));
        assert!(matches!(
            covariance_bound_check(&inter, &w, &Boundary::free(), &[9]),
            Err(Error::InvalidParameter(_))
        ));
    }
}
