use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{HalfLineConfig, Tail};
use crate::error::{invalid, Result};
use crate::model::potential::{PotentialKind, PotentialSpec};
use crate::series::Bounded;

pub const DEFAULT_PROBE_BUDGET: usize = 256;
const PROBE_SEED: u64 = 0x5EED_0E57;
/// Explicit random spins to the right of the origin in extensibility probes.
const PROBE_RIGHT_LEN: usize = 16;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityOptions {
    /// Report `v_k` and `delta_k` for `k = 0..=k_max`.
    pub k_max: u64,
    /// Grid of `p` for the Walters diagnostic.
    pub p_grid: Vec<u64>,
    /// Largest `n` in the Walters sup.
    pub n_max: u64,
    pub extensibility_grid: Vec<u64>,
    pub probe_budget: usize,
}

impl Default for RegularityOptions {
    fn default() -> Self {
        RegularityOptions {
            k_max: 16,
            p_grid: vec![1, 2, 4, 8, 16, 32, 64],
            n_max: 256,
            extensibility_grid: vec![1, 2, 5, 10, 20],
            probe_budget: DEFAULT_PROBE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub kind: PotentialKind,
    pub alpha: f64,
    pub beta: f64,
    pub variations: Vec<Bounded>,
    pub site_oscillations: Vec<Bounded>,
    pub good_future_sum: Bounded,
    /// `(p, sup_{n <= n_max} v_{n+p}(S_n phi))`.
    pub walters_diagnostic: Vec<(u64, f64)>,
    pub walters_n_max: u64,
    /// `(n, probed sup |F_{n+1} - F_n|)`.
    pub extensibility_defect: Vec<(u64, f64)>,
}

impl RegularityReport {
    pub fn build(spec: &PotentialSpec, opts: &RegularityOptions) -> Result<Self> {
        let mut variations = Vec::new();
        let mut site_oscillations = Vec::new();
        for k in 0..=opts.k_max {
            variations.push(spec.variation(k)?);
            site_oscillations.push(spec.site_oscillation(k)?);
        }
        Ok(RegularityReport {
            kind: spec.kind(),
            alpha: spec.alpha(),
            beta: spec.beta(),
            variations,
            site_oscillations,
            good_future_sum: good_future_sum(spec)?,
            walters_diagnostic: walters_diagnostic(spec, &opts.p_grid, opts.n_max)?,
            walters_n_max: opts.n_max,
            extensibility_defect: extensibility_defect(spec, &opts.extensibility_grid, opts.probe_budget)?,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per `k`: `k, variation, variation_err, site_oscillation, site_oscillation_err`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "variation", "variation_err", "site_oscillation", "site_oscillation_err"])?;
        for (k, (v, d)) in self.variations.iter().zip(&self.site_oscillations).enumerate() {
            w.write_record([
                k.to_string(),
                format!("{:.16e}", v.value),
                format!("{:.16e}", v.error),
                format!("{:.16e}", d.value),
                format!("{:.16e}", d.error),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `sum_{k>=1} delta_k(phi)`.
pub fn good_future_sum(spec: &PotentialSpec) -> Result<Bounded> {
    let c = spec.coupling()?.untruncated();
    Ok(c.abs_tail(1)? * (max_left_factor(spec) * spec.alphabet().span()))
}

/// `sup_{n <= n_max} v_{n+p}(S_n phi)` for each `p`.
///
/// For pair potentials `v_{n+p}(S_n phi) = G sum_{j=p+1}^{p+n} sum_{r>=j} |J(r)|`
/// with `G = max|g| * span`, which grows with `n`, so the sup sits at `n_max`.
pub fn walters_diagnostic(spec: &PotentialSpec, p_grid: &[u64], n_max: u64) -> Result<Vec<(u64, f64)>> {
    if n_max == 0 {
        return Err(invalid("n_max must be at least 1"));
    }
    let c = spec.coupling()?.untruncated();
    let g = max_left_factor(spec) * spec.alphabet().span();
    p_grid
        .iter()
        .map(|&p| {
            let mut s = 0.0;
            for j in (p + 1..=p + n_max).rev() {
                s += c.abs_tail(j)?.upper();
            }
            Ok((p, g * s))
        })
        .collect()
}

/// Probed `sup_x |F_{n+1}^{a,b}(x) - F_n^{a,b}(x)|` with `a = -1`, `b = +1`,
/// computed from the Birkhoff-sum definition of `F_n`.
pub fn extensibility_defect(spec: &PotentialSpec, n_grid: &[u64], probe_budget: usize) -> Result<Vec<(u64, f64)>> {
    if !spec.alphabet().is_ising() {
        return Err(invalid("extensibility probes flip the origin spin and need the Ising alphabet"));
    }
    if probe_budget == 0 {
        return Err(invalid("probe budget must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let tails = [Tail::AllPlus, Tail::AllMinus, Tail::Alternating];
    let mut out = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let mut worst = 0.0f64;
        for _ in 0..probe_budget {
            // x_{-n-1} .. x_{-1}, stored nearest-first
            let left: Vec<i8> = (0..=n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let right: Vec<i8> = (0..PROBE_RIGHT_LEN).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let tail = tails[rng.random_range(0..tails.len())].clone();
            let f_n = f_sequence(spec, &left, &right, &tail, n as usize)?;
            let f_n1 = f_sequence(spec, &left, &right, &tail, n as usize + 1)?;
            worst = worst.max((f_n1 - f_n).abs());
        }
        out.push((n, worst));
    }
    Ok(out)
}

/// `F_n(x) = sum_{i=0}^{n} (phi(x_{-i}^{-1} b x_1^inf) - phi(x_{-i}^{-1} a x_1^inf))`.
fn f_sequence(spec: &PotentialSpec, left: &[i8], right: &[i8], tail: &Tail, n: usize) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..=n {
        let mut word: Vec<i8> = left[..i].iter().rev().copied().collect();
        let origin = word.len();
        word.push(1);
        word.extend_from_slice(right);
        let plus = spec.evaluate(&HalfLineConfig::new(word.clone(), tail.clone()))?;
        word[origin] = -1;
        let minus = spec.evaluate(&HalfLineConfig::new(word, tail.clone()))?;
        total += plus.value - minus.value;
    }
    Ok(total)
}

fn max_left_factor(spec: &PotentialSpec) -> f64 {
    let form = spec.form();
    spec.alphabet().values().iter().map(|&v| form.left_factor(v).abs()).fold(0.0, f64::max)
}

/// Analytic `sup_x |F_{n+1} - F_n| = max|g| * span * |J(n+1)|`, the same for both pair forms.
pub fn extensibility_defect_bound(spec: &PotentialSpec, n: u64) -> Result<f64> {
    let c = spec.coupling()?;
    Ok(max_left_factor(spec) * spec.alphabet().span() * c.value(n + 1).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyson_defect_below_analytic_term() {
        let s = PotentialSpec::dyson(2.0, 0.1).unwrap();
        let d = extensibility_defect(&s, &[10], 64).unwrap();
        assert!(d[0].1 <= 0.2 / 121.0 + 1e-12);
        assert!(d[0].1 > 0.0);
    }

    #[test]
    fn product_type_defect_is_not_zero() {
        let s = PotentialSpec::product_type(2.0, 0.1).unwrap();
        let d = extensibility_defect(&s, &[10], 16).unwrap();
        // every probe hits the bound exactly
        assert!((d[0].1 - 0.2 / 121.0).abs() < 1e-12);
    }

    #[test]
    fn report_csv_has_one_row_per_k() {
        let s = PotentialSpec::dyson(2.0, 0.1).unwrap();
        let opts = RegularityOptions { k_max: 4, extensibility_grid: vec![1], probe_budget: 2, ..Default::default() };
        let r = RegularityReport::build(&s, &opts).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 6);
        assert!((r.site_oscillations[2].value - 0.05).abs() < 1e-15);
    }
}
