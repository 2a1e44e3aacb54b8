use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Boundary, Side, Tail, Window};
use crate::error::{invalid, Result};
use crate::gibbs::sampler::{default_burn_in, run_chains};
use crate::model::PotentialSpec;
use crate::stats::{batch_means, chain_seed, total_variation, DEFAULT_BATCHES};
use crate::transfer::softmax;

/// Chains used to sample the half-line block.
pub const SHIFT_CHAINS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    pub n: usize,
    pub distance: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub window_len: usize,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<ShiftRow>,
}

impl ShiftReport {
    pub fn row(&self, n: usize) -> Option<&ShiftRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Distance between the single-site conditional at the origin after the
/// shift by `n` and the whole-line kernel.
///
/// The starting measure is uniform Bernoulli on the left of site 0 times the
/// half-line Gibbs measure on `0..window_len` (free on its left, `spec`'s
/// right tail plus, sampled by heat bath). After shifting by `n` the origin
/// sits at site `n`: it sees `n` sampled spins on its left and uniform spins
/// beyond them, and the half-line kernel ignores everything past those `n`.
/// Each row averages `TV(gamma^(n)(.|omega), gamma_whole(.|omega))` over
/// `omega` drawn from the shifted measure.
pub fn shift_convergence_experiment(
    spec: &PotentialSpec,
    depths: &[usize],
    window_len: usize,
    samples: usize,
    seed: u64,
) -> Result<ShiftReport> {
    if depths.iter().any(|&n| n >= window_len) {
        return Err(invalid("shift depth must lie inside the sampled block"));
    }
    let inter = spec.interaction()?;
    let c = spec.coupling()?;
    let form = spec.form();
    let vals = spec.alphabet().values().to_vec();
    let reach = c.support_end().ok_or_else(|| invalid("the shift experiment needs a finite coupling range"))?;
    let couplings: Vec<f64> = (0..=reach).map(|r| c.value(r)).collect();
    let window = Window::new(0, window_len as i64 - 1)?;
    let tail = Tail::AllPlus;
    let boundary = Boundary::new(Side::free(), Side::frozen(tail.clone()));
    let per_chain = samples.div_ceil(SHIFT_CHAINS);
    let sets = run_chains(&inter, &window, &boundary, seed, SHIFT_CHAINS, default_burn_in(&window), per_chain, 1)?;
    let pattern = tail.pattern_f64();

    let mut rows = Vec::with_capacity(depths.len());
    for (k, &n) in depths.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(chain_seed(seed ^ 0x5348_4946_54, k as u64));
        let right_len = window_len - 1 - n;
        // tail contribution to the right field is the same for every sample
        let far_right = c.weighted_sum(right_len as u64 + 1, &[], Some(&pattern))?.value;
        let mut dist = Vec::with_capacity(samples);
        for set in &sets {
            for x in set.iter() {
                let mut right = far_right;
                for r in 1..=right_len {
                    right += couplings.get(r).copied().unwrap_or(0.0) * x[n + r] as f64;
                }
                let mut near_left = 0.0;
                for r in 1..=n.min(reach as usize) {
                    near_left += couplings[r] * form.left_factor(x[n - r]);
                }
                let far_left = uniform_field(&couplings, n + 1, &vals, form, &mut rng);
                let lw = |left: f64| -> Vec<f64> {
                    vals.iter().map(|&s| s as f64 * left + form.left_factor(s) * right).collect()
                };
                let shifted = softmax(&lw(near_left));
                let whole = softmax(&lw(near_left + far_left));
                dist.push(total_variation(&shifted, &whole));
            }
        }
        let est = batch_means(&dist, DEFAULT_BATCHES);
        rows.push(ShiftRow { n, distance: est.mean, std_err: est.std_err });
    }
    Ok(ShiftReport { window_len, samples: per_chain * SHIFT_CHAINS, seed, rows })
}

/// `sum_{r >= from} J(r) g(u_r)` for i.i.d. uniform `u` over the alphabet.
fn uniform_field(couplings: &[f64], from: usize, vals: &[i8], form: crate::model::PairForm, rng: &mut ChaCha8Rng) -> f64 {
    let g: Vec<f64> = vals.iter().map(|&v| form.left_factor(v)).collect();
    let constant = g.iter().all(|&x| x == g[0]);
    let mut s = 0.0;
    if constant {
        return g[0] * couplings.get(from..).map_or(0.0, |c| c.iter().sum());
    }
    if vals.len() == 2 {
        let mut bits = 0u64;
        for (k, r) in (from..couplings.len()).enumerate() {
            if k % 64 == 0 {
                bits = rng.random();
            }
            let b = (bits >> (k % 64)) & 1;
            s += couplings[r] * g[b as usize];
        }
    } else {
        for &j in couplings.get(from..).unwrap_or(&[]) {
            s += j * g[rng.random_range(0..g.len())];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_beta_has_zero_distance() {
        let s = PotentialSpec::dyson(2.0, 0.0).unwrap().with_truncation(1000).unwrap();
        let r = shift_convergence_experiment(&s, &[0, 3], 8, 64, 1).unwrap();
        assert!(r.rows.iter().all(|row| row.distance == 0.0));
    }

    #[test]
    fn product_type_matches_partial_sums() {
        let s = PotentialSpec::product_type(2.0, 0.1).unwrap();
        let r = shift_convergence_experiment(&s, &[0, 20], 24, 64, 3).unwrap();
        let zeta2 = 1.644_934_066_848_226_4f64;
        let p = |h: f64| 1.0 / (1.0 + (-2.0 * h).exp());
        let z20: f64 = (1..=20).map(|k| 1.0 / (k * k) as f64).sum();
        let exact0 = (p(0.0) - p(0.1 * zeta2)).abs();
        let exact20 = (p(0.1 * z20) - p(0.1 * zeta2)).abs();
        assert!((r.rows[0].distance - exact0).abs() < 1e-6);
        assert!((r.rows[1].distance - exact20).abs() < 1e-6);
        assert!(r.rows[1].distance < 0.01);
    }
}
