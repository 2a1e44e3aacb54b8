use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::transfer::model::TransferModel;

/// Largest allowed `|entropy + energy - log lambda|`.
pub const VARIATIONAL_TOLERANCE: f64 = 1e-10;
const STATIONARY_SWEEPS: usize = 200;

/// The Markov chain `P(w, t) = M(w, t) h(t) / (lambda h(w))` on depth-`m` words.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkovEquilibrium {
    pub depth: usize,
    /// Stationary law over depth-`m` words.
    pub stationary: Vec<f64>,
    pub entropy: f64,
    pub energy: f64,
    pub pressure: f64,
    /// `entropy + energy - pressure`.
    pub variational_defect: f64,
    /// Largest `|row sum - 1|` before rows were renormalized.
    pub row_sum_defect: f64,
    #[serde(skip)]
    q: usize,
    #[serde(skip)]
    values: Vec<i8>,
}

impl MarkovEquilibrium {
    pub fn new(model: &TransferModel) -> Result<Self> {
        let q = model.alphabet().len();
        let dim = model.dim();
        let h = model.right_eig().values();
        if h.iter().any(|&v| !(v > 0.0)) {
            return Err(invalid("eigenfunction has non-positive entries"));
        }
        let lw = model.log_weights();
        let shift = model.log_shift();
        let lam = (model.pressure() - shift).exp();

        // transition probabilities laid out like the log-weights
        let mut p = vec![0.0; dim * q];
        let mut row_sum_defect = 0.0f64;
        for w in 0..dim {
            let mut s = 0.0;
            for a in 0..q {
                let t = model.target(w, a);
                let v = (lw[w * q + a] - shift).exp() * h[t] / (lam * h[w]);
                p[w * q + a] = v;
                s += v;
            }
            row_sum_defect = row_sum_defect.max((s - 1.0).abs());
            for a in 0..q {
                p[w * q + a] /= s;
            }
        }

        let mut pi: Vec<f64> = model.left_eig().iter().zip(h).map(|(n, h)| n * h).collect();
        normalize(&mut pi);
        for _ in 0..STATIONARY_SWEEPS {
            let mut next = vec![0.0; dim];
            for w in 0..dim {
                for a in 0..q {
                    next[model.target(w, a)] += pi[w] * p[w * q + a];
                }
            }
            normalize(&mut next);
            let d = next.iter().zip(&pi).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            pi = next;
            if d < 1e-17 {
                break;
            }
        }

        let mut entropy = 0.0;
        let mut energy = 0.0;
        for w in 0..dim {
            for a in 0..q {
                let pr = p[w * q + a];
                if pr > 0.0 {
                    entropy -= pi[w] * pr * pr.ln();
                    energy += pi[w] * pr * lw[w * q + a];
                }
            }
        }
        let pressure = model.pressure();
        let variational_defect = entropy + energy - pressure;
        if variational_defect.abs() > VARIATIONAL_TOLERANCE {
            return Err(Error::NotConverged { iterations: model.iterations(), residual: variational_defect });
        }
        Ok(MarkovEquilibrium {
            depth: model.depth(),
            stationary: pi,
            entropy,
            energy,
            pressure,
            variational_defect,
            row_sum_defect,
            q,
            values: model.alphabet().values().to_vec(),
        })
    }

    /// Probability that the spin at window position `pos` equals `value`.
    pub fn marginal(&self, pos: usize, value: i8) -> Result<f64> {
        if pos >= self.depth {
            return Err(invalid("position outside the window"));
        }
        let d = self.values.iter().position(|&v| v == value).ok_or(Error::SpinOutsideAlphabet(value))?;
        let stride = self.q.pow((self.depth - 1 - pos) as u32);
        Ok(self.stationary.iter().enumerate().filter(|(i, _)| (i / stride) % self.q == d).map(|(_, p)| p).sum())
    }

    /// Law of the block at positions `offset..offset + len`.
    pub fn block_marginal(&self, offset: usize, len: usize) -> Result<Vec<f64>> {
        if len == 0 || offset + len > self.depth {
            return Err(invalid("block outside the window"));
        }
        let stride = self.q.pow((self.depth - offset - len) as u32);
        let size = self.q.pow(len as u32);
        let mut out = vec![0.0; size];
        for (i, p) in self.stationary.iter().enumerate() {
            out[(i / stride) % size] += p;
        }
        Ok(out)
    }
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tail;
    use crate::model::PotentialSpec;
    use crate::transfer::model::TransferOptions;

    #[test]
    fn zero_beta_is_fair_coin() {
        let s = PotentialSpec::dyson(2.0, 0.0).unwrap();
        let m = TransferModel::build(&s, 4, &Tail::AllPlus, &TransferOptions::default()).unwrap();
        let e = MarkovEquilibrium::new(&m).unwrap();
        assert!((e.entropy - 2f64.ln()).abs() < 1e-14);
        assert_eq!(e.energy, 0.0);
        assert!((e.marginal(0, 1).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn block_marginals_are_shift_consistent() {
        let s = PotentialSpec::dyson(2.0, 0.2).unwrap();
        let m = TransferModel::build(&s, 6, &Tail::AllPlus, &TransferOptions::default()).unwrap();
        let e = MarkovEquilibrium::new(&m).unwrap();
        let a = e.block_marginal(0, 5).unwrap();
        let b = e.block_marginal(1, 5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
