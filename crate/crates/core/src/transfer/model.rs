use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphabet::{SpinAlphabet, DEFAULT_ENUMERATION_BUDGET};
use crate::config::Tail;
use crate::error::{invalid, Error, Result};
use crate::model::PotentialSpec;
use crate::transfer::cylinder::CylinderFunction;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TransferOptions {
    /// Relative change of `lambda` (and sup change of `h`) that ends the iteration.
    pub tol: f64,
    pub max_iters: usize,
    pub budget: u128,
}

impl Default for TransferOptions {
    fn default() -> Self {
        TransferOptions { tol: 1e-12, max_iters: 100_000, budget: DEFAULT_ENUMERATION_BUDGET }
    }
}

/// The transfer operator restricted to depth-`m` cylinder functions:
/// `(L f)(w) = sum_a exp(phi(a w tail)) f(prefix_m(a w))`.
#[derive(Debug, Clone)]
pub struct TransferModel {
    spec: Option<PotentialSpec>,
    alphabet: SpinAlphabet,
    depth: usize,
    tail: Tail,
    /// `phi(a w tail)` at `w * q + a`.
    log_weights: Vec<f64>,
    shift: f64,
    lambda: f64,
    pressure: f64,
    right_eig: CylinderFunction,
    left_eig: Vec<f64>,
    residual: f64,
    solver_residual: f64,
    iterations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferSummary {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub depth: usize,
    pub tail: String,
    pub lambda: f64,
    pub pressure: f64,
    pub residual: f64,
    pub solver_residual: f64,
    pub iterations: usize,
}

impl TransferModel {
    pub fn build(spec: &PotentialSpec, depth: usize, tail: &Tail, opts: &TransferOptions) -> Result<Self> {
        let lw = log_weights(spec, depth, tail, opts.budget)?;
        let mut m = Self::from_log_weights(spec.alphabet().clone(), depth, tail.clone(), lw, opts)?;
        m.spec = Some(spec.clone());
        m.residual = m.solver_residual;
        for probe in [Tail::AllPlus, Tail::AllMinus, Tail::Alternating, tail.clone()] {
            let plw = log_weights(spec, depth, &probe, opts.budget)?;
            m.residual = m.residual.max(m.residual_for(&plw));
        }
        Ok(m)
    }

    /// Builds the operator from arbitrary log-weights laid out as `w * q + a`.
    pub fn from_log_weights(
        alphabet: SpinAlphabet,
        depth: usize,
        tail: Tail,
        log_weights: Vec<f64>,
        opts: &TransferOptions,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(invalid("transfer depth must be at least 1"));
        }
        if !(opts.tol > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        let q = alphabet.len();
        let dim = alphabet.word_count(depth, opts.budget)?;
        if log_weights.len() != dim * q {
            return Err(invalid("log-weight table has the wrong size"));
        }
        if log_weights.iter().any(|v| !v.is_finite()) {
            return Err(invalid("log-weights must be finite"));
        }
        let shift = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = log_weights.iter().map(|v| (v - shift).exp()).collect();
        let high = dim / q;

        // right eigenvector, sup-normalized
        let mut h = vec![1.0; dim];
        let mut lam = 0.0;
        let mut iterations = 0;
        let mut converged = false;
        let mut change = f64::INFINITY;
        while iterations < opts.max_iters {
            iterations += 1;
            let g = apply(&w, &h, q, high);
            let new_lam = g.iter().fold(0.0f64, |m, v| m.max(*v));
            let next: Vec<f64> = g.iter().map(|v| v / new_lam).collect();
            change = next.iter().zip(&h).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let lam_change = ((new_lam - lam) / new_lam).abs();
            h = next;
            lam = new_lam;
            if lam_change < opts.tol && change < opts.tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NotConverged { iterations, residual: change });
        }

        // left eigenvector, L1-normalized
        let mut nu = vec![1.0 / dim as f64; dim];
        let mut left_converged = false;
        for _ in 0..opts.max_iters {
            let g = apply_transpose(&w, &nu, q, high);
            let s: f64 = g.iter().sum();
            let next: Vec<f64> = g.iter().map(|v| v / s).collect();
            let d = next.iter().zip(&nu).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let top = next.iter().fold(0.0f64, |m, v| m.max(*v));
            nu = next;
            if d < opts.tol * top {
                left_converged = true;
                break;
            }
        }
        if !left_converged {
            return Err(Error::NotConverged { iterations: opts.max_iters, residual: f64::NAN });
        }

        let g = apply(&w, &h, q, high);
        let solver_residual = g.iter().zip(&h).fold(0.0f64, |m, (a, b)| m.max((a - lam * b).abs())) * shift.exp();
        let lambda = lam * shift.exp();
        let right_eig = CylinderFunction::new(alphabet.clone(), depth, h, tail.clone())?;
        Ok(TransferModel {
            spec: None,
            alphabet,
            depth,
            tail,
            log_weights,
            shift,
            lambda,
            pressure: lam.ln() + shift,
            right_eig,
            left_eig: nu,
            residual: solver_residual,
            solver_residual,
            iterations,
        })
    }

    /// `||L' h - lambda h||_inf / ||h||_inf` for the operator with log-weights `lw`.
    fn residual_for(&self, lw: &[f64]) -> f64 {
        let q = self.alphabet.len();
        let high = self.dim() / q;
        let w: Vec<f64> = lw.iter().map(|v| (v - self.shift).exp()).collect();
        let h = self.right_eig.values();
        let g = apply(&w, h, q, high);
        let lam = self.lambda / self.shift.exp();
        g.iter().zip(h).fold(0.0f64, |m, (a, b)| m.max((a - lam * b).abs())) * self.shift.exp()
    }

    pub fn spec(&self) -> Option<&PotentialSpec> {
        self.spec.as_ref()
    }

    pub fn alphabet(&self) -> &SpinAlphabet {
        &self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn dim(&self) -> usize {
        self.left_eig.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn pressure(&self) -> f64 {
        self.pressure
    }

    /// The constant subtracted from every log-weight before exponentiation.
    pub fn log_shift(&self) -> f64 {
        self.shift
    }

    pub fn right_eig(&self) -> &CylinderFunction {
        &self.right_eig
    }

    pub fn left_eig(&self) -> &[f64] {
        &self.left_eig
    }

    /// Worst residual of `h` against the operators built on the probe tails
    /// (plus, minus, alternating and the model tail); shrinks with the depth.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Residual of `h` against the model's own operator.
    pub fn solver_residual(&self) -> f64 {
        self.solver_residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Index of `prefix_m(a w)` for the word with index `w` and spin digit `a`.
    pub fn target(&self, w: usize, a: usize) -> usize {
        let q = self.alphabet.len();
        a * (self.dim() / q) + w / q
    }

    /// `(L f)(w)` for a depth-`m` function.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.dim() {
            return Err(invalid("vector length does not match the model dimension"));
        }
        let q = self.alphabet.len();
        let w: Vec<f64> = self.log_weights.iter().map(|v| (v - self.shift).exp()).collect();
        let scale = self.shift.exp();
        Ok(apply(&w, f, q, self.dim() / q).into_iter().map(|v| v * scale).collect())
    }

    /// Marginal of the normalized left eigenvector on the first `d` positions.
    pub fn left_marginal(&self, d: usize) -> Result<Vec<f64>> {
        if d == 0 || d > self.depth {
            return Err(invalid(format!("marginal depth must be in 1..={}", self.depth)));
        }
        let q = self.alphabet.len();
        let block = q.pow((self.depth - d) as u32);
        let mut out = vec![0.0; self.dim() / block];
        for (i, v) in self.left_eig.iter().enumerate() {
            out[i / block] += v;
        }
        Ok(out)
    }

    pub fn summary(&self) -> TransferSummary {
        TransferSummary {
            alpha: self.spec.as_ref().map(|s| s.alpha()),
            beta: self.spec.as_ref().map(|s| s.beta()),
            depth: self.depth,
            tail: self.tail.to_string(),
            lambda: self.lambda,
            pressure: self.pressure(),
            residual: self.residual,
            solver_residual: self.solver_residual,
            iterations: self.iterations,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary())?)
    }

    /// Right then left eigenvector as little-endian 64-bit floats.
    pub fn write_eigenvectors<W: Write>(&self, mut out: W) -> Result<()> {
        self.right_eig.write_binary(&mut out)?;
        for v in &self.left_eig {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// `phi(a w tail)` laid out as `w * q + a`.
pub fn log_weights(spec: &PotentialSpec, depth: usize, tail: &Tail, budget: u128) -> Result<Vec<f64>> {
    if depth == 0 {
        return Err(invalid("transfer depth must be at least 1"));
    }
    tail.check(spec.alphabet())?;
    let a = spec.alphabet();
    let q = a.len();
    let dim = a.word_count(depth, budget)?;
    let c = spec.coupling()?;
    let form = spec.form();
    let far = c.weighted_sum(depth as u64 + 1, &[], Some(&tail.pattern_f64()))?.value;
    let j: Vec<f64> = (1..=depth as u64).map(|r| c.value(r)).collect();
    let vals: Vec<f64> = a.values().iter().map(|&v| v as f64).collect();
    let g: Vec<f64> = a.values().iter().map(|&v| form.left_factor(v)).collect();
    let mut out = vec![0.0; dim * q];
    out.par_chunks_mut(q).enumerate().for_each(|(wi, row)| {
        // digits of w, position 0 first
        let mut field = far;
        let mut idx = wi;
        for pos in (0..depth).rev() {
            field += j[pos] * vals[idx % q];
            idx /= q;
        }
        for (ai, slot) in row.iter_mut().enumerate() {
            *slot = g[ai] * field;
        }
    });
    Ok(out)
}

fn apply(w: &[f64], f: &[f64], q: usize, high: usize) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    out.par_iter_mut().enumerate().for_each(|(wi, slot)| {
        let mut s = 0.0;
        for a in 0..q {
            s += w[wi * q + a] * f[a * high + wi / q];
        }
        *slot = s;
    });
    out
}

fn apply_transpose(w: &[f64], nu: &[f64], q: usize, high: usize) -> Vec<f64> {
    let mut out = vec![0.0; nu.len()];
    out.par_iter_mut().enumerate().for_each(|(t, slot)| {
        let a = t / high;
        let base = (t % high) * q;
        let mut s = 0.0;
        for b in 0..q {
            let wi = base + b;
            s += nu[wi] * w[wi * q + a];
        }
        *slot = s;
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_beta_eigenpair() {
        let s = PotentialSpec::dyson(2.0, 0.0).unwrap();
        let m = TransferModel::build(&s, 3, &Tail::AllPlus, &TransferOptions::default()).unwrap();
        assert!((m.lambda() - 2.0).abs() < 1e-14);
        assert!(m.residual() < 1e-12);
        assert!(m.right_eig().values().iter().all(|&v| (v - 1.0).abs() < 1e-14));
        assert!(m.left_eig().iter().all(|&v| (v - 0.125).abs() < 1e-14));
    }

    #[test]
    fn log_weights_match_direct_evaluation() {
        let s = PotentialSpec::dyson(1.7, 0.2).unwrap();
        let lw = log_weights(&s, 4, &Tail::Alternating, 1 << 20).unwrap();
        let a = s.alphabet();
        for wi in 0..16 {
            for (ai, &v) in a.values().iter().enumerate() {
                let mut x = vec![v];
                x.extend(a.word(wi, 4));
                let direct = s.evaluate(&crate::config::HalfLineConfig::new(x, Tail::Alternating)).unwrap();
                assert!((direct.value - lw[wi * 2 + ai]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn duality_of_eigenvectors() {
        let s = PotentialSpec::dyson(2.0, 0.2).unwrap();
        let m = TransferModel::build(&s, 5, &Tail::AllPlus, &TransferOptions::default()).unwrap();
        let f: Vec<f64> = (0..m.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let lf = m.apply(&f).unwrap();
        let lhs: f64 = m.left_eig().iter().zip(&lf).map(|(a, b)| a * b).sum();
        let rhs: f64 = m.lambda() * m.left_eig().iter().zip(&f).map(|(a, b)| a * b).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-10);
    }
}
