use serde::{Deserialize, Serialize};

use crate::alphabet::{SpinAlphabet, DEFAULT_ENUMERATION_BUDGET};
use crate::config::{HalfLineConfig, Tail};
use crate::error::{invalid, Result};
use crate::model::{ChainEnergy, PotentialSpec};
use crate::series::Bounded;
use crate::transfer::cylinder::CylinderFunction;

/// `S_n phi(a_0^{n-1} y)` as a function of the word `a`, for a fixed
/// boundary `y` occupying sites `n, n+1, ...`.
#[derive(Debug, Clone)]
pub struct HalfLineEnergy {
    chain: ChainEnergy,
}

impl HalfLineEnergy {
    pub fn new(spec: &PotentialSpec, n: usize, boundary: &HalfLineConfig) -> Result<Self> {
        if n == 0 {
            return Err(invalid("window length must be at least 1"));
        }
        boundary.check(spec.alphabet())?;
        let c = spec.coupling()?;
        let head: Vec<f64> = boundary.word.iter().map(|&v| v as f64).collect();
        let pattern = boundary.tail.pattern_f64();
        // F_k = sum_{t>=0} J(n-k+t) y_t
        let fields = (0..n)
            .map(|k| c.weighted_sum((n - k) as u64, &head, Some(&pattern)))
            .collect::<Result<Vec<_>>>()?;
        let chain = ChainEnergy::new(
            spec.alphabet().clone(),
            spec.form(),
            (1..n as u64).map(|r| c.value(r)).collect(),
            vec![Bounded::ZERO; n],
            fields,
        )?;
        Ok(HalfLineEnergy { chain })
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn log_weight(&self, word: &[i8]) -> f64 {
        self.chain.log_weight(word)
    }

    /// Bound on the truncation error of every log-weight.
    pub fn error(&self) -> f64 {
        self.chain.error()
    }

    /// Log-weights of all words in lexicographic order.
    pub fn log_weights(&self, budget: u128) -> Result<Vec<f64>> {
        self.chain.log_weights(budget)
    }
}

/// The half-line kernel `gamma_n(. | y)` on words of length `n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfLineKernel {
    pub n: usize,
    pub alphabet: SpinAlphabet,
    pub probs: Vec<f64>,
    /// Bound on the truncation error of each log-weight.
    pub log_weight_error: f64,
}

impl HalfLineKernel {
    /// Bound on `|p - p_uncut|` for every probability.
    pub fn probability_error(&self) -> f64 {
        (2.0 * self.log_weight_error).exp_m1()
    }

    /// `sum_a gamma_n(a | y) f(a y)`.
    pub fn integrate(&self, f: &CylinderFunction, boundary: &HalfLineConfig) -> Result<f64> {
        let mut s = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            let mut word = self.alphabet.word(i, self.n);
            word.extend_from_slice(&boundary.word);
            s += p * f.eval(&HalfLineConfig::new(word, boundary.tail.clone()))?;
        }
        Ok(s)
    }
}

/// Normalized `exp(w - max w)`.
pub fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = log_weights.iter().map(|w| (w - max).exp()).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
    p
}

pub fn half_line_kernel(spec: &PotentialSpec, n: usize, tail: &Tail) -> Result<HalfLineKernel> {
    half_line_kernel_given(spec, n, &HalfLineConfig::tail_only(tail.clone()))
}

/// Kernel for a general boundary `y` on sites `n, n+1, ...`.
pub fn half_line_kernel_given(spec: &PotentialSpec, n: usize, boundary: &HalfLineConfig) -> Result<HalfLineKernel> {
    let e = HalfLineEnergy::new(spec, n, boundary)?;
    let lw = e.log_weights(DEFAULT_ENUMERATION_BUDGET)?;
    Ok(HalfLineKernel { n, alphabet: spec.alphabet().clone(), probs: softmax(&lw), log_weight_error: e.error() })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub inner: usize,
    pub outer: usize,
    /// `sup_y |gamma_outer(gamma_inner f)(y) - gamma_outer f(y)|`.
    pub defect: f64,
    /// Number of boundary words probed.
    pub boundaries: usize,
    pub truncation_bound: f64,
}

/// Spins of explicit boundary enumerated in front of the tail.
pub const CONSISTENCY_BOUNDARY_LEN: usize = 3;

/// Checks `gamma_outer(gamma_inner f) = gamma_outer f` for `inner <= outer`
/// over all boundary words of length [`CONSISTENCY_BOUNDARY_LEN`] followed by `tail`.
pub fn kernel_consistency_check(
    spec: &PotentialSpec,
    inner: usize,
    outer: usize,
    tail: &Tail,
    f: &CylinderFunction,
) -> Result<ConsistencyReport> {
    if inner == 0 || inner > outer {
        return Err(invalid(format!("need 1 <= inner <= outer, got {inner} and {outer}")));
    }
    if f.alphabet() != spec.alphabet() {
        return Err(invalid("test function and potential use different alphabets"));
    }
    let a = spec.alphabet();
    let nb = a.word_count(CONSISTENCY_BOUNDARY_LEN, DEFAULT_ENUMERATION_BUDGET)?;
    let mut defect = 0.0f64;
    let mut bound = 0.0f64;
    for b in 0..nb {
        let y = HalfLineConfig::new(a.word(b, CONSISTENCY_BOUNDARY_LEN), tail.clone());
        let outer_k = half_line_kernel_given(spec, outer, &y)?;
        let direct = outer_k.integrate(f, &y)?;
        let mut nested = 0.0;
        let mut inner_err = 0.0f64;
        for (i, &p) in outer_k.probs.iter().enumerate() {
            let word = a.word(i, outer);
            let mut rest = word[inner..].to_vec();
            rest.extend_from_slice(&y.word);
            let yi = HalfLineConfig::new(rest, tail.clone());
            let inner_k = half_line_kernel_given(spec, inner, &yi)?;
            inner_err = inner_err.max(inner_k.probability_error());
            nested += p * inner_k.integrate(f, &yi)?;
        }
        defect = defect.max((nested - direct).abs());
        let scale = f.sup_norm() * 2.0 * (a.len().pow(outer as u32) as f64);
        bound = bound.max(scale * (outer_k.probability_error() + inner_err));
    }
    Ok(ConsistencyReport { inner, outer, defect, boundaries: nb, truncation_bound: bound })
}

/// `max - min` of `L 1` over depth-`m` cylinders evaluated on `tail`.
pub fn quasi_normalization_defect(spec: &PotentialSpec, m: usize, tail: &Tail) -> Result<f64> {
    let a = spec.alphabet();
    let n = a.word_count(m, DEFAULT_ENUMERATION_BUDGET)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let w = a.word(i, m);
        let mut s = 0.0;
        for &v in a.values() {
            let mut x = vec![v];
            x.extend_from_slice(&w);
            s += spec.evaluate(&HalfLineConfig::new(x, tail.clone()))?.value.exp();
        }
        lo = lo.min(s);
        hi = hi.max(s);
    }
    Ok(hi - lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::birkhoff_sum;

    #[test]
    fn single_site_on_plus_tail_is_logistic() {
        let s = PotentialSpec::dyson(2.0, 0.1).unwrap();
        let k = half_line_kernel(&s, 1, &Tail::AllPlus).unwrap();
        let expect = 1.0 / (1.0 + (-2.0 * 0.164_493_406_684_822_64f64).exp());
        assert!((k.probs[1] - expect).abs() < 1e-5);
    }

    #[test]
    fn enumeration_matches_birkhoff_sums() {
        let s = PotentialSpec::dyson(1.5, 0.3).unwrap();
        let y = HalfLineConfig::new(vec![1, -1], Tail::Alternating);
        let e = HalfLineEnergy::new(&s, 4, &y).unwrap();
        let lw = e.log_weights(1 << 10).unwrap();
        let a = s.alphabet();
        let tail_part = birkhoff_sum(&s, &y.word, &y.tail).unwrap().value;
        for (i, w) in lw.iter().enumerate() {
            let mut word = a.word(i, 4);
            assert!((e.log_weight(&word) - w).abs() < 1e-13);
            // S_{n+2} phi(a y) = S_n phi(a y) + S_2 phi(y)
            word.extend_from_slice(&y.word);
            let full = birkhoff_sum(&s, &word, &y.tail).unwrap().value;
            assert!((full - tail_part - w).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_beta_is_uniform() {
        let s = PotentialSpec::dyson(2.0, 0.0).unwrap();
        let k = half_line_kernel(&s, 3, &Tail::AllMinus).unwrap();
        assert!(k.probs.iter().all(|&p| (p - 0.125).abs() < 1e-15));
    }
}
