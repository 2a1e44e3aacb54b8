use std::fmt;
use std::sync::Arc;

use crate::alphabet::{SpinAlphabet, DEFAULT_ENUMERATION_BUDGET};
use crate::config::Window;
use crate::error::{invalid, Result};

type Evaluator = Arc<dyn Fn(&[i8]) -> f64 + Send + Sync>;

/// A function of the spins on a finite set of sites.
#[derive(Clone)]
pub struct LocalFunction {
    name: String,
    alphabet: SpinAlphabet,
    support: Vec<i64>,
    eval: Evaluator,
}

impl fmt::Debug for LocalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalFunction").field("name", &self.name).field("support", &self.support).finish()
    }
}

impl LocalFunction {
    /// `eval` receives the spins on `support`, in the given order.
    pub fn new(
        name: impl Into<String>,
        alphabet: SpinAlphabet,
        support: Vec<i64>,
        eval: impl Fn(&[i8]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let mut sorted = support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != support.len() {
            return Err(invalid("support sites must be distinct"));
        }
        Ok(LocalFunction { name: name.into(), alphabet, support, eval: Arc::new(eval) })
    }

    pub fn spin(site: i64) -> Self {
        LocalFunction::new(format!("spin({site})"), SpinAlphabet::ising(), vec![site], |s| s[0] as f64).unwrap()
    }

    pub fn product(i: i64, j: i64) -> Result<Self> {
        LocalFunction::new(format!("spin({i})*spin({j})"), SpinAlphabet::ising(), vec![i, j], |s| {
            s[0] as f64 * s[1] as f64
        })
    }

    /// `sum_{k in window} sigma_k`.
    pub fn magnetization(window: &Window) -> Self {
        let support: Vec<i64> = (window.lo..=window.hi).collect();
        LocalFunction::new(format!("magnetization({}..={})", window.lo, window.hi), SpinAlphabet::ising(), support, |s| {
            s.iter().map(|&v| v as f64).sum()
        })
        .unwrap()
    }

    pub fn constant(c: f64) -> Self {
        LocalFunction::new(format!("constant({c})"), SpinAlphabet::ising(), Vec::new(), move |_| c).unwrap()
    }

    pub fn with_alphabet(mut self, alphabet: SpinAlphabet) -> Self {
        self.alphabet = alphabet;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn alphabet(&self) -> &SpinAlphabet {
        &self.alphabet
    }

    pub fn eval(&self, spins: &[i8]) -> f64 {
        (self.eval)(spins)
    }

    /// Value on a window configuration containing the support.
    pub fn eval_on(&self, window: &Window, word: &[i8]) -> Result<f64> {
        let mut s = Vec::with_capacity(self.support.len());
        for &k in &self.support {
            let i = window.index(k).ok_or_else(|| invalid(format!("site {k} outside the window")))?;
            s.push(word[i]);
        }
        Ok(self.eval(&s))
    }

    /// `delta_k F` for every support site, by exhaustive search over the support.
    pub fn delta_profile(&self) -> Result<Vec<(i64, f64)>> {
        let n = self.support.len();
        let total = self.alphabet.word_count(n, DEFAULT_ENUMERATION_BUDGET)?;
        let q = self.alphabet.len();
        let values: Vec<f64> = (0..total).map(|k| self.eval(&self.alphabet.word(k, n))).collect();
        let mut out = Vec::with_capacity(n);
        for (pos, &site) in self.support.iter().enumerate() {
            let stride = q.pow((n - 1 - pos) as u32);
            let mut delta = 0.0f64;
            for k in 0..total {
                if (k / stride) % q != 0 {
                    continue;
                }
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for a in 0..q {
                    let v = values[k + a * stride];
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                delta = delta.max(hi - lo);
            }
            out.push((site, delta));
        }
        Ok(out)
    }

    /// `||delta F||_2^2`.
    pub fn delta_norm(&self) -> Result<f64> {
        Ok(self.delta_profile()?.iter().map(|(_, d)| d * d).sum())
    }
}

pub fn delta_norm(f: &LocalFunction) -> Result<f64> {
    f.delta_norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_norms() {
        assert_eq!(LocalFunction::spin(0).delta_norm().unwrap(), 4.0);
        assert_eq!(LocalFunction::magnetization(&Window::new(0, 9).unwrap()).delta_norm().unwrap(), 40.0);
        assert_eq!(LocalFunction::product(0, 1).unwrap().delta_norm().unwrap(), 8.0);
        assert_eq!(LocalFunction::constant(3.0).delta_norm().unwrap(), 0.0);
    }
}
