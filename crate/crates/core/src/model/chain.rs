use crate::alphabet::SpinAlphabet;
use crate::error::{invalid, Result};
use crate::model::interaction::PairForm;
use crate::series::Bounded;

/// Log-weight of a finite block of `n` spins under a pair interaction:
///
/// `sum_{i<j} J(j-i) g(w_i) w_j + sum_i (w_i left_i + g(w_i) right_i)`
///
/// where `left_i`/`right_i` collect the couplings to frozen spins outside the
/// block (with `g` already applied to the left spins).
#[derive(Debug, Clone)]
pub struct ChainEnergy {
    alphabet: SpinAlphabet,
    form: PairForm,
    /// `J(1), ..., J(n-1)`.
    couplings: Vec<f64>,
    left: Vec<Bounded>,
    right: Vec<Bounded>,
}

impl ChainEnergy {
    pub fn new(
        alphabet: SpinAlphabet,
        form: PairForm,
        couplings: Vec<f64>,
        left: Vec<Bounded>,
        right: Vec<Bounded>,
    ) -> Result<Self> {
        let n = left.len();
        if n == 0 || right.len() != n || couplings.len() + 1 < n {
            return Err(invalid("inconsistent block energy dimensions"));
        }
        Ok(ChainEnergy { alphabet, form, couplings, left, right })
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn alphabet(&self) -> &SpinAlphabet {
        &self.alphabet
    }

    pub fn form(&self) -> PairForm {
        self.form
    }

    pub fn left_fields(&self) -> &[Bounded] {
        &self.left
    }

    pub fn right_fields(&self) -> &[Bounded] {
        &self.right
    }

    pub fn coupling(&self, r: usize) -> f64 {
        if r == 0 {
            0.0
        } else {
            self.couplings.get(r - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn log_weight(&self, word: &[i8]) -> f64 {
        let n = self.len();
        let mut s = 0.0;
        for i in 0..n {
            let mut h = self.right[i].value;
            for j in i + 1..n {
                h += self.couplings[j - i - 1] * word[j] as f64;
            }
            s += self.form.left_factor(word[i]) * h + word[i] as f64 * self.left[i].value;
        }
        s
    }

    /// Bound on the truncation error of every log-weight.
    pub fn error(&self) -> f64 {
        let vals = self.alphabet.values();
        let g = vals.iter().map(|&v| self.form.left_factor(v).abs()).fold(0.0, f64::max);
        let s = self.alphabet.max_abs();
        self.left.iter().map(|b| s * b.error).sum::<f64>() + self.right.iter().map(|b| g * b.error).sum::<f64>()
    }

    /// Log-weights of every block configuration in lexicographic order.
    pub fn log_weights(&self, budget: u128) -> Result<Vec<f64>> {
        let n = self.len();
        let total = self.alphabet.word_count(n, budget)?;
        let mut out = vec![0.0; total];
        let vals: Vec<f64> = self.alphabet.values().iter().map(|&v| v as f64).collect();
        let g: Vec<f64> = self.alphabet.values().iter().map(|&v| self.form.left_factor(v)).collect();
        let mut spins = vec![0.0; n];
        self.fill(n, 0, 1, 0.0, &vals, &g, &mut spins, &mut out);
        Ok(out)
    }

    // Places spins from the right end inward; `k` is the next free position plus one.
    #[allow(clippy::too_many_arguments)]
    fn fill(&self, k: usize, idx: usize, place: usize, acc: f64, vals: &[f64], g: &[f64], spins: &mut [f64], out: &mut [f64]) {
        if k == 0 {
            out[idx] = acc;
            return;
        }
        let pos = k - 1;
        let n = self.len();
        let mut h = self.right[pos].value;
        for m in pos + 1..n {
            h += self.couplings[m - pos - 1] * spins[m];
        }
        let l = self.left[pos].value;
        for (d, (&v, &gv)) in vals.iter().zip(g).enumerate() {
            spins[pos] = v;
            self.fill(pos, idx + d * place, place * vals.len(), acc + gv * h + v * l, vals, g, spins, out);
        }
    }

    /// Log-weights of each alphabet value at position `i`, the rest of `word` fixed.
    pub fn site_log_weights(&self, word: &[i8], i: usize) -> Vec<f64> {
        let n = self.len();
        let mut from_left = self.left[i].value;
        for j in 0..i {
            from_left += self.couplings[i - j - 1] * self.form.left_factor(word[j]);
        }
        let mut from_right = self.right[i].value;
        for j in i + 1..n {
            from_right += self.couplings[j - i - 1] * word[j] as f64;
        }
        self.alphabet
            .values()
            .iter()
            .map(|&s| s as f64 * from_left + self.form.left_factor(s) * from_right)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_matches_direct_weights() {
        let e = ChainEnergy::new(
            SpinAlphabet::new(vec![-1, 0, 2]).unwrap(),
            PairForm::Ising,
            vec![0.3, -0.2, 0.1],
            vec![Bounded::exact(0.5), Bounded::exact(-0.1), Bounded::ZERO, Bounded::exact(0.2)],
            vec![Bounded::exact(0.05), Bounded::ZERO, Bounded::exact(0.7), Bounded::exact(-0.3)],
        )
        .unwrap();
        let lw = e.log_weights(1 << 10).unwrap();
        for (i, w) in lw.iter().enumerate() {
            let word = e.alphabet().word(i, 4);
            assert!((e.log_weight(&word) - w).abs() < 1e-14);
        }
    }

    #[test]
    fn site_weights_are_differences_of_block_weights() {
        let e = ChainEnergy::new(
            SpinAlphabet::ising(),
            PairForm::RightField,
            vec![0.3, 0.2],
            vec![Bounded::exact(0.5), Bounded::exact(-0.1), Bounded::ZERO],
            vec![Bounded::exact(0.05), Bounded::ZERO, Bounded::exact(0.7)],
        )
        .unwrap();
        let mut w = vec![1, -1, 1];
        let site = e.site_log_weights(&w, 1);
        let minus = e.log_weight(&w);
        w[1] = 1;
        let other = e.log_weight(&w);
        assert!(((other - minus) - (site[1] - site[0])).abs() < 1e-14);
    }
}
