use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::alphabet::{format_word, SpinAlphabet, DEFAULT_ENUMERATION_BUDGET};
use crate::config::{Boundary, Side, Tail, Window};
use crate::error::{invalid, Result};
use crate::model::{ChainEnergy, PairForm, PairInteraction, PotentialKind, PotentialSpec};
use crate::series::Bounded;
use crate::transfer::softmax;

/// Energy of a window under `inter`, with exterior couplings taken from `boundary`.
pub fn window_energy(inter: &PairInteraction, window: &Window, boundary: &Boundary) -> Result<ChainEnergy> {
    boundary.check(inter.alphabet())?;
    let n = window.len();
    let c = inter.coupling();
    let form = inter.form();
    let g = |v: &i8| form.left_factor(*v);
    let left_head: Vec<f64> = boundary.left.head.iter().map(g).collect();
    let left_tail: Option<Vec<f64>> = boundary.left.tail.as_ref().map(|t| t.pattern().iter().map(g).collect());
    let right_head: Vec<f64> = boundary.right.head.iter().map(|&v| v as f64).collect();
    let right_tail = boundary.right.tail.as_ref().map(Tail::pattern_f64);
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for i in 0..n {
        left.push(c.weighted_sum(i as u64 + 1, &left_head, left_tail.as_deref())?);
        right.push(c.weighted_sum((n - i) as u64, &right_head, right_tail.as_deref())?);
    }
    ChainEnergy::new(inter.alphabet().clone(), form, (1..n as u64).map(|r| c.value(r)).collect(), left, right)
}

/// `H_Lambda(config | boundary)` with its truncation bound.
pub fn hamiltonian(inter: &PairInteraction, window: &Window, config: &[i8], boundary: &Boundary) -> Result<Bounded> {
    if config.len() != window.len() {
        return Err(invalid("configuration does not match the window"));
    }
    inter.alphabet().check_word(config)?;
    let e = window_energy(inter, window, boundary)?;
    Ok(Bounded::new(-e.log_weight(config), e.error()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMeta {
    pub interaction: String,
    pub boundary: Boundary,
    /// Bound on the truncation error of each log-weight.
    pub log_weight_error: f64,
}

/// Exact finite-volume Gibbs distribution on a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMeasure {
    pub window: Window,
    pub alphabet: SpinAlphabet,
    pub probs: Vec<f64>,
    pub meta: WindowMeta,
}

pub fn describe(inter: &PairInteraction) -> String {
    let form = match inter.form() {
        PairForm::Ising => "ising",
        PairForm::RightField => "right_field",
    };
    let range = inter.coupling().range().map_or("none".to_string(), |t| t.to_string());
    format!("{form} alpha={} beta={} range={range}", inter.alpha(), inter.beta())
}

pub fn window_gibbs(inter: &PairInteraction, window: &Window, boundary: &Boundary) -> Result<WindowMeasure> {
    window_gibbs_within(inter, window, boundary, DEFAULT_ENUMERATION_BUDGET)
}

pub fn window_gibbs_within(
    inter: &PairInteraction,
    window: &Window,
    boundary: &Boundary,
    budget: u128,
) -> Result<WindowMeasure> {
    inter.alphabet().word_count(window.len(), budget)?;
    let e = window_energy(inter, window, boundary)?;
    let lw = e.log_weights(budget)?;
    Ok(WindowMeasure {
        window: *window,
        alphabet: inter.alphabet().clone(),
        probs: softmax(&lw),
        meta: WindowMeta { interaction: describe(inter), boundary: boundary.clone(), log_weight_error: e.error() },
    })
}

impl WindowMeasure {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn word(&self, index: usize) -> Vec<i8> {
        self.alphabet.word(index, self.window.len())
    }

    pub fn prob(&self, word: &[i8]) -> Result<f64> {
        if word.len() != self.window.len() {
            return Err(invalid("word does not match the window"));
        }
        Ok(self.probs[self.alphabet.word_index(word)?])
    }

    /// Bound on `|p - p_uncut|` for each probability.
    pub fn probability_error(&self) -> f64 {
        (2.0 * self.meta.log_weight_error).exp_m1()
    }

    pub fn expectation(&self, f: impl Fn(&[i8]) -> f64) -> f64 {
        let n = self.window.len();
        self.probs.iter().enumerate().map(|(i, p)| p * f(&self.alphabet.word(i, n))).sum()
    }

    /// Law of the spins on `sub`, in lexicographic order.
    pub fn marginal(&self, sub: &Window) -> Result<Vec<f64>> {
        if !self.window.contains_window(sub) {
            return Err(invalid("sub-window outside the window"));
        }
        let q = self.alphabet.len();
        let n = self.window.len();
        let after = (self.window.hi - sub.hi) as u32;
        let stride = q.pow(after);
        let size = q.pow(sub.len() as u32);
        let mut out = vec![0.0; size];
        for (i, p) in self.probs.iter().enumerate() {
            out[(i / stride) % size] += p;
        }
        debug_assert!(n >= sub.len());
        Ok(out)
    }

    /// Probability that site `i` carries `value`.
    pub fn site_marginal(&self, i: i64, value: i8) -> Result<f64> {
        let m = self.marginal(&Window::site(i))?;
        let d = self.alphabet.index_of(value).ok_or(crate::error::Error::SpinOutsideAlphabet(value))?;
        Ok(m[d])
    }

    /// Rows `word,probability`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["word", "probability"])?;
        for (i, p) in self.probs.iter().enumerate() {
            w.write_record([format_word(&self.word(i)), format!("{p:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `gamma_{0}(sigma_0 | omega)` for the whole-line specification of a
/// potential, in closed form: `exp(sigma_0 h) / sum_s exp(s h)` with
/// `h = sum_k J(k)(omega_k + omega_{-k})` for Dyson-type potentials and
/// `h = sum_k J(k)` for the product type.
pub fn whole_line_single_site_kernel(spec: &PotentialSpec, sigma0: i8, left: &Side, right: &Side) -> Result<Bounded> {
    let a = spec.alphabet();
    a.check(sigma0)?;
    left.check(a)?;
    right.check(a)?;
    let c = spec.coupling()?;
    let side_field = |s: &Side| -> Result<Bounded> {
        let head: Vec<f64> = s.head.iter().map(|&v| v as f64).collect();
        c.weighted_sum(1, &head, s.tail.as_ref().map(Tail::pattern_f64).as_deref())
    };
    let h = match spec.kind() {
        PotentialKind::Dyson | PotentialKind::CustomPair => side_field(left)? + side_field(right)?,
        PotentialKind::ProductType => {
            let ones = Side { head: vec![1; left.head.len()], tail: left.tail.as_ref().map(|_| Tail::AllPlus) };
            side_field(&ones)?
        }
    };
    let lw: Vec<f64> = a.values().iter().map(|&s| s as f64 * h.value).collect();
    let p = softmax(&lw);
    let idx = a.index_of(sigma0).unwrap();
    Ok(Bounded::new(p[idx], a.span() * h.error))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyson(beta: f64) -> PairInteraction {
        PairInteraction::dyson(2.0, beta).unwrap()
    }

    #[test]
    fn single_site_plus_boundary() {
        let m = window_gibbs(&dyson(0.1), &Window::site(0), &Boundary::uniform(Tail::AllPlus)).unwrap();
        let expect = 1.0 / (1.0 + (-0.4 * 1.644_934_066_848_226_4f64).exp());
        assert!((m.probs[1] - expect).abs() < 1e-5);
        assert!(m.probability_error() < 1e-4);
    }

    #[test]
    fn hamiltonian_of_single_plus_site() {
        let h = hamiltonian(&dyson(0.1), &Window::site(0), &[1], &Boundary::uniform(Tail::AllPlus)).unwrap();
        assert!(h.contains(-0.2 * 1.644_934_066_848_226_4, 1e-14));
    }

    #[test]
    fn marginal_sums_out_other_sites() {
        let w = Window::new(-1, 1).unwrap();
        let m = window_gibbs(&dyson(0.3), &w, &Boundary::tails(Tail::AllPlus, Tail::Alternating)).unwrap();
        let mid = m.marginal(&Window::site(0)).unwrap();
        let direct: f64 = (0..8).filter(|i| (i / 2) % 2 == 1).map(|i| m.probs[i]).sum();
        assert!((mid[1] - direct).abs() < 1e-15);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("word,probability\n---,"));
    }

    #[test]
    fn mixed_tails_cancel() {
        let s = PotentialSpec::dyson(2.0, 0.1).unwrap();
        let p = whole_line_single_site_kernel(&s, 1, &Side::frozen(Tail::AllMinus), &Side::frozen(Tail::AllPlus))
            .unwrap();
        assert_eq!(p.value, 0.5);
    }
}
