use serde::{Deserialize, Serialize};

use crate::alphabet::SpinAlphabet;
use crate::config::HalfLineConfig;
use crate::error::{invalid, Error, Result};
use crate::model::coupling::{Coupling, PowerEnvelope};
use crate::model::interaction::{PairForm, PairInteraction};
use crate::series::Bounded;

/// Default distance cutoff for series evaluation.
pub const DEFAULT_TRUNCATION: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// `phi(x) = beta * x_0 * sum_n x_n / n^alpha`.
    Dyson,
    /// `phi(x) = beta * sum_n x_n / n^alpha`.
    ProductType,
    /// `phi(x) = x_0 * sum_n J(n) x_n` with tabulated `J`.
    CustomPair,
}

/// Tabulated coupling for [`PotentialKind::CustomPair`]: `J(r) = beta * values[r-1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCoupling {
    pub values: Vec<f64>,
    /// Decay bound past the table; required to evaluate on infinite tails.
    #[serde(default)]
    pub envelope: Option<PowerEnvelope>,
}

/// A half-line pair potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct PotentialSpec {
    kind: PotentialKind,
    alpha: f64,
    beta: f64,
    tail_truncation: u64,
    custom_coupling: Option<TabulatedCoupling>,
    alphabet: SpinAlphabet,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    kind: PotentialKind,
    alpha: f64,
    beta: f64,
    #[serde(default = "default_truncation")]
    tail_truncation: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    custom_coupling: Option<TabulatedCoupling>,
    #[serde(default)]
    alphabet: SpinAlphabet,
}

fn default_truncation() -> u64 {
    DEFAULT_TRUNCATION
}

impl TryFrom<RawSpec> for PotentialSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        PotentialSpec::build(r.kind, r.alpha, r.beta, r.tail_truncation, r.custom_coupling, r.alphabet)
    }
}

impl From<PotentialSpec> for RawSpec {
    fn from(s: PotentialSpec) -> RawSpec {
        RawSpec {
            kind: s.kind,
            alpha: s.alpha,
            beta: s.beta,
            tail_truncation: s.tail_truncation,
            custom_coupling: s.custom_coupling,
            alphabet: s.alphabet,
        }
    }
}

impl PotentialSpec {
    fn build(
        kind: PotentialKind,
        alpha: f64,
        beta: f64,
        tail_truncation: u64,
        custom_coupling: Option<TabulatedCoupling>,
        alphabet: SpinAlphabet,
    ) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(invalid(format!("alpha must exceed 1, got {alpha}")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(invalid(format!("beta must be finite and >= 0, got {beta}")));
        }
        if tail_truncation == 0 {
            return Err(invalid("tail truncation must be at least 1"));
        }
        match (kind, &custom_coupling) {
            (PotentialKind::CustomPair, None) => return Err(invalid("custom pair potential needs a coupling table")),
            (PotentialKind::Dyson | PotentialKind::ProductType, Some(_)) => {
                return Err(invalid("coupling table is only meaningful for custom pair potentials"))
            }
            _ => {}
        }
        let spec = PotentialSpec { kind, alpha, beta, tail_truncation, custom_coupling, alphabet };
        spec.coupling()?;
        Ok(spec)
    }

    pub fn dyson(alpha: f64, beta: f64) -> Result<Self> {
        Self::build(PotentialKind::Dyson, alpha, beta, DEFAULT_TRUNCATION, None, SpinAlphabet::ising())
    }

    pub fn product_type(alpha: f64, beta: f64) -> Result<Self> {
        Self::build(PotentialKind::ProductType, alpha, beta, DEFAULT_TRUNCATION, None, SpinAlphabet::ising())
    }

    pub fn custom(alpha: f64, beta: f64, table: TabulatedCoupling) -> Result<Self> {
        Self::build(PotentialKind::CustomPair, alpha, beta, DEFAULT_TRUNCATION, Some(table), SpinAlphabet::ising())
    }

    pub fn new(kind: PotentialKind, alpha: f64, beta: f64) -> Result<Self> {
        Self::build(kind, alpha, beta, DEFAULT_TRUNCATION, None, SpinAlphabet::ising())
    }

    pub fn with_truncation(mut self, t: u64) -> Result<Self> {
        if t == 0 {
            return Err(invalid("tail truncation must be at least 1"));
        }
        self.tail_truncation = t;
        Ok(self)
    }

    pub fn with_alphabet(mut self, alphabet: SpinAlphabet) -> Self {
        self.alphabet = alphabet;
        self
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::build(self.kind, self.alpha, beta, self.tail_truncation, self.custom_coupling.clone(), self.alphabet.clone())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tail_truncation(&self) -> u64 {
        self.tail_truncation
    }

    pub fn alphabet(&self) -> &SpinAlphabet {
        &self.alphabet
    }

    pub fn form(&self) -> PairForm {
        match self.kind {
            PotentialKind::ProductType => PairForm::RightField,
            PotentialKind::Dyson | PotentialKind::CustomPair => PairForm::Ising,
        }
    }

    /// Coupling cut at the tail truncation.
    pub fn coupling(&self) -> Result<Coupling> {
        let range = Some(self.tail_truncation);
        match (&self.kind, &self.custom_coupling) {
            (PotentialKind::CustomPair, Some(t)) => Coupling::table(self.beta, t.values.clone(), t.envelope, range),
            _ => Coupling::power(self.beta, self.alpha, range),
        }
    }

    /// The whole-line pair interaction associated with this potential,
    /// `phi = -sum over pairs {0, n}` of the pair energies.
    pub fn interaction(&self) -> Result<PairInteraction> {
        PairInteraction::new(self.alphabet.clone(), self.coupling()?, self.form(), self.alpha, self.beta)
    }

    /// Weight of the origin spin in each term of the series.
    pub fn origin_factor(&self, x0: i8) -> f64 {
        self.form().left_factor(x0)
    }

    /// `phi(x)` with the series cut at the tail truncation, and a bound on the
    /// distance to the uncut value.
    pub fn evaluate(&self, config: &HalfLineConfig) -> Result<Bounded> {
        config.check(&self.alphabet)?;
        let x0 = config.spin(0);
        let rest = config.shifted(1);
        let head: Vec<f64> = rest.word.iter().map(|&v| v as f64).collect();
        let sum = self.coupling()?.weighted_sum(1, &head, Some(&rest.tail.pattern_f64()))?;
        Ok(sum * self.origin_factor(x0))
    }

    /// `delta_k(phi)`: the largest change of `phi` under a change of the spin at `k`.
    pub fn site_oscillation(&self, k: u64) -> Result<Bounded> {
        let c = self.coupling()?.untruncated();
        let a = &self.alphabet;
        let gmax = self.max_origin_factor();
        match (self.form(), k) {
            (PairForm::Ising, 0) => Ok(c.abs_tail(1)? * (a.span() * a.max_abs())),
            (PairForm::RightField, 0) => Ok(Bounded::ZERO),
            (_, k) => Ok(Bounded::exact(gmax * a.span() * c_abs(&c, k))),
        }
    }

    /// `v_k(phi)`: the largest change of `phi` between configurations agreeing on `0..k`.
    pub fn variation(&self, k: u64) -> Result<Bounded> {
        let c = self.coupling()?.untruncated();
        let a = &self.alphabet;
        let gmax = self.max_origin_factor();
        Ok(c.abs_tail(k.max(1))? * (gmax * a.span()))
    }

    fn max_origin_factor(&self) -> f64 {
        self.alphabet.values().iter().map(|&v| self.origin_factor(v).abs()).fold(0.0, f64::max)
    }
}

fn c_abs(c: &Coupling, r: u64) -> f64 {
    c.value(r).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tail;

    #[test]
    fn json_descriptor_round_trip() {
        let s = PotentialSpec::from_json(r#"{"kind":"dyson","alpha":2.0,"beta":0.1,"tail_truncation":1000}"#).unwrap();
        assert_eq!(s.kind(), PotentialKind::Dyson);
        assert_eq!(s.tail_truncation(), 1000);
        let back = PotentialSpec::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(PotentialSpec::from_json(r#"{"kind":"dyson","alpha":1.0,"beta":0.1}"#).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PotentialSpec::dyson(1.0, 0.1).is_err());
        assert!(PotentialSpec::dyson(2.0, -0.1).is_err());
        let s = PotentialSpec::dyson(2.0, 0.1).unwrap();
        let bad = HalfLineConfig::new(vec![1, 0], Tail::AllPlus);
        assert!(matches!(s.evaluate(&bad), Err(Error::SpinOutsideAlphabet(0))));
    }

    #[test]
    fn custom_pair_without_envelope_refuses_tails() {
        let table = TabulatedCoupling { values: vec![1.0, 0.5, 0.25], envelope: None };
        let s = PotentialSpec::custom(2.0, 0.1, table).unwrap();
        let x = HalfLineConfig::tail_only(Tail::AllPlus);
        assert!(matches!(s.evaluate(&x), Err(Error::UncertifiedTail)));
    }
}
