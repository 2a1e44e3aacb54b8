use serde::{Deserialize, Serialize};

use crate::alphabet::SpinAlphabet;
use crate::error::{Error, Result};
use crate::model::coupling::{Coupling, CouplingLaw};
use crate::model::potential::DEFAULT_TRUNCATION;
use crate::series::{zeta, Bounded};

/// Default tolerance for certified series.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Shape of the pair term `Phi_{i,j}` for `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairForm {
    /// `-J(j-i) w_i w_j`.
    Ising,
    /// `-J(j-i) w_j`: the right spin feels every site to its left.
    RightField,
}

impl PairForm {
    /// Factor contributed by the left spin of a pair.
    pub fn left_factor(self, a: i8) -> f64 {
        match self {
            PairForm::Ising => a as f64,
            PairForm::RightField => 1.0,
        }
    }
}

/// A translation invariant pair interaction on the whole line.
#[derive(Debug, Clone, PartialEq)]
pub struct PairInteraction {
    alphabet: SpinAlphabet,
    coupling: Coupling,
    form: PairForm,
    alpha: f64,
    beta: f64,
}

impl PairInteraction {
    pub fn new(alphabet: SpinAlphabet, coupling: Coupling, form: PairForm, alpha: f64, beta: f64) -> Result<Self> {
        Ok(PairInteraction { alphabet, coupling, form, alpha, beta })
    }

    /// Dyson interaction `-beta w_i w_j / |i-j|^alpha`, cut at the default truncation.
    pub fn dyson(alpha: f64, beta: f64) -> Result<Self> {
        let c = Coupling::power(beta, alpha, Some(DEFAULT_TRUNCATION))?;
        Self::new(SpinAlphabet::ising(), c, PairForm::Ising, alpha, beta)
    }

    pub fn with_coupling(&self, coupling: Coupling) -> Self {
        PairInteraction { coupling, ..self.clone() }
    }

    pub fn alphabet(&self) -> &SpinAlphabet {
        &self.alphabet
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn form(&self) -> PairForm {
        self.form
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_power_law(&self) -> bool {
        matches!(self.coupling.law(), CouplingLaw::Power { .. })
    }

    /// `Phi_{i,j}` for `j - i = r > 0` with spins `a` at `i` and `b` at `j`.
    pub fn pair_energy(&self, r: u64, a: i8, b: i8) -> f64 {
        -self.coupling.value(r) * self.form.left_factor(a) * b as f64
    }

    /// `delta(Phi_{0,r}) / |J(r)|`.
    pub fn oscillation_factor(&self) -> f64 {
        match self.form {
            PairForm::Ising => self.alphabet.product_span(),
            PairForm::RightField => self.alphabet.span(),
        }
    }

    /// `delta(Phi_{0,r})` for the model coupling.
    pub fn bond_oscillation(&self, r: u64) -> f64 {
        self.oscillation_factor() * self.coupling.value(r).abs()
    }

    /// Interdependence matrix entry `C(i,j) = delta(Phi_{i,j}) / 2`.
    pub fn cbar(&self, i: i64, j: i64) -> f64 {
        if i == j {
            0.0
        } else {
            0.5 * self.bond_oscillation(i.abs_diff(j))
        }
    }

    /// Largest variation of the single-site term `delta_k` contributed by a pair,
    /// per site: `(left, right)`.
    pub fn bond_site_oscillations(&self, r: u64) -> (f64, f64) {
        let j = self.coupling.value(r).abs();
        let a = &self.alphabet;
        match self.form {
            PairForm::Ising => (j * a.span() * a.max_abs(), j * a.span() * a.max_abs()),
            PairForm::RightField => (0.0, j * a.span()),
        }
    }

    /// Dobrushin constant `c = 1/2 sup_i sum_{L contains i} (|L|-1) delta(Phi_L)`,
    /// which for pair interactions is `sum_{r>=1} delta(Phi_{0,r})`, computed
    /// for the uncut coupling.
    pub fn dobrushin_bar_c(&self) -> Result<Bounded> {
        self.dobrushin_bar_c_within(DEFAULT_TOLERANCE)
    }

    pub fn dobrushin_bar_c_within(&self, tolerance: f64) -> Result<Bounded> {
        let total = self.coupling.abs_tail(1)? * self.oscillation_factor();
        if !total.value.is_finite() || total.error > tolerance {
            return Err(Error::Divergent(format!(
                "coupling sum certified only to {:e}, tolerance is {:e}",
                total.error, tolerance
            )));
        }
        Ok(total)
    }

    /// Fails unless the Dobrushin constant is certified below 1.
    pub fn require_uniqueness(&self) -> Result<f64> {
        let c = self.dobrushin_bar_c()?;
        if c.upper() >= 1.0 {
            return Err(Error::OutOfRegime(format!(
                "beta exceeds Dobrushin threshold (c = {:.6} >= 1)",
                c.value
            )));
        }
        Ok(c.value)
    }
}

/// Dobrushin threshold `1 / (2 zeta(alpha))` for the Ising Dyson interaction.
pub fn beta_du(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must exceed 1, got {alpha}")));
    }
    Ok(1.0 / (2.0 * zeta(alpha)?.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyson_bar_c_is_two_beta_zeta() {
        let i = PairInteraction::dyson(2.0, 0.1).unwrap();
        let c = i.dobrushin_bar_c().unwrap();
        assert!((c.value - 0.328_986_813_369_645_3).abs() < 1e-12);
        assert!(c.error < 1e-12);
    }

    #[test]
    fn bar_c_one_at_threshold() {
        let b = beta_du(2.0).unwrap();
        assert!((b - 0.303_963_550_927_013_3).abs() < 1e-12);
        let i = PairInteraction::dyson(2.0, b).unwrap();
        assert!((i.dobrushin_bar_c().unwrap().value - 1.0).abs() < 1e-12);
        assert!(i.require_uniqueness().is_err());
    }

    #[test]
    fn cbar_is_symmetric() {
        let i = PairInteraction::dyson(1.5, 0.2).unwrap();
        for a in -5..5 {
            for b in -5..5 {
                assert_eq!(i.cbar(a, b), i.cbar(b, a));
            }
        }
        assert_eq!(i.cbar(0, 2), 0.2 * 2f64.powf(-1.5));
    }
}
