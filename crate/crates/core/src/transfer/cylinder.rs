use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::alphabet::{SpinAlphabet, DEFAULT_ENUMERATION_BUDGET};
use crate::config::{HalfLineConfig, Tail};
use crate::error::{invalid, Result};

/// A function of the first `depth` spins of a half-line configuration.
///
/// `values` is indexed by words in lexicographic alphabet order, position 0
/// most significant. `tail` completes words shorter than `depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderFunction {
    alphabet: SpinAlphabet,
    depth: usize,
    values: Vec<f64>,
    tail: Tail,
}

impl CylinderFunction {
    pub fn new(alphabet: SpinAlphabet, depth: usize, values: Vec<f64>, tail: Tail) -> Result<Self> {
        if depth == 0 {
            return Err(invalid("cylinder depth must be at least 1"));
        }
        let n = alphabet.word_count(depth, DEFAULT_ENUMERATION_BUDGET)?;
        if values.len() != n {
            return Err(invalid(format!("expected {n} values for depth {depth}, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("cylinder function values must be finite"));
        }
        tail.check(&alphabet)?;
        Ok(CylinderFunction { alphabet, depth, values, tail })
    }

    pub fn constant(alphabet: SpinAlphabet, depth: usize, c: f64, tail: Tail) -> Result<Self> {
        let n = alphabet.word_count(depth, DEFAULT_ENUMERATION_BUDGET)?;
        Self::new(alphabet, depth, vec![c; n], tail)
    }

    pub fn from_fn(alphabet: SpinAlphabet, depth: usize, tail: Tail, f: impl Fn(&[i8]) -> f64) -> Result<Self> {
        let n = alphabet.word_count(depth, DEFAULT_ENUMERATION_BUDGET)?;
        let values = (0..n).map(|i| f(&alphabet.word(i, depth))).collect();
        Self::new(alphabet, depth, values, tail)
    }

    /// Indicator of the cylinder `[prefix]`.
    pub fn indicator(alphabet: SpinAlphabet, depth: usize, prefix: &[i8], tail: Tail) -> Result<Self> {
        if prefix.len() > depth {
            return Err(invalid("cylinder prefix is longer than the depth"));
        }
        alphabet.check_word(prefix)?;
        Self::from_fn(alphabet, depth, tail, |w| if w.starts_with(prefix) { 1.0 } else { 0.0 })
    }

    pub fn alphabet(&self) -> &SpinAlphabet {
        &self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value on `word`, completed by the function's tail if shorter than `depth`.
    pub fn value_of(&self, word: &[i8]) -> Result<f64> {
        self.eval(&HalfLineConfig::new(word.to_vec(), self.tail.clone()))
    }

    pub fn eval(&self, config: &HalfLineConfig) -> Result<f64> {
        let idx = self.alphabet.word_index(&config.prefix(self.depth))?;
        Ok(self.values[idx])
    }

    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Little-endian 64-bit floats in word order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_uses_prefix_and_tail() {
        let a = SpinAlphabet::ising();
        let f = CylinderFunction::from_fn(a, 3, Tail::AllMinus, |w| w.iter().map(|&v| v as f64).sum()).unwrap();
        assert_eq!(f.value_of(&[1, 1, 1, -1]).unwrap(), 3.0);
        assert_eq!(f.value_of(&[1]).unwrap(), -1.0);
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 64);
        assert_eq!(f64::from_le_bytes(buf[..8].try_into().unwrap()), -3.0);
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(CylinderFunction::new(SpinAlphabet::ising(), 2, vec![1.0; 3], Tail::AllPlus).is_err());
    }
}
