use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default limit on the number of configurations enumerated exactly.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 20;

/// The single-site state space `E`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinAlphabet {
    values: Vec<i8>,
}

impl SpinAlphabet {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("alphabet needs at least two values"));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(invalid(format!("duplicate spin value {v}")));
            }
        }
        Ok(SpinAlphabet { values })
    }

    /// The Ising alphabet `{-1, +1}`.
    pub fn ising() -> Self {
        SpinAlphabet { values: vec![-1, 1] }
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: i8) -> bool {
        self.values.contains(&v)
    }

    pub fn index_of(&self, v: i8) -> Option<usize> {
        self.values.iter().position(|&x| x == v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| (*v as f64).abs()).fold(0.0, f64::max)
    }

    /// `max E - min E`.
    pub fn span(&self) -> f64 {
        let max = *self.values.iter().max().unwrap() as f64;
        let min = *self.values.iter().min().unwrap() as f64;
        max - min
    }

    /// Variation of the product `a*b` over `a, b` in `E`.
    pub fn product_span(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &a in &self.values {
            for &b in &self.values {
                let p = a as f64 * b as f64;
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
        hi - lo
    }

    pub fn is_ising(&self) -> bool {
        self.values == [-1, 1]
    }

    pub fn check(&self, v: i8) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::SpinOutsideAlphabet(v))
        }
    }

    pub fn check_word(&self, word: &[i8]) -> Result<()> {
        word.iter().try_for_each(|&v| self.check(v))
    }

    /// Number of words of length `len`, checked against `budget`.
    pub fn word_count(&self, len: usize, budget: u128) -> Result<usize> {
        let q = self.values.len() as u128;
        let mut n: u128 = 1;
        for _ in 0..len {
            n = n.saturating_mul(q);
            if n > budget {
                return Err(Error::BudgetExceeded {
                    needed: q.checked_pow(len as u32).unwrap_or(u128::MAX),
                    budget,
                });
            }
        }
        Ok(n as usize)
    }

    /// Word with lexicographic rank `index`; position 0 is the most significant digit.
    pub fn word(&self, mut index: usize, len: usize) -> Vec<i8> {
        let q = self.values.len();
        let mut w = vec![self.values[0]; len];
        for slot in w.iter_mut().rev() {
            *slot = self.values[index % q];
            index /= q;
        }
        w
    }

    pub fn word_index(&self, word: &[i8]) -> Result<usize> {
        let q = self.values.len();
        let mut idx = 0usize;
        for &v in word {
            let d = self.index_of(v).ok_or(Error::SpinOutsideAlphabet(v))?;
            idx = idx * q + d;
        }
        Ok(idx)
    }
}

impl Default for SpinAlphabet {
    fn default() -> Self {
        SpinAlphabet::ising()
    }
}

impl TryFrom<Vec<i8>> for SpinAlphabet {
    type Error = Error;
    fn try_from(values: Vec<i8>) -> Result<Self> {
        SpinAlphabet::new(values)
    }
}

impl From<SpinAlphabet> for Vec<i8> {
    fn from(a: SpinAlphabet) -> Vec<i8> {
        a.values
    }
}

/// `+-+` for Ising words, comma separated values otherwise.
pub fn format_word(word: &[i8]) -> String {
    if word.iter().all(|&v| v == 1 || v == -1) {
        word.iter().map(|&v| if v == 1 { '+' } else { '-' }).collect()
    } else {
        word.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Inverse of [`format_word`].
pub fn parse_word(s: &str) -> Result<Vec<i8>> {
    let s = s.trim();
    if s.chars().all(|c| c == '+' || c == '-') {
        return Ok(s.chars().map(|c| if c == '+' { 1 } else { -1 }).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<i8>().map_err(|_| invalid(format!("bad spin word {s:?}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order() {
        let a = SpinAlphabet::ising();
        assert_eq!(a.word(0, 3), vec![-1, -1, -1]);
        assert_eq!(a.word(1, 3), vec![-1, -1, 1]);
        assert_eq!(a.word(4, 3), vec![1, -1, -1]);
        for i in 0..8 {
            assert_eq!(a.word_index(&a.word(i, 3)).unwrap(), i);
        }
    }

    #[test]
    fn rejects_degenerate_alphabets() {
        assert!(SpinAlphabet::new(vec![1]).is_err());
        assert!(SpinAlphabet::new(vec![1, 1]).is_err());
        assert!(SpinAlphabet::new(vec![-1, 0, 1]).is_ok());
    }

    #[test]
    fn budget_is_enforced() {
        let a = SpinAlphabet::ising();
        assert_eq!(a.word_count(20, DEFAULT_ENUMERATION_BUDGET).unwrap(), 1 << 20);
        assert!(matches!(
            a.word_count(21, DEFAULT_ENUMERATION_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn word_format_round_trip() {
        let w = vec![1, -1, -1, 1];
        assert_eq!(format_word(&w), "+--+");
        assert_eq!(parse_word("+--+").unwrap(), w);
        assert_eq!(parse_word(&format_word(&[0, 1, -1])).unwrap(), vec![0, 1, -1]);
    }
}
