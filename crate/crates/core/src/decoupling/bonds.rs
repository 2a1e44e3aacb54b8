use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::PairInteraction;

/// A bond `{-i, j}` crossing the origin, `i >= 1`, `j >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub i: u64,
    pub j: u64,
}

impl Bond {
    pub fn new(i: u64, j: u64) -> Result<Self> {
        if i == 0 {
            return Err(invalid("crossing bonds need a site left of the origin"));
        }
        Ok(Bond { i, j })
    }

    /// Distance between the two sites.
    pub fn length(&self) -> u64 {
        self.i + self.j
    }
}

/// Enumeration of the crossing bonds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BondOrder {
    /// Square shells: all bonds with `i, j <= N` come before any bond
    /// with `max(i, j) = N + 1`. Within a shell, ordered by `i` then `j`.
    #[default]
    Square,
    /// By length `i + j`, then by `i`.
    Diagonal,
}

impl BondOrder {
    pub fn bond(self, rank: u64) -> Bond {
        match self {
            BondOrder::Square => {
                // shell n holds ranks (n-1)n .. n(n+1)
                let mut n = ((rank as f64).sqrt() as u64).max(1);
                while (n - 1) * n > rank {
                    n -= 1;
                }
                while n * (n + 1) <= rank {
                    n += 1;
                }
                let k = rank - (n - 1) * n;
                if k < n - 1 {
                    Bond { i: k + 1, j: n }
                } else {
                    Bond { i: n, j: k - (n - 1) }
                }
            }
            BondOrder::Diagonal => {
                let mut s = (((2 * rank) as f64).sqrt() as u64).max(1);
                while s * (s - 1) / 2 > rank {
                    s -= 1;
                }
                while s * (s + 1) / 2 <= rank {
                    s += 1;
                }
                let i = rank - s * (s - 1) / 2 + 1;
                Bond { i, j: s - i }
            }
        }
    }

    pub fn rank(self, b: Bond) -> u64 {
        match self {
            BondOrder::Square => {
                let n = b.i.max(b.j).max(1);
                let base = (n - 1) * n;
                if b.i < n {
                    base + b.i - 1
                } else {
                    base + n - 1 + b.j
                }
            }
            BondOrder::Diagonal => {
                let s = b.length();
                s * (s - 1) / 2 + b.i - 1
            }
        }
    }

    /// The first `count` bonds.
    pub fn bonds(self, count: u64) -> Vec<Bond> {
        (0..count).map(|r| self.bond(r)).collect()
    }

    /// Number of bonds with `i, j <= n` (all of which come first in square order).
    pub fn square_count(n: u64) -> u64 {
        n * (n + 1)
    }
}

/// `W_N(xi, sigma) = sum_{i=1}^N sum_{j=0}^N -J(i+j) g(xi_{-i}) sigma_j`
/// with `xi[i-1] = xi_{-i}` and `sigma[j] = sigma_j`.
pub fn left_right_energy(inter: &PairInteraction, xi: &[i8], sigma: &[i8]) -> Result<f64> {
    if sigma.len() != xi.len() + 1 {
        return Err(invalid("sigma must have one more site than xi"));
    }
    inter.alphabet().check_word(xi)?;
    inter.alphabet().check_word(sigma)?;
    let bonds = BondOrder::Square.bonds(BondOrder::square_count(xi.len() as u64));
    Ok(bond_energy(inter, &bonds, xi, sigma))
}

/// `-sum_b J(|b|) g(xi_{-i}) sigma_j` over the given bonds.
pub fn bond_energy(inter: &PairInteraction, bonds: &[Bond], xi: &[i8], sigma: &[i8]) -> f64 {
    let form = inter.form();
    let c = inter.coupling();
    -bonds
        .iter()
        .map(|b| c.value(b.length()) * form.left_factor(xi[(b.i - 1) as usize]) * sigma[b.j as usize] as f64)
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_are_bijective() {
        for order in [BondOrder::Square, BondOrder::Diagonal] {
            for r in 0..500 {
                assert_eq!(order.rank(order.bond(r)), r);
            }
        }
        assert_eq!(BondOrder::Square.bonds(2), vec![Bond { i: 1, j: 0 }, Bond { i: 1, j: 1 }]);
        assert_eq!(BondOrder::Diagonal.bond(2), Bond { i: 2, j: 0 });
    }

    #[test]
    fn square_shells_fill_squares() {
        let b = BondOrder::Square.bonds(BondOrder::square_count(4));
        assert!(b.iter().all(|b| b.i <= 4 && b.j <= 4));
        assert_eq!(b.len(), 20);
    }

    #[test]
    fn two_term_energy() {
        let inter = PairInteraction::dyson(2.0, 0.1).unwrap();
        let w = left_right_energy(&inter, &[1], &[1, 1]).unwrap();
        assert!((w + 0.125).abs() < 1e-15);
    }
}
