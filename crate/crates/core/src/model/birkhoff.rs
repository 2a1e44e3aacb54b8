use crate::config::Tail;
use crate::error::{invalid, Result};
use crate::model::potential::PotentialSpec;
use crate::series::Bounded;

/// `S_n phi(word . tail) = sum_{k<n} phi(S^k(word . tail))`.
pub fn birkhoff_sum(spec: &PotentialSpec, word: &[i8], tail: &Tail) -> Result<Bounded> {
    if word.is_empty() {
        return Err(invalid("Birkhoff sums need n >= 1"));
    }
    spec.alphabet().check_word(word)?;
    tail.check(spec.alphabet())?;
    let c = spec.coupling()?;
    let form = spec.form();
    let pattern = tail.pattern_f64();
    let w: Vec<f64> = word.iter().map(|&v| v as f64).collect();
    let mut total = Bounded::ZERO;
    for k in 0..word.len() {
        let g = form.left_factor(word[k]);
        if g == 0.0 {
            continue;
        }
        total = total + c.weighted_sum(1, &w[k + 1..], Some(&pattern))? * g;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BETA_ZETA2: f64 = 0.164_493_406_684_822_64;

    #[test]
    fn plus_plus_on_plus_tail() {
        let s = PotentialSpec::dyson(2.0, 0.1).unwrap();
        let b = birkhoff_sum(&s, &[1, 1], &Tail::AllPlus).unwrap();
        // two copies of beta*zeta(2) minus the cut tails
        assert!(b.contains(2.0 * BETA_ZETA2, 1e-14));
        assert!(b.error < 1e-5);
    }

    #[test]
    fn plus_minus_on_plus_tail() {
        let s = PotentialSpec::dyson(2.0, 0.1).unwrap();
        let b = birkhoff_sum(&s, &[1, -1], &Tail::AllPlus).unwrap();
        let expected = 0.1 * (10.0 * BETA_ZETA2 - 2.0) - BETA_ZETA2;
        assert!(b.contains(expected, 1e-14));
        assert!((b.value + 0.2).abs() < 1e-4);
    }

    #[test]
    fn zero_beta_gives_zero() {
        let s = PotentialSpec::dyson(1.5, 0.0).unwrap();
        let b = birkhoff_sum(&s, &[1, -1, 1, 1, -1], &Tail::Alternating).unwrap();
        assert_eq!(b.value, 0.0);
        assert_eq!(b.error, 0.0);
    }
}
