//! Configurations: finite words completed by frozen periodic tails.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alphabet::{format_word, parse_word, SpinAlphabet};
use crate::error::{invalid, Error, Result};

/// A frozen, eventually periodic continuation of a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    AllPlus,
    AllMinus,
    /// `+ - + - ...` starting with `+`.
    Alternating,
    Periodic(Vec<i8>),
}

impl Tail {
    pub fn pattern(&self) -> &[i8] {
        match self {
            Tail::AllPlus => &[1],
            Tail::AllMinus => &[-1],
            Tail::Alternating => &[1, -1],
            Tail::Periodic(w) => w,
        }
    }

    /// Spin at `offset` steps into the tail.
    pub fn spin(&self, offset: usize) -> i8 {
        let p = self.pattern();
        p[offset % p.len()]
    }

    pub fn flipped(&self) -> Tail {
        match self {
            Tail::AllPlus => Tail::AllMinus,
            Tail::AllMinus => Tail::AllPlus,
            Tail::Alternating => Tail::Periodic(vec![-1, 1]),
            Tail::Periodic(w) => Tail::Periodic(w.iter().map(|v| -v).collect()),
        }
    }

    /// The tail seen after dropping its first `k` spins.
    pub fn shifted(&self, k: usize) -> Tail {
        let p = self.pattern();
        let r = k % p.len();
        if r == 0 {
            return self.clone();
        }
        let mut w = p[r..].to_vec();
        w.extend_from_slice(&p[..r]);
        Tail::Periodic(w)
    }

    pub fn check(&self, alphabet: &SpinAlphabet) -> Result<()> {
        if self.pattern().is_empty() {
            return Err(invalid("periodic tail needs a nonempty word"));
        }
        alphabet.check_word(self.pattern())
    }

    pub fn pattern_f64(&self) -> Vec<f64> {
        self.pattern().iter().map(|&v| v as f64).collect()
    }
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tail::AllPlus => write!(f, "plus"),
            Tail::AllMinus => write!(f, "minus"),
            Tail::Alternating => write!(f, "alternating"),
            Tail::Periodic(w) => write!(f, "periodic:{}", format_word(w)),
        }
    }
}

impl FromStr for Tail {
    type Err = Error;
    fn from_str(s: &str) -> Result<Tail> {
        match s {
            "plus" | "all-plus" | "+" => Ok(Tail::AllPlus),
            "minus" | "all-minus" | "-" => Ok(Tail::AllMinus),
            "alternating" => Ok(Tail::Alternating),
            _ => match s.strip_prefix("periodic:") {
                Some(w) => {
                    let w = parse_word(w)?;
                    if w.is_empty() {
                        return Err(invalid("periodic tail needs a nonempty word"));
                    }
                    Ok(Tail::Periodic(w))
                }
                None => Err(invalid(format!("unknown tail {s:?}"))),
            },
        }
    }
}

/// A half-line configuration `word . tail` on sites `0, 1, 2, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLineConfig {
    pub word: Vec<i8>,
    pub tail: Tail,
}

impl HalfLineConfig {
    pub fn new(word: Vec<i8>, tail: Tail) -> Self {
        HalfLineConfig { word, tail }
    }

    pub fn tail_only(tail: Tail) -> Self {
        HalfLineConfig { word: Vec::new(), tail }
    }

    pub fn spin(&self, k: usize) -> i8 {
        if k < self.word.len() {
            self.word[k]
        } else {
            self.tail.spin(k - self.word.len())
        }
    }

    /// First `n` spins.
    pub fn prefix(&self, n: usize) -> Vec<i8> {
        (0..n).map(|k| self.spin(k)).collect()
    }

    /// The configuration seen from site `k`.
    pub fn shifted(&self, k: usize) -> HalfLineConfig {
        if k <= self.word.len() {
            HalfLineConfig::new(self.word[k..].to_vec(), self.tail.clone())
        } else {
            HalfLineConfig::tail_only(self.tail.shifted(k - self.word.len()))
        }
    }

    pub fn check(&self, alphabet: &SpinAlphabet) -> Result<()> {
        alphabet.check_word(&self.word)?;
        self.tail.check(alphabet)
    }
}

/// The exterior of a window on one side, listed outward from the window.
///
/// `head[0]` is the site adjacent to the window. Beyond the head the side
/// continues with `tail`, or is empty (free boundary) when `tail` is `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Side {
    pub head: Vec<i8>,
    pub tail: Option<Tail>,
}

impl Side {
    pub fn free() -> Self {
        Side { head: Vec::new(), tail: None }
    }

    pub fn frozen(tail: Tail) -> Self {
        Side { head: Vec::new(), tail: Some(tail) }
    }

    pub fn new(head: Vec<i8>, tail: Option<Tail>) -> Self {
        Side { head, tail }
    }

    /// Spin at `offset` steps from the window, `None` past a free end.
    pub fn spin(&self, offset: usize) -> Option<i8> {
        if offset < self.head.len() {
            Some(self.head[offset])
        } else {
            self.tail.as_ref().map(|t| t.spin(offset - self.head.len()))
        }
    }

    pub fn flipped(&self) -> Side {
        Side {
            head: self.head.iter().map(|v| -v).collect(),
            tail: self.tail.as_ref().map(Tail::flipped),
        }
    }

    /// The same side with `extra` spins inserted next to the window
    /// (`extra[0]` adjacent).
    pub fn extended(&self, extra: &[i8]) -> Side {
        let mut head = extra.to_vec();
        head.extend_from_slice(&self.head);
        Side { head, tail: self.tail.clone() }
    }

    pub fn check(&self, alphabet: &SpinAlphabet) -> Result<()> {
        alphabet.check_word(&self.head)?;
        match &self.tail {
            Some(t) => t.check(alphabet),
            None => Ok(()),
        }
    }
}

/// Boundary condition of a window.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Boundary {
    pub left: Side,
    pub right: Side,
}

impl Boundary {
    pub fn new(left: Side, right: Side) -> Self {
        Boundary { left, right }
    }

    pub fn free() -> Self {
        Boundary { left: Side::free(), right: Side::free() }
    }

    pub fn tails(left: Tail, right: Tail) -> Self {
        Boundary { left: Side::frozen(left), right: Side::frozen(right) }
    }

    pub fn uniform(tail: Tail) -> Self {
        Boundary::tails(tail.clone(), tail)
    }

    pub fn flipped(&self) -> Boundary {
        Boundary { left: self.left.flipped(), right: self.right.flipped() }
    }

    pub fn check(&self, alphabet: &SpinAlphabet) -> Result<()> {
        self.left.check(alphabet)?;
        self.right.check(alphabet)
    }
}

/// A contiguous block of sites `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(invalid(format!("empty window {lo}..={hi}")));
        }
        Ok(Window { lo, hi })
    }

    pub fn site(i: i64) -> Self {
        Window { lo: i, hi: i }
    }

    /// `len` sites centred on the origin (left-biased for even lengths).
    pub fn centered(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("empty window"));
        }
        let lo = -((len as i64) / 2);
        Window::new(lo, lo + len as i64 - 1)
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn contains_window(&self, w: &Window) -> bool {
        self.lo <= w.lo && w.hi <= self.hi
    }

    pub fn index(&self, i: i64) -> Option<usize> {
        self.contains(i).then(|| (i - self.lo) as usize)
    }
}

/// A whole-line configuration: explicit spins on a window, boundary elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct LineConfig {
    pub window: Window,
    pub spins: Vec<i8>,
    pub boundary: Boundary,
}

impl LineConfig {
    pub fn new(window: Window, spins: Vec<i8>, boundary: Boundary) -> Result<Self> {
        if spins.len() != window.len() {
            return Err(invalid("spin word does not match window length"));
        }
        Ok(LineConfig { window, spins, boundary })
    }

    pub fn spin(&self, i: i64) -> Option<i8> {
        if i < self.window.lo {
            self.boundary.left.spin((self.window.lo - 1 - i) as usize)
        } else if i > self.window.hi {
            self.boundary.right.spin((i - self.window.hi - 1) as usize)
        } else {
            Some(self.spins[(i - self.window.lo) as usize])
        }
    }

    pub fn set(&mut self, i: i64, v: i8) {
        let k = self.window.index(i).expect("site inside the explicit window");
        self.spins[k] = v;
    }

    /// The boundary seen by the sub-window `sub`, formed from the explicit
    /// spins outside `sub` followed by this configuration's boundary.
    pub fn boundary_for(&self, sub: &Window) -> Result<Boundary> {
        if !self.window.contains_window(sub) {
            return Err(invalid("sub-window outside the explicit window"));
        }
        let left: Vec<i8> = (self.window.lo..sub.lo).rev().map(|i| self.spins[(i - self.window.lo) as usize]).collect();
        let right: Vec<i8> = (sub.hi + 1..=self.window.hi).map(|i| self.spins[(i - self.window.lo) as usize]).collect();
        Ok(Boundary::new(self.boundary.left.extended(&left), self.boundary.right.extended(&right)))
    }

    pub fn sub_word(&self, sub: &Window) -> Vec<i8> {
        (sub.lo..=sub.hi).map(|i| self.spins[(i - self.window.lo) as usize]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_parse_round_trip() {
        for t in [Tail::AllPlus, Tail::AllMinus, Tail::Alternating, Tail::Periodic(vec![1, 1, -1])] {
            assert_eq!(t.to_string().parse::<Tail>().unwrap(), t);
        }
        assert!("sideways".parse::<Tail>().is_err());
    }

    #[test]
    fn shifted_tail_matches_offsets() {
        let t = Tail::Periodic(vec![1, -1, -1]);
        for k in 0..7 {
            let s = t.shifted(k);
            for j in 0..10 {
                assert_eq!(s.spin(j), t.spin(j + k));
            }
        }
    }

    #[test]
    fn line_config_boundary_for_subwindow() {
        let w = Window::new(-2, 2).unwrap();
        let cfg = LineConfig::new(w, vec![1, -1, 1, 1, -1], Boundary::tails(Tail::AllMinus, Tail::AllPlus)).unwrap();
        let sub = Window::site(0);
        let b = cfg.boundary_for(&sub).unwrap();
        let inner = LineConfig::new(sub, vec![1], b).unwrap();
        for i in -8..8 {
            if i != 0 {
                assert_eq!(inner.spin(i), cfg.spin(i));
            }
        }
    }
}
