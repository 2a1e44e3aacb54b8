use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Boundary, LineConfig, Window};
use crate::error::{invalid, Result};
use crate::gibbs::GibbsKernels;
use crate::model::PairInteraction;
use crate::stats::total_variation;

/// Target for `c^{n+1} / (1 - c)`, the mass dropped from the Neumann series.
pub const NEUMANN_TOLERANCE: f64 = 1e-10;

/// `Cbar(Phi)` restricted to a window and `Dbar = sum_{n<=n_max} Cbar^n`.
#[derive(Debug, Clone)]
pub struct DobrushinMatrices {
    pub window: Window,
    pub cbar: DMatrix<f64>,
    pub dbar: DMatrix<f64>,
    pub terms: usize,
    /// Largest row sum of `Cbar`.
    pub row_max: f64,
    /// Bound on every entry and row sum of the omitted terms.
    pub remainder: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub lo: i64,
    pub hi: i64,
    pub terms: usize,
    pub row_max: f64,
    pub remainder: f64,
    pub dbar_row_max: f64,
    pub cbar: Vec<Vec<f64>>,
    pub dbar: Vec<Vec<f64>>,
}

impl DobrushinMatrices {
    pub fn new(inter: &PairInteraction, window: &Window) -> Result<Self> {
        let n = window.len();
        let cbar = DMatrix::from_fn(n, n, |a, b| inter.cbar(window.lo + a as i64, window.lo + b as i64));
        let row_max = (0..n).map(|a| cbar.row(a).sum()).fold(0.0, f64::max);
        if row_max >= 1.0 {
            return Err(crate::error::Error::OutOfRegime(format!(
                "beta exceeds Dobrushin threshold (window row sum {row_max:.6} >= 1)"
            )));
        }
        let mut terms = 0usize;
        let mut remainder = 1.0 / (1.0 - row_max);
        while remainder >= NEUMANN_TOLERANCE && row_max > 0.0 {
            terms += 1;
            remainder = row_max.powi(terms as i32 + 1) / (1.0 - row_max);
        }
        if row_max == 0.0 {
            remainder = 0.0;
        }
        let mut dbar = DMatrix::identity(n, n);
        let mut power = DMatrix::identity(n, n);
        for _ in 0..terms {
            power = &power * &cbar;
            dbar += &power;
        }
        Ok(DobrushinMatrices { window: *window, cbar, dbar, terms, row_max, remainder })
    }

    fn idx(&self, i: i64) -> Result<usize> {
        self.window.index(i).ok_or_else(|| invalid(format!("site {i} outside the window")))
    }

    pub fn cbar_entry(&self, i: i64, j: i64) -> Result<f64> {
        Ok(self.cbar[(self.idx(i)?, self.idx(j)?)])
    }

    pub fn dbar_entry(&self, i: i64, j: i64) -> Result<f64> {
        Ok(self.dbar[(self.idx(i)?, self.idx(j)?)])
    }

    pub fn dbar_row_sums(&self) -> Vec<f64> {
        (0..self.dbar.nrows()).map(|a| self.dbar.row(a).sum()).collect()
    }

    pub fn summary(&self) -> MatrixSummary {
        let rows = |m: &DMatrix<f64>| (0..m.nrows()).map(|a| m.row(a).iter().copied().collect()).collect();
        MatrixSummary {
            lo: self.window.lo,
            hi: self.window.hi,
            terms: self.terms,
            row_max: self.row_max,
            remainder: self.remainder,
            dbar_row_max: self.dbar_row_sums().into_iter().fold(0.0, f64::max),
            cbar: rows(&self.cbar),
            dbar: rows(&self.dbar),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterdependenceEstimate {
    pub i: i64,
    pub j: i64,
    /// Largest `TV(gamma_i(.|omega), gamma_i(.|omega'))` seen over probe pairs
    /// differing only at `j`; a lower estimate of `C(gamma)_{ij}`.
    pub lower: f64,
    pub probes: usize,
    pub cbar: f64,
}

/// Probes `C(gamma)_{ij}` with random configurations on `window` and the
/// given exterior boundary.
pub fn probed_interdependence(
    inter: &PairInteraction,
    window: &Window,
    boundary: &Boundary,
    i: i64,
    j: i64,
    probes: usize,
    seed: u64,
) -> Result<InterdependenceEstimate> {
    if i == j || !window.contains(i) || !window.contains(j) {
        return Err(invalid("need two distinct sites inside the window"));
    }
    let kernels = GibbsKernels::new(inter.clone());
    let vals = inter.alphabet().values().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lower = 0.0f64;
    for _ in 0..probes {
        let spins: Vec<i8> = (0..window.len()).map(|_| vals[rng.random_range(0..vals.len())]).collect();
        let mut base = LineConfig::new(*window, spins, boundary.clone())?;
        let mut laws = Vec::with_capacity(vals.len());
        for &v in &vals {
            base.set(j, v);
            laws.push(kernels.law(i, &base)?);
        }
        for a in 0..laws.len() {
            for b in a + 1..laws.len() {
                lower = lower.max(total_variation(&laws[a], &laws[b]));
            }
        }
    }
    Ok(InterdependenceEstimate { i, j, lower, probes, cbar: inter.cbar(i, j) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tail;

    #[test]
    fn dbar_rows_below_neumann_bound() {
        let inter = PairInteraction::dyson(2.0, 0.1).unwrap();
        let m = DobrushinMatrices::new(&inter, &Window::centered(12).unwrap()).unwrap();
        let bar_c = 0.328_986_813_369_645_3;
        assert!(m.dbar_row_sums().iter().all(|&s| s <= 1.0 / (1.0 - bar_c) + m.remainder));
        assert_eq!(m.cbar, m.cbar.transpose());
        assert!(m.remainder < NEUMANN_TOLERANCE);
    }

    #[test]
    fn probed_entry_below_cbar() {
        let inter = PairInteraction::dyson(2.0, 0.1).unwrap();
        let w = Window::centered(5).unwrap();
        let e = probed_interdependence(&inter, &w, &Boundary::uniform(Tail::AllPlus), 0, 1, 16, 4).unwrap();
        assert!(e.lower > 0.0 && e.lower <= e.cbar);
    }
}
