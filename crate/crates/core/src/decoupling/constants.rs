use serde::{Deserialize, Serialize};

use crate::config::Tail;
use crate::decoupling::bonds::BondOrder;
use crate::error::{invalid, Error, Result};
use crate::model::{beta_du, PairInteraction};
use crate::series::{hurwitz_zeta, zeta, Bounded};

/// Terms of `C1` summed directly before the certified tail.
pub const C1_DIRECT_TERMS: u64 = 100_000;

/// Constants of the continuity argument for the Ising Dyson interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityConstants {
    pub alpha: f64,
    pub beta: f64,
    pub bar_c: f64,
    /// `4 / (1 - bar_c)^2`.
    pub d: f64,
    /// `sum_{k>=1} (sum_{j>=k} j^-alpha)^2`.
    pub c1: Bounded,
    /// `u_n = 32 beta^2 sum_{k>n} k^{-2(alpha-1)}` for `n = 0..=n_max`.
    pub u: Vec<f64>,
    /// `v_n = sqrt(D u_n / 2)`.
    pub v: Vec<f64>,
    /// `C2 (4 v_n + 3 e^{v_n^2} + 2 e^{4 v_n^2} - 5)^{1/2}` with `C2 = e^{8 D beta^2 C1}`.
    pub modulus: Vec<f64>,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// `sum_{k>=1} zeta(alpha, k)^2` with a certified tail.
pub fn c1(alpha: f64) -> Result<Bounded> {
    if !(alpha > 1.5) {
        return Err(Error::Divergent(format!("C1 diverges for alpha = {alpha} <= 3/2")));
    }
    let k_max = C1_DIRECT_TERMS;
    // zeta(alpha, k) for k = k_max down to 1, adding k^-alpha upward
    let start = hurwitz_zeta(alpha, (k_max + 1) as f64)?;
    let mut h = start.value;
    let mut head = 0.0;
    for k in (1..=k_max).rev() {
        h += (k as f64).powf(-alpha);
        head += h * h;
    }
    let rel = start.error / start.value + k_max as f64 * f64::EPSILON;
    let head_err = (2.0 * rel + k_max as f64 * f64::EPSILON) * head;
    // k^{1-a}/(a-1) <= zeta(a, k) <= (k - 1/2)^{1-a}/(a-1)
    let s = 2.0 * alpha - 2.0;
    let scale = (alpha - 1.0).powi(-2);
    let tail_lo = scale * hurwitz_zeta(s, (k_max + 1) as f64)?.lower();
    let tail_hi = scale * hurwitz_zeta(s, k_max as f64 + 0.5)?.upper();
    Ok(Bounded::new(head + 0.5 * (tail_lo + tail_hi), 0.5 * (tail_hi - tail_lo) + head_err))
}

pub fn continuity_constants(alpha: f64, beta: f64, n_max: usize) -> Result<ContinuityConstants> {
    let c1 = c1(alpha)?;
    let threshold = beta_du(alpha)?;
    if !(beta >= 0.0) {
        return Err(invalid(format!("beta must be >= 0, got {beta}")));
    }
    if beta >= threshold {
        return Err(Error::OutOfRegime(format!(
            "beta = {beta} is not below the Dobrushin threshold {threshold}"
        )));
    }
    let bar_c = 2.0 * beta * zeta(alpha)?.value;
    let d = 4.0 / (1.0 - bar_c).powi(2);
    let exponent = 8.0 * d * beta * beta * c1.value;
    let c2 = exponent.exp();
    let s = 2.0 * (alpha - 1.0);
    let mut u = Vec::with_capacity(n_max + 1);
    let mut v = Vec::with_capacity(n_max + 1);
    let mut modulus = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let un = 32.0 * beta * beta * hurwitz_zeta(s, (n + 1) as f64)?.value;
        let vn = (d * un / 2.0).sqrt();
        u.push(un);
        v.push(vn);
        let inner = 4.0 * vn + 3.0 * (vn * vn).exp() + 2.0 * (4.0 * vn * vn).exp() - 5.0;
        modulus.push(c2 * inner.max(0.0).sqrt());
    }
    Ok(ContinuityConstants {
        alpha,
        beta,
        bar_c,
        d,
        c1,
        u,
        v,
        modulus,
        lower_bound: (-exponent).exp(),
        upper_bound: c2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceProfile {
    pub i: Vec<u64>,
    /// `a_i^2` with `a_i = sum_{j>=0} J(i+j) sigma_j`.
    pub a_sq: Vec<f64>,
    /// Least-squares slope of `log a_i^2` against `log i` over `i >= fit_from`.
    pub slope: Option<f64>,
    pub fit_from: u64,
}

/// Squared left-right field felt at distance `i` from a frozen right half
/// `sigma`, for `i = 1..=i_max`, with the log-log slope fitted from `i = 10`.
pub fn variance_profile(inter: &PairInteraction, sigma: &Tail, i_max: u64) -> Result<VarianceProfile> {
    let c = inter.coupling().untruncated();
    let pattern = sigma.pattern_f64();
    let fit_from = 10;
    let mut is = Vec::with_capacity(i_max as usize);
    let mut a_sq = Vec::with_capacity(i_max as usize);
    for i in 1..=i_max {
        let a = c.weighted_sum(i, &[], Some(&pattern))?.value;
        is.push(i);
        a_sq.push(a * a);
    }
    let pts: Vec<(f64, f64)> = is
        .iter()
        .zip(&a_sq)
        .filter(|(i, a)| **i >= fit_from && **a > 0.0)
        .map(|(i, a)| ((*i as f64).ln(), a.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    Ok(VarianceProfile { i: is, a_sq, slope, fit_from })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub bonds: u64,
    pub order: BondOrder,
    /// `sum_{k<=K} ||delta(Phi_{Lambda_k})||_2^2` over the first `K` bonds.
    pub sum_delta_sq: Bounded,
    /// The same sum over every crossing bond.
    pub total_delta_sq: Bounded,
    /// `total - partial`, what the remaining bonds can still add.
    pub remaining: f64,
    pub converged: bool,
    pub bar_c: f64,
    /// `sum_m |J(m)| / (1 - bar_c)`.
    pub rho_bound_sum: Bounded,
    /// `sum_m m^-alpha / (1 - bar_c)`, the coupling-free form.
    pub rho_bound_unit: Bounded,
}

/// Summability diagnostics for the decoupling sequence built from `order`.
pub fn integrability_diagnostics(inter: &PairInteraction, bonds: u64, order: BondOrder) -> Result<IntegrabilityReport> {
    let bar_c = inter.require_uniqueness()?;
    let (l1, r1) = inter.bond_site_oscillations(1);
    let j1 = inter.coupling().value(1).abs();
    // ||delta||_2^2 of a bond is kappa J(r)^2
    let kappa = if j1 > 0.0 { (l1 * l1 + r1 * r1) / (j1 * j1) } else { 0.0 };
    let mut partial = 0.0;
    for b in order.bonds(bonds) {
        let (l, r) = inter.bond_site_oscillations(b.length());
        partial += l * l + r * r;
    }
    let partial = Bounded::new(partial, 4.0 * f64::EPSILON * partial * (bonds.max(2) as f64).log2());
    let total = if kappa > 0.0 { inter.coupling().weighted_square_total(1)? * kappa } else { Bounded::ZERO };
    let remaining = (total.value - partial.value).max(0.0) + total.error;
    let gap = 1.0 - bar_c;
    let couplings = inter.coupling().abs_tail(1)?;
    let unit = if inter.is_power_law() { zeta(inter.alpha())? } else { couplings * (1.0 / inter.beta().max(f64::MIN_POSITIVE)) };
    Ok(IntegrabilityReport {
        bonds,
        order,
        sum_delta_sq: partial,
        total_delta_sq: total,
        remaining,
        converged: total.value.is_finite(),
        bar_c,
        rho_bound_sum: couplings * (1.0 / gap),
        rho_bound_unit: unit * (1.0 / gap),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c1_at_two() {
        let c = c1(2.0).unwrap();
        assert!(c.contains(3.606_170_709_478_782_9, 1e-12), "{c:?}");
        assert!(c.error < 1e-9);
    }

    #[test]
    fn c1_refuses_slow_decay() {
        assert!(matches!(c1(1.5), Err(Error::Divergent(_))));
    }

    #[test]
    fn constants_at_two() {
        let k = continuity_constants(2.0, 0.1, 20).unwrap();
        assert!((k.bar_c - 0.328_986_813_369_645_3).abs() < 1e-12);
        assert!((k.d - 4.0 / (1.0 - 0.328_986_813_369_645_3f64).powi(2)).abs() < 1e-10);
        assert!(k.u.windows(2).all(|w| w[1] <= w[0]));
        assert!((k.v[3] - (k.d * k.u[3] / 2.0).sqrt()).abs() < 1e-15);
        assert!(k.lower_bound * k.upper_bound - 1.0 < 1e-12);
    }

    #[test]
    fn profile_slope_at_two() {
        let inter = PairInteraction::dyson(2.0, 0.1).unwrap();
        let p = variance_profile(&inter, &Tail::AllPlus, 1000).unwrap();
        assert!((p.slope.unwrap() + 2.0).abs() < 0.1);
    }
}
