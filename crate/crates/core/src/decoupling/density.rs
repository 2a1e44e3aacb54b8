use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphabet::{format_word, SpinAlphabet, DEFAULT_ENUMERATION_BUDGET};
use crate::config::{Boundary, HalfLineConfig, Tail, Window};
use crate::decoupling::bonds::{Bond, BondOrder};
use crate::error::{invalid, Error, Result};
use crate::gibbs::{run_chains, window_gibbs_within, SampleSet};
use crate::model::{PairInteraction, PotentialSpec};
use crate::stats::{batch_means, chain_seed, rhat, DEFAULT_BATCHES};
use crate::transfer::TransferModel;

/// Largest tolerated Gelman-Rubin statistic for Monte Carlo estimates.
pub const RHAT_LIMIT: f64 = 1.1;
/// Chains per side in Monte Carlo mode.
pub const DENSITY_CHAINS: usize = 4;
const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DensityMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    /// Cylinder depth `d` of the reported density.
    pub depth: usize,
    /// Energy truncation `N`.
    pub n: usize,
    pub order: BondOrder,
    /// Bonds kept in the left-right energy; `None` keeps the `N x (N+1)` square.
    pub bonds: Option<u64>,
    /// Right tail completing each depth-`d` word.
    pub tail: Tail,
    pub mode: DensityMode,
    /// Free sites added beyond the bonded block on each side; `None` uses `2N`,
    /// capped in exact mode by the enumeration budget.
    pub margin: Option<usize>,
    pub budget: u128,
}

impl DensityOptions {
    pub fn exact(depth: usize, n: usize) -> Self {
        DensityOptions {
            depth,
            n,
            order: BondOrder::Square,
            bonds: None,
            tail: Tail::AllPlus,
            mode: DensityMode::Exact,
            margin: None,
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }

    pub fn monte_carlo(depth: usize, n: usize, samples: usize, seed: u64) -> Self {
        DensityOptions { mode: DensityMode::MonteCarlo { samples, seed }, ..Self::exact(depth, n) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMeta {
    pub alpha: f64,
    pub beta: f64,
    pub mode: DensityMode,
    pub order: BondOrder,
    pub bonds: u64,
    pub margin: usize,
    pub seeds: Vec<u64>,
    /// Worst R-hat over both sides (Monte Carlo only).
    pub rhat: Option<f64>,
}

/// `f_+(sigma) = int e^{-W(xi, sigma)} d nu_-(xi) / int int e^{-W} d nu_- d nu_+`
/// on depth-`d` words completed by a fixed right tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub alphabet: SpinAlphabet,
    pub depth: usize,
    pub n: usize,
    pub tail: Tail,
    pub values: Vec<f64>,
    pub std_err: Vec<f64>,
    /// The double integral in the denominator.
    pub normalization: f64,
    /// Law of the first `d` sites under the right measure.
    pub nu_plus: Vec<f64>,
    pub meta: DensityMeta,
}

impl DensityEstimate {
    pub fn word(&self, k: usize) -> Vec<i8> {
        self.alphabet.word(k, self.depth)
    }

    /// `sum_w f(w) nu_+(w)`.
    pub fn nu_plus_mean(&self) -> f64 {
        self.values.iter().zip(&self.nu_plus).map(|(f, p)| f * p).sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["word", "value", "std_err"])?;
        for (k, (v, e)) in self.values.iter().zip(&self.std_err).enumerate() {
            w.write_record([format_word(&self.word(k)), format!("{v:.16e}"), format!("{e:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Coefficients `A[i-1][j] = J(i+j)` of the kept bonds.
struct CrossCouplings {
    left: usize,
    right: usize,
    a: Vec<Vec<f64>>,
}

impl CrossCouplings {
    fn new(inter: &PairInteraction, bonds: &[Bond]) -> Self {
        let left = bonds.iter().map(|b| b.i as usize).max().unwrap_or(1);
        let right = bonds.iter().map(|b| b.j as usize + 1).max().unwrap_or(1);
        let mut a = vec![vec![0.0; right]; left];
        for b in bonds {
            a[b.i as usize - 1][b.j as usize] = inter.coupling().value(b.length());
        }
        CrossCouplings { left, right, a }
    }

    /// Field `v_i = sum_j A[i-1][j] sigma_j` on each left site.
    fn fields(&self, sigma: &[i8]) -> Vec<f64> {
        self.a.iter().map(|row| row.iter().zip(sigma).map(|(c, &s)| c * s as f64).sum()).collect()
    }
}

fn margin_for(opts: &DensityOptions, extent: usize, q: usize) -> Result<usize> {
    let wanted = opts.margin.unwrap_or(2 * extent);
    if opts.mode != DensityMode::Exact {
        return Ok(wanted);
    }
    // largest window length whose words fit the budget
    let mut sites = 0usize;
    while (q as u128).checked_pow(sites as u32 + 1).is_some_and(|c| c <= opts.budget) {
        sites += 1;
    }
    if extent > sites {
        return Err(Error::BudgetExceeded { needed: (q as u128).saturating_pow(extent as u32), budget: opts.budget });
    }
    Ok(wanted.min(sites - extent))
}

/// Left (`nu_-`) and right (`nu_+`) windows: free boundary, the bonded
/// block next to the origin, `margin` extra sites beyond it.
fn windows(cross: &CrossCouplings, margin_l: usize, margin_r: usize) -> Result<(Window, Window)> {
    let left = Window::new(-((cross.left + margin_l) as i64), -1)?;
    let right = Window::new(0, (cross.right + margin_r) as i64 - 1)?;
    Ok((left, right))
}

pub fn density_estimate(spec: &PotentialSpec, opts: &DensityOptions) -> Result<DensityEstimate> {
    density_estimate_for(&spec.interaction()?, opts)
}

pub fn density_estimate_for(inter: &PairInteraction, opts: &DensityOptions) -> Result<DensityEstimate> {
    if opts.depth == 0 || opts.n == 0 {
        return Err(invalid("depth and N must be at least 1"));
    }
    let a = inter.alphabet().clone();
    opts.tail.check(&a)?;
    a.word_count(opts.depth, opts.budget)?;
    let count = opts.bonds.unwrap_or(BondOrder::square_count(opts.n as u64));
    if count == 0 {
        return Err(invalid("at least one bond is needed"));
    }
    let bonds = opts.order.bonds(count);
    let cross = CrossCouplings::new(inter, &bonds);
    let q = a.len();
    let margin_l = margin_for(opts, cross.left, q)?;
    let margin_r = margin_for(opts, cross.right, q)?;
    let (lw, rw) = windows(&cross, margin_l, margin_r)?;
    // depth-d words completed by the tail, cut to the bonded block
    let words: Vec<Vec<i8>> = (0..q.pow(opts.depth as u32))
        .map(|k| {
            let cfg = HalfLineConfig::new(a.word(k, opts.depth), opts.tail.clone());
            cfg.prefix(cross.right.max(opts.depth))
        })
        .collect();
    let meta = DensityMeta {
        alpha: inter.alpha(),
        beta: inter.beta(),
        mode: opts.mode,
        order: opts.order,
        bonds: count,
        margin: margin_l.min(margin_r),
        seeds: Vec::new(),
        rhat: None,
    };
    match opts.mode {
        DensityMode::Exact => exact(inter, opts, &cross, lw, rw, &words, meta),
        DensityMode::MonteCarlo { samples, seed } => monte_carlo(inter, opts, &cross, lw, rw, &words, samples, seed, meta),
    }
}

fn exact(
    inter: &PairInteraction,
    opts: &DensityOptions,
    cross: &CrossCouplings,
    lw: Window,
    rw: Window,
    words: &[Vec<i8>],
    meta: DensityMeta,
) -> Result<DensityEstimate> {
    let a = inter.alphabet();
    let q = a.len();
    let left = window_gibbs_within(inter, &lw, &Boundary::free(), opts.budget)?;
    let right = window_gibbs_within(inter, &rw, &Boundary::free(), opts.budget)?;
    // xi over sites -L..-1; position k carries xi_{-(L-k)}
    let p_xi = left.marginal(&Window::new(-(cross.left as i64), -1)?)?;
    let p_sigma = right.marginal(&Window::new(0, cross.right as i64 - 1)?)?;
    let nu_plus = right.marginal(&Window::new(0, opts.depth as i64 - 1)?)?;
    let kernel = LeftIntegral::new(inter, cross, &p_xi);

    let sigmas: Vec<Vec<i8>> = words.iter().map(|w| w[..cross.right].to_vec()).collect();
    let numerators = kernel.evaluate(&sigmas);
    let n_sigma = p_sigma.len();
    let chunks: Vec<f64> = (0..n_sigma.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n_sigma);
            let batch: Vec<Vec<i8>> = (lo..hi).map(|k| a.word(k, cross.right)).collect();
            let g = kernel.evaluate(&batch);
            g.iter().zip(&p_sigma[lo..hi]).map(|(g, p)| g * p).sum::<f64>()
        })
        .collect();
    let normalization: f64 = chunks.iter().sum();
    let values: Vec<f64> = numerators.iter().map(|g| g / normalization).collect();
    debug_assert_eq!(values.len(), q.pow(opts.depth as u32));
    Ok(DensityEstimate {
        alphabet: a.clone(),
        depth: opts.depth,
        n: opts.n,
        tail: opts.tail.clone(),
        std_err: vec![0.0; values.len()],
        values,
        normalization,
        nu_plus,
        meta,
    })
}

/// `sigma -> sum_xi p(xi) exp(sum_i g(xi_{-i}) v_i(sigma))`, evaluated by
/// splitting `xi` into two halves so each batch is one matrix product.
struct LeftIntegral<'a> {
    cross: &'a CrossCouplings,
    g: Vec<f64>,
    q: usize,
    hi_len: usize,
    lo_len: usize,
    p: DMatrix<f64>,
}

impl<'a> LeftIntegral<'a> {
    fn new(inter: &PairInteraction, cross: &'a CrossCouplings, p_xi: &[f64]) -> Self {
        let a = inter.alphabet();
        let q = a.len();
        let hi_len = cross.left / 2;
        let lo_len = cross.left - hi_len;
        let rows = q.pow(hi_len as u32);
        let cols = q.pow(lo_len as u32);
        let p = DMatrix::from_row_slice(rows, cols, p_xi);
        let g = a.values().iter().map(|&v| inter.form().left_factor(v)).collect();
        LeftIntegral { cross, g, q, hi_len, lo_len, p }
    }

    /// `exp(sum over positions off..off+len of g(digit) v_{L-k})` for every word of the block.
    fn block(&self, v: &[f64], off: usize, len: usize) -> Vec<f64> {
        let big_l = self.cross.left;
        let mut out = vec![0.0f64; self.q.pow(len as u32)];
        for (idx, slot) in out.iter_mut().enumerate() {
            let mut rest = idx;
            let mut e = 0.0;
            for k in (off..off + len).rev() {
                let d = rest % self.q;
                rest /= self.q;
                e += self.g[d] * v[big_l - k - 1];
            }
            *slot = e;
        }
        out.iter_mut().for_each(|x| *x = x.exp());
        out
    }

    fn evaluate(&self, sigmas: &[Vec<i8>]) -> Vec<f64> {
        let s = sigmas.len();
        let rows = self.p.nrows();
        let cols = self.p.ncols();
        let mut eh = DMatrix::zeros(rows, s);
        let mut el = DMatrix::zeros(cols, s);
        for (c, sigma) in sigmas.iter().enumerate() {
            // v indexed by i - 1; position k of xi is site -(L - k)
            let v = self.cross.fields(sigma);
            let h = self.block(&v, 0, self.hi_len);
            let l = self.block(&v, self.hi_len, self.lo_len);
            eh.column_mut(c).copy_from_slice(&h);
            el.column_mut(c).copy_from_slice(&l);
        }
        let m = &self.p * el;
        (0..s).map(|c| eh.column(c).dot(&m.column(c))).collect()
    }
}

#[allow(clippy::too_many_arguments)]
fn monte_carlo(
    inter: &PairInteraction,
    opts: &DensityOptions,
    cross: &CrossCouplings,
    lw: Window,
    rw: Window,
    words: &[Vec<i8>],
    samples: usize,
    seed: u64,
    mut meta: DensityMeta,
) -> Result<DensityEstimate> {
    if samples < 2 * DEFAULT_BATCHES {
        return Err(invalid(format!("Monte Carlo mode needs at least {} samples", 2 * DEFAULT_BATCHES)));
    }
    let per_chain = samples.div_ceil(DENSITY_CHAINS);
    let seed_r = chain_seed(seed, DENSITY_CHAINS as u64);
    let burn_l = 10 * lw.len();
    let burn_r = 10 * rw.len();
    let left = run_chains(inter, &lw, &Boundary::free(), seed, DENSITY_CHAINS, burn_l, per_chain, 1)?;
    let right = run_chains(inter, &rw, &Boundary::free(), seed_r, DENSITY_CHAINS, burn_r, per_chain, 1)?;
    let r = worst_rhat(&left)?.max(worst_rhat(&right)?);
    if r > RHAT_LIMIT {
        return Err(Error::SamplerNotConverged { rhat: r });
    }
    meta.rhat = Some(r);
    meta.seeds = left.iter().chain(&right).map(|s| s.meta.seed).collect();

    let g: Vec<f64> = inter.alphabet().values().iter().map(|&v| inter.form().left_factor(v)).collect();
    let a = inter.alphabet();
    let gi = |v: i8| g[a.index_of(v).unwrap()];
    let big_l = cross.left;
    // position k of the left window's last L sites is xi_{-(L-k)}
    let xi_rows: Vec<Vec<f64>> = left
        .iter()
        .flat_map(|s| s.iter().map(|row| row[row.len() - big_l..].iter().map(|&v| gi(v)).collect::<Vec<f64>>()).collect::<Vec<_>>())
        .collect();
    let sigma_rows: Vec<Vec<i8>> =
        right.iter().flat_map(|s| s.iter().map(|row| row[..cross.right].to_vec()).collect::<Vec<_>>()).collect();
    let weight = |xi: &[f64], v: &[f64]| -> f64 { (0..big_l).map(|k| xi[k] * v[big_l - k - 1]).sum::<f64>().exp() };

    let den_draws: Vec<f64> =
        xi_rows.iter().zip(&sigma_rows).map(|(xi, sigma)| weight(xi, &cross.fields(sigma))).collect();
    let den = batch_means(&den_draws, DEFAULT_BATCHES);
    let mut values = Vec::with_capacity(words.len());
    let mut std_err = Vec::with_capacity(words.len());
    for w in words {
        let v = cross.fields(&w[..cross.right]);
        let draws: Vec<f64> = xi_rows.iter().map(|xi| weight(xi, &v)).collect();
        let num = batch_means(&draws, DEFAULT_BATCHES);
        let f = num.mean / den.mean;
        values.push(f);
        std_err.push(f * ((num.std_err / num.mean).powi(2) + (den.std_err / den.mean).powi(2)).sqrt());
    }
    let nu_plus = empirical_prefix_law(&right, opts.depth, a);
    Ok(DensityEstimate {
        alphabet: a.clone(),
        depth: opts.depth,
        n: opts.n,
        tail: opts.tail.clone(),
        values,
        std_err,
        normalization: den.mean,
        nu_plus,
        meta,
    })
}

fn worst_rhat(sets: &[SampleSet]) -> Result<f64> {
    let chains: Vec<Vec<f64>> = sets.iter().map(SampleSet::magnetization).collect();
    let r = rhat(&chains)?;
    Ok(if r.is_nan() { 1.0 } else { r })
}

fn empirical_prefix_law(sets: &[SampleSet], depth: usize, a: &SpinAlphabet) -> Vec<f64> {
    let mut counts = vec![0.0; a.len().pow(depth as u32)];
    let mut total = 0.0;
    for s in sets {
        for row in s.iter() {
            counts[a.word_index(&row[..depth]).unwrap()] += 1.0;
            total += 1.0;
        }
    }
    counts.iter_mut().for_each(|c| *c /= total);
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenComparison {
    pub depth: usize,
    pub n: usize,
    pub model_depth: usize,
    /// `max_w |f(w) - h(w)|` after scaling both to unit mean.
    pub sup_dist: f64,
    /// `sum_w nu(w) |f(w) - h(w)|`.
    pub l1_dist: f64,
    pub density: Vec<f64>,
    pub eigenfunction: Vec<f64>,
}

/// Compares a density with the transfer eigenfunction, both evaluated on the
/// density's depth-`d` words completed by its tail and scaled to unit mean
/// against the depth-`d` marginal of the model's eigenmeasure.
pub fn density_vs_eigenfunction(density: &DensityEstimate, model: &TransferModel) -> Result<EigenComparison> {
    if model.alphabet() != &density.alphabet {
        return Err(Error::Incompatible("density and model use different alphabets".into()));
    }
    if density.depth > model.depth() {
        return Err(Error::Incompatible(format!(
            "density depth {} exceeds model depth {}",
            density.depth,
            model.depth()
        )));
    }
    let nu = model.left_marginal(density.depth)?;
    let h = model.right_eig();
    let hv: Vec<f64> = (0..density.values.len())
        .map(|k| h.eval(&HalfLineConfig::new(density.word(k), density.tail.clone())))
        .collect::<Result<_>>()?;
    let scale = |v: &[f64]| -> Vec<f64> {
        let m: f64 = v.iter().zip(&nu).map(|(a, b)| a * b).sum();
        v.iter().map(|x| x / m).collect()
    };
    let f = scale(&density.values);
    let hv = scale(&hv);
    let sup_dist = f.iter().zip(&hv).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let l1_dist = f.iter().zip(&hv).zip(&nu).map(|((a, b), w)| w * (a - b).abs()).sum();
    Ok(EigenComparison {
        depth: density.depth,
        n: density.n,
        model_depth: model.depth(),
        sup_dist,
        l1_dist,
        density: f,
        eigenfunction: hv,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenTrend {
    pub n_grid: Vec<usize>,
    pub sup_dist: Vec<f64>,
    pub l1_dist: Vec<f64>,
    /// Whether `sup_dist` never increases along the grid.
    pub nonincreasing: bool,
}

/// Exact-mode comparisons along a grid of truncations.
pub fn density_trend(spec: &PotentialSpec, base: &DensityOptions, n_grid: &[usize], model: &TransferModel) -> Result<EigenTrend> {
    let mut sup = Vec::with_capacity(n_grid.len());
    let mut l1 = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let opts = DensityOptions { n, bonds: None, ..base.clone() };
        let c = density_vs_eigenfunction(&density_estimate(spec, &opts)?, model)?;
        sup.push(c.sup_dist);
        l1.push(c.l1_dist);
    }
    let nonincreasing = sup.windows(2).all(|w| w[1] <= w[0]);
    Ok(EigenTrend { n_grid: n_grid.to_vec(), sup_dist: sup, l1_dist: l1, nonincreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoupling::bonds::left_right_energy;

    #[test]
    fn zero_beta_density_is_one() {
        let s = PotentialSpec::dyson(2.0, 0.0).unwrap();
        let d = density_estimate(&s, &DensityOptions::exact(2, 3)).unwrap();
        assert!(d.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn exact_mode_matches_brute_force() {
        let s = PotentialSpec::dyson(2.0, 0.2).unwrap();
        let inter = s.interaction().unwrap();
        let opts = DensityOptions { margin: Some(1), ..DensityOptions::exact(2, 2) };
        let d = density_estimate(&s, &opts).unwrap();
        let left = window_gibbs_within(&inter, &Window::new(-3, -1).unwrap(), &Boundary::free(), 1 << 10).unwrap();
        let right = window_gibbs_within(&inter, &Window::new(0, 3).unwrap(), &Boundary::free(), 1 << 10).unwrap();
        let a = inter.alphabet();
        let num = |sigma: &[i8]| -> f64 {
            (0..8)
                .map(|k| {
                    let w = a.word(k, 3);
                    let xi = [w[2], w[1]];
                    left.probs[k] * (-left_right_energy(&inter, &xi, sigma).unwrap()).exp()
                })
                .sum()
        };
        let den: f64 = (0..16).map(|k| right.probs[k] * num(&a.word(k, 4)[..3])).sum();
        for k in 0..4 {
            let mut sigma = a.word(k, 2);
            sigma.push(1);
            assert!((d.values[k] - num(&sigma) / den).abs() < 1e-13);
        }
        assert!((d.normalization - den).abs() < 1e-13);
    }
}
