use std::collections::HashMap;

use crate::alphabet::{SpinAlphabet, DEFAULT_ENUMERATION_BUDGET};
use crate::config::{Boundary, LineConfig, Window};
use crate::error::{invalid, Error, Result};
use crate::gibbs::window::{window_energy, window_gibbs_within};
use crate::model::PairInteraction;
use crate::stats::total_variation;
use crate::transfer::softmax;

/// A family of single-site kernels `gamma_{i}(a | omega)`.
pub trait SingleSiteKernel {
    fn alphabet(&self) -> &SpinAlphabet;

    /// `gamma_{i}(value | config)`; `config` must cover site `i` explicitly.
    fn prob(&self, site: i64, value: i8, config: &LineConfig) -> Result<f64>;
}

/// Single-site kernels of the Gibbsian specification of a pair interaction.
#[derive(Debug, Clone)]
pub struct GibbsKernels {
    inter: PairInteraction,
}

impl GibbsKernels {
    pub fn new(inter: PairInteraction) -> Self {
        GibbsKernels { inter }
    }

    /// The whole single-site law at `site`.
    pub fn law(&self, site: i64, config: &LineConfig) -> Result<Vec<f64>> {
        let w = Window::site(site);
        let b = config.boundary_for(&w)?;
        let e = window_energy(&self.inter, &w, &b)?;
        let lw: Vec<f64> = self.inter.alphabet().values().iter().map(|&s| e.log_weight(&[s])).collect();
        Ok(softmax(&lw))
    }
}

impl SingleSiteKernel for GibbsKernels {
    fn alphabet(&self) -> &SpinAlphabet {
        self.inter.alphabet()
    }

    fn prob(&self, site: i64, value: i8, config: &LineConfig) -> Result<f64> {
        let d = self.inter.alphabet().index_of(value).ok_or(Error::SpinOutsideAlphabet(value))?;
        Ok(self.law(site, config)?[d])
    }
}

/// Wraps a kernel family and moves `delta` of probability at `site` from
/// the last alphabet value to `value`, only on configurations where site
/// `when.0` carries `when.1` (everywhere if `None`). Used to exercise the
/// axiom check.
pub struct PerturbedKernel<K> {
    pub inner: K,
    pub site: i64,
    pub value: i8,
    pub delta: f64,
    pub when: Option<(i64, i8)>,
}

impl<K: SingleSiteKernel> SingleSiteKernel for PerturbedKernel<K> {
    fn alphabet(&self) -> &SpinAlphabet {
        self.inner.alphabet()
    }

    fn prob(&self, site: i64, value: i8, config: &LineConfig) -> Result<f64> {
        let p = self.inner.prob(site, value, config)?;
        if site != self.site || self.when.is_some_and(|(k, v)| config.spin(k) != Some(v)) {
            return Ok(p);
        }
        let last = *self.alphabet().values().last().unwrap();
        if value == self.value && value != last {
            Ok(p + self.delta)
        } else if value == last && value != self.value {
            Ok(p - self.delta)
        } else {
            Ok(p)
        }
    }
}

fn with_pair(config: &LineConfig, i: i64, a: i8, j: i64, b: i8) -> LineConfig {
    let mut c = config.clone();
    c.set(i, a);
    c.set(j, b);
    c
}

/// Largest violation of the two-site ratio identity between the kernels at
/// `i` and `j`, over the probe configurations and all spin pairs.
/// Also checks normalization at both sites.
pub fn single_site_axiom_check<K: SingleSiteKernel>(kernels: &K, i: i64, j: i64, probes: &[LineConfig]) -> Result<f64> {
    if i == j {
        return Err(invalid("the ratio identity needs two distinct sites"));
    }
    let vals = kernels.alphabet().values().to_vec();
    let mut defect = 0.0f64;
    for omega in probes {
        if !omega.window.contains(i) || !omega.window.contains(j) {
            return Err(invalid("probe configuration must cover both sites"));
        }
        for &site in &[i, j] {
            let s: f64 = vals.iter().map(|&v| kernels.prob(site, v, omega)).sum::<Result<f64>>()?;
            defect = defect.max((s - 1.0).abs());
        }
        // gi[(a, b)] = gamma_i(a | b at j), gj[(a, b)] = gamma_j(b | a at i)
        let mut gi = HashMap::new();
        let mut gj = HashMap::new();
        for &a in &vals {
            for &b in &vals {
                let c = with_pair(omega, i, a, j, b);
                gi.insert((a, b), kernels.prob(i, a, &c)?);
                gj.insert((a, b), kernels.prob(j, b, &c)?);
            }
        }
        for &ai in &vals {
            for &aj in &vals {
                let mut den_l = 0.0;
                let mut den_r = 0.0;
                for &bi in &vals {
                    for &bj in &vals {
                        den_l += gj[&(bi, bj)] * gi[&(bi, aj)] / gj[&(bi, aj)];
                        den_r += gi[&(bi, bj)] * gj[&(ai, bj)] / gi[&(ai, bj)];
                    }
                }
                let lhs = gi[&(ai, aj)] / den_l;
                let rhs = gj[&(ai, aj)] / den_r;
                defect = defect.max((lhs - rhs).abs());
            }
        }
    }
    Ok(defect)
}

/// `sup_A |int gamma_sub(1_A | .) d mu - mu(A)|` for `mu = gamma_window(. | boundary)`,
/// by full enumeration.
pub fn dlr_consistency_check(inter: &PairInteraction, window: &Window, sub: &Window, boundary: &Boundary) -> Result<f64> {
    if !window.contains_window(sub) {
        return Err(invalid("sub-window outside the window"));
    }
    let mu = window_gibbs_within(inter, window, boundary, DEFAULT_ENUMERATION_BUDGET)?;
    let a = inter.alphabet();
    let n = window.len();
    let first = a.values()[0];
    let lo = sub.lo - window.lo;
    let hi = sub.hi - window.lo;
    let key = |w: &[i8]| -> Result<usize> {
        let mut k = w.to_vec();
        for v in &mut k[lo as usize..=hi as usize] {
            *v = first;
        }
        a.word_index(&k)
    };
    let mut outside = HashMap::new();
    for (idx, p) in mu.probs.iter().enumerate() {
        *outside.entry(key(&a.word(idx, n))?).or_insert(0.0) += p;
    }
    let mut composed = vec![0.0; mu.probs.len()];
    let mut cache: HashMap<usize, Vec<f64>> = HashMap::new();
    for (idx, slot) in composed.iter_mut().enumerate() {
        let w = a.word(idx, n);
        let k = key(&w)?;
        if !cache.contains_key(&k) {
            let cfg = LineConfig::new(*window, w.clone(), boundary.clone())?;
            let inner = window_gibbs_within(inter, sub, &cfg.boundary_for(sub)?, DEFAULT_ENUMERATION_BUDGET)?;
            cache.insert(k, inner.probs);
        }
        let inner_idx = a.word_index(&w[lo as usize..=hi as usize])?;
        *slot = outside[&k] * cache[&k][inner_idx];
    }
    Ok(total_variation(&mu.probs, &composed))
}
