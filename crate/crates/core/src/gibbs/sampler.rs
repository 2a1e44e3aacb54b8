use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Boundary, Window};
use crate::error::{invalid, Result};
use crate::gibbs::window::window_energy;
use crate::model::{ChainEnergy, PairInteraction};
use crate::stats::chain_seed;

/// Default burn-in, in sweeps per site of the window.
pub const BURN_IN_PER_SITE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerState {
    pub window: Window,
    pub spins: Vec<i8>,
    pub rng_seed: u64,
    pub sweep_count: u64,
}

/// Single-site heat-bath dynamics for a window Gibbs measure.
#[derive(Debug, Clone)]
pub struct HeatBath {
    energy: ChainEnergy,
    state: SamplerState,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
}

impl HeatBath {
    /// Starts from a uniformly random configuration drawn from `seed`.
    pub fn new(inter: &PairInteraction, window: &Window, boundary: &Boundary, seed: u64) -> Result<Self> {
        let energy = window_energy(inter, window, boundary)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals = inter.alphabet().values();
        let spins = (0..window.len()).map(|_| vals[rng.random_range(0..vals.len())]).collect();
        Ok(HeatBath {
            energy,
            state: SamplerState { window: *window, spins, rng_seed: seed, sweep_count: 0 },
            rng,
            weights: vec![0.0; vals.len()],
        })
    }

    pub fn state(&self) -> &SamplerState {
        &self.state
    }

    pub fn spins(&self) -> &[i8] {
        &self.state.spins
    }

    pub fn energy(&self) -> &ChainEnergy {
        &self.energy
    }

    /// Log-weights of each value at window position `i` given the current spins.
    pub fn conditional(&self, i: usize) -> Vec<f64> {
        self.energy.site_log_weights(&self.state.spins, i)
    }

    /// One left-to-right sweep of heat-bath updates.
    pub fn sweep(&mut self) {
        let n = self.state.spins.len();
        let vals = self.energy.alphabet().values().to_vec();
        for i in 0..n {
            let lw = self.energy.site_log_weights(&self.state.spins, i);
            let u: f64 = self.rng.random();
            self.state.spins[i] = if vals.len() == 2 {
                let p1 = 1.0 / (1.0 + (lw[0] - lw[1]).exp());
                if u < p1 {
                    vals[1]
                } else {
                    vals[0]
                }
            } else {
                let m = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for (w, l) in self.weights.iter_mut().zip(&lw) {
                    *w = (l - m).exp();
                    total += *w;
                }
                let mut target = u * total;
                let mut pick = vals.len() - 1;
                for (k, w) in self.weights.iter().enumerate() {
                    if target < *w {
                        pick = k;
                        break;
                    }
                    target -= w;
                }
                vals[pick]
            };
        }
        self.state.sweep_count += 1;
    }

    /// Runs `burn_in` sweeps, then `samples` snapshots taken every `thin` sweeps.
    pub fn run(&mut self, burn_in: usize, samples: usize, thin: usize, mut each: impl FnMut(&[i8])) -> Result<()> {
        if thin == 0 {
            return Err(invalid("thinning must be at least 1"));
        }
        for _ in 0..burn_in {
            self.sweep();
        }
        for _ in 0..samples {
            for _ in 0..thin {
                self.sweep();
            }
            each(&self.state.spins);
        }
        Ok(())
    }

    pub fn collect(&mut self, burn_in: usize, samples: usize, thin: usize) -> Result<SampleSet> {
        let mut spins = Vec::with_capacity(samples * self.state.spins.len());
        self.run(burn_in, samples, thin, |s| spins.extend_from_slice(s))?;
        Ok(SampleSet {
            window: self.state.window,
            spins,
            rows: samples,
            meta: SampleMeta { seed: self.state.rng_seed, sweeps: self.state.sweep_count, thin, burn_in },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub seed: u64,
    pub sweeps: u64,
    pub thin: usize,
    pub burn_in: usize,
}

/// Snapshots of a chain, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub window: Window,
    pub spins: Vec<i8>,
    pub rows: usize,
    pub meta: SampleMeta,
}

impl SampleSet {
    pub fn row(&self, k: usize) -> &[i8] {
        let n = self.window.len();
        &self.spins[k * n..(k + 1) * n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i8]> {
        self.spins.chunks(self.window.len())
    }

    /// Spin at window position `pos` in every snapshot.
    pub fn column(&self, pos: usize) -> Vec<f64> {
        self.iter().map(|r| r[pos] as f64).collect()
    }

    /// Mean spin per snapshot.
    pub fn magnetization(&self) -> Vec<f64> {
        self.iter().map(|r| r.iter().map(|&v| v as f64).sum::<f64>() / r.len() as f64).collect()
    }

    /// One byte per spin (two's complement), snapshots back to back.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        let bytes: Vec<u8> = self.spins.iter().map(|&v| v as u8).collect();
        out.write_all(&bytes)?;
        Ok(())
    }

    pub fn sidecar_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.meta)?)
    }
}

/// `chains` independent chains with seeds split from `master`, run in parallel.
#[allow(clippy::too_many_arguments)]
pub fn run_chains(
    inter: &PairInteraction,
    window: &Window,
    boundary: &Boundary,
    master: u64,
    chains: usize,
    burn_in: usize,
    samples: usize,
    thin: usize,
) -> Result<Vec<SampleSet>> {
    (0..chains as u64)
        .into_par_iter()
        .map(|i| HeatBath::new(inter, window, boundary, chain_seed(master, i))?.collect(burn_in, samples, thin))
        .collect()
}

pub fn default_burn_in(window: &Window) -> usize {
    BURN_IN_PER_SITE * window.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tail;

    #[test]
    fn same_seed_same_trajectory() {
        let inter = PairInteraction::dyson(2.0, 0.1).unwrap();
        let w = Window::centered(6).unwrap();
        let b = Boundary::uniform(Tail::AllPlus);
        let a = HeatBath::new(&inter, &w, &b, 9).unwrap().collect(10, 50, 1).unwrap();
        let c = HeatBath::new(&inter, &w, &b, 9).unwrap().collect(10, 50, 1).unwrap();
        assert_eq!(a, c);
        assert_eq!(a.meta.sweeps, 60);
    }

    #[test]
    fn infinite_temperature_is_fair() {
        let inter = PairInteraction::dyson(2.0, 0.0).unwrap();
        let w = Window::centered(4).unwrap();
        let s = HeatBath::new(&inter, &w, &Boundary::free(), 1).unwrap().collect(0, 20_000, 1).unwrap();
        let m: f64 = s.magnetization().iter().sum::<f64>() / s.rows as f64;
        assert!(m.abs() < 3.0 / (s.rows as f64).sqrt());
    }

    #[test]
    fn binary_stream_is_one_byte_per_spin() {
        let inter = PairInteraction::dyson(2.0, 0.1).unwrap();
        let w = Window::centered(3).unwrap();
        let s = HeatBath::new(&inter, &w, &Boundary::free(), 2).unwrap().collect(0, 4, 2).unwrap();
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 12);
        assert!(buf.iter().all(|&b| b == 1 || b == 255));
        assert!(s.sidecar_json().unwrap().contains("\"thin\": 2"));
    }
}
