//! Exact computations for the lazy walk: transition kernels, return sums,
//! taboo (avoidance) probabilities, spectra and mixing times.

mod dense;
mod level;
mod rates;
mod ruin;

pub use dense::{DenseChain, Spectrum, DENSE_LIMIT};
pub use level::LevelChain;
pub use rates::{
    burn_in_length, first_visit_rate, mixing_time_bound, FirstVisitRate, BAND_CONSTANT,
};
pub use ruin::gambler_ruin;

use crate::error::{invalid, Error, Result};
use crate::graph::WalkGraph;
use crate::vertex_set::VertexSet;

/// Largest chain on which taboo powering is offered.
pub const EXACT_LIMIT: usize = 1 << 12;

/// Lazy steps after which the mixing-time search gives up.
pub const MIXING_CAP: u64 = 1_000_000;

const STOCHASTIC_TOL: f64 = 1e-12;

/// Sparse row-stochastic transition table of the lazy walk on a graph or
/// multigraph, with stationary law `π_v = deg(v) / 2m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LazyChain {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    probs: Vec<f64>,
    stationary: Vec<f64>,
}

impl LazyChain {
    pub fn from_graph<G: WalkGraph + ?Sized>(g: &G) -> Result<LazyChain> {
        let n = g.vertex_count();
        let total = g.total_degree() as f64;
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut cols = Vec::new();
        let mut probs = Vec::new();
        let mut stationary = Vec::with_capacity(n);
        let mut row: Vec<(u32, f64)> = Vec::new();
        for v in 0..n as u32 {
            let deg = g.degree(v);
            if deg == 0 {
                return Err(invalid(format!("vertex {v} is isolated")));
            }
            let move_prob = 0.5 / deg as f64;
            row.clear();
            row.push((v, 0.5));
            row.extend((0..deg).map(|slot| (g.endpoint(v, slot), move_prob)));
            row.sort_unstable_by_key(|&(w, _)| w);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            for &(w, p) in &row {
                match merged.last_mut() {
                    Some(last) if last.0 == w => last.1 += p,
                    _ => merged.push((w, p)),
                }
            }
            for (w, p) in merged {
                cols.push(w);
                probs.push(p);
            }
            offsets.push(cols.len());
            stationary.push(deg as f64 / total);
        }
        let chain = LazyChain {
            offsets,
            cols,
            probs,
            stationary,
        };
        chain.check_stochastic()?;
        Ok(chain)
    }

    pub fn n(&self) -> usize {
        self.stationary.len()
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Nonzero entries `(w, P(v, w))` of row `v`.
    pub fn row(&self, v: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let range = self.offsets[v as usize]..self.offsets[v as usize + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.probs[range].iter().copied())
    }

    pub fn prob(&self, v: u32, w: u32) -> f64 {
        self.row(v).find(|&(x, _)| x == w).map_or(0.0, |(_, p)| p)
    }

    /// Row sums within 1e-12 of one and detailed balance within 1e-12.
    pub fn check_stochastic(&self) -> Result<()> {
        for v in 0..self.n() as u32 {
            let sum: f64 = self.row(v).map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NumericalFailure(format!("row {v} sums to {sum}")));
            }
            for (w, p) in self.row(v) {
                let forward = self.stationary[v as usize] * p;
                let backward = self.stationary[w as usize] * self.prob(w, v);
                if (forward - backward).abs() > STOCHASTIC_TOL {
                    return Err(Error::NumericalFailure(format!(
                        "detailed balance fails on ({v}, {w})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `out = dist · P`.
    pub fn propagate(&self, dist: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (v, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (w, p) in self.row(v as u32) {
                out[w as usize] += mass * p;
            }
        }
    }

    fn point_mass(&self, v: u32) -> Result<Vec<f64>> {
        if v as usize >= self.n() {
            return Err(invalid(format!("vertex {v} out of range 0..{}", self.n())));
        }
        let mut dist = vec![0.0; self.n()];
        dist[v as usize] = 1.0;
        Ok(dist)
    }

    /// P^k_v(v) for k = 0..=t.
    pub fn return_probabilities(&self, v: u32, t: u64) -> Result<Vec<f64>> {
        let mut dist = self.point_mass(v)?;
        let mut next = vec![0.0; self.n()];
        let mut out = Vec::with_capacity(t as usize + 1);
        out.push(1.0);
        for _ in 0..t {
            self.propagate(&dist, &mut next);
            std::mem::swap(&mut dist, &mut next);
            out.push(dist[v as usize]);
        }
        Ok(out)
    }

    /// R_v = Σ_{k=0}^{t} P^k_v(v), the expected number of visits to `v` in
    /// lazy steps `0..=t` of a walk started at `v`.
    pub fn return_sum(&self, v: u32, t: u64) -> Result<f64> {
        Ok(self.return_probabilities(v, t)?.iter().sum())
    }

    fn check_exact_size(&self) -> Result<()> {
        if self.n() > EXACT_LIMIT {
            Err(Error::SizeExceeded {
                n: self.n(),
                limit: EXACT_LIMIT,
            })
        } else {
            Ok(())
        }
    }

    /// Probability that a lazy walk from `start` is outside `set` at every
    /// step in `[burn_in, t]`. Computed by taboo powering: mass that lands in
    /// `set` at or after `burn_in` is removed.
    pub fn avoidance_probability(
        &self,
        set: &VertexSet,
        start: u32,
        burn_in: u64,
        t: u64,
    ) -> Result<f64> {
        let init = self.point_mass(start)?;
        self.avoidance_from(set, &init, burn_in, t)
    }

    /// Same as [`avoidance_probability`](Self::avoidance_probability) from an
    /// arbitrary initial law.
    pub fn avoidance_from(
        &self,
        set: &VertexSet,
        init: &[f64],
        burn_in: u64,
        t: u64,
    ) -> Result<f64> {
        self.check_exact_size()?;
        if init.len() != self.n() || set.universe() != self.n() {
            return Err(invalid("initial law or set does not match chain size"));
        }
        if t < burn_in {
            return Ok(1.0);
        }
        let members = set.to_vec();
        let mut dist = init.to_vec();
        let mut next = vec![0.0; self.n()];
        for step in 0..=t {
            if step > 0 {
                self.propagate(&dist, &mut next);
                std::mem::swap(&mut dist, &mut next);
            }
            if step >= burn_in {
                for &s in &members {
                    dist[s as usize] = 0.0;
                }
            }
        }
        Ok(dist.iter().sum())
    }

    /// Exact law of the first visit to `set` in `[burn_in, horizon]`: entry
    /// `i` is the probability that the first such visit lands on `members[i]`.
    pub fn first_hit_split(
        &self,
        members: &[u32],
        start: u32,
        burn_in: u64,
        horizon: u64,
    ) -> Result<Vec<f64>> {
        self.check_exact_size()?;
        if burn_in > horizon {
            return Err(invalid("burn-in exceeds horizon"));
        }
        let mut dist = self.point_mass(start)?;
        let mut next = vec![0.0; self.n()];
        let mut absorbed = vec![0.0; members.len()];
        for step in 0..=horizon {
            if step > 0 {
                self.propagate(&dist, &mut next);
                std::mem::swap(&mut dist, &mut next);
            }
            if step >= burn_in {
                for (slot, &s) in members.iter().enumerate() {
                    absorbed[slot] += dist[s as usize];
                    dist[s as usize] = 0.0;
                }
            }
        }
        Ok(absorbed)
    }

    /// Law after `t` steps from `start`.
    pub fn distribution_after(&self, start: u32, t: u64) -> Result<Vec<f64>> {
        let mut dist = self.point_mass(start)?;
        let mut next = vec![0.0; self.n()];
        for _ in 0..t {
            self.propagate(&dist, &mut next);
            std::mem::swap(&mut dist, &mut next);
        }
        Ok(dist)
    }
}

/// Mixing time, return sum and first-visit rate of one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnProfile {
    pub t_mix: u64,
    pub r_v: f64,
    pub rate: FirstVisitRate,
}

impl ReturnProfile {
    /// Exact profile of any vertex of Q_d through the level chain.
    pub fn hypercube(d: usize) -> Result<ReturnProfile> {
        let level = LevelChain::new(d)?;
        let t_mix = level.mixing_time()?;
        let r_v = level.return_sum(t_mix);
        Ok(ReturnProfile {
            t_mix,
            r_v,
            rate: first_visit_rate(r_v, level.n(), t_mix)?,
        })
    }

    /// Profile of `v` on a regular graph small enough for dense powering.
    pub fn dense<G: WalkGraph + ?Sized>(g: &G, v: u32) -> Result<ReturnProfile> {
        let lazy = LazyChain::from_graph(g)?;
        let t_mix = DenseChain::from_lazy(&lazy)?.mixing_time(lazy.n())?;
        let r_v = lazy.return_sum(v, t_mix)?;
        Ok(ReturnProfile {
            t_mix,
            r_v,
            rate: first_visit_rate(r_v, lazy.n(), t_mix)?,
        })
    }
}
