//! Monte Carlo estimators for return sums, first-visit laws, which-vertex
//! splits, contraction and pair independence. Each trial draws from its own
//! stream `(seed, trial)` and per-trial results are reduced in trial order,
//! so every estimate is bit-reproducible whatever the thread count.

use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::chain::{DenseChain, LazyChain};
use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, WalkGraph};
use crate::rng::stream_rng;
use crate::vacant::VisitBitmap;
use crate::vertex_set::VertexSet;
use crate::walk::{first_visit_time, run_walk, WalkMode};

/// Point estimate with a normal-approximation standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub trials: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64], seed: u64) -> Estimate {
        let trials = samples.len() as u64;
        if trials == 0 {
            return Estimate {
                value: f64::NAN,
                se: f64::INFINITY,
                trials,
                seed,
            };
        }
        let n = trials as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if trials > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Estimate {
            value: mean,
            se: (var / n).sqrt(),
            trials,
            seed,
        }
    }

    /// `value ± z·se`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.value - z * self.se, self.value + z * self.se)
    }

    pub fn covers(&self, x: f64, z: f64) -> bool {
        let (lo, hi) = self.interval(z);
        lo <= x && x <= hi
    }
}

fn parallel_trials<T, F>(trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

/// Mean number of visits to `v` during lazy steps `0..=t_mix` of a walk
/// started at `v`.
pub fn estimate_return_sum<G: WalkGraph + ?Sized>(
    g: &G,
    v: u32,
    t_mix: u64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if v as usize >= g.vertex_count() {
        return Err(invalid(format!("vertex {v} out of range")));
    }
    let counts = parallel_trials(trials, |trial| {
        let mut visits = 0u64;
        let mut obs = |_s: u64, x: u32| {
            if x == v {
                visits += 1;
            }
            ControlFlow::Continue(())
        };
        run_walk(
            g,
            v,
            t_mix,
            WalkMode::Lazy,
            stream_rng(seed, trial),
            &mut obs,
        );
        visits as f64
    });
    Ok(Estimate::from_samples(&counts, seed))
}

/// Probability that a lazy walk from `start` enters `targets` within
/// `horizon` steps (step 0 included).
pub fn hitting_probability<G: WalkGraph + ?Sized>(
    g: &G,
    targets: &VertexSet,
    start: u32,
    horizon: u64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    let hits = parallel_trials(trials, |trial| {
        first_visit_time(g, start, targets, 0, horizon, stream_rng(seed, trial)).map(|h| {
            if h.is_some() {
                1.0
            } else {
                0.0
            }
        })
    });
    let hits: Vec<f64> = hits.into_iter().collect::<Result<_>>()?;
    Ok(Estimate::from_samples(&hits, seed))
}

/// P(k, L): chance that a walk started at distance `k` from `v` reaches N(v)
/// within `horizon` lazy steps.
pub fn neighbourhood_hit_probability(
    g: &Graph,
    v: u32,
    start: u32,
    horizon: u64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    let targets = VertexSet::from_vertices(g.n(), g.neighbors(v));
    hitting_probability(g, &targets, start, horizon, trials, seed)
}

/// Empirical Pr(A_v(t)): the fraction of walks with no visit to `v` during
/// `[burn_in, t]`, for `t` in `burn_in..=tmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    pub burn_in: u64,
    pub tmax: u64,
    pub trials: u64,
    pub seed: u64,
    /// `survivors[i]`: walks with no visit in `[burn_in, burn_in + i]`.
    pub survivors: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Fitted per-step decay `−d ln S / dt`.
    pub rate: f64,
    pub intercept: f64,
    pub from: u64,
    pub to: u64,
    pub points: usize,
}

/// Points with fewer survivors than this are left out of the fit.
pub const MIN_FIT_SURVIVORS: u64 = 30;

impl SurvivalCurve {
    pub fn survival(&self, t: u64) -> f64 {
        if t < self.burn_in {
            return 1.0;
        }
        self.survivors[(t - self.burn_in) as usize] as f64 / self.trials as f64
    }

    pub fn standard_error(&self, t: u64) -> f64 {
        let s = self.survival(t);
        (s * (1.0 - s) / self.trials as f64).sqrt()
    }

    /// `(t, survival, standard error)` for every `t` in `burn_in..=tmax`.
    pub fn points(&self) -> impl Iterator<Item = (u64, f64, f64)> + '_ {
        (self.burn_in..=self.tmax).map(|t| (t, self.survival(t), self.standard_error(t)))
    }

    /// Weighted least squares of `ln S(t)` on `t` over `[from, tmax]`, each
    /// point weighted by its survivor count.
    pub fn fit_decay(&self, from: u64) -> Result<DecayFit> {
        let from = from.max(self.burn_in);
        let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut points = 0usize;
        let mut last = from;
        for t in from..=self.tmax {
            let alive = self.survivors[(t - self.burn_in) as usize];
            if alive < MIN_FIT_SURVIVORS {
                break;
            }
            let w = alive as f64;
            let x = (t - from) as f64;
            let y = (alive as f64 / self.trials as f64).ln();
            sw += w;
            sx += w * x;
            sy += w * y;
            sxx += w * x * x;
            sxy += w * x * y;
            points += 1;
            last = t;
        }
        if points < 2 {
            return Err(Error::InsufficientData {
                observed: points as u64,
                required: 2,
            });
        }
        let denom = sw * sxx - sx * sx;
        let slope = (sw * sxy - sx * sy) / denom;
        let intercept = (sy - slope * sx) / sw;
        Ok(DecayFit {
            rate: -slope,
            intercept,
            from,
            to: last,
            points,
        })
    }
}

pub fn survival_curve<G: WalkGraph + ?Sized>(
    g: &G,
    start: u32,
    v: u32,
    burn_in: u64,
    tmax: u64,
    trials: u64,
    seed: u64,
) -> Result<SurvivalCurve> {
    if burn_in > tmax {
        return Err(invalid("burn-in exceeds tmax"));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let n = g.vertex_count();
    if start as usize >= n || v as usize >= n {
        return Err(invalid("vertex out of range"));
    }
    let target = VertexSet::from_vertices(n, [v]);
    let hits: Vec<Option<u64>> = parallel_trials(trials, |trial| {
        first_visit_time(g, start, &target, burn_in, tmax, stream_rng(seed, trial))
            .map(|h| h.map(|(t, _)| t))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let len = (tmax - burn_in + 1) as usize;
    let mut hit_at = vec![0u64; len];
    for t in hits.into_iter().flatten() {
        hit_at[(t - burn_in) as usize] += 1;
    }
    let mut survivors = Vec::with_capacity(len);
    let mut alive = trials;
    for count in hit_at {
        alive -= count;
        survivors.push(alive);
    }
    Ok(SurvivalCurve {
        burn_in,
        tmax,
        trials,
        seed,
        survivors,
    })
}

/// Where the first visit to a set after burn-in lands.
#[derive(Debug, Clone, PartialEq)]
pub struct WhichVertexReport {
    pub members: Vec<u32>,
    pub counts: Vec<u64>,
    pub hits: u64,
    /// Trials with no visit before the horizon, discarded.
    pub censored: u64,
    pub trials: u64,
    pub seed: u64,
    /// `L·π_S`, the scale of the relative error of the p_v split.
    pub xi: f64,
}

impl WhichVertexReport {
    pub fn frequency(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.hits as f64
    }

    pub fn standard_error(&self, i: usize) -> f64 {
        let f = self.frequency(i);
        (f * (1.0 - f) / self.hits as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhichVertexPlan {
    pub start: u32,
    pub burn_in: u64,
    /// Last lazy step at which a hit is counted.
    pub horizon: u64,
    pub min_hits: u64,
    /// L, used only to report ξ.
    pub settle_length: u64,
}

impl WhichVertexPlan {
    /// Hits are counted for `4n` lazy steps after burn-in.
    pub fn with_default_horizon(n: usize, start: u32, burn_in: u64, settle_length: u64) -> Self {
        WhichVertexPlan {
            start,
            burn_in,
            horizon: burn_in + 4 * n as u64,
            min_hits: 30,
            settle_length,
        }
    }
}

pub fn which_vertex_freq<G: WalkGraph + ?Sized>(
    g: &G,
    members: &[u32],
    plan: &WhichVertexPlan,
    trials: u64,
    seed: u64,
) -> Result<WhichVertexReport> {
    let n = g.vertex_count();
    let set = VertexSet::from_vertices(n, members.iter().copied().filter(|&v| (v as usize) < n));
    if set.len() != members.len() || members.len() < 2 {
        return Err(invalid("need at least two distinct in-range vertices"));
    }
    let outcomes: Vec<Option<(u64, u32)>> = parallel_trials(trials, |trial| {
        first_visit_time(
            g,
            plan.start,
            &set,
            plan.burn_in,
            plan.horizon,
            stream_rng(seed, trial),
        )
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut counts = vec![0u64; members.len()];
    let mut censored = 0;
    for outcome in outcomes {
        match outcome {
            Some((_, v)) => {
                let slot = members.iter().position(|&m| m == v).unwrap();
                counts[slot] += 1;
            }
            None => censored += 1,
        }
    }
    let hits = trials - censored;
    if hits < plan.min_hits {
        return Err(Error::InsufficientData {
            observed: hits,
            required: plan.min_hits,
        });
    }
    let pi_s = members.len() as f64 / n as f64;
    Ok(WhichVertexReport {
        members: members.to_vec(),
        counts,
        hits,
        censored,
        trials,
        seed,
        xi: plan.settle_length as f64 * pi_s,
    })
}

/// Avoidance of S in H against avoidance of γ in Γ(H, S).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionReport {
    pub prob_h: f64,
    pub prob_gamma: f64,
    pub difference: f64,
    pub burn_in: u64,
    pub t: u64,
}

/// Exact check of set-avoidance in `g` against vertex-avoidance after
/// contraction, both from `start ∉ S`, over steps `[burn_in, t]`.
///
/// With `burn_in = 0` the two walks agree path by path until they first
/// touch S (resp. γ), so the probabilities coincide exactly.
pub fn contraction_check(
    g: &Graph,
    set: &VertexSet,
    start: u32,
    burn_in: u64,
    t: u64,
) -> Result<ContractionReport> {
    if set.contains(start) {
        return Err(invalid("start vertex lies in the contracted set"));
    }
    let h_chain = LazyChain::from_graph(g)?;
    let contracted = g.contract(set)?;
    let info = contracted.contraction().unwrap();
    let gamma_chain = LazyChain::from_graph(&contracted)?;
    let gamma_set = VertexSet::from_vertices(contracted.vertex_count(), [info.gamma]);
    let prob_h = h_chain.avoidance_probability(set, start, burn_in, t)?;
    let prob_gamma = gamma_chain.avoidance_probability(
        &gamma_set,
        info.vertex_map[start as usize],
        burn_in,
        t,
    )?;
    Ok(ContractionReport {
        prob_h,
        prob_gamma,
        difference: (prob_h - prob_gamma).abs(),
        burn_in,
        t,
    })
}

/// Mixing time valid for both H and Γ(H, S), with threshold `n^{-3}` where
/// `n = |V(H)|`.
pub fn joint_mixing_time(g: &Graph, set: &VertexSet) -> Result<u64> {
    let contracted = g.contract(set)?;
    let t_h = DenseChain::from_graph(g)?.mixing_time(g.n())?;
    let t_gamma = DenseChain::from_graph(&contracted)?.mixing_time(g.n())?;
    Ok(t_h.max(t_gamma))
}

/// The contraction comparison with burn-in equal to a joint mixing time T,
/// over `[T, T + window]`. Returns the report and the additive tolerance
/// `10·|S| / n³`.
pub fn stationarized_contraction_check(
    g: &Graph,
    set: &VertexSet,
    start: u32,
    window: u64,
) -> Result<(ContractionReport, f64)> {
    let t_mix = joint_mixing_time(g, set)?;
    let report = contraction_check(g, set, start, t_mix, t_mix + window)?;
    let tolerance = 10.0 * set.len() as f64 / (g.n() as f64).powi(3);
    Ok((report, tolerance))
}

/// Joint and marginal frequencies of two vertices staying in U_0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairIndependence {
    pub trials: u64,
    pub seed: u64,
    pub p_both: f64,
    pub p_v: f64,
    pub p_w: f64,
    pub product: f64,
    pub ratio: f64,
    /// Delta-method standard error of the ratio.
    pub ratio_se: f64,
    /// Half-width `c·ln d / d²` of the band around 1.
    pub band: f64,
    /// The 3σ interval for the ratio misses `[1 − band, 1 + band]`.
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPlan {
    pub start: u32,
    /// U_0 window opens here (lazy steps).
    pub burn_in: u64,
    /// Lazy steps walked, i.e. `2t` for speedy time `t`.
    pub lazy_horizon: u64,
    pub band_constant: f64,
}

pub fn pair_independence(
    g: &Graph,
    v: u32,
    w: u32,
    plan: &PairPlan,
    trials: u64,
    seed: u64,
) -> Result<PairIndependence> {
    if v == w || v as usize >= g.n() || w as usize >= g.n() {
        return Err(invalid("need two distinct in-range vertices"));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    // cell index: bit 0 = v in U_0, bit 1 = w in U_0
    let cells: Vec<usize> = parallel_trials(trials, |trial| {
        let mut bitmap = VisitBitmap::new(g.n(), plan.burn_in);
        run_walk(
            g,
            plan.start,
            plan.lazy_horizon,
            WalkMode::Lazy,
            stream_rng(seed, trial),
            &mut bitmap,
        );
        let u0 = bitmap.window_vacant();
        usize::from(u0.contains(v)) | (usize::from(u0.contains(w)) << 1)
    });
    let mut counts = [0u64; 4];
    for c in cells {
        counts[c] += 1;
    }
    let nt = trials as f64;
    let both = counts[3] as f64 / nt;
    let v_only = counts[1] as f64 / nt;
    let w_only = counts[2] as f64 / nt;
    let p_v = both + v_only;
    let p_w = both + w_only;
    let product = p_v * p_w;
    let ratio = both / product;
    // delta method on ln(ratio) over the multinomial cells
    let grad = [
        0.0,
        -1.0 / p_v,
        -1.0 / p_w,
        1.0 / both - 1.0 / p_v - 1.0 / p_w,
    ];
    let probs = [1.0 - both - v_only - w_only, v_only, w_only, both];
    let mean: f64 = grad.iter().zip(&probs).map(|(g, p)| g * p).sum();
    let second: f64 = grad.iter().zip(&probs).map(|(g, p)| g * g * p).sum();
    let log_var = ((second - mean * mean) / nt).max(0.0);
    let ratio_se = ratio * log_var.sqrt();
    let d = g.d() as f64;
    let band = plan.band_constant * d.ln() / (d * d);
    let (lo, hi) = (ratio - 3.0 * ratio_se, ratio + 3.0 * ratio_se);
    let flagged = !ratio.is_finite() || hi < 1.0 - band || lo > 1.0 + band;
    Ok(PairIndependence {
        trials,
        seed,
        p_both: both,
        p_v,
        p_w,
        product,
        ratio,
        ratio_se,
        band,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn return_sum_with_zero_horizon() {
        let g = Graph::hypercube(6).unwrap();
        let est = estimate_return_sum(&g, 5, 0, 100, 1).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.se, 0.0);
    }

    #[test]
    fn estimates_reproducible() {
        let g = Graph::hypercube(7).unwrap();
        let a = estimate_return_sum(&g, 0, 50, 500, 3).unwrap();
        let b = estimate_return_sum(&g, 0, 50, 500, 3).unwrap();
        assert_eq!(a, b);
        let c = estimate_return_sum(&g, 0, 50, 500, 4).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn survival_starts_near_one_and_never_rises() {
        let g = Graph::hypercube(8).unwrap();
        let curve = survival_curve(&g, 0, 255, 40, 800, 2000, 5).unwrap();
        assert!(curve.survival(40) > 0.98);
        assert!(curve.survivors.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(curve.survival(10), 1.0);
    }

    #[test]
    fn fit_needs_points() {
        let curve = SurvivalCurve {
            burn_in: 0,
            tmax: 2,
            trials: 10,
            seed: 0,
            survivors: vec![10, 5, 1],
        };
        assert!(matches!(
            curve.fit_decay(0),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn fit_recovers_exact_exponential() {
        let rate: f64 = 0.01;
        let trials = 1_000_000u64;
        let survivors: Vec<u64> = (0..200)
            .map(|t| (trials as f64 * (-rate * t as f64).exp()).round() as u64)
            .collect();
        let curve = SurvivalCurve {
            burn_in: 0,
            tmax: 199,
            trials,
            seed: 0,
            survivors,
        };
        let fit = curve.fit_decay(0).unwrap();
        assert!((fit.rate - rate).abs() < 1e-5);
    }

    #[test]
    fn which_vertex_needs_two_members() {
        let g = Graph::hypercube(5).unwrap();
        let plan = WhichVertexPlan::with_default_horizon(32, 0, 10, 10);
        assert!(which_vertex_freq(&g, &[3], &plan, 10, 0).is_err());
        assert!(which_vertex_freq(&g, &[3, 3], &plan, 10, 0).is_err());
        let strict = WhichVertexPlan {
            min_hits: 1000,
            ..plan.clone()
        };
        assert!(matches!(
            which_vertex_freq(&g, &[3, 5], &strict, 10, 0),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn contraction_window_before_burn_in() {
        let g = Graph::hypercube(5).unwrap();
        let set = VertexSet::from_vertices(32, [7, 9]);
        let rep = contraction_check(&g, &set, 0, 10, 5).unwrap();
        assert_eq!(rep.prob_h, 1.0);
        assert_eq!(rep.prob_gamma, 1.0);
        assert!(contraction_check(&g, &set, 7, 0, 5).is_err());
    }

    #[test]
    fn pair_at_time_zero() {
        let g = Graph::hypercube(6).unwrap();
        let plan = PairPlan {
            start: 0,
            burn_in: 0,
            lazy_horizon: 0,
            band_constant: 1.0,
        };
        let rep = pair_independence(&g, 21, 42, &plan, 50, 0).unwrap();
        assert_eq!(rep.p_both, 1.0);
        assert_eq!(rep.ratio, 1.0);
        assert_eq!(rep.ratio_se, 0.0);
        assert!(!rep.flagged);
    }
}
