//! Checks of the expansion properties P1–P4.
//!
//! Asymptotic conditions (`≪`, `o(·)`) are read with explicit factor-10
//! margins; every check also reports the raw measured quantity. A failing
//! check always carries a witness that [`verify_witness`] can confirm from
//! the graph alone.

use std::fmt;

use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::chain::{DenseChain, LevelChain, DENSE_LIMIT};
use crate::error::{invalid, Result};
use crate::graph::Graph;
use crate::rng::stream_rng;
use crate::vertex_set::VertexSet;

/// Factor used to read `a ≪ b` as `10·a <= b` and `a = o(b)` as `a <= b/10`.
pub const MARGIN: f64 = 10.0;

/// Graphs up to this size are checked exhaustively for P3.
pub const P3_EXHAUSTIVE_LIMIT: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    P1,
    P2,
    P3,
    P4,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    SampledPass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self != Verdict::Fail
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::SampledPass => "sampled-pass",
            Verdict::Fail => "fail",
        })
    }
}

/// Evidence that a property fails.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// A test function whose Dirichlet ratio bounds the spectral gap above.
    TestFunction(Vec<f64>),
    /// A pair with ν(u, v) > ρ₂·dist(u, v).
    Pair { u: u32, v: u32 },
    /// A set whose induced edge count breaks the bound.
    Set(Vec<u32>),
    /// An inequality `lhs <= rhs` that does not hold.
    Inequality { lhs: f64, rhs: f64 },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::TestFunction(values) => write!(f, "test-function[{}]", values.len()),
            Witness::Pair { u, v } => write!(f, "pair({u};{v})"),
            Witness::Set(set) => {
                let parts: Vec<String> = set.iter().map(|v| v.to_string()).collect();
                write!(f, "set({})", parts.join(";"))
            }
            Witness::Inequality { lhs, rhs } => write!(f, "{lhs:e}>{rhs:e}"),
        }
    }
}

/// Which upper window applies to d in P2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum P2Exponent {
    Fifth,
    Quarter,
}

impl P2Exponent {
    pub fn value(self) -> f64 {
        match self {
            P2Exponent::Fifth => 0.2,
            P2Exponent::Quarter => 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub property: Property,
    pub verdict: Verdict,
    /// The measured constant: gap for P1, d for P2, max ν/dist for P3, and
    /// for P4 max e(S) over the Hart bound (hypercubes) or max e(S)/(d|S|).
    pub measured: f64,
    /// What `measured` was compared against.
    pub threshold: f64,
    /// Pairs, sets or eigenpairs examined.
    pub evidence: u64,
    pub witness: Option<Witness>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
}

/// Ratio `E(f, f) / Var_π(f)` for the lazy walk. By the variational
/// characterisation this bounds `1 − λ₂` from above for any nonconstant `f`.
pub fn dirichlet_ratio(g: &Graph, f: &[f64]) -> f64 {
    let n = g.n() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let spread: f64 = f.iter().map(|x| (x - mean).powi(2)).sum();
    let energy: f64 = g
        .edges()
        .map(|(u, v)| (f[u as usize] - f[v as usize]).powi(2))
        .sum();
    energy / (2.0 * g.d() as f64 * spread)
}

/// P1: lazy spectral gap at least `c / d^{ρ₁}`.
///
/// Hypercubes use the level chain (distinct eigenvalues `1 − k/d`),
/// cross-checked against a dense eigensolve when the cube is small enough.
/// Other graphs need `n <= DENSE_LIMIT`.
pub fn check_p1(g: &Graph, rho1: f64, c: f64) -> Result<PropertyCheck> {
    let threshold = c / (g.d() as f64).powf(rho1);
    let (gap, witness_fn, note) = if g.is_hypercube() {
        let gap = LevelChain::new(g.d())?.spectral_gap()?;
        let mut note = String::from("level-chain spectrum");
        if g.n() <= DENSE_LIMIT.min(1 << 10) {
            let dense_gap = DenseChain::from_graph(g)?.spectral_gap()?;
            note = format!("level-chain spectrum; dense cross-check gap={dense_gap:.12}");
        }
        let coordinate: Vec<f64> = (0..g.n() as u32)
            .map(|v| if v & 1 == 0 { 1.0 } else { -1.0 })
            .collect();
        (gap, coordinate, note)
    } else {
        let spectrum = DenseChain::from_graph(g)?.spectrum()?;
        (
            spectrum.gap(),
            spectrum.second_vector.clone(),
            "dense eigensolve".to_string(),
        )
    };
    let passed = gap >= threshold * (1.0 - 1e-9);
    Ok(PropertyCheck {
        property: Property::P1,
        verdict: if passed { Verdict::Pass } else { Verdict::Fail },
        measured: gap,
        threshold,
        evidence: 1,
        witness: (!passed).then_some(Witness::TestFunction(witness_fn)),
        note,
    })
}

/// P2: `(ln ln n)^{2/ε} ≪ d = O((n / ln n)^{exponent})`, evaluated in log
/// space from `ln n`. The upper bound is read with constant 1.
pub fn check_p2(ln_n: f64, d: f64, eps: f64, exponent: P2Exponent) -> Result<PropertyCheck> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(ln_n > 1.0 && d >= 1.0) {
        return Err(invalid("need ln n > 1 and d >= 1"));
    }
    let ln_lower = (2.0 / eps) * ln_n.ln().ln() + MARGIN.ln();
    let ln_upper = exponent.value() * (ln_n - ln_n.ln());
    let ln_d = d.ln();
    let lower_margin = ln_d - ln_lower;
    let upper_margin = ln_upper - ln_d;
    let passed = lower_margin >= 0.0 && upper_margin >= 0.0;
    let witness = if lower_margin < 0.0 {
        Some(Witness::Inequality {
            lhs: ln_lower.exp(),
            rhs: d,
        })
    } else if upper_margin < 0.0 {
        Some(Witness::Inequality {
            lhs: d,
            rhs: ln_upper.exp(),
        })
    } else {
        None
    };
    Ok(PropertyCheck {
        property: Property::P2,
        verdict: if passed { Verdict::Pass } else { Verdict::Fail },
        measured: d,
        threshold: ln_lower.exp(),
        evidence: 2,
        witness,
        note: format!(
            "exponent={}; ln-margins lower={lower_margin:.4} upper={upper_margin:.4}",
            exponent.value()
        ),
    })
}

/// Worst pair among those from `u` within `radius`: (max ν/dist, violating
/// pair if any, pairs examined).
fn p3_scan_from(g: &Graph, u: u32, radius: f64, rho2: f64) -> (f64, Option<(u32, u32)>, u64) {
    let dist = g.distances_from(u);
    let mut worst = 0.0f64;
    let mut violation = None;
    let mut pairs = 0u64;
    for v in 0..g.n() as u32 {
        let Some(k) = dist[v as usize].finite() else {
            continue;
        };
        if k == 0 || k as f64 > radius {
            continue;
        }
        pairs += 1;
        let nu = g.closer_neighbor_count_from(&dist, v) as f64;
        let ratio = nu / k as f64;
        worst = worst.max(ratio);
        if violation.is_none() && nu > rho2 * k as f64 {
            violation = Some((u, v));
        }
    }
    (worst, violation, pairs)
}

/// P3: `ν(u, v) <= ρ₂·dist(u, v)` whenever `dist(u, v) <= d^ε`.
/// Exhaustive up to `P3_EXHAUSTIVE_LIMIT` vertices; otherwise all pairs from
/// `sample_budget` random sources.
pub fn check_p3(
    g: &Graph,
    eps: f64,
    rho2: f64,
    sample_budget: u64,
    seed: u64,
) -> Result<PropertyCheck> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    let radius = (g.d() as f64).powf(eps);
    let exhaustive = g.n() <= P3_EXHAUSTIVE_LIMIT;
    let sources: Vec<u32> = if exhaustive {
        (0..g.n() as u32).collect()
    } else {
        (0..sample_budget)
            .map(|i| stream_rng(seed, i).random_range(0..g.n() as u32))
            .collect()
    };
    let scans: Vec<_> = sources
        .par_iter()
        .map(|&u| p3_scan_from(g, u, radius, rho2))
        .collect();
    let mut worst = 0.0f64;
    let mut violation = None;
    let mut pairs = 0;
    for (w, viol, p) in scans {
        worst = worst.max(w);
        if violation.is_none() {
            violation = viol;
        }
        pairs += p;
    }
    let verdict = match (violation.is_some(), exhaustive) {
        (true, _) => Verdict::Fail,
        (false, true) => Verdict::Pass,
        (false, false) => Verdict::SampledPass,
    };
    Ok(PropertyCheck {
        property: Property::P3,
        verdict,
        measured: worst,
        threshold: rho2,
        evidence: pairs,
        witness: violation.map(|(u, v)| Witness::Pair { u, v }),
        note: format!(
            "radius d^eps={radius:.4}; {}",
            if exhaustive {
                "exhaustive"
            } else {
                "sampled sources"
            }
        ),
    })
}

/// Upper bound `(s/2)·log₂ s` on edges induced by an `s`-set of a hypercube.
pub fn hart_bound(s: usize) -> f64 {
    if s <= 1 {
        0.0
    } else {
        s as f64 / 2.0 * (s as f64).log2()
    }
}

/// Vertices of the subcube spanned by `coords` through `anchor`.
pub fn subcube(anchor: u32, coords: &[usize]) -> Vec<u32> {
    (0..1u32 << coords.len())
        .map(|mask| {
            coords
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold(anchor, |acc, (_, &c)| acc ^ (1 << c))
        })
        .collect()
}

/// A connected set of up to `size` vertices grown from a random seed vertex
/// by repeatedly adding a random neighbour of a random member.
pub fn random_connected_set<R: Rng>(g: &Graph, size: usize, rng: &mut R) -> Vec<u32> {
    let first = rng.random_range(0..g.n() as u32);
    let mut members = vec![first];
    let mut frontier: Vec<u32> = g.neighbors(first).collect();
    while members.len() < size {
        frontier.retain(|w| !members.contains(w));
        let Some(&next) = frontier.choose(rng) else {
            break;
        };
        members.push(next);
        frontier.extend(g.neighbors(next));
    }
    members
}

fn random_set<R: Rng>(g: &Graph, size: usize, rng: &mut R) -> Vec<u32> {
    let mut members = Vec::with_capacity(size);
    while members.len() < size.min(g.n()) {
        let v = rng.random_range(0..g.n() as u32);
        if !members.contains(&v) {
            members.push(v);
        }
    }
    members
}

/// P4: small sets induce few edges. On hypercubes every set is held to the
/// Hart bound `e(S) <= (s/2)·log₂ s`, including one canonical and one random
/// subcube of each dimension; otherwise `e(S) <= d|S| / 10` on random
/// connected sets. Sample `i` uses size `sizes[i % sizes.len()]` and
/// alternates between connected and uniform sets.
pub fn check_p4(g: &Graph, sizes: &[usize], samples: u64, seed: u64) -> Result<PropertyCheck> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(invalid(
            "set sizes must be a nonempty list of positive sizes",
        ));
    }
    let d = g.d() as f64;
    let mut sets: Vec<Vec<u32>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let size = sizes[(i as usize) % sizes.len()];
            if i % 2 == 0 {
                random_connected_set(g, size, &mut rng)
            } else {
                random_set(g, size, &mut rng)
            }
        })
        .collect();
    if g.is_hypercube() {
        let mut rng = stream_rng(seed, u64::MAX - 1);
        for k in 0..=g.d() {
            let canonical: Vec<usize> = (0..k).collect();
            sets.push(subcube(0, &canonical));
            let mut coords: Vec<usize> = (0..g.d()).collect();
            let (chosen, _) = rand::seq::SliceRandom::partial_shuffle(&mut coords[..], &mut rng, k);
            let anchor = rng.random_range(0..g.n() as u32);
            sets.push(subcube(anchor, chosen));
        }
    }
    let counts: Vec<usize> = sets
        .par_iter()
        .map(|s| {
            if s.len() <= 64 {
                g.induced_edge_count_of(s)
            } else {
                g.induced_edge_count(&VertexSet::from_vertices(g.n(), s.iter().copied()))
            }
        })
        .collect();
    let mut worst_density = 0.0f64;
    let mut worst_hart = 0.0f64;
    let mut violation = None;
    for (set, &edges) in sets.iter().zip(&counts) {
        let s = set.len();
        let density = edges as f64 / (d * s as f64);
        worst_density = worst_density.max(density);
        let broken = if g.is_hypercube() {
            let bound = hart_bound(s);
            if bound > 0.0 {
                worst_hart = worst_hart.max(edges as f64 / bound);
            }
            edges as f64 > bound + 1e-9
        } else {
            density > 1.0 / MARGIN
        };
        if broken && violation.is_none() {
            violation = Some(set.clone());
        }
    }
    let (measured, threshold, note) = if g.is_hypercube() {
        (
            worst_hart,
            1.0,
            format!("max e(S)/hart-bound; max e(S)/(d|S|)={worst_density:.6}"),
        )
    } else {
        (
            worst_density,
            1.0 / MARGIN,
            "max e(S)/(d|S|) on random connected and uniform sets".into(),
        )
    };
    let verdict = if violation.is_some() {
        Verdict::Fail
    } else {
        Verdict::SampledPass
    };
    Ok(PropertyCheck {
        property: Property::P4,
        verdict,
        measured,
        threshold,
        evidence: sets.len() as u64,
        witness: violation.map(Witness::Set),
        note,
    })
}

/// Re-derive a failure from the witness alone.
pub fn verify_witness(g: &Graph, check: &PropertyCheck, rho2: f64) -> bool {
    match (&check.property, &check.witness) {
        (Property::P1, Some(Witness::TestFunction(f))) => {
            dirichlet_ratio(g, f) < check.threshold * (1.0 - 1e-9)
        }
        (Property::P2, Some(Witness::Inequality { lhs, rhs })) => lhs > rhs,
        (Property::P3, Some(Witness::Pair { u, v })) => {
            let dist = crate::graph::bfs_distances(g, *u);
            match dist[*v as usize].finite() {
                Some(k) if k > 0 => {
                    let nu = g
                        .neighbors(*v)
                        .filter(|&w| dist[w as usize] <= dist[*v as usize])
                        .count();
                    nu as f64 > rho2 * k as f64
                }
                _ => false,
            }
        }
        (Property::P4, Some(Witness::Set(set))) => {
            let edges = g.induced_edge_count_of(set) as f64;
            if g.is_hypercube() {
                edges > hart_bound(set.len()) + 1e-9
            } else {
                edges / (g.d() as f64 * set.len() as f64) > 1.0 / MARGIN
            }
        }
        _ => false,
    }
}

/// Least-squares fit of `gap = c / d^{ρ₁}` over `(d, gap)` points, returning
/// `(ρ₁, c)`.
pub fn fit_rho1(points: &[(usize, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 || points.iter().any(|&(d, gap)| d < 1 || gap <= 0.0) {
        return Err(invalid(
            "need two or more points with d >= 1 and positive gap",
        ));
    }
    let xs: Vec<f64> = points.iter().map(|&(d, _)| (d as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, g)| g.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("need at least two distinct degrees"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((-slope, (my - slope * mx).exp()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOptions {
    pub eps: f64,
    pub rho1: f64,
    pub p1_constant: f64,
    pub rho2: f64,
    pub p2_exponent: P2Exponent,
    pub p3_sources: u64,
    pub p4_sizes: Vec<usize>,
    pub p4_samples: u64,
    pub seed: u64,
}

impl PropertyOptions {
    /// Hypercube-calibrated defaults: ρ₁ = ρ₂ = 1, set sizes up to log₂ n.
    pub fn for_graph(g: &Graph, eps: f64, seed: u64) -> Self {
        let max_size = (g.n() as f64).log2().ceil().max(1.0) as usize;
        PropertyOptions {
            eps,
            rho1: 1.0,
            p1_constant: 1.0,
            rho2: 1.0,
            p2_exponent: P2Exponent::Fifth,
            p3_sources: 64,
            p4_sizes: (1..=max_size).collect(),
            p4_samples: 10_000,
            seed,
        }
    }
}

pub fn check_all(g: &Graph, opts: &PropertyOptions) -> Result<PropertyReport> {
    Ok(PropertyReport {
        checks: vec![
            check_p1(g, opts.rho1, opts.p1_constant)?,
            check_p2(
                (g.n() as f64).ln(),
                g.d() as f64,
                opts.eps,
                opts.p2_exponent,
            )?,
            check_p3(g, opts.eps, opts.rho2, opts.p3_sources, opts.seed)?,
            check_p4(g, &opts.p4_sizes, opts.p4_samples, opts.seed)?,
        ],
    })
}
