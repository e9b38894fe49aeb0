//! The vacant set: visit tracking, component censuses, bad vertices and
//! snapshot scans around `t* = n ln d`.

use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::graph::Graph;
use crate::rng::stream_rng;
use crate::union_find::DisjointSets;
use crate::vertex_set::VertexSet;
use crate::walk::{Observer, WalkMode, Walker};

/// Vertices visited so far, plus those visited from `window_start` on.
///
/// The complement of the second set is U_0, the vertices missed during the
/// window `[window_start, now]`.
#[derive(Debug, Clone)]
pub struct VisitBitmap {
    visited: VertexSet,
    visited_in_window: VertexSet,
    window_start: u64,
}

impl VisitBitmap {
    pub fn new(n: usize, window_start: u64) -> Self {
        VisitBitmap {
            visited: VertexSet::empty(n),
            visited_in_window: VertexSet::empty(n),
            window_start,
        }
    }

    pub fn visited(&self) -> &VertexSet {
        &self.visited
    }

    pub fn visited_count(&self) -> usize {
        self.visited.len()
    }

    pub fn window_start(&self) -> u64 {
        self.window_start
    }

    /// U: never visited.
    pub fn vacant(&self) -> VertexSet {
        self.visited.complement()
    }

    /// U_0: not visited since the window opened.
    pub fn window_vacant(&self) -> VertexSet {
        self.visited_in_window.complement()
    }
}

impl Observer for VisitBitmap {
    #[inline]
    fn observe(&mut self, step: u64, vertex: u32) -> ControlFlow<()> {
        self.visited.insert(vertex);
        if step >= self.window_start {
            self.visited_in_window.insert(vertex);
        }
        ControlFlow::Continue(())
    }
}

/// Component sizes of the subgraph induced on a vertex set, largest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentCensus {
    pub sizes: Vec<usize>,
}

impl ComponentCensus {
    /// L_1, or 0 for an empty set.
    pub fn largest(&self) -> usize {
        self.sizes.first().copied().unwrap_or(0)
    }

    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }
}

/// Components of `g[vacant]` by union-find over vacant–vacant edges.
pub fn component_census(g: &Graph, vacant: &VertexSet) -> ComponentCensus {
    let mut sets = DisjointSets::new(g.n());
    for v in vacant.iter() {
        for w in g.neighbors(v) {
            if v < w && vacant.contains(w) {
                sets.union(v, w);
            }
        }
    }
    let mut sizes = Vec::new();
    for v in vacant.iter() {
        if sets.find(v) == v {
            sizes.push(sets.set_size(v));
        }
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    ComponentCensus { sizes }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BadVertexReport {
    pub eps: f64,
    /// `d^ε / 2`, compared without rounding.
    pub threshold: f64,
    pub bad: VertexSet,
}

impl BadVertexReport {
    pub fn count(&self) -> usize {
        self.bad.len()
    }
}

/// Vertices with fewer than `d^ε / 2` neighbours in `vacant`.
pub fn bad_vertices(g: &Graph, vacant: &VertexSet, eps: f64) -> Result<BadVertexReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    let threshold = (g.d() as f64).powf(eps) / 2.0;
    let bad = VertexSet::from_vertices(
        g.n(),
        (0..g.n() as u32).filter(|&v| {
            let vacant_nbrs = g.neighbors(v).filter(|&w| vacant.contains(w)).count();
            (vacant_nbrs as f64) < threshold
        }),
    );
    Ok(BadVertexReport {
        eps,
        threshold,
        bad,
    })
}

/// `t* = n ln d`.
pub fn t_star(n: usize, d: usize) -> f64 {
    n as f64 * (d as f64).ln()
}

/// Parameters of one scan: snapshot times are `multiplier · t*` on the speedy
/// clock; in lazy mode the walk runs twice as many lazy steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPlan {
    pub eps: f64,
    pub multipliers: Vec<f64>,
    pub mode: WalkMode,
    pub start: u32,
    /// Opens the U_0 window at this clock value.
    pub window_start: u64,
}

impl ScanPlan {
    pub fn new(eps: f64, multipliers: Vec<f64>, mode: WalkMode) -> Self {
        ScanPlan {
            eps,
            multipliers,
            mode,
            start: 0,
            window_start: 0,
        }
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(invalid(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if self.multipliers.is_empty() {
            return Err(invalid("multiplier list is empty"));
        }
        if self.multipliers.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(invalid("multipliers must be finite and non-negative"));
        }
        if self.multipliers.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("multipliers must be sorted"));
        }
        if self.start as usize >= g.n() {
            return Err(invalid(format!("start vertex {} out of range", self.start)));
        }
        Ok(())
    }

    /// Clock value at which the snapshot for `multiplier` is taken.
    pub fn snapshot_clock(&self, g: &Graph, multiplier: f64) -> u64 {
        let speedy = (multiplier * t_star(g.n(), g.d())).floor() as u64;
        match self.mode {
            WalkMode::Speedy => speedy,
            WalkMode::Lazy => 2 * speedy,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub multiplier: f64,
    /// Clock value (speedy moves or lazy steps) of the snapshot.
    pub clock: u64,
    pub vacant_size: usize,
    pub window_vacant_size: usize,
    pub census: ComponentCensus,
    pub bad_count: usize,
}

/// One walk, with a census at every multiplier. Snapshots of one trajectory
/// are nested: each vacant set contains the next.
pub fn vacant_snapshot_run(
    g: &Graph,
    plan: &ScanPlan,
    seed: u64,
    trial: u64,
) -> Result<Vec<Snapshot>> {
    plan.validate(g)?;
    let mut walker = Walker::new(plan.start, plan.mode, stream_rng(seed, trial));
    let mut bitmap = VisitBitmap::new(g.n(), plan.window_start);
    let _ = walker.announce(&mut bitmap);
    let mut out = Vec::with_capacity(plan.multipliers.len());
    for &m in &plan.multipliers {
        let clock = plan.snapshot_clock(g, m);
        let _ = walker.advance_to(g, clock, &mut bitmap);
        let vacant = bitmap.vacant();
        let window_vacant = bitmap.window_vacant();
        debug_assert!(vacant.is_subset(&window_vacant));
        debug_assert!(window_vacant.len() - vacant.len() <= plan.window_start as usize);
        let census = component_census(g, &vacant);
        let bad = bad_vertices(g, &vacant, plan.eps)?;
        out.push(Snapshot {
            multiplier: m,
            clock,
            vacant_size: vacant.len(),
            window_vacant_size: window_vacant.len(),
            census,
            bad_count: bad.count(),
        });
    }
    Ok(out)
}

/// Independent trials `0..trials` in parallel, returned in trial order.
pub fn scan_trials(
    g: &Graph,
    plan: &ScanPlan,
    seed: u64,
    trials: u64,
) -> Result<Vec<Vec<Snapshot>>> {
    plan.validate(g)?;
    (0..trials)
        .into_par_iter()
        .map(|trial| vacant_snapshot_run(g, plan, seed, trial))
        .collect()
}

/// Median of a list (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    })
}
