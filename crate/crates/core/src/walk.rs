//! Lazy and speedy walk trajectories with push-based observers.

use std::ops::ControlFlow;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::graph::WalkGraph;
use crate::rng::WalkRng;
use crate::vertex_set::VertexSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WalkMode {
    /// Hold with probability 1/2, otherwise traverse a uniform edge endpoint.
    Lazy,
    /// Always traverse an edge: the simple random walk.
    Speedy,
}

impl std::fmt::Display for WalkMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WalkMode::Lazy => "lazy",
            WalkMode::Speedy => "speedy",
        })
    }
}

/// Position plus both clocks. `lazy_steps` counts every step taken,
/// `moves` only the edge traversals, so `moves <= lazy_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkState {
    pub vertex: u32,
    pub lazy_steps: u64,
    pub moves: u64,
}

impl WalkState {
    pub fn at(vertex: u32) -> WalkState {
        WalkState {
            vertex,
            lazy_steps: 0,
            moves: 0,
        }
    }
}

/// Receives `(step, vertex)` for every position of a walk, starting with step 0.
pub trait Observer {
    fn observe(&mut self, step: u64, vertex: u32) -> ControlFlow<()>;
}

impl<F: FnMut(u64, u32) -> ControlFlow<()>> Observer for F {
    fn observe(&mut self, step: u64, vertex: u32) -> ControlFlow<()> {
        self(step, vertex)
    }
}

/// Ignores everything.
pub struct NoObserver;

impl Observer for NoObserver {
    fn observe(&mut self, _step: u64, _vertex: u32) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

#[inline]
fn traverse<G: WalkGraph + ?Sized, R: Rng + ?Sized>(g: &G, state: &mut WalkState, rng: &mut R) {
    let slot = rng.random_range(0..g.degree(state.vertex));
    state.vertex = g.endpoint(state.vertex, slot);
    state.moves += 1;
}

/// One lazy step: hold with probability 1/2, else move along a uniformly
/// chosen edge endpoint. Taking a loop leaves the walker in place.
#[inline]
pub fn lazy_step<G: WalkGraph + ?Sized, R: Rng + ?Sized>(
    g: &G,
    state: &mut WalkState,
    rng: &mut R,
) {
    if rng.random::<bool>() {
        traverse(g, state, rng);
    }
    state.lazy_steps += 1;
}

/// One step of the simple (speedy) walk.
#[inline]
pub fn speedy_step<G: WalkGraph + ?Sized, R: Rng + ?Sized>(
    g: &G,
    state: &mut WalkState,
    rng: &mut R,
) {
    traverse(g, state, rng);
    state.lazy_steps += 1;
}

/// A walk that can be advanced in segments. The clock of `mode` (lazy steps
/// or moves) is what observers see as the step index.
pub struct Walker {
    state: WalkState,
    mode: WalkMode,
    rng: WalkRng,
}

impl Walker {
    pub fn new(start: u32, mode: WalkMode, rng: WalkRng) -> Walker {
        Walker {
            state: WalkState::at(start),
            mode,
            rng,
        }
    }

    pub fn state(&self) -> WalkState {
        self.state
    }

    pub fn mode(&self) -> WalkMode {
        self.mode
    }

    pub fn clock(&self) -> u64 {
        match self.mode {
            WalkMode::Lazy => self.state.lazy_steps,
            WalkMode::Speedy => self.state.moves,
        }
    }

    #[inline]
    pub fn step<G: WalkGraph + ?Sized>(&mut self, g: &G) -> u32 {
        match self.mode {
            WalkMode::Lazy => lazy_step(g, &mut self.state, &mut self.rng),
            WalkMode::Speedy => speedy_step(g, &mut self.state, &mut self.rng),
        }
        self.state.vertex
    }

    /// Show the current position to `observer` without moving.
    pub fn announce<O: Observer + ?Sized>(&self, observer: &mut O) -> ControlFlow<()> {
        observer.observe(self.clock(), self.state.vertex)
    }

    /// Take `steps` more steps, reporting each new position.
    pub fn advance<G: WalkGraph + ?Sized, O: Observer + ?Sized>(
        &mut self,
        g: &G,
        steps: u64,
        observer: &mut O,
    ) -> ControlFlow<()> {
        for _ in 0..steps {
            let v = self.step(g);
            observer.observe(self.clock(), v)?;
        }
        ControlFlow::Continue(())
    }

    /// Advance until the clock reads `target` (no-op if already past it).
    pub fn advance_to<G: WalkGraph + ?Sized, O: Observer + ?Sized>(
        &mut self,
        g: &G,
        target: u64,
        observer: &mut O,
    ) -> ControlFlow<()> {
        let remaining = target.saturating_sub(self.clock());
        self.advance(g, remaining, observer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkSummary {
    pub final_state: WalkState,
    /// The observer asked to stop before the horizon.
    pub stopped_early: bool,
}

/// Walk `horizon` steps of `mode` from `start`, feeding positions 0..=horizon
/// to `observer`.
pub fn run_walk<G: WalkGraph + ?Sized, O: Observer + ?Sized>(
    g: &G,
    start: u32,
    horizon: u64,
    mode: WalkMode,
    rng: WalkRng,
    observer: &mut O,
) -> WalkSummary {
    let mut walker = Walker::new(start, mode, rng);
    let flow = match walker.announce(observer) {
        ControlFlow::Break(()) => ControlFlow::Break(()),
        ControlFlow::Continue(()) => walker.advance(g, horizon, observer),
    };
    WalkSummary {
        final_state: walker.state(),
        stopped_early: flow.is_break(),
    }
}

/// Vertex sequence indexed by step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub mode: WalkMode,
    pub vertices: Vec<u32>,
}

/// Observer that records every position.
#[derive(Debug, Clone)]
pub struct TrajectoryRecorder {
    pub vertices: Vec<u32>,
}

impl TrajectoryRecorder {
    pub fn new() -> Self {
        TrajectoryRecorder {
            vertices: Vec::new(),
        }
    }

    pub fn finish(self, mode: WalkMode) -> Trajectory {
        Trajectory {
            mode,
            vertices: self.vertices,
        }
    }
}

impl Default for TrajectoryRecorder {
    fn default() -> Self {
        Self::new()
    }
}

impl Observer for TrajectoryRecorder {
    fn observe(&mut self, _step: u64, vertex: u32) -> ControlFlow<()> {
        self.vertices.push(vertex);
        ControlFlow::Continue(())
    }
}

pub fn record_walk<G: WalkGraph + ?Sized>(
    g: &G,
    start: u32,
    horizon: u64,
    mode: WalkMode,
    rng: WalkRng,
) -> Trajectory {
    let mut recorder = TrajectoryRecorder::new();
    run_walk(g, start, horizon, mode, rng, &mut recorder);
    recorder.finish(mode)
}

/// Drop the holding steps of a lazy trajectory.
pub fn speedy_projection(trajectory: &Trajectory) -> Result<Trajectory> {
    if trajectory.mode != WalkMode::Lazy {
        return Err(invalid("speedy projection needs a lazy trajectory"));
    }
    let mut vertices = trajectory.vertices.clone();
    vertices.dedup();
    Ok(Trajectory {
        mode: WalkMode::Speedy,
        vertices,
    })
}

/// First lazy step in `[burn_in, horizon]` at which the walk sits in
/// `targets`, with the vertex hit.
pub fn first_visit_time<G: WalkGraph + ?Sized>(
    g: &G,
    start: u32,
    targets: &VertexSet,
    burn_in: u64,
    horizon: u64,
    rng: WalkRng,
) -> Result<Option<(u64, u32)>> {
    if burn_in > horizon {
        return Err(invalid(format!(
            "burn-in {burn_in} exceeds horizon {horizon}"
        )));
    }
    if targets.is_empty() {
        return Ok(None);
    }
    let mut walker = Walker::new(start, WalkMode::Lazy, rng);
    let mut noop = NoObserver;
    let _ = walker.advance(g, burn_in, &mut noop);
    let mut hit = None;
    let mut trap = |step: u64, v: u32| {
        if targets.contains(v) {
            hit = Some((step, v));
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    };
    if walker.announce(&mut trap).is_continue() {
        let _ = walker.advance(g, horizon - burn_in, &mut trap);
    }
    Ok(hit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::multigraph::MultiGraph;
    use crate::rng::stream_rng;

    #[test]
    fn horizon_zero_visits_only_start() {
        let g = Graph::hypercube(4).unwrap();
        let tr = record_walk(&g, 9, 0, WalkMode::Lazy, stream_rng(1, 0));
        assert_eq!(tr.vertices, vec![9]);
    }

    #[test]
    fn trajectories_respect_adjacency() {
        let g = Graph::hypercube(6).unwrap();
        let lazy = record_walk(&g, 0, 2000, WalkMode::Lazy, stream_rng(2, 0));
        assert_eq!(lazy.vertices.len(), 2001);
        for w in lazy.vertices.windows(2) {
            assert!(w[0] == w[1] || g.has_edge(w[0], w[1]));
        }
        let speedy = record_walk(&g, 0, 2000, WalkMode::Speedy, stream_rng(2, 0));
        for w in speedy.vertices.windows(2) {
            assert!(g.has_edge(w[0], w[1]));
        }
    }

    #[test]
    fn walks_are_deterministic() {
        let g = Graph::random_regular(50, 3, 4).unwrap();
        let a = record_walk(&g, 3, 500, WalkMode::Lazy, stream_rng(9, 2));
        let b = record_walk(&g, 3, 500, WalkMode::Lazy, stream_rng(9, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn counters() {
        let g = Graph::hypercube(5).unwrap();
        let mut walker = Walker::new(0, WalkMode::Lazy, stream_rng(3, 0));
        let _ = walker.advance(&g, 1000, &mut NoObserver);
        let s = walker.state();
        assert_eq!(s.lazy_steps, 1000);
        assert!(s.moves <= s.lazy_steps);
        assert!(s.moves > 400 && s.moves < 600);
    }

    #[test]
    fn projection_examples() {
        let tr = Trajectory {
            mode: WalkMode::Lazy,
            vertices: vec![4, 4, 5, 5, 1],
        };
        assert_eq!(speedy_projection(&tr).unwrap().vertices, vec![4, 5, 1]);
        let still = Trajectory {
            mode: WalkMode::Lazy,
            vertices: vec![2; 7],
        };
        assert_eq!(speedy_projection(&still).unwrap().vertices, vec![2]);
        let speedy = Trajectory {
            mode: WalkMode::Speedy,
            vertices: vec![0, 1],
        };
        assert!(speedy_projection(&speedy).is_err());
    }

    #[test]
    fn speedy_covers_q3() {
        let g = Graph::hypercube(3).unwrap();
        let mut seen = VertexSet::empty(8);
        let mut obs = |_s: u64, v: u32| {
            seen.insert(v);
            ControlFlow::Continue(())
        };
        run_walk(&g, 0, 100_000, WalkMode::Speedy, stream_rng(5, 0), &mut obs);
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn lazy_one_step_law_on_q3() {
        let g = Graph::hypercube(3).unwrap();
        let draws = 1_000_000u32;
        let mut counts = [0u32; 8];
        let mut rng = stream_rng(17, 0);
        for _ in 0..draws {
            let mut s = WalkState::at(0);
            lazy_step(&g, &mut s, &mut rng);
            counts[s.vertex as usize] += 1;
        }
        let expect = |v: usize| match v {
            0 => 0.5,
            1 | 2 | 4 => 1.0 / 6.0,
            _ => 0.0,
        };
        for (v, &c) in counts.iter().enumerate() {
            let p = expect(v);
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            let freq = c as f64 / draws as f64;
            assert!(
                (freq - p).abs() <= 3.0 * sigma + 1e-12,
                "vertex {v}: {freq} vs {p}"
            );
        }
    }

    #[test]
    fn loops_hold_the_walker() {
        let tri = MultiGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let gg = tri.contract(&VertexSet::from_vertices(3, [0, 1])).unwrap();
        let gamma = gg.gamma().unwrap();
        let draws = 400_000u32;
        let mut rng = stream_rng(8, 0);
        let stays = (0..draws)
            .filter(|_| {
                let mut s = WalkState::at(gamma);
                lazy_step(&gg, &mut s, &mut rng);
                s.vertex == gamma
            })
            .count();
        let p = 0.75;
        let freq = stays as f64 / draws as f64;
        assert!((freq - p).abs() < 4.0 * (p * (1.0 - p) / draws as f64).sqrt());
    }

    #[test]
    fn first_visit_edge_cases() {
        let g = Graph::hypercube(4).unwrap();
        let here = VertexSet::from_vertices(16, [6]);
        assert_eq!(
            first_visit_time(&g, 6, &here, 0, 10, stream_rng(0, 0)).unwrap(),
            Some((0, 6))
        );
        let none = VertexSet::empty(16);
        assert_eq!(
            first_visit_time(&g, 6, &none, 0, 100, stream_rng(0, 0)).unwrap(),
            None
        );
        assert!(first_visit_time(&g, 6, &here, 5, 4, stream_rng(0, 0)).is_err());
        let far = VertexSet::from_vertices(16, [9]);
        let (t, v) = first_visit_time(&g, 6, &far, 20, 100_000, stream_rng(1, 0))
            .unwrap()
            .unwrap();
        assert!(t >= 20);
        assert_eq!(v, 9);
    }
}
