use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vacant_core::chain::{gambler_ruin, DenseChain, LazyChain, LevelChain};
use vacant_core::graph::{bfs_distances, Distance, Graph};
use vacant_core::properties::subcube;
use vacant_core::vacant::component_census;
use vacant_core::{VertexSet, WalkGraph};

fn floyd_warshall(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.n();
    let inf = u32::MAX / 2;
    let mut d = vec![vec![inf; n]; n];
    for v in 0..n {
        d[v][v] = 0;
        for w in g.neighbors(v as u32) {
            d[v][w as usize] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

#[test]
fn level_chain_matches_dense_powers() {
    for d in 1..=6 {
        let g = Graph::hypercube(d).unwrap();
        let dense = DenseChain::from_graph(&g).unwrap();
        let level = LevelChain::new(d).unwrap();
        let returns = level.return_probabilities(200);
        let mut power = DMatrix::<f64>::identity(g.n(), g.n());
        for t in 0..=200u64 {
            let classes = level.class_probabilities(t);
            assert!((power[(0, 0)] - returns[t as usize]).abs() < 1e-10);
            for w in 0..g.n() {
                let k = (w as u32).count_ones() as usize;
                assert!(
                    (power[(0, w)] - classes[k]).abs() < 1e-10,
                    "d={d} t={t} w={w}"
                );
            }
            power = &power * dense.matrix();
        }
        if d >= 2 {
            assert_eq!(
                level.mixing_time().unwrap(),
                dense.mixing_time(g.n()).unwrap(),
                "d={d}"
            );
        }
    }
}

#[test]
fn level_spectrum_matches_dense() {
    for d in 2..=7 {
        let g = Graph::hypercube(d).unwrap();
        let dense = DenseChain::from_graph(&g).unwrap().spectrum().unwrap();
        let level = LevelChain::new(d).unwrap().eigenvalues().unwrap();
        let mut distinct: Vec<f64> = Vec::new();
        for &x in &dense.eigenvalues {
            if distinct.last().is_none_or(|&y: &f64| (y - x).abs() > 1e-8) {
                distinct.push(x);
            }
        }
        assert_eq!(distinct.len(), level.len());
        for (a, b) in distinct.iter().zip(&level) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn hypercube_distances_match_bfs() {
    let g = Graph::hypercube(8).unwrap();
    for u in 0..256u32 {
        let fast = g.distances_from(u);
        let slow = bfs_distances(&g, u);
        assert_eq!(fast, slow);
        for v in 0..256u32 {
            assert_eq!(fast[v as usize], Distance::Finite((u ^ v).count_ones()));
        }
    }
}

#[test]
fn closer_neighbour_counts_match_brute_force() {
    let graphs = [
        Graph::hypercube(4).unwrap(),
        Graph::random_regular(30, 3, 7).unwrap(),
        Graph::random_regular(24, 5, 8).unwrap(),
    ];
    for g in &graphs {
        let dist = floyd_warshall(g);
        for u in 0..g.n() {
            for v in 0..g.n() {
                if u == v || dist[u][v] > g.n() as u32 {
                    continue;
                }
                let brute = (0..g.n())
                    .filter(|&w| g.has_edge(v as u32, w as u32) && dist[u][w] <= dist[u][v])
                    .count();
                assert_eq!(g.closer_neighbor_count(u as u32, v as u32).unwrap(), brute);
            }
        }
    }
}

#[test]
fn hypercube_closer_neighbours_equal_distance() {
    for d in 2..=10 {
        let g = Graph::hypercube(d).unwrap();
        for u in [0u32, (1 << d) - 1, 0b101 % (1 << d)] {
            let dist = g.distances_from(u);
            for v in 0..g.n() as u32 {
                if v != u {
                    assert_eq!(
                        g.closer_neighbor_count_from(&dist, v) as u32,
                        (u ^ v).count_ones()
                    );
                }
            }
        }
    }
}

fn census_by_bfs(g: &Graph, vacant: &VertexSet) -> Vec<usize> {
    let mut seen = VertexSet::empty(g.n());
    let mut sizes = Vec::new();
    for v in vacant.iter() {
        if seen.contains(v) {
            continue;
        }
        seen.insert(v);
        let mut queue = vec![v];
        let mut size = 0;
        while let Some(x) = queue.pop() {
            size += 1;
            for w in g.neighbors(x) {
                if vacant.contains(w) && seen.insert(w) {
                    queue.push(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

#[test]
fn census_matches_bfs_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let graphs = [
        Graph::hypercube(8).unwrap(),
        Graph::random_regular(500, 3, 1).unwrap(),
    ];
    for g in &graphs {
        for density in [0.1, 0.3, 0.5, 0.7, 0.95] {
            let vacant = VertexSet::from_vertices(
                g.n(),
                (0..g.n() as u32).filter(|_| rng.random_bool(density)),
            );
            let census = component_census(g, &vacant);
            assert_eq!(census.sizes, census_by_bfs(g, &vacant));
            assert_eq!(census.total(), vacant.len());
        }
    }
}

fn ruin_by_linear_solve(p: f64, q: f64, ell: usize, j: usize) -> f64 {
    let mut a = DMatrix::<f64>::zeros(ell + 1, ell + 1);
    let mut b = DVector::<f64>::zeros(ell + 1);
    a[(0, 0)] = 1.0;
    b[0] = 1.0;
    a[(ell, ell)] = 1.0;
    for i in 1..ell {
        let hold = 1.0 - p - q;
        a[(i, i)] = 1.0 - hold;
        a[(i, i + 1)] = -p;
        a[(i, i - 1)] = -q;
    }
    a.lu().solve(&b).unwrap()[j]
}

#[test]
fn gambler_ruin_matches_linear_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let p: f64 = rng.random_range(0.05..0.9);
        let q: f64 = rng.random_range(0.02..(1.0 - p));
        if (p - q).abs() < 1e-3 {
            continue;
        }
        let ell: u32 = rng.random_range(1..=20);
        let j = rng.random_range(0..=ell);
        let closed = gambler_ruin(p, q, ell, j).unwrap();
        let solved = ruin_by_linear_solve(p, q, ell as usize, j as usize);
        assert!(
            (closed - solved).abs() < 1e-12,
            "p={p} q={q} ell={ell} j={j}"
        );
        let xi = q / p;
        if xi < 1.0 {
            assert!(closed <= 2.0 * xi.powi(j as i32) + 1e-15);
        }
    }
}

#[test]
fn contraction_does_not_raise_lambda2() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let graphs = [
        Graph::hypercube(5).unwrap(),
        Graph::random_regular(40, 4, 2).unwrap(),
        Graph::random_regular(30, 3, 9).unwrap(),
    ];
    for g in &graphs {
        let lambda_h = DenseChain::from_graph(g)
            .unwrap()
            .spectrum()
            .unwrap()
            .lambda2();
        for _ in 0..15 {
            let size = rng.random_range(1..=8);
            let set = VertexSet::from_vertices(
                g.n(),
                (0..size).map(|_| rng.random_range(0..g.n() as u32)),
            );
            let contracted = g.contract(&set).unwrap();
            let spectrum = DenseChain::from_graph(&contracted)
                .unwrap()
                .spectrum()
                .unwrap();
            assert!(spectrum.lambda2() <= lambda_h + 1e-10);
            assert!(spectrum.lambda_min() >= -1e-12);
        }
    }
}

#[test]
fn constructed_chains_are_stochastic_with_nonnegative_spectrum() {
    let mut graphs = vec![
        Graph::hypercube(1).unwrap(),
        Graph::hypercube(6).unwrap(),
        Graph::random_regular(64, 3, 1).unwrap(),
        Graph::random_regular(50, 5, 1).unwrap(),
    ];
    graphs.push(Graph::random_regular(4, 3, 0).unwrap());
    for g in &graphs {
        let chain = LazyChain::from_graph(g).unwrap();
        chain.check_stochastic().unwrap();
        let dense = DenseChain::from_lazy(&chain).unwrap();
        assert!(DenseChain::row_sum_drift(dense.matrix()) < 1e-12);
        assert!(dense.spectrum().unwrap().lambda_min() >= -1e-12);
        if g.n() >= 4 {
            let set = VertexSet::from_vertices(g.n(), [0, 1, 3]);
            let contracted = g.contract(&set).unwrap();
            LazyChain::from_graph(&contracted)
                .unwrap()
                .check_stochastic()
                .unwrap();
            let spectrum = DenseChain::from_graph(&contracted)
                .unwrap()
                .spectrum()
                .unwrap();
            assert!(spectrum.lambda_min() >= -1e-12);
        }
    }
}

fn gamma_return_sum(d: usize, k: usize) -> f64 {
    let g = Graph::hypercube(d).unwrap();
    let t_mix = LevelChain::new(d).unwrap().mixing_time().unwrap();
    let coords: Vec<usize> = (0..k).collect();
    let set = VertexSet::from_vertices(g.n(), subcube(0, &coords));
    let contracted = g.contract(&set).unwrap();
    let gamma = contracted.gamma().unwrap();
    assert_eq!(contracted.degree(gamma), d * set.len());
    LazyChain::from_graph(&contracted)
        .unwrap()
        .return_sum(gamma, t_mix)
        .unwrap()
}

#[test]
fn contracted_gamma_return_sum_on_q12() {
    let level = LevelChain::new(12).unwrap();
    let r_v = level.return_sum(level.mixing_time().unwrap());
    assert!((gamma_return_sum(12, 0) - r_v).abs() < 1e-10);
    for k in 1..=2 {
        let excess: Vec<f64> = [8, 10, 12]
            .iter()
            .map(|&d| gamma_return_sum(d, k) - 2.0)
            .collect();
        assert!(
            excess[0] > excess[1] && excess[1] > excess[2],
            "k={k}: {excess:?}"
        );
        assert!(excess[2] > 0.0);
    }
    // internal edges add loop weight at γ
    assert!(gamma_return_sum(12, 2) > gamma_return_sum(12, 1));
}
