//! Benchmark graph families: 2D grids, circulant rings, and Watts-Strogatz
//! small-world graphs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lapcond::graph::WeightedGraph;

use crate::error::{BenchError, Result};

/// side x side 4-neighbor lattice with unit weights, row-major numbering.
pub fn gen_grid2d(side: usize) -> Result<WeightedGraph<f64>> {
    if side < 2 {
        return Err(BenchError::BadGenerator(format!(
            "grid2d needs side >= 2, got {side}"
        )));
    }
    let mut edges = Vec::with_capacity(2 * side * (side - 1));
    for r in 0..side {
        for c in 0..side {
            let i = r * side + c;
            if c + 1 < side {
                edges.push((i, i + 1, 1.0));
            }
            if r + 1 < side {
                edges.push((i, i + side, 1.0));
            }
        }
    }
    Ok(WeightedGraph::new(side * side, edges)?)
}

/// Circulant ring: each node is connected to its deg/2 nearest neighbors on
/// each side, unit weights.
pub fn gen_ring(n: usize, deg: usize) -> Result<WeightedGraph<f64>> {
    if deg == 0 || !deg.is_multiple_of(2) {
        return Err(BenchError::BadGenerator(format!(
            "ring degree must be positive and even, got {deg}"
        )));
    }
    if deg >= n {
        return Err(BenchError::BadGenerator(format!(
            "ring degree {deg} must be below the node count {n}"
        )));
    }
    let mut edges = Vec::with_capacity(n * deg / 2);
    for u in 0..n {
        for j in 1..=deg / 2 {
            let v = (u + j) % n;
            edges.push((u, v, 1.0));
        }
    }
    Ok(WeightedGraph::new(n, edges)?)
}

/// Watts-Strogatz small-world graph: start from the circulant ring, rewire
/// each edge independently with probability beta to a uniformly random
/// non-neighbor. Edge count is preserved. A disconnected outcome retries
/// with seed+1, up to 100 times.
pub fn gen_watts_strogatz(
    n: usize,
    deg: usize,
    beta: f64,
    seed: u64,
) -> Result<WeightedGraph<f64>> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(BenchError::BadGenerator(format!(
            "rewiring probability must lie in [0, 1], got {beta}"
        )));
    }
    // validate the ring parameters once
    gen_ring(n, deg)?;
    for attempt in 0..100u64 {
        let g = watts_strogatz_once(n, deg, beta, seed.wrapping_add(attempt))?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(BenchError::BadGenerator(format!(
        "watts-strogatz stayed disconnected after 100 retries (n={n}, deg={deg}, beta={beta})"
    )))
}

fn watts_strogatz_once(n: usize, deg: usize, beta: f64, seed: u64) -> Result<WeightedGraph<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    for u in 0..n {
        for j in 1..=deg / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for u in 0..n {
        for j in 1..=deg / 2 {
            let v = (u + j) % n;
            if !adj[u].contains(&v) {
                // already rewired away by an earlier step
                continue;
            }
            if rng.gen_range(0.0..1.0) >= beta {
                continue;
            }
            if adj[u].len() >= n - 1 {
                // no non-neighbor left to rewire toward
                continue;
            }
            let w = loop {
                let cand = rng.gen_range(0..n);
                if cand != u && !adj[u].contains(&cand) {
                    break cand;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let mut edges = Vec::with_capacity(n * deg / 2);
    for (u, nbrs) in adj.iter().enumerate() {
        for &v in nbrs {
            if u < v {
                edges.push((u, v, 1.0));
            }
        }
    }
    Ok(WeightedGraph::new(n, edges)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lapcond::graph::connected_components;

    #[test]
    fn grid_sizes() {
        let g = gen_grid2d(4).unwrap();
        assert_eq!(g.n(), 16);
        assert_eq!(g.m(), 24);
        let g = gen_grid2d(2).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.m(), 4);
        let g = gen_grid2d(16).unwrap();
        assert_eq!(g.n(), 256);
        assert_eq!(g.m(), 480);
        assert!(gen_grid2d(1).is_err());
    }

    #[test]
    fn ring_degrees() {
        let g = gen_ring(10, 4).unwrap();
        assert_eq!(g.m(), 20);
        let degs = g.degrees();
        assert!(degs.iter().all(|&d| d == 4.0));

        let g = gen_ring(3, 2).unwrap();
        assert_eq!(g.m(), 3);

        let g = gen_ring(256, 4).unwrap();
        assert_eq!(g.m(), 512);

        assert!(gen_ring(10, 3).is_err());
        assert!(gen_ring(4, 4).is_err());
    }

    #[test]
    fn ws_beta_zero_is_ring() {
        let ring = gen_ring(20, 4).unwrap();
        let ws = gen_watts_strogatz(20, 4, 0.0, 9).unwrap();
        assert_eq!(ring.edges(), ws.edges());
    }

    #[test]
    fn ws_preserves_edge_count_and_connectivity() {
        let g = gen_watts_strogatz(16, 4, 0.25, 3).unwrap();
        assert_eq!(g.m(), 32);
        assert_eq!(connected_components(&g).len(), 1);

        let g = gen_watts_strogatz(1 << 10, 4, 1.0 / 32.0, 42).unwrap();
        assert_eq!(g.m(), 2048);
        assert_eq!(connected_components(&g).len(), 1);
    }

    #[test]
    fn ws_deterministic() {
        let a = gen_watts_strogatz(64, 4, 0.2, 5).unwrap();
        let b = gen_watts_strogatz(64, 4, 0.2, 5).unwrap();
        assert_eq!(a, b);
        let c = gen_watts_strogatz(64, 4, 0.2, 6).unwrap();
        assert_ne!(a, c);
    }
}
