//! Multilevel coarsening by maximal weighted matching and the prolongation
//! operators built on top of it.
//!
//! Matching visits the nodes in a seed-determined random order and pairs each
//! unmatched node with its heaviest unmatched neighbor (ties broken toward
//! the lowest index). Nodes left unmatched afterwards join the aggregate of
//! their heaviest neighbor, with aggregate size capped at 3: a leftover whose
//! heaviest neighbor sits in a full aggregate falls back to its next-heaviest
//! neighbor, and joins the heaviest anyway if every candidate is full.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

/// Maximum number of fine nodes merged into one aggregate.
pub const MAX_AGGREGATE_SIZE: usize = 3;

/// One coarsening step: level l-1 -> level l.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseningStep<T> {
    /// Fine-node index -> aggregate index.
    pub assign: Vec<usize>,
    /// Piecewise-constant prolongation, n_{l-1} x n_l, one unit entry per row.
    pub p_step: SparseMatrix<T>,
    /// Coarse graph with Galerkin edge weights (inter-aggregate sums).
    pub coarse_graph: WeightedGraph<T>,
}

impl<T: Scalar> CoarseningStep<T> {
    pub fn n_fine(&self) -> usize {
        self.assign.len()
    }

    pub fn n_coarse(&self) -> usize {
        self.coarse_graph.n()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregationHierarchy<T> {
    /// Node count of the base graph (level 1).
    pub base_n: usize,
    /// Coarsening steps; `steps[k]` maps level k+1 to level k+2.
    pub steps: Vec<CoarseningStep<T>>,
    /// Seed that determined every random visit order.
    pub rng_seed: u64,
    /// Set when coarsening stopped early because a level failed to shrink.
    pub stalled: bool,
}

impl<T: Scalar> AggregationHierarchy<T> {
    /// Number of levels, counting the base graph.
    pub fn levels(&self) -> usize {
        self.steps.len() + 1
    }

    /// Node counts per level, finest first.
    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.base_n];
        sizes.extend(self.steps.iter().map(|s| s.n_coarse()));
        sizes
    }

    pub fn n_tilde(&self) -> usize {
        self.level_sizes().iter().sum()
    }
}

/// How deep to coarsen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSpec {
    /// Exactly this many levels (counting the base graph).
    Count(usize),
    /// Coarsen until the newest level has at most two nodes, or until the
    /// next step would collapse everything into one aggregate (which would
    /// isolate the top node of the expanded graph).
    Max,
}

/// Seed-determined visit permutation used by the matching pass.
pub fn visit_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    order
}

/// One maximal-weighted-matching aggregation pass with a seeded visit order.
pub fn mwm_aggregate<T: Scalar>(
    g: &WeightedGraph<T>,
    seed: u64,
) -> Result<(Vec<usize>, WeightedGraph<T>)> {
    mwm_aggregate_with_order(g, &visit_order(g.n(), seed))
}

/// Matching pass with an explicit visit order. Exposed so callers can pin
/// the aggregation exactly (golden tests, externally chosen orders).
pub fn mwm_aggregate_with_order<T: Scalar>(
    g: &WeightedGraph<T>,
    order: &[usize],
) -> Result<(Vec<usize>, WeightedGraph<T>)> {
    let n = g.n();
    if n < 2 {
        return Err(Error::TooSmall { need: 2, got: n });
    }
    if !g.is_positive() {
        return Err(Error::SignedWeights("mwm_aggregate"));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected("mwm_aggregate"));
    }
    assert_eq!(order.len(), n, "visit order must be a permutation");

    let adj = g.adjacency();
    const UNASSIGNED: usize = usize::MAX;
    let mut group = vec![UNASSIGNED; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();

    // matching pass: pair each unmatched node with its heaviest unmatched
    // neighbor; ties go to the lowest index
    for &u in order {
        if group[u] != UNASSIGNED {
            continue;
        }
        let mut best: Option<(T, usize)> = None;
        for &(v, w) in &adj[u] {
            if group[v] != UNASSIGNED {
                continue;
            }
            let better = match best {
                None => true,
                Some((bw, bv)) => w > bw || (w == bw && v < bv),
            };
            if better {
                best = Some((w, v));
            }
        }
        if let Some((_, v)) = best {
            let id = groups.len();
            group[u] = id;
            group[v] = id;
            groups.push(vec![u, v]);
        }
    }

    // leftover pass: after matching, a leftover node has no unmatched
    // neighbor, so every neighbor already carries an aggregate
    for &u in order {
        if group[u] != UNASSIGNED {
            continue;
        }
        let mut candidates: Vec<(T, usize)> = adj[u].iter().map(|&(v, w)| (w, v)).collect();
        candidates.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        debug_assert!(candidates.iter().all(|&(_, v)| group[v] != UNASSIGNED));
        let chosen = candidates
            .iter()
            .find(|&&(_, v)| groups[group[v]].len() < MAX_AGGREGATE_SIZE)
            .or_else(|| candidates.first())
            .map(|&(_, v)| group[v])
            .expect("connected graph leaves no isolated leftover");
        group[u] = chosen;
        groups[chosen].push(u);
    }

    // canonical aggregate numbering: sort by smallest member
    let mut keys: Vec<(usize, usize)> = groups
        .iter()
        .enumerate()
        .map(|(id, members)| (*members.iter().min().unwrap(), id))
        .collect();
    keys.sort_unstable();
    let mut renumber = vec![0usize; groups.len()];
    for (new_id, &(_, old_id)) in keys.iter().enumerate() {
        renumber[old_id] = new_id;
    }
    let assign: Vec<usize> = group.iter().map(|&gidx| renumber[gidx]).collect();
    let n_coarse = groups.len();

    // Galerkin coarse weights: sum of fine weights between aggregates;
    // intra-aggregate weight is dropped from the coarse edge set
    let mut coarse_w: std::collections::BTreeMap<(usize, usize), T> = std::collections::BTreeMap::new();
    for e in g.edges() {
        let (a, b) = (assign[e.u], assign[e.v]);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        *coarse_w.entry(key).or_insert_with(T::zero) += e.w;
    }
    let coarse = WeightedGraph::new(n_coarse, coarse_w.into_iter().map(|((a, b), w)| (a, b, w)))?;
    Ok((assign, coarse))
}

fn p_step_from_assign<T: Scalar>(assign: &[usize], n_coarse: usize) -> SparseMatrix<T> {
    let triplets = assign.iter().enumerate().map(|(i, &a)| (i, a, T::one()));
    SparseMatrix::from_triplets(assign.len(), n_coarse, triplets).expect("prolongation assembly")
}

/// Repeated MWM coarsening.
pub fn build_hierarchy<T: Scalar>(
    g: &WeightedGraph<T>,
    levels: LevelSpec,
    seed: u64,
) -> Result<AggregationHierarchy<T>> {
    if !g.is_positive() {
        return Err(Error::SignedWeights("build_hierarchy"));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected("build_hierarchy"));
    }
    let max_steps = match levels {
        LevelSpec::Count(c) => {
            if c < 2 {
                return Err(Error::InvalidArgument(format!(
                    "hierarchy needs at least 2 levels, got {c}"
                )));
            }
            c - 1
        }
        LevelSpec::Max => usize::MAX,
    };

    let mut steps: Vec<CoarseningStep<T>> = Vec::new();
    let mut current = g.clone();
    let mut stalled = false;
    while steps.len() < max_steps {
        if current.n() < 2 {
            break;
        }
        if matches!(levels, LevelSpec::Max) && !steps.is_empty() && current.n() <= 2 {
            break;
        }
        let level_seed = seed.wrapping_add(steps.len() as u64);
        let (assign, coarse) = mwm_aggregate(&current, level_seed)?;
        if coarse.n() >= current.n() {
            stalled = true;
            break;
        }
        // in max mode a level that collapses everything into one aggregate
        // would isolate the top node; stop at the previous level instead
        if matches!(levels, LevelSpec::Max) && !steps.is_empty() && coarse.n() < 2 {
            break;
        }
        let p_step = p_step_from_assign(&assign, coarse.n());
        steps.push(CoarseningStep {
            assign,
            p_step,
            coarse_graph: coarse.clone(),
        });
        current = coarse;
    }
    if steps.is_empty() {
        return Err(Error::DegenerateHierarchy("no coarsening step was possible"));
    }
    Ok(AggregationHierarchy {
        base_n: g.n(),
        steps,
        rng_seed: seed,
        stalled,
    })
}

/// The composite prolongation: blocks `[I, -mu P^2, (-mu)^2 P^3, ...]` where
/// `P^l` is the product of the per-level step prolongations down to the base.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeProlongation<T> {
    /// Scaled blocks; block k has shape n x n_{k+1}.
    pub blocks: Vec<SparseMatrix<T>>,
    pub mu: T,
    /// Cumulative column offsets per level (length levels + 1, last = n_tilde).
    pub offsets: Vec<usize>,
    pub n: usize,
    pub n_tilde: usize,
    /// Set when mu >= 1 was accepted for experimentation.
    pub mu_warning: bool,
}

impl<T: Scalar> CompositeProlongation<T> {
    pub fn levels(&self) -> usize {
        self.blocks.len()
    }

    /// Column range of level `k` (0-based) in expanded coordinates.
    pub fn level_range(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    /// Level index of an expanded-coordinate node.
    pub fn level_of(&self, node: usize) -> usize {
        debug_assert!(node < self.n_tilde);
        match self.offsets.binary_search(&node) {
            Ok(k) if k == self.offsets.len() - 1 => k - 1,
            Ok(k) => k,
            Err(k) => k - 1,
        }
    }

    /// x = P(mu) x_tilde.
    pub fn apply(&self, x_tilde: &[T]) -> Result<Vec<T>> {
        if x_tilde.len() != self.n_tilde {
            return Err(Error::DimensionMismatch {
                op: "composite apply",
                expected: self.n_tilde,
                got: x_tilde.len(),
            });
        }
        let mut out = vec![T::zero(); self.n];
        for (k, block) in self.blocks.iter().enumerate() {
            let chunk = &x_tilde[self.level_range(k)];
            for r in 0..block.nrows() {
                let (cols, vals) = block.row(r);
                let mut s = T::zero();
                for (&c, &v) in cols.iter().zip(vals) {
                    s += v * chunk[c];
                }
                out[r] += s;
            }
        }
        Ok(out)
    }

    /// b_tilde = P(mu)^T b.
    pub fn apply_transpose(&self, b: &[T]) -> Result<Vec<T>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                op: "composite apply_transpose",
                expected: self.n,
                got: b.len(),
            });
        }
        let mut out = vec![T::zero(); self.n_tilde];
        for (k, block) in self.blocks.iter().enumerate() {
            let range = self.level_range(k);
            let chunk = &mut out[range];
            for r in 0..block.nrows() {
                let (cols, vals) = block.row(r);
                for (&c, &v) in cols.iter().zip(vals) {
                    chunk[c] += v * b[r];
                }
            }
        }
        Ok(out)
    }

    /// The n x n_tilde operator as one sparse matrix.
    pub fn to_sparse(&self) -> SparseMatrix<T> {
        let mut triplets = Vec::new();
        for (k, block) in self.blocks.iter().enumerate() {
            let off = self.offsets[k];
            for (r, c, v) in block.iter() {
                triplets.push((r, c + off, v));
            }
        }
        SparseMatrix::from_triplets(self.n, self.n_tilde, triplets).expect("composite assembly")
    }
}

/// Assemble the composite prolongation for a hierarchy and weight `mu`.
/// `mu >= 1` is accepted with a warning flag; `mu <= 0` is rejected.
pub fn composite_prolongation<T: Scalar>(
    h: &AggregationHierarchy<T>,
    mu: T,
) -> Result<CompositeProlongation<T>> {
    if mu <= T::zero() {
        return Err(Error::MuNotPositive(mu.to_f64().unwrap_or(f64::NAN)));
    }
    let mu_warning = mu >= T::one();
    let n = h.base_n;
    let mut blocks = vec![SparseMatrix::<T>::identity(n)];
    let mut cumulative = SparseMatrix::<T>::identity(n);
    let mut scale = T::one();
    for step in &h.steps {
        cumulative = cumulative.matmul(&step.p_step)?;
        scale *= -mu;
        blocks.push(cumulative.scaled(scale));
    }
    let mut offsets = vec![0usize];
    for b in &blocks {
        offsets.push(offsets.last().unwrap() + b.ncols());
    }
    let n_tilde = *offsets.last().unwrap();
    Ok(CompositeProlongation {
        blocks,
        mu,
        offsets,
        n,
        n_tilde,
        mu_warning,
    })
}
