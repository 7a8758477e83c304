//! The multilevel expanded graph, its sign split, the tree-like sparsifier
//! and solution lifting.
//!
//! Expansion forms the triple product P(mu)^T L P(mu) block by block, so the
//! result stays sparse and coarse blocks reuse Galerkin products. The
//! expanded Laplacian decomposes entrywise as L_expanded = L_pegp - L_neg,
//! where the PEGP keeps the positively weighted edges and L_neg collects the
//! sign-flipped negative ones.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::aggregation::{AggregationHierarchy, CompositeProlongation};
use crate::error::{Error, Result};
use crate::graph::{build_laplacian, connected_components, Edge, WeightedGraph};
use crate::scalar::{real, Scalar};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone)]
pub struct ExpandedSystem<T> {
    /// The expanded Laplacian, n_tilde x n_tilde, symmetric, zero row sums.
    pub l_expanded: SparseMatrix<T>,
    /// The expanded graph itself; carries signed weights.
    pub graph_expanded: WeightedGraph<T>,
    /// Positively weighted expanded subgraph.
    pub pegp: WeightedGraph<T>,
    pub l_pegp: SparseMatrix<T>,
    /// Laplacian of the graph induced by the negative edges (weights flipped
    /// to their magnitudes).
    pub l_neg: SparseMatrix<T>,
    pub p_comp: CompositeProlongation<T>,
    /// Cumulative node-index offsets per level (length levels + 1).
    pub level_offsets: Vec<usize>,
    pub mu: T,
}

impl<T: Scalar> ExpandedSystem<T> {
    pub fn n_tilde(&self) -> usize {
        self.l_expanded.nrows()
    }

    pub fn base_n(&self) -> usize {
        self.p_comp.n
    }

    pub fn levels(&self) -> usize {
        self.p_comp.levels()
    }

    pub fn level_of(&self, node: usize) -> usize {
        self.p_comp.level_of(node)
    }

    /// Basis of Null(L_expanded): one chain vector per coarse node (the
    /// preimage of zero under P(mu)) plus the all-ones vector. The dimension
    /// is n_tilde - n + 1 for a connected base graph.
    pub fn nullspace_basis(&self) -> Vec<Vec<T>> {
        let n_tilde = self.n_tilde();
        let mut basis = Vec::with_capacity(n_tilde - self.base_n() + 1);
        for (k, block) in self.p_comp.blocks.iter().enumerate().skip(1) {
            let off = self.level_offsets[k];
            let block_t = block.transpose();
            for j in 0..block.ncols() {
                let mut v = vec![T::zero(); n_tilde];
                v[off + j] = T::one();
                let (rows, vals) = block_t.row(j);
                for (&r, &val) in rows.iter().zip(vals) {
                    v[r] = -val;
                }
                basis.push(v);
            }
        }
        basis.push(vec![T::one(); n_tilde]);
        basis
    }
}

/// Assemble the expanded Laplacian P(mu)^T L P(mu) and its sign split.
///
/// Entries with |value| <= 1e-12 * max|entry| are treated as structural
/// zeros before sign classification, so cancellation in the triple products
/// cannot create phantom edges. The diagonal is set to the negated
/// off-diagonal row sum, which keeps zero row sums and the
/// L_expanded = L_pegp - L_neg decomposition exact.
pub fn expand_laplacian<T: Scalar>(
    l_g: &SparseMatrix<T>,
    p_comp: CompositeProlongation<T>,
) -> Result<ExpandedSystem<T>> {
    if p_comp.n != l_g.nrows() || l_g.nrows() != l_g.ncols() {
        return Err(Error::DimensionMismatch {
            op: "expand_laplacian",
            expected: p_comp.n,
            got: l_g.nrows(),
        });
    }
    let levels = p_comp.levels();
    let n_tilde = p_comp.n_tilde;
    let offsets = p_comp.offsets.clone();

    // L * B_k' once per level, then B_k^T * (L * B_k') for k <= k'
    let l_times: Vec<SparseMatrix<T>> = p_comp
        .blocks
        .iter()
        .map(|b| l_g.matmul(b))
        .collect::<Result<_>>()?;
    let transposed: Vec<SparseMatrix<T>> = p_comp.blocks.iter().map(|b| b.transpose()).collect();

    // Cancellation noise is proportional to each block's natural scale
    // mu^(k+k'), so the structural-zero threshold is taken per block. A
    // threshold relative to the global maximum would wipe out genuine deep
    // coarse-level edges, which shrink geometrically in mu.
    let max_l = l_g.max_abs();
    let drop_rel = real::<T>(1e-12);
    let mut signed_edges: Vec<Edge<T>> = Vec::new();
    for k in 0..levels {
        for kp in k..levels {
            let block = transposed[k].matmul(&l_times[kp])?;
            let (ro, co) = (offsets[k], offsets[kp]);
            let block_scale = p_comp.mu.powi((k + kp) as i32) * max_l;
            let threshold = drop_rel * block_scale;
            for (i, j, v) in block.iter() {
                let (gi, gj) = (ro + i, co + j);
                // keep the strict upper triangle; diagonal-block lower
                // halves mirror entries this same product already yields,
                // and the diagonal is recomputed from the row sums below
                if gi < gj && v.abs() > threshold {
                    // Laplacian entry -w: value v means edge weight -v
                    signed_edges.push(Edge { u: gi, v: gj, w: -v });
                }
            }
        }
    }
    signed_edges.sort_by_key(|e| (e.u, e.v));

    let graph_expanded =
        WeightedGraph::new(n_tilde, signed_edges.iter().map(|e| (e.u, e.v, e.w)))?;
    let l_expanded = build_laplacian(&graph_expanded);

    let pos_edges: Vec<(usize, usize, T)> = signed_edges
        .iter()
        .filter(|e| e.w > T::zero())
        .map(|e| (e.u, e.v, e.w))
        .collect();
    let neg_edges: Vec<(usize, usize, T)> = signed_edges
        .iter()
        .filter(|e| e.w < T::zero())
        .map(|e| (e.u, e.v, -e.w))
        .collect();
    let pegp = WeightedGraph::new(n_tilde, pos_edges)?;
    let l_pegp = build_laplacian(&pegp);
    let neg_graph = WeightedGraph::new(n_tilde, neg_edges)?;
    let l_neg = build_laplacian(&neg_graph);

    let mu = p_comp.mu;
    Ok(ExpandedSystem {
        l_expanded,
        graph_expanded,
        pegp,
        l_pegp,
        l_neg,
        p_comp,
        level_offsets: offsets,
        mu,
    })
}

/// The positively weighted expanded subgraph H and its Laplacian. The
/// Laplacian is rebuilt from the positive edge set, so its diagonal carries
/// the positive-degree sums and the matrix is diagonally dominant.
pub fn extract_positive_subgraph<T: Scalar>(
    sys: &ExpandedSystem<T>,
) -> (&WeightedGraph<T>, &SparseMatrix<T>) {
    (&sys.pegp, &sys.l_pegp)
}

/// Laplacian over the magnitudes of the sign-flipped edges.
pub fn extract_negative_subgraph<T: Scalar>(sys: &ExpandedSystem<T>) -> &SparseMatrix<T> {
    &sys.l_neg
}

/// x = P(mu) x_tilde: a solution of the expanded system lifts to a solution
/// of the base system.
pub fn lift_solution<T: Scalar>(p_comp: &CompositeProlongation<T>, x_tilde: &[T]) -> Result<Vec<T>> {
    p_comp.apply(x_tilde)
}

/// b_tilde = P(mu)^T b.
pub fn project_rhs<T: Scalar>(p_comp: &CompositeProlongation<T>, b: &[T]) -> Result<Vec<T>> {
    p_comp.apply_transpose(b)
}

/// Which keep-rule admitted an MSP edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MspEdgeClass {
    /// Both endpoints on the top coarse level.
    TopLevel,
    /// Node to its own aggregate on the next level up.
    InterLevel,
    /// Same-level edge whose endpoints share the next-level aggregate.
    IntraAggregate,
}

/// Tree-like multilevel sparsifier of the PEGP.
#[derive(Debug, Clone)]
pub struct MspGraph<T> {
    pub graph: WeightedGraph<T>,
    /// Aligned with `graph.edges()`.
    pub edge_classes: Vec<MspEdgeClass>,
}

impl<T: Scalar> MspGraph<T> {
    pub fn laplacian(&self) -> SparseMatrix<T> {
        build_laplacian(&self.graph)
    }
}

/// Extract the multilevel sparsifier from the positive subgraph. Kept from
/// the PEGP: all top-level edges, all inter-level edges among the coarse
/// levels, base-level nodes' edges to their own aggregate on level two, and
/// same-level edges inside an aggregate (base level included). Weights are
/// copied unchanged, so the MSP edge set is a subset of the PEGP with
/// identical weights.
///
/// Restricting base nodes to sibling and parent edges is what makes
/// base-level elimination fill-free; keeping every positive inter-level
/// edge among the coarse levels bounds each dropped edge's detour
/// resistance independently of the hierarchy depth, which keeps the stretch
/// (and the MSP iteration counts) under control in deep hierarchies.
pub fn extract_msp<T: Scalar>(
    sys: &ExpandedSystem<T>,
    h: &AggregationHierarchy<T>,
) -> Result<MspGraph<T>> {
    let levels = sys.levels();
    let top = levels - 1;
    let offsets = &sys.level_offsets;
    let mut edges: Vec<(usize, usize, T)> = Vec::new();
    let mut classes: Vec<MspEdgeClass> = Vec::new();

    for e in sys.pegp.edges() {
        let (ku, kv) = (sys.level_of(e.u), sys.level_of(e.v));
        let (lo_node, lo_k, hi_node, hi_k) = if ku <= kv {
            (e.u, ku, e.v, kv)
        } else {
            (e.v, kv, e.u, ku)
        };
        let class = if lo_k == top && hi_k == top {
            Some(MspEdgeClass::TopLevel)
        } else if lo_k == hi_k {
            let local_u = lo_node - offsets[lo_k];
            let local_v = hi_node - offsets[lo_k];
            (h.steps[lo_k].assign[local_u] == h.steps[lo_k].assign[local_v])
                .then_some(MspEdgeClass::IntraAggregate)
        } else if lo_k == 0 {
            // base nodes keep only the edge to their own aggregate one
            // level up; anything else would break the fill-free base
            // elimination
            let local_lo = lo_node - offsets[0];
            let local_hi = hi_node - offsets[hi_k];
            (hi_k == 1 && h.steps[0].assign[local_lo] == local_hi)
                .then_some(MspEdgeClass::InterLevel)
        } else {
            Some(MspEdgeClass::InterLevel)
        };
        if let Some(c) = class {
            edges.push((e.u, e.v, e.w));
            classes.push(c);
        }
    }

    let graph = WeightedGraph::new(sys.n_tilde(), edges)?;
    if connected_components(&graph).len() != 1 {
        return Err(Error::SparsifierDisconnected);
    }
    Ok(MspGraph {
        graph,
        edge_classes: classes,
    })
}

/// Which path the stretch computation selects when the sparsifier is not a
/// tree. `Resistance` minimizes the sum of reciprocal weights (the quantity
/// the stretch itself sums); `WeightSum` minimizes the plain weight sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathRule {
    #[default]
    Resistance,
    WeightSum,
}

/// Per-edge and total stretch of `base` with respect to `sparsifier`, using
/// resistance-shortest paths.
pub fn stretch<T: Scalar>(
    base: &WeightedGraph<T>,
    sparsifier: &WeightedGraph<T>,
) -> Result<(Vec<T>, T)> {
    stretch_with_rule(base, sparsifier, PathRule::Resistance)
}

pub fn stretch_with_rule<T: Scalar>(
    base: &WeightedGraph<T>,
    sparsifier: &WeightedGraph<T>,
    rule: PathRule,
) -> Result<(Vec<T>, T)> {
    if sparsifier.n() != base.n() {
        return Err(Error::DimensionMismatch {
            op: "stretch",
            expected: base.n(),
            got: sparsifier.n(),
        });
    }
    if !base.is_positive() || !sparsifier.is_positive() {
        return Err(Error::SignedWeights("stretch"));
    }
    if connected_components(sparsifier).len() != 1 {
        return Err(Error::SparsifierDisconnected);
    }

    let adj = sparsifier.adjacency();
    let n = sparsifier.n();
    let mut sources: Vec<usize> = base.edges().iter().map(|e| e.u).collect();
    sources.sort_unstable();
    sources.dedup();

    // resistance distance from every needed source
    let mut resist_from: std::collections::HashMap<usize, Vec<T>> = std::collections::HashMap::new();
    for &s in &sources {
        resist_from.insert(s, dijkstra_resistance(&adj, n, s, rule));
    }

    let mut per_edge = Vec::with_capacity(base.m());
    let mut total = T::zero();
    for e in base.edges() {
        let r = resist_from[&e.u][e.v];
        let st = e.w * r;
        per_edge.push(st);
        total += st;
    }
    Ok((per_edge, total))
}

#[derive(PartialEq)]
struct HeapEntry<T> {
    key: T,
    node: usize,
}

impl<T: PartialOrd> Eq for HeapEntry<T> {}

impl<T: PartialOrd> PartialOrd for HeapEntry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: PartialOrd> Ord for HeapEntry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we want smallest key first
        other
            .key
            .partial_cmp(&self.key)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Dijkstra that selects paths by `rule` and reports the resistance length
/// (sum of 1/w) along the selected path.
fn dijkstra_resistance<T: Scalar>(
    adj: &[Vec<(usize, T)>],
    n: usize,
    source: usize,
    rule: PathRule,
) -> Vec<T> {
    let inf = T::infinity();
    let mut key = vec![inf; n]; // selection metric
    let mut resist = vec![inf; n]; // reported metric
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    key[source] = T::zero();
    resist[source] = T::zero();
    heap.push(HeapEntry {
        key: T::zero(),
        node: source,
    });
    while let Some(HeapEntry { key: k, node: u }) = heap.pop() {
        if done[u] || k > key[u] {
            continue;
        }
        done[u] = true;
        for &(v, w) in &adj[u] {
            if done[v] {
                continue;
            }
            let step = match rule {
                PathRule::Resistance => w.recip(),
                PathRule::WeightSum => w,
            };
            let cand = key[u] + step;
            if cand < key[v] {
                key[v] = cand;
                resist[v] = resist[u] + w.recip();
                heap.push(HeapEntry { key: cand, node: v });
            }
        }
    }
    resist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::{
        build_hierarchy, composite_prolongation, mwm_aggregate_with_order, AggregationHierarchy,
        CoarseningStep, LevelSpec,
    };
    use crate::graph::build_laplacian;
    use crate::sparse::SparseMatrix;
    use crate::vector::dot;

    fn grid_2x4() -> WeightedGraph<f64> {
        WeightedGraph::new(
            8,
            vec![
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 3, 1.0),
                (4, 5, 1.0),
                (5, 6, 1.0),
                (6, 7, 1.0),
                (0, 4, 1.0),
                (1, 5, 1.0),
                (2, 6, 1.0),
                (3, 7, 1.0),
            ],
        )
        .unwrap()
    }

    /// Two-level system for the 8-node grid with the pinned pairing
    /// {0,1},{2,3},{4,5},{6,7}.
    pub(crate) fn grid8_system(mu: f64) -> (ExpandedSystem<f64>, AggregationHierarchy<f64>) {
        let g = grid_2x4();
        let order = vec![0, 2, 4, 6, 1, 3, 5, 7];
        let (assign, coarse) = mwm_aggregate_with_order(&g, &order).unwrap();
        let p_step = SparseMatrix::from_triplets(
            8,
            4,
            assign.iter().enumerate().map(|(i, &a)| (i, a, 1.0)),
        )
        .unwrap();
        let h = AggregationHierarchy {
            base_n: 8,
            steps: vec![CoarseningStep {
                assign,
                p_step,
                coarse_graph: coarse,
            }],
            rng_seed: 0,
            stalled: false,
        };
        let p = composite_prolongation(&h, mu).unwrap();
        let l = build_laplacian(&g);
        (expand_laplacian(&l, p).unwrap(), h)
    }

    /// The displayed 12x12 expanded Laplacian as a function of mu.
    pub(crate) fn golden_l_expanded(mu: f64) -> Vec<Vec<f64>> {
        let m = mu;
        let m2 = mu * mu;
        vec![
            vec![2., -1., 0., 0., -1., 0., 0., 0., -m, 0., m, 0.],
            vec![-1., 3., -1., 0., 0., -1., 0., 0., -2. * m, m, m, 0.],
            vec![0., -1., 3., -1., 0., 0., -1., 0., m, -2. * m, 0., m],
            vec![0., 0., -1., 2., 0., 0., 0., -1., 0., -m, 0., m],
            vec![-1., 0., 0., 0., 2., -1., 0., 0., m, 0., -m, 0.],
            vec![0., -1., 0., 0., -1., 3., -1., 0., m, 0., -2. * m, m],
            vec![0., 0., -1., 0., 0., -1., 3., -1., 0., m, m, -2. * m],
            vec![0., 0., 0., -1., 0., 0., -1., 2., 0., m, 0., -m],
            vec![-m, -2. * m, m, 0., m, m, 0., 0., 3. * m2, -m2, -2. * m2, 0.],
            vec![0., m, -2. * m, -m, 0., 0., m, m, -m2, 3. * m2, 0., -2. * m2],
            vec![m, m, 0., 0., -m, -2. * m, m, 0., -2. * m2, 0., 3. * m2, -m2],
            vec![0., 0., m, m, 0., m, -2. * m, -m, 0., -2. * m2, -m2, 3. * m2],
        ]
    }

    /// The displayed 12x12 positive-subgraph Laplacian as a function of mu.
    pub(crate) fn golden_l_pegp(mu: f64) -> Vec<Vec<f64>> {
        let m = mu;
        let m2 = mu * mu;
        let d2 = 2. + m;
        let d3 = 3. + 2. * m;
        let dc = 3. * m2 + 3. * m;
        vec![
            vec![d2, -1., 0., 0., -1., 0., 0., 0., -m, 0., 0., 0.],
            vec![-1., d3, -1., 0., 0., -1., 0., 0., -2. * m, 0., 0., 0.],
            vec![0., -1., d3, -1., 0., 0., -1., 0., 0., -2. * m, 0., 0.],
            vec![0., 0., -1., d2, 0., 0., 0., -1., 0., -m, 0., 0.],
            vec![-1., 0., 0., 0., d2, -1., 0., 0., 0., 0., -m, 0.],
            vec![0., -1., 0., 0., -1., d3, -1., 0., 0., 0., -2. * m, 0.],
            vec![0., 0., -1., 0., 0., -1., d3, -1., 0., 0., 0., -2. * m],
            vec![0., 0., 0., -1., 0., 0., -1., d2, 0., 0., 0., -m],
            vec![-m, -2. * m, 0., 0., 0., 0., 0., 0., dc, -m2, -2. * m2, 0.],
            vec![0., 0., -2. * m, -m, 0., 0., 0., 0., -m2, dc, 0., -2. * m2],
            vec![0., 0., 0., 0., -m, -2. * m, 0., 0., -2. * m2, 0., dc, -m2],
            vec![0., 0., 0., 0., 0., 0., -2. * m, -m, 0., -2. * m2, -m2, dc],
        ]
    }

    #[test]
    fn golden_expanded_matrix() {
        for &mu in &[0.25, 0.5] {
            let (sys, _) = grid8_system(mu);
            let want = golden_l_expanded(mu);
            for i in 0..12 {
                for j in 0..12 {
                    assert!(
                        (sys.l_expanded.get(i, j) - want[i][j]).abs() < 1e-14,
                        "L_expanded({i},{j}) = {} want {}",
                        sys.l_expanded.get(i, j),
                        want[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn golden_pegp_matrix() {
        for &mu in &[0.25, 0.5] {
            let (sys, _) = grid8_system(mu);
            let want = golden_l_pegp(mu);
            for i in 0..12 {
                for j in 0..12 {
                    assert!(
                        (sys.l_pegp.get(i, j) - want[i][j]).abs() < 1e-14,
                        "L_pegp({i},{j}) = {} want {}",
                        sys.l_pegp.get(i, j),
                        want[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn negative_part_edges() {
        let mu = 0.5;
        let (sys, _) = grid8_system(mu);
        // nodes are 0-based: paper edge (1,11) is (0,10) here
        assert_eq!(sys.l_neg.get(0, 10), -mu);
        assert_eq!(sys.l_neg.get(1, 9), -mu);
        assert_eq!(sys.l_neg.get(1, 10), -mu);
        // negative edges connect nodes on different levels only
        for e in sys.graph_expanded.edges() {
            if e.w < 0.0 {
                assert_ne!(sys.level_of(e.u), sys.level_of(e.v));
            }
        }
    }

    #[test]
    fn decomposition_identity() {
        for &mu in &[0.1, 0.5, 0.8] {
            let (sys, _) = grid8_system(mu);
            let n = sys.n_tilde();
            for i in 0..n {
                for j in 0..n {
                    let lhs = sys.l_expanded.get(i, j);
                    let rhs = sys.l_pegp.get(i, j) - sys.l_neg.get(i, j);
                    assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn single_aggregate_block_diag() {
        // one aggregate holding all nodes: L_G P = 0, expanded is
        // blockdiag(L_G, 0) and the coarse node is isolated
        let g = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let assign = vec![0, 0, 0];
        let p_step = SparseMatrix::from_triplets(3, 1, vec![(0, 0, 1.0), (1, 0, 1.0), (2, 0, 1.0)])
            .unwrap();
        let coarse = WeightedGraph::edgeless(1);
        let h = AggregationHierarchy {
            base_n: 3,
            steps: vec![CoarseningStep {
                assign,
                p_step,
                coarse_graph: coarse,
            }],
            rng_seed: 0,
            stalled: false,
        };
        let p = composite_prolongation(&h, 0.5).unwrap();
        let l = build_laplacian(&g);
        let sys = expand_laplacian(&l, p).unwrap();
        for i in 0..4 {
            assert_eq!(sys.l_expanded.get(i, 3), 0.0);
        }
        assert_eq!(sys.l_neg.nnz(), 0);
        assert!(connected_components(&sys.pegp).len() > 1);
        assert!(matches!(extract_msp(&sys, &h), Err(Error::SparsifierDisconnected)));
    }

    #[test]
    fn expanded_nullspace_and_ones() {
        let (sys, _) = grid8_system(0.3);
        let ones = vec![1.0; sys.n_tilde()];
        let r = sys.l_expanded.matvec(&ones);
        for x in &r {
            assert!(x.abs() < 1e-12);
        }
        for v in sys.nullspace_basis() {
            let lv = sys.l_expanded.matvec(&v);
            for x in &lv {
                assert!(x.abs() < 1e-10);
            }
        }
        assert_eq!(sys.nullspace_basis().len(), 12 - 8 + 1);
    }

    #[test]
    fn quadratic_form_ordering() {
        let (sys, _) = grid8_system(0.5);
        let n = sys.n_tilde();
        let mut state = 99u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) as f64) / 2f64.powi(31) - 1.0
        };
        for _ in 0..200 {
            let mut v: Vec<f64> = (0..n).map(|_| next()).collect();
            crate::vector::project_out_ones(&mut v);
            let g_quad = dot(&v, &sys.l_expanded.matvec(&v));
            let h_quad = dot(&v, &sys.l_pegp.matvec(&v));
            let n_quad = dot(&v, &sys.l_neg.matvec(&v));
            assert!(g_quad <= h_quad + 1e-10);
            assert!(n_quad >= -1e-12);
        }
    }

    #[test]
    fn msp_golden_fig_edge_set() {
        let (sys, h) = grid8_system(0.5);
        let msp = extract_msp(&sys, &h).unwrap();
        let mut got: Vec<(usize, usize)> = msp.graph.edges().iter().map(|e| (e.u, e.v)).collect();
        got.sort_unstable();
        // base intra-aggregate pairs, node-to-own-coarse links, top level
        let mut want = vec![
            (0, 1),
            (2, 3),
            (4, 5),
            (6, 7),
            (0, 8),
            (1, 8),
            (2, 9),
            (3, 9),
            (4, 10),
            (5, 10),
            (6, 11),
            (7, 11),
            (8, 9),
            (8, 10),
            (9, 11),
            (10, 11),
        ];
        want.sort_unstable();
        assert_eq!(got, want);
        // weights equal those in the PEGP
        for e in msp.graph.edges() {
            let in_pegp = sys
                .pegp
                .edges()
                .iter()
                .find(|p| p.u == e.u && p.v == e.v)
                .expect("MSP edge missing from PEGP");
            assert_eq!(in_pegp.w, e.w);
        }
    }

    #[test]
    fn msp_on_multilevel_grid_is_connected_and_smaller() {
        let side = 8;
        let mut edges = Vec::new();
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
        let g = WeightedGraph::new(side * side, edges).unwrap();
        let h = build_hierarchy(&g, LevelSpec::Max, 5).unwrap();
        let p = composite_prolongation(&h, 0.125).unwrap();
        let l = build_laplacian(&g);
        let sys = expand_laplacian(&l, p).unwrap();
        let msp = extract_msp(&sys, &h).unwrap();
        assert!(msp.graph.m() < sys.pegp.m());
        assert_eq!(connected_components(&msp.graph).len(), 1);
        assert_eq!(msp.graph.n(), sys.n_tilde());
    }

    #[test]
    fn lift_examples() {
        let mu = 0.5;
        let (sys, _) = grid8_system(mu);
        let ones = vec![1.0; 12];
        let lifted = lift_solution(&sys.p_comp, &ones).unwrap();
        for x in lifted {
            assert!((x - (1.0 - mu)).abs() < 1e-15);
        }
        // e_9 in paper coordinates = coarse node 8 here
        let mut e9 = vec![0.0; 12];
        e9[8] = 1.0;
        let lifted = lift_solution(&sys.p_comp, &e9).unwrap();
        let mut want = vec![0.0; 8];
        want[0] = -mu;
        want[1] = -mu;
        assert_eq!(lifted, want);
        assert!(lift_solution(&sys.p_comp, &[0.0; 5]).is_err());
    }

    #[test]
    fn project_rhs_examples() {
        let (sys, _) = grid8_system(0.5);
        let zero = vec![0.0; 8];
        assert_eq!(project_rhs(&sys.p_comp, &zero).unwrap(), vec![0.0; 12]);

        // benchmark right-hand side: base block of the projection equals b
        let n = 8;
        let mut b = vec![1.0; n];
        b[n - 1] = 1.0 - n as f64;
        let bt = project_rhs(&sys.p_comp, &b).unwrap();
        assert_eq!(&bt[..n], &b[..]);
        let total: f64 = b.iter().sum();
        assert!(total.abs() < 1e-15);

        // compatibility: b_tilde is orthogonal to the expanded nullspace
        let (sys2, _) = grid8_system(0.5);
        for v in sys2.nullspace_basis() {
            assert!(dot(&bt, &v).abs() < 1e-12);
        }
    }

    #[test]
    fn stretch_self_tree() {
        // path tree stretched over itself: every edge has stretch 1
        let t = WeightedGraph::new(4, vec![(0, 1, 2.0), (1, 2, 4.0), (2, 3, 0.5)]).unwrap();
        let (per_edge, total) = stretch(&t, &t).unwrap();
        for s in &per_edge {
            assert_eq!(*s, 1.0);
        }
        assert_eq!(total, 3.0);
    }

    #[test]
    fn stretch_triangle() {
        let base =
            WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let sp = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let (per_edge, total) = stretch(&base, &sp).unwrap();
        assert_eq!(per_edge, vec![1.0, 2.0, 1.0]);
        assert_eq!(total, 4.0);
    }

    #[test]
    fn stretch_disconnected_sparsifier_rejected() {
        let base = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let sp = WeightedGraph::new(3, vec![(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            stretch(&base, &sp),
            Err(Error::SparsifierDisconnected)
        ));
    }

    #[test]
    fn stretch_rules_differ_when_paths_compete() {
        // two routes between 0 and 3: heavy short path vs light long path
        let sp = WeightedGraph::<f64>::new(
            4,
            vec![(0, 1, 10.0), (1, 3, 10.0), (0, 2, 1.0), (2, 3, 1.0)],
        )
        .unwrap();
        let base = WeightedGraph::new(4, vec![(0, 3, 1.0)]).unwrap();
        let (res, _) = stretch_with_rule(&base, &sp, PathRule::Resistance).unwrap();
        let (wsum, _) = stretch_with_rule(&base, &sp, PathRule::WeightSum).unwrap();
        // resistance rule picks the heavy route (1/10 + 1/10), weight-sum
        // rule picks the light route (1 + 1)
        assert!((res[0] - 0.2).abs() < 1e-15);
        assert!((wsum[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn msp_edge_classes_partition() {
        let (sys, h) = grid8_system(0.25);
        let msp = extract_msp(&sys, &h).unwrap();
        let tops = msp
            .edge_classes
            .iter()
            .filter(|c| **c == MspEdgeClass::TopLevel)
            .count();
        let inter = msp
            .edge_classes
            .iter()
            .filter(|c| **c == MspEdgeClass::InterLevel)
            .count();
        let intra = msp
            .edge_classes
            .iter()
            .filter(|c| **c == MspEdgeClass::IntraAggregate)
            .count();
        assert_eq!(tops, 4);
        assert_eq!(inter, 8);
        assert_eq!(intra, 4);
    }
}
