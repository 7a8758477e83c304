//! Weighted simple graphs and their Laplacian / incidence assembly.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

/// An undirected edge stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub u: usize,
    pub v: usize,
    pub w: T,
}

/// A simple undirected graph with real (possibly signed) edge weights.
///
/// The same type carries the base graph, the signed expanded graph, the
/// positive subgraph and the sparsifier. `positive` records whether every
/// stored weight is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    positive: bool,
    /// Original node identifiers when the graph was relabeled at ingestion.
    pub node_labels: Option<Vec<usize>>,
}

impl<T: Scalar> WeightedGraph<T> {
    /// Build a graph from an edge list. Self-loops and duplicate edges are
    /// rejected; callers that ingest raw files must coalesce first.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut list: Vec<Edge<T>> = Vec::new();
        for (u, v, w) in edges {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if u >= n || v >= n {
                return Err(Error::EdgeOutOfRange { u, v, n });
            }
            let (u, v) = if u < v { (u, v) } else { (v, u) };
            list.push(Edge { u, v, w });
        }
        list.sort_by_key(|e| (e.u, e.v));
        for pair in list.windows(2) {
            if pair[0].u == pair[1].u && pair[0].v == pair[1].v {
                return Err(Error::DuplicateEdge(pair[0].u, pair[0].v));
            }
        }
        let positive = list.iter().all(|e| e.w > T::zero());
        Ok(Self {
            n,
            edges: list,
            positive,
            node_labels: None,
        })
    }

    pub fn edgeless(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            positive: true,
            node_labels: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Self {
        assert_eq!(labels.len(), self.n);
        self.node_labels = Some(labels);
        self
    }

    /// Neighbor lists `(neighbor, weight)` sorted by neighbor index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, T)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
        }
        for list in adj.iter_mut() {
            list.sort_by_key(|&(v, _)| v);
        }
        adj
    }

    /// Weighted degree of every node.
    pub fn degrees(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n];
        for e in &self.edges {
            d[e.u] += e.w;
            d[e.v] += e.w;
        }
        d
    }

    pub fn is_connected(&self) -> bool {
        connected_components(self).len() == 1
    }
}

/// Graph Laplacian L with off-diagonal (i, j) = -w(i, j) and diagonal set to
/// the negated sum of the stored off-diagonals, so zero row sums hold by
/// construction.
pub fn build_laplacian<T: Scalar>(g: &WeightedGraph<T>) -> SparseMatrix<T> {
    let n = g.n();
    let mut offdiag: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    for e in g.edges() {
        offdiag[e.u].push((e.v, -e.w));
        offdiag[e.v].push((e.u, -e.w));
    }
    let mut triplets = Vec::with_capacity(2 * g.m() + n);
    for (i, row) in offdiag.iter_mut().enumerate() {
        row.sort_by_key(|&(c, _)| c);
        let mut diag = T::zero();
        for &(c, v) in row.iter() {
            diag -= v;
            triplets.push((i, c, v));
        }
        triplets.push((i, i, diag));
    }
    SparseMatrix::from_triplets(n, n, triplets)
        .expect("laplacian assembly cannot fail on a valid graph")
        .assert_symmetric()
}

/// Incidence factorization L = B^T W B. B is m x n with +1 at the smaller
/// endpoint and -1 at the larger one, rows in canonical edge order; W is the
/// m x m diagonal weight matrix.
pub fn build_incidence<T: Scalar>(g: &WeightedGraph<T>) -> (SparseMatrix<T>, SparseMatrix<T>) {
    let m = g.m();
    let n = g.n();
    let mut b_triplets = Vec::with_capacity(2 * m);
    let mut w_triplets = Vec::with_capacity(m);
    for (row, e) in g.edges().iter().enumerate() {
        b_triplets.push((row, e.u, T::one()));
        b_triplets.push((row, e.v, -T::one()));
        w_triplets.push((row, row, e.w));
    }
    let b = SparseMatrix::from_triplets(m, n, b_triplets).expect("incidence assembly");
    let w = SparseMatrix::from_triplets(m, m, w_triplets).expect("weight matrix assembly");
    (b, w)
}

/// Diagonal square-root weight matrix W_{1/2}. Only defined for positively
/// weighted graphs.
pub fn weight_sqrt<T: Scalar>(g: &WeightedGraph<T>) -> Result<SparseMatrix<T>> {
    if !g.is_positive() {
        return Err(Error::SignedWeights("weight_sqrt"));
    }
    let m = g.m();
    let triplets = g
        .edges()
        .iter()
        .enumerate()
        .map(|(row, e)| (row, row, e.w.sqrt()));
    SparseMatrix::from_triplets(m, m, triplets)
}

/// Partition of the node set by edge connectivity, ignoring weight signs.
/// Components are ordered by their smallest contained node index and node
/// lists are sorted.
pub fn connected_components<T: Scalar>(g: &WeightedGraph<T>) -> Vec<Vec<usize>> {
    let n = g.n();
    let adj = g.adjacency();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        seen[start] = true;
        stack.push(start);
        while let Some(u) = stack.pop() {
            comp.push(u);
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}
