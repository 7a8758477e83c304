//! Sparse square-root-free Cholesky (LDL^T) of a grounded Laplacian, with
//! per-step fill-in accounting.
//!
//! The factorization runs in two passes. A symbolic pass simulates the
//! elimination on adjacency sets, either in a prescribed order or picking a
//! minimum-degree pivot each step, and records every fill edge against the
//! step that created it. The numeric pass is an up-looking LDL that consumes
//! the exact symbolic pattern, so it runs on flat arrays.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::SparseMatrix;

/// Pivot strategy for the elimination.
#[derive(Debug, Clone)]
pub enum EliminationOrder {
    /// Greedy minimum degree on the evolving elimination graph.
    MinDegree,
    /// Caller-supplied node order (must cover every non-ground node once).
    Prescribed(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct LdlFactor<T> {
    /// Node ids in elimination order (ground excluded), length N.
    pub order: Vec<usize>,
    /// node id -> elimination step, usize::MAX for the ground node.
    pub position: Vec<usize>,
    /// Unit-lower factor stored by column in step coordinates.
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<T>,
    /// Pivots of the diagonal factor.
    pub d: Vec<T>,
    /// New symbolic entries created when each step eliminated its pivot.
    pub fill_per_step: Vec<usize>,
    /// Total factor entries beyond the grounded matrix's strict lower part.
    pub fill_in_count: usize,
}

struct Symbolic {
    order: Vec<usize>,
    /// Per-step column pattern in step coordinates, sorted ascending.
    patterns: Vec<Vec<usize>>,
    fill_per_step: Vec<usize>,
}

/// Symbolic elimination on adjacency sets. `adj` indexes all nodes of the
/// grounded matrix by node id; eliminated nodes are removed from their
/// neighbors' sets as the simulation proceeds.
fn symbolic(mut sets: Vec<HashSet<usize>>, strategy: &EliminationOrder) -> Result<Symbolic> {
    let n = sets.len();
    let mut position = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut fill_per_step = Vec::with_capacity(n);
    let mut patterns_nodes: Vec<Vec<usize>> = Vec::with_capacity(n);

    // minimum-degree bookkeeping (bucket queue with lazy entries)
    let mut degree: Vec<usize> = sets.iter().map(|s| s.len()).collect();
    let mut buckets: Vec<Vec<usize>> = Vec::new();
    let mut min_d = 0usize;
    let use_min_degree = matches!(strategy, EliminationOrder::MinDegree);
    if use_min_degree {
        for (node, &d) in degree.iter().enumerate() {
            if buckets.len() <= d {
                buckets.resize(d + 1, Vec::new());
            }
            buckets[d].push(node);
        }
    }
    let prescribed = match strategy {
        EliminationOrder::Prescribed(o) => {
            if o.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "prescribed order has {} entries, expected {}",
                    o.len(),
                    n
                )));
            }
            Some(o.clone())
        }
        EliminationOrder::MinDegree => None,
    };

    for step in 0..n {
        let pivot = if let Some(o) = &prescribed {
            let p = o[step];
            if position[p] != usize::MAX {
                return Err(Error::InvalidArgument(format!(
                    "node {p} appears twice in the prescribed order"
                )));
            }
            p
        } else {
            loop {
                while min_d < buckets.len() && buckets[min_d].is_empty() {
                    min_d += 1;
                }
                if min_d >= buckets.len() {
                    return Err(Error::InvalidArgument(
                        "minimum-degree queue exhausted early".into(),
                    ));
                }
                let cand = buckets[min_d].pop().unwrap();
                if position[cand] == usize::MAX && degree[cand] == min_d {
                    break cand;
                }
            }
        };
        position[pivot] = step;
        order.push(pivot);

        // sorted for determinism: hash-set iteration order must not leak
        // into fill insertion or pivot tie-breaking
        let mut nbrs: Vec<usize> = sets[pivot].iter().copied().collect();
        nbrs.sort_unstable();
        // clique the neighbors; every absent pair is fill created now
        let mut fill = 0usize;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if sets[a].insert(b) {
                    sets[b].insert(a);
                    fill += 1;
                    if use_min_degree {
                        degree[a] += 1;
                        degree[b] += 1;
                    }
                }
            }
        }
        for &a in &nbrs {
            sets[a].remove(&pivot);
            if use_min_degree {
                degree[a] = sets[a].len();
                let d = degree[a];
                if buckets.len() <= d {
                    buckets.resize(d + 1, Vec::new());
                }
                buckets[d].push(a);
                if d < min_d {
                    min_d = d;
                }
            }
        }
        sets[pivot].clear();
        fill_per_step.push(fill);
        patterns_nodes.push(nbrs);
    }

    // convert node-id patterns to sorted step positions
    let patterns: Vec<Vec<usize>> = patterns_nodes
        .into_iter()
        .map(|nodes| {
            let mut p: Vec<usize> = nodes.into_iter().map(|v| position[v]).collect();
            p.sort_unstable();
            p
        })
        .collect();
    Ok(Symbolic {
        order,
        patterns,
        fill_per_step,
    })
}

impl<T: Scalar> LdlFactor<T> {
    /// Factor the matrix with row/column `ground` removed. `matrix` must be
    /// symmetric; the grounded submatrix must be positive definite.
    pub fn factor(
        matrix: &SparseMatrix<T>,
        ground: usize,
        strategy: &EliminationOrder,
    ) -> Result<Self> {
        let n_full = matrix.nrows();
        if n_full != matrix.ncols() {
            return Err(Error::NotSymmetric("ldl factor"));
        }

        // grounded adjacency (node ids unchanged; ground's set left empty)
        let mut sets: Vec<HashSet<usize>> = vec![HashSet::new(); n_full];
        let mut strict_lower_nnz = 0usize;
        let mut max_diag = T::zero();
        for r in 0..n_full {
            if r == ground {
                continue;
            }
            let (cols, vals) = matrix.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if c == ground {
                    continue;
                }
                if c == r {
                    if v > max_diag {
                        max_diag = v;
                    }
                } else {
                    sets[r].insert(c);
                    if c < r {
                        strict_lower_nnz += 1;
                    }
                }
            }
        }
        if max_diag <= T::zero() {
            return Err(Error::NotPositiveDefinite(0));
        }

        // map the strategy onto the grounded node set: the symbolic pass
        // works on a compacted index space without the ground node
        let compact: Vec<usize> = (0..n_full).filter(|&v| v != ground).collect();
        let mut to_compact = vec![usize::MAX; n_full];
        for (i, &v) in compact.iter().enumerate() {
            to_compact[v] = i;
        }
        let compact_sets: Vec<HashSet<usize>> = compact
            .iter()
            .map(|&v| sets[v].iter().map(|&u| to_compact[u]).collect())
            .collect();
        let compact_strategy = match strategy {
            EliminationOrder::MinDegree => EliminationOrder::MinDegree,
            EliminationOrder::Prescribed(o) => {
                let mapped: Result<Vec<usize>> = o
                    .iter()
                    .map(|&v| {
                        if v == ground || v >= n_full {
                            Err(Error::InvalidArgument(format!(
                                "prescribed order contains invalid node {v}"
                            )))
                        } else {
                            Ok(to_compact[v])
                        }
                    })
                    .collect();
                EliminationOrder::Prescribed(mapped?)
            }
        };
        let sym = symbolic(compact_sets, &compact_strategy)?;
        let n = compact.len();

        // numeric up-looking pass
        let mut col_ptr = vec![0usize; n + 1];
        for (s, p) in sym.patterns.iter().enumerate() {
            // column s holds entries for pattern positions greater than s
            col_ptr[s + 1] = col_ptr[s] + p.iter().filter(|&&q| q > s).count();
        }
        let nnz_l = col_ptr[n];
        let mut col_rows = vec![0usize; nnz_l];
        let mut col_vals = vec![T::zero(); nnz_l];
        let mut col_len = vec![0usize; n];
        let mut d = vec![T::zero(); n];

        // row patterns (the elimination reach of each row) by transposing
        let mut row_pat: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (s, pat) in sym.patterns.iter().enumerate() {
            for &q in pat {
                if q > s {
                    row_pat[q].push(s);
                }
            }
        }

        // Expanded Laplacians are graded: pivots legitimately end up many
        // orders below any diagonal entry (they are effective conductances
        // through mu-scaled level chains), so the guard only rejects
        // non-positive or denormal pivots. Singular inputs still surface:
        // the connectivity precheck catches disconnected matrices and a
        // floating component drives some pivot to roundoff around zero.
        let pivot_floor = T::from_f64(1e-300).unwrap_or_else(T::zero);
        let mut x = vec![T::zero(); n];
        // node id of each step
        let step_node: Vec<usize> = sym.order.iter().map(|&ci| compact[ci]).collect();
        let mut position_full = vec![usize::MAX; n_full];
        for (s, &node) in step_node.iter().enumerate() {
            position_full[node] = s;
        }

        for i in 0..n {
            let node = step_node[i];
            let (cols, vals) = matrix.row(node);
            let mut dii = T::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                if c == ground {
                    continue;
                }
                let pos = position_full[c];
                if pos < i {
                    x[pos] = v;
                } else if pos == i {
                    dii = v;
                }
            }
            if dii <= T::zero() {
                return Err(Error::NotPositiveDefinite(i));
            }
            for &k in &row_pat[i] {
                let yk = x[k];
                x[k] = T::zero();
                let base = col_ptr[k];
                for t in 0..col_len[k] {
                    let r = col_rows[base + t];
                    x[r] -= col_vals[base + t] * yk;
                }
                let lik = yk / d[k];
                col_rows[base + col_len[k]] = i;
                col_vals[base + col_len[k]] = lik;
                col_len[k] += 1;
                dii -= lik * yk;
            }
            if dii <= pivot_floor || dii.is_nan() {
                return Err(Error::ZeroPivot {
                    step: i,
                    value: dii.to_f64().unwrap_or(f64::NAN),
                    threshold: pivot_floor.to_f64().unwrap_or(f64::NAN),
                });
            }
            d[i] = dii;
        }

        let fill_in_count = nnz_l - strict_lower_nnz;
        debug_assert_eq!(fill_in_count, sym.fill_per_step.iter().sum::<usize>());

        Ok(LdlFactor {
            order: step_node,
            position: position_full,
            col_ptr,
            col_rows,
            col_vals,
            d,
            fill_per_step: sym.fill_per_step,
            fill_in_count,
        })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Solve L D L^T y = rhs in elimination (step) coordinates, in place.
    pub fn solve_in_place(&self, y: &mut [T]) {
        let n = self.dim();
        assert_eq!(y.len(), n);
        for s in 0..n {
            let ys = y[s];
            if ys != T::zero() {
                for t in self.col_ptr[s]..self.col_ptr[s + 1] {
                    y[self.col_rows[t]] -= self.col_vals[t] * ys;
                }
            }
        }
        for s in 0..n {
            y[s] /= self.d[s];
        }
        for s in (0..n).rev() {
            let mut acc = y[s];
            for t in self.col_ptr[s]..self.col_ptr[s + 1] {
                acc -= self.col_vals[t] * y[self.col_rows[t]];
            }
            y[s] = acc;
        }
    }

    /// Factor entries in the strict lower triangle.
    pub fn factor_nnz(&self) -> usize {
        self.col_ptr[self.dim()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_laplacian, WeightedGraph};

    #[test]
    fn k2_grounded_factor() {
        let g = WeightedGraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let l = build_laplacian(&g);
        let f = LdlFactor::factor(&l, 1, &EliminationOrder::MinDegree).unwrap();
        assert_eq!(f.dim(), 1);
        assert_eq!(f.d, vec![1.0]);
        assert_eq!(f.fill_in_count, 0);
    }

    #[test]
    fn tree_leaf_first_zero_fill() {
        // random-ish tree: leaf-first prescribed order gives zero fill
        let edges = vec![
            (0, 3, 1.5),
            (1, 3, 2.0),
            (2, 4, 1.0),
            (3, 4, 0.5),
            (4, 5, 3.0),
            (5, 6, 1.0),
        ];
        let g = WeightedGraph::new(7, edges).unwrap();
        let l = build_laplacian(&g);
        // repeatedly strip leaves toward the ground node 6
        let order = vec![0, 1, 2, 3, 4, 5];
        let f = LdlFactor::factor(&l, 6, &EliminationOrder::Prescribed(order)).unwrap();
        assert_eq!(f.fill_in_count, 0);
        assert!(f.fill_per_step.iter().all(|&c| c == 0));
    }

    #[test]
    fn min_degree_tree_zero_fill() {
        // min-degree also eliminates trees without fill
        let edges = vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)];
        let g = WeightedGraph::new(5, edges).unwrap();
        let l = build_laplacian(&g);
        let f = LdlFactor::factor(&l, 4, &EliminationOrder::MinDegree).unwrap();
        assert_eq!(f.fill_in_count, 0);
    }

    #[test]
    fn solve_round_trip() {
        let edges: Vec<(usize, usize, f64)> = vec![
            (0, 1, 1.0),
            (1, 2, 2.0),
            (2, 3, 1.0),
            (0, 3, 0.5),
            (1, 3, 1.0),
        ];
        let g = WeightedGraph::new(4, edges).unwrap();
        let l = build_laplacian(&g);
        let ground = 3;
        let f = LdlFactor::factor(&l, ground, &EliminationOrder::MinDegree).unwrap();
        // grounded solve: pick y on the non-ground nodes, form rhs = L_g y
        let y_nodes = [0.7, -0.3, 0.4];
        let mut y_full = vec![0.0; 4];
        for (i, node) in [0, 1, 2].iter().enumerate() {
            y_full[*node] = y_nodes[i];
        }
        let rhs_full = l.matvec(&y_full);
        let mut rhs_steps = vec![0.0; 3];
        for node in [0usize, 1, 2] {
            rhs_steps[f.position[node]] = rhs_full[node];
        }
        f.solve_in_place(&mut rhs_steps);
        for node in [0usize, 1, 2] {
            assert!((rhs_steps[f.position[node]] - y_full[node]).abs() < 1e-12);
        }
    }

    #[test]
    fn fill_counts_on_cycle() {
        // 4-cycle plus a pendant ground: the grounded part is a true cycle,
        // so eliminating node 0 links its two neighbors (one fill edge)
        let edges = vec![
            (0, 1, 1.0),
            (1, 2, 1.0),
            (2, 3, 1.0),
            (0, 3, 1.0),
            (3, 4, 1.0),
        ];
        let g = WeightedGraph::new(5, edges).unwrap();
        let l = build_laplacian(&g);
        let f =
            LdlFactor::factor(&l, 4, &EliminationOrder::Prescribed(vec![0, 1, 2, 3])).unwrap();
        assert_eq!(f.fill_in_count, 1);
        assert_eq!(f.fill_per_step, vec![1, 0, 0, 0]);
    }

    #[test]
    fn singular_without_ground_detected() {
        // full Laplacian (no grounding possible here: pass an isolated pair)
        let g = WeightedGraph::new(4, vec![(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let l = build_laplacian(&g);
        // grounding node 3 leaves the 0-1 component singular
        let r = LdlFactor::factor(&l, 3, &EliminationOrder::MinDegree);
        assert!(matches!(r, Err(Error::ZeroPivot { .. })));
    }
}
