//! Flexible GMRES with pluggable Laplacian preconditioners.
//!
//! A preconditioner is a connected positive-graph Laplacian applied through
//! an exact grounded LDL^T factorization: the highest-index node is removed,
//! the remaining SPD matrix is factored, and the application solves against
//! the compatibility-projected residual and re-centers the output so it is
//! orthogonal to the all-ones vector.

pub mod ldl;

use std::fmt;
use std::time::Instant;

use crate::aggregation::AggregationHierarchy;
use crate::error::{Error, Result};
use crate::expansion::{ExpandedSystem, MspGraph};
use crate::scalar::{real, Scalar};
use crate::sparse::SparseMatrix;
use crate::vector::{axpy, dot, norm2, project_out_ones, scale};

pub use ldl::{EliminationOrder, LdlFactor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerKind {
    None,
    Pegp,
    Msp,
    Custom,
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PreconditionerKind::None => "none",
            PreconditionerKind::Pegp => "pegp",
            PreconditionerKind::Msp => "msp",
            PreconditionerKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Preconditioner<T> {
    pub kind: PreconditionerKind,
    /// The preconditioning Laplacian itself.
    pub matrix: SparseMatrix<T>,
    factor: LdlFactor<T>,
    /// Node removed to make the factorization definite (highest index).
    pub ground_node: usize,
    /// Factor entries beyond the grounded matrix's strict lower triangle.
    pub fill_in_count: usize,
}

impl<T: Scalar> Preconditioner<T> {
    /// Build with a fill-reducing minimum-degree ordering (the PEGP choice).
    pub fn pegp(l: &SparseMatrix<T>) -> Result<Self> {
        Self::build(l, PreconditionerKind::Pegp, EliminationOrder::MinDegree)
    }

    /// Build with the base-level-upward ordering prescribed for the MSP.
    pub fn msp(l: &SparseMatrix<T>, order: Vec<usize>) -> Result<Self> {
        Self::build(l, PreconditionerKind::Msp, EliminationOrder::Prescribed(order))
    }

    /// Arbitrary connected Laplacian, minimum-degree ordering.
    pub fn custom(l: &SparseMatrix<T>) -> Result<Self> {
        Self::build(l, PreconditionerKind::Custom, EliminationOrder::MinDegree)
    }

    pub fn build(
        l: &SparseMatrix<T>,
        kind: PreconditionerKind,
        strategy: EliminationOrder,
    ) -> Result<Self> {
        let n = l.nrows();
        if n != l.ncols() || !l.is_symmetric() {
            return Err(Error::NotSymmetric("preconditioner build"));
        }
        if !matrix_connected(l) {
            return Err(Error::Disconnected("preconditioner matrix"));
        }
        let ground = n - 1;
        let factor = LdlFactor::factor(l, ground, &strategy)?;
        let fill = factor.fill_in_count;
        Ok(Self {
            kind,
            matrix: l.clone(),
            factor,
            ground_node: ground,
            fill_in_count: fill,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Fill created by each elimination step, aligned with
    /// [`Self::elimination_order`].
    pub fn fill_per_step(&self) -> &[usize] {
        &self.factor.fill_per_step
    }

    pub fn elimination_order(&self) -> &[usize] {
        &self.factor.order
    }

    /// z with L z = (r - mean(r)) and z orthogonal to the ones vector. The
    /// grounded component is back-substituted as zero, then the whole vector
    /// is shifted onto the ones-complement.
    pub fn apply(&self, r: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(r.len(), n, "preconditioner apply dimension mismatch");
        let m = crate::vector::mean(r);
        let mut y = vec![T::zero(); self.factor.dim()];
        for (step, &node) in self.factor.order.iter().enumerate() {
            y[step] = r[node] - m;
        }
        self.factor.solve_in_place(&mut y);
        let mut z = vec![T::zero(); n];
        for (step, &node) in self.factor.order.iter().enumerate() {
            z[node] = y[step];
        }
        z[self.ground_node] = T::zero();
        project_out_ones(&mut z);
        z
    }
}

fn matrix_connected<T: Scalar>(l: &SparseMatrix<T>) -> bool {
    let n = l.nrows();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        let (cols, _) = l.row(u);
        for &c in cols {
            if c != u && !seen[c] {
                seen[c] = true;
                count += 1;
                stack.push(c);
            }
        }
    }
    count == n
}

/// Elimination order for an MSP preconditioner: finest level first,
/// aggregate by aggregate, inside each aggregate the member with the fewest
/// remaining sparsifier neighbors goes first; the top level comes last in
/// index order. The global ground node (highest index) is excluded.
pub fn msp_elimination_order<T: Scalar>(
    sys: &ExpandedSystem<T>,
    msp: &MspGraph<T>,
    h: &AggregationHierarchy<T>,
) -> Vec<usize> {
    let n_tilde = sys.n_tilde();
    let ground = n_tilde - 1;
    let adj = msp.graph.adjacency();
    let mut remaining_deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut eliminated = vec![false; n_tilde];
    let mut order = Vec::with_capacity(n_tilde - 1);

    let eliminate = |node: usize,
                         remaining_deg: &mut Vec<usize>,
                         eliminated: &mut Vec<bool>,
                         order: &mut Vec<usize>| {
        eliminated[node] = true;
        order.push(node);
        for &(v, _) in &adj[node] {
            remaining_deg[v] = remaining_deg[v].saturating_sub(1);
        }
    };

    let levels = sys.levels();
    for k in 0..levels - 1 {
        let off = sys.level_offsets[k];
        let n_k = sys.level_offsets[k + 1] - off;
        let assign = &h.steps[k].assign;
        let n_coarse = h.steps[k].n_coarse();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_coarse];
        for local in 0..n_k {
            members[assign[local]].push(off + local);
        }
        for group in members {
            let mut pending = group;
            while !pending.is_empty() {
                let (idx, _) = pending
                    .iter()
                    .enumerate()
                    .min_by_key(|&(_, &node)| (remaining_deg[node], node))
                    .unwrap();
                let node = pending.swap_remove(idx);
                eliminate(node, &mut remaining_deg, &mut eliminated, &mut order);
            }
        }
    }
    for node in sys.level_offsets[levels - 1]..n_tilde {
        if node != ground {
            eliminate(node, &mut remaining_deg, &mut eliminated, &mut order);
        }
    }
    order
}

/// Outcome of an FGMRES solve.
#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub iterations: usize,
    /// Residual norms, starting with the initial residual.
    pub residual_history: Vec<T>,
    pub converged: bool,
    pub relative_tolerance: T,
    /// Seconds spent in the iteration loop (setup excluded).
    pub wall_time: f64,
    pub preconditioner_kind: PreconditionerKind,
    pub restart: Option<usize>,
    /// Arnoldi breakdown was hit (h_{j+1,j} below threshold).
    pub breakdown: bool,
    /// Recomputed ||b - A x|| at exit.
    pub final_residual: T,
}

#[derive(Debug, Clone)]
pub struct FgmresOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    /// Restart length; `None` runs full FGMRES (the default).
    pub restart: Option<usize>,
    /// Remove the mean of b before solving (compatibility projection for
    /// Laplacian systems; leave off for regular matrices).
    pub project_ones: bool,
}

impl<T: Scalar> FgmresOptions<T> {
    pub fn new(tol: T) -> Self {
        Self {
            tol,
            max_iter: 1000,
            restart: None,
            project_ones: false,
        }
    }
}

const BREAKDOWN_EPS: f64 = 1e-14;

/// Flexible GMRES: the preconditioned direction z_j is stored per iteration,
/// so the preconditioner may vary. No restart unless requested; initial
/// guess is always zero; convergence is measured on the true system
/// (relative residual against ||b||).
pub fn fgmres<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &[T],
    precond: Option<&Preconditioner<T>>,
    opts: &FgmresOptions<T>,
) -> Result<(Vec<T>, SolveReport<T>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::NotSymmetric("fgmres"));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            op: "fgmres",
            expected: n,
            got: b.len(),
        });
    }
    if let Some(p) = precond {
        if p.dim() != n {
            return Err(Error::DimensionMismatch {
                op: "fgmres preconditioner",
                expected: n,
                got: p.dim(),
            });
        }
    }

    let mut b_eff = b.to_vec();
    if opts.project_ones {
        project_out_ones(&mut b_eff);
    }
    let bnorm = norm2(&b_eff);
    let kind = precond.map_or(PreconditionerKind::None, |p| p.kind);

    let mut x = vec![T::zero(); n];
    let mut history: Vec<T> = vec![bnorm];
    let mut total_iters = 0usize;
    let mut converged = false;
    let mut breakdown = false;

    let start = Instant::now();
    if bnorm == T::zero() {
        converged = true;
    } else {
        let cycle_cap = opts.restart.unwrap_or(opts.max_iter).max(1);
        let breakdown_eps = real::<T>(BREAKDOWN_EPS);
        'outer: loop {
            // residual for the current outer cycle
            let mut r = b_eff.clone();
            let ax = a.matvec(&x);
            for (ri, axi) in r.iter_mut().zip(&ax) {
                *ri -= *axi;
            }
            let beta = norm2(&r);
            if beta <= opts.tol * bnorm {
                converged = true;
                break;
            }
            if total_iters >= opts.max_iter {
                break;
            }

            let mut v: Vec<Vec<T>> = Vec::new();
            let mut z: Vec<Vec<T>> = Vec::new();
            scale(&mut r, beta.recip());
            v.push(r);
            let mut hcols: Vec<Vec<T>> = Vec::new();
            let mut cs: Vec<T> = Vec::new();
            let mut sn: Vec<T> = Vec::new();
            let mut g = vec![beta];

            let mut j = 0usize;
            while j < cycle_cap && total_iters < opts.max_iter {
                let zj = match precond {
                    Some(p) => p.apply(&v[j]),
                    None => v[j].clone(),
                };
                let mut w = a.matvec(&zj);
                z.push(zj);

                let mut hcol = vec![T::zero(); j + 2];
                for (i, vi) in v.iter().enumerate() {
                    let hij = dot(&w, vi);
                    hcol[i] = hij;
                    axpy(&mut w, -hij, vi);
                }
                let hlast = norm2(&w);
                hcol[j + 1] = hlast;
                let broke = hlast < breakdown_eps;
                if !broke {
                    scale(&mut w, hlast.recip());
                    v.push(w);
                }

                // apply accumulated Givens rotations, then a new one
                for i in 0..j {
                    let t = cs[i] * hcol[i] + sn[i] * hcol[i + 1];
                    hcol[i + 1] = -sn[i] * hcol[i] + cs[i] * hcol[i + 1];
                    hcol[i] = t;
                }
                let (c, s) = givens(hcol[j], hcol[j + 1]);
                cs.push(c);
                sn.push(s);
                hcol[j] = c * hcol[j] + s * hcol[j + 1];
                hcol[j + 1] = T::zero();
                hcols.push(hcol);
                let gnext = -s * g[j];
                g[j] = c * g[j];
                g.push(gnext);

                total_iters += 1;
                j += 1;
                let res = gnext.abs();
                history.push(res);

                if res <= opts.tol * bnorm {
                    converged = true;
                }
                if broke {
                    breakdown = true;
                }
                if converged || broke {
                    update_solution(&mut x, &hcols, &g, &z, j);
                    break 'outer;
                }
            }
            update_solution(&mut x, &hcols, &g, &z, j);
            if opts.restart.is_none() || total_iters >= opts.max_iter {
                if !converged {
                    // history already reflects the non-converged state
                }
                break;
            }
        }
    }
    let wall_time = start.elapsed().as_secs_f64();

    let ax = a.matvec(&x);
    let mut rfinal = b_eff.clone();
    for (ri, axi) in rfinal.iter_mut().zip(&ax) {
        *ri -= *axi;
    }
    let final_residual = norm2(&rfinal);
    if bnorm > T::zero() && final_residual <= opts.tol * bnorm {
        converged = true;
    }

    let report = SolveReport {
        iterations: total_iters,
        residual_history: history,
        converged,
        relative_tolerance: opts.tol,
        wall_time,
        preconditioner_kind: kind,
        restart: opts.restart,
        breakdown,
        final_residual,
    };
    Ok((x, report))
}

fn update_solution<T: Scalar>(
    x: &mut [T],
    hcols: &[Vec<T>],
    g: &[T],
    z: &[Vec<T>],
    k: usize,
) {
    if k == 0 {
        return;
    }
    // back-substitute the k x k triangular system
    let mut y = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for (jj, yj) in y.iter().enumerate().take(k).skip(i + 1) {
            s -= hcols[jj][i] * *yj;
        }
        y[i] = s / hcols[i][i];
    }
    for (jj, yj) in y.iter().enumerate() {
        axpy(x, *yj, &z[jj]);
    }
}

fn givens<T: Scalar>(a: T, b: T) -> (T, T) {
    if b == T::zero() {
        (T::one(), T::zero())
    } else if a.abs() > b.abs() {
        let t = b / a;
        let c = (T::one() + t * t).sqrt().recip();
        (c, c * t)
    } else {
        let t = a / b;
        let s = (T::one() + t * t).sqrt().recip();
        (s * t, s)
    }
}
