//! Desk-scale spectral verification: generalized eigenvalue pencils,
//! nullspace dimensions, and the rho ratio bounding the preconditioned
//! condition number.
//!
//! Dense mode deflates the nullspace of the left matrix explicitly (its
//! eigenbasis complement), reduces to a symmetric-definite pencil via
//! Cholesky and diagonalizes the standard form. Iterative mode runs Lanczos
//! in the B-inner product with exact B-solves from the solver module.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::aggregation::{build_hierarchy, composite_prolongation, LevelSpec};
use crate::dense::{spd_pencil_eigenvalues, sym_eigen, DenseMatrix};
use crate::error::{Error, Result};
use crate::expansion::{expand_laplacian, ExpandedSystem};
use crate::graph::{connected_components, WeightedGraph};
use crate::scalar::{real, Scalar};
use crate::solver::Preconditioner;
use crate::sparse::SparseMatrix;
use crate::vector::{axpy, dot};

/// Hard cap for dense-mode problem sizes.
pub const DENSE_SIZE_CAP: usize = 5000;

/// Default relative threshold separating the numerical kernel.
pub fn default_zero_threshold<T: Scalar>() -> T {
    real(1e-10)
}

#[derive(Debug, Clone)]
pub struct PencilSpectrum<T> {
    /// Finite pencil eigenvalues, ascending (dense mode) or converged Ritz
    /// values (iterative mode).
    pub eigenvalues: Vec<T>,
    pub lambda_max: T,
    pub lambda_min_nonzero: T,
    pub kappa: T,
    pub null_dim_a: usize,
    pub null_dim_b: usize,
    pub zero_threshold: T,
    /// False when the iterative mode hit its matvec cap; the brackets then
    /// hold the best enclosures available.
    pub converged: bool,
    pub lambda_max_bracket: Option<(T, T)>,
    pub lambda_min_bracket: Option<(T, T)>,
    pub matvecs: usize,
}

#[derive(Debug, Clone)]
pub struct IterativeOpts<T> {
    /// Relative tolerance on the extremal eigenvalues.
    pub tol: T,
    /// Operator applications (one A matvec plus one B solve each) allowed.
    pub max_matvecs: usize,
    /// Basis of the left matrix's nullspace to project out (need not be
    /// orthonormal; it is B-orthonormalized internally).
    pub deflate: Vec<Vec<T>>,
    pub seed: u64,
}

impl<T: Scalar> Default for IterativeOpts<T> {
    fn default() -> Self {
        Self {
            tol: real(1e-6),
            max_matvecs: 5000,
            deflate: Vec::new(),
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub enum PencilMode<T> {
    Dense,
    Iterative(IterativeOpts<T>),
}

/// Extremal generalized eigenvalues of A v = lambda B v over the complement
/// of Null(A). B must be positive semidefinite with nullspace at most
/// span{1}.
pub fn generalized_pencil<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &SparseMatrix<T>,
    mode: PencilMode<T>,
) -> Result<PencilSpectrum<T>> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            op: "generalized_pencil",
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    if !a.is_symmetric() || !b.is_symmetric() {
        return Err(Error::NotSymmetric("generalized_pencil"));
    }
    match mode {
        PencilMode::Dense => dense_pencil(a, b),
        PencilMode::Iterative(opts) => iterative_pencil(a, b, &opts),
    }
}

/// Dense route: the finite pencil eigenvalues are the nonzero spectrum of
/// pinv(B) A, computed through the symmetric sandwich B^{+1/2} A B^{+1/2}.
/// Restricting both matrices to the Euclidean complement of Null(A) would
/// perturb them: the invariant subspace carrying the finite eigenvalues is
/// the B-orthogonal complement of Null(A), not the Euclidean one.
fn dense_pencil<T: Scalar>(a: &SparseMatrix<T>, b: &SparseMatrix<T>) -> Result<PencilSpectrum<T>> {
    let n = a.nrows();
    if n > DENSE_SIZE_CAP {
        return Err(Error::InvalidArgument(format!(
            "dense pencil limited to {DENSE_SIZE_CAP} rows, got {n}; use iterative mode"
        )));
    }
    let thr = default_zero_threshold::<T>();

    let eig_b = sym_eigen(&b.to_dense(), true)?;
    let bmax = max_abs_value(&eig_b.values);
    let null_dim_b = eig_b.values.iter().filter(|v| v.abs() <= thr * bmax).count();
    if null_dim_b > 1 {
        return Err(Error::NullspaceTooLarge);
    }

    let eig_a = sym_eigen(&a.to_dense(), false)?;
    let amax = max_abs_value(&eig_a.values);
    let null_dim_a = eig_a.values.iter().filter(|v| v.abs() <= thr * amax).count();
    let finite_count = n - null_dim_a;
    if finite_count == 0 {
        return Err(Error::InvalidArgument("left pencil matrix is zero".into()));
    }

    // B^{+1/2} from B's eigendecomposition
    let bvecs = eig_b.vectors.as_ref().unwrap();
    let mut bhalf = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let lam = eig_b.values[k];
        if lam.abs() <= thr * bmax || lam <= T::zero() {
            continue;
        }
        let inv = lam.sqrt().recip();
        for i in 0..n {
            let vik = bvecs.get(i, k);
            if vik == T::zero() {
                continue;
            }
            let scaled = inv * vik;
            for j in 0..n {
                let old = bhalf.get(i, j);
                bhalf.set(i, j, old + scaled * bvecs.get(j, k));
            }
        }
    }
    let mut s = bhalf.matmul(&a.matmul_dense(&bhalf));
    s.symmetrize();
    let all = sym_eigen(&s, false)?.values;
    let eigenvalues: Vec<T> = all[n - finite_count..].to_vec();
    spectrum_from_values(eigenvalues, null_dim_a, null_dim_b, thr)
}

fn spectrum_from_values<T: Scalar>(
    eigenvalues: Vec<T>,
    null_dim_a: usize,
    null_dim_b: usize,
    thr: T,
) -> Result<PencilSpectrum<T>> {
    let lambda_min = *eigenvalues.first().unwrap();
    let lambda_max = *eigenvalues.last().unwrap();
    Ok(PencilSpectrum {
        lambda_max,
        lambda_min_nonzero: lambda_min,
        kappa: lambda_max / lambda_min,
        null_dim_a,
        null_dim_b,
        zero_threshold: thr,
        converged: true,
        lambda_max_bracket: None,
        lambda_min_bracket: None,
        matvecs: 0,
        eigenvalues,
    })
}

fn max_abs_value<T: Scalar>(sorted: &[T]) -> T {
    match (sorted.first(), sorted.last()) {
        (Some(a), Some(b)) => a.abs().max(b.abs()),
        _ => T::zero(),
    }
}

/// Number of singular values of a symmetric matrix at or below
/// `threshold * sigma_max` (dense eigendecomposition; |eigenvalue| equals
/// the singular value for symmetric input).
pub fn nullspace_dim<T: Scalar>(a: &SparseMatrix<T>, threshold: T) -> Result<usize> {
    if a.nrows() != a.ncols() || !a.is_symmetric() {
        return Err(Error::NotSymmetric("nullspace_dim"));
    }
    if a.nrows() > DENSE_SIZE_CAP {
        return Err(Error::InvalidArgument(format!(
            "nullspace_dim limited to {DENSE_SIZE_CAP} rows"
        )));
    }
    let eig = sym_eigen(&a.to_dense(), false)?;
    let smax = max_abs_value(&eig.values);
    if smax == T::zero() {
        return Ok(a.nrows());
    }
    Ok(eig.values.iter().filter(|v| v.abs() <= threshold * smax).count())
}

/// Householder direction u such that (I - 2uu^T) e_0 = ones/sqrt(n); the
/// remaining columns of the reflector form an orthonormal basis of the
/// ones-complement.
fn ones_complement_direction<T: Scalar>(n: usize) -> Vec<T> {
    let inv_sqrt = T::from_usize(n).unwrap().sqrt().recip();
    let mut w: Vec<T> = vec![-inv_sqrt; n];
    w[0] += T::one();
    let norm = crate::vector::norm2(&w);
    for x in w.iter_mut() {
        *x /= norm;
    }
    w
}

/// rho-hat: the supremum of the negative-to-positive quadratic-form ratio
/// (L_neg v, v) / (L_pegp v, v) over the subspace carrying the finite pencil
/// eigenvalues. Zero when there are no negative edges.
///
/// Vectors in Null(L_expanded) have ratio exactly one (the expanded and
/// positive forms agree there), so a supremum over the whole
/// ones-complement would degenerate to one as soon as the expanded graph
/// has more nodes than the base graph. Restricted to the invariant
/// complement the estimate is sharp: the smallest pencil eigenvalue equals
/// 1 - rho-hat.
pub fn rho_estimate<T: Scalar>(sys: &ExpandedSystem<T>) -> Result<T> {
    if sys.l_neg.nnz() == 0 {
        return Ok(T::zero());
    }
    if connected_components(&sys.pegp).len() != 1 {
        return Err(Error::Disconnected("pegp"));
    }
    if sys.base_n() > DENSE_SIZE_CAP {
        return Err(Error::InvalidArgument(format!(
            "rho_estimate limited to base size {DENSE_SIZE_CAP}"
        )));
    }
    let w = invariant_complement(sys)?;
    let a_red = w.matmul_tn(&sys.l_neg.matmul_dense(&w));
    let b_red = w.matmul_tn(&sys.l_pegp.matmul_dense(&w));
    let vals = spd_pencil_eigenvalues(&a_red, &b_red)?;
    let rho = *vals.last().unwrap();
    Ok(rho.max(T::zero()))
}

/// Condition number of the (L_expanded, L_pegp) pencil without a full-size
/// eigendecomposition, so table-scale systems stay cheap.
///
/// The finite eigenvalues live on the invariant subspace W spanned by
/// applying pinv(L_pegp) L_expanded to Range(L_expanded). Range(L_expanded)
/// is the column space of P(mu)^T restricted to the ones-complement of the
/// base graph (an analytic consequence of the triple-product structure), and
/// the operator application uses the exact grounded factorization from the
/// solver module. Galerkin reduction on W reproduces the pencil eigenvalues
/// exactly because W is invariant.
pub fn expanded_pencil<T: Scalar>(sys: &ExpandedSystem<T>) -> Result<PencilSpectrum<T>> {
    let n = sys.base_n();
    let n_tilde = sys.n_tilde();
    if n > DENSE_SIZE_CAP {
        return Err(Error::InvalidArgument(format!(
            "expanded_pencil limited to base size {DENSE_SIZE_CAP}"
        )));
    }
    if connected_components(&sys.pegp).len() != 1 {
        return Err(Error::Disconnected("pegp"));
    }
    let w = invariant_complement(sys)?;
    let a_red = w.matmul_tn(&sys.l_expanded.matmul_dense(&w));
    let b_red = w.matmul_tn(&sys.l_pegp.matmul_dense(&w));
    let eigenvalues = spd_pencil_eigenvalues(&a_red, &b_red)?;
    spectrum_from_values(
        eigenvalues,
        n_tilde - n + 1,
        1,
        default_zero_threshold::<T>(),
    )
}

/// Basis of the invariant subspace W carrying the finite eigenvalues of the
/// (L_expanded, L_pegp) pencil: pinv(L_pegp) L_expanded applied to a basis
/// of Range(L_expanded), which itself is the column space of P(mu)^T
/// restricted to the ones-complement of the base graph.
fn invariant_complement<T: Scalar>(sys: &ExpandedSystem<T>) -> Result<DenseMatrix<T>> {
    let n = sys.base_n();
    let n_tilde = sys.n_tilde();
    let mt = sys.p_comp.to_sparse().transpose();
    let u = ones_complement_direction::<T>(n);
    let mtu = mt.matvec(&u);
    let two = real::<T>(2.0);
    // Z = (M^T H)[:, 1..]: spans Range(L_expanded) exactly
    let mut z = DenseMatrix::zeros(n_tilde, n - 1);
    for (r, c, v) in mt.iter() {
        if c >= 1 {
            let old = z.get(r, c - 1);
            z.set(r, c - 1, old + v);
        }
    }
    for r in 0..n_tilde {
        let cscale = two * mtu[r];
        let row = z.row_mut(r);
        for (j, uj) in u.iter().enumerate().skip(1) {
            row[j - 1] -= cscale * *uj;
        }
    }
    // W = pinv(B) A Z, column by column through the grounded solve
    let precond = Preconditioner::custom(&sys.l_pegp)?;
    let az = sys.l_expanded.matmul_dense(&z);
    let mut w = DenseMatrix::zeros(n_tilde, n - 1);
    let mut col = vec![T::zero(); n_tilde];
    for j in 0..n - 1 {
        for i in 0..n_tilde {
            col[i] = az.get(i, j);
        }
        let solved = precond.apply(&col);
        for (i, &v) in solved.iter().enumerate() {
            w.set(i, j, v);
        }
    }
    Ok(w)
}

/// Lanczos in the B-inner product on the operator B^+ A. The start vector
/// is one operator application of a random vector, which lands it in
/// Range(A) up to roundoff; an explicit deflation basis tightens this.
fn iterative_pencil<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &SparseMatrix<T>,
    opts: &IterativeOpts<T>,
) -> Result<PencilSpectrum<T>> {
    let n = a.nrows();
    let precond = Preconditioner::custom(b)?;
    let mut matvecs = 0usize;
    let apply_op = |x: &[T], count: &mut usize| -> Vec<T> {
        *count += 1;
        precond.apply(&a.matvec(x))
    };

    // B-orthonormalize the deflation basis. The constant direction is B's
    // own kernel: normalizing it in the B-norm would divide by roundoff, so
    // near-constant candidates are skipped and the iteration keeps its
    // vectors Euclidean-orthogonal to ones instead (the preconditioner
    // already returns mean-free vectors).
    let mut deflate: Vec<(Vec<T>, Vec<T>)> = Vec::new(); // (vector, B*vector)
    let n_scalar = T::from_usize(n).unwrap();
    for cand in &opts.deflate {
        let mut vcand = cand.clone();
        crate::vector::project_out_ones(&mut vcand);
        let norm_sq = dot(&vcand, &vcand);
        let cand_sq = dot(cand, cand);
        // a candidate that collapses under mean removal was (numerically)
        // constant
        if norm_sq <= real::<T>(1e-24) * cand_sq.max(n_scalar * T::epsilon()) {
            continue;
        }
        for (u, bu) in &deflate {
            let c = dot(&vcand, bu);
            axpy(&mut vcand, -c, u);
        }
        let bv = b.matvec(&vcand);
        let nrm = dot(&vcand, &bv).max(T::zero()).sqrt();
        if nrm > real::<T>(1e-150) {
            let inv = nrm.recip();
            let v: Vec<T> = vcand.iter().map(|&x| x * inv).collect();
            let bv: Vec<T> = bv.iter().map(|&x| x * inv).collect();
            deflate.push((v, bv));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let seed_vec: Vec<T> = (0..n)
        .map(|_| real::<T>(rng.gen_range(-1.0..1.0)))
        .collect();
    let mut v0 = apply_op(&seed_vec, &mut matvecs);
    for (u, bu) in &deflate {
        let c = dot(&v0, bu);
        axpy(&mut v0, -c, u);
    }
    let bv0 = b.matvec(&v0);
    let nrm = dot(&v0, &bv0).max(T::zero()).sqrt();
    if nrm <= real::<T>(1e-300) {
        return Err(Error::InvalidArgument(
            "iterative pencil: start vector vanished".into(),
        ));
    }
    let inv = nrm.recip();
    let mut basis: Vec<Vec<T>> = vec![v0.iter().map(|&x| x * inv).collect()];
    let mut b_basis: Vec<Vec<T>> = vec![bv0.iter().map(|&x| x * inv).collect()];

    struct RitzState<T> {
        theta_min: T,
        theta_max: T,
        res_min: T,
        res_max: T,
        values: Vec<T>,
    }

    let mut alphas: Vec<T> = Vec::new();
    let mut betas: Vec<T> = Vec::new();
    let max_basis = n.min(400);
    let mut converged = false;
    let mut state: Option<RitzState<T>>;

    loop {
        let j = alphas.len();
        let mut w = apply_op(&basis[j], &mut matvecs);
        let alpha = dot(&w, &b_basis[j]);
        axpy(&mut w, -alpha, &basis[j]);
        if j > 0 {
            let beta_prev = betas[j - 1];
            axpy(&mut w, -beta_prev, &basis[j - 1]);
        }
        // full reorthogonalization in the B-inner product, plus Euclidean
        // mean removal to pin down B's kernel direction
        for (u, bu) in basis.iter().zip(&b_basis) {
            let c = dot(&w, bu);
            axpy(&mut w, -c, u);
        }
        for (u, bu) in &deflate {
            let c = dot(&w, bu);
            axpy(&mut w, -c, u);
        }
        crate::vector::project_out_ones(&mut w);
        alphas.push(alpha);

        let bw = b.matvec(&w);
        let beta = dot(&w, &bw).max(T::zero()).sqrt();

        // Ritz extremes and residual bounds from the tridiagonal section
        let k = alphas.len();
        let mut t = DenseMatrix::zeros(k, k);
        for (i, &al) in alphas.iter().enumerate() {
            t.set(i, i, al);
        }
        for (i, &be) in betas.iter().enumerate() {
            t.set(i, i + 1, be);
            t.set(i + 1, i, be);
        }
        let eig = sym_eigen(&t, true)?;
        let vecs = eig.vectors.as_ref().unwrap();
        let st = RitzState {
            theta_min: eig.values[0],
            theta_max: eig.values[k - 1],
            res_min: beta * vecs.get(k - 1, 0).abs(),
            res_max: beta * vecs.get(k - 1, k - 1).abs(),
            values: eig.values,
        };
        let tol_max = opts.tol * st.theta_max.abs().max(T::epsilon());
        let tol_min = opts.tol * st.theta_min.abs().max(T::epsilon());
        let done = (st.res_max <= tol_max && st.res_min <= tol_min) || beta <= real::<T>(1e-300);
        let capped = matvecs >= opts.max_matvecs || k >= max_basis;
        state = Some(st);
        if done {
            converged = true;
            break;
        }
        if capped {
            break;
        }
        betas.push(beta);
        let invb = beta.recip();
        basis.push(w.iter().map(|&x| x * invb).collect());
        b_basis.push(bw.iter().map(|&x| x * invb).collect());
    }

    let st = state.expect("lanczos loop runs at least once");
    let thr = default_zero_threshold::<T>();
    Ok(PencilSpectrum {
        lambda_max: st.theta_max,
        lambda_min_nonzero: st.theta_min,
        kappa: st.theta_max / st.theta_min,
        null_dim_a: opts.deflate.len(),
        null_dim_b: 1,
        zero_threshold: thr,
        converged,
        lambda_max_bracket: (!converged).then_some((st.theta_max, st.theta_max + st.res_max)),
        lambda_min_bracket: (!converged).then_some((st.theta_min - st.res_min, st.theta_min)),
        matvecs,
        eigenvalues: st.values,
    })
}

/// One row of a condition-number table.
#[derive(Debug, Clone)]
pub struct ConditionRow<T> {
    pub n: usize,
    pub levels: usize,
    pub n_tilde: usize,
    pub kappa: T,
}

/// Build graphs of the given sizes, coarsen, expand, and record the
/// preconditioned condition number per size.
pub fn condition_table<T, F, M>(
    sizes: &[usize],
    mut make_graph: F,
    mu_rule: M,
    levels: LevelSpec,
    seed: u64,
) -> Result<Vec<ConditionRow<T>>>
where
    T: Scalar,
    F: FnMut(usize) -> Result<WeightedGraph<T>>,
    M: Fn(usize) -> T,
{
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let g = make_graph(size)?;
        let h = build_hierarchy(&g, levels, seed)?;
        let mu = mu_rule(g.n());
        let p = composite_prolongation(&h, mu)?;
        let l = crate::graph::build_laplacian(&g);
        let sys = expand_laplacian(&l, p)?;
        let spec = expanded_pencil(&sys)?;
        rows.push(ConditionRow {
            n: g.n(),
            levels: h.levels(),
            n_tilde: sys.n_tilde(),
            kappa: spec.kappa,
        });
    }
    Ok(rows)
}
