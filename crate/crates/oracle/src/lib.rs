//! Self-contained dense f64 reference routines used as independent oracles
//! in tests: a cyclic Jacobi eigensolver, pseudoinverse and least-squares
//! solves built on it, all-pairs resistance shortest paths, and seeded
//! random connected graphs. Nothing here shares code with the library under
//! test.

#![allow(clippy::needless_range_loop)]

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(n: usize, m: usize) -> Mat {
    vec![vec![0.0; m]; n]
}

pub fn identity(n: usize) -> Mat {
    let mut a = zeros(n, n);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    a
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut c = zeros(n, m);
    for i in 0..n {
        for t in 0..k {
            let ait = a[i][t];
            if ait == 0.0 {
                continue;
            }
            for j in 0..m {
                c[i][j] += ait * b[t][j];
            }
        }
    }
    c
}

pub fn mat_t(a: &Mat) -> Mat {
    let (n, m) = (a.len(), a[0].len());
    let mut t = zeros(m, n);
    for i in 0..n {
        for j in 0..m {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn mat_vec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

pub fn vec_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn vec_norm(a: &[f64]) -> f64 {
    vec_dot(a, a).sqrt()
}

/// Dense Laplacian of an edge list.
pub fn laplacian_dense(n: usize, edges: &[(usize, usize, f64)]) -> Mat {
    let mut l = zeros(n, n);
    for &(u, v, w) in edges {
        l[u][v] -= w;
        l[v][u] -= w;
        l[u][u] += w;
        l[v][v] += w;
    }
    l
}

/// Dense incidence matrix (rows = edges, +1 at u, -1 at v) and diagonal
/// weight matrix.
pub fn incidence_dense(n: usize, edges: &[(usize, usize, f64)]) -> (Mat, Mat) {
    let m = edges.len();
    let mut b = zeros(m, n);
    let mut w = zeros(m, m);
    for (row, &(u, v, wt)) in edges.iter().enumerate() {
        b[row][u] = 1.0;
        b[row][v] = -1.0;
        w[row][row] = wt;
    }
    (b, w)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending and eigenvectors as matrix columns.
pub fn jacobi_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.len();
    let mut m = a.clone();
    let mut v = identity(n);
    if n <= 1 {
        return (m.iter().map(|r| r[0]).collect(), v);
    }
    let frob: f64 = m
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    let tol = 1e-15 * frob.max(1e-300);
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[p][q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].partial_cmp(&m[j][j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[i][i]).collect();
    let mut vectors = zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r][new_col] = v[r][old_col];
        }
    }
    (values, vectors)
}

/// Moore-Penrose pseudoinverse of a symmetric matrix with a relative rank
/// cutoff.
pub fn pinv_sym(a: &Mat, rel_tol: f64) -> Mat {
    let n = a.len();
    let (vals, vecs) = jacobi_eigen(a);
    let vmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = zeros(n, n);
    for k in 0..n {
        if vals[k].abs() <= rel_tol * vmax {
            continue;
        }
        let inv = 1.0 / vals[k];
        for i in 0..n {
            let vik = vecs[i][k];
            if vik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += inv * vik * vecs[j][k];
            }
        }
    }
    out
}

/// Minimum-norm least-squares solution of a symmetric system A x = b.
pub fn min_norm_solve_sym(a: &Mat, b: &[f64], rel_tol: f64) -> Vec<f64> {
    mat_vec(&pinv_sym(a, rel_tol), b)
}

/// Nonzero eigenvalues of pinv(B) * A for symmetric A, B via the symmetric
/// product B^{+1/2} A B^{+1/2}.
pub fn pencil_eigenvalues_pinv(a: &Mat, b: &Mat, rel_tol: f64) -> Vec<f64> {
    let n = b.len();
    let (vals, vecs) = jacobi_eigen(b);
    let vmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // B^{+1/2}
    let mut half = zeros(n, n);
    for k in 0..n {
        if vals[k].abs() <= rel_tol * vmax || vals[k] <= 0.0 {
            continue;
        }
        let inv = 1.0 / vals[k].sqrt();
        for i in 0..n {
            let vik = vecs[i][k];
            if vik == 0.0 {
                continue;
            }
            for j in 0..n {
                half[i][j] += inv * vik * vecs[j][k];
            }
        }
    }
    let t = mat_mul(&mat_mul(&half, a), &half);
    let (tv, _) = jacobi_eigen(&t);
    tv
}

/// All-pairs shortest path lengths with edge length 1/weight
/// (Floyd-Warshall).
pub fn resistance_distances(n: usize, edges: &[(usize, usize, f64)]) -> Mat {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v, w) in edges {
        let len = 1.0 / w;
        if len < d[u][v] {
            d[u][v] = len;
            d[v][u] = len;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            if !dik.is_finite() {
                continue;
            }
            for j in 0..n {
                let cand = dik + d[k][j];
                if cand < d[i][j] {
                    d[i][j] = cand;
                }
            }
        }
    }
    d
}

/// Tiny deterministic PRNG (splitmix64) so the oracle stays dependency-free.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn next_range(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Random connected graph: a random spanning tree plus `extra` distinct
/// chords, weights uniform in [0.5, 2.0).
pub fn random_connected_graph(n: usize, extra: usize, seed: u64) -> Vec<(usize, usize, f64)> {
    let mut rng = SplitMix64(seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1));
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.next_range(i + 1);
        perm.swap(i, j);
    }
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut present = std::collections::HashSet::new();
    for i in 1..n {
        let u = perm[i];
        let v = perm[rng.next_range(i)];
        let (a, b) = (u.min(v), u.max(v));
        present.insert((a, b));
        edges.push((a, b, 0.5 + 1.5 * rng.next_f64()));
    }
    let mut attempts = 0;
    let mut added = 0;
    while added < extra && attempts < 50 * (extra + 1) {
        attempts += 1;
        let u = rng.next_range(n);
        let v = rng.next_range(n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if present.insert(key) {
            edges.push((key.0, key.1, 0.5 + 1.5 * rng.next_f64()));
            added += 1;
        }
    }
    edges
}
