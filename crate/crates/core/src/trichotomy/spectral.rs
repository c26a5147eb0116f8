//! Adjacency and Laplacian spectra: dense symmetric eigensolver for small
//! graphs, Lanczos with full reorthogonalization above that.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::Graph;

/// Graphs up to this many vertices use the dense eigensolver.
pub const DENSE_LIMIT: usize = 1500;

const TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapKind {
    /// `lambda1 - lambda2` of the adjacency matrix; used for regular graphs.
    Adjacency,
    /// Second-smallest Laplacian eigenvalue; used otherwise.
    Laplacian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGap {
    /// Largest adjacency eigenvalue.
    pub lambda1: f64,
    /// Second-largest adjacency eigenvalue (with multiplicity).
    pub lambda2: f64,
    pub gap: f64,
    pub kind: GapKind,
    pub connected: bool,
    pub solver: Solver,
    /// Largest eigen-residual `|A v - lambda v|` among reported pairs.
    pub residual: f64,
}

/// Sparse symmetric operator given by weighted adjacency lists.
struct Operator {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Operator {
    fn adjacency(g: &Graph) -> Self {
        let mut rows = vec![Vec::new(); g.vertex_count()];
        for &(u, v) in g.edges() {
            if u == v {
                rows[u].push((u, 2.0));
            } else {
                rows[u].push((v, 1.0));
                rows[v].push((u, 1.0));
            }
        }
        Operator { rows }
    }

    /// `shift * I - L` for the Laplacian `L = D - A`; loops cancel.
    fn shifted_laplacian(g: &Graph, shift: f64) -> Self {
        let mut loops = vec![0usize; g.vertex_count()];
        for &(u, v) in g.edges() {
            if u == v {
                loops[u] += 1;
            }
        }
        let mut rows = vec![Vec::new(); g.vertex_count()];
        for (v, row) in rows.iter_mut().enumerate() {
            row.push((v, shift - (g.degree(v) - 2 * loops[v]) as f64));
        }
        for &(u, v) in g.edges() {
            if u != v {
                rows[u].push((v, 1.0));
                rows[v].push((u, 1.0));
            }
        }
        Operator { rows }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(&self.rows) {
            *yi = row.iter().map(|&(j, w)| w * x[j]).sum();
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        let n = self.rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                m[(i, j)] += w;
            }
        }
        m
    }

    fn residual(&self, value: f64, v: &[f64]) -> f64 {
        let mut y = vec![0.0; v.len()];
        self.apply(v, &mut y);
        y.iter().zip(v).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Eigenpairs in descending order of value.
type Pairs = Vec<(f64, Vec<f64>)>;

fn dense_pairs(op: &Operator) -> Pairs {
    let eig = SymmetricEigen::new(op.dense());
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    idx.into_iter()
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // Twice is enough for numerical orthogonality.
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// The `count` largest eigenpairs of `op` restricted to the orthogonal
/// complement of the orthonormal `deflate` vectors.
fn lanczos_top(op: &Operator, deflate: &[Vec<f64>], count: usize, seed: u64) -> Pairs {
    let n = op.rows.len();
    let room = n.saturating_sub(deflate.len());
    if room == 0 || count == 0 {
        return Vec::new();
    }
    let count = count.min(room);
    let max_basis = room.min((60_000_000 / n.max(1)).clamp(count + 20, 3000));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    orthogonalize(&mut q, deflate);
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut next_check = count.max(10);
    loop {
        let m = basis.len();
        op.apply(&basis[m - 1], &mut w);
        let a = dot(&w, &basis[m - 1]);
        alpha.push(a);
        orthogonalize(&mut w, deflate);
        orthogonalize(&mut w, &basis);
        let b = dot(&w, &w).sqrt();
        let exhausted = b < 1e-12 || m >= max_basis;
        if exhausted || m >= next_check {
            next_check = (m + 10).max(m + m / 5);
            let mut values = tridiagonal_eigenvalues(&alpha, &beta);
            values.sort_by(|x, y| y.total_cmp(x));
            values.truncate(count);
            let vectors: Vec<Vec<f64>> = values.iter().map(|&v| tridiagonal_eigenvector(&alpha, &beta, v)).collect();
            let converged = vectors.iter().all(|y| (b * y[m - 1]).abs() < TOLERANCE * 0.1);
            if exhausted || (values.len() == count && converged) {
                return values
                    .iter()
                    .zip(&vectors)
                    .map(|(&value, y)| {
                        let mut v = vec![0.0; n];
                        for (c, qk) in y.iter().zip(&basis) {
                            v.iter_mut().zip(qk).for_each(|(x, q)| *x += c * q);
                        }
                        let norm = dot(&v, &v).sqrt();
                        v.iter_mut().for_each(|x| *x /= norm);
                        (value, v)
                    })
                    .collect();
            }
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (implicit QL with Wilkinson shifts).
fn tridiagonal_eigenvalues(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut d = d.to_vec();
    let mut e: Vec<f64> = e.iter().copied().take(n.saturating_sub(1)).collect();
    e.push(0.0);
    for l in 0..n {
        for _ in 0..100 {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}

/// Unit eigenvector for an eigenvalue of the tridiagonal matrix, by inverse
/// iteration with a tridiagonal solve.
fn tridiagonal_eigenvector(d: &[f64], e: &[f64], value: f64) -> Vec<f64> {
    let n = d.len();
    let shift = value + 1e-10 * (1.0 + value.abs());
    let mut x = vec![1.0; n];
    for _ in 0..3 {
        // Thomas algorithm on (T - shift I) y = x, with tiny-pivot guard.
        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut piv = d[0] - shift;
        if piv.abs() < 1e-300 {
            piv = 1e-300;
        }
        y[0] = x[0] / piv;
        for i in 1..n {
            c[i - 1] = e[i - 1] / piv;
            piv = d[i] - shift - e[i - 1] * c[i - 1];
            if piv.abs() < 1e-300 {
                piv = 1e-300;
            }
            y[i] = (x[i] - e[i - 1] * y[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            y[i] -= c[i] * y[i + 1];
        }
        let norm = dot(&y, &y).sqrt();
        x = y.into_iter().map(|v| v / norm).collect();
    }
    x
}

fn unit_constant(n: usize) -> Vec<f64> {
    vec![1.0 / (n as f64).sqrt(); n]
}

/// Second adjacency eigenvalue and a spectral gap. Regular graphs report
/// `lambda1 - lambda2`; irregular ones the algebraic connectivity.
/// Disconnected graphs report gap 0 with `connected = false`.
pub fn spectral_gap(g: &Graph) -> SpectralGap {
    let n = g.vertex_count();
    let connected = g.is_connected();
    let regular = g.regular_degree();
    let kind = if regular.is_some() {
        GapKind::Adjacency
    } else {
        GapKind::Laplacian
    };
    if n <= 1 {
        let lambda1 = g.edges().len() as f64 * 2.0;
        return SpectralGap {
            lambda1,
            lambda2: lambda1,
            gap: 0.0,
            kind,
            connected,
            solver: Solver::Dense,
            residual: 0.0,
        };
    }
    let adj = Operator::adjacency(g);
    let solver = if n <= DENSE_LIMIT { Solver::Dense } else { Solver::Lanczos };
    let (lambda1, lambda2, mut residual) = match (solver, regular, connected) {
        (Solver::Dense, _, _) => {
            let pairs = dense_pairs(&adj);
            let r = adj.residual(pairs[0].0, &pairs[0].1).max(adj.residual(pairs[1].0, &pairs[1].1));
            (pairs[0].0, pairs[1].0, r)
        }
        (Solver::Lanczos, Some(d), true) => {
            let top = lanczos_top(&adj, &[unit_constant(n)], 1, 1);
            (d as f64, top[0].0, adj.residual(top[0].0, &top[0].1))
        }
        (Solver::Lanczos, _, _) => {
            let top = lanczos_top(&adj, &[], 2, 1);
            let r = adj.residual(top[0].0, &top[0].1).max(adj.residual(top[1].0, &top[1].1));
            (top[0].0, top[1].0, r)
        }
    };
    let gap = if !connected {
        0.0
    } else if regular.is_some() {
        lambda1 - lambda2
    } else {
        let (mu2, r) = algebraic_connectivity(g);
        residual = residual.max(r);
        mu2
    };
    SpectralGap {
        lambda1,
        lambda2,
        gap,
        kind,
        connected,
        solver,
        residual,
    }
}

/// Second-smallest Laplacian eigenvalue and its residual.
fn algebraic_connectivity(g: &Graph) -> (f64, f64) {
    let n = g.vertex_count();
    let shift = 2.0 * g.max_degree() as f64;
    let op = Operator::shifted_laplacian(g, shift);
    let (value, vector) = if n <= DENSE_LIMIT {
        dense_pairs(&op).swap_remove(1)
    } else {
        lanczos_top(&op, &[unit_constant(n)], 1, 2).swap_remove(0)
    };
    (shift - value, op.residual(value, &vector))
}

/// Laplacian eigenvectors 2..=d+1 (smallest first, skipping the bottom one)
/// as an `n x d` row-major embedding.
pub fn laplacian_embedding(g: &Graph, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = g.vertex_count();
    let d = d.min(n.saturating_sub(1));
    if d == 0 {
        return vec![Vec::new(); n];
    }
    let shift = 2.0 * g.max_degree().max(1) as f64;
    let op = Operator::shifted_laplacian(g, shift);
    let vectors: Vec<Vec<f64>> = if n <= DENSE_LIMIT {
        dense_pairs(&op).into_iter().skip(1).take(d).map(|(_, v)| v).collect()
    } else {
        lanczos_top(&op, &[unit_constant(n)], d, seed).into_iter().map(|(_, v)| v).collect()
    };
    (0..n).map(|i| vectors.iter().map(|v| v[i]).collect()).collect()
}
