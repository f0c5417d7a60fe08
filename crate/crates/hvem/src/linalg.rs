//! Sparse symmetric linear algebra at desk scale: CSR storage, reverse
//! Cuthill-McKee ordering, an envelope Cholesky factorization and the
//! eigenvalue estimators behind the condition-number reports.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Triplet accumulator; duplicate entries are summed on conversion.
#[derive(Debug, Clone)]
pub struct CooMatrix {
    pub n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn new(n: usize) -> Self {
        CooMatrix {
            n,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut sorted = self.entries.clone();
        sorted.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in &sorted {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n: self.n,
            row_ptr,
            cols,
            vals,
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    #[allow(clippy::needless_range_loop)]
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[i] = acc;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.cols[lo..hi].binary_search(&j) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] = self.vals[k];
            }
        }
        m
    }

    /// max_ij |A_ij - A_ji|.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                worst = worst.max((self.vals[k] - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn rel_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.n];
        self.matvec(x, &mut ax);
        let num: f64 = ax
            .iter()
            .zip(b)
            .map(|(a, bb)| (a - bb) * (a - bb))
            .sum::<f64>()
            .sqrt();
        let den: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }
}

/// Reverse Cuthill-McKee ordering; `order[k]` is the old index placed at
/// position k. Reduces the envelope the Cholesky factor works on.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree = |i: usize| a.row_ptr[i + 1] - a.row_ptr[i];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        // lowest-degree unvisited node seeds the next component
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| degree(i));
        let Some(start) = start else { break };
        visited[start] = true;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            let mut nbrs: Vec<usize> = (a.row_ptr[i]..a.row_ptr[i + 1])
                .map(|k| a.cols[k])
                .filter(|&j| !visited[j])
                .collect();
            nbrs.sort_unstable_by_key(|&j| degree(j));
            for j in nbrs {
                if !visited[j] {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Envelope (profile) Cholesky factorization of an SPD matrix, with RCM
/// preordering. Fill stays inside the envelope, so each factor row is a
/// short dense slice.
pub struct EnvelopeCholesky {
    n: usize,
    /// order[k] = old index at permuted position k
    order: Vec<usize>,
    first: Vec<usize>,
    /// rows[i] covers columns first[i]..=i of the factor
    rows: Vec<Vec<f64>>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let order = reverse_cuthill_mckee(a);
        let mut iperm = vec![0usize; n];
        for (k, &old) in order.iter().enumerate() {
            iperm[old] = k;
        }
        // first nonzero column of each permuted row (lower part)
        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            let pi = iperm[i];
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let pj = iperm[a.cols[k]];
                if pj < first[pi] {
                    first[pi] = pj;
                }
            }
        }
        let mut rows: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; i - first[i] + 1]).collect();
        for i in 0..n {
            let pi = iperm[i];
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let pj = iperm[a.cols[k]];
                if pj <= pi {
                    rows[pi][pj - first[pi]] = a.vals[k];
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let s = fi.max(fj);
                let mut sum = 0.0;
                for k in s..j {
                    sum += rows[i][k - fi] * rows[j][k - fj];
                }
                let ljj = rows[j][j - fj];
                rows[i][j - fi] = (rows[i][j - fi] - sum) / ljj;
            }
            let mut sum = 0.0;
            for k in fi..i {
                sum += rows[i][k - fi] * rows[i][k - fi];
            }
            let d = rows[i][i - fi] - sum;
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::Numerical(format!(
                    "matrix is not positive definite (pivot {d:.3e} at row {i})"
                )));
            }
            rows[i][i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky {
            n,
            order,
            first,
            rows,
        })
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // permuted rhs
        let mut y: Vec<f64> = (0..n).map(|k| b[self.order[k]]).collect();
        // forward substitution L y = b
        for i in 0..n {
            let fi = self.first[i];
            let mut acc = y[i];
            for k in fi..i {
                acc -= self.rows[i][k - fi] * y[k];
            }
            y[i] = acc / self.rows[i][i - fi];
        }
        // backward substitution L^T x = y, column oriented
        for j in (0..n).rev() {
            let fj = self.first[j];
            y[j] /= self.rows[j][j - fj];
            let xj = y[j];
            for k in fj..j {
                y[k] -= self.rows[j][k - fj] * xj;
            }
        }
        let mut x = vec![0.0; n];
        for k in 0..n {
            x[self.order[k]] = y[k];
        }
        x
    }
}

/// All eigenvalues of a symmetric matrix, ascending (dense path).
pub fn sym_eigenvalues_dense(a: &CsrMatrix) -> Vec<f64> {
    let eig = a.to_dense().symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

fn project_out(v: &mut [f64], dir: &[f64]) {
    let dot: f64 = v.iter().zip(dir).map(|(a, b)| a * b).sum();
    let nrm2: f64 = dir.iter().map(|x| x * x).sum();
    if nrm2 > 0.0 {
        for (a, b) in v.iter_mut().zip(dir) {
            *a -= dot / nrm2 * b;
        }
    }
}

/// Outcome of an iterative eigenvalue estimate.
#[derive(Debug, Clone, Copy)]
pub struct EigEstimate {
    pub value: f64,
    pub converged: bool,
    /// Relative change of the estimate over the final iteration.
    pub achieved_tol: f64,
}

/// Largest eigenvalue by power iteration, optionally restricted to the
/// orthogonal complement of `deflate`.
pub fn lambda_max_power(
    a: &CsrMatrix,
    deflate: Option<&[f64]>,
    tol: f64,
    max_iters: usize,
) -> EigEstimate {
    let n = a.n;
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 % 7.0) / 7.0).collect();
    if let Some(d) = deflate {
        project_out(&mut v, d);
    }
    normalize(&mut v);
    let mut lambda = 0.0;
    let mut change = f64::INFINITY;
    let mut av = vec![0.0; n];
    for _ in 0..max_iters {
        a.matvec(&v, &mut av);
        if let Some(d) = deflate {
            project_out(&mut av, d);
        }
        let new_lambda: f64 = v.iter().zip(&av).map(|(x, y)| x * y).sum();
        std::mem::swap(&mut v, &mut av);
        if normalize(&mut v) == 0.0 {
            return EigEstimate {
                value: 0.0,
                converged: true,
                achieved_tol: 0.0,
            };
        }
        change = (new_lambda - lambda).abs() / new_lambda.abs().max(1e-300);
        lambda = new_lambda;
        if change <= tol {
            return EigEstimate {
                value: lambda,
                converged: true,
                achieved_tol: change,
            };
        }
    }
    EigEstimate {
        value: lambda,
        converged: false,
        achieved_tol: change,
    }
}

/// Smallest eigenvalue by inverse iteration with a ready factorization,
/// optionally deflating a known kernel direction.
pub fn lambda_min_inverse(
    a: &CsrMatrix,
    chol: &EnvelopeCholesky,
    deflate: Option<&[f64]>,
    tol: f64,
    max_iters: usize,
) -> EigEstimate {
    let n = a.n;
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 - (i as f64 % 5.0) / 11.0).collect();
    if let Some(d) = deflate {
        project_out(&mut v, d);
    }
    normalize(&mut v);
    let mut lambda = 0.0;
    let mut change = f64::INFINITY;
    let mut av = vec![0.0; n];
    for _ in 0..max_iters {
        let mut w = chol.solve(&v);
        if let Some(d) = deflate {
            project_out(&mut w, d);
        }
        normalize(&mut w);
        a.matvec(&w, &mut av);
        let new_lambda: f64 = w.iter().zip(&av).map(|(x, y)| x * y).sum();
        v = w;
        change = (new_lambda - lambda).abs() / new_lambda.abs().max(1e-300);
        lambda = new_lambda;
        if change <= tol {
            return EigEstimate {
                value: lambda,
                converged: true,
                achieved_tol: change,
            };
        }
    }
    EigEstimate {
        value: lambda,
        converged: false,
        achieved_tol: change,
    }
}
