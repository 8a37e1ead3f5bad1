//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Columns are visited in reverse Cuthill-McKee order of the symmetrized
//! pattern; within a column the diagonal candidate is kept as pivot unless it
//! is smaller than `PIVOT_THRESHOLD` times the largest candidate.

use std::collections::VecDeque;

use super::SparseMatrix;
use crate::error::{Error, Result};

const PIVOT_THRESHOLD: f64 = 0.1;

/// Factorization `P A Q = L U`, reusable across many right-hand sides.
#[derive(Clone, Debug)]
pub struct SparseLu {
    n: usize,
    // L: unit lower triangular by columns, diagonal stored first.
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    // U: upper triangular by columns, diagonal stored last.
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    /// original row -> pivot position
    pinv: Vec<usize>,
    /// pivot position -> original column
    q: Vec<usize>,
}

impl SparseLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("LU of {}x{} matrix", a.n_rows(), a.n_cols())));
        }
        let n = a.n_rows();
        let csc = a.transpose(); // rows of Aᵀ are columns of A
        let q = rcm_order(a, &csc);

        const NONE: usize = usize::MAX;
        let mut pinv = vec![NONE; n];
        let mut l_ptr = Vec::with_capacity(n + 1);
        let mut l_idx = Vec::with_capacity(4 * a.nnz());
        let mut l_val = Vec::with_capacity(4 * a.nnz());
        let mut u_ptr = Vec::with_capacity(n + 1);
        let mut u_idx = Vec::with_capacity(4 * a.nnz());
        let mut u_val = Vec::with_capacity(4 * a.nnz());

        let mut x = vec![0.0; n];
        let mut xi = vec![0usize; n];
        let mut stack = vec![0usize; n];
        let mut pstack = vec![0usize; n];
        let mut mark = vec![NONE; n];

        for k in 0..n {
            l_ptr.push(l_idx.len());
            u_ptr.push(u_idx.len());
            let col = q[k];
            let (b_idx, b_val) = csc.row(col);

            // reach: nonzero pattern of L \ A(:, col), topologically ordered in xi[top..]
            let mut top = n;
            for &start in b_idx {
                if mark[start] == k {
                    continue;
                }
                let mut head = 0usize;
                stack[0] = start;
                while let Some(&j) = stack.get(head) {
                    let jnew = pinv[j];
                    if mark[j] != k {
                        mark[j] = k;
                        pstack[head] = if jnew == NONE { 0 } else { l_ptr[jnew] + 1 };
                    }
                    let end = if jnew == NONE { 0 } else { l_ptr[jnew + 1] };
                    let mut done = true;
                    let mut p = pstack[head];
                    while p < end {
                        let i = l_idx[p];
                        p += 1;
                        if mark[i] == k {
                            continue;
                        }
                        pstack[head] = p;
                        head += 1;
                        stack[head] = i;
                        done = false;
                        break;
                    }
                    if done {
                        top -= 1;
                        xi[top] = j;
                        if head == 0 {
                            break;
                        }
                        head -= 1;
                    }
                }
            }

            for &i in &xi[top..n] {
                x[i] = 0.0;
            }
            for (&i, &v) in b_idx.iter().zip(b_val) {
                x[i] = v;
            }
            for &j in &xi[top..n] {
                let jnew = pinv[j];
                if jnew == NONE {
                    continue;
                }
                let xj = x[j];
                for p in l_ptr[jnew] + 1..l_ptr[jnew + 1] {
                    x[l_idx[p]] -= l_val[p] * xj;
                }
            }

            let mut ipiv = NONE;
            let mut amax = -1.0;
            for &i in &xi[top..n] {
                if pinv[i] == NONE {
                    let t = x[i].abs();
                    if t > amax {
                        amax = t;
                        ipiv = i;
                    }
                } else {
                    u_idx.push(pinv[i]);
                    u_val.push(x[i]);
                }
            }
            if ipiv == NONE || amax <= 0.0 || !amax.is_finite() {
                return Err(Error::Singular(k));
            }
            if pinv[col] == NONE && mark[col] == k && x[col].abs() >= amax * PIVOT_THRESHOLD {
                ipiv = col;
            }
            let pivot = x[ipiv];
            u_idx.push(k);
            u_val.push(pivot);
            pinv[ipiv] = k;
            l_idx.push(ipiv);
            l_val.push(1.0);
            for &i in &xi[top..n] {
                if pinv[i] == NONE {
                    l_idx.push(i);
                    l_val.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
        }
        l_ptr.push(l_idx.len());
        u_ptr.push(u_idx.len());
        for i in l_idx.iter_mut() {
            *i = pinv[*i];
        }
        Ok(SparseLu { n, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val, pinv, q })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries in `L + U`.
    pub fn fill(&self) -> usize {
        self.l_idx.len() + self.u_idx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "LU solve: rhs length");
        let mut y = vec![0.0; self.n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.pinv[i]] = bi;
        }
        for j in 0..self.n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                    y[self.l_idx[p]] -= self.l_val[p] * yj;
                }
            }
        }
        for j in (0..self.n).rev() {
            let last = self.u_ptr[j + 1] - 1;
            y[j] /= self.u_val[last];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.u_ptr[j]..last {
                    y[self.u_idx[p]] -= self.u_val[p] * yj;
                }
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &col) in self.q.iter().enumerate() {
            x[col] = y[k];
        }
        x
    }
}

/// Reverse Cuthill-McKee ordering of the pattern of `A + Aᵀ`.
fn rcm_order(a: &SparseMatrix, at: &SparseMatrix) -> Vec<usize> {
    let n = a.n_rows();
    let mut adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut nb: Vec<usize> = a.row(i).0.iter().chain(at.row(i).0).copied().filter(|&j| j != i).collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    for nb in adj.iter_mut() {
        nb.sort_by_key(|&j| (degree[j], j));
    }

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>]) -> usize {
    let mut current = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let (far, depth) = bfs_farthest(current, adj);
        if depth <= ecc {
            break;
        }
        ecc = depth;
        current = far;
    }
    current
}

fn bfs_farthest(start: usize, adj: &[Vec<usize>]) -> (usize, usize) {
    let mut level = std::collections::HashMap::new();
    level.insert(start, 0usize);
    let mut queue = VecDeque::from([start]);
    let mut best = (start, 0usize);
    while let Some(v) = queue.pop_front() {
        let d = level[&v];
        if d > best.1 || (d == best.1 && adj[v].len() < adj[best.0].len()) {
            best = (v, d);
        }
        for &w in &adj[v] {
            if !level.contains_key(&w) {
                level.insert(w, d + 1);
                queue.push_back(w);
            }
        }
    }
    best
}
