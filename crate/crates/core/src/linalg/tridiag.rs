//! Dense symmetric eigensolver for a few extremal eigenpairs: Householder
//! tridiagonalization, Sturm-sequence bisection and inverse iteration.
//!
//! Matrices are row-major `n * n` slices.

/// Householder reduction `C = Q T Qᵀ` of a symmetric matrix.
pub(crate) struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    // reflector k acts on indices k+1..n
    reflectors: Vec<(f64, Vec<f64>)>,
}

impl Tridiagonal {
    /// Reduces `c` in place; only the lower triangle is read.
    pub fn reduce(c: &mut [f64], n: usize) -> Self {
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        let mut p = vec![0.0; n];
        for k in 0..n.saturating_sub(1) {
            diag[k] = c[k * n + k];
            let r = n - k - 1;
            let mut v: Vec<f64> = (k + 1..n).map(|i| c[i * n + k]).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r == 1 || norm == 0.0 {
                off[k] = v[0];
                if r > 1 {
                    reflectors.push((0.0, v));
                }
                continue;
            }
            let alpha = if v[0] > 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            let beta = 2.0 / vtv;
            off[k] = alpha;

            // p = beta * S v with S the trailing block (lower triangle only)
            let s0 = k + 1;
            let p = &mut p[..r];
            p.iter_mut().for_each(|x| *x = 0.0);
            for a in 0..r {
                let row = &c[(s0 + a) * n + s0..(s0 + a) * n + s0 + a + 1];
                let va = v[a];
                let mut acc = 0.0;
                for b in 0..a {
                    acc += row[b] * v[b];
                    p[b] += row[b] * va;
                }
                p[a] += acc + row[a] * va;
            }
            p.iter_mut().for_each(|x| *x *= beta);
            let kk = 0.5 * beta * p.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
            for (pa, va) in p.iter_mut().zip(&v) {
                *pa -= kk * va;
            }
            // S -= v wᵀ + w vᵀ on the lower triangle
            for a in 0..r {
                let (va, wa) = (v[a], p[a]);
                let row = &mut c[(s0 + a) * n + s0..(s0 + a) * n + s0 + a + 1];
                for b in 0..=a {
                    row[b] -= va * p[b] + wa * v[b];
                }
            }
            reflectors.push((beta, v));
        }
        if n > 0 {
            diag[n - 1] = c[(n - 1) * n + n - 1];
        }
        Tridiagonal { diag, off, reflectors }
    }

    /// Maps an eigenvector of `T` back to one of `C`.
    pub fn back_transform(&self, z: &mut [f64]) {
        for (k, (beta, v)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let tail = &mut z[k + 1..];
            let s = beta * tail.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
            for (x, y) in tail.iter_mut().zip(v) {
                *x -= s * y;
            }
        }
    }

    pub fn norm(&self) -> f64 {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues strictly below `x`.
    fn sturm_count(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.diag.len() {
            if i > 0 {
                q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            }
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `m` smallest eigenvalues, ascending, by bisection.
    pub fn smallest_eigenvalues(&self, m: usize) -> Vec<f64> {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let tnorm = self.norm().max(f64::MIN_POSITIVE);
        let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * tnorm * tnorm);
        let atol = 2.0 * f64::EPSILON * tnorm;
        lo -= atol;
        hi += atol;
        (0..m)
            .map(|k| {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if b - a <= atol.max(2.0 * f64::EPSILON * (a.abs().max(b.abs()))) {
                        break;
                    }
                    if self.sturm_count(mid, pivmin) > k {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }

    /// Eigenvectors of `T` for the given ascending eigenvalues, by inverse
    /// iteration with reorthogonalization inside clusters.
    pub fn eigenvectors(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let n = self.diag.len();
        let tnorm = self.norm().max(f64::MIN_POSITIVE);
        let ortol = 1e-3 * tnorm;
        let sep = 10.0 * f64::EPSILON * tnorm;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut shifts: Vec<f64> = Vec::with_capacity(values.len());
        for (j, &lam) in values.iter().enumerate() {
            let mut shift = lam;
            if let Some(&prev) = shifts.last() {
                if shift - prev < sep {
                    shift = prev + sep;
                }
            }
            shifts.push(shift);
            let cluster: Vec<usize> = (0..j).filter(|&i| (values[i] - lam).abs() <= ortol).collect();
            let lu = TriLu::factor(&self.diag, &self.off, shift, f64::EPSILON * tnorm);
            let mut x: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * (((i + 7 * j) as f64 + 1.0) * 0.754_877_666_246_692_8).fract())
                .collect();
            for _ in 0..5 {
                x = lu.solve(x);
                for _ in 0..2 {
                    for &i in &cluster {
                        let s: f64 = x.iter().zip(&out[i]).map(|(a, b)| a * b).sum();
                        x.iter_mut().zip(&out[i]).for_each(|(a, b)| *a -= s * b);
                    }
                }
                let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if nx == 0.0 || !nx.is_finite() {
                    x = vec![0.0; n];
                    x[j % n] = 1.0;
                    continue;
                }
                x.iter_mut().for_each(|v| *v /= nx);
            }
            out.push(x);
        }
        out
    }
}

/// Gaussian elimination with partial pivoting of `T − shift·I`.
struct TriLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    l: Vec<f64>,
    swap: Vec<bool>,
}

impl TriLu {
    fn factor(d: &[f64], e: &[f64], shift: f64, pert: f64) -> Self {
        let n = d.len();
        let mut u0: Vec<f64> = d.iter().map(|v| v - shift).collect();
        let mut u1: Vec<f64> = e.to_vec();
        let mut u2 = vec![0.0; n.saturating_sub(1)];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            let sub = e[i];
            if u0[i].abs() >= sub.abs() {
                if u0[i] == 0.0 {
                    u0[i] = pert;
                }
                let m = sub / u0[i];
                l[i] = m;
                u0[i + 1] -= m * u1[i];
            } else {
                let m = u0[i] / sub;
                l[i] = m;
                swap[i] = true;
                let r1 = u1[i];
                u0[i] = sub;
                u1[i] = u0[i + 1];
                u2[i] = if i + 1 < n - 1 { u1[i + 1] } else { 0.0 };
                u0[i + 1] = r1 - m * u1[i];
                if i + 1 < n - 1 {
                    u1[i + 1] = -m * u2[i];
                }
            }
        }
        if n > 0 && u0[n - 1] == 0.0 {
            u0[n - 1] = pert;
        }
        TriLu { u0, u1, u2, l, swap }
    }

    fn solve(&self, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.l[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.u1[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * b[i + 2];
            }
            b[i] = s / self.u0[i];
        }
        b
    }
}
