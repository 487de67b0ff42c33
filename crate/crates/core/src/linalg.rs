//! Small dense linear algebra: symmetric eigenproblems and least squares.
//!
//! Sizes here are tiny (tens to a few hundred unknowns), so plain textbook
//! algorithms are used: implicit QL for tridiagonal matrices and cyclic
//! Jacobi rotations for dense symmetric ones.

use crate::error::{Error, Result};
use crate::scalar::{c, Real};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).fold(T::zero(), |acc, (a, b)| acc + *a * *b))
            .collect()
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn symmetrize(&mut self) {
        let half = c::<T>(0.5);
        for i in 0..self.n {
            for j in i + 1..self.n {
                let avg = half * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for SquareMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples rows `i` and `i + 1`), ascending.
pub fn tridiagonal_eigenvalues<T: Real>(diag: &[T], off: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    assert!(off.len() + 1 >= n, "off-diagonal too short");
    let mut d = diag.to_vec();
    let mut e: Vec<T> = off.iter().copied().take(n - 1).collect();
    e.push(T::zero());
    let eps = T::epsilon();
    let two = c::<T>(2.0);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NonConvergence(
                    "implicit QL did not converge in 60 sweeps".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut cs, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = cs * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                cs = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * cs * b;
                p = s * r;
                d[i + 1] = g + p;
                g = cs * r - b;
            }
            if deflated {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(d)
}

/// Eigen-decomposition of a dense symmetric matrix by cyclic Jacobi rotations.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Eigenvalues, descending.
    pub values: Vec<T>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<T>>,
}

pub fn symmetric_eigen<T: Real>(matrix: &SquareMatrix<T>) -> Result<SymmetricEigen<T>> {
    let n = matrix.dim();
    let mut a = matrix.clone();
    let mut v = SquareMatrix::identity(n);
    let eps = T::epsilon();
    let half = c::<T>(0.5);

    let frob = |a: &SquareMatrix<T>| -> (T, T) {
        let mut off = T::zero();
        let mut all = T::zero();
        for i in 0..n {
            for j in 0..n {
                let x = a[(i, j)] * a[(i, j)];
                all = all + x;
                if i != j {
                    off = off + x;
                }
            }
        }
        (off.sqrt(), all.sqrt())
    };

    let mut converged = n < 2;
    for _sweep in 0..100 {
        let (off, all) = frob(&a);
        if off <= eps * all || off == T::zero() {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if apq.abs() <= eps * eps * (app.abs() + aqq.abs()) {
                    a[(p, q)] = T::zero();
                    a[(q, p)] = T::zero();
                    continue;
                }
                let theta = half * (aqq - app) / apq;
                let t = {
                    let t = (theta.abs() + (theta * theta + T::one()).sqrt()).recip();
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let cs = (t * t + T::one()).sqrt().recip();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = cs * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence(
            "Jacobi eigenvalue iteration did not converge in 100 sweeps".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = order.iter().map(|&j| (0..n).map(|k| v[(k, j)]).collect()).collect();
    Ok(SymmetricEigen { values, vectors })
}

/// Ordinary least squares `min |A x - y|` via Householder QR with column
/// scaling. `rows[i]` is row `i` of `A`. Returns `(x, |A x - y|)`.
pub fn least_squares<T: Real>(rows: &[Vec<T>], y: &[T]) -> Result<(Vec<T>, T)> {
    let m = rows.len();
    if m == 0 {
        return Err(Error::Sampling("empty design matrix".into()));
    }
    let k = rows[0].len();
    if m < k {
        return Err(Error::Sampling(format!(
            "{m} samples cannot determine {k} coefficients"
        )));
    }
    // column-major working copy
    let mut cols: Vec<Vec<T>> = (0..k).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let scale: Vec<T> = cols
        .iter()
        .map(|col| col.iter().fold(T::zero(), |acc, x| acc.max(x.abs())))
        .collect();
    for (col, s) in cols.iter_mut().zip(&scale) {
        if *s == T::zero() {
            return Err(Error::Sampling("design matrix has a zero column".into()));
        }
        for x in col.iter_mut() {
            *x = *x / *s;
        }
    }
    let mut rhs = y.to_vec();
    let mut rdiag = vec![T::zero(); k];
    let tiny = T::epsilon() * c(100.0);
    for j in 0..k {
        let norm = cols[j][j..].iter().fold(T::zero(), |acc, x| acc.hypot(*x));
        if norm <= tiny * c::<T>(m as f64).sqrt() {
            return Err(Error::Sampling("rank-deficient design matrix".into()));
        }
        let alpha = if cols[j][j] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = cols[j][j..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(T::zero(), |acc, x| acc + *x * *x);
        rdiag[j] = alpha;
        let apply = |target: &mut [T]| {
            let dot = v.iter().zip(target.iter()).fold(T::zero(), |acc, (a, b)| acc + *a * *b);
            let f = c::<T>(2.0) * dot / vnorm2;
            for (t, vi) in target.iter_mut().zip(&v) {
                *t = *t - f * *vi;
            }
        };
        for col in cols.iter_mut().skip(j + 1) {
            apply(&mut col[j..]);
        }
        apply(&mut rhs[j..]);
    }
    let mut x = vec![T::zero(); k];
    for j in (0..k).rev() {
        let mut acc = rhs[j];
        for (jj, col) in cols.iter().enumerate().skip(j + 1) {
            acc = acc - col[j] * x[jj];
        }
        x[j] = acc / rdiag[j];
    }
    let resid = rhs[k..].iter().fold(T::zero(), |acc, r| acc.hypot(*r));
    for (xj, s) in x.iter_mut().zip(&scale) {
        *xj = *xj / *s;
    }
    Ok((x, resid))
}
