//! Small dense real kernels shared by the eigensolver and the SDP engine.
//!
//! Matrices are square, row-major `Vec<f64>` buffers. Nothing here is tuned
//! for large sizes; the engine works on blocks of a few dozen rows at most.

use crate::error::{Error, Result};

/// `c = a * b` for square `n x n` row-major matrices.
pub(crate) fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        let out = &mut c[i * n..(i + 1) * n];
        for (k, &aik) in row.iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            for (o, &bkj) in out.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    c
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Replace `a` by `(a + a^T) / 2`.
pub(crate) fn symmetrize(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
}

/// Lower Cholesky factor, `None` when the matrix is not numerically positive definite.
pub(crate) fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Some(l)
}

/// Solve `L L^T x = b` given the lower factor.
pub(crate) fn chol_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    y
}

/// Inverse of an SPD matrix from its lower Cholesky factor.
pub(crate) fn chol_inverse(l: &[f64], n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = chol_solve(l, n, &e);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    symmetrize(&mut inv, n);
    inv
}

/// `L^{-1} A L^{-T}` for lower-triangular `L`.
pub(crate) fn congruence_by_inverse(l: &[f64], a: &[f64], n: usize) -> Vec<f64> {
    // Solve L W = A column by column, then L V^T = W^T.
    let forward = |rhs: &mut [f64]| {
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= l[i * n + k] * rhs[k];
            }
            rhs[i] = s / l[i * n + i];
        }
    };
    let mut w = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = a[i * n + j];
        }
        forward(&mut col);
        for i in 0..n {
            w[i * n + j] = col[i];
        }
    }
    // V = W L^{-T}  <=>  V^T = L^{-1} W^T
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        col.copy_from_slice(&w[i * n..(i + 1) * n]);
        forward(&mut col);
        for j in 0..n {
            v[i * n + j] = col[j];
        }
    }
    symmetrize(&mut v, n);
    v
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix.
///
/// `d` holds the diagonal and `e[i]` the coupling between rows `i` and `i+1`
/// (`e[n-1]` is ignored). On return `d` holds the eigenvalues in ascending
/// order and the columns of `z` (row-major `n x n`, initialised by the caller,
/// usually to the identity) have been rotated accordingly.
pub(crate) fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let max_iter = 30 * n.max(1);
    let mut iterations = 0usize;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                iterations += 1;
                if iterations > max_iter {
                    return Err(Error::ConvergenceFailure { iterations: max_iter });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zh = z[k * n + i + 1];
                        let zi = z[k * n + i];
                        z[k * n + i + 1] = s * zi + c * zh;
                        z[k * n + i] = c * zi - s * zh;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort keeps the column permutation cheap to apply.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().take(n).skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d.swap(i, k);
            for row in 0..n {
                z.swap(row * n + i, row * n + k);
            }
        }
    }
    Ok(())
}

/// Eigen-decomposition of a real symmetric matrix: ascending eigenvalues and
/// the eigenvectors as the columns of a row-major matrix.
pub(crate) fn sym_eigen(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut h = a.to_vec();
    let mut q = identity(n);
    // Householder reduction to tridiagonal form, accumulating Q with A = Q T Q^T.
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = ((k + 1)..n).map(|i| h[i * n + k].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1) * n + k];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        for i in (k + 1)..n {
            v[i] = h[i * n + k];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        let p: Vec<f64> = (0..n)
            .map(|i| beta * (0..n).map(|j| h[i * n + j] * v[j]).sum::<f64>())
            .collect();
        let kk = 0.5 * beta * dot(&v, &p);
        let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kk * vi).collect();
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] -= v[i] * w[j] + w[i] * v[j];
            }
        }
        let qv: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q[i * n + j] * v[j]).sum()).collect();
        for i in 0..n {
            for j in 0..n {
                q[i * n + j] -= beta * qv[i] * v[j];
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| h[i * n + i]).collect();
    let mut e: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n { h[(i + 1) * n + i] } else { 0.0 })
        .collect();
    let mut z = identity(n);
    tridiagonal_ql(&mut d, &mut e, &mut z, n)?;
    Ok((d, matmul(&q, &z, n)))
}

pub(crate) fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}
