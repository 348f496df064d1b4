//! Small dense linear algebra used by the solver and the RIP estimator.

use crate::model::SenseMatrix;

/// `out = A x`.
pub fn matvec(a: &SenseMatrix, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(x.len(), a.cols());
    debug_assert_eq!(out.len(), a.rows());
    for (i, o) in out.iter_mut().enumerate() {
        *o = dot(a.row(i), x);
    }
}

/// `out = A^T u`.
pub fn matvec_t(a: &SenseMatrix, u: &[f64], out: &mut [f64]) {
    debug_assert_eq!(u.len(), a.rows());
    debug_assert_eq!(out.len(), a.cols());
    out.iter_mut().for_each(|o| *o = 0.0);
    for (i, &ui) in u.iter().enumerate() {
        if ui == 0.0 {
            continue;
        }
        for (o, &aij) in out.iter_mut().zip(a.row(i)) {
            *o += aij * ui;
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest singular value of `A` by power iteration on `A^T A`.
///
/// The start vector is fixed (a deterministic low-discrepancy sequence) so
/// the estimate is reproducible.
pub fn operator_norm(a: &SenseMatrix, iterations: usize) -> f64 {
    let n = a.cols();
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    let mut av = vec![0.0; a.rows()];
    let mut w = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let nv = dot(&v, &v).sqrt();
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        matvec(a, &v, &mut av);
        estimate = dot(&av, &av).sqrt();
        matvec_t(a, &av, &mut w);
        std::mem::swap(&mut v, &mut w);
    }
    estimate
}

/// Cholesky factor `L` (row-major, lower) of a symmetric `n x n` matrix.
///
/// Fails when a pivot drops below `rel_tol` times the largest diagonal entry,
/// which the solver reads as "not numerically full rank".
pub fn cholesky(g: &[f64], n: usize, rel_tol: f64) -> Option<Vec<f64>> {
    let max_diag = (0..n).map(|i| g[i * n + i]).fold(0.0_f64, f64::max);
    if max_diag <= 0.0 {
        return None;
    }
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = g[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= rel_tol * max_diag {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = g[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Some(l)
}

/// Solves `L L^T x = b` in place.
pub fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// `A A^T` for a row-major `m x n` matrix.
pub fn gram_rows(a: &SenseMatrix) -> Vec<f64> {
    let m = a.rows();
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let v = dot(a.row(i), a.row(j));
            g[i * m + j] = v;
            g[j * m + i] = v;
        }
    }
    g
}

/// Singular values (descending) and matching left singular vectors.
#[derive(Clone, Debug)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    pub left: Vec<Vec<f64>>,
}

/// One-sided Jacobi SVD of a row-major `rows x cols` matrix.
///
/// Columns are rotated pairwise until mutually orthogonal; their norms are
/// then the singular values and the normalised columns the left vectors.
/// Accurate to a few ulps relative to the largest singular value.
pub fn jacobi_svd(data: &[f64], rows: usize, cols: usize) -> Svd {
    debug_assert_eq!(data.len(), rows * cols);
    let mut c: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..rows).map(|i| data[i * cols + j]).collect())
        .collect();
    const EPS: f64 = 1e-15;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&c[p], &c[p]);
                let beta = dot(&c[q], &c[q]);
                let gamma = dot(&c[p], &c[q]);
                if gamma == 0.0 || gamma.abs() <= EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let (left, right) = c.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = cs * a - sn * b;
                    *y = sn * a + cs * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = c
        .into_iter()
        .map(|col| {
            let n = dot(&col, &col).sqrt();
            let u = if n > 0.0 { col.iter().map(|v| v / n).collect() } else { col };
            (n, u)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (singular_values, left) = pairs.into_iter().unzip();
    Svd {
        singular_values,
        left,
    }
}
