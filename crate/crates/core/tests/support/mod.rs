//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns the
/// eigenvalues in ascending order and the matching eigenvectors as columns.
pub fn jacobi_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let vals = order.iter().map(|&i| a[(i, i)]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (vals, vecs)
}

/// `U diag(f(λ)) Uᵀ` through the Jacobi oracle.
pub fn spectral_map(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (vals, u) = jacobi_eigen(m);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|&l| f(l))));
    &u * d * u.transpose()
}

pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    let (vals, _) = jacobi_eigen(m);
    vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    jacobi_eigen(m).0[0]
}

pub fn max_eig(m: &DMatrix<f64>) -> f64 {
    *jacobi_eigen(m).0.last().unwrap()
}

/// Eigenvalue clipping from below at `gamma`.
pub fn threshold(m: &DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    spectral_map(m, |l| l.max(0.0).max(gamma))
}

/// `(max(λ, γ))^{-1/2}` map of a PSD matrix.
pub fn inverse_sqrt_thresholded(m: &DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    spectral_map(m, |l| 1.0 / l.max(0.0).max(gamma).sqrt())
}

/// Pairwise mean `Σ_{i<j} ⟨A x_i y_i, A x_j y_j⟩ / C(n,2)` by direct double sum.
pub fn naive_pairwise(xs: &[DVector<f64>], ys: &[f64], map: &DMatrix<f64>) -> f64 {
    let v: Vec<DVector<f64>> = xs.iter().zip(ys).map(|(x, y)| map * x * *y).collect();
    let mut total = 0.0;
    let mut pairs = 0u64;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            total += v[i].dot(&v[j]);
            pairs += 1;
        }
    }
    total / pairs as f64
}

/// Sample mean and standard error.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
