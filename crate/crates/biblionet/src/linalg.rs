//! Dense symmetric eigen-decomposition by cyclic Jacobi rotations.
//!
//! The matrices in this crate are small (citation environments rarely
//! exceed 30 journals), so a plain Jacobi sweep is accurate and fast
//! enough; no external LAPACK binding is pulled in.

/// Row-major dense matrix as nested vectors.
pub type Matrix = Vec<Vec<f64>>;

/// Eigenvalues and eigenvectors of a symmetric matrix, sorted by
/// descending eigenvalue. `vectors[k]` is the unit eigenvector for
/// `values[k]`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += a[i][j] * a[i][j];
        }
    }
    (2.0 * s).sqrt()
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius norm drops below 1e-13
/// (relative to the matrix norm) or 100 sweeps elapse. Quadratic
/// convergence makes the cap a formality for the sizes used here.
pub fn jacobi_eigen(matrix: &Matrix) -> SymEigen {
    let n = matrix.len();
    let mut a = matrix.clone();
    // v holds the accumulated rotations; columns are eigenvectors.
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if n > 1 {
        let scale: f64 = (0..n)
            .map(|i| a[i][i].abs())
            .fold(off_diagonal_norm(&a), f64::max)
            .max(1.0);
        let tol = 1e-13 * scale;
        for _sweep in 0..100 {
            if off_diagonal_norm(&a) <= tol {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[p][q];
                    if apq.abs() <= 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for row in v.iter_mut() {
                        let vp = row[p];
                        let vq = row[q];
                        row[p] = c * vp - s * vq;
                        row[q] = s * vp + c * vq;
                    }
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| (a[k][k], (0..n).map(|i| v[i][k]).collect()))
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    SymEigen {
        values: pairs.iter().map(|p| p.0).collect(),
        vectors: pairs.into_iter().map(|p| p.1).collect(),
    }
}

/// Pearson correlation of two equal-length vectors.
///
/// Returns `None` when either vector has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
