//! Small dense matrix helpers, for plain floats and for jets.
//!
//! Everything here operates on matrices of side at most four, so the
//! routines favour clarity over blocking or allocation tricks.

use crate::jet::Jet;

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(rows: usize, cols: usize) -> Mat {
    vec![vec![0.0; cols]; rows]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for i in 0..n {
        m[i][i] = 1.0;
    }
    m
}

pub fn transpose(a: &Mat) -> Mat {
    let (r, c) = (a.len(), a[0].len());
    let mut t = zeros(c, r);
    for i in 0..r {
        for j in 0..c {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    let mut m = zeros(r, c);
    for i in 0..r {
        for l in 0..k {
            let ail = a[i][l];
            for j in 0..c {
                m[i][j] += ail * b[l][j];
            }
        }
    }
    m
}

pub fn mat_vec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

pub fn frobenius(a: &Mat) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Determinant by LU with partial pivoting.
pub fn det(a: &Mat) -> f64 {
    let n = a.len();
    let mut m = a.clone();
    let mut d = 1.0;
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if m[i][k].abs() > m[p][k].abs() {
                p = i;
            }
        }
        if m[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            m.swap(p, k);
            d = -d;
        }
        d *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    d
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if m[i][k].abs() > m[p][k].abs() {
                p = i;
            }
        }
        if m[p][k].abs() < 1e-300 {
            return None;
        }
        m.swap(p, k);
        rhs.swap(p, k);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= m[k][j] * rhs[j];
        }
        rhs[k] = s / m[k][k];
    }
    Some(rhs)
}

pub fn inverse(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve(a, &e)?);
    }
    let mut inv = zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            inv[i][j] = cols[j][i];
        }
    }
    Some(inv)
}

/// Pivoted Cholesky probe for positive definiteness of a symmetric matrix.
/// Returns the smallest pivot encountered; the matrix is positive definite
/// exactly when that pivot is strictly positive.
pub fn min_cholesky_pivot(a: &Mat) -> f64 {
    let n = a.len();
    let mut m = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        // pick the largest remaining diagonal entry as the next pivot
        let mut p = k;
        for i in k + 1..n {
            if m[perm[i]][perm[i]] > m[perm[p]][perm[p]] {
                p = i;
            }
        }
        perm.swap(k, p);
        let pk = perm[k];
        let pivot = m[pk][pk];
        min_pivot = min_pivot.min(pivot);
        if pivot <= 0.0 {
            return min_pivot;
        }
        for ii in k + 1..n {
            let pi = perm[ii];
            let f = m[pi][pk] / pivot;
            for jj in k + 1..n {
                let pj = perm[jj];
                m[pi][pj] -= f * m[pj][pk];
            }
        }
    }
    min_pivot
}

/// Invert a matrix of jets by Gauss-Jordan elimination, pivoting on the
/// magnitude of the value part. Fails when a pivot value drops below
/// `min_pivot`.
pub fn jet_inverse(a: &[Vec<Jet>], min_pivot: f64) -> Option<Vec<Vec<Jet>>> {
    let n = a.len();
    assert!(n > 0 && a.iter().all(|r| r.len() == n));
    let nv = a[0][0].nvars();
    let ord = a[0][0].order();
    let mut m: Vec<Vec<Jet>> = a.to_vec();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet::constant(nv, ord, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if m[i][k].value().abs() > m[p][k].value().abs() {
                p = i;
            }
        }
        if m[p][k].value().abs() < min_pivot {
            return None;
        }
        m.swap(p, k);
        inv.swap(p, k);
        let r = m[k][k].recip();
        for j in 0..n {
            m[k][j] = &m[k][j] * &r;
            inv[k][j] = &inv[k][j] * &r;
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = m[i][k].clone();
            if f.value() == 0.0 && f == Jet::constant(nv, ord, 0.0) {
                continue;
            }
            for j in 0..n {
                m[i][j] = &m[i][j] - &(&f * &m[k][j]);
                inv[i][j] = &inv[i][j] - &(&f * &inv[k][j]);
            }
        }
    }
    Some(inv)
}
