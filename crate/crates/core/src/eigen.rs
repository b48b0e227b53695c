//! Eigenvalue solvers for the small dense matrices of the laboratory.
//!
//! Symmetric matrices go through cyclic Jacobi rotations, which converge
//! unconditionally and keep the spectrum real by construction. Everything
//! else is reduced to Hessenberg form and iterated with double-shift QR
//! steps; a trailing 2x2 block with negative discriminant is reported as a
//! complex pair instead of being silently projected to the real axis.

use crate::error::{GnatError, Result};
use crate::linalg::{frobenius, identity, solve, Mat};

/// Cap on Jacobi sweeps and on QR steps.
pub const ITERATION_CAP: usize = 200;

/// Convergence threshold on the off-diagonal norm, relative to the
/// Frobenius norm of the input (with an absolute floor of the same size).
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;

fn off_diagonal_norm(a: &Mat) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += a[p][q] * a[p][q];
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues and orthonormal eigenvectors of a symmetric matrix by cyclic
/// Jacobi rotations. Returns eigenvalues sorted ascending and the matrix of
/// eigenvectors as columns, so `a = v diag(l) v^T`.
pub fn sym_eigen(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = a.len();
    // symmetrize to absorb roundoff asymmetry from upstream products
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = 0.5 * (a[i][j] + a[j][i]);
        }
    }
    let scale = frobenius(&m).max(1.0);
    let mut v = identity(n);
    let mut converged = false;
    for _ in 0..ITERATION_CAP {
        if off_diagonal_norm(&m) < OFF_DIAGONAL_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let apq = m[p][q];
                m[p][p] -= t * apq;
                m[q][q] += t * apq;
                m[p][q] = 0.0;
                m[q][p] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = m[i][p];
                        let aiq = m[i][q];
                        m[i][p] = aip - s * (aiq + tau * aip);
                        m[p][i] = m[i][p];
                        m[i][q] = aiq + s * (aip - tau * aiq);
                        m[q][i] = m[i][q];
                    }
                }
                for i in 0..n {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = vip - s * (viq + tau * vip);
                    v[i][q] = viq + s * (vip - tau * viq);
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&m) >= OFF_DIAGONAL_TOL * scale {
        return Err(GnatError::EigenNoConverge(ITERATION_CAP));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].partial_cmp(&m[j][j]).unwrap());
    let eigs: Vec<f64> = order.iter().map(|&i| m[i][i]).collect();
    let mut vecs = vec![vec![0.0; n]; n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vecs[r][new_col] = v[r][old_col];
        }
    }
    Ok((eigs, vecs))
}

/// Reduce to upper Hessenberg form in place (similarity transform).
fn hessenberg(h: &mut Mat) {
    let n = h.len();
    for k in 0..n.saturating_sub(2) {
        let mut norm = 0.0;
        for i in k + 1..n {
            norm += h[i][k] * h[i][k];
        }
        norm = norm.sqrt();
        if norm < 1e-300 {
            continue;
        }
        let alpha = if h[k + 1][k] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| h[i][k]).collect();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv < 1e-300 {
            continue;
        }
        let beta = 2.0 / vtv;
        // left: rows k+1..n
        for c in 0..n {
            let mut s = 0.0;
            for (iv, i) in (k + 1..n).enumerate() {
                s += v[iv] * h[i][c];
            }
            s *= beta;
            for (iv, i) in (k + 1..n).enumerate() {
                h[i][c] -= v[iv] * s;
            }
        }
        // right: columns k+1..n
        for r in 0..n {
            let mut s = 0.0;
            for (iv, c) in (k + 1..n).enumerate() {
                s += h[r][c] * v[iv];
            }
            s *= beta;
            for (iv, c) in (k + 1..n).enumerate() {
                h[r][c] -= v[iv] * s;
            }
        }
        for i in k + 2..n {
            h[i][k] = 0.0;
        }
        h[k + 1][k] = alpha;
    }
}

fn apply_reflector_left(h: &mut Mat, rows: &[usize], v: &[f64], beta: f64, c_lo: usize, c_hi: usize) {
    for c in c_lo..c_hi {
        let mut s = 0.0;
        for (iv, &r) in rows.iter().enumerate() {
            s += v[iv] * h[r][c];
        }
        s *= beta;
        for (iv, &r) in rows.iter().enumerate() {
            h[r][c] -= v[iv] * s;
        }
    }
}

fn apply_reflector_right(h: &mut Mat, cols: &[usize], v: &[f64], beta: f64, r_lo: usize, r_hi: usize) {
    for r in r_lo..r_hi {
        let mut s = 0.0;
        for (iv, &c) in cols.iter().enumerate() {
            s += h[r][c] * v[iv];
        }
        s *= beta;
        for (iv, &c) in cols.iter().enumerate() {
            h[r][c] -= v[iv] * s;
        }
    }
}

fn reflector(x: &[f64]) -> Option<(Vec<f64>, f64)> {
    let norm: f64 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return None;
    }
    let alpha = if x[0] >= 0.0 { -norm } else { norm };
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vtv: f64 = v.iter().map(|a| a * a).sum();
    if vtv < 1e-300 {
        return None;
    }
    Some((v, 2.0 / vtv))
}

/// One implicit double-shift QR step on the decoupled block `lo..=m`.
fn francis_step(h: &mut Mat, lo: usize, m: usize, exceptional: bool) {
    let (s, t) = if exceptional {
        let a1 = h[m][m - 1].abs() + if m >= 2 { h[m - 1][m - 2].abs() } else { 0.0 };
        (1.5 * a1, a1 * a1)
    } else {
        (
            h[m - 1][m - 1] + h[m][m],
            h[m - 1][m - 1] * h[m][m] - h[m - 1][m] * h[m][m - 1],
        )
    };
    let mut x = h[lo][lo] * h[lo][lo] + h[lo][lo + 1] * h[lo + 1][lo] - s * h[lo][lo] + t;
    let mut y = h[lo + 1][lo] * (h[lo][lo] + h[lo + 1][lo + 1] - s);
    let mut z = if lo + 2 <= m {
        h[lo + 1][lo] * h[lo + 2][lo + 1]
    } else {
        0.0
    };
    let n = h.len();
    let mut k = lo;
    while k + 2 <= m {
        if let Some((v, beta)) = reflector(&[x, y, z]) {
            let rows = [k, k + 1, k + 2];
            apply_reflector_left(h, &rows, &v, beta, lo.saturating_sub(0), n);
            apply_reflector_right(h, &rows, &v, beta, 0, n);
        }
        x = h[k + 1][k];
        y = h[k + 2][k];
        z = if k + 3 <= m { h[k + 3][k] } else { 0.0 };
        k += 1;
    }
    // final 2-element reflection on rows (m-1, m)
    if let Some((v, beta)) = reflector(&[x, y]) {
        let rows = [m - 1, m];
        apply_reflector_left(h, &rows, &v, beta, 0, n);
        apply_reflector_right(h, &rows, &v, beta, 0, n);
    }
}

/// Eigenvalues of a general real matrix as `(re, im)` pairs, sorted by real
/// part then imaginary part. Complex eigenvalues come out as conjugate
/// pairs; the caller decides whether they are an error.
pub fn general_eigen(a: &Mat) -> Result<Vec<(f64, f64)>> {
    let n = a.len();
    if n == 0 {
        return Ok(vec![]);
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    let scale = frobenius(&h).max(1.0);
    let negligible = |h: &Mat, i: usize| -> bool {
        h[i][i - 1].abs() <= 1e-15 * (h[i][i].abs() + h[i - 1][i - 1].abs()).max(1e-3 * scale)
    };
    let mut eigs: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut steps_on_block = 0usize;
    let mut total_steps = 0usize;
    loop {
        // deflate negligible subdiagonal entries
        let mut lo = hi;
        while lo > 0 && !negligible(&h, lo) {
            lo -= 1;
        }
        if lo == hi {
            eigs.push((h[hi][hi], 0.0));
            if hi == 0 {
                break;
            }
            hi -= 1;
            steps_on_block = 0;
            continue;
        }
        if lo + 1 == hi {
            let (a11, a12, a21, a22) = (h[lo][lo], h[lo][hi], h[hi][lo], h[hi][hi]);
            let half_tr = 0.5 * (a11 + a22);
            let disc = 0.25 * (a11 - a22) * (a11 - a22) + a12 * a21;
            if disc >= 0.0 {
                let r = disc.sqrt();
                eigs.push((half_tr - r, 0.0));
                eigs.push((half_tr + r, 0.0));
            } else {
                let r = (-disc).sqrt();
                eigs.push((half_tr, -r));
                eigs.push((half_tr, r));
            }
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            steps_on_block = 0;
            continue;
        }
        total_steps += 1;
        steps_on_block += 1;
        if total_steps > ITERATION_CAP {
            return Err(GnatError::EigenNoConverge(ITERATION_CAP));
        }
        let exceptional = steps_on_block % 11 == 10;
        francis_step(&mut h, lo, hi, exceptional);
    }
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eigs)
}

/// Real spectrum of a general matrix; a complex pair is an error carrying
/// the offending value. `tol` bounds the acceptable imaginary part,
/// relative to the matrix scale.
pub fn real_spectrum(a: &Mat, tol: f64) -> Result<Vec<f64>> {
    let scale = frobenius(a).max(1.0);
    let eigs = general_eigen(a)?;
    for &(re, im) in &eigs {
        if im.abs() > tol * scale {
            return Err(GnatError::ComplexPair(format!(
                "{re:.6e} + {im:.6e} i (matrix scale {scale:.3e})"
            )));
        }
    }
    let mut out: Vec<f64> = eigs.into_iter().map(|(re, _)| re).collect();
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(out)
}

/// Approximate eigenvector for a known eigenvalue by shifted inverse
/// iteration. Returns a unit vector; quality is the caller's check.
pub fn eigenvector_for(a: &Mat, lambda: f64) -> Option<Vec<f64>> {
    let n = a.len();
    let scale = frobenius(a).max(1.0);
    let mut shift = lambda + 1e-11 * scale;
    for _attempt in 0..3 {
        let mut b = a.clone();
        for i in 0..n {
            b[i][i] -= shift;
        }
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * (i as f64)).collect();
        let mut ok = true;
        for _ in 0..4 {
            match solve(&b, &v) {
                Some(w) => {
                    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if !norm.is_finite() || norm < 1e-300 {
                        ok = false;
                        break;
                    }
                    v = w.iter().map(|x| x / norm).collect();
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(v);
        }
        shift += 1e-8 * scale;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::mat_vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn jacobi_tridiagonal_known_spectrum() {
        // eigenvalues of [[2,1,0],[1,2,1],[0,1,2]] are 2 - sqrt(2), 2, 2 + sqrt(2)
        let a = vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 2.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ];
        let (eigs, vecs) = sym_eigen(&a).unwrap();
        let want = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        for (e, w) in eigs.iter().zip(want) {
            assert!(close(*e, w, 1e-12), "{e} vs {w}");
        }
        // columns are eigenvectors
        for k in 0..3 {
            let v: Vec<f64> = (0..3).map(|r| vecs[r][k]).collect();
            let av = mat_vec(&a, &v);
            for i in 0..3 {
                assert!(close(av[i], eigs[k] * v[i], 1e-11));
            }
        }
    }

    #[test]
    fn qr_matches_jacobi_on_symmetric_input() {
        let a = vec![
            vec![4.0, 1.0, -2.0, 0.3],
            vec![1.0, 3.0, 0.5, -1.0],
            vec![-2.0, 0.5, 1.0, 0.7],
            vec![0.3, -1.0, 0.7, 2.0],
        ];
        let (sym, _) = sym_eigen(&a).unwrap();
        let qr = real_spectrum(&a, 1e-9).unwrap();
        for (s, q) in sym.iter().zip(&qr) {
            assert!(close(*s, *q, 1e-9), "{s} vs {q}");
        }
    }

    #[test]
    fn qr_companion_matrix_roots() {
        // companion of (x-1)(x-2)(x-3)(x-4) = x^4 - 10x^3 + 35x^2 - 50x + 24
        let a = vec![
            vec![10.0, -35.0, 50.0, -24.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        let eigs = real_spectrum(&a, 1e-9).unwrap();
        for (e, w) in eigs.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!(close(*e, w, 1e-9), "{e} vs {w}");
        }
    }

    #[test]
    fn qr_flags_complex_pair() {
        // plane rotation by 90 degrees has eigenvalues +-i
        let a = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        let eigs = general_eigen(&a).unwrap();
        assert!(close(eigs[0].1.abs(), 1.0, 1e-12));
        assert!(real_spectrum(&a, 1e-9).is_err());
    }

    #[test]
    fn qr_handles_defective_block() {
        // Jordan block: double eigenvalue 0 without a second eigenvector
        let a = vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ];
        let eigs = real_spectrum(&a, 1e-9).unwrap();
        assert!(eigs[0].abs() < 1e-12 && eigs[1].abs() < 1e-12);
        assert!(close(eigs[2], 3.0, 1e-12));
    }

    #[test]
    fn qr_triangular_pattern_matrix() {
        // same sparsity as the Jacobi operator of a horizontal unit vector
        // on the zero section: eigenvalues must be the diagonal entries
        let a = vec![
            vec![0.0, 0.0, 0.7, 0.0],
            vec![0.0, 1.0, 0.0, -0.4],
            vec![0.0, 0.0, 0.25, 0.0],
            vec![0.0, 0.0, 0.0, -0.3],
        ];
        let eigs = real_spectrum(&a, 1e-9).unwrap();
        let mut want = [0.0, 1.0, 0.25, -0.3];
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, w) in eigs.iter().zip(want) {
            assert!(close(*e, w, 1e-10), "{e} vs {w}");
        }
    }

    #[test]
    fn inverse_iteration_recomposes() {
        let a = vec![
            vec![4.0, 1.0, -2.0, 0.3],
            vec![1.0, 3.0, 0.5, -1.0],
            vec![-2.0, 0.5, 1.0, 0.7],
            vec![0.3, -1.0, 0.7, 2.0],
        ];
        let eigs = real_spectrum(&a, 1e-9).unwrap();
        for &l in &eigs {
            let v = eigenvector_for(&a, l).unwrap();
            let av = mat_vec(&a, &v);
            let resid: f64 = av
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - l * y) * (x - l * y))
                .sum::<f64>()
                .sqrt();
            assert!(resid < 1e-8, "residual {resid} for eigenvalue {l}");
        }
    }
}
