//! Central finite differences.
//!
//! These estimators are the independent cross-check for the jet arithmetic:
//! they touch only plain function values, never the derivative-propagation
//! code, so agreement between the two paths is meaningful evidence. They are
//! used by the test suite and are not part of any production formula.

/// First partial derivative of `f` at `x` in direction `i`, step `h`.
pub fn central_d1(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[i] += h;
    b[i] -= h;
    (f(&a) - f(&b)) / (2.0 * h)
}

/// Second partial derivative in directions `i`, `j`.
pub fn central_d2(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, j: usize, h: f64) -> f64 {
    if i == j {
        let mut a = x.to_vec();
        let mut b = x.to_vec();
        a[i] += h;
        b[i] -= h;
        (f(&a) - 2.0 * f(x) + f(&b)) / (h * h)
    } else {
        let mut pp = x.to_vec();
        let mut pm = x.to_vec();
        let mut mp = x.to_vec();
        let mut mm = x.to_vec();
        pp[i] += h;
        pp[j] += h;
        pm[i] += h;
        pm[j] -= h;
        mp[i] -= h;
        mp[j] += h;
        mm[i] -= h;
        mm[j] -= h;
        (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * h * h)
    }
}

/// Third partial derivative in directions `i`, `j`, `k`: a central first
/// difference of [`central_d2`].
pub fn central_d3(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    i: usize,
    j: usize,
    k: usize,
    h: f64,
) -> f64 {
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[i] += h;
    b[i] -= h;
    (central_d2(f, &a, j, k, h) - central_d2(f, &b, j, k, h)) / (2.0 * h)
}
