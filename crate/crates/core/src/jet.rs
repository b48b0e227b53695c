//! Truncated Taylor (jet) arithmetic in several variables.
//!
//! A [`Jet`] carries the value of a scalar quantity together with its partial
//! derivatives up to a chosen order (at most three). Sums, products,
//! quotients and compositions propagate the derivatives through the exact
//! Leibniz and chain rules, so every derivative that reaches the curvature
//! formulas is computed to machine precision rather than by differencing.
//!
//! The highest order actually needed anywhere is three: second derivatives
//! of the bundle metric embed first derivatives of the Christoffel symbols
//! of the base, which in turn consume one more order of the base metric.

/// Highest derivative order a jet can carry.
pub const MAX_ORDER: usize = 3;

/// Scalar value with partial derivatives up to `order` in `nvars` variables.
///
/// Derivative tensors are stored dense and fully symmetric; sizes stay tiny
/// (at most 4^3 entries) for the two- and four-variable jets used here.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    nvars: usize,
    order: usize,
    val: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    third: Vec<f64>,
}

impl Jet {
    /// Jet of a constant: all derivatives vanish.
    pub fn constant(nvars: usize, order: usize, value: f64) -> Self {
        assert!(order <= MAX_ORDER, "jet order capped at {MAX_ORDER}");
        Jet {
            nvars,
            order,
            val: value,
            grad: vec![0.0; if order >= 1 { nvars } else { 0 }],
            hess: vec![0.0; if order >= 2 { nvars * nvars } else { 0 }],
            third: vec![0.0; if order >= 3 { nvars * nvars * nvars } else { 0 }],
        }
    }

    /// Jet of the coordinate function `x_index` evaluated at `value`.
    pub fn variable(nvars: usize, order: usize, index: usize, value: f64) -> Self {
        assert!(index < nvars, "variable index out of range");
        let mut j = Jet::constant(nvars, order, value);
        if order >= 1 {
            j.grad[index] = 1.0;
        }
        j
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.val
    }

    /// First partial derivative with respect to variable `i`.
    pub fn d(&self, i: usize) -> f64 {
        assert!(self.order >= 1, "jet does not carry first derivatives");
        self.grad[i]
    }

    /// Second partial derivative with respect to variables `i`, `j`.
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        assert!(self.order >= 2, "jet does not carry second derivatives");
        self.hess[i * self.nvars + j]
    }

    /// Third partial derivative with respect to variables `i`, `j`, `k`.
    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        assert!(self.order >= 3, "jet does not carry third derivatives");
        self.third[(i * self.nvars + j) * self.nvars + k]
    }

    fn assert_compatible(&self, other: &Jet) {
        assert_eq!(self.nvars, other.nvars, "jet variable counts differ");
        assert_eq!(self.order, other.order, "jet orders differ");
    }

    /// Drop derivative orders above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order, "cannot extend a jet by truncation");
        let mut out = Jet::constant(self.nvars, order, self.val);
        if order >= 1 {
            out.grad.copy_from_slice(&self.grad);
        }
        if order >= 2 {
            out.hess.copy_from_slice(&self.hess);
        }
        if order >= 3 {
            out.third.copy_from_slice(&self.third);
        }
        out
    }

    /// Differentiate once with respect to variable `i`; the result carries
    /// one order less.
    pub fn partial(&self, i: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let n = self.nvars;
        let mut out = Jet::constant(n, self.order - 1, self.grad[i]);
        if out.order >= 1 {
            for j in 0..n {
                out.grad[j] = self.hess[i * n + j];
            }
        }
        if out.order >= 2 {
            for j in 0..n {
                for k in 0..n {
                    out.hess[j * n + k] = self.third[(i * n + j) * n + k];
                }
            }
        }
        out
    }

    /// Reinterpret the jet in a larger variable space: old variable `v`
    /// becomes variable `offset + v`, derivatives in the new variables are
    /// zero, and orders above `order` are dropped.
    pub fn extend(&self, nvars: usize, offset: usize, order: usize) -> Jet {
        assert!(offset + self.nvars <= nvars, "extension does not fit");
        assert!(order <= self.order, "extension cannot raise the order");
        let n = self.nvars;
        let m = nvars;
        let mut out = Jet::constant(m, order, self.val);
        if order >= 1 {
            for i in 0..n {
                out.grad[offset + i] = self.grad[i];
            }
        }
        if order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    out.hess[(offset + i) * m + (offset + j)] = self.hess[i * n + j];
                }
            }
        }
        if order >= 3 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        out.third[((offset + i) * m + (offset + j)) * m + (offset + k)] =
                            self.third[(i * n + j) * n + k];
                    }
                }
            }
        }
        out
    }

    pub fn neg(&self) -> Jet {
        let mut out = self.clone();
        out.val = -out.val;
        for v in &mut out.grad {
            *v = -*v;
        }
        for v in &mut out.hess {
            *v = -*v;
        }
        for v in &mut out.third {
            *v = -*v;
        }
        out
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.assert_compatible(other);
        let mut out = self.clone();
        out.val += other.val;
        for (a, b) in out.grad.iter_mut().zip(&other.grad) {
            *a += b;
        }
        for (a, b) in out.hess.iter_mut().zip(&other.hess) {
            *a += b;
        }
        for (a, b) in out.third.iter_mut().zip(&other.third) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.val *= c;
        for v in &mut out.grad {
            *v *= c;
        }
        for v in &mut out.hess {
            *v *= c;
        }
        for v in &mut out.third {
            *v *= c;
        }
        out
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.val += c;
        out
    }

    /// Leibniz product up to the carried order.
    pub fn mul(&self, other: &Jet) -> Jet {
        self.assert_compatible(other);
        let n = self.nvars;
        let (a, b) = (self, other);
        let mut out = Jet::constant(n, self.order, a.val * b.val);
        if self.order >= 1 {
            for i in 0..n {
                out.grad[i] = a.grad[i] * b.val + a.val * b.grad[i];
            }
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    out.hess[i * n + j] = a.hess[i * n + j] * b.val
                        + a.grad[i] * b.grad[j]
                        + a.grad[j] * b.grad[i]
                        + a.val * b.hess[i * n + j];
                }
            }
        }
        if self.order >= 3 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        out.third[(i * n + j) * n + k] = a.third[(i * n + j) * n + k] * b.val
                            + a.hess[i * n + j] * b.grad[k]
                            + a.hess[i * n + k] * b.grad[j]
                            + a.hess[j * n + k] * b.grad[i]
                            + a.grad[i] * b.hess[j * n + k]
                            + a.grad[j] * b.hess[i * n + k]
                            + a.grad[k] * b.hess[i * n + j]
                            + a.val * b.third[(i * n + j) * n + k];
                    }
                }
            }
        }
        out
    }

    /// Chain rule for a univariate outer function. `f` holds the outer
    /// derivatives `[f, f', f'', f''']` at `self.value()`; entries above the
    /// carried order are ignored.
    pub fn compose(&self, f: [f64; 4]) -> Jet {
        let n = self.nvars;
        let g = self;
        let mut out = Jet::constant(n, self.order, f[0]);
        if self.order >= 1 {
            for i in 0..n {
                out.grad[i] = f[1] * g.grad[i];
            }
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    out.hess[i * n + j] = f[2] * g.grad[i] * g.grad[j] + f[1] * g.hess[i * n + j];
                }
            }
        }
        if self.order >= 3 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        out.third[(i * n + j) * n + k] = f[3]
                            * g.grad[i]
                            * g.grad[j]
                            * g.grad[k]
                            + f[2]
                                * (g.hess[i * n + j] * g.grad[k]
                                    + g.hess[i * n + k] * g.grad[j]
                                    + g.hess[j * n + k] * g.grad[i])
                            + f[1] * g.third[(i * n + j) * n + k];
                    }
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let v = self.val;
        self.compose([
            1.0 / v,
            -1.0 / (v * v),
            2.0 / (v * v * v),
            -6.0 / (v * v * v * v),
        ])
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.recip())
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.val.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.val.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn exp(&self) -> Jet {
        let e = self.val.exp();
        self.compose([e, e, e, e])
    }

    pub fn sqrt(&self) -> Jet {
        let r = self.val.sqrt();
        self.compose([r, 0.5 / r, -0.25 / (r * r * r), 0.375 / (r * r * r * r * r)])
    }

    /// Integer power, including negative exponents.
    pub fn powi(&self, e: i32) -> Jet {
        if e == 0 {
            return Jet::constant(self.nvars, self.order, 1.0);
        }
        let v = self.val;
        let p = |k: i32| -> f64 {
            // falling factorial e (e-1) ... (e-k+1) times v^(e-k)
            let mut c = 1.0;
            for s in 0..k {
                c *= (e - s) as f64;
            }
            if c == 0.0 {
                0.0
            } else {
                c * v.powi(e - k)
            }
        };
        self.compose([p(0), p(1), p(2), p(3)])
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl std::ops::$trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                Jet::$imp(self, rhs)
            }
        }
        impl std::ops::$trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                Jet::$imp(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                Jet::$imp(&self, rhs)
            }
        }
        impl std::ops::$trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                Jet::$imp(self, &rhs)
            }
        }
    };
}

jet_binop!(Add, add, add);
jet_binop!(Sub, sub, sub);
jet_binop!(Mul, mul, mul);
jet_binop!(Div, div, div);

impl std::ops::Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::neg(self)
    }
}
