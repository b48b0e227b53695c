//! The metric on the tangent bundle.
//!
//! A point of the bundle is a base point `x` together with a tangent
//! vector `u`; `t = g_x(u, u)`. Vectors at `(x, u)` are handled in two
//! frames:
//!
//! * the lift frame `{(dx_k)^h, (dx_k)^v}` built from horizontal and
//!   vertical lifts of the coordinate basis, where the metric has the
//!   closed block form
//!
//!   ```text
//!   G(X^h, Y^h) = (a1 + a3) g(X, Y) + (b1 + b3) g(X, u) g(Y, u)
//!   G(X^h, Y^v) =  a2       g(X, Y) +  b2       g(X, u) g(Y, u)
//!   G(X^v, Y^v) =  a1       g(X, Y) +  b1       g(X, u) g(Y, u)
//!   ```
//!
//! * the induced coordinate frame `{d/dx_k, d/du_k}` of the chart
//!   `(x, u)` on the bundle, in which Christoffel symbols and curvature
//!   are computed. Tensor components live in this frame as jets in the
//!   `2m` variables `(x_1..x_m, u_1..u_m)` so that derivatives of the
//!   Gram matrix are exact rather than numerical.
//!
//! The two frames differ by the block-triangular change of frame
//! `T = [[I, 0], [C, I]]` with `C^i_k = Gamma^i_{jk} u^j`.

use crate::error::{GnatError, Result};
use crate::generators::{DerivedScalars, GeneratorSet};
use crate::geometry::ChartPoint;
use crate::jet::Jet;
use crate::linalg::{self, Mat};

/// Relative determinant floor below which a Gram matrix is degenerate.
pub const GRAM_DEGENERACY_FLOOR: f64 = 1e-12;

/// Relative determinant floor below which a Gram matrix is flagged as
/// ill-conditioned even though it is still invertible.
pub const GRAM_CONDITION_FLOOR: f64 = 1e-8;

/// A point `(x, u)` of the tangent bundle with its squared fiber norm.
#[derive(Clone, Debug, PartialEq)]
pub struct BundlePoint {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// `g_x(u, u)`, cached at construction.
    pub t: f64,
}

impl BundlePoint {
    /// Validates the base point against the chart and caches `t`.
    pub fn new(chart: &crate::chart::MetricChart, x: &[f64], u: &[f64]) -> Result<BundlePoint> {
        if u.len() != chart.dim() {
            return Err(GnatError::Dimension {
                expected: chart.dim(),
                got: u.len(),
            });
        }
        let g = chart.metric_values(x)?;
        let mut t = 0.0;
        for i in 0..u.len() {
            for j in 0..u.len() {
                t += g[i][j] * u[i] * u[j];
            }
        }
        Ok(BundlePoint {
            x: x.to_vec(),
            u: u.to_vec(),
            t,
        })
    }

    /// Scales the direction `d` so that `g_x(u, u) = t` exactly. `t = 0`
    /// gives the zero-section point regardless of `d`.
    pub fn from_direction(
        chart: &crate::chart::MetricChart,
        x: &[f64],
        d: &[f64],
        t: f64,
    ) -> Result<BundlePoint> {
        if !(t >= 0.0) {
            return Err(GnatError::Degenerate {
                t,
                witness: "fiber norm t must be nonnegative".into(),
            });
        }
        if t == 0.0 {
            return BundlePoint::new(chart, x, &vec![0.0; chart.dim()]);
        }
        let probe = BundlePoint::new(chart, x, d)?;
        if probe.t <= 0.0 {
            return Err(GnatError::ZeroVector {
                op: "fiber direction",
            });
        }
        let s = (t / probe.t).sqrt();
        let u: Vec<f64> = d.iter().map(|c| c * s).collect();
        let mut p = BundlePoint::new(chart, x, &u)?;
        // the cached value is the requested one; the recomputed value
        // agrees to roundoff
        debug_assert!((p.t - t).abs() <= 1e-12 * (1.0 + t));
        p.t = t;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_zero_section(&self) -> bool {
        self.u.iter().all(|c| *c == 0.0)
    }
}

/// A tangent vector of the bundle written in the lift frame: the base
/// vector `h` lifted horizontally plus the base vector `v` lifted
/// vertically.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedVector {
    pub h: Vec<f64>,
    pub v: Vec<f64>,
}

impl LiftedVector {
    pub fn new(h: Vec<f64>, v: Vec<f64>) -> LiftedVector {
        assert_eq!(h.len(), v.len(), "lift components must share the base dimension");
        LiftedVector { h, v }
    }

    pub fn horizontal(x: &[f64]) -> LiftedVector {
        LiftedVector::new(x.to_vec(), vec![0.0; x.len()])
    }

    pub fn vertical(x: &[f64]) -> LiftedVector {
        LiftedVector::new(vec![0.0; x.len()], x.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn scale(&self, s: f64) -> LiftedVector {
        LiftedVector::new(
            self.h.iter().map(|c| c * s).collect(),
            self.v.iter().map(|c| c * s).collect(),
        )
    }

    pub fn add(&self, o: &LiftedVector) -> LiftedVector {
        LiftedVector::new(
            self.h.iter().zip(&o.h).map(|(a, b)| a + b).collect(),
            self.v.iter().zip(&o.v).map(|(a, b)| a + b).collect(),
        )
    }
}

/// Which frame a Gram matrix is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GramFrame {
    /// Horizontal and vertical lifts of the coordinate basis.
    Lift,
    /// The induced coordinate frame `{d/dx_k, d/du_k}`.
    Induced,
}

/// A `2m x 2m` Gram matrix of the bundle metric with degeneracy flags.
/// The induced frame carries order-2 jets so curvature can differentiate
/// it exactly.
#[derive(Clone, Debug)]
pub struct BundleMetricMatrix {
    pub frame: GramFrame,
    pub values: Mat,
    pub jets: Option<Vec<Vec<Jet>>>,
    pub det: f64,
    pub nondegenerate: bool,
    pub ill_conditioned: bool,
}

fn degeneracy_flags(values: &Mat) -> (f64, bool, bool) {
    let det = linalg::det(values);
    let scale: f64 = values
        .iter()
        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300))
        .product();
    let rel = det.abs() / scale;
    (det, rel >= GRAM_DEGENERACY_FLOOR, rel < GRAM_CONDITION_FLOOR)
}

/// Everything needed to evaluate the bundle metric at one point: the base
/// chart data as jets, the point, and the generator scalars at its `t`.
pub struct BundleContext<'c> {
    pub gen: &'c GeneratorSet,
    pub base: ChartPoint<'c>,
    pub point: BundlePoint,
    pub scalars: DerivedScalars,
}

impl<'c> BundleContext<'c> {
    pub fn new(
        gen: &'c GeneratorSet,
        chart: &'c crate::chart::MetricChart,
        x: &[f64],
        u: &[f64],
    ) -> Result<BundleContext<'c>> {
        let point = BundlePoint::new(chart, x, u)?;
        BundleContext::at_point(gen, chart, point)
    }

    pub fn at_point(
        gen: &'c GeneratorSet,
        chart: &'c crate::chart::MetricChart,
        point: BundlePoint,
    ) -> Result<BundleContext<'c>> {
        let base = ChartPoint::new(chart, &point.x)?;
        let scalars = gen.derived_scalars(point.t)?;
        Ok(BundleContext {
            gen,
            base,
            point,
            scalars,
        })
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    /// `g_x(a, b)` on the base.
    fn base_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.base.inner(a, b)
    }

    /// The bundle metric on two lift-frame vectors, evaluated from the
    /// block formulas without forming the Gram matrix.
    pub fn metric_on_lifts(&self, xb: &LiftedVector, yb: &LiftedVector) -> f64 {
        let s = &self.scalars;
        let u = &self.point.u;
        let gxy_hh = self.base_inner(&xb.h, &yb.h);
        let gxy_hv = self.base_inner(&xb.h, &yb.v);
        let gxy_vh = self.base_inner(&xb.v, &yb.h);
        let gxy_vv = self.base_inner(&xb.v, &yb.v);
        let xu_h = self.base_inner(&xb.h, u);
        let xu_v = self.base_inner(&xb.v, u);
        let yu_h = self.base_inner(&yb.h, u);
        let yu_v = self.base_inner(&yb.v, u);
        let a13 = s.a1.v + s.a3.v;
        let b13 = s.b1.v + s.b3.v;
        a13 * gxy_hh + b13 * xu_h * yu_h
            + s.a2.v * (gxy_hv + gxy_vh)
            + s.b2.v * (xu_h * yu_v + xu_v * yu_h)
            + s.a1.v * gxy_vv
            + s.b1.v * xu_v * yu_v
    }

    /// `C^i_k = Gamma^i_{jk} u^j` at the point; the lower-left block of
    /// the change of frame from induced to lift components.
    pub fn connection_shift(&self) -> Mat {
        let m = self.dim();
        let gamma = self.base.christoffel_jets();
        let mut c = linalg::zeros(m, m);
        for i in 0..m {
            for k in 0..m {
                for j in 0..m {
                    c[i][k] += gamma[i][j][k].value() * self.point.u[j];
                }
            }
        }
        c
    }

    /// Induced components `(dx-part, du-part)` of a lift-frame vector.
    pub fn lift_to_induced(&self, xb: &LiftedVector) -> Vec<f64> {
        let m = self.dim();
        let c = self.connection_shift();
        let mut w = Vec::with_capacity(2 * m);
        w.extend_from_slice(&xb.h);
        for i in 0..m {
            let mut vi = xb.v[i];
            for k in 0..m {
                vi -= c[i][k] * xb.h[k];
            }
            w.push(vi);
        }
        w
    }

    /// Inverse of [`Self::lift_to_induced`].
    pub fn induced_to_lift(&self, w: &[f64]) -> LiftedVector {
        let m = self.dim();
        assert_eq!(w.len(), 2 * m);
        let c = self.connection_shift();
        let h = w[..m].to_vec();
        let mut v = w[m..].to_vec();
        for i in 0..m {
            for k in 0..m {
                v[i] += c[i][k] * h[k];
            }
        }
        LiftedVector::new(h, v)
    }

    /// Change of frame `T` whose columns are the induced basis vectors
    /// written in the lift frame: `T = [[I, 0], [C, I]]`.
    pub fn lift_frame(&self) -> Mat {
        let m = self.dim();
        let c = self.connection_shift();
        let mut t = linalg::identity(2 * m);
        for i in 0..m {
            for k in 0..m {
                t[m + i][k] = c[i][k];
            }
        }
        t
    }

    /// The geodesic-flow vector: the horizontal lift of `u`.
    pub fn geodesic_flow(&self) -> LiftedVector {
        LiftedVector::horizontal(&self.point.u)
    }

    /// The canonical vertical vector: the vertical lift of `u`.
    pub fn canonical_vertical(&self) -> LiftedVector {
        LiftedVector::vertical(&self.point.u)
    }

    /// Gram matrix in the lift frame (values only; the lift frame is not
    /// a coordinate frame, so jets in it are not meaningful).
    pub fn gram_lift(&self) -> BundleMetricMatrix {
        let m = self.dim();
        let mut basis = Vec::with_capacity(2 * m);
        for k in 0..m {
            let mut e = vec![0.0; m];
            e[k] = 1.0;
            basis.push(LiftedVector::horizontal(&e));
        }
        for k in 0..m {
            let mut e = vec![0.0; m];
            e[k] = 1.0;
            basis.push(LiftedVector::vertical(&e));
        }
        let mut values = linalg::zeros(2 * m, 2 * m);
        for a in 0..2 * m {
            for b in 0..2 * m {
                values[a][b] = self.metric_on_lifts(&basis[a], &basis[b]);
            }
        }
        let (det, nondegenerate, ill_conditioned) = degeneracy_flags(&values);
        BundleMetricMatrix {
            frame: GramFrame::Lift,
            values,
            jets: None,
            det,
            nondegenerate,
            ill_conditioned,
        }
    }

    /// Gram matrix in the induced coordinate frame, as order-2 jets in
    /// the `2m` chart variables `(x, u)`.
    pub fn gram_induced(&self) -> Result<BundleMetricMatrix> {
        let jets = self.gram_induced_jets()?;
        let n = jets.len();
        let mut values = linalg::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                values[a][b] = jets[a][b].value();
            }
        }
        let (det, nondegenerate, ill_conditioned) = degeneracy_flags(&values);
        Ok(BundleMetricMatrix {
            frame: GramFrame::Induced,
            values,
            jets: Some(jets),
            det,
            nondegenerate,
            ill_conditioned,
        })
    }

    /// The induced-frame Gram entries as exact order-2 jets. The base
    /// metric enters through its order-3 jets and the Christoffel symbols
    /// through their order-2 jets, so every second partial of each entry
    /// is exact.
    pub fn gram_induced_jets(&self) -> Result<Vec<Vec<Jet>>> {
        let m = self.dim();
        let n = 2 * m;
        let order = 2;

        // base data, extended to the 2m bundle variables (x first, u last)
        let gj = self.base.metric_jets();
        let gammaj = self.base.christoffel_jets();
        let mut gx = vec![vec![Jet::constant(n, order, 0.0); m]; m];
        for i in 0..m {
            for j in 0..m {
                gx[i][j] = gj[i][j].extend(n, 0, order);
            }
        }
        let mut cx = vec![vec![vec![Jet::constant(n, order, 0.0); m]; m]; m];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    cx[i][j][k] = gammaj[i][j][k].extend(n, 0, order);
                }
            }
        }
        let uj: Vec<Jet> = (0..m)
            .map(|i| Jet::variable(n, order, m + i, self.point.u[i]))
            .collect();

        // t = g_ij u^i u^j and the composed generator scalars
        let mut t = Jet::constant(n, order, 0.0);
        for i in 0..m {
            for j in 0..m {
                t = &t + &(&(&gx[i][j] * &uj[i]) * &uj[j]);
            }
        }
        let compose = |curve: &crate::generators::GeneratorCurve| -> Result<Jet> {
            let f = curve.eval2(t.value())?;
            Ok(t.compose([f[0], f[1], f[2], 0.0]))
        };
        let a1 = compose(&self.gen.a1)?;
        let a2 = compose(&self.gen.a2)?;
        let a3 = compose(&self.gen.a3)?;
        let b1 = compose(&self.gen.b1)?;
        let b2 = compose(&self.gen.b2)?;
        let b3 = compose(&self.gen.b3)?;
        let a13 = &a1 + &a3;
        let b13 = &b1 + &b3;

        // g(e_k, u) and the connection shift C^i_k = Gamma^i_{jk} u^j as jets
        let gu: Vec<Jet> = (0..m)
            .map(|k| {
                let mut s = Jet::constant(n, order, 0.0);
                for j in 0..m {
                    s = &s + &(&gx[k][j] * &uj[j]);
                }
                s
            })
            .collect();
        let c: Vec<Vec<Jet>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|k| {
                        let mut s = Jet::constant(n, order, 0.0);
                        for j in 0..m {
                            s = &s + &(&cx[i][j][k] * &uj[j]);
                        }
                        s
                    })
                    .collect()
            })
            .collect();

        // lift-frame blocks
        let block = |w0: &Jet, w1: &Jet, k: usize, l: usize| -> Jet {
            &(w0 * &gx[k][l]) + &(&(w1 * &gu[k]) * &gu[l])
        };
        let mut hh = vec![vec![Jet::constant(n, order, 0.0); m]; m];
        let mut hv = vec![vec![Jet::constant(n, order, 0.0); m]; m];
        let mut vv = vec![vec![Jet::constant(n, order, 0.0); m]; m];
        for k in 0..m {
            for l in 0..m {
                hh[k][l] = block(&a13, &b13, k, l);
                hv[k][l] = block(&a2, &b2, k, l);
                vv[k][l] = block(&a1, &b1, k, l);
            }
        }

        // conjugate by T = [[I, 0], [C, I]]: d/dx_k = (e_k)^h + C^i_k (e_i)^v
        let mut out = vec![vec![Jet::constant(n, order, 0.0); n]; n];
        for k in 0..m {
            for l in 0..m {
                let mut xx = hh[k][l].clone();
                for i in 0..m {
                    xx = &xx + &(&c[i][k] * &hv[l][i]);
                    xx = &xx + &(&c[i][l] * &hv[k][i]);
                    for j in 0..m {
                        xx = &xx + &(&(&c[i][k] * &c[j][l]) * &vv[i][j]);
                    }
                }
                out[k][l] = xx;
                let mut xu = hv[k][l].clone();
                for i in 0..m {
                    xu = &xu + &(&c[i][k] * &vv[i][l]);
                }
                out[k][m + l] = xu.clone();
                out[m + l][k] = xu;
                out[m + k][m + l] = vv[k][l].clone();
            }
        }
        Ok(out)
    }

    /// A basis of the normal space of the zero section at `x`, returned
    /// G-orthogonal (not normalized, since the restriction need not be
    /// definite). Errors when the normal space is degenerate, which
    /// happens exactly when `a2(0) = 0` and `(a1 + a3)(0) = 0`.
    pub fn zero_section_normal_basis(&self) -> Result<Vec<LiftedVector>> {
        if !self.point.is_zero_section() {
            return Err(GnatError::Degenerate {
                t: self.point.t,
                witness: "normal basis of the zero section needs u = 0".into(),
            });
        }
        let m = self.dim();
        let s = &self.scalars;
        let a2 = s.a2.v;
        let a13 = s.a1.v + s.a3.v;
        if a2 == 0.0 && a13 == 0.0 {
            return Err(GnatError::Degenerate {
                t: 0.0,
                witness: "a2(0) and (a1 + a3)(0) both vanish; the normal space is degenerate"
                    .into(),
            });
        }
        let mut basis: Vec<LiftedVector> = (0..m)
            .map(|k| {
                let mut e = vec![0.0; m];
                e[k] = 1.0;
                if a2 != 0.0 {
                    // G(X^h + W^v, Y^h) = 0 for all Y forces W = -((a1+a3)/a2) X
                    let w: Vec<f64> = e.iter().map(|c| -c * a13 / a2).collect();
                    LiftedVector::new(e, w)
                } else {
                    LiftedVector::vertical(&e)
                }
            })
            .collect();
        // G-orthogonalize the pair; swap first if the leading norm vanishes
        let n0 = self.metric_on_lifts(&basis[0], &basis[0]);
        if n0.abs() < 1e-14 {
            basis.swap(0, 1);
        }
        let n0 = self.metric_on_lifts(&basis[0], &basis[0]);
        if n0.abs() < 1e-14 {
            return Err(GnatError::SingularFrame(
                "zero-section normal vectors are null".into(),
            ));
        }
        let cross = self.metric_on_lifts(&basis[0], &basis[1]);
        let corrected = basis[1].add(&basis[0].scale(-cross / n0));
        basis[1] = corrected;
        Ok(basis)
    }
}
