//! Connection and curvature of the bundle metric.
//!
//! Everything is computed in the induced coordinate frame of the bundle
//! chart `(x, u)` from the order-2 Gram jets: Christoffel symbols keep one
//! derivative order, the curvature tensor uses their values and first
//! partials. The index convention matches the base module:
//!
//! ```text
//! R^D_{ABC} = d_B Gamma^D_{AC} - d_A Gamma^D_{BC}
//!           + Gamma^D_{BE} Gamma^E_{AC} - Gamma^D_{AE} Gamma^E_{BC}
//! ```
//!
//! so that `R(e_A, e_B) e_C = R^D_{ABC} e_D` and the Jacobi operator
//! `J_W = R(W, .) W` has matrix `(J_W)^D_B = R^D_{ABC} W^A W^C`.

use crate::bundle::{BundleContext, LiftedVector};
use crate::error::{GnatError, Result};
use crate::jet::Jet;
use crate::linalg::{self, Mat};

/// Pivot floor for inverting the Gram jet matrix.
const GRAM_PIVOT_FLOOR: f64 = 1e-13;

/// Which lift a base vector is given before differentiating.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftKind {
    Horizontal,
    Vertical,
}

/// Connection and curvature data of the bundle metric at one point.
pub struct BundleCurvature {
    /// Dimension of the total space, `2m`.
    pub dim: usize,
    /// The induced-frame Gram matrix with its order-2 jets.
    pub gram: crate::bundle::BundleMetricMatrix,
    /// Christoffel symbols as order-1 jets, indexed `[target][lower][lower]`.
    pub christoffel: Vec<Vec<Vec<Jet>>>,
    /// `R^D_{ABC}` values, indexed `[D][A][B][C]`.
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
    /// `R_{ABCD} = G_{DE} R^E_{ABC}` stored as `lowered[D][A][B][C]`.
    pub lowered: Vec<Vec<Vec<Vec<f64>>>>,
}

impl BundleCurvature {
    /// Builds the curvature data at the context's point. A Gram matrix
    /// below the degeneracy floor is refused rather than inverted.
    pub fn at(ctx: &BundleContext) -> Result<BundleCurvature> {
        let gram = ctx.gram_induced()?;
        if !gram.nondegenerate {
            return Err(GnatError::Degenerate {
                t: ctx.point.t,
                witness: format!("bundle Gram determinant {:e} is below the floor", gram.det),
            });
        }
        let jets = gram.jets.as_ref().expect("induced Gram carries jets");
        let n = jets.len();

        // Gamma^A_{BC} = 1/2 G^{AD} (d_B G_{DC} + d_C G_{DB} - d_D G_{BC})
        let g1: Vec<Vec<Jet>> = jets
            .iter()
            .map(|row| row.iter().map(|j| j.truncate(1)).collect())
            .collect();
        let ginv = linalg::jet_inverse(&g1, GRAM_PIVOT_FLOOR)
            .ok_or_else(|| GnatError::SingularFrame("bundle Gram matrix".into()))?;
        let mut christoffel = vec![vec![vec![Jet::constant(n, 1, 0.0); n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = Jet::constant(n, 1, 0.0);
                    for d in 0..n {
                        let term = &(&jets[d][c].partial(b) + &jets[d][b].partial(c))
                            - &jets[b][c].partial(d);
                        s = &s + &(&ginv[a][d] * &term);
                    }
                    christoffel[a][b][c] = s.scale(0.5);
                }
            }
        }

        let mut riemann = vec![vec![vec![vec![0.0; n]; n]; n]; n];
        for d in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut v = christoffel[d][a][c].d(b) - christoffel[d][b][c].d(a);
                        for e in 0..n {
                            v += christoffel[d][b][e].value() * christoffel[e][a][c].value()
                                - christoffel[d][a][e].value() * christoffel[e][b][c].value();
                        }
                        riemann[d][a][b][c] = v;
                    }
                }
            }
        }

        let mut lowered = vec![vec![vec![vec![0.0; n]; n]; n]; n];
        for d in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut v = 0.0;
                        for e in 0..n {
                            v += gram.values[d][e] * riemann[e][a][b][c];
                        }
                        lowered[d][a][b][c] = v;
                    }
                }
            }
        }

        Ok(BundleCurvature {
            dim: n,
            gram,
            christoffel,
            riemann,
            lowered,
        })
    }

    /// Christoffel values at the point.
    pub fn christoffel_values(&self) -> Vec<Vec<Vec<f64>>> {
        self.christoffel
            .iter()
            .map(|m| {
                m.iter()
                    .map(|r| r.iter().map(|j| j.value()).collect())
                    .collect()
            })
            .collect()
    }

    /// Matrix of the Jacobi operator of an induced-frame direction:
    /// `(J_W)^D_B = R^D_{ABC} W^A W^C`.
    pub fn jacobi_matrix(&self, w: &[f64]) -> Mat {
        let n = self.dim;
        assert_eq!(w.len(), n);
        let mut mat = linalg::zeros(n, n);
        for d in 0..n {
            for b in 0..n {
                let mut v = 0.0;
                for a in 0..n {
                    for c in 0..n {
                        v += self.riemann[d][a][b][c] * w[a] * w[c];
                    }
                }
                mat[d][b] = v;
            }
        }
        mat
    }
}

/// Covariant derivative of a lifted coordinate-constant base vector field
/// along another lift, at a zero-section point. Horizontal lifts acquire
/// the `u`-dependent vertical correction `-Gamma^i_{jk} u^j Y^k`, whose
/// only surviving derivative at `u = 0` is in vertical directions.
pub fn covariant_derivative_lifted(
    ctx: &BundleContext,
    curv: &BundleCurvature,
    x_vec: &[f64],
    y_vec: &[f64],
    kind_x: LiftKind,
    kind_y: LiftKind,
) -> Result<LiftedVector> {
    if !ctx.point.is_zero_section() {
        return Err(GnatError::Degenerate {
            t: ctx.point.t,
            witness: "lifted covariant derivatives are evaluated on the zero section".into(),
        });
    }
    let m = ctx.dim();
    let n = 2 * m;
    if x_vec.len() != m || y_vec.len() != m {
        return Err(GnatError::Dimension {
            expected: m,
            got: x_vec.len().max(y_vec.len()),
        });
    }
    // induced components at u = 0 coincide with lift components
    let mut dir = vec![0.0; n];
    let mut field = vec![0.0; n];
    for i in 0..m {
        match kind_x {
            LiftKind::Horizontal => dir[i] = x_vec[i],
            LiftKind::Vertical => dir[m + i] = x_vec[i],
        }
        match kind_y {
            LiftKind::Horizontal => field[i] = y_vec[i],
            LiftKind::Vertical => field[m + i] = y_vec[i],
        }
    }
    let mut out = vec![0.0; n];
    // directional derivative of the field components
    if kind_y == LiftKind::Horizontal && kind_x == LiftKind::Vertical {
        let gamma = ctx.base.christoffel_jets();
        for i in 0..m {
            for l in 0..m {
                for k in 0..m {
                    out[m + i] -= gamma[i][l][k].value() * x_vec[l] * y_vec[k];
                }
            }
        }
    }
    // connection term
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                out[a] += curv.christoffel[a][b][c].value() * dir[b] * field[c];
            }
        }
    }
    Ok(LiftedVector::new(out[..m].to_vec(), out[m..].to_vec()))
}

/// How far the zero section is from being totally geodesic at `x` in the
/// directions `X, Y`: the vertical part of the ambient derivative plus the
/// deviation of its horizontal part from the base connection.
pub fn totally_geodesic_residual(
    ctx: &BundleContext,
    curv: &BundleCurvature,
    x_vec: &[f64],
    y_vec: &[f64],
) -> Result<f64> {
    let m = ctx.dim();
    let w = covariant_derivative_lifted(
        ctx,
        curv,
        x_vec,
        y_vec,
        LiftKind::Horizontal,
        LiftKind::Horizontal,
    )?;
    let gamma = ctx.base.christoffel_jets();
    let mut base = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                base[i] += gamma[i][j][k].value() * x_vec[j] * y_vec[k];
            }
        }
    }
    let vert: f64 = w.v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let horiz: f64 = w
        .h
        .iter()
        .zip(&base)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(vert + horiz)
}
