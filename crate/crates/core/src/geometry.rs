//! Intrinsic geometry of the base surface at a point.
//!
//! [`ChartPoint`] caches the metric jets (order 3) and Christoffel jets
//! (order 2) at one point of a chart; curvature, rotation and Jacobi
//! operators are read off from those jets. All derivatives come from the
//! jet arithmetic, finite differences are used only in tests.
//!
//! Curvature sign convention, fixed here once for base and bundle alike:
//! `R(X,Y)Z` is oriented so that on an oriented surface of Gauss curvature
//! `k` it equals `k g(iX, Y) iZ`, where `i` is the rotation by +90 degrees.
//! On the round sphere this makes the nonzero Jacobi eigenvalue `+k`.

use crate::chart::MetricChart;
use crate::error::{GnatError, Result};
use crate::jet::Jet;
use crate::linalg::{self, Mat};

/// Pivot floor for inverting the metric value matrix inside jet arithmetic.
const METRIC_PIVOT_FLOOR: f64 = 1e-13;

/// A chart point with cached metric jets (order 3) and Christoffel jets
/// (order 2).
pub struct ChartPoint<'c> {
    chart: &'c MetricChart,
    x: Vec<f64>,
    g: Vec<Vec<Jet>>,
    gamma: Vec<Vec<Vec<Jet>>>,
}

/// Connection and curvature data at a chart point, value level.
///
/// Index conventions: `christoffel[i][j][k]` is `Γ^i_{jk}`;
/// `riemann[l][i][j][k]` holds `R(∂_i, ∂_j)∂_k = Σ_l R^l_{ijk} ∂_l`;
/// `lowered[l][i][j][k]` is `g_{lm} R^m_{ijk} = g(R(∂_i,∂_j)∂_k, ∂_l)`.
pub struct CurvaturePack {
    pub christoffel: Vec<Vec<Vec<f64>>>,
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
    pub lowered: Vec<Vec<Vec<Vec<f64>>>>,
    /// Gauss curvature; present for two-dimensional charts.
    pub gauss: Option<f64>,
}

impl<'c> ChartPoint<'c> {
    pub fn new(chart: &'c MetricChart, x: &[f64]) -> Result<Self> {
        let g = chart.metric_jets(x, 3)?;
        let gamma = christoffel_jets(&g)?;
        Ok(ChartPoint {
            chart,
            x: x.to_vec(),
            g,
            gamma,
        })
    }

    pub fn chart(&self) -> &MetricChart {
        self.chart
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Metric component jets, order 3.
    pub fn metric_jets(&self) -> &Vec<Vec<Jet>> {
        &self.g
    }

    /// Christoffel symbol jets `Γ^i_{jk}`, order 2.
    pub fn christoffel_jets(&self) -> &Vec<Vec<Vec<Jet>>> {
        &self.gamma
    }

    pub fn metric_values(&self) -> Mat {
        self.g
            .iter()
            .map(|row| row.iter().map(|j| j.value()).collect())
            .collect()
    }

    /// `g_x(a, b)`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let m = self.dim();
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += self.g[i][j].value() * a[i] * b[j];
            }
        }
        s
    }

    /// Connection and curvature values, with the Gauss curvature read off by
    /// contracting the curvature tensor against the rotation operator.
    pub fn curvature(&self) -> Result<CurvaturePack> {
        let m = self.dim();
        let christoffel: Vec<Vec<Vec<f64>>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| (0..m).map(|k| self.gamma[i][j][k].value()).collect())
                    .collect()
            })
            .collect();

        // R^l_{ijk} = ∂_j Γ^l_{ik} - ∂_i Γ^l_{jk} + Γ^l_{jm} Γ^m_{ik} - Γ^l_{im} Γ^m_{jk}
        let mut riemann = vec![vec![vec![vec![0.0; m]; m]; m]; m];
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let mut v =
                            self.gamma[l][i][k].d(j) - self.gamma[l][j][k].d(i);
                        for q in 0..m {
                            v += christoffel[l][j][q] * christoffel[q][i][k]
                                - christoffel[l][i][q] * christoffel[q][j][k];
                        }
                        riemann[l][i][j][k] = v;
                    }
                }
            }
        }

        let gv = self.metric_values();
        let mut lowered = vec![vec![vec![vec![0.0; m]; m]; m]; m];
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let mut v = 0.0;
                        for q in 0..m {
                            v += gv[l][q] * riemann[q][i][j][k];
                        }
                        lowered[l][i][j][k] = v;
                    }
                }
            }
        }

        let gauss = if m == 2 {
            // k = g(R(∂_0, ∂_1)∂_0, ∂_1) / det g, since g(i∂_0, ∂_1) = sqrt(det g)
            let d = linalg::det(&gv);
            Some(lowered[1][0][1][0] / d)
        } else {
            None
        };

        Ok(CurvaturePack {
            christoffel,
            riemann,
            lowered,
            gauss,
        })
    }

    /// Rotation by +90 degrees in the oriented tangent plane: `iX` is the
    /// unique vector with `g(iX, X) = 0`, `|iX| = |X|`, and `(X, iX)`
    /// positively oriented. On an orthonormal frame this is
    /// `(X^1, X^2) -> (-X^2, X^1)`.
    pub fn rotation(&self, x_vec: &[f64]) -> Result<Vec<f64>> {
        if self.dim() != 2 {
            return Err(GnatError::SurfaceOnly {
                op: "rotation",
                dim: self.dim(),
            });
        }
        let gv = self.metric_values();
        let d = linalg::det(&gv).sqrt();
        // g(iX, Y) = area(X, Y) for all Y: solve g (iX) = sqrt(det g) (-X^2, X^1)
        let w = vec![-d * x_vec[1], d * x_vec[0]];
        linalg::solve(&gv, &w).ok_or_else(|| GnatError::SingularFrame("metric".into()))
    }

    /// Matrix of the Jacobi operator `J_X = R(X, ·)X` in the coordinate
    /// frame: `(J_X)^l_j = R^l_{ijk} X^i X^k`.
    pub fn jacobi_matrix(&self, x_vec: &[f64]) -> Result<Mat> {
        let m = self.dim();
        let pack = self.curvature()?;
        let mut mat = linalg::zeros(m, m);
        for l in 0..m {
            for j in 0..m {
                let mut v = 0.0;
                for i in 0..m {
                    for k in 0..m {
                        v += pack.riemann[l][i][j][k] * x_vec[i] * x_vec[k];
                    }
                }
                mat[l][j] = v;
            }
        }
        Ok(mat)
    }

    /// Eigenvalues of the base Jacobi operator, sorted ascending. The
    /// operator is conjugated into a g-orthonormal frame, where
    /// self-adjointness makes the matrix symmetric.
    pub fn jacobi_eigenvalues(&self, x_vec: &[f64]) -> Result<Vec<f64>> {
        let m = self.dim();
        let mat = self.jacobi_matrix(x_vec)?;
        let frame = gram_schmidt(&self.metric_values())?;
        // frame columns are orthonormal: F^T g F = I, so F^{-1} = F^T g
        let gv = self.metric_values();
        let gj = linalg::mat_mul(&gv, &mat);
        let sym = linalg::mat_mul(&linalg::transpose(&frame), &linalg::mat_mul(&gj, &frame));
        let asym: f64 = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .map(|(i, j)| (sym[i][j] - sym[j][i]).abs())
            .fold(0.0, f64::max);
        debug_assert!(asym < 1e-8 * linalg::frobenius(&sym).max(1.0));
        let (eigs, _) = crate::eigen::sym_eigen(&sym)?;
        Ok(eigs)
    }
}

/// Christoffel jets from metric jets: consumes one derivative order.
fn christoffel_jets(g: &[Vec<Jet>]) -> Result<Vec<Vec<Vec<Jet>>>> {
    let m = g.len();
    let g2: Vec<Vec<Jet>> = g
        .iter()
        .map(|row| row.iter().map(|j| j.truncate(2)).collect())
        .collect();
    let ginv = linalg::jet_inverse(&g2, METRIC_PIVOT_FLOOR)
        .ok_or_else(|| GnatError::SingularFrame("metric value matrix".into()))?;
    let mut gamma =
        vec![vec![vec![Jet::constant(m, 2, 0.0); m]; m]; m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut s = Jet::constant(m, 2, 0.0);
                for l in 0..m {
                    let inner = &(&g[l][k].partial(j) + &g[l][j].partial(k))
                        - &g[j][k].partial(l);
                    s = &s + &(&ginv[i][l] * &inner);
                }
                gamma[i][j][k] = s.scale(0.5);
            }
        }
    }
    Ok(gamma)
}

/// Columns of the returned matrix form a g-orthonormal basis obtained by
/// Gram-Schmidt over the coordinate frame.
pub fn gram_schmidt(g: &Mat) -> Result<Mat> {
    let m = g.len();
    let mut cols: Vec<Vec<f64>> = (0..m)
        .map(|j| (0..m).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let inner = |a: &[f64], b: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += g[i][j] * a[i] * b[j];
            }
        }
        s
    };
    for j in 0..m {
        for k in 0..j {
            let proj = inner(&cols[j], &cols[k]);
            let prev = cols[k].clone();
            for (c, p) in cols[j].iter_mut().zip(prev) {
                *c -= proj * p;
            }
        }
        let norm2 = inner(&cols[j], &cols[j]);
        if norm2 <= 1e-14 {
            return Err(GnatError::SingularFrame(format!(
                "vector {j} collapses under Gram-Schmidt (norm^2 = {norm2:.3e})"
            )));
        }
        let inv = 1.0 / norm2.sqrt();
        for c in cols[j].iter_mut() {
            *c *= inv;
        }
    }
    let mut f = linalg::zeros(m, m);
    for j in 0..m {
        for i in 0..m {
            f[i][j] = cols[j][i];
        }
    }
    Ok(f)
}
