//! Coordinate charts for the base surface.
//!
//! A chart holds the metric components as closed-form expressions together
//! with an open box domain. Three presets cover the constant-curvature
//! model surfaces; arbitrary metrics enter as expression tables. Positive
//! definiteness is probed by pivoted factorization at every evaluation and
//! failure is a hard error, never a warning.

use serde::{Deserialize, Serialize};

use crate::error::{GnatError, Result};
use crate::expr::Expr;
use crate::jet::Jet;
use crate::linalg::{self, Mat};

/// Margin kept away from coordinate singularities of the preset charts.
pub const DOMAIN_MARGIN: f64 = 1e-3;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricChart {
    name: String,
    dim: usize,
    /// Upper triangle of the metric component table, row-major:
    /// `g_00, g_01, .., g_11, ..`.
    comps: Vec<Expr>,
    /// Open box domain; use infinities for unbounded coordinates.
    mins: Vec<f64>,
    maxs: Vec<f64>,
    /// Gauss curvature when it is constant by construction.
    constant_curvature: Option<f64>,
}

impl MetricChart {
    /// Euclidean plane, identity metric. Lives on all of R^2; the periodic
    /// identification of a torus never matters for pointwise curvature.
    pub fn flat() -> MetricChart {
        MetricChart {
            name: "flat".into(),
            dim: 2,
            comps: vec![Expr::constant(1.0), Expr::constant(0.0), Expr::constant(1.0)],
            mins: vec![f64::NEG_INFINITY; 2],
            maxs: vec![f64::INFINITY; 2],
            constant_curvature: Some(0.0),
        }
    }

    /// Round sphere of radius `r` in polar coordinates `(theta, phi)`:
    /// `g = diag(r^2, r^2 sin^2 theta)`, with a safety margin at the poles.
    pub fn sphere(radius: f64) -> Result<MetricChart> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GnatError::Config(format!(
                "sphere radius must be positive and finite, got {radius}"
            )));
        }
        let r2 = Expr::constant(radius * radius);
        Ok(MetricChart {
            name: format!("sphere:{radius}"),
            dim: 2,
            comps: vec![
                r2.clone(),
                Expr::constant(0.0),
                Expr::Mul {
                    args: vec![
                        r2,
                        Expr::Pow {
                            base: Box::new(Expr::Sin {
                                arg: Box::new(Expr::var(0)),
                            }),
                            exp: 2,
                        },
                    ],
                },
            ],
            mins: vec![DOMAIN_MARGIN, f64::NEG_INFINITY],
            maxs: vec![std::f64::consts::PI - DOMAIN_MARGIN, f64::INFINITY],
            constant_curvature: Some(1.0 / (radius * radius)),
        })
    }

    /// Hyperbolic upper half-plane `(x, y)`, `g = diag(1/y^2, 1/y^2)`,
    /// curvature -1, kept away from the boundary `y = 0`.
    pub fn hyperbolic() -> MetricChart {
        let inv_y2 = Expr::Pow {
            base: Box::new(Expr::var(1)),
            exp: -2,
        };
        MetricChart {
            name: "hyperbolic".into(),
            dim: 2,
            comps: vec![inv_y2.clone(), Expr::constant(0.0), inv_y2],
            mins: vec![f64::NEG_INFINITY, DOMAIN_MARGIN],
            maxs: vec![f64::INFINITY, f64::INFINITY],
            constant_curvature: Some(-1.0),
        }
    }

    /// Chart from an explicit component table (upper triangle, row-major:
    /// for a surface `[g_00, g_01, g_11]`). `mins`/`maxs` bound the open
    /// domain; pass infinities for unbounded coordinates.
    pub fn custom(
        name: &str,
        dim: usize,
        comps: Vec<Expr>,
        mins: Vec<f64>,
        maxs: Vec<f64>,
    ) -> Result<MetricChart> {
        if dim == 0 {
            return Err(GnatError::Config("chart dimension must be at least 1".into()));
        }
        let need = dim * (dim + 1) / 2;
        if comps.len() != need {
            return Err(GnatError::Config(format!(
                "metric table for dimension {dim} needs {need} components, got {}",
                comps.len()
            )));
        }
        if mins.len() != dim || maxs.len() != dim {
            return Err(GnatError::Config("domain bounds must match the dimension".into()));
        }
        for c in &comps {
            if let Some(ix) = c.max_var_index() {
                if ix >= dim {
                    return Err(GnatError::Config(format!(
                        "metric component references variable {ix}, chart has dimension {dim}"
                    )));
                }
            }
        }
        Ok(MetricChart {
            name: name.into(),
            dim,
            comps,
            mins,
            maxs,
            constant_curvature: None,
        })
    }

    /// Resolve a preset name: `flat`, `hyperbolic`, or `sphere:<radius>`.
    pub fn from_preset(name: &str) -> Result<MetricChart> {
        match name {
            "flat" => Ok(MetricChart::flat()),
            "hyperbolic" => Ok(MetricChart::hyperbolic()),
            _ => {
                if let Some(r) = name.strip_prefix("sphere:") {
                    let radius: f64 = r
                        .parse()
                        .map_err(|_| GnatError::UnknownPreset(name.to_string()))?;
                    MetricChart::sphere(radius)
                } else if name == "sphere" {
                    MetricChart::sphere(1.0)
                } else {
                    Err(GnatError::UnknownPreset(name.to_string()))
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Gauss curvature when the chart is constant-curvature by construction.
    pub fn known_constant_curvature(&self) -> Option<f64> {
        self.constant_curvature
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && x.iter().all(|v| v.is_finite())
            && x.iter()
                .zip(self.mins.iter().zip(&self.maxs))
                .all(|(v, (lo, hi))| v > lo && v < hi)
    }

    fn component(&self, i: usize, j: usize) -> &Expr {
        // upper-triangle storage with (i, j) sorted
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let idx = a * self.dim - a * (a + 1) / 2 + b;
        &self.comps[idx]
    }

    /// Metric component jets `g_ij` at `x`, carrying derivatives to `order`.
    /// Checks the domain and positive definiteness.
    pub fn metric_jets(&self, x: &[f64], order: usize) -> Result<Vec<Vec<Jet>>> {
        if x.len() != self.dim {
            return Err(GnatError::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        if !self.contains(x) {
            return Err(GnatError::OutsideDomain {
                chart: self.name.clone(),
                point: x.to_vec(),
            });
        }
        let vars: Vec<Jet> = (0..self.dim)
            .map(|i| Jet::variable(self.dim, order, i, x[i]))
            .collect();
        let mut g = vec![vec![Jet::constant(self.dim, order, 0.0); self.dim]; self.dim];
        for i in 0..self.dim {
            for j in i..self.dim {
                let jet = self.component(i, j).eval(&vars);
                if !jet.value().is_finite() {
                    return Err(GnatError::Degenerate {
                        t: 0.0,
                        witness: format!("metric component g_{i}{j} is not finite at {x:?}"),
                    });
                }
                g[i][j] = jet.clone();
                g[j][i] = jet;
            }
        }
        let vals: Mat = g
            .iter()
            .map(|row| row.iter().map(|j| j.value()).collect())
            .collect();
        let pivot = linalg::min_cholesky_pivot(&vals);
        if pivot <= 0.0 {
            return Err(GnatError::NotPositiveDefinite {
                chart: self.name.clone(),
                point: x.to_vec(),
                pivot,
            });
        }
        Ok(g)
    }

    /// Metric values only.
    pub fn metric_values(&self, x: &[f64]) -> Result<Mat> {
        let g = self.metric_jets(x, 0)?;
        Ok(g.iter()
            .map(|row| row.iter().map(|j| j.value()).collect())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn sphere_metric_at_equator() {
        let c = MetricChart::sphere(1.0).unwrap();
        let g = c.metric_jets(&[FRAC_PI_2, 0.3], 3).unwrap();
        assert!((g[0][0].value() - 1.0).abs() < 1e-15);
        assert!((g[1][1].value() - 1.0).abs() < 1e-15);
        assert_eq!(g[0][1].value(), 0.0);
        // d/dtheta g_phiphi = 2 sin(theta) cos(theta) = 0 at the equator
        assert!(g[1][1].d(0).abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_metric_derivative() {
        let c = MetricChart::hyperbolic();
        let g = c.metric_jets(&[0.0, 1.0], 3).unwrap();
        // d/dy y^-2 = -2 at y = 1
        assert!((g[0][0].d(1) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn domain_is_enforced() {
        let c = MetricChart::sphere(1.0).unwrap();
        assert!(matches!(
            c.metric_jets(&[1e-9, 0.0], 1),
            Err(GnatError::OutsideDomain { .. })
        ));
        assert!(matches!(
            c.metric_jets(&[PI, 0.0], 1),
            Err(GnatError::OutsideDomain { .. })
        ));
        assert!(c.metric_jets(&[FRAC_PI_2, 100.0], 1).is_ok());
    }

    #[test]
    fn positive_definiteness_is_a_hard_error() {
        // g = diag(x, 1) degenerates as x crosses 0
        let c = MetricChart::custom(
            "pinch",
            2,
            vec![Expr::var(0), Expr::constant(0.0), Expr::constant(1.0)],
            vec![f64::NEG_INFINITY; 2],
            vec![f64::INFINITY; 2],
        )
        .unwrap();
        assert!(c.metric_jets(&[1.0, 0.0], 2).is_ok());
        assert!(matches!(
            c.metric_jets(&[-1.0, 0.0], 2),
            Err(GnatError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn preset_names_resolve() {
        assert_eq!(MetricChart::from_preset("flat").unwrap().name(), "flat");
        assert_eq!(
            MetricChart::from_preset("sphere:2").unwrap().name(),
            "sphere:2"
        );
        assert!(MetricChart::from_preset("torus").is_err());
        assert!(MetricChart::from_preset("sphere:-1").is_err());
    }
}
