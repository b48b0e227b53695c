//! Osserman diagnostics: does the Jacobi spectrum depend on the direction?
//!
//! At each sampled bundle point, a deterministic set of G-unit directions
//! is drawn by mapping a low-discrepancy design on the round 3-sphere
//! through a G-orthonormal frame. The sorted spectra are compared with the
//! sup metric; the spread within one point decides the pointwise verdict,
//! the spread across all points the global one. Non-Riemannian metrics
//! are refused: the comparison presumes real spectra in an orthonormal
//! frame.

use crate::bundle::{BundleContext, BundlePoint};
use crate::chart::MetricChart;
use crate::curvature::BundleCurvature;
use crate::error::{GnatError, Result};
use crate::frames::orthonormal_frame;
use crate::generators::GeneratorSet;
use crate::linalg;
use serde::Serialize;

/// Default number of directions sampled per point.
pub const DEFAULT_DIRECTIONS: usize = 60;

/// Deterministic low-discrepancy points on the unit 3-sphere: a Kronecker
/// sequence driven by the quartic analogue of the golden ratio (the real
/// root of `x^4 = x + 1`), pushed through Hopf coordinates so the points
/// distribute uniformly.
pub fn s3_design(n: usize) -> Vec<[f64; 4]> {
    const ROOT: f64 = 1.220744084605759; // x^4 = x + 1
    let a1 = 1.0 / ROOT;
    let a2 = a1 / ROOT;
    let a3 = a2 / ROOT;
    let tau = 2.0 * std::f64::consts::PI;
    (0..n)
        .map(|k| {
            let kk = k as f64 + 0.5;
            let w = (kk * a1).fract();
            let xi1 = tau * (kk * a2).fract();
            let xi2 = tau * (kk * a3).fract();
            let eta = w.sqrt().asin();
            [
                eta.sin() * xi1.cos(),
                eta.sin() * xi1.sin(),
                eta.cos() * xi2.cos(),
                eta.cos() * xi2.sin(),
            ]
        })
        .collect()
}

/// Whether a verdict talks about one point or the whole sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OssermanScope {
    PointwiseAtX,
    Global,
}

/// Outcome of a spectrum-spread comparison.
#[derive(Clone, Debug, Serialize)]
pub struct OssermanVerdict {
    pub scope: OssermanScope,
    /// Index into the sampled points for pointwise verdicts.
    pub point_index: Option<usize>,
    /// True when the spread stays below the tolerance.
    pub is_osserman: bool,
    /// Sup-metric diameter of the set of sorted normalized spectra.
    pub spectrum_spread: f64,
    /// Induced components of a pair of directions realizing the spread.
    pub witnesses: Option<(Vec<f64>, Vec<f64>)>,
}

/// One sampled direction with its spectrum. Directions are G-unit, so the
/// eigenvalues are already normalized.
#[derive(Clone, Debug, Serialize)]
pub struct OssermanSample {
    pub point_index: usize,
    /// Induced components of the G-unit direction.
    pub direction: Vec<f64>,
    /// Sorted eigenvalues of its Jacobi operator.
    pub spectrum: Vec<f64>,
}

/// Pointwise verdicts for every sampled point plus the global verdict.
#[derive(Clone, Debug, Serialize)]
pub struct OssermanReport {
    pub tolerance: f64,
    pub samples: Vec<OssermanSample>,
    pub pointwise: Vec<OssermanVerdict>,
    pub global: OssermanVerdict,
}

/// Sup-distance diameter of a family of sorted spectra along with the
/// indices of a realizing pair. For sorted vectors the diameter is the
/// largest coordinate range.
fn spread_of(spectra: &[&Vec<f64>]) -> (f64, usize, usize) {
    let mut best = (0.0f64, 0usize, 0usize);
    if spectra.is_empty() {
        return best;
    }
    let len = spectra[0].len();
    for c in 0..len {
        let mut lo = (f64::INFINITY, 0usize);
        let mut hi = (f64::NEG_INFINITY, 0usize);
        for (i, s) in spectra.iter().enumerate() {
            if s[c] < lo.0 {
                lo = (s[c], i);
            }
            if s[c] > hi.0 {
                hi = (s[c], i);
            }
        }
        let range = hi.0 - lo.0;
        if range > best.0 {
            best = (range, lo.1, hi.1);
        }
    }
    best
}

/// Samples Jacobi spectra over G-unit directions at each point and
/// reports whether they agree within the tolerance, per point and across
/// the whole sample. The metric must be Riemannian at every sampled `t`.
pub fn osserman_test(
    gen: &GeneratorSet,
    chart: &MetricChart,
    points: &[BundlePoint],
    directions_per_point: usize,
    tolerance: f64,
) -> Result<OssermanReport> {
    if points.is_empty() {
        return Err(GnatError::EmptySample("no bundle points to test"));
    }
    if directions_per_point == 0 {
        return Err(GnatError::EmptySample("no directions per point"));
    }
    let design = s3_design(directions_per_point);
    let mut samples: Vec<OssermanSample> = Vec::new();
    let mut pointwise = Vec::new();
    for (pi, p) in points.iter().enumerate() {
        let ctx = BundleContext::at_point(gen, chart, p.clone())?;
        let s = &ctx.scalars;
        for (name, value) in [
            ("a1", s.a1.v),
            ("p1", s.p1.v),
            ("adet", s.adet.v),
            ("pdet", s.pdet.v),
        ] {
            if !(value > 0.0) {
                return Err(GnatError::SignCondition {
                    scalar: name,
                    value,
                    t: p.t,
                });
            }
        }
        let curv = BundleCurvature::at(&ctx)?;
        let frame = orthonormal_frame(&ctx, &curv.gram.values)?;
        // P J F is the matrix in the orthonormal frame, with P = F^T G
        let pmat = linalg::mat_mul(&linalg::transpose(&frame), &curv.gram.values);
        let point_start = samples.len();
        for c in design.iter() {
            let w = linalg::mat_vec(&frame, c);
            let j = curv.jacobi_matrix(&w);
            let mut m_on = linalg::mat_mul(&pmat, &linalg::mat_mul(&j, &frame));
            for i in 0..4 {
                for jj in 0..i {
                    let avg = 0.5 * (m_on[i][jj] + m_on[jj][i]);
                    m_on[i][jj] = avg;
                    m_on[jj][i] = avg;
                }
            }
            let (eigs, _) = crate::eigen::sym_eigen(&m_on)?;
            samples.push(OssermanSample {
                point_index: pi,
                direction: w,
                spectrum: eigs,
            });
        }
        let here: Vec<&Vec<f64>> = samples[point_start..].iter().map(|s| &s.spectrum).collect();
        let (spread, lo, hi) = spread_of(&here);
        pointwise.push(OssermanVerdict {
            scope: OssermanScope::PointwiseAtX,
            point_index: Some(pi),
            is_osserman: spread < tolerance,
            spectrum_spread: spread,
            witnesses: Some((
                samples[point_start + lo].direction.clone(),
                samples[point_start + hi].direction.clone(),
            )),
        });
    }
    let all: Vec<&Vec<f64>> = samples.iter().map(|s| &s.spectrum).collect();
    let (spread, lo, hi) = spread_of(&all);
    let global = OssermanVerdict {
        scope: OssermanScope::Global,
        point_index: None,
        is_osserman: spread < tolerance,
        spectrum_spread: spread,
        witnesses: Some((samples[lo].direction.clone(), samples[hi].direction.clone())),
    };
    Ok(OssermanReport {
        tolerance,
        samples,
        pointwise,
        global,
    })
}
