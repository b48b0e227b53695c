//! Distinguished frames of the bundle tangent space and Jacobi spectra
//! expressed in them.
//!
//! Three frames recur. At a zero-section point, a base vector `H` and its
//! rotation give `(H^h, (iH)^h, H^v, (iH)^v)`; in that frame the Jacobi
//! matrix of a G-unit `H^h` is triangular with a fixed zero pattern. Off
//! the section, the lifts of `u` and `iu` give `(u^h, (iu)^h, u^v, (iu)^v)`
//! where two entry identities and a closed-form spectrum hold over
//! constant-curvature bases. Normalizing that basis against the generator
//! scalars yields a G-orthonormal frame `v_1..v_4` in which self-adjoint
//! operators become symmetric matrices.

use crate::bundle::{BundleContext, BundlePoint, LiftedVector};
use crate::chart::MetricChart;
use crate::curvature::BundleCurvature;
use crate::error::{GnatError, Result};
use crate::generators::GeneratorSet;
use crate::geometry::{gram_schmidt, ChartPoint};
use crate::linalg::{self, Mat};

/// Which distinguished frame a basis or report refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameKind {
    /// `(H^h, (iH)^h, H^v, (iH)^v)` at a zero-section point.
    Adapted,
    /// `(u^h, (iu)^h, u^v, (iu)^v)` off the zero section.
    LiftedU,
    /// The G-orthonormal normalization `v_1..v_4` of the lifted basis.
    OrthonormalLifted,
}

impl FrameKind {
    /// Stable lowercase name for reports.
    pub fn as_str(&self) -> &'static str {
        match self {
            FrameKind::Adapted => "adapted",
            FrameKind::LiftedU => "lifted-u",
            FrameKind::OrthonormalLifted => "orthonormal-lifted",
        }
    }
}

/// Four lifted vectors forming a basis of the bundle tangent space at a
/// point.
#[derive(Clone, Debug)]
pub struct FrameBasis {
    pub point: BundlePoint,
    pub vectors: [LiftedVector; 4],
    pub kind: FrameKind,
}

impl FrameBasis {
    /// Columns are the induced components of the four frame vectors. The
    /// context must sit at the same bundle point.
    pub fn induced_matrix(&self, ctx: &BundleContext) -> Mat {
        debug_assert_eq!(ctx.point, self.point, "context at a different point");
        let mut s = linalg::zeros(4, 4);
        for (j, v) in self.vectors.iter().enumerate() {
            let w = ctx.lift_to_induced(v);
            for i in 0..4 {
                s[i][j] = w[i];
            }
        }
        s
    }
}

/// The frame `(H^h, (iH)^h, H^v, (iH)^v)` at the zero-section point over
/// `x`. `H` is used as given; unit normalization is the caller's choice.
pub fn frame_adapted(chart: &MetricChart, x: &[f64], h: &[f64]) -> Result<FrameBasis> {
    if h.iter().all(|c| *c == 0.0) {
        return Err(GnatError::ZeroVector {
            op: "zero-section frame",
        });
    }
    let base = ChartPoint::new(chart, x)?;
    let ih = base.rotation(h)?;
    let point = BundlePoint::new(chart, x, &vec![0.0; chart.dim()])?;
    Ok(FrameBasis {
        point,
        vectors: [
            LiftedVector::horizontal(h),
            LiftedVector::horizontal(&ih),
            LiftedVector::vertical(h),
            LiftedVector::vertical(&ih),
        ],
        kind: FrameKind::Adapted,
    })
}

/// The frame `(u^h, (iu)^h, u^v, (iu)^v)` at a point off the zero section.
pub fn frame_lifted_u(chart: &MetricChart, p: &BundlePoint) -> Result<FrameBasis> {
    if p.is_zero_section() {
        return Err(GnatError::ZeroVector {
            op: "lifted fiber frame",
        });
    }
    let base = ChartPoint::new(chart, &p.x)?;
    let iu = base.rotation(&p.u)?;
    Ok(FrameBasis {
        point: p.clone(),
        vectors: [
            LiftedVector::horizontal(&p.u),
            LiftedVector::horizontal(&iu),
            LiftedVector::vertical(&p.u),
            LiftedVector::vertical(&iu),
        ],
        kind: FrameKind::LiftedU,
    })
}

/// The G-orthonormal frame
///
/// ```text
/// v1 = u^h / sqrt(t (p1+p3))
/// v2 = sqrt((p1+p3)/(t pdet)) u^v - p2 / sqrt(t pdet (p1+p3)) u^h
/// v3 = (iu)^h / sqrt(t (a1+a3))
/// v4 = sqrt((a1+a3)/(t adet)) (iu)^v - a2 / sqrt(t adet (a1+a3)) (iu)^h
/// ```
///
/// Every square root argument must be positive; the first failing scalar
/// is named in the error.
pub fn frame_orthonormal_lifted(ctx: &BundleContext) -> Result<FrameBasis> {
    let p = &ctx.point;
    if p.is_zero_section() {
        return Err(GnatError::ZeroVector {
            op: "orthonormal fiber frame",
        });
    }
    let s = &ctx.scalars;
    let t = p.t;
    let p13 = s.p1.v + s.p3.v;
    let a13 = s.a1.v + s.a3.v;
    let checks: [(&'static str, f64); 4] = [
        ("t(p1+p3)", t * p13),
        ("pdet", s.pdet.v),
        ("adet", s.adet.v),
        ("a1+a3", a13),
    ];
    for (name, value) in checks {
        if !(value > 0.0) {
            return Err(GnatError::SignCondition {
                scalar: name,
                value,
                t,
            });
        }
    }
    let iu = ctx.base.rotation(&p.u)?;
    let uh = LiftedVector::horizontal(&p.u);
    let uv = LiftedVector::vertical(&p.u);
    let iuh = LiftedVector::horizontal(&iu);
    let iuv = LiftedVector::vertical(&iu);
    let v1 = uh.scale(1.0 / (t * p13).sqrt());
    let v2 = uv
        .scale((p13 / (t * s.pdet.v)).sqrt())
        .add(&uh.scale(-s.p2.v / (t * s.pdet.v * p13).sqrt()));
    let v3 = iuh.scale(1.0 / (t * a13).sqrt());
    let v4 = iuv
        .scale((a13 / (t * s.adet.v)).sqrt())
        .add(&iuh.scale(-s.a2.v / (t * s.adet.v * a13).sqrt()));
    let basis = FrameBasis {
        point: p.clone(),
        vectors: [v1, v2, v3, v4],
        kind: FrameKind::OrthonormalLifted,
    };
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { 1.0 } else { 0.0 };
            let got = ctx.metric_on_lifts(&basis.vectors[i], &basis.vectors[j]);
            if (got - want).abs() > 1e-10 {
                return Err(GnatError::SingularFrame(format!(
                    "orthonormal frame check failed at ({i},{j}): {got}"
                )));
            }
        }
    }
    Ok(basis)
}

/// Spectrum of a Jacobi operator together with its quality diagnostics.
#[derive(Clone, Debug)]
pub struct SpectrumReport {
    /// Sorted ascending, with multiplicity.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues divided by `G(X, X)` of the direction (equal to
    /// `eigenvalues` until [`SpectrumReport::with_normalization`]).
    pub normalized: Vec<f64>,
    /// Provenance of the basis the computation started from, if any.
    pub frame: Option<FrameKind>,
    /// Asymmetry of `G J` relative to its size; zero for a self-adjoint
    /// operator.
    pub self_adjoint_residual: f64,
    /// Worst `|M v - lambda v|` over recovered eigenpairs.
    pub recomposition_residual: f64,
    pub flags: Vec<String>,
}

impl SpectrumReport {
    /// Divides the normalized spectrum by `G(X, X)`.
    pub fn with_normalization(mut self, g_xx: f64) -> SpectrumReport {
        self.normalized = self.eigenvalues.iter().map(|v| v / g_xx).collect();
        self
    }
}

fn asymmetry(a: &Mat) -> f64 {
    let n = a.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[i][j] - a[j][i]).abs());
        }
    }
    worst
}

/// Eigenvalues of a small matrix: cyclic Jacobi rotations when the frame
/// is known orthonormal (`symmetric_hint`), shifted QR on a Hessenberg
/// form otherwise. Complex pairs and convergence failures are reported as
/// flags rather than errors.
pub fn spectrum(matrix: &Mat, symmetric_hint: bool) -> Result<SpectrumReport> {
    let n = matrix.len();
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(GnatError::Config("spectrum of a non-finite matrix".into()));
    }
    let mut flags = Vec::new();
    let scale = linalg::frobenius(matrix).max(1.0);
    let (eigenvalues, recomposition) = if symmetric_hint {
        match crate::eigen::sym_eigen(matrix) {
            Ok((eigs, vecs)) => {
                let mut worst = 0.0f64;
                for (idx, lam) in eigs.iter().enumerate() {
                    let v: Vec<f64> = (0..n).map(|i| vecs[i][idx]).collect();
                    let mv = linalg::mat_vec(matrix, &v);
                    let r: f64 = mv
                        .iter()
                        .zip(&v)
                        .map(|(a, b)| (a - lam * b) * (a - lam * b))
                        .sum::<f64>()
                        .sqrt();
                    worst = worst.max(r);
                }
                (eigs, worst)
            }
            Err(GnatError::EigenNoConverge(c)) => {
                flags.push(format!("no-convergence-after-{c}"));
                (vec![f64::NAN; n], f64::NAN)
            }
            Err(e) => return Err(e),
        }
    } else {
        match crate::eigen::general_eigen(matrix) {
            Ok(pairs) => {
                let mut eigs: Vec<f64> = Vec::with_capacity(n);
                for (re, im) in &pairs {
                    if im.abs() > 1e-8 * scale && !flags.iter().any(|f| f == "complex-pair") {
                        flags.push("complex-pair".to_string());
                    }
                    eigs.push(*re);
                }
                eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut worst = 0.0f64;
                let mut missing = false;
                for lam in &eigs {
                    match crate::eigen::eigenvector_for(matrix, *lam) {
                        Some(v) => {
                            let mv = linalg::mat_vec(matrix, &v);
                            let r: f64 = mv
                                .iter()
                                .zip(&v)
                                .map(|(a, b)| (a - lam * b) * (a - lam * b))
                                .sum::<f64>()
                                .sqrt();
                            worst = worst.max(r);
                        }
                        None => missing = true,
                    }
                }
                if missing {
                    flags.push("eigenvector-recovery-failed".to_string());
                }
                (eigs, worst)
            }
            Err(GnatError::EigenNoConverge(c)) => {
                flags.push(format!("no-convergence-after-{c}"));
                (vec![f64::NAN; n], f64::NAN)
            }
            Err(e) => return Err(e),
        }
    };
    Ok(SpectrumReport {
        normalized: eigenvalues.clone(),
        eigenvalues,
        frame: None,
        self_adjoint_residual: asymmetry(matrix) / scale,
        recomposition_residual: recomposition,
        flags,
    })
}

/// Matrix of the Jacobi operator of `xbar` in the given basis: the
/// conjugation `S^{-1} J S` of the induced-frame matrix.
pub fn jacobi_in_frame(
    ctx: &BundleContext,
    curv: &BundleCurvature,
    xbar: &LiftedVector,
    basis: &FrameBasis,
) -> Result<Mat> {
    let s = basis.induced_matrix(ctx);
    let sinv = linalg::inverse(&s).ok_or_else(|| {
        GnatError::SingularFrame("frame basis matrix is not invertible".into())
    })?;
    let w = ctx.lift_to_induced(xbar);
    let j = curv.jacobi_matrix(&w);
    Ok(linalg::mat_mul(&sinv, &linalg::mat_mul(&j, &s)))
}

/// A G-orthonormal frame at the context's point, as induced-component
/// columns: Gram-Schmidt over the lifted basis (`lifted_u` off the zero
/// section, the `H = e_1` zero-section frame on it). Fails when the
/// metric restricted to that flag is not positive definite.
pub fn orthonormal_frame(ctx: &BundleContext, gram_values: &Mat) -> Result<Mat> {
    let start = if ctx.point.is_zero_section() {
        let e1 = {
            let mut e = vec![0.0; ctx.dim()];
            e[0] = 1.0;
            e
        };
        frame_adapted(ctx.base.chart(), &ctx.point.x, &e1)?
    } else {
        frame_lifted_u(ctx.base.chart(), &ctx.point)?
    };
    let s = start.induced_matrix(ctx);
    let st = linalg::transpose(&s);
    let b = linalg::mat_mul(&st, &linalg::mat_mul(gram_values, &s));
    let q = gram_schmidt(&b)?;
    Ok(linalg::mat_mul(&s, &q))
}

/// Spectrum of the Jacobi operator of the induced-frame direction `w`.
/// When the Gram matrix is positive definite the operator is conjugated
/// into a G-orthonormal frame and diagonalized symmetrically; otherwise
/// the general solver runs on the induced matrix and complex pairs are
/// flagged.
pub fn operator_spectrum(
    ctx: &BundleContext,
    curv: &BundleCurvature,
    w: &[f64],
) -> Result<SpectrumReport> {
    let j = curv.jacobi_matrix(w);
    let gj = linalg::mat_mul(&curv.gram.values, &j);
    let self_adjoint = asymmetry(&gj) / linalg::max_abs(&gj).max(1.0);
    match orthonormal_frame(ctx, &curv.gram.values) {
        Ok(f) => {
            let ft = linalg::transpose(&f);
            let mut m_on = linalg::mat_mul(&ft, &linalg::mat_mul(&gj, &f));
            // symmetrize roundoff before the symmetric solver
            for i in 0..m_on.len() {
                for jj in 0..i {
                    let avg = 0.5 * (m_on[i][jj] + m_on[jj][i]);
                    m_on[i][jj] = avg;
                    m_on[jj][i] = avg;
                }
            }
            let mut report = spectrum(&m_on, true)?;
            report.self_adjoint_residual = self_adjoint;
            report.frame = Some(if ctx.point.is_zero_section() {
                FrameKind::Adapted
            } else {
                FrameKind::LiftedU
            });
            Ok(report)
        }
        Err(GnatError::SingularFrame(_)) => {
            let mut report = spectrum(&j, false)?;
            report.self_adjoint_residual = self_adjoint;
            report.flags.push("indefinite-metric".to_string());
            Ok(report)
        }
        Err(e) => Err(e),
    }
}

/// Zero-section Jacobi spectrum along a G-unit horizontal direction, with
/// the two membership distances the triangular matrix structure predicts.
#[derive(Clone, Debug)]
pub struct ZeroSectionSpectrum {
    pub report: SpectrumReport,
    /// `k(x) / (a1 + a3)(0)`.
    pub curvature_ratio: f64,
    /// Distance from the spectrum to 0.
    pub zero_distance: f64,
    /// Distance from the spectrum to the curvature ratio.
    pub ratio_distance: f64,
}

/// Spectrum of the Jacobi operator of `H^h` at `(x, 0)`, with `H`
/// rescaled to make `H^h` a G-unit vector. The spectrum always contains 0
/// and `k(x)/(a1+a3)(0)`.
pub fn zero_section_spectrum(
    gen: &GeneratorSet,
    chart: &MetricChart,
    x: &[f64],
    h: &[f64],
) -> Result<ZeroSectionSpectrum> {
    let ctx = BundleContext::new(gen, chart, x, &vec![0.0; chart.dim()])?;
    let s = &ctx.scalars;
    let a13 = s.a1.v + s.a3.v;
    let ghh = a13 * ctx.base.inner(h, h);
    if !(ghh > 0.0) {
        return Err(GnatError::SignCondition {
            scalar: "(a1+a3)(0) g(H,H)",
            value: ghh,
            t: 0.0,
        });
    }
    let hn: Vec<f64> = h.iter().map(|c| c / ghh.sqrt()).collect();
    let curv = BundleCurvature::at(&ctx)?;
    let mut w = vec![0.0; 2 * ctx.dim()];
    w[..ctx.dim()].copy_from_slice(&hn);
    let report = operator_spectrum(&ctx, &curv, &w)?.with_normalization(1.0);
    let k = ctx
        .base
        .curvature()?
        .gauss
        .expect("surface charts have a Gauss curvature");
    let ratio = k / a13;
    let dist = |target: f64| {
        report
            .eigenvalues
            .iter()
            .map(|l| (l - target).abs())
            .fold(f64::INFINITY, f64::min)
    };
    Ok(ZeroSectionSpectrum {
        zero_distance: dist(0.0),
        ratio_distance: dist(ratio),
        curvature_ratio: ratio,
        report,
    })
}

/// Zero pattern of the Jacobi matrix of a G-unit vertical direction at the
/// zero section: returns the largest magnitude over the ten entries that
/// vanish in the frame `(V^h, (iV)^h, V^v, (iV)^v)` when `g(V,V) = 1/a1(0)`.
pub fn zero_section_vertical_matrix_pattern(
    gen: &GeneratorSet,
    chart: &MetricChart,
    x: &[f64],
    v: &[f64],
) -> Result<f64> {
    let ctx = BundleContext::new(gen, chart, x, &vec![0.0; chart.dim()])?;
    let a1 = ctx.scalars.a1.v;
    if !(a1 > 0.0) {
        return Err(GnatError::SignCondition {
            scalar: "a1(0)",
            value: a1,
            t: 0.0,
        });
    }
    let gvv = ctx.base.inner(v, v);
    if !(gvv > 0.0) {
        return Err(GnatError::ZeroVector {
            op: "vertical pattern direction",
        });
    }
    // g(V, V) = 1/a1 makes V^v a G-unit vector
    let s = 1.0 / (a1 * gvv).sqrt();
    let vn: Vec<f64> = v.iter().map(|c| c * s).collect();
    let basis = frame_adapted(chart, x, &vn)?;
    let curv = BundleCurvature::at(&ctx)?;
    let m = jacobi_in_frame(&ctx, &curv, &LiftedVector::vertical(&vn), &basis)?;
    const ZERO_POSITIONS: [(usize, usize); 10] = [
        (0, 1),
        (0, 2),
        (0, 3),
        (1, 0),
        (1, 2),
        (2, 1),
        (2, 2),
        (2, 3),
        (3, 0),
        (3, 2),
    ];
    Ok(ZERO_POSITIONS
        .iter()
        .map(|&(i, j)| m[i][j].abs())
        .fold(0.0, f64::max))
}

/// Positions of the possibly nonzero entries of the zero-section Jacobi
/// matrix of a G-unit horizontal direction in the adapted frame
/// `(H^h, (iH)^h, H^v, (iH)^v)`; every other entry vanishes.
pub const TRIANGULAR_PATTERN: [(usize, usize); 5] = [(0, 2), (1, 1), (1, 3), (2, 2), (3, 3)];

/// Largest magnitude over the entries outside [`TRIANGULAR_PATTERN`] of
/// the zero-section Jacobi matrix of a G-unit horizontal direction, in the
/// adapted frame. `g(H,H) = 1/(a1+a3)(0)` makes `H^h` G-unit.
pub fn zero_section_triangular_pattern(
    gen: &GeneratorSet,
    chart: &MetricChart,
    x: &[f64],
    h: &[f64],
) -> Result<f64> {
    let ctx = BundleContext::new(gen, chart, x, &vec![0.0; chart.dim()])?;
    let a13 = ctx.scalars.a1.v + ctx.scalars.a3.v;
    if !(a13 > 0.0) {
        return Err(GnatError::SignCondition {
            scalar: "(a1+a3)(0)",
            value: a13,
            t: 0.0,
        });
    }
    let ghh = ctx.base.inner(h, h);
    if !(ghh > 0.0) {
        return Err(GnatError::ZeroVector {
            op: "horizontal pattern direction",
        });
    }
    let s = 1.0 / (a13 * ghh).sqrt();
    let hn: Vec<f64> = h.iter().map(|c| c * s).collect();
    let basis = frame_adapted(chart, x, &hn)?;
    let curv = BundleCurvature::at(&ctx)?;
    let m = jacobi_in_frame(&ctx, &curv, &LiftedVector::horizontal(&hn), &basis)?;
    let mut worst = 0.0f64;
    for (i, row) in m.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            if !TRIANGULAR_PATTERN.contains(&(i, j)) {
                worst = worst.max(entry.abs());
            }
        }
    }
    Ok(worst)
}

fn require_constant_curvature(chart: &MetricChart, op: &'static str) -> Result<f64> {
    chart
        .known_constant_curvature()
        .ok_or_else(|| GnatError::NotConstantCurvature {
            op,
            chart: chart.name().to_string(),
        })
}

/// The matrix of `J` along `u^h` in the lifted basis, shared by the entry
/// identities and the closed-form spectrum.
fn lifted_u_jacobi(ctx: &BundleContext, curv: &BundleCurvature) -> Result<Mat> {
    let basis = frame_lifted_u(ctx.base.chart(), &ctx.point)?;
    jacobi_in_frame(
        ctx,
        curv,
        &LiftedVector::horizontal(&ctx.point.u),
        &basis,
    )
}

/// Residuals of the two entry identities of the Jacobi matrix along `u^h`
/// in the lifted basis over a constant-curvature base:
///
/// ```text
/// (p1+p3) J_13 + p2 J_33 = 0
/// a2 (J_44 - J_22) + (a1+a3) J_24 - a1 J_42 = 0
/// ```
pub fn entry_identities(
    gen: &GeneratorSet,
    chart: &MetricChart,
    p: &BundlePoint,
) -> Result<(f64, f64)> {
    require_constant_curvature(chart, "entry identities")?;
    let ctx = BundleContext::at_point(gen, chart, p.clone())?;
    let curv = BundleCurvature::at(&ctx)?;
    let m = lifted_u_jacobi(&ctx, &curv)?;
    let s = &ctx.scalars;
    let r1 = (s.p1.v + s.p3.v) * m[0][2] + s.p2.v * m[2][2];
    let r2 = s.a2.v * (m[3][3] - m[1][1]) + (s.a1.v + s.a3.v) * m[1][3] - s.a1.v * m[3][1];
    Ok((r1.abs(), r2.abs()))
}

/// Closed-form spectrum of the Jacobi operator along `u^h` versus its
/// directly computed spectrum.
#[derive(Clone, Debug)]
pub struct ClosedFormComparison {
    /// `{0, J_33, ((J_22+J_44) +- sqrt(delta))/2}` sorted.
    pub formula: Vec<f64>,
    /// Direct eigenvalues, sorted.
    pub direct: Vec<f64>,
    pub max_deviation: f64,
    pub delta: f64,
    pub delta_negative: bool,
}

/// Evaluates the closed-form eigenvalue set
///
/// ```text
/// {0, J_33, ((J_22 + J_44) +- sqrt(delta)) / 2},
/// delta = (J_22 - J_44 + 2 a2/(a1+a3) J_42)^2 + 4 adet/(a1+a3)^2 J_42^2
/// ```
///
/// from the lifted-basis matrix entries and compares it with the direct
/// spectrum as sorted multisets.
pub fn closed_form_spectrum(
    gen: &GeneratorSet,
    chart: &MetricChart,
    p: &BundlePoint,
) -> Result<ClosedFormComparison> {
    require_constant_curvature(chart, "closed-form spectrum")?;
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
    let m = lifted_u_jacobi(&ctx, &curv)?;
    let a13 = s.a1.v + s.a3.v;
    let (j22, j33, j44, j42) = (m[1][1], m[2][2], m[3][3], m[3][1]);
    let delta = (j22 - j44 + 2.0 * s.a2.v / a13 * j42).powi(2)
        + 4.0 * s.adet.v / (a13 * a13) * j42 * j42;
    let delta_negative = delta < 0.0;
    let root = delta.max(0.0).sqrt();
    let mut formula = vec![
        0.0,
        j33,
        0.5 * (j22 + j44 + root),
        0.5 * (j22 + j44 - root),
    ];
    formula.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let w = ctx.lift_to_induced(&LiftedVector::horizontal(&ctx.point.u));
    let direct = operator_spectrum(&ctx, &curv, &w)?.eigenvalues;
    let max_deviation = formula
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ClosedFormComparison {
        formula,
        direct,
        max_deviation,
        delta,
        delta_negative,
    })
}

/// Result of checking that the base Jacobi spectrum embeds into the
/// bundle Jacobi spectrum of the horizontal lift at the zero section.
#[derive(Clone, Debug)]
pub struct EmbeddingCheck {
    pub embedded: bool,
    /// Worst distance from a base eigenvalue to the bundle spectrum.
    pub residual: f64,
    pub base_spectrum: Vec<f64>,
    pub bundle_spectrum: Vec<f64>,
}

/// Every eigenvalue of the base Jacobi operator of a g-unit `X` must
/// reappear in the spectrum of the bundle Jacobi operator of `X^h` at
/// `(x, 0)`.
pub fn base_embedding_check(
    gen: &GeneratorSet,
    chart: &MetricChart,
    x: &[f64],
    x_vec: &[f64],
) -> Result<EmbeddingCheck> {
    let ctx = BundleContext::new(gen, chart, x, &vec![0.0; chart.dim()])?;
    let gxx = ctx.base.inner(x_vec, x_vec);
    if !(gxx > 0.0) {
        return Err(GnatError::ZeroVector {
            op: "embedding direction",
        });
    }
    let xn: Vec<f64> = x_vec.iter().map(|c| c / gxx.sqrt()).collect();
    let base_spectrum = ctx.base.jacobi_eigenvalues(&xn)?;
    let curv = BundleCurvature::at(&ctx)?;
    let mut w = vec![0.0; 2 * ctx.dim()];
    w[..ctx.dim()].copy_from_slice(&xn);
    let bundle_spectrum = operator_spectrum(&ctx, &curv, &w)?.eigenvalues;
    let residual = base_spectrum
        .iter()
        .map(|l| {
            bundle_spectrum
                .iter()
                .map(|m| (l - m).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(EmbeddingCheck {
        embedded: residual <= 1e-7,
        residual,
        base_spectrum,
        bundle_spectrum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::GeneratorCurve;

    fn sorted_close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn adapted_frame_on_flat_chart_is_coordinate_frame() {
        let chart = MetricChart::flat();
        let f = frame_adapted(&chart, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(f.vectors[0], LiftedVector::new(vec![1.0, 0.0], vec![0.0, 0.0]));
        assert_eq!(f.vectors[1], LiftedVector::new(vec![0.0, 1.0], vec![0.0, 0.0]));
        assert_eq!(f.vectors[2], LiftedVector::new(vec![0.0, 0.0], vec![1.0, 0.0]));
        assert_eq!(f.vectors[3], LiftedVector::new(vec![0.0, 0.0], vec![0.0, 1.0]));
        // scaling H scales the basis
        let f2 = frame_adapted(&chart, &[0.0, 0.0], &[2.0, 0.0]).unwrap();
        for i in 0..4 {
            for k in 0..2 {
                assert_eq!(f2.vectors[i].h[k], 2.0 * f.vectors[i].h[k]);
                assert_eq!(f2.vectors[i].v[k], 2.0 * f.vectors[i].v[k]);
            }
        }
        assert!(frame_adapted(&chart, &[0.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn orthonormal_lifted_frame_reduces_to_scaled_lifts_for_sasaki() {
        let gen = GeneratorSet::sasaki();
        let chart = MetricChart::sphere(1.0).unwrap();
        let p = BundlePoint::new(&chart, &[1.0, 0.5], &[0.3, -0.4]).unwrap();
        let ctx = BundleContext::at_point(&gen, &chart, p.clone()).unwrap();
        let f = frame_orthonormal_lifted(&ctx).unwrap();
        let rt = p.t.sqrt();
        let iu = ctx.base.rotation(&p.u).unwrap();
        for k in 0..2 {
            assert!((f.vectors[0].h[k] - p.u[k] / rt).abs() < 1e-14);
            assert!((f.vectors[1].v[k] - p.u[k] / rt).abs() < 1e-14);
            assert!((f.vectors[2].h[k] - iu[k] / rt).abs() < 1e-14);
            assert!((f.vectors[3].v[k] - iu[k] / rt).abs() < 1e-14);
        }
    }

    #[test]
    fn orthonormal_lifted_frame_is_orthonormal_for_cheeger_gromoll() {
        let gen = GeneratorSet::cheeger_gromoll();
        let chart = MetricChart::sphere(1.0).unwrap();
        for u in [[0.3, -0.4], [1.2, 0.9], [0.01, 0.02]] {
            let ctx = BundleContext::new(&gen, &chart, &[1.0, 0.5], &u).unwrap();
            let f = frame_orthonormal_lifted(&ctx).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    let got = ctx.metric_on_lifts(&f.vectors[i], &f.vectors[j]);
                    assert!((got - want).abs() < 1e-10, "({i},{j}) = {got}");
                }
            }
            // doubling u lands at t' = 4t and stays orthonormal
            let u2: Vec<f64> = u.iter().map(|c| 2.0 * c).collect();
            let ctx2 = BundleContext::new(&gen, &chart, &[1.0, 0.5], &u2).unwrap();
            assert!(frame_orthonormal_lifted(&ctx2).is_ok());
        }
    }

    #[test]
    fn orthonormal_lifted_rejection_names_the_failing_scalar() {
        // adet = 1 - t^2/4 < 0 at t = 9
        let gen = GeneratorSet {
            name: "crossing".into(),
            a1: GeneratorCurve::constant(1.0),
            a2: GeneratorCurve::Rational {
                num: vec![0.0, 0.5],
                den: vec![1.0],
            },
            a3: GeneratorCurve::zero(),
            b1: GeneratorCurve::zero(),
            b2: GeneratorCurve::zero(),
            b3: GeneratorCurve::zero(),
        };
        let chart = MetricChart::flat();
        let p = BundlePoint::from_direction(&chart, &[0.0, 0.0], &[1.0, 0.0], 9.0).unwrap();
        let ctx = BundleContext::at_point(&gen, &chart, p).unwrap();
        match frame_orthonormal_lifted(&ctx) {
            Err(GnatError::SignCondition { scalar, .. }) => {
                assert!(scalar == "adet" || scalar == "pdet", "got {scalar}")
            }
            other => panic!("expected a sign rejection, got {other:?}"),
        }
    }

    #[test]
    fn jacobi_first_column_vanishes_along_the_direction() {
        let gen = GeneratorSet::cheeger_gromoll();
        let chart = MetricChart::sphere(1.0).unwrap();
        let p = BundlePoint::new(&chart, &[1.0, 0.5], &[0.4, 0.7]).unwrap();
        let ctx = BundleContext::at_point(&gen, &chart, p.clone()).unwrap();
        let curv = BundleCurvature::at(&ctx).unwrap();
        let basis = frame_lifted_u(&chart, &p).unwrap();
        let m = jacobi_in_frame(&ctx, &curv, &basis.vectors[0], &basis).unwrap();
        for i in 0..4 {
            assert!(m[i][0].abs() < 1e-10, "column entry {i}: {}", m[i][0]);
        }
    }

    #[test]
    fn zero_section_matrix_has_the_triangular_pattern() {
        for gen in [GeneratorSet::sasaki(), GeneratorSet::cheeger_gromoll()] {
            let chart = MetricChart::sphere(1.0).unwrap();
            let x = [1.0, 0.5];
            let ctx = BundleContext::new(&gen, &chart, &x, &[0.0, 0.0]).unwrap();
            let curv = BundleCurvature::at(&ctx).unwrap();
            // H^h must be a G-unit vector for the pattern entries
            let a13 = ctx.scalars.a1.v + ctx.scalars.a3.v;
            let e1 = [1.0, 0.0];
            let ghh = a13 * ctx.base.inner(&e1, &e1);
            let hn: Vec<f64> = e1.iter().map(|c| c / ghh.sqrt()).collect();
            let basis = frame_adapted(&chart, &x, &hn).unwrap();
            let m = jacobi_in_frame(&ctx, &curv, &LiftedVector::horizontal(&hn), &basis).unwrap();
            let scale = crate::linalg::max_abs(&m).max(1.0);
            for i in 0..4 {
                for j in 0..4 {
                    if !TRIANGULAR_PATTERN.contains(&(i, j)) {
                        assert!(
                            m[i][j].abs() < 1e-8 * scale,
                            "{}: entry ({i},{j}) = {}",
                            gen.name,
                            m[i][j]
                        );
                    }
                }
            }
            // the (2,2) entry is k/(a1+a3)(0)
            let k = ctx.base.curvature().unwrap().gauss.unwrap();
            assert!((m[1][1] - k / a13).abs() < 1e-7, "{}", gen.name);
            // the packaged residual reports the same off-pattern maximum
            let worst = zero_section_triangular_pattern(&gen, &chart, &x, &e1).unwrap();
            assert!(worst < 1e-8 * scale, "{}: {worst}", gen.name);
        }
    }

    #[test]
    fn unit_sphere_sasaki_zero_section_spectrum() {
        let gen = GeneratorSet::sasaki();
        let chart = MetricChart::sphere(1.0).unwrap();
        let z = zero_section_spectrum(&gen, &chart, &[1.0, 0.5], &[1.0, 0.0]).unwrap();
        assert!(sorted_close(&z.report.eigenvalues, &[0.0, 0.0, 0.0, 1.0], 1e-9));
        assert!(z.zero_distance < 1e-9);
        assert!(z.ratio_distance < 1e-9);
        assert!((z.curvature_ratio - 1.0).abs() < 1e-12);
        assert!(z.report.self_adjoint_residual < 1e-9);
        assert!(z.report.recomposition_residual < 1e-9);
        // radius 2 rescales the curvature entry to 1/4
        let chart2 = MetricChart::sphere(2.0).unwrap();
        let z2 = zero_section_spectrum(&gen, &chart2, &[1.0, 0.5], &[0.0, 1.0]).unwrap();
        assert!(sorted_close(&z2.report.eigenvalues, &[0.0, 0.0, 0.0, 0.25], 1e-9));
        // flat base collapses everything to zero
        let flat = MetricChart::flat();
        let z0 = zero_section_spectrum(&gen, &flat, &[0.3, 0.1], &[0.6, -0.2]).unwrap();
        assert!(sorted_close(&z0.report.eigenvalues, &[0.0; 4], 1e-12));
    }

    #[test]
    fn vertical_matrix_pattern_holds_on_presets() {
        let flat = MetricChart::flat();
        let sphere = MetricChart::sphere(1.0).unwrap();
        let r = zero_section_vertical_matrix_pattern(
            &GeneratorSet::sasaki(),
            &flat,
            &[0.0, 0.0],
            &[1.0, 0.0],
        )
        .unwrap();
        assert_eq!(r, 0.0);
        for gen in [GeneratorSet::sasaki(), GeneratorSet::cheeger_gromoll()] {
            let r = zero_section_vertical_matrix_pattern(&gen, &sphere, &[1.0, 0.5], &[0.7, 0.3])
                .unwrap();
            assert!(r < 1e-8, "{}: {r}", gen.name);
        }
    }

    #[test]
    fn entry_identities_hold_on_constant_curvature_presets() {
        let sphere = MetricChart::sphere(1.0).unwrap();
        let flat = MetricChart::flat();
        // flat + Sasaki: everything vanishes identically
        let p = BundlePoint::from_direction(&flat, &[0.1, 0.2], &[1.0, 0.3], 1.0).unwrap();
        let (r1, r2) = entry_identities(&GeneratorSet::sasaki(), &flat, &p).unwrap();
        assert!(r1 < 1e-14 && r2 < 1e-14);
        let gen = GeneratorSet::cheeger_gromoll();
        for t in [0.5, 1.0, 2.0, 5.0] {
            let p = BundlePoint::from_direction(&sphere, &[1.0, 0.5], &[0.4, 0.8], t).unwrap();
            let (r1, r2) = entry_identities(&gen, &sphere, &p).unwrap();
            assert!(r1 < 1e-7 && r2 < 1e-7, "t = {t}: ({r1}, {r2})");
        }
        // a chart with unknown curvature is refused
        let bump = MetricChart::custom(
            "bump",
            2,
            vec![
                crate::expr::Expr::Const { value: 1.0 },
                crate::expr::Expr::Const { value: 0.0 },
                crate::expr::Expr::Const { value: 1.0 },
            ],
            vec![-10.0, -10.0],
            vec![10.0, 10.0],
        )
        .unwrap();
        let pb = BundlePoint::from_direction(&bump, &[0.0, 0.0], &[1.0, 0.0], 1.0).unwrap();
        assert!(matches!(
            entry_identities(&gen, &bump, &pb),
            Err(GnatError::NotConstantCurvature { .. })
        ));
    }

    #[test]
    fn closed_form_spectrum_matches_direct() {
        let flat = MetricChart::flat();
        let p = BundlePoint::from_direction(&flat, &[0.0, 0.0], &[1.0, 0.0], 2.0).unwrap();
        let c = closed_form_spectrum(&GeneratorSet::sasaki(), &flat, &p).unwrap();
        assert!(sorted_close(&c.formula, &[0.0; 4], 1e-12));
        assert!(sorted_close(&c.direct, &[0.0; 4], 1e-12));

        let sphere = MetricChart::sphere(1.0).unwrap();
        let hyper = MetricChart::hyperbolic();
        for (chart, x) in [(&sphere, [1.0, 0.5]), (&hyper, [0.3, 1.5])] {
            for gen in [GeneratorSet::sasaki(), GeneratorSet::cheeger_gromoll()] {
                for t in [1.0, 3.0] {
                    let p = BundlePoint::from_direction(chart, &x, &[0.4, 0.8], t).unwrap();
                    let c = closed_form_spectrum(&gen, chart, &p).unwrap();
                    assert!(!c.delta_negative, "{}: delta = {}", gen.name, c.delta);
                    assert!(
                        c.max_deviation < 1e-6,
                        "{} at t = {t}: deviation {}",
                        gen.name,
                        c.max_deviation
                    );
                }
            }
        }
    }

    #[test]
    fn base_spectrum_embeds_at_zero_section() {
        let flat = MetricChart::flat();
        let e = base_embedding_check(&GeneratorSet::sasaki(), &flat, &[0.0, 0.0], &[1.0, 0.0])
            .unwrap();
        assert!(e.embedded && e.residual < 1e-12);
        let sphere = MetricChart::sphere(1.0).unwrap();
        for gen in [GeneratorSet::sasaki(), GeneratorSet::cheeger_gromoll()] {
            let e = base_embedding_check(&gen, &sphere, &[1.0, 0.5], &[0.3, 0.9]).unwrap();
            assert!(e.embedded, "{}: residual {}", gen.name, e.residual);
            assert!(sorted_close(&e.base_spectrum, &[0.0, 1.0], 1e-9));
        }
    }

    #[test]
    fn normalized_spectrum_is_scale_invariant() -> crate::Result<()> {
        let gen = GeneratorSet::cheeger_gromoll();
        let chart = MetricChart::sphere(1.0).unwrap();
        let p = BundlePoint::new(&chart, &[1.0, 0.5], &[0.5, 0.6]).unwrap();
        let ctx = BundleContext::at_point(&gen, &chart, p).unwrap();
        let curv = BundleCurvature::at(&ctx).unwrap();
        let xbar = LiftedVector::new(vec![0.4, -0.2], vec![0.3, 0.8]);
        let gxx = ctx.metric_on_lifts(&xbar, &xbar);
        let w = ctx.lift_to_induced(&xbar);
        let r1 = operator_spectrum(&ctx, &curv, &w)?.with_normalization(gxx);
        for c in [2.0, 1.0 / 3.0] {
            let xc = xbar.scale(c);
            let wc = ctx.lift_to_induced(&xc);
            let rc = operator_spectrum(&ctx, &curv, &wc)?
                .with_normalization(ctx.metric_on_lifts(&xc, &xc));
            assert!(sorted_close(&r1.normalized, &rc.normalized, 1e-9));
        }
        Ok(())
    }

    #[test]
    fn geodesic_direction_spectrum_scales_by_its_norm() {
        // eigenvalues of the unit u^h direction equal those of u^h
        // divided by t (p1 + p3)
        let gen = GeneratorSet::cheeger_gromoll();
        let chart = MetricChart::sphere(1.0).unwrap();
        let p = BundlePoint::from_direction(&chart, &[1.0, 0.5], &[0.4, 0.8], 2.0).unwrap();
        let ctx = BundleContext::at_point(&gen, &chart, p).unwrap();
        let curv = BundleCurvature::at(&ctx).unwrap();
        let uh = LiftedVector::horizontal(&ctx.point.u);
        let norm = ctx.metric_on_lifts(&uh, &uh);
        let s = &ctx.scalars;
        assert!((norm - ctx.point.t * (s.p1.v + s.p3.v)).abs() < 1e-12);
        let w = ctx.lift_to_induced(&uh);
        let raw = operator_spectrum(&ctx, &curv, &w).unwrap().eigenvalues;
        let unit = uh.scale(1.0 / norm.sqrt());
        let wu = ctx.lift_to_induced(&unit);
        let scaled = operator_spectrum(&ctx, &curv, &wu).unwrap().eigenvalues;
        for (a, b) in raw.iter().zip(&scaled) {
            assert!((a / norm - b).abs() < 1e-9);
        }
    }

    #[test]
    fn spectrum_op_handles_plain_matrices() {
        let zero = crate::linalg::zeros(4, 4);
        let r = spectrum(&zero, true).unwrap();
        assert!(sorted_close(&r.eigenvalues, &[0.0; 4], 1e-15));
        let mut diag = crate::linalg::zeros(4, 4);
        for (i, v) in [0.0, 1.0, 0.25, -0.5].iter().enumerate() {
            diag[i][i] = *v;
        }
        let r = spectrum(&diag, true).unwrap();
        assert!(sorted_close(&r.eigenvalues, &[-0.5, 0.0, 0.25, 1.0], 1e-12));
        // non-symmetric path with a complex pair gets flagged, not dropped
        let rot = vec![
            vec![0.0, -1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0, 0.0],
            vec![0.0, 0.0, 0.0, 3.0],
        ];
        let r = spectrum(&rot, false).unwrap();
        assert!(r.flags.iter().any(|f| f == "complex-pair"));
    }
}
