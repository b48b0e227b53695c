//! Executes experiment commands against a resolved configuration and
//! assembles deterministic reports. Rows are ordered by sub-check, then
//! base point (lexicographic), then `t` (ascending), then direction
//! index, so identical configurations produce byte-identical files.

use std::path::Path;

use serde_json::json;

use crate::bundle::{BundleContext, BundlePoint};
use crate::chart::MetricChart;
use crate::config::{OutputFormat, ResolvedConfig};
use crate::curvature::{totally_geodesic_residual, BundleCurvature};
use crate::error::{GnatError, Result};
use crate::frames;
use crate::generators::{classification_grid, classify};
use crate::osserman::osserman_test;
use crate::report::{emit_csv, emit_json, emit_meta_json, four, MetaBlock, ReportRow};

/// The five CLI commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentCommand {
    CheckMetric,
    Spectrum,
    VerifyIdentities,
    Osserman,
    Report,
}

impl ExperimentCommand {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentCommand::CheckMetric => "check-metric",
            ExperimentCommand::Spectrum => "spectrum",
            ExperimentCommand::VerifyIdentities => "verify-identities",
            ExperimentCommand::Osserman => "osserman",
            ExperimentCommand::Report => "report",
        }
    }
}

/// Rows, metadata, and the number of tolerance violations.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub rows: Vec<ReportRow>,
    pub meta: MetaBlock,
    pub violations: usize,
}

/// Runs one command over the resolved configuration. Errors here are
/// domain or math errors; the configuration was already validated.
pub fn execute(cmd: ExperimentCommand, rc: &ResolvedConfig) -> Result<RunOutcome> {
    let (rows, summary, violations) = match cmd {
        ExperimentCommand::CheckMetric => run_check_metric(rc)?,
        ExperimentCommand::Spectrum => run_spectrum(rc)?,
        ExperimentCommand::VerifyIdentities => run_verify_identities(rc)?,
        ExperimentCommand::Osserman => run_osserman(rc)?,
        ExperimentCommand::Report => {
            let mut rows = Vec::new();
            let mut violations = 0;
            let mut summary = serde_json::Map::new();
            for (name, part) in [
                ("check_metric", run_check_metric(rc)?),
                ("spectrum", run_spectrum(rc)?),
                ("verify_identities", run_verify_identities(rc)?),
                ("osserman", run_osserman(rc)?),
            ] {
                rows.extend(part.0);
                summary.insert(name.to_string(), part.1);
                violations += part.2;
            }
            (rows, serde_json::Value::Object(summary), violations)
        }
    };
    let meta = MetaBlock {
        command: cmd.as_str().to_string(),
        surface: rc.chart.name().to_string(),
        generators: rc.generators.name.clone(),
        base_points: rc.base_points.clone(),
        fiber_directions: rc.fiber_directions.clone(),
        t_values: rc.t_values.clone(),
        tolerances: rc.tolerances.map.clone(),
        row_count: rows.len(),
        violations,
        summary,
    };
    Ok(RunOutcome {
        rows,
        meta,
        violations,
    })
}

type Part = (Vec<ReportRow>, serde_json::Value, usize);

/// Classification table over the `t`-grid plus the sampled verdict.
fn run_check_metric(rc: &ResolvedConfig) -> Result<Part> {
    let c = classify(
        &rc.generators,
        rc.classify.t_max,
        rc.classify.samples,
    )?;
    let mut rows = Vec::new();
    for t in classification_grid(rc.classify.t_max, rc.classify.samples) {
        let s = rc.generators.derived_scalars(t)?;
        let mut row = ReportRow::new("check-metric");
        row.t = t;
        let scalars = [
            ("a1", s.a1.v),
            ("p1", s.p1.v),
            ("adet", s.adet.v),
            ("pdet", s.pdet.v),
        ];
        row.residuals = scalars
            .iter()
            .map(|(n, v)| (n.to_string(), *v))
            .collect();
        let failing: Vec<String> = scalars
            .iter()
            .filter(|(_, v)| !(*v > 0.0))
            .map(|(n, _)| format!("nonpositive:{n}"))
            .collect();
        row.flags = if failing.is_empty() {
            vec!["positive".to_string()]
        } else {
            failing
        };
        rows.push(row);
    }
    let summary = json!({
        "t_max": rc.classify.t_max,
        "samples": rc.classify.samples,
        "classification": c,
    });
    Ok((rows, summary, 0))
}

fn spectrum_row(
    id: &str,
    x: &[f64],
    t: f64,
    w: &[f64],
    rep: &frames::SpectrumReport,
    tol_identity: f64,
) -> (ReportRow, usize) {
    let mut row = ReportRow::new(id);
    row.point = x.to_vec();
    row.t = t;
    row.direction = w.to_vec();
    row.spectrum = four(&rep.eigenvalues);
    row.normalized = four(&rep.normalized);
    row.residuals = vec![
        ("self-adjoint".to_string(), rep.self_adjoint_residual),
        ("recomposition".to_string(), rep.recomposition_residual),
    ];
    if let Some(kind) = rep.frame {
        row.flags.push(format!("frame={}", kind.as_str()));
    }
    row.flags.extend(rep.flags.iter().cloned());
    let mut violations = 0;
    if rep.self_adjoint_residual > tol_identity {
        row.flags.push("self-adjoint-violation".to_string());
        violations = 1;
    }
    (row, violations)
}

/// Jacobi spectra over the sample: along `H^h` on the zero section, along
/// the geodesic flow direction `u^h` off it.
fn run_spectrum(rc: &ResolvedConfig) -> Result<Part> {
    let mut rows = Vec::new();
    let mut violations = 0;
    let mut worst_self_adjoint = 0.0f64;
    for x in &rc.base_points {
        for &t in &rc.t_values {
            for d in &rc.fiber_directions {
                if t == 0.0 {
                    let z = frames::zero_section_spectrum(&rc.generators, &rc.chart, x, d)?;
                    // z guarantees (a1+a3)(0) g(d,d) > 0; recover the
                    // G-unit H^h it used as the direction descriptor
                    let s0 = rc.generators.derived_scalars(0.0)?;
                    let g = rc.chart.metric_values(x)?;
                    let mut gdd = 0.0;
                    for i in 0..d.len() {
                        for j in 0..d.len() {
                            gdd += g[i][j] * d[i] * d[j];
                        }
                    }
                    let scale = 1.0 / ((s0.a1.v + s0.a3.v) * gdd).sqrt();
                    let mut w = vec![0.0; 2 * d.len()];
                    for (i, c) in d.iter().enumerate() {
                        w[i] = c * scale;
                    }
                    let (mut row, v) =
                        spectrum_row("spectrum", x, t, &w, &z.report, rc.tolerances.identity);
                    row.flags.push("direction=zero-section-horizontal".to_string());
                    worst_self_adjoint = worst_self_adjoint.max(z.report.self_adjoint_residual);
                    violations += v;
                    rows.push(row);
                } else {
                    let p = BundlePoint::from_direction(&rc.chart, x, d, t)?;
                    let ctx = BundleContext::at_point(&rc.generators, &rc.chart, p)?;
                    let curv = BundleCurvature::at(&ctx)?;
                    let flow = ctx.geodesic_flow();
                    let w = ctx.lift_to_induced(&flow);
                    let gxx = ctx.metric_on_lifts(&flow, &flow);
                    let mut rep = frames::operator_spectrum(&ctx, &curv, &w)?;
                    if gxx != 0.0 {
                        rep = rep.with_normalization(gxx);
                    }
                    let (mut row, v) =
                        spectrum_row("spectrum", x, t, &w, &rep, rc.tolerances.identity);
                    if gxx == 0.0 {
                        row.flags.push("null-direction".to_string());
                    }
                    row.flags.push("direction=geodesic-flow".to_string());
                    worst_self_adjoint = worst_self_adjoint.max(rep.self_adjoint_residual);
                    violations += v;
                    rows.push(row);
                }
            }
        }
    }
    let summary = json!({ "worst_self_adjoint": worst_self_adjoint });
    Ok((rows, summary, violations))
}

fn residual_row(
    id: &str,
    x: &[f64],
    t: f64,
    direction: Vec<f64>,
    residuals: Vec<(String, f64)>,
    tol: f64,
) -> (ReportRow, usize) {
    let mut row = ReportRow::new(id);
    row.point = x.to_vec();
    row.t = t;
    row.direction = direction;
    let violated = residuals.iter().any(|(_, v)| *v > tol);
    row.residuals = residuals;
    row.flags
        .push(if violated { "violation" } else { "pass" }.to_string());
    (row, usize::from(violated))
}

/// Structural identities: the totally geodesic zero section, the two
/// zero-section matrix patterns, spectrum membership of 0 and
/// `k/(a1+a3)(0)`, base spectrum embedding, the lifted-basis entry
/// identities, and the closed-form spectrum comparison.
fn run_verify_identities(rc: &ResolvedConfig) -> Result<Part> {
    let gen = &rc.generators;
    let chart = &rc.chart;
    let tol = &rc.tolerances;
    let mut rows = Vec::new();
    let mut violations = 0;
    let positive_t: Vec<f64> = rc.t_values.iter().copied().filter(|t| *t > 0.0).collect();

    // covariant derivatives of horizontal lifts along the zero section
    // stay horizontal and project onto the base connection
    for x in &rc.base_points {
        let ctx = BundleContext::new(gen, chart, x, &vec![0.0; chart.dim()])?;
        let curv = BundleCurvature::at(&ctx)?;
        for di in &rc.fiber_directions {
            for dj in &rc.fiber_directions {
                let res = totally_geodesic_residual(&ctx, &curv, di, dj)?;
                let mut dir = di.clone();
                dir.extend_from_slice(dj);
                let (row, v) = residual_row(
                    "totally-geodesic",
                    x,
                    0.0,
                    dir,
                    vec![("covariant-residual".to_string(), res)],
                    tol.identity,
                );
                violations += v;
                rows.push(row);
            }
        }
    }

    // zero-section Jacobi matrix of H^h: off-pattern entries vanish
    for x in &rc.base_points {
        for d in &rc.fiber_directions {
            let res = frames::zero_section_triangular_pattern(gen, chart, x, d)?;
            let (row, v) = residual_row(
                "horizontal-pattern",
                x,
                0.0,
                d.clone(),
                vec![("off-pattern".to_string(), res)],
                tol.identity,
            );
            violations += v;
            rows.push(row);
        }
    }

    // zero-section Jacobi matrix of V^v: ten entries vanish
    for x in &rc.base_points {
        for d in &rc.fiber_directions {
            let res = frames::zero_section_vertical_matrix_pattern(gen, chart, x, d)?;
            let (row, v) = residual_row(
                "vertical-pattern",
                x,
                0.0,
                d.clone(),
                vec![("off-pattern".to_string(), res)],
                tol.identity,
            );
            violations += v;
            rows.push(row);
        }
    }

    // the zero-section spectrum contains 0 and k/(a1+a3)(0)
    for x in &rc.base_points {
        for d in &rc.fiber_directions {
            let z = frames::zero_section_spectrum(gen, chart, x, d)?;
            let (mut row, v) = residual_row(
                "zero-section-spectrum",
                x,
                0.0,
                d.clone(),
                vec![
                    ("zero-membership".to_string(), z.zero_distance),
                    ("curvature-ratio-membership".to_string(), z.ratio_distance),
                ],
                tol.identity,
            );
            row.spectrum = four(&z.report.eigenvalues);
            row.normalized = four(&z.report.normalized);
            violations += v;
            rows.push(row);
        }
    }

    // every base Jacobi eigenvalue reappears in the bundle spectrum
    for x in &rc.base_points {
        for d in &rc.fiber_directions {
            let e = frames::base_embedding_check(gen, chart, x, d)?;
            let (mut row, v) = residual_row(
                "base-embedding",
                x,
                0.0,
                d.clone(),
                vec![("embedding-residual".to_string(), e.residual)],
                tol.identity,
            );
            row.spectrum = four(&e.bundle_spectrum);
            violations += v;
            rows.push(row);
        }
    }

    // lifted-basis entry identities and the closed-form spectrum hold
    // over constant-curvature bases
    let mut skipped: Vec<&str> = Vec::new();
    if chart.known_constant_curvature().is_some() {
        for x in &rc.base_points {
            for &t in &positive_t {
                for d in &rc.fiber_directions {
                    let p = BundlePoint::from_direction(chart, x, d, t)?;
                    let (r1, r2) = frames::entry_identities(gen, chart, &p)?;
                    let (row, v) = residual_row(
                        "entry-identities",
                        x,
                        t,
                        d.clone(),
                        vec![
                            ("first-identity".to_string(), r1),
                            ("second-identity".to_string(), r2),
                        ],
                        tol.identity,
                    );
                    violations += v;
                    rows.push(row);
                }
            }
        }
        for x in &rc.base_points {
            for &t in &positive_t {
                for d in &rc.fiber_directions {
                    let p = BundlePoint::from_direction(chart, x, d, t)?;
                    let c = frames::closed_form_spectrum(gen, chart, &p)?;
                    let (mut row, v) = residual_row(
                        "closed-form-spectrum",
                        x,
                        t,
                        d.clone(),
                        vec![("spectrum-deviation".to_string(), c.max_deviation)],
                        tol.spectrum,
                    );
                    row.spectrum = four(&c.direct);
                    row.normalized = four(&c.formula);
                    if c.delta_negative {
                        row.flags.push("discriminant-negative".to_string());
                    }
                    violations += v;
                    rows.push(row);
                }
            }
        }
    } else {
        skipped.push("entry-identities");
        skipped.push("closed-form-spectrum");
    }

    let worst = |id: &str| {
        rows.iter()
            .filter(|r| r.experiment_id == id)
            .flat_map(|r| r.residuals.iter().map(|(_, v)| *v))
            .fold(0.0f64, f64::max)
    };
    let summary = json!({
        "worst": {
            "totally-geodesic": worst("totally-geodesic"),
            "horizontal-pattern": worst("horizontal-pattern"),
            "vertical-pattern": worst("vertical-pattern"),
            "zero-section-spectrum": worst("zero-section-spectrum"),
            "base-embedding": worst("base-embedding"),
            "entry-identities": worst("entry-identities"),
            "closed-form-spectrum": worst("closed-form-spectrum"),
        },
        "skipped_nonconstant_curvature": skipped,
    });
    Ok((rows, summary, violations))
}

/// Direction-independence scan over all sampled bundle points.
fn run_osserman(rc: &ResolvedConfig) -> Result<Part> {
    let mut points = Vec::new();
    for x in &rc.base_points {
        for &t in &rc.t_values {
            if t == 0.0 {
                // the zero-section point is one point regardless of the
                // fiber direction list
                points.push(BundlePoint::new(
                    &rc.chart,
                    x,
                    &vec![0.0; rc.chart.dim()],
                )?);
            } else {
                for d in &rc.fiber_directions {
                    points.push(BundlePoint::from_direction(&rc.chart, x, d, t)?);
                }
            }
        }
    }
    let rep = osserman_test(
        &rc.generators,
        &rc.chart,
        &points,
        rc.osserman.directions,
        rc.tolerances.osserman,
    )?;
    let mut rows = Vec::new();
    for s in &rep.samples {
        let verdict = &rep.pointwise[s.point_index];
        let mut row = ReportRow::new("osserman");
        row.point = points[s.point_index].x.clone();
        row.t = points[s.point_index].t;
        row.direction = s.direction.clone();
        row.spectrum = four(&s.spectrum);
        // directions are G-unit, so the spectrum is already normalized
        row.normalized = four(&s.spectrum);
        row.residuals = vec![(
            "pointwise-spread".to_string(),
            verdict.spectrum_spread,
        )];
        row.flags.push(
            if verdict.is_osserman {
                "pointwise-independent"
            } else {
                "pointwise-dependent"
            }
            .to_string(),
        );
        rows.push(row);
    }
    let summary = json!({
        "directions_per_point": rc.osserman.directions,
        "global": rep.global,
        "pointwise": rep.pointwise,
    });
    Ok((rows, summary, 0))
}

/// Writes the outcome in the requested format. CSV reports put the
/// metadata in a `<path>.meta.json` sidecar; JSON embeds it. Without a
/// path the report goes to stdout (CSV then omits the sidecar).
pub fn write_report(
    outcome: &RunOutcome,
    format: OutputFormat,
    path: Option<&Path>,
) -> Result<()> {
    let write = |p: &Path, text: &str| {
        std::fs::write(p, text).map_err(|source| GnatError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    match format {
        OutputFormat::Csv => {
            let csv = emit_csv(&outcome.rows);
            match path {
                Some(p) => {
                    write(p, &csv)?;
                    let side =
                        std::path::PathBuf::from(format!("{}.meta.json", p.display()));
                    write(&side, &emit_meta_json(&outcome.meta)?)
                }
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        OutputFormat::Json => {
            let doc = emit_json(&outcome.meta, &outcome.rows)?;
            match path {
                Some(p) => write(p, &doc),
                None => {
                    print!("{doc}");
                    Ok(())
                }
            }
        }
    }
}

/// Convenience used by tests and bindings: resolve a chart preset name.
pub fn chart_from_preset(name: &str) -> Result<MetricChart> {
    MetricChart::from_preset(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn resolved(surface: &str, generators: &str) -> ResolvedConfig {
        let text = format!(
            r#"{{
              "surface": "{surface}",
              "generators": "{generators}",
              "sample": {{
                "base_points": [[1.0, 0.5], [0.8, 1.2]],
                "fiber_directions": [[1.0, 0.0], [0.3, -0.7]],
                "t_values": [0.0, 1.0]
              }},
              "classify": {{ "samples": 64 }},
              "osserman": {{ "directions": 8 }}
            }}"#
        );
        serde_json::from_str::<ExperimentConfig>(&text)
            .unwrap()
            .resolve()
            .unwrap()
    }

    #[test]
    fn check_metric_emits_one_row_per_grid_point() {
        let rc = resolved("flat", "cheeger-gromoll");
        let out = execute(ExperimentCommand::CheckMetric, &rc).unwrap();
        assert_eq!(out.rows.len(), 64);
        assert_eq!(out.violations, 0);
        assert!(out
            .rows
            .iter()
            .all(|r| r.flags == vec!["positive".to_string()]));
        assert_eq!(out.meta.summary["classification"]["riemannian"], true);
    }

    #[test]
    fn spectrum_rows_cover_the_whole_sample() {
        let rc = resolved("sphere:1", "sasaki");
        let out = execute(ExperimentCommand::Spectrum, &rc).unwrap();
        // 2 points x 2 t x 2 directions
        assert_eq!(out.rows.len(), 8);
        assert_eq!(out.violations, 0);
        for r in &out.rows {
            assert!(r.spectrum.iter().all(|v| v.is_finite()));
            assert_eq!(r.direction.len(), 4);
        }
        // zero-section rows carry the known unit-sphere spectrum
        let zs: Vec<_> = out.rows.iter().filter(|r| r.t == 0.0).collect();
        assert_eq!(zs.len(), 4);
        for r in zs {
            assert!((r.spectrum[3] - 1.0).abs() < 1e-7, "{:?}", r.spectrum);
        }
    }

    #[test]
    fn verify_identities_passes_on_sphere_presets() {
        let rc = resolved("sphere:1", "cheeger-gromoll");
        let out = execute(ExperimentCommand::VerifyIdentities, &rc).unwrap();
        assert_eq!(out.violations, 0, "{:#?}", out.meta.summary);
        assert!(out.rows.iter().all(|r| r.flags[0] == "pass"));
        // every sub-check contributed rows
        for id in [
            "totally-geodesic",
            "horizontal-pattern",
            "vertical-pattern",
            "zero-section-spectrum",
            "base-embedding",
            "entry-identities",
            "closed-form-spectrum",
        ] {
            assert!(
                out.rows.iter().any(|r| r.experiment_id == id),
                "missing {id}"
            );
        }
    }

    #[test]
    fn osserman_flat_true_sphere_false() {
        let rc = resolved("flat", "sasaki");
        let out = execute(ExperimentCommand::Osserman, &rc).unwrap();
        assert_eq!(out.meta.summary["global"]["is_osserman"], true);

        let rc = resolved("sphere:1", "sasaki");
        let out = execute(ExperimentCommand::Osserman, &rc).unwrap();
        assert_eq!(out.meta.summary["global"]["is_osserman"], false);
        assert!(out
            .rows
            .iter()
            .any(|r| r.flags.contains(&"pointwise-dependent".to_string())));
    }

    #[test]
    fn report_aggregates_all_commands() {
        let rc = resolved("sphere:1", "sasaki");
        let out = execute(ExperimentCommand::Report, &rc).unwrap();
        for id in ["check-metric", "spectrum", "totally-geodesic", "osserman"] {
            assert!(out.rows.iter().any(|r| r.experiment_id == id), "{id}");
        }
        assert!(out.meta.summary.get("osserman").is_some());
        assert_eq!(out.meta.row_count, out.rows.len());
    }

    #[test]
    fn identical_runs_are_byte_identical() {
        let rc = resolved("sphere:1", "cheeger-gromoll");
        let a = execute(ExperimentCommand::Report, &rc).unwrap();
        let b = execute(ExperimentCommand::Report, &rc).unwrap();
        assert_eq!(emit_csv(&a.rows), emit_csv(&b.rows));
        assert_eq!(
            emit_json(&a.meta, &a.rows).unwrap(),
            emit_json(&b.meta, &b.rows).unwrap()
        );
    }
}
