//! Python bindings for the tangent-bundle metric laboratory.
//!
//! Surfaces and generator sets are passed as strings: either a preset name
//! (`"flat"`, `"sphere:2"`, `"hyperbolic"`; `"sasaki"`, `"cheeger-gromoll"`)
//! or a JSON object in the same shape the CLI configuration files use.
//! Results come back as plain dicts, lists and tuples.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList};
use serde_json::Value;

use gnatlab::bundle::{BundleContext, BundlePoint, LiftedVector};
use gnatlab::chart::MetricChart;
use gnatlab::config::CustomSurface;
use gnatlab::curvature::BundleCurvature;
use gnatlab::frames;
use gnatlab::generators::{self, GeneratorSet};
use gnatlab::osserman;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_surface(spec: &str) -> PyResult<MetricChart> {
    if spec.trim_start().starts_with('{') {
        let c: CustomSurface = serde_json::from_str(spec).map_err(value_err)?;
        MetricChart::custom(&c.name, c.dim, c.components, c.mins, c.maxs)
            .map_err(value_err)
    } else {
        MetricChart::from_preset(spec).map_err(value_err)
    }
}

fn parse_generators(spec: &str) -> PyResult<GeneratorSet> {
    if spec.trim_start().starts_with('{') {
        serde_json::from_str(spec).map_err(value_err)
    } else {
        GeneratorSet::from_preset(spec).map_err(value_err)
    }
}

/// Recursively convert a JSON value produced by the core crate's
/// serializers into native Python objects.
fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        Value::Null => Ok(py.None().into_bound(py)),
        Value::Bool(b) => Ok(PyBool::new(py, *b).to_owned().into_any()),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(i.into_pyobject(py)?.into_any())
            } else {
                Ok(n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any())
            }
        }
        Value::String(s) => Ok(s.as_str().into_pyobject(py)?.into_any()),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            Ok(list.into_any())
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            Ok(dict.into_any())
        }
    }
}

fn serialize_to_py<'py, T: serde::Serialize>(
    py: Python<'py>,
    value: &T,
) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(value_err)?;
    json_to_py(py, &v)
}

fn spectrum_report_dict<'py>(
    py: Python<'py>,
    r: &frames::SpectrumReport,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("eigenvalues", r.eigenvalues.clone())?;
    d.set_item("normalized", r.normalized.clone())?;
    d.set_item("frame", r.frame.map(|f| f.as_str()))?;
    d.set_item("self_adjoint_residual", r.self_adjoint_residual)?;
    d.set_item("recomposition_residual", r.recomposition_residual)?;
    d.set_item("flags", r.flags.clone())?;
    Ok(d)
}

/// Evaluate the six generator curves and the derived nondegeneracy
/// scalars at one value of `t = g_x(u, u)`.
#[pyfunction]
fn derived_scalars<'py>(
    py: Python<'py>,
    generators: &str,
    t: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let gen = parse_generators(generators)?;
    let s = gen.derived_scalars(t).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("t", s.t)?;
    for (name, v) in [
        ("a1", s.a1),
        ("a2", s.a2),
        ("a3", s.a3),
        ("b1", s.b1),
        ("b2", s.b2),
        ("b3", s.b3),
        ("p1", s.p1),
        ("p2", s.p2),
        ("p3", s.p3),
        ("adet", s.adet),
        ("pdet", s.pdet),
    ] {
        d.set_item(name, v.v)?;
    }
    Ok(d)
}

/// Classify a generator set over `t` in `[0, t_max]`: is the bundle metric
/// nondegenerate, is it Riemannian, and where does it first fail.
#[pyfunction]
#[pyo3(signature = (generators, t_max = 10.0, samples = 256))]
fn classify<'py>(
    py: Python<'py>,
    generators: &str,
    t_max: f64,
    samples: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let gen = parse_generators(generators)?;
    let c = generators::classify(&gen, t_max, samples).map_err(value_err)?;
    serialize_to_py(py, &c)
}

/// Gram matrix of the bundle metric in the induced coordinate frame at
/// the bundle point `(x, u)`.
#[pyfunction]
fn gram_matrix(
    surface: &str,
    generators: &str,
    x: Vec<f64>,
    u: Vec<f64>,
) -> PyResult<Vec<Vec<f64>>> {
    let chart = parse_surface(surface)?;
    let gen = parse_generators(generators)?;
    let ctx = BundleContext::new(&gen, &chart, &x, &u).map_err(value_err)?;
    Ok(ctx.gram_induced().map_err(value_err)?.values)
}

/// Jacobi spectrum of the G-unit horizontal lift of `h` at the
/// zero-section point `(x, 0)`, with the membership distances to `0` and
/// to `k(x)/(a1+a3)(0)`.
#[pyfunction]
fn zero_section_spectrum<'py>(
    py: Python<'py>,
    surface: &str,
    generators: &str,
    x: Vec<f64>,
    h: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let chart = parse_surface(surface)?;
    let gen = parse_generators(generators)?;
    let z = frames::zero_section_spectrum(&gen, &chart, &x, &h).map_err(value_err)?;
    let d = spectrum_report_dict(py, &z.report)?;
    d.set_item("curvature_ratio", z.curvature_ratio)?;
    d.set_item("zero_distance", z.zero_distance)?;
    d.set_item("ratio_distance", z.ratio_distance)?;
    Ok(d)
}

/// Jacobi spectrum of the lifted direction with horizontal part `h` and
/// vertical part `v` at the bundle point `(x, u)`. Eigenvalues under
/// `"normalized"` are divided by `G(w, w)` when that norm is nonzero.
#[pyfunction]
fn jacobi_spectrum<'py>(
    py: Python<'py>,
    surface: &str,
    generators: &str,
    x: Vec<f64>,
    u: Vec<f64>,
    h: Vec<f64>,
    v: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let chart = parse_surface(surface)?;
    let gen = parse_generators(generators)?;
    let ctx = BundleContext::new(&gen, &chart, &x, &u).map_err(value_err)?;
    let curv = BundleCurvature::at(&ctx).map_err(value_err)?;
    let lift = LiftedVector::new(h, v);
    let w = ctx.lift_to_induced(&lift);
    let gww = ctx.metric_on_lifts(&lift, &lift);
    let mut report = frames::operator_spectrum(&ctx, &curv, &w).map_err(value_err)?;
    if gww != 0.0 {
        report = report.with_normalization(gww);
    }
    let d = spectrum_report_dict(py, &report)?;
    d.set_item("direction_norm_squared", gww)?;
    Ok(d)
}

/// The two entry identities of the lifted-basis Jacobi matrix on a
/// constant-curvature base; returns their residuals.
#[pyfunction]
fn entry_identities(
    surface: &str,
    generators: &str,
    x: Vec<f64>,
    u: Vec<f64>,
) -> PyResult<(f64, f64)> {
    let chart = parse_surface(surface)?;
    let gen = parse_generators(generators)?;
    let p = BundlePoint::new(&chart, &x, &u).map_err(value_err)?;
    frames::entry_identities(&gen, &chart, &p).map_err(value_err)
}

/// Closed-form Jacobi spectrum along the geodesic flow on a
/// constant-curvature base, compared with the direct computation.
#[pyfunction]
fn closed_form_spectrum<'py>(
    py: Python<'py>,
    surface: &str,
    generators: &str,
    x: Vec<f64>,
    u: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let chart = parse_surface(surface)?;
    let gen = parse_generators(generators)?;
    let p = BundlePoint::new(&chart, &x, &u).map_err(value_err)?;
    let c = frames::closed_form_spectrum(&gen, &chart, &p).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("formula", c.formula)?;
    d.set_item("direct", c.direct)?;
    d.set_item("max_deviation", c.max_deviation)?;
    d.set_item("delta", c.delta)?;
    d.set_item("delta_negative", c.delta_negative)?;
    Ok(d)
}

/// Sample Jacobi spectra over G-unit directions at each `(x, u)` point
/// and report whether they are direction-independent, per point and
/// globally. `points` is a list of `(x, u)` coordinate pairs.
#[pyfunction]
#[pyo3(signature = (surface, generators, points, directions = 60, tolerance = 1e-5))]
fn osserman_scan<'py>(
    py: Python<'py>,
    surface: &str,
    generators: &str,
    points: Vec<(Vec<f64>, Vec<f64>)>,
    directions: usize,
    tolerance: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let chart = parse_surface(surface)?;
    let gen = parse_generators(generators)?;
    let mut bundle_points = Vec::with_capacity(points.len());
    for (x, u) in &points {
        bundle_points.push(BundlePoint::new(&chart, x, u).map_err(value_err)?);
    }
    let report = osserman::osserman_test(&gen, &chart, &bundle_points, directions, tolerance)
        .map_err(value_err)?;
    serialize_to_py(py, &report)
}

#[pymodule]
fn gnatlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(derived_scalars, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(gram_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(zero_section_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(entry_identities, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(osserman_scan, m)?)?;
    Ok(())
}
