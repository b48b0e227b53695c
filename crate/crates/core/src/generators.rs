//! Generator functions of the bundle metric.
//!
//! Six scalar curves `a1, a2, a3, b1, b2, b3` of `t = g_x(u, u)` determine
//! the metric on the tangent bundle. The derived combinations
//!
//! ```text
//! p_i  = a_i + t b_i
//! adet = a1 (a1 + a3) - a2^2
//! pdet = p1 (p1 + p3) - p2^2
//! ```
//!
//! control nondegeneracy (`adet * pdet != 0` for every `t >= 0`) and the
//! Riemannian property (`a1 > 0`, `p1 > 0`, `adet > 0`, `pdet > 0`).
//! Curves are rational functions with exact derivatives; classification is
//! a sampled check on a Chebyshev grid that always contains both endpoints.

use serde::{Deserialize, Serialize};

use crate::error::{GnatError, Result};

/// Default upper end of the classification interval.
pub const DEFAULT_T_MAX: f64 = 10.0;

/// Default number of classification samples.
pub const DEFAULT_CLASSIFY_SAMPLES: usize = 256;

/// Relative floor under which a sampled nondegeneracy product counts as
/// vanishing.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// A generator curve on `[0, inf)`. The only representation is a rational
/// function; polynomials use a constant denominator. Coefficients are
/// listed lowest degree first.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorCurve {
    Rational { num: Vec<f64>, den: Vec<f64> },
}

/// Evaluate a polynomial and its first two derivatives by Horner's rule.
fn horner2(coeffs: &[f64], t: f64) -> [f64; 3] {
    let mut p = 0.0;
    let mut dp = 0.0;
    let mut ddp = 0.0;
    for &c in coeffs.iter().rev() {
        ddp = ddp * t + 2.0 * dp;
        dp = dp * t + p;
        p = p * t + c;
    }
    [p, dp, ddp]
}

impl GeneratorCurve {
    pub fn constant(c: f64) -> GeneratorCurve {
        GeneratorCurve::Rational {
            num: vec![c],
            den: vec![1.0],
        }
    }

    pub fn zero() -> GeneratorCurve {
        GeneratorCurve::constant(0.0)
    }

    /// Value and first two derivatives at `t >= 0`. A vanishing denominator
    /// is a hard domain error, not a NaN.
    pub fn eval2(&self, t: f64) -> Result<[f64; 3]> {
        if !(t >= 0.0) {
            return Err(GnatError::Degenerate {
                t,
                witness: "generator curves are defined for t >= 0 only".into(),
            });
        }
        match self {
            GeneratorCurve::Rational { num, den } => {
                let p = horner2(num, t);
                let q = horner2(den, t);
                // evaluation-scale magnitude of the denominator
                let q_scale: f64 = den
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c.abs() * t.powi(i as i32))
                    .sum();
                if q[0].abs() < 1e-12 * q_scale.max(1e-30) || q[0] == 0.0 {
                    return Err(GnatError::CurvePole { t, den: q[0].abs() });
                }
                let f = p[0] / q[0];
                let df = (p[1] - f * q[1]) / q[0];
                let ddf = (p[2] - 2.0 * df * q[1] - f * q[2]) / q[0];
                Ok([f, df, ddf])
            }
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.eval2(t)?[0])
    }
}

/// The six generator curves, in the fixed order `a1, a2, a3, b1, b2, b3`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSet {
    pub name: String,
    pub a1: GeneratorCurve,
    pub a2: GeneratorCurve,
    pub a3: GeneratorCurve,
    pub b1: GeneratorCurve,
    pub b2: GeneratorCurve,
    pub b3: GeneratorCurve,
}

/// Value with first and second `t`-derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Deriv2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Deriv2 {
    fn from(a: [f64; 3]) -> Deriv2 {
        Deriv2 {
            v: a[0],
            d1: a[1],
            d2: a[2],
        }
    }

    fn add(self, o: Deriv2) -> Deriv2 {
        Deriv2 {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }

    fn sub(self, o: Deriv2) -> Deriv2 {
        Deriv2 {
            v: self.v - o.v,
            d1: self.d1 - o.d1,
            d2: self.d2 - o.d2,
        }
    }

    fn mul(self, o: Deriv2) -> Deriv2 {
        Deriv2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

/// All derived scalars at one value of `t`.
#[derive(Clone, Copy, Debug)]
pub struct DerivedScalars {
    pub t: f64,
    pub a1: Deriv2,
    pub a2: Deriv2,
    pub a3: Deriv2,
    pub b1: Deriv2,
    pub b2: Deriv2,
    pub b3: Deriv2,
    pub p1: Deriv2,
    pub p2: Deriv2,
    pub p3: Deriv2,
    /// `a1 (a1 + a3) - a2^2`
    pub adet: Deriv2,
    /// `p1 (p1 + p3) - p2^2`
    pub pdet: Deriv2,
}

impl DerivedScalars {
    pub fn a1_plus_a3(&self) -> Deriv2 {
        self.a1.add(self.a3)
    }

    pub fn p1_plus_p3(&self) -> Deriv2 {
        self.p1.add(self.p3)
    }
}

impl GeneratorSet {
    /// The metric with `a1 = 1` and every other generator zero.
    pub fn sasaki() -> GeneratorSet {
        GeneratorSet {
            name: "sasaki".into(),
            a1: GeneratorCurve::constant(1.0),
            a2: GeneratorCurve::zero(),
            a3: GeneratorCurve::zero(),
            b1: GeneratorCurve::zero(),
            b2: GeneratorCurve::zero(),
            b3: GeneratorCurve::zero(),
        }
    }

    /// The Cheeger-Gromoll metric:
    /// `a1 = b1 = 1/(1+2t)`, `a2 = b2 = 0`, `a3 = 2t/(1+2t)`,
    /// `b3 = -1/(1+2t)`. Satisfies `p1 + p3 = 1` identically.
    pub fn cheeger_gromoll() -> GeneratorSet {
        let inv = GeneratorCurve::Rational {
            num: vec![1.0],
            den: vec![1.0, 2.0],
        };
        GeneratorSet {
            name: "cheeger-gromoll".into(),
            a1: inv.clone(),
            a2: GeneratorCurve::zero(),
            a3: GeneratorCurve::Rational {
                num: vec![0.0, 2.0],
                den: vec![1.0, 2.0],
            },
            b1: inv,
            b2: GeneratorCurve::zero(),
            b3: GeneratorCurve::Rational {
                num: vec![-1.0],
                den: vec![1.0, 2.0],
            },
        }
    }

    pub fn from_preset(name: &str) -> Result<GeneratorSet> {
        match name {
            "sasaki" => Ok(GeneratorSet::sasaki()),
            "cheeger-gromoll" => Ok(GeneratorSet::cheeger_gromoll()),
            _ => Err(GnatError::UnknownPreset(name.to_string())),
        }
    }

    /// All scalars of the metric at one `t`, with exact `t`-derivatives.
    pub fn derived_scalars(&self, t: f64) -> Result<DerivedScalars> {
        let a1 = Deriv2::from(self.a1.eval2(t)?);
        let a2 = Deriv2::from(self.a2.eval2(t)?);
        let a3 = Deriv2::from(self.a3.eval2(t)?);
        let b1 = Deriv2::from(self.b1.eval2(t)?);
        let b2 = Deriv2::from(self.b2.eval2(t)?);
        let b3 = Deriv2::from(self.b3.eval2(t)?);
        let tv = Deriv2 {
            v: t,
            d1: 1.0,
            d2: 0.0,
        };
        let p1 = a1.add(tv.mul(b1));
        let p2 = a2.add(tv.mul(b2));
        let p3 = a3.add(tv.mul(b3));
        let adet = a1.mul(a1.add(a3)).sub(a2.mul(a2));
        let pdet = p1.mul(p1.add(p3)).sub(p2.mul(p2));
        Ok(DerivedScalars {
            t,
            a1,
            a2,
            a3,
            b1,
            b2,
            b3,
            p1,
            p2,
            p3,
            adet,
            pdet,
        })
    }
}

/// One sampled failure of a classification condition.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ClassificationWitness {
    pub t: f64,
    pub scalar: String,
    pub value: f64,
}

/// Sampled verdicts over `[0, t_max]`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Classification {
    pub t_max: f64,
    pub samples: usize,
    pub nondegenerate: bool,
    pub riemannian: bool,
    pub witnesses: Vec<ClassificationWitness>,
}

/// Chebyshev-Lobatto points mapped to `[0, t_max]`; includes both ends,
/// packs samples toward them.
pub fn classification_grid(t_max: f64, samples: usize) -> Vec<f64> {
    assert!(samples >= 2);
    (0..samples)
        .map(|j| {
            let c = (std::f64::consts::PI * j as f64 / (samples - 1) as f64).cos();
            t_max * 0.5 * (1.0 - c)
        })
        .collect()
}

/// Sampled nondegeneracy and Riemannian classification on `[0, t_max]`.
///
/// Nondegeneracy fails at a sample where `adet * pdet` vanishes to within
/// [`DEGENERACY_FLOOR`] of its peak sampled magnitude, or flips sign
/// between consecutive samples (an odd-order zero crossed between them).
pub fn classify(gen: &GeneratorSet, t_max: f64, samples: usize) -> Result<Classification> {
    if !(t_max > 0.0) {
        return Err(GnatError::Config(format!(
            "classification needs t_max > 0, got {t_max}"
        )));
    }
    if samples < 2 {
        return Err(GnatError::Config("classification needs at least 2 samples".into()));
    }
    let grid = classification_grid(t_max, samples);
    let mut adet_series = Vec::with_capacity(grid.len());
    let mut pdet_series = Vec::with_capacity(grid.len());
    let mut witnesses = Vec::new();
    let mut riemannian = true;
    for &t in &grid {
        let s = gen.derived_scalars(t)?;
        for (name, val) in [
            ("a1", s.a1.v),
            ("p1", s.p1.v),
            ("adet", s.adet.v),
            ("pdet", s.pdet.v),
        ] {
            if !(val > 0.0) && riemannian {
                riemannian = false;
                witnesses.push(ClassificationWitness {
                    t,
                    scalar: name.to_string(),
                    value: val,
                });
            }
        }
        adet_series.push((t, s.adet.v));
        pdet_series.push((t, s.pdet.v));
    }
    // Each factor of the nondegeneracy product is checked on its own so
    // that a simultaneous zero of both (where the product has even order
    // and never changes sign) is still caught by the sign-flip test.
    let mut nondegenerate = true;
    for (name, series) in [("adet", &adet_series), ("pdet", &pdet_series)] {
        let peak = series
            .iter()
            .map(|(_, p)| p.abs())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        for (i, &(t, p)) in series.iter().enumerate() {
            let vanishing = p.abs() < DEGENERACY_FLOOR * peak;
            let flipped = i > 0 && series[i - 1].1 * p < 0.0;
            if vanishing || flipped {
                nondegenerate = false;
                let (tw, pw) = if flipped && series[i - 1].1.abs() < p.abs() {
                    series[i - 1]
                } else {
                    (t, p)
                };
                witnesses.push(ClassificationWitness {
                    t: tw,
                    scalar: name.to_string(),
                    value: pw,
                });
                break;
            }
        }
    }
    Ok(Classification {
        t_max,
        samples,
        nondegenerate,
        riemannian,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn cheeger_gromoll_frozen_scalars() {
        let gen = GeneratorSet::cheeger_gromoll();
        let s0 = gen.derived_scalars(0.0).unwrap();
        assert_eq!(s0.a1.v, 1.0);
        assert_eq!(s0.b1.v, 1.0);
        assert_eq!(s0.a3.v, 0.0);
        assert_eq!(s0.b3.v, -1.0);
        let s1 = gen.derived_scalars(1.0).unwrap();
        // p1 = (1+t)/(1+2t) = 2/3, p3 = t/(1+2t) = 1/3 at t = 1
        assert!(close(s1.p1.v, 2.0 / 3.0, 1e-15));
        assert!(close(s1.p3.v, 1.0 / 3.0, 1e-15));
        // adet = 1/(1+2t) = 1/3, pdet = (1+t)/(1+2t) = 2/3
        assert!(close(s1.adet.v, 1.0 / 3.0, 1e-15));
        assert!(close(s1.pdet.v, 2.0 / 3.0, 1e-15));
    }

    #[test]
    fn cheeger_gromoll_p1_plus_p3_is_one() {
        let gen = GeneratorSet::cheeger_gromoll();
        for &t in &[0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0] {
            let s = gen.derived_scalars(t).unwrap();
            assert!(close(s.p1_plus_p3().v, 1.0, 1e-14), "t = {t}");
        }
    }

    #[test]
    fn phi_equals_alpha_at_zero() {
        // p_i(0) = a_i(0) holds structurally for any generator set
        let gen = GeneratorSet::cheeger_gromoll();
        let s = gen.derived_scalars(0.0).unwrap();
        assert_eq!(s.p1.v, s.a1.v);
        assert_eq!(s.p2.v, s.a2.v);
        assert_eq!(s.p3.v, s.a3.v);
    }

    #[test]
    fn curve_derivatives_match_finite_differences() {
        let gen = GeneratorSet::cheeger_gromoll();
        let curves = [&gen.a1, &gen.a2, &gen.a3, &gen.b1, &gen.b2, &gen.b3];
        for c in curves {
            for &t in &[0.5, 1.0, 3.0] {
                let got = c.eval2(t).unwrap();
                let f = |p: &[f64]| c.value(p[0]).unwrap();
                let d1 = fd::central_d1(&f, &[t], 0, 1e-4);
                let d2 = fd::central_d2(&f, &[t], 0, 0, 1e-4);
                assert!(close(got[1], d1, 1e-5), "{got:?} vs d1 {d1} at {t}");
                assert!(close(got[2], d2, 1e-5), "{got:?} vs d2 {d2} at {t}");
            }
        }
    }

    #[test]
    fn derived_scalar_derivatives_match_finite_differences() {
        let gen = GeneratorSet::cheeger_gromoll();
        let pdet = |p: &[f64]| gen.derived_scalars(p[0]).unwrap().pdet.v;
        let adet = |p: &[f64]| gen.derived_scalars(p[0]).unwrap().adet.v;
        for &t in &[0.3, 1.0, 4.0] {
            let s = gen.derived_scalars(t).unwrap();
            assert!(close(s.pdet.d1, fd::central_d1(&pdet, &[t], 0, 1e-4), 1e-5));
            assert!(close(s.pdet.d2, fd::central_d2(&pdet, &[t], 0, 0, 1e-4), 1e-5));
            assert!(close(s.adet.d1, fd::central_d1(&adet, &[t], 0, 1e-4), 1e-5));
        }
    }

    #[test]
    fn presets_classify_as_riemannian() {
        for name in ["sasaki", "cheeger-gromoll"] {
            let gen = GeneratorSet::from_preset(name).unwrap();
            let c = classify(&gen, DEFAULT_T_MAX, DEFAULT_CLASSIFY_SAMPLES).unwrap();
            assert!(c.nondegenerate, "{name}");
            assert!(c.riemannian, "{name}");
            assert!(c.witnesses.is_empty(), "{name}: {:?}", c.witnesses);
        }
    }

    #[test]
    fn classification_grid_contains_endpoints() {
        let g = classification_grid(10.0, 256);
        assert_eq!(g.len(), 256);
        assert_eq!(g[0], 0.0);
        assert!((g[255] - 10.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn degenerate_set_is_detected_near_its_zero() {
        // a2 = t/2 makes adet = 1 - t^2/4 cross zero at t = 2
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
        let c = classify(&gen, 10.0, 256).unwrap();
        assert!(!c.nondegenerate);
        assert!(!c.riemannian);
        let w = c
            .witnesses
            .iter()
            .find(|w| w.scalar == "adet")
            .expect("nondegeneracy witness");
        assert!((w.t - 2.0).abs() < 0.2, "witness at t = {}", w.t);
    }

    #[test]
    fn pole_inside_range_is_an_error() {
        // denominator 1 - t has a pole at t = 1
        let gen = GeneratorSet {
            name: "pole".into(),
            a1: GeneratorCurve::Rational {
                num: vec![1.0],
                den: vec![1.0, -1.0],
            },
            a2: GeneratorCurve::zero(),
            a3: GeneratorCurve::zero(),
            b1: GeneratorCurve::zero(),
            b2: GeneratorCurve::zero(),
            b3: GeneratorCurve::zero(),
        };
        assert!(gen.derived_scalars(0.5).is_ok());
        assert!(matches!(
            gen.derived_scalars(1.0),
            Err(GnatError::CurvePole { .. })
        ));
        // the top endpoint of the classification grid lands on the pole
        assert!(classify(&gen, 1.0, 256).is_err());
    }

    #[test]
    fn negative_t_is_rejected() {
        let gen = GeneratorSet::sasaki();
        assert!(gen.derived_scalars(-0.1).is_err());
    }

    #[test]
    fn generator_json_round_trip() {
        let gen = GeneratorSet::cheeger_gromoll();
        let s = serde_json::to_string(&gen).unwrap();
        let back: GeneratorSet = serde_json::from_str(&s).unwrap();
        assert_eq!(gen, back);
        // documented wire shape for a single curve
        let c: GeneratorCurve =
            serde_json::from_str(r#"{"kind":"rational","num":[0.0,2.0],"den":[1.0,2.0]}"#)
                .unwrap();
        assert!(close(c.value(1.0).unwrap(), 2.0 / 3.0, 1e-15));
    }
}
