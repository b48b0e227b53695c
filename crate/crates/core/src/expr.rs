//! Closed-form scalar expressions over chart coordinates.
//!
//! Custom metrics enter the laboratory as small expression trees
//! (polynomial and trigonometric building blocks) that are evaluated
//! directly in jet arithmetic, so user-supplied charts get exact
//! derivatives through the same code path as the built-in ones.

use serde::{Deserialize, Serialize};

use crate::jet::Jet;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Expr {
    Const { value: f64 },
    Var { index: usize },
    Add { args: Vec<Expr> },
    Mul { args: Vec<Expr> },
    Sub { lhs: Box<Expr>, rhs: Box<Expr> },
    Div { num: Box<Expr>, den: Box<Expr> },
    Pow { base: Box<Expr>, exp: i32 },
    Sin { arg: Box<Expr> },
    Cos { arg: Box<Expr> },
    Exp { arg: Box<Expr> },
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const { value }
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var { index }
    }

    /// Largest variable index referenced, if any. Used to validate custom
    /// metric tables against the chart dimension before evaluation.
    pub fn max_var_index(&self) -> Option<usize> {
        match self {
            Expr::Const { .. } => None,
            Expr::Var { index } => Some(*index),
            Expr::Add { args } | Expr::Mul { args } => {
                args.iter().filter_map(|a| a.max_var_index()).max()
            }
            Expr::Sub { lhs, rhs } => lhs.max_var_index().max(rhs.max_var_index()),
            Expr::Div { num, den } => num.max_var_index().max(den.max_var_index()),
            Expr::Pow { base, .. } => base.max_var_index(),
            Expr::Sin { arg } | Expr::Cos { arg } | Expr::Exp { arg } => arg.max_var_index(),
        }
    }

    /// Evaluate on a full set of coordinate jets (one per variable, all with
    /// the same variable count and order).
    pub fn eval(&self, vars: &[Jet]) -> Jet {
        assert!(!vars.is_empty(), "expression evaluated without variables");
        let nvars = vars[0].nvars();
        let order = vars[0].order();
        match self {
            Expr::Const { value } => Jet::constant(nvars, order, *value),
            Expr::Var { index } => {
                assert!(*index < vars.len(), "expression variable out of range");
                vars[*index].clone()
            }
            Expr::Add { args } => args
                .iter()
                .fold(Jet::constant(nvars, order, 0.0), |acc, a| {
                    acc + a.eval(vars)
                }),
            Expr::Mul { args } => args
                .iter()
                .fold(Jet::constant(nvars, order, 1.0), |acc, a| {
                    acc * a.eval(vars)
                }),
            Expr::Sub { lhs, rhs } => lhs.eval(vars) - rhs.eval(vars),
            Expr::Div { num, den } => num.eval(vars) / den.eval(vars),
            Expr::Pow { base, exp } => base.eval(vars).powi(*exp),
            Expr::Sin { arg } => arg.eval(vars).sin(),
            Expr::Cos { arg } => arg.eval(vars).cos(),
            Expr::Exp { arg } => arg.eval(vars).exp(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let e = Expr::Mul {
            args: vec![
                Expr::constant(2.5),
                Expr::Pow {
                    base: Box::new(Expr::Sin {
                        arg: Box::new(Expr::var(0)),
                    }),
                    exp: 2,
                },
            ],
        };
        let s = serde_json::to_string(&e).unwrap();
        let back: Expr = serde_json::from_str(&s).unwrap();
        assert_eq!(e, back);
        assert_eq!(e.max_var_index(), Some(0));
    }

    #[test]
    fn parses_documented_shape() {
        let s = r#"{"kind":"div",
                    "num":{"kind":"const","value":1.0},
                    "den":{"kind":"add","args":[
                        {"kind":"const","value":1.0},
                        {"kind":"pow","base":{"kind":"var","index":1},"exp":2}]}}"#;
        let e: Expr = serde_json::from_str(s).unwrap();
        let x = Jet::variable(2, 3, 0, 0.3);
        let y = Jet::variable(2, 3, 1, 2.0);
        let j = e.eval(&[x, y]);
        assert!((j.value() - 0.2).abs() < 1e-15);
        // d/dy 1/(1+y^2) = -2y/(1+y^2)^2 = -4/25
        assert!((j.d(1) + 0.16).abs() < 1e-15);
        assert_eq!(j.d(0), 0.0);
    }

    #[test]
    fn evaluates_trig_polynomial() {
        // 3 x^2 + cos(y) sin(x)
        let e = Expr::Add {
            args: vec![
                Expr::Mul {
                    args: vec![
                        Expr::constant(3.0),
                        Expr::Pow {
                            base: Box::new(Expr::var(0)),
                            exp: 2,
                        },
                    ],
                },
                Expr::Mul {
                    args: vec![
                        Expr::Cos {
                            arg: Box::new(Expr::var(1)),
                        },
                        Expr::Sin {
                            arg: Box::new(Expr::var(0)),
                        },
                    ],
                },
            ],
        };
        let (xv, yv) = (1.2, 0.4);
        let x = Jet::variable(2, 2, 0, xv);
        let y = Jet::variable(2, 2, 1, yv);
        let j = e.eval(&[x, y]);
        assert!((j.value() - (3.0 * xv * xv + yv.cos() * xv.sin())).abs() < 1e-14);
        assert!((j.d(0) - (6.0 * xv + yv.cos() * xv.cos())).abs() < 1e-14);
        // d2/dxdy of cos(y) sin(x) = -sin(y) cos(x)
        assert!((j.d2(0, 1) + yv.sin() * xv.cos()).abs() < 1e-14);
    }
}
