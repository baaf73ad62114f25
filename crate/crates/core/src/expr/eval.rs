use std::collections::BTreeMap;

use super::{rational_to_f64, Expr, Func, Node, Var};
use crate::{Error, Result};

/// Denominators and poles closer to zero than this are reported as errors by
/// [`eval_numeric`].
pub const DEFAULT_POLE_MARGIN: f64 = 1e-12;

/// Numeric bindings for one evaluation.
#[derive(Clone, Debug)]
pub struct Env {
    vars: [Option<f64>; 8],
    pub params: BTreeMap<String, f64>,
    pub margin: f64,
}

impl Default for Env {
    fn default() -> Self {
        Env {
            vars: [None; 8],
            params: BTreeMap::new(),
            margin: DEFAULT_POLE_MARGIN,
        }
    }
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn at(t: f64, x: f64, u: f64) -> Self {
        Env::new().with(Var::T, t).with(Var::X, x).with(Var::U, u)
    }

    pub fn with(mut self, v: Var, value: f64) -> Self {
        self.vars[v.index()] = Some(value);
        self
    }

    pub fn set(&mut self, v: Var, value: f64) {
        self.vars[v.index()] = Some(value);
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        self.vars[v.index()]
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }
}

/// Evaluate `e` in double precision. Function symbols must be substituted
/// away beforehand; poles, domain violations and non-finite results are
/// errors rather than NaN/Inf values.
pub fn eval_numeric(e: &Expr, env: &Env) -> Result<f64> {
    eval_with(e, env)
}

fn pole(e: &Expr) -> Error {
    Error::Pole(e.to_string())
}

pub(crate) fn eval_with(e: &Expr, env: &Env) -> Result<f64> {
    let v = match e.node() {
        Node::Const(r) => rational_to_f64(r),
        Node::Param(p) => *env.params.get(p).ok_or_else(|| Error::Unbound(p.clone()))?,
        Node::Var(v) => env.get(*v).ok_or_else(|| Error::Unbound(v.name().to_string()))?,
        Node::Neg(a) => -eval_with(a, env)?,
        Node::Add(a, b) => eval_with(a, env)? + eval_with(b, env)?,
        Node::Sub(a, b) => eval_with(a, env)? - eval_with(b, env)?,
        Node::Mul(a, b) => eval_with(a, env)? * eval_with(b, env)?,
        Node::Div(a, b) => {
            let d = eval_with(b, env)?;
            if d.abs() < env.margin {
                return Err(pole(e));
            }
            eval_with(a, env)? / d
        }
        Node::Pow(b, r) => {
            let base = eval_with(b, env)?;
            if r.is_integer() {
                let n = *r.numer();
                if n < 0 && base.abs() < env.margin {
                    return Err(pole(e));
                }
                if n.abs() <= i32::MAX as i128 {
                    base.powi(n as i32)
                } else {
                    base.powf(n as f64)
                }
            } else {
                if base < 0.0 || (*r.numer() < 0 && base.abs() < env.margin) {
                    return Err(pole(e));
                }
                base.powf(rational_to_f64(r))
            }
        }
        Node::Apply(f, z) => {
            let z = eval_with(z, env)?;
            match f {
                Func::Tan => {
                    if z.cos().abs() < env.margin {
                        return Err(pole(e));
                    }
                    z.tan()
                }
                Func::Cot => {
                    if z.sin().abs() < env.margin {
                        return Err(pole(e));
                    }
                    z.cos() / z.sin()
                }
                Func::Tanh => z.tanh(),
                Func::Coth => {
                    let th = z.tanh();
                    if th.abs() < env.margin {
                        return Err(pole(e));
                    }
                    1.0 / th
                }
                Func::Sin => z.sin(),
                Func::Cos => z.cos(),
                Func::Exp => z.exp(),
                Func::Ln => {
                    if z <= 0.0 || z < env.margin {
                        return Err(pole(e));
                    }
                    z.ln()
                }
            }
        }
        Node::Call { name, .. } => return Err(Error::Unbound(format!("{name}(..)"))),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(e.to_string()))
    }
}
