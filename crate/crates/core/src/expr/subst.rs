use std::collections::BTreeMap;

use super::{Expr, Node, Var};
use crate::{Error, Result};

/// Replacement for a function symbol, written in terms of formal argument
/// variables: `psi(x) := -cot(x)` is `FunctionDef::new(vec![Var::X], -cot(x))`.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDef {
    pub args: Vec<Var>,
    pub body: Expr,
}

impl FunctionDef {
    pub fn new(args: Vec<Var>, body: Expr) -> Self {
        FunctionDef { args, body }
    }

    /// Derivative of the body given per-argument orders, with the formal
    /// arguments replaced by `actual`.
    fn instantiate(&self, name: &str, derivs: &[u32], actual: &[Expr]) -> Result<Expr> {
        if actual.len() != self.args.len() {
            return Err(Error::Arity {
                name: name.to_string(),
                expected: self.args.len(),
                found: actual.len(),
            });
        }
        let mut body = self.body.clone();
        for (v, n) in self.args.iter().zip(derivs) {
            for _ in 0..*n {
                body = body.differentiate(*v);
            }
        }
        let map: Vec<(Var, Expr)> = self.args.iter().copied().zip(actual.iter().cloned()).collect();
        Ok(body.subs_vars(&map))
    }
}

/// Simultaneous substitution of variables, parameters and function symbols.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    vars: BTreeMap<Var, Expr>,
    params: BTreeMap<String, Expr>,
    functions: BTreeMap<String, FunctionDef>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(mut self, v: Var, e: Expr) -> Self {
        self.vars.insert(v, e);
        self
    }

    pub fn param(mut self, name: &str, e: Expr) -> Self {
        self.params.insert(name.to_string(), e);
        self
    }

    pub fn function(mut self, name: &str, def: FunctionDef) -> Self {
        self.functions.insert(name.to_string(), def);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.params.is_empty() && self.functions.is_empty()
    }

    pub fn apply(&self, e: &Expr) -> Result<Expr> {
        if self.is_empty() {
            return Ok(e.clone());
        }
        self.walk(e)
    }

    fn walk(&self, e: &Expr) -> Result<Expr> {
        Ok(match e.node() {
            Node::Const(_) => e.clone(),
            Node::Var(v) => self.vars.get(v).cloned().unwrap_or_else(|| e.clone()),
            Node::Param(p) => self.params.get(p).cloned().unwrap_or_else(|| e.clone()),
            Node::Neg(a) => -self.walk(a)?,
            Node::Add(a, b) => self.walk(a)? + self.walk(b)?,
            Node::Sub(a, b) => self.walk(a)? - self.walk(b)?,
            Node::Mul(a, b) => self.walk(a)? * self.walk(b)?,
            Node::Div(a, b) => self.walk(a)? / self.walk(b)?,
            Node::Pow(b, r) => self.walk(b)?.pow(*r),
            Node::Apply(f, z) => Expr::apply(*f, self.walk(z)?),
            Node::Call { name, args, derivs } => {
                let args = args.iter().map(|a| self.walk(a)).collect::<Result<Vec<_>>>()?;
                match self.functions.get(name) {
                    Some(def) => def.instantiate(name, derivs, &args)?,
                    None => Expr::call_derivative(name, args, derivs.clone()),
                }
            }
        })
    }
}
