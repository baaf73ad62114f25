//! Symbolic expressions over the jet variables `t, x, u` (plus the formal
//! derivative slots `u_t, u_x, ...`), named parameters and unknown
//! function symbols.
//!
//! Trees are immutable and reference counted, so cloning is cheap and
//! expressions can be shared across threads. Arithmetic through the
//! operator impls goes through light-weight smart constructors (`0 + a = a`,
//! `1 * a = a`, constant folding); the parser builds raw nodes instead so
//! that a parsed tree mirrors its source text.

mod diff;
mod eval;
mod normal;
mod parse;
mod print;
mod subst;
mod zero;

use std::collections::BTreeMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub use eval::{eval_numeric, Env, DEFAULT_POLE_MARGIN};
pub use normal::{normalize_u_poly, split_powers, LaurentForm};
pub use parse::{parse, Context};
pub use subst::{Bindings, FunctionDef};
pub use zero::{is_zero, Interval, ParamRange, SampleBox, Witness, ZeroTestOutcome, ZeroTestPolicy};

/// Exact rational used for constants and exponents.
pub type Rational = Ratio<i128>;

pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// Independent variables and the formal derivative slots of the jet space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    X,
    U,
    Ut,
    Ux,
    Utt,
    Utx,
    Uxx,
}

impl Var {
    pub const ALL: [Var; 8] = [Var::T, Var::X, Var::U, Var::Ut, Var::Ux, Var::Utt, Var::Utx, Var::Uxx];

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::U => "u",
            Var::Ut => "u_t",
            Var::Ux => "u_x",
            Var::Utt => "u_tt",
            Var::Utx => "u_tx",
            Var::Uxx => "u_xx",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// True for `u_t, u_x, ...`; these never come out of the parser.
    pub fn is_slot(self) -> bool {
        !matches!(self, Var::T | Var::X | Var::U)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Tan,
    Tanh,
    Cot,
    Coth,
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Tan => "tan",
            Func::Tanh => "tanh",
            Func::Cot => "cot",
            Func::Coth => "coth",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "tan" => Func::Tan,
            "tanh" => Func::Tanh,
            "cot" => Func::Cot,
            "coth" => Func::Coth,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Param(String),
    Var(Var),
    Neg(Expr),
    Apply(Func, Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Rational),
    /// Unknown function symbol with one derivative order per argument.
    Call {
        name: String,
        args: Vec<Expr>,
        derivs: Vec<u32>,
    },
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    pub fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(r: Rational) -> Self {
        Expr::new(Node::Const(r))
    }

    pub fn int(n: i128) -> Self {
        Expr::constant(Rational::from_integer(n))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn var(v: Var) -> Self {
        Expr::new(Node::Var(v))
    }

    pub fn t() -> Self {
        Expr::var(Var::T)
    }

    pub fn x() -> Self {
        Expr::var(Var::X)
    }

    pub fn u() -> Self {
        Expr::var(Var::U)
    }

    pub fn param(name: &str) -> Self {
        Expr::new(Node::Param(name.to_string()))
    }

    /// Undifferentiated function symbol `name(args)`.
    pub fn call(name: &str, args: Vec<Expr>) -> Self {
        let derivs = vec![0; args.len()];
        Expr::new(Node::Call {
            name: name.to_string(),
            args,
            derivs,
        })
    }

    pub fn call_derivative(name: &str, args: Vec<Expr>, derivs: Vec<u32>) -> Self {
        assert_eq!(args.len(), derivs.len(), "one derivative order per argument");
        Expr::new(Node::Call {
            name: name.to_string(),
            args,
            derivs,
        })
    }

    pub fn as_const(&self) -> Option<Rational> {
        match self.node() {
            Node::Const(r) => Some(*r),
            _ => None,
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        self.as_const().is_some_and(|r| r.is_zero())
    }

    pub fn is_one_literal(&self) -> bool {
        self.as_const().is_some_and(|r| r.is_one())
    }

    pub fn apply(f: Func, arg: Expr) -> Self {
        Expr::new(Node::Apply(f, arg))
    }

    pub fn tan(self) -> Self {
        Expr::apply(Func::Tan, self)
    }

    pub fn tanh(self) -> Self {
        Expr::apply(Func::Tanh, self)
    }

    pub fn cot(self) -> Self {
        Expr::apply(Func::Cot, self)
    }

    pub fn coth(self) -> Self {
        Expr::apply(Func::Coth, self)
    }

    pub fn sin(self) -> Self {
        Expr::apply(Func::Sin, self)
    }

    pub fn cos(self) -> Self {
        Expr::apply(Func::Cos, self)
    }

    pub fn exp(self) -> Self {
        Expr::apply(Func::Exp, self)
    }

    pub fn ln(self) -> Self {
        Expr::apply(Func::Ln, self)
    }

    pub fn powi(self, n: i128) -> Self {
        self.pow(Rational::from_integer(n))
    }

    pub fn pow(self, r: Rational) -> Self {
        if r.is_zero() {
            return Expr::one();
        }
        if r.is_one() {
            return self;
        }
        if let Some(c) = self.as_const() {
            if r.is_integer() {
                if c.is_zero() && r.is_negative() {
                    return Expr::new(Node::Pow(self, r));
                }
                return Expr::constant(rational_powi(c, r.to_integer()));
            }
        }
        Expr::new(Node::Pow(self, r))
    }

    /// True if `v` occurs anywhere in the tree (including inside function
    /// symbol arguments).
    pub fn contains_var(&self, v: Var) -> bool {
        match self.node() {
            Node::Var(w) => *w == v,
            Node::Const(_) | Node::Param(_) => false,
            Node::Neg(a) | Node::Apply(_, a) | Node::Pow(a, _) => a.contains_var(v),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.contains_var(v) || b.contains_var(v)
            }
            Node::Call { args, .. } => args.iter().any(|a| a.contains_var(v)),
        }
    }

    pub fn contains_param(&self, name: &str) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if let Node::Param(p) = e.node() {
                found |= p == name;
            }
        });
        found
    }

    pub fn params(&self) -> Vec<String> {
        let mut out = std::collections::BTreeSet::new();
        self.visit(&mut |e| {
            if let Node::Param(p) = e.node() {
                out.insert(p.clone());
            }
        });
        out.into_iter().collect()
    }

    /// Names and arities of the function symbols in the tree.
    pub fn functions(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        self.visit(&mut |e| {
            if let Node::Call { name, args, .. } = e.node() {
                out.insert(name.clone(), args.len());
            }
        });
        out
    }

    pub fn has_functions(&self) -> bool {
        !self.functions().is_empty()
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self.node() {
            Node::Const(_) | Node::Param(_) | Node::Var(_) => {}
            Node::Neg(a) | Node::Apply(_, a) | Node::Pow(a, _) => a.visit(f),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Node::Call { args, .. } => args.iter().for_each(|a| a.visit(f)),
        }
    }

    /// Expanded, collected form of the expression (see [`normal`]).
    pub fn simplify(&self) -> Expr {
        normal::Poly::from_expr(self).to_expr()
    }

    /// Structural equality after simplification.
    pub fn same_normal_form(&self, other: &Expr) -> bool {
        normal::Poly::from_expr(self) == normal::Poly::from_expr(other)
    }

    pub fn differentiate(&self, v: Var) -> Expr {
        diff::differentiate(self, v)
    }

    /// Repeated derivative, applied left to right.
    pub fn d(&self, vars: &[Var]) -> Expr {
        vars.iter().fold(self.clone(), |e, &v| e.differentiate(v))
    }

    pub fn substitute(&self, bindings: &Bindings) -> crate::Result<Expr> {
        bindings.apply(self)
    }

    /// Replace variables only; never fails.
    pub fn subs_vars(&self, map: &[(Var, Expr)]) -> Expr {
        let mut b = Bindings::new();
        for (v, e) in map {
            b = b.var(*v, e.clone());
        }
        b.apply(self).expect("variable substitution cannot fail")
    }

    pub fn subs_params(&self, values: &BTreeMap<String, Rational>) -> Expr {
        let mut b = Bindings::new();
        for (p, r) in values {
            b = b.param(p, Expr::constant(*r));
        }
        b.apply(self).expect("parameter substitution cannot fail")
    }
}

pub(crate) fn rational_powi(base: Rational, n: i128) -> Rational {
    let mut acc = Rational::one();
    let b = if n < 0 { base.recip() } else { base };
    for _ in 0..n.unsigned_abs() {
        acc *= b;
    }
    acc
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Nearest rational with a bounded denominator (used for user-supplied
/// decimal constants and random draws).
pub fn rational_from_f64(v: f64) -> Rational {
    let scale: i128 = 1 << 40;
    Rational::new((v * scale as f64).round() as i128, scale)
}

impl From<i128> for Expr {
    fn from(n: i128) -> Self {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(r: Rational) -> Self {
        Expr::constant(r)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::var(v)
    }
}

fn smart_add(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        (Some(x), _) if x.is_zero() => b,
        (_, Some(y)) if y.is_zero() => a,
        _ => Expr::new(Node::Add(a, b)),
    }
}

fn smart_sub(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x - y),
        (Some(x), _) if x.is_zero() => smart_neg(b),
        (_, Some(y)) if y.is_zero() => a,
        _ => Expr::new(Node::Sub(a, b)),
    }
}

fn smart_mul(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        (Some(x), _) if x.is_zero() => a,
        (_, Some(y)) if y.is_zero() => b,
        (Some(x), _) if x.is_one() => b,
        (_, Some(y)) if y.is_one() => a,
        (Some(x), _) if x == -Rational::one() => smart_neg(b),
        (_, Some(y)) if y == -Rational::one() => smart_neg(a),
        _ => Expr::new(Node::Mul(a, b)),
    }
}

fn smart_div(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if !y.is_zero() => Expr::constant(x / y),
        (Some(x), _) if x.is_zero() => a,
        (_, Some(y)) if y.is_one() => a,
        _ => Expr::new(Node::Div(a, b)),
    }
}

fn smart_neg(a: Expr) -> Expr {
    match a.node() {
        Node::Const(r) => Expr::constant(-r),
        Node::Neg(inner) => inner.clone(),
        _ => Expr::new(Node::Neg(a)),
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $f:ident) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(self, rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(self, rhs.clone())
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(self.clone(), rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(self.clone(), rhs.clone())
            }
        }
        impl ops::$tr<i128> for Expr {
            type Output = Expr;
            fn $method(self, rhs: i128) -> Expr {
                $f(self, Expr::int(rhs))
            }
        }
        impl ops::$tr<i128> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: i128) -> Expr {
                $f(self.clone(), Expr::int(rhs))
            }
        }
        impl ops::$tr<Expr> for i128 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(Expr::int(self), rhs)
            }
        }
        impl ops::$tr<&Expr> for i128 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(Expr::int(self), rhs.clone())
            }
        }
    };
}

binop!(Add, add, smart_add);
binop!(Sub, sub, smart_sub);
binop!(Mul, mul, smart_mul);
binop!(Div, div, smart_div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        smart_neg(self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        smart_neg(self.clone())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::to_string(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smart_constructors_fold_trivial_cases() {
        let x = Expr::x();
        assert_eq!(&x + 0, x);
        assert_eq!(&x * 1, x);
        assert!((&x * Expr::zero()).is_zero_literal());
        assert_eq!(Expr::int(2) * Expr::int(3), Expr::int(6));
        assert_eq!(-(-x.clone()), x);
        assert_eq!(Expr::int(2).powi(-2), Expr::constant(rat(1, 4)));
    }

    #[test]
    fn function_symbols_are_collected() {
        let e = Expr::call("psi", vec![Expr::x()]) * Expr::call("phi", vec![Expr::t(), Expr::x()]);
        let fs = e.functions();
        assert_eq!(fs.get("psi"), Some(&1));
        assert_eq!(fs.get("phi"), Some(&2));
        assert!(e.contains_var(Var::T));
        assert!(!e.contains_var(Var::U));
    }
}
