//! Expanded normal form: a sum of rational multiples of products of atoms
//! raised to rational powers.
//!
//! Atoms are variables, parameters, function symbols, transcendental
//! applications and (when nothing better is possible) whole sums raised to a
//! negative or fractional power. `cot z` and `coth z` are folded into
//! `tan(z)^(-1)` and `tanh(z)^(-1)` so that the tan/tanh identities produced
//! by differentiation cancel syntactically.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::eval::{eval_with, Env};
use super::{rational_to_f64, Expr, Func, Node, Rational, Var};
use crate::{Error, Result};

pub(crate) type Mono = BTreeMap<Expr, Rational>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Poly {
    pub(crate) terms: BTreeMap<Mono, Rational>,
}

impl Poly {
    pub(crate) fn constant(r: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(Mono::new(), r);
        }
        Poly { terms }
    }

    fn atom(e: Expr, exp: Rational) -> Self {
        let mut m = Mono::new();
        m.insert(e, exp);
        let mut terms = BTreeMap::new();
        terms.insert(m, Rational::one());
        Poly { terms }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: Mono, c: Rational) {
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
        }
    }

    fn add(mut self, other: Poly) -> Poly {
        for (m, c) in other.terms {
            self.add_term(m, c);
        }
        self
    }

    fn neg(mut self) -> Poly {
        for c in self.terms.values_mut() {
            *c = -*c;
        }
        self
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (a, e) in m2 {
                    let sum = m.get(a).copied().unwrap_or_else(Rational::zero) + e;
                    if sum.is_zero() {
                        m.remove(a);
                    } else {
                        m.insert(a.clone(), sum);
                    }
                }
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    fn powu(&self, n: u128) -> Poly {
        let mut acc = Poly::constant(Rational::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    fn single(&self) -> Option<(&Mono, Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(m, c)| (m, *c))
        } else {
            None
        }
    }

    fn inverse(&self) -> Poly {
        if self.is_zero() {
            return Poly::atom(Expr::zero(), -Rational::one());
        }
        if let Some((m, c)) = self.single() {
            let inv: Mono = m.iter().map(|(a, e)| (a.clone(), -e)).collect();
            let mut terms = BTreeMap::new();
            terms.insert(inv, c.recip());
            return Poly { terms };
        }
        // pull out the leading coefficient so that P and -P share one atom
        let lead = *self.terms.values().next().expect("non-empty");
        let monic = self.clone().scale(lead.recip());
        Poly::atom(monic.to_expr(), -Rational::one()).scale(lead.recip())
    }

    fn scale(mut self, r: Rational) -> Poly {
        if r.is_zero() {
            return Poly::default();
        }
        for c in self.terms.values_mut() {
            *c *= r;
        }
        self
    }

    pub(crate) fn from_expr(e: &Expr) -> Poly {
        match e.node() {
            Node::Const(r) => Poly::constant(*r),
            Node::Param(_) | Node::Var(_) => Poly::atom(e.clone(), Rational::one()),
            Node::Neg(a) => Poly::from_expr(a).neg(),
            Node::Add(a, b) => Poly::from_expr(a).add(Poly::from_expr(b)),
            Node::Sub(a, b) => Poly::from_expr(a).add(Poly::from_expr(b).neg()),
            Node::Mul(a, b) => Poly::from_expr(a).mul(&Poly::from_expr(b)),
            Node::Div(a, b) => Poly::from_expr(a).mul(&Poly::from_expr(b).inverse()),
            Node::Pow(b, r) => {
                let pb = Poly::from_expr(b);
                if r.is_integer() {
                    let n = *r.numer();
                    if n >= 0 {
                        pb.powu(n as u128)
                    } else {
                        pb.inverse().powu(n.unsigned_abs())
                    }
                } else if let Some((m, c)) = pb.single() {
                    let bare_atom = c.is_one() && m.len() == 1 && m.values().all(|e| e.is_one());
                    if bare_atom {
                        let a = m.keys().next().expect("one atom").clone();
                        Poly::atom(a, *r)
                    } else {
                        Poly::atom(Expr::new(Node::Pow(pb.to_expr(), *r)), Rational::one())
                    }
                } else {
                    Poly::atom(Expr::new(Node::Pow(pb.to_expr(), *r)), Rational::one())
                }
            }
            Node::Apply(f, z) => {
                let zc = Poly::from_expr(z).to_expr();
                match f {
                    Func::Cot => Poly::atom(Expr::apply(Func::Tan, zc), -Rational::one()),
                    Func::Coth => Poly::atom(Expr::apply(Func::Tanh, zc), -Rational::one()),
                    _ => Poly::atom(Expr::apply(*f, zc), Rational::one()),
                }
            }
            Node::Call { name, args, derivs } => {
                let args = args.iter().map(|a| Poly::from_expr(a).to_expr()).collect();
                Poly::atom(Expr::call_derivative(name, args, derivs.clone()), Rational::one())
            }
        }
    }

    pub(crate) fn to_expr(&self) -> Expr {
        let mut sum: Option<Expr> = None;
        for (m, c) in &self.terms {
            let negative = c.is_negative();
            let magnitude = c.abs();
            let first = sum.is_none();
            let term = term_expr(m, magnitude, negative && first);
            sum = Some(match sum {
                None => term,
                Some(s) if negative => Expr::new(Node::Sub(s, term)),
                Some(s) => Expr::new(Node::Add(s, term)),
            });
        }
        sum.unwrap_or_else(Expr::zero)
    }
}

fn power(atom: &Expr, e: Rational) -> Expr {
    if e.is_one() {
        atom.clone()
    } else {
        Expr::new(Node::Pow(atom.clone(), e))
    }
}

fn product(factors: Vec<Expr>) -> Option<Expr> {
    factors.into_iter().reduce(|a, b| Expr::new(Node::Mul(a, b)))
}

/// `|c| * num / den`, negated in place when `negate` is set.
fn term_expr(m: &Mono, c: Rational, negate: bool) -> Expr {
    let mut num: Vec<Expr> = Vec::new();
    let mut den: Vec<Expr> = Vec::new();
    let p = Rational::from_integer(*c.numer());
    let q = Rational::from_integer(*c.denom());
    if !p.is_one() {
        num.push(Expr::constant(if negate { -p } else { p }));
    }
    for (a, e) in m {
        if e.is_positive() {
            num.push(power(a, *e));
        } else {
            den.push(power(a, -e));
        }
    }
    if negate && p.is_one() {
        if num.is_empty() {
            num.push(Expr::int(-1));
        } else {
            num[0] = Expr::new(Node::Neg(num[0].clone()));
        }
    }
    if !q.is_one() {
        den.insert(0, Expr::constant(q));
    }
    let numer = product(num).unwrap_or_else(Expr::one);
    match product(den) {
        None => numer,
        Some(d) => Expr::new(Node::Div(numer, d)),
    }
}

/// Coefficients of a Laurent polynomial in `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentForm {
    pub coeffs: BTreeMap<i64, Expr>,
}

impl LaurentForm {
    pub fn min_power(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_power(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn coeff(&self, p: i64) -> Expr {
        self.coeffs.get(&p).cloned().unwrap_or_else(Expr::zero)
    }

    /// `sum_p coeff_p * u^p`.
    pub fn reassemble(&self) -> Expr {
        self.coeffs
            .iter()
            .map(|(p, c)| c * Expr::u().powi(*p as i128))
            .fold(Expr::zero(), |a, b| a + b)
    }
}

/// Split `e` into coefficients of integer powers of `var`. Every coefficient
/// is free of `var`; the map omits vanishing coefficients.
pub fn split_powers(e: &Expr, var: Var) -> Result<BTreeMap<i64, Expr>> {
    let target = Expr::var(var);
    let poly = Poly::from_expr(e);
    let mut groups: BTreeMap<i64, Poly> = BTreeMap::new();
    for (m, c) in &poly.terms {
        let mut rest = m.clone();
        let power = match rest.remove(&target) {
            None => 0,
            Some(r) if r.is_integer() => *r.numer() as i64,
            Some(r) => {
                return Err(Error::NotLaurent {
                    var: var.name().to_string(),
                    factor: format!("{}^({})", var.name(), r),
                })
            }
        };
        if let Some(a) = rest.keys().find(|a| a.contains_var(var)) {
            return Err(Error::NotLaurent {
                var: var.name().to_string(),
                factor: a.to_string(),
            });
        }
        groups.entry(power).or_default().add_term(rest, *c);
    }
    Ok(groups
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(k, p)| (k, p.to_expr()))
        .collect())
}

pub fn normalize_u_poly(e: &Expr) -> Result<LaurentForm> {
    Ok(LaurentForm {
        coeffs: split_powers(e, Var::U)?,
    })
}

enum Power {
    Int(i32),
    Real(f64),
}

/// A normal form prepared for repeated numeric evaluation: every distinct
/// atom is evaluated once per point.
pub(crate) struct CompiledPoly {
    atoms: Vec<Expr>,
    terms: Vec<(f64, Vec<(usize, Power)>)>,
}

impl CompiledPoly {
    pub(crate) fn new(poly: &Poly) -> Self {
        let mut index: BTreeMap<&Expr, usize> = BTreeMap::new();
        let mut atoms = Vec::new();
        let mut terms = Vec::with_capacity(poly.terms.len());
        for (m, c) in &poly.terms {
            let mut factors = Vec::with_capacity(m.len());
            for (a, e) in m {
                let i = *index.entry(a).or_insert_with(|| {
                    atoms.push(a.clone());
                    atoms.len() - 1
                });
                let p = if e.is_integer() && e.numer().abs() < i32::MAX as i128 {
                    Power::Int(*e.numer() as i32)
                } else {
                    Power::Real(rational_to_f64(e))
                };
                factors.push((i, p));
            }
            terms.push((rational_to_f64(c), factors));
        }
        CompiledPoly { atoms, terms }
    }

    /// Values of the individual additive terms at one point.
    pub(crate) fn term_values(&self, env: &Env, out: &mut Vec<f64>) -> Result<()> {
        let mut atom_values = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            atom_values.push(eval_with(a, env)?);
        }
        out.clear();
        for (c, factors) in &self.terms {
            let mut v = *c;
            for (i, p) in factors {
                let base = atom_values[*i];
                let f = match p {
                    Power::Int(n) => {
                        if *n < 0 && base.abs() < env.margin {
                            return Err(Error::Pole(self.atoms[*i].to_string()));
                        }
                        base.powi(*n)
                    }
                    Power::Real(r) => {
                        if base < 0.0 || (*r < 0.0 && base.abs() < env.margin) {
                            return Err(Error::Pole(self.atoms[*i].to_string()));
                        }
                        base.powf(*r)
                    }
                };
                v *= f;
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("term with coefficient {c}")));
            }
            out.push(v);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, rat, Context};

    fn p(s: &str) -> Expr {
        parse(s, &Context::new().with_param("c").with_function("B", 1)).unwrap()
    }

    #[test]
    fn laurent_examples() {
        let f = normalize_u_poly(&p("-(3/x^2)*u*(u-1)^2")).unwrap();
        assert_eq!(f.coeffs.len(), 3);
        assert!(f.coeff(1).same_normal_form(&p("-3/x^2")));
        assert!(f.coeff(2).same_normal_form(&p("6/x^2")));
        assert!(f.coeff(3).same_normal_form(&p("-3/x^2")));
        assert_eq!((f.min_power(), f.max_power()), (Some(1), Some(3)));

        let f = normalize_u_poly(&p("(u^2-1)/x")).unwrap();
        assert_eq!(f.coeffs.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
        assert!(f.coeff(0).same_normal_form(&p("-1/x")));
        assert!(f.coeff(2).same_normal_form(&p("1/x")));

        let f = normalize_u_poly(&p("u^(-2) + 2*c/u")).unwrap();
        assert_eq!(f.min_power(), Some(-2));
    }

    #[test]
    fn laurent_rejects_transcendental_u() {
        assert!(matches!(normalize_u_poly(&p("tan(u)")), Err(Error::NotLaurent { .. })));
        assert!(matches!(normalize_u_poly(&p("u^(1/2)")), Err(Error::NotLaurent { .. })));
        assert!(matches!(normalize_u_poly(&p("1/(1+u)")), Err(Error::NotLaurent { .. })));
    }

    #[test]
    fn cot_folds_into_tan() {
        assert!(p("tan(x)*cot(x)").same_normal_form(&Expr::one()));
        assert!(p("c/cot(x)^2").same_normal_form(&p("c*tan(x)^2")));
        assert!(p("coth(x)*tanh(x) - 1").simplify().is_zero_literal());
    }

    #[test]
    fn normal_form_is_idempotent() {
        for s in [
            "(x+1)^2/(2*x+2) - c*tan(x)^(-2)",
            "-3*u/(2*x) + B''(x)*u^3",
            "(1 + x)^(1/2) * (x - 1)^(-1) - 1/3",
            "x^(1/2)*x^(1/2) - x",
        ] {
            let once = p(s).simplify();
            assert_eq!(once.simplify(), once, "{s}");
        }
        assert!(p("x^(1/2)*x^(1/2) - x").simplify().is_zero_literal());
        assert_eq!(Poly::from_expr(&p("0.5*x")).terms.values().next(), Some(&rat(1, 2)));
    }
}
