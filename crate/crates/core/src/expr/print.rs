//! Printer producing text in the expression grammar. Parenthesization is
//! minimal but exact: reparsing the output yields the same tree for every
//! tree the parser can produce.

use num_traits::{Signed, Zero};

use super::{Expr, Node, Rational};

const ADD: u8 = 1;
const MUL: u8 = 2;
const PREFIX: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

pub(super) fn to_string(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, 0, &mut out);
    out
}

/// Terminating decimal expansion of `r`, if one exists.
fn decimal(r: &Rational) -> Option<String> {
    let mut d = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return None;
    }
    let digits = twos.max(fives);
    if digits == 0 {
        return Some(r.numer().to_string());
    }
    let scale = 10i128.checked_pow(digits)?;
    let scaled = r.numer().checked_mul(scale / r.denom())?;
    let neg = scaled < 0;
    let s = scaled.unsigned_abs().to_string();
    let s = if s.len() <= digits as usize {
        format!("{}{}", "0".repeat(digits as usize - s.len() + 1), s)
    } else {
        s
    };
    let (int, frac) = s.split_at(s.len() - digits as usize);
    Some(format!("{}{}.{}", if neg { "-" } else { "" }, int, frac))
}

fn const_text(r: &Rational) -> (String, u8) {
    if r.is_integer() {
        let level = if r.is_negative() { PREFIX } else { ATOM };
        return (r.numer().to_string(), level);
    }
    match decimal(r) {
        Some(s) => {
            let level = if r.is_negative() { PREFIX } else { ATOM };
            (s, level)
        }
        None => (format!("{}/{}", r.numer(), r.denom()), MUL),
    }
}

fn level(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => ADD,
        Node::Mul(..) | Node::Div(..) => MUL,
        Node::Neg(_) => PREFIX,
        Node::Pow(..) => POW,
        Node::Const(r) => const_text(r).1,
        Node::Param(_) | Node::Var(_) | Node::Apply(..) | Node::Call { .. } => ATOM,
    }
}

fn write_expr(e: &Expr, min_level: u8, out: &mut String) {
    if level(e) < min_level {
        out.push('(');
        write_expr(e, 0, out);
        out.push(')');
        return;
    }
    match e.node() {
        Node::Const(r) => out.push_str(&const_text(r).0),
        Node::Param(p) => out.push_str(p),
        Node::Var(v) => out.push_str(v.name()),
        Node::Neg(a) => {
            out.push('-');
            if matches!(a.node(), Node::Const(_)) {
                // `-3` would reparse as the constant -3
                out.push('(');
                write_expr(a, 0, out);
                out.push(')');
            } else {
                write_expr(a, PREFIX, out);
            }
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            write_expr(a, ADD, out);
            out.push_str(if matches!(e.node(), Node::Add(..)) {
                " + "
            } else {
                " - "
            });
            write_expr(b, MUL, out);
        }
        Node::Mul(a, b) | Node::Div(a, b) => {
            write_expr(a, MUL, out);
            out.push(if matches!(e.node(), Node::Mul(..)) { '*' } else { '/' });
            write_expr(b, PREFIX, out);
        }
        Node::Pow(b, r) => {
            write_expr(b, ATOM, out);
            out.push('^');
            if r.is_integer() && !r.is_negative() {
                out.push_str(&r.numer().to_string());
            } else if r.is_integer() {
                out.push_str(&format!("({})", r.numer()));
            } else {
                out.push_str(&format!("({}/{})", r.numer(), r.denom()));
            }
        }
        Node::Apply(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(a, 0, out);
            out.push(')');
        }
        Node::Call { name, args, derivs } => {
            out.push_str(name);
            if args.len() == 1 {
                for _ in 0..derivs[0] {
                    out.push('\'');
                }
            } else if derivs.iter().any(|d| !d.is_zero()) {
                let tags: Vec<String> = derivs.iter().map(|d| d.to_string()).collect();
                out.push_str(&format!("'[{}]", tags.join(",")));
            }
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(a, 0, out);
            }
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(decimal(&rat(1, 2)).unwrap(), "0.5");
        assert_eq!(decimal(&rat(-3, 4)).unwrap(), "-0.75");
        assert_eq!(decimal(&rat(1, 40)).unwrap(), "0.025");
        assert_eq!(decimal(&rat(7, 1)).unwrap(), "7");
        assert!(decimal(&rat(1, 3)).is_none());
    }

    #[test]
    fn precedence_drives_parentheses() {
        let x = Expr::x();
        let u = Expr::u();
        let e = Expr::new(Node::Mul(
            Expr::new(Node::Pow(u.clone(), rat(2, 1))),
            Expr::new(Node::Sub(Expr::one(), u.clone())),
        ));
        assert_eq!(e.to_string(), "u^2*(1 - u)");
        let e = Expr::new(Node::Pow(Expr::new(Node::Neg(x.clone())), rat(-2, 1)));
        assert_eq!(e.to_string(), "(-x)^(-2)");
        let e = Expr::new(Node::Neg(Expr::int(3)));
        assert_eq!(e.to_string(), "-(3)");
        let e = Expr::call_derivative("B", vec![x.clone()], vec![2]);
        assert_eq!(e.to_string(), "B''(x)");
        let e = Expr::call_derivative("phi", vec![Expr::t(), x], vec![0, 1]);
        assert_eq!(e.to_string(), "phi'[0,1](t, x)");
    }
}
