//! Exact symbolic differentiation. Derivatives of tan/cot/tanh/coth stay in
//! the same family (`d tan z = 1 + tan(z)^2`, ...), so no sec/csc nodes are
//! ever created.

use num_traits::One;

use super::{Expr, Func, Node, Var};

pub(super) fn differentiate(e: &Expr, v: Var) -> Expr {
    match e.node() {
        Node::Const(_) | Node::Param(_) => Expr::zero(),
        Node::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Neg(a) => -differentiate(a, v),
        Node::Add(a, b) => differentiate(a, v) + differentiate(b, v),
        Node::Sub(a, b) => differentiate(a, v) - differentiate(b, v),
        Node::Mul(a, b) => differentiate(a, v) * b + a * differentiate(b, v),
        Node::Div(a, b) => {
            let da = differentiate(a, v);
            let db = differentiate(b, v);
            if db.is_zero_literal() {
                da / b
            } else {
                (da * b - a * db) / b.clone().powi(2)
            }
        }
        Node::Pow(b, r) => {
            let db = differentiate(b, v);
            if db.is_zero_literal() {
                return Expr::zero();
            }
            Expr::constant(*r) * b.clone().pow(r - super::Rational::one()) * db
        }
        Node::Apply(f, z) => {
            let dz = differentiate(z, v);
            if dz.is_zero_literal() {
                return Expr::zero();
            }
            let outer = match f {
                Func::Tan => 1 + z.clone().tan().powi(2),
                Func::Cot => -1 - z.clone().cot().powi(2),
                Func::Tanh => 1 - z.clone().tanh().powi(2),
                Func::Coth => 1 - z.clone().coth().powi(2),
                Func::Sin => z.clone().cos(),
                Func::Cos => -z.clone().sin(),
                Func::Exp => e.clone(),
                Func::Ln => return dz / z,
            };
            outer * dz
        }
        Node::Call { name, args, derivs } => {
            let mut total = Expr::zero();
            for (i, arg) in args.iter().enumerate() {
                let da = differentiate(arg, v);
                if da.is_zero_literal() {
                    continue;
                }
                let mut tags = derivs.clone();
                tags[i] += 1;
                total = total + Expr::call_derivative(name, args.clone(), tags) * da;
            }
            total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Context};

    fn p(s: &str) -> Expr {
        parse(
            s,
            &Context::new()
                .with_param("c")
                .with_function("psi", 1)
                .with_function("k", 1),
        )
        .unwrap()
    }

    #[test]
    fn tan_family_stays_closed() {
        assert!(p("tan(x)").differentiate(Var::X).same_normal_form(&p("1 + tan(x)^2")));
        assert!(p("cot(x)").differentiate(Var::X).same_normal_form(&p("-1 - cot(x)^2")));
        assert!(p("tanh(x)").differentiate(Var::X).same_normal_form(&p("1 - tanh(x)^2")));
        assert!(p("coth(x)").differentiate(Var::X).same_normal_form(&p("1 - coth(x)^2")));
        assert!(p("tan(2*x)")
            .differentiate(Var::X)
            .same_normal_form(&p("2 + 2*tan(2*x)^2")));
    }

    #[test]
    fn product_and_power_rules() {
        let d = p("k(x)*u^2*(1-u)").differentiate(Var::U);
        assert!(d.same_normal_form(&p("k(x)*(2*u - 3*u^2)")));
        let d = p("c/psi(x)^2").differentiate(Var::X);
        assert!(d.same_normal_form(&p("-2*c*psi'(x)*psi(x)^(-3)")));
    }

    #[test]
    fn function_symbols_gain_tags_through_the_chain_rule() {
        let ctx = Context::new().with_function("f", 2);
        let e = parse("f(x*t, u)", &ctx).unwrap();
        let d = e.differentiate(Var::X);
        let want = parse("f'[1,0](x*t, u)*t", &ctx).unwrap();
        assert!(d.same_normal_form(&want));
        assert!(e.differentiate(Var::Ux).is_zero_literal());
    }
}
