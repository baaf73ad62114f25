use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use symred::catalog::{self, transform_entry};
use symred::detsys::{conditional_invariance_residual, determining_system_tau1, split_tau1_residual};
use symred::expr::{
    eval_numeric, is_zero, normalize_u_poly, parse, rat, Bindings, Context, Env, Expr, Func, FunctionDef, Var,
    ZeroTestPolicy,
};
use symred::model::{Pde, ReductionOperator};
use symred::verify::{random_transform, verify_entry};

fn small_rational() -> impl Strategy<Value = Expr> {
    (-6i128..=6, 1i128..=4).prop_map(|(n, d)| Expr::constant(rat(n, d)))
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![Just(Expr::t()), Just(Expr::x()), Just(Expr::u()), small_rational()]
}

/// Smooth expressions in t, x, u; division only by quantities bounded away
/// from zero.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (Expr::int(2) + &b * &b)),
            (inner.clone(), 0i128..=3).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(Expr::tanh),
            inner.clone().prop_map(|a| (a * Expr::constant(rat(1, 4))).exp()),
            inner.prop_map(|a| Expr::apply(Func::Ln, Expr::int(1) + &a * &a)),
        ]
    })
}

fn point() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.2f64..0.9, 0.7f64..2.8, -1.8f64..1.8)
}

fn eval_at(e: &Expr, t: f64, x: f64, u: f64) -> Option<f64> {
    eval_numeric(e, &Env::at(t, x, u))
        .ok()
        .filter(|v| v.is_finite() && v.abs() < 1e8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn derivative_matches_central_difference(e in smooth_expr(), (t, x, u) in point(), which in 0usize..3) {
        let v = [Var::T, Var::X, Var::U][which];
        let h = 1e-5;
        let shift = |s: f64| match v {
            Var::T => (t + s, x, u),
            Var::X => (t, x + s, u),
            _ => (t, x, u + s),
        };
        let (a, b) = (shift(h), shift(-h));
        let (Some(fp), Some(fm), Some(f0)) = (eval_at(&e, a.0, a.1, a.2), eval_at(&e, b.0, b.1, b.2), eval_at(&e, t, x, u)) else {
            return Err(TestCaseError::reject("not finite"));
        };
        let d = eval_at(&e.differentiate(v), t, x, u).expect("derivative evaluates where e does");
        let fd = (fp - fm) / (2.0 * h);
        let scale = d.abs().max(f0.abs()).max(1.0);
        prop_assert!((fd - d).abs() <= 1e-6 * scale, "{e}: d = {d}, fd = {fd}");
    }

    #[test]
    fn print_then_parse_is_identity(e in smooth_expr()) {
        let back = parse(&e.to_string(), &Context::new()).unwrap();
        prop_assert_eq!(back.to_string(), e.to_string());
        prop_assert!(back.same_normal_form(&e));
    }
}

fn coefficient() -> impl Strategy<Value = Expr> {
    prop_oneof![
        small_rational(),
        small_rational().prop_map(|c| c * Expr::x()),
        small_rational().prop_map(|c| c * Expr::t() * Expr::x().powi(-1)),
        small_rational().prop_map(|c| c * Expr::x().tan()),
        small_rational().prop_map(|c| c * Expr::apply(Func::Exp, Expr::t())),
    ]
}

fn laurent_expr() -> impl Strategy<Value = Expr> {
    let factor = (coefficient(), coefficient(), -1i128..=2)
        .prop_map(|(a, b, p)| (a * Expr::u() + b).powi(2) * Expr::u().powi(p));
    prop::collection::vec(factor, 1..4).prop_map(|fs| fs.into_iter().fold(Expr::zero(), |acc, f| acc + f))
}

fn x_function() -> impl Strategy<Value = Expr> {
    prop_oneof![
        small_rational().prop_map(|c| c * Expr::x() * Expr::x()),
        small_rational().prop_map(|c| (c * Expr::x()).sin()),
        small_rational().prop_map(|c| Expr::x().tanh() + c),
        small_rational().prop_map(|c| (c * Expr::x()).exp()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn laurent_form_reassembles(e in laurent_expr()) {
        let form = normalize_u_poly(&e).unwrap();
        let back = form.reassemble();
        for c in form.coeffs.values() {
            prop_assert!(!c.contains_var(Var::U));
        }
        prop_assert!(is_zero(&(back - e), &ZeroTestPolicy::default()).unwrap().is_zero);
    }

    /// `F` is a free function of `x`; resolving it before or after
    /// differentiation gives the same expression.
    #[test]
    fn substitution_commutes_with_differentiation(body in smooth_expr(), def in x_function(), which in 0usize..3) {
        let v = [Var::T, Var::X, Var::U][which];
        let f = Expr::call("F", vec![Expr::x()]);
        let e = &body * &f + f.powi(2) * Expr::x();
        let b = Bindings::new().function("F", FunctionDef::new(vec![Var::X], def));
        let first = e.substitute(&b).unwrap().differentiate(v);
        let second = e.differentiate(v).substitute(&b).unwrap();
        let out = is_zero(&(first - second), &ZeroTestPolicy::default()).unwrap();
        prop_assert!(out.is_zero, "{:?}", out.witness);
    }

    /// Chain rule for `u := g(t, x)`.
    #[test]
    fn chain_rule_through_u(e in smooth_expr(), g in smooth_expr()) {
        let g = g.subs_vars(&[(Var::U, Expr::x())]);
        let at = |e: &Expr| e.subs_vars(&[(Var::U, g.clone())]);
        let lhs = at(&e).differentiate(Var::X);
        let rhs = at(&e.differentiate(Var::X)) + at(&e.differentiate(Var::U)) * g.differentiate(Var::X);
        let out = is_zero(&(lhs - rhs), &ZeroTestPolicy::default()).unwrap();
        prop_assert!(out.is_zero, "{:?}", out.witness);
    }
}

fn quadratic_in_u() -> impl Strategy<Value = Expr> {
    prop::collection::vec(prop::option::of(coefficient()), 3).prop_map(|cs| {
        cs.into_iter()
            .enumerate()
            .filter_map(|(j, c)| c.map(|c| c * Expr::u().powi(j as i128)))
            .fold(Expr::zero(), |a, b| a + b)
    })
}

fn coefficient_k() -> impl Strategy<Value = Expr> {
    (small_rational(), -2i128..=2, coefficient()).prop_map(|(c, p, extra)| {
        let c = if c.is_zero_literal() { Expr::one() } else { c };
        c * Expr::x().powi(p) + extra.subs_vars(&[(Var::T, Expr::one())])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// The prolongation split equals the transcribed system residual by
    /// residual; the last three coefficients carry the opposite sign.
    #[test]
    fn prolongation_matches_transcription(k in coefficient_k(), xi in quadratic_in_u(), eta in quadratic_in_u()) {
        let Ok(pde) = Pde::new(k) else {
            return Err(TestCaseError::reject("k vanishes"));
        };
        let sys = determining_system_tau1(&pde, &xi, &eta);
        let op = ReductionOperator::tau1(xi, eta);
        let split = split_tau1_residual(&conditional_invariance_residual(&pde, &op)).unwrap();
        let policy = ZeroTestPolicy::default();
        for (i, (r, p)) in sys.residuals.iter().zip(split).enumerate() {
            let diff = if i == 0 { &r.expr - p } else { &r.expr + p };
            let out = is_zero(&diff, &policy).unwrap();
            prop_assert!(out.is_zero, "{}: {:?}", r.label, out.witness);
        }
    }
}

#[test]
fn verdicts_are_equivariant() {
    let policy = ZeroTestPolicy::default();
    let entries: Vec<_> = catalog::all_cases()
        .into_iter()
        .chain(catalog::negative_controls())
        .collect();
    for (i, entry) in entries.iter().enumerate() {
        let before = verify_entry(entry, &policy);
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        for _ in 0..5 {
            let g = random_transform(&mut rng);
            let image = transform_entry(&g, entry).unwrap();
            let after = verify_entry(&image, &policy);
            assert_eq!(
                before.passed, after.passed,
                "{} under {g:?}: {:?}",
                entry.id, after.error
            );
        }
    }
}

#[test]
fn catalog_expressions_parse_back_structurally() {
    let ctx = Context::new()
        .with_param("c")
        .with_function("k", 1)
        .with_function("B", 1);
    for e in catalog::all_cases().iter().chain(&catalog::negative_controls()) {
        for x in e.exprs() {
            assert_eq!(parse(&x.to_string(), &ctx).unwrap(), x, "{}", e.id);
        }
    }
}
