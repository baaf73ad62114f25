// Parse an expression, differentiate it and test identities numerically.

use symred::expr::{eval_numeric, is_zero, parse, Context, Env, Var, ZeroTestPolicy};

pub fn run_example() -> symred::Result<()> {
    let ctx = Context::new().with_param("c").with_function("B", 1);
    let e = parse("c*x^(-2)*u^2*(1 - u) + B(x)*tan(x)", &ctx)?;
    let ex = e.differentiate(Var::X);
    println!("d/dx [{e}] = {ex}");

    let v = eval_numeric(&parse("sin(x)^2 + cos(x)^2", &ctx)?, &Env::at(0.0, 0.7, 0.0))?;
    assert!((v - 1.0).abs() < 1e-15);

    // tan' = 1 + tan^2 holds for all x; the randomized test agrees.
    let identity = parse("tan(x)", &ctx)?.differentiate(Var::X) - parse("1 + tan(x)^2", &ctx)?;
    let outcome = is_zero(&identity, &ZeroTestPolicy::default())?;
    println!("tan' - (1 + tan^2) vanishes: {}", outcome.is_zero);
    assert!(outcome.is_zero);

    let wrong = parse("tanh(x)", &ctx)?.differentiate(Var::X) - parse("1 + tanh(x)^2", &ctx)?;
    let outcome = is_zero(&wrong, &ZeroTestPolicy::default())?;
    let w = outcome.witness.as_ref().expect("a witness for a nonzero expression");
    println!("tanh' - (1 + tanh^2) at x = {:.4}: {:.3e}", w.x, w.value);
    assert!(!outcome.is_zero);
    Ok(())
}

#[allow(dead_code)]
fn main() -> symred::Result<()> {
    run_example()
}
