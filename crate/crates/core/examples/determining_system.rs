use symred::detsys::{conditional_invariance_residual, determining_system_tau1, split_tau1_residual};
use symred::expr::{is_zero, parse, Context, ZeroTestPolicy};
use symred::model::{Pde, ReductionOperator};

/// Transcribed determining equations against the prolongation of the
/// operator, for `k = x^-2` and the scaling operator `Q = d_t + x/(2t) d_x`.
pub fn run_example() -> symred::Result<()> {
    let ctx = Context::new();
    let pde = Pde::new(parse("x^(-2)", &ctx)?)?;
    let (xi, eta) = (parse("x/(2*t)", &ctx)?, parse("0", &ctx)?);

    let sys = determining_system_tau1(&pde, &xi, &eta);
    print!("{}", sys.try_map(|e| Ok(e.simplify()))?);

    let op = ReductionOperator::tau1(xi, eta);
    let prolonged = split_tau1_residual(&conditional_invariance_residual(&pde, &op))?;
    let policy = ZeroTestPolicy::default().with_t(symred::expr::Interval::new(0.1, 1.0));
    for (r, p) in sys.residuals.iter().zip(&prolonged) {
        let same = is_zero(&(r.expr.clone() - p.clone()), &policy)?.is_zero;
        let opposite = is_zero(&(r.expr.clone() + p.clone()), &policy)?.is_zero;
        println!("{}: routes agree = {}", r.label, same || opposite);
        assert!(same || opposite);
        assert!(is_zero(&r.expr, &policy)?.is_zero);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> symred::Result<()> {
    run_example()
}
