use symred::detsys::{split_laurent_ansatz, LaurentAnsatz};
use symred::expr::{parse, Context};
use symred::model::Pde;

// Split the tau = 0 equation for eta = phi_2 u^2 + phi_1 u + phi_0 by powers
// of u. The top coefficient forces phi_2^2 = k/2.
pub fn run_example() -> symred::Result<()> {
    let pde = Pde::new(parse("2*B(x)^2", &Context::new().with_function("B", 1))?)?;
    let sys = split_laurent_ansatz(&pde, &LaurentAnsatz::symbolic(0, 2))?;
    for r in &sys.residuals {
        println!("{}: {}", r.label, r.expr.simplify());
    }
    assert_eq!(sys.len(), 5);
    Ok(())
}

#[allow(dead_code)]
fn main() -> symred::Result<()> {
    run_example()
}
