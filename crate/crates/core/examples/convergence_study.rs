// Second-order convergence of the finite-difference residual.

use symred::catalog::find;
use symred::numcheck::convergence_study;
use symred::reduce::{preset, PipelineOptions};

pub fn run_example() -> symred::Result<()> {
    let id = "thm2.case5+";
    let entry = find(id).expect("catalog entry");
    let (pde, op) = entry.concrete()?;
    let p = preset(id).expect("preset");
    let opts = PipelineOptions::default().with_entry(id);
    let levels = p.grid().levels_ending_here(3)?;
    let study = convergence_study(|g| p.solve(&pde, &op, g, &opts), &levels, &pde, &op)?;
    print!("{}", study.to_csv());
    let order = study.fitted_order.expect("three levels give an order");
    println!("fitted order {order:.3}");
    assert!((order - 2.0).abs() < 0.3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> symred::Result<()> {
    run_example()
}
