// Invariant solution of a tau = 1 case: a shooting profile at t = 0
// carried along the characteristics of the operator.

use symred::catalog::find;
use symred::numcheck::{characteristic_residual, pde_residual};
use symred::reduce::{preset, GridSpec, PipelineOptions};

pub fn run_example() -> symred::Result<()> {
    let id = "thm2.case4";
    let entry = find(id).expect("catalog entry");
    let (pde, op) = entry.concrete()?;
    let p = preset(id).expect("preset");
    let grid = GridSpec {
        nt: 101,
        nx: 101,
        ..*p.grid()
    };
    let sol = p.solve(&pde, &op, &grid, &PipelineOptions::default().with_entry(id))?;

    let r = pde_residual(&sol, &pde)?;
    let c = characteristic_residual(&sol, &op)?;
    println!("{id}: u(0.2, 1.5) = {:.6}", sol.at(grid.nt - 1, grid.nx / 2));
    println!("pde residual {:.3e}, invariant surface residual {:.3e}", r.linf, c.linf);
    assert!(r.linf < 1e-4);
    Ok(())
}

#[allow(dead_code)]
fn main() -> symred::Result<()> {
    run_example()
}
