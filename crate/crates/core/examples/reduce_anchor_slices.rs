use symred::catalog::find;
use symred::numcheck::{pde_residual, separability_defect};
use symred::reduce::{preset, PipelineOptions};

/// tau = 0: the anchor value evolves by an ODE in t, and every time slice is
/// the solution of `u_x = eta(x, u)` through it.
pub fn run_example() -> symred::Result<()> {
    let id = "tau0.item5";
    let entry = find(id).expect("catalog entry");
    let (pde, op) = entry.concrete()?;
    let p = preset(id).expect("preset");
    let sol = p.solve(&pde, &op, p.grid(), &PipelineOptions::default().with_entry(id))?;

    let r = pde_residual(&sol, &pde)?;
    // For eta = (u^2 - 1)/x the quantity artanh(u) - ln x depends on t only.
    let d = separability_defect(&sol);
    println!("{id}: pde residual {:.3e}, separability defect {:.1e}", r.linf, d);
    assert!(r.linf < 1e-4 && d < 1e-10);
    Ok(())
}

#[allow(dead_code)]
fn main() -> symred::Result<()> {
    run_example()
}
