use symred::catalog::{find, transform_entry, EquivalenceTransform};
use symred::expr::{rat, ZeroTestPolicy};
use symred::verify::verify_entry;

/// Map a case through `t -> e1^2 t + e2`, `x -> e1 x + e3` and check that the
/// image is still a conditional symmetry on the mapped domain.
pub fn run_example() -> symred::Result<()> {
    let g = EquivalenceTransform::new(rat(-3, 4), rat(1, 8), rat(5, 8))?;
    let entry = find("tau0.item5").expect("catalog entry");
    let image = transform_entry(&g, &entry)?;
    println!("k:   {}  ->  {}", entry.pde.k(), image.pde.k());
    println!("eta: {}  ->  {}", entry.operator.eta(), image.operator.eta());

    let report = verify_entry(&image, &ZeroTestPolicy::default());
    println!("image verified: {}", report.passed);
    assert!(report.passed);
    Ok(())
}

#[allow(dead_code)]
fn main() -> symred::Result<()> {
    run_example()
}
