mod parse_and_differentiate {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/parse_and_differentiate.rs"
    ));
}

#[test]
fn parse_and_differentiate_runs() {
    parse_and_differentiate::run_example().expect("parse and differentiate example should run");
}

mod determining_system {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/determining_system.rs"));
}

#[test]
fn determining_system_runs() {
    determining_system::run_example().expect("determining system example should run");
}

mod verify_catalog {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/verify_catalog.rs"));
}

#[test]
fn verify_catalog_runs() {
    verify_catalog::run_example().expect("verify catalog example should run");
}

mod equivalence_transform {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/equivalence_transform.rs"
    ));
}

#[test]
fn equivalence_transform_runs() {
    equivalence_transform::run_example().expect("equivalence transform example should run");
}

mod reduce_characteristics {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/reduce_characteristics.rs"
    ));
}

#[test]
fn reduce_characteristics_runs() {
    reduce_characteristics::run_example().expect("reduce characteristics example should run");
}

mod reduce_anchor_slices {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/reduce_anchor_slices.rs"));
}

#[test]
fn reduce_anchor_slices_runs() {
    reduce_anchor_slices::run_example().expect("reduce anchor slices example should run");
}

mod convergence_study {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/convergence_study.rs"));
}

#[test]
fn convergence_study_runs() {
    convergence_study::run_example().expect("convergence study example should run");
}

mod laurent_split {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/laurent_split.rs"));
}

#[test]
fn laurent_split_runs() {
    laurent_split::run_example().expect("laurent split example should run");
}
