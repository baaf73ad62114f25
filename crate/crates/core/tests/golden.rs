use symred::catalog::{all_cases, export, negative_controls};

const GOLDEN: &str = include_str!("data/catalog.txt");

fn current() -> String {
    let mut entries = all_cases();
    entries.extend(negative_controls());
    export(&entries)
}

/// Regenerate with `SYMRED_BLESS=1 cargo test --test golden`.
#[test]
fn catalog_export_is_bit_exact() {
    let text = current();
    if std::env::var_os("SYMRED_BLESS").is_some() {
        std::fs::write(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/catalog.txt"), &text).unwrap();
        return;
    }
    assert_eq!(text, GOLDEN);
}
