//! Replays the fuzz corpus seeds through the fuzz targets' properties, so
//! regressions show up without a fuzzing toolchain.

#[path = "../../../fuzz/src/checks.rs"]
mod checks;

use std::path::Path;

fn replay(target: &str, check: fn(&[u8])) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let bytes = std::fs::read(entry.unwrap().path()).unwrap();
        check(&bytes);
        for cut in [0, bytes.len() / 2, bytes.len().saturating_sub(1)] {
            check(&bytes[..cut]);
        }
        seen += 1;
    }
    assert!(seen > 0, "no seeds in {}", dir.display());
}

#[test]
fn graph_text() {
    replay("graph_text", checks::graph_text);
}

#[test]
fn presentation() {
    replay("presentation", checks::presentation);
}

#[test]
fn subgroup() {
    replay("subgroup", checks::subgroup);
}

#[test]
fn schreier_json() {
    replay("schreier_json", checks::schreier_json);
}

#[test]
fn distribution_json() {
    replay("distribution_json", checks::distribution_json);
}

#[test]
fn canonical_code() {
    replay("canonical_code", checks::canonical_code);
}

#[test]
fn experiment_spec() {
    replay("experiment_spec", checks::experiment_spec);
}

mod random {
    use super::checks;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn text_parsers_hold_on_token_soup(s in "(graph |gens: |rel: |sub: |[0-9]{1,2} |[abcABC]{1,4}|#|\n){0,24}") {
            checks::graph_text(s.as_bytes());
            checks::presentation(s.as_bytes());
            checks::subgroup(s.as_bytes());
        }

        #[test]
        fn byte_decoders_hold_on_noise(bytes in proptest::collection::vec(any::<u8>(), 0..48)) {
            checks::canonical_code(&bytes);
            checks::schreier_json(&bytes);
            checks::distribution_json(&bytes);
            checks::experiment_spec(&bytes);
        }
    }
}
