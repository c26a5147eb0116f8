// Round-trip and no-panic properties shared by the fuzz targets and the
// corpus replay test in the workspace.

use rgcost::graph::{parse_graph, write_graph, CanonicalCode};
use rgcost::schreier::{parse_presentation, parse_subgroup, SchreierGraph};
use rgcost::stats::{tv_distance, NeighborhoodDistribution};

pub fn graph_text(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_graph(text) {
        let written = write_graph(&g);
        let again = parse_graph(&written).expect("written graphs parse");
        assert_eq!(write_graph(&again), written);
    }
}

pub fn presentation(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((p, _)) = parse_presentation(text) {
        let printed = p.to_string();
        let (again, warnings) = parse_presentation(&printed).expect("printed presentations parse");
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(again, p);
    }
}

pub fn subgroup(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (p, _) = parse_presentation("gens: a b c\nrel: abAB\n").unwrap();
    if let Ok(words) = parse_subgroup(text, &p) {
        let printed: String = words.iter().map(|w| format!("sub: {}\n", p.format_word(w))).collect();
        assert_eq!(parse_subgroup(&printed, &p).expect("printed words parse"), words);
    }
}

pub fn schreier_json(data: &[u8]) {
    if let Ok(g) = serde_json::from_slice::<SchreierGraph>(data) {
        let json = serde_json::to_string(&g).unwrap();
        let again: SchreierGraph = serde_json::from_str(&json).expect("serialized graphs load");
        assert_eq!(again, g);
    }
}

pub fn distribution_json(data: &[u8]) {
    if let Ok(d) = serde_json::from_slice::<NeighborhoodDistribution>(data) {
        let json = serde_json::to_string(&d).unwrap();
        let again: NeighborhoodDistribution = serde_json::from_str(&json).expect("serialized distributions load");
        assert_eq!(tv_distance(&d, &again).unwrap(), 0.0);
    }
}

/// Decoding arbitrary bytes must not panic, and canonical codes of
/// decoded balls are fixed points.
pub fn canonical_code(data: &[u8]) {
    let check = |code: &CanonicalCode| {
        if let Ok(ball) = code.decode() {
            let canon = ball.canonical_code();
            let again = canon.decode().expect("canonical codes decode");
            assert_eq!(again.canonical_code(), canon);
        }
    };
    check(&CanonicalCode::from_bytes(data.to_vec()));
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(c) = CanonicalCode::from_base64(text.trim()) {
            assert_eq!(CanonicalCode::from_base64(&c.to_base64()).unwrap(), c);
            check(&c);
        }
    }
}

pub fn experiment_spec(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = rgcost_cli::experiment::parse_spec(text) {
        let printed = toml::to_string(&spec).expect("specs serialize");
        assert_eq!(rgcost_cli::experiment::parse_spec(&printed).expect("printed specs parse"), spec);
    }
}
