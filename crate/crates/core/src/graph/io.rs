//! Plain-text edge-list format.
//!
//! ```text
//! # optional comments
//! graph <n> <m> <D>
//! <u> <v>      (m lines, 0-based; a loop is written `u u`)
//! ```
//!
//! [`write_graph`] emits the header followed by the edges in sorted order, so
//! `write_graph(&parse_graph(&write_graph(g))?)` reproduces its input byte for
//! byte.

use std::fmt::Write;

use super::{Graph, GraphError};

fn parse_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize, GraphError> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut edges = Vec::new();
    let mut degree: Vec<usize> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match header {
            None => {
                if toks.len() != 4 || toks[0] != "graph" {
                    return Err(parse_err(line, "expected header `graph <n> <m> <D>`"));
                }
                let n = parse_usize(toks[1], line, "vertex count")?;
                let m = parse_usize(toks[2], line, "edge count")?;
                let d = parse_usize(toks[3], line, "degree bound")?;
                if d == 0 {
                    return Err(parse_err(line, "degree bound must be positive"));
                }
                // Every edge uses degree on some vertex, so m <= n * D / 2 bounds
                // the allocation for hostile headers.
                if m.saturating_mul(2) > n.saturating_mul(d) {
                    return Err(parse_err(line, format!("{m} edges exceed the degree budget of {n} vertices with bound {d}")));
                }
                degree = vec![0; n];
                edges.reserve(m);
                header = Some((n, m, d));
            }
            Some((n, m, d)) => {
                if toks.len() != 2 {
                    return Err(parse_err(line, "expected an edge `<u> <v>`"));
                }
                if edges.len() == m {
                    return Err(parse_err(line, format!("more than the declared {m} edges")));
                }
                let u = parse_usize(toks[0], line, "vertex")?;
                let v = parse_usize(toks[1], line, "vertex")?;
                for x in [u, v] {
                    if x >= n {
                        return Err(parse_err(line, format!("vertex {x} out of range 0..{n}")));
                    }
                }
                degree[u] += 1;
                degree[v] += 1;
                for x in [u, v] {
                    if degree[x] > d {
                        return Err(parse_err(line, format!("vertex {x} exceeds degree bound {d}")));
                    }
                }
                edges.push((u, v));
            }
        }
    }

    let (n, m, d) = header.ok_or_else(|| parse_err(last_line.max(1), "missing `graph` header"))?;
    if edges.len() != m {
        return Err(parse_err(
            last_line.max(1),
            format!("declared {m} edges but found {}", edges.len()),
        ));
    }
    Graph::new(n, edges, d)
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = String::with_capacity(16 + 12 * g.edge_count());
    let _ = writeln!(out, "graph {} {} {}", g.vertex_count(), g.edge_count(), g.degree_bound());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::families::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_with_comments_and_loops() {
        let text = "# a triangle with a loop\ngraph 3 4 4\n0 1\n1 2 # trailing\n\n2 0\n1 1\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 1), (1, 2)]);
        assert_eq!(g.degree(1), 4);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_graph("graph 3 2 2\n0 1\n0 x\n").unwrap_err();
        assert_eq!(err, GraphError::Parse { line: 3, message: "invalid vertex `x`".into() });
        let err = parse_graph("graph 2 1 1\n0 5\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }));
        let err = parse_graph("graph 3 3 2\n0 1\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }));
        let err = parse_graph("0 1\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 1, .. }));
        let err = parse_graph("graph 4 2 1\n0 1\n0 2\n").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 3, .. }));
        assert!(parse_graph("").is_err());
    }

    #[test]
    fn canonical_text_is_a_fixed_point() {
        for g in [petersen(), torus(3, 4), cycle(1), empty(3)] {
            let text = write_graph(&g);
            let back = parse_graph(&text).unwrap();
            assert_eq!(back, g);
            assert_eq!(write_graph(&back), text);
        }
    }

    proptest! {
        #[test]
        fn roundtrip_random(n in 1usize..40, seed in any::<u64>()) {
            let g = random_bounded_degree(n, 4, 3 * n, seed);
            let text = write_graph(&g);
            prop_assert_eq!(parse_graph(&text).unwrap(), g);
        }

        #[test]
        fn never_panics(text in "\\PC{0,200}") {
            let _ = parse_graph(&text);
        }
    }
}
