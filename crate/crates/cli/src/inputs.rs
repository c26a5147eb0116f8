//! Reading input files and expanding named families.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use rgcost::graph::families;
use rgcost::graph::{parse_graph, Graph};
use rgcost::schreier::{builtin_family, parse_presentation, parse_subgroup, Family, Presentation, SchreierGraph, Word};
use rgcost::stats::NeighborhoodDistribution;

use crate::error::CliError;

/// Every file read, in order, for the manifest.
#[derive(Debug, Default)]
pub struct Inputs {
    pub read: Vec<(PathBuf, Vec<u8>)>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input {
            path: Some(path.to_path_buf()),
            line: None,
            message: e.to_string(),
        })?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Input {
            path: Some(path.to_path_buf()),
            line: None,
            message: "not valid UTF-8".into(),
        })?;
        if !self.read.iter().any(|(p, _)| p == path) {
            self.read.push((path.to_path_buf(), bytes));
        }
        Ok(text)
    }

    pub fn graph(&mut self, path: &Path) -> Result<Graph, CliError> {
        let text = self.read(path)?;
        parse_graph(&text).map_err(|e| CliError::from(e).at(path))
    }

    /// The presentation and any normalization warnings.
    pub fn presentation(&mut self, path: &Path) -> Result<(Presentation, Vec<String>), CliError> {
        let text = self.read(path)?;
        parse_presentation(&text).map_err(|e| CliError::from(e).at(path))
    }

    pub fn subgroup(&mut self, path: &Path, p: &Presentation) -> Result<Vec<Word>, CliError> {
        let text = self.read(path)?;
        parse_subgroup(&text, p).map_err(|e| CliError::from(e).at(path))
    }

    pub fn schreier(&mut self, path: &Path) -> Result<SchreierGraph, CliError> {
        let text = self.read(path)?;
        json(&text).map_err(|e| e.at(path))
    }

    pub fn distribution(&mut self, path: &Path) -> Result<NeighborhoodDistribution, CliError> {
        let text = self.read(path)?;
        json(&text).map_err(|e| e.at(path))
    }
}

pub fn json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input {
        path: None,
        line: Some(e.line()).filter(|&l| l > 0),
        message: e.to_string(),
    })
}

pub const GRAPH_FAMILIES: [&str; 6] = ["cycle", "path", "torus", "complete", "petersen", "random-regular"];

/// Named graph sequences. `torus` takes side lengths (`m x m`),
/// `random-regular` takes sizes and builds `4`-regular permutation graphs.
pub fn graph_family(name: &str, params: &[usize], seed: u64) -> Result<Vec<(String, Graph)>, CliError> {
    let need = |min: usize| -> Result<(), CliError> {
        match params.iter().find(|&&p| p < min) {
            Some(p) => Err(CliError::input(format!("family `{name}` needs parameters >= {min}, got {p}"))),
            None => Ok(()),
        }
    };
    let out = match name {
        "cycle" => {
            need(3)?;
            params.iter().map(|&n| (format!("C{n}"), families::cycle(n))).collect()
        }
        "path" => {
            need(1)?;
            params.iter().map(|&n| (format!("P{n}"), families::path(n))).collect()
        }
        "torus" => {
            need(3)?;
            params.iter().map(|&m| (format!("T{m}x{m}"), families::torus(m, m))).collect()
        }
        "complete" => {
            need(1)?;
            params.iter().map(|&n| (format!("K{n}"), families::complete(n))).collect()
        }
        "petersen" => vec![("petersen".to_string(), families::petersen())],
        "random-regular" => {
            need(1)?;
            params
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    let g = families::random_permutation_graph(n, 2, seed.wrapping_add(i as u64));
                    (format!("R{n}"), g)
                })
                .collect()
        }
        _ => {
            return Err(CliError::input(format!(
                "unknown graph family `{name}` (known: {})",
                GRAPH_FAMILIES.join(", ")
            )))
        }
    };
    Ok(out)
}

pub fn group_family(name: &str, params: &[usize], seed: u64) -> Result<Family, CliError> {
    builtin_family(name, params, seed).map_err(CliError::from)
}

/// Splits `a,b,c` into numbers.
pub fn parse_list(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::input(format!("`{t}` is not a non-negative integer")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn list_round_trip(xs in proptest::collection::vec(0usize..100_000, 0..8)) {
            let text = xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            prop_assert_eq!(parse_list(&text).unwrap(), xs);
        }
    }

    #[test]
    fn families_expand() {
        let gs = graph_family("cycle", &[5, 7], 0).unwrap();
        assert_eq!(gs[1].1.vertex_count(), 7);
        assert!(graph_family("cycle", &[2], 0).is_err());
        assert!(graph_family("wheel", &[5], 0).is_err());
        assert_eq!(graph_family("torus", &[4], 0).unwrap()[0].1.vertex_count(), 16);
    }

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("2, 3,4").unwrap(), vec![2, 3, 4]);
        assert!(parse_list("2,x").is_err());
    }

    #[test]
    fn json_errors_carry_lines() {
        let e = json::<SchreierGraph>("{\n\"generators\": [\"a\"],\n\"n\": 2\n \"root\": 0}")
            .unwrap_err();
        assert!(matches!(e, CliError::Input { line: Some(_), .. }), "{e:?}");
    }
}
