//! TOML experiment specs: named inputs, a list of analyses, one output
//! directory and a manifest.
//!
//! ```toml
//! seed = 7
//! output_dir = "out"
//!
//! [graphs.cycles]
//! family = "cycle"
//! params = [11, 12, 16]
//!
//! [groups.tori]
//! family = "Z2-torus"
//! params = [2, 3, 4]
//!
//! [[analysis]]
//! kind = "ccost"
//! input = "cycles"
//! L = 3
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rgcost::rewiring::TransferOptions;
use rgcost::schreier::{RankOptions, DEFAULT_MAX_COSETS};
use rgcost::trichotomy::{ReportOptions, StepGraph};

use crate::analyses::{self, GroupInput, Labeled};
use crate::error::CliError;
use crate::inputs::{graph_family, group_family, Inputs};
use crate::output::{write_atomic, Artifact, Manifest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    /// Run analyses one at a time.
    #[serde(default)]
    pub deterministic: bool,
    /// Also write gnuplot data files for tables.
    #[serde(default)]
    pub plot: bool,
    #[serde(default)]
    pub graphs: BTreeMap<String, GraphSource>,
    #[serde(default)]
    pub groups: BTreeMap<String, GroupSource>,
    #[serde(default, rename = "analysis")]
    pub analyses: Vec<AnalysisSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSource {
    pub family: Option<String>,
    #[serde(default)]
    pub params: Vec<usize>,
    #[serde(default)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSource {
    /// A built-in Schreier family.
    pub family: Option<String>,
    #[serde(default)]
    pub params: Vec<usize>,
    pub presentation: Option<PathBuf>,
    /// Schreier graph JSON files.
    #[serde(default)]
    pub schreier: Vec<PathBuf>,
    /// Subgroup files whose coset graphs are enumerated.
    #[serde(default)]
    pub subgroups: Vec<PathBuf>,
    pub max_cosets: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalysisKind {
    Stats,
    Bsdist,
    Lgdist,
    Rewire,
    Ccost,
    Transfer,
    Enumerate,
    Rankgrad,
    Farber,
    Partition,
    Trichotomy,
}

impl AnalysisKind {
    fn randomized(self) -> bool {
        matches!(
            self,
            AnalysisKind::Lgdist
                | AnalysisKind::Rewire
                | AnalysisKind::Ccost
                | AnalysisKind::Transfer
                | AnalysisKind::Partition
                | AnalysisKind::Trichotomy
        )
    }

    fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    pub kind: AnalysisKind,
    /// Output file stem; defaults to `<index>-<kind>`.
    pub name: Option<String>,
    pub input: String,
    /// Second graph set: the target of `lgdist` and `transfer`.
    pub target: Option<String>,
    /// Rewired companion of `input` for `transfer`.
    pub rewired: Option<String>,
    pub r: Option<usize>,
    pub r_max: Option<usize>,
    pub k: Option<usize>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub eps: Option<f64>,
    pub c: Option<f64>,
    pub budget: Option<usize>,
    pub max_cosets: Option<usize>,
    pub tietze_budget: Option<usize>,
    #[serde(default)]
    pub words: Vec<String>,
    pub radius: Option<usize>,
    pub probes: Option<String>,
    #[serde(default)]
    pub exact: bool,
}

pub fn parse_spec(text: &str) -> Result<ExperimentSpec, CliError> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].lines().count().max(1));
        CliError::Input {
            path: None,
            line,
            message: e.message().to_string(),
        }
    })
}

#[derive(Debug)]
pub struct RunResult {
    pub manifest: Manifest,
    pub exit_code: u8,
}

struct Loaded {
    graphs: BTreeMap<String, Vec<Labeled>>,
    groups: BTreeMap<String, GroupInput>,
}

/// Loads every input up front, so that all input errors are reported
/// before any analysis runs.
fn load(spec: &ExperimentSpec, base: &Path, inputs: &mut Inputs, errors: &mut Vec<CliError>) -> Loaded {
    let seed = spec.seed.unwrap_or(0);
    let mut graphs = BTreeMap::new();
    for (name, src) in &spec.graphs {
        let mut list: Vec<Labeled> = Vec::new();
        if let Some(f) = &src.family {
            match graph_family(f, &src.params, seed) {
                Ok(gs) => list.extend(gs),
                Err(e) => errors.push(e),
            }
        }
        for file in &src.files {
            match inputs.graph(&base.join(file)) {
                Ok(g) => list.push((stem_of(file), g)),
                Err(e) => errors.push(e),
            }
        }
        if src.family.is_none() && src.files.is_empty() {
            errors.push(CliError::input(format!("graph input `{name}` has neither family nor files")));
        }
        graphs.insert(name.clone(), list);
    }
    let mut groups = BTreeMap::new();
    for (name, src) in &spec.groups {
        match load_group(name, src, base, seed, inputs) {
            Ok(g) => {
                groups.insert(name.clone(), g);
            }
            Err(e) => errors.push(e),
        }
    }
    Loaded { graphs, groups }
}

fn load_group(name: &str, src: &GroupSource, base: &Path, seed: u64, inputs: &mut Inputs) -> Result<GroupInput, CliError> {
    if let Some(f) = &src.family {
        return Ok(GroupInput::from_family(group_family(f, &src.params, seed)?));
    }
    let Some(pres) = &src.presentation else {
        return Err(CliError::input(format!("group input `{name}` needs a family or a presentation")));
    };
    let (presentation, _) = inputs.presentation(&base.join(pres))?;
    let mut group = GroupInput {
        presentation,
        labels: Vec::new(),
        graphs: Vec::new(),
        candidates: Vec::new(),
        cayley: None,
    };
    for file in &src.schreier {
        group.graphs.push(inputs.schreier(&base.join(file))?);
        group.labels.push(stem_of(file));
        group.candidates.push(None);
    }
    for file in &src.subgroups {
        let words = inputs.subgroup(&base.join(file), &group.presentation)?;
        let sch = rgcost::schreier::todd_coxeter(
            &group.presentation,
            &words,
            src.max_cosets.unwrap_or(DEFAULT_MAX_COSETS),
        )?;
        group.graphs.push(sch);
        group.labels.push(stem_of(file));
        group.candidates.push(Some(words));
    }
    if group.graphs.is_empty() {
        return Err(CliError::input(format!("group input `{name}` lists no Schreier graphs or subgroups")));
    }
    Ok(group)
}

fn stem_of(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn check_references(spec: &ExperimentSpec) -> Vec<CliError> {
    let mut errors = Vec::new();
    let group_kinds = [
        AnalysisKind::Enumerate,
        AnalysisKind::Rankgrad,
        AnalysisKind::Farber,
        AnalysisKind::Trichotomy,
    ];
    for (i, a) in spec.analyses.iter().enumerate() {
        let wants_group = group_kinds.contains(&a.kind);
        let known = |n: &str| {
            if wants_group {
                spec.groups.contains_key(n)
            } else {
                spec.graphs.contains_key(n) || (a.kind == AnalysisKind::Partition && spec.groups.contains_key(n))
            }
        };
        for n in std::iter::once(&a.input).chain(&a.target).chain(&a.rewired) {
            if !known(n) {
                errors.push(CliError::input(format!("analysis {i} ({:?}) refers to unknown input `{n}`", a.kind)));
            }
        }
        if matches!(a.kind, AnalysisKind::Lgdist | AnalysisKind::Transfer) && a.target.is_none() {
            errors.push(CliError::input(format!("analysis {i} ({:?}) needs `target`", a.kind)));
        }
        if a.kind == AnalysisKind::Transfer && a.rewired.is_none() {
            errors.push(CliError::input(format!("analysis {i} (transfer) needs `rewired`")));
        }
        if a.kind.randomized() && spec.seed.is_none() {
            errors.push(CliError::input(format!("analysis {i} ({:?}) is randomized and needs `seed`", a.kind)));
        }
    }
    let random_families = spec.graphs.values().any(|g| g.family.as_deref() == Some("random-regular"))
        || spec.groups.values().any(|g| g.family.as_deref() == Some("F2-random"));
    if random_families && spec.seed.is_none() {
        errors.push(CliError::input("random families need `seed`"));
    }
    errors
}

fn first(list: &[Labeled], what: &str) -> Result<Labeled, CliError> {
    list.first()
        .cloned()
        .ok_or_else(|| CliError::input(format!("input `{what}` is empty")))
}

fn execute(a: &AnalysisSpec, stem: &str, spec: &ExperimentSpec, data: &Loaded) -> Result<Vec<Artifact>, CliError> {
    let seed = spec.seed.unwrap_or(0);
    let graphs = |n: &str| data.graphs.get(n).map(Vec::as_slice).unwrap_or(&[]);
    let group = |n: &str| {
        data.groups
            .get(n)
            .ok_or_else(|| CliError::input(format!("`{n}` is not a group input")))
    };
    let budget = a.budget.unwrap_or(20_000);
    let l = a.l.unwrap_or(2);
    match a.kind {
        AnalysisKind::Stats => analyses::stats(graphs(&a.input), a.r.unwrap_or(1), stem),
        AnalysisKind::Bsdist => analyses::bsdist(graphs(&a.input), a.r_max.unwrap_or(2), stem, spec.plot),
        AnalysisKind::Lgdist => {
            let probes = analyses::probe_families(a.probes.as_deref().unwrap_or("random:4,distance:2,partition"))?;
            let target = a.target.as_deref().unwrap_or_default();
            let mut out = Vec::new();
            for (i, g1) in graphs(&a.input).iter().enumerate() {
                for (j, g2) in graphs(target).iter().enumerate() {
                    out.extend(analyses::lgdist(
                        g1,
                        g2,
                        a.r.unwrap_or(1),
                        a.k.unwrap_or(2) as u32,
                        &probes,
                        budget,
                        seed,
                        &format!("{stem}-{i}-{j}"),
                    )?);
                }
            }
            Ok(out)
        }
        AnalysisKind::Rewire => {
            let mut out = Vec::new();
            for (label, g) in graphs(&a.input) {
                out.extend(analyses::rewire(g, l, budget, seed, &format!("{stem}-{label}"))?);
            }
            Ok(out)
        }
        AnalysisKind::Ccost => analyses::ccost(graphs(&a.input), l, budget, seed, a.exact, stem, spec.plot),
        AnalysisKind::Transfer => {
            let (_, g1) = first(graphs(&a.input), &a.input)?;
            let rewired = a.rewired.as_deref().unwrap_or_default();
            let (_, h1) = first(graphs(rewired), rewired)?;
            let mut out = Vec::new();
            for (label, g2) in graphs(a.target.as_deref().unwrap_or_default()) {
                let opts = TransferOptions {
                    budget,
                    seed,
                    ..Default::default()
                };
                out.extend(analyses::transfer(&g1, &h1, g2, l, &opts, &format!("{stem}-{label}"))?);
            }
            Ok(out)
        }
        AnalysisKind::Enumerate => {
            let g = group(&a.input)?;
            Ok(g.labels
                .iter()
                .zip(&g.graphs)
                .map(|(label, sch)| Artifact::json(format!("{stem}-{label}.json"), sch))
                .collect())
        }
        AnalysisKind::Rankgrad => {
            let opts = RankOptions {
                tietze_budget: a.tietze_budget.unwrap_or(RankOptions::default().tietze_budget),
                max_cosets: a.max_cosets.unwrap_or(DEFAULT_MAX_COSETS),
            };
            analyses::rankgrad(group(&a.input)?, opts, stem, spec.plot)
        }
        AnalysisKind::Farber => {
            let g = group(&a.input)?;
            let words = if a.words.is_empty() {
                analyses::default_words(&g.presentation)
            } else {
                a.words
                    .iter()
                    .map(|w| g.presentation.parse_word(w).map_err(CliError::from))
                    .collect::<Result<_, _>>()?
            };
            analyses::farber(g, &words, a.radius, stem, spec.plot)
        }
        AnalysisKind::Partition => {
            let k = a.k.unwrap_or(2);
            let eps = a.eps.unwrap_or(0.5 / k.max(1) as f64);
            let mut out = Vec::new();
            if let Some(g) = data.groups.get(&a.input) {
                for (label, sch) in g.labels.iter().zip(&g.graphs) {
                    let sg = StepGraph::from_schreier(sch);
                    out.extend(analyses::partition(&sg, k, eps, budget, seed, &format!("{stem}-{label}"))?);
                }
            } else {
                for (label, graph) in graphs(&a.input) {
                    let sg = StepGraph::from_graph(graph);
                    out.extend(analyses::partition(&sg, k, eps, budget, seed, &format!("{stem}-{label}"))?);
                }
            }
            Ok(out)
        }
        AnalysisKind::Trichotomy => {
            let opts = ReportOptions {
                rank: RankOptions {
                    tietze_budget: a.tietze_budget.unwrap_or(RankOptions::default().tietze_budget),
                    max_cosets: a.max_cosets.unwrap_or(DEFAULT_MAX_COSETS),
                },
                partition_budget: a.budget.unwrap_or(ReportOptions::default().partition_budget),
                seed,
                always_certify: false,
            };
            analyses::trichotomy(group(&a.input)?, a.c.unwrap_or(0.5), opts, stem)
        }
    }
}

/// Runs a spec read from `spec_path`. Paths inside the spec are relative
/// to the spec's directory.
pub fn run(spec_path: &Path, out_override: Option<&Path>) -> Result<RunResult, CliError> {
    let mut inputs = Inputs::default();
    let text = inputs.read(spec_path)?;
    let spec = parse_spec(&text).map_err(|e| e.at(spec_path))?;
    let base = spec_path.parent().unwrap_or(Path::new("")).to_path_buf();
    let out_dir = out_override.map(Path::to_path_buf).unwrap_or_else(|| base.join(&spec.output_dir));

    let mut manifest = Manifest::new("run", spec.seed);
    manifest.parameters.insert(
        "spec".into(),
        serde_json::to_value(&spec).expect("spec serializes"),
    );

    let mut errors = check_references(&spec);
    let data = load(&spec, &base, &mut inputs, &mut errors);
    let relative: Vec<(PathBuf, Vec<u8>)> = inputs
        .read
        .iter()
        .map(|(p, b)| (p.strip_prefix(&base).unwrap_or(p).to_path_buf(), b.clone()))
        .collect();
    manifest.add_inputs(&relative);
    if !errors.is_empty() {
        manifest.errors = errors.iter().map(|e| e.entry(None)).collect();
        write_manifest(&out_dir, &manifest)?;
        return Ok(RunResult {
            manifest,
            exit_code: 2,
        });
    }

    let stems: Vec<String> = spec
        .analyses
        .iter()
        .enumerate()
        .map(|(i, a)| a.name.clone().unwrap_or_else(|| format!("{i:02}-{}", a.kind.name())))
        .collect();
    let job = |(a, stem): (&AnalysisSpec, &String)| execute(a, stem, &spec, &data);
    let results: Vec<Result<Vec<Artifact>, CliError>> = if spec.deterministic {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| CliError::Analysis(format!("thread pool: {e}")))?;
        pool.install(|| spec.analyses.iter().zip(&stems).map(job).collect())
    } else {
        spec.analyses.par_iter().zip(stems.par_iter()).map(job).collect()
    };

    let mut exit_code = 0;
    for (stem, result) in stems.iter().zip(results) {
        match result {
            Ok(artifacts) => {
                for art in artifacts {
                    write_atomic(&out_dir.join(&art.name), &art.bytes)?;
                    manifest.add_output(Path::new(&art.name), &art.bytes);
                }
            }
            Err(e) => {
                exit_code = exit_code.max(e.exit_code().min(1));
                manifest.errors.push(e.entry(Some(stem)));
            }
        }
    }
    write_manifest(&out_dir, &manifest)?;
    Ok(RunResult { manifest, exit_code })
}

fn write_manifest(out_dir: &Path, m: &Manifest) -> Result<(), CliError> {
    let art = Artifact::json("manifest.json", m);
    write_atomic(&out_dir.join(art.name), &art.bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parses() {
        let spec = parse_spec(
            "seed = 3\noutput_dir = \"o\"\n[graphs.c]\nfamily = \"cycle\"\nparams = [12]\n\
             [[analysis]]\nkind = \"ccost\"\ninput = \"c\"\nL = 3\n",
        )
        .unwrap();
        assert_eq!(spec.analyses[0].kind, AnalysisKind::Ccost);
        assert_eq!(spec.analyses[0].l, Some(3));
        assert!(check_references(&spec).is_empty());
    }

    #[test]
    fn spec_errors_have_lines() {
        let e = parse_spec("seed = 3\noutput_dir = \"o\"\n\n[[analysis]]\nkind = \"nope\"\ninput = \"c\"\n").unwrap_err();
        assert!(matches!(e, CliError::Input { line: Some(5), .. }), "{e:?}");
    }

    #[test]
    fn missing_seed_and_inputs() {
        let spec = parse_spec("output_dir = \"o\"\n[[analysis]]\nkind = \"rewire\"\ninput = \"g\"\n").unwrap();
        assert_eq!(check_references(&spec).len(), 2);
    }
}
