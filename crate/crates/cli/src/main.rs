use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rgcost::rewiring::TransferOptions;
use rgcost::schreier::{RankOptions, DEFAULT_MAX_COSETS};
use rgcost::trichotomy::{ReportOptions, StepGraph};

use rgcost_cli::analyses::{self, GroupInput, Labeled};
use rgcost_cli::error::CliError;
use rgcost_cli::experiment;
use rgcost_cli::inputs::{self, graph_family, group_family, parse_list, Inputs};
use rgcost_cli::output::{emit, verify_manifest, write_atomic, Artifact, Manifest};

#[derive(Parser, Debug)]
#[command(name = "rgcost", version, about = "Rank gradient and combinatorial cost experiments on finite graphs")]
struct Cli {
    /// Also write gnuplot data files next to tabular outputs.
    #[arg(long, global = true)]
    plot: bool,
    /// Run everything sequentially on one thread.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Write a manifest of inputs, outputs and parameters here.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GraphSet {
    /// Graph files.
    #[arg(long, num_args = 1..)]
    graphs: Vec<PathBuf>,
    /// Built-in graph family: cycle, path, torus, complete, petersen, random-regular.
    #[arg(long)]
    family: Option<String>,
    /// Family parameters, comma separated.
    #[arg(long, default_value = "")]
    params: String,
}

#[derive(Args, Debug, Clone)]
struct GroupSet {
    /// Presentation file (with `--graphs` or `--subgroups`).
    #[arg(long)]
    presentation: Option<PathBuf>,
    /// Schreier graph JSON files.
    #[arg(long, num_args = 1..)]
    graphs: Vec<PathBuf>,
    /// Subgroup files; each is enumerated into a Schreier graph.
    #[arg(long, num_args = 1..)]
    subgroups: Vec<PathBuf>,
    /// Built-in group family: Z-cycle, Z2-torus, F2-random.
    #[arg(long)]
    family: Option<String>,
    /// Family parameters, comma separated.
    #[arg(long, default_value = "")]
    params: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Neighborhood distribution of each graph.
    Stats {
        #[command(flatten)]
        set: GraphSet,
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Output file (one graph) or directory (several).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pairwise Benjamini-Schramm distances, or TV distances between
    /// precomputed distributions.
    Bsdist {
        #[command(flatten)]
        set: GraphSet,
        /// Distribution JSON files; compared pairwise by TV distance.
        #[arg(long, num_args = 1.., conflicts_with_all = ["graphs", "family"])]
        dists: Vec<PathBuf>,
        #[arg(long, default_value_t = 2)]
        r_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate of the local-global distance between two graphs.
    Lgdist {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Probe colorings, e.g. `random:4,distance:2,partition`.
        #[arg(long, default_value = "random:4,distance:2,partition")]
        probes: String,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Searches for a sparse L-rewiring of one graph.
    Rewire {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "L", default_value_t = 2)]
        l: usize,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rewired graph; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Rewiring densities along a graph sequence.
    Ccost {
        #[command(flatten)]
        set: GraphSet,
        #[arg(long = "L", default_value_t = 2)]
        l: usize,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compute the exact minimum (small graphs only).
        #[arg(long)]
        exact: bool,
        /// Output directory for the CSV and JSON tables.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Carries a rewiring of one graph over to another.
    Transfer {
        /// `g1,h1`: a graph and its rewiring.
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: PathBuf,
        #[arg(long = "L", default_value_t = 2)]
        l: usize,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Coset enumeration of a subgroup.
    Enumerate {
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long)]
        subgroup: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_COSETS)]
        max_cosets: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Subgroup presentation of a Schreier graph's root stabilizer.
    RsPresentation {
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long)]
        schreier: PathBuf,
        /// Run Tietze simplification with this many moves.
        #[arg(long)]
        tietze_budget: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank bounds and rank quotients along a Schreier graph sequence.
    Rankgrad {
        #[command(flatten)]
        group: GroupSet,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_COSETS)]
        max_cosets: usize,
        #[arg(long, default_value_t = 100_000)]
        tietze_budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fixed-point and ball statistics along a Schreier graph sequence.
    Farber {
        #[command(flatten)]
        group: GroupSet,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_COSETS)]
        max_cosets: usize,
        /// Words to test; defaults to generators and short products.
        #[arg(long, num_args = 1..)]
        words: Vec<String>,
        /// Radius for comparison with the Cayley graph ball.
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a built-in family's presentation, Schreier graphs and subgroups.
    Family {
        name: String,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Balanced partition with small boundary.
    Partition {
        #[arg(long, required_unless_present = "schreier", conflicts_with = "schreier")]
        graph: Option<PathBuf>,
        #[arg(long)]
        schreier: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classifies each Schreier graph of a sequence and certifies amalgam
    /// decompositions where the partition hypotheses hold.
    Trichotomy {
        #[command(flatten)]
        group: GroupSet,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_COSETS)]
        max_cosets: usize,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
        /// Build certificates even when the rank branch already applies.
        #[arg(long)]
        always_certify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a TOML experiment spec.
    Run {
        spec: PathBuf,
        /// Overrides the spec's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks the digests recorded in a manifest.
    VerifyManifest {
        manifest: PathBuf,
        /// Directory that input paths are relative to; defaults to the
        /// current directory.
        #[arg(long)]
        inputs_base: Option<PathBuf>,
    },
}

struct Session {
    inputs: Inputs,
    manifest: Manifest,
}

impl Session {
    fn graphs(&mut self, set: &GraphSet, seed: u64) -> Result<Vec<Labeled>, CliError> {
        let mut out = Vec::new();
        if let Some(f) = &set.family {
            out.extend(graph_family(f, &parse_list(&set.params)?, seed)?);
        }
        for p in &set.graphs {
            out.push((stem_of(p), self.inputs.graph(p)?));
        }
        if out.is_empty() {
            return Err(CliError::input("no graphs given (use --graphs or --family)"));
        }
        Ok(out)
    }

    fn group(&mut self, set: &GroupSet, seed: u64, max_cosets: usize) -> Result<GroupInput, CliError> {
        if let Some(f) = &set.family {
            return Ok(GroupInput::from_family(group_family(f, &parse_list(&set.params)?, seed)?));
        }
        let Some(pres) = &set.presentation else {
            return Err(CliError::input("give --family or --presentation"));
        };
        let (presentation, warnings) = self.inputs.presentation(pres)?;
        for w in warnings {
            eprintln!("warning: {}: {w}", pres.display());
        }
        let mut g = GroupInput {
            presentation,
            labels: Vec::new(),
            graphs: Vec::new(),
            candidates: Vec::new(),
            cayley: None,
        };
        for p in &set.graphs {
            g.graphs.push(self.inputs.schreier(p)?);
            g.labels.push(stem_of(p));
            g.candidates.push(None);
        }
        for p in &set.subgroups {
            let words = self.inputs.subgroup(p, &g.presentation)?;
            g.graphs.push(rgcost::schreier::todd_coxeter(&g.presentation, &words, max_cosets)?);
            g.labels.push(stem_of(p));
            g.candidates.push(Some(words));
        }
        if g.graphs.is_empty() {
            return Err(CliError::input("no Schreier graphs given (use --graphs or --subgroups)"));
        }
        Ok(g)
    }

    fn param(&mut self, key: &str, value: impl serde::Serialize) {
        self.manifest
            .parameters
            .insert(key.into(), serde_json::to_value(value).expect("parameters serialize"));
    }

    fn write(&mut self, path: Option<&Path>, art: &Artifact) -> Result<(), CliError> {
        emit(path, &art.bytes)?;
        if let Some(p) = path.filter(|p| *p != Path::new("-")) {
            self.manifest.add_output(p, &art.bytes);
        }
        Ok(())
    }

    /// One artifact goes to `out` (or stdout); several go into `out` as a
    /// directory.
    fn deliver(&mut self, artifacts: Vec<Artifact>, out: Option<&Path>) -> Result<(), CliError> {
        if let [art] = artifacts.as_slice() {
            return self.write(out, art);
        }
        let dir = out.unwrap_or(Path::new("."));
        for art in &artifacts {
            self.write(Some(&dir.join(&art.name)), art)?;
        }
        Ok(())
    }
}

fn stem_of(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn default_eps(k: usize) -> f64 {
    0.5 / k.max(1) as f64
}

fn dispatch(cli: &Cli, s: &mut Session) -> Result<(), CliError> {
    match &cli.command {
        Command::Stats { set, r, out } => {
            s.param("r", r);
            let graphs = s.graphs(set, 0)?;
            let arts = analyses::stats(&graphs, *r, "stats")?;
            s.deliver(arts, out.as_deref())
        }
        Command::Bsdist { set, dists, r_max, out } => {
            let arts = if dists.is_empty() {
                s.param("r_max", r_max);
                let graphs = s.graphs(set, 0)?;
                analyses::bsdist(&graphs, *r_max, "bsdist", cli.plot)?
            } else {
                let mut loaded = Vec::new();
                for p in dists {
                    loaded.push((stem_of(p), s.inputs.distribution(p)?));
                }
                analyses::tv_table(&loaded, "tv")?
            };
            s.deliver(arts, out.as_deref())
        }
        Command::Lgdist {
            first,
            second,
            r,
            k,
            probes,
            budget,
            seed,
            out,
        } => {
            s.manifest.seed = Some(*seed);
            s.param("r", r);
            s.param("k", k);
            s.param("probes", probes);
            s.param("budget", budget);
            let probes = analyses::probe_families(probes)?;
            let a = (stem_of(first), s.inputs.graph(first)?);
            let b = (stem_of(second), s.inputs.graph(second)?);
            let arts = analyses::lgdist(&a, &b, *r, *k, &probes, *budget, *seed, "lgdist")?;
            s.deliver(arts, out.as_deref())
        }
        Command::Rewire {
            graph,
            l,
            budget,
            seed,
            out,
            report,
        } => {
            s.manifest.seed = Some(*seed);
            s.param("L", l);
            s.param("budget", budget);
            let g = s.inputs.graph(graph)?;
            let arts = analyses::rewire(&g, *l, *budget, *seed, "rewire")?;
            s.write(out.as_deref(), &arts[0])?;
            if let Some(r) = report {
                s.write(Some(r), &arts[1])?;
            }
            Ok(())
        }
        Command::Ccost {
            set,
            l,
            budget,
            seed,
            exact,
            out,
        } => {
            s.manifest.seed = Some(*seed);
            s.param("L", l);
            s.param("budget", budget);
            s.param("exact", exact);
            let graphs = s.graphs(set, *seed)?;
            let arts = analyses::ccost(&graphs, *l, *budget, *seed, *exact, "ccost", cli.plot)?;
            for a in &arts {
                s.write(Some(&out.join(&a.name)), a)?;
            }
            Ok(())
        }
        Command::Transfer {
            from,
            to,
            l,
            budget,
            seed,
            out,
            report,
        } => {
            s.manifest.seed = Some(*seed);
            s.param("L", l);
            s.param("budget", budget);
            let Some((g1, h1)) = from.split_once(',') else {
                return Err(CliError::input("--from takes `g1,h1`"));
            };
            let g1 = s.inputs.graph(Path::new(g1))?;
            let h1 = s.inputs.graph(Path::new(h1))?;
            let g2 = s.inputs.graph(to)?;
            let opts = TransferOptions {
                budget: *budget,
                seed: *seed,
                ..Default::default()
            };
            let arts = analyses::transfer(&g1, &h1, &g2, *l, &opts, "transfer")?;
            s.write(out.as_deref(), &arts[0])?;
            if let Some(r) = report {
                s.write(Some(r), &arts[1])?;
            }
            Ok(())
        }
        Command::Enumerate {
            presentation,
            subgroup,
            max_cosets,
            out,
        } => {
            s.param("max_cosets", max_cosets);
            let (p, _) = s.inputs.presentation(presentation)?;
            let words = s.inputs.subgroup(subgroup, &p)?;
            let arts = analyses::enumerate(&p, &words, *max_cosets, "enumerate")?;
            s.deliver(arts, out.as_deref())
        }
        Command::RsPresentation {
            presentation,
            schreier,
            tietze_budget,
            out,
        } => {
            s.param("tietze_budget", tietze_budget);
            let (p, _) = s.inputs.presentation(presentation)?;
            let sch = s.inputs.schreier(schreier)?;
            let arts = analyses::rs_presentation(&p, &sch, *tietze_budget, "rs")?;
            s.deliver(arts, out.as_deref())
        }
        Command::Rankgrad {
            group,
            seed,
            max_cosets,
            tietze_budget,
            out,
        } => {
            s.manifest.seed = Some(*seed);
            s.param("max_cosets", max_cosets);
            s.param("tietze_budget", tietze_budget);
            let g = s.group(group, *seed, *max_cosets)?;
            let opts = RankOptions {
                tietze_budget: *tietze_budget,
                max_cosets: *max_cosets,
            };
            let arts = analyses::rankgrad(&g, opts, "rankgrad", cli.plot)?;
            s.deliver(arts, out.as_deref())
        }
        Command::Farber {
            group,
            seed,
            max_cosets,
            words,
            radius,
            out,
        } => {
            s.manifest.seed = Some(*seed);
            s.param("radius", radius);
            let g = s.group(group, *seed, *max_cosets)?;
            let words = if words.is_empty() {
                analyses::default_words(&g.presentation)
            } else {
                words
                    .iter()
                    .map(|w| g.presentation.parse_word(w).map_err(CliError::from))
                    .collect::<Result<Vec<_>, _>>()?
            };
            s.param(
                "words",
                words.iter().map(|w| g.presentation.format_word(w)).collect::<Vec<_>>(),
            );
            let arts = analyses::farber(&g, &words, *radius, "farber", cli.plot)?;
            s.deliver(arts, out.as_deref())
        }
        Command::Family { name, params, seed, out } => {
            s.manifest.seed = Some(*seed);
            s.param("family", name);
            s.param("params", params);
            let f = group_family(name, &parse_list(params)?, *seed)?;
            for a in analyses::family(&f) {
                s.write(Some(&out.join(&a.name)), &a)?;
            }
            Ok(())
        }
        Command::Partition {
            graph,
            schreier,
            k,
            eps,
            budget,
            seed,
            out,
        } => {
            let eps = eps.unwrap_or_else(|| default_eps(*k));
            s.manifest.seed = Some(*seed);
            s.param("k", k);
            s.param("eps", eps);
            s.param("budget", budget);
            let sg = match (graph, schreier) {
                (Some(p), _) => StepGraph::from_graph(&s.inputs.graph(p)?),
                (None, Some(p)) => StepGraph::from_schreier(&s.inputs.schreier(p)?),
                (None, None) => return Err(CliError::input("give --graph or --schreier")),
            };
            let arts = analyses::partition(&sg, *k, eps, *budget, *seed, "partition")?;
            s.deliver(arts, out.as_deref())
        }
        Command::Trichotomy {
            group,
            c,
            seed,
            max_cosets,
            budget,
            always_certify,
            out,
        } => {
            s.manifest.seed = Some(*seed);
            s.param("c", c);
            s.param("budget", budget);
            let g = s.group(group, *seed, *max_cosets)?;
            let opts = ReportOptions {
                rank: RankOptions {
                    max_cosets: *max_cosets,
                    ..Default::default()
                },
                partition_budget: *budget,
                seed: *seed,
                always_certify: *always_certify,
            };
            let arts = analyses::trichotomy(&g, *c, opts, "trichotomy")?;
            s.deliver(arts, out.as_deref())
        }
        Command::Run { .. } | Command::VerifyManifest { .. } => unreachable!("handled before dispatch"),
    }
}

fn report_error(e: &CliError) {
    let entry = serde_json::to_string(&e.entry(None)).expect("entries serialize");
    eprintln!("{entry}");
}

fn configure_threads(deterministic: bool) {
    let threads = if deterministic {
        Some(1)
    } else {
        std::env::var("RGCOST_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&t| t > 0)
    };
    if let Some(t) = threads {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.deterministic);

    match &cli.command {
        Command::Run { spec, out } => {
            return match experiment::run(spec, out.as_deref()) {
                Ok(result) => {
                    for e in &result.manifest.errors {
                        eprintln!("{}", serde_json::to_string(e).expect("entries serialize"));
                    }
                    ExitCode::from(result.exit_code)
                }
                Err(e) => {
                    report_error(&e);
                    ExitCode::from(e.exit_code())
                }
            };
        }
        Command::VerifyManifest { manifest, inputs_base } => {
            let text = match std::fs::read_to_string(manifest) {
                Ok(t) => t,
                Err(e) => {
                    report_error(&CliError::Input {
                        path: Some(manifest.clone()),
                        line: None,
                        message: e.to_string(),
                    });
                    return ExitCode::from(2);
                }
            };
            let value = match inputs::json::<serde_json::Value>(&text) {
                Ok(v) => v,
                Err(e) => {
                    report_error(&e.at(manifest));
                    return ExitCode::from(2);
                }
            };
            let out_base = manifest.parent().unwrap_or(Path::new(""));
            let in_base = inputs_base.as_deref().unwrap_or(Path::new(""));
            let bad = verify_manifest(&value, in_base, out_base);
            if bad.is_empty() {
                println!("ok");
                return ExitCode::SUCCESS;
            }
            for b in bad {
                println!("mismatch: {b}");
            }
            return ExitCode::from(1);
        }
        _ => {}
    }

    let command = std::env::args().nth(1).unwrap_or_default();
    let mut session = Session {
        inputs: Inputs::default(),
        manifest: Manifest::new(&command, None),
    };
    let result = dispatch(&cli, &mut session);
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            report_error(e);
            session.manifest.errors.push(e.entry(None));
            e.exit_code()
        }
    };
    if let Some(path) = &cli.manifest {
        session.manifest.add_inputs(&session.inputs.read);
        let art = Artifact::json("manifest.json", &session.manifest);
        if let Err(e) = write_atomic(path, &art.bytes) {
            report_error(&e);
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}
