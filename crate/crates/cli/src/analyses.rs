//! Analyses shared by the subcommands and the experiment runner. Each
//! returns named artifacts; writing them is left to the caller.

use rayon::prelude::*;
use serde::Serialize;

use rgcost::graph::{write_graph, Graph};
use rgcost::rewiring::{
    edge_density, exact_cl, optimize_rewiring, transfer_rewiring, DensityReport, TransferOptions,
};
use rgcost::schreier::{
    cayley_ball_match, farber_statistic, rank_gradient_table, reidemeister_schreier, tietze_simplify, todd_coxeter,
    CayleyKind, Family, Presentation, RankOptions, SchreierGraph, Word,
};
use rgcost::stats::{bs_distance, lg_distance_estimate, neighborhood_distribution, tv_distance, ProbeFamily};
use rgcost::trichotomy::{balanced_partition, trichotomy_report, ReportOptions, StepGraph};

use crate::error::CliError;
use crate::output::Artifact;

/// A Schreier graph sequence of one presentation.
#[derive(Debug, Clone)]
pub struct GroupInput {
    pub presentation: Presentation,
    pub labels: Vec<String>,
    pub graphs: Vec<SchreierGraph>,
    pub candidates: Vec<Option<Vec<Word>>>,
    pub cayley: Option<CayleyKind>,
}

impl GroupInput {
    pub fn from_family(f: Family) -> Self {
        GroupInput {
            labels: f.params.iter().map(|p| format!("{}-{p}", f.name)).collect(),
            presentation: f.presentation,
            graphs: f.graphs,
            candidates: f.candidates,
            cayley: f.cayley,
        }
    }
}

pub type Labeled = (String, Graph);

pub fn stats(graphs: &[Labeled], r: usize, stem: &str) -> Result<Vec<Artifact>, CliError> {
    if let [(_, g)] = graphs {
        return Ok(vec![Artifact::json(format!("{stem}.json"), &neighborhood_distribution(g, r)?)]);
    }
    graphs
        .iter()
        .map(|(label, g)| Ok(Artifact::json(format!("{stem}-{label}.json"), &neighborhood_distribution(g, r)?)))
        .collect()
}

#[derive(Serialize)]
struct BsRow<'a> {
    a: &'a str,
    b: &'a str,
    radius: usize,
    tv: f64,
    running_max: f64,
}

pub fn bsdist(graphs: &[Labeled], r_max: usize, stem: &str, plot: bool) -> Result<Vec<Artifact>, CliError> {
    let mut rows = Vec::new();
    let mut plot_rows = Vec::new();
    for (i, (la, ga)) in graphs.iter().enumerate() {
        for (lb, gb) in &graphs[i + 1..] {
            let mut running: f64 = 0.0;
            for radius in 0..=r_max {
                let tv = tv_distance(&neighborhood_distribution(ga, radius)?, &neighborhood_distribution(gb, radius)?)?;
                running = running.max(tv);
                rows.push(BsRow {
                    a: la,
                    b: lb,
                    radius,
                    tv,
                    running_max: running,
                });
            }
            debug_assert_eq!(running, bs_distance(ga, gb, r_max)?);
            plot_rows.push(vec![plot_rows.len() as f64, running]);
        }
    }
    let mut out = vec![Artifact::csv(format!("{stem}.csv"), &rows)];
    if plot {
        out.push(Artifact::plot(format!("{stem}.dat"), &["pair", "bs_distance"], &plot_rows));
    }
    Ok(out)
}

#[derive(Serialize)]
struct TvRow<'a> {
    a: &'a str,
    b: &'a str,
    tv: f64,
}

pub fn tv_table(
    dists: &[(String, rgcost::stats::NeighborhoodDistribution)],
    stem: &str,
) -> Result<Vec<Artifact>, CliError> {
    let mut rows = Vec::new();
    for (i, (la, a)) in dists.iter().enumerate() {
        for (lb, b) in &dists[i + 1..] {
            rows.push(TvRow {
                a: la,
                b: lb,
                tv: tv_distance(a, b)?,
            });
        }
    }
    Ok(vec![Artifact::csv(format!("{stem}.csv"), &rows)])
}

/// Parses `random:4,distance:2,partition`.
pub fn probe_families(text: &str) -> Result<Vec<ProbeFamily>, CliError> {
    text.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (name, arg) = t.split_once(':').unwrap_or((t, ""));
            let num = |default: usize| -> Result<usize, CliError> {
                if arg.is_empty() {
                    Ok(default)
                } else {
                    arg.parse().map_err(|_| CliError::input(format!("bad probe argument `{t}`")))
                }
            };
            match name {
                "random" => Ok(ProbeFamily::Random { count: num(4)? }),
                "distance" => Ok(ProbeFamily::DistanceColoring { distance: num(2)? }),
                "partition" => Ok(ProbeFamily::Partition),
                _ => Err(CliError::input(format!("unknown probe family `{name}`"))),
            }
        })
        .collect()
}

#[derive(Serialize)]
struct LgOut<'a> {
    first: &'a str,
    second: &'a str,
    r: usize,
    k: u32,
    #[serde(flatten)]
    estimate: rgcost::stats::LgEstimate,
}

#[allow(clippy::too_many_arguments)]
pub fn lgdist(
    a: &Labeled,
    b: &Labeled,
    r: usize,
    k: u32,
    probes: &[ProbeFamily],
    budget: usize,
    seed: u64,
    stem: &str,
) -> Result<Vec<Artifact>, CliError> {
    let estimate = lg_distance_estimate(&a.1, &b.1, r, k, probes, budget, seed)?;
    Ok(vec![Artifact::json(
        format!("{stem}.json"),
        &LgOut {
            first: &a.0,
            second: &b.0,
            r,
            k,
            estimate,
        },
    )])
}

#[derive(Serialize)]
struct RewireReport {
    lipschitz: usize,
    budget: usize,
    seed: u64,
    valid: bool,
    base_edges: usize,
    rewired_edges: usize,
    base_density: f64,
    rewired_density: f64,
}

pub fn rewire(g: &Graph, l: usize, budget: usize, seed: u64, stem: &str) -> Result<Vec<Artifact>, CliError> {
    let (h, cert) = optimize_rewiring(g, l, budget, seed)?;
    if !cert.valid {
        return Err(CliError::Analysis("optimizer returned an invalid rewiring".into()));
    }
    let report = RewireReport {
        lipschitz: l,
        budget,
        seed,
        valid: cert.valid,
        base_edges: g.edge_count(),
        rewired_edges: h.edge_count(),
        base_density: edge_density(g),
        rewired_density: edge_density(&h),
    };
    Ok(vec![
        Artifact::text(format!("{stem}.elist"), write_graph(&h)),
        Artifact::json(format!("{stem}.report.json"), &report),
    ])
}

#[derive(Serialize)]
struct CcostRow<'a> {
    graph: &'a str,
    n: usize,
    base_edges: usize,
    lipschitz: usize,
    edges: usize,
    density: f64,
    running_min: f64,
    valid: bool,
    exact_density: Option<f64>,
}

#[derive(Serialize)]
struct CcostSummary<'a> {
    lipschitz: usize,
    graphs: Vec<&'a str>,
    #[serde(flatten)]
    report: DensityReport,
}

pub fn ccost(
    graphs: &[Labeled],
    l: usize,
    budget: usize,
    seed: u64,
    exact: bool,
    stem: &str,
    plot: bool,
) -> Result<Vec<Artifact>, CliError> {
    let results = graphs
        .par_iter()
        .enumerate()
        .map(|(i, (_, g))| {
            let (h, cert) = optimize_rewiring(g, l, budget, seed.wrapping_add(i as u64))?;
            let exact = if exact { Some(exact_cl(g, l)?.density) } else { None };
            Ok((h, cert.valid, exact))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let report = DensityReport::from_densities(results.iter().map(|(h, _, _)| edge_density(h)).collect())?;
    let rows: Vec<CcostRow> = graphs
        .iter()
        .zip(&results)
        .enumerate()
        .map(|(i, ((label, g), (h, valid, exact)))| CcostRow {
            graph: label,
            n: g.vertex_count(),
            base_edges: g.edge_count(),
            lipschitz: l,
            edges: h.edge_count(),
            density: report.densities[i],
            running_min: report.running_min[i],
            valid: *valid,
            exact_density: *exact,
        })
        .collect();
    let mut out = vec![Artifact::csv(format!("{stem}.csv"), &rows)];
    if plot {
        let data: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![r.n as f64, r.density, r.running_min])
            .collect();
        out.push(Artifact::plot(format!("{stem}.dat"), &["n", "density", "running_min"], &data));
    }
    out.push(Artifact::json(
        format!("{stem}.json"),
        &CcostSummary {
            lipschitz: l,
            graphs: graphs.iter().map(|(l, _)| l.as_str()).collect(),
            report,
        },
    ));
    Ok(out)
}

pub fn transfer(
    g1: &Graph,
    h1: &Graph,
    g2: &Graph,
    l: usize,
    opts: &TransferOptions,
    stem: &str,
) -> Result<Vec<Artifact>, CliError> {
    let out = transfer_rewiring(g1, h1, g2, l, opts)?;
    if !out.certificate.valid {
        return Err(CliError::Analysis("transferred rewiring failed certification".into()));
    }
    #[derive(Serialize)]
    struct Report<'a> {
        valid: bool,
        #[serde(flatten)]
        report: &'a rgcost::rewiring::TransferReport,
    }
    Ok(vec![
        Artifact::text(format!("{stem}.elist"), write_graph(&out.rewired)),
        Artifact::json(
            format!("{stem}.report.json"),
            &Report {
                valid: out.certificate.valid,
                report: &out.report,
            },
        ),
    ])
}

pub fn enumerate(p: &Presentation, subgroup: &[Word], max_cosets: usize, stem: &str) -> Result<Vec<Artifact>, CliError> {
    let sch = todd_coxeter(p, subgroup, max_cosets)?;
    Ok(vec![Artifact::json(format!("{stem}.json"), &sch)])
}

pub fn rs_presentation(
    p: &Presentation,
    sch: &SchreierGraph,
    tietze_budget: Option<usize>,
    stem: &str,
) -> Result<Vec<Artifact>, CliError> {
    let sp = reidemeister_schreier(sch, p)?;
    #[derive(Serialize)]
    struct Out<'a> {
        index: usize,
        generator_count: usize,
        /// Each Schreier generator as a word over the group generators.
        generator_words: Vec<String>,
        presentation: &'a rgcost::schreier::SchreierPresentation,
        tietze: Option<rgcost::schreier::TietzeResult>,
    }
    let out = Out {
        index: sp.index,
        generator_count: sp.generator_count(),
        generator_words: sp.generators.iter().map(|t| p.format_word(&t.word)).collect(),
        tietze: tietze_budget.map(|b| tietze_simplify(&sp, b)),
        presentation: &sp,
    };
    Ok(vec![Artifact::json(format!("{stem}.json"), &out)])
}

#[derive(Serialize)]
struct RankCsvRow<'a> {
    graph: &'a str,
    index: usize,
    d_lower: usize,
    d_upper: usize,
    r_lower: f64,
    r_upper: f64,
    exact: bool,
    certified: bool,
    free_rank: usize,
    torsion: String,
}

pub fn rankgrad(group: &GroupInput, opts: RankOptions, stem: &str, plot: bool) -> Result<Vec<Artifact>, CliError> {
    let rows = rank_gradient_table(&group.presentation, &group.graphs, &group.candidates, opts)?;
    let csv_rows: Vec<RankCsvRow> = group
        .labels
        .iter()
        .zip(&rows)
        .map(|(label, r)| RankCsvRow {
            graph: label,
            index: r.index,
            d_lower: r.d_lower,
            d_upper: r.d_upper,
            r_lower: r.r_lower,
            r_upper: r.r_upper,
            exact: r.exact,
            certified: r.certified,
            free_rank: r.abelianization.free_rank,
            torsion: r
                .abelianization
                .torsion
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" "),
        })
        .collect();
    let mut out = vec![Artifact::csv(format!("{stem}.csv"), &csv_rows)];
    if plot {
        let data: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.index as f64, r.r_lower, r.r_upper]).collect();
        out.push(Artifact::plot(format!("{stem}.dat"), &["index", "r_lower", "r_upper"], &data));
    }
    Ok(out)
}

#[derive(Serialize)]
struct FarberRow<'a> {
    graph: &'a str,
    index: usize,
    statistic: String,
    count: Option<usize>,
    value: f64,
}

/// Default probe words: each generator and each product of two distinct
/// generators.
pub fn default_words(p: &Presentation) -> Vec<Word> {
    let g = p.generator_count() as u32;
    let mut words: Vec<Word> = (0..g).map(Word::generator).collect();
    for i in 0..g {
        for j in i + 1..g {
            words.push(Word(vec![2 * i, 2 * j]));
        }
    }
    words
}

pub fn farber(
    group: &GroupInput,
    words: &[Word],
    radius: Option<usize>,
    stem: &str,
    plot: bool,
) -> Result<Vec<Artifact>, CliError> {
    let mut rows = Vec::new();
    let mut plot_rows = Vec::new();
    for (label, sch) in group.labels.iter().zip(&group.graphs) {
        let mut plot_row = vec![sch.n() as f64];
        for fp in farber_statistic(sch, words) {
            plot_row.push(fp.fraction);
            rows.push(FarberRow {
                graph: label,
                index: sch.n(),
                statistic: format!("fix({})", group.presentation.format_word(&fp.word)),
                count: Some(fp.fixed),
                value: fp.fraction,
            });
        }
        if let (Some(r), Some(kind)) = (radius, group.cayley) {
            let value = cayley_ball_match(sch, kind, r);
            plot_row.push(value);
            rows.push(FarberRow {
                graph: label,
                index: sch.n(),
                statistic: format!("ball_match({r})"),
                count: None,
                value,
            });
        }
        plot_rows.push(plot_row);
    }
    let mut out = vec![Artifact::csv(format!("{stem}.csv"), &rows)];
    if plot {
        let mut cols: Vec<String> = vec!["index".into()];
        cols.extend(words.iter().map(|w| format!("fix({})", group.presentation.format_word(w))));
        if radius.is_some() && group.cayley.is_some() {
            cols.push("ball_match".into());
        }
        let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
        out.push(Artifact::plot(format!("{stem}.dat"), &cols, &plot_rows));
    }
    Ok(out)
}

/// Presentation, Schreier graphs and known subgroup generators of a
/// built-in family.
pub fn family(f: &Family) -> Vec<Artifact> {
    let mut out = vec![Artifact::text(format!("{}.pres", f.name), f.presentation.to_string())];
    for ((param, sch), cand) in f.params.iter().zip(&f.graphs).zip(&f.candidates) {
        out.push(Artifact::json(format!("{}-{param}.json", f.name), sch));
        if let Some(words) = cand {
            let text: String = words
                .iter()
                .map(|w| format!("sub: {}\n", f.presentation.format_word(w)))
                .collect();
            out.push(Artifact::text(format!("{}-{param}.sub", f.name), text));
        }
    }
    out
}

pub fn partition(sg: &StepGraph, k: usize, eps: f64, budget: usize, seed: u64, stem: &str) -> Result<Vec<Artifact>, CliError> {
    if k == 0 {
        return Err(CliError::input("k must be at least 1"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CliError::input("eps must be positive"));
    }
    let result = balanced_partition(sg, k, eps, budget, seed);
    Ok(vec![Artifact::json(format!("{stem}.json"), &result)])
}

pub fn trichotomy(group: &GroupInput, c: f64, opts: ReportOptions, stem: &str) -> Result<Vec<Artifact>, CliError> {
    let report = trichotomy_report(&group.presentation, &group.graphs, c, opts)?;
    #[derive(Serialize)]
    struct Out<'a> {
        graphs: &'a [String],
        #[serde(flatten)]
        report: rgcost::trichotomy::TrichotomyReport,
    }
    Ok(vec![Artifact::json(
        format!("{stem}.json"),
        &Out {
            graphs: &group.labels,
            report,
        },
    )])
}
