//! End-to-end flows through the public API.

use rgcost::graph::{families, parse_graph, write_graph};
use rgcost::rewiring::{edge_density, is_rewiring, optimize_rewiring};
use rgcost::schreier::{builtin_family, parse_presentation, rank_gradient_table, todd_coxeter, RankOptions};
use rgcost::stats::{bs_distance, neighborhood_distribution};
use rgcost::trichotomy::{trichotomy_report, Branch, ReportOptions};

#[test]
fn text_graph_to_statistics() {
    let g = parse_graph(&write_graph(&families::cycle(9))).unwrap();
    let d = neighborhood_distribution(&g, 3).unwrap();
    assert_eq!(d.support_size(), 1);
    assert_eq!(bs_distance(&g, &families::cycle(12), 3).unwrap(), 0.0);
    assert_eq!(bs_distance(&g, &families::cycle(7), 3).unwrap(), 1.0);
}

#[test]
fn rewiring_is_independently_certified() {
    let g = families::torus(6, 6);
    let (h, cert) = optimize_rewiring(&g, 2, 3000, 5).unwrap();
    assert!(cert.valid);
    assert!(is_rewiring(&g, &h, 2).unwrap().revalidate());
    assert!(edge_density(&h) <= edge_density(&g));
}

#[test]
fn enumeration_matches_builtin_torus() {
    let (p, _) = parse_presentation("gens: a b\nrel: abAB\n").unwrap();
    let words = vec![p.parse_word("aaa").unwrap(), p.parse_word("bbb").unwrap()];
    let sch = todd_coxeter(&p, &words, 1000).unwrap();
    assert_eq!(sch.n(), 9);
    let rows = rank_gradient_table(&p, &[sch], &[Some(words)], RankOptions::default()).unwrap();
    assert_eq!((rows[0].d_lower, rows[0].d_upper), (2, 2));
    assert!(rows[0].certified);
}

#[test]
fn trichotomy_on_families() {
    let tori = builtin_family("Z2-torus", &[4, 6], 0).unwrap();
    let report = trichotomy_report(&tori.presentation, &tori.graphs, 0.5, ReportOptions::default()).unwrap();
    assert!(report.rows.iter().all(|r| r.branch == Branch::RankGradientSmall));

    let free = builtin_family("F2-random", &[40], 3).unwrap();
    let report = trichotomy_report(&free.presentation, &free.graphs, 0.5, ReportOptions::default()).unwrap();
    assert_eq!(report.rows[0].branch, Branch::NotDispersive);
}
