mod common;

use approx::assert_abs_diff_eq;

use common::*;
use nearcut::objective::FunctionalKind;
use nearcut::outer::{newton_bisection, OuterConfig, StepMode};
use nearcut::reference::{ladder_graph, planted_partition, stoer_wagner_sq};
use nearcut::{Graph, Report};

fn mincut(g: &Graph) -> Report {
    newton_bisection(g, &FunctionalKind::MinCut, &OuterConfig::default()).unwrap()
}

fn assert_sane_trace(r: &Report) {
    for row in &r.trace {
        if let Some(fp) = row.f_prime {
            assert!(fp <= 0.0, "f' = {fp} at k = {}", row.k);
        }
        assert!(row.lb <= row.ub);
    }
    for w in r.trace.windows(2) {
        if w[1].mode == StepMode::Newton {
            assert!(w[0].f_prime.is_some());
        }
    }
}

#[test]
fn one_edge_distance_is_w_root_two() {
    for w in [0.5, 1.0, 3.0] {
        let g = Graph::new(2, [(0, 1, w)]).unwrap();
        let r = mincut(&g);
        assert_abs_diff_eq!(r.eps_star, w * 2f64.sqrt(), epsilon = 1e-10);
        assert!(r.trace.len() <= 3);
        assert!(r.certified);
        assert_sane_trace(&r);
    }
}

#[test]
fn ladder_eight_cuts_the_pendant_edge() {
    let g = ladder_graph::<f64>(8).unwrap();
    let r = mincut(&g);
    assert!(r.certified);
    let p = r.partition.unwrap();
    assert_eq!(p.cut_edges.iter().map(|k| g.edges()[k]).collect::<Vec<_>>(), vec![(0, 1)]);
    assert_sane_trace(&mincut(&g));
}

#[test]
fn ladder_twenty_splits_in_halves() {
    let g = ladder_graph::<f64>(20).unwrap();
    let r = mincut(&g);
    assert!(r.certified);
    let p = r.partition.as_ref().unwrap();
    assert_eq!(p.class(0), (0..10).collect::<Vec<_>>());
    assert_eq!(p.class(1), (10..20).collect::<Vec<_>>());
    assert_sane_trace(&r);
}

#[test]
fn certified_cuts_never_beat_the_exact_minimum() {
    let mut r = rng(51);
    for _ in 0..30 {
        let g = integer_graph(&mut r);
        let rep = mincut(&g);
        assert_sane_trace(&rep);
        if let Some(p) = rep.partition.as_ref().filter(|_| rep.certified) {
            assert!(p.cost >= stoer_wagner_sq(&g).unwrap().cost);
            assert!(p.cut_edges.len() >= 1);
        }
    }
}

#[test]
fn cardinality_partition_respects_the_bound() {
    let mut r = rng(52);
    for _ in 0..10 {
        let g = integer_graph(&mut r);
        let nbar = g.n() / 3;
        if nbar == 0 {
            continue;
        }
        let rep = newton_bisection(&g, &FunctionalKind::Cardinality { nbar, delta: None, alpha: 3.0 }, &OuterConfig::default()).unwrap();
        assert_sane_trace(&rep);
        if rep.certified {
            let (a, b) = rep.partition.unwrap().sizes();
            assert!(a >= nbar && b >= nbar);
        }
    }
}

#[test]
fn membership_partition_separates_the_sets() {
    let mut r = rng(53);
    for _ in 0..10 {
        let g = integer_graph(&mut r);
        let n = g.n();
        let kind = FunctionalKind::Membership { minus: vec![0], plus: vec![n - 1], alpha: 3.0 };
        let rep = newton_bisection(&g, &kind, &OuterConfig::default()).unwrap();
        assert_sane_trace(&rep);
        if rep.certified {
            let p = rep.partition.unwrap();
            assert_ne!(p.labels[0], p.labels[n - 1]);
        }
    }
}

#[test]
fn disjoint_cliques_have_zero_ambiguity() {
    let g = planted_partition::<f64>(4, 10, 1.0, 0.0, 0).unwrap();
    let r = newton_bisection(&g, &FunctionalKind::Ambiguity, &OuterConfig::default()).unwrap();
    assert_eq!(r.eps_star, 0.0);
    assert!(r.certified);
}

#[test]
fn planted_partition_ambiguity_is_of_order_one() {
    for seed in 0..3 {
        let g = planted_partition::<f64>(4, 10, 0.8, 0.2, seed).unwrap();
        let r = newton_bisection(&g, &FunctionalKind::Ambiguity, &OuterConfig::default()).unwrap();
        assert!((0.3..=4.0).contains(&r.eps_star), "seed {seed}: {}", r.eps_star);
        assert_sane_trace(&r);
    }
}

#[test]
fn invalid_outer_config_is_rejected() {
    let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
    let cfg = OuterConfig { theta: 1.5, ..OuterConfig::default() };
    assert!(newton_bisection(&g, &FunctionalKind::MinCut, &cfg).is_err());
    let bad = FunctionalKind::Membership { minus: vec![0], plus: vec![0], alpha: 1.0 };
    assert!(newton_bisection(&g, &bad, &OuterConfig::default()).is_err());
}
