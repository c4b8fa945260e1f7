mod common;

use common::*;
use nearcut::graph::{
    active_cut_set, component_count, components_from_edges, connected_components, laplacian, project_pattern, EdgeSet,
    PatternMatrix,
};
use nearcut::{Error, Graph};
use proptest::prelude::*;

#[test]
fn laplacian_matches_independent_assembly() {
    let mut r = rng(21);
    for _ in 0..20 {
        let g = random_graph(&mut r);
        let e = random_pattern(g.edge_count(), &mut r);
        let l = laplacian(&g, Some(&e), 0.3, 0.0).unwrap();
        let d = dense_laplacian(&g, &e, 0.3);
        for i in 0..g.n() {
            for j in 0..g.n() {
                assert!((l[(i, j)] - d[i][j]).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn pattern_inner_product_is_the_dense_frobenius_product() {
    let mut r = rng(22);
    for _ in 0..20 {
        let g = random_graph(&mut r);
        let a = random_pattern(g.edge_count(), &mut r);
        let b = random_pattern(g.edge_count(), &mut r);
        let dense = a.to_dense(&g).component_mul(&b.to_dense(&g)).sum();
        assert!((a.dot(&b) - dense).abs() < 1e-13);
        assert!((a.norm() - a.to_dense(&g).norm()).abs() < 1e-13);
        assert_eq!(project_pattern(&a.to_dense(&g), &g).unwrap(), a);
    }
}

#[test]
fn frobenius_norm_of_weights() {
    let g = Graph::new(3, [(0, 1, 3.0), (1, 2, 4.0)]).unwrap();
    assert!((g.frobenius_norm() - 50f64.sqrt()).abs() < 1e-14);
    assert_eq!(g.weight_matrix()[(1, 0)], 3.0);
}

#[test]
fn construction_errors() {
    assert!(matches!(Graph::new(2, [(0, 0, 1.0)]), Err(Error::InvalidGraph(_))));
    assert!(matches!(Graph::new(2, [(0, 2, 1.0)]), Err(Error::InvalidGraph(_))));
    assert!(matches!(Graph::new(2, [(0, 1, -1.0)]), Err(Error::InvalidGraph(_))));
    assert!(matches!(Graph::new(2, [(0, 1, 1.0), (1, 0, 1.0)]), Err(Error::InvalidGraph(_))));
    assert!(matches!(Graph::new(2, [(0, 1, f64::NAN)]), Err(Error::InvalidGraph(_))));
}

#[test]
fn pattern_length_is_checked() {
    let g = Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
    assert!(matches!(laplacian(&g, Some(&PatternMatrix::zeros(3)), 1.0, 0.0), Err(Error::Dimension { .. })));
}

#[test]
fn cut_edges_split_components() {
    // Two triangles joined by one bridge.
    let g = Graph::new(6, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0), (2, 3, 0.5)]).unwrap();
    let bridge = g.edge_index(2, 3).unwrap();
    let mut e = PatternMatrix::zeros(g.edge_count());
    e.values_mut()[bridge] = -1.0;
    let active = active_cut_set(&g, &e, 0.5, 1e-12);
    assert_eq!(active.iter().collect::<Vec<_>>(), vec![bridge]);
    let kept = active.complement(g.edge_count());
    let labels = components_from_edges(6, kept.iter().map(|k| g.edges()[k]));
    assert_eq!(labels, vec![0, 0, 0, 1, 1, 1]);
    assert_eq!(component_count(&connected_components(&g, 0.6)), 2);
    assert!(g.is_connected());
}

proptest! {
    #[test]
    fn laplacian_is_symmetric_psd_with_zero_rows(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let g = random_graph(&mut r);
        let l = laplacian(&g, None, 0.0, 0.0).unwrap();
        prop_assert!((&l - l.transpose()).amax() == 0.0);
        for i in 0..g.n() {
            prop_assert!(l.row(i).sum().abs() < 1e-13);
        }
        let x = nalgebra::DVector::from_fn(g.n(), |i, _| ((i * 7 + 3) as f64).sin());
        prop_assert!((&l * &x).dot(&x) >= -1e-12);
    }

    #[test]
    fn edge_set_algebra(a in proptest::collection::vec(0usize..20, 0..12), b in proptest::collection::vec(0usize..20, 0..12)) {
        let sa: EdgeSet = a.iter().copied().collect();
        let sb: EdgeSet = b.iter().copied().collect();
        let u = sa.union(&sb);
        prop_assert!(sa.is_subset(&u) && sb.is_subset(&u));
        let c = u.complement(20);
        prop_assert_eq!(c.len() + u.len(), 20);
        prop_assert!(c.iter().all(|k| !u.contains(k)));
        let v: Vec<usize> = u.iter().collect();
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}
