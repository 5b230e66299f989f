use std::f64::consts::{PI, TAU};

use carleson_core::checkers::{equivalence_report, square_constant, whitney_ball_constant, WhitneySampling};
use carleson_core::disc::WHITNEY_C;
use carleson_core::domain::Domain;
use carleson_core::measure::Atom;
use carleson_core::qns::{qns_constant, BallRule, GridFunction, QnsCandidate};
use carleson_core::stopping::{build_generations, default_root};
use carleson_core::{carleson_box, Complex64, ConformalMap, MapCatalogEntry, PlanarMeasure, StoppingConfig};
use proptest::prelude::*;

fn atoms() -> impl Strategy<Value = PlanarMeasure> {
    prop::collection::vec((0.0f64..0.999, 0.0f64..TAU, 0.1f64..10.0), 1..12).prop_map(|v| {
        PlanarMeasure::atomic(
            v.into_iter()
                .map(|(r, t, w)| Atom::new(Complex64::from_polar(r, t), w))
                .collect(),
        )
        .unwrap()
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn square_and_ball_constants_are_homogeneous(mu in atoms(), lambda in 0.01f64..100.0, beta in 0.5f64..3.0) {
        let scaled = mu.scaled(lambda);
        prop_assert!(close(square_constant(&scaled, beta, 8).unwrap(), lambda * square_constant(&mu, beta, 8).unwrap()));
        let s = WhitneySampling::new(6);
        prop_assert!(close(
            whitney_ball_constant(&scaled, beta, &s, WHITNEY_C).unwrap(),
            lambda * whitney_ball_constant(&mu, beta, &s, WHITNEY_C).unwrap()
        ));
    }

    #[test]
    fn equivalence_ratio_ignores_total_mass(mu in atoms(), lambda in 0.01f64..100.0) {
        let a = equivalence_report(&mu, 1.5, 8).unwrap().ratio;
        let b = equivalence_report(&mu.scaled(lambda), 1.5, 8).unwrap().ratio;
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn half_turn_preserves_constants(mu in atoms(), beta in 0.5f64..3.0) {
        // a half turn permutes the dyadic arcs of every level >= 1 and the Whitney centres
        let turned = mu.rotated(PI).unwrap();
        prop_assert!(close(square_constant(&turned, beta, 8).unwrap(), square_constant(&mu, beta, 8).unwrap()));
        let s = WhitneySampling::new(6);
        prop_assert!(close(
            whitney_ball_constant(&turned, beta, &s, WHITNEY_C).unwrap(),
            whitney_ball_constant(&mu, beta, &s, WHITNEY_C).unwrap()
        ));
    }

    #[test]
    fn deeper_scans_never_decrease(mu in atoms(), beta in 0.5f64..3.0, depth in 1usize..10) {
        prop_assert!(square_constant(&mu, beta, depth + 1).unwrap() >= square_constant(&mu, beta, depth).unwrap());
        prop_assert!(
            whitney_ball_constant(&mu, beta, &WhitneySampling::new(depth as u32 + 1), WHITNEY_C).unwrap()
                >= whitney_ball_constant(&mu, beta, &WhitneySampling::new(depth as u32), WHITNEY_C).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stopping_regions_tile_the_root_box(c in 0.0f64..0.5, log_m in 0.3f64..3.0, depth in 2usize..9) {
        let map = ConformalMap::new(MapCatalogEntry::quadratic(c)).unwrap();
        let config = StoppingConfig::new(log_m.exp(), depth, 16).unwrap();
        let tree = build_generations(&map, default_root(), config).unwrap();
        let root_area = carleson_box(tree.root_arc()).area();
        let covered: f64 = (0..tree.region_count()).map(|id| tree.region_area(id)).sum::<f64>() + tree.unresolved_area();
        prop_assert!((covered - root_area).abs() <= 1e-12 * root_area, "{} vs {}", covered, root_area);

        let lookup = tree.node_index();
        for (id, node) in tree.nodes.iter().enumerate() {
            for &g in &node.governed {
                prop_assert_eq!(tree.owner(g, &lookup), id);
            }
        }
    }

    #[test]
    fn qns_constant_ignores_scaling(lambda in 0.01f64..100.0, seed in 0u64..1000) {
        let disc = Domain::unit_disc(512).unwrap();
        let n = 16;
        let values: Vec<f64> = (0..n * n).map(|k| 1.0 + ((k as u64 * 2654435761 + seed) % 97) as f64 / 10.0).collect();
        let grid = GridFunction::new(Complex64::new(-1.0, -1.0), 2.0 / n as f64, n, n, values.clone()).unwrap();
        let scaled = GridFunction::new(grid.origin, grid.cell, n, n, values.iter().map(|v| v * lambda).collect()).unwrap();
        let balls = [(Complex64::new(0.0, 0.0), 0.8), (Complex64::new(0.2, -0.1), 0.6)];
        let a = qns_constant(&QnsCandidate::grid(grid), &disc, &balls, BallRule::default()).unwrap();
        let b = qns_constant(&QnsCandidate::grid(scaled), &disc, &balls, BallRule::default()).unwrap();
        prop_assert!((a.constant - b.constant).abs() <= 1e-10 * a.constant);
        let k = qns_constant(&QnsCandidate::Constant { value: lambda }, &disc, &balls, BallRule::default()).unwrap();
        prop_assert!((k.constant - 1.0 / PI).abs() < 1e-12);
    }
}
