use proptest::prelude::*;

use ergg_core::bitgraph::BitGraph;
use ergg_core::cliques::{edge_clique_at_least, edge_clique_number};
use ergg_core::graphgen::{build_rgg, perturb, read_edge_list, write_edge_list};
use ergg_core::space::{
    make_space, read_points_csv, write_points_csv, MetricSpace, PointCloud, SpaceKind,
};

fn arb_space() -> impl Strategy<Value = MetricSpace> {
    (prop_oneof![Just(SpaceKind::UnitCube), Just(SpaceKind::FlatTorus)], 1usize..4)
        .prop_map(|(kind, dim)| make_space(kind, dim).unwrap())
}

fn arb_cloud() -> impl Strategy<Value = PointCloud> {
    arb_space().prop_flat_map(|space| {
        let dim = space.dim;
        prop::collection::vec(
            prop::collection::vec(0.0f64..1.0, dim..=dim),
            1..40,
        )
        .prop_map(move |points| PointCloud {
            space,
            points,
            seed: 0,
        })
    })
}

fn arb_graph() -> impl Strategy<Value = BitGraph> {
    (2usize..12, any::<u64>()).prop_map(|(n, seed)| {
        ergg_core::graphgen::sample_gnp(n, 0.5, seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms(cloud in arb_cloud(), idx in prop::collection::vec(0usize..1000, 3)) {
        let n = cloud.len() as u32;
        let (a, b, c) = (idx[0] as u32 % n, idx[1] as u32 % n, idx[2] as u32 % n);
        let (ab, ba) = (cloud.distance(a, b), cloud.distance(b, a));
        prop_assert_eq!(ab, ba);
        prop_assert!(ab >= 0.0);
        prop_assert!(cloud.distance(a, a) == 0.0);
        prop_assert!(cloud.distance(a, c) <= ab + cloud.distance(b, c) + 1e-12);
    }

    #[test]
    fn points_round_trip(cloud in arb_cloud()) {
        let mut buf = Vec::new();
        write_points_csv(&cloud, &mut buf).unwrap();
        let back = read_points_csv(&buf[..]).unwrap();
        prop_assert_eq!(cloud, back);
    }

    #[test]
    fn edge_list_round_trip(seed in any::<u64>(), p in 0.0f64..1.0, q in 0.0f64..0.3) {
        let space = make_space(SpaceKind::FlatTorus, 2).unwrap();
        let cloud = ergg_core::space::sample_points(&space, 25, seed).unwrap();
        let g = build_rgg(cloud, 0.3).unwrap();
        let pg = perturb(g, p, q, seed ^ 0xabcd).unwrap();
        let labels = ergg_core::graphgen::classify_edges(&pg);
        let mut buf = Vec::new();
        write_edge_list(&pg, &labels, &mut buf).unwrap();
        let parsed = read_edge_list(&buf[..]).unwrap();
        prop_assert_eq!(parsed.edges.len(), pg.edges.len());
        for ((u, v, prov, label), (&(eu, ev, eprov), elabel)) in
            parsed.edges.iter().zip(pg.edges.iter().zip(&labels))
        {
            prop_assert_eq!((*u, *v, *prov, *label), (eu, ev, eprov, *elabel));
        }
    }

    #[test]
    fn decision_consistent_with_exact(g in arb_graph(), tau in 2u32..10) {
        for &(u, v) in g.edges().iter().take(12) {
            let omega = edge_clique_number(&g, u, v, 1_000_000).unwrap();
            prop_assert_eq!(edge_clique_at_least(&g, u, v, tau).unwrap(), omega >= tau);
        }
    }
}
