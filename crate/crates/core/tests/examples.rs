use polyent::catalog;
use polyent::entropy_lab::{greedy_separated, growth_exponent, EstimationProtocol, NetOptions};
use polyent::hyperspace::{
    factor_map_check, hyperspace_growth_trend, induced_map, symmetric_product_system, FiniteSubset,
};
use polyent::pl_dynamics::{
    fixed_points, periodic_points, phi, wandering_status, PLMap, Piece, Wandering, WanderingProbe,
};
use polyent::rational::{q, qi};

fn interval_point(t: polyent::rational::Q) -> polyent::phase_space::GraphPoint {
    catalog::unit_interval().point(0, t).unwrap()
}

#[test]
fn fixed_and_periodic_sets() {
    let third = catalog::resolve_map("rotation(1/3)").unwrap();
    assert!(fixed_points(&third).unwrap().is_empty());
    let tripod = catalog::resolve_map("tripod_rotate").unwrap();
    assert_eq!(fixed_points(&tripod).unwrap().points, vec![tripod.graph().vertex_point(0)]);
    assert!(periodic_points(&tripod, 3).unwrap().is_everything(tripod.graph()));
    assert!(!periodic_points(&tripod, 2).unwrap().is_everything(tripod.graph()));
    let contract = catalog::resolve_map("pl_contract").unwrap();
    let fix2 = periodic_points(&contract, 2).unwrap();
    assert_eq!(fix2.points, vec![interval_point(qi(0)), interval_point(qi(1))]);
    assert!(fix2.segments.is_empty());
}

#[test]
fn golden_rotation_is_recurrent_by_probe() {
    let f = catalog::resolve_map("rotation(phi)").unwrap();
    let p = f.graph().point(0, q(1, 5)).unwrap();
    let v = wandering_status(&f, &p, WanderingProbe { horizon: 10_000, radius: 1e-2 }).unwrap();
    assert_eq!(v.status, Wandering::Nonwandering);
    assert!(!v.exact, "no exact criterion applies to an irrational rotation");
}

#[test]
fn constant_map_has_one_preimage_component() {
    let g = catalog::unit_interval();
    let piece = Piece { start: qi(0), end: qi(1), target: 0, a: qi(0), b: qi(0) };
    let f = PLMap::new(g, vec![vec![piece]]).unwrap();
    for n in 1..=4 {
        assert_eq!(phi(&f, n).unwrap(), 1);
    }
}

#[test]
fn contraction_separated_sets_keep_growing() {
    let sys = catalog::resolve("pl_contract").unwrap();
    let sizes: Vec<usize> = [1, 2, 4, 8, 16, 32, 64]
        .iter()
        .map(|&n| {
            let net = sys.prepare(n, 0.125, 0.125 / 4.0, &NetOptions::default()).unwrap();
            let sample: Vec<_> = (0..net.len()).map(|i| net.state(i).unwrap()).collect();
            greedy_separated(sys.as_ref(), n, 0.125, &sample).unwrap().len()
        })
        .collect();
    assert!(sizes.windows(2).all(|w| w[0] < w[1]), "{sizes:?}");
}

#[test]
fn rotation_separated_sets_ignore_n() {
    let sys = catalog::resolve("rotation(phi)").unwrap();
    let grid = sys.sample(&q(1, 32)).unwrap();
    let sizes: Vec<usize> =
        [1, 10, 50].iter().map(|&n| greedy_separated(sys.as_ref(), n, 0.13, &grid).unwrap().len()).collect();
    assert!(sizes.iter().all(|&s| s == sizes[0]), "{sizes:?}");
}

#[test]
fn induced_tent_merges_points() {
    let tent = catalog::resolve_map("tent").unwrap();
    let a = FiniteSubset::new(vec![interval_point(q(1, 4)), interval_point(q(3, 4))]).unwrap();
    assert_eq!(induced_map(&tent, &a).unwrap(), FiniteSubset::singleton(interval_point(q(1, 2))));
    let merging = vec![vec![interval_point(q(1, 4)), interval_point(q(3, 4))]];
    assert!(factor_map_check(&tent, &merging).unwrap().holds());
    let contract = catalog::resolve_map("pl_contract").unwrap();
    let b = FiniteSubset::new(vec![interval_point(q(1, 2)), interval_point(q(3, 4))]).unwrap();
    let image = FiniteSubset::new(vec![interval_point(q(1, 4)), interval_point(q(5, 8))]).unwrap();
    assert_eq!(induced_map(&contract, &b).unwrap(), image);
}

#[test]
fn identity_factor_identity_holds() {
    let id = catalog::resolve_map("identity").unwrap();
    let tuples: Vec<_> = (0..=8).map(|k| vec![interval_point(q(k, 8)), interval_point(q(8 - k, 8))]).collect();
    assert!(factor_map_check(&id, &tuples).unwrap().holds());
}

#[test]
fn first_symmetric_power_has_the_base_exponent() {
    let p = EstimationProtocol::with_ranges(3..=4, 0..=7);
    let f = catalog::resolve_map("pl_contract").unwrap();
    let base = growth_exponent(catalog::resolve("pl_contract").unwrap().as_ref(), &p).unwrap();
    let f1 = growth_exponent(&symmetric_product_system(&f, "pl_contract", 1).unwrap(), &p).unwrap();
    let counts = |r: &polyent::entropy_lab::GrowthReport| r.rows.iter().map(|c| c.sep_greedy).collect::<Vec<_>>();
    assert_eq!(counts(&base), counts(&f1));
    assert_eq!(base.exponent, f1.exponent);
}

#[test]
fn isometry_trends_stay_flat() {
    let p = EstimationProtocol::hyperspace_trend();
    for (name, bound) in [("identity", 0.0), ("tripod_rotate", 0.2)] {
        let f = catalog::resolve_map(name).unwrap();
        let t = hyperspace_growth_trend(&f, name, 3, &p, 0.6).unwrap();
        assert!(t.rows.iter().all(|r| r.exponent <= bound), "{name}: {:?}", t.rows);
        assert!(!t.increasing);
    }
}

#[test]
fn contraction_trend_tracks_the_subset_size() {
    let f = catalog::resolve_map("pl_contract").unwrap();
    let t = hyperspace_growth_trend(&f, "pl_contract", 3, &EstimationProtocol::hyperspace_trend(), 0.6).unwrap();
    for r in &t.rows {
        assert!((r.exponent - r.k as f64).abs() <= 0.4, "F{} estimate {:.3} is not within 0.4 of {}", r.k, r.exponent, r.k);
    }
}
