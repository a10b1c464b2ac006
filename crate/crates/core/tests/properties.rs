use std::sync::Arc;

use proptest::prelude::*;

use polyent::catalog;
use polyent::entropy_lab::{
    exact_sep_oracle, exact_span_oracle, greedy_separated, pl_system, MetricSystem, State,
};
use polyent::hyperspace::{hausdorff_distance, induced_map, symmetric_product_system, FiniteSubset};
use polyent::phase_space::{GraphPoint, MetricGraph};
use polyent::pl_dynamics::{compose, homeo_certificate, iterate, lap_number, phi, PLMap};
use polyent::rational::{q, qi, Q};

fn graphs() -> Vec<Arc<MetricGraph>> {
    vec![catalog::unit_interval(), catalog::unit_circle(), catalog::tripod(), catalog::lollipop()]
}

fn point_on(g: &MetricGraph, edge: usize, num: i128, den: i128) -> GraphPoint {
    let e = edge % g.edge_count();
    g.canonicalize(e, q(num.min(den), den))
}

fn raw_point() -> impl Strategy<Value = (usize, i128, i128)> {
    (0usize..8, 0i128..=97, 1i128..=97)
}

/// Interval map through `(i/m, y_i)` with `y_i ∈ {0, 1/8, …, 1}`.
fn interval_map() -> impl Strategy<Value = PLMap> {
    (1usize..=4).prop_flat_map(|m| prop::collection::vec(0i128..=8, m + 1)).prop_map(|ys| {
        let m = ys.len() as i128 - 1;
        let pts: Vec<(Q, Q)> = ys.iter().enumerate().map(|(i, &y)| (q(i as i128, m), q(y, 8))).collect();
        PLMap::from_interval_points(catalog::unit_interval(), &pts).unwrap()
    })
}

/// Increasing or decreasing PL homeomorphism of `[0, 1]`.
fn interval_homeo() -> impl Strategy<Value = PLMap> {
    (prop::collection::btree_set(1i128..16, 0..4), any::<bool>()).prop_map(|(inner, flip)| {
        let mut ys: Vec<Q> = vec![qi(0)];
        ys.extend(inner.iter().map(|&k| q(k, 16)));
        ys.push(qi(1));
        if flip {
            ys.reverse();
        }
        let m = ys.len() as i128 - 1;
        let pts: Vec<(Q, Q)> = ys.into_iter().enumerate().map(|(i, y)| (q(i as i128, m), y)).collect();
        PLMap::from_interval_points(catalog::unit_interval(), &pts).unwrap()
    })
}

fn interval_point(num: i128, den: i128) -> GraphPoint {
    catalog::unit_interval().canonicalize(0, q(num.min(den), den))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn graph_distance_is_a_metric(gi in 0usize..4, a in raw_point(), b in raw_point(), c in raw_point()) {
        let g = &graphs()[gi];
        let (x, y, z) = (point_on(g, a.0, a.1, a.2), point_on(g, b.0, b.1, b.2), point_on(g, c.0, c.1, c.2));
        let dxy = g.distance(&x, &y).unwrap();
        prop_assert_eq!(g.distance(&x, &x).unwrap(), qi(0));
        prop_assert_eq!(dxy, g.distance(&y, &x).unwrap());
        prop_assert_eq!(dxy == qi(0), x == y);
        prop_assert!(g.distance(&x, &z).unwrap() <= dxy + g.distance(&y, &z).unwrap());
    }

    #[test]
    fn sample_grid_is_a_net(gi in 0usize..4, a in raw_point(), k in 1i128..=16) {
        let g = &graphs()[gi];
        let mesh = q(1, k);
        let x = point_on(g, a.0, a.1, a.2);
        let grid = g.sample_grid(&mesh).unwrap();
        let nearest = grid.iter().map(|p| g.distance(p, &x).unwrap()).min().unwrap();
        prop_assert!(nearest * 2 <= mesh, "{} is {} from the grid", x, nearest);
    }

    #[test]
    fn composition_is_associative(f in interval_map(), g in interval_map(), h in interval_map(), t in 0i128..=64) {
        let left = compose(&f, &compose(&g, &h).unwrap()).unwrap();
        let right = compose(&compose(&f, &g).unwrap(), &h).unwrap();
        prop_assert_eq!(&left, &right);
        let p = interval_point(t, 64);
        prop_assert_eq!(left.apply(&p).unwrap(), f.apply(&g.apply(&h.apply(&p).unwrap()).unwrap()).unwrap());
    }

    #[test]
    fn iterates_split(f in interval_map(), a in 1usize..=3, b in 1usize..=3) {
        let whole = iterate(&f, a + b).unwrap();
        prop_assert_eq!(whole, compose(&iterate(&f, a).unwrap(), &iterate(&f, b).unwrap()).unwrap());
    }

    #[test]
    fn homeomorphisms_have_unit_phi(h in interval_homeo(), n in 1usize..=5) {
        prop_assert!(homeo_certificate(&h).is_ok());
        prop_assert_eq!(phi(&h, n).unwrap(), 1);
        prop_assert_eq!(lap_number(&h, n).unwrap(), 1);
    }

    #[test]
    fn lap_numbers_are_submultiplicative(f in interval_map(), a in 1usize..=3, b in 1usize..=3) {
        let (ca, cb, cab) = (lap_number(&f, a).unwrap(), lap_number(&f, b).unwrap(), lap_number(&f, a + b).unwrap());
        prop_assert!(cab >= 1 && cab <= ca * cb);
        prop_assert!(phi(&f, a).unwrap() <= ca);
    }

    #[test]
    fn singleton_subsets_are_isometric(gi in 0usize..4, a in raw_point(), b in raw_point()) {
        let g = &graphs()[gi];
        let (x, y) = (point_on(g, a.0, a.1, a.2), point_on(g, b.0, b.1, b.2));
        let d = hausdorff_distance(g, &FiniteSubset::singleton(x.clone()), &FiniteSubset::singleton(y.clone())).unwrap();
        prop_assert_eq!(d, g.distance(&x, &y).unwrap());
    }

    #[test]
    fn induced_homeomorphism_is_a_bijection_on_strata(h in interval_homeo(), ts in prop::collection::vec(0i128..=64, 1..=3)) {
        let a = FiniteSubset::new(ts.iter().map(|&t| interval_point(t, 64)).collect()).unwrap();
        let inv = homeo_certificate(&h).unwrap().inverse;
        let image = induced_map(&h, &a).unwrap();
        prop_assert_eq!(image.len(), a.len());
        prop_assert_eq!(induced_map(&inv, &image).unwrap(), a);
    }
}

fn subset(g: &MetricGraph, pts: &[(usize, i128, i128)]) -> FiniteSubset {
    FiniteSubset::new(pts.iter().map(|&(e, n, d)| point_on(g, e, n, d)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hausdorff_distance_is_a_metric(
        gi in 0usize..4,
        a in prop::collection::vec(raw_point(), 1..=3),
        b in prop::collection::vec(raw_point(), 1..=3),
        c in prop::collection::vec(raw_point(), 1..=3),
    ) {
        let g = &graphs()[gi];
        let (x, y, z) = (subset(g, &a), subset(g, &b), subset(g, &c));
        let dxy = hausdorff_distance(g, &x, &y).unwrap();
        prop_assert_eq!(hausdorff_distance(g, &x, &x).unwrap(), qi(0));
        prop_assert_eq!(dxy, hausdorff_distance(g, &y, &x).unwrap());
        prop_assert_eq!(dxy == qi(0), x == y);
        prop_assert!(hausdorff_distance(g, &x, &z).unwrap() <= dxy + hausdorff_distance(g, &y, &z).unwrap());
    }
}

const SYSTEMS: &[&str] = &["identity", "tent", "pl_contract", "rotation(phi)", "tripod_contract", "lollipop_contract"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn greedy_separated_is_sandwiched_by_the_oracles(
        si in 0usize..SYSTEMS.len(),
        pts in prop::collection::vec(raw_point(), 1..=14),
        n in 1usize..=8,
        k in 1i128..=40,
    ) {
        let sys = catalog::resolve(SYSTEMS[si]).unwrap();
        let g = catalog::resolve_map(SYSTEMS[si]).unwrap().graph_arc().clone();
        let sample: Vec<State> = pts.iter().map(|&(e, a, b)| State::Point(point_on(&g, e, a, b))).collect();
        let eps = q(k, 83);
        let greedy = greedy_separated(sys.as_ref(), n, k as f64 / 83.0, &sample).unwrap();
        for (i, a) in greedy.iter().enumerate() {
            for b in &greedy[..i] {
                prop_assert!(polyent::entropy_lab::dynamic_distance(sys.as_ref(), n, a, b).unwrap() >= eps);
            }
        }
        prop_assert!(exact_span_oracle(sys.as_ref(), n, &eps, &sample).unwrap() <= greedy.len());
        prop_assert!(greedy.len() <= exact_sep_oracle(sys.as_ref(), n, &eps, &sample).unwrap());
    }

    #[test]
    fn greedy_counts_grow_with_n_for_interval_homeomorphisms(h in interval_homeo(), n in 1usize..=12, k in 2i128..=12) {
        let sys: Arc<dyn MetricSystem> = pl_system("h", h).unwrap();
        let grid = sys.sample(&q(1, 32)).unwrap();
        let eps = 1.0 / k as f64;
        let now = greedy_separated(sys.as_ref(), n, eps, &grid).unwrap().len();
        let next = greedy_separated(sys.as_ref(), n + 1, eps, &grid).unwrap().len();
        prop_assert!(now <= next, "n={} gives {} then {}", n, now, next);
    }
}

#[test]
fn symmetric_singletons_follow_the_base_map() {
    let f = catalog::resolve_map("pl_contract").unwrap();
    let f1 = symmetric_product_system(&f, "pl_contract", 1).unwrap();
    for t in 0..=16 {
        let p = interval_point(t, 16);
        let img = f1.apply(&State::Set(FiniteSubset::singleton(p.clone()))).unwrap();
        assert_eq!(img, State::Set(FiniteSubset::singleton(f.apply(&p).unwrap())));
    }
}
