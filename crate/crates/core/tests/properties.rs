use std::collections::BTreeMap;

use pcap::capacity::{capacity, series_capacity, Condenser};
use pcap::green::{green_capacitary, green_delta};
use pcap::penergy::{self, energy, SolveSpec};
use pcap::space::{build_path, Edge, VertexSet, WeightedGraphSpace};
use pcap::superlevel::{achieved_levels, split_potentials, verify_identity};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Random connected graph: a random tree plus a few chords.
fn graph(max_n: usize) -> impl Strategy<Value = WeightedGraphSpace> {
    (4..=max_n, 1.2f64..5.0).prop_flat_map(|(n, p)| {
        let parents: Vec<_> = (1..n).map(|k| 0..k).collect();
        let chords = prop::collection::vec((0..n, 0..n), 0..n);
        let conductances = prop::collection::vec(0.2f64..5.0, 2 * n);
        (Just(n), Just(p), parents, chords, conductances).prop_map(|(n, p, parents, chords, c)| {
            let mut edges: Vec<Edge> = Vec::new();
            let mut seen = std::collections::BTreeSet::new();
            let pairs = parents.iter().enumerate().map(|(k, &par)| (par, k + 1)).chain(chords);
            for (i, j) in pairs {
                let key = (i.min(j), i.max(j));
                if i != j && seen.insert(key) {
                    let conductance = c[edges.len() % c.len()];
                    edges.push(Edge { i: key.0, j: key.1, length: 1.0, conductance });
                }
            }
            WeightedGraphSpace::from_parts(p, vec![1.0; n], edges, None).unwrap()
        })
    })
}

fn field(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n)
}

fn path(max_edges: usize) -> impl Strategy<Value = WeightedGraphSpace> {
    (prop::collection::vec(0.1f64..10.0, 2..=max_edges), prop::sample::select(vec![1.5, 2.0, 3.0, 4.7])).prop_map(
        |(c, p)| {
            let lengths = vec![1.0; c.len()];
            let measures = vec![1.0; c.len() + 1];
            build_path(&c, &lengths, &measures, p).unwrap()
        },
    )
}

fn graph_with_field() -> impl Strategy<Value = (WeightedGraphSpace, Vec<f64>, Vec<f64>)> {
    graph(12).prop_flat_map(|g| {
        let n = g.vertex_count();
        (Just(g), field(n), field(n))
    })
}

/// Vertex 0 inside, everything past the midpoint of the index range outside.
fn inner_and_outer(g: &WeightedGraphSpace, extra: usize) -> (VertexSet, VertexSet) {
    let n = g.vertex_count();
    let outer: VertexSet = (0..n / 2 + 1).collect();
    let inner: VertexSet = (0..=extra.min(n / 2)).filter(|v| outer.contains(*v)).collect();
    (inner, outer)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_convex_and_homogeneous((g, u, v) in graph_with_field(), t in -3.0f64..3.0, shift in -5.0f64..5.0) {
        let mid: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.5 * (a + b)).collect();
        let (eu, ev) = (energy(&g, &u), energy(&g, &v));
        prop_assert!(energy(&g, &mid) <= 0.5 * (eu + ev) * (1.0 + 1e-12) + 1e-300);
        let scaled: Vec<f64> = u.iter().map(|x| t * x).collect();
        prop_assert!(rel(energy(&g, &scaled), t.abs().powf(g.p()) * eu) < 1e-10 || eu == 0.0);
        let shifted: Vec<f64> = u.iter().map(|x| x + shift).collect();
        prop_assert!((energy(&g, &shifted) - eu).abs() <= 1e-9 * eu.max(1.0));
    }

    #[test]
    fn dirichlet_solution_obeys_maximum_principle((g, u, _) in graph_with_field()) {
        let n = g.vertex_count();
        let fixed: Vec<usize> = vec![0, n - 1, n / 2];
        let mut spec = SolveSpec::new();
        for &v in &fixed {
            spec = spec.fix(v, u[v]);
        }
        let sol = penergy::solve(&g, &spec).unwrap();
        let lo = fixed.iter().map(|&v| u[v]).fold(f64::INFINITY, f64::min);
        let hi = fixed.iter().map(|&v| u[v]).fold(f64::NEG_INFINITY, f64::max);
        for x in &sol.values {
            prop_assert!(*x >= lo - 1e-9 && *x <= hi + 1e-9);
        }
        // the minimizer beats the boundary data extended by its mean
        let mean = (lo + hi) / 2.0;
        let competitor: Vec<f64> = (0..n).map(|v| if fixed.contains(&v) { u[v] } else { mean }).collect();
        prop_assert!(sol.energy <= energy(&g, &competitor) * (1.0 + 1e-10));
    }

    #[test]
    fn charged_solution_satisfies_weak_identity((g, phi, _) in graph_with_field(), q in 0.1f64..3.0) {
        let n = g.vertex_count();
        let spec = SolveSpec::new().fix(n - 1, 0.0).charge(0, q);
        let sol = penergy::solve(&g, &spec).unwrap();
        let mut test = phi.clone();
        test[n - 1] = 0.0;
        let lhs = penergy::weak_form(&g, &sol.values, &test);
        prop_assert!((lhs - q * test[0]).abs() < 1e-8 * (1.0 + q));
    }

    #[test]
    fn capacity_is_monotone_and_subadditive(g in graph(12)) {
        let n = g.vertex_count();
        let (e1, a) = inner_and_outer(&g, 0);
        let (e2, _) = inner_and_outer(&g, 1);
        let smaller_a: VertexSet = a.iter().filter(|&v| v != n / 2 || e2.contains(v)).collect();
        let cap = |e: &VertexSet, a: &VertexSet| capacity(&g, &Condenser::new(&g, e.clone(), a.clone()).unwrap()).unwrap().value;
        let (c1, c2) = (cap(&e1, &a), cap(&e2, &a));
        prop_assert!(c1 <= c2 * (1.0 + 1e-9));
        prop_assert!(cap(&e2, &smaller_a) >= c2 * (1.0 - 1e-9));
        let other: VertexSet = a.iter().filter(|&v| v != 0).take(1).collect();
        let joint = e1.union(&other);
        prop_assert!(cap(&joint, &a) <= (c1 + cap(&other, &a)) * (1.0 + 1e-9));
    }

    #[test]
    fn metric_balls_are_nested(g in graph(12), r1 in 0.0f64..6.0, dr in 0.0f64..3.0) {
        let small = g.metric_ball(0, r1, false).unwrap();
        let large = g.metric_ball(0, r1 + dr, false).unwrap();
        prop_assert!(small.is_subset(&large));
        prop_assert!(g.metric_ball(0, r1, false).unwrap().is_subset(&g.metric_ball(0, r1, true).unwrap()));
    }

    #[test]
    fn split_reconstructs_exactly(u in prop::collection::vec(0.0f64..=1.0, 1..40), a in 0.01f64..0.99) {
        let (u1, u2) = split_potentials(&u, a).unwrap();
        for k in 0..u.len() {
            prop_assert!((a * u1[k] + (1.0 - a) * u2[k] - u[k]).abs() <= 4.0 * f64::EPSILON);
            prop_assert!((0.0..=1.0).contains(&u1[k]));
        }
    }

    #[test]
    fn graph_files_round_trip(g in graph(10)) {
        let back = WeightedGraphSpace::from_json(&g.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.to_file_format(), g.to_file_format());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn path_capacity_is_series_formula(g in path(40)) {
        let n = g.vertex_count();
        let k = Condenser::new(&g, VertexSet::singleton(0), (0..n - 1).collect()).unwrap();
        let c: Vec<f64> = g.edges().iter().map(|e| e.conductance).collect();
        prop_assert!(rel(capacity(&g, &k).unwrap().value, series_capacity(&c, g.p()).unwrap()) < 1e-9);
    }

    #[test]
    fn path_identity_is_exact_and_composes(g in path(30)) {
        let n = g.vertex_count();
        let p = g.p();
        let k = Condenser::new(&g, VertexSet::singleton(0), (0..n - 1).collect()).unwrap();
        let base = capacity(&g, &k).unwrap();
        let levels: Vec<f64> = achieved_levels(&base.potential.values, k.outer()).into_iter().filter(|&x| x > 0.0).collect();
        let mut resistance = Vec::new();
        for w in levels.windows(2) {
            let r = verify_identity(&g, &k, w[0], w[1], false, true).unwrap();
            prop_assert!(r.relative_error < 1e-8, "{:?}", r);
            resistance.push(r.measured.powf(1.0 / (1.0 - p)));
        }
        // nested bands add like resistances
        let (lo, hi) = (levels[0], *levels.last().unwrap());
        if levels.len() > 1 {
            let whole = verify_identity(&g, &k, lo, hi, false, true).unwrap().measured.powf(1.0 / (1.0 - p));
            prop_assert!(rel(resistance.iter().sum::<f64>(), whole) < 1e-8);
        }
    }

    #[test]
    fn green_routes_agree_and_truncations_carry_unit_mass(g in path(30)) {
        let n = g.vertex_count();
        let omega: VertexSet = (0..n - 1).collect();
        let cap = green_capacitary(&g, &omega, 0).unwrap();
        let delta = green_delta(&g, &omega, 0).unwrap();
        let scale = delta.pole_value;
        for (a, b) in cap.values().iter().zip(delta.values()) {
            prop_assert!((a - b).abs() <= 1e-8 * scale.max(1.0));
        }
        for k in achieved_levels(delta.values(), &omega).into_iter().filter(|&k| k > 0.0) {
            let truncated: Vec<f64> = delta.values().iter().map(|x| x.min(k)).collect();
            prop_assert!(rel(energy(&g, &truncated), k) < 1e-7);
        }
    }
}

#[test]
fn weak_identity_on_general_graphs_with_several_charges() {
    let edges = vec![
        Edge { i: 0, j: 1, length: 1.0, conductance: 1.0 },
        Edge { i: 1, j: 2, length: 1.0, conductance: 2.0 },
        Edge { i: 0, j: 2, length: 1.0, conductance: 0.5 },
        Edge { i: 2, j: 3, length: 1.0, conductance: 1.5 },
        Edge { i: 3, j: 4, length: 1.0, conductance: 1.0 },
    ];
    let g = WeightedGraphSpace::from_parts(2.5, vec![1.0; 5], edges, None).unwrap();
    let charges = BTreeMap::from([(0, 1.0), (2, 0.5)]);
    let omega: VertexSet = (0..4).collect();
    let u = pcap::green::charged_field(&g, &omega, &charges, Default::default()).unwrap();
    let test = [0.3, -1.0, 2.0, 0.7, 0.0];
    let lhs = penergy::weak_form(&g, &u.values, &test);
    assert!((lhs - (0.3 + 0.5 * 2.0)).abs() < 1e-9);
}
