mod common;

use maxplus_core::corpus::{comb, comb_a, half_line, parse_grid_label, star_tree, z_line, MetricTemplate};
use maxplus_core::{
    graph_metric, greatest_nu, horofunction_limit, inf_representation_check, is_distance_like,
    mat_mul, ExtReal, HorofunctionWindow, MetricError, MpVector, WeightedGraph,
};
use proptest::prelude::*;
use rand::Rng;

fn tree(rng: &mut impl Rng, n: usize) -> WeightedGraph {
    WeightedGraph {
        nodes: (0..n).map(|i| format!("v{i}")).collect(),
        edges: (1..n).map(|k| (format!("v{}", rng.gen_range(0..k)), format!("v{k}"), 1.0)).collect(),
    }
}

fn bfs(g: &WeightedGraph, from: usize) -> Vec<f64> {
    let n = g.nodes.len();
    let ix = |l: &str| g.nodes.iter().position(|x| x == l).unwrap();
    let mut adj = vec![Vec::new(); n];
    for (a, b, _) in &g.edges {
        adj[ix(a)].push(ix(b));
        adj[ix(b)].push(ix(a));
    }
    let mut dist = vec![f64::INFINITY; n];
    dist[from] = 0.0;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if dist[y].is_infinite() {
                dist[y] = dist[x] + 1.0;
                queue.push_back(y);
            }
        }
    }
    dist
}

fn ray_horofunction(t: &MetricTemplate, name: &str) -> HorofunctionWindow {
    let ray = t.ray(name).unwrap();
    horofunction_limit(&t.metric, name, &t.window, &ray.states, 1e-9).unwrap()
}

fn on_window(t: &MetricTemplate, f: impl Fn(usize) -> f64) -> Vec<f64> {
    t.window.iter().map(|&x| f(x)).collect()
}

#[test]
fn small_graphs() {
    let path = WeightedGraph {
        nodes: vec!["0".into(), "1".into(), "2".into()],
        edges: vec![("0".into(), "1".into(), 1.0), ("1".into(), "2".into(), 1.0)],
    };
    let m = graph_metric(&path, "0", 1e-9).unwrap();
    assert_eq!(m.d(0, 2), 2.0);
    let star = star_tree(3, 1).unwrap();
    let st = star.metric.states();
    let leaves = ["a1", "b1", "c1"].map(|l| st.index_of(l).unwrap());
    for &x in &leaves {
        for &y in &leaves {
            assert_eq!(star.metric.d(x, y), if x == y { 0.0 } else { 2.0 });
        }
    }
}

#[test]
fn distance_to_points_is_distance_like() {
    let t = half_line(30).unwrap();
    let y0 = t.metric.states().index_of("5").unwrap();
    let f = on_window(&t, |x| t.metric.d(x, y0));
    let r = is_distance_like(&t.metric, &t.window, &f, None, 0.0, 1e-9).unwrap();
    assert!(r.holds() && r.checked > 0);

    let t = star_tree(3, 20).unwrap();
    let st = t.metric.states();
    let (y0, y1) = (st.index_of("a4").unwrap(), st.index_of("b7").unwrap());
    let f = on_window(&t, |x| (t.metric.d(x, y0) - 2.0).min(t.metric.d(x, y1) - 2.0));
    let r = is_distance_like(&t.metric, &t.window, &f, None, 0.0, 1e-9).unwrap();
    assert!(r.holds(), "{:?}", r.violations.first());
}

#[test]
fn unequal_point_constants_break_distance_likeness() {
    // below the larger constant only one ball is present
    let t = star_tree(3, 20).unwrap();
    let st = t.metric.states();
    let (y0, y1) = (st.index_of("a4").unwrap(), st.index_of("b7").unwrap());
    let f = on_window(&t, |x| (t.metric.d(x, y0) + 1.0).min(t.metric.d(x, y1) - 2.0));
    let r = is_distance_like(&t.metric, &t.window, &f, None, 0.0, 1e-9).unwrap();
    let v = r.violations.iter().find(|v| v.x == y0 && v.t == -2.0).unwrap();
    assert_eq!((v.expected, v.found), (3.0, 11.0));
}

#[test]
fn non_lipschitz_functions_are_rejected() {
    let t = half_line(20).unwrap();
    let f = on_window(&t, |x| 2.0 * t.metric.d(x, t.metric.basepoint()));
    assert!(!is_distance_like(&t.metric, &t.window, &f, None, 0.0, 1e-9).unwrap().holds());
}

#[test]
fn line_and_comb_rays() {
    let t = z_line(20).unwrap();
    let minus = ray_horofunction(&t, "minus");
    let st = t.metric.states();
    for (k, &x) in t.window.iter().enumerate() {
        let label: f64 = st.label(x).parse().unwrap();
        assert_eq!(minus.h.get(k).value(), label);
    }

    let t = comb(6).unwrap();
    let st = t.metric.states();
    for n in 0..=6 {
        let h = ray_horofunction(&t, &format!("a{n}"));
        for (k, &x) in t.window.iter().enumerate() {
            let (px, py) = parse_grid_label(st.label(x)).unwrap();
            assert_eq!(h.h.get(k).value(), -comb_a(n, px, py), "a{n} at {}", st.label(x));
        }
    }
}

#[test]
fn horofunctions_are_lipschitz_and_distance_like() {
    for t in [half_line(20).unwrap(), z_line(15).unwrap(), star_tree(3, 12).unwrap(), comb(6).unwrap()] {
        for ray in &t.rays {
            let h = ray_horofunction(&t, &ray.name);
            assert!(h.lipschitz_excess(&t.metric) <= 1e-9, "{} {}", t.name, ray.name);
            let f: Vec<f64> = h.h.iter().map(|v| v.value()).collect();
            let r = is_distance_like(&t.metric, &t.window, &f, None, 0.0, 1e-9).unwrap();
            assert!(r.holds(), "{} {}: {:?}", t.name, ray.name, r.violations.first());
        }
    }
}

#[test]
fn line_representation_and_perturbation() {
    let t = z_line(20).unwrap();
    let points = [ray_horofunction(&t, "plus"), ray_horofunction(&t, "minus")];
    let st = t.metric.states();
    let f: MpVector = t
        .window
        .iter()
        .map(|&x| {
            let v: f64 = st.label(x).parse().unwrap();
            ExtReal::real((1.0 - v).min(v))
        })
        .collect();
    let nu = [("plus".to_string(), 1.0), ("minus".to_string(), 0.0)].into();
    assert!(inf_representation_check(&f, &points, &nu, 1e-9).unwrap().holds());
    let nu = [("plus".to_string(), 1.25), ("minus".to_string(), 0.0)].into();
    assert!(!inf_representation_check(&f, &points, &nu, 1e-9).unwrap().holds());
}

#[test]
fn greatest_nu_of_a_busemann_function() {
    let t = z_line(20).unwrap();
    let family = [ray_horofunction(&t, "plus"), ray_horofunction(&t, "minus")];
    let st = t.metric.states();
    let plus: MpVector = (0..t.metric.n()).map(|x| ExtReal::real(-st.label(x).parse::<f64>().unwrap())).collect();
    let nu = greatest_nu(&t.metric, &plus, &family, Vec::new(), 1e-9).unwrap();
    assert_eq!(nu["plus"], 0.0);
    assert_eq!(nu["minus"], f64::INFINITY);

    let twice = [family[0].clone(), HorofunctionWindow { name: "again".into(), ..family[0].clone() }];
    let nu = greatest_nu(&t.metric, &plus, &twice, Vec::new(), 1e-9).unwrap();
    assert_eq!((nu["plus"], nu["again"]), (0.0, 0.0));
}

#[test]
fn distance_to_a_point_has_no_busemann_support() {
    let t = half_line(20).unwrap();
    let family = [ray_horofunction(&t, "ray")];
    let f: MpVector = (0..t.metric.n()).map(|x| ExtReal::real(t.metric.d(x, t.metric.basepoint()))).collect();
    let nu = greatest_nu(&t.metric, &f, &family, Vec::new(), 1e-9).unwrap();
    assert_eq!(nu["ray"], f64::INFINITY);
    let window_f = f.restrict(&t.window);
    assert_eq!(
        inf_representation_check(&window_f, &family, &nu, 1e-9).unwrap_err(),
        MetricError::EmptySupport
    );
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn tree_distances_match_bfs(seed in any::<u64>(), n in 1usize..24) {
        let mut rng = common::rng(seed);
        let g = tree(&mut rng, n);
        let m = graph_metric(&g, "v0", 1e-9).unwrap();
        let a = m.to_kernel();
        prop_assert_eq!(mat_mul(&a, &a).unwrap(), a.clone());
        for x in 0..n {
            let oracle = bfs(&g, x);
            let x_label = &g.nodes[x];
            let xi = m.states().index_of(x_label).unwrap();
            for (y, &d) in oracle.iter().enumerate() {
                let yi = m.states().index_of(&g.nodes[y]).unwrap();
                prop_assert_eq!(m.d(xi, yi), d);
            }
        }
    }

    #[test]
    fn point_minima_are_distance_like(seed in any::<u64>(), n in 2usize..20, k in 1usize..4) {
        let mut rng = common::rng(seed);
        let g = tree(&mut rng, n);
        let m = graph_metric(&g, "v0", 1e-9).unwrap();
        let c = rng.gen_range(-4..=4) as f64;
        let centres: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        let window: Vec<usize> = (0..n).collect();
        let f: Vec<f64> = window
            .iter()
            .map(|&x| centres.iter().map(|&y| m.d(x, y) + c).fold(f64::INFINITY, f64::min))
            .collect();
        let r = is_distance_like(&m, &window, &f, None, 0.0, 1e-9).unwrap();
        prop_assert!(r.holds(), "{:?}", r.violations.first());
    }
}
