mod common;

use maxplus_core::geodesics::{min_parameter_at, GeodesicError};
use maxplus_core::{
    finite_martin_space, is_superharmonic, kleene_plus, kleene_star, mat_mul, mat_vec, min_parameter_kernel,
    min_parameter_u, mu_min, rebase, represents, witness_geodesic, ExtReal, Kernel, MeasureDomain, MpVector,
    WitnessConfig,
};
use proptest::prelude::*;
use rand::Rng;

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn star_is_idempotent_and_absorbs(seed in any::<u64>(), n in 1usize..8, density in 0.1f64..0.8) {
        let mut rng = common::rng(seed);
        let a = common::random_kernel(&mut rng, n, density);
        let star = kleene_star(&a).unwrap();
        let plus = kleene_plus(&a).unwrap();
        prop_assert_eq!(mat_mul(&star, &star).unwrap(), star.clone());
        prop_assert_eq!(mat_mul(&a, &star).unwrap(), plus.clone());
        prop_assert_eq!(mat_mul(&star, &a).unwrap(), plus.clone());
        prop_assert!(a.leq(&plus));
        for i in 0..n {
            prop_assert!(star.get(i, i) >= ExtReal::ZERO);
        }
    }

    #[test]
    fn positive_cycles_are_reported(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = common::rng(seed);
        let mut a = common::random_kernel(&mut rng, n, 0.4);
        let i = rng.gen_range(0..n);
        a.set(i, i, ExtReal::real(0.125));
        prop_assert!(kleene_star(&a).is_err());
    }

    #[test]
    fn mat_vec_is_monotone(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = common::rng(seed);
        let a = common::random_kernel(&mut rng, n, 0.5);
        let u: MpVector = (0..n).map(|_| ExtReal::real(common::dyadic(&mut rng))).collect();
        let v = u.oplus(&u.shift(0.25));
        let (au, av) = (mat_vec(&a, &u).unwrap(), mat_vec(&a, &v).unwrap());
        for i in 0..n {
            prop_assert!(au.get(i) <= av.get(i));
        }
    }

    #[test]
    fn measures_are_ordered(seed in any::<u64>(), zero in any::<bool>()) {
        let mut rng = common::rng(seed);
        let inst = common::random_instance(&mut rng, 6, zero);
        let u = common::random_combination(&mut rng, &inst);
        prop_assert!(is_superharmonic(inst.a(), &u, 1e-9).unwrap().holds());
        let set = finite_martin_space(&inst);
        let mm = mu_min(&inst, &u, &set, MeasureDomain::FiniteMartinSpace).unwrap();
        for name in set.names() {
            let (lo, mid, hi) = (mm.m_u.get(name), mm.mumin.get(name), mm.mumax.get(name));
            prop_assert!(lo <= mid && mid <= hi, "{} {} {} at {}", lo, mid, hi, name);
            prop_assert!(mid.is_neg_inf() || mid == hi);
        }
        prop_assert!(represents(&set, &mm.mumax, &u, 1e-9).unwrap().holds());
        prop_assert!(represents(&set, &mm.mumin, &u, 1e-9).unwrap().holds());
        for p in 0..set.len() {
            prop_assert!(mm.order.leq(p, p));
            prop_assert_eq!(mm.order.is_maximal(p), mm.order.dominators(p).is_empty());
        }
    }

    #[test]
    fn constants_shift_measures(seed in any::<u64>(), c in -16i32..16) {
        let c = c as f64 / 8.0;
        let mut rng = common::rng(seed);
        let inst = common::random_instance(&mut rng, 6, true);
        let u = common::random_combination(&mut rng, &inst);
        let set = finite_martin_space(&inst);
        let base = mu_min(&inst, &u, &set, MeasureDomain::FiniteMartinSpace).unwrap();
        let moved = mu_min(&inst, &u.shift(c), &set, MeasureDomain::FiniteMartinSpace).unwrap();
        for name in set.names() {
            prop_assert_eq!(moved.mumax.get(name), base.mumax.get(name) + ExtReal::real(c));
            prop_assert_eq!(moved.mumin.get(name), base.mumin.get(name) + ExtReal::real(c));
        }
        prop_assert_eq!(moved.order.order_pairs(), base.order.order_pairs());
    }

    #[test]
    fn prefixes_need_smaller_parameters(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let zero = rng.gen_bool(0.5);
        let inst = common::random_instance(&mut rng, 6, zero);
        let u = common::random_combination(&mut rng, &inst);
        let start = rng.gen_range(0..inst.n());
        let path = common::random_walk(&mut rng, inst.a(), start, 8);
        let full = min_parameter_kernel(&inst, &path).unwrap();
        for k in 1..=path.len() {
            prop_assert!(min_parameter_kernel(&inst, &path[..k]).unwrap() <= full);
        }
        match min_parameter_u(inst.a(), &u, &path) {
            Ok(full) => {
                for k in 1..=path.len() {
                    prop_assert!(min_parameter_u(inst.a(), &u, &path[..k]).unwrap() <= full);
                }
            }
            Err(GeodesicError::Unbounded { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn concatenations_stay_almost_geodesic(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::random_instance(&mut rng, 6, true);
        let first = common::random_walk(&mut rng, inst.a(), 0, 5);
        let second = common::random_walk(&mut rng, inst.a(), *first.last().unwrap(), 5);
        let joined: Vec<usize> = first.iter().chain(&second[1..]).copied().collect();
        let beta = min_parameter_kernel(&inst, &joined).unwrap();
        prop_assert!(beta.is_finite());
    }

    #[test]
    fn rebased_parameter_is_valid(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let zero = rng.gen_bool(0.5);
        let inst = common::random_instance(&mut rng, 6, zero);
        let start = rng.gen_range(0..inst.n());
        let path = common::random_walk(&mut rng, inst.a(), start, 8);
        let beta = min_parameter_kernel(&inst, &path).unwrap();
        prop_assert_eq!(rebase(&inst, &path, beta, inst.basepoint()).unwrap(), beta);
        for j in 0..inst.n() {
            if let Ok(moved) = rebase(&inst, &path, beta, j) {
                let direct = min_parameter_at(inst.a(), inst.a_star(), j, &path).unwrap();
                prop_assert!(moved.residual(direct) >= -1e-9);
            }
        }
    }

    #[test]
    fn witness_paths_meet_their_parameter(seed in any::<u64>(), delta0 in 0.01f64..1.0) {
        let mut rng = common::rng(seed);
        let inst = common::random_instance(&mut rng, 6, true);
        let u = common::random_combination(&mut rng, &inst);
        let j0 = (0..inst.n()).find(|&j| !u.get(j).is_neg_inf()).unwrap();
        let cfg = WitnessConfig { j0, delta0, eps0: 0.5, horizon: 40, visit_order: None };
        let w = match witness_geodesic(&inst, &u, &cfg) {
            Ok(w) => w,
            Err(GeodesicError::HorizonExhausted(w)) => *w,
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(w.guarantee_holds(), "beta {} over {}", w.beta, delta0);
        prop_assert_eq!(w.path[0], j0);
    }
}

#[test]
fn kernel_from_entries_rejects_unknown_labels() {
    let st = common::states(2);
    assert!(Kernel::from_entries(st, [("s0", "s9", ExtReal::ZERO)]).is_err());
}
