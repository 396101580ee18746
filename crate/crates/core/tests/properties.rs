mod common;

use hyplab_core::constructions::bg::{Bg, BgVariant};
use hyplab_core::constructions::bmpp::Bmpp;
use hyplab_core::constructions::br::Br;
use hyplab_core::constructions::vfhc::Vfhc;
use hyplab_core::constructions::Params;
use hyplab_core::criteria::{check_shift_general, check_shift_upper, GrowthFloor, Verdict};
use hyplab_core::densities::{
    banach_density_at, count, matrix_density_profile, natural_density_profile, Cesaro, Mode, Value,
};
use hyplab_core::hvector::{build_vector, conjugate_distance, verify_orbit, weighted_distance, TargetSchedule};
use hyplab_core::index_sets::{merge_difference, merge_intersection, merge_union};
use hyplab_core::shift_ops::{
    backward_apply, conjugate_inverse, conjugate_to_unweighted, forward_apply_weighted,
};
use hyplab_core::{IndexSet, Scalar, Space, TruncatedVector, WeightSequence};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config() -> Config {
    Config { cases: 128, rng_seed: RngSeed::Fixed(common::SEED), failure_persistence: None, ..Config::default() }
}

fn scalar() -> impl Strategy<Value = Scalar> {
    (-30i64..=30, 1i64..=9, -4i64..=4).prop_map(|(n, d, e)| Scalar::from_fraction(BigInt::from(n), BigInt::from(d), e))
}

fn nonzero() -> impl Strategy<Value = Scalar> {
    scalar().prop_filter("nonzero", |s| !s.is_zero())
}

fn weights() -> impl Strategy<Value = WeightSequence> {
    prop::collection::vec(nonzero(), 90).prop_map(|ws| {
        WeightSequence::from_weights("w", move |k| ws[(k as usize - 1) % ws.len()].clone(), 90, None)
    })
}

fn space() -> impl Strategy<Value = Space> {
    prop_oneof![Just(Space::C0), Just(Space::Lp(1)), Just(Space::Lp(2))]
}

fn vector() -> impl Strategy<Value = TruncatedVector> {
    (space(), prop::collection::vec((0u64..40, scalar()), 0..12))
        .prop_map(|(s, e)| TruncatedVector::from_entries(s, e))
}

fn set(horizon: u64) -> impl Strategy<Value = (IndexSet, Vec<u64>)> {
    prop::collection::btree_set(0..=horizon, 0..(horizon as usize / 2)).prop_map(|s| {
        let v: Vec<u64> = s.into_iter().collect();
        (IndexSet::finite("s", v.clone()), v)
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn shift_semigroup(w in weights(), x in vector(), a in 0u64..12, b in 0u64..12) {
        prop_assert_eq!(backward_apply(&w, &backward_apply(&w, &x, b), a), backward_apply(&w, &x, a + b));
    }

    #[test]
    fn conjugacy_square(w in weights(), x in vector(), n in 0u64..8) {
        let one = WeightSequence::unweighted();
        let lhs = backward_apply(&w, &conjugate_to_unweighted(&w, &x).unwrap(), n);
        let rhs = conjugate_to_unweighted(&w, &backward_apply(&one, &x, n)).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(conjugate_inverse(&w, &conjugate_to_unweighted(&w, &x).unwrap()).unwrap(), x);
    }

    #[test]
    fn forward_right_inverse(w in weights(), y in vector(), n in 0u64..40) {
        prop_assert_eq!(backward_apply(&w, &forward_apply_weighted(&w, &y, n), n), y);
    }

    #[test]
    fn cesaro_reduces_to_natural((a, _) in set(300), hs in prop::collection::btree_set(0u64..300, 1..5)) {
        let hs: Vec<u64> = hs.into_iter().collect();
        let nat = natural_density_profile(&a, &hs, Mode::Upper).unwrap();
        let ces = matrix_density_profile(&a, &Cesaro, &hs).unwrap();
        prop_assert_eq!(nat.values, ces.values);
    }

    #[test]
    fn banach_dominates_natural((a, _) in set(500), n in 0u64..200, m_max in 0u64..300) {
        let banach = banach_density_at(&a, n, m_max);
        let natural = BigRational::new(count(&a, n).into(), (n + 1).into());
        prop_assert!(banach >= natural);
        prop_assert!(Value::Exact(banach) <= Value::ratio(1, 1));
    }

    #[test]
    fn profile_running_extrema((a, _) in set(300), hs in prop::collection::btree_set(0u64..300, 1..8)) {
        let hs: Vec<u64> = hs.into_iter().collect();
        let p = natural_density_profile(&a, &hs, Mode::Lower).unwrap();
        for i in 0..hs.len() {
            prop_assert!(p.running_inf[i] <= p.values[i] && p.values[i] <= p.running_sup[i]);
            prop_assert!(p.values[i] >= Value::zero() && p.values[i] <= Value::ratio(1, 1));
        }
    }

    #[test]
    fn set_algebra_matches_merges((a, av) in set(200), (b, bv) in set(200), k in 0u64..50) {
        prop_assert_eq!(a.union(&b).enumerate_up_to(200), merge_union(&av, &bv));
        prop_assert_eq!(a.intersection(&b).enumerate_up_to(200), merge_intersection(&av, &bv));
        prop_assert_eq!(a.difference(&b).enumerate_up_to(200), merge_difference(&av, &bv));
        let shifted: Vec<u64> = av.iter().filter(|&&x| x >= k).map(|x| x - k).collect();
        prop_assert_eq!(a.shift_left(k).enumerate_up_to(200), shifted);
        for n in 0..=200 {
            prop_assert_eq!(a.union(&b).contains_u64(n), av.contains(&n) || bv.contains(&n));
        }
    }

    #[test]
    fn shift_upper_monotone_in_horizon((a, _) in set(120), m in 1i64..200, h in 20u64..120) {
        let a = a.difference(&IndexSet::range(0, Some(0)));
        let w = WeightSequence::geometric(Scalar::from(2));
        let floor = GrowthFloor::new(0, Scalar::one());
        let big = check_shift_upper(&w, &a, 1, &Scalar::from(m), 120, &floor).unwrap();
        let small = check_shift_upper(&w, &a, 1, &Scalar::from(m), h, &floor).unwrap();
        if big.condition("pairwise").unwrap().violations == 0 {
            prop_assert_eq!(small.condition("pairwise").unwrap().violations, 0);
        }
    }

    #[test]
    fn strengthened_pairwise_implies_plain((a, _) in set(100), m in 1i64..2000) {
        // The strengthened condition over j ≤ p is the single-family general check.
        let a = a.difference(&IndexSet::range(0, Some(1)));
        let w = WeightSequence::geometric(Scalar::from_fraction(BigInt::from(3), BigInt::from(2), 0));
        let floor = GrowthFloor::new(0, Scalar::one());
        let general = check_shift_general(&w, std::slice::from_ref(&a), &[Scalar::from(m)], 100, &floor).unwrap();
        let upper = check_shift_upper(&w, &a, 1, &Scalar::from(m), 100, &floor).unwrap();
        if general.condition("pairwise").unwrap().violations == 0 {
            prop_assert_eq!(upper.condition("pairwise").unwrap().violations, 0);
        }
        prop_assert_ne!(general.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn hvector_frames_agree(gaps in prop::collection::vec((4u64..30, 1u64..=3), 1..12)) {
        let mut fams: Vec<Vec<u64>> = vec![Vec::new(); 3];
        let mut n = 0u64;
        for (g, p) in gaps {
            n += g;
            fams[p as usize - 1].push(n);
        }
        let sched = TargetSchedule::all_ones(fams.into_iter().map(|v| IndexSet::finite("A", v)).collect());
        prop_assert!(sched.check_invariants(400).is_ok());
        let w = WeightSequence::geometric(Scalar::from(2));
        let x = build_vector(&sched, &w, 400).unwrap();
        let xt = conjugate_inverse(&w, &x).unwrap();
        for q in 1..=3 {
            for m in sched.family(q).enumerate_up_to(400) {
                let y = sched.target(q);
                prop_assert_eq!(conjugate_distance(&w, &xt, y, m), weighted_distance(&w, &x, y, m).unwrap());
            }
        }
        let r1 = verify_orbit(&sched, &w, &x, 200).unwrap();
        let r2 = verify_orbit(&sched, &w, &x, 400).unwrap();
        prop_assert!(r2.details["slack"] == r1.details["slack"]);
    }
}

#[test]
fn construction_weights_have_declared_sup() {
    let desk = Params::desk();
    let seqs = [
        Bmpp::new(desk).unwrap().weights(),
        Br::new(desk).unwrap().weights(),
        Bg::unchecked(desk, BgVariant::Literal).unwrap().weights(),
        Bg::unchecked(desk, BgVariant::UnitOffset).unwrap().weights(),
        Vfhc::desk().weights(),
    ];
    for w in &seqs {
        assert_eq!(w.sup_bound_violation(20_000), None, "{}", w.label());
        assert!(w.is_c0_operator());
    }
}
