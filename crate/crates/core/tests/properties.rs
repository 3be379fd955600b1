use proptest::prelude::*;

use pslab::cylinder::CylinderSet;
use pslab::gps::{gps_defect, BmsMeasure};
use pslab::measure::{markov_ps, quasi_invariance_defect};
use pslab::potential::{cocycle_identity_defect, Cocycle, WeightedPotential, EXACT_TOL};
use pslab::word::{common_prefix_len, distance, Alphabet, BoundaryPoint, PrefixLen, ReducedWord};

const RANK: usize = 2;

fn alphabet() -> Alphabet {
    Alphabet::new(RANK).unwrap()
}

fn word(max: usize) -> impl Strategy<Value = ReducedWord> {
    prop::collection::vec(0u8..(2 * RANK as u8), 0..max).prop_map(ReducedWord::reduce)
}

fn point() -> impl Strategy<Value = BoundaryPoint> {
    (word(6), word(4)).prop_filter_map("not a reduced infinite word", |(h, c)| BoundaryPoint::new(h, c).ok())
}

fn weights() -> impl Strategy<Value = WeightedPotential> {
    prop::collection::vec(0.2f64..3.0, 2 * RANK).prop_map(|w| WeightedPotential::new(alphabet(), w).unwrap())
}

proptest! {
    #[test]
    fn prefix_metric_is_an_ultrametric(x in point(), y in point(), z in point()) {
        prop_assert_eq!(distance(&x, &y), distance(&y, &x));
        prop_assert_eq!(distance(&x, &y) == 0.0, x == y);
        prop_assert!(distance(&x, &z) <= distance(&x, &y).max(distance(&y, &z)));
    }

    #[test]
    fn canonical_form_is_idempotent(x in point()) {
        let again = BoundaryPoint::new(x.head().clone(), x.cycle().clone()).unwrap();
        prop_assert_eq!(&again, &x);
        // unrolling the cycle once denotes the same point
        let unrolled = BoundaryPoint::new(x.head().multiply(x.cycle()), x.cycle().clone()).unwrap();
        prop_assert_eq!(unrolled, x);
    }

    #[test]
    fn left_multiplication_is_a_group_action(x in point(), g in word(8), h in word(8)) {
        prop_assert_eq!(x.act(&ReducedWord::identity()), x.clone());
        prop_assert_eq!(x.act(&g).act(&h), x.act(&h.multiply(&g)));
        prop_assert_eq!(x.act(&g).act(&g.inverse()), x);
    }

    #[test]
    fn action_is_an_isometry_far_from_the_inverse(x in point(), y in point(), g in word(6)) {
        // g shifts prefixes that avoid g⁻¹ by exactly |g| letters
        let ginv = g.inverse();
        let avoid = |p: &BoundaryPoint| common_prefix_len(p, &ginv) == PrefixLen::Finite(0);
        prop_assume!(!g.is_identity() && avoid(&x) && avoid(&y) && x != y);
        let before = common_prefix_len(&x, &y).finite().unwrap();
        let after = common_prefix_len(&x.act(&g), &y.act(&g)).finite().unwrap();
        prop_assert_eq!(after, before + g.len());
    }

    #[test]
    fn words_form_a_group(a in word(8), b in word(8), c in word(8)) {
        prop_assert_eq!(a.multiply(&b).multiply(&c), a.multiply(&b.multiply(&c)));
        prop_assert!(a.multiply(&a.inverse()).is_identity());
    }

    #[test]
    fn cylinder_sets_complement(stems in prop::collection::vec(word(4), 0..5), g in word(4)) {
        let a = CylinderSet::from_stems(alphabet(), stems);
        prop_assert!(a.union(&a.complement()).is_whole());
        prop_assert!(a.is_disjoint(&a.complement()));
        prop_assert_eq!(a.canonical().canonical(), a.canonical());
        prop_assert_eq!(a.act(&g).act(&g.inverse()).canonical(), a.canonical());
    }

    #[test]
    fn cocycle_identity_is_exact(p in weights(), g1 in word(8), g2 in word(8), x in point()) {
        let sample = [(g1, g2, x)];
        prop_assert!(cocycle_identity_defect(&Cocycle::primal(&p), &sample) <= EXACT_TOL);
        prop_assert!(cocycle_identity_defect(&Cocycle::dual(&p), &sample) <= EXACT_TOL);
    }

    #[test]
    fn gps_identity_is_exact(p in weights(), g in word(8), x in point(), y in point()) {
        prop_assume!(x != y);
        prop_assert!(gps_defect(&p, &[(g, x, y)]).unwrap() <= EXACT_TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ps_measure_is_exactly_quasi_invariant(p in weights(), g in word(4)) {
        let mu = markov_ps(&p, 1e-13).unwrap();
        prop_assert!(mu.row_sum_defect() <= 1e-12);
        let d = quasi_invariance_defect(&mu, &Cocycle::primal(&p), &g, g.len() + 2).unwrap();
        prop_assert!(d <= 1e-9, "defect {d}");
    }

    #[test]
    fn bms_rectangles_are_invariant(p in weights(), g in word(3)) {
        let b = BmsMeasure::new(&p).unwrap();
        let d = pslab::gps::bms_invariance_defect(&b, &g, g.len() + 1).unwrap();
        prop_assert!(d <= 1e-9, "defect {d}");
    }
}
