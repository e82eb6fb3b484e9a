use parley_evalstats::likeness::ConversationSummary;
use parley_evalstats::{
    cohen_kappa, contingency_table, holm_correct, human_likeness, AnnotatedResponse, CriterionRatings, Exact,
    MotiveRatings, Speaker,
};
use proptest::prelude::*;

#[test]
fn holm_hand_example() {
    let out = holm_correct(&[0.01f64, 0.04, 0.03]);
    for (a, b) in out.iter().zip([0.03, 0.06, 0.06]) {
        assert!((a - b).abs() < 1e-15f64);
    }
    let exact = holm_correct(&[Exact::new(1, 100), Exact::new(4, 100), Exact::new(3, 100)]);
    assert_eq!(exact, vec![Exact::new(3, 100), Exact::new(6, 100), Exact::new(6, 100)]);
    assert_eq!(holm_correct(&[0.2f64]), vec![0.2]);
}

#[test]
fn kappa_constant_rater() {
    // rater A uniform over 5 categories, rater B always 3
    let a: Vec<u8> = (0..50).map(|i| (i % 5) as u8 + 1).collect();
    let b = vec![3u8; 50];
    let t = contingency_table(&a, &b, &[1, 2, 3, 4, 5]).unwrap();
    assert_eq!(cohen_kappa::<Exact>(&t).unwrap(), Exact::from_integer(0));
}

fn rec(speaker: Speaker, r: [u8; 4]) -> AnnotatedResponse {
    AnnotatedResponse {
        conversation_id: "c".into(),
        turn_index: 0,
        speaker,
        criteria: CriterionRatings {
            brevity: r[0],
            tone: r[1],
            specificity: r[2],
            coherence: r[3],
        },
        motives: MotiveRatings {
            informative: 0.0,
            assistive: 0.0,
            expressive: 0.0,
            person_directed: 0.0,
        },
    }
}

fn ratings() -> impl Strategy<Value = [u8; 4]> {
    prop::array::uniform4(1u8..=5)
}

proptest! {
    #[test]
    fn holm_permutation_equivariant(ps in prop::collection::vec(0.0f64..=1.0, 1..12), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..ps.len()).collect();
        // Fisher-Yates from a simple LCG so the permutation depends only on seed
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted: Vec<f64> = perm.iter().map(|&i| ps[i]).collect();
        let a = holm_correct(&ps);
        let b = holm_correct(&permuted);
        for (k, &i) in perm.iter().enumerate() {
            prop_assert_eq!(b[k], a[i]);
        }
    }

    #[test]
    fn holm_dominates_and_is_bounded(ps in prop::collection::vec(0.0f64..=1.0, 1..12)) {
        for (p, q) in ps.iter().zip(holm_correct(&ps)) {
            prop_assert!(q >= *p && q <= 1.0);
        }
    }

    #[test]
    fn holm_monotone_and_saturated_fixed_points(
        raw in prop::collection::vec(0.0f64..=1.0, 1..12),
        bits in prop::collection::vec(any::<bool>(), 1..12),
    ) {
        let mut sorted = raw.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let once = holm_correct(&sorted);
        prop_assert!(once.windows(2).all(|w| w[0] <= w[1]));
        // corrected values already at 0 or 1 are left alone
        let saturated: Vec<f64> = bits.iter().map(|&b| f64::from(u8::from(b))).collect();
        prop_assert_eq!(holm_correct(&saturated), saturated.clone());
        prop_assert_eq!(holm_correct(&holm_correct(&saturated)), saturated);
    }

    #[test]
    fn kappa_relabel_invariant(
        pairs in prop::collection::vec((1u8..=5, 1u8..=5), 1..60),
        perm in Just([1u8, 2, 3, 4, 5]).prop_shuffle(),
    ) {
        let cats = [1u8, 2, 3, 4, 5];
        let (a, b): (Vec<u8>, Vec<u8>) = pairs.iter().copied().unzip();
        let relabel = |v: &[u8]| v.iter().map(|&x| perm[x as usize - 1]).collect::<Vec<u8>>();
        let k1 = cohen_kappa::<Exact>(&contingency_table(&a, &b, &cats).unwrap()).unwrap();
        let k2 = cohen_kappa::<Exact>(&contingency_table(&relabel(&a), &relabel(&b), &cats).unwrap()).unwrap();
        prop_assert_eq!(k1, k2);
        prop_assert!(k1 >= Exact::from_integer(-1) && k1 <= Exact::from_integer(1));
    }

    #[test]
    fn likeness_bounds(agent in prop::collection::vec(ratings(), 1..8), human in prop::collection::vec(ratings(), 1..8)) {
        let mut conv: Vec<_> = agent.iter().map(|r| rec(Speaker::Agent, *r)).collect();
        conv.extend(human.iter().map(|r| rec(Speaker::Human, *r)));
        let s: ConversationSummary<Exact> = human_likeness(&conv).unwrap();
        for d in s.d {
            prop_assert!(d >= Exact::from_integer(0) && d <= Exact::from_integer(4));
        }
        prop_assert!(s.aggregate <= Exact::from_integer(16));
        prop_assert_eq!(s.aggregate, s.d.iter().sum::<Exact>());
    }
}
