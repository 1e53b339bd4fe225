use proptest::prelude::*;
use spotmatch::text::{instance_confidence, levenshtein, text_disparity, CharConfidences, Transcription};
use spotmatch_testkit::dp_levenshtein;

fn word() -> impl Strategy<Value = String> {
    // small alphabet so that matches and near matches are common
    proptest::string::string_regex("[abcAB ]{0,25}").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn agrees_with_table_oracle(a in word(), b in word()) {
        let (ta, tb) = (Transcription::from(a.as_str()), Transcription::from(b.as_str()));
        prop_assert_eq!(levenshtein(&ta, &tb), dp_levenshtein(ta.chars(), tb.chars()));
    }

    #[test]
    fn metric_properties(a in word(), b in word(), c in word()) {
        let (a, b, c) = (Transcription::from(a.as_str()), Transcription::from(b.as_str()), Transcription::from(c.as_str()));
        let ab = levenshtein(&a, &b);
        prop_assert_eq!(ab, levenshtein(&b, &a));
        prop_assert_eq!(levenshtein(&a, &a), 0);
        prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
        prop_assert!(a.len().abs_diff(b.len()) <= ab);
        prop_assert!(ab <= a.len().max(b.len()));
    }

    #[test]
    fn disparity_range(a in word(), b in word()) {
        let (ta, tb) = (Transcription::from(a.as_str()), Transcription::from(b.as_str()));
        let d = text_disparity(&ta, &tb);
        prop_assert!((0.0..=1.0).contains(&d));
        if !(ta.is_empty() && tb.is_empty()) {
            prop_assert_eq!(d == 0.0, ta == tb);
        }
    }

    #[test]
    fn confidence_permutation_and_bounds(mut v in proptest::collection::vec(0.0f64..=1.0, 1..30), rot in 0usize..30) {
        let c = instance_confidence(&CharConfidences::new(v.clone()).unwrap()).unwrap();
        let lo = v.iter().copied().fold(f64::MAX, f64::min);
        let hi = v.iter().copied().fold(f64::MIN, f64::max);
        prop_assert!(c >= lo - 1e-12 && c <= hi + 1e-12);
        let r = rot % v.len();
        v.rotate_left(r);
        v.reverse();
        let c2 = instance_confidence(&CharConfidences::new(v).unwrap()).unwrap();
        prop_assert!((c - c2).abs() < 1e-12);
    }
}
