mod common;

use common::{arb_instance, cyclic3, pairs, stable_set, two_stable};
use forcematch_core::generators::gen_tight_balanced;
use forcematch_core::manipulation::naive_truncation;
use forcematch_core::oracle::{
    enumerate_stable, enumerate_stable_jobs, exhaust_w_profiles, is_unique_stable, is_unique_stable_by_search,
    some_blacklist_at_least, stable_by_full_scan, DEFAULT_MATCHING_LIMIT, DEFAULT_PROFILE_LIMIT,
};
use forcematch_core::{run, Error, Instance, Matching, Side};
use proptest::prelude::*;

const LIMIT: u64 = DEFAULT_MATCHING_LIMIT;

#[test]
fn two_stable_has_two() {
    let inst = two_stable();
    let all = enumerate_stable(&inst, LIMIT).unwrap();
    assert_eq!(all.len(), 2);
    assert_eq!(all, stable_set(&inst));
}

#[test]
fn empty_lists_give_the_empty_matching() {
    let inst = Instance::from_indices(&[&[], &[]], &[&[], &[], &[]]).unwrap();
    let all = enumerate_stable(&inst, LIMIT).unwrap();
    assert_eq!(all.into_iter().collect::<Vec<_>>(), vec![Matching::empty(2, 3)]);
}

#[test]
fn uniqueness_examples() {
    let inst = cyclic3();
    let diag = pairs(3, 3, &[(0, 0), (1, 1), (2, 2)]);
    assert!(is_unique_stable(&inst, &diag, LIMIT).unwrap());
    assert!(is_unique_stable_by_search(&inst, &diag, LIMIT).unwrap());

    let two = two_stable();
    assert!(!is_unique_stable(&two, &run(&two, Side::Men), LIMIT).unwrap());

    let one = Instance::from_indices(&[&[0]], &[&[0]]).unwrap();
    assert!(is_unique_stable(&one, &pairs(1, 1, &[(0, 0)]), LIMIT).unwrap());
    assert!(!is_unique_stable(&one, &Matching::empty(1, 1), LIMIT).unwrap());
}

#[test]
fn limit_is_refused() {
    let (inst, _) = forcematch_core::generators::gen_random(8, 8, 1, false).unwrap();
    assert!(matches!(enumerate_stable(&inst, 10), Err(Error::OracleLimit { .. })));
    let t = gen_tight_balanced(4, &[3]).unwrap();
    let r = exhaust_w_profiles(t.instance.prefs_m(), &t.target, |_| true, 1000, 1);
    assert!(matches!(r, Err(Error::OracleLimit { .. })));
    let msg = r.unwrap_err().to_string();
    assert!(msg.contains("17850625"), "{msg}");
}

#[test]
fn exhaust_on_the_cyclic_three() {
    let t = gen_tight_balanced(3, &[2]).unwrap();
    let m = t.instance.prefs_m();
    for jobs in [1, 3] {
        let none = exhaust_w_profiles(m, &t.target, some_blacklist_at_least(2), DEFAULT_PROFILE_LIMIT, jobs).unwrap();
        assert_eq!(none, None);
        assert_eq!(exhaust_w_profiles(m, &t.target, |_| true, DEFAULT_PROFILE_LIMIT, jobs).unwrap(), None);
        // No woman can blacklist all three men and still be matched, so
        // the first hit in canonical order is the shortest profile.
        let first = exhaust_w_profiles(m, &t.target, some_blacklist_at_least(3), DEFAULT_PROFILE_LIMIT, jobs).unwrap();
        let naive = naive_truncation(&t.instance, &t.target).unwrap();
        assert_eq!(first, Some(naive.prefs_w));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn search_matches_definition(inst in arb_instance(4, 4), jobs in 1usize..4) {
        let reference = stable_set(&inst);
        prop_assert_eq!(&enumerate_stable(&inst, LIMIT).unwrap(), &reference);
        prop_assert_eq!(&enumerate_stable_jobs(&inst, LIMIT, jobs).unwrap(), &reference);
        prop_assert_eq!(&stable_by_full_scan(&inst).unwrap(), &reference);
        prop_assert!(reference.contains(&run(&inst, Side::Men)));
        prop_assert!(reference.contains(&run(&inst, Side::Women)));
        for mu in &reference {
            prop_assert_eq!(is_unique_stable(&inst, mu, LIMIT).unwrap(), reference.len() == 1);
        }
    }
}
