mod common;

use std::collections::BTreeSet;

use common::{pairs, textbook_men_optimal, two_stable};
use forcematch_core::divorces::{
    blacklist_to_divorce, divorce_to_blacklist, one_divorce_strategy, simulate_with_divorces, Arbiter,
    DivorceStrategy,
};
use forcematch_core::generators::{gen_divorce_tight, gen_random, gen_tight_balanced};
use forcematch_core::manipulation::{manipulate_general, naive_truncation, SynthesisOptions};
use forcematch_core::{run_men, Instance, ManId, Matching, RunOptions, WomanId};

fn never(n: usize) -> Vec<DivorceStrategy> {
    vec![DivorceStrategy::Never; n]
}

/// Simulates a plan and checks the per-season promises: one divorce per
/// woman at most, and each divorcing woman ends the next season with her
/// target partner.
fn check_plan(inst: &Instance, mu: &Matching) -> usize {
    let plan = one_divorce_strategy(inst, mu).unwrap();
    assert!(plan.prefs_w.lists().iter().all(|l| l.blacklist_len() == 0));
    let with = inst.with_women(plan.prefs_w.clone()).unwrap();
    let (end, log) = simulate_with_divorces(&with, &plan.strategies, Arbiter::default()).unwrap();
    assert_eq!(end, *mu);
    let divorcers: Vec<WomanId> = log.divorces().map(|(w, _)| w).collect();
    let distinct: BTreeSet<WomanId> = divorcers.iter().copied().collect();
    assert_eq!(distinct.len(), divorcers.len());
    for (i, s) in log.seasons.iter().enumerate() {
        if let Some((w, _)) = s.divorce {
            let next = &log.seasons[i + 1].matching;
            assert_eq!(next.partner_of_woman(w), mu.partner_of_woman(w));
        }
    }
    log.divorce_count()
}

#[test]
fn never_divorcing_is_a_plain_run() {
    let inst = two_stable();
    let (end, log) = simulate_with_divorces(&inst, &never(2), Arbiter::default()).unwrap();
    let plain = run_men(&inst, RunOptions::traced());
    assert_eq!(end, plain.matching);
    assert_eq!(log.seasons.len(), 1);
    assert_eq!(log.seasons[0].trace, plain.trace.unwrap());
}

#[test]
fn scripted_divorce_on_two() {
    let inst = two_stable();
    let s = vec![DivorceStrategy::Scripted(vec![(1, ManId(0))]), DivorceStrategy::Never];
    let (end, log) = simulate_with_divorces(&inst, &s, Arbiter::default()).unwrap();
    assert_eq!(end, pairs(2, 2, &[(0, 1), (1, 0)]));
    assert_eq!(log.divorce_count(), 1);
    assert_eq!(log.seasons.len(), 2);
    assert!(log.to_string().contains("divorce: w0 x m0"));
}

#[test]
fn seasons_chain() {
    let (inst, mu) = gen_divorce_tight(5).unwrap();
    let plan = one_divorce_strategy(&inst, &mu).unwrap();
    let with = inst.with_women(plan.prefs_w).unwrap();
    let (_, log) = simulate_with_divorces(&with, &plan.strategies, Arbiter::default()).unwrap();
    for pair in log.seasons.windows(2) {
        let (w, m) = pair[0].divorce.unwrap();
        let mut start = pair[0].matching.clone();
        assert_eq!(start.unpair_woman(w), Some(m));
        // Everyone still held at the start of the season re-serenades on its
        // first night, and only the divorced man arrives somewhere new.
        let first = &pair[1].trace.nights[0];
        let held: BTreeSet<(ManId, WomanId)> = start.pairs().map(|(w, m)| (m, w)).collect();
        let night: BTreeSet<(ManId, WomanId)> = first.serenades.iter().copied().collect();
        assert!(held.is_subset(&night));
    }
    assert!(log.seasons.last().unwrap().divorce.is_none());
}

#[test]
fn target_already_men_optimal_needs_no_divorce() {
    let inst = two_stable();
    let mu = pairs(2, 2, &[(0, 0), (1, 1)]);
    assert_eq!(check_plan(&inst, &mu), 0);
}

#[test]
fn two_stable_other_matching_needs_one_divorce() {
    let inst = two_stable();
    let mu = pairs(2, 2, &[(0, 1), (1, 0)]);
    let plan = one_divorce_strategy(&inst, &mu).unwrap();
    let divorcing: Vec<usize> = plan
        .strategies
        .iter()
        .enumerate()
        .filter(|(_, s)| **s != DivorceStrategy::Never)
        .map(|(i, _)| i)
        .collect();
    assert_eq!(divorcing.len(), 1);
    assert_eq!(check_plan(&inst, &mu), 1);
}

#[test]
fn tight_family_needs_n_minus_one() {
    assert_eq!(check_plan(&gen_divorce_tight(1).unwrap().0, &gen_divorce_tight(1).unwrap().1), 0);
    for n in 2..=6 {
        let (inst, mu) = gen_divorce_tight(n).unwrap();
        assert_eq!(check_plan(&inst, &mu), n - 1, "n={n}");
    }
}

#[test]
fn random_plans_stay_within_n_minus_one() {
    for n in 1..=7 {
        for seed in 0..100 {
            let (inst, mu) = gen_random(n, n, seed, false).unwrap();
            let d = check_plan(&inst, &mu);
            assert!(d < n.max(1), "n={n} seed={seed}: {d} divorces");
        }
    }
}

#[test]
fn blacklists_become_divorces() {
    let t = gen_tight_balanced(3, &[2]).unwrap();
    let (p, s) = blacklist_to_divorce(&t.witness).unwrap();
    assert!(p.lists().iter().all(|l| l.blacklist_len() == 0));
    assert_eq!(p[0].ranking(), &[ManId(0), ManId(1), ManId(2)]);
    assert_eq!(s[0], DivorceStrategy::DivorceIfPartnerIn([ManId(1), ManId(2)].into()));
    assert_eq!(s[1], DivorceStrategy::Never);
    let (end, _) = simulate_with_divorces(&t.instance.with_women(p).unwrap(), &s, Arbiter::default()).unwrap();
    assert_eq!(end, t.target);

    let naive = naive_truncation(&t.instance, &t.target).unwrap();
    let (p, s) = blacklist_to_divorce(&naive.prefs_w).unwrap();
    let (end, _) = simulate_with_divorces(&t.instance.with_women(p).unwrap(), &s, Arbiter::default()).unwrap();
    assert_eq!(end, t.target);

    let empty = Instance::from_indices(&[&[0, 1], &[1, 0]], &[&[0, 1], &[1, 0]]).unwrap();
    let (p, s) = blacklist_to_divorce(empty.prefs_w()).unwrap();
    assert_eq!(&p, empty.prefs_w());
    assert_eq!(s, never(2));
}

#[test]
fn divorces_become_blacklists() {
    let inst = two_stable();
    let s = vec![DivorceStrategy::Scripted(vec![(1, ManId(0))]), DivorceStrategy::Never];
    let b = divorce_to_blacklist(&inst, inst.prefs_w(), &s).unwrap();
    assert_eq!(b[0].blacklist(), vec![ManId(0)]);
    assert_eq!(textbook_men_optimal(&inst.with_women(b).unwrap()), pairs(2, 2, &[(0, 1), (1, 0)]));
    let untouched = divorce_to_blacklist(&inst, inst.prefs_w(), &never(2)).unwrap();
    assert_eq!(&untouched, inst.prefs_w());
}

#[test]
fn round_trips_preserve_the_outcome() {
    for n in 2..=6 {
        for seed in 0..60 {
            let (inst, mu) = gen_random(n, n, seed, false).unwrap();
            let res = manipulate_general(&inst, &mu, SynthesisOptions::default()).unwrap();
            let (p, s) = blacklist_to_divorce(&res.prefs_w).unwrap();
            let (end, _) = simulate_with_divorces(&inst.with_women(p).unwrap(), &s, Arbiter::default()).unwrap();
            assert_eq!(end, mu);

            let plan = one_divorce_strategy(&inst, &mu).unwrap();
            let b = divorce_to_blacklist(&inst, &plan.prefs_w, &plan.strategies).unwrap();
            assert_eq!(textbook_men_optimal(&inst.with_women(b).unwrap()), mu, "n={n} seed={seed}");
        }
    }
}

#[test]
fn highest_index_arbiter() {
    // Both women want out after the first season; the arbiter decides order.
    let inst = Instance::from_indices(&[&[0, 1], &[1, 0]], &[&[0, 1], &[1, 0]]).unwrap();
    let s = vec![
        DivorceStrategy::Scripted(vec![(1, ManId(0))]),
        DivorceStrategy::Scripted(vec![(1, ManId(1))]),
    ];
    let (_, low) = simulate_with_divorces(&inst, &s, Arbiter::LowestIndex).unwrap();
    let (_, high) = simulate_with_divorces(&inst, &s, Arbiter::HighestIndex).unwrap();
    assert_eq!(low.seasons[0].divorce.unwrap().0, WomanId(0));
    assert_eq!(high.seasons[0].divorce.unwrap().0, WomanId(1));
}

#[test]
fn blacklists_survive_a_double_conversion() {
    for n in 2..=6 {
        for seed in 0..40 {
            let (inst, mu) = gen_random(n, n, seed, false).unwrap();
            let res = manipulate_general(&inst, &mu, SynthesisOptions::default()).unwrap();
            let (p, s) = blacklist_to_divorce(&res.prefs_w).unwrap();
            let back = divorce_to_blacklist(&inst, &p, &s).unwrap();
            assert_eq!(textbook_men_optimal(&inst.with_women(back).unwrap()), mu, "n={n} seed={seed}");
        }
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(300))]

    #[test]
    fn arbitrary_standing_divorces_convert(n in 1usize..=6, seed in 0u64..1000, bits in proptest::prelude::any::<u64>()) {
        let (inst, _) = gen_random(n, n, seed, false).unwrap();
        let strategies: Vec<DivorceStrategy> = (0..n)
            .map(|w| {
                let set: BTreeSet<ManId> = (0..n).filter(|m| (bits >> ((w * n + m) % 64)) & 1 == 1).map(ManId).collect();
                if set.is_empty() { DivorceStrategy::Never } else { DivorceStrategy::DivorceIfPartnerIn(set) }
            })
            .collect();
        let (end, _) = simulate_with_divorces(&inst, &strategies, Arbiter::default()).unwrap();
        let b = divorce_to_blacklist(&inst, inst.prefs_w(), &strategies).unwrap();
        proptest::prop_assert_eq!(textbook_men_optimal(&inst.with_women(b).unwrap()), end);
    }
}
