//! Test-only reference implementations, written independently of the
//! library's engine and oracle.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use forcematch_core::{Instance, ManId, Matching, WomanId};

/// Position of `x` in `list`, `None` if absent.
fn pos<T: PartialEq>(list: &[T], x: &T) -> Option<usize> {
    list.iter().position(|y| y == x)
}

/// Stability by definition: rational on both sides and no blocking pair.
pub fn stable_by_definition(inst: &Instance, mu: &Matching) -> bool {
    let wr = inst.prefs_w().rankings();
    let mr = inst.prefs_m().rankings();
    for (w, m) in mu.pairs() {
        if pos(&wr[w.0], &m).is_none() || pos(&mr[m.0], &w).is_none() {
            return false;
        }
    }
    for w in 0..inst.n_women() {
        for m in 0..inst.n_men() {
            let (wi, mi) = (WomanId(w), ManId(m));
            let (Some(a), Some(b)) = (pos(&wr[w], &mi), pos(&mr[m], &wi)) else { continue };
            let w_wants = match mu.partner_of_woman(wi) {
                None => true,
                Some(cur) => cur != mi && a < pos(&wr[w], &cur).unwrap_or(usize::MAX),
            };
            let m_wants = match mu.partner_of_man(mi) {
                None => true,
                Some(cur) => cur != wi && b < pos(&mr[m], &cur).unwrap_or(usize::MAX),
            };
            if w_wants && m_wants {
                return false;
            }
        }
    }
    true
}

/// Every partial matching, by assigning each woman a man or nobody.
pub fn all_matchings(nw: usize, nm: usize) -> Vec<Matching> {
    fn rec(w: usize, nw: usize, nm: usize, used: &mut Vec<bool>, cur: &mut Vec<Option<ManId>>, out: &mut Vec<Matching>) {
        if w == nw {
            out.push(Matching::from_women(cur, nm).unwrap());
            return;
        }
        cur.push(None);
        rec(w + 1, nw, nm, used, cur, out);
        cur.pop();
        for m in 0..nm {
            if !used[m] {
                used[m] = true;
                cur.push(Some(ManId(m)));
                rec(w + 1, nw, nm, used, cur, out);
                cur.pop();
                used[m] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(0, nw, nm, &mut vec![false; nm], &mut Vec::new(), &mut out);
    out
}

pub fn stable_set(inst: &Instance) -> BTreeSet<Matching> {
    all_matchings(inst.n_women(), inst.n_men())
        .into_iter()
        .filter(|m| stable_by_definition(inst, m))
        .collect()
}

/// Textbook one-at-a-time men-proposing deferred acceptance.
pub fn textbook_men_optimal(inst: &Instance) -> Matching {
    let wr = inst.prefs_w().rankings();
    let mr = inst.prefs_m().rankings();
    let mut next = vec![0usize; inst.n_men()];
    let mut holds: Vec<Option<usize>> = vec![None; inst.n_women()];
    let mut free: Vec<usize> = (0..inst.n_men()).rev().collect();
    while let Some(m) = free.pop() {
        let Some(&w) = mr[m].get(next[m]) else { continue };
        next[m] += 1;
        let Some(rank) = pos(&wr[w.0], &ManId(m)) else {
            free.push(m);
            continue;
        };
        match holds[w.0] {
            None => holds[w.0] = Some(m),
            Some(h) if rank < pos(&wr[w.0], &ManId(h)).unwrap() => {
                holds[w.0] = Some(m);
                free.push(h);
            }
            Some(_) => free.push(m),
        }
    }
    let partners: Vec<Option<ManId>> = holds.into_iter().map(|h| h.map(ManId)).collect();
    Matching::from_women(&partners, inst.n_men()).unwrap()
}

/// Number of cycles of the permutation `w -> mu(mu_prime(w))` on women,
/// computed from scratch.
pub fn permutation_cycles(mu_prime: &Matching, mu: &Matching) -> usize {
    let n = mu.n_women();
    let perm: Vec<usize> = (0..n)
        .map(|w| mu.partner_of_man(mu_prime.partner_of_woman(WomanId(w)).unwrap()).unwrap().0)
        .collect();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = perm[x];
        }
    }
    count
}

pub fn pairs(n_women: usize, n_men: usize, p: &[(usize, usize)]) -> Matching {
    Matching::from_pairs(n_women, n_men, p.iter().map(|&(w, m)| (WomanId(w), ManId(m)))).unwrap()
}

pub fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// `m0:[w0,w1], m1:[w1,w0], w0:[m1,m0], w1:[m0,m1]`: two stable matchings.
pub fn two_stable() -> Instance {
    Instance::from_indices(&[&[1, 0], &[0, 1]], &[&[0, 1], &[1, 0]]).unwrap()
}

/// Instances with random (possibly truncated, possibly empty) lists on both
/// sides.
pub fn arb_instance(max_w: usize, max_m: usize) -> impl proptest::strategy::Strategy<Value = Instance> {
    use proptest::prelude::*;
    (1..=max_w, 1..=max_m).prop_flat_map(|(nw, nm)| {
        let women = proptest::collection::vec(Just((0..nm).collect::<Vec<_>>()).prop_shuffle().prop_flat_map(move |v| (0..=nm).prop_map(move |k| v[..k].to_vec())), nw);
        let men = proptest::collection::vec(Just((0..nw).collect::<Vec<_>>()).prop_shuffle().prop_flat_map(move |v| (0..=nw).prop_map(move |k| v[..k].to_vec())), nm);
        (women, men).prop_map(|(w, m)| {
            let w: Vec<Vec<ManId>> = w.into_iter().map(|l| l.into_iter().map(ManId).collect()).collect();
            let m: Vec<Vec<WomanId>> = m.into_iter().map(|l| l.into_iter().map(WomanId).collect()).collect();
            Instance::from_rankings(w, m).unwrap()
        })
    })
}

/// The three-man cyclic instance with the profile that forces `w_j - m_j`.
pub fn cyclic3() -> Instance {
    forcematch_core::format::parse_instance(&fixture("cyclic3.txt")).unwrap()
}
