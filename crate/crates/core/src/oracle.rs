//! Brute-force ground truth for small markets.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use crate::engine::{find_blocking_pairs, run, simulate, Hooks};
use crate::error::{Error, Result};
use crate::model::{
    Instance, ManId, Matching, MenProfile, PreferenceList, Profile, Side, WomanId, WomenProfile,
};

/// Default cap on candidate matchings visited by [`enumerate_stable`].
pub const DEFAULT_MATCHING_LIMIT: u64 = 10_000_000;
/// Default cap on profiles evaluated by [`exhaust_w_profiles`].
pub const DEFAULT_PROFILE_LIMIT: u64 = 100_000_000;

/// Number of partial matchings between sides of the given sizes,
/// saturating at `u64::MAX`.
pub fn matching_space(n_women: usize, n_men: usize) -> u64 {
    let n = n_women.min(n_men) as u64;
    let (a, b) = (n_women as u64, n_men as u64);
    let mut total: u64 = 0;
    // term_k = C(a,k) C(b,k) k!
    let mut term: u128 = 1;
    for k in 0..=n {
        if k > 0 {
            term = term * u128::from(a - k + 1) * u128::from(b - k + 1) / u128::from(k);
        }
        total = total.saturating_add(u64::try_from(term).unwrap_or(u64::MAX));
    }
    total
}

struct Enumerator<'a> {
    instance: &'a Instance,
    limit: u64,
    visited: &'a AtomicU64,
    wife: Vec<Option<ManId>>,
    husband: Vec<Option<WomanId>>,
    found: Vec<Matching>,
}

impl Enumerator<'_> {
    fn tick(&self) -> Result<()> {
        if self.visited.fetch_add(1, Ordering::Relaxed) >= self.limit {
            return Err(Error::OracleLimit {
                space: format!(
                    "{} candidate matchings",
                    matching_space(self.instance.n_women(), self.instance.n_men())
                ),
                limit: self.limit,
            });
        }
        Ok(())
    }

    fn blocks(&self, w: WomanId, m: ManId) -> bool {
        let (wl, ml) = (self.instance.woman(w), self.instance.man(m));
        wl.prefers(m, self.wife[w.0]) && ml.prefers(w, self.husband[m.0])
    }

    /// Pairs whose both partners are already final and that block.
    fn consistent_after(&self, i: usize) -> bool {
        let w = WomanId(i);
        for (m, h) in self.husband.iter().enumerate() {
            if h.is_some() && self.wife[i] != Some(ManId(m)) && self.blocks(w, ManId(m)) {
                return false;
            }
        }
        if let Some(x) = self.wife[i] {
            for j in 0..i {
                if self.blocks(WomanId(j), x) {
                    return false;
                }
            }
        }
        true
    }

    fn assign(&mut self, i: usize, choice: Option<ManId>) -> Result<()> {
        self.tick()?;
        self.wife[i] = choice;
        if let Some(m) = choice {
            self.husband[m.0] = Some(WomanId(i));
        }
        if self.consistent_after(i) {
            self.descend(i + 1)?;
        }
        if let Some(m) = choice {
            self.husband[m.0] = None;
        }
        self.wife[i] = None;
        Ok(())
    }

    fn options(&self, i: usize) -> Vec<Option<ManId>> {
        let w = WomanId(i);
        let mut out = vec![None];
        out.extend(
            self.instance
                .woman(w)
                .ranking()
                .iter()
                .filter(|&&m| self.husband[m.0].is_none() && self.instance.man(m).accepts(w))
                .map(|&m| Some(m)),
        );
        out
    }

    fn descend(&mut self, i: usize) -> Result<()> {
        if i == self.wife.len() {
            // Men still single at the leaf were not covered incrementally.
            for (m, h) in self.husband.iter().enumerate() {
                if h.is_none() {
                    for w in 0..self.wife.len() {
                        if self.blocks(WomanId(w), ManId(m)) {
                            return Ok(());
                        }
                    }
                }
            }
            let mu = Matching::from_women(&self.wife, self.husband.len())?;
            self.found.push(mu);
            return Ok(());
        }
        for choice in self.options(i) {
            self.assign(i, choice)?;
        }
        Ok(())
    }
}

/// Every stable matching of the instance, by exhaustive search over
/// rational matchings with early pruning of settled blocking pairs.
/// `limit` caps the number of search nodes.
pub fn enumerate_stable(instance: &Instance, limit: u64) -> Result<BTreeSet<Matching>> {
    enumerate_stable_jobs(instance, limit, 1)
}

/// As [`enumerate_stable`], splitting the search on the first woman's
/// choice across `jobs` threads.
pub fn enumerate_stable_jobs(
    instance: &Instance,
    limit: u64,
    jobs: usize,
) -> Result<BTreeSet<Matching>> {
    let visited = AtomicU64::new(0);
    let fresh = || Enumerator {
        instance,
        limit,
        visited: &visited,
        wife: vec![None; instance.n_women()],
        husband: vec![None; instance.n_men()],
        found: Vec::new(),
    };
    if instance.n_women() == 0 {
        let mut e = fresh();
        e.descend(0)?;
        return Ok(e.found.into_iter().collect());
    }
    let roots = fresh().options(0);
    let jobs = jobs.clamp(1, roots.len());
    let chunks: Vec<Vec<Option<ManId>>> = (0..jobs)
        .map(|j| roots.iter().skip(j).step_by(jobs).copied().collect())
        .collect();
    let results: Vec<Result<Vec<Matching>>> = std::thread::scope(|s| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                let mut e = fresh();
                s.spawn(move || {
                    for &c in chunk {
                        e.assign(0, c)?;
                    }
                    Ok(e.found)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("enumeration worker panicked"))
            .collect()
    });
    let mut out = BTreeSet::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// True iff `target` is the only stable matching. Agreement of the two
/// proposing runs on `target` settles it without search.
pub fn is_unique_stable(instance: &Instance, target: &Matching, limit: u64) -> Result<bool> {
    instance.check_matching(target)?;
    if run(instance, Side::Men) == *target && run(instance, Side::Women) == *target {
        return Ok(true);
    }
    let all = enumerate_stable(instance, limit)?;
    Ok(all.len() == 1 && all.contains(target))
}

/// Same as [`is_unique_stable`] but always by enumeration.
pub fn is_unique_stable_by_search(
    instance: &Instance,
    target: &Matching,
    limit: u64,
) -> Result<bool> {
    instance.check_matching(target)?;
    let all = enumerate_stable(instance, limit)?;
    Ok(all.len() == 1 && all.contains(target))
}

/// Checks a claimed set of stable matchings against a full scan of all
/// matchings, without pruning. For cross-checking the search on tiny inputs.
pub fn stable_by_full_scan(instance: &Instance) -> Result<BTreeSet<Matching>> {
    let (nw, nm) = (instance.n_women(), instance.n_men());
    let mut out = BTreeSet::new();
    let mut wife = vec![None; nw];
    let mut used = vec![false; nm];
    fn rec(
        i: usize,
        inst: &Instance,
        wife: &mut Vec<Option<ManId>>,
        used: &mut Vec<bool>,
        out: &mut BTreeSet<Matching>,
    ) -> Result<()> {
        if i == wife.len() {
            let mu = Matching::from_women(wife, used.len())?;
            if find_blocking_pairs(inst, &mu)?.is_stable() {
                out.insert(mu);
            }
            return Ok(());
        }
        rec(i + 1, inst, wife, used, out)?;
        for m in 0..used.len() {
            if !used[m] {
                used[m] = true;
                wife[i] = Some(ManId(m));
                rec(i + 1, inst, wife, used, out)?;
                wife[i] = None;
                used[m] = false;
            }
        }
        Ok(())
    }
    rec(0, instance, &mut wife, &mut used, &mut out)?;
    Ok(out)
}

/// All ordered sublists of `0..n`, by length then lexicographically.
pub fn ordered_sublists(n: usize) -> Vec<Vec<ManId>> {
    fn rec(k: usize, n: usize, cur: &mut Vec<ManId>, used: &mut [bool], out: &mut Vec<Vec<ManId>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for m in 0..n {
            if !used[m] {
                used[m] = true;
                cur.push(ManId(m));
                rec(k, n, cur, used, out);
                cur.pop();
                used[m] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; n];
    for k in 0..=n {
        rec(k, n, &mut Vec::new(), &mut used, &mut out);
    }
    out
}

/// Size of the women's profile space searched by [`exhaust_w_profiles`].
pub fn profile_space(n_women: usize, n_men: usize) -> u128 {
    let mut per_woman: u128 = 0;
    let mut perm: u128 = 1;
    for k in 0..=n_men as u128 {
        if k > 0 {
            perm *= n_men as u128 - k + 1;
        }
        per_woman += perm;
    }
    per_woman.saturating_pow(n_women as u32)
}

/// Walks every women's profile in canonical order (woman 0 most
/// significant; each woman's sublists by length, then lexicographically).
/// Among the profiles whose men-optimal stable matching is `target`, returns
/// the first one violating `predicate`, if any.
pub fn exhaust_w_profiles<F>(
    prefs_m: &MenProfile,
    target: &Matching,
    predicate: F,
    limit: u64,
    jobs: usize,
) -> Result<Option<WomenProfile>>
where
    F: Fn(&WomenProfile) -> bool + Sync,
{
    let (nw, nm) = (prefs_m.n_opposite(), prefs_m.len());
    if target.n_women() != nw || target.n_men() != nm {
        return Err(Error::Malformed("target does not fit the men's profile".into()));
    }
    let space = profile_space(nw, nm);
    if space > u128::from(limit) {
        return Err(Error::OracleLimit {
            space: format!("{space} women's profiles"),
            limit,
        });
    }
    let space = space as usize;
    let lists: Vec<PreferenceList<ManId>> = ordered_sublists(nm)
        .into_iter()
        .map(|r| PreferenceList::new(r, nm).expect("sublists are valid"))
        .collect();
    let goal = target.women_partners();
    let best = AtomicUsize::new(usize::MAX);


    let worker = |start: usize, end: usize| -> Result<()> {
        if nw == 0 {
            return Ok(());
        }
        let mut view: Vec<&PreferenceList<ManId>> = vec![&lists[0]; nw];
        for idx in start..end {
            if idx >= best.load(Ordering::Relaxed) {
                break;
            }
            decode_profile(&lists, idx, &mut view);
            let out = simulate::<ManId, WomanId, _, _>(
                prefs_m.lists(),
                view.as_slice(),
                None,
                Hooks::default(),
                false,
            )?;
            let hit = out
                .holder
                .iter()
                .zip(goal)
                .all(|(h, g)| h.map(ManId) == *g);
            if hit {
                let profile = Profile::new(view.iter().map(|&l| l.clone()).collect(), nm)?;
                if !predicate(&profile) {
                    best.fetch_min(idx, Ordering::Relaxed);
                    break;
                }
            }
        }
        Ok(())
    };

    if nw == 0 {
        let empty = Profile::new(Vec::new(), nm)?;
        let mu = Matching::empty(0, nm);
        return Ok((mu == *target && !predicate(&empty)).then_some(empty));
    }

    let jobs = jobs.max(1);
    let chunk = space.div_ceil(jobs);
    let results: Vec<Result<()>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let (a, b) = (j * chunk, ((j + 1) * chunk).min(space));
                let worker = &worker;
                s.spawn(move || worker(a, b))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("profile worker panicked"))
            .collect()
    });
    for r in results {
        r?;
    }
    let idx = best.load(Ordering::Relaxed);
    if idx == usize::MAX {
        return Ok(None);
    }
    let mut view: Vec<&PreferenceList<ManId>> = vec![&lists[0]; nw];
    decode_profile(&lists, idx, &mut view);
    Ok(Some(Profile::new(
        view.iter().map(|&l| l.clone()).collect(),
        nm,
    )?))
}

fn decode_profile<'a>(lists: &'a [PreferenceList<ManId>], mut idx: usize, out: &mut [&'a PreferenceList<ManId>]) {
    let base = lists.len();
    for slot in out.iter_mut().rev() {
        *slot = &lists[idx % base];
        idx /= base;
    }
}

/// Predicate for [`exhaust_w_profiles`]: some woman blacklists at least `k`
/// men.
pub fn some_blacklist_at_least(k: usize) -> impl Fn(&WomenProfile) -> bool + Sync {
    move |p: &WomenProfile| p.lists().iter().any(|l| l.blacklist_len() >= k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_counts() {
        assert_eq!(matching_space(2, 2), 7);
        assert_eq!(matching_space(3, 3), 34);
        assert_eq!(profile_space(3, 3), 4096);
        assert_eq!(profile_space(4, 4), 65u128.pow(4));
        assert_eq!(ordered_sublists(3).len(), 16);
        assert_eq!(ordered_sublists(2)[..3], [vec![], vec![ManId(0)], vec![ManId(1)]]);
    }

    #[test]
    fn empty_lists_have_only_the_empty_matching() {
        let inst = Instance::from_indices(&[&[], &[]], &[&[], &[]]).unwrap();
        let all = enumerate_stable(&inst, DEFAULT_MATCHING_LIMIT).unwrap();
        assert_eq!(all.into_iter().collect::<Vec<_>>(), vec![Matching::empty(2, 2)]);
    }

    #[test]
    fn limit_is_enforced() {
        let inst = Instance::new(Profile::full(6, 6), Profile::full(6, 6)).unwrap();
        assert!(matches!(
            enumerate_stable(&inst, 10),
            Err(Error::OracleLimit { limit: 10, .. })
        ));
    }

    #[test]
    fn constant_true_predicate_finds_nothing() {
        let prefs_m = Profile::<crate::model::WomanId>::full(2, 2);
        let mu = Matching::from_pairs(2, 2, [(WomanId(0), ManId(1)), (WomanId(1), ManId(0))]).unwrap();
        assert_eq!(exhaust_w_profiles(&prefs_m, &mu, |_| true, 1000, 1).unwrap(), None);
    }
}
