//! Deferred acceptance.
//!
//! The reference run uses synchronous nights: every man who is not held by a
//! woman serenades under the window of the best woman who has not rejected
//! him, then each woman keeps the best acceptable serenader and rejects the
//! others. A woman approached only by men she blacklists rejects all of them.
//! The run stops on the first night without rejections.
//!
//! Runs may also start from a provisional matching, which is how the
//! manipulation code replays the second half of a run. Only men propose in
//! that mode.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    Instance, ManId, Matching, Participant, PreferenceList, Side, WomanId,
};

/// Per-call switches.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Keep the night-by-night log. Costs memory proportional to the number
    /// of proposals.
    pub trace: bool,
}

impl RunOptions {
    pub fn traced() -> Self {
        RunOptions { trace: true }
    }
}

/// A receiver turning a proposer away.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection<P, R> {
    pub by: R,
    pub rejected: P,
    /// The serenader she kept that night; `None` when she kept nobody or the
    /// rejection was a forced divorce.
    pub in_favour_of: Option<P>,
}

/// One night of a run. `serenades` lists only proposers who arrive under a
/// new window that night; men already held keep serenading silently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Night<P, R> {
    pub serenades: Vec<(P, R)>,
    pub rejections: Vec<Rejection<P, R>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunTrace<P, R> {
    pub nights: Vec<Night<P, R>>,
}

/// Log of a men-proposing run.
pub type MenTrace = RunTrace<ManId, WomanId>;

impl<P: Participant, R: Participant> RunTrace<P, R> {
    /// The last night (1-based) on which someone newly serenades `r`.
    pub fn last_new_serenade(&self, r: R) -> Option<usize> {
        self.nights
            .iter()
            .rposition(|n| n.serenades.iter().any(|&(_, x)| x == r))
            .map(|i| i + 1)
    }

    pub fn rejections(&self) -> impl Iterator<Item = (usize, &Rejection<P, R>)> + '_ {
        self.nights
            .iter()
            .enumerate()
            .flat_map(|(i, n)| n.rejections.iter().map(move |r| (i + 1, r)))
    }

    pub fn rejection_count(&self) -> usize {
        self.nights.iter().map(|n| n.rejections.len()).sum()
    }
}

impl<P: Participant, R: Participant> fmt::Display for RunTrace<P, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, night) in self.nights.iter().enumerate() {
            write!(f, "night {}:", i + 1)?;
            let s: Vec<String> = night
                .serenades
                .iter()
                .map(|(p, r)| format!("{p} -> {r}"))
                .collect();
            if !s.is_empty() {
                write!(f, " {}", s.join(", "))?;
            }
            if !night.rejections.is_empty() {
                let r: Vec<String> = night
                    .rejections
                    .iter()
                    .map(|r| format!("reject {} x {}", r.by, r.rejected))
                    .collect();
                write!(f, "; {}", r.join(", "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Counters collected by every run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub nights: usize,
    pub proposals: u64,
    pub rejections: u64,
}

/// Result of a run.
#[derive(Clone, Debug)]
pub struct Run<P, R> {
    pub matching: Matching,
    pub trace: Option<RunTrace<P, R>>,
    pub stats: RunStats,
}

// ---------------------------------------------------------------------------
// Simulation core, generic over which side proposes.

/// Read access to one side's preference lists.
pub(crate) trait Lists<T> {
    fn list(&self, i: usize) -> &PreferenceList<T>;
    fn count(&self) -> usize;
}

impl<T> Lists<T> for [PreferenceList<T>] {
    #[inline]
    fn list(&self, i: usize) -> &PreferenceList<T> {
        &self[i]
    }
    fn count(&self) -> usize {
        self.len()
    }
}

impl<T> Lists<T> for [&PreferenceList<T>] {
    #[inline]
    fn list(&self, i: usize) -> &PreferenceList<T> {
        self[i]
    }
    fn count(&self) -> usize {
        self.len()
    }
}

/// Deviations from the plain run, used to realise the timings the
/// manipulation and divorce constructions reason about.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Hooks {
    /// This receiver rejects whoever serenades her on the first night.
    pub divorce: Option<usize>,
    /// `(receiver, proposer, night)`: if the receiver would reject the
    /// proposer on that night, she keeps him aside instead. He stops
    /// proposing and the run goes on without him.
    pub defer: Option<(usize, usize, usize)>,
}

pub(crate) struct Outcome<P, R> {
    /// Receiver index to held proposer.
    pub holder: Vec<Option<usize>>,
    /// Set when the deferral hook fired.
    pub parked: Option<usize>,
    pub trace: Option<RunTrace<P, R>>,
    pub stats: RunStats,
}

/// Runs deferred acceptance. `start[p]` gives proposer `p`'s initial
/// receiver for a resumed run; proposers with `None` there stay idle. With
/// `start == None` every proposer with a nonempty list starts at his top.
pub(crate) fn simulate<P, R, A, B>(
    proposers: &A,
    receivers: &B,
    start: Option<&[Option<R>]>,
    hooks: Hooks,
    trace: bool,
) -> Result<Outcome<P, R>>
where
    P: Participant,
    R: Participant,
    A: Lists<R> + ?Sized,
    B: Lists<P> + ?Sized,
{
    let np = proposers.count();
    let nr = receivers.count();
    let mut next = vec![0usize; np];
    let mut holder: Vec<Option<usize>> = vec![None; nr];
    let mut movers: Vec<usize> = Vec::with_capacity(np);

    match start {
        None => {
            movers.extend((0..np).filter(|&p| !proposers.list(p).is_empty()));
        }
        Some(initial) => {
            if initial.len() != np {
                return Err(Error::MalformedState(format!(
                    "initial state covers {} proposers, expected {np}",
                    initial.len()
                )));
            }
            let mut taken = vec![false; nr];
            for (p, r) in initial.iter().enumerate() {
                let Some(r) = *r else { continue };
                let pos = proposers.list(p).rank_of(r).ok_or_else(|| {
                    Error::MalformedState(format!(
                        "{} is placed with {r}, who is not on his list",
                        P::from_index(p)
                    ))
                })?;
                if std::mem::replace(&mut taken[r.index()], true) {
                    return Err(Error::MalformedState(format!(
                        "{r} holds two proposers in the initial state"
                    )));
                }
                next[p] = pos;
                movers.push(p);
            }
        }
    }

    let mut stats = RunStats::default();
    let mut log: Option<RunTrace<P, R>> = trace.then(|| RunTrace { nights: Vec::new() });
    let mut parked = None;
    let mut rejected_tonight: Vec<(usize, usize)> = Vec::new();
    let mut next_movers: Vec<usize> = Vec::with_capacity(np);
    let mut night = 0usize;

    loop {
        night += 1;
        rejected_tonight.clear();
        next_movers.clear();
        let mut serenades = Vec::new();

        for &p in &movers {
            let r = proposers.list(p).ranking()[next[p]].index();
            stats.proposals += 1;
            if trace {
                serenades.push((P::from_index(p), R::from_index(r)));
            }
            let list = receivers.list(r);
            let divorcing = night == 1 && hooks.divorce == Some(r);
            let loser = if divorcing || !list.accepts(P::from_index(p)) {
                Some(p)
            } else {
                match holder[r] {
                    None => {
                        holder[r] = Some(p);
                        None
                    }
                    Some(h) => {
                        if list.prefers(P::from_index(p), Some(P::from_index(h))) {
                            holder[r] = Some(p);
                            Some(h)
                        } else {
                            Some(p)
                        }
                    }
                }
            };
            let Some(x) = loser else { continue };
            if hooks.defer == Some((r, x, night)) {
                parked = Some(x);
                continue;
            }
            rejected_tonight.push((r, x));
            next[x] += 1;
            if next[x] < proposers.list(x).len() {
                next_movers.push(x);
            }
        }

        stats.nights = night;
        stats.rejections += rejected_tonight.len() as u64;
        if let Some(log) = log.as_mut() {
            let rejections = rejected_tonight
                .iter()
                .map(|&(r, x)| Rejection {
                    by: R::from_index(r),
                    rejected: P::from_index(x),
                    in_favour_of: if night == 1 && hooks.divorce == Some(r) {
                        None
                    } else {
                        holder[r].map(P::from_index)
                    },
                })
                .collect();
            log.nights.push(Night {
                serenades,
                rejections,
            });
        }
        if rejected_tonight.is_empty() {
            break;
        }
        std::mem::swap(&mut movers, &mut next_movers);
    }

    Ok(Outcome {
        holder,
        parked,
        trace: log,
        stats,
    })
}

fn men_matching(instance: &Instance, holder: &[Option<usize>]) -> Matching {
    Matching::from_pairs(
        instance.n_women(),
        instance.n_men(),
        holder
            .iter()
            .enumerate()
            .filter_map(|(w, m)| m.map(|m| (WomanId(w), ManId(m)))),
    )
    .expect("a run holds each proposer at most once")
}

fn women_matching(instance: &Instance, holder: &[Option<usize>]) -> Matching {
    Matching::from_pairs(
        instance.n_women(),
        instance.n_men(),
        holder
            .iter()
            .enumerate()
            .filter_map(|(m, w)| w.map(|w| (WomanId(w), ManId(m)))),
    )
    .expect("a run holds each proposer at most once")
}

/// Men-proposing run: the men-optimal stable matching.
pub fn run_men(instance: &Instance, opts: RunOptions) -> Run<ManId, WomanId> {
    let out = simulate::<ManId, WomanId, _, _>(
        instance.prefs_m().lists(),
        instance.prefs_w().lists(),
        None,
        Hooks::default(),
        opts.trace,
    )
    .expect("a fresh run cannot fail");
    Run {
        matching: men_matching(instance, &out.holder),
        trace: out.trace,
        stats: out.stats,
    }
}

/// Women-proposing run: the women-optimal stable matching.
pub fn run_women(instance: &Instance, opts: RunOptions) -> Run<WomanId, ManId> {
    let out = simulate::<WomanId, ManId, _, _>(
        instance.prefs_w().lists(),
        instance.prefs_m().lists(),
        None,
        Hooks::default(),
        opts.trace,
    )
    .expect("a fresh run cannot fail");
    Run {
        matching: women_matching(instance, &out.holder),
        trace: out.trace,
        stats: out.stats,
    }
}

/// The stable matching optimal for the proposing side.
pub fn run(instance: &Instance, proposing: Side) -> Matching {
    match proposing {
        Side::Men => run_men(instance, RunOptions::default()).matching,
        Side::Women => run_women(instance, RunOptions::default()).matching,
    }
}

/// Continues a men-proposing run from a provisional matching. On the first
/// night every matched man serenades his partner again, so a woman
/// holding a man she blacklists rejects him then. Men unmatched in `initial`
/// are treated as having exhausted their lists.
pub fn run_from_state(
    instance: &Instance,
    initial: &Matching,
    opts: RunOptions,
) -> Result<Run<ManId, WomanId>> {
    resume(instance, initial, Hooks::default(), opts.trace)
}

pub(crate) fn resume(
    instance: &Instance,
    initial: &Matching,
    hooks: Hooks,
    trace: bool,
) -> Result<Run<ManId, WomanId>> {
    instance
        .check_matching(initial)
        .map_err(|e| Error::MalformedState(e.to_string()))?;
    let out = simulate::<ManId, WomanId, _, _>(
        instance.prefs_m().lists(),
        instance.prefs_w().lists(),
        Some(initial.men_partners()),
        hooks,
        trace,
    )?;
    Ok(Run {
        matching: men_matching(instance, &out.holder),
        trace: out.trace,
        stats: out.stats,
    })
}

// ---------------------------------------------------------------------------
// One proposal at a time.

/// Which free proposer moves next in a sequential run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderPolicy {
    LowestIndex,
    HighestIndex,
    /// First freed, first to move.
    Fifo,
    /// Last freed, first to move.
    Lifo,
    /// Uniformly random free proposer, seeded.
    Random(u64),
}

#[allow(clippy::large_enum_variant)]
enum FreePool {
    Ordered(BTreeSet<usize>, bool),
    Queue(VecDeque<usize>),
    Stack(Vec<usize>),
    Random(Vec<usize>, ChaCha8Rng),
}

impl FreePool {
    fn new(policy: OrderPolicy, initial: impl Iterator<Item = usize>) -> Self {
        match policy {
            OrderPolicy::LowestIndex => FreePool::Ordered(initial.collect(), false),
            OrderPolicy::HighestIndex => FreePool::Ordered(initial.collect(), true),
            OrderPolicy::Fifo => FreePool::Queue(initial.collect()),
            OrderPolicy::Lifo => FreePool::Stack(initial.collect()),
            OrderPolicy::Random(seed) => {
                FreePool::Random(initial.collect(), ChaCha8Rng::seed_from_u64(seed))
            }
        }
    }

    fn push(&mut self, p: usize) {
        match self {
            FreePool::Ordered(s, _) => {
                s.insert(p);
            }
            FreePool::Queue(q) => q.push_back(p),
            FreePool::Stack(s) => s.push(p),
            FreePool::Random(v, _) => v.push(p),
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            FreePool::Ordered(s, false) => s.pop_first(),
            FreePool::Ordered(s, true) => s.pop_last(),
            FreePool::Queue(q) => q.pop_front(),
            FreePool::Stack(s) => s.pop(),
            FreePool::Random(v, rng) => {
                if v.is_empty() {
                    None
                } else {
                    let i = rng.gen_range(0..v.len());
                    Some(v.swap_remove(i))
                }
            }
        }
    }
}

fn sequential<P, R, A, B>(proposers: &A, receivers: &B, policy: OrderPolicy) -> Vec<Option<usize>>
where
    P: Participant,
    R: Participant,
    A: Lists<R> + ?Sized,
    B: Lists<P> + ?Sized,
{
    let np = proposers.count();
    let mut next = vec![0usize; np];
    let mut holder: Vec<Option<usize>> = vec![None; receivers.count()];
    let mut free = FreePool::new(
        policy,
        (0..np).filter(|&p| !proposers.list(p).is_empty()),
    );
    while let Some(p) = free.pop() {
        let r = proposers.list(p).ranking()[next[p]].index();
        let list = receivers.list(r);
        let loser = if !list.accepts(P::from_index(p)) {
            p
        } else {
            match holder[r] {
                None => {
                    holder[r] = Some(p);
                    continue;
                }
                Some(h) if list.prefers(P::from_index(p), Some(P::from_index(h))) => {
                    holder[r] = Some(p);
                    h
                }
                Some(_) => p,
            }
        };
        next[loser] += 1;
        if next[loser] < proposers.list(loser).len() {
            free.push(loser);
        }
    }
    holder
}

/// One-proposal-at-a-time deferred acceptance with the given scheduling.
/// The outcome does not depend on the policy.
pub fn run_sequential(instance: &Instance, proposing: Side, policy: OrderPolicy) -> Matching {
    match proposing {
        Side::Men => {
            let holder = sequential::<ManId, WomanId, _, _>(
                instance.prefs_m().lists(),
                instance.prefs_w().lists(),
                policy,
            );
            men_matching(instance, &holder)
        }
        Side::Women => {
            let holder = sequential::<WomanId, ManId, _, _>(
                instance.prefs_w().lists(),
                instance.prefs_m().lists(),
                policy,
            );
            women_matching(instance, &holder)
        }
    }
}

// ---------------------------------------------------------------------------
// Stability.

/// Why a matching fails to be stable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockingReport {
    /// Mutually acceptable pairs who would both rather be together.
    pub blocking: Vec<(WomanId, ManId)>,
    /// Matched pairs where at least one side blacklists the other.
    pub irrational: Vec<(WomanId, ManId)>,
}

impl BlockingReport {
    pub fn is_stable(&self) -> bool {
        self.blocking.is_empty() && self.irrational.is_empty()
    }
}

pub fn find_blocking_pairs(instance: &Instance, matching: &Matching) -> Result<BlockingReport> {
    instance.check_matching(matching)?;
    let mut report = BlockingReport::default();
    for (w, m) in matching.pairs() {
        if !instance.woman(w).accepts(m) || !instance.man(m).accepts(w) {
            report.irrational.push((w, m));
        }
    }
    for wi in 0..instance.n_women() {
        let w = WomanId(wi);
        let wl = instance.woman(w);
        let current = matching.partner_of_woman(w);
        for &m in wl.ranking() {
            // Everyone ranked below her partner is worse for her.
            if Some(m) == current {
                break;
            }
            let ml = instance.man(m);
            if ml.accepts(w) && ml.prefers(w, matching.partner_of_man(m)) {
                report.blocking.push((w, m));
            }
        }
    }
    Ok(report)
}

pub fn is_stable(instance: &Instance, matching: &Matching) -> Result<bool> {
    Ok(find_blocking_pairs(instance, matching)?.is_stable())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_stable() -> Instance {
        Instance::from_indices(&[&[1, 0], &[0, 1]], &[&[0, 1], &[1, 0]]).unwrap()
    }

    #[test]
    fn men_and_women_optimal_differ_on_two_stable_instance() {
        let inst = two_stable();
        let m = run(&inst, Side::Men);
        assert_eq!(m.partner_of_woman(WomanId(0)), Some(ManId(0)));
        assert_eq!(m.partner_of_woman(WomanId(1)), Some(ManId(1)));
        let w = run(&inst, Side::Women);
        assert_eq!(w.partner_of_woman(WomanId(0)), Some(ManId(1)));
        assert_eq!(w.partner_of_woman(WomanId(1)), Some(ManId(0)));
    }

    #[test]
    fn blacklisted_only_suitors_are_all_rejected() {
        // Both men want w0, who accepts neither.
        let inst = Instance::from_indices(&[&[], &[0, 1]], &[&[0, 1], &[0, 1]]).unwrap();
        let r = run_men(&inst, RunOptions::traced());
        let t = r.trace.unwrap();
        assert_eq!(t.nights[0].rejections.len(), 2);
        assert!(t.nights[0].rejections.iter().all(|r| r.in_favour_of.is_none()));
        assert_eq!(r.matching.partner_of_woman(WomanId(1)), Some(ManId(0)));
        assert_eq!(r.matching.partner_of_man(ManId(1)), None);
    }

    #[test]
    fn distinct_tops_stop_after_one_night() {
        let inst = Instance::from_indices(&[&[1, 0], &[0, 1]], &[&[1, 0], &[0, 1]]).unwrap();
        let r = run_men(&inst, RunOptions::traced());
        assert_eq!(r.stats.nights, 1);
        assert_eq!(r.stats.rejections, 0);
    }

    #[test]
    fn resume_from_stable_matching_is_a_fixed_point() {
        let inst = two_stable();
        let mu = run(&inst, Side::Women);
        let r = run_from_state(&inst, &mu, RunOptions::default()).unwrap();
        assert_eq!(r.matching, mu);
        assert_eq!(r.stats.rejections, 0);
    }

    #[test]
    fn resume_rejects_man_placed_off_his_list() {
        let inst = Instance::from_indices(&[&[0]], &[&[]]).unwrap();
        let mu = Matching::from_pairs(1, 1, [(WomanId(0), ManId(0))]).unwrap();
        assert!(matches!(
            run_from_state(&inst, &mu, RunOptions::default()),
            Err(Error::MalformedState(_))
        ));
    }

    #[test]
    fn blocking_pairs_of_partial_matching() {
        let inst = two_stable();
        let mu = Matching::from_pairs(2, 2, [(WomanId(0), ManId(0))]).unwrap();
        let rep = find_blocking_pairs(&inst, &mu).unwrap();
        // w0 ranks m1 above m0 and m1 is single, so (w0, m1) blocks as well.
        assert_eq!(rep.blocking, vec![(WomanId(0), ManId(1)), (WomanId(1), ManId(1))]);
        let empty = Instance::from_indices(&[&[0]], &[&[0]]).unwrap();
        let rep = find_blocking_pairs(&empty, &Matching::empty(1, 1)).unwrap();
        assert_eq!(rep.blocking, vec![(WomanId(0), ManId(0))]);
    }

    #[test]
    fn sequential_policies_agree() {
        let inst = two_stable();
        for p in [
            OrderPolicy::LowestIndex,
            OrderPolicy::HighestIndex,
            OrderPolicy::Fifo,
            OrderPolicy::Lifo,
            OrderPolicy::Random(7),
        ] {
            assert_eq!(run_sequential(&inst, Side::Men, p), run(&inst, Side::Men));
            assert_eq!(run_sequential(&inst, Side::Women, p), run(&inst, Side::Women));
        }
    }

    #[test]
    fn trace_prints_night_lines() {
        let inst = Instance::from_indices(&[&[0, 1], &[0, 1]], &[&[0, 1], &[0, 1]]).unwrap();
        let r = run_men(&inst, RunOptions::traced());
        let text = r.trace.unwrap().to_string();
        assert_eq!(text, "night 1: m0 -> w0, m1 -> w0; reject w0 x m1\nnight 2: m1 -> w1\n");
    }
}
