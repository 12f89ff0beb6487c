//! The inductive constructions behind the three entry points.
//!
//! All of them keep a working women's profile in which every matched woman
//! ranks her target partner first and, while she is not yet with him, her
//! current men-optimal partner second. Each step fixes at least one more
//! rejection cycle until the men-optimal matching is the target.

use crate::engine::{run_men, run_women, simulate, Hooks, MenTrace, Outcome, RunOptions};
use crate::error::{Error, Result};
use crate::manipulation::build_cor::{compute_build_cor_with, BuildCor};
use crate::manipulation::cycles::TodoSet;
use crate::manipulation::{
    check_m_rational, count_helped, has_distinct_tops, BlacklistStats, Iterations, ManipulationResult, Mode,
};
use crate::model::{Instance, ManId, Matching, MenProfile, PreferenceList, Profile, WomanId, WomenProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthesisOptions {
    /// Treat any woman who never rejects anyone as a cheap step, whatever
    /// her last serenade night.
    pub shortcut: bool,
    /// Check the induction invariants after every step.
    pub check_invariants: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            shortcut: true,
            check_invariants: cfg!(debug_assertions),
        }
    }
}

fn violation(msg: impl Into<String>) -> Error {
    Error::ContractViolation(msg.into())
}

fn men_run(
    prefs_m: &MenProfile,
    prefs_w: &WomenProfile,
    hooks: Hooks,
    trace: bool,
) -> Result<Outcome<ManId, WomanId>> {
    simulate::<ManId, WomanId, _, _>(prefs_m.lists(), prefs_w.lists(), None, hooks, trace)
}

fn holder_matching(holder: &[Option<usize>], n_men: usize) -> Result<Matching> {
    let partners: Vec<Option<ManId>> = holder.iter().map(|m| m.map(ManId)).collect();
    Matching::from_women(&partners, n_men)
}

fn men_optimal(prefs_m: &MenProfile, prefs_w: &WomenProfile) -> Result<Matching> {
    let out = men_run(prefs_m, prefs_w, Hooks::default(), false)?;
    holder_matching(&out.holder, prefs_m.len())
}

/// Target partner first, then the other matched men, then the men the
/// target leaves single, each group ascending. Unmatched women accept nobody.
fn initial_profile(instance: &Instance, mu: &Matching) -> Result<WomenProfile> {
    let nm = instance.n_men();
    let (matched, single): (Vec<ManId>, Vec<ManId>) =
        (0..nm).map(ManId).partition(|&m| mu.partner_of_man(m).is_some());
    let lists = (0..instance.n_women())
        .map(|w| match mu.partner_of_woman(WomanId(w)) {
            None => PreferenceList::new(Vec::new(), nm),
            Some(top) => {
                let mut ranking = vec![top];
                ranking.extend(matched.iter().chain(&single).copied().filter(|&m| m != top));
                PreferenceList::new(ranking, nm)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Profile::new(lists, nm)
}

/// Every woman not yet with her target moves her current partner to second.
fn promote_current(prefs_w: &mut WomenProfile, current: &Matching, mu: &Matching) {
    for (w, m) in current.pairs() {
        if mu.partner_of_woman(w).is_some_and(|t| t != m) {
            prefs_w.list_mut(w.0).move_to(m, 1);
        }
    }
}

fn finish(
    instance: &Instance,
    mu: &Matching,
    prefs_w: WomenProfile,
    iterations: Iterations,
    mode: Mode,
    first_matching: Matching,
) -> Result<ManipulationResult> {
    let forced = instance.with_women(prefs_w)?;
    let by_men = run_men(&forced, RunOptions::default()).matching;
    let by_women = run_women(&forced, RunOptions::default()).matching;
    if by_men != *mu || by_women != *mu {
        return Err(violation(format!(
            "synthesized profile yields {by_men:?} (men) and {by_women:?} (women), not {mu:?}"
        )));
    }
    let prefs_w = forced.prefs_w().clone();
    Ok(ManipulationResult {
        stats: BlacklistStats::of(&prefs_w, mu.matched_women()),
        prefs_w,
        iterations,
        mode,
        n_h: count_helped(instance, mu),
        first_matching,
    })
}

/// Men's tops are pairwise distinct, so the first night is already a
/// matching. Repeatedly triggers the rejection cycle of the lowest woman
/// not yet with her target.
pub fn manipulate_flat(instance: &Instance, mu: &Matching, opts: SynthesisOptions) -> Result<ManipulationResult> {
    if !has_distinct_tops(instance) {
        return Err(Error::WrongEntryPoint(
            "men's top choices are not pairwise distinct; use the general construction".into(),
        ));
    }
    require_perfect(instance, mu)?;
    check_m_rational(instance, mu)?;

    let prefs_m = instance.prefs_m();
    let n = instance.n_women();
    let tops: Vec<Option<ManId>> = {
        let mut v = vec![None; n];
        for (m, l) in prefs_m.lists().iter().enumerate() {
            v[l.top().expect("distinct tops imply nonempty lists").0] = Some(ManId(m));
        }
        v
    };
    let first = Matching::from_women(&tops, instance.n_men())?;
    let mut prefs_w = initial_profile(instance, mu)?;
    promote_current(&mut prefs_w, &first, mu);

    let mut iters = Iterations::default();
    let mut current = first.clone();
    loop {
        let todo = TodoSet::differing(&current, mu);
        let Some(w) = todo.iter().next() else { break };
        let bc = compute_build_cor_with(&current, mu, prefs_m, w, &mut prefs_w)?;
        iters.cheap += 1;
        iters.proposals += bc.proposals;
        if opts.check_invariants {
            check_step(prefs_m, &prefs_w, mu, &current, &bc.matching)?;
        }
        current = bc.matching;
    }
    finish(instance, mu, prefs_w, iters, Mode::Flat, first)
}

/// Balanced market, perfect target, arbitrary men's lists.
pub fn manipulate_general(
    instance: &Instance,
    mu: &Matching,
    opts: SynthesisOptions,
) -> Result<ManipulationResult> {
    require_perfect(instance, mu)?;
    check_m_rational(instance, mu)?;
    synthesize(instance, mu, opts, Mode::General)
}

/// Any market sizes and any M-rational target.
pub fn manipulate_partial(
    instance: &Instance,
    mu: &Matching,
    opts: SynthesisOptions,
) -> Result<ManipulationResult> {
    check_m_rational(instance, mu)?;
    synthesize(instance, mu, opts, Mode::Partial)
}

fn require_perfect(instance: &Instance, mu: &Matching) -> Result<()> {
    instance.check_matching(mu)?;
    if !instance.is_balanced() {
        return Err(Error::Domain(format!(
            "{} women and {} men; the construction needs equal sides",
            instance.n_women(),
            instance.n_men()
        )));
    }
    if !mu.is_perfect() {
        return Err(Error::Domain("target matching is not perfect".into()));
    }
    Ok(())
}

/// Woman chosen for one step of the main phase.
struct Choice {
    woman: WomanId,
    night: usize,
    cheap: bool,
}

fn choose(trace: &MenTrace, todo: &TodoSet, shortcut: bool, n_women: usize) -> Result<Choice> {
    let mut rejected_any = vec![false; n_women];
    for (_, r) in trace.rejections() {
        rejected_any[r.by.0] = true;
    }
    let night_of = |w: WomanId| {
        trace
            .last_new_serenade(w)
            .ok_or_else(|| violation(format!("{w} is never serenaded although she is matched")))
    };
    if shortcut {
        if let Some(w) = todo.iter().find(|w| !rejected_any[w.0]) {
            return Ok(Choice {
                woman: w,
                night: night_of(w)?,
                cheap: true,
            });
        }
    }
    let mut best: Option<(usize, WomanId)> = None;
    for w in todo.iter() {
        let t = night_of(w)?;
        if best.is_none_or(|(bt, _)| t > bt) {
            best = Some((t, w));
        }
    }
    let (night, woman) = best.ok_or_else(|| violation("no woman left to fix"))?;
    Ok(Choice {
        woman,
        night,
        cheap: !rejected_any[woman.0],
    })
}

fn synthesize(instance: &Instance, mu: &Matching, opts: SynthesisOptions, mode: Mode) -> Result<ManipulationResult> {
    let prefs_m = instance.prefs_m();
    let (nw, nm) = (instance.n_women(), instance.n_men());
    let mut prefs_w = initial_profile(instance, mu)?;
    let first = men_optimal(prefs_m, &prefs_w)?;
    for m in (0..nm).map(ManId) {
        if first.partner_of_man(m).is_some() != mu.partner_of_man(m).is_some() {
            return Err(violation(format!("{m} is matched in exactly one of the target and the first run")));
        }
    }
    promote_current(&mut prefs_w, &first, mu);

    // For each matched woman, the lowest single man who accepts her.
    let single: Vec<ManId> = (0..nm).map(ManId).filter(|&m| mu.partner_of_man(m).is_none()).collect();
    let helper: Vec<Option<ManId>> = (0..nw)
        .map(|w| {
            let w = WomanId(w);
            mu.partner_of_woman(w)?;
            single.iter().copied().find(|&m| prefs_m[m.0].accepts(w))
        })
        .collect();

    let mut iters = Iterations::default();
    let mut current = first.clone();
    loop {
        let todo = TodoSet::differing(&current, mu);
        if todo.is_empty() {
            break;
        }

        let helped = todo.iter().find_map(|w| helper[w.0].map(|m| (w, m)));
        let bc: BuildCor = if let Some((w_tilde, m_tilde)) = helped {
            let mut list = prefs_w[w_tilde.0].clone();
            let bc = compute_build_cor_with(&current, mu, prefs_m, w_tilde, &mut prefs_w)?;
            list.move_to(m_tilde, 1);
            prefs_w.set_list(w_tilde.0, list)?;
            iters.prephase += 1;
            bc
        } else {
            let run = men_run(prefs_m, &prefs_w, Hooks::default(), true)?;
            let trace = run.trace.expect("trace was requested");
            let choice = choose(&trace, &todo, opts.shortcut, nw)?;
            iters.timings.push(choice.night);
            if choice.cheap {
                iters.cheap += 1;
                compute_build_cor_with(&current, mu, prefs_m, choice.woman, &mut prefs_w)?
            } else {
                iters.expensive += 1;
                expensive_step(prefs_m, &mut prefs_w, mu, &current, &todo, &trace, &choice)?
            }
        };
        iters.proposals += bc.proposals;
        if opts.check_invariants {
            check_step(prefs_m, &prefs_w, mu, &current, &bc.matching)?;
        }
        current = bc.matching;
    }
    finish(instance, mu, prefs_w, iters, mode, first)
}

/// The chosen woman rejects men on her last serenade night: fix her cycle
/// by promoting one of those men instead of blacklisting, and keep every
/// man whose partner improves from reaching the women he skips.
fn expensive_step(
    prefs_m: &MenProfile,
    prefs_w: &mut WomenProfile,
    mu: &Matching,
    current: &Matching,
    todo: &TodoSet,
    trace: &MenTrace,
    choice: &Choice,
) -> Result<BuildCor> {
    let w_tilde = choice.woman;
    let before = prefs_w[w_tilde.0].clone();
    let m_tilde = trace.nights[choice.night - 1]
        .rejections
        .iter()
        .filter(|r| r.by == w_tilde)
        .map(|r| r.rejected)
        .max_by_key(|&m| before.rank_of(m).unwrap_or(usize::MAX))
        .ok_or_else(|| violation(format!("{w_tilde} rejects nobody on night {}", choice.night)))?;

    // First part of the run: everything but that one rejection.
    let half = men_run(
        prefs_m,
        prefs_w,
        Hooks {
            divorce: None,
            defer: Some((w_tilde.0, m_tilde.0, choice.night)),
        },
        false,
    )?;
    if half.parked != Some(m_tilde.0) {
        return Err(violation(format!("rejection of {m_tilde} by {w_tilde} never happens")));
    }
    let mut empty = (0..mu.n_women())
        .map(WomanId)
        .filter(|&w| mu.partner_of_woman(w).is_some() && half.holder[w.0].is_none());
    let w_hat = empty.next();
    if let Some(other) = empty.next() {
        return Err(violation(format!(
            "both {} and {other} are left alone after the first part of the run",
            w_hat.unwrap()
        )));
    }

    let bc = compute_build_cor_with(current, mu, prefs_m, w_tilde, prefs_w)?;

    let mut list = before;
    list.move_to(m_tilde, 1);
    prefs_w.set_list(w_tilde.0, list)?;

    for (m, target) in mu.men_partners().iter().enumerate() {
        let (m, Some(target)) = (ManId(m), *target) else { continue };
        let Some(was) = current.partner_of_man(m) else { continue };
        if was == target || bc.matching.partner_of_man(m) != Some(target) {
            continue;
        }
        let ranking = prefs_m[m.0].ranking();
        let (Some(a), Some(b)) = (prefs_m[m.0].rank_of(was), prefs_m[m.0].rank_of(target)) else {
            return Err(violation(format!("{m} does not list both {was} and {target}")));
        };
        for &w in &ranking[(a + 1).min(b)..b] {
            if todo.contains(w) || mu.partner_of_woman(w).is_none() {
                continue;
            }
            if Some(w) == w_hat {
                prefs_w.list_mut(w.0).remove(m);
            } else {
                let anchor = half.holder[w.0]
                    .map(ManId)
                    .ok_or_else(|| violation(format!("{w} holds nobody after the first part of the run")))?;
                prefs_w.list_mut(w.0).demote_below(m, anchor);
            }
        }
    }
    Ok(bc)
}

/// Checks the induction invariants after one step.
fn check_step(
    prefs_m: &MenProfile,
    prefs_w: &WomenProfile,
    mu: &Matching,
    prev: &Matching,
    next: &Matching,
) -> Result<()> {
    let actual = men_optimal(prefs_m, prefs_w)?;
    if actual != *next {
        return Err(violation(format!("profile yields {actual:?}, expected {next:?}")));
    }
    let fixed = |x: &Matching| {
        mu.pairs()
            .filter(|&(w, m)| x.partner_of_woman(w) == Some(m))
            .count()
    };
    let fixed_prev: Vec<WomanId> = mu
        .pairs()
        .filter(|&(w, m)| prev.partner_of_woman(w) == Some(m))
        .map(|(w, _)| w)
        .collect();
    if fixed(next) <= fixed(prev) || fixed_prev.iter().any(|&w| next.partner_of_woman(w) != mu.partner_of_woman(w)) {
        return Err(violation("the set of women with their target partner did not grow"));
    }
    for (w, m) in mu.pairs() {
        let now = next
            .partner_of_man(m)
            .ok_or_else(|| violation(format!("{m} is unmatched mid-construction")))?;
        let list = &prefs_m[m.0];
        match (list.rank_of(now), list.rank_of(w)) {
            (Some(a), Some(b)) if a <= b => {}
            _ => return Err(violation(format!("{m} prefers his target {w} to {now}"))),
        }
        let wl = &prefs_w[w.0];
        if wl.top() != Some(m) {
            return Err(violation(format!("{w} does not rank {m} first")));
        }
        if let Some(cur) = next.partner_of_woman(w).filter(|&c| c != m) {
            if wl.ranking().get(1) != Some(&cur) {
                return Err(violation(format!("{w} does not rank {cur} second")));
            }
        }
    }
    let mut blacklisted_by: Vec<Option<WomanId>> = vec![None; mu.n_men()];
    for w in mu.matched_women() {
        for b in prefs_w[w.0].blacklist() {
            if mu.partner_of_man(b).is_none() {
                return Err(violation(format!("{w} blacklists {b}, whom the target leaves single")));
            }
            if let Some(other) = blacklisted_by[b.0].replace(w) {
                return Err(violation(format!("{b} is blacklisted by both {other} and {w}")));
            }
            if next.partner_of_man(b) != mu.partner_of_man(b) {
                return Err(violation(format!("{b} is blacklisted but not yet with his target")));
            }
        }
    }
    for w in mu.matched_women() {
        if prefs_w[w.0].blacklist_len() == 0 {
            continue;
        }
        let m = mu.partner_of_woman(w).unwrap();
        if let Some(by) = blacklisted_by[m.0] {
            return Err(violation(format!("{w} blacklists but her target {m} is blacklisted by {by}")));
        }
        if next.partner_of_man(m) != Some(w) {
            return Err(violation(format!("{w} blacklists before being fixed")));
        }
    }
    Ok(())
}
