//! Deferred acceptance with divorces.
//!
//! A run is split into seasons. Each season is an ordinary run, resumed from
//! where the previous one stopped; between seasons one woman may divorce her
//! partner, who then resumes proposing down his list. Blacklists and
//! divorces are interchangeable: a woman can hold a man she would have
//! blacklisted and divorce him later, and conversely a divorcing woman can
//! blacklist the men her divorces end up displacing.

use std::collections::BTreeSet;
use std::fmt;

use crate::engine::{resume, Hooks, MenTrace};
use crate::error::{Error, Result};
use crate::manipulation::check_m_rational;
use crate::model::{Instance, ManId, Matching, PreferenceList, Profile, WomanId, WomenProfile};

/// How one woman decides whether to divorce at the end of a season.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DivorceStrategy {
    Never,
    /// Divorce whenever the current partner is in the set.
    DivorceIfPartnerIn(BTreeSet<ManId>),
    /// `(season, man)`: from the end of that season on, divorce `man` if he
    /// is the partner. A request is dropped once it is granted, or when it is
    /// due and the partner is someone else.
    Scripted(Vec<(usize, ManId)>),
}

/// Picks one of the women asking to divorce at a season boundary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Arbiter {
    #[default]
    LowestIndex,
    HighestIndex,
}

#[derive(Clone, Debug)]
pub struct Season {
    pub trace: MenTrace,
    /// Matching at the end of the season, before any divorce.
    pub matching: Matching,
    /// The divorce granted at the end of the season.
    pub divorce: Option<(WomanId, ManId)>,
}

#[derive(Clone, Debug, Default)]
pub struct SeasonLog {
    pub seasons: Vec<Season>,
}

impl SeasonLog {
    pub fn divorce_count(&self) -> usize {
        self.divorces().count()
    }

    pub fn divorces(&self) -> impl Iterator<Item = (WomanId, ManId)> + '_ {
        self.seasons.iter().filter_map(|s| s.divorce)
    }
}

impl fmt::Display for SeasonLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.seasons.iter().enumerate() {
            writeln!(f, "season {}:", i + 1)?;
            write!(f, "{}", s.trace)?;
            writeln!(f, "end: {:?}", s.matching)?;
            if let Some((w, m)) = s.divorce {
                writeln!(f, "divorce: {w} x {m}")?;
            }
        }
        Ok(())
    }
}

/// Runs seasons until nobody asks for a divorce. The men propose; women's
/// lists come from `instance`.
pub fn simulate_with_divorces(
    instance: &Instance,
    strategies: &[DivorceStrategy],
    arbiter: Arbiter,
) -> Result<(Matching, SeasonLog)> {
    let (nw, nm) = (instance.n_women(), instance.n_men());
    if strategies.len() != nw {
        return Err(Error::Malformed(format!(
            "{} strategies for {nw} women",
            strategies.len()
        )));
    }
    // Scripted requests still pending, per woman.
    let mut pending: Vec<Vec<(usize, ManId)>> = strategies
        .iter()
        .map(|s| match s {
            DivorceStrategy::Scripted(r) => r.clone(),
            _ => Vec::new(),
        })
        .collect();
    let guard = nm * nw + 1;

    let mut log = SeasonLog::default();
    let mut current = Matching::empty(nw, nm);
    let mut divorce: Option<WomanId> = None;
    loop {
        let season = log.seasons.len() + 1;
        let run = if season == 1 {
            // A fresh run is a resumed run where every man starts at his top.
            crate::engine::run_men(instance, crate::engine::RunOptions::traced())
        } else {
            let hooks = Hooks {
                divorce: divorce.map(|w| w.0),
                defer: None,
            };
            resume(instance, &current, hooks, true)?
        };
        current = run.matching;
        let trace = run.trace.expect("trace was requested");

        let mut asking = Vec::new();
        for (w, strategy) in strategies.iter().enumerate() {
            let w = WomanId(w);
            let Some(partner) = current.partner_of_woman(w) else {
                if let DivorceStrategy::Scripted(_) = strategy {
                    pending[w.0].retain(|&(s, _)| s > season);
                }
                continue;
            };
            let wants = match strategy {
                DivorceStrategy::Never => false,
                DivorceStrategy::DivorceIfPartnerIn(set) => set.contains(&partner),
                DivorceStrategy::Scripted(_) => {
                    pending[w.0].retain(|&(s, m)| s > season || m == partner);
                    pending[w.0].iter().any(|&(s, _)| s <= season)
                }
            };
            if wants {
                asking.push(w);
            }
        }
        let chosen = match arbiter {
            Arbiter::LowestIndex => asking.first().copied(),
            Arbiter::HighestIndex => asking.last().copied(),
        };
        let granted = chosen.map(|w| (w, current.partner_of_woman(w).unwrap()));
        if let Some((w, m)) = granted {
            if let Some(i) = pending[w.0].iter().position(|&(s, x)| s <= season && x == m) {
                pending[w.0].remove(i);
            }
        }
        log.seasons.push(Season {
            trace,
            matching: current.clone(),
            divorce: granted,
        });
        match chosen {
            None => return Ok((current, log)),
            Some(w) => {
                if log.divorce_count() >= guard {
                    return Err(Error::DivorceCycle(log.divorce_count()));
                }
                divorce = Some(w);
            }
        }
    }
}

/// A women's profile without blacklists plus the divorces that force the
/// target.
#[derive(Clone, Debug)]
pub struct DivorcePlan {
    pub prefs_w: WomenProfile,
    pub strategies: Vec<DivorceStrategy>,
}

/// Builds a blacklist-free profile and at most one scripted divorce per
/// woman under which the seasons end at `mu`. Each season after the first
/// is opened by the divorce whose rejection cycle is longest.
pub fn one_divorce_strategy(instance: &Instance, mu: &Matching) -> Result<DivorcePlan> {
    instance.check_matching(mu)?;
    if !instance.is_balanced() || !mu.is_perfect() {
        return Err(Error::Domain(
            "divorce planning needs equal sides and a perfect target".into(),
        ));
    }
    check_m_rational(instance, mu)?;
    let (n, nm) = (instance.n_women(), instance.n_men());

    let lists = (0..n)
        .map(|w| {
            let top = mu.partner_of_woman(WomanId(w)).unwrap();
            let mut ranking = vec![top];
            ranking.extend((0..nm).map(ManId).filter(|&m| m != top));
            PreferenceList::new(ranking, nm)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut working = instance.with_women(Profile::new(lists, nm)?)?;
    let mut current = crate::engine::run(&working, crate::model::Side::Men);
    let mut strategies = vec![DivorceStrategy::Never; n];
    let mut season = 1;

    while current != *mu {
        if season > n {
            return Err(Error::ContractViolation("more than n - 1 divorces planned".into()));
        }
        // Every woman still waiting keeps her current partner second.
        let mut prefs_w = working.prefs_w().clone();
        for (w, m) in current.pairs() {
            if mu.partner_of_woman(w) != Some(m) {
                prefs_w.list_mut(w.0).move_to(m, 1);
            }
        }
        working = working.with_women(prefs_w)?;

        let mut best: Option<(usize, WomanId, MenTrace)> = None;
        for (w, m) in current.pairs() {
            if mu.partner_of_woman(w) == Some(m) {
                continue;
            }
            let hooks = Hooks {
                divorce: Some(w.0),
                defer: None,
            };
            let trace = resume(&working, &current, hooks, true)?.trace.unwrap();
            let length = trace.rejection_count();
            if best.as_ref().is_none_or(|(l, _, _)| length > *l) {
                best = Some((length, w, trace));
            }
        }
        let (_, w_tilde, trace) = best.expect("current differs from the target");
        let target = mu.partner_of_woman(w_tilde).unwrap();
        let w_hat = current
            .partner_of_man(target)
            .ok_or_else(|| Error::ContractViolation(format!("{target} is unmatched")))?;
        let held = current.partner_of_woman(w_hat).unwrap();
        let drops_held = trace.rejections().any(|(_, r)| r.by == w_hat && r.rejected == held);
        if !drops_held {
            let m_tilde = trace
                .rejections()
                .find(|(_, r)| r.by == w_hat && r.in_favour_of == Some(held))
                .map(|(_, r)| r.rejected)
                .ok_or_else(|| {
                    Error::ContractViolation(format!("{w_hat} rejects nobody in favour of {held}"))
                })?;
            let mut prefs_w = working.prefs_w().clone();
            prefs_w.list_mut(w_hat.0).move_to(m_tilde, 1);
            working = working.with_women(prefs_w)?;
        }

        let divorced = current.partner_of_woman(w_tilde).unwrap();
        match &mut strategies[w_tilde.0] {
            DivorceStrategy::Scripted(reqs) => reqs.push((season, divorced)),
            s => *s = DivorceStrategy::Scripted(vec![(season, divorced)]),
        }
        let hooks = Hooks {
            divorce: Some(w_tilde.0),
            defer: None,
        };
        current = resume(&working, &current, hooks, false)?.matching;
        if current.partner_of_woman(w_tilde) != Some(target) {
            return Err(Error::ContractViolation(format!(
                "season opened by {w_tilde} does not end with her target"
            )));
        }
        season += 1;
    }
    Ok(DivorcePlan {
        prefs_w: working.prefs_w().clone(),
        strategies,
    })
}

/// Each blacklist moves to the end of its list and becomes a standing
/// request to divorce any of those men.
pub fn blacklist_to_divorce(prefs_w: &WomenProfile) -> Result<(WomenProfile, Vec<DivorceStrategy>)> {
    let nm = prefs_w.n_opposite();
    let mut lists = Vec::with_capacity(prefs_w.len());
    let mut strategies = Vec::with_capacity(prefs_w.len());
    for l in prefs_w.lists() {
        let b = l.blacklist();
        let mut ranking = l.ranking().to_vec();
        ranking.extend(&b);
        lists.push(PreferenceList::new(ranking, nm)?);
        strategies.push(if b.is_empty() {
            DivorceStrategy::Never
        } else {
            DivorceStrategy::DivorceIfPartnerIn(b.into_iter().collect())
        });
    }
    Ok((Profile::new(lists, nm)?, strategies))
}

/// Replaces every divorcing woman by one who blacklists the men she
/// divorces together with everyone she turns away in favour of a man
/// already blacklisted. All closures come from the same simulated run, so
/// scripted requests of other women keep their season numbers. The men's
/// lists come from `instance`; its women's side is ignored.
pub fn divorce_to_blacklist(
    instance: &Instance,
    prefs_w: &WomenProfile,
    strategies: &[DivorceStrategy],
) -> Result<WomenProfile> {
    let working = instance.with_women(prefs_w.clone())?;
    let (_, log) = simulate_with_divorces(&working, strategies, Arbiter::default())?;
    let mut profile = prefs_w.clone();
    for (w, strategy) in strategies.iter().enumerate() {
        if *strategy == DivorceStrategy::Never {
            continue;
        }
        let wid = WomanId(w);
        if prefs_w[w].blacklist_len() > 0 {
            return Err(Error::Domain(format!(
                "{wid} both divorces and blacklists; convert her blacklist first"
            )));
        }
        let mut b: BTreeSet<ManId> = log.divorces().filter(|&(x, _)| x == wid).map(|(_, m)| m).collect();
        let rejections: Vec<(ManId, ManId)> = log
            .seasons
            .iter()
            .flat_map(|s| s.trace.rejections())
            .filter(|(_, r)| r.by == wid)
            .filter_map(|(_, r)| r.in_favour_of.map(|f| (r.rejected, f)))
            .collect();
        loop {
            let before = b.len();
            for &(m, favoured) in &rejections {
                if b.contains(&favoured) {
                    b.insert(m);
                }
            }
            if b.len() == before {
                break;
            }
        }
        let ranking: Vec<ManId> = prefs_w[w].ranking().iter().copied().filter(|m| !b.contains(m)).collect();
        profile.set_list(w, PreferenceList::new(ranking, instance.n_men())?)?;
    }
    Ok(profile)
}
