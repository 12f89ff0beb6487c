//! Synthesis of women's profiles that force a target matching.
//!
//! Every entry point returns a women's profile under which the target is
//! the unique stable matching (both proposing runs agree on it), together
//! with blacklist statistics.

mod build_cor;
mod cycles;
mod synth;

use std::collections::BTreeSet;
use std::fmt;

pub use build_cor::{compute_build_cor, compute_build_cor_with, BuildCor};
pub use cycles::{cycle_of, cycle_partition, Cycle, TodoSet};
pub use synth::{manipulate_flat, manipulate_general, manipulate_partial, SynthesisOptions};

use crate::error::{Error, Result};
use crate::model::{Instance, ManId, Matching, PreferenceList, Profile, WomanId, WomenProfile};

/// Which construction produced a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Flat,
    General,
    Partial,
    Naive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Flat => "flat",
            Mode::General => "general",
            Mode::Partial => "partial",
            Mode::Naive => "naive",
        })
    }
}

/// Blacklist statistics over a set of women.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BlacklistStats {
    /// Women with a nonempty blacklist.
    pub n_b: usize,
    /// Sum of blacklist sizes.
    pub combined: usize,
    /// No man is blacklisted by two of these women.
    pub disjoint: bool,
}

impl BlacklistStats {
    pub fn of(profile: &WomenProfile, women: impl IntoIterator<Item = WomanId>) -> Self {
        let mut seen = BTreeSet::new();
        let mut stats = BlacklistStats {
            disjoint: true,
            ..Default::default()
        };
        for w in women {
            let b = profile[w.0].blacklist();
            if !b.is_empty() {
                stats.n_b += 1;
            }
            stats.combined += b.len();
            for m in b {
                if !seen.insert(m) {
                    stats.disjoint = false;
                }
            }
        }
        stats
    }
}

/// Step counts of a synthesis run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Iterations {
    /// Steps where the chosen woman never rejected anyone.
    pub cheap: usize,
    /// Steps that merged a new cycle into an ongoing run.
    pub expensive: usize,
    /// Steps driven by a man left unmatched by the target.
    pub prephase: usize,
    /// Proposals simulated inside the in-place cycle triggering.
    pub proposals: usize,
    /// For each step outside the pre-phase, the last night on which the
    /// chosen woman was newly serenaded.
    pub timings: Vec<usize>,
}

impl Iterations {
    pub fn total(&self) -> usize {
        self.cheap + self.expensive + self.prephase
    }
}

#[derive(Clone, Debug)]
pub struct ManipulationResult {
    pub prefs_w: WomenProfile,
    /// Over the women matched by the target.
    pub stats: BlacklistStats,
    pub iterations: Iterations,
    pub mode: Mode,
    /// Matched women acceptable to some man the target leaves single.
    pub n_h: usize,
    /// The men-optimal matching under the initial profile, before any
    /// blacklist is introduced.
    pub first_matching: Matching,
}

impl ManipulationResult {
    /// Recomputes the statistics from the profile.
    pub fn recomputed_stats(&self, mu: &Matching) -> BlacklistStats {
        BlacklistStats::of(&self.prefs_w, mu.matched_women())
    }

    /// The stats footer line used by the text output.
    pub fn footer(&self) -> String {
        format!(
            "# n_b={} combined={} disjoint={} mode={}",
            self.stats.n_b, self.stats.combined, self.stats.disjoint, self.mode
        )
    }
}

pub(crate) fn check_m_rational(instance: &Instance, mu: &Matching) -> Result<()> {
    instance.check_matching(mu)?;
    if !mu.is_consistent() {
        return Err(Error::Malformed("matching is not one-to-one".into()));
    }
    for (w, m) in mu.pairs() {
        if !instance.man(m).accepts(w) {
            return Err(Error::Domain(format!(
                "target is not M-rational: {m} blacklists his partner {w}"
            )));
        }
    }
    Ok(())
}

/// Men's top choices are pairwise distinct (and nobody's list is empty).
pub fn has_distinct_tops(instance: &Instance) -> bool {
    let mut seen = vec![false; instance.n_women()];
    instance.prefs_m().lists().iter().all(|l| match l.top() {
        Some(w) => !std::mem::replace(&mut seen[w.0], true),
        None => false,
    })
}

/// Each woman keeps only her target partner.
pub fn naive_truncation(instance: &Instance, mu: &Matching) -> Result<ManipulationResult> {
    check_m_rational(instance, mu)?;
    let nm = instance.n_men();
    let lists = (0..instance.n_women())
        .map(|w| {
            let m = mu.partner_of_woman(WomanId(w)).ok_or_else(|| {
                Error::Domain(format!("w{w} is unmatched; truncation needs every woman matched"))
            })?;
            PreferenceList::new(vec![m], nm)
        })
        .collect::<Result<Vec<_>>>()?;
    let prefs_w = Profile::new(lists, nm)?;
    Ok(ManipulationResult {
        stats: BlacklistStats::of(&prefs_w, mu.matched_women()),
        prefs_w,
        iterations: Iterations::default(),
        mode: Mode::Naive,
        n_h: count_helped(instance, mu),
        first_matching: mu.clone(),
    })
}

/// Matched women acceptable to at least one man the target leaves single.
pub fn count_helped(instance: &Instance, mu: &Matching) -> usize {
    let single: Vec<ManId> = (0..instance.n_men())
        .map(ManId)
        .filter(|&m| mu.partner_of_man(m).is_none())
        .collect();
    mu.matched_women()
        .into_iter()
        .filter(|&w| single.iter().any(|&m| instance.man(m).accepts(w)))
        .count()
}

/// Requested construction for [`manipulate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeRequest {
    /// Flat when tops are distinct and the target is perfect on a balanced
    /// market; partial when the sides differ or the target is partial;
    /// general otherwise.
    Auto,
    Flat,
    General,
    Partial,
}

pub fn manipulate(
    instance: &Instance,
    mu: &Matching,
    mode: ModeRequest,
    opts: SynthesisOptions,
) -> Result<ManipulationResult> {
    let mode = match mode {
        ModeRequest::Auto => {
            let perfect = instance.is_balanced() && mu.is_perfect();
            if !perfect {
                ModeRequest::Partial
            } else if has_distinct_tops(instance) {
                ModeRequest::Flat
            } else {
                ModeRequest::General
            }
        }
        m => m,
    };
    match mode {
        ModeRequest::Flat => manipulate_flat(instance, mu, opts),
        ModeRequest::General => manipulate_general(instance, mu, opts),
        ModeRequest::Partial => manipulate_partial(instance, mu, opts),
        ModeRequest::Auto => unreachable!(),
    }
}
