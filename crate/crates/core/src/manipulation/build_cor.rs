//! Triggering one rejection cycle in place.
//!
//! Given the provisional matching `mu_prime` that a run has settled on and
//! a woman `w_tilde` not yet with her target partner, make her reject
//! `mu_prime(w_tilde)` and simulate the rest of the resumed run directly,
//! without re-running deferred acceptance. Women still waiting for their
//! target partner who are reached by a displaced man promote him to second
//! place and hold him, which drags their whole cycle along. The woman who
//! started it blacklists exactly the men she turns away.

use crate::error::{Error, Result};
use crate::manipulation::cycles::TodoSet;
use crate::model::{ManId, Matching, MenProfile, WomanId, WomenProfile};

/// What a call to [`compute_build_cor_with`] did besides editing the
/// profile.
#[derive(Clone, Debug)]
pub struct BuildCor {
    /// The matching the resumed run converges to.
    pub matching: Matching,
    /// The men `w_tilde` ends up blacklisting.
    pub blacklist: Vec<ManId>,
    /// `(woman, man)` pairs where the man was promoted to second place.
    pub promotions: Vec<(WomanId, ManId)>,
    /// Proposals simulated by the main loop.
    pub proposals: usize,
}

/// Removes the cycle of `w` (following `mu_prime`, then `mu`) from `todo`.
fn mark_done_cycle_of(todo: &mut TodoSet, mu_prime: &Matching, mu: &Matching, w: WomanId) -> Result<()> {
    let mut cur = w;
    for _ in 0..=mu.n_women() {
        todo.remove(cur);
        let next = mu_prime
            .partner_of_woman(cur)
            .and_then(|m| mu.partner_of_man(m))
            .ok_or_else(|| Error::ContractViolation(format!("cycle of {w} leaves the matched women")))?;
        if next == w {
            return Ok(());
        }
        cur = next;
    }
    Err(Error::ContractViolation(format!("cycle of {w} does not close")))
}

/// Edits `prefs_w` so that, resuming from `mu_prime`, the run ends with
/// `w_tilde` (and her whole cycle) matched as in `mu`, and returns the
/// matching that run reaches.
///
/// Requires every man to weakly prefer `mu_prime(m)` to `mu(m)` and to list
/// both, and every woman to rank `mu(w)` first and, when different,
/// `mu_prime(w)` second. These are checked only as far as the simulation
/// touches them.
pub fn compute_build_cor(
    mu_prime: &Matching,
    mu: &Matching,
    prefs_m: &MenProfile,
    w_tilde: WomanId,
    prefs_w: &mut WomenProfile,
) -> Result<Matching> {
    Ok(compute_build_cor_with(mu_prime, mu, prefs_m, w_tilde, prefs_w)?.matching)
}

pub fn compute_build_cor_with(
    mu_prime: &Matching,
    mu: &Matching,
    prefs_m: &MenProfile,
    w_tilde: WomanId,
    prefs_w: &mut WomenProfile,
) -> Result<BuildCor> {
    let (nw, nm) = (mu.n_women(), mu.n_men());
    if mu_prime.n_women() != nw || mu_prime.n_men() != nm || prefs_w.len() != nw || prefs_m.len() != nm {
        return Err(Error::Malformed("matchings and profiles disagree on market size".into()));
    }
    let target = mu
        .partner_of_woman(w_tilde)
        .ok_or_else(|| Error::Domain(format!("{w_tilde} has no target partner")))?;
    let first = mu_prime
        .partner_of_woman(w_tilde)
        .ok_or_else(|| Error::Domain(format!("{w_tilde} is unmatched in the provisional matching")))?;
    if first == target {
        return Err(Error::Domain(format!("{w_tilde} already holds her target partner")));
    }

    let mut todo = TodoSet::differing(mu_prime, mu);
    let mut provisional: Vec<Option<ManId>> = mu_prime.women_partners().to_vec();
    let mut should_blacklist = vec![first];
    let mut promotions = Vec::new();
    // Position in each moving man's list of the next woman he approaches.
    let mut upcoming: Vec<Option<usize>> = vec![None; nm];

    let after = |m: ManId, w: WomanId| -> Result<usize> {
        prefs_m[m.0].rank_of(w).map(|r| r + 1).ok_or_else(|| {
            Error::ContractViolation(format!("{m} is placed with {w}, who is not on his list"))
        })
    };

    provisional[w_tilde.0] = None;
    let mut m = first;
    mark_done_cycle_of(&mut todo, mu_prime, mu, w_tilde)?;
    upcoming[m.0] = Some(after(m, w_tilde)?);
    let mut proposals = 0usize;

    loop {
        let pos = upcoming[m.0].ok_or_else(|| {
            Error::ContractViolation(format!("{m} moves after settling with his target"))
        })?;
        let list = prefs_m[m.0].ranking();
        let w = *list.get(pos).ok_or_else(|| {
            Error::ContractViolation(format!("{m} runs out of women before his target"))
        })?;
        if m == target && w == w_tilde {
            break;
        }
        upcoming[m.0] = Some(pos + 1);
        proposals += 1;

        let accept = if w == w_tilde {
            should_blacklist.push(m);
            false
        } else if mu.partner_of_woman(w) == Some(m) {
            upcoming[m.0] = None;
            true
        } else if todo.contains(w) {
            prefs_w.list_mut(w.0).move_to(m, 1);
            promotions.push((w, m));
            mark_done_cycle_of(&mut todo, mu_prime, mu, w)?;
            true
        } else {
            false
        };

        if accept {
            let displaced = provisional[w.0].replace(m).ok_or_else(|| {
                Error::ContractViolation(format!("{w} holds nobody when {m} arrives"))
            })?;
            m = displaced;
            if upcoming[m.0].is_none() {
                upcoming[m.0] = Some(after(m, w)?);
            }
        }
    }
    provisional[w_tilde.0] = Some(m);

    let list = prefs_w.list_mut(w_tilde.0);
    list.move_to(target, 0);
    for &b in &should_blacklist {
        list.remove(b);
    }

    Ok(BuildCor {
        matching: Matching::from_women(&provisional, nm)?,
        blacklist: should_blacklist,
        promotions,
        proposals,
    })
}
