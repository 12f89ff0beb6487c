//! Participants, preference lists, matchings and market instances.
//!
//! Participants are dense indices on each side. A preference list ranks a
//! subset of the opposite side; every participant absent from the list is
//! blacklisted, and being unmatched beats being matched with a blacklisted
//! partner.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::Hash;

use crate::error::{Error, Result};

/// A participant index on one side of the market.
pub trait Participant: Copy + Eq + Ord + Hash + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// Label used in text output (`w` or `m`).
    const TAG: &'static str;

    fn index(self) -> usize;
    fn from_index(index: usize) -> Self;
}

macro_rules! participant {
    ($name:ident, $tag:literal) => {
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl Participant for $name {
            const TAG: &'static str = $tag;

            #[inline]
            fn index(self) -> usize {
                self.0
            }

            #[inline]
            fn from_index(index: usize) -> Self {
                $name(index)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{}", $tag, self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{}", $tag, self.0)
            }
        }
    };
}

participant!(WomanId, "w");
participant!(ManId, "m");

/// One of the two sides of the market.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Women,
    Men,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Women => Side::Men,
            Side::Men => Side::Women,
        }
    }
}

const UNRANKED: u32 = u32::MAX;

/// A strict ranking over a subset of the opposite side, most preferred first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PreferenceList<T> {
    ranking: Vec<T>,
    // rank[i] is the position of partner i, or UNRANKED when blacklisted.
    rank: Vec<u32>,
}

impl<T: Participant> PreferenceList<T> {
    /// Builds a list over an opposite side of `n_opposite` participants.
    pub fn new(ranking: Vec<T>, n_opposite: usize) -> Result<Self> {
        let mut rank = vec![UNRANKED; n_opposite];
        for (pos, p) in ranking.iter().enumerate() {
            let slot = rank.get_mut(p.index()).ok_or_else(|| {
                Error::Malformed(format!("{p} out of range (side has {n_opposite})"))
            })?;
            if *slot != UNRANKED {
                return Err(Error::Malformed(format!("{p} listed twice")));
            }
            *slot = pos as u32;
        }
        Ok(PreferenceList { ranking, rank })
    }

    /// A list ranking the whole opposite side in ascending index order.
    pub fn full(n_opposite: usize) -> Self {
        PreferenceList {
            ranking: (0..n_opposite).map(T::from_index).collect(),
            rank: (0..n_opposite as u32).collect(),
        }
    }

    pub fn ranking(&self) -> &[T] {
        &self.ranking
    }

    pub fn len(&self) -> usize {
        self.ranking.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranking.is_empty()
    }

    pub fn n_opposite(&self) -> usize {
        self.rank.len()
    }

    /// Position of `p` in the list, `None` if blacklisted (or out of range).
    #[inline]
    pub fn rank_of(&self, p: T) -> Option<usize> {
        match self.rank.get(p.index()) {
            Some(&r) if r != UNRANKED => Some(r as usize),
            _ => None,
        }
    }

    #[inline]
    pub fn accepts(&self, p: T) -> bool {
        self.rank_of(p).is_some()
    }

    pub fn top(&self) -> Option<T> {
        self.ranking.first().copied()
    }

    /// True iff `a` is listed and either `b` is absent or ranked below `a`.
    /// Passing `None` for `b` stands for being unmatched.
    pub fn prefers(&self, a: T, b: Option<T>) -> bool {
        match (self.rank_of(a), b.and_then(|b| self.rank_of(b))) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(ra), Some(rb)) => ra < rb,
        }
    }

    /// The complement of the ranking, in ascending order.
    pub fn blacklist(&self) -> Vec<T> {
        self.rank
            .iter()
            .enumerate()
            .filter(|(_, &r)| r == UNRANKED)
            .map(|(i, _)| T::from_index(i))
            .collect()
    }

    pub fn blacklist_len(&self) -> usize {
        self.rank.len() - self.ranking.len()
    }

    fn reindex_from(&mut self, start: usize) {
        for (pos, p) in self.ranking.iter().enumerate().skip(start) {
            self.rank[p.index()] = pos as u32;
        }
    }

    /// Blacklists `p`. Returns false if he already was.
    pub fn remove(&mut self, p: T) -> bool {
        let Some(pos) = self.rank_of(p) else {
            return false;
        };
        self.ranking.remove(pos);
        self.rank[p.index()] = UNRANKED;
        self.reindex_from(pos);
        true
    }

    /// Moves `p` to position `pos` (clamped to the list end), listing him if
    /// he was blacklisted.
    pub fn move_to(&mut self, p: T, pos: usize) {
        assert!(p.index() < self.rank.len(), "{p:?} out of range");
        let from = self.rank_of(p);
        if let Some(from) = from {
            self.ranking.remove(from);
        }
        let pos = pos.min(self.ranking.len());
        self.ranking.insert(pos, p);
        self.reindex_from(from.map_or(pos, |f| f.min(pos)));
    }

    /// Moves `p` to immediately after `anchor` if he is currently ranked
    /// above `anchor`. Returns whether anything changed.
    pub fn demote_below(&mut self, p: T, anchor: T) -> bool {
        match (self.rank_of(p), self.rank_of(anchor)) {
            (Some(rp), Some(ra)) if rp < ra => {
                // After removing p the anchor sits at ra - 1.
                self.move_to(p, ra);
                true
            }
            _ => false,
        }
    }
}

impl<T: Participant> fmt::Debug for PreferenceList<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.ranking.iter()).finish()
    }
}

/// One preference list per participant of one side. `T` is the type of the
/// participants being ranked, i.e. the opposite side.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Profile<T> {
    lists: Vec<PreferenceList<T>>,
    n_opposite: usize,
}

/// Preference lists of the women (ranking men).
pub type WomenProfile = Profile<ManId>;
/// Preference lists of the men (ranking women).
pub type MenProfile = Profile<WomanId>;

impl<T: Participant> Profile<T> {
    pub fn new(lists: Vec<PreferenceList<T>>, n_opposite: usize) -> Result<Self> {
        if let Some(bad) = lists.iter().position(|l| l.n_opposite() != n_opposite) {
            return Err(Error::Malformed(format!(
                "list {bad} ranks a side of {} participants, expected {n_opposite}",
                lists[bad].n_opposite()
            )));
        }
        Ok(Profile { lists, n_opposite })
    }

    pub fn from_rankings(rankings: Vec<Vec<T>>, n_opposite: usize) -> Result<Self> {
        let lists = rankings
            .into_iter()
            .map(|r| PreferenceList::new(r, n_opposite))
            .collect::<Result<Vec<_>>>()?;
        Ok(Profile { lists, n_opposite })
    }

    /// Every participant ranks the whole opposite side in ascending order.
    pub fn full(n: usize, n_opposite: usize) -> Self {
        Profile {
            lists: (0..n).map(|_| PreferenceList::full(n_opposite)).collect(),
            n_opposite,
        }
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn n_opposite(&self) -> usize {
        self.n_opposite
    }

    pub fn lists(&self) -> &[PreferenceList<T>] {
        &self.lists
    }

    pub fn rankings(&self) -> Vec<Vec<T>> {
        self.lists.iter().map(|l| l.ranking.clone()).collect()
    }

    pub fn list_mut(&mut self, i: usize) -> &mut PreferenceList<T> {
        &mut self.lists[i]
    }

    pub fn set_list(&mut self, i: usize, list: PreferenceList<T>) -> Result<()> {
        if list.n_opposite() != self.n_opposite {
            return Err(Error::Malformed("list ranks the wrong side size".into()));
        }
        let slot = self
            .lists
            .get_mut(i)
            .ok_or_else(|| Error::Malformed(format!("participant {i} out of range")))?;
        *slot = list;
        Ok(())
    }
}

impl<T: Participant> std::ops::Index<usize> for Profile<T> {
    type Output = PreferenceList<T>;

    fn index(&self, i: usize) -> &PreferenceList<T> {
        &self.lists[i]
    }
}

impl<T: Participant> fmt::Debug for Profile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.lists.iter()).finish()
    }
}

/// A partial one-to-one pairing of women and men.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    woman_to_man: Vec<Option<ManId>>,
    man_to_woman: Vec<Option<WomanId>>,
}

impl Matching {
    pub fn empty(n_women: usize, n_men: usize) -> Self {
        Matching {
            woman_to_man: vec![None; n_women],
            man_to_woman: vec![None; n_men],
        }
    }

    pub fn from_pairs(
        n_women: usize,
        n_men: usize,
        pairs: impl IntoIterator<Item = (WomanId, ManId)>,
    ) -> Result<Self> {
        let mut m = Matching::empty(n_women, n_men);
        for (w, man) in pairs {
            m.pair(w, man)?;
        }
        Ok(m)
    }

    /// Builds a matching from the women's side; `None` entries are unmatched.
    pub fn from_women(partners: &[Option<ManId>], n_men: usize) -> Result<Self> {
        Matching::from_pairs(
            partners.len(),
            n_men,
            partners
                .iter()
                .enumerate()
                .filter_map(|(w, m)| m.map(|m| (WomanId(w), m))),
        )
    }

    pub fn n_women(&self) -> usize {
        self.woman_to_man.len()
    }

    pub fn n_men(&self) -> usize {
        self.man_to_woman.len()
    }

    /// Pairs `w` with `m`. Both must currently be unmatched.
    pub fn pair(&mut self, w: WomanId, m: ManId) -> Result<()> {
        self.check_ids(w, m)?;
        if let Some(cur) = self.woman_to_man[w.0] {
            return Err(Error::Malformed(format!("{w} already matched with {cur}")));
        }
        if let Some(cur) = self.man_to_woman[m.0] {
            return Err(Error::Malformed(format!("{m} already matched with {cur}")));
        }
        self.woman_to_man[w.0] = Some(m);
        self.man_to_woman[m.0] = Some(w);
        Ok(())
    }

    /// Removes `w`'s pair, returning her former partner.
    pub fn unpair_woman(&mut self, w: WomanId) -> Option<ManId> {
        let m = self.woman_to_man.get_mut(w.0)?.take()?;
        self.man_to_woman[m.0] = None;
        Some(m)
    }

    fn check_ids(&self, w: WomanId, m: ManId) -> Result<()> {
        if w.0 >= self.n_women() {
            return Err(Error::Malformed(format!(
                "{w} out of range ({} women)",
                self.n_women()
            )));
        }
        if m.0 >= self.n_men() {
            return Err(Error::Malformed(format!(
                "{m} out of range ({} men)",
                self.n_men()
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn partner_of_woman(&self, w: WomanId) -> Option<ManId> {
        self.woman_to_man.get(w.0).copied().flatten()
    }

    #[inline]
    pub fn partner_of_man(&self, m: ManId) -> Option<WomanId> {
        self.man_to_woman.get(m.0).copied().flatten()
    }

    pub fn women_partners(&self) -> &[Option<ManId>] {
        &self.woman_to_man
    }

    pub fn men_partners(&self) -> &[Option<WomanId>] {
        &self.man_to_woman
    }

    /// Matched pairs in ascending woman order.
    pub fn pairs(&self) -> impl Iterator<Item = (WomanId, ManId)> + '_ {
        self.woman_to_man
            .iter()
            .enumerate()
            .filter_map(|(w, m)| m.map(|m| (WomanId(w), m)))
    }

    pub fn matched_women(&self) -> BTreeSet<WomanId> {
        self.pairs().map(|(w, _)| w).collect()
    }

    pub fn matched_men(&self) -> BTreeSet<ManId> {
        self.pairs().map(|(_, m)| m).collect()
    }

    /// n_μ, the number of matched pairs.
    pub fn size(&self) -> usize {
        self.woman_to_man.iter().filter(|m| m.is_some()).count()
    }

    pub fn is_perfect(&self) -> bool {
        self.n_women() == self.n_men() && self.size() == self.n_women()
    }

    /// The two directions agree with each other.
    pub fn is_consistent(&self) -> bool {
        self.woman_to_man.iter().enumerate().all(|(w, m)| match m {
            Some(m) => self.man_to_woman.get(m.0) == Some(&Some(WomanId(w))),
            None => true,
        }) && self.man_to_woman.iter().enumerate().all(|(m, w)| match w {
            Some(w) => self.woman_to_man.get(w.0) == Some(&Some(ManId(m))),
            None => true,
        })
    }

    /// Swaps the roles of the two sides.
    pub fn transposed(&self) -> TransposedMatching {
        TransposedMatching {
            first_to_second: self.man_to_woman.clone(),
        }
    }
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (w, m)) in self.pairs().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{w}-{m}")?;
        }
        f.write_str("}")
    }
}

/// A matching viewed from the men's side; only used to hand the
/// women-proposing run its starting point.
#[derive(Clone, Debug)]
pub struct TransposedMatching {
    pub first_to_second: Vec<Option<WomanId>>,
}

/// Two-sided market: both sides' preference profiles.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    prefs_w: WomenProfile,
    prefs_m: MenProfile,
}

impl Instance {
    pub fn new(prefs_w: WomenProfile, prefs_m: MenProfile) -> Result<Self> {
        if prefs_w.n_opposite() != prefs_m.len() {
            return Err(Error::Malformed(format!(
                "women rank {} men but there are {} men",
                prefs_w.n_opposite(),
                prefs_m.len()
            )));
        }
        if prefs_m.n_opposite() != prefs_w.len() {
            return Err(Error::Malformed(format!(
                "men rank {} women but there are {} women",
                prefs_m.n_opposite(),
                prefs_w.len()
            )));
        }
        Ok(Instance { prefs_w, prefs_m })
    }

    /// Builds an instance from raw rankings.
    pub fn from_rankings(women: Vec<Vec<ManId>>, men: Vec<Vec<WomanId>>) -> Result<Self> {
        let (nw, nm) = (women.len(), men.len());
        Instance::new(
            Profile::from_rankings(women, nm)?,
            Profile::from_rankings(men, nw)?,
        )
    }

    /// Convenience constructor from plain index lists.
    pub fn from_indices(women: &[&[usize]], men: &[&[usize]]) -> Result<Self> {
        Instance::from_rankings(
            women
                .iter()
                .map(|l| l.iter().map(|&i| ManId(i)).collect())
                .collect(),
            men.iter()
                .map(|l| l.iter().map(|&i| WomanId(i)).collect())
                .collect(),
        )
    }

    pub fn n_women(&self) -> usize {
        self.prefs_w.len()
    }

    pub fn n_men(&self) -> usize {
        self.prefs_m.len()
    }

    pub fn prefs_w(&self) -> &WomenProfile {
        &self.prefs_w
    }

    pub fn prefs_m(&self) -> &MenProfile {
        &self.prefs_m
    }

    pub fn woman(&self, w: WomanId) -> &PreferenceList<ManId> {
        &self.prefs_w[w.0]
    }

    pub fn man(&self, m: ManId) -> &PreferenceList<WomanId> {
        &self.prefs_m[m.0]
    }

    /// The same men with a different women's profile.
    pub fn with_women(&self, prefs_w: WomenProfile) -> Result<Self> {
        Instance::new(prefs_w, self.prefs_m.clone())
    }

    pub fn is_balanced(&self) -> bool {
        self.n_women() == self.n_men()
    }

    pub fn check_matching(&self, matching: &Matching) -> Result<()> {
        if matching.n_women() != self.n_women() || matching.n_men() != self.n_men() {
            return Err(Error::Malformed(format!(
                "matching is over {}x{} participants, instance has {}x{}",
                matching.n_women(),
                matching.n_men(),
                self.n_women(),
                self.n_men()
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Instance")
            .field("women", &self.prefs_w)
            .field("men", &self.prefs_m)
            .finish()
    }
}

/// No matched participant of `side` is paired with someone they blacklist.
pub fn is_rational(instance: &Instance, matching: &Matching, side: Side) -> Result<bool> {
    instance.check_matching(matching)?;
    Ok(matching.pairs().all(|(w, m)| match side {
        Side::Women => instance.woman(w).accepts(m),
        Side::Men => instance.man(m).accepts(w),
    }))
}

/// Rank comparison under a list: `a` is listed and beats `b` (absent or
/// ranked lower).
pub fn prefers<T: Participant>(list: &PreferenceList<T>, a: T, b: T) -> bool {
    list.prefers(a, Some(b))
}
