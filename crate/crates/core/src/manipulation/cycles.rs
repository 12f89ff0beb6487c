//! Cycles of one matching relative to another.
//!
//! Starting at a woman `w`, follow her partner under `mu_prime`, then that
//! man's partner under `mu`, and so on until returning to `w`. The women
//! visited form the cycle of `w`; the cycles partition the women and mirror
//! the cycle decomposition of the permutation `w -> mu(mu_prime(w))`.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{ManId, Matching, WomanId};

/// `women[i] --men[i]--> women[i + 1]`, wrapping around. A woman whose two
/// partners coincide forms a cycle of length one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cycle {
    pub women: Vec<WomanId>,
    pub men: Vec<ManId>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.women.len()
    }

    pub fn is_empty(&self) -> bool {
        self.women.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.women.len() == 1
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.women[0])?;
        if !self.is_trivial() {
            for (i, m) in self.men.iter().enumerate() {
                write!(f, " -{m}-> {}", self.women[(i + 1) % self.women.len()])?;
            }
        }
        write!(f, ")")
    }
}

pub fn cycle_of(mu_prime: &Matching, mu: &Matching, w: WomanId) -> Result<Cycle> {
    if mu_prime.n_women() != mu.n_women() || mu_prime.n_men() != mu.n_men() {
        return Err(Error::Malformed("matchings over different markets".into()));
    }
    let mut women = Vec::new();
    let mut men = Vec::new();
    let mut cur = w;
    loop {
        let m = mu_prime
            .partner_of_woman(cur)
            .ok_or_else(|| Error::Domain(format!("{cur} is unmatched in the first matching")))?;
        let next = mu
            .partner_of_man(m)
            .ok_or_else(|| Error::Domain(format!("{m} is unmatched in the second matching")))?;
        if women.len() > mu.n_women() {
            return Err(Error::Domain("cycle does not close".into()));
        }
        women.push(cur);
        men.push(m);
        if next == w {
            break;
        }
        cur = next;
    }
    if mu.partner_of_woman(w).is_none() {
        return Err(Error::Domain(format!("{w} is unmatched in the second matching")));
    }
    Ok(Cycle { women, men })
}

/// Cycles covering every woman, in order of their lowest member.
pub fn cycle_partition(mu_prime: &Matching, mu: &Matching) -> Result<Vec<Cycle>> {
    let mut seen = vec![false; mu.n_women()];
    let mut out = Vec::new();
    for w in 0..mu.n_women() {
        if seen[w] {
            continue;
        }
        let c = cycle_of(mu_prime, mu, WomanId(w))?;
        for x in &c.women {
            seen[x.0] = true;
        }
        out.push(c);
    }
    Ok(out)
}

/// Women whose two partners differ, with constant-time removal and a
/// cursor for the lowest remaining member. Only removals are supported.
#[derive(Clone, Debug)]
pub struct TodoSet {
    member: Vec<bool>,
    len: usize,
    cursor: usize,
}

impl TodoSet {
    pub fn new(n: usize) -> Self {
        TodoSet {
            member: vec![false; n],
            len: 0,
            cursor: 0,
        }
    }

    /// `{w : mu_prime(w) != mu(w)}` over women matched in `mu`.
    pub fn differing(mu_prime: &Matching, mu: &Matching) -> Self {
        let mut t = TodoSet::new(mu.n_women());
        for (w, m) in mu.pairs() {
            if mu_prime.partner_of_woman(w) != Some(m) {
                t.member[w.0] = true;
                t.len += 1;
            }
        }
        t
    }

    pub fn contains(&self, w: WomanId) -> bool {
        self.member.get(w.0).copied().unwrap_or(false)
    }

    pub fn remove(&mut self, w: WomanId) -> bool {
        match self.member.get_mut(w.0) {
            Some(slot) if *slot => {
                *slot = false;
                self.len -= 1;
                true
            }
            _ => false,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn lowest(&mut self) -> Option<WomanId> {
        while self.cursor < self.member.len() && !self.member[self.cursor] {
            self.cursor += 1;
        }
        (self.cursor < self.member.len()).then_some(WomanId(self.cursor))
    }

    pub fn iter(&self) -> impl Iterator<Item = WomanId> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| WomanId(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matching(pairs: &[(usize, usize)], n: usize) -> Matching {
        Matching::from_pairs(n, n, pairs.iter().map(|&(w, m)| (WomanId(w), ManId(m)))).unwrap()
    }

    #[test]
    fn two_cycle_and_singleton() {
        let mp = matching(&[(0, 0), (1, 1), (2, 2)], 3);
        let mu = matching(&[(0, 1), (1, 0), (2, 2)], 3);
        let c = cycle_of(&mp, &mu, WomanId(0)).unwrap();
        assert_eq!(c.women, vec![WomanId(0), WomanId(1)]);
        assert_eq!(c.men, vec![ManId(0), ManId(1)]);
        assert_eq!(c.to_string(), "(w0 -m0-> w1 -m1-> w0)");
        let s = cycle_of(&mp, &mu, WomanId(2)).unwrap();
        assert!(s.is_trivial());
        assert_eq!(s.to_string(), "(w2)");
        assert_eq!(cycle_partition(&mp, &mu).unwrap().len(), 2);
    }

    #[test]
    fn unmatched_woman_is_a_domain_error() {
        let mp = matching(&[(0, 0)], 2);
        let mu = matching(&[(0, 0), (1, 1)], 2);
        assert!(matches!(cycle_of(&mp, &mu, WomanId(1)), Err(Error::Domain(_))));
    }

    #[test]
    fn todo_set_cursor() {
        let mp = matching(&[(0, 0), (1, 1), (2, 2)], 3);
        let mu = matching(&[(0, 0), (1, 2), (2, 1)], 3);
        let mut t = TodoSet::differing(&mp, &mu);
        assert_eq!(t.len(), 2);
        assert_eq!(t.lowest(), Some(WomanId(1)));
        t.remove(WomanId(1));
        assert_eq!(t.lowest(), Some(WomanId(2)));
        t.remove(WomanId(2));
        assert_eq!(t.lowest(), None);
        assert!(t.is_empty());
    }
}
