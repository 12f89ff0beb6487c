//! Instances that need many blacklist entries or divorces, and seeded random
//! instances.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Instance, ManId, Matching, MenProfile, Profile, WomanId, WomenProfile};

/// A constructed instance whose women's side is the witness profile.
#[derive(Clone, Debug)]
pub struct TightInstance {
    pub instance: Instance,
    pub target: Matching,
    pub witness: WomenProfile,
}

/// One block of the construction: women and men with the same index range
/// inside the block, `women[j]` matched to `men[j]`.
struct Block {
    women: Vec<WomanId>,
    men: Vec<ManId>,
}

impl Block {
    /// Man `j` ranks women `j+1, ..., l, 0, ..., j` of his block.
    fn man_cycle(&self, j: usize) -> impl Iterator<Item = WomanId> + '_ {
        let d = self.women.len();
        (1..=d).map(move |k| self.women[(j + k) % d])
    }

    /// The witness list of woman `j`.
    fn woman_head(&self, j: usize) -> Vec<ManId> {
        if j == 0 {
            vec![self.men[0]]
        } else {
            vec![self.men[j], self.men[j - 1]]
        }
    }
}

fn check_sizes(available: usize, sizes: &[usize]) -> Result<()> {
    if sizes.contains(&0) {
        return Err(Error::Domain("blacklist sizes must be positive".into()));
    }
    let n_b = sizes.len();
    if 2 * n_b > available {
        return Err(Error::Domain(format!(
            "{n_b} blacklists need at least {} participants per side, there are {available}",
            2 * n_b
        )));
    }
    let total: usize = sizes.iter().sum();
    if total + n_b > available {
        return Err(Error::Domain(format!(
            "sizes sum to {total}, more than {available} - {n_b}"
        )));
    }
    Ok(())
}

/// Splits paired women and men into blocks of sizes `l_i + 1`, padding with
/// singletons.
fn blocks(women: &[WomanId], men: &[ManId], sizes: &[usize]) -> Vec<Block> {
    let mut out = Vec::new();
    let mut at = 0;
    let padded = sizes.iter().copied().chain(std::iter::repeat(0));
    for l in padded {
        if at >= women.len() {
            break;
        }
        out.push(Block {
            women: women[at..at + l + 1].to_vec(),
            men: men[at..at + l + 1].to_vec(),
        });
        at += l + 1;
    }
    out
}

/// `head`, then every other id below `n` ascending, skipping `skip`.
fn then_rest<T: crate::model::Participant>(head: Vec<T>, n: usize, skip: &BTreeSet<T>) -> Vec<T> {
    let seen: BTreeSet<T> = head.iter().copied().collect();
    let mut out = head;
    out.extend((0..n).map(T::from_index).filter(|x| !seen.contains(x) && !skip.contains(x)));
    out
}

/// Balanced instance on `n` men and women where every profile making the
/// target men-optimal has `sizes.len()` women with blacklists of at least
/// the given sizes, together with a witness profile attaining them.
pub fn gen_tight_balanced(n: usize, sizes: &[usize]) -> Result<TightInstance> {
    check_sizes(n, sizes)?;
    let women: Vec<WomanId> = (0..n).map(WomanId).collect();
    let men: Vec<ManId> = (0..n).map(ManId).collect();
    let (none_w, none_m) = (BTreeSet::new(), BTreeSet::new());

    let mut men_lists = vec![Vec::new(); n];
    let mut women_lists = vec![Vec::new(); n];
    for block in blocks(&women, &men, sizes) {
        let own: BTreeSet<ManId> = block.men.iter().copied().collect();
        for (j, (&w, &m)) in block.women.iter().zip(&block.men).enumerate() {
            men_lists[m.0] = then_rest(block.man_cycle(j).collect(), n, &none_w);
            let skip = if j == 0 { &own } else { &none_m };
            women_lists[w.0] = then_rest(block.woman_head(j), n, skip);
        }
    }
    assemble(women_lists, men_lists, n, n, (0..n).map(|i| (WomanId(i), ManId(i))))
}

fn assemble(
    women_lists: Vec<Vec<ManId>>,
    men_lists: Vec<Vec<WomanId>>,
    nw: usize,
    nm: usize,
    pairs: impl IntoIterator<Item = (WomanId, ManId)>,
) -> Result<TightInstance> {
    let witness = Profile::from_rankings(women_lists, nm)?;
    let prefs_m: MenProfile = Profile::from_rankings(men_lists, nw)?;
    Ok(TightInstance {
        instance: Instance::new(witness.clone(), prefs_m)?,
        target: Matching::from_pairs(nw, nm, pairs)?,
        witness,
    })
}

/// Inputs of the construction for partial targets.
#[derive(Clone, Debug, Default)]
pub struct PartialParams {
    pub n_women: usize,
    pub n_men: usize,
    /// Women to be matched; as many as `matched_men`.
    pub matched_women: Vec<WomanId>,
    pub matched_men: Vec<ManId>,
    /// Men each woman outside `matched_women` must blacklist. Missing
    /// entries are empty.
    pub women_blacklists: BTreeMap<WomanId, BTreeSet<ManId>>,
    /// Exact blacklist of each man outside `matched_men`.
    pub men_blacklists: BTreeMap<ManId, BTreeSet<WomanId>>,
    pub sizes: Vec<usize>,
}

/// Like [`gen_tight_balanced`], for arbitrary side sizes and a partial
/// target. Matched women accepted by some single man (the helped ones) are
/// paired with dedicated men and need no blacklist; the remaining matched
/// women are arranged in blocks.
pub fn gen_tight_partial(p: &PartialParams) -> Result<TightInstance> {
    let (nw, nm) = (p.n_women, p.n_men);
    let wbar: BTreeSet<WomanId> = p.matched_women.iter().copied().collect();
    let mbar: BTreeSet<ManId> = p.matched_men.iter().copied().collect();
    if wbar.len() != p.matched_women.len() || mbar.len() != p.matched_men.len() {
        return Err(Error::Domain("matched sets list someone twice".into()));
    }
    if wbar.len() != mbar.len() {
        return Err(Error::Domain(format!(
            "{} women and {} men to be matched",
            wbar.len(),
            mbar.len()
        )));
    }
    if wbar.iter().any(|w| w.0 >= nw) || mbar.iter().any(|m| m.0 >= nm) {
        return Err(Error::Domain("matched participant out of range".into()));
    }
    for (w, b) in &p.women_blacklists {
        if w.0 >= nw || wbar.contains(w) || b.iter().any(|m| m.0 >= nm) {
            return Err(Error::Domain(format!("bad blacklist given for {w}")));
        }
    }
    for (m, b) in &p.men_blacklists {
        if m.0 >= nm || mbar.contains(m) || b.iter().any(|w| w.0 >= nw) {
            return Err(Error::Domain(format!("bad blacklist given for {m}")));
        }
    }
    let empty_w = BTreeSet::new();
    let empty_m = BTreeSet::new();
    let b_m = |m: ManId| p.men_blacklists.get(&m).unwrap_or(&empty_w);
    let b_w = |w: WomanId| p.women_blacklists.get(&w).unwrap_or(&empty_m);
    let single_men: Vec<ManId> = (0..nm).map(ManId).filter(|m| !mbar.contains(m)).collect();
    let single_women: Vec<WomanId> = (0..nw).map(WomanId).filter(|w| !wbar.contains(w)).collect();

    let helped: Vec<WomanId> = wbar
        .iter()
        .copied()
        .filter(|&w| single_men.iter().any(|&m| !b_m(m).contains(&w)))
        .collect();
    let n_h = helped.len();
    check_sizes(wbar.len() - n_h, &p.sizes)?;
    let helpers: Vec<ManId> = mbar.iter().copied().take(n_h).collect();
    let rest_w: Vec<WomanId> = wbar.iter().copied().filter(|w| !helped.contains(w)).collect();
    let rest_m: Vec<ManId> = mbar.iter().copied().skip(n_h).collect();
    // Single women who must blacklist `m`; he ranks them first.
    let p_of = |m: ManId| -> Vec<WomanId> { single_women.iter().copied().filter(|&w| b_w(w).contains(&m)).collect() };
    let none_w = BTreeSet::new();
    let none_m = BTreeSet::new();

    let mut men_lists = vec![Vec::new(); nm];
    let mut women_lists = vec![Vec::new(); nw];
    let mut pairs = Vec::new();
    for block in blocks(&rest_w, &rest_m, &p.sizes) {
        let own: BTreeSet<ManId> = block.men.iter().copied().collect();
        for (j, (&w, &m)) in block.women.iter().zip(&block.men).enumerate() {
            let mut head = p_of(m);
            head.extend(block.man_cycle(j));
            men_lists[m.0] = then_rest(head, nw, &none_w);
            let skip = if j == 0 { &own } else { &none_m };
            women_lists[w.0] = then_rest(block.woman_head(j), nm, skip);
            pairs.push((w, m));
        }
    }
    for (&w, &m) in helped.iter().zip(&helpers) {
        let mut head = p_of(m);
        head.push(w);
        men_lists[m.0] = then_rest(head, nw, &none_w);
        women_lists[w.0] = then_rest(vec![m], nm, &none_m);
        pairs.push((w, m));
    }
    for &m in &single_men {
        men_lists[m.0] = then_rest(Vec::new(), nw, b_m(m));
    }
    for &w in &single_women {
        let mut b = b_w(w).clone();
        b.extend(single_men.iter().copied().filter(|&m| !b_m(m).contains(&w)));
        women_lists[w.0] = then_rest(Vec::new(), nm, &b);
    }
    assemble(women_lists, men_lists, nw, nm, pairs)
}

/// The single-cycle instance on `n` men and women: man `j` ranks women
/// `j+1, ..., n-1, 0, ..., j`. The target pairs `w_j` with `m_j`. Women
/// accept everyone, ascending.
pub fn gen_divorce_tight(n: usize) -> Result<(Instance, Matching)> {
    let sizes: &[usize] = if n >= 2 { &[n - 1] } else { &[] };
    let t = gen_tight_balanced(n, sizes)?;
    let instance = t.instance.with_women(Profile::full(n, n))?;
    Ok((instance, t.target))
}

/// Full random lists on both sides and a uniformly random matching that
/// saturates the smaller side. With `flat`, men's top choices are distinct.
pub fn gen_random(n_women: usize, n_men: usize, seed: u64, flat: bool) -> Result<(Instance, Matching)> {
    if flat && n_men > n_women {
        return Err(Error::Domain(format!(
            "{n_men} men cannot have distinct top choices among {n_women} women"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut men: Vec<Vec<WomanId>> = (0..n_men)
        .map(|_| {
            let mut l: Vec<WomanId> = (0..n_women).map(WomanId).collect();
            l.shuffle(&mut rng);
            l
        })
        .collect();
    let women: Vec<Vec<ManId>> = (0..n_women)
        .map(|_| {
            let mut l: Vec<ManId> = (0..n_men).map(ManId).collect();
            l.shuffle(&mut rng);
            l
        })
        .collect();
    if flat {
        let mut tops: Vec<WomanId> = (0..n_women).map(WomanId).collect();
        tops.shuffle(&mut rng);
        for (l, top) in men.iter_mut().zip(tops) {
            let pos = l.iter().position(|&w| w == top).unwrap();
            l[..=pos].rotate_right(1);
        }
    }
    let k = n_women.min(n_men);
    let pairs: Vec<(WomanId, ManId)> = if n_women >= n_men {
        let mut w: Vec<WomanId> = (0..n_women).map(WomanId).collect();
        w.shuffle(&mut rng);
        w.into_iter().take(k).zip((0..k).map(ManId)).collect()
    } else {
        let mut m: Vec<ManId> = (0..n_men).map(ManId).collect();
        m.shuffle(&mut rng);
        (0..k).map(WomanId).zip(m).collect()
    };
    let instance = Instance::from_rankings(women, men)?;
    let mu = Matching::from_pairs(n_women, n_men, pairs)?;
    Ok((instance, mu))
}
