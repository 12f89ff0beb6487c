//! Line-based text formats.
//!
//! Instance:
//! ```text
//! 3 3
//! W 0: 0
//! W 1: 1 0 2
//! W 2: 2 1 0
//! M 0: 1 2 0
//! M 1: 2 0 1
//! M 2: 0 1 2
//! ```
//! Ids may carry their side's letter (`m2`, `w0`). Lines starting with `#`
//! and blank lines are ignored. A matching is one `<woman> <man>` pair per
//! line.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::divorces::DivorceStrategy;
use crate::error::{Error, Result};
use crate::model::{Instance, ManId, Matching, Participant, Profile, WomanId, WomenProfile};

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_id<T: Participant>(tok: &str, bound: usize, line: usize) -> Result<T> {
    let digits = tok.strip_prefix(T::TAG).unwrap_or(tok);
    let i: usize = digits
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a {} id, found `{tok}`", T::TAG)))?;
    if i >= bound {
        return Err(Error::parse(
            line,
            format!("{}{i} out of range (there are {bound})", T::TAG),
        ));
    }
    Ok(T::from_index(i))
}

fn parse_count(tok: Option<&str>, line: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::parse(line, "expected `<n_women> <n_men>`"))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("expected a count, found `{tok}`")))
}

/// Parses `<tag> <i>: <ids...>` and checks the index.
fn parse_list_line<T: Participant>(
    line: &str,
    lineno: usize,
    tag: &str,
    expected: usize,
    n_opposite: usize,
) -> Result<Vec<T>> {
    let (head, tail) = line
        .split_once(':')
        .ok_or_else(|| Error::parse(lineno, format!("expected `{tag} {expected}: ...`")))?;
    let mut head_toks = head.split_whitespace();
    if head_toks.next() != Some(tag) {
        return Err(Error::parse(lineno, format!("expected a `{tag}` line")));
    }
    let idx: usize = head_toks
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(lineno, format!("missing index after `{tag}`")))?;
    if head_toks.next().is_some() {
        return Err(Error::parse(lineno, "unexpected text before `:`"));
    }
    if idx != expected {
        return Err(Error::parse(
            lineno,
            format!("expected `{tag} {expected}`, found `{tag} {idx}`"),
        ));
    }
    let mut seen = BTreeSet::new();
    tail.split_whitespace()
        .map(|tok| {
            let id = parse_id::<T>(tok, n_opposite, lineno)?;
            if !seen.insert(id) {
                return Err(Error::parse(lineno, format!("{id} listed twice")));
            }
            Ok(id)
        })
        .collect()
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = content_lines(text);
    let (l0, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty instance file"))?;
    let mut toks = header.split_whitespace();
    let nw = parse_count(toks.next(), l0)?;
    let nm = parse_count(toks.next(), l0)?;
    if toks.next().is_some() {
        return Err(Error::parse(l0, "trailing text after the counts"));
    }
    let mut women = Vec::with_capacity(nw);
    let mut men = Vec::with_capacity(nm);
    let mut last = l0;
    for i in 0..nw + nm {
        let (ln, line) = lines.next().ok_or_else(|| {
            let what = if i < nw { "W" } else { "M" };
            let idx = if i < nw { i } else { i - nw };
            Error::parse(last + 1, format!("missing `{what} {idx}` line"))
        })?;
        last = ln;
        if i < nw {
            women.push(parse_list_line::<ManId>(line, ln, "W", i, nm)?);
        } else {
            men.push(parse_list_line::<WomanId>(line, ln, "M", i - nw, nw)?);
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::parse(ln, "unexpected line after the last `M` line"));
    }
    Instance::from_rankings(women, men)
}

fn write_lists<T: Participant>(out: &mut String, tag: &str, profile: &Profile<T>) {
    for (i, l) in profile.lists().iter().enumerate() {
        let _ = write!(out, "{tag} {i}:");
        for p in l.ranking() {
            let _ = write!(out, " {}", p.index());
        }
        out.push('\n');
    }
}

pub fn write_instance(instance: &Instance) -> String {
    let mut out = format!("{} {}\n", instance.n_women(), instance.n_men());
    write_lists(&mut out, "W", instance.prefs_w());
    write_lists(&mut out, "M", instance.prefs_m());
    out
}

/// Parses only `W` lines, for replacing the women's side of an instance.
pub fn parse_women_section(text: &str, n_women: usize, n_men: usize) -> Result<WomenProfile> {
    let mut lists = Vec::with_capacity(n_women);
    let mut last = 0;
    for (ln, line) in content_lines(text) {
        if lists.len() == n_women {
            return Err(Error::parse(ln, format!("more than {n_women} `W` lines")));
        }
        lists.push(parse_list_line::<ManId>(line, ln, "W", lists.len(), n_men)?);
        last = ln;
    }
    if lists.len() != n_women {
        return Err(Error::parse(
            last + 1,
            format!("expected {n_women} `W` lines, found {}", lists.len()),
        ));
    }
    Profile::from_rankings(lists, n_men)
}

pub fn write_women_section(profile: &WomenProfile) -> String {
    let mut out = String::new();
    write_lists(&mut out, "W", profile);
    out
}

pub fn parse_matching(text: &str, n_women: usize, n_men: usize) -> Result<Matching> {
    let mut m = Matching::empty(n_women, n_men);
    for (ln, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::parse(ln, "expected `<woman> <man>`"));
        }
        let w = parse_id::<WomanId>(toks[0], n_women, ln)?;
        let man = parse_id::<ManId>(toks[1], n_men, ln)?;
        m.pair(w, man).map_err(|e| Error::parse(ln, e.to_string()))?;
    }
    Ok(m)
}

pub fn write_matching(matching: &Matching) -> String {
    let mut out = String::new();
    for (w, m) in matching.pairs() {
        let _ = writeln!(out, "{} {}", w.0, m.0);
    }
    out
}

/// Parses divorce strategies. Women without a line never divorce.
///
/// ```text
/// w 0 divorce-if-in: 2 3
/// w 1 script: 1:0 3:2
/// ```
pub fn parse_strategies(text: &str, n_women: usize, n_men: usize) -> Result<Vec<DivorceStrategy>> {
    let mut out = vec![DivorceStrategy::Never; n_women];
    let mut seen = BTreeSet::new();
    for (ln, line) in content_lines(text) {
        let (head, tail) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(ln, "expected `w <i> <kind>: ...`"))?;
        let toks: Vec<&str> = head.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "w" {
            return Err(Error::parse(ln, "expected `w <i> <kind>: ...`"));
        }
        let w = parse_id::<WomanId>(toks[1], n_women, ln)?;
        if !seen.insert(w) {
            return Err(Error::parse(ln, format!("second strategy for {w}")));
        }
        out[w.0] = match toks[2] {
            "divorce-if-in" => {
                let mut set = BTreeSet::new();
                for tok in tail.split_whitespace() {
                    set.insert(parse_id::<ManId>(tok, n_men, ln)?);
                }
                DivorceStrategy::DivorceIfPartnerIn(set)
            }
            "script" => {
                let mut reqs = Vec::new();
                for tok in tail.split_whitespace() {
                    let (s, m) = tok
                        .split_once(':')
                        .ok_or_else(|| Error::parse(ln, format!("expected `<season>:<man>`, found `{tok}`")))?;
                    let season: usize = s
                        .parse()
                        .ok()
                        .filter(|&s| s >= 1)
                        .ok_or_else(|| Error::parse(ln, format!("bad season `{s}`")))?;
                    reqs.push((season, parse_id::<ManId>(m, n_men, ln)?));
                }
                DivorceStrategy::Scripted(reqs)
            }
            "never" => DivorceStrategy::Never,
            other => return Err(Error::parse(ln, format!("unknown strategy `{other}`"))),
        };
    }
    Ok(out)
}

pub fn write_strategies(strategies: &[DivorceStrategy]) -> String {
    let mut out = String::new();
    for (i, s) in strategies.iter().enumerate() {
        match s {
            DivorceStrategy::Never => {}
            DivorceStrategy::DivorceIfPartnerIn(set) => {
                let _ = write!(out, "w {i} divorce-if-in:");
                for m in set {
                    let _ = write!(out, " {}", m.0);
                }
                out.push('\n');
            }
            DivorceStrategy::Scripted(reqs) => {
                let _ = write!(out, "w {i} script:");
                for (s, m) in reqs {
                    let _ = write!(out, " {s}:{}", m.0);
                }
                out.push('\n');
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# cyclic\n3 3\nW 0: 0\nW 1: 1 0 2\nW 2: 2 1 0\n\nM 0: 1 2 0\nM 1: 2 0 1\nM 2: 0 1 2\n";

    #[test]
    fn instance_round_trip() {
        let inst = parse_instance(SAMPLE).unwrap();
        assert_eq!(inst.woman(WomanId(0)).ranking(), &[ManId(0)]);
        let text = write_instance(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }

    #[test]
    fn empty_list_and_prefixed_ids() {
        let inst = parse_instance("1 2\nW 0:\nM 0: w0\nM 1:\n").unwrap();
        assert!(inst.woman(WomanId(0)).is_empty());
        assert_eq!(inst.man(ManId(0)).ranking(), &[WomanId(0)]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_instance("1 1\nW 0: 0 0\nM 0: 0\n").unwrap_err();
        assert_eq!(err, Error::parse(2, "m0 listed twice"));
        let err = parse_instance("1 1\nW 0: 1\nM 0: 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_instance("1 1\nM 0: 0\nW 0: 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_instance("2 1\nW 0: 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn matching_round_trip_and_errors() {
        let m = parse_matching("1 0\n0 2\n", 2, 3).unwrap();
        assert_eq!(m.partner_of_woman(WomanId(0)), Some(ManId(2)));
        assert_eq!(parse_matching(&write_matching(&m), 2, 3).unwrap(), m);
        assert!(parse_matching("0 0\n1 0\n", 2, 3).is_err());
        assert!(parse_matching("0 5\n", 2, 3).is_err());
    }

    #[test]
    fn strategies_round_trip() {
        let text = "w 0 divorce-if-in: 1 2\nw 2 script: 1:0 3:1\n";
        let s = parse_strategies(text, 3, 3).unwrap();
        assert_eq!(s[1], DivorceStrategy::Never);
        assert_eq!(write_strategies(&s), text);
        assert!(parse_strategies("w 0 script: 0:1\n", 1, 2).is_err());
    }
}
