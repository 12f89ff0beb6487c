//! Python bindings. Lists are plain `list[list[int]]`; a matching is the
//! list of each woman's partner, `None` for single women.

// The pyfunction macro expands to `PyErr::from(PyErr)` conversions.
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use forcematch_core::divorces::{one_divorce_strategy, simulate_with_divorces, Arbiter, DivorceStrategy};
use forcematch_core::generators::{gen_random as core_gen_random, gen_tight_balanced};
use forcematch_core::manipulation::{manipulate as core_manipulate, ModeRequest, SynthesisOptions};
use forcematch_core::oracle::{enumerate_stable as core_enumerate, is_unique_stable, DEFAULT_MATCHING_LIMIT};
use forcematch_core::{
    find_blocking_pairs, run, Error, Instance, ManId, Matching, Profile, Side,
};

type Lists = Vec<Vec<usize>>;
type Partners = Vec<Option<usize>>;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Malformed(_) | Error::Parse { .. } | Error::MalformedState(_) | Error::Domain(_) | Error::WrongEntryPoint(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn instance(women: &Lists, men: &Lists) -> PyResult<Instance> {
    let w: Vec<&[usize]> = women.iter().map(Vec::as_slice).collect();
    let m: Vec<&[usize]> = men.iter().map(Vec::as_slice).collect();
    Instance::from_indices(&w, &m).map_err(to_py)
}

fn to_matching(inst: &Instance, partners: &Partners) -> PyResult<Matching> {
    let p: Vec<Option<ManId>> = partners.iter().map(|m| m.map(ManId)).collect();
    if p.len() != inst.n_women() {
        return Err(PyValueError::new_err(format!(
            "matching lists {} women, the instance has {}",
            p.len(),
            inst.n_women()
        )));
    }
    Matching::from_women(&p, inst.n_men()).map_err(to_py)
}

fn partners(m: &Matching) -> Partners {
    m.women_partners().iter().map(|p| p.map(|m| m.0)).collect()
}

fn lists<T: forcematch_core::Participant>(p: &Profile<T>) -> Lists {
    p.rankings().iter().map(|l| l.iter().map(|x| x.index()).collect()).collect()
}

fn side(s: &str) -> PyResult<Side> {
    match s {
        "men" => Ok(Side::Men),
        "women" => Ok(Side::Women),
        _ => Err(PyValueError::new_err(format!("proposing must be 'men' or 'women', not {s:?}"))),
    }
}

/// Deferred acceptance; returns each woman's partner.
#[pyfunction]
#[pyo3(signature = (women, men, proposing = "men"))]
fn solve(women: Lists, men: Lists, proposing: &str) -> PyResult<Partners> {
    let inst = instance(&women, &men)?;
    Ok(partners(&run(&inst, side(proposing)?)))
}

/// Blocking pairs `(woman, man)` of a matching; empty when stable.
#[pyfunction]
fn blocking_pairs(women: Lists, men: Lists, matching: Partners) -> PyResult<Vec<(usize, usize)>> {
    let inst = instance(&women, &men)?;
    let mu = to_matching(&inst, &matching)?;
    let r = find_blocking_pairs(&inst, &mu).map_err(to_py)?;
    Ok(r.blocking.iter().chain(&r.irrational).map(|(w, m)| (w.0, m.0)).collect())
}

/// Every stable matching, by brute force.
#[pyfunction]
#[pyo3(signature = (women, men, limit = DEFAULT_MATCHING_LIMIT))]
fn enumerate_stable(women: Lists, men: Lists, limit: u64) -> PyResult<Vec<Partners>> {
    let inst = instance(&women, &men)?;
    let all = core_enumerate(&inst, limit).map_err(to_py)?;
    Ok(all.iter().map(partners).collect())
}

#[pyfunction]
#[pyo3(signature = (women, men, matching, limit = DEFAULT_MATCHING_LIMIT))]
fn is_unique(women: Lists, men: Lists, matching: Partners, limit: u64) -> PyResult<bool> {
    let inst = instance(&women, &men)?;
    let mu = to_matching(&inst, &matching)?;
    is_unique_stable(&inst, &mu, limit).map_err(to_py)
}

/// Women's lists forcing `matching` as the unique stable matching, with
/// blacklist statistics.
#[pyfunction]
#[pyo3(signature = (women, men, matching, mode = "auto"))]
fn manipulate<'py>(py: Python<'py>, women: Lists, men: Lists, matching: Partners, mode: &str) -> PyResult<Bound<'py, PyDict>> {
    let inst = instance(&women, &men)?;
    let mu = to_matching(&inst, &matching)?;
    let mode = match mode {
        "auto" => ModeRequest::Auto,
        "flat" => ModeRequest::Flat,
        "general" => ModeRequest::General,
        "partial" => ModeRequest::Partial,
        _ => return Err(PyValueError::new_err(format!("unknown mode {mode:?}"))),
    };
    let res = core_manipulate(&inst, &mu, mode, SynthesisOptions::default()).map_err(to_py)?;
    let d = PyDict::new_bound(py);
    d.set_item("women", lists(&res.prefs_w))?;
    d.set_item("n_b", res.stats.n_b)?;
    d.set_item("combined", res.stats.combined)?;
    d.set_item("disjoint", res.stats.disjoint)?;
    d.set_item("mode", res.mode.to_string())?;
    d.set_item("cheap", res.iterations.cheap)?;
    d.set_item("expensive", res.iterations.expensive)?;
    Ok(d)
}

/// Seeded random instance: `(women, men, matching)`.
#[pyfunction]
#[pyo3(signature = (n_women, n_men, seed, flat = false))]
fn gen_random(n_women: usize, n_men: usize, seed: u64, flat: bool) -> PyResult<(Lists, Lists, Partners)> {
    let (inst, mu) = core_gen_random(n_women, n_men, seed, flat).map_err(to_py)?;
    Ok((lists(inst.prefs_w()), lists(inst.prefs_m()), partners(&mu)))
}

/// Cyclic-block instance: `(women, men, target)` where the women's lists
/// are the witness profile.
#[pyfunction]
fn gen_tight(n: usize, sizes: Vec<usize>) -> PyResult<(Lists, Lists, Partners)> {
    let t = gen_tight_balanced(n, &sizes).map_err(to_py)?;
    Ok((lists(t.instance.prefs_w()), lists(t.instance.prefs_m()), partners(&t.target)))
}

/// Plans divorces reaching `matching` and simulates them. Returns the final
/// matching and the divorces granted, as `(woman, man)` in order.
#[pyfunction]
fn divorce_plan(women: Lists, men: Lists, matching: Partners) -> PyResult<(Partners, Vec<(usize, usize)>)> {
    let inst = instance(&women, &men)?;
    let mu = to_matching(&inst, &matching)?;
    let plan = one_divorce_strategy(&inst, &mu).map_err(to_py)?;
    let with = inst.with_women(plan.prefs_w).map_err(to_py)?;
    let (end, log) = simulate_with_divorces(&with, &plan.strategies, Arbiter::default()).map_err(to_py)?;
    Ok((partners(&end), log.divorces().map(|(w, m)| (w.0, m.0)).collect()))
}

/// Simulates seasons where woman `w` divorces whenever her partner is in
/// `divorce_if[w]`.
#[pyfunction]
fn simulate_divorces(women: Lists, men: Lists, divorce_if: Vec<Vec<usize>>) -> PyResult<(Partners, usize)> {
    let inst = instance(&women, &men)?;
    if divorce_if.len() != inst.n_women() {
        return Err(PyValueError::new_err("one divorce set per woman"));
    }
    let strategies: Vec<DivorceStrategy> = divorce_if
        .into_iter()
        .map(|set| {
            if set.is_empty() {
                DivorceStrategy::Never
            } else {
                DivorceStrategy::DivorceIfPartnerIn(set.into_iter().map(ManId).collect())
            }
        })
        .collect();
    let (end, log) = simulate_with_divorces(&inst, &strategies, Arbiter::default()).map_err(to_py)?;
    Ok((partners(&end), log.divorce_count()))
}

#[pymodule]
fn forcematch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(blocking_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_stable, m)?)?;
    m.add_function(wrap_pyfunction!(is_unique, m)?)?;
    m.add_function(wrap_pyfunction!(manipulate, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random, m)?)?;
    m.add_function(wrap_pyfunction!(gen_tight, m)?)?;
    m.add_function(wrap_pyfunction!(divorce_plan, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_divorces, m)?)?;
    Ok(())
}
