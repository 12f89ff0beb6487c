//! `forcematch`: command-line front end.
//!
//! Exit codes: 0 success, 1 verification failed, 2 malformed input,
//! 3 precondition violated, 4 oracle limit exceeded.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use forcematch_core::divorces::{one_divorce_strategy, simulate_with_divorces, Arbiter};
use forcematch_core::format::{
    parse_instance, parse_matching, parse_strategies, parse_women_section, write_instance, write_matching,
    write_strategies, write_women_section,
};
use forcematch_core::generators::{gen_divorce_tight, gen_random, gen_tight_balanced};
use forcematch_core::manipulation::{manipulate, manipulate_general, naive_truncation, ModeRequest, SynthesisOptions};
use forcematch_core::oracle::{
    enumerate_stable_jobs, exhaust_w_profiles, is_unique_stable, some_blacklist_at_least, DEFAULT_MATCHING_LIMIT,
    DEFAULT_PROFILE_LIMIT,
};
use forcematch_core::{
    find_blocking_pairs, run_men, run_sequential, run_women, Error, Instance, Matching, OrderPolicy, RunOptions,
    Side,
};

#[derive(Parser)]
#[command(name = "forcematch", version, about = "Stable matching with blacklists")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Proposing {
    Men,
    Women,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Lowest,
    Highest,
    Fifo,
    Lifo,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Flat,
    General,
    Partial,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArbiterArg {
    Lowest,
    Highest,
}

#[derive(clap::Args)]
struct Limits {
    /// Cap on oracle search nodes or profiles.
    #[arg(long)]
    oracle_limit: Option<u64>,
    /// Worker threads for oracle searches.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run deferred acceptance and print the matching.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "men")]
        proposing: Proposing,
        /// Replace the women's lists with this profile.
        #[arg(long)]
        women: Option<PathBuf>,
        /// One proposal at a time instead of synchronous nights.
        #[arg(long)]
        sequential: bool,
        #[arg(long, value_enum, default_value = "lowest")]
        order: Order,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Append the night-by-night log.
        #[arg(long, conflicts_with = "sequential")]
        trace: bool,
    },
    /// Synthesize a women's profile forcing the matching as the unique
    /// stable one.
    Manipulate {
        instance: PathBuf,
        matching: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        /// Every matched woman lists only her target partner.
        #[arg(long)]
        naive: bool,
        /// Classify steps by the last-serenade rule only.
        #[arg(long)]
        no_shortcut: bool,
        /// Check the construction's invariants after every step.
        #[arg(long)]
        check: bool,
    },
    /// Check stability, and optionally uniqueness, of a matching.
    Verify {
        instance: PathBuf,
        matching: PathBuf,
        #[arg(long)]
        women: Option<PathBuf>,
        #[arg(long)]
        unique: bool,
        #[command(flatten)]
        limits: Limits,
    },
    /// Write a constructed instance with its target matching.
    GenTight {
        /// Cyclic blocks on this many men and women, with `--sizes`.
        #[arg(long, conflicts_with = "divorce", required_unless_present = "divorce")]
        balanced: Option<usize>,
        #[arg(long, value_delimiter = ',', requires = "balanced")]
        sizes: Vec<usize>,
        /// The single-cycle divorce instance on this many men and women.
        #[arg(long)]
        divorce: Option<usize>,
        /// Where to write the target; stdout gets the instance.
        #[arg(long)]
        target_out: Option<PathBuf>,
    },
    /// Write a seeded random instance and target.
    GenRandom {
        #[arg(long)]
        women: usize,
        #[arg(long)]
        men: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Distinct top choices for the men.
        #[arg(long)]
        flat: bool,
        #[arg(long)]
        target_out: Option<PathBuf>,
    },
    /// List every stable matching.
    Enumerate {
        instance: PathBuf,
        #[command(flatten)]
        limits: Limits,
    },
    /// Search all women's profiles that lead the men to the target for one
    /// where every blacklist is shorter than `--min-blacklist`.
    Exhaust {
        instance: PathBuf,
        target: PathBuf,
        #[arg(long)]
        min_blacklist: usize,
        #[command(flatten)]
        limits: Limits,
    },
    /// Run seasons of deferred acceptance with divorces.
    SimulateDivorces {
        instance: PathBuf,
        strategies: PathBuf,
        #[arg(long, value_enum, default_value = "lowest")]
        arbiter: ArbiterArg,
        /// Print every season.
        #[arg(long)]
        log: bool,
    },
    /// Plan at most one divorce per woman reaching the target.
    DivorceManipulate {
        instance: PathBuf,
        matching: PathBuf,
        #[arg(long)]
        strategies_out: Option<PathBuf>,
    },
    /// Time the general synthesis on random instances, as CSV.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        repeat: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_shortcut: bool,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Malformed(_) | Error::Parse { .. } | Error::MalformedState(_) => 2,
            Error::Domain(_) | Error::WrongEntryPoint(_) => 3,
            Error::OracleLimit { .. } => 4,
            Error::ContractViolation(_) | Error::DivorceCycle(_) => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<(String, u8), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map(|_| s)
    } else {
        std::fs::read_to_string(path)
    };
    text.map_err(|e| Failure { code: 2, message: format!("{}: {e}", path.display()) })
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure { code: 2, message: format!("{}: {e}", path.display()) })
}

/// Prefixes parse errors with the file they came from.
fn in_file<T>(path: &Path, r: forcematch_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn load_instance(path: &Path, women: Option<&Path>) -> Result<Instance, Failure> {
    let inst = in_file(path, parse_instance(&read(path)?))?;
    match women {
        None => Ok(inst),
        Some(p) => {
            let w = in_file(p, parse_women_section(&read(p)?, inst.n_women(), inst.n_men()))?;
            Ok(inst.with_women(w)?)
        }
    }
}

fn load_matching(path: &Path, inst: &Instance) -> Result<Matching, Failure> {
    in_file(path, parse_matching(&read(path)?, inst.n_women(), inst.n_men()))
}

fn solve(
    instance: &Path,
    women: Option<&Path>,
    proposing: Proposing,
    sequential: bool,
    order: Order,
    seed: u64,
    trace: bool,
) -> CmdResult {
    let inst = load_instance(instance, women)?;
    let side = match proposing {
        Proposing::Men => Side::Men,
        Proposing::Women => Side::Women,
    };
    if sequential {
        let policy = match order {
            Order::Lowest => OrderPolicy::LowestIndex,
            Order::Highest => OrderPolicy::HighestIndex,
            Order::Fifo => OrderPolicy::Fifo,
            Order::Lifo => OrderPolicy::Lifo,
            Order::Random => OrderPolicy::Random(seed),
        };
        return Ok((write_matching(&run_sequential(&inst, side, policy)), 0));
    }
    let opts = RunOptions { trace };
    let (matching, log) = match side {
        Side::Men => {
            let r = run_men(&inst, opts);
            (r.matching, r.trace.map(|t| t.to_string()))
        }
        Side::Women => {
            let r = run_women(&inst, opts);
            (r.matching, r.trace.map(|t| t.to_string()))
        }
    };
    let mut out = write_matching(&matching);
    if let Some(log) = log {
        for line in log.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    Ok((out, 0))
}

fn manipulate_cmd(instance: &Path, matching: &Path, mode: ModeArg, naive: bool, no_shortcut: bool, check: bool) -> CmdResult {
    let inst = load_instance(instance, None)?;
    let mu = load_matching(matching, &inst)?;
    let res = if naive {
        naive_truncation(&inst, &mu)?
    } else {
        let mode = match mode {
            ModeArg::Auto => ModeRequest::Auto,
            ModeArg::Flat => ModeRequest::Flat,
            ModeArg::General => ModeRequest::General,
            ModeArg::Partial => ModeRequest::Partial,
        };
        let opts = SynthesisOptions { shortcut: !no_shortcut, check_invariants: check };
        manipulate(&inst, &mu, mode, opts)?
    };
    let mut out = write_women_section(&res.prefs_w);
    let _ = writeln!(out, "{}", res.footer());
    let it = &res.iterations;
    let _ = writeln!(
        out,
        "# iterations cheap={} expensive={} prephase={} n_h={}",
        it.cheap, it.expensive, it.prephase, res.n_h
    );
    Ok((out, 0))
}

fn verify(instance: &Path, matching: &Path, women: Option<&Path>, unique: bool, limits: &Limits) -> CmdResult {
    let inst = load_instance(instance, women)?;
    let mu = load_matching(matching, &inst)?;
    let report = find_blocking_pairs(&inst, &mu)?;
    let mut out = String::new();
    if !report.is_stable() {
        out.push_str("unstable\n");
        for (w, m) in &report.blocking {
            let _ = writeln!(out, "blocking {w} {m}");
        }
        for (w, m) in &report.irrational {
            let _ = writeln!(out, "unacceptable {w} {m}");
        }
        return Ok((out, 1));
    }
    out.push_str("stable\n");
    if !unique {
        return Ok((out, 0));
    }
    let limit = limits.oracle_limit.unwrap_or(DEFAULT_MATCHING_LIMIT);
    if is_unique_stable(&inst, &mu, limit)? {
        out.push_str("unique\n");
        return Ok((out, 0));
    }
    let all = enumerate_stable_jobs(&inst, limit, limits.jobs)?;
    let _ = writeln!(out, "not unique: {} stable matchings", all.len());
    push_matchings(&mut out, &all);
    Ok((out, 1))
}

fn push_matchings<'a>(out: &mut String, all: impl IntoIterator<Item = &'a Matching>) {
    for (i, m) in all.into_iter().enumerate() {
        let _ = writeln!(out, "# matching {}", i + 1);
        out.push_str(&write_matching(m));
    }
}

fn gen_tight(balanced: Option<usize>, sizes: &[usize], divorce: Option<usize>, target_out: Option<&Path>) -> CmdResult {
    let (inst, target) = match (balanced, divorce) {
        (Some(n), _) => {
            let t = gen_tight_balanced(n, sizes)?;
            (t.instance, t.target)
        }
        (None, Some(n)) => gen_divorce_tight(n)?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    emit_instance(&inst, &target, target_out)
}

fn emit_instance(inst: &Instance, target: &Matching, target_out: Option<&Path>) -> CmdResult {
    let mut out = write_instance(inst);
    match target_out {
        Some(p) => write(p, &write_matching(target))?,
        None => {
            out.push_str("# target\n");
            for line in write_matching(target).lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
    }
    Ok((out, 0))
}

fn exhaust(instance: &Path, target: &Path, k: usize, limits: &Limits) -> CmdResult {
    let inst = load_instance(instance, None)?;
    let mu = load_matching(target, &inst)?;
    let limit = limits.oracle_limit.unwrap_or(DEFAULT_PROFILE_LIMIT);
    match exhaust_w_profiles(inst.prefs_m(), &mu, some_blacklist_at_least(k), limit, limits.jobs)? {
        None => Ok((format!("none: every such profile has a blacklist of size >= {k}\n"), 0)),
        Some(p) => {
            let mut out = format!("# counterexample: every blacklist shorter than {k}\n");
            out.push_str(&write_women_section(&p));
            Ok((out, 1))
        }
    }
}

fn simulate(instance: &Path, strategies: &Path, arbiter: ArbiterArg, log: bool) -> CmdResult {
    let inst = load_instance(instance, None)?;
    let s = in_file(strategies, parse_strategies(&read(strategies)?, inst.n_women(), inst.n_men()))?;
    let arbiter = match arbiter {
        ArbiterArg::Lowest => Arbiter::LowestIndex,
        ArbiterArg::Highest => Arbiter::HighestIndex,
    };
    let (end, seasons) = simulate_with_divorces(&inst, &s, arbiter)?;
    let mut out = write_matching(&end);
    let _ = writeln!(out, "# divorces={} seasons={}", seasons.divorce_count(), seasons.seasons.len());
    if log {
        for line in seasons.to_string().lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    Ok((out, 0))
}

fn divorce_manipulate(instance: &Path, matching: &Path, strategies_out: Option<&Path>) -> CmdResult {
    let inst = load_instance(instance, None)?;
    let mu = load_matching(matching, &inst)?;
    let plan = one_divorce_strategy(&inst, &mu)?;
    let mut out = write_women_section(&plan.prefs_w);
    let strategies = write_strategies(&plan.strategies);
    let divorcing = plan.strategies.iter().filter(|s| **s != forcematch_core::divorces::DivorceStrategy::Never).count();
    let _ = writeln!(out, "# divorcing women={divorcing}");
    match strategies_out {
        Some(p) => write(p, &strategies)?,
        None => {
            for line in strategies.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
    }
    Ok((out, 0))
}

fn bench(ns: &[usize], repeat: u64, seed: u64, no_shortcut: bool) -> CmdResult {
    let opts = SynthesisOptions { shortcut: !no_shortcut, check_invariants: false };
    let mut out = String::from("n,seed,cheap_iters,expensive_iters,nanos\n");
    for &n in ns {
        for s in seed..seed + repeat {
            let (inst, mu) = gen_random(n, n, s, false)?;
            let start = Instant::now();
            let res = manipulate_general(&inst, &mu, opts)?;
            let nanos = start.elapsed().as_nanos();
            let _ = writeln!(out, "{n},{s},{},{},{nanos}", res.iterations.cheap, res.iterations.expensive);
        }
    }
    Ok((out, 0))
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Solve { instance, proposing, women, sequential, order, seed, trace } => {
            solve(&instance, women.as_deref(), proposing, sequential, order, seed, trace)
        }
        Command::Manipulate { instance, matching, mode, naive, no_shortcut, check } => {
            manipulate_cmd(&instance, &matching, mode, naive, no_shortcut, check)
        }
        Command::Verify { instance, matching, women, unique, limits } => {
            verify(&instance, &matching, women.as_deref(), unique, &limits)
        }
        Command::GenTight { balanced, sizes, divorce, target_out } => {
            gen_tight(balanced, &sizes, divorce, target_out.as_deref())
        }
        Command::GenRandom { women, men, seed, flat, target_out } => {
            let (inst, mu) = gen_random(women, men.unwrap_or(women), seed, flat)?;
            emit_instance(&inst, &mu, target_out.as_deref())
        }
        Command::Enumerate { instance, limits } => {
            let inst = load_instance(&instance, None)?;
            let all = enumerate_stable_jobs(&inst, limits.oracle_limit.unwrap_or(DEFAULT_MATCHING_LIMIT), limits.jobs)?;
            let mut out = format!("# {} stable matchings\n", all.len());
            push_matchings(&mut out, &all);
            Ok((out, 0))
        }
        Command::Exhaust { instance, target, min_blacklist, limits } => exhaust(&instance, &target, min_blacklist, &limits),
        Command::SimulateDivorces { instance, strategies, arbiter, log } => simulate(&instance, &strategies, arbiter, log),
        Command::DivorceManipulate { instance, matching, strategies_out } => {
            divorce_manipulate(&instance, &matching, strategies_out.as_deref())
        }
        Command::Bench { n, repeat, seed, no_shortcut } => bench(&n, repeat, seed, no_shortcut),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
