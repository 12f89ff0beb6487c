//! Stable matching with blacklists: deferred acceptance, brute-force
//! oracles, and synthesis of women's preference profiles that force a chosen
//! matching as the unique stable matching.

pub mod divorces;
pub mod engine;
pub mod error;
pub mod format;
pub mod generators;
pub mod manipulation;
pub mod model;
pub mod oracle;

pub use engine::{
    find_blocking_pairs, is_stable, run, run_from_state, run_men, run_sequential, run_women,
    BlockingReport, OrderPolicy, RunOptions, RunStats, RunTrace,
};
pub use error::{Error, Result};
pub use model::{
    is_rational, prefers, Instance, ManId, Matching, MenProfile, Participant, PreferenceList,
    Profile, Side, WomanId, WomenProfile,
};
