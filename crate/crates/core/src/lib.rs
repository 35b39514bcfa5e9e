//! Frequent itemset and association rule mining with a single minimum
//! support (Apriori) or per-item minimum supports under the maximum
//! constraint, all-rules or simple-rules generation, support equalization
//! between the two settings, and a benchmark harness.

pub mod bench;
pub mod cli;
pub mod counting;
pub mod dataset;
pub mod equalizer;
pub mod error;
pub mod miners;
pub mod pipeline;
pub mod ratio;
pub mod rules;

pub use counting::{
    brute_force_frequent, count_singletons, count_supports, CountStrategy, Counter, Itemset, ItemsetRecord,
    SupportIndex,
};
pub use dataset::{
    generate_synthetic, load_transactions, split_train_test, Format, Item, ItemDictionary,
    Transaction, TransactionSet,
};
pub use equalizer::{derive_minsups, verify_equalization, EqualizationReport};
pub use error::{Error, Result};
pub use miners::{mine_apriori, mine_max_constraints, FrequentLevels, MinsupTable, MiningStats};
pub use pipeline::{MinsupSpec, PipelineOptions, PipelineOutput};
pub use ratio::{Rational, Threshold};
pub use rules::{Algorithm, Rule, RuleSet};
