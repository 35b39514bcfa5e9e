//! The four end-to-end pipelines: itemset mining followed by rule
//! generation, with the two phases timed separately.

use std::time::{Duration, Instant};

use crate::counting::{Counter, Itemset, SupportIndex};
use crate::dataset::TransactionSet;
use crate::error::{Error, Result};
use crate::miners::{mine_apriori, mine_max_constraints, FrequentLevels, MinsupTable, MiningStats};
use crate::ratio::Rational;
use crate::rules::{generate_all_rules, generate_simple_rules, Algorithm, RuleSet};

/// Itemset thresholds: one count for single-support pipelines, a table for
/// multi-support ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinsupSpec {
    Single(u64),
    Table(MinsupTable),
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub algorithm: Algorithm,
    pub levels: FrequentLevels,
    pub stats: MiningStats,
    pub index: SupportIndex,
    pub rules: RuleSet,
    pub itemset_time: Duration,
    pub rule_time: Duration,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PipelineOptions {
    pub counter: Counter,
    pub max_rules: Option<usize>,
}

pub fn run(
    algorithm: Algorithm,
    ts: &TransactionSet,
    minsup: &MinsupSpec,
    minconf: Rational,
    options: &PipelineOptions,
) -> Result<PipelineOutput> {
    let counter = &options.counter;
    let item_phase = Instant::now();
    let (levels, stats) = match (algorithm.multi_support(), minsup) {
        (false, MinsupSpec::Single(m)) => mine_apriori(ts, *m, counter),
        (true, MinsupSpec::Table(table)) => mine_max_constraints(ts, table, counter)?,
        (false, MinsupSpec::Table(_)) => {
            return Err(Error::AlgorithmMismatch {
                algorithm: algorithm.name(),
                expected: "a single minimum support",
            })
        }
        (true, MinsupSpec::Single(_)) => {
            return Err(Error::AlgorithmMismatch {
                algorithm: algorithm.name(),
                expected: "a minimum support table",
            })
        }
    };
    let itemset_time = item_phase.elapsed();

    let rule_phase = Instant::now();
    let mut index = levels.index();
    complete_for_rules(&mut index, &levels, ts, counter, algorithm.simple_rules())?;
    let rules = if algorithm.simple_rules() {
        generate_simple_rules(&levels, minconf, &index, options.max_rules)?
    } else {
        generate_all_rules(&levels, minconf, &index, options.max_rules)?
    }
    .with_source(algorithm);
    let rule_time = rule_phase.elapsed();

    Ok(PipelineOutput {
        algorithm,
        levels,
        stats,
        index,
        rules,
        itemset_time,
        rule_time,
    })
}

/// Counts any antecedent or consequent the mining phase did not record.
/// Both miners produce downward-closed levels, so this is normally a no-op.
pub fn complete_for_rules(
    index: &mut SupportIndex,
    levels: &FrequentLevels,
    ts: &TransactionSet,
    counter: &Counter,
    simple_only: bool,
) -> Result<usize> {
    let mut wanted: Vec<Itemset> = Vec::new();
    for full in levels.levels().iter().skip(1).flatten() {
        let k = full.itemset.len();
        if simple_only {
            wanted.extend(full.itemset.drop_one_subsets());
            wanted.extend(full.itemset.items().iter().map(|&i| Itemset::singleton(i)));
        } else if k < 64 {
            wanted.extend((1..(1u64 << k) - 1).map(|m| full.itemset.masked(m)));
        }
    }
    wanted.retain(|s| index.get(s.items()).is_none());
    index.ensure(ts, &wanted, counter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{parse_transactions, Format};
    use num_rational::Ratio;

    fn corpus() -> TransactionSet {
        parse_transactions("A B C\nA B\nA C\nB C\nA B C\n", Format::Basket).unwrap()
    }

    #[test]
    fn rejects_mismatched_thresholds() {
        let ts = corpus();
        let opts = PipelineOptions::default();
        let table = MinsupSpec::Table(MinsupTable::uniform(3, 3));
        assert!(matches!(
            run(Algorithm::Apriori, &ts, &table, Ratio::new(3, 4), &opts),
            Err(Error::AlgorithmMismatch { .. })
        ));
        assert!(matches!(
            run(Algorithm::Sarmsmc, &ts, &MinsupSpec::Single(3), Ratio::new(3, 4), &opts),
            Err(Error::AlgorithmMismatch { .. })
        ));
    }

    #[test]
    fn sources_are_labelled() {
        let ts = corpus();
        let opts = PipelineOptions::default();
        for alg in Algorithm::ALL {
            let spec = if alg.multi_support() {
                MinsupSpec::Table(MinsupTable::uniform(3, 3))
            } else {
                MinsupSpec::Single(3)
            };
            let out = run(alg, &ts, &spec, Ratio::new(3, 4), &opts).unwrap();
            assert_eq!(out.rules.source(), alg);
            assert_eq!(out.rules.len(), 6);
            assert_eq!(out.levels.len(), 6);
        }
    }

    #[test]
    fn completes_a_sparse_index() {
        let ts = corpus();
        let (levels, _) = mine_apriori(&ts, 2, &Counter::default());
        let mut index = SupportIndex::new();
        let scans = complete_for_rules(&mut index, &levels, &ts, &Counter::default(), false).unwrap();
        assert_eq!(scans, 2);
        assert_eq!(index.len(), 6);
    }
}
