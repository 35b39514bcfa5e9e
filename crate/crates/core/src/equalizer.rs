//! Support equalization: derive per-item minimum supports from the rules of
//! a single-support run so that a multi-support run reproduces them.

use serde::Serialize;

use crate::counting::{canonical_cmp, Counter, Itemset, SupportIndex};
use crate::dataset::{Item, ItemDictionary, TransactionSet};
use crate::error::Result;
use crate::miners::MinsupTable;
use crate::pipeline::{self, MinsupSpec, PipelineOptions};
use crate::ratio::Rational;
use crate::rules::{Algorithm, Rule, RuleSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AssignmentSource {
    /// Threshold is the smallest floor among the rules containing the item.
    /// `contributions` pairs rule positions with their floors; `witness` is
    /// the position of a rule attaining the minimum.
    Rule {
        witness: usize,
        contributions: Vec<(usize, u64)>,
    },
    /// Item appears in no rule; threshold is its support plus one.
    Excluded { support: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemAssignment {
    pub item: Item,
    pub threshold: u64,
    pub source: AssignmentSource,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqualizationReport {
    pub table: MinsupTable,
    /// One entry per dictionary item, by id.
    pub assignments: Vec<ItemAssignment>,
    pub excluded_items: Vec<Item>,
}

#[derive(Serialize)]
struct ProvenanceEntry<'a> {
    item: &'a str,
    threshold: u64,
    source: &'static str,
}

impl EqualizationReport {
    /// `[{item, threshold, source: rule|excluded}]`
    pub fn provenance_json(&self, dictionary: &ItemDictionary) -> String {
        let entries: Vec<ProvenanceEntry> = self
            .assignments
            .iter()
            .map(|a| ProvenanceEntry {
                item: dictionary.label(a.item),
                threshold: a.threshold,
                source: match a.source {
                    AssignmentSource::Rule { .. } => "rule",
                    AssignmentSource::Excluded { .. } => "excluded",
                },
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&entries).expect("provenance json");
        text.push('\n');
        text
    }

    /// Rule-derived thresholds scaled by `factor` (ceiling); exclusions kept.
    pub fn scaled_table(&self, factor: Rational) -> MinsupTable {
        let mut table = self.table.clone();
        for a in &self.assignments {
            if let AssignmentSource::Rule { .. } = a.source {
                table.set(a.item, crate::ratio::ceil_count(factor, a.threshold));
            }
        }
        table
    }
}

/// Every subset of the rule's items with at least two members, shortest
/// first.
pub fn rule_itemsets(rule: &Rule) -> Vec<Itemset> {
    let full = rule.itemset();
    let k = full.len();
    let mut out: Vec<Itemset> = (1..1u64 << k)
        .filter(|m| m.count_ones() >= 2)
        .map(|m| full.masked(m))
        .collect();
    out.sort_by(canonical_cmp);
    out
}

/// Smallest support among the rule's itemsets.
pub fn rule_floor(rule: &Rule, index: &SupportIndex) -> Result<u64> {
    rule_itemsets(rule)
        .iter()
        .map(|s| index.require(s))
        .try_fold(u64::MAX, |acc, s| Ok(acc.min(s?)))
}

/// Per-item thresholds from `rules`. Items in some rule take the smallest
/// floor of the rules containing them; other items get their support plus
/// one so they drop out of `L1`. Counts missing from `index` are taken from
/// `ts`.
pub fn derive_minsups(
    rules: &RuleSet,
    ts: &TransactionSet,
    index: &mut SupportIndex,
    counter: &Counter,
) -> Result<EqualizationReport> {
    let mut wanted: Vec<Itemset> = rules.iter().flat_map(rule_itemsets).collect();
    wanted.extend(ts.dictionary().items().map(Itemset::singleton));
    index.ensure(ts, &wanted, counter)?;

    let n_items = ts.n_items();
    let mut contributions: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n_items];
    for (pos, rule) in rules.iter().enumerate() {
        let floor = rule_floor(rule, index)?;
        for &item in rule.itemset().items() {
            contributions[item.index()].push((pos, floor));
        }
    }

    let mut table = MinsupTable::new(n_items);
    let mut assignments = Vec::with_capacity(n_items);
    let mut excluded_items = Vec::new();
    for (id, contrib) in contributions.into_iter().enumerate() {
        let item = Item(id as u32);
        let assignment = match contrib.iter().min_by_key(|&&(pos, floor)| (floor, pos)) {
            Some(&(witness, threshold)) => ItemAssignment {
                item,
                threshold,
                source: AssignmentSource::Rule {
                    witness,
                    contributions: contrib,
                },
            },
            None => {
                let support = index.require(&Itemset::singleton(item))?;
                excluded_items.push(item);
                ItemAssignment {
                    item,
                    threshold: support + 1,
                    source: AssignmentSource::Excluded { support },
                }
            }
        };
        table.set(item, assignment.threshold);
        assignments.push(assignment);
    }
    Ok(EqualizationReport {
        table,
        assignments,
        excluded_items,
    })
}

#[derive(Clone, Debug)]
pub struct Verification {
    /// Every single-support rule was reproduced.
    pub subset_ok: bool,
    /// Multi-support rules the derived thresholds additionally admit.
    pub extra_rules: RuleSet,
    pub report: EqualizationReport,
    pub multi_rules: RuleSet,
}

/// Derives a table from `sar_rules`, reruns the simple-rule multi-support
/// pipeline with it and compares the two rule sets.
pub fn verify_equalization(
    sar_rules: &RuleSet,
    ts: &TransactionSet,
    minconf: Rational,
    options: &PipelineOptions,
) -> Result<Verification> {
    let mut index = SupportIndex::new();
    let report = derive_minsups(sar_rules, ts, &mut index, &options.counter)?;
    let out = pipeline::run(
        Algorithm::Sarmsmc,
        ts,
        &MinsupSpec::Table(report.table.clone()),
        minconf,
        options,
    )?;
    Ok(Verification {
        subset_ok: sar_rules.is_subset_of(&out.rules),
        extra_rules: out.rules.difference(sar_rules),
        report,
        multi_rules: out.rules,
    })
}
