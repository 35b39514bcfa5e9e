//! Level-wise frequent itemset mining: single-minsup Apriori and
//! per-item minimum supports under the maximum constraint.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::counting::{Counter, Itemset, ItemsetRecord, SupportIndex};
use crate::dataset::{Item, ItemDictionary, TransactionSet};
use crate::error::{Error, Result};
use crate::ratio::{parse_rational, Threshold};

/// Per-item minimum support counts with an optional fallback.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinsupTable {
    thresholds: Vec<Option<u64>>,
    default: Option<u64>,
}

impl MinsupTable {
    /// A table with no explicit entries.
    pub fn new(n_items: usize) -> Self {
        MinsupTable {
            thresholds: vec![None; n_items],
            default: None,
        }
    }

    pub fn uniform(n_items: usize, minsup: u64) -> Self {
        MinsupTable {
            thresholds: vec![Some(minsup); n_items],
            default: None,
        }
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        MinsupTable {
            thresholds: counts.iter().copied().map(Some).collect(),
            default: None,
        }
    }

    pub fn set(&mut self, item: Item, minsup: u64) {
        if self.thresholds.len() <= item.index() {
            self.thresholds.resize(item.index() + 1, None);
        }
        self.thresholds[item.index()] = Some(minsup);
    }

    pub fn set_default(&mut self, minsup: Option<u64>) {
        self.default = minsup;
    }

    pub fn default_threshold(&self) -> Option<u64> {
        self.default
    }

    pub fn explicit(&self, item: Item) -> Option<u64> {
        self.thresholds.get(item.index()).copied().flatten()
    }

    pub fn resolve(&self, item: Item) -> Result<u64> {
        self.explicit(item)
            .or(self.default)
            .ok_or(Error::UnresolvedItem(item.0))
    }

    /// Thresholds for items `0..n_items`, failing on the first gap.
    pub fn resolve_all(&self, n_items: usize) -> Result<Vec<u64>> {
        (0..n_items as u32).map(|i| self.resolve(Item(i))).collect()
    }

    /// Parses `label,threshold` lines. A threshold is an integer count or a
    /// percentage ending in `%`, converted with a ceiling against
    /// `corpus_size`. The label `*` sets the default.
    pub fn parse(text: &str, dictionary: &ItemDictionary, corpus_size: usize) -> Result<Self> {
        let mut table = MinsupTable::new(dictionary.len());
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, value) = line
                .rsplit_once(',')
                .ok_or_else(|| Error::parse(lineno, "expected item_label,threshold"))?;
            let (label, value) = (label.trim(), value.trim());
            let count = if let Some(pct) = value.strip_suffix('%') {
                let pct = parse_rational(pct).map_err(|e| Error::parse(lineno, e.to_string()))?;
                Threshold::Fraction(pct / 100).resolve(corpus_size)
            } else {
                value
                    .parse::<u64>()
                    .map_err(|_| Error::parse(lineno, format!("bad threshold {value:?}")))?
            };
            if label == "*" {
                if table.default.is_some() {
                    return Err(Error::parse(lineno, "default given twice"));
                }
                table.default = Some(count);
                continue;
            }
            let item = dictionary
                .get(label)
                .ok_or_else(|| Error::parse(lineno, format!("unknown item {label:?}")))?;
            if table.explicit(item).is_some() {
                return Err(Error::parse(lineno, format!("item {label:?} listed twice")));
            }
            table.set(item, count);
        }
        Ok(table)
    }

    /// File form: explicit entries by item id, then the default if any.
    pub fn to_file_string(&self, dictionary: &ItemDictionary) -> String {
        let mut out = String::new();
        for (id, t) in self.thresholds.iter().enumerate() {
            if let Some(t) = t {
                let _ = writeln!(out, "{},{t}", dictionary.label(Item(id as u32)));
            }
        }
        if let Some(d) = self.default {
            let _ = writeln!(out, "*,{d}");
        }
        out
    }
}

/// `mI`: the largest per-item threshold among the itemset's items.
pub fn max_constraint(itemset: &Itemset, table: &MinsupTable) -> Result<u64> {
    itemset
        .items()
        .iter()
        .map(|&i| table.resolve(i))
        .try_fold(0, |acc, t| Ok(acc.max(t?)))
}

/// Frequent itemsets by length; `levels()[k - 1]` holds `L_k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequentLevels {
    levels: Vec<Vec<ItemsetRecord>>,
    corpus_size: usize,
}

impl FrequentLevels {
    pub fn new(levels: Vec<Vec<ItemsetRecord>>, corpus_size: usize) -> Self {
        let mut levels = levels;
        while levels.last().is_some_and(Vec::is_empty) {
            levels.pop();
        }
        FrequentLevels {
            levels,
            corpus_size,
        }
    }

    pub fn levels(&self) -> &[Vec<ItemsetRecord>] {
        &self.levels
    }

    /// `L_k`, empty past the last level.
    pub fn level(&self, k: usize) -> &[ItemsetRecord] {
        k.checked_sub(1)
            .and_then(|i| self.levels.get(i))
            .map_or(&[], Vec::as_slice)
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &ItemsetRecord> {
        self.levels.iter().flatten()
    }

    pub fn counts_per_level(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn index(&self) -> SupportIndex {
        SupportIndex::from_records(self.iter())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MiningStats {
    pub candidates_per_level: Vec<usize>,
    pub db_scans: usize,
    pub itemset_time: Duration,
}

/// Joins `L_{k-1}` with itself: two itemsets sharing their first `k - 2`
/// items yield their union. Input must be in canonical order.
pub fn join_step(prev_level: &[Itemset]) -> Vec<Itemset> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < prev_level.len() {
        let head = prev_level[start].items();
        let prefix = &head[..head.len() - 1];
        let mut end = start + 1;
        while end < prev_level.len() && prev_level[end].items().starts_with(prefix) {
            end += 1;
        }
        for i in start..end {
            let a = prev_level[i].items();
            for b in &prev_level[i + 1..end] {
                let mut items = a.to_vec();
                items.push(*b.items().last().expect("non-empty"));
                out.push(Itemset::from_sorted(items));
            }
        }
        start = end;
    }
    out
}

/// Keeps candidates whose every `(k-1)`-subset is in `prev_level_set`.
pub fn prune_step(candidates: Vec<Itemset>, prev_level_set: &HashSet<Itemset>) -> Vec<Itemset> {
    let mut buf: Vec<Item> = Vec::new();
    candidates
        .into_iter()
        .filter(|c| {
            let items = c.items();
            (0..items.len()).all(|skip| {
                buf.clear();
                buf.extend(items[..skip].iter().chain(&items[skip + 1..]));
                buf.is_empty() || prev_level_set.contains(buf.as_slice())
            })
        })
        .collect()
}

/// Classic level-wise Apriori at a single absolute `minsup`.
pub fn mine_apriori(
    ts: &TransactionSet,
    minsup: u64,
    counter: &Counter,
) -> (FrequentLevels, MiningStats) {
    let started = Instant::now();
    let mut stats = MiningStats::default();

    let l1: Vec<ItemsetRecord> = counter
        .count_singletons(ts)
        .into_iter()
        .filter(|r| r.support >= minsup)
        .collect();
    stats.candidates_per_level.push(ts.n_items());
    stats.db_scans += 1;

    let mut levels = vec![l1];
    loop {
        let prev: Vec<Itemset> = levels
            .last()
            .expect("at least L1")
            .iter()
            .map(|r| r.itemset.clone())
            .collect();
        if prev.is_empty() {
            break;
        }
        let prev_set: HashSet<Itemset> = prev.iter().cloned().collect();
        let candidates = prune_step(join_step(&prev), &prev_set);
        if candidates.is_empty() {
            break;
        }
        stats.candidates_per_level.push(candidates.len());
        stats.db_scans += 1;
        let next: Vec<ItemsetRecord> = counter
            .count_supports(ts, &candidates)
            .expect("candidates come from the corpus dictionary")
            .into_iter()
            .filter(|r| r.support >= minsup)
            .collect();
        levels.push(next);
    }

    stats.itemset_time = started.elapsed();
    (FrequentLevels::new(levels, ts.n()), stats)
}

/// Multiple minimum supports with the maximum constraint. Candidates come
/// from joining the previous frequent level and survive only if every
/// member item's own support reaches the candidate's `mI`; counted
/// candidates are frequent when their support reaches `mI`. No
/// `(k-1)`-subset pruning is applied.
pub fn mine_max_constraints(
    ts: &TransactionSet,
    table: &MinsupTable,
    counter: &Counter,
) -> Result<(FrequentLevels, MiningStats)> {
    let started = Instant::now();
    let thresholds = table.resolve_all(ts.n_items())?;
    let mut stats = MiningStats::default();

    let singletons = counter.count_singletons(ts);
    let item_support: Vec<u64> = singletons.iter().map(|r| r.support).collect();
    stats.candidates_per_level.push(ts.n_items());
    stats.db_scans += 1;
    let l1: Vec<ItemsetRecord> = singletons
        .into_iter()
        .filter(|r| r.support >= thresholds[r.itemset.items()[0].index()])
        .collect();

    let m_i = |c: &Itemset| {
        c.items()
            .iter()
            .map(|i| thresholds[i.index()])
            .max()
            .expect("non-empty")
    };

    let mut levels = vec![l1];
    loop {
        let prev: Vec<Itemset> = levels
            .last()
            .expect("at least L1")
            .iter()
            .map(|r| r.itemset.clone())
            .collect();
        if prev.is_empty() {
            break;
        }
        let candidates: Vec<Itemset> = join_step(&prev)
            .into_iter()
            .filter(|c| {
                let bound = m_i(c);
                c.items().iter().all(|i| item_support[i.index()] >= bound)
            })
            .collect();
        if candidates.is_empty() {
            break;
        }
        stats.candidates_per_level.push(candidates.len());
        stats.db_scans += 1;
        let next: Vec<ItemsetRecord> = counter
            .count_supports(ts, &candidates)?
            .into_iter()
            .filter(|r| r.support >= m_i(&r.itemset))
            .collect();
        levels.push(next);
    }

    stats.itemset_time = started.elapsed();
    Ok((FrequentLevels::new(levels, ts.n()), stats))
}
