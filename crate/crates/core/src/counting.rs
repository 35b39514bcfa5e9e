//! Itemsets, exact support counting and the exhaustive oracle miner.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::thread;

use crate::dataset::{Item, TransactionSet};
use crate::error::{Error, Result};

/// Largest dictionary [`brute_force_frequent`] will enumerate.
pub const ORACLE_MAX_ITEMS: usize = 20;

/// A non-empty, strictly increasing set of items.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Itemset(Vec<Item>);

impl Itemset {
    pub fn new(mut items: Vec<Item>) -> Result<Self> {
        items.sort_unstable();
        items.dedup();
        if items.is_empty() {
            return Err(Error::InvalidParameter("empty itemset".into()));
        }
        Ok(Itemset(items))
    }

    /// `items` must already be sorted, duplicate-free and non-empty.
    pub(crate) fn from_sorted(items: Vec<Item>) -> Self {
        debug_assert!(!items.is_empty());
        debug_assert!(items.windows(2).all(|w| w[0] < w[1]));
        Itemset(items)
    }

    pub fn singleton(item: Item) -> Self {
        Itemset(vec![item])
    }

    pub fn from_ids(ids: &[u32]) -> Result<Self> {
        Self::new(ids.iter().copied().map(Item).collect())
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn ids(&self) -> Vec<u32> {
        self.0.iter().map(|i| i.0).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: Item) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn is_subset_of(&self, other: &[Item]) -> bool {
        is_sorted_subset(&self.0, other)
    }

    pub fn is_disjoint(&self, other: &Itemset) -> bool {
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        while let (Some(x), Some(y)) = (a.peek(), b.peek()) {
            match x.cmp(y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &Itemset) -> Itemset {
        let mut items = self.0.clone();
        items.extend_from_slice(&other.0);
        items.sort_unstable();
        items.dedup();
        Itemset(items)
    }

    /// `self \ other`, or `None` when nothing remains.
    pub fn difference(&self, other: &Itemset) -> Option<Itemset> {
        let items: Vec<Item> = self
            .0
            .iter()
            .copied()
            .filter(|i| !other.contains(*i))
            .collect();
        (!items.is_empty()).then_some(Itemset(items))
    }

    /// All subsets of size `len - 1`, in canonical order.
    pub fn drop_one_subsets(&self) -> Vec<Itemset> {
        if self.0.len() < 2 {
            return Vec::new();
        }
        // dropping later positions first yields lexicographic order
        (0..self.0.len())
            .rev()
            .map(|skip| {
                let mut items = self.0.clone();
                items.remove(skip);
                Itemset(items)
            })
            .collect()
    }

    /// Every non-empty subset selected by a bit mask over positions.
    pub(crate) fn masked(&self, mask: u64) -> Itemset {
        Itemset(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &item)| item)
                .collect(),
        )
    }
}

impl Borrow<[Item]> for Itemset {
    fn borrow(&self) -> &[Item] {
        &self.0
    }
}

impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{item}")?;
        }
        write!(f, "}}")
    }
}

/// Sorted-merge containment test.
pub fn is_sorted_subset(small: &[Item], big: &[Item]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut rest = big.iter();
    'outer: for needle in small {
        for hay in rest.by_ref() {
            if hay == needle {
                continue 'outer;
            }
            if hay > needle {
                return false;
            }
        }
        return false;
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ItemsetRecord {
    pub itemset: Itemset,
    pub support: u64,
}

impl ItemsetRecord {
    pub fn new(itemset: Itemset, support: u64) -> Self {
        Self { itemset, support }
    }
}

/// Canonical ordering for mixed-length collections: by length, then
/// lexicographically by item id.
pub fn canonical_cmp(a: &Itemset, b: &Itemset) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// How a counting pass matches candidates against a transaction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CountStrategy {
    /// Every candidate is merge-tested against every transaction.
    #[default]
    Scan,
    /// Candidates are bucketed by leading item; only buckets whose item
    /// occurs in the transaction are merge-tested against its tail.
    Indexed,
}

/// Counts supports, optionally fanning transactions out over worker threads.
/// Results are identical for every thread count and strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counter {
    threads: usize,
    strategy: CountStrategy,
}

impl Counter {
    pub fn new(threads: usize) -> Self {
        Counter {
            threads: threads.max(1),
            strategy: CountStrategy::Scan,
        }
    }

    pub fn with_strategy(mut self, strategy: CountStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn threads(&self) -> usize {
        self.threads.max(1)
    }

    pub fn strategy(&self) -> CountStrategy {
        self.strategy
    }

    /// One pass over `ts`. Records come back in candidate order.
    pub fn count_supports(
        &self,
        ts: &TransactionSet,
        candidates: &[Itemset],
    ) -> Result<Vec<ItemsetRecord>> {
        let Some(first) = candidates.first() else {
            return Ok(Vec::new());
        };
        let k = first.len();
        let n_items = ts.n_items();
        for c in candidates {
            if c.len() != k {
                return Err(Error::InvalidParameter(format!(
                    "candidate {c} has length {} in a level of length {k}",
                    c.len()
                )));
            }
            if let Some(&bad) = c.items().iter().find(|i| i.index() >= n_items) {
                return Err(Error::UnknownItem(bad.0));
            }
        }

        let mut by_first: Vec<Vec<u32>> = Vec::new();
        if self.strategy == CountStrategy::Indexed {
            by_first = vec![Vec::new(); n_items];
            for (idx, c) in candidates.iter().enumerate() {
                by_first[c.items()[0].index()].push(idx as u32);
            }
        }

        let count_chunk = |chunk: &[crate::dataset::Transaction]| {
            let mut counts = vec![0u64; candidates.len()];
            for t in chunk {
                let items = t.items();
                if items.len() < k {
                    continue;
                }
                match self.strategy {
                    CountStrategy::Scan => {
                        for (count, c) in counts.iter_mut().zip(candidates) {
                            if is_sorted_subset(c.items(), items) {
                                *count += 1;
                            }
                        }
                    }
                    CountStrategy::Indexed => {
                        for (pos, head) in items[..=items.len() - k].iter().enumerate() {
                            let tail = &items[pos + 1..];
                            for &idx in &by_first[head.index()] {
                                if is_sorted_subset(&candidates[idx as usize].items()[1..], tail) {
                                    counts[idx as usize] += 1;
                                }
                            }
                        }
                    }
                }
            }
            counts
        };

        let transactions = ts.transactions();
        let threads = self.threads();
        let counts = if threads == 1 || transactions.len() < 2 * threads {
            count_chunk(transactions)
        } else {
            let chunk_len = transactions.len().div_ceil(threads);
            thread::scope(|s| {
                let handles: Vec<_> = transactions
                    .chunks(chunk_len)
                    .map(|chunk| s.spawn(move || count_chunk(chunk)))
                    .collect();
                let mut total = vec![0u64; candidates.len()];
                for h in handles {
                    for (t, c) in total.iter_mut().zip(h.join().expect("counting worker panicked")) {
                        *t += c;
                    }
                }
                total
            })
        };

        Ok(candidates
            .iter()
            .cloned()
            .zip(counts)
            .map(|(itemset, support)| ItemsetRecord { itemset, support })
            .collect())
    }

    /// Support of every dictionary item, ordered by id.
    pub fn count_singletons(&self, ts: &TransactionSet) -> Vec<ItemsetRecord> {
        let mut counts = vec![0u64; ts.n_items()];
        for t in ts.transactions() {
            for item in t.items() {
                counts[item.index()] += 1;
            }
        }
        counts
            .into_iter()
            .enumerate()
            .map(|(id, support)| ItemsetRecord::new(Itemset::singleton(Item(id as u32)), support))
            .collect()
    }
}

pub fn count_supports(ts: &TransactionSet, candidates: &[Itemset]) -> Result<Vec<ItemsetRecord>> {
    Counter::default().count_supports(ts, candidates)
}

pub fn count_singletons(ts: &TransactionSet) -> Vec<ItemsetRecord> {
    Counter::default().count_singletons(ts)
}

/// Support counts keyed by itemset, one map per itemset length.
#[derive(Clone, Debug, Default)]
pub struct SupportIndex {
    levels: Vec<HashMap<Itemset, u64>>,
}

impl SupportIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a ItemsetRecord>) -> Self {
        let mut index = Self::new();
        index.extend(records);
        index
    }

    pub fn insert(&mut self, itemset: Itemset, support: u64) {
        let k = itemset.len();
        if self.levels.len() < k {
            self.levels.resize_with(k, HashMap::new);
        }
        self.levels[k - 1].insert(itemset, support);
    }

    pub fn extend<'a>(&mut self, records: impl IntoIterator<Item = &'a ItemsetRecord>) {
        for r in records {
            self.insert(r.itemset.clone(), r.support);
        }
    }

    pub fn get(&self, items: &[Item]) -> Option<u64> {
        let level = self.levels.get(items.len().checked_sub(1)?)?;
        level.get(items).copied()
    }

    pub fn require(&self, itemset: &Itemset) -> Result<u64> {
        self.get(itemset.items())
            .ok_or_else(|| Error::MissingSupport(itemset.ids()))
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Counts whichever of `wanted` are not yet stored, with one corpus scan
    /// per itemset length that has something missing. Returns the number of
    /// scans performed.
    pub fn ensure<'a>(
        &mut self,
        ts: &TransactionSet,
        wanted: impl IntoIterator<Item = &'a Itemset>,
        counter: &Counter,
    ) -> Result<usize> {
        let mut missing: Vec<Vec<Itemset>> = Vec::new();
        for itemset in wanted {
            if self.get(itemset.items()).is_some() {
                continue;
            }
            let k = itemset.len();
            if missing.len() < k {
                missing.resize_with(k, Vec::new);
            }
            missing[k - 1].push(itemset.clone());
        }
        let mut scans = 0;
        for mut level in missing {
            if level.is_empty() {
                continue;
            }
            level.sort_unstable();
            level.dedup();
            for record in counter.count_supports(ts, &level)? {
                self.insert(record.itemset, record.support);
            }
            scans += 1;
        }
        Ok(scans)
    }
}

/// Exhaustive miner: every non-empty subset of the dictionary whose support
/// reaches `threshold(itemset)`, in canonical order.
///
/// Supports come from a superset-sum transform over transaction bit masks,
/// a route independent of [`Counter`].
pub fn brute_force_frequent(
    ts: &TransactionSet,
    threshold: impl Fn(&Itemset) -> u64,
) -> Result<Vec<ItemsetRecord>> {
    let n = ts.n_items();
    if n > ORACLE_MAX_ITEMS {
        return Err(Error::OracleTooLarge(n));
    }
    let size = 1usize << n;
    let mut support = vec![0u64; size];
    for t in ts.transactions() {
        let mask = t.items().iter().fold(0usize, |m, i| m | 1 << i.index());
        support[mask] += 1;
    }
    for bit in 0..n {
        for mask in 0..size {
            if mask & (1 << bit) == 0 {
                support[mask] += support[mask | 1 << bit];
            }
        }
    }
    let mut out: Vec<ItemsetRecord> = (1..size)
        .filter_map(|mask| {
            let items = (0..n)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| Item(b as u32))
                .collect();
            let itemset = Itemset::from_sorted(items);
            (support[mask] >= threshold(&itemset))
                .then(|| ItemsetRecord::new(itemset, support[mask]))
        })
        .collect();
    out.sort_by(|a, b| canonical_cmp(&a.itemset, &b.itemset));
    Ok(out)
}
