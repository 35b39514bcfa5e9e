//! Transaction corpora: item interning, text formats, splitting and
//! synthetic generation.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Read;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;

use crate::error::{Error, Result};
use crate::ratio::Rational;

/// Dense item identifier assigned by an [`ItemDictionary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Item(pub u32);

impl Item {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bijection between external labels and dense ids `0..len()`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ItemDictionary {
    labels: Vec<String>,
    index: HashMap<String, Item>,
}

impl ItemDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut dict = Self::new();
        for label in labels {
            dict.intern(label.as_ref());
        }
        dict
    }

    pub fn intern(&mut self, label: &str) -> Item {
        if let Some(&item) = self.index.get(label) {
            return item;
        }
        let item = Item(self.labels.len() as u32);
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), item);
        item
    }

    pub fn get(&self, label: &str) -> Option<Item> {
        self.index.get(label).copied()
    }

    pub fn label(&self, item: Item) -> &str {
        &self.labels[item.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = Item> {
        (0..self.labels.len() as u32).map(Item)
    }

    /// Space-joined labels, the form used in rule output.
    pub fn join_labels(&self, items: &[Item]) -> String {
        items
            .iter()
            .map(|&i| self.label(i))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transaction {
    pub tid: String,
    items: Vec<Item>,
}

impl Transaction {
    /// Sorts and deduplicates `items`; an empty list is rejected.
    pub fn new(tid: impl Into<String>, mut items: Vec<Item>) -> Result<Self> {
        items.sort_unstable();
        items.dedup();
        if items.is_empty() {
            return Err(Error::InvalidParameter("empty transaction".into()));
        }
        Ok(Self {
            tid: tid.into(),
            items,
        })
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// One transaction per line, items separated by commas or whitespace.
    Basket,
    /// `TID<TAB>item item ...`
    TidItems,
}

/// The mined database. Immutable once built; partitions share the parent
/// dictionary.
#[derive(Clone, Debug)]
pub struct TransactionSet {
    dictionary: Arc<ItemDictionary>,
    transactions: Vec<Transaction>,
}

impl TransactionSet {
    pub fn new(dictionary: Arc<ItemDictionary>, transactions: Vec<Transaction>) -> Result<Self> {
        let n_items = dictionary.len();
        for t in &transactions {
            if let Some(&item) = t.items.iter().find(|i| i.index() >= n_items) {
                return Err(Error::UnknownItem(item.0));
            }
        }
        Ok(Self {
            dictionary,
            transactions,
        })
    }

    /// Builds a corpus from label lists, interning labels in first-seen order.
    pub fn from_labels<T, S>(rows: &[T]) -> Result<Self>
    where
        T: AsRef<[S]>,
        S: AsRef<str>,
    {
        let mut dict = ItemDictionary::new();
        let mut transactions = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let items = row
                .as_ref()
                .iter()
                .map(|l| dict.intern(l.as_ref()))
                .collect();
            transactions.push(Transaction::new((i + 1).to_string(), items)?);
        }
        Self::new(Arc::new(dict), transactions)
    }

    pub fn dictionary(&self) -> &ItemDictionary {
        &self.dictionary
    }

    pub fn shared_dictionary(&self) -> Arc<ItemDictionary> {
        Arc::clone(&self.dictionary)
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn n(&self) -> usize {
        self.transactions.len()
    }

    pub fn n_items(&self) -> usize {
        self.dictionary.len()
    }

    /// A sub-corpus holding the transactions at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> TransactionSet {
        TransactionSet {
            dictionary: self.shared_dictionary(),
            transactions: indices
                .iter()
                .map(|&i| self.transactions[i].clone())
                .collect(),
        }
    }

    /// Basket-format text: one line per transaction, labels joined by commas.
    pub fn to_basket_string(&self) -> String {
        let mut out = String::new();
        for t in &self.transactions {
            let line: Vec<&str> = t.items.iter().map(|&i| self.dictionary.label(i)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Reads a corpus in the given text format. Blank lines and `#` comment
/// lines are skipped; basket transactions are numbered from 1.
pub fn load_transactions<R: Read>(mut source: R, format: Format) -> Result<TransactionSet> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::InvalidParameter(format!("input is not UTF-8: {e}")))?;
    parse_transactions(&text, format)
}

pub fn parse_transactions(text: &str, format: Format) -> Result<TransactionSet> {
    let mut dict = ItemDictionary::new();
    let mut transactions = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (tid, body) = match format {
            Format::Basket => ((transactions.len() + 1).to_string(), line),
            Format::TidItems => {
                let (tid, body) = raw
                    .split_once('\t')
                    .ok_or_else(|| Error::parse(lineno, "expected TID<TAB>items"))?;
                let tid = tid.trim();
                if tid.is_empty() || tid.chars().any(char::is_whitespace) {
                    return Err(Error::parse(lineno, format!("bad TID field {tid:?}")));
                }
                (tid.to_owned(), body)
            }
        };
        let items: Vec<Item> = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|label| dict.intern(label))
            .collect();
        if items.is_empty() {
            return Err(Error::parse(lineno, "empty item list"));
        }
        transactions.push(Transaction::new(tid, items)?);
    }
    if transactions.is_empty() {
        return Err(Error::NoTransactions);
    }
    TransactionSet::new(Arc::new(dict), transactions)
}

/// Seeded random train/test partition. The test side gets
/// `round(test_fraction * n)` transactions (halves round up), clamped so
/// both sides are non-empty. Both sides keep the original relative order.
pub fn split_train_test(
    ts: &TransactionSet,
    test_fraction: Rational,
    seed: u64,
) -> Result<(TransactionSet, TransactionSet)> {
    let n = ts.n();
    if n < 2 {
        return Err(Error::CannotSplit(n));
    }
    if *test_fraction.numer() == 0 || test_fraction >= Rational::from_integer(1) {
        return Err(Error::InvalidParameter(
            "test fraction must lie strictly between 0 and 1".into(),
        ));
    }
    let num = *test_fraction.numer() as u128 * n as u128;
    let den = *test_fraction.denom() as u128;
    let rounded = ((2 * num + den) / (2 * den)) as usize;
    let n_test = rounded.clamp(1, n - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; n];
    for i in rand::seq::index::sample(&mut rng, n, n_test) {
        in_test[i] = true;
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| in_test[i]);
    Ok((ts.select(&train), ts.select(&test)))
}

/// Seeded synthetic corpus with Zipf-skewed item popularity.
///
/// Lengths are `1 + Poisson(avg_len - 1)` clamped to `[1, n_items]`. Each
/// item has a fixed companion item; after an item is drawn its companion
/// joins the basket with probability one half, which plants association
/// rules among the popular items. Labels are `i<rank>` and the dictionary
/// holds only items that occur.
pub fn generate_synthetic(
    n_transactions: usize,
    n_items: usize,
    avg_len: usize,
    seed: u64,
) -> Result<TransactionSet> {
    if n_transactions == 0 || n_items == 0 || avg_len == 0 {
        return Err(Error::InvalidParameter(
            "transactions, items and average length must be positive".into(),
        ));
    }
    if avg_len > n_items {
        return Err(Error::InvalidParameter(format!(
            "average length {avg_len} exceeds item count {n_items}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..n_items).map(|r| 1.0 / (r as f64 + 1.0)).collect();
    let popularity = WeightedIndex::new(&weights).expect("positive weights");
    let companion: Vec<usize> = (0..n_items).map(|_| rng.random_range(0..n_items)).collect();
    let length = if avg_len > 1 {
        Some(Poisson::new((avg_len - 1) as f64).expect("positive mean"))
    } else {
        None
    };

    let mut rows: Vec<Vec<String>> = Vec::with_capacity(n_transactions);
    let mut basket: HashSet<usize> = HashSet::new();
    let mut order: Vec<usize> = Vec::new();
    for _ in 0..n_transactions {
        let extra = length.map_or(0.0, |p| p.sample(&mut rng)) as usize;
        let len = (1 + extra).min(n_items);
        basket.clear();
        order.clear();
        let mut draws = 0;
        while order.len() < len && draws < 8 * n_items {
            draws += 1;
            let item = popularity.sample(&mut rng);
            if basket.insert(item) {
                order.push(item);
            }
            let mate = companion[item];
            if order.len() < len && rng.random_bool(0.5) && basket.insert(mate) {
                order.push(mate);
            }
        }
        // Rejection sampling can stall when len approaches n_items.
        let mut fill = 0;
        while order.len() < len {
            if basket.insert(fill) {
                order.push(fill);
            }
            fill += 1;
        }
        rows.push(order.iter().map(|r| format!("i{r}")).collect());
    }
    TransactionSet::from_labels(&rows)
}
