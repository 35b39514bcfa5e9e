#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rulemine::{Item, Itemset, ItemsetRecord, TransactionSet};

/// Random corpus over at most `max_items` items; every label is used.
pub fn random_corpus(rng: &mut ChaCha8Rng, max_items: usize, max_tx: usize) -> TransactionSet {
    let n_items = rng.random_range(1..=max_items);
    let n_tx = rng.random_range(1..=max_tx);
    let density: f64 = rng.random_range(0.1..0.6);
    let mut rows: Vec<Vec<String>> = Vec::with_capacity(n_tx + n_items);
    for _ in 0..n_tx {
        let mut row: Vec<String> = (0..n_items)
            .filter(|_| rng.random_bool(density))
            .map(|i| format!("i{i}"))
            .collect();
        if row.is_empty() {
            row.push(format!("i{}", rng.random_range(0..n_items)));
        }
        rows.push(row);
    }
    TransactionSet::from_labels(&rows).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn as_map<'a>(records: impl IntoIterator<Item = &'a ItemsetRecord>) -> HashMap<Vec<u32>, u64> {
    records
        .into_iter()
        .map(|r| (r.itemset.ids(), r.support))
        .collect()
}

/// Support of every subset, by direct containment scans.
pub fn naive_support(ts: &TransactionSet, itemset: &Itemset) -> u64 {
    ts.transactions()
        .iter()
        .filter(|t| itemset.items().iter().all(|i| t.items().contains(i)))
        .count() as u64
}

pub fn itemset(ids: &[u32]) -> Itemset {
    Itemset::new(ids.iter().copied().map(Item).collect()).unwrap()
}

pub fn report(name: &str, ok: bool, detail: &str) {
    println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}
