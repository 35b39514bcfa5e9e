//! Association rules: all-rules and simple-rules generation, exact
//! confidence and lift, and the confidence-product identity.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;
use serde_json::{Number, Value};

use crate::counting::{Itemset, ItemsetRecord, SupportIndex};
use crate::dataset::ItemDictionary;
use crate::error::{Error, Result};
use crate::miners::FrequentLevels;
use crate::ratio::{format_decimal, Rational};

/// The four mining pipelines, in canonical report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Apriori,
    Sar,
    MaxConstraints,
    Sarmsmc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Apriori,
        Algorithm::Sar,
        Algorithm::MaxConstraints,
        Algorithm::Sarmsmc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Apriori => "apriori",
            Algorithm::Sar => "sar",
            Algorithm::MaxConstraints => "max_constraints",
            Algorithm::Sarmsmc => "sarmsmc",
        }
    }

    /// Whether itemsets are mined with per-item thresholds.
    pub fn multi_support(self) -> bool {
        matches!(self, Algorithm::MaxConstraints | Algorithm::Sarmsmc)
    }

    /// Whether only single-consequent rules are generated.
    pub fn simple_rules(self) -> bool {
        matches!(self, Algorithm::Sar | Algorithm::Sarmsmc)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "apriori" => Ok(Algorithm::Apriori),
            "sar" => Ok(Algorithm::Sar),
            "max_constraints" | "maxconstraints" => Ok(Algorithm::MaxConstraints),
            "sarmsmc" => Ok(Algorithm::Sarmsmc),
            _ => Err(Error::InvalidParameter(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub antecedent: Itemset,
    pub consequent: Itemset,
    /// Support of `antecedent ∪ consequent`.
    pub support: u64,
    pub confidence: Rational,
    pub lift: Rational,
}

impl Rule {
    pub fn key(&self) -> (Itemset, Itemset) {
        (self.antecedent.clone(), self.consequent.clone())
    }

    pub fn is_simple(&self) -> bool {
        self.consequent.len() == 1
    }

    pub fn itemset(&self) -> Itemset {
        self.antecedent.union(&self.consequent)
    }

    pub fn display(&self, dictionary: &ItemDictionary) -> String {
        format!(
            "{} => {}",
            dictionary.join_labels(self.antecedent.items()),
            dictionary.join_labels(self.consequent.items())
        )
    }
}

/// `sup(full) / sup(antecedent)` as an exact rational.
pub fn confidence(full: &ItemsetRecord, antecedent: &ItemsetRecord) -> Result<Rational> {
    if !antecedent.itemset.is_subset_of(full.itemset.items()) {
        return Err(Error::InvalidParameter(format!(
            "{} is not a subset of {}",
            antecedent.itemset, full.itemset
        )));
    }
    if antecedent.support == 0 {
        return Err(Error::UndefinedConfidence);
    }
    Ok(Ratio::new(full.support, antecedent.support))
}

/// `confidence / P(consequent)`, equal to `P(X ∪ Y) / (P(X) P(Y))`.
pub fn lift(rule: &Rule, corpus_size: usize, consequent_support: u64) -> Result<Rational> {
    if consequent_support == 0 || corpus_size == 0 {
        return Err(Error::UndefinedLift);
    }
    Ok(rule.confidence * Ratio::new(corpus_size as u64, consequent_support))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    rules: Vec<Rule>,
    minconf: Rational,
    source: Algorithm,
    corpus_size: usize,
}

impl RuleSet {
    /// Sorts into canonical order and drops duplicate keys.
    pub fn new(mut rules: Vec<Rule>, minconf: Rational, source: Algorithm, corpus_size: usize) -> Self {
        rules.sort_by(|a, b| {
            (&a.antecedent, &a.consequent).cmp(&(&b.antecedent, &b.consequent))
        });
        rules.dedup_by(|a, b| a.antecedent == b.antecedent && a.consequent == b.consequent);
        RuleSet {
            rules,
            minconf,
            source,
            corpus_size,
        }
    }

    pub fn with_source(mut self, source: Algorithm) -> Self {
        self.source = source;
        self
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rule> {
        self.rules.iter()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn minconf(&self) -> Rational {
        self.minconf
    }

    pub fn source(&self) -> Algorithm {
        self.source
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    pub fn keys(&self) -> BTreeSet<(Itemset, Itemset)> {
        self.rules.iter().map(Rule::key).collect()
    }

    pub fn get(&self, antecedent: &Itemset, consequent: &Itemset) -> Option<&Rule> {
        self.rules
            .binary_search_by(|r| (&r.antecedent, &r.consequent).cmp(&(antecedent, consequent)))
            .ok()
            .map(|i| &self.rules[i])
    }

    pub fn contains(&self, rule: &Rule) -> bool {
        self.get(&rule.antecedent, &rule.consequent).is_some()
    }

    pub fn is_subset_of(&self, other: &RuleSet) -> bool {
        self.rules.iter().all(|r| other.contains(r))
    }

    /// Rules of `self` whose key is absent from `other`.
    pub fn difference(&self, other: &RuleSet) -> RuleSet {
        RuleSet {
            rules: self.rules.iter().filter(|r| !other.contains(r)).cloned().collect(),
            minconf: self.minconf,
            source: self.source,
            corpus_size: self.corpus_size,
        }
    }

    /// Pipe-separated rule table with a header line.
    pub fn to_csv(&self, dictionary: &ItemDictionary) -> String {
        let mut out = String::from("antecedent|consequent|support_count|support_pct|confidence|lift\n");
        for r in &self.rules {
            out.push_str(&format!(
                "{}|{}|{}|{}|{}|{}\n",
                dictionary.join_labels(r.antecedent.items()),
                dictionary.join_labels(r.consequent.items()),
                r.support,
                format_decimal(self.support_pct(r)),
                format_decimal(r.confidence),
                format_decimal(r.lift),
            ));
        }
        out
    }

    pub fn to_json_value(&self, dictionary: &ItemDictionary) -> Value {
        let decimal = |r: Rational| {
            Value::Number(Number::from_str(&format_decimal(r)).expect("decimal literal"))
        };
        let labels = |s: &Itemset| -> Value {
            s.items()
                .iter()
                .map(|&i| Value::String(dictionary.label(i).to_owned()))
                .collect()
        };
        self.rules
            .iter()
            .map(|r| {
                serde_json::json!({
                    "antecedent": labels(&r.antecedent),
                    "consequent": labels(&r.consequent),
                    "support_count": r.support,
                    "support_pct": decimal(self.support_pct(r)),
                    "confidence": decimal(r.confidence),
                    "lift": decimal(r.lift),
                })
            })
            .collect()
    }

    pub fn to_json(&self, dictionary: &ItemDictionary) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_json_value(dictionary))
            .expect("rule json");
        text.push('\n');
        text
    }

    fn support_pct(&self, rule: &Rule) -> Rational {
        if self.corpus_size == 0 {
            return Rational::from_integer(0);
        }
        Ratio::new(rule.support * 100, self.corpus_size as u64)
    }
}

/// Builds the rule `antecedent => full \ antecedent` if its confidence and
/// lift are defined and the confidence reaches `minconf`.
fn make_rule(
    full: &ItemsetRecord,
    antecedent: Itemset,
    minconf: Rational,
    index: &SupportIndex,
    corpus_size: usize,
) -> Result<Option<Rule>> {
    let consequent = full
        .itemset
        .difference(&antecedent)
        .expect("antecedent is a proper subset");
    let ante_support = index.require(&antecedent)?;
    let cons_support = index.require(&consequent)?;
    // zero-support antecedents or consequents have no defined confidence/lift
    if ante_support == 0 || cons_support == 0 {
        return Ok(None);
    }
    let conf = confidence(full, &ItemsetRecord::new(antecedent.clone(), ante_support))?;
    if conf < minconf {
        return Ok(None);
    }
    let mut rule = Rule {
        antecedent,
        consequent,
        support: full.support,
        confidence: conf,
        lift: Rational::from_integer(0),
    };
    rule.lift = lift(&rule, corpus_size, cons_support)?;
    Ok(Some(rule))
}

fn push_capped(out: &mut Vec<Rule>, rule: Rule, max_rules: Option<usize>) -> Result<()> {
    if let Some(cap) = max_rules {
        if out.len() >= cap {
            return Err(Error::RuleCapExceeded(cap));
        }
    }
    out.push(rule);
    Ok(())
}

/// Every rule `A => F \ A` over frequent `F` (|F| >= 2) and non-empty proper
/// subsets `A`, kept when its confidence reaches `minconf`.
pub fn generate_all_rules(
    levels: &FrequentLevels,
    minconf: Rational,
    index: &SupportIndex,
    max_rules: Option<usize>,
) -> Result<RuleSet> {
    let n = levels.corpus_size();
    let mut out = Vec::new();
    for full in levels.levels().iter().skip(1).flatten() {
        let k = full.itemset.len();
        if k >= 64 {
            return Err(Error::InvalidParameter(format!(
                "itemset of length {k} is too long for rule enumeration"
            )));
        }
        for mask in 1..(1u64 << k) - 1 {
            let antecedent = full.itemset.masked(mask);
            if let Some(rule) = make_rule(full, antecedent, minconf, index, n)? {
                push_capped(&mut out, rule, max_rules)?;
            }
        }
    }
    Ok(RuleSet::new(out, minconf, Algorithm::Apriori, n))
}

/// Simple rules: for frequent `F` (|F| >= 2) only `(k-1)`-subset
/// antecedents, so every consequent is a single item.
pub fn generate_simple_rules(
    levels: &FrequentLevels,
    minconf: Rational,
    index: &SupportIndex,
    max_rules: Option<usize>,
) -> Result<RuleSet> {
    let n = levels.corpus_size();
    let mut out = Vec::new();
    for full in levels.levels().iter().skip(1).flatten() {
        for antecedent in full.itemset.drop_one_subsets() {
            if let Some(rule) = make_rule(full, antecedent, minconf, index, n)? {
                push_capped(&mut out, rule, max_rules)?;
            }
        }
    }
    Ok(RuleSet::new(out, minconf, Algorithm::Sar, n))
}

/// Product of confidences along a chain of simple rules where each rule's
/// antecedent is the previous rule's antecedent plus its consequent. The
/// product equals the confidence of `base => union of consequents`.
pub fn derive_compound_confidence(chain: &[Rule]) -> Result<Rational> {
    let first = chain
        .first()
        .ok_or_else(|| Error::InvalidChain("empty chain".into()))?;
    let mut product = first.confidence;
    let mut reached = first.itemset();
    for (step, rule) in chain.iter().enumerate() {
        if !rule.is_simple() {
            return Err(Error::InvalidChain(format!(
                "rule {step} has a consequent of {} items",
                rule.consequent.len()
            )));
        }
        if step == 0 {
            continue;
        }
        if rule.antecedent != reached {
            return Err(Error::InvalidChain(format!(
                "rule {step} antecedent {} does not extend {}",
                rule.antecedent, reached
            )));
        }
        product *= rule.confidence;
        reached = rule.itemset();
    }
    Ok(product)
}
