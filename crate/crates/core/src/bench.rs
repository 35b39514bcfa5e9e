//! Evaluation harness: phase-split timings, accuracy and time indices,
//! train/test accuracy and complexity sweeps over corpus fractions.
//!
//! Per-run accuracy is the share of rules whose confidence, recomputed on
//! the test partition, still reaches `minconf`. Both indices sum over the
//! tested minimum-support points of each algorithm.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::counting::{Itemset, SupportIndex};
use crate::dataset::{split_train_test, TransactionSet};
use crate::equalizer::derive_minsups;
use crate::error::{Error, Result};
use crate::pipeline::{self, MinsupSpec, PipelineOptions, PipelineOutput};
use crate::ratio::{format_decimal, to_f64, Rational, Threshold};
use crate::rules::{Algorithm, RuleSet};

pub const ACCURACY_DEFINITION: &str = "fraction of rules whose confidence recomputed on the test \
     partition is >= minconf; rules whose antecedent is absent from the test partition fail";
pub const INDEX_DOMAIN: &str =
    "index = 100 * sum over tested minsup points / max over algorithms of that sum";

fn seconds(d: &Duration) -> f64 {
    d.as_secs_f64()
}

fn ser_seconds<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(seconds(d))
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_decimal(*r))
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseTimes {
    #[serde(serialize_with = "ser_seconds")]
    pub itemset: Duration,
    #[serde(serialize_with = "ser_seconds")]
    pub rule: Duration,
    /// Median of the per-repeat totals.
    #[serde(serialize_with = "ser_seconds")]
    pub total: Duration,
    /// `total / n_rules`, zero when no rules were produced.
    #[serde(serialize_with = "ser_seconds")]
    pub per_rule: Duration,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub minsup: String,
    #[serde(serialize_with = "ser_rational")]
    pub minconf: Rational,
    pub n_frequent: usize,
    pub frequent_per_level: Vec<usize>,
    pub n_rules: usize,
    pub timing: PhaseTimes,
}

fn median(mut values: Vec<Duration>) -> Duration {
    values.sort_unstable();
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2
    }
}

/// Runs a pipeline `repeats` times after one discarded warm-up run and
/// reports median phase times. Also returns the last run's output.
pub fn run_pipeline(
    algorithm: Algorithm,
    ts: &TransactionSet,
    minsup: &MinsupSpec,
    minconf: Rational,
    repeats: usize,
    options: &PipelineOptions,
) -> Result<(RunResult, PipelineOutput)> {
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be positive".into()));
    }
    let mut last = pipeline::run(algorithm, ts, minsup, minconf, options)?;
    let (mut items, mut rules, mut totals) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..repeats {
        let out = pipeline::run(algorithm, ts, minsup, minconf, options)?;
        assert_eq!(out.rules.len(), last.rules.len(), "rule count changed between repeats");
        items.push(out.itemset_time);
        rules.push(out.rule_time);
        totals.push(out.itemset_time + out.rule_time);
        last = out;
    }
    let total = median(totals);
    let n_rules = last.rules.len();
    let per_rule = if n_rules == 0 {
        Duration::ZERO
    } else {
        total / n_rules as u32
    };
    let label = match minsup {
        MinsupSpec::Single(m) => m.to_string(),
        MinsupSpec::Table(_) => "table".to_owned(),
    };
    let result = RunResult {
        algorithm,
        minsup: label,
        minconf,
        n_frequent: last.levels.len(),
        frequent_per_level: last.levels.counts_per_level(),
        n_rules,
        timing: PhaseTimes {
            itemset: median(items),
            rule: median(rules),
            total,
            per_rule,
        },
    };
    Ok((result, last))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Accuracy {
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    /// Set when the rule set was empty and the value is 1 by convention.
    pub vacuous: bool,
}

/// Share of `rules` whose confidence on `test` still reaches `minconf`.
pub fn accuracy(
    test: &TransactionSet,
    rules: &RuleSet,
    minconf: Rational,
    options: &PipelineOptions,
) -> Result<Accuracy> {
    if test.n() == 0 {
        return Err(Error::InvalidParameter("empty test partition".into()));
    }
    if rules.is_empty() {
        return Ok(Accuracy {
            value: Ratio::from_integer(1),
            vacuous: true,
        });
    }
    let wanted: Vec<Itemset> = rules
        .iter()
        .flat_map(|r| [r.antecedent.clone(), r.itemset()])
        .collect();
    let mut index = SupportIndex::new();
    index.ensure(test, &wanted, &options.counter)?;
    let mut held = 0u64;
    for r in rules.iter() {
        let ante = index.require(&r.antecedent)?;
        let full = index.require(&r.itemset())?;
        if ante > 0 && Ratio::new(full, ante) >= minconf {
            held += 1;
        }
    }
    Ok(Accuracy {
        value: Ratio::new(held, rules.len() as u64),
        vacuous: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexTable {
    /// Percentages; the largest is exactly 100.
    pub values: BTreeMap<Algorithm, f64>,
    /// First algorithm in canonical order holding 100%.
    pub leader: Algorithm,
}

fn normalize(sums: BTreeMap<Algorithm, f64>) -> Result<IndexTable> {
    let max = sums.values().copied().fold(0.0f64, f64::max);
    if sums.is_empty() || max <= 0.0 {
        return Err(Error::Degenerate);
    }
    let values: BTreeMap<Algorithm, f64> = sums
        .iter()
        .map(|(&alg, &s)| (alg, if s == max { 100.0 } else { 100.0 * s / max }))
        .collect();
    let leader = *sums
        .iter()
        .find(|(_, &s)| s == max)
        .map(|(alg, _)| alg)
        .expect("non-empty");
    Ok(IndexTable { values, leader })
}

fn check_lengths<T>(series: &BTreeMap<Algorithm, Vec<T>>) -> Result<()> {
    let mut lens = series.values().map(Vec::len);
    let first = lens.next().unwrap_or(0);
    if first == 0 || lens.any(|l| l != first) {
        return Err(Error::InvalidParameter(
            "every algorithm needs the same non-zero number of points".into(),
        ));
    }
    Ok(())
}

/// `100 * sum(accuracy) / max over algorithms of sum(accuracy)`.
pub fn accuracy_index(per_algorithm: &BTreeMap<Algorithm, Vec<Rational>>) -> Result<IndexTable> {
    check_lengths(per_algorithm)?;
    normalize(
        per_algorithm
            .iter()
            .map(|(&alg, v)| (alg, v.iter().copied().map(to_f64).sum()))
            .collect(),
    )
}

/// `100 * sum(time) / max over algorithms of sum(time)`; the slowest gets 100.
pub fn time_index(per_algorithm: &BTreeMap<Algorithm, Vec<Duration>>) -> Result<IndexTable> {
    check_lengths(per_algorithm)?;
    normalize(
        per_algorithm
            .iter()
            .map(|(&alg, v)| (alg, v.iter().map(Duration::as_nanos).sum::<u128>() as f64))
            .collect(),
    )
}

/// Thresholds for one pipeline on one corpus: the single count for
/// single-support pipelines, the equalized table otherwise.
fn equalized_spec(
    algorithm: Algorithm,
    ts: &TransactionSet,
    minsup: u64,
    minconf: Rational,
    table_scale: Rational,
    options: &PipelineOptions,
) -> Result<MinsupSpec> {
    if !algorithm.multi_support() {
        return Ok(MinsupSpec::Single(minsup));
    }
    let sar = pipeline::run(Algorithm::Sar, ts, &MinsupSpec::Single(minsup), minconf, options)?;
    let mut index = sar.index;
    let report = derive_minsups(&sar.rules, ts, &mut index, &options.counter)?;
    Ok(MinsupSpec::Table(report.scaled_table(table_scale)))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    #[serde(serialize_with = "ser_rational")]
    pub fraction: Rational,
    pub n_transactions: usize,
    pub run: RunResult,
}

/// Seeded random sample of `round(fraction * n)` transactions, in corpus
/// order. Samples for smaller fractions are prefixes of the same shuffle.
pub fn sample_fraction(ts: &TransactionSet, fraction: Rational, seed: u64) -> Result<TransactionSet> {
    if *fraction.numer() == 0 || fraction > Ratio::from_integer(1) {
        return Err(Error::InvalidParameter(format!(
            "fraction {} outside (0, 1]",
            format_decimal(fraction)
        )));
    }
    let n = ts.n();
    let num = *fraction.numer() as u128 * n as u128;
    let den = *fraction.denom() as u128;
    let m = ((2 * num + den) / (2 * den)) as usize;
    if m == 0 {
        return Err(Error::InvalidParameter(format!(
            "fraction {} of {n} transactions is empty",
            format_decimal(fraction)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let mut chosen = order[..m].to_vec();
    chosen.sort_unstable();
    Ok(ts.select(&chosen))
}

/// Times each algorithm on seeded samples of the corpus at constant
/// thresholds. Multi-support pipelines use the table equalized on each
/// sample (equalization time is not counted).
#[allow(clippy::too_many_arguments)]
pub fn complexity_sweep(
    ts: &TransactionSet,
    fractions: &[Rational],
    algorithms: &[Algorithm],
    minsup: Threshold,
    minconf: Rational,
    seed: u64,
    repeats: usize,
    options: &PipelineOptions,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &fraction in fractions {
        let sample = sample_fraction(ts, fraction, seed)?;
        let count = minsup.resolve(sample.n());
        for &alg in algorithms {
            let spec = equalized_spec(alg, &sample, count, minconf, Ratio::from_integer(1), options)?;
            let (run, _) = run_pipeline(alg, &sample, &spec, minconf, repeats, options)?;
            rows.push(SweepRow {
                fraction,
                n_transactions: sample.n(),
                run,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub minsups: Vec<Threshold>,
    pub minconf: Rational,
    pub repeats: usize,
    /// Test fraction and seed for a train/test run.
    pub split: Option<(Rational, u64)>,
    pub sweep: Option<Vec<Rational>>,
    pub seed: u64,
    /// Multiplier applied to rule-derived thresholds of the equalized table.
    pub table_scale: Rational,
    pub options: PipelineOptions,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointResult {
    pub minsup: String,
    pub minsup_count: u64,
    pub excluded_items: usize,
    pub runs: Vec<RunResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<BTreeMap<Algorithm, Accuracy>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportMetadata {
    pub transactions: usize,
    pub items: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_transactions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_transactions: Option<usize>,
    #[serde(serialize_with = "ser_rational")]
    pub minconf: Rational,
    pub repeats: usize,
    pub threads: usize,
    pub count_strategy: String,
    #[serde(serialize_with = "ser_rational")]
    pub table_scale: Rational,
    pub accuracy_definition: &'static str,
    pub index_domain: &'static str,
    pub timing: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub metadata: ReportMetadata,
    pub points: Vec<PointResult>,
    pub time_index: IndexTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy_index: Option<IndexTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRow>>,
}

/// Equalize at every minimum-support point, run all four pipelines on the
/// same corpus (the training side when splitting), and summarize.
pub fn run_bench(ts: &TransactionSet, config: &BenchConfig) -> Result<BenchReport> {
    if config.minsups.is_empty() {
        return Err(Error::InvalidParameter("no minsup points".into()));
    }
    let options = &config.options;
    let split = config
        .split
        .map(|(fraction, seed)| split_train_test(ts, fraction, seed))
        .transpose()?;
    let mining = split.as_ref().map_or(ts, |(train, _)| train);

    let mut points = Vec::new();
    let mut times: BTreeMap<Algorithm, Vec<Duration>> = BTreeMap::new();
    let mut accuracies: BTreeMap<Algorithm, Vec<Rational>> = BTreeMap::new();
    for &threshold in &config.minsups {
        let count = threshold.resolve(mining.n());
        let sar = pipeline::run(
            Algorithm::Sar,
            mining,
            &MinsupSpec::Single(count),
            config.minconf,
            options,
        )?;
        let mut index = sar.index;
        let report = derive_minsups(&sar.rules, mining, &mut index, &options.counter)?;
        let table = MinsupSpec::Table(report.scaled_table(config.table_scale));

        let mut runs = Vec::new();
        let mut point_acc = BTreeMap::new();
        for alg in Algorithm::ALL {
            let spec = if alg.multi_support() {
                table.clone()
            } else {
                MinsupSpec::Single(count)
            };
            let (run, out) = run_pipeline(alg, mining, &spec, config.minconf, config.repeats, options)?;
            times.entry(alg).or_default().push(run.timing.total);
            if let Some((_, test)) = &split {
                let acc = accuracy(test, &out.rules, config.minconf, options)?;
                accuracies.entry(alg).or_default().push(acc.value);
                point_acc.insert(alg, acc);
            }
            runs.push(run);
        }
        points.push(PointResult {
            minsup: threshold.to_string(),
            minsup_count: count,
            excluded_items: report.excluded_items.len(),
            runs,
            accuracy: split.is_some().then_some(point_acc),
        });
    }

    let time_index = time_index(&times)?;
    let accuracy_index = if split.is_some() {
        Some(accuracy_index(&accuracies)?)
    } else {
        None
    };
    let sweep = match &config.sweep {
        Some(fractions) => Some(complexity_sweep(
            ts,
            fractions,
            &Algorithm::ALL,
            config.minsups[0],
            config.minconf,
            config.seed,
            config.repeats,
            options,
        )?),
        None => None,
    };

    Ok(BenchReport {
        metadata: ReportMetadata {
            transactions: ts.n(),
            items: ts.n_items(),
            train_transactions: split.as_ref().map(|(t, _)| t.n()),
            test_transactions: split.as_ref().map(|(_, t)| t.n()),
            minconf: config.minconf,
            repeats: config.repeats,
            threads: options.counter.threads(),
            count_strategy: format!("{:?}", options.counter.strategy()).to_lowercase(),
            table_scale: config.table_scale,
            accuracy_definition: ACCURACY_DEFINITION,
            index_domain: INDEX_DOMAIN,
            timing: "monotonic clock, one warm-up run discarded, median over repeats",
        },
        points,
        time_index,
        accuracy_index,
        sweep,
    })
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report json");
        text.push('\n');
        text
    }

    /// One row per point and algorithm.
    pub fn runs_csv(&self) -> String {
        let mut out = String::from(
            "minsup,algorithm,n_frequent,n_rules,itemset_seconds,rule_seconds,total_seconds,seconds_per_rule,accuracy\n",
        );
        for p in &self.points {
            for r in &p.runs {
                let acc = p
                    .accuracy
                    .as_ref()
                    .and_then(|a| a.get(&r.algorithm))
                    .map(|a| format_decimal(a.value))
                    .unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:.6},{:.6},{:.6},{:.9},{}",
                    p.minsup,
                    r.algorithm,
                    r.n_frequent,
                    r.n_rules,
                    seconds(&r.timing.itemset),
                    seconds(&r.timing.rule),
                    seconds(&r.timing.total),
                    seconds(&r.timing.per_rule),
                    acc
                );
            }
        }
        out
    }

    pub fn indices_csv(&self) -> String {
        let mut out = String::from("algorithm,time_index,accuracy_index\n");
        for alg in Algorithm::ALL {
            let t = self.time_index.values.get(&alg).copied().unwrap_or(f64::NAN);
            let a = self
                .accuracy_index
                .as_ref()
                .and_then(|i| i.values.get(&alg))
                .map(|v| format!("{v:.2}"))
                .unwrap_or_default();
            let _ = writeln!(out, "{alg},{t:.2},{a}");
        }
        out
    }

    /// `minsup,algorithm,seconds`
    pub fn minsup_plot_csv(&self) -> String {
        let mut out = String::from("minsup,algorithm,seconds\n");
        for p in &self.points {
            for r in &p.runs {
                let _ = writeln!(out, "{},{},{:.6}", p.minsup, r.algorithm, seconds(&r.timing.total));
            }
        }
        out
    }

    /// `fraction,algorithm,seconds`, empty unless a sweep ran.
    pub fn fraction_plot_csv(&self) -> String {
        let mut out = String::from("fraction,algorithm,seconds\n");
        for row in self.sweep.iter().flatten() {
            let _ = writeln!(
                out,
                "{},{},{:.6}",
                format_decimal(row.fraction),
                row.run.algorithm,
                seconds(&row.run.timing.total)
            );
        }
        out
    }
}
