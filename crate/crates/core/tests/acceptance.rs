//! Acceptance criteria. Each test prints one PASS/FAIL line; run with
//! `cargo test -p rulemine --test acceptance -- --nocapture` to see them.

mod common;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use rulemine::bench::{accuracy_index, run_pipeline, time_index};
use rulemine::counting::{brute_force_frequent, Counter, Itemset, ItemsetRecord, SupportIndex};
use rulemine::equalizer::{derive_minsups, verify_equalization};
use rulemine::miners::{mine_apriori, mine_max_constraints, MinsupTable};
use rulemine::pipeline::{self, MinsupSpec, PipelineOptions};
use rulemine::rules::{
    confidence, derive_compound_confidence, generate_all_rules, generate_simple_rules, Algorithm,
    Rule, RuleSet,
};
use rulemine::{generate_synthetic, Rational, TransactionSet};

use common::{as_map, random_corpus, report, rng};

const CORPORA: u64 = 200;

#[test]
fn ac01_apriori_matches_oracle() {
    let started = Instant::now();
    let mut r = rng(0xA1);
    for case in 0..CORPORA {
        let ts = random_corpus(&mut r, 15, 200);
        let minsup = r.random_range(0..=ts.n() as u64 + 1);
        let (levels, _) = mine_apriori(&ts, minsup, &Counter::default());
        let oracle = brute_force_frequent(&ts, |_| minsup).unwrap();
        let got = as_map(levels.iter());
        let want = as_map(&oracle);
        if got != want {
            report("AC1 apriori == oracle", false, &format!("case {case} minsup {minsup}"));
            panic!("case {case}: {} itemsets mined, oracle {}", got.len(), want.len());
        }
        for level in levels.levels() {
            assert!(level.windows(2).all(|w| w[0].itemset < w[1].itemset));
        }
    }
    let elapsed = started.elapsed();
    let ok = elapsed < Duration::from_secs(60);
    report("AC1 apriori == oracle", ok, &format!("{CORPORA} corpora, {elapsed:.2?}"));
    assert!(ok);
}

/// The Fig. 1 candidate path enumerated directly from exhaustive supports:
/// a k-itemset is reachable when both join parents (drop the last item,
/// drop the second to last) are frequent and every member item's support
/// reaches mI; it is frequent when its own support reaches mI too.
fn max_constraint_oracle(ts: &TransactionSet, thresholds: &[u64]) -> HashMap<Vec<u32>, u64> {
    let all = brute_force_frequent(ts, |_| 0).unwrap();
    let support: HashMap<Vec<u32>, u64> = as_map(&all);
    let item_sup = |i: u32| support[&vec![i]];
    let mut frequent: HashMap<Vec<u32>, u64> = HashMap::new();
    // brute_force_frequent returns shortest first
    for rec in &all {
        let ids = rec.itemset.ids();
        let m_i = ids.iter().map(|&i| thresholds[i as usize]).max().unwrap();
        let reachable = if ids.len() == 1 {
            true
        } else {
            let k = ids.len();
            let mut a = ids.clone();
            a.remove(k - 1);
            let mut b = ids.clone();
            b.remove(k - 2);
            frequent.contains_key(&a)
                && frequent.contains_key(&b)
                && ids.iter().all(|&i| item_sup(i) >= m_i)
        };
        if reachable && rec.support >= m_i {
            frequent.insert(ids, rec.support);
        }
    }
    frequent
}

#[test]
fn ac02_max_constraints_match_oracle() {
    let started = Instant::now();
    let mut r = rng(0xA2);
    for case in 0..CORPORA {
        let ts = random_corpus(&mut r, 15, 200);
        let thresholds: Vec<u64> = (0..ts.n_items())
            .map(|_| r.random_range(0..=ts.n() as u64 + 1))
            .collect();
        let table = MinsupTable::from_counts(&thresholds);
        let (levels, _) = mine_max_constraints(&ts, &table, &Counter::default()).unwrap();
        let got = as_map(levels.iter());
        let want = max_constraint_oracle(&ts, &thresholds);
        // the plain mI oracle agrees as well, since the constraint is anti-monotone
        let plain = brute_force_frequent(&ts, |s| {
            s.items().iter().map(|i| thresholds[i.index()]).max().unwrap()
        })
        .unwrap();
        if got != want || got != as_map(&plain) {
            report("AC2 max constraints == oracle", false, &format!("case {case}"));
            panic!("case {case}: mined {} oracle {}", got.len(), want.len());
        }
        for rec in levels.iter() {
            let m_i = rec.itemset.items().iter().map(|i| thresholds[i.index()]).max().unwrap();
            assert!(rec.support >= m_i);
        }
    }
    let elapsed = started.elapsed();
    let ok = elapsed < Duration::from_secs(120);
    report("AC2 max constraints == oracle", ok, &format!("{CORPORA} corpora, {elapsed:.2?}"));
    assert!(ok);
}

fn sar_and_sarmsmc(ts: &TransactionSet, minsup: u64, minconf: Rational) -> (RuleSet, RuleSet) {
    let opts = PipelineOptions::default();
    let sar = pipeline::run(Algorithm::Sar, ts, &MinsupSpec::Single(minsup), minconf, &opts).unwrap();
    let table = MinsupSpec::Table(MinsupTable::uniform(ts.n_items(), minsup));
    let multi = pipeline::run(Algorithm::Sarmsmc, ts, &table, minconf, &opts).unwrap();
    (sar.rules, multi.rules)
}

#[test]
fn ac03_uniform_table_reduces_to_single_support() {
    let mut r = rng(0xA3);
    for case in 0..50 {
        let ts = random_corpus(&mut r, 12, 150);
        let minsup = r.random_range(1..=ts.n() as u64);
        let minconf = Ratio::new(r.random_range(0..=10), 10);
        let (a, _) = mine_apriori(&ts, minsup, &Counter::default());
        let table = MinsupTable::uniform(ts.n_items(), minsup);
        let (m, _) = mine_max_constraints(&ts, &table, &Counter::default()).unwrap();
        assert_eq!(a, m, "case {case}: levels differ");
        let (sar, multi) = sar_and_sarmsmc(&ts, minsup, minconf);
        assert_eq!(sar.rules(), multi.rules(), "case {case}: rules differ");
    }
    report("AC3 uniform reduction", true, "50 corpora, levels and rule sets identical");
}

#[test]
fn ac04_simple_rules_and_confidence_products() {
    let mut r = rng(0xA4);
    let mut chains = 0usize;
    for case in 0..50 {
        let ts = random_corpus(&mut r, 12, 150);
        let minsup = r.random_range(1..=(ts.n() as u64 / 3).max(1));
        let minconf = Ratio::new(r.random_range(0..=10), 10);
        let (levels, _) = mine_apriori(&ts, minsup, &Counter::default());
        let index = levels.index();
        let all = generate_all_rules(&levels, minconf, &index, None).unwrap();
        let simple = generate_simple_rules(&levels, minconf, &index, None).unwrap();
        let filtered: Vec<Rule> = all.iter().filter(|r| r.is_simple()).cloned().collect();
        assert_eq!(simple.rules(), filtered.as_slice(), "case {case}");

        for full in levels.iter().filter(|f| f.itemset.len() >= 3) {
            for _ in 0..3 {
                let mut order = full.itemset.items().to_vec();
                order.shuffle(&mut r);
                let base_len = r.random_range(1..order.len());
                let mut antecedent = Itemset::new(order[..base_len].to_vec()).unwrap();
                let base_support = index.require(&antecedent).unwrap();
                let mut chain = Vec::new();
                for &next in &order[base_len..] {
                    let grown = antecedent.union(&Itemset::singleton(next));
                    let conf = confidence(
                        &ItemsetRecord::new(grown.clone(), index.require(&grown).unwrap()),
                        &ItemsetRecord::new(antecedent.clone(), index.require(&antecedent).unwrap()),
                    )
                    .unwrap();
                    chain.push(Rule {
                        antecedent: antecedent.clone(),
                        consequent: Itemset::singleton(next),
                        support: index.require(&grown).unwrap(),
                        confidence: conf,
                        lift: Ratio::from_integer(0),
                    });
                    antecedent = grown;
                }
                let product = derive_compound_confidence(&chain).unwrap();
                assert_eq!(product, Ratio::new(full.support, base_support), "case {case}");
                chains += 1;
            }
        }
    }
    assert!(chains > 100, "too few chains exercised: {chains}");
    report(
        "AC4 simple-rule semantics",
        true,
        &format!("50 corpora, {chains} confidence-product chains exact"),
    );
}

#[test]
fn ac05_worked_scenario_rule_counts() {
    // frequent A, B, E, AB, AE, BE, ABE at minsup 3; C and D stay infrequent
    let rows: Vec<Vec<&str>> = vec![
        vec!["A", "B", "E"],
        vec!["A", "B", "E"],
        vec!["A", "B", "E"],
        vec!["A"],
        vec!["B", "E"],
        vec!["B", "E"],
        vec!["C", "D"],
    ];
    let ts = TransactionSet::from_labels(&rows).unwrap();
    let minconf = Ratio::new(3, 4);
    let opts = PipelineOptions::default();
    let apriori = pipeline::run(Algorithm::Apriori, &ts, &MinsupSpec::Single(3), minconf, &opts).unwrap();
    let sar = pipeline::run(Algorithm::Sar, &ts, &MinsupSpec::Single(3), minconf, &opts).unwrap();
    let dict = ts.dictionary();
    let show = |rs: &RuleSet| -> HashSet<String> { rs.iter().map(|r| r.display(dict)).collect() };
    let all = show(&apriori.rules);
    let simple = show(&sar.rules);
    let dropped: Vec<&String> = all.difference(&simple).collect();
    for kept in ["A => B", "A B => E", "A => E", "A E => B"] {
        assert!(simple.contains(kept), "{kept} missing");
    }
    let ok = apriori.rules.len() == 7
        && sar.rules.len() == 6
        && dropped == vec!["A => B E"]
        && simple.is_subset(&all);
    report(
        "AC5 worked scenario",
        ok,
        &format!(
            "all rules {}, simple rules {}, excluded {:?}",
            apriori.rules.len(),
            sar.rules.len(),
            dropped
        ),
    );
    assert!(ok);
}

#[test]
fn ac06_equalization_worked_example() {
    let ts = TransactionSet::from_labels(&[vec!["A", "B", "C", "D", "E"]]).unwrap();
    let id = |l: &str| ts.dictionary().get(l).unwrap();
    let set = |ls: &[&str]| Itemset::new(ls.iter().map(|l| id(l)).collect()).unwrap();
    let mut index = SupportIndex::new();
    for (ls, sup) in [
        (&["A", "B"][..], 589),
        (&["A", "C"], 725),
        (&["B", "C"], 1623),
        (&["A", "B", "C"], 589),
        (&["D", "B"], 485),
        (&["D", "E"], 559),
        (&["B", "E"], 1513),
        (&["D", "B", "E"], 485),
    ] {
        index.insert(set(ls), sup);
    }
    let rule = |ante: &[&str], cons: &str| Rule {
        antecedent: set(ante),
        consequent: set(&[cons]),
        support: 0,
        confidence: Ratio::from_integer(1),
        lift: Ratio::from_integer(1),
    };
    let rules = RuleSet::new(
        vec![rule(&["A", "B"], "C"), rule(&["D", "B"], "E")],
        Ratio::from_integer(0),
        Algorithm::Sar,
        ts.n(),
    );
    let report_ = derive_minsups(&rules, &ts, &mut index, &Counter::default()).unwrap();
    let got: BTreeMap<&str, u64> = ["A", "B", "C", "D", "E"]
        .into_iter()
        .map(|l| (l, report_.table.resolve(id(l)).unwrap()))
        .collect();
    let want: BTreeMap<&str, u64> =
        [("A", 589), ("B", 485), ("C", 589), ("D", 485), ("E", 485)].into();
    let ok = got == want;
    report("AC6 equalization example", ok, &format!("{got:?}"));
    assert!(ok);
}

#[test]
fn ac07_equalization_containment() {
    let started = Instant::now();
    let mut r = rng(0xA7);
    let mut extras = 0usize;
    for case in 0..100 {
        let ts = random_corpus(&mut r, 15, 200);
        let minsup = r.random_range(1..=ts.n() as u64);
        let minconf = Ratio::new(r.random_range(0..=10), 10);
        let opts = PipelineOptions::default();
        let sar = pipeline::run(Algorithm::Sar, &ts, &MinsupSpec::Single(minsup), minconf, &opts).unwrap();
        let check = verify_equalization(&sar.rules, &ts, minconf, &opts).unwrap();
        if !check.subset_ok {
            report("AC7 equalization containment", false, &format!("case {case}"));
            panic!("case {case}: SAR rule missing from SARMSMC output");
        }
        for &item in &check.report.excluded_items {
            let (levels, _) = mine_max_constraints(&ts, &check.report.table, &Counter::default()).unwrap();
            assert!(levels.level(1).iter().all(|rec| rec.itemset.items() != [item]));
        }
        extras += check.extra_rules.len();
    }
    let elapsed = started.elapsed();
    let ok = elapsed < Duration::from_secs(120);
    report(
        "AC7 equalization containment",
        ok,
        &format!("100 corpora subset_ok, {extras} extra rules in total, {elapsed:.2?}"),
    );
    assert!(ok);
}

fn check_row<F>(label: &str, row: [f64; 4], build: F) -> bool
where
    F: Fn(&[f64; 4]) -> BTreeMap<Algorithm, f64>,
{
    let got = build(&row);
    let max = got.values().copied().fold(f64::MIN, f64::max);
    let close = Algorithm::ALL
        .iter()
        .zip(row)
        .all(|(alg, want)| (got[alg] - want).abs() <= 0.05);
    let ok = close && max == 100.0;
    report(label, ok, &format!("{got:?}"));
    ok
}

#[test]
fn ac08_index_formulas() {
    // sums split over three points and scaled, so only the ratios carry over
    let accuracy = |row: &[f64; 4]| {
        let map: BTreeMap<Algorithm, Vec<Rational>> = Algorithm::ALL
            .iter()
            .zip(row)
            .map(|(&alg, &v)| {
                let hundredths = (v * 100.0).round() as u64;
                let share = Ratio::new(hundredths, 30_000);
                (alg, vec![share, share, share])
            })
            .collect();
        accuracy_index(&map).unwrap().values
    };
    let time = |row: &[f64; 4]| {
        let map: BTreeMap<Algorithm, Vec<Duration>> = Algorithm::ALL
            .iter()
            .zip(row)
            .map(|(&alg, &v)| {
                let total = Duration::from_secs_f64(v * 7.3);
                (alg, vec![total / 4, total / 4, total / 2])
            })
            .collect();
        time_index(&map).unwrap().values
    };
    let results = [
        check_row("AC8 time index, many-items table", [98.6, 100.0, 5.27, 5.18], time),
        check_row("AC8 time index, few-items table", [100.0, 97.77, 83.45, 81.40], time),
        check_row("AC8 accuracy index, few-items table", [97.89, 100.0, 98.25, 99.99], accuracy),
        check_row("AC8 accuracy index, many-items table", [99.13, 100.0, 92.05, 85.92], accuracy),
    ];
    assert!(results.iter().all(|&ok| ok));
}

#[test]
fn ac09_multi_support_itemset_phase_is_faster() {
    let started = Instant::now();
    let ts = generate_synthetic(20_000, 348, 3, 2024).unwrap();
    assert!(ts.n_items() >= 300, "only {} items occur", ts.n_items());
    let minsup = 40; // 0.2%
    let minconf = Ratio::new(1, 2);
    let opts = PipelineOptions::default();
    let sar = pipeline::run(Algorithm::Sar, &ts, &MinsupSpec::Single(minsup), minconf, &opts).unwrap();
    let mut index = sar.index.clone();
    let eq = derive_minsups(&sar.rules, &ts, &mut index, &opts.counter).unwrap();
    let table = MinsupSpec::Table(eq.table.clone());

    let (apriori, _) = run_pipeline(Algorithm::Apriori, &ts, &MinsupSpec::Single(minsup), minconf, 3, &opts).unwrap();
    let (multi, out) = run_pipeline(Algorithm::Sarmsmc, &ts, &table, minconf, 3, &opts).unwrap();
    assert!(sar.rules.is_subset_of(&out.rules));

    let ratio = apriori.timing.itemset.as_secs_f64() / multi.timing.itemset.as_secs_f64().max(1e-9);
    let ok = ratio >= 5.0;
    let detail = format!(
        "{} items, {} rules; apriori itemsets {:.3?} ({} frequent), sarmsmc itemsets {:.3?} ({} frequent), ratio {ratio:.1}x, {:.1?} total",
        ts.n_items(),
        sar.rules.len(),
        apriori.timing.itemset,
        apriori.n_frequent,
        multi.timing.itemset,
        multi.n_frequent,
        started.elapsed()
    );
    if ok {
        report("AC9 timing ratio (soft)", true, &detail);
    } else {
        // soft criterion: environment-dependent, reported but not fatal
        println!("[WARN] AC9 timing ratio (soft): below 5x: {detail}");
    }
    assert!(started.elapsed() < Duration::from_secs(600));
}

#[test]
fn ac10_lift_properties() {
    // exact independence: cell counts a*c, a*d, b*c, b*d
    let mut independent = 0;
    for a in 1..=3usize {
        for b in 1..=3usize {
            for c in 1..=3usize {
                for d in 1..=3usize {
                    let mut rows: Vec<Vec<&str>> = Vec::new();
                    rows.extend(std::iter::repeat_n(vec!["X", "Y"], a * c));
                    rows.extend(std::iter::repeat_n(vec!["X", "Z"], a * d));
                    rows.extend(std::iter::repeat_n(vec!["Y", "Z"], b * c));
                    rows.extend(std::iter::repeat_n(vec!["Z"], b * d));
                    let ts = TransactionSet::from_labels(&rows).unwrap();
                    let (levels, _) = mine_apriori(&ts, 1, &Counter::default());
                    let rules =
                        generate_all_rules(&levels, Ratio::from_integer(0), &levels.index(), None).unwrap();
                    let x = ts.dictionary().get("X").unwrap();
                    let y = ts.dictionary().get("Y").unwrap();
                    let rule = rules
                        .get(&Itemset::singleton(x), &Itemset::singleton(y))
                        .expect("X => Y");
                    assert_eq!(rule.lift, Ratio::from_integer(1));
                    independent += 1;
                }
            }
        }
    }

    let mut r = rng(0xB0);
    let mut checked = 0usize;
    while checked < 1000 {
        let ts = random_corpus(&mut r, 8, 60);
        let n = ts.n() as u64;
        let (levels, _) = mine_apriori(&ts, 1, &Counter::default());
        let index = levels.index();
        let rules = generate_all_rules(&levels, Ratio::from_integer(0), &index, None).unwrap();
        for rule in rules.iter() {
            let sup_x = common::naive_support(&ts, &rule.antecedent);
            let sup_y = common::naive_support(&ts, &rule.consequent);
            let sup_xy = common::naive_support(&ts, &rule.itemset());
            let p_y = Ratio::new(sup_y, n);
            let direct = Ratio::new(sup_xy, n) / (Ratio::new(sup_x, n) * p_y);
            assert_eq!(rule.lift, direct);
            assert_eq!(rule.lift > Ratio::from_integer(1), rule.confidence > p_y);
            assert_eq!(rule.lift == Ratio::from_integer(1), rule.confidence == p_y);
            checked += 1;
        }
    }
    report(
        "AC10 lift",
        true,
        &format!("{independent} independent pairs at lift 1, {checked} random rules"),
    );
}
