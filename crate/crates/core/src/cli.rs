//! Command-line driver. Exit codes: 0 success, 1 data error, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bench::{run_bench, BenchConfig};
use crate::counting::{CountStrategy, Counter};
use crate::dataset::{generate_synthetic, load_transactions, Format, TransactionSet};
use crate::equalizer::{derive_minsups, verify_equalization};
use crate::error::Error;
use crate::miners::MinsupTable;
use crate::pipeline::{self, MinsupSpec, PipelineOptions};
use crate::ratio::{parse_rational, Rational, Threshold};
use crate::rules::Algorithm;

#[derive(Debug, Parser)]
#[command(name = "rulemine", version, about = "Frequent itemset and association rule mining")]
pub struct Cli {
    /// Worker threads for support counting.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Candidate matching used by counting passes.
    #[arg(long, global = true, value_enum, default_value_t = StrategyArg::Scan)]
    pub count_strategy: StrategyArg,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine rules with one of the four pipelines.
    Mine(MineArgs),
    /// Derive per-item minimum supports that reproduce a SAR run.
    Equalize(EqualizeArgs),
    /// Run all four pipelines over several minimum supports.
    Bench(BenchArgs),
    /// Write a synthetic basket-format corpus.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Basket,
    TidItems,
}

impl From<InputFormat> for Format {
    fn from(f: InputFormat) -> Self {
        match f {
            InputFormat::Basket => Format::Basket,
            InputFormat::TidItems => Format::TidItems,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    /// Merge-test every candidate against every transaction.
    Scan,
    /// Bucket candidates by leading item.
    Indexed,
}

impl From<StrategyArg> for CountStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Scan => CountStrategy::Scan,
            StrategyArg::Indexed => CountStrategy::Indexed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Apriori,
    Sar,
    MaxConstraints,
    Sarmsmc,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Apriori => Algorithm::Apriori,
            AlgoArg::Sar => Algorithm::Sar,
            AlgoArg::MaxConstraints => Algorithm::MaxConstraints,
            AlgoArg::Sarmsmc => Algorithm::Sarmsmc,
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Transaction file.
    pub input: PathBuf,

    #[arg(long, value_enum, default_value_t = InputFormat::Basket)]
    pub format: InputFormat,
}

fn threshold_arg(s: &str) -> Result<Threshold, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_enum)]
    pub algo: AlgoArg,

    /// Single minimum support: an integer count, a fraction or a percentage.
    #[arg(long, value_parser = threshold_arg, conflicts_with = "minsup_table", required_unless_present = "minsup_table")]
    pub minsup: Option<Threshold>,

    /// Per-item minimum support table (`label,threshold` lines).
    #[arg(long)]
    pub minsup_table: Option<PathBuf>,

    /// Minimum confidence, e.g. 0.75 or 75%.
    #[arg(long, value_parser = rational_arg)]
    pub minconf: Rational,

    /// Rules file; a `.stats.json` sidecar is written next to it.
    #[arg(short, long)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Emit::Csv)]
    pub emit: Emit,

    /// Fail when more rules than this would be emitted.
    #[arg(long)]
    pub max_rules: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EqualizeArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_parser = threshold_arg)]
    pub minsup: Threshold,

    #[arg(long, value_parser = rational_arg)]
    pub minconf: Rational,

    /// Table file; a `.provenance.json` sidecar is written next to it.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Comma-separated minimum supports.
    #[arg(long, value_parser = threshold_arg, value_delimiter = ',', required = true)]
    pub minsups: Vec<Threshold>,

    #[arg(long, value_parser = rational_arg)]
    pub minconf: Rational,

    /// Test fraction for a train/test accuracy run.
    #[arg(long, value_parser = rational_arg)]
    pub split: Option<Rational>,

    /// Comma-separated corpus fractions for a complexity sweep.
    #[arg(long, value_parser = rational_arg, value_delimiter = ',')]
    pub sweep: Option<Vec<Rational>>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 3)]
    pub repeats: usize,

    /// Multiplier for rule-derived thresholds of the equalized table.
    #[arg(long, value_parser = rational_arg, default_value = "1")]
    pub table_scale: Rational,

    /// Output directory for report.json and the CSV tables.
    #[arg(short, long)]
    pub output: Option<PathBuf>,

    /// Format printed to stdout when no output directory is given.
    #[arg(long, value_enum, default_value_t = Emit::Json)]
    pub emit: Emit,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,

    #[arg(long)]
    pub items: usize,

    #[arg(long)]
    pub avg_len: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(Error::Io(e))
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let counter = Counter::new(cli.threads).with_strategy(cli.count_strategy.into());
    let result = match &cli.command {
        Command::Mine(a) => cmd_mine(a, counter),
        Command::Equalize(a) => cmd_equalize(a, counter),
        Command::Bench(a) => cmd_bench(a, counter),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run with --help for usage");
            2
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load(input: &InputArgs) -> Result<TransactionSet, Error> {
    let file = fs::File::open(&input.input).map_err(|e| Error::Io(e).in_file(&input.input))?;
    load_transactions(io::BufReader::new(file), input.format.into()).map_err(|e| e.in_file(&input.input))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(e).in_file(p)),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn cmd_mine(args: &MineArgs, counter: Counter) -> CmdResult {
    let algorithm: Algorithm = args.algo.into();
    let ts = load(&args.input)?;
    let spec = match (&args.minsup, &args.minsup_table) {
        (Some(t), None) => {
            let count = t.resolve(ts.n());
            if algorithm.multi_support() {
                eprintln!(
                    "warning: scalar --minsup given to {algorithm}; using it as a uniform table"
                );
                MinsupSpec::Table(MinsupTable::uniform(ts.n_items(), count))
            } else {
                MinsupSpec::Single(count)
            }
        }
        (None, Some(path)) => {
            if !algorithm.multi_support() {
                return Err(Failure::Usage(format!(
                    "{algorithm} takes a single --minsup, not --minsup-table"
                )));
            }
            let text = fs::read_to_string(path).map_err(|e| Error::Io(e).in_file(path))?;
            let table = MinsupTable::parse(&text, ts.dictionary(), ts.n()).map_err(|e| e.in_file(path))?;
            MinsupSpec::Table(table)
        }
        _ => return Err(Failure::Usage("give exactly one of --minsup and --minsup-table".into())),
    };
    let options = PipelineOptions {
        counter,
        max_rules: args.max_rules,
    };
    let out = pipeline::run(algorithm, &ts, &spec, args.minconf, &options)?;

    let rules_text = match args.emit {
        Emit::Csv => out.rules.to_csv(ts.dictionary()),
        Emit::Json => out.rules.to_json(ts.dictionary()),
    };
    write_out(args.output.as_deref(), &rules_text)?;

    let stats = json!({
        "algorithm": algorithm,
        "transactions": ts.n(),
        "items": ts.n_items(),
        "counts": {
            "frequent_per_level": out.levels.counts_per_level(),
            "n_frequent": out.levels.len(),
            "candidates_per_level": out.stats.candidates_per_level,
            "db_scans": out.stats.db_scans,
            "n_rules": out.rules.len(),
        },
        "timing": {
            "itemset_seconds": out.itemset_time.as_secs_f64(),
            "rule_seconds": out.rule_time.as_secs_f64(),
        },
    });
    let stats_text = serde_json::to_string_pretty(&stats).map_err(Error::from)? + "\n";
    match &args.output {
        Some(p) => write_out(Some(&sidecar(p, ".stats.json")), &stats_text)?,
        None => eprint!("{stats_text}"),
    }
    Ok(())
}

fn cmd_equalize(args: &EqualizeArgs, counter: Counter) -> CmdResult {
    let ts = load(&args.input)?;
    let options = PipelineOptions {
        counter,
        max_rules: None,
    };
    let minsup = args.minsup.resolve(ts.n());
    let sar = pipeline::run(
        Algorithm::Sar,
        &ts,
        &MinsupSpec::Single(minsup),
        args.minconf,
        &options,
    )?;
    let mut index = sar.index.clone();
    let report = derive_minsups(&sar.rules, &ts, &mut index, &counter)?;
    write_out(Some(&args.output), &report.table.to_file_string(ts.dictionary()))?;
    write_out(
        Some(&sidecar(&args.output, ".provenance.json")),
        &report.provenance_json(ts.dictionary()),
    )?;
    let check = verify_equalization(&sar.rules, &ts, args.minconf, &options)?;
    println!(
        "subset_ok={} extra_rules={} sar_rules={} excluded_items={}",
        check.subset_ok,
        check.extra_rules.len(),
        sar.rules.len(),
        report.excluded_items.len()
    );
    Ok(())
}

fn cmd_bench(args: &BenchArgs, counter: Counter) -> CmdResult {
    if args.repeats == 0 {
        return Err(Failure::Usage("--repeats must be positive".into()));
    }
    let ts = load(&args.input)?;
    let config = BenchConfig {
        minsups: args.minsups.clone(),
        minconf: args.minconf,
        repeats: args.repeats,
        split: args.split.map(|f| (f, args.seed)),
        sweep: args.sweep.clone(),
        seed: args.seed,
        table_scale: args.table_scale,
        options: PipelineOptions {
            counter,
            max_rules: None,
        },
    };
    let report = run_bench(&ts, &config)?;
    match &args.output {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::Io(e).in_file(dir))?;
            write_out(Some(&dir.join("report.json")), &report.to_json())?;
            write_out(Some(&dir.join("runs.csv")), &report.runs_csv())?;
            write_out(Some(&dir.join("indices.csv")), &report.indices_csv())?;
            write_out(Some(&dir.join("plot_minsup.csv")), &report.minsup_plot_csv())?;
            if report.sweep.is_some() {
                write_out(Some(&dir.join("plot_fraction.csv")), &report.fraction_plot_csv())?;
            }
            eprint!("{}", report.indices_csv());
        }
        None => match args.emit {
            Emit::Json => write_out(None, &report.to_json())?,
            Emit::Csv => {
                write_out(None, &report.runs_csv())?;
                write_out(None, &report.indices_csv())?;
            }
        },
    }
    Ok(())
}

fn cmd_generate(args: &GenerateArgs) -> CmdResult {
    let ts = generate_synthetic(args.n, args.items, args.avg_len, args.seed)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    write_out(args.output.as_deref(), &ts.to_basket_string())?;
    Ok(())
}
