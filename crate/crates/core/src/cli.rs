//! Command-line front end. Each subcommand maps onto one library operation;
//! stdout carries only the serialized result and diagnostics go to stderr.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::second_moment_report;
use crate::darray::{self, DArray, SearchMode};
use crate::output::{fmt_f64, Json};
use crate::permutations::{self, DPattern, DPermutation, Permutation};
use crate::random::{self, Crossing, RandomSource, GENERATOR};
use crate::words::{self, Alphabet, Word};
use crate::{Error, Result};

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "UNIVERSALITY_LAB_SEED";

const PROGRESS_INTERVAL: Duration = Duration::from_secs(2);

#[derive(Debug, Parser)]
#[command(
    name = "universality-lab",
    version,
    about = "Universal words and arrays: checks, constructions, bounds, Monte Carlo"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOptions,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOptions {
    /// Output format; csv and jsonl apply to experiment records.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for trial execution (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Jsonl,
    Text,
}

#[derive(Debug, Args)]
struct AlphabetArg {
    /// Alphabet size q (symbols are 1..q).
    #[arg(long = "alphabet-size", visible_alias = "q")]
    q: u32,
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Master seed; falls back to $UNIVERSALITY_LAB_SEED.
    #[arg(long, env = SEED_ENV)]
    seed: u64,
}

#[derive(Debug, Args)]
struct PermInput {
    /// Permutation in one-line notation, e.g. 2413 or 10,9,...,1.
    #[arg(long, conflicts_with = "file")]
    perm: Option<String>,
    /// d-permutation JSON file {"d", "n", "support"}.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Auto,
    Selections,
    Targets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Auto,
    Exhaustive,
    Random,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Universality index and k-universality of a word.
    WordCheck {
        #[command(flatten)]
        alphabet: AlphabetArg,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        word: String,
    },
    /// Greedy universal decomposition of a word.
    WordDecompose {
        #[command(flatten)]
        alphabet: AlphabetArg,
        #[arg(long)]
        word: String,
    },
    /// A word of length at most k that the input does not contain.
    WordWitness {
        #[command(flatten)]
        alphabet: AlphabetArg,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        word: String,
    },
    /// The shortest k-universal word (12...q)^k.
    WordGen {
        #[command(flatten)]
        alphabet: AlphabetArg,
        #[arg(long)]
        k: usize,
    },
    /// Number of occurrences of a pattern as a subsequence.
    WordCount {
        #[command(flatten)]
        alphabet: AlphabetArg,
        #[arg(long)]
        word: String,
        #[arg(long)]
        pattern: String,
    },
    /// A length-k word occurring at least twice as a subsequence.
    WordRepeat {
        #[command(flatten)]
        alphabet: AlphabetArg,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        word: String,
    },
    /// Probability that a uniform word of length n is k-universal.
    McWords {
        #[command(flatten)]
        alphabet: AlphabetArg,
        #[arg(long)]
        k: usize,
        /// One or more lengths, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        trials: u64,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Coupon-collector block length statistics.
    McCoupon {
        #[command(flatten)]
        alphabet: AlphabetArg,
        #[arg(long)]
        trials: u64,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Tail frequencies of k concatenated coupon blocks on the sqrt(k) scale.
    McDeviation {
        #[command(flatten)]
        alphabet: AlphabetArg,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        trials: u64,
        /// Deviation multiples t, comma-separated.
        #[arg(long = "t", value_delimiter = ',', required = true)]
        t_values: Vec<f64>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Whether one array contains another; prints the least embedding.
    ArrayCheck {
        /// Host array: JSON file path, or inline JSON starting with `{`.
        #[arg(long)]
        array: String,
        /// Array to look for, same forms as --array.
        #[arg(long)]
        pattern: String,
        /// Alphabet size for digit-grid inputs.
        #[arg(long = "alphabet-size", visible_alias = "q")]
        q: Option<u32>,
    },
    /// Whether an array contains every order-k array.
    ArrayUniversal {
        #[arg(long)]
        array: String,
        #[arg(long)]
        k: usize,
        #[arg(long = "alphabet-size", visible_alias = "q")]
        q: Option<u32>,
        #[arg(long, value_enum, default_value_t = Strategy::Auto)]
        strategy: Strategy,
    },
    /// Smallest order of a k-universal d-array.
    ArraySearch {
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        alphabet: AlphabetArg,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        /// Exhaustive mode: largest number of arrays enumerated per order.
        #[arg(long, default_value_t = 1 << 16)]
        max_candidates: u64,
        /// Randomized mode: arrays tried per order.
        #[arg(long, default_value_t = 200)]
        attempts: u64,
        /// Randomized mode: largest order tried.
        #[arg(long, default_value_t = 64)]
        max_order: usize,
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
    },
    /// Probability that a uniform order-n d-array is k-universal.
    McArray {
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        alphabet: AlphabetArg,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: u64,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Second-moment quantities at the critical order.
    BoundsReport {
        #[arg(long)]
        d: u32,
        #[command(flatten)]
        alphabet: AlphabetArg,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Report logarithms in base 2 instead of e.
        #[arg(long)]
        log2: bool,
    },
    /// Whether a (d-)permutation contains a d-pattern (`;`-separated).
    PermCheck {
        #[command(flatten)]
        input: PermInput,
        #[arg(long)]
        pattern: String,
    },
    /// Whether a (d-)permutation contains every d-pattern of order k.
    PermUniversal {
        #[command(flatten)]
        input: PermInput,
        #[arg(long)]
        k: usize,
    },
    /// Longest monotone subsequence of a (d-)permutation or a random one.
    PermLis {
        #[command(flatten)]
        input: PermInput,
        /// Sample a uniform permutation of this order instead.
        #[arg(long, conflicts_with_all = ["perm", "file"])]
        random_order: Option<usize>,
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
    },
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI with captured stderr.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut stderr = Vec::new();
    let (code, stdout) = run_with(args, &mut stderr);
    Outcome {
        code,
        stdout,
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
    }
}

/// Runs the CLI, streaming diagnostics to `stderr`; returns the exit code
/// and what belongs on stdout.
pub fn run_with<I, T>(args: I, stderr: &mut (dyn Write + Send)) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (0, rendered),
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    (2, String::new())
                }
            };
        }
    };
    let global = &cli.global;
    let result = match global.threads {
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| execute(&cli.command, global.format, stderr)),
            Err(e) => Err(Failure::Usage(format!(
                "cannot start {threads} threads: {e}"
            ))),
        },
        None => execute(&cli.command, global.format, stderr),
    };
    let text = match result {
        Ok(text) => text,
        Err(Failure::Usage(message)) => {
            let _ = writeln!(stderr, "error: {message}");
            return (2, String::new());
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            return (1, String::new());
        }
    };
    match &global.output {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => (0, String::new()),
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                (1, String::new())
            }
        },
        None => (0, text),
    }
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

/// Rendered output of a command: either a single JSON document or a table
/// of experiment records.
enum Rendered {
    Doc(Json),
    Records {
        doc: Json,
        header: &'static str,
        rows: Vec<String>,
        lines: Vec<Json>,
    },
}

fn render(rendered: Rendered, format: Format) -> std::result::Result<String, Failure> {
    match (rendered, format) {
        (Rendered::Doc(doc) | Rendered::Records { doc, .. }, Format::Json) => {
            Ok(format!("{}\n", doc.to_json_string()))
        }
        (Rendered::Doc(doc) | Rendered::Records { doc, .. }, Format::Text) => Ok(doc.to_text()),
        (Rendered::Records { header, rows, .. }, Format::Csv) => {
            let mut out = format!("{header}\n");
            for row in rows {
                out.push_str(&row);
                out.push('\n');
            }
            Ok(out)
        }
        (Rendered::Records { lines, .. }, Format::Jsonl) => Ok(lines
            .iter()
            .map(|l| format!("{}\n", l.to_json_string()))
            .collect()),
        (Rendered::Doc(_), f) => Err(Failure::Usage(
            format!("--format {f:?} applies only to experiment records; use json or text")
                .to_lowercase(),
        )),
    }
}

fn alphabet(arg: &AlphabetArg) -> Result<Alphabet> {
    Alphabet::new(arg.q)
}

fn parse_word(alphabet: Alphabet, text: &str) -> Result<Word> {
    Word::parse(alphabet, text)
}

fn load_array(source: &str, q: Option<u32>) -> Result<DArray> {
    let text = if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        std::fs::read_to_string(source)
            .map_err(|e| Error::Parse(format!("cannot read {source}: {e}")))?
    };
    DArray::parse(&text, q)
}

fn load_perm(input: &PermInput) -> std::result::Result<DPermutation, Failure> {
    match (&input.perm, &input.file) {
        (Some(text), None) => Ok(permutations::permutation_to_dpermutation(
            &Permutation::parse(text)?,
        )),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
            Ok(DPermutation::from_json(&text)?)
        }
        _ => Err(Failure::Usage(
            "give exactly one of --perm or --file".into(),
        )),
    }
}

fn records_output(doc: Json, records: &[random::ExperimentRecord]) -> Rendered {
    Rendered::Records {
        doc,
        header: random::ExperimentRecord::CSV_HEADER,
        rows: records.iter().map(|r| r.csv_row()).collect(),
        lines: records.iter().map(|r| r.to_json()).collect(),
    }
}

fn execute(
    command: &Command,
    format: Format,
    stderr: &mut (dyn Write + Send),
) -> std::result::Result<String, Failure> {
    let rendered = match command {
        Command::WordCheck {
            alphabet: a,
            k,
            word,
        } => {
            let w = parse_word(alphabet(a)?, word)?;
            let universal = words::is_k_universal(&w, *k)?;
            Rendered::Doc(
                Json::object()
                    .field("universal", universal)
                    .field("nu", words::universality_index(&w))
                    .build(),
            )
        }
        Command::WordDecompose { alphabet: a, word } => {
            let w = parse_word(alphabet(a)?, word)?;
            let dec = words::decompose(&w);
            Rendered::Doc(
                Json::object()
                    .field(
                        "blocks",
                        dec.blocks.iter().map(Word::to_string).collect::<Vec<_>>(),
                    )
                    .field("tail", dec.tail.to_string())
                    .field("nu", dec.index())
                    .build(),
            )
        }
        Command::WordWitness {
            alphabet: a,
            k,
            word,
        } => {
            let w = parse_word(alphabet(a)?, word)?;
            let witness = words::non_contained_witness(&w, *k)?;
            Rendered::Doc(Json::object().field("witness", witness.to_string()).build())
        }
        Command::WordGen { alphabet: a, k } => {
            if *k == 0 {
                return Err(Error::ZeroK.into());
            }
            let w = words::minimal_universal_word(alphabet(a)?, *k);
            Rendered::Doc(
                Json::object()
                    .field("word", w.to_string())
                    .field("length", w.len())
                    .build(),
            )
        }
        Command::WordCount {
            alphabet: a,
            word,
            pattern,
        } => {
            let a = alphabet(a)?;
            let count =
                words::count_subword_occurrences(&parse_word(a, word)?, &parse_word(a, pattern)?)?;
            Rendered::Doc(Json::object().field("count", count.to_string()).build())
        }
        Command::WordRepeat {
            alphabet: a,
            k,
            word,
        } => {
            let w = parse_word(alphabet(a)?, word)?;
            let (u, count) = words::find_repeated_subword(&w, *k)?;
            Rendered::Doc(
                Json::object()
                    .field("subword", u.to_string())
                    .field("count", count.to_string())
                    .build(),
            )
        }
        Command::McWords {
            alphabet: a,
            k,
            n,
            trials,
            seed,
        } => {
            let scan = random::threshold_scan(alphabet(a)?, *k, n, *trials, seed.seed)?;
            let (crossing, status) = match scan.crossing {
                Crossing::At(x) => (Json::Float(x), "bracketed"),
                Crossing::NotBracketed => (Json::Null, "not bracketed"),
            };
            let doc = Json::object()
                .field("generator", GENERATOR)
                .field(
                    "records",
                    scan.records.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
                )
                .field("crossing", crossing)
                .field("crossing_status", status)
                .build();
            records_output(doc, &scan.records)
        }
        Command::McCoupon {
            alphabet: a,
            trials,
            seed,
        } => {
            let a = alphabet(a)?;
            let stats = random::coupon_time_stats(a, *trials, seed.seed)?;
            let mut doc = stats.to_json();
            if let Json::Object(fields) = &mut doc {
                fields.push(("c_q".into(), random::threshold_constant(a.size())?.into()));
                fields.push(("generator".into(), GENERATOR.into()));
            }
            Rendered::Doc(doc)
        }
        Command::McDeviation {
            alphabet: a,
            k,
            trials,
            t_values,
            seed,
        } => {
            let a = alphabet(a)?;
            let rows = random::deviation_scan(a, *k, *trials, t_values, seed.seed)?;
            let doc = Json::object()
                .field("q", a.size())
                .field("k", *k)
                .field("trials", *trials)
                .field("c_q", random::threshold_constant(a.size())?)
                .field("master_seed", seed.seed)
                .field("generator", GENERATOR)
                .field(
                    "rows",
                    rows.iter()
                        .map(|r| {
                            Json::object()
                                .field("t", r.t)
                                .field("tail_frequency", r.tail_frequency)
                                .build()
                        })
                        .collect::<Vec<_>>(),
                )
                .build();
            Rendered::Records {
                doc,
                header: "t,tail_frequency",
                rows: rows
                    .iter()
                    .map(|r| format!("{},{}", fmt_f64(r.t), fmt_f64(r.tail_frequency)))
                    .collect(),
                lines: rows
                    .iter()
                    .map(|r| {
                        Json::object()
                            .field("t", r.t)
                            .field("tail_frequency", r.tail_frequency)
                            .build()
                    })
                    .collect(),
            }
        }
        Command::ArrayCheck { array, pattern, q } => {
            let a = load_array(array, *q)?;
            let b = load_array(pattern, *q)?;
            let embedding = darray::find_embedding_array(&a, &b);
            let selection: Json = match &embedding {
                Some(sel) => sel.sets().to_vec().into(),
                None => Json::Null,
            };
            Rendered::Doc(
                Json::object()
                    .field("contains", embedding.is_some())
                    .field("selection", selection)
                    .build(),
            )
        }
        Command::ArrayUniversal {
            array,
            k,
            q,
            strategy,
        } => {
            let a = load_array(array, *q)?;
            let universal = match strategy {
                Strategy::Auto | Strategy::Selections => darray::is_k_universal_array(&a, *k)?,
                Strategy::Targets => darray::is_k_universal_array_by_targets(&a, *k)?,
            };
            Rendered::Doc(Json::object().field("universal", universal).build())
        }
        Command::ArraySearch {
            d,
            alphabet: a,
            k,
            mode,
            max_candidates,
            attempts,
            max_order,
            seed,
        } => {
            let a = alphabet(a)?;
            let randomized = |seed: Option<u64>| {
                seed.map(|master_seed| SearchMode::Randomized {
                    attempts_per_order: *attempts,
                    max_order: *max_order,
                    master_seed,
                })
                .ok_or_else(|| {
                    Failure::Usage(format!("randomized search needs --seed or ${SEED_ENV}"))
                })
            };
            let search_mode = match mode {
                Mode::Exhaustive => SearchMode::Exhaustive {
                    max_candidates: *max_candidates,
                },
                Mode::Random => randomized(*seed)?,
                Mode::Auto => match SearchMode::default_for(*d, a.size(), *k, seed.unwrap_or(0)) {
                    SearchMode::Exhaustive { .. } => SearchMode::Exhaustive {
                        max_candidates: *max_candidates,
                    },
                    SearchMode::Randomized { .. } if *d == 1 => {
                        randomized(Some(seed.unwrap_or(0)))?
                    }
                    SearchMode::Randomized { .. } => randomized(*seed)?,
                },
            };
            let mut last = Instant::now();
            let mut report = |p: darray::SearchProgress| {
                if last.elapsed() >= PROGRESS_INTERVAL {
                    let _ = writeln!(
                        stderr,
                        "order {}: {}/{} candidates",
                        p.order, p.examined, p.total
                    );
                    last = Instant::now();
                }
            };
            let result = darray::minimal_universal_order(*d, a, *k, search_mode, &mut report)?;
            Rendered::Doc(result.to_json())
        }
        Command::McArray {
            d,
            alphabet: a,
            k,
            n,
            trials,
            seed,
        } => {
            let record = darray::estimate_array_universal_probability(
                *d,
                alphabet(a)?,
                *k,
                *n,
                *trials,
                seed.seed,
            )?;
            let doc = Json::object()
                .field("generator", GENERATOR)
                .field("d", *d)
                .field("record", record.to_json())
                .build();
            records_output(doc, std::slice::from_ref(&record))
        }
        Command::BoundsReport {
            d,
            alphabet: a,
            k,
            epsilon,
            log2,
        } => {
            let report = second_moment_report(*d, a.q, *k, *epsilon)?;
            Rendered::Doc(report.to_json(*log2))
        }
        Command::PermCheck { input, pattern } => {
            let m = load_perm(input)?;
            let pattern = DPattern::parse(pattern)?;
            let contains = permutations::dperm_contains_pattern(&m, &pattern)?;
            Rendered::Doc(Json::object().field("contains", contains).build())
        }
        Command::PermUniversal { input, k } => {
            let m = load_perm(input)?;
            let universal = permutations::is_k_pattern_universal(&m, *k)?;
            Rendered::Doc(Json::object().field("universal", universal).build())
        }
        Command::PermLis {
            input,
            random_order,
            seed,
        } => {
            let (m, seed_json) = match random_order {
                Some(n) => {
                    let seed = seed.ok_or_else(|| {
                        Failure::Usage(format!("--random-order needs --seed or ${SEED_ENV}"))
                    })?;
                    let mut rng = RandomSource::new(seed, 0).rng();
                    let sigma = permutations::sample_random_permutation(*n, &mut rng);
                    (
                        permutations::permutation_to_dpermutation(&sigma),
                        Json::from(seed),
                    )
                }
                None => (load_perm(input)?, Json::Null),
            };
            let mut doc = Json::object()
                .field("d", m.d())
                .field("n", m.order())
                .field("length", permutations::longest_monotone_subsequence(&m))
                .build();
            if !matches!(seed_json, Json::Null) {
                if let Json::Object(fields) = &mut doc {
                    fields.push(("master_seed".into(), seed_json));
                    fields.push(("generator".into(), GENERATOR.into()));
                }
            }
            Rendered::Doc(doc)
        }
    };
    render(rendered, format)
}
