mod config;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use onematch_core::combiner::{accuracy, train_logistic, uniform_sample};
use onematch_core::eval::{count_outcomes, default_grid, pr_curve, score_grid, self_duplicate_scan, SampleSpec};
use onematch_core::model::write_dataset;
use onematch_core::pipeline::{featurize, CandidateFeatures};
use onematch_core::synth::{generate, SynthConfig};
use onematch_core::{
    blocking, matchers, Algorithm, DataFormat, Dataset, Direction, Edge, Error, FeatureScorer, FpCounting,
    LabeledExample, LogisticModel, Optimizer, Result, ScoredGraph, Side, Tokenizer,
};

use config::{Grid, PipelineConfig};
use io::{fmt_f64, write_atomic, IdSpace, ScoreRow};

#[derive(Debug, Parser)]
#[command(name = "onematch", version, about = "One-to-one entity resolution pipeline")]
struct Cli {
    /// Seed for every random choice; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON config file. For `synth` this is the generator config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a dataset and rewrite it in canonical form.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "left")]
        side: SideArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write candidate pairs sharing a title token.
    Block {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        max_pairs_per_token: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute feature vectors (and, given a model, scores) for candidates.
    Score {
        #[command(flatten)]
        data: DataArgs,
        /// Candidate pairs from `block`; blocks afresh when omitted.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        max_pairs_per_token: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the logistic combiner on labeled rows of a score file.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, value_enum)]
        optimizer: Option<OptimizerArg>,
        /// Train on a seeded uniform sample of at most this many examples.
        #[arg(long)]
        max_examples: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resolve scored pairs into a matching.
    Match {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        alg: AlgorithmArgs,
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Precision and recall of a matching against a truth set, as JSON.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        matching: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, value_enum)]
        fp_counting: Option<FpArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Precision/recall at every threshold of a grid.
    PrCurve {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        alg: AlgorithmArgs,
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        /// "default" (0, 0.01, …, 1), "scores" (every distinct score) or a
        /// comma-separated list.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, value_enum)]
        fp_counting: Option<FpArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank likely duplicates within one dataset.
    DedupeScan {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        max_pairs_per_token: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic corpus with complete ground truth.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    left: Option<PathBuf>,
    #[arg(long)]
    right: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AlgorithmArgs {
    #[arg(long, value_enum)]
    algorithm: Option<AlgorithmArg>,
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    ManyMany,
    FirstChoice,
    #[value(alias = "mutual-first-choice")]
    Mutual,
    Greedy,
    MaxWeight,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    L2r,
    R2l,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OptimizerArg {
    GradientAscent,
    Newton,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FpArg {
    Literal,
    Deduplicated,
}

impl From<FpArg> for FpCounting {
    fn from(a: FpArg) -> Self {
        match a {
            FpArg::Literal => FpCounting::Literal,
            FpArg::Deduplicated => FpCounting::Deduplicated,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error: {}: {}", e.code(), msg);
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    if let Command::Synth { out_dir } = &cli.command {
        return synth(cli.config.as_deref(), cli.seed, out_dir);
    }
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.training.seed = seed;
    }

    match cli.command {
        Command::Ingest { input, side, out } => {
            let side = match side {
                SideArg::Left => Side::Left,
                SideArg::Right => Side::Right,
            };
            let d = io::read_dataset(&input, side)?;
            info!("{} entities", d.len());
            write_atomic(&out, |w| write_dataset(&d, DataFormat::from_path(&out), w))
        }
        Command::Block { data, max_pairs_per_token, out } => {
            let (left, right) = datasets(&data, &cfg)?;
            let tokenizer = tokenizer(&data, &cfg)?;
            let opts = blocking_options(max_pairs_per_token, &cfg);
            let li = blocking::TokenIndex::build(&left, &tokenizer);
            let ri = blocking::TokenIndex::build(&right, &tokenizer);
            let set = blocking::candidate_pairs(&li, &ri, &opts);
            info!("{} candidate pairs, {} tokens skipped", set.len(), set.skipped_tokens.len());
            write_atomic(&out, |w| {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(["id1", "id2"])?;
                for &(l, r) in &set.pairs {
                    out.write_record([left.id(l), right.id(r)])?;
                }
                out.flush()?;
                Ok(())
            })
        }
        Command::Score { data, pairs, model, max_pairs_per_token, out } => {
            let (left, right) = datasets(&data, &cfg)?;
            let scorer = FeatureScorer::new(tokenizer(&data, &cfg)?, cfg.features);
            let model = model.as_deref().map(load_model).transpose()?;
            let candidates = match pairs {
                Some(p) => featurize_listed(&p, &left, &right, &scorer)?,
                None => featurize(&left, &right, &scorer, &blocking_options(max_pairs_per_token, &cfg)),
            };
            let rows: Vec<ScoreRow> = candidates
                .iter()
                .map(|c| ScoreRow {
                    id1: left.id(c.left).to_string(),
                    id2: right.id(c.right).to_string(),
                    features: Some(c.features),
                    score: model.as_ref().map(|m| m.predict(&c.features)),
                })
                .collect();
            info!("{} scored pairs", rows.len());
            write_atomic(&out, |w| io::write_scores(w, &rows))
        }
        Command::Train { data, scores, truth, optimizer, max_examples, out } => {
            let (left, right) = datasets(&data, &cfg)?;
            let truth = io::read_truth(&required(truth, &cfg.truth, "--truth")?, &left, &right)?;
            let mut ids = IdSpace::from_datasets(&left, &right);
            let mut examples = Vec::new();
            for row in io::read_scores(&scores)? {
                let Some(features) = row.features else { continue };
                let (l, r) = (ids.left_handle(&row.id1)?, ids.right_handle(&row.id2)?);
                if truth.is_positive(l, r) {
                    examples.push(LabeledExample::new(features, true));
                } else if truth.is_negative(l, r) {
                    examples.push(LabeledExample::new(features, false));
                }
            }
            if let Some(n) = max_examples {
                examples = uniform_sample(&examples, n, cfg.training.seed);
            }
            if let Some(o) = optimizer {
                cfg.training.optimizer = match o {
                    OptimizerArg::GradientAscent => Optimizer::GradientAscent,
                    OptimizerArg::Newton => Optimizer::Newton,
                };
            }
            info!("training on {} labeled examples", examples.len());
            let model = train_logistic(&examples, &cfg.training)?;
            info!(
                "iterations {}, converged {}, training accuracy {:.4}",
                model.summary.iterations,
                model.summary.converged,
                accuracy(&model, &examples)
            );
            write_atomic(&out, |w| {
                serde_json::to_writer_pretty(&mut *w, &model)?;
                writeln!(w)?;
                Ok(())
            })
        }
        Command::Match { data, alg, scores, threshold, out } => {
            let algorithm = algorithm(&alg, &cfg)?;
            let theta = threshold.unwrap_or(cfg.matcher.threshold);
            check_threshold(theta)?;
            let (graph, ids) = load_graph(&scores, &data, &cfg)?;
            let m = matchers::run(algorithm, &graph, theta, &cfg.matcher.limits())?;
            info!("{algorithm} at {theta}: {} pairs", m.len());
            write_atomic(&out, |w| io::write_matching(w, &m, &ids))
        }
        Command::Eval { data, matching, truth, fp_counting, out } => {
            let (left, right) = datasets(&data, &cfg)?;
            let truth = io::read_truth(&required(truth, &cfg.truth, "--truth")?, &left, &right)?;
            let mut ids = IdSpace::from_datasets(&left, &right);
            let m = io::read_matching(&matching, &mut ids)?;
            let counts = count_outcomes(&m, &truth, fp_counting.map_or(cfg.fp_counting, Into::into))?;
            let report = serde_json::json!({
                "tp": counts.tp,
                "fn": counts.fn_,
                "fp": counts.fp,
                "fp_truth_negative": counts.fp_truth_negative,
                "fp_left_inferred": counts.fp_left_inferred,
                "fp_right_inferred": counts.fp_right_inferred,
                "precision": counts.precision(),
                "recall": counts.recall(),
                "f1": counts.f1(),
                "size": m.len(),
            });
            let text = serde_json::to_string_pretty(&report)?;
            match out {
                Some(path) => write_atomic(&path, |w| Ok(writeln!(w, "{text}")?)),
                None => {
                    println!("{text}");
                    Ok(())
                }
            }
        }
        Command::PrCurve { data, alg, scores, truth, grid, fp_counting, out } => {
            let algorithm = algorithm(&alg, &cfg)?;
            let (left, right) = datasets(&data, &cfg)?;
            let truth = io::read_truth(&required(truth, &cfg.truth, "--truth")?, &left, &right)?;
            let (graph, _) = load_graph(&scores, &data, &cfg)?;
            let grid = match grid {
                Some(g) => parse_grid(&g)?,
                None => cfg.matcher.grid.clone().unwrap_or(Grid::Named("default".into())),
            };
            let thresholds = match grid {
                Grid::Named(n) if n == "default" => default_grid(),
                Grid::Named(n) if n == "scores" => score_grid(&graph),
                Grid::Named(n) => return Err(Error::Config(format!("unknown grid {n:?}"))),
                Grid::Values(v) => v,
            };
            let counting = fp_counting.map_or(cfg.fp_counting, Into::into);
            let points = pr_curve(&graph, algorithm, &truth, &thresholds, &cfg.matcher.limits(), counting)?;
            write_atomic(&out, |w| {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(["theta", "tp", "fp", "fn", "precision", "recall", "weight", "size"])?;
                for p in &points {
                    out.write_record([
                        fmt_f64(p.theta),
                        p.counts.tp.to_string(),
                        p.counts.fp.to_string(),
                        p.counts.fn_.to_string(),
                        fmt_f64(p.precision),
                        fmt_f64(p.recall),
                        fmt_f64(p.weight),
                        p.size.to_string(),
                    ])?;
                }
                out.flush()?;
                Ok(())
            })
        }
        Command::DedupeScan { input, model, stopwords, stride, limit, max_pairs_per_token, out } => {
            let d = io::read_dataset(&input, Side::Left)?;
            let data = DataArgs { left: None, right: None, stopwords };
            let scorer = FeatureScorer::new(tokenizer(&data, &cfg)?, cfg.features);
            let model = load_model(&model)?;
            let scan = self_duplicate_scan(
                &d,
                &scorer,
                &model,
                &blocking_options(max_pairs_per_token, &cfg),
                &SampleSpec { stride, limit },
            );
            write_atomic(&out, |w| {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(["rank", "id1", "id2", "score"])?;
                for e in &scan {
                    out.write_record([e.rank.to_string(), d.id(e.first).into(), d.id(e.second).into(), fmt_f64(e.score)])?;
                }
                out.flush()?;
                Ok(())
            })
        }
        Command::Synth { .. } => unreachable!("handled above"),
    }
}

fn synth(config: Option<&Path>, seed: Option<u64>, out_dir: &Path) -> Result<()> {
    let mut cfg: SynthConfig = match config {
        Some(p) => serde_json::from_reader(io::open(p)?).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let corpus = generate(&cfg)?;
    std::fs::create_dir_all(out_dir)?;
    write_atomic(&out_dir.join("left.json"), |w| write_dataset(&corpus.left, DataFormat::Json, w))?;
    write_atomic(&out_dir.join("right.json"), |w| write_dataset(&corpus.right, DataFormat::Json, w))?;
    write_atomic(&out_dir.join("truth.csv"), |w| {
        onematch_core::model::write_truth_set(&corpus.truth, &corpus.left, &corpus.right, w)
    })?;
    write_atomic(&out_dir.join("config.echo.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &cfg)?;
        writeln!(w)?;
        Ok(())
    })?;
    info!("{} left, {} right, {} positives", corpus.left.len(), corpus.right.len(), corpus.truth.positives().len());
    Ok(())
}

fn required(flag: Option<PathBuf>, fallback: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| fallback.clone()).ok_or_else(|| Error::Config(format!("{name} is required")))
}

fn datasets(data: &DataArgs, cfg: &PipelineConfig) -> Result<(Dataset, Dataset)> {
    let left = required(data.left.clone(), &cfg.left, "--left")?;
    let right = required(data.right.clone(), &cfg.right, "--right")?;
    Ok((io::read_dataset(&left, Side::Left)?, io::read_dataset(&right, Side::Right)?))
}

fn tokenizer(data: &DataArgs, cfg: &PipelineConfig) -> Result<Tokenizer> {
    match data.stopwords.as_ref().or(cfg.stopwords.as_ref()) {
        Some(p) => Tokenizer::from_reader(io::open(p)?),
        None => Ok(Tokenizer::default()),
    }
}

fn blocking_options(max_pairs_per_token: Option<usize>, cfg: &PipelineConfig) -> blocking::BlockingOptions {
    blocking::BlockingOptions { max_pairs_per_token: max_pairs_per_token.or(cfg.blocking.max_pairs_per_token) }
}

fn load_model(path: &Path) -> Result<LogisticModel> {
    serde_json::from_reader(io::open(path)?).map_err(Error::from)
}

fn algorithm(args: &AlgorithmArgs, cfg: &PipelineConfig) -> Result<Algorithm> {
    let direction = match args.direction {
        Some(DirectionArg::L2r) => Direction::LeftToRight,
        Some(DirectionArg::R2l) => Direction::RightToLeft,
        None => cfg.matcher.direction.parse().map_err(Error::Config)?,
    };
    Ok(match args.algorithm {
        Some(AlgorithmArg::ManyMany) => Algorithm::ManyMany,
        Some(AlgorithmArg::FirstChoice) => Algorithm::FirstChoice(direction),
        Some(AlgorithmArg::Mutual) => Algorithm::MutualFirstChoice,
        Some(AlgorithmArg::Greedy) => Algorithm::Greedy,
        Some(AlgorithmArg::MaxWeight) => Algorithm::MaxWeight,
        None => Algorithm::parse(&cfg.matcher.algorithm, direction).map_err(Error::Config)?,
    })
}

fn check_threshold(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::Config(format!("threshold {theta} outside [0, 1]")))
    }
}

fn parse_grid(text: &str) -> Result<Grid> {
    if text == "default" || text == "scores" {
        return Ok(Grid::Named(text.into()));
    }
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad grid value {t:?}"))))
        .collect::<Result<Vec<_>>>()
        .map(Grid::Values)
}

/// Builds the scored graph from a score file. With datasets, handles come
/// from them; otherwise from order of first appearance.
fn load_graph(scores: &Path, data: &DataArgs, cfg: &PipelineConfig) -> Result<(ScoredGraph, IdSpace)> {
    let mut ids = match (data.left.as_ref().or(cfg.left.as_ref()), data.right.as_ref().or(cfg.right.as_ref())) {
        (Some(_), Some(_)) => {
            let (l, r) = datasets(data, cfg)?;
            IdSpace::from_datasets(&l, &r)
        }
        _ => IdSpace::open(),
    };
    let mut edges = Vec::new();
    for (i, row) in io::read_scores(scores)?.into_iter().enumerate() {
        let score = row.score.ok_or_else(|| Error::Field { row: i + 1, field: "score".into() })?;
        edges.push(Edge { left: ids.left_handle(&row.id1)?, right: ids.right_handle(&row.id2)?, score });
    }
    let graph = ScoredGraph::new(ids.left.len(), ids.right.len(), edges)?;
    Ok((graph, ids))
}

/// Feature vectors for an explicit pair list (`id1,id2`).
fn featurize_listed(path: &Path, left: &Dataset, right: &Dataset, scorer: &FeatureScorer) -> Result<Vec<CandidateFeatures>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(io::open(path)?);
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record?;
        pairs.push((left.resolve(record.get(0).unwrap_or("").trim())?, right.resolve(record.get(1).unwrap_or("").trim())?));
    }
    pairs.sort_unstable();
    pairs.dedup();
    let lp = scorer.prepare_all(left.entities());
    let rp = scorer.prepare_all(right.entities());
    Ok(pairs
        .into_iter()
        .map(|(l, r)| CandidateFeatures { left: l, right: r, features: scorer.score_prepared(&lp[l], &rp[r]) })
        .collect())
}
