//! Command-line pipelines: infer background knowledge, evaluate scorers,
//! generate synthetic corpora, average and analyze models, and produce
//! extractive summaries.
//!
//! Every command writes its primary outputs plus a `.manifest.json` sidecar
//! (command line, resolved config, seed, input hashes, wall time). Given
//! identical inputs, flags, and seed, primary outputs are byte-identical
//! across reruns.
//!
//! Exit codes: 0 success, 2 usage errors, 3 data errors, 4 violated
//! algorithm preconditions.

mod manifest;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sumprior::analysis::{self, Direction};
use sumprior::closed_form::{ClosedFormConfig, GammaSpec, Prior};
use sumprior::corpus::{self, TokenizerConfig};
use sumprior::divergence::SmoothingConfig;
use sumprior::eval::{self, Algorithm, CvConfigs};
use sumprior::scoring::{self, BaselineKind, KnowledgeModel, Scorer, ScoringConfig};
use sumprior::summarize::{self, GeneticConfig};
use sumprior::synth::{self, SynthConfig};
use sumprior::train::{RegScale, TrainConfig};

use manifest::ManifestBuilder;

#[derive(Parser)]
#[command(
    name = "sumprior",
    version,
    about = "Infer background-knowledge priors from summarization data and score summaries with them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a knowledge model from a dataset
    Infer(InferArgs),
    /// Evaluate a model, a baseline, or a cross-validated algorithm
    Eval(EvalArgs),
    /// Generate a planted-truth synthetic dataset
    Synth(SynthArgs),
    /// Average knowledge models, or trace KL against a reference
    Average(AverageArgs),
    /// Pairwise divergence matrix and MDS embedding
    Geometry(GeometryArgs),
    /// Most known or unknown units of a model
    Topk(TopkArgs),
    /// Extractive summaries maximizing the summary score
    Summarize(SummarizeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgoArg {
    #[value(name = "ms-u")]
    MsU,
    #[value(name = "ms-d")]
    MsD,
    Pm,
    Hreg,
    Hpl,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::MsU => Algorithm::MsU,
            AlgoArg::MsD => Algorithm::MsD,
            AlgoArg::Pm => Algorithm::Pm,
            AlgoArg::Hreg => Algorithm::HReg,
            AlgoArg::Hpl => Algorithm::HPl,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineArg {
    Kl,
    Js,
    Uniform,
    Idf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Greedy,
    Genetic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    Known,
    Unknown,
}

fn parse_gamma(s: &str) -> Result<GammaSpec, String> {
    if s == "auto" {
        return Ok(GammaSpec::Auto);
    }
    s.parse::<f64>()
        .map(GammaSpec::Fixed)
        .map_err(|_| format!("expected a number or `auto`, got `{s}`"))
}

fn parse_scale(s: &str) -> Result<RegScale, String> {
    if s == "learned" {
        return Ok(RegScale::Learned);
    }
    s.parse::<f64>()
        .map(RegScale::Fixed)
        .map_err(|_| format!("expected a number or `learned`, got `{s}`"))
}

#[derive(Args, Debug)]
struct ScoringArgs {
    /// Relevance weight of the summary score
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Informativeness weight of the summary score
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Additive smoothing mass per unit inside KL
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
}

impl ScoringArgs {
    fn to_config(&self) -> Result<ScoringConfig> {
        let cfg = ScoringConfig {
            alpha: self.alpha,
            beta: self.beta,
            smoothing: SmoothingConfig::new(self.eps).map_err(anyhow::Error::from)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct TokenizerArgs {
    /// Remove the built-in English stopword list
    #[arg(long)]
    stopwords: bool,
    /// Minimum token count for vocabulary membership
    #[arg(long, default_value_t = 1)]
    min_count: usize,
}

impl TokenizerArgs {
    fn to_config(&self) -> TokenizerConfig {
        TokenizerConfig {
            stopwords: if self.stopwords {
                corpus::standard_stopwords()
            } else {
                Default::default()
            },
            min_count: self.min_count,
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    /// Negative summaries per positive (pm)
    #[arg(long, default_value_t = 4)]
    negatives: usize,
    /// Word budget of sampled negative summaries (pm)
    #[arg(long, default_value_t = 100)]
    negative_budget: usize,
    /// Regression scale: a number or `learned` (hreg)
    #[arg(long, default_value = "learned", value_parser = parse_scale)]
    scale_a: RegScale,
}

impl TrainArgs {
    fn to_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.lr,
            batch_size: self.batch,
            epochs: self.epochs,
            seed: self.seed,
            negatives_per_positive: self.negatives,
            negative_budget: self.negative_budget,
            reg_scale_a: self.scale_a,
        }
    }
}

#[derive(Args, Debug)]
struct InferArgs {
    /// Inference algorithm
    #[arg(long)]
    algo: AlgoArg,
    #[arg(long)]
    data: PathBuf,
    /// Output model JSON path
    #[arg(long)]
    out: PathBuf,
    /// Regularization strength for ms-u / ms-d: a number or `auto`
    #[arg(long, default_value = "auto", value_parser = parse_gamma)]
    gamma: GammaSpec,
    /// Write an `<out>.trace.csv` with per-epoch training loss
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    train: TrainArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    /// Output report JSON path
    #[arg(long)]
    out: PathBuf,
    /// Score with a fitted model file
    #[arg(long, group = "scorer")]
    model: Option<PathBuf>,
    /// Cross-validate an algorithm
    #[arg(long, group = "scorer")]
    algo: Option<AlgoArg>,
    /// Score with a training-free baseline
    #[arg(long, group = "scorer", value_enum)]
    baseline: Option<BaselineArg>,
    /// Folds for --algo cross-validation
    #[arg(long, default_value_t = 4)]
    cv: usize,
    /// Background corpus (one document per line) for --baseline idf
    #[arg(long)]
    idf_corpus: Option<PathBuf>,
    /// Also write a per-topic CSV here
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value = "auto", value_parser = parse_gamma)]
    gamma: GammaSpec,
    #[command(flatten)]
    train: TrainArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 30)]
    vocab: usize,
    #[arg(long, default_value_t = 200)]
    topics: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output dataset JSONL path
    #[arg(long)]
    out: PathBuf,
    /// Output path of the planted knowledge model (default `<out>.k_star.json`)
    #[arg(long)]
    k_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    doc_concentration: f64,
    #[arg(long, default_value_t = 1.0)]
    knowledge_concentration: f64,
    #[arg(long, default_value_t = 0.0)]
    summary_noise: f64,
    #[arg(long, default_value_t = 10)]
    systems: usize,
    #[arg(long, default_value_t = 0.0)]
    judgment_noise_sd: f64,
    #[arg(long, default_value_t = 1)]
    annotators: usize,
    #[arg(long, default_value_t = 0.0)]
    annotator_bias_sd: f64,
    #[arg(long, default_value_t = 1)]
    references: usize,
    #[arg(long, default_value_t = 2)]
    documents_per_topic: usize,
    #[arg(long, default_value_t = 400)]
    doc_tokens: usize,
    #[arg(long, default_value_t = 100)]
    summary_tokens: usize,
    #[arg(long, default_value_t = 0.4)]
    divergence_min: f64,
    #[arg(long, default_value_t = 0.5)]
    divergence_step: f64,
}

#[derive(Args, Debug)]
struct AverageArgs {
    /// Model JSON files to average
    #[arg(long, num_args = 1.., required = true)]
    models: Vec<PathBuf>,
    /// Output path: model JSON, or curve CSV with --reference
    #[arg(long)]
    out: PathBuf,
    /// Reference model: switch to averaging-curve mode
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Random subsets per subset size (curve mode)
    #[arg(long, default_value_t = 20)]
    subsets: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
}

#[derive(Args, Debug)]
struct GeometryArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// MDS embedding dimensions
    #[arg(long, default_value_t = 2)]
    mds: usize,
    /// Output coordinates CSV path
    #[arg(long)]
    out: PathBuf,
    /// Also write the raw divergence matrix CSV here
    #[arg(long)]
    matrix_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
}

#[derive(Args, Debug)]
struct TopkArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, value_enum, default_value_t = DirectionArg::Known)]
    direction: DirectionArg,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SummarizeArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Summary word budget
    #[arg(long, default_value_t = 100)]
    budget: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Genetic)]
    method: MethodArg,
    #[arg(long, default_value_t = 100)]
    population: usize,
    #[arg(long, default_value_t = 200)]
    generations: usize,
    #[arg(long, default_value_t = 0.2)]
    mutation: f64,
    #[arg(long, default_value_t = 0.8)]
    crossover: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output text path (one summary per topic)
    #[arg(long)]
    out: PathBuf,
    /// Output JSON report path (default `<out>.report.json`)
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[command(flatten)]
    tokenizer: TokenizerArgs,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Infer(args) => cmd_infer(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Average(args) => cmd_average(args),
        Command::Geometry(args) => cmd_geometry(args),
        Command::Topk(args) => cmd_topk(args),
        Command::Summarize(args) => cmd_summarize(args),
    };
    match result {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(classify(&err));
        }
    }
}

/// Exit-code policy: 3 for data problems, 4 for violated algorithm
/// preconditions, 2 for bad flag values.
fn classify(err: &anyhow::Error) -> i32 {
    use sumprior::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::Io(_)) | Some(E::Json(_)) | Some(E::Parse { .. }) | Some(E::DuplicateTopicId(_)) => 3,
        Some(E::InvalidConfig(_)) => 2,
        Some(_) => 4,
        // I/O context errors outside the core library are data errors too.
        None => 3,
    }
}

fn write_text(path: &PathBuf, content: &str) -> Result<()> {
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_infer(args: InferArgs) -> Result<()> {
    let scoring = args.scoring.to_config()?;
    let tokenizer = args.tokenizer.to_config();
    let train_cfg = args.train.to_config();
    let closed_cfg = |prior: Prior| ClosedFormConfig {
        gamma: args.gamma,
        prior,
        smoothing: scoring.smoothing,
    };
    let config_snapshot = serde_json::json!({
        "algorithm": format!("{:?}", args.algo),
        "gamma": args.gamma,
        "train": train_cfg,
        "scoring": scoring,
        "tokenizer": tokenizer,
    });
    let mut manifest = ManifestBuilder::new("infer", config_snapshot, Some(args.train.seed));
    manifest.input(&args.data);

    let dataset = corpus::load_dataset(&args.data)?;
    let vocab = corpus::build_vocabulary(&dataset, &tokenizer)?;
    let model = match args.algo {
        AlgoArg::MsU => {
            sumprior::closed_form::infer_ms_u(&dataset, &vocab, &tokenizer, &closed_cfg(Prior::Uniform))?
        }
        AlgoArg::MsD => {
            sumprior::closed_form::infer_ms_d(&dataset, &vocab, &tokenizer, &closed_cfg(Prior::Document))?
        }
        AlgoArg::Pm => sumprior::train::infer_pm(&dataset, &vocab, &tokenizer, &train_cfg, &scoring)?,
        AlgoArg::Hreg => sumprior::train::infer_hreg(&dataset, &vocab, &tokenizer, &train_cfg, &scoring)?,
        AlgoArg::Hpl => sumprior::train::infer_hpl(&dataset, &vocab, &tokenizer, &train_cfg, &scoring)?,
    };
    model.save(&args.out)?;
    manifest.output(&args.out);
    if args.trace {
        if let Some(trace) = &model.provenance.loss_trace {
            let mut csv = String::from("epoch,loss\n");
            for (epoch, loss) in trace.iter().enumerate() {
                csv.push_str(&format!("{epoch},{loss}\n"));
            }
            let trace_path = args.out.with_file_name(format!(
                "{}.trace.csv",
                args.out.file_name().unwrap_or_default().to_string_lossy()
            ));
            write_text(&trace_path, &csv)?;
            manifest.output(&trace_path);
        }
    }
    manifest.write(&args.out)?;
    println!(
        "wrote {} ({} units, algorithm {})",
        args.out.display(),
        model.vocab.len(),
        model.provenance.algorithm
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let scoring = args.scoring.to_config()?;
    let tokenizer = args.tokenizer.to_config();
    let selected: Vec<bool> = vec![
        args.model.is_some(),
        args.algo.is_some(),
        args.baseline.is_some(),
    ];
    if selected.iter().filter(|&&b| b).count() != 1 {
        anyhow::bail!(sumprior::Error::InvalidConfig(
            "choose exactly one of --model, --algo, --baseline".into()
        ));
    }
    let config_snapshot = serde_json::json!({
        "scoring": scoring,
        "tokenizer": tokenizer,
        "cv": args.cv,
        "gamma": args.gamma,
    });
    let mut manifest = ManifestBuilder::new("eval", config_snapshot, Some(args.train.seed));
    manifest.input(&args.data);
    let dataset = corpus::load_dataset(&args.data)?;

    let report = if let Some(model_path) = &args.model {
        manifest.input(model_path);
        let model = KnowledgeModel::load(model_path)?;
        let vocab = model.vocab.clone();
        eval::evaluate_with_scorer(&dataset, &Scorer::Theta(model), &vocab, &tokenizer, &scoring)?
    } else if let Some(algo) = args.algo {
        let configs = CvConfigs {
            tokenizer: tokenizer.clone(),
            scoring,
            closed_form: ClosedFormConfig {
                gamma: args.gamma,
                prior: Prior::Document,
                smoothing: scoring.smoothing,
            },
            train: args.train.to_config(),
        };
        eval::cross_validate(&dataset, algo.into(), args.cv, &configs, args.train.seed)?
    } else {
        let vocab = corpus::build_vocabulary(&dataset, &tokenizer)?;
        let scorer = match args.baseline.expect("group guarantees one") {
            BaselineArg::Kl => Scorer::Baseline {
                kind: BaselineKind::KlSd,
                idf_model: None,
            },
            BaselineArg::Js => Scorer::Baseline {
                kind: BaselineKind::JsSd,
                idf_model: None,
            },
            BaselineArg::Uniform => Scorer::Baseline {
                kind: BaselineKind::ThetaUniform,
                idf_model: None,
            },
            BaselineArg::Idf => {
                let corpus_path = args.idf_corpus.as_ref().ok_or_else(|| {
                    sumprior::Error::InvalidConfig(
                        "--baseline idf requires --idf-corpus".into(),
                    )
                })?;
                manifest.input(corpus_path);
                let text = std::fs::read_to_string(corpus_path)
                    .map_err(sumprior::Error::from)?;
                let docs: Vec<String> = text.lines().map(|l| l.to_string()).collect();
                let idf = scoring::df_model(&vocab, &docs, &tokenizer)?;
                Scorer::Baseline {
                    kind: BaselineKind::ThetaIdf,
                    idf_model: Some(idf),
                }
            }
        };
        eval::evaluate_with_scorer(&dataset, &scorer, &vocab, &tokenizer, &scoring)?
    };

    report.save(&args.out)?;
    manifest.output(&args.out);
    if let Some(csv_path) = &args.csv {
        write_text(csv_path, &report.per_topic_csv())?;
        manifest.output(csv_path);
    }
    manifest.write(&args.out)?;
    println!(
        "wrote {} (scorer {}, mean tau {:?}, mean rank {:?})",
        args.out.display(),
        report.scorer,
        report.aggregate.mean_tau,
        report.aggregate.mean_reference_rank
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let config = SynthConfig {
        vocab_size: args.vocab,
        n_topics: args.topics,
        seed: args.seed,
        doc_concentration: args.doc_concentration,
        summary_noise: args.summary_noise,
        n_system_summaries_per_topic: args.systems,
        judgment_noise_sd: args.judgment_noise_sd,
        annotator_count: args.annotators,
        annotator_bias_sd: args.annotator_bias_sd,
        knowledge_concentration: args.knowledge_concentration,
        references_per_topic: args.references,
        documents_per_topic: args.documents_per_topic,
        tokens_per_document: args.doc_tokens,
        summary_tokens: args.summary_tokens,
        system_divergence_min: args.divergence_min,
        system_divergence_step: args.divergence_step,
        ..Default::default()
    };
    let mut manifest = ManifestBuilder::new(
        "synth",
        serde_json::to_value(config)?,
        Some(args.seed),
    );
    let out = synth::generate(&config)?;
    corpus::save_dataset(&out.dataset, &args.out)?;
    manifest.output(&args.out);
    let k_out = args.k_out.unwrap_or_else(|| {
        args.out.with_file_name(format!(
            "{}.k_star.json",
            args.out.file_stem().unwrap_or_default().to_string_lossy()
        ))
    });
    out.k_star.save(&k_out)?;
    manifest.output(&k_out);
    manifest.write(&args.out)?;
    println!(
        "wrote {} ({} topics) and {}",
        args.out.display(),
        out.dataset.topics.len(),
        k_out.display()
    );
    Ok(())
}

fn cmd_average(args: AverageArgs) -> Result<()> {
    let smoothing = SmoothingConfig::new(args.eps)?;
    let config_snapshot = serde_json::json!({
        "models": args.models.len(),
        "subsets": args.subsets,
        "eps": args.eps,
    });
    let mut manifest = ManifestBuilder::new("average", config_snapshot, Some(args.seed));
    let mut models = Vec::with_capacity(args.models.len());
    for path in &args.models {
        manifest.input(path);
        models.push(KnowledgeModel::load(path)?);
    }
    if let Some(reference_path) = &args.reference {
        manifest.input(reference_path);
        let mut reference = KnowledgeModel::load(reference_path)?;
        // The reference may carry the same units in a different order.
        if let Some(first) = models.first() {
            if reference.vocab.units() != first.vocab.units() {
                let k = reference.realign(&first.vocab)?;
                reference = KnowledgeModel::new(first.vocab.clone(), k, reference.provenance)?;
            }
        }
        let curve =
            analysis::averaging_curve(&models, &reference, args.subsets, args.seed, &smoothing)?;
        write_text(&args.out, &analysis::curve_to_csv(&curve))?;
        manifest.output(&args.out);
        manifest.write(&args.out)?;
        println!("wrote {} ({} curve points)", args.out.display(), curve.len());
    } else {
        let averaged = analysis::average_models(&models)?;
        averaged.save(&args.out)?;
        manifest.output(&args.out);
        manifest.write(&args.out)?;
        println!("wrote {} (average of {} models)", args.out.display(), models.len());
    }
    Ok(())
}

fn cmd_geometry(args: GeometryArgs) -> Result<()> {
    let smoothing = SmoothingConfig::new(args.eps)?;
    let tokenizer = args.tokenizer.to_config();
    let config_snapshot = serde_json::json!({
        "mds": args.mds,
        "eps": args.eps,
        "tokenizer": tokenizer,
    });
    let mut manifest = ManifestBuilder::new("geometry", config_snapshot, None);
    manifest.input(&args.data).input(&args.model);
    let dataset = corpus::load_dataset(&args.data)?;
    let model = KnowledgeModel::load(&args.model)?;
    let matrix = analysis::geometry_matrix(&dataset, &model, &model.vocab, &tokenizer, &smoothing)?;
    if let Some(matrix_path) = &args.matrix_out {
        write_text(matrix_path, &matrix.to_csv())?;
        manifest.output(matrix_path);
    }
    let coords = analysis::classical_mds(&matrix, args.mds)?;
    write_text(&args.out, &analysis::coords_to_csv(&coords))?;
    manifest.output(&args.out);
    manifest.write(&args.out)?;
    println!(
        "wrote {} ({} points, stress {:.6})",
        args.out.display(),
        coords.len(),
        analysis::mds_stress(&matrix, &coords)
    );
    Ok(())
}

fn cmd_topk(args: TopkArgs) -> Result<()> {
    let config_snapshot = serde_json::json!({
        "k": args.k,
        "direction": format!("{:?}", args.direction),
    });
    let mut manifest = ManifestBuilder::new("topk", config_snapshot, None);
    manifest.input(&args.model);
    let model = KnowledgeModel::load(&args.model)?;
    let direction = match args.direction {
        DirectionArg::Known => Direction::Known,
        DirectionArg::Unknown => Direction::Unknown,
    };
    let top = analysis::top_units(&model, args.k, direction)?;
    let mut csv = String::from("unit,prob\n");
    for (unit, prob) in &top {
        csv.push_str(&format!("{},{}\n", unit, prob));
    }
    write_text(&args.out, &csv)?;
    manifest.output(&args.out);
    manifest.write(&args.out)?;
    print!("{csv}");
    Ok(())
}

#[derive(serde::Serialize)]
struct SummaryRecord {
    topic_id: String,
    sentence_indices: Vec<usize>,
    theta: f64,
    word_count: usize,
}

fn cmd_summarize(args: SummarizeArgs) -> Result<()> {
    let scoring = args.scoring.to_config()?;
    let tokenizer = args.tokenizer.to_config();
    let genetic = GeneticConfig {
        population: args.population,
        generations: args.generations,
        mutation_rate: args.mutation,
        crossover_rate: args.crossover,
        seed: args.seed,
        length_budget: args.budget,
    };
    let config_snapshot = serde_json::json!({
        "method": format!("{:?}", args.method),
        "budget": args.budget,
        "genetic": genetic,
        "scoring": scoring,
    });
    let mut manifest = ManifestBuilder::new("summarize", config_snapshot, Some(args.seed));
    manifest.input(&args.data).input(&args.model);
    let dataset = corpus::load_dataset(&args.data)?;
    let model = KnowledgeModel::load(&args.model)?;

    let mut text_out = String::new();
    let mut records = Vec::with_capacity(dataset.topics.len());
    for topic in &dataset.topics {
        let pool = summarize::split_sentences(topic, &model.vocab, &tokenizer)?;
        let d = corpus::topic_document_distribution(topic, &model.vocab, &tokenizer);
        let selection = match args.method {
            MethodArg::Greedy => summarize::greedy_summarize(&pool, &d, &model, args.budget, &scoring),
            MethodArg::Genetic => summarize::genetic_summarize(&pool, &d, &model, &genetic, &scoring)?,
        };
        let theta = summarize::score_selection(&pool, &selection, &d, &model, &scoring);
        let words = summarize::selection_words(&pool, &selection);
        text_out.push_str(&format!("# {}\n", topic.id));
        for &i in &selection {
            text_out.push_str(&pool.sentences[i].text);
            text_out.push('\n');
        }
        text_out.push('\n');
        records.push(SummaryRecord {
            topic_id: topic.id.clone(),
            sentence_indices: selection,
            theta,
            word_count: words,
        });
    }
    write_text(&args.out, &text_out)?;
    manifest.output(&args.out);
    let report_path = args.report.clone().unwrap_or_else(|| {
        args.out.with_file_name(format!(
            "{}.report.json",
            args.out.file_name().unwrap_or_default().to_string_lossy()
        ))
    });
    write_text(
        &report_path,
        &format!("{}\n", serde_json::to_string_pretty(&records)?),
    )?;
    manifest.output(&report_path);
    manifest.write(&args.out)?;
    println!(
        "wrote {} and {} ({} topics)",
        args.out.display(),
        report_path.display(),
        records.len()
    );
    Ok(())
}
