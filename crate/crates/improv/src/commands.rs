//! Command-line interface.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use improv_core::corpus::{ExtractionRun, Extractor, ImprovTriple, QueryResponsePair};
use improv_core::engine::{build_improv_index, build_qr_index};
use improv_core::index::Bm25Params;
use improv_core::models::{init_matcher, train_ibm1, train_lm, train_matcher, Lambdas, MatcherHyperParams, Vocab};
use improv_core::ranker::{evaluate, train_ranker, LabeledExample, RankerHyperParams, RankerModel};
use improv_core::text::TextConfig;

use crate::config::{text_config, Config};
use crate::error::{ImprovError, Result};
use crate::jsonl::{self, SentenceRecord};
use crate::server::{self, ChatReply, ServeOptions};
use crate::store;

#[derive(Debug, Parser)]
#[command(name = "improv", version, about = "Retrieval chatbot that appends short improvised second responses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine (short, improv) triples from pairs and sentences.
    Extract(ExtractArgs),
    /// Build a retrieval index from triples or from query-response pairs.
    Index(IndexArgs),
    /// Train the word translation model on query-response pairs.
    TrainTm(TrainTmArgs),
    /// Train the trigram language model on sentences.
    TrainLm(TrainLmArgs),
    /// Train the dual-encoder matcher on query-response pairs.
    TrainMatcher(TrainMatcherArgs),
    /// Train the candidate ranker on labeled examples.
    TrainRanker(TrainRankerArgs),
    /// Report ranker precision and recall on labeled examples.
    Eval(EvalArgs),
    /// Run the HTTP chat service.
    Serve(EngineArgs),
    /// Chat in the terminal.
    Chat(EngineArgs),
    /// Answer a single message.
    Respond(RespondArgs),
}

#[derive(Debug, Args)]
pub struct SegmentationArg {
    /// Config file whose [segmentation] section replaces the built-in lists.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl SegmentationArg {
    fn text(&self) -> Result<TextConfig> {
        text_config(self.config.as_deref())
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub sentences: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = improv_core::corpus::DEFAULT_SHORT_THRESHOLD)]
    pub short_threshold: usize,
    #[command(flatten)]
    pub seg: SegmentationArg,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct IndexArgs {
    /// Triples JSONL; builds the improv index keyed on the short response.
    #[arg(long, group = "source")]
    pub triples: Option<PathBuf>,
    /// Query-response JSONL; builds the first-response index keyed on the query.
    #[arg(long, group = "source")]
    pub pairs: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.2)]
    pub k1: f64,
    #[arg(long, default_value_t = 0.75)]
    pub b: f64,
    #[command(flatten)]
    pub seg: SegmentationArg,
}

#[derive(Debug, Args)]
pub struct TrainTmArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub seg: SegmentationArg,
}

#[derive(Debug, Args)]
pub struct TrainLmArgs {
    #[arg(long)]
    pub sentences: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Words seen fewer times map to the unknown token.
    #[arg(long, default_value_t = 2)]
    pub min_count: u64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda1: f64,
    #[arg(long, default_value_t = 0.3)]
    pub lambda2: f64,
    #[arg(long, default_value_t = 0.6)]
    pub lambda3: f64,
    #[command(flatten)]
    pub seg: SegmentationArg,
}

#[derive(Debug, Args)]
pub struct TrainMatcherArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0.5)]
    pub margin: f64,
    #[arg(long, default_value_t = 4)]
    pub negatives: usize,
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub seg: SegmentationArg,
}

#[derive(Debug, Args)]
pub struct TrainRankerArgs {
    #[arg(long)]
    pub labels: PathBuf,
    /// Directory holding tm.json, lm.json and matcher.json.
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[command(flatten)]
    pub seg: SegmentationArg,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub ranker: PathBuf,
    #[arg(long)]
    pub models: PathBuf,
    #[command(flatten)]
    pub seg: SegmentationArg,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct RespondArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub message: String,
    /// Print the full reply object instead of the reply text.
    #[arg(long)]
    pub json: bool,
    /// Include ranked candidates in the JSON output.
    #[arg(long, requires = "json")]
    pub debug: bool,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Extract(a) => extract(a, out),
        Command::Index(a) => index(a, out),
        Command::TrainTm(a) => train_tm_cmd(a),
        Command::TrainLm(a) => train_lm_cmd(a),
        Command::TrainMatcher(a) => train_matcher_cmd(a),
        Command::TrainRanker(a) => train_ranker_cmd(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Serve(a) => serve(a),
        Command::Chat(a) => chat(a, &mut std::io::stdin().lock(), out),
        Command::Respond(a) => respond(a, out),
    }
}

fn print_json(out: &mut dyn Write, value: &impl serde::Serialize) -> anyhow::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn extract(a: ExtractArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    if a.pairs.is_none() && a.sentences.is_none() {
        return Err(ImprovError::Usage("extract needs --pairs and/or --sentences".into()).into());
    }
    if a.short_threshold == 0 {
        return Err(ImprovError::Usage("--short-threshold must be at least 1".into()).into());
    }
    let extractor = Extractor::new(a.seg.text()?, a.short_threshold);
    let mut run = ExtractionRun::new(&extractor);
    if let Some(path) = &a.pairs {
        for line in jsonl::read_lines::<QueryResponsePair>(path)? {
            match line {
                Ok(p) => run.pair(&p),
                Err(msg) => {
                    log::warn!("skipping malformed record {msg}");
                    run.malformed();
                }
            }
        }
    }
    if let Some(path) = &a.sentences {
        for line in jsonl::read_lines::<SentenceRecord>(path)? {
            match line {
                Ok(s) => run.sentence(&s.text),
                Err(msg) => {
                    log::warn!("skipping malformed record {msg}");
                    run.malformed();
                }
            }
        }
    }
    let (triples, stats) = run.finish();
    jsonl::write_all(&a.out, &triples)?;
    print_json(out, &stats)
}

fn index(a: IndexArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let params = Bm25Params { k1: a.k1, b: a.b };
    let text = a.seg.text()?;
    let (path, docs, rejected, malformed) = if let Some(src) = &a.triples {
        let (triples, malformed) = jsonl::read_all::<ImprovTriple>(src)?;
        let idx = build_improv_index(triples, params, text)?;
        let path = a.out.join(store::IMPROV_INDEX_FILE);
        store::save(&idx, &path)?;
        (path, idx.doc_count(), idx.rejected_empty(), malformed)
    } else {
        let src = a.pairs.as_ref().expect("clap enforces one source");
        let (pairs, malformed) = jsonl::read_all::<QueryResponsePair>(src)?;
        let idx = build_qr_index(pairs, params, text)?;
        let path = a.out.join(store::QR_INDEX_FILE);
        store::save(&idx, &path)?;
        (path, idx.doc_count(), idx.rejected_empty(), malformed)
    };
    print_json(
        out,
        &serde_json::json!({
            "path": path,
            "documents": docs,
            "rejected_empty": rejected,
            "malformed": malformed,
        }),
    )
}

fn tokenized_pairs(path: &Path, text: &TextConfig) -> Result<Vec<(Vec<String>, Vec<String>)>> {
    let (pairs, _) = jsonl::read_all::<QueryResponsePair>(path)?;
    Ok(pairs.iter().map(|p| (text.tokenize(&p.query), text.tokenize(&p.response))).collect())
}

fn train_tm_cmd(a: TrainTmArgs) -> anyhow::Result<()> {
    let text = a.seg.text()?;
    // The table models P(query word | response word).
    let pairs: Vec<_> = tokenized_pairs(&a.pairs, &text)?.into_iter().map(|(q, r)| (r, q)).collect();
    let table = train_ibm1(&pairs, a.iters)?;
    store::save(&table, &a.out)?;
    Ok(())
}

fn train_lm_cmd(a: TrainLmArgs) -> anyhow::Result<()> {
    let text = a.seg.text()?;
    let (records, _) = jsonl::read_all::<SentenceRecord>(&a.sentences)?;
    let sentences: Vec<Vec<String>> = records.iter().map(|s| text.tokenize(&s.text)).collect();
    let lambdas = Lambdas { unigram: a.lambda1, bigram: a.lambda2, trigram: a.lambda3 };
    let lm = train_lm(&sentences, lambdas, a.min_count)?;
    store::save(&lm, &a.out)?;
    Ok(())
}

fn train_matcher_cmd(a: TrainMatcherArgs) -> anyhow::Result<()> {
    let text = a.seg.text()?;
    let pairs = tokenized_pairs(&a.pairs, &text)?;
    let vocab = Vocab::from_tokens(pairs.iter().flat_map(|(q, r)| q.iter().chain(r)).map(String::as_str), a.min_count);
    let hyper = MatcherHyperParams {
        learning_rate: a.learning_rate,
        margin: a.margin,
        negatives: a.negatives,
        epochs: a.epochs,
        seed: a.seed,
    };
    let model = train_matcher(init_matcher(vocab, a.dim, a.seed)?, &pairs, hyper)?;
    store::save(&model, &a.out)?;
    Ok(())
}

fn train_ranker_cmd(a: TrainRankerArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let models = store::load_feature_models(&a.models, a.seg.text()?)?;
    let (examples, _) = jsonl::read_all::<LabeledExample>(&a.labels)?;
    let hyper =
        RankerHyperParams { l2: a.l2, epochs: a.epochs, learning_rate: a.learning_rate, threshold: a.threshold };
    let model = train_ranker(&examples, &models, hyper)?;
    store::save(&model, &a.out)?;
    let eval = evaluate(&model, &models, &examples)?;
    print_json(out, &serde_json::json!({ "training_precision": eval.precision, "training_recall": eval.recall }))
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let models = store::load_feature_models(&a.models, a.seg.text()?)?;
    let ranker: RankerModel = store::load(&a.ranker)?;
    let (examples, _) = jsonl::read_all::<LabeledExample>(&a.labels)?;
    let e = evaluate(&ranker, &models, &examples)?;
    print_json(out, &serde_json::json!({ "precision": e.precision, "recall": e.recall }))
}

fn serve(a: EngineArgs) -> anyhow::Result<()> {
    let config = Config::load(&a.config)?;
    let engine = config.load_engine()?;
    let opts = ServeOptions {
        bind: config.server.bind.clone(),
        static_dir: config.server.static_dir.clone(),
        transcript_path: config.server.transcript_path.clone(),
    };
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(server::serve(engine, opts))?;
    Ok(())
}

/// Terminal REPL: one reply per input line until EOF or `/quit`.
pub fn chat(a: EngineArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> anyhow::Result<()> {
    let engine = Config::load(&a.config)?.load_engine()?;
    let mut session = engine.new_session("terminal");
    let mut ts = 0u64;
    let mut line = String::new();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        let msg = line.trim();
        if msg == "/quit" {
            break;
        }
        if msg.is_empty() {
            continue;
        }
        ts += 1;
        let resp = engine.respond(&mut session, msg, ts)?;
        writeln!(out, "{}", resp.reply)?;
    }
    Ok(())
}

fn respond(a: RespondArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let engine = Config::load(&a.config)?.load_engine()?;
    let mut session = engine.new_session("oneshot");
    let resp = engine.respond(&mut session, &a.message, 0)?;
    if a.json {
        print_json(out, &ChatReply::new(resp, a.debug))
    } else {
        writeln!(out, "{}", resp.reply)?;
        Ok(())
    }
}
