//! `motorfda` — seeded synthetic corpora, conditioning, embeddings, and the
//! two-stage fault screen, all from the command line.
//!
//! Subcommands:
//!
//! - `synth` writes the default labeled corpus as plain-text signal files;
//! - `preprocess` turns corpus records into a delimited feature matrix;
//! - `embed` exports 2-D coordinates for one channel/representation pair;
//! - `detect` screens current records and reports healthy vs faulty;
//! - `diagnose` sorts faulty motors into fault families from power records;
//! - `plot` renders an exported embedding as a self-contained SVG.
//!
//! Every run is deterministic in `--seed`; failures exit nonzero after one
//! `error: …` line on stderr.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use motorfda_core::io::{
    export_embedding, import_embedding, load_corpus, plot_embedding, save_corpus, ExportFormat,
};
use motorfda_core::pipeline::{
    embed_records, run_detection, run_diagnosis, ChannelClass, DataKind, EmbedMethod, EmbedParams,
    EmbeddingResult, FaultClass, HealthLabel, PipelineVerdict,
};
use motorfda_core::preprocess::{preprocess_signal, PreprocessConfig};
use motorfda_core::synth::{default_manifest, gen_corpus, MotorSpec, SignalRecord};

#[derive(Parser)]
#[command(
    name = "motorfda",
    version,
    about = "Unsupervised induction-motor fault screening on synthetic signals"
)]
struct Cli {
    /// Master seed for corpus generation.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Directory output files are written into.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// JSON file overriding the embedding parameters.
    #[arg(long, global = true)]
    params_file: Option<PathBuf>,

    /// Flavor of embedding exports.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the default synthetic corpus (120 currents, 70 power records).
    Synth {
        /// Corpus directory name inside --out-dir.
        #[arg(long, default_value = "corpus")]
        name: String,
        /// Samples per record.
        #[arg(long, default_value_t = 128_000)]
        record_len: usize,
    },
    /// Condition corpus records and write them as one delimited matrix.
    Preprocess {
        /// Corpus directory to read.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = KindArg::Derivative)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = ChannelArg::Current)]
        channel: ChannelArg,
    },
    /// Embed one channel/representation pair and export the coordinates.
    Embed {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Fpca)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = KindArg::Derivative)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = ChannelArg::Current)]
        channel: ChannelArg,
    },
    /// Stage 1: screen current records for faulty motors.
    Detect {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Fpca)]
        method: MethodArg,
    },
    /// Stage 2: sort faulty motors into fault families.
    Diagnose {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Fpca)]
        method: MethodArg,
    },
    /// Render an exported embedding as an SVG scatter plot.
    Plot {
        /// Embedding export (either flavor) to render.
        #[arg(long)]
        embedding: PathBuf,
        /// Output file; defaults to embedding.svg in --out-dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Fpca,
    Fdm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Signal,
    Derivative,
    Signature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChannelArg {
    Current,
    Iap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Table,
}

impl From<MethodArg> for EmbedMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Fpca => EmbedMethod::Fpca,
            MethodArg::Fdm => EmbedMethod::Fdm,
        }
    }
}

impl From<KindArg> for DataKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Signal => DataKind::Signal,
            KindArg::Derivative => DataKind::Derivative,
            KindArg::Signature => DataKind::Signature,
        }
    }
}

impl From<FormatArg> for ExportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ExportFormat::Json,
            FormatArg::Table => ExportFormat::Table,
        }
    }
}

impl FormatArg {
    fn extension(self) -> &'static str {
        match self {
            FormatArg::Json => "json",
            FormatArg::Table => "tsv",
        }
    }
}

fn matches_channel(record: &SignalRecord, channel: ChannelArg) -> bool {
    match channel {
        ChannelArg::Current => record.channel.is_current(),
        ChannelArg::Iap => ChannelClass::of(record.channel) == ChannelClass::Iap,
    }
}

/// Verdict file contents: per-record labels next to the stage outcomes.
#[derive(Serialize)]
struct VerdictReport<'a> {
    labels: &'a [motorfda_core::pipeline::PointLabel],
    verdict: &'a PipelineVerdict,
}

fn load_params(path: &Option<PathBuf>) -> Result<Option<EmbedParams>> {
    let Some(path) = path else { return Ok(None) };
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading parameter file {}", path.display()))?;
    let params = serde_json::from_str(&text)
        .with_context(|| format!("parsing parameter file {}", path.display()))?;
    Ok(Some(params))
}

fn load_nonempty_corpus(dir: &Path) -> Result<Vec<SignalRecord>> {
    let records =
        load_corpus(dir).with_context(|| format!("loading corpus from {}", dir.display()))?;
    if records.is_empty() {
        bail!("corpus at {} holds no records", dir.display());
    }
    Ok(records)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn export_result(result: &EmbeddingResult, path: &Path, format: FormatArg) -> Result<()> {
    export_embedding(result, path, format.into())
        .with_context(|| format!("exporting embedding to {}", path.display()))?;
    Ok(())
}

fn cmd_synth(cli: &Cli, name: &str, record_len: usize) -> Result<()> {
    let motor = MotorSpec {
        n_samples: record_len,
        ..MotorSpec::default()
    };
    let records = gen_corpus(&motor, &default_manifest(), cli.seed)?;
    let dir = cli.out_dir.join(name);
    save_corpus(&records, &dir).with_context(|| format!("writing corpus to {}", dir.display()))?;
    let currents = records.iter().filter(|r| r.channel.is_current()).count();
    println!(
        "wrote {} records ({} current, {} power) to {}",
        records.len(),
        currents,
        records.len() - currents,
        dir.display()
    );
    Ok(())
}

fn cmd_preprocess(cli: &Cli, corpus: &Path, kind: KindArg, channel: ChannelArg) -> Result<()> {
    let records = load_nonempty_corpus(corpus)?;
    let picked: Vec<&SignalRecord> = records
        .iter()
        .filter(|r| matches_channel(r, channel))
        .collect();
    if picked.is_empty() {
        bail!("corpus has no {:?} records", channel);
    }
    let cfg = PreprocessConfig {
        derivative: kind == KindArg::Derivative,
        signature: kind == KindArg::Signature,
        ..PreprocessConfig::default()
    };
    let mut out = String::new();
    let _ = writeln!(out, "# kind={:?}", kind);
    let _ = writeln!(out, "# channel={:?}", channel);
    let _ = writeln!(out, "# columns=condition\tload\tvalues…");
    for record in &picked {
        let p = preprocess_signal(record, &cfg)
            .with_context(|| format!("conditioning a {} record", record.condition_tag()))?;
        let values = match kind {
            KindArg::Signal => p.signal,
            KindArg::Derivative => p.derivative.expect("derivative requested"),
            KindArg::Signature => p.signature.expect("signature requested").magnitudes,
        };
        let _ = write!(out, "{}\t{}", record.condition_tag(), record.condition.load_pct);
        for v in values {
            let _ = write!(out, "\t{v:.16e}");
        }
        out.push('\n');
    }
    let path = cli.out_dir.join(format!(
        "preprocessed_{}_{}.tsv",
        format!("{kind:?}").to_lowercase(),
        format!("{channel:?}").to_lowercase()
    ));
    fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
    println!("conditioned {} records into {}", picked.len(), path.display());
    Ok(())
}

fn cmd_embed(
    cli: &Cli,
    corpus: &Path,
    method: MethodArg,
    kind: KindArg,
    channel: ChannelArg,
) -> Result<()> {
    let records = load_nonempty_corpus(corpus)?;
    let picked: Vec<&SignalRecord> = records
        .iter()
        .filter(|r| matches_channel(r, channel))
        .collect();
    if picked.is_empty() {
        bail!("corpus has no {:?} records", channel);
    }
    let params = load_params(&cli.params_file)?;
    let result = embed_records(&picked, kind.into(), method.into(), params)?;
    let path = cli
        .out_dir
        .join(format!("embedding.{}", cli.format.extension()));
    export_result(&result, &path, cli.format)?;
    println!(
        "embedded {} records ({:?} {:?}, {:?}) into {}",
        result.len(),
        channel,
        kind,
        method,
        path.display()
    );
    Ok(())
}

fn cmd_detect(cli: &Cli, corpus: &Path, method: MethodArg) -> Result<()> {
    let records = load_nonempty_corpus(corpus)?;
    let params = load_params(&cli.params_file)?;
    let (result, verdict) = run_detection(&records, method.into(), params)?;
    let embedding_path = cli
        .out_dir
        .join(format!("detection_embedding.{}", cli.format.extension()));
    export_result(&result, &embedding_path, cli.format)?;
    let verdict_path = cli.out_dir.join("detection_verdict.json");
    write_json(
        &VerdictReport {
            labels: &result.labels,
            verdict: &verdict,
        },
        &verdict_path,
    )?;
    let healthy = verdict
        .stage1
        .iter()
        .filter(|&&h| h == HealthLabel::Healthy)
        .count();
    let sep = verdict
        .separation
        .stage1
        .map_or("n/a".to_string(), |s| format!("{s:.4}"));
    println!(
        "screened {} current records: {} healthy, {} faulty (silhouette {sep})",
        verdict.stage1.len(),
        healthy,
        verdict.stage1.len() - healthy
    );
    println!("wrote {} and {}", embedding_path.display(), verdict_path.display());
    Ok(())
}

fn cmd_diagnose(cli: &Cli, corpus: &Path, method: MethodArg) -> Result<()> {
    let records = load_nonempty_corpus(corpus)?;
    let params = load_params(&cli.params_file)?;
    let (result, verdict) = run_diagnosis(&records, method.into(), params)?;
    let embedding_path = cli
        .out_dir
        .join(format!("diagnosis_embedding.{}", cli.format.extension()));
    export_result(&result, &embedding_path, cli.format)?;
    let verdict_path = cli.out_dir.join("diagnosis_verdict.json");
    write_json(
        &VerdictReport {
            labels: &result.labels,
            verdict: &verdict,
        },
        &verdict_path,
    )?;
    let count = |class: FaultClass| {
        verdict
            .stage2
            .iter()
            .filter(|&&c| c == Some(class))
            .count()
    };
    let sep = verdict
        .separation
        .stage2
        .map_or("n/a".to_string(), |s| format!("{s:.4}"));
    println!(
        "diagnosed {} power records: {} broken-bars, {} slow-oscillation, {} fast-oscillation \
         (silhouette {sep})",
        verdict.stage2.len(),
        count(FaultClass::BrokenBars),
        count(FaultClass::LoadOsc1Hz),
        count(FaultClass::LoadOsc2Hz)
    );
    println!("wrote {} and {}", embedding_path.display(), verdict_path.display());
    Ok(())
}

fn cmd_plot(cli: &Cli, embedding: &Path, out: &Option<PathBuf>) -> Result<()> {
    let result = import_embedding(embedding)
        .with_context(|| format!("reading embedding export {}", embedding.display()))?;
    let path = match out {
        Some(p) => p.clone(),
        None => cli.out_dir.join("embedding.svg"),
    };
    plot_embedding(&result, &path)
        .with_context(|| format!("rendering plot to {}", path.display()))?;
    println!("plotted {} points to {}", result.len(), path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("creating output directory {}", cli.out_dir.display()))?;
    match &cli.command {
        Command::Synth { name, record_len } => cmd_synth(cli, name, *record_len),
        Command::Preprocess {
            corpus,
            kind,
            channel,
        } => cmd_preprocess(cli, corpus, *kind, *channel),
        Command::Embed {
            corpus,
            method,
            kind,
            channel,
        } => cmd_embed(cli, corpus, *method, *kind, *channel),
        Command::Detect { corpus, method } => cmd_detect(cli, corpus, *method),
        Command::Diagnose { corpus, method } => cmd_diagnose(cli, corpus, *method),
        Command::Plot { embedding, out } => cmd_plot(cli, embedding, out),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
