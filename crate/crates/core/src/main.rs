use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tpr_eval::harness::EmbeddingTable;
use tpr_eval::harness::{
    load_annotations, load_embeddings, load_embeddings_json, parse_report, render_report,
    run_evaluation, sha256_file, test_gallery_ids, write_embeddings, write_embeddings_json,
    Averaging, EvalOptions, ReportFormat, SimilarityMatrix, SimilaritySource, Split,
};
use tpr_eval::metrics::MetricConfig;
use tpr_eval::stats::{corpus_stats, histogram_export};
use tpr_eval::{Error, Result};

#[derive(Parser)]
#[command(
    name = "tpr-eval",
    version,
    about = "Text-based person retrieval evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a retrieval run: rank-k, mAP and mSD.
    Eval(EvalArgs),
    /// Caption word-count and entropy statistics.
    Stats(StatsArgs),
    /// Convert embedding tables (UFEB <-> JSON) or render a JSON report.
    Convert(ConvertArgs),
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long)]
    annotations: PathBuf,
    /// Caption embeddings, ids `<image_id>#<caption_index>`.
    #[arg(long, required_unless_present = "sim")]
    query_emb: Option<PathBuf>,
    /// Image embeddings, ids are image ids. With --sim only the ids are used.
    #[arg(long, required_unless_present = "sim")]
    gallery_emb: Option<PathBuf>,
    /// Precomputed similarities: a UFEB table with one row per query and one
    /// column per gallery image.
    #[arg(long)]
    sim: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
    ranks: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    msd_k: f64,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long)]
    per_query: bool,
    #[arg(long, value_enum, default_value_t = AverageBy::Caption)]
    average_by: AverageBy,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum AverageBy {
    Caption,
    Image,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitFilter {
    All,
    Train,
    Test,
}

#[derive(clap::Args)]
struct StatsArgs {
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Write the word-count histogram as CSV.
    #[arg(long)]
    hist: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SplitFilter::All)]
    split: SplitFilter,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvertKind {
    Embeddings,
    Report,
}

#[derive(clap::Args)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = ConvertKind::Embeddings)]
    kind: ConvertKind,
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn read_table(path: &Path) -> Result<EmbeddingTable> {
    if is_json(path) {
        load_embeddings_json(path)
    } else {
        load_embeddings(path)
    }
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn eval(args: EvalArgs) -> Result<()> {
    let format: ReportFormat = args.format.parse()?;
    let metrics = MetricConfig {
        msd_k: args.msd_k,
        rank_cutoffs: args.ranks.iter().copied().collect::<BTreeSet<_>>(),
        epsilon: args.epsilon,
    };
    let opts = EvalOptions {
        metrics,
        averaging: match args.average_by {
            AverageBy::Caption => Averaging::Caption,
            AverageBy::Image => Averaging::Image,
        },
        per_query: args.per_query,
        workers: args.workers,
    };

    let annotations = load_annotations(&args.annotations)?;
    let mut provenance = vec![("annotations", &args.annotations)];

    let mut report = if let Some(sim_path) = &args.sim {
        let table = read_table(sim_path)?;
        let matrix = SimilarityMatrix::from_table(&table)?;
        let gallery_ids = match &args.gallery_emb {
            Some(p) => {
                provenance.push(("gallery_emb", p));
                read_table(p)?.ids().to_vec()
            }
            None => test_gallery_ids(&annotations),
        };
        provenance.push(("sim", sim_path));
        let source = SimilaritySource::Precomputed {
            matrix: &matrix,
            query_ids: table.ids(),
            gallery_ids: &gallery_ids,
        };
        run_evaluation(&annotations, source, &opts)?
    } else {
        // clap guarantees both paths when --sim is absent
        let q_path = args.query_emb.as_ref().expect("query_emb required");
        let g_path = args.gallery_emb.as_ref().expect("gallery_emb required");
        let queries = read_table(q_path)?;
        let gallery = read_table(g_path)?;
        provenance.push(("query_emb", q_path));
        provenance.push(("gallery_emb", g_path));
        let source = SimilaritySource::Embeddings {
            queries: &queries,
            gallery: &gallery,
        };
        run_evaluation(&annotations, source, &opts)?
    };

    for (name, path) in provenance {
        report
            .provenance
            .insert(name.to_string(), sha256_file(path)?);
    }
    write_output(&args.out, &render_report(&report, format)?)
}

fn stats(args: StatsArgs) -> Result<()> {
    let annotations = load_annotations(&args.annotations)?;
    let captions: Vec<&str> = annotations
        .iter()
        .filter(|r| match args.split {
            SplitFilter::All => true,
            SplitFilter::Train => r.split == Split::Train,
            SplitFilter::Test => r.split == Split::Test,
        })
        .flat_map(|r| r.captions.iter().map(String::as_str))
        .collect();
    let stats = corpus_stats(&captions)?;
    let mut json = serde_json::to_vec_pretty(&stats).map_err(|e| Error::Internal(e.to_string()))?;
    json.push(b'\n');
    write_output(&args.out, &json)?;
    if let Some(hist) = &args.hist {
        histogram_export(&stats.histogram, hist)?;
    }
    Ok(())
}

fn convert(args: ConvertArgs) -> Result<()> {
    match args.kind {
        ConvertKind::Embeddings => {
            let table = read_table(&args.input)?;
            if is_json(&args.output) {
                write_embeddings_json(&table, &args.output)
            } else {
                write_embeddings(&table, &args.output)
            }
        }
        ConvertKind::Report => {
            let bytes = std::fs::read(&args.input).map_err(|e| Error::Io {
                path: args.input.clone(),
                source: e,
            })?;
            let report = parse_report(&bytes)?;
            let format = if is_json(&args.output) {
                ReportFormat::Json
            } else {
                ReportFormat::Markdown
            };
            write_output(&args.output, &render_report(&report, format)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Eval(args) => eval(args),
        Command::Stats(args) => stats(args),
        Command::Convert(args) => convert(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
