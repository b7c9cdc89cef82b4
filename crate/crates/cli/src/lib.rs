//! `langsim` subcommands.
//!
//! Every command reads its inputs, runs the library pipeline and writes
//! files into `--out`. Output is byte-identical for identical inputs
//! regardless of thread count.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use langsim::analysis::correlation_report;
use langsim::clustering::complete_linkage;
use langsim::corpus::{load_parallel_corpus, LanguageCode};
use langsim::hs1::read_hs1;
use langsim::lexstat::{build_lex_matrix, EDIT_UNIT};
use langsim::matrix_csv::read_matrix_csv;
use langsim::measures::{load_measure_csv, to_similarity, MeasureKind, MeasureTable};
use langsim::pooling::{pool_set, PoolingStrategy};
use langsim::render::{dendrogram_svg, heatmap_svg};
use langsim::similarity::{build_monolingual_similarity, build_parallel_similarity, LayerSimilaritySet, SimilarityMode};
use langsim::transfer::{
    constant_selection, default_sources, delta_csv, delta_table, evaluate, select_sources, ScoreTable,
    SelectionMap, DEFAULT_SOURCE,
};

#[derive(Debug, Parser)]
#[command(name = "langsim", version, about = "Language similarity from multilingual model hidden states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-layer language similarity matrices from HS1 files.
    Sim(SimArgs),
    /// LEX edit-distance similarity from a multi-parallel corpus.
    Lex(LexArgs),
    /// Correlate model similarity with linguistic measures.
    Corr(CorrArgs),
    /// Complete-linkage clustering of one similarity matrix.
    Cluster(ClusterArgs),
    /// Source-language selection and transfer evaluation.
    Transfer(TransferArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Csv,
    Svg,
    Json,
    Newick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Parallel,
    Monolingual,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayerSelector {
    All,
    One(usize),
}

impl std::str::FromStr for LayerSelector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "all" {
            Ok(LayerSelector::All)
        } else {
            s.parse().map(LayerSelector::One).map_err(|_| format!("expected \"all\" or a layer index, got {s:?}"))
        }
    }
}

/// HS1 inputs shared by `sim` and `corr`.
#[derive(Debug, Args)]
pub struct Hs1Input {
    /// HS1 files, one per language.
    #[arg(long, num_args = 1..)]
    pub hs1: Vec<PathBuf>,
    /// Directory of `*.hs1` files.
    #[arg(long)]
    pub hs1_dir: Option<PathBuf>,
    #[arg(long, default_value = "mean")]
    pub pooling: PoolingStrategy,
    #[arg(long, default_value = "all")]
    pub layers: LayerSelector,
    #[arg(long)]
    pub max_sentences: Option<usize>,
    #[arg(long, value_enum, default_value = "parallel")]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub input: Hs1Input,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["csv", "svg", "json"])]
    pub emit: Vec<Emit>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LexArgs {
    /// Directory of `<code>.txt` files.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub max_sentences: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorrArgs {
    /// Directory with `sim_layer<N>.csv` files written by `sim`.
    #[arg(long, conflicts_with_all = ["hs1", "hs1_dir"])]
    pub sim_dir: Option<PathBuf>,
    #[command(flatten)]
    pub input: Hs1Input,
    /// Measure CSVs; the measure name is the file stem.
    #[arg(long, required = true, num_args = 1..)]
    pub measure: Vec<PathBuf>,
    #[arg(long, default_value = "similarity")]
    pub measure_kind: MeasureKind,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["csv", "json"])]
    pub emit: Vec<Emit>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// One similarity matrix CSV.
    #[arg(long, conflicts_with = "sim_dir")]
    pub sim: Option<PathBuf>,
    /// Directory with `sim_layer<N>.csv`; pick the layer with `--layers`.
    #[arg(long)]
    pub sim_dir: Option<PathBuf>,
    #[arg(long)]
    pub layers: Option<LayerSelector>,
    /// Write a flat partition into this many clusters.
    #[arg(long)]
    pub cut: Option<usize>,
    /// Print the languages that first merge with this one.
    #[arg(long)]
    pub neighbors: Option<LanguageCode>,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["newick", "json", "svg"])]
    pub emit: Vec<Emit>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    /// Score table CSV, `target,<source1>,...`.
    #[arg(long)]
    pub scores: PathBuf,
    /// Similarity matrix or measure CSV to select sources from.
    #[arg(long, conflicts_with_all = ["selection", "eng_baseline"])]
    pub sim: Option<PathBuf>,
    /// Existing selection CSV to evaluate.
    #[arg(long, conflicts_with = "eng_baseline")]
    pub selection: Option<PathBuf>,
    /// Use the default source for every target.
    #[arg(long)]
    pub eng_baseline: bool,
    #[arg(long, default_value = "similarity")]
    pub measure_kind: MeasureKind,
    /// Provenance label for `--sim` selections (default: file stem).
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub sources: Option<Vec<LanguageCode>>,
    #[arg(long, default_value = DEFAULT_SOURCE)]
    pub default_source: LanguageCode,
    /// Similarity CSV for the comparison selection (delta = primary - comparison).
    #[arg(long, conflicts_with_all = ["compare_selection", "compare_eng"])]
    pub compare_sim: Option<PathBuf>,
    #[arg(long, conflicts_with = "compare_eng")]
    pub compare_selection: Option<PathBuf>,
    #[arg(long)]
    pub compare_eng: bool,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["csv", "json"])]
    pub emit: Vec<Emit>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Exit status for a failed command: 3 for violated data invariants,
/// 2 for usage and input errors.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.chain().find_map(|e| e.downcast_ref::<langsim::Error>()) {
        Some(e) if e.is_data_invariant() => 3,
        _ => 2,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sim(a) => cmd_sim(&a),
        Command::Lex(a) => cmd_lex(&a),
        Command::Corr(a) => cmd_corr(&a),
        Command::Cluster(a) => cmd_cluster(&a),
        Command::Transfer(a) => cmd_transfer(&a),
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, text)
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn hs1_paths(input: &Hs1Input) -> Result<Vec<PathBuf>> {
    let mut paths = input.hs1.clone();
    if let Some(dir) = &input.hs1_dir {
        let mut found: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("hs1"))
            .collect();
        found.sort();
        paths.extend(found);
    }
    if paths.len() < 2 {
        bail!("need HS1 files for at least 2 languages, got {}", paths.len());
    }
    Ok(paths)
}

/// Loads, caps, pools and compares the HS1 inputs.
pub fn similarity_from_hs1(input: &Hs1Input) -> Result<LayerSimilaritySet> {
    let mut embeddings = Vec::new();
    for path in hs1_paths(input)? {
        let mut set = read_hs1(&path).with_context(|| format!("reading {}", path.display()))?;
        if let Some(k) = input.max_sentences {
            let k = match input.mode {
                Mode::Parallel => k,
                Mode::Monolingual => k.min(set.n_sentences()),
            };
            set = set.prefix(k).with_context(|| format!("capping {}", path.display()))?;
        }
        embeddings.push(pool_set(&set, input.pooling).with_context(|| format!("pooling {}", path.display()))?);
    }
    let n_layers = embeddings[0].n_layers();
    let range = match input.layers {
        LayerSelector::All => None,
        LayerSelector::One(i) if i < n_layers => Some(i..i + 1),
        LayerSelector::One(i) => bail!("layer {i} out of range: inputs have {n_layers} layers"),
    };
    let set = match input.mode {
        Mode::Parallel => build_parallel_similarity(&embeddings, range)?,
        Mode::Monolingual => build_monolingual_similarity(&embeddings, range)?,
    };
    Ok(set)
}

fn layer_file(layer: usize) -> String {
    format!("sim_layer{layer:02}.csv")
}

#[derive(Serialize)]
struct SimMetadata<'a> {
    mode: SimilarityMode,
    note: &'a str,
    pooling: String,
    languages: &'a [LanguageCode],
    layers: &'a [usize],
    n_sentences: &'a [usize],
}

pub fn cmd_sim(args: &SimArgs) -> Result<()> {
    let set = similarity_from_hs1(&args.input)?;
    prepare_out(&args.out)?;
    for &layer in &set.layers {
        if args.emit.contains(&Emit::Csv) {
            write(&args.out.join(layer_file(layer)), set.layer_csv(layer)?)?;
        }
        if args.emit.contains(&Emit::Svg) {
            let svg = heatmap_svg(&format!("layer {layer}"), &set.languages, set.matrix(layer)?);
            write(&args.out.join(format!("heatmap_layer{layer:02}.svg")), svg)?;
        }
    }
    if args.emit.contains(&Emit::Json) {
        let note = match set.mode {
            SimilarityMode::Parallel => "mean over sentences of per-sentence cosine similarity",
            SimilarityMode::MonolingualCentroid => {
                "interpretation: cosine between per-language mean sentence embeddings"
            }
        };
        let meta = SimMetadata {
            mode: set.mode,
            note,
            pooling: args.input.pooling.to_string(),
            languages: &set.languages,
            layers: &set.layers,
            n_sentences: &set.n_sentences,
        };
        write_json(&args.out.join("similarity.json"), &meta)?;
    }
    Ok(())
}

pub fn cmd_lex(args: &LexArgs) -> Result<()> {
    let corpus = load_parallel_corpus(&args.corpus, args.max_sentences)
        .with_context(|| format!("loading corpus {}", args.corpus.display()))?;
    let lex = build_lex_matrix(&corpus)?;
    prepare_out(&args.out)?;
    write(&args.out.join("LEX.csv"), lex.to_csv())?;
    write_json(
        &args.out.join("LEX.json"),
        &serde_json::json!({
            "measure": "LEX",
            "edit_unit": EDIT_UNIT,
            "normalization": "1 - distance / max(len_a, len_b)",
            "n_sentences": corpus.n_sentences(),
            "languages": corpus.languages(),
        }),
    )
}

/// Reads `sim_layer<N>.csv` files from a directory, ordered by layer.
pub fn load_sim_dir(dir: &Path) -> Result<LayerSimilaritySet> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(layer) = name
            .strip_prefix("sim_layer")
            .and_then(|r| r.strip_suffix(".csv"))
            .and_then(|n| n.parse::<usize>().ok())
        {
            found.push((layer, path));
        }
    }
    found.sort();
    if found.is_empty() {
        bail!("no sim_layer<N>.csv files in {}", dir.display());
    }
    let mut layers = Vec::new();
    let mut raws = Vec::new();
    for (layer, path) in found {
        raws.push(read_matrix_csv(&path).with_context(|| format!("reading {}", path.display()))?);
        layers.push(layer);
    }
    Ok(LayerSimilaritySet::from_raw(layers, raws, SimilarityMode::Parallel)?)
}

#[derive(Serialize)]
struct CorrSummary<'a> {
    measure: &'a str,
    mean: f64,
    median: f64,
    n_targets: usize,
    skipped: Vec<&'a LanguageCode>,
    best_layer_rule: &'a str,
    missing_rule: &'a str,
}

pub fn cmd_corr(args: &CorrArgs) -> Result<()> {
    let sims = match &args.sim_dir {
        Some(dir) => load_sim_dir(dir)?,
        None => similarity_from_hs1(&args.input)?,
    };
    let measures = args
        .measure
        .iter()
        .map(|p| {
            load_measure_csv(p, args.measure_kind)
                .map(|t| to_similarity(&t))
                .with_context(|| format!("loading measure {}", p.display()))
        })
        .collect::<Result<Vec<MeasureTable>>>()?;
    prepare_out(&args.out)?;
    for measure in &measures {
        let report = correlation_report(&sims, measure, None)
            .with_context(|| format!("correlating with {}", measure.name))?;
        let stem = format!("corr_{}", measure.name);
        if args.emit.contains(&Emit::Csv) {
            write(&args.out.join(format!("{stem}.csv")), report.to_csv())?;
            write(&args.out.join(format!("{stem}_layers.csv")), report.layer_curve_csv())?;
        }
        if args.emit.contains(&Emit::Json) {
            let summary = CorrSummary {
                measure: &report.measure,
                mean: report.mean,
                median: report.median,
                n_targets: report.rows.len(),
                skipped: report.skipped.iter().map(|s| &s.target).collect(),
                best_layer_rule: "per target, argmax over layers, lowest layer on ties",
                missing_rule: "languages with a missing measure cell for the target are dropped for every layer, including the per-layer mean curve",
            };
            write_json(&args.out.join(format!("{stem}.json")), &summary)?;
        }
    }
    Ok(())
}

pub fn cmd_cluster(args: &ClusterArgs) -> Result<()> {
    let (languages, matrix, layer) = match (&args.sim, &args.sim_dir) {
        (Some(path), _) => {
            let raw = read_matrix_csv(path).with_context(|| format!("reading {}", path.display()))?;
            let set = LayerSimilaritySet::from_raw(vec![0], vec![raw], SimilarityMode::Parallel)?;
            (set.languages, set.matrices.into_iter().next().expect("one layer"), None)
        }
        (None, Some(dir)) => {
            let layer = match args.layers {
                Some(LayerSelector::One(i)) => i,
                _ => bail!("--sim-dir needs --layers <index>"),
            };
            let set = load_sim_dir(dir)?;
            let m = set.matrix(layer)?.clone();
            (set.languages, m, Some(layer))
        }
        (None, None) => bail!("one of --sim or --sim-dir is required"),
    };
    if let Some(k) = args.cut {
        if k == 0 || k > languages.len() {
            bail!("--cut {k} out of range 1..={}", languages.len());
        }
    }
    let dendrogram = complete_linkage(&languages, &matrix)?;
    prepare_out(&args.out)?;
    if args.emit.contains(&Emit::Newick) {
        write(&args.out.join("dendrogram.nwk"), dendrogram.to_newick() + "\n")?;
    }
    if args.emit.contains(&Emit::Json) {
        write_json(&args.out.join("merges.json"), &dendrogram)?;
    }
    if args.emit.contains(&Emit::Svg) {
        let title = layer.map_or("dendrogram".to_owned(), |l| format!("dendrogram, layer {l}"));
        write(&args.out.join("dendrogram.svg"), dendrogram_svg(&title, &dendrogram))?;
    }
    if let Some(k) = args.cut {
        write_json(&args.out.join("clusters.json"), &dendrogram.cut(k)?)?;
    }
    if let Some(target) = &args.neighbors {
        let n = dendrogram.neighbors(target)?;
        println!("{}", n.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(","));
    }
    Ok(())
}

fn selection_from_sim(
    path: &Path,
    kind: MeasureKind,
    label: Option<&str>,
    targets: &[LanguageCode],
    sources: &[LanguageCode],
    default: &LanguageCode,
) -> Result<SelectionMap> {
    let mut table = to_similarity(&load_measure_csv(path, kind).with_context(|| format!("loading {}", path.display()))?);
    if let Some(l) = label {
        table.name = l.to_owned();
    }
    Ok(select_sources(&table, targets, sources, default)?)
}

#[derive(Serialize)]
struct TransferSummary<'a> {
    task: &'a str,
    macro_average: f64,
    n_targets: usize,
    n_fallback: usize,
}

pub fn cmd_transfer(args: &TransferArgs) -> Result<()> {
    let table = ScoreTable::load(&args.scores).with_context(|| format!("loading {}", args.scores.display()))?;
    let sources = args.sources.clone().unwrap_or_else(default_sources);
    let targets = table.targets.clone();
    let selection = if let Some(path) = &args.sim {
        selection_from_sim(path, args.measure_kind, args.label.as_deref(), &targets, &sources, &args.default_source)?
    } else if let Some(path) = &args.selection {
        SelectionMap::load(path)?
    } else if args.eng_baseline {
        constant_selection(&targets, &args.default_source)
    } else {
        bail!("one of --sim, --selection or --eng-baseline is required");
    };
    let eval = evaluate(&table, &selection)?;

    let compare = if let Some(path) = &args.compare_sim {
        Some(selection_from_sim(path, args.measure_kind, None, &targets, &sources, &args.default_source)?)
    } else if let Some(path) = &args.compare_selection {
        Some(SelectionMap::load(path)?)
    } else if args.compare_eng {
        Some(constant_selection(&targets, &args.default_source))
    } else {
        None
    };

    prepare_out(&args.out)?;
    if args.emit.contains(&Emit::Csv) {
        write(&args.out.join("selection.csv"), selection.to_csv())?;
    }
    if args.emit.contains(&Emit::Json) {
        let summary = TransferSummary {
            task: &table.task,
            macro_average: eval.macro_average,
            n_targets: eval.per_target.len(),
            n_fallback: selection.entries.iter().filter(|s| s.provenance == langsim::transfer::FALLBACK).count(),
        };
        write_json(&args.out.join("evaluation.json"), &summary)?;
    }
    if let Some(other) = compare {
        let rows = delta_table(&table, &other, &selection)?;
        write(&args.out.join("delta.csv"), delta_csv(&rows))?;
    }
    println!("{} macro average {:.3} over {} targets", table.task, eval.macro_average, eval.per_target.len());
    Ok(())
}
