//! Command-line interface for the laffab corpus engine.
//!
//! Exit codes: 0 on success, 1 for analysis-level findings (e.g. an
//! inconsistent hierarchy under `--strict`, misaligned score inputs),
//! 2 for input or format errors (unreadable files, malformed XML or
//! discbracket, bad feature keys, bundle corruption).

use clap::{Parser, Subcommand, ValueEnum};
use laffab::bundle::{self, read_manifest, FeatureSelection};
use laffab::cooccur::compute_cooccurrence;
use laffab::corpus::{self, CompiledCorpus};
use laffab::fabric::FabricError;
use laffab::fragments::{extract_corpus, FragmentError};
use laffab::freq::{compute_freq, parse_key, InvalidPatternSpec, PatternSpec};
use laffab::model::FeatureKey;
use laffab::parser::{self, ParseError};
use laffab::treebank::{
    build_trees, from_discbracket, score, to_discbracket, to_export, OnInconsistent, ParentMode,
    ScoreCfg, Tree, TreeBuildCfg, TreebankError,
};
use serde::Deserialize;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "laffab",
    version,
    about = "Compile stand-off annotation resources and run corpus analyses"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a resource header and its annotation files, compile them,
    /// and save a binary bundle.
    Compile {
        /// Resource header file.
        header: PathBuf,
        /// Output bundle directory.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print a bundle's counts and feature keys.
    Info {
        /// Bundle directory (resolved against $LAFFAB_CACHE if absent).
        bundle: PathBuf,
    },
    /// Count pattern occurrences per document group and print a TSV
    /// frequency table.
    Freq {
        /// Bundle directory.
        bundle: PathBuf,
        /// Either a single feature key `space:label.name`, or an edge
        /// pattern `relkey=value,motherkey,daughterkey`.
        #[arg(long)]
        pattern: String,
        /// Feature key whose values partition the text into documents.
        #[arg(long = "group-by")]
        group_by: String,
        /// List only the N most frequent patterns (totals still cover
        /// all patterns).
        #[arg(long)]
        top: Option<usize>,
    },
    /// Write a presence/absence matrix (CSV) and a document-similarity
    /// graph (GEXF).
    Cooccur {
        /// Bundle directory.
        bundle: PathBuf,
        /// Feature key identifying items (e.g. lexemes).
        #[arg(long)]
        items: String,
        /// Feature key identifying documents.
        #[arg(long)]
        docs: String,
        /// Output CSV file.
        #[arg(long)]
        csv: PathBuf,
        /// Output GEXF file.
        #[arg(long)]
        gexf: PathBuf,
    },
    /// Build a treebank from a bundle and write it to a file.
    Trees {
        /// Bundle directory.
        bundle: PathBuf,
        /// TOML file naming the sentence/constituent/pos feature keys.
        #[arg(long)]
        cfg: PathBuf,
        /// Output format.
        #[arg(long, value_enum)]
        format: TreeFormat,
        /// Output file.
        #[arg(short, long)]
        out: PathBuf,
        /// Fail (exit 1) on an inconsistent hierarchy instead of
        /// skipping the offending sentence.
        #[arg(long)]
        strict: bool,
    },
    /// Extract maximal common tree fragments from a discbracket file
    /// and write a count/fragment TSV.
    Fragments {
        /// Input file, one discbracket tree per line.
        treefile: PathBuf,
        /// Output TSV file.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Score predicted trees against gold trees (labelled precision,
    /// recall, f1 and exact match).
    Score {
        /// Gold discbracket file.
        gold: PathBuf,
        /// Predicted discbracket file.
        pred: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeFormat {
    /// One bracketed tree per line.
    Discbracket,
    /// Negra-style export blocks.
    Export,
}

/// Failures split by exit code: analysis-level findings (1) versus
/// input and format errors (2).
enum Failure {
    Analysis(String),
    Input(String),
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<bundle::BundleError> for Failure {
    fn from(e: bundle::BundleError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<corpus::CompileError> for Failure {
    fn from(e: corpus::CompileError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<FabricError> for Failure {
    fn from(e: FabricError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<InvalidPatternSpec> for Failure {
    fn from(e: InvalidPatternSpec) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(msg: String) -> Self {
        Failure::Input(msg)
    }
}

impl From<TreebankError> for Failure {
    fn from(e: TreebankError) -> Self {
        match e {
            TreebankError::InconsistentHierarchy { .. }
            | TreebankError::Alignment(_)
            | TreebankError::TooManyNodes(_) => Failure::Analysis(e.to_string()),
            TreebankError::Discbracket { .. }
            | TreebankError::BadTree { .. }
            | TreebankError::Fabric(_) => Failure::Input(e.to_string()),
        }
    }
}

impl From<FragmentError> for Failure {
    fn from(e: FragmentError) -> Self {
        Failure::Analysis(e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Analysis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// A bundle path that does not exist as given is retried under
/// $LAFFAB_CACHE before being handed to the loader unchanged.
fn resolve_bundle_dir(arg: &Path) -> PathBuf {
    if arg.exists() {
        return arg.to_path_buf();
    }
    if let Some(cache) = std::env::var_os("LAFFAB_CACHE") {
        let candidate = Path::new(&cache).join(arg);
        if candidate.exists() {
            return candidate;
        }
    }
    arg.to_path_buf()
}

fn load_bundle<I>(dir: &Path, keys: I) -> Result<CompiledCorpus, Failure>
where
    I: IntoIterator<Item = FeatureKey>,
{
    Ok(bundle::load(
        &resolve_bundle_dir(dir),
        &FeatureSelection::keys(keys),
    )?)
}

fn read_trees(path: &Path) -> Result<Vec<Tree>, Failure> {
    let text = std::fs::read_to_string(path)?;
    let mut trees = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        trees.push(from_discbracket(line, &(i + 1).to_string())?);
    }
    Ok(trees)
}

/// On-disk shape of the `trees --cfg` TOML file.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TreesCfgFile {
    /// Feature key marking sentence nodes, `space:label.name`.
    sentence: String,
    /// Feature key labelling constituent nodes.
    constituent: String,
    /// Feature key giving word part-of-speech tags.
    pos: String,
    /// "containment" (default) or "edges".
    mode: Option<String>,
    /// Only follow edges carrying this feature value (edges mode).
    edge_filter: Option<EdgeFilterCfg>,
    /// "skip" (default) or "error" on an inconsistent hierarchy.
    on_inconsistent: Option<String>,
    /// Optional feature key overriding the sentence id.
    sentence_id: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFilterCfg {
    key: String,
    value: String,
}

fn build_cfg_from_file(path: &Path, strict: bool) -> Result<TreeBuildCfg, Failure> {
    let text = std::fs::read_to_string(path)?;
    let file: TreesCfgFile =
        toml::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;

    let mode = match file.mode.as_deref().unwrap_or("containment") {
        "containment" => {
            if file.edge_filter.is_some() {
                return Err(Failure::Input(
                    "edge_filter requires mode = \"edges\"".into(),
                ));
            }
            ParentMode::Containment
        }
        "edges" => ParentMode::Edges {
            filter: file
                .edge_filter
                .map(|f| Ok::<_, Failure>((parse_key(&f.key)?, f.value)))
                .transpose()?,
        },
        other => {
            return Err(Failure::Input(format!(
                "unknown mode {other:?} (expected \"containment\" or \"edges\")"
            )))
        }
    };
    let on_inconsistent = if strict {
        OnInconsistent::Error
    } else {
        match file.on_inconsistent.as_deref().unwrap_or("skip") {
            "skip" => OnInconsistent::Skip,
            "error" => OnInconsistent::Error,
            other => {
                return Err(Failure::Input(format!(
                    "unknown on_inconsistent {other:?} (expected \"skip\" or \"error\")"
                )))
            }
        }
    };
    Ok(TreeBuildCfg {
        sentence: parse_key(&file.sentence)?,
        constituent: parse_key(&file.constituent)?,
        pos: parse_key(&file.pos)?,
        mode,
        on_inconsistent,
        sentence_id: file.sentence_id.as_deref().map(parse_key).transpose()?,
    })
}

fn cfg_keys(cfg: &TreeBuildCfg) -> BTreeSet<FeatureKey> {
    let mut keys = BTreeSet::from([
        cfg.sentence.clone(),
        cfg.constituent.clone(),
        cfg.pos.clone(),
    ]);
    if let ParentMode::Edges {
        filter: Some((key, _)),
    } = &cfg.mode
    {
        keys.insert(key.clone());
    }
    if let Some(key) = &cfg.sentence_id {
        keys.insert(key.clone());
    }
    keys
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Compile { header, out } => {
            let graph = parser::parse(&header)?;
            let compiled = corpus::compile(&graph)?;
            bundle::save(&compiled, &out)?;
            println!(
                "nodes {}, edges {}, features {}",
                compiled.node_count(),
                compiled.edge_count(),
                compiled.loaded_feature_tuples()
            );
        }
        Cmd::Info { bundle } => {
            let dir = resolve_bundle_dir(&bundle);
            let manifest = read_manifest(&dir)?;
            println!("nodes {}", manifest.nodes);
            println!("edges {}", manifest.edges);
            println!("regions {}", manifest.regions);
            println!("features {}", manifest.features);
            let mut keys: Vec<String> =
                manifest.feature_keys().map(|k| k.to_string()).collect();
            keys.sort();
            for key in keys {
                println!("key {key}");
            }
        }
        Cmd::Freq {
            bundle,
            pattern,
            group_by,
            top,
        } => {
            let spec = PatternSpec::parse(&pattern)?;
            let group_key = parse_key(&group_by)?;
            let mut keys = BTreeSet::from([group_key.clone()]);
            match &spec {
                PatternSpec::Single(key) => {
                    keys.insert(key.clone());
                }
                PatternSpec::EdgePair {
                    relation,
                    mother,
                    daughter,
                    ..
                } => {
                    keys.extend([relation.clone(), mother.clone(), daughter.clone()]);
                }
            }
            let c = load_bundle(&bundle, keys)?;
            let mut table = compute_freq(&c, &spec, &group_key)?;
            if let Some(n) = top {
                table = table.top(n);
            }
            print!("{}", table.to_tsv());
        }
        Cmd::Cooccur {
            bundle,
            items,
            docs,
            csv,
            gexf,
        } => {
            let items_key = parse_key(&items)?;
            let docs_key = parse_key(&docs)?;
            let c = load_bundle(&bundle, [items_key.clone(), docs_key.clone()])?;
            let matrix = compute_cooccurrence(&c, &items_key, &docs_key)?;
            std::fs::write(&csv, matrix.to_csv())?;
            std::fs::write(&gexf, matrix.to_gexf())?;
        }
        Cmd::Trees {
            bundle,
            cfg,
            format,
            out,
            strict,
        } => {
            let build_cfg = build_cfg_from_file(&cfg, strict)?;
            let c = load_bundle(&bundle, cfg_keys(&build_cfg))?;
            let trees = build_trees(&c, &build_cfg)?;
            let mut text = String::new();
            match format {
                TreeFormat::Discbracket => {
                    for t in &trees {
                        text.push_str(&to_discbracket(t));
                        text.push('\n');
                    }
                }
                TreeFormat::Export => {
                    for t in &trees {
                        text.push_str(&to_export(t)?);
                    }
                }
            }
            std::fs::write(&out, text)?;
        }
        Cmd::Fragments { treefile, out } => {
            let trees = read_trees(&treefile)?;
            let table = extract_corpus(&trees)?;
            std::fs::write(&out, table.to_tsv())?;
        }
        Cmd::Score { gold, pred } => {
            let gold = read_trees(&gold)?;
            let pred = read_trees(&pred)?;
            let scores = score(&gold, &pred, &ScoreCfg::default())?;
            println!("{}", scores.summary_line());
        }
    }
    Ok(())
}
