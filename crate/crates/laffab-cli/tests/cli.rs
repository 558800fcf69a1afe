//! End-to-end tests of the `laffab` binary: every subcommand, the
//! exit-code contract, and the LAFFAB_CACHE lookup.

use laffab::fixtures::{self, anno, node, on_node, region};
use laffab::model::Graph;
use laffab::model::PrimaryData;
use std::path::{Path, PathBuf};
use std::process::Command;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn laffab<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    run_laffab(args, |cmd| cmd)
}

fn run_laffab<I, S>(args: I, configure: impl FnOnce(&mut Command) -> &mut Command) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_laffab"));
    cmd.args(args);
    configure(&mut cmd);
    let out = cmd.output().expect("binary runs");
    Output {
        code: out.status.code().expect("no signal"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Writes `g` as an XML resource under `dir` and compiles it to a
/// bundle with the binary, asserting success.
fn compile_graph(g: &Graph, dir: &Path) -> PathBuf {
    let resource = dir.join("resource");
    std::fs::create_dir_all(&resource).unwrap();
    let header = fixtures::write_resource(g, &resource).unwrap();
    let bundle = dir.join("bundle");
    let out = laffab([
        "compile".as_ref(),
        header.as_os_str(),
        "-o".as_ref(),
        bundle.as_os_str(),
    ]);
    assert_eq!(out.code, 0, "compile failed: {}", out.stderr);
    bundle
}

fn compile_toy(dir: &Path) -> PathBuf {
    compile_graph(&fixtures::toy_graph(), dir)
}

fn toy_trees_cfg(dir: &Path) -> PathBuf {
    let cfg = dir.join("trees.toml");
    std::fs::write(
        &cfg,
        "sentence = \"toy:sentence.typ\"\nconstituent = \"toy:phrase.typ\"\npos = \"toy:word.pos\"\n",
    )
    .unwrap();
    cfg
}

const TOY_TREE: &str = "(S (dt 0=the) (VP (n 1=cat) (vb 2=sat)))";

/// Two constituents overlap without nesting, so containment building
/// cannot form a tree.
fn inconsistent_graph() -> Graph {
    let mut g = Graph::new(PrimaryData::new("a b c".to_string()));
    for (i, (s, e)) in [(0u32, 1u32), (2, 3), (4, 5)].iter().enumerate() {
        g.regions.push(region(&format!("r{i}"), *s, *e));
    }
    g.nodes.push(node("s", &["r0", "r1", "r2"]));
    g.nodes.push(node("w0", &["r0"]));
    g.nodes.push(node("w1", &["r1"]));
    g.nodes.push(node("w2", &["r2"]));
    g.nodes.push(node("x1", &["r0", "r1"]));
    g.nodes.push(node("x2", &["r1", "r2"]));
    g.annotations
        .push(anno("a1", "toy", "sentence", on_node("s"), &[("typ", "S")]));
    for (i, pos) in ["dt", "n", "vb"].iter().enumerate() {
        g.annotations.push(anno(
            &format!("aw{i}"),
            "toy",
            "word",
            on_node(&format!("w{i}")),
            &[("pos", pos)],
        ));
    }
    g.annotations
        .push(anno("ax1", "toy", "phrase", on_node("x1"), &[("typ", "NP")]));
    g.annotations
        .push(anno("ax2", "toy", "phrase", on_node("x2"), &[("typ", "VP")]));
    g
}

#[test]
fn compile_prints_count_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let resource = tmp.path().join("resource");
    std::fs::create_dir_all(&resource).unwrap();
    let header = fixtures::write_resource(&fixtures::toy_graph(), &resource).unwrap();
    let bundle = tmp.path().join("bundle");
    let out = laffab([
        "compile".as_ref(),
        header.as_os_str(),
        "-o".as_ref(),
        bundle.as_os_str(),
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(out.stdout, "nodes 5, edges 4, features 9\n");
    assert!(bundle.join("manifest").is_file());
}

#[test]
fn compile_rejects_malformed_xml_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("primary.txt"), "the cat sat").unwrap();
    std::fs::write(tmp.path().join("bad.xml"), "<graph>\n<node </graph>\n").unwrap();
    let header = tmp.path().join("resource.hdr");
    std::fs::write(
        &header,
        "<resourceHeader><primaryData loc=\"primary.txt\"/>\
         <annotationFiles><annotationFile loc=\"bad.xml\"/></annotationFiles>\
         </resourceHeader>",
    )
    .unwrap();
    let out = laffab([
        "compile".as_ref(),
        header.as_os_str(),
        "-o".as_ref(),
        tmp.path().join("bundle").as_os_str(),
    ]);
    assert_eq!(out.code, 2);
    assert!(
        out.stderr.contains("bad.xml:2:") && out.stderr.contains("malformed XML"),
        "stderr: {}",
        out.stderr
    );
}

#[test]
fn compile_missing_header_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = laffab([
        "compile".as_ref(),
        tmp.path().join("absent.hdr").as_os_str(),
        "-o".as_ref(),
        tmp.path().join("bundle").as_os_str(),
    ]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("io error"), "stderr: {}", out.stderr);
}

#[test]
fn info_lists_counts_and_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = compile_toy(tmp.path());
    let out = laffab(["info".as_ref(), bundle.as_os_str()]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout,
        "nodes 5\nedges 4\nregions 3\nfeatures 9\n\
         key toy:phrase.typ\nkey toy:rel.kind\nkey toy:sentence.typ\n\
         key toy:word.lexeme\nkey toy:word.pos\n"
    );
}

#[test]
fn freq_prints_grouped_tsv() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = compile_toy(tmp.path());
    let out = laffab([
        "freq".as_ref(),
        bundle.as_os_str(),
        "--pattern".as_ref(),
        "toy:word.pos".as_ref(),
        "--group-by".as_ref(),
        "toy:sentence.typ".as_ref(),
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(
        out.stdout,
        "pattern\tS\tS%\ttotal\ttotal%\n\
         dt\t1\t33.33\t1\t33.33\n\
         n\t1\t33.33\t1\t33.33\n\
         vb\t1\t33.33\t1\t33.33\n\
         TOTAL\t3\t100.00\t3\t100.00\n"
    );
}

#[test]
fn freq_top_keeps_grand_totals() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = compile_toy(tmp.path());
    let out = laffab([
        "freq".as_ref(),
        bundle.as_os_str(),
        "--pattern".as_ref(),
        "toy:word.pos".as_ref(),
        "--group-by".as_ref(),
        "toy:sentence.typ".as_ref(),
        "--top".as_ref(),
        "1".as_ref(),
    ]);
    assert_eq!(out.code, 0);
    // Only one row is listed, but percentages still divide by the
    // grand total over all patterns.
    assert_eq!(
        out.stdout,
        "pattern\tS\tS%\ttotal\ttotal%\n\
         dt\t1\t33.33\t1\t33.33\n\
         TOTAL\t1\t33.33\t1\t33.33\n"
    );
}

#[test]
fn freq_unknown_key_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = compile_toy(tmp.path());
    let out = laffab([
        "freq".as_ref(),
        bundle.as_os_str(),
        "--pattern".as_ref(),
        "toy:word.nope".as_ref(),
        "--group-by".as_ref(),
        "toy:sentence.typ".as_ref(),
    ]);
    assert_eq!(out.code, 2);
    assert!(
        out.stderr.contains("toy:word.nope"),
        "stderr: {}",
        out.stderr
    );
}

#[test]
fn cooccur_writes_matrix_and_graph() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = compile_graph(&fixtures::cooccurrence_graph(), tmp.path());
    let csv = tmp.path().join("matrix.csv");
    let gexf = tmp.path().join("books.gexf");
    let out = laffab([
        "cooccur".as_ref(),
        bundle.as_os_str(),
        "--items".as_ref(),
        "x:word.lex".as_ref(),
        "--docs".as_ref(),
        "x:doc.book".as_ref(),
        "--csv".as_ref(),
        csv.as_os_str(),
        "--gexf".as_ref(),
        gexf.as_os_str(),
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(out.stdout, "");
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("item,gen,exo\n"), "csv: {csv_text}");
    assert!(csv_text.contains("alpha,1,1\n"));
    let gexf_text = std::fs::read_to_string(&gexf).unwrap();
    assert!(
        gexf_text.contains("<edge id=\"0\" source=\"0\" target=\"1\" weight=\"3\"/>"),
        "gexf: {gexf_text}"
    );
}

#[test]
fn trees_discbracket_writes_one_line_per_sentence() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = compile_toy(tmp.path());
    let cfg = toy_trees_cfg(tmp.path());
    let out_file = tmp.path().join("trees.dbr");
    let out = laffab([
        "trees".as_ref(),
        bundle.as_os_str(),
        "--cfg".as_ref(),
        cfg.as_os_str(),
        "--format".as_ref(),
        "discbracket".as_ref(),
        "-o".as_ref(),
        out_file.as_os_str(),
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(
        std::fs::read_to_string(&out_file).unwrap(),
        format!("{TOY_TREE}\n")
    );
}

#[test]
fn trees_export_writes_negra_blocks() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = compile_toy(tmp.path());
    let cfg = toy_trees_cfg(tmp.path());
    let out_file = tmp.path().join("trees.export");
    let out = laffab([
        "trees".as_ref(),
        bundle.as_os_str(),
        "--cfg".as_ref(),
        cfg.as_os_str(),
        "--format".as_ref(),
        "export".as_ref(),
        "-o".as_ref(),
        out_file.as_os_str(),
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(
        std::fs::read_to_string(&out_file).unwrap(),
        "#BOS n5\n\
         the\tdt\t--\t--\t501\n\
         cat\tn\t--\t--\t500\n\
         sat\tvb\t--\t--\t500\n\
         #500\tVP\t--\t--\t501\n\
         #501\tS\t--\t--\t0\n\
         #EOS n5\n"
    );
}

#[test]
fn trees_strict_flags_inconsistent_hierarchy() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = compile_graph(&inconsistent_graph(), tmp.path());
    let cfg = toy_trees_cfg(tmp.path());
    let out_file = tmp.path().join("trees.dbr");

    let strict = laffab([
        "trees".as_ref(),
        bundle.as_os_str(),
        "--cfg".as_ref(),
        cfg.as_os_str(),
        "--format".as_ref(),
        "discbracket".as_ref(),
        "-o".as_ref(),
        out_file.as_os_str(),
        "--strict".as_ref(),
    ]);
    assert_eq!(strict.code, 1, "stderr: {}", strict.stderr);
    assert!(
        strict.stderr.contains("inconsistent hierarchy") || strict.stderr.contains("overlap"),
        "stderr: {}",
        strict.stderr
    );

    // Without --strict the offending sentence is skipped.
    let lenient = laffab([
        "trees".as_ref(),
        bundle.as_os_str(),
        "--cfg".as_ref(),
        cfg.as_os_str(),
        "--format".as_ref(),
        "discbracket".as_ref(),
        "-o".as_ref(),
        out_file.as_os_str(),
    ]);
    assert_eq!(lenient.code, 0, "stderr: {}", lenient.stderr);
    assert_eq!(std::fs::read_to_string(&out_file).unwrap(), "");
}

#[test]
fn score_identity_prints_all_hundreds() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("gold.dbr");
    std::fs::write(&file, format!("{TOY_TREE}\n")).unwrap();
    let out = laffab(["score".as_ref(), file.as_os_str(), file.as_os_str()]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(
        out.stdout,
        "precision 100.0 recall 100.0 f1 100.0 exact-match 100.0\n"
    );
}

#[test]
fn score_misaligned_words_is_an_analysis_error() {
    let tmp = tempfile::tempdir().unwrap();
    let gold = tmp.path().join("gold.dbr");
    let pred = tmp.path().join("pred.dbr");
    std::fs::write(&gold, format!("{TOY_TREE}\n")).unwrap();
    std::fs::write(&pred, "(S (dt 0=a) (VP (n 1=cat) (vb 2=sat)))\n").unwrap();
    let out = laffab([
        "score".as_ref(),
        gold.as_os_str(),
        pred.as_os_str(),
    ]);
    assert_eq!(out.code, 1, "stderr: {}", out.stderr);
    assert!(
        out.stderr.contains("word forms differ"),
        "stderr: {}",
        out.stderr
    );
}

#[test]
fn score_bad_discbracket_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let gold = tmp.path().join("gold.dbr");
    std::fs::write(&gold, "(S (dt 0=the\n").unwrap();
    let out = laffab(["score".as_ref(), gold.as_os_str(), gold.as_os_str()]);
    assert_eq!(out.code, 2, "stderr: {}", out.stderr);
}

#[test]
fn fragments_counts_start_at_two() {
    let tmp = tempfile::tempdir().unwrap();
    let treefile = tmp.path().join("trees.dbr");
    std::fs::write(&treefile, format!("{TOY_TREE}\n{TOY_TREE}\n")).unwrap();
    let out_file = tmp.path().join("fragments.tsv");
    let out = laffab([
        "fragments".as_ref(),
        treefile.as_os_str(),
        "-o".as_ref(),
        out_file.as_os_str(),
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(
        std::fs::read_to_string(&out_file).unwrap(),
        "2\t(S (dt =the) (VP (n =cat) (vb =sat)))\n"
    );
}

#[test]
fn fragments_single_tree_is_an_analysis_error() {
    let tmp = tempfile::tempdir().unwrap();
    let treefile = tmp.path().join("trees.dbr");
    std::fs::write(&treefile, format!("{TOY_TREE}\n")).unwrap();
    let out = laffab([
        "fragments".as_ref(),
        treefile.as_os_str(),
        "-o".as_ref(),
        tmp.path().join("out.tsv").as_os_str(),
    ]);
    assert_eq!(out.code, 1, "stderr: {}", out.stderr);
}

#[test]
fn cache_env_var_resolves_bundle_names() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    std::fs::create_dir_all(&cache).unwrap();
    let resource = tmp.path().join("resource");
    std::fs::create_dir_all(&resource).unwrap();
    let header = fixtures::write_resource(&fixtures::toy_graph(), &resource).unwrap();
    let out = laffab([
        "compile".as_ref(),
        header.as_os_str(),
        "-o".as_ref(),
        cache.join("toy").as_os_str(),
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);

    // `toy` does not exist relative to the working directory, so it is
    // found through LAFFAB_CACHE.
    let workdir = tmp.path().join("elsewhere");
    std::fs::create_dir_all(&workdir).unwrap();
    let out = run_laffab(["info", "toy"], |cmd| {
        cmd.current_dir(&workdir).env("LAFFAB_CACHE", &cache)
    });
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(out.stdout.starts_with("nodes 5\n"), "stdout: {}", out.stdout);

    // Without the variable the same name is an input error.
    let out = run_laffab(["info", "toy"], |cmd| {
        cmd.current_dir(&workdir).env_remove("LAFFAB_CACHE")
    });
    assert_eq!(out.code, 2);
}
