//! Shared fixtures: a small hand-built resource, random graph
//! generators for property tests, and synthetic corpora sized for
//! performance checks. Everything here is deterministic given its seed.

use rand::prelude::*;
use rand::rngs::StdRng;

use crate::model::{
    validate, AnnoTarget, Annotation, EdgeRecord, Graph, NodeRecord, PrimaryData, Region,
};

pub fn region(id: &str, start: u32, end: u32) -> Region {
    Region {
        id: id.into(),
        start,
        end,
    }
}

pub fn node(id: &str, regions: &[&str]) -> NodeRecord {
    NodeRecord {
        id: id.into(),
        regions: regions.iter().map(|r| r.to_string()).collect(),
    }
}

pub fn edge(id: &str, from: &str, to: &str) -> EdgeRecord {
    EdgeRecord {
        id: id.into(),
        from: from.into(),
        to: to.into(),
    }
}

pub fn anno(
    id: &str,
    space: &str,
    label: &str,
    target: AnnoTarget,
    features: &[(&str, &str)],
) -> Annotation {
    Annotation {
        id: id.into(),
        space: space.into(),
        label: label.into(),
        target,
        features: features
            .iter()
            .map(|(n, v)| (n.to_string(), v.to_string()))
            .collect(),
    }
}

pub fn on_node(id: &str) -> AnnoTarget {
    AnnoTarget::Node(id.into())
}

pub fn on_edge(id: &str) -> AnnoTarget {
    AnnoTarget::Edge(id.into())
}

/// Three words, one phrase, one sentence: the smallest resource that
/// exercises regions, multi-region nodes, edges, and both annotation
/// target kinds.
///
/// Text `"the cat sat"`; regions r0=(0,3) r1=(4,7) r2=(8,11); word
/// nodes n1..n3, phrase n4 over r1+r2, sentence n5 over all three;
/// edges n5→n4, n4→n2, n4→n3, n5→n1.
pub fn toy_graph() -> Graph {
    let mut g = Graph::new(PrimaryData::new("the cat sat"));
    g.regions.push(region("r0", 0, 3));
    g.regions.push(region("r1", 4, 7));
    g.regions.push(region("r2", 8, 11));
    g.nodes.push(node("n1", &["r0"]));
    g.nodes.push(node("n2", &["r1"]));
    g.nodes.push(node("n3", &["r2"]));
    g.nodes.push(node("n4", &["r1", "r2"]));
    g.nodes.push(node("n5", &["r0", "r1", "r2"]));
    g.edges.push(edge("e1", "n5", "n4"));
    g.edges.push(edge("e2", "n4", "n2"));
    g.edges.push(edge("e3", "n4", "n3"));
    g.edges.push(edge("e4", "n5", "n1"));
    g.annotations.push(anno(
        "a1",
        "toy",
        "word",
        on_node("n1"),
        &[("pos", "dt"), ("lexeme", "THE")],
    ));
    g.annotations.push(anno(
        "a2",
        "toy",
        "word",
        on_node("n2"),
        &[("pos", "n"), ("lexeme", "CAT")],
    ));
    g.annotations.push(anno(
        "a3",
        "toy",
        "word",
        on_node("n3"),
        &[("pos", "vb"), ("lexeme", "SAT")],
    ));
    g.annotations
        .push(anno("a4", "toy", "phrase", on_node("n4"), &[("typ", "VP")]));
    g.annotations.push(anno(
        "a5",
        "toy",
        "sentence",
        on_node("n5"),
        &[("typ", "S")],
    ));
    g.annotations
        .push(anno("a6", "toy", "rel", on_edge("e1"), &[("kind", "child")]));
    g
}

/// Feature values deliberately include XML-hostile characters so that
/// serialization round-trips are honest.
const VALUE_POOL: &[&str] = &[
    "",
    "v",
    "the",
    "a<b&c",
    "say \"hi\"",
    "it's",
    "x>y",
    "été",
    "中文",
    "sp ace",
    "tab\tand\nnewline",
];

const SPACE_POOL: &[&str] = &["alpha", "beta"];
// Labels are partitioned by target kind so that no feature key ends up
// targeting both nodes and edges (a key compiles to a single column).
const NODE_LABEL_POOL: &[&str] = &["w", "p"];
const EDGE_LABEL_POOL: &[&str] = &["rel", "dep"];
const NAME_POOL: &[&str] = &["f1", "f2", "f3", "f4", "f5"];

/// A random valid graph with up to `max_nodes` nodes and up to
/// `max_tuples` feature tuples. Same seed, same graph.
pub fn random_graph_sized(seed: u64, max_nodes: usize, max_tuples: usize) -> Graph {
    let mut rng = StdRng::seed_from_u64(seed);
    let alphabet: Vec<char> = "abc defgh ijk lmnopé 中ü".chars().collect();
    let text_len = rng.gen_range(0..=200);
    let text: String = (0..text_len)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
        .collect();
    let mut g = Graph::new(PrimaryData::new(text));

    let n_regions = rng.gen_range(0..=120usize);
    for i in 0..n_regions {
        let a = rng.gen_range(0..=text_len) as u32;
        let b = rng.gen_range(0..=text_len) as u32;
        g.regions
            .push(region(&format!("r{i}"), a.min(b), a.max(b)));
    }

    let n_nodes = rng.gen_range(0..=max_nodes);
    for i in 0..n_nodes {
        let mut linked = Vec::new();
        if n_regions > 0 {
            let k = rng.gen_range(0..=3usize.min(n_regions));
            while linked.len() < k {
                let rid = format!("r{}", rng.gen_range(0..n_regions));
                if !linked.contains(&rid) {
                    linked.push(rid);
                }
            }
        }
        let refs: Vec<&str> = linked.iter().map(|s| s.as_str()).collect();
        g.nodes.push(node(&format!("n{i}"), &refs));
    }

    let n_edges = if n_nodes == 0 {
        0
    } else {
        rng.gen_range(0..=2 * n_nodes)
    };
    for i in 0..n_edges {
        let from = format!("n{}", rng.gen_range(0..n_nodes));
        let to = format!("n{}", rng.gen_range(0..n_nodes));
        g.edges.push(edge(&format!("e{i}"), &from, &to));
    }

    let mut assigned = std::collections::HashSet::new();
    let mut tuples = 0usize;
    let mut anno_idx = 0usize;
    let tuple_target = rng.gen_range(0..=max_tuples);
    while tuples < tuple_target && (n_nodes > 0 || n_edges > 0) {
        let on_edge_target = n_edges > 0 && (n_nodes == 0 || rng.gen_bool(0.2));
        let (target, label) = if on_edge_target {
            (
                AnnoTarget::Edge(format!("e{}", rng.gen_range(0..n_edges))),
                EDGE_LABEL_POOL[rng.gen_range(0..EDGE_LABEL_POOL.len())],
            )
        } else {
            (
                AnnoTarget::Node(format!("n{}", rng.gen_range(0..n_nodes))),
                NODE_LABEL_POOL[rng.gen_range(0..NODE_LABEL_POOL.len())],
            )
        };
        let space = SPACE_POOL[rng.gen_range(0..SPACE_POOL.len())];
        let mut features = Vec::new();
        for _ in 0..rng.gen_range(1..=4usize) {
            if tuples + features.len() >= tuple_target {
                break;
            }
            let name = NAME_POOL[rng.gen_range(0..NAME_POOL.len())];
            let slot = (
                space,
                label,
                name,
                matches!(target, AnnoTarget::Node(_)),
                target.id().to_owned(),
            );
            if assigned.insert(slot) {
                let value = VALUE_POOL[rng.gen_range(0..VALUE_POOL.len())];
                features.push((name.to_string(), value.to_string()));
            }
        }
        if features.is_empty() {
            // All candidate slots for this target were taken; a few misses
            // in a row means the space is saturated.
            anno_idx += 1;
            if anno_idx > tuple_target * 4 + 64 {
                break;
            }
            continue;
        }
        tuples += features.len();
        g.annotations.push(Annotation {
            id: format!("a{}", g.annotations.len()),
            space: space.into(),
            label: label.into(),
            target,
            features,
        });
        anno_idx += 1;
    }

    debug_assert!(validate(&g).is_empty(), "fixture generated invalid graph");
    g
}

/// Default-size random graph for round-trip property tests.
pub fn random_graph(seed: u64) -> Graph {
    random_graph_sized(seed, 1000, 5000)
}

/// A regular corpus shaped like tokenized text: one word, region and
/// node per index, chain edges, and `n_tuples` feature values spread
/// evenly over the nodes. Used for load-time and size measurements.
pub fn synthetic_graph(n_nodes: usize, n_tuples: usize, seed: u64) -> Graph {
    assert!(n_nodes > 0 || n_tuples == 0);
    let mut rng = StdRng::seed_from_u64(seed);

    let mut text = String::with_capacity(n_nodes * 8);
    let mut anchors = Vec::with_capacity(n_nodes);
    let mut offset = 0u32;
    for i in 0..n_nodes {
        if i > 0 {
            text.push(' ');
            offset += 1;
        }
        let w = format!("w{i}");
        anchors.push((offset, offset + w.len() as u32));
        text.push_str(&w);
        offset += w.len() as u32;
    }

    let mut g = Graph::new(PrimaryData::new(text));
    for (i, (start, end)) in anchors.iter().enumerate() {
        g.regions.push(region(&format!("r{i}"), *start, *end));
    }
    for i in 0..n_nodes {
        g.nodes.push(node(&format!("n{i}"), &[&format!("r{i}")]));
    }
    for i in 0..n_nodes.saturating_sub(1) {
        g.edges
            .push(edge(&format!("e{i}"), &format!("n{i}"), &format!("n{}", i + 1)));
    }

    let base = if n_nodes == 0 { 0 } else { n_tuples / n_nodes };
    let extra = if n_nodes == 0 { 0 } else { n_tuples % n_nodes };
    for i in 0..n_nodes {
        let k = base + usize::from(i < extra);
        if k == 0 {
            continue;
        }
        let features = (0..k)
            .map(|j| (format!("f{j}"), format!("v{}", rng.gen_range(0..100u32))))
            .collect();
        g.annotations.push(Annotation {
            id: format!("a{i}"),
            space: "syn".into(),
            label: "word".into(),
            target: AnnoTarget::Node(format!("n{i}")),
            features,
        });
    }

    debug_assert_eq!(g.feature_tuple_count(), n_tuples);
    g
}

/// Escapes a string for use in an XML attribute value. Whitespace
/// control characters become numeric references so that they survive
/// attribute-value normalization on the way back in.
fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    out
}

/// Writes a graph to `dir` as a parseable resource — `primary.txt`,
/// a single `annotations.xml`, and a `resource.hdr` naming both — and
/// returns the header path. Ids must be whitespace-free (they are
/// space-joined in link targets).
pub fn write_resource(g: &Graph, dir: &std::path::Path) -> std::io::Result<std::path::PathBuf> {
    use std::fmt::Write as _;

    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("primary.txt"), g.primary.text.as_bytes())?;

    let mut xml = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<graph>\n");
    for r in &g.regions {
        let _ = writeln!(
            xml,
            "  <region xml:id=\"{}\" anchors=\"{} {}\"/>",
            xml_escape(&r.id),
            r.start,
            r.end
        );
    }
    for n in &g.nodes {
        if n.regions.is_empty() {
            let _ = writeln!(xml, "  <node xml:id=\"{}\"/>", xml_escape(&n.id));
        } else {
            let _ = writeln!(
                xml,
                "  <node xml:id=\"{}\"><link targets=\"{}\"/></node>",
                xml_escape(&n.id),
                xml_escape(&n.regions.join(" "))
            );
        }
    }
    for e in &g.edges {
        let _ = writeln!(
            xml,
            "  <edge xml:id=\"{}\" from=\"{}\" to=\"{}\"/>",
            xml_escape(&e.id),
            xml_escape(&e.from),
            xml_escape(&e.to)
        );
    }
    for a in &g.annotations {
        let open = format!(
            "  <a xml:id=\"{}\" label=\"{}\" ref=\"{}\" as=\"{}\"",
            xml_escape(&a.id),
            xml_escape(&a.label),
            xml_escape(a.target.id()),
            xml_escape(&a.space)
        );
        if a.features.is_empty() {
            let _ = writeln!(xml, "{open}/>");
        } else {
            let _ = writeln!(xml, "{open}>");
            xml.push_str("    <fs>\n");
            for (name, value) in &a.features {
                let _ = writeln!(
                    xml,
                    "      <f name=\"{}\" value=\"{}\"/>",
                    xml_escape(name),
                    xml_escape(value)
                );
            }
            xml.push_str("    </fs>\n  </a>\n");
        }
    }
    xml.push_str("</graph>\n");
    std::fs::write(dir.join("annotations.xml"), xml.as_bytes())?;

    let mut spaces: Vec<&str> = Vec::new();
    for a in &g.annotations {
        if !spaces.contains(&a.space.as_str()) {
            spaces.push(&a.space);
        }
    }
    let mut header = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<resourceHeader>\n");
    header.push_str("  <primaryData loc=\"primary.txt\"/>\n");
    header.push_str("  <annotationSpaces>\n");
    for s in spaces {
        let _ = writeln!(header, "    <annotationSpace name=\"{}\"/>", xml_escape(s));
    }
    header.push_str("  </annotationSpaces>\n");
    header.push_str("  <annotationFiles>\n");
    header.push_str("    <annotationFile loc=\"annotations.xml\"/>\n");
    header.push_str("  </annotationFiles>\n</resourceHeader>\n");
    let header_path = dir.join("resource.hdr");
    std::fs::write(&header_path, header.as_bytes())?;
    Ok(header_path)
}

const PHRASE_LABELS: &[&str] = &["S", "NP", "VP", "PP", "C"];
const POS_TAGS: &[&str] = &["dt", "n", "vb", "aj"];
const FORMS: &[&str] = &["a", "b", "c", "d", "the", "cat"];

/// A random tree with at most 8 internal nodes, possibly containing
/// discontinuous constituents and the occasional bare word leaf
/// directly under a phrase. Deterministic per seed.
pub fn random_tree(seed: u64) -> crate::treebank::Tree {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x7452_4545);
    let n_words = rng.gen_range(1..=4usize);
    let words: Vec<(String, String)> = (0..n_words)
        .map(|_| {
            (
                FORMS.choose(&mut rng).unwrap().to_string(),
                POS_TAGS.choose(&mut rng).unwrap().to_string(),
            )
        })
        .collect();
    let mut budget = 8usize;
    let positions: Vec<usize> = (0..n_words).collect();
    let root = random_tree_node(&positions, &words, &mut budget, &mut rng, true);
    let root = match root {
        crate::treebank::Child::Node(n) => n,
        // A bare leaf cannot be a root; wrap it in a preterminal.
        crate::treebank::Child::Leaf(p) => crate::treebank::TreeNode {
            label: words[p].1.clone(),
            children: vec![crate::treebank::Child::Leaf(p)],
        },
    };
    let mut tree = crate::treebank::Tree {
        sentence_id: format!("t{seed}"),
        words,
        root,
    };
    // Discbracket recovers a word's tag from the node directly above
    // its leaf, so the stored tags must agree with the structure.
    fn align_tags(node: &crate::treebank::TreeNode, words: &mut [(String, String)]) {
        for child in &node.children {
            match child {
                crate::treebank::Child::Leaf(p) => words[*p].1 = node.label.clone(),
                crate::treebank::Child::Node(n) => align_tags(n, words),
            }
        }
    }
    align_tags(&tree.root.clone(), &mut tree.words);
    debug_assert!(crate::treebank::check_tree(&tree).is_ok());
    tree
}

fn random_tree_node(
    positions: &[usize],
    words: &[(String, String)],
    budget: &mut usize,
    rng: &mut StdRng,
    is_root: bool,
) -> crate::treebank::Child {
    use crate::treebank::{Child, TreeNode};
    if positions.len() == 1 {
        let p = positions[0];
        // Below the root a word may hang directly off its parent.
        if !is_root && *budget == 0 || (!is_root && rng.gen_bool(0.25)) {
            return Child::Leaf(p);
        }
        *budget = budget.saturating_sub(1);
        let preterminal = TreeNode {
            label: words[p].1.clone(),
            children: vec![Child::Leaf(p)],
        };
        // Occasional unary phrase above a preterminal.
        if *budget > 0 && rng.gen_bool(0.2) {
            *budget -= 1;
            return Child::Node(TreeNode {
                label: PHRASE_LABELS.choose(rng).unwrap().to_string(),
                children: vec![Child::Node(preterminal)],
            });
        }
        return Child::Node(preterminal);
    }
    // Partition the positions into 2..=3 nonempty groups. Groups are
    // built by random assignment, so a group's positions need not be
    // contiguous: that is where discontinuity comes from.
    let n_groups = rng.gen_range(2..=positions.len().min(3));
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
    for (i, &p) in positions.iter().enumerate() {
        if i < n_groups {
            groups[i].push(p);
        } else {
            groups.choose_mut(rng).unwrap().push(p);
        }
    }
    // Keep each group sorted and order groups by their first position.
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    *budget = budget.saturating_sub(1);
    let mut children: Vec<Child> = groups
        .iter()
        .map(|g| random_tree_node(g, words, budget, rng, false))
        .collect();
    children.sort_by_key(|c| match c {
        Child::Leaf(p) => *p,
        Child::Node(n) => n.min_position(),
    });
    Child::Node(TreeNode {
        label: if is_root {
            "S".to_string()
        } else {
            PHRASE_LABELS.choose(rng).unwrap().to_string()
        },
        children,
    })
}

/// A graph encoding `n_sentences` random trees as stand-off
/// annotations, in the layout [`crate::treebank::build_trees`] expects:
/// sentence nodes carry `tb:sentence.typ`, constituents
/// `tb:phrase.typ`, words `tb:word.pos`. Constituent coverage is the
/// union of its words' regions, so discontinuous constituents keep
/// their gaps uncovered. Returns the graph together with the trees it
/// encodes (with sentence ids matching the sentence node ids).
pub fn random_treebank_graph(seed: u64, n_sentences: usize) -> (Graph, Vec<crate::treebank::Tree>) {
    use crate::treebank::{Child, Tree, TreeNode};

    // Phase 1: generate the trees in the exact shape the builder can
    // reproduce: every word under a preterminal, a non-preterminal
    // root, and at least one phrase node somewhere in the corpus so
    // every configured feature key exists.
    fn wrap_bare(node: &TreeNode, words: &[(String, String)]) -> TreeNode {
        TreeNode {
            label: node.label.clone(),
            children: node
                .children
                .iter()
                .map(|c| match c {
                    Child::Leaf(p) => {
                        if node.children.len() == 1 {
                            // Already a preterminal.
                            Child::Leaf(*p)
                        } else {
                            Child::Node(TreeNode {
                                label: words[*p].1.clone(),
                                children: vec![Child::Leaf(*p)],
                            })
                        }
                    }
                    Child::Node(n) => Child::Node(wrap_bare(n, words)),
                })
                .collect(),
        }
    }
    fn has_phrase(node: &TreeNode, is_root: bool) -> bool {
        (!is_root && !node.is_preterminal())
            || node.children.iter().any(|c| match c {
                Child::Node(n) => has_phrase(n, false),
                Child::Leaf(_) => false,
            })
    }
    let mut trees: Vec<Tree> = Vec::new();
    for s in 0..n_sentences {
        let mut tree = random_tree(seed.wrapping_mul(1000).wrapping_add(s as u64));
        tree.root = wrap_bare(&tree.root, &tree.words);
        if tree.root.is_preterminal() {
            tree.root = TreeNode {
                label: "S".into(),
                children: vec![Child::Node(tree.root)],
            };
        }
        tree.sentence_id = format!("s{s}");
        trees.push(tree);
    }
    if !trees.iter().any(|t| has_phrase(&t.root, true)) {
        // Plant a unary phrase over the first tree's first child.
        let first = trees[0].root.children.remove(0);
        trees[0].root.children.insert(
            0,
            Child::Node(TreeNode {
                label: "NP".into(),
                children: vec![first],
            }),
        );
    }

    // Phase 2: encode the trees as a stand-off graph.
    let mut g = Graph::default();
    let mut text = String::new();
    let mut next_anno = 0usize;

    for tree in &trees {
        let sid = tree.sentence_id.clone();
        // One region per word, separated by single spaces; sentences
        // separated by " | ".
        if !text.is_empty() {
            text.push_str(" | ");
        }
        let mut word_regions: Vec<String> = Vec::new();
        for (p, (form, _)) in tree.words.iter().enumerate() {
            if p > 0 {
                text.push(' ');
            }
            let start = text.chars().count() as u32;
            text.push_str(form);
            let end = text.chars().count() as u32;
            let rid = format!("{sid}r{p}");
            g.regions.push(region(&rid, start, end));
            word_regions.push(rid);
        }

        // Sentence node first, then constituents in pre-order (so outer
        // equal-coverage nodes are declared before inner ones), then
        // words.
        let all: Vec<&str> = word_regions.iter().map(String::as_str).collect();
        g.nodes.push(node(&sid, &all));
        g.annotations.push(anno(
            &format!("ta{next_anno}"),
            "tb",
            "sentence",
            on_node(&sid),
            &[("typ", &tree.root.label)],
        ));
        next_anno += 1;

        // Emit non-root internal nodes. Preterminals become word nodes;
        // other constituents become phrase nodes.
        struct Emit<'g> {
            g: &'g mut Graph,
            sid: String,
            word_regions: Vec<String>,
            next_anno: usize,
            next_cons: usize,
        }
        impl Emit<'_> {
            fn node_of(&mut self, n: &TreeNode, words: &[(String, String)]) {
                if n.is_preterminal() {
                    let Child::Leaf(p) = n.children[0] else {
                        unreachable!()
                    };
                    let wid = format!("{}w{p}", self.sid);
                    let rid = self.word_regions[p].clone();
                    self.g.nodes.push(node(&wid, &[&rid]));
                    self.g.annotations.push(anno(
                        &format!("ta{}", self.next_anno),
                        "tb",
                        "word",
                        on_node(&wid),
                        &[("pos", &words[p].1)],
                    ));
                    self.next_anno += 1;
                    return;
                }
                let cid = format!("{}c{}", self.sid, self.next_cons);
                self.next_cons += 1;
                let yielded = n.yield_set();
                let regions: Vec<String> = yielded
                    .iter()
                    .map(|&p| self.word_regions[p].clone())
                    .collect();
                let refs: Vec<&str> = regions.iter().map(String::as_str).collect();
                self.g.nodes.push(node(&cid, &refs));
                self.g.annotations.push(anno(
                    &format!("ta{}", self.next_anno),
                    "tb",
                    "phrase",
                    on_node(&cid),
                    &[("typ", &n.label)],
                ));
                self.next_anno += 1;
                for c in &n.children {
                    if let Child::Node(m) = c {
                        self.node_of(m, words);
                    }
                }
            }
        }
        let mut emit = Emit {
            g: &mut g,
            sid: sid.clone(),
            word_regions,
            next_anno,
            next_cons: 0,
        };
        // The root is the sentence node itself; emit its descendants.
        for c in &tree.root.children {
            if let Child::Node(m) = c {
                emit.node_of(m, &tree.words);
            }
        }
        // Bare leaves directly under the root became preterminals via
        // wrap_bare, so nothing else remains.
        next_anno = emit.next_anno;
    }
    g.primary = PrimaryData::new(&text);
    debug_assert!(crate::model::validate(&g).is_empty(), "{:?}", crate::model::validate(&g));
    (g, trees)
}

/// Two documents with lexeme-annotated words: "gen" carries lexemes
/// {alpha, beta, gamma, delta, eps} and "exo" carries
/// {alpha, beta, gamma, zeta, eta}, so the documents share exactly 3
/// items. Document nodes carry `x:doc.book`, words carry `x:word.lex`.
pub fn cooccurrence_graph() -> Graph {
    let lexemes = [
        ("gen", ["alpha", "beta", "gamma", "delta", "eps"]),
        ("exo", ["alpha", "beta", "gamma", "zeta", "eta"]),
    ];
    let mut g = Graph::default();
    let mut text = String::new();
    let mut next_word = 0usize;
    for (d, (book, lexs)) in lexemes.iter().enumerate() {
        let mut doc_regions: Vec<String> = Vec::new();
        for lex in lexs {
            if !text.is_empty() {
                text.push(' ');
            }
            let start = text.chars().count() as u32;
            text.push_str(lex);
            let end = text.chars().count() as u32;
            let rid = format!("r{next_word}");
            g.regions.push(region(&rid, start, end));
            let wid = format!("w{next_word}");
            g.nodes.push(node(&wid, &[&rid]));
            g.annotations.push(anno(
                &format!("aw{next_word}"),
                "x",
                "word",
                on_node(&wid),
                &[("lex", lex)],
            ));
            doc_regions.push(rid);
            next_word += 1;
        }
        let refs: Vec<&str> = doc_regions.iter().map(String::as_str).collect();
        let did = format!("d{d}");
        g.nodes.push(node(&did, &refs));
        g.annotations.push(anno(
            &format!("ad{d}"),
            "x",
            "doc",
            on_node(&did),
            &[("book", book)],
        ));
    }
    g.primary = PrimaryData::new(&text);
    debug_assert!(validate(&g).is_empty());
    g
}
