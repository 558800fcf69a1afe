//! Building trees from a compiled corpus.
//!
//! A sentence is any node carrying the configured sentence feature; one
//! tree is produced per sentence node, in corpus walk order. Words are
//! the nodes carrying the part-of-speech feature whose coverage lies
//! inside the sentence's coverage, ordered by the corpus walk. The
//! hierarchy among constituents comes either from character coverage
//! (containment mode) or from a designated edge relation (edge mode).

use super::{check_tree, Child, Tree, TreeNode, TreebankError};
use crate::corpus::{covers, CompiledCorpus};
use crate::fabric::Direction;
use crate::model::FeatureKey;
use std::collections::{BTreeSet, HashMap};

/// How the constituent hierarchy is derived.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParentMode {
    /// Constituents nest by character-coverage containment.
    Containment,
    /// Parent/child links follow outgoing edges, optionally restricted
    /// to edges whose feature `.0` has value `.1`.
    Edges { filter: Option<(FeatureKey, String)> },
}

/// What to do with a sentence whose constituents cannot form a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnInconsistent {
    /// Drop the sentence and keep going.
    Skip,
    /// Abort with [`TreebankError::InconsistentHierarchy`].
    Error,
}

/// Configuration for [`build_trees`].
#[derive(Debug, Clone)]
pub struct TreeBuildCfg {
    /// Feature marking sentence nodes; its value labels the root.
    pub sentence: FeatureKey,
    /// Feature marking constituent nodes; its value labels the node.
    pub constituent: FeatureKey,
    /// Feature marking word nodes; its value is the part-of-speech tag.
    pub pos: FeatureKey,
    pub mode: ParentMode,
    pub on_inconsistent: OnInconsistent,
    /// Optional feature whose value becomes the sentence id; the
    /// sentence node's id is used when absent.
    pub sentence_id: Option<FeatureKey>,
}

/// Build one tree per sentence node, in corpus walk order.
///
/// All features named by the configuration must be loaded. Sentences
/// without words are skipped. Constituents with empty yields are
/// ignored. Words are wrapped in preterminal nodes labelled with their
/// part-of-speech tag, and every node's children are ordered by minimum
/// yield position.
pub fn build_trees(c: &CompiledCorpus, cfg: &TreeBuildCfg) -> Result<Vec<Tree>, TreebankError> {
    // Touch every configured feature up front so missing features fail
    // uniformly instead of depending on which sentence is hit first.
    for key in [&cfg.sentence, &cfg.constituent, &cfg.pos]
        .into_iter()
        .chain(cfg.sentence_id.iter())
    {
        c.table(key)?;
    }
    if let ParentMode::Edges {
        filter: Some((key, _)),
    } = &cfg.mode
    {
        c.table(key)?;
    }

    let mut trees = Vec::new();
    for &node in c.walk() {
        let Some(label) = c.node_feature(&cfg.sentence, node)? else {
            continue;
        };
        match build_sentence(c, cfg, node, label) {
            Ok(Some(tree)) => trees.push(tree),
            Ok(None) => {}
            Err(TreebankError::InconsistentHierarchy { .. })
                if cfg.on_inconsistent == OnInconsistent::Skip => {}
            Err(e) => return Err(e),
        }
    }
    Ok(trees)
}

struct SentenceWords {
    /// Word node index per position.
    nodes: Vec<u32>,
    /// `(form, tag)` per position.
    words: Vec<(String, String)>,
    /// Merged coverage per position, for containment tests.
    coverage: Vec<Vec<(u32, u32)>>,
    /// Word node index -> position.
    position_of: HashMap<u32, usize>,
}

fn sentence_words(
    c: &CompiledCorpus,
    cfg: &TreeBuildCfg,
    span: &[(u32, u32)],
) -> Result<SentenceWords, TreebankError> {
    let mut out = SentenceWords {
        nodes: Vec::new(),
        words: Vec::new(),
        coverage: Vec::new(),
        position_of: HashMap::new(),
    };
    for &w in c.walk() {
        let Some(tag) = c.node_feature(&cfg.pos, w)? else {
            continue;
        };
        let cov = c.coverage(w);
        // A word with no anchored text cannot be ordered, so it cannot
        // take part in a tree.
        if cov.is_empty() || !covers(span, &cov) {
            continue;
        }
        out.position_of.insert(w, out.nodes.len());
        out.nodes.push(w);
        out.words.push((c.text_of(w, " "), tag.to_string()));
        out.coverage.push(cov);
    }
    Ok(out)
}

fn build_sentence(
    c: &CompiledCorpus,
    cfg: &TreeBuildCfg,
    sentence: u32,
    label: &str,
) -> Result<Option<Tree>, TreebankError> {
    let span = c.coverage(sentence);
    let words = sentence_words(c, cfg, &span)?;
    if words.nodes.is_empty() {
        return Ok(None);
    }
    let sentence_id = match &cfg.sentence_id {
        Some(key) => c
            .node_feature(key, sentence)?
            .map(str::to_string)
            .unwrap_or_else(|| c.node_id(sentence).to_string()),
        None => c.node_id(sentence).to_string(),
    };

    let root = match &cfg.mode {
        ParentMode::Containment => {
            build_by_containment(c, cfg, sentence, label, &words, &span, &sentence_id)?
        }
        ParentMode::Edges { filter } => {
            build_by_edges(c, cfg, sentence, label, &words, filter.as_ref(), &sentence_id)?
        }
    };
    let tree = Tree {
        sentence_id: sentence_id.clone(),
        words: words.words,
        root,
    };
    check_tree(&tree).map_err(|e| TreebankError::InconsistentHierarchy {
        sentence: sentence_id,
        detail: e.to_string(),
    })?;
    Ok(Some(tree))
}

/// A constituent candidate during containment assembly.
struct Cons {
    label: String,
    yielded: BTreeSet<usize>,
    children: Vec<Child>,
}

#[allow(clippy::too_many_arguments)]
fn build_by_containment(
    c: &CompiledCorpus,
    cfg: &TreeBuildCfg,
    sentence: u32,
    label: &str,
    words: &SentenceWords,
    span: &[(u32, u32)],
    sentence_id: &str,
) -> Result<TreeNode, TreebankError> {
    // Collect constituents inside the sentence with their word yields.
    let mut cons: Vec<Cons> = Vec::new();
    for &k in c.walk() {
        if k == sentence {
            continue;
        }
        let Some(klabel) = c.node_feature(&cfg.constituent, k)? else {
            continue;
        };
        let cov = c.coverage(k);
        if cov.is_empty() || !covers(span, &cov) {
            continue;
        }
        let yielded: BTreeSet<usize> = (0..words.nodes.len())
            .filter(|&p| covers(&cov, &words.coverage[p]))
            .collect();
        if yielded.is_empty() {
            continue;
        }
        cons.push(Cons {
            label: klabel.to_string(),
            yielded,
            children: Vec::new(),
        });
    }

    // Any two constituents must nest or be disjoint.
    for i in 0..cons.len() {
        for j in i + 1..cons.len() {
            let a = &cons[i].yielded;
            let b = &cons[j].yielded;
            if !(a.is_subset(b) || b.is_subset(a) || a.is_disjoint(b)) {
                return Err(TreebankError::InconsistentHierarchy {
                    sentence: sentence_id.to_string(),
                    detail: format!(
                        "constituents {} and {} overlap without nesting",
                        cons[i].label, cons[j].label
                    ),
                });
            }
        }
    }

    // Sort outer-first: larger yields first; ties broken by first yield
    // position, then by the corpus walk (which already ordered `cons`),
    // so equal-yield constituents nest later-walked inside earlier.
    let mut order: Vec<usize> = (0..cons.len()).collect();
    order.sort_by(|&i, &j| {
        cons[j]
            .yielded
            .len()
            .cmp(&cons[i].yielded.len())
            .then_with(|| cons[i].yielded.first().cmp(&cons[j].yielded.first()))
            .then_with(|| i.cmp(&j))
    });

    // Attach each word's preterminal to the smallest constituent whose
    // yield contains it; because the order is outer-first, the last
    // container found is the smallest.
    let mut word_home: Vec<Option<usize>> = vec![None; words.nodes.len()];
    // Likewise each constituent attaches under the smallest earlier one
    // that contains it, or under the root.
    let mut parent: Vec<Option<usize>> = vec![None; cons.len()];
    for (rank, &i) in order.iter().enumerate() {
        for &earlier in order[..rank].iter().rev() {
            if cons[i].yielded.is_subset(&cons[earlier].yielded) {
                parent[i] = Some(earlier);
                break;
            }
        }
        for &p in &cons[i].yielded {
            word_home[p] = Some(i);
        }
    }

    // Assemble bottom-up: walk `order` from the innermost back out so a
    // node's children are final before it is pushed into its parent.
    let mut root_children: Vec<Child> = Vec::new();
    for (p, home) in word_home.iter().enumerate() {
        let leaf = Child::Node(TreeNode {
            label: words.words[p].1.clone(),
            children: vec![Child::Leaf(p)],
        });
        match home {
            Some(i) => cons[*i].children.push(leaf),
            None => root_children.push(leaf),
        }
    }
    for &i in order.iter().rev() {
        let node = TreeNode {
            label: cons[i].label.clone(),
            children: sort_children(std::mem::take(&mut cons[i].children)),
        };
        match parent[i] {
            Some(up) => cons[up].children.push(Child::Node(node)),
            None => root_children.push(Child::Node(node)),
        }
    }
    Ok(TreeNode {
        label: label.to_string(),
        children: sort_children(root_children),
    })
}

fn sort_children(mut children: Vec<Child>) -> Vec<Child> {
    children.sort_by_key(super::child_min_position);
    children
}

fn build_by_edges(
    c: &CompiledCorpus,
    cfg: &TreeBuildCfg,
    sentence: u32,
    label: &str,
    words: &SentenceWords,
    filter: Option<&(FeatureKey, String)>,
    sentence_id: &str,
) -> Result<TreeNode, TreebankError> {
    let mut visited = BTreeSet::new();
    visited.insert(sentence);
    let children = edge_children(c, cfg, sentence, words, filter, sentence_id, &mut visited)?;
    Ok(TreeNode {
        label: label.to_string(),
        children: sort_children(children),
    })
}

fn edge_children(
    c: &CompiledCorpus,
    cfg: &TreeBuildCfg,
    node: u32,
    words: &SentenceWords,
    filter: Option<&(FeatureKey, String)>,
    sentence_id: &str,
    visited: &mut BTreeSet<u32>,
) -> Result<Vec<Child>, TreebankError> {
    let mut out = Vec::new();
    let filter_arg = filter.map(|(k, v)| (k, v.as_str()));
    for (_, target) in c.neighbourhood(node, Direction::Out, filter_arg)? {
        if !visited.insert(target) {
            return Err(TreebankError::InconsistentHierarchy {
                sentence: sentence_id.to_string(),
                detail: format!("node {} is reached more than once", c.node_id(target)),
            });
        }
        if let Some(&p) = words.position_of.get(&target) {
            out.push(Child::Node(TreeNode {
                label: words.words[p].1.clone(),
                children: vec![Child::Leaf(p)],
            }));
            continue;
        }
        if let Some(klabel) = c.node_feature(&cfg.constituent, target)? {
            let kids = edge_children(c, cfg, target, words, filter, sentence_id, visited)?;
            if kids.is_empty() {
                continue;
            }
            out.push(Child::Node(TreeNode {
                label: klabel.to_string(),
                children: sort_children(kids),
            }));
            continue;
        }
        // Nodes that are neither words of this sentence nor constituents
        // are skipped, but their subtrees are still explored so words
        // reachable through them are not lost.
        let kids = edge_children(c, cfg, target, words, filter, sentence_id, visited)?;
        out.extend(kids);
    }
    Ok(out)
}
