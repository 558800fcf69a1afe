//! Syntactic trees with discontinuous constituents.
//!
//! A [`Tree`] stores the sentence's words in text order and a constituent
//! structure whose leaves reference word *positions*. Because leaves are
//! positions rather than slices of the tree, a constituent may dominate a
//! non-contiguous set of words, which is exactly what the discbracket
//! format and the Negra-style export format are designed to serialize.
//!
//! ```
//! use laffab::treebank::{from_discbracket, to_discbracket};
//!
//! let t = from_discbracket("(S (VP (vb 0=a) (n 2=c)) (dt 1=b))", "s1").unwrap();
//! assert_eq!(to_discbracket(&t), "(S (VP (vb 0=a) (n 2=c)) (dt 1=b))");
//! ```

mod build;
mod score;

pub use build::{build_trees, OnInconsistent, ParentMode, TreeBuildCfg};
pub use score::{score, ScoreCfg, Scores};

use crate::fabric::FabricError;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

/// Errors raised while building, parsing, serializing, or scoring trees.
#[derive(Debug, Error)]
pub enum TreebankError {
    /// Two constituents overlap without one containing the other, or an
    /// edge-defined structure does not yield each word exactly once.
    #[error("sentence {sentence}: inconsistent hierarchy: {detail}")]
    InconsistentHierarchy { sentence: String, detail: String },
    /// The export format numbers internal nodes 500..=999, so a tree may
    /// contain at most 499 numbered (non-preterminal) nodes.
    #[error("tree {0} has more than 499 internal nodes")]
    TooManyNodes(String),
    /// A discbracket line could not be parsed.
    #[error("discbracket line {line}: {detail}")]
    Discbracket { line: usize, detail: String },
    /// A tree violates a structural invariant (yield partition, child
    /// ordering, or empty constituent).
    #[error("tree {tree}: {detail}")]
    BadTree { tree: String, detail: String },
    /// Gold and predicted tree lists cannot be aligned for scoring.
    #[error("tree lists are not aligned: {0}")]
    Alignment(String),
    /// A feature required by the build configuration was unavailable.
    #[error(transparent)]
    Fabric(#[from] FabricError),
}

/// One child of an internal node: either a nested constituent or a word,
/// referenced by its position in [`Tree::words`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Child {
    Node(TreeNode),
    Leaf(usize),
}

/// An internal tree node: a label and an ordered child list.
///
/// Children are kept in yield order: sorted by the smallest word position
/// each child dominates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub label: String,
    pub children: Vec<Child>,
}

/// A parsed sentence: its words in text order plus the constituent tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    pub sentence_id: String,
    /// `(form, part-of-speech)` per word position.
    pub words: Vec<(String, String)>,
    pub root: TreeNode,
}

impl TreeNode {
    /// The set of word positions this node dominates.
    pub fn yield_set(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_yield(&mut out);
        out
    }

    fn collect_yield(&self, out: &mut BTreeSet<usize>) {
        for child in &self.children {
            match child {
                Child::Leaf(p) => {
                    out.insert(*p);
                }
                Child::Node(n) => n.collect_yield(out),
            }
        }
    }

    /// The smallest position in the yield, or `usize::MAX` for an empty
    /// yield (which [`check_tree`] rejects).
    pub fn min_position(&self) -> usize {
        self.yield_set().first().copied().unwrap_or(usize::MAX)
    }

    /// True if this node directly tags a single word.
    pub fn is_preterminal(&self) -> bool {
        self.children.len() == 1 && matches!(self.children[0], Child::Leaf(_))
    }
}

fn child_min_position(child: &Child) -> usize {
    match child {
        Child::Leaf(p) => *p,
        Child::Node(n) => n.min_position(),
    }
}

/// Verify the structural invariants of a tree.
///
/// * every word position `0..words.len()` appears exactly once as a leaf;
/// * every internal node has at least one child;
/// * sibling yields are disjoint and children are ordered by minimum
///   yield position.
pub fn check_tree(t: &Tree) -> Result<(), TreebankError> {
    let bad = |detail: String| TreebankError::BadTree {
        tree: t.sentence_id.clone(),
        detail,
    };
    let mut seen = vec![false; t.words.len()];
    check_node(&t.root, &mut seen).map_err(bad)?;
    if let Some(p) = seen.iter().position(|s| !s) {
        return Err(TreebankError::BadTree {
            tree: t.sentence_id.clone(),
            detail: format!("word position {p} does not occur as a leaf"),
        });
    }
    Ok(())
}

fn check_node(node: &TreeNode, seen: &mut Vec<bool>) -> Result<BTreeSet<usize>, String> {
    if node.children.is_empty() {
        return Err(format!("node {} has no children", node.label));
    }
    let mut yielded = BTreeSet::new();
    let mut last_min = None;
    for child in &node.children {
        let child_yield = match child {
            Child::Leaf(p) => {
                if *p >= seen.len() {
                    return Err(format!("leaf position {p} is out of range"));
                }
                if seen[*p] {
                    return Err(format!("word position {p} occurs as a leaf more than once"));
                }
                seen[*p] = true;
                BTreeSet::from([*p])
            }
            Child::Node(n) => check_node(n, seen)?,
        };
        let min = child_yield.first().copied().unwrap_or(usize::MAX);
        if let Some(prev) = last_min {
            if min <= prev {
                return Err(format!(
                    "children of {} are not ordered by minimum yield position",
                    node.label
                ));
            }
        }
        last_min = Some(min);
        yielded.extend(child_yield);
    }
    Ok(yielded)
}

/// Render a tree in discbracket notation: `(LABEL child ...)` where each
/// leaf is written `position=form`.
pub fn to_discbracket(t: &Tree) -> String {
    let mut out = String::new();
    write_node(&t.root, &t.words, &mut out);
    out
}

fn write_node(node: &TreeNode, words: &[(String, String)], out: &mut String) {
    out.push('(');
    out.push_str(&node.label);
    for child in &node.children {
        out.push(' ');
        match child {
            Child::Leaf(p) => {
                let form = words.get(*p).map(|w| w.0.as_str()).unwrap_or("");
                let _ = write!(out, "{p}={form}");
            }
            Child::Node(n) => write_node(n, words, out),
        }
    }
    out.push(')');
}

/// Parse one discbracket line into a tree.
///
/// Leaves may be written `position=form` or as a bare position (the form
/// is then empty). The part-of-speech tag recorded for each word is the
/// label of the node directly above the leaf. The parsed tree must pass
/// [`check_tree`].
pub fn from_discbracket(line: &str, sentence_id: &str) -> Result<Tree, TreebankError> {
    parse_discbracket_line(line, sentence_id, 1)
}

pub(crate) fn parse_discbracket_line(
    line: &str,
    sentence_id: &str,
    line_no: usize,
) -> Result<Tree, TreebankError> {
    let err = |detail: String| TreebankError::Discbracket {
        line: line_no,
        detail,
    };
    let tokens = tokenize(line);
    let mut pos = 0usize;
    let mut leaves: Vec<(usize, String, String)> = Vec::new();
    let root = parse_node(&tokens, &mut pos, &mut leaves, line_no)?;
    if pos != tokens.len() {
        return Err(err("trailing content after the root constituent".into()));
    }
    let n = leaves.iter().map(|(p, _, _)| p + 1).max().unwrap_or(0);
    let mut words = vec![None; n];
    for (p, form, tag) in leaves {
        if words[p].is_some() {
            return Err(err(format!("word position {p} occurs more than once")));
        }
        words[p] = Some((form, tag));
    }
    let mut resolved = Vec::with_capacity(n);
    for (p, w) in words.into_iter().enumerate() {
        match w {
            Some(w) => resolved.push(w),
            None => return Err(err(format!("word position {p} does not occur as a leaf"))),
        }
    }
    let tree = Tree {
        sentence_id: sentence_id.to_string(),
        words: resolved,
        root,
    };
    check_tree(&tree).map_err(|e| err(e.to_string()))?;
    Ok(tree)
}

#[derive(Debug, PartialEq)]
enum Token {
    Open,
    Close,
    Word(String),
}

fn tokenize(line: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for ch in line.chars() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if !word.is_empty() {
                tokens.push(Token::Word(std::mem::take(&mut word)));
            }
            match ch {
                '(' => tokens.push(Token::Open),
                ')' => tokens.push(Token::Close),
                _ => {}
            }
        } else {
            word.push(ch);
        }
    }
    if !word.is_empty() {
        tokens.push(Token::Word(word));
    }
    tokens
}

fn parse_node(
    tokens: &[Token],
    pos: &mut usize,
    leaves: &mut Vec<(usize, String, String)>,
    line_no: usize,
) -> Result<TreeNode, TreebankError> {
    let err = |detail: String| TreebankError::Discbracket {
        line: line_no,
        detail,
    };
    match tokens.get(*pos) {
        Some(Token::Open) => *pos += 1,
        _ => return Err(err("expected '('".into())),
    }
    let label = match tokens.get(*pos) {
        Some(Token::Word(w)) => {
            *pos += 1;
            w.clone()
        }
        _ => return Err(err("expected a node label after '('".into())),
    };
    let mut children = Vec::new();
    loop {
        match tokens.get(*pos) {
            Some(Token::Close) => {
                *pos += 1;
                break;
            }
            Some(Token::Open) => {
                children.push(Child::Node(parse_node(tokens, pos, leaves, line_no)?));
            }
            Some(Token::Word(w)) => {
                *pos += 1;
                let (position, form) = match w.split_once('=') {
                    Some((p, form)) => (p, form.to_string()),
                    None => (w.as_str(), String::new()),
                };
                let position: usize = position
                    .parse()
                    .map_err(|_| err(format!("leaf '{w}' does not start with a position")))?;
                leaves.push((position, form, label.clone()));
                children.push(Child::Leaf(position));
            }
            None => return Err(err(format!("unclosed constituent {label}"))),
        }
    }
    if children.is_empty() {
        return Err(err(format!("constituent {label} has no children")));
    }
    Ok(TreeNode { label, children })
}

/// Render a tree as one block of the Negra-style export format.
///
/// The block is framed by `#BOS id` / `#EOS id` lines. Word lines come
/// first, in text order, as `form<TAB>tag<TAB>--<TAB>--<TAB>parent`.
/// Preterminal nodes are folded into the word lines (their label is the
/// tag column), every other internal node is numbered bottom-up in
/// post-order starting at 500 and written as
/// `#num<TAB>label<TAB>--<TAB>--<TAB>parent`. The root's parent is 0.
pub fn to_export(t: &Tree) -> Result<String, TreebankError> {
    // Number the non-preterminal nodes in post-order: children first, so
    // every node's parent has a higher number and the root is last.
    let mut numbered: Vec<(&TreeNode, u32)> = Vec::new();
    let mut next = 500u32;
    number_nodes(&t.root, &mut numbered, &mut next);
    if numbered.len() > 499 {
        return Err(TreebankError::TooManyNodes(t.sentence_id.clone()));
    }

    // Parent number for every word position and every numbered node.
    let mut word_parent = vec![0u32; t.words.len()];
    let mut node_parent = vec![0u32; numbered.len()];
    assign_parents(&t.root, 0, &numbered, &mut word_parent, &mut node_parent);

    let mut out = String::new();
    let _ = writeln!(out, "#BOS {}", t.sentence_id);
    for (p, (form, tag)) in t.words.iter().enumerate() {
        let _ = writeln!(out, "{form}\t{tag}\t--\t--\t{}", word_parent[p]);
    }
    for (i, (node, num)) in numbered.iter().enumerate() {
        let _ = writeln!(out, "#{num}\t{}\t--\t--\t{}", node.label, node_parent[i]);
    }
    let _ = writeln!(out, "#EOS {}", t.sentence_id);
    Ok(out)
}

fn number_nodes<'t>(node: &'t TreeNode, numbered: &mut Vec<(&'t TreeNode, u32)>, next: &mut u32) {
    for child in &node.children {
        if let Child::Node(n) = child {
            number_nodes(n, numbered, next);
        }
    }
    if !node.is_preterminal() {
        numbered.push((node, *next));
        *next += 1;
    }
}

fn assign_parents(
    node: &TreeNode,
    enclosing: u32,
    numbered: &[(&TreeNode, u32)],
    word_parent: &mut [u32],
    node_parent: &mut [u32],
) {
    let own = numbered
        .iter()
        .position(|(n, _)| std::ptr::eq(*n, node))
        .map(|i| {
            node_parent[i] = enclosing;
            numbered[i].1
        });
    // A preterminal is not numbered; its word attaches to the node above.
    let inner = own.unwrap_or(enclosing);
    for child in &node.children {
        match child {
            Child::Leaf(p) => word_parent[*p] = inner,
            Child::Node(n) => assign_parents(n, inner, numbered, word_parent, node_parent),
        }
    }
}
