//! Maximal common tree fragments with occurrence counts.
//!
//! A fragment is a production-complete pattern cut out of a tree: each
//! node is either *expanded*, carrying the full ordered child list of
//! the tree node it came from, or a *frontier*, carrying only its
//! label. Word leaves of an expanded node are always part of the
//! pattern; leaving a word out means leaving its preterminal as a
//! frontier. The smallest fragment is one full production; a bare
//! label alone is not a fragment.
//!
//! [`common_fragments`] extracts the largest fragments two trees share;
//! [`extract_corpus`] unions those over all tree pairs and counts, for
//! each fragment, its distinct occurrence sites in the whole corpus.
//! [`brute_force_fragments`] enumerates every fragment of a (small)
//! tree and serves as the testing oracle.

use crate::treebank::{Child, Tree, TreeNode};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

/// Errors from fragment extraction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FragmentError {
    /// Corpus extraction needs at least two trees to compare.
    #[error("fragment extraction needs at least two trees, got {0}")]
    InsufficientTrees(usize),
    /// The brute-force enumerator is exponential and refuses trees with
    /// more than 12 internal nodes.
    #[error("tree {tree} has {nodes} internal nodes; brute-force enumeration allows at most 12")]
    TreeTooLarge { tree: String, nodes: usize },
}

/// A position-free tree pattern.
///
/// Patterns compare words by form; positions are deliberately absent,
/// so a fragment extracted from a discontinuous constituent keeps its
/// children in yield order but forgets the exact gap widths.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pattern {
    /// An expanded node: label plus the full child list.
    Expanded { label: String, children: Vec<Pattern> },
    /// An unexpanded nonterminal.
    Frontier { label: String },
    /// A word.
    Lex { form: String },
}

impl Pattern {
    /// Canonical discbracket-like rendering: expanded nodes are
    /// parenthesized, frontiers are bare labels, words are `=form`.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        self.render(&mut out);
        out
    }

    fn render(&self, out: &mut String) {
        match self {
            Pattern::Expanded { label, children } => {
                out.push('(');
                out.push_str(label);
                for child in children {
                    out.push(' ');
                    child.render(out);
                }
                out.push(')');
            }
            Pattern::Frontier { label } => out.push_str(label),
            Pattern::Lex { form } => {
                out.push('=');
                out.push_str(form);
            }
        }
    }

    /// Number of nonterminal nodes (expanded and frontier); words are
    /// free.
    pub fn node_count(&self) -> usize {
        match self {
            Pattern::Expanded { children, .. } => {
                1 + children.iter().map(Pattern::node_count).sum::<usize>()
            }
            Pattern::Frontier { .. } => 1,
            Pattern::Lex { .. } => 0,
        }
    }
}

/// Pre-order list of a tree's internal nodes with parent bookkeeping.
struct NodeIndex<'t> {
    nodes: Vec<&'t TreeNode>,
    /// `(parent position, child index within parent)`, `None` for root.
    parent: Vec<Option<(usize, usize)>>,
}

fn index_tree(t: &Tree) -> NodeIndex<'_> {
    let mut ix = NodeIndex {
        nodes: Vec::new(),
        parent: Vec::new(),
    };
    fn walk<'t>(node: &'t TreeNode, up: Option<(usize, usize)>, ix: &mut NodeIndex<'t>) {
        let me = ix.nodes.len();
        ix.nodes.push(node);
        ix.parent.push(up);
        for (i, child) in node.children.iter().enumerate() {
            if let Child::Node(n) = child {
                walk(n, Some((me, i)), ix);
            }
        }
    }
    walk(&t.root, None, &mut ix);
    ix
}

/// Do two tree nodes carry the same production? Labels must be equal
/// and the child lists must agree position by position: nested nodes on
/// matching labels, words on matching forms.
fn productions_match(a: &TreeNode, ta: &Tree, b: &TreeNode, tb: &Tree) -> bool {
    if a.label != b.label || a.children.len() != b.children.len() {
        return false;
    }
    a.children.iter().zip(&b.children).all(|pair| match pair {
        (Child::Node(x), Child::Node(y)) => x.label == y.label,
        (Child::Leaf(p), Child::Leaf(q)) => ta.words[*p].0 == tb.words[*q].0,
        _ => false,
    })
}

/// The largest fragment shared by a production-matching node pair:
/// child pairs whose productions match in turn are expanded, the rest
/// become frontiers, and words are carried along.
fn shared_fragment(
    a: usize,
    b: usize,
    ixa: &NodeIndex,
    ta: &Tree,
    ixb: &NodeIndex,
    tb: &Tree,
    memo: &mut HashMap<(usize, usize), Pattern>,
) -> Pattern {
    if let Some(hit) = memo.get(&(a, b)) {
        return hit.clone();
    }
    let (na, nb) = (ixa.nodes[a], ixb.nodes[b]);
    // Child positions map back to pre-order positions by scanning the
    // pre-order lists: children of `a` are exactly the entries whose
    // parent is `a`.
    let mut sub_a: Vec<Option<usize>> = vec![None; na.children.len()];
    for (pos, up) in ixa.parent.iter().enumerate() {
        if let Some((p, i)) = up {
            if *p == a {
                sub_a[*i] = Some(pos);
            }
        }
    }
    let mut sub_b: Vec<Option<usize>> = vec![None; nb.children.len()];
    for (pos, up) in ixb.parent.iter().enumerate() {
        if let Some((p, i)) = up {
            if *p == b {
                sub_b[*i] = Some(pos);
            }
        }
    }
    let children = na
        .children
        .iter()
        .zip(&nb.children)
        .enumerate()
        .map(|(i, pair)| match pair {
            (Child::Leaf(p), Child::Leaf(_)) => Pattern::Lex {
                form: ta.words[*p].0.clone(),
            },
            (Child::Node(x), Child::Node(y)) => {
                let (ca, cb) = (sub_a[i].unwrap(), sub_b[i].unwrap());
                if productions_match(x, ta, y, tb) {
                    shared_fragment(ca, cb, ixa, ta, ixb, tb, memo)
                } else {
                    Pattern::Frontier {
                        label: x.label.clone(),
                    }
                }
            }
            _ => unreachable!("productions_match guarantees child shapes agree"),
        })
        .collect();
    let out = Pattern::Expanded {
        label: na.label.clone(),
        children,
    };
    memo.insert((a, b), out.clone());
    out
}

/// Does `f` occur somewhere inside `g`, i.e. is every piece of
/// structure `f` spells out also present in `g`?
pub fn embeds(f: &Pattern, g: &Pattern) -> bool {
    if embeds_at(f, g) {
        return true;
    }
    match g {
        Pattern::Expanded { children, .. } => children.iter().any(|c| embeds(f, c)),
        _ => false,
    }
}

fn embeds_at(f: &Pattern, g: &Pattern) -> bool {
    match (f, g) {
        (Pattern::Frontier { label: a }, Pattern::Frontier { label: b })
        | (Pattern::Frontier { label: a }, Pattern::Expanded { label: b, .. }) => a == b,
        (Pattern::Lex { form: a }, Pattern::Lex { form: b }) => a == b,
        (
            Pattern::Expanded {
                label: a,
                children: ca,
            },
            Pattern::Expanded {
                label: b,
                children: cb,
            },
        ) => a == b && ca.len() == cb.len() && ca.iter().zip(cb).all(|(x, y)| embeds_at(x, y)),
        _ => false,
    }
}

/// The maximal fragments occurring in both trees, sorted by canonical
/// form.
///
/// Every production-matching node pair roots a shared fragment; the
/// result keeps those not embedded in a larger one. Comparing a tree
/// with itself therefore returns (at least) the whole tree, fully
/// lexicalized.
pub fn common_fragments(t1: &Tree, t2: &Tree) -> Vec<Pattern> {
    let ixa = index_tree(t1);
    let ixb = index_tree(t2);
    let mut memo = HashMap::new();
    let mut candidates: BTreeMap<String, Pattern> = BTreeMap::new();
    for a in 0..ixa.nodes.len() {
        for b in 0..ixb.nodes.len() {
            if !productions_match(ixa.nodes[a], t1, ixb.nodes[b], t2) {
                continue;
            }
            // If the parents pair up at the same child index and match
            // too, this site's fragment is part of the parents' larger
            // one; skip it as a candidate.
            if let (Some((pa, ia)), Some((pb, ib))) = (ixa.parent[a], ixb.parent[b]) {
                if ia == ib && productions_match(ixa.nodes[pa], t1, ixb.nodes[pb], t2) {
                    continue;
                }
            }
            let frag = shared_fragment(a, b, &ixa, t1, &ixb, t2, &mut memo);
            candidates.entry(frag.canonical()).or_insert(frag);
        }
    }
    // Drop any candidate embedded in a different one.
    let keep: Vec<Pattern> = candidates
        .iter()
        .filter(|(canon, frag)| {
            !candidates
                .iter()
                .any(|(other_canon, other)| *canon != other_canon && embeds(frag, other))
        })
        .map(|(_, frag)| frag.clone())
        .collect();
    keep
}

/// Does the fragment match the tree exactly at `node`?
///
/// This matcher is independent of the extraction machinery so tests
/// and occurrence counting do not inherit extraction bugs.
pub fn match_at(pattern: &Pattern, t: &Tree, node: &TreeNode) -> bool {
    match pattern {
        Pattern::Expanded { label, children } => {
            node.label == *label
                && node.children.len() == children.len()
                && children
                    .iter()
                    .zip(&node.children)
                    .all(|(p, c)| match (p, c) {
                        (Pattern::Lex { form }, Child::Leaf(q)) => t.words[*q].0 == *form,
                        (Pattern::Frontier { label }, Child::Node(m)) => m.label == *label,
                        (Pattern::Expanded { .. }, Child::Node(m)) => match_at(p, t, m),
                        _ => false,
                    })
        }
        _ => false,
    }
}

/// The number of `(tree, node)` sites across the corpus where the
/// fragment matches.
pub fn occurrence_count(pattern: &Pattern, trees: &[Tree]) -> usize {
    trees
        .iter()
        .map(|t| {
            let ix = index_tree(t);
            ix.nodes.iter().filter(|n| match_at(pattern, t, n)).count()
        })
        .sum()
}

/// Canonical fragment strings with their corpus-wide occurrence counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FragmentTable {
    pub entries: BTreeMap<String, usize>,
}

impl FragmentTable {
    /// Rows in output order: descending count, then canonical form.
    pub fn rows(&self) -> Vec<(&str, usize)> {
        let mut rows: Vec<(&str, usize)> = self
            .entries
            .iter()
            .map(|(k, &v)| (k.as_str(), v))
            .collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        rows
    }

    /// TSV rendering: `count<TAB>fragment` per line, in row order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (frag, count) in self.rows() {
            out.push_str(&count.to_string());
            out.push('\t');
            out.push_str(frag);
            out.push('\n');
        }
        out
    }
}

/// Union of [`common_fragments`] over all unordered tree pairs, counted
/// over the whole corpus.
///
/// A fragment's count is the number of distinct `(tree, root node)`
/// sites where it matches, so a fragment found in any pair is counted
/// in every tree it occurs in, and every count is at least two.
pub fn extract_corpus(trees: &[Tree]) -> Result<FragmentTable, FragmentError> {
    if trees.len() < 2 {
        return Err(FragmentError::InsufficientTrees(trees.len()));
    }
    let mut found: BTreeMap<String, Pattern> = BTreeMap::new();
    for i in 0..trees.len() {
        for j in i + 1..trees.len() {
            for frag in common_fragments(&trees[i], &trees[j]) {
                found.entry(frag.canonical()).or_insert(frag);
            }
        }
    }
    let mut entries = BTreeMap::new();
    for (canon, frag) in found {
        let count = occurrence_count(&frag, trees);
        debug_assert!(count >= 2, "fragment {canon} counted {count} < 2 sites");
        entries.insert(canon, count);
    }
    Ok(FragmentTable { entries })
}

/// Every fragment of `t` with at most `max_nodes` nonterminal nodes,
/// canonicalized. Exponential; trees may have at most 12 internal
/// nodes.
pub fn brute_force_fragments(
    t: &Tree,
    max_nodes: usize,
) -> Result<BTreeSet<String>, FragmentError> {
    let ix = index_tree(t);
    if ix.nodes.len() > 12 {
        return Err(FragmentError::TreeTooLarge {
            tree: t.sentence_id.clone(),
            nodes: ix.nodes.len(),
        });
    }
    let mut out = BTreeSet::new();
    for node in &ix.nodes {
        for frag in expansions(node, t) {
            if frag.node_count() <= max_nodes {
                out.insert(frag.canonical());
            }
        }
    }
    Ok(out)
}

/// All fragments rooted at `node`: the node expanded, with every nested
/// child either a frontier or any of its own expansions.
fn expansions(node: &TreeNode, t: &Tree) -> Vec<Pattern> {
    let per_child: Vec<Vec<Pattern>> = node
        .children
        .iter()
        .map(|child| match child {
            Child::Leaf(p) => vec![Pattern::Lex {
                form: t.words[*p].0.clone(),
            }],
            Child::Node(m) => {
                let mut options = vec![Pattern::Frontier {
                    label: m.label.clone(),
                }];
                options.extend(expansions(m, t));
                options
            }
        })
        .collect();
    let mut combos: Vec<Vec<Pattern>> = vec![Vec::new()];
    for options in per_child {
        let mut next = Vec::with_capacity(combos.len() * options.len());
        for combo in &combos {
            for option in &options {
                let mut extended = combo.clone();
                extended.push(option.clone());
                next.push(extended);
            }
        }
        combos = next;
    }
    combos
        .into_iter()
        .map(|children| Pattern::Expanded {
            label: node.label.clone(),
            children,
        })
        .collect()
}

/// Reference implementation of [`common_fragments`] by intersecting
/// brute-force enumerations and keeping the maximal elements. Only
/// usable on small trees; this is the oracle the fast path is tested
/// against.
pub fn oracle_common_fragments(t1: &Tree, t2: &Tree) -> Result<Vec<String>, FragmentError> {
    let f1 = brute_force_fragments(t1, usize::MAX)?;
    let f2 = brute_force_fragments(t2, usize::MAX)?;
    let shared: Vec<Pattern> = f1
        .intersection(&f2)
        .map(|canon| parse_canonical(canon))
        .collect();
    let mut keep: Vec<String> = shared
        .iter()
        .filter(|f| {
            !shared
                .iter()
                .any(|g| g.canonical() != f.canonical() && embeds(f, g))
        })
        .map(Pattern::canonical)
        .collect();
    keep.sort();
    Ok(keep)
}

/// Parse a canonical fragment string back into a pattern (test
/// support; canonical strings are unambiguous).
fn parse_canonical(s: &str) -> Pattern {
    fn node(tokens: &[String], pos: &mut usize) -> Pattern {
        if tokens[*pos] == "(" {
            *pos += 1;
            let label = tokens[*pos].clone();
            *pos += 1;
            let mut children = Vec::new();
            while tokens[*pos] != ")" {
                children.push(node(tokens, pos));
            }
            *pos += 1;
            Pattern::Expanded { label, children }
        } else {
            let tok = tokens[*pos].clone();
            *pos += 1;
            match tok.strip_prefix('=') {
                Some(form) => Pattern::Lex { form: form.into() },
                None => Pattern::Frontier { label: tok },
            }
        }
    }
    let mut tokens = Vec::new();
    let mut word = String::new();
    for ch in s.chars() {
        if ch == '(' || ch == ')' || ch == ' ' {
            if !word.is_empty() {
                tokens.push(std::mem::take(&mut word));
            }
            if ch != ' ' {
                tokens.push(ch.to_string());
            }
        } else {
            word.push(ch);
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    let mut pos = 0;
    node(&tokens, &mut pos)
}
