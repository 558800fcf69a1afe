//! Labelled constituent scoring for tree lists.
//!
//! A constituent is a `(label, yield set)` pair, so discontinuous
//! constituents are compared exactly, not through any contiguous
//! approximation. Precision and recall are micro-averaged over the
//! whole corpus; per-sentence matches are multiset intersections.

use super::{check_tree, Child, Tree, TreeNode, TreebankError};
use std::collections::BTreeSet;
use std::collections::HashMap;

/// Which constituents take part in scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreCfg {
    /// Count preterminals (part-of-speech tagging accuracy folded in).
    pub include_preterminals: bool,
    /// Count the root constituent.
    pub include_root: bool,
}

impl Default for ScoreCfg {
    fn default() -> Self {
        ScoreCfg {
            include_preterminals: false,
            include_root: true,
        }
    }
}

/// Corpus-level scores, all in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Share of sentences whose constituent multisets match exactly.
    pub exact_match: f64,
    pub sentences: usize,
}

impl Scores {
    /// One-line report, one decimal per figure:
    /// `precision P recall R f1 F exact-match E`.
    pub fn summary_line(&self) -> String {
        format!(
            "precision {:.1} recall {:.1} f1 {:.1} exact-match {:.1}",
            self.precision, self.recall, self.f1, self.exact_match
        )
    }
}

/// Compare predicted trees against gold trees.
///
/// The i-th predicted tree is compared with the i-th gold tree; the
/// lists must have the same length and each pair must agree on sentence
/// id and word forms, otherwise [`TreebankError::Alignment`] is
/// returned. Empty totals score 100 by convention (no chances to be
/// wrong), and f1 is the harmonic mean of precision and recall.
pub fn score(gold: &[Tree], pred: &[Tree], cfg: &ScoreCfg) -> Result<Scores, TreebankError> {
    if gold.len() != pred.len() {
        return Err(TreebankError::Alignment(format!(
            "{} gold trees vs {} predicted trees",
            gold.len(),
            pred.len()
        )));
    }
    let mut matched = 0usize;
    let mut gold_total = 0usize;
    let mut pred_total = 0usize;
    let mut exact = 0usize;
    for (g, p) in gold.iter().zip(pred) {
        if g.sentence_id != p.sentence_id {
            return Err(TreebankError::Alignment(format!(
                "sentence id mismatch: gold {} vs predicted {}",
                g.sentence_id, p.sentence_id
            )));
        }
        let g_forms: Vec<&str> = g.words.iter().map(|w| w.0.as_str()).collect();
        let p_forms: Vec<&str> = p.words.iter().map(|w| w.0.as_str()).collect();
        if g_forms != p_forms {
            return Err(TreebankError::Alignment(format!(
                "sentence {}: word forms differ",
                g.sentence_id
            )));
        }
        check_tree(g)?;
        check_tree(p)?;
        let gc = constituents(g, cfg);
        let pc = constituents(p, cfg);
        let mut pair_matched = 0usize;
        for (cons, &n) in &pc {
            pair_matched += n.min(gc.get(cons).copied().unwrap_or(0));
        }
        matched += pair_matched;
        gold_total += gc.values().sum::<usize>();
        pred_total += pc.values().sum::<usize>();
        if gc == pc {
            exact += 1;
        }
    }
    let pct = |num: usize, den: usize| {
        if den == 0 {
            100.0
        } else {
            100.0 * num as f64 / den as f64
        }
    };
    let precision = pct(matched, pred_total);
    let recall = pct(matched, gold_total);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let exact_match = pct(exact, gold.len());
    Ok(Scores {
        precision,
        recall,
        f1,
        exact_match,
        sentences: gold.len(),
    })
}

type ConstituentCounts = HashMap<(String, BTreeSet<usize>), usize>;

fn constituents(t: &Tree, cfg: &ScoreCfg) -> ConstituentCounts {
    let mut out = HashMap::new();
    collect(&t.root, true, cfg, &mut out);
    out
}

fn collect(node: &TreeNode, is_root: bool, cfg: &ScoreCfg, out: &mut ConstituentCounts) {
    let skip = (is_root && !cfg.include_root)
        || (node.is_preterminal() && !cfg.include_preterminals);
    if !skip {
        *out.entry((node.label.clone(), node.yield_set())).or_insert(0) += 1;
    }
    for child in &node.children {
        if let Child::Node(n) = child {
            collect(n, false, cfg, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::from_discbracket;

    fn t(s: &str, id: &str) -> Tree {
        from_discbracket(s, id).unwrap()
    }

    #[test]
    fn identity_scores_100() {
        let gold = vec![
            t("(S (dt 0=the) (VP (n 1=cat) (vb 2=sat)))", "s1"),
            t("(S (VP (vb 0=a) (n 2=c)) (dt 1=b))", "s2"),
        ];
        let s = score(&gold, &gold, &ScoreCfg::default()).unwrap();
        assert_eq!(s.precision, 100.0);
        assert_eq!(s.recall, 100.0);
        assert_eq!(s.f1, 100.0);
        assert_eq!(s.exact_match, 100.0);
        assert_eq!(s.sentences, 2);
    }

    #[test]
    fn half_match_example() {
        // Gold has constituents S{0,1,2} and VP{1,2}; the prediction
        // relabels VP as NP, so exactly one of two matches.
        let gold = vec![t("(S (dt 0=x) (VP (n 1=y) (vb 2=z)))", "s1")];
        let pred = vec![t("(S (dt 0=x) (NP (n 1=y) (vb 2=z)))", "s1")];
        let s = score(&gold, &pred, &ScoreCfg::default()).unwrap();
        assert_eq!(s.precision, 50.0);
        assert_eq!(s.recall, 50.0);
        assert_eq!(s.f1, 50.0);
        assert_eq!(s.exact_match, 0.0);
    }

    #[test]
    fn discontinuous_yields_must_match_exactly() {
        // Gold VP yields {0,2}; predicted VP yields {0,1}: same label,
        // different yield set, so only S matches.
        let gold = vec![t("(S (VP (vb 0=a) (n 2=c)) (dt 1=b))", "s1")];
        let pred = vec![t("(S (VP (vb 0=a) (dt 1=b)) (n 2=c))", "s1")];
        let s = score(&gold, &pred, &ScoreCfg::default()).unwrap();
        assert_eq!(s.precision, 50.0);
        assert_eq!(s.recall, 50.0);
        assert_eq!(s.exact_match, 0.0);
    }

    #[test]
    fn preterminals_and_root_toggles() {
        let gold = vec![t("(S (dt 0=x) (VP (n 1=y) (vb 2=z)))", "s1")];
        let pred = vec![t("(S (dt 0=x) (NP (n 1=y) (vb 2=z)))", "s1")];
        // Including preterminals adds dt/n/vb, all matching: 4/5.
        let cfg = ScoreCfg {
            include_preterminals: true,
            include_root: true,
        };
        let s = score(&gold, &pred, &cfg).unwrap();
        assert_eq!(s.precision, 80.0);
        assert_eq!(s.recall, 80.0);
        // Excluding the root leaves only VP vs NP: nothing matches.
        let cfg = ScoreCfg {
            include_preterminals: false,
            include_root: false,
        };
        let s = score(&gold, &pred, &cfg).unwrap();
        assert_eq!(s.precision, 0.0);
        assert_eq!(s.recall, 0.0);
        assert_eq!(s.f1, 0.0);
    }

    #[test]
    fn empty_totals_score_100() {
        let s = score(&[], &[], &ScoreCfg::default()).unwrap();
        assert_eq!(s.precision, 100.0);
        assert_eq!(s.recall, 100.0);
        assert_eq!(s.exact_match, 100.0);

        // Root excluded and only preterminals present: zero constituents
        // on both sides.
        let gold = vec![t("(S (n 0=w))", "s1")];
        let cfg = ScoreCfg {
            include_preterminals: false,
            include_root: false,
        };
        let s = score(&gold, &gold, &cfg).unwrap();
        assert_eq!(s.precision, 100.0);
        assert_eq!(s.recall, 100.0);
        assert_eq!(s.exact_match, 100.0);
    }

    #[test]
    fn alignment_errors() {
        let a = vec![t("(S (n 0=w))", "s1")];
        let b = vec![t("(S (n 0=w))", "s2")];
        assert!(matches!(
            score(&a, &b, &ScoreCfg::default()),
            Err(TreebankError::Alignment(_))
        ));
        assert!(matches!(
            score(&a, &[], &ScoreCfg::default()),
            Err(TreebankError::Alignment(_))
        ));
        let c = vec![t("(S (n 0=v))", "s1")];
        assert!(matches!(
            score(&a, &c, &ScoreCfg::default()),
            Err(TreebankError::Alignment(_))
        ));
    }

    #[test]
    fn duplicate_constituents_match_as_multisets() {
        // Gold has two identical (X {0}) constituents stacked; predicted
        // has one. Multiset intersection counts it once.
        let gold = vec![t("(S (X (X (n 0=w))) (m 1=v))", "s1")];
        let pred = vec![t("(S (X (n 0=w)) (m 1=v))", "s1")];
        let s = score(&gold, &pred, &ScoreCfg::default()).unwrap();
        // Gold: S, X{0}, X{0}. Pred: S, X{0}. Matched: S + one X = 2.
        assert!((s.precision - 100.0).abs() < 1e-9);
        assert!((s.recall - 100.0 * 2.0 / 3.0).abs() < 1e-9);
    }
}
