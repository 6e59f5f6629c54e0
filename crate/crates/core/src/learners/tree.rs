//! Decision-tree induction by gain ratio with pessimistic pruning.
//!
//! Numeric features split at midpoints between consecutive distinct values
//! (`x <= threshold` goes left); categorical features split multiway, one
//! branch per vocabulary entry. A split is admissible when at least two
//! branches receive `min_examples_per_leaf` examples. Among admissible
//! splits with positive information gain the highest gain ratio wins, ties
//! going to the lowest feature index and then the lowest threshold. When
//! no split has positive gain, a zero-gain split is still taken if one of
//! its children has a positive-gain split (one level of lookahead), which
//! lets parity-like concepts be learned.
//!
//! Pruning replaces a subtree by a leaf when the leaf's pessimistic error
//! estimate is no worse than the subtree's (plus 0.1). The estimate is
//! `N * U`, where `U` is the normal-approximation upper confidence limit
//! on the error rate at the configured confidence factor.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind};
use crate::error::{Error, Result};
use crate::stats;

const GAIN_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeOptions {
    pub pruning_enabled: bool,
    pub confidence_factor: f64,
    pub min_examples_per_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions {
            pruning_enabled: true,
            confidence_factor: 0.25,
            min_examples_per_leaf: 2,
            max_depth: None,
        }
    }
}

impl TreeOptions {
    pub fn unpruned() -> Self {
        TreeOptions {
            pruning_enabled: false,
            min_examples_per_leaf: 1,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.confidence_factor > 0.0 && self.confidence_factor < 1.0) {
            return Err(Error::invalid(format!(
                "confidence factor {} outside (0, 1)",
                self.confidence_factor
            )));
        }
        if self.min_examples_per_leaf == 0 {
            return Err(Error::invalid("min_examples_per_leaf must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    Leaf {
        /// Training class counts used for the probability estimate. Empty
        /// branches inherit their parent's counts.
        counts: Vec<u32>,
        /// Training examples that reached this leaf.
        support: u32,
    },
    Numeric {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
        counts: Vec<u32>,
    },
    Categorical {
        feature: usize,
        children: Vec<TreeNode>,
        /// Child taking values outside the vocabulary.
        majority_child: usize,
        counts: Vec<u32>,
    },
}

impl TreeNode {
    fn counts(&self) -> &[u32] {
        match self {
            TreeNode::Leaf { counts, .. } | TreeNode::Numeric { counts, .. } | TreeNode::Categorical { counts, .. } => {
                counts
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Numeric { left, right, .. } => left.leaf_count() + right.leaf_count(),
            TreeNode::Categorical { children, .. } => children.iter().map(|c| c.leaf_count()).sum(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Numeric { left, right, .. } => 1 + left.depth().max(right.depth()),
            TreeNode::Categorical { children, .. } => 1 + children.iter().map(|c| c.depth()).max().unwrap_or(0),
        }
    }
}

/// A trained tree over `n_classes` target values.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTree {
    pub n_classes: usize,
    pub arity: usize,
    pub root: TreeNode,
}

impl DecisionTree {
    /// Laplace-smoothed class distribution `(c_i + 1) / (n + k)` at the
    /// leaf reached by `x`.
    pub fn distribution(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.arity {
            return Err(Error::invalid(format!(
                "feature vector of length {} for a tree over {} features",
                x.len(),
                self.arity
            )));
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { counts, .. } => {
                    let n: u32 = counts.iter().sum();
                    let denom = n as f64 + self.n_classes as f64;
                    return Ok(counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect());
                }
                TreeNode::Numeric {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
                TreeNode::Categorical {
                    feature,
                    children,
                    majority_child,
                    ..
                } => {
                    let v = x[*feature];
                    let idx = if v >= 0.0 && v.fract() == 0.0 && (v as usize) < children.len() {
                        v as usize
                    } else {
                        *majority_child
                    };
                    node = &children[idx];
                }
            }
        }
    }

    /// Probability that the target is 1, for two-class trees.
    pub fn prob(&self, x: &[f64]) -> Result<f64> {
        if self.n_classes != 2 {
            return Err(Error::invalid("prob() needs a two-class tree"));
        }
        Ok(self.distribution(x)?[1])
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaf_count()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tree 1");
        let _ = writeln!(out, "classes {}", self.n_classes);
        let _ = writeln!(out, "arity {}", self.arity);
        fn counts(c: &[u32]) -> String {
            c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
        }
        fn walk(n: &TreeNode, out: &mut String) {
            match n {
                TreeNode::Leaf { counts: c, support } => {
                    let _ = writeln!(out, "leaf {support} {}", counts(c));
                }
                TreeNode::Numeric {
                    feature,
                    threshold,
                    left,
                    right,
                    counts: c,
                } => {
                    let _ = writeln!(out, "num {feature} {threshold:?} {}", counts(c));
                    walk(left, out);
                    walk(right, out);
                }
                TreeNode::Categorical {
                    feature,
                    children,
                    majority_child,
                    counts: c,
                } => {
                    let _ = writeln!(out, "cat {feature} {} {majority_child} {}", children.len(), counts(c));
                    for ch in children {
                        walk(ch, out);
                    }
                }
            }
        }
        walk(&self.root, &mut out);
        out
    }

    pub fn from_text(text: &str) -> Result<DecisionTree> {
        let bad = |m: String| Error::Bundle(format!("tree: {m}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut header = |key: &str| -> Result<usize> {
            let l = lines.next().ok_or_else(|| bad(format!("missing {key}")))?;
            let mut p = l.split_whitespace();
            match (p.next(), p.next().and_then(|v| v.parse().ok())) {
                (Some(k), Some(v)) if k == key => Ok(v),
                _ => Err(bad(format!("expected `{key} <n>`, got {l:?}"))),
            }
        };
        if header("tree")? != 1 {
            return Err(bad("unsupported version".into()));
        }
        let n_classes = header("classes")?;
        let arity = header("arity")?;
        let rest: Vec<&str> = lines.collect();
        let mut pos = 0;
        fn parse_counts(parts: &[&str], k: usize) -> Option<Vec<u32>> {
            let c: Option<Vec<u32>> = parts.iter().map(|v| v.parse().ok()).collect();
            c.filter(|c| c.len() == k)
        }
        fn node(rest: &[&str], pos: &mut usize, k: usize, arity: usize) -> Option<TreeNode> {
            let line = rest.get(*pos)?;
            *pos += 1;
            let p: Vec<&str> = line.split_whitespace().collect();
            match p.first().copied()? {
                "leaf" => Some(TreeNode::Leaf {
                    support: p.get(1)?.parse().ok()?,
                    counts: parse_counts(&p[2..], k)?,
                }),
                "num" => {
                    let feature: usize = p.get(1)?.parse().ok()?;
                    let threshold: f64 = p.get(2)?.parse().ok()?;
                    let counts = parse_counts(&p[3..], k)?;
                    (feature < arity).then_some(())?;
                    let left = Box::new(node(rest, pos, k, arity)?);
                    let right = Box::new(node(rest, pos, k, arity)?);
                    Some(TreeNode::Numeric {
                        feature,
                        threshold,
                        left,
                        right,
                        counts,
                    })
                }
                "cat" => {
                    let feature: usize = p.get(1)?.parse().ok()?;
                    let nch: usize = p.get(2)?.parse().ok()?;
                    let majority_child: usize = p.get(3)?.parse().ok()?;
                    let counts = parse_counts(&p[4..], k)?;
                    (feature < arity && majority_child < nch && nch >= 2).then_some(())?;
                    let children = (0..nch)
                        .map(|_| node(rest, pos, k, arity))
                        .collect::<Option<Vec<_>>>()?;
                    Some(TreeNode::Categorical {
                        feature,
                        children,
                        majority_child,
                        counts,
                    })
                }
                _ => None,
            }
        }
        let root = node(&rest, &mut pos, n_classes, arity).ok_or_else(|| bad("malformed node".into()))?;
        if pos != rest.len() {
            return Err(bad("trailing lines".into()));
        }
        Ok(DecisionTree { n_classes, arity, root })
    }
}

/// Entropy in bits of a count vector.
pub fn entropy(counts: &[f64]) -> f64 {
    let n: f64 = counts.iter().sum();
    if n <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / n;
            -p * p.log2()
        })
        .sum()
}

/// Information gain and split information of partitioning `parent` into
/// `branches`.
pub fn gain_and_split_info(parent: &[f64], branches: &[Vec<f64>]) -> (f64, f64) {
    let n: f64 = parent.iter().sum();
    let mut remainder = 0.0;
    let mut split_info = 0.0;
    for b in branches {
        let nb: f64 = b.iter().sum();
        if nb > 0.0 {
            let w = nb / n;
            remainder += w * entropy(b);
            split_info -= w * w.log2();
        }
    }
    (entropy(parent) - remainder, split_info)
}

#[derive(Clone, Debug, PartialEq)]
pub enum SplitTest {
    Threshold(f64),
    Multiway(usize),
}

/// A candidate test at a node, with its class counts per branch.
#[derive(Clone, Debug)]
pub struct SplitCandidate {
    pub feature: usize,
    pub test: SplitTest,
    pub branch_counts: Vec<Vec<f64>>,
    pub gain: f64,
    pub split_info: f64,
    pub gain_ratio: f64,
    pub admissible: bool,
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    targets: &'a [usize],
    kinds: Vec<Option<usize>>, // None = numeric, Some(v) = categorical arity
    k: usize,
    opts: &'a TreeOptions,
}

impl Grower<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<u32> {
        let mut c = vec![0u32; self.k];
        for &i in idx {
            c[self.targets[i]] += 1;
        }
        c
    }

    fn candidate(
        &self,
        feature: usize,
        test: SplitTest,
        branch_counts: Vec<Vec<f64>>,
        parent: &[f64],
    ) -> SplitCandidate {
        let (gain, split_info) = gain_and_split_info(parent, &branch_counts);
        let min = self.opts.min_examples_per_leaf as f64;
        let big = branch_counts.iter().filter(|b| b.iter().sum::<f64>() >= min).count();
        let gain_ratio = if split_info > 0.0 { gain / split_info } else { 0.0 };
        SplitCandidate {
            feature,
            test,
            branch_counts,
            gain,
            split_info,
            gain_ratio,
            admissible: big >= 2 && split_info > 0.0,
        }
    }

    /// Every candidate test at a node, by feature then ascending threshold.
    fn candidates(&self, idx: &[usize]) -> Vec<SplitCandidate> {
        let parent: Vec<f64> = self.counts(idx).into_iter().map(f64::from).collect();
        let mut out = Vec::new();
        for (f, kind) in self.kinds.iter().enumerate() {
            match *kind {
                Some(arity) => {
                    let mut branches = vec![vec![0.0; self.k]; arity];
                    for &i in idx {
                        let v = self.rows[i][f] as usize;
                        branches[v.min(arity - 1)][self.targets[i]] += 1.0;
                    }
                    out.push(self.candidate(f, SplitTest::Multiway(arity), branches, &parent));
                }
                None => {
                    let mut order: Vec<usize> = idx.to_vec();
                    order.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]));
                    let mut left = vec![0.0; self.k];
                    for w in 0..order.len().saturating_sub(1) {
                        left[self.targets[order[w]]] += 1.0;
                        let a = self.rows[order[w]][f];
                        let b = self.rows[order[w + 1]][f];
                        if a == b {
                            continue;
                        }
                        let mut t = a + (b - a) / 2.0;
                        if t >= b {
                            t = a;
                        }
                        let right: Vec<f64> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
                        out.push(self.candidate(f, SplitTest::Threshold(t), vec![left.clone(), right], &parent));
                    }
                }
            }
        }
        out
    }

    fn best_positive(cands: &[SplitCandidate]) -> Option<&SplitCandidate> {
        let mut best: Option<&SplitCandidate> = None;
        for c in cands.iter().filter(|c| c.admissible && c.gain > GAIN_EPS) {
            if best.is_none_or(|b| c.gain_ratio > b.gain_ratio) {
                best = Some(c);
            }
        }
        best
    }

    fn partition(&self, idx: &[usize], feature: usize, test: &SplitTest) -> Vec<Vec<usize>> {
        match *test {
            SplitTest::Threshold(t) => {
                let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.rows[i][feature] <= t);
                vec![l, r]
            }
            SplitTest::Multiway(arity) => {
                let mut parts = vec![Vec::new(); arity];
                for &i in idx {
                    parts[(self.rows[i][feature] as usize).min(arity - 1)].push(i);
                }
                parts
            }
        }
    }

    fn can_split(&self, idx: &[usize], counts: &[u32], depth: usize) -> bool {
        let nonzero = counts.iter().filter(|&&c| c > 0).count();
        nonzero > 1 && idx.len() >= 2 * self.opts.min_examples_per_leaf && self.opts.max_depth.is_none_or(|d| depth < d)
    }

    fn grow(&self, idx: &[usize], depth: usize) -> TreeNode {
        let counts = self.counts(idx);
        let leaf = || TreeNode::Leaf {
            counts: counts.clone(),
            support: idx.len() as u32,
        };
        if !self.can_split(idx, &counts, depth) {
            return leaf();
        }
        let cands = self.candidates(idx);
        let chosen = match Self::best_positive(&cands) {
            Some(c) => Some((c.feature, c.test.clone())),
            None => self.lookahead(idx, &cands, depth),
        };
        let Some((feature, test)) = chosen else {
            return leaf();
        };
        let parts = self.partition(idx, feature, &test);
        let mut children: Vec<TreeNode> = parts
            .iter()
            .map(|p| {
                if p.is_empty() {
                    TreeNode::Leaf {
                        counts: counts.clone(),
                        support: 0,
                    }
                } else {
                    self.grow(p, depth + 1)
                }
            })
            .collect();
        match test {
            SplitTest::Threshold(threshold) => {
                let right = children.pop().expect("two branches");
                let left = children.pop().expect("two branches");
                TreeNode::Numeric {
                    feature,
                    threshold,
                    left: Box::new(left),
                    right: Box::new(right),
                    counts,
                }
            }
            SplitTest::Multiway(_) => {
                let mut majority_child = 0;
                for (i, p) in parts.iter().enumerate() {
                    if p.len() > parts[majority_child].len() {
                        majority_child = i;
                    }
                }
                TreeNode::Categorical {
                    feature,
                    children,
                    majority_child,
                    counts,
                }
            }
        }
    }

    /// First admissible zero-gain split (in candidate order) under which
    /// some child has a positive-gain split.
    fn lookahead(&self, idx: &[usize], cands: &[SplitCandidate], depth: usize) -> Option<(usize, SplitTest)> {
        if self.opts.max_depth.is_some_and(|d| depth + 1 >= d) {
            return None;
        }
        for c in cands.iter().filter(|c| c.admissible) {
            let parts = self.partition(idx, c.feature, &c.test);
            let promising = parts.iter().any(|p| {
                let pc = self.counts(p);
                self.can_split(p, &pc, depth + 1) && Self::best_positive(&self.candidates(p)).is_some()
            });
            if promising {
                return Some((c.feature, c.test.clone()));
            }
        }
        None
    }
}

/// Normal-approximation upper confidence limit on the error rate of a leaf
/// with `errors` misclassified out of `n`, at confidence factor `cf`.
pub fn pessimistic_error_rate(errors: f64, n: f64, cf: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    let z = stats::normal_quantile(1.0 - cf);
    let f = errors / n;
    let z2 = z * z;
    let num = f + z2 / (2.0 * n) + z * (f / n - f * f / n + z2 / (4.0 * n * n)).max(0.0).sqrt();
    (num / (1.0 + z2 / n)).min(1.0)
}

fn leaf_estimate(counts: &[u32], support: u32, cf: f64) -> f64 {
    if support == 0 {
        return 0.0;
    }
    let n: u32 = counts.iter().sum();
    let errors = n - counts.iter().max().copied().unwrap_or(0);
    n as f64 * pessimistic_error_rate(errors as f64, n as f64, cf)
}

/// Bottom-up subtree replacement; returns the estimated error count.
fn prune(node: &mut TreeNode, cf: f64) -> f64 {
    let subtree = match node {
        TreeNode::Leaf { counts, support } => return leaf_estimate(counts, *support, cf),
        TreeNode::Numeric { left, right, .. } => prune(left, cf) + prune(right, cf),
        TreeNode::Categorical { children, .. } => children.iter_mut().map(|c| prune(c, cf)).sum(),
    };
    let counts = node.counts().to_vec();
    let support: u32 = counts.iter().sum();
    let as_leaf = leaf_estimate(&counts, support, cf);
    if as_leaf <= subtree + 0.1 {
        *node = TreeNode::Leaf { counts, support };
        as_leaf
    } else {
        subtree
    }
}

fn feature_kinds(data: &Dataset) -> Vec<Option<usize>> {
    data.schema
        .features
        .iter()
        .map(|f| match &f.kind {
            FeatureKind::Numeric => None,
            FeatureKind::Categorical(v) => Some(v.len()),
        })
        .collect()
}

fn check_targets(data: &Dataset, targets: &[usize], n_classes: usize) -> Result<()> {
    if n_classes < 2 {
        return Err(Error::invalid(format!(
            "a tree needs at least 2 target values, got {n_classes}"
        )));
    }
    if targets.len() != data.len() {
        return Err(Error::invalid(format!(
            "{} targets for {} examples",
            targets.len(),
            data.len()
        )));
    }
    if let Some((i, t)) = targets.iter().enumerate().find(|(_, &t)| t >= n_classes) {
        return Err(Error::invalid(format!("target {t} of example {i} >= {n_classes}")));
    }
    Ok(())
}

/// Grow (and optionally prune) a tree predicting `targets`, each in
/// `0..n_classes`.
pub fn train_tree(data: &Dataset, targets: &[usize], n_classes: usize, opts: &TreeOptions) -> Result<DecisionTree> {
    opts.check()?;
    check_targets(data, targets, n_classes)?;
    let grower = Grower {
        rows: &data.rows,
        targets,
        kinds: feature_kinds(data),
        k: n_classes,
        opts,
    };
    let idx: Vec<usize> = (0..data.len()).collect();
    let mut root = grower.grow(&idx, 0);
    if opts.pruning_enabled {
        prune(&mut root, opts.confidence_factor);
    }
    Ok(DecisionTree {
        n_classes,
        arity: data.schema.arity(),
        root,
    })
}

/// All candidate tests at the root, in evaluation order.
pub fn root_split_candidates(
    data: &Dataset,
    targets: &[usize],
    n_classes: usize,
    opts: &TreeOptions,
) -> Result<Vec<SplitCandidate>> {
    check_targets(data, targets, n_classes)?;
    let grower = Grower {
        rows: &data.rows,
        targets,
        kinds: feature_kinds(data),
        k: n_classes,
        opts,
    };
    let idx: Vec<usize> = (0..data.len()).collect();
    Ok(grower.candidates(&idx))
}
