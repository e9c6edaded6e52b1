//! Regression random forest with random split points.
//!
//! Each tree is grown on a bootstrap resample of one arm. At every node a
//! random subset of features is considered and, for each, a fixed number of
//! candidate thresholds is drawn uniformly from the node's observed range of
//! that feature. The candidate minimising the summed child squared error is
//! kept when it strictly improves on the parent; ties keep the first
//! candidate encountered. All randomness flows through a [`SeedStream`], one
//! child stream per tree, so a fitted forest is a pure function of the data,
//! the parameters, and the stream — independent of thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{ArmView, Dataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::predict::ForestParams;
use crate::rng::SeedStream;

/// One node of a fitted tree. Rows with `feature ≤ threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: u32, right: u32 },
}

/// A fitted regression tree; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    idx = if row[*feature] <= *threshold { *left as usize } else { *right as usize };
                }
            }
        }
    }

    /// Depth of the deepest node, with the root at depth 0.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], idx: usize, depth: usize) -> usize {
            match &nodes[idx] {
                Node::Leaf { .. } => depth,
                Node::Split { left, right, .. } => walk(nodes, *left as usize, depth + 1)
                    .max(walk(nodes, *right as usize, depth + 1)),
            }
        }
        walk(&self.nodes, 0, 0)
    }
}

/// A fitted forest: the ensemble prediction is the mean over trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    covariates: usize,
}

impl ForestModel {
    pub fn covariate_count(&self) -> usize {
        self.covariates
    }
}

/// Fit a forest on one arm, one child stream per tree.
pub fn fit_forest(
    d: &Dataset,
    arm: &ArmView,
    params: &ForestParams,
    stream: SeedStream,
) -> Result<ForestModel> {
    params.validate()?;
    let mtry = params.mtry.resolve(d.p());
    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream.child(t as u64).rng();
            grow_tree(d, arm, params, mtry, &mut rng)
        })
        .collect();
    Ok(ForestModel { trees, covariates: d.p() })
}

/// Predict the outcome for every row of `d` as the mean of the tree outputs.
pub fn predict_forest(model: &ForestModel, d: &Dataset) -> Result<Vec<f64>> {
    if model.covariates != d.p() {
        return Err(Error::DimensionMismatch { expected: model.covariates, got: d.p() });
    }
    let covs = d.covariates();
    let scale = 1.0 / model.trees.len() as f64;
    let mut out = vec![0.0; d.n()];
    for (i, slot) in out.iter_mut().enumerate() {
        let row = covs.row(i);
        let mut acc = 0.0;
        for tree in &model.trees {
            acc += tree.predict_row(row);
        }
        *slot = acc * scale;
    }
    Ok(out)
}

fn grow_tree(
    d: &Dataset,
    arm: &ArmView,
    params: &ForestParams,
    mtry: usize,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let m = arm.len();
    let mut rows: Vec<u32> = if params.bootstrap {
        (0..m).map(|_| arm.indices[rng.random_range(0..m)] as u32).collect()
    } else {
        arm.indices.iter().map(|&i| i as u32).collect()
    };
    let mut builder = TreeBuilder {
        covs: d.covariates(),
        outcome: d.outcome(),
        params,
        mtry,
        p: d.p(),
        nodes: Vec::new(),
        features: Vec::with_capacity(d.p()),
        partition: Vec::with_capacity(m),
        feat_vals: Vec::with_capacity(m),
        node_ys: Vec::with_capacity(m),
    };
    builder.grow(&mut rows, 0, rng);
    Tree { nodes: builder.nodes }
}

struct TreeBuilder<'a> {
    covs: &'a Matrix,
    outcome: &'a [f64],
    params: &'a ForestParams,
    mtry: usize,
    p: usize,
    nodes: Vec<Node>,
    features: Vec<usize>,
    partition: Vec<u32>,
    feat_vals: Vec<f64>,
    node_ys: Vec<f64>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
}

impl TreeBuilder<'_> {
    /// Grow the subtree for `rows`, returning its node index. Nodes are laid
    /// out in visit order (parent, left subtree, right subtree), so the draw
    /// sequence is a deterministic function of the data.
    fn grow(&mut self, rows: &mut [u32], depth: usize, rng: &mut ChaCha8Rng) -> u32 {
        let min_leaf = self.params.min_leaf_size;
        if depth == self.params.max_depth || rows.len() < 2 * min_leaf {
            return self.push_leaf(rows);
        }
        let Some(best) = self.find_best_split(rows, rng) else {
            return self.push_leaf(rows);
        };
        let split_at = stable_partition(rows, &mut self.partition, |r| {
            self.covs.get(r as usize, best.feature) <= best.threshold
        });
        let idx = self.nodes.len() as u32;
        // Placeholder patched once both children exist.
        self.nodes.push(Node::Leaf { value: f64::NAN });
        let (left_rows, right_rows) = rows.split_at_mut(split_at);
        let left = self.grow(left_rows, depth + 1, rng);
        let right = self.grow(right_rows, depth + 1, rng);
        self.nodes[idx as usize] =
            Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        idx
    }

    fn push_leaf(&mut self, rows: &[u32]) -> u32 {
        let sum: f64 = rows.iter().map(|&r| self.outcome[r as usize]).sum();
        let idx = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf { value: sum / rows.len() as f64 });
        idx
    }

    fn find_best_split(&mut self, rows: &[u32], rng: &mut ChaCha8Rng) -> Option<BestSplit> {
        self.node_ys.clear();
        self.node_ys.extend(rows.iter().map(|&r| self.outcome[r as usize]));
        let cnt = self.node_ys.len() as f64;
        let sum: f64 = self.node_ys.iter().sum();
        let sumsq: f64 = self.node_ys.iter().map(|y| y * y).sum();
        let parent_sse = sumsq - sum * sum / cnt;

        // Sample `mtry` distinct features by partial Fisher–Yates.
        self.features.clear();
        self.features.extend(0..self.p);
        for i in 0..self.mtry {
            let j = rng.random_range(i..self.p);
            self.features.swap(i, j);
        }

        let min_leaf = self.params.min_leaf_size;
        let mut best: Option<BestSplit> = None;
        let mut best_sse = parent_sse;
        for fi in 0..self.mtry {
            let feature = self.features[fi];
            self.feat_vals.clear();
            self.feat_vals.extend(rows.iter().map(|&r| self.covs.get(r as usize, feature)));
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &v in &self.feat_vals {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if !(lo < hi) {
                // Constant feature in this node: no thresholds are drawn.
                continue;
            }
            for _ in 0..self.params.n_split_points {
                let threshold = rng.random_range(lo..hi);
                let mut cnt_l = 0.0;
                let mut sum_l = 0.0;
                let mut sumsq_l = 0.0;
                for (v, y) in self.feat_vals.iter().zip(&self.node_ys) {
                    if *v <= threshold {
                        cnt_l += 1.0;
                        sum_l += y;
                        sumsq_l += y * y;
                    }
                }
                let cnt_r = cnt - cnt_l;
                if cnt_l < min_leaf as f64 || cnt_r < min_leaf as f64 {
                    continue;
                }
                let sse = (sumsq_l - sum_l * sum_l / cnt_l)
                    + ((sumsq - sumsq_l) - (sum - sum_l) * (sum - sum_l) / cnt_r);
                if sse < best_sse {
                    best_sse = sse;
                    best = Some(BestSplit { feature, threshold });
                }
            }
        }
        best
    }
}

/// Order-preserving partition: rows satisfying `goes_left` move to the front,
/// the rest to the back, both sides keeping their relative order. Returns the
/// boundary index.
fn stable_partition(rows: &mut [u32], scratch: &mut Vec<u32>, goes_left: impl Fn(u32) -> bool) -> usize {
    scratch.clear();
    let mut write = 0;
    for i in 0..rows.len() {
        let r = rows[i];
        if goes_left(r) {
            rows[write] = r;
            write += 1;
        } else {
            scratch.push(r);
        }
    }
    rows[write..].copy_from_slice(scratch);
    write
}
