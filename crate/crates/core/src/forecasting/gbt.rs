//! Gradient-boosted regression trees with squared loss.
//!
//! One ensemble per forecast step. Trees grow level by level with exact
//! greedy splits found by scanning presorted feature columns; the split gain
//! is the reduction in squared error, `S_L^2/n_L + S_R^2/n_R - S^2/n`. A
//! threshold is the midpoint of two adjacent distinct values of the node and
//! samples with `x < threshold` go left. Leaves hold the shrunken mean residual.

use serde::{Deserialize, Serialize};

use super::lags::DesignMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    /// Stop a step's ensemble after this many rounds without validation
    /// improvement; only used when validation data is supplied.
    pub early_stopping_rounds: Option<usize>,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_rounds: 200,
            max_depth: 6,
            learning_rate: 0.1,
            min_samples_leaf: 5,
            early_stopping_rounds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, features: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if features[feature] < threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Boosted ensemble for one forecast step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub base_score: f64,
    pub trees: Vec<Tree>,
    /// Mean squared training error after each round.
    pub train_loss: Vec<f64>,
}

impl Ensemble {
    pub fn predict(&self, features: &[f64]) -> f64 {
        self.trees
            .iter()
            .fold(self.base_score, |acc, t| acc + t.predict(features))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub width: usize,
    pub params: GbtParams,
    pub ensembles: Vec<Ensemble>,
}

impl GbtModel {
    pub fn horizon(&self) -> usize {
        self.ensembles.len()
    }

    pub fn predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.width {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.width,
                features.len()
            )));
        }
        Ok(self.ensembles.iter().map(|e| e.predict(features)).collect())
    }
}

/// Column-major features with per-feature row orders, shared by all ensembles.
struct Columns {
    n: usize,
    cols: Vec<Vec<f64>>,
    sorted: Vec<Vec<u32>>,
}

impl Columns {
    fn new(design: &DesignMatrix) -> Columns {
        let (n, p) = (design.n_rows, design.width);
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|f| (0..n).map(|i| design.features[i * p + f]).collect())
            .collect();
        let sorted = cols
            .iter()
            .map(|c| {
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Columns { n, cols, sorted }
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Per-node scan state while sweeping one feature.
#[derive(Clone, Copy)]
struct Scan {
    count: usize,
    sum: f64,
    last: f64,
}

fn grow_tree(columns: &Columns, residual: &[f64], params: &GbtParams, leaf_of: &mut [u32]) -> Tree {
    let n = columns.n;
    let min_leaf = params.min_samples_leaf.max(1);
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    // Per-node totals, indexed by node id.
    let mut count = vec![n];
    let mut sum = vec![residual.iter().sum::<f64>()];
    leaf_of.iter_mut().for_each(|l| *l = 0);
    let mut frontier: Vec<usize> = vec![0];

    for _depth in 0..params.max_depth {
        let active: Vec<usize> = frontier
            .iter()
            .copied()
            .filter(|&id| count[id] >= 2 * min_leaf)
            .collect();
        if active.is_empty() {
            break;
        }
        // slot[node] = position in `active`, or usize::MAX.
        let mut slot = vec![usize::MAX; nodes.len()];
        for (k, &id) in active.iter().enumerate() {
            slot[id] = k;
        }
        let mut best: Vec<Option<Candidate>> = vec![None; active.len()];
        let mut scans = vec![
            Scan {
                count: 0,
                sum: 0.0,
                last: 0.0
            };
            active.len()
        ];
        for (f, order) in columns.sorted.iter().enumerate() {
            let col = &columns.cols[f];
            scans.iter_mut().for_each(|s| {
                *s = Scan {
                    count: 0,
                    sum: 0.0,
                    last: 0.0,
                }
            });
            for &row in order {
                let row = row as usize;
                let k = slot[leaf_of[row] as usize];
                if k == usize::MAX {
                    continue;
                }
                let x = col[row];
                let s = &mut scans[k];
                if s.count > 0 && x > s.last {
                    let id = active[k];
                    let (n_l, n_r) = (s.count, count[id] - s.count);
                    if n_l >= min_leaf && n_r >= min_leaf {
                        let threshold = s.last + (x - s.last) * 0.5;
                        if s.last < threshold && threshold < x {
                            let s_r = sum[id] - s.sum;
                            let gain = s.sum * s.sum / n_l as f64 + s_r * s_r / n_r as f64
                                - sum[id] * sum[id] / count[id] as f64;
                            if best[k].is_none_or(|b| gain > b.gain) {
                                best[k] = Some(Candidate {
                                    gain,
                                    feature: f,
                                    threshold,
                                });
                            }
                        }
                    }
                }
                s.count += 1;
                s.sum += residual[row];
                s.last = x;
            }
        }

        let mut next = Vec::new();
        let mut child_of = vec![(0usize, 0usize); active.len()];
        let mut split_any = false;
        for (k, &id) in active.iter().enumerate() {
            let Some(c) = best[k] else { continue };
            let scale = sum[id] * sum[id] / count[id] as f64;
            if !(c.gain > 1e-12 * scale.max(f64::MIN_POSITIVE)) || c.gain <= 0.0 {
                continue;
            }
            let (l, r) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            count.extend([0, 0]);
            sum.extend([0.0, 0.0]);
            nodes[id] = Node::Split {
                feature: c.feature,
                threshold: c.threshold,
                left: l,
                right: r,
            };
            child_of[k] = (l, r);
            next.extend([l, r]);
            split_any = true;
        }
        if !split_any {
            break;
        }
        for row in 0..n {
            let id = leaf_of[row] as usize;
            let k = slot[id];
            if k == usize::MAX {
                continue;
            }
            if let Node::Split { feature, threshold, .. } = nodes[id] {
                let (l, r) = child_of[k];
                let child = if columns.cols[feature][row] < threshold { l } else { r };
                leaf_of[row] = child as u32;
                count[child] += 1;
                sum[child] += residual[row];
            }
        }
        // Unsplit active nodes stay leaves; they remain frontier candidates no longer.
        frontier = next;
    }

    for (id, node) in nodes.iter_mut().enumerate() {
        if let Node::Leaf { value } = node {
            *value = if count[id] > 0 {
                params.learning_rate * sum[id] / count[id] as f64
            } else {
                0.0
            };
        }
    }
    Tree { nodes }
}

fn mean_square(v: &[f64]) -> f64 {
    v.iter().map(|r| r * r).sum::<f64>() / v.len().max(1) as f64
}

/// Fits one ensemble per target column. With `validation` and
/// `early_stopping_rounds` set, each ensemble is cut back to its best
/// validation round.
pub fn fit_gbt(design: &DesignMatrix, params: &GbtParams, validation: Option<&DesignMatrix>) -> Result<GbtModel> {
    if !(params.learning_rate > 0.0 && params.learning_rate <= 1.0) {
        return Err(Error::Config(format!(
            "learning rate must lie in (0, 1], got {}",
            params.learning_rate
        )));
    }
    let n = design.n_rows;
    if n < 2 * params.min_samples_leaf.max(1) {
        return Err(Error::Data(format!(
            "{n} rows are too few for a minimum leaf size of {}",
            params.min_samples_leaf
        )));
    }
    if design.features.iter().chain(&design.targets).any(|v| !v.is_finite()) {
        return Err(Error::Data("design matrix contains non-finite values".into()));
    }
    if let Some(v) = validation {
        if v.width != design.width || v.horizon != design.horizon {
            return Err(Error::Shape(
                "validation design does not match the training design".into(),
            ));
        }
    }
    let columns = Columns::new(design);
    let mut leaf_of = vec![0u32; n];
    let mut ensembles = Vec::with_capacity(design.horizon);
    for h in 0..design.horizon {
        let y = design.target_column(h);
        let base_score = y.iter().sum::<f64>() / n as f64;
        let mut ensemble = Ensemble {
            base_score,
            trees: Vec::new(),
            train_loss: Vec::new(),
        };
        if y.iter().all(|&v| v == y[0]) {
            ensembles.push(ensemble);
            continue;
        }
        let mut residual: Vec<f64> = y.iter().map(|v| v - base_score).collect();
        let val = validation.map(|v| (v, v.target_column(h), vec![base_score; v.n_rows]));
        let mut val_state = val;
        let mut best = (f64::INFINITY, 0usize);
        for round in 0..params.n_rounds {
            let tree = grow_tree(&columns, &residual, params, &mut leaf_of);
            for (r, &leaf) in residual.iter_mut().zip(&leaf_of) {
                if let Node::Leaf { value } = tree.nodes[leaf as usize] {
                    *r -= value;
                }
            }
            ensemble.train_loss.push(mean_square(&residual));
            if let (Some((vd, vy, vp)), Some(patience)) = (val_state.as_mut(), params.early_stopping_rounds) {
                for (i, p) in vp.iter_mut().enumerate() {
                    *p += tree.predict(vd.row(i));
                }
                let loss =
                    vp.iter().zip(vy.iter()).map(|(p, y)| (p - y) * (p - y)).sum::<f64>() / vy.len().max(1) as f64;
                ensemble.trees.push(tree);
                if loss < best.0 {
                    best = (loss, round + 1);
                } else if round + 1 - best.1 >= patience {
                    break;
                }
            } else {
                ensemble.trees.push(tree);
            }
        }
        if val_state.is_some() && params.early_stopping_rounds.is_some() && best.1 > 0 {
            ensemble.trees.truncate(best.1);
            ensemble.train_loss.truncate(best.1);
        }
        ensembles.push(ensemble);
    }
    Ok(GbtModel {
        width: design.width,
        params: params.clone(),
        ensembles,
    })
}
