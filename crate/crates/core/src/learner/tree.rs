use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        /// Present values `<= threshold` go left.
        threshold: f64,
        /// Side taken by missing values.
        missing_left: bool,
        gain: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A regression tree stored as a node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.walk(|f| row[f])
    }

    pub(crate) fn predict_column(&self, data: &Columns, i: usize) -> f64 {
        self.walk(|f| data.cols[f][i])
    }

    fn walk(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    missing_left,
                    left,
                    right,
                    ..
                } => {
                    let x = value(*feature);
                    let go_left = if x.is_nan() { *missing_left } else { x <= *threshold };
                    at = if go_left { *left } else { *right };
                }
            }
        }
    }
}

pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub lambda: f64,
}

/// Column-major feature matrix with per-feature orderings, prepared once per
/// training run.
pub(crate) struct Columns {
    pub n: usize,
    pub cols: Vec<Vec<f64>>,
    /// Indices of present values, ascending by value (ties by index).
    pub sorted: Vec<Vec<u32>>,
    pub missing: Vec<Vec<u32>>,
}

impl Columns {
    pub fn new(cols: Vec<Vec<f64>>, n: usize) -> Columns {
        let mut sorted = Vec::with_capacity(cols.len());
        let mut missing = Vec::with_capacity(cols.len());
        for col in &cols {
            let mut present: Vec<u32> = (0..n as u32).filter(|&i| !col[i as usize].is_nan()).collect();
            present.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
            sorted.push(present);
            missing.push((0..n as u32).filter(|&i| col[i as usize].is_nan()).collect());
        }
        Columns {
            n,
            cols,
            sorted,
            missing,
        }
    }
}

#[derive(Clone, Copy, Default)]
struct Stats {
    g: f64,
    h: f64,
    c: usize,
}

impl Stats {
    fn add(&mut self, g: f64, h: f64) {
        self.g += g;
        self.h += h;
        self.c += 1;
    }

    fn minus(self, o: Stats) -> Stats {
        Stats {
            g: self.g - o.g,
            h: self.h - o.h,
            c: self.c - o.c,
        }
    }

    fn plus(self, o: Stats) -> Stats {
        Stats {
            g: self.g + o.g,
            h: self.h + o.h,
            c: self.c + o.c,
        }
    }

    fn score(&self, lambda: f64) -> f64 {
        self.g * self.g / (self.h + lambda)
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    missing_left: bool,
}

const NO_NODE: u32 = u32::MAX;

/// Grows one tree level by level with exact greedy split search. `in_bag`
/// marks the samples that take part; gradients and hessians are already
/// weighted.
pub(crate) fn grow_tree(data: &Columns, grad: &[f64], hess: &[f64], in_bag: &[bool], p: &TreeParams) -> Tree {
    let n = data.n;
    let mut node_of = vec![NO_NODE; n];
    let mut root = Stats::default();
    for i in 0..n {
        if in_bag[i] {
            node_of[i] = 0;
            root.add(grad[i], hess[i]);
        }
    }
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut totals = vec![root];
    let mut frontier = vec![0usize];

    for _depth in 0..p.max_depth {
        if frontier.is_empty() {
            break;
        }
        // position of each tree node in the frontier
        let mut slot = vec![usize::MAX; nodes.len()];
        for (k, &node) in frontier.iter().enumerate() {
            slot[node] = k;
        }
        let mut best: Vec<Option<Candidate>> = vec![None; frontier.len()];
        for f in 0..data.cols.len() {
            let col = &data.cols[f];
            let mut miss = vec![Stats::default(); frontier.len()];
            for &i in &data.missing[f] {
                let node = node_of[i as usize];
                if node != NO_NODE && slot[node as usize] != usize::MAX {
                    miss[slot[node as usize]].add(grad[i as usize], hess[i as usize]);
                }
            }
            let mut left = vec![Stats::default(); frontier.len()];
            let mut prev = vec![f64::NAN; frontier.len()];
            let consider = |k: usize, left: Stats, threshold: f64, miss: Stats, best: &mut Vec<Option<Candidate>>| {
                let total = totals[frontier[k]];
                let parent = total.score(p.lambda);
                for missing_left in [true, false] {
                    let l = if missing_left { left.plus(miss) } else { left };
                    let r = total.minus(l);
                    if l.c < p.min_leaf || r.c < p.min_leaf {
                        continue;
                    }
                    let gain = 0.5 * (l.score(p.lambda) + r.score(p.lambda) - parent);
                    if gain > 0.0 && best[k].is_none_or(|b| gain > b.gain) {
                        best[k] = Some(Candidate {
                            gain,
                            feature: f,
                            threshold,
                            missing_left,
                        });
                    }
                }
            };
            for &i in &data.sorted[f] {
                let node = node_of[i as usize];
                if node == NO_NODE || slot[node as usize] == usize::MAX {
                    continue;
                }
                let k = slot[node as usize];
                let v = col[i as usize];
                if left[k].c > 0 && v > prev[k] {
                    let mid = 0.5 * (prev[k] + v);
                    let threshold = if mid < v { mid } else { prev[k] };
                    consider(k, left[k], threshold, miss[k], &mut best);
                }
                left[k].add(grad[i as usize], hess[i as usize]);
                prev[k] = v;
            }
            // every present value left, missing values alone on the right
            for k in 0..frontier.len() {
                if miss[k].c > 0 && left[k].c > 0 {
                    let total = totals[frontier[k]];
                    let r = miss[k];
                    let l = total.minus(r);
                    if l.c >= p.min_leaf && r.c >= p.min_leaf {
                        let gain = 0.5 * (l.score(p.lambda) + r.score(p.lambda) - total.score(p.lambda));
                        if gain > 0.0 && best[k].is_none_or(|b| gain > b.gain) {
                            best[k] = Some(Candidate {
                                gain,
                                feature: f,
                                threshold: f64::MAX,
                                missing_left: false,
                            });
                        }
                    }
                }
            }
        }

        let mut next = Vec::new();
        let mut child_of = vec![(0usize, 0usize); frontier.len()];
        for (k, &node) in frontier.iter().enumerate() {
            if let Some(c) = best[k] {
                let (l, r) = (nodes.len(), nodes.len() + 1);
                nodes.push(Node::Leaf { value: 0.0 });
                nodes.push(Node::Leaf { value: 0.0 });
                totals.push(Stats::default());
                totals.push(Stats::default());
                nodes[node] = Node::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    missing_left: c.missing_left,
                    gain: c.gain,
                    left: l,
                    right: r,
                };
                child_of[k] = (l, r);
                next.push(l);
                next.push(r);
            }
        }
        for i in 0..n {
            let node = node_of[i];
            if node == NO_NODE || slot[node as usize] == usize::MAX {
                continue;
            }
            let k = slot[node as usize];
            if let Node::Split {
                feature,
                threshold,
                missing_left,
                ..
            } = nodes[node as usize]
            {
                let x = data.cols[feature][i];
                let go_left = if x.is_nan() { missing_left } else { x <= threshold };
                let child = if go_left { child_of[k].0 } else { child_of[k].1 };
                node_of[i] = child as u32;
                totals[child].add(grad[i], hess[i]);
            }
        }
        frontier = next;
    }

    for (node, total) in nodes.iter_mut().zip(&totals) {
        if let Node::Leaf { value } = node {
            *value = -total.g / (total.h + p.lambda);
        }
    }
    Tree { nodes }
}
