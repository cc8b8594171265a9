//! Position fragility: betweenness centrality of attacked pieces in the piece
//! interaction graph.
//!
//! Nodes are occupied squares. A directed edge `u -> v` exists when the piece
//! on `u` could pseudo-legally capture onto `v` (pins and checks ignored): an
//! attack edge if `v` holds an enemy piece, a defense edge if it holds a
//! friendly one. Centrality is computed on the undirected projection.
//!
//! The score is the betweenness mass on attacked pieces divided by the number
//! of pieces, which lies in `[0, 1]` and is zero without any attack.

use serde::Serialize;

use crate::chess::{Piece, Position, Square};

/// Fixed-point scale for dependency accumulation. Sums of integers do not
/// depend on visiting order, so relabelled graphs (e.g. a colour-mirrored
/// board) give bit-identical centralities.
const FIXED_SCALE: f64 = (1u64 << 32) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Attack,
    Defense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphNode {
    pub square: Square,
    pub piece: Piece,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InteractionGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<Edge>,
}

impl InteractionGraph {
    pub fn attack_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Attack)
    }

    pub fn defense_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::Defense)
    }

    /// Node indices that are the target of at least one attack edge.
    pub fn attacked_nodes(&self) -> Vec<usize> {
        let mut hit = vec![false; self.nodes.len()];
        for e in self.attack_edges() {
            hit[e.to] = true;
        }
        (0..self.nodes.len()).filter(|&i| hit[i]).collect()
    }

    /// Sorted, deduplicated neighbour lists of the undirected projection.
    pub fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if e.from != e.to {
                adj[e.from].push(e.to);
                adj[e.to].push(e.from);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }
}

pub fn build_interaction_graph(pos: &Position) -> InteractionGraph {
    let nodes: Vec<GraphNode> = pos
        .pieces()
        .map(|(square, piece)| GraphNode { square, piece })
        .collect();
    let mut index = [usize::MAX; 64];
    for (i, n) in nodes.iter().enumerate() {
        index[n.square.index()] = i;
    }
    let mut edges = Vec::new();
    for (from, node) in nodes.iter().enumerate() {
        for target in pos.attacked_squares(node.square) {
            let to = index[target.index()];
            if to == usize::MAX {
                continue;
            }
            let kind = if nodes[to].piece.color == node.piece.color {
                EdgeKind::Defense
            } else {
                EdgeKind::Attack
            };
            edges.push(Edge { from, to, kind });
        }
    }
    InteractionGraph { nodes, edges }
}

/// Betweenness of every node in fixed-point units (`FIXED_SCALE` per unit of
/// pair dependency), counting each unordered pair twice.
fn brandes_fixed(adj: &[Vec<usize>]) -> Vec<u128> {
    let n = adj.len();
    let mut total = vec![0u128; n];
    let mut sigma = vec![0u64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0u64; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::with_capacity(n);
    for s in 0..n {
        sigma.fill(0);
        dist.fill(usize::MAX);
        delta.fill(0);
        order.clear();
        sigma[s] = 1;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        for &w in order.iter().rev() {
            let carried = 1.0 + delta[w] as f64 / FIXED_SCALE;
            for &v in &adj[w] {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    let share = sigma[v] as f64 / sigma[w] as f64 * carried;
                    delta[v] += (share * FIXED_SCALE).round() as u64;
                }
            }
            if w != s {
                total[w] += delta[w] as u128;
            }
        }
    }
    total
}

fn pair_normalizer(n: usize) -> Option<f64> {
    (n >= 3).then(|| ((n - 1) * (n - 2)) as f64 / 2.0)
}

/// Brandes betweenness on an undirected graph, normalized by `(n-1)(n-2)/2`
/// (all zeros when `n < 3`).
pub fn betweenness_undirected(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let Some(norm) = pair_normalizer(n) else {
        return vec![0.0; n];
    };
    brandes_fixed(adj)
        .into_iter()
        .map(|t| (t as f64 / FIXED_SCALE / 2.0 / norm).clamp(0.0, 1.0))
        .collect()
}

pub fn betweenness_centrality(g: &InteractionGraph) -> Vec<f64> {
    betweenness_undirected(&g.undirected_adjacency())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceCentrality {
    pub square: String,
    pub piece: char,
    pub betweenness: f64,
    pub attacked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FragilityReport {
    pub pieces: Vec<PieceCentrality>,
    pub score: f64,
}

impl FragilityReport {
    pub fn attacked(&self) -> impl Iterator<Item = &PieceCentrality> {
        self.pieces.iter().filter(|p| p.attacked)
    }
}

/// Scores an already-built graph.
pub fn score_graph(g: &InteractionGraph) -> FragilityReport {
    let adj = g.undirected_adjacency();
    let n = g.nodes.len();
    let fixed = brandes_fixed(&adj);
    let bc = betweenness_undirected(&adj);
    let attacked = g.attacked_nodes();
    let score = match pair_normalizer(n) {
        Some(norm) if !attacked.is_empty() => {
            let mass: u128 = attacked.iter().map(|&i| fixed[i]).sum();
            (mass as f64 / FIXED_SCALE / 2.0 / norm / n as f64).clamp(0.0, 1.0)
        }
        _ => 0.0,
    };
    let mut is_attacked = vec![false; n];
    for &i in &attacked {
        is_attacked[i] = true;
    }
    let pieces = g
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| PieceCentrality {
            square: node.square.to_string(),
            piece: node.piece.fen_char(),
            betweenness: bc[i],
            attacked: is_attacked[i],
        })
        .collect();
    FragilityReport { pieces, score }
}

pub fn fragility_report(pos: &Position) -> FragilityReport {
    score_graph(&build_interaction_graph(pos))
}

pub fn fragility_score(pos: &Position) -> f64 {
    fragility_report(pos).score
}
