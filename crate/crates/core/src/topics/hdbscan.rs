//! Hierarchical density-based clustering.
//!
//! Core distance is the distance to the `min_samples`-th nearest neighbour,
//! counting the point itself. Points are linked by a minimum spanning tree
//! over mutual-reachability distances, the resulting single-linkage
//! hierarchy is condensed at `min_cluster_size`, and flat clusters are picked
//! by excess-of-mass stability. The root is never selected.

use super::TopicError;
use crate::embedding::EmbeddingMatrix;

pub const NOISE: i64 = -1;

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn core_distances(points: &EmbeddingMatrix, min_samples: usize) -> Vec<f64> {
    let n = points.len();
    let k = min_samples.clamp(1, n);
    let mut buf = vec![0.0; n];
    (0..n)
        .map(|i| {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = euclidean(points.row(i), points.row(j));
            }
            let (_, kth, _) = buf.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
            *kth
        })
        .collect()
}

/// Prim's algorithm on the dense mutual-reachability graph.
fn mutual_reachability_mst(points: &EmbeddingMatrix, core: &[f64]) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = euclidean(points.row(current), points.row(j))
                .max(core[current])
                .max(core[j]);
            if d < best[j] {
                best[j] = d;
                parent[j] = current;
            }
        }
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for j in 0..n {
            if !in_tree[j] && (next == usize::MAX || best[j] < next_d) {
                next = j;
                next_d = best[j];
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next, next_d));
        current = next;
    }
    edges
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Internal node `n + i` of the single-linkage tree.
#[derive(Debug, Clone, Copy)]
struct Merge {
    left: usize,
    right: usize,
    distance: f64,
    size: usize,
}

fn single_linkage(n: usize, mut edges: Vec<(usize, usize, f64)>) -> Vec<Merge> {
    edges.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.min(a.1).cmp(&b.0.min(b.1))));
    // Union-find over 2n-1 slots: leaves then internal nodes.
    let mut uf = UnionFind::new(2 * n - 1);
    let mut merges = Vec::with_capacity(n - 1);
    for (a, b, d) in edges {
        let ra = uf.find(a);
        let rb = uf.find(b);
        let new = n + merges.len();
        let size = uf.size[ra] + uf.size[rb];
        uf.parent[ra] = new;
        uf.parent[rb] = new;
        uf.size[new] = size;
        merges.push(Merge {
            left: ra,
            right: rb,
            distance: d,
            size,
        });
    }
    merges
}

#[derive(Debug, Clone, Copy)]
struct CondensedEdge {
    parent: usize,
    child: usize,
    lambda: f64,
    child_size: usize,
}

fn leaves_of(node: usize, n: usize, merges: &[Merge], out: &mut Vec<usize>) {
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x < n {
            out.push(x);
        } else {
            let m = merges[x - n];
            stack.push(m.right);
            stack.push(m.left);
        }
    }
}

/// Condensed tree; cluster labels start at `n` with the root.
fn condense(n: usize, merges: &[Merge], min_cluster: usize, zero_lambda: f64) -> Vec<CondensedEdge> {
    let root = 2 * n - 2;
    let size_of = |x: usize| if x < n { 1 } else { merges[x - n].size };
    let lambda_of = |d: f64| if d > 0.0 { 1.0 / d } else { zero_lambda };

    let mut label = vec![usize::MAX; 2 * n - 1];
    label[root] = n;
    let mut next_label = n + 1;
    let mut out = Vec::new();
    let mut queue = std::collections::VecDeque::from([root]);
    let mut leaves = Vec::new();
    while let Some(node) = queue.pop_front() {
        if node < n {
            continue;
        }
        let m = merges[node - n];
        let lambda = lambda_of(m.distance);
        let parent_label = label[node];
        let (ls, rs) = (size_of(m.left), size_of(m.right));
        let fall_out = |child: usize, out: &mut Vec<CondensedEdge>, leaves: &mut Vec<usize>| {
            leaves.clear();
            leaves_of(child, n, merges, leaves);
            for &p in leaves.iter() {
                out.push(CondensedEdge {
                    parent: parent_label,
                    child: p,
                    lambda,
                    child_size: 1,
                });
            }
        };
        match (ls >= min_cluster, rs >= min_cluster) {
            (true, true) => {
                for (child, size) in [(m.left, ls), (m.right, rs)] {
                    label[child] = next_label;
                    next_label += 1;
                    out.push(CondensedEdge {
                        parent: parent_label,
                        child: label[child],
                        lambda,
                        child_size: size,
                    });
                    queue.push_back(child);
                }
            }
            (false, false) => {
                fall_out(m.left, &mut out, &mut leaves);
                fall_out(m.right, &mut out, &mut leaves);
            }
            (true, false) => {
                label[m.left] = parent_label;
                fall_out(m.right, &mut out, &mut leaves);
                queue.push_back(m.left);
            }
            (false, true) => {
                label[m.right] = parent_label;
                fall_out(m.left, &mut out, &mut leaves);
                queue.push_back(m.right);
            }
        }
    }
    out
}

/// Excess-of-mass selection. Returns selected cluster labels.
fn select_clusters(n: usize, tree: &[CondensedEdge]) -> Vec<usize> {
    let max_label = tree.iter().map(|e| e.parent.max(e.child)).max().unwrap_or(n).max(n);
    let slots = max_label - n + 1;
    let mut birth = vec![0.0; slots];
    for e in tree.iter().filter(|e| e.child >= n) {
        birth[e.child - n] = e.lambda;
    }
    let mut stability = vec![0.0; slots];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); slots];
    for e in tree {
        stability[e.parent - n] += (e.lambda - birth[e.parent - n]) * e.child_size as f64;
        if e.child >= n {
            children[e.parent - n].push(e.child);
        }
    }

    let mut selected = vec![false; slots];
    // Children always carry larger labels than their parents.
    for c in (1..slots).rev() {
        let subtree: f64 = children[c].iter().map(|&k| stability[k - n]).sum();
        if subtree > stability[c] {
            stability[c] = subtree;
        } else {
            selected[c] = true;
            let mut stack = children[c].clone();
            while let Some(k) = stack.pop() {
                selected[k - n] = false;
                stack.extend(children[k - n].iter().copied());
            }
        }
    }
    (1..slots).filter(|&c| selected[c]).map(|c| c + n).collect()
}

/// Clusters the rows of `points`. Labels are `-1` for noise, otherwise
/// `0..K` ordered by each cluster's smallest member index.
pub fn cluster_density(
    points: &EmbeddingMatrix,
    min_cluster: usize,
    min_samples: usize,
) -> Result<Vec<i64>, TopicError> {
    let n = points.len();
    if min_cluster < 2 {
        return Err(TopicError::InvalidConfig("min_cluster must be at least 2".into()));
    }
    if n < min_cluster {
        return Err(TopicError::TooFewPoints {
            got: n,
            need: min_cluster,
        });
    }

    let core = core_distances(points, min_samples);
    let mst = mutual_reachability_mst(points, &core);
    let min_positive = mst
        .iter()
        .map(|e| e.2)
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let zero_lambda = if min_positive.is_finite() {
        (1e6 / min_positive).min(1e250)
    } else {
        1.0
    };
    let merges = single_linkage(n, mst);
    let tree = condense(n, &merges, min_cluster, zero_lambda);
    let selected = select_clusters(n, &tree);

    // Parent lookup for every condensed node, then nearest selected ancestor.
    let max_label = tree.iter().map(|e| e.parent.max(e.child)).max().unwrap_or(n).max(n);
    let mut parent_of = vec![usize::MAX; max_label + 1];
    for e in &tree {
        parent_of[e.child] = e.parent;
    }
    let mut is_selected = vec![false; max_label + 1];
    for &c in &selected {
        is_selected[c] = true;
    }
    let mut raw = vec![usize::MAX; n];
    for (p, slot) in raw.iter_mut().enumerate() {
        let mut x = parent_of[p];
        while x != usize::MAX {
            if is_selected[x] {
                *slot = x;
                break;
            }
            x = parent_of[x];
        }
    }

    let mut relabel = std::collections::HashMap::new();
    let mut labels = vec![NOISE; n];
    for p in 0..n {
        if raw[p] != usize::MAX {
            let next = relabel.len() as i64;
            labels[p] = *relabel.entry(raw[p]).or_insert(next);
        }
    }
    Ok(labels)
}
