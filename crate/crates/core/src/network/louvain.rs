//! Greedy modularity optimization: local node moves followed by community
//! aggregation, repeated until nothing changes. Nodes are visited in sorted
//! key order, so results are deterministic.

use std::collections::BTreeMap;

use super::{CollabGraph, NetworkError};

/// Minimum modularity gain for a node move.
const MIN_GAIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityPartition {
    pub assignment: BTreeMap<String, usize>,
    pub modularity: f64,
}

impl CommunityPartition {
    pub fn n_communities(&self) -> usize {
        self.assignment.values().map(|c| c + 1).max().unwrap_or(0)
    }
}

/// Symmetric weighted adjacency; a diagonal entry holds twice the internal
/// weight so that row sums are node strengths.
type Adjacency = Vec<BTreeMap<usize, f64>>;

fn adjacency(g: &CollabGraph) -> (Vec<&String>, Adjacency) {
    let keys: Vec<&String> = g.nodes.keys().collect();
    let index: BTreeMap<&str, usize> = keys.iter().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
    let mut adj = vec![BTreeMap::new(); keys.len()];
    for ((a, b), w) in &g.edges {
        let (Some(&i), Some(&j)) = (index.get(a.as_str()), index.get(b.as_str())) else {
            continue;
        };
        *adj[i].entry(j).or_insert(0.0) += *w as f64;
        *adj[j].entry(i).or_insert(0.0) += *w as f64;
    }
    (keys, adj)
}

/// Weighted modularity of `labels` over the graph's nodes in key order.
fn modularity_of(adj: &Adjacency, labels: &[usize]) -> f64 {
    let strength: Vec<f64> = adj.iter().map(|row| row.values().sum()).collect();
    let two_m: f64 = strength.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; k];
    let mut total = vec![0.0; k];
    for (i, row) in adj.iter().enumerate() {
        total[labels[i]] += strength[i];
        for (&j, &w) in row {
            if labels[j] == labels[i] {
                internal[labels[i]] += w;
            }
        }
    }
    (0..k).map(|c| internal[c] / two_m - (total[c] / two_m).powi(2)).sum()
}

/// Modularity of an arbitrary partition of `g`. Nodes missing from
/// `assignment` each form their own community.
pub fn modularity(g: &CollabGraph, assignment: &BTreeMap<String, usize>) -> f64 {
    let (keys, adj) = adjacency(g);
    let offset = assignment.values().max().map_or(0, |m| m + 1);
    let labels: Vec<usize> = keys
        .iter()
        .enumerate()
        .map(|(i, k)| assignment.get(*k).copied().unwrap_or(offset + i))
        .collect();
    modularity_of(&adj, &labels)
}

/// One round of local moves. Returns each node's community and whether any
/// node moved.
fn local_moves(adj: &Adjacency) -> (Vec<usize>, bool) {
    let n = adj.len();
    let strength: Vec<f64> = adj.iter().map(|row| row.values().sum()).collect();
    let two_m: f64 = strength.iter().sum();
    let mut community: Vec<usize> = (0..n).collect();
    let mut tot = strength.clone();
    let mut moved_any = false;
    if two_m == 0.0 {
        return (community, false);
    }
    loop {
        let mut moved = false;
        for i in 0..n {
            let own = community[i];
            let mut links: BTreeMap<usize, f64> = BTreeMap::new();
            for (&j, &w) in &adj[i] {
                if j != i {
                    *links.entry(community[j]).or_insert(0.0) += w;
                }
            }
            tot[own] -= strength[i];
            let gain = |c: usize, w: f64| w - strength[i] * tot[c] / two_m;
            let stay = gain(own, links.get(&own).copied().unwrap_or(0.0));
            let mut best = (own, stay);
            for (&c, &w) in &links {
                let g = gain(c, w);
                if g > best.1 {
                    best = (c, g);
                }
            }
            // Gains above are in units of m; the threshold is in modularity units.
            let target = if best.0 != own && (best.1 - stay) * 2.0 / two_m > MIN_GAIN {
                best.0
            } else {
                own
            };
            tot[target] += strength[i];
            if target != own {
                community[i] = target;
                moved = true;
                moved_any = true;
            }
        }
        if !moved {
            break;
        }
    }
    (community, moved_any)
}

fn relabel(labels: &mut [usize]) -> usize {
    let mut map = BTreeMap::new();
    for l in labels.iter_mut() {
        let next = map.len();
        *l = *map.entry(*l).or_insert(next);
    }
    map.len()
}

fn aggregate(adj: &Adjacency, labels: &[usize], k: usize) -> Adjacency {
    let mut out = vec![BTreeMap::new(); k];
    for (i, row) in adj.iter().enumerate() {
        for (&j, &w) in row {
            *out[labels[i]].entry(labels[j]).or_insert(0.0) += w;
        }
    }
    out
}

/// Partitions `g` into communities by greedy modularity maximization.
/// Community ids are numbered in order of their first member key.
pub fn detect_communities(g: &CollabGraph) -> Result<CommunityPartition, NetworkError> {
    if g.nodes.is_empty() {
        return Err(NetworkError::EmptyGraph);
    }
    let (keys, adj) = adjacency(g);
    let mut membership: Vec<usize> = (0..keys.len()).collect();
    let mut level = adj.clone();
    loop {
        let (mut labels, moved) = local_moves(&level);
        if !moved {
            break;
        }
        let k = relabel(&mut labels);
        for m in membership.iter_mut() {
            *m = labels[*m];
        }
        level = aggregate(&level, &labels, k);
    }
    relabel(&mut membership);
    let q = modularity_of(&adj, &membership);
    Ok(CommunityPartition {
        assignment: keys.into_iter().cloned().zip(membership).collect(),
        modularity: q,
    })
}
