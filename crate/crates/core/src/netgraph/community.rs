//! Community detection on the undirected weighted view of a mention
//! graph, where the weight between `u` and `v` is `w(u->v) + w(v->u)`.
//!
//! Two methods are provided. `Modularity` is multi-level greedy modularity
//! optimization (local moves in a seeded random order, then aggregation,
//! repeated until no node moves). `PathWeight` scores every node pair by
//! `W_ij + W_ji` with `W = (I - aA)^-1` on the symmetric 0/1 adjacency,
//! merges pairs from the most to the least similar, and keeps the merge
//! level with the highest modularity.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::pathweight::{path_weight_matrix, spectral_radius};
use super::{GraphError, MentionGraph, Partition, PartitionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommunityMethod {
    Modularity,
    PathWeight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommunityOptions {
    pub method: CommunityMethod,
    pub resolution: f64,
    pub seed: u64,
    /// Path attenuation; `None` means `0.5 / rho(A)`.
    pub attenuation: Option<f64>,
}

impl Default for CommunityOptions {
    fn default() -> Self {
        Self {
            method: CommunityMethod::Modularity,
            resolution: 1.0,
            seed: 0,
            attenuation: None,
        }
    }
}

/// Symmetric weighted adjacency with self-loop weights, the working
/// representation for both methods and for aggregation levels.
#[derive(Debug, Clone)]
struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    /// Twice the internal weight of an aggregated node.
    self_loops: Vec<f64>,
    strength: Vec<f64>,
    two_m: f64,
}

impl WeightedGraph {
    fn from_mention_graph(g: &MentionGraph) -> Self {
        let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (s, t, w) in g.edges() {
            let key = (s.min(t), s.max(t));
            *pairs.entry(key).or_insert(0.0) += w as f64;
        }
        Self::from_pairs(g.node_count(), &pairs, vec![0.0; g.node_count()])
    }

    fn from_pairs(n: usize, pairs: &BTreeMap<(usize, usize), f64>, self_loops: Vec<f64>) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut strength = self_loops.clone();
        for (&(a, b), &w) in pairs {
            adj[a].push((b, w));
            adj[b].push((a, w));
            strength[a] += w;
            strength[b] += w;
        }
        let two_m = strength.iter().sum();
        Self {
            adj,
            self_loops,
            strength,
            two_m,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn modularity(&self, community: &[usize], resolution: f64) -> f64 {
        if self.two_m == 0.0 {
            return 0.0;
        }
        let k = community.iter().max().map_or(0, |m| m + 1);
        let mut internal = vec![0.0; k];
        let mut total = vec![0.0; k];
        for u in 0..self.len() {
            let c = community[u];
            total[c] += self.strength[u];
            internal[c] += self.self_loops[u];
            for &(v, w) in &self.adj[u] {
                if community[v] == c {
                    internal[c] += w;
                }
            }
        }
        internal
            .iter()
            .zip(&total)
            .map(|(i, t)| i / self.two_m - resolution * (t / self.two_m) * (t / self.two_m))
            .sum()
    }

    /// Local moving phase. Returns the community of every node
    /// (renumbered densely) and whether any node moved.
    fn local_moves(&self, resolution: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut community: Vec<usize> = (0..n).collect();
        let mut totals = self.strength.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut any_moved = false;
        let mut links: BTreeMap<usize, f64> = BTreeMap::new();
        loop {
            let mut moved = false;
            for &u in &order {
                let k = self.strength[u];
                let home = community[u];
                links.clear();
                for &(v, w) in &self.adj[u] {
                    *links.entry(community[v]).or_insert(0.0) += w;
                }
                totals[home] -= k;
                let gain = |c: usize, w: f64| w - resolution * totals[c] * k / self.two_m;
                let mut best = home;
                let mut best_gain = gain(home, links.get(&home).copied().unwrap_or(0.0));
                for (&c, &w) in &links {
                    let g = gain(c, w);
                    if g > best_gain + 1e-12 {
                        best = c;
                        best_gain = g;
                    }
                }
                totals[best] += k;
                if best != home {
                    community[u] = best;
                    moved = true;
                    any_moved = true;
                }
            }
            if !moved {
                break;
            }
        }
        let mut dense = BTreeMap::new();
        let relabeled = community
            .iter()
            .map(|c| {
                let next = dense.len();
                *dense.entry(*c).or_insert(next)
            })
            .collect();
        (relabeled, any_moved)
    }

    fn aggregate(&self, community: &[usize]) -> Self {
        let k = community.iter().max().map_or(0, |m| m + 1);
        let mut self_loops = vec![0.0; k];
        let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for u in 0..self.len() {
            let cu = community[u];
            self_loops[cu] += self.self_loops[u];
            for &(v, w) in &self.adj[u] {
                let cv = community[v];
                if cu == cv {
                    self_loops[cu] += w;
                } else if cu < cv {
                    *pairs.entry((cu, cv)).or_insert(0.0) += w;
                }
            }
        }
        Self::from_pairs(k, &pairs, self_loops)
    }
}

fn louvain(g: &WeightedGraph, resolution: f64, seed: u64) -> Vec<usize> {
    let mut membership: Vec<usize> = (0..g.len()).collect();
    if g.two_m == 0.0 {
        return membership;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = g.clone();
    loop {
        let (community, moved) = level.local_moves(resolution, &mut rng);
        if !moved {
            return membership;
        }
        for m in membership.iter_mut() {
            *m = community[*m];
        }
        level = level.aggregate(&community);
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
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

fn path_weight_agglomeration(
    g: &MentionGraph,
    wg: &WeightedGraph,
    resolution: f64,
    attenuation: Option<f64>,
) -> Result<Vec<usize>, GraphError> {
    let n = g.node_count();
    let adjacency = g.adjacency_matrix(false);
    let a = match attenuation {
        Some(a) => a,
        None => {
            let rho = spectral_radius(&adjacency);
            if rho > 0.0 {
                0.5 / rho
            } else {
                0.5
            }
        }
    };
    let w = path_weight_matrix(&adjacency, a)?;

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let s = w[(i, j)] + w[(j, i)];
            if s > 0.0 {
                pairs.push((s, i, j));
            }
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));

    // Incremental modularity over the merge sequence.
    let mut sets = DisjointSets::new(n);
    let mut totals = wg.strength.clone();
    let mut links: Vec<BTreeMap<usize, f64>> = (0..n)
        .map(|u| wg.adj[u].iter().copied().collect())
        .collect();
    let mut q = wg.modularity(&(0..n).collect::<Vec<_>>(), resolution);
    let mut best_q = q;
    let mut merges = Vec::new();
    let mut best_len = 0;
    for (_, i, j) in pairs {
        let (ri, rj) = (sets.find(i), sets.find(j));
        if ri == rj {
            continue;
        }
        let (keep, gone) = if links[ri].len() >= links[rj].len() { (ri, rj) } else { (rj, ri) };
        if wg.two_m > 0.0 {
            let between = links[keep].get(&gone).copied().unwrap_or(0.0);
            q += 2.0 * between / wg.two_m
                - 2.0 * resolution * totals[keep] * totals[gone] / (wg.two_m * wg.two_m);
        }
        sets.parent[gone] = keep;
        totals[keep] += totals[gone];
        let moved = core::mem::take(&mut links[gone]);
        links[keep].remove(&gone);
        for (other, weight) in moved {
            if other == keep {
                continue;
            }
            *links[keep].entry(other).or_insert(0.0) += weight;
            let back = links[other].remove(&gone).unwrap_or(0.0);
            *links[other].entry(keep).or_insert(0.0) += back;
        }
        merges.push((keep, gone));
        if q > best_q + 1e-12 {
            best_q = q;
            best_len = merges.len();
        }
    }

    let mut replay = DisjointSets::new(n);
    for &(keep, gone) in &merges[..best_len] {
        replay.parent[gone] = keep;
    }
    Ok((0..n).map(|u| replay.find(u)).collect())
}

/// Modularity of `partition` on the undirected weighted view.
pub fn modularity(g: &MentionGraph, partition: &Partition, resolution: f64) -> f64 {
    WeightedGraph::from_mention_graph(g).modularity(partition.labels(), resolution)
}

pub fn detect_communities(
    g: &MentionGraph,
    options: &CommunityOptions,
) -> Result<Partition, GraphError> {
    if g.node_count() == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let wg = WeightedGraph::from_mention_graph(g);
    let raw = match options.method {
        CommunityMethod::Modularity => louvain(&wg, options.resolution, options.seed),
        CommunityMethod::PathWeight => {
            path_weight_agglomeration(g, &wg, options.resolution, options.attenuation)?
        }
    };
    Ok(Partition::from_raw(&raw, PartitionKind::Community))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::String;

    fn two_cliques() -> MentionGraph {
        let left = ["a1", "a2", "a3", "a4"];
        let right = ["b1", "b2", "b3", "b4"];
        let mut edges = Vec::new();
        for side in [left, right] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((side[i], side[j], 1));
                }
            }
        }
        edges.push(("a4", "b1", 1));
        MentionGraph::from_edges([], edges)
    }

    fn opts(method: CommunityMethod, seed: u64) -> CommunityOptions {
        CommunityOptions { method, seed, ..CommunityOptions::default() }
    }

    #[test]
    fn two_cliques_split_by_both_methods() {
        let g = two_cliques();
        for method in [CommunityMethod::Modularity, CommunityMethod::PathWeight] {
            let p = detect_communities(&g, &opts(method, 3)).unwrap();
            assert_eq!(p.labels(), &[0, 0, 0, 0, 1, 1, 1, 1], "{method:?}");
        }
    }

    #[test]
    fn single_node_is_one_community() {
        let g = MentionGraph::from_edges(["solo"], []);
        for method in [CommunityMethod::Modularity, CommunityMethod::PathWeight] {
            let p = detect_communities(&g, &opts(method, 0)).unwrap();
            assert_eq!(p.group_count(), 1);
        }
        assert_eq!(
            detect_communities(&MentionGraph::default(), &CommunityOptions::default()),
            Err(GraphError::EmptyGraph)
        );
    }

    #[test]
    fn pathweight_divergence_suggests_smaller_attenuation() {
        let g = two_cliques();
        let o = CommunityOptions {
            method: CommunityMethod::PathWeight,
            attenuation: Some(1.0),
            ..CommunityOptions::default()
        };
        assert!(matches!(detect_communities(&g, &o), Err(GraphError::Divergent { .. })));
    }

    #[test]
    fn modularity_of_known_partitions() {
        let g = two_cliques();
        let split = Partition::from_raw(&[0, 0, 0, 0, 1, 1, 1, 1], PartitionKind::Community);
        // m = 13, internal 6 + 6, totals 13 + 13
        let expected = 12.0 / 13.0 - 2.0 * 0.25;
        assert!((modularity(&g, &split, 1.0) - expected).abs() < 1e-12);
        let one = Partition::from_raw(&[0; 8], PartitionKind::Community);
        assert!(modularity(&g, &one, 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let handles: Vec<String> = (0..50).map(|i| format!("u{i:02}")).collect();
        let mut edges = Vec::new();
        for i in 0..50usize {
            for j in [1usize, 3, 7] {
                edges.push((handles[i].as_str(), handles[(i * j + 5) % 50].as_str(), 1 + i % 3));
            }
        }
        let g = MentionGraph::from_edges([], edges);
        let a = detect_communities(&g, &opts(CommunityMethod::Modularity, 11)).unwrap();
        let b = detect_communities(&g, &opts(CommunityMethod::Modularity, 11)).unwrap();
        assert_eq!(a, b);
        let c = detect_communities(&g, &opts(CommunityMethod::PathWeight, 11)).unwrap();
        let d = detect_communities(&g, &opts(CommunityMethod::PathWeight, 11)).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn edgeless_graph_stays_singletons() {
        let g = MentionGraph::from_edges(["a", "b", "c"], []);
        let p = detect_communities(&g, &CommunityOptions::default()).unwrap();
        assert_eq!(p.group_count(), 3);
    }
}
