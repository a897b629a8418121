//! Blocking graph over partition-NE pairs and cycle detection.
//!
//! An edge `(P, phi) -> (P', phi')` exists when some coalition blocks the
//! fair configuration of `(P, phi)` at the given cost under pessimal
//! anticipation, `P'` is the arrangement after the deviation, and `phi'`
//! ranges over every NE of `P'`. The successor rule keeps each fractured
//! coalition's remaining members together while the deviators form the new
//! coalition; this pins a concrete dynamic onto the blocking relation,
//! whose anticipation otherwise quantifies over all rearrangements. Cycles
//! in the graph are the signature of un-rest: players endlessly switching
//! arrangements in pursuit of better outcomes.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::EdgeRef;

use crate::enumeration::QVector;
use crate::model::Partition;
use crate::stability::StabilityAnalysis;

/// One node of the blocking graph: a partition index (into the cache's
/// canonical order) and an equilibrium index within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PairNode {
    pub partition: usize,
    pub equilibrium: usize,
}

/// Directed blocking graph at one communication cost.
#[derive(Debug, Clone)]
pub struct BlockingGraph {
    graph: DiGraph<PairNode, QVector>,
    beta: f64,
}

/// Arrangement after the deviators described by `q` leave: they form one
/// coalition, and what remains of each broken coalition stays together.
pub fn successor_partition(partition: &Partition, q: &QVector) -> Partition {
    let mut sizes = vec![q.deviators()];
    for (&qi, &li) in q.counts().iter().zip(partition.sizes()) {
        if li - qi > 0 {
            sizes.push(li - qi);
        }
    }
    Partition::from_unsorted(sizes).expect("deviators are nonempty")
}

/// Builds the blocking graph at cost `beta` from a finished analysis. Every
/// blocking candidate of every pair contributes edges to each NE of its
/// successor partition; successors without a pure NE contribute none.
pub fn blocking_graph(analysis: &StabilityAnalysis, beta: f64) -> BlockingGraph {
    let mut graph = DiGraph::new();
    let node_ids: Vec<Vec<NodeIndex>> = analysis
        .partitions
        .iter()
        .enumerate()
        .map(|(pi, result)| {
            (0..result.pairs.len())
                .map(|ei| graph.add_node(PairNode { partition: pi, equilibrium: ei }))
                .collect()
        })
        .collect();
    for (pi, result) in analysis.partitions.iter().enumerate() {
        for (ei, pair) in result.pairs.iter().enumerate() {
            for stat in &pair.stats {
                if !stat.blocks_at(beta, analysis.eps) {
                    continue;
                }
                let successor = successor_partition(&result.partition, &stat.q);
                let si = analysis
                    .cache
                    .index_of(&successor)
                    .expect("successor is a canonical partition of N");
                for &target in &node_ids[si] {
                    graph.add_edge(node_ids[pi][ei], target, stat.q.clone());
                }
            }
        }
    }
    BlockingGraph { graph, beta }
}

impl BlockingGraph {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn nodes(&self) -> impl Iterator<Item = PairNode> + '_ {
        self.graph.node_indices().map(|i| self.graph[i])
    }

    /// Outgoing blocking moves of a pair, as `(q, successor node)`.
    pub fn successors(&self, node: PairNode) -> Vec<(QVector, PairNode)> {
        let idx = self.index_of(node);
        let mut out: Vec<(QVector, PairNode)> = self
            .graph
            .edges(idx)
            .map(|e| (e.weight().clone(), self.graph[e.target()]))
            .collect();
        out.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
        out
    }

    fn index_of(&self, node: PairNode) -> NodeIndex {
        self.graph
            .node_indices()
            .find(|&i| self.graph[i] == node)
            .expect("node belongs to this graph")
    }

    /// Elementary cycles, each rooted at its minimal node, in deterministic
    /// order, up to `max_cycles`. Returns whether the enumeration was
    /// truncated by the cap.
    pub fn detect_cycles(&self, max_cycles: usize) -> (Vec<Vec<PairNode>>, bool) {
        let mut cycles: Vec<Vec<NodeIndex>> = Vec::new();
        let mut truncated = false;
        // Only nodes inside a nontrivial SCC (or with a self-loop) can root
        // a cycle; everything else is skipped outright.
        let mut cyclic = vec![false; self.graph.node_count()];
        for scc in tarjan_scc(&self.graph) {
            if scc.len() > 1 {
                for v in scc {
                    cyclic[v.index()] = true;
                }
            } else if self.graph.contains_edge(scc[0], scc[0]) {
                cyclic[scc[0].index()] = true;
            }
        }
        let mut starts: Vec<NodeIndex> = self
            .graph
            .node_indices()
            .filter(|v| cyclic[v.index()])
            .collect();
        starts.sort();
        'outer: for &start in &starts {
            let mut path = vec![start];
            let mut on_path = vec![false; self.graph.node_count()];
            on_path[start.index()] = true;
            if !self.root_cycles(start, start, &mut path, &mut on_path, &mut cycles, max_cycles) {
                truncated = true;
                break 'outer;
            }
        }
        let out = cycles
            .into_iter()
            .map(|cycle| cycle.into_iter().map(|i| self.graph[i]).collect())
            .collect();
        (out, truncated)
    }

    /// DFS over nodes `>= root`, recording every simple path that closes
    /// back at the root. Returns false once the cap is hit.
    fn root_cycles(
        &self,
        root: NodeIndex,
        at: NodeIndex,
        path: &mut Vec<NodeIndex>,
        on_path: &mut Vec<bool>,
        cycles: &mut Vec<Vec<NodeIndex>>,
        max_cycles: usize,
    ) -> bool {
        let mut next: Vec<NodeIndex> = self.graph.neighbors(at).collect();
        next.sort();
        next.dedup();
        for succ in next {
            if succ < root {
                continue;
            }
            if succ == root {
                cycles.push(path.clone());
                if cycles.len() >= max_cycles {
                    return false;
                }
            } else if !on_path[succ.index()] {
                path.push(succ);
                on_path[succ.index()] = true;
                let ok = self.root_cycles(root, succ, path, on_path, cycles, max_cycles);
                on_path[succ.index()] = false;
                path.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RewardModel, StrategyProfile, DEFAULT_EPSILON as EPS};
    use crate::stability::analyze;

    fn equi(players: usize, solo: &[f64]) -> RewardModel {
        RewardModel::equi_divisible(players, solo.to_vec()).unwrap()
    }

    #[test]
    fn successor_rule_keeps_residues_together() {
        let p = Partition::new(vec![4, 1]).unwrap();
        let qs = crate::enumeration::blocking_qvectors(&p);
        let q41 = qs.iter().find(|q| q.counts() == [4, 1]).unwrap();
        assert_eq!(successor_partition(&p, q41).sizes(), &[5]);
        let q31 = qs.iter().find(|q| q.counts() == [3, 1]).unwrap();
        assert_eq!(successor_partition(&p, q31).sizes(), &[4, 1]);
        let q10 = qs.iter().find(|q| q.counts() == [1, 0]).unwrap();
        assert_eq!(successor_partition(&p, q10).sizes(), &[3, 1, 1]);
    }

    #[test]
    fn severe_instance_has_no_blocking_edges_at_zero_cost() {
        let model = equi(5, &[0.55, 0.52, 0.5, 0.45, 0.3]);
        let analysis = analyze(&model, EPS);
        let graph = blocking_graph(&analysis, 0.0);
        assert_eq!(graph.edge_count(), 0);
        let (cycles, truncated) = graph.detect_cycles(16);
        assert!(cycles.is_empty() && !truncated);
    }

    #[test]
    fn stable_gc_has_no_outgoing_edges() {
        let model = equi(2, &[1.0, 0.4]);
        let analysis = analyze(&model, EPS);
        let graph = blocking_graph(&analysis, 0.2);
        let gc_node = graph.nodes().find(|n| n.partition == 0).unwrap();
        assert!(graph.successors(gc_node).is_empty());
    }

    #[test]
    fn limited_resources_cycle_between_gc_and_the_bully_pair() {
        let model = equi(5, &[0.6, 0.52, 0.5, 0.45, 0.1]);
        let analysis = analyze(&model, EPS);
        let graph = blocking_graph(&analysis, 0.0);
        let (cycles, _) = graph.detect_cycles(256);
        assert!(!cycles.is_empty());

        let p1 = Partition::new(vec![4, 1]).unwrap();
        let p1_idx = analysis.cache.index_of(&p1).unwrap();
        let bully = StrategyProfile::canonical(&p1, vec![0, 1, 2, 3, 0]).unwrap();
        let bully_ei = analysis
            .cache
            .equilibria(p1_idx)
            .iter()
            .position(|ne| ne.profile == bully)
            .expect("bully profile is an NE here");
        let wanted = |cycle: &Vec<PairNode>| {
            cycle.iter().any(|n| n.partition == 0)
                && cycle
                    .iter()
                    .any(|n| n.partition == p1_idx && n.equilibrium == bully_ei)
        };
        assert!(cycles.iter().any(wanted), "GC <-> bully-pair cycle not found");
    }

    #[test]
    fn cycle_detector_agrees_with_reachability_dfs() {
        // independent check: a cycle exists iff some node can reach itself
        let model = equi(3, &[0.9, 0.5, 0.2]);
        let analysis = analyze(&model, EPS);
        for beta in [0.0, 0.1, 0.3, 1.0] {
            let graph = blocking_graph(&analysis, beta);
            let (cycles, _) = graph.detect_cycles(1024);
            let nodes: Vec<PairNode> = graph.nodes().collect();
            let reaches_itself = nodes.iter().any(|&n| {
                let mut stack: Vec<PairNode> =
                    graph.successors(n).into_iter().map(|(_, t)| t).collect();
                let mut seen = Vec::new();
                while let Some(v) = stack.pop() {
                    if v == n {
                        return true;
                    }
                    if seen.contains(&v) {
                        continue;
                    }
                    seen.push(v);
                    stack.extend(graph.successors(v).into_iter().map(|(_, t)| t));
                }
                false
            });
            assert_eq!(!cycles.is_empty(), reaches_itself, "beta = {beta}");
        }
    }
}
