//! Random causal DAG construction and topological ordering.
//!
//! Nodes are numbered `0..=d`: `d` features plus one target. Roots occupy the first
//! `n_roots` indices and every inner node draws its parents from strictly lower
//! indices, so index order is always a valid generation order. The target is one of
//! the inner nodes; features may descend from it.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeRole {
    Root,
    Inner,
}

/// Output type of a node. Roots are always continuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Continuous,
    Categorical,
}

impl Task {
    pub fn target_kind(self) -> NodeKind {
        match self {
            Task::Classification => NodeKind::Categorical,
            Task::Regression => NodeKind::Continuous,
        }
    }
}

/// Serialized form of a graph; validated on the way in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub parents: Vec<Vec<NodeId>>,
    pub kinds: Vec<NodeKind>,
    pub target: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphSpec", into = "GraphSpec")]
pub struct CausalGraph {
    parents: Vec<Vec<NodeId>>,
    kinds: Vec<NodeKind>,
    target: NodeId,
    topo_order: Vec<NodeId>,
}

impl TryFrom<GraphSpec> for CausalGraph {
    type Error = Error;

    fn try_from(spec: GraphSpec) -> Result<Self> {
        CausalGraph::from_parts(spec.parents, spec.kinds, spec.target)
    }
}

impl From<CausalGraph> for GraphSpec {
    fn from(g: CausalGraph) -> Self {
        GraphSpec {
            parents: g.parents,
            kinds: g.kinds,
            target: g.target,
        }
    }
}

impl CausalGraph {
    /// Builds a graph from explicit parent lists, checking every structural invariant.
    pub fn from_parts(
        mut parents: Vec<Vec<NodeId>>,
        kinds: Vec<NodeKind>,
        target: NodeId,
    ) -> Result<Self> {
        let n = parents.len();
        if n < 2 {
            return Err(Error::param("a graph needs at least one feature and a target"));
        }
        if kinds.len() != n {
            return Err(Error::param(format!(
                "{} node kinds given for {n} nodes",
                kinds.len()
            )));
        }
        if target.0 >= n {
            return Err(Error::param(format!("target {target} out of range")));
        }
        for (i, ps) in parents.iter_mut().enumerate() {
            ps.sort_unstable();
            if ps.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param(format!("node {i} lists a parent twice")));
            }
            if let Some(p) = ps.iter().find(|p| p.0 >= n || p.0 == i) {
                return Err(Error::param(format!("node {i} has invalid parent {p}")));
            }
            if ps.is_empty() && kinds[i] == NodeKind::Categorical {
                return Err(Error::param(format!("root node {i} cannot be categorical")));
            }
        }
        if parents[target.0].is_empty() {
            return Err(Error::param("the target must be an inner node"));
        }
        let topo_order = topological_order_of(&parents)?;
        Ok(CausalGraph {
            parents,
            kinds,
            target,
            topo_order,
        })
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.parents.len()).map(NodeId)
    }

    pub fn parents(&self, node: NodeId) -> &[NodeId] {
        &self.parents[node.0]
    }

    pub fn children(&self, node: NodeId) -> Vec<NodeId> {
        self.nodes()
            .filter(|&c| self.parents[c.0].contains(&node))
            .collect()
    }

    pub fn role(&self, node: NodeId) -> NodeRole {
        if self.parents[node.0].is_empty() {
            NodeRole::Root
        } else {
            NodeRole::Inner
        }
    }

    pub fn is_root(&self, node: NodeId) -> bool {
        self.role(node) == NodeRole::Root
    }

    pub fn kind(&self, node: NodeId) -> NodeKind {
        self.kinds[node.0]
    }

    pub fn target(&self) -> NodeId {
        self.target
    }

    pub fn roots(&self) -> Vec<NodeId> {
        self.nodes().filter(|&n| self.is_root(n)).collect()
    }

    /// Every node except the target, in index order.
    pub fn features(&self) -> Vec<NodeId> {
        self.nodes().filter(|&n| n != self.target).collect()
    }

    pub fn topo_order(&self) -> &[NodeId] {
        &self.topo_order
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }
}

/// Parameters for [`build_dag`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DagParams {
    /// Number of feature nodes `d`; the graph has `d + 1` nodes.
    pub features: usize,
    pub roots: usize,
    pub min_parents: usize,
    pub max_parents: usize,
    #[serde(default = "default_task")]
    pub task: Task,
    /// Probability that a non-target inner node emits categories.
    #[serde(default)]
    pub categorical_fraction: f64,
}

fn default_task() -> Task {
    Task::Classification
}

impl DagParams {
    pub fn new(features: usize, roots: usize, min_parents: usize, max_parents: usize) -> Self {
        DagParams {
            features,
            roots,
            min_parents,
            max_parents,
            task: Task::Classification,
            categorical_fraction: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features < 2 {
            return Err(Error::param("at least two features are required"));
        }
        if self.roots == 0 || self.roots > self.features {
            return Err(Error::param(format!(
                "root count must lie in [1, {}], got {}",
                self.features, self.roots
            )));
        }
        if self.min_parents == 0 || self.min_parents > self.max_parents {
            return Err(Error::param(format!(
                "parent bounds must satisfy 1 <= min <= max, got [{}, {}]",
                self.min_parents, self.max_parents
            )));
        }
        if !(0.0..=1.0).contains(&self.categorical_fraction) {
            return Err(Error::param("categorical_fraction must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Samples a random causal DAG.
///
/// Inner node `i` draws its parent count uniformly from `[min_parents, max_parents]`,
/// clips it to `i`, then picks that many distinct parents uniformly from `0..i`.
/// The target is drawn uniformly from the inner nodes and takes the output kind the
/// task requires; other inner nodes are categorical with `categorical_fraction`.
pub fn build_dag<R: Rng + ?Sized>(params: &DagParams, rng: &mut R) -> Result<CausalGraph> {
    params.validate()?;
    let n = params.features + 1;
    let mut parents = vec![Vec::new(); n];
    for (i, ps) in parents.iter_mut().enumerate().skip(params.roots) {
        let want = rng.random_range(params.min_parents..=params.max_parents);
        let k = want.min(i);
        let mut chosen: Vec<NodeId> = index::sample(rng, i, k).into_iter().map(NodeId).collect();
        chosen.sort_unstable();
        *ps = chosen;
    }
    let target = NodeId(rng.random_range(params.roots..n));
    let mut kinds = vec![NodeKind::Continuous; n];
    for (i, kind) in kinds.iter_mut().enumerate().skip(params.roots) {
        let categorical = rng.random::<f64>() < params.categorical_fraction;
        *kind = if i == target.0 {
            params.task.target_kind()
        } else if categorical {
            NodeKind::Categorical
        } else {
            NodeKind::Continuous
        };
    }
    CausalGraph::from_parts(parents, kinds, target)
}

/// Stable Kahn order: among ready nodes the lowest id goes first.
pub fn topological_order(graph: &CausalGraph) -> Result<Vec<NodeId>> {
    topological_order_of(&graph.parents)
}

pub(crate) fn topological_order_of(parents: &[Vec<NodeId>]) -> Result<Vec<NodeId>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (child, ps) in parents.iter().enumerate() {
        for p in ps {
            children[p.0].push(child);
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n)
        .filter(|&i| indegree[i] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(node)) = ready.pop() {
        order.push(NodeId(node));
        for &c in &children[node] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() != n {
        return Err(Error::Cycle);
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    /// Re-walks every edge independently of the Kahn implementation.
    fn brute_force_check(g: &CausalGraph, p: &DagParams) {
        assert_eq!(g.len(), p.features + 1);
        assert_eq!(g.roots().len(), p.roots);
        let pos: Vec<usize> = {
            let mut pos = vec![usize::MAX; g.len()];
            for (k, n) in g.topo_order().iter().enumerate() {
                assert_eq!(pos[n.0], usize::MAX, "node listed twice");
                pos[n.0] = k;
            }
            pos
        };
        for child in g.nodes() {
            let ps = g.parents(child);
            if child.0 < p.roots {
                assert!(ps.is_empty());
            } else {
                assert!(!ps.is_empty());
                assert!(ps.len() <= p.max_parents);
                assert!(ps.len() >= p.min_parents.min(child.0));
            }
            for parent in ps {
                assert!(pos[parent.0] < pos[child.0]);
                assert!(parent.0 < child.0);
            }
        }
        assert!(!g.is_root(g.target()));
        assert_eq!(g.kind(g.target()), p.task.target_kind());
    }

    #[test]
    fn six_node_graph_with_two_roots() {
        let p = DagParams::new(5, 2, 1, 3);
        let g = build_dag(&p, &mut seeded(1)).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.roots().len(), 2);
        brute_force_check(&g, &p);
    }

    #[test]
    fn minimal_graph_has_single_parent() {
        let p = DagParams::new(2, 2, 1, 1);
        for seed in 0..20 {
            let g = build_dag(&p, &mut seeded(seed)).unwrap();
            assert_eq!(g.target(), NodeId(2));
            assert_eq!(g.parents(NodeId(2)).len(), 1);
            assert!(g.parents(NodeId(2))[0].0 < 2);
        }
    }

    #[test]
    fn fixed_seed_two_parent_graph_validates() {
        let p = DagParams::new(4, 1, 2, 2);
        let g = build_dag(&p, &mut seeded(42)).unwrap();
        // node 1 only has one earlier node, so its parent count clips to 1
        assert_eq!(g.parents(NodeId(1)), &[NodeId(0)]);
        for i in 2..5 {
            assert_eq!(g.parents(NodeId(i)).len(), 2);
        }
        brute_force_check(&g, &p);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = seeded(0);
        assert!(build_dag(&DagParams::new(1, 1, 1, 1), &mut rng).is_err());
        assert!(build_dag(&DagParams::new(5, 0, 1, 1), &mut rng).is_err());
        assert!(build_dag(&DagParams::new(5, 6, 1, 1), &mut rng).is_err());
        assert!(build_dag(&DagParams::new(5, 2, 0, 1), &mut rng).is_err());
        assert!(build_dag(&DagParams::new(5, 2, 3, 2), &mut rng).is_err());
    }

    #[test]
    fn chain_order() {
        let g = CausalGraph::from_parts(
            vec![vec![], vec![NodeId(0)], vec![NodeId(1)]],
            vec![NodeKind::Continuous; 3],
            NodeId(2),
        )
        .unwrap();
        assert_eq!(topological_order(&g).unwrap(), vec![NodeId(0), NodeId(1), NodeId(2)]);
    }

    #[test]
    fn shared_child_roots_first_by_id() {
        let g = CausalGraph::from_parts(
            vec![vec![NodeId(2), NodeId(1)], vec![], vec![]],
            vec![NodeKind::Continuous; 3],
            NodeId(0),
        )
        .unwrap();
        assert_eq!(g.topo_order(), &[NodeId(1), NodeId(2), NodeId(0)]);
    }

    #[test]
    fn cycle_is_detected() {
        let parents = vec![vec![], vec![NodeId(0), NodeId(2)], vec![NodeId(1)]];
        assert!(matches!(topological_order_of(&parents), Err(Error::Cycle)));
        let err = CausalGraph::from_parts(parents, vec![NodeKind::Continuous; 3], NodeId(2));
        assert!(matches!(err, Err(Error::Cycle)));
    }

    #[test]
    fn hundred_node_order_passes_edge_scan() {
        let p = DagParams::new(99, 5, 1, 4);
        let g = build_dag(&p, &mut seeded(9)).unwrap();
        let order = topological_order(&g).unwrap();
        let mut pos = vec![0; g.len()];
        for (k, n) in order.iter().enumerate() {
            pos[n.0] = k;
        }
        for child in g.nodes() {
            for parent in g.parents(child) {
                assert!(pos[parent.0] < pos[child.0]);
            }
        }
    }

    #[test]
    fn serde_round_trip_revalidates() {
        let g = build_dag(&DagParams::new(6, 2, 1, 3), &mut seeded(5)).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        let back: CausalGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        let cyclic = r#"{"parents":[[],[2],[1]],"kinds":["continuous","continuous","continuous"],"target":2}"#;
        assert!(serde_json::from_str::<CausalGraph>(cyclic).is_err());
    }

    proptest! {
        #[test]
        fn random_graphs_satisfy_invariants(
            d in 2usize..40,
            roots_frac in 0.0f64..1.0,
            min_p in 1usize..4,
            extra in 0usize..3,
            regression in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let roots = 1 + ((d - 1) as f64 * roots_frac) as usize;
            let mut p = DagParams::new(d, roots, min_p, min_p + extra);
            p.categorical_fraction = 0.3;
            if regression { p.task = Task::Regression; }
            let a = build_dag(&p, &mut seeded(seed)).unwrap();
            brute_force_check(&a, &p);
            let b = build_dag(&p, &mut seeded(seed)).unwrap();
            prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        }
    }
}
