//! Undirected skeleton graph whose edges carry channel estimates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{Bits, CapacityResult};
use crate::tensor::{compose, StochasticTensor, TensorEstimate};

/// Channel estimates for one unordered pair `(low, high)` of vertex indices.
///
/// `forward` is the tensor `low -> high`, `reverse` the tensor `high -> low`;
/// both come from the same joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub forward: TensorEstimate,
    pub reverse: TensorEstimate,
    pub forward_capacity: CapacityResult,
    pub reverse_capacity: CapacityResult,
    pub mutual_information: Bits,
    pub significant: bool,
}

impl EdgeRecord {
    /// Larger of the two orientation capacities.
    pub fn capacity(&self) -> f64 {
        self.forward_capacity
            .capacity
            .value()
            .max(self.reverse_capacity.capacity.value())
    }

    /// Tensor traversing the edge from `from` to the other end.
    fn oriented(&self, from_low: bool) -> &TensorEstimate {
        if from_low {
            &self.forward
        } else {
            &self.reverse
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonGraph {
    vertices: Vec<String>,
    edges: BTreeMap<(usize, usize), EdgeRecord>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl SkeletonGraph {
    pub fn new(vertices: Vec<String>) -> Self {
        SkeletonGraph {
            vertices,
            edges: BTreeMap::new(),
        }
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn add_edge(&mut self, a: usize, b: usize, record: EdgeRecord) -> Result<()> {
        if a == b {
            return Err(Error::InvalidArgument("self-loops are not allowed".into()));
        }
        if a.max(b) >= self.vertices.len() {
            return Err(Error::UnknownVariable(format!("#{}", a.max(b))));
        }
        self.edges.insert(key(a, b), record);
        Ok(())
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> Option<EdgeRecord> {
        self.edges.remove(&key(a, b))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains_key(&key(a, b))
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&EdgeRecord> {
        self.edges.get(&key(a, b))
    }

    /// Edges as `(low, high)` index pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), &EdgeRecord)> {
        self.edges.iter().map(|(&k, v)| (k, v))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as sorted name pairs, sorted.
    pub fn edge_names(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .edges
            .keys()
            .map(|&(a, b)| {
                let (x, y) = (self.vertices[a].clone(), self.vertices[b].clone());
                if x <= y {
                    (x, y)
                } else {
                    (y, x)
                }
            })
            .collect();
        out.sort();
        out
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&u| u != v && self.has_edge(u, v))
            .collect()
    }

    /// Tensor for traversing the edge `from -> to`.
    pub fn edge_tensor(&self, from: usize, to: usize) -> Option<&TensorEstimate> {
        self.edge(from, to).map(|e| e.oriented(from < to))
    }
}

/// Simple path through the graph, as vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn interior(&self) -> &[usize] {
        if self.0.len() <= 2 {
            &[]
        } else {
            &self.0[1..self.0.len() - 1]
        }
    }

    pub fn names(&self, graph: &SkeletonGraph) -> Vec<String> {
        self.0.iter().map(|&v| graph.vertices()[v].clone()).collect()
    }
}

/// All simple paths from `x` to `z` with between 2 and `max_len` edges,
/// ordered lexicographically by vertex-index sequence. The direct edge is
/// never reported.
pub fn enumerate_simple_paths(graph: &SkeletonGraph, x: usize, z: usize, max_len: usize) -> Result<Vec<Path>> {
    let n = graph.vertices().len();
    if x >= n || z >= n {
        return Err(Error::UnknownVariable(format!("#{}", x.max(z))));
    }
    if x == z {
        return Err(Error::InvalidArgument("path endpoints must differ".into()));
    }
    if max_len < 2 {
        return Err(Error::InvalidArgument("max_len must be at least 2".into()));
    }
    let adjacency: Vec<Vec<usize>> = (0..n).map(|v| graph.neighbors(v)).collect();
    let mut out = Vec::new();
    let mut stack = vec![x];
    let mut on_path = vec![false; n];
    on_path[x] = true;
    extend(&adjacency, z, max_len, &mut stack, &mut on_path, &mut out);
    Ok(out)
}

fn extend(
    adjacency: &[Vec<usize>],
    target: usize,
    max_len: usize,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Path>,
) {
    let last = *stack.last().expect("stack starts with the source");
    let edges_so_far = stack.len() - 1;
    for &next in &adjacency[last] {
        if on_path[next] {
            continue;
        }
        if next == target {
            if edges_so_far >= 1 {
                let mut p = stack.clone();
                p.push(next);
                out.push(Path(p));
            }
            continue;
        }
        // room for this hop plus at least one more to reach the target
        if edges_so_far + 2 <= max_len {
            stack.push(next);
            on_path[next] = true;
            extend(adjacency, target, max_len, stack, on_path, out);
            on_path[next] = false;
            stack.pop();
        }
    }
}

/// Composition of the per-edge tensors along `path`, each edge taken in the
/// direction of travel.
pub fn path_tensor(graph: &SkeletonGraph, path: &Path) -> Result<StochasticTensor> {
    let vs = path.vertices();
    if vs.len() < 2 {
        return Err(Error::InvalidArgument("path needs at least one edge".into()));
    }
    let mut acc: Option<StochasticTensor> = None;
    for w in vs.windows(2) {
        let t = graph
            .edge_tensor(w[0], w[1])
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "no edge {} -- {}",
                    graph.vertices().get(w[0]).map_or("?", String::as_str),
                    graph.vertices().get(w[1]).map_or("?", String::as_str)
                ))
            })?
            .tensor
            .clone();
        acc = Some(match acc {
            None => t,
            Some(prev) => compose(&prev, &t)?,
        });
    }
    Ok(acc.expect("at least one edge"))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::info::{channel_capacity, mutual_information, Bits};
    use crate::tensor::{transition_tensor, Alphabet, Direction, JointDistribution};
    use std::sync::Arc;

    pub(crate) fn record_from_joint(j: &JointDistribution) -> EdgeRecord {
        let forward = transition_tensor(j, Direction::Forward, 0.05).unwrap();
        let reverse = transition_tensor(j, Direction::Reverse, 0.05).unwrap();
        EdgeRecord {
            forward_capacity: channel_capacity(&forward.tensor, 1e-9, 10_000),
            reverse_capacity: channel_capacity(&reverse.tensor, 1e-9, 10_000),
            forward,
            reverse,
            mutual_information: Bits(mutual_information(j).0),
            significant: true,
        }
    }

    fn dummy() -> EdgeRecord {
        let a = Arc::new(Alphabet::indexed(2));
        let j = JointDistribution::from_probabilities(a.clone(), a, vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        record_from_joint(&j)
    }

    fn graph(names: &[&str], edges: &[(usize, usize)]) -> SkeletonGraph {
        let mut g = SkeletonGraph::new(names.iter().map(|s| s.to_string()).collect());
        for &(a, b) in edges {
            g.add_edge(a, b, dummy()).unwrap();
        }
        g
    }

    #[test]
    fn triangle_has_one_indirect_path() {
        let g = graph(&["X", "Y", "Z"], &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(enumerate_simple_paths(&g, 0, 2, 2).unwrap(), vec![Path(vec![0, 1, 2])]);
    }

    #[test]
    fn open_chain_path() {
        let g = graph(&["X", "Y", "Z"], &[(0, 1), (1, 2)]);
        assert_eq!(enumerate_simple_paths(&g, 0, 2, 2).unwrap(), vec![Path(vec![0, 1, 2])]);
    }

    #[test]
    fn four_cycle_has_two_paths() {
        // X=0, Y=1, Z=2, U=3
        let g = graph(&["X", "Y", "Z", "U"], &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(
            enumerate_simple_paths(&g, 0, 2, 3).unwrap(),
            vec![Path(vec![0, 1, 2]), Path(vec![0, 3, 2])]
        );
    }

    #[test]
    fn complete_k4_has_four_indirect_paths() {
        let all = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let g = graph(&["A", "B", "C", "D"], &all);
        for x in 0..4 {
            for z in 0..4 {
                if x != z {
                    let paths = enumerate_simple_paths(&g, x, z, 3).unwrap();
                    assert_eq!(paths.len(), 4);
                    assert_eq!(paths.iter().filter(|p| p.len() == 2).count(), 2);
                    assert!(paths.windows(2).all(|w| w[0] < w[1]));
                }
            }
        }
    }

    #[test]
    fn max_len_caps_paths() {
        let g = graph(&["A", "B", "C", "D", "E"], &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]);
        assert!(enumerate_simple_paths(&g, 0, 4, 3).unwrap().is_empty());
        assert_eq!(enumerate_simple_paths(&g, 0, 4, 4).unwrap().len(), 1);
    }

    #[test]
    fn path_enumeration_errors() {
        let g = graph(&["A", "B"], &[(0, 1)]);
        assert!(enumerate_simple_paths(&g, 0, 0, 3).is_err());
        assert!(enumerate_simple_paths(&g, 0, 5, 3).is_err());
        assert!(enumerate_simple_paths(&g, 0, 1, 1).is_err());
    }

    #[test]
    fn rejects_self_loops() {
        let mut g = graph(&["A", "B"], &[]);
        assert!(g.add_edge(1, 1, dummy()).is_err());
    }

    #[test]
    fn path_tensor_composes_in_travel_direction() {
        let a = Arc::new(Alphabet::indexed(2));
        let xy = JointDistribution::from_probabilities(a.clone(), a.clone(), vec![vec![0.45, 0.05], vec![0.1, 0.4]]).unwrap();
        let yz = JointDistribution::from_probabilities(a.clone(), a.clone(), vec![vec![0.35, 0.2], vec![0.15, 0.3]]).unwrap();
        let mut g = SkeletonGraph::new(vec!["X".into(), "Y".into(), "Z".into()]);
        g.add_edge(0, 1, record_from_joint(&xy)).unwrap();
        g.add_edge(1, 2, record_from_joint(&yz)).unwrap();

        let single = path_tensor(&g, &Path(vec![0, 1])).unwrap();
        assert_eq!(single, g.edge(0, 1).unwrap().forward.tensor);
        let back = path_tensor(&g, &Path(vec![1, 0])).unwrap();
        assert_eq!(back, g.edge(0, 1).unwrap().reverse.tensor);

        let fwd = path_tensor(&g, &Path(vec![0, 1, 2])).unwrap();
        let expected = compose(&g.edge(0, 1).unwrap().forward.tensor, &g.edge(1, 2).unwrap().forward.tensor).unwrap();
        assert_eq!(fwd, expected);

        // the two traversals induce transposed joints when the marginals agree
        let px = xy.marginal_x();
        let pz = crate::tensor::apply(&fwd, &px).unwrap();
        let rev = path_tensor(&g, &Path(vec![2, 1, 0])).unwrap();
        let jf = fwd.joint_with(&px).unwrap();
        let jr = rev.joint_with(&pz).unwrap();
        assert!(jf.max_abs_diff(&jr.transpose()) < 1e-12);
    }
}
