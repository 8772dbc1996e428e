//! Three-step skeleton discovery.
//!
//! 1. Every pair of variables is modelled as a channel; the edge is kept when
//!    the channel demonstrably transfers information, i.e. two rows of its
//!    tensor have disjoint Jeffreys intervals for some output symbol.
//! 2. For each triangle, an edge whose direct tensor matches the composition
//!    of the other two edges' tensors (inside the direct intervals) is
//!    explained by the mediated path and removed.
//! 3. An edge with two or more capacity-significant indirect paths is tested
//!    against the composition through the union of their mediators, estimated
//!    jointly as one variable over the product alphabet.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::JointSource;
use crate::error::{Error, Result};
use crate::graph::{enumerate_simple_paths, path_tensor, EdgeRecord, SkeletonGraph};
use crate::info::{channel_capacity, mutual_information, Bits, CapacityResult, DEFAULT_BA_MAX_ITER, DEFAULT_BA_TOL};
use crate::tensor::{
    compose, tensors_equal_within_ci, transition_tensor, Direction, JointDistribution, StochasticTensor,
    TensorEstimate, CONTAINMENT_SLACK, DEFAULT_ALPHA,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscoveryConfig {
    /// Significance level of the per-element Jeffreys intervals.
    pub alpha: f64,
    /// Longest indirect path (in edges) considered in step 3.
    pub max_path_len: usize,
    /// Path capacity, in bits, above which an indirect path counts.
    pub capacity_epsilon: f64,
    pub ba_tol: f64,
    pub ba_max_iter: usize,
    /// Prune only if the composition matches in both directions.
    pub require_both_orientations: bool,
    /// Largest `|S| * max(|X|, |Z|)` for which a mediator set is estimated.
    pub mediator_cell_budget: usize,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            alpha: DEFAULT_ALPHA,
            max_path_len: 4,
            capacity_epsilon: 0.01,
            ba_tol: DEFAULT_BA_TOL,
            ba_max_iter: DEFAULT_BA_MAX_ITER,
            require_both_orientations: true,
            mediator_cell_budget: 4096,
        }
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if self.max_path_len < 2 {
            return bad("max_path_len must be at least 2");
        }
        if !(self.capacity_epsilon >= 0.0 && self.capacity_epsilon.is_finite()) {
            return bad("capacity_epsilon must be a finite nonnegative number");
        }
        if !(self.ba_tol > 0.0 && self.ba_tol.is_finite()) {
            return bad("ba_tol must be positive");
        }
        if self.ba_max_iter == 0 {
            return bad("ba_max_iter must be positive");
        }
        if self.mediator_cell_budget == 0 {
            return bad("mediator_cell_budget must be positive");
        }
        Ok(())
    }

    fn capacity(&self, tensor: &StochasticTensor) -> CapacityResult {
        channel_capacity(tensor, self.ba_tol, self.ba_max_iter)
    }
}

/// Everything measured for one unordered pair in step 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub x: String,
    pub y: String,
    pub joint: JointDistribution,
    pub forward: TensorEstimate,
    pub reverse: TensorEstimate,
    pub forward_capacity: CapacityResult,
    pub reverse_capacity: CapacityResult,
    pub mutual_information: Bits,
    pub forward_separated: bool,
    pub reverse_separated: bool,
    pub significant: bool,
}

/// One directed comparison of a direct tensor against a composed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationCheck {
    pub from: String,
    pub to: String,
    pub composed: StochasticTensor,
    pub equal: bool,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleTest {
    pub edge: [String; 2],
    pub mediator: String,
    pub checks: Vec<OrientationCheck>,
    pub passed: bool,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCapacity {
    pub path: Vec<String>,
    pub capacity: Bits,
    pub significant: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultivariateOutcome {
    /// At most one capacity-significant indirect path; nothing to test.
    Skipped,
    /// Mediator set exceeds the cell budget; edge kept.
    Untestable,
    Retained,
    Pruned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariateTest {
    pub edge: [String; 2],
    pub paths: Vec<PathCapacity>,
    pub significant_paths: usize,
    pub mediators: Vec<String>,
    pub cells: Option<u128>,
    pub checks: Vec<OrientationCheck>,
    pub outcome: MultivariateOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneStep {
    Bivariate,
    Multivariate,
}

/// Removal of one edge, citing the test that justified it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneRecord {
    pub edge: [String; 2],
    pub step: PruneStep,
    /// Index into `triangle_tests` or `multivariate_tests`.
    pub test: usize,
    pub mediators: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscoveryReport {
    pub variables: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<u64>,
    pub config: DiscoveryConfig,
    pub pairs: Vec<PairRecord>,
    pub step1_edges: Vec<[String; 2]>,
    pub triangle_tests: Vec<TriangleTest>,
    pub step2_edges: Vec<[String; 2]>,
    pub multivariate_tests: Vec<MultivariateTest>,
    pub pruned: Vec<PruneRecord>,
    pub skeleton: Vec<[String; 2]>,
    pub warnings: Vec<String>,
    /// Wall time; kept out of the JSON so reports stay byte-reproducible.
    #[serde(skip)]
    pub duration: Duration,
    #[serde(skip)]
    pub graph: SkeletonGraph,
}

fn edge_names(graph: &SkeletonGraph, a: usize, b: usize) -> [String; 2] {
    [graph.vertices()[a].clone(), graph.vertices()[b].clone()]
}

fn graph_edges(graph: &SkeletonGraph) -> Vec<[String; 2]> {
    graph.edges().map(|((a, b), _)| edge_names(graph, a, b)).collect()
}

/// True when some output symbol has disjoint intervals in two input rows.
pub fn rows_separated(estimate: &TensorEstimate) -> bool {
    let rows = estimate.tensor.n_inputs();
    let cols = estimate.tensor.n_outputs();
    for y in 0..cols {
        for x1 in 0..rows {
            for x2 in 0..rows {
                if x1 != x2 && estimate.ci_high[x1][y] + CONTAINMENT_SLACK < estimate.ci_low[x2][y] {
                    return true;
                }
            }
        }
    }
    false
}

/// Both-orientation tensors, capacities and mutual information of one pair.
pub fn measure_pair<S: JointSource + ?Sized>(
    source: &S,
    a: usize,
    b: usize,
    config: &DiscoveryConfig,
) -> Result<PairRecord> {
    let joint = source.joint(&[a], &[b])?;
    let forward = transition_tensor(&joint, Direction::Forward, config.alpha)?;
    let reverse = transition_tensor(&joint, Direction::Reverse, config.alpha)?;
    let forward_separated = rows_separated(&forward);
    let reverse_separated = rows_separated(&reverse);
    let names = source.variable_names();
    Ok(PairRecord {
        x: names[a].clone(),
        y: names[b].clone(),
        mutual_information: mutual_information(&joint),
        forward_capacity: config.capacity(&forward.tensor),
        reverse_capacity: config.capacity(&reverse.tensor),
        joint,
        forward,
        reverse,
        forward_separated,
        reverse_separated,
        significant: forward_separated || reverse_separated,
    })
}

/// Step 1: the graph of pairs whose channel capacity is demonstrably nonzero.
pub fn step1_capacity_graph<S: JointSource + ?Sized>(
    source: &S,
    config: &DiscoveryConfig,
) -> Result<(SkeletonGraph, Vec<PairRecord>)> {
    config.validate()?;
    let names = source.variable_names().to_vec();
    let n = names.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two variables".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let records = pairs
        .par_iter()
        .map(|&(a, b)| measure_pair(source, a, b, config))
        .collect::<Result<Vec<_>>>()?;
    let mut graph = SkeletonGraph::new(names);
    for (&(a, b), rec) in pairs.iter().zip(&records) {
        if rec.significant {
            graph.add_edge(
                a,
                b,
                EdgeRecord {
                    forward: rec.forward.clone(),
                    reverse: rec.reverse.clone(),
                    forward_capacity: rec.forward_capacity.clone(),
                    reverse_capacity: rec.reverse_capacity.clone(),
                    mutual_information: rec.mutual_information,
                    significant: true,
                },
            )?;
        }
    }
    Ok((graph, records))
}

fn orientation_check(
    graph: &SkeletonGraph,
    direct: &TensorEstimate,
    composed: StochasticTensor,
    from: usize,
    to: usize,
) -> Result<OrientationCheck> {
    let cmp = tensors_equal_within_ci(direct, &composed)?;
    Ok(OrientationCheck {
        from: graph.vertices()[from].clone(),
        to: graph.vertices()[to].clone(),
        composed,
        equal: cmp.equal,
        max_deviation: cmp.max_deviation,
    })
}

fn triangle_test(graph: &SkeletonGraph, a: usize, b: usize, m: usize, both: bool) -> Result<TriangleTest> {
    let tensor = |from: usize, to: usize| {
        graph
            .edge_tensor(from, to)
            .expect("triangle edges exist")
    };
    let mut checks = Vec::with_capacity(2);
    let ends: &[(usize, usize)] = if both { &[(a, b), (b, a)] } else { &[(a, b)] };
    for &(from, to) in ends {
        let composed = compose(&tensor(from, m).tensor, &tensor(m, to).tensor)?;
        checks.push(orientation_check(graph, tensor(from, to), composed, from, to)?);
    }
    let passed = checks.iter().all(|c| c.equal);
    let max_deviation = checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
    Ok(TriangleTest {
        edge: edge_names(graph, a, b),
        mediator: graph.vertices()[m].clone(),
        checks,
        passed,
        max_deviation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BivariateOutcome {
    pub tests: Vec<TriangleTest>,
    pub pruned: Vec<PruneRecord>,
}

/// Step 2: prune edges explained by a single mediator using the pairwise
/// tensors from step 1.
///
/// Passing tests are applied in ascending order of deviation, then of edge
/// capacity (weakest association first), then of vertex indices. A test is
/// applied only while its triangle is still intact.
pub fn step2_bivariate_prune(
    graph: &SkeletonGraph,
    config: &DiscoveryConfig,
) -> Result<(SkeletonGraph, BivariateOutcome)> {
    config.validate()?;
    let n = graph.vertices().len();
    let edges: Vec<(usize, usize)> = graph.edges().map(|(k, _)| k).collect();
    let per_edge = edges
        .par_iter()
        .map(|&(a, b)| {
            (0..n)
                .filter(|&m| m != a && m != b && graph.has_edge(a, m) && graph.has_edge(m, b))
                .map(|m| triangle_test(graph, a, b, m, config.require_both_orientations).map(|t| (a, b, m, t)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let flat: Vec<(usize, usize, usize, TriangleTest)> = per_edge.into_iter().flatten().collect();

    let mut order: Vec<usize> = (0..flat.len()).filter(|&i| flat[i].3.passed).collect();
    order.sort_by(|&i, &j| {
        let (a1, b1, m1, t1) = &flat[i];
        let (a2, b2, m2, t2) = &flat[j];
        let c1 = graph.edge(*a1, *b1).expect("edge").capacity();
        let c2 = graph.edge(*a2, *b2).expect("edge").capacity();
        t1.max_deviation
            .total_cmp(&t2.max_deviation)
            .then(c1.total_cmp(&c2))
            .then((a1, b1, m1).cmp(&(a2, b2, m2)))
    });

    let mut pruned_graph = graph.clone();
    let mut pruned = Vec::new();
    for i in order {
        let (a, b, m, ref t) = flat[i];
        if pruned_graph.has_edge(a, b) && pruned_graph.has_edge(a, m) && pruned_graph.has_edge(m, b) {
            pruned_graph.remove_edge(a, b);
            pruned.push(PruneRecord {
                edge: t.edge.clone(),
                step: PruneStep::Bivariate,
                test: i,
                mediators: vec![t.mediator.clone()],
            });
        }
    }
    let tests = flat.into_iter().map(|(_, _, _, t)| t).collect();
    Ok((pruned_graph, BivariateOutcome { tests, pruned }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateOutcomeSet {
    pub tests: Vec<MultivariateTest>,
    pub pruned: Vec<PruneRecord>,
    pub warnings: Vec<String>,
}

/// Step 3: multivariate pruning for edges with several significant indirect
/// paths. Edges are visited in ascending capacity order against the graph as
/// pruned so far.
pub fn step3_multivariate_prune<S: JointSource + ?Sized>(
    graph: &SkeletonGraph,
    source: &S,
    config: &DiscoveryConfig,
) -> Result<(SkeletonGraph, MultivariateOutcomeSet)> {
    config.validate()?;
    let mut edges: Vec<((usize, usize), f64)> = graph.edges().map(|(k, e)| (k, e.capacity())).collect();
    edges.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));

    let mut current = graph.clone();
    let mut tests = Vec::new();
    let mut pruned = Vec::new();
    let mut warnings = Vec::new();

    for ((a, b), _) in edges {
        let paths = enumerate_simple_paths(&current, a, b, config.max_path_len)?;
        let capacities = paths
            .par_iter()
            .map(|p| path_tensor(&current, p).map(|t| config.capacity(&t).capacity))
            .collect::<Result<Vec<Bits>>>()?;
        let path_records: Vec<PathCapacity> = paths
            .iter()
            .zip(&capacities)
            .map(|(p, &c)| PathCapacity {
                path: p.names(&current),
                capacity: c,
                significant: c.value() > config.capacity_epsilon,
            })
            .collect();
        let significant_paths = path_records.iter().filter(|p| p.significant).count();
        let mut test = MultivariateTest {
            edge: edge_names(&current, a, b),
            paths: path_records,
            significant_paths,
            mediators: Vec::new(),
            cells: None,
            checks: Vec::new(),
            outcome: MultivariateOutcome::Skipped,
        };
        if significant_paths < 2 {
            tests.push(test);
            continue;
        }

        let mut mediators: Vec<usize> = paths
            .iter()
            .zip(&capacities)
            .filter(|(_, c)| c.value() > config.capacity_epsilon)
            .flat_map(|(p, _)| p.interior().iter().copied())
            .collect();
        mediators.sort_unstable();
        mediators.dedup();
        test.mediators = mediators.iter().map(|&v| current.vertices()[v].clone()).collect();

        let set_size = mediators
            .iter()
            .fold(1u128, |acc, &v| acc.saturating_mul(source.alphabet(v).len() as u128));
        let endpoint = source.alphabet(a).len().max(source.alphabet(b).len()) as u128;
        let cells = set_size.saturating_mul(endpoint);
        test.cells = Some(cells);
        if cells > config.mediator_cell_budget as u128 {
            warnings.push(format!(
                "edge {} -- {}: mediator set {:?} needs {cells} cells (budget {}); left untested",
                test.edge[0], test.edge[1], test.mediators, config.mediator_cell_budget
            ));
            test.outcome = MultivariateOutcome::Untestable;
            tests.push(test);
            continue;
        }

        let ends: &[(usize, usize)] = if config.require_both_orientations {
            &[(a, b), (b, a)]
        } else {
            &[(a, b)]
        };
        for &(from, to) in ends {
            let into_set = transition_tensor(&source.joint(&[from], &mediators)?, Direction::Forward, config.alpha)?;
            let out_of_set = transition_tensor(&source.joint(&mediators, &[to])?, Direction::Forward, config.alpha)?;
            let composed = compose(&into_set.tensor, &out_of_set.tensor)?;
            let direct = current.edge_tensor(from, to).expect("edge present");
            test.checks.push(orientation_check(&current, direct, composed, from, to)?);
        }
        if test.checks.iter().all(|c| c.equal) {
            test.outcome = MultivariateOutcome::Pruned;
            current.remove_edge(a, b);
            pruned.push(PruneRecord {
                edge: test.edge.clone(),
                step: PruneStep::Multivariate,
                test: tests.len(),
                mediators: test.mediators.clone(),
            });
        } else {
            test.outcome = MultivariateOutcome::Retained;
        }
        tests.push(test);
    }
    Ok((
        current,
        MultivariateOutcomeSet {
            tests,
            pruned,
            warnings,
        },
    ))
}

/// Runs the three steps and records every decision.
pub fn discover_skeleton<S: JointSource + ?Sized>(source: &S, config: &DiscoveryConfig) -> Result<DiscoveryReport> {
    config.validate()?;
    let start = Instant::now();
    let variables = source.variable_names().to_vec();
    if variables.len() < 2 {
        return Ok(DiscoveryReport {
            graph: SkeletonGraph::new(variables.clone()),
            variables,
            sample_size: None,
            config: config.clone(),
            pairs: Vec::new(),
            step1_edges: Vec::new(),
            triangle_tests: Vec::new(),
            step2_edges: Vec::new(),
            multivariate_tests: Vec::new(),
            pruned: Vec::new(),
            skeleton: Vec::new(),
            warnings: Vec::new(),
            duration: start.elapsed(),
        });
    }
    let (g1, pairs) = step1_capacity_graph(source, config)?;
    let (g2, bivariate) = step2_bivariate_prune(&g1, config)?;
    let (g3, multivariate) = step3_multivariate_prune(&g2, source, config)?;
    let mut pruned = bivariate.pruned;
    pruned.extend(multivariate.pruned);
    Ok(DiscoveryReport {
        sample_size: pairs.first().and_then(|p| p.joint.sample_size()),
        variables,
        config: config.clone(),
        step1_edges: graph_edges(&g1),
        step2_edges: graph_edges(&g2),
        skeleton: graph_edges(&g3),
        pairs,
        triangle_tests: bivariate.tests,
        multivariate_tests: multivariate.tests,
        pruned,
        warnings: multivariate.warnings,
        duration: start.elapsed(),
        graph: g3,
    })
}

impl DiscoveryReport {
    pub fn pair(&self, a: &str, b: &str) -> Option<&PairRecord> {
        self.pairs
            .iter()
            .find(|p| (p.x == a && p.y == b) || (p.x == b && p.y == a))
    }

    /// Direct estimate for `from -> to` as recorded in step 1.
    pub fn direct_estimate(&self, from: &str, to: &str) -> Option<&TensorEstimate> {
        let p = self.pair(from, to)?;
        Some(if p.x == from { &p.forward } else { &p.reverse })
    }

    /// Re-derives every prune decision from the recorded tensors alone.
    pub fn verify_prunes(&self) -> bool {
        self.pruned.iter().all(|p| {
            let checks = match p.step {
                PruneStep::Bivariate => self.triangle_tests.get(p.test).map(|t| &t.checks),
                PruneStep::Multivariate => self.multivariate_tests.get(p.test).map(|t| &t.checks),
            };
            let Some(checks) = checks else { return false };
            !checks.is_empty()
                && checks.iter().all(|c| {
                    self.direct_estimate(&c.from, &c.to)
                        .and_then(|d| tensors_equal_within_ci(d, &c.composed).ok())
                        .is_some_and(|cmp| cmp.equal)
                })
        })
    }

    /// Skeleton edges as sorted name pairs, sorted.
    pub fn skeleton_set(&self) -> Vec<(String, String)> {
        normalized(&self.skeleton)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Graphviz rendering of the skeleton. With `show_pruned`, removed edges
    /// are drawn dashed and labelled with the step that removed them.
    pub fn to_dot(&self, show_pruned: bool) -> String {
        let mut out = String::from("graph skeleton {\n");
        for v in &self.variables {
            out.push_str(&format!("  {};\n", dot_id(v)));
        }
        for [a, b] in &self.skeleton {
            out.push_str(&format!("  {} -- {};\n", dot_id(a), dot_id(b)));
        }
        if show_pruned {
            for p in &self.pruned {
                let step = match p.step {
                    PruneStep::Bivariate => 2,
                    PruneStep::Multivariate => 3,
                };
                out.push_str(&format!(
                    "  {} -- {} [style=dashed, label=\"step {step}\"];\n",
                    dot_id(&p.edge[0]),
                    dot_id(&p.edge[1])
                ));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Sorted name pairs, each pair sorted.
pub fn normalized(edges: &[[String; 2]]) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = edges
        .iter()
        .map(|[a, b]| match a.cmp(b) {
            Ordering::Greater => (b.clone(), a.clone()),
            _ => (a.clone(), b.clone()),
        })
        .collect();
    out.sort();
    out
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}
