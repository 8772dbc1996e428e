//! Discrete Bayesian networks: JSON descriptions, ancestral sampling and
//! exact pairwise joints by brute-force summation.
//!
//! CPT rows are ordered by parent configuration in row-major order over the
//! parents' alphabets, first parent slowest. Sampling draws from ChaCha20
//! seeded through `SeedableRng::seed_from_u64`; per sample, nodes are visited
//! in topological order (ties broken by declaration order) and each consumes one
//! uniform `f64` resolved by inverse CDF over its CPT row.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, JointSource};
use crate::error::{Error, Result};
use crate::tensor::{Alphabet, JointDistribution, NORMALIZATION_TOL};

pub const DEFAULT_STATE_BUDGET: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub name: String,
    pub alphabet: Vec<String>,
    #[serde(default)]
    pub parents: Vec<String>,
    pub cpt: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesNetSpec {
    pub nodes: Vec<NodeSpec>,
}

impl BayesNetSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn compile(&self) -> Result<BayesNet> {
        BayesNet::new(self)
    }
}

#[derive(Debug, Clone)]
struct Node {
    name: String,
    alphabet: Arc<Alphabet>,
    parents: Vec<usize>,
    cpt: Vec<Vec<f64>>,
}

/// A validated network.
#[derive(Debug, Clone)]
pub struct BayesNet {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl BayesNet {
    pub fn new(spec: &BayesNetSpec) -> Result<Self> {
        if spec.nodes.is_empty() {
            return Err(Error::InvalidSpec("no nodes".into()));
        }
        let lookup = |name: &str| spec.nodes.iter().position(|n| n.name == name);
        let mut nodes = Vec::with_capacity(spec.nodes.len());
        for (i, ns) in spec.nodes.iter().enumerate() {
            if lookup(&ns.name) != Some(i) {
                return Err(Error::InvalidSpec(format!("duplicate node `{}`", ns.name)));
            }
            let alphabet = Alphabet::new(ns.alphabet.iter().cloned())
                .map_err(|e| Error::InvalidSpec(format!("node `{}`: {e}", ns.name)))?;
            let mut parents = Vec::with_capacity(ns.parents.len());
            for p in &ns.parents {
                let pi = lookup(p).ok_or_else(|| {
                    Error::InvalidSpec(format!("node `{}` has unknown parent `{p}`", ns.name))
                })?;
                if parents.contains(&pi) {
                    return Err(Error::InvalidSpec(format!("node `{}` lists parent `{p}` twice", ns.name)));
                }
                parents.push(pi);
            }
            nodes.push(Node {
                name: ns.name.clone(),
                alphabet: Arc::new(alphabet),
                parents,
                cpt: Vec::new(),
            });
        }
        for (node, ns) in nodes.iter_mut().zip(&spec.nodes) {
            node.cpt = ns.cpt.clone();
        }
        let order = topological_order(&nodes)?;
        for i in 0..nodes.len() {
            let configs = nodes[i]
                .parents
                .iter()
                .try_fold(1usize, |acc, &p| acc.checked_mul(nodes[p].alphabet.len()))
                .ok_or_else(|| Error::InvalidSpec("parent configurations overflow".into()))?;
            let node = &mut nodes[i];
            if node.cpt.len() != configs {
                return Err(Error::InvalidSpec(format!(
                    "node `{}` has {} CPT rows, expected {configs}",
                    node.name,
                    node.cpt.len()
                )));
            }
            let card = node.alphabet.len();
            for (r, row) in node.cpt.iter_mut().enumerate() {
                if row.len() != card {
                    return Err(Error::InvalidSpec(format!(
                        "node `{}` CPT row {r} has {} entries, expected {card}",
                        node.name,
                        row.len()
                    )));
                }
                let sum: f64 = row.iter().sum();
                let bad_entry = row.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0);
                if bad_entry || (sum - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::InvalidSpec(format!(
                        "node `{}` CPT row {r} is not a distribution",
                        node.name
                    )));
                }
                row.iter_mut().for_each(|v| *v /= sum);
            }
        }
        Ok(BayesNet { nodes, order })
    }

    pub fn names(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.name.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn alphabet(&self, node: usize) -> &Arc<Alphabet> {
        &self.nodes[node].alphabet
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.nodes[node].parents
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Undirected edges of the DAG as sorted name pairs.
    pub fn skeleton(&self) -> Vec<(String, String)> {
        let mut edges: Vec<(String, String)> = self
            .nodes
            .iter()
            .flat_map(|n| {
                n.parents.iter().map(move |&p| {
                    let (a, b) = (self.nodes[p].name.clone(), n.name.clone());
                    if a <= b {
                        (a, b)
                    } else {
                        (b, a)
                    }
                })
            })
            .collect();
        edges.sort();
        edges.dedup();
        edges
    }

    fn cpt_row(&self, node: usize, state: &[u32]) -> &[f64] {
        let n = &self.nodes[node];
        let row = n
            .parents
            .iter()
            .fold(0usize, |acc, &p| acc * self.nodes[p].alphabet.len() + state[p] as usize);
        &n.cpt[row]
    }

    /// Ancestral sampling; columns follow declaration order.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be positive".into()));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let k = self.nodes.len();
        let mut columns = vec![Vec::with_capacity(n); k];
        let mut state = vec![0u32; k];
        for _ in 0..n {
            for &v in &self.order {
                let u: f64 = rng.random();
                let row = self.cpt_row(v, &state);
                let mut acc = 0.0;
                let mut pick = row.len() - 1;
                for (j, &p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        pick = j;
                        break;
                    }
                }
                state[v] = pick as u32;
            }
            for (col, &s) in columns.iter_mut().zip(&state) {
                col.push(s);
            }
        }
        Dataset::new(
            self.names(),
            self.nodes.iter().map(|n| n.alphabet.clone()).collect(),
            columns,
        )
    }
}

fn topological_order(nodes: &[Node]) -> Result<Vec<usize>> {
    let k = nodes.len();
    let mut indegree: Vec<usize> = nodes.iter().map(|n| n.parents.len()).collect();
    let mut children = vec![Vec::new(); k];
    for (i, n) in nodes.iter().enumerate() {
        for &p in &n.parents {
            children[p].push(i);
        }
    }
    let mut ready: VecDeque<usize> = (0..k).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(k);
    while let Some(v) = ready.pop_front() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push_back(c);
            }
        }
    }
    if order.len() < k {
        let stuck = (0..k).find(|&i| indegree[i] > 0).expect("some node is on a cycle");
        return Err(Error::CyclicSpec(nodes[stuck].name.clone()));
    }
    Ok(order)
}

/// Full joint distribution of a network, held in memory for exact queries.
#[derive(Debug, Clone)]
pub struct ExactModel {
    net: BayesNet,
    names: Vec<String>,
    /// Probability per full state; mixed radix, first node slowest.
    states: Vec<f64>,
}

impl ExactModel {
    pub fn new(net: BayesNet, budget: u128) -> Result<Self> {
        let total = net
            .nodes
            .iter()
            .fold(1u128, |acc, n| acc.saturating_mul(n.alphabet.len() as u128));
        if total > budget {
            return Err(Error::BudgetExceeded {
                states: total,
                budget,
            });
        }
        let k = net.nodes.len();
        let radix: Vec<u32> = net.nodes.iter().map(|n| n.alphabet.len() as u32).collect();
        let mut states = Vec::with_capacity(total as usize);
        let mut digits = vec![0u32; k];
        for _ in 0..total {
            let p: f64 = (0..k)
                .map(|v| self_cpt(&net, v, &digits))
                .product();
            states.push(p);
            increment(&mut digits, &radix);
        }
        Ok(ExactModel {
            names: net.names(),
            net,
            states,
        })
    }

    pub fn from_spec(spec: &BayesNetSpec) -> Result<Self> {
        ExactModel::new(spec.compile()?, DEFAULT_STATE_BUDGET)
    }

    pub fn net(&self) -> &BayesNet {
        &self.net
    }

    fn set_alphabet(&self, vars: &[usize]) -> Result<Arc<Alphabet>> {
        match vars {
            [] => Err(Error::InvalidArgument("empty variable set".into())),
            [v] => Ok(self.net.alphabet(*v).clone()),
            _ => {
                let factors: Vec<&Alphabet> = vars.iter().map(|&v| &**self.net.alphabet(v)).collect();
                Ok(Arc::new(Alphabet::product(&factors)?))
            }
        }
    }

    /// Exact joint of two variable sets by summing the factorized distribution.
    pub fn joint_of(&self, xs: &[usize], ys: &[usize]) -> Result<JointDistribution> {
        for &v in xs.iter().chain(ys) {
            if v >= self.net.len() {
                return Err(Error::UnknownVariable(format!("#{v}")));
            }
        }
        let ax = self.set_alphabet(xs)?;
        let ay = self.set_alphabet(ys)?;
        let radix: Vec<u32> = self.net.nodes.iter().map(|n| n.alphabet.len() as u32).collect();
        let code = |vars: &[usize], digits: &[u32]| {
            vars.iter()
                .fold(0usize, |acc, &v| acc * radix[v] as usize + digits[v] as usize)
        };
        let mut probabilities = vec![vec![0.0; ay.len()]; ax.len()];
        let mut digits = vec![0u32; radix.len()];
        for &p in &self.states {
            probabilities[code(xs, &digits)][code(ys, &digits)] += p;
            increment(&mut digits, &radix);
        }
        JointDistribution::from_probabilities(ax, ay, probabilities)
    }

    pub fn marginal(&self, var: usize) -> Result<Vec<f64>> {
        let j = self.joint_of(&[var], &[var])?;
        Ok(j.marginal_x().probabilities().to_vec())
    }
}

fn self_cpt(net: &BayesNet, v: usize, digits: &[u32]) -> f64 {
    net.cpt_row(v, digits)[digits[v] as usize]
}

fn increment(digits: &mut [u32], radix: &[u32]) {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix[i] {
            return;
        }
        digits[i] = 0;
    }
}

impl JointSource for ExactModel {
    fn variable_names(&self) -> &[String] {
        &self.names
    }

    fn alphabet(&self, var: usize) -> &Arc<Alphabet> {
        self.net.alphabet(var)
    }

    fn joint(&self, xs: &[usize], ys: &[usize]) -> Result<JointDistribution> {
        self.joint_of(xs, ys)
    }
}

/// Exact pairwise joint of two named nodes under the default state budget.
pub fn exact_joint(spec: &BayesNetSpec, var_x: &str, var_y: &str) -> Result<JointDistribution> {
    let model = ExactModel::from_spec(spec)?;
    let x = model.net.index_of(var_x)?;
    let y = model.net.index_of(var_y)?;
    model.joint_of(&[x], &[y])
}
