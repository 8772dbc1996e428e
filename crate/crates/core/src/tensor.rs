//! Stochastic transition tensors.
//!
//! A pairwise association between two discrete variables is modelled as a
//! discrete memoryless channel: a row-stochastic matrix whose row `x` holds
//! `p(output | input = x)`. Pushing an input pmf through the channel is the
//! law of total probability, chaining two channels is a matrix product, and
//! traversing a channel backwards uses Bayes' rule (the dagger tensor), which
//! is a stochastic matrix again and generally not the matrix inverse.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{jeffreys_interval, Interval};

/// Tolerance on row sums and total mass. Drift inside it is renormalized away.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Float slack when testing whether a composed element lies in an interval.
pub const CONTAINMENT_SLACK: f64 = 1e-9;

/// Default significance level of the per-element intervals.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Ordered set of category labels.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    /// Keeps the given order. Labels must be unique and nonempty as a set.
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidAlphabet(format!("duplicate label `{s}`")));
            }
        }
        Ok(Alphabet { symbols, index })
    }

    /// Sorted lexicographically, duplicates removed.
    pub fn lexicographic<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        symbols.sort();
        symbols.dedup();
        Alphabet::new(symbols)
    }

    /// Labels `"0"`, `"1"`, ... in numeric order.
    pub fn indexed(n: usize) -> Self {
        Alphabet::new((0..n.max(1)).map(|i| i.to_string())).expect("indexed labels are unique")
    }

    /// Cartesian product; the first factor varies slowest. Labels are joined
    /// with `|`.
    pub fn product(factors: &[&Alphabet]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidAlphabet("empty product".into()));
        }
        let mut labels = vec![String::new()];
        for (k, f) in factors.iter().enumerate() {
            let mut next = Vec::with_capacity(labels.len() * f.len());
            for prefix in &labels {
                for s in &f.symbols {
                    if k == 0 {
                        next.push(s.clone());
                    } else {
                        next.push(format!("{prefix}|{s}"));
                    }
                }
            }
            labels = next;
        }
        // joined labels can collide when the factor labels contain `|`
        Alphabet::new(labels)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for Alphabet {}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.symbols).finish()
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = Error;

    fn try_from(symbols: Vec<String>) -> Result<Self> {
        Alphabet::new(symbols)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.symbols
    }
}

fn same_alphabet(a: &Arc<Alphabet>, b: &Arc<Alphabet>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Validates a probability vector and renormalizes sub-tolerance drift.
fn normalize(values: &mut [f64], what: &str) -> Result<()> {
    let mut sum = 0.0;
    for v in values.iter_mut() {
        if !v.is_finite() || *v < -NORMALIZATION_TOL || *v > 1.0 + NORMALIZATION_TOL {
            return Err(Error::NotNormalized(format!("{what}: entry {v} outside [0, 1]")));
        }
        *v = v.clamp(0.0, 1.0);
        sum += *v;
    }
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(format!("{what}: sums to {sum}")));
    }
    if sum != 1.0 {
        for v in values.iter_mut() {
            *v /= sum;
        }
    }
    Ok(())
}

/// Probability mass function over an alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    alphabet: Arc<Alphabet>,
    probabilities: Vec<f64>,
}

impl Pmf {
    pub fn new(alphabet: Arc<Alphabet>, mut probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != alphabet.len() {
            return Err(Error::DimensionMismatch {
                expected: alphabet.len(),
                actual: probabilities.len(),
            });
        }
        normalize(&mut probabilities, "pmf")?;
        Ok(Pmf {
            alphabet,
            probabilities,
        })
    }

    pub fn uniform(alphabet: Arc<Alphabet>) -> Self {
        let n = alphabet.len();
        Pmf {
            alphabet,
            probabilities: vec![1.0 / n as f64; n],
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        -self
            .probabilities
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>()
    }

    pub fn has_full_support(&self) -> bool {
        self.probabilities.iter().all(|&p| p > 0.0)
    }
}

/// Joint pmf of two variables, optionally with the counts it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    x_alphabet: Arc<Alphabet>,
    y_alphabet: Arc<Alphabet>,
    probabilities: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_size: Option<u64>,
}

impl JointDistribution {
    pub fn from_counts(
        x_alphabet: Arc<Alphabet>,
        y_alphabet: Arc<Alphabet>,
        counts: Vec<Vec<u64>>,
    ) -> Result<Self> {
        check_shape(&counts, x_alphabet.len(), y_alphabet.len())?;
        let n: u64 = counts.iter().flatten().sum();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let probabilities = counts
            .iter()
            .map(|row| row.iter().map(|&c| c as f64 / n as f64).collect())
            .collect();
        Ok(JointDistribution {
            x_alphabet,
            y_alphabet,
            probabilities,
            counts: Some(counts),
            sample_size: Some(n),
        })
    }

    /// Population-level joint without sampling provenance.
    pub fn from_probabilities(
        x_alphabet: Arc<Alphabet>,
        y_alphabet: Arc<Alphabet>,
        probabilities: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_shape(&probabilities, x_alphabet.len(), y_alphabet.len())?;
        let mut flat: Vec<f64> = probabilities.iter().flatten().copied().collect();
        normalize(&mut flat, "joint")?;
        let cols = y_alphabet.len();
        let probabilities = flat.chunks(cols).map(<[f64]>::to_vec).collect();
        Ok(JointDistribution {
            x_alphabet,
            y_alphabet,
            probabilities,
            counts: None,
            sample_size: None,
        })
    }

    pub fn x_alphabet(&self) -> &Arc<Alphabet> {
        &self.x_alphabet
    }

    pub fn y_alphabet(&self) -> &Arc<Alphabet> {
        &self.y_alphabet
    }

    pub fn probabilities(&self) -> &[Vec<f64>] {
        &self.probabilities
    }

    pub fn counts(&self) -> Option<&[Vec<u64>]> {
        self.counts.as_deref()
    }

    pub fn sample_size(&self) -> Option<u64> {
        self.sample_size
    }

    pub fn marginal_x(&self) -> Pmf {
        let p = self.probabilities.iter().map(|r| r.iter().sum()).collect();
        Pmf::new(self.x_alphabet.clone(), p).expect("joint rows sum to a pmf")
    }

    pub fn marginal_y(&self) -> Pmf {
        let mut p = vec![0.0; self.y_alphabet.len()];
        for row in &self.probabilities {
            for (acc, v) in p.iter_mut().zip(row) {
                *acc += v;
            }
        }
        Pmf::new(self.y_alphabet.clone(), p).expect("joint columns sum to a pmf")
    }

    pub fn transpose(&self) -> Self {
        JointDistribution {
            x_alphabet: self.y_alphabet.clone(),
            y_alphabet: self.x_alphabet.clone(),
            probabilities: transpose(&self.probabilities),
            counts: self.counts.as_ref().map(|c| transpose(c)),
            sample_size: self.sample_size,
        }
    }

    /// Largest absolute element-wise difference.
    pub fn max_abs_diff(&self, other: &JointDistribution) -> f64 {
        max_abs_diff(&self.probabilities, &other.probabilities)
    }
}

fn check_shape<T>(m: &[Vec<T>], rows: usize, cols: usize) -> Result<()> {
    if m.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            actual: m.len(),
        });
    }
    for r in m {
        if r.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                actual: r.len(),
            });
        }
    }
    Ok(())
}

fn transpose<T: Copy>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        if ra.len() != rb.len() {
            return f64::INFINITY;
        }
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}

/// Row-stochastic matrix; row `i` is `p(output | input = i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticTensor {
    input_alphabet: Arc<Alphabet>,
    output_alphabet: Arc<Alphabet>,
    rows: Vec<Vec<f64>>,
}

impl StochasticTensor {
    pub fn new(
        input_alphabet: Arc<Alphabet>,
        output_alphabet: Arc<Alphabet>,
        mut rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        check_shape(&rows, input_alphabet.len(), output_alphabet.len())?;
        for (i, row) in rows.iter_mut().enumerate() {
            normalize(row, &format!("tensor row {i}"))?;
        }
        Ok(StochasticTensor {
            input_alphabet,
            output_alphabet,
            rows,
        })
    }

    /// Convenience constructor over indexed alphabets.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("tensor needs at least one row and column".into()));
        }
        StochasticTensor::new(
            Arc::new(Alphabet::indexed(n)),
            Arc::new(Alphabet::indexed(m)),
            rows,
        )
    }

    pub fn identity(alphabet: Arc<Alphabet>) -> Self {
        let n = alphabet.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        StochasticTensor {
            input_alphabet: alphabet.clone(),
            output_alphabet: alphabet,
            rows,
        }
    }

    pub fn input_alphabet(&self) -> &Arc<Alphabet> {
        &self.input_alphabet
    }

    pub fn output_alphabet(&self) -> &Arc<Alphabet> {
        &self.output_alphabet
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.rows[input][output]
    }

    pub fn n_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.output_alphabet.len()
    }

    /// Largest absolute element-wise difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &StochasticTensor) -> f64 {
        max_abs_diff(&self.rows, &other.rows)
    }

    /// Joint distribution obtained by feeding `input` through the channel.
    pub fn joint_with(&self, input: &Pmf) -> Result<JointDistribution> {
        if !same_alphabet(input.alphabet(), &self.input_alphabet) {
            return Err(Error::AlphabetMismatch(
                "input pmf does not match tensor input alphabet".into(),
            ));
        }
        let probabilities = self
            .rows
            .iter()
            .zip(input.probabilities())
            .map(|(row, &p)| row.iter().map(|&t| p * t).collect())
            .collect();
        JointDistribution::from_probabilities(
            self.input_alphabet.clone(),
            self.output_alphabet.clone(),
            probabilities,
        )
    }
}

/// Pushes a pmf through a channel: `out[y] = sum_x p[x] * T[x][y]`.
pub fn apply(tensor: &StochasticTensor, input: &Pmf) -> Result<Pmf> {
    if !same_alphabet(input.alphabet(), tensor.input_alphabet()) {
        return Err(Error::AlphabetMismatch(format!(
            "pmf over {} symbols fed to tensor with {} inputs",
            input.len(),
            tensor.n_inputs()
        )));
    }
    let mut out = vec![0.0; tensor.n_outputs()];
    for (row, &p) in tensor.rows().iter().zip(input.probabilities()) {
        for (acc, &t) in out.iter_mut().zip(row) {
            *acc += p * t;
        }
    }
    Pmf::new(tensor.output_alphabet().clone(), out)
}

/// Cascades two channels: the tensor of `a` followed by `b`.
pub fn compose(a: &StochasticTensor, b: &StochasticTensor) -> Result<StochasticTensor> {
    if !same_alphabet(a.output_alphabet(), b.input_alphabet()) {
        return Err(Error::AlphabetMismatch(format!(
            "cannot chain {}-output tensor into {}-input tensor",
            a.n_outputs(),
            b.n_inputs()
        )));
    }
    let m = b.n_outputs();
    let rows = a
        .rows()
        .iter()
        .map(|ra| {
            let mut out = vec![0.0; m];
            for (&w, rb) in ra.iter().zip(b.rows()) {
                if w == 0.0 {
                    continue;
                }
                for (acc, &v) in out.iter_mut().zip(rb) {
                    *acc += w * v;
                }
            }
            out
        })
        .collect();
    StochasticTensor::new(a.input_alphabet().clone(), b.output_alphabet().clone(), rows)
}

/// Reverse-traversal tensor together with the rows that had no support.
#[derive(Debug, Clone, PartialEq)]
pub struct Dagger {
    pub tensor: StochasticTensor,
    pub degenerate_rows: Vec<usize>,
}

/// Bayes reversal of `tensor` under `input_marginal`:
/// `D[y][x] = T[x][y] p[x] / sum_x' T[x'][y] p[x']`.
///
/// Output symbols with zero implied probability get a uniform row and are
/// listed in `degenerate_rows`.
pub fn dagger(tensor: &StochasticTensor, input_marginal: &Pmf) -> Result<Dagger> {
    if !same_alphabet(input_marginal.alphabet(), tensor.input_alphabet()) {
        return Err(Error::AlphabetMismatch(
            "marginal does not match tensor input alphabet".into(),
        ));
    }
    let n = tensor.n_inputs();
    let p = input_marginal.probabilities();
    let mut degenerate_rows = Vec::new();
    let rows = (0..tensor.n_outputs())
        .map(|y| {
            let weights: Vec<f64> = (0..n).map(|x| tensor.get(x, y) * p[x]).collect();
            let total: f64 = weights.iter().sum();
            if total > 0.0 {
                weights.into_iter().map(|w| w / total).collect()
            } else {
                degenerate_rows.push(y);
                vec![1.0 / n as f64; n]
            }
        })
        .collect();
    let tensor = StochasticTensor::new(
        tensor.output_alphabet().clone(),
        tensor.input_alphabet().clone(),
        rows,
    )?;
    Ok(Dagger {
        tensor,
        degenerate_rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `p(y | x)` for a joint over `(x, y)`.
    Forward,
    /// `p(x | y)`.
    Reverse,
}

/// A transition tensor estimated from a joint, with per-element intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEstimate {
    pub tensor: StochasticTensor,
    pub ci_low: Vec<Vec<f64>>,
    pub ci_high: Vec<Vec<f64>>,
    /// Samples per input symbol; absent for population-level joints.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row_counts: Option<Vec<u64>>,
    pub alpha: f64,
    /// Input symbols without support; their rows are uniform and uninformative.
    pub degenerate_rows: Vec<usize>,
}

impl TensorEstimate {
    pub fn interval(&self, input: usize, output: usize) -> Interval {
        Interval {
            low: self.ci_low[input][output],
            high: self.ci_high[input][output],
        }
    }

    pub fn is_degenerate(&self, input: usize) -> bool {
        self.degenerate_rows.contains(&input)
    }
}

/// Conditional tensor of a joint in the requested direction.
///
/// Empirical joints get Jeffreys intervals per element (cell count out of row
/// count). Population joints get zero-width intervals at the point value.
pub fn transition_tensor(
    joint: &JointDistribution,
    direction: Direction,
    alpha: f64,
) -> Result<TensorEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let oriented;
    let joint = match direction {
        Direction::Forward => joint,
        Direction::Reverse => {
            oriented = joint.transpose();
            &oriented
        }
    };
    let n_out = joint.y_alphabet().len();
    let mut rows = Vec::with_capacity(joint.x_alphabet().len());
    let mut ci_low = Vec::with_capacity(rows.capacity());
    let mut ci_high = Vec::with_capacity(rows.capacity());
    let mut degenerate_rows = Vec::new();
    let mut row_counts = joint.counts().map(|_| Vec::new());

    for (i, prow) in joint.probabilities().iter().enumerate() {
        let mass: f64 = prow.iter().sum();
        let count_row = joint.counts().map(|c| &c[i]);
        let n: u64 = count_row.map_or(0, |c| c.iter().sum());
        if let Some(rc) = row_counts.as_mut() {
            rc.push(n);
        }
        let empty = match count_row {
            Some(_) => n == 0,
            None => mass <= 0.0,
        };
        if empty {
            degenerate_rows.push(i);
            rows.push(vec![1.0 / n_out as f64; n_out]);
            ci_low.push(vec![0.0; n_out]);
            ci_high.push(vec![1.0; n_out]);
            continue;
        }
        match count_row {
            Some(c) => {
                rows.push(c.iter().map(|&k| k as f64 / n as f64).collect());
                let mut lo = Vec::with_capacity(n_out);
                let mut hi = Vec::with_capacity(n_out);
                for &k in c {
                    let ci = jeffreys_interval(k, n, alpha)?;
                    lo.push(ci.low);
                    hi.push(ci.high);
                }
                ci_low.push(lo);
                ci_high.push(hi);
            }
            None => {
                let row: Vec<f64> = prow.iter().map(|&p| p / mass).collect();
                ci_low.push(row.clone());
                ci_high.push(row.clone());
                rows.push(row);
            }
        }
    }
    let tensor = StochasticTensor::new(joint.x_alphabet().clone(), joint.y_alphabet().clone(), rows)?;
    // renormalization may have nudged point values; keep them inside their bounds
    for (i, row) in tensor.rows().iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            ci_low[i][j] = ci_low[i][j].min(v);
            ci_high[i][j] = ci_high[i][j].max(v);
        }
    }
    Ok(TensorEstimate {
        tensor,
        ci_low,
        ci_high,
        row_counts,
        alpha,
        degenerate_rows,
    })
}

/// Outcome of comparing a composed tensor against a direct estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiComparison {
    pub equal: bool,
    /// Largest distance from a composed element to its interval.
    pub max_deviation: f64,
}

/// True iff every composed element lies inside the direct estimate's interval.
pub fn tensors_equal_within_ci(
    direct: &TensorEstimate,
    composed: &StochasticTensor,
) -> Result<CiComparison> {
    let d = &direct.tensor;
    if d.n_inputs() != composed.n_inputs() || d.n_outputs() != composed.n_outputs() {
        return Err(Error::DimensionMismatch {
            expected: d.n_inputs() * d.n_outputs(),
            actual: composed.n_inputs() * composed.n_outputs(),
        });
    }
    if d.input_alphabet() != composed.input_alphabet()
        || d.output_alphabet() != composed.output_alphabet()
    {
        return Err(Error::AlphabetMismatch(
            "direct and composed tensors range over different alphabets".into(),
        ));
    }
    let mut max_deviation = 0.0f64;
    for (i, row) in composed.rows().iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            max_deviation = max_deviation.max(direct.interval(i, j).distance(v));
        }
    }
    Ok(CiComparison {
        equal: max_deviation <= CONTAINMENT_SLACK,
        max_deviation,
    })
}
