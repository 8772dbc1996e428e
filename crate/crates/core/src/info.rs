//! Information measures over channels: mutual information, path information,
//! Blahut-Arimoto channel capacity and the coincidental-equality model.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{apply, compose, JointDistribution, Pmf, StochasticTensor};

const NEGATIVE_TOL: f64 = 1e-12;

pub const DEFAULT_BA_TOL: f64 = 1e-9;
pub const DEFAULT_BA_MAX_ITER: usize = 10_000;

/// An information quantity in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bits(pub f64);

impl Bits {
    pub fn value(self) -> f64 {
        self.0
    }

    fn clamped(v: f64) -> Self {
        // rounding can push exact zeros slightly negative
        if (-NEGATIVE_TOL..0.0).contains(&v) {
            Bits(0.0)
        } else {
            Bits(v.max(0.0))
        }
    }
}

/// `sum p(x,z) log2[p(x,z) / (p(x) p(z))]`, with `0 log 0 = 0`.
pub fn mutual_information(joint: &JointDistribution) -> Bits {
    let px = joint.marginal_x();
    let pz = joint.marginal_y();
    let mut total = 0.0;
    for (row, &a) in joint.probabilities().iter().zip(px.probabilities()) {
        for (&pxz, &b) in row.iter().zip(pz.probabilities()) {
            if pxz > 0.0 {
                total += pxz * (pxz / (a * b)).log2();
            }
        }
    }
    Bits::clamped(total)
}

/// Distributions induced by feeding an input marginal along a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDistribution {
    pub input_marginal: Pmf,
    pub composed_tensor: StochasticTensor,
    pub implied_joint: JointDistribution,
    pub implied_output: Pmf,
}

/// Mutual information transmitted along a chain of channels.
///
/// The edge tensors are composed left to right and the input marginal is
/// pushed through the result; the returned value is the mutual information
/// of that path-implied joint, not of any observed endpoint joint.
pub fn path_information(
    input_marginal: &Pmf,
    edge_tensors: &[StochasticTensor],
) -> Result<(Bits, PathDistribution)> {
    let (first, rest) = edge_tensors
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("path needs at least one edge".into()))?;
    let mut composed = first.clone();
    for t in rest {
        composed = compose(&composed, t)?;
    }
    let implied_joint = composed.joint_with(input_marginal)?;
    let implied_output = apply(&composed, input_marginal)?;
    let bits = mutual_information(&implied_joint);
    Ok((
        bits,
        PathDistribution {
            input_marginal: input_marginal.clone(),
            composed_tensor: composed,
            implied_joint,
            implied_output,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub capacity: Bits,
    pub optimal_input: Pmf,
    pub iterations: usize,
    pub converged: bool,
}

/// Capacity of a discrete memoryless channel by Blahut-Arimoto.
///
/// Starts from the uniform input and stops once the gap between the upper
/// bound `log max_x D(x)` and the lower bound `log sum_x r(x) D(x)` drops
/// below `tol` bits, where `D(x) = exp KL(T[x] || q)`.
pub fn channel_capacity(tensor: &StochasticTensor, tol: f64, max_iter: usize) -> CapacityResult {
    let n = tensor.n_inputs();
    let m = tensor.n_outputs();
    let rows = tensor.rows();
    let mut r = vec![1.0 / n as f64; n];
    let mut q = vec![0.0; m];
    let mut d = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    let lower = loop {
        q.iter_mut().for_each(|v| *v = 0.0);
        for (row, &w) in rows.iter().zip(&r) {
            for (acc, &t) in q.iter_mut().zip(row) {
                *acc += w * t;
            }
        }
        for (dx, row) in d.iter_mut().zip(rows) {
            let kl: f64 = row
                .iter()
                .zip(&q)
                .filter(|(&t, _)| t > 0.0)
                .map(|(&t, &qy)| t * (t / qy).ln())
                .sum();
            *dx = kl.exp();
        }
        let z: f64 = r.iter().zip(&d).map(|(a, b)| a * b).sum();
        let max_d = d.iter().copied().fold(f64::MIN, f64::max);
        let lower = z.ln() / std::f64::consts::LN_2;
        let upper = max_d.ln() / std::f64::consts::LN_2;
        if upper - lower < tol {
            converged = true;
            break lower;
        }
        if iterations >= max_iter {
            break lower;
        }
        for (rx, dx) in r.iter_mut().zip(&d) {
            *rx *= dx / z;
        }
        iterations += 1;
    };

    let bound = (n.min(m) as f64).log2();
    let optimal_input = Pmf::new(tensor.input_alphabet().clone(), r)
        .unwrap_or_else(|_| Pmf::uniform(tensor.input_alphabet().clone()));
    CapacityResult {
        capacity: Bits::clamped(lower.min(bound)),
        optimal_input,
        iterations,
        converged,
    }
}

/// `10^(-digits * n_in * (m_out - 1))`: scaling of the chance that a random
/// stochastic tensor coincides with a given one at `digits` significant
/// digits.
pub fn coincidence_probability(sig_digits: u32, n_in: u32, m_out: u32) -> Result<f64> {
    if sig_digits == 0 || n_in == 0 || m_out == 0 {
        return Err(Error::InvalidArgument(
            "significant digits and cardinalities must be positive".into(),
        ));
    }
    let exponent = sig_digits as u64 * n_in as u64 * (m_out as u64 - 1);
    // 10^k is exact in f64 up to k = 22, so the quotient is correctly rounded
    Ok(if exponent <= 22 {
        1.0 / 10f64.powi(exponent as i32)
    } else if exponent <= 400 {
        10f64.powi(-(exponent as i32))
    } else {
        0.0
    })
}

/// Monte Carlo estimate of the coincidental-equality probability.
///
/// Per trial and per row, each of the first `M - 1` elements is drawn
/// uniformly from `{1, ..., target * 10^digits}` and scaled by
/// `10^-digits`; the last element closes the row. A trial counts when the
/// constructed tensor reproduces `target` exactly. Every target element must
/// be a positive multiple of `10^-digits`.
pub fn coincidence_monte_carlo<R: Rng + ?Sized>(
    target: &StochasticTensor,
    sig_digits: u32,
    trials: u64,
    rng: &mut R,
) -> Result<f64> {
    if sig_digits == 0 || sig_digits > 9 || trials == 0 {
        return Err(Error::InvalidArgument(
            "digits must lie in 1..=9 and trials must be positive".into(),
        ));
    }
    let scale = 10u64.pow(sig_digits);
    let mut grid: Vec<Vec<u64>> = Vec::with_capacity(target.n_inputs());
    for row in target.rows() {
        let mut units = Vec::with_capacity(row.len());
        for &v in row {
            let u = (v * scale as f64).round();
            if u < 1.0 || (u - v * scale as f64).abs() > 1e-6 {
                return Err(Error::InvalidArgument(format!(
                    "target element {v} is not a positive multiple of 10^-{sig_digits}"
                )));
            }
            units.push(u as u64);
        }
        grid.push(units);
    }
    let mut hits = 0u64;
    for _ in 0..trials {
        let hit = grid.iter().all(|units| {
            let (_, free) = units.split_last().expect("rows are nonempty");
            // draw every element even after a miss so the stream stays aligned
            free.iter()
                .map(|&u| rng.random_range(1..=u) == u)
                .fold(true, |acc, eq| acc & eq)
        });
        if hit {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// `min[I(X;Y), I(Y;Z)] - I(X;Z)`.
pub fn dpi_gap(
    joint_xy: &JointDistribution,
    joint_yz: &JointDistribution,
    joint_xz: &JointDistribution,
) -> Result<f64> {
    let consistent = joint_xy.y_alphabet() == joint_yz.x_alphabet()
        && joint_xy.x_alphabet() == joint_xz.x_alphabet()
        && joint_yz.y_alphabet() == joint_xz.y_alphabet();
    if !consistent {
        return Err(Error::AlphabetMismatch(
            "joints do not range over a common X, Y, Z".into(),
        ));
    }
    let xy = mutual_information(joint_xy).value();
    let yz = mutual_information(joint_yz).value();
    let xz = mutual_information(joint_xz).value();
    Ok(xy.min(yz) - xz)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    h(p) + h(1.0 - p)
}

/// Joint of a binary symmetric channel driven by a uniform input.
pub fn bsc_joint(crossover: f64) -> JointDistribution {
    let a = Arc::new(crate::tensor::Alphabet::indexed(2));
    JointDistribution::from_probabilities(
        a.clone(),
        a,
        vec![
            vec![(1.0 - crossover) / 2.0, crossover / 2.0],
            vec![crossover / 2.0, (1.0 - crossover) / 2.0],
        ],
    )
    .expect("valid crossover")
}
