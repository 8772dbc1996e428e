//! Dataset ingestion and ground-truth generation.

mod bayesnet;
mod dataset;

use std::sync::Arc;

pub use bayesnet::{exact_joint, BayesNet, BayesNetSpec, ExactModel, NodeSpec, DEFAULT_STATE_BUDGET};
pub use dataset::{estimate_joint, load_csv, read_csv, CsvOptions, Dataset, DEFAULT_CARDINALITY_CAP};

use crate::error::Result;
use crate::tensor::{Alphabet, JointDistribution};

/// Anything that can produce joints over sets of its variables: an empirical
/// dataset, or an exact population model.
pub trait JointSource: Sync {
    fn variable_names(&self) -> &[String];

    fn alphabet(&self, var: usize) -> &Arc<Alphabet>;

    /// Joint of the variable sets `xs` and `ys`, each encoded over the
    /// product of its members' alphabets (first member slowest).
    fn joint(&self, xs: &[usize], ys: &[usize]) -> Result<JointDistribution>;
}
