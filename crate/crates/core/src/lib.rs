//! Causal skeleton discovery for discrete variables.
//!
//! Each pairwise association is treated as a discrete memoryless channel,
//! described by a row-stochastic transition tensor with per-element Jeffreys
//! intervals. Edges are kept when the channel carries information and pruned
//! when a composition through mediators reproduces the direct tensor.

pub mod data;
pub mod discovery;
pub mod error;
pub mod graph;
pub mod info;
pub mod interval;
pub mod specs;
pub mod tensor;

pub use data::{BayesNet, BayesNetSpec, CsvOptions, Dataset, ExactModel, JointSource};
pub use discovery::{discover_skeleton, DiscoveryConfig, DiscoveryReport};
pub use error::{Error, Result};
pub use info::{channel_capacity, mutual_information, path_information, Bits, CapacityResult};
pub use interval::{jeffreys_interval, Interval};
pub use tensor::{apply, compose, dagger, transition_tensor, Alphabet, Direction, JointDistribution, Pmf, StochasticTensor};
