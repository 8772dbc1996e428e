//! Bundled example networks.

use crate::data::BayesNetSpec;
use crate::error::Result;

pub const CHAIN_JSON: &str = include_str!("../specs/chain.json");
pub const LUCAS_JSON: &str = include_str!("../specs/lucas.json");

/// Binary chain `X -> Y -> Z`.
pub fn chain() -> Result<BayesNetSpec> {
    BayesNetSpec::from_json(CHAIN_JSON)
}

/// The LUCAS lung-cancer network: twelve binary variables, twelve edges,
/// one isolated variable.
pub fn lucas() -> Result<BayesNetSpec> {
    BayesNetSpec::from_json(LUCAS_JSON)
}

/// Undirected edges of the LUCAS network, each pair sorted by name.
pub fn lucas_skeleton() -> Vec<(String, String)> {
    let raw = [
        ("Anxiety", "Smoking"),
        ("Peer_Pressure", "Smoking"),
        ("Smoking", "Yellow_Fingers"),
        ("Smoking", "Lung_Cancer"),
        ("Genetics", "Lung_Cancer"),
        ("Genetics", "Attention_Disorder"),
        ("Lung_Cancer", "Coughing"),
        ("Lung_Cancer", "Fatigue"),
        ("Allergy", "Coughing"),
        ("Coughing", "Fatigue"),
        ("Fatigue", "Car_Accident"),
        ("Attention_Disorder", "Car_Accident"),
    ];
    let mut out: Vec<(String, String)> = raw
        .iter()
        .map(|&(a, b)| if a < b { (a.into(), b.into()) } else { (b.into(), a.into()) })
        .collect();
    out.sort();
    out
}
