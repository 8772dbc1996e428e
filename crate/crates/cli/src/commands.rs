use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use infoskel::data::{load_csv, BayesNetSpec, CsvOptions, Dataset};
use infoskel::discovery::{measure_pair, MultivariateOutcome, PruneStep};
use infoskel::info::path_information;
use infoskel::tensor::{transition_tensor, Direction, Pmf, StochasticTensor};
use infoskel::{discover_skeleton, mutual_information, specs, Bits, DiscoveryConfig, DiscoveryReport};
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;
use crate::{CapacityArgs, ConfigArgs, DataArgs, DiscoverArgs, PathinfoArgs, SimulateArgs};

fn delimiter_byte(c: char) -> Result<u8, CliError> {
    if c.is_ascii() {
        Ok(c as u8)
    } else {
        Err(CliError::validation(format!("delimiter `{c}` is not a single ASCII character")))
    }
}

fn load_dataset(args: &DataArgs) -> Result<Dataset, CliError> {
    let mut opts = CsvOptions {
        delimiter: delimiter_byte(args.delimiter)?,
        has_header: !args.no_header,
        columns: args.columns.clone(),
        ..CsvOptions::default()
    };
    if let Some(cap) = args.cardinality_cap {
        opts.cardinality_cap = cap;
    }
    load_csv(&args.input, &opts).map_err(|e| CliError::from(e).context(args.input.display()))
}

/// Reads `--config` if given, then applies flag overrides.
pub(crate) fn resolve_config(args: &ConfigArgs) -> Result<DiscoveryConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::from(e).context(path.display()))?;
            serde_json::from_str::<DiscoveryConfig>(&text)
                .map_err(|e| CliError::validation(e.to_string()).context(path.display()))?
        }
        None => DiscoveryConfig::default(),
    };
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = args.max_path_len {
        cfg.max_path_len = v;
    }
    if let Some(v) = args.capacity_epsilon {
        cfg.capacity_epsilon = v;
    }
    if let Some(v) = args.ba_tol {
        cfg.ba_tol = v;
    }
    if let Some(v) = args.ba_max_iter {
        cfg.ba_max_iter = v;
    }
    if let Some(v) = args.require_both_orientations {
        cfg.require_both_orientations = v;
    }
    if let Some(v) = args.mediator_cell_budget {
        cfg.mediator_cell_budget = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Writes every `(path, bytes)` pair or none of them. Each file is staged
/// next to its destination and renamed into place once all are staged.
fn write_all_or_nothing(files: &[(&Path, &[u8])]) -> Result<(), CliError> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| CliError::from(e).context(path.display()))?;
        tmp.write_all(bytes)
            .and_then(|_| tmp.flush())
            .map_err(|e| CliError::from(e).context(path.display()))?;
        staged.push((tmp, *path));
    }
    for (tmp, path) in staged {
        tmp.persist(path)
            .map_err(|e| CliError::from(e.error).context(path.display()))?;
    }
    Ok(())
}

fn summary(report: &DiscoveryReport) -> String {
    let step = |s: PruneStep| report.pruned.iter().filter(|p| p.step == s).count();
    let tested = report
        .multivariate_tests
        .iter()
        .filter(|t| matches!(t.outcome, MultivariateOutcome::Retained | MultivariateOutcome::Pruned))
        .count();
    let untestable = report
        .multivariate_tests
        .iter()
        .filter(|t| t.outcome == MultivariateOutcome::Untestable)
        .count();
    let mut s = String::new();
    s.push_str(&format!(
        "variables: {} ({})\n",
        report.variables.len(),
        report.variables.join(", ")
    ));
    if let Some(n) = report.sample_size {
        s.push_str(&format!("samples: {n}\n"));
    }
    s.push_str(&format!("step 1: {} edges retained\n", report.step1_edges.len()));
    s.push_str(&format!(
        "step 2: {} pruned, {} retained\n",
        step(PruneStep::Bivariate),
        report.step2_edges.len()
    ));
    s.push_str(&format!(
        "step 3: {} pruned, {} retained, {tested} multivariate tests, {untestable} untestable\n",
        step(PruneStep::Multivariate),
        report.skeleton.len()
    ));
    let edges: Vec<String> = report.skeleton.iter().map(|[a, b]| format!("{a} -- {b}")).collect();
    s.push_str(&format!("skeleton: {}\n", edges.join(", ")));
    for w in &report.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s.push_str(&format!("wall time: {:.3} s\n", report.duration.as_secs_f64()));
    s
}

pub fn cmd_discover(args: &DiscoverArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = resolve_config(&args.config)?;
    let data = load_dataset(&args.data)?;
    let report = discover_skeleton(&data, &config)?;
    let dot = report.to_dot(args.show_pruned);
    let mut json = report.to_json();
    json.push('\n');

    let mut files: Vec<(&Path, &[u8])> = Vec::new();
    if let Some(p) = &args.dot {
        files.push((p, dot.as_bytes()));
    }
    if let Some(p) = &args.report {
        files.push((p, json.as_bytes()));
    }
    write_all_or_nothing(&files)?;

    let mut out = String::new();
    if args.dot.is_none() {
        out.push_str(&dot);
    }
    if args.report.is_none() {
        out.push_str(&json);
    }
    out.push_str(&summary(&report));
    stdout.write_all(out.as_bytes())?;
    Ok(())
}

pub fn cmd_capacity(args: &CapacityArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = resolve_config(&args.config)?;
    let data = load_dataset(&args.data)?;
    let x = data.variable_index(&args.x)?;
    let y = data.variable_index(&args.y)?;
    if x == y {
        return Err(CliError::validation("--x and --y must name different variables"));
    }
    let record = measure_pair(&data, x, y, &config)?;
    let mut json = serde_json::to_string_pretty(&record).map_err(|e| CliError::internal(e.to_string()))?;
    json.push('\n');
    stdout.write_all(json.as_bytes())?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct PathInfoOutput {
    pub path: Vec<String>,
    pub input_marginal: Pmf,
    pub tensors: Vec<StochasticTensor>,
    pub composed_tensor: StochasticTensor,
    pub path_information: Bits,
    pub endpoint_mutual_information: Bits,
    /// Endpoint mutual information minus path information.
    pub difference: f64,
}

pub fn cmd_pathinfo(args: &PathinfoArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = resolve_config(&args.config)?;
    if args.path.len() < 2 {
        return Err(CliError::validation("--path needs at least two vertices"));
    }
    let data = load_dataset(&args.data)?;
    let idx = args
        .path
        .iter()
        .map(|v| data.variable_index(v))
        .collect::<infoskel::Result<Vec<_>>>()?;
    for (i, v) in idx.iter().enumerate() {
        if idx[..i].contains(v) {
            return Err(CliError::validation(format!("vertex `{}` repeats in --path", args.path[i])));
        }
    }
    let mut tensors = Vec::with_capacity(idx.len() - 1);
    for w in idx.windows(2) {
        let joint = data.joint_of(&[w[0]], &[w[1]])?;
        tensors.push(transition_tensor(&joint, Direction::Forward, config.alpha)?.tensor);
    }
    let first = idx[0];
    let last = idx[idx.len() - 1];
    let endpoints = data.joint_of(&[first], &[last])?;
    let input = endpoints.marginal_x();
    let (bits, dist) = path_information(&input, &tensors)?;
    let endpoint_mi = mutual_information(&endpoints);
    let out = PathInfoOutput {
        path: args.path.clone(),
        input_marginal: input,
        tensors,
        composed_tensor: dist.composed_tensor,
        path_information: bits,
        endpoint_mutual_information: endpoint_mi,
        difference: endpoint_mi.value() - bits.value(),
    };
    let mut json = serde_json::to_string_pretty(&out).map_err(|e| CliError::internal(e.to_string()))?;
    json.push('\n');
    stdout.write_all(json.as_bytes())?;
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let delimiter = delimiter_byte(args.delimiter)?;
    let spec = match (&args.spec, args.bundled.as_deref()) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::from(e).context(path.display()))?;
            BayesNetSpec::from_json(&text).map_err(|e| CliError::from(e).context(path.display()))?
        }
        (None, Some("chain")) => specs::chain()?,
        (None, Some("lucas")) => specs::lucas()?,
        (None, Some(other)) => {
            return Err(CliError::validation(format!(
                "unknown bundled network `{other}` (expected `chain` or `lucas`)"
            )))
        }
        (None, None) => return Err(CliError::validation("either --spec or --bundled is required")),
    };
    let data = spec.compile()?.sample(args.n, args.seed)?;
    let mut csv = Vec::new();
    data.write_csv(&mut csv, delimiter)?;
    write_all_or_nothing(&[(&args.output, &csv)])?;
    writeln!(
        stdout,
        "wrote {} rows x {} columns to {}",
        data.sample_count(),
        data.n_variables(),
        args.output.display()
    )?;
    Ok(())
}
