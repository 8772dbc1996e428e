use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::JointSource;
use crate::error::{Error, Result};
use crate::tensor::{Alphabet, JointDistribution};

pub const DEFAULT_CARDINALITY_CAP: usize = 64;

/// Table of discrete samples, one alphabet per variable.
///
/// Cells are stored column by column as indices into the column's alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    alphabets: Vec<Arc<Alphabet>>,
    columns: Vec<Vec<u32>>,
    sample_count: usize,
}

impl Dataset {
    pub fn new(names: Vec<String>, alphabets: Vec<Arc<Alphabet>>, columns: Vec<Vec<u32>>) -> Result<Self> {
        if names.len() != alphabets.len() || names.len() != columns.len() {
            return Err(Error::InvalidArgument(
                "names, alphabets and columns must have equal length".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate variable `{n}`")));
            }
        }
        let sample_count = columns.first().map_or(0, Vec::len);
        if sample_count == 0 {
            return Err(Error::EmptyDataset);
        }
        for ((name, alphabet), col) in names.iter().zip(&alphabets).zip(&columns) {
            if col.len() != sample_count {
                return Err(Error::InvalidArgument(format!(
                    "column `{name}` has {} samples, expected {sample_count}",
                    col.len()
                )));
            }
            if let Some(&bad) = col.iter().find(|&&v| v as usize >= alphabet.len()) {
                return Err(Error::InvalidArgument(format!(
                    "column `{name}` holds index {bad} outside its alphabet"
                )));
            }
        }
        Ok(Dataset {
            names,
            alphabets,
            columns,
            sample_count,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_variables(&self) -> usize {
        self.names.len()
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn alphabet(&self, var: usize) -> &Arc<Alphabet> {
        &self.alphabets[var]
    }

    pub fn column(&self, var: usize) -> &[u32] {
        &self.columns[var]
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Encodes a set of variables as one variable over the product alphabet
    /// (first variable varies slowest). A single variable keeps its alphabet.
    pub fn encode(&self, vars: &[usize]) -> Result<(Arc<Alphabet>, Vec<usize>)> {
        match vars {
            [] => Err(Error::InvalidArgument("empty variable set".into())),
            [v] => {
                self.check_var(*v)?;
                Ok((
                    self.alphabets[*v].clone(),
                    self.columns[*v].iter().map(|&c| c as usize).collect(),
                ))
            }
            _ => {
                let mut size = 1usize;
                for &v in vars {
                    self.check_var(v)?;
                    size = size.checked_mul(self.alphabets[v].len()).ok_or_else(|| {
                        Error::InvalidArgument("product alphabet overflows".into())
                    })?;
                }
                let factors: Vec<&Alphabet> = vars.iter().map(|&v| &*self.alphabets[v]).collect();
                let alphabet = Alphabet::product(&factors)?;
                let mut codes = vec![0usize; self.sample_count];
                for &v in vars {
                    let radix = self.alphabets[v].len();
                    for (code, &c) in codes.iter_mut().zip(&self.columns[v]) {
                        *code = *code * radix + c as usize;
                    }
                }
                debug_assert_eq!(alphabet.len(), size);
                Ok((Arc::new(alphabet), codes))
            }
        }
    }

    fn check_var(&self, v: usize) -> Result<()> {
        if v >= self.names.len() {
            return Err(Error::UnknownVariable(format!("#{v}")));
        }
        Ok(())
    }

    /// Empirical joint of two variable sets.
    pub fn joint_of(&self, xs: &[usize], ys: &[usize]) -> Result<JointDistribution> {
        let (ax, cx) = self.encode(xs)?;
        let (ay, cy) = self.encode(ys)?;
        let mut counts = vec![vec![0u64; ay.len()]; ax.len()];
        for (&i, &j) in cx.iter().zip(&cy) {
            counts[i][j] += 1;
        }
        JointDistribution::from_counts(ax, ay, counts)
    }

    /// Keeps the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Dataset> {
        let idx = names
            .iter()
            .map(|n| self.variable_index(n))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(
            idx.iter().map(|&i| self.names[i].clone()).collect(),
            idx.iter().map(|&i| self.alphabets[i].clone()).collect(),
            idx.iter().map(|&i| self.columns[i].clone()).collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
        w.write_record(&self.names)?;
        let mut record = Vec::with_capacity(self.names.len());
        for row in 0..self.sample_count {
            record.clear();
            for (alphabet, col) in self.alphabets.iter().zip(&self.columns) {
                record.push(alphabet.symbol(col[row] as usize));
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl JointSource for Dataset {
    fn variable_names(&self) -> &[String] {
        &self.names
    }

    fn alphabet(&self, var: usize) -> &Arc<Alphabet> {
        &self.alphabets[var]
    }

    fn joint(&self, xs: &[usize], ys: &[usize]) -> Result<JointDistribution> {
        self.joint_of(xs, ys)
    }
}

/// Empirical joint of two named variables.
pub fn estimate_joint(dataset: &Dataset, var_x: &str, var_y: &str) -> Result<JointDistribution> {
    let x = dataset.variable_index(var_x)?;
    let y = dataset.variable_index(var_y)?;
    dataset.joint_of(&[x], &[y])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Keep only these columns, in this order.
    pub columns: Option<Vec<String>>,
    pub cardinality_cap: usize,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: true,
            columns: None,
            cardinality_cap: DEFAULT_CARDINALITY_CAP,
        }
    }
}

pub fn load_csv<P: AsRef<Path>>(path: P, options: &CsvOptions) -> Result<Dataset> {
    let file = File::open(path)?;
    read_csv(file, options)
}

/// Parses CSV content into a dataset. Alphabets are the distinct observed
/// labels sorted lexicographically.
pub fn read_csv<R: Read>(reader: R, options: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = rdr.records();
    let mut names: Vec<String> = Vec::new();
    let mut raw: Vec<Vec<String>> = Vec::new();
    let mut width = None;

    if options.has_header {
        match records.next() {
            Some(header) => {
                let header = header?;
                names = header.iter().map(str::to_string).collect();
                width = Some(names.len());
            }
            None => return Err(Error::EmptyDataset),
        }
    }
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                line,
                expected,
                found: record.len(),
            });
        }
        if raw.is_empty() {
            raw = vec![Vec::new(); expected];
        }
        for (col, cell) in raw.iter_mut().zip(record.iter()) {
            col.push(cell.to_string());
        }
    }
    if raw.is_empty() || raw[0].is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !options.has_header {
        names = (1..=raw.len()).map(|i| format!("V{i}")).collect();
    }

    let keep: Vec<usize> = match &options.columns {
        None => (0..names.len()).collect(),
        Some(sel) => sel
            .iter()
            .map(|s| {
                names
                    .iter()
                    .position(|n| n == s)
                    .ok_or_else(|| Error::UnknownVariable(s.clone()))
            })
            .collect::<Result<_>>()?,
    };
    if keep.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut out_names = Vec::with_capacity(keep.len());
    let mut alphabets = Vec::with_capacity(keep.len());
    let mut columns = Vec::with_capacity(keep.len());
    for &k in &keep {
        let cells = &raw[k];
        let distinct: BTreeSet<&str> = cells.iter().map(String::as_str).collect();
        if distinct.len() > options.cardinality_cap {
            return Err(Error::CardinalityCap {
                column: names[k].clone(),
                cap: options.cardinality_cap,
            });
        }
        let alphabet = Alphabet::new(distinct.iter().copied())?;
        let lookup: HashMap<&str, u32> = distinct.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
        columns.push(cells.iter().map(|c| lookup[c.as_str()]).collect());
        alphabets.push(Arc::new(alphabet));
        out_names.push(names[k].clone());
    }
    Dataset::new(out_names, alphabets, columns)
}
