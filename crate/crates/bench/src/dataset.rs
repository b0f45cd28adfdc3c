//! Reference datasets: one SMILES per line, optionally followed by
//! tab-separated numeric property columns under a header line.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use tartarus_core::mol::{canonical_key, parse_smiles, write_smiles, Molecule};
use tartarus_core::objectives::{evaluate_task, property_unit, PropertyMap, Quantity, TaskContext, TaskDefinition};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read dataset {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("dataset line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dataset contains no molecules")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    /// 1-based line number in the source.
    pub line: usize,
    pub canonical_key: String,
    pub molecule: Molecule,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Duplicate {
    pub line: usize,
    pub first_line: usize,
    pub canonical_key: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub source: Option<PathBuf>,
    pub columns: Vec<String>,
    pub entries: Vec<DatasetEntry>,
    pub duplicates: Vec<Duplicate>,
    train_len: usize,
}

fn looks_like_header(fields: &[&str]) -> bool {
    fields[0].eq_ignore_ascii_case("smiles")
        || (fields.len() > 1 && fields[1..].iter().any(|f| f.trim().parse::<f64>().is_err()))
}

pub fn parse_dataset(text: &str) -> Result<Dataset, DatasetError> {
    let mut columns: Option<Vec<String>> = None;
    let mut entries: Vec<DatasetEntry> = Vec::new();
    let mut duplicates = Vec::new();
    let mut first_seen: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if columns.is_none() {
            if looks_like_header(&fields) {
                columns = Some(fields[1..].iter().map(|f| f.trim().to_string()).collect());
                continue;
            }
            columns = Some((1..fields.len()).map(|k| format!("col{k}")).collect());
        }
        let names = columns.as_ref().expect("set above");
        if fields.len() != names.len() + 1 {
            return Err(DatasetError::Parse {
                line,
                message: format!("expected {} fields, found {}", names.len() + 1, fields.len()),
            });
        }
        let smiles = fields[0].trim();
        let molecule = parse_smiles(smiles).map_err(|e| DatasetError::Parse {
            line,
            message: format!("'{smiles}': {e}"),
        })?;
        if molecule.is_empty() {
            return Err(DatasetError::Parse {
                line,
                message: "empty molecule".into(),
            });
        }
        let mut values = Vec::with_capacity(names.len());
        for f in &fields[1..] {
            values.push(f.trim().parse::<f64>().map_err(|e| DatasetError::Parse {
                line,
                message: format!("'{f}': {e}"),
            })?);
        }
        let key = canonical_key(&molecule);
        if let Some(&first_line) = first_seen.get(&key) {
            log::warn!("dataset line {line} duplicates line {first_line} ({key}); dropped");
            duplicates.push(Duplicate {
                line,
                first_line,
                canonical_key: key,
            });
            continue;
        }
        first_seen.insert(key.clone(), line);
        entries.push(DatasetEntry {
            line,
            canonical_key: key,
            molecule,
            values,
        });
    }
    if entries.is_empty() {
        return Err(DatasetError::Empty);
    }
    let n = entries.len();
    Ok(Dataset {
        source: None,
        columns: columns.unwrap_or_default(),
        entries,
        duplicates,
        train_len: (4 * n).div_ceil(5),
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut d = parse_dataset(&text)?;
    d.source = Some(path.to_path_buf());
    Ok(d)
}

impl Dataset {
    /// Unlabelled dataset from molecules already in memory, deduplicated.
    pub fn from_molecules(molecules: Vec<Molecule>) -> Result<Dataset, DatasetError> {
        let text: String = molecules.iter().map(|m| write_smiles(m) + "\n").collect();
        parse_dataset(&text)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn molecules(&self) -> Vec<Molecule> {
        self.entries.iter().map(|e| e.molecule.clone()).collect()
    }

    /// First 80 % of the unique molecules, in file order.
    pub fn train(&self) -> &[DatasetEntry] {
        &self.entries[..self.train_len]
    }

    pub fn validation(&self) -> &[DatasetEntry] {
        &self.entries[self.train_len..]
    }

    pub fn train_molecules(&self) -> Vec<Molecule> {
        self.train().iter().map(|e| e.molecule.clone()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Catalogued columns of entry `i` as unit-tagged properties.
    pub fn property_map(&self, i: usize) -> PropertyMap {
        self.columns
            .iter()
            .zip(&self.entries[i].values)
            .filter_map(|(c, &v)| property_unit(c).map(|u| (c.clone(), Quantity::new(v, u))))
            .collect()
    }

    /// Entry indices ordered best-first for seeding `task`: by the task's
    /// ranking column when present, else by the task fitness computed from
    /// the property columns, else file order. Equal scores are ordered by
    /// canonical key.
    pub fn ranked_for(&self, task: &TaskDefinition, ctx: &TaskContext) -> Vec<usize> {
        let (col, sign) = task.seed_column;
        let score: Option<Vec<f64>> = if let Some(k) = self.column_index(col) {
            Some(self.entries.iter().map(|e| sign * e.values[k]).collect())
        } else if task.properties.iter().all(|p| self.column_index(p).is_some()) {
            Some(
                (0..self.len())
                    .map(|i| {
                        evaluate_task(&self.entries[i].molecule, task, &self.property_map(i), ctx)
                            .unwrap_or(f64::NEG_INFINITY)
                    })
                    .collect(),
            )
        } else {
            None
        };
        let mut order: Vec<usize> = (0..self.len()).collect();
        if let Some(score) = score {
            let key = |i: usize| if score[i].is_nan() { f64::NEG_INFINITY } else { score[i] };
            order.sort_by(|&a, &b| {
                key(b)
                    .total_cmp(&key(a))
                    .then_with(|| self.entries[a].canonical_key.cmp(&self.entries[b].canonical_key))
            });
        }
        order
    }

    /// The `n` best molecules for `task` (see [`Dataset::ranked_for`]).
    pub fn seeds_for(&self, task: &TaskDefinition, ctx: &TaskContext, n: usize) -> Vec<Molecule> {
        self.ranked_for(task, ctx)
            .into_iter()
            .take(n)
            .map(|i| self.entries[i].molecule.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_columns_and_duplicates() {
        let d = parse_dataset("smiles\tdE_act_kcal\nCCO\t3.5\nOCC\t4.0\nc1ccccc1\t1\n").unwrap();
        assert_eq!(d.columns, ["dE_act_kcal"]);
        assert_eq!(d.len(), 2);
        assert_eq!(d.duplicates.len(), 1);
        assert_eq!(d.duplicates[0].line, 3);
        assert_eq!(d.property_map(0)["dE_act_kcal"].unit, "kcal/mol");
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(parse_dataset("C\nC1CC\n"), Err(DatasetError::Parse { line: 2, .. })));
        assert!(matches!(parse_dataset("# nothing\n\n"), Err(DatasetError::Empty)));
        assert!(matches!(
            parse_dataset("smiles\tx\nC\t1\nN\n"),
            Err(DatasetError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn prefix_split() {
        let text: String = (1..=10).map(|k| "C".repeat(k) + "\n").collect();
        let d = parse_dataset(&text).unwrap();
        assert_eq!(d.train().len(), 8);
        assert_eq!(d.validation().len(), 2);
        assert_eq!(d.validation()[0].line, 9);
    }
}
