//! The searchable store of solved playstyles.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::playstyle::{rank, PlaystyleMetrics, SearchError};
use crate::solver::Policy;

pub const DATASET_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub display_name: String,
    pub policy: Policy,
    pub metrics: PlaystyleMetrics,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub level_ids: Vec<String>,
    pub runs_per_level: u32,
    pub seed: u64,
    pub explore_budget: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyDataset {
    pub provenance: Provenance,
    pub entries: Vec<DatasetEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("dataset schema version {found} is not supported (expected {expected})")]
    SchemaVersionMismatch { found: u64, expected: u32 },
    #[error("corrupt dataset file: {0}")]
    CorruptFile(String),
    #[error("duplicate display name `{0}`")]
    DuplicateName(String),
    #[error("entry `{0}` has no recorded actions")]
    EmptyMetrics(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize)]
struct FileOut<'a> {
    schema_version: u32,
    provenance: &'a Provenance,
    entries: &'a [DatasetEntry],
}

#[derive(Deserialize)]
struct FileIn {
    provenance: Provenance,
    entries: Vec<DatasetEntry>,
}

impl PolicyDataset {
    pub fn new(provenance: Provenance, entries: Vec<DatasetEntry>) -> Result<PolicyDataset, DatasetError> {
        let ds = PolicyDataset { provenance, entries };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<(), DatasetError> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(e.display_name.as_str()) {
                return Err(DatasetError::DuplicateName(e.display_name.clone()));
            }
            if e.metrics.action_freq.iter().sum::<f64>() <= 0.0 {
                return Err(DatasetError::EmptyMetrics(e.display_name.clone()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.display_name.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&DatasetEntry> {
        self.entries.iter().find(|e| e.display_name == name)
    }

    /// The `k` entries most similar to `query`, excluding `exclude`.
    pub fn nearest(
        &self,
        query: &PlaystyleMetrics,
        k: usize,
        exclude: &BTreeSet<String>,
    ) -> Result<Vec<String>, SearchError> {
        Ok(self
            .nearest_scored(query, k, exclude)?
            .into_iter()
            .map(|(n, _)| n)
            .collect())
    }

    pub fn nearest_scored(
        &self,
        query: &PlaystyleMetrics,
        k: usize,
        exclude: &BTreeSet<String>,
    ) -> Result<Vec<(String, f64)>, SearchError> {
        rank(
            self.entries.iter().map(|e| (e.display_name.as_str(), &e.metrics)),
            query,
            k,
            exclude,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FileOut {
            schema_version: DATASET_SCHEMA_VERSION,
            provenance: &self.provenance,
            entries: &self.entries,
        })
        .expect("dataset serializes")
    }

    pub fn from_json(text: &str) -> Result<PolicyDataset, DatasetError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| DatasetError::CorruptFile(e.to_string()))?;
        let version = value
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| DatasetError::CorruptFile("missing schema_version".into()))?;
        if version != DATASET_SCHEMA_VERSION as u64 {
            return Err(DatasetError::SchemaVersionMismatch {
                found: version,
                expected: DATASET_SCHEMA_VERSION,
            });
        }
        // re-parse from text so floats take the exact round-trip path
        let file: FileIn = serde_json::from_str(text).map_err(|e| DatasetError::CorruptFile(e.to_string()))?;
        let ds = PolicyDataset {
            provenance: file.provenance,
            entries: file.entries,
        };
        ds.validate().map_err(|e| DatasetError::CorruptFile(e.to_string()))?;
        Ok(ds)
    }
}

pub fn save_dataset(dataset: &PolicyDataset, path: &Path) -> Result<(), DatasetError> {
    std::fs::write(path, dataset.to_json())?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<PolicyDataset, DatasetError> {
    PolicyDataset::from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Action;
    use crate::level::parse_level;
    use crate::playstyle::characterize;

    fn tiny() -> PolicyDataset {
        let text = format!("{}G\n{}\n.M{}\n{}\n", ".".repeat(29), ".".repeat(30), ".".repeat(28), "#".repeat(30));
        let level = parse_level("t", &text).unwrap();
        let entries = [Action::WalkRight, Action::RunRight, Action::JumpRight]
            .into_iter()
            .map(|a| {
                let policy = Policy::constant(a.name(), a);
                let metrics = characterize(&policy, std::slice::from_ref(&level), 2, 0).unwrap();
                DatasetEntry {
                    display_name: a.name().to_string(),
                    policy,
                    metrics,
                }
            })
            .collect();
        PolicyDataset::new(
            Provenance {
                level_ids: vec!["t".into()],
                runs_per_level: 2,
                seed: 0,
                explore_budget: 1,
            },
            entries,
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip() {
        let ds = tiny();
        let back = PolicyDataset::from_json(&ds.to_json()).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.to_json(), ds.to_json());
    }

    #[test]
    fn truncated_and_future_files() {
        let json = tiny().to_json();
        assert!(matches!(
            PolicyDataset::from_json(&json[..json.len() / 2]),
            Err(DatasetError::CorruptFile(_))
        ));
        let future = json.replacen("\"schema_version\":1", "\"schema_version\":7", 1);
        assert!(matches!(
            PolicyDataset::from_json(&future),
            Err(DatasetError::SchemaVersionMismatch { found: 7, .. })
        ));
    }

    #[test]
    fn self_retrieval_and_exclusion() {
        let ds = tiny();
        for e in &ds.entries {
            let top = ds.nearest(&e.metrics, 1, &BTreeSet::new()).unwrap();
            assert_eq!(top, vec![e.display_name.clone()]);
        }
        let all: BTreeSet<String> = ds.names().map(String::from).collect();
        assert_eq!(
            ds.nearest(&ds.entries[0].metrics, 1, &all),
            Err(SearchError::EmptyDatasetAfterExclusion)
        );
        assert_eq!(ds.nearest(&ds.entries[0].metrics, 5, &BTreeSet::new()).unwrap().len(), 3);
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut ds = tiny();
        let dup = ds.entries[0].clone();
        ds.entries.push(dup);
        assert!(matches!(
            PolicyDataset::new(ds.provenance.clone(), ds.entries),
            Err(DatasetError::DuplicateName(_))
        ));
    }
}
