use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use mariomix_core::{Assignment, Level, PolicyDataset, Resolution};

/// How long a demo socket may sit without input before it is closed.
pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServiceConfig {
    pub idle_timeout: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            idle_timeout: DEFAULT_IDLE_TIMEOUT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct ClipKey {
    pub level_id: String,
    pub resolution: Resolution,
    pub segment: usize,
    pub policy: String,
    pub seed: u64,
}

/// Shared, read-mostly state. Levels and dataset never change after start;
/// the clip cache and saved assignments sit behind their own locks.
#[derive(Clone)]
pub struct AppState {
    pub(crate) levels: Arc<Vec<Level>>,
    pub(crate) dataset: Option<Arc<PolicyDataset>>,
    pub(crate) config: ServiceConfig,
    pub(crate) clips: Arc<Mutex<HashMap<ClipKey, Arc<str>>>>,
    pub(crate) assignments: Arc<Mutex<HashMap<String, Assignment>>>,
}

impl AppState {
    pub fn new(levels: Vec<Level>, dataset: Option<PolicyDataset>, config: ServiceConfig) -> AppState {
        AppState {
            levels: Arc::new(levels),
            dataset: dataset.map(Arc::new),
            config,
            clips: Arc::default(),
            assignments: Arc::default(),
        }
    }

    pub(crate) fn level(&self, id: &str) -> Option<&Level> {
        self.levels.iter().find(|l| l.id == id)
    }
}
