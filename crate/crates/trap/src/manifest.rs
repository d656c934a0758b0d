use std::path::{Path, PathBuf};

use galerkin_core::lattice::ConstantEstimate;
use serde::{Deserialize, Serialize};

use crate::cli::Command;

/// Everything needed to repeat a run. `replay` feeds `command` back through
/// the same code path, so the outputs come out byte for byte the same.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub command: Command,
    pub seed: Option<u64>,
    pub constants_used: Vec<ConstantEstimate>,
    pub outputs: Vec<PathBuf>,
    pub version: String,
    /// Worker threads; results do not depend on it.
    pub threads: usize,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("{}: malformed manifest: {e}", path.display()))
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }
}

/// `<output>.manifest.json`
pub fn default_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}
