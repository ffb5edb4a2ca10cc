//! JSON dataset manifests.
//!
//! ```json
//! {
//!   "snapshots": [{"path": "snap_0001.h2s", "case_id": 0, "phi_g": 0.4, "time_index": 1}],
//!   "les_params": [{"sigma": 4.0, "dsf": 2}],
//!   "sampling": {"cubes_per_solution": 40, "edge": 16, "seed": 0, "val_fraction": 0.1},
//!   "flamelets": ["flamelet_phi040.txt"],
//!   "baseline": {"mode": "FC", "fractal_dimension": 2.5},
//!   "metrics": {"bins": 50, "masked_nmae": false}
//! }
//! ```
//!
//! Relative paths are resolved against the manifest's directory. Every
//! section except `snapshots` and `les_params` has defaults.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::read_bytes;
use crate::bundle::SnapshotBundle;
use crate::error::{Error, Result};
use crate::filter::LesParams;
use crate::flamelet::DEFAULT_FRACTAL_DIMENSION;
use crate::sample::{DEFAULT_CUBES_PER_SOLUTION, DEFAULT_EDGE, DEFAULT_VAL_FRACTION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotEntry {
    pub path: PathBuf,
    pub case_id: u32,
    pub phi_g: f64,
    pub time_index: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub cubes_per_solution: usize,
    pub edge: usize,
    pub seed: u64,
    pub val_fraction: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            cubes_per_solution: DEFAULT_CUBES_PER_SOLUTION,
            edge: DEFAULT_EDGE,
            seed: 0,
            val_fraction: DEFAULT_VAL_FRACTION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineMode {
    /// Tables selected by the global equivalence ratio.
    F,
    /// Tables interpolated in the local filtered equivalence ratio.
    FC,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub mode: BaselineMode,
    pub fractal_dimension: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            mode: BaselineMode::FC,
            fractal_dimension: DEFAULT_FRACTAL_DIMENSION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub bins: usize,
    pub masked_nmae: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            bins: 50,
            masked_nmae: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub snapshots: Vec<SnapshotEntry>,
    pub les_params: Vec<LesParams>,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub flamelets: Vec<PathBuf>,
    #[serde(default)]
    pub baseline: BaselineConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

impl DatasetManifest {
    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let mut m: Self = serde_json::from_str(text)?;
        for s in &mut m.snapshots {
            s.path = base.join(&s.path);
        }
        for f in &mut m.flamelets {
            *f = base.join(&*f);
        }
        m.check()?;
        Ok(m)
    }

    /// Parses and structurally checks a manifest; does not open referenced files.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = read_bytes(path)?;
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Manifest(format!("{} is not valid UTF-8", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_json(&text, base)
    }

    pub fn check(&self) -> Result<()> {
        if self.snapshots.is_empty() {
            return Err(Error::Manifest("no snapshots listed".into()));
        }
        if self.les_params.is_empty() {
            return Err(Error::Manifest("no LES parameters listed".into()));
        }
        for p in &self.les_params {
            LesParams::new(p.sigma, p.dsf).map_err(|e| Error::Manifest(e.to_string()))?;
        }
        let mut seen = BTreeSet::new();
        for s in &self.snapshots {
            if !seen.insert((s.case_id, s.time_index)) {
                return Err(Error::Manifest(format!(
                    "time index {} appears twice for case {}",
                    s.time_index, s.case_id
                )));
            }
            if !(s.phi_g > 0.0) {
                return Err(Error::Manifest(format!("{}: phi_g must be positive", s.path.display())));
            }
        }
        let sc = &self.sampling;
        if sc.cubes_per_solution == 0 || sc.edge == 0 {
            return Err(Error::Manifest("cubes_per_solution and edge must be positive".into()));
        }
        if !(sc.val_fraction > 0.0 && sc.val_fraction < 1.0) {
            return Err(Error::Manifest(format!("val_fraction {} outside (0, 1)", sc.val_fraction)));
        }
        let df = self.baseline.fractal_dimension;
        if !(2.0..=3.0).contains(&df) {
            return Err(Error::Manifest(format!("fractal dimension {df} outside [2, 3]")));
        }
        if self.metrics.bins < 2 {
            return Err(Error::Manifest("histograms need at least 2 bins".into()));
        }
        Ok(())
    }

    /// Checks that every referenced file exists and parses.
    pub fn check_files(&self) -> Result<()> {
        for s in &self.snapshots {
            check_entry(s, &super::read_snapshot(&s.path)?)?;
        }
        for f in &self.flamelets {
            super::read_flamelet_profile(f)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Checks that a snapshot file agrees with its manifest entry.
pub fn check_entry(entry: &SnapshotEntry, snap: &SnapshotBundle) -> Result<()> {
    if (snap.phi_g - entry.phi_g).abs() > 1e-9 * entry.phi_g || snap.time_index != entry.time_index {
        return Err(Error::Manifest(format!(
            "{}: file holds phi_g {} at t = {}, manifest says {} at t = {}",
            entry.path.display(),
            snap.phi_g,
            snap.time_index,
            entry.phi_g,
            entry.time_index
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "snapshots": [
            {"path": "a.h2s", "case_id": 0, "phi_g": 0.4, "time_index": 1},
            {"path": "/abs/b.h2s", "case_id": 0, "phi_g": 0.4, "time_index": 2}
        ],
        "les_params": [{"sigma": 4.0, "dsf": 2}]
    }"#;

    #[test]
    fn defaults_and_path_resolution() {
        let m = DatasetManifest::from_json(MINIMAL, Path::new("/data/run")).unwrap();
        assert_eq!(m.snapshots[0].path, PathBuf::from("/data/run/a.h2s"));
        assert_eq!(m.snapshots[1].path, PathBuf::from("/abs/b.h2s"));
        assert_eq!(m.sampling.cubes_per_solution, 40);
        assert_eq!(m.sampling.edge, 16);
        assert_eq!(m.sampling.val_fraction, 0.1);
        assert_eq!(m.baseline.mode, BaselineMode::FC);
        assert_eq!(m.baseline.fractal_dimension, 2.5);
        assert!(!m.metrics.masked_nmae);
    }

    #[test]
    fn duplicate_time_index_rejected() {
        let text = MINIMAL.replace("\"time_index\": 2", "\"time_index\": 1");
        assert!(matches!(DatasetManifest::from_json(&text, Path::new(".")), Err(Error::Manifest(_))));
        let other_case = MINIMAL.replace(
            "\"case_id\": 0, \"phi_g\": 0.4, \"time_index\": 2",
            "\"case_id\": 1, \"phi_g\": 0.4, \"time_index\": 1",
        );
        assert!(DatasetManifest::from_json(&other_case, Path::new(".")).is_ok());
    }

    #[test]
    fn bad_documents_rejected() {
        assert!(matches!(DatasetManifest::from_json("{", Path::new(".")), Err(Error::Json(_))));
        let unknown = MINIMAL.replacen("\"les_params\"", "\"bogus\": 1, \"les_params\"", 1);
        assert!(DatasetManifest::from_json(&unknown, Path::new(".")).is_err());
        let bad_sigma = MINIMAL.replace("\"sigma\": 4.0", "\"sigma\": -1.0");
        assert!(matches!(DatasetManifest::from_json(&bad_sigma, Path::new(".")), Err(Error::Manifest(_))));
    }

    #[test]
    fn missing_files_reported() {
        let m = DatasetManifest::from_json(MINIMAL, Path::new("/nonexistent")).unwrap();
        assert!(matches!(m.check_files(), Err(Error::Io { .. })));
    }
}
