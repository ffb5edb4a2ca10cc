//! Stage glue shared by the command-line tool: flamelet libraries per filter
//! width, thickness attachment, baseline predictions, output bookkeeping and
//! the chained `all` run over a manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bundle::DerivedBundle;
use crate::error::{Error, Result};
use crate::field::ScalarField3D;
use crate::filter::{emulate_les, LesParams};
use crate::flamelet::{baseline_omega, build_table, FlameletLibrary, FlameletProfile, PhiSource, Wrinkling};
use crate::io::manifest::{self, BaselineMode, DatasetManifest};
use crate::io::{self, cube, FieldFile, Precision};
use crate::metrics::{self, EvalPair, GroupKey, Report, ReportOptions};
use crate::sample::{self, CubeSample, SnapshotRole};
use crate::thermo::MixtureConstants;

pub const BASELINE_FIELD: &str = "omega_baseline";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

impl FileRecord {
    /// Hashes `path`, recording it under `label`.
    pub fn hash(path: &Path, label: impl Into<String>) -> Result<Self> {
        Ok(Self {
            path: label.into(),
            sha256: sha256_hex(&std::fs::read(path).map_err(|e| Error::io(path, e))?),
        })
    }
}

/// Output directory that writes atomically and remembers what it wrote.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    records: BTreeMap<String, String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            records: BTreeMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        io::write_atomic(&path, bytes)?;
        self.records.insert(rel.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn write_fields(&mut self, rel: &str, file: &FieldFile) -> Result<PathBuf> {
        self.write(rel, &file.encode()?)
    }

    pub fn records(&self) -> Vec<FileRecord> {
        self.records
            .iter()
            .map(|(path, sha256)| FileRecord {
                path: path.clone(),
                sha256: sha256.clone(),
            })
            .collect()
    }
}

/// Reproducibility record written next to every stage's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunLog {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
}

impl RunLog {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn write(mut self, out: &mut OutDir) -> Result<()> {
        self.outputs = out.records();
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        out.write("run_log.json", text.as_bytes())?;
        Ok(())
    }
}

/// Filename-safe rendering of a case label.
pub fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "case".into()
    } else {
        s
    }
}

/// Builds one table per profile for a filter of `sigma` cells on a grid of
/// spacing `dx`; the width is converted to profile cells.
pub fn flamelet_library(profiles: &[FlameletProfile], sigma: f64, dx: f64) -> Result<FlameletLibrary> {
    let tables = profiles
        .iter()
        .map(|p| build_table(p, sigma * dx / p.dx()))
        .collect::<Result<Vec<_>>>()?;
    FlameletLibrary::new(tables)
}

/// Attaches the flamelet thicknesses at the bundle's global equivalence ratio.
pub fn attach_thickness(bundle: DerivedBundle, library: &FlameletLibrary) -> Result<DerivedBundle> {
    let t = library.thickness_at(bundle.phi_g)?;
    Ok(bundle.with_thickness(t))
}

pub fn baseline_prediction(
    bundle: &DerivedBundle,
    library: &FlameletLibrary,
    mode: BaselineMode,
    fractal_dimension: f64,
) -> Result<ScalarField3D> {
    let c = bundle.c_tilde()?;
    let phi = match mode {
        BaselineMode::F => PhiSource::Global(bundle.phi_g),
        BaselineMode::FC => PhiSource::Local(bundle.phi_tilde()?),
    };
    baseline_omega(c, phi, library, Wrinkling::Fractal { fractal_dimension })
}

pub fn prediction_file(bundle: &DerivedBundle, prediction: ScalarField3D) -> FieldFile {
    let mut f = FieldFile::single(BASELINE_FIELD, prediction, Precision::F64);
    f.case_id = bundle.case_id.clone();
    f.time_index = bundle.time_index;
    f.phi_g = bundle.phi_g;
    f.attrs.insert("les.sigma".into(), bundle.params.sigma);
    f.attrs.insert("les.dsf".into(), bundle.params.dsf as f64);
    f
}

pub fn group_key(bundle: &DerivedBundle) -> GroupKey {
    GroupKey {
        phi_g: bundle.phi_g,
        sigma: bundle.params.sigma,
        dsf: bundle.params.dsf,
    }
}

/// Pairs predictions with truths, normalizing by the largest truth value.
pub fn evaluation_pairs(items: Vec<(GroupKey, ScalarField3D, ScalarField3D, ScalarField3D)>) -> Result<Vec<(GroupKey, EvalPair)>> {
    let norm = items.iter().map(|(_, _, t, _)| t.max()).fold(f64::NEG_INFINITY, f64::max);
    items
        .into_iter()
        .map(|(key, pred, truth, c)| Ok((key, EvalPair::new(pred, truth, c, norm)?)))
        .collect()
}

pub fn write_report(report: &Report, dir: &str, out: &mut OutDir) -> Result<()> {
    out.write(&format!("{dir}/nmae.csv"), report.nmae_csv().as_bytes())?;
    for (key, h) in &report.histograms {
        out.write(&format!("{dir}/{}", Report::histogram_file_name(key)), h.to_csv().as_bytes())?;
    }
    Ok(())
}

/// Counts produced by [`run_all`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AllSummary {
    pub test_snapshots: usize,
    pub trainval_snapshots: usize,
    pub train_cubes: usize,
    pub val_cubes: usize,
}

fn les_tag(p: &LesParams) -> String {
    format!("s{}_d{}", p.sigma, p.dsf)
}

/// Filters every manifest snapshot at every LES resolution, scores the
/// flamelet baseline on the test snapshots and writes the train/val cube
/// corpus of the others.
pub fn run_all(manifest: &DatasetManifest, seed: u64, mix: &MixtureConstants, out: &mut OutDir) -> Result<AllSummary> {
    manifest.check()?;
    if manifest.flamelets.is_empty() {
        return Err(Error::Manifest("at least one flamelet profile is required".into()));
    }
    let profiles = manifest
        .flamelets
        .iter()
        .map(|p| io::read_flamelet_profile(p))
        .collect::<Result<Vec<_>>>()?;
    let snapshots = manifest
        .snapshots
        .iter()
        .map(|e| {
            let snap = io::read_snapshot(&e.path)?;
            manifest::check_entry(e, &snap)?;
            Ok(snap)
        })
        .collect::<Result<Vec<_>>>()?;
    let times: Vec<u32> = manifest.snapshots.iter().map(|e| e.time_index).collect();
    let roles = sample::split_snapshots(&times);
    let sc = &manifest.sampling;

    let mut libraries: BTreeMap<(u64, u64), FlameletLibrary> = BTreeMap::new();
    let mut evaluated = Vec::new();
    let mut cubes: Vec<CubeSample> = Vec::new();
    for (pi, params) in manifest.les_params.iter().enumerate() {
        let params = LesParams::new(params.sigma, params.dsf)?;
        for (si, (entry, snap)) in manifest.snapshots.iter().zip(&snapshots).enumerate() {
            let dx = snap.grid.dx();
            let key = (params.sigma.to_bits(), dx.to_bits());
            let library = match libraries.entry(key) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => e.insert(flamelet_library(&profiles, params.sigma, dx)?),
            };
            let library = &*library;
            let derived = attach_thickness(emulate_les(snap, params, mix)?, library)?;
            match roles[si] {
                SnapshotRole::Test => {
                    let pred = baseline_prediction(&derived, library, manifest.baseline.mode, manifest.baseline.fractal_dimension)?;
                    let stem = format!("c{}_t{}_{}", entry.case_id, entry.time_index, les_tag(&params));
                    out.write_fields(&format!("derived/{stem}.h2s"), &FieldFile::from(&derived))?;
                    out.write_fields(&format!("baseline/{stem}.h2s"), &prediction_file(&derived, pred.clone()))?;
                    evaluated.push((
                        group_key(&derived),
                        pred,
                        derived.omega_bar()?.clone(),
                        derived.c_tilde()?.clone(),
                    ));
                }
                SnapshotRole::TrainVal => {
                    let stream = (pi * snapshots.len() + si) as u64;
                    let mut rng = sample::rng_for(seed, stream);
                    cubes.extend(sample::extract_cubes(&derived, entry.case_id, sc.cubes_per_solution, sc.edge, &mut rng)?);
                }
            }
        }
    }

    let splits = if cubes.is_empty() {
        Vec::new()
    } else {
        sample::assign_train_val(cubes.len(), sc.val_fraction, seed)?
    };
    for (c, s) in cubes.iter_mut().zip(&splits) {
        c.meta.split = *s;
    }
    out.write("cubes.cube1", &cube::encode_cubes(&cubes)?)?;

    let n_test = roles.iter().filter(|r| **r == SnapshotRole::Test).count();
    if !evaluated.is_empty() {
        let pairs = evaluation_pairs(evaluated)?;
        let opts = ReportOptions {
            bins: manifest.metrics.bins,
            masked_nmae: manifest.metrics.masked_nmae,
        };
        write_report(&metrics::report(&pairs, opts)?, "report", out)?;
    }
    let val = splits.iter().filter(|s| **s == sample::Split::Val).count();
    Ok(AllSummary {
        test_snapshots: n_test,
        trainval_snapshots: roles.len() - n_test,
        train_cubes: cubes.len() - val,
        val_cubes: val,
    })
}
