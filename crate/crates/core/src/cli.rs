//! Command-line interface of the `h2kit` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bundle::DerivedBundle;
use crate::error::{Error, Result};
use crate::field::Boundary;
use crate::filter::{emulate_les, LesParams};
use crate::flamelet::{FlameletProfile, DEFAULT_FRACTAL_DIMENSION};
use crate::io::{self, cube, manifest::BaselineMode, DatasetManifest, FieldFile};
use crate::metrics::{self, ReportOptions};
use crate::pipeline::{self, FileRecord, OutDir, RunLog};
use crate::sample::{self, SnapshotRole};
use crate::synth::{self, SyntheticFlameSpec};
use crate::thermo::MixtureConstants;

#[derive(Debug, Parser)]
#[command(name = "h2kit", version, about = "Emulated-LES data pipeline for premixed hydrogen flames")]
pub struct Cli {
    /// Base seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "H2KIT_THREADS")]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an analytic flame snapshot.
    Synth(SynthArgs),
    /// Filter and downsample a snapshot into emulated LES fields.
    Filter(FilterArgs),
    /// Attach flamelet thicknesses to emulated LES fields.
    Derive(DeriveArgs),
    /// Cut training cubes out of derived fields.
    Sample(SampleArgs),
    /// Evaluate the tabulated flamelet closure.
    Baseline(BaselineArgs),
    /// Score predictions against filtered truth.
    Metrics(MetricsArgs),
    /// Run every stage over a manifest.
    All(AllArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BoundaryArg {
    #[default]
    Periodic,
    Clamp,
}

impl std::str::FromStr for BoundaryArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "periodic" => Ok(BoundaryArg::Periodic),
            "clamp" => Ok(BoundaryArg::Clamp),
            _ => Err(format!("unknown boundary `{s}` (expected periodic or clamp)")),
        }
    }
}

/// Parses exactly `N` comma-separated values.
fn parse_list<T: std::str::FromStr + Copy + Default, const N: usize>(s: &str) -> std::result::Result<[T; N], String>
where
    T::Err: std::fmt::Display,
{
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated values, got {}", parts.len()));
    }
    let mut out = [T::default(); N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|e| format!("`{p}`: {e}"))?;
    }
    Ok(out)
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Periodic => Boundary::Periodic,
            BoundaryArg::Clamp => Boundary::Clamp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "F")]
    F,
    #[value(name = "FC")]
    Fc,
}

impl From<ModeArg> for BaselineMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::F => BaselineMode::F,
            ModeArg::Fc => BaselineMode::FC,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Planar front (default).
    #[arg(long, conflicts_with = "wrinkled")]
    pub planar: bool,
    /// Sinusoidally wrinkled front.
    #[arg(long)]
    pub wrinkled: bool,
    /// Front width in cells.
    #[arg(long, default_value_t = 3.0)]
    pub a: f64,
    /// Grid points `nx,ny,nz`.
    #[arg(long, value_parser = parse_list::<usize, 3>, default_value = "64,32,32")]
    pub dims: [usize; 3],
    /// Grid spacing [m].
    #[arg(long, default_value_t = 2.0e-5)]
    pub dx: f64,
    #[arg(long, default_value_t = 1.0e4)]
    pub omega_peak: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho_u: f64,
    #[arg(long, default_value_t = 0.25)]
    pub rho_b: f64,
    /// Global equivalence ratio of the fresh gas.
    #[arg(long, default_value_t = 0.4, conflicts_with_all = ["xi", "xi_ramp"])]
    pub phi: f64,
    /// Mixture fraction level (overrides --phi).
    #[arg(long)]
    pub xi: Option<f64>,
    /// Linear mixture-fraction ramp across y: `lo,hi`.
    #[arg(long, value_parser = parse_list::<f64, 2>)]
    pub xi_ramp: Option<[f64; 2]>,
    /// Wrinkle amplitude in cells.
    #[arg(long, default_value_t = 0.0)]
    pub amplitude: f64,
    /// Wrinkle wavelengths `ly,lz` in cells (default: the y and z extents).
    #[arg(long, value_parser = parse_list::<f64, 2>)]
    pub lambda: Option<[f64; 2]>,
    #[arg(long, default_value_t = 0.5)]
    pub modulation: f64,
    /// Mean front position in cells.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Boundary modes `x,y,z`, each `periodic` or `clamp`.
    #[arg(long, value_parser = parse_list::<BoundaryArg, 3>, default_value = "clamp,periodic,periodic")]
    pub boundary: [BoundaryArg; 3],
    #[arg(long, default_value = "synth")]
    pub case_id: String,
    #[arg(long, default_value_t = 1)]
    pub time_index: u32,
    /// Output file stem.
    #[arg(long, default_value = "snapshot")]
    pub name: String,
    /// Also write the matching 1D flamelet, refined this many times.
    #[arg(long)]
    pub flamelet_refine: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Snapshot file (default: `<out>/snapshot.h2s`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Filter width in cells.
    #[arg(long)]
    pub sigma: f64,
    /// Downsampling factor.
    #[arg(long)]
    pub dsf: usize,
    #[arg(long, default_value = "les")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    /// Emulated LES file (default: `<out>/les.h2s`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Flamelet profiles: files or directories of `*.txt` files.
    #[arg(long, required = true, num_args = 1..)]
    pub profiles: Vec<PathBuf>,
    #[arg(long, default_value = "derived")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Derived files carrying flamelet thicknesses.
    #[arg(long, required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = sample::DEFAULT_CUBES_PER_SOLUTION)]
    pub cubes_per_solution: usize,
    #[arg(long, default_value_t = sample::DEFAULT_EDGE)]
    pub edge: usize,
    #[arg(long, default_value_t = sample::DEFAULT_VAL_FRACTION)]
    pub val_fraction: f64,
    #[arg(long, default_value = "cubes")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Derived file to evaluate the closure on.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, required = true, num_args = 1..)]
    pub profiles: Vec<PathBuf>,
    /// Filter width in cells (default: the one stored in the input).
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_enum, default_value = "FC")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_FRACTAL_DIMENSION)]
    pub df: f64,
    #[arg(long, default_value = "baseline")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Prediction files, paired in order with `--truth`.
    #[arg(long, required = true, num_args = 1..)]
    pub pred: Vec<PathBuf>,
    /// Derived truth files.
    #[arg(long, required = true, num_args = 1..)]
    pub truth: Vec<PathBuf>,
    /// Progress-variable files (default: `c_tilde` of each truth file).
    #[arg(long, num_args = 1..)]
    pub c_field: Vec<PathBuf>,
    /// Field read from prediction files (default: their only field).
    #[arg(long)]
    pub pred_field: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// Restrict NMAE to the flame region.
    #[arg(long, overrides_with = "no_mask")]
    pub mask: bool,
    #[arg(long, overrides_with = "mask")]
    pub no_mask: bool,
}

#[derive(Debug, Args)]
pub struct AllArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stage = cli.command.name();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            let msg = json!({ "stage": stage, "kind": e.kind(), "message": e.to_string() });
            eprintln!("error: {msg}");
            1
        }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Filter(_) => "filter",
            Command::Derive(_) => "derive",
            Command::Sample(_) => "sample",
            Command::Baseline(_) => "baseline",
            Command::Metrics(_) => "metrics",
            Command::All(_) => "all",
        }
    }
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    let mix = MixtureConstants::default();
    match cli.command {
        Command::Synth(a) => synth_cmd(a, &cli.out),
        Command::Filter(a) => filter_cmd(a, &cli.out, &mix),
        Command::Derive(a) => derive_cmd(a, &cli.out),
        Command::Sample(a) => sample_cmd(a, cli.seed.unwrap_or(0), &cli.out),
        Command::Baseline(a) => baseline_cmd(a, &cli.out),
        Command::Metrics(a) => metrics_cmd(a, &cli.out),
        Command::All(a) => all_cmd(a, cli.seed, &cli.out, &mix),
    }
}

fn label(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Inputs under the output directory are recorded relative to it.
fn hash_inputs(paths: &[PathBuf], out: &Path) -> Result<Vec<FileRecord>> {
    paths
        .iter()
        .map(|p| FileRecord::hash(p, label(p.strip_prefix(out).unwrap_or(p))))
        .collect()
}

fn expand_profiles(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "txt"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::Domain("no flamelet profiles found".into()));
    }
    Ok(out)
}

fn read_profiles(paths: &[PathBuf]) -> Result<Vec<FlameletProfile>> {
    paths.iter().map(|p| io::read_flamelet_profile(p)).collect()
}

fn synth_cmd(a: SynthArgs, out: &Path) -> Result<()> {
    let dims = a.dims;
    let mut spec = SyntheticFlameSpec::planar(a.a, dims);
    spec.case_id = a.case_id.clone();
    spec.time_index = a.time_index;
    spec.dx = a.dx;
    spec.omega_peak = a.omega_peak;
    spec.rho_u = a.rho_u;
    spec.rho_b = a.rho_b;
    spec.xi_level = a.xi.unwrap_or_else(|| spec.mix.xi_from_equivalence_ratio(a.phi));
    spec.xi_ramp = a.xi_ramp.map(|r| (r[0], r[1]));
    spec.amplitude = a.amplitude;
    if let Some(l) = a.lambda {
        spec.lambda = (l[0], l[1]);
    }
    spec.rate_modulation = a.modulation;
    spec.x0 = a.x0;
    spec.boundary = a.boundary.map(Boundary::from);
    let snapshot = if a.wrinkled {
        synth::make_wrinkled_flame(&spec)?
    } else {
        synth::make_planar_flame(&spec)?
    };
    let profile = a
        .flamelet_refine
        .map(|r| synth::make_flamelet_profile(&spec, r))
        .transpose()?;

    let mut dir = OutDir::create(out)?;
    dir.write_fields(&format!("{}.h2s", a.name), &FieldFile::from(&snapshot))?;
    if let Some(p) = &profile {
        dir.write(&format!("{}_flamelet.txt", a.name), io::profile::format_flamelet_profile(p).as_bytes())?;
    }
    let config = json!({
        "kind": if a.wrinkled { "wrinkled" } else { "planar" },
        "a": spec.a, "dims": dims, "dx": spec.dx, "omega_peak": spec.omega_peak,
        "rho_u": spec.rho_u, "rho_b": spec.rho_b, "xi_level": spec.xi_level,
        "xi_ramp": a.xi_ramp, "amplitude": spec.amplitude, "lambda": [spec.lambda.0, spec.lambda.1],
        "modulation": spec.rate_modulation, "x0": spec.front_center(),
        "boundary": a.boundary.iter().map(|b| format!("{b:?}").to_lowercase()).collect::<Vec<_>>(),
        "case_id": spec.case_id, "time_index": spec.time_index, "flamelet_refine": a.flamelet_refine,
    });
    RunLog::new("synth", None, config).write(&mut dir)
}

fn filter_cmd(a: FilterArgs, out: &Path, mix: &MixtureConstants) -> Result<()> {
    let params = LesParams::new(a.sigma, a.dsf)?;
    let input = a.input.unwrap_or_else(|| out.join("snapshot.h2s"));
    let snapshot = io::read_snapshot(&input)?;
    let derived = emulate_les(&snapshot, params, mix)?;
    let d = &derived.progress_diagnostics;
    eprintln!(
        "filter: {} -> {} grid, c_tilde clipped at {} points",
        snapshot.grid.shape_string(),
        derived.grid.shape_string(),
        d.clipped
    );
    let mut dir = OutDir::create(out)?;
    dir.write_fields(&format!("{}.h2s", a.name), &FieldFile::from(&derived))?;
    let mut log = RunLog::new("filter", None, json!({ "sigma": a.sigma, "dsf": a.dsf }));
    log.inputs = hash_inputs(&[input], out)?;
    log.write(&mut dir)
}

fn derive_cmd(a: DeriveArgs, out: &Path) -> Result<()> {
    let input = a.input.unwrap_or_else(|| out.join("les.h2s"));
    let profile_paths = expand_profiles(&a.profiles)?;
    let profiles = read_profiles(&profile_paths)?;
    let bundle = io::read_derived(&input)?;
    let library = pipeline::flamelet_library(&profiles, bundle.params.sigma, bundle.fine_dx)?;
    let bundle = pipeline::attach_thickness(bundle, &library)?;
    let t = bundle.thickness.unwrap();
    eprintln!(
        "derive: delta0 = {:.6e} m, delta1 = {:.6e} m, ratio = {:.4}, resolution index = {:.3}",
        t.delta0,
        t.delta1,
        t.ratio(),
        bundle.resolution_index().unwrap()
    );
    let mut dir = OutDir::create(out)?;
    dir.write_fields(&format!("{}.h2s", a.name), &FieldFile::from(&bundle))?;
    let mut log = RunLog::new("derive", None, json!({ "delta0": t.delta0, "delta1": t.delta1 }));
    let mut inputs = vec![input];
    inputs.extend(profile_paths);
    log.inputs = hash_inputs(&inputs, out)?;
    log.write(&mut dir)
}

/// Numeric case labels are kept; others are numbered in sorted order.
fn case_numbers(bundles: &[DerivedBundle]) -> Vec<u32> {
    let mut names: Vec<&str> = bundles.iter().map(|b| b.case_id.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    bundles
        .iter()
        .map(|b| {
            b.case_id
                .parse::<u32>()
                .unwrap_or_else(|_| names.iter().position(|n| *n == b.case_id).unwrap() as u32)
        })
        .collect()
}

fn sample_cmd(a: SampleArgs, seed: u64, out: &Path) -> Result<()> {
    if !(a.val_fraction > 0.0 && a.val_fraction < 1.0) {
        return Err(Error::Domain(format!("val fraction {} outside (0, 1)", a.val_fraction)));
    }
    let bundles = a.inputs.iter().map(|p| io::read_derived(p)).collect::<Result<Vec<_>>>()?;
    let cases = case_numbers(&bundles);
    let times: Vec<u32> = bundles.iter().map(|b| b.time_index).collect();
    let roles = sample::split_snapshots(&times);
    let mut cubes = Vec::new();
    let mut skipped = 0;
    for (si, b) in bundles.iter().enumerate() {
        if roles[si] == SnapshotRole::Test {
            skipped += 1;
            continue;
        }
        let mut rng = sample::rng_for(seed, si as u64);
        cubes.extend(sample::extract_cubes(b, cases[si], a.cubes_per_solution, a.edge, &mut rng)?);
    }
    if !cubes.is_empty() {
        let splits = sample::assign_train_val(cubes.len(), a.val_fraction, seed)?;
        for (c, s) in cubes.iter_mut().zip(splits) {
            c.meta.split = s;
        }
    }
    eprintln!("sample: {} cubes, {skipped} test snapshots held out", cubes.len());
    let mut dir = OutDir::create(out)?;
    dir.write(&format!("{}.cube1", a.name), &cube::encode_cubes(&cubes)?)?;
    let mut log = RunLog::new(
        "sample",
        Some(seed),
        json!({ "cubes_per_solution": a.cubes_per_solution, "edge": a.edge, "val_fraction": a.val_fraction }),
    );
    log.inputs = hash_inputs(&a.inputs, out)?;
    log.write(&mut dir)
}

fn baseline_cmd(a: BaselineArgs, out: &Path) -> Result<()> {
    if !(2.0..=3.0).contains(&a.df) {
        return Err(Error::Domain(format!("fractal dimension {} outside [2, 3]", a.df)));
    }
    let profile_paths = expand_profiles(&a.profiles)?;
    let profiles = read_profiles(&profile_paths)?;
    let bundle = io::read_derived(&a.input)?;
    let sigma = a.sigma.unwrap_or(bundle.params.sigma);
    let library = pipeline::flamelet_library(&profiles, sigma, bundle.fine_dx)?;
    let pred = pipeline::baseline_prediction(&bundle, &library, a.mode.into(), a.df)?;
    let mut dir = OutDir::create(out)?;
    let pred_name = format!("{}.h2s", a.name);
    dir.write_fields(&pred_name, &pipeline::prediction_file(&bundle, pred))?;
    let pairing = json!({ "pred": pred_name, "truth": label(&a.input) });
    dir.write(&format!("{}_pair.json", a.name), format!("{pairing:#}\n").as_bytes())?;
    let mode = match a.mode {
        ModeArg::F => "F",
        ModeArg::Fc => "FC",
    };
    let mut log = RunLog::new("baseline", None, json!({ "sigma": sigma, "mode": mode, "df": a.df }));
    let mut inputs = vec![a.input.clone()];
    inputs.extend(profile_paths);
    log.inputs = hash_inputs(&inputs, out)?;
    log.write(&mut dir)
}

fn pick_field(file: FieldFile, name: Option<&str>, path: &Path) -> Result<crate::field::ScalarField3D> {
    let mut fields = file.fields;
    match name {
        Some(n) => fields
            .remove(n)
            .ok_or_else(|| Error::Format(format!("{} has no field `{n}`", path.display()))),
        None if fields.len() == 1 => Ok(fields.into_values().next().unwrap()),
        None => Err(Error::Format(format!(
            "{} holds {} fields; choose one with --pred-field",
            path.display(),
            fields.len()
        ))),
    }
}

fn metrics_cmd(a: MetricsArgs, out: &Path) -> Result<()> {
    if a.pred.len() != a.truth.len() {
        return Err(Error::Domain(format!(
            "{} predictions but {} truth files",
            a.pred.len(),
            a.truth.len()
        )));
    }
    if !a.c_field.is_empty() && a.c_field.len() != a.truth.len() {
        return Err(Error::Domain("--c-field must be given once per truth file".into()));
    }
    if a.bins < 2 {
        return Err(Error::Domain("histograms need at least 2 bins".into()));
    }
    let mut items = Vec::with_capacity(a.pred.len());
    for (i, (pp, tp)) in a.pred.iter().zip(&a.truth).enumerate() {
        let truth = io::read_derived(tp)?;
        let pred = pick_field(io::read_field_file(pp)?, a.pred_field.as_deref(), pp)?;
        let c = match a.c_field.get(i) {
            Some(cp) => pick_field(io::read_field_file(cp)?, None, cp)?,
            None => truth.c_tilde()?.clone(),
        };
        pred.check_same_grid(truth.omega_bar()?)?;
        items.push((pipeline::group_key(&truth), pred, truth.omega_bar()?.clone(), c));
    }
    let pairs = pipeline::evaluation_pairs(items)?;
    let opts = ReportOptions {
        bins: a.bins,
        masked_nmae: a.mask && !a.no_mask,
    };
    let report = metrics::report(&pairs, opts)?;
    let mut dir = OutDir::create(out)?;
    pipeline::write_report(&report, "report", &mut dir)?;
    let mut log = RunLog::new("metrics", None, json!({ "bins": a.bins, "masked_nmae": opts.masked_nmae }));
    let mut inputs = a.pred.clone();
    inputs.extend(a.truth.iter().cloned());
    inputs.extend(a.c_field.iter().cloned());
    log.inputs = hash_inputs(&inputs, out)?;
    log.write(&mut dir)
}

fn all_cmd(a: AllArgs, seed: Option<u64>, out: &Path, mix: &MixtureConstants) -> Result<()> {
    let manifest = DatasetManifest::load(&a.manifest)?;
    let seed = seed.unwrap_or(manifest.sampling.seed);
    let base = a.manifest.parent().unwrap_or(Path::new(""));
    let rel = |p: &Path| label(p.strip_prefix(base).unwrap_or(p));

    let mut dir = OutDir::create(out)?;
    let summary = pipeline::run_all(&manifest, seed, mix, &mut dir)?;
    eprintln!(
        "all: {} test / {} trainval snapshots, {} train + {} val cubes",
        summary.test_snapshots, summary.trainval_snapshots, summary.train_cubes, summary.val_cubes
    );
    let mut config = serde_json::to_value(&manifest)?;
    config["snapshots"] = json!(manifest
        .snapshots
        .iter()
        .map(|s| json!({ "path": rel(&s.path), "case_id": s.case_id, "phi_g": s.phi_g, "time_index": s.time_index }))
        .collect::<Vec<_>>());
    config["flamelets"] = json!(manifest.flamelets.iter().map(|p| rel(p)).collect::<Vec<_>>());
    config["summary"] = serde_json::to_value(summary)?;
    let mut log = RunLog::new("all", Some(seed), config);
    log.inputs.push(FileRecord::hash(&a.manifest, "manifest")?);
    for s in &manifest.snapshots {
        log.inputs.push(FileRecord::hash(&s.path, rel(&s.path))?);
    }
    for f in &manifest.flamelets {
        log.inputs.push(FileRecord::hash(f, rel(f))?);
    }
    log.write(&mut dir)
}
