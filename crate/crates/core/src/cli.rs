//! The `regunc` command line.
//!
//! Every option can come from a flat config file (`--config`) or a flag; flags
//! win. Flag `--kernel-a` maps to config key `kernel_a`, the others map to keys
//! of the same name. Nothing is written until a command has computed all of
//! its outputs, so failures never leave a partial output directory.
//!
//! Exit codes: 0 success, 2 usage/parse/invalid input, 3 I/O, 4 numerical
//! failure (singular Gram matrix, degenerate rank correlation, protocol
//! violation). Failures print one `error kind=... code=... msg=...` line to
//! stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::assoc::{patchwise_experiment, pointwise_experiment, AssociationReport, Metric, PatchConfig, DEFAULT_BINS};
use crate::error::{Error, Result};
use crate::field::{Grid, LandmarkSet, Volume3D};
use crate::gp::{GpModel, KernelParams, DEFAULT_JITTER};
use crate::io::config::{self, Config};
use crate::io::landmark_csv::{read_landmarks, write_landmarks};
use crate::io::render::{render_uncertainty_slice, Axis};
use crate::io::report::ReportDocument;
use crate::io::volume_file::{encode_volume, read_volume};
use crate::synth::{make_phantom, sample_landmarks, warp_volume, DeformationSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Patch radii and metrics covered by `sweep`.
pub const SWEEP_KS: [usize; 2] = [3, 5];
pub const SWEEP_METRICS: [Metric; 2] = [Metric::Ssd, Metric::Hi];

#[derive(Debug, Parser)]
#[command(name = "regunc", version, about = "GP registration uncertainty versus registration error")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Generate a phantom, its warped counterpart and train/test landmark CSVs.
    Synth,
    /// Point-wise uncertainty/error correlation on held-out landmarks.
    Pointwise,
    /// Patch-wise uncertainty/dissimilarity correlation.
    Patchwise,
    /// Dense displacement and uncertainty volumes plus rendered slices.
    Field,
    /// Point-wise run plus patch-wise runs for k in {3, 5} and metrics {ssd, hi}.
    Sweep,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Options {
    /// Flat key = value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Kernel parameter a (mm^2); defaults to the median squared landmark distance.
    #[arg(long = "kernel-a", global = true)]
    pub kernel_a: Option<f64>,
    #[arg(long, global = true)]
    pub jitter: Option<f64>,
    /// Patch padding radius in voxels.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Patch dissimilarity: ssd or hi.
    #[arg(long, global = true)]
    pub metric: Option<String>,
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    /// Dense-field sampling stride in voxels.
    #[arg(long, global = true)]
    pub stride: Option<usize>,
    /// Fixed volume (UEV1).
    #[arg(long, global = true)]
    pub volume: Option<PathBuf>,
    /// Training landmark CSV.
    #[arg(long, global = true)]
    pub train: Option<PathBuf>,
    /// Test landmark CSV.
    #[arg(long, global = true)]
    pub test: Option<PathBuf>,
}

impl Options {
    /// Config file contents with flags applied on top.
    pub fn resolve(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let path = |p: &PathBuf| p.display().to_string();
        let flags: [(&str, Option<String>); 11] = [
            ("out", self.out.as_ref().map(path)),
            ("seed", self.seed.map(|v| v.to_string())),
            ("kernel_a", self.kernel_a.map(|v| v.to_string())),
            ("jitter", self.jitter.map(|v| v.to_string())),
            ("k", self.k.map(|v| v.to_string())),
            ("metric", self.metric.clone()),
            ("bins", self.bins.map(|v| v.to_string())),
            ("stride", self.stride.map(|v| v.to_string())),
            ("volume", self.volume.as_ref().map(path)),
            ("train", self.train.as_ref().map(path)),
            ("test", self.test.as_ref().map(path)),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v);
            }
        }
        Ok(cfg)
    }
}

/// Files produced by a command, written only once everything succeeded.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    /// Set when a report carries a degenerate rho.
    degenerate: Vec<String>,
}

impl Outputs {
    fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    fn add_report(&mut self, name: &str, report: &AssociationReport) {
        let doc = ReportDocument::from(report);
        match doc.rho() {
            Some(r) => println!("{name}: m={} dropped={} rho_s={r}", doc.m, doc.dropped),
            None => {
                println!("{name}: m={} dropped={} rho_s=degenerate", doc.m, doc.dropped);
                self.degenerate.push(name.to_string());
            }
        }
        self.add(name, doc.to_json());
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

/// Entry point used by the binary: parses `args`, runs, returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error kind=usage code={EXIT_USAGE} msg={first}");
            return EXIT_USAGE;
        }
    };
    match run(&cli) {
        Ok(outputs) if outputs.degenerate.is_empty() => EXIT_OK,
        Ok(outputs) => {
            let err = Error::Degenerate(format!(
                "rank correlation undefined in {}",
                outputs.degenerate.join(", ")
            ));
            report_error(&err)
        }
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &Error) -> i32 {
    let (kind, code) = exit_code(e);
    let msg = e.to_string().replace('\n', " ");
    eprintln!("error kind={kind} code={code} msg={msg}");
    code
}

pub fn exit_code(e: &Error) -> (&'static str, i32) {
    match e {
        Error::Io(_) => ("io", EXIT_IO),
        e if e.is_numerical() => ("numerical", EXIT_NUMERICAL),
        Error::Parse(_) => ("parse", EXIT_USAGE),
        _ => ("input", EXIT_USAGE),
    }
}

/// Runs a parsed command and writes its outputs. Reports with a degenerate
/// rho are still written; they are listed in the returned [`Outputs`].
pub fn run(cli: &Cli) -> Result<Outputs> {
    let cfg = cli.opts.resolve()?;
    let out_dir = PathBuf::from(cfg.get_str("out").unwrap_or("regunc-out"));
    let outputs = match cli.command {
        Command::Synth => {
            let mut o = Outputs::default();
            synthetic_case(&cfg, &mut o)?;
            o
        }
        Command::Pointwise => cmd_pointwise(&cfg)?,
        Command::Patchwise => cmd_patchwise(&cfg)?,
        Command::Field => cmd_field(&cfg)?,
        Command::Sweep => cmd_sweep(&cfg)?,
    };
    outputs.write_all(&out_dir)?;
    Ok(outputs)
}

/// A fixed volume with held-out landmark sets.
pub struct Case {
    pub volume: Option<Volume3D>,
    pub train: LandmarkSet,
    pub test: Option<LandmarkSet>,
}

fn seed(cfg: &Config) -> Result<u64> {
    cfg.get_or("seed", 0u64)
}

/// Builds the synthetic case described by `cfg` and queues its files.
///
/// Sub-seeds: phantom `seed`, random bumps `seed + 1`, landmarks `seed + 2`.
pub fn synthetic_case(cfg: &Config, out: &mut Outputs) -> Result<Case> {
    let seed = seed(cfg)?;
    let phantom = config::get_phantom(cfg, seed)?;
    let fixed = make_phantom(&phantom)?;
    let grid = *fixed.grid();
    let deformation = match config::get_deformation(cfg)? {
        Some(d) => d,
        None => DeformationSpec::random(
            seed.wrapping_add(1),
            &grid,
            cfg.get_or("bumps", 4usize)?,
            cfg.get_or("bump_amplitude", 3.0f64)?,
        )?,
    };
    let warped = warp_volume(&fixed, &deformation);
    let n_train = cfg.get_or("n_train", 100usize)?;
    let n_test = cfg.get_or("n_test", 100usize)?;
    let margin = cfg.get_or("margin", 12usize)?;
    let (train, test) = sample_landmarks(&deformation, &grid, n_train, n_test, seed.wrapping_add(2), margin)?;

    let mut resolved = Config::default();
    config::put_phantom(&mut resolved, &phantom);
    config::put_deformation(&mut resolved, &deformation);
    resolved.set("n_train", n_train);
    resolved.set("n_test", n_test);
    resolved.set("margin", margin);
    resolved.set("warp_out_of_bounds_fraction", warped.out_of_bounds_fraction);

    out.add("fixed.uev", encode_volume(&fixed));
    out.add("moving.uev", encode_volume(&warped.volume));
    out.add("train.csv", write_landmarks(&train));
    out.add("test.csv", write_landmarks(&test));
    out.add("synth.cfg", resolved.to_text());
    Ok(Case { volume: Some(fixed), train, test: Some(test) })
}

fn load_volume(cfg: &Config) -> Result<Option<Volume3D>> {
    cfg.get_str("volume").map(read_volume).transpose()
}

fn require<'a>(cfg: &'a Config, key: &str) -> Result<&'a str> {
    cfg.get_str(key)
        .ok_or_else(|| Error::InvalidInput(format!("missing --{key} (or '{key}' in the config file)")))
}

/// Reads the case named in `cfg`. `test` is loaded only when `need_test`.
pub fn load_case(cfg: &Config, need_volume: bool, need_test: bool) -> Result<Case> {
    if need_volume {
        require(cfg, "volume")?;
    }
    let train_path = require(cfg, "train")?;
    let test_path = if need_test { Some(require(cfg, "test")?) } else { None };
    let volume = load_volume(cfg)?;
    let grid = volume.as_ref().map(|v| *v.grid());
    let train = read_landmarks(train_path, grid.as_ref())?;
    let test = test_path.map(|p| read_landmarks(p, grid.as_ref())).transpose()?;
    Ok(Case { volume, train, test })
}

pub fn kernel_params(cfg: &Config, train: &LandmarkSet) -> Result<KernelParams> {
    let jitter = cfg.get_or("jitter", DEFAULT_JITTER)?;
    match cfg.get::<f64>("kernel_a")? {
        Some(a) => KernelParams::new(a, jitter),
        None => KernelParams::median_heuristic(&train.positions(), jitter),
    }
}

fn patch_config(cfg: &Config, k: usize, metric: Metric) -> Result<PatchConfig> {
    PatchConfig::new(k, metric, cfg.get_or("bins", DEFAULT_BINS)?)
}

fn has_inputs(cfg: &Config) -> bool {
    ["volume", "train", "test"].iter().any(|k| cfg.get_str(k).is_some())
}

fn cmd_pointwise(cfg: &Config) -> Result<Outputs> {
    let case = load_case(cfg, false, true)?;
    let params = kernel_params(cfg, &case.train)?;
    let report = pointwise_experiment(&case.train, case.test.as_ref().expect("loaded"), params)?;
    let mut o = Outputs::default();
    o.add_report("pointwise.json", &report);
    Ok(o)
}

fn cmd_patchwise(cfg: &Config) -> Result<Outputs> {
    let case = load_case(cfg, true, true)?;
    let params = kernel_params(cfg, &case.train)?;
    let metric: Metric = cfg.get_str("metric").unwrap_or("ssd").parse()?;
    let patch = patch_config(cfg, cfg.get_or("k", 3usize)?, metric)?;
    let report = patchwise_experiment(
        &case.train,
        case.test.as_ref().expect("loaded"),
        case.volume.as_ref().expect("loaded"),
        params,
        patch,
    )?;
    let mut o = Outputs::default();
    o.add_report(&format!("patchwise_k{}_{}.json", patch.k, metric), &report);
    Ok(o)
}

fn cmd_field(cfg: &Config) -> Result<Outputs> {
    let case = load_case(cfg, false, false)?;
    let grid = match &case.volume {
        Some(v) => *v.grid(),
        None => {
            let dims = cfg.get_triple("dims")?.unwrap_or([64; 3]);
            let spacing = cfg.get_triple("spacing")?.unwrap_or([1.0; 3]);
            Grid::new(dims, spacing, [0.0; 3])?
        }
    };
    let params = kernel_params(cfg, &case.train)?;
    let model = GpModel::fit(&case.train, params)?;
    let field = model.dense_field_on(&grid, cfg.get_or("stride", 1usize)?)?;

    let mut o = Outputs::default();
    o.add("field_u.uev", encode_volume(&field.uncertainty_volume()));
    for (axis, name) in ["dx", "dy", "dz"].iter().enumerate() {
        o.add(format!("field_{name}.uev"), encode_volume(&field.component_volume(axis)));
    }
    let (lo, hi) = field
        .uncertainty()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| (lo.min(u), hi.max(u)));
    let hi = if hi > lo { hi } else { lo + 1.0 };
    for axis in [Axis::X, Axis::Y, Axis::Z] {
        let mid = field.grid().dims[axis.index()] / 2;
        o.add(
            format!("u_slice_{}.ppm", axis.as_str()),
            render_uncertainty_slice(&field, axis, mid, lo, hi)?,
        );
    }
    println!("field: {} points, u in [{lo}, {hi}]", field.len());
    Ok(o)
}

fn cmd_sweep(cfg: &Config) -> Result<Outputs> {
    let mut o = Outputs::default();
    let case = if has_inputs(cfg) {
        load_case(cfg, true, true)?
    } else {
        synthetic_case(cfg, &mut o)?
    };
    let (volume, test) = (case.volume.as_ref().expect("loaded"), case.test.as_ref().expect("loaded"));
    let params = kernel_params(cfg, &case.train)?;
    o.add_report("pointwise.json", &pointwise_experiment(&case.train, test, params)?);
    for k in SWEEP_KS {
        for metric in SWEEP_METRICS {
            let patch = patch_config(cfg, k, metric)?;
            let report = patchwise_experiment(&case.train, test, volume, params, patch)?;
            o.add_report(&format!("patchwise_k{k}_{metric}.json"), &report);
        }
    }
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "seed = 1\nmetric = hi\nbins = 16\n").unwrap();
        let cli = Cli::try_parse_from([
            "regunc",
            "patchwise",
            "--config",
            path.to_str().unwrap(),
            "--metric",
            "ssd",
            "--kernel-a",
            "12.5",
        ])
        .unwrap();
        let cfg = cli.opts.resolve().unwrap();
        assert_eq!(cfg.get_str("metric"), Some("ssd"));
        assert_eq!(cfg.get::<usize>("bins").unwrap(), Some(16));
        assert_eq!(cfg.get::<f64>("kernel_a").unwrap(), Some(12.5));
        assert_eq!(cli.command, Command::Patchwise);
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))).1, EXIT_IO);
        assert_eq!(exit_code(&Error::Degenerate("x".into())).1, EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::SingularGram { index: 0, pivot: 0.0 }).1, EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Parse("x".into())).1, EXIT_USAGE);
    }
}
