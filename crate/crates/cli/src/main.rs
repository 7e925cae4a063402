//! `conelab`: file-based pipelines over the limited-angle tomography
//! laboratory. Angles are degrees at this boundary and radians inside;
//! every stochastic subcommand takes a seed and is byte-deterministic for a
//! fixed configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use conelab_core::diagnostics::{
    check_stability, disk_sweep, disk_sweep_continuum, eps_threshold, g_eps, membership, n_beta,
    Curve, NormKind, SinoGeometry, StabilityFactor,
};
use conelab_core::grid::{apply_multiplier, cone_mask, fft2, folded_angle};
use conelab_core::io;
use conelab_core::ntk::{
    c_zeta_check, mc_corr_check, random_periodic_dataset, rho_transform, run_cone_recovery,
    ConeRecoveryConfig,
};
use conelab_core::phantoms::{
    add_noise, disk_scene, generate_dataset, measurement_sinogram, render, squares_scene, Dataset,
    Scene,
};
use conelab_core::radon::{fbp, radon_forward, AngleSet};
use conelab_core::util::child_seed;
use conelab_core::Image64;

const EXIT_INVALID: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "conelab",
    version,
    about = "Limited-angle tomography stability laboratory",
    after_help = "Ranges are written start..end..step (inclusive), e.g. --beta-deg 60..90..5.\n\
                  The CONELAB_THREADS environment variable caps internal parallelism."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate phantom images (plus a recipe/manifest for later stages)
    Phantom(PhantomArgs),
    /// Compute sinograms from an image raster or a scene recipe/manifest
    Sino(SinoArgs),
    /// Filtered backprojection of a sinogram file
    Fbp(FbpArgs),
    /// Apply a frequency-cone multiplier to an image
    Cone(ConeArgs),
    /// Dataset stability diagnostics
    #[command(subcommand)]
    Diag(DiagCommand),
    /// Frozen-kernel shallow-network experiments
    #[command(subcommand)]
    Ntk(NtkCommand),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PhantomKind {
    Disk,
    Ellipses,
    Squares,
}

#[derive(Args)]
struct PhantomArgs {
    #[arg(long, value_enum)]
    kind: PhantomKind,
    /// Disk radius (kind = disk)
    #[arg(long, default_value_t = 0.5)]
    a: f64,
    /// Image side in pixels
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Number of images (kind = ellipses) or squares in the scene
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    max_ellipses: usize,
    #[arg(long, default_value_t = 4)]
    supersample: usize,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Recipe for rebuilding a single scene deterministically.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SceneRecipe {
    Disk { a: f64, n: usize },
    Squares { seed: u64, count: usize, n: usize },
}

impl SceneRecipe {
    fn scene(&self) -> Result<Scene<f64>> {
        Ok(match self {
            SceneRecipe::Disk { a, .. } => disk_scene(*a)?,
            SceneRecipe::Squares { seed, count, .. } => squares_scene(*seed, *count)?,
        })
    }

    fn n(&self) -> usize {
        match self {
            SceneRecipe::Disk { n, .. } | SceneRecipe::Squares { n, .. } => *n,
        }
    }
}

#[derive(Args)]
struct SinoArgs {
    /// Image raster (.clf1), scene recipe (.json), or dataset directory
    #[arg(long)]
    input: PathBuf,
    /// Visible half-angle in degrees
    #[arg(long, conflicts_with = "missing_deg")]
    delta_deg: Option<f64>,
    /// Missing angle in degrees (delta = 90 - missing/2)
    #[arg(long)]
    missing_deg: Option<f64>,
    #[arg(long)]
    ntheta: Option<usize>,
    #[arg(long)]
    np: Option<usize>,
    /// Offset oversampling for the analytic measurement protocol
    #[arg(long, default_value_t = 4)]
    oversample: usize,
    /// Relative additive Gaussian noise level
    #[arg(long, default_value_t = 0.0)]
    noise_rel: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FbpArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output image side; defaults to the inverse of n_p = floor(n sqrt2) + 1
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// JSON report of the reconstruction's cone-energy split
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ConeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    beta_deg: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormArg {
    Hom,
    Inhom,
    Both,
}

impl NormArg {
    fn kinds(self) -> Vec<NormKind> {
        match self {
            NormArg::Hom => vec![NormKind::Homogeneous],
            NormArg::Inhom => vec![NormKind::Inhomogeneous],
            NormArg::Both => vec![NormKind::Inhomogeneous, NormKind::Homogeneous],
        }
    }
}

#[derive(Subcommand)]
enum DiagCommand {
    /// Critical constant N_beta over a dataset
    Nbeta {
        #[arg(long)]
        dataset: PathBuf,
        /// Range of visible angles in degrees, e.g. 60..90..5
        #[arg(long)]
        beta_deg: String,
        #[arg(long, value_enum, default_value_t = NormArg::Both)]
        norm: NormArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stability curve g(eps) over a dataset
    Geps {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        delta_deg: f64,
        /// Range of cone enlargements in degrees
        #[arg(long)]
        eps_deg: String,
        #[arg(long, value_enum, default_value_t = NormArg::Both)]
        norm: NormArg,
        #[arg(long)]
        np: Option<usize>,
        #[arg(long)]
        ntheta: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-image stability-inequality reports (JSON lines)
    Stability {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        delta_deg: f64,
        #[arg(long, default_value_t = 0.0)]
        eps_deg: f64,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), default_value_t = 1)]
        factor: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// Largest admissible cone enlargement for a dataset constant N
    EpsThreshold {
        #[arg(long)]
        n_cap: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disk-radius sweep of the membership ratio
    DiskSweep {
        /// Range of radii, e.g. 0.1..0.9..0.1
        #[arg(long)]
        radii: String,
        #[arg(long)]
        delta_deg: f64,
        #[arg(long, default_value_t = 2.0)]
        eps_deg: f64,
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, value_enum, default_value_t = NormArg::Both)]
        norm: NormArg,
        /// Optional membership constant; emits per-radius verdicts
        #[arg(long)]
        n_cap: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum NtkCommand {
    /// Train the linear and nonlinear arms under a shared seed
    Train {
        #[arg(long, default_value_t = 11)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        m: usize,
        #[arg(long, default_value_t = 16)]
        band: usize,
        #[arg(long, default_value_t = 4)]
        data_band: usize,
        #[arg(long, default_value_t = 512)]
        units: usize,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long, default_value_t = 50.0)]
        delta_deg: f64,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long, default_value_t = 0.95)]
        lr_frac: f64,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analytic-vs-Monte-Carlo table for the correlation transform
    RhoCheck {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Correlations, e.g. -0.9..0.9..0.45 or a single value
        #[arg(long, default_value = "-0.9..0.9..0.45")]
        rhos: String,
        /// Activation slopes (comma-separated)
        #[arg(long, default_value = "0,0.01,0.2")]
        alphas: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimum eigenvalues of the transformed-correlation mode matrices
    Czeta {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        band: usize,
        #[arg(long, default_value_t = 4)]
        data_band: usize,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long, default_value_t = 50.0)]
        delta_deg: f64,
        #[arg(long, default_value_t = 4)]
        count: usize,
        /// Modes to report, e.g. "0,0;1,0;2,1"
        #[arg(long, default_value = "0,0;1,0;0,1;2,1;3,0")]
        zetas: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("CONELAB_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

// Numeric failures exit 3; anything else (bad input, malformed files) is 2.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<conelab_core::Error>() {
            match core {
                conelab_core::Error::Divergence { .. }
                | conelab_core::Error::StepSize { .. }
                | conelab_core::Error::DegenerateDenominator { .. } => return EXIT_NUMERIC,
                _ => return EXIT_INVALID,
            }
        }
    }
    EXIT_INVALID
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Phantom(args) => cmd_phantom(args),
        Command::Sino(args) => cmd_sino(args),
        Command::Fbp(args) => cmd_fbp(args),
        Command::Cone(args) => cmd_cone(args),
        Command::Diag(cmd) => cmd_diag(cmd),
        Command::Ntk(cmd) => cmd_ntk(cmd),
    }
}

fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split("..").collect();
    match parts.len() {
        1 => Ok(vec![parts[0]
            .parse()
            .with_context(|| format!("bad number {text:?}"))?]),
        3 => {
            let start: f64 = parts[0].parse().context("range start")?;
            let end: f64 = parts[1].parse().context("range end")?;
            let step: f64 = parts[2].parse().context("range step")?;
            if step <= 0.0 || end < start {
                bail!("range {text:?} must have positive step and end >= start");
            }
            let count = ((end - start) / step).round() as usize;
            Ok((0..=count)
                .map(|i| start + i as f64 * step)
                .filter(|v| *v <= end + 1e-9 * step)
                .collect())
        }
        _ => bail!("range {text:?} is not start..end..step or a single number"),
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?}")))
        .collect()
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn resolve_angles(
    delta_deg: Option<f64>,
    missing_deg: Option<f64>,
    ntheta: Option<usize>,
) -> Result<AngleSet<f64>> {
    let delta_deg = match (delta_deg, missing_deg) {
        (Some(d), None) => d,
        (None, Some(m)) => 90.0 - m / 2.0,
        (None, None) => bail!("one of --delta-deg or --missing-deg is required"),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    if !(delta_deg > 0.0 && delta_deg <= 90.0) {
        bail!("visible half-angle {delta_deg} degrees outside (0, 90]");
    }
    let nt = ntheta.unwrap_or_else(|| (2.0 * delta_deg).round() as usize + 1);
    Ok(AngleSet::new(delta_deg.to_radians(), nt)?)
}

fn default_np(n: usize) -> usize {
    (n as f64 * std::f64::consts::SQRT_2).floor() as usize + 1
}

fn cmd_phantom(args: PhantomArgs) -> Result<()> {
    fs::create_dir_all(&args.out)?;
    match args.kind {
        PhantomKind::Disk => {
            let scene = disk_scene(args.a)?;
            let img = render(&scene, args.n, args.supersample)?;
            io::write_image(&args.out.join("disk.clf1"), &img, None)?;
            write_json(
                &args.out.join("scene.json"),
                &SceneRecipe::Disk { a: args.a, n: args.n },
            )?;
            println!("wrote {}", args.out.join("disk.clf1").display());
        }
        PhantomKind::Squares => {
            let count = args.count.max(1);
            let scene = squares_scene::<f64>(args.seed, count)?;
            let img = render(&scene, args.n, args.supersample)?;
            io::write_image(&args.out.join("squares.clf1"), &img, Some(args.seed))?;
            write_json(
                &args.out.join("scene.json"),
                &SceneRecipe::Squares {
                    seed: args.seed,
                    count,
                    n: args.n,
                },
            )?;
            println!("wrote {}", args.out.join("squares.clf1").display());
        }
        PhantomKind::Ellipses => {
            let ds = generate_dataset::<f64>(args.seed, args.count, args.n, args.max_ellipses)?;
            io::write_manifest(
                &args.out,
                &io::DatasetManifest {
                    seed: ds.seed,
                    count: ds.len(),
                    n: ds.n,
                    params: ds.params.clone(),
                },
            )?;
            for (i, img) in ds.images.iter().enumerate() {
                io::write_image(&args.out.join(io::dataset_image_name(i)), img, Some(ds.seed))?;
            }
            println!("wrote {} images + manifest to {}", ds.len(), args.out.display());
        }
    }
    Ok(())
}

fn load_dataset(dir: &Path) -> Result<Dataset<f64>> {
    let manifest = io::read_manifest(dir)?;
    // scenes are rebuilt from the manifest; the first stored raster is
    // checked against the regeneration to catch stale directories
    let ds = generate_dataset::<f64>(
        manifest.seed,
        manifest.count,
        manifest.n,
        manifest.params.max_ellipses,
    )?;
    let first = dir.join(io::dataset_image_name(0));
    if first.exists() {
        let (img, _) = io::read_image::<f64>(&first)?;
        if img.values() != ds.images[0].values() {
            bail!(
                "dataset directory {} does not match its manifest (stale files?)",
                dir.display()
            );
        }
    }
    Ok(ds)
}

fn cmd_sino(args: SinoArgs) -> Result<()> {
    let input = &args.input;
    let is_manifest = input.file_name().map(|f| f == "manifest.json").unwrap_or(false);
    if input.is_dir() || is_manifest {
        let dir = if input.is_dir() {
            input.clone()
        } else {
            input.parent().unwrap_or(Path::new(".")).to_path_buf()
        };
        let ds = load_dataset(&dir)?;
        let angles = resolve_angles(args.delta_deg, args.missing_deg, args.ntheta)?;
        let n_p = args.np.unwrap_or_else(|| default_np(ds.n));
        fs::create_dir_all(&args.out)?;
        for (i, scene) in ds.scenes.iter().enumerate() {
            let mut sino = measurement_sinogram(scene, &angles, n_p, args.oversample)?;
            if args.noise_rel > 0.0 {
                sino = add_noise(&sino, args.noise_rel, child_seed(args.seed, i as u64))?;
            }
            io::write_sinogram(
                &args.out.join(format!("sino_{i:04}.clf1")),
                &sino,
                Some(args.seed),
            )?;
        }
        println!("wrote {} sinograms to {}", ds.scenes.len(), args.out.display());
        return Ok(());
    }
    match input.extension().and_then(|e| e.to_str()) {
        Some("json") => {
            let text = fs::read_to_string(input)
                .with_context(|| format!("reading {}", input.display()))?;
            let recipe: SceneRecipe = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", input.display()))?;
            let angles = resolve_angles(args.delta_deg, args.missing_deg, args.ntheta)?;
            let n_p = args.np.unwrap_or_else(|| default_np(recipe.n()));
            let mut sino = measurement_sinogram(&recipe.scene()?, &angles, n_p, args.oversample)?;
            if args.noise_rel > 0.0 {
                sino = add_noise(&sino, args.noise_rel, args.seed)?;
            }
            io::write_sinogram(&args.out, &sino, Some(args.seed))?;
            println!("wrote {}", args.out.display());
        }
        Some("clf1") => {
            let (img, _) = io::read_image::<f64>(input)?;
            let angles = resolve_angles(args.delta_deg, args.missing_deg, args.ntheta)?;
            let n_p = args.np.unwrap_or_else(|| default_np(img.n()));
            let mut sino = radon_forward(&img, &angles, n_p)?;
            if args.noise_rel > 0.0 {
                sino = add_noise(&sino, args.noise_rel, args.seed)?;
            }
            io::write_sinogram(&args.out, &sino, Some(args.seed))?;
            println!("wrote {}", args.out.display());
        }
        _ => bail!(
            "input {} is neither .clf1, .json, nor a dataset directory",
            input.display()
        ),
    }
    Ok(())
}

#[derive(Serialize)]
struct FbpReport {
    delta_deg: f64,
    shell_deg: f64,
    outside_cone_energy_fraction: f64,
}

fn outside_fraction(img: &Image64, delta: f64, shell: f64) -> f64 {
    let spec = fft2(img);
    let mut outside = 0.0;
    let mut total = 0.0;
    for (k1, k2, v) in spec.modes() {
        let e = v.norm_sqr();
        total += e;
        if folded_angle(k1 as f64, k2 as f64) > delta + shell {
            outside += e;
        }
    }
    if total > 0.0 {
        outside / total
    } else {
        0.0
    }
}

fn cmd_fbp(args: FbpArgs) -> Result<()> {
    let (sino, sidecar) = io::read_sinogram::<f64>(&args.input)?;
    let delta_deg = match sidecar {
        io::Sidecar::Sinogram { delta_deg, .. } => delta_deg,
        io::Sidecar::Image { .. } => unreachable!("read_sinogram checks the kind"),
    };
    let n = args
        .n
        .unwrap_or_else(|| ((sino.n_p() as f64 - 1.0) / std::f64::consts::SQRT_2).round() as usize);
    let rec = fbp(&sino, n)?;
    io::write_image(&args.out, &rec, None)?;
    let report = FbpReport {
        delta_deg,
        shell_deg: 2.0,
        outside_cone_energy_fraction: outside_fraction(
            &rec,
            delta_deg.to_radians(),
            2f64.to_radians(),
        ),
    };
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    println!(
        "wrote {} (outside-cone energy {:.3e})",
        args.out.display(),
        report.outside_cone_energy_fraction
    );
    Ok(())
}

#[derive(Serialize)]
struct ConeReport {
    beta_deg: f64,
    kept_energy_fraction: f64,
}

fn cmd_cone(args: ConeArgs) -> Result<()> {
    if !(args.beta_deg > 0.0 && args.beta_deg <= 90.0) {
        bail!("--beta-deg {} outside (0, 90]", args.beta_deg);
    }
    let (img, _) = io::read_image::<f64>(&args.input)?;
    let mask = cone_mask(img.n(), args.beta_deg.to_radians())?;
    let out = apply_multiplier(&img, &mask)?;
    io::write_image(&args.out, &out, None)?;
    let energy = |im: &Image64| im.values().iter().map(|v| v * v).sum::<f64>();
    let report = ConeReport {
        beta_deg: args.beta_deg,
        kept_energy_fraction: if energy(&img) > 0.0 {
            energy(&out) / energy(&img)
        } else {
            0.0
        },
    };
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    println!(
        "wrote {} (kept energy {:.4})",
        args.out.display(),
        report.kept_energy_fraction
    );
    Ok(())
}

fn open_csv(path: &Path) -> Result<fs::File> {
    let mut file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(file, "{}", Curve::CSV_HEADER)?;
    Ok(file)
}

fn cmd_diag(cmd: DiagCommand) -> Result<()> {
    match cmd {
        DiagCommand::Nbeta {
            dataset,
            beta_deg,
            norm,
            out,
        } => {
            let ds = load_dataset(&dataset)?;
            let betas = parse_range(&beta_deg)?;
            let mut file = open_csv(&out)?;
            for kind in norm.kinds() {
                let mut points = Vec::new();
                for &b in &betas {
                    points.push((b, n_beta(&ds, b.to_radians(), kind)?));
                }
                Curve::new(points, "n_beta", Some(kind), None, None)?.write_csv_rows(&mut file)?;
            }
            println!("wrote {}", out.display());
        }
        DiagCommand::Geps {
            dataset,
            delta_deg,
            eps_deg,
            norm,
            np,
            ntheta,
            out,
        } => {
            let ds = load_dataset(&dataset)?;
            let epss = parse_range(&eps_deg)?;
            let geom = SinoGeometry {
                n_p: np,
                n_theta: ntheta,
            };
            let mut file = open_csv(&out)?;
            for kind in norm.kinds() {
                let mut points = Vec::new();
                for &e in &epss {
                    points.push((
                        e,
                        g_eps(&ds, delta_deg.to_radians(), e.to_radians(), kind, geom)?,
                    ));
                }
                Curve::new(points, "g_eps", Some(kind), Some(delta_deg), None)?
                    .write_csv_rows(&mut file)?;
            }
            println!("wrote {}", out.display());
        }
        DiagCommand::Stability {
            dataset,
            delta_deg,
            eps_deg,
            factor,
            out,
        } => {
            let ds = load_dataset(&dataset)?;
            let factor = if factor == 1 {
                StabilityFactor::One
            } else {
                StabilityFactor::Two
            };
            let mut file = fs::File::create(&out)?;
            let mut all_ok = true;
            for (i, img) in ds.images.iter().enumerate() {
                // degenerate denominators are reported per image, not fatal
                match check_stability(
                    img,
                    delta_deg.to_radians(),
                    eps_deg.to_radians(),
                    factor,
                    SinoGeometry::default(),
                ) {
                    Ok(report) => {
                        all_ok &= report.satisfied;
                        writeln!(file, "{}", serde_json::to_string(&report)?)?;
                    }
                    Err(e @ conelab_core::Error::DegenerateDenominator { .. }) => {
                        all_ok = false;
                        writeln!(
                            file,
                            "{}",
                            serde_json::json!({ "image": i, "error": e.to_string() })
                        )?;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            println!("wrote {} (all satisfied: {all_ok})", out.display());
        }
        DiagCommand::EpsThreshold { n_cap, out } => {
            let eps = eps_threshold(n_cap)?;
            let value = serde_json::json!({
                "n": n_cap,
                "eps_rad": eps,
                "eps_deg": eps.to_degrees(),
            });
            println!("{value}");
            if let Some(path) = out {
                write_json(&path, &value)?;
            }
        }
        DiagCommand::DiskSweep {
            radii,
            delta_deg,
            eps_deg,
            n,
            norm,
            n_cap,
            out,
        } => {
            let radii = parse_range(&radii)?;
            let delta = delta_deg.to_radians();
            let eps = eps_deg.to_radians();
            let mut file = open_csv(&out)?;
            for kind in norm.kinds() {
                disk_sweep(&radii, delta, eps, kind, n)?.write_csv_rows(&mut file)?;
            }
            disk_sweep_continuum(&radii, delta, eps)?.write_csv_rows(&mut file)?;
            if let Some(cap) = n_cap {
                let verdicts: Vec<serde_json::Value> = radii
                    .iter()
                    .map(|&a| -> Result<serde_json::Value> {
                        let img = render(&disk_scene(a)?, n, 4)?;
                        Ok(serde_json::json!({
                            "a": a,
                            "member": membership(&img, cap, delta, eps, NormKind::Inhomogeneous)?,
                        }))
                    })
                    .collect::<Result<_>>()?;
                let path = out.with_extension("membership.json");
                write_json(&path, &verdicts)?;
                println!("wrote {}", path.display());
            }
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn cmd_ntk(cmd: NtkCommand) -> Result<()> {
    match cmd {
        NtkCommand::Train {
            seed,
            m,
            band,
            data_band,
            units,
            alpha,
            delta_deg,
            count,
            lr_frac,
            steps,
            out,
        } => {
            let cfg = ConeRecoveryConfig {
                seed,
                m,
                band,
                data_band,
                n_units: units,
                alpha,
                delta_deg,
                count,
                lr_frac,
                steps,
            };
            fs::create_dir_all(&out)?;
            let report = run_cone_recovery::<f64>(&cfg)?;
            for (name, arm) in [("linear", &report.linear), ("nonlinear", &report.nonlinear)] {
                let mut file = fs::File::create(out.join(format!("trace_{name}.csv")))?;
                writeln!(file, "step,loss")?;
                for (i, l) in arm.trace.losses.iter().enumerate() {
                    writeln!(file, "{i},{l:.16e}")?;
                }
            }
            let sigma_k = 1.0 / (conelab_core::ntk::band_mode_count(cfg.band) as f64).sqrt();
            write_json(
                &out.join("config.json"),
                &serde_json::json!({
                    "seed": cfg.seed,
                    "B": cfg.band,
                    "sigma_K": sigma_k,
                    "n_units": cfg.n_units,
                    "alpha": cfg.alpha,
                    "delta_deg": cfg.delta_deg,
                    "lr": report.nonlinear.trace.lr,
                    "steps": cfg.steps,
                    "m": cfg.m,
                    "data_band": cfg.data_band,
                    "count": cfg.count,
                    "lr_frac": cfg.lr_frac,
                }),
            )?;
            write_json(
                &out.join("comparison.json"),
                &serde_json::json!({
                    "linear_outside_error": report.linear.outside_error,
                    "nonlinear_outside_error": report.nonlinear.outside_error,
                    "improvement": report.improvement,
                    "linear_max_output_outside_fraction": report.linear.max_output_outside_fraction,
                    "nonlinear_max_output_outside_fraction": report.nonlinear.max_output_outside_fraction,
                    "linear_gram_eig": report.linear.trace.gram_eig,
                    "nonlinear_gram_eig": report.nonlinear.trace.gram_eig,
                }),
            )?;
            println!(
                "improvement {:.4} (linear outside error {:.4}, nonlinear {:.4})",
                report.improvement, report.linear.outside_error, report.nonlinear.outside_error
            );
        }
        NtkCommand::RhoCheck {
            samples,
            seed,
            rhos,
            alphas,
            out,
        } => {
            let rhos = parse_range(&rhos)?;
            let alphas = parse_list(&alphas)?;
            let mut file = fs::File::create(&out)?;
            writeln!(file, "rho,alpha,analytic,empirical,std_err")?;
            let mut run_seed = seed;
            for &alpha in &alphas {
                for &rho in &rhos {
                    let analytic = rho_transform(rho, alpha)?;
                    let (emp, se) = mc_corr_check(rho, alpha, samples, run_seed)?;
                    run_seed = run_seed.wrapping_add(1);
                    writeln!(
                        file,
                        "{rho:.16e},{alpha:.16e},{analytic:.16e},{emp:.16e},{se:.16e}"
                    )?;
                }
            }
            println!("wrote {}", out.display());
        }
        NtkCommand::Czeta {
            seed,
            m,
            band,
            data_band,
            alpha,
            delta_deg,
            count,
            zetas,
            out,
        } => {
            let data = random_periodic_dataset::<f64>(seed, count, m, data_band)?;
            let zeta_list: Vec<(i64, i64)> = zetas
                .split(';')
                .map(|pair| -> Result<(i64, i64)> {
                    let nums: Vec<&str> = pair.split(',').collect();
                    if nums.len() != 2 {
                        bail!("bad zeta {pair:?}, expected z1,z2");
                    }
                    Ok((nums[0].trim().parse()?, nums[1].trim().parse()?))
                })
                .collect::<Result<_>>()?;
            let reports = c_zeta_check(&data, delta_deg.to_radians(), band, alpha, &zeta_list)?;
            let mut file = fs::File::create(&out)?;
            writeln!(file, "zeta1,zeta2,min_eig,herm_residual")?;
            for r in &reports {
                writeln!(
                    file,
                    "{},{},{:.16e},{:.16e}",
                    r.zeta.0, r.zeta.1, r.min_eig, r.herm_residual
                )?;
            }
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}
