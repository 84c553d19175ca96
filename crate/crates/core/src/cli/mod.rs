//! The `mvseg` command line.
//!
//! Every command writes a `key=value` manifest next to its outputs holding
//! all effective settings, so a run can be repeated from the manifest alone.
//!
//! Exit codes: 0 success or converged, 1 other failure, 2 usage error,
//! 3 solver hit its iteration cap, 4 malformed input file.

mod render;

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::geometry::{ManifoldKind, ManifoldPoint, MeanSolverParams};
use crate::image::{gradient_field, ManifoldImage, ScalarField};
use crate::io;
use crate::levelset::{init_shape, DiracParams, LevelSetField, Mask, Shape};
use crate::segmentation::{
    segment_chan_vese_with_observer, segment_gac_with_observer, ChanVeseParams, GacParams, SegmentationResult,
};
use crate::texture::{texture_to_mvi, Ridge, TextureFeatureParams};

pub use render::{render, RenderOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_FORMAT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "mvseg",
    version,
    about = "Active-contour segmentation of manifold-valued images"
)]
pub struct Cli {
    /// Worker threads for per-pixel work (0 = all cores). 1 is bit-reproducible
    /// and so is any other value: reductions use a fixed chunk order.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded two-region synthetic image.
    Gen(GenArgs),
    /// Manifold gradient magnitude.
    Grad(GradArgs),
    /// Geodesic active contours.
    Gac(GacArgs),
    /// Chan-Vese region segmentation.
    Cv(CvArgs),
    /// Grayscale image to SPD(M^2) texture features.
    Texture(TextureArgs),
    /// Render an image (and optional mask contour) to PPM.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// euclidean:N, s1, s2, so3 or spd:N.
    #[arg(long)]
    pub kind: String,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    /// circle:cx,cy,r or rect:x0,y0,x1,y1 (x = column).
    #[arg(long)]
    pub shape: String,
    /// Point coordinates, comma separated; also axis:x,y,z (SO3), diag:a,b,.. (SPD), angle:t (S1).
    #[arg(long, allow_hyphen_values = true)]
    pub inside: String,
    #[arg(long, allow_hyphen_values = true)]
    pub outside: String,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output MVI path; the mask and manifest are written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output PGM, normalized by the maximum; the raw field goes to `<out>.raw.mvi`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// MVI input.
    #[arg(long = "in", conflicts_with = "in_pgm", required_unless_present = "in_pgm")]
    pub input: Option<PathBuf>,
    /// PGM input, treated as a Euclidean(1) image.
    #[arg(long)]
    pub in_pgm: Option<PathBuf>,
    /// Initial contour: circle:cx,cy,r or rect:x0,y0,x1,y1.
    #[arg(long)]
    pub init: String,
    #[arg(long)]
    pub out_prefix: PathBuf,
    /// Write the mask every K iterations (0 = never).
    #[arg(long, default_value_t = 0)]
    pub snapshot_every: usize,
}

#[derive(Debug, Args)]
pub struct GacArgs {
    #[command(flatten)]
    pub io: InputArgs,
    #[arg(long, default_value_t = 0.2)]
    pub dt: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    #[arg(long, default_value_t = 25)]
    pub reinit_every: usize,
    #[arg(long, default_value_t = 10)]
    pub reinit_iters: usize,
    /// Positive inflates the contour, negative shrinks it.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub balloon: f64,
    #[arg(long, default_value_t = 1.5)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub io: InputArgs,
    #[arg(long, default_value_t = 1.0)]
    pub lambda1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda2: f64,
    /// Length weight, or `auto`.
    #[arg(long, default_value = "auto")]
    pub mu: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.5)]
    pub dt: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1)]
    pub mean_every: usize,
    #[arg(long, default_value_t = 25)]
    pub reinit_every: usize,
    #[arg(long, default_value_t = 10)]
    pub reinit_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    #[arg(long, default_value_t = 1.5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub mean_tol: f64,
    #[arg(long, default_value_t = 100)]
    pub mean_max_iters: usize,
}

#[derive(Debug, Args)]
pub struct TextureArgs {
    #[arg(long)]
    pub in_pgm: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub patch: usize,
    #[arg(long, default_value_t = 13)]
    pub window: usize,
    /// Diagonal regularizer, or `auto`.
    #[arg(long, default_value = "auto")]
    pub ridge: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Mask PGM whose boundary is drawn in red.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Glyph cell size in pixels for SPD(3) images.
    #[arg(long, default_value_t = 8)]
    pub glyph: usize,
    #[arg(long)]
    pub out_ppm: PathBuf,
}

/// Failure of a command, tagged with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(flag: &str, err: impl Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: format!("--{flag}: {err}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) => EXIT_USAGE,
            Error::Format(_) => EXIT_FORMAT,
            _ => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

trait Flag<T> {
    fn flag(self, name: &str) -> CliResult<T>;
}

impl<T> Flag<T> for Result<T> {
    fn flag(self, name: &str) -> CliResult<T> {
        self.map_err(|e| match e {
            Error::InvalidArgument(m) => CliError::usage(name, m),
            other => other.into(),
        })
    }
}

/// Ordered `key=value` lines.
#[derive(Debug, Default)]
pub struct Manifest(Vec<(String, String)>);

impl Manifest {
    fn new(command: &str, threads: usize) -> Self {
        let mut m = Self::default();
        m.set("command", command);
        m.set("version", env!("CARGO_PKG_VERSION"));
        m.set("threads", threads);
        m
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn prefixed(prefix: &Path, suffix: &str) -> PathBuf {
    sibling(prefix, suffix)
}

fn parse_list(s: &str, flag: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::usage(flag, format!("`{t}`: {e}")))
        })
        .collect()
}

/// Parses a point on `kind` from a flag value.
pub fn parse_point(kind: ManifoldKind, s: &str, flag: &str) -> CliResult<ManifoldPoint<f64>> {
    let point = match s.split_once(':') {
        Some(("axis", rest)) if kind == ManifoldKind::SO3 => {
            let v = parse_list(rest, flag)?;
            if v.len() != 3 {
                return Err(CliError::usage(flag, "axis form needs 3 values"));
            }
            Ok(ManifoldPoint::rotation([v[0], v[1], v[2]]))
        }
        Some(("diag", rest)) if matches!(kind, ManifoldKind::Spd(_)) => {
            let p = ManifoldPoint::spd_diagonal(&parse_list(rest, flag)?);
            match p {
                Ok(p) if p.kind() == kind => Ok(p),
                Ok(p) => Err(crate::error::invalid(format!("{} is not {kind}", p.kind()))),
                Err(e) => Err(e),
            }
        }
        Some(("angle", rest)) if kind == ManifoldKind::Sphere1 => {
            let t = rest
                .trim()
                .parse::<f64>()
                .map_err(|e| CliError::usage(flag, format!("`{rest}`: {e}")))?;
            Ok(ManifoldPoint::from_angle(t))
        }
        _ => ManifoldPoint::new(kind, parse_list(s, flag)?),
    };
    point.flag(flag)
}

fn load_input(io: &InputArgs) -> CliResult<(ManifoldImage<f64>, String)> {
    match (&io.input, &io.in_pgm) {
        (Some(p), _) => Ok((io::read_mvi(p)?, format!("in={}", p.display()))),
        (None, Some(p)) => {
            let g: ScalarField<f64> = io::read_pgm(p)?;
            let img = ManifoldImage::from_gray(g.height(), g.width(), g.values())?;
            Ok((img, format!("in_pgm={}", p.display())))
        }
        (None, None) => Err(CliError::usage("in", "an input image is required")),
    }
}

fn initial_phi(io: &InputArgs, img: &ManifoldImage<f64>) -> CliResult<LevelSetField<f64>> {
    let shape: Shape<f64> = io.init.parse().flag("init")?;
    shape.check_inside(img.height(), img.width()).flag("init")?;
    init_shape(img.height(), img.width(), &shape).flag("init")
}

fn snapshot_writer(io: &InputArgs) -> impl FnMut(usize, &LevelSetField<f64>) + '_ {
    let every = io.snapshot_every;
    move |iter, phi| {
        if every > 0 && iter % every == 0 {
            let path = prefixed(&io.out_prefix, &format!("_snap_{iter:06}.pgm"));
            if let Err(e) = io::write_mask_pgm(&crate::levelset::extract_mask(phi), &path) {
                eprintln!("warning: snapshot {}: {e}", path.display());
            }
        }
    }
}

fn write_energy_csv(result: &SegmentationResult<f64>, path: &Path) -> Result<()> {
    let mut s = String::from("iter,length,area,data_in,data_out,total\n");
    for r in &result.energy_trace {
        let t = &r.terms;
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.iteration, t.length, t.area, t.data_in, t.data_out, t.total
        ));
    }
    fs::write(path, s)?;
    Ok(())
}

fn write_segmentation(result: &SegmentationResult<f64>, prefix: &Path, manifest: &mut Manifest) -> CliResult<i32> {
    io::write_mask_pgm(&result.mask, prefixed(prefix, "_mask.pgm"))?;
    io::write_contours(&io::contours(&result.phi), prefixed(prefix, "_contour.txt"))?;
    write_energy_csv(result, &prefixed(prefix, "_energy.csv"))?;
    manifest.set("result.iterations", result.iterations);
    manifest.set("result.converged", result.converged);
    manifest.set("result.area", result.mask.area());
    manifest.set("result.warnings.cut_locus", result.warnings.cut_locus);
    manifest.set(
        "result.warnings.mean_non_convergence",
        result.warnings.mean_non_convergence,
    );
    manifest.set("result.warnings.empty_region", result.warnings.empty_region);
    manifest.write(&prefixed(prefix, ".manifest"))?;
    Ok(if result.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn cmd_gen(a: &GenArgs, threads: usize) -> CliResult<i32> {
    let kind: ManifoldKind = a.kind.parse().flag("kind")?;
    let region: Shape<f64> = a.shape.parse().flag("shape")?;
    let spec = io::SyntheticSpec {
        height: a.height,
        width: a.width,
        region,
        inside: parse_point(kind, &a.inside, "inside")?,
        outside: parse_point(kind, &a.outside, "outside")?,
        noise_sigma: a.noise,
        seed: a.seed,
    };
    let (img, mask) = io::generate_synthetic(kind, &spec)?;
    io::write_mvi(&img, &a.out)?;
    io::write_mask_pgm(&mask, sibling(&a.out, ".mask.pgm"))?;
    let mut m = Manifest::new("gen", threads);
    m.set("kind", kind);
    m.set("height", a.height);
    m.set("width", a.width);
    m.set("shape", &a.shape);
    m.set("inside", &a.inside);
    m.set("outside", &a.outside);
    m.set("noise", a.noise);
    m.set("seed", a.seed);
    m.set("out", a.out.display());
    m.set("result.inside_pixels", mask.area());
    m.write(&sibling(&a.out, ".manifest"))?;
    Ok(EXIT_OK)
}

fn cmd_grad(a: &GradArgs, threads: usize) -> CliResult<i32> {
    let img: ManifoldImage<f64> = io::read_mvi(&a.input)?;
    let field = gradient_field(&img);
    let (_, max) = field.magnitude.min_max();
    let normalized = if max > 0.0 {
        field.magnitude.map(|v| v / max)
    } else {
        field.magnitude.clone()
    };
    io::write_pgm(&normalized, &a.out)?;
    let raw = ManifoldImage::from_gray(img.height(), img.width(), field.magnitude.values())?;
    io::write_mvi(&raw, sibling(&a.out, ".raw.mvi"))?;
    let mut m = Manifest::new("grad", threads);
    m.set("in", a.input.display());
    m.set("out", a.out.display());
    m.set("result.max", max);
    m.set("result.cut_locus_pixels", field.cut_locus_pixels);
    m.write(&sibling(&a.out, ".manifest"))?;
    Ok(EXIT_OK)
}

fn cmd_gac(a: &GacArgs, threads: usize) -> CliResult<i32> {
    let (img, source) = load_input(&a.io)?;
    let phi0 = initial_phi(&a.io, &img)?;
    let params = GacParams {
        dt: a.dt,
        max_iters: a.max_iters,
        convergence_tol: a.tol,
        convergence_window: a.window,
        reinit_every: a.reinit_every,
        reinit_iters: a.reinit_iters,
        balloon: a.balloon,
        dirac: DiracParams { epsilon: a.epsilon },
    };
    let mut snap = snapshot_writer(&a.io);
    let result = segment_gac_with_observer(&img, &phi0, &params, &mut snap)?;
    let mut m = Manifest::new("gac", threads);
    let (k, v) = source.split_once('=').unwrap();
    m.set(k, v);
    m.set("init", &a.io.init);
    m.set("out_prefix", a.io.out_prefix.display());
    m.set("snapshot_every", a.io.snapshot_every);
    m.set("dt", a.dt);
    m.set("max_iters", a.max_iters);
    m.set("tol", a.tol);
    m.set("window", a.window);
    m.set("reinit_every", a.reinit_every);
    m.set("reinit_iters", a.reinit_iters);
    m.set("balloon", a.balloon);
    m.set("epsilon", a.epsilon);
    write_segmentation(&result, &a.io.out_prefix, &mut m)
}

fn cmd_cv(a: &CvArgs, threads: usize) -> CliResult<i32> {
    let (img, source) = load_input(&a.io)?;
    let phi0 = initial_phi(&a.io, &img)?;
    let mu = match a.mu.as_str() {
        "auto" => None,
        s => Some(
            s.parse::<f64>()
                .map_err(|e| CliError::usage("mu", format!("`{s}`: {e}")))?,
        ),
    };
    let params = ChanVeseParams {
        lambda1: a.lambda1,
        lambda2: a.lambda2,
        mu,
        nu: a.nu,
        dt: a.dt,
        max_iters: a.max_iters,
        mean_update_every: a.mean_every,
        reinit_every: a.reinit_every,
        reinit_iters: a.reinit_iters,
        convergence_tol: a.tol,
        convergence_window: a.window,
        dirac: DiracParams { epsilon: a.epsilon },
        mean_params: MeanSolverParams {
            tolerance: a.mean_tol,
            max_iters: a.mean_max_iters,
        },
    };
    let mut snap = snapshot_writer(&a.io);
    let result = segment_chan_vese_with_observer(&img, &phi0, &params, &mut snap)?;
    let mut m = Manifest::new("cv", threads);
    let (k, v) = source.split_once('=').unwrap();
    m.set(k, v);
    m.set("init", &a.io.init);
    m.set("out_prefix", a.io.out_prefix.display());
    m.set("snapshot_every", a.io.snapshot_every);
    m.set("lambda1", a.lambda1);
    m.set("lambda2", a.lambda2);
    m.set("mu", &a.mu);
    m.set("nu", a.nu);
    m.set("dt", a.dt);
    m.set("max_iters", a.max_iters);
    m.set("mean_every", a.mean_every);
    m.set("reinit_every", a.reinit_every);
    m.set("reinit_iters", a.reinit_iters);
    m.set("tol", a.tol);
    m.set("window", a.window);
    m.set("epsilon", a.epsilon);
    m.set("mean_tol", a.mean_tol);
    m.set("mean_max_iters", a.mean_max_iters);
    m.set("result.length_weight", result.length_weight);
    write_segmentation(&result, &a.io.out_prefix, &mut m)
}

fn cmd_texture(a: &TextureArgs, threads: usize) -> CliResult<i32> {
    let gray: ScalarField<f64> = io::read_pgm(&a.in_pgm)?;
    let ridge = match a.ridge.as_str() {
        "auto" => Ridge::Auto,
        s => Ridge::Fixed(
            s.parse::<f64>()
                .map_err(|e| CliError::usage("ridge", format!("`{s}`: {e}")))?,
        ),
    };
    let params = TextureFeatureParams {
        patch_size: a.patch,
        window_size: a.window,
        ridge,
    };
    let mvi = texture_to_mvi(&gray, &params)?;
    io::write_mvi(&mvi, &a.out)?;
    let mut m = Manifest::new("texture", threads);
    m.set("in_pgm", a.in_pgm.display());
    m.set("patch", a.patch);
    m.set("window", a.window);
    m.set("ridge", &a.ridge);
    m.set("out", a.out.display());
    m.write(&sibling(&a.out, ".manifest"))?;
    Ok(EXIT_OK)
}

fn cmd_render(a: &RenderArgs, threads: usize) -> CliResult<i32> {
    let img: ManifoldImage<f64> = io::read_mvi(&a.input)?;
    let mask = match &a.mask {
        Some(p) => {
            let g: ScalarField<f64> = io::read_pgm(p)?;
            if g.height() != img.height() || g.width() != img.width() {
                return Err(CliError::usage("mask", "mask dimensions differ from the image"));
            }
            Some(Mask::new(
                g.height(),
                g.width(),
                g.values().iter().map(|&v| v >= 0.5).collect(),
            )?)
        }
        None => None,
    };
    let opts = RenderOptions { glyph_cell: a.glyph };
    let raster = render(&img, mask.as_ref(), &opts).flag("glyph")?;
    io::write_ppm(&raster, &a.out_ppm)?;
    let mut m = Manifest::new("render", threads);
    m.set("in", a.input.display());
    m.set(
        "mask",
        a.mask.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
    );
    m.set("glyph", a.glyph);
    m.set("out_ppm", a.out_ppm.display());
    m.write(&sibling(&a.out_ppm, ".manifest"))?;
    Ok(EXIT_OK)
}

/// Runs a parsed command line and returns its exit code.
pub fn execute(cli: &Cli) -> CliResult<i32> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::usage("threads", e))?;
    let threads = pool.current_num_threads();
    pool.install(|| match &cli.command {
        Command::Gen(a) => cmd_gen(a, threads),
        Command::Grad(a) => cmd_grad(a, threads),
        Command::Gac(a) => cmd_gac(a, threads),
        Command::Cv(a) => cmd_cv(a, threads),
        Command::Texture(a) => cmd_texture(a, threads),
        Command::Render(a) => cmd_render(a, threads),
    })
}

/// Parses `args` (including the program name) and runs the command,
/// reporting errors on stderr.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => {
            if code == EXIT_NOT_CONVERGED {
                eprintln!("warning: iteration cap reached before convergence");
            }
            code
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
