//! `fog`: render foggy tracking datasets, score tracker output, and run
//! synthetic robustness sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fogsim::depthio::SceneReference;
use fogsim::evalharness::{sweep, SceneFile};
use fogsim::motmetrics::{evaluate, load_mot_file, DEFAULT_IOU_THRESHOLD};
use fogsim::pipeline::{
    find_sequences, render_dataset, render_sequence, FogConfig, FogMode, Intensity, LightStrategy,
    SequenceDescriptor,
};
use fogsim::{FogError, PatchSpec};

const EXIT_INVALID: u8 = 1;
const EXIT_PARTIAL: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "fog", version, about = "Physics-based fog for MOT datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render fog over one sequence or a directory of sequences.
    Render(RenderArgs),
    /// Score a results file against ground truth.
    Eval(EvalArgs),
    /// Run a synthetic Clear + fog-level sweep from a scene file.
    Sweep(SweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Homo,
    Hetero,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Sequence directory or dataset root.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "homo")]
    mode: Mode,
    /// Fog level 1..=4.
    #[arg(
        long,
        conflicts_with = "visibility",
        required_unless_present = "visibility"
    )]
    level: Option<u8>,
    /// Meteorological visibility in meters; needs --dmin and --dmax.
    #[arg(long)]
    visibility: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Depth directory (a sequence's depth files, or one subdirectory per
    /// sequence when rendering a dataset).
    #[arg(long)]
    depth_dir: Option<PathBuf>,
    /// `dcp`, `sky`, or `rgb:R,G,B` with components in [0, 1].
    #[arg(long, default_value = "dcp", value_parser = parse_light)]
    light: LightStrategy,
    #[arg(long, requires = "dmax")]
    dmin: Option<f64>,
    #[arg(long, requires = "dmin")]
    dmax: Option<f64>,
    #[arg(long)]
    patch: Option<usize>,
    #[arg(long)]
    octaves: Option<u32>,
    #[arg(long)]
    brightness: Option<f64>,
    /// Write PNG frames.
    #[arg(long)]
    lossless: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    results: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    iou: f64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// TOML scene description.
    #[arg(long)]
    scene: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    levels: Vec<u8>,
    /// Directory receiving report.csv and report.md.
    #[arg(long)]
    out: PathBuf,
}

fn parse_light(s: &str) -> Result<LightStrategy, String> {
    match s {
        "dcp" => Ok(LightStrategy::Dcp),
        "sky" => Ok(LightStrategy::Sky),
        _ => {
            let rgb = s
                .strip_prefix("rgb:")
                .ok_or_else(|| format!("unknown light strategy `{s}`"))?;
            let parts: Vec<f32> = rgb
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f32>()
                        .map_err(|e| format!("bad component `{p}`: {e}"))
                })
                .collect::<Result<_, _>>()?;
            match parts.as_slice() {
                &[r, g, b] if parts.iter().all(|c| (0.0..=1.0).contains(c)) => {
                    Ok(LightStrategy::Fixed([r, g, b]))
                }
                _ => Err(format!("expected three components in [0, 1], got `{rgb}`")),
            }
        }
    }
}

enum Failure {
    Invalid(String),
    Partial(String),
}

impl From<FogError> for Failure {
    fn from(e: FogError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn build_config(a: &RenderArgs) -> Result<FogConfig, Failure> {
    let mode = match a.mode {
        Mode::Homo => FogMode::Homogeneous,
        Mode::Hetero => FogMode::Heterogeneous,
    };
    let intensity = match (a.level, a.visibility) {
        (Some(l), None) => Intensity::Level(l),
        (None, Some(v)) => Intensity::Visibility(v),
        _ => {
            return Err(Failure::Invalid(
                "give exactly one of --level or --visibility".into(),
            ))
        }
    };
    let mut cfg = FogConfig::new(mode, intensity, a.seed);
    cfg.light = a.light;
    cfg.lossless = a.lossless;
    if let (Some(d_min), Some(d_max)) = (a.dmin, a.dmax) {
        cfg.calibration = Some(SceneReference::new(d_min, d_max)?);
    }
    if let Some(p) = a.patch {
        cfg.patch = PatchSpec::new(p)?;
    }
    if let Some(o) = a.octaves {
        cfg.octaves = o;
    }
    if let Some(b) = a.brightness {
        cfg.brightness = b;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn is_sequence(dir: &Path) -> bool {
    dir.join("img1").is_dir() || dir.join("seqinfo.ini").is_file()
}

fn render(a: RenderArgs) -> Result<(), Failure> {
    let cfg = build_config(&a)?;
    if !a.input.is_dir() {
        return Err(Failure::Invalid(format!(
            "{} is not a directory",
            a.input.display()
        )));
    }
    if is_sequence(&a.input) {
        let seq = SequenceDescriptor::discover(&a.input, a.depth_dir.as_deref())?;
        let m =
            render_sequence(&seq, &cfg, &a.output).map_err(|e| Failure::Partial(e.to_string()))?;
        println!(
            "{}: {} frames -> {}",
            m.sequence,
            m.frames.len(),
            m.output_dir.display()
        );
        return Ok(());
    }
    if find_sequences(&a.input)?.is_empty() {
        return Err(FogError::NoSequences(a.input.clone()).into());
    }
    let outcome = render_dataset(&a.input, &a.output, &cfg, a.depth_dir.as_deref())?;
    for m in &outcome.rendered {
        println!(
            "{}: {} frames -> {}",
            m.sequence,
            m.frames.len(),
            m.output_dir.display()
        );
    }
    if outcome.is_complete() {
        return Ok(());
    }
    let msg = outcome
        .failures
        .iter()
        .map(|(name, e)| format!("{name}: {e}"))
        .collect::<Vec<_>>()
        .join("\n");
    if outcome.rendered.is_empty() {
        Err(Failure::Invalid(msg))
    } else {
        Err(Failure::Partial(msg))
    }
}

fn eval(a: EvalArgs) -> Result<(), Failure> {
    let gt = load_mot_file(&a.gt)?.for_evaluation();
    let pred = load_mot_file(&a.results)?;
    let r = evaluate(&gt, &pred, a.iou)?;
    println!("HOTA  {:.3}", r.hota);
    println!("DetA  {:.3}", r.deta);
    println!("AssA  {:.3}", r.assa);
    println!("MOTA  {:.3}", r.mota);
    println!("MOTP  {:.3}", r.motp);
    println!("IDF1  {:.3}", r.idf1);
    println!("IDSW  {}", r.id_switches);
    println!("FP    {}", r.false_positives);
    println!("FN    {}", r.false_negatives);
    println!("GT    {}", r.gt_count);
    Ok(())
}

fn run_sweep(a: SweepArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.scene).map_err(|e| FogError::io(&a.scene, e))?;
    let file = SceneFile::parse(&text)?;
    let setup = file.setup()?;
    let report = sweep(&setup, &file.level_configs(&a.levels))?;
    fs::create_dir_all(&a.out).map_err(|e| FogError::io(&a.out, e))?;
    let csv = a.out.join("report.csv");
    let md = a.out.join("report.md");
    fs::write(&csv, report.to_csv()).map_err(|e| FogError::io(&csv, e))?;
    fs::write(&md, report.to_markdown()).map_err(|e| FogError::io(&md, e))?;
    print!("{}", report.to_markdown());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Render(a) => render(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => run_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            log::error!("{msg}");
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Partial(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_PARTIAL)
        }
    }
}
