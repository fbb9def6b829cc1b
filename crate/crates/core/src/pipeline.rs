//! Sequence and dataset rendering over MOTChallenge-style directories.
//!
//! A sequence directory holds `seqinfo.ini`, an image directory (`img1/`)
//! of zero-padded frames, optional `gt/` annotations, and a depth directory
//! whose files share each frame's basename (`000001.pfm` or `000001.png`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::atmolight::{
    estimate_light_dcp, estimate_light_sky, PatchSpec, DEFAULT_FAR_FRACTION, DEFAULT_TOP_FRACTION,
};
use crate::depthio::{
    calibrate, load_depth, to_metric, to_pseudo_depth, DepthFormat, MetricDepth,
    RelativeInverseDepth, SceneReference,
};
use crate::error::{FogError, Result};
use crate::fogmodel::{
    beta_from_level, beta_from_visibility, composite, transmission, AtmosphericLight, Attenuation,
    TransmissionMap, DEFAULT_LEVEL_LADDER,
};
use crate::raster::RasterImage;
use crate::turbulence::{
    heterogeneous_transmission, turbulence_texture, TurbulenceMap, DEFAULT_BRIGHTNESS,
    DEFAULT_OCTAVES,
};

pub const JPEG_QUALITY: u8 = 95;
pub const MANIFEST_NAME: &str = "manifest.txt";
/// Caps the number of frame workers.
pub const THREADS_ENV: &str = "FOG_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FogMode {
    Homogeneous,
    Heterogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intensity {
    /// Meteorological visibility in meters. Needs metric depth.
    Visibility(f64),
    /// Abstract level 1..=4 on the level ladder.
    Level(u8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LightStrategy {
    Dcp,
    Sky,
    Fixed([f32; 3]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FogConfig {
    pub mode: FogMode,
    pub intensity: Intensity,
    pub seed: u64,
    pub light: LightStrategy,
    pub patch: PatchSpec,
    pub top_fraction: f64,
    pub far_fraction: f64,
    pub octaves: u32,
    pub brightness: f64,
    pub calibration: Option<SceneReference>,
    /// Optical thickness at the farthest scene point for levels 1..=4.
    pub level_ladder: [f64; 4],
    /// Write PNG frames instead of JPEG.
    pub lossless: bool,
    /// Forces the attenuation coefficient; `Some(0.0)` renders no fog.
    pub beta_override: Option<f64>,
}

impl FogConfig {
    pub fn new(mode: FogMode, intensity: Intensity, seed: u64) -> Self {
        Self {
            mode,
            intensity,
            seed,
            light: LightStrategy::Dcp,
            patch: PatchSpec::default(),
            top_fraction: DEFAULT_TOP_FRACTION,
            far_fraction: DEFAULT_FAR_FRACTION,
            octaves: DEFAULT_OCTAVES,
            brightness: DEFAULT_BRIGHTNESS,
            calibration: None,
            level_ladder: DEFAULT_LEVEL_LADDER,
            lossless: false,
            beta_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.intensity {
            Intensity::Level(l) if !(1..=4).contains(&l) => {
                return Err(FogError::InvalidConfig(format!(
                    "fog level must be 1..=4, got {l}"
                )))
            }
            Intensity::Visibility(v) if !(v > 0.0 && v.is_finite()) => {
                return Err(FogError::InvalidVisibility(v))
            }
            Intensity::Visibility(_)
                if self.calibration.is_none() && self.beta_override.is_none() =>
            {
                return Err(FogError::InvalidConfig(
                    "visibility in meters needs metric depth; supply d_min/d_max or use a level"
                        .into(),
                ))
            }
            _ => {}
        }
        if let Some(r) = &self.calibration {
            r.validate()?;
        }
        if let Some(b) = self.beta_override {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(FogError::InvalidConfig(format!(
                    "beta override must be >= 0, got {b}"
                )));
            }
        }
        if self.ladder_is_invalid() {
            return Err(FogError::InvalidConfig(
                "level ladder must be positive and increasing".into(),
            ));
        }
        if let LightStrategy::Fixed(c) = self.light {
            AtmosphericLight::new(c)?;
        }
        if self.mode == FogMode::Heterogeneous {
            if self.octaves == 0 {
                return Err(FogError::InvalidConfig("octaves must be >= 1".into()));
            }
            if !(self.brightness > 0.0 && self.brightness <= 1.0) {
                return Err(FogError::InvalidConfig(format!(
                    "brightness must be in (0, 1], got {}",
                    self.brightness
                )));
            }
        }
        for (name, f) in [
            ("top fraction", self.top_fraction),
            ("far fraction", self.far_fraction),
        ] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(FogError::InvalidConfig(format!(
                    "{name} must be in (0, 1], got {f}"
                )));
            }
        }
        Ok(())
    }

    fn ladder_is_invalid(&self) -> bool {
        self.level_ladder[0] <= 0.0 || self.level_ladder.windows(2).any(|w| !(w[0] < w[1]))
    }

    /// Converts a frame's relative inverse depth to the depth used for
    /// attenuation: metric when a scene reference is configured (after
    /// rescaling the map to `[0, 1]`), normalized pseudo-depth otherwise.
    pub fn scene_depth(&self, raw: &RelativeInverseDepth) -> Result<MetricDepth> {
        match &self.calibration {
            Some(reference) => to_metric(&raw.normalized(), &calibrate(reference)?),
            None => Ok(to_pseudo_depth(raw).depth),
        }
    }

    /// Attenuation for this configuration. The farthest point of the scene
    /// is `d_max` for metric depth and 1 for normalized depth.
    pub fn attenuation(&self) -> Result<Attenuation> {
        if let Some(b) = self.beta_override {
            return if b == 0.0 {
                Ok(Attenuation::none())
            } else {
                Attenuation::from_beta(b)
            };
        }
        match self.intensity {
            Intensity::Visibility(v) => beta_from_visibility(v),
            Intensity::Level(l) => {
                let far = self.calibration.map_or(1.0, |r| r.d_max);
                beta_from_level(l, &self.level_ladder, far)
            }
        }
    }

    pub fn transmission(
        &self,
        depth: &MetricDepth,
        att: &Attenuation,
        tau: Option<&TurbulenceMap>,
    ) -> Result<TransmissionMap> {
        match (self.mode, tau) {
            (FogMode::Heterogeneous, Some(tau)) => heterogeneous_transmission(depth, tau, att),
            (FogMode::Heterogeneous, None) => Err(FogError::InvalidConfig(
                "heterogeneous fog needs a turbulence map".into(),
            )),
            (FogMode::Homogeneous, _) => Ok(transmission(depth, att)),
        }
    }

    fn intensity_label(&self) -> String {
        match self.intensity {
            Intensity::Visibility(v) => format!("visibility:{v}"),
            Intensity::Level(l) => format!("level:{l}"),
        }
    }
}

/// A MOTChallenge sequence on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceDescriptor {
    pub name: String,
    pub root: PathBuf,
    pub image_dir: PathBuf,
    pub depth_dir: PathBuf,
    pub frame_rate: f64,
    /// `(width, height)` from `seqinfo.ini`, when present.
    pub resolution: Option<(usize, usize)>,
}

impl SequenceDescriptor {
    /// Reads `seqinfo.ini` if present. Depth files live in `depth_dir`, or in
    /// `<root>/depth` when none is given.
    pub fn discover(root: &Path, depth_dir: Option<&Path>) -> Result<Self> {
        let info = read_seqinfo(root)?;
        let get = |k: &str| {
            info.iter()
                .find(|(key, _)| key.eq_ignore_ascii_case(k))
                .map(|(_, v)| v.as_str())
        };
        let name = get("name")
            .map(str::to_string)
            .or_else(|| root.file_name().map(|n| n.to_string_lossy().into_owned()))
            .ok_or_else(|| FogError::InvalidSequence {
                path: root.to_path_buf(),
                reason: "cannot determine sequence name".into(),
            })?;
        let image_dir = root.join(get("imDir").unwrap_or("img1"));
        if !image_dir.is_dir() {
            return Err(FogError::InvalidSequence {
                path: root.to_path_buf(),
                reason: format!("image directory {} not found", image_dir.display()),
            });
        }
        let frame_rate = get("frameRate")
            .and_then(|v| v.parse().ok())
            .unwrap_or(30.0);
        let resolution = match (get("imWidth"), get("imHeight")) {
            (Some(w), Some(h)) => w.parse().ok().zip(h.parse().ok()),
            _ => None,
        };
        Ok(Self {
            name,
            root: root.to_path_buf(),
            image_dir,
            depth_dir: depth_dir.map_or_else(|| root.join("depth"), Path::to_path_buf),
            frame_rate,
            resolution,
        })
    }

    /// Frame image paths in order. Stems must be consecutive integers.
    pub fn frames(&self) -> Result<Vec<PathBuf>> {
        let entries =
            fs::read_dir(&self.image_dir).map_err(|e| FogError::io(&self.image_dir, e))?;
        let mut frames = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| FogError::io(&self.image_dir, e))?.path();
            let is_image = path
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "jpg" | "jpeg" | "png"));
            if is_image {
                let n: u64 = stem(&path).parse().map_err(|_| FogError::InvalidSequence {
                    path: path.clone(),
                    reason: "frame name is not an integer".into(),
                })?;
                frames.push((n, path));
            }
        }
        frames.sort();
        if frames.is_empty() {
            return Err(FogError::InvalidSequence {
                path: self.image_dir.clone(),
                reason: "no frames".into(),
            });
        }
        for w in frames.windows(2) {
            if w[1].0 != w[0].0 + 1 {
                return Err(FogError::InvalidSequence {
                    path: w[1].1.clone(),
                    reason: format!("frame numbers jump from {} to {}", w[0].0, w[1].0),
                });
            }
        }
        Ok(frames.into_iter().map(|(_, p)| p).collect())
    }

    /// Depth file for a frame: `<stem>.pfm`, else `<stem>.png`.
    pub fn depth_for(&self, frame: &Path) -> Result<(PathBuf, DepthFormat)> {
        let stem = stem(frame);
        for (ext, format) in [("pfm", DepthFormat::Pfm), ("png", DepthFormat::Png16)] {
            let p = self.depth_dir.join(format!("{stem}.{ext}"));
            if p.is_file() {
                return Ok((p, format));
            }
        }
        Err(FogError::MissingDepth {
            sequence: self.name.clone(),
            frame: file_name(frame),
        })
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn read_seqinfo(root: &Path) -> Result<Vec<(String, String)>> {
    let path = root.join("seqinfo.ini");
    if !path.is_file() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(&path).map_err(|e| FogError::io(&path, e))?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect())
}

/// Checksums for one rendered frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRecord {
    pub input: String,
    pub output: String,
    pub input_sha256: String,
    pub output_sha256: String,
    pub tau_sha256: Option<String>,
}

/// What was rendered for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceManifest {
    pub sequence: String,
    pub config: FogConfig,
    pub beta: f64,
    pub light: [f32; 3],
    pub metric_depth: bool,
    pub tau_sha256: Option<String>,
    pub frames: Vec<FrameRecord>,
    pub output_dir: PathBuf,
}

impl SequenceManifest {
    /// Plain `key=value` header followed by one line per frame.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "sequence={}", self.sequence);
        let _ = writeln!(
            s,
            "mode={}",
            match c.mode {
                FogMode::Homogeneous => "homogeneous",
                FogMode::Heterogeneous => "heterogeneous",
            }
        );
        let _ = writeln!(s, "intensity={}", c.intensity_label());
        let _ = writeln!(s, "seed={}", c.seed);
        let _ = writeln!(s, "beta={}", self.beta);
        let _ = writeln!(
            s,
            "depth={}",
            if self.metric_depth {
                "metric"
            } else {
                "normalized"
            }
        );
        if let Some(r) = &c.calibration {
            let _ = writeln!(s, "d_min={}\nd_max={}", r.d_min, r.d_max);
        }
        let _ = writeln!(
            s,
            "light_strategy={}",
            match c.light {
                LightStrategy::Dcp => "dcp".to_string(),
                LightStrategy::Sky => "sky".to_string(),
                LightStrategy::Fixed(_) => "fixed".to_string(),
            }
        );
        let _ = writeln!(
            s,
            "light={},{},{}",
            self.light[0], self.light[1], self.light[2]
        );
        let _ = writeln!(s, "patch={}", c.patch.size());
        if c.mode == FogMode::Heterogeneous {
            let _ = writeln!(s, "octaves={}\nbrightness={}", c.octaves, c.brightness);
        }
        let _ = writeln!(
            s,
            "tau_sha256={}",
            self.tau_sha256.as_deref().unwrap_or("none")
        );
        let _ = writeln!(s, "frames={}", self.frames.len());
        for f in &self.frames {
            let _ = writeln!(
                s,
                "frame {} -> {} in={} out={} tau={}",
                f.input,
                f.output,
                f.input_sha256,
                f.output_sha256,
                f.tau_sha256.as_deref().unwrap_or("none")
            );
        }
        s
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| FogError::io(path, e))?;
    Ok(crate::hex(&Sha256::digest(&bytes)))
}

fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| FogError::InvalidConfig(format!("thread pool: {e}")))
}

fn load_frame_depth(
    seq: &SequenceDescriptor,
    cfg: &FogConfig,
    frame: &Path,
    dims: (usize, usize),
) -> Result<MetricDepth> {
    let (path, format) = seq.depth_for(frame)?;
    let raw = load_depth(&path, format)?;
    raw.field().ensure_dims("depth map", dims)?;
    cfg.scene_depth(&raw)
}

/// Renders every frame of `seq` into `out_root/<name>/`.
///
/// Atmospheric light, attenuation and the turbulence texture are fixed from
/// the first frame and shared by all frames. Annotations (`gt/`) and
/// `seqinfo.ini` are copied unchanged.
pub fn render_sequence(
    seq: &SequenceDescriptor,
    cfg: &FogConfig,
    out_root: &Path,
) -> Result<SequenceManifest> {
    cfg.validate()?;
    let frames = seq.frames()?;
    for f in &frames {
        seq.depth_for(f)?;
    }

    let first = RasterImage::load(&frames[0])?;
    let dims = first.dims();
    if let Some(res) = seq.resolution {
        if res != dims {
            return Err(FogError::DimensionMismatch {
                what: "first frame vs seqinfo.ini",
                expected: res,
                got: dims,
            });
        }
    }
    let first_depth = load_frame_depth(seq, cfg, &frames[0], dims)?;
    let att = cfg.attenuation()?;
    let light = match cfg.light {
        LightStrategy::Dcp => estimate_light_dcp(&first, cfg.patch, cfg.top_fraction)?,
        LightStrategy::Sky => estimate_light_sky(&first, &first_depth, cfg.far_fraction)?,
        LightStrategy::Fixed(c) => AtmosphericLight::new(c)?,
    };
    let tau = match cfg.mode {
        FogMode::Heterogeneous => Some(turbulence_texture(
            dims.0,
            dims.1,
            cfg.octaves,
            cfg.seed,
            cfg.brightness,
        )?),
        FogMode::Homogeneous => None,
    };
    let tau_hash = tau.as_ref().map(TurbulenceMap::sha256_hex);

    let seq_out = out_root.join(&seq.name);
    let image_dir_name = seq
        .image_dir
        .file_name()
        .map(PathBuf::from)
        .unwrap_or_else(|| "img1".into());
    let img_out = seq_out.join(&image_dir_name);
    fs::create_dir_all(&img_out).map_err(|e| FogError::io(&img_out, e))?;

    let render_one = |frame: &PathBuf| -> Result<FrameRecord> {
        let img = RasterImage::load(frame)?;
        if img.dims() != dims {
            return Err(FogError::DimensionMismatch {
                what: "frame",
                expected: dims,
                got: img.dims(),
            });
        }
        let depth = load_frame_depth(seq, cfg, frame, dims)?;
        let t = cfg.transmission(&depth, &att, tau.as_ref())?;
        let foggy = composite(&img, &t, &light)?;

        let input_name = file_name(frame);
        let is_png = frame
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        let output_name = if cfg.lossless && !is_png {
            format!("{}.png", stem(frame))
        } else {
            input_name.clone()
        };
        let out_path = img_out.join(&output_name);
        if cfg.lossless || is_png {
            foggy.save_png(&out_path)?;
        } else {
            foggy.save_jpeg(&out_path, JPEG_QUALITY)?;
        }
        Ok(FrameRecord {
            input: input_name,
            output: output_name,
            input_sha256: sha256_file(frame)?,
            output_sha256: sha256_file(&out_path)?,
            tau_sha256: tau.as_ref().map(TurbulenceMap::sha256_hex),
        })
    };

    let records: Vec<FrameRecord> = worker_pool()?.install(|| {
        frames
            .par_iter()
            .map(render_one)
            .collect::<Result<Vec<_>>>()
    })?;

    copy_annotations(seq, &seq_out)?;

    let manifest = SequenceManifest {
        sequence: seq.name.clone(),
        config: cfg.clone(),
        beta: att.beta(),
        light: light.color(),
        metric_depth: first_depth.is_metric(),
        tau_sha256: tau_hash,
        frames: records,
        output_dir: seq_out.clone(),
    };
    let manifest_path = seq_out.join(MANIFEST_NAME);
    fs::write(&manifest_path, manifest.to_text()).map_err(|e| FogError::io(&manifest_path, e))?;
    Ok(manifest)
}

fn copy_annotations(seq: &SequenceDescriptor, seq_out: &Path) -> Result<()> {
    let info = seq.root.join("seqinfo.ini");
    if info.is_file() {
        let dst = seq_out.join("seqinfo.ini");
        fs::copy(&info, &dst).map_err(|e| FogError::io(&dst, e))?;
    }
    let gt = seq.root.join("gt");
    if gt.is_dir() {
        copy_dir(&gt, &seq_out.join("gt"))?;
    }
    Ok(())
}

fn copy_dir(src: &Path, dst: &Path) -> Result<()> {
    fs::create_dir_all(dst).map_err(|e| FogError::io(dst, e))?;
    for entry in fs::read_dir(src).map_err(|e| FogError::io(src, e))? {
        let entry = entry.map_err(|e| FogError::io(src, e))?;
        let from = entry.path();
        let to = dst.join(entry.file_name());
        if from.is_dir() {
            copy_dir(&from, &to)?;
        } else {
            fs::copy(&from, &to).map_err(|e| FogError::io(&to, e))?;
        }
    }
    Ok(())
}

/// Seed for one sequence of a dataset run.
pub fn sequence_seed(seed: u64, name: &str) -> u64 {
    let digest = Sha256::digest(name.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    seed ^ u64::from_le_bytes(bytes)
}

/// Outcome of a dataset run. Failed sequences do not stop the others.
#[derive(Debug)]
pub struct DatasetOutcome {
    pub rendered: Vec<SequenceManifest>,
    pub failures: Vec<(String, FogError)>,
}

impl DatasetOutcome {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Sequence directories under `root`: those holding an image directory.
pub fn find_sequences(root: &Path) -> Result<Vec<PathBuf>> {
    let mut seqs = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| FogError::io(root, e))? {
        let path = entry.map_err(|e| FogError::io(root, e))?.path();
        if path.is_dir() && (path.join("img1").is_dir() || path.join("seqinfo.ini").is_file()) {
            seqs.push(path);
        }
    }
    seqs.sort();
    Ok(seqs)
}

/// Renders every sequence under `root` into `out_root`, each with seed
/// `cfg.seed XOR hash(name)`. Depth for sequence `S` is read from
/// `depth_root/S` when given, else from `S/depth`.
pub fn render_dataset(
    root: &Path,
    out_root: &Path,
    cfg: &FogConfig,
    depth_root: Option<&Path>,
) -> Result<DatasetOutcome> {
    cfg.validate()?;
    let seqs = find_sequences(root)?;
    if seqs.is_empty() {
        return Err(FogError::NoSequences(root.to_path_buf()));
    }
    let mut outcome = DatasetOutcome {
        rendered: Vec::new(),
        failures: Vec::new(),
    };
    for dir in seqs {
        let dir_name = file_name(&dir);
        let depth = depth_root.map(|d| d.join(&dir_name));
        let result = SequenceDescriptor::discover(&dir, depth.as_deref()).and_then(|seq| {
            let seq_cfg = FogConfig {
                seed: sequence_seed(cfg.seed, &seq.name),
                ..cfg.clone()
            };
            render_sequence(&seq, &seq_cfg, out_root)
        });
        match result {
            Ok(m) => outcome.rendered.push(m),
            Err(e) => {
                log::error!("sequence {dir_name} failed: {e}");
                outcome.failures.push((dir_name, e));
            }
        }
    }
    Ok(outcome)
}
