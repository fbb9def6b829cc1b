//! Depth map loading and conversion from relative inverse depth to
//! metric (or normalized) scene depth.
//!
//! Relative inverse depth is what monocular estimators produce: larger values
//! are closer, and the map is only known up to an unknown scale and shift.
//! Two reference distances (nearest and farthest point of the scene) pin both
//! down; without them the map is inverted into a normalized `[ε, 1]` depth.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{FogError, Result};
use crate::raster::Field;

/// Lower bound applied to normalized pseudo-depth so transmission stays < 1.
pub const PSEUDO_DEPTH_FLOOR: f64 = 1e-6;

/// On-disk depth encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthFormat {
    /// Single-channel Portable Float Map (`Pf`).
    Pfm,
    /// 16-bit grayscale PNG, normalized by 65535.
    Png16,
}

impl DepthFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "pfm" => Some(DepthFormat::Pfm),
            "png" => Some(DepthFormat::Png16),
            _ => None,
        }
    }
}

/// Unitless inverse depth `d(x)`; larger is closer.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeInverseDepth(Field);

impl RelativeInverseDepth {
    pub fn new(field: Field) -> Result<Self> {
        let bad = field.values().iter().filter(|v| !v.is_finite()).count();
        if bad > 0 {
            return Err(FogError::InvalidConfig(format!(
                "relative inverse depth has {bad} non-finite value(s)"
            )));
        }
        Ok(Self(field))
    }

    pub fn field(&self) -> &Field {
        &self.0
    }

    /// Min-max rescale so the closest pixel maps to 1 and the farthest to 0.
    /// A constant map becomes all 0.5.
    pub fn normalized(&self) -> RelativeInverseDepth {
        let (lo, hi) = self.0.min_max();
        if hi > lo {
            Self(self.0.map(|v| (v - lo) / (hi - lo)))
        } else {
            Self(self.0.map(|_| 0.5))
        }
    }
}

/// Per-pixel scene depth, strictly positive.
///
/// When `normalized` is set the values are unitless scene depth in
/// `[ε, 1]` rather than meters.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricDepth {
    field: Field,
    normalized: bool,
}

impl MetricDepth {
    pub fn meters(field: Field) -> Result<Self> {
        Self::checked(field, false)
    }

    pub fn normalized(field: Field) -> Result<Self> {
        Self::checked(field, true)
    }

    fn checked(field: Field, normalized: bool) -> Result<Self> {
        let count = field
            .values()
            .iter()
            .filter(|v| !(v.is_finite() && **v > 0.0))
            .count();
        if count > 0 {
            return Err(FogError::NonPositiveDepth { count });
        }
        Ok(Self { field, normalized })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_metric(&self) -> bool {
        !self.normalized
    }

    pub fn dims(&self) -> (usize, usize) {
        self.field.dims()
    }
}

/// Affine map from inverse depth to reciprocal metric depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthCalibration {
    pub scale: f64,
    pub shift: f64,
}

/// Nearest and farthest scene distances in meters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize, serde::Serialize)]
pub struct SceneReference {
    pub d_min: f64,
    pub d_max: f64,
}

impl SceneReference {
    pub fn new(d_min: f64, d_max: f64) -> Result<Self> {
        let r = Self { d_min, d_max };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_min.is_finite()
            && self.d_max.is_finite()
            && 0.0 < self.d_min
            && self.d_min < self.d_max)
        {
            return Err(FogError::InvalidReference {
                d_min: self.d_min,
                d_max: self.d_max,
            });
        }
        Ok(())
    }
}

pub fn calibrate(reference: &SceneReference) -> Result<DepthCalibration> {
    reference.validate()?;
    Ok(DepthCalibration {
        scale: 1.0 / reference.d_min - 1.0 / reference.d_max,
        shift: 1.0 / reference.d_max,
    })
}

/// `D(x) = 1 / (s·d(x) + t)`.
pub fn to_metric(depth: &RelativeInverseDepth, cal: &DepthCalibration) -> Result<MetricDepth> {
    let denom = depth.field().map(|d| cal.scale * d + cal.shift);
    let count = denom.values().iter().filter(|&&v| !(v > 0.0)).count();
    if count > 0 {
        return Err(FogError::NonPositiveDepth { count });
    }
    MetricDepth::meters(denom.map(|v| 1.0 / v))
}

/// Normalized depth produced without reference distances.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoDepth {
    pub depth: MetricDepth,
    /// Set when the input was constant and the output is a flat 0.5.
    pub degenerate: bool,
}

/// `P(x) = 1 − (d(x) − min) / (max − min)`, floored at [`PSEUDO_DEPTH_FLOOR`].
pub fn to_pseudo_depth(depth: &RelativeInverseDepth) -> PseudoDepth {
    let field = depth.field();
    let (lo, hi) = field.min_max();
    if hi > lo {
        let span = hi - lo;
        let p = field.map(|d| (1.0 - (d - lo) / span).max(PSEUDO_DEPTH_FLOOR));
        PseudoDepth {
            depth: MetricDepth::normalized(p).expect("floored values are positive"),
            degenerate: false,
        }
    } else {
        log::warn!("constant depth map; using uniform pseudo-depth 0.5");
        PseudoDepth {
            depth: MetricDepth::normalized(field.map(|_| 0.5)).expect("0.5 is positive"),
            degenerate: true,
        }
    }
}

pub fn load_depth(path: &Path, format: DepthFormat) -> Result<RelativeInverseDepth> {
    let field = match format {
        DepthFormat::Pfm => {
            let bytes = fs::read(path).map_err(|e| FogError::io(path, e))?;
            parse_pfm(path, &bytes)?
        }
        DepthFormat::Png16 => load_png16(path)?,
    };
    let count = field.values().iter().filter(|v| !v.is_finite()).count();
    if count > 0 {
        return Err(FogError::NonFiniteDepth {
            path: path.to_path_buf(),
            count,
        });
    }
    Ok(RelativeInverseDepth(field))
}

fn load_png16(path: &Path) -> Result<Field> {
    let img = image::open(path).map_err(|e| FogError::image(path, e))?;
    let channels = img.color().channel_count() as usize;
    if channels != 1 {
        return Err(FogError::MultiChannelDepth {
            path: path.to_path_buf(),
            channels,
        });
    }
    let gray = match img {
        image::DynamicImage::ImageLuma16(g) => g,
        other => {
            return Err(FogError::MalformedDepth {
                path: path.to_path_buf(),
                reason: format!("expected 16-bit grayscale, found {:?}", other.color()),
            })
        }
    };
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    let values = gray.as_raw().iter().map(|&v| v as f64 / 65535.0).collect();
    Field::new(w, h, values)
}

fn parse_pfm(path: &Path, bytes: &[u8]) -> Result<Field> {
    let malformed = |reason: &str| FogError::MalformedDepth {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };

    // Header is three whitespace-separated tokens after the magic, then a
    // single whitespace byte before the raster.
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(malformed("truncated header"));
        }
        tokens.push(
            std::str::from_utf8(&bytes[start..pos]).map_err(|_| malformed("non-ascii header"))?,
        );
    }
    if pos >= bytes.len() {
        return Err(malformed("missing raster data"));
    }
    pos += 1;

    let channels = match tokens[0] {
        "Pf" => 1,
        "PF" => 3,
        _ => return Err(malformed("bad magic, expected Pf")),
    };
    if channels != 1 {
        return Err(FogError::MultiChannelDepth {
            path: path.to_path_buf(),
            channels,
        });
    }
    let width: usize = tokens[1].parse().map_err(|_| malformed("bad width"))?;
    let height: usize = tokens[2].parse().map_err(|_| malformed("bad height"))?;
    let scale: f32 = tokens[3].parse().map_err(|_| malformed("bad scale"))?;
    if width == 0 || height == 0 {
        return Err(malformed("zero dimension"));
    }
    if scale == 0.0 || !scale.is_finite() {
        return Err(malformed("scale must be non-zero"));
    }
    let little_endian = scale < 0.0;

    let raster = &bytes[pos..];
    let expected = width * height * 4;
    if raster.len() < expected {
        return Err(malformed("raster shorter than header dimensions"));
    }

    let mut values = vec![0.0f64; width * height];
    for (i, chunk) in raster[..expected].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        // PFM stores the bottom row first.
        let (x, file_row) = (i % width, i / width);
        let y = height - 1 - file_row;
        values[y * width + x] = v as f64;
    }
    Field::new(width, height, values)
}

/// Writes a little-endian single-channel PFM. Values are narrowed to `f32`.
pub fn write_pfm(path: &Path, field: &Field) -> Result<()> {
    let (w, h) = field.dims();
    let mut out = Vec::with_capacity(32 + w * h * 4);
    write!(out, "Pf\n{w} {h}\n-1.0\n").expect("write to vec");
    for y in (0..h).rev() {
        for x in 0..w {
            out.extend_from_slice(&(field.get(x, y) as f32).to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| FogError::io(path, e))
}

/// Writes a 16-bit grayscale PNG, clamping values to `[0, 1]`.
pub fn write_png16(path: &Path, field: &Field) -> Result<()> {
    let raw: Vec<u16> = field
        .values()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect();
    let img = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(
        field.width() as u32,
        field.height() as u32,
        raw,
    )
    .expect("buffer size matches dimensions");
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| FogError::image(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn field(w: usize, h: usize, v: &[f64]) -> Field {
        Field::new(w, h, v.to_vec()).unwrap()
    }

    fn rid(w: usize, h: usize, v: &[f64]) -> RelativeInverseDepth {
        RelativeInverseDepth::new(field(w, h, v)).unwrap()
    }

    fn pfm_bytes(w: usize, h: usize, scale: &str, rows_bottom_up: &[f32], le: bool) -> Vec<u8> {
        let mut out = format!("Pf\n{w} {h}\n{scale}\n").into_bytes();
        for v in rows_bottom_up {
            if le {
                out.extend_from_slice(&v.to_le_bytes());
            } else {
                out.extend_from_slice(&v.to_be_bytes());
            }
        }
        out
    }

    #[test]
    fn pfm_is_flipped_to_top_down() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.pfm");
        // Top-down image [[1,2],[3,4]] stored bottom row first.
        fs::write(&path, pfm_bytes(2, 2, "-1.0", &[3.0, 4.0, 1.0, 2.0], true)).unwrap();
        let d = load_depth(&path, DepthFormat::Pfm).unwrap();
        assert_eq!(d.field().values(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn pfm_big_endian_honored() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.pfm");
        fs::write(&path, pfm_bytes(2, 1, "1.0", &[0.25, 8.5], false)).unwrap();
        let d = load_depth(&path, DepthFormat::Pfm).unwrap();
        assert_eq!(d.field().values(), &[0.25, 8.5]);
    }

    #[test]
    fn pfm_nan_is_rejected_with_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.pfm");
        fs::write(
            &path,
            pfm_bytes(2, 2, "-1.0", &[1.0, f32::NAN, 3.0, 4.0], true),
        )
        .unwrap();
        match load_depth(&path, DepthFormat::Pfm) {
            Err(FogError::NonFiniteDepth { count, .. }) => assert_eq!(count, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pfm_color_and_truncated_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let color = dir.path().join("c.pfm");
        let mut bytes = b"PF\n1 1\n-1.0\n".to_vec();
        bytes.extend_from_slice(&[0u8; 12]);
        fs::write(&color, bytes).unwrap();
        assert!(matches!(
            load_depth(&color, DepthFormat::Pfm),
            Err(FogError::MultiChannelDepth { channels: 3, .. })
        ));

        let short = dir.path().join("s.pfm");
        fs::write(&short, pfm_bytes(2, 2, "-1.0", &[1.0, 2.0], true)).unwrap();
        assert!(matches!(
            load_depth(&short, DepthFormat::Pfm),
            Err(FogError::MalformedDepth { .. })
        ));

        let missing = dir.path().join("missing.pfm");
        assert!(matches!(
            load_depth(&missing, DepthFormat::Pfm),
            Err(FogError::Io { .. })
        ));
    }

    #[test]
    fn png16_full_scale_is_one() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.png");
        write_png16(&path, &Field::filled(3, 2, 1.0)).unwrap();
        let d = load_depth(&path, DepthFormat::Png16).unwrap();
        assert!(d.field().values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn png_rgb_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        image::RgbImage::new(2, 2).save(&path).unwrap();
        assert!(matches!(
            load_depth(&path, DepthFormat::Png16),
            Err(FogError::MultiChannelDepth { channels: 3, .. })
        ));
    }

    #[test]
    fn calibration_examples() {
        let c = calibrate(&SceneReference {
            d_min: 2.0,
            d_max: 100.0,
        })
        .unwrap();
        assert_relative_eq!(c.scale, 0.49, epsilon = 1e-12);
        assert_relative_eq!(c.shift, 0.01, epsilon = 1e-12);
        let c = calibrate(&SceneReference {
            d_min: 5.0,
            d_max: 50.0,
        })
        .unwrap();
        assert_relative_eq!(c.scale, 0.18, epsilon = 1e-12);
        assert_relative_eq!(c.shift, 0.02, epsilon = 1e-12);
        assert!(matches!(
            calibrate(&SceneReference {
                d_min: 10.0,
                d_max: 10.0
            }),
            Err(FogError::InvalidReference { .. })
        ));
        assert!(SceneReference::new(0.0, 3.0).is_err());
    }

    #[test]
    fn to_metric_examples() {
        let cal = DepthCalibration {
            scale: 0.49,
            shift: 0.01,
        };
        let m = to_metric(&rid(2, 1, &[1.0, 0.0]), &cal).unwrap();
        assert_relative_eq!(m.field().values()[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(m.field().values()[1], 100.0, max_relative = 1e-12);
        assert!(m.is_metric());

        let cal = DepthCalibration {
            scale: 0.5,
            shift: 0.1,
        };
        assert!(matches!(
            to_metric(&rid(1, 1, &[-1.0]), &cal),
            Err(FogError::NonPositiveDepth { count: 1 })
        ));
    }

    #[test]
    fn pseudo_depth_examples() {
        let p = to_pseudo_depth(&rid(3, 1, &[0.0, 5.0, 10.0]));
        assert!(!p.degenerate);
        assert!(!p.depth.is_metric());
        assert_eq!(p.depth.field().values(), &[1.0, 0.5, 1e-6]);

        let p = to_pseudo_depth(&rid(2, 2, &[3.0; 4]));
        assert!(p.degenerate);
        assert!(p.depth.field().values().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn pseudo_depth_matches_two_pass_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let values: Vec<f64> = (0..64).map(|_| rng.gen_range(-3.0..12.0)).collect();
        let p = to_pseudo_depth(&rid(8, 8, &values));

        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for &v in &values {
            if v < lo {
                lo = v;
            }
            if v > hi {
                hi = v;
            }
        }
        for (i, &v) in values.iter().enumerate() {
            let mut expected = (hi - v) / (hi - lo);
            if expected < 1e-6 {
                expected = 1e-6;
            }
            assert_relative_eq!(p.depth.field().values()[i], expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn normalized_inverse_depth_spans_unit_interval() {
        let n = rid(3, 1, &[2.0, 4.0, 6.0]).normalized();
        assert_eq!(n.field().values(), &[0.0, 0.5, 1.0]);
        let flat = rid(2, 1, &[1.0, 1.0]).normalized();
        assert_eq!(flat.field().values(), &[0.5, 0.5]);
    }

    proptest! {
        #[test]
        fn calibration_endpoints(d_min in 0.1f64..50.0, extra in 0.01f64..500.0) {
            let d_max = d_min + extra;
            let cal = calibrate(&SceneReference { d_min, d_max }).unwrap();
            let m = to_metric(&rid(2, 1, &[1.0, 0.0]), &cal).unwrap();
            let v = m.field().values();
            prop_assert!(((v[0] - d_min) / d_min).abs() < 1e-9);
            prop_assert!(((v[1] - d_max) / d_max).abs() < 1e-9);
        }

        #[test]
        fn to_metric_is_decreasing(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!(a < b);
            let cal = calibrate(&SceneReference { d_min: 3.0, d_max: 80.0 }).unwrap();
            let m = to_metric(&rid(2, 1, &[a, b]), &cal).unwrap();
            prop_assert!(m.field().values()[0] > m.field().values()[1]);
        }

        #[test]
        fn pseudo_depth_bounded_and_order_reversing(values in proptest::collection::vec(-100.0f64..100.0, 2..40)) {
            let n = values.len();
            let p = to_pseudo_depth(&rid(n, 1, &values));
            let out = p.depth.field().values();
            for i in 0..n {
                prop_assert!(out[i] >= 1e-6 && out[i] <= 1.0);
                for j in 0..n {
                    if values[i] < values[j] {
                        prop_assert!(out[i] >= out[j]);
                    }
                }
            }
        }

        #[test]
        fn pfm_round_trip_bit_exact(raw in proptest::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), 6)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.pfm");
            let f = Field::new(3, 2, raw.iter().map(|&v| v as f64).collect()).unwrap();
            write_pfm(&path, &f).unwrap();
            let once = load_depth(&path, DepthFormat::Pfm).unwrap();
            let path2 = dir.path().join("rt2.pfm");
            write_pfm(&path2, once.field()).unwrap();
            prop_assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
            for (a, b) in once.field().values().iter().zip(&raw) {
                prop_assert_eq!((*a as f32).to_bits(), b.to_bits());
            }
        }
    }
}
