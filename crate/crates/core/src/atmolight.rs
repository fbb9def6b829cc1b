//! Atmospheric light estimation.
//!
//! The dark channel of an image is the patchwise minimum over all color
//! channels. Haze-free regions have a dark channel near zero, so its
//! brightest locations point at the airlight. When the sky is visible the
//! farthest pixels in the depth map serve the same purpose.

use crate::depthio::MetricDepth;
use crate::error::{FogError, Result};
use crate::fogmodel::AtmosphericLight;
use crate::raster::{Field, RasterImage};

pub const DEFAULT_PATCH: usize = 10;
pub const DEFAULT_TOP_FRACTION: f64 = 0.10;
pub const DEFAULT_FAR_FRACTION: f64 = 0.05;

/// Edge length of the square dark-channel window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchSpec(usize);

impl PatchSpec {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(FogError::InvalidConfig("patch size must be >= 1".into()));
        }
        Ok(Self(size))
    }

    pub fn size(&self) -> usize {
        self.0
    }

    /// Offsets `(before, after)` covered around the center pixel. Even sizes
    /// extend one pixel further toward lower indices.
    pub fn reach(&self) -> (usize, usize) {
        let before = self.0 / 2;
        (before, self.0 - 1 - before)
    }
}

impl Default for PatchSpec {
    fn default() -> Self {
        Self(DEFAULT_PATCH)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarkChannelMap(Field);

impl DarkChannelMap {
    pub fn field(&self) -> &Field {
        &self.0
    }
}

/// Windowed minimum over space and color, with the window clamped at
/// image borders.
pub fn dark_channel(img: &RasterImage, patch: PatchSpec) -> DarkChannelMap {
    let (w, h) = img.dims();
    let (before, after) = patch.reach();

    let channel_min: Vec<f32> = img.pixels().map(|p| p[0].min(p[1]).min(p[2])).collect();

    // Separable: a clamped square window is the product of two clamped
    // intervals, so row minima followed by column minima give the same result.
    let mut rows = vec![0f32; w * h];
    for y in 0..h {
        let line = &channel_min[y * w..(y + 1) * w];
        for x in 0..w {
            let lo = x.saturating_sub(before);
            let hi = (x + after).min(w - 1);
            rows[y * w + x] = line[lo..=hi].iter().copied().fold(f32::INFINITY, f32::min);
        }
    }
    let mut values = vec![0f64; w * h];
    for x in 0..w {
        for y in 0..h {
            let lo = y.saturating_sub(before);
            let hi = (y + after).min(h - 1);
            let m = (lo..=hi)
                .map(|yy| rows[yy * w + x])
                .fold(f32::INFINITY, f32::min);
            values[y * w + x] = m as f64;
        }
    }
    DarkChannelMap(Field::new(w, h, values).expect("dimensions preserved"))
}

/// Number of pixels selected by a fraction of `total`, rounded up.
pub(crate) fn selection_count(fraction: f64, total: usize) -> usize {
    // Guard against products such as 0.1 * 70 landing a hair above an integer.
    let raw = fraction * total as f64;
    let n = (raw - raw.abs() * 1e-12).ceil() as usize;
    n.clamp(1, total)
}

fn check_fraction(name: &str, fraction: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(FogError::InvalidConfig(format!(
            "{name} must be in (0, 1], got {fraction}"
        )));
    }
    Ok(())
}

/// Per-channel mean of the image colors at the `count` locations with the
/// largest `key`, ties resolved toward lower row-major index.
fn mean_of_top(img: &RasterImage, key: &[f64], count: usize) -> AtmosphericLight {
    let mut order: Vec<usize> = (0..key.len()).collect();
    // Stable sort keeps row-major order among equal keys.
    order.sort_by(|&a, &b| key[b].total_cmp(&key[a]));

    let mut sum = [0f64; 3];
    for &i in &order[..count] {
        let p = img.pixel_at(i);
        for c in 0..3 {
            sum[c] += p[c] as f64;
        }
    }
    let color = sum.map(|s| ((s / count as f64) as f32).clamp(0.0, 1.0));
    AtmosphericLight::new(color).expect("mean of [0,1] values")
}

/// Averages source colors at the brightest `top_fraction` of dark-channel
/// locations.
pub fn estimate_light_dcp(
    img: &RasterImage,
    patch: PatchSpec,
    top_fraction: f64,
) -> Result<AtmosphericLight> {
    check_fraction("top fraction", top_fraction)?;
    let dark = dark_channel(img, patch);
    let n = selection_count(top_fraction, img.pixel_count());
    Ok(mean_of_top(img, dark.field().values(), n))
}

/// Averages source colors at the deepest `far_fraction` of pixels.
pub fn estimate_light_sky(
    img: &RasterImage,
    depth: &MetricDepth,
    far_fraction: f64,
) -> Result<AtmosphericLight> {
    check_fraction("far fraction", far_fraction)?;
    depth.field().ensure_dims("depth map", img.dims())?;
    let n = selection_count(far_fraction, img.pixel_count());
    Ok(mean_of_top(img, depth.field().values(), n))
}
