//! Koschmieder fog: attenuation from visibility, exponential transmission,
//! and airlight compositing.

use crate::depthio::MetricDepth;
use crate::error::{FogError, Result};
use crate::raster::{Field, RasterImage};

/// Contrast threshold of the human eye at the visibility distance.
pub const CONTRAST_THRESHOLD: f64 = 0.05;

/// Optical thickness at the farthest (normalized depth 1) pixel for fog
/// levels 1 through 4.
pub const DEFAULT_LEVEL_LADDER: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

/// Extinction coefficient of the fog medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attenuation {
    beta: f64,
    visibility: Option<f64>,
}

impl Attenuation {
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(FogError::InvalidConfig(format!(
                "attenuation must be positive, got {beta}"
            )));
        }
        Ok(Self {
            beta,
            visibility: None,
        })
    }

    /// Zero attenuation. Only reachable through explicit overrides and the
    /// clear baseline of evaluation sweeps.
    pub(crate) fn none() -> Self {
        Self {
            beta: 0.0,
            visibility: None,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn visibility(&self) -> Option<f64> {
        self.visibility
    }
}

/// `β = −ln(0.05) / V`.
pub fn beta_from_visibility(visibility: f64) -> Result<Attenuation> {
    if !(visibility > 0.0) || !visibility.is_finite() {
        return Err(FogError::InvalidVisibility(visibility));
    }
    Ok(Attenuation {
        beta: -CONTRAST_THRESHOLD.ln() / visibility,
        visibility: Some(visibility),
    })
}

/// Attenuation for an abstract fog level on depth whose farthest point
/// sits at `far_depth`.
pub fn beta_from_level(level: u8, ladder: &[f64; 4], far_depth: f64) -> Result<Attenuation> {
    if !(1..=4).contains(&level) {
        return Err(FogError::InvalidConfig(format!(
            "fog level must be 1..=4, got {level}"
        )));
    }
    if !(far_depth > 0.0) {
        return Err(FogError::InvalidConfig(format!(
            "far depth must be positive, got {far_depth}"
        )));
    }
    Attenuation::from_beta(ladder[level as usize - 1] / far_depth)
}

/// Fraction of scene radiance reaching the camera, per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMap(Field);

impl TransmissionMap {
    pub fn new(field: Field) -> Result<Self> {
        let bad = field
            .values()
            .iter()
            .filter(|&&v| !(v > 0.0 && v <= 1.0))
            .count();
        if bad > 0 {
            return Err(FogError::InvalidConfig(format!(
                "{bad} transmission value(s) outside (0, 1]"
            )));
        }
        Ok(Self(field))
    }

    /// Transmission 1 everywhere.
    pub fn clear(width: usize, height: usize) -> Self {
        Self(Field::filled(width, height, 1.0))
    }

    /// Builds a map without range checks. Values of exactly 0 arise when
    /// `exp` underflows and are tolerated by [`composite`].
    pub(crate) fn from_field_unchecked(field: Field) -> Self {
        Self(field)
    }

    pub fn field(&self) -> &Field {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn mean(&self) -> f64 {
        self.0.mean()
    }
}

/// Color of light scattered in from the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphericLight([f32; 3]);

impl AtmosphericLight {
    pub fn new(color: [f32; 3]) -> Result<Self> {
        if color.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(FogError::InvalidConfig(format!(
                "atmospheric light {color:?} outside [0, 1]"
            )));
        }
        Ok(Self(color))
    }

    pub fn color(&self) -> [f32; 3] {
        self.0
    }
}

/// `T(x) = exp(−β·D(x))`.
pub fn transmission(depth: &MetricDepth, att: &Attenuation) -> TransmissionMap {
    let beta = att.beta;
    TransmissionMap::from_field_unchecked(depth.field().map(|d| (-beta * d).exp()))
}

/// `I(x) = I0(x)·T(x) + L∞·(1 − T(x))`, channelwise, clamped to `[0, 1]`.
pub fn composite(
    clear: &RasterImage,
    t: &TransmissionMap,
    light: &AtmosphericLight,
) -> Result<RasterImage> {
    t.field().ensure_dims("transmission map", clear.dims())?;
    let l = light.color();
    let mut out = Vec::with_capacity(clear.data().len());
    for (px, &tx) in clear.pixels().zip(t.field().values()) {
        for c in 0..3 {
            // L + (I0 − L)·T keeps the result inside [min, max] of the two
            // endpoints under rounding and is exact at T = 0 and T = 1.
            let airlight = l[c] as f64;
            let v = airlight + (px[c] as f64 - airlight) * tx;
            out.push(v.clamp(0.0, 1.0) as f32);
        }
    }
    RasterImage::new(clear.width(), clear.height(), out)
}
