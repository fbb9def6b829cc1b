//! Physics-based fog rendering for multi-object-tracking image sequences and
//! robustness evaluation with standard MOT metrics.
//!
//! Rendering follows the Koschmieder model: a per-pixel transmission
//! `T = exp(−β·D)` blends each clear pixel with the atmospheric light.
//! Heterogeneous fog scales depth by a Perlin turbulence texture before
//! attenuation.

pub mod atmolight;
pub mod depthio;
pub mod error;
pub mod evalharness;
pub mod fogmodel;
pub mod motmetrics;
pub mod pipeline;
pub mod raster;
pub mod turbulence;

pub use atmolight::{
    dark_channel, estimate_light_dcp, estimate_light_sky, DarkChannelMap, PatchSpec,
};
pub use depthio::{
    calibrate, load_depth, to_metric, to_pseudo_depth, DepthCalibration, DepthFormat, MetricDepth,
    RelativeInverseDepth, SceneReference,
};
pub use error::{FogError, Result};
pub use fogmodel::{
    beta_from_visibility, composite, transmission, AtmosphericLight, Attenuation, TransmissionMap,
};
pub use motmetrics::{BoundingBox, MetricReport, TrackRecord, TrackSet};

pub use pipeline::{
    render_dataset, render_sequence, FogConfig, FogMode, Intensity, LightStrategy,
    SequenceDescriptor,
};
pub use raster::{Field, RasterImage};
pub use turbulence::{
    heterogeneous_transmission, perlin, turbulence_texture, NoiseField, TurbulenceMap,
};

pub(crate) fn hex(bytes: &[u8]) -> String {
    use std::fmt::Write;
    bytes
        .iter()
        .fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}
