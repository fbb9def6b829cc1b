//! Perlin turbulence for heterogeneous fog density.

use crate::depthio::MetricDepth;
use crate::error::{FogError, Result};
use crate::fogmodel::{Attenuation, TransmissionMap};
use crate::raster::Field;

pub const DEFAULT_OCTAVES: u32 = 5;
pub const DEFAULT_BRIGHTNESS: f64 = 0.8;
/// Lattice cells along the shorter image axis for the first octave.
pub const BASE_CELLS: u32 = 4;
/// Lowest density multiplier after normalization.
pub const TAU_FLOOR: f64 = 0.2;

/// Gradient noise sampled on the pixel grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseField(Field);

impl NoiseField {
    pub fn field(&self) -> &Field {
        &self.0
    }
}

/// Density multiplier `τ(x)` applied to depth before attenuation.
#[derive(Debug, Clone, PartialEq)]
pub struct TurbulenceMap {
    field: Field,
    octaves: u32,
    brightness: f64,
}

impl TurbulenceMap {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn octaves(&self) -> u32 {
        self.octaves
    }

    pub fn brightness(&self) -> f64 {
        self.brightness
    }

    pub fn dims(&self) -> (usize, usize) {
        self.field.dims()
    }

    pub fn sha256_hex(&self) -> String {
        self.field.sha256_hex()
    }

    /// A neutral multiplier of 1 everywhere.
    pub fn uniform(width: usize, height: usize) -> Self {
        Self {
            field: Field::filled(width, height, 1.0),
            octaves: 0,
            brightness: 1.0,
        }
    }
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Unit gradient at lattice corner `(ix, iy)`.
fn gradient(seed: u64, ix: i64, iy: i64) -> (f64, f64) {
    let h = mix64(
        mix64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15))
            ^ mix64(ix as u64).rotate_left(17)
            ^ mix64((iy as u64) ^ 0x5851_f42d_4c95_7f2d),
    );
    let angle = (h >> 11) as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU;
    (angle.cos(), angle.sin())
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

fn noise_at(seed: u64, u: f64, v: f64) -> f64 {
    let (x0, y0) = (u.floor(), v.floor());
    let (fx, fy) = (u - x0, v - y0);
    let (ix, iy) = (x0 as i64, y0 as i64);
    let corner = |cx: i64, cy: i64, dx: f64, dy: f64| {
        let (gx, gy) = gradient(seed, cx, cy);
        gx * dx + gy * dy
    };
    let n00 = corner(ix, iy, fx, fy);
    let n10 = corner(ix + 1, iy, fx - 1.0, fy);
    let n01 = corner(ix, iy + 1, fx, fy - 1.0);
    let n11 = corner(ix + 1, iy + 1, fx - 1.0, fy - 1.0);
    let (sx, sy) = (fade(fx), fade(fy));
    lerp(lerp(n00, n10, sx), lerp(n01, n11, sx), sy)
}

/// Classic 2D gradient noise.
///
/// `cells` lattice cells span the shorter image axis; cells are square, so
/// the longer axis holds proportionally more. Pixel `(x, y)` samples the
/// lattice at `(x, y) · cells / min(width, height)`, which puts every pixel
/// whose coordinates are multiples of the cell size exactly on a corner,
/// where the noise is 0.
pub fn perlin(width: usize, height: usize, cells: u32, seed: u64) -> NoiseField {
    assert!(cells >= 1 && width >= 1 && height >= 1);
    let short = width.min(height) as f64;
    let cells = cells as u64;
    let field = Field::from_fn(width, height, |x, y| {
        let u = (x as u64 * cells) as f64 / short;
        let v = (y as u64 * cells) as f64 / short;
        noise_at(seed, u, v)
    });
    NoiseField(field)
}

/// `Σ_{n=1..N} P_n(x) / 2^n`, octave `n` using `BASE_CELLS · 2^(n−1)` cells
/// and seed `seed + n`.
pub fn octave_sum(width: usize, height: usize, octaves: u32, seed: u64) -> NoiseField {
    let mut acc = vec![0f64; width * height];
    for n in 1..=octaves {
        let cells = BASE_CELLS << (n - 1);
        let layer = perlin(width, height, cells, seed.wrapping_add(n as u64));
        let amplitude = 0.5f64.powi(n as i32);
        for (a, v) in acc.iter_mut().zip(layer.field().values()) {
            *a += v * amplitude;
        }
    }
    NoiseField(Field::new(width, height, acc).expect("dimensions preserved"))
}

/// Normalized turbulence texture spanning `[TAU_FLOOR, brightness]`.
pub fn turbulence_texture(
    width: usize,
    height: usize,
    octaves: u32,
    seed: u64,
    brightness: f64,
) -> Result<TurbulenceMap> {
    if octaves == 0 {
        return Err(FogError::InvalidConfig("octaves must be >= 1".into()));
    }
    if !(brightness > 0.0 && brightness <= 1.0) {
        return Err(FogError::InvalidConfig(format!(
            "brightness must be in (0, 1], got {brightness}"
        )));
    }
    if width == 0 || height == 0 {
        return Err(FogError::InvalidConfig("empty texture".into()));
    }
    let raw = octave_sum(width, height, octaves, seed);
    let (lo, hi) = raw.field().min_max();
    if !(hi > lo) {
        return Err(FogError::DegenerateTexture);
    }
    let span = hi - lo;
    let field = raw
        .field()
        .map(|v| TAU_FLOOR + (brightness - TAU_FLOOR) * ((v - lo) / span));
    Ok(TurbulenceMap {
        field,
        octaves,
        brightness,
    })
}

/// `T(x) = exp(−β·τ(x)·D(x))`.
pub fn heterogeneous_transmission(
    depth: &MetricDepth,
    tau: &TurbulenceMap,
    att: &Attenuation,
) -> Result<TransmissionMap> {
    tau.field().ensure_dims("turbulence map", depth.dims())?;
    let beta = att.beta();
    let values = depth
        .field()
        .values()
        .iter()
        .zip(tau.field().values())
        .map(|(&d, &t)| (-beta * t * d).exp())
        .collect();
    let (w, h) = depth.dims();
    Ok(TransmissionMap::from_field_unchecked(
        Field::new(w, h, values).expect("dimensions preserved"),
    ))
}
