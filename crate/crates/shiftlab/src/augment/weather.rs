//! Rule-based weather simulation: rain streaks, snow flecks with global
//! whitening, fractal fog, and sunshine glare. Recipes are parameterized
//! by a 1..=5 severity; snow, fog and sunshine only brighten.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{resize_mask, Image, Mask, CHANNELS};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum WeatherCondition {
    Rain,
    Snow,
    Fog,
    Sunshine,
}

impl WeatherCondition {
    pub const ALL: [WeatherCondition; 4] = [
        WeatherCondition::Rain,
        WeatherCondition::Snow,
        WeatherCondition::Fog,
        WeatherCondition::Sunshine,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeatherKind {
    pub condition: WeatherCondition,
    /// Severity in 1..=5.
    pub severity: u8,
}

impl WeatherKind {
    pub fn new(condition: WeatherCondition, severity: u8) -> Result<Self> {
        if !(1..=5).contains(&severity) {
            return Err(Error::contract(format!(
                "weather severity {severity} outside 1..=5"
            )));
        }
        Ok(WeatherKind {
            condition,
            severity,
        })
    }
}

/// Peak blend weight toward white used by fog at a given severity.
pub fn fog_blend_weight(severity: u8) -> f64 {
    0.10 + 0.12 * f64::from(severity)
}

/// Peak additive intensity of the sunshine glare.
pub fn glare_amplitude(severity: u8) -> f64 {
    0.12 * f64::from(severity)
}

/// Multiplicative brightness gain applied by sunshine.
pub fn sunshine_gain(severity: u8) -> f64 {
    1.0 + 0.05 * f64::from(severity)
}

/// Apply a weather condition. Deterministic under a fixed rng state.
pub fn weather(img: &Image, kind: WeatherKind, rng: &mut Stream) -> Image {
    debug_assert!((1..=5).contains(&kind.severity));
    match kind.condition {
        WeatherCondition::Rain => rain(img, kind.severity, rng),
        WeatherCondition::Snow => snow(img, kind.severity, rng),
        WeatherCondition::Fog => fog(img, kind.severity, rng),
        WeatherCondition::Sunshine => sunshine(img, kind.severity, rng),
    }
}

/// Screen-blend an anti-aliased capsule (a segment with rounded caps of
/// `radius`) toward white at `opacity`.
fn draw_capsule(img: &mut Image, p0: (f64, f64), p1: (f64, f64), radius: f64, opacity: f32) {
    let (h, w) = (img.height() as i64, img.width() as i64);
    let pad = radius + 1.0;
    let y_lo = (p0.0.min(p1.0) - pad).floor().max(0.0) as i64;
    let y_hi = (p0.0.max(p1.0) + pad).ceil().min((h - 1) as f64) as i64;
    let x_lo = (p0.1.min(p1.1) - pad).floor().max(0.0) as i64;
    let x_hi = (p0.1.max(p1.1) + pad).ceil().min((w - 1) as f64) as i64;
    let seg = (p1.0 - p0.0, p1.1 - p0.1);
    let len_sq = seg.0 * seg.0 + seg.1 * seg.1;
    for y in y_lo..=y_hi {
        for x in x_lo..=x_hi {
            let rel = (y as f64 - p0.0, x as f64 - p0.1);
            let t = if len_sq > 0.0 {
                ((rel.0 * seg.0 + rel.1 * seg.1) / len_sq).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let dy = rel.0 - t * seg.0;
            let dx = rel.1 - t * seg.1;
            let dist = (dy * dy + dx * dx).sqrt();
            let cov = (radius + 0.5 - dist).clamp(0.0, 1.0) as f32;
            if cov > 0.0 {
                for c in 0..CHANNELS {
                    let v = img.get(y as usize, x as usize, c);
                    img.set(y as usize, x as usize, c, v + cov * opacity * (1.0 - v));
                }
            }
        }
    }
}

fn rain(img: &Image, severity: u8, rng: &mut Stream) -> Image {
    let mut out = img.clone();
    let (h, w) = (img.height() as f64, img.width() as f64);
    // One slant per shower; all streaks fall the same way.
    let slant: f64 = rng.random_range(0.15..0.45) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let count = 10 * usize::from(severity);
    for _ in 0..count {
        let y0 = rng.random_range(0.0..h);
        let x0 = rng.random_range(0.0..w);
        let len = rng.random_range(0.20..0.35) * h;
        let p1 = (y0 + len * slant.cos(), x0 + len * slant.sin());
        let opacity = (0.25 + 0.06 * f64::from(severity) + rng.random_range(0.0..0.15)) as f32;
        draw_capsule(&mut out, (y0, x0), p1, 0.6, opacity);
    }
    out
}

fn snow(img: &Image, severity: u8, rng: &mut Stream) -> Image {
    let mut out = img.clone();
    let (h, w) = (img.height() as f64, img.width() as f64);
    // Global whitening first, then motion-blurred flecks.
    let beta = (0.05 + 0.04 * f64::from(severity - 1)) as f32;
    for y in 0..out.height() {
        for x in 0..out.width() {
            for c in 0..CHANNELS {
                let v = out.get(y, x, c);
                out.set(y, x, c, v + beta * (1.0 - v));
            }
        }
    }
    let drift = rng.random_range(-0.5..0.5f64);
    let count = 15 * usize::from(severity);
    let motion = 1.0 + 0.5 * f64::from(severity);
    for _ in 0..count {
        let y0 = rng.random_range(0.0..h);
        let x0 = rng.random_range(0.0..w);
        let radius = rng.random_range(0.5..1.2);
        let p1 = (y0 + motion * drift.cos(), x0 + motion * drift.sin());
        let opacity = (0.40 + 0.04 * f64::from(severity) + rng.random_range(0.0..0.2)) as f32;
        draw_capsule(&mut out, (y0, x0), p1, radius, opacity);
    }
    out
}

/// Midpoint-displacement (diamond-square) haze field, min-max normalized
/// to [0, 1].
fn haze_field(side: usize, rng: &mut Stream) -> Vec<f64> {
    let mut k = 0usize;
    while (1usize << k) + 1 < side {
        k += 1;
    }
    let grid = (1usize << k) + 1;
    let mut field = vec![0.0f64; grid * grid];
    let idx = |y: usize, x: usize| y * grid + x;
    for &(y, x) in &[(0, 0), (0, grid - 1), (grid - 1, 0), (grid - 1, grid - 1)] {
        field[idx(y, x)] = rng.random_range(0.0..1.0);
    }
    let mut step = grid - 1;
    let mut amp = 0.5f64;
    while step > 1 {
        let half = step / 2;
        // Diamond step.
        for y in (half..grid).step_by(step) {
            for x in (half..grid).step_by(step) {
                let avg = (field[idx(y - half, x - half)]
                    + field[idx(y - half, x + half)]
                    + field[idx(y + half, x - half)]
                    + field[idx(y + half, x + half)])
                    / 4.0;
                field[idx(y, x)] = avg + rng.random_range(-amp..amp);
            }
        }
        // Square step.
        for y in (0..grid).step_by(half) {
            let x_start = if (y / half) % 2 == 0 { half } else { 0 };
            for x in (x_start..grid).step_by(step) {
                let mut sum = 0.0;
                let mut n = 0.0;
                if y >= half {
                    sum += field[idx(y - half, x)];
                    n += 1.0;
                }
                if y + half < grid {
                    sum += field[idx(y + half, x)];
                    n += 1.0;
                }
                if x >= half {
                    sum += field[idx(y, x - half)];
                    n += 1.0;
                }
                if x + half < grid {
                    sum += field[idx(y, x + half)];
                    n += 1.0;
                }
                field[idx(y, x)] = sum / n + rng.random_range(-amp..amp);
            }
        }
        step = half;
        amp *= 0.55;
    }
    let lo = field.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = field.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-12 {
        field.iter_mut().for_each(|v| *v = 0.5);
    } else {
        field.iter_mut().for_each(|v| *v = (*v - lo) / (hi - lo));
    }
    let mask = Mask::from_parts(grid, grid, field.iter().map(|&v| v as f32).collect());
    let resized = resize_mask(&mask, side, side).expect("positive resize target");
    resized.data().iter().map(|&v| f64::from(v)).collect()
}

fn fog(img: &Image, severity: u8, rng: &mut Stream) -> Image {
    let side = img.height().max(img.width());
    let field = haze_field(side, rng);
    let w_max = fog_blend_weight(severity) as f32;
    let mut out = img.clone();
    for y in 0..out.height() {
        for x in 0..out.width() {
            let wf = w_max * field[y * side + x] as f32;
            for c in 0..CHANNELS {
                let v = out.get(y, x, c);
                out.set(y, x, c, v + wf * (1.0 - v));
            }
        }
    }
    out
}

fn sunshine(img: &Image, severity: u8, rng: &mut Stream) -> Image {
    let (h, w) = (img.height(), img.width());
    // Glare centered on a pixel in the upper third of the frame.
    let cy = rng.random_range(0..(h / 3).max(1)) as f64;
    let cx = rng.random_range(0..w) as f64;
    let amp = glare_amplitude(severity) as f32;
    let gain = sunshine_gain(severity) as f32;
    let sigma = 0.35 * h.min(w) as f64;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let d2 = (y as f64 - cy).powi(2) + (x as f64 - cx).powi(2);
            let glare = amp * (-d2 * inv).exp() as f32;
            for c in 0..CHANNELS {
                out.set(y, x, c, gain * img.get(y, x, c) + glare);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rng(seed: u64) -> Stream {
        crate::rng::stream(seed, "weather-test")
    }

    fn random_image(seed: u64) -> Image {
        let mut r = rng(seed);
        Image::from_fn(16, 16, |_, _, _| r.random::<f32>()).unwrap()
    }

    #[test]
    fn fog_on_white_stays_white() {
        let img = Image::constant(16, 16, 1.0).unwrap();
        let kind = WeatherKind::new(WeatherCondition::Fog, 1).unwrap();
        let out = weather(&img, kind, &mut rng(1));
        assert!(out.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn fog_respects_the_pointwise_lower_bound() {
        for severity in 1..=5u8 {
            let img = random_image(u64::from(severity));
            let kind = WeatherKind::new(WeatherCondition::Fog, severity).unwrap();
            let out = weather(&img, kind, &mut rng(30 + u64::from(severity)));
            let w_max = fog_blend_weight(severity) as f32;
            for (o, i) in out.data().iter().zip(img.data()) {
                assert!(*o >= (1.0 - w_max) * i - 1e-6);
            }
        }
    }

    #[test]
    fn sunshine_peak_on_black_matches_the_radial_profile() {
        // On an all-zero image the output is exactly the glare profile,
        // whose closed-form peak is the amplitude at the glare center.
        let img = Image::zeros(16, 16).unwrap();
        let kind = WeatherKind::new(WeatherCondition::Sunshine, 5).unwrap();
        let out = weather(&img, kind, &mut rng(2));
        let max = out.data().iter().cloned().fold(0.0f32, f32::max);
        assert!((max - glare_amplitude(5) as f32).abs() < 1e-6);
    }

    #[test]
    fn snow_fog_sunshine_only_brighten() {
        for (i, cond) in [
            WeatherCondition::Snow,
            WeatherCondition::Fog,
            WeatherCondition::Sunshine,
        ]
        .into_iter()
        .enumerate()
        {
            for severity in [1u8, 3, 5] {
                let img = random_image(100 + i as u64);
                let kind = WeatherKind::new(cond, severity).unwrap();
                let out = weather(&img, kind, &mut rng(7 + severity as u64));
                assert!(
                    out.mean() >= img.mean() - 1e-9,
                    "{cond:?} at severity {severity} darkened the image"
                );
            }
        }
    }

    #[test]
    fn weather_is_deterministic_under_a_fixed_seed() {
        let img = random_image(42);
        for cond in WeatherCondition::ALL {
            let kind = WeatherKind::new(cond, 3).unwrap();
            let a = weather(&img, kind, &mut rng(9));
            let b = weather(&img, kind, &mut rng(9));
            assert_eq!(a, b);
            assert!(a.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn severity_out_of_range_is_rejected() {
        assert!(WeatherKind::new(WeatherCondition::Rain, 0).is_err());
        assert!(WeatherKind::new(WeatherCondition::Rain, 6).is_err());
    }
}
