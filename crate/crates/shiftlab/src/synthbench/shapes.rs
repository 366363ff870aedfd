//! Polygon-based shape rendering and procedural textures.
//!
//! Every class renders as a polygon (circles use a fine approximation) so
//! one signed-distance routine covers all of them, including radially
//! wobbled variants and the random blobs used as task-unrelated
//! distractors. Coverage is anti-aliased from the distance field, and the
//! returned mask is exactly the coverage used to blend fill over
//! background.

use rand::Rng;

use crate::imaging::{Image, Mask, CHANNELS};
use crate::rng::Stream;

pub const CLASS_NAMES: [&str; 5] = ["circle", "square", "triangle", "star", "cross"];

/// Base outline of a class in unit space (fits in the unit circle).
pub fn class_polygon(class: usize) -> Vec<(f64, f64)> {
    match class {
        // Circle: fine regular polygon.
        0 => regular_polygon(40, 1.0, 0.0),
        // Square.
        1 => regular_polygon(4, 1.0, std::f64::consts::FRAC_PI_4),
        // Triangle.
        2 => regular_polygon(3, 1.0, -std::f64::consts::FRAC_PI_2),
        // Five-point star: alternate outer and inner radii.
        3 => (0..10)
            .map(|i| {
                let angle = std::f64::consts::PI * (i as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
                let r = if i % 2 == 0 { 1.0 } else { 0.45 };
                (r * angle.cos(), r * angle.sin())
            })
            .collect(),
        // Cross: union of two bars, traced as one 12-gon.
        4 => {
            let a = 0.34;
            vec![
                (-a, -1.0),
                (a, -1.0),
                (a, -a),
                (1.0, -a),
                (1.0, a),
                (a, a),
                (a, 1.0),
                (-a, 1.0),
                (-a, a),
                (-1.0, a),
                (-1.0, -a),
                (-a, -a),
            ]
        }
        _ => panic!("class {class} outside the shape set"),
    }
}

fn regular_polygon(n: usize, radius: f64, phase: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let angle = std::f64::consts::TAU * (i as f64) / (n as f64) + phase;
            (radius * angle.cos(), radius * angle.sin())
        })
        .collect()
}

/// Random lumpy polygon used as a task-unrelated distractor.
pub fn blob_polygon(rng: &mut Stream, vertices: usize) -> Vec<(f64, f64)> {
    (0..vertices)
        .map(|i| {
            let angle = std::f64::consts::TAU * (i as f64) / (vertices as f64);
            let r = rng.random_range(0.45..1.0);
            (r * angle.cos(), r * angle.sin())
        })
        .collect()
}

/// Low-order radial wobble: amplitude/phase pairs for harmonics 2..=4.
pub type Wobble = [(f64, f64); 3];

pub const NO_WOBBLE: Wobble = [(0.0, 0.0); 3];

/// Geometric placement of a shape in pixel space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub center: (f64, f64),
    pub radius: f64,
    pub rotation: f64,
    pub elong: (f64, f64),
    pub wobble: Wobble,
}

/// Map unit-space vertices into pixel space: wobble radially, elongate,
/// rotate, scale and translate.
pub fn transform_polygon(unit: &[(f64, f64)], placement: &Placement) -> Vec<(f64, f64)> {
    let (sin, cos) = placement.rotation.sin_cos();
    unit.iter()
        .map(|&(x, y)| {
            let angle = y.atan2(x);
            let mut factor = 1.0;
            for (k, &(amp, phase)) in placement.wobble.iter().enumerate() {
                factor += amp * ((k as f64 + 2.0) * angle + phase).cos();
            }
            let (x, y) = (x * factor * placement.elong.0, y * factor * placement.elong.1);
            let (x, y) = (x * cos - y * sin, x * sin + y * cos);
            (
                placement.center.0 + placement.radius * y,
                placement.center.1 + placement.radius * x,
            )
        })
        .collect()
}

/// Signed distance from `p` to the polygon boundary; negative inside.
fn polygon_sdf(poly: &[(f64, f64)], p: (f64, f64)) -> f64 {
    let n = poly.len();
    let mut dist_sq = f64::INFINITY;
    let mut sign = 1.0;
    let mut j = n - 1;
    for i in 0..n {
        let (ay, ax) = poly[j];
        let (by, bx) = poly[i];
        let (ey, ex) = (by - ay, bx - ax);
        let (wy, wx) = (p.0 - ay, p.1 - ax);
        let t = if ey * ey + ex * ex > 0.0 {
            ((wy * ey + wx * ex) / (ey * ey + ex * ex)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (dy, dx) = (wy - t * ey, wx - t * ex);
        dist_sq = dist_sq.min(dy * dy + dx * dx);
        // Even-odd ray crossing on the horizontal ray through p.
        let crosses = (ay <= p.0) != (by <= p.0);
        if crosses {
            let x_at = ax + (p.0 - ay) / (by - ay) * (bx - ax);
            if x_at > p.1 {
                sign = -sign;
            }
        }
        j = i;
    }
    // `sign` starts positive (outside); each crossing to the right of p
    // flips it, leaving -1 for interior points.
    sign * dist_sq.sqrt()
}

/// Rasterize anti-aliased coverage of a pixel-space polygon.
pub fn render_polygon(poly: &[(f64, f64)], height: usize, width: usize) -> Mask {
    let mut data = Vec::with_capacity(height * width);
    for y in 0..height {
        for x in 0..width {
            let d = polygon_sdf(poly, (y as f64, x as f64));
            data.push((0.5 - d).clamp(0.0, 1.0) as f32);
        }
    }
    Mask::from_parts(height, width, data)
}

/// Procedural texture, deterministic per pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Texture {
    Solid {
        rgb: [f64; 3],
    },
    GradientV {
        top: [f64; 3],
        bottom: [f64; 3],
    },
    Checker {
        a: [f64; 3],
        b: [f64; 3],
        period: usize,
    },
    Stripes {
        a: [f64; 3],
        b: [f64; 3],
        period: f64,
        angle: f64,
    },
    Noise {
        base: [f64; 3],
        amp: f64,
        seed: u64,
    },
}

fn coord_hash(seed: u64, y: usize, x: usize) -> f64 {
    let mut h = seed ^ (y as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    h ^= (x as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= h >> 30;
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^= h >> 27;
    (h >> 11) as f64 / (1u64 << 53) as f64
}

pub fn texture_at(tex: &Texture, y: usize, x: usize, h: usize) -> [f64; 3] {
    match tex {
        Texture::Solid { rgb } => *rgb,
        Texture::GradientV { top, bottom } => {
            let t = y as f64 / (h.max(2) - 1) as f64;
            [
                top[0] + t * (bottom[0] - top[0]),
                top[1] + t * (bottom[1] - top[1]),
                top[2] + t * (bottom[2] - top[2]),
            ]
        }
        Texture::Checker { a, b, period } => {
            let p = (*period).max(1);
            if ((y / p) + (x / p)) % 2 == 0 {
                *a
            } else {
                *b
            }
        }
        Texture::Stripes { a, b, period, angle } => {
            let u = y as f64 * angle.cos() + x as f64 * angle.sin();
            if (u / period).rem_euclid(2.0) < 1.0 {
                *a
            } else {
                *b
            }
        }
        Texture::Noise { base, amp, seed } => {
            let n = coord_hash(*seed, y, x) - 0.5;
            [base[0] + amp * n, base[1] + amp * n, base[2] + amp * n]
        }
    }
}

pub fn render_texture(tex: &Texture, height: usize, width: usize) -> Image {
    let mut data = Vec::with_capacity(height * width * CHANNELS);
    for y in 0..height {
        for x in 0..width {
            let rgb = texture_at(tex, y, x, height);
            data.extend(rgb.iter().map(|&v| v as f32));
        }
    }
    Image::from_parts(height, width, data)
}

/// Pixel-blend of two textures; weight 0 reproduces `a` bit for bit.
pub fn render_texture_blend(a: &Texture, b: &Texture, weight: f64, height: usize, width: usize) -> Image {
    let mut data = Vec::with_capacity(height * width * CHANNELS);
    let w = weight as f32;
    for y in 0..height {
        for x in 0..width {
            let pa = texture_at(a, y, x, height);
            let pb = texture_at(b, y, x, height);
            for c in 0..CHANNELS {
                data.push((1.0 - w) * pa[c] as f32 + w * pb[c] as f32);
            }
        }
    }
    Image::from_parts(height, width, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_class_renders_nonempty_coverage() {
        for class in 0..5 {
            let placement = Placement {
                center: (16.0, 16.0),
                radius: 10.0,
                rotation: 0.3,
                elong: (1.0, 1.0),
                wobble: NO_WOBBLE,
            };
            let poly = transform_polygon(&class_polygon(class), &placement);
            let mask = render_polygon(&poly, 32, 32);
            let weight = mask.total_weight();
            assert!(weight > 20.0, "class {class} covered only {weight}");
            // Interior fully covered, far corner fully clear.
            assert_eq!(mask.get(16, 16), 1.0);
            assert_eq!(mask.get(0, 0), 0.0);
        }
    }

    #[test]
    fn circle_coverage_approximates_its_area() {
        let placement = Placement {
            center: (16.0, 16.0),
            radius: 8.0,
            rotation: 0.0,
            elong: (1.0, 1.0),
            wobble: NO_WOBBLE,
        };
        let poly = transform_polygon(&class_polygon(0), &placement);
        let mask = render_polygon(&poly, 32, 32);
        let area = std::f64::consts::PI * 64.0;
        let weight = mask.total_weight();
        assert!(
            (weight - area).abs() / area < 0.05,
            "coverage {weight} vs circle area {area}"
        );
    }

    #[test]
    fn zero_wobble_matches_base_polygon_exactly() {
        let base = Placement {
            center: (10.0, 12.0),
            radius: 6.0,
            rotation: 0.7,
            elong: (1.0, 1.0),
            wobble: NO_WOBBLE,
        };
        let wobbled = Placement {
            wobble: [(0.0, 1.2), (0.0, 0.4), (0.0, 2.2)],
            ..base
        };
        let a = transform_polygon(&class_polygon(3), &base);
        let b = transform_polygon(&class_polygon(3), &wobbled);
        assert_eq!(a, b);
    }

    #[test]
    fn textures_are_deterministic_and_in_range() {
        let textures = [
            Texture::Solid { rgb: [0.2, 0.4, 0.6] },
            Texture::GradientV {
                top: [0.1, 0.1, 0.2],
                bottom: [0.3, 0.35, 0.4],
            },
            Texture::Checker {
                a: [0.9, 0.8, 0.2],
                b: [0.8, 0.3, 0.1],
                period: 4,
            },
            Texture::Stripes {
                a: [0.2, 0.7, 0.7],
                b: [0.1, 0.4, 0.5],
                period: 3.0,
                angle: 0.6,
            },
            Texture::Noise {
                base: [0.5, 0.5, 0.5],
                amp: 0.3,
                seed: 11,
            },
        ];
        for tex in &textures {
            let a = render_texture(tex, 16, 16);
            let b = render_texture(tex, 16, 16);
            assert_eq!(a, b);
            assert!(a.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn texture_blend_weight_zero_is_exact() {
        let a = Texture::Solid { rgb: [0.3, 0.5, 0.7] };
        let b = Texture::Checker {
            a: [0.9, 0.1, 0.1],
            b: [0.1, 0.9, 0.1],
            period: 2,
        };
        let plain = render_texture(&a, 12, 12);
        let blended = render_texture_blend(&a, &b, 0.0, 12, 12);
        assert_eq!(plain, blended);
    }
}
