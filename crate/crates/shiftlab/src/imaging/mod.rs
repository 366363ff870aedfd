//! Pixel-level primitives every other module draws on: image and mask
//! containers, affine warps, color transforms, compositing and resampling.
//!
//! All values are unit-interval intensities; every public operation clamps
//! on write. Images are row-major with interleaved RGB channels, linear
//! intensity (no gamma). Warps and resizes sample bilinearly; warps fill
//! out-of-frame regions with zero while resizes clamp to the edge.

pub mod png;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Smallest legal image side.
pub const MIN_SIDE: usize = 8;
/// Channel count is fixed at RGB.
pub const CHANNELS: usize = 3;

fn clamp01(v: f32) -> f32 {
    v.max(0.0).min(1.0)
}

/// H×W×3 array of unit-interval intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Image {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if height < MIN_SIDE || width < MIN_SIDE {
            return Err(Error::contract(format!(
                "image dimensions {height}x{width} below minimum side {MIN_SIDE}"
            )));
        }
        if data.len() != height * width * CHANNELS {
            return Err(Error::contract(format!(
                "image data length {} does not match {height}x{width}x{CHANNELS}",
                data.len()
            )));
        }
        Ok(Self::from_parts(height, width, data))
    }

    /// Internal constructor for operations that already know the dims are
    /// legal. Still clamps: writes must land in [0, 1].
    pub(crate) fn from_parts(height: usize, width: usize, mut data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), height * width * CHANNELS);
        for v in &mut data {
            *v = clamp01(*v);
        }
        Image {
            height,
            width,
            data,
        }
    }

    pub fn constant(height: usize, width: usize, value: f32) -> Result<Self> {
        Self::new(height, width, vec![value; height * width * CHANNELS])
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::constant(height, width, 0.0)
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize, usize) -> f32) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                for c in 0..CHANNELS {
                    data.push(f(y, x, c));
                }
            }
        }
        Self::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * CHANNELS + c]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * CHANNELS + c] = clamp01(v);
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn mean(&self) -> f64 {
        let sum: f64 = self.data.iter().map(|&v| f64::from(v)).sum();
        sum / self.data.len() as f64
    }
}

/// H×W array of unit-interval foreground weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Mask {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::contract("mask dimensions must be positive"));
        }
        if data.len() != height * width {
            return Err(Error::contract(format!(
                "mask data length {} does not match {height}x{width}",
                data.len()
            )));
        }
        Ok(Self::from_parts(height, width, data))
    }

    pub(crate) fn from_parts(height: usize, width: usize, mut data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        for v in &mut data {
            *v = clamp01(*v);
        }
        Mask {
            height,
            width,
            data,
        }
    }

    pub fn constant(height: usize, width: usize, value: f32) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::constant(height, width, 0.0)
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f32) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(y, x));
            }
        }
        Self::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, v: f32) {
        self.data[y * self.width + x] = clamp01(v);
    }

    /// Sum of all weights.
    pub fn total_weight(&self) -> f64 {
        self.data.iter().map(|&v| f64::from(v)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.total_weight() / self.data.len() as f64
    }
}

/// Parameters of an affine warp about the image center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineParams {
    /// Rotation in radians.
    pub rotation: f64,
    pub scale_x: f64,
    pub scale_y: f64,
    /// Horizontal shear angle in radians.
    pub shear: f64,
    /// Translation as a fraction of width.
    pub translate_x: f64,
    /// Translation as a fraction of height.
    pub translate_y: f64,
    pub flip_h: bool,
    pub flip_v: bool,
}

impl AffineParams {
    pub fn identity() -> Self {
        AffineParams {
            rotation: 0.0,
            scale_x: 1.0,
            scale_y: 1.0,
            shear: 0.0,
            translate_x: 0.0,
            translate_y: 0.0,
            flip_h: false,
            flip_v: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("scale_x", self.scale_x), ("scale_y", self.scale_y)] {
            if !(0.25..=4.0).contains(&s) {
                return Err(Error::contract(format!("{name} {s} outside [0.25, 4.0]")));
            }
        }
        for (name, t) in [("translate_x", self.translate_x), ("translate_y", self.translate_y)] {
            if t.abs() > 1.0 {
                return Err(Error::contract(format!("{name} {t} outside [-1, 1]")));
            }
        }
        Ok(())
    }
}

/// Color jitter parameters, applied in the fixed order
/// brightness → contrast → saturation → hue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorParams {
    /// Additive intensity shift.
    pub brightness_delta: f64,
    /// Multiplicative gain about the per-image mean.
    pub contrast_gain: f64,
    /// Gain about the per-pixel channel mean.
    pub saturation_gain: f64,
    /// Hue rotation in radians.
    pub hue_shift: f64,
}

impl ColorParams {
    pub fn identity() -> Self {
        ColorParams {
            brightness_delta: 0.0,
            contrast_gain: 1.0,
            saturation_gain: 1.0,
            hue_shift: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [
            ("contrast_gain", self.contrast_gain),
            ("saturation_gain", self.saturation_gain),
        ] {
            if !(0.1..=10.0).contains(&g) {
                return Err(Error::contract(format!("{name} {g} outside [0.1, 10.0]")));
            }
        }
        Ok(())
    }
}

/// 2x2 matrix applied to centered pixel coordinates (x right, y down).
fn forward_matrix(p: &AffineParams) -> [[f64; 2]; 2] {
    let (sin, cos) = p.rotation.sin_cos();
    let shx = p.shear.tan();
    let sx = p.scale_x * if p.flip_h { -1.0 } else { 1.0 };
    let sy = p.scale_y * if p.flip_v { -1.0 } else { 1.0 };
    // R(rotation) * Shear(shx) * Scale(sx, sy)
    [
        [cos * sx, (cos * shx - sin) * sy],
        [sin * sx, (sin * shx + cos) * sy],
    ]
}

fn invert2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

/// Bilinear sample with zero fill outside the frame.
#[inline]
fn sample_zero(data: &[f32], h: usize, w: usize, ch: usize, x: f64, y: f64, c: usize) -> f32 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = (x - x0) as f32;
    let fy = (y - y0) as f32;
    let xi = x0 as i64;
    let yi = y0 as i64;
    let at = |yy: i64, xx: i64| -> f32 {
        if yy < 0 || xx < 0 || yy >= h as i64 || xx >= w as i64 {
            0.0
        } else {
            data[(yy as usize * w + xx as usize) * ch + c]
        }
    };
    let top = at(yi, xi) * (1.0 - fx) + at(yi, xi + 1) * fx;
    let bot = at(yi + 1, xi) * (1.0 - fx) + at(yi + 1, xi + 1) * fx;
    top * (1.0 - fy) + bot * fy
}

/// Bilinear sample with edge clamping.
#[inline]
fn sample_clamped(data: &[f32], h: usize, w: usize, ch: usize, x: f64, y: f64, c: usize) -> f32 {
    let x = x.max(0.0).min((w - 1) as f64);
    let y = y.max(0.0).min((h - 1) as f64);
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = (x - x0) as f32;
    let fy = (y - y0) as f32;
    let xi = x0 as usize;
    let yi = y0 as usize;
    let x1 = (xi + 1).min(w - 1);
    let y1 = (yi + 1).min(h - 1);
    let at = |yy: usize, xx: usize| data[(yy * w + xx) * ch + c];
    let top = at(yi, xi) * (1.0 - fx) + at(yi, x1) * fx;
    let bot = at(y1, xi) * (1.0 - fx) + at(y1, x1) * fx;
    top * (1.0 - fy) + bot * fy
}

struct InverseMap {
    inv: [[f64; 2]; 2],
    cx: f64,
    cy: f64,
    tx: f64,
    ty: f64,
}

impl InverseMap {
    fn new(p: &AffineParams, h: usize, w: usize) -> Self {
        InverseMap {
            inv: invert2(forward_matrix(p)),
            cx: (w as f64 - 1.0) / 2.0,
            cy: (h as f64 - 1.0) / 2.0,
            tx: p.translate_x * w as f64,
            ty: p.translate_y * h as f64,
        }
    }

    #[inline]
    fn source(&self, x: usize, y: usize) -> (f64, f64) {
        let dx = x as f64 - self.cx - self.tx;
        let dy = y as f64 - self.cy - self.ty;
        (
            self.inv[0][0] * dx + self.inv[0][1] * dy + self.cx,
            self.inv[1][0] * dx + self.inv[1][1] * dy + self.cy,
        )
    }
}

/// Warp an image alone. See [`warp_affine`] for the paired variant.
pub fn warp_image(img: &Image, params: &AffineParams) -> Result<Image> {
    params.validate()?;
    let (h, w) = (img.height, img.width);
    let map = InverseMap::new(params, h, w);
    let mut data = Vec::with_capacity(h * w * CHANNELS);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = map.source(x, y);
            for c in 0..CHANNELS {
                data.push(sample_zero(&img.data, h, w, CHANNELS, sx, sy, c));
            }
        }
    }
    Ok(Image::from_parts(h, w, data))
}

pub fn warp_mask(mask: &Mask, params: &AffineParams) -> Result<Mask> {
    params.validate()?;
    let (h, w) = (mask.height, mask.width);
    let map = InverseMap::new(params, h, w);
    let mut data = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = map.source(x, y);
            data.push(sample_zero(&mask.data, h, w, 1, sx, sy, 0));
        }
    }
    Ok(Mask::from_parts(h, w, data))
}

/// Warp image and mask by the same matrix. Out-of-frame regions fill with
/// zero intensity and zero weight.
pub fn warp_affine(img: &Image, mask: &Mask, params: &AffineParams) -> Result<(Image, Mask)> {
    if img.height != mask.height || img.width != mask.width {
        return Err(Error::contract(format!(
            "image {}x{} and mask {}x{} dimensions differ",
            img.height, img.width, mask.height, mask.width
        )));
    }
    Ok((warp_image(img, params)?, warp_mask(mask, params)?))
}

fn rgb_to_hsv(r: f32, g: f32, b: f32) -> (f32, f32, f32) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    } / 6.0;
    (h, s, v)
}

fn hsv_to_rgb(h: f32, s: f32, v: f32) -> (f32, f32, f32) {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let i = h6.floor() as i32 % 6;
    let f = h6 - h6.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match i {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    }
}

/// Apply brightness, contrast, saturation and hue in that fixed order.
/// Each stage clamps on write; neutral stages are skipped so neutral
/// params reproduce the input bit for bit.
pub fn apply_color(img: &Image, params: &ColorParams) -> Result<Image> {
    params.validate()?;
    let mut out = img.clone();

    if params.brightness_delta != 0.0 {
        let d = params.brightness_delta as f32;
        for v in &mut out.data {
            *v = clamp01(*v + d);
        }
    }

    if params.contrast_gain != 1.0 {
        let mean = out.mean() as f32;
        let g = params.contrast_gain as f32;
        for v in &mut out.data {
            *v = clamp01(mean + g * (*v - mean));
        }
    }

    if params.saturation_gain != 1.0 {
        let g = params.saturation_gain as f32;
        for px in out.data.chunks_mut(CHANNELS) {
            let gray = (px[0] + px[1] + px[2]) / 3.0;
            for v in px {
                *v = clamp01(gray + g * (*v - gray));
            }
        }
    }

    if params.hue_shift != 0.0 {
        let shift = (params.hue_shift / std::f64::consts::TAU) as f32;
        for px in out.data.chunks_mut(CHANNELS) {
            let (h, s, v) = rgb_to_hsv(px[0], px[1], px[2]);
            let (r, g, b) = hsv_to_rgb(h + shift, s, v);
            px[0] = clamp01(r);
            px[1] = clamp01(g);
            px[2] = clamp01(b);
        }
    }

    Ok(out)
}

/// Alpha-composite `fg` over `bg`: out = m·fg + (1−m)·bg over the overlap.
/// `offset` is (rows down, cols right) of the foreground's top-left corner
/// in background coordinates; out-of-frame parts are clipped.
pub fn composite(fg: &Image, fg_mask: &Mask, bg: &Image, offset: (i64, i64)) -> Result<Image> {
    if fg.height != fg_mask.height || fg.width != fg_mask.width {
        return Err(Error::contract(format!(
            "foreground {}x{} and mask {}x{} dimensions differ",
            fg.height, fg.width, fg_mask.height, fg_mask.width
        )));
    }
    let (oy, ox) = offset;
    let mut out = bg.clone();
    for fy in 0..fg.height {
        let by = fy as i64 + oy;
        if by < 0 || by >= bg.height as i64 {
            continue;
        }
        for fx in 0..fg.width {
            let bx = fx as i64 + ox;
            if bx < 0 || bx >= bg.width as i64 {
                continue;
            }
            let m = fg_mask.get(fy, fx);
            if m == 0.0 {
                continue;
            }
            let (by, bx) = (by as usize, bx as usize);
            for c in 0..CHANNELS {
                let v = m * fg.get(fy, fx, c) + (1.0 - m) * out.get(by, bx, c);
                out.set(by, bx, c, v);
            }
        }
    }
    Ok(out)
}

/// In-frame weight of a mask placed at `offset` in a `bg_h`×`bg_w` frame.
pub fn in_frame_weight(mask: &Mask, bg_h: usize, bg_w: usize, offset: (i64, i64)) -> f64 {
    let (oy, ox) = offset;
    let mut total = 0.0;
    for fy in 0..mask.height {
        let by = fy as i64 + oy;
        if by < 0 || by >= bg_h as i64 {
            continue;
        }
        for fx in 0..mask.width {
            let bx = fx as i64 + ox;
            if bx < 0 || bx >= bg_w as i64 {
                continue;
            }
            total += f64::from(mask.get(fy, fx));
        }
    }
    total
}

fn resize_plane(data: &[f32], h: usize, w: usize, ch: usize, new_h: usize, new_w: usize) -> Vec<f32> {
    let sy = h as f64 / new_h as f64;
    let sx = w as f64 / new_w as f64;
    let mut out = Vec::with_capacity(new_h * new_w * ch);
    for y in 0..new_h {
        let src_y = (y as f64 + 0.5) * sy - 0.5;
        for x in 0..new_w {
            let src_x = (x as f64 + 0.5) * sx - 0.5;
            for c in 0..ch {
                out.push(sample_clamped(data, h, w, ch, src_x, src_y, c));
            }
        }
    }
    out
}

/// Bilinear resample with half-pixel centers and edge clamping. A constant
/// image maps to the same constant.
pub fn resize(img: &Image, new_h: usize, new_w: usize) -> Result<Image> {
    if new_h < MIN_SIDE || new_w < MIN_SIDE {
        return Err(Error::contract(format!(
            "resize target {new_h}x{new_w} below minimum side {MIN_SIDE}"
        )));
    }
    if new_h == img.height && new_w == img.width {
        return Ok(img.clone());
    }
    let data = resize_plane(&img.data, img.height, img.width, CHANNELS, new_h, new_w);
    Ok(Image::from_parts(new_h, new_w, data))
}

pub fn resize_mask(mask: &Mask, new_h: usize, new_w: usize) -> Result<Mask> {
    if new_h == 0 || new_w == 0 {
        return Err(Error::contract("resize target must be positive"));
    }
    if new_h == mask.height && new_w == mask.width {
        return Ok(mask.clone());
    }
    let data = resize_plane(&mask.data, mask.height, mask.width, 1, new_h, new_w);
    Ok(Mask::from_parts(new_h, new_w, data))
}

/// Shift an image by whole pixels, filling vacated area with zero.
pub fn translate_pixels(img: &Image, dy: i64, dx: i64) -> Image {
    let (h, w) = (img.height, img.width);
    let mut out = Image::from_parts(h, w, vec![0.0; h * w * CHANNELS]);
    for y in 0..h {
        let sy = y as i64 - dy;
        if sy < 0 || sy >= h as i64 {
            continue;
        }
        for x in 0..w {
            let sx = x as i64 - dx;
            if sx < 0 || sx >= w as i64 {
                continue;
            }
            for c in 0..CHANNELS {
                out.set(y, x, c, img.get(sy as usize, sx as usize, c));
            }
        }
    }
    out
}

/// Mirror an image left-right.
pub fn flip_horizontal(img: &Image) -> Image {
    let (h, w) = (img.height, img.width);
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            for c in 0..CHANNELS {
                out.set(y, x, c, img.get(y, w - 1 - x, c));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rng(seed: u64) -> crate::rng::Stream {
        crate::rng::stream(seed, "imaging-test")
    }

    fn random_image(h: usize, w: usize, seed: u64) -> Image {
        let mut r = rng(seed);
        Image::from_fn(h, w, |_, _, _| r.random::<f32>()).unwrap()
    }

    fn random_mask(h: usize, w: usize, seed: u64) -> Mask {
        let mut r = rng(seed);
        Mask::from_fn(h, w, |_, _| r.random::<f32>()).unwrap()
    }

    #[test]
    fn identity_warp_is_identity() {
        let img = random_image(16, 12, 1);
        let mask = random_mask(16, 12, 2);
        let (wi, wm) = warp_affine(&img, &mask, &AffineParams::identity()).unwrap();
        assert_eq!(wi, img);
        assert_eq!(wm, mask);
    }

    #[test]
    fn horizontal_flip_is_an_involution() {
        let img = random_image(11, 16, 3);
        let mask = random_mask(11, 16, 4);
        let params = AffineParams {
            flip_h: true,
            ..AffineParams::identity()
        };
        let (i1, m1) = warp_affine(&img, &mask, &params).unwrap();
        let (i2, m2) = warp_affine(&i1, &m1, &params).unwrap();
        assert_eq!(i2, img);
        assert_eq!(m2, mask);
    }

    /// Independent coordinate-map oracle: forward-map a pixel through the
    /// same matrix convention (rotation about the center) by hand.
    fn rotate90_forward(y: usize, x: usize, side: usize) -> (usize, usize) {
        let c = (side as f64 - 1.0) / 2.0;
        // (x', y') = R(pi/2) (x - c, y - c) + c with R = [[0,-1],[1,0]]
        let xf = -(y as f64 - c) + c;
        let yf = (x as f64 - c) + c;
        (yf.round() as usize, xf.round() as usize)
    }

    #[test]
    fn quarter_turn_matches_coordinate_oracle() {
        let side = 12;
        for &(r, c) in &[(2usize, 5usize), (0, 0), (7, 11), (6, 6)] {
            let mut img = Image::zeros(side, side).unwrap();
            img.set(r, c, 0, 1.0);
            let mask = Mask::zeros(side, side).unwrap();
            let params = AffineParams {
                rotation: std::f64::consts::FRAC_PI_2,
                ..AffineParams::identity()
            };
            let (out, _) = warp_affine(&img, &mask, &params).unwrap();
            let (er, ec) = rotate90_forward(r, c, side);
            for y in 0..side {
                for x in 0..side {
                    let want = if (y, x) == (er, ec) { 1.0 } else { 0.0 };
                    assert!(
                        (out.get(y, x, 0) - want).abs() < 1e-5,
                        "pixel ({y},{x}) = {} want {want} (lit at ({r},{c}))",
                        out.get(y, x, 0)
                    );
                }
            }
        }
    }

    #[test]
    fn warp_rejects_dim_mismatch() {
        let img = random_image(16, 16, 5);
        let mask = random_mask(8, 16, 6);
        assert!(matches!(
            warp_affine(&img, &mask, &AffineParams::identity()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn neutral_color_params_are_identity() {
        let img = random_image(9, 14, 7);
        let out = apply_color(&img, &ColorParams::identity()).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn full_brightness_saturates() {
        let img = random_image(8, 8, 8);
        let out = apply_color(
            &img,
            &ColorParams {
                brightness_delta: 1.0,
                ..ColorParams::identity()
            },
        )
        .unwrap();
        assert!(out.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn contrast_scales_about_the_mean() {
        // Half the pixels at 0.4, half at 0.6: mean is exactly 0.5, so a
        // gain of 2 forces {0.3, 0.7}.
        let img = Image::from_fn(8, 8, |y, _, _| if y < 4 { 0.4 } else { 0.6 }).unwrap();
        let out = apply_color(
            &img,
            &ColorParams {
                contrast_gain: 2.0,
                ..ColorParams::identity()
            },
        )
        .unwrap();
        for y in 0..8 {
            let want = if y < 4 { 0.3 } else { 0.7 };
            assert!((out.get(y, 0, 0) - want).abs() < 1e-6);
        }
    }

    #[test]
    fn composite_zero_mask_returns_background() {
        let fg = random_image(8, 8, 9);
        let bg = random_image(8, 8, 10);
        let mask = Mask::zeros(8, 8).unwrap();
        let out = composite(&fg, &mask, &bg, (0, 0)).unwrap();
        assert_eq!(out, bg);
    }

    #[test]
    fn composite_full_mask_returns_foreground() {
        let fg = random_image(8, 8, 11);
        let bg = random_image(8, 8, 12);
        let mask = Mask::constant(8, 8, 1.0).unwrap();
        let out = composite(&fg, &mask, &bg, (0, 0)).unwrap();
        assert_eq!(out, fg);
    }

    #[test]
    fn composite_mean_equals_mask_mean_for_binary_halves() {
        let fg = Image::constant(8, 8, 1.0).unwrap();
        let bg = Image::zeros(8, 8).unwrap();
        let mask = Mask::from_fn(8, 8, |_, x| if x < 4 { 1.0 } else { 0.0 }).unwrap();
        let out = composite(&fg, &mask, &bg, (0, 0)).unwrap();
        assert!((out.mean() - mask.mean()).abs() < 1e-9);
    }

    #[test]
    fn composite_is_a_convex_combination() {
        let mut r = rng(13);
        for _ in 0..20 {
            let fg = random_image(8, 8, r.random());
            let bg = random_image(8, 8, r.random());
            let mask = random_mask(8, 8, r.random());
            let out = composite(&fg, &mask, &bg, (0, 0)).unwrap();
            for y in 0..8 {
                for x in 0..8 {
                    for c in 0..CHANNELS {
                        let lo = fg.get(y, x, c).min(bg.get(y, x, c)) - 1e-6;
                        let hi = fg.get(y, x, c).max(bg.get(y, x, c)) + 1e-6;
                        let v = out.get(y, x, c);
                        assert!(v >= lo && v <= hi);
                    }
                }
            }
        }
    }

    #[test]
    fn resize_constant_stays_constant() {
        let img = Image::constant(8, 8, 0.5).unwrap();
        for &(h, w) in &[(16, 16), (8, 13), (23, 9)] {
            let out = resize(&img, h, w).unwrap();
            assert!(out.data().iter().all(|&v| (v - 0.5).abs() < 1e-6));
        }
    }

    #[test]
    fn resize_to_same_dims_is_identity() {
        let img = random_image(10, 14, 15);
        assert_eq!(resize(&img, 10, 14).unwrap(), img);
    }

    #[test]
    fn resize_rejects_tiny_target() {
        let img = random_image(16, 16, 16);
        assert!(resize(&img, 4, 16).is_err());
    }

    /// Reference bilinear oracle: independent loop-based resampler used to
    /// bound the up-then-down round trip against the original.
    fn oracle_resize(img: &Image, nh: usize, nw: usize) -> Vec<f32> {
        let (h, w) = (img.height(), img.width());
        let mut out = vec![0.0; nh * nw * CHANNELS];
        for y in 0..nh {
            for x in 0..nw {
                let sy = ((y as f64 + 0.5) * h as f64 / nh as f64 - 0.5)
                    .max(0.0)
                    .min(h as f64 - 1.0);
                let sx = ((x as f64 + 0.5) * w as f64 / nw as f64 - 0.5)
                    .max(0.0)
                    .min(w as f64 - 1.0);
                let (y0, x0) = (sy.floor() as usize, sx.floor() as usize);
                let (y1, x1) = ((y0 + 1).min(h - 1), (x0 + 1).min(w - 1));
                let (fy, fx) = (sy - y0 as f64, sx - x0 as f64);
                for c in 0..CHANNELS {
                    let v = img.get(y0, x0, c) as f64 * (1.0 - fy) * (1.0 - fx)
                        + img.get(y0, x1, c) as f64 * (1.0 - fy) * fx
                        + img.get(y1, x0, c) as f64 * fy * (1.0 - fx)
                        + img.get(y1, x1, c) as f64 * fy * fx;
                    out[(y * nw + x) * CHANNELS + c] = v as f32;
                }
            }
        }
        out
    }

    #[test]
    fn upsample_downsample_round_trip_stays_close() {
        // Smooth gradient; bound precomputed with the oracle resampler.
        let img = Image::from_fn(16, 16, |y, x, c| {
            (y as f32 / 30.0 + x as f32 / 40.0 + c as f32 * 0.05).min(1.0)
        })
        .unwrap();
        let up = resize(&img, 32, 32).unwrap();
        let oracle = oracle_resize(&img, 32, 32);
        let oracle_dev = up
            .data()
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(oracle_dev < 1e-5, "deviation from oracle {oracle_dev}");
        let down = resize(&up, 16, 16).unwrap();
        let max_dev = img
            .data()
            .iter()
            .zip(down.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_dev < 0.02, "max deviation {max_dev}");
    }

    #[test]
    fn warped_mask_weights_stay_in_unit_interval() {
        let mut r = rng(17);
        for _ in 0..20 {
            let mask = random_mask(12, 12, r.random());
            let params = AffineParams {
                rotation: r.random_range(-3.0..3.0),
                scale_x: r.random_range(0.25..4.0),
                scale_y: r.random_range(0.25..4.0),
                shear: r.random_range(-0.5..0.5),
                translate_x: r.random_range(-1.0..1.0),
                translate_y: r.random_range(-1.0..1.0),
                flip_h: r.random(),
                flip_v: r.random(),
            };
            let out = warp_mask(&mask, &params).unwrap();
            assert!(out.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn color_output_stays_in_unit_interval() {
        let mut r = rng(18);
        for _ in 0..20 {
            let img = random_image(8, 8, r.random());
            let params = ColorParams {
                brightness_delta: r.random_range(-2.0..2.0),
                contrast_gain: r.random_range(0.1..10.0),
                saturation_gain: r.random_range(0.1..10.0),
                hue_shift: r.random_range(-7.0..7.0),
            };
            let out = apply_color(&img, &params).unwrap();
            assert!(out.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn translate_zero_is_identity_and_fills_with_zero() {
        let img = random_image(8, 8, 19);
        assert_eq!(translate_pixels(&img, 0, 0), img);
        let shifted = translate_pixels(&img, 2, -1);
        assert_eq!(shifted.get(0, 0, 0), 0.0);
        assert_eq!(shifted.get(2, 0, 1), img.get(0, 1, 1));
    }

    #[test]
    fn flip_horizontal_matches_warp_flip() {
        let img = random_image(9, 12, 20);
        let params = AffineParams {
            flip_h: true,
            ..AffineParams::identity()
        };
        let warped = warp_image(&img, &params).unwrap();
        assert_eq!(flip_horizontal(&img), warped);
    }
}
