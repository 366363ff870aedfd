//! 8-bit PNG interchange. Intensities map by value/255; masks store their
//! weight in a single channel.

use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::{Image, Mask};

fn to_byte(v: f32) -> u8 {
    (v * 255.0).round().max(0.0).min(255.0) as u8
}

pub fn write_image(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let path = path.as_ref();
    let buf = image::RgbImage::from_fn(img.width() as u32, img.height() as u32, |x, y| {
        let p = img.pixel(y as usize, x as usize);
        image::Rgb([to_byte(p[0]), to_byte(p[1]), to_byte(p[2])])
    });
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let img = image::open(path)
        .map_err(|e| Error::format(path, e.to_string()))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Image::from_fn(h, w, |y, x, c| {
        f32::from(img.get_pixel(x as u32, y as u32)[c]) / 255.0
    })
}

pub fn write_mask(path: impl AsRef<Path>, mask: &Mask) -> Result<()> {
    let path = path.as_ref();
    let buf = image::GrayImage::from_fn(mask.width() as u32, mask.height() as u32, |x, y| {
        image::Luma([to_byte(mask.get(y as usize, x as usize))])
    });
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let img = image::open(path)
        .map_err(|e| Error::format(path, e.to_string()))?
        .to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Mask::from_fn(h, w, |y, x| {
        f32::from(img.get_pixel(x as u32, y as u32)[0]) / 255.0
    })
}
