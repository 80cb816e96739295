//! Float RGB images and 8-bit PNG conversion.

use std::io::{Read, Seek, Write};

use crate::error::{Error, Result};

/// Row-major RGB image with unclamped `f64` channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[f64; 3]>,
}

impl Image {
    pub fn black(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            pixels: vec![[0.0; 3]; width as usize * height as usize],
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [f64; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn same_dimensions(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Copy with every channel clamped to `[0, 1]`.
    pub fn clamped(&self) -> Image {
        Image {
            width: self.width,
            height: self.height,
            pixels: self
                .pixels
                .iter()
                .map(|p| p.map(|c| c.clamp(0.0, 1.0)))
                .collect(),
        }
    }

    /// Decode an 8-bit RGB or RGBA PNG. Values map to `[0, 1]` by `/255`,
    /// without any gamma transform.
    pub fn read_png<R: Read + Seek>(reader: R) -> Result<Image> {
        let mut decoder = png::Decoder::new(std::io::BufReader::new(reader));
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder.read_info().map_err(|e| Error::Png(e.to_string()))?;
        let size = reader
            .output_buffer_size()
            .ok_or_else(|| Error::Png("image too large".into()))?;
        let mut buf = vec![0u8; size];
        let info = reader
            .next_frame(&mut buf)
            .map_err(|e| Error::Png(e.to_string()))?;
        let channels = match info.color_type {
            png::ColorType::Rgb => 3,
            png::ColorType::Rgba => 4,
            png::ColorType::Grayscale => 1,
            png::ColorType::GrayscaleAlpha => 2,
            other => return Err(Error::Png(format!("unsupported color type {other:?}"))),
        };
        let pixels = buf[..info.buffer_size()]
            .chunks_exact(channels)
            .map(|px| {
                if channels < 3 {
                    [px[0] as f64 / 255.0; 3]
                } else {
                    [px[0] as f64 / 255.0, px[1] as f64 / 255.0, px[2] as f64 / 255.0]
                }
            })
            .collect();
        Ok(Image {
            width: info.width,
            height: info.height,
            pixels,
        })
    }

    /// Encode as 8-bit RGB PNG: clamp to `[0, 1]`, scale by 255, round half up.
    pub fn write_png<W: Write>(&self, writer: W) -> Result<()> {
        let mut encoder = png::Encoder::new(writer, self.width, self.height);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(|e| Error::Png(e.to_string()))?;
        let data: Vec<u8> = self
            .pixels
            .iter()
            .flat_map(|p| p.map(to_u8))
            .collect();
        writer
            .write_image_data(&data)
            .map_err(|e| Error::Png(e.to_string()))
    }
}

fn to_u8(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}
