//! Single-channel 8-bit PNG interchange for projection images, occupancy
//! maps and predictions.
//!
//! Dark means "recent" or "occupied": a recency `v` is stored as
//! `255 - round(255·v)`, occupied cells as 0 and free cells as 255. The
//! encoder pins compression level and filter so that output bytes depend
//! only on pixel content.

use std::io::Cursor;

use crate::error::{Error, Result};
use crate::geometry::GridSpec;
use crate::projection::{OccupancyMap, ProjectionImage};

/// Raw 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

pub fn recency_to_byte(v: f64) -> u8 {
    255 - (255.0 * v.clamp(0.0, 1.0)).round() as u8
}

pub fn byte_to_recency(b: u8) -> f64 {
    f64::from(255 - b) / 255.0
}

impl GrayImage {
    pub fn from_projection(image: &ProjectionImage) -> Self {
        Self {
            width: image.grid.width_px,
            height: image.grid.height_px,
            pixels: image.values.iter().map(|&v| recency_to_byte(v)).collect(),
        }
    }

    pub fn from_occupancy(map: &OccupancyMap) -> Self {
        Self {
            width: map.grid.width_px,
            height: map.grid.height_px,
            pixels: map.cells.iter().map(|&c| if c { 0 } else { 255 }).collect(),
        }
    }

    fn check_dims(&self, grid: &GridSpec) -> Result<()> {
        if self.width != grid.width_px || self.height != grid.height_px {
            return Err(Error::ImageFormat {
                property: "dimensions",
                detail: format!(
                    "expected {}x{}, found {}x{}",
                    grid.width_px, grid.height_px, self.width, self.height
                ),
            });
        }
        Ok(())
    }

    pub fn to_projection(&self, grid: &GridSpec) -> Result<ProjectionImage> {
        self.check_dims(grid)?;
        Ok(ProjectionImage {
            grid: *grid,
            values: self.pixels.iter().map(|&b| byte_to_recency(b)).collect(),
        })
    }

    /// Bytes below 128 decode as occupied.
    pub fn to_occupancy(&self, grid: &GridSpec) -> Result<OccupancyMap> {
        self.check_dims(grid)?;
        Ok(OccupancyMap {
            grid: *grid,
            cells: self.pixels.iter().map(|&b| b < 128).collect(),
        })
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        {
            let mut encoder = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            encoder.set_color(png::ColorType::Grayscale);
            encoder.set_depth(png::BitDepth::Eight);
            encoder.set_compression(png::Compression::Balanced);
            encoder.set_filter(png::Filter::NoFilter);
            let mut writer = encoder.write_header()?;
            writer.write_image_data(&self.pixels)?;
            writer.finish()?;
        }
        Ok(out)
    }

    /// Decodes a PNG, accepting only 8-bit single-channel images.
    pub fn decode_png(bytes: &[u8]) -> Result<Self> {
        let format_err = |property: &'static str, detail: String| Error::ImageFormat { property, detail };
        let mut decoder = png::Decoder::new(Cursor::new(bytes));
        decoder.set_transformations(png::Transformations::IDENTITY);
        let mut reader = decoder
            .read_info()
            .map_err(|e| format_err("container", e.to_string()))?;
        let info = reader.info();
        if info.color_type != png::ColorType::Grayscale {
            return Err(format_err(
                "color type",
                format!("expected grayscale, found {:?}", info.color_type),
            ));
        }
        if info.bit_depth != png::BitDepth::Eight {
            return Err(format_err(
                "bit depth",
                format!("expected 8, found {:?}", info.bit_depth),
            ));
        }
        let (width, height) = (info.width as usize, info.height as usize);
        let mut pixels = vec![0; reader.output_buffer_size().unwrap_or(width * height)];
        let frame = reader
            .next_frame(&mut pixels)
            .map_err(|e| format_err("pixel data", e.to_string()))?;
        pixels.truncate(frame.buffer_size());
        if pixels.len() != width * height {
            return Err(format_err(
                "pixel data",
                format!("expected {} bytes, found {}", width * height, pixels.len()),
            ));
        }
        Ok(Self { width, height, pixels })
    }
}

pub fn encode_projection(image: &ProjectionImage) -> Result<Vec<u8>> {
    GrayImage::from_projection(image).encode_png()
}

pub fn encode_occupancy(map: &OccupancyMap) -> Result<Vec<u8>> {
    GrayImage::from_occupancy(map).encode_png()
}

pub fn decode_projection(bytes: &[u8], grid: &GridSpec) -> Result<ProjectionImage> {
    GrayImage::decode_png(bytes)?.to_projection(grid)
}

pub fn decode_occupancy(bytes: &[u8], grid: &GridSpec) -> Result<OccupancyMap> {
    GrayImage::decode_png(bytes)?.to_occupancy(grid)
}
