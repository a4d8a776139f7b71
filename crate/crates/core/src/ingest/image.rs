//! Raster input: PNG and binary PPM (P6) decoding into 8-bit RGB.

use std::fs;
use std::io::{self, Cursor};
use std::path::Path;

use super::IngestError;

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// An 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self, IngestError> {
        if width.checked_mul(height) != Some(pixels.len()) {
            return Err(IngestError::DimensionMismatch {
                width,
                height,
                pixels: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image filled with a single colour.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![rgb; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        self.pixels[y * self.width + x] = rgb;
    }

    /// Encode as an 8-bit RGB PNG.
    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header().expect("in-memory PNG header");
            let data: Vec<u8> = self.pixels.iter().flatten().copied().collect();
            writer.write_image_data(&data).expect("in-memory PNG body");
        }
        out
    }

    pub fn save_png(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_png())
    }

    /// Encode as binary PPM (P6).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().flatten());
        out
    }
}

/// Read a PNG or binary PPM from disk, sniffing the format from its magic bytes.
pub fn load_image(path: &Path) -> Result<RgbImage, IngestError> {
    let bytes = fs::read(path).map_err(|source| match source.kind() {
        io::ErrorKind::NotFound => IngestError::NotFound(path.to_path_buf()),
        _ => IngestError::Io {
            path: path.to_path_buf(),
            source,
        },
    })?;
    decode_image(&bytes)
}

/// Decode an in-memory PNG or binary PPM.
pub fn decode_image(bytes: &[u8]) -> Result<RgbImage, IngestError> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P6") {
        decode_ppm(bytes)
    } else {
        Err(IngestError::UnsupportedFormat)
    }
}

fn decode_png(bytes: &[u8]) -> Result<RgbImage, IngestError> {
    let corrupt = |e: png::DecodingError| IngestError::Corrupt(e.to_string());
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(corrupt)?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let frame = reader.next_frame(&mut buf).map_err(corrupt)?;
    let (width, height) = (frame.width as usize, frame.height as usize);
    let data = &buf[..frame.buffer_size()];

    let channels = frame.color_type.samples();
    let pixels = data
        .chunks_exact(channels)
        .map(|px| match channels {
            1 | 2 => [px[0]; 3],
            _ => [px[0], px[1], px[2]],
        })
        .collect();
    RgbImage::new(width, height, pixels)
}

fn decode_ppm(bytes: &[u8]) -> Result<RgbImage, IngestError> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        *field = next_header_number(bytes, &mut pos)?;
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(IngestError::Corrupt(format!(
            "PPM maxval {maxval} is not an 8-bit depth"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(IngestError::Corrupt("PPM header is truncated".into())),
    }
    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| IngestError::Corrupt("PPM dimensions overflow".into()))?;
    let body = bytes
        .get(pos..pos + len)
        .ok_or_else(|| IngestError::Corrupt("PPM raster is truncated".into()))?;
    let scale = |c: u8| -> u8 {
        if maxval == 255 {
            c
        } else {
            ((u32::from(c).min(maxval as u32) * 255 + maxval as u32 / 2) / maxval as u32) as u8
        }
    };
    let pixels = body
        .chunks_exact(3)
        .map(|px| [scale(px[0]), scale(px[1]), scale(px[2])])
        .collect();
    RgbImage::new(width, height, pixels)
}

fn next_header_number(bytes: &[u8], pos: &mut usize) -> Result<usize, IngestError> {
    loop {
        match bytes.get(*pos) {
            None => return Err(IngestError::Corrupt("PPM header is truncated".into())),
            Some(b'#') => {
                while !matches!(bytes.get(*pos), None | Some(b'\n')) {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if start == *pos || *pos >= bytes.len() {
        return Err(IngestError::Corrupt("PPM header is truncated".into()));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| IngestError::Corrupt("PPM header field is not a number".into()))
}
