//! Turn checkpoints and PGM maps into PNG images.

use std::fs;
use std::path::Path;

use super::RunError;
use crate::fhn::{checkpoint, SimParams};
use crate::ingest::{ConductiveGrid, RgbImage};
use crate::observe::render_frame;

/// A decoded binary PGM (P5), samples widened to `u16`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

impl Pgm {
    pub fn parse(bytes: &[u8]) -> Result<Self, String> {
        let mut pos = 0;
        let token = |pos: &mut usize| -> Result<String, String> {
            loop {
                while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                    *pos += 1;
                }
                if *pos < bytes.len() && bytes[*pos] == b'#' {
                    while *pos < bytes.len() && bytes[*pos] != b'\n' {
                        *pos += 1;
                    }
                } else {
                    break;
                }
            }
            let start = *pos;
            while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if start == *pos {
                return Err("truncated PGM header".into());
            }
            Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
        };
        if token(&mut pos)? != "P5" {
            return Err("not a binary PGM".into());
        }
        let num = |pos: &mut usize| -> Result<usize, String> {
            token(pos)?
                .parse()
                .map_err(|_| "bad number in PGM header".to_owned())
        };
        let width = num(&mut pos)?;
        let height = num(&mut pos)?;
        let maxval = num(&mut pos)?;
        if !(1..=65535).contains(&maxval) {
            return Err(format!("PGM maxval {maxval} out of range"));
        }
        pos += 1;
        let n = width * height;
        let wide = maxval > 255;
        let need = if wide { 2 * n } else { n };
        let raster = bytes
            .get(pos..pos + need)
            .ok_or_else(|| "truncated PGM raster".to_owned())?;
        let samples = if wide {
            raster
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect()
        } else {
            raster.iter().map(|&b| u16::from(b)).collect()
        };
        Ok(Self {
            width,
            height,
            maxval: maxval as u16,
            samples,
        })
    }

    /// Grey levels scaled to 0–255.
    pub fn to_image(&self) -> RgbImage {
        let m = f64::from(self.maxval);
        let pixels = self
            .samples
            .iter()
            .map(|&s| [(f64::from(s) / m * 255.0).round() as u8; 3])
            .collect();
        RgbImage::new(self.width, self.height, pixels).expect("consistent dimensions")
    }

    /// Non-zero samples are conductive.
    pub fn to_grid(&self) -> Result<ConductiveGrid, String> {
        ConductiveGrid::from_mask(
            self.width,
            self.height,
            self.samples.iter().map(|&s| s > 0).collect(),
        )
        .map_err(|e| e.to_string())
    }
}

/// Render a checkpoint (as a wave frame) or a PGM (as greys) to PNG.
pub fn render_file(input: &Path, output: &Path) -> Result<(), RunError> {
    let bytes = fs::read(input).map_err(|e| RunError::io(input, e))?;
    let img = if bytes.starts_with(checkpoint::MAGIC) {
        let (grid, state) = checkpoint::decode(&bytes)
            .map_err(|e| RunError::Config(format!("{}: {e}", input.display())))?;
        render_frame(&state, &grid, &SimParams::default())
    } else {
        Pgm::parse(&bytes)
            .map_err(|e| RunError::Config(format!("{}: {e}", input.display())))?
            .to_image()
    };
    img.save_png(output).map_err(|e| RunError::io(output, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fhn::FieldState;
    use crate::fhn::InputPair;
    use crate::ingest::decode_image;
    use crate::observe::{FrequencyMatrix, RED};

    #[test]
    fn mask_pgm_round_trip() {
        let grid = ConductiveGrid::from_ascii(&["#.#", "###"]).unwrap();
        let pgm = Pgm::parse(&grid.to_pgm()).unwrap();
        assert_eq!(pgm.maxval, 255);
        assert_eq!(pgm.to_grid().unwrap(), grid);
    }

    #[test]
    fn sixteen_bit_frequency() {
        let m = FrequencyMatrix::from_values(InputPair::P01, 2, 1, vec![0.5, 1.0], true);
        let pgm = Pgm::parse(&m.to_pgm16()).unwrap();
        assert_eq!(pgm.samples, vec![32768, 65535]);
        assert_eq!(pgm.to_image().pixel(1, 0), [255; 3]);
    }

    #[test]
    fn renders_checkpoint_and_rejects_junk() {
        let dir = tempfile::tempdir().unwrap();
        let grid = ConductiveGrid::full(4, 3).unwrap();
        let mut state = FieldState::resting(&grid);
        state.set(&grid, 1, 1, 0.9, 0.0);
        let ck = dir.path().join("s.ckpt");
        checkpoint::save(&ck, &grid, &state).unwrap();
        let out = dir.path().join("s.png");
        render_file(&ck, &out).unwrap();
        let img = decode_image(&fs::read(&out).unwrap()).unwrap();
        assert_eq!(img.pixel(1, 1), RED);

        let junk = dir.path().join("junk");
        fs::write(&junk, b"hello").unwrap();
        assert!(matches!(render_file(&junk, &out), Err(RunError::Config(_))));
        assert!(matches!(
            render_file(&dir.path().join("missing"), &out),
            Err(RunError::Io { .. })
        ));
    }

    #[test]
    fn truncated_pgm() {
        assert!(Pgm::parse(b"P5\n2 2\n255\n\x00").is_err());
        assert!(Pgm::parse(b"P5\n2").is_err());
    }
}
