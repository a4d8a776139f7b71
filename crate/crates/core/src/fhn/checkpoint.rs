//! Binary checkpoints for pausing and resuming long runs.
//!
//! Layout, all integers little-endian:
//!
//! | bytes          | content                                   |
//! |----------------|-------------------------------------------|
//! | 8              | magic `ACTNCKP1`                          |
//! | 8 + 8          | width, height (u64)                       |
//! | 32             | SHA-256 grid digest                       |
//! | 8              | iteration `t` (u64)                       |
//! | 8              | conductive node count `n` (u64)           |
//! | ⌈w·h/8⌉        | mask, LSB-first bit packing               |
//! | 8·n            | `u` at conductive nodes, row-major (f64)  |
//! | 8·n            | `v` at conductive nodes, row-major (f64)  |

use std::fs;
use std::io;
use std::path::Path;

use super::{FieldState, Lattice};
use crate::ingest::ConductiveGrid;

pub const MAGIC: &[u8; 8] = b"ACTNCKP1";

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("checkpoint is truncated or malformed: {0}")]
    Corrupt(&'static str),
    #[error("checkpoint was written for a different grid")]
    GridMismatch,
}

pub fn encode(grid: &ConductiveGrid, state: &FieldState) -> Vec<u8> {
    let n = grid.conductive_count();
    let mut out = Vec::with_capacity(72 + grid.mask_bits().len() + 16 * n);
    out.extend_from_slice(MAGIC);
    out.extend((grid.width() as u64).to_le_bytes());
    out.extend((grid.height() as u64).to_le_bytes());
    out.extend(grid.digest());
    out.extend(state.t.to_le_bytes());
    out.extend((n as u64).to_le_bytes());
    out.extend(grid.mask_bits());
    for (x, y) in grid.conductive_nodes() {
        out.extend(state.u(x, y).to_le_bytes());
    }
    for (x, y) in grid.conductive_nodes() {
        out.extend(state.v(x, y).to_le_bytes());
    }
    out
}

/// Decode a checkpoint, reconstructing the grid it was written for.
pub fn decode(bytes: &[u8]) -> Result<(ConductiveGrid, FieldState), CheckpointError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let width = r.u64()? as usize;
    let height = r.u64()? as usize;
    let digest: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
    let t = r.u64()?;
    let n = r.u64()? as usize;
    let cells = width
        .checked_mul(height)
        .ok_or(CheckpointError::Corrupt("dimensions overflow"))?;
    let bits = r.take(cells.div_ceil(8))?;
    let grid = ConductiveGrid::from_mask_bits(width, height, bits)
        .map_err(|_| CheckpointError::Corrupt("bad mask"))?;
    if grid.digest() != digest {
        return Err(CheckpointError::Corrupt("grid digest does not match mask"));
    }
    if grid.conductive_count() != n {
        return Err(CheckpointError::Corrupt("node count does not match mask"));
    }
    let lattice = Lattice::new(&grid);
    let mut state = FieldState::resting(&grid);
    state.t = t;
    for field in [&mut state.u, &mut state.v] {
        for i in lattice.conductive_indices() {
            field[i] = r.f64()?;
        }
    }
    if r.pos != bytes.len() {
        return Err(CheckpointError::Corrupt("trailing bytes"));
    }
    Ok((grid, state))
}

pub fn save(path: &Path, grid: &ConductiveGrid, state: &FieldState) -> io::Result<()> {
    fs::write(path, encode(grid, state))
}

pub fn load(path: &Path) -> Result<(ConductiveGrid, FieldState), CheckpointError> {
    decode(&fs::read(path)?)
}

/// Load a checkpoint and check it belongs to `grid`.
pub fn load_for(path: &Path, grid: &ConductiveGrid) -> Result<FieldState, CheckpointError> {
    let (stored, state) = load(path)?;
    if stored.digest() != grid.digest() {
        return Err(CheckpointError::GridMismatch);
    }
    Ok(state)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(CheckpointError::Corrupt("unexpected end of file"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fhn::{run, run_from, InputPair, InputSites, SimParams, Simulator};

    #[test]
    fn resume_matches_uninterrupted_run() {
        let grid = ConductiveGrid::from_ascii(&[
            "##########..",
            "##########..",
            "....######..",
            "....########",
        ])
        .unwrap();
        let params = SimParams::default();
        let sites = InputSites::impulses_at((0, 0), (11, 3), 1.0);
        let straight = run(&grid, &params, InputPair::P11, &sites, 40, &mut []).unwrap();

        let half = run(&grid, &params, InputPair::P11, &sites, 25, &mut []).unwrap();
        let bytes = encode(&grid, &half);
        let (g2, restored) = decode(&bytes).unwrap();
        assert_eq!(g2, grid);
        assert_eq!(restored, half);
        let mut sim = Simulator::with_state(&grid, params, restored).unwrap();
        run_from(&mut sim, &grid, &[], 15, &mut []).unwrap();
        assert_eq!(sim.state(), &straight);
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(matches!(
            decode(b"P5\n1 1\n255\n\0"),
            Err(CheckpointError::BadMagic)
        ));
        let grid = ConductiveGrid::full(3, 2).unwrap();
        let mut bytes = encode(&grid, &FieldState::resting(&grid));
        bytes.pop();
        assert!(matches!(decode(&bytes), Err(CheckpointError::Corrupt(_))));
    }

    #[test]
    fn grid_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        let grid = ConductiveGrid::full(3, 2).unwrap();
        save(&path, &grid, &FieldState::resting(&grid)).unwrap();
        let other = ConductiveGrid::from_ascii(&["###", "#.#"]).unwrap();
        assert!(matches!(
            load_for(&path, &other),
            Err(CheckpointError::GridMismatch)
        ));
        assert!(load_for(&path, &grid).is_ok());
    }
}
