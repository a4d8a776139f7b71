//! Conductive grids: built from thresholded RGB images or synthetic geometry,
//! plus electrode placement on top of them.

mod geometry;
mod image;

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use self::geometry::{synthesize, GeometrySpec, Primitive};
pub use self::image::{decode_image, load_image, RgbImage};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("image file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("failed to read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported image format (expected PNG or binary PPM)")]
    UnsupportedFormat,
    #[error("corrupt image data: {0}")]
    Corrupt(String),
    #[error("{pixels} pixels do not fill a {width}x{height} image")]
    DimensionMismatch {
        width: usize,
        height: usize,
        pixels: usize,
    },
    #[error("grid dimensions must be at least 1x1, got {width}x{height}")]
    EmptyGrid { width: usize, height: usize },
    #[error("primitive #{index} ({kind}) does not fit in the {width}x{height} grid")]
    PrimitiveOutOfBounds {
        index: usize,
        kind: &'static str,
        width: usize,
        height: usize,
    },
    #[error("primitive #{index} is malformed: {reason}")]
    InvalidPrimitive { index: usize, reason: String },
    #[error("electrode {label} at ({x}, {y}) lies outside the {width}x{height} grid")]
    ElectrodeOutOfBounds {
        label: String,
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("electrode label {0} is used more than once")]
    DuplicateElectrode(String),
}

/// Strict per-channel lower bounds for the conductivity predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdSpec {
    pub r_min: u8,
    pub g_min: u8,
    pub b_min: u8,
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        Self {
            r_min: 40,
            g_min: 19,
            b_min: 19,
        }
    }
}

impl ThresholdSpec {
    pub fn is_conductive(&self, [r, g, b]: [u8; 3]) -> bool {
        r > self.r_min && g > self.g_min && b > self.b_min
    }
}

/// Boolean mask of conductive nodes; the simulation domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConductiveGrid {
    width: usize,
    height: usize,
    mask: Vec<bool>,
    conductive_count: usize,
}

impl ConductiveGrid {
    pub fn from_mask(width: usize, height: usize, mask: Vec<bool>) -> Result<Self, IngestError> {
        if width == 0 || height == 0 {
            return Err(IngestError::EmptyGrid { width, height });
        }
        if width.checked_mul(height) != Some(mask.len()) {
            return Err(IngestError::DimensionMismatch {
                width,
                height,
                pixels: mask.len(),
            });
        }
        let conductive_count = mask.iter().filter(|&&m| m).count();
        Ok(Self {
            width,
            height,
            mask,
            conductive_count,
        })
    }

    /// Grid where every node is conductive.
    pub fn full(width: usize, height: usize) -> Result<Self, IngestError> {
        Self::from_mask(width, height, vec![true; width * height])
    }

    /// Build a grid from an ASCII picture: `#` (or any non-`.`, non-space
    /// character) marks a conductive node. Rows must have equal length.
    pub fn from_ascii(rows: &[&str]) -> Result<Self, IngestError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut mask = Vec::with_capacity(width * height);
        for row in rows {
            if row.len() != width {
                return Err(IngestError::DimensionMismatch {
                    width,
                    height,
                    pixels: row.len(),
                });
            }
            mask.extend(row.bytes().map(|c| c != b'.' && c != b' '));
        }
        Self::from_mask(width, height, mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn conductive_count(&self) -> usize {
        self.conductive_count
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height
    }

    /// `false` for out-of-bounds positions.
    pub fn is_conductive(&self, x: usize, y: usize) -> bool {
        self.contains(x, y) && self.mask[y * self.width + x]
    }

    /// Iterator over conductive node positions in row-major order.
    pub fn conductive_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// SHA-256 over the dimensions and mask; identifies the grid in checkpoints.
    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update((self.width as u64).to_le_bytes());
        hasher.update((self.height as u64).to_le_bytes());
        hasher.update(self.mask_bits());
        hasher.finalize().into()
    }

    /// Mask packed eight nodes per byte, least significant bit first.
    pub fn mask_bits(&self) -> Vec<u8> {
        self.mask
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &m)| acc | (u8::from(m) << i))
            })
            .collect()
    }

    pub fn from_mask_bits(width: usize, height: usize, bits: &[u8]) -> Result<Self, IngestError> {
        let n = width * height;
        if bits.len() != n.div_ceil(8) {
            return Err(IngestError::DimensionMismatch {
                width,
                height,
                pixels: bits.len() * 8,
            });
        }
        let mask = (0..n).map(|i| bits[i / 8] >> (i % 8) & 1 == 1).collect();
        Self::from_mask(width, height, mask)
    }

    /// Binary PGM (P5): 255 for conductive nodes, 0 elsewhere.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.mask.iter().map(|&m| if m { 255u8 } else { 0 }));
        out
    }
}

/// Node (i, j) is conductive iff all three channels strictly exceed their bounds.
pub fn threshold_mask(image: &RgbImage, spec: &ThresholdSpec) -> ConductiveGrid {
    let mask = image
        .pixels()
        .iter()
        .map(|&px| spec.is_conductive(px))
        .collect();
    ConductiveGrid::from_mask(image.width(), image.height(), mask)
        .expect("a decoded image has consistent dimensions")
}

/// A requested electrode position, as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectrodeSpec {
    pub label: String,
    pub x: usize,
    pub y: usize,
}

impl ElectrodeSpec {
    pub fn new(label: impl Into<String>, x: usize, y: usize) -> Self {
        Self {
            label: label.into(),
            x,
            y,
        }
    }
}

/// A validated electrode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Electrode {
    pub label: String,
    pub x: usize,
    pub y: usize,
    /// No conductive node in the 3×3 neighbourhood: the probe will always read 0.
    pub isolated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ElectrodeSet {
    electrodes: Vec<Electrode>,
}

impl ElectrodeSet {
    pub fn iter(&self) -> std::slice::Iter<'_, Electrode> {
        self.electrodes.iter()
    }

    pub fn len(&self) -> usize {
        self.electrodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.electrodes.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&Electrode> {
        self.electrodes.iter().find(|e| e.label == label)
    }

    pub fn isolated(&self) -> impl Iterator<Item = &Electrode> {
        self.electrodes.iter().filter(|e| e.isolated)
    }
}

impl<'a> IntoIterator for &'a ElectrodeSet {
    type Item = &'a Electrode;
    type IntoIter = std::slice::Iter<'a, Electrode>;

    fn into_iter(self) -> Self::IntoIter {
        self.electrodes.iter()
    }
}

pub fn place_electrodes(
    grid: &ConductiveGrid,
    coords: &[ElectrodeSpec],
) -> Result<ElectrodeSet, IngestError> {
    let mut seen = HashSet::new();
    let mut electrodes = Vec::with_capacity(coords.len());
    for spec in coords {
        if !grid.contains(spec.x, spec.y) {
            return Err(IngestError::ElectrodeOutOfBounds {
                label: spec.label.clone(),
                x: spec.x,
                y: spec.y,
                width: grid.width(),
                height: grid.height(),
            });
        }
        if !seen.insert(spec.label.as_str()) {
            return Err(IngestError::DuplicateElectrode(spec.label.clone()));
        }
        let isolated = !neighbourhood3(spec.x, spec.y).any(|(x, y)| grid.is_conductive(x, y));
        electrodes.push(Electrode {
            label: spec.label.clone(),
            x: spec.x,
            y: spec.y,
            isolated,
        });
    }
    Ok(ElectrodeSet { electrodes })
}

/// In-bounds-agnostic 3×3 neighbourhood (callers filter with `is_conductive`).
pub(crate) fn neighbourhood3(x: usize, y: usize) -> impl Iterator<Item = (usize, usize)> {
    (-1i64..=1).flat_map(move |dy| {
        (-1i64..=1).filter_map(move |dx| {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            (nx >= 0 && ny >= 0).then_some((nx as usize, ny as usize))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_pixel(rgb: [u8; 3]) -> RgbImage {
        RgbImage::new(1, 1, vec![rgb]).unwrap()
    }

    #[test]
    fn threshold_boundary_cases() {
        let spec = ThresholdSpec::default();
        assert_eq!(
            threshold_mask(&one_pixel([41, 20, 20]), &spec).conductive_count(),
            1
        );
        assert_eq!(
            threshold_mask(&one_pixel([40, 255, 255]), &spec).conductive_count(),
            0
        );
        assert_eq!(
            threshold_mask(&one_pixel([255, 255, 255]), &spec).conductive_count(),
            1
        );
        assert_eq!(
            threshold_mask(&one_pixel([41, 19, 20]), &spec).conductive_count(),
            0
        );
        assert_eq!(
            threshold_mask(&one_pixel([41, 20, 19]), &spec).conductive_count(),
            0
        );
    }

    #[test]
    fn zero_sized_grid_rejected() {
        assert!(matches!(
            ConductiveGrid::from_mask(0, 3, vec![]),
            Err(IngestError::EmptyGrid { .. })
        ));
    }

    #[test]
    fn mask_bits_round_trip() {
        let grid = ConductiveGrid::from_ascii(&["#..#.", "##...", "....#"]).unwrap();
        let back = ConductiveGrid::from_mask_bits(5, 3, &grid.mask_bits()).unwrap();
        assert_eq!(back, grid);
        assert_eq!(grid.conductive_count(), 5);
    }

    #[test]
    fn pgm_export() {
        let grid = ConductiveGrid::from_ascii(&["#.", ".#"]).unwrap();
        assert_eq!(grid.to_pgm(), b"P5\n2 2\n255\n\xff\x00\x00\xff");
    }

    #[test]
    fn electrode_on_conductive_node_not_isolated() {
        let grid = ConductiveGrid::from_ascii(&["...", ".#.", "..."]).unwrap();
        let set = place_electrodes(&grid, &[ElectrodeSpec::new("E1", 1, 1)]).unwrap();
        assert!(!set.get("E1").unwrap().isolated);
    }

    #[test]
    fn electrode_in_dead_region_is_flagged() {
        let grid = ConductiveGrid::from_ascii(&["#....", ".....", "....."]).unwrap();
        let set = place_electrodes(
            &grid,
            &[
                ElectrodeSpec::new("far", 3, 1),
                ElectrodeSpec::new("near", 1, 1),
            ],
        )
        .unwrap();
        assert!(set.get("far").unwrap().isolated);
        // (0, 0) is a diagonal neighbour of (1, 1)
        assert!(!set.get("near").unwrap().isolated);
        assert_eq!(set.isolated().count(), 1);
    }

    #[test]
    fn electrode_errors() {
        let grid = ConductiveGrid::full(4, 3).unwrap();
        assert!(matches!(
            place_electrodes(&grid, &[ElectrodeSpec::new("E1", 4, 0)]),
            Err(IngestError::ElectrodeOutOfBounds { .. })
        ));
        assert!(matches!(
            place_electrodes(
                &grid,
                &[
                    ElectrodeSpec::new("E1", 0, 0),
                    ElectrodeSpec::new("E1", 1, 1)
                ]
            ),
            Err(IngestError::DuplicateElectrode(_))
        ));
    }

    fn arb_image() -> impl Strategy<Value = RgbImage> {
        (1usize..8, 1usize..8).prop_flat_map(|(w, h)| {
            prop::collection::vec(any::<[u8; 3]>(), w * h)
                .prop_map(move |px| RgbImage::new(w, h, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn raising_a_threshold_never_adds_nodes(
            img in arb_image(),
            base in any::<[u8; 3]>(),
            bump in any::<[u8; 3]>(),
        ) {
            let lo = ThresholdSpec { r_min: base[0], g_min: base[1], b_min: base[2] };
            let hi = ThresholdSpec {
                r_min: base[0].saturating_add(bump[0]),
                g_min: base[1].saturating_add(bump[1]),
                b_min: base[2].saturating_add(bump[2]),
            };
            let a = threshold_mask(&img, &lo);
            let b = threshold_mask(&img, &hi);
            for (x, y) in b.conductive_nodes() {
                prop_assert!(a.is_conductive(x, y));
            }
        }

        #[test]
        fn conductive_plus_failing_equals_total(img in arb_image(), t in any::<[u8; 3]>()) {
            let spec = ThresholdSpec { r_min: t[0], g_min: t[1], b_min: t[2] };
            let grid = threshold_mask(&img, &spec);
            let failing = img.pixels().iter().filter(|&&px| !spec.is_conductive(px)).count();
            prop_assert_eq!(grid.conductive_count() + failing, img.width() * img.height());
        }

        #[test]
        fn validated_electrodes_index_legal_nodes(
            w in 1usize..20, h in 1usize..20,
            pts in prop::collection::vec((0usize..25, 0usize..25), 0..10),
        ) {
            let grid = ConductiveGrid::full(w, h).unwrap();
            let specs: Vec<_> = pts
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| ElectrodeSpec::new(format!("E{i}"), x, y))
                .collect();
            if let Ok(set) = place_electrodes(&grid, &specs) {
                for e in &set {
                    prop_assert!(grid.contains(e.x, e.y));
                }
            }
        }
    }
}
