//! Synthetic conductive networks from a declarative list of primitives.
//!
//! Node `(x, y)` has its centre at the point `(x, y)`; it is conductive iff
//! that centre lies inside the footprint of at least one primitive. The
//! y axis points down, as in image coordinates, and angles are in degrees
//! measured from +x towards +y.

use serde::{Deserialize, Serialize};

use super::{ConductiveGrid, IngestError};

/// Slack for points lying exactly on a footprint boundary.
const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    #[serde(default)]
    pub primitives: Vec<Primitive>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Primitive {
    /// Straight bar with flat ends: perpendicular distance to the segment
    /// at most `width / 2` and projection within the segment.
    Channel {
        from: [f64; 2],
        to: [f64; 2],
        width: f64,
    },
    Disc {
        center: [f64; 2],
        radius: f64,
    },
    /// Star of channels radiating from `center`, plus a hub disc of
    /// diameter `arm_width`. Without `arm_angles` the arms are evenly spaced
    /// starting at 0°.
    Junction {
        center: [f64; 2],
        arm_count: usize,
        arm_length: f64,
        arm_width: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arm_angles: Option<Vec<f64>>,
    },
}

impl Primitive {
    fn kind(&self) -> &'static str {
        match self {
            Primitive::Channel { .. } => "channel",
            Primitive::Disc { .. } => "disc",
            Primitive::Junction { .. } => "junction",
        }
    }

    /// Expand into channels and discs only.
    fn shapes(&self, index: usize) -> Result<Vec<Shape>, IngestError> {
        let invalid = |reason: String| IngestError::InvalidPrimitive { index, reason };
        match *self {
            Primitive::Channel { from, to, width } => {
                if !(width >= 0.0) || !all_finite(&[from[0], from[1], to[0], to[1]]) {
                    return Err(invalid(
                        "channel needs finite endpoints and width >= 0".into(),
                    ));
                }
                Ok(vec![Shape::Bar {
                    from,
                    to,
                    half: width / 2.0,
                }])
            }
            Primitive::Disc { center, radius } => {
                if !(radius >= 0.0) || !all_finite(&center) {
                    return Err(invalid("disc needs a finite center and radius >= 0".into()));
                }
                Ok(vec![Shape::Disc { center, radius }])
            }
            Primitive::Junction {
                center,
                arm_count,
                arm_length,
                arm_width,
                ref arm_angles,
            } => {
                if !(arm_length >= 0.0 && arm_width >= 0.0) || !all_finite(&center) {
                    return Err(invalid("junction needs finite, non-negative sizes".into()));
                }
                let angles: Vec<f64> = match arm_angles {
                    Some(a) if a.len() != arm_count => {
                        return Err(invalid(format!(
                            "{} arm angles given for {arm_count} arms",
                            a.len()
                        )))
                    }
                    Some(a) => a.clone(),
                    None => (0..arm_count)
                        .map(|i| 360.0 * i as f64 / arm_count as f64)
                        .collect(),
                };
                let mut shapes = vec![Shape::Disc {
                    center,
                    radius: arm_width / 2.0,
                }];
                for deg in angles {
                    let (s, c) = deg.to_radians().sin_cos();
                    let tip = [center[0] + arm_length * c, center[1] + arm_length * s];
                    shapes.push(Shape::Bar {
                        from: center,
                        to: tip,
                        half: arm_width / 2.0,
                    });
                }
                Ok(shapes)
            }
        }
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Bar {
        from: [f64; 2],
        to: [f64; 2],
        half: f64,
    },
    Disc {
        center: [f64; 2],
        radius: f64,
    },
}

impl Shape {
    /// Axis-aligned bounds of the footprint: (min_x, min_y, max_x, max_y).
    fn bounds(&self) -> [f64; 4] {
        match *self {
            Shape::Disc { center, radius } => [
                center[0] - radius,
                center[1] - radius,
                center[0] + radius,
                center[1] + radius,
            ],
            Shape::Bar { from, to, half } if from == to => [
                from[0] - half,
                from[1] - half,
                from[0] + half,
                from[1] + half,
            ],
            Shape::Bar { from, to, half } => {
                let (ex, ey) = (to[0] - from[0], to[1] - from[1]);
                let len = (ex * ex + ey * ey).sqrt();
                let (nx, ny) = (-ey / len, ex / len);
                let corners = [
                    [from[0] + nx * half, from[1] + ny * half],
                    [from[0] - nx * half, from[1] - ny * half],
                    [to[0] + nx * half, to[1] + ny * half],
                    [to[0] - nx * half, to[1] - ny * half],
                ];
                corners.iter().fold(
                    [
                        f64::INFINITY,
                        f64::INFINITY,
                        f64::NEG_INFINITY,
                        f64::NEG_INFINITY,
                    ],
                    |b, c| {
                        [
                            b[0].min(c[0]),
                            b[1].min(c[1]),
                            b[2].max(c[0]),
                            b[3].max(c[1]),
                        ]
                    },
                )
            }
        }
    }

    fn contains(&self, px: f64, py: f64) -> bool {
        match *self {
            Shape::Disc { center, radius } => {
                let (dx, dy) = (px - center[0], py - center[1]);
                dx * dx + dy * dy <= radius * radius + EPS
            }
            Shape::Bar { from, to, half } => {
                let (ex, ey) = (to[0] - from[0], to[1] - from[1]);
                let len = (ex * ex + ey * ey).sqrt();
                let (rx, ry) = (px - from[0], py - from[1]);
                if len == 0.0 {
                    // degenerate bar: a square of side `2 * half`
                    return rx.abs() <= half + EPS && ry.abs() <= half + EPS;
                }
                let along = (rx * ex + ry * ey) / len;
                let across = (rx * ey - ry * ex) / len;
                along >= -EPS && along <= len + EPS && across.abs() <= half + EPS
            }
        }
    }
}

/// Rasterize `spec` onto a `grid_w × grid_h` grid (union of all footprints).
pub fn synthesize(
    grid_w: usize,
    grid_h: usize,
    spec: &GeometrySpec,
) -> Result<ConductiveGrid, IngestError> {
    if grid_w == 0 || grid_h == 0 {
        return Err(IngestError::EmptyGrid {
            width: grid_w,
            height: grid_h,
        });
    }
    let mut mask = vec![false; grid_w * grid_h];
    // footprints must stay inside the pixel area [-0.5, n - 0.5]
    let (lo, hi_x, hi_y) = (
        -0.5 - EPS,
        grid_w as f64 - 0.5 + EPS,
        grid_h as f64 - 0.5 + EPS,
    );

    for (index, prim) in spec.primitives.iter().enumerate() {
        for shape in prim.shapes(index)? {
            let b = shape.bounds();
            if b[0] < lo || b[1] < lo || b[2] > hi_x || b[3] > hi_y {
                return Err(IngestError::PrimitiveOutOfBounds {
                    index,
                    kind: prim.kind(),
                    width: grid_w,
                    height: grid_h,
                });
            }
            let x0 = (b[0] - EPS).ceil().max(0.0) as usize;
            let y0 = (b[1] - EPS).ceil().max(0.0) as usize;
            let x1 = ((b[2] + EPS).floor() as usize).min(grid_w - 1);
            let y1 = ((b[3] + EPS).floor() as usize).min(grid_h - 1);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if shape.contains(x as f64, y as f64) {
                        mask[y * grid_w + x] = true;
                    }
                }
            }
        }
    }
    ConductiveGrid::from_mask(grid_w, grid_h, mask)
}
