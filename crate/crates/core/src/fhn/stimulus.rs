use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::FieldState;
use crate::ingest::ConductiveGrid;

/// A set of grid nodes, used for stimulation sites and output channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    /// Nodes within Euclidean distance `radius` of `center`.
    Disc { center: [usize; 2], radius: f64 },
    /// Inclusive rectangle.
    Rect { min: [usize; 2], max: [usize; 2] },
}

impl Region {
    pub fn disc(x: usize, y: usize, radius: f64) -> Self {
        Region::Disc {
            center: [x, y],
            radius,
        }
    }

    pub fn rect(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Region::Rect {
            min: [x0.min(x1), y0.min(y1)],
            max: [x0.max(x1), y0.max(y1)],
        }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        match *self {
            Region::Disc { center, radius } => {
                let dx = x as f64 - center[0] as f64;
                let dy = y as f64 - center[1] as f64;
                dx * dx + dy * dy <= radius * radius
            }
            Region::Rect { min, max } => {
                (min[0]..=max[0]).contains(&x) && (min[1]..=max[1]).contains(&y)
            }
        }
    }

    /// Conductive nodes of the region, row-major.
    pub fn conductive_nodes(&self, grid: &ConductiveGrid) -> Vec<(usize, usize)> {
        let (x0, y0, x1, y1) = match *self {
            Region::Disc { center, radius } => {
                let r = if radius.is_finite() && radius > 0.0 {
                    radius.floor() as usize
                } else {
                    0
                };
                (
                    center[0].saturating_sub(r),
                    center[1].saturating_sub(r),
                    center[0].saturating_add(r),
                    center[1].saturating_add(r),
                )
            }
            Region::Rect { min, max } => (min[0], min[1], max[0], max[1]),
        };
        let x1 = x1.min(grid.width().saturating_sub(1));
        let y1 = y1.min(grid.height().saturating_sub(1));
        let mut nodes = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                if grid.is_conductive(x, y) && self.contains(x, y) {
                    nodes.push((x, y));
                }
            }
        }
        nodes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
#[derive(Default)]
pub enum StimulusMode {
    /// `u := 1` on the region at `t = 0`.
    #[default]
    Impulse,
    /// Adds `amplitude` to du/dt on the region for the first `duration` steps.
    Current { amplitude: f64, duration: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub region: Region,
    #[serde(flatten)]
    pub mode: StimulusMode,
}

/// Default stimulation radius in nodes.
pub const DEFAULT_STIMULUS_RADIUS: f64 = 5.0;

impl Stimulus {
    pub fn impulse(region: Region) -> Self {
        Self {
            region,
            mode: StimulusMode::Impulse,
        }
    }

    pub fn current(region: Region, amplitude: f64, duration: u64) -> Self {
        Self {
            region,
            mode: StimulusMode::Current {
                amplitude,
                duration,
            },
        }
    }

    /// Current injected at iteration `t`, if any.
    pub(crate) fn current_at(&self, t: u64) -> Option<f64> {
        match self.mode {
            StimulusMode::Current {
                amplitude,
                duration,
            } if t < duration => Some(amplitude),
            _ => None,
        }
    }
}

/// Set `u := 1` on every conductive node of the stimulus region; `v` is left
/// untouched. Current-mode stimuli are ignored here.
pub fn apply_impulse(state: &mut FieldState, grid: &ConductiveGrid, stim: &Stimulus) -> usize {
    if stim.mode != StimulusMode::Impulse {
        return 0;
    }
    let mut n = 0;
    for (x, y) in stim.region.conductive_nodes(grid) {
        let v = state.v(x, y);
        if state.set(grid, x, y, 1.0, v) {
            n += 1;
        }
    }
    n
}

/// Which of the two input sites are excited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InputPair {
    pub x: bool,
    pub y: bool,
}

impl InputPair {
    pub const P00: InputPair = InputPair { x: false, y: false };
    pub const P01: InputPair = InputPair { x: false, y: true };
    pub const P10: InputPair = InputPair { x: true, y: false };
    pub const P11: InputPair = InputPair { x: true, y: true };

    /// The three stimulated pairs used in gate experiments, in canonical order.
    pub const GATE_PAIRS: [InputPair; 3] = [Self::P01, Self::P10, Self::P11];

    pub fn new(x: bool, y: bool) -> Self {
        Self { x, y }
    }

    /// Position among [`InputPair::GATE_PAIRS`]; `None` for 00.
    pub fn gate_index(self) -> Option<usize> {
        match (self.x, self.y) {
            (false, true) => Some(0),
            (true, false) => Some(1),
            (true, true) => Some(2),
            (false, false) => None,
        }
    }
}

impl fmt::Display for InputPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", u8::from(self.x), u8::from(self.y))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("input pair must be one of 00, 01, 10, 11; got {0:?}")]
pub struct ParseInputPairError(String);

impl FromStr for InputPair {
    type Err = ParseInputPairError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "00" => Ok(Self::P00),
            "01" => Ok(Self::P01),
            "10" => Ok(Self::P10),
            "11" => Ok(Self::P11),
            _ => Err(ParseInputPairError(s.to_owned())),
        }
    }
}

impl Serialize for InputPair {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InputPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
