//! Per-step measurements: electrode potentials, network activity, excitation
//! frequency, coverage and rendered frames.

use std::fs;
use std::io;
use std::path::PathBuf;

use crate::fhn::{FieldState, InputPair, Lattice, Observer, SimParams, StepView};
use crate::ingest::{neighbourhood3, ConductiveGrid, ElectrodeSet, RgbImage};

pub const RED: [u8; 3] = [255, 0, 0];
pub const BLACK: [u8; 3] = [0, 0, 0];
pub const WHITE: [u8; 3] = [255, 255, 255];

#[derive(Debug, thiserror::Error)]
pub enum ObserveError {
    #[error("activity is undefined on a grid without conductive nodes")]
    EmptyMask,
}

/// `Σ (u − v)` over conductive nodes strictly closer than 2 to the
/// electrode, i.e. its 3×3 neighbourhood.
pub fn probe_potential(state: &FieldState, grid: &ConductiveGrid, x: usize, y: usize) -> f64 {
    neighbourhood3(x, y)
        .filter(|&(nx, ny)| grid.is_conductive(nx, ny))
        .map(|(nx, ny)| state.u(nx, ny) - state.v(nx, ny))
        .sum()
}

/// Fraction of conductive nodes with `u > u_active`.
pub fn measure_activity(
    state: &FieldState,
    grid: &ConductiveGrid,
    params: &SimParams,
) -> Result<f64, ObserveError> {
    if grid.conductive_count() == 0 {
        return Err(ObserveError::EmptyMask);
    }
    let active = state
        .conductive_u(grid)
        .filter(|&u| u > params.u_active)
        .count();
    Ok(active as f64 / grid.conductive_count() as f64)
}

fn count_active(state: &FieldState, lattice: &Lattice, threshold: f64) -> usize {
    let u = state.u_padded();
    lattice
        .runs()
        .iter()
        .map(|r| u[r.clone()].iter().filter(|&&x| x > threshold).count())
        .sum()
}

/// Sampled potential `p(t)` at one electrode for one input pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTrace {
    pub electrode: String,
    pub inputs: InputPair,
    pub samples: Vec<(u64, f64)>,
}

impl PotentialTrace {
    pub fn new(electrode: impl Into<String>, inputs: InputPair) -> Self {
        Self {
            electrode: electrode.into(),
            inputs,
            samples: Vec::new(),
        }
    }

    /// Trace from uniformly spaced values starting at `t = 1`.
    pub fn from_values(electrode: impl Into<String>, inputs: InputPair, values: &[f64]) -> Self {
        Self {
            electrode: electrode.into(),
            inputs,
            samples: values
                .iter()
                .enumerate()
                .map(|(i, &p)| (i as u64 + 1, p))
                .collect(),
        }
    }
}

/// Records every electrode's potential at a fixed cadence.
#[derive(Debug)]
pub struct PotentialRecorder {
    electrodes: Vec<(String, usize, usize)>,
    every: u64,
    traces: Vec<PotentialTrace>,
}

impl PotentialRecorder {
    pub fn new(electrodes: &ElectrodeSet, inputs: InputPair, every: u64) -> Self {
        Self {
            electrodes: electrodes
                .iter()
                .map(|e| (e.label.clone(), e.x, e.y))
                .collect(),
            every: every.max(1),
            traces: electrodes
                .iter()
                .map(|e| PotentialTrace::new(e.label.clone(), inputs))
                .collect(),
        }
    }

    pub fn into_traces(self) -> Vec<PotentialTrace> {
        self.traces
    }
}

impl Observer for PotentialRecorder {
    fn observe(&mut self, view: &StepView<'_>) -> io::Result<()> {
        let t = view.state.t();
        if t.is_multiple_of(self.every) {
            for ((_, x, y), trace) in self.electrodes.iter().zip(&mut self.traces) {
                trace
                    .samples
                    .push((t, probe_potential(view.state, view.grid, *x, *y)));
            }
        }
        Ok(())
    }
}

/// Activity fraction `A(t)` for one input pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityTrace {
    pub inputs: InputPair,
    pub samples: Vec<(u64, f64)>,
}

impl ActivityTrace {
    /// Mean activity over samples with `t >= from`; `None` if there are none.
    pub fn mean_from(&self, from: u64) -> Option<f64> {
        let tail: Vec<f64> = self
            .samples
            .iter()
            .filter(|(t, _)| *t >= from)
            .map(|&(_, a)| a)
            .collect();
        (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64)
    }
}

#[derive(Debug)]
pub struct ActivityRecorder {
    every: u64,
    trace: ActivityTrace,
}

impl ActivityRecorder {
    pub fn new(inputs: InputPair, every: u64) -> Self {
        Self {
            every: every.max(1),
            trace: ActivityTrace {
                inputs,
                samples: Vec::new(),
            },
        }
    }

    pub fn into_trace(self) -> ActivityTrace {
        self.trace
    }
}

impl Observer for ActivityRecorder {
    fn observe(&mut self, view: &StepView<'_>) -> io::Result<()> {
        let t = view.state.t();
        if t.is_multiple_of(self.every) && view.lattice.conductive_count() > 0 {
            let n = count_active(view.state, view.lattice, view.params.u_active);
            self.trace
                .samples
                .push((t, n as f64 / view.lattice.conductive_count() as f64));
        }
        Ok(())
    }
}

/// Per-node excitation counts `ω_s`, later normalised by their maximum.
/// Stored densely over the grid; non-conductive nodes stay at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMatrix {
    pub inputs: InputPair,
    width: usize,
    height: usize,
    values: Vec<f64>,
    steps: u64,
    normalized: bool,
}

impl FrequencyMatrix {
    pub fn new(grid: &ConductiveGrid, inputs: InputPair) -> Self {
        Self {
            inputs,
            width: grid.width(),
            height: grid.height(),
            values: vec![0.0; grid.width() * grid.height()],
            steps: 0,
            normalized: false,
        }
    }

    /// Matrix with explicit values (row-major), e.g. read back from CSV.
    pub fn from_values(
        inputs: InputPair,
        width: usize,
        height: usize,
        values: Vec<f64>,
        normalized: bool,
    ) -> Self {
        assert_eq!(
            values.len(),
            width * height,
            "value count must match dimensions"
        );
        Self {
            inputs,
            width,
            height,
            values,
            steps: 0,
            normalized,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Add one to every node with `u > u_active`.
    pub fn accumulate(&mut self, state: &FieldState, grid: &ConductiveGrid, params: &SimParams) {
        for (x, y) in grid.conductive_nodes() {
            if state.u(x, y) > params.u_active {
                self.values[y * self.width + x] += 1.0;
            }
        }
        self.steps += 1;
    }

    fn accumulate_lattice(&mut self, state: &FieldState, lattice: &Lattice, threshold: f64) {
        let u = state.u_padded();
        let stride = lattice.stride();
        for run in lattice.runs() {
            for p in run.clone() {
                if u[p] > threshold {
                    let (x, y) = (p % stride - 1, p / stride - 1);
                    self.values[y * self.width + x] += 1.0;
                }
            }
        }
        self.steps += 1;
    }

    /// Divide by the global maximum; an all-zero matrix is left as is.
    pub fn normalize(&mut self) {
        let max = self.values.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            for v in &mut self.values {
                *v /= max;
            }
        }
        self.normalized = true;
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// 16-bit binary PGM, value `round(ω · 65535)` (big-endian samples).
    pub fn to_pgm16(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n65535\n", self.width, self.height).into_bytes();
        for &v in &self.values {
            let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
            out.extend(q.to_be_bytes());
        }
        out
    }

    /// Grayscale rendering (white = most frequent).
    pub fn to_image(&self) -> RgbImage {
        let max = self.values.iter().copied().fold(0.0, f64::max);
        let pixels = self
            .values
            .iter()
            .map(|&v| {
                let g = if max > 0.0 {
                    (v / max * 255.0).round() as u8
                } else {
                    0
                };
                [g; 3]
            })
            .collect();
        RgbImage::new(self.width, self.height, pixels).expect("consistent dimensions")
    }
}

/// Accumulates a [`FrequencyMatrix`] after every step.
#[derive(Debug)]
pub struct FrequencyAccumulator {
    matrix: FrequencyMatrix,
}

impl FrequencyAccumulator {
    pub fn new(grid: &ConductiveGrid, inputs: InputPair) -> Self {
        Self {
            matrix: FrequencyMatrix::new(grid, inputs),
        }
    }

    pub fn into_matrix(self) -> FrequencyMatrix {
        self.matrix
    }
}

impl Observer for FrequencyAccumulator {
    fn observe(&mut self, view: &StepView<'_>) -> io::Result<()> {
        self.matrix
            .accumulate_lattice(view.state, view.lattice, view.params.u_active);
        Ok(())
    }
}

/// Tracks which conductive nodes have ever exceeded `u_active`.
#[derive(Debug)]
pub struct CoverageTracker {
    every: u64,
    seen: Vec<bool>,
}

impl CoverageTracker {
    /// Checking every step is exact; larger cadences may miss brief excitations.
    pub fn new(lattice: &Lattice, every: u64) -> Self {
        Self {
            every: every.max(1),
            seen: vec![false; lattice.padded_len()],
        }
    }

    pub fn covered(&self) -> usize {
        self.seen.iter().filter(|&&s| s).count()
    }

    pub fn fraction(&self, lattice: &Lattice) -> f64 {
        match lattice.conductive_count() {
            0 => 0.0,
            n => self.covered() as f64 / n as f64,
        }
    }

    pub fn was_covered(&self, lattice: &Lattice, x: usize, y: usize) -> bool {
        self.seen[lattice.index(x, y)]
    }
}

impl Observer for CoverageTracker {
    fn observe(&mut self, view: &StepView<'_>) -> io::Result<()> {
        if view.state.t().is_multiple_of(self.every) {
            let u = view.state.u_padded();
            let threshold = view.params.u_active;
            for run in view.lattice.runs() {
                for p in run.clone() {
                    self.seen[p] |= u[p] > threshold;
                }
            }
        }
        Ok(())
    }
}

/// Excited conductive nodes (`u > u_display`) red, other conductive nodes
/// black, everything else white.
pub fn render_frame(state: &FieldState, grid: &ConductiveGrid, params: &SimParams) -> RgbImage {
    let mut img = RgbImage::filled(grid.width(), grid.height(), WHITE);
    for (x, y) in grid.conductive_nodes() {
        let colour = if state.u(x, y) > params.u_display {
            RED
        } else {
            BLACK
        };
        img.set_pixel(x, y, colour);
    }
    img
}

/// Writes `frame_{inputs}_{t:08}.png` every `every` steps.
#[derive(Debug)]
pub struct FrameRecorder {
    dir: PathBuf,
    inputs: InputPair,
    every: u64,
    written: Vec<PathBuf>,
}

impl FrameRecorder {
    pub fn new(dir: impl Into<PathBuf>, inputs: InputPair, every: u64) -> Self {
        Self {
            dir: dir.into(),
            inputs,
            every: every.max(1),
            written: Vec::new(),
        }
    }

    pub fn frame_name(inputs: InputPair, t: u64) -> String {
        format!("frame_{inputs}_{t:08}.png")
    }

    pub fn into_written(self) -> Vec<PathBuf> {
        self.written
    }
}

impl Observer for FrameRecorder {
    fn observe(&mut self, view: &StepView<'_>) -> io::Result<()> {
        let t = view.state.t();
        if t.is_multiple_of(self.every) {
            fs::create_dir_all(&self.dir)?;
            let path = self.dir.join(Self::frame_name(self.inputs, t));
            render_frame(view.state, view.grid, view.params).save_png(&path)?;
            self.written.push(path);
        }
        Ok(())
    }
}
