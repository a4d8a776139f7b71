//! Fixtures shared by the kernel benchmarks.

use actinet::fhn::{apply_impulse, Region, SimParams, Simulator, Stimulus, StimulusMode};
use actinet::ingest::ConductiveGrid;

/// Square lattice of bars `width` nodes wide every `period` nodes. Period 16
/// and width 3 leave about 34% of the grid conductive.
pub fn bar_lattice(n: usize, period: usize, width: usize) -> ConductiveGrid {
    let on = |i: usize| i % period < width;
    let mask = (0..n * n).map(|k| on(k % n) || on(k / n)).collect();
    ConductiveGrid::from_mask(n, n, mask).expect("valid dimensions")
}

/// Simulator on `grid` with a wave launched from the top-left corner.
pub fn excited(grid: &ConductiveGrid) -> Simulator {
    let mut sim = Simulator::new(grid, SimParams::default()).expect("default params");
    let stim = Stimulus {
        region: Region::Disc {
            center: [1, 1],
            radius: 5.0,
        },
        mode: StimulusMode::Impulse,
    };
    apply_impulse(sim.state_mut(), grid, &stim);
    sim
}

pub fn conductive_fraction(grid: &ConductiveGrid) -> f64 {
    grid.conductive_count() as f64 / (grid.width() * grid.height()) as f64
}
