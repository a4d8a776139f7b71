//! FitzHugh–Nagumo excitation on a conductive mask.
//!
//! ```text
//! ∂u/∂t = c1·u·(u − a)·(1 − u) − c2·u·v + I + D_u·∇²u
//! ∂v/∂t = b·(u − v)
//! ```
//!
//! integrated with explicit Euler steps and a masked five-point Laplacian
//! with no-flux boundaries.

pub mod checkpoint;
mod kernel;
mod lattice;
mod params;
mod stimulus;

use std::io;

pub use self::kernel::{laplacian, laplacian_at, step, Simulator, BLOWUP_LIMIT};
pub use self::lattice::{FieldState, Lattice};
pub use self::params::{SimParams, C2_RANGE};
pub use self::stimulus::{
    apply_impulse, InputPair, ParseInputPairError, Region, Stimulus, StimulusMode,
    DEFAULT_STIMULUS_RADIUS,
};

use crate::ingest::ConductiveGrid;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("state is {}x{} but grid is {}x{}", state.0, state.1, grid.0, grid.1)]
    StateMismatch {
        grid: (usize, usize),
        state: (usize, usize),
    },
    #[error("numerical blowup at node ({x}, {y}) on iteration {iteration}: u = {u}, v = {v}")]
    Blowup {
        x: usize,
        y: usize,
        iteration: u64,
        u: f64,
        v: f64,
    },
    #[error("observer failed: {0}")]
    Observer(#[from] io::Error),
}

/// Read-only view handed to observers after every step.
#[derive(Clone, Copy)]
pub struct StepView<'a> {
    pub grid: &'a ConductiveGrid,
    pub lattice: &'a Lattice,
    pub params: &'a SimParams,
    pub state: &'a FieldState,
}

/// Per-step measurement hook. Called on the control thread, in registration
/// order, after each completed step.
pub trait Observer {
    fn observe(&mut self, view: &StepView<'_>) -> io::Result<()>;
}

impl<F: FnMut(&StepView<'_>)> Observer for F {
    fn observe(&mut self, view: &StepView<'_>) -> io::Result<()> {
        self(view);
        Ok(())
    }
}

/// The two dedicated input sites.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSites {
    pub x: Stimulus,
    pub y: Stimulus,
}

impl InputSites {
    /// Impulse stimuli of the given radius centred on two nodes.
    pub fn impulses_at(x: (usize, usize), y: (usize, usize), radius: f64) -> Self {
        Self {
            x: Stimulus::impulse(Region::disc(x.0, x.1, radius)),
            y: Stimulus::impulse(Region::disc(y.0, y.1, radius)),
        }
    }

    /// Stimuli switched on by `inputs`.
    pub fn active(&self, inputs: InputPair) -> Vec<Stimulus> {
        let mut out = Vec::with_capacity(2);
        if inputs.x {
            out.push(self.x.clone());
        }
        if inputs.y {
            out.push(self.y.clone());
        }
        out
    }
}

/// Apply the impulses selected by `inputs` at `t = 0`, then take `n_iters`
/// steps, calling every observer after each one.
pub fn run(
    grid: &ConductiveGrid,
    params: &SimParams,
    inputs: InputPair,
    sites: &InputSites,
    n_iters: u64,
    observers: &mut [&mut dyn Observer],
) -> Result<FieldState, ModelError> {
    let mut sim = Simulator::new(grid, *params)?;
    let stimuli = sites.active(inputs);
    for stim in &stimuli {
        apply_impulse(sim.state_mut(), grid, stim);
    }
    run_from(&mut sim, grid, &stimuli, n_iters, observers)?;
    Ok(sim.into_state())
}

/// Continue an existing simulation for `n_iters` steps.
pub fn run_from(
    sim: &mut Simulator,
    grid: &ConductiveGrid,
    stimuli: &[Stimulus],
    n_iters: u64,
    observers: &mut [&mut dyn Observer],
) -> Result<(), ModelError> {
    for _ in 0..n_iters {
        sim.step(grid, stimuli)?;
        let view = StepView {
            grid,
            lattice: sim.lattice(),
            params: sim.params(),
            state: sim.state(),
        };
        for obs in observers.iter_mut() {
            obs.observe(&view)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unstimulated_run_stays_at_rest() {
        let grid = ConductiveGrid::full(20, 10).unwrap();
        let sites = InputSites::impulses_at((2, 5), (17, 5), 3.0);
        let mut calls = 0u64;
        let mut count = |_: &StepView<'_>| calls += 1;
        let end = run(
            &grid,
            &SimParams::default(),
            InputPair::P00,
            &sites,
            50,
            &mut [&mut count],
        )
        .unwrap();
        assert_eq!(calls, 50);
        assert_eq!(end.t(), 50);
        let rest = FieldState::resting(&grid);
        assert_eq!(end.u_padded(), rest.u_padded());
        assert_eq!(end.v_padded(), rest.v_padded());
    }

    #[test]
    fn observers_see_increasing_iterations() {
        let grid = ConductiveGrid::full(5, 5).unwrap();
        let sites = InputSites::impulses_at((1, 1), (3, 3), 1.0);
        let mut seen = Vec::new();
        let mut rec = |v: &StepView<'_>| seen.push(v.state.t());
        run(
            &grid,
            &SimParams::default(),
            InputPair::P11,
            &sites,
            4,
            &mut [&mut rec],
        )
        .unwrap();
        assert_eq!(seen, vec![1, 2, 3, 4]);
    }

    #[test]
    fn only_selected_inputs_are_excited() {
        let grid = ConductiveGrid::full(30, 3).unwrap();
        let sites = InputSites::impulses_at((2, 1), (27, 1), 1.0);
        let end = run(
            &grid,
            &SimParams::default(),
            InputPair::P10,
            &sites,
            1,
            &mut [],
        )
        .unwrap();
        assert!(end.u(2, 1) > 0.9);
        assert_eq!(end.u(27, 1), 0.0);
    }
}
