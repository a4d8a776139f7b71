//! Explicit Euler stepping of the masked FitzHugh–Nagumo system.
//!
//! Every new value is computed from the previous state only (Jacobi update),
//! so splitting the rows across threads cannot change a single bit of the
//! result.

use std::ops::Range;

use rayon::prelude::*;

use super::{FieldState, Lattice, ModelError, SimParams, Stimulus};
use crate::ingest::ConductiveGrid;

/// |u| or |v| above this counts as a numerical blowup.
pub const BLOWUP_LIMIT: f64 = 1e6;

/// Rows per rayon task.
const MIN_ROWS_PER_TASK: usize = 8;

/// Masked five-point Laplacian at a conductive node:
/// `Σ_{n ∈ N4 ∩ mask} (u_n − u) / dx²`. Non-conductive and out-of-grid
/// neighbours contribute nothing (no-flux boundary).
pub fn laplacian(
    state: &FieldState,
    grid: &ConductiveGrid,
    params: &SimParams,
    x: usize,
    y: usize,
) -> f64 {
    let lattice = Lattice::new(grid);
    laplacian_at(state, &lattice, params, x, y)
}

/// As [`laplacian`], reusing a prebuilt lattice.
pub fn laplacian_at(
    state: &FieldState,
    lattice: &Lattice,
    params: &SimParams,
    x: usize,
    y: usize,
) -> f64 {
    let p = lattice.index(x, y);
    let s = lattice.stride();
    let u = &state.u;
    stencil(
        u[p],
        u[p - 1],
        u[p + 1],
        u[p - s],
        u[p + s],
        lattice.degree()[p],
        1.0 / (params.dx * params.dx),
    )
}

/// Non-conductive neighbours hold zero, so summing all four and removing
/// `degree · u` equals the sum of differences over conductive neighbours.
#[inline(always)]
fn stencil(c: f64, w: f64, e: f64, n: f64, s: f64, degree: u8, inv_dx2: f64) -> f64 {
    (w + e + n + s - f64::from(degree) * c) * inv_dx2
}

/// Owns the double buffers and topology for repeated stepping.
#[derive(Debug, Clone)]
pub struct Simulator {
    lattice: Lattice,
    params: SimParams,
    state: FieldState,
    next_u: Vec<f64>,
    next_v: Vec<f64>,
    /// Per-node injected current, rebuilt whenever current stimuli are active.
    current: Vec<f64>,
}

impl Simulator {
    pub fn new(grid: &ConductiveGrid, params: SimParams) -> Result<Self, ModelError> {
        Self::with_state(grid, params, FieldState::resting(grid))
    }

    pub fn with_state(
        grid: &ConductiveGrid,
        params: SimParams,
        state: FieldState,
    ) -> Result<Self, ModelError> {
        params.validate()?;
        let lattice = Lattice::new(grid);
        if !lattice.matches(&state) {
            return Err(ModelError::StateMismatch {
                grid: (grid.width(), grid.height()),
                state: (state.width, state.height),
            });
        }
        let len = lattice.padded_len();
        Ok(Self {
            lattice,
            params,
            state,
            next_u: vec![0.0; len],
            next_v: vec![0.0; len],
            current: Vec::new(),
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut FieldState {
        &mut self.state
    }

    pub fn into_state(self) -> FieldState {
        self.state
    }

    /// Advance one Euler step. On blowup the state is left at the last good
    /// iteration.
    pub fn step(&mut self, grid: &ConductiveGrid, stimuli: &[Stimulus]) -> Result<(), ModelError> {
        let t = self.state.t;
        let active: Vec<(&Stimulus, f64)> = stimuli
            .iter()
            .filter_map(|s| s.current_at(t).map(|i| (s, i)))
            .collect();
        let current = if active.is_empty() {
            None
        } else {
            self.current.clear();
            self.current.resize(self.lattice.padded_len(), 0.0);
            for (stim, amplitude) in active {
                for (x, y) in stim.region.conductive_nodes(grid) {
                    self.current[self.lattice.index(x, y)] += amplitude;
                }
            }
            Some(self.current.as_slice())
        };

        let bad = advance(
            &self.lattice,
            &self.params,
            &self.state.u,
            &self.state.v,
            current,
            &mut self.next_u,
            &mut self.next_v,
        );
        if let Some(index) = bad {
            let (x, y) = self.lattice.position(index);
            return Err(ModelError::Blowup {
                x,
                y,
                iteration: t + 1,
                u: self.next_u[index],
                v: self.next_v[index],
            });
        }
        std::mem::swap(&mut self.state.u, &mut self.next_u);
        std::mem::swap(&mut self.state.v, &mut self.next_v);
        self.state.t = t + 1;
        Ok(())
    }
}

/// One functional Euler step: returns the successor of `state`.
pub fn step(
    state: &FieldState,
    grid: &ConductiveGrid,
    params: &SimParams,
    stimuli: &[Stimulus],
) -> Result<FieldState, ModelError> {
    let mut sim = Simulator::with_state(grid, *params, state.clone())?;
    sim.step(grid, stimuli)?;
    Ok(sim.into_state())
}

/// Compute all rows into the output buffers. Returns the first (lowest
/// padded index) node that blew up, if any.
fn advance(
    lattice: &Lattice,
    params: &SimParams,
    u: &[f64],
    v: &[f64],
    current: Option<&[f64]>,
    out_u: &mut [f64],
    out_v: &mut [f64],
) -> Option<usize> {
    let stride = lattice.stride();
    let height = lattice.height();
    let body = stride..stride * (height + 1);
    let row_job = |(y, (ru, rv)): (usize, (&mut [f64], &mut [f64]))| {
        let base = (y + 1) * stride;
        update_row(
            lattice,
            params,
            u,
            v,
            current,
            lattice.row_runs(y),
            base,
            ru,
            rv,
        )
    };

    if rayon::current_num_threads() > 1 {
        out_u[body.clone()]
            .par_chunks_mut(stride)
            .zip(out_v[body].par_chunks_mut(stride))
            .enumerate()
            .with_min_len(MIN_ROWS_PER_TASK)
            .filter_map(row_job)
            .min()
    } else {
        out_u[body.clone()]
            .chunks_mut(stride)
            .zip(out_v[body].chunks_mut(stride))
            .enumerate()
            .filter_map(row_job)
            .min()
    }
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn update_row(
    lattice: &Lattice,
    params: &SimParams,
    u: &[f64],
    v: &[f64],
    current: Option<&[f64]>,
    runs: &[Range<usize>],
    base: usize,
    out_u: &mut [f64],
    out_v: &mut [f64],
) -> Option<usize> {
    let stride = lattice.stride();
    let degree = lattice.degree();
    let inv_dx2 = 1.0 / (params.dx * params.dx);
    let SimParams {
        dt,
        d_u,
        a,
        b,
        c1,
        c2,
        ..
    } = *params;

    let mut bad = false;
    for run in runs {
        let (s, e) = (run.start, run.end);
        let centre = &u[s..e];
        let west = &u[s - 1..e - 1];
        let east = &u[s + 1..e + 1];
        let north = &u[s - stride..e - stride];
        let south = &u[s + stride..e + stride];
        let vs = &v[s..e];
        let deg = &degree[s..e];
        let ou = &mut out_u[s - base..e - base];
        let ov = &mut out_v[s - base..e - base];

        match current {
            None => {
                for i in 0..centre.len() {
                    let uc = centre[i];
                    let vc = vs[i];
                    let lap = stencil(uc, west[i], east[i], north[i], south[i], deg[i], inv_dx2);
                    let nu = uc + dt * (c1 * uc * (uc - a) * (1.0 - uc) - c2 * uc * vc + d_u * lap);
                    let nv = vc + dt * (b * (uc - vc));
                    ou[i] = nu;
                    ov[i] = nv;
                    bad |= !(nu.abs() <= BLOWUP_LIMIT) | !(nv.abs() <= BLOWUP_LIMIT);
                }
            }
            Some(current) => {
                let inj = &current[s..e];
                for i in 0..centre.len() {
                    let uc = centre[i];
                    let vc = vs[i];
                    let lap = stencil(uc, west[i], east[i], north[i], south[i], deg[i], inv_dx2);
                    let nu =
                        uc + dt
                            * (c1 * uc * (uc - a) * (1.0 - uc) - c2 * uc * vc + inj[i] + d_u * lap);
                    let nv = vc + dt * (b * (uc - vc));
                    ou[i] = nu;
                    ov[i] = nv;
                    bad |= !(nu.abs() <= BLOWUP_LIMIT) | !(nv.abs() <= BLOWUP_LIMIT);
                }
            }
        }
    }
    if !bad {
        return None;
    }
    runs.iter().flat_map(Clone::clone).find(|&p| {
        !(out_u[p - base].abs() <= BLOWUP_LIMIT) || !(out_v[p - base].abs() <= BLOWUP_LIMIT)
    })
}
