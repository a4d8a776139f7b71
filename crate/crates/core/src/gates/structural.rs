//! Gates realised by which output channels a wave reaches.

use rayon::prelude::*;
use serde::Serialize;

use super::{classify_gate, GateKind, PairSet};
use crate::fhn::{apply_impulse, InputPair, InputSites, ModelError, Region, SimParams, Simulator};
use crate::ingest::ConductiveGrid;

/// Below this everywhere, with no current injected, the medium cannot
/// excite again.
pub const QUIESCENT_U: f64 = 1e-3;
const QUIESCENCE_CHECK: u64 = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFunction {
    pub label: String,
    /// Whether the region fired for the pairs (01, 10, 11).
    pub fired: [bool; 3],
    /// `None` when the region never fires.
    pub gate: Option<GateKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralReport {
    pub outputs: Vec<OutputFunction>,
    /// Iterations actually simulated per pair; fewer than requested when the
    /// run went quiescent or every output had fired.
    pub iterations: [u64; 3],
}

impl StructuralReport {
    pub fn gate(&self, label: &str) -> Option<GateKind> {
        self.outputs
            .iter()
            .find(|o| o.label == label)
            .and_then(|o| o.gate)
    }
}

/// Run each stimulated input pair for up to `n_iters` steps. An output
/// region fires for a pair when any of its conductive nodes exceeds
/// `u_active` at any iteration.
pub fn channel_functions(
    grid: &ConductiveGrid,
    params: &SimParams,
    sites: &InputSites,
    outputs: &[(String, Region)],
    n_iters: u64,
) -> Result<StructuralReport, ModelError> {
    params.validate()?;
    let runs: Vec<(Vec<bool>, u64)> = InputPair::GATE_PAIRS
        .par_iter()
        .map(|&pair| fire_pattern(grid, params, sites, outputs, pair, n_iters))
        .collect::<Result<_, _>>()?;
    let outputs = outputs
        .iter()
        .enumerate()
        .map(|(k, (label, _))| {
            let fired = [runs[0].0[k], runs[1].0[k], runs[2].0[k]];
            OutputFunction {
                label: label.clone(),
                fired,
                gate: classify_gate(PairSet::from_truth(fired)).ok(),
            }
        })
        .collect();
    Ok(StructuralReport {
        outputs,
        iterations: [runs[0].1, runs[1].1, runs[2].1],
    })
}

fn fire_pattern(
    grid: &ConductiveGrid,
    params: &SimParams,
    sites: &InputSites,
    outputs: &[(String, Region)],
    pair: InputPair,
    n_iters: u64,
) -> Result<(Vec<bool>, u64), ModelError> {
    let mut sim = Simulator::new(grid, *params)?;
    let stimuli = sites.active(pair);
    for s in &stimuli {
        apply_impulse(sim.state_mut(), grid, s);
    }
    let probes: Vec<Vec<usize>> = outputs
        .iter()
        .map(|(_, r)| {
            r.conductive_nodes(grid)
                .into_iter()
                .map(|(x, y)| sim.lattice().index(x, y))
                .collect()
        })
        .collect();
    let mut fired = vec![false; outputs.len()];
    let threshold = params.u_active;
    for i in 0..n_iters {
        sim.step(grid, &stimuli)?;
        let u = sim.state().u_padded();
        for (f, nodes) in fired.iter_mut().zip(&probes) {
            *f = *f || nodes.iter().any(|&p| u[p] > threshold);
        }
        let t = sim.state().t();
        let done = fired.iter().all(|&f| f)
            || (t % QUIESCENCE_CHECK == 0
                && stimuli.iter().all(|s| s.current_at(t).is_none())
                && sim.state().max_u(sim.lattice()) < QUIESCENT_U);
        if done {
            return Ok((fired, i + 1));
        }
    }
    Ok((fired, n_iters))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disconnected_output_never_fires() {
        let grid =
            ConductiveGrid::from_ascii(&["########....###", "########....###", "########....###"])
                .unwrap();
        let sites = InputSites::impulses_at((0, 1), (7, 1), 1.0);
        let outputs = vec![
            ("near".to_owned(), Region::rect(3, 0, 4, 2)),
            ("island".to_owned(), Region::rect(12, 0, 14, 2)),
        ];
        let r = channel_functions(&grid, &SimParams::default(), &sites, &outputs, 40_000).unwrap();
        assert_eq!(r.gate("near"), Some(GateKind::Or));
        assert_eq!(r.outputs[1].fired, [false; 3]);
        assert_eq!(r.gate("island"), None);
        // every run stops early once quiescent or complete
        assert!(
            r.iterations.iter().all(|&n| n < 30_000),
            "{:?}",
            r.iterations
        );
    }

    #[test]
    fn output_at_input_site_selects_that_input() {
        let grid = ConductiveGrid::full(6, 3).unwrap();
        let sites = InputSites::impulses_at((0, 1), (5, 1), 0.0);
        let outputs = vec![("x".to_owned(), Region::rect(0, 1, 0, 1))];
        // a single step is too short for the wave from y to arrive
        let r = channel_functions(&grid, &SimParams::default(), &sites, &outputs, 1).unwrap();
        assert_eq!(r.gate("x"), Some(GateKind::SelectX));
    }

    #[test]
    fn invalid_params_rejected() {
        let grid = ConductiveGrid::full(4, 4).unwrap();
        let sites = InputSites::impulses_at((0, 0), (3, 3), 1.0);
        let bad = SimParams {
            dt: -1.0,
            ..SimParams::default()
        };
        assert!(channel_functions(&grid, &bad, &sites, &[], 10).is_err());
    }
}
