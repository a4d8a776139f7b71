//! Spike detection on potential traces and cross-trace coincidence merging.

use serde::{Deserialize, Serialize};

use super::counts::DEFAULT_SEGMENTATION_GAP;
use super::{classify_gate, GateKind, PairSet};
use crate::fhn::InputPair;
use crate::observe::PotentialTrace;

/// Default absolute detection threshold on the electrode potential.
pub const DEFAULT_SPIKE_THRESHOLD: f64 = 0.05;
/// Default refractory suppression between accepted spikes, in iterations.
pub const DEFAULT_MIN_SEPARATION: u64 = 300;
/// Spikes closer than this (in iterations) happen "at the same moment".
pub const DEFAULT_COINCIDENCE_WINDOW: u64 = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikeEvent {
    pub electrode: String,
    pub inputs: InputPair,
    pub t: u64,
    pub amplitude: f64,
}

/// Interior local maxima above `threshold`, scanned left to right; a
/// candidate closer than `min_separation` to the last accepted spike is
/// dropped. On a flat-topped peak the first sample of the plateau counts.
/// The first and last samples are never peaks.
pub fn detect_spikes(
    trace: &PotentialTrace,
    threshold: f64,
    min_separation: u64,
) -> Vec<SpikeEvent> {
    let s = &trace.samples;
    let mut out: Vec<SpikeEvent> = Vec::new();
    for i in 1..s.len().saturating_sub(1) {
        let (t, p) = s[i];
        let is_peak = p > threshold && p > s[i - 1].1 && p >= s[i + 1].1 && {
            // walk to the end of a plateau; it must come down afterwards
            let mut j = i + 1;
            while j < s.len() && s[j].1 == p {
                j += 1;
            }
            j < s.len() && s[j].1 < p
        };
        if !is_peak {
            continue;
        }
        if let Some(last) = out.last() {
            if t - last.t < min_separation {
                continue;
            }
        }
        out.push(SpikeEvent {
            electrode: trace.electrode.clone(),
            inputs: trace.inputs,
            t,
            amplitude: p,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceEvent {
    /// Time of the earliest spike of the cluster.
    pub t: u64,
    pub subset: PairSet,
    pub gate: GateKind,
}

/// Greedy earliest-first clustering of the three spike trains: take the
/// earliest unconsumed spike (ties go to 01, then 10, then 11), absorb every
/// unconsumed spike less than `window` iterations after it, and emit the set
/// of input pairs represented.
pub fn merge_coincidences(
    spikes01: &[SpikeEvent],
    spikes10: &[SpikeEvent],
    spikes11: &[SpikeEvent],
    window: u64,
) -> Vec<CoincidenceEvent> {
    let trains = [spikes01, spikes10, spikes11];
    let mut heads = [0usize; 3];
    let mut events = Vec::new();
    loop {
        let anchor = (0..3)
            .filter(|&k| heads[k] < trains[k].len())
            .min_by_key(|&k| (trains[k][heads[k]].t, k));
        let Some(k0) = anchor else { break };
        let t0 = trains[k0][heads[k0]].t;
        heads[k0] += 1;
        let mut subset = PairSet::EMPTY.with(InputPair::GATE_PAIRS[k0]);
        for k in 0..3 {
            while heads[k] < trains[k].len() && trains[k][heads[k]].t - t0 < window {
                heads[k] += 1;
                subset = subset.with(InputPair::GATE_PAIRS[k]);
            }
        }
        events.push(CoincidenceEvent {
            t: t0,
            subset,
            gate: classify_gate(subset).expect("subset holds the anchor"),
        });
    }
    events
}

/// Knobs of the spiking-gate pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpikeSettings {
    pub threshold: f64,
    pub min_separation: u64,
    pub window: u64,
    pub gap: u64,
}

impl Default for SpikeSettings {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_SPIKE_THRESHOLD,
            min_separation: DEFAULT_MIN_SEPARATION,
            window: DEFAULT_COINCIDENCE_WINDOW,
            gap: DEFAULT_SEGMENTATION_GAP,
        }
    }
}

/// Detect spikes on every trace and merge them per electrode. Traces for
/// pair 00 are ignored; electrodes come out in natural label order.
pub fn spiking_events(
    traces: &[PotentialTrace],
    settings: &SpikeSettings,
) -> Vec<(String, Vec<CoincidenceEvent>)> {
    let mut labels: Vec<&str> = traces.iter().map(|t| t.electrode.as_str()).collect();
    labels.sort_by(|a, b| super::counts::natural_cmp(a, b));
    labels.dedup();
    labels
        .into_iter()
        .map(|label| {
            let per_pair: Vec<Vec<SpikeEvent>> = InputPair::GATE_PAIRS
                .iter()
                .map(|&pair| {
                    traces
                        .iter()
                        .filter(|t| t.electrode == label && t.inputs == pair)
                        .flat_map(|t| detect_spikes(t, settings.threshold, settings.min_separation))
                        .collect()
                })
                .collect();
            let events =
                merge_coincidences(&per_pair[0], &per_pair[1], &per_pair[2], settings.window);
            (label.to_owned(), events)
        })
        .collect()
}
