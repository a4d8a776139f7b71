//! The four gate-discovery analyses, from recordings to artifacts.

use std::collections::BTreeMap;

use serde::Serialize;

use super::artifacts::Artifacts;
use super::config::{ActivitySettings, FrequencySettings};
use super::RunError;
use crate::fhn::InputPair;
use crate::gates::activity::realisable_activity_gates;
use crate::gates::domains::domain_overlay;
use crate::gates::{
    activity_gate, count_gates, detect_spikes, extract_domains, frequency_gate_sites, rank_gates,
    spiking_events, FrequencyDomain, GateFamily, GateKind, SpikeSettings, StructuralReport,
};
use crate::ingest::ConductiveGrid;
use crate::observe::{ActivityTrace, FrequencyMatrix, PotentialTrace};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikingSummary {
    pub settings: SpikeSettings,
    pub electrodes: usize,
    pub spikes: usize,
    pub coincidences: usize,
    /// Column sums of the gate table.
    pub gate_totals: BTreeMap<GateKind, u32>,
    pub hierarchy: Vec<Vec<GateFamily>>,
}

pub fn spiking(
    traces: &[PotentialTrace],
    settings: &SpikeSettings,
    art: &mut Artifacts,
) -> Result<SpikingSummary, RunError> {
    let mut spikes = csv::Writer::from_writer(Vec::new());
    spikes
        .write_record(["electrode", "inputs", "t", "amplitude"])
        .expect("in-memory write");
    let mut n_spikes = 0;
    for tr in traces {
        for s in detect_spikes(tr, settings.threshold, settings.min_separation) {
            spikes
                .write_record([
                    s.electrode,
                    s.inputs.to_string(),
                    s.t.to_string(),
                    s.amplitude.to_string(),
                ])
                .expect("in-memory write");
            n_spikes += 1;
        }
    }
    art.write("spikes.csv", &spikes.into_inner().expect("in-memory write"))?;

    let events = spiking_events(traces, settings);
    let mut n_events = 0;
    for (label, evs) in &events {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "subset", "gate"])
            .expect("in-memory write");
        for e in evs {
            w.write_record([e.t.to_string(), e.subset.to_string(), e.gate.to_string()])
                .expect("in-memory write");
        }
        n_events += evs.len();
        art.write(
            format!("coincidences/coincidences_{label}.csv"),
            &w.into_inner().expect("in-memory write"),
        )?;
    }

    let table = count_gates(&events, settings.gap);
    art.write("gate_counts.csv", table.to_csv().as_bytes())?;
    let totals = table.totals();
    Ok(SpikingSummary {
        settings: *settings,
        electrodes: events.len(),
        spikes: n_spikes,
        coincidences: n_events,
        gate_totals: GateKind::ALL
            .iter()
            .map(|&g| (g, totals[g.index()]))
            .collect(),
        hierarchy: if table.rows.is_empty() {
            Vec::new()
        } else {
            rank_gates(&table)
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalGate {
    pub lo: f64,
    pub hi: f64,
    pub gate: Option<GateKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActivitySummary {
    pub tail_from: u64,
    /// Mean activity per input pair over the tail.
    pub averages: BTreeMap<InputPair, Option<f64>>,
    pub intervals: Vec<IntervalGate>,
    /// One witness interval per gate reachable from the averages.
    pub realisable: Vec<IntervalGate>,
}

pub fn activity(
    traces: &[ActivityTrace],
    settings: &ActivitySettings,
    art: &mut Artifacts,
) -> Result<ActivitySummary, RunError> {
    let averages: BTreeMap<InputPair, Option<f64>> = traces
        .iter()
        .map(|t| (t.inputs, t.mean_from(settings.tail_from)))
        .collect();
    let triple: Option<[f64; 3]> = InputPair::GATE_PAIRS
        .iter()
        .map(|p| averages.get(p).copied().flatten())
        .collect::<Option<Vec<f64>>>()
        .map(|v| [v[0], v[1], v[2]]);
    let intervals: Vec<IntervalGate> = settings
        .intervals
        .iter()
        .map(|&(lo, hi)| IntervalGate {
            lo,
            hi,
            gate: triple.and_then(|a| activity_gate(a, (lo, hi))),
        })
        .collect();
    let realisable = triple
        .map(|a| {
            realisable_activity_gates(a)
                .into_iter()
                .map(|(g, (lo, hi))| IntervalGate {
                    lo,
                    hi,
                    gate: Some(g),
                })
                .collect()
        })
        .unwrap_or_default();

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lo", "hi", "gate"])
        .expect("in-memory write");
    for iv in &intervals {
        w.write_record([
            iv.lo.to_string(),
            iv.hi.to_string(),
            iv.gate.map_or("-".to_owned(), |g| g.to_string()),
        ])
        .expect("in-memory write");
    }
    art.write(
        "activity_gates.csv",
        &w.into_inner().expect("in-memory write"),
    )?;
    Ok(ActivitySummary {
        tail_from: settings.tail_from,
        averages,
        intervals,
        realisable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencySummary {
    pub threshold: f64,
    /// Number of domains per input pair.
    pub domains: BTreeMap<InputPair, usize>,
    /// Nodes whose domain membership realises each gate.
    pub gate_sites: BTreeMap<GateKind, usize>,
}

/// `matrices` must already be normalised.
pub fn frequency(
    grid: &ConductiveGrid,
    matrices: &[FrequencyMatrix],
    settings: &FrequencySettings,
    art: &mut Artifacts,
) -> Result<FrequencySummary, RunError> {
    let mut by_pair: [Vec<FrequencyDomain>; 3] = Default::default();
    let mut counts = BTreeMap::new();
    for m in matrices {
        let domains = extract_domains(m, settings.threshold);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["domain", "size", "centroid_x", "centroid_y"])
            .expect("in-memory write");
        for (i, d) in domains.iter().enumerate() {
            w.write_record([
                i.to_string(),
                d.size().to_string(),
                d.centroid.0.to_string(),
                d.centroid.1.to_string(),
            ])
            .expect("in-memory write");
        }
        art.write(
            format!("frequency/domains_{}.csv", m.inputs),
            &w.into_inner().expect("in-memory write"),
        )?;
        counts.insert(m.inputs, domains.len());
        if let Some(k) = m.inputs.gate_index() {
            by_pair[k] = domains;
        }
    }
    let overlay = domain_overlay(grid, [&by_pair[0], &by_pair[1], &by_pair[2]]);
    art.write("frequency/domains.png", &overlay.to_png())?;

    let mut sites = BTreeMap::new();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["gate", "sites"]).expect("in-memory write");
    for g in GateKind::ALL {
        let n = frequency_gate_sites(&by_pair[0], &by_pair[1], &by_pair[2], g).len();
        w.write_record([g.to_string(), n.to_string()])
            .expect("in-memory write");
        sites.insert(g, n);
    }
    art.write(
        "frequency/frequency_gates.csv",
        &w.into_inner().expect("in-memory write"),
    )?;
    Ok(FrequencySummary {
        threshold: settings.threshold,
        domains: counts,
        gate_sites: sites,
    })
}

pub fn structural(report: &StructuralReport, art: &mut Artifacts) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["output", "fired_01", "fired_10", "fired_11", "gate"])
        .expect("in-memory write");
    for o in &report.outputs {
        let f = o.fired.map(|b| u8::from(b).to_string());
        w.write_record([
            o.label.clone(),
            f[0].clone(),
            f[1].clone(),
            f[2].clone(),
            o.gate.map_or("-".to_owned(), |g| g.to_string()),
        ])
        .expect("in-memory write");
    }
    art.write("structural.csv", &w.into_inner().expect("in-memory write"))
}
