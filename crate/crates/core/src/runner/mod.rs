//! Scenario execution: simulations per input pair, observers, analyses and
//! the artifacts they leave behind.
//!
//! Every run writes into one output directory and finishes with
//! `summary.json`, whose manifest lists each other file written together
//! with its SHA-256.

pub mod analysis;
pub mod artifacts;
pub mod config;
pub mod render;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use self::analysis::{ActivitySummary, FrequencySummary, SpikingSummary};
use self::artifacts::{Artifacts, FileEntry};
pub use self::config::{Analysis, GridSource, Resolved, Scenario};
use crate::fhn::{apply_impulse, checkpoint, run_from, InputPair, ModelError, Observer, Simulator};
use crate::gates::{channel_functions, StructuralReport};
use crate::ingest::ConductiveGrid;
use crate::observe::{
    ActivityRecorder, ActivityTrace, CoverageTracker, FrameRecorder, FrequencyAccumulator,
    FrequencyMatrix, PotentialRecorder, PotentialTrace,
};

/// Worker threads for simulations; unset means one per core.
pub const WORKERS_ENV: &str = "ACTINET_WORKERS";
/// Steps between checks for a quiescent medium.
const QUIESCENCE_CHECK: u64 = 50;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error on {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("simulation failed for inputs {inputs}: {source}")]
    Model {
        inputs: String,
        #[source]
        source: ModelError,
    },
}

impl RunError {
    pub fn io(path: &Path, e: io::Error) -> Self {
        RunError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    fn model(inputs: impl ToString, e: ModelError) -> Self {
        match e {
            ModelError::InvalidParam { .. } | ModelError::StateMismatch { .. } => {
                RunError::Config(e.to_string())
            }
            ModelError::Observer(io) => RunError::Io {
                path: PathBuf::new(),
                message: io.to_string(),
            },
            e => RunError::Model {
                inputs: inputs.to_string(),
                source: e,
            },
        }
    }

    /// 2 for configuration problems, 3 for I/O, 4 for numerical blowup.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Io { .. } => 3,
            RunError::Model { .. } => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub workers: Option<usize>,
}

impl RunOptions {
    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers: Some(workers),
        }
    }

    /// Read the worker count from `ACTINET_WORKERS`.
    pub fn from_env() -> Result<Self, RunError> {
        match std::env::var(WORKERS_ENV) {
            Err(_) => Ok(Self::default()),
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(Self::with_workers(n)),
                _ => Err(RunError::Config(format!(
                    "{WORKERS_ENV} must be a positive integer, got {v:?}"
                ))),
            },
        }
    }

    /// Run `f` on a pool of the configured size.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> Result<R, RunError> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.workers {
            b = b.num_threads(n);
        }
        let pool = b
            .build()
            .map_err(|e| RunError::Config(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(f))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub width: usize,
    pub height: usize,
    pub conductive: usize,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSummary {
    pub inputs: InputPair,
    pub iterations: u64,
    /// Fraction of conductive nodes that ever exceeded `u_active`.
    pub coverage: Option<f64>,
    pub final_max_u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub grid: GridSummary,
    pub isolated_electrodes: Vec<String>,
    pub pairs: Vec<PairSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structural: Option<StructuralReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<FrequencySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub activity: Option<ActivitySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spiking: Option<SpikingSummary>,
    /// Every file written except `summary.json` itself.
    pub files: Vec<FileEntry>,
}

impl Summary {
    pub fn mean_coverage(&self) -> Option<f64> {
        let c: Vec<f64> = self.pairs.iter().filter_map(|p| p.coverage).collect();
        (!c.is_empty()).then(|| c.iter().sum::<f64>() / c.len() as f64)
    }
}

struct PairRun {
    inputs: InputPair,
    iterations: u64,
    traces: Vec<PotentialTrace>,
    activity: Option<ActivityTrace>,
    frequency: Option<FrequencyMatrix>,
    coverage: Option<f64>,
    frames: Vec<PathBuf>,
    final_max_u: f64,
    checkpoint: Option<Vec<u8>>,
}

/// Run a scenario and write its artifacts under `scenario.output_dir`.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<Summary, RunError> {
    let resolved = scenario.resolve()?;
    opts.install(|| run_resolved(scenario, &resolved))?
}

fn wants_pair_runs(s: &Scenario) -> bool {
    s.analyses.is_empty()
        || s.analyses.iter().any(|a| *a != Analysis::Structural)
        || s.cadence.frame > 0
        || s.checkpoint
}

fn run_resolved(scenario: &Scenario, r: &Resolved) -> Result<Summary, RunError> {
    let mut art = Artifacts::create(&scenario.output_dir)?;
    let mut record = scenario.clone();
    record.output_dir = PathBuf::from(".");
    art.write(artifacts::SCENARIO_FILE, record.to_json().as_bytes())?;
    art.write("mask.pgm", &r.grid.to_pgm())?;

    let runs: Vec<PairRun> = if wants_pair_runs(scenario) {
        scenario
            .input_pairs
            .par_iter()
            .map(|&pair| run_pair(scenario, r, pair, art.root()))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };

    let mut traces = Vec::new();
    let mut activity = Vec::new();
    let mut matrices = Vec::new();
    for run in &runs {
        for t in &run.traces {
            let rel =
                Path::new(artifacts::TRACE_DIR).join(artifacts::trace_name(&t.electrode, t.inputs));
            art.write(rel, &artifacts::series_csv(&t.samples))?;
        }
        traces.extend(run.traces.iter().cloned());
        if let Some(a) = &run.activity {
            let rel = Path::new(artifacts::ACTIVITY_DIR).join(artifacts::activity_name(a.inputs));
            art.write(rel, &artifacts::series_csv(&a.samples))?;
            activity.push(a.clone());
        }
        if let Some(m) = &run.frequency {
            let dir = Path::new(artifacts::FREQUENCY_DIR);
            art.write(
                dir.join(artifacts::frequency_name(m.inputs, "pgm")),
                &m.to_pgm16(),
            )?;
            art.write(
                dir.join(artifacts::frequency_name(m.inputs, "csv")),
                &artifacts::matrix_csv(m),
            )?;
            matrices.push(m.clone());
        }
        for f in &run.frames {
            art.record(f.clone());
        }
        if let Some(bytes) = &run.checkpoint {
            art.write(format!("state_{}.ckpt", run.inputs), bytes)?;
        }
    }

    let has = |a: Analysis| scenario.analyses.contains(&a);
    let structural = if has(Analysis::Structural) {
        let report = structural_report(scenario, r)?;
        analysis::structural(&report, &mut art)?;
        Some(report)
    } else {
        None
    };
    let frequency = has(Analysis::Frequency)
        .then(|| analysis::frequency(&r.grid, &matrices, &scenario.frequency, &mut art))
        .transpose()?;
    let activity = has(Analysis::Activity)
        .then(|| analysis::activity(&activity, &scenario.activity, &mut art))
        .transpose()?;
    let spiking = has(Analysis::Spiking)
        .then(|| analysis::spiking(&traces, &scenario.spiking, &mut art))
        .transpose()?;

    let summary = Summary {
        name: scenario.name.clone(),
        grid: grid_summary(&r.grid),
        isolated_electrodes: r.electrodes.isolated().map(|e| e.label.clone()).collect(),
        pairs: runs
            .iter()
            .map(|p| PairSummary {
                inputs: p.inputs,
                iterations: p.iterations,
                coverage: p.coverage,
                final_max_u: p.final_max_u,
            })
            .collect(),
        structural,
        frequency,
        activity,
        spiking,
        files: art.manifest()?,
    };
    write_summary(&art, &summary)?;
    Ok(summary)
}

fn write_summary(art: &Artifacts, summary: &impl Serialize) -> Result<(), RunError> {
    let path = art.root().join(artifacts::SUMMARY_FILE);
    let text = serde_json::to_string_pretty(summary).expect("summary serialises");
    fs::write(&path, text + "\n").map_err(|e| RunError::io(&path, e))
}

fn grid_summary(grid: &ConductiveGrid) -> GridSummary {
    GridSummary {
        width: grid.width(),
        height: grid.height(),
        conductive: grid.conductive_count(),
        digest: artifacts::hex(&grid.digest()),
    }
}

fn structural_report(scenario: &Scenario, r: &Resolved) -> Result<StructuralReport, RunError> {
    let outputs: Vec<_> = scenario
        .structural
        .outputs
        .iter()
        .map(|o| (o.label.clone(), o.region.clone()))
        .collect();
    channel_functions(
        &r.grid,
        &scenario.params,
        &r.sites,
        &outputs,
        scenario.n_iters,
    )
    .map_err(|e| RunError::model("structural", e))
}

fn run_pair(
    scenario: &Scenario,
    r: &Resolved,
    pair: InputPair,
    root: &Path,
) -> Result<PairRun, RunError> {
    let grid = &r.grid;
    let fail = |e| RunError::model(pair, e);
    let mut sim = Simulator::new(grid, scenario.params).map_err(fail)?;
    let stimuli = r.sites.active(pair);
    for s in &stimuli {
        apply_impulse(sim.state_mut(), grid, s);
    }
    let has = |a: Analysis| scenario.analyses.contains(&a);
    let c = scenario.cadence;
    let mut potential = (has(Analysis::Spiking) && c.trace > 0)
        .then(|| PotentialRecorder::new(&r.electrodes, pair, c.trace));
    let mut activity = (has(Analysis::Activity) && c.activity > 0)
        .then(|| ActivityRecorder::new(pair, c.activity));
    let mut frequency = has(Analysis::Frequency).then(|| FrequencyAccumulator::new(grid, pair));
    let mut coverage = (c.coverage > 0).then(|| CoverageTracker::new(sim.lattice(), c.coverage));
    let mut frames =
        (c.frame > 0).then(|| FrameRecorder::new(root.join(artifacts::FRAME_DIR), pair, c.frame));

    let mut done = 0;
    while done < scenario.n_iters {
        let chunk = if scenario.stop_when_quiescent {
            QUIESCENCE_CHECK.min(scenario.n_iters - done)
        } else {
            scenario.n_iters - done
        };
        let mut observers: Vec<&mut dyn Observer> = Vec::new();
        if let Some(o) = potential.as_mut() {
            observers.push(o);
        }
        if let Some(o) = activity.as_mut() {
            observers.push(o);
        }
        if let Some(o) = frequency.as_mut() {
            observers.push(o);
        }
        if let Some(o) = coverage.as_mut() {
            observers.push(o);
        }
        if let Some(o) = frames.as_mut() {
            observers.push(o);
        }
        run_from(&mut sim, grid, &stimuli, chunk, &mut observers).map_err(fail)?;
        done += chunk;
        if scenario.stop_when_quiescent && is_quiescent(&sim, &stimuli) {
            break;
        }
    }

    let lattice = sim.lattice();
    Ok(PairRun {
        inputs: pair,
        iterations: done,
        traces: potential
            .map(PotentialRecorder::into_traces)
            .unwrap_or_default(),
        activity: activity.map(ActivityRecorder::into_trace),
        frequency: frequency.map(|f| f.into_matrix().normalized()),
        coverage: coverage.map(|c| c.fraction(lattice)),
        frames: frames
            .map(|f| {
                f.into_written()
                    .into_iter()
                    .filter_map(|p| p.strip_prefix(root).ok().map(Path::to_path_buf))
                    .collect()
            })
            .unwrap_or_default(),
        final_max_u: sim.state().max_u(lattice),
        checkpoint: scenario
            .checkpoint
            .then(|| checkpoint::encode(grid, sim.state())),
    })
}

fn is_quiescent(sim: &Simulator, stimuli: &[crate::fhn::Stimulus]) -> bool {
    let t = sim.state().t();
    stimuli.iter().all(|s| match s.mode {
        crate::fhn::StimulusMode::Current { duration, .. } => t >= duration,
        crate::fhn::StimulusMode::Impulse => true,
    }) && sim.state().max_u(sim.lattice()) < crate::gates::structural::QUIESCENT_U
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub output_dir: PathBuf,
    pub coverage: Option<f64>,
    pub pairs: Vec<PairSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub parameter: String,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([self.parameter.as_str(), "coverage"])
            .expect("in-memory write");
        for p in &self.points {
            w.write_record([
                p.value.to_string(),
                p.coverage.map_or(String::new(), |c| c.to_string()),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("UTF-8")
    }
}

/// Run the scenario once per value of `parameter`, each into
/// `{output_dir}/{parameter}={value}`, and write `sweep.csv` and
/// `sweep.json` comparing network coverage.
pub fn sweep(
    scenario: &Scenario,
    parameter: &str,
    values: &[f64],
    opts: &RunOptions,
) -> Result<SweepReport, RunError> {
    let mut probe = scenario.clone();
    probe.set(parameter, values.first().copied().unwrap_or(0.0))?;
    let variants: Vec<Scenario> = values
        .iter()
        .map(|&v| {
            let mut s = scenario.clone();
            s.set(parameter, v)?;
            s.output_dir = scenario.output_dir.join(format!("{parameter}={v}"));
            s.validate()?;
            Ok(s)
        })
        .collect::<Result<_, RunError>>()?;
    let resolved = variants
        .iter()
        .map(Scenario::resolve)
        .collect::<Result<Vec<_>, _>>()?;
    let summaries: Vec<Summary> = opts.install(|| {
        variants
            .par_iter()
            .zip(&resolved)
            .map(|(s, r)| run_resolved(s, r))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let report = SweepReport {
        parameter: parameter.to_owned(),
        points: values
            .iter()
            .zip(&variants)
            .zip(&summaries)
            .map(|((&value, s), sum)| SweepPoint {
                value,
                output_dir: s.output_dir.clone(),
                coverage: sum.mean_coverage(),
                pairs: sum.pairs.clone(),
            })
            .collect(),
    };
    let dir = &scenario.output_dir;
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let csv_path = dir.join("sweep.csv");
    fs::write(&csv_path, report.to_csv()).map_err(|e| RunError::io(&csv_path, e))?;
    let json_path = dir.join("sweep.json");
    let text = serde_json::to_string_pretty(&report).expect("report serialises");
    fs::write(&json_path, text + "\n").map_err(|e| RunError::io(&json_path, e))?;
    Ok(report)
}

/// Re-run one analysis over the recordings in a finished output directory.
/// Settings come from the directory's `scenario.json` when present. Results
/// are written back into the directory; the returned JSON mirrors the
/// corresponding `summary.json` section.
pub fn analyze_dir(
    dir: &Path,
    mode: Analysis,
    opts: &RunOptions,
) -> Result<serde_json::Value, RunError> {
    let scenario_path = dir.join(artifacts::SCENARIO_FILE);
    let scenario = if scenario_path.exists() {
        Some(Scenario::load(&scenario_path)?)
    } else {
        None
    };
    let mut art = Artifacts::create(dir)?;
    let value = match mode {
        Analysis::Spiking => {
            let traces = artifacts::read_traces(&dir.join(artifacts::TRACE_DIR))?;
            if traces.is_empty() {
                return Err(RunError::Config(format!(
                    "no traces under {}",
                    dir.display()
                )));
            }
            let settings = scenario.map(|s| s.spiking).unwrap_or_default();
            to_value(&analysis::spiking(&traces, &settings, &mut art)?)
        }
        Analysis::Activity => {
            let traces = artifacts::read_activity(&dir.join(artifacts::ACTIVITY_DIR))?;
            if traces.is_empty() {
                return Err(RunError::Config(format!(
                    "no activity traces under {}",
                    dir.display()
                )));
            }
            let settings = scenario.map(|s| s.activity).unwrap_or_default();
            to_value(&analysis::activity(&traces, &settings, &mut art)?)
        }
        Analysis::Frequency => {
            let matrices = artifacts::read_frequency(&dir.join(artifacts::FREQUENCY_DIR))?;
            let first = matrices.first().ok_or_else(|| {
                RunError::Config(format!("no frequency matrices under {}", dir.display()))
            })?;
            let mask_path = dir.join("mask.pgm");
            let grid = match fs::read(&mask_path) {
                Ok(bytes) => render::Pgm::parse(&bytes)
                    .and_then(|p| p.to_grid())
                    .map_err(|e| RunError::Config(format!("{}: {e}", mask_path.display())))?,
                Err(_) => ConductiveGrid::full(first.width(), first.height())
                    .map_err(|e| RunError::Config(e.to_string()))?,
            };
            let settings = scenario.map(|s| s.frequency).unwrap_or_default();
            to_value(&analysis::frequency(&grid, &matrices, &settings, &mut art)?)
        }
        Analysis::Structural => {
            let scenario = scenario.ok_or_else(|| {
                RunError::Config(format!(
                    "structural analysis needs {} in {}",
                    artifacts::SCENARIO_FILE,
                    dir.display()
                ))
            })?;
            if scenario.structural.outputs.is_empty() {
                return Err(RunError::Config(
                    "structural analysis needs output channels".into(),
                ));
            }
            let resolved = scenario.resolve()?;
            let report = opts.install(|| structural_report(&scenario, &resolved))??;
            analysis::structural(&report, &mut art)?;
            to_value(&report)
        }
    };
    Ok(value)
}

fn to_value(v: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(v).expect("summary serialises")
}
