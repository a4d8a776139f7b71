//! Declarative scenario files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RunError;
use crate::fhn::{
    InputPair, InputSites, Region, SimParams, Stimulus, StimulusMode, DEFAULT_STIMULUS_RADIUS,
};
use crate::gates::domains::DEFAULT_DOMAIN_THRESHOLD;
use crate::gates::spikes::SpikeSettings;
use crate::ingest::{
    load_image, place_electrodes, synthesize, threshold_mask, ConductiveGrid, ElectrodeSet,
    ElectrodeSpec, GeometrySpec, ThresholdSpec,
};

pub const DEFAULT_N_ITERS: u64 = 142_000;
/// Steady-state averaging starts here unless configured otherwise.
pub const DEFAULT_ACTIVITY_TAIL: u64 = 80_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub grid: GridSource,
    #[serde(default)]
    pub params: SimParams,
    #[serde(default)]
    pub electrodes: ElectrodeSource,
    #[serde(default)]
    pub inputs: InputConfig,
    #[serde(default = "default_pairs")]
    pub input_pairs: Vec<InputPair>,
    #[serde(default = "default_n_iters")]
    pub n_iters: u64,
    #[serde(default)]
    pub cadence: Cadence,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub spiking: SpikeSettings,
    #[serde(default)]
    pub frequency: FrequencySettings,
    #[serde(default)]
    pub activity: ActivitySettings,
    #[serde(default)]
    pub structural: StructuralSettings,
    /// End a pair's run early once the medium has returned to rest.
    #[serde(default)]
    pub stop_when_quiescent: bool,
    /// Write the final state of each pair as a checkpoint.
    #[serde(default)]
    pub checkpoint: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_pairs() -> Vec<InputPair> {
    InputPair::GATE_PAIRS.to_vec()
}

fn default_n_iters() -> u64 {
    DEFAULT_N_ITERS
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Where the conductive mask comes from. Relative paths are resolved
/// against the directory of the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSource {
    Geometry {
        width: usize,
        height: usize,
        #[serde(flatten)]
        spec: GeometrySpec,
    },
    Image {
        path: PathBuf,
        #[serde(default)]
        threshold: ThresholdSpec,
    },
}

/// Electrodes inline, or a path to a JSON list of `{label, x, y}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElectrodeSource {
    Inline(Vec<ElectrodeSpec>),
    File(PathBuf),
}

impl Default for ElectrodeSource {
    fn default() -> Self {
        ElectrodeSource::Inline(Vec::new())
    }
}

/// An input site: an electrode label stimulated over a disc, or an explicit
/// region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteRef {
    Electrode(String),
    Region(Region),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub x: SiteRef,
    pub y: SiteRef,
    /// Disc radius around an electrode site.
    pub radius: f64,
    /// `{"mode": "impulse"}` or `{"mode": "current", "amplitude", "duration"}`.
    pub stimulus: StimulusMode,
}

impl Default for InputConfig {
    fn default() -> Self {
        Self {
            x: SiteRef::Electrode("E7".into()),
            y: SiteRef::Electrode("E17".into()),
            radius: DEFAULT_STIMULUS_RADIUS,
            stimulus: StimulusMode::Impulse,
        }
    }
}

/// Sampling periods in iterations; 0 switches a recorder off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cadence {
    pub trace: u64,
    pub activity: u64,
    pub frame: u64,
    pub coverage: u64,
}

impl Default for Cadence {
    fn default() -> Self {
        Self {
            trace: 1,
            activity: 1,
            frame: 0,
            coverage: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Structural,
    Frequency,
    Activity,
    Spiking,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Structural => "structural",
            Analysis::Frequency => "frequency",
            Analysis::Activity => "activity",
            Analysis::Spiking => "spiking",
        }
    }
}

impl std::str::FromStr for Analysis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structural" => Ok(Analysis::Structural),
            "frequency" => Ok(Analysis::Frequency),
            "activity" => Ok(Analysis::Activity),
            "spiking" => Ok(Analysis::Spiking),
            _ => Err(format!("unknown analysis {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrequencySettings {
    pub threshold: f64,
}

impl Default for FrequencySettings {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_DOMAIN_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivitySettings {
    /// Average over samples with `t >= tail_from`.
    pub tail_from: u64,
    /// Intervals `[lo, hi]` to classify.
    pub intervals: Vec<(f64, f64)>,
}

impl Default for ActivitySettings {
    fn default() -> Self {
        Self {
            tail_from: DEFAULT_ACTIVITY_TAIL,
            intervals: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructuralSettings {
    pub outputs: Vec<OutputChannel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputChannel {
    pub label: String,
    pub region: Region,
}

/// A scenario with its grid, electrodes and input sites materialised.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: ConductiveGrid,
    pub electrodes: ElectrodeSet,
    pub sites: InputSites,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    /// Read a scenario file; relative paths inside it are rebased onto the
    /// file's directory. `output_dir` is left relative to the working
    /// directory.
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        let mut s = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        s.rebase(base);
        Ok(s)
    }

    fn rebase(&mut self, base: &Path) {
        if let GridSource::Image { path, .. } = &mut self.grid {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let ElectrodeSource::File(path) = &mut self.electrodes {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    /// Set a scalar by name: any model parameter (`c2`, `dt`, ...),
    /// `n_iters`, or a dotted analysis setting such as `spiking.window`,
    /// `frequency.threshold`, `activity.tail_from`, `inputs.radius`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), RunError> {
        let as_count = || -> Result<u64, RunError> {
            if value >= 0.0 && value.fract() == 0.0 && value <= u64::MAX as f64 {
                Ok(value as u64)
            } else {
                Err(RunError::Config(format!(
                    "{name} must be a non-negative integer, got {value}"
                )))
            }
        };
        match name {
            "n_iters" => self.n_iters = as_count()?,
            "spiking.threshold" => self.spiking.threshold = value,
            "spiking.min_separation" => self.spiking.min_separation = as_count()?,
            "spiking.window" => self.spiking.window = as_count()?,
            "spiking.gap" => self.spiking.gap = as_count()?,
            "frequency.threshold" => self.frequency.threshold = value,
            "activity.tail_from" => self.activity.tail_from = as_count()?,
            "inputs.radius" => self.inputs.radius = value,
            _ => {
                if !self.params.set(name, value) {
                    return Err(RunError::Config(format!("unknown parameter {name:?}")));
                }
            }
        }
        Ok(())
    }

    /// Check everything that can be checked without building the grid.
    pub fn validate(&self) -> Result<(), RunError> {
        self.params
            .validate()
            .map_err(|e| RunError::Config(e.to_string()))?;
        if self.input_pairs.is_empty() && self.analyses.iter().any(|a| *a != Analysis::Structural) {
            return Err(RunError::Config("no input pairs to run".into()));
        }
        if !(self.inputs.radius >= 0.0) {
            return Err(RunError::Config("inputs.radius must be >= 0".into()));
        }
        if self.analyses.contains(&Analysis::Structural) && self.structural.outputs.is_empty() {
            return Err(RunError::Config(
                "structural analysis needs output channels".into(),
            ));
        }
        for (lo, hi) in &self.activity.intervals {
            if !(lo <= hi) {
                return Err(RunError::Config(format!(
                    "activity interval [{lo}, {hi}] is empty"
                )));
            }
        }
        Ok(())
    }

    /// Build the grid, place electrodes and resolve the input sites.
    pub fn resolve(&self) -> Result<Resolved, RunError> {
        self.validate()?;
        let grid = match &self.grid {
            GridSource::Geometry {
                width,
                height,
                spec,
            } => synthesize(*width, *height, spec).map_err(|e| RunError::Config(e.to_string()))?,
            GridSource::Image { path, threshold } => {
                let img = load_image(path).map_err(|e| match e {
                    crate::ingest::IngestError::NotFound(_)
                    | crate::ingest::IngestError::Io { .. } => RunError::Io {
                        path: path.clone(),
                        message: e.to_string(),
                    },
                    other => RunError::Config(other.to_string()),
                })?;
                threshold_mask(&img, threshold)
            }
        };
        let specs = match &self.electrodes {
            ElectrodeSource::Inline(v) => v.clone(),
            ElectrodeSource::File(path) => {
                let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
                serde_json::from_str(&text).map_err(|e| {
                    RunError::Config(format!("electrode file {}: {e}", path.display()))
                })?
            }
        };
        let electrodes =
            place_electrodes(&grid, &specs).map_err(|e| RunError::Config(e.to_string()))?;
        let site = |s: &SiteRef| -> Result<Stimulus, RunError> {
            let region = match s {
                SiteRef::Region(r) => r.clone(),
                SiteRef::Electrode(label) => {
                    let e = electrodes.get(label).ok_or_else(|| {
                        RunError::Config(format!(
                            "input site refers to undefined electrode {label}"
                        ))
                    })?;
                    Region::disc(e.x, e.y, self.inputs.radius)
                }
            };
            Ok(Stimulus {
                region,
                mode: self.inputs.stimulus,
            })
        };
        let sites = InputSites {
            x: site(&self.inputs.x)?,
            y: site(&self.inputs.y)?,
        };
        Ok(Resolved {
            grid,
            electrodes,
            sites,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "grid": {"geometry": {"width": 40, "height": 5, "primitives": [
            {"type": "channel", "from": [0, 2], "to": [39, 2], "width": 5}
        ]}},
        "electrodes": [{"label": "E7", "x": 2, "y": 2}, {"label": "E17", "x": 37, "y": 2}],
        "analyses": ["spiking"]
    }"#;

    #[test]
    fn defaults_fill_in() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.n_iters, 142_000);
        assert_eq!(s.input_pairs, InputPair::GATE_PAIRS.to_vec());
        assert_eq!(s.inputs.radius, 5.0);
        assert_eq!(s.params, SimParams::default());
        let r = s.resolve().unwrap();
        assert_eq!(r.grid.conductive_count(), 200);
        assert_eq!(r.sites.x.region, Region::disc(2, 2, 5.0));
    }

    #[test]
    fn undefined_electrode_is_a_config_error() {
        let mut s = Scenario::from_json(MINIMAL).unwrap();
        s.inputs.y = SiteRef::Electrode("E99".into());
        let err = s.resolve().unwrap_err();
        assert!(
            matches!(err, RunError::Config(ref m) if m.contains("E99")),
            "{err}"
        );
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = MINIMAL.replace("\"analyses\"", "\"analysis\"");
        assert!(matches!(
            Scenario::from_json(&text),
            Err(RunError::Config(_))
        ));
    }

    #[test]
    fn set_by_name() {
        let mut s = Scenario::from_json(MINIMAL).unwrap();
        s.set("c2", 0.107).unwrap();
        s.set("spiking.window", 150.0).unwrap();
        assert_eq!(s.params.c2, 0.107);
        assert_eq!(s.spiking.window, 150);
        assert!(s.set("gamma", 1.0).is_err());
        assert!(s.set("n_iters", 1.5).is_err());
    }

    #[test]
    fn region_sites_and_round_trip() {
        let text = MINIMAL.replace(
            "\"analyses\"",
            r#""inputs": {"x": {"type": "rect", "min": [0, 0], "max": [1, 4]}, "y": "E17",
                "stimulus": {"mode": "current", "amplitude": 0.5, "duration": 10}},
               "analyses""#,
        );
        let s = Scenario::from_json(&text).unwrap();
        let r = s.resolve().unwrap();
        assert_eq!(r.sites.x.region, Region::rect(0, 0, 1, 4));
        assert_eq!(
            r.sites.y.mode,
            StimulusMode::Current {
                amplitude: 0.5,
                duration: 10
            }
        );
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("s.json");
        fs::write(
            &cfg,
            r#"{"grid": {"image": {"path": "net.png"}}, "electrodes": "coords.json"}"#,
        )
        .unwrap();
        let s = Scenario::load(&cfg).unwrap();
        assert_eq!(
            s.grid,
            GridSource::Image {
                path: dir.path().join("net.png"),
                threshold: ThresholdSpec::default()
            }
        );
        assert_eq!(
            s.electrodes,
            ElectrodeSource::File(dir.path().join("coords.json"))
        );
        assert!(matches!(s.resolve(), Err(RunError::Io { .. })));
    }
}
