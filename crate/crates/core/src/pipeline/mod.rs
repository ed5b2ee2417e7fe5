//! Method presets and the trained SA prediction pipeline.
//!
//! A learned method is `min-max scale -> PCA(k) -> class-weighted linear
//! SVM -> sigmoid`. Memory methods add a second stage: stage-1
//! probabilities of every object a participant saw in a scene are ranked,
//! mapped through a capacity function, and fed with the probability to a
//! logistic regression.

mod baseline1;
mod memory;
mod model;
mod threshold;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use baseline1::{
    baseline1_predict, baseline1_roc, fixation_score_ms, longest_run_frames, FixationRule,
    SweepMode, SweepPoint, SweepRoc, DURATION_RANGE, RADIUS_RANGE, SWEEP_POINTS,
};
pub use memory::{memory_feature, memory_rank};
pub(crate) use model::predict_rows;
pub use model::{
    label_index, train_pipeline, train_stage1, train_stage2, Calibration, Prediction, Stage1,
    Stage2, TrainedPipeline, TrainingAudit, FORMAT_VERSION,
};
pub use threshold::{accuracy_at, select_threshold};

use crate::error::{Error, Result};
use crate::features::col;
use crate::numeric::{LogisticConfig, SvmConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureFamily {
    GazePoint,
    ObjectSpatial,
    ObjectProperty,
    Sensory,
}

impl FeatureFamily {
    pub fn columns(self) -> Vec<usize> {
        match self {
            FeatureFamily::GazePoint => vec![col::G_PAUSE, col::G_MIN, col::G_AVERAGE],
            FeatureFamily::ObjectSpatial => {
                vec![
                    col::OS_PROXIMITY,
                    col::OS_DURATION,
                    col::OS_SIZE,
                    col::OS_DENSITY,
                ]
            }
            FeatureFamily::ObjectProperty => {
                let mut c = vec![col::OP_RELEVANCE, col::OP_LIGHT, col::OP_TYPE];
                c.extend(col::OP_CONTRAST..col::OP_CONTRAST + 3);
                c.extend(col::OP_MOVEMENT..col::OP_MOVEMENT + 4);
                c.push(col::OP_CHANGE);
                c
            }
            FeatureFamily::Sensory => (col::HV..col::HV + 12).collect(),
        }
    }
}

/// Number of PCA components, or chosen by inner pause-grouped CV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcaK {
    Fixed(usize),
    Auto,
}

impl Serialize for PcaK {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PcaK::Fixed(k) => s.serialize_u64(*k as u64),
            PcaK::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for PcaK {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => n
                .as_u64()
                .filter(|k| *k > 0)
                .map(|k| PcaK::Fixed(k as usize))
                .ok_or_else(|| serde::de::Error::custom("pca_k must be a positive integer")),
            serde_json::Value::String(s) if s == "auto" => Ok(PcaK::Auto),
            other => Err(serde::de::Error::custom(format!(
                "pca_k must be a positive integer or \"auto\", got {other}"
            ))),
        }
    }
}

impl FromStr for PcaK {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(PcaK::Auto);
        }
        s.parse::<usize>()
            .ok()
            .filter(|k| *k > 0)
            .map(PcaK::Fixed)
            .ok_or_else(|| {
                Error::invalid(
                    "pca_k",
                    format!("`{s}` is not a positive integer or `auto`"),
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemoryShape {
    /// `tanh(R - N)`
    Tanh,
    /// `1` above capacity, `0` otherwise.
    Step,
    /// The rank itself.
    Linear,
}

impl FromStr for MemoryShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(MemoryShape::Tanh),
            "step" => Ok(MemoryShape::Step),
            "linear" => Ok(MemoryShape::Linear),
            other => Err(Error::invalid(
                "memory shape",
                format!("unknown shape `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MemorySpec {
    /// Short-term memory capacity `N`.
    pub capacity: usize,
    pub shape: MemoryShape,
}

impl Default for MemorySpec {
    fn default() -> Self {
        Self {
            capacity: 7,
            shape: MemoryShape::Tanh,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub name: String,
    pub families: Vec<FeatureFamily>,
    pub pca_k: PcaK,
    pub memory: Option<MemorySpec>,
}

impl MethodSpec {
    /// Selected feature columns in table order.
    pub fn columns(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.families.iter().flat_map(|f| f.columns()).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::invalid(
                "families",
                "at least one feature family is required",
            ));
        }
        let d = self.columns().len();
        if let PcaK::Fixed(k) = self.pca_k {
            if k == 0 || k > d {
                return Err(Error::OutOfRange {
                    what: "pca_k".into(),
                    value: k,
                    allowed: format!("1..={d}"),
                });
            }
        }
        if let Some(m) = self.memory {
            if m.capacity == 0 {
                return Err(Error::invalid("memory capacity", "must be >= 1"));
            }
        }
        Ok(())
    }
}

/// Named methods addressable from the CLI and configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Baseline1,
    Baseline3,
    Method1,
    Method2,
    Method12,
    Method123,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Baseline1,
        Preset::Baseline3,
        Preset::Method1,
        Preset::Method2,
        Preset::Method12,
        Preset::Method123,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Baseline1 => "baseline1",
            Preset::Baseline3 => "baseline3",
            Preset::Method1 => "method1",
            Preset::Method2 => "method2",
            Preset::Method12 => "method12",
            Preset::Method123 => "method123",
        }
    }

    /// Row label in the comparison table.
    pub fn label(self) -> &'static str {
        match self {
            Preset::Baseline1 => "Baseline 1 (Fixation rule)",
            Preset::Baseline3 => "Baseline 3 (Gaze+Object spatial feature)",
            Preset::Method1 => "Method 1 (Baseline 3+Object property features)",
            Preset::Method2 => "Method 2 (Baseline 3+Sensory-based features)",
            Preset::Method12 => "Method 1+2 (Method 1+Sensory-based features)",
            Preset::Method123 => "Method 1+2+3 (Method 1, 2+Memory feature)",
        }
    }

    /// The learned-method definition; `None` for the fixation rule.
    pub fn spec(self) -> Option<MethodSpec> {
        use FeatureFamily::*;
        let base = vec![GazePoint, ObjectSpatial];
        let (families, k, memory) = match self {
            Preset::Baseline1 => return None,
            Preset::Baseline3 => (base, 5, None),
            Preset::Method1 => ([base, vec![ObjectProperty]].concat(), 11, None),
            Preset::Method2 => ([base, vec![Sensory]].concat(), 11, None),
            Preset::Method12 => ([base, vec![ObjectProperty, Sensory]].concat(), 11, None),
            Preset::Method123 => (
                [base, vec![ObjectProperty, Sensory]].concat(),
                11,
                Some(MemorySpec::default()),
            ),
        };
        Some(MethodSpec {
            name: self.name().to_owned(),
            families,
            pca_k: PcaK::Fixed(k),
            memory,
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub svm: SvmConfig,
    pub logistic: LogisticConfig,
    pub calibration: Calibration,
    /// Append the stage-1 PCA projection to the stage-2 input.
    pub stage2_append_features: bool,
    /// Candidate `k` values for `PcaK::Auto`; all `1..=d` when empty.
    pub auto_k_grid: Vec<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            svm: SvmConfig::default(),
            logistic: LogisticConfig::default(),
            calibration: Calibration::Sigmoid,
            stage2_append_features: false,
            auto_k_grid: Vec::new(),
        }
    }
}
