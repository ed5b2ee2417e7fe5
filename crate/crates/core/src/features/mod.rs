//! The 30-column feature vector for one (participant, scene, object) triple.
//!
//! Column order follows the published loading table:
//! gaze point, a few spatial and property columns interleaved, the one-hot
//! property groups, then elapse/dwell/average for each sensory radius.

mod gaze;
mod geometry;
mod object;
mod table;

pub use gaze::{
    gaze_point_features, sensory_features, GazePointFeatures, HvFeatures, SensoryFeatures,
};
pub use geometry::{covisible_frames, gaze_box_distance, point_in_polygon, region_of, CoFrame};
pub use object::{
    derive_area_change, object_property_features, object_spatial_features, pause_box,
    PropertyEncoding, ReferenceHeights, SpatialFeatures,
};
pub use table::{extract_all, FeatureRow, FeatureTable, RowKey};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEATURE_COUNT: usize = 30;

/// Column indices into [`FeatureVector::values`].
pub mod col {
    pub const G_PAUSE: usize = 0;
    pub const G_MIN: usize = 1;
    pub const G_AVERAGE: usize = 2;
    pub const OS_PROXIMITY: usize = 3;
    pub const OS_DURATION: usize = 4;
    pub const OP_RELEVANCE: usize = 5;
    pub const OP_LIGHT: usize = 6;
    pub const OS_SIZE: usize = 7;
    pub const OS_DENSITY: usize = 8;
    pub const OP_TYPE: usize = 9;
    pub const OP_CONTRAST: usize = 10;
    pub const OP_MOVEMENT: usize = 13;
    pub const OP_CHANGE: usize = 17;
    /// First sensory column; radius `n` occupies `HV + 3n .. HV + 3n + 3`
    /// as (elapse, dwell, average).
    pub const HV: usize = 18;

    pub fn hv_elapse(n: usize) -> usize {
        HV + 3 * n
    }
    pub fn hv_dwell(n: usize) -> usize {
        HV + 3 * n + 1
    }
    pub fn hv_average(n: usize) -> usize {
        HV + 3 * n + 2
    }
}

/// Angular radii (degrees) for fovea, parafovea, perifovea and macula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensoryRadii(pub [f64; 4]);

impl Default for SensoryRadii {
    fn default() -> Self {
        SensoryRadii([2.5, 4.1, 9.1, 15.0])
    }
}

impl SensoryRadii {
    pub fn new(radii: [f64; 4]) -> Result<Self> {
        let ok = radii.iter().all(|r| *r > 0.0 && r.is_finite())
            && radii.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(SensoryRadii(radii))
        } else {
            Err(Error::invalid(
                "radii",
                format!("must be positive and strictly increasing, got {radii:?}"),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub radii: SensoryRadii,
    /// Substitute distance when an object is never co-visible with gaze.
    pub max_distance_deg: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            radii: SensoryRadii::default(),
            max_distance_deg: 60.0,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        SensoryRadii::new(self.radii.0)?;
        if !(self.max_distance_deg > 0.0 && self.max_distance_deg.is_finite()) {
            return Err(Error::invalid("max_distance_deg", "must be positive"));
        }
        Ok(())
    }
}

/// Column names in table order; the sensory names carry the radius.
pub fn feature_names(radii: &SensoryRadii) -> Vec<String> {
    let mut names: Vec<String> = [
        "G_pause",
        "G_min",
        "G_average",
        "OS_proximity",
        "OS_duration",
        "OP_relevance",
        "OP_light",
        "OS_size",
        "OS_density",
        "OP_type",
        "OP_contrast_low",
        "OP_contrast_med",
        "OP_contrast_high",
        "OP_movement_static",
        "OP_movement_slow",
        "OP_movement_med",
        "OP_movement_high",
        "OP_change",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for r in radii.0 {
        for stat in ["elapse", "dwell", "average"] {
            names.push(format!("HV_{stat}_{r:.1}"));
        }
    }
    names
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_COUNT],
}

impl FeatureVector {
    pub fn assemble(
        gaze: &GazePointFeatures,
        spatial: &SpatialFeatures,
        props: &PropertyEncoding,
        sensory: &SensoryFeatures,
    ) -> Self {
        let mut v = [0.0; FEATURE_COUNT];
        v[col::G_PAUSE] = gaze.pause;
        v[col::G_MIN] = gaze.min;
        v[col::G_AVERAGE] = gaze.average;
        v[col::OS_PROXIMITY] = spatial.proximity;
        v[col::OS_DURATION] = spatial.duration;
        v[col::OS_SIZE] = spatial.size;
        v[col::OS_DENSITY] = spatial.density;
        v[col::OP_RELEVANCE] = props.relevance;
        v[col::OP_LIGHT] = props.light;
        v[col::OP_TYPE] = props.kind;
        v[col::OP_CONTRAST..col::OP_CONTRAST + 3].copy_from_slice(&props.contrast);
        v[col::OP_MOVEMENT..col::OP_MOVEMENT + 4].copy_from_slice(&props.movement);
        v[col::OP_CHANGE] = props.change;
        for (n, hv) in sensory.per_radius.iter().enumerate() {
            v[col::hv_elapse(n)] = hv.elapse;
            v[col::hv_dwell(n)] = hv.dwell;
            v[col::hv_average(n)] = hv.average;
        }
        FeatureVector { values: v }
    }

    pub fn get(&self, column: usize) -> f64 {
        self.values[column]
    }
}
