use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::window_of;

pub const DEFAULT_WINDOW_LEN: f64 = 10.0;
pub const DEFAULT_FRAME_RATE: f64 = 60.0;

/// Allowed deviation of a gaze inter-sample interval from `1 / frame_rate`.
pub const GAZE_JITTER: f64 = 0.2;

/// Axis-aligned bounding box in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl BoundingBox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        Self {
            xmin,
            ymin,
            xmax,
            ymax,
        }
    }

    pub fn center(&self) -> [f64; 2] {
        [(self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0]
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn is_well_formed(&self) -> bool {
        [self.xmin, self.ymin, self.xmax, self.ymax]
            .iter()
            .all(|v| v.is_finite())
            && self.xmin <= self.xmax
            && self.ymin <= self.ymax
    }

    pub(crate) fn scaled(&self, f: f64) -> Self {
        Self::new(self.xmin * f, self.ymin * f, self.xmax * f, self.ymax * f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedBox {
    pub t: f64,
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Pedestrian,
    Vehicle,
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectKind::Pedestrian => "pedestrian",
            ObjectKind::Vehicle => "vehicle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Contrast {
    Low,
    Medium,
    High,
}

impl Contrast {
    pub const ALL: [Contrast; 3] = [Contrast::Low, Contrast::Medium, Contrast::High];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Movement {
    Static,
    Slow,
    Medium,
    High,
}

impl Movement {
    pub const ALL: [Movement; 4] = [
        Movement::Static,
        Movement::Slow,
        Movement::Medium,
        Movement::High,
    ];
}

/// Annotated object properties. `light_green = false` covers both red and
/// unknown light states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectProperties {
    pub kind: ObjectKind,
    pub relevance: bool,
    pub light_green: bool,
    pub contrast: Contrast,
    pub movement: Movement,
    pub area_change: bool,
}

/// One traffic participant in a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectTrack {
    pub object_id: String,
    /// Queried at the pause, hence labeled.
    pub is_target: bool,
    /// Sorted by strictly increasing time.
    pub boxes: Vec<TimedBox>,
    pub properties: ObjectProperties,
}

impl ObjectTrack {
    /// Box whose timestamp is nearest to `t`, if it lies within `tol` seconds.
    pub fn box_near(&self, t: f64, tol: f64) -> Option<&BoundingBox> {
        let idx = self.boxes.partition_point(|b| b.t < t);
        let mut best: Option<(f64, &TimedBox)> = None;
        for i in [idx.wrapping_sub(1), idx] {
            if let Some(b) = self.boxes.get(i) {
                let dt = (b.t - t).abs();
                if dt <= tol && best.is_none_or(|(d, _)| dt < d) {
                    best = Some((dt, b));
                }
            }
        }
        best.map(|(_, b)| &b.bbox)
    }

    /// Boxes whose timestamps fall inside the scene's analysis window.
    pub fn boxes_in_window<'a>(
        &'a self,
        scene: &SceneRecord,
    ) -> impl Iterator<Item = &'a TimedBox> + 'a {
        let (t0, t1) = window_of(scene);
        self.boxes.iter().filter(move |b| b.t > t0 && b.t <= t1)
    }

    fn validate(&self, scene: &SceneRecord) -> Result<()> {
        let ctx = || format!("object `{}` in scene `{}`", self.object_id, scene.scene_id);
        for (i, b) in self.boxes.iter().enumerate() {
            if !b.t.is_finite() || !b.bbox.is_well_formed() {
                return Err(Error::invalid(
                    "boxes",
                    format!("{} box {i} is malformed", ctx()),
                ));
            }
            if i > 0 && b.t <= self.boxes[i - 1].t {
                return Err(Error::NonMonotonic {
                    context: ctx(),
                    index: i,
                });
            }
        }
        if self.boxes_in_window(scene).next().is_none() {
            return Err(Error::NotVisible(self.object_id.clone()));
        }
        Ok(())
    }
}

/// Target-area boundary used to derive the area-change property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPolygon {
    pub region_id: String,
    pub polygon: Vec<[f64; 2]>,
}

/// One pause: timing, calibration, and every object in the scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneRecord {
    pub scene_id: String,
    pub pause_time: f64,
    pub window_len: f64,
    pub frame_rate: f64,
    pub vanishing_point: [f64; 2],
    pub pixels_per_degree: f64,
    pub objects: Vec<ObjectTrack>,
    pub regions: Option<Vec<RegionPolygon>>,
}

impl SceneRecord {
    /// A scene with default window, frame rate and unit calibration.
    pub fn new(scene_id: impl Into<String>, pause_time: f64) -> Self {
        Self {
            scene_id: scene_id.into(),
            pause_time,
            window_len: DEFAULT_WINDOW_LEN,
            frame_rate: DEFAULT_FRAME_RATE,
            vanishing_point: [0.0, 0.0],
            pixels_per_degree: 1.0,
            objects: Vec::new(),
            regions: None,
        }
    }

    pub fn frame_period(&self) -> f64 {
        1.0 / self.frame_rate
    }

    /// Tolerance used to match a timestamp to a frame.
    pub fn frame_tolerance(&self) -> f64 {
        0.5 * self.frame_period() + 1e-9
    }

    pub fn object(&self, object_id: &str) -> Option<&ObjectTrack> {
        self.objects.iter().find(|o| o.object_id == object_id)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(
                    name,
                    format!("scene `{}`: must be > 0, got {v}", self.scene_id),
                ))
            }
        };
        positive("window_len", self.window_len)?;
        positive("frame_rate", self.frame_rate)?;
        positive("pixels_per_degree", self.pixels_per_degree)?;
        if !self.pause_time.is_finite() {
            return Err(Error::invalid("pause_time", "not finite"));
        }
        let mut seen = HashSet::new();
        for obj in &self.objects {
            if !seen.insert(obj.object_id.as_str()) {
                return Err(Error::Integrity(format!(
                    "duplicate object id `{}` in scene `{}`",
                    obj.object_id, self.scene_id
                )));
            }
            obj.validate(self)?;
        }
        if let Some(regions) = &self.regions {
            for r in regions {
                if r.polygon.len() < 3 {
                    return Err(Error::invalid(
                        "regions",
                        format!("region `{}` needs at least 3 vertices", r.region_id),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// False for blinks and tracking loss; such samples never enter a feature.
    pub valid: bool,
}

impl GazeSample {
    pub fn point(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// Gaze samples of one participant for one scene, in scene coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GazeTrack {
    pub participant_id: String,
    pub scene_id: String,
    pub samples: Vec<GazeSample>,
}

impl GazeTrack {
    pub fn samples_in_window<'a>(
        &'a self,
        scene: &SceneRecord,
    ) -> impl Iterator<Item = &'a GazeSample> + 'a {
        let (t0, t1) = window_of(scene);
        self.samples.iter().filter(move |s| s.t > t0 && s.t <= t1)
    }

    pub fn validate(&self, scene: &SceneRecord) -> Result<()> {
        let ctx = || {
            format!(
                "gaze of `{}` in scene `{}`",
                self.participant_id, self.scene_id
            )
        };
        let period = scene.frame_period();
        for (i, s) in self.samples.iter().enumerate() {
            if !s.t.is_finite() || (s.valid && !(s.x.is_finite() && s.y.is_finite())) {
                return Err(Error::invalid(
                    "gaze",
                    format!("{} sample {i} is malformed", ctx()),
                ));
            }
            if i > 0 {
                let dt = s.t - self.samples[i - 1].t;
                if dt <= 0.0 {
                    return Err(Error::NonMonotonic {
                        context: ctx(),
                        index: i,
                    });
                }
                if (dt - period).abs() > GAZE_JITTER * period + 1e-9 {
                    return Err(Error::invalid(
                        "t",
                        format!(
                            "{} sample {i}: spacing {dt} s outside 20% of the frame period",
                            ctx()
                        ),
                    ));
                }
            }
        }
        if !self.samples_in_window(scene).any(|s| s.valid) {
            return Err(Error::invalid(
                "gaze",
                format!("{}: no valid sample inside the analysis window", ctx()),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AwarenessLabel {
    pub participant_id: String,
    pub scene_id: String,
    pub object_id: String,
    pub aware: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub scenes: Vec<SceneRecord>,
    pub gaze: Vec<GazeTrack>,
    pub labels: Vec<AwarenessLabel>,
}

impl Dataset {
    pub fn scene(&self, scene_id: &str) -> Option<&SceneRecord> {
        self.scenes.iter().find(|s| s.scene_id == scene_id)
    }

    pub fn gaze_track(&self, participant_id: &str, scene_id: &str) -> Option<&GazeTrack> {
        self.gaze
            .iter()
            .find(|g| g.participant_id == participant_id && g.scene_id == scene_id)
    }

    /// Every participant that appears in gaze or labels, sorted.
    pub fn participants(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .gaze
            .iter()
            .map(|g| g.participant_id.as_str())
            .chain(self.labels.iter().map(|l| l.participant_id.as_str()))
            .collect();
        set.into_iter().map(str::to_owned).collect()
    }

    /// Labels keyed by (participant, scene, object).
    pub fn label_map(&self) -> BTreeMap<(String, String, String), bool> {
        self.labels
            .iter()
            .map(|l| {
                (
                    (
                        l.participant_id.clone(),
                        l.scene_id.clone(),
                        l.object_id.clone(),
                    ),
                    l.aware,
                )
            })
            .collect()
    }

    /// Checks every type invariant and cross-reference.
    pub fn validate(&self) -> Result<()> {
        let mut scene_ids = HashSet::new();
        for scene in &self.scenes {
            if !scene_ids.insert(scene.scene_id.as_str()) {
                return Err(Error::Integrity(format!(
                    "duplicate scene id `{}`",
                    scene.scene_id
                )));
            }
            scene.validate()?;
        }
        let mut gaze_keys = HashSet::new();
        for track in &self.gaze {
            let scene = self.scene(&track.scene_id).ok_or_else(|| {
                Error::Integrity(format!(
                    "gaze track references unknown scene `{}`",
                    track.scene_id
                ))
            })?;
            if !gaze_keys.insert((track.participant_id.as_str(), track.scene_id.as_str())) {
                return Err(Error::Integrity(format!(
                    "duplicate gaze track for `{}` in scene `{}`",
                    track.participant_id, track.scene_id
                )));
            }
            track.validate(scene)?;
        }
        let mut label_keys = HashSet::new();
        for label in &self.labels {
            let scene = self.scene(&label.scene_id).ok_or_else(|| {
                Error::Integrity(format!(
                    "label references unknown scene `{}`",
                    label.scene_id
                ))
            })?;
            let obj = scene.object(&label.object_id).ok_or_else(|| {
                Error::Integrity(format!(
                    "label references unknown object `{}` in scene `{}`",
                    label.object_id, label.scene_id
                ))
            })?;
            if !obj.is_target {
                return Err(Error::Integrity(format!(
                    "label references non-target object `{}`",
                    label.object_id
                )));
            }
            if !gaze_keys.contains(&(label.participant_id.as_str(), label.scene_id.as_str())) {
                return Err(Error::Integrity(format!(
                    "no gaze track for participant `{}` in scene `{}`",
                    label.participant_id, label.scene_id
                )));
            }
            if !label_keys.insert((
                label.participant_id.as_str(),
                label.scene_id.as_str(),
                label.object_id.as_str(),
            )) {
                return Err(Error::Integrity(format!(
                    "duplicate label for `{}`/`{}`/`{}`",
                    label.participant_id, label.scene_id, label.object_id
                )));
            }
        }
        Ok(())
    }
}
