use serde::{Deserialize, Serialize};

use crate::features::{covisible_frames, CoFrame, FeatureConfig, SensoryRadii};
use crate::scene::{window_of, GazeTrack, ObjectTrack, SceneRecord};

/// Gaze-distance summary over the co-visible frames of the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazePointFeatures {
    /// Distance at the pause frame, or at the last co-visible frame before it.
    pub pause: f64,
    pub min: f64,
    pub average: f64,
    /// Set when no frame was co-visible and the cap was substituted.
    pub capped: bool,
}

impl GazePointFeatures {
    pub fn from_frames(frames: &[CoFrame], max_distance_deg: f64) -> Self {
        let Some(last) = frames.last() else {
            return Self {
                pause: max_distance_deg,
                min: max_distance_deg,
                average: max_distance_deg,
                capped: true,
            };
        };
        let min = frames
            .iter()
            .map(|f| f.distance)
            .fold(f64::INFINITY, f64::min);
        let average = frames.iter().map(|f| f.distance).sum::<f64>() / frames.len() as f64;
        Self {
            pause: last.distance,
            min,
            average,
            capped: false,
        }
    }
}

pub fn gaze_point_features(
    gaze: &GazeTrack,
    obj: &ObjectTrack,
    scene: &SceneRecord,
    config: &FeatureConfig,
) -> GazePointFeatures {
    GazePointFeatures::from_frames(&covisible_frames(gaze, obj, scene), config.max_distance_deg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HvFeatures {
    /// Seconds from the last frame within the radius to the pause.
    pub elapse: f64,
    /// Seconds spent within the radius, at most the window length.
    pub dwell: f64,
    /// Mean distance while within the radius; mean over all co-visible
    /// frames when the radius was never entered.
    pub average: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensoryFeatures {
    pub per_radius: [HvFeatures; 4],
    pub capped: bool,
}

impl SensoryFeatures {
    pub fn from_frames(
        frames: &[CoFrame],
        scene: &SceneRecord,
        radii: &SensoryRadii,
        max_distance_deg: f64,
    ) -> Self {
        let (_, t_end) = window_of(scene);
        let period = scene.frame_period();
        if frames.is_empty() {
            let hv = HvFeatures {
                elapse: scene.window_len,
                dwell: 0.0,
                average: max_distance_deg,
            };
            return Self {
                per_radius: [hv; 4],
                capped: true,
            };
        }
        let overall = frames.iter().map(|f| f.distance).sum::<f64>() / frames.len() as f64;
        let per_radius = radii.0.map(|theta| {
            let mut count = 0usize;
            let mut sum = 0.0;
            let mut last = None;
            for f in frames.iter().filter(|f| f.distance < theta) {
                count += 1;
                sum += f.distance;
                last = Some(f.t);
            }
            HvFeatures {
                elapse: last.map_or(scene.window_len, |t| t_end - t),
                dwell: (count as f64 * period).min(scene.window_len),
                average: if count > 0 {
                    sum / count as f64
                } else {
                    overall
                },
            }
        });
        Self {
            per_radius,
            capped: false,
        }
    }
}

pub fn sensory_features(
    gaze: &GazeTrack,
    obj: &ObjectTrack,
    scene: &SceneRecord,
    config: &FeatureConfig,
) -> SensoryFeatures {
    SensoryFeatures::from_frames(
        &covisible_frames(gaze, obj, scene),
        scene,
        &config.radii,
        config.max_distance_deg,
    )
}
