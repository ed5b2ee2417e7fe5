use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear salience weights over object properties and proximity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SalienceWeights {
    pub vehicle: f64,
    pub relevance: f64,
    pub light_green: f64,
    /// Per contrast level (low 0, medium 0.5, high 1).
    pub contrast: f64,
    /// Per movement level (static 0 .. high 1).
    pub movement: f64,
    pub area_change: f64,
    /// Per degree from the vanishing point.
    pub proximity: f64,
}

impl Default for SalienceWeights {
    fn default() -> Self {
        Self {
            vehicle: 0.2,
            relevance: 1.5,
            light_green: -0.2,
            contrast: 1.2,
            movement: 1.2,
            area_change: 0.8,
            proximity: -0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttentionConfig {
    pub salience: SalienceWeights,
    /// Softmax inverse temperature for choosing the next fixated object.
    pub beta: f64,
    /// Softmax weight of the road ahead, competing with `exp(beta * salience)`
    /// of every visible object.
    pub road_weight: f64,
    /// Log-scale spread of the per-participant road weight.
    pub road_weight_sd: f64,
    pub fixation_median_ms: f64,
    /// Log-scale spread of fixation durations.
    pub fixation_sigma: f64,
    /// Fixations last `exp(gain * salience)` times longer on salient objects.
    pub duration_gain: f64,
    /// Salience at which half of the participants only glance at an object.
    pub glance_midpoint: f64,
    /// Slope of the logistic glance probability in salience.
    pub glance_gain: f64,
    pub saccade_frames: usize,
    /// Per-fixation probability of a blink.
    pub blink_rate: f64,
    pub gaze_noise_deg: f64,
    /// Spread of participant-specific object preferences.
    pub preference_sd: f64,
}

impl Default for AttentionConfig {
    fn default() -> Self {
        Self {
            salience: SalienceWeights::default(),
            beta: 0.5,
            road_weight: 25.0,
            road_weight_sd: 0.5,
            fixation_median_ms: 260.0,
            fixation_sigma: 0.5,
            duration_gain: 0.3,
            glance_midpoint: 1.8,
            glance_gain: 5.0,
            saccade_frames: 2,
            blink_rate: 0.03,
            gaze_noise_deg: 0.08,
            preference_sd: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Short-term memory capacity; `None` for unlimited.
    pub capacity: Option<usize>,
    /// Spread of the per-participant capacity around `capacity`.
    pub capacity_sd: f64,
    pub fixation_radius_deg: f64,
    pub fixation_ms: f64,
    /// Probability that a label is flipped.
    pub label_noise: f64,
    pub salience_weight: f64,
    pub recency_weight: f64,
    /// Time constant of the recency term in seconds.
    pub recency_scale_s: f64,
    pub dwell_weight: f64,
    pub strength_noise: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            capacity: Some(7),
            capacity_sd: 0.0,
            fixation_radius_deg: 2.5,
            fixation_ms: 120.0,
            label_noise: 0.1,
            salience_weight: 1.0,
            recency_weight: 1.0,
            recency_scale_s: 3.0,
            dwell_weight: 1.0,
            strength_noise: 0.3,
        }
    }
}

/// Synthetic dataset parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub n_scenes: usize,
    pub n_participants: usize,
    pub objects_mean: f64,
    pub objects_sd: f64,
    pub min_objects: usize,
    /// Average number of queried objects per scene.
    pub targets_per_scene: f64,
    /// Correlation of relevance, contrast and movement through a shared
    /// per-object conspicuity, in [0, 1].
    pub property_coupling: f64,
    pub frame_rate: f64,
    pub window_len: f64,
    pub pixels_per_degree: f64,
    pub attention: AttentionConfig,
    pub oracle: OracleConfig,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_scenes: 8,
            n_participants: 44,
            objects_mean: 7.5,
            objects_sd: 3.0,
            min_objects: 2,
            targets_per_scene: 3.5,
            property_coupling: 0.7,
            frame_rate: 60.0,
            window_len: 10.0,
            pixels_per_degree: 30.0,
            attention: AttentionConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be positive, got {v}")))
            }
        };
        let share = |field: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(
                    field,
                    format!("must lie in [0, 1], got {v}"),
                ))
            }
        };
        if self.n_scenes == 0 {
            return Err(Error::invalid("n_scenes", "must be at least 1"));
        }
        if self.n_participants == 0 {
            return Err(Error::invalid("n_participants", "must be at least 1"));
        }
        if self.min_objects == 0 {
            return Err(Error::invalid(
                "min_objects",
                "scenes need at least one object",
            ));
        }
        if !(self.objects_mean.is_finite() && self.objects_sd.is_finite() && self.objects_sd >= 0.0)
        {
            return Err(Error::invalid(
                "objects_sd",
                "must be finite and non-negative",
            ));
        }
        positive("targets_per_scene", self.targets_per_scene)?;
        positive("frame_rate", self.frame_rate)?;
        positive("window_len", self.window_len)?;
        positive("pixels_per_degree", self.pixels_per_degree)?;
        share("property_coupling", self.property_coupling)?;
        let a = &self.attention;
        positive("road_weight", a.road_weight)?;
        if !(a.glance_midpoint.is_finite() && a.glance_gain.is_finite()) {
            return Err(Error::invalid("glance", "midpoint and gain must be finite"));
        }
        share("blink_rate", a.blink_rate)?;
        positive("fixation_median_ms", a.fixation_median_ms)?;
        if !(a.fixation_sigma >= 0.0
            && a.gaze_noise_deg >= 0.0
            && a.preference_sd >= 0.0
            && a.road_weight_sd >= 0.0)
        {
            return Err(Error::invalid("attention", "spreads must be non-negative"));
        }
        let o = &self.oracle;
        if !(0.0..0.5).contains(&o.label_noise) {
            return Err(Error::invalid(
                "label_noise",
                format!("must lie in [0, 0.5), got {}", o.label_noise),
            ));
        }
        if o.capacity == Some(0) {
            return Err(Error::invalid("capacity", "must be at least 1"));
        }
        positive("fixation_radius_deg", o.fixation_radius_deg)?;
        positive("recency_scale_s", o.recency_scale_s)?;
        if !(o.fixation_ms >= 0.0 && o.strength_noise >= 0.0 && o.capacity_sd >= 0.0) {
            return Err(Error::invalid(
                "oracle",
                "fixation_ms, strength_noise and capacity_sd must be non-negative",
            ));
        }
        Ok(())
    }
}
