use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::region_of;
use crate::scene::{
    BoundingBox, Contrast, Movement, ObjectKind, ObjectProperties, ObjectTrack, SceneRecord,
};

/// Per-kind box height (degrees) used to normalize `OS_size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceHeights(pub BTreeMap<ObjectKind, f64>);

impl ReferenceHeights {
    /// Height 1.0 for every kind, so `OS_size` carries the raw height.
    pub fn unit() -> Self {
        ReferenceHeights(
            [(ObjectKind::Pedestrian, 1.0), (ObjectKind::Vehicle, 1.0)]
                .into_iter()
                .collect(),
        )
    }

    pub fn get(&self, kind: ObjectKind) -> Result<f64> {
        self.0
            .get(&kind)
            .copied()
            .filter(|h| *h > 0.0 && h.is_finite())
            .ok_or_else(|| Error::MissingReferenceHeight(kind.to_string()))
    }

    /// Median pause-frame box height per kind over the given scenes. A kind
    /// absent from these scenes gets the pooled median of all kinds.
    pub fn from_scenes<'a>(scenes: impl IntoIterator<Item = &'a SceneRecord>) -> Result<Self> {
        let mut heights: BTreeMap<ObjectKind, Vec<f64>> = BTreeMap::new();
        for scene in scenes {
            for obj in &scene.objects {
                if let Some(b) = pause_box(obj, scene) {
                    heights
                        .entry(obj.properties.kind)
                        .or_default()
                        .push(b.height());
                }
            }
        }
        let mut pooled: Vec<f64> = heights.values().flatten().copied().collect();
        if pooled.is_empty() {
            return Err(Error::Empty(
                "no visible objects for reference heights".into(),
            ));
        }
        let pooled = median(&mut pooled);
        let mut out = BTreeMap::new();
        for kind in [ObjectKind::Pedestrian, ObjectKind::Vehicle] {
            let h = match heights.get_mut(&kind) {
                Some(v) => median(v),
                None => pooled,
            };
            out.insert(
                kind,
                if h > 0.0 {
                    h
                } else {
                    pooled.max(f64::MIN_POSITIVE)
                },
            );
        }
        Ok(ReferenceHeights(out))
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Box at the pause frame, falling back to the last box inside the window.
pub fn pause_box<'a>(obj: &'a ObjectTrack, scene: &SceneRecord) -> Option<&'a BoundingBox> {
    obj.box_near(scene.pause_time, scene.frame_tolerance())
        .or_else(|| obj.boxes_in_window(scene).last().map(|b| &b.bbox))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialFeatures {
    pub proximity: f64,
    pub duration: f64,
    pub size: f64,
    pub density: f64,
}

pub fn object_spatial_features(
    obj: &ObjectTrack,
    scene: &SceneRecord,
    ref_heights: &ReferenceHeights,
) -> Result<SpatialFeatures> {
    let anchor = pause_box(obj, scene).ok_or_else(|| Error::NotVisible(obj.object_id.clone()))?;
    let c = anchor.center();
    let vp = scene.vanishing_point;
    let visible = obj.boxes_in_window(scene).count();
    let tol = scene.frame_tolerance();
    let density = scene
        .objects
        .iter()
        .filter(|o| o.box_near(scene.pause_time, tol).is_some())
        .count();
    Ok(SpatialFeatures {
        proximity: (c[0] - vp[0]).hypot(c[1] - vp[1]),
        duration: (visible as f64 * scene.frame_period()).min(scene.window_len),
        size: anchor.height() / ref_heights.get(obj.properties.kind)?,
        density: density as f64,
    })
}

/// Binary and one-hot encodings of the annotated properties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropertyEncoding {
    /// 1 for pedestrian, 0 for vehicle.
    pub kind: f64,
    pub relevance: f64,
    pub light: f64,
    pub change: f64,
    /// low, medium, high
    pub contrast: [f64; 3],
    /// static, slow, medium, high
    pub movement: [f64; 4],
}

impl PropertyEncoding {
    /// `(type, relevance, light, change, contrast.., movement..)`.
    pub fn to_array(&self) -> [f64; 11] {
        let mut out = [0.0; 11];
        out[..4].copy_from_slice(&[self.kind, self.relevance, self.light, self.change]);
        out[4..7].copy_from_slice(&self.contrast);
        out[7..].copy_from_slice(&self.movement);
        out
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn object_property_features(p: &ObjectProperties) -> PropertyEncoding {
    PropertyEncoding {
        kind: flag(p.kind == ObjectKind::Pedestrian),
        relevance: flag(p.relevance),
        light: flag(p.light_green),
        change: flag(p.area_change),
        contrast: Contrast::ALL.map(|c| flag(c == p.contrast)),
        movement: Movement::ALL.map(|m| flag(m == p.movement)),
    }
}

/// Whether the box center changes region during the last second before the
/// pause, sampled at every box frame in `[pause - 1, pause]`.
pub fn derive_area_change(obj: &ObjectTrack, scene: &SceneRecord) -> Result<bool> {
    let regions = scene
        .regions
        .as_deref()
        .ok_or_else(|| Error::NoRegions(scene.scene_id.clone()))?;
    let t0 = scene.pause_time - 1.0 - 1e-9;
    let t1 = scene.pause_time + 1e-9;
    let mut prev: Option<Option<usize>> = None;
    for b in obj.boxes.iter().filter(|b| b.t >= t0 && b.t <= t1) {
        let r = region_of(b.bbox.center(), regions);
        if prev.is_some_and(|p| p != r) {
            return Ok(true);
        }
        prev = Some(r);
    }
    Ok(false)
}
