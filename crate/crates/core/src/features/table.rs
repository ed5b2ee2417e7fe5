use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::{
    col, covisible_frames, feature_names, object_property_features, object_spatial_features,
    FeatureConfig, FeatureVector, GazePointFeatures, ReferenceHeights, SensoryFeatures,
};
use crate::scene::{Dataset, GazeTrack, ObjectKind, SceneRecord};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowKey {
    pub participant: String,
    pub scene: String,
    pub object: String,
}

impl RowKey {
    pub fn new(participant: &str, scene: &str, object: &str) -> Self {
        Self {
            participant: participant.to_owned(),
            scene: scene.to_owned(),
            object: object.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub key: RowKey,
    pub kind: ObjectKind,
    pub is_target: bool,
    pub features: FeatureVector,
    /// Number of frames where gaze was valid and the object had a box.
    pub covisible_frames: usize,
    /// True when no frame was co-visible and distance caps were used.
    pub capped: bool,
}

/// One row per (participant, scene, object), sorted by key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows whose scene satisfies `keep`, preserving order.
    pub fn filter_scenes(&self, keep: impl Fn(&str) -> bool) -> FeatureTable {
        FeatureTable {
            names: self.names.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| keep(&r.key.scene))
                .cloned()
                .collect(),
        }
    }

    /// Re-expresses `OS_size` under new reference heights, given the heights
    /// the table was extracted with.
    pub fn rescale_size(&mut self, from: &ReferenceHeights, to: &ReferenceHeights) -> Result<()> {
        for row in &mut self.rows {
            let f = from.get(row.kind)? / to.get(row.kind)?;
            row.features.values[col::OS_SIZE] *= f;
        }
        Ok(())
    }

    /// CSV with key columns, the 30 feature columns, then flag columns.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "participant".to_owned(),
            "scene".to_owned(),
            "object".to_owned(),
            "is_target".to_owned(),
        ];
        header.extend(self.names.iter().cloned());
        header.extend(["covisible_frames".to_owned(), "no_covisible".to_owned()]);
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![
                row.key.participant.clone(),
                row.key.scene.clone(),
                row.key.object.clone(),
                u8::from(row.is_target).to_string(),
            ];
            rec.extend(row.features.values.iter().map(f64::to_string));
            rec.push(row.covisible_frames.to_string());
            rec.push(u8::from(row.capped).to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn extract_row(
    participant: &str,
    scene: &SceneRecord,
    gaze: &GazeTrack,
    object_index: usize,
    config: &FeatureConfig,
    ref_heights: &ReferenceHeights,
) -> Result<FeatureRow> {
    let obj = &scene.objects[object_index];
    let frames = covisible_frames(gaze, obj, scene);
    let gp = GazePointFeatures::from_frames(&frames, config.max_distance_deg);
    let hv = SensoryFeatures::from_frames(&frames, scene, &config.radii, config.max_distance_deg);
    let spatial = object_spatial_features(obj, scene, ref_heights)?;
    let props = object_property_features(&obj.properties);
    Ok(FeatureRow {
        key: RowKey::new(participant, &scene.scene_id, &obj.object_id),
        kind: obj.properties.kind,
        is_target: obj.is_target,
        features: FeatureVector::assemble(&gp, &spatial, &props, &hv),
        covisible_frames: frames.len(),
        capped: gp.capped,
    })
}

/// Feature rows for every participant, scene and object (targets and
/// non-targets). A participant without a gaze track for a scene gets capped
/// rows for that scene.
pub fn extract_all(
    ds: &Dataset,
    config: &FeatureConfig,
    ref_heights: &ReferenceHeights,
) -> Result<FeatureTable> {
    config.validate()?;
    let participants = ds.participants();
    let mut jobs = Vec::new();
    for p in &participants {
        for scene in &ds.scenes {
            for i in 0..scene.objects.len() {
                jobs.push((p.as_str(), scene, i));
            }
        }
    }
    let empty: Vec<GazeTrack> = ds
        .scenes
        .iter()
        .map(|s| GazeTrack {
            participant_id: String::new(),
            scene_id: s.scene_id.clone(),
            samples: Vec::new(),
        })
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(p, scene, i)| {
            let gaze = ds.gaze_track(p, &scene.scene_id).unwrap_or_else(|| {
                empty
                    .iter()
                    .find(|g| g.scene_id == scene.scene_id)
                    .expect("one empty track per scene")
            });
            extract_row(p, scene, gaze, i, config, ref_heights)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(FeatureTable {
        names: feature_names(&config.radii),
        rows,
    })
}
