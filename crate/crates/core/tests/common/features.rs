//! Naive per-frame recomputation of the feature table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sa_core::features::col;
use sa_core::scene::{Contrast, Movement};
use sa_core::synth::{gen_dataset, GenConfig};
use sa_core::{
    extract_all, BoundingBox, Dataset, FeatureConfig, GazeSample, ObjectKind, ObjectTrack,
    ReferenceHeights, SceneRecord, FEATURE_COUNT,
};

pub const TOL: f64 = 1e-9;

pub fn random_dataset() -> Dataset {
    let cfg = GenConfig {
        seed: 20_240_611,
        n_scenes: 100,
        n_participants: 2,
        ..GenConfig::default()
    };
    let (mut ds, _) = gen_dataset(&cfg).unwrap();

    // Punch holes so that missing boxes, missing gaze and pause-frame
    // fallbacks all occur.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for scene in &mut ds.scenes {
        let (t0, t1) = (scene.pause_time - scene.window_len, scene.pause_time);
        for obj in &mut scene.objects {
            let last_in_window = obj.boxes.iter().rposition(|b| b.t > t0 && b.t <= t1);
            let drop_pause = rng.random_bool(0.2);
            let mut i = 0;
            obj.boxes.retain(|b| {
                let keep_anchor = Some(i) == last_in_window && !drop_pause;
                let near_pause = (b.t - t1).abs() < 0.05;
                i += 1;
                keep_anchor || !(rng.random_bool(0.05) || (drop_pause && near_pause))
            });
            if !obj.boxes.iter().any(|b| b.t > t0 && b.t <= t1) {
                let t = t1 - 0.5;
                let pos = obj.boxes.partition_point(|b| b.t < t);
                obj.boxes.insert(
                    pos,
                    sa_core::scene::TimedBox {
                        t,
                        bbox: BoundingBox::new(1.0, 1.0, 2.0, 3.0),
                    },
                );
            }
        }
    }
    for track in &mut ds.gaze {
        for s in &mut track.samples {
            if rng.random_bool(0.03) {
                s.valid = false;
            }
        }
    }
    // extract_all tolerates a missing track; the loader would reject it.
    ds.gaze.remove(3);
    ds
}

pub fn clamp_distance(g: [f64; 2], b: &BoundingBox) -> f64 {
    let cx = g[0].clamp(b.xmin, b.xmax);
    let cy = g[1].clamp(b.ymin, b.ymax);
    ((g[0] - cx).powi(2) + (g[1] - cy).powi(2)).sqrt()
}

/// Nearest box within half a frame, by linear scan; earlier box on ties.
pub fn nearest_box(obj: &ObjectTrack, t: f64, tol: f64) -> Option<BoundingBox> {
    let mut best: Option<(f64, BoundingBox)> = None;
    for b in &obj.boxes {
        let dt = (b.t - t).abs();
        if dt <= tol && best.as_ref().is_none_or(|(d, _)| dt < *d) {
            best = Some((dt, b.bbox));
        }
    }
    best.map(|(_, b)| b)
}

pub fn in_window(t: f64, scene: &SceneRecord) -> bool {
    t > scene.pause_time - scene.window_len && t <= scene.pause_time
}

pub fn oracle_row(
    samples: &[GazeSample],
    scene: &SceneRecord,
    obj: &ObjectTrack,
) -> [f64; FEATURE_COUNT] {
    let cap = FeatureConfig::default().max_distance_deg;
    let radii = [2.5, 4.1, 9.1, 15.0];
    let period = 1.0 / scene.frame_rate;
    let tol = 0.5 * period + 1e-9;

    let mut times = Vec::new();
    let mut dists = Vec::new();
    for s in samples {
        if !s.valid || !in_window(s.t, scene) {
            continue;
        }
        if let Some(b) = nearest_box(obj, s.t, tol) {
            times.push(s.t);
            dists.push(clamp_distance([s.x, s.y], &b));
        }
    }

    let mut v = [0.0; FEATURE_COUNT];
    if dists.is_empty() {
        v[col::G_PAUSE] = cap;
        v[col::G_MIN] = cap;
        v[col::G_AVERAGE] = cap;
    } else {
        v[col::G_PAUSE] = *dists.last().unwrap();
        v[col::G_MIN] = dists.iter().cloned().fold(f64::MAX, f64::min);
        v[col::G_AVERAGE] = dists.iter().sum::<f64>() / dists.len() as f64;
    }
    for (n, &theta) in radii.iter().enumerate() {
        let inside: Vec<usize> = (0..dists.len()).filter(|&i| dists[i] < theta).collect();
        let (elapse, dwell, average) = if dists.is_empty() {
            (scene.window_len, 0.0, cap)
        } else if inside.is_empty() {
            (scene.window_len, 0.0, v[col::G_AVERAGE])
        } else {
            let last = times[*inside.last().unwrap()];
            let mean = inside.iter().map(|&i| dists[i]).sum::<f64>() / inside.len() as f64;
            (
                scene.pause_time - last,
                (inside.len() as f64 * period).min(scene.window_len),
                mean,
            )
        };
        v[col::hv_elapse(n)] = elapse;
        v[col::hv_dwell(n)] = dwell;
        v[col::hv_average(n)] = average;
    }

    let window_boxes: Vec<&BoundingBox> = obj
        .boxes
        .iter()
        .filter(|b| in_window(b.t, scene))
        .map(|b| &b.bbox)
        .collect();
    let anchor = nearest_box(obj, scene.pause_time, tol).unwrap_or(**window_boxes.last().unwrap());
    let c = [
        (anchor.xmin + anchor.xmax) / 2.0,
        (anchor.ymin + anchor.ymax) / 2.0,
    ];
    let vp = scene.vanishing_point;
    v[col::OS_PROXIMITY] = ((c[0] - vp[0]).powi(2) + (c[1] - vp[1]).powi(2)).sqrt();
    v[col::OS_DURATION] = (window_boxes.len() as f64 * period).min(scene.window_len);
    v[col::OS_SIZE] = anchor.ymax - anchor.ymin;
    v[col::OS_DENSITY] = scene
        .objects
        .iter()
        .filter(|o| nearest_box(o, scene.pause_time, tol).is_some())
        .count() as f64;

    let p = &obj.properties;
    let bit = |b: bool| if b { 1.0 } else { 0.0 };
    v[col::OP_TYPE] = bit(p.kind == ObjectKind::Pedestrian);
    v[col::OP_RELEVANCE] = bit(p.relevance);
    v[col::OP_LIGHT] = bit(p.light_green);
    v[col::OP_CHANGE] = bit(p.area_change);
    let contrast = match p.contrast {
        Contrast::Low => 0,
        Contrast::Medium => 1,
        Contrast::High => 2,
    };
    v[col::OP_CONTRAST + contrast] = 1.0;
    let movement = match p.movement {
        Movement::Static => 0,
        Movement::Slow => 1,
        Movement::Medium => 2,
        Movement::High => 3,
    };
    v[col::OP_MOVEMENT + movement] = 1.0;
    v
}

/// Extracts the table and compares every cell with the oracle. Returns the
/// number of rows checked and how many were capped.
pub fn compare_with_oracle(ds: &Dataset) -> Result<(usize, usize), String> {
    let table = extract_all(ds, &FeatureConfig::default(), &ReferenceHeights::unit())
        .map_err(|e| e.to_string())?;
    let mut capped = 0;
    for row in &table.rows {
        let scene = ds.scene(&row.key.scene).unwrap();
        let obj = scene.object(&row.key.object).unwrap();
        let samples = ds
            .gaze_track(&row.key.participant, &row.key.scene)
            .map_or(&[][..], |g| &g.samples[..]);
        let expected = oracle_row(samples, scene, obj);
        for (c, (&got, &want)) in row.features.values.iter().zip(&expected).enumerate() {
            if (got - want).abs() > TOL {
                return Err(format!(
                    "{:?} column {c} ({}): got {got}, oracle {want}",
                    row.key, table.names[c]
                ));
            }
        }
        capped += usize::from(row.capped);
    }
    Ok((table.rows.len(), capped))
}
