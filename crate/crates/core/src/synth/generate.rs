use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use rayon::prelude::*;

use crate::error::Result;
use crate::features::{covisible_frames, derive_area_change};
use crate::pipeline::fixation_score_ms;
use crate::scene::{
    AwarenessLabel, BoundingBox, Contrast, Dataset, GazeSample, GazeTrack, Movement, ObjectKind,
    ObjectProperties, ObjectTrack, RegionPolygon, SceneRecord, TimedBox,
};
use crate::synth::{GenConfig, OracleRow, OracleTrace, SalienceWeights};

const VANISHING_POINT: [f64; 2] = [0.0, 2.0];
// Relevance, contrast and movement are thresholds on a standard normal
// score that mixes a per-object conspicuity with independent noise. The
// cut points are normal quantiles giving marginals of 30% relevant,
// 20/60/20% contrast and 50/25/15/10% movement.
const RELEVANT_CUT: f64 = 0.5244;
const CONTRAST_CUTS: [f64; 2] = [-0.8416, 0.8416];
const MOVEMENT_CUTS: [f64; 3] = [0.0, 0.6745, 1.2816];
const P_LIGHT_GREEN: f64 = 0.3;
const P_VEHICLE: f64 = 0.6;

fn level(score: f64, cuts: &[f64]) -> usize {
    cuts.iter().take_while(|&&c| score > c).count()
}

/// Extent of object positions at the pause, in degrees.
const FIELD_HALF_WIDTH: f64 = 38.0;
const FIELD_BOTTOM: f64 = -12.0;
const FIELD_TOP: f64 = 10.0;

/// Gaze and boxes start this long before the analysis window.
const LEAD_IN_S: f64 = 1.0;

/// SplitMix64 finalizer, used to derive independent stream seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream(seed: u64, tag: u64, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(mix(seed ^ tag) ^ a) ^ b))
}

const TAG_SCENE: u64 = 0x5343_454E;
const TAG_PARTICIPANT: u64 = 0x5041_5254;
const TAG_GAZE: u64 = 0x4741_5A45;

fn scene_id(i: usize) -> String {
    format!("s{:02}", i + 1)
}

fn participant_id(i: usize) -> String {
    format!("p{:02}", i + 1)
}

fn contrast_level(c: Contrast) -> f64 {
    match c {
        Contrast::Low => 0.0,
        Contrast::Medium => 0.5,
        Contrast::High => 1.0,
    }
}

fn movement_level(m: Movement) -> f64 {
    match m {
        Movement::Static => 0.0,
        Movement::Slow => 1.0 / 3.0,
        Movement::Medium => 2.0 / 3.0,
        Movement::High => 1.0,
    }
}

fn speed_deg_s(m: Movement) -> f64 {
    match m {
        Movement::Static => 0.0,
        Movement::Slow => 0.6,
        Movement::Medium => 1.5,
        Movement::High => 3.0,
    }
}

/// Fixed linear salience of an object at the pause.
pub(crate) fn salience(p: &ObjectProperties, center: [f64; 2], w: &SalienceWeights) -> f64 {
    let dist = (center[0] - VANISHING_POINT[0]).hypot(center[1] - VANISHING_POINT[1]);
    w.vehicle * f64::from(u8::from(p.kind == ObjectKind::Vehicle))
        + w.relevance * f64::from(u8::from(p.relevance))
        + w.light_green * f64::from(u8::from(p.light_green))
        + w.contrast * contrast_level(p.contrast)
        + w.movement * movement_level(p.movement)
        + w.area_change * f64::from(u8::from(p.area_change))
        + w.proximity * dist
}

/// Four vertical target-area strips across the field of view.
fn strips() -> Vec<RegionPolygon> {
    (0..4)
        .map(|i| {
            let x0 = -40.0 + 20.0 * i as f64;
            RegionPolygon {
                region_id: format!("area{}", i + 1),
                polygon: vec![
                    [x0, -30.0],
                    [x0 + 20.0, -30.0],
                    [x0 + 20.0, 30.0],
                    [x0, 30.0],
                ],
            }
        })
        .collect()
}

pub(crate) struct SceneDraft {
    pub scene: SceneRecord,
    pub salience: Vec<f64>,
}

fn frame_time(pause: f64, k: usize, fr: f64) -> f64 {
    pause - k as f64 / fr
}

pub(crate) fn gen_scene(cfg: &GenConfig, index: usize) -> Result<SceneDraft> {
    let mut rng = stream(cfg.seed, TAG_SCENE, index as u64, 0);
    let fr = cfg.frame_rate;
    let pause = cfg.window_len + 2.0 + 20.0 * index as f64;
    let mut scene = SceneRecord::new(scene_id(index), pause);
    scene.window_len = cfg.window_len;
    scene.frame_rate = fr;
    scene.pixels_per_degree = cfg.pixels_per_degree;
    scene.vanishing_point = VANISHING_POINT;
    scene.regions = Some(strips());

    let k_draw = Normal::new(cfg.objects_mean, cfg.objects_sd.max(1e-12))
        .expect("validated spread")
        .sample(&mut rng);
    let tps = cfg.targets_per_scene;
    let n_targets = (((index + 1) as f64 * tps).floor() - (index as f64 * tps).floor()) as usize;
    let n_targets = n_targets.max(1);
    // A small draw is topped up so the target quota always fits.
    let n_objects = (k_draw.round().max(0.0) as usize)
        .max(cfg.min_objects)
        .max(n_targets);
    let targets = sample(&mut rng, n_objects, n_targets).into_vec();
    let unit = Normal::new(0.0, 1.0).expect("constant");
    let coupling = cfg.property_coupling;
    let independent = (1.0 - coupling * coupling).sqrt();
    let target_kind = if rng.random_bool(P_VEHICLE) {
        ObjectKind::Vehicle
    } else {
        ObjectKind::Pedestrian
    };

    let frames_total = ((cfg.window_len + LEAD_IN_S) * fr).round() as usize;
    let jitter = Normal::new(0.0, 0.03).expect("constant");
    let mut salience_of = Vec::with_capacity(n_objects);
    for o in 0..n_objects {
        let is_target = targets.contains(&o);
        let kind = if is_target {
            target_kind
        } else if rng.random_bool(P_VEHICLE) {
            ObjectKind::Vehicle
        } else {
            ObjectKind::Pedestrian
        };
        let conspicuity: f64 = unit.sample(&mut rng);
        let mut score = || coupling * conspicuity + independent * unit.sample(&mut rng);
        let relevance = score() > RELEVANT_CUT;
        let contrast = Contrast::ALL[level(score(), &CONTRAST_CUTS)];
        let movement = Movement::ALL[level(score(), &MOVEMENT_CUTS)];
        let light_green = rng.random_bool(P_LIGHT_GREEN);
        let height = match kind {
            ObjectKind::Pedestrian => rng.random_range(1.2..4.0),
            ObjectKind::Vehicle => rng.random_range(1.5..5.0),
        };
        let width = match kind {
            ObjectKind::Pedestrian => 0.45 * height,
            ObjectKind::Vehicle => 1.6 * height,
        };
        let end = [
            rng.random_range(-FIELD_HALF_WIDTH..FIELD_HALF_WIDTH),
            rng.random_range(FIELD_BOTTOM..FIELD_TOP),
        ];
        let heading = rng.random_range(-0.35..0.35) + if rng.random_bool(0.5) { 0.0 } else { PI };
        let speed = speed_deg_s(movement);
        let vel = [speed * heading.cos(), speed * heading.sin()];
        let visible_from = if rng.random_bool(0.65) {
            f64::NEG_INFINITY
        } else {
            rng.random_range(pause - cfg.window_len..pause - 0.5)
        };
        let mut boxes = Vec::new();
        for k in (0..=frames_total).rev() {
            let t = frame_time(pause, k, fr);
            if t < visible_from {
                continue;
            }
            let dt = t - pause;
            let c = [
                end[0] + vel[0] * dt + jitter.sample(&mut rng),
                end[1] + vel[1] * dt + jitter.sample(&mut rng),
            ];
            boxes.push(TimedBox {
                t,
                bbox: BoundingBox::new(
                    c[0] - 0.5 * width,
                    c[1] - 0.5 * height,
                    c[0] + 0.5 * width,
                    c[1] + 0.5 * height,
                ),
            });
        }
        let mut track = ObjectTrack {
            object_id: format!("o{:02}", o + 1),
            is_target,
            boxes,
            properties: ObjectProperties {
                kind,
                relevance,
                light_green,
                contrast,
                movement,
                area_change: false,
            },
        };
        track.properties.area_change = derive_area_change(&track, &scene)?;
        let at_pause = track
            .boxes
            .last()
            .expect("visible at the pause")
            .bbox
            .center();
        salience_of.push(salience(
            &track.properties,
            at_pause,
            &cfg.attention.salience,
        ));
        scene.objects.push(track);
    }
    Ok(SceneDraft {
        scene,
        salience: salience_of,
    })
}

enum Target {
    Road([f64; 2]),
    Object { index: usize, offset: [f64; 2] },
}

struct Fixation {
    start: f64,
    end: f64,
    target: Target,
    blink: bool,
}

/// Box of `obj` at the frame time `t`, if visible.
fn box_at(obj: &ObjectTrack, t: f64, tol: f64) -> Option<&BoundingBox> {
    obj.box_near(t, tol)
}

fn gen_fixations(
    cfg: &GenConfig,
    draft: &SceneDraft,
    road_weight: f64,
    preference: &[f64],
    glancing: &[bool],
    rng: &mut ChaCha8Rng,
) -> Vec<Fixation> {
    let a = &cfg.attention;
    let scene = &draft.scene;
    let tol = scene.frame_tolerance();
    let start = scene.pause_time - cfg.window_len - LEAD_IN_S;
    let durations = LogNormal::new(a.fixation_median_ms.ln(), a.fixation_sigma).expect("validated");
    let road = Normal::new(0.0, 1.0).expect("constant");
    let saccade = a.saccade_frames as f64 / cfg.frame_rate;
    let mut out = Vec::new();
    let mut t = start;
    while t <= scene.pause_time {
        let visible: Vec<usize> = (0..scene.objects.len())
            .filter(|&i| box_at(&scene.objects[i], t, tol).is_some())
            .collect();
        let weights: Vec<f64> = visible
            .iter()
            .map(|&i| (a.beta * (draft.salience[i] + preference[i])).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let pick_road = rng.random_range(0.0..total + road_weight) >= total;
        let (target, ms) = if pick_road {
            let p = [
                VANISHING_POINT[0] + 1.5 * road.sample(rng),
                VANISHING_POINT[1] + road.sample(rng),
            ];
            (Target::Road(p), durations.sample(rng))
        } else {
            let mut u = rng.random_range(0.0..total);
            let mut chosen = *visible.last().expect("non-empty");
            for (&i, w) in visible.iter().zip(&weights) {
                if u < *w {
                    chosen = i;
                    break;
                }
                u -= w;
            }
            let ms = if glancing[chosen] {
                rng.random_range(40.0..110.0)
            } else {
                durations.sample(rng) * (a.duration_gain * draft.salience[chosen]).exp()
            };
            let b = box_at(&scene.objects[chosen], t, tol).expect("visible");
            let offset = [
                rng.random_range(-0.6..0.6) * (b.xmax - b.xmin),
                rng.random_range(-0.6..0.6) * (b.ymax - b.ymin),
            ];
            (
                Target::Object {
                    index: chosen,
                    offset,
                },
                ms,
            )
        };
        let fix_start = t + saccade;
        let fix_end = fix_start + ms / 1000.0;
        out.push(Fixation {
            start: fix_start,
            end: fix_end,
            target,
            blink: rng.random_bool(a.blink_rate),
        });
        t = fix_end;
    }
    out
}

fn gen_gaze(
    cfg: &GenConfig,
    draft: &SceneDraft,
    participant: usize,
    road_weight: f64,
    rng: &mut ChaCha8Rng,
) -> GazeTrack {
    let scene = &draft.scene;
    let preference_dist =
        Normal::new(0.0, cfg.attention.preference_sd.max(1e-12)).expect("validated");
    let preference: Vec<f64> = (0..scene.objects.len())
        .map(|_| preference_dist.sample(rng))
        .collect();
    // Whether this participant only ever glances at an object.
    let a = &cfg.attention;
    let glancing: Vec<bool> = draft
        .salience
        .iter()
        .map(|s| rng.random_bool(1.0 / (1.0 + (a.glance_gain * (s - a.glance_midpoint)).exp())))
        .collect();
    let fixations = gen_fixations(cfg, draft, road_weight, &preference, &glancing, rng);
    let noise = Normal::new(0.0, cfg.attention.gaze_noise_deg.max(1e-12)).expect("validated");
    let tol = scene.frame_tolerance();
    let fr = cfg.frame_rate;
    let frames_total = ((cfg.window_len + LEAD_IN_S) * fr).round() as usize;

    let point_of = |f: &Fixation, t: f64| -> [f64; 2] {
        match &f.target {
            Target::Road(p) => *p,
            Target::Object { index, offset } => {
                let obj = &scene.objects[*index];
                let b = box_at(obj, t, tol)
                    .or_else(|| obj.boxes.last().map(|b| &b.bbox))
                    .expect("objects have boxes");
                let c = b.center();
                [c[0] + offset[0], c[1] + offset[1]]
            }
        }
    };

    let mut samples = Vec::with_capacity(frames_total + 1);
    let mut fi = 0;
    for k in (0..=frames_total).rev() {
        let t = frame_time(scene.pause_time, k, fr);
        while fi + 1 < fixations.len() && fixations[fi].end <= t {
            fi += 1;
        }
        let f = &fixations[fi];
        let (p, valid) = if t < f.start && fi > 0 {
            // Saccade: straight line from the previous fixation.
            let prev = &fixations[fi - 1];
            let from = point_of(prev, prev.end);
            let to = point_of(f, f.start);
            let span = f.start - prev.end;
            let s = if span > 0.0 {
                ((t - prev.end) / span).clamp(0.0, 1.0)
            } else {
                1.0
            };
            (
                [
                    from[0] + s * (to[0] - from[0]),
                    from[1] + s * (to[1] - from[1]),
                ],
                true,
            )
        } else {
            let blinking = f.blink && t < f.start + 0.1;
            (point_of(f, t), !blinking)
        };
        let (x, y) = if valid {
            (p[0] + noise.sample(rng), p[1] + noise.sample(rng))
        } else {
            (0.0, 0.0)
        };
        samples.push(GazeSample { t, x, y, valid });
    }
    GazeTrack {
        participant_id: participant_id(participant),
        scene_id: scene.scene_id.clone(),
        samples,
    }
}

struct Participant {
    road_weight: f64,
    capacity: Option<usize>,
}

impl Participant {
    fn draw(cfg: &GenConfig, index: usize) -> Self {
        let mut rng = stream(cfg.seed, TAG_PARTICIPANT, index as u64, 0);
        let unit = Normal::new(0.0, 1.0).expect("constant");
        let road_weight = cfg.attention.road_weight
            * (cfg.attention.road_weight_sd * unit.sample(&mut rng)).exp();
        let spread = cfg.oracle.capacity_sd * unit.sample(&mut rng);
        let capacity = cfg
            .oracle
            .capacity
            .map(|n| (n as f64 + spread).round().max(1.0) as usize);
        Self {
            road_weight,
            capacity,
        }
    }
}

/// Oracle rows for one participant in one scene, in object order.
fn oracle_rows(
    cfg: &GenConfig,
    draft: &SceneDraft,
    gaze: &GazeTrack,
    capacity: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Vec<OracleRow> {
    let o = &cfg.oracle;
    let scene = &draft.scene;
    let (_, t_end) = crate::scene::window_of(scene);
    let noise = Normal::new(0.0, o.strength_noise.max(1e-12)).expect("validated");
    struct Pre {
        fixated_ms: f64,
        dwell_s: f64,
        fixated: bool,
        strength: f64,
    }
    let pre: Vec<Pre> = scene
        .objects
        .iter()
        .enumerate()
        .map(|(i, obj)| {
            let frames = covisible_frames(gaze, obj, scene);
            let fixated_ms = fixation_score_ms(&frames, o.fixation_radius_deg, scene.frame_rate);
            let within: Vec<f64> = frames
                .iter()
                .filter(|f| f.distance < o.fixation_radius_deg)
                .map(|f| f.t)
                .collect();
            let dwell_s = (within.len() as f64 / scene.frame_rate).min(scene.window_len);
            let elapse = within.last().map_or(scene.window_len, |t| t_end - t);
            let strength = o.salience_weight * draft.salience[i]
                + o.recency_weight * (-elapse / o.recency_scale_s).exp()
                + o.dwell_weight * dwell_s.min(3.0) / 3.0
                + noise.sample(rng);
            Pre {
                fixated_ms,
                dwell_s,
                fixated: fixated_ms > o.fixation_ms,
                strength,
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..pre.len()).collect();
    order.sort_by(|&a, &b| pre[b].strength.total_cmp(&pre[a].strength).then(a.cmp(&b)));
    let mut rank = vec![0; pre.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    scene
        .objects
        .iter()
        .enumerate()
        .map(|(i, obj)| {
            let within_capacity = capacity.is_none_or(|n| rank[i] <= n);
            let pre_label = pre[i].fixated && within_capacity;
            let flipped = rng.random_bool(o.label_noise);
            OracleRow {
                participant: gaze.participant_id.clone(),
                scene: scene.scene_id.clone(),
                object: obj.object_id.clone(),
                is_target: obj.is_target,
                fixated_ms: pre[i].fixated_ms,
                dwell_s: pre[i].dwell_s,
                salience: draft.salience[i],
                strength: pre[i].strength,
                rank: rank[i],
                capacity,
                fixated: pre[i].fixated,
                pre_label,
                label: pre_label != flipped,
            }
        })
        .collect()
}

/// Generates a dataset and the oracle trace behind its labels.
pub fn gen_dataset(cfg: &GenConfig) -> Result<(Dataset, OracleTrace)> {
    cfg.validate()?;
    let drafts: Vec<SceneDraft> = (0..cfg.n_scenes)
        .into_par_iter()
        .map(|i| gen_scene(cfg, i))
        .collect::<Result<_>>()?;
    let participants: Vec<Participant> = (0..cfg.n_participants)
        .map(|p| Participant::draw(cfg, p))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cfg.n_participants)
        .flat_map(|p| (0..cfg.n_scenes).map(move |s| (p, s)))
        .collect();
    let results: Vec<(GazeTrack, Vec<OracleRow>)> = jobs
        .par_iter()
        .map(|&(p, s)| {
            let mut rng = stream(cfg.seed, TAG_GAZE, s as u64, p as u64);
            let who = &participants[p];
            let gaze = gen_gaze(cfg, &drafts[s], p, who.road_weight, &mut rng);
            let rows = oracle_rows(cfg, &drafts[s], &gaze, who.capacity, &mut rng);
            (gaze, rows)
        })
        .collect();

    let mut gaze = Vec::with_capacity(results.len());
    let mut trace = Vec::new();
    let mut labels = Vec::new();
    for (g, rows) in results {
        for r in &rows {
            if r.is_target {
                labels.push(AwarenessLabel {
                    participant_id: r.participant.clone(),
                    scene_id: r.scene.clone(),
                    object_id: r.object.clone(),
                    aware: r.label,
                });
            }
        }
        trace.extend(rows);
        gaze.push(g);
    }
    let ds = Dataset {
        scenes: drafts.into_iter().map(|d| d.scene).collect(),
        gaze,
        labels,
    };
    ds.validate()?;
    Ok((ds, OracleTrace { rows: trace }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ() {
        let a: u64 = stream(1, TAG_SCENE, 0, 0).random();
        let b: u64 = stream(1, TAG_SCENE, 1, 0).random();
        let c: u64 = stream(2, TAG_SCENE, 0, 0).random();
        assert!(a != b && a != c);
    }

    #[test]
    fn target_counts_alternate() {
        let cfg = GenConfig {
            n_participants: 1,
            ..GenConfig::default()
        };
        let counts: Vec<usize> = (0..4)
            .map(|i| {
                gen_scene(&cfg, i)
                    .unwrap()
                    .scene
                    .objects
                    .iter()
                    .filter(|o| o.is_target)
                    .count()
            })
            .collect();
        for (i, c) in counts.iter().enumerate() {
            let planned = if i % 2 == 0 { 3 } else { 4 };
            let k = gen_scene(&cfg, i).unwrap().scene.objects.len();
            assert_eq!(*c, planned.min(k));
        }
    }

    #[test]
    fn area_change_matches_regions() {
        let cfg = GenConfig::default();
        for i in 0..4 {
            let d = gen_scene(&cfg, i).unwrap();
            for o in &d.scene.objects {
                assert_eq!(
                    o.properties.area_change,
                    derive_area_change(o, &d.scene).unwrap()
                );
            }
        }
    }

    #[test]
    fn gaze_is_on_the_frame_grid() {
        let cfg = GenConfig {
            n_scenes: 1,
            n_participants: 2,
            ..GenConfig::default()
        };
        let (ds, _) = gen_dataset(&cfg).unwrap();
        let scene = &ds.scenes[0];
        for g in &ds.gaze {
            let last = g.samples.last().unwrap();
            assert_eq!(last.t, scene.pause_time);
            assert_eq!(g.samples.len(), 661);
        }
    }
}
