use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{covisible_frames, CoFrame};
use crate::scene::{Dataset, GazeTrack, ObjectTrack, SceneRecord};

/// Grid points per sweep, before the nominal value is inserted.
pub const SWEEP_POINTS: usize = 200;
/// Radius sweep bounds in degrees.
pub const RADIUS_RANGE: (f64, f64) = (0.1, 30.0);
/// Duration sweep bounds in milliseconds.
pub const DURATION_RANGE: (f64, f64) = (10.0, 3000.0);

/// Aware iff gaze stays within `radius_deg` of the object for a contiguous
/// run lasting strictly longer than `duration_ms`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixationRule {
    pub radius_deg: f64,
    pub duration_ms: f64,
}

impl Default for FixationRule {
    fn default() -> Self {
        Self {
            radius_deg: 2.5,
            duration_ms: 120.0,
        }
    }
}

impl FixationRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_deg.is_finite() && self.radius_deg > 0.0) {
            return Err(Error::invalid("radius_deg", "must be positive"));
        }
        if !(self.duration_ms.is_finite() && self.duration_ms >= 0.0) {
            return Err(Error::invalid("duration_ms", "must be non-negative"));
        }
        Ok(())
    }
}

/// Frames in the longest run of consecutive co-visible frames closer than
/// `radius_deg`. Frames further apart than 1.5 periods break a run.
pub fn longest_run_frames(frames: &[CoFrame], radius_deg: f64, frame_rate: f64) -> usize {
    let max_gap = 1.5 / frame_rate;
    let mut best = 0;
    let mut run = 0;
    let mut prev_t = f64::NEG_INFINITY;
    for f in frames {
        if f.distance < radius_deg {
            run = if f.t - prev_t <= max_gap { run + 1 } else { 1 };
            prev_t = f.t;
            best = best.max(run);
        } else {
            run = 0;
            prev_t = f64::NEG_INFINITY;
        }
    }
    best
}

/// Duration of the longest qualifying run in milliseconds.
pub fn fixation_score_ms(frames: &[CoFrame], radius_deg: f64, frame_rate: f64) -> f64 {
    longest_run_frames(frames, radius_deg, frame_rate) as f64 * 1000.0 / frame_rate
}

pub fn baseline1_predict(
    gaze: &GazeTrack,
    obj: &ObjectTrack,
    scene: &SceneRecord,
    rule: &FixationRule,
) -> bool {
    let frames = covisible_frames(gaze, obj, scene);
    fixation_score_ms(&frames, rule.radius_deg, scene.frame_rate) > rule.duration_ms
}

/// Shortest run length (frames) lasting strictly longer than `duration_ms`.
fn required_frames(duration_ms: f64, frame_rate: f64) -> usize {
    let lasts = |n: usize| n as f64 * 1000.0 / frame_rate > duration_ms;
    let mut n = ((duration_ms * frame_rate / 1000.0).floor().max(0.0) as usize).max(1);
    while n > 1 && lasts(n - 1) {
        n -= 1;
    }
    while !lasts(n) {
        n += 1;
    }
    n
}

/// Smallest radius such that some run of `len` frames is fully inside it:
/// the minimum over contiguous windows of the maximum distance. Infinite if
/// no such run exists.
fn critical_radius(frames: &[CoFrame], len: usize, frame_rate: f64) -> f64 {
    let max_gap = 1.5 / frame_rate;
    let mut best = f64::INFINITY;
    let mut start = 0;
    for end in 0..frames.len() {
        if end > start && frames[end].t - frames[end - 1].t > max_gap {
            start = end;
        }
        if end + 1 - start >= len {
            let worst = frames[end + 1 - len..=end]
                .iter()
                .map(|f| f.distance)
                .fold(f64::NEG_INFINITY, f64::max);
            best = best.min(worst);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Vary the radius at the nominal duration.
    Radius,
    /// Vary the duration at the nominal radius.
    Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRoc {
    pub mode: SweepMode,
    pub rule: FixationRule,
    pub points: Vec<SweepPoint>,
    /// Trapezoidal area of the points closed with (0,0) and (1,1).
    pub auc: f64,
}

fn geometric_grid(lo: f64, hi: f64, n: usize, nominal: f64) -> Vec<f64> {
    let ratio = (hi / lo).ln();
    let mut g: Vec<f64> = (0..n)
        .map(|i| lo * (ratio * i as f64 / (n - 1) as f64).exp())
        .collect();
    g.push(nominal);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Fixation-rule ROC over every labeled target, sweeping one rule parameter
/// on a geometric grid that includes the nominal value.
pub fn baseline1_roc(ds: &Dataset, mode: SweepMode, rule: &FixationRule) -> Result<SweepRoc> {
    rule.validate()?;
    struct Case {
        aware: bool,
        frames: Vec<CoFrame>,
        frame_rate: f64,
    }
    let cases: Vec<Case> = ds
        .labels
        .par_iter()
        .map(|l| {
            let scene = ds
                .scene(&l.scene_id)
                .ok_or_else(|| Error::Integrity(format!("unknown scene {}", l.scene_id)))?;
            let obj = scene.object(&l.object_id).ok_or_else(|| {
                Error::Integrity(format!("unknown object {} in {}", l.object_id, l.scene_id))
            })?;
            let frames = ds
                .gaze_track(&l.participant_id, &l.scene_id)
                .map(|g| covisible_frames(g, obj, scene))
                .unwrap_or_default();
            Ok(Case {
                aware: l.aware,
                frames,
                frame_rate: scene.frame_rate,
            })
        })
        .collect::<Result<_>>()?;
    let pos = cases.iter().filter(|c| c.aware).count();
    let neg = cases.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }

    // Each case reduces to one number compared against the swept parameter.
    let (grid, values): (Vec<f64>, Vec<f64>) = match mode {
        SweepMode::Radius => (
            geometric_grid(
                RADIUS_RANGE.0,
                RADIUS_RANGE.1,
                SWEEP_POINTS,
                rule.radius_deg,
            ),
            cases
                .iter()
                .map(|c| {
                    let len = required_frames(rule.duration_ms, c.frame_rate);
                    critical_radius(&c.frames, len, c.frame_rate)
                })
                .collect(),
        ),
        SweepMode::Duration => (
            geometric_grid(
                DURATION_RANGE.0,
                DURATION_RANGE.1,
                SWEEP_POINTS,
                rule.duration_ms,
            ),
            cases
                .iter()
                .map(|c| fixation_score_ms(&c.frames, rule.radius_deg, c.frame_rate))
                .collect(),
        ),
    };
    let points = grid
        .iter()
        .map(|&param| {
            let (mut tp, mut fp) = (0usize, 0usize);
            for (c, &v) in cases.iter().zip(&values) {
                let aware = match mode {
                    SweepMode::Radius => v < param,
                    SweepMode::Duration => v > param,
                };
                if aware {
                    if c.aware {
                        tp += 1;
                    } else {
                        fp += 1;
                    }
                }
            }
            SweepPoint {
                parameter: param,
                fpr: fp as f64 / neg as f64,
                tpr: tp as f64 / pos as f64,
            }
        })
        .collect();
    Ok(close(mode, *rule, points))
}

impl SweepRoc {
    /// `(fpr, tpr)` of every sweep point plus (0,0) and (1,1), sorted.
    pub fn curve(&self) -> Vec<(f64, f64)> {
        let mut curve: Vec<(f64, f64)> = self.points.iter().map(|p| (p.fpr, p.tpr)).collect();
        curve.push((0.0, 0.0));
        curve.push((1.0, 1.0));
        curve.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        curve
    }

    /// One row per sweep point, in parameter order.
    pub fn write_csv(&self, out: impl std::io::Write) -> Result<()> {
        let name = match self.mode {
            SweepMode::Radius => "radius_deg",
            SweepMode::Duration => "duration_ms",
        };
        let mut w = csv::Writer::from_writer(out);
        w.write_record([name, "fpr", "tpr"])?;
        for p in &self.points {
            w.write_record([
                p.parameter.to_string(),
                p.fpr.to_string(),
                p.tpr.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn close(mode: SweepMode, rule: FixationRule, points: Vec<SweepPoint>) -> SweepRoc {
    let mut roc = SweepRoc {
        mode,
        rule,
        points,
        auc: 0.0,
    };
    roc.auc = roc
        .curve()
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5)
        .sum();
    roc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(distances: &[f64], fr: f64) -> Vec<CoFrame> {
        distances
            .iter()
            .enumerate()
            .map(|(i, &d)| CoFrame {
                t: i as f64 / fr,
                distance: d,
            })
            .collect()
    }

    #[test]
    fn seven_frames_fail_eight_pass() {
        let fr = 60.0;
        let seven = run(&[1.0; 7], fr);
        let eight = run(&[1.0; 8], fr);
        assert!(fixation_score_ms(&seven, 2.5, fr) <= 120.0);
        assert!(fixation_score_ms(&eight, 2.5, fr) > 120.0);
    }

    #[test]
    fn exact_duration_is_not_enough() {
        // 6 frames at 50 Hz last exactly 120 ms.
        let f = run(&[0.0; 6], 50.0);
        assert_eq!(fixation_score_ms(&f, 2.5, 50.0), 120.0);
        assert_eq!(required_frames(120.0, 50.0), 7);
        assert_eq!(required_frames(120.0, 60.0), 8);
    }

    #[test]
    fn far_frame_breaks_run() {
        let f = run(&[1.0, 1.0, 1.0, 3.0, 1.0, 1.0], 60.0);
        assert_eq!(longest_run_frames(&f, 2.5, 60.0), 3);
        assert_eq!(longest_run_frames(&f, 3.5, 60.0), 6);
    }

    #[test]
    fn time_gap_breaks_run() {
        let mut f = run(&[1.0; 6], 60.0);
        for c in f.iter_mut().skip(3) {
            c.t += 2.0 / 60.0;
        }
        assert_eq!(longest_run_frames(&f, 2.5, 60.0), 3);
    }

    #[test]
    fn critical_radius_matches_rule() {
        let f = run(
            &[0.5, 3.0, 1.0, 1.2, 0.9, 1.1, 2.0, 0.7, 1.5, 1.0, 4.0],
            60.0,
        );
        for len in 1..=f.len() {
            let r = critical_radius(&f, len, 60.0);
            if r.is_finite() {
                assert!(longest_run_frames(&f, r + 1e-12, 60.0) >= len);
                assert!(longest_run_frames(&f, r, 60.0) < len);
            }
        }
    }

    #[test]
    fn grid_holds_nominal() {
        let g = geometric_grid(0.1, 30.0, SWEEP_POINTS, 2.5);
        assert!(g.contains(&2.5));
        assert_eq!(g.len(), SWEEP_POINTS + 1);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
