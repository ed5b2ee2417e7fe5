use crate::scene::{BoundingBox, GazeTrack, ObjectTrack, RegionPolygon, SceneRecord};

/// Distance from a gaze point to the nearest edge of a box; zero on or inside it.
pub fn gaze_box_distance(g: [f64; 2], b: &BoundingBox) -> f64 {
    let dx = (b.xmin - g[0]).max(0.0).max(g[0] - b.xmax);
    let dy = (b.ymin - g[1]).max(0.0).max(g[1] - b.ymax);
    dx.hypot(dy)
}

/// A window frame at which gaze is valid and the object has a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoFrame {
    pub t: f64,
    pub distance: f64,
}

/// Co-visible frames in chronological order. Each valid gaze sample inside
/// the window is paired with the object's box nearest in time, if that box
/// lies within half a frame period.
pub fn covisible_frames(gaze: &GazeTrack, obj: &ObjectTrack, scene: &SceneRecord) -> Vec<CoFrame> {
    let tol = scene.frame_tolerance();
    gaze.samples_in_window(scene)
        .filter(|s| s.valid)
        .filter_map(|s| {
            obj.box_near(s.t, tol).map(|b| CoFrame {
                t: s.t,
                distance: gaze_box_distance(s.point(), b),
            })
        })
        .collect()
}

/// Even-odd ray casting test.
pub fn point_in_polygon(p: [f64; 2], polygon: &[[f64; 2]]) -> bool {
    let n = polygon.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Index of the first region containing `p`.
pub fn region_of(p: [f64; 2], regions: &[RegionPolygon]) -> Option<usize> {
    regions.iter().position(|r| point_in_polygon(p, &r.polygon))
}
