use crate::error::{Error, Result};
use crate::scene::SceneRecord;

/// Converts a pixel coordinate pair to degrees of visual angle.
pub fn px_to_deg(p: [f64; 2], pixels_per_degree: f64) -> Result<[f64; 2]> {
    check_calibration(pixels_per_degree)?;
    Ok([p[0] / pixels_per_degree, p[1] / pixels_per_degree])
}

pub fn deg_to_px(p: [f64; 2], pixels_per_degree: f64) -> Result<[f64; 2]> {
    check_calibration(pixels_per_degree)?;
    Ok([p[0] * pixels_per_degree, p[1] * pixels_per_degree])
}

fn check_calibration(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::Calibration(c))
    }
}

/// Analysis window `(t_start, t_end)` ending at the pause. A timestamp `t`
/// belongs to the window iff `t_start < t <= t_end`.
pub fn window_of(scene: &SceneRecord) -> (f64, f64) {
    (scene.pause_time - scene.window_len, scene.pause_time)
}
