//! Scenes, object tracks, gaze tracks and awareness labels.
//!
//! All geometry is held in degrees of visual angle. Pixel-valued input is
//! converted at load time with the per-scene `pixels_per_degree` scalar.

mod calib;
mod io;
mod types;

pub use calib::{deg_to_px, px_to_deg, window_of};
pub use io::{load_dataset, write_dataset, Units};
pub use types::*;
