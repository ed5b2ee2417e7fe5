//! Oracles and property bodies shared by the integration tests and the
//! acceptance run.
#![allow(dead_code)]

pub mod features;
pub mod numeric;
pub mod props;
