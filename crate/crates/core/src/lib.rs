//! Angle-of-arrival estimation at an intelligent reflecting surface (IRS)
//! from signals observed at a single base-station antenna.
//!
//! Users repeat one symbol per block of L samples while the IRS cycles
//! through L fixed reflection patterns. Each block then becomes one
//! L-dimensional snapshot whose response to a user at angle θ is the virtual
//! steering vector `ā(θ)`, and MUSIC on those snapshots recovers the user
//! angles at the IRS even though the IRS→BS link is rank one.

pub mod channel;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod harness;
pub mod rng;
pub mod synthesis;

pub use error::{Error, Result};
