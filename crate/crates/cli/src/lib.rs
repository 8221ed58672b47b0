//! Command layer for the mushroom-billiard laboratory: configuration,
//! parallel simulation driving, artifact writers and the acceptance suite.

pub mod config;
pub mod output;
pub mod parallel;
pub mod predict;
pub mod verify;
