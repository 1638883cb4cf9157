pub mod ability;
pub mod bundle;
pub mod config;
pub mod eval;
pub mod gamestate;
pub mod gaze;
pub mod geometry;
pub mod ingest;
pub mod overlay;
pub mod raster;
pub mod replay;
pub mod session;
pub mod synth;
pub mod wire;
pub mod track;
