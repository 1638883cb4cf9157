//! TOML configuration carrying every tunable, with defaults equal to the
//! published constants.
//!
//! ```toml
//! [matcher]
//! t_high = 0.6
//! t_low = 0.1
//! iou_match_min = 0.3
//! max_gap = 4
//! smooth_window = 5
//! assignment = "greedy"      # or "hungarian"
//!
//! [game_state]
//! possession_window = 0.5    # s
//! lookahead = 1.8            # s
//! open_distance = 6.0        # ft
//! handler_distance = 3.0     # ft
//! guard_distance_max = 12.0  # ft
//! frame_rate = 30.0
//!
//! [gaze]
//! dwell_trigger = 0.25
//! linger = 1.8
//! filter_radius = 650.0
//! dwell_grace = 0.1
//! center_smoothing = 0.85
//! hitbox_margin = 10.0
//!
//! [overlay]
//! ring_inner_px = 18.0
//! ring_outer_px = 48.0
//! reference_height_px = 180.0
//! # ... see OverlayConfig
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gamestate::GameStateConfig;
use crate::gaze::GazeConfig;
use crate::overlay::OverlayConfig;
use crate::track::MatcherConfig;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub matcher: MatcherConfig,
    pub game_state: GameStateConfig,
    pub gaze: GazeConfig,
    pub overlay: OverlayConfig,
}

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error(transparent)]
    Matcher(#[from] crate::track::ConfigError),
    #[error(transparent)]
    GameState(#[from] crate::gamestate::GameStateError),
    #[error(transparent)]
    Gaze(#[from] crate::gaze::GazeError),
    #[error(transparent)]
    Overlay(#[from] crate::overlay::OverlayConfigError),
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigFileError> {
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigFileError::Syntax(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigFileError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Overlay settings with values shared with the game state filled in.
    pub fn overlay(&self) -> OverlayConfig {
        OverlayConfig {
            guard_distance_max: self.game_state.guard_distance_max,
            ..self.overlay
        }
    }

    pub fn validate(&self) -> Result<(), ConfigFileError> {
        self.matcher.validate()?;
        self.game_state.validate()?;
        self.gaze.validate()?;
        self.overlay().validate()?;
        Ok(())
    }

    /// Layer a partial TOML document over this config.
    pub fn with_overrides(&self, text: &str) -> Result<Self, ConfigFileError> {
        if text.trim().is_empty() {
            return Ok(*self);
        }
        let syntax = |e: &dyn std::fmt::Display| ConfigFileError::Syntax(e.to_string());
        let mut base = toml::Table::try_from(self).map_err(|e| syntax(&e))?;
        let patch: toml::Table = text.parse().map_err(|e| syntax(&e))?;
        merge(&mut base, patch);
        let cfg: Config = base.try_into().map_err(|e| syntax(&e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn merge(base: &mut toml::Table, patch: toml::Table) {
    for (k, v) in patch {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(p)) => merge(b, p),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
