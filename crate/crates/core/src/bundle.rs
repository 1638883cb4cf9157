//! Preprocessed game bundles: everything a session needs, per frame.
//!
//! On disk a bundle is a directory of plain-text tables plus `bundle.json`
//! metadata and the `config.toml` it was built with.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ability::{build_epv_maps, parse_epv_maps, write_epv_maps, AbilityError, DefenseTable, EpvMap, LeagueAverages, RegionPartition};
use crate::config::{Config, ConfigFileError};
use crate::gamestate::{parse_game_states, write_game_states, GameAnalyzer, GameStateFrame, TrackingStore};
use crate::gaze::{apply_gaze, GazeSessionState};
use crate::geometry::BoundingBox;
use crate::ingest::{
    self, check_identities, CourtSample, DefenseRecord, Detection, Entity, FrameIndex, IngestError, PlayerId, PoseKeypoints, Roster,
    SegmentationMask, ShotRecord,
};
use crate::overlay::{compose_frame, frame_anchors, AbilityContext, ComposedFrame, FrameInputs};
use crate::track::{parse_tracks, postprocess, write_tracks, TrackedBox};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_FRAME_SIZE: (u32, u32) = (1280, 720);

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: {message}")]
    Format { file: String, message: String },
    #[error("identity {0} is not in the roster")]
    UnknownIdentity(PlayerId),
    #[error("bundle has no frames")]
    Empty,
    #[error(transparent)]
    Ability(#[from] AbilityError),
    #[error(transparent)]
    Config(#[from] ConfigFileError),
}

impl BundleError {
    /// Bad inputs, as opposed to I/O failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, BundleError::Io { .. })
    }

    fn format(file: &str, e: impl std::fmt::Display) -> Self {
        BundleError::Format {
            file: file.to_owned(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub format_version: u32,
    pub game_id: String,
    pub frame_rate: f64,
    pub frame_count: u32,
    pub width: u32,
    pub height: u32,
    /// Video file name inside the bundle directory, if any.
    pub video: Option<String>,
    pub league: LeagueAverages,
}

/// Raw inputs for [`preprocess`].
#[derive(Debug, Clone, Default)]
pub struct PreprocessInputs {
    pub game_id: String,
    pub detections: Vec<Detection>,
    pub tracking: Vec<CourtSample>,
    pub masks: Vec<SegmentationMask>,
    pub keypoints: Vec<PoseKeypoints>,
    pub shots: Vec<ShotRecord>,
    pub defense: Vec<DefenseRecord>,
    pub roster: Roster,
    /// Defaults to the built-in partition.
    pub partition: Option<RegionPartition>,
    /// Used when there are no masks to take the size from.
    pub frame_size: Option<(u32, u32)>,
    pub video: Option<String>,
}

#[derive(Debug, Clone)]
pub struct GameBundle {
    pub meta: BundleMeta,
    pub config: Config,
    pub roster: Roster,
    pub tracks: Vec<TrackedBox>,
    pub states: Vec<GameStateFrame>,
    pub partition: RegionPartition,
    pub epv_maps: BTreeMap<PlayerId, EpvMap>,
    pub defense: DefenseTable,
    pub samples: Vec<CourtSample>,
    pub poses: Vec<PoseKeypoints>,
    pub masks: Vec<SegmentationMask>,
    index: FrameTables,
}

#[derive(Debug, Clone, Default)]
struct FrameTables {
    store: TrackingStore,
    boxes: Vec<BTreeMap<PlayerId, BoundingBox>>,
    poses: Vec<BTreeMap<PlayerId, PoseKeypoints>>,
    masks: BTreeMap<FrameIndex, usize>,
}

fn last_frame<T>(items: &[T], frame: impl Fn(&T) -> FrameIndex) -> Option<FrameIndex> {
    items.iter().map(frame).max()
}

/// Track, analyze and tabulate a game.
pub fn preprocess(inputs: PreprocessInputs, cfg: &Config) -> Result<GameBundle, BundleError> {
    cfg.validate()?;
    let roster = inputs.roster;
    check_identities(&inputs.detections, &roster).map_err(BundleError::UnknownIdentity)?;
    for s in &inputs.tracking {
        if let Entity::Player(p) = &s.entity {
            if !roster.contains(p) {
                return Err(BundleError::UnknownIdentity(p.clone()));
            }
        }
    }
    let tracks = postprocess(&inputs.detections, &cfg.matcher);
    let partition = inputs.partition.unwrap_or_else(RegionPartition::nba_default);
    let epv_maps = build_epv_maps(&inputs.shots, &partition)?;
    let league = LeagueAverages::from_shots(&inputs.shots, &partition)?;

    let frame_count = [
        last_frame(&tracks, |t| t.frame),
        last_frame(&inputs.tracking, |s| s.frame),
        last_frame(&inputs.masks, |m| m.frame),
    ]
    .into_iter()
    .flatten()
    .max()
    .map(|f| f + 1)
    .ok_or(BundleError::Empty)?;

    let (width, height) = inputs
        .masks
        .first()
        .map(|m| (m.width, m.height))
        .or(inputs.frame_size)
        .unwrap_or(DEFAULT_FRAME_SIZE);

    let store = TrackingStore::from_samples(&inputs.tracking);
    let states = {
        let analyzer = GameAnalyzer::new(&store, &roster, cfg.game_state);
        (0..frame_count).map(|f| analyzer.analyze(f)).collect()
    };
    let meta = BundleMeta {
        format_version: FORMAT_VERSION,
        game_id: inputs.game_id,
        frame_rate: cfg.game_state.frame_rate,
        frame_count,
        width,
        height,
        video: inputs.video,
        league,
    };
    Ok(GameBundle::assemble(
        meta,
        *cfg,
        roster,
        tracks,
        states,
        partition,
        epv_maps,
        DefenseTable::from_records(&inputs.defense),
        inputs.tracking,
        inputs.keypoints,
        inputs.masks,
    ))
}

const FILES: [&str; 11] = [
    "bundle.json",
    "config.toml",
    "tracks.csv",
    "gamestate.csv",
    "epvmap.csv",
    "defense.csv",
    "roster.csv",
    "tracking.csv",
    "keypoints.csv",
    "masks.rle",
    "partition.csv",
];

impl GameBundle {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        meta: BundleMeta,
        config: Config,
        roster: Roster,
        tracks: Vec<TrackedBox>,
        states: Vec<GameStateFrame>,
        partition: RegionPartition,
        epv_maps: BTreeMap<PlayerId, EpvMap>,
        defense: DefenseTable,
        samples: Vec<CourtSample>,
        poses: Vec<PoseKeypoints>,
        masks: Vec<SegmentationMask>,
    ) -> Self {
        let n = meta.frame_count as usize;
        let mut index = FrameTables {
            store: TrackingStore::from_samples(&samples),
            boxes: vec![BTreeMap::new(); n],
            poses: vec![BTreeMap::new(); n],
            masks: BTreeMap::new(),
        };
        for t in &tracks {
            if let Some(m) = index.boxes.get_mut(t.frame as usize) {
                m.insert(t.identity.clone(), t.bbox);
            }
        }
        for p in &poses {
            if let Some(m) = index.poses.get_mut(p.frame as usize) {
                m.insert(p.player.clone(), p.clone());
            }
        }
        for (i, m) in masks.iter().enumerate() {
            index.masks.insert(m.frame, i);
        }
        Self {
            meta,
            config,
            roster,
            tracks,
            states,
            partition,
            epv_maps,
            defense,
            samples,
            poses,
            masks,
            index,
        }
    }

    pub fn frame_count(&self) -> u32 {
        self.meta.frame_count
    }

    pub fn frame_rate(&self) -> f64 {
        self.meta.frame_rate
    }

    /// Presentation time of a frame on the video clock.
    pub fn frame_time(&self, frame: FrameIndex) -> f64 {
        frame as f64 / self.meta.frame_rate
    }

    pub fn boxes_at(&self, frame: FrameIndex) -> &BTreeMap<PlayerId, BoundingBox> {
        static EMPTY: BTreeMap<PlayerId, BoundingBox> = BTreeMap::new();
        self.index.boxes.get(frame as usize).unwrap_or(&EMPTY)
    }

    pub fn poses_at(&self, frame: FrameIndex) -> Option<&BTreeMap<PlayerId, PoseKeypoints>> {
        self.index.poses.get(frame as usize).filter(|m| !m.is_empty())
    }

    pub fn mask_at(&self, frame: FrameIndex) -> Option<&SegmentationMask> {
        self.index.masks.get(&frame).map(|i| &self.masks[*i])
    }

    pub fn state_at(&self, frame: FrameIndex) -> Option<&GameStateFrame> {
        self.states.get(frame as usize)
    }

    pub fn tracking(&self) -> &TrackingStore {
        &self.index.store
    }

    pub fn ability(&self) -> AbilityContext<'_> {
        AbilityContext {
            partition: &self.partition,
            epv_maps: &self.epv_maps,
            league: &self.meta.league,
            defense: &self.defense,
        }
    }

    /// Compose one frame, with gaze effects from `gaze` at the frame's
    /// presentation time when given.
    pub fn render_frame(&self, frame: FrameIndex, gaze: Option<&GazeSessionState>, cfg: &Config) -> ComposedFrame {
        let empty;
        let state = match self.state_at(frame) {
            Some(s) => s,
            None => {
                empty = GameStateFrame::from_parts(frame, None, None, None, BTreeSet::new(), BTreeSet::new(), &self.roster);
                &empty
            }
        };
        let overlay = cfg.overlay();
        let boxes = self.boxes_at(frame);
        let poses = self.poses_at(frame);
        let gaze_out = gaze.map(|g| {
            let anchors = frame_anchors(boxes, poses, &overlay);
            let open = anchors
                .into_iter()
                .filter(|(p, _)| state.open_players.contains(p))
                .collect();
            apply_gaze(&state.importance, g, self.frame_time(frame), &open, &cfg.gaze)
        });
        let inputs = FrameInputs {
            frame,
            boxes,
            poses,
            court: self.tracking().frame(frame),
            state,
            gaze: gaze_out.as_ref(),
        };
        compose_frame(&inputs, &self.ability(), &self.roster, &overlay)
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), BundleError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|source| BundleError::Io {
            path: dir.to_owned(),
            source,
        })?;
        let meta = serde_json::to_string_pretty(&self.meta).expect("metadata serializes") + "\n";
        let contents = [
            meta,
            self.config.to_toml(),
            write_tracks(&self.tracks),
            write_game_states(&self.states),
            write_epv_maps(self.epv_maps.values()),
            ingest::write_defense(&self.defense.records()),
            ingest::write_roster(&self.roster),
            ingest::write_tracking(&self.samples),
            ingest::write_keypoints(&self.poses),
            ingest::write_masks(&self.masks),
            self.partition.write(),
        ];
        for (name, text) in FILES.iter().zip(contents) {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|source| BundleError::Io { path, source })?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self, BundleError> {
        let dir = dir.as_ref();
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| BundleError::Io { path, source })
        };
        let ingest_err = |name: &'static str| move |e: IngestError| BundleError::format(name, e);

        let meta: BundleMeta = serde_json::from_str(&read("bundle.json")?).map_err(|e| BundleError::format("bundle.json", e))?;
        if meta.format_version != FORMAT_VERSION {
            return Err(BundleError::format(
                "bundle.json",
                format!("unsupported format version {}", meta.format_version),
            ));
        }
        let config = Config::from_toml(&read("config.toml")?)?;
        let roster = ingest::parse_roster(&read("roster.csv")?).map_err(ingest_err("roster.csv"))?;
        let tracks = parse_tracks(&read("tracks.csv")?).map_err(|e| BundleError::format("tracks.csv", e))?;
        let mut states = parse_game_states(&read("gamestate.csv")?, &roster).map_err(|e| BundleError::format("gamestate.csv", e))?;
        states.sort_by_key(|s| s.frame);
        if states.len() != meta.frame_count as usize || states.iter().enumerate().any(|(i, s)| s.frame as usize != i) {
            return Err(BundleError::format("gamestate.csv", "must cover every frame exactly once"));
        }
        let partition = RegionPartition::parse(&read("partition.csv")?).map_err(|e| BundleError::format("partition.csv", e))?;
        let epv_maps = parse_epv_maps(&read("epvmap.csv")?).map_err(|e| BundleError::format("epvmap.csv", e))?;
        let defense = DefenseTable::from_records(&ingest::parse_defense(&read("defense.csv")?).map_err(ingest_err("defense.csv"))?);
        let samples = ingest::parse_tracking(&read("tracking.csv")?, ingest::DEFAULT_OUT_OF_BOUNDS_MARGIN_FT)
            .map_err(ingest_err("tracking.csv"))?;
        let poses = ingest::parse_keypoints(&read("keypoints.csv")?).map_err(ingest_err("keypoints.csv"))?;
        let masks = ingest::parse_masks(&read("masks.rle")?).map_err(ingest_err("masks.rle"))?;
        Ok(Self::assemble(
            meta, config, roster, tracks, states, partition, epv_maps, defense, samples, poses, masks,
        ))
    }

    /// Path of the pass-through video, if the bundle has one.
    pub fn video_path(&self, dir: impl AsRef<Path>) -> Option<PathBuf> {
        self.meta.video.as_ref().map(|v| dir.as_ref().join(v))
    }
}
