use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hoopvis::ability::{build_epv_map, write_epv_maps, EpvMap, LeagueAverages, RegionPartition};
use hoopvis::bundle::{preprocess, GameBundle, PreprocessInputs};
use hoopvis::config::Config;
use hoopvis::eval::{evaluate_detections, evaluate_tracks, EvaluationReport};
use hoopvis::gaze::{load_gaze_trace, write_gaze_trace};
use hoopvis::geometry::Point;
use hoopvis::ingest::{self, IngestError, PlayerId};
use hoopvis::overlay::ColorRole;
use hoopvis::raster::palette;
use hoopvis::replay::{dump, replay};
use hoopvis::synth;
use hoopvis::track::{associate_all, high_cluster_only, interpolate_gaps, smooth, sort_tracks, MatcherConfig};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

fn require(path: &Path) -> Result<&Path, CliError> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::missing(path))
    }
}

fn load<'a, T>(path: &'a Path, f: impl FnOnce(&'a Path) -> Result<T, IngestError>) -> Result<T, CliError> {
    f(require(path)?).map_err(|e| match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Config from `--config`, else the given fallback file if it exists, else defaults.
pub fn resolve_config(flag: Option<&Path>, fallback: Option<&Path>) -> Result<Config, CliError> {
    match (flag, fallback) {
        (Some(p), _) => Ok(Config::load(require(p)?)?),
        (None, Some(p)) if p.is_file() => Ok(Config::load(p)?),
        _ => Ok(Config::default()),
    }
}

/// Raw input locations. Anything left unset is looked up in `input` under
/// its conventional name.
#[derive(Debug, Clone, Default)]
pub struct PreprocessPaths {
    pub input: Option<PathBuf>,
    pub detections: Option<PathBuf>,
    pub tracking: Option<PathBuf>,
    pub masks: Option<PathBuf>,
    pub keypoints: Option<PathBuf>,
    pub shots: Option<PathBuf>,
    pub defense: Option<PathBuf>,
    pub roster: Option<PathBuf>,
    pub partition: Option<PathBuf>,
    pub video: Option<PathBuf>,
}

impl PreprocessPaths {
    fn pick(&self, explicit: &Option<PathBuf>, name: &str) -> Result<PathBuf, CliError> {
        match (explicit, &self.input) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(dir)) => Ok(dir.join(name)),
            (None, None) => Err(CliError::Validation(format!("no input directory and no path for {name}"))),
        }
    }
}

pub fn cmd_preprocess(paths: &PreprocessPaths, game_id: Option<&str>, cfg: &Config, out: &Path) -> Result<GameBundle, CliError> {
    let detections = load(&paths.pick(&paths.detections, "detections.csv")?, ingest::load_detections)?;
    let tracking = load(&paths.pick(&paths.tracking, "tracking.csv")?, ingest::load_tracking)?;
    let masks = load(&paths.pick(&paths.masks, "masks.rle")?, ingest::load_masks)?;
    let shots = load(&paths.pick(&paths.shots, "shots.csv")?, ingest::load_shots)?;
    let defense = load(&paths.pick(&paths.defense, "defense.csv")?, ingest::load_defense)?;
    let roster = load(&paths.pick(&paths.roster, "roster.csv")?, ingest::load_roster)?;
    // optional: feet fall back to the box bottom, regions to the built-in partition
    let kp = paths.pick(&paths.keypoints, "keypoints.csv")?;
    let keypoints = if paths.keypoints.is_some() || kp.is_file() {
        load(&kp, ingest::load_keypoints)?
    } else {
        Vec::new()
    };
    let part = paths.pick(&paths.partition, "partition.csv")?;
    let partition = if paths.partition.is_some() || part.is_file() {
        let text = std::fs::read_to_string(require(&part)?).map_err(|e| CliError::io(&part, e))?;
        Some(RegionPartition::parse(&text)?)
    } else {
        None
    };
    let video = match &paths.video {
        Some(v) => {
            require(v)?;
            Some(file_name(v)?)
        }
        None => None,
    };
    let game_id = match game_id {
        Some(g) => g.to_owned(),
        None => paths
            .input
            .as_deref()
            .and_then(|d| d.file_name())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "game".into()),
    };
    let bundle = preprocess(
        PreprocessInputs {
            game_id,
            detections,
            tracking,
            masks,
            keypoints,
            shots,
            defense,
            roster,
            partition,
            frame_size: None,
            video,
        },
        cfg,
    )?;
    bundle.save(out)?;
    if let (Some(src), Some(name)) = (&paths.video, &bundle.meta.video) {
        let dst = out.join(name);
        std::fs::copy(src, &dst).map_err(|e| CliError::io(&dst, e))?;
    }
    Ok(bundle)
}

fn file_name(p: &Path) -> Result<String, CliError> {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or_else(|| CliError::Validation(format!("{}: not a file name", p.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageResult {
    pub stage: String,
    pub ap_50_95: f64,
    pub ap_50: f64,
    pub ap_75: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepTiming {
    pub step: String,
    pub ms_per_frame: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluateOutput {
    pub frames: u32,
    pub stages: Vec<StageResult>,
    pub timing: Vec<StepTiming>,
    /// Full report of the last stage.
    pub report: EvaluationReport,
}

fn stage(name: &str, r: &EvaluationReport) -> StageResult {
    StageResult {
        stage: name.into(),
        ap_50_95: r.ap_50_95,
        ap_50: r.ap_50,
        ap_75: r.ap_75,
    }
}

/// Score ready-made predictions against ground truth.
pub fn cmd_evaluate_predictions(predictions: &Path, ground_truth: &Path) -> Result<EvaluateOutput, CliError> {
    let gt = load(ground_truth, ingest::load_detections)?;
    let preds = load(predictions, ingest::load_detections)?;
    let report = evaluate_detections(&preds, &gt);
    Ok(EvaluateOutput {
        frames: frame_span(&gt),
        stages: vec![stage("Predictions", &report)],
        timing: Vec::new(),
        report,
    })
}

/// Run each post-processing step on raw detections and score the output
/// after every step.
pub fn cmd_evaluate_stages(detections: &Path, ground_truth: &Path, matcher: &MatcherConfig) -> Result<EvaluateOutput, CliError> {
    let gt = load(ground_truth, ingest::load_detections)?;
    let mut dets = load(detections, ingest::load_detections)?;
    ingest::sort_detections(&mut dets);
    let frames = frame_span(&dets).max(1);

    let baseline = high_cluster_only(&dets, matcher);
    let t0 = Instant::now();
    let assoc = associate_all(&dets, matcher);
    let t1 = Instant::now();
    let filled = interpolate_gaps(&assoc, matcher.max_gap);
    let t2 = Instant::now();
    let mut smoothed = smooth(&filled, matcher.smooth_window);
    sort_tracks(&mut smoothed);
    let t3 = Instant::now();

    let per_frame = |d: std::time::Duration| d.as_secs_f64() * 1000.0 / frames as f64;
    let report = evaluate_tracks(&smoothed, &gt);
    Ok(EvaluateOutput {
        frames,
        stages: vec![
            stage("Player Detection", &evaluate_tracks(&baseline, &gt)),
            stage("+ Association", &evaluate_tracks(&assoc, &gt)),
            stage("+ Interpolation", &evaluate_tracks(&filled, &gt)),
            stage("Post-Processing", &report),
        ],
        timing: vec![
            StepTiming {
                step: "Post-Processing".into(),
                ms_per_frame: per_frame(t3 - t0),
            },
            StepTiming {
                step: "  association".into(),
                ms_per_frame: per_frame(t1 - t0),
            },
            StepTiming {
                step: "  interpolation".into(),
                ms_per_frame: per_frame(t2 - t1),
            },
            StepTiming {
                step: "  smoothing".into(),
                ms_per_frame: per_frame(t3 - t2),
            },
        ],
        report,
    })
}

fn frame_span(dets: &[ingest::Detection]) -> u32 {
    let lo = dets.iter().map(|d| d.frame).min();
    let hi = dets.iter().map(|d| d.frame).max();
    match (lo, hi) {
        (Some(a), Some(b)) => b - a + 1,
        _ => 0,
    }
}

/// AP grid in percent with gains over the first stage, then the timing table.
pub fn format_evaluation(out: &EvaluateOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<18} {:>14} {:>14} {:>14}", "Step", "AP50:95", "AP50", "AP75");
    let base = &out.stages[0];
    for (i, st) in out.stages.iter().enumerate() {
        let cell = |v: f64, b: f64| {
            if i == 0 {
                format!("{:.1}", v * 100.0)
            } else {
                format!("{:.1} ({:+.1})", v * 100.0, (v - b) * 100.0)
            }
        };
        let _ = writeln!(
            s,
            "{:<18} {:>14} {:>14} {:>14}",
            st.stage,
            cell(st.ap_50_95, base.ap_50_95),
            cell(st.ap_50, base.ap_50),
            cell(st.ap_75, base.ap_75)
        );
    }
    if !out.report.unknown_identities.is_empty() {
        let ids: Vec<&str> = out.report.unknown_identities.iter().map(PlayerId::as_str).collect();
        let _ = writeln!(s, "identities not in ground truth: {}", ids.join(", "));
    }
    if !out.timing.is_empty() {
        let _ = writeln!(s, "\n{:<18} {:>10}", "Step", "Time (ms)");
        for t in &out.timing {
            let _ = writeln!(s, "{:<18} {:>10.3}", t.step, t.ms_per_frame);
        }
        let _ = writeln!(s, "({} frames)", out.frames);
    }
    s
}

pub const CHART_PX_PER_FT: u32 = 10;

/// Half-court heat map of one player's EPV, one color per region.
pub fn epv_chart(map: &EpvMap, partition: &RegionPartition) -> image::RgbImage {
    let k = CHART_PX_PER_FT;
    let (w, h) = (47 * k, 50 * k);
    let region_at = |px: u32, py: u32| {
        let p = Point::new((px as f64 + 0.5) / k as f64, (py as f64 + 0.5) / k as f64);
        partition.locate(p)
    };
    image::RgbImage::from_fn(w, h, |x, y| {
        let here = region_at(x, y).map(|r| &r.id);
        let edge = (x + 1 < w && region_at(x + 1, y).map(|r| &r.id) != here)
            || (y + 1 < h && region_at(x, y + 1).map(|r| &r.id) != here);
        if edge {
            return image::Rgb([20, 20, 20]);
        }
        let rgb = match region_at(x, y) {
            Some(r) if r.point_value > 0 => {
                let epv = map.regions.get(&r.id).map(|e| e.epv).unwrap_or(0.0);
                palette(ColorRole::Sequential(epv / 3.0))
            }
            _ => [110, 110, 110],
        };
        image::Rgb(rgb)
    })
}

/// Writes `epvmap.csv` and `epv_<player>.png` per map; returns the maps.
pub fn cmd_epvmap(shots: &Path, partition: Option<&Path>, player: Option<&str>, out: &Path) -> Result<Vec<EpvMap>, CliError> {
    let shots = load(shots, ingest::load_shots)?;
    let partition = match partition {
        Some(p) => {
            let text = std::fs::read_to_string(require(p)?).map_err(|e| CliError::io(p, e))?;
            RegionPartition::parse(&text)?
        }
        None => RegionPartition::nba_default(),
    };
    let league = LeagueAverages::from_shots(&shots, &partition)?;
    let mut players: Vec<PlayerId> = match player {
        Some(p) => vec![PlayerId::from(p)],
        None => shots.iter().map(|s| s.player.clone()).collect(),
    };
    players.sort();
    players.dedup();
    let maps = players
        .iter()
        .map(|p| build_epv_map(p, &shots, &partition, &league))
        .collect::<Result<Vec<_>, _>>()?;
    write(&out.join("epvmap.csv"), write_epv_maps(&maps))?;
    for m in &maps {
        let path = out.join(format!("epv_{}.png", m.player));
        epv_chart(m, &partition)
            .save(&path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(maps)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplaySummary {
    pub frames: usize,
    pub bytes: usize,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Replay a gaze trace over a saved bundle and write the command dump.
/// `overrides` is a partial TOML config layered over the bundle's.
pub fn cmd_replay(bundle_dir: &Path, gaze: &Path, overrides: Option<&Path>, out: &Path) -> Result<ReplaySummary, CliError> {
    require(&bundle_dir.join("bundle.json"))?;
    let bundle = GameBundle::load(bundle_dir)?;
    let cfg = match overrides {
        Some(p) => {
            let text = std::fs::read_to_string(require(p)?).map_err(|e| CliError::io(p, e))?;
            bundle.config.with_overrides(&text)?
        }
        None => bundle.config,
    };
    let trace = load_gaze_trace(require(gaze)?)?;
    let frames = replay(&bundle, &trace, &cfg)?;
    let bytes = dump(&frames);
    write(out, &bytes)?;
    Ok(ReplaySummary {
        frames: frames.len(),
        bytes: bytes.len(),
        sha256: sha256_hex(&bytes),
    })
}

/// Raw inputs and a gaze trace for the seeded demo possession.
pub fn cmd_demo(seed: u64, out: &Path) -> Result<(), CliError> {
    let g = synth::demo_game(seed);
    let mut cfg = Config::default();
    cfg.gaze.filter_radius = synth::DEMO_FILTER_RADIUS;
    let files = [
        ("detections.csv", ingest::write_detections(&g.detections)),
        ("tracking.csv", ingest::write_tracking(&g.tracking)),
        ("masks.rle", ingest::write_masks(&g.masks)),
        ("keypoints.csv", ingest::write_keypoints(&g.keypoints)),
        ("shots.csv", ingest::write_shots(&g.shots)),
        ("defense.csv", ingest::write_defense(&g.defense)),
        ("roster.csv", ingest::write_roster(&g.roster)),
        ("config.toml", cfg.to_toml()),
        ("gaze.csv", write_gaze_trace(&synth::demo_gaze_trace())),
    ];
    for (name, text) in files {
        write(&out.join(name), text)?;
    }
    Ok(())
}
