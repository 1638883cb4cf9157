//! Seeded synthetic games and detector output.
//!
//! Used by the property tests, the benchmarks and to generate the shipped
//! demo fixture. Everything here is deterministic for a given seed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ability::{RegionPartition, HOOP};
use crate::bundle::PreprocessInputs;
use crate::geometry::{BoundingBox, Point};
use crate::gaze::GazeSample;
use crate::ingest::{
    CourtSample, DefenseRecord, Detection, Entity, FrameIndex, Joint, Keypoint, PlayerId, PoseKeypoints, Roster, RosterEntry,
    SegmentationMask, ShotRecord, StarRole, TeamId,
};
use crate::raster::Image;

/// Knobs for [`constant_velocity_scene`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub players: usize,
    pub frames: u32,
    /// Max box jitter in pixels, uniform.
    pub jitter_px: f64,
    /// Confidence dips (into the low cluster) per player.
    pub dips_per_player: u32,
    /// Frames missing from each dropout.
    pub dropout_len: u32,
    pub dropouts: u32,
    /// Low-confidence false positives per frame.
    pub clutter_per_frame: u32,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            players: 10,
            frames: 60,
            jitter_px: 1.0,
            dips_per_player: 2,
            dropout_len: 3,
            dropouts: 3,
            clutter_per_frame: 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Scene {
    pub ground_truth: Vec<Detection>,
    pub detections: Vec<Detection>,
}

pub fn player_id(i: usize) -> PlayerId {
    PlayerId(format!("P{i:02}"))
}

/// Players on separate lanes moving at constant velocity. Detections are the
/// true boxes with uniform jitter, occasional low-confidence dips and short
/// dropouts, plus clutter below any useful threshold.
pub fn constant_velocity_scene(spec: &SceneSpec, seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scene = Scene::default();
    let lane_h = 120.0;
    let mut paths = Vec::new();
    for i in 0..spec.players {
        let lane = (i % 5) as f64;
        let col = (i / 5) as f64;
        let start = Point::new(80.0 + col * 600.0 + rng.random_range(0.0..100.0), 60.0 + lane * lane_h);
        let vel = Point::new(rng.random_range(-3.0..3.0), rng.random_range(-0.5..0.5));
        let (w, h) = (rng.random_range(35.0..50.0), rng.random_range(90.0..110.0));
        paths.push((start, vel, w, h));
    }
    let mut missing: Vec<(usize, u32)> = Vec::new();
    for _ in 0..spec.dropouts {
        let p = rng.random_range(0..spec.players);
        let start = rng.random_range(2..spec.frames.saturating_sub(spec.dropout_len + 2).max(3));
        for f in start..start + spec.dropout_len {
            missing.push((p, f));
        }
    }
    let mut dips: Vec<(usize, u32)> = Vec::new();
    for p in 0..spec.players {
        for _ in 0..spec.dips_per_player {
            dips.push((p, rng.random_range(1..spec.frames - 1)));
        }
    }
    for f in 0..spec.frames {
        for (i, (start, vel, w, h)) in paths.iter().enumerate() {
            let truth = BoundingBox::new(start.x + vel.x * f as f64, start.y + vel.y * f as f64, *w, *h);
            let id = player_id(i);
            scene.ground_truth.push(Detection {
                frame: f,
                bbox: truth,
                identity: id.clone(),
                confidence: 1.0,
            });
            if missing.contains(&(i, f)) {
                continue;
            }
            let mut j = || rng.random_range(-spec.jitter_px..=spec.jitter_px);
            let bbox = BoundingBox::new(truth.x + j(), truth.y + j(), truth.w + j(), truth.h + j());
            let confidence = if dips.contains(&(i, f)) {
                rng.random_range(0.2..0.5)
            } else {
                rng.random_range(0.7..0.99)
            };
            scene.detections.push(Detection {
                frame: f,
                bbox,
                identity: id,
                confidence,
            });
        }
        for _ in 0..spec.clutter_per_frame {
            let p = rng.random_range(0..spec.players);
            scene.detections.push(Detection {
                frame: f,
                bbox: BoundingBox::new(rng.random_range(0.0..1200.0), rng.random_range(0.0..600.0), 40.0, 100.0),
                identity: player_id(p),
                confidence: rng.random_range(0.0..0.09),
            });
        }
    }
    scene
}

/// Ten exact constant-velocity players; `occluded` vanishes for frames
/// `gap_start..gap_start + gap_len`.
pub fn occlusion_scene(occluded: usize, gap_start: u32, gap_len: u32, frames: u32) -> Scene {
    let mut scene = Scene::default();
    for f in 0..frames {
        for i in 0..10 {
            let b = BoundingBox::new(
                50.0 + 110.0 * i as f64 + 1.5 * f as f64,
                100.0 + 20.0 * (i % 3) as f64 + 0.75 * f as f64,
                40.0,
                100.0 + i as f64,
            );
            let d = Detection {
                frame: f,
                bbox: b,
                identity: player_id(i),
                confidence: 0.9,
            };
            scene.ground_truth.push(d.clone());
            if !(i == occluded && (gap_start..gap_start + gap_len).contains(&f)) {
                scene.detections.push(d);
            }
        }
    }
    scene
}

// ---------------------------------------------------------------------------
// Demo game

pub const DEMO_FRAMES: u32 = 100;
pub const DEMO_SIZE: (u32, u32) = (640, 360);

/// Fixed broadcast-like projection of the left half court into the demo frame.
#[derive(Debug, Clone, Copy)]
pub struct Camera;

impl Camera {
    pub fn feet(p: Point) -> Point {
        Point::new(40.0 + p.x * 12.5, 80.0 + p.y * 5.2)
    }

    pub fn player_box(p: Point) -> BoundingBox {
        let feet = Self::feet(p);
        let h = 60.0 + p.y * 0.6;
        let w = h * 0.4;
        BoundingBox::new(feet.x - w / 2.0, feet.y - h, w, h)
    }
}

fn lerp(a: Point, b: Point, t: f64) -> Point {
    Point::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
}

fn toward(from: Point, to: Point, dist: f64) -> Point {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let len = (dx * dx + dy * dy).sqrt();
    Point::new(from.x + dx / len * dist, from.y + dy / len * dist)
}

const HOME: [(&str, &str, StarRole); 5] = [
    ("H1", "Marcus Vale", StarRole::Shooter),
    ("H2", "Dion Pryor", StarRole::None),
    ("H3", "Theo Banks", StarRole::None),
    ("H4", "Ike Moreno", StarRole::None),
    ("H5", "Sol Akers", StarRole::None),
];
const AWAY: [(&str, &str, StarRole); 5] = [
    ("A1", "Jalen Crest", StarRole::None),
    ("A2", "Rowan Hale", StarRole::Defender),
    ("A3", "Nico Stark", StarRole::None),
    ("A4", "Eli Fontaine", StarRole::None),
    ("A5", "Kai Marsh", StarRole::None),
];

pub fn demo_roster() -> Roster {
    let mut r = Roster::default();
    for (team, players) in [("HOME", HOME), ("AWAY", AWAY)] {
        for (id, name, role) in players {
            r.insert(
                PlayerId::from(id),
                RosterEntry {
                    name: name.to_owned(),
                    team: TeamId::from(team),
                    role,
                },
            );
        }
    }
    r
}

/// Court positions of every entity at frame `f` of the demo possession.
/// HOME attacks the basket at x=0; H1 dribbles, then passes to H2 around
/// frame 45. H5 waits in the corner with nobody near.
pub fn demo_positions(f: FrameIndex) -> (Point, BTreeMap<PlayerId, Point>) {
    let t = f as f64 / (DEMO_FRAMES - 1) as f64;
    let offense = [
        lerp(Point::new(26.0, 25.0), Point::new(21.0, 22.0), t),
        lerp(Point::new(18.0, 8.0), Point::new(15.0, 6.0), t),
        lerp(Point::new(22.0, 42.0), Point::new(20.0, 44.0), t),
        lerp(Point::new(8.0, 14.0), Point::new(7.0, 13.0), t),
        Point::new(2.0, 47.0),
    ];
    let mut players = BTreeMap::new();
    for (i, p) in offense.iter().enumerate() {
        players.insert(PlayerId::from(HOME[i].0), *p);
        let guard = if i == 4 {
            Point::new(12.0, 34.0)
        } else {
            toward(*p, HOOP, 4.0)
        };
        players.insert(PlayerId::from(AWAY[i].0), guard);
    }
    let hold = |p: Point| Point::new(p.x - 0.8, p.y);
    let ball = match f {
        0..45 => hold(offense[0]),
        45..55 => {
            // bowed away from the defenders
            let u = (f - 44) as f64 / 11.0;
            let p = lerp(hold(offense[0]), hold(offense[1]), u);
            Point::new(p.x + 24.0 * u * (1.0 - u), p.y)
        }
        _ => hold(offense[1]),
    };
    (ball, players)
}

/// Inputs for a 100-frame demo possession, including imperfect detections.
pub fn demo_game(seed: u64) -> PreprocessInputs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roster = demo_roster();
    let partition = RegionPartition::nba_default();
    let (w, h) = DEMO_SIZE;
    let mut inputs = PreprocessInputs {
        game_id: "demo".into(),
        roster: roster.clone(),
        frame_size: Some(DEMO_SIZE),
        ..Default::default()
    };
    for f in 0..DEMO_FRAMES {
        let (ball, players) = demo_positions(f);
        inputs.tracking.push(CourtSample {
            frame: f,
            entity: Entity::Ball,
            position: ball,
            height: Some(4.0),
        });
        let mut mask = vec![false; (w * h) as usize];
        for (id, p) in &players {
            inputs.tracking.push(CourtSample {
                frame: f,
                entity: Entity::Player(id.clone()),
                position: *p,
                height: None,
            });
            let truth = Camera::player_box(*p);
            fill_box(&mut mask, w, h, &truth.expand(-2.0));

            let dropped = id.as_str() == "A3" && (60..63).contains(&f);
            if !dropped {
                let (dx, dy) = (rng.random_range(-0.8..=0.8), rng.random_range(-0.8..=0.8));
                let confidence = if id.as_str() == "H4" && (30..34).contains(&f) {
                    0.35
                } else {
                    rng.random_range(0.8..0.97)
                };
                inputs.detections.push(Detection {
                    frame: f,
                    bbox: BoundingBox::new(truth.x + dx, truth.y + dy, truth.w, truth.h),
                    identity: id.clone(),
                    confidence,
                });
            }
            let feet = Camera::feet(*p);
            let right_conf = if id.as_str() == "A2" { 0.1 } else { 0.9 };
            inputs.keypoints.push(PoseKeypoints {
                frame: f,
                player: id.clone(),
                joints: BTreeMap::from([
                    (Joint::LeftFoot, Keypoint { point: Point::new(feet.x - 4.0, feet.y), confidence: 0.9 }),
                    (Joint::RightFoot, Keypoint { point: Point::new(feet.x + 4.0, feet.y), confidence: right_conf }),
                ]),
            });
        }
        inputs.masks.push(SegmentationMask::from_bitmap(f, w, h, &mask));
        inputs.detections.push(Detection {
            frame: f,
            bbox: BoundingBox::new(rng.random_range(0.0..600.0), rng.random_range(0.0..300.0), 20.0, 50.0),
            identity: PlayerId::from("A5"),
            confidence: 0.05,
        });
    }
    inputs.shots = random_shots(&mut rng, &roster, &partition, 40);
    for (id, entry) in roster.iter() {
        if entry.team.0 == "AWAY" {
            for r in partition.regions().iter().filter(|r| r.point_value > 0) {
                inputs.defense.push(DefenseRecord {
                    player: id.clone(),
                    region: r.id.clone(),
                    diff_percent: (rng.random_range(-6.0f64..3.0) * 10.0).round() / 10.0,
                });
            }
        }
    }
    inputs
}

fn fill_box(mask: &mut [bool], w: u32, h: u32, b: &BoundingBox) {
    let x0 = b.x.max(0.0).round() as u32;
    let y0 = b.y.max(0.0).round() as u32;
    let x1 = ((b.x + b.w).round().max(0.0) as u32).min(w);
    let y1 = ((b.y + b.h).round().max(0.0) as u32).min(h);
    for y in y0..y1 {
        for x in x0..x1 {
            mask[(y * w + x) as usize] = true;
        }
    }
}

/// `per_player` shots for every rostered player, anywhere in the half court.
pub fn random_shots(rng: &mut impl Rng, roster: &Roster, partition: &RegionPartition, per_player: usize) -> Vec<ShotRecord> {
    let mut shots = Vec::new();
    for (id, _) in roster.iter() {
        for _ in 0..per_player {
            let position = Point::new(rng.random_range(0.05..46.95), rng.random_range(0.05..49.95));
            let Some(region) = partition.locate(position) else { continue };
            if region.point_value == 0 {
                continue;
            }
            let p = if region.point_value == 3 { 0.36 } else { 0.48 };
            shots.push(ShotRecord {
                player: id.clone(),
                position,
                made: rng.random_bool(p),
                points: region.point_value,
            });
        }
    }
    shots
}

/// A 30 Hz gaze trace over the demo: the handler, then a long dwell on a
/// role player, a blink, a look away across the court, then the open corner.
pub fn demo_gaze_trace() -> Vec<GazeSample> {
    let center_at = |id: &str, f: FrameIndex| {
        let (_, players) = demo_positions(f.min(DEMO_FRAMES - 1));
        Camera::player_box(players[&PlayerId::from(id)]).center()
    };
    let mut out = Vec::new();
    for k in 0..(DEMO_FRAMES + 10) {
        let t = k as f64 / 30.0 + 1.0 / 120.0;
        let s = match k {
            0..12 => GazeSample::new(t, center_at("H1", k).x, center_at("H1", k).y),
            12..33 => GazeSample::new(t, center_at("H3", k).x, center_at("H3", k).y),
            33..36 => GazeSample::invalid(t),
            36..60 => GazeSample::new(t, 600.0, 60.0),
            _ => GazeSample::new(t, center_at("H5", k).x, center_at("H5", k).y),
        };
        out.push(s);
    }
    out
}

/// Gaze filter radius for the demo's small frame, about the default's share of a 1920-wide frame.
pub const DEMO_FILTER_RADIUS: f64 = 220.0;

/// Deterministic stand-in for a decoded video frame.
pub fn source_frame(frame: FrameIndex, width: u32, height: u32) -> Image {
    let mut img = Image::filled(width, height, [0; 3]);
    for y in 0..height {
        for x in 0..width {
            img.pixels[(y * width + x) as usize] = [
                ((x * 7 + frame) % 256) as u8,
                ((y * 5 + frame * 3) % 256) as u8,
                ((x + y) % 256) as u8,
            ];
        }
    }
    img
}
