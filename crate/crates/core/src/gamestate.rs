//! Per-frame game state from court tracking: who has the ball, who gets it
//! next, who is open, who guards the handler, and the resulting importance
//! ranking of every rostered player.
//!
//! All distance ties are broken by ascending player id, so results are a
//! pure function of the inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::ingest::{CourtSample, Entity, FrameIndex, PlayerId, Roster, TeamId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameStateConfig {
    /// Seconds of history used for possession and guarding assignments.
    pub possession_window: f64,
    /// Seconds scanned ahead for the next ball handler.
    pub lookahead: f64,
    /// Feet to the nearest defender at which an offensive player counts as open.
    pub open_distance: f64,
    /// Feet within which a player can be holding the ball.
    pub handler_distance: f64,
    /// Maximum guarding distance, feet.
    pub guard_distance_max: f64,
    /// Tracking frames per second (tracking is aligned to video frames).
    pub frame_rate: f64,
}

impl Default for GameStateConfig {
    fn default() -> Self {
        Self {
            possession_window: 0.5,
            lookahead: 1.8,
            open_distance: 6.0,
            handler_distance: 3.0,
            guard_distance_max: 12.0,
            frame_rate: 30.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GameStateError {
    #[error("no ball sample at frame {0}")]
    MissingBall(FrameIndex),
    #[error("game state config: {0} must be positive")]
    NonPositive(&'static str),
}

impl GameStateConfig {
    pub fn validate(&self) -> Result<(), GameStateError> {
        for (name, v) in [
            ("possession_window", self.possession_window),
            ("lookahead", self.lookahead),
            ("open_distance", self.open_distance),
            ("handler_distance", self.handler_distance),
            ("guard_distance_max", self.guard_distance_max),
            ("frame_rate", self.frame_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GameStateError::NonPositive(name));
            }
        }
        Ok(())
    }

    pub fn window_frames(&self) -> u32 {
        ((self.possession_window * self.frame_rate).round() as u32).max(1)
    }

    pub fn lookahead_frames(&self) -> u32 {
        (self.lookahead * self.frame_rate).round() as u32
    }
}

/// Importance levels. `Lifted` (2.5) only ever comes from gaze interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    Lv1,
    Lv2,
    Lifted,
    Lv3,
}

impl Level {
    pub fn value(self) -> f64 {
        match self {
            Level::Lv1 => 1.0,
            Level::Lv2 => 2.0,
            Level::Lifted => 2.5,
            Level::Lv3 => 3.0,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Lv1 => "1",
            Level::Lv2 => "2",
            Level::Lifted => "2.5",
            Level::Lv3 => "3",
        })
    }
}

/// Positions of every entity at one frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameSamples {
    pub ball: Option<Point>,
    pub ball_height: Option<f64>,
    pub players: BTreeMap<PlayerId, Point>,
}

/// Read-only tracking indexed by frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackingStore {
    frames: BTreeMap<FrameIndex, FrameSamples>,
}

impl TrackingStore {
    pub fn from_samples(samples: &[CourtSample]) -> Self {
        let mut frames: BTreeMap<FrameIndex, FrameSamples> = BTreeMap::new();
        for s in samples {
            let f = frames.entry(s.frame).or_default();
            match &s.entity {
                Entity::Ball => {
                    f.ball = Some(s.position);
                    f.ball_height = s.height;
                }
                Entity::Player(p) => {
                    f.players.insert(p.clone(), s.position);
                }
            }
        }
        Self { frames }
    }

    pub fn frame(&self, f: FrameIndex) -> Option<&FrameSamples> {
        self.frames.get(&f)
    }

    pub fn frames(&self) -> impl Iterator<Item = (FrameIndex, &FrameSamples)> {
        self.frames.iter().map(|(f, s)| (*f, s))
    }

    pub fn position(&self, f: FrameIndex, player: &PlayerId) -> Option<Point> {
        self.frames.get(&f)?.players.get(player).copied()
    }

    pub fn last_frame(&self) -> Option<FrameIndex> {
        self.frames.keys().next_back().copied()
    }
}

/// Closest of `candidates` to `target`, ties to the lower id.
fn nearest<'a>(target: Point, candidates: impl Iterator<Item = (&'a PlayerId, &'a Point)>) -> Option<(&'a PlayerId, f64)> {
    let mut best: Option<(&PlayerId, f64)> = None;
    for (id, p) in candidates {
        let d = target.distance(*p);
        // iteration is in id order, so strict `<` keeps the lower id on ties
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((id, d));
        }
    }
    best
}

/// The player within `handler_distance` of the ball and closest to it.
pub fn detect_ball_handler(
    frame: FrameIndex,
    samples: &FrameSamples,
    cfg: &GameStateConfig,
) -> Result<Option<PlayerId>, GameStateError> {
    let ball = samples.ball.ok_or(GameStateError::MissingBall(frame))?;
    Ok(nearest(ball, samples.players.iter())
        .filter(|(_, d)| *d <= cfg.handler_distance)
        .map(|(id, _)| id.clone()))
}

/// Offensive players other than the handler whose nearest defender is at
/// least `open_distance` away.
pub fn detect_open_players(
    samples: &FrameSamples,
    offense: &TeamId,
    handler: Option<&PlayerId>,
    roster: &Roster,
    cfg: &GameStateConfig,
) -> BTreeSet<PlayerId> {
    let on_team = |id: &PlayerId, team: &TeamId| roster.team_of(id) == Some(team);
    let defenders: Vec<(&PlayerId, &Point)> = samples
        .players
        .iter()
        .filter(|(id, _)| roster.team_of(id).is_some_and(|t| t != offense))
        .collect();
    samples
        .players
        .iter()
        .filter(|(id, _)| on_team(id, offense) && Some(*id) != handler)
        .filter(|(_, p)| {
            nearest(**p, defenders.iter().copied()).is_none_or(|(_, d)| d >= cfg.open_distance)
        })
        .map(|(id, _)| id.clone())
        .collect()
}

/// Everything needed to rank one frame.
#[derive(Debug, Clone, Default)]
pub struct RankingInputs<'a> {
    pub handler: Option<&'a PlayerId>,
    pub receiver: Option<&'a PlayerId>,
    pub open_players: Option<&'a BTreeSet<PlayerId>>,
    pub key_defenders: Option<&'a BTreeSet<PlayerId>>,
}

/// Offense first: handler, receiver and open players are Lv3, key defenders
/// Lv2, every other rostered player Lv1.
pub fn rank_importance(roster: &Roster, inputs: &RankingInputs<'_>) -> BTreeMap<PlayerId, Level> {
    let mut levels: BTreeMap<PlayerId, Level> = roster.iter().map(|(id, _)| (id.clone(), Level::Lv1)).collect();
    if let Some(defs) = inputs.key_defenders {
        for d in defs {
            levels.insert(d.clone(), Level::Lv2);
        }
    }
    let lv3 = inputs
        .handler
        .into_iter()
        .chain(inputs.receiver)
        .chain(inputs.open_players.into_iter().flatten());
    for p in lv3 {
        levels.insert(p.clone(), Level::Lv3);
    }
    levels
}

/// One (defender, handler) link per key defender.
pub fn one_on_one_links(key_defenders: &BTreeSet<PlayerId>, handler: Option<&PlayerId>) -> Vec<(PlayerId, PlayerId)> {
    match handler {
        Some(h) => key_defenders.iter().map(|d| (d.clone(), h.clone())).collect(),
        None => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameStateFrame {
    pub frame: FrameIndex,
    pub offense: Option<TeamId>,
    pub handler: Option<PlayerId>,
    pub receiver: Option<PlayerId>,
    pub open_players: BTreeSet<PlayerId>,
    pub key_defenders: BTreeSet<PlayerId>,
    pub links: Vec<(PlayerId, PlayerId)>,
    pub importance: BTreeMap<PlayerId, Level>,
}

impl GameStateFrame {
    /// Recompute links and importance from the stored sets.
    pub fn from_parts(
        frame: FrameIndex,
        offense: Option<TeamId>,
        handler: Option<PlayerId>,
        receiver: Option<PlayerId>,
        open_players: BTreeSet<PlayerId>,
        key_defenders: BTreeSet<PlayerId>,
        roster: &Roster,
    ) -> Self {
        let importance = rank_importance(
            roster,
            &RankingInputs {
                handler: handler.as_ref(),
                receiver: receiver.as_ref(),
                open_players: Some(&open_players),
                key_defenders: Some(&key_defenders),
            },
        );
        let links = one_on_one_links(&key_defenders, handler.as_ref());
        Self {
            frame,
            offense,
            handler,
            receiver,
            open_players,
            key_defenders,
            links,
            importance,
        }
    }

    pub fn level(&self, p: &PlayerId) -> Level {
        self.importance.get(p).copied().unwrap_or(Level::Lv1)
    }
}

/// Window-based detectors over a whole tracked game.
pub struct GameAnalyzer<'a> {
    store: &'a TrackingStore,
    roster: &'a Roster,
    cfg: GameStateConfig,
    handlers: BTreeMap<FrameIndex, Option<PlayerId>>,
}

impl<'a> GameAnalyzer<'a> {
    pub fn new(store: &'a TrackingStore, roster: &'a Roster, cfg: GameStateConfig) -> Self {
        // frames without a ball sample are dead-ball frames
        let handlers = store
            .frames()
            .map(|(f, s)| (f, detect_ball_handler(f, s, &cfg).ok().flatten()))
            .collect();
        Self {
            store,
            roster,
            cfg,
            handlers,
        }
    }

    pub fn handler(&self, frame: FrameIndex) -> Option<&PlayerId> {
        self.handlers.get(&frame)?.as_ref()
    }

    fn window(&self, frame: FrameIndex) -> std::ops::RangeInclusive<FrameIndex> {
        let n = self.cfg.window_frames();
        (frame + 1).saturating_sub(n)..=frame
    }

    /// Most recent handler within the trailing possession window.
    pub fn recent_handler(&self, frame: FrameIndex) -> Option<&PlayerId> {
        self.window(frame).rev().find_map(|f| self.handler(f))
    }

    /// Team of the most recent ball handler in the trailing window.
    pub fn detect_offense(&self, frame: FrameIndex) -> Option<TeamId> {
        self.recent_handler(frame).and_then(|h| self.roster.team_of(h)).cloned()
    }

    /// First handler different from the current one within the look-ahead.
    pub fn detect_next_receiver(&self, frame: FrameIndex) -> Option<PlayerId> {
        let current = self.recent_handler(frame);
        let horizon = frame + self.cfg.lookahead_frames();
        (frame + 1..=horizon)
            .filter_map(|f| self.handler(f))
            .find(|h| Some(*h) != current)
            .cloned()
    }

    /// Defenders whose closest offensive player over the window, by mean
    /// distance, is the handler, and who are within guarding distance now.
    pub fn detect_key_defenders(&self, frame: FrameIndex, handler: &PlayerId) -> BTreeSet<PlayerId> {
        let mut out = BTreeSet::new();
        let Some(offense) = self.roster.team_of(handler) else {
            return out;
        };
        let Some(now) = self.store.frame(frame) else {
            return out;
        };
        let Some(handler_pos) = now.players.get(handler) else {
            return out;
        };
        for (def, def_pos) in &now.players {
            if self.roster.team_of(def).is_none_or(|t| t == offense) {
                continue;
            }
            if def_pos.distance(*handler_pos) > self.cfg.guard_distance_max {
                continue;
            }
            let mut totals: BTreeMap<&PlayerId, (f64, u32)> = BTreeMap::new();
            for f in self.window(frame) {
                let Some(s) = self.store.frame(f) else { continue };
                let Some(dp) = s.players.get(def) else { continue };
                for (o, op) in &s.players {
                    if self.roster.team_of(o) == Some(offense) {
                        let e = totals.entry(o).or_default();
                        e.0 += dp.distance(*op);
                        e.1 += 1;
                    }
                }
            }
            let assigned = totals
                .iter()
                .map(|(o, (sum, n))| (*o, sum / *n as f64))
                .fold(None::<(&PlayerId, f64)>, |best, (o, d)| match best {
                    Some((_, bd)) if bd <= d => best,
                    _ => Some((o, d)),
                });
            if assigned.is_some_and(|(o, _)| o == handler) {
                out.insert(def.clone());
            }
        }
        out
    }

    pub fn analyze(&self, frame: FrameIndex) -> GameStateFrame {
        let offense = self.detect_offense(frame);
        let handler = self.handler(frame).cloned();
        let samples = self.store.frame(frame).cloned().unwrap_or_default();
        let receiver = self
            .detect_next_receiver(frame)
            .filter(|r| offense.is_some() && self.roster.team_of(r) == offense.as_ref());
        let open = match &offense {
            Some(team) => detect_open_players(&samples, team, handler.as_ref(), self.roster, &self.cfg),
            None => BTreeSet::new(),
        };
        let defenders = match &handler {
            Some(h) => self.detect_key_defenders(frame, h),
            None => BTreeSet::new(),
        };
        GameStateFrame::from_parts(frame, offense, handler, receiver, open, defenders, self.roster)
    }

    /// Game state for every frame from 0 through the last tracked frame.
    pub fn analyze_all(&self) -> Vec<GameStateFrame> {
        match self.store.last_frame() {
            Some(last) => (0..=last).map(|f| self.analyze(f)).collect(),
            None => Vec::new(),
        }
    }
}

fn join_ids<'a>(ids: impl Iterator<Item = &'a PlayerId>) -> String {
    ids.map(PlayerId::as_str).collect::<Vec<_>>().join(";")
}

pub fn write_game_states(states: &[GameStateFrame]) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    for g in states {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            g.frame,
            g.offense.as_ref().map(|t| t.0.as_str()).unwrap_or(""),
            g.handler.as_ref().map(PlayerId::as_str).unwrap_or(""),
            g.receiver.as_ref().map(PlayerId::as_str).unwrap_or(""),
            join_ids(g.open_players.iter()),
            join_ids(g.key_defenders.iter()),
        );
    }
    s
}

#[derive(Debug, Error)]
#[error("gamestate line {line}: {message}")]
pub struct GameStateParseError {
    pub line: usize,
    pub message: String,
}

pub fn parse_game_states(text: &str, roster: &Roster) -> Result<Vec<GameStateFrame>, GameStateParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: &str| GameStateParseError {
            line: i + 1,
            message: m.to_owned(),
        };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 6 {
            return Err(err("expected 6 fields"));
        }
        let frame = f[0].parse().map_err(|_| err("bad frame"))?;
        let opt = |s: &str| (!s.is_empty()).then(|| s.to_owned());
        let set = |s: &str| -> BTreeSet<PlayerId> {
            s.split(';').filter(|x| !x.is_empty()).map(PlayerId::from).collect()
        };
        out.push(GameStateFrame::from_parts(
            frame,
            opt(f[1]).map(TeamId),
            opt(f[2]).map(PlayerId),
            opt(f[3]).map(PlayerId),
            set(f[4]),
            set(f[5]),
            roster,
        ));
    }
    out.sort_by_key(|g| g.frame);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{RosterEntry, StarRole};

    fn roster() -> Roster {
        let mut r = Roster::default();
        for (id, team) in [("A1", "A"), ("A2", "A"), ("A3", "A"), ("B1", "B"), ("B2", "B"), ("B3", "B")] {
            r.insert(
                id.into(),
                RosterEntry {
                    name: id.to_owned(),
                    team: team.into(),
                    role: StarRole::None,
                },
            );
        }
        r
    }

    fn frame(ball: (f64, f64), players: &[(&str, (f64, f64))]) -> FrameSamples {
        FrameSamples {
            ball: Some(Point::new(ball.0, ball.1)),
            ball_height: None,
            players: players
                .iter()
                .map(|(id, (x, y))| (PlayerId::from(*id), Point::new(*x, *y)))
                .collect(),
        }
    }

    fn samples_of(frames: &[FrameSamples]) -> Vec<CourtSample> {
        let mut out = Vec::new();
        for (i, f) in frames.iter().enumerate() {
            if let Some(b) = f.ball {
                out.push(CourtSample {
                    frame: i as u32,
                    entity: Entity::Ball,
                    position: b,
                    height: None,
                });
            }
            for (p, pos) in &f.players {
                out.push(CourtSample {
                    frame: i as u32,
                    entity: Entity::Player(p.clone()),
                    position: *pos,
                    height: None,
                });
            }
        }
        out
    }

    #[test]
    fn handler_nearest_within_distance() {
        let cfg = GameStateConfig::default();
        let f = frame((10.0, 10.0), &[("A1", (11.0, 10.0)), ("B1", (20.0, 10.0)), ("A2", (10.0, 30.0))]);
        assert_eq!(detect_ball_handler(0, &f, &cfg).unwrap(), Some("A1".into()));
        let f = frame((10.0, 10.0), &[("A1", (14.0, 10.0)), ("B1", (10.0, 14.0))]);
        assert_eq!(detect_ball_handler(0, &f, &cfg).unwrap(), None);
    }

    #[test]
    fn handler_tie_goes_to_lower_id() {
        let cfg = GameStateConfig::default();
        let f = frame((10.0, 10.0), &[("B1", (12.0, 10.0)), ("A2", (8.0, 10.0))]);
        assert_eq!(detect_ball_handler(0, &f, &cfg).unwrap(), Some("A2".into()));
    }

    #[test]
    fn handler_requires_ball() {
        let f = FrameSamples::default();
        assert_eq!(
            detect_ball_handler(7, &f, &GameStateConfig::default()),
            Err(GameStateError::MissingBall(7))
        );
    }

    #[test]
    fn open_player_threshold() {
        let cfg = GameStateConfig::default();
        let r = roster();
        let f = frame(
            (0.0, 0.0),
            &[("A1", (0.0, 0.0)), ("A2", (30.0, 0.0)), ("B1", (38.0, 0.0)), ("A3", (60.0, 0.0)), ("B2", (65.9, 0.0))],
        );
        let open = detect_open_players(&f, &"A".into(), Some(&"A1".into()), &r, &cfg);
        // A1 (handler, 20+ ft from everyone) excluded; A2 8 ft open; A3 5.9 ft not
        assert_eq!(open, BTreeSet::from(["A2".into()]));
    }

    #[test]
    fn offense_follows_latest_handler() {
        let r = roster();
        let cfg = GameStateConfig::default();
        // A1 holds for 10 frames, then B1 steals and holds for 10 frames.
        let mut frames = Vec::new();
        for i in 0..20 {
            let holder = if i < 10 { (50.0, 25.0) } else { (52.0, 25.0) };
            frames.push(frame(holder, &[("A1", (50.0, 25.0)), ("B1", (52.0, 25.5))]));
        }
        let store = TrackingStore::from_samples(&samples_of(&frames));
        let an = GameAnalyzer::new(&store, &r, cfg);
        assert_eq!(an.detect_offense(5), Some("A".into()));
        assert_eq!(an.detect_offense(12), Some("B".into()));

        // no one near the ball in the whole window
        let frames: Vec<_> = (0..20)
            .map(|_| frame((10.0, 10.0), &[("A1", (50.0, 25.0)), ("B1", (52.0, 25.5))]))
            .collect();
        let store = TrackingStore::from_samples(&samples_of(&frames));
        let an = GameAnalyzer::new(&store, &r, cfg);
        assert_eq!(an.detect_offense(19), None);
    }

    fn pass_game(change_at: usize, total: usize) -> Vec<FrameSamples> {
        (0..total)
            .map(|i| {
                let ball = if i < change_at { (20.0, 20.0) } else { (40.0, 20.0) };
                frame(ball, &[("A1", (20.0, 20.0)), ("A2", (40.0, 20.0)), ("B1", (30.0, 40.0))])
            })
            .collect()
    }

    #[test]
    fn next_receiver_lookahead() {
        let r = roster();
        let cfg = GameStateConfig::default();
        let g = pass_game(36, 120); // +1.2 s at 30 fps
        let store = TrackingStore::from_samples(&samples_of(&g));
        let an = GameAnalyzer::new(&store, &r, cfg);
        assert_eq!(an.detect_next_receiver(0), Some("A2".into()));

        let g = pass_game(60, 120); // +2.0 s
        let store = TrackingStore::from_samples(&samples_of(&g));
        let an = GameAnalyzer::new(&store, &r, cfg);
        assert_eq!(an.detect_next_receiver(0), None);

        let g = pass_game(1000, 120);
        let store = TrackingStore::from_samples(&samples_of(&g));
        let an = GameAnalyzer::new(&store, &r, cfg);
        assert_eq!(an.detect_next_receiver(0), None);
    }

    #[test]
    fn key_defender_rules() {
        let r = roster();
        let cfg = GameStateConfig::default();
        let f = frame(
            (10.0, 25.0),
            &[
                ("A1", (10.0, 25.0)),
                ("B1", (14.0, 25.0)),
                ("A2", (40.0, 10.0)),
                ("B2", (41.0, 10.0)),
                ("A3", (23.0, 25.0)),
                ("B3", (23.0, 26.0)),
            ],
        );
        let store = TrackingStore::from_samples(&samples_of(&[f]));
        let an = GameAnalyzer::new(&store, &r, cfg);
        let defs = an.detect_key_defenders(0, &"A1".into());
        // B1 4 ft from handler: key; B2 guards A2; B3 guards A3 (13 ft from A1 anyway)
        assert_eq!(defs, BTreeSet::from(["B1".into()]));
    }

    #[test]
    fn defender_beyond_guard_distance_excluded() {
        let r = roster();
        let cfg = GameStateConfig::default();
        let f = frame((10.0, 25.0), &[("A1", (10.0, 25.0)), ("B1", (23.0, 25.0))]);
        let store = TrackingStore::from_samples(&samples_of(&[f]));
        let an = GameAnalyzer::new(&store, &r, cfg);
        assert!(an.detect_key_defenders(0, &"A1".into()).is_empty());
    }

    #[test]
    fn ranking_precedence() {
        let r = roster();
        let h = PlayerId::from("A1");
        let levels = rank_importance(
            &r,
            &RankingInputs {
                handler: Some(&h),
                ..Default::default()
            },
        );
        assert_eq!(levels[&h], Level::Lv3);
        assert!(levels.iter().filter(|(p, _)| **p != h).all(|(_, l)| *l == Level::Lv1));

        let open = BTreeSet::from(["A2".into()]);
        let receiver = PlayerId::from("A2");
        let defs = BTreeSet::from(["B1".into()]);
        let levels = rank_importance(
            &r,
            &RankingInputs {
                handler: Some(&h),
                receiver: Some(&receiver),
                open_players: Some(&open),
                key_defenders: Some(&defs),
            },
        );
        assert_eq!(levels[&receiver], Level::Lv3);
        assert_eq!(levels[&PlayerId::from("B1")], Level::Lv2);
        assert_eq!(levels.values().filter(|l| **l == Level::Lv3).count(), 2);
        assert!(!levels.values().any(|l| *l == Level::Lifted));
    }

    #[test]
    fn links_per_key_defender() {
        let defs: BTreeSet<PlayerId> = ["B1".into(), "B2".into()].into();
        let h = PlayerId::from("A1");
        assert_eq!(one_on_one_links(&defs, Some(&h)).len(), 2);
        assert!(one_on_one_links(&defs, None).is_empty());
    }

    #[test]
    fn double_team_links() {
        let r = roster();
        let cfg = GameStateConfig::default();
        // A1 drives; B1 and B2 collapse on him, B3 stays home on A3.
        let frames: Vec<_> = (0..15)
            .map(|i| {
                let x = 30.0 - i as f64 * 0.5;
                frame(
                    (x, 25.0),
                    &[
                        ("A1", (x, 25.0)),
                        ("B1", (x - 3.0, 24.0)),
                        ("B2", (x - 2.0, 28.0)),
                        ("A2", (x + 5.0, 45.0)),
                        ("A3", (20.0, 5.0)),
                        ("B3", (21.0, 7.0)),
                    ],
                )
            })
            .collect();
        let store = TrackingStore::from_samples(&samples_of(&frames));
        let an = GameAnalyzer::new(&store, &r, cfg);
        let g = an.analyze(14);
        assert_eq!(g.handler, Some("A1".into()));
        assert_eq!(
            g.links,
            vec![("B1".into(), "A1".into()), ("B2".into(), "A1".into())]
        );
        assert_eq!(g.level(&"B3".into()), Level::Lv1);
    }

    #[test]
    fn game_state_csv_round_trip() {
        let r = roster();
        let g = GameStateFrame::from_parts(
            3,
            Some("A".into()),
            Some("A1".into()),
            Some("A2".into()),
            ["A2".into(), "A3".into()].into(),
            ["B1".into()].into(),
            &r,
        );
        let text = write_game_states(std::slice::from_ref(&g));
        assert_eq!(text, "3,A,A1,A2,A2;A3,B1\n");
        assert_eq!(parse_game_states(&text, &r).unwrap(), vec![g]);
    }
}
