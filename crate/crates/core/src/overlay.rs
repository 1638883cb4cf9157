//! Per-frame render commands for the embedded visualizations.
//!
//! Composition is pure: equal inputs give identical command lists. Geometry is
//! in video pixels; rasterization is left to the viewer.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ability::{diff_at, DefenseTable, EpvMap, LeagueAverages, RegionPartition};
use crate::gamestate::{FrameSamples, GameStateFrame, Level};
use crate::gaze::GazeOutput;
use crate::geometry::{BoundingBox, Point};
use crate::ingest::{FrameIndex, Joint, PlayerId, PoseKeypoints, Roster, StarRole, COURT_LENGTH_FT, COURT_WIDTH_FT};

pub const MAX_EPV: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OverlayConfig {
    /// Ring radius at EPV 0, pixels at the reference height.
    pub ring_inner_px: f64,
    /// Ring radius at EPV 3, pixels at the reference height.
    pub ring_outer_px: f64,
    /// Player box height at which pixel sizes apply unscaled.
    pub reference_height_px: f64,
    pub spotlight_radius_px: f64,
    /// Vertical squash of ground-plane ellipses.
    pub ground_aspect: f64,
    pub shield_radius_px: f64,
    /// Shield thickness per percentage point of negative DIFF%.
    pub shield_px_per_percent: f64,
    /// Taken from the game-state config when loaded from a file.
    #[serde(skip)]
    pub guard_distance_max: f64,
    pub foot_confidence_min: f64,
    pub highlight_margin_px: f64,
    pub label_offset_px: f64,
    pub background_darken: f64,
    pub audience_darken: f64,
    pub spotlight_opacity: f64,
    pub ring_opacity: f64,
    pub shield_opacity: f64,
    pub link_width_px: f64,
}

impl Default for OverlayConfig {
    fn default() -> Self {
        Self {
            ring_inner_px: 18.0,
            ring_outer_px: 48.0,
            reference_height_px: 180.0,
            spotlight_radius_px: 40.0,
            ground_aspect: 0.35,
            shield_radius_px: 30.0,
            shield_px_per_percent: 2.0,
            guard_distance_max: 12.0,
            foot_confidence_min: 0.3,
            highlight_margin_px: 6.0,
            label_offset_px: 8.0,
            background_darken: 0.35,
            audience_darken: 0.6,
            spotlight_opacity: 0.55,
            ring_opacity: 0.8,
            shield_opacity: 0.8,
            link_width_px: 3.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("overlay config: {0}")]
pub struct OverlayConfigError(&'static str);

impl OverlayConfig {
    pub fn validate(&self) -> Result<(), OverlayConfigError> {
        if !(self.ring_inner_px >= 0.0 && self.ring_outer_px > self.ring_inner_px) {
            return Err(OverlayConfigError("ring radii must satisfy 0 <= inner < outer"));
        }
        if !(self.reference_height_px > 0.0 && self.guard_distance_max > 0.0) {
            return Err(OverlayConfigError("reference height and guard distance must be positive"));
        }
        let unit = [
            self.background_darken,
            self.audience_darken,
            self.spotlight_opacity,
            self.ring_opacity,
            self.shield_opacity,
            self.foot_confidence_min,
        ];
        if unit.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(OverlayConfigError("opacities and confidences must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Paint order; later layers draw over earlier ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    BackgroundDarken = 0,
    CourtOverlay = 1,
    ForegroundRestore = 2,
    Label = 3,
}

/// Color roles; the viewer owns the palette.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ColorRole {
    Shade,
    White,
    Green,
    Gold,
    /// Position on the sequential EPV scale, in [0, 1].
    Sequential(f64),
    Defense,
    Link,
    Glow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Style {
    pub color: ColorRole,
    pub opacity: f64,
    /// Transition progress in [0, 1].
    pub ease: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub anchor: Point,
    pub epv: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub value_radius: f64,
    pub color_position: f64,
}

impl RingSpec {
    pub fn new(anchor: Point, epv: f64, scale: f64, cfg: &OverlayConfig) -> Self {
        let epv = epv.clamp(0.0, MAX_EPV);
        let inner = cfg.ring_inner_px * scale;
        let outer = cfg.ring_outer_px * scale;
        let t = epv / MAX_EPV;
        Self {
            anchor,
            epv,
            inner_radius: inner,
            outer_radius: outer,
            value_radius: inner + (outer - inner) * t,
            color_position: t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShieldSpec {
    pub anchor: Point,
    pub radius: f64,
    pub thickness: f64,
    pub arc_fraction: f64,
    /// Unit vector from the defender toward the handler, pixels.
    pub direction: Point,
}

impl ShieldSpec {
    pub fn new(anchor: Point, toward: Point, diff_percent: f64, dist_ft: f64, scale: f64, cfg: &OverlayConfig) -> Self {
        let (dx, dy) = (toward.x - anchor.x, toward.y - anchor.y);
        let len = (dx * dx + dy * dy).sqrt();
        let direction = if len > 0.0 {
            Point::new(dx / len, dy / len)
        } else {
            Point::new(1.0, 0.0)
        };
        Self {
            anchor,
            radius: cfg.shield_radius_px * scale,
            thickness: shield_thickness(diff_percent, scale, cfg),
            arc_fraction: arc_fraction(dist_ft, cfg.guard_distance_max),
            direction,
        }
    }
}

pub fn shield_thickness(diff_percent: f64, scale: f64, cfg: &OverlayConfig) -> f64 {
    (-diff_percent).max(0.0) * cfg.shield_px_per_percent * scale
}

pub fn arc_fraction(dist_ft: f64, guard_distance_max: f64) -> f64 {
    ((guard_distance_max - dist_ft) / guard_distance_max).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Primitive {
    /// Darken pixels outside the frame's foreground mask.
    BackgroundDarken,
    /// Ground ellipse under a player.
    Spotlight { anchor: Point, radius_x: f64, radius_y: f64 },
    /// Extra-brightness halo around a box.
    Highlight { bbox: BoundingBox },
    /// Dwell feedback halo; strength in [0, 1].
    Glow { bbox: BoundingBox, strength: f64 },
    OffenseRing(RingSpec),
    DefenseShield(ShieldSpec),
    Link { from: Point, to: Point, width: f64 },
    /// Mask-covered source pixels drawn back over the court layer.
    ForegroundRestore,
    NameLabel { anchor: Point, text: String, role: StarRole },
    /// Darken background pixels outside the gaze disk.
    AudienceDarken { center: Point, radius: f64 },
}

impl Primitive {
    pub fn code(&self) -> u8 {
        match self {
            Primitive::BackgroundDarken => 0,
            Primitive::AudienceDarken { .. } => 1,
            Primitive::Spotlight { .. } => 2,
            Primitive::Highlight { .. } => 3,
            Primitive::Glow { .. } => 4,
            Primitive::OffenseRing(_) => 5,
            Primitive::DefenseShield(_) => 6,
            Primitive::Link { .. } => 7,
            Primitive::ForegroundRestore => 8,
            Primitive::NameLabel { .. } => 9,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Primitive::BackgroundDarken => "background-darken",
            Primitive::AudienceDarken { .. } => "audience-darken",
            Primitive::Spotlight { .. } => "spotlight",
            Primitive::Highlight { .. } => "highlight",
            Primitive::Glow { .. } => "glow",
            Primitive::OffenseRing(_) => "offense-ring",
            Primitive::DefenseShield(_) => "defense-shield",
            Primitive::Link { .. } => "link",
            Primitive::ForegroundRestore => "foreground-restore",
            Primitive::NameLabel { .. } => "name-label",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderCommand {
    pub layer: Layer,
    /// Player the command belongs to; `None` for frame-wide commands.
    pub player: Option<PlayerId>,
    pub primitive: Primitive,
    pub style: Style,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposeWarning {
    pub frame: FrameIndex,
    pub player: PlayerId,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComposedFrame {
    pub frame: FrameIndex,
    pub commands: Vec<RenderCommand>,
    pub warnings: Vec<ComposeWarning>,
}

/// Midpoint of both feet when each is confident enough, else the box's bottom-center.
pub fn feet_anchor(bbox: &BoundingBox, pose: Option<&PoseKeypoints>, min_confidence: f64) -> Point {
    let feet = pose.and_then(|p| {
        let l = p.joints.get(&Joint::LeftFoot)?;
        let r = p.joints.get(&Joint::RightFoot)?;
        (l.confidence >= min_confidence && r.confidence >= min_confidence).then(|| l.point.midpoint(r.point))
    });
    feet.unwrap_or_else(|| bbox.bottom_center())
}

/// Feet anchors for every tracked player in a frame.
pub fn frame_anchors(
    boxes: &BTreeMap<PlayerId, BoundingBox>,
    poses: Option<&BTreeMap<PlayerId, PoseKeypoints>>,
    cfg: &OverlayConfig,
) -> BTreeMap<PlayerId, Point> {
    boxes
        .iter()
        .map(|(p, b)| (p.clone(), feet_anchor(b, poses.and_then(|m| m.get(p)), cfg.foot_confidence_min)))
        .collect()
}

/// Shooting and defense tables, in the attacking-basket-at-x=0 frame.
#[derive(Debug, Clone, Copy)]
pub struct AbilityContext<'a> {
    pub partition: &'a RegionPartition,
    pub epv_maps: &'a BTreeMap<PlayerId, EpvMap>,
    pub league: &'a LeagueAverages,
    pub defense: &'a DefenseTable,
}

impl AbilityContext<'_> {
    /// EPV for a player at a court position; players without a map take league values.
    pub fn epv(&self, player: &PlayerId, pos: Point) -> f64 {
        let Some(region) = self.partition.locate_or_nearest(pos) else {
            return 0.0;
        };
        if region.point_value == 0 {
            return 0.0;
        }
        match self.epv_maps.get(player).and_then(|m| m.regions.get(&region.id)) {
            Some(e) => e.epv,
            None => self.league.epv(region),
        }
    }
}

/// Map a court position into the frame where the attacked basket is at x=0.
pub fn to_attack_frame(p: Point, attacking_right: bool) -> Point {
    if attacking_right {
        Point::new(COURT_LENGTH_FT - p.x, COURT_WIDTH_FT - p.y)
    } else {
        p
    }
}

/// Everything the compositor reads for one frame.
#[derive(Debug, Clone, Copy)]
pub struct FrameInputs<'a> {
    pub frame: FrameIndex,
    pub boxes: &'a BTreeMap<PlayerId, BoundingBox>,
    pub poses: Option<&'a BTreeMap<PlayerId, PoseKeypoints>>,
    pub court: Option<&'a FrameSamples>,
    pub state: &'a GameStateFrame,
    /// Gaze effects; `None` when no gaze is driving the session.
    pub gaze: Option<&'a GazeOutput>,
}

pub fn compose_frame(inputs: &FrameInputs<'_>, ability: &AbilityContext<'_>, roster: &Roster, cfg: &OverlayConfig) -> ComposedFrame {
    let state = inputs.state;
    let mut out = ComposedFrame {
        frame: inputs.frame,
        ..Default::default()
    };
    out.commands.push(RenderCommand {
        layer: Layer::BackgroundDarken,
        player: None,
        primitive: Primitive::BackgroundDarken,
        style: Style {
            color: ColorRole::Shade,
            opacity: cfg.background_darken,
            ease: 1.0,
        },
    });
    if let Some(d) = inputs.gaze.and_then(|g| g.darken) {
        out.commands.push(RenderCommand {
            layer: Layer::BackgroundDarken,
            player: None,
            primitive: Primitive::AudienceDarken {
                center: d.center,
                radius: d.radius,
            },
            style: Style {
                color: ColorRole::Shade,
                opacity: cfg.audience_darken,
                ease: 1.0,
            },
        });
    }

    let levels = inputs.gaze.map(|g| &g.levels).unwrap_or(&state.importance);
    let anchors = frame_anchors(inputs.boxes, inputs.poses, cfg);
    let court_pos = |p: &PlayerId| inputs.court.and_then(|c| c.players.get(p)).copied();
    let attacking_right = state
        .handler
        .as_ref()
        .and_then(court_pos)
        .map(|h| h.x > COURT_LENGTH_FT / 2.0);
    let attack_frame = |p: Point| to_attack_frame(p, attacking_right.unwrap_or(p.x > COURT_LENGTH_FT / 2.0));
    let handler_anchor = state.handler.as_ref().and_then(|h| anchors.get(h)).copied();
    let handler_court = state.handler.as_ref().and_then(court_pos);

    let mut glow: BTreeMap<&PlayerId, f64> = inputs
        .gaze
        .map(|g| g.glow.iter().map(|(p, v)| (p, *v)).collect())
        .unwrap_or_default();
    for (p, l) in levels {
        if *l == Level::Lifted {
            glow.insert(p, 1.0);
        }
    }

    let mut missing: BTreeSet<PlayerId> = BTreeSet::new();
    let mut court_cmds: Vec<RenderCommand> = Vec::new();
    let mut labels: Vec<RenderCommand> = Vec::new();

    let mut visible: BTreeSet<&PlayerId> = levels.iter().filter(|(_, l)| **l >= Level::Lv2).map(|(p, _)| p).collect();
    visible.extend(glow.keys().copied());
    for p in visible {
        let level = levels.get(p).copied().unwrap_or(Level::Lv1);
        let (Some(bbox), Some(&anchor)) = (inputs.boxes.get(p), anchors.get(p)) else {
            missing.insert(p.clone());
            continue;
        };
        let scale = bbox.h / cfg.reference_height_px;
        let team = roster.team_of(p);
        let on_offense = state.offense.is_some() && team == state.offense.as_ref();
        let on_defense = state.offense.is_some() && team.is_some() && !on_offense;
        let own = |primitive: Primitive, color: ColorRole, opacity: f64, ease: f64| RenderCommand {
            layer: Layer::CourtOverlay,
            player: Some(p.clone()),
            primitive,
            style: Style { color, opacity, ease },
        };

        if level == Level::Lv3 {
            let open = state.open_players.contains(p);
            let lit = !open || inputs.gaze.is_none_or(|g| g.spotlight_on.contains(p));
            if lit {
                let rx = cfg.spotlight_radius_px * scale;
                court_cmds.push(own(
                    Primitive::Spotlight {
                        anchor,
                        radius_x: rx,
                        radius_y: rx * cfg.ground_aspect,
                    },
                    if open { ColorRole::Green } else { ColorRole::White },
                    cfg.spotlight_opacity,
                    1.0,
                ));
            }
        }
        if level == Level::Lv2 {
            court_cmds.push(own(
                Primitive::Highlight {
                    bbox: bbox.expand(cfg.highlight_margin_px * scale),
                },
                ColorRole::White,
                cfg.spotlight_opacity,
                1.0,
            ));
        }
        if let Some(&g) = glow.get(p) {
            court_cmds.push(own(
                Primitive::Glow {
                    bbox: bbox.expand(cfg.highlight_margin_px * scale),
                    strength: g,
                },
                ColorRole::Glow,
                g,
                g,
            ));
        }
        if level >= Level::Lv2 && on_offense {
            if let Some(pos) = court_pos(p) {
                let ring = RingSpec::new(anchor, ability.epv(p, attack_frame(pos)), scale, cfg);
                court_cmds.push(own(
                    Primitive::OffenseRing(ring),
                    ColorRole::Sequential(ring.color_position),
                    cfg.ring_opacity,
                    1.0,
                ));
            }
        }
        if level >= Level::Lv2 && on_defense {
            if let (Some(pos), Some(hc), Some(ha)) = (court_pos(p), handler_court, handler_anchor) {
                let diff = diff_at(ability.defense, p, attack_frame(hc), ability.partition);
                let shield = ShieldSpec::new(anchor, ha, diff.diff_percent, pos.distance(hc), scale, cfg);
                court_cmds.push(own(
                    Primitive::DefenseShield(shield),
                    ColorRole::Defense,
                    cfg.shield_opacity,
                    1.0,
                ));
            }
        }
        if level > Level::Lv2 {
            let entry = roster.get(p);
            let role = entry.map(|e| e.role).unwrap_or(StarRole::None);
            let top = bbox.top_center();
            labels.push(RenderCommand {
                layer: Layer::Label,
                player: Some(p.clone()),
                primitive: Primitive::NameLabel {
                    anchor: Point::new(top.x, top.y - cfg.label_offset_px * scale),
                    text: entry.map(|e| e.name.clone()).unwrap_or_else(|| p.to_string()),
                    role,
                },
                style: Style {
                    color: if role.is_star() { ColorRole::Gold } else { ColorRole::White },
                    opacity: 1.0,
                    ease: 1.0,
                },
            });
        }
    }

    for (defender, target) in &state.links {
        match (anchors.get(defender), anchors.get(target)) {
            (Some(&from), Some(&to)) => court_cmds.push(RenderCommand {
                layer: Layer::CourtOverlay,
                player: Some(defender.clone()),
                primitive: Primitive::Link {
                    from,
                    to,
                    width: cfg.link_width_px,
                },
                style: Style {
                    color: ColorRole::Link,
                    opacity: cfg.shield_opacity,
                    ease: 1.0,
                },
            }),
            _ => {
                for p in [defender, target] {
                    if !anchors.contains_key(p) {
                        missing.insert(p.clone());
                    }
                }
            }
        }
    }

    if !court_cmds.is_empty() {
        out.commands.push(RenderCommand {
            layer: Layer::ForegroundRestore,
            player: None,
            primitive: Primitive::ForegroundRestore,
            style: Style {
                color: ColorRole::Shade,
                opacity: 1.0,
                ease: 1.0,
            },
        });
    }
    out.commands.extend(court_cmds);
    out.commands.extend(labels);
    out.commands
        .sort_by(|a, b| (a.layer, &a.player, a.primitive.code()).cmp(&(b.layer, &b.player, b.primitive.code())));
    for p in missing {
        log::warn!("frame {}: player {p} has no track box, overlay skipped", inputs.frame);
        out.warnings.push(ComposeWarning {
            frame: inputs.frame,
            player: p,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ability::build_epv_maps;
    use crate::ingest::{DefenseRecord, Keypoint, RegionId, RosterEntry, ShotRecord, TeamId};

    fn pid(s: &str) -> PlayerId {
        PlayerId::from(s)
    }

    fn roster() -> Roster {
        let mut r = Roster::default();
        for (id, team, role) in [
            ("H", "A", StarRole::Shooter),
            ("O2", "A", StarRole::None),
            ("D1", "B", StarRole::None),
            ("D2", "B", StarRole::Defender),
        ] {
            r.insert(
                pid(id),
                RosterEntry {
                    name: format!("name {id}"),
                    team: TeamId::from(team),
                    role,
                },
            );
        }
        r
    }

    struct Fixture {
        partition: RegionPartition,
        maps: BTreeMap<PlayerId, EpvMap>,
        league: LeagueAverages,
        defense: DefenseTable,
    }

    impl Fixture {
        fn new() -> Self {
            let partition = RegionPartition::nba_default();
            // handler: 4 of 10 from the left corner
            let shots: Vec<ShotRecord> = (0..10)
                .map(|i| ShotRecord {
                    player: pid("H"),
                    position: Point::new(3.0, 1.5),
                    made: i < 4,
                    points: 3,
                })
                .collect();
            let maps = build_epv_maps(&shots, &partition).unwrap();
            let league = LeagueAverages::from_shots(&shots, &partition).unwrap();
            let defense = DefenseTable::from_records(&[DefenseRecord {
                player: pid("D2"),
                region: RegionId::from("corner3_left"),
                diff_percent: -3.6,
            }]);
            Self {
                partition,
                maps,
                league,
                defense,
            }
        }

        fn ctx(&self) -> AbilityContext<'_> {
            AbilityContext {
                partition: &self.partition,
                epv_maps: &self.maps,
                league: &self.league,
                defense: &self.defense,
            }
        }
    }

    fn boxes() -> BTreeMap<PlayerId, BoundingBox> {
        BTreeMap::from([
            (pid("H"), BoundingBox::new(100.0, 200.0, 60.0, 180.0)),
            (pid("O2"), BoundingBox::new(400.0, 200.0, 60.0, 180.0)),
            (pid("D1"), BoundingBox::new(700.0, 200.0, 60.0, 180.0)),
            (pid("D2"), BoundingBox::new(180.0, 200.0, 60.0, 180.0)),
        ])
    }

    fn court() -> FrameSamples {
        FrameSamples {
            ball: Some(Point::new(3.0, 1.5)),
            ball_height: None,
            players: BTreeMap::from([
                (pid("H"), Point::new(3.0, 1.5)),
                (pid("O2"), Point::new(20.0, 25.0)),
                (pid("D1"), Point::new(30.0, 40.0)),
                (pid("D2"), Point::new(7.0, 1.5)),
            ]),
        }
    }

    fn primitives<'a>(f: &'a ComposedFrame, player: &str) -> Vec<&'a Primitive> {
        f.commands
            .iter()
            .filter(|c| c.player.as_ref().map(|p| p.as_str()) == Some(player))
            .map(|c| &c.primitive)
            .collect()
    }

    #[test]
    fn feet_anchor_rules() {
        let b = BoundingBox::new(90.0, 300.0, 40.0, 110.0);
        assert_eq!(feet_anchor(&b, None, 0.3), Point::new(110.0, 410.0));
        let mut pose = PoseKeypoints {
            frame: 0,
            player: pid("H"),
            joints: BTreeMap::from([
                (Joint::LeftFoot, Keypoint { point: Point::new(100.0, 400.0), confidence: 0.9 }),
                (Joint::RightFoot, Keypoint { point: Point::new(120.0, 400.0), confidence: 0.9 }),
            ]),
        };
        assert_eq!(feet_anchor(&b, Some(&pose), 0.3), Point::new(110.0, 400.0));
        pose.joints.get_mut(&Joint::RightFoot).unwrap().confidence = 0.1;
        assert_eq!(feet_anchor(&b, Some(&pose), 0.3), Point::new(110.0, 410.0));
    }

    #[test]
    fn ring_scale_arithmetic() {
        let cfg = OverlayConfig::default();
        let r = RingSpec::new(Point::default(), 1.2, 1.0, &cfg);
        assert!((r.value_radius - (18.0 + 0.4 * 30.0)).abs() < 1e-12);
        assert!((r.color_position - 0.4).abs() < 1e-12);
        assert_eq!(RingSpec::new(Point::default(), 0.0, 1.0, &cfg).value_radius, 18.0);
        assert_eq!(RingSpec::new(Point::default(), 3.0, 1.0, &cfg).value_radius, 48.0);
    }

    #[test]
    fn shield_arithmetic() {
        let cfg = OverlayConfig::default();
        assert!((arc_fraction(4.0, 12.0) - 8.0 / 12.0).abs() < 1e-12);
        assert_eq!(arc_fraction(13.0, 12.0), 0.0);
        assert_eq!(arc_fraction(-1.0, 12.0), 1.0);
        assert!((shield_thickness(-3.6, 1.0, &cfg) - 7.2).abs() < 1e-12);
        assert_eq!(shield_thickness(2.0, 1.0, &cfg), 0.0);
        let s = ShieldSpec::new(Point::new(0.0, 0.0), Point::new(3.0, 4.0), -1.0, 0.0, 1.0, &cfg);
        assert!((s.direction.x - 0.6).abs() < 1e-15 && (s.direction.y - 0.8).abs() < 1e-15);
    }

    #[test]
    fn empty_state_only_darkens() {
        let fx = Fixture::new();
        let r = roster();
        let state = GameStateFrame::from_parts(0, None, None, None, BTreeSet::new(), BTreeSet::new(), &r);
        let b = boxes();
        let inputs = FrameInputs {
            frame: 0,
            boxes: &b,
            poses: None,
            court: None,
            state: &state,
            gaze: None,
        };
        let f = compose_frame(&inputs, &fx.ctx(), &r, &OverlayConfig::default());
        assert_eq!(f.commands.len(), 1);
        assert_eq!(f.commands[0].primitive, Primitive::BackgroundDarken);
    }

    #[test]
    fn handler_only_gets_spotlight_ring_label() {
        let fx = Fixture::new();
        let r = roster();
        let state = GameStateFrame::from_parts(3, Some(TeamId::from("A")), Some(pid("H")), None, BTreeSet::new(), BTreeSet::new(), &r);
        let (b, c) = (boxes(), court());
        let inputs = FrameInputs {
            frame: 3,
            boxes: &b,
            poses: None,
            court: Some(&c),
            state: &state,
            gaze: None,
        };
        let f = compose_frame(&inputs, &fx.ctx(), &r, &OverlayConfig::default());
        let h = primitives(&f, "H");
        assert_eq!(h.len(), 3);
        assert!(matches!(h[0], Primitive::Spotlight { .. }));
        let Primitive::OffenseRing(ring) = h[1] else { panic!("{h:?}") };
        assert!((ring.epv - 1.2).abs() < 1e-12);
        assert!((ring.color_position - 0.4).abs() < 1e-12);
        assert!(matches!(h[2], Primitive::NameLabel { .. }));
        let spot = f.commands.iter().find(|c| matches!(c.primitive, Primitive::Spotlight { .. })).unwrap();
        assert_eq!(spot.style.color, ColorRole::White);
        let label = f.commands.iter().find(|c| c.layer == Layer::Label).unwrap();
        assert_eq!(label.style.color, ColorRole::Gold);
        assert!(f.commands.windows(2).all(|w| w[0].layer <= w[1].layer));
        assert!(f.commands.iter().any(|c| c.primitive == Primitive::ForegroundRestore));
    }

    #[test]
    fn key_defender_shield_and_link() {
        let fx = Fixture::new();
        let r = roster();
        let state = GameStateFrame::from_parts(
            3,
            Some(TeamId::from("A")),
            Some(pid("H")),
            None,
            BTreeSet::new(),
            BTreeSet::from([pid("D2")]),
            &r,
        );
        let (b, c) = (boxes(), court());
        let inputs = FrameInputs {
            frame: 3,
            boxes: &b,
            poses: None,
            court: Some(&c),
            state: &state,
            gaze: None,
        };
        let f = compose_frame(&inputs, &fx.ctx(), &r, &OverlayConfig::default());
        let d = primitives(&f, "D2");
        let shield = d
            .iter()
            .find_map(|p| match p {
                Primitive::DefenseShield(s) => Some(*s),
                _ => None,
            })
            .unwrap();
        assert!((shield.arc_fraction - 8.0 / 12.0).abs() < 1e-12);
        assert!((shield.thickness - 3.6 * 2.0).abs() < 1e-12);
        assert_eq!(shield.direction, Point::new(-1.0, 0.0));
        assert!(d.iter().any(|p| matches!(p, Primitive::Link { .. })));
        assert!(d.iter().any(|p| matches!(p, Primitive::Highlight { .. })));
        assert!(!d.iter().any(|p| matches!(p, Primitive::NameLabel { .. })));
    }

    #[test]
    fn missing_track_warns_and_skips() {
        let fx = Fixture::new();
        let r = roster();
        let state = GameStateFrame::from_parts(3, Some(TeamId::from("A")), Some(pid("H")), None, BTreeSet::new(), BTreeSet::new(), &r);
        let mut b = boxes();
        b.remove(&pid("H"));
        let inputs = FrameInputs {
            frame: 3,
            boxes: &b,
            poses: None,
            court: None,
            state: &state,
            gaze: None,
        };
        let f = compose_frame(&inputs, &fx.ctx(), &r, &OverlayConfig::default());
        assert_eq!(f.commands.len(), 1);
        assert_eq!(f.warnings, vec![ComposeWarning { frame: 3, player: pid("H") }]);
    }

    #[test]
    fn open_spotlight_respects_filter() {
        let fx = Fixture::new();
        let r = roster();
        let state = GameStateFrame::from_parts(
            0,
            Some(TeamId::from("A")),
            Some(pid("H")),
            None,
            BTreeSet::from([pid("O2")]),
            BTreeSet::new(),
            &r,
        );
        let b = boxes();
        let gaze = GazeOutput {
            levels: state.importance.clone(),
            ..Default::default()
        };
        let inputs = FrameInputs {
            frame: 0,
            boxes: &b,
            poses: None,
            court: None,
            state: &state,
            gaze: Some(&gaze),
        };
        let f = compose_frame(&inputs, &fx.ctx(), &r, &OverlayConfig::default());
        assert!(!primitives(&f, "O2").iter().any(|p| matches!(p, Primitive::Spotlight { .. })));
        assert!(primitives(&f, "H").iter().any(|p| matches!(p, Primitive::Spotlight { .. })));
    }

    proptest::proptest! {
        #[test]
        fn ring_monotone(a in 0.0f64..3.0, b in 0.0f64..3.0, s in 0.1f64..3.0) {
            let cfg = OverlayConfig::default();
            let (ra, rb) = (RingSpec::new(Point::default(), a, s, &cfg), RingSpec::new(Point::default(), b, s, &cfg));
            if a < b {
                proptest::prop_assert!(ra.value_radius < rb.value_radius);
                proptest::prop_assert!(ra.color_position < rb.color_position);
            }
        }

        #[test]
        fn shield_monotone(d1 in -20.0f64..20.0, d2 in -20.0f64..20.0, x1 in 0.0f64..20.0, x2 in 0.0f64..20.0) {
            let cfg = OverlayConfig::default();
            if d1 <= d2 {
                proptest::prop_assert!(shield_thickness(d1, 1.0, &cfg) >= shield_thickness(d2, 1.0, &cfg));
            }
            if x1 <= x2 {
                proptest::prop_assert!(arc_fraction(x1, 12.0) >= arc_fraction(x2, 12.0));
            }
            let f = arc_fraction(x1, 12.0);
            proptest::prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}
