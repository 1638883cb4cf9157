//! Shooting-region partition of the court, per-player expected point value
//! (EPV) maps, and defender DIFF% lookups.
//!
//! Court coordinates are feet with the attacking basket on the `x = 0`
//! baseline. Region membership uses a half-open edge rule: a point on a
//! shared edge belongs to the region on its increasing-x side, then the
//! increasing-y side.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::ingest::{DefenseRecord, PlayerId, RegionId, ShotRecord, COURT_LENGTH_FT, COURT_WIDTH_FT};

pub const HOOP: Point = Point::new(5.25, 25.0);
pub const THREE_POINT_RADIUS_FT: f64 = 23.75;
/// Distance of the corner three-point lines from the sidelines.
pub const CORNER_THREE_INSET_FT: f64 = 3.0;
pub const RESTRICTED_AREA_RADIUS_FT: f64 = 4.0;
const PAINT_LENGTH_FT: f64 = 19.0;
const PAINT_HALF_WIDTH_FT: f64 = 8.0;

#[derive(Debug, Error, PartialEq)]
pub enum AbilityError {
    #[error("shot by {player} at ({x}, {y}) lies outside every region")]
    ShotOutsideRegions { player: PlayerId, x: f64, y: f64 },
    #[error("partition line {line}: {message}")]
    PartitionFormat { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: RegionId,
    /// Points scored from this region; 0 for non-scoring areas.
    pub point_value: u8,
    pub polygon: Vec<Point>,
}

impl Region {
    /// Crossing-number test. Edges shared with a neighbour resolve to exactly
    /// one of the two polygons.
    pub fn contains(&self, p: Point) -> bool {
        let poly = &self.polygon;
        let n = poly.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            // orient by y so a shared edge evaluates identically in both polygons
            let (a, b) = if poly[i].y <= poly[j].y { (poly[i], poly[j]) } else { (poly[j], poly[i]) };
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    fn boundary_distance(&self, p: Point) -> f64 {
        let n = self.polygon.len();
        (0..n)
            .map(|i| segment_distance(p, self.polygon[i], self.polygon[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPartition {
    regions: Vec<Region>,
}

/// Points of the three-point arc between `y_from` and `y_to`, inclusive of
/// both ends, generated from a single shared table so neighbouring regions
/// use bit-identical vertices.
fn arc_table() -> Vec<Point> {
    let r = THREE_POINT_RADIUS_FT;
    let x_at = |dy: f64| HOOP.x + (r * r - dy * dy).sqrt();
    let corner_dy = HOOP.y - CORNER_THREE_INSET_FT;
    let mut ys: Vec<f64> = Vec::new();
    // y = 3 .. 17 .. 33 .. 47 with fixed breakpoints at the paint edges
    let breaks = [
        CORNER_THREE_INSET_FT,
        HOOP.y - PAINT_HALF_WIDTH_FT,
        HOOP.y + PAINT_HALF_WIDTH_FT,
        COURT_WIDTH_FT - CORNER_THREE_INSET_FT,
    ];
    let steps = [8, 12, 8];
    for k in 0..3 {
        for s in 0..steps[k] {
            ys.push(breaks[k] + (breaks[k + 1] - breaks[k]) * s as f64 / steps[k] as f64);
        }
    }
    ys.push(breaks[3]);
    debug_assert!((HOOP.y - ys[0] - corner_dy).abs() < 1e-12);
    ys.into_iter().map(|y| Point::new(x_at(y - HOOP.y), y)).collect()
}

fn arc_between(arc: &[Point], y_from: f64, y_to: f64) -> Vec<Point> {
    let (lo, hi) = (y_from.min(y_to), y_from.max(y_to));
    let mut pts: Vec<Point> = arc.iter().copied().filter(|p| p.y >= lo && p.y <= hi).collect();
    if y_from > y_to {
        pts.reverse();
    }
    pts
}

fn restricted_arc() -> Vec<Point> {
    // semicircle in front of the hoop from (x0, 29) round to (x0, 21), where x0 is the baseline
    let r = RESTRICTED_AREA_RADIUS_FT;
    let n = 12;
    let mut pts = vec![Point::new(0.0, HOOP.y + r), Point::new(HOOP.x, HOOP.y + r)];
    for k in 1..n {
        let t = std::f64::consts::PI * (0.5 - k as f64 / n as f64);
        pts.push(Point::new(HOOP.x + r * libm::cos(t), HOOP.y + r * libm::sin(t)));
    }
    pts.push(Point::new(HOOP.x, HOOP.y - r));
    pts.push(Point::new(0.0, HOOP.y - r));
    pts
}

impl RegionPartition {
    pub fn new(regions: Vec<Region>) -> Self {
        Self { regions }
    }

    /// Eleven NBA-style zones: restricted area, paint, three mid-range zones,
    /// two corner threes, three above-the-break threes, and the backcourt.
    pub fn nba_default() -> Self {
        let arc = arc_table();
        let low = HOOP.y - PAINT_HALF_WIDTH_FT; // 17
        let high = HOOP.y + PAINT_HALF_WIDTH_FT; // 33
        let c_lo = CORNER_THREE_INSET_FT;
        let c_hi = COURT_WIDTH_FT - CORNER_THREE_INSET_FT;
        let corner_x = arc[0].x;
        let arc_low = arc_between(&arc, c_lo, low);
        let arc_mid = arc_between(&arc, low, high);
        let arc_high = arc_between(&arc, high, c_hi);
        let x_low = arc_low.last().unwrap().x;
        let x_high = arc_high.first().unwrap().x;
        let half = COURT_LENGTH_FT / 2.0;
        let p = Point::new;

        let ra = restricted_arc();
        let mut paint = vec![p(0.0, low), p(PAINT_LENGTH_FT, low), p(PAINT_LENGTH_FT, high), p(0.0, high)];
        paint.extend(ra.iter().copied());
        let mut restricted = ra.clone();
        restricted.reverse();

        let mut mid_left = vec![p(0.0, c_lo)];
        mid_left.extend(arc_low.iter().copied());
        mid_left.extend([p(PAINT_LENGTH_FT, low), p(0.0, low)]);

        let mut mid_center = vec![p(PAINT_LENGTH_FT, low)];
        mid_center.extend(arc_mid.iter().copied());
        mid_center.push(p(PAINT_LENGTH_FT, high));

        let mut mid_right = vec![p(0.0, high), p(PAINT_LENGTH_FT, high)];
        mid_right.extend(arc_high.iter().copied());
        mid_right.push(p(0.0, c_hi));

        let corner_left = vec![p(0.0, 0.0), p(corner_x, 0.0), p(corner_x, c_lo), p(0.0, c_lo)];
        let corner_right = vec![p(0.0, c_hi), p(corner_x, c_hi), p(corner_x, COURT_WIDTH_FT), p(0.0, COURT_WIDTH_FT)];

        let mut atb_left = vec![p(corner_x, 0.0), p(half, 0.0), p(half, low), p(x_low, low)];
        atb_left.extend(arc_low.iter().rev().skip(1).copied());
        let mut atb_center = vec![p(x_low, low), p(half, low), p(half, high), p(x_high, high)];
        atb_center.extend(arc_mid.iter().rev().skip(1).take(arc_mid.len() - 2).copied());
        let mut atb_right = vec![p(x_high, high), p(half, high), p(half, COURT_WIDTH_FT), p(corner_x, COURT_WIDTH_FT)];
        atb_right.extend(arc_high.iter().rev().take(arc_high.len() - 1).copied());

        let backcourt = vec![p(half, 0.0), p(COURT_LENGTH_FT, 0.0), p(COURT_LENGTH_FT, COURT_WIDTH_FT), p(half, COURT_WIDTH_FT)];

        let r = |id: &str, v: u8, polygon: Vec<Point>| Region {
            id: RegionId::from(id),
            point_value: v,
            polygon,
        };
        Self::new(vec![
            r("restricted_area", 2, restricted),
            r("paint", 2, paint),
            r("mid_left", 2, mid_left),
            r("mid_center", 2, mid_center),
            r("mid_right", 2, mid_right),
            r("corner3_left", 3, corner_left),
            r("corner3_right", 3, corner_right),
            r("atb3_left", 3, atb_left),
            r("atb3_center", 3, atb_center),
            r("atb3_right", 3, atb_right),
            r("backcourt", 0, backcourt),
        ])
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, id: &RegionId) -> Option<&Region> {
        self.regions.iter().find(|r| &r.id == id)
    }

    /// The region strictly containing `p` under the half-open rule.
    pub fn locate(&self, p: Point) -> Option<&Region> {
        self.regions.iter().find(|r| r.contains(p))
    }

    /// Like [`locate`](Self::locate), but total: points on the outer court
    /// boundary or off the court fall back to the nearest region.
    pub fn locate_or_nearest(&self, p: Point) -> Option<&Region> {
        let clamped = Point::new(p.x.clamp(0.0, COURT_LENGTH_FT), p.y.clamp(0.0, COURT_WIDTH_FT));
        self.locate(clamped).or_else(|| {
            self.regions
                .iter()
                .map(|r| (r, r.boundary_distance(clamped)))
                .fold(None::<(&Region, f64)>, |best, (r, d)| match best {
                    Some((_, bd)) if bd <= d => best,
                    _ => Some((r, d)),
                })
                .map(|(r, _)| r)
        })
    }

    /// Partition file: `region,point_value,x1 y1;x2 y2;...` per line.
    pub fn parse(text: &str) -> Result<Self, AbilityError> {
        let mut regions = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| AbilityError::PartitionFormat { line: i + 1, message: m };
            let f: Vec<&str> = line.splitn(3, ',').map(str::trim).collect();
            if f.len() != 3 {
                return Err(err("expected region,point_value,vertices".into()));
            }
            let point_value: u8 = f[1].parse().map_err(|_| err(format!("bad point value {:?}", f[1])))?;
            if point_value > 3 {
                return Err(err(format!("point value {point_value} > 3")));
            }
            let mut polygon = Vec::new();
            for v in f[2].split(';') {
                let xy: Vec<&str> = v.split_whitespace().collect();
                if xy.len() != 2 {
                    return Err(err(format!("bad vertex {v:?}")));
                }
                let x: f64 = xy[0].parse().map_err(|_| err(format!("bad vertex {v:?}")))?;
                let y: f64 = xy[1].parse().map_err(|_| err(format!("bad vertex {v:?}")))?;
                polygon.push(Point::new(x, y));
            }
            if polygon.len() < 3 {
                return Err(err("polygon needs at least 3 vertices".into()));
            }
            if regions.iter().any(|r: &Region| r.id.0 == f[0]) {
                return Err(err(format!("duplicate region {}", f[0])));
            }
            regions.push(Region {
                id: RegionId::from(f[0]),
                point_value,
                polygon,
            });
        }
        Ok(Self::new(regions))
    }

    pub fn write(&self) -> String {
        let mut s = String::new();
        for r in &self.regions {
            let verts: Vec<String> = r.polygon.iter().map(|p| format!("{} {}", p.x, p.y)).collect();
            let _ = writeln!(s, "{},{},{}", r.id, r.point_value, verts.join(";"));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionEpv {
    pub attempts: u32,
    pub makes: u32,
    pub epv: f64,
    /// True when `epv` is the league fallback rather than the player's own.
    pub is_default: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpvMap {
    pub player: PlayerId,
    pub regions: BTreeMap<RegionId, RegionEpv>,
}

/// Per-region league EPV used for regions where a player has no attempts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LeagueAverages {
    by_region: BTreeMap<RegionId, f64>,
}

pub const FALLBACK_EPV: f64 = 1.0;

impl LeagueAverages {
    pub fn from_shots(shots: &[ShotRecord], partition: &RegionPartition) -> Result<Self, AbilityError> {
        let counts = aggregate(shots, partition)?;
        let by_region = partition
            .regions()
            .iter()
            .filter_map(|r| {
                let (a, m) = counts.get(&r.id).copied()?;
                (a > 0).then(|| (r.id.clone(), (m * r.point_value as u32) as f64 / a as f64))
            })
            .collect();
        Ok(Self { by_region })
    }

    pub fn from_values(by_region: BTreeMap<RegionId, f64>) -> Self {
        Self { by_region }
    }

    pub fn values(&self) -> &BTreeMap<RegionId, f64> {
        &self.by_region
    }

    pub fn epv(&self, region: &Region) -> f64 {
        if region.point_value == 0 {
            return 0.0;
        }
        self.by_region.get(&region.id).copied().unwrap_or(FALLBACK_EPV)
    }
}

fn aggregate(shots: &[ShotRecord], partition: &RegionPartition) -> Result<BTreeMap<RegionId, (u32, u32)>, AbilityError> {
    let mut counts: BTreeMap<RegionId, (u32, u32)> = BTreeMap::new();
    for s in shots {
        let region = partition.locate(s.position).ok_or_else(|| AbilityError::ShotOutsideRegions {
            player: s.player.clone(),
            x: s.position.x,
            y: s.position.y,
        })?;
        let e = counts.entry(region.id.clone()).or_default();
        e.0 += 1;
        e.1 += s.made as u32;
    }
    Ok(counts)
}

/// EPV per region for one player: field-goal percentage times the region's
/// point value. Regions without attempts take the league value.
pub fn build_epv_map(
    player: &PlayerId,
    shots: &[ShotRecord],
    partition: &RegionPartition,
    league: &LeagueAverages,
) -> Result<EpvMap, AbilityError> {
    let own: Vec<ShotRecord> = shots.iter().filter(|s| &s.player == player).cloned().collect();
    let counts = aggregate(&own, partition)?;
    let regions = partition
        .regions()
        .iter()
        .map(|r| {
            let entry = match counts.get(&r.id) {
                Some(&(attempts, makes)) if attempts > 0 => RegionEpv {
                    attempts,
                    makes,
                    epv: (makes * r.point_value as u32) as f64 / attempts as f64,
                    is_default: false,
                },
                _ => RegionEpv {
                    attempts: 0,
                    makes: 0,
                    epv: league.epv(r),
                    is_default: true,
                },
            };
            (r.id.clone(), entry)
        })
        .collect();
    Ok(EpvMap {
        player: player.clone(),
        regions,
    })
}

/// Maps for every player with at least one shot, sharing one league table.
pub fn build_epv_maps(shots: &[ShotRecord], partition: &RegionPartition) -> Result<BTreeMap<PlayerId, EpvMap>, AbilityError> {
    let league = LeagueAverages::from_shots(shots, partition)?;
    let mut players: Vec<&PlayerId> = shots.iter().map(|s| &s.player).collect();
    players.sort();
    players.dedup();
    players
        .into_iter()
        .map(|p| Ok((p.clone(), build_epv_map(p, shots, partition, &league)?)))
        .collect()
}

/// EPV at a court position. Non-scoring regions yield 0.
pub fn epv_at(map: &EpvMap, pos: Point, partition: &RegionPartition) -> f64 {
    let Some(region) = partition.locate_or_nearest(pos) else {
        return 0.0;
    };
    if region.point_value == 0 {
        return 0.0;
    }
    map.regions.get(&region.id).map(|e| e.epv).unwrap_or(0.0)
}

pub fn write_epv_maps<'a>(maps: impl IntoIterator<Item = &'a EpvMap>) -> String {
    let mut s = String::new();
    for m in maps {
        for (region, e) in &m.regions {
            let _ = writeln!(s, "{},{},{},{},{}", m.player, region, e.attempts, e.makes, e.epv);
        }
    }
    s
}

/// Read `epvmap.csv`. A region with zero attempts is marked as defaulted.
pub fn parse_epv_maps(text: &str) -> Result<BTreeMap<PlayerId, EpvMap>, AbilityError> {
    let mut maps: BTreeMap<PlayerId, EpvMap> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: &str| AbilityError::PartitionFormat {
            line: i + 1,
            message: m.to_owned(),
        };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(err("expected player,region,attempts,makes,epv"));
        }
        let attempts: u32 = f[2].parse().map_err(|_| err("bad attempts"))?;
        let makes: u32 = f[3].parse().map_err(|_| err("bad makes"))?;
        let epv: f64 = f[4].parse().map_err(|_| err("bad epv"))?;
        if makes > attempts || !(0.0..=3.0).contains(&epv) {
            return Err(err("inconsistent epv row"));
        }
        let player = PlayerId::from(f[0]);
        maps.entry(player.clone())
            .or_insert_with(|| EpvMap {
                player,
                regions: BTreeMap::new(),
            })
            .regions
            .insert(
                RegionId::from(f[1]),
                RegionEpv {
                    attempts,
                    makes,
                    epv,
                    is_default: attempts == 0,
                },
            );
    }
    Ok(maps)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DefenseTable {
    entries: BTreeMap<PlayerId, BTreeMap<RegionId, f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffLookup {
    pub diff_percent: f64,
    pub has_data: bool,
}

impl DefenseTable {
    pub fn from_records(records: &[DefenseRecord]) -> Self {
        let mut entries: BTreeMap<PlayerId, BTreeMap<RegionId, f64>> = BTreeMap::new();
        for r in records {
            entries.entry(r.player.clone()).or_default().insert(r.region.clone(), r.diff_percent);
        }
        Self { entries }
    }

    pub fn get(&self, player: &PlayerId, region: &RegionId) -> Option<f64> {
        self.entries.get(player)?.get(region).copied()
    }

    pub fn records(&self) -> Vec<DefenseRecord> {
        self.entries
            .iter()
            .flat_map(|(p, m)| {
                m.iter().map(move |(r, v)| DefenseRecord {
                    player: p.clone(),
                    region: r.clone(),
                    diff_percent: *v,
                })
            })
            .collect()
    }
}

/// DIFF% for `defender` in the region containing `pos`; 0 and flagged when absent.
pub fn diff_at(table: &DefenseTable, defender: &PlayerId, pos: Point, partition: &RegionPartition) -> DiffLookup {
    let value = partition
        .locate_or_nearest(pos)
        .and_then(|r| table.get(defender, &r.id));
    DiffLookup {
        diff_percent: value.unwrap_or(0.0),
        has_data: value.is_some(),
    }
}

/// Planar distance in feet.
pub fn dist(a: Point, b: Point) -> f64 {
    a.distance(b)
}
