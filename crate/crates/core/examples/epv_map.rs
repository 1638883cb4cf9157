//! Region EPV maps from shot records, and the EPV / DIFF% / DIST lookups the
//! overlays use.

use hoopvis::ability::{build_epv_maps, diff_at, dist, epv_at, DefenseTable, RegionPartition};
use hoopvis::geometry::Point;
use hoopvis::ingest::{DefenseRecord, PlayerId, RegionId, ShotRecord};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let partition = RegionPartition::nba_default();
    let shot = |x, y, made, v| ShotRecord {
        player: PlayerId::new("P1"),
        position: Point::new(x, y),
        made,
        points: v,
    };
    // 4 of 10 from the left corner three
    let mut shots: Vec<ShotRecord> = (0..10).map(|i| shot(2.0, 1.5, i < 4, 3)).collect();
    shots.extend((0..4).map(|i| shot(5.0, 25.0, i % 2 == 0, 2)));
    let maps = build_epv_maps(&shots, &partition)?;
    let map = &maps[&PlayerId::new("P1")];
    for (region, e) in &map.regions {
        let tag = if e.is_default { " (league)" } else { "" };
        println!("{:<18} {:>2}/{:<2} EPV {:.3}{tag}", region.0, e.makes, e.attempts, e.epv);
    }
    println!("EPV at the left corner: {}", epv_at(map, Point::new(2.0, 1.5), &partition));

    let table = DefenseTable::from_records(&[DefenseRecord {
        player: PlayerId::new("D1"),
        region: RegionId::from("restricted_area"),
        diff_percent: -4.5,
    }]);
    let d = diff_at(&table, &PlayerId::new("D1"), Point::new(6.0, 25.0), &partition);
    println!("DIFF% near the rim: {d:?}");
    println!("DIST: {:.2} ft", dist(Point::new(6.0, 25.0), Point::new(9.0, 29.0)));
    Ok(())
}
