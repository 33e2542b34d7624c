//! CSV and SVG emission for a finished run, and the readers used to
//! re-validate stored output.
//!
//! Every CSV starts with two `#` lines: the scenario hash and the units. The
//! column header row follows. Floats are written in shortest round-trip form,
//! so reading a file back reproduces the stored values exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compare::Snapshot;
use crate::error::{Error, Result};
use crate::profile::StepFunction;
use crate::riemann::{RiemannSolution, WaveKind};
use crate::scenario::Scenario;
use crate::tracker::{AvMode, AvSegment, EventKind, FrontRecord, History, LedgerEntry};

pub const FRONTS_CSV: &str = "fronts.csv";
pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const LEDGER_CSV: &str = "ledger.csv";
pub const SNAPSHOTS_CSV: &str = "snapshots.csv";
pub const DIAGRAM_SVG: &str = "diagram.svg";

const HASH_PREFIX: &str = "# scenario_hash=";
const UNITS: &str = "# units: t, t_* in time; x, y_* in length; rho, left, right, rho_* in vehicles per length; speed, u in length per time; dimensionless otherwise";

#[derive(Serialize, Deserialize)]
struct FrontRow {
    id: usize,
    t_event: f64,
    x: f64,
    t_death: f64,
    left: f64,
    right: f64,
    kind: String,
    speed: f64,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryRow {
    t_start: f64,
    t_end: f64,
    y_start: f64,
    speed: f64,
    u: f64,
    rho_minus: f64,
    rho_plus: f64,
    mode: String,
}

#[derive(Serialize, Deserialize)]
struct LedgerRow {
    index: usize,
    t: f64,
    kind: String,
    tv: f64,
    gamma: f64,
    tv_u: f64,
    upsilon: f64,
    waves: usize,
    delta_upsilon: f64,
}

#[derive(Serialize, Deserialize)]
struct SnapshotRow {
    t: f64,
    x_left: f64,
    x_right: f64,
    rho: f64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Validation(format!("CSV: {e}"))
}

fn write_csv<W: Write, R: Serialize>(mut w: W, hash: &str, rows: impl IntoIterator<Item = R>) -> Result<()> {
    writeln!(w, "{HASH_PREFIX}{hash}")?;
    writeln!(w, "{UNITS}")?;
    let mut cw = csv::Writer::from_writer(w);
    for row in rows {
        cw.serialize(row).map_err(csv_err)?;
    }
    cw.flush()?;
    Ok(())
}

/// Parses a CSV written by this module, returning its hash and rows.
fn read_csv<R: for<'de> Deserialize<'de>>(text: &str) -> Result<(String, Vec<R>)> {
    let hash = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix(HASH_PREFIX))
        .ok_or_else(|| Error::Validation("missing scenario hash line".into()))?
        .trim()
        .to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let rows = rdr
        .deserialize()
        .collect::<std::result::Result<Vec<R>, _>>()
        .map_err(csv_err)?;
    Ok((hash, rows))
}

pub fn write_fronts<W: Write>(w: W, hash: &str, h: &History) -> Result<()> {
    write_csv(
        w,
        hash,
        h.fronts.iter().map(|f| FrontRow {
            id: f.id,
            t_event: f.t_birth,
            x: f.x_birth,
            t_death: f.t_death,
            left: f.left,
            right: f.right,
            kind: f.kind.as_str().into(),
            speed: f.speed,
        }),
    )
}

pub fn write_trajectory<W: Write>(w: W, hash: &str, h: &History) -> Result<()> {
    write_csv(
        w,
        hash,
        h.av.iter().map(|s| TrajectoryRow {
            t_start: s.t_start,
            t_end: s.t_end,
            y_start: s.y_start,
            speed: s.speed,
            u: s.u,
            rho_minus: s.rho_minus,
            rho_plus: s.rho_plus,
            mode: s.mode.as_str().into(),
        }),
    )
}

pub fn write_ledger<W: Write>(w: W, hash: &str, h: &History) -> Result<()> {
    write_csv(
        w,
        hash,
        h.ledger.iter().map(|e| LedgerRow {
            index: e.index,
            t: e.t,
            kind: e.kind.as_str().into(),
            tv: e.tv,
            gamma: e.gamma,
            tv_u: e.tv_u,
            upsilon: e.upsilon,
            waves: e.waves,
            delta_upsilon: e.delta_upsilon,
        }),
    )
}

/// One row per constant piece; pieces are clipped to each snapshot's window.
pub fn write_snapshots<W: Write>(w: W, hash: &str, snaps: &[Snapshot]) -> Result<()> {
    let mut rows = Vec::new();
    for s in snaps {
        let (lo, hi) = s.window;
        let jumps = s.profile.jumps();
        for (i, &rho) in s.profile.values().iter().enumerate() {
            let a = if i == 0 { f64::NEG_INFINITY } else { jumps[i - 1] }.max(lo);
            let b = jumps.get(i).copied().unwrap_or(f64::INFINITY).min(hi);
            if a < b {
                rows.push(SnapshotRow {
                    t: s.t,
                    x_left: a,
                    x_right: b,
                    rho,
                });
            }
        }
    }
    write_csv(w, hash, rows)
}

pub fn read_snapshots(text: &str) -> Result<Vec<Snapshot>> {
    let (hash, rows) = read_csv::<SnapshotRow>(text)?;
    let mut out: Vec<Snapshot> = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let t = rows[i].t;
        let mut j = i;
        while j < rows.len() && rows[j].t == t {
            j += 1;
        }
        let group = &rows[i..j];
        let jumps = group.iter().skip(1).map(|r| r.x_left).collect();
        let values = group.iter().map(|r| r.rho).collect();
        out.push(Snapshot {
            scenario_hash: hash.clone(),
            t,
            profile: StepFunction::new(jumps, values)?,
            window: (group[0].x_left, group[group.len() - 1].x_right),
        });
        i = j;
    }
    Ok(out)
}

/// Snapshot times requested by the scenario, or `t_end` alone.
pub fn snapshot_times(s: &Scenario) -> Vec<f64> {
    if s.snapshots.is_empty() {
        vec![s.t_end]
    } else {
        s.snapshots.clone()
    }
}

/// Writes the four CSV files, plus the diagram when the scenario or `diagram`
/// asks for it, and returns the paths written.
pub fn write_run(dir: &Path, scenario: &Scenario, h: &History, diagram: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let hash = scenario.hash();
    let snaps = snapshot_times(scenario)
        .into_iter()
        .map(|t| Snapshot::from_history(h, t, &hash))
        .collect::<Result<Vec<_>>>()?;
    let mut written = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(&mut Vec<u8>) -> Result<()>| -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        let path = dir.join(name);
        fs::write(&path, buf)?;
        written.push(path);
        Ok(())
    };
    emit(FRONTS_CSV, &|b| write_fronts(b, &hash, h))?;
    emit(TRAJECTORY_CSV, &|b| write_trajectory(b, &hash, h))?;
    emit(LEDGER_CSV, &|b| write_ledger(b, &hash, h))?;
    emit(SNAPSHOTS_CSV, &|b| write_snapshots(b, &hash, &snaps))?;
    if scenario.diagram || diagram {
        emit(DIAGRAM_SVG, &|b| Ok(b.write_all(diagram_svg(h, &hash).as_bytes())?))?;
    }
    Ok(written)
}

fn read_file(dir: &Path, name: &str, hash: &str) -> Result<String> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    let stored = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix(HASH_PREFIX))
        .map(str::trim);
    if stored != Some(hash) {
        return Err(Error::SnapshotMismatch(format!(
            "{} was not produced by this scenario (hash {:?}, expected {hash})",
            path.display(),
            stored.unwrap_or("missing")
        )));
    }
    Ok(text)
}

/// Rebuilds a [`History`] from stored CSVs and the scenario that produced them.
pub fn read_history(dir: &Path, scenario: &Scenario) -> Result<History> {
    let hash = scenario.hash();
    let grids = scenario.grids()?;
    let stats = grids.stats();
    let profile = grids.quantize_profile(&scenario.initial_profile()?)?;
    let values = profile.values();

    let (_, fronts) = read_csv::<FrontRow>(&read_file(dir, FRONTS_CSV, &hash)?)?;
    let fronts = fronts
        .into_iter()
        .map(|r| {
            Ok(FrontRecord {
                id: r.id,
                kind: WaveKind::parse(&r.kind)
                    .ok_or_else(|| Error::Validation(format!("front {}: unknown kind {:?}", r.id, r.kind)))?,
                left: r.left,
                right: r.right,
                speed: r.speed,
                t_birth: r.t_event,
                x_birth: r.x,
                t_death: r.t_death,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (_, segs) = read_csv::<TrajectoryRow>(&read_file(dir, TRAJECTORY_CSV, &hash)?)?;
    let av = segs
        .into_iter()
        .map(|r| {
            Ok(AvSegment {
                t_start: r.t_start,
                t_end: r.t_end,
                y_start: r.y_start,
                speed: r.speed,
                u: r.u,
                rho_minus: r.rho_minus,
                rho_plus: r.rho_plus,
                mode: AvMode::parse(&r.mode)
                    .ok_or_else(|| Error::Validation(format!("unknown AV mode {:?}", r.mode)))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if av.is_empty() {
        return Err(Error::Validation("trajectory has no segments".into()));
    }

    let (_, entries) = read_csv::<LedgerRow>(&read_file(dir, LEDGER_CSV, &hash)?)?;
    let ledger = entries
        .into_iter()
        .map(|r| {
            Ok(LedgerEntry {
                index: r.index,
                t: r.t,
                kind: EventKind::parse(&r.kind)
                    .ok_or_else(|| Error::Validation(format!("unknown event kind {:?}", r.kind)))?,
                tv: r.tv,
                gamma: r.gamma,
                tv_u: r.tv_u,
                upsilon: r.upsilon,
                waves: r.waves,
                delta_upsilon: r.delta_upsilon,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(History {
        model: grids.model().clone(),
        nu: grids.nu(),
        eps_rho: stats.eps_rho,
        delta_rho: stats.delta_rho,
        delta_u: stats.delta_u,
        control: grids.quantize_control(&scenario.control_signal()?),
        t_end: scenario.t_end,
        far_left: values[0],
        far_right: values[values.len() - 1],
        fronts,
        av,
        ledger,
    })
}

/// x–t diagram: time upward, fronts as segments, the AV path on top with its
/// undercompressive stretches highlighted.
pub fn diagram_svg(h: &History, hash: &str) -> String {
    const W: f64 = 800.0;
    const H: f64 = 600.0;
    const M: f64 = 50.0;
    let (mut lo, mut hi) = h.spatial_extent();
    let pad = 0.05 * (hi - lo).max(1.0);
    lo -= pad;
    hi += pad;
    let t_end = if h.t_end > 0.0 { h.t_end } else { 1.0 };
    let px = |x: f64| M + (x - lo) / (hi - lo) * (W - 2.0 * M);
    let py = |t: f64| H - M - t / t_end * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, "<!-- scenario_hash={hash} -->");
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        W - 2.0 * M,
        H - 2.0 * M
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">x</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(s, r#"<text x="15" y="{}" font-size="12">t</text>"#, H / 2.0);
    let _ = writeln!(s, r#"<text x="{M}" y="{}" font-size="10">{lo:.3}</text>"#, H - 35.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{hi:.3}</text>"#,
        W - M,
        H - 35.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{t_end}</text>"#,
        M - 4.0,
        M + 4.0
    );

    let _ = writeln!(s, r#"<g stroke-linecap="round">"#);
    for f in &h.fronts {
        let t1 = f.t_death.min(h.t_end);
        let (color, width) = match f.kind {
            WaveKind::Shock => ("#c0392b", 1.0),
            WaveKind::Rarefaction => ("#2e86c1", 0.5),
            WaveKind::Undercompressive => ("#27ae60", 1.0),
        };
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{color}" stroke-width="{width}"/>"#,
            px(f.x_birth),
            py(f.t_birth),
            px(f.position(t1)),
            py(t1)
        );
    }
    let _ = writeln!(s, "</g>");

    let path: Vec<String> = h
        .av_trajectory()
        .iter()
        .map(|&(t, y)| format!("{:.3},{:.3}", px(y), py(t)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
        path.join(" ")
    );
    for seg in h.av.iter().filter(|seg| seg.mode == AvMode::Undercompressive) {
        let _ = writeln!(
            s,
            r##"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#27ae60" stroke-width="3"/>"##,
            px(seg.y_start),
            py(seg.t_start),
            px(seg.position(seg.t_end)),
            py(seg.t_end)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Wave pattern of a Riemann solution in the unit `x–t` square: shocks and
/// the undercompressive jump as single rays, fans as ray bundles, and the AV
/// as a thick ray.
pub fn riemann_svg(sol: &RiemannSolution<f64>) -> String {
    const S: f64 = 400.0;
    const M: f64 = 30.0;
    let reach = sol
        .waves
        .iter()
        .flat_map(|w| [w.speed_lo.abs(), w.speed_hi.abs()])
        .chain(sol.av_speed.map(f64::abs))
        .fold(0.05f64, f64::max)
        * 1.2;
    let ray = |speed: f64| {
        let x = M + (0.5 + 0.5 * speed / reach) * (S - 2.0 * M);
        (format!("{:.3}", M + 0.5 * (S - 2.0 * M)), format!("{x:.3}"))
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{S}" height="{S}" viewBox="0 0 {S} {S}">"#
    );
    let _ = writeln!(s, r#"<rect width="{S}" height="{S}" fill="white"/>"#);
    let bottom = S - M;
    for w in &sol.waves {
        let (color, width, rays) = match w.kind {
            WaveKind::Shock => ("#c0392b", 1.5, 1),
            WaveKind::Undercompressive => ("#27ae60", 2.5, 1),
            WaveKind::Rarefaction if w.speed_lo == w.speed_hi => ("#2e86c1", 1.0, 1),
            WaveKind::Rarefaction => ("#2e86c1", 0.7, 9),
        };
        for k in 0..rays {
            let theta = if rays == 1 { 0.0 } else { k as f64 / (rays - 1) as f64 };
            let (x0, x1) = ray(w.speed_lo + theta * (w.speed_hi - w.speed_lo));
            let _ = writeln!(
                s,
                r#"<line x1="{x0}" y1="{bottom}" x2="{x1}" y2="{M}" stroke="{color}" stroke-width="{width}"/>"#
            );
        }
    }
    if let Some(v) = sol.av_speed {
        let (x0, x1) = ray(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x0}" y1="{bottom}" x2="{x1}" y2="{M}" stroke="black" stroke-width="2" stroke-dasharray="6 3"/>"#
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{M}" y="{}" font-size="11">rho_l = {}, rho_r = {}</text>"#,
        S - 8.0,
        sol.left,
        sol.right
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::DEMO;

    #[test]
    fn csv_round_trip_rebuilds_the_history() {
        let sc = Scenario::parse(DEMO).unwrap();
        let h = sc.solve().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_run(dir.path(), &sc, &h, false).unwrap();
        assert_eq!(files.len(), 4);
        let back = read_history(dir.path(), &sc).unwrap();
        assert_eq!(back.fronts, h.fronts);
        assert_eq!(back.av, h.av);
        assert_eq!(back.ledger, h.ledger);
        assert_eq!(back.control, h.control);
        assert_eq!((back.far_left, back.far_right), (h.far_left, h.far_right));
    }

    #[test]
    fn snapshots_round_trip() {
        let sc = Scenario::parse(DEMO).unwrap();
        let h = sc.solve().unwrap();
        let hash = sc.hash();
        let snaps: Vec<Snapshot> = [1.0, 3.0]
            .iter()
            .map(|&t| Snapshot::from_history(&h, t, &hash).unwrap())
            .collect();
        let mut buf = Vec::new();
        write_snapshots(&mut buf, &hash, &snaps).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(&format!("{HASH_PREFIX}{hash}\n# units")));
        assert_eq!(read_snapshots(&text).unwrap(), snaps);
    }

    #[test]
    fn foreign_output_is_rejected() {
        let sc = Scenario::parse(DEMO).unwrap();
        let h = sc.solve().unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_run(dir.path(), &sc, &h, false).unwrap();
        let mut other = sc.clone();
        other.t_end = 2.0;
        assert!(matches!(
            read_history(dir.path(), &other),
            Err(Error::SnapshotMismatch(_))
        ));
    }

    #[test]
    fn diagram_is_deterministic_svg() {
        let sc = Scenario::parse(DEMO).unwrap();
        let h = sc.solve().unwrap();
        let a = diagram_svg(&h, "x");
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a, diagram_svg(&sc.solve().unwrap(), "x"));
    }
}
