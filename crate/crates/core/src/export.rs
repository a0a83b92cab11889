//! Trajectory CSV and orbit SVG files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// Header `t,m_<name>...,U_<name>...`; the `U` columns appear when utilities were recorded.
pub fn trajectory_header(traj: &Trajectory) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(traj.bidders.iter().map(|b| format!("m_{b}")));
    if traj.utilities.is_some() {
        h.extend(traj.bidders.iter().map(|b| format!("U_{b}")));
    }
    h
}

/// Writes one row per sample; floats use the shortest exact representation.
pub fn write_trajectory_csv_to<W: std::io::Write>(traj: &Trajectory, out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(traj))?;
    let mut row = Vec::with_capacity(1 + 2 * traj.dim());
    for k in 0..traj.len() {
        row.clear();
        row.push(traj.times[k].to_string());
        row.extend(traj.states[k].iter().map(f64::to_string));
        if let Some(u) = &traj.utilities {
            row.extend(u[k].iter().map(f64::to_string));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trajectory_csv_to(traj, std::io::BufWriter::new(file)).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

/// Parses a file written by [`write_trajectory_csv`].
pub fn read_trajectory_csv_from<R: std::io::Read>(input: R, source: &str) -> Result<Trajectory> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| Error::Parse(format!("{source}: {e}")))?.clone();
    if header.get(0) != Some("t") {
        return Err(Error::Parse(format!("{source}: first column must be 't'")));
    }
    let names: Vec<String> = header.iter().skip(1).filter_map(|h| h.strip_prefix("m_")).map(str::to_string).collect();
    let n = names.len();
    let with_u = match header.len() {
        l if l == 1 + n => false,
        l if l == 1 + 2 * n => {
            for (k, name) in names.iter().enumerate() {
                if header.get(1 + n + k) != Some(format!("U_{name}").as_str()) {
                    return Err(Error::Parse(format!("{source}: column {} should be 'U_{name}'", 2 + n + k)));
                }
            }
            true
        }
        _ => return Err(Error::Parse(format!("{source}: header must be t, m_* columns and optional matching U_* columns"))),
    };
    let mut traj = Trajectory::new(names);
    let mut utilities = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{source}: {e}")))?;
        let vals: Vec<f64> = rec
            .iter()
            .enumerate()
            .map(|(c, s)| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("{source}: row {}, column {}: '{s}' is not a number", line + 2, c + 1)))
            })
            .collect::<Result<_>>()?;
        if vals.len() != header.len() {
            return Err(Error::Parse(format!("{source}: row {} has {} fields, expected {}", line + 2, vals.len(), header.len())));
        }
        traj.times.push(vals[0]);
        traj.states.push(vals[1..=n].to_vec());
        if with_u {
            utilities.push(vals[1 + n..].to_vec());
        }
    }
    if with_u {
        traj.utilities = Some(utilities);
    }
    Ok(traj)
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_trajectory_csv_from(std::io::BufReader::new(file), &path.display().to_string())
}

/// SVG document with one polyline and two axes; the view box hugs the data
/// with a 5% margin and the y axis points up.
pub fn orbit_svg(path2d: &[[f64; 2]]) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in path2d.iter().filter(|p| p[0].is_finite() && p[1].is_finite()) {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    // A degenerate extent still needs a visible box.
    let w = if x1 > x0 { x1 - x0 } else { 1.0 };
    let h = if y1 > y0 { y1 - y0 } else { 1.0 };
    let (mx, my) = (0.05 * w, 0.05 * h);
    let (vx, vy, vw, vh) = (x0 - mx, -(y1 + my), w + 2.0 * mx, h + 2.0 * my);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx} {vy} {vw} {vh}" preserveAspectRatio="xMidYMid meet">"#);
    let _ = writeln!(
        s,
        r#"  <g stroke="gray" stroke-width="1" vector-effect="non-scaling-stroke"><line x1="{x0}" y1="{}" x2="{x1}" y2="{}" vector-effect="non-scaling-stroke"/><line x1="{x0}" y1="{}" x2="{x0}" y2="{}" vector-effect="non-scaling-stroke"/></g>"#,
        -y0,
        -y0,
        -y0,
        -y1
    );
    let points: Vec<String> = path2d.iter().map(|p| format!("{},{}", p[0], -p[1])).collect();
    let _ = writeln!(
        s,
        r#"  <polyline fill="none" stroke="black" stroke-width="1" vector-effect="non-scaling-stroke" points="{}"/>"#,
        points.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

pub fn write_orbit_svg(path2d: &[[f64; 2]], path: &Path) -> Result<()> {
    fs::write(path, orbit_svg(path2d)).map_err(|e| Error::io(path, e))
}

/// `(x, y, width, height)` of the view box in an SVG produced by [`orbit_svg`].
pub fn svg_view_box(svg: &str) -> Option<[f64; 4]> {
    let start = svg.find("viewBox=\"")? + 9;
    let end = start + svg[start..].find('"')?;
    let v: Vec<f64> = svg[start..end].split_whitespace().filter_map(|x| x.parse().ok()).collect();
    (v.len() == 4).then(|| [v[0], v[1], v[2], v[3]])
}
