//! CSV and JSON serialization of paths and reports.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::timechange::SenilePath;
use crate::walk::WalkPath;

fn position_headers(d: usize) -> impl Iterator<Item = String> {
    (1..=d).map(|i| format!("x{i}"))
}

/// Writes time-changed paths, one row per step. A leading `path` column
/// numbers the paths when more than one is given.
pub fn write_walk_csv<W: Write>(out: W, paths: &[WalkPath]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    let Some(first) = paths.first() else {
        return Ok(());
    };
    let many = paths.len() > 1;
    let mut header: Vec<String> = Vec::new();
    if many {
        header.push("path".into());
    }
    header.extend(["step_index", "axis", "sign", "T", "L"].map(String::from));
    header.extend(position_headers(first.dimension));
    csv.write_record(&header)?;
    for (p, path) in paths.iter().enumerate() {
        for m in 1..=path.len() {
            let step = path.step(m);
            let mut row: Vec<String> = Vec::with_capacity(header.len());
            if many {
                row.push(p.to_string());
            }
            row.push(m.to_string());
            row.push((step.direction.axis() + 1).to_string());
            row.push(step.direction.sign().to_string());
            row.push(step.time.to_string());
            row.push(step.length.to_string());
            row.extend(path.position(m).iter().map(i64::to_string));
            csv.write_record(&row)?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Writes senile paths, one row per unit time `n = 0..=N`.
pub fn write_senile_csv<W: Write>(out: W, paths: &[SenilePath]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    let Some(first) = paths.first() else {
        return Ok(());
    };
    let many = paths.len() > 1;
    let mut header: Vec<String> = Vec::new();
    if many {
        header.push("path".into());
    }
    header.push("n".into());
    header.extend(position_headers(first.dimension));
    csv.write_record(&header)?;
    for (p, path) in paths.iter().enumerate() {
        for n in 0..=path.horizon() {
            let mut row: Vec<String> = Vec::with_capacity(header.len());
            if many {
                row.push(p.to_string());
            }
            row.push(n.to_string());
            row.extend(path.position(n).iter().map(i64::to_string));
            csv.write_record(&row)?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Writes one JSON object per line.
pub fn write_json_lines<W: Write, T: Serialize>(mut out: W, records: &[T]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes records with scalar fields as a CSV table.
pub fn write_csv_records<W: Write, T: Serialize>(out: W, records: &[T]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    for r in records {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{Direction, WalkKind};

    #[test]
    fn walk_csv_layout() {
        let d = |a| Direction::new(a, 2).unwrap();
        let path = WalkPath::from_primitives(WalkKind::Reinforced, 2, &[(d(1), 3), (d(-2), 2)]);
        let mut buf = Vec::new();
        write_walk_csv(&mut buf, &[path]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step_index,axis,sign,T,L,x1,x2\n1,1,1,3,1,1,0\n2,2,-1,2,0,1,0\n"
        );
    }

    #[test]
    fn senile_csv_layout() {
        let d = |a| Direction::new(a, 1).unwrap();
        let path = WalkPath::from_primitives(WalkKind::Persistent, 1, &[(d(1), 2)]);
        let s = crate::timechange::senile_from_timechange(&path, 2).unwrap();
        let mut buf = Vec::new();
        write_senile_csv(&mut buf, &[s.clone(), s]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "path,n,x1\n0,0,0\n0,1,1\n0,2,2\n1,0,0\n1,1,1\n1,2,2\n"
        );
    }
}
