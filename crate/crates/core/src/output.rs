//! CSV writers. Floats are written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::grid::GridField;
use crate::solver::{FrontCloud, SandwichReport};

fn header(n: usize, tail: Option<&str>) -> String {
    let mut h = String::from("t");
    for i in 1..=n {
        h.push_str(&format!(",x{i}"));
    }
    if let Some(t) = tail {
        h.push(',');
        h.push_str(t);
    }
    h
}

/// `t,x1,...,xn,u`, one row per node in row-major order.
pub fn write_snapshot<W: Write>(mut w: W, grid: &GridField) -> Result<()> {
    writeln!(w, "{}", header(grid.dim(), Some("u")))?;
    let mut x = vec![0.0; grid.dim()];
    let t = grid.time();
    for (flat, u) in grid.values().iter().enumerate() {
        grid.coords_into(flat, &mut x);
        write!(w, "{t:.16e}")?;
        for v in &x {
            write!(w, ",{v:.16e}")?;
        }
        writeln!(w, ",{u:.16e}")?;
    }
    Ok(())
}

/// `t,x1,...,xn`, one row per front point.
pub fn write_front<W: Write>(mut w: W, front: &FrontCloud) -> Result<()> {
    writeln!(w, "{}", header(front.dim, None))?;
    let t = front.time;
    for p in &front.points {
        write!(w, "{t:.16e}")?;
        for v in p {
            write!(w, ",{v:.16e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// One row per compared step.
pub fn write_sandwich<W: Write>(mut w: W, report: &SandwichReport) -> Result<()> {
    writeln!(w, "t,singular,regular,transitional,ordering_violation,envelope_inversion,coincidence_gap")?;
    for s in &report.steps {
        writeln!(
            w,
            "{:.16e},{},{},{},{:.16e},{:.16e},{:.16e}",
            s.time, s.singular, s.regular, s.transitional, s.max_ordering_violation, s.max_envelope_inversion, s.max_coincidence_gap
        )?;
    }
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `snapshot_NNNN.csv` and `front_NNNN.csv` into `dir`.
pub fn write_snapshot_pair(dir: &Path, index: usize, grid: &GridField) -> Result<()> {
    let mut w = create(&dir.join(format!("snapshot_{index:04}.csv")))?;
    write_snapshot(&mut w, grid)?;
    w.flush()?;
    let mut w = create(&dir.join(format!("front_{index:04}.csv")))?;
    write_front(&mut w, &crate::solver::extract_front(grid, 0.0))?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainBox;

    #[test]
    fn snapshot_rows_round_trip_exactly() {
        let g = GridField::from_fn(DomainBox::cube(2, 1.0), vec![3, 4], 0.1, |x| Ok(x[0] / 3.0 - x[1])).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x1,x2,u"));
        let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), 12);
        for (row, u) in rows.iter().zip(g.values()) {
            assert_eq!(row[3], *u);
            assert_eq!(row[0], 0.1);
        }
    }
}
