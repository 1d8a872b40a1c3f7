//! Result files: grids as CSV and PGM, data vectors, convergence logs, metrics.

use crate::error::Result;
use crate::forward::DataVector;
use crate::grid::{Field, Grid2D};
use crate::optim::IterationRecord;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
}

/// Row-major CSV (first row is the bottom row of cells) preceded by `#` lines holding the edges.
pub fn write_field_csv(path: &Path, grid: &Grid2D, field: &Field) -> Result<()> {
    field.check_grid(grid)?;
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# nx={} ny={}", grid.nx(), grid.ny())?;
    writeln!(f, "# x_edges={}", join(grid.x_edges()))?;
    writeln!(f, "# y_edges={}", join(grid.y_edges()))?;
    for row in field.values().chunks(grid.nx()) {
        writeln!(f, "{}", join(row))?;
    }
    f.flush()?;
    Ok(())
}

/// Reads a grid written by [`write_field_csv`].
pub fn read_field_csv(path: &Path) -> Result<(Grid2D, Field)> {
    let text = std::fs::read_to_string(path)?;
    let bad = |m: &str| crate::error::Error::Config(format!("{}: {m}", path.display()));
    let parse = |s: &str| -> Result<Vec<f64>> { s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad("bad number"))).collect() };
    let mut xe = None;
    let mut ye = None;
    let mut values = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# x_edges=") {
            xe = Some(parse(rest)?);
        } else if let Some(rest) = line.strip_prefix("# y_edges=") {
            ye = Some(parse(rest)?);
        } else if !line.starts_with('#') && !line.trim().is_empty() {
            values.extend(parse(line)?);
        }
    }
    let grid = Grid2D::new(xe.ok_or_else(|| bad("missing x_edges"))?, ye.ok_or_else(|| bad("missing y_edges"))?)?;
    let field = Field::new(&grid, values)?;
    Ok((grid, field))
}

/// 8-bit binary PGM, linearly scaled to the field range, top of the image at the largest y.
pub fn write_pgm(path: &Path, grid: &Grid2D, field: &Field) -> Result<()> {
    field.check_grid(grid)?;
    let v = field.values();
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut f = BufWriter::new(File::create(path)?);
    write!(f, "P5\n{} {}\n255\n", grid.nx(), grid.ny())?;
    let mut bytes = Vec::with_capacity(v.len());
    for row in v.chunks(grid.nx()).rev() {
        bytes.extend(row.iter().map(|x| ((x - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8));
    }
    f.write_all(&bytes)?;
    f.flush()?;
    Ok(())
}

pub fn write_data_csv(path: &Path, data: &DataVector) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    match data {
        DataVector::Real(v) => {
            w.write_record(["index", "value"])?;
            for (i, x) in v.iter().enumerate() {
                w.write_record([i.to_string(), format!("{x:e}")])?;
            }
        }
        DataVector::Complex(v) => {
            w.write_record(["index", "re", "im"])?;
            for (i, z) in v.iter().enumerate() {
                w.write_record([i.to_string(), format!("{:e}", z.re), format!("{:e}", z.im)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_data_csv(path: &Path) -> Result<DataVector> {
    let mut r = csv::Reader::from_path(path)?;
    let complex = r.headers()?.len() == 3;
    let mut re = Vec::new();
    let mut im = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| crate::error::Error::Config(format!("{}: {e}", path.display())));
        re.push(num(1)?);
        if complex {
            im.push(num(2)?);
        }
    }
    Ok(if complex {
        DataVector::Complex(re.into_iter().zip(im).map(|(a, b)| num_complex::Complex64::new(a, b)).collect())
    } else {
        DataVector::Real(re)
    })
}

pub fn write_convergence_log(path: &Path, log: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "cost", "residual_norm", "lambda", "active_bumps", "p_i", "p_o"])?;
    for r in log {
        w.write_record([
            r.iteration.to_string(),
            format!("{:e}", r.cost),
            format!("{:e}", r.residual_norm),
            format!("{:e}", r.lambda),
            r.active_bumps.to_string(),
            format!("{:e}", r.contrast_in),
            format!("{:e}", r.contrast_out),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per iterate: the flat parameter vector `[alpha.., beta.., chi.., p_i, p_o]`.
pub fn write_parameter_snapshots(path: &Path, log: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let Some(first) = log.first() else {
        w.flush()?;
        return Ok(());
    };
    let m = (first.params.len() - 2) / 4;
    let mut header = vec!["iteration".to_string()];
    header.extend((0..m).map(|j| format!("alpha_{j}")));
    header.extend((0..m).map(|j| format!("beta_{j}")));
    for j in 0..m {
        header.push(format!("chi_{j}_x"));
        header.push(format!("chi_{j}_y"));
    }
    header.push("p_i".into());
    header.push("p_o".into());
    w.write_record(&header)?;
    for r in log {
        let mut row = vec![r.iteration.to_string()];
        row.extend(r.params.iter().map(|x| format!("{x:e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_key_values(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    for (k, v) in entries {
        writeln!(f, "{k}={v}")?;
    }
    f.flush()?;
    Ok(())
}
