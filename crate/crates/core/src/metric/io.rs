//! Text formats for grid metrics and gradient fields.
//!
//! Metric files carry a `#`-prefixed header (window, bounds, grid frame,
//! free-form metadata, integer point coordinates) followed by the lower
//! triangle as CSV rows `i,j,value` with `j < i`. Numbers use the shortest
//! representation that round-trips.

use std::io::{BufRead, Write};

use super::grid::{Bounds, Grid, GridMetric};
use super::seminorm::{GradientField, Seminorm};
use crate::error::{FppError, Result};
use crate::geometry::ConvexWindow;

const METRIC_MAGIC: &str = "# fpp-grid-metric v1";
const FIELD_MAGIC: &str = "# fpp-gradient-field v1";

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

pub fn write_metric(m: &GridMetric, meta: &[(&str, String)], mut out: impl Write) -> Result<()> {
    let g = m.grid();
    writeln!(out, "{METRIC_MAGIC}")?;
    writeln!(out, "# window: {}", m.window())?;
    writeln!(out, "# bounds: {} {}", m.bounds().a, m.bounds().b)?;
    writeln!(out, "# origin: {}", join(g.origin(), " "))?;
    writeln!(out, "# spacing: {}", join(g.spacing(), " "))?;
    let meta_line: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(out, "# meta: {}", meta_line.join(" "))?;
    writeln!(out, "# points: {}", g.len())?;
    for i in 0..g.len() {
        writeln!(out, "# point: {}", join(g.coords(i), " "))?;
    }
    writeln!(out, "# schema: i,j,value")?;
    for i in 0..g.len() {
        for j in 0..i {
            writeln!(out, "{i},{j},{}", m.get(i, j))?;
        }
    }
    Ok(())
}

pub fn read_metric(input: impl BufRead) -> Result<(GridMetric, Vec<(String, String)>)> {
    let perr = |line: usize, msg: &str| FppError::Parse { line, msg: msg.to_string() };
    let lines: Vec<String> = input.lines().collect::<std::io::Result<_>>()?;
    if lines.first().map(|l| l.trim()) != Some(METRIC_MAGIC) {
        return Err(perr(1, "missing metric header"));
    }
    let mut window = None;
    let mut bounds = None;
    let mut origin = None;
    let mut spacing = None;
    let mut meta = Vec::new();
    let mut coords: Vec<Vec<i64>> = Vec::new();
    let mut body_start = lines.len();
    let floats = |n: usize, s: &str| -> Result<Vec<f64>> {
        s.split_whitespace().map(|t| t.parse().map_err(|_| perr(n, "bad number"))).collect()
    };
    for (k, l) in lines.iter().enumerate().skip(1) {
        let n = k + 1;
        let Some(h) = l.strip_prefix("# ") else {
            return Err(perr(n, "unexpected line in header"));
        };
        let (key, val) = h.split_once(':').ok_or_else(|| perr(n, "header lines are '# key: value'"))?;
        let val = val.trim();
        match key {
            "window" => window = Some(val.parse::<ConvexWindow>().map_err(|e| perr(n, &e.to_string()))?),
            "bounds" => {
                let v = floats(n, val)?;
                if v.len() != 2 {
                    return Err(perr(n, "bounds line is 'a b'"));
                }
                bounds = Some(Bounds::new(v[0], v[1]).map_err(|e| perr(n, &e.to_string()))?);
            }
            "origin" => origin = Some(floats(n, val)?),
            "spacing" => spacing = Some(floats(n, val)?),
            "meta" => {
                for kv in val.split_whitespace() {
                    let (a, b) = kv.split_once('=').ok_or_else(|| perr(n, "meta entries are key=value"))?;
                    meta.push((a.to_string(), b.to_string()));
                }
            }
            "points" => {}
            "point" => coords.push(
                val.split_whitespace().map(|t| t.parse().map_err(|_| perr(n, "bad coordinate"))).collect::<Result<_>>()?,
            ),
            "schema" => {
                body_start = k + 1;
                break;
            }
            _ => return Err(perr(n, "unknown header key")),
        }
    }
    let missing = |what: &str| perr(0, &format!("header lacks {what}"));
    let window = window.ok_or_else(|| missing("window"))?;
    let grid = Grid::from_coords(origin.ok_or_else(|| missing("origin"))?, spacing.ok_or_else(|| missing("spacing"))?, coords)?;
    let npts = grid.len();
    let mut values = vec![f64::NAN; npts * npts];
    for i in 0..npts {
        values[i * npts + i] = 0.0;
    }
    for (k, l) in lines.iter().enumerate().skip(body_start) {
        let n = k + 1;
        if l.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 3 {
            return Err(perr(n, "rows are i,j,value"));
        }
        let i: usize = f[0].parse().map_err(|_| perr(n, "bad index"))?;
        let j: usize = f[1].parse().map_err(|_| perr(n, "bad index"))?;
        let v: f64 = f[2].parse().map_err(|_| perr(n, "bad value"))?;
        if i >= npts || j >= i {
            return Err(perr(n, "indices must satisfy j < i < points"));
        }
        values[i * npts + j] = v;
        values[j * npts + i] = v;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(missing("some matrix entries"));
    }
    let m = GridMetric::from_values_unchecked(window, grid, values, bounds.ok_or_else(|| missing("bounds"))?)?;
    Ok((m, meta))
}

pub fn write_field(f: &GradientField, mut out: impl Write) -> Result<()> {
    writeln!(out, "{FIELD_MAGIC}")?;
    writeln!(out, "window {}", f.window())?;
    writeln!(out, "bounds {} {}", f.bounds().a, f.bounds().b)?;
    for (i, c) in f.cuts().iter().enumerate() {
        writeln!(out, "cuts {i} {}", join(c, " "))?;
    }
    for (k, g) in f.cells().iter().enumerate() {
        writeln!(out, "cell {k} {g}")?;
    }
    Ok(())
}

pub fn read_field(input: impl BufRead) -> Result<GradientField> {
    let perr = |line: usize, msg: &str| FppError::Parse { line, msg: msg.to_string() };
    let mut window = None;
    let mut bounds = None;
    let mut cuts: Vec<Vec<f64>> = Vec::new();
    let mut cells: Vec<Seminorm> = Vec::new();
    for (k, l) in input.lines().enumerate() {
        let l = l?;
        let n = k + 1;
        if k == 0 {
            if l.trim() != FIELD_MAGIC {
                return Err(perr(n, "missing field header"));
            }
            continue;
        }
        let (key, rest) = l.split_once(' ').ok_or_else(|| perr(n, "expected 'key value'"))?;
        match key {
            "window" => window = Some(rest.parse::<ConvexWindow>().map_err(|e| perr(n, &e.to_string()))?),
            "bounds" => {
                let v: Vec<f64> = rest.split_whitespace().map(|t| t.parse().map_err(|_| perr(n, "bad number"))).collect::<Result<_>>()?;
                if v.len() != 2 {
                    return Err(perr(n, "bounds line is 'a b'"));
                }
                bounds = Some(Bounds::new(v[0], v[1]).map_err(|e| perr(n, &e.to_string()))?);
            }
            "cuts" => {
                let v: Vec<f64> = rest.split_whitespace().map(|t| t.parse().map_err(|_| perr(n, "bad number"))).collect::<Result<_>>()?;
                if v.first().map(|a| *a as usize) != Some(cuts.len()) {
                    return Err(perr(n, "cut lines must come in axis order"));
                }
                cuts.push(v[1..].to_vec());
            }
            "cell" => {
                let (idx, g) = rest.split_once(' ').ok_or_else(|| perr(n, "cell line is 'cell k seminorm'"))?;
                if idx.parse::<usize>().ok() != Some(cells.len()) {
                    return Err(perr(n, "cells must come in index order"));
                }
                cells.push(g.parse().map_err(|e: FppError| perr(n, &e.to_string()))?);
            }
            _ => return Err(perr(n, "unknown key")),
        }
    }
    GradientField::new(
        window.ok_or_else(|| perr(0, "missing window"))?,
        cuts,
        cells,
        bounds.ok_or_else(|| perr(0, "missing bounds"))?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_roundtrip() {
        let b = Bounds::new(1.0, 2.0).unwrap();
        let w: ConvexWindow = "polytope 0,0 1,0 0,1".parse().unwrap();
        let m = GridMetric::from_norm(&w, 5, |u| 1.0 / 3.0 + u.iter().map(|x| x.abs()).sum::<f64>() * 1.7 - 1.0 / 3.0, b).unwrap();
        let mut buf = Vec::new();
        write_metric(&m, &[("n", "4".into()), ("seed", "7".into())], &mut buf).unwrap();
        let (back, meta) = read_metric(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        assert_eq!(meta[1], ("seed".to_string(), "7".to_string()));
    }

    #[test]
    fn field_roundtrip() {
        let b = Bounds::new(1.0, 2.0).unwrap();
        let f = GradientField::uniform(ConvexWindow::unit_cube(2), 3, b, |c| {
            Seminorm::Max(vec![Seminorm::ScaledL1(1.0), Seminorm::WeightedLinf(vec![1.0 + c[0], 1.5])])
        })
        .unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        assert_eq!(read_field(buf.as_slice()).unwrap(), f);
    }
}
