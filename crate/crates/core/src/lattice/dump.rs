//! Plain-text configuration dump.
//!
//! ```text
//! # fpp-configuration v1
//! dim 2
//! lower 0 0
//! upper 4 4
//! law two-point 1 2 0.5
//! seed 42 0
//! edges 40
//! 0 0 0 1.0000000000000000e0
//! ...
//! ```
//!
//! Each edge line is the lower endpoint, the axis and the weight. Weights are
//! written with 17 significant digits, which round-trips every `f64`.

use std::io::{BufRead, Write};

use super::config::{Provenance, WeightConfiguration};
use super::lattice_box::LatticeBox;
use super::law::BoundedLaw;
use crate::error::{FppError, Result};

const MAGIC: &str = "# fpp-configuration v1";

pub fn write_configuration(config: &WeightConfiguration, mut out: impl Write) -> Result<()> {
    let lattice = config.lattice();
    let join = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "dim {}", lattice.dim())?;
    writeln!(out, "lower {}", join(lattice.lower()))?;
    writeln!(out, "upper {}", join(lattice.upper()))?;
    writeln!(out, "law {}", config.law())?;
    match config.provenance() {
        Some(p) => writeln!(out, "seed {} {}", p.master_seed, p.stream)?,
        None => writeln!(out, "seed none")?,
    }
    writeln!(out, "edges {}", lattice.edge_count())?;
    let mut coords = vec![0i64; lattice.dim()];
    for e in lattice.edges() {
        let (v, axis) = lattice.edge_parts(e);
        lattice.coords_into(v, &mut coords);
        writeln!(out, "{} {} {:.16e}", join(&coords), axis, config.weight(e))?;
    }
    Ok(())
}

pub fn read_configuration(input: impl BufRead) -> Result<WeightConfiguration> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(FppError::Parse { line: 0, msg: format!("unexpected end of file, expected {what}") }),
        }
    };
    let perr = |line: usize, msg: String| FppError::Parse { line, msg };

    let (n, magic) = next("header")?;
    if magic.trim() != MAGIC {
        return Err(perr(n, format!("expected '{MAGIC}'")));
    }
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (n, l) = next(key)?;
        let rest = l
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| perr(n, format!("expected '{key} ...'")))?;
        Ok((n, rest.trim().to_string()))
    };
    let ints = |n: usize, s: &str| -> Result<Vec<i64>> {
        s.split_whitespace().map(|t| t.parse().map_err(|_| perr(n, format!("bad integer '{t}'")))).collect()
    };

    let (n_dim, dim) = field("dim")?;
    let dim: usize = dim.parse().map_err(|_| perr(n_dim, "bad dimension".into()))?;
    let (n_lo, lower) = field("lower")?;
    let lower = ints(n_lo, &lower)?;
    let (n_hi, upper) = field("upper")?;
    let upper = ints(n_hi, &upper)?;
    if lower.len() != dim || upper.len() != dim {
        return Err(perr(n_hi, "bounds do not match the dimension".into()));
    }
    let lattice = LatticeBox::new(lower, upper).map_err(|e| perr(n_hi, e.to_string()))?;
    let (n_law, law) = field("law")?;
    let law: BoundedLaw = law.parse().map_err(|e: FppError| perr(n_law, e.to_string()))?;
    let (n_seed, seed) = field("seed")?;
    let provenance = if seed == "none" {
        None
    } else {
        let v: Vec<u64> = seed
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(n_seed, format!("bad seed '{t}'"))))
            .collect::<Result<_>>()?;
        if v.len() != 2 {
            return Err(perr(n_seed, "seed line is 'seed <master> <stream>'".into()));
        }
        Some(Provenance { master_seed: v[0], stream: v[1] })
    };
    let (n_edges, count) = field("edges")?;
    let count: usize = count.parse().map_err(|_| perr(n_edges, "bad edge count".into()))?;
    if count != lattice.edge_count() {
        return Err(perr(n_edges, format!("box has {} edges, header says {count}", lattice.edge_count())));
    }

    let mut weights = vec![f64::NAN; lattice.edge_slots()];
    for _ in 0..count {
        let (n, l) = next("edge line")?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != dim + 2 {
            return Err(perr(n, format!("expected {} fields", dim + 2)));
        }
        let coords = ints(n, &toks[..dim].join(" "))?;
        let axis: usize = toks[dim].parse().map_err(|_| perr(n, "bad axis".into()))?;
        let w: f64 = toks[dim + 1].parse().map_err(|_| perr(n, "bad weight".into()))?;
        let v = lattice.index_of(&coords).ok_or_else(|| perr(n, "vertex outside the box".into()))?;
        if axis >= dim {
            return Err(perr(n, "axis out of range".into()));
        }
        let e = lattice.edge_id(v, axis);
        if !lattice.edge_exists(e) {
            return Err(perr(n, "edge leaves the box".into()));
        }
        if !weights[e.0].is_nan() {
            return Err(perr(n, "duplicate edge".into()));
        }
        weights[e.0] = w;
    }
    WeightConfiguration::from_slots(lattice, law, weights, provenance)
}
