use std::io::{BufRead, Write};
use std::sync::Arc;

use super::configuration::{Configuration, Lattice};
use super::geometry::Site;
use crate::error::{Error, Result};

/// Writes `d N particle_count` followed by one `x1 … xd bit` line per site.
pub fn write_snapshot<W: Write>(cfg: &Configuration, out: &mut W) -> Result<()> {
    let g = cfg.geometry();
    writeln!(out, "{} {} {}", g.dim(), g.n(), cfg.particle_count())?;
    let mut line = String::new();
    for s in 0..g.site_count() {
        line.clear();
        for c in g.coords(Site(s)) {
            line.push_str(&c.to_string());
            line.push(' ');
        }
        line.push(if cfg.occupied(Site(s)) { '1' } else { '0' });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Same as [`write_snapshot`] preceded by a `time <t>` line.
pub fn write_timed_snapshot<W: Write>(time: f64, cfg: &Configuration, out: &mut W) -> Result<()> {
    writeln!(out, "time {time:.17e}")?;
    write_snapshot(cfg, out)
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("snapshot line {line}: {msg}"))
}

/// Reads a snapshot written by [`write_snapshot`] onto an existing lattice.
pub fn read_snapshot<R: BufRead>(lattice: Arc<Lattice>, input: R) -> Result<Configuration> {
    let g = lattice.geometry();
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "missing header"))??;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| parse_err(1, e)))
        .collect::<Result<_>>()?;
    if nums.len() != 3 {
        return Err(parse_err(1, "header must be `d N particle_count`"));
    }
    if nums[0] != g.dim() || nums[1] != g.n() {
        return Err(parse_err(1, format!("lattice is d={} N={}, file has d={} N={}", g.dim(), g.n(), nums[0], nums[1])));
    }
    let mut occ = vec![0u8; g.site_count()];
    for s in 0..g.site_count() {
        let lineno = s + 2;
        let line = lines.next().ok_or_else(|| parse_err(lineno, "unexpected end of file"))??;
        let toks: Vec<i64> = line
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|e| parse_err(lineno, e)))
            .collect::<Result<_>>()?;
        if toks.len() != g.dim() + 1 {
            return Err(parse_err(lineno, "wrong number of fields"));
        }
        let site = g.site(&toks[..g.dim()])?;
        if site != Site(s) {
            return Err(parse_err(lineno, "sites out of lexicographic order"));
        }
        occ[s] = match toks[g.dim()] {
            0 => 0,
            1 => 1,
            b => return Err(parse_err(lineno, format!("occupancy {b} is not a bit"))),
        };
    }
    let cfg = Configuration::from_occupancy(lattice, occ)?;
    if cfg.particle_count() != nums[2] {
        return Err(parse_err(1, format!("header claims {} particles, found {}", nums[2], cfg.particle_count())));
    }
    Ok(cfg)
}
