use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::grid::{FaceField, Grid, GridFunction};
use super::path::PathPair;
use crate::error::{Error, Result};

/// Sidecar path `<file>.meta`.
pub fn metadata_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn dims_string(g: &Grid) -> String {
    g.dims().iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_dims(s: &str) -> Result<Grid> {
    let dims = s
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("mesh `{s}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    Grid::new(dims)
}

pub fn write_metadata(path: &Path, entries: &BTreeMap<String, String>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for (k, v) in entries {
        writeln!(out, "{k} = {v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_metadata(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for line in BufReader::new(fs::File::open(path)?).lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("metadata line without `=`: {line}")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn coord_header(d: usize) -> String {
    (1..=d).map(|k| format!("u{k}")).collect::<Vec<_>>().join(",")
}

/// Writes `(u1, …, ud, value)` rows and a sidecar with the mesh plus `extra`.
pub fn write_grid_function(gf: &GridFunction, csv: &Path, extra: &BTreeMap<String, String>) -> Result<()> {
    let g = &gf.grid;
    let mut out = BufWriter::new(fs::File::create(csv)?);
    writeln!(out, "{},value", coord_header(g.dim()))?;
    for (c, v) in gf.values.iter().enumerate() {
        let u = g.cell_center(c);
        let coords: Vec<String> = u.iter().map(|x| format!("{x:.17e}")).collect();
        writeln!(out, "{},{v:.17e}", coords.join(","))?;
    }
    out.flush()?;
    let mut meta = extra.clone();
    meta.insert("mesh".into(), dims_string(g));
    write_metadata(&metadata_path(csv), &meta)
}

/// Reads a file written by [`write_grid_function`] together with its sidecar.
pub fn read_grid_function(csv: &Path) -> Result<(GridFunction, BTreeMap<String, String>)> {
    let meta = read_metadata(&metadata_path(csv))?;
    let grid = parse_dims(meta.get("mesh").ok_or_else(|| Error::Parse("sidecar lacks `mesh`".into()))?)?;
    let mut values = Vec::with_capacity(grid.cell_count());
    for (i, line) in BufReader::new(fs::File::open(csv)?).lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let last = line.rsplit(',').next().unwrap_or("");
        values.push(
            last.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?,
        );
    }
    Ok((GridFunction::new(grid, values)?, meta))
}

/// Stores a path pair as `path.meta`, `rho.csv` and `current.csv` in `dir`.
pub fn write_path_pair(pair: &PathPair, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut meta = BTreeMap::new();
    meta.insert("mesh".to_string(), dims_string(&pair.grid));
    meta.insert("observations".to_string(), pair.len().to_string());
    meta.insert("scheme_dt".to_string(), format!("{:.17e}", pair.scheme_dt));
    if let Some(n) = pair.lattice_n {
        meta.insert("lattice_n".to_string(), n.to_string());
    }
    write_metadata(&dir.join("path.meta"), &meta)?;

    let mut rho = BufWriter::new(fs::File::create(dir.join("rho.csv"))?);
    writeln!(rho, "time_index,time,cell,value")?;
    for (c, v) in pair.gamma.values.iter().enumerate() {
        writeln!(rho, "-1,{:.17e},{c},{v:.17e}", pair.times[0])?;
    }
    for (k, r) in pair.rho.iter().enumerate() {
        for (c, v) in r.values.iter().enumerate() {
            writeln!(rho, "{k},{:.17e},{c},{v:.17e}", pair.times[k])?;
        }
    }
    rho.flush()?;

    let mut cur = BufWriter::new(fs::File::create(dir.join("current.csv"))?);
    writeln!(cur, "time_index,time,component,face,value")?;
    for (k, w) in pair.current.iter().enumerate() {
        for (comp, vals) in w.comps.iter().enumerate() {
            for (f, v) in vals.iter().enumerate() {
                writeln!(cur, "{k},{:.17e},{},{f},{v:.17e}", pair.times[k], comp + 1)?;
            }
        }
    }
    cur.flush()?;
    Ok(())
}

fn fields(line: &str, n: usize, lineno: usize) -> Result<Vec<&str>> {
    let parts: Vec<&str> = line.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(Error::Parse(format!("line {lineno}: expected {n} fields, found {}", parts.len())));
    }
    Ok(parts)
}

fn num<T: std::str::FromStr>(s: &str, lineno: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| Error::Parse(format!("line {lineno}: `{s}`: {e}")))
}

pub fn read_path_pair(dir: &Path) -> Result<PathPair> {
    let meta = read_metadata(&dir.join("path.meta"))?;
    let get = |k: &str| meta.get(k).ok_or_else(|| Error::Parse(format!("path.meta lacks `{k}`")));
    let grid = parse_dims(get("mesh")?)?;
    let n_obs: usize = num(get("observations")?, 0)?;
    let cells = grid.cell_count();
    let mut times = vec![0.0; n_obs];
    let mut gamma = vec![0.0; cells];
    let mut rho = vec![vec![0.0; cells]; n_obs];
    for (i, line) in BufReader::new(fs::File::open(dir.join("rho.csv"))?).lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p = fields(&line, 4, i + 1)?;
        let k: i64 = num(p[0], i + 1)?;
        let c: usize = num(p[2], i + 1)?;
        let v: f64 = num(p[3], i + 1)?;
        if c >= cells || k >= n_obs as i64 || k < -1 {
            return Err(Error::Parse(format!("line {}: index out of range", i + 1)));
        }
        if k < 0 {
            gamma[c] = v;
        } else {
            times[k as usize] = num(p[1], i + 1)?;
            rho[k as usize][c] = v;
        }
    }
    let mut current: Vec<FaceField> = (0..n_obs).map(|_| FaceField::zeros(grid.clone())).collect();
    for (i, line) in BufReader::new(fs::File::open(dir.join("current.csv"))?).lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p = fields(&line, 5, i + 1)?;
        let k: usize = num(p[0], i + 1)?;
        let comp: usize = num(p[2], i + 1)?;
        let f: usize = num(p[3], i + 1)?;
        if k >= n_obs || comp == 0 || comp > grid.dim() || f >= grid.face_count(comp - 1) {
            return Err(Error::Parse(format!("line {}: index out of range", i + 1)));
        }
        current[k].comps[comp - 1][f] = num(p[4], i + 1)?;
    }
    let rho = rho
        .into_iter()
        .map(|v| GridFunction::new(grid.clone(), v))
        .collect::<Result<Vec<_>>>()?;
    let mut pair = PathPair::new(times, rho, current, GridFunction::new(grid, gamma)?)?;
    pair.scheme_dt = num(get("scheme_dt")?, 0)?;
    pair.lattice_n = meta.get("lattice_n").map(|s| num(s, 0)).transpose()?;
    Ok(pair)
}
