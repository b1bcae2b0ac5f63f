use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::lattice_gas::{LatticeGeometry, Site};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Exchange,
    Flip,
}

/// One state-changing jump.
///
/// For exchanges `site` is the lower endpoint of the bond, `aux` the
/// one-based direction and `delta` the change of `η(site)`. For flips `site`
/// is the boundary site, `aux` the side (`−1` or `+1`) and `delta = ±1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub site: Site,
    pub aux: i8,
    pub delta: i8,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventLog {
    pub records: Vec<EventRecord>,
}

const MAGIC: &[u8; 8] = b"KACEVT01";

impl EventLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: Write>(&self, geom: &LatticeGeometry, out: &mut W) -> Result<()> {
        let coords: Vec<String> = (1..=geom.dim()).map(|k| format!("x{k}")).collect();
        writeln!(out, "macro_time,kind,{},direction_or_side,delta_occupancy", coords.join(","))?;
        for r in &self.records {
            let c: Vec<String> = geom.coords(r.site).iter().map(|v| v.to_string()).collect();
            let kind = match r.kind {
                EventKind::Exchange => "exchange",
                EventKind::Flip => "flip",
            };
            writeln!(out, "{:.17e},{kind},{},{},{}", r.time, c.join(","), r.aux, r.delta)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(geom: &LatticeGeometry, input: R) -> Result<Self> {
        let mut records = Vec::new();
        let d = geom.dim();
        for (i, line) in input.lines().enumerate().skip(1) {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let bad = |m: &str| Error::Parse(format!("event log line {}: {m}", i + 1));
            if f.len() != d + 4 {
                return Err(bad("wrong number of fields"));
            }
            let time: f64 = f[0].parse().map_err(|_| bad("time"))?;
            let kind = match f[1] {
                "exchange" => EventKind::Exchange,
                "flip" => EventKind::Flip,
                _ => return Err(bad("kind")),
            };
            let coords: Vec<i64> = f[2..2 + d]
                .iter()
                .map(|v| v.parse().map_err(|_| bad("coordinate")))
                .collect::<Result<_>>()?;
            records.push(EventRecord {
                time,
                kind,
                site: geom.site(&coords)?,
                aux: f[2 + d].parse().map_err(|_| bad("direction/side"))?,
                delta: f[3 + d].parse().map_err(|_| bad("delta"))?,
            });
        }
        Ok(EventLog { records })
    }

    /// Little-endian fixed-width records behind an 8-byte magic tag.
    pub fn write_binary<W: Write>(&self, out: &mut W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&(self.records.len() as u64).to_le_bytes())?;
        for r in &self.records {
            out.write_all(&r.time.to_le_bytes())?;
            out.write_all(&[matches!(r.kind, EventKind::Flip) as u8])?;
            out.write_all(&(r.site.0 as u64).to_le_bytes())?;
            out.write_all(&[r.aux as u8, r.delta as u8])?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(input: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse("not a binary event log".into()));
        }
        let mut b8 = [0u8; 8];
        input.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        let mut records = Vec::with_capacity(n.min(1 << 24));
        for _ in 0..n {
            input.read_exact(&mut b8)?;
            let time = f64::from_le_bytes(b8);
            let mut k = [0u8; 1];
            input.read_exact(&mut k)?;
            input.read_exact(&mut b8)?;
            let site = Site(u64::from_le_bytes(b8) as usize);
            let mut tail = [0u8; 2];
            input.read_exact(&mut tail)?;
            records.push(EventRecord {
                time,
                kind: if k[0] == 1 { EventKind::Flip } else { EventKind::Exchange },
                site,
                aux: tail[0] as i8,
                delta: tail[1] as i8,
            });
        }
        Ok(EventLog { records })
    }
}
