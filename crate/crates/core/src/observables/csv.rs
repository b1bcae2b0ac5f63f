use std::io::Write;

use crate::error::Result;
use crate::hydrodynamics::GridFunction;

/// One `(t, component, value)` record; components are one-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurrentPairingRow {
    pub time: f64,
    pub component: usize,
    pub value: f64,
}

/// `u1,…,ud,value` rows at cell centres.
pub fn write_density_profile<W: Write>(profile: &GridFunction, out: &mut W) -> Result<()> {
    let g = &profile.grid;
    let header: Vec<String> = (1..=g.dim()).map(|k| format!("u{k}")).collect();
    writeln!(out, "{},density", header.join(","))?;
    for (c, v) in profile.values.iter().enumerate() {
        let coords: Vec<String> = g.cell_center(c).iter().map(|x| format!("{x:.10}")).collect();
        writeln!(out, "{},{v:.12e}", coords.join(","))?;
    }
    Ok(())
}

pub fn write_current_pairings<W: Write>(rows: &[CurrentPairingRow], out: &mut W) -> Result<()> {
    writeln!(out, "t,component,value")?;
    for r in rows {
        writeln!(out, "{:.10},{},{:.12e}", r.time, r.component, r.value)?;
    }
    Ok(())
}
