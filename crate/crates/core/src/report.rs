//! Deterministic CSV output.
//!
//! Every file starts with `#`-prefixed lines holding the run manifest as TOML,
//! followed by a single header row. Numbers use scientific notation with 12
//! significant digits.

use std::io::{self, Write};

use crate::config::RunManifest;
use crate::dde::DdeTrace;
use crate::scalar::Real;
use crate::spectrum::SpectrumTable;
use crate::stability::StabilityMap;

/// `x` with 12 significant digits, e.g. `-2.50000000000e-13`.
pub fn num<T: Real>(x: T) -> String {
    format!("{:.11e}", x.as_f64())
}

pub fn write_manifest_header<W: Write>(w: &mut W, manifest: Option<&RunManifest>) -> io::Result<()> {
    if let Some(m) = manifest {
        for line in m.to_toml().lines() {
            if line.is_empty() {
                writeln!(w, "#")?;
            } else {
                writeln!(w, "# {line}")?;
            }
        }
    }
    Ok(())
}

pub const SPECTRUM_HEADER: &str = "omega,P1,P2,N1,N2,ReM1,ImM1,ReM2,ImM2,theta1,theta2,status";

/// Singular rows keep their frequency and status and leave the values empty.
pub fn write_spectrum_csv<W: Write, T: Real>(
    w: &mut W,
    manifest: Option<&RunManifest>,
    table: &SpectrumTable<T>,
) -> io::Result<()> {
    write_manifest_header(w, manifest)?;
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for row in &table.rows {
        match &row.values {
            Some(v) => writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                num(row.omega),
                num(v.p[0]),
                num(v.p[1]),
                num(v.n[0]),
                num(v.n[1]),
                num(v.m[0].re),
                num(v.m[0].im),
                num(v.m[1].re),
                num(v.m[1].im),
                num(v.theta[0]),
                num(v.theta[1]),
                row.status
            )?,
            None => writeln!(w, "{},,,,,,,,,,,{}", num(row.omega), row.status)?,
        }
    }
    Ok(())
}

pub fn write_map_csv<W: Write, T: Real>(
    w: &mut W,
    manifest: Option<&RunManifest>,
    map: &StabilityMap<T>,
) -> io::Result<()> {
    write_manifest_header(w, manifest)?;
    writeln!(w, "gamma1_tau,alpha_tilde,S1W,stable")?;
    for c in &map.cells {
        writeln!(w, "{},{},{},{}", num(c.gamma1_tau), num(c.alpha_tilde), num(c.s1w), u8::from(c.stable))?;
    }
    Ok(())
}

pub fn write_boundary_csv<W: Write, T: Real>(
    w: &mut W,
    manifest: Option<&RunManifest>,
    map: &StabilityMap<T>,
) -> io::Result<()> {
    write_manifest_header(w, manifest)?;
    writeln!(w, "gamma1_tau,alpha_tilde_boundary")?;
    for (x, a) in &map.boundary {
        writeln!(w, "{},{}", num(*x), num(*a))?;
    }
    Ok(())
}

pub fn write_trace_csv<W: Write, T: Real>(
    w: &mut W,
    manifest: Option<&RunManifest>,
    trace: &DdeTrace<T>,
) -> io::Result<()> {
    write_manifest_header(w, manifest)?;
    writeln!(w, "t,re_v1,im_v1,norm")?;
    for ((t, v), n) in trace.t.iter().zip(&trace.v).zip(&trace.norm) {
        writeln!(w, "{},{},{},{}", num(*t), num(v[0].re), num(v[0].im), num(*n))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DelaySpec, ModelParams, ThetaMode};
    use crate::spectrum::spectrum_table;

    #[test]
    fn number_format() {
        assert_eq!(num(1.0), "1.00000000000e0");
        assert_eq!(num(-2.5e-13), "-2.50000000000e-13");
        assert_eq!(num(123456789012345.0), "1.23456789012e14");
    }

    #[test]
    fn spectrum_rows_and_gaps() {
        let m = ModelParams::new(2.0, 2.0, 0.0, 1.0, DelaySpec::scaled(0.5, 0).unwrap()).validate().unwrap();
        let t = spectrum_table(&m, &[-1.0, 0.0], ThetaMode::Locked).unwrap();
        let mut out = Vec::new();
        write_spectrum_csv(&mut out, None, &t).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SPECTRUM_HEADER);
        assert!(lines[1].ends_with(",ok"));
        assert_eq!(lines[2], "0.00000000000e0,,,,,,,,,,,singular");
    }
}
