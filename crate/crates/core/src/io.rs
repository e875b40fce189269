//! Fixed-format CSV rendering shared by the command line and the tests.
//!
//! Every number is written as `{:.11e}` (12 significant digits) and every
//! line ends in `\n`, so identical inputs give byte-identical files.

use std::fmt::Write as _;

use crate::spectrum::Eigenvalue;
use crate::states::Sample;

pub const SPECTRUM_HEADER: &str = "n,E,provenance,residual";

pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn spectrum_csv(levels: &[Eigenvalue]) -> String {
    let mut out = String::with_capacity(64 * (levels.len() + 1));
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    for l in levels {
        let _ = writeln!(out, "{},{},{},{}", l.n, num(l.energy), l.provenance, num(l.residual));
    }
    out
}

/// `x,psi[,dpsi]`; the origin rows are written as `-0` and `0`.
pub fn wavefunction_csv(samples: &[Sample], with_slope: bool) -> String {
    let mut out = String::from(if with_slope { "x,psi,dpsi\n" } else { "x,psi\n" });
    for s in samples {
        if with_slope {
            let _ = writeln!(out, "{},{},{}", num(s.x), num(s.psi), num(s.dpsi));
        } else {
            let _ = writeln!(out, "{},{}", num(s.x), num(s.psi));
        }
    }
    out
}

/// Generic table: a header line and rows of numbers.
pub fn table_csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
