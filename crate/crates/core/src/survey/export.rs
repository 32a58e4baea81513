//! Plot-ready CSV: comma-separated, LF line endings, mandatory header.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::arith;
use crate::error::{Error, Result};

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// `t,count` for every observed `a_{1,p}`.
pub fn write_histogram_csv<W: Write>(hist: &BTreeMap<i64, u64>, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["t", "count"])?;
    for (t, n) in hist {
        w.write_record([t.to_string(), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub const PER_ELL_HEADER: [&str; 2] = ["ell", "pi_ell_t"];

/// `ell,pi_ell_t`, one row per auxiliary prime.
pub fn write_per_ell_csv<W: Write>(per_ell: &[(u64, u64)], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(PER_ELL_HEADER)?;
    for (l, n) in per_ell {
        w.write_record([l.to_string(), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads and validates a per-ℓ CSV: exact header, odd prime ℓ strictly increasing.
pub fn read_per_ell_csv<R: Read>(input: R) -> Result<Vec<(u64, u64)>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != PER_ELL_HEADER {
        return Err(Error::malformed(format!(
            "expected header ell,pi_ell_t, got {}",
            header.join(",")
        )));
    }
    let mut rows: Vec<(u64, u64)> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| -> Result<u64> {
            rec.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| {
                Error::malformed(format!("row {}: bad field {}", i + 1, PER_ELL_HEADER[k]))
            })
        };
        let (l, n) = (field(0)?, field(1)?);
        if l == 2 || !arith::is_prime(l) {
            return Err(Error::malformed(format!(
                "row {}: ell = {l} is not an odd prime",
                i + 1
            )));
        }
        if rows.last().is_some_and(|&(prev, _)| prev >= l) {
            return Err(Error::malformed(format!(
                "row {}: ell not increasing",
                i + 1
            )));
        }
        rows.push((l, n));
    }
    Ok(rows)
}
