//! Locality report: item lifetimes and the reuse-distance CDF.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use ogb_core::trace::{lifetime_stats, reuse_distance_cdf};
use ogb_core::Trace;

use crate::format::num;
use crate::simulate::path_with;

/// One row per item in order of increasing lifetime, with the cumulative
/// hit ratio an infinite cache would score on the items up to that row.
pub fn write_lifetimes<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let stats = lifetime_stats(trace);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["key", "first", "last", "count", "lifetime", "max_hits", "cumulative_hit_ratio"])?;
    for (item, cum) in stats.items.iter().zip(&stats.curve) {
        w.write_record([
            trace.key(item.id),
            item.first.to_string(),
            item.last.to_string(),
            item.count.to_string(),
            item.lifetime().to_string(),
            item.max_hits().to_string(),
            num(*cum),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Items requested at least twice, by increasing mean gap between
/// consecutive requests.
pub fn write_reuse<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["key", "mean_gap", "cdf"])?;
    for p in reuse_distance_cdf(trace) {
        w.write_record([trace.key(p.id), num(p.mean_gap), num(p.cdf)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<prefix>.lifetime.csv` and `<prefix>.reuse.csv`.
pub fn write_report(trace: &Trace, prefix: &Path) -> Result<()> {
    for (suffix, write) in [
        (".lifetime.csv", write_lifetimes as fn(&Trace, BufWriter<File>) -> Result<()>),
        (".reuse.csv", write_reuse),
    ] {
        let path = path_with(prefix, suffix);
        let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        write(trace, BufWriter::new(file))?;
    }
    Ok(())
}
