//! Canonical text trace format: one request per line, the first
//! comma-separated field is the item key, blank lines and lines starting with
//! `#` are skipped. Keys get dense ids in order of first appearance.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use ogb_core::trace::TraceBuilder;
use ogb_core::Trace;

pub fn parse_trace<R: BufRead>(mut reader: R) -> Result<Trace> {
    let mut builder = TraceBuilder::default();
    let mut line = String::new();
    let mut lineno = 0usize;
    loop {
        line.clear();
        lineno += 1;
        let read = reader
            .read_line(&mut line)
            .with_context(|| format!("cannot read trace line {lineno}"))?;
        if read == 0 {
            break;
        }
        let text = line.strip_suffix('\n').unwrap_or(&line);
        let text = text.strip_suffix('\r').unwrap_or(text);
        if text.trim().is_empty() || text.starts_with('#') {
            continue;
        }
        let key = text.split(',').next().unwrap_or(text).trim();
        builder.push(key);
    }
    builder.finish().map_err(|_| anyhow!("trace has no requests"))
}

pub fn read_trace_file(path: &Path) -> Result<Trace> {
    let file = File::open(path).with_context(|| format!("cannot open trace {}", path.display()))?;
    parse_trace(BufReader::with_capacity(1 << 16, file)).with_context(|| format!("in {}", path.display()))
}

/// Writes the dense ids, one per line. Parsing the output gives back
/// `trace.canonical()`, which is `trace` itself for any parsed trace.
pub fn write_trace<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let mut out = BufWriter::with_capacity(1 << 16, out);
    for &r in trace.requests() {
        writeln!(out, "{r}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace_file(trace: &Trace, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    write_trace(trace, file)
}
