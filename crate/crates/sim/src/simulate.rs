//! One policy over one trace, and the files describing the run.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use ogb_core::metrics::{occupancy_stats, opt_prefix_series_frac, window_rows, SeriesParams, WindowRow};
use ogb_core::policies::{build_policy, Mode, PolicyKind, RunConfig, Seeds, Tuning};
use ogb_core::run::{occupancy_interval, run_policy};
use ogb_core::Trace;
use serde::{Deserialize, Serialize};

use crate::format::{num, sig, tuning_str};
use crate::seed;

pub const SERIES_HEADER: [&str; 6] =
    ["t_window_start", "hit_ratio", "occupancy", "removals_per_req", "regret", "regret_bound"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capacity {
    Items(f64),
    /// Fraction of the catalog, rounded to the nearest item count.
    Fraction(f64),
}

impl Capacity {
    pub fn resolve(self, n: usize) -> Result<f64> {
        let c = match self {
            Capacity::Items(c) => c,
            Capacity::Fraction(f) => (f * n as f64).round(),
        };
        if !(c > 0.0 && c < n as f64) {
            bail!("infeasible cache size {c} for a catalog of {n} items (need 0 < C < N)");
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub policy: PolicyKind,
    pub capacity: Capacity,
    pub batch: u64,
    pub eta: Tuning,
    pub zeta: Tuning,
    pub window: usize,
    pub seed: u64,
}

impl SimSpec {
    pub fn new(policy: PolicyKind) -> Self {
        Self {
            policy,
            capacity: Capacity::Fraction(0.05),
            batch: 1,
            eta: Tuning::Auto,
            zeta: Tuning::Auto,
            window: 100_000,
            seed: 0,
        }
    }

    pub fn run_config(&self, trace: &Trace) -> Result<RunConfig> {
        let mut cfg = RunConfig::new(trace.n(), self.capacity.resolve(trace.n())?, trace.len() as u64);
        cfg.batch = self.batch;
        cfg.eta = self.eta;
        cfg.zeta = self.zeta;
        cfg.window = self.window;
        cfg.seeds = Seeds { sampler: seed::sampler_seed(self.seed), ftpl: seed::ftpl_seed(self.seed) };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Contents of `<prefix>.summary.json`. Every scalar except the wall time is
/// recomputable from the series and occupancy files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub policy: String,
    pub mode: String,
    pub trace: String,
    pub n: u64,
    pub t: u64,
    #[serde(with = "sig")]
    pub capacity: f64,
    pub batch: u64,
    pub eta_setting: String,
    #[serde(with = "sig")]
    pub eta: f64,
    pub zeta_setting: String,
    #[serde(with = "sig")]
    pub zeta: f64,
    pub window: u64,
    pub seed: u64,
    pub sampler_seed: u64,
    pub ftpl_seed: u64,
    #[serde(with = "sig")]
    pub hit_ratio: f64,
    #[serde(with = "sig")]
    pub opt_hit_ratio: f64,
    #[serde(with = "sig")]
    pub final_regret: f64,
    #[serde(with = "sig")]
    pub final_regret_bound: f64,
    #[serde(with = "sig")]
    pub occupancy_mean: f64,
    #[serde(with = "sig")]
    pub occupancy_cov: f64,
    #[serde(with = "sig")]
    pub occupancy_max_rel_dev: f64,
    #[serde(with = "sig")]
    pub removals_per_req: f64,
    #[serde(with = "sig")]
    pub wall_ns_per_req: f64,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub summary: RunSummary,
    pub rows: Vec<WindowRow>,
    /// `(t, integral occupancy)` every `max(1, T / 10^4)` requests.
    pub occupancy: Vec<(u64, u32)>,
    /// Per-request reward under the policy's mode.
    pub rewards: Vec<f64>,
}

/// `trace_desc` is echoed into the summary to say where the requests came from.
pub fn simulate(trace: &Trace, trace_desc: &str, spec: &SimSpec) -> Result<SimOutput> {
    let cfg = spec.run_config(trace)?;
    let mode = spec.policy.mode();
    let mut policy = build_policy(spec.policy, &cfg, trace)?;

    let start = Instant::now();
    let log = run_policy(policy.as_mut(), trace)?;
    let wall = start.elapsed();

    let t = trace.len();
    let opt = opt_prefix_series_frac(trace, cfg.capacity);
    let params = SeriesParams { mode, capacity: cfg.capacity, n: cfg.n, batch: cfg.batch, window: cfg.window };
    let rows = window_rows(&log, &opt, params)?;
    let samples = log.occupancy_samples(occupancy_interval(t));
    let occ: Vec<f64> = samples.iter().map(|&(_, o)| o as f64).collect();
    let occ_stats = occupancy_stats(&occ, cfg.capacity)?;
    let last = rows.last().context("empty series")?;

    let summary = RunSummary {
        policy: spec.policy.as_str().into(),
        mode: match mode {
            Mode::Integral => "integral",
            Mode::Fractional => "fractional",
        }
        .into(),
        trace: trace_desc.into(),
        n: cfg.n as u64,
        t: t as u64,
        capacity: cfg.capacity,
        batch: cfg.batch,
        eta_setting: tuning_str(cfg.eta),
        eta: cfg.resolved_eta()?,
        zeta_setting: tuning_str(cfg.zeta),
        zeta: cfg.resolved_zeta()?,
        window: cfg.window as u64,
        seed: spec.seed,
        sampler_seed: cfg.seeds.sampler,
        ftpl_seed: cfg.seeds.ftpl,
        hit_ratio: log.hit_ratio(mode),
        opt_hit_ratio: opt.last().context("empty trace")? / t as f64,
        final_regret: last.regret,
        final_regret_bound: last.regret_bound,
        occupancy_mean: occ_stats.mean,
        occupancy_cov: occ_stats.cov,
        occupancy_max_rel_dev: occ_stats.max_rel_dev,
        removals_per_req: log.removals.iter().map(|&r| r as f64).sum::<f64>() / t as f64,
        wall_ns_per_req: wall.as_nanos() as f64 / t as f64,
    };
    Ok(SimOutput { summary, rows, occupancy: samples, rewards: log.rewards_for(mode) })
}

pub fn path_with(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn write_series<W: Write>(rows: &[WindowRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER)?;
    for r in rows {
        w.write_record([
            r.start.to_string(),
            num(r.hit_ratio),
            num(r.occupancy),
            num(r.removals_per_req),
            num(r.regret),
            num(r.regret_bound),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_occupancy<W: Write>(samples: &[(u64, u32)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "occupancy"])?;
    for (t, o) in samples {
        w.write_record([t.to_string(), o.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(summary: &RunSummary, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Writes `<prefix>.summary.json`, `<prefix>.series.csv` and
/// `<prefix>.occupancy.csv`.
pub fn write_outputs(prefix: &Path, out: &SimOutput) -> Result<()> {
    write_summary(&out.summary, create(&path_with(prefix, ".summary.json"))?)?;
    write_series(&out.rows, create(&path_with(prefix, ".series.csv"))?)?;
    write_occupancy(&out.occupancy, create(&path_with(prefix, ".occupancy.csv"))?)?;
    Ok(())
}
