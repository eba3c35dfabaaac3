//! Parameter grids run in parallel, one policy instance per cell, the trace
//! shared read-only.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use ogb_core::policies::{PolicyKind, Tuning};
use ogb_core::Trace;
use rayon::prelude::*;

use crate::format::{num, tuning_str};
use crate::seed::cell_seed;
use crate::simulate::{path_with, simulate, write_outputs, Capacity, RunSummary, SimSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub policies: Vec<PolicyKind>,
    pub capacities: Vec<Capacity>,
    pub batches: Vec<u64>,
    pub etas: Vec<Tuning>,
    pub zetas: Vec<Tuning>,
    /// Runs per configuration, each with its own seed.
    pub replicates: u32,
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub replicate: u32,
    pub spec: SimSpec,
}

fn uses_eta(p: PolicyKind) -> bool {
    matches!(p, PolicyKind::Ogb | PolicyKind::OgbFrac | PolicyKind::OgbCl)
}

impl Grid {
    /// Cells in nested order policy, capacity, batch, η, ζ, replicate. A
    /// policy only ranges over the parameters it reads: η for the gradient
    /// policies, ζ for FTPL, and the batch size for neither FTPL, LRU, LFU
    /// nor OPT. Cell `i` runs with seed `mix(master, i)`.
    pub fn cells(&self, master_seed: u64) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &policy in &self.policies {
            let batches: &[u64] = if uses_eta(policy) { &self.batches } else { &[1] };
            let etas: &[Tuning] = if uses_eta(policy) { &self.etas } else { &[Tuning::Auto] };
            let zetas: &[Tuning] = if policy == PolicyKind::Ftpl { &self.zetas } else { &[Tuning::Auto] };
            for &capacity in &self.capacities {
                for &batch in batches {
                    for &eta in etas {
                        for &zeta in zetas {
                            for replicate in 0..self.replicates {
                                let index = cells.len();
                                let spec = SimSpec {
                                    policy,
                                    capacity,
                                    batch,
                                    eta,
                                    zeta,
                                    window: self.window,
                                    seed: cell_seed(master_seed, index as u64),
                                };
                                cells.push(Cell { index, replicate, spec });
                            }
                        }
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug)]
pub struct CellOutcome {
    pub cell: Cell,
    pub result: Result<RunSummary, String>,
}

fn cell_prefix(prefix: &Path, index: usize) -> std::path::PathBuf {
    path_with(prefix, &format!(".cell{index}"))
}

fn run_cell(trace: &Trace, trace_desc: &str, cell: &Cell, prefix: &Path) -> Result<RunSummary> {
    let out = simulate(trace, trace_desc, &cell.spec)?;
    write_outputs(&cell_prefix(prefix, cell.index), &out)?;
    Ok(out.summary)
}

/// Runs every cell on a pool of `jobs` threads (0 = one per core), writing
/// `<prefix>.cell<i>.*` per cell and then the merged `<prefix>.sweep.csv`.
/// A failing or panicking cell is recorded and does not stop the others.
pub fn run_sweep(trace: &Trace, trace_desc: &str, cells: &[Cell], prefix: &Path, jobs: usize) -> Result<Vec<CellOutcome>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let outcomes: Vec<CellOutcome> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let result = catch_unwind(AssertUnwindSafe(|| run_cell(trace, trace_desc, cell, prefix)))
                    .unwrap_or_else(|panic| {
                        let msg = panic
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_else(|| "unknown panic".into());
                        Err(anyhow!("panicked: {msg}"))
                    })
                    .map_err(|e| format!("{e:#}"));
                CellOutcome { cell: cell.clone(), result }
            })
            .collect()
    });
    let path = path_with(prefix, ".sweep.csv");
    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    write_merged(&outcomes, BufWriter::new(file))?;
    Ok(outcomes)
}

pub const SWEEP_HEADER: [&str; 21] = [
    "cell",
    "status",
    "policy",
    "capacity",
    "batch",
    "eta_setting",
    "eta",
    "zeta_setting",
    "zeta",
    "replicate",
    "seed",
    "hit_ratio",
    "opt_hit_ratio",
    "final_regret",
    "final_regret_bound",
    "occupancy_mean",
    "occupancy_cov",
    "occupancy_max_rel_dev",
    "removals_per_req",
    "wall_ns_per_req",
    "error",
];

pub fn write_merged<W: Write>(outcomes: &[CellOutcome], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for o in outcomes {
        let spec = &o.cell.spec;
        let mut rec = vec![o.cell.index.to_string()];
        match &o.result {
            Ok(s) => {
                rec.extend([
                    "ok".to_string(),
                    s.policy.clone(),
                    num(s.capacity),
                    s.batch.to_string(),
                    s.eta_setting.clone(),
                    num(s.eta),
                    s.zeta_setting.clone(),
                    num(s.zeta),
                    o.cell.replicate.to_string(),
                    s.seed.to_string(),
                ]);
                rec.extend(
                    [
                        s.hit_ratio,
                        s.opt_hit_ratio,
                        s.final_regret,
                        s.final_regret_bound,
                        s.occupancy_mean,
                        s.occupancy_cov,
                        s.occupancy_max_rel_dev,
                        s.removals_per_req,
                        s.wall_ns_per_req,
                    ]
                    .map(num),
                );
                rec.push(String::new());
            }
            Err(e) => {
                let capacity = match spec.capacity {
                    Capacity::Items(c) => num(c),
                    Capacity::Fraction(f) => format!("frac:{}", num(f)),
                };
                rec.extend([
                    "failed".to_string(),
                    spec.policy.as_str().to_string(),
                    capacity,
                    spec.batch.to_string(),
                    tuning_str(spec.eta),
                    String::new(),
                    tuning_str(spec.zeta),
                    String::new(),
                    o.cell.replicate.to_string(),
                    spec.seed.to_string(),
                ]);
                rec.extend(std::iter::repeat_n(String::new(), 9));
                rec.push(e.clone());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid {
            policies: vec![PolicyKind::Ogb, PolicyKind::Ftpl, PolicyKind::Lru],
            capacities: vec![Capacity::Fraction(0.1)],
            batches: vec![1, 10],
            etas: vec![Tuning::Auto, Tuning::Scaled(0.1)],
            zetas: vec![Tuning::Auto, Tuning::Fixed(0.0), Tuning::Scaled(10.0)],
            replicates: 2,
            window: 100,
        }
    }

    #[test]
    fn cells_skip_unused_parameters() {
        let cells = grid().cells(5);
        // ogb: 2 batches x 2 etas x 2 reps, ftpl: 3 zetas x 2 reps, lru: 2 reps
        assert_eq!(cells.len(), 8 + 6 + 2);
        assert!(cells.iter().enumerate().all(|(i, c)| c.index == i));
        assert_eq!(cells[0].spec.seed, cell_seed(5, 0));
        assert_ne!(cells[0].spec.seed, cells[1].spec.seed);
        assert!(cells.iter().filter(|c| c.spec.policy == PolicyKind::Ftpl).all(|c| c.spec.batch == 1));
    }
}
