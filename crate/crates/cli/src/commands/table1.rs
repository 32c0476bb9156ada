use projsq_core::engines::DEFAULT_KRAUS_MAX_QUBITS;
use projsq_core::protocols::{
    interval_report_from, prepare_ps_state, run_mss_protocol, run_ps_protocol, DEFAULT_C,
};
use projsq_core::{EngineKind, EngineSettings, MssProtocolParams, PsProtocolParams};
use rayon::prelude::*;

use super::Context;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, OutputTable};

const COLUMNS: &[&str] = &[
    "n", "x", "engine", "sigma2", "n_traj", "c_lo", "c_hi", "f_min", "f_max", "probability", "f_mss",
    "f_sd", "f_se",
];

pub const SIZES: [usize; 5] = [4, 6, 8, 10, 12];
pub const DECOHERENCE: [f64; 2] = [0.0, 1.0];
pub const INTERVALS: [(f64, f64); 3] = [(-2.5, 1.5), (-2.5, -0.5), (-2.5, -1.5)];
pub const COARSE_STEP: f64 = 0.25;
pub const FULL_STEP: f64 = 0.05;
/// Heavy-tailed GHZ overlaps at N = 12 need more than the general default.
pub const TABLE_N_TRAJ: usize = 1000;

fn engine_for(n: usize, x: f64) -> EngineKind {
    if n <= DEFAULT_KRAUS_MAX_QUBITS {
        EngineKind::Kraus
    } else if x == 0.0 {
        EngineKind::PureUnitary
    } else {
        EngineKind::Trajectory
    }
}

struct Job {
    n: usize,
    x: f64,
    engine: EngineSettings,
}

fn rows_for(job: &Job, step: f64) -> projsq_core::Result<Vec<Vec<Cell>>> {
    let mut ps = PsProtocolParams::new(job.n).with_engine(job.engine.clone());
    ps.compute_qfi = false;
    let mut mss = MssProtocolParams::new(job.n).with_engine(job.engine.clone());
    mss.compute_qfi = false;
    let f_mss = run_mss_protocol(&mss)?.fidelity;
    let n_traj: Cell = match job.engine.engine {
        EngineKind::Trajectory => job.engine.n_traj.into(),
        _ => Cell::Empty,
    };
    let head = |c_lo: f64, c_hi: f64| -> Vec<Cell> {
        vec![
            job.n.into(),
            job.x.into(),
            job.engine.engine.name().into(),
            ps.sigma2.into(),
            n_traj.clone(),
            c_lo.into(),
            c_hi.into(),
        ]
    };
    if job.engine.engine == EngineKind::Trajectory {
        // Interval scans are out of reach here; report the optimal outcome only.
        ps.c = DEFAULT_C;
        let r = run_ps_protocol(&ps)?;
        let stats = r.stats.as_ref();
        let mut row = head(DEFAULT_C, DEFAULT_C);
        row.extend([
            r.fidelity.into(),
            r.fidelity.into(),
            Cell::Empty,
            f_mss.into(),
            stats.map(|s| s.sd).into(),
            stats.map(|s| s.se).into(),
        ]);
        return Ok(vec![row]);
    }
    let prepared = prepare_ps_state(&ps)?;
    INTERVALS
        .iter()
        .map(|&(lo, hi)| {
            let r = interval_report_from(&prepared, &ps, lo, hi, step)?;
            let mut row = head(lo, hi);
            row.extend([
                r.f_min.into(),
                r.f_max.into(),
                r.probability.into(),
                f_mss.into(),
                Cell::Empty,
                Cell::Empty,
            ]);
            Ok(row)
        })
        .collect()
}

/// Interval fidelity ranges over the standard `(N, x)` grid, Kraus up to the
/// engine limit and pure or trajectory beyond it.
pub fn table1(ctx: &mut Context) -> CliResult<()> {
    let s = &ctx.settings;
    let budget = s.raw("budget").unwrap_or("coarse").to_ascii_lowercase();
    let step = match budget.as_str() {
        "coarse" => COARSE_STEP,
        "full" => FULL_STEP,
        other => return Err(CliError::usage(format!("unknown budget `{other}`; use coarse or full"))),
    };
    let sizes: Vec<usize> = match s.get::<usize>("n")? {
        Some(n) => vec![n],
        None => SIZES.to_vec(),
    };
    let xs: Vec<f64> = match s.get::<f64>("x")? {
        Some(x) => vec![x],
        None => DECOHERENCE.to_vec(),
    };
    if s.raw("engine").is_some() {
        return Err(CliError::usage("table1 picks the engine per row; drop --engine"));
    }
    let j = s.get_or("j", projsq_core::DEFAULT_J)?;
    let dt = s.get_or("dt", projsq_core::DEFAULT_DT)?;
    let n_traj = s.get_or("n-traj", TABLE_N_TRAJ)?;
    let seed = s.get_or("seed", 0u64)?;
    let mut jobs = Vec::new();
    for &n in &sizes {
        for &x in &xs {
            jobs.push(Job {
                n,
                x,
                engine: EngineSettings {
                    engine: engine_for(n, x),
                    x,
                    j,
                    dt,
                    n_traj,
                    seed,
                    kraus_max_qubits: DEFAULT_KRAUS_MAX_QUBITS,
                },
            });
        }
    }
    // Only replayable keys go in the manifest; `n` and `x` only when restricted.
    if let [n] = sizes[..] {
        ctx.manifest.set("n", n);
    }
    if let [x] = xs[..] {
        ctx.manifest.set("x", x);
    }
    ctx.manifest
        .set("budget", &budget)
        .set("j", j)
        .set("dt", dt)
        .set("n-traj", n_traj)
        .set("seed", seed);
    let results: Vec<projsq_core::Result<Vec<Vec<Cell>>>> = jobs.par_iter().map(|job| rows_for(job, step)).collect();
    let mut table = OutputTable::new(COLUMNS);
    for rows in results {
        for row in rows? {
            table.push(row);
        }
    }
    ctx.finish(&table)
}
