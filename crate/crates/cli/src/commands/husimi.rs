use std::f64::consts::PI;

use projsq_core::protocols::{stage_state, ProtocolStage, HUSIMI_THETA_MAX};
use projsq_core::spin::husimi as husimi_at;
use rayon::prelude::*;

use super::Context;
use crate::error::{CliError, CliResult};
use crate::output::OutputTable;

const COLUMNS: &[&str] = &["theta", "phi", "husimi"];
const DEFAULT_N_THETA: usize = 73;
const DEFAULT_N_PHI: usize = 73;

fn axis(n: usize, max: f64) -> Vec<f64> {
    (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()
}

/// `H(θ, φ)` on a regular grid, `θ, φ ∈ [0, 2π]`.
pub fn husimi(ctx: &mut Context) -> CliResult<()> {
    let n = ctx.n()?;
    let params = ctx.ps_params(n)?;
    let s = &ctx.settings;
    let stage: ProtocolStage = s
        .raw("stage")
        .ok_or_else(|| CliError::usage("missing required --stage"))?
        .parse()?;
    let n_theta: usize = s.get_or("n-theta", DEFAULT_N_THETA)?;
    let n_phi: usize = s.get_or("n-phi", DEFAULT_N_PHI)?;
    if n_theta < 2 || n_phi < 2 {
        return Err(CliError::usage("--n-theta and --n-phi must be at least 2"));
    }
    if params.engine.x != 0.0 {
        return Err(CliError::usage("husimi plots use the decoherence-free protocol; drop --x"));
    }
    ctx.manifest
        .set("stage", s.raw("stage").unwrap_or_default().to_ascii_lowercase())
        .set("n-theta", n_theta)
        .set("n-phi", n_phi);
    let state = stage_state(&params, stage)?;
    let thetas = axis(n_theta, HUSIMI_THETA_MAX);
    let phis = axis(n_phi, 2.0 * PI);
    let rows: Vec<Vec<(f64, f64, f64)>> = thetas
        .par_iter()
        .map(|&t| phis.iter().map(|&p| (t, p, husimi_at(&state, t, p))).collect())
        .collect();
    let mut table = OutputTable::new(COLUMNS);
    for (t, p, h) in rows.into_iter().flatten() {
        table.push(vec![t.into(), p.into(), h.into()]);
    }
    ctx.finish(&table)
}
