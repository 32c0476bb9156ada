use projsq_core::protocols::{run_mss_protocol, run_ps_protocol, ProtocolResult};

use super::Context;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, OutputTable};

const PS_COLUMNS: &[&str] = &[
    "n", "chi_t", "c", "sigma2", "x", "engine", "fidelity", "qfi", "density", "witness", "cramer_rao",
    "sd", "se", "n_used", "converged",
];

const MSS_COLUMNS: &[&str] = &[
    "n", "chi_t", "x", "engine", "fidelity", "qfi", "witness", "cramer_rao", "sd", "se", "n_used", "converged",
];

/// Metric cells shared by both protocols: fidelity through convergence flag.
pub(super) fn metric_cells(r: &ProtocolResult, with_density: bool) -> Vec<Cell> {
    let mut cells = vec![r.fidelity.into(), r.qfi.map(|q| q.value).into()];
    if with_density {
        cells.push(r.post_selection_probability.into());
    }
    cells.push(r.witness.into());
    cells.push(r.cramer_rao.into());
    match &r.stats {
        Some(s) => {
            cells.push(s.sd.into());
            cells.push(s.se.into());
            cells.push(Cell::Int(s.n));
            cells.push(s.converged.into());
        }
        None => cells.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]),
    }
    cells
}

pub fn ps_run(ctx: &mut Context) -> CliResult<()> {
    let n = ctx.n()?;
    let params = ctx.ps_params(n)?;
    let r = run_ps_protocol(&params)?;
    let mut table = OutputTable::new(PS_COLUMNS);
    let mut row: Vec<Cell> = vec![
        n.into(),
        params.chi_t.into(),
        params.c.into(),
        params.sigma2.into(),
        params.engine.x.into(),
        params.engine.engine.name().into(),
    ];
    row.extend(metric_cells(&r, true));
    table.push(row);
    ctx.finish(&table)
}

pub fn mss_run(ctx: &mut Context) -> CliResult<()> {
    if !ctx.settings.list("chi-t")?.is_empty() {
        return Err(CliError::usage("mss-run squeezes to a fixed chi t = pi/2; drop --chi-t"));
    }
    let n = ctx.n()?;
    let params = ctx.mss_params(n)?;
    let r = run_mss_protocol(&params)?;
    let mut table = OutputTable::new(MSS_COLUMNS);
    let mut row: Vec<Cell> = vec![
        n.into(),
        params.chi_t.into(),
        params.engine.x.into(),
        params.engine.engine.name().into(),
    ];
    row.extend(metric_cells(&r, false));
    table.push(row);
    ctx.finish(&table)
}
