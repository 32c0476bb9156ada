use projsq_core::measurement::{default_pdf_grid, uniform_grid, DEFAULT_PDF_STEP};
use projsq_core::protocols::{default_sigma2, ps_outcome_pdf, DEFAULT_CHI_T};
use projsq_core::PsProtocolParams;

use super::Context;
use crate::error::{CliError, CliResult};
use crate::output::OutputTable;

const COLUMNS: &[&str] = &["n", "chi_t", "sigma2", "c", "density"];

/// One curve per squeezing strength, on a shared outcome grid.
pub fn pdf(ctx: &mut Context) -> CliResult<()> {
    let n = ctx.n()?;
    let engine = ctx.engine(n)?;
    let s = &ctx.settings;
    let mut chi_ts = s.list("chi-t")?;
    if chi_ts.is_empty() {
        chi_ts.push(DEFAULT_CHI_T);
    }
    let sigma2: f64 = s.get_or("sigma2", default_sigma2(n))?;
    let mut base = PsProtocolParams::new(n).with_engine(engine);
    base.sigma2 = sigma2;
    let step: f64 = s.get_or("c-step", DEFAULT_PDF_STEP)?;
    if step.is_nan() || step <= 0.0 {
        return Err(CliError::usage("--c-step must be positive"));
    }
    let default = default_pdf_grid(n, base.measurement_variance(), step);
    let lo: f64 = s.get_or("c-min", default[0])?;
    let hi: f64 = s.get_or("c-max", default[default.len() - 1])?;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(CliError::usage("--c-min must be below --c-max"));
    }
    let grid = uniform_grid(lo, hi, step);
    let joined: Vec<String> = chi_ts.iter().map(f64::to_string).collect();
    ctx.manifest
        .set("chi-t", joined.join(","))
        .set("sigma2", sigma2)
        .set("c-min", lo)
        .set("c-max", hi)
        .set("c-step", step);
    let mut table = OutputTable::new(COLUMNS);
    for chi_t in chi_ts {
        let mut p = base.clone();
        p.chi_t = chi_t;
        let curve = ps_outcome_pdf(&p, &grid)?;
        for (c, d) in curve.grid.iter().zip(&curve.density) {
            table.push(vec![n.into(), chi_t.into(), sigma2.into(), (*c).into(), (*d).into()]);
        }
    }
    ctx.finish(&table)
}
