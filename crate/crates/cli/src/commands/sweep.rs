use projsq_core::measurement::uniform_grid;
use projsq_core::protocols::{sweep as run_sweep, ProtocolParams};
use projsq_core::SweepAxis;

use super::Context;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, OutputTable};

const COLUMNS: &[&str] = &[
    "protocol", "axis", "value", "seed", "fidelity", "qfi", "density", "witness", "sd", "se", "error",
];

fn axis_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::C => "c",
        SweepAxis::Sigma2 => "sigma2",
        SweepAxis::ChiT => "chi-t",
        SweepAxis::X => "x",
        SweepAxis::N => "n",
    }
}

/// Sweep values from `--values` or from `--from/--to/--step`, never both.
fn values(ctx: &Context) -> CliResult<Vec<f64>> {
    let s = &ctx.settings;
    let listed = s.list("values")?;
    let range: [Option<f64>; 3] = [s.get("from")?, s.get("to")?, s.get("step")?];
    match (listed.is_empty(), range) {
        (false, [None, None, None]) => Ok(listed),
        (true, [Some(lo), Some(hi), Some(step)]) => {
            if step <= 0.0 || hi < lo {
                return Err(CliError::usage("--from/--to/--step needs from <= to and step > 0"));
            }
            Ok(uniform_grid(lo, hi, step))
        }
        (true, [None, None, None]) => Err(CliError::usage("give --values or --from/--to/--step")),
        _ => Err(CliError::usage("use either --values or all of --from/--to/--step")),
    }
}

/// One protocol run per axis value. Failing points are reported in the
/// `error` column rather than aborting the sweep.
pub fn sweep(ctx: &mut Context) -> CliResult<()> {
    let protocol = ctx.settings.raw("protocol").unwrap_or("ps").to_ascii_lowercase();
    let axis: SweepAxis = ctx
        .settings
        .raw("axis")
        .ok_or_else(|| CliError::usage("missing required --axis"))?
        .parse()?;
    let values = values(ctx)?;
    // For an N sweep the base size only seeds the engine choice.
    let n = match (axis, ctx.settings.get::<usize>("n")?) {
        (_, Some(n)) => n,
        (SweepAxis::N, None) => values.first().map_or(0, |v| *v as usize),
        (_, None) => return Err(CliError::usage("missing required --n")),
    };
    if axis != SweepAxis::N || ctx.settings.raw("n").is_some() {
        ctx.manifest.set("n", n);
    }
    let params = match protocol.as_str() {
        "ps" => ProtocolParams::Ps(ctx.ps_params(n)?),
        "mss" => ProtocolParams::Mss(ctx.mss_params(n)?),
        other => return Err(CliError::usage(format!("unknown protocol `{other}`; use ps or mss"))),
    };
    let listed: Vec<String> = values.iter().map(f64::to_string).collect();
    ctx.manifest
        .set("protocol", &protocol)
        .set("axis", axis_name(axis))
        .set("values", listed.join(","));
    let mut table = OutputTable::new(COLUMNS);
    for p in run_sweep(&params, axis, &values) {
        let mut row: Vec<Cell> = vec![protocol.as_str().into(), axis_name(axis).into(), p.value.into(), p.seed.into()];
        match p.result {
            Ok(r) => {
                let stats = r.stats.as_ref();
                row.extend([
                    r.fidelity.into(),
                    r.qfi.map(|q| q.value).into(),
                    r.post_selection_probability.into(),
                    r.witness.into(),
                    stats.map(|s| s.sd).into(),
                    stats.map(|s| s.se).into(),
                    Cell::Empty,
                ]);
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(Cell::Empty, 6));
                row.push(e.to_string().into());
            }
        }
        table.push(row);
    }
    ctx.finish(&table)
}
