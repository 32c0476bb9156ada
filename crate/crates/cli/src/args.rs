use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "projsq", version, about = "Projected squeezed and macroscopic superposition state simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full PS protocol at one outcome `c`.
    PsRun(PsRunArgs),
    /// MSS benchmark protocol.
    MssRun(MssRunArgs),
    /// Outcome density of the pre-measurement state.
    Pdf(PdfArgs),
    /// Husimi distribution at a named protocol stage.
    Husimi(HusimiArgs),
    /// Interval fidelity ranges and post-selection probabilities over the standard (N, x) grid.
    Table1(Table1Args),
    /// Independent runs over one parameter axis.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::PsRun(_) => "ps-run",
            Command::MssRun(_) => "mss-run",
            Command::Pdf(_) => "pdf",
            Command::Husimi(_) => "husimi",
            Command::Table1(_) => "table1",
            Command::Sweep(_) => "sweep",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::PsRun(a) => &a.common,
            Command::MssRun(a) => &a.common,
            Command::Pdf(a) => &a.common,
            Command::Husimi(a) => &a.common,
            Command::Table1(a) => &a.common,
            Command::Sweep(a) => &a.common,
        }
    }

    /// Flag values as `(key, value)` pairs; keys match config-file keys.
    pub fn flag_pairs(&self) -> Vec<(&'static str, Option<String>)> {
        let mut out = self.common().pairs();
        match self {
            Command::PsRun(_) | Command::MssRun(_) | Command::Table1(_) => {}
            Command::Pdf(a) => {
                out.push(("c-min", a.c_min.map(|v| v.to_string())));
                out.push(("c-max", a.c_max.map(|v| v.to_string())));
                out.push(("c-step", a.c_step.map(|v| v.to_string())));
            }
            Command::Husimi(a) => {
                out.push(("stage", a.stage.clone()));
                out.push(("n-theta", a.n_theta.map(|v| v.to_string())));
                out.push(("n-phi", a.n_phi.map(|v| v.to_string())));
            }
            Command::Sweep(a) => {
                out.push(("protocol", a.protocol.clone()));
                out.push(("axis", a.axis.clone()));
                out.push(("values", join(&a.values)));
                out.push(("from", a.from.map(|v| v.to_string())));
                out.push(("to", a.to.map(|v| v.to_string())));
                out.push(("step", a.step.map(|v| v.to_string())));
            }
        }
        out
    }
}

fn join(values: &[f64]) -> Option<String> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Squeezing strength; `pdf` and `sweep` accept a comma-separated list.
    #[arg(long = "chi-t", value_delimiter = ',', allow_hyphen_values = true)]
    pub chi_t: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Measurement width; squared to give the Gaussian variance.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma2: Option<f64>,
    /// Decoherence strength; rates scale as `x·J`.
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Ising coupling in s⁻¹.
    #[arg(long, allow_negative_numbers = true)]
    pub j: Option<f64>,
    /// Step size in s.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// kraus | trajectory | pure
    #[arg(long)]
    pub engine: Option<String>,
    #[arg(long = "n-traj")]
    pub n_traj: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    pub format: Option<String>,
    /// INI file, or an earlier output whose manifest is replayed. Flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// coarse | full
    #[arg(long)]
    pub budget: Option<String>,
}

impl CommonArgs {
    fn pairs(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("n", self.n.map(|v| v.to_string())),
            ("chi-t", join(&self.chi_t)),
            ("c", self.c.map(|v| v.to_string())),
            ("sigma2", self.sigma2.map(|v| v.to_string())),
            ("x", self.x.map(|v| v.to_string())),
            ("j", self.j.map(|v| v.to_string())),
            ("dt", self.dt.map(|v| v.to_string())),
            ("engine", self.engine.clone()),
            ("n-traj", self.n_traj.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("threads", self.threads.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("format", self.format.clone()),
            ("budget", self.budget.clone()),
        ]
    }
}

#[derive(Debug, Args)]
pub struct PsRunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct MssRunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct PdfArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "c-min", allow_negative_numbers = true)]
    pub c_min: Option<f64>,
    #[arg(long = "c-max", allow_negative_numbers = true)]
    pub c_max: Option<f64>,
    #[arg(long = "c-step")]
    pub c_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct HusimiArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// init | cs | squeezed | rotated | ps | ghz | mss
    #[arg(long)]
    pub stage: Option<String>,
    #[arg(long = "n-theta")]
    pub n_theta: Option<usize>,
    #[arg(long = "n-phi")]
    pub n_phi: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// ps | mss
    #[arg(long)]
    pub protocol: Option<String>,
    /// c | sigma2 | chi-t | x | n
    #[arg(long)]
    pub axis: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}
