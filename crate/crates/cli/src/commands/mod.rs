mod husimi;
mod pdf;
mod run;
mod sweep;
mod table1;

use std::path::PathBuf;

use projsq_core::channels::{DEFAULT_DT, DEFAULT_J};
use projsq_core::engines::DEFAULT_KRAUS_MAX_QUBITS;
use projsq_core::protocols::{default_sigma2, DEFAULT_C, DEFAULT_CHI_T, DEFAULT_N_TRAJ};
use projsq_core::{EngineKind, EngineSettings, MssProtocolParams, PsProtocolParams};

use crate::args::Command;
use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::output::{emit, Format, OutputTable, RunManifest};

/// Resolved settings plus the manifest that records every effective value.
pub struct Context {
    pub settings: Settings,
    pub manifest: RunManifest,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Context {
    pub fn new(settings: Settings) -> CliResult<Self> {
        let out = settings.raw("out").map(PathBuf::from);
        let format = Format::parse(settings.raw("format"), out.as_deref())?;
        let mut manifest = RunManifest::new(settings.command());
        manifest.set("format", match format {
            Format::Csv => "csv",
            Format::Json => "json",
        });
        if let Some(t) = settings.raw("threads") {
            manifest.set("threads", t);
        }
        Ok(Self {
            settings,
            manifest,
            format,
            out,
        })
    }

    pub fn finish(&self, table: &OutputTable) -> CliResult<()> {
        emit(table, &self.manifest, self.format, self.out.as_deref())
    }

    /// Engine choice, rates and RNG settings. Decoherence defaults to `x = 1`
    /// when an open-system engine is requested and to `x = 0` otherwise.
    pub fn engine(&mut self, n: usize) -> CliResult<EngineSettings> {
        let s = &self.settings;
        let requested: Option<EngineKind> = s
            .raw("engine")
            .map(|e| e.parse::<EngineKind>())
            .transpose()?;
        let x: Option<f64> = s.get("x")?;
        let engine = match (requested, x) {
            (Some(e), _) => e,
            (None, Some(x)) if x > 0.0 => {
                if n <= DEFAULT_KRAUS_MAX_QUBITS {
                    EngineKind::Kraus
                } else {
                    EngineKind::Trajectory
                }
            }
            (None, _) => EngineKind::PureUnitary,
        };
        let x = x.unwrap_or(if engine == EngineKind::PureUnitary { 0.0 } else { 1.0 });
        let settings = EngineSettings {
            engine,
            x,
            j: s.get_or("j", DEFAULT_J)?,
            dt: s.get_or("dt", DEFAULT_DT)?,
            n_traj: s.get_or("n-traj", DEFAULT_N_TRAJ)?,
            seed: s.get_or("seed", 0)?,
            kraus_max_qubits: DEFAULT_KRAUS_MAX_QUBITS,
        };
        if engine == EngineKind::PureUnitary && x != 0.0 {
            return Err(CliError::usage("--engine pure cannot model decoherence; use --x 0 or another engine"));
        }
        self.manifest
            .set("engine", engine.name())
            .set("x", x)
            .set("j", settings.j)
            .set("dt", settings.dt);
        if engine == EngineKind::Trajectory {
            self.manifest
                .set("n-traj", settings.n_traj)
                .set("seed", settings.seed);
        }
        Ok(settings)
    }

    pub fn n(&mut self) -> CliResult<usize> {
        let n: usize = self.settings.require("n")?;
        self.manifest.set("n", n);
        Ok(n)
    }

    /// PS parameters for a single squeezing strength.
    pub fn ps_params(&mut self, n: usize) -> CliResult<PsProtocolParams> {
        let engine = self.engine(n)?;
        let mut p = PsProtocolParams::new(n).with_engine(engine);
        p.chi_t = self.settings.single("chi-t")?.unwrap_or(DEFAULT_CHI_T);
        p.c = self.settings.get_or("c", DEFAULT_C)?;
        p.sigma2 = self.settings.get_or("sigma2", default_sigma2(n))?;
        self.manifest
            .set("chi-t", p.chi_t)
            .set("c", p.c)
            .set("sigma2", p.sigma2);
        Ok(p)
    }

    pub fn mss_params(&mut self, n: usize) -> CliResult<MssProtocolParams> {
        let engine = self.engine(n)?;
        Ok(MssProtocolParams::new(n).with_engine(engine))
    }
}

pub fn run(command: &Command, settings: Settings) -> CliResult<()> {
    let mut ctx = Context::new(settings)?;
    match command {
        Command::PsRun(_) => run::ps_run(&mut ctx),
        Command::MssRun(_) => run::mss_run(&mut ctx),
        Command::Pdf(_) => pdf::pdf(&mut ctx),
        Command::Husimi(_) => husimi::husimi(&mut ctx),
        Command::Table1(_) => table1::table1(&mut ctx),
        Command::Sweep(_) => sweep::sweep(&mut ctx),
    }
}
