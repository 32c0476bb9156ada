use serde::{Deserialize, Serialize};

use crate::channels::{build_rate_model, ChannelSet, RateModel, DEFAULT_DT, DEFAULT_J};
use crate::error::{Error, Result};
use crate::system::SystemSpec;

pub const DEFAULT_KRAUS_MAX_QUBITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EngineKind {
    Kraus,
    Trajectory,
    /// Exact diagonal twist; decoherence-free only.
    PureUnitary,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Kraus => "kraus",
            EngineKind::Trajectory => "trajectory",
            EngineKind::PureUnitary => "pure",
        }
    }
}

impl std::str::FromStr for EngineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kraus" => Ok(EngineKind::Kraus),
            "trajectory" | "traj" => Ok(EngineKind::Trajectory),
            "pure" | "pure-unitary" | "unitary" => Ok(EngineKind::PureUnitary),
            other => Err(Error::invalid("engine", format!("unknown engine `{other}`"))),
        }
    }
}

/// Step schedule and channels for one squeezing stage.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub engine: EngineKind,
    pub total_chi_t: f64,
    pub channels: ChannelSet,
    pub kraus_max_qubits: usize,
}

/// One run of identical steps.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSegment {
    pub channels: ChannelSet,
    pub steps: usize,
}

impl EngineConfig {
    pub fn new(
        spec: &SystemSpec,
        rates: RateModel,
        dt: f64,
        total_chi_t: f64,
        engine: EngineKind,
    ) -> Result<Self> {
        if !total_chi_t.is_finite() || total_chi_t < 0.0 {
            return Err(Error::invalid("chi_t", format!("must be nonnegative, got {total_chi_t}")));
        }
        if engine == EngineKind::PureUnitary && rates.x != 0.0 {
            return Err(Error::invalid(
                "engine",
                "the pure engine has no decoherence; use kraus or trajectory when x > 0",
            ));
        }
        let channels = ChannelSet::new(spec, rates, dt)?;
        let config = Self {
            engine,
            total_chi_t,
            channels,
            kraus_max_qubits: DEFAULT_KRAUS_MAX_QUBITS,
        };
        config.check_guard()?;
        Ok(config)
    }

    /// Default coupling and step size.
    pub fn standard(spec: &SystemSpec, x: f64, total_chi_t: f64, engine: EngineKind) -> Result<Self> {
        let rates = build_rate_model(DEFAULT_J, spec.n_qubits(), x)?;
        Self::new(spec, rates, DEFAULT_DT, total_chi_t, engine)
    }

    pub fn with_kraus_limit(mut self, max: usize) -> Result<Self> {
        self.kraus_max_qubits = max;
        self.check_guard()?;
        Ok(self)
    }

    pub fn check_guard(&self) -> Result<()> {
        let n = self.spec().n_qubits();
        if self.engine == EngineKind::Kraus && n > self.kraus_max_qubits {
            return Err(Error::EngineGuard {
                engine: "kraus",
                n,
                max: self.kraus_max_qubits,
            });
        }
        Ok(())
    }

    pub fn spec(&self) -> &SystemSpec {
        self.channels.spec()
    }

    pub fn dt(&self) -> f64 {
        self.channels.dt
    }

    pub fn chi(&self) -> f64 {
        self.channels.rates.chi
    }

    /// Evolution time `t = χt/χ`.
    pub fn total_time(&self) -> f64 {
        self.total_chi_t / self.chi()
    }

    /// `round(t/dt)`, at least one step when `t > 0`.
    pub fn n_steps(&self) -> usize {
        if self.total_chi_t == 0.0 {
            return 0;
        }
        ((self.total_time() / self.dt()).round() as usize).max(1)
    }

    /// Full steps followed by one final step whose length makes the total time exact.
    pub fn segments(&self) -> Result<Vec<StepSegment>> {
        let n = self.n_steps();
        if n == 0 {
            return Ok(Vec::new());
        }
        let last_dt = self.total_time() - (n - 1) as f64 * self.dt();
        let mut segs = Vec::with_capacity(2);
        if n > 1 {
            segs.push(StepSegment {
                channels: self.channels.clone(),
                steps: n - 1,
            });
        }
        segs.push(StepSegment {
            channels: self.channels.with_dt(last_dt)?,
            steps: 1,
        });
        Ok(segs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count_and_exact_total() {
        let spec = SystemSpec::new(4).unwrap();
        let cfg = EngineConfig::standard(&spec, 1.0, 0.15, EngineKind::Kraus).unwrap();
        let chi = 2.0 * DEFAULT_J / 4.0;
        assert_eq!(cfg.n_steps(), (0.15 / chi / 1e-7_f64).round() as usize);
        let total: f64 = cfg
            .segments()
            .unwrap()
            .iter()
            .map(|s| s.steps as f64 * s.channels.dt * chi)
            .sum();
        assert!((total - 0.15).abs() < 1e-12);
    }

    #[test]
    fn zero_evolution_has_no_steps() {
        let spec = SystemSpec::new(4).unwrap();
        let cfg = EngineConfig::standard(&spec, 1.0, 0.0, EngineKind::Trajectory).unwrap();
        assert_eq!(cfg.n_steps(), 0);
        assert!(cfg.segments().unwrap().is_empty());
    }

    #[test]
    fn guards() {
        let spec = SystemSpec::new(12).unwrap();
        assert!(matches!(
            EngineConfig::standard(&spec, 1.0, 0.15, EngineKind::Kraus),
            Err(Error::EngineGuard { .. })
        ));
        assert!(EngineConfig::standard(&spec, 1.0, 0.15, EngineKind::PureUnitary).is_err());
        assert!(EngineConfig::standard(&spec, 0.0, 0.15, EngineKind::PureUnitary).is_ok());
        let spec4 = SystemSpec::new(4).unwrap();
        let cfg = EngineConfig::standard(&spec4, 1.0, 0.15, EngineKind::Kraus).unwrap();
        assert!(cfg.with_kraus_limit(3).is_err());
        assert!(EngineConfig::standard(&spec4, 1.0, -0.1, EngineKind::Kraus).is_err());
    }

    #[test]
    fn engine_names_parse() {
        for e in [EngineKind::Kraus, EngineKind::Trajectory, EngineKind::PureUnitary] {
            assert_eq!(e.name().parse::<EngineKind>().unwrap(), e);
        }
        assert!("gpu".parse::<EngineKind>().is_err());
    }
}
