use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::Mat2;
use crate::state::PureState;
use crate::system::SystemSpec;

pub const DEFAULT_J: f64 = 3300.0;
pub const DEFAULT_DT: f64 = 1e-7;
/// Upper bound on the total single-jump probability per step.
pub const MAX_STEP_JUMP_PROBABILITY: f64 = 0.05;

/// Decay rates tied to the Ising coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub j: f64,
    pub n: usize,
    pub x: f64,
    pub chi: f64,
    pub gamma_dep: f64,
    pub gamma_ad: f64,
    pub gamma_se: f64,
}

pub fn build_rate_model(j: f64, n: usize, x: f64) -> Result<RateModel> {
    if !j.is_finite() || j <= 0.0 {
        return Err(Error::invalid("J", format!("must be positive, got {j}")));
    }
    if n < 2 {
        return Err(Error::QubitCount {
            n,
            min: 2,
            max: crate::system::DEFAULT_MAX_QUBITS,
        });
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::invalid("x", format!("must be nonnegative, got {x}")));
    }
    Ok(RateModel {
        j,
        n,
        x,
        chi: 2.0 * j / n as f64,
        gamma_dep: x * j / 50.0,
        gamma_ad: x * j / 100.0,
        gamma_se: x * j / 100.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    Dephasing,
    AmplitudeDamping,
    SpontaneousExcitation,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [
        ChannelKind::Dephasing,
        ChannelKind::AmplitudeDamping,
        ChannelKind::SpontaneousExcitation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::AmplitudeDamping => "amplitude-damping",
            ChannelKind::SpontaneousExcitation => "spontaneous-excitation",
        }
    }
}

/// `(M0, M1)` for one qubit.
pub fn single_qubit_kraus(kind: ChannelKind, p: f64) -> Result<(Mat2, Mat2)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let z = Complex64::new(0.0, 0.0);
    let r = |v: f64| Complex64::new(v, 0.0);
    let (a, b) = ((1.0 - p).sqrt(), p.sqrt());
    Ok(match kind {
        ChannelKind::Dephasing => ([[r(a), z], [z, r(a)]], [[r(b), z], [z, r(-b)]]),
        ChannelKind::AmplitudeDamping => ([[r(1.0), z], [z, r(a)]], [[z, r(b)], [z, z]]),
        ChannelKind::SpontaneousExcitation => ([[r(a), z], [z, r(1.0)]], [[z, z], [r(b), z]]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub kind: ChannelKind,
    pub qubit: usize,
    pub probability: f64,
}

/// All `3N` single-qubit jumps at a fixed step size.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    spec: SystemSpec,
    pub rates: RateModel,
    pub dt: f64,
    pub p1: f64,
    pub p2: f64,
    pub jumps: Vec<Jump>,
}

impl ChannelSet {
    pub fn new(spec: &SystemSpec, rates: RateModel, dt: f64) -> Result<Self> {
        if rates.n != spec.n_qubits() {
            return Err(Error::invalid(
                "rates",
                format!("built for N={}, system has N={}", rates.n, spec.n_qubits()),
            ));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        let n = spec.n_qubits();
        // x·N·χ·dt/100 equals Γ_dep·dt since χ = 2J/N.
        let p1 = rates.x * n as f64 * rates.chi * dt / 100.0;
        let p2 = p1 / 2.0;
        let total = n as f64 * (p1 + 2.0 * p2);
        if total > MAX_STEP_JUMP_PROBABILITY {
            return Err(Error::JumpBudget {
                total,
                limit: MAX_STEP_JUMP_PROBABILITY,
            });
        }
        let mut jumps = Vec::with_capacity(3 * n);
        for kind in ChannelKind::ALL {
            let probability = if kind == ChannelKind::Dephasing { p1 } else { p2 };
            jumps.extend((0..n).map(|qubit| Jump {
                kind,
                qubit,
                probability,
            }));
        }
        Ok(Self {
            spec: spec.clone(),
            rates,
            dt,
            p1,
            p2,
            jumps,
        })
    }

    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Self::new(&self.spec, self.rates, dt)
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn total_jump_probability(&self) -> f64 {
        self.spec.n_qubits() as f64 * (self.p1 + 2.0 * self.p2)
    }

    pub fn probability(&self, kind: ChannelKind) -> f64 {
        match kind {
            ChannelKind::Dephasing => self.p1,
            _ => self.p2,
        }
    }

    /// `ΣL†L·dt` per basis index. Constant because every qubit is either up or down.
    pub fn decay_sum(&self) -> f64 {
        self.spec.n_qubits() as f64 * (self.p1 + self.p2)
    }

    /// Diagonal of the first-order no-jump operator `1 − i·dt·H_eff`, per excitation number.
    pub fn no_jump_diagonal(&self) -> Vec<Complex64> {
        let n = self.spec.n_qubits();
        let chi = self.rates.chi;
        (0..=n)
            .map(|m| {
                let mm = n as f64 / 2.0 - m as f64;
                Complex64::new(1.0 - 0.5 * self.decay_sum(), -chi * self.dt * mm * mm)
            })
            .collect()
    }
}

/// Applies the jump operator `M1` of `kind` on `qubit`, then renormalizes.
pub fn apply_jump(mut state: PureState, kind: ChannelKind, qubit: usize) -> Result<PureState> {
    state.spec().check_qubit(qubit)?;
    let bit = state.spec().qubit_mask(qubit);
    let amps = state.amplitudes_mut();
    let zero = Complex64::new(0.0, 0.0);
    match kind {
        ChannelKind::Dephasing => {
            for (b, a) in amps.iter_mut().enumerate() {
                if b & bit != 0 {
                    *a = -*a;
                }
            }
        }
        ChannelKind::AmplitudeDamping => {
            for b in 0..amps.len() {
                if b & bit == 0 {
                    amps[b] = amps[b | bit];
                    amps[b | bit] = zero;
                }
            }
        }
        ChannelKind::SpontaneousExcitation => {
            for b in 0..amps.len() {
                if b & bit == 0 {
                    amps[b | bit] = amps[b];
                    amps[b] = zero;
                }
            }
        }
    }
    if state.norm_sqr() <= 1e-300 {
        return Err(Error::ImpossibleJump {
            kind: kind.name(),
            qubit,
        });
    }
    state.normalize()?;
    Ok(state)
}

/// Down-spin population of `qubit`.
pub fn down_population(state: &PureState, qubit: usize) -> f64 {
    let bit = state.spec().qubit_mask(qubit);
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(b, _)| b & bit != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// `⟨ψ|M1†M1|ψ⟩` for the given jump; assumes a normalized state.
pub fn jump_probability(
    state: &PureState,
    kind: ChannelKind,
    qubit: usize,
    channels: &ChannelSet,
) -> f64 {
    match kind {
        ChannelKind::Dephasing => channels.p1,
        ChannelKind::AmplitudeDamping => channels.p2 * down_population(state, qubit),
        ChannelKind::SpontaneousExcitation => {
            channels.p2 * (1.0 - down_population(state, qubit)).max(0.0)
        }
    }
}

/// Diagonal of `H_eff = χM² − (i/2)ΣL†L` as `(hermitian, anti-hermitian)` pairs per basis index.
pub fn effective_hamiltonian_diagonal(channels: &ChannelSet, chi: f64) -> Vec<(f64, f64)> {
    let profile = channels.spec().profile();
    let n = channels.spec().n_qubits() as f64;
    (0..channels.spec().dim())
        .map(|b| {
            let m = profile.excitation(b) as f64;
            let mm = profile.spin_projection(b);
            let l_sum = (n * channels.p1 + m * channels.p2 + (n - m) * channels.p2) / channels.dt;
            (chi * mm * mm, -0.5 * l_sum)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{coherent_spin_state, ghz_state, make_all_up};

    fn mat_dag_mul(a: &Mat2) -> Mat2 {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for row in a {
                    out[i][j] += row[i].conj() * row[j];
                }
            }
        }
        out
    }

    #[test]
    fn rate_model_example() {
        let r = build_rate_model(3300.0, 10, 1.0).unwrap();
        assert!((r.chi - 660.0).abs() < 1e-12);
        assert!((r.gamma_dep - 66.0).abs() < 1e-12);
        assert!((r.gamma_ad - 33.0).abs() < 1e-12);
        assert!((r.gamma_se - 33.0).abs() < 1e-12);
        let r0 = build_rate_model(3300.0, 10, 0.0).unwrap();
        assert_eq!((r0.gamma_dep, r0.gamma_ad, r0.gamma_se), (0.0, 0.0, 0.0));
        assert!(build_rate_model(0.0, 4, 1.0).is_err());
        assert!(build_rate_model(-1.0, 4, 1.0).is_err());
    }

    #[test]
    fn kraus_completeness() {
        for kind in ChannelKind::ALL {
            for p in [0.0, 0.1, 0.25, 0.5, 0.99, 1.0] {
                let (m0, m1) = single_qubit_kraus(kind, p).unwrap();
                let a = mat_dag_mul(&m0);
                let b = mat_dag_mul(&m1);
                for i in 0..2 {
                    for j in 0..2 {
                        let e = if i == j { 1.0 } else { 0.0 };
                        assert!((a[i][j] + b[i][j] - Complex64::new(e, 0.0)).norm() < 1e-15);
                    }
                }
            }
        }
        assert!(single_qubit_kraus(ChannelKind::Dephasing, 1.5).is_err());
        assert!(single_qubit_kraus(ChannelKind::Dephasing, -0.1).is_err());
    }

    #[test]
    fn damping_matrix_entry() {
        let (_, m1) = single_qubit_kraus(ChannelKind::AmplitudeDamping, 0.25).unwrap();
        assert_eq!(m1[0][1], Complex64::new(0.5, 0.0));
        assert_eq!(m1[0][0], Complex64::new(0.0, 0.0));
        let (m0, m1) = single_qubit_kraus(ChannelKind::Dephasing, 0.0).unwrap();
        assert_eq!(m1[0][0], Complex64::new(0.0, 0.0));
        assert_eq!(m0[1][1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn channel_set_layout() {
        let spec = SystemSpec::new(4).unwrap();
        let r = build_rate_model(DEFAULT_J, 4, 1.0).unwrap();
        let set = ChannelSet::new(&spec, r, DEFAULT_DT).unwrap();
        assert_eq!(set.jumps.len(), 12);
        assert_eq!(set.p2, set.p1 / 2.0);
        assert!((set.p1 - r.gamma_dep * DEFAULT_DT).abs() < 1e-18);
        assert_eq!(set.jumps[0].kind, ChannelKind::Dephasing);
        assert_eq!(set.jumps[4].kind, ChannelKind::AmplitudeDamping);
        assert_eq!(set.jumps[11].kind, ChannelKind::SpontaneousExcitation);
        assert_eq!(set.jumps[11].qubit, 3);
        assert!(ChannelSet::new(&spec, r, 1e-3).is_err());
    }

    #[test]
    fn jump_examples() {
        let spec = SystemSpec::new(4).unwrap();
        let up = make_all_up(&spec);
        let out = apply_jump(up.clone(), ChannelKind::Dephasing, 2).unwrap();
        assert!((up.inner(&out).unwrap().norm_sqr() - 1.0).abs() < 1e-15);
        assert!(apply_jump(up, ChannelKind::AmplitudeDamping, 1).is_err());
    }

    #[test]
    fn single_qubit_damping_via_embedding() {
        // |↑↓⟩: damping the second qubit yields |↑↑⟩.
        let spec = SystemSpec::new(2).unwrap();
        let s = PureState::basis(&spec, 1).unwrap();
        let out = apply_jump(s, ChannelKind::AmplitudeDamping, 1).unwrap();
        assert_eq!(out, make_all_up(&spec));
    }

    #[test]
    fn excitation_on_ghz() {
        let spec = SystemSpec::new(3).unwrap();
        let out = apply_jump(ghz_state(&spec), ChannelKind::SpontaneousExcitation, 0).unwrap();
        // σ⁺ on qubit 0 maps |000⟩ to |100⟩ and annihilates |111⟩.
        assert!((out.amplitudes()[0b100].re - 1.0).abs() < 1e-15);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jump_probability_examples() {
        let spec = SystemSpec::new(4).unwrap();
        let set = ChannelSet::new(&spec, build_rate_model(DEFAULT_J, 4, 1.0).unwrap(), DEFAULT_DT)
            .unwrap();
        let cs = coherent_spin_state(&spec);
        assert_eq!(jump_probability(&cs, ChannelKind::Dephasing, 0, &set), set.p1);
        let up = make_all_up(&spec);
        assert_eq!(jump_probability(&up, ChannelKind::AmplitudeDamping, 2, &set), 0.0);
        let g = ghz_state(&spec);
        for q in 0..4 {
            let dp = jump_probability(&g, ChannelKind::AmplitudeDamping, q, &set);
            assert!((dp - set.p2 / 2.0).abs() < 1e-18);
        }
    }

    #[test]
    fn effective_hamiltonian_examples() {
        let spec = SystemSpec::new(4).unwrap();
        let r0 = build_rate_model(DEFAULT_J, 4, 0.0).unwrap();
        let set0 = ChannelSet::new(&spec, r0, DEFAULT_DT).unwrap();
        for (b, (h, a)) in effective_hamiltonian_diagonal(&set0, r0.chi).into_iter().enumerate() {
            let mm = spec.profile().spin_projection(b);
            assert_eq!(a, 0.0);
            assert!((h - r0.chi * mm * mm).abs() < 1e-9);
        }
        let r1 = build_rate_model(DEFAULT_J, 4, 1.0).unwrap();
        let set1 = ChannelSet::new(&spec, r1, DEFAULT_DT).unwrap();
        let diag = effective_hamiltonian_diagonal(&set1, r1.chi);
        let expect = -0.5 * (4.0 * set1.p1 + 4.0 * set1.p2) / DEFAULT_DT;
        assert!((diag[0].1 - expect).abs() < 1e-9);
    }
}
