//! Quantum-trajectory unraveling of the squeezing stage.
//!
//! Each step draws `ε ~ U[0,1)`; if `ε < Σ_j dp_j` one jump is chosen by
//! cumulative-sum bisection over the fixed jump order, otherwise the
//! first-order no-jump operator is applied and the state renormalized.
//! `Σ_j dp_j = N(p1 + p2)` does not depend on the state, so runs of no-jump
//! steps are applied in one go as `M0^k` before the next jump.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::EngineConfig;
use crate::channels::{apply_jump, down_population, ChannelKind, ChannelSet};
use crate::error::Result;
use crate::state::PureState;

/// RNG for trajectory `index` under `base_seed`: one ChaCha stream per trajectory.
pub fn trajectory_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    rng
}

fn apply_no_jump_power(state: &mut PureState, m0: &[Complex64], k: usize) -> Result<()> {
    if k == 0 {
        return Ok(());
    }
    let powers: Vec<Complex64> = m0.iter().map(|z| z.powi(k as i32)).collect();
    for (b, a) in state.amplitudes_mut().iter_mut().enumerate() {
        *a *= powers[b.count_ones() as usize];
    }
    state.normalize()?;
    Ok(())
}

/// Cumulative jump probabilities in the fixed order: dephasing, damping, excitation.
fn cumulative_jump_probabilities(state: &PureState, channels: &ChannelSet) -> Vec<f64> {
    let n = state.n_qubits();
    let down: Vec<f64> = (0..n).map(|q| down_population(state, q)).collect();
    let mut acc = 0.0;
    channels
        .jumps
        .iter()
        .map(|j| {
            acc += match j.kind {
                ChannelKind::Dephasing => channels.p1,
                ChannelKind::AmplitudeDamping => channels.p2 * down[j.qubit],
                ChannelKind::SpontaneousExcitation => channels.p2 * (1.0 - down[j.qubit]).max(0.0),
            };
            acc
        })
        .collect()
}

/// One trajectory through the squeezing stage driven by `rng`.
pub fn trajectory_squeeze_with<R: Rng>(
    mut state: PureState,
    config: &EngineConfig,
    rng: &mut R,
) -> Result<PureState> {
    config.spec().check_dim(state.amplitudes().len())?;
    for seg in config.segments()? {
        let ch = &seg.channels;
        let m0 = ch.no_jump_diagonal();
        let total = ch.decay_sum();
        let mut pending = 0usize;
        for _ in 0..seg.steps {
            let eps: f64 = rng.random();
            if eps < total {
                apply_no_jump_power(&mut state, &m0, pending)?;
                pending = 0;
                let cum = cumulative_jump_probabilities(&state, ch);
                let k = cum.partition_point(|&c| c <= eps).min(cum.len() - 1);
                let jump = ch.jumps[k];
                state = apply_jump(state, jump.kind, jump.qubit)?;
            } else {
                pending += 1;
            }
        }
        apply_no_jump_power(&mut state, &m0, pending)?;
    }
    Ok(state)
}

/// One trajectory seeded directly from `rng_seed`.
pub fn trajectory_squeeze(state: PureState, config: &EngineConfig, rng_seed: u64) -> Result<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    trajectory_squeeze_with(state, config, &mut rng)
}

/// `n_traj` independent trajectories from the same initial state, weights `1/n_traj`.
/// Output order and values do not depend on the thread pool.
pub fn run_trajectories(
    initial: &PureState,
    config: &EngineConfig,
    n_traj: usize,
    base_seed: u64,
) -> Result<Vec<PureState>> {
    let w = 1.0 / n_traj as f64;
    (0..n_traj as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(base_seed, i);
            let mut s = trajectory_squeeze_with(initial.clone(), config, &mut rng)?;
            s.weight = w;
            Ok(s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::config::EngineKind;
    use crate::spin::{apply_one_axis_twist, coherent_spin_state};
    use crate::system::SystemSpec;

    #[test]
    fn closed_system_is_deterministic_twist() {
        let spec = SystemSpec::new(4).unwrap();
        let cfg = EngineConfig::standard(&spec, 0.0, 0.15, EngineKind::Trajectory).unwrap();
        let cs = coherent_spin_state(&spec);
        let a = trajectory_squeeze(cs.clone(), &cfg, 1).unwrap();
        let b = trajectory_squeeze(cs.clone(), &cfg, 2).unwrap();
        assert_eq!(a, b);
        let exact = apply_one_axis_twist(cs, 0.15);
        assert!(exact.inner(&a).unwrap().norm_sqr() >= 1.0 - 1e-4);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let spec = SystemSpec::new(4).unwrap();
        let cfg = EngineConfig::standard(&spec, 5.0, 0.15, EngineKind::Trajectory).unwrap();
        let cs = coherent_spin_state(&spec);
        let a = run_trajectories(&cs, &cfg, 20, 99).unwrap();
        let b = run_trajectories(&cs, &cfg, 20, 99).unwrap();
        assert_eq!(a, b);
        let c = run_trajectories(&cs, &cfg, 20, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn outputs_are_normalized() {
        let spec = SystemSpec::new(3).unwrap();
        let cfg = EngineConfig::standard(&spec, 10.0, 0.3, EngineKind::Trajectory).unwrap();
        for s in run_trajectories(&coherent_spin_state(&spec), &cfg, 30, 5).unwrap() {
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            assert!((s.weight - 1.0 / 30.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cumulative_total_is_state_independent() {
        let spec = SystemSpec::new(4).unwrap();
        let cfg = EngineConfig::standard(&spec, 1.0, 0.15, EngineKind::Trajectory).unwrap();
        let s = apply_one_axis_twist(coherent_spin_state(&spec), 0.4);
        let cum = cumulative_jump_probabilities(&s, &cfg.channels);
        assert!((cum[cum.len() - 1] - cfg.channels.decay_sum()).abs() < 1e-18);
    }
}
