//! First-order Kraus evolution of the density operator.
//!
//! One step maps `ρ ↦ M0ρM0† + Σ_j M_jρM_j†` over the `3N` single-qubit jumps.
//! Every term preserves the difference pattern `d = b ⊕ b'` of an entry
//! `ρ[b][b']`, so the operator splits into `2^N` independent blocks
//! `v_d[b] = ρ[b][b ⊕ d]`:
//!
//! `v_d'[b] = F_d[b]·v_d[b] + p2·Σ_{q ∉ d} v_d[b ⊕ e_q]`
//!
//! with `F_d[b] = m0(b)·conj(m0(b ⊕ d)) + p1·(N − 2|d|)`. For a
//! permutation-invariant input only one block per Hamming weight `|d|` is
//! evolved and the rest are recovered by relabelling qubits.

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{EngineConfig, StepSegment};
use crate::channels::ChannelSet;
use crate::error::{Error, Result};
use crate::state::DensityOperator;

/// Largest accepted pre-renormalization trace drift for one step.
///
/// The first-order no-jump factor drifts by `O((Σp)²)` from decay and by
/// `O((χ·dt·M²)²)` from the Hamiltonian part, so both enter the bound.
pub fn drift_bound(channels: &ChannelSet) -> f64 {
    let n = channels.spec().n_qubits() as f64;
    let sp = channels.total_jump_probability();
    let phase = channels.rates.chi * channels.dt * (n / 2.0) * (n / 2.0);
    100.0 * (sp * sp + phase * phase)
}

fn no_jump_per_index(channels: &ChannelSet) -> Vec<Complex64> {
    let m0 = channels.no_jump_diagonal();
    let profile = channels.spec().profile();
    (0..channels.spec().dim())
        .map(|b| m0[profile.excitation(b)])
        .collect()
}

/// One step with the given channels, on the full matrix. Returns the
/// renormalized operator and the pre-renormalization trace.
pub fn kraus_step(rho: &DensityOperator, channels: &ChannelSet) -> Result<(DensityOperator, f64)> {
    channels.spec().check_dim(rho.dim())?;
    let n = channels.spec().n_qubits();
    let d = rho.dim();
    let m0 = no_jump_per_index(channels);
    let src = rho.as_slice();
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            let overlap = n as f64 - 2.0 * (i ^ j).count_ones() as f64;
            let f = m0[i] * m0[j].conj() + channels.p1 * overlap;
            out[i * d + j] = f * src[i * d + j];
        }
    }
    if channels.p2 > 0.0 {
        for q in 0..n {
            let bit = channels.spec().qubit_mask(q);
            for i in 0..d {
                for j in 0..d {
                    if (i ^ j) & bit == 0 {
                        out[i * d + j] += channels.p2 * src[(i ^ bit) * d + (j ^ bit)];
                    }
                }
            }
        }
    }
    let mut next = DensityOperator::from_matrix(rho.spec(), out)?;
    let before = rho.trace();
    let after = next.renormalize()?;
    let drift = (after / before - 1.0).abs();
    let bound = drift_bound(channels);
    if drift > bound {
        return Err(Error::StepSizeViolation { drift, bound });
    }
    Ok((next, after / before))
}

/// One step of the configured engine.
pub fn kraus_squeeze_step(rho: &DensityOperator, config: &EngineConfig) -> Result<DensityOperator> {
    Ok(kraus_step(rho, &config.channels)?.0)
}

/// Packs the bits of `b` selected by `mask` into the low bits, preserving order.
#[inline]
fn pext(b: usize, mut mask: usize) -> usize {
    let mut out = 0;
    let mut k = 0;
    while mask != 0 {
        let low = mask & mask.wrapping_neg();
        if b & low != 0 {
            out |= 1 << k;
        }
        k += 1;
        mask &= mask - 1;
    }
    out
}

/// Bit relabelling sending the set bits of `d` to the low `|d|` positions.
#[inline]
fn relabel(b: usize, d: usize, full: usize) -> usize {
    pext(b, d) | (pext(b, !d & full) << d.count_ones())
}

fn permute_index(b: usize, n: usize, perm: &[usize]) -> usize {
    let mut out = 0;
    for (from, &to) in perm.iter().enumerate() {
        if b >> from & 1 == 1 {
            out |= 1 << to;
        }
    }
    debug_assert!(out < 1 << n);
    out
}

/// True when `ρ` is unchanged by every qubit permutation, checked on the
/// generating pair (adjacent swap, cyclic shift) of the symmetric group.
pub fn is_permutation_invariant(rho: &DensityOperator, tol: f64) -> bool {
    let n = rho.spec().n_qubits();
    let d = rho.dim();
    let mut swap: Vec<usize> = (0..n).collect();
    swap.swap(0, 1);
    let cycle: Vec<usize> = (0..n).map(|k| (k + 1) % n).collect();
    for perm in [swap, cycle] {
        let map: Vec<usize> = (0..d).map(|b| permute_index(b, n, &perm)).collect();
        for i in 0..d {
            for j in 0..d {
                if (rho.get(i, j) - rho.get(map[i], map[j])).norm() > tol {
                    return false;
                }
            }
        }
    }
    true
}

struct Evolved {
    block: Vec<Complex64>,
    traces: Vec<(f64, f64)>,
}

fn evolve_block(rho: &DensityOperator, diff: usize, segments: &[StepSegment], record: bool) -> Evolved {
    let spec = rho.spec();
    let n = spec.n_qubits();
    let dim = rho.dim();
    let mut v: Vec<Complex64> = (0..dim).map(|b| rho.get(b, b ^ diff)).collect();
    let mut next = vec![Complex64::new(0.0, 0.0); dim];
    let free: Vec<usize> = (0..n).map(|q| spec.qubit_mask(q)).filter(|bit| diff & bit == 0).collect();
    let overlap = n as f64 - 2.0 * diff.count_ones() as f64;
    let mut traces = Vec::new();
    for seg in segments {
        let ch = &seg.channels;
        let m0 = no_jump_per_index(ch);
        let fac: Vec<Complex64> = (0..dim)
            .map(|b| m0[b] * m0[b ^ diff].conj() + ch.p1 * overlap)
            .collect();
        let bound = drift_bound(ch);
        for _ in 0..seg.steps {
            let before = if record { v.iter().map(|x| x.re).sum() } else { 0.0 };
            for ((o, f), x) in next.iter_mut().zip(&fac).zip(&v) {
                *o = f * x;
            }
            if ch.p2 > 0.0 {
                for &bit in &free {
                    for b in 0..dim {
                        next[b] += ch.p2 * v[b ^ bit];
                    }
                }
            }
            std::mem::swap(&mut v, &mut next);
            if record {
                let after: f64 = v.iter().map(|x| x.re).sum();
                traces.push(((after / before - 1.0).abs(), bound));
            }
        }
    }
    Evolved { block: v, traces }
}

/// Evolves `ρ` through the configured squeezing stage.
///
/// Trace renormalization is linear, so blocks are evolved unnormalized and
/// divided by the final trace; the per-step drift is read off the `d = 0` block.
pub fn kraus_squeeze(rho: DensityOperator, config: &EngineConfig) -> Result<DensityOperator> {
    config.check_guard()?;
    config.spec().check_dim(rho.dim())?;
    let segments = config.segments()?;
    if segments.is_empty() {
        return Ok(rho);
    }
    let n = config.spec().n_qubits();
    let dim = rho.dim();
    let full = dim - 1;
    let symmetric = is_permutation_invariant(&rho, 1e-12);

    let diag = evolve_block(&rho, 0, &segments, true);
    for &(drift, bound) in &diag.traces {
        if drift > bound {
            return Err(Error::StepSizeViolation { drift, bound });
        }
    }
    let trace: f64 = diag.block.iter().map(|x| x.re).sum();
    if !trace.is_finite() || trace <= 0.0 {
        return Err(Error::Invariant(format!("trace {trace} after squeezing")));
    }

    let reps: Vec<usize> = if symmetric {
        (1..=n).map(|w| (1usize << w) - 1).collect()
    } else {
        (1..dim).collect()
    };
    let mut blocks: Vec<Vec<Complex64>> = Vec::with_capacity(reps.len() + 1);
    blocks.push(diag.block);
    blocks.extend(
        reps.par_iter()
            .map(|&d| evolve_block(&rho, d, &segments, false).block)
            .collect::<Vec<_>>(),
    );

    let scale = 1.0 / trace;
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let d = i ^ j;
            let v = if d == 0 {
                blocks[0][i]
            } else if symmetric {
                blocks[d.count_ones() as usize][relabel(i, d, full)]
            } else {
                blocks[d][i]
            };
            out[i * dim + j] = v * scale;
        }
    }
    DensityOperator::from_matrix(rho.spec(), out)
}
