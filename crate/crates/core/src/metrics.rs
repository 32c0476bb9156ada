use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engines::TrajectoryEnsemble;
use crate::error::{Error, Result};
use crate::spin::{apply_collective_generator, collective_moments, CollectiveAxis};
use crate::state::{DensityOperator, PureState, EIGENVALUE_FLOOR};

pub const DEFAULT_EIGEN_THRESHOLD: f64 = 1e-12;
/// Largest system accepted by [`fidelity_mixed`].
pub const MIXED_FIDELITY_MAX_QUBITS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QfiMethod {
    PureVariance,
    MixedSpectral,
    EnsembleAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiResult {
    pub value: f64,
    pub method: QfiMethod,
    pub eigen_threshold: Option<f64>,
}

/// `|⟨a|b⟩|²`.
pub fn fidelity_pure(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// `⟨ψ|ρ|ψ⟩` for a pure target.
pub fn fidelity_with_pure_target(rho: &DensityOperator, target: &PureState) -> Result<f64> {
    rho.expectation_pure(target)
}

fn hermitian_eigen(rho: &DensityOperator) -> (Vec<f64>, DMatrix<Complex64>) {
    let m = rho.to_dmatrix();
    let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn clamp_spectrum(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&l| {
            if l < EIGENVALUE_FLOOR {
                Err(Error::NegativeEigenvalue(l))
            } else {
                Ok(l.max(0.0))
            }
        })
        .collect()
}

fn sqrt_psd(rho: &DensityOperator) -> Result<DMatrix<Complex64>> {
    let (vals, vecs) = hermitian_eigen(rho);
    let vals = clamp_spectrum(&vals)?;
    let d = vals.len();
    let diag = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(vals[i].sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(&vecs * diag * vecs.adjoint())
}

/// `(tr √(√ρ σ √ρ))²`. Validation only; restricted to small systems.
pub fn fidelity_mixed(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let n = rho.spec().n_qubits();
    if n > MIXED_FIDELITY_MAX_QUBITS {
        return Err(Error::EngineGuard {
            engine: "mixed-fidelity",
            n,
            max: MIXED_FIDELITY_MAX_QUBITS,
        });
    }
    rho.spec().check_dim(sigma.dim())?;
    let s = sqrt_psd(rho)?;
    let inner = &s * sigma.to_dmatrix() * &s;
    let herm = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let root: f64 = herm
        .symmetric_eigenvalues()
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    Ok(root * root)
}

/// `4(⟨J²⟩ − ⟨J⟩²)`.
pub fn qfi_pure(state: &PureState, generator: CollectiveAxis) -> QfiResult {
    let norm = state.norm_sqr();
    let (first, second) = if generator == CollectiveAxis::Z {
        let p = state.spec().profile();
        let first = state.diagonal_expectation(|b| p.spin_projection(b));
        let second = state.diagonal_expectation(|b| p.spin_projection(b).powi(2));
        (first, second)
    } else {
        collective_moments(state, generator)
    };
    let (first, second) = (first / norm, second / norm);
    QfiResult {
        value: (4.0 * (second - first * first)).max(0.0),
        method: QfiMethod::PureVariance,
        eigen_threshold: None,
    }
}

/// `2 Σ_{j,k} (λ_j − λ_k)²/(λ_j + λ_k) |⟨j|J|k⟩|²`, skipping pairs with
/// `λ_j + λ_k ≤ eigen_threshold`.
pub fn qfi_mixed(rho: &DensityOperator, generator: CollectiveAxis, eigen_threshold: f64) -> Result<QfiResult> {
    let (vals, vecs) = hermitian_eigen(rho);
    let vals = clamp_spectrum(&vals)?;
    let d = vals.len();
    let spec = rho.spec();
    // Columns J|k⟩.
    let jv: Vec<Vec<Complex64>> = (0..d)
        .map(|k| {
            let col = PureState::new(spec, vecs.column(k).iter().copied().collect())
                .expect("eigenvector length matches");
            apply_collective_generator(&col, generator)
        })
        .collect();
    let mut total = 0.0;
    for j in 0..d {
        for k in 0..d {
            let s = vals[j] + vals[k];
            if s <= eigen_threshold || j == k {
                continue;
            }
            let diff = vals[j] - vals[k];
            let elem: Complex64 = vecs
                .column(j)
                .iter()
                .zip(&jv[k])
                .map(|(a, b)| a.conj() * b)
                .sum();
            total += diff * diff / s * elem.norm_sqr();
        }
    }
    Ok(QfiResult {
        value: 2.0 * total,
        method: QfiMethod::MixedSpectral,
        eigen_threshold: Some(eigen_threshold),
    })
}

/// Weighted average of member QFIs; an upper bound on the QFI of the ensemble state.
pub fn ensemble_qfi(ensemble: &TrajectoryEnsemble, generator: CollectiveAxis) -> QfiResult {
    let total = ensemble.weight_sum();
    let value = ensemble
        .members
        .iter()
        .map(|m| m.weight * qfi_pure(m, generator).value)
        .sum::<f64>()
        / total;
    QfiResult {
        value,
        method: QfiMethod::EnsembleAverage,
        eigen_threshold: None,
    }
}

/// `Tr[Ŵρ] = 1/2 − F`; negative values certify genuine multipartite entanglement.
pub fn witness_expectation(fidelity: f64) -> f64 {
    0.5 - fidelity
}

/// `1/Q`, the lower bound on the phase-estimate variance.
pub fn cramer_rao_bound(qfi: &QfiResult) -> Result<f64> {
    if qfi.value.is_nan() || qfi.value <= 0.0 {
        return Err(Error::ZeroQfi);
    }
    Ok(1.0 / qfi.value)
}

/// `½ Σ|eig(a − b)|`.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    a.spec().check_dim(b.dim())?;
    let diff = a.to_dmatrix() - b.to_dmatrix();
    let herm = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(0.5 * herm.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>())
}
