use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{DensityOperator, PureState};
use crate::system::{binomial, SystemSpec};

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CollectiveAxis {
    X,
    Y,
    Z,
}

impl CollectiveAxis {
    pub const ALL: [CollectiveAxis; 3] = [CollectiveAxis::X, CollectiveAxis::Y, CollectiveAxis::Z];

    /// Pauli matrix for this axis.
    pub fn pauli(self) -> Mat2 {
        let i = Complex64::new(0.0, 1.0);
        match self {
            CollectiveAxis::X => [[ZERO, ONE], [ONE, ZERO]],
            CollectiveAxis::Y => [[ZERO, -i], [i, ZERO]],
            CollectiveAxis::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }
}

/// `exp(−i·angle·σ/2)` for a single qubit.
pub fn single_qubit_rotation(axis: CollectiveAxis, angle: f64) -> Mat2 {
    let (s, c) = (angle / 2.0).sin_cos();
    match axis {
        CollectiveAxis::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        CollectiveAxis::Y => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        CollectiveAxis::Z => [
            [Complex64::new(c, -s), ZERO],
            [ZERO, Complex64::new(c, s)],
        ],
    }
}

pub fn conj_mat(m: &Mat2) -> Mat2 {
    [
        [m[0][0].conj(), m[0][1].conj()],
        [m[1][0].conj(), m[1][1].conj()],
    ]
}

/// Applies a 2×2 matrix to qubit `qubit` of an `n`-qubit register held in `v`.
pub fn apply_local(v: &mut [Complex64], n: usize, qubit: usize, m: &Mat2) {
    let bit = 1usize << (n - 1 - qubit);
    let len = v.len();
    let mut start = 0;
    while start < len {
        for i in start..start + bit {
            let a = v[i];
            let b = v[i | bit];
            v[i] = m[0][0] * a + m[0][1] * b;
            v[i | bit] = m[1][0] * a + m[1][1] * b;
        }
        start += 2 * bit;
    }
}

fn reduce_angle(angle: f64) -> f64 {
    angle.rem_euclid(4.0 * PI)
}

/// In-place `exp(−i·angle·J_axis)` on raw amplitudes.
pub fn rotate_amplitudes(v: &mut [Complex64], n: usize, axis: CollectiveAxis, angle: f64) {
    let angle = reduce_angle(angle);
    if angle == 0.0 {
        return;
    }
    if axis == CollectiveAxis::Z {
        // Diagonal: phase exp(−iθM(b)) depends only on the excitation number.
        let phases: Vec<Complex64> = (0..=n)
            .map(|m| Complex64::from_polar(1.0, -angle * (n as f64 / 2.0 - m as f64)))
            .collect();
        for (b, a) in v.iter_mut().enumerate() {
            *a *= phases[b.count_ones() as usize];
        }
        return;
    }
    let u = single_qubit_rotation(axis, angle);
    for q in 0..n {
        apply_local(v, n, q, &u);
    }
}

pub fn make_all_up(spec: &SystemSpec) -> PureState {
    PureState::basis(spec, 0).expect("index 0 always valid")
}

/// `exp(−i·angle·J_axis)|ψ⟩`.
pub fn collective_rotation(mut state: PureState, axis: CollectiveAxis, angle: f64) -> PureState {
    let n = state.n_qubits();
    rotate_amplitudes(state.amplitudes_mut(), n, axis, angle);
    state
}

/// `U ρ U†` for `U = exp(−i·angle·J_axis)`.
pub fn rotate_density(mut rho: DensityOperator, axis: CollectiveAxis, angle: f64) -> DensityOperator {
    let n = rho.spec().n_qubits();
    let angle = reduce_angle(angle);
    if angle == 0.0 {
        return rho;
    }
    // Row-major ρ is a vector on 2N qubits: rows are qubits 0..N, columns N..2N.
    let u = single_qubit_rotation(axis, angle);
    let uc = conj_mat(&u);
    let data = rho.as_mut_slice();
    for q in 0..n {
        apply_local(data, 2 * n, q, &u);
        apply_local(data, 2 * n, n + q, &uc);
    }
    rho
}

/// Multiplies amplitude `b` by `exp(−i·chi_t·M(b)²)`.
pub fn apply_one_axis_twist(mut state: PureState, chi_t: f64) -> PureState {
    let n = state.n_qubits();
    let phases: Vec<Complex64> = (0..=n)
        .map(|m| {
            let mm = n as f64 / 2.0 - m as f64;
            Complex64::from_polar(1.0, -chi_t * mm * mm)
        })
        .collect();
    for (b, a) in state.amplitudes_mut().iter_mut().enumerate() {
        *a *= phases[b.count_ones() as usize];
    }
    state
}

/// Symmetric Dicke state with `m` down spins.
pub fn dicke_state(spec: &SystemSpec, m: usize) -> Result<PureState> {
    let n = spec.n_qubits();
    if m > n {
        return Err(Error::ExcitationOutOfRange { m, n });
    }
    let amp = Complex64::new(1.0 / binomial(n, m).sqrt(), 0.0);
    let profile = spec.profile();
    let amps = (0..spec.dim())
        .map(|b| if profile.excitation(b) == m { amp } else { ZERO })
        .collect();
    PureState::new(spec, amps)
}

/// `Σ_m a_m |D_m⟩`.
pub fn from_dicke_coefficients(spec: &SystemSpec, coeffs: &[Complex64]) -> Result<PureState> {
    let n = spec.n_qubits();
    if coeffs.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            actual: coeffs.len(),
        });
    }
    let scaled: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(m, a)| a / binomial(n, m).sqrt())
        .collect();
    let profile = spec.profile();
    let amps = (0..spec.dim()).map(|b| scaled[profile.excitation(b)]).collect();
    PureState::new(spec, amps)
}

pub fn ghz_state(spec: &SystemSpec) -> PureState {
    let mut amps = vec![ZERO; spec.dim()];
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[0] = h;
    amps[spec.dim() - 1] = h;
    PureState::new(spec, amps).expect("length matches spec")
}

/// All-up state rotated by π/2 about X.
pub fn coherent_spin_state(spec: &SystemSpec) -> PureState {
    collective_rotation(make_all_up(spec), CollectiveAxis::X, FRAC_PI_2)
}

/// `|⟨ψ| exp(−iφJ_z) exp(−iθJ_x) |CS⟩|²`.
pub fn husimi(state: &PureState, theta: f64, phi: f64) -> f64 {
    let probe = coherent_spin_state(state.spec());
    let probe = collective_rotation(probe, CollectiveAxis::X, theta);
    let probe = collective_rotation(probe, CollectiveAxis::Z, phi);
    state.inner(&probe).expect("same spec").norm_sqr()
}

/// `J_axis |ψ⟩` as raw amplitudes.
pub fn apply_collective_generator(state: &PureState, axis: CollectiveAxis) -> Vec<Complex64> {
    let n = state.n_qubits();
    let src = state.amplitudes();
    if axis == CollectiveAxis::Z {
        let p = state.spec().profile();
        return src
            .iter()
            .enumerate()
            .map(|(b, a)| a * p.spin_projection(b))
            .collect();
    }
    let mut out = vec![ZERO; src.len()];
    let half = Complex64::new(0.5, 0.0);
    let pauli = axis.pauli();
    let scaled = [
        [pauli[0][0] * half, pauli[0][1] * half],
        [pauli[1][0] * half, pauli[1][1] * half],
    ];
    for q in 0..n {
        let mut tmp = src.to_vec();
        apply_local(&mut tmp, n, q, &scaled);
        out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);
    }
    out
}

/// `(⟨J⟩, ⟨J²⟩)` for a collective spin component.
pub fn collective_moments(state: &PureState, axis: CollectiveAxis) -> (f64, f64) {
    let j = apply_collective_generator(state, axis);
    let first: Complex64 = state
        .amplitudes()
        .iter()
        .zip(&j)
        .map(|(a, b)| a.conj() * b)
        .sum();
    let second: f64 = j.iter().map(|a| a.norm_sqr()).sum();
    (first.re, second)
}
