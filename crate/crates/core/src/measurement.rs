use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{apply_local, from_dicke_coefficients, single_qubit_rotation, CollectiveAxis};
use crate::state::{DensityOperator, PureState};
use crate::system::SystemSpec;

/// Largest completeness deviation tolerated before a quadrature grid is rejected.
pub const GRID_DEVIATION_LIMIT: f64 = 1e-3;
pub const DEFAULT_PDF_STEP: f64 = 0.05;
/// Half-width of the default grid beyond `±N/2`, in units of σ.
pub const GRID_SIGMAS: f64 = 8.0;

/// How a quoted width parameter maps onto the Gaussian variance.
///
/// `Reported` squares the quoted value, treating it as the standard
/// deviation; `Variance` uses the value as the variance directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WidthConvention {
    #[default]
    Reported,
    Variance,
}

impl WidthConvention {
    pub fn variance(self, value: f64) -> f64 {
        match self {
            WidthConvention::Reported => value * value,
            WidthConvention::Variance => value,
        }
    }
}

/// `ln Pr(x|c)` for a Gaussian of variance `sigma2`.
pub fn log_gaussian(x: f64, c: f64, sigma2: f64) -> f64 {
    -(x - c) * (x - c) / (2.0 * sigma2) - 0.5 * (2.0 * PI * sigma2).ln()
}

pub fn gaussian(x: f64, c: f64, sigma2: f64) -> f64 {
    log_gaussian(x, c, sigma2).exp()
}

/// Diagonal POVM element `Â_c` stored as one log-weight per excitation number.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmSpec {
    spec: SystemSpec,
    pub c: f64,
    pub sigma2: f64,
    log_weights: Vec<f64>,
}

impl PovmSpec {
    /// `sigma2` is the Gaussian variance.
    pub fn new(spec: &SystemSpec, c: f64, sigma2: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::invalid("c", "must be finite"));
        }
        if !sigma2.is_finite() || sigma2 <= 0.0 {
            return Err(Error::invalid("sigma2", format!("must be positive, got {sigma2}")));
        }
        let n = spec.n_qubits();
        let log_weights = (0..=n)
            .map(|m| 0.5 * log_gaussian(n as f64 / 2.0 - m as f64, c, sigma2))
            .collect();
        Ok(Self {
            spec: spec.clone(),
            c,
            sigma2,
            log_weights,
        })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    /// `w_m = √Pr(N/2 − m | c)`.
    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// `Pr(N/2 − m | c)`.
    pub fn outcome_probability(&self, m: usize) -> f64 {
        (2.0 * self.log_weights[m]).exp()
    }

    /// `⟨Â_c†Â_c⟩` from excitation populations.
    pub fn probability_from_populations(&self, pops: &[f64]) -> f64 {
        pops.iter()
            .enumerate()
            .map(|(m, p)| p * self.outcome_probability(m))
            .sum()
    }

    /// Weights rescaled by the largest one present, with the log of that scale.
    fn scaled_weights(&self, present: impl Fn(usize) -> bool) -> (Vec<f64>, f64) {
        let top = self
            .log_weights
            .iter()
            .enumerate()
            .filter(|(m, _)| present(*m))
            .map(|(_, l)| *l)
            .fold(f64::NEG_INFINITY, f64::max);
        let top = if top.is_finite() { top } else { 0.0 };
        (self.log_weights.iter().map(|l| (l - top).exp()).collect(), top)
    }
}

/// Applies `Â_c`, returning the renormalized state and `⟨ψ|Â_c†Â_c|ψ⟩`.
pub fn apply_measurement(state: PureState, povm: &PovmSpec) -> Result<(PureState, f64)> {
    let (out, log_p) = apply_measurement_log(state, povm)?;
    Ok((out, log_p.exp()))
}

/// As [`apply_measurement`] but returns `ln⟨ψ|Â_c†Â_c|ψ⟩`, which stays finite far in the tails.
pub fn apply_measurement_log(mut state: PureState, povm: &PovmSpec) -> Result<(PureState, f64)> {
    povm.spec.check_dim(state.amplitudes().len())?;
    let pops = state.excitation_populations();
    let (w, top) = povm.scaled_weights(|m| pops[m] > 0.0);
    let profile = povm.spec.profile();
    for (b, a) in state.amplitudes_mut().iter_mut().enumerate() {
        *a *= w[profile.excitation(b)];
    }
    let scaled_norm = state.normalize()?;
    Ok((state, scaled_norm.ln() + 2.0 * top))
}

/// `ρ ↦ Â_cρÂ_c†/Tr[Â_c†Â_cρ]`, returning the probability as well.
pub fn apply_measurement_density(
    mut rho: DensityOperator,
    povm: &PovmSpec,
) -> Result<(DensityOperator, f64)> {
    povm.spec.check_dim(rho.dim())?;
    let pops = rho.excitation_populations();
    let (w, top) = povm.scaled_weights(|m| pops[m] > 0.0);
    let profile = povm.spec.profile();
    let d = rho.dim();
    let wb: Vec<f64> = (0..d).map(|b| w[profile.excitation(b)]).collect();
    for (i, row) in rho.as_mut_slice().chunks_mut(d).enumerate() {
        for (x, wj) in row.iter_mut().zip(&wb) {
            *x *= wb[i] * wj;
        }
    }
    let scaled = rho.renormalize()?;
    Ok((rho, scaled * (2.0 * top).exp()))
}

/// Anything with a well-defined population per excitation subspace.
pub trait ExcitationPopulations {
    fn n_qubits(&self) -> usize;
    fn populations(&self) -> Vec<f64>;
}

impl ExcitationPopulations for PureState {
    fn n_qubits(&self) -> usize {
        PureState::n_qubits(self)
    }
    fn populations(&self) -> Vec<f64> {
        let norm = self.norm_sqr();
        self.excitation_populations().into_iter().map(|p| p / norm).collect()
    }
}

impl ExcitationPopulations for DensityOperator {
    fn n_qubits(&self) -> usize {
        self.spec().n_qubits()
    }
    fn populations(&self) -> Vec<f64> {
        let t = self.trace();
        self.excitation_populations().into_iter().map(|p| p / t).collect()
    }
}

/// A weighted ensemble: populations are the weight-averaged member populations.
impl ExcitationPopulations for [PureState] {
    fn n_qubits(&self) -> usize {
        self.first().map_or(0, |s| s.n_qubits())
    }
    fn populations(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_qubits() + 1];
        let total: f64 = self.iter().map(|s| s.weight).sum();
        for s in self {
            for (a, p) in acc.iter_mut().zip(ExcitationPopulations::populations(s)) {
                *a += s.weight * p / total;
            }
        }
        acc
    }
}

/// Outcome density `P(c)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostSelectionPdf {
    pub n_qubits: usize,
    pub sigma2: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

impl PostSelectionPdf {
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }

    /// `(c, P(c))` at the grid maximum.
    pub fn peak(&self) -> (f64, f64) {
        self.grid
            .iter()
            .zip(&self.density)
            .fold((f64::NAN, f64::NEG_INFINITY), |best, (&c, &p)| {
                if p > best.1 {
                    (c, p)
                } else {
                    best
                }
            })
    }

    /// Linear interpolation of the density at `c`.
    pub fn density_at(&self, c: f64) -> f64 {
        let g = &self.grid;
        if g.is_empty() || c < g[0] || c > g[g.len() - 1] {
            return 0.0;
        }
        let k = g.partition_point(|&v| v < c);
        if k == 0 {
            return self.density[0];
        }
        let (x0, x1) = (g[k - 1], g[k]);
        let t = if x1 > x0 { (c - x0) / (x1 - x0) } else { 0.0 };
        self.density[k - 1] * (1.0 - t) + self.density[k] * t
    }
}

pub fn pdf_from_populations(pops: &[f64], sigma2: f64, grid: &[f64]) -> PostSelectionPdf {
    let n = pops.len() - 1;
    let density = grid
        .iter()
        .map(|&c| {
            pops.iter()
                .enumerate()
                .map(|(m, p)| p * gaussian(n as f64 / 2.0 - m as f64, c, sigma2))
                .sum()
        })
        .collect();
    PostSelectionPdf {
        n_qubits: n,
        sigma2,
        grid: grid.to_vec(),
        density,
    }
}

pub fn post_selection_pdf<S: ExcitationPopulations + ?Sized>(
    input: &S,
    sigma2: f64,
    grid: &[f64],
) -> PostSelectionPdf {
    pdf_from_populations(&input.populations(), sigma2, grid)
}

/// Uniform grid covering `[lo, hi]` with the last point pinned to `hi`.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if hi <= lo || step <= 0.0 {
        return vec![lo];
    }
    let n = ((hi - lo) / step - 1e-9).ceil() as usize;
    let mut g: Vec<f64> = (0..n).map(|k| lo + k as f64 * step).collect();
    g.push(hi);
    g
}

/// Grid over `[−N/2 − 8σ, N/2 + 8σ]`.
pub fn default_pdf_grid(n: usize, sigma2: f64, step: f64) -> Vec<f64> {
    let half = n as f64 / 2.0 + GRID_SIGMAS * sigma2.sqrt();
    uniform_grid(-half, half, step)
}

pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// `max_m |∫Pr(N/2 − m | c) dc − 1|` by trapezoidal quadrature on `grid`.
pub fn completeness_check(spec: &SystemSpec, sigma2: f64, grid: &[f64]) -> Result<f64> {
    let n = spec.n_qubits();
    let deviation = (0..=n)
        .map(|m| {
            let x = n as f64 / 2.0 - m as f64;
            let ys: Vec<f64> = grid.iter().map(|&c| gaussian(x, c, sigma2)).collect();
            (trapezoid(grid, &ys) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    if deviation > GRID_DEVIATION_LIMIT {
        return Err(Error::GridTooNarrow { deviation });
    }
    Ok(deviation)
}

/// Symmetric-subspace residual accepted by [`dicke_subspace_equivalence`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Max amplitude gap between the full-space measurement and the Dicke-basis update.
pub fn dicke_subspace_equivalence(state: &PureState, povm: &PovmSpec) -> Result<f64> {
    let residual = state.symmetric_residual();
    if residual > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { residual });
    }
    let (full, _) = apply_measurement(state.clone(), povm)?;
    let w = povm.weights();
    let coeffs: Vec<Complex64> = state
        .dicke_coefficients()
        .iter()
        .zip(&w)
        .map(|(a, w)| a * w)
        .collect();
    let mut reduced = from_dicke_coefficients(povm.spec(), &coeffs)?;
    reduced.normalize()?;
    Ok(full
        .amplitudes()
        .iter()
        .zip(reduced.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// Max elementwise `|U†Â_cU − Â_c|` for `U = Π_j exp(−iθσ_z^j/2)`.
pub fn rotating_frame_invariance(povm: &PovmSpec, theta: f64) -> f64 {
    let spec = povm.spec();
    let n = spec.n_qubits();
    let d = spec.dim();
    let u = single_qubit_rotation(CollectiveAxis::Z, theta);
    let w = povm.weights();
    let profile = spec.profile();
    let wb: Vec<f64> = (0..d).map(|b| w[profile.excitation(b)]).collect();
    // Columns of U built by applying the local factors to basis vectors.
    let cols: Vec<Vec<Complex64>> = (0..d)
        .map(|j| {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[j] = Complex64::new(1.0, 0.0);
            for q in 0..n {
                apply_local(&mut v, n, q, &u);
            }
            v
        })
        .collect();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let val: Complex64 = (0..d)
                .map(|k| cols[i][k].conj() * wb[k] * cols[j][k])
                .sum();
            let expect = if i == j { wb[i] } else { 0.0 };
            worst = worst.max((val - Complex64::new(expect, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{
        apply_one_axis_twist, coherent_spin_state, collective_rotation, dicke_state, ghz_state,
    };
    use std::f64::consts::FRAC_PI_2;

    fn squeezed(n: usize) -> PureState {
        let spec = SystemSpec::new(n).unwrap();
        let s = apply_one_axis_twist(coherent_spin_state(&spec), 0.15);
        collective_rotation(s, CollectiveAxis::X, -FRAC_PI_2)
    }

    #[test]
    fn width_conventions() {
        assert!((WidthConvention::Reported.variance(1.1) - 1.21).abs() < 1e-15);
        assert_eq!(WidthConvention::Variance.variance(1.1), 1.1);
    }

    #[test]
    fn rejects_bad_width() {
        let spec = SystemSpec::new(4).unwrap();
        assert!(PovmSpec::new(&spec, 0.0, 0.0).is_err());
        assert!(PovmSpec::new(&spec, 0.0, -1.0).is_err());
        assert!(PovmSpec::new(&spec, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn weights_positive_even_far_out() {
        let spec = SystemSpec::new(12).unwrap();
        let povm = PovmSpec::new(&spec, -40.0, 0.5).unwrap();
        assert!(povm.log_weights().iter().all(|l| l.is_finite()));
        let (out, p) = apply_measurement(squeezed(12), &povm).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(p >= 0.0);
    }

    #[test]
    fn wide_measurement_is_nearly_identity() {
        let s = squeezed(4);
        let povm = PovmSpec::new(s.spec(), -2.5, 1e6).unwrap();
        let (out, _) = apply_measurement(s.clone(), &povm).unwrap();
        assert!(s.inner(&out).unwrap().norm_sqr() >= 1.0 - 1e-6);
    }

    #[test]
    fn dicke_state_is_unchanged() {
        let spec = SystemSpec::new(6).unwrap();
        let povm = PovmSpec::new(&spec, 0.7, 1.3).unwrap();
        for m in 0..=6 {
            let d = dicke_state(&spec, m).unwrap();
            let (out, p) = apply_measurement(d.clone(), &povm).unwrap();
            assert!((d.inner(&out).unwrap().re - 1.0).abs() < 1e-12);
            assert!((p - gaussian(3.0 - m as f64, 0.7, 1.3)).abs() < 1e-14);
        }
    }

    #[test]
    fn maximally_mixed_probability() {
        let spec = SystemSpec::new(5).unwrap();
        let povm = PovmSpec::new(&spec, -1.2, 1.5).unwrap();
        let (_, p) = apply_measurement_density(DensityOperator::maximally_mixed(&spec), &povm).unwrap();
        let expect: f64 = (0..32)
            .map(|b: usize| gaussian(2.5 - b.count_ones() as f64, -1.2, 1.5))
            .sum::<f64>()
            / 32.0;
        assert!((p - expect).abs() < 1e-14);
    }

    #[test]
    fn density_matches_pure() {
        let s = squeezed(4);
        let povm = PovmSpec::new(s.spec(), -2.5, 1.21).unwrap();
        let (ps, pp) = apply_measurement(s.clone(), &povm).unwrap();
        let (rho, pr) = apply_measurement_density(DensityOperator::from_pure(&s), &povm).unwrap();
        assert!((pp - pr).abs() < 1e-12);
        let expect = DensityOperator::from_pure(&ps);
        for (a, b) in rho.as_slice().iter().zip(expect.as_slice()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn ghz_unchanged_at_origin() {
        let spec = SystemSpec::new(6).unwrap();
        let g = ghz_state(&spec);
        let povm = PovmSpec::new(&spec, 0.0, 1.0).unwrap();
        let (out, _) = apply_measurement(g.clone(), &povm).unwrap();
        assert!((g.inner(&out).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn completeness_examples() {
        for (n, s2) in [(12usize, 1.8f64), (4, 1.1)] {
            let spec = SystemSpec::new(n).unwrap();
            let grid = default_pdf_grid(n, s2, 0.01);
            assert!(completeness_check(&spec, s2, &grid).unwrap() < 1e-6);
        }
        let spec = SystemSpec::new(4).unwrap();
        let narrow = uniform_grid(-1.0, 1.0, 0.01);
        assert!(matches!(
            completeness_check(&spec, 1.1, &narrow),
            Err(Error::GridTooNarrow { deviation }) if deviation > 1e-3
        ));
    }

    #[test]
    fn uniform_dicke_mixture_pdf() {
        let n = 6;
        let pops = vec![1.0 / 7.0; 7];
        let grid = uniform_grid(-5.0, 5.0, 0.5);
        let pdf = pdf_from_populations(&pops, 1.3, &grid);
        for (c, p) in grid.iter().zip(&pdf.density) {
            let expect: f64 = (0..=n).map(|m| gaussian(3.0 - m as f64, *c, 1.3)).sum::<f64>() / 7.0;
            assert!((p - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn pdf_matches_measurement_probability() {
        let s = squeezed(6);
        let grid = [-2.5, 0.0, 1.7];
        let pdf = post_selection_pdf(&s, 1.69, &grid);
        for (c, p) in grid.iter().zip(&pdf.density) {
            let povm = PovmSpec::new(s.spec(), *c, 1.69).unwrap();
            let (_, q) = apply_measurement(s.clone(), &povm).unwrap();
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn dicke_equivalence_and_symmetry_guard() {
        let s = squeezed(6);
        let povm = PovmSpec::new(s.spec(), -2.5, 1.69).unwrap();
        assert!(dicke_subspace_equivalence(&s, &povm).unwrap() < 1e-10);
        let spec = s.spec().clone();
        let asym = PureState::basis(&spec, 1).unwrap();
        assert!(matches!(
            dicke_subspace_equivalence(&asym, &povm),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn rotating_frame_examples() {
        let s4 = SystemSpec::new(4).unwrap();
        let s6 = SystemSpec::new(6).unwrap();
        let p4 = PovmSpec::new(&s4, -2.5, 1.21).unwrap();
        let p6 = PovmSpec::new(&s6, -2.5, 1.69).unwrap();
        assert_eq!(rotating_frame_invariance(&p4, 0.0), 0.0);
        assert!(rotating_frame_invariance(&p6, 1.3) < 1e-12);
        assert!(rotating_frame_invariance(&p4, PI) < 1e-12);
    }

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(-1.0, 1.0, 0.25);
        assert_eq!(g.len(), 9);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(uniform_grid(0.5, 0.5, 0.1), vec![0.5]);
    }
}
