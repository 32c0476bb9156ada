use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::system::{binomial, SystemSpec};

/// State vector over the `2^N` computational basis with a post-selection weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    spec: SystemSpec,
    amplitudes: Vec<Complex64>,
    /// Trajectory post-selection weight, `1` outside ensembles.
    pub weight: f64,
}

impl PureState {
    pub fn new(spec: &SystemSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        spec.check_dim(amplitudes.len())?;
        Ok(Self {
            spec: spec.clone(),
            amplitudes,
            weight: 1.0,
        })
    }

    pub fn basis(spec: &SystemSpec, index: usize) -> Result<Self> {
        if index >= spec.dim() {
            return Err(Error::invalid("index", format!("{index} >= {}", spec.dim())));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); spec.dim()];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(spec, amps)
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn n_qubits(&self) -> usize {
        self.spec.n_qubits()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm and returns the squared norm found beforehand.
    pub fn normalize(&mut self) -> Result<f64> {
        let n2 = self.norm_sqr();
        if !n2.is_finite() || n2 <= 0.0 {
            return Err(Error::Invariant(format!("cannot normalize state with norm² {n2}")));
        }
        let s = 1.0 / n2.sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a *= s);
        Ok(n2)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.spec.check_dim(other.amplitudes.len())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Population of each excitation subspace, indexed by `m`.
    pub fn excitation_populations(&self) -> Vec<f64> {
        let profile = self.spec.profile();
        let mut pops = vec![0.0; self.n_qubits() + 1];
        for (b, a) in self.amplitudes.iter().enumerate() {
            pops[profile.excitation(b)] += a.norm_sqr();
        }
        pops
    }

    /// Coefficients on the Dicke basis, `a_m = ⟨D_m|ψ⟩`.
    pub fn dicke_coefficients(&self) -> Vec<Complex64> {
        let n = self.n_qubits();
        let profile = self.spec.profile();
        let mut sums = vec![Complex64::new(0.0, 0.0); n + 1];
        for (b, a) in self.amplitudes.iter().enumerate() {
            sums[profile.excitation(b)] += a;
        }
        sums.iter()
            .enumerate()
            .map(|(m, s)| s / binomial(n, m).sqrt())
            .collect()
    }

    /// Norm of the component orthogonal to the symmetric subspace.
    pub fn symmetric_residual(&self) -> f64 {
        // Direct ‖ψ − Pψ‖; the norm difference cancels catastrophically.
        let profile = self.spec.profile();
        let n = self.spec.n_qubits();
        let mut mean = vec![Complex64::new(0.0, 0.0); n + 1];
        for (b, a) in self.amplitudes.iter().enumerate() {
            mean[profile.excitation(b)] += a;
        }
        for (m, x) in mean.iter_mut().enumerate() {
            *x /= profile.multiplicity(m) as f64;
        }
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| (a - mean[profile.excitation(b)]).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Expectation of a diagonal observable given as a function of the basis index.
    pub fn diagonal_expectation(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| a.norm_sqr() * f(b))
            .sum()
    }
}

/// Dense density operator, row-major `2^N × 2^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    spec: SystemSpec,
    data: Vec<Complex64>,
}

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

impl DensityOperator {
    pub fn from_matrix(spec: &SystemSpec, data: Vec<Complex64>) -> Result<Self> {
        let d = spec.dim();
        if data.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                actual: data.len(),
            });
        }
        Ok(Self {
            spec: spec.clone(),
            data,
        })
    }

    pub fn from_pure(state: &PureState) -> Self {
        let a = state.amplitudes();
        let d = a.len();
        let mut data = Vec::with_capacity(d * d);
        for ai in a {
            data.extend(a.iter().map(|aj| ai * aj.conj()));
        }
        Self {
            spec: state.spec().clone(),
            data,
        }
    }

    /// `Σ_i w_i |ψ_i⟩⟨ψ_i|` using each member's own weight.
    pub fn from_ensemble(members: &[PureState]) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::invalid("ensemble", "empty"))?;
        let spec = first.spec().clone();
        let d = spec.dim();
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for s in members {
            spec.check_dim(s.amplitudes().len())?;
            let a = s.amplitudes();
            for i in 0..d {
                let ai = a[i] * s.weight;
                if ai == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &mut data[i * d..(i + 1) * d];
                for (r, aj) in row.iter_mut().zip(a) {
                    *r += ai * aj.conj();
                }
            }
        }
        Ok(Self { spec, data })
    }

    pub fn maximally_mixed(spec: &SystemSpec) -> Self {
        let d = spec.dim();
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            data[i * d + i] = Complex64::new(1.0 / d as f64, 0.0);
        }
        Self {
            spec: spec.clone(),
            data,
        }
    }

    /// `p·a + (1−p)·b`.
    pub fn mix(p: f64, a: &DensityOperator, b: &DensityOperator) -> Result<Self> {
        a.spec.check_dim(b.spec.dim())?;
        let data = a
            .data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| x * p + y * (1.0 - p))
            .collect();
        Ok(Self {
            spec: a.spec.clone(),
            data,
        })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim() + j]
    }

    pub fn trace(&self) -> f64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i].re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i].re).collect()
    }

    /// Divides by the trace and returns the trace found beforehand.
    pub fn renormalize(&mut self) -> Result<f64> {
        let t = self.trace();
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::Invariant(format!("density operator trace {t}")));
        }
        let s = 1.0 / t;
        self.data.iter_mut().for_each(|x| *x *= s);
        Ok(t)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        worst
    }

    pub fn excitation_populations(&self) -> Vec<f64> {
        let profile = self.spec.profile();
        let mut pops = vec![0.0; self.spec.n_qubits() + 1];
        for (b, p) in self.diagonal().into_iter().enumerate() {
            pops[profile.excitation(b)] += p;
        }
        pops
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation_pure(&self, psi: &PureState) -> Result<f64> {
        self.spec.check_dim(psi.amplitudes().len())?;
        let d = self.dim();
        let a = psi.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            if a[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = &self.data[i * d..(i + 1) * d];
            let r: Complex64 = row.iter().zip(a).map(|(x, aj)| x * aj).sum();
            acc += a[i].conj() * r;
        }
        Ok(acc.re)
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.data)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.to_dmatrix();
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Checks Hermiticity, unit trace and positivity at the documented tolerances.
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_error();
        if h > HERMITICITY_TOL {
            return Err(Error::Invariant(format!("hermiticity error {h:.3e}")));
        }
        let t = self.trace();
        if (t - 1.0).abs() > TRACE_TOL {
            return Err(Error::Invariant(format!("trace {t}")));
        }
        let min = self.eigenvalues()[0];
        if min < EIGENVALUE_FLOOR {
            return Err(Error::NegativeEigenvalue(min));
        }
        Ok(())
    }
}
