//! End-to-end PS and MSS protocols over any engine.
//!
//! PS: all-up, `X(π/2)`, squeeze with decoherence, `X(−π/2)`, POVM at `c`,
//! then `Y(π/2)` and `X(5.6)`. MSS: all-up, `X(π/2)`, squeeze to `χt = π/2`,
//! `X(π/2)`, then `S = diag(1, i)` on the last qubit.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{build_rate_model, DEFAULT_DT, DEFAULT_J};
use crate::engines::{
    ensemble_post_select, ensemble_summary, kraus_squeeze, run_trajectories, EngineConfig,
    EngineKind, MetricSummary, TrajectoryEnsemble, DEFAULT_KRAUS_MAX_QUBITS,
};
use crate::error::{Error, Result};
use crate::measurement::{
    apply_measurement, apply_measurement_density, log_gaussian, pdf_from_populations,
    trapezoid, uniform_grid, ExcitationPopulations, PostSelectionPdf, PovmSpec, WidthConvention,
};
use crate::metrics::{
    cramer_rao_bound, ensemble_qfi, fidelity_with_pure_target, qfi_mixed, qfi_pure,
    witness_expectation, QfiResult, DEFAULT_EIGEN_THRESHOLD,
};
use crate::spin::{
    apply_one_axis_twist, collective_rotation, ghz_state, make_all_up, rotate_density,
    CollectiveAxis,
};
use crate::state::{DensityOperator, PureState};
use crate::system::SystemSpec;

pub const DEFAULT_CHI_T: f64 = 0.15;
pub const DEFAULT_C: f64 = -2.5;
pub const FINAL_JY_ANGLE: f64 = FRAC_PI_2;
pub const FINAL_JX_ANGLE: f64 = 5.6;
pub const MSS_CHI_T: f64 = FRAC_PI_2;
pub const DEFAULT_N_TRAJ: usize = 200;

const SIGMA2_TABLE: [(usize, f64); 5] = [(4, 1.1), (6, 1.3), (8, 1.5), (10, 1.6), (12, 1.8)];

/// Optimal measurement width for `n` qubits; interpolated between listed
/// sizes and clamped outside them.
pub fn default_sigma2(n: usize) -> f64 {
    let (first, last) = (SIGMA2_TABLE[0], SIGMA2_TABLE[SIGMA2_TABLE.len() - 1]);
    if n <= first.0 {
        return first.1;
    }
    if n >= last.0 {
        return last.1;
    }
    for w in SIGMA2_TABLE.windows(2) {
        let ((n0, s0), (n1, s1)) = (w[0], w[1]);
        if n <= n1 {
            let t = (n - n0) as f64 / (n1 - n0) as f64;
            return s0 + t * (s1 - s0);
        }
    }
    last.1
}

/// Engine choice and decoherence model shared by both protocols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineSettings {
    pub engine: EngineKind,
    pub x: f64,
    pub j: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub kraus_max_qubits: usize,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            engine: EngineKind::PureUnitary,
            x: 0.0,
            j: DEFAULT_J,
            dt: DEFAULT_DT,
            n_traj: DEFAULT_N_TRAJ,
            seed: 0,
            kraus_max_qubits: DEFAULT_KRAUS_MAX_QUBITS,
        }
    }
}

impl EngineSettings {
    pub fn kraus(x: f64) -> Self {
        Self {
            engine: EngineKind::Kraus,
            x,
            ..Self::default()
        }
    }

    pub fn trajectory(x: f64, n_traj: usize, seed: u64) -> Self {
        Self {
            engine: EngineKind::Trajectory,
            x,
            n_traj,
            seed,
            ..Self::default()
        }
    }

    pub fn config(&self, spec: &SystemSpec, chi_t: f64) -> Result<EngineConfig> {
        let rates = build_rate_model(self.j, spec.n_qubits(), self.x)?;
        EngineConfig::new(spec, rates, self.dt, chi_t, self.engine)?.with_kraus_limit(self.kraus_max_qubits)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsProtocolParams {
    pub n: usize,
    pub chi_t: f64,
    pub c: f64,
    pub sigma2: f64,
    pub width: WidthConvention,
    pub final_jy_angle: f64,
    pub final_jx_angle: f64,
    pub engine: EngineSettings,
    pub compute_qfi: bool,
    /// Refine the final rotation angles by golden-section search before evaluating.
    pub optimize_angles: bool,
}

impl PsProtocolParams {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            chi_t: DEFAULT_CHI_T,
            c: DEFAULT_C,
            sigma2: default_sigma2(n),
            width: WidthConvention::default(),
            final_jy_angle: FINAL_JY_ANGLE,
            final_jx_angle: FINAL_JX_ANGLE,
            engine: EngineSettings::default(),
            compute_qfi: true,
            optimize_angles: false,
        }
    }

    pub fn with_engine(mut self, engine: EngineSettings) -> Self {
        self.engine = engine;
        self
    }

    /// Variance of the measurement Gaussian.
    pub fn measurement_variance(&self) -> f64 {
        self.width.variance(self.sigma2)
    }

    pub fn validate(&self) -> Result<SystemSpec> {
        let spec = SystemSpec::new(self.n)?;
        if !self.chi_t.is_finite() || self.chi_t < 0.0 {
            return Err(Error::invalid("chi_t", format!("must be nonnegative, got {}", self.chi_t)));
        }
        if !self.sigma2.is_finite() || self.sigma2 <= 0.0 {
            return Err(Error::invalid("sigma2", format!("must be positive, got {}", self.sigma2)));
        }
        if !self.c.is_finite() {
            return Err(Error::invalid("c", "must be finite"));
        }
        if self.engine.engine == EngineKind::Trajectory && self.engine.n_traj == 0 {
            return Err(Error::invalid("n_traj", "must be at least 1"));
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MssProtocolParams {
    pub n: usize,
    pub chi_t: f64,
    pub engine: EngineSettings,
    pub compute_qfi: bool,
}

impl MssProtocolParams {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            chi_t: MSS_CHI_T,
            engine: EngineSettings::default(),
            compute_qfi: true,
        }
    }

    pub fn with_engine(mut self, engine: EngineSettings) -> Self {
        self.engine = engine;
        self
    }

    pub fn validate(&self) -> Result<SystemSpec> {
        let spec = SystemSpec::new(self.n)?;
        if self.n % 2 == 1 {
            return Err(Error::OddQubitCount(self.n));
        }
        if self.engine.engine == EngineKind::Trajectory && self.engine.n_traj == 0 {
            return Err(Error::invalid("n_traj", "must be at least 1"));
        }
        Ok(spec)
    }
}

/// State representation produced by an engine.
#[derive(Debug, Clone, PartialEq)]
pub enum PreparedState {
    Pure(PureState),
    Density(DensityOperator),
    Ensemble(TrajectoryEnsemble),
}

impl PreparedState {
    pub fn spec(&self) -> &SystemSpec {
        match self {
            PreparedState::Pure(s) => s.spec(),
            PreparedState::Density(r) => r.spec(),
            PreparedState::Ensemble(e) => e.members[0].spec(),
        }
    }

    pub fn rotate(self, axis: CollectiveAxis, angle: f64) -> Self {
        match self {
            PreparedState::Pure(s) => PreparedState::Pure(collective_rotation(s, axis, angle)),
            PreparedState::Density(r) => PreparedState::Density(rotate_density(r, axis, angle)),
            PreparedState::Ensemble(e) => PreparedState::Ensemble(e.rotate(axis, angle)),
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        match self {
            PreparedState::Pure(s) => s.populations(),
            PreparedState::Density(r) => r.populations(),
            PreparedState::Ensemble(e) => e.members.as_slice().populations(),
        }
    }

    /// Fidelity with a pure target; ensemble members are weight-averaged.
    pub fn fidelity(&self, target: &PureState) -> Result<f64> {
        match self {
            PreparedState::Pure(s) => Ok(s.inner(target)?.norm_sqr() / s.norm_sqr()),
            PreparedState::Density(r) => fidelity_with_pure_target(r, target),
            PreparedState::Ensemble(e) => {
                let mut acc = 0.0;
                for m in &e.members {
                    acc += m.weight * m.inner(target)?.norm_sqr();
                }
                Ok(acc / e.weight_sum())
            }
        }
    }

    pub fn qfi(&self, generator: CollectiveAxis) -> Result<QfiResult> {
        match self {
            PreparedState::Pure(s) => Ok(qfi_pure(s, generator)),
            PreparedState::Density(r) => qfi_mixed(r, generator, DEFAULT_EIGEN_THRESHOLD),
            PreparedState::Ensemble(e) => Ok(ensemble_qfi(e, generator)),
        }
    }

    pub fn n_traj(&self) -> Option<usize> {
        match self {
            PreparedState::Ensemble(e) => Some(e.n_traj()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub n: usize,
    pub fidelity: f64,
    /// Outcome density `P(c)` at the post-selected outcome (PS only).
    pub post_selection_probability: Option<f64>,
    pub qfi: Option<QfiResult>,
    pub witness: f64,
    pub cramer_rao: Option<f64>,
    /// Weighted fidelity statistics for trajectory runs.
    pub stats: Option<MetricSummary>,
    pub final_jy_angle: f64,
    pub final_jx_angle: f64,
    pub state: PreparedState,
}

/// Runs the squeezing stage on `state` with the configured engine.
pub fn squeeze(state: PureState, settings: &EngineSettings, chi_t: f64) -> Result<PreparedState> {
    let config = settings.config(state.spec(), chi_t)?;
    Ok(match settings.engine {
        EngineKind::PureUnitary => PreparedState::Pure(apply_one_axis_twist(state, chi_t)),
        EngineKind::Kraus => PreparedState::Density(kraus_squeeze(DensityOperator::from_pure(&state), &config)?),
        EngineKind::Trajectory => {
            let members = run_trajectories(&state, &config, settings.n_traj, settings.seed)?;
            PreparedState::Ensemble(TrajectoryEnsemble::uniform(members, settings.seed)?)
        }
    })
}

/// Steps 1–4: the pre-measurement state.
pub fn prepare_ps_state(params: &PsProtocolParams) -> Result<PreparedState> {
    let spec = params.validate()?;
    let cs = collective_rotation(make_all_up(&spec), CollectiveAxis::X, FRAC_PI_2);
    let squeezed = squeeze(cs, &params.engine, params.chi_t)?;
    Ok(squeezed.rotate(CollectiveAxis::X, -FRAC_PI_2))
}

fn finish_metrics(
    state: PreparedState,
    n: usize,
    probability: Option<f64>,
    compute_qfi: bool,
    angles: (f64, f64),
) -> Result<ProtocolResult> {
    let ghz = ghz_state(state.spec());
    let fidelity = state.fidelity(&ghz)?;
    check_unit_interval("fidelity", fidelity)?;
    let stats = match &state {
        PreparedState::Ensemble(e) => Some(ensemble_summary(e, |m| {
            m.inner(&ghz).map(|z| z.norm_sqr()).unwrap_or(f64::NAN)
        })),
        _ => None,
    };
    let qfi = if compute_qfi {
        Some(state.qfi(CollectiveAxis::Z)?)
    } else {
        None
    };
    let cramer_rao = qfi.as_ref().and_then(|q| cramer_rao_bound(q).ok());
    Ok(ProtocolResult {
        n,
        fidelity,
        post_selection_probability: probability,
        qfi,
        witness: witness_expectation(fidelity),
        cramer_rao,
        stats,
        final_jy_angle: angles.0,
        final_jx_angle: angles.1,
        state,
    })
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(-1e-9..=1.0 + 1e-9).contains(&v) {
        return Err(Error::Invariant(format!("{name} {v} outside [0, 1]")));
    }
    Ok(())
}

/// Steps 5–6 applied to a prepared state.
pub fn finish_ps(prepared: &PreparedState, params: &PsProtocolParams) -> Result<ProtocolResult> {
    let spec = prepared.spec().clone();
    let variance = params.measurement_variance();
    let povm = PovmSpec::new(&spec, params.c, variance)?;
    let (angles, _) = if params.optimize_angles {
        optimize_final_angles(prepared, params)?
    } else {
        ((params.final_jy_angle, params.final_jx_angle), 0.0)
    };
    let (measured, probability) = match prepared.clone() {
        PreparedState::Pure(s) => {
            let (s, p) = apply_measurement(s, &povm)?;
            (PreparedState::Pure(s), p)
        }
        PreparedState::Density(r) => {
            let (r, p) = apply_measurement_density(r, &povm)?;
            (PreparedState::Density(r), p)
        }
        PreparedState::Ensemble(e) => {
            let post = ensemble_post_select(e, &povm)?;
            let p = post.post_selection_probability.unwrap_or(0.0);
            (PreparedState::Ensemble(post), p)
        }
    };
    let out = measured
        .rotate(CollectiveAxis::Y, angles.0)
        .rotate(CollectiveAxis::X, angles.1);
    finish_metrics(out, spec.n_qubits(), Some(probability), params.compute_qfi, angles)
}

pub fn run_ps_protocol(params: &PsProtocolParams) -> Result<ProtocolResult> {
    let prepared = prepare_ps_state(params)?;
    finish_ps(&prepared, params)
}

/// `S = diag(1, i)` on the last qubit.
fn phase_gate_last(state: PreparedState) -> PreparedState {
    let i = Complex64::new(0.0, 1.0);
    let phase = |b: usize| if b & 1 == 1 { i } else { Complex64::new(1.0, 0.0) };
    match state {
        PreparedState::Pure(mut s) => {
            for (b, a) in s.amplitudes_mut().iter_mut().enumerate() {
                *a *= phase(b);
            }
            PreparedState::Pure(s)
        }
        PreparedState::Density(mut r) => {
            let d = r.dim();
            for (k, x) in r.as_mut_slice().iter_mut().enumerate() {
                *x *= phase(k / d) * phase(k % d).conj();
            }
            PreparedState::Density(r)
        }
        PreparedState::Ensemble(mut e) => {
            for m in &mut e.members {
                for (b, a) in m.amplitudes_mut().iter_mut().enumerate() {
                    *a *= phase(b);
                }
            }
            PreparedState::Ensemble(e)
        }
    }
}

pub fn run_mss_protocol(params: &MssProtocolParams) -> Result<ProtocolResult> {
    let spec = params.validate()?;
    let cs = collective_rotation(make_all_up(&spec), CollectiveAxis::X, FRAC_PI_2);
    let squeezed = squeeze(cs, &params.engine, params.chi_t)?;
    let out = phase_gate_last(squeezed.rotate(CollectiveAxis::X, FRAC_PI_2));
    finish_metrics(out, spec.n_qubits(), None, params.compute_qfi, (0.0, 0.0))
}

/// Fidelity and outcome density of the post-selected state as functions of `c`.
///
/// Both reduce to sums over excitation numbers once the GHZ target is rotated
/// back through the final rotations, so each `c` costs `O(N²)`.
#[derive(Debug, Clone)]
pub struct FidelityCurve {
    n: usize,
    // Σ_{b∈m, b'∈m'} conj(g_b) ρ_{bb'} g_{b'}, summed over ensemble members.
    kernel: Vec<Vec<Complex64>>,
    pops: Vec<f64>,
}

impl FidelityCurve {
    pub fn new(prepared: &PreparedState, jy_angle: f64, jx_angle: f64) -> Result<Self> {
        let spec = prepared.spec().clone();
        let n = spec.n_qubits();
        let target = collective_rotation(
            collective_rotation(ghz_state(&spec), CollectiveAxis::X, -jx_angle),
            CollectiveAxis::Y,
            -jy_angle,
        );
        let g = target.amplitudes();
        let profile = spec.profile();
        let zero = Complex64::new(0.0, 0.0);
        let mut kernel = vec![vec![zero; n + 1]; n + 1];
        let add_pure = |kernel: &mut Vec<Vec<Complex64>>, s: &PureState, w: f64| {
            let mut a = vec![zero; n + 1];
            for (b, amp) in s.amplitudes().iter().enumerate() {
                a[profile.excitation(b)] += g[b].conj() * amp;
            }
            let norm = s.norm_sqr();
            for m in 0..=n {
                for k in 0..=n {
                    kernel[m][k] += a[m] * a[k].conj() * (w / norm);
                }
            }
        };
        match prepared {
            PreparedState::Pure(s) => add_pure(&mut kernel, s, 1.0),
            PreparedState::Ensemble(e) => {
                let total = e.weight_sum();
                for m in &e.members {
                    add_pure(&mut kernel, m, m.weight / total);
                }
            }
            PreparedState::Density(r) => {
                let d = r.dim();
                let trace = r.trace();
                let data = r.as_slice();
                for i in 0..d {
                    let mi = profile.excitation(i);
                    let gi = g[i].conj();
                    let row = &data[i * d..(i + 1) * d];
                    for (j, x) in row.iter().enumerate() {
                        kernel[mi][profile.excitation(j)] += gi * x * g[j] / trace;
                    }
                }
            }
        }
        Ok(Self {
            n,
            kernel,
            pops: prepared.populations(),
        })
    }

    /// `(F(c), P(c))` for measurement variance `variance`.
    pub fn evaluate(&self, c: f64, variance: f64) -> (f64, f64) {
        let n = self.n;
        let logs: Vec<f64> = (0..=n)
            .map(|m| 0.5 * log_gaussian(n as f64 / 2.0 - m as f64, c, variance))
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let mut num = 0.0;
        for m in 0..=n {
            for k in 0..=n {
                num += (self.kernel[m][k] * (w[m] * w[k])).re;
            }
        }
        let den: f64 = (0..=n).map(|m| self.pops[m] * w[m] * w[m]).sum();
        let fidelity = if den > 0.0 { num / den } else { 0.0 };
        (fidelity, den * (2.0 * top).exp())
    }
}

/// Golden-section maximization of `f` on `[lo, hi]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Coordinate-wise golden-section refinement of the final rotation angles
/// within ±0.5 rad of the configured values.
pub fn optimize_final_angles(prepared: &PreparedState, params: &PsProtocolParams) -> Result<((f64, f64), f64)> {
    let variance = params.measurement_variance();
    let eval = |ay: f64, ax: f64| -> f64 {
        FidelityCurve::new(prepared, ay, ax)
            .map(|fc| fc.evaluate(params.c, variance).0)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (mut ay, mut ax) = (params.final_jy_angle, params.final_jx_angle);
    let mut best = eval(ay, ax);
    for _ in 0..4 {
        let (ny, _) = golden_section_max(|v| eval(v, ax), ay - 0.5, ay + 0.5, 1e-6);
        let (nx, f) = golden_section_max(|v| eval(ny, v), ax - 0.5, ax + 0.5, 1e-6);
        if f <= best + 1e-12 {
            break;
        }
        ay = ny;
        ax = nx;
        best = f;
    }
    Ok(((ay, ax), best))
}

/// Post-selection over an outcome interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub c_lo: f64,
    pub c_hi: f64,
    pub f_min: f64,
    pub f_max: f64,
    /// `∫_{c_lo}^{c_hi} P(c) dc`.
    pub probability: f64,
    pub grid: Vec<f64>,
    pub fidelities: Vec<f64>,
}

/// Fine spacing used when integrating the outcome density over an interval.
pub const PROBABILITY_STEP: f64 = 0.01;

/// Min/max fidelity over the grid points in `[c_lo, c_hi]` and the outcome
/// probability of the interval, using an already prepared state.
pub fn interval_report_from(
    prepared: &PreparedState,
    params: &PsProtocolParams,
    c_lo: f64,
    c_hi: f64,
    grid_step: f64,
) -> Result<IntervalReport> {
    if !c_lo.is_finite() || !c_hi.is_finite() || c_lo > c_hi {
        return Err(Error::invalid("interval", format!("need c_lo <= c_hi, got [{c_lo}, {c_hi}]")));
    }
    if grid_step.is_nan() || grid_step <= 0.0 {
        return Err(Error::invalid("grid_step", "must be positive"));
    }
    let variance = params.measurement_variance();
    let curve = FidelityCurve::new(prepared, params.final_jy_angle, params.final_jx_angle)?;
    let grid = uniform_grid(c_lo, c_hi, grid_step);
    let fidelities: Vec<f64> = grid.iter().map(|&c| curve.evaluate(c, variance).0).collect();
    let fine = uniform_grid(c_lo, c_hi, grid_step.min(PROBABILITY_STEP));
    let density: Vec<f64> = fine.iter().map(|&c| curve.evaluate(c, variance).1).collect();
    let probability = trapezoid(&fine, &density);
    check_unit_interval("interval probability", probability)?;
    Ok(IntervalReport {
        c_lo,
        c_hi,
        f_min: fidelities.iter().copied().fold(f64::INFINITY, f64::min),
        f_max: fidelities.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        probability,
        grid,
        fidelities,
    })
}

pub fn interval_post_selection_report(
    params: &PsProtocolParams,
    c_lo: f64,
    c_hi: f64,
    grid_step: f64,
) -> Result<IntervalReport> {
    let prepared = prepare_ps_state(params)?;
    interval_report_from(&prepared, params, c_lo, c_hi, grid_step)
}

/// Outcome density of the pre-measurement PS state on `grid`.
pub fn ps_outcome_pdf(params: &PsProtocolParams, grid: &[f64]) -> Result<PostSelectionPdf> {
    let prepared = prepare_ps_state(params)?;
    Ok(pdf_from_populations(&prepared.populations(), params.measurement_variance(), grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    C,
    Sigma2,
    ChiT,
    X,
    N,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "c" => Ok(SweepAxis::C),
            "sigma2" => Ok(SweepAxis::Sigma2),
            "chi-t" | "chit" => Ok(SweepAxis::ChiT),
            "x" => Ok(SweepAxis::X),
            "n" => Ok(SweepAxis::N),
            other => Err(Error::invalid("axis", format!("unknown sweep axis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolParams {
    Ps(PsProtocolParams),
    Mss(MssProtocolParams),
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub seed: u64,
    pub result: Result<ProtocolResult>,
}

/// Seed for sweep point `index`, decorrelated from neighbouring bases.
pub fn point_seed(base: u64, index: usize) -> u64 {
    let mut z = base.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn axis_as_count(value: f64) -> Result<usize> {
    if value < 0.0 || value.fract() != 0.0 {
        return Err(Error::invalid("n", format!("sweep value {value} is not a qubit count")));
    }
    Ok(value as usize)
}

fn ps_point(base: &PsProtocolParams, axis: SweepAxis, value: f64, seed: u64) -> Result<PsProtocolParams> {
    let mut p = base.clone();
    p.engine.seed = seed;
    match axis {
        SweepAxis::C => p.c = value,
        SweepAxis::Sigma2 => p.sigma2 = value,
        SweepAxis::ChiT => p.chi_t = value,
        SweepAxis::X => p.engine.x = value,
        SweepAxis::N => {
            p.n = axis_as_count(value)?;
            p.sigma2 = default_sigma2(p.n);
        }
    }
    Ok(p)
}

fn mss_point(base: &MssProtocolParams, axis: SweepAxis, value: f64, seed: u64) -> Result<MssProtocolParams> {
    let mut p = base.clone();
    p.engine.seed = seed;
    match axis {
        SweepAxis::X => p.engine.x = value,
        SweepAxis::N => p.n = axis_as_count(value)?,
        other => {
            return Err(Error::invalid(
                "axis",
                format!("{other:?} does not apply to the MSS benchmark"),
            ))
        }
    }
    Ok(p)
}

/// Independent runs per value, in input order. Failures are kept per point.
///
/// A `c` sweep with a deterministic engine shares one prepared state, since
/// only the measurement depends on `c`.
pub fn sweep(params: &ProtocolParams, axis: SweepAxis, values: &[f64]) -> Vec<SweepPoint> {
    let base_seed = match params {
        ProtocolParams::Ps(p) => p.engine.seed,
        ProtocolParams::Mss(p) => p.engine.seed,
    };
    if let ProtocolParams::Ps(base) = params {
        if axis == SweepAxis::C && base.engine.engine != EngineKind::Trajectory {
            let prepared = prepare_ps_state(base);
            return values
                .par_iter()
                .enumerate()
                .map(|(i, &v)| {
                    let seed = point_seed(base_seed, i);
                    let result = match &prepared {
                        Ok(state) => ps_point(base, axis, v, seed).and_then(|p| finish_ps(state, &p)),
                        Err(e) => Err(e.clone()),
                    };
                    SweepPoint { value: v, seed, result }
                })
                .collect();
        }
    }
    values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let seed = point_seed(base_seed, i);
            let result = match params {
                ProtocolParams::Ps(p) => ps_point(p, axis, v, seed).and_then(|p| run_ps_protocol(&p)),
                ProtocolParams::Mss(p) => mss_point(p, axis, v, seed).and_then(|p| run_mss_protocol(&p)),
            };
            SweepPoint { value: v, seed, result }
        })
        .collect()
}

/// Named point of the decoherence-free protocol, for phase-space plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProtocolStage {
    Init,
    Cs,
    Squeezed,
    Rotated,
    Ps,
    Ghz,
    Mss,
}

impl std::str::FromStr for ProtocolStage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "init" => ProtocolStage::Init,
            "cs" => ProtocolStage::Cs,
            "squeezed" => ProtocolStage::Squeezed,
            "rotated" => ProtocolStage::Rotated,
            "ps" => ProtocolStage::Ps,
            "ghz" => ProtocolStage::Ghz,
            "mss" => ProtocolStage::Mss,
            other => return Err(Error::invalid("stage", format!("unknown stage `{other}`"))),
        })
    }
}

/// Decoherence-free state at `stage`, using the measurement and angles in `params`.
pub fn stage_state(params: &PsProtocolParams, stage: ProtocolStage) -> Result<PureState> {
    let spec = params.validate()?;
    let init = make_all_up(&spec);
    if stage == ProtocolStage::Init {
        return Ok(init);
    }
    if stage == ProtocolStage::Ghz {
        return Ok(ghz_state(&spec));
    }
    if stage == ProtocolStage::Mss {
        let mss = run_mss_protocol(&MssProtocolParams {
            n: params.n,
            chi_t: MSS_CHI_T,
            engine: EngineSettings::default(),
            compute_qfi: false,
        })?;
        return match mss.state {
            PreparedState::Pure(s) => Ok(s),
            _ => Err(Error::Invariant("pure engine returned a mixed state".into())),
        };
    }
    let cs = collective_rotation(init, CollectiveAxis::X, FRAC_PI_2);
    if stage == ProtocolStage::Cs {
        return Ok(cs);
    }
    let squeezed = apply_one_axis_twist(cs, params.chi_t);
    if stage == ProtocolStage::Squeezed {
        return Ok(squeezed);
    }
    let rotated = collective_rotation(squeezed, CollectiveAxis::X, -FRAC_PI_2);
    if stage == ProtocolStage::Rotated {
        return Ok(rotated);
    }
    let povm = PovmSpec::new(&spec, params.c, params.measurement_variance())?;
    let (measured, _) = apply_measurement(rotated, &povm)?;
    let out = collective_rotation(measured, CollectiveAxis::Y, params.final_jy_angle);
    Ok(collective_rotation(out, CollectiveAxis::X, params.final_jx_angle))
}

/// `θ ∈ [0, 2π]` covers the full great circle traced by the Husimi probe.
pub const HUSIMI_THETA_MAX: f64 = 2.0 * PI;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma2_defaults() {
        assert_eq!(default_sigma2(4), 1.1);
        assert_eq!(default_sigma2(10), 1.6);
        assert_eq!(default_sigma2(2), 1.1);
        assert_eq!(default_sigma2(14), 1.8);
        assert!((default_sigma2(5) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn ideal_mss_is_ghz() {
        for n in [2, 4, 6] {
            let r = run_mss_protocol(&MssProtocolParams::new(n)).unwrap();
            assert!((r.fidelity - 1.0).abs() < 1e-10, "N={n}: {}", r.fidelity);
        }
        assert_eq!(
            run_mss_protocol(&MssProtocolParams::new(5)).unwrap_err(),
            Error::OddQubitCount(5)
        );
    }

    #[test]
    fn curve_matches_direct_evaluation() {
        let params = PsProtocolParams::new(4).with_engine(EngineSettings::kraus(1.0));
        let prepared = prepare_ps_state(&params).unwrap();
        let curve = FidelityCurve::new(&prepared, FINAL_JY_ANGLE, FINAL_JX_ANGLE).unwrap();
        for c in [-3.0, -2.5, 0.0, 1.5] {
            let mut p = params.clone();
            p.c = c;
            p.compute_qfi = false;
            let direct = finish_ps(&prepared, &p).unwrap();
            let (f, pc) = curve.evaluate(c, p.measurement_variance());
            assert!((f - direct.fidelity).abs() < 1e-12);
            assert!((pc - direct.post_selection_probability.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_interval() {
        let params = PsProtocolParams::new(4);
        let r = interval_post_selection_report(&params, -2.5, -2.5, 0.25).unwrap();
        let single = run_ps_protocol(&params).unwrap();
        assert_eq!(r.probability, 0.0);
        assert!((r.f_min - single.fidelity).abs() < 1e-12);
        assert_eq!(r.f_min, r.f_max);
        assert!(interval_post_selection_report(&params, 1.0, -1.0, 0.25).is_err());
    }

    #[test]
    fn single_value_sweep_equals_run() {
        let params = PsProtocolParams::new(4);
        let pts = sweep(&ProtocolParams::Ps(params.clone()), SweepAxis::C, &[-2.5]);
        let r = run_ps_protocol(&params).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].result.as_ref().unwrap().fidelity - r.fidelity).abs() < 1e-14);
    }

    #[test]
    fn sweep_collects_errors() {
        let params = PsProtocolParams::new(4);
        let pts = sweep(&ProtocolParams::Ps(params), SweepAxis::X, &[0.0, 1.0]);
        assert!(pts[0].result.is_ok());
        // Pure engine rejects decoherence.
        assert!(pts[1].result.is_err());
        let mss = sweep(&ProtocolParams::Mss(MssProtocolParams::new(4)), SweepAxis::N, &[4.0, 5.0]);
        assert!(mss[0].result.is_ok());
        assert_eq!(mss[1].result.as_ref().unwrap_err(), &Error::OddQubitCount(5));
    }

    #[test]
    fn stages_parse_and_build() {
        let params = PsProtocolParams::new(4);
        for name in ["init", "cs", "squeezed", "rotated", "ps", "ghz", "mss"] {
            let stage: ProtocolStage = name.parse().unwrap();
            let s = stage_state(&params, stage).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
        assert!("bloch".parse::<ProtocolStage>().is_err());
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, f) = golden_section_max(|v| -(v - 0.3) * (v - 0.3), -1.0, 2.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(f.abs() < 1e-10);
    }

    #[test]
    fn angle_search_does_not_lose_fidelity() {
        let mut params = PsProtocolParams::new(4);
        let base = run_ps_protocol(&params).unwrap().fidelity;
        params.optimize_angles = true;
        let tuned = run_ps_protocol(&params).unwrap().fidelity;
        assert!(tuned >= base - 1e-12);
    }
}
