use crate::error::{Error, Result};
use crate::measurement::{apply_measurement_log, PovmSpec};
use crate::spin::{collective_rotation, CollectiveAxis};
use crate::state::{DensityOperator, PureState};

use super::stats::{MetricSummary, TrajectoryStats};

/// Weighted set of trajectory end states.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub members: Vec<PureState>,
    pub rng_seed_base: u64,
    /// `P(c) = Σ_i P(c|i)/𝒩`, set once the ensemble has been post-selected.
    pub post_selection_probability: Option<f64>,
}

impl TrajectoryEnsemble {
    /// Ensemble with uniform weights `1/𝒩`.
    pub fn uniform(mut members: Vec<PureState>, rng_seed_base: u64) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("n_traj", "ensemble needs at least one member"));
        }
        let w = 1.0 / members.len() as f64;
        members.iter_mut().for_each(|m| m.weight = w);
        Ok(Self {
            members,
            rng_seed_base,
            post_selection_probability: None,
        })
    }

    pub fn n_traj(&self) -> usize {
        self.members.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.weight).collect()
    }

    pub fn weight_sum(&self) -> f64 {
        self.members.iter().map(|m| m.weight).sum()
    }

    /// `Σ_i w_i |φ_i⟩⟨φ_i|`.
    pub fn to_density(&self) -> Result<DensityOperator> {
        DensityOperator::from_ensemble(&self.members)
    }

    pub fn rotate(mut self, axis: CollectiveAxis, angle: f64) -> Self {
        self.members = self
            .members
            .into_iter()
            .map(|m| collective_rotation(m, axis, angle))
            .collect();
        self
    }
}

/// Measures every member and reweights by `P(i|c) = P(c|i)/Σ_j P(c|j)`.
pub fn ensemble_post_select(ensemble: TrajectoryEnsemble, povm: &PovmSpec) -> Result<TrajectoryEnsemble> {
    let n = ensemble.n_traj();
    let mut measured = Vec::with_capacity(n);
    let mut log_p = Vec::with_capacity(n);
    for m in ensemble.members {
        let prior = m.weight;
        let (s, lp) = apply_measurement_log(m, povm)?;
        measured.push(s);
        log_p.push(lp + prior.ln());
    }
    // Normalize in log space; tail outcomes underflow otherwise.
    let top = log_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::Invariant("every trajectory has zero outcome probability".into()));
    }
    let rel: Vec<f64> = log_p.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = rel.iter().sum();
    for (s, r) in measured.iter_mut().zip(&rel) {
        s.weight = r / z;
    }
    Ok(TrajectoryEnsemble {
        members: measured,
        rng_seed_base: ensemble.rng_seed_base,
        post_selection_probability: Some(z * top.exp()),
    })
}

/// `Σ_i w_i f(φ_i) / Σ_i w_i`.
pub fn ensemble_expectation(ensemble: &TrajectoryEnsemble, f: impl Fn(&PureState) -> f64) -> f64 {
    let total = ensemble.weight_sum();
    ensemble.members.iter().map(|m| m.weight * f(m)).sum::<f64>() / total
}

/// Weighted mean, SD and SE of `f` over the ensemble, in member order.
pub fn ensemble_summary(ensemble: &TrajectoryEnsemble, f: impl Fn(&PureState) -> f64) -> MetricSummary {
    let mut stats = TrajectoryStats::new(ensemble.n_traj());
    for m in &ensemble.members {
        stats.push_weighted(f(m), m.weight);
    }
    stats.summary()
}
