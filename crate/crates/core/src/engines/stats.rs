use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub const MIN_WINDOW: usize = 50;
pub const SD_STABILITY: f64 = 0.02;
pub const RELATIVE_SE_LIMIT: f64 = 0.05;

/// Streaming weighted mean with the post-selection standard error
/// `SE = sqrt(Σ w_i²(x_i − x̄)² · n/(n−1)) / Σw` and `SD = SE·√n`.
///
/// With unit weights this is the ordinary sample SD and `SD/√n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    count: u64,
    sum_w: f64,
    sum_w2: f64,
    mean: f64,
    // Σw²(x − mean) and Σw²(x − mean)² about the current mean.
    lin: f64,
    quad: f64,
    window: usize,
    #[serde(skip)]
    sd_history: VecDeque<f64>,
    converged: bool,
}

/// Snapshot of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    pub n: u64,
    pub converged: bool,
}

impl TrajectoryStats {
    /// `expected_n` sizes the stability window as `max(50, expected_n/10)`.
    pub fn new(expected_n: usize) -> Self {
        Self {
            count: 0,
            sum_w: 0.0,
            sum_w2: 0.0,
            mean: 0.0,
            lin: 0.0,
            quad: 0.0,
            window: MIN_WINDOW.max(expected_n / 10),
            sd_history: VecDeque::new(),
            converged: false,
        }
    }

    fn shift(&mut self, new_mean: f64) {
        let delta = new_mean - self.mean;
        self.quad += -2.0 * delta * self.lin + delta * delta * self.sum_w2;
        self.lin -= delta * self.sum_w2;
        self.mean = new_mean;
    }

    pub fn push_weighted(&mut self, x: f64, w: f64) {
        self.count += 1;
        self.sum_w += w;
        if self.sum_w > 0.0 {
            let target = self.mean + w / self.sum_w * (x - self.mean);
            self.shift(target);
        }
        let r = x - self.mean;
        self.quad += w * w * r * r;
        self.lin += w * w * r;
        self.sum_w2 += w * w;
        self.update_convergence();
    }

    pub fn push(&mut self, x: f64) {
        self.push_weighted(x, 1.0);
    }

    fn update_convergence(&mut self) {
        let sd = self.sd();
        self.sd_history.push_back(sd);
        if self.sd_history.len() > self.window + 1 {
            self.sd_history.pop_front();
        }
        let stable = self.sd_history.len() > self.window && {
            let old = self.sd_history[0];
            if sd == 0.0 {
                old == 0.0
            } else {
                ((sd - old) / sd).abs() < SD_STABILITY
            }
        };
        self.converged = stable && self.relative_se_ok();
    }

    fn relative_se_ok(&self) -> bool {
        let se = self.se();
        if se == 0.0 {
            return true;
        }
        self.mean != 0.0 && se / self.mean.abs() < RELATIVE_SE_LIMIT
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn se(&self) -> f64 {
        if self.count < 2 || self.sum_w <= 0.0 {
            return 0.0;
        }
        let n = self.count as f64;
        (self.quad.max(0.0) * n / (n - 1.0)).sqrt() / self.sum_w
    }

    pub fn sd(&self) -> f64 {
        self.se() * (self.count as f64).sqrt()
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Combines two disjoint sample sets. Convergence history is not
    /// transferable, so the merged flag requires both inputs converged.
    pub fn merge(&mut self, other: &TrajectoryStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            let window = self.window;
            *self = other.clone();
            self.window = window;
            return;
        }
        let total = self.sum_w + other.sum_w;
        let mean = if total > 0.0 {
            (self.sum_w * self.mean + other.sum_w * other.mean) / total
        } else {
            0.0
        };
        let mut o = other.clone();
        self.shift(mean);
        o.shift(mean);
        self.count += o.count;
        self.sum_w = total;
        self.sum_w2 += o.sum_w2;
        self.lin += o.lin;
        self.quad += o.quad;
        self.sd_history.clear();
        self.converged = self.converged && other.converged && self.relative_se_ok();
    }

    pub fn summary(&self) -> MetricSummary {
        MetricSummary {
            mean: self.mean(),
            sd: self.sd(),
            se: self.se(),
            n: self.count,
            converged: self.converged,
        }
    }
}

/// Feeds one sample to the monitor and returns the updated accumulator.
pub fn convergence_monitor(mut stats: TrajectoryStats, new_sample: f64) -> TrajectoryStats {
    stats.push(new_sample);
    stats
}

/// Weighted summary of `values` in order.
pub fn weighted_summary(values: &[f64], weights: &[f64]) -> MetricSummary {
    let mut s = TrajectoryStats::new(values.len());
    for (x, w) in values.iter().zip(weights) {
        s.push_weighted(*x, *w);
    }
    s.summary()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples() {
        let mut s = TrajectoryStats::new(100);
        for _ in 0..49 {
            s.push(0.7);
        }
        assert!(!s.converged());
        for _ in 0..10 {
            s.push(0.7);
        }
        assert_eq!(s.sd(), 0.0);
        assert!(s.converged());
    }

    #[test]
    fn two_samples() {
        let mut s = TrajectoryStats::new(2);
        s.push(0.0);
        s.push(1.0);
        assert!((s.mean() - 0.5).abs() < 1e-15);
        assert!((s.sd() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(s.se() <= s.sd());
    }

    #[test]
    fn weighted_matches_closed_form() {
        let xs = [0.2, 0.9, 0.5, 0.4];
        let ws = [0.1, 0.4, 0.3, 0.2];
        let sum: f64 = ws.iter().sum();
        let mean: f64 = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / sum;
        let n = xs.len() as f64;
        let var: f64 = xs
            .iter()
            .zip(&ws)
            .map(|(x, w)| (w / sum).powi(2) * (x - mean).powi(2))
            .sum();
        let se = (var * n / (n - 1.0)).sqrt();
        let s = weighted_summary(&xs, &ws);
        assert!((s.mean - mean).abs() < 1e-15);
        assert!((s.se - se).abs() < 1e-14);
        assert!((s.sd - se * n.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<f64> = (0..37).map(|k| ((k * 7919) % 101) as f64 / 101.0).collect();
        let mut all = TrajectoryStats::new(37);
        xs.iter().for_each(|x| all.push(*x));
        let mut a = TrajectoryStats::new(37);
        let mut b = TrajectoryStats::new(37);
        xs[..15].iter().for_each(|x| a.push(*x));
        xs[15..].iter().for_each(|x| b.push(*x));
        a.merge(&b);
        assert_eq!(a.count(), all.count());
        assert!((a.mean() - all.mean()).abs() < 1e-14);
        assert!((a.sd() - all.sd()).abs() < 1e-13);
    }
}
