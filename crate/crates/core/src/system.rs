use std::sync::Arc;

use crate::error::{Error, Result};

pub const MIN_QUBITS: usize = 2;
pub const DEFAULT_MAX_QUBITS: usize = 14;

/// Excitation number `m(b)` (count of spin-down qubits) for every basis index.
#[derive(Debug, PartialEq, Eq)]
pub struct ExcitationProfile {
    n: usize,
    m: Vec<u8>,
}

impl ExcitationProfile {
    fn new(n: usize) -> Self {
        let m = (0..1usize << n).map(|b| b.count_ones() as u8).collect();
        Self { n, m }
    }

    #[inline]
    pub fn excitation(&self, b: usize) -> usize {
        self.m[b] as usize
    }

    /// `M(b) = N/2 - m(b)`.
    #[inline]
    pub fn spin_projection(&self, b: usize) -> f64 {
        self.n as f64 / 2.0 - self.m[b] as f64
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.m
    }

    /// Number of basis indices with exactly `m` down spins.
    pub fn multiplicity(&self, m: usize) -> usize {
        self.m.iter().filter(|&&v| v as usize == m).count()
    }
}

/// Qubit count and cached Hilbert-space data shared by every state.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    n: usize,
    dim: usize,
    profile: Arc<ExcitationProfile>,
}

impl PartialEq for SystemSpec {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for SystemSpec {}

impl SystemSpec {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cap(n, DEFAULT_MAX_QUBITS)
    }

    pub fn with_cap(n: usize, max: usize) -> Result<Self> {
        let max = max.min(DEFAULT_MAX_QUBITS);
        if !(MIN_QUBITS..=max).contains(&n) {
            return Err(Error::QubitCount {
                n,
                min: MIN_QUBITS,
                max,
            });
        }
        Ok(Self {
            n,
            dim: 1 << n,
            profile: Arc::new(ExcitationProfile::new(n)),
        })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> &ExcitationProfile {
        &self.profile
    }

    /// Bit mask selecting `qubit` (qubit 0 is the most significant bit).
    #[inline]
    pub fn qubit_mask(&self, qubit: usize) -> usize {
        1 << (self.n - 1 - qubit)
    }

    pub(crate) fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n {
            return Err(Error::QubitOutOfRange { qubit, n: self.n });
        }
        Ok(())
    }

    pub(crate) fn check_dim(&self, actual: usize) -> Result<()> {
        if actual != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual,
            });
        }
        Ok(())
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(SystemSpec::new(1).is_err());
        assert!(SystemSpec::new(15).is_err());
        assert!(SystemSpec::with_cap(9, 8).is_err());
        assert_eq!(SystemSpec::new(14).unwrap().dim(), 1 << 14);
    }

    #[test]
    fn multiplicities_are_binomial() {
        for n in 2..=10 {
            let spec = SystemSpec::new(n).unwrap();
            for m in 0..=n {
                assert_eq!(spec.profile().multiplicity(m) as f64, binomial(n, m));
            }
        }
    }

    #[test]
    fn spin_projection_of_extremes() {
        let spec = SystemSpec::new(4).unwrap();
        assert_eq!(spec.profile().spin_projection(0), 2.0);
        assert_eq!(spec.profile().spin_projection(15), -2.0);
        assert_eq!(spec.qubit_mask(0), 8);
        assert_eq!(spec.qubit_mask(3), 1);
    }
}
