//! Small-system checks against dense matrices built independently of the library.

use nalgebra::DMatrix;
use num_complex::Complex64;
use projsq_core::channels::{build_rate_model, effective_hamiltonian_diagonal, ChannelSet};
use projsq_core::engines::{kraus_squeeze, kraus_step, run_trajectories, EngineConfig, EngineKind};
use projsq_core::metrics::{qfi_mixed, trace_distance, DEFAULT_EIGEN_THRESHOLD};
use projsq_core::spin::{apply_one_axis_twist, coherent_spin_state, collective_rotation, ghz_state};
use projsq_core::{CollectiveAxis, DensityOperator, PureState, SystemSpec};

type M = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn eye(d: usize) -> M {
    M::identity(d, d)
}

fn m2(a: [[f64; 2]; 2]) -> M {
    M::from_fn(2, 2, |i, j| c(a[i][j]))
}

/// `op` on qubit `q` of `n`, qubit 0 leftmost in the tensor product.
fn embed(op: &M, q: usize, n: usize) -> M {
    let mut out = M::identity(1, 1);
    for k in 0..n {
        let f = if k == q { op.clone() } else { eye(2) };
        out = out.kronecker(&f);
    }
    out
}

fn jz(n: usize) -> M {
    let z = m2([[1.0, 0.0], [0.0, -1.0]]);
    let mut out = M::zeros(1 << n, 1 << n);
    for q in 0..n {
        out += embed(&z, q, n) * c(0.5);
    }
    out
}

fn to_rho(spec: &SystemSpec, m: &M) -> DensityOperator {
    let d = m.nrows();
    let data = (0..d * d).map(|k| m[(k / d, k % d)]).collect();
    DensityOperator::from_matrix(spec, data).unwrap()
}

fn max_diff(a: &DensityOperator, b: &M) -> f64 {
    let d = b.nrows();
    (0..d * d)
        .map(|k| (a.get(k / d, k % d) - b[(k / d, k % d)]).norm())
        .fold(0.0, f64::max)
}

/// Jump operators with their probabilities: `√p1·σz`, `√p2·σ−`, `√p2·σ+` per qubit.
fn dense_jumps(n: usize, p1: f64, p2: f64) -> Vec<M> {
    let z = m2([[1.0, 0.0], [0.0, -1.0]]);
    // Basis |↑⟩ = index 0; σ− sends it to |↓⟩ = index 1.
    let lower = m2([[0.0, 0.0], [1.0, 0.0]]);
    let raise = m2([[0.0, 1.0], [0.0, 0.0]]);
    let mut out = Vec::new();
    for (op, p) in [(z, p1), (lower, p2), (raise, p2)] {
        for q in 0..n {
            out.push(embed(&op, q, n) * c(p.sqrt()));
        }
    }
    out
}

fn dense_step(rho: &M, n: usize, chi: f64, dt: f64, p1: f64, p2: f64) -> M {
    let jumps = dense_jumps(n, p1, p2);
    let mut decay = M::zeros(1 << n, 1 << n);
    for l in &jumps {
        decay += l.adjoint() * l;
    }
    let jz2 = jz(n) * jz(n);
    let m0 = eye(1 << n) - jz2 * Complex64::new(0.0, chi * dt) - decay * c(0.5);
    let mut out = &m0 * rho * m0.adjoint();
    for l in &jumps {
        out += l * rho * l.adjoint();
    }
    let tr: Complex64 = out.trace();
    out / tr
}

fn random_density(spec: &SystemSpec, seed: u64) -> DensityOperator {
    // Deterministic pseudo-random Gram matrix.
    let d = spec.dim();
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let a = M::from_fn(d, d, |_, _| Complex64::new(next(), next()));
    let g = &a * a.adjoint();
    let tr = g.trace();
    to_rho(spec, &(g / tr))
}

#[test]
fn kraus_step_matches_dense_two_qubits() {
    let spec = SystemSpec::new(2).unwrap();
    let rates = build_rate_model(3300.0, 2, 1.0).unwrap();
    let ch = ChannelSet::new(&spec, rates, 1e-6).unwrap();
    for seed in 0..4 {
        let rho = random_density(&spec, seed);
        let (got, _) = kraus_step(&rho, &ch).unwrap();
        let dense = rho.to_dmatrix();
        let want = dense_step(&dense, 2, rates.chi, 1e-6, ch.p1, ch.p2);
        assert!(max_diff(&got, &want) < 1e-13, "seed {seed}");
    }
}

#[test]
fn kraus_step_matches_dense_three_qubits() {
    let spec = SystemSpec::new(3).unwrap();
    let rates = build_rate_model(3300.0, 3, 2.0).unwrap();
    let ch = ChannelSet::new(&spec, rates, 1e-6).unwrap();
    let rho = random_density(&spec, 17);
    let (got, _) = kraus_step(&rho, &ch).unwrap();
    let want = dense_step(&rho.to_dmatrix(), 3, rates.chi, 1e-6, ch.p1, ch.p2);
    assert!(max_diff(&got, &want) < 1e-13);
}

#[test]
fn kraus_squeeze_matches_dense_evolution() {
    let spec = SystemSpec::new(3).unwrap();
    let cfg = EngineConfig::standard(&spec, 1.0, 0.15, EngineKind::Kraus).unwrap();
    let rho0 = DensityOperator::from_pure(&coherent_spin_state(&spec));
    let got = kraus_squeeze(rho0.clone(), &cfg).unwrap();
    let mut dense = rho0.to_dmatrix();
    for seg in cfg.segments().unwrap() {
        let ch = &seg.channels;
        for _ in 0..seg.steps {
            dense = dense_step(&dense, 3, ch.rates.chi, ch.dt, ch.p1, ch.p2);
        }
    }
    assert!(max_diff(&got, &dense) < 1e-10);
}

#[test]
fn effective_hamiltonian_two_qubits() {
    let spec = SystemSpec::new(2).unwrap();
    let rates = build_rate_model(3300.0, 2, 1.0).unwrap();
    let dt = 1e-7;
    let ch = ChannelSet::new(&spec, rates, dt).unwrap();
    let mut decay = M::zeros(4, 4);
    for l in dense_jumps(2, ch.p1, ch.p2) {
        decay += l.adjoint() * l;
    }
    let h = jz(2) * jz(2) * c(rates.chi) - decay * Complex64::new(0.0, 0.5 / dt);
    let diag = effective_hamiltonian_diagonal(&ch, rates.chi);
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert!(h[(i, j)].norm() < 1e-12);
            }
        }
        assert!((h[(i, i)].re - diag[i].0).abs() < 1e-9);
        assert!((h[(i, i)].im - diag[i].1).abs() < 1e-9);
    }
}

#[test]
fn mixed_qfi_matches_dense_spectrum() {
    let spec = SystemSpec::new(3).unwrap();
    let rho = random_density(&spec, 5);
    let dense = rho.to_dmatrix();
    let herm = (&dense + dense.adjoint()) * c(0.5);
    let eig = herm.symmetric_eigen();
    let j = jz(3);
    let v = &eig.eigenvectors;
    let jm = v.adjoint() * j * v;
    let mut want = 0.0;
    for a in 0..8 {
        for b in 0..8 {
            let (la, lb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
            if la + lb > 1e-12 {
                want += 2.0 * (la - lb).powi(2) / (la + lb) * jm[(a, b)].norm_sqr();
            }
        }
    }
    let got = qfi_mixed(&rho, CollectiveAxis::Z, DEFAULT_EIGEN_THRESHOLD).unwrap();
    assert!((got.value - want).abs() < 1e-8, "{} vs {want}", got.value);
}

#[test]
fn twist_matches_dense_exponential() {
    let spec = SystemSpec::new(3).unwrap();
    let cs = coherent_spin_state(&spec);
    let chi_t = 0.37;
    let j2 = jz(3) * jz(3);
    // Diagonal, so the exponential is elementwise.
    let got = apply_one_axis_twist(cs.clone(), chi_t);
    for (b, a) in cs.amplitudes().iter().enumerate() {
        let phase = Complex64::new(0.0, -chi_t * j2[(b, b)].re).exp();
        assert!((got.amplitudes()[b] - a * phase).norm() < 1e-14);
    }
}

#[test]
fn ghz_rotation_matches_dense_unitary() {
    let spec = SystemSpec::new(3).unwrap();
    let g = ghz_state(&spec);
    let theta: f64 = 0.81;
    let (cs, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let ry = m2([[cs, -sn], [sn, cs]]);
    let mut u = M::identity(1, 1);
    for _ in 0..3 {
        u = u.kronecker(&ry);
    }
    let v = nalgebra::DVector::from_column_slice(g.amplitudes());
    let want = u * v;
    let got = collective_rotation(g, CollectiveAxis::Y, theta);
    for b in 0..8 {
        assert!((got.amplitudes()[b] - want[b]).norm() < 1e-14);
    }
}

#[test]
fn trajectories_converge_to_kraus() {
    for n in [2usize, 3, 4] {
        let spec = SystemSpec::new(n).unwrap();
        let traj = EngineConfig::standard(&spec, 1.0, 0.15, EngineKind::Trajectory).unwrap();
        let kraus = EngineConfig::standard(&spec, 1.0, 0.15, EngineKind::Kraus).unwrap();
        let cs = coherent_spin_state(&spec);
        let members = run_trajectories(&cs, &traj, 5000, 11).unwrap();
        let avg = DensityOperator::from_ensemble(&members).unwrap();
        let rho = kraus_squeeze(DensityOperator::from_pure(&cs), &kraus).unwrap();
        let td = trace_distance(&avg, &rho).unwrap();
        assert!(td < 0.05, "N={n}: trace distance {td}");
    }
}

#[test]
fn pure_state_from_dense_vector_round_trips() {
    let spec = SystemSpec::new(2).unwrap();
    let amps = vec![c(0.5), Complex64::new(0.0, 0.5), c(-0.5), c(0.5)];
    let s = PureState::new(&spec, amps.clone()).unwrap();
    let rho = DensityOperator::from_pure(&s);
    for i in 0..4 {
        for j in 0..4 {
            assert!((rho.get(i, j) - amps[i] * amps[j].conj()).norm() < 1e-15);
        }
    }
}
