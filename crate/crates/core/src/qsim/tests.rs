use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::genome::{CircuitGenome, GateSpec};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_params(kind: GateKind, rng: &mut impl Rng) -> Vec<f64> {
    (0..kind.num_params())
        .map(|_| rng.gen_range(-4.0 * PI..4.0 * PI))
        .collect()
}

fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let mut amps: Vec<Complex64> = (0..1 << n)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(amps).unwrap()
}

fn random_qubits(arity: usize, n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for _ in 0..arity {
        out.push(pool.swap_remove(rng.gen_range(0..pool.len())));
    }
    out
}

/// Full-register matrix of a gate, built entry by entry from the bit
/// layout: slot 0 is the most significant local bit.
fn dense_embedding(m: &Matrix, qubits: &[usize], n: usize) -> Matrix {
    let dim = 1 << n;
    let mask: usize = qubits.iter().map(|q| 1 << q).sum();
    let local = |i: usize| qubits.iter().fold(0, |acc, &q| (acc << 1) | ((i >> q) & 1));
    let mut full = Matrix::zeros(dim);
    for r in 0..dim {
        for col in 0..dim {
            if r & !mask == col & !mask {
                full[(r, col)] = m[(local(r), local(col))];
            }
        }
    }
    full
}

fn mat_vec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.dim())
        .map(|r| (0..m.dim()).map(|col| m[(r, col)] * v[col]).sum())
        .collect()
}

/// Taylor-series matrix exponential, used as an independent oracle.
fn expm(a: &Matrix) -> Matrix {
    let mut term = Matrix::identity(a.dim());
    let mut sum = Matrix::identity(a.dim());
    for k in 1..60 {
        let mut next = &term * a;
        for v in 0..a.dim() {
            for w in 0..a.dim() {
                next[(v, w)] /= k as f64;
            }
        }
        term = next;
        for v in 0..a.dim() {
            for w in 0..a.dim() {
                sum[(v, w)] += term[(v, w)];
            }
        }
    }
    sum
}

fn assert_amps_close(a: &[Complex64], b: &[Complex64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).norm() < tol, "index {i}: {x} vs {y}");
    }
}

#[test]
fn every_gate_is_unitary_over_random_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kind in GateKind::ALL {
        let draws = if kind.is_parameterized() { 1000 } else { 1 };
        for _ in 0..draws {
            let p = random_params(kind, &mut rng);
            let u = gate_unitary(kind, &p).unwrap();
            assert_eq!(u.dim(), 1 << kind.arity());
            let prod = &u * &u.adjoint();
            let err = prod.max_abs_diff(&Matrix::identity(u.dim()));
            assert!(err < 1e-10, "{kind} {p:?}: {err}");
        }
    }
}

#[test]
fn vocabulary_matches_table() {
    assert_eq!(GateKind::ALL.len(), 26);
    let expect: &[(&str, usize, &[&str])] = &[
        ("ccx", 3, &[]),
        ("ccz", 3, &[]),
        ("ch", 2, &[]),
        ("cp", 2, &["phi"]),
        ("crx", 2, &["phi"]),
        ("cry", 2, &["phi"]),
        ("crz", 2, &["phi"]),
        ("cswap", 3, &[]),
        ("cx", 2, &[]),
        ("cy", 2, &[]),
        ("cz", 2, &[]),
        ("h", 1, &[]),
        ("id", 1, &[]),
        ("iswap", 2, &[]),
        ("p", 1, &["phi"]),
        ("rx", 1, &["phi"]),
        ("ry", 1, &["phi"]),
        ("rz", 1, &["phi"]),
        ("rzz", 2, &["theta"]),
        ("s", 1, &[]),
        ("swap", 2, &[]),
        ("t", 1, &[]),
        ("u", 1, &["theta", "phi", "delta"]),
        ("x", 1, &[]),
        ("y", 1, &[]),
        ("z", 1, &[]),
    ];
    for &(name, arity, params) in expect {
        let kind: GateKind = name.parse().unwrap();
        assert_eq!(kind.arity(), arity, "{name}");
        assert_eq!(kind.param_names(), params, "{name}");
        assert_eq!(kind.to_string(), name);
    }
    assert!(matches!(
        "fredkin".parse::<GateKind>(),
        Err(QsimError::UnknownGate(_))
    ));
}

#[test]
fn hadamard_and_zero_rotation() {
    let h = gate_unitary(GateKind::H, &[]).unwrap();
    let s = FRAC_1_SQRT_2;
    let expect = Matrix::from_rows(&[[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]]);
    assert!(h.max_abs_diff(&expect) < 1e-15);
    let rx0 = gate_unitary(GateKind::Rx, &[0.0]).unwrap();
    assert!(rx0.max_abs_diff(&Matrix::identity(2)) < 1e-15);
}

#[test]
fn rzz_pi_matches_exponential() {
    let u = gate_unitary(GateKind::Rzz, &[PI]).unwrap();
    let expect = Matrix::diagonal(&[c(0.0, -1.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, -1.0)]);
    assert!(u.max_abs_diff(&expect) < 1e-12);

    // -i (θ/2) Z⊗Z
    let mut gen = Matrix::zeros(4);
    for (i, z) in [1.0, -1.0, -1.0, 1.0].iter().enumerate() {
        gen[(i, i)] = c(0.0, -PI / 2.0 * z);
    }
    assert!(u.max_abs_diff(&expm(&gen)) < 1e-10);
}

#[test]
fn rotations_match_exponentials_of_paulis() {
    let paulis = [
        (
            GateKind::Rx,
            [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        ),
        (
            GateKind::Ry,
            [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
        ),
        (
            GateKind::Rz,
            [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
        ),
    ];
    for (kind, p) in paulis {
        let theta = 0.731;
        let mut gen = Matrix::from_rows(&p);
        for v in 0..2 {
            for w in 0..2 {
                gen[(v, w)] *= c(0.0, -theta / 2.0);
            }
        }
        let u = gate_unitary(kind, &[theta]).unwrap();
        assert!(u.max_abs_diff(&expm(&gen)) < 1e-12, "{kind}");
    }
}

#[test]
fn wrong_parameter_count_is_rejected() {
    assert!(matches!(
        gate_unitary(GateKind::U, &[0.1]),
        Err(QsimError::ParamArity {
            expected: 3,
            got: 1,
            ..
        })
    ));
    assert!(gate_unitary(GateKind::H, &[0.1]).is_err());
}

#[test]
fn hadamard_on_zero() {
    let out = apply_gate(&StateVector::zero(1), GateKind::H, &[0], &[]).unwrap();
    let s = FRAC_1_SQRT_2;
    assert_amps_close(out.amplitudes(), &[c(s, 0.0), c(s, 0.0)], 1e-15);
}

#[test]
fn cx_flips_target_when_control_set() {
    // |10⟩ in (q1 q0) order has qubit 0 set: index 1.
    let input = StateVector::basis(2, 0b01);
    let out = apply_gate(&input, GateKind::Cx, &[0, 1], &[]).unwrap();
    assert_eq!(out, StateVector::basis(2, 0b11));
    // Control clear: unchanged.
    let input = StateVector::basis(2, 0b10);
    let out = apply_gate(&input, GateKind::Cx, &[0, 1], &[]).unwrap();
    assert_eq!(out, input);
}

fn bell() -> Vec<Complex64> {
    let s = FRAC_1_SQRT_2;
    vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]
}

#[test]
fn bell_construction() {
    let mut s = StateVector::zero(2);
    s.apply_gate_in_place(GateKind::H, &[0], &[]).unwrap();
    s.apply_gate_in_place(GateKind::Cx, &[0, 1], &[]).unwrap();
    assert_amps_close(s.amplitudes(), &bell(), 1e-15);
}

#[test]
fn bad_qubit_lists_are_rejected() {
    let s = StateVector::zero(3);
    assert!(matches!(
        apply_gate(&s, GateKind::Cx, &[1, 1], &[]),
        Err(QsimError::QubitIndex(_))
    ));
    assert!(matches!(
        apply_gate(&s, GateKind::X, &[3], &[]),
        Err(QsimError::QubitIndex(_))
    ));
    assert!(apply_gate(&s, GateKind::Cx, &[0], &[]).is_err());
}

fn bell_genome(cx_enabled: bool) -> CircuitGenome {
    CircuitGenome::new(2, vec![0, 1], vec![0, 1])
        .unwrap()
        .insert_gate(GateSpec::new(0, GateKind::H, 0.2, vec![0], vec![]).unwrap())
        .unwrap()
        .insert_gate(
            GateSpec::new(1, GateKind::Cx, 0.6, vec![0, 1], vec![])
                .unwrap()
                .with_enabled(cx_enabled),
        )
        .unwrap()
}

#[test]
fn run_circuit_examples() {
    let empty = CircuitGenome::new(2, vec![0], vec![1]).unwrap();
    let x = StateVector::basis(2, 2);
    assert_eq!(run_circuit(&empty, &x).unwrap(), x);

    let out = run_circuit(&bell_genome(true), &StateVector::zero(2)).unwrap();
    assert_amps_close(out.amplitudes(), &bell(), 1e-15);

    // Only H acts: (|00⟩ + |01⟩)/√2 in index terms, i.e. qubit 0 in superposition.
    let out = run_circuit(&bell_genome(false), &StateVector::zero(2)).unwrap();
    let s = FRAC_1_SQRT_2;
    assert_amps_close(
        out.amplitudes(),
        &[c(s, 0.0), c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        1e-15,
    );
}

#[test]
fn run_circuit_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..1000 {
        let n = rng.gen_range(1..=4);
        let kinds: Vec<GateKind> = GateKind::ALL
            .iter()
            .copied()
            .filter(|k| k.arity() <= n)
            .collect();
        let mut genome = CircuitGenome::new(n, vec![0], vec![n - 1]).unwrap();
        for inn in 0..rng.gen_range(0..=6) {
            let kind = kinds[rng.gen_range(0..kinds.len())];
            let gate = GateSpec::new(
                inn,
                kind,
                rng.gen(),
                random_qubits(kind.arity(), n, &mut rng),
                random_params(kind, &mut rng),
            )
            .unwrap()
            .with_enabled(rng.gen_bool(0.85));
            genome = genome.insert_gate(gate).unwrap();
        }
        let initial = random_state(n, &mut rng);

        let mut total = Matrix::identity(1 << n);
        for g in genome.enabled_gates() {
            let m = gate_unitary(g.kind(), g.params()).unwrap();
            total = &dense_embedding(&m, g.qubits(), n) * &total;
        }
        let expect = mat_vec(&total, initial.amplitudes());
        let got = run_circuit(&genome, &initial).unwrap();
        for (x, y) in got.amplitudes().iter().zip(&expect) {
            assert!((x - y).norm() < 1e-9, "case {case}: {x} vs {y}");
        }
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-6;
    for kind in GateKind::ALL.into_iter().filter(|k| k.is_parameterized()) {
        for _ in 0..50 {
            let p = random_params(kind, &mut rng);
            for which in 0..p.len() {
                let mut plus = p.clone();
                plus[which] += h;
                let mut minus = p.clone();
                minus[which] -= h;
                let up = gate_unitary(kind, &plus).unwrap();
                let dn = gate_unitary(kind, &minus).unwrap();
                let d = gate_unitary_derivative(kind, &p, which).unwrap();
                for r in 0..d.dim() {
                    for col in 0..d.dim() {
                        let fd = (up[(r, col)] - dn[(r, col)]) / (2.0 * h);
                        assert!((fd - d[(r, col)]).norm() < 1e-7, "{kind} param {which}");
                    }
                }
            }
        }
    }
}

#[test]
fn marginal_examples() {
    let b = StateVector::from_amplitudes(bell()).unwrap();
    let m = marginal_probabilities(&b, &[0]).unwrap();
    assert!((m[0] - 0.5).abs() < 1e-15 && (m[1] - 0.5).abs() < 1e-15);

    // |01⟩ written (q1 q0): qubit 0 set, qubit 1 clear.
    let s = StateVector::basis(2, 0b01);
    assert_eq!(marginal_probabilities(&s, &[1]).unwrap(), vec![1.0, 0.0]);
    assert_eq!(marginal_probabilities(&s, &[0]).unwrap(), vec![0.0, 1.0]);

    let plus = StateVector::from_amplitudes(vec![c(0.5, 0.0); 4]).unwrap();
    assert_eq!(
        marginal_probabilities(&plus, &[0, 1]).unwrap(),
        vec![0.25; 4]
    );

    assert!(matches!(
        marginal_probabilities(&plus, &[]),
        Err(QsimError::EmptyQubits)
    ));
}

#[test]
fn expectation_examples() {
    let zero = StateVector::zero(1);
    let plus = apply_gate(&zero, GateKind::H, &[0], &[]).unwrap();
    let z = |s: &StateVector| expectation(s, ObservableSpec::new(Pauli::Z, 0)).unwrap();
    assert!((z(&zero) - 1.0).abs() < 1e-15);
    assert!(z(&plus).abs() < 1e-15);
    assert!((expectation(&plus, ObservableSpec::new(Pauli::X, 0)).unwrap() - 1.0).abs() < 1e-15);
    assert!(
        expectation(&plus, ObservableSpec::new(Pauli::Y, 0))
            .unwrap()
            .abs()
            < 1e-15
    );
    let i_state = apply_gate(&plus, GateKind::S, &[0], &[]).unwrap();
    assert!((expectation(&i_state, ObservableSpec::new(Pauli::Y, 0)).unwrap() - 1.0).abs() < 1e-15);
    assert!(expectation(&zero, ObservableSpec::new(Pauli::Z, 1)).is_err());
}

#[test]
fn overlap_examples() {
    let zero = StateVector::zero(1);
    let one = StateVector::basis(1, 1);
    let plus = apply_gate(&zero, GateKind::H, &[0], &[]).unwrap();
    assert!((overlap(&zero, &zero).unwrap() - 1.0).norm() < 1e-15);
    assert!(overlap(&zero, &one).unwrap().norm() < 1e-15);
    assert!((overlap(&zero, &plus).unwrap() - FRAC_1_SQRT_2).norm() < 1e-15);
    assert!(matches!(
        overlap(&zero, &StateVector::zero(2)),
        Err(QsimError::Dimension { .. })
    ));
}

#[test]
fn pauli_expectations_match_dense_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let s = random_state(n, &mut rng);
        let q = rng.gen_range(0..n);
        for (pauli, kind) in [
            (Pauli::X, GateKind::X),
            (Pauli::Y, GateKind::Y),
            (Pauli::Z, GateKind::Z),
        ] {
            let m = dense_embedding(&gate_unitary(kind, &[]).unwrap(), &[q], n);
            let ps = mat_vec(&m, s.amplitudes());
            let expect = inner(s.amplitudes(), &ps).re;
            let got = expectation(&s, ObservableSpec::new(pauli, q)).unwrap();
            assert!((got - expect).abs() < 1e-12);
        }
    }
}

fn state_strategy(max_qubits: usize) -> impl Strategy<Value = StateVector> {
    (1..=max_qubits, any::<u64>())
        .prop_map(|(n, seed)| random_state(n, &mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #[test]
    fn gates_preserve_norm(
        state in state_strategy(5),
        kind_idx in 0..GateKind::ALL.len(),
        seed in any::<u64>(),
    ) {
        let kind = GateKind::ALL[kind_idx];
        let n = state.num_qubits();
        prop_assume!(kind.arity() <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qubits = random_qubits(kind.arity(), n, &mut rng);
        let out = apply_gate(&state, kind, &qubits, &random_params(kind, &mut rng)).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn full_marginal_is_probability_vector(state in state_strategy(5)) {
        let all: Vec<usize> = (0..state.num_qubits()).collect();
        let m = marginal_probabilities(&state, &all).unwrap();
        for (a, b) in m.iter().zip(state.probabilities()) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn marginals_sum_to_one(state in state_strategy(5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = state.num_qubits();
        let k = rng.gen_range(1..=n);
        let m = marginal_probabilities(&state, &random_qubits(k, n, &mut rng)).unwrap();
        prop_assert!(m.iter().all(|&p| p >= 0.0));
        prop_assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn overlap_magnitude_is_symmetric(n in 1usize..5, s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = random_state(n, &mut ChaCha8Rng::seed_from_u64(s1));
        let b = random_state(n, &mut ChaCha8Rng::seed_from_u64(s2));
        let ab = overlap(&a, &b).unwrap().norm();
        let ba = overlap(&b, &a).unwrap().norm();
        prop_assert!((ab - ba).abs() < 1e-12);
    }
}
