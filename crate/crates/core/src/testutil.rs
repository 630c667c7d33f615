//! Random fixtures shared by unit tests.

use num_complex::Complex64;
use rand::Rng;

use crate::genome::{CircuitGenome, GateSpec};
use crate::qsim::{GateKind, StateVector};

pub fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let mut amps: Vec<Complex64> = (0..1 << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(amps).unwrap()
}

pub fn random_qubits(arity: usize, n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    (0..arity)
        .map(|_| pool.swap_remove(rng.gen_range(0..pool.len())))
        .collect()
}

pub fn random_gate(innovation: u64, n: usize, kinds: &[GateKind], rng: &mut impl Rng) -> GateSpec {
    let usable: Vec<GateKind> = kinds.iter().copied().filter(|k| k.arity() <= n).collect();
    let kind = usable[rng.gen_range(0..usable.len())];
    let params = (0..kind.num_params())
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();
    GateSpec::new(
        innovation,
        kind,
        rng.gen(),
        random_qubits(kind.arity(), n, rng),
        params,
    )
    .unwrap()
}

/// Adds `count` random enabled gates to `base`.
pub fn with_random_gates(
    base: &CircuitGenome,
    count: usize,
    kinds: &[GateKind],
    rng: &mut impl Rng,
) -> CircuitGenome {
    let mut g = base.clone();
    let start = g.max_innovation().map_or(0, |m| m + 1);
    for i in 0..count as u64 {
        g.push_gate(random_gate(start + i, base.num_qubits(), kinds, rng))
            .unwrap();
    }
    g
}
