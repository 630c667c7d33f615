use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gates::{gate_unitary, GateKind};
use super::matrix::Matrix;
use super::QsimError;

/// Pure state of `num_qubits` qubits.
///
/// Basis labels are little-endian: qubit `q` is bit `q` of the amplitude
/// index, so `|10⟩` written as (q1 q0) with qubit 0 set is index 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    /// Computational basis state with the given little-endian label.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        assert!(num_qubits >= 1, "a register needs at least one qubit");
        let dim = 1usize << num_qubits;
        assert!(
            index < dim,
            "basis index {index} out of range for {num_qubits} qubits"
        );
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        StateVector {
            num_qubits,
            amplitudes,
        }
    }

    /// Tensor product of single-qubit states; `factors[q]` is qubit `q`.
    pub fn product(factors: &[[Complex64; 2]]) -> Self {
        assert!(!factors.is_empty(), "a register needs at least one qubit");
        let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
        // Qubit q is bit q, so later factors land in higher bits.
        for f in factors {
            let mut next = Vec::with_capacity(amplitudes.len() * 2);
            next.extend(amplitudes.iter().map(|a| a * f[0]));
            next.extend(amplitudes.iter().map(|a| a * f[1]));
            amplitudes = next;
        }
        StateVector {
            num_qubits: factors.len(),
            amplitudes,
        }
    }

    /// Wraps raw amplitudes, checking the length is a power of two and the
    /// norm is one.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, QsimError> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(QsimError::InvalidState(format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(QsimError::InvalidState(format!(
                "squared norm is {norm}, expected 1"
            )));
        }
        Ok(StateVector {
            num_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies `kind` in place to `qubits` (in slot order).
    pub fn apply_gate_in_place(
        &mut self,
        kind: GateKind,
        qubits: &[usize],
        params: &[f64],
    ) -> Result<(), QsimError> {
        if qubits.len() != kind.arity() {
            return Err(QsimError::QubitIndex(format!(
                "{kind} acts on {} qubits, got {}",
                kind.arity(),
                qubits.len()
            )));
        }
        check_qubits(qubits, self.num_qubits)?;
        let m = gate_unitary(kind, params)?;
        apply_matrix(&mut self.amplitudes, &m, qubits);
        Ok(())
    }

    /// Applies an arbitrary `2^k × 2^k` matrix to `qubits`.
    pub fn apply_matrix(&mut self, m: &Matrix, qubits: &[usize]) -> Result<(), QsimError> {
        if m.dim() != 1 << qubits.len() {
            return Err(QsimError::Dimension {
                expected: 1 << qubits.len(),
                got: m.dim(),
            });
        }
        check_qubits(qubits, self.num_qubits)?;
        apply_matrix(&mut self.amplitudes, m, qubits);
        Ok(())
    }
}

pub(crate) fn check_qubits(qubits: &[usize], num_qubits: usize) -> Result<(), QsimError> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= num_qubits {
            return Err(QsimError::QubitIndex(format!(
                "qubit {q} out of range for a {num_qubits}-qubit register"
            )));
        }
        if qubits[..i].contains(&q) {
            return Err(QsimError::QubitIndex(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

/// Spreads the bits of `i` around zero bits at the (ascending) positions
/// in `sorted`.
#[inline]
fn insert_zero_bits(mut i: usize, sorted: &[usize]) -> usize {
    for &q in sorted {
        let low = i & ((1 << q) - 1);
        i = ((i >> q) << (q + 1)) | low;
    }
    i
}

/// In-place strided application. `qubits[0]` is the most significant bit of
/// the gate-local index. Inputs are assumed validated.
pub(crate) fn apply_matrix(amps: &mut [Complex64], m: &Matrix, qubits: &[usize]) {
    let k = qubits.len();
    debug_assert_eq!(m.dim(), 1 << k);
    if k == 1 {
        return apply_single(amps, m, qubits[0]);
    }
    let local_dim = 1usize << k;
    let mut offsets = [0usize; 8];
    for (l, off) in offsets.iter_mut().enumerate().take(local_dim) {
        *off = (0..k)
            .filter(|s| (l >> (k - 1 - s)) & 1 == 1)
            .map(|s| 1usize << qubits[s])
            .sum();
    }
    let mut sorted = [0usize; 3];
    sorted[..k].copy_from_slice(qubits);
    sorted[..k].sort_unstable();
    let groups = amps.len() >> k;
    let data = m.as_slice();

    if m.is_diagonal() {
        let diag: Vec<Complex64> = (0..local_dim).map(|l| data[l * local_dim + l]).collect();
        for g in 0..groups {
            let base = insert_zero_bits(g, &sorted[..k]);
            for l in 0..local_dim {
                amps[base + offsets[l]] *= diag[l];
            }
        }
        return;
    }

    let mut buf = [Complex64::new(0.0, 0.0); 8];
    for g in 0..groups {
        let base = insert_zero_bits(g, &sorted[..k]);
        for l in 0..local_dim {
            buf[l] = amps[base + offsets[l]];
        }
        for r in 0..local_dim {
            let row = &data[r * local_dim..(r + 1) * local_dim];
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(&buf[..local_dim]) {
                acc += a * b;
            }
            amps[base + offsets[r]] = acc;
        }
    }
}

fn apply_single(amps: &mut [Complex64], m: &Matrix, q: usize) {
    let d = m.as_slice();
    let (m00, m01, m10, m11) = (d[0], d[1], d[2], d[3]);
    let stride = 1usize << q;
    if m01.norm_sqr() == 0.0 && m10.norm_sqr() == 0.0 {
        for chunk in amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = chunk.split_at_mut(stride);
            lo.iter_mut().for_each(|a| *a *= m00);
            hi.iter_mut().for_each(|a| *a *= m11);
        }
        return;
    }
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let x = *a;
            let y = *b;
            *a = m00 * x + m01 * y;
            *b = m10 * x + m11 * y;
        }
    }
}

/// Returns `state` with `kind` applied to `qubits`.
pub fn apply_gate(
    state: &StateVector,
    kind: GateKind,
    qubits: &[usize],
    params: &[f64],
) -> Result<StateVector, QsimError> {
    let mut out = state.clone();
    out.apply_gate_in_place(kind, qubits, params)?;
    Ok(out)
}

/// Marginal distribution over `qubits`; `qubits[0]` is the least
/// significant bit of the returned index.
pub fn marginal_probabilities(
    state: &StateVector,
    qubits: &[usize],
) -> Result<Vec<f64>, QsimError> {
    if qubits.is_empty() {
        return Err(QsimError::EmptyQubits);
    }
    check_qubits(qubits, state.num_qubits)?;
    Ok(marginal_unchecked(state.amplitudes(), qubits))
}

pub(crate) fn marginal_unchecked(amps: &[Complex64], qubits: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << qubits.len()];
    for (i, a) in amps.iter().enumerate() {
        let mut label = 0;
        for (bit, &q) in qubits.iter().enumerate() {
            label |= ((i >> q) & 1) << bit;
        }
        out[label] += a.norm_sqr();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// A single-qubit Pauli observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub pauli: Pauli,
    pub qubit: usize,
}

impl ObservableSpec {
    pub fn new(pauli: Pauli, qubit: usize) -> Self {
        ObservableSpec { pauli, qubit }
    }
}

/// Writes `P|ψ⟩` into `out` for a Pauli on `qubit`.
pub(crate) fn apply_pauli(amps: &[Complex64], pauli: Pauli, qubit: usize, out: &mut [Complex64]) {
    let bit = 1usize << qubit;
    let i = Complex64::new(0.0, 1.0);
    for (idx, o) in out.iter_mut().enumerate() {
        let set = idx & bit != 0;
        *o = match pauli {
            Pauli::X => amps[idx ^ bit],
            // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
            Pauli::Y => {
                if set {
                    i * amps[idx ^ bit]
                } else {
                    -i * amps[idx ^ bit]
                }
            }
            Pauli::Z => {
                if set {
                    -amps[idx]
                } else {
                    amps[idx]
                }
            }
        };
    }
}

/// `⟨ψ|O|ψ⟩` for a Pauli observable; the imaginary residue is dropped.
pub fn expectation(state: &StateVector, obs: ObservableSpec) -> Result<f64, QsimError> {
    check_qubits(&[obs.qubit], state.num_qubits)?;
    Ok(expectation_unchecked(state.amplitudes(), obs))
}

pub(crate) fn expectation_unchecked(amps: &[Complex64], obs: ObservableSpec) -> f64 {
    let bit = 1usize << obs.qubit;
    match obs.pauli {
        Pauli::Z => amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if i & bit != 0 {
                    -a.norm_sqr()
                } else {
                    a.norm_sqr()
                }
            })
            .sum(),
        Pauli::X | Pauli::Y => {
            let mut scratch = vec![Complex64::new(0.0, 0.0); amps.len()];
            apply_pauli(amps, obs.pauli, obs.qubit, &mut scratch);
            inner(amps, &scratch).re
        }
    }
}

/// `⟨a|b⟩`.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<Complex64, QsimError> {
    if a.num_qubits != b.num_qubits {
        return Err(QsimError::Dimension {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(inner(a.amplitudes(), b.amplitudes()))
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
