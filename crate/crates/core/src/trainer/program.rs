//! A genome compiled against a task: compact register, per-sample initial
//! states and the loss with its adjoint weighting.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::genome::CircuitGenome;
use crate::objective::{argmax, renormalize_classes, LossKind, PROB_FLOOR};
use crate::qsim::{
    apply_matrix, apply_pauli, expectation_unchecked, gate_unitary, gate_unitary_derivative, inner,
    supports_two_term_shift, GateKind, Matrix, ObservableSpec, StateVector,
};
use crate::task::TaskSpec;

use super::{ParamVector, TrainError};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Split {
    Train,
    Test,
}

struct Op {
    kind: GateKind,
    qubits: Vec<usize>,
    offset: usize,
}

enum Target {
    Class(usize),
    State {
        amps: Vec<C>,
        probs: Vec<f64>,
        expectations: Vec<f64>,
    },
}

struct Sample {
    initial: Vec<C>,
    target: Target,
}

/// Adjoint weighting `G` of a sample loss: `dL = 2 Re⟨Gψ|dψ⟩`.
enum Weighting<'a> {
    Zero,
    /// One coefficient per readout label.
    Classes(Vec<f64>),
    /// One coefficient per basis index.
    Basis(Vec<f64>),
    Projector(f64, &'a [C]),
    Paulis(Vec<(f64, ObservableSpec)>),
}

pub(crate) struct Program {
    dim: usize,
    ops: Vec<Op>,
    samples: Vec<Sample>,
    loss: LossKind,
    num_classes: usize,
    /// Readout label of each compact basis index.
    labels: Vec<usize>,
    observables: Vec<ObservableSpec>,
}

/// Loss plus per-sample diagnostics at one parameter point.
pub(crate) struct Evaluation {
    pub loss: f64,
    pub correct: usize,
    pub fidelity: f64,
    pub angular: f64,
}

impl Program {
    pub(crate) fn compile(
        genome: &CircuitGenome,
        task: &TaskSpec,
        params: &ParamVector,
        split: Split,
    ) -> Result<Self, TrainError> {
        if genome.num_qubits() != task.num_qubits() {
            return Err(TrainError::Mismatch(format!(
                "genome has {} qubits, task `{}` needs {}",
                genome.num_qubits(),
                task.name(),
                task.num_qubits()
            )));
        }
        let offsets = params.offsets();
        let gates: Vec<_> = genome.enabled_gates().collect();
        match task {
            TaskSpec::Dataset(d) => {
                // Backward light cone of the readout register.
                let n = d.num_qubits();
                let mut in_cone = vec![false; n];
                for &q in &d.readout.readout_qubits {
                    in_cone[q] = true;
                }
                let mut kept = Vec::new();
                for g in gates.iter().rev() {
                    if g.qubits().iter().any(|&q| in_cone[q]) {
                        g.qubits().iter().for_each(|&q| in_cone[q] = true);
                        kept.push(*g);
                    }
                }
                kept.reverse();
                let cone: Vec<usize> = (0..n).filter(|&q| in_cone[q]).collect();
                let mut compact = vec![usize::MAX; n];
                for (i, &q) in cone.iter().enumerate() {
                    compact[q] = i;
                }
                let ops = kept
                    .iter()
                    .map(|g| Op {
                        kind: g.kind(),
                        qubits: g.qubits().iter().map(|&q| compact[q]).collect(),
                        offset: offsets.get(&g.innovation()).copied().unwrap_or(usize::MAX),
                    })
                    .collect();
                let readout: Vec<usize> = d
                    .readout
                    .readout_qubits
                    .iter()
                    .map(|&q| compact[q])
                    .collect();
                let dim = 1usize << cone.len();
                let labels = (0..dim)
                    .map(|i| {
                        readout
                            .iter()
                            .enumerate()
                            .fold(0, |acc, (b, &q)| acc | ((i >> q) & 1) << b)
                    })
                    .collect();
                let rows = match split {
                    Split::Train => &d.train,
                    Split::Test => &d.test,
                };
                let one = C::new(1.0, 0.0);
                let samples = rows
                    .iter()
                    .map(|s| {
                        let all = crate::objective::encoding_factors(&s.angles, d.num_input_qubits);
                        let factors: Vec<[C; 2]> = cone
                            .iter()
                            .map(|&q| all.get(q).copied().unwrap_or([one, ZERO]))
                            .collect();
                        Sample {
                            initial: StateVector::product(&factors).into_amplitudes(),
                            target: Target::Class(s.label),
                        }
                    })
                    .collect();
                Ok(Program {
                    dim,
                    ops,
                    samples,
                    loss: LossKind::CrossEntropy,
                    num_classes: d.num_classes,
                    labels,
                    observables: Vec::new(),
                })
            }
            TaskSpec::Teacher(t) => {
                let ops = gates
                    .iter()
                    .map(|g| Op {
                        kind: g.kind(),
                        qubits: g.qubits().to_vec(),
                        offset: offsets.get(&g.innovation()).copied().unwrap_or(usize::MAX),
                    })
                    .collect();
                let samples = t
                    .probes
                    .iter()
                    .zip(&t.targets)
                    .map(|(p, tgt)| Sample {
                        initial: p.amplitudes().to_vec(),
                        target: Target::State {
                            amps: tgt.amplitudes().to_vec(),
                            probs: tgt.probabilities(),
                            expectations: t
                                .observables
                                .iter()
                                .map(|&o| expectation_unchecked(tgt.amplitudes(), o))
                                .collect(),
                        },
                    })
                    .collect();
                if t.loss == LossKind::ObservableMse && t.observables.is_empty() {
                    return Err(TrainError::Mismatch(
                        "observable loss needs observables".into(),
                    ));
                }
                Ok(Program {
                    dim: 1 << t.num_qubits(),
                    ops,
                    samples,
                    loss: t.loss,
                    num_classes: 0,
                    labels: Vec::new(),
                    observables: t.observables.clone(),
                })
            }
        }
    }

    pub(crate) fn num_samples(&self) -> usize {
        self.samples.len()
    }

    fn matrices(&self, values: &[f64]) -> Vec<Matrix> {
        self.ops
            .iter()
            .map(|op| gate_unitary(op.kind, op_params(op, values)).expect("arity checked"))
            .collect()
    }

    fn forward(&self, sample: &Sample, mats: &[Matrix], psi: &mut Vec<C>) {
        psi.clear();
        psi.extend_from_slice(&sample.initial);
        for (op, m) in self.ops.iter().zip(mats) {
            apply_matrix(psi, m, &op.qubits);
        }
    }

    /// Mean loss and diagnostics.
    pub(crate) fn evaluate(&self, values: &[f64]) -> Evaluation {
        let mats = self.matrices(values);
        let mut psi = Vec::with_capacity(self.dim);
        let mut ev = Evaluation {
            loss: 0.0,
            correct: 0,
            fidelity: 0.0,
            angular: 0.0,
        };
        for s in &self.samples {
            self.forward(s, &mats, &mut psi);
            let (loss, _) = self.sample_loss(&psi, &s.target, false);
            ev.loss += loss;
            match &s.target {
                Target::Class(label) => {
                    if argmax(&self.class_probs(&psi)) == *label {
                        ev.correct += 1;
                    }
                }
                Target::State { amps, .. } => {
                    let o = inner(amps, &psi).norm();
                    ev.fidelity += o * o;
                    ev.angular += o.clamp(0.0, 1.0).acos();
                }
            }
        }
        let n = self.samples.len().max(1) as f64;
        ev.loss /= n;
        ev.fidelity /= n;
        ev.angular /= n;
        ev
    }

    pub(crate) fn loss(&self, values: &[f64]) -> f64 {
        let mats = self.matrices(values);
        let mut psi = Vec::with_capacity(self.dim);
        let mut total = 0.0;
        for s in &self.samples {
            self.forward(s, &mats, &mut psi);
            total += self.sample_loss(&psi, &s.target, false).0;
        }
        total / self.samples.len().max(1) as f64
    }

    fn class_probs(&self, psi: &[C]) -> Vec<f64> {
        let r = self.labels.iter().max().map_or(0, |&m| m + 1);
        let mut marginal = vec![0.0; r.max(self.num_classes)];
        for (a, &l) in psi.iter().zip(&self.labels) {
            marginal[l] += a.norm_sqr();
        }
        renormalize_classes(&marginal, self.num_classes)
    }

    fn sample_loss<'a>(
        &self,
        psi: &[C],
        target: &'a Target,
        want_weights: bool,
    ) -> (f64, Weighting<'a>) {
        match (target, self.loss) {
            (Target::Class(label), _) => {
                let k = self.num_classes;
                let mut marginal = vec![0.0; k.max(self.labels.iter().max().map_or(0, |&m| m + 1))];
                for (a, &l) in psi.iter().zip(&self.labels) {
                    marginal[l] += a.norm_sqr();
                }
                let mass: f64 = marginal[..k].iter().sum();
                if mass <= 0.0 {
                    return ((k as f64).ln(), Weighting::Zero);
                }
                let p = marginal[*label] / mass;
                if p < PROB_FLOOR {
                    return (-PROB_FLOOR.ln(), Weighting::Zero);
                }
                if !want_weights {
                    return (-p.ln(), Weighting::Zero);
                }
                let mut coeffs = vec![0.0; marginal.len()];
                coeffs[..k].iter_mut().for_each(|c| *c = 1.0 / mass);
                coeffs[*label] -= 1.0 / marginal[*label];
                (-p.ln(), Weighting::Classes(coeffs))
            }
            (Target::State { amps, .. }, LossKind::Fidelity) => {
                let f = inner(amps, psi).norm_sqr();
                (1.0 - f, Weighting::Projector(-1.0, amps))
            }
            (Target::State { amps, .. }, LossKind::Angular) => {
                let f = inner(amps, psi).norm_sqr().clamp(0.0, 1.0);
                let s = f.sqrt();
                let d = if f > 0.0 && 1.0 - f > 1e-14 {
                    -1.0 / (2.0 * s * (1.0 - f).sqrt())
                } else {
                    0.0
                };
                (s.acos(), Weighting::Projector(d, amps))
            }
            (Target::State { probs, .. }, LossKind::KlDivergence) => {
                let mut loss = 0.0;
                let mut w = vec![0.0; psi.len()];
                for (i, (&q, a)) in probs.iter().zip(psi).enumerate() {
                    if q <= 0.0 {
                        continue;
                    }
                    let p = a.norm_sqr();
                    loss += q * (q / p.max(PROB_FLOOR)).ln();
                    if p > PROB_FLOOR {
                        w[i] = -q / p;
                    }
                }
                (loss, Weighting::Basis(w))
            }
            (Target::State { expectations, .. }, LossKind::ObservableMse) => {
                let k = self.observables.len() as f64;
                let mut loss = 0.0;
                let mut coeffs = Vec::with_capacity(self.observables.len());
                for (&o, &t) in self.observables.iter().zip(expectations) {
                    let d = expectation_unchecked(psi, o) - t;
                    loss += d * d / k;
                    coeffs.push((2.0 * d / k, o));
                }
                (loss, Weighting::Paulis(coeffs))
            }
            (Target::State { .. }, LossKind::CrossEntropy) => {
                unreachable!("teacher tasks never use the readout loss")
            }
        }
    }

    /// Writes `Gψ` into `out`.
    fn apply_weighting(&self, w: &Weighting, psi: &[C], out: &mut Vec<C>) {
        out.clear();
        out.resize(psi.len(), ZERO);
        match w {
            Weighting::Zero => {}
            Weighting::Classes(c) => {
                for ((o, a), &l) in out.iter_mut().zip(psi).zip(&self.labels) {
                    *o = a * c[l];
                }
            }
            Weighting::Basis(c) => {
                for ((o, a), &x) in out.iter_mut().zip(psi).zip(c) {
                    *o = a * x;
                }
            }
            Weighting::Projector(c, phi) => {
                let ov = inner(phi, psi) * *c;
                for (o, p) in out.iter_mut().zip(phi.iter()) {
                    *o = p * ov;
                }
            }
            Weighting::Paulis(terms) => {
                let mut scratch = vec![ZERO; psi.len()];
                for &(c, obs) in terms {
                    apply_pauli(psi, obs.pauli, obs.qubit, &mut scratch);
                    for (o, s) in out.iter_mut().zip(&scratch) {
                        *o += s * c;
                    }
                }
            }
        }
    }

    /// Loss and gradient by reverse-mode (adjoint) differentiation.
    pub(crate) fn loss_and_gradient_adjoint(&self, values: &[f64]) -> (f64, Vec<f64>) {
        let mats = self.matrices(values);
        let adjoints: Vec<Matrix> = mats.iter().map(Matrix::adjoint).collect();
        let derivs: Vec<Vec<Matrix>> = self
            .ops
            .iter()
            .map(|op| {
                let p = op_params(op, values);
                (0..p.len())
                    .map(|w| gate_unitary_derivative(op.kind, p, w).expect("arity checked"))
                    .collect()
            })
            .collect();
        let mut grad = vec![0.0; values.len()];
        let mut total = 0.0;
        let mut phi = Vec::with_capacity(self.dim);
        let mut lam = Vec::with_capacity(self.dim);
        let mut tmp = Vec::with_capacity(self.dim);
        for s in &self.samples {
            self.forward(s, &mats, &mut phi);
            let (loss, w) = self.sample_loss(&phi, &s.target, true);
            total += loss;
            if matches!(w, Weighting::Zero) {
                continue;
            }
            self.apply_weighting(&w, &phi, &mut lam);
            for (i, op) in self.ops.iter().enumerate().rev() {
                apply_matrix(&mut phi, &adjoints[i], &op.qubits);
                for (k, dm) in derivs[i].iter().enumerate() {
                    tmp.clear();
                    tmp.extend_from_slice(&phi);
                    apply_matrix(&mut tmp, dm, &op.qubits);
                    grad[op.offset + k] += 2.0 * inner(&lam, &tmp).re;
                }
                if i > 0 {
                    apply_matrix(&mut lam, &adjoints[i], &op.qubits);
                }
            }
        }
        let n = self.samples.len().max(1) as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        (total / n, grad)
    }

    /// Two-term shift rule where exact, central differences otherwise.
    pub(crate) fn loss_and_gradient_shift(&self, values: &[f64], fd_step: f64) -> (f64, Vec<f64>) {
        let mats = self.matrices(values);
        let mut psi = Vec::with_capacity(self.dim);
        let mut total = 0.0;
        let mut weights = Vec::with_capacity(self.samples.len());
        for s in &self.samples {
            self.forward(s, &mats, &mut psi);
            let (loss, w) = self.sample_loss(&psi, &s.target, true);
            total += loss;
            weights.push(w);
        }
        let n = self.samples.len().max(1) as f64;
        let mut grad = vec![0.0; values.len()];
        let mut shifted = values.to_vec();
        let mut gpsi = Vec::with_capacity(self.dim);
        for op in &self.ops {
            for k in 0..op.kind.num_params() {
                let idx = op.offset + k;
                if !supports_two_term_shift(op.kind, k) {
                    grad[idx] += self.central_difference(&mut shifted, idx, fd_step);
                    continue;
                }
                let mut acc = 0.0;
                for (sign, shift) in [(1.0, FRAC_PI_2), (-1.0, -FRAC_PI_2)] {
                    shifted[idx] = values[idx] + shift;
                    let m = self.matrices(&shifted);
                    for (s, w) in self.samples.iter().zip(&weights) {
                        self.forward(s, &m, &mut psi);
                        self.apply_weighting(w, &psi, &mut gpsi);
                        acc += sign * inner(&psi, &gpsi).re;
                    }
                }
                shifted[idx] = values[idx];
                grad[idx] += acc / (2.0 * n);
            }
        }
        (total / n, grad)
    }

    fn central_difference(&self, values: &mut [f64], idx: usize, h: f64) -> f64 {
        let x = values[idx];
        values[idx] = x + h;
        let up = self.loss(values);
        values[idx] = x - h;
        let dn = self.loss(values);
        values[idx] = x;
        (up - dn) / (2.0 * h)
    }

    /// Central differences on every parameter.
    pub(crate) fn loss_and_gradient_fd(&self, values: &[f64], fd_step: f64) -> (f64, Vec<f64>) {
        let loss = self.loss(values);
        let mut v = values.to_vec();
        let grad = (0..values.len())
            .map(|i| self.central_difference(&mut v, i, fd_step))
            .collect();
        (loss, grad)
    }
}

fn op_params<'a>(op: &Op, values: &'a [f64]) -> &'a [f64] {
    let n = op.kind.num_params();
    if n == 0 {
        &[]
    } else {
        &values[op.offset..op.offset + n]
    }
}
