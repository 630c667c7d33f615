//! Loss functions, feature encoding and class readout.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsim::{self, ObservableSpec, QsimError, StateVector};

/// Floor applied to probabilities before taking logarithms.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("observable list must not be empty")]
    NoObservables,
    #[error("label {label} out of range for {classes} classes")]
    Label { label: usize, classes: usize },
    #[error("feature vector must not be empty")]
    NoFeatures,
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Fidelity,
    Angular,
    KlDivergence,
    ObservableMse,
    CrossEntropy,
}

impl LossKind {
    pub fn is_teacher_loss(self) -> bool {
        self != LossKind::CrossEntropy
    }
}

pub fn fidelity(pred: &StateVector, target: &StateVector) -> Result<f64, ObjectiveError> {
    Ok(qsim::overlap(target, pred)?.norm_sqr())
}

pub fn fidelity_loss(pred: &StateVector, target: &StateVector) -> Result<f64, ObjectiveError> {
    Ok(1.0 - fidelity(pred, target)?)
}

pub fn angular_distance(pred: &StateVector, target: &StateVector) -> Result<f64, ObjectiveError> {
    let o = qsim::overlap(target, pred)?.norm();
    Ok(o.clamp(0.0, 1.0).acos())
}

/// `Σ q_i ln(q_i / p_i)` with `q` the target and `p` the prediction.
pub fn kl_divergence(pred_probs: &[f64], target_probs: &[f64]) -> Result<f64, ObjectiveError> {
    if pred_probs.len() != target_probs.len() {
        return Err(ObjectiveError::Length(pred_probs.len(), target_probs.len()));
    }
    Ok(pred_probs
        .iter()
        .zip(target_probs)
        .filter(|(_, &q)| q > 0.0)
        .map(|(&p, &q)| q * (q / p.max(PROB_FLOOR)).ln())
        .sum())
}

pub fn observable_mse(
    pred: &StateVector,
    target: &StateVector,
    observables: &[ObservableSpec],
) -> Result<f64, ObjectiveError> {
    if observables.is_empty() {
        return Err(ObjectiveError::NoObservables);
    }
    let mut sum = 0.0;
    for &o in observables {
        let d = qsim::expectation(pred, o)? - qsim::expectation(target, o)?;
        sum += d * d;
    }
    Ok(sum / observables.len() as f64)
}

/// Maps the readout register onto `num_classes` labels.
///
/// `readout_qubits[b]` carries bit `b` of the class label; labels
/// `num_classes..2^r` are ignored and the rest renormalized.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadoutMap {
    pub readout_qubits: Vec<usize>,
    pub num_classes: usize,
}

impl ReadoutMap {
    pub fn new(readout_qubits: Vec<usize>, num_classes: usize) -> Result<Self, ObjectiveError> {
        if readout_qubits.is_empty() || num_classes == 0 || num_classes > 1 << readout_qubits.len()
        {
            return Err(ObjectiveError::Label {
                label: num_classes,
                classes: 1 << readout_qubits.len(),
            });
        }
        Ok(ReadoutMap {
            readout_qubits,
            num_classes,
        })
    }

    /// ⌈log₂ K⌉, at least one.
    pub fn qubits_for(num_classes: usize) -> usize {
        (num_classes.max(2) as f64).log2().ceil() as usize
    }
}

pub fn readout_distribution(
    state: &StateVector,
    map: &ReadoutMap,
) -> Result<Vec<f64>, ObjectiveError> {
    let marginal = qsim::marginal_probabilities(state, &map.readout_qubits)?;
    Ok(renormalize_classes(&marginal, map.num_classes))
}

pub(crate) fn renormalize_classes(marginal: &[f64], k: usize) -> Vec<f64> {
    let mass: f64 = marginal[..k].iter().sum();
    if mass <= 0.0 {
        return vec![1.0 / k as f64; k];
    }
    marginal[..k].iter().map(|m| m / mass).collect()
}

pub fn cross_entropy(probs: &[f64], label: usize) -> Result<f64, ObjectiveError> {
    let p = probs.get(label).ok_or(ObjectiveError::Label {
        label,
        classes: probs.len(),
    })?;
    Ok(-p.max(PROB_FLOOR).ln())
}

/// Index of the largest probability, lowest index on ties.
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// Per-feature min and max over the training split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    /// Min-max scales into `[0, π]`, clamping values outside the range.
    pub fn angle(&self, x: f64) -> f64 {
        let span = self.max - self.min;
        if span <= 0.0 {
            return 0.0;
        }
        (PI * (x - self.min) / span).clamp(0.0, PI)
    }
}

pub fn fit_ranges<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Vec<FeatureRange> {
    let mut ranges: Vec<FeatureRange> = Vec::new();
    for row in rows {
        if ranges.is_empty() {
            ranges = row
                .iter()
                .map(|&x| FeatureRange { min: x, max: x })
                .collect();
            continue;
        }
        for (r, &x) in ranges.iter_mut().zip(row) {
            r.min = r.min.min(x);
            r.max = r.max.max(x);
        }
    }
    ranges
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedSample {
    pub features: Vec<f64>,
    pub angles: Vec<f64>,
    pub label: usize,
}

impl EncodedSample {
    pub fn new(features: Vec<f64>, ranges: &[FeatureRange], label: usize) -> Self {
        let angles = features
            .iter()
            .zip(ranges)
            .map(|(&x, r)| r.angle(x))
            .collect();
        EncodedSample {
            features,
            angles,
            label,
        }
    }
}

/// Single-qubit factors of the encoded state. Angle `j` rotates qubit
/// `j mod Q`, about Y on even wrap-around layers and Z on odd ones.
pub fn encoding_factors(angles: &[f64], num_qubits: usize) -> Vec<[Complex64; 2]> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut factors = vec![[one, zero]; num_qubits];
    for (j, &a) in angles.iter().enumerate() {
        let f = &mut factors[j % num_qubits];
        let (s, c) = (a / 2.0).sin_cos();
        *f = if (j / num_qubits).is_multiple_of(2) {
            [c * f[0] - s * f[1], s * f[0] + c * f[1]]
        } else {
            [
                f[0] * Complex64::from_polar(1.0, -a / 2.0),
                f[1] * Complex64::from_polar(1.0, a / 2.0),
            ]
        };
    }
    factors
}

/// Encodes scaled features into a `num_qubits` register starting from `|0…0⟩`.
pub fn encode_features(
    features: &[f64],
    num_qubits: usize,
    ranges: &[FeatureRange],
) -> Result<StateVector, ObjectiveError> {
    if features.is_empty() {
        return Err(ObjectiveError::NoFeatures);
    }
    if features.len() != ranges.len() {
        return Err(ObjectiveError::Length(features.len(), ranges.len()));
    }
    let angles: Vec<f64> = features
        .iter()
        .zip(ranges)
        .map(|(&x, r)| r.angle(x))
        .collect();
    Ok(StateVector::product(&encoding_factors(&angles, num_qubits)))
}
