//! The gate vocabulary and its unitary matrices.
//!
//! Matrices are written in textbook order: the first qubit slot of a gate is
//! the most significant bit of the gate-local basis index. The mapping onto
//! the little-endian register happens in [`super::state`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::Matrix;
use super::QsimError;

/// How a qubit slot participates in information flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    /// Control qubit: receives influence from the inputs side.
    Control,
    /// Target qubit: passes influence on towards the outputs.
    Target,
    /// Both at once (single-qubit gates and symmetric two-qubit gates).
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Toffoli,
    Ccz,
    Ch,
    CPhase,
    Crx,
    Cry,
    Crz,
    Cswap,
    Cx,
    Cy,
    Cz,
    H,
    Identity,
    ISwap,
    Phase,
    Rx,
    Ry,
    Rz,
    Rzz,
    S,
    Swap,
    T,
    U,
    X,
    Y,
    Z,
}

use Role::{Control, Dual, Target};

const SINGLE: &[(&str, Role)] = &[("qubit", Dual)];
const CONTROLLED: &[(&str, Role)] = &[("control_qubit", Control), ("target_qubit", Target)];
const DOUBLY_CONTROLLED: &[(&str, Role)] = &[
    ("control_qubit1", Control),
    ("control_qubit2", Control),
    ("target_qubit", Target),
];
const CONTROLLED_SWAP: &[(&str, Role)] = &[
    ("control_qubit", Control),
    ("target_qubit1", Target),
    ("target_qubit2", Target),
];
const SYMMETRIC_PAIR: &[(&str, Role)] = &[("qubit1", Dual), ("qubit2", Dual)];

impl GateKind {
    pub const ALL: [GateKind; 26] = [
        GateKind::Toffoli,
        GateKind::Ccz,
        GateKind::Ch,
        GateKind::CPhase,
        GateKind::Crx,
        GateKind::Cry,
        GateKind::Crz,
        GateKind::Cswap,
        GateKind::Cx,
        GateKind::Cy,
        GateKind::Cz,
        GateKind::H,
        GateKind::Identity,
        GateKind::ISwap,
        GateKind::Phase,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Rzz,
        GateKind::S,
        GateKind::Swap,
        GateKind::T,
        GateKind::U,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
    ];

    /// Short method name, used in genome files.
    pub fn method(self) -> &'static str {
        match self {
            GateKind::Toffoli => "ccx",
            GateKind::Ccz => "ccz",
            GateKind::Ch => "ch",
            GateKind::CPhase => "cp",
            GateKind::Crx => "crx",
            GateKind::Cry => "cry",
            GateKind::Crz => "crz",
            GateKind::Cswap => "cswap",
            GateKind::Cx => "cx",
            GateKind::Cy => "cy",
            GateKind::Cz => "cz",
            GateKind::H => "h",
            GateKind::Identity => "id",
            GateKind::ISwap => "iswap",
            GateKind::Phase => "p",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Rzz => "rzz",
            GateKind::S => "s",
            GateKind::Swap => "swap",
            GateKind::T => "t",
            GateKind::U => "u",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
        }
    }

    /// Qubit slots in matrix order, with their flow roles.
    pub fn slots(self) -> &'static [(&'static str, Role)] {
        match self {
            GateKind::Toffoli | GateKind::Ccz => DOUBLY_CONTROLLED,
            GateKind::Cswap => CONTROLLED_SWAP,
            GateKind::Ch
            | GateKind::CPhase
            | GateKind::Crx
            | GateKind::Cry
            | GateKind::Crz
            | GateKind::Cx
            | GateKind::Cy
            | GateKind::Cz => CONTROLLED,
            GateKind::ISwap | GateKind::Rzz | GateKind::Swap => SYMMETRIC_PAIR,
            _ => SINGLE,
        }
    }

    pub fn slot_names(self) -> impl Iterator<Item = &'static str> {
        self.slots().iter().map(|(name, _)| *name)
    }

    pub fn roles(self) -> impl Iterator<Item = Role> {
        self.slots().iter().map(|(_, role)| *role)
    }

    pub fn arity(self) -> usize {
        self.slots().len()
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            GateKind::CPhase
            | GateKind::Crx
            | GateKind::Cry
            | GateKind::Crz
            | GateKind::Phase
            | GateKind::Rx
            | GateKind::Ry
            | GateKind::Rz => &["phi"],
            GateKind::Rzz => &["theta"],
            GateKind::U => &["theta", "phi", "delta"],
            _ => &[],
        }
    }

    pub fn num_params(self) -> usize {
        self.param_names().len()
    }

    pub fn is_parameterized(self) -> bool {
        self.num_params() > 0
    }

    /// True for kinds with separate control and target slots.
    pub fn has_control_target(self) -> bool {
        self.roles().any(|r| r == Control)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.method())
    }
}

impl FromStr for GateKind {
    type Err = QsimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.method() == s)
            .ok_or_else(|| QsimError::UnknownGate(s.to_string()))
    }
}

impl Serialize for GateKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.method())
    }
}

impl<'de> Deserialize<'de> for GateKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cis(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

fn check_params(kind: GateKind, params: &[f64]) -> Result<(), QsimError> {
    if params.len() != kind.num_params() {
        return Err(QsimError::ParamArity {
            kind,
            expected: kind.num_params(),
            got: params.len(),
        });
    }
    Ok(())
}

/// Wraps a single-qubit block as the target of `controls` control qubits.
fn controlled(block: &Matrix, controls: usize) -> Matrix {
    let dim = block.dim() << controls;
    let offset = dim - block.dim();
    let mut m = Matrix::identity(dim);
    for r in 0..block.dim() {
        for col in 0..block.dim() {
            m[(offset + r, offset + col)] = block[(r, col)];
        }
    }
    m
}

fn zero_block_except_controlled(block: &Matrix, controls: usize) -> Matrix {
    let dim = block.dim() << controls;
    let offset = dim - block.dim();
    let mut m = Matrix::zeros(dim);
    for r in 0..block.dim() {
        for col in 0..block.dim() {
            m[(offset + r, offset + col)] = block[(r, col)];
        }
    }
    m
}

fn rx(phi: f64) -> Matrix {
    let (s, co) = (phi / 2.0).sin_cos();
    Matrix::from_rows(&[[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
}

fn ry(phi: f64) -> Matrix {
    let (s, co) = (phi / 2.0).sin_cos();
    Matrix::from_rows(&[[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
}

fn rz(phi: f64) -> Matrix {
    Matrix::diagonal(&[cis(-phi / 2.0), cis(phi / 2.0)])
}

fn u3(theta: f64, phi: f64, delta: f64) -> Matrix {
    let (s, co) = (theta / 2.0).sin_cos();
    Matrix::from_rows(&[
        [c(co, 0.0), -cis(delta) * s],
        [cis(phi) * s, cis(phi + delta) * co],
    ])
}

fn pauli_x() -> Matrix {
    Matrix::from_rows(&[[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
}

fn pauli_y() -> Matrix {
    Matrix::from_rows(&[[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
}

fn pauli_z() -> Matrix {
    Matrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)])
}

fn hadamard() -> Matrix {
    let h = FRAC_1_SQRT_2;
    Matrix::from_rows(&[[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]])
}

fn swap_matrix() -> Matrix {
    let mut m = Matrix::zeros(4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 2)] = c(1.0, 0.0);
    m[(2, 1)] = c(1.0, 0.0);
    m[(3, 3)] = c(1.0, 0.0);
    m
}

/// Unitary matrix of `kind` at the given parameters.
pub fn gate_unitary(kind: GateKind, params: &[f64]) -> Result<Matrix, QsimError> {
    check_params(kind, params)?;
    let one = c(1.0, 0.0);
    let m = match kind {
        GateKind::Toffoli => controlled(&pauli_x(), 2),
        GateKind::Ccz => controlled(&pauli_z(), 2),
        GateKind::Ch => controlled(&hadamard(), 1),
        GateKind::CPhase => Matrix::diagonal(&[one, one, one, cis(params[0])]),
        GateKind::Crx => controlled(&rx(params[0]), 1),
        GateKind::Cry => controlled(&ry(params[0]), 1),
        GateKind::Crz => controlled(&rz(params[0]), 1),
        GateKind::Cswap => controlled(&swap_matrix(), 1),
        GateKind::Cx => controlled(&pauli_x(), 1),
        GateKind::Cy => controlled(&pauli_y(), 1),
        GateKind::Cz => controlled(&pauli_z(), 1),
        GateKind::H => hadamard(),
        GateKind::Identity => Matrix::identity(2),
        GateKind::ISwap => {
            let mut m = Matrix::zeros(4);
            m[(0, 0)] = one;
            m[(1, 2)] = c(0.0, 1.0);
            m[(2, 1)] = c(0.0, 1.0);
            m[(3, 3)] = one;
            m
        }
        GateKind::Phase => Matrix::diagonal(&[one, cis(params[0])]),
        GateKind::Rx => rx(params[0]),
        GateKind::Ry => ry(params[0]),
        GateKind::Rz => rz(params[0]),
        GateKind::Rzz => {
            let a = cis(-params[0] / 2.0);
            let b = cis(params[0] / 2.0);
            Matrix::diagonal(&[a, b, b, a])
        }
        GateKind::S => Matrix::diagonal(&[one, c(0.0, 1.0)]),
        GateKind::Swap => swap_matrix(),
        GateKind::T => Matrix::diagonal(&[one, cis(std::f64::consts::FRAC_PI_4)]),
        GateKind::U => u3(params[0], params[1], params[2]),
        GateKind::X => pauli_x(),
        GateKind::Y => pauli_y(),
        GateKind::Z => pauli_z(),
    };
    Ok(m)
}

/// Partial derivative of [`gate_unitary`] with respect to parameter `which`.
pub fn gate_unitary_derivative(
    kind: GateKind,
    params: &[f64],
    which: usize,
) -> Result<Matrix, QsimError> {
    check_params(kind, params)?;
    if which >= params.len() {
        return Err(QsimError::ParamArity {
            kind,
            expected: kind.num_params(),
            got: which + 1,
        });
    }
    let zero = c(0.0, 0.0);
    let m = match kind {
        GateKind::CPhase => Matrix::diagonal(&[zero, zero, zero, c(0.0, 1.0) * cis(params[0])]),
        GateKind::Crx => zero_block_except_controlled(&drx(params[0]), 1),
        GateKind::Cry => zero_block_except_controlled(&dry(params[0]), 1),
        GateKind::Crz => zero_block_except_controlled(&drz(params[0]), 1),
        GateKind::Phase => Matrix::diagonal(&[zero, c(0.0, 1.0) * cis(params[0])]),
        GateKind::Rx => drx(params[0]),
        GateKind::Ry => dry(params[0]),
        GateKind::Rz => drz(params[0]),
        GateKind::Rzz => {
            let a = c(0.0, -0.5) * cis(-params[0] / 2.0);
            let b = c(0.0, 0.5) * cis(params[0] / 2.0);
            Matrix::diagonal(&[a, b, b, a])
        }
        GateKind::U => du3(params[0], params[1], params[2], which),
        _ => unreachable!("non-parameterized kinds are rejected by check_params"),
    };
    Ok(m)
}

fn drx(phi: f64) -> Matrix {
    let (s, co) = (phi / 2.0).sin_cos();
    Matrix::from_rows(&[
        [c(-s / 2.0, 0.0), c(0.0, -co / 2.0)],
        [c(0.0, -co / 2.0), c(-s / 2.0, 0.0)],
    ])
}

fn dry(phi: f64) -> Matrix {
    let (s, co) = (phi / 2.0).sin_cos();
    Matrix::from_rows(&[
        [c(-s / 2.0, 0.0), c(-co / 2.0, 0.0)],
        [c(co / 2.0, 0.0), c(-s / 2.0, 0.0)],
    ])
}

fn drz(phi: f64) -> Matrix {
    Matrix::diagonal(&[c(0.0, -0.5) * cis(-phi / 2.0), c(0.0, 0.5) * cis(phi / 2.0)])
}

fn du3(theta: f64, phi: f64, delta: f64, which: usize) -> Matrix {
    let (s, co) = (theta / 2.0).sin_cos();
    let i = c(0.0, 1.0);
    match which {
        0 => Matrix::from_rows(&[
            [c(-s / 2.0, 0.0), -cis(delta) * (co / 2.0)],
            [cis(phi) * (co / 2.0), cis(phi + delta) * (-s / 2.0)],
        ]),
        1 => Matrix::from_rows(&[
            [c(0.0, 0.0), c(0.0, 0.0)],
            [i * cis(phi) * s, i * cis(phi + delta) * co],
        ]),
        _ => Matrix::from_rows(&[
            [c(0.0, 0.0), -i * cis(delta) * s],
            [c(0.0, 0.0), i * cis(phi + delta) * co],
        ]),
    }
}

/// Whether the two-term shift rule `(f(x+π/2) - f(x-π/2)) / 2` is exact for
/// parameter `which` of `kind`.
///
/// Holds when the parameter enters through a single generator with two
/// eigenvalues one apart (Pauli rotations, phase gates, each angle of U).
/// Controlled rotations have three distinct eigenvalues and do not qualify.
pub fn supports_two_term_shift(kind: GateKind, which: usize) -> bool {
    match kind {
        GateKind::Rx
        | GateKind::Ry
        | GateKind::Rz
        | GateKind::Rzz
        | GateKind::Phase
        | GateKind::CPhase => which == 0,
        GateKind::U => which < 3,
        _ => false,
    }
}
