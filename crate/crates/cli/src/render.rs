//! ASCII wire diagrams.

use qcevo::genome::{CircuitGenome, GateSpec};
use qcevo::qsim::{GateKind, Role};

const WIRE: char = '-';
const DISABLED: char = '~';

fn with_params(name: &str, g: &GateSpec) -> String {
    if g.params().is_empty() {
        return name.to_string();
    }
    let p: Vec<String> = g.params().iter().map(|v| format!("{v:.3}")).collect();
    format!("{name}({})", p.join(","))
}

/// Label drawn on each qubit the gate touches.
fn cells(g: &GateSpec) -> Vec<(usize, String)> {
    let kind = g.kind();
    let upper = kind.method().to_uppercase();
    let target = match kind {
        GateKind::Toffoli => "X".to_string(),
        GateKind::Ccz => "Z".to_string(),
        GateKind::Cswap | GateKind::Swap => "x".to_string(),
        GateKind::Identity => "I".to_string(),
        _ if kind.has_control_target() => with_params(&upper[1..], g),
        _ => with_params(&upper, g),
    };
    g.qubits()
        .iter()
        .zip(kind.roles())
        .map(|(&q, role)| {
            let label = if role == Role::Control {
                "*".to_string()
            } else {
                target.clone()
            };
            let label = if g.enabled() {
                label
            } else {
                format!("{DISABLED}{label}{DISABLED}")
            };
            (q, label)
        })
        .collect()
}

fn centered(label: &str, width: usize) -> String {
    let len = label.chars().count();
    let left = (width - len) / 2;
    let right = width - len - left;
    let mut s = String::with_capacity(width);
    s.extend(std::iter::repeat_n(WIRE, left));
    s.push_str(label);
    s.extend(std::iter::repeat_n(WIRE, right));
    s
}

/// One line per qubit, gates left to right in genome order. Input and
/// output qubits are tagged `i` and `o`; disabled gates are drawn `~G~`.
pub fn render(genome: &CircuitGenome) -> String {
    let n = genome.num_qubits();
    let name_width = format!("q{}", n.saturating_sub(1)).len();
    let mut rows: Vec<String> = (0..n)
        .map(|q| {
            let mut tag = String::new();
            if genome.input_qubits().contains(&q) {
                tag.push('i');
            }
            if genome.output_qubits().contains(&q) {
                tag.push('o');
            }
            format!("{:<name_width$} {tag:<2}: {WIRE}", format!("q{q}"))
        })
        .collect();
    for g in genome.gates() {
        let cells = cells(g);
        let width = cells.iter().map(|c| c.1.chars().count()).max().unwrap_or(1);
        let lo = *g.qubits().iter().min().expect("gates touch a qubit");
        let hi = *g.qubits().iter().max().expect("gates touch a qubit");
        for (q, row) in rows.iter_mut().enumerate() {
            let cell = match cells.iter().find(|c| c.0 == q) {
                Some((_, label)) => centered(label, width),
                None if q > lo && q < hi => centered(if g.enabled() { "|" } else { ":" }, width),
                None => centered("", width),
            };
            row.push_str(&cell);
            row.push(WIRE);
        }
    }
    let mut out = rows.join("\n");
    out.push('\n');
    if genome.gates().iter().any(|g| !g.enabled()) {
        out.push_str("(~G~: disabled)\n");
    }
    out
}
