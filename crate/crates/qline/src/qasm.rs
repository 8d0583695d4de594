// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Text serialization for circuits, a small QASM-flavoured dialect.
//!
//! Grammar, one statement per line (the parser also tolerates several
//! `;`-separated statements on a line):
//!
//! ```text
//! qreg q[N];                      // required, before any gate
//! creg c[M];                      // optional
//! h|x|y|z q[i];
//! rx|ry|rz(FLOAT) q[i];
//! cx|cz|swap|epr q[i],q[j];
//! cp|rzz(FLOAT) q[i],q[j];
//! measure q[i] -> c[k];
//! if(c[k]==1) x|z q[i];           // classically conditioned correction
//! ```
//!
//! `//` starts a comment. The emitter writes a `// name: <label>` pragma so
//! the circuit name survives a round trip.

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

/// Parse the dialect above. Errors carry a 1-based source line number.
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut st = ParseState::default();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut line = raw_line;
        if let Some(pos) = line.find("//") {
            let comment = line[pos + 2..].trim();
            if let Some(label) = comment.strip_prefix("name:") {
                st.name = label.trim().to_string();
            }
            line = &line[..pos];
        }
        for stmt in line.split(';') {
            let stmt = stmt.trim();
            if stmt.is_empty() {
                continue;
            }
            parse_statement(stmt, line_no, &mut st)?;
        }
    }

    let num_qubits = st.num_qubits.ok_or_else(|| Error::Parse {
        line: text.lines().count().max(1),
        msg: "missing qreg declaration".into(),
    })?;
    // An explicit creg is authoritative; otherwise size the register to fit
    // the classical bits actually referenced.
    let num_cbits = st.declared_cbits.unwrap_or(st.inferred_cbits);
    let mut circuit = Circuit::new(st.name, num_qubits, num_cbits);
    for (line_no, gate) in st.pending {
        circuit
            .push(gate)
            .map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
    }
    Ok(circuit)
}

#[derive(Default)]
struct ParseState {
    name: String,
    num_qubits: Option<usize>,
    declared_cbits: Option<usize>,
    inferred_cbits: usize,
    pending: Vec<(usize, Gate)>,
}

fn parse_statement(stmt: &str, line: usize, st: &mut ParseState) -> Result<()> {
    let err = |msg: String| Error::Parse { line, msg };

    if let Some(rest) = stmt.strip_prefix("qreg") {
        if st.num_qubits.is_some() {
            return Err(err("duplicate qreg declaration".into()));
        }
        let n = parse_ref(rest.trim(), 'q').map_err(|m| err(m))?;
        st.num_qubits = Some(n);
        return Ok(());
    }
    if let Some(rest) = stmt.strip_prefix("creg") {
        let m = parse_ref(rest.trim(), 'c').map_err(|m| err(m))?;
        st.declared_cbits = Some(m);
        return Ok(());
    }
    if st.num_qubits.is_none() {
        return Err(err(format!("statement before qreg declaration: '{stmt}'")));
    }

    if let Some(rest) = stmt.strip_prefix("measure") {
        let (qs, cs) = rest
            .split_once("->")
            .ok_or_else(|| err("measure expects 'q[i] -> c[k]'".into()))?;
        let q = parse_ref(qs.trim(), 'q').map_err(|m| err(m))?;
        let c = parse_ref(cs.trim(), 'c').map_err(|m| err(m))?;
        st.inferred_cbits = st.inferred_cbits.max(c + 1);
        st.pending.push((line, Gate::measure(q, c)));
        return Ok(());
    }
    if let Some(rest) = stmt.strip_prefix("if") {
        let rest = rest.trim_start();
        let rest = rest
            .strip_prefix('(')
            .ok_or_else(|| err("if expects '(c[k]==1)'".into()))?;
        let (cond, body) = rest
            .split_once(')')
            .ok_or_else(|| err("unterminated if condition".into()))?;
        let cond = cond.trim();
        let cref = cond
            .strip_suffix("==1")
            .ok_or_else(|| err("only '==1' conditions are supported".into()))?;
        let c = parse_ref(cref.trim(), 'c').map_err(|m| err(m))?;
        let body = body.trim();
        let (g, qs) = body
            .split_once(char::is_whitespace)
            .ok_or_else(|| err("if body expects 'x q[i]' or 'z q[i]'".into()))?;
        let q = parse_ref(qs.trim(), 'q').map_err(|m| err(m))?;
        let gate = match g.trim() {
            "x" => Gate::corr_x(q, c),
            "z" => Gate::corr_z(q, c),
            other => return Err(err(format!("unsupported conditioned gate '{other}'"))),
        };
        st.inferred_cbits = st.inferred_cbits.max(c + 1);
        st.pending.push((line, gate));
        return Ok(());
    }

    // Plain gate: NAME or NAME(FLOAT), then operand list.
    let name_end = stmt
        .find(|ch: char| ch == '(' || ch.is_whitespace())
        .ok_or_else(|| err(format!("malformed statement '{stmt}'")))?;
    let gate_name = &stmt[..name_end];
    let mut rest = stmt[name_end..].trim_start();
    let mut param: Option<f64> = None;
    if rest.starts_with('(') {
        let close = rest
            .find(')')
            .ok_or_else(|| err("unterminated angle parameter".into()))?;
        let val: f64 = rest[1..close]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad angle '{}'", &rest[1..close])))?;
        if !val.is_finite() {
            return Err(err(format!("non-finite angle '{val}'")));
        }
        param = Some(val);
        rest = &rest[close + 1..];
    }
    let operands: Vec<usize> = rest
        .split(',')
        .map(|s| parse_ref(s.trim(), 'q'))
        .collect::<std::result::Result<_, _>>()
        .map_err(|m| err(m))?;

    let kind = match gate_name {
        "h" => GateKind::H,
        "x" => GateKind::X,
        "y" => GateKind::Y,
        "z" => GateKind::Z,
        "rx" => GateKind::Rx,
        "ry" => GateKind::Ry,
        "rz" => GateKind::Rz,
        "cx" => GateKind::Cx,
        "cz" => GateKind::Cz,
        "cp" => GateKind::Cp,
        "rzz" => GateKind::Rzz,
        "swap" => GateKind::Swap,
        "epr" => GateKind::EprPrep,
        other => return Err(err(format!("unknown gate name '{other}'"))),
    };
    if kind.has_param() != param.is_some() {
        return Err(err(format!(
            "gate '{gate_name}' {} an angle parameter",
            if kind.has_param() { "requires" } else { "does not take" }
        )));
    }
    if operands.len() != kind.arity() {
        return Err(err(format!(
            "gate '{gate_name}' expects {} operand(s), got {}",
            kind.arity(),
            operands.len()
        )));
    }
    let parsed = match kind.arity() {
        1 => {
            let mut g = match kind {
                GateKind::H => Gate::h(operands[0]),
                GateKind::X => Gate::x(operands[0]),
                GateKind::Y => Gate::y(operands[0]),
                GateKind::Z => Gate::z(operands[0]),
                GateKind::Rx => Gate::rx(0.0, operands[0]),
                GateKind::Ry => Gate::ry(0.0, operands[0]),
                GateKind::Rz => Gate::rz(0.0, operands[0]),
                _ => unreachable!(),
            };
            g.param = param;
            g
        }
        _ => {
            let (a, b) = (operands[0], operands[1]);
            match kind {
                GateKind::Cx => Gate::cx(a, b),
                GateKind::Cz => Gate::cz(a, b),
                GateKind::Cp => Gate::cp(param.unwrap(), a, b),
                GateKind::Rzz => Gate::rzz(param.unwrap(), a, b),
                GateKind::Swap => Gate::swap(a, b),
                GateKind::EprPrep => Gate::epr_prep(a, b),
                _ => unreachable!(),
            }
        }
    };
    st.pending.push((line, parsed));
    Ok(())
}

/// Parse a register reference like `q[3]`, returning the index.
fn parse_ref(s: &str, reg: char) -> std::result::Result<usize, String> {
    let inner = s
        .strip_prefix(reg)
        .and_then(|r| r.trim_start().strip_prefix('['))
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("expected '{reg}[INDEX]', got '{s}'"))?;
    inner
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("bad index '{inner}' in '{s}'"))
}

/// Serialize a circuit in the dialect parsed by [`parse_qasm`].
///
/// Angles use Rust's shortest round-trip float formatting, so re-parsing
/// reproduces the exact bit pattern.
pub fn emit_qasm(circuit: &Circuit) -> String {
    let mut out = String::new();
    if !circuit.name.is_empty() {
        out.push_str(&format!("// name: {}\n", circuit.name));
    }
    out.push_str(&format!("qreg q[{}];\n", circuit.num_qubits));
    if circuit.num_cbits > 0 {
        out.push_str(&format!("creg c[{}];\n", circuit.num_cbits));
    }
    for g in &circuit.gates {
        let stmt = match g.kind {
            GateKind::H => format!("h q[{}];", g.q0()),
            GateKind::X => format!("x q[{}];", g.q0()),
            GateKind::Y => format!("y q[{}];", g.q0()),
            GateKind::Z => format!("z q[{}];", g.q0()),
            GateKind::Rx => format!("rx({}) q[{}];", g.param.unwrap(), g.q0()),
            GateKind::Ry => format!("ry({}) q[{}];", g.param.unwrap(), g.q0()),
            GateKind::Rz => format!("rz({}) q[{}];", g.param.unwrap(), g.q0()),
            GateKind::Cx => format!("cx q[{}],q[{}];", g.q0(), g.q1()),
            GateKind::Cz => format!("cz q[{}],q[{}];", g.q0(), g.q1()),
            GateKind::Cp => format!("cp({}) q[{}],q[{}];", g.param.unwrap(), g.q0(), g.q1()),
            GateKind::Rzz => format!("rzz({}) q[{}],q[{}];", g.param.unwrap(), g.q0(), g.q1()),
            GateKind::Swap => format!("swap q[{}],q[{}];", g.q0(), g.q1()),
            GateKind::EprPrep => format!("epr q[{}],q[{}];", g.q0(), g.q1()),
            GateKind::Measure => format!("measure q[{}] -> c[{}];", g.q0(), g.cbit.unwrap()),
            GateKind::CorrX => format!("if(c[{}]==1) x q[{}];", g.cbit.unwrap(), g.q0()),
            GateKind::CorrZ => format!("if(c[{}]==1) z q[{}];", g.cbit.unwrap(), g.q0()),
        };
        out.push_str(&stmt);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_program() {
        let c = parse_qasm("qreg q[1];").unwrap();
        assert_eq!(c.num_qubits, 1);
        assert!(c.gates.is_empty());
    }

    #[test]
    fn bell_pair() {
        let c = parse_qasm("qreg q[2]; h q[0]; cx q[0],q[1];").unwrap();
        assert_eq!(c.gates, vec![Gate::h(0), Gate::cx(0, 1)]);
    }

    #[test]
    fn index_out_of_range() {
        let e = parse_qasm("qreg q[2];\ncx q[0],q[5];").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("qubit 5"), "{msg}");
    }

    #[test]
    fn unknown_gate() {
        let e = parse_qasm("qreg q[2];\ntoffoli q[0],q[1];").unwrap_err();
        assert!(e.to_string().contains("unknown gate name"), "{e}");
    }

    #[test]
    fn emits_single_h() {
        let mut c = Circuit::new("", 1, 0);
        c.push(Gate::h(0)).unwrap();
        let text = emit_qasm(&c);
        assert_eq!(text.matches("h q[0];").count(), 1);
    }

    #[test]
    fn round_trip_mixed() {
        let mut c = Circuit::new("mixed", 3, 2);
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::rx(0.5, 1)).unwrap();
        c.push(Gate::cp(std::f64::consts::FRAC_PI_4, 0, 2)).unwrap();
        c.push(Gate::rzz(-1.25, 1, 2)).unwrap();
        c.push(Gate::swap(0, 1)).unwrap();
        c.push(Gate::epr_prep(1, 2)).unwrap();
        c.push(Gate::measure(1, 0)).unwrap();
        c.push(Gate::corr_x(2, 0)).unwrap();
        c.push(Gate::corr_z(0, 1)).unwrap();
        let back = parse_qasm(&emit_qasm(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn angle_keeps_twelve_significant_digits() {
        let mut c = Circuit::new("", 2, 0);
        c.push(Gate::cp(std::f64::consts::FRAC_PI_4, 0, 1)).unwrap();
        let text = emit_qasm(&c);
        let digits: String = text
            .split('(')
            .nth(1)
            .unwrap()
            .split(')')
            .next()
            .unwrap()
            .chars()
            .filter(|ch| ch.is_ascii_digit())
            .collect();
        assert!(digits.len() >= 12, "angle printed as too few digits: {text}");
        let back = parse_qasm(&text).unwrap();
        assert_eq!(back.gates[0].param, Some(std::f64::consts::FRAC_PI_4));
    }

    #[test]
    fn conditioned_corrections_grow_creg() {
        let c = parse_qasm("qreg q[1];\nif(c[3]==1) z q[0];").unwrap();
        assert_eq!(c.num_cbits, 4);
        let c = parse_qasm("qreg q[1];\nmeasure q[0] -> c[2];").unwrap();
        assert_eq!(c.num_cbits, 3);
    }

    #[test]
    fn declared_creg_is_authoritative() {
        let e = parse_qasm("qreg q[1];\ncreg c[1];\nmeasure q[0] -> c[2];").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn missing_qreg() {
        assert!(parse_qasm("h q[0];").is_err());
        assert!(parse_qasm("").is_err());
    }
}
