//! Line-oriented circuit text format.
//!
//! ```text
//! # circuit data=2 ancilla=1
//! RY 2 slot:gamma[0]
//! MULTI_CTRL_RY !2,0 slot:theta[0]
//! CRY 2,1 slot:theta[1]*0.5
//! RZ 0 0.7853981633974483
//! CNOT 0,1
//! ```
//!
//! Qubits are listed controls first, target last. A `!` prefix marks a
//! control that requires |0⟩. Literal angles are printed in shortest
//! round-trip form, so parsing the printed text reproduces the circuit
//! exactly.

use std::fmt;
use std::str::FromStr;

use super::{Angle, Circuit, GateKind, GateSpec, ParamVector, Slot};
use crate::error::{BqcError, Result};
use crate::statevector::Control;

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Fixed(a) => write!(f, "{a:?}"),
            Angle::Slot(s) if s.scale == 1.0 => write!(f, "slot:{}[{}]", s.vector, s.index),
            Angle::Slot(s) => write!(f, "slot:{}[{}]*{:?}", s.vector, s.index, s.scale),
        }
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.kind.name())?;
        for c in &self.controls {
            write!(f, "{}{},", if c.on { "" } else { "!" }, c.qubit)?;
        }
        write!(f, "{}", self.target)?;
        if let Some(a) = self.angle {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# circuit data={} ancilla={}", self.num_data, self.num_ancilla)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

fn parse_angle(tok: &str) -> std::result::Result<Angle, String> {
    let Some(rest) = tok.strip_prefix("slot:") else {
        return tok
            .parse::<f64>()
            .map(Angle::Fixed)
            .map_err(|_| format!("bad angle `{tok}`"));
    };
    let (slot, scale) = match rest.split_once('*') {
        Some((s, k)) => (s, k.parse::<f64>().map_err(|_| format!("bad slot scale `{k}`"))?),
        None => (rest, 1.0),
    };
    let (name, idx) = slot
        .strip_suffix(']')
        .and_then(|s| s.split_once('['))
        .ok_or_else(|| format!("bad slot `{slot}`"))?;
    let vector = match name {
        "gamma" => ParamVector::Gamma,
        "theta" => ParamVector::Theta,
        other => return Err(format!("unknown parameter vector `{other}`")),
    };
    let index = idx.parse().map_err(|_| format!("bad slot index `{idx}`"))?;
    Ok(Angle::Slot(Slot {
        vector,
        index,
        scale,
    }))
}

fn parse_gate(line: &str) -> std::result::Result<GateSpec, String> {
    let mut toks = line.split_whitespace();
    let kind_tok = toks.next().ok_or("empty gate line")?;
    let kind = GateKind::from_name(kind_tok).ok_or_else(|| format!("unknown gate `{kind_tok}`"))?;
    let qubit_tok = toks.next().ok_or("missing qubit list")?;
    let mut qubits = Vec::new();
    for q in qubit_tok.split(',') {
        let (on, digits) = match q.strip_prefix('!') {
            Some(d) => (false, d),
            None => (true, q),
        };
        let qubit = digits.parse().map_err(|_| format!("bad qubit `{q}`"))?;
        qubits.push(Control { qubit, on });
    }
    let target = qubits.pop().expect("split yields at least one item");
    if !target.on {
        return Err("target qubit cannot be negated".into());
    }
    let angle = toks.next().map(parse_angle).transpose()?;
    if let Some(extra) = toks.next() {
        return Err(format!("unexpected token `{extra}`"));
    }
    GateSpec::new(kind, qubits, target.qubit, angle).map_err(|e| e.to_string())
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let rest = line.strip_prefix("# circuit")?;
    let mut data = None;
    let mut ancilla = None;
    for kv in rest.split_whitespace() {
        match kv.split_once('=')? {
            ("data", v) => data = v.parse().ok(),
            ("ancilla", v) => ancilla = v.parse().ok(),
            _ => return None,
        }
    }
    Some((data?, ancilla?))
}

impl FromStr for Circuit {
    type Err = BqcError;

    fn from_str(text: &str) -> Result<Self> {
        let mut circuit: Option<Circuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |message: String| BqcError::Parse {
                line: i + 1,
                message,
            };
            if line.is_empty() {
                continue;
            }
            if line.starts_with('#') {
                if circuit.is_none() {
                    let (n, m) = parse_header(line)
                        .ok_or_else(|| err("expected `# circuit data=N ancilla=M`".into()))?;
                    circuit = Some(Circuit::new(n, m));
                }
                continue;
            }
            let c = circuit
                .as_mut()
                .ok_or_else(|| err("gate before circuit header".into()))?;
            let gate = parse_gate(line).map_err(err)?;
            c.push(gate).map_err(|e| err(e.to_string()))?;
        }
        circuit.ok_or(BqcError::Parse {
            line: 0,
            message: "missing circuit header".into(),
        })
    }
}
