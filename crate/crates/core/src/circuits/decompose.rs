use std::f64::consts::PI;

use super::{Angle, GateKind, GateSpec};
use crate::error::{BqcError, Result};

/// Rewrites a controlled gate as single-qubit gates and CNOTs.
///
/// * `CRY(θ)` becomes `RY(θ/2) · CNOT · RY(-θ/2) · CNOT` on the target.
/// * `TOFFOLI` becomes the six-CNOT construction with Hadamards written as
///   `RZ(π)` then `RY(π/2)` and T gates as `RZ(±π/4)`. It is exact up to a
///   global phase.
/// * `MULTI_CTRL_RY` peels off its last control: `C_S RY(θ)` equals
///   `C_{S'} RY(θ/2) · CNOT(c, t) · C_{S'} RY(-θ/2) · CNOT(c, t)`, recursing
///   until no controls remain. Controls that require |0⟩ are conjugated
///   with X.
pub fn decompose(gate: &GateSpec) -> Result<Vec<GateSpec>> {
    let t = gate.target();
    match gate.kind() {
        GateKind::Cry => {
            let c = gate.controls()[0].qubit;
            let angle = gate.angle().expect("CRY carries an angle");
            Ok(vec![
                GateSpec::ry(t, angle.scaled(0.5)),
                GateSpec::cnot(c, t)?,
                GateSpec::ry(t, angle.scaled(-0.5)),
                GateSpec::cnot(c, t)?,
            ])
        }
        GateKind::Toffoli => {
            let (a, b) = (gate.controls()[0].qubit, gate.controls()[1].qubit);
            let h = |q| [GateSpec::rz(q, PI), GateSpec::ry(q, PI / 2.0)];
            let tee = |q| GateSpec::rz(q, PI / 4.0);
            let tdg = |q| GateSpec::rz(q, -PI / 4.0);
            let mut out = Vec::with_capacity(17);
            out.extend(h(t));
            out.push(GateSpec::cnot(b, t)?);
            out.push(tdg(t));
            out.push(GateSpec::cnot(a, t)?);
            out.push(tee(t));
            out.push(GateSpec::cnot(b, t)?);
            out.push(tdg(t));
            out.push(GateSpec::cnot(a, t)?);
            out.push(tee(b));
            out.push(tee(t));
            out.extend(h(t));
            out.push(GateSpec::cnot(a, b)?);
            out.push(tee(a));
            out.push(tdg(b));
            out.push(GateSpec::cnot(a, b)?);
            Ok(out)
        }
        GateKind::MultiCtrlRy => {
            let flips: Vec<GateSpec> = gate
                .controls()
                .iter()
                .filter(|c| !c.on)
                .map(|c| GateSpec::x(c.qubit))
                .collect();
            let controls: Vec<usize> = gate.controls().iter().map(|c| c.qubit).collect();
            let mut out = flips.clone();
            controlled_ry(&controls, t, gate.angle().expect("MULTI_CTRL_RY carries an angle"), &mut out)?;
            out.extend(flips);
            Ok(out)
        }
        kind => Err(BqcError::Validation(format!(
            "{} has no decomposition",
            kind.name()
        ))),
    }
}

fn controlled_ry(controls: &[usize], t: usize, angle: Angle, out: &mut Vec<GateSpec>) -> Result<()> {
    match controls.split_last() {
        None => out.push(GateSpec::ry(t, angle)),
        Some((&c, rest)) => {
            controlled_ry(rest, t, angle.scaled(0.5), out)?;
            out.push(GateSpec::cnot(c, t)?);
            controlled_ry(rest, t, angle.scaled(-0.5), out)?;
            out.push(GateSpec::cnot(c, t)?);
        }
    }
    Ok(())
}
