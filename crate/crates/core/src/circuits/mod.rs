//! Symbolic circuits over a data register followed by an ancilla register.
//!
//! Gates carry either literal angles or references into a [`ParameterSet`];
//! binding happens when a circuit is [`run`](Circuit::run).

mod ansatz;
mod decompose;
mod text;

pub use ansatz::{
    build_likelihood_ansatz, build_prior_ansatz, build_prior_exact, build_qcbm_baseline,
    AnsatzLayout, ControlStyle,
};
pub use decompose::decompose;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{BqcError, Result};
use crate::probability::RegisterSplit;
use crate::statevector::{Control, StateVector, Unitary2};

/// Which parameter vector a slot belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamVector {
    /// Prior-block angles.
    Gamma,
    /// Likelihood-block angles.
    Theta,
}

impl ParamVector {
    pub fn name(self) -> &'static str {
        match self {
            ParamVector::Gamma => "gamma",
            ParamVector::Theta => "theta",
        }
    }
}

impl fmt::Display for ParamVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A symbolic reference `scale · vector[index]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub vector: ParamVector,
    pub index: usize,
    pub scale: f64,
}

impl Slot {
    pub fn new(vector: ParamVector, index: usize) -> Self {
        Self {
            vector,
            index,
            scale: 1.0,
        }
    }

    pub fn gamma(index: usize) -> Self {
        Self::new(ParamVector::Gamma, index)
    }

    pub fn theta(index: usize) -> Self {
        Self::new(ParamVector::Theta, index)
    }
}

/// Rotation angle in radians, literal or symbolic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Fixed(f64),
    Slot(Slot),
}

impl Angle {
    pub fn scaled(self, factor: f64) -> Self {
        match self {
            Angle::Fixed(a) => Angle::Fixed(a * factor),
            Angle::Slot(s) => Angle::Slot(Slot {
                scale: s.scale * factor,
                ..s
            }),
        }
    }

    pub fn resolve(&self, params: &ParameterSet) -> Result<f64> {
        match self {
            Angle::Fixed(a) => Ok(*a),
            Angle::Slot(s) => params
                .vector(s.vector)
                .get(s.index)
                .map(|v| v * s.scale)
                .ok_or_else(|| BqcError::Binding(format!("{}[{}]", s.vector, s.index))),
        }
    }

    pub fn slot(&self) -> Option<Slot> {
        match self {
            Angle::Slot(s) => Some(*s),
            Angle::Fixed(_) => None,
        }
    }
}

impl From<f64> for Angle {
    fn from(a: f64) -> Self {
        Angle::Fixed(a)
    }
}

impl From<Slot> for Angle {
    fn from(s: Slot) -> Self {
        Angle::Slot(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    X,
    Cnot,
    Cry,
    Toffoli,
    MultiCtrlRy,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::X => "X",
            GateKind::Cnot => "CNOT",
            GateKind::Cry => "CRY",
            GateKind::Toffoli => "TOFFOLI",
            GateKind::MultiCtrlRy => "MULTI_CTRL_RY",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "RX" => GateKind::Rx,
            "RY" => GateKind::Ry,
            "RZ" => GateKind::Rz,
            "X" => GateKind::X,
            "CNOT" => GateKind::Cnot,
            "CRY" => GateKind::Cry,
            "TOFFOLI" => GateKind::Toffoli,
            "MULTI_CTRL_RY" => GateKind::MultiCtrlRy,
            _ => return None,
        })
    }

    pub fn is_rotation(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Cry | GateKind::MultiCtrlRy
        )
    }

    fn control_count_ok(self, n: usize) -> bool {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::X => n == 0,
            GateKind::Cnot | GateKind::Cry => n == 1,
            GateKind::Toffoli => n == 2,
            GateKind::MultiCtrlRy => n >= 1,
        }
    }
}

/// One gate application: controls (with required bits), target and an
/// optional rotation angle.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    kind: GateKind,
    controls: Vec<Control>,
    target: usize,
    angle: Option<Angle>,
}

impl GateSpec {
    /// Checked constructor. Only `MULTI_CTRL_RY` may carry controls that
    /// require |0⟩.
    pub fn new(
        kind: GateKind,
        controls: Vec<Control>,
        target: usize,
        angle: Option<Angle>,
    ) -> Result<Self> {
        if !kind.control_count_ok(controls.len()) {
            return Err(BqcError::Validation(format!(
                "{} cannot take {} controls",
                kind.name(),
                controls.len()
            )));
        }
        if kind.is_rotation() != angle.is_some() {
            return Err(BqcError::Validation(format!(
                "{} {} an angle",
                kind.name(),
                if kind.is_rotation() { "requires" } else { "does not take" }
            )));
        }
        if kind != GateKind::MultiCtrlRy && controls.iter().any(|c| !c.on) {
            return Err(BqcError::Validation(format!(
                "{} controls must require |1⟩",
                kind.name()
            )));
        }
        for (i, c) in controls.iter().enumerate() {
            if c.qubit == target || controls[..i].iter().any(|d| d.qubit == c.qubit) {
                return Err(BqcError::Validation(format!(
                    "qubit {} is repeated in {}",
                    c.qubit,
                    kind.name()
                )));
            }
        }
        Ok(Self {
            kind,
            controls,
            target,
            angle,
        })
    }

    pub fn rx(q: usize, angle: impl Into<Angle>) -> Self {
        Self::new(GateKind::Rx, vec![], q, Some(angle.into())).unwrap()
    }

    pub fn ry(q: usize, angle: impl Into<Angle>) -> Self {
        Self::new(GateKind::Ry, vec![], q, Some(angle.into())).unwrap()
    }

    pub fn rz(q: usize, angle: impl Into<Angle>) -> Self {
        Self::new(GateKind::Rz, vec![], q, Some(angle.into())).unwrap()
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, vec![], q, None).unwrap()
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        Self::new(GateKind::Cnot, vec![Control::on(control)], target, None)
    }

    pub fn cry(control: usize, target: usize, angle: impl Into<Angle>) -> Result<Self> {
        Self::new(
            GateKind::Cry,
            vec![Control::on(control)],
            target,
            Some(angle.into()),
        )
    }

    pub fn toffoli(c0: usize, c1: usize, target: usize) -> Result<Self> {
        Self::new(
            GateKind::Toffoli,
            vec![Control::on(c0), Control::on(c1)],
            target,
            None,
        )
    }

    pub fn multi_ctrl_ry(
        controls: Vec<Control>,
        target: usize,
        angle: impl Into<Angle>,
    ) -> Result<Self> {
        Self::new(GateKind::MultiCtrlRy, controls, target, Some(angle.into()))
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn angle(&self) -> Option<Angle> {
        self.angle
    }

    /// Controls followed by the target.
    pub fn qubits(&self) -> Vec<usize> {
        self.controls
            .iter()
            .map(|c| c.qubit)
            .chain(std::iter::once(self.target))
            .collect()
    }

    /// Target-qubit matrix for a resolved angle.
    pub fn matrix(&self, angle: f64) -> Unitary2 {
        match self.kind {
            GateKind::Rx => Unitary2::rx(angle),
            GateKind::Ry | GateKind::Cry | GateKind::MultiCtrlRy => Unitary2::ry(angle),
            GateKind::Rz => Unitary2::rz(angle),
            GateKind::X | GateKind::Cnot | GateKind::Toffoli => Unitary2::x(),
        }
    }

    pub(crate) fn apply(&self, state: &mut StateVector, angle: f64) -> Result<()> {
        state.apply_controlled(&self.matrix(angle), &self.controls, self.target)
    }

    pub(crate) fn resolve_angle(&self, params: &ParameterSet) -> Result<f64> {
        self.angle.map_or(Ok(0.0), |a| a.resolve(params))
    }
}

/// Real-valued parameter vectors for prior (γ) and likelihood (θ) blocks.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParameterSet {
    pub gamma: Vec<f64>,
    pub theta: Vec<f64>,
    #[serde(default)]
    pub gamma_frozen: bool,
    #[serde(default)]
    pub theta_frozen: bool,
}

impl ParameterSet {
    pub fn new(gamma: Vec<f64>, theta: Vec<f64>) -> Self {
        Self {
            gamma,
            theta,
            gamma_frozen: false,
            theta_frozen: false,
        }
    }

    /// Zero vectors sized to the circuit's slot counts.
    pub fn zeros_for(circuit: &Circuit) -> Self {
        let (g, t) = circuit.slot_counts();
        Self::new(vec![0.0; g], vec![0.0; t])
    }

    pub fn vector(&self, which: ParamVector) -> &[f64] {
        match which {
            ParamVector::Gamma => &self.gamma,
            ParamVector::Theta => &self.theta,
        }
    }

    pub fn vector_mut(&mut self, which: ParamVector) -> &mut Vec<f64> {
        match which {
            ParamVector::Gamma => &mut self.gamma,
            ParamVector::Theta => &mut self.theta,
        }
    }

    pub fn is_frozen(&self, which: ParamVector) -> bool {
        match which {
            ParamVector::Gamma => self.gamma_frozen,
            ParamVector::Theta => self.theta_frozen,
        }
    }
}

/// Ordered gate list over `num_data` data qubits (indices `0..n`) and
/// `num_ancilla` ancilla qubits (indices `n..n+m`).
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_data: usize,
    num_ancilla: usize,
    gates: Vec<GateSpec>,
}

impl Circuit {
    pub fn new(num_data: usize, num_ancilla: usize) -> Self {
        Self {
            num_data,
            num_ancilla,
            gates: Vec::new(),
        }
    }

    pub fn num_data(&self) -> usize {
        self.num_data
    }

    pub fn num_ancilla(&self) -> usize {
        self.num_ancilla
    }

    pub fn num_qubits(&self) -> usize {
        self.num_data + self.num_ancilla
    }

    pub fn split(&self) -> RegisterSplit {
        RegisterSplit::new(self.num_data, self.num_ancilla)
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: GateSpec) -> Result<()> {
        let nq = self.num_qubits();
        if let Some(&q) = gate.qubits().iter().find(|&&q| q >= nq) {
            return Err(BqcError::Index {
                index: q,
                num_qubits: nq,
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Appends every gate of `other`, which must have the same register shape.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if (other.num_data, other.num_ancilla) != (self.num_data, self.num_ancilla) {
            return Err(BqcError::Validation(format!(
                "cannot append a {}+{} qubit circuit to a {}+{} qubit circuit",
                other.num_data, other.num_ancilla, self.num_data, self.num_ancilla
            )));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Number of γ and θ entries referenced (highest slot index + 1).
    pub fn slot_counts(&self) -> (usize, usize) {
        let mut counts = (0, 0);
        for s in self.gates.iter().filter_map(|g| g.angle.and_then(|a| a.slot())) {
            let c = match s.vector {
                ParamVector::Gamma => &mut counts.0,
                ParamVector::Theta => &mut counts.1,
            };
            *c = (*c).max(s.index + 1);
        }
        counts
    }

    pub fn slot_count(&self, which: ParamVector) -> usize {
        match which {
            ParamVector::Gamma => self.slot_counts().0,
            ParamVector::Theta => self.slot_counts().1,
        }
    }

    /// Positions of gates whose angle references `vector[index]`, with the
    /// slot scale.
    pub fn occurrences(&self, vector: ParamVector, index: usize) -> Vec<(usize, f64)> {
        self.gates
            .iter()
            .enumerate()
            .filter_map(|(i, g)| {
                g.angle
                    .and_then(|a| a.slot())
                    .filter(|s| s.vector == vector && s.index == index)
                    .map(|s| (i, s.scale))
            })
            .collect()
    }

    /// Resolved angle per gate (0 for non-rotations).
    pub fn resolve_angles(&self, params: &ParameterSet) -> Result<Vec<f64>> {
        self.gates.iter().map(|g| g.resolve_angle(params)).collect()
    }

    /// Simulates the circuit from |0…0⟩.
    pub fn run(&self, params: &ParameterSet) -> Result<StateVector> {
        let mut state = StateVector::zero(self.num_qubits())?;
        self.apply_to(&mut state, params)?;
        Ok(state)
    }

    /// Applies every gate to an existing state of matching width.
    pub fn apply_to(&self, state: &mut StateVector, params: &ParameterSet) -> Result<()> {
        if state.num_qubits() != self.num_qubits() {
            return Err(BqcError::Validation(format!(
                "state has {} qubits, circuit has {}",
                state.num_qubits(),
                self.num_qubits()
            )));
        }
        let angles = self.resolve_angles(params)?;
        self.apply_range(state, &angles, 0..self.gates.len())
    }

    /// Applies gates `range` with pre-resolved angles.
    pub(crate) fn apply_range(
        &self,
        state: &mut StateVector,
        angles: &[f64],
        range: std::ops::Range<usize>,
    ) -> Result<()> {
        for i in range {
            self.gates[i].apply(state, angles[i])?;
        }
        Ok(())
    }

    /// Replaces every symbolic angle by its bound value.
    pub fn bind(&self, params: &ParameterSet) -> Result<Circuit> {
        let gates = self
            .gates
            .iter()
            .map(|g| {
                Ok(GateSpec {
                    angle: match g.angle {
                        Some(a) => Some(Angle::Fixed(a.resolve(params)?)),
                        None => None,
                    },
                    ..g.clone()
                })
            })
            .collect::<Result<_>>()?;
        Ok(Circuit { gates, ..*self })
    }

    /// Replaces every gate by its decomposition into single-qubit gates and
    /// CNOTs.
    pub fn decomposed(&self) -> Result<Circuit> {
        let mut out = Circuit::new(self.num_data, self.num_ancilla);
        for g in &self.gates {
            match g.kind {
                GateKind::Cry | GateKind::Toffoli | GateKind::MultiCtrlRy => {
                    out.gates.extend(decompose(g)?)
                }
                _ => out.gates.push(g.clone()),
            }
        }
        Ok(out)
    }
}
