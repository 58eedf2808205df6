//! Circuit data model.
//!
//! A [`Circuit`] is an ordered list of [`Instruction`]s over a fixed number of
//! quantum and classical wires. Each quantum wire either carries a preparation
//! directive or is an input of the circuit, and ends either as an output or
//! discarded. Classical wires are single-assignment bits.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Index of a quantum wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Qubit(pub usize);

/// Index of a classical wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cbit(pub usize);

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

impl fmt::Display for Cbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// A reference to either kind of wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WireRef {
    Quantum(Qubit),
    Classical(Cbit),
}

impl fmt::Display for WireRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WireRef::Quantum(q) => q.fmt(f),
            WireRef::Classical(c) => c.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gate1Kind {
    H,
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gate2Kind {
    Cnot,
    Cz,
}

/// Gate applied by a classically controlled instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CtrlKind {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Instruction {
    Gate1 { kind: Gate1Kind, target: Qubit },
    Gate2 { kind: Gate2Kind, control: Qubit, target: Qubit },
    Measure { target: Qubit, result: Cbit },
    ClassicalCtrl { kind: CtrlKind, control: Cbit, target: Qubit },
    ClassicalXor { a: Cbit, b: Cbit, out: Cbit },
}

impl Instruction {
    pub fn h(q: usize) -> Self {
        Instruction::Gate1 { kind: Gate1Kind::H, target: Qubit(q) }
    }

    pub fn x(q: usize) -> Self {
        Instruction::Gate1 { kind: Gate1Kind::X, target: Qubit(q) }
    }

    pub fn z(q: usize) -> Self {
        Instruction::Gate1 { kind: Gate1Kind::Z, target: Qubit(q) }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Instruction::Gate2 { kind: Gate2Kind::Cnot, control: Qubit(control), target: Qubit(target) }
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Instruction::Gate2 { kind: Gate2Kind::Cz, control: Qubit(control), target: Qubit(target) }
    }

    pub fn measure(target: usize, result: usize) -> Self {
        Instruction::Measure { target: Qubit(target), result: Cbit(result) }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Instruction::ClassicalCtrl { kind: CtrlKind::X, control: Cbit(control), target: Qubit(target) }
    }

    pub fn czc(control: usize, target: usize) -> Self {
        Instruction::ClassicalCtrl { kind: CtrlKind::Z, control: Cbit(control), target: Qubit(target) }
    }

    pub fn xor(a: usize, b: usize, out: usize) -> Self {
        Instruction::ClassicalXor { a: Cbit(a), b: Cbit(b), out: Cbit(out) }
    }

    /// Quantum wires touched, in operand order.
    pub fn qubits(&self) -> Vec<Qubit> {
        match *self {
            Instruction::Gate1 { target, .. } => vec![target],
            Instruction::Gate2 { control, target, .. } => vec![control, target],
            Instruction::Measure { target, .. } => vec![target],
            Instruction::ClassicalCtrl { target, .. } => vec![target],
            Instruction::ClassicalXor { .. } => vec![],
        }
    }

    /// Classical wires touched, in operand order.
    pub fn cbits(&self) -> Vec<Cbit> {
        match *self {
            Instruction::Measure { result, .. } => vec![result],
            Instruction::ClassicalCtrl { control, .. } => vec![control],
            Instruction::ClassicalXor { a, b, out } => vec![a, b, out],
            _ => vec![],
        }
    }

    /// Every wire the instruction reads or writes.
    pub fn support(&self) -> Vec<WireRef> {
        let mut wires: Vec<WireRef> = self.qubits().into_iter().map(WireRef::Quantum).collect();
        wires.extend(self.cbits().into_iter().map(WireRef::Classical));
        wires
    }

    pub fn touches_qubit(&self, q: Qubit) -> bool {
        self.qubits().contains(&q)
    }

    pub fn touches_cbit(&self, c: Cbit) -> bool {
        self.cbits().contains(&c)
    }

    /// The classical wire written by this instruction, if any.
    pub fn assigned_cbit(&self) -> Option<Cbit> {
        match *self {
            Instruction::Measure { result, .. } => Some(result),
            Instruction::ClassicalXor { out, .. } => Some(out),
            _ => None,
        }
    }

    /// Classical wires read by this instruction.
    pub fn read_cbits(&self) -> Vec<Cbit> {
        match *self {
            Instruction::ClassicalCtrl { control, .. } => vec![control],
            Instruction::ClassicalXor { a, b, .. } => vec![a, b],
            _ => vec![],
        }
    }

    /// True for H, X, Z, CNOT and CZ.
    pub fn is_unitary_gate(&self) -> bool {
        matches!(self, Instruction::Gate1 { .. } | Instruction::Gate2 { .. })
    }

    /// Rewrites every quantum and classical index through the given maps.
    pub(crate) fn remap(&self, q: impl Fn(Qubit) -> Qubit, c: impl Fn(Cbit) -> Cbit) -> Self {
        match *self {
            Instruction::Gate1 { kind, target } => Instruction::Gate1 { kind, target: q(target) },
            Instruction::Gate2 { kind, control, target } => {
                Instruction::Gate2 { kind, control: q(control), target: q(target) }
            }
            Instruction::Measure { target, result } => Instruction::Measure { target: q(target), result: c(result) },
            Instruction::ClassicalCtrl { kind, control, target } => {
                Instruction::ClassicalCtrl { kind, control: c(control), target: q(target) }
            }
            Instruction::ClassicalXor { a, b, out } => Instruction::ClassicalXor { a: c(a), b: c(b), out: c(out) },
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Instruction::Gate1 { kind, target } => {
                let name = match kind {
                    Gate1Kind::H => "H",
                    Gate1Kind::X => "X",
                    Gate1Kind::Z => "Z",
                };
                write!(f, "{name} {target}")
            }
            Instruction::Gate2 { kind, control, target } => {
                let name = match kind {
                    Gate2Kind::Cnot => "CNOT",
                    Gate2Kind::Cz => "CZ",
                };
                write!(f, "{name} {control} {target}")
            }
            Instruction::Measure { target, result } => write!(f, "MEASURE {target} {result}"),
            Instruction::ClassicalCtrl { kind, control, target } => {
                let name = match kind {
                    CtrlKind::X => "CX",
                    CtrlKind::Z => "CZC",
                };
                write!(f, "{name} {control} {target}")
            }
            Instruction::ClassicalXor { a, b, out } => write!(f, "XOR {a} {b} {out}"),
        }
    }
}

/// True iff the two instructions touch no common wire. Such instructions commute.
pub fn supports_disjoint(a: &Instruction, b: &Instruction) -> bool {
    let sa = a.support();
    b.support().iter().all(|w| !sa.contains(w))
}

/// Preparation directive of a non-input quantum wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prep {
    Zero,
    Plus,
    /// Half of a β00 pair shared with the named wire.
    BellWith(Qubit),
}

/// Fate of a quantum wire at the end of the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sink {
    Output,
    Discard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CbitRole {
    /// Outcome is part of the observable result.
    Report,
    #[default]
    Scratch,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("reference to undeclared wire {0}")]
    UndeclaredWire(WireRef),
    #[error("classical wire {0} assigned twice")]
    DoubleAssignment(Cbit),
    #[error("input wire {0} cannot carry a preparation")]
    PrepOnInput(Qubit),
    #[error("wire {0} has more than one preparation")]
    DuplicatePrep(Qubit),
    #[error("Bell pairing of {0} is not symmetric")]
    AsymmetricBell(Qubit),
    #[error("control and target coincide on {0}")]
    ControlIsTarget(Qubit),
    #[error("wire {0} given conflicting roles")]
    ConflictingRole(WireRef),
    #[error("XOR operands must be distinct from its output {0}")]
    XorAliasing(Cbit),
}

/// A validated circuit. Construct through [`CircuitBuilder`] or [`crate::text::parse`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    pub(crate) num_qubits: usize,
    pub(crate) num_cbits: usize,
    pub(crate) preps: Vec<Option<Prep>>,
    pub(crate) sinks: Vec<Sink>,
    pub(crate) cbit_roles: Vec<CbitRole>,
    pub(crate) body: Vec<Instruction>,
}

impl Circuit {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_cbits(&self) -> usize {
        self.num_cbits
    }

    pub fn body(&self) -> &[Instruction] {
        &self.body
    }

    pub fn prep(&self, q: Qubit) -> Option<Prep> {
        self.preps.get(q.0).copied().flatten()
    }

    pub fn sink(&self, q: Qubit) -> Sink {
        self.sinks[q.0]
    }

    pub fn cbit_role(&self, c: Cbit) -> CbitRole {
        self.cbit_roles[c.0]
    }

    /// Wires without a preparation, ascending. These carry the caller's input state.
    pub fn inputs(&self) -> Vec<Qubit> {
        (0..self.num_qubits).map(Qubit).filter(|q| self.preps[q.0].is_none()).collect()
    }

    pub fn outputs(&self) -> Vec<Qubit> {
        (0..self.num_qubits).map(Qubit).filter(|q| self.sinks[q.0] == Sink::Output).collect()
    }

    pub fn discards(&self) -> Vec<Qubit> {
        (0..self.num_qubits).map(Qubit).filter(|q| self.sinks[q.0] == Sink::Discard).collect()
    }

    pub fn reported_cbits(&self) -> Vec<Cbit> {
        (0..self.num_cbits).map(Cbit).filter(|c| self.cbit_roles[c.0] == CbitRole::Report).collect()
    }

    /// Wires that are measured somewhere in the body.
    pub fn measured_qubits(&self) -> BTreeSet<Qubit> {
        self.body
            .iter()
            .filter_map(|i| match i {
                Instruction::Measure { target, .. } => Some(*target),
                _ => None,
            })
            .collect()
    }

    /// True when the body only holds H, X, Z, CNOT and CZ and no wire is prepared.
    pub fn is_pure_gate(&self) -> bool {
        self.preps.iter().all(Option::is_none) && self.body.iter().all(Instruction::is_unitary_gate)
    }

    /// Position of the first instruction touching `q`, if any.
    pub fn first_touch(&self, q: Qubit) -> Option<usize> {
        self.body.iter().position(|i| i.touches_qubit(q))
    }

    /// Position of the last instruction touching `q`, if any.
    pub fn last_touch(&self, q: Qubit) -> Option<usize> {
        self.body.iter().rposition(|i| i.touches_qubit(q))
    }

    pub fn readers_of(&self, c: Cbit) -> Vec<usize> {
        self.body.iter().enumerate().filter(|(_, i)| i.read_cbits().contains(&c)).map(|(k, _)| k).collect()
    }

    /// Number of H, X, Z, CNOT and CZ instructions.
    pub fn quantum_gate_count(&self) -> usize {
        self.body.iter().filter(|i| i.is_unitary_gate()).count()
    }

    pub fn classical_ctrl_count(&self) -> usize {
        self.body.iter().filter(|i| matches!(i, Instruction::ClassicalCtrl { .. })).count()
    }

    /// A builder seeded with this circuit's contents.
    pub fn to_builder(&self) -> CircuitBuilder {
        CircuitBuilder {
            num_qubits: self.num_qubits,
            num_cbits: self.num_cbits,
            preps: self.preps.clone(),
            sinks: self.sinks.iter().map(|s| Some(*s)).collect(),
            cbit_roles: self.cbit_roles.clone(),
            body: self.body.clone(),
        }
    }

    /// Same circuit with a new body, re-validated. Sinks stay as they are.
    pub fn with_body(&self, body: Vec<Instruction>) -> Result<Circuit, CircuitError> {
        let mut b = self.to_builder();
        b.body = body;
        b.build()
    }
}

/// Assembles and validates a [`Circuit`].
///
/// Sinks left unset default to discard for measured wires and output otherwise.
#[derive(Debug, Clone, Default)]
pub struct CircuitBuilder {
    pub(crate) num_qubits: usize,
    pub(crate) num_cbits: usize,
    pub(crate) preps: Vec<Option<Prep>>,
    pub(crate) sinks: Vec<Option<Sink>>,
    pub(crate) cbit_roles: Vec<CbitRole>,
    pub(crate) body: Vec<Instruction>,
}

impl CircuitBuilder {
    pub fn new(num_qubits: usize, num_cbits: usize) -> Self {
        CircuitBuilder {
            num_qubits,
            num_cbits,
            preps: vec![None; num_qubits],
            sinks: vec![None; num_qubits],
            cbit_roles: vec![CbitRole::Scratch; num_cbits],
            body: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_cbits(&self) -> usize {
        self.num_cbits
    }

    fn check_qubit(&self, q: Qubit) -> Result<(), CircuitError> {
        if q.0 < self.num_qubits {
            Ok(())
        } else {
            Err(CircuitError::UndeclaredWire(WireRef::Quantum(q)))
        }
    }

    fn check_cbit(&self, c: Cbit) -> Result<(), CircuitError> {
        if c.0 < self.num_cbits {
            Ok(())
        } else {
            Err(CircuitError::UndeclaredWire(WireRef::Classical(c)))
        }
    }

    pub fn prep(&mut self, q: usize, prep: Prep) -> Result<&mut Self, CircuitError> {
        let q = Qubit(q);
        self.check_qubit(q)?;
        if self.preps[q.0].is_some() {
            return Err(CircuitError::DuplicatePrep(q));
        }
        self.preps[q.0] = Some(prep);
        Ok(self)
    }

    pub fn bell(&mut self, a: usize, b: usize) -> Result<&mut Self, CircuitError> {
        if a == b {
            return Err(CircuitError::AsymmetricBell(Qubit(a)));
        }
        self.check_qubit(Qubit(b))?;
        self.prep(a, Prep::BellWith(Qubit(b)))?;
        self.prep(b, Prep::BellWith(Qubit(a)))?;
        Ok(self)
    }

    pub fn sink(&mut self, q: usize, sink: Sink) -> Result<&mut Self, CircuitError> {
        let q = Qubit(q);
        self.check_qubit(q)?;
        match self.sinks[q.0] {
            Some(s) if s != sink => Err(CircuitError::ConflictingRole(WireRef::Quantum(q))),
            _ => {
                self.sinks[q.0] = Some(sink);
                Ok(self)
            }
        }
    }

    pub fn cbit_role(&mut self, c: usize, role: CbitRole) -> Result<&mut Self, CircuitError> {
        let c = Cbit(c);
        self.check_cbit(c)?;
        self.cbit_roles[c.0] = role;
        Ok(self)
    }

    pub fn push(&mut self, instr: Instruction) -> &mut Self {
        self.body.push(instr);
        self
    }

    pub fn extend(&mut self, instrs: impl IntoIterator<Item = Instruction>) -> &mut Self {
        self.body.extend(instrs);
        self
    }

    /// Validates a single instruction against the declared wires and the
    /// classical assignments made so far, recording its assignment.
    pub(crate) fn check_instruction(&self, instr: &Instruction, assigned: &mut [bool]) -> Result<(), CircuitError> {
        for q in instr.qubits() {
            self.check_qubit(q)?;
        }
        for c in instr.cbits() {
            self.check_cbit(c)?;
        }
        match *instr {
            Instruction::Gate2 { control, target, .. } if control == target => {
                return Err(CircuitError::ControlIsTarget(control));
            }
            Instruction::ClassicalXor { a, b, out } if a == out || b == out => {
                return Err(CircuitError::XorAliasing(out));
            }
            _ => {}
        }
        if let Some(c) = instr.assigned_cbit() {
            if assigned[c.0] {
                return Err(CircuitError::DoubleAssignment(c));
            }
            assigned[c.0] = true;
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Circuit, CircuitError> {
        for (q, prep) in self.preps.iter().enumerate() {
            if let Some(Prep::BellWith(other)) = prep {
                self.check_qubit(*other)?;
                if self.preps[other.0] != Some(Prep::BellWith(Qubit(q))) || other.0 == q {
                    return Err(CircuitError::AsymmetricBell(Qubit(q)));
                }
            }
        }
        let mut assigned = vec![false; self.num_cbits];
        for instr in &self.body {
            self.check_instruction(instr, &mut assigned)?;
        }
        let measured: BTreeSet<Qubit> = self
            .body
            .iter()
            .filter_map(|i| match i {
                Instruction::Measure { target, .. } => Some(*target),
                _ => None,
            })
            .collect();
        let sinks = (0..self.num_qubits)
            .map(|q| self.sinks[q].unwrap_or(if measured.contains(&Qubit(q)) { Sink::Discard } else { Sink::Output }))
            .collect();
        Ok(Circuit {
            num_qubits: self.num_qubits,
            num_cbits: self.num_cbits,
            preps: self.preps.clone(),
            sinks,
            cbit_roles: self.cbit_roles.clone(),
            body: self.body.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_support_examples() {
        assert!(supports_disjoint(&Instruction::h(0), &Instruction::x(1)));
        assert!(!supports_disjoint(&Instruction::cnot(0, 1), &Instruction::cz(1, 2)));
        assert!(!supports_disjoint(&Instruction::measure(0, 0), &Instruction::cx(0, 1)));
        assert!(supports_disjoint(&Instruction::xor(0, 1, 2), &Instruction::h(0)));
    }

    #[test]
    fn default_sinks_follow_measurement() {
        let mut b = CircuitBuilder::new(2, 1);
        b.push(Instruction::h(0)).push(Instruction::measure(0, 0));
        let c = b.build().unwrap();
        assert_eq!(c.sink(Qubit(0)), Sink::Discard);
        assert_eq!(c.sink(Qubit(1)), Sink::Output);
    }

    #[test]
    fn rejects_double_assignment_and_bad_wires() {
        let mut b = CircuitBuilder::new(1, 1);
        b.push(Instruction::measure(0, 0)).push(Instruction::measure(0, 0));
        assert_eq!(b.build(), Err(CircuitError::DoubleAssignment(Cbit(0))));

        let mut b = CircuitBuilder::new(2, 0);
        b.push(Instruction::cnot(1, 1));
        assert_eq!(b.build(), Err(CircuitError::ControlIsTarget(Qubit(1))));

        let mut b = CircuitBuilder::new(2, 0);
        b.push(Instruction::cnot(0, 2));
        assert_eq!(b.build(), Err(CircuitError::UndeclaredWire(WireRef::Quantum(Qubit(2)))));
    }

    #[test]
    fn bell_prep_is_symmetric() {
        let mut b = CircuitBuilder::new(3, 0);
        b.bell(0, 2).unwrap();
        let c = b.build().unwrap();
        assert_eq!(c.prep(Qubit(0)), Some(Prep::BellWith(Qubit(2))));
        assert_eq!(c.prep(Qubit(2)), Some(Prep::BellWith(Qubit(0))));
        assert_eq!(c.inputs(), vec![Qubit(1)]);
        assert!(b.bell(1, 2).is_err());
    }

    #[test]
    fn conflicting_sinks_rejected() {
        let mut b = CircuitBuilder::new(1, 0);
        b.sink(0, Sink::Output).unwrap();
        assert!(b.sink(0, Sink::Discard).is_err());
    }
}
