//! Named protocol circuits and scripted derivations between them.

use std::fmt;
use std::str::FromStr;

use crate::circuit::{Circuit, CircuitBuilder, Instruction, Prep, Sink, WireRef};
use crate::engine::{DerivationTrace, EngineError, Site};
use crate::rules::{RuleId, RuleRef};
use crate::text::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    XorSwap,
    AltSwap,
    BellGenerator,
    BellDecoder,
    Teleportation,
    DenseEncode,
    DenseFull,
    GateTeleportation,
    Chi,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::XorSwap,
        Scenario::AltSwap,
        Scenario::BellGenerator,
        Scenario::BellDecoder,
        Scenario::Teleportation,
        Scenario::DenseEncode,
        Scenario::DenseFull,
        Scenario::GateTeleportation,
        Scenario::Chi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::XorSwap => "XorSwap",
            Scenario::AltSwap => "AltSwap",
            Scenario::BellGenerator => "BellGenerator",
            Scenario::BellDecoder => "BellDecoder",
            Scenario::Teleportation => "Teleportation",
            Scenario::DenseEncode => "DenseEncode",
            Scenario::DenseFull => "DenseFull",
            Scenario::GateTeleportation => "GateTeleportation",
            Scenario::Chi => "Chi",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

const TELEPORTATION: &str = "\
qubits 3
cbits 2
BELL q1 q2
CNOT q0 q1
H q0
MEASURE q0 c0
MEASURE q1 c1
CX c1 q2
CZC c0 q2";

const DENSE_ENCODE: &str = "\
qubits 4
cbits 2
BELL q2 q3
MEASURE q0 c0
MEASURE q1 c1
CX c1 q2
CZC c0 q2";

const DENSE_FULL: &str = "\
qubits 4
cbits 0
PREP q2 0
PREP q3 0
H q2
CNOT q2 q3
CNOT q1 q2
CZ q0 q2
CNOT q2 q3
H q2";

const GATE_TELEPORTATION: &str = "\
qubits 6
cbits 4
BELL q1 q2
BELL q3 q4
CNOT q2 q3
CNOT q0 q1
MEASURE q1 c1
CX c1 q2
CX c1 q3
H q0
MEASURE q0 c0
CZC c0 q2
CNOT q5 q4
MEASURE q4 c2
CX c2 q3
H q5
MEASURE q5 c3
CZC c3 q3
CZC c3 q2";

const CHI: &str = "\
qubits 4
cbits 0
BELL q0 q1
BELL q2 q3
CNOT q1 q2";

fn gates(n: usize, body: &[Instruction]) -> Circuit {
    let mut b = CircuitBuilder::new(n, 0);
    b.extend(body.iter().copied());
    b.build().expect("scenario circuits are valid")
}

/// Builds a named circuit.
///
/// Teleportation moves `q0` onto `q2`. DenseEncode takes the two classical
/// bits on `q0`, `q1` and leaves β_ab on `q2 q3`; DenseFull adds the decoder so
/// that `|x y 0 0⟩ ↦ |x y x y⟩`. GateTeleportation applies CNOT from input `q0`
/// to input `q5`, delivered on `q2` (control) and `q3` (target).
pub fn make(s: Scenario) -> Circuit {
    let text = match s {
        Scenario::XorSwap => {
            return gates(2, &[Instruction::cnot(0, 1), Instruction::cnot(1, 0), Instruction::cnot(0, 1)]);
        }
        Scenario::AltSwap => {
            return gates(2, &[Instruction::cnot(1, 0), Instruction::cnot(0, 1), Instruction::cnot(1, 0)]);
        }
        Scenario::BellGenerator => return gates(2, &[Instruction::h(0), Instruction::cnot(0, 1)]),
        Scenario::BellDecoder => return gates(2, &[Instruction::cnot(0, 1), Instruction::h(0)]),
        Scenario::Teleportation => TELEPORTATION,
        Scenario::DenseEncode => DENSE_ENCODE,
        Scenario::DenseFull => DENSE_FULL,
        Scenario::GateTeleportation => GATE_TELEPORTATION,
        Scenario::Chi => CHI,
    };
    parse(text).expect("scenario circuits are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Derivation {
    TeleportFromTransfer,
    DenseFromCopy,
    GateTeleportFromTeleport,
}

impl Derivation {
    pub const ALL: [Derivation; 3] =
        [Derivation::TeleportFromTransfer, Derivation::DenseFromCopy, Derivation::GateTeleportFromTeleport];

    pub fn name(self) -> &'static str {
        match self {
            Derivation::TeleportFromTransfer => "TeleportFromTransfer",
            Derivation::DenseFromCopy => "DenseFromCopy",
            Derivation::GateTeleportFromTeleport => "GateTeleportFromTeleport",
        }
    }

    /// The circuit the derivation must end on.
    pub fn target(self) -> Scenario {
        match self {
            Derivation::TeleportFromTransfer => Scenario::Teleportation,
            Derivation::DenseFromCopy => Scenario::DenseFull,
            Derivation::GateTeleportFromTeleport => Scenario::GateTeleportation,
        }
    }

    /// Starting circuit of the derivation.
    pub fn start(self) -> Circuit {
        match self {
            Derivation::TeleportFromTransfer => {
                // The alternative swap with the lower wire fixed to |0⟩ and the upper one dropped.
                let mut b = CircuitBuilder::new(2, 0);
                b.prep(1, Prep::Zero).and_then(|b| b.sink(0, Sink::Discard)).expect("valid roles");
                b.extend([Instruction::cnot(1, 0), Instruction::cnot(0, 1), Instruction::cnot(1, 0)]);
                b.build().expect("valid circuit")
            }
            Derivation::DenseFromCopy => {
                parse("qubits 4\ncbits 0\nPREP q2 0\nPREP q3 0\nCNOT q0 q2\nCNOT q1 q3").expect("valid circuit")
            }
            Derivation::GateTeleportFromTeleport => {
                // Two state transfers q0 → q2 and q5 → q3, then the CNOT to be teleported.
                parse(
                    "qubits 6\ncbits 0\nBELL q1 q2\nBELL q3 q4\n\
                     DISCARD q0\nDISCARD q1\nDISCARD q4\nDISCARD q5\n\
                     CNOT q0 q1\nCNOT q1 q2\nCNOT q2 q0\n\
                     CNOT q5 q4\nCNOT q4 q3\nCNOT q3 q5\n\
                     CNOT q2 q3",
                )
                .expect("valid circuit")
            }
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Derivation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Derivation::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown derivation `{s}`"))
    }
}

type Hint = (&'static str, WireRef);

/// One scripted step: rule, where, and bindings that pin down the match.
struct Step(RuleRef, StepSite, Vec<Hint>);

enum StepSite {
    At(&'static [usize]),
    Anchor(usize),
    /// Insert at the end of the current body.
    End,
}

use RuleId::*;
use StepSite::{Anchor, At, End};

const fn fwd(id: RuleId, variant: usize) -> RuleRef {
    RuleRef { id, variant, direction: crate::rules::Direction::Forward }
}

const fn bwd(id: RuleId, variant: usize) -> RuleRef {
    RuleRef { id, variant, direction: crate::rules::Direction::Backward }
}

const fn qw(i: usize) -> WireRef {
    WireRef::Quantum(crate::circuit::Qubit(i))
}

fn script(d: Derivation) -> Vec<Step> {
    match d {
        Derivation::TeleportFromTransfer => vec![
            Step(fwd(R1ControlZero, 0), At(&[0]), vec![]),
            Step(fwd(AncillaIntro, 1), Anchor(1), vec![]),
            Step(fwd(R5DistributeCnot, 0), At(&[0]), vec![("a", qw(1))]),
            Step(fwd(R1TargetPlus, 0), At(&[0]), vec![]),
            Step(fwd(BellFold, 0), At(&[0]), vec![]),
            Step(fwd(R2CnotViaCz, 0), At(&[2]), vec![]),
            Step(fwd(R2CzFlip, 0), At(&[3]), vec![]),
            Step(fwd(DiscardedWireTail, 0), At(&[4]), vec![]),
            Step(fwd(MeasureDiscarded, 0), End, vec![("w", qw(0))]),
            Step(fwd(MeasureDiscarded, 0), End, vec![("w", qw(1))]),
            Step(bwd(R3DeferMeasure, 1), At(&[3, 4]), vec![]),
            Step(bwd(R3DeferMeasure, 0), At(&[1, 5]), vec![]),
            Step(fwd(CommuteDisjoint, 0), At(&[2, 3]), vec![]),
            Step(fwd(CommuteDisjoint, 0), At(&[1, 2]), vec![]),
            Step(fwd(CommuteDisjoint, 0), At(&[3, 4]), vec![]),
            Step(fwd(CommuteDisjoint, 0), At(&[2, 3]), vec![]),
        ],
        Derivation::DenseFromCopy => vec![
            Step(fwd(R2CnotViaCz, 0), At(&[0]), vec![]),
            Step(fwd(PrepHadamard, 0), At(&[0]), vec![]),
            Step(bwd(R1TargetPlus, 0), Anchor(0), vec![("c", qw(1)), ("t", qw(2))]),
            Step(bwd(PrepHadamard, 0), Anchor(0), vec![("w", qw(2))]),
            Step(fwd(R7ParallelToLambda, 0), At(&[1, 4]), vec![]),
            Step(fwd(CommuteControls, 3), At(&[3, 4]), vec![]),
        ],
        Derivation::GateTeleportFromTeleport => vec![
            Step(fwd(R6CnotMirror, 3), At(&[5, 6]), vec![]),
            Step(fwd(CommuteControls, 1), At(&[4, 5]), vec![]),
            Step(fwd(CommuteControls, 0), At(&[2, 4]), vec![]),
            Step(fwd(R6CnotMirror, 0), At(&[1, 2]), vec![]),
            Step(fwd(CommuteDisjoint, 0), At(&[0, 1]), vec![]),
            Step(fwd(R2CnotViaCz, 0), At(&[4]), vec![]),
            Step(fwd(R2CnotViaCz, 0), At(&[9]), vec![]),
            Step(fwd(R2CnotViaCz, 0), At(&[12]), vec![]),
            Step(fwd(R1InverseCancel, 0), At(&[11, 12]), vec![]),
            Step(fwd(DiscardedWireTail, 0), At(&[12]), vec![]),
            Step(fwd(DiscardedWireTail, 0), At(&[6]), vec![]),
            Step(fwd(R2CzFlip, 0), At(&[5]), vec![]),
            Step(fwd(R2CzFlip, 0), At(&[9]), vec![]),
            Step(fwd(R2CzFlip, 0), At(&[10]), vec![]),
            Step(fwd(MeasureDiscarded, 0), End, vec![("w", qw(0))]),
            Step(fwd(MeasureDiscarded, 0), End, vec![("w", qw(1))]),
            Step(fwd(MeasureDiscarded, 0), End, vec![("w", qw(4))]),
            Step(fwd(MeasureDiscarded, 0), End, vec![("w", qw(5))]),
            Step(bwd(R3DeferMeasure, 1), At(&[5, 11]), vec![]),
            Step(bwd(R3DeferMeasure, 0), At(&[3, 12]), vec![]),
            Step(bwd(R3DeferMeasure, 0), At(&[2, 3]), vec![]),
            Step(bwd(R3DeferMeasure, 1), At(&[12, 14]), vec![]),
            Step(bwd(R3DeferMeasure, 1), At(&[11, 12]), vec![]),
            Step(bwd(R3DeferMeasure, 0), At(&[9, 14]), vec![]),
        ],
    }
}

/// Replays a derivation with per-step channel verification.
pub fn derive(d: Derivation) -> Result<DerivationTrace, EngineError> {
    derive_with(d, true)
}

/// [`derive`] with verification optional.
pub fn derive_with(d: Derivation, verify: bool) -> Result<DerivationTrace, EngineError> {
    let mut trace = DerivationTrace::new(d.start(), verify)?;
    for Step(rule, site, hints) in script(d) {
        let site = match site {
            At(s) => Site::At(s),
            Anchor(a) => Site::Anchor(a),
            End => Site::Anchor(trace.current().body().len()),
        };
        trace.step(rule, site, &hints)?;
    }
    Ok(trace)
}
