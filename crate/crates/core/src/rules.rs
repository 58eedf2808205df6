//! Rewrite rules as template pairs over pattern variables.
//!
//! Each rule has one or more variants. A variant's `lhs` is the pattern in the
//! forward direction and its `rhs` the replacement; backward swaps them.
//! Guards restrict where a variant may fire, and effects change wire
//! preparations alongside the body edit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::{Cbit, CtrlKind, Gate1Kind, Gate2Kind, Instruction, Qubit, WireRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    R1InverseCancel,
    R1TargetPlus,
    R1ControlZero,
    R2CzFlip,
    R2CnotViaCz,
    R2CnotReversal,
    R2HMirror,
    R3DeferMeasure,
    R4XorSubstitute,
    R5DistributeCnot,
    R6CnotMirror,
    R7ParallelToLambda,
    /// Drops a single-qubit gate on a discarded wire after its last use.
    DiscardedWireTail,
    /// Measures a discarded wire after its last use into a fresh classical wire.
    MeasureDiscarded,
    /// Adds an idle discarded wire prepared in |0⟩ or |+⟩.
    AncillaIntro,
    /// Folds `PREP a +; PREP b 0; CNOT a b` into a Bell pair.
    BellFold,
    /// Absorbs a leading H into the preparation (|0⟩ ↔ |+⟩).
    PrepHadamard,
    /// Swaps two adjacent instructions with disjoint support.
    CommuteDisjoint,
    /// Swaps adjacent two-qubit gates that share only commuting roles.
    CommuteControls,
}

impl RuleId {
    pub const CATALOG: [RuleId; 12] = [
        RuleId::R1InverseCancel,
        RuleId::R1TargetPlus,
        RuleId::R1ControlZero,
        RuleId::R2CzFlip,
        RuleId::R2CnotViaCz,
        RuleId::R2CnotReversal,
        RuleId::R2HMirror,
        RuleId::R3DeferMeasure,
        RuleId::R4XorSubstitute,
        RuleId::R5DistributeCnot,
        RuleId::R6CnotMirror,
        RuleId::R7ParallelToLambda,
    ];

    pub const AUXILIARY: [RuleId; 7] = [
        RuleId::DiscardedWireTail,
        RuleId::MeasureDiscarded,
        RuleId::AncillaIntro,
        RuleId::BellFold,
        RuleId::PrepHadamard,
        RuleId::CommuteDisjoint,
        RuleId::CommuteControls,
    ];

    pub fn all() -> impl Iterator<Item = RuleId> {
        RuleId::CATALOG.into_iter().chain(RuleId::AUXILIARY)
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleId::R1InverseCancel => "R1_InverseCancel",
            RuleId::R1TargetPlus => "R1_TargetPlus",
            RuleId::R1ControlZero => "R1_ControlZero",
            RuleId::R2CzFlip => "R2_CZFlip",
            RuleId::R2CnotViaCz => "R2_CNOTviaCZ",
            RuleId::R2CnotReversal => "R2_CNOTReversal",
            RuleId::R2HMirror => "R2_HMirror",
            RuleId::R3DeferMeasure => "R3_DeferMeasure",
            RuleId::R4XorSubstitute => "R4_XorSubstitute",
            RuleId::R5DistributeCnot => "R5_DistributeCNOT",
            RuleId::R6CnotMirror => "R6_CNOTMirror",
            RuleId::R7ParallelToLambda => "R7_ParallelToLambda",
            RuleId::DiscardedWireTail => "DiscardedWireTail",
            RuleId::MeasureDiscarded => "MeasureDiscarded",
            RuleId::AncillaIntro => "AncillaIntro",
            RuleId::BellFold => "BellFold",
            RuleId::PrepHadamard => "PrepHadamard",
            RuleId::CommuteDisjoint => "CommuteDisjoint",
            RuleId::CommuteControls => "CommuteControls",
        }
    }

    /// Rules whose variants are not template pairs and are handled directly by the engine.
    pub fn is_structural(self) -> bool {
        matches!(self, RuleId::AncillaIntro | RuleId::CommuteDisjoint)
    }

    /// Number of variants.
    pub fn variant_count(self) -> usize {
        match self {
            RuleId::AncillaIntro => 2,
            RuleId::CommuteDisjoint => 1,
            _ => variants(self).len(),
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("{rule} has no variant {variant}")]
    UnknownVariant { rule: RuleId, variant: usize },
    #[error("{0} is not a template rule")]
    NotTemplated(RuleId),
    #[error("pattern variable `{0}` is unbound")]
    Unbound(&'static str),
    #[error("pattern variables `{0}` and `{1}` bound to the same wire")]
    NonInjective(&'static str, &'static str),
    #[error("pattern variable `{0}` bound to a wire of the wrong kind")]
    WrongKind(&'static str),
}

impl FromStr for RuleId {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::all().find(|r| r.name().eq_ignore_ascii_case(s)).ok_or_else(|| RuleError::UnknownRule(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

/// A rule, one of its variants, and the direction of application.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleRef {
    pub id: RuleId,
    pub variant: usize,
    pub direction: Direction,
}

impl RuleRef {
    pub fn new(id: RuleId, variant: usize, direction: Direction) -> Self {
        RuleRef { id, variant, direction }
    }

    pub fn forward(id: RuleId, variant: usize) -> Self {
        RuleRef::new(id, variant, Direction::Forward)
    }

    pub fn backward(id: RuleId, variant: usize) -> Self {
        RuleRef::new(id, variant, Direction::Backward)
    }

    pub fn reversed(self) -> Self {
        RuleRef { direction: self.direction.reversed(), ..self }
    }
}

impl fmt::Display for RuleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.id.variant_count() > 1 {
            write!(f, "{}[{}] {}", self.id, self.variant, self.direction)
        } else {
            write!(f, "{} {}", self.id, self.direction)
        }
    }
}

pub type Var = &'static str;
pub type Bindings = BTreeMap<Var, WireRef>;

/// An instruction over pattern variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    G1(Gate1Kind, Var),
    G2(Gate2Kind, Var, Var),
    Measure(Var, Var),
    Ctrl(CtrlKind, Var, Var),
    Xor(Var, Var, Var),
}

impl Template {
    /// Variables in order of appearance, tagged quantum (`true`) or classical.
    pub fn vars(&self) -> Vec<(Var, bool)> {
        match *self {
            Template::G1(_, w) => vec![(w, true)],
            Template::G2(_, c, t) => vec![(c, true), (t, true)],
            Template::Measure(q, r) => vec![(q, true), (r, false)],
            Template::Ctrl(_, r, t) => vec![(r, false), (t, true)],
            Template::Xor(a, b, o) => vec![(a, false), (b, false), (o, false)],
        }
    }

    /// Extends `bindings` so that this template instantiates to `instr`.
    /// Returns false (leaving `bindings` untouched) if that is impossible.
    pub fn unify(&self, instr: &Instruction, bindings: &mut Bindings) -> bool {
        let pairs: Vec<(Var, WireRef)> = match (*self, *instr) {
            (Template::G1(k, w), Instruction::Gate1 { kind, target }) if k == kind => {
                vec![(w, WireRef::Quantum(target))]
            }
            (Template::G2(k, c, t), Instruction::Gate2 { kind, control, target }) if k == kind => {
                vec![(c, WireRef::Quantum(control)), (t, WireRef::Quantum(target))]
            }
            (Template::Measure(q, r), Instruction::Measure { target, result }) => {
                vec![(q, WireRef::Quantum(target)), (r, WireRef::Classical(result))]
            }
            (Template::Ctrl(k, r, t), Instruction::ClassicalCtrl { kind, control, target }) if k == kind => {
                vec![(r, WireRef::Classical(control)), (t, WireRef::Quantum(target))]
            }
            (Template::Xor(a, b, o), Instruction::ClassicalXor { a: ia, b: ib, out }) => {
                vec![(a, WireRef::Classical(ia)), (b, WireRef::Classical(ib)), (o, WireRef::Classical(out))]
            }
            _ => return false,
        };
        let mut next = bindings.clone();
        for (var, wire) in pairs {
            match next.get(var) {
                Some(w) if *w != wire => return false,
                Some(_) => {}
                None => {
                    if next.values().any(|w| *w == wire) {
                        return false;
                    }
                    next.insert(var, wire);
                }
            }
        }
        *bindings = next;
        true
    }

    fn instantiate(&self, bindings: &Bindings) -> Result<Instruction, RuleError> {
        let q = |v: Var| match bindings.get(v) {
            Some(WireRef::Quantum(q)) => Ok(*q),
            Some(WireRef::Classical(_)) => Err(RuleError::WrongKind(v)),
            None => Err(RuleError::Unbound(v)),
        };
        let c = |v: Var| match bindings.get(v) {
            Some(WireRef::Classical(c)) => Ok(*c),
            Some(WireRef::Quantum(_)) => Err(RuleError::WrongKind(v)),
            None => Err(RuleError::Unbound(v)),
        };
        Ok(match *self {
            Template::G1(kind, w) => Instruction::Gate1 { kind, target: q(w)? },
            Template::G2(kind, ctl, t) => Instruction::Gate2 { kind, control: q(ctl)?, target: q(t)? },
            Template::Measure(w, r) => Instruction::Measure { target: q(w)?, result: c(r)? },
            Template::Ctrl(kind, r, t) => Instruction::ClassicalCtrl { kind, control: c(r)?, target: q(t)? },
            Template::Xor(a, b, o) => Instruction::ClassicalXor { a: c(a)?, b: c(b)?, out: c(o)? },
        })
    }
}

/// Required preparation in a [`Guard::Prepared`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrepT {
    Zero,
    Plus,
    BellWith(Var),
}

/// Static side condition of a variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    /// The wire carries this preparation and no instruction before the site touches it.
    Prepared(Var, PrepT),
    /// The wire is discarded and every instruction touching it from the site on is part of the site.
    Discarded(Var),
    /// The classical wire is scratch and only read inside the site.
    Private(Var),
}

/// A preparation change that accompanies the body edit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrepEffect {
    pub wire: Var,
    /// Preparation on the pattern side in the forward direction.
    pub before: PrepT,
    pub after: PrepT,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub label: &'static str,
    pub lhs: Vec<Template>,
    pub rhs: Vec<Template>,
    pub forward_guards: Vec<Guard>,
    pub backward_guards: Vec<Guard>,
    pub effects: Vec<PrepEffect>,
}

impl Variant {
    fn plain(label: &'static str, lhs: Vec<Template>, rhs: Vec<Template>) -> Self {
        Variant { label, lhs, rhs, forward_guards: vec![], backward_guards: vec![], effects: vec![] }
    }

    fn guarded(mut self, guards: Vec<Guard>) -> Self {
        self.forward_guards = guards.clone();
        self.backward_guards = guards;
        self
    }

    pub fn pattern(&self, d: Direction) -> &[Template] {
        match d {
            Direction::Forward => &self.lhs,
            Direction::Backward => &self.rhs,
        }
    }

    pub fn replacement(&self, d: Direction) -> &[Template] {
        match d {
            Direction::Forward => &self.rhs,
            Direction::Backward => &self.lhs,
        }
    }

    pub fn guards(&self, d: Direction) -> &[Guard] {
        match d {
            Direction::Forward => &self.forward_guards,
            Direction::Backward => &self.backward_guards,
        }
    }

    /// Variables of one side, quantum then classical, in order of first appearance.
    fn side_vars(side: &[Template]) -> Vec<(Var, bool)> {
        let mut seen = Vec::new();
        for t in side {
            for v in t.vars() {
                if !seen.contains(&v) {
                    seen.push(v);
                }
            }
        }
        seen
    }

    /// Variables bound by matching the pattern.
    pub fn pattern_vars(&self, d: Direction) -> Vec<(Var, bool)> {
        Variant::side_vars(self.pattern(d))
    }

    /// Variables of the replacement not bound by the pattern. Quantum ones
    /// range over existing wires; classical ones are freshly allocated.
    pub fn free_vars(&self, d: Direction) -> Vec<(Var, bool)> {
        let bound = self.pattern_vars(d);
        let mut free: Vec<(Var, bool)> =
            Variant::side_vars(self.replacement(d)).into_iter().filter(|v| !bound.contains(v)).collect();
        // Guards may mention variables absent from the pattern, e.g. a Bell partner.
        for g in self.guards(d) {
            if let Guard::Prepared(_, PrepT::BellWith(v)) = g {
                if !bound.contains(&(*v, true)) && !free.contains(&(*v, true)) {
                    free.push((*v, true));
                }
            }
        }
        free
    }
}

use Gate1Kind::{H, X, Z};
use Gate2Kind::{Cnot, Cz};
use Template::{G1, G2};

fn cnot(c: Var, t: Var) -> Template {
    G2(Cnot, c, t)
}

fn cz(c: Var, t: Var) -> Template {
    G2(Cz, c, t)
}

/// Template variants of a rule. Empty for structural rules.
pub fn variants(id: RuleId) -> Vec<Variant> {
    match id {
        RuleId::R1InverseCancel => vec![
            Variant::plain("H", vec![G1(H, "w"), G1(H, "w")], vec![]),
            Variant::plain("X", vec![G1(X, "w"), G1(X, "w")], vec![]),
            Variant::plain("Z", vec![G1(Z, "w"), G1(Z, "w")], vec![]),
            Variant::plain("CNOT", vec![cnot("c", "t"), cnot("c", "t")], vec![]),
            Variant::plain("CZ", vec![cz("c", "t"), cz("c", "t")], vec![]),
        ],
        RuleId::R1TargetPlus => {
            vec![Variant::plain("CNOT", vec![cnot("c", "t")], vec![]).guarded(vec![Guard::Prepared("t", PrepT::Plus)])]
        }
        RuleId::R1ControlZero => vec![
            Variant::plain("CNOT", vec![cnot("c", "t")], vec![]).guarded(vec![Guard::Prepared("c", PrepT::Zero)]),
            Variant::plain("CZ", vec![cz("c", "t")], vec![]).guarded(vec![Guard::Prepared("c", PrepT::Zero)]),
        ],
        RuleId::R2CzFlip => vec![Variant::plain("CZ", vec![cz("a", "b")], vec![cz("b", "a")])],
        RuleId::R2CnotViaCz => {
            vec![Variant::plain("CNOT", vec![cnot("c", "t")], vec![G1(H, "t"), cz("c", "t"), G1(H, "t")])]
        }
        RuleId::R2CnotReversal => vec![Variant::plain(
            "CNOT",
            vec![G1(H, "c"), G1(H, "t"), cnot("c", "t"), G1(H, "c"), G1(H, "t")],
            vec![cnot("t", "c")],
        )],
        RuleId::R2HMirror => vec![Variant::plain(
            "CNOT",
            vec![G1(H, "c"), G1(H, "t"), cnot("c", "t")],
            vec![cnot("t", "c"), G1(H, "c"), G1(H, "t")],
        )],
        RuleId::R3DeferMeasure => vec![
            Variant::plain(
                "CX",
                vec![Template::Measure("m", "r"), Template::Ctrl(CtrlKind::X, "r", "t")],
                vec![cnot("m", "t"), Template::Measure("m", "r")],
            ),
            Variant::plain(
                "CZC",
                vec![Template::Measure("m", "r"), Template::Ctrl(CtrlKind::Z, "r", "t")],
                vec![cz("m", "t"), Template::Measure("m", "r")],
            ),
        ],
        RuleId::R4XorSubstitute => [("CX", CtrlKind::X), ("CZC", CtrlKind::Z)]
            .into_iter()
            .map(|(label, kind)| Variant {
                label,
                lhs: vec![
                    cnot("a", "b"),
                    Template::Measure("a", "r1"),
                    Template::Measure("b", "r2"),
                    Template::Ctrl(kind, "r2", "t"),
                ],
                rhs: vec![
                    Template::Measure("a", "r1"),
                    Template::Measure("b", "r2"),
                    Template::Xor("r1", "r2", "r3"),
                    Template::Ctrl(kind, "r3", "t"),
                ],
                forward_guards: vec![Guard::Discarded("b"), Guard::Private("r2")],
                backward_guards: vec![Guard::Discarded("b"), Guard::Private("r2"), Guard::Private("r3")],
                effects: vec![],
            })
            .collect(),
        RuleId::R5DistributeCnot => vec![
            Variant::plain(
                "ancilla-first",
                vec![cnot("c", "t")],
                vec![cnot("c", "a"), cnot("a", "t"), cnot("c", "a"), cnot("a", "t")],
            ),
            Variant::plain(
                "target-first",
                vec![cnot("c", "t")],
                vec![cnot("a", "t"), cnot("c", "a"), cnot("a", "t"), cnot("c", "a")],
            ),
        ],
        RuleId::R6CnotMirror => {
            let ab = || cnot("a", "b");
            let bc = || cnot("b", "c");
            let ac = || cnot("a", "c");
            vec![
                Variant::plain("ab.bc/bc.ab.ac", vec![ab(), bc()], vec![bc(), ab(), ac()]),
                Variant::plain("ab.bc/ac.bc.ab", vec![ab(), bc()], vec![ac(), bc(), ab()]),
                Variant::plain("ab.bc/bc.ac.ab", vec![ab(), bc()], vec![bc(), ac(), ab()]),
                Variant::plain("bc.ab/ab.bc.ac", vec![bc(), ab()], vec![ab(), bc(), ac()]),
                Variant::plain("bc.ab/ac.ab.bc", vec![bc(), ab()], vec![ac(), ab(), bc()]),
                Variant::plain("bc.ab/ab.ac.bc", vec![bc(), ab()], vec![ab(), ac(), bc()]),
            ]
        }
        RuleId::R7ParallelToLambda => vec![Variant::plain(
            "CNOT",
            vec![cnot("c", "t1"), cnot("c", "t2")],
            vec![cnot("t1", "t2"), cnot("c", "t1"), cnot("t1", "t2")],
        )],
        RuleId::DiscardedWireTail => [("H", H), ("X", X), ("Z", Z)]
            .into_iter()
            .map(|(label, k)| Variant::plain(label, vec![G1(k, "w")], vec![]).guarded(vec![Guard::Discarded("w")]))
            .collect(),
        RuleId::MeasureDiscarded => vec![Variant {
            label: "MEASURE",
            lhs: vec![],
            rhs: vec![Template::Measure("w", "r")],
            forward_guards: vec![Guard::Discarded("w")],
            backward_guards: vec![Guard::Discarded("w"), Guard::Private("r")],
            effects: vec![],
        }],
        RuleId::BellFold => vec![Variant {
            label: "CNOT",
            lhs: vec![cnot("a", "b")],
            rhs: vec![],
            forward_guards: vec![Guard::Prepared("a", PrepT::Plus), Guard::Prepared("b", PrepT::Zero)],
            backward_guards: vec![
                Guard::Prepared("a", PrepT::BellWith("b")),
                Guard::Prepared("b", PrepT::BellWith("a")),
            ],
            effects: vec![
                PrepEffect { wire: "a", before: PrepT::Plus, after: PrepT::BellWith("b") },
                PrepEffect { wire: "b", before: PrepT::Zero, after: PrepT::BellWith("a") },
            ],
        }],
        RuleId::PrepHadamard => vec![
            Variant {
                label: "0",
                lhs: vec![G1(H, "w")],
                rhs: vec![],
                forward_guards: vec![Guard::Prepared("w", PrepT::Zero)],
                backward_guards: vec![Guard::Prepared("w", PrepT::Plus)],
                effects: vec![PrepEffect { wire: "w", before: PrepT::Zero, after: PrepT::Plus }],
            },
            Variant {
                label: "+",
                lhs: vec![G1(H, "w")],
                rhs: vec![],
                forward_guards: vec![Guard::Prepared("w", PrepT::Plus)],
                backward_guards: vec![Guard::Prepared("w", PrepT::Zero)],
                effects: vec![PrepEffect { wire: "w", before: PrepT::Plus, after: PrepT::Zero }],
            },
        ],
        RuleId::CommuteControls => vec![
            Variant::plain(
                "shared-control",
                vec![cnot("a", "b"), cnot("a", "c")],
                vec![cnot("a", "c"), cnot("a", "b")],
            ),
            Variant::plain("shared-target", vec![cnot("a", "c"), cnot("b", "c")], vec![cnot("b", "c"), cnot("a", "c")]),
            Variant::plain("control-phase", vec![cnot("a", "b"), cz("a", "c")], vec![cz("a", "c"), cnot("a", "b")]),
            Variant::plain("control-phase-rev", vec![cnot("a", "b"), cz("c", "a")], vec![cz("c", "a"), cnot("a", "b")]),
        ],
        RuleId::AncillaIntro | RuleId::CommuteDisjoint => vec![],
    }
}

/// Looks up a template variant.
pub fn variant(rule: RuleRef) -> Result<Variant, RuleError> {
    if rule.id.is_structural() {
        return Err(RuleError::NotTemplated(rule.id));
    }
    variants(rule.id)
        .into_iter()
        .nth(rule.variant)
        .ok_or(RuleError::UnknownVariant { rule: rule.id, variant: rule.variant })
}

/// Concrete (pattern, replacement) instruction lists for `rule` under `bindings`.
pub fn instantiate(rule: RuleRef, bindings: &Bindings) -> Result<(Vec<Instruction>, Vec<Instruction>), RuleError> {
    let v = variant(rule)?;
    let mut vars: Vec<(Var, bool)> = v.pattern_vars(rule.direction);
    vars.extend(v.free_vars(rule.direction));
    let mut seen: BTreeMap<WireRef, Var> = BTreeMap::new();
    for (var, quantum) in &vars {
        let wire = *bindings.get(var).ok_or(RuleError::Unbound(var))?;
        if matches!(wire, WireRef::Quantum(_)) != *quantum {
            return Err(RuleError::WrongKind(var));
        }
        if let Some(other) = seen.insert(wire, var) {
            return Err(RuleError::NonInjective(other, var));
        }
    }
    let build = |side: &[Template]| side.iter().map(|t| t.instantiate(bindings)).collect::<Result<Vec<_>, _>>();
    Ok((build(v.pattern(rule.direction))?, build(v.replacement(rule.direction))?))
}

/// Convenience constructor for bindings from `(name, wire)` pairs.
pub fn bind(pairs: &[(Var, WireRef)]) -> Bindings {
    pairs.iter().copied().collect()
}

pub fn q(var: Var, index: usize) -> (Var, WireRef) {
    (var, WireRef::Quantum(Qubit(index)))
}

pub fn c(var: Var, index: usize) -> (Var, WireRef) {
    (var, WireRef::Classical(Cbit(index)))
}

/// Quantum variables of a variant across both sides.
pub fn quantum_vars(v: &Variant) -> BTreeSet<Var> {
    v.lhs.iter().chain(&v.rhs).flat_map(|t| t.vars()).filter(|(_, q)| *q).map(|(n, _)| n).collect()
}
