//! Matching, rewriting and verified derivation traces.
//!
//! A match is a subsequence of the body that unifies with a rule pattern and
//! can be made contiguous by commuting the instructions in between, which must
//! have support disjoint from the matched instructions they pass.

use std::fmt;

use thiserror::Error;

use crate::circuit::{
    supports_disjoint, Cbit, CbitRole, Circuit, CircuitError, Instruction, Prep, Qubit, Sink, WireRef,
};
use crate::equivalence::{channel_equal, EquivError};
use crate::rules::{self, Bindings, Direction, Guard, PrepT, RuleError, RuleId, RuleRef, Var, Variant};
use crate::sim::{self, Channel, SimError};
use crate::text::serialize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("stale match: {0}")]
    Stale(String),
    #[error("rewrite produced an invalid circuit: {0}")]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Equiv(#[from] EquivError),
    #[error("step {step} ({rule}) failed verification")]
    VerificationFailed { step: usize, rule: RuleRef },
    #[error("no {rule} match at {site:?}")]
    NoSuchMatch { rule: RuleRef, site: Vec<usize> },
    #[error("cannot defer measurements: {0}")]
    NotDeferrable(String),
}

impl From<SimError> for EngineError {
    fn from(e: SimError) -> Self {
        EngineError::Equiv(EquivError::Sim(e))
    }
}

/// How matched instructions are made contiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gather {
    /// Matched instructions move left onto the first site index; every
    /// instruction in between is disjoint from the matched ones after it.
    Left,
    /// Matched instructions move right onto the last site index; every
    /// instruction in between is disjoint from the matched ones before it.
    Right,
}

/// A located rule occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Match {
    pub rule: RuleRef,
    /// Matched body indices, ascending. Empty for pure insertions.
    pub site: Vec<usize>,
    /// Insertion position for empty patterns; wire index for ancilla rules;
    /// otherwise the first site index.
    pub anchor: usize,
    pub bindings: Bindings,
    pub gather: Gather,
}

impl fmt::Display for Match {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule)?;
        if self.site.is_empty() {
            write!(f, " at anchor {}", self.anchor)?;
        } else {
            let site: Vec<String> = self.site.iter().map(usize::to_string).collect();
            write!(f, " at ({})", site.join(","))?;
            if self.gather == Gather::Right {
                write!(f, " gathered right")?;
            }
        }
        if !self.bindings.is_empty() {
            let b: Vec<String> = self.bindings.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, " with {}", b.join(" "))?;
        }
        Ok(())
    }
}

fn left_ok_with(body: &[Instruction], site: &[usize], j: usize) -> bool {
    let Some(&first) = site.first() else { return true };
    (first + 1..j).filter(|i| !site.contains(i)).all(|i| supports_disjoint(&body[i], &body[j]))
}

fn right_ok_with(body: &[Instruction], site: &[usize], j: usize) -> bool {
    let Some(&prev) = site.last() else { return true };
    (prev + 1..j).all(|i| site.iter().all(|&s| supports_disjoint(&body[i], &body[s])))
}

/// Whether `site` can be gathered in the given way.
pub fn gatherable(body: &[Instruction], site: &[usize], gather: Gather) -> bool {
    (1..site.len()).all(|k| match gather {
        Gather::Left => left_ok_with(body, &site[..k], site[k]),
        Gather::Right => right_ok_with(body, &site[..k], site[k]),
    })
}

fn search(
    body: &[Instruction],
    pattern: &[rules::Template],
    site: &mut Vec<usize>,
    bindings: &Bindings,
    left: bool,
    right: bool,
    out: &mut Vec<(Vec<usize>, Bindings, Gather)>,
) {
    let k = site.len();
    if k == pattern.len() {
        out.push((site.clone(), bindings.clone(), if left { Gather::Left } else { Gather::Right }));
        return;
    }
    let start = site.last().map_or(0, |s| s + 1);
    for j in start..body.len() {
        let (l, r) = (left && left_ok_with(body, site, j), right && right_ok_with(body, site, j));
        if !l && !r {
            continue;
        }
        let mut b = bindings.clone();
        if pattern[k].unify(&body[j], &mut b) {
            site.push(j);
            search(body, pattern, site, &b, l, r, out);
            site.pop();
        }
    }
}

fn quantum(bindings: &Bindings, v: Var) -> Qubit {
    match bindings[v] {
        WireRef::Quantum(q) => q,
        WireRef::Classical(_) => panic!("variable {v} is not quantum"),
    }
}

fn classical(bindings: &Bindings, v: Var) -> Cbit {
    match bindings[v] {
        WireRef::Classical(c) => c,
        WireRef::Quantum(_) => panic!("variable {v} is not classical"),
    }
}

fn prep_of(t: PrepT, bindings: &Bindings) -> Prep {
    match t {
        PrepT::Zero => Prep::Zero,
        PrepT::Plus => Prep::Plus,
        PrepT::BellWith(v) => Prep::BellWith(quantum(bindings, v)),
    }
}

fn guard_holds(c: &Circuit, g: &Guard, site: &[usize], pos: usize, bindings: &Bindings) -> bool {
    let body = c.body();
    match *g {
        Guard::Prepared(v, p) => {
            let q = quantum(bindings, v);
            c.prep(q) == Some(prep_of(p, bindings)) && !body[..pos].iter().any(|i| i.touches_qubit(q))
        }
        Guard::Discarded(v) => {
            let q = quantum(bindings, v);
            c.sink(q) == Sink::Discard && (pos..body.len()).all(|k| site.contains(&k) || !body[k].touches_qubit(q))
        }
        Guard::Private(v) => {
            let r = classical(bindings, v);
            c.cbit_role(r) == CbitRole::Scratch && c.readers_of(r).iter().all(|k| site.contains(k))
        }
    }
}

fn guards_hold(c: &Circuit, v: &Variant, d: Direction, site: &[usize], anchor: usize, bindings: &Bindings) -> bool {
    let pos = site.first().copied().unwrap_or(anchor);
    v.guards(d).iter().all(|g| guard_holds(c, g, site, pos, bindings))
}

/// Extends `base` with every injective assignment of the free quantum
/// variables and fresh classical wires for the free classical ones.
fn complete_bindings(c: &Circuit, v: &Variant, d: Direction, base: Bindings) -> Vec<Bindings> {
    let mut fresh = c.num_cbits();
    let mut partial = base;
    let mut quantum_free = Vec::new();
    for (var, is_q) in v.free_vars(d) {
        if is_q {
            quantum_free.push(var);
        } else {
            partial.insert(var, WireRef::Classical(Cbit(fresh)));
            fresh += 1;
        }
    }
    let mut all = vec![partial];
    for var in quantum_free {
        all = all
            .into_iter()
            .flat_map(|b| {
                (0..c.num_qubits())
                    .map(|i| WireRef::Quantum(Qubit(i)))
                    .filter(|w| !b.values().any(|x| x == w))
                    .map(|w| {
                        let mut nb = b.clone();
                        nb.insert(var, w);
                        nb
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    all
}

fn template_matches(c: &Circuit, rule: RuleRef) -> Result<Vec<Match>, EngineError> {
    let v = rules::variant(rule)?;
    let d = rule.direction;
    let pattern = v.pattern(d);
    let mut out = Vec::new();
    if pattern.is_empty() {
        for anchor in 0..=c.body().len() {
            for b in complete_bindings(c, &v, d, Bindings::new()) {
                if guards_hold(c, &v, d, &[], anchor, &b) {
                    out.push(Match { rule, site: vec![], anchor, bindings: b, gather: Gather::Left });
                }
            }
        }
        return Ok(out);
    }
    let mut found = Vec::new();
    search(c.body(), pattern, &mut Vec::new(), &Bindings::new(), true, true, &mut found);
    for (site, base, gather) in found {
        for b in complete_bindings(c, &v, d, base) {
            if guards_hold(c, &v, d, &site, site[0], &b) {
                out.push(Match { rule, site: site.clone(), anchor: site[0], bindings: b, gather });
            }
        }
    }
    Ok(out)
}

fn ancilla_prep(variant: usize) -> Result<Prep, EngineError> {
    match variant {
        0 => Ok(Prep::Zero),
        1 => Ok(Prep::Plus),
        _ => Err(RuleError::UnknownVariant { rule: RuleId::AncillaIntro, variant }.into()),
    }
}

fn ancilla_removable(c: &Circuit, wire: usize, prep: Prep) -> bool {
    wire < c.num_qubits()
        && c.prep(Qubit(wire)) == Some(prep)
        && c.sink(Qubit(wire)) == Sink::Discard
        && c.first_touch(Qubit(wire)).is_none()
}

fn structural_matches(c: &Circuit, rule: RuleRef) -> Result<Vec<Match>, EngineError> {
    let mk = |site: Vec<usize>, anchor| Match { rule, site, anchor, bindings: Bindings::new(), gather: Gather::Left };
    match rule.id {
        RuleId::AncillaIntro => {
            let prep = ancilla_prep(rule.variant)?;
            Ok(match rule.direction {
                Direction::Forward => (0..=c.num_qubits()).map(|k| mk(vec![], k)).collect(),
                Direction::Backward => {
                    (0..c.num_qubits()).filter(|&k| ancilla_removable(c, k, prep)).map(|k| mk(vec![], k)).collect()
                }
            })
        }
        RuleId::CommuteDisjoint => {
            if rule.variant != 0 {
                return Err(RuleError::UnknownVariant { rule: rule.id, variant: rule.variant }.into());
            }
            let body = c.body();
            Ok((0..body.len().saturating_sub(1))
                .filter(|&k| supports_disjoint(&body[k], &body[k + 1]))
                .map(|k| mk(vec![k, k + 1], k))
                .collect())
        }
        _ => unreachable!("not a structural rule"),
    }
}

/// Matches of one rule variant in one direction, ordered by first matched index.
pub fn find_variant_matches(c: &Circuit, rule: RuleRef) -> Result<Vec<Match>, EngineError> {
    if rule.id.is_structural() {
        structural_matches(c, rule)
    } else {
        template_matches(c, rule)
    }
}

/// Matches of every variant of `id` in `direction`, variant by variant.
pub fn find_matches(c: &Circuit, id: RuleId, direction: Direction) -> Result<Vec<Match>, EngineError> {
    let mut all = Vec::new();
    for variant in 0..id.variant_count() {
        all.extend(find_variant_matches(c, RuleRef::new(id, variant, direction))?);
    }
    Ok(all)
}

/// Where a scripted step should apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site<'a> {
    /// Exactly these body indices.
    At(&'a [usize]),
    /// Insertion before this body index (or wire index for ancilla rules).
    Anchor(usize),
}

/// The unique match of `rule` at `site` whose bindings agree with `hints`.
pub fn locate(c: &Circuit, rule: RuleRef, site: Site<'_>, hints: &[(Var, WireRef)]) -> Result<Match, EngineError> {
    let (want_site, want_anchor): (Vec<usize>, Option<usize>) = match site {
        Site::At(s) => (s.to_vec(), None),
        Site::Anchor(a) => (vec![], Some(a)),
    };
    find_variant_matches(c, rule)?
        .into_iter()
        .find(|m| {
            m.site == want_site
                && want_anchor.is_none_or(|a| m.anchor == a)
                && hints.iter().all(|(v, w)| m.bindings.get(v) == Some(w))
        })
        .ok_or(EngineError::NoSuchMatch { rule, site: want_site })
}

fn stale(msg: impl Into<String>) -> EngineError {
    EngineError::Stale(msg.into())
}

fn splice(
    body: &[Instruction],
    site: &[usize],
    gather: Gather,
    anchor: usize,
    rep: &[Instruction],
) -> Vec<Instruction> {
    if site.is_empty() {
        let mut out = body[..anchor].to_vec();
        out.extend_from_slice(rep);
        out.extend_from_slice(&body[anchor..]);
        return out;
    }
    let (first, last) = (site[0], *site.last().unwrap());
    let between: Vec<Instruction> = (first..=last).filter(|i| !site.contains(i)).map(|i| body[i]).collect();
    let mut out = body[..first].to_vec();
    match gather {
        Gather::Left => {
            out.extend_from_slice(rep);
            out.extend(between);
        }
        Gather::Right => {
            out.extend(between);
            out.extend_from_slice(rep);
        }
    }
    out.extend_from_slice(&body[last + 1..]);
    out
}

fn rewrite_template(c: &Circuit, m: &Match) -> Result<Circuit, EngineError> {
    let v = rules::variant(m.rule)?;
    let d = m.rule.direction;
    let (pattern, replacement) = rules::instantiate(m.rule, &m.bindings)?;
    let body = c.body();
    if pattern.len() != m.site.len() {
        return Err(stale("site length differs from pattern length"));
    }
    if m.site.windows(2).any(|w| w[0] >= w[1]) || m.site.last().is_some_and(|&s| s >= body.len()) {
        return Err(stale("site indices out of order or out of range"));
    }
    if m.site.is_empty() && m.anchor > body.len() {
        return Err(stale("anchor out of range"));
    }
    for (k, &s) in m.site.iter().enumerate() {
        if body[s] != pattern[k] {
            return Err(stale(format!("instruction {s} is `{}`, expected `{}`", body[s], pattern[k])));
        }
    }
    if !gatherable(body, &m.site, m.gather) {
        return Err(stale("site cannot be gathered by commutation"));
    }
    let anchor = m.site.first().copied().unwrap_or(m.anchor);
    for (var, is_q) in v.free_vars(d) {
        if !is_q && classical(&m.bindings, var).0 < c.num_cbits() {
            return Err(stale(format!("classical wire for `{var}` is not fresh")));
        }
    }
    if !guards_hold_fresh(c, &v, d, &m.site, anchor, &m.bindings) {
        return Err(stale("rule condition does not hold"));
    }

    let mut b = c.to_builder();
    b.body = splice(body, &m.site, m.gather, anchor, &replacement);
    for (var, is_q) in v.free_vars(d) {
        if !is_q {
            let r = classical(&m.bindings, var);
            while b.num_cbits <= r.0 {
                b.num_cbits += 1;
                b.cbit_roles.push(CbitRole::Scratch);
            }
        }
    }
    for e in &v.effects {
        let q = quantum(&m.bindings, e.wire);
        let target = match d {
            Direction::Forward => e.after,
            Direction::Backward => e.before,
        };
        b.preps[q.0] = Some(prep_of(target, &m.bindings));
    }
    // Classical wires the rewrite stopped using are dropped when they are last.
    let dropped: Vec<Cbit> = v
        .pattern_vars(d)
        .into_iter()
        .filter(|(var, is_q)| !is_q && !v.replacement(d).iter().any(|t| t.vars().contains(&(var, false))))
        .map(|(var, _)| classical(&m.bindings, var))
        .collect();
    while b.num_cbits > 0 {
        let last = Cbit(b.num_cbits - 1);
        if dropped.contains(&last) && !b.body.iter().any(|i| i.touches_cbit(last)) {
            b.num_cbits -= 1;
            b.cbit_roles.pop();
        } else {
            break;
        }
    }
    Ok(b.build()?)
}

/// Guard check that tolerates fresh classical wires beyond the declared range.
fn guards_hold_fresh(c: &Circuit, v: &Variant, d: Direction, site: &[usize], anchor: usize, b: &Bindings) -> bool {
    let in_range = |w: &WireRef| match w {
        WireRef::Quantum(q) => q.0 < c.num_qubits(),
        WireRef::Classical(_) => true,
    };
    b.values().all(in_range) && guards_hold(c, v, d, site, anchor, b)
}

fn shift_qubits(c: &Circuit, map: impl Fn(Qubit) -> Qubit + Copy) -> Vec<Instruction> {
    c.body().iter().map(|i| i.remap(map, |x| x)).collect()
}

fn rewrite_structural(c: &Circuit, m: &Match) -> Result<Circuit, EngineError> {
    match m.rule.id {
        RuleId::AncillaIntro => {
            let prep = ancilla_prep(m.rule.variant)?;
            let k = m.anchor;
            let mut b = c.to_builder();
            match m.rule.direction {
                Direction::Forward => {
                    if k > c.num_qubits() {
                        return Err(stale("wire index out of range"));
                    }
                    let up = move |q: Qubit| if q.0 >= k { Qubit(q.0 + 1) } else { q };
                    b.body = shift_qubits(c, up);
                    b.preps = b.preps.iter().map(|p| p.map(|p| shift_prep(p, up))).collect();
                    b.preps.insert(k, Some(prep));
                    b.sinks.insert(k, Some(Sink::Discard));
                    b.num_qubits += 1;
                }
                Direction::Backward => {
                    if !ancilla_removable(c, k, prep) {
                        return Err(stale(format!("q{k} is not an idle discarded ancilla")));
                    }
                    let down = move |q: Qubit| if q.0 > k { Qubit(q.0 - 1) } else { q };
                    b.body = shift_qubits(c, down);
                    b.preps.remove(k);
                    b.sinks.remove(k);
                    b.preps = b.preps.iter().map(|p| p.map(|p| shift_prep(p, down))).collect();
                    b.num_qubits -= 1;
                }
            }
            Ok(b.build()?)
        }
        RuleId::CommuteDisjoint => {
            let body = c.body();
            match m.site[..] {
                [i, j] if j == i + 1 && j < body.len() && supports_disjoint(&body[i], &body[j]) => {
                    let mut nb = body.to_vec();
                    nb.swap(i, j);
                    Ok(c.with_body(nb)?)
                }
                _ => Err(stale("site is not an adjacent disjoint pair")),
            }
        }
        _ => unreachable!("not a structural rule"),
    }
}

fn shift_prep(p: Prep, f: impl Fn(Qubit) -> Qubit) -> Prep {
    match p {
        Prep::BellWith(o) => Prep::BellWith(f(o)),
        other => other,
    }
}

/// Applies a match. Fails if the match does not fit the circuit.
pub fn rewrite_at(c: &Circuit, m: &Match) -> Result<Circuit, EngineError> {
    if m.rule.id.is_structural() {
        rewrite_structural(c, m)
    } else {
        rewrite_template(c, m)
    }
}

/// The match that undoes `m`, located in `after`, the result of applying `m`.
/// The replacement sits contiguously where the gathered pattern was placed.
pub fn inverse_match(m: &Match, after: &Circuit) -> Result<Match, EngineError> {
    let rule = m.rule.reversed();
    if m.rule.id.is_structural() {
        return Ok(Match { rule, ..m.clone() });
    }
    let v = rules::variant(m.rule)?;
    let d = m.rule.direction;
    let rep_len = v.replacement(d).len();
    let start = match (m.site.first(), m.site.last()) {
        (None, _) => m.anchor,
        (Some(&first), Some(&last)) => match m.gather {
            Gather::Left => first,
            Gather::Right => first + (last - first + 1 - m.site.len()),
        },
        _ => unreachable!(),
    };
    let mut bindings = m.bindings.clone();
    let mut fresh = after.num_cbits();
    for (var, is_q) in v.free_vars(rule.direction) {
        if !is_q {
            bindings.insert(var, WireRef::Classical(Cbit(fresh)));
            fresh += 1;
        }
    }
    Ok(Match { rule, site: (start..start + rep_len).collect(), anchor: start, bindings, gather: Gather::Left })
}

/// Applies a match and checks that the channel is unchanged.
pub fn rewrite_verified(c: &Circuit, m: &Match) -> Result<Circuit, EngineError> {
    let out = rewrite_at(c, m)?;
    if !channel_equal(&sim::extract_channel(c)?, &sim::extract_channel(&out)?)? {
        return Err(EngineError::VerificationFailed { step: 1, rule: m.rule });
    }
    Ok(out)
}

/// Outcome of a step's channel check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verification {
    Verified,
    Skipped,
    Failed,
}

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verification::Verified => "VERIFIED",
            Verification::Skipped => "UNVERIFIED",
            Verification::Failed => "FAILED",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub circuit: Circuit,
    /// `None` for the starting circuit.
    pub applied: Option<Match>,
    pub verification: Verification,
}

/// A sequence of rewrites, each checked against the starting circuit.
#[derive(Debug, Clone)]
pub struct DerivationTrace {
    steps: Vec<TraceStep>,
    reference: Option<Channel>,
    verify: bool,
}

impl DerivationTrace {
    pub fn new(start: Circuit, verify: bool) -> Result<Self, EngineError> {
        let reference = if verify { Some(sim::extract_channel(&start)?) } else { None };
        let step = TraceStep { circuit: start, applied: None, verification: Verification::Verified };
        Ok(DerivationTrace { steps: vec![step], reference, verify })
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    /// Number of applied rewrites.
    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> &Circuit {
        &self.steps[0].circuit
    }

    pub fn current(&self) -> &Circuit {
        &self.steps.last().expect("trace has a start").circuit
    }

    pub fn all_verified(&self) -> bool {
        self.steps.iter().all(|s| s.verification == Verification::Verified)
    }

    /// Rewrites the current circuit. A failed check is recorded and reported as an error.
    pub fn apply(&mut self, m: Match) -> Result<&Circuit, EngineError> {
        let next = rewrite_at(self.current(), &m)?;
        let verification = match &self.reference {
            Some(reference) => {
                let ok = channel_equal(reference, &sim::extract_channel(&next)?)?;
                if ok {
                    Verification::Verified
                } else {
                    Verification::Failed
                }
            }
            None => Verification::Skipped,
        };
        let rule = m.rule;
        self.steps.push(TraceStep { circuit: next, applied: Some(m), verification });
        if verification == Verification::Failed {
            return Err(EngineError::VerificationFailed { step: self.len(), rule });
        }
        Ok(self.current())
    }

    /// Locates and applies a scripted step.
    pub fn step(&mut self, rule: RuleRef, site: Site<'_>, hints: &[(Var, WireRef)]) -> Result<&Circuit, EngineError> {
        let m = locate(self.current(), rule, site, hints)?;
        self.apply(m)
    }

    pub fn verifying(&self) -> bool {
        self.verify
    }

    /// Numbered steps with the serialized circuit after each.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, s) in self.steps.iter().enumerate() {
            match &s.applied {
                None => out.push_str(&format!("step {k}: start\n")),
                Some(m) => out.push_str(&format!("step {k}: {m} {}\n", s.verification)),
            }
            for line in serialize(&s.circuit).lines() {
                out.push_str("    ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }
}

/// Rule order tried by [`simplify`]. Every entry removes at least one quantum gate.
pub const SIMPLIFY_ORDER: [(RuleId, Direction); 5] = [
    (RuleId::R1InverseCancel, Direction::Forward),
    (RuleId::R1ControlZero, Direction::Forward),
    (RuleId::R1TargetPlus, Direction::Forward),
    (RuleId::R3DeferMeasure, Direction::Backward),
    (RuleId::R4XorSubstitute, Direction::Forward),
];

/// Greedy fixpoint of [`SIMPLIFY_ORDER`], verifying every step.
pub fn simplify(c: &Circuit) -> Result<(Circuit, DerivationTrace), EngineError> {
    simplify_with(c, true)
}

/// [`simplify`] with the per-step channel check optional.
pub fn simplify_with(c: &Circuit, verify: bool) -> Result<(Circuit, DerivationTrace), EngineError> {
    let mut trace = DerivationTrace::new(c.clone(), verify)?;
    'outer: loop {
        for (id, d) in SIMPLIFY_ORDER {
            if let Some(m) = find_matches(trace.current(), id, d)?.into_iter().next() {
                trace.apply(m)?;
                continue 'outer;
            }
        }
        break;
    }
    Ok((trace.current().clone(), trace))
}

/// Moves every classically controlled gate before its measurement (quantum
/// control, then measure) until none remain. The result has only terminal
/// measurements and no classical instructions.
pub fn defer_measurements(c: &Circuit) -> Result<(Circuit, Vec<Match>), EngineError> {
    let mut current = c.clone();
    let mut applied = Vec::new();
    loop {
        let m = find_matches(&current, RuleId::R3DeferMeasure, Direction::Forward)?.into_iter().next();
        match m {
            Some(m) => {
                current = rewrite_at(&current, &m)?;
                applied.push(m);
            }
            None => break,
        }
    }
    if let Some(i) = current
        .body()
        .iter()
        .find(|i| matches!(i, Instruction::ClassicalCtrl { .. } | Instruction::ClassicalXor { .. }))
    {
        return Err(EngineError::NotDeferrable(format!("`{i}` remains")));
    }
    Ok((current, applied))
}
