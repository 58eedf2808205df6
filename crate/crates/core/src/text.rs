//! Line-oriented circuit source format.
//!
//! ```text
//! # teleport one qubit
//! qubits 3
//! cbits 2
//! BELL q1 q2
//! CNOT q0 q1
//! H q0
//! MEASURE q0 c0
//! MEASURE q1 c1
//! CX c1 q2
//! CZC c0 q2
//! ```
//!
//! The two header lines come first. Declarations (`PREP`, `BELL`, `INPUT`,
//! `OUTPUT`, `DISCARD`, `REPORT`, `SCRATCH`) may appear anywhere after the
//! header; body lines execute in file order.

use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{
    Cbit, CbitRole, Circuit, CircuitBuilder, CircuitError, CtrlKind, Gate1Kind, Gate2Kind, Instruction, Prep, Qubit,
    Sink,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error(transparent)]
    Invalid(#[from] CircuitError),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, kind: ParseErrorKind::Syntax(msg.into()) }
}

fn invalid(line: usize, err: CircuitError) -> ParseError {
    ParseError { line, kind: ParseErrorKind::Invalid(err) }
}

fn wire_index(tok: &str, prefix: char, line: usize) -> Result<usize, ParseError> {
    let digits =
        tok.strip_prefix(prefix).ok_or_else(|| syntax(line, format!("expected {prefix}<index>, found `{tok}`")))?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(syntax(line, format!("expected {prefix}<index>, found `{tok}`")));
    }
    digits.parse().map_err(|_| syntax(line, format!("wire index out of range in `{tok}`")))
}

fn count(tokens: &[&str], keyword: &str, line: usize) -> Result<usize, ParseError> {
    match tokens {
        [k, n] if *k == keyword => n.parse().map_err(|_| syntax(line, format!("bad count `{n}`"))),
        _ => Err(syntax(line, format!("expected `{keyword} <count>`"))),
    }
}

enum Decl {
    Prep(usize, Prep),
    Bell(usize, usize),
    Input(usize),
    Sink(usize, Sink),
    Role(usize, CbitRole),
}

fn parse_body_line(tokens: &[&str], line: usize) -> Result<Option<Instruction>, ParseError> {
    let q = |t: &str| wire_index(t, 'q', line);
    let c = |t: &str| wire_index(t, 'c', line);
    let instr = match tokens {
        ["H", a] => Instruction::Gate1 { kind: Gate1Kind::H, target: Qubit(q(a)?) },
        ["X", a] => Instruction::Gate1 { kind: Gate1Kind::X, target: Qubit(q(a)?) },
        ["Z", a] => Instruction::Gate1 { kind: Gate1Kind::Z, target: Qubit(q(a)?) },
        ["CNOT", a, b] => Instruction::Gate2 { kind: Gate2Kind::Cnot, control: Qubit(q(a)?), target: Qubit(q(b)?) },
        ["CZ", a, b] => Instruction::Gate2 { kind: Gate2Kind::Cz, control: Qubit(q(a)?), target: Qubit(q(b)?) },
        ["MEASURE", a, r] => Instruction::Measure { target: Qubit(q(a)?), result: Cbit(c(r)?) },
        ["CX", r, a] => Instruction::ClassicalCtrl { kind: CtrlKind::X, control: Cbit(c(r)?), target: Qubit(q(a)?) },
        ["CZC", r, a] => Instruction::ClassicalCtrl { kind: CtrlKind::Z, control: Cbit(c(r)?), target: Qubit(q(a)?) },
        ["XOR", a, b, o] => Instruction::ClassicalXor { a: Cbit(c(a)?), b: Cbit(c(b)?), out: Cbit(c(o)?) },
        _ => return Ok(None),
    };
    Ok(Some(instr))
}

fn parse_decl(tokens: &[&str], line: usize) -> Result<Option<Decl>, ParseError> {
    let q = |t: &str| wire_index(t, 'q', line);
    let c = |t: &str| wire_index(t, 'c', line);
    let decl = match tokens {
        ["PREP", a, "0"] => Decl::Prep(q(a)?, Prep::Zero),
        ["PREP", a, "+"] => Decl::Prep(q(a)?, Prep::Plus),
        ["PREP", _, other] => return Err(syntax(line, format!("unknown preparation `{other}`"))),
        ["BELL", a, b] => Decl::Bell(q(a)?, q(b)?),
        ["INPUT", a] => Decl::Input(q(a)?),
        ["OUTPUT", a] => Decl::Sink(q(a)?, Sink::Output),
        ["DISCARD", a] => Decl::Sink(q(a)?, Sink::Discard),
        ["REPORT", r] => Decl::Role(c(r)?, CbitRole::Report),
        ["SCRATCH", r] => Decl::Role(c(r)?, CbitRole::Scratch),
        _ => return Ok(None),
    };
    Ok(Some(decl))
}

/// Parses and validates circuit source text.
pub fn parse(text: &str) -> Result<Circuit, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (qline, qtext) = lines.next().ok_or_else(|| syntax(1, "missing `qubits` header"))?;
    let num_qubits = count(&qtext.split_whitespace().collect::<Vec<_>>(), "qubits", qline)?;
    let (cline, ctext) = lines.next().ok_or_else(|| syntax(qline + 1, "missing `cbits` header"))?;
    let num_cbits = count(&ctext.split_whitespace().collect::<Vec<_>>(), "cbits", cline)?;

    let mut decls = Vec::new();
    let mut body = Vec::new();
    for (line, text) in lines {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if let Some(instr) = parse_body_line(&tokens, line)? {
            body.push((line, instr));
        } else if let Some(decl) = parse_decl(&tokens, line)? {
            decls.push((line, decl));
        } else {
            return Err(syntax(line, format!("unrecognized statement `{text}`")));
        }
    }

    let mut builder = CircuitBuilder::new(num_qubits, num_cbits);
    let mut inputs = Vec::new();
    for (line, decl) in decls {
        let result = match decl {
            Decl::Prep(q, p) => builder.prep(q, p).map(drop),
            Decl::Bell(a, b) => builder.bell(a, b).map(drop),
            Decl::Input(q) => {
                inputs.push((line, q));
                Ok(())
            }
            Decl::Sink(q, s) => builder.sink(q, s).map(drop),
            Decl::Role(c, r) => builder.cbit_role(c, r).map(drop),
        };
        result.map_err(|e| invalid(line, e))?;
    }

    // Validate the body line by line so errors carry their source line.
    let mut assigned = vec![false; num_cbits];
    for (line, instr) in &body {
        builder.check_instruction(instr, &mut assigned).map_err(|e| invalid(*line, e))?;
        builder.push(*instr);
    }
    let circuit = builder.build().map_err(|e| invalid(cline, e))?;

    for (line, q) in inputs {
        if q >= num_qubits {
            return Err(invalid(line, CircuitError::UndeclaredWire(crate::circuit::WireRef::Quantum(Qubit(q)))));
        }
        if circuit.prep(Qubit(q)).is_some() {
            return Err(invalid(line, CircuitError::PrepOnInput(Qubit(q))));
        }
    }
    Ok(circuit)
}

/// Canonical source text: header, preparations, non-default roles, then the body.
pub fn serialize(c: &Circuit) -> String {
    let mut out = format!("qubits {}\ncbits {}", c.num_qubits(), c.num_cbits());
    for q in 0..c.num_qubits() {
        match c.prep(Qubit(q)) {
            Some(Prep::Zero) => write!(out, "\nPREP q{q} 0").unwrap(),
            Some(Prep::Plus) => write!(out, "\nPREP q{q} +").unwrap(),
            Some(Prep::BellWith(other)) if other.0 > q => write!(out, "\nBELL q{q} {other}").unwrap(),
            _ => {}
        }
    }
    let measured = c.measured_qubits();
    for q in (0..c.num_qubits()).map(Qubit) {
        let default = if measured.contains(&q) { Sink::Discard } else { Sink::Output };
        match c.sink(q) {
            s if s == default => {}
            Sink::Output => write!(out, "\nOUTPUT {q}").unwrap(),
            Sink::Discard => write!(out, "\nDISCARD {q}").unwrap(),
        }
    }
    for r in c.reported_cbits() {
        write!(out, "\nREPORT {r}").unwrap();
    }
    for instr in c.body() {
        write!(out, "\n{instr}").unwrap();
    }
    out
}
