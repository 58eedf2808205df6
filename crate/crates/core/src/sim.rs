//! Exact circuit execution.
//!
//! Amplitude index convention: qubit 0 is the most significant bit, so the
//! basis state |q0 q1 … q(n-1)⟩ sits at index `q0·2^(n-1) + … + q(n-1)`.
//!
//! Measurements split the evolution into [`Branch`]es rather than sampling, so
//! every conditional state stays inspectable. Channels are assembled from the
//! branches of each input basis state.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Cbit, Circuit, CircuitBuilder, CtrlKind, Gate1Kind, Gate2Kind, Instruction, Prep, Qubit, Sink};
use crate::linalg::{Matrix, ONE, ZERO};

/// Entrywise equality tolerance.
pub const EQ_TOL: f64 = 1e-9;
/// Branches with probability at or below this are dropped.
pub const PRUNE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("amplitude vector length {0} is not a power of two")]
    BadLength(usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("`{0}` is not a unitary gate")]
    NotAGate(Instruction),
    #[error("circuit contains non-unitary instruction `{0}`")]
    NonUnitary(Instruction),
    #[error("circuit prepares wire {0}; a pure gate circuit is required")]
    PreparedWire(Qubit),
    #[error("classical wire {0} read before assignment")]
    UnassignedCbit(Cbit),
    #[error("measurement of {0} is followed by further use of the wire")]
    NonTerminalMeasurement(Qubit),
}

/// Normalized pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        StateVector { num_qubits, amps }
    }

    /// Wraps amplitudes that are already normalized within [`EQ_TOL`].
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(SimError::BadLength(len));
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > EQ_TOL {
            return Err(SimError::NotNormalized(norm_sqr));
        }
        Ok(StateVector { num_qubits: len.trailing_zeros() as usize, amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self, SimError> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(SimError::NotNormalized(norm * norm));
        }
        StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
    }

    /// Product state from one `(α, β)` pair per qubit.
    pub fn product(qubits: &[(Complex64, Complex64)]) -> Result<Self, SimError> {
        let mut amps = vec![ONE];
        for (a, b) in qubits {
            amps = amps.iter().flat_map(|x| [x * a, x * b]).collect();
        }
        StateVector::normalized(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr()
    }
}

#[inline]
fn mask(num_qubits: usize, q: Qubit) -> usize {
    1 << (num_qubits - 1 - q.0)
}

/// Applies a unitary gate in place. Wires must be in range.
pub(crate) fn apply_in_place(amps: &mut [Complex64], num_qubits: usize, instr: &Instruction) {
    match *instr {
        Instruction::Gate1 { kind, target } => {
            let m = mask(num_qubits, target);
            for i in (0..amps.len()).filter(|i| i & m == 0) {
                let (a0, a1) = (amps[i], amps[i | m]);
                let (b0, b1) = match kind {
                    Gate1Kind::H => ((a0 + a1) * FRAC_1_SQRT_2, (a0 - a1) * FRAC_1_SQRT_2),
                    Gate1Kind::X => (a1, a0),
                    Gate1Kind::Z => (a0, -a1),
                };
                amps[i] = b0;
                amps[i | m] = b1;
            }
        }
        Instruction::Gate2 { kind, control, target } => {
            let (mc, mt) = (mask(num_qubits, control), mask(num_qubits, target));
            for i in (0..amps.len()).filter(|i| i & mc != 0 && i & mt == 0) {
                match kind {
                    Gate2Kind::Cnot => amps.swap(i, i | mt),
                    Gate2Kind::Cz => amps[i | mt] = -amps[i | mt],
                }
            }
        }
        _ => unreachable!("apply_in_place called with {instr}"),
    }
}

fn check_wires(num_qubits: usize, instr: &Instruction) -> Result<(), SimError> {
    for q in instr.qubits() {
        if q.0 >= num_qubits {
            return Err(SimError::DimensionMismatch { expected: q.0 + 1, found: num_qubits });
        }
    }
    Ok(())
}

/// Exact action of one H, X, Z, CNOT or CZ gate.
pub fn apply_gate(state: &StateVector, instr: &Instruction) -> Result<StateVector, SimError> {
    if !instr.is_unitary_gate() {
        return Err(SimError::NotAGate(*instr));
    }
    check_wires(state.num_qubits, instr)?;
    let mut out = state.clone();
    apply_in_place(&mut out.amps, out.num_qubits, instr);
    Ok(out)
}

/// One measurement history.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// Value of each classical wire; `None` until assigned.
    pub outcome: Vec<Option<bool>>,
    pub probability: f64,
    /// Post-measurement state of all quantum wires, renormalized.
    pub state: StateVector,
}

impl Branch {
    /// Outcome as a string of `0`/`1`/`-` per classical wire.
    pub fn outcome_label(&self) -> String {
        outcome_label(&self.outcome)
    }
}

pub(crate) fn outcome_label(outcome: &[Option<bool>]) -> String {
    outcome
        .iter()
        .map(|b| match b {
            Some(true) => '1',
            Some(false) => '0',
            None => '-',
        })
        .collect()
}

/// Unnormalized branch used for linear channel assembly.
#[derive(Debug, Clone)]
pub(crate) struct RawBranch {
    pub outcome: Vec<Option<bool>>,
    pub amps: Vec<Complex64>,
}

/// Joint initial amplitudes: the input state on input wires, preparations elsewhere.
pub(crate) fn initial_amplitudes(c: &Circuit, input: &StateVector) -> Result<Vec<Complex64>, SimError> {
    let inputs = c.inputs();
    if input.num_qubits() != inputs.len() {
        return Err(SimError::DimensionMismatch { expected: inputs.len(), found: input.num_qubits() });
    }
    let n = c.num_qubits();
    let bit = |idx: usize, q: Qubit| (idx >> (n - 1 - q.0)) & 1;
    let amps = (0..1usize << n)
        .map(|idx| {
            let in_idx = inputs.iter().fold(0, |acc, q| (acc << 1) | bit(idx, *q));
            let mut amp = input.amps[in_idx];
            for q in (0..n).map(Qubit) {
                match c.prep(q) {
                    None => {}
                    Some(Prep::Zero) if bit(idx, q) == 1 => amp = ZERO,
                    Some(Prep::Zero) => {}
                    Some(Prep::Plus) => amp *= FRAC_1_SQRT_2,
                    Some(Prep::BellWith(o)) if o.0 > q.0 => {
                        amp *= if bit(idx, q) == bit(idx, o) { FRAC_1_SQRT_2 } else { 0.0 };
                    }
                    Some(Prep::BellWith(_)) => {}
                }
            }
            amp
        })
        .collect();
    Ok(amps)
}

/// Runs the body on unnormalized amplitudes, splitting at every measurement.
pub(crate) fn evolve(c: &Circuit, amps: Vec<Complex64>) -> Result<Vec<RawBranch>, SimError> {
    let n = c.num_qubits();
    let mut branches = vec![RawBranch { outcome: vec![None; c.num_cbits()], amps }];
    for instr in c.body() {
        match *instr {
            Instruction::Gate1 { .. } | Instruction::Gate2 { .. } => {
                for b in &mut branches {
                    apply_in_place(&mut b.amps, n, instr);
                }
            }
            Instruction::Measure { target, result } => {
                let m = mask(n, target);
                let mut next = Vec::with_capacity(branches.len() * 2);
                for b in branches {
                    for value in [false, true] {
                        let amps: Vec<Complex64> = b
                            .amps
                            .iter()
                            .enumerate()
                            .map(|(i, a)| if (i & m != 0) == value { *a } else { ZERO })
                            .collect();
                        if amps.iter().map(|a| a.norm_sqr()).sum::<f64>() > PRUNE_TOL {
                            let mut outcome = b.outcome.clone();
                            outcome[result.0] = Some(value);
                            next.push(RawBranch { outcome, amps });
                        }
                    }
                }
                branches = next;
            }
            Instruction::ClassicalCtrl { kind, control, target } => {
                let gate = match kind {
                    CtrlKind::X => Instruction::Gate1 { kind: Gate1Kind::X, target },
                    CtrlKind::Z => Instruction::Gate1 { kind: Gate1Kind::Z, target },
                };
                for b in &mut branches {
                    if b.outcome[control.0].ok_or(SimError::UnassignedCbit(control))? {
                        apply_in_place(&mut b.amps, n, &gate);
                    }
                }
            }
            Instruction::ClassicalXor { a, b: bb, out } => {
                for br in &mut branches {
                    let x = br.outcome[a.0].ok_or(SimError::UnassignedCbit(a))?;
                    let y = br.outcome[bb.0].ok_or(SimError::UnassignedCbit(bb))?;
                    br.outcome[out.0] = Some(x ^ y);
                }
            }
        }
    }
    Ok(branches)
}

/// Executes `c` on `input` (a state over the circuit's input wires, ascending).
pub fn run(c: &Circuit, input: &StateVector) -> Result<Vec<Branch>, SimError> {
    let norm = input.norm_sqr();
    if (norm - 1.0).abs() > EQ_TOL {
        return Err(SimError::NotNormalized(norm));
    }
    let amps = initial_amplitudes(c, input)?;
    let branches = evolve(c, amps)?;
    Ok(branches
        .into_iter()
        .map(|b| {
            let p: f64 = b.amps.iter().map(|a| a.norm_sqr()).sum();
            let scale = 1.0 / p.sqrt();
            Branch {
                outcome: b.outcome,
                probability: p,
                state: StateVector {
                    num_qubits: c.num_qubits(),
                    amps: b.amps.into_iter().map(|a| a * scale).collect(),
                },
            }
        })
        .collect())
}

/// Product of the per-gate matrices, built column by column from basis states.
pub(crate) fn gate_unitary(num_qubits: usize, gates: &[Instruction]) -> Matrix {
    let dim = 1 << num_qubits;
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| {
            let mut col = StateVector::basis(num_qubits, j).amps;
            for g in gates {
                apply_in_place(&mut col, num_qubits, g);
            }
            col
        })
        .collect();
    Matrix::from_columns(dim, &columns)
}

/// Unitary of a pure gate circuit, `U = U_k ⋯ U_1`.
pub fn build_unitary(c: &Circuit) -> Result<Matrix, SimError> {
    if let Some(q) = (0..c.num_qubits()).map(Qubit).find(|q| c.prep(*q).is_some()) {
        return Err(SimError::PreparedWire(q));
    }
    if let Some(instr) = c.body().iter().find(|i| !i.is_unitary_gate()) {
        return Err(SimError::NonUnitary(*instr));
    }
    Ok(gate_unitary(c.num_qubits(), c.body()))
}

/// Unitary of a bare gate list on `num_qubits` wires.
pub fn unitary_of(num_qubits: usize, gates: &[Instruction]) -> Result<Matrix, SimError> {
    let mut b = CircuitBuilder::new(num_qubits, 0);
    b.extend(gates.iter().copied());
    let c = b.build().map_err(|_| SimError::DimensionMismatch { expected: num_qubits, found: num_qubits })?;
    build_unitary(&c)
}

/// A completely positive trace-preserving map from the input wires to the
/// output wires, given by Kraus operators and the derived Choi matrix.
#[derive(Debug, Clone)]
pub struct Channel {
    input_dim: usize,
    output_dim: usize,
    kraus: Vec<Matrix>,
    choi: Matrix,
}

impl Channel {
    pub fn from_kraus(input_dim: usize, output_dim: usize, kraus: Vec<Matrix>) -> Self {
        let mut choi = Matrix::zeros(input_dim * output_dim, input_dim * output_dim);
        for k in &kraus {
            assert_eq!((k.rows(), k.cols()), (output_dim, input_dim), "Kraus operator shape");
            let v: Vec<Complex64> =
                (0..input_dim).flat_map(|i| (0..output_dim).map(move |o| (i, o))).map(|(i, o)| k[(o, i)]).collect();
            choi.add_outer(&v);
        }
        Channel { input_dim, output_dim, kraus, choi }
    }

    /// Channel of a unitary (or isometry) `u`.
    pub fn from_unitary(u: &Matrix) -> Self {
        Channel::from_kraus(u.cols(), u.rows(), vec![u.clone()])
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    /// `Σ_b vec(K_b) vec(K_b)†` with `vec(K)[i·d_out + o] = K[o, i]`.
    pub fn choi(&self) -> &Matrix {
        &self.choi
    }

    /// Largest entrywise deviation of `Σ K†K` from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = Matrix::zeros(self.input_dim, self.input_dim);
        for k in &self.kraus {
            let p = &k.adjoint() * k;
            for r in 0..self.input_dim {
                for c in 0..self.input_dim {
                    sum[(r, c)] += p[(r, c)];
                }
            }
        }
        sum.max_abs_diff(&Matrix::identity(self.input_dim))
    }

    /// Output density matrix for input state `rho_in`.
    pub fn apply(&self, rho_in: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.output_dim, self.output_dim);
        for k in &self.kraus {
            let t = &(k * rho_in) * &k.adjoint();
            for r in 0..self.output_dim {
                for c in 0..self.output_dim {
                    out[(r, c)] += t[(r, c)];
                }
            }
        }
        out
    }
}

/// Splits a full basis index into (output index, discard index).
fn split_index(n: usize, outputs: &[Qubit], discards: &[Qubit], idx: usize) -> (usize, usize) {
    let bit = |q: &Qubit| (idx >> (n - 1 - q.0)) & 1;
    (outputs.iter().fold(0, |a, q| (a << 1) | bit(q)), discards.iter().fold(0, |a, q| (a << 1) | bit(q)))
}

fn collect_kraus(
    input_dim: usize,
    output_dim: usize,
    columns: BTreeMap<(Vec<u8>, usize), Vec<Vec<Complex64>>>,
) -> Channel {
    let kraus = columns
        .into_values()
        .map(|cols| Matrix::from_columns(output_dim, &cols))
        .filter(|k| (0..k.rows()).any(|r| k.row(r).iter().any(|v| v.norm_sqr() > 0.0)))
        .collect();
    Channel::from_kraus(input_dim, output_dim, kraus)
}

/// Channel from input wires to output wires, forgetting classical outcomes and
/// tracing out discarded wires. One Kraus operator per (outcome, discard basis
/// state) pair.
pub fn extract_channel(c: &Circuit) -> Result<Channel, SimError> {
    let n = c.num_qubits();
    let (inputs, outputs, discards) = (c.inputs(), c.outputs(), c.discards());
    let (d_in, d_out) = (1 << inputs.len(), 1 << outputs.len());
    let mut columns: BTreeMap<(Vec<u8>, usize), Vec<Vec<Complex64>>> = BTreeMap::new();
    for j in 0..d_in {
        let amps = initial_amplitudes(c, &StateVector::basis(inputs.len(), j))?;
        for branch in evolve(c, amps)? {
            let key: Vec<u8> = branch.outcome.iter().map(|b| b.map_or(2, u8::from)).collect();
            for (idx, amp) in branch.amps.iter().enumerate() {
                if *amp == ZERO {
                    continue;
                }
                let (o, d) = split_index(n, &outputs, &discards, idx);
                let cols = columns.entry((key.clone(), d)).or_insert_with(|| vec![vec![ZERO; d_out]; d_in]);
                cols[j][o] = *amp;
            }
        }
    }
    Ok(collect_kraus(d_in, d_out, columns))
}

/// Channel computed without branch enumeration: one unitary for all gates,
/// then projections. Requires no classical instructions and every measurement
/// to be the last operation on its wire.
pub fn unitary_channel(c: &Circuit) -> Result<Channel, SimError> {
    let n = c.num_qubits();
    for (k, instr) in c.body().iter().enumerate() {
        match instr {
            Instruction::ClassicalCtrl { .. } | Instruction::ClassicalXor { .. } => {
                return Err(SimError::NonUnitary(*instr));
            }
            Instruction::Measure { target, .. } if c.body()[k + 1..].iter().any(|i| i.touches_qubit(*target)) => {
                return Err(SimError::NonTerminalMeasurement(*target));
            }
            _ => {}
        }
    }
    let gates: Vec<Instruction> = c.body().iter().filter(|i| i.is_unitary_gate()).copied().collect();
    let u = gate_unitary(n, &gates);
    let (inputs, outputs, discards) = (c.inputs(), c.outputs(), c.discards());
    let measured_outputs: Vec<Qubit> = c.measured_qubits().into_iter().filter(|q| c.sink(*q) == Sink::Output).collect();
    let (d_in, d_out) = (1 << inputs.len(), 1 << outputs.len());
    let mut columns: BTreeMap<(Vec<u8>, usize), Vec<Vec<Complex64>>> = BTreeMap::new();
    for j in 0..d_in {
        let psi = u.mul_vec(&initial_amplitudes(c, &StateVector::basis(inputs.len(), j))?);
        for (idx, amp) in psi.iter().enumerate() {
            if *amp == ZERO {
                continue;
            }
            // Measuring an output wire dephases it: the outcome labels the Kraus operator.
            let key: Vec<u8> = measured_outputs.iter().map(|q| ((idx >> (n - 1 - q.0)) & 1) as u8).collect();
            let (o, d) = split_index(n, &outputs, &discards, idx);
            let cols = columns.entry((key, d)).or_insert_with(|| vec![vec![ZERO; d_out]; d_in]);
            cols[j][o] = *amp;
        }
    }
    Ok(collect_kraus(d_in, d_out, columns))
}
