//! Circuit equivalence: exact or up-to-phase unitary equality, channel
//! equality through Choi matrices, and a brute-force oracle that compares
//! output density matrices on a fixed probe set.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Circuit, Qubit};
use crate::linalg::{Matrix, ONE, ZERO};
use crate::sim::{self, Channel, SimError, StateVector, EQ_TOL};

/// Tolerance for oracle density-matrix comparison.
pub const ORACLE_TOL: f64 = 1e-8;
/// Number of seeded random probe states used by the oracle.
pub const ORACLE_RANDOM_PROBES: usize = 20;
const ORACLE_SEED: u64 = 0x0b5e_55ed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },
    #[error("role mismatch: {0}")]
    RoleMismatch(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn shape(m: &Matrix) -> String {
    format!("{}x{}", m.rows(), m.cols())
}

/// Entrywise comparison within 1e-9. With `up_to_phase`, `b` is first
/// rotated by the phase that aligns its largest-modulus entry with `a`.
pub fn unitary_equal(a: &Matrix, b: &Matrix, up_to_phase: bool) -> Result<bool, EquivError> {
    if !a.same_shape(b) {
        return Err(EquivError::DimensionMismatch { left: shape(a), right: shape(b) });
    }
    Ok(phase_aligned(a, b, up_to_phase).max_abs_diff(a) <= EQ_TOL)
}

fn phase_aligned(a: &Matrix, b: &Matrix, up_to_phase: bool) -> Matrix {
    if !up_to_phase {
        return b.clone();
    }
    let idx = b.argmax_abs();
    let (ra, rb) = (a[idx], b[idx]);
    if ra.norm() == 0.0 || rb.norm() == 0.0 {
        return b.clone();
    }
    let phase = (ra / rb) / (ra / rb).norm();
    b.scale(phase)
}

/// First basis column on which `a` and `b` disagree, if any.
pub fn first_differing_column(a: &Matrix, b: &Matrix, up_to_phase: bool) -> Result<Option<usize>, EquivError> {
    if !a.same_shape(b) {
        return Err(EquivError::DimensionMismatch { left: shape(a), right: shape(b) });
    }
    let b = phase_aligned(a, b, up_to_phase);
    Ok((0..a.cols()).find(|&c| (0..a.rows()).any(|r| (a[(r, c)] - b[(r, c)]).norm() > EQ_TOL)))
}

/// Choi matrices equal entrywise within 1e-9.
pub fn channel_equal(a: &Channel, b: &Channel) -> Result<bool, EquivError> {
    if a.input_dim() != b.input_dim() || a.output_dim() != b.output_dim() {
        return Err(EquivError::DimensionMismatch {
            left: format!("{}->{}", a.input_dim(), a.output_dim()),
            right: format!("{}->{}", b.input_dim(), b.output_dim()),
        });
    }
    Ok(a.choi().max_abs_diff(b.choi()) <= EQ_TOL)
}

/// Extracts both channels and compares them.
pub fn circuits_channel_equal(a: &Circuit, b: &Circuit) -> Result<bool, EquivError> {
    channel_equal(&sim::extract_channel(a)?, &sim::extract_channel(b)?)
}

/// Single-qubit states used on one input wire at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisState {
    Plus,
    Minus,
    PlusI,
}

impl AxisState {
    fn amplitudes(self) -> (Complex64, Complex64) {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            AxisState::Plus => (s, s),
            AxisState::Minus => (s, -s),
            AxisState::PlusI => (s, Complex64::new(0.0, FRAC_1_SQRT_2)),
        }
    }
}

/// An input state from the oracle's probe set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    Basis { index: usize, width: usize },
    Axis { wire: Qubit, state: AxisState },
    Random(usize),
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Probe::Basis { index, width } => {
                let bits: String =
                    (0..width).map(|k| if (index >> (width - 1 - k)) & 1 == 1 { '1' } else { '0' }).collect();
                write!(f, "|{bits}⟩")
            }
            Probe::Axis { wire, state } => {
                let label = match state {
                    AxisState::Plus => "+",
                    AxisState::Minus => "-",
                    AxisState::PlusI => "+i",
                };
                write!(f, "|{label}⟩ on input {wire}, others |0⟩")
            }
            Probe::Random(k) => write!(f, "random state #{k}"),
        }
    }
}

/// The oracle's probes for `inputs` input wires, in evaluation order.
pub fn probe_set(inputs: &[Qubit]) -> Vec<(Probe, StateVector)> {
    let width = inputs.len();
    let mut probes: Vec<(Probe, StateVector)> =
        (0..1usize << width).map(|index| (Probe::Basis { index, width }, StateVector::basis(width, index))).collect();
    if width == 0 {
        return probes;
    }
    for (pos, wire) in inputs.iter().enumerate() {
        for state in [AxisState::Plus, AxisState::Minus, AxisState::PlusI] {
            let factors: Vec<(Complex64, Complex64)> =
                (0..width).map(|k| if k == pos { state.amplitudes() } else { (ONE, ZERO) }).collect();
            let sv = StateVector::product(&factors).expect("probe states are normalized");
            probes.push((Probe::Axis { wire: *wire, state }, sv));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    for k in 0..ORACLE_RANDOM_PROBES {
        probes.push((Probe::Random(k), random_state(&mut rng, width)));
    }
    probes
}

/// Random state with independent uniform real and imaginary parts, normalized.
pub fn random_state(rng: &mut impl Rng, num_qubits: usize) -> StateVector {
    loop {
        let amps: Vec<Complex64> = (0..1usize << num_qubits)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if let Ok(s) = StateVector::normalized(amps) {
            return s;
        }
    }
}

/// Output density matrices `Σ p·ρ_out`, keyed by the values of reported classical wires.
fn labeled_outputs(c: &Circuit, input: &StateVector) -> Result<BTreeMap<String, Matrix>, SimError> {
    let n = c.num_qubits();
    let (outputs, discards) = (c.outputs(), c.discards());
    let reported = c.reported_cbits();
    let d_out = 1usize << outputs.len();
    let split = |idx: usize| {
        let bit = |q: &Qubit| (idx >> (n - 1 - q.0)) & 1;
        (outputs.iter().fold(0, |a, q| (a << 1) | bit(q)), discards.iter().fold(0, |a, q| (a << 1) | bit(q)))
    };
    let mut by_label: BTreeMap<String, Matrix> = BTreeMap::new();
    for branch in sim::run(c, input)? {
        let label: String = reported
            .iter()
            .map(|r| match branch.outcome[r.0] {
                Some(true) => '1',
                Some(false) => '0',
                None => '-',
            })
            .collect();
        let rho = by_label.entry(label).or_insert_with(|| Matrix::zeros(d_out, d_out));
        let amps = branch.state.amplitudes();
        for (i, ai) in amps.iter().enumerate() {
            if *ai == ZERO {
                continue;
            }
            let (oi, di) = split(i);
            for (j, aj) in amps.iter().enumerate() {
                let (oj, dj) = split(j);
                if di == dj {
                    rho[(oi, oj)] += ai * aj.conj() * branch.probability;
                }
            }
        }
    }
    Ok(by_label)
}

fn check_roles(a: &Circuit, b: &Circuit) -> Result<(), EquivError> {
    let counts = |c: &Circuit| (c.inputs().len(), c.outputs().len(), c.reported_cbits().len());
    let (ca, cb) = (counts(a), counts(b));
    if ca != cb {
        return Err(EquivError::RoleMismatch(format!("(inputs, outputs, reported bits) = {ca:?} vs {cb:?}")));
    }
    Ok(())
}

/// First probe on which the two circuits produce different labeled output
/// density matrices, or `None` if they agree on all probes.
pub fn oracle_counterexample(a: &Circuit, b: &Circuit) -> Result<Option<Probe>, EquivError> {
    check_roles(a, b)?;
    for (probe, state) in probe_set(&a.inputs()) {
        let (ra, rb) = (labeled_outputs(a, &state)?, labeled_outputs(b, &state)?);
        let d = 1usize << a.outputs().len();
        let zero = Matrix::zeros(d, d);
        let differs = ra.keys().chain(rb.keys()).any(|label| {
            let ma = ra.get(label).unwrap_or(&zero);
            let mb = rb.get(label).unwrap_or(&zero);
            ma.max_abs_diff(mb) > ORACLE_TOL
        });
        if differs {
            return Ok(Some(probe));
        }
    }
    Ok(None)
}

/// Brute-force equivalence: identical labeled output statistics on every probe.
pub fn oracle_equal(a: &Circuit, b: &Circuit) -> Result<bool, EquivError> {
    Ok(oracle_counterexample(a, b)?.is_none())
}
