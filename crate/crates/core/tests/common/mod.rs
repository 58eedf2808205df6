//! Shared helpers for integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use qcirc::circuit::{CbitRole, Circuit, CircuitBuilder, Instruction, Prep, Sink};
use qcirc::linalg::Matrix;
use qcirc::sim::StateVector;
use rand::seq::SliceRandom;
use rand::Rng;

/// A valid random circuit with up to `max_qubits` wires and `max_len` instructions.
///
/// Wires are randomly left as inputs or prepared in |0⟩, |+⟩ or a Bell pair;
/// classical wires are assigned before they are read.
pub fn random_circuit(rng: &mut impl Rng, max_qubits: usize, max_len: usize) -> Circuit {
    let n = rng.random_range(1..=max_qubits);
    let len = rng.random_range(0..=max_len);
    let mut preps: Vec<Option<Prep>> = vec![None; n];
    let mut wires: Vec<usize> = (0..n).collect();
    wires.shuffle(rng);
    let mut k = 0;
    while k < n {
        match rng.random_range(0..6) {
            0 => preps[wires[k]] = Some(Prep::Zero),
            1 => preps[wires[k]] = Some(Prep::Plus),
            2 if k + 1 < n => {
                let (a, b) = (wires[k], wires[k + 1]);
                preps[a] = Some(Prep::BellWith(qcirc::Qubit(b)));
                preps[b] = Some(Prep::BellWith(qcirc::Qubit(a)));
                k += 1;
            }
            _ => {}
        }
        k += 1;
    }
    let mut assigned = 0usize;
    let mut body = Vec::with_capacity(len);
    while body.len() < len {
        let q = rng.random_range(0..n);
        let other = if n > 1 { Some((q + rng.random_range(1..n)) % n) } else { None };
        let instr = match rng.random_range(0..10) {
            0 => Instruction::h(q),
            1 => Instruction::x(q),
            2 => Instruction::z(q),
            3 | 4 => match other {
                Some(t) => Instruction::cnot(q, t),
                None => continue,
            },
            5 => match other {
                Some(t) => Instruction::cz(q, t),
                None => continue,
            },
            6 => {
                assigned += 1;
                Instruction::measure(q, assigned - 1)
            }
            7 if assigned > 0 => Instruction::cx(rng.random_range(0..assigned), q),
            8 if assigned > 0 => Instruction::czc(rng.random_range(0..assigned), q),
            9 if assigned > 1 => {
                let a = rng.random_range(0..assigned);
                let b = (a + rng.random_range(1..assigned)) % assigned;
                assigned += 1;
                Instruction::xor(a, b, assigned - 1)
            }
            _ => continue,
        };
        body.push(instr);
    }
    let mut b = CircuitBuilder::new(n, assigned);
    for (q, p) in preps.iter().enumerate() {
        if let Some(p) = p {
            if let Prep::BellWith(o) = p {
                if o.0 > q {
                    b.bell(q, o.0).unwrap();
                }
            } else {
                b.prep(q, *p).unwrap();
            }
        }
    }
    for q in 0..n {
        if rng.random_range(0..5) == 0 {
            b.sink(q, if rng.random() { Sink::Output } else { Sink::Discard }).unwrap();
        }
    }
    for c in 0..assigned {
        if rng.random_range(0..4) == 0 {
            b.cbit_role(c, CbitRole::Report).unwrap();
        }
    }
    b.extend(body);
    b.build().expect("generator produces valid circuits")
}

/// Reduced density matrix of the listed wires (ascending order) of a pure state.
pub fn reduced_density(state: &StateVector, keep: &[usize]) -> Matrix {
    let n = state.num_qubits();
    let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let bits = |idx: usize, wires: &[usize]| wires.iter().fold(0, |a, q| (a << 1) | ((idx >> (n - 1 - q)) & 1));
    let d = 1 << keep.len();
    let mut rho = Matrix::zeros(d, d);
    let amps = state.amplitudes();
    for (i, ai) in amps.iter().enumerate() {
        for (j, aj) in amps.iter().enumerate() {
            if bits(i, &rest) == bits(j, &rest) {
                rho[(bits(i, keep), bits(j, keep))] += ai * aj.conj();
            }
        }
    }
    rho
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_with(rho: &Matrix, psi: &[Complex64]) -> f64 {
    let v = rho.mul_vec(psi);
    psi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
}

/// Permutation matrix `|f(j)⟩⟨j|` on `dim` basis states.
pub fn permutation(dim: usize, f: impl Fn(usize) -> usize) -> Matrix {
    let mut m = Matrix::zeros(dim, dim);
    for j in 0..dim {
        m[(f(j), j)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Classical action of a CNOT on the bits of a basis index (wire 0 most significant).
pub fn xor_cnot(n: usize, idx: usize, control: usize, target: usize) -> usize {
    let bit = |q: usize| (idx >> (n - 1 - q)) & 1;
    idx ^ (bit(control) << (n - 1 - target))
}
