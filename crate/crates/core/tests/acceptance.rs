//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the report is always printed.

mod common;

use std::f64::consts::FRAC_1_SQRT_2;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

use num_complex::Complex64;
use qcirc::circuit::{CbitRole, CircuitBuilder, Instruction, Prep, Sink};
use qcirc::engine::{defer_measurements, simplify_with};
use qcirc::equivalence::{channel_equal, oracle_equal, random_state, unitary_equal};
use qcirc::linalg::Matrix;
use qcirc::rules::{self, Bindings, Direction, RuleId, RuleRef, Template};
use qcirc::scenarios::{derive, make, Derivation, Scenario};
use qcirc::sim::{apply_gate, build_unitary, extract_channel, run, unitary_channel, unitary_of, Channel, StateVector};
use qcirc::text::serialize;
use qcirc::{parse, Circuit, Qubit, WireRef};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{fidelity_with, permutation, random_circuit, reduced_density, xor_cnot};

const EXACT: f64 = 1e-12;
const TOL: f64 = 1e-9;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

fn ac1_gate_semantics() {
    // Classical XOR table, realised through measurements of prepared bits.
    for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let mut text = String::from("qubits 2\ncbits 3\nREPORT c2\n");
        for (w, bit) in [(0, a), (1, b)] {
            if bit == 1 {
                text.push_str(&format!("X q{w}\n"));
            }
        }
        text.push_str("MEASURE q0 c0\nMEASURE q1 c1\nXOR c0 c1 c2");
        let circ = parse(&text).unwrap();
        let branches = run(&circ, &StateVector::basis(2, 0)).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].outcome[2], Some(a != b), "XOR {a} {b}");
    }
    // CNOT and CZ truth tables on every two-qubit basis state.
    for x in 0..2usize {
        for y in 0..2usize {
            let input = StateVector::basis(2, 2 * x + y);
            let out = apply_gate(&input, &Instruction::cnot(0, 1)).unwrap();
            assert_eq!(out, StateVector::basis(2, 2 * x + (x ^ y)));
            let out = apply_gate(&input, &Instruction::cz(0, 1)).unwrap();
            let sign = if x == 1 && y == 1 { -1.0 } else { 1.0 };
            for (k, amp) in out.amplitudes().iter().enumerate() {
                let want = if k == 2 * x + y { sign } else { 0.0 };
                assert!(close(*amp, c(want), EXACT));
            }
        }
    }
    // H|0⟩ = |+⟩, H|1⟩ = |−⟩, HH = I.
    let s = FRAC_1_SQRT_2;
    let plus = apply_gate(&StateVector::basis(1, 0), &Instruction::h(0)).unwrap();
    let minus = apply_gate(&StateVector::basis(1, 1), &Instruction::h(0)).unwrap();
    assert!(close(plus.amplitudes()[0], c(s), EXACT) && close(plus.amplitudes()[1], c(s), EXACT));
    assert!(close(minus.amplitudes()[0], c(s), EXACT) && close(minus.amplitudes()[1], c(-s), EXACT));
    let hh = unitary_of(1, &[Instruction::h(0), Instruction::h(0)]).unwrap();
    assert!(hh.max_abs_diff(&Matrix::identity(2)) <= EXACT);
}

/// Pattern and replacement of a variant as standalone circuits on 4 qubits.
fn rule_pair(rule: RuleRef, b: &Bindings) -> (Circuit, Circuit) {
    let v = rules::variant(rule).unwrap();
    let (pat, rep) = rules::instantiate(rule, b).unwrap();
    let cbits = b.values().filter(|w| matches!(w, WireRef::Classical(_))).count();
    let build = |body: Vec<Instruction>| {
        let mut cb = CircuitBuilder::new(4, cbits);
        for g in v.guards(rule.direction) {
            match *g {
                rules::Guard::Prepared(var, rules::PrepT::Zero) => {
                    cb.prep(wire(b, var), Prep::Zero).unwrap();
                }
                rules::Guard::Prepared(var, rules::PrepT::Plus) => {
                    cb.prep(wire(b, var), Prep::Plus).unwrap();
                }
                rules::Guard::Discarded(var) => {
                    cb.sink(wire(b, var), Sink::Discard).unwrap();
                }
                rules::Guard::Prepared(_, rules::PrepT::BellWith(_)) | rules::Guard::Private(_) => {}
            }
        }
        for (var, is_q) in v.pattern_vars(rule.direction) {
            let private = v.guards(rule.direction).contains(&rules::Guard::Private(var));
            if !is_q && !private {
                cb.cbit_role(wire(b, var), CbitRole::Report).unwrap();
            }
        }
        // Measured wires keep the same fate on both sides.
        for t in v.lhs.iter().chain(&v.rhs) {
            if let Template::Measure(var, _) = t {
                cb.sink(wire(b, var), Sink::Discard).unwrap();
            }
        }
        cb.extend(body);
        cb.build().unwrap()
    };
    (build(pat), build(rep))
}

fn wire(b: &Bindings, var: &str) -> usize {
    match b[var] {
        WireRef::Quantum(q) => q.0,
        WireRef::Classical(c) => c.0,
    }
}

fn random_bindings(rng: &mut ChaCha8Rng, rule: RuleRef) -> Bindings {
    let v = rules::variant(rule).unwrap();
    let mut vars: Vec<(&'static str, bool)> = v.pattern_vars(rule.direction);
    vars.extend(v.free_vars(rule.direction));
    let mut qubits: Vec<usize> = (0..4).collect();
    qubits.shuffle(rng);
    let n_classical = vars.iter().filter(|(_, q)| !q).count();
    let mut cbits: Vec<usize> = (0..n_classical).collect();
    cbits.shuffle(rng);
    let (mut qi, mut ci) = (0, 0);
    vars.into_iter()
        .map(|(name, is_q)| {
            if is_q {
                qi += 1;
                (name, WireRef::Quantum(Qubit(qubits[qi - 1])))
            } else {
                ci += 1;
                (name, WireRef::Classical(qcirc::Cbit(cbits[ci - 1])))
            }
        })
        .collect()
}

fn ac2_rule_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for id in RuleId::CATALOG {
        for variant in 0..id.variant_count() {
            let rule = RuleRef::new(id, variant, Direction::Forward);
            for trial in 0..50 {
                let b = random_bindings(&mut rng, rule);
                let (lhs, rhs) = rule_pair(rule, &b);
                let by_channel =
                    channel_equal(&extract_channel(&lhs).unwrap(), &extract_channel(&rhs).unwrap()).unwrap();
                let by_oracle = oracle_equal(&lhs, &rhs).unwrap();
                assert_eq!(by_channel, by_oracle, "{rule} trial {trial}: channel and oracle disagree");
                assert!(by_channel, "{rule} trial {trial} not sound:\n{}\nvs\n{}", serialize(&lhs), serialize(&rhs));
                if lhs.is_pure_gate() && rhs.is_pure_gate() {
                    let (ul, ur) = (build_unitary(&lhs).unwrap(), build_unitary(&rhs).unwrap());
                    assert!(unitary_equal(&ul, &ur, false).unwrap(), "{rule} trial {trial}: unitaries differ");
                }
            }
        }
    }
    // Substitution does not extend to CZ: a phase before the measurements leaves no classical record.
    let with_cz =
        parse("qubits 3\ncbits 3\nDISCARD q1\nREPORT c0\nCZ q0 q1\nMEASURE q0 c0\nMEASURE q1 c1\nCX c1 q2").unwrap();
    let with_xor =
        parse("qubits 3\ncbits 3\nDISCARD q1\nREPORT c0\nMEASURE q0 c0\nMEASURE q1 c1\nXOR c0 c1 c2\nCX c2 q2")
            .unwrap();
    let (a, b) = (extract_channel(&with_cz).unwrap(), extract_channel(&with_xor).unwrap());
    assert!(!channel_equal(&a, &b).unwrap());
    assert!(!oracle_equal(&with_cz, &with_xor).unwrap());
}

fn cnot_matrix(n: usize, control: usize, target: usize) -> Matrix {
    permutation(1 << n, |j| xor_cnot(n, j, control, target))
}

fn ac3_rule_five() {
    let want = cnot_matrix(3, 0, 2);
    for variant in 0..2 {
        let rule = RuleRef::forward(RuleId::R5DistributeCnot, variant);
        let b = rules::bind(&[rules::q("c", 0), rules::q("a", 1), rules::q("t", 2)]);
        let (_, rep) = rules::instantiate(rule, &b).unwrap();
        let u = unitary_of(3, &rep).unwrap();
        assert!(u.max_abs_diff(&want) <= EXACT, "variant {variant}");
    }
}

fn ac4_rules_six_seven() {
    let mut checked = 0;
    for id in [RuleId::R6CnotMirror, RuleId::R7ParallelToLambda] {
        let names = if id == RuleId::R6CnotMirror { ["a", "b", "c"] } else { ["c", "t1", "t2"] };
        let bb = rules::bind(&[rules::q(names[0], 0), rules::q(names[1], 1), rules::q(names[2], 2)]);
        for variant in 0..id.variant_count() {
            let rule = RuleRef::forward(id, variant);
            let (lhs, rhs) = rules::instantiate(rule, &bb).unwrap();
            // XOR arithmetic on the basis index, independent of the simulator.
            let classical = |gates: &[Instruction], idx: usize| {
                gates.iter().fold(idx, |i, g| match *g {
                    Instruction::Gate2 { control, target, .. } => xor_cnot(3, i, control.0, target.0),
                    _ => unreachable!(),
                })
            };
            for idx in 0..8 {
                assert_eq!(classical(&lhs, idx), classical(&rhs, idx), "{rule} on |{idx:03b}⟩");
                let sim = run(
                    &CircuitBuilder::new(3, 0).extend(rhs.iter().copied()).build().unwrap(),
                    &StateVector::basis(3, idx),
                )
                .unwrap();
                assert_eq!(sim[0].state, StateVector::basis(3, classical(&lhs, idx)));
            }
            let (ul, ur) = (unitary_of(3, &lhs).unwrap(), unitary_of(3, &rhs).unwrap());
            assert!(ul.max_abs_diff(&ur) <= EXACT, "{rule}");
            checked += 1;
        }
    }
    assert_eq!(checked, 7);
    // R6 forward from a=q0, b=q1, c=q2 computes (x, y, z) ↦ (x, x⊕y, x⊕y⊕z).
    let (_, rep) = rules::instantiate(
        RuleRef::forward(RuleId::R6CnotMirror, 0),
        &rules::bind(&[rules::q("a", 0), rules::q("b", 1), rules::q("c", 2)]),
    )
    .unwrap();
    let u = unitary_of(3, &rep).unwrap();
    let want = permutation(8, |j| {
        let (x, y, z) = (j >> 2 & 1, j >> 1 & 1, j & 1);
        (x << 2) | ((x ^ y) << 1) | (x ^ y ^ z)
    });
    assert!(u.max_abs_diff(&want) <= EXACT);
}

fn ac5_teleportation() {
    let tele = make(Scenario::Teleportation);
    let channel = extract_channel(&tele).unwrap();
    assert!(channel.completeness_defect() <= TOL);
    assert!(channel_equal(&channel, &Channel::from_unitary(&Matrix::identity(2))).unwrap());
    let wire = parse("qubits 1\ncbits 0").unwrap();
    assert!(oracle_equal(&tele, &wire).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let psi = random_state(&mut rng, 1);
        let branches = run(&tele, &psi).unwrap();
        assert_eq!(branches.len(), 4);
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() <= TOL);
        for b in &branches {
            let rho = reduced_density(&b.state, &[2]);
            assert!(fidelity_with(&rho, psi.amplitudes()) >= 1.0 - TOL, "branch {}", b.outcome_label());
        }
    }
}

/// β_ab = (|0 b⟩ + (−1)^a |1 b̄⟩)/√2 as a 4-vector.
fn bell(a: usize, b: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0); 4];
    v[b] = c(FRAC_1_SQRT_2);
    v[2 + (1 - b)] = c(if a == 1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 });
    v
}

fn ac6_dense_coding() {
    let full = make(Scenario::DenseFull);
    let encode_part: Vec<Instruction> = full.body()[..4].to_vec();
    let encoder = full.with_body(encode_part).unwrap();
    for a in 0..2 {
        for b in 0..2 {
            let input = StateVector::basis(2, 2 * a + b);
            let branches = run(&full, &input).unwrap();
            let p: f64 = branches
                .iter()
                .map(|br| {
                    br.probability
                        * br.state
                            .amplitudes()
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| (i >> 1) & 1 == a && i & 1 == b)
                            .map(|(_, x)| x.norm_sqr())
                            .sum::<f64>()
                })
                .sum();
            assert!((p - 1.0).abs() <= TOL, "decode ({a},{b}) probability {p}");
            // Before decoding, wires q2 q3 hold β_ab up to a global phase.
            let mid = &run(&encoder, &input).unwrap()[0].state;
            let rho = reduced_density(mid, &[2, 3]);
            assert!((fidelity_with(&rho, &bell(a, b)) - 1.0).abs() <= TOL, "β_{a}{b}");
            // The classically controlled encoder yields the same pair.
            for br in run(&make(Scenario::DenseEncode), &input).unwrap() {
                let rho = reduced_density(&br.state, &[2, 3]);
                assert!((fidelity_with(&rho, &bell(a, b)) - 1.0).abs() <= TOL);
            }
        }
    }
    // Copying onto fresh wires without erasing the originals is not a two-qubit transfer.
    let copy =
        parse("qubits 4\ncbits 0\nPREP q2 0\nPREP q3 0\nDISCARD q0\nDISCARD q1\nCNOT q0 q2\nCNOT q1 q3").unwrap();
    let transfer = parse(
        "qubits 4\ncbits 0\nPREP q2 0\nPREP q3 0\nDISCARD q0\nDISCARD q1\n\
         CNOT q0 q2\nCNOT q2 q0\nCNOT q0 q2\nCNOT q1 q3\nCNOT q3 q1\nCNOT q1 q3",
    )
    .unwrap();
    let (cc, ct) = (extract_channel(&copy).unwrap(), extract_channel(&transfer).unwrap());
    assert!(!channel_equal(&cc, &ct).unwrap());
    assert!(!oracle_equal(&copy, &transfer).unwrap());
    // Encoder alone versus encoder plus decoder.
    let encoder_only = make(Scenario::DenseEncode);
    let mut both = encoder_only.to_builder();
    both.push(Instruction::cnot(2, 3)).push(Instruction::h(2));
    assert!(!oracle_equal(&encoder_only, &both.build().unwrap()).unwrap());
}

fn ac7_gate_teleportation() {
    let gt = make(Scenario::GateTeleportation);
    let channel = extract_channel(&gt).unwrap();
    assert!(channel.completeness_defect() <= TOL);
    assert!(channel_equal(&channel, &Channel::from_unitary(&cnot_matrix(2, 0, 1))).unwrap());
    let direct = parse("qubits 2\ncbits 0\nCNOT q0 q1").unwrap();
    assert!(oracle_equal(&gt, &direct).unwrap());

    let chi = &run(&make(Scenario::Chi), &StateVector::basis(0, 0)).unwrap()[0].state;
    for (k, amp) in chi.amplitudes().iter().enumerate() {
        let want = if [0, 3, 13, 14].contains(&k) { 0.5 } else { 0.0 };
        assert!(close(*amp, c(want), EXACT), "χ[{k}] = {amp}");
    }
    // The CNOT may act on either wire of the second pair.
    let other = parse("qubits 4\ncbits 0\nBELL q0 q1\nBELL q2 q3\nCNOT q1 q3").unwrap();
    let chi2 = &run(&other, &StateVector::basis(0, 0)).unwrap()[0].state;
    assert!(chi.amplitudes().iter().zip(chi2.amplitudes()).all(|(a, b)| close(*a, *b, EXACT)));
}

fn ac8_derivations() {
    for d in Derivation::ALL {
        let trace = derive(d).unwrap_or_else(|e| panic!("{d}: {e}"));
        assert!(trace.all_verified(), "{d}");
        assert!(!trace.is_empty());
        assert_eq!(trace.current(), &make(d.target()), "{d}");
        assert!(trace
            .render()
            .lines()
            .filter(|l| l.starts_with("step ") && !l.ends_with("start"))
            .all(|l| l.ends_with("VERIFIED")));
    }
}

fn ac9_deferred_measurement() {
    let mut checked = 0;
    for s in Scenario::ALL {
        let circ = make(s);
        if circ.measured_qubits().is_empty() {
            continue;
        }
        let (deferred, _) = defer_measurements(&circ).unwrap();
        let by_branches = extract_channel(&circ).unwrap();
        let by_unitary = unitary_channel(&deferred).unwrap();
        assert!(channel_equal(&by_branches, &by_unitary).unwrap(), "{s}");
        checked += 1;
    }
    assert_eq!(checked, 3);
}

fn ac10_termination() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for k in 0..200 {
        let circ = random_circuit(&mut rng, 6, 20);
        let (a, trace) = simplify_with(&circ, false).unwrap();
        let bound = circ.body().len() * circ.body().len();
        assert!(trace.len() <= bound.max(1), "circuit {k}: {} steps", trace.len());
        let (b, _) = simplify_with(&circ, false).unwrap();
        assert_eq!(serialize(&a), serialize(&b), "circuit {k}");
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn()); 10] = [
        ("AC1 gate semantics", ac1_gate_semantics),
        ("AC2 rule soundness", ac2_rule_soundness),
        ("AC3 distributed CNOT identity", ac3_rule_five),
        ("AC4 mirror and lambda identities", ac4_rules_six_seven),
        ("AC5 teleportation", ac5_teleportation),
        ("AC6 dense coding", ac6_dense_coding),
        ("AC7 gate teleportation", ac7_gate_teleportation),
        ("AC8 derivation replays", ac8_derivations),
        ("AC9 deferred measurement cross-path", ac9_deferred_measurement),
        ("AC10 simplify termination and determinism", ac10_termination),
    ];
    panic::set_hook(Box::new(|info| eprintln!("  {info}")));
    let mut failed = 0;
    for (name, check) in criteria {
        let ok = panic::catch_unwind(AssertUnwindSafe(check)).is_ok();
        println!("{}: {name}", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
