//! Browser bindings. Each export takes circuit text and returns a JSON string;
//! errors come back as thrown strings.

use qcirc::engine::{find_matches, rewrite_verified, Match};
use qcirc::rules::{Direction, RuleId};
use qcirc::scenarios::{derive_with, Derivation};
use qcirc::sim::run;
use qcirc::{parse, serialize, Circuit, StateVector};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn load(text: &str) -> Result<Circuit, String> {
    parse(text).map_err(|e| e.to_string())
}

/// Branch table for a basis input given as a bit string over the input wires
/// (empty means all zeros).
pub fn simulate_json(text: &str, bits: &str) -> Result<Value, String> {
    let c = load(text)?;
    let width = c.inputs().len();
    let bits = bits.trim();
    let index = if bits.is_empty() {
        0
    } else if bits.len() == width && bits.bytes().all(|b| b == b'0' || b == b'1') {
        usize::from_str_radix(bits, 2).map_err(|e| e.to_string())?
    } else {
        return Err(format!("input must be {width} binary digits"));
    };
    let branches = run(&c, &StateVector::basis(width, index)).map_err(|e| e.to_string())?;
    let rows: Vec<Value> = branches
        .iter()
        .map(|b| {
            let amps: Vec<[f64; 2]> = b.state.amplitudes().iter().map(|z| [z.re, z.im]).collect();
            json!({ "outcome": b.outcome_label(), "probability": b.probability, "amplitudes": amps })
        })
        .collect();
    Ok(json!({ "qubits": c.num_qubits(), "inputs": width, "branches": rows }))
}

fn all_matches(c: &Circuit) -> Result<Vec<Match>, String> {
    let mut out = Vec::new();
    for id in RuleId::all() {
        for d in [Direction::Forward, Direction::Backward] {
            out.extend(find_matches(c, id, d).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// Every rule match in the circuit, numbered in a stable order.
pub fn list_rewrites_json(text: &str) -> Result<Value, String> {
    let c = load(text)?;
    let rows: Vec<Value> =
        all_matches(&c)?.iter().enumerate().map(|(k, m)| json!({ "index": k, "label": m.to_string() })).collect();
    Ok(Value::Array(rows))
}

/// Applies the `index`-th match from [`list_rewrites_json`] with a channel check.
pub fn apply_rewrite_json(text: &str, index: usize) -> Result<Value, String> {
    let c = load(text)?;
    let matches = all_matches(&c)?;
    let m = matches.get(index).ok_or_else(|| format!("no match #{index}"))?;
    let out = rewrite_verified(&c, m).map_err(|e| e.to_string())?;
    Ok(json!({ "applied": m.to_string(), "circuit": serialize(&out), "verified": true }))
}

/// The steps of a scripted derivation, by name.
pub fn derive_json(name: &str) -> Result<Value, String> {
    let d: Derivation = name.parse()?;
    let trace = derive_with(d, true).map_err(|e| e.to_string())?;
    let steps: Vec<Value> = trace
        .steps()
        .iter()
        .map(|s| {
            json!({
                "rule": s.applied.as_ref().map(Match::to_string),
                "verification": s.verification.to_string(),
                "circuit": serialize(&s.circuit),
            })
        })
        .collect();
    Ok(json!({ "name": d.name(), "steps": steps }))
}

fn export(v: Result<Value, String>) -> Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn simulate(text: &str, bits: &str) -> Result<String, JsValue> {
    export(simulate_json(text, bits))
}

#[wasm_bindgen(js_name = listRewrites)]
pub fn list_rewrites(text: &str) -> Result<String, JsValue> {
    export(list_rewrites_json(text))
}

#[wasm_bindgen(js_name = applyRewrite)]
pub fn apply_rewrite(text: &str, index: usize) -> Result<String, JsValue> {
    export(apply_rewrite_json(text, index))
}

#[wasm_bindgen]
pub fn derivation(name: &str) -> Result<String, JsValue> {
    export(derive_json(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BELL: &str = "qubits 2\ncbits 2\nREPORT c0\nREPORT c1\nH q0\nCNOT q0 q1\nMEASURE q0 c0\nMEASURE q1 c1";

    #[test]
    fn simulate_bell() {
        let v = simulate_json(BELL, "").unwrap();
        let branches = v["branches"].as_array().unwrap();
        assert_eq!(branches.len(), 2);
        assert_eq!(branches[0]["outcome"], "00");
        assert!((branches[0]["probability"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert!(simulate_json(BELL, "1").is_err());
        assert!(simulate_json("qubits x", "").is_err());
    }

    #[test]
    fn rewrite_by_index() {
        let text = "qubits 2\ncbits 0\nH q0\nH q0\nCNOT q0 q1";
        let list = list_rewrites_json(text).unwrap();
        let k = list
            .as_array()
            .unwrap()
            .iter()
            .position(|m| m["label"].as_str().unwrap().starts_with("R1_InverseCancel[0] forward"))
            .unwrap();
        let v = apply_rewrite_json(text, k).unwrap();
        assert_eq!(v["circuit"], "qubits 2\ncbits 0\nCNOT q0 q1");
        assert!(apply_rewrite_json(text, 10_000).is_err());
    }

    #[test]
    fn derivations_replay() {
        for d in Derivation::ALL {
            let v = derive_json(d.name()).unwrap();
            let steps = v["steps"].as_array().unwrap();
            assert!(steps.len() > 1);
            assert!(steps[1..].iter().all(|s| s["verification"] == "VERIFIED"));
        }
        assert!(derive_json("nothing").is_err());
    }
}
