//! Number formatting and ket parsing.

use num_complex::Complex64;
use qcirc::StateVector;

const SIG_DIGITS: i32 = 12;
const ZERO_BELOW: f64 = 1e-12;

/// A real number with 12 significant digits, trailing zeros dropped.
/// Magnitudes below 1e-12 print as `0`.
pub fn real(x: f64) -> String {
    if x.abs() < ZERO_BELOW {
        return "0".into();
    }
    let decimals = (SIG_DIGITS - 1 - x.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// `a+bi` / `a-bi`.
pub fn complex(z: Complex64) -> String {
    let im = real(z.im);
    match im.strip_prefix('-') {
        Some(abs) => format!("{}-{abs}i", real(z.re)),
        None => format!("{}+{im}i", real(z.re)),
    }
}

pub fn complex_list(zs: &[Complex64]) -> String {
    zs.iter().map(|z| complex(*z)).collect::<Vec<_>>().join(", ")
}

/// Parses `|01⟩` (or `|01>`) over `width` input wires, or a comma-separated
/// list of `2^width` complex amplitudes.
pub fn ket(spec: &str, width: usize) -> Result<StateVector, String> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix('|') {
        let bits = rest.strip_suffix('⟩').or_else(|| rest.strip_suffix('>')).ok_or("unterminated ket label")?;
        if bits.len() != width || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(format!("ket label `{spec}` must have {width} binary digits"));
        }
        let index = if width == 0 { 0 } else { usize::from_str_radix(bits, 2).map_err(|e| e.to_string())? };
        return Ok(StateVector::basis(width, index));
    }
    let amps = spec
        .split(',')
        .map(|t| t.trim().replace(' ', "").parse::<Complex64>().map_err(|_| format!("bad amplitude `{}`", t.trim())))
        .collect::<Result<Vec<_>, _>>()?;
    if amps.len() != 1 << width {
        return Err(format!("expected {} amplitudes for {width} input wires, found {}", 1 << width, amps.len()));
    }
    StateVector::from_amplitudes(amps).map_err(|e| e.to_string())
}
