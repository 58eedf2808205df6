mod format;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qcirc::engine::{find_matches, rewrite_at, rewrite_verified, simplify_with, DerivationTrace, EngineError};
use qcirc::equivalence::{
    circuits_channel_equal, first_differing_column, oracle_counterexample, unitary_equal, EquivError, Probe,
};
use qcirc::rules::{Direction, RuleId};
use qcirc::scenarios::{derive, make, Derivation, Scenario};
use qcirc::sim::{build_unitary, run};
use qcirc::{parse, serialize, Circuit, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_NOT_EQUIVALENT: u8 = 4;

/// Simulate, compare and rewrite small quantum circuits.
#[derive(Parser)]
#[command(name = "qcirc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the measurement branches, or sampled outcome counts with --shots.
    Run {
        file: PathBuf,
        /// `|01⟩` over the input wires, or comma-separated amplitudes such as `0.6,0.8i`. Default: all zeros.
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the unitary of a circuit made only of gates.
    Unitary { file: PathBuf },
    /// Exit 0 if the two circuits are equivalent, 4 otherwise.
    Check {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Channel)]
        mode: Mode,
    },
    /// List rule matches or apply one of them.
    Rewrite {
        file: PathBuf,
        /// Rule id, e.g. R5_DistributeCNOT.
        #[arg(long)]
        rule: RuleId,
        #[arg(long)]
        backward: bool,
        /// Index into the match list.
        #[arg(long, default_value_t = 0)]
        site: usize,
        #[arg(long)]
        list: bool,
        #[arg(long)]
        no_verify: bool,
    },
    /// Apply cancellation rules to a fixpoint.
    Simplify {
        file: PathBuf,
        #[arg(long)]
        no_verify: bool,
    },
    /// Replay a protocol derivation.
    Demo { name: Demo },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Exact unitary equality.
    Unitary,
    /// Unitary equality up to a global phase.
    Phase,
    /// Choi matrix equality.
    Channel,
    /// Probe-state comparison.
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    Teleportation,
    Densecoding,
    Gateteleportation,
    Swap,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = if matches!(e, EngineError::VerificationFailed { .. }) { EXIT_VERIFY } else { EXIT_USAGE };
        fail(code, e.to_string())
    }
}

impl From<EquivError> for Failure {
    fn from(e: EquivError) -> Self {
        fail(EXIT_USAGE, e.to_string())
    }
}

impl From<qcirc::SimError> for Failure {
    fn from(e: qcirc::SimError) -> Self {
        fail(EXIT_USAGE, e.to_string())
    }
}

fn load(path: &Path) -> Result<Circuit, Failure> {
    let text = fs::read_to_string(path).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn label(outcome: &str) -> &str {
    if outcome.is_empty() {
        "(none)"
    } else {
        outcome
    }
}

fn cmd_run(file: &Path, input: Option<&str>, shots: Option<usize>, seed: u64) -> Result<(), Failure> {
    let c = load(file)?;
    let width = c.inputs().len();
    let psi = match input {
        Some(spec) => format::ket(spec, width).map_err(|e| fail(EXIT_USAGE, e))?,
        None => StateVector::basis(width, 0),
    };
    let branches = run(&c, &psi)?;
    match shots {
        None => {
            println!("outcome\tprobability\tstate");
            for b in &branches {
                let amps = format::complex_list(b.state.amplitudes());
                println!("{}\t{}\t[{amps}]", label(&b.outcome_label()), format::real(b.probability));
            }
        }
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            for _ in 0..n {
                let mut r: f64 = rng.random();
                let pick = branches
                    .iter()
                    .find(|b| {
                        r -= b.probability;
                        r < 0.0
                    })
                    .unwrap_or(&branches[branches.len() - 1]);
                *counts.entry(pick.outcome_label()).or_default() += 1;
            }
            println!("outcome\tcount\tfrequency");
            for (outcome, k) in counts {
                println!("{}\t{k}\t{}", label(&outcome), format::real(k as f64 / n as f64));
            }
        }
    }
    Ok(())
}

fn cmd_unitary(file: &Path) -> Result<(), Failure> {
    let c = load(file)?;
    let u = build_unitary(&c)?;
    for r in 0..u.rows() {
        println!("{}", format::complex_list(u.row(r)));
    }
    Ok(())
}

fn not_equivalent(probe: Option<Probe>) -> Failure {
    match probe {
        Some(p) => fail(EXIT_NOT_EQUIVALENT, format!("not equivalent\ndistinguishing probe: {p}")),
        None => fail(EXIT_NOT_EQUIVALENT, "not equivalent"),
    }
}

fn cmd_check(a: &Path, b: &Path, mode: Mode) -> Result<(), Failure> {
    let (ca, cb) = (load(a)?, load(b)?);
    let mismatch = |e: EquivError| match e {
        EquivError::DimensionMismatch { .. } | EquivError::RoleMismatch(..) => {
            fail(EXIT_NOT_EQUIVALENT, format!("not equivalent: {e}"))
        }
        other => other.into(),
    };
    match mode {
        Mode::Unitary | Mode::Phase => {
            let (ua, ub) = (build_unitary(&ca)?, build_unitary(&cb)?);
            let phase = matches!(mode, Mode::Phase);
            if !unitary_equal(&ua, &ub, phase).map_err(mismatch)? {
                let col = first_differing_column(&ua, &ub, phase)?;
                return Err(not_equivalent(col.map(|index| Probe::Basis { index, width: ca.num_qubits() })));
            }
        }
        Mode::Channel => {
            if !circuits_channel_equal(&ca, &cb).map_err(mismatch)? {
                return Err(not_equivalent(oracle_counterexample(&ca, &cb)?));
            }
        }
        Mode::Oracle => {
            if let Some(p) = oracle_counterexample(&ca, &cb).map_err(mismatch)? {
                return Err(not_equivalent(Some(p)));
            }
        }
    }
    println!("equivalent");
    Ok(())
}

fn cmd_rewrite(
    file: &Path,
    rule: RuleId,
    backward: bool,
    site: usize,
    list: bool,
    verify: bool,
) -> Result<(), Failure> {
    let c = load(file)?;
    let dir = if backward { Direction::Backward } else { Direction::Forward };
    let matches = find_matches(&c, rule, dir)?;
    if list {
        for (k, m) in matches.iter().enumerate() {
            println!("{k}: {m}");
        }
        return Ok(());
    }
    let m = matches
        .get(site)
        .ok_or_else(|| fail(EXIT_USAGE, format!("no match #{site} for {rule} ({} found)", matches.len())))?;
    let (out, status) =
        if verify { (rewrite_verified(&c, m)?, "VERIFIED") } else { (rewrite_at(&c, m)?, "UNVERIFIED") };
    println!("{}", serialize(&out));
    println!("{m} {status}");
    Ok(())
}

fn finish(trace: &DerivationTrace) -> Result<(), Failure> {
    print!("{}", trace.render());
    if trace.verifying() && !trace.all_verified() {
        return Err(fail(EXIT_VERIFY, "derivation has unverified steps"));
    }
    Ok(())
}

fn cmd_simplify(file: &Path, verify: bool) -> Result<(), Failure> {
    let c = load(file)?;
    let (out, trace) = simplify_with(&c, verify)?;
    finish(&trace)?;
    println!("final:\n{}", serialize(&out));
    Ok(())
}

fn cmd_demo(name: Demo) -> Result<(), Failure> {
    let d = match name {
        Demo::Teleportation => Derivation::TeleportFromTransfer,
        Demo::Densecoding => Derivation::DenseFromCopy,
        Demo::Gateteleportation => Derivation::GateTeleportFromTeleport,
        Demo::Swap => {
            // No rule sequence joins the two swaps; their unitaries are compared directly.
            let (x, alt) = (make(Scenario::XorSwap), make(Scenario::AltSwap));
            println!("{}:\n{}\n\n{}:\n{}\n", Scenario::XorSwap, serialize(&x), Scenario::AltSwap, serialize(&alt));
            let same = unitary_equal(&build_unitary(&x)?, &build_unitary(&alt)?, false)?;
            println!(
                "{} = {} exactly: {}",
                Scenario::XorSwap,
                Scenario::AltSwap,
                if same { "VERIFIED" } else { "FAILED" }
            );
            return if same { Ok(()) } else { Err(fail(EXIT_VERIFY, "swap circuits differ")) };
        }
    };
    finish(&derive(d)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run { file, input, shots, seed } => cmd_run(&file, input.as_deref(), shots, seed),
        Command::Unitary { file } => cmd_unitary(&file),
        Command::Check { a, b, mode } => cmd_check(&a, &b, mode),
        Command::Rewrite { file, rule, backward, site, list, no_verify } => {
            cmd_rewrite(&file, rule, backward, site, list, !no_verify)
        }
        Command::Simplify { file, no_verify } => cmd_simplify(&file, !no_verify),
        Command::Demo { name } => cmd_demo(name),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if f.code == EXIT_NOT_EQUIVALENT => {
            println!("{}", f.message);
            ExitCode::from(f.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
