use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use spinchain::kak::budget;
use spinchain::linalg::{haar_special, read_matrix, write_matrix, MatrixFile};
use spinchain::pulse::{synthesize_pulses, total_coupling_time};
use spinchain::selftest::{self, Ctx};
use spinchain::sim::{apply_gate_list, distance, FidelityReport};
use spinchain::{decompose, ChainSpec, Error, GateList, PulseProgram, UnitaryMatrix};

/// Compile unitaries on a linear Ising spin chain into pulse programs.
#[derive(Parser, Debug)]
#[command(name = "spinchain", version)]
struct Cli {
    /// Also write a JSON summary of the run to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Write a Haar-random special unitary on n qubits.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Factor a unitary into local rotations and adjacent couplings.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        /// Gate list path; the tree goes next to it as `<stem>.tree.json`.
        #[arg(long)]
        output: PathBuf,
        /// Expected qubit count.
        #[arg(long)]
        n: Option<usize>,
        /// Residual bound (default 1e-9 * 4^(n-2)).
        #[arg(long)]
        tol: Option<f64>,
        /// Skip the unitarity check on load.
        #[arg(long)]
        no_check: bool,
    },
    /// Lower a gate list to pulses and refocused delays.
    Pulses {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Coupling constants in Hz, comma separated; a single value is used
        /// for every pair.
        #[arg(long, default_value = "100")]
        chain: String,
        /// Chain length when `--chain` has a single value.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Compare a pulse program, gate list or matrix with a target matrix.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        no_check: bool,
    },
    /// Run the built-in invariant suites.
    Selftest {
        /// Run only the named suite (repeatable).
        #[arg(long)]
        suite: Vec<String>,
    },
}

/// Stable exit codes.
mod code {
    pub const OK: u8 = 0;
    pub const FAILED: u8 = 1;
    pub const IO: u8 = 2;
    pub const VALIDATION: u8 = 3;
    pub const NUMERIC: u8 = 4;
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Json(_) => code::IO,
            Error::Range(_) | Error::Dimension(_) | Error::Validation(_) => code::VALIDATION,
            Error::Numeric { .. } => code::NUMERIC,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

fn validation(msg: impl Into<String>) -> Failure {
    Failure {
        code: code::VALIDATION,
        msg: msg.into(),
    }
}

fn io_context(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| {
        let mut f = Failure::from(e);
        f.msg = format!("{}: {}", path.display(), f.msg);
        f
    }
}

type Outcome = Result<(u8, Value), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                code::VALIDATION
            } else {
                code::OK
            });
        }
    };
    let outcome = match cli.cmd {
        Cmd::Random { n, seed, output } => cmd_random(n, seed, &output),
        Cmd::Decompose {
            input,
            output,
            n,
            tol,
            no_check,
        } => cmd_decompose(&input, &output, n, tol, !no_check),
        Cmd::Pulses {
            input,
            output,
            chain,
            n,
        } => cmd_pulses(&input, &output, &chain, n),
        Cmd::Verify {
            input,
            target,
            tol,
            no_check,
        } => cmd_verify(&input, &target, tol, !no_check),
        Cmd::Selftest { suite } => cmd_selftest(&suite),
    };
    let (status, summary) = match outcome {
        Ok(v) => v,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            (f.code, json!({ "error": f.msg }))
        }
    };
    if let Some(path) = cli.report {
        let mut summary = summary;
        summary["exit_code"] = json!(status);
        let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        if let Err(e) = fs::write(&path, text) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(code::IO);
        }
    }
    ExitCode::from(status)
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v)
        .map_err(Error::from)
        .map_err(io_context(path))?;
    fs::write(path, text)
        .map_err(Error::from)
        .map_err(io_context(path))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(Error::from)
        .map_err(io_context(path))?;
    serde_json::from_str(&text)
        .map_err(Error::from)
        .map_err(io_context(path))
}

fn load_matrix(path: &Path, check: bool) -> Result<UnitaryMatrix, Failure> {
    read_matrix(path, check).map_err(io_context(path))
}

fn cmd_random(n: usize, seed: u64, output: &Path) -> Outcome {
    if n == 0 || n > spinchain::pauli::MAX_QUBITS {
        return Err(validation(format!(
            "--n must be in 1..={}",
            spinchain::pauli::MAX_QUBITS
        )));
    }
    let u = haar_special(1 << n, seed);
    write_matrix(output, u.matrix()).map_err(io_context(output))?;
    println!(
        "wrote {}x{} special unitary (seed {seed}) to {}",
        1 << n,
        1 << n,
        output.display()
    );
    Ok((code::OK, json!({ "n": n, "seed": seed, "output": output })))
}

/// `<dir>/<stem>.tree.json` next to the gate list.
fn tree_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    output.with_file_name(format!("{stem}.tree.json"))
}

fn cmd_decompose(input: &Path, output: &Path, n: Option<usize>, tol: Option<f64>, check: bool) -> Outcome {
    let u = load_matrix(input, check)?;
    let qubits = u.num_qubits()?;
    if let Some(want) = n {
        if want != qubits {
            return Err(validation(format!(
                "--n {want} but the input acts on {qubits} qubits"
            )));
        }
    }
    let tol = tol.unwrap_or_else(|| budget(qubits));
    if tol.is_nan() || tol <= 0.0 {
        return Err(validation("--tol must be positive"));
    }
    let tree = decompose(&u)?;
    let gates = tree.flatten(qubits)?;
    let residual = distance(apply_gate_list(&gates, qubits)?.matrix(), u.matrix())?.frobenius_phase_invariant;
    write_json(output, &gates)?;
    let tree_out = tree_path(output);
    write_json(&tree_out, &tree)?;

    println!("qubits:        {qubits}");
    println!("residual:      {residual:.3e} (tol {tol:.1e})");
    println!("local gates:   {}", gates.local_count());
    println!("zz couplings:  {}", gates.coupling_count());
    println!("gate list:     {}", output.display());
    println!("tree:          {}", tree_out.display());
    let summary = json!({
        "n": qubits,
        "residual": residual,
        "tol": tol,
        "local_count": gates.local_count(),
        "zz_count": gates.coupling_count(),
        "gates": output,
        "tree": tree_out,
    });
    if residual < tol {
        Ok((code::OK, summary))
    } else {
        eprintln!("error: residual {residual:.3e} exceeds {tol:.1e}");
        Ok((code::NUMERIC, summary))
    }
}

fn parse_chain(text: &str, n: Option<usize>, used: usize) -> Result<ChainSpec, Failure> {
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| validation(format!("--chain {text:?}: {e}")))?;
    let chain = if values.len() == 1 {
        ChainSpec::uniform(n.unwrap_or(used.max(2)), values[0])?
    } else {
        let len = values.len() + 1;
        if let Some(want) = n {
            if want != len {
                return Err(validation(format!(
                    "--n {want} but --chain describes {len} spins"
                )));
            }
        }
        ChainSpec::new(len, values)?
    };
    Ok(chain)
}

fn cmd_pulses(input: &Path, output: &Path, chain: &str, n: Option<usize>) -> Outcome {
    let gates: GateList = read_json(input)?;
    let chain = parse_chain(chain, n, gates.max_qubit())?;
    let prog = synthesize_pulses(&gates, &chain)?;
    write_json(output, &prog)?;
    let t = total_coupling_time(&prog);
    println!("spins:               {}", chain.n);
    println!("pulses:              {}", prog.pulse_count());
    println!("total coupling time: {:.6} s ({:.3} ms)", t, t * 1e3);
    println!("program:             {}", output.display());
    Ok((
        code::OK,
        json!({
            "n": chain.n,
            "pulse_count": prog.pulse_count(),
            "coupling_time": t,
            "program": output,
        }),
    ))
}

/// Operator described by a pulse program, gate list or matrix file.
fn load_operator(path: &Path, dim: usize, check: bool) -> Result<UnitaryMatrix, Failure> {
    let v: Value = read_json(path)?;
    let n = spinchain::linalg::qubits_for_dim(dim)?;
    if v.is_array() {
        let gates: GateList = serde_json::from_value(v)
            .map_err(Error::from)
            .map_err(io_context(path))?;
        return Ok(apply_gate_list(&gates, n)?);
    }
    if v.get("events").is_some() {
        let prog: PulseProgram = serde_json::from_value(v)
            .map_err(Error::from)
            .map_err(io_context(path))?;
        return Ok(prog.propagator()?);
    }
    if v.get("dim").is_some() {
        let file: MatrixFile = serde_json::from_value(v)
            .map_err(Error::from)
            .map_err(io_context(path))?;
        let m = file.to_matrix()?;
        return Ok(if check {
            UnitaryMatrix::new(m)?
        } else {
            UnitaryMatrix::new_unchecked(m)
        });
    }
    Err(validation(format!(
        "{}: not a pulse program, gate list or matrix",
        path.display()
    )))
}

fn cmd_verify(input: &Path, target: &Path, tol: f64, check: bool) -> Outcome {
    if tol.is_nan() || tol <= 0.0 {
        return Err(validation("--tol must be positive"));
    }
    let want = load_matrix(target, check)?;
    let got = load_operator(input, want.dim(), check)?;
    let r: FidelityReport = distance(got.matrix(), want.matrix())?;
    let ok = r.frobenius_phase_invariant < tol;
    println!("dim:            {}", r.dim);
    println!(
        "distance:       {:.3e} (tol {tol:.1e})",
        r.frobenius_phase_invariant
    );
    println!("trace fidelity: {:.15}", r.trace_fidelity);
    println!("{}", if ok { "PASS" } else { "FAIL" });
    let summary = json!({ "report": r, "tol": tol, "pass": ok });
    Ok((if ok { code::OK } else { code::FAILED }, summary))
}

fn cmd_selftest(only: &[String]) -> Outcome {
    let reports = selftest::run(&Ctx::default(), only)?;
    let mut failed = Vec::new();
    for r in &reports {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        println!("{mark} {:<18} {} [{:.2} s]", r.name, r.detail, r.seconds);
        if !r.passed {
            failed.push(r.name);
        }
    }
    let summary = json!({
        "suites": reports.iter().map(|r| json!({
            "name": r.name, "passed": r.passed, "detail": r.detail,
        })).collect::<Vec<_>>(),
        "failed": failed,
    });
    if failed.is_empty() {
        println!("all {} suites passed", reports.len());
        Ok((code::OK, summary))
    } else {
        eprintln!("failed suites: {}", failed.join(", "));
        Ok((code::FAILED, summary))
    }
}
