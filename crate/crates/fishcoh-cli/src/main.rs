//! Command-line front end for the coherence library.
//!
//! Every invocation runs exactly one subcommand and prints a single
//! JSON document to standard output:
//!
//! ```text
//! {"command": …, "inputs": {…}, "result": …, "diagnostics": […]}
//! ```
//!
//! `result` is `null` when the run failed; `diagnostics` then carries
//! the violated invariant's name followed by the human-readable
//! message (e.g. `"IncompleteAtTheta0: channel incomplete: …"`).
//! Exit codes: 0 on success, 1 on validation or computation failure,
//! 2 on usage errors (which go to standard error, not the JSON
//! stream).  With `--csv PATH` a successful run also appends one flat
//! row — command, state hash, anchor, headline value, provenance — to
//! the given file, creating it with a header when missing.
//!
//! Identical inputs and seeds produce byte-identical result fields:
//! the library's randomness is fully seeded, the optimizer collects
//! restarts in order, and `FISHCOH_THREADS` only caps the worker pool
//! (never the values).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use fishcoh::axioms::{run_axiom_suite, AxiomSuiteConfig};
use fishcoh::fisher::{classical_fi, qfi_sld, state_derivative};
use fishcoh::iochannel::{postselect_distribution, validate_io, witness_io, ParametrizedIO};
use fishcoh::optimize::{maximize_coherence, OptimizerBudget};
use fishcoh::qcore::DensityMatrix;
use fishcoh::repro::run_golden_suite;

#[derive(Parser)]
#[command(
    name = "fishcoh",
    version,
    about = "Coherence of finite-dimensional quantum states, measured as the \
             best Fisher information an incoherent phase-estimation channel \
             can extract"
)]
struct Cli {
    /// Append one flat row (command, state hash, anchor, value,
    /// provenance) to this CSV file on success.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified lower bound on the coherence of a state: multi-restart
    /// ascent over structured incoherent channels.
    Coherence(CoherenceArgs),
    /// Classical Fisher information of a state's outcome distribution
    /// through a channel, at the channel's anchor parameter.
    Fi(StateIoArgs),
    /// Quantum Fisher information of the channel's output family on a
    /// state, at the channel's anchor parameter.
    Qfi(StateIoArgs),
    /// Validate a channel file: completeness at the anchor and a
    /// certificate that it holds for every parameter value.
    Validate(ValidateArgs),
    /// Run the randomized axiom suite (nonnegativity, monotonicity,
    /// strong monotonicity, convexity).
    Axioms(AxiomsArgs),
    /// Run the golden reproduction suite of frozen reference values.
    Repro,
    /// Build the witness channel for a coherent state and report the
    /// Fisher information it certifies.
    Witness(WitnessArgs),
}

#[derive(Args)]
struct CoherenceArgs {
    /// State file (JSON density matrix).
    #[arg(long, value_name = "PATH")]
    state: PathBuf,
    /// Anchor parameter the channel is differentiated at.
    #[arg(long, default_value_t = 0.0)]
    theta0: f64,
    /// Optimizer budget file (JSON); flags below override its fields.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Number of restarts.
    #[arg(long)]
    restarts: Option<usize>,
    /// Group counts to cycle through, e.g. `1,2,3`.
    #[arg(long, value_delimiter = ',', value_name = "N,N,…")]
    groups: Option<Vec<usize>>,
    /// Seed for the restart streams.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct StateIoArgs {
    /// State file (JSON density matrix).
    #[arg(long, value_name = "PATH")]
    state: PathBuf,
    /// Channel file (JSON incoherent Kraus family).
    #[arg(long, value_name = "PATH")]
    io: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Channel file (JSON incoherent Kraus family).
    #[arg(long, value_name = "PATH")]
    io: PathBuf,
}

#[derive(Args)]
struct AxiomsArgs {
    /// Suite configuration file (JSON); defaults to the qubit-exact
    /// suite (dims [2], 200 samples, seed 0, analytic evaluator).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    /// State file (JSON density matrix).
    #[arg(long, value_name = "PATH")]
    state: PathBuf,
    /// Anchor parameter for the witness channel.
    #[arg(long, default_value_t = 0.0)]
    theta0: f64,
}

/// Everything one subcommand run produces: the JSON document pieces,
/// the exit disposition, and the CSV row fields.
struct CommandOutput {
    command: &'static str,
    inputs: Value,
    result: Option<Value>,
    diagnostics: Vec<String>,
    ok: bool,
    state_hash: String,
    theta0: Option<f64>,
    value: Option<f64>,
    provenance: &'static str,
}

impl CommandOutput {
    fn new(command: &'static str, inputs: Value) -> Self {
        Self {
            command,
            inputs,
            result: None,
            diagnostics: Vec::new(),
            ok: false,
            state_hash: String::new(),
            theta0: None,
            value: None,
            provenance: "",
        }
    }

    /// Record a failure diagnostic and return the (finished) output.
    fn fail(mut self, diagnostic: String) -> Self {
        self.diagnostics.push(diagnostic);
        self.ok = false;
        self
    }

    fn fail_lib(self, e: fishcoh::Error) -> Self {
        self.fail(format!("{}: {e}", e.invariant_name()))
    }

    fn document(&self) -> Value {
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "result": self.result,
            "diagnostics": self.diagnostics,
        })
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let out = execute(&cli.command);
    println!(
        "{}",
        serde_json::to_string_pretty(&out.document()).expect("document serializes")
    );
    if out.ok {
        if let Some(path) = &cli.csv {
            if let Err(e) = append_csv(path, &out) {
                eprintln!("cannot append to {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Cap the global worker pool when `FISHCOH_THREADS` is set.  Thread
/// count never changes any reported value — restarts are collected in
/// order — so this is purely a resource control.
fn configure_threads() {
    if let Some(n) = std::env::var("FISHCOH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn execute(cmd: &Command) -> CommandOutput {
    match cmd {
        Command::Coherence(a) => run_coherence(a),
        Command::Fi(a) => run_fi(a),
        Command::Qfi(a) => run_qfi(a),
        Command::Validate(a) => run_validate(a),
        Command::Axioms(a) => run_axioms(a),
        Command::Repro => run_repro(),
        Command::Witness(a) => run_witness(a),
    }
}

// ---------------------------------------------------------------------------
// File plumbing.
// ---------------------------------------------------------------------------

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn read_file(path: &Path) -> Result<(String, String), String> {
    match fs::read(path) {
        Ok(bytes) => {
            let hash = sha256_hex(&bytes);
            Ok((String::from_utf8_lossy(&bytes).into_owned(), hash))
        }
        Err(e) => Err(format!("FileUnreadable: {}: {e}", path.display())),
    }
}

/// Load and hash a density-matrix file, recording the hash on the
/// output so the CSV row and the `inputs` block both carry it.
fn load_state(out: &mut CommandOutput, path: &Path) -> Result<DensityMatrix, String> {
    let (text, hash) = read_file(path)?;
    out.state_hash = hash.clone();
    out.inputs["state_sha256"] = json!(hash);
    DensityMatrix::from_json_str(&text).map_err(|e| format!("{}: {e}", e.invariant_name()))
}

fn load_io(path: &Path) -> Result<ParametrizedIO, String> {
    let (text, _) = read_file(path)?;
    ParametrizedIO::from_json_str(&text).map_err(|e| format!("{}: {e}", e.invariant_name()))
}

fn append_csv(path: &Path, out: &CommandOutput) -> std::io::Result<()> {
    use std::io::Write;
    let fresh = !path.exists();
    let mut file = fs::OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(file, "command,state_sha256,theta0,value,provenance")?;
    }
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    writeln!(
        file,
        "{},{},{},{},{}",
        out.command,
        out.state_hash,
        opt(out.theta0),
        opt(out.value),
        out.provenance
    )
}

// ---------------------------------------------------------------------------
// Subcommands.
// ---------------------------------------------------------------------------

fn run_coherence(args: &CoherenceArgs) -> CommandOutput {
    let mut out = CommandOutput::new(
        "coherence",
        json!({
            "state": args.state.display().to_string(),
            "theta0": args.theta0,
            "config": args.config.as_ref().map(|p| p.display().to_string()),
        }),
    );
    out.theta0 = Some(args.theta0);
    out.provenance = "optimizer-lower-bound";

    let rho = match load_state(&mut out, &args.state) {
        Ok(rho) => rho,
        Err(d) => return out.fail(d),
    };
    let mut budget = match &args.config {
        Some(path) => {
            let (text, _) = match read_file(path) {
                Ok(pair) => pair,
                Err(d) => return out.fail(d),
            };
            match serde_json::from_str::<OptimizerBudget>(&text) {
                Ok(b) => b,
                Err(e) => return out.fail(format!("MalformedJson: {e}")),
            }
        }
        None => OptimizerBudget::default(),
    };
    if let Some(r) = args.restarts {
        budget.restarts = r;
    }
    if let Some(g) = &args.groups {
        budget.group_counts = g.clone();
    }
    if let Some(s) = args.seed {
        budget.seed = s;
    }
    out.inputs["budget"] = serde_json::to_value(&budget).expect("budget serializes");

    let report = match maximize_coherence(&rho, args.theta0, &budget) {
        Ok(r) => r,
        Err(e) => return out.fail_lib(e),
    };
    let failed_restarts = report.per_restart.iter().filter(|r| r.is_none()).count();
    if failed_restarts > 0 {
        out.diagnostics
            .push(format!("{failed_restarts} restart(s) rejected"));
    }
    if let Some(a) = &report.analytic_value {
        out.diagnostics
            .push(format!("analytic reference available: {}", a.provenance));
    }
    out.value = Some(report.lower_bound);
    out.result = Some(json!({
        "lower_bound": report.lower_bound,
        "analytic": report.analytic_value.as_ref().map(|a| a.value),
        "theta0": report.theta0,
        "restarts": report.restarts,
        "per_restart": report.per_restart,
        "best_point": serde_json::to_value(&report.best_point).expect("point serializes"),
    }));
    out.ok = true;
    out
}

fn run_fi(args: &StateIoArgs) -> CommandOutput {
    let mut out = CommandOutput::new(
        "fi",
        json!({
            "state": args.state.display().to_string(),
            "io": args.io.display().to_string(),
        }),
    );
    out.provenance = "postselect-classical-fi";

    let rho = match load_state(&mut out, &args.state) {
        Ok(rho) => rho,
        Err(d) => return out.fail(d),
    };
    let io = match load_io(&args.io) {
        Ok(io) => io,
        Err(d) => return out.fail(d),
    };
    out.theta0 = Some(io.theta0());
    let datum = match postselect_distribution(&io, &rho) {
        Ok(d) => d,
        Err(e) => return out.fail_lib(e),
    };
    let fi = match classical_fi(&datum) {
        Ok(v) => v,
        Err(e) => return out.fail_lib(e),
    };
    out.value = Some(fi);
    out.result = Some(json!({
        "fi": fi,
        "theta0": io.theta0(),
        "outcomes": datum.len(),
        "probabilities": datum.probabilities(),
        "derivatives": datum.derivatives(),
    }));
    out.ok = true;
    out
}

fn run_qfi(args: &StateIoArgs) -> CommandOutput {
    let mut out = CommandOutput::new(
        "qfi",
        json!({
            "state": args.state.display().to_string(),
            "io": args.io.display().to_string(),
        }),
    );
    out.provenance = "sld-qfi";

    let rho = match load_state(&mut out, &args.state) {
        Ok(rho) => rho,
        Err(d) => return out.fail(d),
    };
    let io = match load_io(&args.io) {
        Ok(io) => io,
        Err(d) => return out.fail(d),
    };
    out.theta0 = Some(io.theta0());
    let qfi = match state_derivative(&io, &rho).and_then(|pair| qfi_sld(&pair)) {
        Ok(v) => v,
        Err(e) => return out.fail_lib(e),
    };
    out.value = Some(qfi);
    out.result = Some(json!({
        "qfi": qfi,
        "theta0": io.theta0(),
        "outcomes": io.outcomes(),
    }));
    out.ok = true;
    out
}

fn run_validate(args: &ValidateArgs) -> CommandOutput {
    let mut out = CommandOutput::new(
        "validate",
        json!({ "io": args.io.display().to_string() }),
    );
    out.provenance = "validity-certificate";

    let io = match load_io(&args.io) {
        Ok(io) => io,
        Err(d) => return out.fail(d),
    };
    out.theta0 = Some(io.theta0());
    let report = match validate_io(&io) {
        Ok(r) => r,
        Err(e) => return out.fail_lib(e),
    };
    out.value = Some(report.completeness_residual_theta0);
    out.diagnostics.push(match &report.certificate {
        fishcoh::iochannel::ValidityCertificate::GroupDiagonal { groups } => {
            format!("certified exactly: {} rate group(s) with diagonal Gram sums", groups.len())
        }
        fishcoh::iochannel::ValidityCertificate::ThetaGrid { points, max_residual } => {
            format!("certified numerically: {points}-point grid, max residual {max_residual:.3e}")
        }
    });
    out.result = Some(serde_json::to_value(&report).expect("report serializes"));
    out.ok = true;
    out
}

fn run_axioms(args: &AxiomsArgs) -> CommandOutput {
    let mut out = CommandOutput::new(
        "axioms",
        json!({
            "config": args.config.as_ref().map(|p| p.display().to_string()),
        }),
    );
    out.provenance = "axiom-suite";

    let cfg = match &args.config {
        Some(path) => {
            let (text, _) = match read_file(path) {
                Ok(pair) => pair,
                Err(d) => return out.fail(d),
            };
            match serde_json::from_str::<AxiomSuiteConfig>(&text) {
                Ok(c) => c,
                Err(e) => return out.fail(format!("MalformedJson: {e}")),
            }
        }
        None => AxiomSuiteConfig::default(),
    };
    out.inputs["resolved"] = serde_json::to_value(&cfg).expect("config serializes");

    let verdicts = match run_axiom_suite(&cfg) {
        Ok(v) => v,
        Err(e) => return out.fail_lib(e),
    };
    let all_passed = verdicts.iter().all(|v| v.passed());
    let failures: usize = verdicts.iter().map(|v| v.failures.len()).sum();
    for v in &verdicts {
        for note in &v.notes {
            out.diagnostics.push(format!("{}: {note}", v.axiom));
        }
        if !v.suspicious.is_empty() {
            out.diagnostics.push(format!(
                "{}: {} suspicious trial(s) beyond optimizer slack",
                v.axiom,
                v.suspicious.len()
            ));
        }
    }
    out.value = Some(failures as f64);
    out.result = Some(json!({
        "all_passed": all_passed,
        "verdicts": serde_json::to_value(&verdicts).expect("verdicts serialize"),
    }));
    out.ok = all_passed;
    out
}

fn run_repro() -> CommandOutput {
    let mut out = CommandOutput::new("repro", json!({}));
    out.provenance = "golden-suite";
    out.theta0 = Some(0.0);

    let report = run_golden_suite();
    for case in &report.cases {
        out.diagnostics.push(format!(
            "{}: {} (expected {}, recomputed {:.12})",
            case.name,
            if case.passed { "pass" } else { "FAIL" },
            case.expected,
            case.recomputed
        ));
    }
    // The headline scalar is the separation the suite exists to verify.
    out.value = report
        .cases
        .iter()
        .find(|c| c.name == "coherence-exceeds-unitary-encoding")
        .map(|c| c.recomputed);
    out.ok = report.all_passed;
    out.result = Some(serde_json::to_value(&report).expect("report serializes"));
    out
}

fn run_witness(args: &WitnessArgs) -> CommandOutput {
    let mut out = CommandOutput::new(
        "witness",
        json!({
            "state": args.state.display().to_string(),
            "theta0": args.theta0,
        }),
    );
    out.theta0 = Some(args.theta0);
    out.provenance = "witness-channel";

    let rho = match load_state(&mut out, &args.state) {
        Ok(rho) => rho,
        Err(d) => return out.fail(d),
    };
    let io = match witness_io(&rho, args.theta0) {
        Ok(io) => io,
        Err(e) => return out.fail_lib(e),
    };
    let fi = match postselect_distribution(&io, &rho).and_then(|d| classical_fi(&d)) {
        Ok(v) => v,
        Err(e) => return out.fail_lib(e),
    };
    out.value = Some(fi);
    out.result = Some(json!({
        "fi": fi,
        "channel": serde_json::from_str::<Value>(&io.to_json_string())
            .expect("channel serializes"),
    }));
    out.ok = true;
    out
}
