//! Command-line front end for the dense-coding simulator.
//!
//! Reports go to stdout as `key=value` lines; `--json-out` additionally
//! writes the same result as JSON. Exit codes: 0 success, 1 user error,
//! 2 internal invariant violation.

pub mod records;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dense_coding::channels::{damped_bell_pair, NoiseParams};
use dense_coding::experiments::{fit_regression, sweep_noise_grid, RegressionFit, DEFAULT_STEPS};
use dense_coding::protocol::{run_protocol, Message, ProtocolConfig, ProtocolResult};
use dense_coding::purification::{optimize_angles, NoiseEstimate};
use dense_coding::qec::five_qubit_code;
use dense_coding::state::{bell_state, fidelity, fidelity_with_pure, BellKind};
use dense_coding::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dense-coding", version, about = "Noise-adaptive superdense coding simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the damped Bell pair on a (p, q) grid and write CSV.
    Sweep(SweepArgs),
    /// Fit fidelity = alpha + beta_qd*QD + beta_eof*EoF to a sweep CSV.
    Regress(RegressArgs),
    /// Run every single-qubit Pauli error through the five-qubit code.
    QecTest(QecTestArgs),
    /// Optimize the adaptive purification angles for known noise.
    PurifyOpt(PurifyOptArgs),
    /// Run the full superdense-coding pipeline.
    Protocol(ProtocolArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub p_steps: usize,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub q_steps: usize,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct QecTestArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PurifyOptArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    /// Two bits such as `01`, or `all`.
    #[arg(long, default_value = "all")]
    pub message: String,
    #[arg(long)]
    pub qec: bool,
    #[arg(long)]
    pub purify: bool,
    #[arg(long, default_value_t = 1)]
    pub pilots: usize,
    #[arg(long, default_value_t = 1000)]
    pub shots: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    User(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => EXIT_USER,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::User(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidArgument(_)
            | CoreError::ProbabilityOutOfRange { .. }
            | CoreError::RankDeficient
            | CoreError::EmptyTable => CliError::User(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::User(format!("{}: {e}", path.display()))
}

fn output_error(e: std::io::Error) -> CliError {
    CliError::Internal(format!("writing output: {e}"))
}

fn check_probability(name: &str, value: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(CliError::User(format!("--{name} must lie in [0, 1], got {value}")));
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Internal(e.to_string()))?;
    w.write_all(b"\n").map_err(output_error)?;
    w.flush().map_err(output_error)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USER
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Sweep(a) => sweep(a, out),
        Command::Regress(a) => regress(a, out),
        Command::QecTest(a) => qec_test(a, out),
        Command::PurifyOpt(a) => purify_opt(a, out),
        Command::Protocol(a) => protocol(a, out),
    }
}

fn sweep(args: SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.p_steps < 2 || args.q_steps < 2 {
        return Err(CliError::User(format!(
            "--p-steps and --q-steps must be at least 2, got {} and {}",
            args.p_steps, args.q_steps
        )));
    }
    let records = sweep_noise_grid(args.p_steps, args.q_steps)?;
    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_error(path, e))?;
            records::write_records(BufWriter::new(file), &records)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            writeln!(out, "rows={}", records.len()).map_err(output_error)?;
            writeln!(out, "out={}", path.display()).map_err(output_error)?;
        }
        None => records::write_records(out, &records).map_err(|e| CliError::Internal(e.to_string()))?,
    }
    Ok(())
}

fn write_fit(out: &mut dyn Write, fit: &RegressionFit) -> std::io::Result<()> {
    writeln!(out, "alpha={}", fit.alpha)?;
    writeln!(out, "beta_qd={}", fit.beta_qd)?;
    writeln!(out, "beta_eof={}", fit.beta_eof)?;
    writeln!(out, "r2={}", fit.r2)?;
    writeln!(out, "mse={}", fit.mse)?;
    writeln!(out, "samples={}", fit.samples)
}

fn regress(args: RegressArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let file = File::open(&args.input).map_err(|e| io_error(&args.input, e))?;
    let records = records::read_records(BufReader::new(file)).map_err(|e| io_error(&args.input, e))?;
    let fit = fit_regression(&records)?;
    write_fit(out, &fit).map_err(output_error)?;
    if let Some(path) = &args.json_out {
        write_json(path, &fit)?;
    }
    Ok(())
}

/// Outcome of the exhaustive single-error check.
#[derive(Debug, Clone, Serialize)]
pub struct QecReport {
    pub corrected: usize,
    pub total: usize,
    pub min_fidelity: f64,
}

/// Encodes Alice's half of `Φ⁺`, applies each single-qubit Pauli, extracts
/// the syndrome with four ancillas, corrects and decodes.
pub fn exhaustive_qec(seed: u64) -> Result<QecReport, CoreError> {
    let code = five_qubit_code();
    let phi = bell_state(BellKind::PhiPlus);
    let encoded = code.encode(&phi, 0)?;
    let block = [0, 1, 2, 3, 4];
    let ancillas = [5, 6, 7, 8];
    let (mut corrected, mut min_fidelity) = (0, 1.0f64);
    let errors = &code.syndrome_table[1..];
    for (k, error) in errors.iter().enumerate() {
        let hit = error.conjugate(&encoded, &block)?;
        let wide = hit.insert_ground_qubits(5, 4)?;
        let (syndrome, post) = code.measure_syndrome(&wide, &block, &ancillas, seed.wrapping_add(k as u64))?;
        let decoded = code.decode(&code.correct(&post, syndrome, &block)?, 0)?;
        let f = fidelity(&phi, &decoded)?;
        min_fidelity = min_fidelity.min(f);
        if syndrome == code.syndrome_of(error) && f >= 1.0 - 1e-9 {
            corrected += 1;
        }
    }
    Ok(QecReport {
        corrected,
        total: errors.len(),
        min_fidelity,
    })
}

fn qec_test(args: QecTestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let report = exhaustive_qec(args.seed)?;
    writeln!(
        out,
        "{}/{} single-qubit Pauli errors corrected",
        report.corrected, report.total
    )
    .map_err(output_error)?;
    writeln!(out, "min_fidelity={}", report.min_fidelity).map_err(output_error)?;
    if report.corrected != report.total {
        return Err(CliError::Internal(format!(
            "{} of {} errors left uncorrected",
            report.total - report.corrected,
            report.total
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct PurifyReport {
    pub p: f64,
    pub q: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub achieved_fidelity: f64,
    pub baseline_fidelity: f64,
}

fn purify_opt(args: PurifyOptArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_probability("p", args.p)?;
    check_probability("q", args.q)?;
    let estimate = NoiseEstimate {
        p_hat: args.p,
        q_hat: args.q,
        residual: 0.0,
    };
    let (angles, achieved) = optimize_angles(&estimate)?;
    let baseline = fidelity_with_pure(
        &bell_state(BellKind::PhiPlus),
        &damped_bell_pair(NoiseParams::new(args.p, args.q)?)?,
    )?;
    let report = PurifyReport {
        p: args.p,
        q: args.q,
        theta1: angles.theta1,
        theta2: angles.theta2,
        achieved_fidelity: achieved,
        baseline_fidelity: baseline,
    };
    for (k, v) in [
        ("p", report.p),
        ("q", report.q),
        ("theta1", report.theta1),
        ("theta2", report.theta2),
        ("achieved_fidelity", report.achieved_fidelity),
        ("baseline_fidelity", report.baseline_fidelity),
    ] {
        writeln!(out, "{k}={v}").map_err(output_error)?;
    }
    if let Some(path) = &args.json_out {
        write_json(path, &report)?;
    }
    Ok(())
}

fn write_protocol_result(out: &mut dyn Write, prefix: &str, r: &ProtocolResult) -> std::io::Result<()> {
    writeln!(out, "{prefix}message={}", r.message)?;
    for (m, p) in &r.decoded_distribution {
        writeln!(out, "{prefix}prob_{m}={p}")?;
    }
    for (m, c) in &r.sampled_counts {
        writeln!(out, "{prefix}count_{m}={c}")?;
    }
    writeln!(out, "{prefix}bell_fidelity={}", r.bell_fidelity)?;
    writeln!(out, "{prefix}capacity={}", r.capacity)?;
    let pm = &r.pilot_metrics;
    writeln!(out, "{prefix}pilot_fidelity={}", pm.fidelity)?;
    writeln!(out, "{prefix}pilot_qd={}", pm.qd)?;
    writeln!(out, "{prefix}pilot_eof={}", pm.eof)?;
    if let Some(e) = &r.noise_estimate {
        writeln!(out, "{prefix}p_hat={}", e.p_hat)?;
        writeln!(out, "{prefix}q_hat={}", e.q_hat)?;
    }
    if let Some(a) = &r.chosen_angles {
        writeln!(out, "{prefix}theta1={}", a.theta1)?;
        writeln!(out, "{prefix}theta2={}", a.theta2)?;
    }
    Ok(())
}

fn protocol(args: ProtocolArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_probability("p", args.p)?;
    check_probability("q", args.q)?;
    if args.shots == 0 {
        return Err(CliError::User("--shots must be at least 1".into()));
    }
    if args.pilots == 0 {
        return Err(CliError::User("--pilots must be at least 1".into()));
    }
    let messages: Vec<Message> = if args.message == "all" {
        Message::ALL.to_vec()
    } else {
        vec![args
            .message
            .parse()
            .map_err(|e: CoreError| CliError::User(e.to_string()))?]
    };
    let config = ProtocolConfig {
        noise: NoiseParams::new(args.p, args.q)?,
        use_qec: args.qec,
        use_adaptive_purification: args.purify,
        pilot_count: args.pilots,
        shots: args.shots,
        seed: args.seed,
    };
    let results = messages
        .iter()
        .map(|&m| run_protocol(&config, m))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &results {
        let total: f64 = r.decoded_distribution.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(CliError::Internal(format!(
                "decoded distribution for {} sums to {total}",
                r.message
            )));
        }
    }

    writeln!(out, "p={}", args.p).map_err(output_error)?;
    writeln!(out, "q={}", args.q).map_err(output_error)?;
    writeln!(out, "qec={}", args.qec).map_err(output_error)?;
    writeln!(out, "purify={}", args.purify).map_err(output_error)?;
    writeln!(out, "seed={}", args.seed).map_err(output_error)?;
    let single = results.len() == 1;
    for r in &results {
        let prefix = if single { String::new() } else { format!("{}.", r.message) };
        write_protocol_result(out, &prefix, r).map_err(output_error)?;
    }
    if let Some(path) = &args.json_out {
        #[derive(Serialize)]
        struct Report<'a> {
            config: &'a ProtocolConfig,
            results: &'a [ProtocolResult],
        }
        write_json(
            path,
            &Report {
                config: &config,
                results: &results,
            },
        )?;
    }
    Ok(())
}
