//! Command-line front end: build and verify weak-correction protocols, run
//! master-equation and discrete-step simulations, calibrate correction rates
//! by diamond norm, and emit CSV/JSON traces and reports.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctqec::baselines::{adl_generator, AdlMap, DeltaPolicy};
use ctqec::channels::diamond_norm;
use ctqec::dynamics::{
    correction_generator, integrate_master, integrate_weights, lindblad_generator, logical_zero,
    policy_simulate, Basis, NoiseKind, NoiseModel, SimulationTrace,
};
use ctqec::protocol::{choi_distance, target_map, WeakProtocol};
use ctqec::stabilizer::{BuiltinCode, StabilizerCode};
use ctqec::CtqecError;

mod config;
mod report;

use config::{ConfigFile, RunSettings};
use report::{Format, Report, TraceTable};

/// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numeric
/// failure.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Verification(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Verification(_) => 1,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Verification(m)
            | CliError::Numeric(m)
            | CliError::Io(m) => m,
        }
    }
}

impl From<CtqecError> for CliError {
    fn from(e: CtqecError) -> Self {
        match e {
            CtqecError::Parse { .. }
            | CtqecError::UnknownCode(_)
            | CtqecError::InvalidParameter(_)
            | CtqecError::InvalidGenerators(_) => CliError::Usage(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "ctqec",
    about = "Continuous-time quantum error correction: protocols, calibration, simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Constant,
    Optimal,
}

impl PolicyArg {
    fn name(self) -> &'static str {
        match self {
            PolicyArg::Constant => "constant",
            PolicyArg::Optimal => "optimal",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    BitFlip,
    Depolarizing,
}

#[derive(Args)]
struct OutputArgs {
    /// Report/trace format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a protocol and check its invariants; exit 0 iff all pass.
    Verify {
        /// Builtin code name or path to a code-definition file.
        #[arg(long)]
        code: String,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        /// Seed for the randomized dilation check.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Simulate correction dynamics and emit a trace.
    Simulate {
        /// Flat key=value config file; flags override its entries.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        code: Option<String>,
        #[arg(long, value_enum)]
        noise: Option<NoiseArg>,
        /// Noise rate lambda (per qubit, per Pauli).
        #[arg(long)]
        lambda: Option<f64>,
        /// Correction rate: a number, or "calibrated:<kappa2>" to set it
        /// from the ADL diamond norm with gamma2 = 2*kappa2.
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
        /// Also run this policy and append its columns to the same file.
        #[arg(long, value_enum)]
        compare: Option<PolicyArg>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Sample observables every this many steps.
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compute the correction rate matching the ADL generator's diamond norm.
    Calibrate {
        /// ADL two-qubit term rate kappa2.
        #[arg(long)]
        kappa2: f64,
        /// ADL feedback Hamiltonian rate gamma2.
        #[arg(long)]
        gamma2: f64,
        /// Noise rate used only to report kappa/lambda.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Sign choices for the feedback Hamiltonian, e.g. "+++" or "+-+".
        #[arg(long, default_value = "+++")]
        signs: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the minimal protocol and the ADL averaged map side by side.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        code: Option<String>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        stride: Option<usize>,
        /// ADL feedback sign choices, e.g. "+++".
        #[arg(long)]
        signs: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print a protocol's operator matrices as self-describing text.
    Dump {
        #[arg(long)]
        code: String,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Inspect the builtin code catalog.
    Codes {
        #[command(subcommand)]
        action: CodesAction,
    },
}

#[derive(Subcommand)]
enum CodesAction {
    /// List builtin code names.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Verify {
            code,
            epsilon,
            seed,
            out,
        } => cmd_verify(&code, epsilon, seed, &out),
        Command::Simulate {
            config,
            code,
            noise,
            lambda,
            kappa,
            policy,
            compare,
            t_end,
            dt,
            stride,
            seed,
            format,
            output,
        } => {
            let file = config.map(|p| ConfigFile::load(&p)).transpose()?;
            let settings = RunSettings::merge(
                file.as_ref(),
                config::Overrides {
                    code,
                    noise: noise.map(|n| {
                        match n {
                            NoiseArg::BitFlip => "bit_flip",
                            NoiseArg::Depolarizing => "depolarizing",
                        }
                        .into()
                    }),
                    lambda,
                    kappa,
                    policy: policy.map(|p| p.name().into()),
                    compare: compare.map(|p| p.name().into()),
                    signs: None,
                    t_end,
                    dt,
                    stride,
                    seed,
                    output,
                },
            )?;
            cmd_simulate(&settings, format)
        }
        Command::Calibrate {
            kappa2,
            gamma2,
            lambda,
            signs,
            out,
        } => cmd_calibrate(kappa2, gamma2, lambda, &signs, &out),
        Command::Compare {
            config,
            code,
            lambda,
            t_end,
            dt,
            stride,
            signs,
            format,
            output,
        } => {
            let file = config.map(|p| ConfigFile::load(&p)).transpose()?;
            let settings = RunSettings::merge(
                file.as_ref(),
                config::Overrides {
                    code,
                    noise: None,
                    lambda,
                    kappa: None,
                    policy: None,
                    compare: None,
                    signs,
                    t_end,
                    dt,
                    stride,
                    seed: None,
                    output,
                },
            )?;
            cmd_compare(&settings, format)
        }
        Command::Dump {
            code,
            epsilon,
            output,
        } => {
            let code = load_code(&code)?;
            let protocol = WeakProtocol::build(code.n, code.k, epsilon)?;
            write_output(output.as_deref(), &protocol.dump_text())
        }
        Command::Codes {
            action: CodesAction::List,
        } => {
            let mut text = String::new();
            for name in BuiltinCode::names() {
                let c = StabilizerCode::builtin(BuiltinCode::parse(name).unwrap());
                writeln!(text, "{name} [[{},{}]]", c.n, c.k).unwrap();
            }
            write_output(None, &text)
        }
    }
}

/// Resolve a code argument: a builtin name, or a path to a definition file.
fn load_code(spec: &str) -> CliResult<StabilizerCode> {
    if let Ok(builtin) = BuiltinCode::parse(spec) {
        return Ok(StabilizerCode::builtin(builtin));
    }
    let path = std::path::Path::new(spec);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "unknown code {spec:?}: not a builtin name ({}) and no such file",
            BuiltinCode::names().join(", ")
        )));
    }
    let text = std::fs::read_to_string(path)?;
    StabilizerCode::from_definition_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&std::path::Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Thread budget for paired runs, from CTQEC_THREADS (default 2, min 1).
fn thread_budget() -> usize {
    std::env::var("CTQEC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .map(|v| v.max(1))
        .unwrap_or(2)
}

/// Run two independent jobs, in parallel when the thread budget allows.
fn run_pair<T: Send, F, G>(f: F, g: G) -> (CliResult<T>, CliResult<T>)
where
    F: FnOnce() -> CliResult<T> + Send,
    G: FnOnce() -> CliResult<T>,
{
    if thread_budget() >= 2 {
        std::thread::scope(|s| {
            let handle = s.spawn(f);
            let b = g();
            (handle.join().expect("worker panicked"), b)
        })
    } else {
        (f(), g())
    }
}

fn cmd_verify(code_spec: &str, epsilon: f64, seed: u64, out: &OutputArgs) -> CliResult<()> {
    let code = load_code(code_spec)?;
    let (n, k) = (code.n, code.k);
    if epsilon <= 0.0 {
        return Err(CliError::Usage(format!(
            "verify needs epsilon > 0, got {epsilon}"
        )));
    }
    let protocol = WeakProtocol::build(n, k, epsilon)?;
    let half = WeakProtocol::build(n, k, epsilon / 2.0)?;

    let mut report = Report::new("ctqec-verify/1");
    report.scalar("code", code_spec);
    report.scalar("n", n);
    report.scalar("k", k);
    report.scalar("epsilon", epsilon);
    report.scalar("ancilla_qubits", protocol.ancilla_qubits);

    report.check(
        "ancilla_qubits_minimal",
        protocol.ancilla_qubits as f64,
        (n - k + 1) as f64,
        protocol.ancilla_qubits == n - k + 1,
    );
    let rank = ctqec::channels::kraus_rank(&target_map(n, k, epsilon)?);
    report.check(
        "target_kraus_rank",
        rank as f64,
        ((1usize << (n - k)) + 1) as f64,
        rank == (1usize << (n - k)) + 1,
    );
    let completeness = protocol.kraus_channel().completeness_residual();
    report.check("completeness_residual", completeness, 1e-12, completeness <= 1e-12);

    let herm = ctqec::linalg::max_norm(
        &(&protocol.measurement_ham - protocol.measurement_ham.adjoint()),
    );
    report.check("measurement_ham_hermiticity", herm, 1e-12, herm <= 1e-12);

    let full = protocol.verify_dilation(16, seed);
    let halved = half.verify_dilation(16, seed);
    report.check(
        "dilation_order_conditions",
        full.first_moment_residual
            .max(full.second_moment_residual)
            .max(full.hermiticity_residual),
        1e-10,
        full.order_conditions_hold(1e-10),
    );
    // A correct dilation leaves a third-order state residual, so halving
    // epsilon shrinks it by about 8.
    let dilation_ratio = full.max_state_residual / halved.max_state_residual.max(1e-300);
    report.check(
        "dilation_residual_scaling",
        dilation_ratio,
        8.0,
        (5.0..=12.0).contains(&dilation_ratio),
    );

    let target = target_map(n, k, epsilon)?;
    let target_half = target_map(n, k, epsilon / 2.0)?;
    let dist = choi_distance(&protocol.effective_channel(), &target);
    let dist_half = choi_distance(&half.effective_channel(), &target_half);
    // The composed channel matches the target to at least third order.
    let choi_ratio = dist / dist_half.max(1e-300);
    report.check(
        "effective_channel_scaling",
        choi_ratio,
        8.0,
        choi_ratio >= 6.0,
    );

    let text = report.render(out.format);
    write_output(out.out_path(), &text)?;
    if report.all_pass() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{} of {} checks failed",
            report.failed(),
            report.total()
        )))
    }
}

fn parse_signs(s: &str) -> CliResult<[i8; 3]> {
    let cleaned: Vec<char> = s.chars().filter(|c| *c == '+' || *c == '-').collect();
    if cleaned.len() != 3 {
        return Err(CliError::Usage(format!(
            "signs must contain exactly three of '+'/'-', got {s:?}"
        )));
    }
    let mut signs = [1i8; 3];
    for (i, c) in cleaned.iter().enumerate() {
        signs[i] = if *c == '+' { 1 } else { -1 };
    }
    Ok(signs)
}

fn signs_label(signs: [i8; 3]) -> String {
    signs
        .iter()
        .map(|s| if *s > 0 { '+' } else { '-' })
        .collect()
}

/// kappa = ||G_ADL||_diamond / 2: the correction rate whose strong-correction
/// generator kappa(R - id) has the same per-time diamond-norm strength,
/// since ||R - id||_diamond = 2.
fn calibrated_kappa(kappa2: f64, gamma2: f64, signs: [i8; 3]) -> CliResult<f64> {
    let code = StabilizerCode::builtin(BuiltinCode::ThreeQubitBitFlip);
    let map = AdlMap::new(kappa2, gamma2, signs, code)?;
    let gen = adl_generator(&map)?;
    let norm = diamond_norm(&gen)?;
    if !norm.converged {
        return Err(CliError::Numeric(
            "diamond-norm search did not converge".into(),
        ));
    }
    Ok(norm.value / 2.0)
}

fn cmd_calibrate(
    kappa2: f64,
    gamma2: f64,
    lambda: f64,
    signs_str: &str,
    out: &OutputArgs,
) -> CliResult<()> {
    if kappa2 <= 0.0 || gamma2 <= 0.0 || lambda <= 0.0 {
        return Err(CliError::Usage(format!(
            "calibrate needs positive rates, got kappa2={kappa2}, gamma2={gamma2}, lambda={lambda}"
        )));
    }
    let signs = parse_signs(signs_str)?;
    let kappa = calibrated_kappa(kappa2, gamma2, signs)?;

    let mut report = Report::new("ctqec-calibrate/1");
    report.scalar("kappa2", kappa2);
    report.scalar("gamma2", gamma2);
    report.scalar("lambda", lambda);
    report.scalar("signs", signs_label(signs));
    report.scalar("kappa", kappa);
    report.scalar("kappa_over_kappa2", kappa / kappa2);
    report.scalar("kappa_over_lambda", kappa / lambda);
    write_output(out.out_path(), &report.render(out.format))
}

fn cmd_simulate(settings: &RunSettings, format: Format) -> CliResult<()> {
    let code = load_code(&settings.code)?;
    let kappa = resolve_kappa(&settings.kappa)?;
    let policy = parse_policy(&settings.policy)?;
    let compare = settings
        .compare
        .as_deref()
        .map(|p| parse_policy(p))
        .transpose()?;
    let noise_kind = match settings.noise.as_str() {
        "bit_flip" => NoiseKind::BitFlip,
        "depolarizing" => NoiseKind::Depolarizing,
        other => {
            return Err(CliError::Usage(format!(
                "unknown noise kind {other:?} (bit_flip, depolarizing)"
            )))
        }
    };

    let run_policy = |p: DeltaPolicy| -> CliResult<SimulationTrace> {
        if code.n == 3 && code.k == 1 && noise_kind == NoiseKind::BitFlip {
            // Bit-flip dynamics on a 3-qubit code close on the four
            // syndrome-class weights, so integrate those directly.
            Ok(integrate_weights(
                settings.lambda,
                kappa,
                p,
                settings.t_end,
                settings.dt,
                settings.stride,
            )?)
        } else {
            let model = NoiseModel::new(noise_kind, settings.lambda, code.n, true)?;
            let psi0 = logical_zero(&code);
            let rho0 = &psi0 * psi0.adjoint();
            let steps = (settings.t_end / settings.dt).round().max(1.0) as usize;
            Ok(policy_simulate(
                &code,
                &model,
                kappa,
                p,
                &rho0,
                &psi0,
                steps,
                settings.dt,
                settings.stride,
            )?)
        }
    };

    let mut table = TraceTable::new("ctqec-trace/1");
    table.meta("code", settings.code.as_str());
    table.meta("noise", settings.noise.as_str());
    table.meta("lambda", settings.lambda);
    table.meta("kappa", kappa);
    table.meta("policy", policy_name(policy));
    table.meta("seed", settings.seed);

    match compare {
        None => {
            let trace = run_policy(policy)?;
            table.add_trace(&trace, "")?;
        }
        Some(other) => {
            table.meta("compare", policy_name(other));
            let (a, b) = run_pair(|| run_policy(policy), || run_policy(other));
            let (a, b) = (a?, b?);
            table.add_trace(&a, "")?;
            table.add_trace(&b, &format!("_{}", policy_name(other)))?;
        }
    }
    write_output(settings.output.as_deref(), &table.render(format))
}

fn cmd_compare(settings: &RunSettings, format: Format) -> CliResult<()> {
    let code = load_code(&settings.code)?;
    if code.n != 3 || code.k != 1 {
        return Err(CliError::Usage(format!(
            "compare needs a 3-qubit single-logical code, got [[{},{}]]",
            code.n, code.k
        )));
    }
    let signs = parse_signs(&settings.signs)?;
    let lambda = settings.lambda;
    let kappa2 = 64.0 * lambda;
    let gamma2 = 128.0 * lambda;
    let kappa = calibrated_kappa(kappa2, gamma2, signs)?;

    let noise = NoiseModel::bit_flip(lambda, code.n)?;
    let gen_noise = lindblad_generator(&noise, &code, Basis::Corrected)?;
    let psi0 = logical_zero(&code);
    let rho0 = &psi0 * psi0.adjoint();

    let ours = || -> CliResult<SimulationTrace> {
        let gen_correct = correction_generator(code.n, code.k, kappa)?;
        Ok(integrate_master(
            &gen_noise,
            &gen_correct,
            &code,
            &rho0,
            &psi0,
            settings.t_end,
            settings.dt,
            settings.stride,
        )?)
    };
    let adl = || -> CliResult<SimulationTrace> {
        let map = AdlMap::new(kappa2, gamma2, signs, code.clone())?;
        let gen_adl = adl_generator(&map)?;
        Ok(integrate_master(
            &gen_noise,
            &gen_adl,
            &code,
            &rho0,
            &psi0,
            settings.t_end,
            settings.dt,
            settings.stride,
        )?)
    };
    let (a, b) = run_pair(ours, adl);
    let (ours_trace, adl_trace) = (a?, b?);

    let mut table = TraceTable::new("ctqec-compare/1");
    table.meta("code", settings.code.as_str());
    table.meta("lambda", lambda);
    table.meta("kappa", kappa);
    table.meta("kappa2", kappa2);
    table.meta("gamma2", gamma2);
    table.meta("signs", signs_label(signs));
    table.add_trace(&ours_trace, "")?;
    table.add_trace(&adl_trace, "_adl")?;
    write_output(settings.output.as_deref(), &table.render(format))
}

fn parse_policy(name: &str) -> CliResult<DeltaPolicy> {
    match name {
        "constant" => Ok(DeltaPolicy::Constant),
        "optimal" => Ok(DeltaPolicy::Optimal),
        other => Err(CliError::Usage(format!(
            "unknown policy {other:?} (constant, optimal)"
        ))),
    }
}

fn policy_name(p: DeltaPolicy) -> &'static str {
    match p {
        DeltaPolicy::Constant => "constant",
        DeltaPolicy::Optimal => "optimal",
    }
}

/// A kappa spec is either a plain rate or "calibrated:<kappa2>", which sets
/// kappa from the ADL diamond norm with gamma2 = 2*kappa2 and default signs.
fn resolve_kappa(spec: &str) -> CliResult<f64> {
    if let Some(rest) = spec.strip_prefix("calibrated:") {
        let kappa2: f64 = rest
            .parse()
            .map_err(|_| CliError::Usage(format!("bad kappa2 in {spec:?}")))?;
        if kappa2 <= 0.0 {
            return Err(CliError::Usage(format!(
                "calibrated kappa2 must be positive, got {kappa2}"
            )));
        }
        calibrated_kappa(kappa2, 2.0 * kappa2, [1, 1, 1])
    } else {
        let kappa: f64 = spec
            .parse()
            .map_err(|_| CliError::Usage(format!("bad kappa {spec:?}")))?;
        if kappa < 0.0 {
            return Err(CliError::Usage(format!(
                "kappa must be nonnegative, got {kappa}"
            )));
        }
        Ok(kappa)
    }
}

impl OutputArgs {
    fn out_path(&self) -> Option<&std::path::Path> {
        self.output.as_deref()
    }
}
