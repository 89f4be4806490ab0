use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;

use errgen::channels::{ideal_target, make_channel, random_small, ChannelKind, ChannelSpec};
use errgen::generators::{
    decompose, dual_generator, elementary_generator, extract_error_generator, process_from_rates, reconstruct,
    Convention, ErrorGeneratorRates, GeneratorLabel, Sector,
};
use errgen::io::{read_channel, read_rates, write_channel, write_rates, Representation};
use errgen::metrics::metrics_report;
use errgen::models::{labels_of, parameter_count, project, sector_counts, GateSetModel, ModelSpec};
use errgen::pauli::PauliString;
use errgen::report::{ReportDocument, DEFAULT_THRESHOLD};
use errgen::superop::{check_process, ProcessMatrix};
use errgen::Error;

#[derive(Parser)]
#[command(name = "errgen", version, about = "Error generators, rates and reduced models for quantum process matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the error generator of a gate and list its elementary rates
    Decompose(DecomposeArgs),
    /// Jamiolkowski probability, amplitude and entanglement fidelity
    Metrics(MetricsArgs),
    /// TP / unital / CP diagnostics for a channel file
    Check(CheckArgs),
    /// Parameter count of a model, symbolic in the number of qubits
    Count(CountArgs),
    /// Project a rates file onto a model
    Project(ProjectArgs),
    /// Write a reference channel
    MakeChannel(MakeChannelArgs),
    /// Write the matrix of one elementary (or dual) generator
    Elementary(ElementaryArgs),
    /// Sample a Bloch-sphere plane and its image under exp(T L)
    BlochAction(BlochArgs),
    /// Rebuild a process from a rates file
    Reconstruct(ReconstructArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Log,
    Diff,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Log => Convention::Logarithm,
            ConventionArg::Diff => Convention::Difference,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RepArg {
    Ptm,
    Chi,
}

impl From<RepArg> for Representation {
    fn from(r: RepArg) -> Self {
        match r {
            RepArg::Ptm => Representation::Ptm,
            RepArg::Chi => Representation::Chi,
        }
    }
}

#[derive(Args)]
struct TargetArgs {
    /// Ideal gate as a channel file
    #[arg(long, conflicts_with = "target_ideal")]
    target: Option<PathBuf>,
    /// Built-in ideal gate: I, X, Y, Z, Xpi2, Ypi2, Zpi2, CNOT, CZ (default I)
    #[arg(long)]
    target_ideal: Option<String>,
}

impl TargetArgs {
    fn load(&self, n_qubits: usize) -> errgen::Result<ProcessMatrix> {
        match (&self.target, &self.target_ideal) {
            (Some(path), _) => read_channel(path),
            (None, Some(name)) => ideal_target(name, n_qubits),
            (None, None) => ProcessMatrix::identity(n_qubits),
        }
    }
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    gate: PathBuf,
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, value_enum, default_value = "log")]
    convention: ConventionArg,
    /// Write the JSON report here ("-" for stdout instead of the table)
    #[arg(long)]
    json: Option<PathBuf>,
    /// Smallest |rate| shown in the table
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Also project onto this model and report residuals
    #[arg(long)]
    model: Option<String>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    gate: PathBuf,
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, value_enum, default_value = "log")]
    convention: ConventionArg,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    gate: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Exit with status 4 unless the channel is CPTP
    #[arg(long)]
    require_cptp: bool,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long, required_unless_present = "gate_set")]
    qubits: Option<usize>,
    #[arg(long, required_unless_present = "gate_set")]
    model: Option<String>,
    /// Gate-set JSON: {"qubits": N, "gates": {"name": "SPEC"}}
    #[arg(long, conflicts_with = "model")]
    gate_set: Option<PathBuf>,
    /// List every label (enumerable registers only)
    #[arg(long)]
    list: bool,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long)]
    rates: PathBuf,
    #[arg(long)]
    model: String,
    /// Rates file for the in-model part
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rates file for the residual
    #[arg(long)]
    residual: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Identity,
    Rotation,
    Depolarizing,
    Dephasing,
    AmplitudeDamping,
    IndivisibleXy,
    Random,
}

#[derive(Args)]
struct MakeChannelArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, default_value_t = 1)]
    qubits: usize,
    /// q, gamma, p, rotation angle or random scale, depending on the kind
    #[arg(long, default_value_t = 0.0)]
    param: f64,
    /// Pauli for rotation and dephasing
    #[arg(long)]
    pauli: Option<String>,
    /// Qubit for amplitude damping and the XY channel
    #[arg(long, default_value_t = 0)]
    qubit: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Apply the channel after this built-in ideal gate
    #[arg(long)]
    after_ideal: Option<String>,
    #[arg(long, value_enum, default_value = "ptm")]
    rep: RepArg,
    #[arg(long)]
    out: PathBuf,
    /// For random channels: write the exact generator rates here
    #[arg(long)]
    rates_out: Option<PathBuf>,
}

#[derive(Args)]
struct ElementaryArgs {
    #[arg(long)]
    qubits: usize,
    /// KIND:P[,Q], e.g. A:X,Y
    #[arg(long)]
    label: String,
    /// Write the dual generator instead
    #[arg(long)]
    dual: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlaneArg {
    Xz,
    Xy,
    Yz,
}

#[derive(Args)]
struct BlochArgs {
    #[arg(long, conflicts_with = "rates", required_unless_present = "rates")]
    label: Option<String>,
    #[arg(long)]
    rates: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "xz")]
    plane: PlaneArg,
    #[arg(long, default_value_t = 16)]
    samples: usize,
    #[arg(long, default_value_t = 0.1)]
    time: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    rates: PathBuf,
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, value_enum, default_value = "ptm")]
    rep: RepArg,
    #[arg(long)]
    out: PathBuf,
    /// Compare with this channel and print the entanglement fidelity
    #[arg(long)]
    compare: Option<PathBuf>,
}

/// Failure plus the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NoRealLogarithm(_) => 3,
            Error::NotTracePreserving(_) => 4,
            Error::InvalidModel(_) => 5,
            _ => 2,
        };
        let mut message = e.to_string();
        if code == 3 {
            message.push_str("\nhint: the error process has no real logarithm; use --convention diff");
        }
        Failure { code, message }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn emit(path: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::write(p, format!("{text}\n")),
        _ => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    emit(&Some(path.to_path_buf()), &text)?;
    Ok(())
}

fn to_stdout(path: &Option<PathBuf>) -> bool {
    path.as_ref().is_some_and(|p| p.as_os_str() == "-")
}

fn cmd_decompose(a: DecomposeArgs) -> CmdResult {
    let gate = read_channel(&a.gate)?;
    let target = a.target.load(gate.n_qubits())?;
    let convention = a.convention.into();
    let l = extract_error_generator(&gate, &target, convention)?;
    let rates = decompose(&l, convention)?;
    let mut doc = ReportDocument::new(&rates, a.threshold)
        .with_metrics(metrics_report(&gate, &target, convention)?)
        .with_diagnostics(check_process(&gate)?);
    if let Some(spec) = &a.model {
        let spec = ModelSpec::parse(spec, gate.n_qubits())?;
        let projection = project(&rates, &spec)?;
        doc = doc.with_model(&spec, &projection);
    }
    if !to_stdout(&a.json) {
        print!("{}", doc.render_text());
    }
    if let Some(p) = &a.json {
        write_json(p, &doc)?;
    }
    Ok(())
}

fn cmd_metrics(a: MetricsArgs) -> CmdResult {
    let gate = read_channel(&a.gate)?;
    let target = a.target.load(gate.n_qubits())?;
    let m = metrics_report(&gate, &target, a.convention.into())?;
    if !to_stdout(&a.json) {
        println!("epsilon_J       {:.6e}", m.epsilon_j);
        println!("theta_J         {:.6e}", m.theta_j);
        if let Some(f) = m.fidelity {
            println!("fidelity        {f:.12}");
        }
        println!("1-(eps+theta^2) {:.12}", m.fidelity_approx);
        for n in &m.notes {
            println!("note: {n}");
        }
    }
    if let Some(p) = &a.json {
        write_json(p, &m)?;
    }
    Ok(())
}

fn cmd_check(a: CheckArgs) -> CmdResult {
    let gate = read_channel(&a.gate)?;
    let d = check_process(&gate)?;
    if !to_stdout(&a.json) {
        println!("trace preserving      {} (deviation {:.3e})", d.is_tp, d.tp_deviation);
        println!("unital                {} (deviation {:.3e})", d.is_unital, d.unital_deviation);
        println!("completely positive   {} (min Choi eigenvalue {:.3e})", d.is_cp, d.min_choi_eigenvalue);
        println!("distance to identity  {:.6e}", d.distance_to_identity);
    }
    if let Some(p) = &a.json {
        write_json(p, &d)?;
    }
    if a.require_cptp && !d.is_cptp() {
        return Err(Failure { code: 4, message: "channel is not CPTP".into() });
    }
    Ok(())
}

#[derive(Serialize)]
struct CountReport {
    qubits: usize,
    model: String,
    parameters: String,
    sectors: std::collections::BTreeMap<Sector, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

fn count_one(n: usize, text: &str, list: bool) -> std::result::Result<CountReport, Failure> {
    let spec = ModelSpec::parse(text, n)?;
    let labels = if list { Some(labels_of(&spec)?.iter().map(ToString::to_string).collect()) } else { None };
    Ok(CountReport {
        qubits: n,
        model: spec.to_string(),
        parameters: parameter_count(&spec).to_string(),
        sectors: sector_counts(&spec).into_iter().map(|(s, c)| (s, c.to_string())).collect(),
        labels,
    })
}

fn cmd_count(a: CountArgs) -> CmdResult {
    let reports: Vec<(String, CountReport)> = match &a.gate_set {
        Some(path) => {
            let gs = GateSetModel::from_json(&fs::read_to_string(path)?, a.qubits)?;
            gs.gates
                .keys()
                .map(|name| Ok((name.clone(), count_one(gs.n_qubits, &gs.gates[name].to_string(), a.list)?)))
                .collect::<std::result::Result<_, Failure>>()?
        }
        None => {
            let n = a.qubits.expect("clap enforces --qubits");
            vec![(String::new(), count_one(n, a.model.as_deref().expect("clap enforces --model"), a.list)?)]
        }
    };
    if !to_stdout(&a.json) {
        for (name, r) in &reports {
            if !name.is_empty() {
                print!("{name}: ");
            }
            println!("{}", r.parameters);
            let parts: Vec<String> = r.sectors.iter().map(|(s, c)| format!("{s}={c}")).collect();
            println!("  {} [{}]", r.model, parts.join(" "));
            for l in r.labels.iter().flatten() {
                println!("  {l}");
            }
        }
    }
    if let Some(p) = &a.json {
        if a.gate_set.is_some() {
            let map: std::collections::BTreeMap<_, _> = reports.into_iter().collect();
            write_json(p, &map)?;
        } else {
            write_json(p, &reports[0].1)?;
        }
    }
    Ok(())
}

fn cmd_project(a: ProjectArgs) -> CmdResult {
    let rates = read_rates(&a.rates)?;
    let spec = ModelSpec::parse(&a.model, rates.n_qubits())?;
    let p = project(&rates, &spec)?;
    let doc = ReportDocument::new(&p.in_model, a.threshold).with_model(&spec, &p);
    if !to_stdout(&a.json) {
        print!("{}", doc.render_text());
    }
    if let Some(path) = &a.out {
        write_rates(path, &p.in_model)?;
    }
    if let Some(path) = &a.residual {
        write_rates(path, &p.residual)?;
    }
    if let Some(path) = &a.json {
        write_json(path, &doc)?;
    }
    Ok(())
}

fn pauli_arg(text: &Option<String>, n: usize) -> errgen::Result<PauliString> {
    let text = text.as_deref().ok_or_else(|| Error::InvalidChannel("--pauli is required for this kind".into()))?;
    let p: PauliString = text.parse()?;
    if p.n_qubits() != n {
        return Err(Error::QubitMismatch { left: n, right: p.n_qubits() });
    }
    Ok(p)
}

fn cmd_make_channel(a: MakeChannelArgs) -> CmdResult {
    let n = a.qubits;
    let kind = match a.kind {
        KindArg::Identity => ChannelKind::Identity,
        KindArg::Rotation => ChannelKind::PauliRotation { pauli: pauli_arg(&a.pauli, n)?, angle: a.param },
        KindArg::Depolarizing => ChannelKind::Depolarizing { q: a.param },
        KindArg::Dephasing => ChannelKind::Dephasing { pauli: pauli_arg(&a.pauli, n)?, q: a.param },
        KindArg::AmplitudeDamping => ChannelKind::AmplitudeDamping { gamma: a.param, qubit: a.qubit },
        KindArg::IndivisibleXy => ChannelKind::IndivisibleXy { p: a.param, qubit: a.qubit },
        KindArg::Random => ChannelKind::RandomSmall { seed: a.seed, scale: a.param },
    };
    let mut channel = make_channel(&ChannelSpec::new(n, kind))?;
    if let Some(name) = &a.after_ideal {
        channel = channel.compose(&ideal_target(name, n)?)?;
    }
    write_channel(&a.out, &channel, a.rep.into())?;
    if let Some(path) = &a.rates_out {
        if !matches!(a.kind, KindArg::Random) {
            return Err(Error::InvalidChannel("--rates-out is only available for random channels".into()).into());
        }
        write_rates(path, &random_small(a.seed, a.param, n)?.rates)?;
    }
    Ok(())
}

fn parse_label(text: &str, n: Option<usize>) -> errgen::Result<GeneratorLabel> {
    let label: GeneratorLabel = text.parse()?;
    if let Some(n) = n {
        if label.n_qubits() != n {
            return Err(Error::QubitMismatch { left: n, right: label.n_qubits() });
        }
    }
    Ok(label)
}

fn cmd_elementary(a: ElementaryArgs) -> CmdResult {
    let label = parse_label(&a.label, Some(a.qubits))?;
    let m = if a.dual { dual_generator(&label)? } else { elementary_generator(&label)? };
    let rows: Vec<Vec<f64>> = (0..m.dim()).map(|i| m.matrix().row(i).iter().copied().collect()).collect();
    #[derive(Serialize)]
    struct Out<'a> {
        qubits: usize,
        label: String,
        dual: bool,
        basis: &'a str,
        matrix: Vec<Vec<f64>>,
    }
    let out = Out { qubits: a.qubits, label: label.to_string(), dual: a.dual, basis: errgen::io::BASIS, matrix: rows };
    let text = serde_json::to_string_pretty(&out).map_err(Error::from)?;
    emit(&a.out, &text)?;
    Ok(())
}

fn cmd_bloch_action(a: BlochArgs) -> CmdResult {
    let l = match (&a.label, &a.rates) {
        (Some(text), _) => elementary_generator(&parse_label(text, None)?)?,
        (None, Some(path)) => reconstruct(&read_rates(path)?)?,
        (None, None) => unreachable!("clap requires one of --label/--rates"),
    };
    if l.n_qubits() != 1 {
        return Err(Error::InvalidLabel(format!(
            "bloch-action needs a 1-qubit generator, got {} qubits",
            l.n_qubits()
        ))
        .into());
    }
    if a.samples == 0 {
        return Err(Error::Parse("--samples must be positive".into()).into());
    }
    let map = l.scaled(a.time).exp()?;
    let (i, j, names) = match a.plane {
        PlaneArg::Xz => (1, 3, ("x", "z")),
        PlaneArg::Xy => (1, 2, ("x", "y")),
        PlaneArg::Yz => (2, 3, ("y", "z")),
    };
    let mut csv = format!("{0}_in,{1}_in,{0}_out,{1}_out\n", names.0, names.1);
    for k in 0..a.samples {
        let phi = std::f64::consts::TAU * k as f64 / a.samples as f64;
        let mut v = DVector::<f64>::zeros(4);
        v[0] = 1.0;
        // Snap the rounding noise of cos/sin at multiples of pi/2.
        let snap = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
        v[i] = snap(phi.cos());
        v[j] = snap(phi.sin());
        let w = map.matrix() * &v;
        csv.push_str(&format!("{},{},{},{}\n", v[i], v[j], w[i], w[j]));
    }
    match &a.out {
        Some(p) if p.as_os_str() != "-" => fs::write(p, csv)?,
        _ => print!("{csv}"),
    }
    Ok(())
}

fn cmd_reconstruct(a: ReconstructArgs) -> CmdResult {
    let rates: ErrorGeneratorRates = read_rates(&a.rates)?;
    let target = a.target.load(rates.n_qubits())?;
    let g = process_from_rates(&rates, &target)?;
    write_channel(&a.out, &g, a.rep.into())?;
    if let Some(path) = &a.compare {
        let other = read_channel(path)?;
        let f = errgen::metrics::entanglement_fidelity(&g, &other)?;
        println!("frobenius distance   {:.6e}", g.frobenius_distance(&other)?);
        println!("entanglement fidelity {:.12}", f.value);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Check(a) => cmd_check(a),
        Command::Count(a) => cmd_count(a),
        Command::Project(a) => cmd_project(a),
        Command::MakeChannel(a) => cmd_make_channel(a),
        Command::Elementary(a) => cmd_elementary(a),
        Command::BlochAction(a) => cmd_bloch_action(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
