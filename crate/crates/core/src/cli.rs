//! Command-line front end. [`run`] is the whole program minus process
//! setup, so it can be driven from tests with in-memory streams.
//!
//! Exit codes: 0 ok, 1 a check failed, 2 bad input, 3 a resource cap was
//! hit, 4 a requested wire cannot be carved.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::config::{parse_protocol, parse_site, parse_size, ConfigError, ProtocolSpec, RunConfig};
use crate::defects::{
    dead_pixel_survey, figure_of_merit, inject_noise, preparation_time, timing_csv, timing_table, total_preparation_time,
    DefectError, DefectModel, InjectedError, TimingMode,
};
use crate::donor::{
    predicted_edge_set, predicted_edge_set_for, run_protocol, Backend, DonorError, DonorLattice, ElectronMeasurement,
    PauliFrame, ProtocolKind,
};
use crate::graph::{ExportFormat, GraphError, GraphState};
use crate::mbqc::{
    carve_wire, parse_target, verify_clifford, verify_logical, LogicalChannelReport, MbqcError, MeasurementPattern,
};
use crate::pulse::{fidelity_sweep, PulseError, TWO_PI};
use crate::rng::SeedStream;
use crate::statevector::{DenseError, MAX_DENSE_QUBITS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),
    #[error("{path}: {source}")]
    PatternFile { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Donor(#[from] DonorError),
    #[error(transparent)]
    Defect(#[from] DefectError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Mbqc(#[from] MbqcError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) | CliError::Write(_) => EXIT_CHECK_FAILED,
            CliError::Donor(e) | CliError::Defect(DefectError::Donor(e)) => donor_code(e),
            CliError::Mbqc(MbqcError::NoPath { .. } | MbqcError::EndpointForbidden(_)) => EXIT_INFEASIBLE,
            CliError::Mbqc(MbqcError::Dense(DenseError::TooManyQubits { .. })) => EXIT_RESOURCE,
            CliError::Mbqc(MbqcError::OutputEntangled(_) | MbqcError::Stabilizer(_)) => EXIT_CHECK_FAILED,
            _ => EXIT_CONFIG,
        }
    }
}

fn donor_code(e: &DonorError) -> i32 {
    match e {
        DonorError::BackendCap { .. } | DonorError::Dense(DenseError::TooManyQubits { .. }) => EXIT_RESOURCE,
        DonorError::InvalidSize { .. } | DonorError::DeadOutOfBounds(..) | DonorError::InvalidPolarization(_) => {
            EXIT_CONFIG
        }
        _ => EXIT_CHECK_FAILED,
    }
}

#[derive(Debug, Parser)]
#[command(name = "sicluster", version, about = "Silicon-donor cluster-state simulator")]
pub struct Cli {
    /// Root seed for every random draw (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format: dot|json for graphs, csv|json for tables, text|json for checks.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a growth protocol and export the resulting cluster.
    BuildCluster(BuildArgs),
    /// Check simulated topologies against the predictor on small lattices.
    VerifyProtocol(VerifyArgs),
    /// Fidelity sweep of the composite controlled-phase gate.
    Pulse(PulseArgs),
    /// Run a measurement pattern and verify its logical map.
    Mbqc(MbqcArgs),
    /// Preparation-time table.
    Timing(TimingArgs),
    /// Dead-pixel topology survey.
    Survey(SurveyArgs),
}

#[derive(Debug, Args, Default)]
pub struct LatticeArgs {
    /// Lattice size as LXxLY.
    #[arg(long)]
    pub size: Option<String>,
    /// standard or square.
    #[arg(long)]
    pub protocol: Option<String>,
    /// Dead sites as "i,j;i,j;...".
    #[arg(long)]
    pub dead: Option<String>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// stabilizer (default) or statevector (at most 22 qubits).
    #[arg(long)]
    pub backend: Option<Backend>,
    /// Write a JSON run report (outcomes, frame, timing) here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Export the post-measurement graph without undoing the frame.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest lattice checked, LXxLY.
    #[arg(long, default_value = "4x4")]
    pub max_size: String,
    /// Only this protocol (default: both).
    #[arg(long)]
    pub protocol: Option<String>,
    /// Only this backend (default: both).
    #[arg(long)]
    pub backend: Option<Backend>,
    /// Compare against a deliberately broken predictor.
    #[arg(long, hide = true)]
    pub inject_wrong_predictor: bool,
}

#[derive(Debug, Args)]
pub struct PulseArgs {
    /// Comma-separated target angles; accepts forms like pi, pi/2, 3pi/4, 0.7.
    #[arg(long, default_value = "pi")]
    pub theta: String,
    /// Comma-separated Rabi frequencies in Hz; inf is the instantaneous limit.
    #[arg(long, default_value = "inf,25e6")]
    pub rabi_hz: String,
    /// Hyperfine coupling A/2π in Hz (the electron offset follows at −A/2).
    #[arg(long)]
    pub hyperfine_hz: Option<f64>,
    /// Keep the flip-flop part of the hyperfine coupling.
    #[arg(long)]
    pub non_secular: bool,
    /// Electron Zeeman frequency in Hz for the non-secular model.
    #[arg(long)]
    pub zeeman_hz: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MbqcArgs {
    /// Pattern JSON file.
    #[arg(long, required_unless_present = "carve")]
    pub pattern: Option<PathBuf>,
    /// Cluster: line:N or a graph JSON file (default: a line over the pattern vertices).
    #[arg(long)]
    pub cluster: Option<String>,
    /// identity, h, cz, rz:θ, rx:θ or zxz:α,β,γ.
    #[arg(long, default_value = "identity")]
    pub target: String,
    #[arg(long, default_value_t = 50)]
    pub shots: usize,
    /// statevector (default) or stabilizer; carving defaults to stabilizer.
    #[arg(long)]
    pub backend: Option<Backend>,
    /// Largest accepted trace distance.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Carve a wire through a grown cluster instead of reading a pattern.
    #[arg(long)]
    pub carve: bool,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Wire start site i,j.
    #[arg(long, requires = "carve")]
    pub from: Option<String>,
    /// Wire end site i,j.
    #[arg(long, requires = "carve")]
    pub to: Option<String>,
}

#[derive(Debug, Args)]
pub struct TimingArgs {
    /// Comma-separated qubit counts.
    #[arg(long, default_value = "100,10000,1000000")]
    pub n: String,
    /// sequential, parallel or both.
    #[arg(long, default_value = "both")]
    pub mode: String,
}

#[derive(Debug, Args)]
pub struct SurveyArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Overrides the configured random dead fraction.
    #[arg(long)]
    pub dead_fraction: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
}

/// Parses `args` (program name first) and runs the command, returning the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = Output { path: cli.out.clone().or_else(|| cfg.output.path.clone()) };
    let format = cli.format.clone().or_else(|| cfg.output.format.clone());
    match &cli.command {
        Command::BuildCluster(a) => build_cluster(cfg, a, format, &out, stdout, stderr),
        Command::VerifyProtocol(a) => verify_protocol(a, format, &out, stdout),
        Command::Pulse(a) => pulse(cfg, a, format, &out, stdout),
        Command::Mbqc(a) => mbqc(cfg, a, &out, stdout, stderr),
        Command::Timing(a) => timing(cfg, a, format, &out, stdout, stderr),
        Command::Survey(a) => survey(cfg, a, &out, stdout),
    }
}

struct Output {
    path: Option<PathBuf>,
}

impl Output {
    fn emit(&self, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
        match &self.path {
            Some(p) => std::fs::write(p, bytes)?,
            None => stdout.write_all(bytes)?,
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s.into_bytes()
}

fn check_format(format: Option<String>, allowed: &[&str]) -> Result<String, CliError> {
    let f = format.unwrap_or_else(|| allowed[0].to_string()).to_ascii_lowercase();
    if allowed.contains(&f.as_str()) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!("unsupported format {f:?} (expected one of {})", allowed.join(", "))))
    }
}

fn apply_lattice_args(cfg: &mut RunConfig, a: &LatticeArgs) -> Result<(), CliError> {
    if let Some(s) = &a.size {
        (cfg.lx, cfg.ly) = parse_size(s)?;
    }
    if let Some(p) = &a.protocol {
        parse_protocol(p)?;
        cfg.protocol = ProtocolSpec::Named(p.clone());
    }
    if let Some(d) = &a.dead {
        cfg.dead = d.split(';').map(str::trim).filter(|s| !s.is_empty()).map(parse_site).collect::<Result<_, _>>()?;
    }
    cfg.validate()?;
    Ok(())
}

fn named_kind(cfg: &RunConfig) -> Result<ProtocolKind, CliError> {
    cfg.protocol
        .kind()
        .ok_or_else(|| CliError::Usage("this command needs a named protocol (standard or square)".into()))
}

fn is_noiseless(dm: &DefectModel) -> bool {
    dm.meas_flip == 0.0 && dm.shuttle_dephasing == 0.0 && dm.init_flip_electron == 0.0 && dm.init_flip_nuclear == 0.0
}

#[derive(Serialize)]
struct TimingReport {
    mode: TimingMode,
    preparation_s: f64,
    total_s: f64,
}

#[derive(Serialize)]
struct NoiseReport<'a> {
    nuclear_error_probability: f64,
    errors: &'a [InjectedError],
}

#[derive(Serialize)]
struct BuildReport<'a> {
    lx: usize,
    ly: usize,
    protocol: String,
    backend: Backend,
    seed: u64,
    dead: Vec<(usize, usize)>,
    vertices: usize,
    edges: usize,
    predicted_match: Option<bool>,
    outcomes: &'a [ElectronMeasurement],
    frame: &'a PauliFrame,
    warnings: &'a [String],
    timing: TimingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseReport<'a>>,
}

fn build_cluster(
    mut cfg: RunConfig,
    a: &BuildArgs,
    format: Option<String>,
    out: &Output,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    apply_lattice_args(&mut cfg, &a.lattice)?;
    if let Some(b) = a.backend {
        cfg.backend = b;
    }
    let format: ExportFormat = check_format(format, &["dot", "json"])?.parse()?;
    let seeds = SeedStream::new(cfg.seed);
    let lattice = cfg.defects.apply_to(&cfg.lattice()?, seeds)?;
    let steps = cfg.protocol.steps()?;

    let (run, noise) = if is_noiseless(&cfg.defects) {
        (run_protocol(&lattice, &steps, cfg.backend, &mut seeds.rng("protocol"))?, None)
    } else {
        let noisy = inject_noise(&lattice, &steps, cfg.backend, &cfg.defects, &cfg.timing, seeds)?;
        (noisy.run.clone(), Some(noisy))
    };
    let predicted_match = predicted_edge_set_for(&lattice, &steps).ok().map(|p| p == run.graph.edges());
    let graph = if a.raw { run.graph.clone() } else { run.corrected_graph() };
    out.emit(&graph.export(format), stdout)?;
    log::info!("{} run: {} electron measurements", cfg.protocol.label(), run.measurements.len());
    writeln!(
        stderr,
        "{}x{} {} cluster on {:?}: {} vertices, {} edges{}",
        lattice.lx(),
        lattice.ly(),
        cfg.protocol.label(),
        cfg.backend,
        graph.len(),
        graph.edge_count(),
        match predicted_match {
            Some(true) => ", matches predictor",
            Some(false) => ", DOES NOT match predictor",
            None => "",
        }
    )?;

    if let Some(path) = &a.report {
        let n = lattice.live_count().max(1);
        let report = BuildReport {
            lx: lattice.lx(),
            ly: lattice.ly(),
            protocol: cfg.protocol.label(),
            backend: cfg.backend,
            seed: cfg.seed,
            dead: lattice.dead_sites().collect(),
            vertices: graph.len(),
            edges: graph.edge_count(),
            predicted_match,
            outcomes: &run.measurements,
            frame: &run.frame,
            warnings: &run.warnings,
            timing: TimingReport {
                mode: cfg.timing.mode,
                preparation_s: preparation_time(n, &cfg.timing)?,
                total_s: total_preparation_time(n, &cfg.timing, &cfg.defects)?,
            },
            noise: noise.as_ref().map(|r| NoiseReport {
                nuclear_error_probability: r.nuclear_error_probability,
                errors: &r.errors,
            }),
        };
        std::fs::write(path, to_json(&report))?;
    }
    match predicted_match {
        Some(false) => Err(CliError::CheckFailed("simulated edges differ from the predicted edge set".into())),
        _ => Ok(()),
    }
}

#[derive(Clone, Debug, Serialize)]
struct VerifyRow {
    lx: usize,
    ly: usize,
    protocol: &'static str,
    /// Backend name, or `agreement` for the cross-backend comparison.
    check: String,
    status: &'static str,
    detail: String,
}

fn verify_protocol(a: &VerifyArgs, format: Option<String>, out: &Output, stdout: &mut dyn Write) -> Result<(), CliError> {
    let format = check_format(format, &["text", "json"])?;
    let (mx, my) = parse_size(&a.max_size)?;
    let kinds = match &a.protocol {
        Some(p) => vec![parse_protocol(p)?],
        None => vec![ProtocolKind::Standard, ProtocolKind::Square],
    };
    let backends = match a.backend {
        Some(b) => vec![b],
        None => vec![Backend::Stabilizer, Backend::Statevector],
    };
    let mut rows = Vec::new();
    for ly in 1..=my {
        for lx in 1..=mx {
            let lattice = DonorLattice::new(lx, ly)?;
            for &kind in &kinds {
                let mut want = predicted_edge_set(&lattice, kind);
                if a.inject_wrong_predictor {
                    if want.pop().is_none() {
                        want.push((0, lattice.num_sites()));
                    }
                }
                let mut corrected = Vec::new();
                for &b in &backends {
                    let row = |status, detail: String| VerifyRow {
                        lx,
                        ly,
                        protocol: kind.name(),
                        check: format!("{b:?}").to_ascii_lowercase(),
                        status,
                        detail,
                    };
                    // Every lattice gets its own stream so rows do not depend on the grid bounds.
                    let mut rng = SeedStream::new(0).child("verify", (ly * 1000 + lx) as u64).rng(kind.name());
                    match run_protocol(&lattice, &kind.steps(), b, &mut rng) {
                        Ok(r) => {
                            let edges = r.graph.edges();
                            rows.push(if edges == want {
                                row("PASS", format!("{} edges", edges.len()))
                            } else {
                                row("FAIL", format!("{} edges, predictor has {}", edges.len(), want.len()))
                            });
                            corrected.push(r.corrected_graph());
                        }
                        Err(DonorError::BackendCap { needed, max }) => {
                            rows.push(row("SKIP", format!("needs {needed} qubits, cap {max}")))
                        }
                        Err(e) => rows.push(row("FAIL", e.to_string())),
                    }
                }
                if corrected.len() == 2 {
                    let same = corrected[0] == corrected[1];
                    rows.push(VerifyRow {
                        lx,
                        ly,
                        protocol: kind.name(),
                        check: "agreement".into(),
                        status: if same { "PASS" } else { "FAIL" },
                        detail: if same { "corrected graphs identical".into() } else { "corrected graphs differ".into() },
                    });
                }
            }
        }
    }
    let count = |s: &str| rows.iter().filter(|r| r.status == s).count();
    let (pass, fail, skip) = (count("PASS"), count("FAIL"), count("SKIP"));
    let body = if format == "json" {
        to_json(&rows)
    } else {
        let mut s = String::new();
        for r in &rows {
            s.push_str(&format!("{}x{} {} {} {} ({})\n", r.lx, r.ly, r.protocol, r.check, r.status, r.detail));
        }
        s.push_str(&format!("{pass} passed, {fail} failed, {skip} skipped\n"));
        s.into_bytes()
    };
    out.emit(&body, stdout)?;
    if fail > 0 {
        return Err(CliError::CheckFailed(format!("{fail} protocol checks failed")));
    }
    Ok(())
}

/// Parses `pi`, `-pi/2`, `3pi/4`, `3*pi/4` or a plain number.
pub fn parse_angle(s: &str) -> Result<f64, CliError> {
    let bad = || CliError::Usage(format!("bad angle {s:?}"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().map_err(|_| bad())?),
        None => (t.clone(), 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            c * std::f64::consts::PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    let v = value / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

fn pulse(cfg: RunConfig, a: &PulseArgs, format: Option<String>, out: &Output, stdout: &mut dyn Write) -> Result<(), CliError> {
    let format = check_format(format, &["csv", "json"])?;
    let mut sys = cfg.pulse.unwrap_or_default();
    if let Some(hz) = a.hyperfine_hz {
        let a = TWO_PI * hz;
        sys.hyperfine = a;
        sys.electron_offset = -a / 2.0;
    }
    if a.non_secular {
        sys.secular = false;
    }
    if let Some(hz) = a.zeeman_hz {
        sys.electron_zeeman = TWO_PI * hz;
    }
    let thetas: Vec<f64> = split_list(&a.theta).map(parse_angle).collect::<Result<_, _>>()?;
    let omegas: Vec<Option<f64>> = split_list(&a.rabi_hz)
        .map(|w| match w.to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(None),
            _ => w
                .parse::<f64>()
                .map(|hz| Some(TWO_PI * hz))
                .map_err(|_| CliError::Usage(format!("bad Rabi frequency {w:?}"))),
        })
        .collect::<Result<_, _>>()?;
    let sweep = fidelity_sweep(&sys, &thetas, &omegas)?;
    let body = if format == "json" { to_json(&sweep) } else { sweep.to_csv().into_bytes() };
    out.emit(&body, stdout)
}

#[derive(Serialize)]
struct MbqcReport {
    mode: &'static str,
    backend: Backend,
    seed: u64,
    tolerance: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z_prefix: Option<Vec<usize>>,
    #[serde(flatten)]
    channel: LogicalChannelReport,
}

fn load_cluster(spec: Option<&str>, pattern: &MeasurementPattern) -> Result<GraphState, CliError> {
    let line = |n: usize| -> Result<GraphState, CliError> {
        let edges: Vec<(usize, usize)> = (1..n).map(|v| (v - 1, v)).collect();
        Ok(GraphState::from_edges(n, &edges)?)
    };
    match spec {
        Some(s) if s.starts_with("line:") => {
            let n = s[5..].parse::<usize>().map_err(|_| CliError::Usage(format!("bad cluster {s:?}")))?;
            line(n)
        }
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
            Ok(GraphState::from_json(&text)?)
        }
        None => {
            let max = pattern
                .inputs
                .iter()
                .chain(&pattern.outputs)
                .chain(pattern.steps.iter().map(|s| &s.v))
                .copied()
                .max()
                .unwrap_or(0);
            line(max + 1)
        }
    }
}

/// Subgraph of `g` induced by `keep`.
fn induced(g: &GraphState, keep: &BTreeSet<usize>) -> Result<GraphState, CliError> {
    let mut sub = GraphState::with_ids(keep.iter().copied().collect())?;
    for (u, v) in g.edges() {
        if keep.contains(&u) && keep.contains(&v) {
            sub.toggle_edge(u, v)?;
        }
    }
    Ok(sub)
}

fn mbqc(
    mut cfg: RunConfig,
    a: &MbqcArgs,
    out: &Output,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let seeds = SeedStream::new(cfg.seed);
    let (cluster, pattern, target, backend, path, z_prefix) = if a.carve {
        apply_lattice_args(&mut cfg, &a.lattice)?;
        let kind = named_kind(&cfg)?;
        let lattice = cfg.defects.apply_to(&cfg.lattice()?, seeds)?;
        let g = GraphState::from_edges(lattice.num_sites(), &predicted_edge_set(&lattice, kind))?;
        let live: BTreeSet<usize> = lattice.live_sites().into_iter().collect();
        let dead: BTreeSet<usize> = (0..lattice.num_sites()).filter(|s| !live.contains(s)).collect();
        let site = |s: &Option<String>, name: &str| -> Result<usize, CliError> {
            let s = s.as_deref().ok_or_else(|| CliError::Usage(format!("--carve needs --{name} i,j")))?;
            let [i, j] = parse_site(s)?;
            if i >= lattice.lx() || j >= lattice.ly() {
                return Err(CliError::Usage(format!("site {s:?} lies outside the lattice")));
            }
            Ok(lattice.site_id(i, j))
        };
        let wire = carve_wire(&g, site(&a.from, "from")?, site(&a.to, "to")?, &dead)?;
        let pattern = wire.pattern(&g)?;
        let keep: BTreeSet<usize> = wire.path.iter().chain(&wire.z_prefix).copied().collect();
        let cluster = induced(&g, &keep)?;
        writeln!(stderr, "carved a {}-vertex wire with {} cut vertices", wire.len(), wire.z_prefix.len())?;
        let backend = a.backend.unwrap_or(Backend::Stabilizer);
        (cluster, pattern, wire.target(), backend, Some(wire.path.clone()), Some(wire.z_prefix.clone()))
    } else {
        let file = a.pattern.as_ref().expect("clap enforces --pattern without --carve");
        let text = std::fs::read_to_string(file).map_err(|source| CliError::Read { path: file.clone(), source })?;
        let pattern = MeasurementPattern::from_json(&text)
            .map_err(|source| CliError::PatternFile { path: file.clone(), source })?;
        pattern.validate()?;
        let cluster = load_cluster(a.cluster.as_deref(), &pattern)?;
        let target = parse_target(&a.target, pattern.inputs.len())?;
        (cluster, pattern, target, a.backend.unwrap_or(Backend::Statevector), None, None)
    };
    if backend == Backend::Statevector && cluster.len() + pattern.inputs.len() > MAX_DENSE_QUBITS {
        return Err(CliError::Mbqc(MbqcError::Dense(DenseError::TooManyQubits {
            n: cluster.len() + pattern.inputs.len(),
            max: MAX_DENSE_QUBITS,
        })));
    }
    let channel = match backend {
        Backend::Statevector => verify_logical(&cluster, &pattern, &target, seeds, a.shots)?,
        Backend::Stabilizer => verify_clifford(&cluster, &pattern, &target, seeds, a.shots)?,
    };
    let pass = channel.distance <= a.tolerance;
    writeln!(
        stderr,
        "worst trace distance {:.3e} over {} shots (tolerance {:.1e}): {}",
        channel.distance,
        a.shots,
        a.tolerance,
        if pass { "PASS" } else { "FAIL" }
    )?;
    let report = MbqcReport {
        mode: if a.carve { "carve" } else { "pattern" },
        backend,
        seed: cfg.seed,
        tolerance: a.tolerance,
        pass,
        path,
        z_prefix,
        channel,
    };
    out.emit(&to_json(&report), stdout)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("trace distance {:.3e} exceeds {:.1e}", report.channel.distance, a.tolerance)))
    }
}

#[derive(Serialize)]
struct TimingDoc {
    rows: Vec<crate::defects::TimingRow>,
    t2n: f64,
    meas_rate: f64,
    figure_of_merit: f64,
}

fn timing(
    cfg: RunConfig,
    a: &TimingArgs,
    format: Option<String>,
    out: &Output,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let format = check_format(format, &["csv", "json"])?;
    let ns: Vec<usize> = split_list(&a.n)
        .map(|n| {
            n.parse::<f64>()
                .ok()
                .filter(|v| v.fract() == 0.0 && *v >= 1.0 && *v <= usize::MAX as f64)
                .map(|v| v as usize)
                .ok_or_else(|| CliError::Usage(format!("bad qubit count {n:?}")))
        })
        .collect::<Result<_, _>>()?;
    if ns.is_empty() {
        return Err(CliError::Usage("--n needs at least one qubit count".into()));
    }
    let modes = match a.mode.as_str() {
        "both" => vec![TimingMode::Sequential, TimingMode::Parallel],
        m => vec![m.parse::<TimingMode>().map_err(CliError::Usage)?],
    };
    let rows = timing_table(&ns, &modes, &cfg.timing)?;
    let fom = figure_of_merit(cfg.defects.t2n, cfg.timing.meas_rate)?;
    let body = if format == "json" {
        to_json(&TimingDoc { rows, t2n: cfg.defects.t2n, meas_rate: cfg.timing.meas_rate, figure_of_merit: fom })
    } else {
        timing_csv(&rows).into_bytes()
    };
    out.emit(&body, stdout)?;
    writeln!(stderr, "figure_of_merit,{fom:.6e}")?;
    Ok(())
}

fn survey(mut cfg: RunConfig, a: &SurveyArgs, out: &Output, stdout: &mut dyn Write) -> Result<(), CliError> {
    apply_lattice_args(&mut cfg, &a.lattice)?;
    if let Some(f) = a.dead_fraction {
        cfg.defects.dead_fraction = f;
        cfg.defects.validate()?;
    }
    let kind = named_kind(&cfg)?;
    let report = dead_pixel_survey(&cfg.lattice()?, &cfg.defects, kind, SeedStream::new(cfg.seed), a.pairs)?;
    out.emit(&to_json(&report), stdout)
}
