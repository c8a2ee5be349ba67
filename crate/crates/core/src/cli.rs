//! Command-line driver: decide, refine, select-jets, extend, verify,
//! oracle-compare and print-config.
//!
//! Exit codes: 0 success or extendable, 10 not extendable, 11 inconclusive,
//! 12 verification failed, 1 input error, 2 state mismatch.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::fibers::FiberField;
use crate::geometry::SampleSet;
use crate::jet::Jet;
use crate::refinement::{
    decide, decide_classical, refine_round_traced, select_jets, select_jets_forced, Decision, RefinementConfig,
    RoundRecord, VerdictStatus,
};
use crate::verify::{verify_extension, GridSpec, VerificationReport, VerifyOptions};
use crate::whitney::{extend, DomainBox, ExtendOptions, ExtensionFunction};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_STATE: i32 = 2;
pub const EXIT_NOT_EXTENDABLE: i32 = 10;
pub const EXIT_INCONCLUSIVE: i32 = 11;
pub const EXIT_VERIFY_FAILED: i32 = 12;

/// Relative margin of the default domain box around the samples.
pub const DOMAIN_MARGIN: f64 = 0.5;
/// Nodes of the default verification grid.
pub const DEFAULT_GRID_NODES: usize = 10_000;
/// Normalized jet distance under which the two pipelines agree.
pub const ORACLE_JET_TOL: f64 = 1e-6;

const MANIFEST: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "glaeser", version, about = "Nonnegative C1 extension of scattered data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Samples as CSV rows `x_1,...,x_n,f` or JSON `{n, points, values}`.
    #[arg(long)]
    pub input: PathBuf,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Refine to stability and classify.
    Decide(Common),
    /// Run a fixed number of rounds, resuming from a state file.
    Refine {
        #[command(flatten)]
        common: Common,
        /// Rounds to run; defaults to the round budget.
        #[arg(long)]
        rounds: Option<usize>,
        /// State file to resume from and update; defaults to `OUT/state.json`.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Decide, then pick one jet per sample.
    SelectJets {
        #[command(flatten)]
        common: Common,
        /// Select even when the data are not extendable.
        #[arg(long)]
        force: bool,
    },
    /// Decide, select jets, extend and verify.
    Extend {
        #[command(flatten)]
        common: Common,
        /// `min:max:steps` per axis, comma separated; one axis is repeated.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        force: bool,
    },
    /// Verify the extension of given (or selected) jets.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Jets as written by `select-jets`.
        #[arg(long)]
        jets: Option<PathBuf>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        force: bool,
    },
    /// Compare the nonnegative and sign-free pipelines.
    OracleCompare(Common),
    /// Print the effective configuration.
    PrintConfig {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    State(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::State(_) => EXIT_STATE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::State(m) => write!(f, "state mismatch: {m}"),
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Provenance of one run; every other output names this file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub input: Option<String>,
    pub input_sha256: Option<String>,
    pub config: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub outputs: Vec<String>,
    pub wall_time_seconds: f64,
}

/// Text printed to stdout plus the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
}

/// Parses `args` (program name first), runs the command and returns its exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            outcome.code
        }
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}

impl Cli {
    pub fn parse_args<I, T>(args: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        Self::try_parse_from(args)
    }
}

/// Runs a parsed command, inside a dedicated thread pool when `--threads` is set.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let threads = match &cli.command {
        Command::Decide(c) | Command::OracleCompare(c) => c.threads,
        Command::Refine { common, .. }
        | Command::SelectJets { common, .. }
        | Command::Extend { common, .. }
        | Command::Verify { common, .. } => common.threads,
        Command::PrintConfig { .. } => None,
    };
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().map_err(input_err)?;
            pool.install(|| dispatch(cli))
        }
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Decide(c) => cmd_decide(c),
        Command::Refine { common, rounds, state } => cmd_refine(common, *rounds, state.as_deref()),
        Command::SelectJets { common, force } => cmd_select_jets(common, *force),
        Command::Extend { common, grid, force } => cmd_extend(common, grid.as_deref(), *force),
        Command::Verify { common, jets, grid, force } => cmd_verify(common, jets.as_deref(), grid.as_deref(), *force),
        Command::OracleCompare(c) => cmd_oracle_compare(c),
        Command::PrintConfig { config, seed } => {
            let cfg = load_config(config.as_deref(), *seed)?;
            Ok(Outcome { code: EXIT_OK, summary: cfg.to_text() })
        }
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<RefinementConfig, CliError> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| input_err(format!("{}: {e}", p.display())))?;
            RefinementConfig::parse(&text).map_err(|e| input_err(format!("{}: {e}", p.display())))?
        }
        None => RefinementConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Loaded input, configuration and output bookkeeping of one run.
struct Run {
    command: &'static str,
    common: Common,
    samples: SampleSet,
    cfg: RefinementConfig,
    input_hash: String,
    outputs: Vec<String>,
    started: Instant,
}

impl Run {
    fn start(command: &'static str, common: &Common) -> Result<Self, CliError> {
        let started = Instant::now();
        let cfg = load_config(common.config.as_deref(), common.seed)?;
        let bytes = fs::read(&common.input).map_err(|e| input_err(format!("{}: {e}", common.input.display())))?;
        let samples =
            SampleSet::load(&common.input, cfg.merge_tol).map_err(|e| input_err(format!("{}: {e}", common.input.display())))?;
        fs::create_dir_all(&common.out).map_err(|e| input_err(format!("{}: {e}", common.out.display())))?;
        Ok(Self {
            command,
            common: common.clone(),
            samples,
            cfg,
            input_hash: sha256_hex(&bytes),
            outputs: Vec::new(),
            started,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.common.out.join(name)
    }

    fn write_text(&mut self, path: &Path, text: &str) -> Result<(), CliError> {
        fs::write(path, text).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Writes `{"manifest": ..., <key>: value}` as pretty JSON.
    fn write_json(&mut self, path: &Path, key: &str, value: Value) -> Result<(), CliError> {
        let doc = json!({ "manifest": MANIFEST, key: value });
        let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
        self.write_text(path, &text)
    }

    fn finish(mut self, code: i32, summary: String) -> Result<Outcome, CliError> {
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command.to_string(),
            input: Some(self.common.input.display().to_string()),
            input_sha256: Some(self.input_hash.clone()),
            config: self.cfg.to_text(),
            seed: self.cfg.seed,
            threads: self.common.threads,
            outputs: std::mem::take(&mut self.outputs),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = self.path(MANIFEST);
        let text = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
        fs::write(&path, text).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        Ok(Outcome { code, summary })
    }

    fn decide(&mut self) -> Result<Decision, CliError> {
        let d = decide(&self.samples, &self.cfg);
        let path = self.path("verdict.json");
        self.write_json(&path, "verdict", serde_json::to_value(&d.verdict).expect("serializable"))?;
        let path = self.path("trace.json");
        self.write_json(&path, "trace", serde_json::to_value(&d.trace).expect("serializable"))?;
        Ok(d)
    }

    fn domain(&self) -> DomainBox {
        DomainBox::around(self.samples.points(), self.samples.dim(), DOMAIN_MARGIN)
    }

    fn grid(&self, spec: Option<&str>, domain: &DomainBox) -> Result<GridSpec, CliError> {
        match spec {
            Some(text) => text
                .parse::<GridSpec>()
                .and_then(|g| g.for_dim(self.samples.dim()))
                .map_err(|e| input_err(format!("--grid: {e}"))),
            None => Ok(GridSpec::covering(domain, DEFAULT_GRID_NODES)),
        }
    }
}

fn verdict_code(status: VerdictStatus) -> i32 {
    match status {
        VerdictStatus::Extendable => EXIT_OK,
        VerdictStatus::NotExtendable => EXIT_NOT_EXTENDABLE,
        VerdictStatus::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn verdict_summary(d: &Decision) -> String {
    let v = &d.verdict;
    let mut out = String::new();
    let status = serde_json::to_value(v.status).expect("serializable");
    let _ = writeln!(out, "verdict            {}", status.as_str().unwrap_or_default());
    let _ = writeln!(out, "witnesses          {:?}", v.witnesses);
    let _ = writeln!(out, "rounds used        {}", v.rounds_used);
    match v.stabilized_round {
        Some(r) => {
            let _ = writeln!(out, "stabilized round   {r} (reference band {:?})", d.trace.reference_band);
        }
        None => {
            let _ = writeln!(out, "stabilized round   none within {}", d.trace.budget);
        }
    }
    if v.degenerate {
        let _ = writeln!(out, "degenerate         empty sample set");
    }
    out
}

fn cmd_decide(common: &Common) -> Result<Outcome, CliError> {
    let mut run = Run::start("decide", common)?;
    let d = run.decide()?;
    run.finish(verdict_code(d.verdict.status), verdict_summary(&d))
}

#[derive(Serialize, Deserialize)]
struct RefineState {
    input_sha256: String,
    config_sha256: String,
    field: Value,
    rounds: Vec<RoundRecord>,
}

fn cmd_refine(common: &Common, rounds: Option<usize>, state: Option<&Path>) -> Result<Outcome, CliError> {
    let mut run = Run::start("refine", common)?;
    let config_hash = sha256_hex(run.cfg.to_text().as_bytes());
    let state_path = state.map(Path::to_path_buf).unwrap_or_else(|| run.path("state.json"));
    let (mut field, mut records) = match Some(state_path.as_path()).filter(|p| p.exists()) {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| input_err(format!("{}: {e}", p.display())))?;
            let doc: Value = serde_json::from_str(&text).map_err(|e| input_err(format!("{}: {e}", p.display())))?;
            let prior: RefineState = serde_json::from_value(doc.get("state").cloned().unwrap_or(doc))
                .map_err(|e| input_err(format!("{}: {e}", p.display())))?;
            if prior.input_sha256 != run.input_hash {
                return Err(CliError::State(format!("{} was produced from a different input", p.display())));
            }
            if prior.config_sha256 != config_hash {
                return Err(CliError::State(format!("{} was produced with a different configuration", p.display())));
            }
            let field = FiberField::from_json_value(prior.field, &run.samples).map_err(input_err)?;
            (field, prior.rounds)
        }
        None => (FiberField::gamma_initial(&run.samples), Vec::new()),
    };
    let k = rounds.unwrap_or_else(|| run.cfg.max_rounds_for(run.samples.dim()));
    for _ in 0..k {
        let (next, record) = refine_round_traced(&field, &run.samples, &run.cfg);
        records.push(record);
        field = next;
    }
    let mut summary = String::new();
    let _ = writeln!(summary, "rounds completed   {}", field.round);
    let changed = records.last().map(|r| r.changed);
    let _ = writeln!(summary, "last round changed {}", changed.map_or("n/a".to_string(), |c| c.to_string()));
    let empty: Vec<usize> = (0..field.len()).filter(|&i| field.fibers[i].is_empty()).collect();
    let _ = writeln!(summary, "empty fibers       {empty:?}");
    let state = RefineState { input_sha256: run.input_hash.clone(), config_sha256: config_hash, field: field.to_json_value(), rounds: records };
    run.write_json(&state_path, "state", serde_json::to_value(&state).expect("serializable"))?;
    run.finish(EXIT_OK, summary)
}

fn choose_jets(run: &mut Run, d: &Decision, force: bool) -> Result<Option<Vec<Jet>>, CliError> {
    if d.verdict.status != VerdictStatus::Extendable && !force {
        return Ok(None);
    }
    let jets = match select_jets(&d.field, &run.samples, &run.cfg) {
        Ok(j) => j,
        Err(_) => select_jets_forced(&d.field, &run.samples, &run.cfg),
    };
    let path = run.path("jets.json");
    run.write_json(&path, "jets", serde_json::to_value(&jets).expect("serializable"))?;
    Ok(Some(jets))
}

fn cmd_select_jets(common: &Common, force: bool) -> Result<Outcome, CliError> {
    let mut run = Run::start("select-jets", common)?;
    let d = run.decide()?;
    let mut summary = verdict_summary(&d);
    match choose_jets(&mut run, &d, force)? {
        Some(jets) => {
            let _ = writeln!(summary, "jets written       {}", jets.len());
            run.finish(EXIT_OK, summary)
        }
        None => run.finish(verdict_code(d.verdict.status), summary),
    }
}

/// Builds, samples and verifies the extension of `jets`.
fn build_and_verify(run: &mut Run, jets: &[Jet], grid: Option<&str>, force: bool) -> Result<(ExtensionFunction, VerificationReport), CliError> {
    let domain = run.domain();
    let grid = run.grid(grid, &domain)?;
    let opts = ExtendOptions { max_generation: run.cfg.max_generation, config: run.cfg.clone(), force };
    let f = extend(&run.samples, jets, &domain, &opts).map_err(input_err)?;
    let report = verify_extension(&f, &run.samples, jets, &run.cfg, &VerifyOptions {
        grid: grid.clone(),
        ..VerifyOptions::defaults(&f, &run.samples, run.cfg.seed)
    });
    let path = run.path("surface.csv");
    let text = surface_csv(&f, &grid);
    run.write_text(&path, &text)?;
    let path = run.path("cubes.json");
    run.write_json(&path, "cubes", f.decomposition().to_json())?;
    let path = run.path("report.json");
    run.write_json(&path, "report", serde_json::to_value(&report).expect("serializable"))?;
    Ok((f, report))
}

/// Grid rows `x_1..x_n, F, ∂_1F..∂_nF`; nodes outside the domain are skipped.
pub fn surface_csv(f: &ExtensionFunction, grid: &GridSpec) -> String {
    use rayon::prelude::*;
    let n = grid.dim();
    let mut out = format!("# manifest={MANIFEST}\n");
    let header: Vec<String> = (0..n)
        .map(|k| format!("x{k}"))
        .chain(["F".to_string()])
        .chain((0..n).map(|k| format!("dF{k}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    let rows: Vec<Option<String>> = grid
        .points()
        .par_iter()
        .map(|y| {
            f.eval(y).ok().map(|e| {
                let cells: Vec<String> =
                    y.iter().chain([e.value].iter()).chain(e.gradient.iter()).map(|v| v.to_string()).collect();
                cells.join(",")
            })
        })
        .collect();
    for row in rows.into_iter().flatten() {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

fn report_summary(report: &VerificationReport) -> String {
    format!("verification       {}\n{}", if report.passed() { "pass" } else { "FAIL" }, report.summary())
}

fn cmd_extend(common: &Common, grid: Option<&str>, force: bool) -> Result<Outcome, CliError> {
    let mut run = Run::start("extend", common)?;
    let d = run.decide()?;
    let mut summary = verdict_summary(&d);
    let Some(jets) = choose_jets(&mut run, &d, force)? else {
        let _ = writeln!(summary, "not extended; pass --force to extend anyway");
        return run.finish(verdict_code(d.verdict.status), summary);
    };
    let (_, report) = build_and_verify(&mut run, &jets, grid, force)?;
    summary.push_str(&report_summary(&report));
    run.finish(if report.passed() { EXIT_OK } else { EXIT_VERIFY_FAILED }, summary)
}

fn read_jets(path: &Path, s: &SampleSet) -> Result<Vec<Jet>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    let list = doc.get("jets").cloned().unwrap_or(doc);
    let jets: Vec<Jet> = serde_json::from_value(list).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    if jets.len() != s.len() {
        return Err(input_err(format!("{}: {} jets for {} samples", path.display(), jets.len(), s.len())));
    }
    for (i, j) in jets.iter().enumerate() {
        Jet::new(j.base().to_vec(), j.value(), j.gradient().to_vec())
            .map_err(|e| input_err(format!("{}: jet {i}: {e}", path.display())))?;
    }
    Ok(jets)
}

fn cmd_verify(common: &Common, jets: Option<&Path>, grid: Option<&str>, force: bool) -> Result<Outcome, CliError> {
    let mut run = Run::start("verify", common)?;
    let (jets, mut summary) = match jets {
        Some(p) => (read_jets(p, &run.samples)?, String::new()),
        None => {
            let d = run.decide()?;
            let summary = verdict_summary(&d);
            match choose_jets(&mut run, &d, force)? {
                Some(j) => (j, summary),
                None => return run.finish(verdict_code(d.verdict.status), summary),
            }
        }
    };
    let (_, report) = build_and_verify(&mut run, &jets, grid, true)?;
    summary.push_str(&report_summary(&report));
    run.finish(if report.passed() { EXIT_OK } else { EXIT_VERIFY_FAILED }, summary)
}

/// Max over samples of `max(|Δvalue|, |Δgradient|·L) / V`.
pub fn jet_field_distance(a: &[Jet], b: &[Jet], s: &SampleSet) -> f64 {
    let (l, v) = (s.length_scale(), s.value_scale());
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let dv = (p.value() - q.value()).abs();
            let dg = p.gradient().iter().zip(q.gradient()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            dv.max(dg * l) / v
        })
        .fold(0.0, f64::max)
}

/// Verdicts and selected jets of the nonnegative and sign-free pipelines.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleComparison {
    pub nonnegative: VerdictStatus,
    pub classical: VerdictStatus,
    pub verdicts_agree: bool,
    /// Normalized jet distance when both are extendable.
    pub jet_distance: Option<f64>,
    pub jet_tolerance: f64,
    pub min_value: Option<f64>,
    /// Agreement is asserted when every value is positive.
    pub agreement_required: bool,
    pub degenerate: bool,
    pub pass: bool,
}

pub fn oracle_compare(s: &SampleSet, cfg: &RefinementConfig) -> OracleComparison {
    let nn = decide(s, cfg);
    let cl = decide_classical(s, cfg);
    let jet_distance = match (nn.verdict.status, cl.verdict.status) {
        (VerdictStatus::Extendable, VerdictStatus::Extendable) => {
            match (select_jets(&nn.field, s, cfg), select_jets(&cl.field, s, cfg)) {
                (Ok(a), Ok(b)) => Some(jet_field_distance(&a, &b, s)),
                _ => None,
            }
        }
        _ => None,
    };
    let min_value = s.values().iter().cloned().reduce(f64::min);
    let agreement_required = min_value.is_some_and(|m| m > 0.0);
    let verdicts_agree = nn.verdict.status == cl.verdict.status;
    let jets_agree = jet_distance.is_none_or(|d| d <= ORACLE_JET_TOL);
    OracleComparison {
        nonnegative: nn.verdict.status,
        classical: cl.verdict.status,
        verdicts_agree,
        jet_distance,
        jet_tolerance: ORACLE_JET_TOL,
        min_value,
        agreement_required,
        degenerate: s.is_empty(),
        pass: !agreement_required || (verdicts_agree && jets_agree),
    }
}

fn cmd_oracle_compare(common: &Common) -> Result<Outcome, CliError> {
    let mut run = Run::start("oracle-compare", common)?;
    let cmp = oracle_compare(&run.samples, &run.cfg);
    let path = run.path("oracle.json");
    run.write_json(&path, "comparison", serde_json::to_value(&cmp).expect("serializable"))?;
    let name = |v: VerdictStatus| serde_json::to_value(v).expect("serializable").as_str().unwrap_or_default().to_string();
    let mut summary = String::new();
    let _ = writeln!(summary, "nonnegative        {}", name(cmp.nonnegative));
    let _ = writeln!(summary, "classical          {}", name(cmp.classical));
    let _ = writeln!(summary, "verdicts agree     {}", cmp.verdicts_agree);
    if let Some(d) = cmp.jet_distance {
        let _ = writeln!(summary, "jet distance       {d:.3e} (tol {:.1e})", cmp.jet_tolerance);
    }
    let _ = writeln!(summary, "agreement required {}", cmp.agreement_required);
    if cmp.degenerate {
        let _ = writeln!(summary, "degenerate         empty sample set");
    }
    run.finish(if cmp.pass { EXIT_OK } else { EXIT_VERIFY_FAILED }, summary)
}
