//! The `povm` command-line frontend.
//!
//! Every command prints a line-oriented `key=value` report on stdout and, with
//! `--json PATH`, writes the full [`RunReport`] as JSON.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | input failed POVM/state validation |
//! | 2 | usage error, unreadable file, malformed JSON or shape mismatch |
//! | 3 | `decompose` on an extreme POVM |
//! | 4 | input is not commutative |
//! | 5 | theorem verification failed |

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::PovmError;
use crate::extremality::{
    classify_with_extremality, is_extreme, theorem_check, CertificateDocument,
    DecompositionCertificate, TheoremBranch,
};
use crate::json::{povm_from_json, LoadError, PovmDocument, StateDocument};
use crate::operator::{op_norm, CMatrix, Tolerances};
use crate::povm::{
    classify, is_pvm, random_povm, random_pvm, random_state, split_seed, ClassificationReport, Povm,
};
use crate::smearing::{
    kernel_is_deterministic, random_commutative_povm, simultaneous_diagonalize, SmearingDocument,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EXTREME: i32 = 3;
pub const EXIT_NOT_COMMUTATIVE: i32 = 4;
pub const EXIT_THEOREM: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "povm",
    version,
    about = "Classify, decompose and smear discrete POVMs"
)]
pub struct Cli {
    #[command(flatten)]
    pub tolerances: TolArgs,

    /// Also write the full report as JSON to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct TolArgs {
    /// Operator equality threshold.
    #[arg(long, global = true, env = "POVM_TOL_EQ", default_value_t = 1e-9)]
    pub tol_eq: f64,
    /// Allowed negative eigenvalue magnitude.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_psd: f64,
    /// Relative singular-value cutoff.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_rank: f64,
    /// Hermiticity threshold.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_herm: f64,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            tol_herm: self.tol_herm,
            tol_psd: self.tol_psd,
            tol_eq: self.tol_eq,
            tol_rank: self.tol_rank,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a file holds a valid POVM.
    Validate { input: PathBuf },
    /// Report PVM / commutativity (and optionally extremality) properties.
    Classify {
        input: PathBuf,
        #[arg(long)]
        extremality: bool,
    },
    /// Write a midpoint decomposition certificate for a non-extreme POVM.
    Decompose {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Witness::Kernel)]
        witness: Witness,
    },
    /// Write the PVM + Markov kernel form of a commutative POVM.
    Diagonalize {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Smear a PVM with a Markov kernel (input is a smearing-form file).
    Smear {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        outcomes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check "commutative and extreme iff PVM" on random commutative POVMs.
    VerifyTheorem {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        dim: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        outcomes: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to dump the first failing instance.
        #[arg(long, default_value = "verify-theorem-failure.json")]
        dump: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Witness {
    /// First basis element of the perturbation kernel.
    Kernel,
    /// Pair witness for commutative POVMs.
    Proof1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Povm,
    Pvm,
    Commutative,
    CommutativeDeterministic,
    State,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct InstanceSummary {
    pub dim: Option<usize>,
    pub outcomes: Option<usize>,
    pub seed: Option<u64>,
}

/// Machine-readable result of one command.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: String,
    pub tolerances: Tolerances,
    pub instance: InstanceSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smearing: Option<SmearingDocument>,
    pub residuals: BTreeMap<String, f64>,
    pub values: Vec<(String, String)>,
    pub elapsed_ms: f64,
}

impl RunReport {
    fn new(command: &str, tol: Tolerances) -> Self {
        Self {
            command: command.to_string(),
            status: "ok".into(),
            tolerances: tol,
            instance: InstanceSummary::default(),
            classification: None,
            certificate: None,
            smearing: None,
            residuals: BTreeMap::new(),
            values: Vec::new(),
            elapsed_ms: 0.0,
        }
    }

    fn set(&mut self, key: &str, value: impl Display) {
        self.values.push((key.to_string(), value.to_string()));
    }

    fn residual(&mut self, key: &str, value: f64) {
        self.residuals.insert(key.to_string(), value);
    }

    fn describe(&mut self, a: &Povm) {
        self.instance.dim = Some(a.dim());
        self.instance.outcomes = Some(a.len());
    }

    fn classification(&mut self, c: ClassificationReport) {
        self.set("pvm", c.is_pvm);
        self.set("commutative", c.is_commutative);
        if let Some(e) = c.is_extreme {
            self.set("extreme", e);
        }
        if let Some(k) = c.kernel_dimension {
            self.set("kernel_dimension", k);
        }
        self.residual("commutator", c.max_commutator_norm);
        self.residual("idempotency", c.max_idempotency_defect);
        self.classification = Some(c);
    }

    fn certificate(&mut self, c: &DecompositionCertificate) {
        self.set("separation", num(c.separation));
        self.residual("midpoint", c.residual);
        self.certificate = Some(c.into());
    }

    /// Deterministic `key=value` lines (timing is left out).
    pub fn render(&self) -> String {
        let t = &self.tolerances;
        let mut out = format!(
            "command={}\ntol_eq={} tol_psd={} tol_rank={} tol_herm={}\n",
            self.command,
            num(t.tol_eq),
            num(t.tol_psd),
            num(t.tol_rank),
            num(t.tol_herm)
        );
        if let Some(d) = self.instance.dim {
            out += &format!("dim={d}\n");
        }
        if let Some(n) = self.instance.outcomes {
            out += &format!("outcomes={n}\n");
        }
        if let Some(s) = self.instance.seed {
            out += &format!("seed={s}\n");
        }
        for (k, v) in &self.values {
            out += &format!("{k}={v}\n");
        }
        for (k, v) in &self.residuals {
            out += &format!("residual.{k}={}\n", num(*v));
        }
        out += &format!("status={}\n", self.status);
        out
    }
}

/// Shortest round-trip formatting for small magnitudes, scientific otherwise.
fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) {
        let s = format!("{:.12}", x);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{x:.6e}")
    }
}

/// Short name of an error, as printed in reports.
pub fn error_kind(e: &PovmError) -> &'static str {
    match e {
        PovmError::NotHermitian { .. } => "NotHermitian",
        PovmError::NotSquare { .. } => "NotSquare",
        PovmError::NotPositive { .. } => "NotPositive",
        PovmError::EffectExceedsIdentity { .. } => "EffectExceedsIdentity",
        PovmError::NotNormalized { .. } => "NotNormalized",
        PovmError::ZeroEffect { .. } => "ZeroEffect",
        PovmError::DuplicateLabel(_) => "DuplicateLabel",
        PovmError::NotUnitTrace { .. } => "NotUnitTrace",
        PovmError::ShapeMismatch(_) => "ShapeMismatch",
        PovmError::WeightOutOfRange(_) => "WeightOutOfRange",
        PovmError::NotPvm { .. } => "NotPvm",
        PovmError::BadPartition { .. } => "BadPartition",
        PovmError::SingularSum => "SingularSum",
        PovmError::NotCommutative { .. } => "NotCommutative",
        PovmError::OrthogonalPair { .. } => "OrthogonalPair",
        PovmError::TrivialPerturbation => "TrivialPerturbation",
        PovmError::InvalidPerturbation(_) => "InvalidPerturbation",
        PovmError::ZeroEffectProduced(_) => "ZeroEffectProduced",
        PovmError::InvalidKernel(_) => "InvalidKernel",
        PovmError::NotDeterministic { .. } => "NotDeterministic",
        PovmError::ReconstructionFailed { .. } => "ReconstructionFailed",
        PovmError::RetryExhausted(_) => "RetryExhausted",
        PovmError::TheoremViolation(_) => "TheoremViolation",
        PovmError::BadIndex(_) => "BadIndex",
    }
}

pub fn exit_code(e: &PovmError) -> i32 {
    match e {
        PovmError::NotCommutative { .. } => EXIT_NOT_COMMUTATIVE,
        PovmError::TheoremViolation(_) => EXIT_THEOREM,
        PovmError::ShapeMismatch(_)
        | PovmError::NotSquare { .. }
        | PovmError::BadPartition { .. }
        | PovmError::BadIndex(_) => EXIT_USAGE,
        _ => EXIT_INVALID,
    }
}

/// Failure of a command: exit code plus the lines explaining it.
struct Failure {
    code: i32,
    lines: Vec<(String, String)>,
}

impl Failure {
    fn new(code: i32, key: &str, value: impl Display) -> Self {
        Self {
            code,
            lines: vec![(key.to_string(), value.to_string())],
        }
    }

    fn from_error(e: &PovmError) -> Self {
        let mut lines = vec![("error".to_string(), error_kind(e).to_string())];
        match e {
            PovmError::NotNormalized { residual } => {
                lines.push(("residual".into(), num(*residual)))
            }
            PovmError::NotPositive { min_eigenvalue } => {
                lines.push(("min_eigenvalue".into(), num(*min_eigenvalue)))
            }
            PovmError::NotCommutative { k, l, norm } => {
                lines.push(("pair".into(), format!("{k},{l}")));
                lines.push(("commutator".into(), num(*norm)));
            }
            _ => {}
        }
        lines.push(("message".into(), e.to_string()));
        Self {
            code: exit_code(e),
            lines,
        }
    }
}

impl From<PovmError> for Failure {
    fn from(e: PovmError) -> Self {
        Failure::from_error(&e)
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Malformed(m) => {
                Failure::new(EXIT_USAGE, "error", format!("MalformedJson {m}"))
            }
            LoadError::Invalid(p) => Failure::from_error(&p),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_USAGE, "error", format!("Io {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    std::fs::write(path, text + "\n")
        .map_err(|e| Failure::new(EXIT_USAGE, "error", format!("Io {}: {e}", path.display())))
}

fn load_povm(path: &Path, tol: &Tolerances) -> Result<Povm, Failure> {
    Ok(povm_from_json(&read(path)?, tol)?)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return e.exit_code();
        }
    };
    let tol = cli.tolerances.tolerances();
    let name = command_name(&cli.command);
    let mut report = RunReport::new(name, tol);
    if let Err(e) = tol.validate() {
        let _ = writeln!(err, "{e}");
        return EXIT_USAGE;
    }
    let start = Instant::now();
    let result = execute(&cli.command, &tol, &mut report);
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let code = match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            report.status = "error".into();
            report.values.extend(f.lines);
            f.code
        }
    };
    let _ = out.write_all(report.render().as_bytes());
    let _ = writeln!(err, "elapsed_ms={:.3}", report.elapsed_ms);
    if let Some(path) = &cli.json {
        if let Err(f) = write_json(path, &report) {
            for (k, v) in f.lines {
                let _ = writeln!(err, "{k}={v}");
            }
            return EXIT_USAGE;
        }
    }
    code
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Classify { .. } => "classify",
        Command::Decompose { .. } => "decompose",
        Command::Diagonalize { .. } => "diagonalize",
        Command::Smear { .. } => "smear",
        Command::Gen { .. } => "gen",
        Command::VerifyTheorem { .. } => "verify-theorem",
    }
}

fn execute(command: &Command, tol: &Tolerances, report: &mut RunReport) -> Result<(), Failure> {
    match command {
        Command::Validate { input } => {
            let a = load_povm(input, tol)?;
            report.describe(&a);
            validation_residuals(&a, report);
            Ok(())
        }
        Command::Classify { input, extremality } => {
            let a = load_povm(input, tol)?;
            report.describe(&a);
            let c = if *extremality {
                classify_with_extremality(&a, tol)?
            } else {
                classify(&a, tol)
            };
            report.classification(c);
            Ok(())
        }
        Command::Decompose {
            input,
            output,
            witness,
        } => {
            let a = load_povm(input, tol)?;
            report.describe(&a);
            let certificate = match witness {
                Witness::Kernel => {
                    let verdict = is_extreme(&a, tol)?;
                    report.set("kernel_dimension", verdict.kernel_dimension);
                    verdict.certificate
                }
                Witness::Proof1 => {
                    let r = theorem_check(&a, tol)?;
                    report.set("kernel_dimension", r.kernel_dimension);
                    if let Some((k, l)) = r.pair {
                        report.set("pair", format!("{k},{l}"));
                    }
                    r.certificate
                }
            };
            let Some(c) = certificate else {
                return Err(Failure::new(EXIT_EXTREME, "error", "ExtremeInput"));
            };
            report.certificate(&c);
            write_json(output, &CertificateDocument::from(&c))
        }
        Command::Diagonalize { input, output } => {
            let a = load_povm(input, tol)?;
            report.describe(&a);
            let form = simultaneous_diagonalize(&a, tol)?;
            report.set("blocks", form.pvm.len());
            report.set("kernel", format!("{:?}", form.kernel.to_rows()));
            report.set(
                "deterministic",
                kernel_is_deterministic(&form.kernel, tol).deterministic,
            );
            report.residual("reconstruction", form.reconstruction_residual);
            let doc = SmearingDocument::from_form(&form);
            report.smearing = Some(doc.clone());
            write_json(output, &doc)
        }
        Command::Smear { input, output } => {
            let doc: SmearingDocument = serde_json::from_str(&read(input)?)
                .map_err(|e| Failure::from(LoadError::Malformed(e)))?;
            let form = doc.clone().into_form(tol)?;
            let a = form.reconstruct(tol)?;
            report.describe(&a);
            report.set("blocks", form.pvm.len());
            report.set("pvm", is_pvm(&a, tol).is_pvm);
            report.smearing = Some(doc);
            write_json(output, &PovmDocument::from_povm(&a))
        }
        Command::Gen {
            kind,
            dim,
            outcomes,
            seed,
            output,
        } => {
            report.instance.seed = Some(*seed);
            report.set("kind", format!("{kind:?}"));
            if *kind == GenKind::State {
                report.instance.dim = Some(*dim);
                return write_json(
                    output,
                    &StateDocument::from_state(&random_state(*dim, *seed)),
                );
            }
            let a = match kind {
                GenKind::Povm => random_povm(*dim, *outcomes, *seed)?,
                GenKind::Pvm => random_pvm(*dim, *outcomes, *seed)?.into_povm(),
                GenKind::Commutative => random_commutative_povm(*dim, *outcomes, *seed, false)?,
                GenKind::CommutativeDeterministic => {
                    random_commutative_povm(*dim, *outcomes, *seed, true)?
                }
                GenKind::State => unreachable!(),
            };
            report.describe(&a);
            write_json(output, &PovmDocument::from_povm(&a))
        }
        Command::VerifyTheorem {
            trials,
            dim,
            outcomes,
            seed,
            dump,
        } => verify_theorem(
            *trials,
            *dim as usize,
            *outcomes as usize,
            *seed,
            dump,
            tol,
            report,
        ),
    }
}

fn validation_residuals(a: &Povm, report: &mut RunReport) {
    let mut total = CMatrix::zeros(a.dim(), a.dim());
    let mut min_eig = f64::INFINITY;
    let mut max_eig = f64::NEG_INFINITY;
    let mut min_norm = f64::INFINITY;
    for e in a.effects() {
        total += e.as_matrix();
        let s = e.eigen();
        min_eig = min_eig.min(s.min_eigenvalue());
        max_eig = max_eig.max(s.max_eigenvalue());
        min_norm = min_norm.min(s.max_eigenvalue());
    }
    report.residual(
        "normalization",
        op_norm(&(total - CMatrix::identity(a.dim(), a.dim()))),
    );
    report.set("min_eigenvalue", num(min_eig));
    report.set("max_eigenvalue", num(max_eig));
    report.set("min_effect_norm", num(min_norm));
}

/// Per-trial result of `verify-theorem`.
struct TrialOutcome {
    branch: TheoremBranch,
    residuals: Vec<(&'static str, f64)>,
}

/// Trials alternate kernel types: every fourth trial (when `N <= d`) uses a
/// 0/1 kernel so the PVM branch is exercised too. `N = 1` always does.
fn trial_is_deterministic(index: u64, dim: usize, outcomes: usize) -> bool {
    outcomes == 1 || (outcomes <= dim && index.is_multiple_of(4))
}

fn run_trial(
    index: u64,
    dim: usize,
    outcomes: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<TrialOutcome, (String, Option<Povm>)> {
    let deterministic = trial_is_deterministic(index, dim, outcomes);
    let a = random_commutative_povm(dim, outcomes, seed, deterministic)
        .map_err(|e| (format!("generation failed: {e}"), None))?;
    let fail = |msg: String| Err((msg, Some(a.clone())));

    let report = match theorem_check(&a, tol) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let form = match simultaneous_diagonalize(&a, tol) {
        Ok(f) => f,
        Err(e) => return fail(format!("diagonalization failed: {e}")),
    };
    let deterministic_kernel = kernel_is_deterministic(&form.kernel, tol).deterministic;
    let extreme = report.kernel_dimension == 0;
    if extreme && !(deterministic_kernel && report.pvm.is_pvm) {
        return fail("extreme instance without a 0/1 kernel or not a PVM".into());
    }
    if deterministic_kernel != report.pvm.is_pvm {
        return fail("kernel determinism disagrees with the PVM test".into());
    }
    let mut residuals = report.residuals();
    residuals.push(("reconstruction", form.reconstruction_residual));
    Ok(TrialOutcome {
        branch: report.branch,
        residuals,
    })
}

fn verify_theorem(
    trials: u64,
    dim: usize,
    outcomes: usize,
    seed: u64,
    dump: &Path,
    tol: &Tolerances,
    report: &mut RunReport,
) -> Result<(), Failure> {
    report.instance = InstanceSummary {
        dim: Some(dim),
        outcomes: Some(outcomes),
        seed: Some(seed),
    };
    let results: Vec<(u64, u64, _)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = split_seed(seed, i);
            (i, s, run_trial(i, dim, outcomes, s, tol))
        })
        .collect();

    let mut passed = 0;
    let mut branches = BTreeMap::new();
    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    let mut first_failure = None;
    for (i, s, r) in &results {
        match r {
            Ok(t) => {
                passed += 1;
                let key = match t.branch {
                    TheoremBranch::Pvm => "branch.pvm",
                    TheoremBranch::NonPvm => "branch.non_pvm",
                };
                *branches.entry(key).or_insert(0u64) += 1;
                for (name, v) in &t.residuals {
                    let w = worst.entry(name.to_string()).or_insert(0.0);
                    *w = w.max(*v);
                }
            }
            Err(e) if first_failure.is_none() => first_failure = Some((*i, *s, e)),
            Err(_) => {}
        }
    }
    report.set("trials", trials);
    report.set("passed", passed);
    report.set("failed", trials - passed);
    for (k, v) in branches {
        report.set(k, v);
    }
    for (k, v) in worst {
        report.residual(&k, v);
    }
    if let Some((i, s, (msg, povm))) = first_failure {
        let dumped = serde_json::json!({
            "trial": i,
            "seed": s,
            "error": msg,
            "povm": povm.as_ref().map(PovmDocument::from_povm),
        });
        write_json(dump, &dumped)?;
        let mut f = Failure::new(EXIT_THEOREM, "error", "TheoremViolation");
        f.lines
            .push(("first_failure".into(), format!("trial {i}: {msg}")));
        f.lines.push(("dump".into(), dump.display().to_string()));
        return Err(f);
    }
    Ok(())
}
