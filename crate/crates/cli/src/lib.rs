//! Command-line front end for `dschain`.
//!
//! Every subcommand reads JSON documents, writes its result document to `--out`
//! (or stdout) and reports a one-line summary. Exit codes: 0 ok, 2 validation
//! failed, 3 computation failed.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use dschain::birkhoff::{birkhoff_decompose, recompose};
use dschain::dilation::{dilate_with, paper_reconstruction, reconstruction_ratio, reduce_dilation, CompletionOrder};
use dschain::entropy::{check_monotone, entropy_violation_witness, quantum_renyi_entropy, renyi_entropy, Alpha};
use dschain::io::{
    ensemble_csv, from_json, to_json, trajectory_csv, BirkhoffDoc, ChainDoc, ComplexMatrixDoc, DilationDoc, KrausDoc,
    MatrixDoc, ProcessConfigDoc, VectorDoc,
};
use dschain::kraus::{ds_to_kraus, kraus_to_ds, unitary_to_ds, ZeroOperators};
use dschain::process::{
    chain_contraction, history_probability, run_ensemble, run_trajectory, total_history_probability,
};
use dschain::rng::derive_seed;
use dschain::simplex::{
    random_probability_vector, sample_ds, sample_stochastic, uniform_state, DsMethod, MatrixKind, ProbabilityVector,
};
use dschain::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    ValidationFailed,
    ComputationFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ValidationFailed => 2,
            Status::ComputationFailed => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub status: Status,
    pub report_path: Option<PathBuf>,
    pub summary: String,
    /// Result document when no `--out` was given.
    pub document: Option<String>,
}

#[derive(Debug, Parser)]
#[command(name = "dschain", version, about = "Doubly stochastic chains from unital quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the result document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for sampling commands.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Validation tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    /// Entropy orders, comma separated.
    #[arg(long, global = true, default_value = "1,2,inf")]
    alphas: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a matrix as column or doubly stochastic.
    Validate {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Write the uniform distribution on n points.
    Uniform {
        #[arg(long)]
        n: usize,
    },
    /// Apply a stochastic matrix to a probability vector.
    Apply {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        vector: PathBuf,
    },
    /// Rényi entropies of a probability vector or density matrix.
    Entropy {
        #[arg(long, conflicts_with = "density", required_unless_present = "density")]
        vector: Option<PathBuf>,
        #[arg(long)]
        density: Option<PathBuf>,
    },
    /// Entropy monotonicity sweep over sampled doubly stochastic matrices.
    TheoremCheck {
        /// Number of samples; sample k uses seed `--seed + k` (default base 0).
        #[arg(long, default_value_t = 1000)]
        seeds: u64,
        #[arg(long)]
        n: usize,
        /// `all`, `permutation-mixture`, `sinkhorn` or `unistochastic`.
        #[arg(long, default_value = "all")]
        method: String,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Entropy-decrease witnesses for sampled non-doubly-stochastic matrices.
    ConverseCheck {
        #[arg(long, default_value_t = 1000)]
        seeds: u64,
        #[arg(long)]
        n: usize,
    },
    /// Descend a Kraus set to its stochastic matrix.
    KrausToDs {
        #[arg(long)]
        kraus: PathBuf,
    },
    /// Rank-one Kraus set of a doubly stochastic matrix.
    DsToKraus {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        drop_zeros: bool,
    },
    /// `|U_ij|²` of a unitary.
    UnitaryToDs {
        #[arg(long)]
        unitary: PathBuf,
    },
    /// Unitary dilation of a bistochastic Kraus set.
    Dilate {
        #[arg(long)]
        kraus: PathBuf,
        /// `standard` or `reversed` completion order.
        #[arg(long, default_value = "standard")]
        completion: String,
    },
    /// Reduce a dilation back to a stochastic matrix.
    Reduce {
        #[arg(long)]
        dilation: PathBuf,
    },
    /// Literal (1/2N)-averaged reconstruction and its ratio to the reduced matrix.
    PaperReconstruction {
        #[arg(long)]
        dilation: PathBuf,
    },
    /// Birkhoff decomposition of a doubly stochastic matrix.
    Birkhoff {
        #[arg(long)]
        matrix: PathBuf,
        /// Residual threshold for the peeling.
        #[arg(long, default_value_t = 1e-12)]
        peel_tol: f64,
    },
    /// Recompose a Birkhoff decomposition.
    Recompose {
        #[arg(long)]
        decomposition: PathBuf,
    },
    /// Single trajectory as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Ensemble statistics as CSV.
    Ensemble {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trajectories: usize,
    },
    /// Probability of one history, or total over all histories.
    Histories {
        #[arg(long)]
        chain: PathBuf,
        /// Comma-separated basis indices, one more than the chain length.
        #[arg(long)]
        history: Option<String>,
        /// Initial distribution weighting the first index (default uniform).
        #[arg(long)]
        initial: Option<PathBuf>,
    },
    /// Dobrushin coefficient of a chain product against the product of coefficients.
    Contraction {
        #[arg(long)]
        chain: PathBuf,
    },
}

/// A failed command: what to report and how to exit.
#[derive(Debug)]
struct Failure {
    status: Status,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_computational() { Status::ComputationFailed } else { Status::ValidationFailed };
        Failure { status, message: e.to_string() }
    }
}

fn validation(message: impl Into<String>) -> Failure {
    Failure { status: Status::ValidationFailed, message: message.into() }
}

fn computation(message: impl Into<String>) -> Failure {
    Failure { status: Status::ComputationFailed, message: message.into() }
}

/// What a subcommand produced.
struct Output {
    document: String,
    summary: String,
    /// A property check that ran to completion but did not hold.
    check_failed: bool,
}

impl Output {
    fn ok(document: String, summary: impl Into<String>) -> Self {
        Self { document, summary: summary.into(), check_failed: false }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| validation(format!("{}: {e}", path.display())))
}

fn read_doc<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    from_json(&read_text(path)?).map_err(|e| validation(format!("{}: {e}", path.display())))
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    Ok(to_json(value)? + "\n")
}

pub fn dispatch<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { Status::ValidationFailed } else { Status::Ok };
            return CommandOutcome { status, report_path: None, summary: e.to_string(), document: None };
        }
    };
    let out = cli.out.clone();
    match run(&cli) {
        Ok(output) => {
            let status = if output.check_failed { Status::ComputationFailed } else { Status::Ok };
            match &out {
                Some(path) => match fs::write(path, &output.document) {
                    Ok(()) => CommandOutcome { status, report_path: out, summary: output.summary, document: None },
                    Err(e) => CommandOutcome {
                        status: Status::ValidationFailed,
                        report_path: None,
                        summary: format!("{}: {e}", path.display()),
                        document: None,
                    },
                },
                None => CommandOutcome {
                    status,
                    report_path: None,
                    summary: output.summary,
                    document: Some(output.document),
                },
            }
        }
        Err(f) => CommandOutcome { status: f.status, report_path: None, summary: f.message, document: None },
    }
}

#[derive(Serialize)]
struct ValidateReport {
    kind: &'static str,
    dobrushin: f64,
    subdominant_singular: f64,
    is_generic: bool,
}

#[derive(Serialize)]
struct EntropyReport {
    alphas: Vec<String>,
    entropies: Vec<f64>,
}

#[derive(Serialize)]
struct SweepReport {
    n: usize,
    samples: u64,
    base_seed: u64,
    steps: usize,
    alphas: Vec<String>,
    min_delta: f64,
    violations: u64,
    first_violation_seed: Option<u64>,
}

#[derive(Serialize)]
struct ConverseReport {
    n: usize,
    samples: u64,
    base_seed: u64,
    witnesses_found: u64,
    min_entropy_drop: f64,
    failures: u64,
}

#[derive(Serialize)]
struct ReconstructionReport {
    reconstruction: MatrixDoc,
    reduced: MatrixDoc,
    ratio_min: Option<f64>,
    ratio_max: Option<f64>,
    kraus_count_squared: usize,
}

#[derive(Serialize)]
struct HistoryReport {
    history: Option<Vec<usize>>,
    probability: f64,
}

#[derive(Serialize)]
struct ContractionDoc {
    product_coefficient: f64,
    coefficient_product: f64,
    submultiplicative: bool,
}

fn kind_name(kind: MatrixKind) -> &'static str {
    match kind {
        MatrixKind::DoublyStochastic => "doubly stochastic",
        MatrixKind::ColumnStochastic => "column stochastic",
    }
}

fn parse_indices(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',').map(|t| t.trim().parse::<usize>().map_err(|e| validation(format!("bad index `{t}`: {e}")))).collect()
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let tol = cli.tol;
    if tol.is_nan() || tol <= 0.0 {
        return Err(validation("--tol must be positive"));
    }
    let alphas = Alpha::parse_list(&cli.alphas)?;
    let alpha_names = || alphas.iter().map(Alpha::to_string).collect::<Vec<_>>();
    match &cli.command {
        Command::Validate { matrix } => {
            let m = read_doc::<MatrixDoc>(matrix)?.to_stochastic(tol)?;
            let report = m.contraction_report(tol)?;
            let doc = ValidateReport {
                kind: kind_name(m.kind()),
                dobrushin: report.dobrushin,
                subdominant_singular: report.subdominant_singular,
                is_generic: report.is_generic,
            };
            Ok(Output::ok(json(&doc)?, kind_name(m.kind())))
        }
        Command::Uniform { n } => {
            let p = uniform_state(*n)?;
            Ok(Output::ok(json(&VectorDoc::from_probability(&p))?, format!("uniform distribution on {n} points")))
        }
        Command::Apply { matrix, vector } => {
            let m = read_doc::<MatrixDoc>(matrix)?.to_stochastic(tol)?;
            let p = read_doc::<VectorDoc>(vector)?.to_probability()?;
            let q = m.apply(&p)?;
            Ok(Output::ok(json(&VectorDoc::from_probability(&q))?, format!("applied {} matrix", kind_name(m.kind()))))
        }
        Command::Entropy { vector, density } => {
            let entropies = match (vector, density) {
                (Some(v), _) => {
                    let p = read_doc::<VectorDoc>(v)?.to_probability()?;
                    alphas.iter().map(|&a| renyi_entropy(&p, a)).collect::<Vec<_>>()
                }
                (None, Some(d)) => {
                    let rho = read_doc::<ComplexMatrixDoc>(d)?.to_density()?;
                    alphas.iter().map(|&a| quantum_renyi_entropy(&rho, a)).collect::<dschain::Result<Vec<_>>>()?
                }
                (None, None) => return Err(validation("one of --vector or --density is required")),
            };
            let summary = alpha_names()
                .iter()
                .zip(&entropies)
                .map(|(a, h)| format!("H_{a}={h:.6}"))
                .collect::<Vec<_>>()
                .join(" ");
            Ok(Output::ok(json(&EntropyReport { alphas: alpha_names(), entropies })?, summary))
        }
        Command::TheoremCheck { seeds, n, method, steps } => {
            let methods: Vec<DsMethod> = if method == "all" { DsMethod::ALL.to_vec() } else { vec![method.parse()?] };
            let base = cli.seed.unwrap_or(0);
            let mut min_delta = f64::INFINITY;
            let mut violations = 0;
            let mut first_violation_seed = None;
            for k in 0..*seeds {
                let seed = base.wrapping_add(k);
                let m = sample_ds(*n, methods[(k % methods.len() as u64) as usize], seed)?;
                let p0 = random_probability_vector(*n, derive_seed(seed, 1))?;
                let report = check_monotone(&m, &p0, &alphas, *steps)?;
                min_delta = min_delta.min(report.min_delta);
                if report.witness.is_some() {
                    violations += 1;
                    first_violation_seed.get_or_insert(seed);
                }
            }
            let doc = SweepReport {
                n: *n,
                samples: *seeds,
                base_seed: base,
                steps: *steps,
                alphas: alpha_names(),
                min_delta,
                violations,
                first_violation_seed,
            };
            let summary =
                format!("{seeds} doubly stochastic samples, min_delta {min_delta:e}, {violations} violations");
            Ok(Output { document: json(&doc)?, summary, check_failed: min_delta < -tol })
        }
        Command::ConverseCheck { seeds, n } => {
            let base = cli.seed.unwrap_or(0);
            let shannon = Alpha::SHANNON;
            let mut found = 0;
            let mut failures = 0;
            let mut min_drop = f64::INFINITY;
            for k in 0..*seeds {
                let m = sample_stochastic(*n, base.wrapping_add(k))?;
                match entropy_violation_witness(&m) {
                    Some(w) => {
                        found += 1;
                        let drop = renyi_entropy(&w, shannon) - renyi_entropy(&m.apply(&w)?, shannon);
                        min_drop = min_drop.min(drop);
                        if drop <= 1e-8 {
                            failures += 1;
                        }
                    }
                    None => failures += 1,
                }
            }
            let doc = ConverseReport {
                n: *n,
                samples: *seeds,
                base_seed: base,
                witnesses_found: found,
                min_entropy_drop: min_drop,
                failures,
            };
            let summary = format!("{found}/{seeds} witnesses, min entropy drop {min_drop:e}");
            Ok(Output { document: json(&doc)?, summary, check_failed: failures > 0 })
        }
        Command::KrausToDs { kraus } => {
            let k = read_doc::<KrausDoc>(kraus)?.to_kraus()?;
            let m = kraus_to_ds(&k)?;
            Ok(Output::ok(json(&MatrixDoc::from_stochastic(&m))?, kind_name(m.kind())))
        }
        Command::DsToKraus { matrix, drop_zeros } => {
            let m = read_doc::<MatrixDoc>(matrix)?.to_stochastic(tol)?;
            let zeros = if *drop_zeros { ZeroOperators::Drop } else { ZeroOperators::Keep };
            let k = ds_to_kraus(&m, zeros)?;
            Ok(Output::ok(json(&KrausDoc::from_kraus(&k))?, format!("{} rank-one operators", k.len())))
        }
        Command::UnitaryToDs { unitary } => {
            let u = read_doc::<ComplexMatrixDoc>(unitary)?.to_matrix()?;
            let m = unitary_to_ds(&u)?;
            Ok(Output::ok(json(&MatrixDoc::from_stochastic(&m))?, kind_name(m.kind())))
        }
        Command::Dilate { kraus, completion } => {
            let order = match completion.as_str() {
                "standard" => CompletionOrder::Standard,
                "reversed" => CompletionOrder::Reversed,
                other => return Err(validation(format!("unknown completion order `{other}`"))),
            };
            let k = read_doc::<KrausDoc>(kraus)?.to_kraus()?;
            let d = dilate_with(&k, order)?;
            let summary = format!(
                "dilation of dimension {} (bath {}), unitarity residual {:e}",
                d.unitary().nrows(),
                d.bath_dim(),
                d.unitarity_residual()
            );
            Ok(Output::ok(json(&DilationDoc::from_dilation(&d))?, summary))
        }
        Command::Reduce { dilation } => {
            let d = read_doc::<DilationDoc>(dilation)?.to_dilation()?;
            let m = reduce_dilation(&d)?;
            Ok(Output::ok(json(&MatrixDoc::from_stochastic(&m))?, kind_name(m.kind())))
        }
        Command::PaperReconstruction { dilation } => {
            let d = read_doc::<DilationDoc>(dilation)?.to_dilation()?;
            let m = reduce_dilation(&d)?;
            let r = paper_reconstruction(&d);
            let ratio = reconstruction_ratio(&m, &r, 1e-12);
            let doc = ReconstructionReport {
                reconstruction: MatrixDoc::from_dmatrix(&r),
                reduced: MatrixDoc::from_stochastic(&m),
                ratio_min: ratio.map(|r| r.0),
                ratio_max: ratio.map(|r| r.1),
                kraus_count_squared: d.kraus_count() * d.kraus_count(),
            };
            let summary = match ratio {
                Some((lo, hi)) => format!("reduced/averaged ratio in [{lo}, {hi}], N^2 = {}", doc.kraus_count_squared),
                None => "no entries above the ratio floor".to_string(),
            };
            Ok(Output::ok(json(&doc)?, summary))
        }
        Command::Birkhoff { matrix, peel_tol } => {
            let m = read_doc::<MatrixDoc>(matrix)?.to_stochastic(tol)?;
            let d = birkhoff_decompose(&m, *peel_tol)?;
            Ok(Output::ok(json(&BirkhoffDoc::from_decomposition(&d))?, format!("{} permutation terms", d.len())))
        }
        Command::Recompose { decomposition } => {
            let d = read_doc::<BirkhoffDoc>(decomposition)?.to_decomposition()?;
            let m = recompose(&d)?;
            Ok(Output::ok(json(&MatrixDoc::from_stochastic(&m))?, kind_name(m.kind())))
        }
        Command::Simulate { config } => {
            let mut doc = read_doc::<ProcessConfigDoc>(config)?;
            if let Some(seed) = cli.seed {
                doc.seed = seed;
            }
            let rec = run_trajectory(&doc.to_config(tol)?)?;
            Ok(Output::ok(trajectory_csv(&rec), format!("{} reductions", rec.times.len())))
        }
        Command::Ensemble { config, trajectories } => {
            let mut doc = read_doc::<ProcessConfigDoc>(config)?;
            if let Some(seed) = cli.seed {
                doc.seed = seed;
            }
            let report = run_ensemble(&doc.to_config(tol)?, *trajectories)?;
            let summary = format!(
                "{} trajectories, {} reductions, final l1 distance {:e}",
                trajectories,
                report.times.len(),
                report.trace.distances.last().copied().unwrap_or(0.0)
            );
            Ok(Output::ok(ensemble_csv(&report), summary))
        }
        Command::Histories { chain, history, initial } => {
            let chain = read_doc::<ChainDoc>(chain)?.to_chain(tol)?;
            let n = chain.first().map(|m| m.dim()).ok_or_else(|| validation("empty chain"))?;
            let doc = match history {
                Some(h) => {
                    let h = parse_indices(h)?;
                    let probability = history_probability(&chain, &h)?;
                    HistoryReport { history: Some(h), probability }
                }
                None => {
                    let p0 = match initial {
                        Some(path) => read_doc::<VectorDoc>(path)?.to_probability()?,
                        None => ProbabilityVector::uniform(n)?,
                    };
                    HistoryReport { history: None, probability: total_history_probability(&chain, &p0)? }
                }
            };
            let summary = format!("probability {}", doc.probability);
            Ok(Output::ok(json(&doc)?, summary))
        }
        Command::Contraction { chain } => {
            let chain = read_doc::<ChainDoc>(chain)?.to_chain(tol)?;
            let c = chain_contraction(&chain)?;
            let ok = c.product_coefficient <= c.coefficient_product + 1e-10;
            let doc = ContractionDoc {
                product_coefficient: c.product_coefficient,
                coefficient_product: c.coefficient_product,
                submultiplicative: ok,
            };
            let summary =
                format!("tau(product) = {:e}, product of tau = {:e}", c.product_coefficient, c.coefficient_product);
            if !ok {
                return Err(computation(summary));
            }
            Ok(Output::ok(json(&doc)?, summary))
        }
    }
}
