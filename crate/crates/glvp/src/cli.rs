//! Argument parsing and command dispatch.
//!
//! Every command writes its report to the `out` writer it is handed (stdout
//! in the binary). Diagnostics are left to the caller, which prints the
//! returned [`CliError`] to stderr and exits with its code.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use glvp_core::darboux::{darboux, DarbouxMethod};
use glvp_core::dynamics::{conservation_report, integrate_glv, Quantity};
use glvp_core::glv::EmbeddingSpec;
use glvp_core::poisson::{decouple_factorization, embed_factorization, hamiltonian};
use glvp_core::rational::{int, to_f64};
use glvp_core::{GlvSystem, GlvpFactorization, RatMatrix, Rational};

use crate::error::CliError;
use crate::format::{parse_matrix, parse_rational, parse_rational_list, SystemFile};
use crate::report::{self, ConservationJson, DarbouxReport};
use crate::suite;

/// Poisson analysis, normal forms and simulation of generalized
/// Lotka-Volterra systems.
#[derive(Debug, Parser)]
#[command(name = "glvp", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Class signature, rank table, Poisson certificate, Casimirs and Hamiltonian.
    Analyze {
        input: PathBuf,
        /// Seed for the Jacobi sample points (defaults to $SEED, then 0).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Apply a quasimonomial transformation, an embedding or a decoupling.
    Transform(TransformArgs),
    /// Reduce a Poisson system to Darboux canonical form.
    Darboux {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::General)]
        method: Method,
    },
    /// Integrate the system and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Run the randomized property suite.
    Verify {
        /// Defaults to $SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Cases per property.
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("op").required(true).args(["qmt", "embed", "decouple"])))]
pub struct TransformArgs {
    pub input: PathBuf,
    /// QMT matrix file (bare matrix or {"C": matrix}), or `identity`.
    #[arg(long, value_name = "PATH|identity")]
    pub qmt: Option<String>,
    /// Add P frozen variables.
    #[arg(long, value_name = "P")]
    pub embed: Option<usize>,
    /// Restrict to a level set of P quasimonomial invariants.
    #[arg(long, value_name = "P")]
    pub decouple: Option<usize>,
    /// Level-set or frozen values, comma separated (default all 1).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Exponent block for the new variables (m×P matrix file).
    #[arg(long, requires = "embed")]
    pub b_star: Option<PathBuf>,
    /// Extension of L for the embedded factorization (default all 0).
    #[arg(long, requires = "embed", allow_hyphen_values = true)]
    pub l_star: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub input: PathBuf,
    /// Initial state, comma separated, all positive.
    #[arg(long)]
    pub x0: String,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,
    /// Report the drift of H and of every Casimir along the trajectory.
    #[arg(long)]
    pub check_conservation: bool,
    /// Largest accepted relative drift.
    #[arg(long, default_value_t = 1e-5)]
    pub drift_tol: f64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the conservation report here instead of appending it to stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    General,
    Decoupling,
    Linear,
}

impl From<Method> for DarbouxMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::General => DarbouxMethod::General,
            Method::Decoupling => DarbouxMethod::Decoupling,
            Method::Linear => DarbouxMethod::Linear,
        }
    }
}

/// `--seed`, else `$SEED`, else 0.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("SEED must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { input, seed } => cmd_analyze(&input, resolve_seed(seed)?, out),
        Command::Transform(args) => cmd_transform(&args, out),
        Command::Darboux { input, method } => cmd_darboux(&input, method.into(), out),
        Command::Simulate(args) => cmd_simulate(&args, out),
        Command::Verify { seed, cases } => cmd_verify(resolve_seed(seed)?, cases, out),
    }
}

fn load(path: &Path) -> Result<(GlvSystem, Option<GlvpFactorization>), CliError> {
    SystemFile::load(path)?.to_system()
}

fn certified(
    sys: &GlvSystem,
    supplied: Option<GlvpFactorization>,
) -> Result<GlvpFactorization, CliError> {
    let (verdict, _) = report::resolve_factorization(sys, supplied)?;
    verdict.map_err(CliError::NotGlvp)
}

pub fn cmd_analyze(input: &Path, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let (sys, supplied) = load(input)?;
    let (verdict, _) = report::resolve_factorization(&sys, supplied.clone())?;
    let analysis = report::analyze(&sys, supplied, seed)?;
    out.write_all(report::to_pretty_json(&analysis).as_bytes())?;
    verdict.map(|_| ()).map_err(CliError::NotGlvp)
}

pub fn cmd_transform(args: &TransformArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (sys, f) = load(&args.input)?;
    let alpha = |p: usize| -> Result<Vec<Rational>, CliError> {
        match &args.alpha {
            Some(s) => parse_rational_list(s).map_err(|e| CliError::field("alpha", e)),
            None => Ok(vec![int(1); p]),
        }
    };
    let (new_sys, new_f) = if let Some(spec) = &args.qmt {
        let c = if spec == "identity" {
            RatMatrix::identity(sys.n())
        } else {
            let text = fs::read_to_string(spec).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
            parse_matrix(&text, "C")?
        };
        let moved = sys.apply_qmt(&c)?;
        let moved_f = f.map(|f| f.transform(&c)).transpose()?;
        (moved, moved_f)
    } else if let Some(p) = args.embed {
        let b_star = match &args.b_star {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                Some(parse_matrix(&text, "b-star")?)
            }
            None => None,
        };
        let l_star = match &args.l_star {
            Some(s) => Some(parse_rational_list(s).map_err(|e| CliError::field("l-star", e))?),
            None => None,
        };
        let spec = EmbeddingSpec {
            p,
            alpha: alpha(p)?,
            b_star,
            l_star,
        };
        let embedded = sys.embed(&spec)?;
        let embedded_f = f.map(|f| embed_factorization(&sys, &f, &spec)).transpose()?;
        (embedded, embedded_f)
    } else if let Some(p) = args.decouple {
        let alpha = alpha(p)?;
        match f {
            Some(f) => {
                let d = decouple_factorization(&sys, &f, p, &alpha)?;
                (d.system, Some(d.factorization))
            }
            None => {
                let c = sys.prepare_decoupling(p)?;
                (sys.apply_qmt(&c)?.decouple(p, &alpha)?, None)
            }
        }
    } else {
        unreachable!("clap requires one of --qmt, --embed, --decouple")
    };
    let file = SystemFile::from_system(&new_sys, new_f.as_ref());
    out.write_all(file.to_json_string().as_bytes())?;
    Ok(())
}

pub fn cmd_darboux(input: &Path, method: DarbouxMethod, out: &mut dyn Write) -> Result<(), CliError> {
    let (sys, supplied) = load(input)?;
    let f = certified(&sys, supplied)?;
    let d = darboux(&sys, &f, method)?;
    out.write_all(report::to_pretty_json(&DarbouxReport::new(sys.name(), &d)).as_bytes())?;
    Ok(())
}

fn parse_state(s: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let x0: Vec<f64> = s
        .split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>()
                .or_else(|_| parse_rational(part).map(|q| to_f64(&q)))
                .map_err(|_| CliError::field("x0", format!("invalid number {part:?}")))
        })
        .collect::<Result<_, _>>()?;
    if x0.len() != n {
        return Err(CliError::field("x0", format!("expected {n} values, got {}", x0.len())));
    }
    if let Some(bad) = x0.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(CliError::field("x0", format!("entries must be positive and finite, got {bad}")));
    }
    Ok(x0)
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (sys, supplied) = load(&args.input)?;
    let x0 = parse_state(&args.x0, sys.n())?;
    if !(args.t_end.is_finite() && args.t_end > 0.0) {
        return Err(CliError::field("t-end", format!("must be positive, got {}", args.t_end)));
    }
    if !(args.rel_tol.is_finite() && args.rel_tol > 0.0) {
        return Err(CliError::field("rel-tol", format!("must be positive, got {}", args.rel_tol)));
    }
    let f = if args.check_conservation {
        Some(certified(&sys, supplied)?)
    } else {
        None
    };
    let traj = integrate_glv(&sys, &x0, args.t_end, args.rel_tol)?;
    match &args.out {
        Some(path) => {
            let mut file = std::io::BufWriter::new(fs::File::create(path)?);
            report::write_csv(&traj, &mut file)?;
            file.flush()?;
        }
        None => report::write_csv(&traj, out)?,
    }
    let Some(f) = f else { return Ok(()) };
    let mut quantities = vec![Quantity::Hamiltonian {
        label: "H".into(),
        expr: hamiltonian(&sys, &f)?,
    }];
    for (i, casimir) in f.casimirs().into_iter().enumerate() {
        quantities.push(Quantity::Casimir {
            label: format!("C{}", i + 1),
            casimir,
        });
    }
    let drift = conservation_report(&traj, &quantities)?;
    let json = report::to_pretty_json(&ConservationJson::new(&drift, args.drift_tol));
    match &args.report {
        Some(path) => fs::write(path, json)?,
        None => out.write_all(json.as_bytes())?,
    }
    if drift.within(args.drift_tol) {
        Ok(())
    } else {
        Err(CliError::Drift {
            drift: drift.max_rel_drift(),
            tol: args.drift_tol,
        })
    }
}

pub fn cmd_verify(seed: u64, cases: usize, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "property suite, seed {seed}, {cases} cases per property")?;
    let outcomes = suite::run_all(seed, cases);
    for o in &outcomes {
        writeln!(out, "{o}")?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Verification(failed))
    }
}
