//! JSON reports and trajectory CSV.

use std::io::{self, Write};

use glvp_core::darboux::{ChainStep, DarbouxMethod, DarbouxSystem};
use glvp_core::dynamics::{ConservationReport, Trajectory};
use glvp_core::poisson::{hamiltonian, solve_factorization, verify_factorization};
use glvp_core::{Chart, GlvSystem, GlvpFactorization, HamiltonianExpr, NotGlvp};
use serde::Serialize;

use crate::error::CliError;
use crate::format::{to_json_rows, to_json_vec, JsonRational};

#[derive(Clone, Debug, Serialize)]
pub struct TermJson {
    pub coefficient: JsonRational,
    pub exponents: Vec<JsonRational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HamiltonianJson {
    pub chart: &'static str,
    pub text: String,
    pub terms: Vec<TermJson>,
    pub linear: Vec<JsonRational>,
}

impl From<&HamiltonianExpr> for HamiltonianJson {
    fn from(h: &HamiltonianExpr) -> Self {
        HamiltonianJson {
            chart: chart_name(h.chart),
            text: h.to_string(),
            terms: h
                .terms
                .iter()
                .map(|t| TermJson {
                    coefficient: JsonRational(t.coefficient.clone()),
                    exponents: to_json_vec(&t.exponents),
                })
                .collect(),
            linear: to_json_vec(&h.linear),
        }
    }
}

pub fn chart_name(chart: Chart) -> &'static str {
    match chart {
        Chart::PositiveOrthant => "positive-orthant",
        Chart::Log => "log",
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationJson {
    #[serde(rename = "K")]
    pub k: Vec<Vec<JsonRational>>,
    #[serde(rename = "D_diag")]
    pub d_diag: Vec<JsonRational>,
    #[serde(rename = "L")]
    pub l: Vec<JsonRational>,
}

impl From<&GlvpFactorization> for FactorizationJson {
    fn from(f: &GlvpFactorization) -> Self {
        FactorizationJson {
            k: to_json_rows(&f.k),
            d_diag: to_json_vec(&f.d_diag),
            l: to_json_vec(&f.l_vec()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SignatureJson {
    pub r: usize,
    pub n: usize,
    pub m: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankTable {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub name: String,
    pub class_signature: SignatureJson,
    pub ranks: RankTable,
    pub glvp: bool,
    /// `"supplied"` or `"solved"` when GLVP.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factorization_source: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factorization: Option<FactorizationJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<String>,
    /// Exponent vectors `N` with `Π xⱼ^Nⱼ` conserved (left kernel of `M`).
    pub quasimonomial_invariants: Vec<Vec<JsonRational>>,
    /// Exponent vectors of the Casimirs `Σ Nⱼ ln xⱼ` (kernel of `K`).
    pub casimirs: Vec<Vec<JsonRational>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jacobi_residual: Option<JsonRational>,
}

/// Number of sample points for the exact Jacobi check in reports.
pub const JACOBI_SAMPLES: usize = 10;

/// The factorization to use for `sys`: the supplied one if it verifies,
/// otherwise the solver's. A supplied certificate that fails is an input
/// error.
pub fn resolve_factorization(
    sys: &GlvSystem,
    supplied: Option<GlvpFactorization>,
) -> Result<(Result<GlvpFactorization, NotGlvp>, Option<&'static str>), CliError> {
    match supplied {
        Some(f) => {
            if verify_factorization(sys, &f)? {
                Ok((Ok(f), Some("supplied")))
            } else {
                Err(CliError::Input(
                    "supplied factorization does not satisfy lambda = K L and A = K B^T D with K skew".into(),
                ))
            }
        }
        None => {
            let solved = solve_factorization(sys);
            let source = solved.is_ok().then_some("solved");
            Ok((solved, source))
        }
    }
}

pub fn analyze(
    sys: &GlvSystem,
    supplied: Option<GlvpFactorization>,
    seed: u64,
) -> Result<AnalysisReport, CliError> {
    let sig = sys.class_signature();
    let (verdict, source) = resolve_factorization(sys, supplied)?;
    let invariants: Vec<Vec<JsonRational>> = sys
        .quasimonomial_invariants()
        .iter()
        .map(|v| to_json_vec(v))
        .collect();
    let mut report = AnalysisReport {
        name: sys.name().to_string(),
        class_signature: SignatureJson {
            r: sig.r,
            n: sig.n,
            m: sig.m,
        },
        ranks: RankTable {
            m: sys.m_matrix().rank(),
            a: sys.a().rank(),
            k: None,
        },
        glvp: verdict.is_ok(),
        factorization_source: source,
        factorization: None,
        diagnosis: None,
        quasimonomial_invariants: invariants,
        casimirs: Vec::new(),
        hamiltonian: None,
        jacobi_residual: None,
    };
    match verdict {
        Ok(f) => {
            report.ranks.k = Some(f.rank());
            report.casimirs = f.casimirs().iter().map(|c| to_json_vec(&c.exponents)).collect();
            report.hamiltonian = Some(HamiltonianJson::from(&hamiltonian(sys, &f)?));
            let samples = glvp_core::poisson::default_jacobi_samples(sys.n(), JACOBI_SAMPLES, seed);
            report.jacobi_residual = Some(JsonRational(f.check_jacobi(&samples)));
            report.factorization = Some(FactorizationJson::from(&f));
        }
        Err(why) => report.diagnosis = Some(why.to_string()),
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "step", rename_all = "lowercase")]
pub enum ChainStepJson {
    Qmt {
        #[serde(rename = "C")]
        c: Vec<Vec<JsonRational>>,
    },
    Decouple {
        p: usize,
        alpha: Vec<JsonRational>,
    },
    Log,
    Linear {
        #[serde(rename = "P")]
        p: Vec<Vec<JsonRational>>,
    },
}

impl From<&ChainStep> for ChainStepJson {
    fn from(step: &ChainStep) -> Self {
        match step {
            ChainStep::Qmt(c) => ChainStepJson::Qmt { c: to_json_rows(c) },
            ChainStep::Decouple { p, alpha } => ChainStepJson::Decouple {
                p: *p,
                alpha: to_json_vec(alpha),
            },
            ChainStep::Log => ChainStepJson::Log,
            ChainStep::Linear(p) => ChainStepJson::Linear { p: to_json_rows(p) },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DarbouxReport {
    pub name: String,
    pub method: &'static str,
    pub r: usize,
    pub n: usize,
    pub source_dim: usize,
    #[serde(rename = "J")]
    pub j: Vec<Vec<JsonRational>>,
    /// `J` padded to the source dimension with trivial Casimir coordinates.
    #[serde(rename = "J_lifted")]
    pub j_lifted: Vec<Vec<JsonRational>>,
    pub hamiltonian: HamiltonianJson,
    pub chain: Vec<ChainStepJson>,
}

pub fn method_name(method: DarbouxMethod) -> &'static str {
    match method {
        DarbouxMethod::General => "general",
        DarbouxMethod::Decoupling => "decoupling",
        DarbouxMethod::Linear => "linear",
    }
}

impl DarbouxReport {
    pub fn new(name: &str, d: &DarbouxSystem) -> Self {
        DarbouxReport {
            name: name.to_string(),
            method: method_name(d.method),
            r: d.r,
            n: d.n(),
            source_dim: d.source_dim,
            j: to_json_rows(&d.structure),
            j_lifted: to_json_rows(&d.lifted_structure()),
            hamiltonian: HamiltonianJson::from(&d.hamiltonian),
            chain: d.chain.iter().map(ChainStepJson::from).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftJson {
    pub label: String,
    pub initial: f64,
    pub max_abs_drift: f64,
    pub max_rel_drift: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConservationJson {
    pub drift_tol: f64,
    pub within_tolerance: bool,
    pub quantities: Vec<DriftJson>,
}

impl ConservationJson {
    pub fn new(report: &ConservationReport, drift_tol: f64) -> Self {
        ConservationJson {
            drift_tol,
            within_tolerance: report.within(drift_tol),
            quantities: report
                .quantities
                .iter()
                .map(|q| DriftJson {
                    label: q.label.clone(),
                    initial: q.initial,
                    max_abs_drift: q.max_abs_drift,
                    max_rel_drift: q.max_rel_drift,
                })
                .collect(),
        }
    }
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// `t,x1,...,xn` (or `y1..` in the log chart), 17 significant digits.
pub fn write_csv(traj: &Trajectory, out: &mut dyn Write) -> io::Result<()> {
    let var = match traj.chart() {
        Chart::PositiveOrthant => 'x',
        Chart::Log => 'y',
    };
    let mut header = String::from("t");
    for i in 1..=traj.dim() {
        header.push_str(&format!(",{var}{i}"));
    }
    writeln!(out, "{header}")?;
    for (t, state) in traj.times().iter().zip(traj.states()) {
        write!(out, "{t:.16e}")?;
        for v in state {
            write!(out, ",{v:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_precision() {
        let traj = Trajectory::new(
            vec![0.0, 0.1],
            vec![vec![1.0, 0.5], vec![std::f64::consts::PI, 2.0 / 3.0]],
            Chart::PositiveOrthant,
        );
        let mut buf = Vec::new();
        write_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,x2");
        assert_eq!(lines[1], "0.0000000000000000e0,1.0000000000000000e0,5.0000000000000000e-1");
        let fields: Vec<f64> = lines[2].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields, vec![0.1, std::f64::consts::PI, 2.0 / 3.0]);

        let log = Trajectory::new(vec![0.0], vec![vec![0.0]], Chart::Log);
        let mut buf = Vec::new();
        write_csv(&log, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,y1\n"));
    }
}
