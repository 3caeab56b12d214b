//! Global reduction of GLVP systems to Darboux canonical form.
//!
//! All three routes end in coordinates `y` where the structure matrix is the
//! constant `S(r, n−r)` and the Hamiltonian is a sum of exponentials of
//! linear forms plus a linear part:
//!
//! * [`darboux_general`]: the QMT `C = P⁻¹` with `P·K·Pᵀ = S(r, n−r)`, then
//!   `y = ln x`.
//! * [`darboux_via_decoupling`]: decouple every Casimir at level 1 first,
//!   then run the general route on the `r`-dimensional remainder.
//! * [`darboux_via_linear`]: `y = ln x` first (the structure matrix becomes
//!   `K`), then `w = P·y`.
//!
//! Every route records its [`ChainStep`]s so that states can be pushed into
//! and pulled back out of the Darboux chart.

use alloc::vec;
use alloc::vec::Vec;

// Inherent f64 methods shadow these when a dependency links std.
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::One;

use crate::error::{Error, Result};
use crate::glv::{check_positive_point, GlvSystem};
use crate::hamiltonian::{Chart, HamiltonianExpr};
use crate::poisson::{decouple_factorization, hamiltonian, verify_factorization, GlvpFactorization};
use crate::rational::{to_f64, Rational};
use crate::ratmat::{canonical_skew, skew_congruence_canonicalize, RatMatrix};

/// One coordinate change in a reduction chain, applied in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainStep {
    /// Quasimonomial transformation `ln x = C·ln z`.
    Qmt(RatMatrix),
    /// Keep the first `d − p` coordinates; the last `p` are frozen at `alpha`.
    Decouple { p: usize, alpha: Vec<Rational> },
    /// `y = ln x`: leave the positive orthant for the log chart.
    Log,
    /// Linear change `w = P·y` inside the log chart.
    Linear(RatMatrix),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DarbouxMethod {
    General,
    Decoupling,
    Linear,
}

/// A GLVP system in Darboux coordinates: `ẏ = J·∇H(y)` with constant `J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DarbouxSystem {
    pub method: DarbouxMethod,
    /// Rank of the structure matrix.
    pub r: usize,
    /// `S(r, n−r)` where `n` is the chart dimension.
    pub structure: RatMatrix,
    /// Hamiltonian in the log chart.
    pub hamiltonian: HamiltonianExpr,
    pub chain: Vec<ChainStep>,
    /// Dimension of the original positive-orthant system.
    pub source_dim: usize,
}

impl DarbouxSystem {
    /// Dimension of the Darboux chart.
    pub fn n(&self) -> usize {
        self.structure.rows()
    }

    /// The structure matrix padded with zero rows and columns up to the
    /// source dimension, so routes that drop Casimir coordinates compare
    /// against `S(r, source_dim − r)`.
    pub fn lifted_structure(&self) -> RatMatrix {
        canonical_skew(self.r, self.source_dim)
    }

    /// `ẏ = J·∇H(y)`.
    pub fn vector_field(&self, y: &[f64]) -> Vec<f64> {
        let g = self.hamiltonian.gradient(y);
        let j = self.structure.to_f64_rows();
        j.iter()
            .map(|row| row.iter().zip(&g).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn coordinate_map(&self) -> Result<CoordinateMap> {
        CoordinateMap::from_chain(self.source_dim, &self.chain)
    }
}

/// The composite of a chain: `y = F·ln x` and `ln x = G·y + offset`.
///
/// For chains with a decoupling, `G·F` is a projection and the backward map
/// lands on the level set fixed by the decoupling.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateMap {
    pub forward: RatMatrix,
    pub backward: RatMatrix,
    pub offset: Vec<f64>,
}

impl CoordinateMap {
    pub fn from_chain(source_dim: usize, chain: &[ChainStep]) -> Result<CoordinateMap> {
        let mut forward = RatMatrix::identity(source_dim);
        let mut backward = RatMatrix::identity(source_dim);
        let mut offset = vec![0.0; source_dim];
        for step in chain {
            match step {
                ChainStep::Qmt(c) => {
                    forward = c.invert()?.checked_mul(&forward)?;
                    backward = backward.checked_mul(c)?;
                }
                ChainStep::Decouple { p, alpha } => {
                    let d = forward.rows();
                    if *p > d || alpha.len() != *p {
                        return Err(Error::DimensionMismatch {
                            context: "chain decoupling",
                            expected: d.min(*p),
                            found: alpha.len(),
                        });
                    }
                    let keep = d - p;
                    for (row, o) in offset.iter_mut().enumerate() {
                        for (k, a) in alpha.iter().enumerate() {
                            *o += to_f64(&backward[(row, keep + k)]) * to_f64(a).ln();
                        }
                    }
                    forward = forward.submatrix(0..keep, 0..source_dim);
                    backward = backward.submatrix(0..source_dim, 0..keep);
                }
                ChainStep::Log => {}
                ChainStep::Linear(p) => {
                    backward = backward.checked_mul(&p.invert()?)?;
                    forward = p.checked_mul(&forward)?;
                }
            }
        }
        Ok(CoordinateMap {
            forward,
            backward,
            offset,
        })
    }

    /// Darboux coordinates of a positive-orthant point.
    pub fn to_darboux(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_positive_point(x, self.forward.cols())?;
        let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        Ok(apply(&self.forward, &logs))
    }

    /// Positive-orthant point of Darboux coordinates `y`.
    pub fn from_darboux(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.backward.cols() {
            return Err(Error::DimensionMismatch {
                context: "Darboux coordinates",
                expected: self.backward.cols(),
                found: y.len(),
            });
        }
        Ok(apply(&self.backward, y)
            .iter()
            .zip(&self.offset)
            .map(|(v, o)| (v + o).exp())
            .collect())
    }
}

fn apply(m: &RatMatrix, v: &[f64]) -> Vec<f64> {
    (0..m.rows())
        .map(|i| m.row(i).iter().zip(v).map(|(a, b)| to_f64(a) * b).sum())
        .collect()
}

/// The general route with an explicit QMT `C`, which must bring `K` to
/// `S(r, n−r)`. [`darboux_general`] supplies the canonical choice.
pub fn darboux_with_qmt(
    sys: &GlvSystem,
    f: &GlvpFactorization,
    c: &RatMatrix,
) -> Result<DarbouxSystem> {
    if !verify_factorization(sys, f)? {
        return Err(Error::InvalidFactorization);
    }
    let moved = sys.apply_qmt(c)?;
    let moved_f = f.transform(c)?;
    let r = moved_f.rank();
    let structure = canonical_skew(r, sys.n());
    if moved_f.k != structure {
        return Err(Error::Domain(
            "QMT does not bring K to canonical skew form".into(),
        ));
    }
    let h = hamiltonian(&moved, &moved_f)?.to_log_chart();
    Ok(DarbouxSystem {
        method: DarbouxMethod::General,
        r,
        structure,
        hamiltonian: h,
        chain: vec![ChainStep::Qmt(c.clone()), ChainStep::Log],
        source_dim: sys.n(),
    })
}

pub fn darboux_general(sys: &GlvSystem, f: &GlvpFactorization) -> Result<DarbouxSystem> {
    if !verify_factorization(sys, f)? {
        return Err(Error::InvalidFactorization);
    }
    let (p, _) = skew_congruence_canonicalize(&f.k)?;
    darboux_with_qmt(sys, f, &p.invert()?)
}

pub fn darboux_via_decoupling(sys: &GlvSystem, f: &GlvpFactorization) -> Result<DarbouxSystem> {
    if !verify_factorization(sys, f)? {
        return Err(Error::InvalidFactorization);
    }
    let p = sys.n() - f.rank();
    let alpha = vec![Rational::one(); p];
    let reduced = decouple_factorization(sys, f, p, &alpha)?;
    let inner = darboux_general(&reduced.system, &reduced.factorization)?;
    let mut chain = vec![ChainStep::Qmt(reduced.qmt), ChainStep::Decouple { p, alpha }];
    chain.extend(inner.chain);
    Ok(DarbouxSystem {
        method: DarbouxMethod::Decoupling,
        chain,
        source_dim: sys.n(),
        ..inner
    })
}

pub fn darboux_via_linear(sys: &GlvSystem, f: &GlvpFactorization) -> Result<DarbouxSystem> {
    if !verify_factorization(sys, f)? {
        return Err(Error::InvalidFactorization);
    }
    let (p, r) = skew_congruence_canonicalize(&f.k)?;
    // y = P⁻¹·w, so the log-chart Hamiltonian is substituted with T = P⁻¹.
    let h = hamiltonian(sys, f)?
        .to_log_chart()
        .substitute(&p.invert()?)?;
    debug_assert_eq!(h.chart, Chart::Log);
    Ok(DarbouxSystem {
        method: DarbouxMethod::Linear,
        r,
        structure: canonical_skew(r, sys.n()),
        hamiltonian: h,
        chain: vec![ChainStep::Log, ChainStep::Linear(p)],
        source_dim: sys.n(),
    })
}

pub fn darboux(sys: &GlvSystem, f: &GlvpFactorization, method: DarbouxMethod) -> Result<DarbouxSystem> {
    match method {
        DarbouxMethod::General => darboux_general(sys, f),
        DarbouxMethod::Decoupling => darboux_via_decoupling(sys, f),
        DarbouxMethod::Linear => darboux_via_linear(sys, f),
    }
}
