//! Generalized Lotka-Volterra systems
//! `ẋᵢ = xᵢ(λᵢ + Σⱼ Aᵢⱼ Πₖ xₖ^Bⱼₖ)` on the open positive orthant, and the
//! structural manipulations between them: quasimonomial transformations
//! (QMTs), p-embeddings and p-decouplings.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

// Inherent f64 methods shadow these when a dependency links std.
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{pow_int, pow_rational, Rational};
use crate::ratmat::{complete_to_full_rank, RatMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlvSystem {
    name: String,
    b: RatMatrix,
    a: RatMatrix,
    lambda: RatMatrix,
}

/// The class data `(r, n, m)` together with the QMT invariant `B·M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassSignature {
    pub r: usize,
    pub n: usize,
    pub m: usize,
    pub bm: RatMatrix,
}

/// Parameters of a p-embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingSpec {
    pub p: usize,
    /// Initial values of the frozen variables; all positive.
    pub alpha: Vec<Rational>,
    /// `m×p` exponent block; `None` picks identity columns greedily.
    pub b_star: Option<RatMatrix>,
    /// Extension of `L` for the embedded factorization; `None` means zero.
    pub l_star: Option<Vec<Rational>>,
}

impl EmbeddingSpec {
    /// `p` frozen variables at 1 with an automatically completed `B*`.
    pub fn unit(p: usize) -> Self {
        EmbeddingSpec {
            p,
            alpha: vec![Rational::one(); p],
            b_star: None,
            l_star: None,
        }
    }
}

/// An embedding spec with `B*` fixed and the scaling `E` evaluated.
#[derive(Clone, Debug)]
pub(crate) struct ResolvedEmbedding {
    pub b_tilde: RatMatrix,
    pub e: Vec<Rational>,
}

impl GlvSystem {
    /// Validates dimensions, `m ≥ n` and `rank(B) = n`.
    pub fn new(
        name: impl Into<String>,
        b: RatMatrix,
        a: RatMatrix,
        lambda: RatMatrix,
    ) -> Result<Self> {
        let (m, n) = b.shape();
        if a.shape() != (n, m) {
            return Err(Error::InvalidSystem(format!(
                "A is {}x{}, expected {n}x{m}",
                a.rows(),
                a.cols()
            )));
        }
        if lambda.shape() != (n, 1) {
            return Err(Error::InvalidSystem(format!(
                "lambda is {}x{}, expected {n}x1",
                lambda.rows(),
                lambda.cols()
            )));
        }
        if m < n {
            return Err(Error::InvalidSystem(format!(
                "m = {m} quasimonomials is fewer than n = {n} variables"
            )));
        }
        if b.rank() != n {
            return Err(Error::InvalidSystem("B not maximal rank".to_string()));
        }
        Ok(GlvSystem {
            name: name.into(),
            b,
            a,
            lambda,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn n(&self) -> usize {
        self.b.cols()
    }

    pub fn m(&self) -> usize {
        self.b.rows()
    }

    pub fn b(&self) -> &RatMatrix {
        &self.b
    }

    pub fn a(&self) -> &RatMatrix {
        &self.a
    }

    pub fn lambda(&self) -> &RatMatrix {
        &self.lambda
    }

    pub fn lambda_vec(&self) -> Vec<Rational> {
        self.lambda.column_vec(0)
    }

    /// `M = (λ | A)`, assembled on demand.
    pub fn m_matrix(&self) -> RatMatrix {
        self.lambda
            .hstack(&self.a)
            .expect("lambda and A share a row count")
    }

    pub fn is_lotka_volterra(&self) -> bool {
        self.b == RatMatrix::identity(self.n())
    }

    pub fn float_field(&self) -> FloatField {
        FloatField::new(self)
    }

    /// `ẋ` at a point of the open positive orthant.
    pub fn eval_vector_field(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_positive_point(x, self.n())?;
        let field = self.float_field();
        let u: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let mut du = vec![0.0; self.n()];
        field.log_rhs(&u, &mut du);
        Ok(du.iter().zip(x).map(|(d, xi)| d * xi).collect())
    }

    /// `ẋ` at a positive rational point, exactly. Requires integer `B`.
    pub fn eval_vector_field_exact(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                context: "state vector",
                expected: self.n(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_positive()) {
            return Err(Error::Domain("state must lie in the open positive orthant".into()));
        }
        let q = exact_quasimonomials(&self.b, x)?;
        let rates = self.a.mul_vec(&q);
        Ok((0..self.n())
            .map(|i| &x[i] * (&self.lambda[(i, 0)] + &rates[i]))
            .collect())
    }

    pub fn class_signature(&self) -> ClassSignature {
        ClassSignature {
            r: self.m_matrix().rank(),
            n: self.n(),
            m: self.m(),
            bm: &self.b * &self.m_matrix(),
        }
    }

    /// The QMT `xᵢ = Πₖ yₖ^Cᵢₖ`: `B' = B·C`, `A' = C⁻¹·A`, `λ' = C⁻¹·λ`.
    pub fn apply_qmt(&self, c: &RatMatrix) -> Result<GlvSystem> {
        if c.shape() != (self.n(), self.n()) {
            return Err(Error::DimensionMismatch {
                context: "QMT matrix size",
                expected: self.n(),
                found: c.rows().max(c.cols()),
            });
        }
        let c_inv = c.invert()?;
        Ok(GlvSystem {
            name: self.name.clone(),
            b: &self.b * c,
            a: &c_inv * &self.a,
            lambda: &c_inv * &self.lambda,
        })
    }

    pub(crate) fn resolve_embedding(&self, spec: &EmbeddingSpec) -> Result<ResolvedEmbedding> {
        let (n, m) = (self.n(), self.m());
        if spec.p == 0 || n + spec.p > m {
            return Err(Error::CannotComplete {
                needed: spec.p,
                available: m - n,
            });
        }
        if spec.alpha.len() != spec.p {
            return Err(Error::DimensionMismatch {
                context: "embedding alpha",
                expected: spec.p,
                found: spec.alpha.len(),
            });
        }
        if spec.alpha.iter().any(|a| !a.is_positive()) {
            return Err(Error::Domain("embedding alpha must be positive".into()));
        }
        let b_star = match &spec.b_star {
            Some(bs) => {
                if bs.shape() != (m, spec.p) {
                    return Err(Error::DimensionMismatch {
                        context: "embedding B* columns",
                        expected: spec.p,
                        found: bs.cols(),
                    });
                }
                bs.clone()
            }
            None => complete_to_full_rank(&self.b, spec.p)?,
        };
        let b_tilde = self.b.hstack(&b_star)?;
        if b_tilde.rank() != n + spec.p {
            return Err(Error::CannotComplete {
                needed: spec.p,
                available: b_tilde.rank() - n,
            });
        }
        let e = frozen_scaling(&b_star, &spec.alpha)?
            .into_iter()
            .map(|f| f.recip())
            .collect();
        Ok(ResolvedEmbedding { b_tilde, e })
    }

    /// Adds `p` frozen variables `x_{n+i} ≡ αᵢ`:
    /// `B̃ = (B | B*)`, `Ã = (A·E ; 0)`, `λ̃ = (λ ; 0)` with
    /// `eⱼ = (Πₖ αₖ^B*ⱼₖ)⁻¹`.
    pub fn embed(&self, spec: &EmbeddingSpec) -> Result<GlvSystem> {
        let resolved = self.resolve_embedding(spec)?;
        let e = RatMatrix::diagonal(&resolved.e);
        let a_tilde = (&self.a * &e).vstack(&RatMatrix::zeros(spec.p, self.m()))?;
        let lambda_tilde = self.lambda.vstack(&RatMatrix::zeros(spec.p, 1))?;
        Ok(GlvSystem {
            name: self.name.clone(),
            b: resolved.b_tilde,
            a: a_tilde,
            lambda: lambda_tilde,
        })
    }

    /// Restricts a system whose last `p` rows of `M` vanish to the level set
    /// `x_{n−p+k} = αₖ`: `B̂ = B̄`, `λ̂ = λ̄`, `Â = Ā·E⁻¹`.
    pub fn decouple(&self, p: usize, alpha: &[Rational]) -> Result<GlvSystem> {
        let n = self.n();
        if p > n {
            return Err(Error::InsufficientDegeneracy {
                requested: p,
                available: n,
            });
        }
        if alpha.len() != p {
            return Err(Error::DimensionMismatch {
                context: "decoupling alpha",
                expected: p,
                found: alpha.len(),
            });
        }
        if alpha.iter().any(|a| !a.is_positive()) {
            return Err(Error::Domain("decoupling alpha must be positive".into()));
        }
        if p == 0 {
            return Ok(self.clone());
        }
        let keep = n - p;
        let m_mat = self.m_matrix();
        if !m_mat.submatrix(keep..n, 0..m_mat.cols()).is_zero() {
            return Err(Error::NotDecoupledForm { p });
        }
        let dropped = self.b.submatrix(0..self.m(), keep..n);
        // E⁻¹ = diag(Πₖ αₖ^B'ⱼₖ).
        let e_inv = RatMatrix::diagonal(&frozen_scaling(&dropped, alpha)?);
        let a_bar = self.a.submatrix(0..keep, 0..self.m());
        Ok(GlvSystem {
            name: self.name.clone(),
            b: self.b.submatrix(0..self.m(), 0..keep),
            a: &a_bar * &e_inv,
            lambda: self.lambda.submatrix(0..keep, 0..1),
        })
    }

    /// A QMT matrix `C` bringing the last `p` rows of `M` to zero.
    ///
    /// The last `p` rows of `C⁻¹` are left-kernel vectors of `M`; the leading
    /// rows are identity rows picked greedily to make `C⁻¹` invertible. If
    /// the last `p` rows of `M` are already zero, `C = I`.
    pub fn prepare_decoupling(&self, p: usize) -> Result<RatMatrix> {
        let m_mat = self.m_matrix();
        let n = self.n();
        let done = p <= n && m_mat.submatrix(n - p..n, 0..m_mat.cols()).is_zero();
        decoupling_qmt(n, p, done, || m_mat.left_kernel_basis())
    }

    /// Exponent vectors `N` with `Πⱼ xⱼ^Nⱼ` conserved: a basis of `Ker(Mᵀ)`.
    pub fn quasimonomial_invariants(&self) -> Vec<Vec<Rational>> {
        self.m_matrix().left_kernel_basis()
    }

    /// An LV member of the class (after a unit `(m−n)`-embedding when
    /// `m > n`), and the QMT matrix that produced it.
    pub fn lv_representative(&self) -> Result<(GlvSystem, RatMatrix)> {
        let base = if self.m() > self.n() {
            self.embed(&EmbeddingSpec::unit(self.m() - self.n()))?
        } else {
            self.clone()
        };
        let c = base.b.invert()?;
        let lv = base.apply_qmt(&c)?;
        Ok((lv, c))
    }
}

/// Shared construction for system and factorization decouplings: `C⁻¹` is
/// `p` kernel vectors stacked under greedily chosen identity rows.
pub(crate) fn decoupling_qmt(
    n: usize,
    p: usize,
    already_decoupled: bool,
    kernel: impl FnOnce() -> Vec<Vec<Rational>>,
) -> Result<RatMatrix> {
    if p == 0 || already_decoupled {
        return Ok(RatMatrix::identity(n));
    }
    let basis = kernel();
    if p > basis.len() {
        return Err(Error::InsufficientDegeneracy {
            requested: p,
            available: basis.len(),
        });
    }
    let chosen = RatMatrix::from_rows(basis.into_iter().take(p).collect())?;
    let lead = complete_to_full_rank(&chosen.transpose(), n - p)?.transpose();
    let c_inv = lead.vstack(&chosen)?;
    c_inv.invert()
}

/// `fⱼ = Πₖ αₖ^Xⱼₖ` for each row `j` of the exponent block `X`.
fn frozen_scaling(exponents: &RatMatrix, alpha: &[Rational]) -> Result<Vec<Rational>> {
    (0..exponents.rows())
        .map(|j| {
            exponents
                .row(j)
                .iter()
                .zip(alpha)
                .try_fold(Rational::one(), |acc, (e, a)| Ok(acc * pow_rational(a, e)?))
        })
        .collect()
}

pub(crate) fn exact_quasimonomials(b: &RatMatrix, x: &[Rational]) -> Result<Vec<Rational>> {
    if !b.is_integer() {
        return Err(Error::NonRationalScaling(
            "exact evaluation needs integer exponents".into(),
        ));
    }
    (0..b.rows())
        .map(|j| {
            b.row(j).iter().zip(x).try_fold(Rational::one(), |acc, (e, xk)| {
                if e.is_zero() {
                    return Ok(acc);
                }
                let exp = num_traits::ToPrimitive::to_i64(e.numer())
                    .ok_or_else(|| Error::Domain(format!("exponent {e} too large")))?;
                Ok(acc * pow_int(xk, exp)?)
            })
        })
        .collect()
}

pub(crate) fn check_positive_point(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            context: "state vector",
            expected: n,
            found: x.len(),
        });
    }
    if let Some(v) = x.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Domain(format!(
            "state component {v} is outside the open positive orthant"
        )));
    }
    Ok(())
}

/// Floating-point copy of a system for repeated evaluation in log space.
#[derive(Clone, Debug)]
pub struct FloatField {
    b: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
    lambda: Vec<f64>,
}

impl FloatField {
    pub fn new(sys: &GlvSystem) -> Self {
        FloatField {
            b: sys.b.to_f64_rows(),
            a: sys.a.to_f64_rows(),
            lambda: sys.lambda.column_vec(0).iter().map(crate::rational::to_f64).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// `u̇ᵢ = λᵢ + Σⱼ Aᵢⱼ exp(⟨Bⱼ, u⟩)` where `u = ln x`.
    pub fn log_rhs(&self, u: &[f64], out: &mut [f64]) {
        let q: Vec<f64> = self
            .b
            .iter()
            .map(|row| row.iter().zip(u).map(|(b, v)| b * v).sum::<f64>().exp())
            .collect();
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.lambda[i] + self.a[i].iter().zip(&q).map(|(a, qj)| a * qj).sum::<f64>();
        }
    }

    /// `ẋ` at a positive point, without validation.
    pub fn rhs(&self, x: &[f64]) -> Vec<f64> {
        let u: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let mut du = vec![0.0; u.len()];
        self.log_rhs(&u, &mut du);
        du.iter().zip(x).map(|(d, xi)| d * xi).collect()
    }
}
