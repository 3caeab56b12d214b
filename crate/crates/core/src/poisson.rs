//! GLV-Poisson (GLVP) structure.
//!
//! A GLV system is GLVP when `λ = K·L` and `A = K·Bᵀ·D` with `K` skew and
//! `D` diagonal and nonsingular. It is then Poisson with structure matrix
//! `J = X·K·X` and Hamiltonian `H = Σ Dᵢᵢ Πₖ xₖ^Bᵢₖ + Σ Lⱼ ln xⱼ`, and its
//! Casimirs are `Σ Nⱼ ln xⱼ` for `N ∈ Ker K`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::glv::{check_positive_point, decoupling_qmt, EmbeddingSpec, GlvSystem};
use crate::hamiltonian::{Casimir, Chart, HamiltonianExpr, MonomialTerm};
use crate::rational::{rat, Rational};
use crate::ratmat::RatMatrix;

/// The certificate `(K, D, L)` of a GLVP system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlvpFactorization {
    /// `n×n`, skew-symmetric.
    pub k: RatMatrix,
    /// Diagonal of `D`; `m` nonzero entries.
    pub d_diag: Vec<Rational>,
    /// `n×1`.
    pub l: RatMatrix,
}

/// Why [`solve_factorization`] found no factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NotGlvp {
    /// `rank A ≠ rank M`, or the common rank is odd.
    RankObstruction { rank_a: usize, rank_m: usize },
    /// No admissible `D` with every diagonal entry nonzero was found in the
    /// searched part of the solution space.
    NoNonvanishingD { kernel_dim: usize, attempts: usize },
    /// `A` factors but `λ` is not in the column space of `K`.
    LambdaNotInImage,
}

impl fmt::Display for NotGlvp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotGlvp::RankObstruction { rank_a, rank_m } => {
                if rank_a != rank_m {
                    write!(f, "rank obstruction: rank A = {rank_a} differs from rank M = {rank_m}")
                } else {
                    write!(f, "rank obstruction: rank A = {rank_a} is odd")
                }
            }
            NotGlvp::NoNonvanishingD { kernel_dim, attempts } => write!(
                f,
                "no nonvanishing D: solution space of dimension {kernel_dim}, \
                 {attempts} candidates tried (basis vectors, pair sums, seeded integer combinations)"
            ),
            NotGlvp::LambdaNotInImage => f.write_str("lambda is not in the image of K"),
        }
    }
}

/// Upper bound on candidate `D` vectors tried by the nonvanishing search.
pub const MAX_D_ATTEMPTS: usize = 1000;

const D_SEARCH_SEED: u64 = 0x005e_ed0f_d1a6;

impl GlvpFactorization {
    pub fn new(k: RatMatrix, d_diag: Vec<Rational>, l: RatMatrix) -> Self {
        GlvpFactorization { k, d_diag, l }
    }

    pub fn n(&self) -> usize {
        self.k.rows()
    }

    pub fn rank(&self) -> usize {
        self.k.rank()
    }

    pub fn l_vec(&self) -> Vec<Rational> {
        self.l.column_vec(0)
    }

    pub fn d_matrix(&self) -> RatMatrix {
        RatMatrix::diagonal(&self.d_diag)
    }

    /// `J = X·K·X` at a point of the positive orthant.
    pub fn structure_matrix(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_positive_point(x, self.n())?;
        let k = self.k.to_f64_rows();
        Ok((0..self.n())
            .map(|i| (0..self.n()).map(|j| x[i] * k[i][j] * x[j]).collect())
            .collect())
    }

    /// Basis of `Ker K`, one Casimir per vector.
    pub fn casimirs(&self) -> Vec<Casimir> {
        self.k
            .right_kernel_basis()
            .into_iter()
            .map(|exponents| Casimir { exponents })
            .collect()
    }

    /// Largest Jacobi residual of `X·K·X` over `samples`; zero for skew `K`.
    pub fn check_jacobi(&self, samples: &[Vec<Rational>]) -> Rational {
        jacobi_residual(&self.k, samples)
    }

    /// Factorization after the QMT `C`:
    /// `K' = C⁻¹·K·(C⁻¹)ᵀ`, `L' = Cᵀ·L`, `D' = D`.
    pub fn transform(&self, c: &RatMatrix) -> Result<GlvpFactorization> {
        let c_inv = c.invert()?;
        if c.rows() != self.n() {
            return Err(Error::DimensionMismatch {
                context: "QMT matrix size",
                expected: self.n(),
                found: c.rows(),
            });
        }
        Ok(GlvpFactorization {
            k: &(&c_inv * &self.k) * &c_inv.transpose(),
            d_diag: self.d_diag.clone(),
            l: &c.transpose() * &self.l,
        })
    }
}

/// True iff `K` is skew, every `Dᵢᵢ ≠ 0`, `λ = K·L` and `A = K·Bᵀ·D`.
pub fn verify_factorization(sys: &GlvSystem, f: &GlvpFactorization) -> Result<bool> {
    let (n, m) = (sys.n(), sys.m());
    check_dims(n, m, f)?;
    if !f.k.is_skew_symmetric() || f.d_diag.iter().any(Zero::is_zero) {
        return Ok(false);
    }
    if &(&f.k * &f.l) != sys.lambda() {
        return Ok(false);
    }
    let a = &(&f.k * &sys.b().transpose()) * &f.d_matrix();
    Ok(&a == sys.a())
}

fn check_dims(n: usize, m: usize, f: &GlvpFactorization) -> Result<()> {
    let mismatch = |context, expected, found| {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    };
    if f.k.shape() != (n, n) {
        return mismatch("factorization K", n, f.k.rows().max(f.k.cols()));
    }
    if f.d_diag.len() != m {
        return mismatch("factorization D", m, f.d_diag.len());
    }
    if f.l.shape() != (n, 1) {
        return mismatch("factorization L", n, f.l.rows());
    }
    Ok(())
}

/// Searches for a GLVP factorization of `sys`.
///
/// With `uⱼ = 1/Dⱼⱼ` the requirement `A·diag(u) = K·Bᵀ` for a skew `K` is
/// linear in `u`. Writing `G = B·(BᵀB)⁻¹` (a right inverse of `Bᵀ`), it
/// splits into row-space consistency `A·diag(u)·(I − G·Bᵀ) = 0` and
/// skew-symmetry of `K = A·diag(u)·G`. A kernel vector of that homogeneous
/// system with no zero entry gives `D`; `L` is the particular solution of
/// `K·L = λ` with free variables at zero.
pub fn solve_factorization(sys: &GlvSystem) -> core::result::Result<GlvpFactorization, NotGlvp> {
    let rank_a = sys.a().rank();
    let rank_m = sys.m_matrix().rank();
    if rank_a != rank_m || rank_a % 2 != 0 {
        return Err(NotGlvp::RankObstruction { rank_a, rank_m });
    }

    let (equations, g) = if sys.is_lotka_volterra() {
        (lv_equations(sys.a()), RatMatrix::identity(sys.n()))
    } else {
        general_equations(sys)
    };
    let kernel = equations.right_kernel_basis();
    let u = find_nonvanishing(&kernel).map_err(|attempts| NotGlvp::NoNonvanishingD {
        kernel_dim: kernel.len(),
        attempts,
    })?;

    let scaled = sys.a() * &RatMatrix::diagonal(&u);
    let k = &scaled * &g;
    let lambda = sys.lambda_vec();
    let l = k.solve(&lambda).ok_or(NotGlvp::LambdaNotInImage)?;
    let f = GlvpFactorization {
        k,
        d_diag: u.iter().map(Rational::recip).collect(),
        l: RatMatrix::column(l),
    };
    debug_assert_eq!(verify_factorization(sys, &f), Ok(true));
    Ok(f)
}

/// `B = I`: `K = A·diag(u)` directly, and skew-symmetry reads
/// `Aᵢⱼ uⱼ + Aⱼᵢ uᵢ = 0`, i.e. `Dᵢᵢ Aᵢⱼ = −Dⱼⱼ Aⱼᵢ`.
fn lv_equations(a: &RatMatrix) -> RatMatrix {
    let n = a.rows();
    let mut rows = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut eq = vec![Rational::zero(); n];
            eq[j] += &a[(i, j)];
            eq[i] += &a[(j, i)];
            if eq.iter().any(|v| !v.is_zero()) {
                rows.push(eq);
            }
        }
    }
    RatMatrix::from_row_major(rows.len(), n, rows.concat()).expect("rows have length n")
}

/// The homogeneous system in `u` for general `B`, and the right inverse `G`.
fn general_equations(sys: &GlvSystem) -> (RatMatrix, RatMatrix) {
    let (n, m) = (sys.n(), sys.m());
    let a = sys.a();
    let b = sys.b();
    let gram = &b.transpose() * b;
    let g = b * &gram.invert().expect("B has full column rank");
    let proj = &RatMatrix::identity(m) - &(&g * &b.transpose());

    let mut rows = Vec::new();
    // (A·diag(u)·Π)ᵢc = Σⱼ Aᵢⱼ Πⱼc uⱼ.
    for i in 0..n {
        for c in 0..m {
            let eq: Vec<Rational> = (0..m).map(|j| &a[(i, j)] * &proj[(j, c)]).collect();
            if eq.iter().any(|v| !v.is_zero()) {
                rows.push(eq);
            }
        }
    }
    // Kᵢₖ + Kₖᵢ = Σⱼ (Aᵢⱼ Gⱼₖ + Aₖⱼ Gⱼᵢ) uⱼ for i ≤ k.
    for i in 0..n {
        for k in i..n {
            let eq: Vec<Rational> = (0..m)
                .map(|j| &a[(i, j)] * &g[(j, k)] + &a[(k, j)] * &g[(j, i)])
                .collect();
            if eq.iter().any(|v| !v.is_zero()) {
                rows.push(eq);
            }
        }
    }
    let eqs = RatMatrix::from_row_major(rows.len(), m, rows.concat()).expect("rows have length m");
    (eqs, g)
}

/// Basis vectors, then pairwise sums, then seeded small-integer combinations.
/// Returns the number of attempts on failure.
fn find_nonvanishing(basis: &[Vec<Rational>]) -> core::result::Result<Vec<Rational>, usize> {
    let all_nonzero = |v: &[Rational]| v.iter().all(|x| !x.is_zero());
    let mut attempts = 0;
    if basis.is_empty() {
        return Err(0);
    }
    for v in basis {
        attempts += 1;
        if all_nonzero(v) {
            return Ok(v.clone());
        }
    }
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            if attempts >= MAX_D_ATTEMPTS {
                return Err(attempts);
            }
            attempts += 1;
            let sum: Vec<Rational> = basis[i].iter().zip(&basis[j]).map(|(a, b)| a + b).collect();
            if all_nonzero(&sum) {
                return Ok(sum);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(D_SEARCH_SEED);
    while attempts < MAX_D_ATTEMPTS {
        attempts += 1;
        let mut combo = vec![Rational::zero(); basis[0].len()];
        for v in basis {
            let coeff = Rational::from_integer(rng.gen_range(-7i64..=7).into());
            for (c, x) in combo.iter_mut().zip(v) {
                *c += &coeff * x;
            }
        }
        if all_nonzero(&combo) {
            return Ok(combo);
        }
    }
    Err(attempts)
}

/// The positive-orthant Hamiltonian `Σ Dᵢᵢ Πₖ xₖ^Bᵢₖ + Σ Lⱼ ln xⱼ`.
pub fn hamiltonian(sys: &GlvSystem, f: &GlvpFactorization) -> Result<HamiltonianExpr> {
    if !verify_factorization(sys, f)? {
        return Err(Error::InvalidFactorization);
    }
    Ok(HamiltonianExpr {
        chart: Chart::PositiveOrthant,
        terms: f
            .d_diag
            .iter()
            .enumerate()
            .map(|(i, d)| MonomialTerm {
                coefficient: d.clone(),
                exponents: sys.b().row(i).to_vec(),
            })
            .collect(),
        linear: f.l_vec(),
    })
}

/// Maximum over samples and index triples of
/// `|Σₗ (Jₗᵢ ∂ₗJⱼₖ + Jₗⱼ ∂ₗJₖᵢ + Jₗₖ ∂ₗJᵢⱼ)|` for `J = X·K·X`, exactly.
///
/// `∂ₗJᵢⱼ = δₗᵢ Kᵢⱼ xⱼ + δₗⱼ xᵢ Kᵢⱼ`, so each sum over `l` collapses to two
/// terms. `K` need not be skew; a non-skew `K` generally leaves a residual.
pub fn jacobi_residual(k: &RatMatrix, samples: &[Vec<Rational>]) -> Rational {
    let n = k.rows();
    let mut worst = Rational::zero();
    for x in samples {
        assert_eq!(x.len(), n, "sample dimension mismatch");
        let j = |a: usize, b: usize| &x[a] * &k[(a, b)] * &x[b];
        // Σₗ Jₗₐ ∂ₗJ_bc = J_ba K_bc x_c + J_ca x_b K_bc.
        let cyclic = |a: usize, b: usize, c: usize| {
            let kbc = &k[(b, c)];
            if kbc.is_zero() {
                return Rational::zero();
            }
            (j(b, a) * &x[c] + j(c, a) * &x[b]) * kbc
        };
        // The cyclic sum is invariant under rotating (a, b, c), so one
        // rotation per orbit suffices.
        for a in 0..n {
            for b in a..n {
                for c in a..n {
                    if c == a && b > a {
                        continue;
                    }
                    let total = cyclic(a, b, c) + cyclic(b, c, a) + cyclic(c, a, b);
                    let abs = total.abs();
                    if abs > worst {
                        worst = abs;
                    }
                }
            }
        }
    }
    worst
}

/// `count` points with coordinates drawn from `{1/3, 1/2, 1, 2, 3}`.
pub fn default_jacobi_samples(n: usize, count: usize, seed: u64) -> Vec<Vec<Rational>> {
    let grid = [rat(1, 3), rat(1, 2), rat(1, 1), rat(2, 1), rat(3, 1)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| grid[rng.gen_range(0..grid.len())].clone()).collect())
        .collect()
}

/// Factorization of `sys.embed(spec)`: `K̃ = [[K, 0], [0, 0]]`,
/// `L̃ = (L ; L*)`, `D̃ = D·E`.
pub fn embed_factorization(
    sys: &GlvSystem,
    f: &GlvpFactorization,
    spec: &EmbeddingSpec,
) -> Result<GlvpFactorization> {
    check_dims(sys.n(), sys.m(), f)?;
    let resolved = sys.resolve_embedding(spec)?;
    let (n, p) = (sys.n(), spec.p);
    let k_tilde = f
        .k
        .hstack(&RatMatrix::zeros(n, p))?
        .vstack(&RatMatrix::zeros(p, n + p))?;
    let l_star = match &spec.l_star {
        Some(ls) if ls.len() != p => {
            return Err(Error::DimensionMismatch {
                context: "embedding L*",
                expected: p,
                found: ls.len(),
            })
        }
        Some(ls) => RatMatrix::column(ls.clone()),
        None => RatMatrix::zeros(p, 1),
    };
    Ok(GlvpFactorization {
        k: k_tilde,
        d_diag: f.d_diag.iter().zip(&resolved.e).map(|(d, e)| d * e).collect(),
        l: f.l.vstack(&l_star)?,
    })
}

/// A p-decoupling carried out on a GLVP system together with its factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoupled {
    pub system: GlvSystem,
    pub factorization: GlvpFactorization,
    /// The QMT applied before restricting.
    pub qmt: RatMatrix,
}

/// Moves `p` Casimirs into the last coordinates with a QMT whose inverse
/// ends in `p` vectors of `Ker K`, then restricts to the level set
/// `x_{n−p+k} = αₖ`: `K̂ = K̄`, `L̂ = L̄`, `D̂ = D·E⁻¹`.
pub fn decouple_factorization(
    sys: &GlvSystem,
    f: &GlvpFactorization,
    p: usize,
    alpha: &[Rational],
) -> Result<Decoupled> {
    let n = sys.n();
    check_dims(n, sys.m(), f)?;
    if !f.k.is_skew_symmetric() {
        return Err(Error::NotSkewSymmetric);
    }
    let available = n - f.rank();
    if p > available {
        return Err(Error::InsufficientDegeneracy {
            requested: p,
            available,
        });
    }
    let keep = n - p;
    let already = f.k.submatrix(keep..n, 0..n).is_zero()
        && sys.m_matrix().submatrix(keep..n, 0..sys.m() + 1).is_zero();
    let c = decoupling_qmt(n, p, already, || f.k.right_kernel_basis())?;
    let moved_sys = sys.apply_qmt(&c)?;
    let moved_f = f.transform(&c)?;
    let reduced = moved_sys.decouple(p, alpha)?;

    // D̂ᵢᵢ = Dᵢᵢ·Πₖ αₖ^Bᵢₖ over the dropped columns of the moved B.
    let dropped = moved_sys.b().submatrix(0..sys.m(), keep..n);
    let d_hat = moved_f
        .d_diag
        .iter()
        .enumerate()
        .map(|(i, d)| {
            dropped.row(i).iter().zip(alpha).try_fold(d.clone(), |acc, (e, a)| {
                Ok::<_, Error>(acc * crate::rational::pow_rational(a, e)?)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let factorization = GlvpFactorization {
        k: moved_f.k.submatrix(0..keep, 0..keep),
        d_diag: d_hat,
        l: moved_f.l.submatrix(0..keep, 0..1),
    };
    Ok(Decoupled {
        system: reduced,
        factorization,
        qmt: c,
    })
}

/// `true` when every diagonal entry of `D` is strictly positive.
pub fn has_positive_d(f: &GlvpFactorization) -> bool {
    f.d_diag.iter().all(Signed::is_positive)
}

/// `D` rescaled so that its first entry is 1, for comparisons up to scale.
pub fn normalized_d(f: &GlvpFactorization) -> Vec<Rational> {
    match f.d_diag.first() {
        Some(first) if !first.is_zero() => f.d_diag.iter().map(|d| d / first).collect(),
        _ => f.d_diag.clone(),
    }
}

impl GlvpFactorization {
    pub fn is_symplectic(&self) -> bool {
        self.rank() == self.n()
    }

    pub fn identity_like(n: usize, m: usize) -> Self {
        GlvpFactorization {
            k: RatMatrix::zeros(n, n),
            d_diag: vec![Rational::one(); m],
            l: RatMatrix::zeros(n, 1),
        }
    }
}
