//! Dense matrices over the rationals.
//!
//! Every algorithm here is exact: rank, kernels and inverses come from
//! fraction-valued Gauss-Jordan elimination, and the skew-symmetric
//! canonicalization is a symmetric (congruence) elimination, so
//! `P·K·Pᵀ = S(r, n−r)` holds with no rounding at all.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Range, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{primitive_integer_vector, to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "row-major data",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(RatMatrix { rows, cols, data })
    }

    /// Builds a matrix from row vectors. All rows must have equal length;
    /// an empty list yields a 0×0 matrix.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row length",
                    expected: n_cols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(RatMatrix {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    /// Integer matrix literal. Panics on ragged input.
    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let converted = rows
            .iter()
            .map(|r| r.iter().map(|&v| crate::rational::int(v)).collect())
            .collect();
        Self::from_rows(converted).expect("ragged integer matrix literal")
    }

    pub fn column(entries: Vec<Rational>) -> Self {
        RatMatrix {
            rows: entries.len(),
            cols: 1,
            data: entries,
        }
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, d) in entries.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column_vec(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(to_f64).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn checked_mul(&self, rhs: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `(self | rhs)`.
    pub fn hstack(&self, rhs: &RatMatrix) -> Result<RatMatrix> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch {
                context: "horizontal concatenation",
                expected: self.rows,
                found: rhs.rows,
            });
        }
        let cols = self.cols + rhs.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(rhs.row(i));
        }
        Ok(RatMatrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// `(self ; rhs)`.
    pub fn vstack(&self, rhs: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                context: "vertical concatenation",
                expected: self.cols,
                found: rhs.cols,
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        Ok(RatMatrix {
            rows: self.rows + rhs.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> RatMatrix {
        assert!(rows.end <= self.rows && cols.end <= self.cols);
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for i in rows.clone() {
            data.extend_from_slice(&self.row(i)[cols.clone()]);
        }
        RatMatrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_integer(&self) -> bool {
        self.data.iter().all(|v| v.is_integer())
    }

    pub fn is_skew_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                self[(i, i)].is_zero()
                    && (i + 1..self.cols).all(|j| self[(i, j)] == -&self[(j, i)])
            })
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row == a.rows {
                break;
            }
            let Some(p) = (row..a.rows).find(|&r| !a[(r, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(row, p);
            let inv = a[(row, col)].recip();
            for j in col..a.cols {
                let v = &a[(row, j)] * &inv;
                a[(row, j)] = v;
            }
            for r in 0..a.rows {
                if r == row || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in col..a.cols {
                    if a[(row, j)].is_zero() {
                        continue;
                    }
                    let v = &a[(r, j)] - &f * &a[(row, j)];
                    a[(r, j)] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : M·v = 0}`, one primitive integer vector per free
    /// column, in increasing order of the free column index.
    pub fn right_kernel_basis(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|free| {
                let mut v = vec![Rational::zero(); self.cols];
                v[free] = Rational::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -&r[(row, free)];
                }
                primitive_integer_vector(&v)
            })
            .collect()
    }

    /// Basis of `{w : w·M = 0}`, normalized like [`Self::right_kernel_basis`].
    pub fn left_kernel_basis(&self) -> Vec<Vec<Rational>> {
        self.transpose().right_kernel_basis()
    }

    pub fn determinant(&self) -> Result<Rational> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                context: "determinant of non-square matrix",
                expected: self.rows,
                found: self.cols,
            });
        }
        let mut a = self.clone();
        let mut det = Rational::one();
        for col in 0..a.cols {
            let Some(p) = (col..a.rows).find(|&r| !a[(r, col)].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != col {
                a.swap_rows(p, col);
                det = -det;
            }
            let pivot = a[(col, col)].clone();
            det *= &pivot;
            for r in col + 1..a.rows {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] / &pivot;
                for j in col..a.cols {
                    let v = &a[(r, j)] - &f * &a[(col, j)];
                    a[(r, j)] = v;
                }
            }
        }
        Ok(det)
    }

    pub fn invert(&self) -> Result<RatMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                context: "inverse of non-square matrix",
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Self::zeros(0, 0));
        }
        let aug = self.hstack(&Self::identity(n))?;
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::SingularMatrix);
        }
        Ok(r.submatrix(0..n, n..2 * n))
    }

    /// A particular solution of `M·x = b`, with every free variable set to
    /// zero, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(self.rows, b.len(), "right-hand side length mismatch");
        let aug = self
            .hstack(&Self::column(b.to_vec()))
            .expect("row counts checked above");
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r[(row, self.cols)].clone();
        }
        Some(x)
    }
}

/// `S(r, n−r)`: `r/2` blocks `[[0,1],[−1,0]]` on the diagonal, then zeros.
pub fn canonical_skew(r: usize, n: usize) -> RatMatrix {
    assert!(r % 2 == 0 && r <= n, "canonical skew form needs even r <= n");
    let mut s = RatMatrix::zeros(n, n);
    for b in 0..r / 2 {
        s[(2 * b, 2 * b + 1)] = Rational::one();
        s[(2 * b + 1, 2 * b)] = -Rational::one();
    }
    s
}

/// Congruence state `current = P·K·Pᵀ`, updated one elementary operation at a time.
struct Congruence {
    p: RatMatrix,
    current: RatMatrix,
}

impl Congruence {
    fn swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.p.swap_rows(i, j);
        self.current.swap_rows(i, j);
        let n = self.current.cols;
        for r in 0..n {
            self.current.data.swap(r * n + i, r * n + j);
        }
    }

    fn scale(&mut self, i: usize, s: &Rational) {
        let n = self.current.cols;
        for c in 0..n {
            let v = &self.p[(i, c)] * s;
            self.p[(i, c)] = v;
            let v = &self.current[(i, c)] * s;
            self.current[(i, c)] = v;
        }
        for r in 0..n {
            let v = &self.current[(r, i)] * s;
            self.current[(r, i)] = v;
        }
    }

    /// row/col `target` += `factor` · row/col `source`.
    fn add(&mut self, target: usize, source: usize, factor: &Rational) {
        if factor.is_zero() {
            return;
        }
        let n = self.current.cols;
        for c in 0..n {
            let v = &self.p[(target, c)] + factor * &self.p[(source, c)];
            self.p[(target, c)] = v;
            let v = &self.current[(target, c)] + factor * &self.current[(source, c)];
            self.current[(target, c)] = v;
        }
        for r in 0..n {
            let v = &self.current[(r, target)] + factor * &self.current[(r, source)];
            self.current[(r, target)] = v;
        }
    }
}

/// Finds an invertible `P` with `P·K·Pᵀ = S(r, n−r)`, `r = rank(K)`.
///
/// Symmetric elimination: at each stage the lexicographically first nonzero
/// entry `(i, j)`, `i < j`, of the unreduced block is moved to position
/// `(t, t+1)`, scaled to 1, and used to clear rows and columns `t`, `t+1`.
/// The QMT that brings a structure matrix `K` to canonical form is `P⁻¹`.
pub fn skew_congruence_canonicalize(k: &RatMatrix) -> Result<(RatMatrix, usize)> {
    if !k.is_skew_symmetric() {
        return Err(Error::NotSkewSymmetric);
    }
    let n = k.rows();
    let mut state = Congruence {
        p: RatMatrix::identity(n),
        current: k.clone(),
    };
    let mut t = 0;
    while t + 1 < n {
        let pivot = (t..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| !state.current[(i, j)].is_zero());
        let Some((i, j)) = pivot else { break };
        // j > i >= t, so moving i into slot t leaves column j in place.
        state.swap(t, i);
        state.swap(t + 1, j);
        let inv = state.current[(t, t + 1)].recip();
        state.scale(t + 1, &inv);
        for col in t + 2..n {
            let a = state.current[(t, col)].clone();
            let b = state.current[(t + 1, col)].clone();
            state.add(col, t, &b);
            state.add(col, t + 1, &-a);
        }
        t += 2;
    }
    debug_assert_eq!(state.current, canonical_skew(t, n));
    Ok((state.p, t))
}

/// Chooses `p` columns of the `m×m` identity, greedily in index order, so
/// that `(B | B*)` has rank `n + p`. `B` is `m×n` of rank `n`.
pub fn complete_to_full_rank(b: &RatMatrix, p: usize) -> Result<RatMatrix> {
    let (m, n) = b.shape();
    if n + p > m {
        return Err(Error::CannotComplete {
            needed: p,
            available: m.saturating_sub(n),
        });
    }
    let mut current = b.clone();
    let mut rank = current.rank();
    let mut chosen = Vec::with_capacity(p);
    for i in 0..m {
        if chosen.len() == p {
            break;
        }
        let mut e = RatMatrix::zeros(m, 1);
        e[(i, 0)] = Rational::one();
        let candidate = current.hstack(&e)?;
        let r = candidate.rank();
        if r > rank {
            current = candidate;
            rank = r;
            chosen.push(i);
        }
    }
    if chosen.len() < p {
        return Err(Error::CannotComplete {
            needed: p,
            available: chosen.len(),
        });
    }
    let mut b_star = RatMatrix::zeros(m, p);
    for (c, &i) in chosen.iter().enumerate() {
        b_star[(i, c)] = Rational::one();
    }
    Ok(b_star)
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &RatMatrix {
    type Output = RatMatrix;

    fn mul(self, rhs: &RatMatrix) -> RatMatrix {
        self.checked_mul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &RatMatrix {
    type Output = RatMatrix;

    fn add(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum dimension mismatch");
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &RatMatrix {
    type Output = RatMatrix;

    fn sub(self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference dimension mismatch");
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &RatMatrix {
    type Output = RatMatrix;

    fn neg(self) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| -v).collect(),
        }
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            f.write_str("[")?;
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("]")?;
            if i + 1 < self.rows {
                f.write_str("\n")?;
            }
        }
        Ok(())
    }
}
