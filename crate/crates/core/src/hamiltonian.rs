//! Symbolic first integrals with exact coefficients.
//!
//! In the positive-orthant chart a Hamiltonian reads
//! `H(x) = Σᵢ cᵢ Πₖ xₖ^bᵢₖ + Σⱼ Lⱼ ln xⱼ`; in the log chart `y = ln x` the
//! same data reads `H(y) = Σᵢ cᵢ exp⟨bᵢ, y⟩ + ⟨L, y⟩`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

// Inherent f64 methods shadow these when a dependency links std.
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::glv::exact_quasimonomials;
use crate::rational::{to_f64, Rational};
use crate::ratmat::RatMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Chart {
    PositiveOrthant,
    Log,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialTerm {
    pub coefficient: Rational,
    pub exponents: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HamiltonianExpr {
    pub chart: Chart,
    pub terms: Vec<MonomialTerm>,
    /// Coefficients of `ln xⱼ` (positive-orthant chart) or `yⱼ` (log chart).
    pub linear: Vec<Rational>,
}

/// A Casimir `φ_N = Σⱼ Nⱼ ln xⱼ`, equivalently `Πⱼ xⱼ^Nⱼ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Casimir {
    pub exponents: Vec<Rational>,
}

impl HamiltonianExpr {
    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    /// Log-chart image under `y = ln x`; identity if already in the log chart.
    pub fn to_log_chart(&self) -> HamiltonianExpr {
        HamiltonianExpr {
            chart: Chart::Log,
            ..self.clone()
        }
    }

    /// Rewrites `H` in new coordinates `z` related by `ln x = T·ln z`
    /// (positive-orthant chart, a QMT with matrix `T`) or `y = T·z` (log
    /// chart). Exponent rows and the linear part both map by `Tᵀ`.
    pub fn substitute(&self, t: &RatMatrix) -> Result<HamiltonianExpr> {
        if t.rows() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "coordinate substitution",
                expected: self.dim(),
                found: t.rows(),
            });
        }
        let tt = t.transpose();
        Ok(HamiltonianExpr {
            chart: self.chart,
            terms: self
                .terms
                .iter()
                .map(|term| MonomialTerm {
                    coefficient: term.coefficient.clone(),
                    exponents: tt.mul_vec(&term.exponents),
                })
                .collect(),
            linear: tt.mul_vec(&self.linear),
        })
    }

    fn exponent_sums(&self, coords: &[f64]) -> Vec<f64> {
        let logs: Vec<f64> = match self.chart {
            Chart::PositiveOrthant => coords.iter().map(|v| v.ln()).collect(),
            Chart::Log => coords.to_vec(),
        };
        self.terms
            .iter()
            .map(|t| {
                t.exponents
                    .iter()
                    .zip(&logs)
                    .map(|(b, l)| to_f64(b) * l)
                    .sum::<f64>()
            })
            .collect()
    }

    pub fn eval(&self, coords: &[f64]) -> f64 {
        assert_eq!(coords.len(), self.dim(), "coordinate dimension mismatch");
        let sums = self.exponent_sums(coords);
        let monomials: f64 = self
            .terms
            .iter()
            .zip(&sums)
            .map(|(t, s)| to_f64(&t.coefficient) * s.exp())
            .sum();
        let linear: f64 = self
            .linear
            .iter()
            .zip(coords)
            .map(|(l, c)| match self.chart {
                Chart::PositiveOrthant => to_f64(l) * c.ln(),
                Chart::Log => to_f64(l) * c,
            })
            .sum();
        monomials + linear
    }

    /// Closed-form gradient in the expression's own chart.
    pub fn gradient(&self, coords: &[f64]) -> Vec<f64> {
        assert_eq!(coords.len(), self.dim(), "coordinate dimension mismatch");
        let sums = self.exponent_sums(coords);
        let mut grad: Vec<f64> = match self.chart {
            Chart::PositiveOrthant => self
                .linear
                .iter()
                .zip(coords)
                .map(|(l, x)| to_f64(l) / x)
                .collect(),
            Chart::Log => self.linear.iter().map(to_f64).collect(),
        };
        for (t, s) in self.terms.iter().zip(&sums) {
            let value = to_f64(&t.coefficient) * s.exp();
            for (j, b) in t.exponents.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                grad[j] += match self.chart {
                    Chart::PositiveOrthant => value * to_f64(b) / coords[j],
                    Chart::Log => value * to_f64(b),
                };
            }
        }
        grad
    }

    /// Exact gradient at a positive rational point (positive-orthant chart,
    /// integer exponents).
    pub fn gradient_exact(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if self.chart != Chart::PositiveOrthant {
            return Err(Error::ChartMismatch);
        }
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "state vector",
                expected: self.dim(),
                found: x.len(),
            });
        }
        let exps = RatMatrix::from_rows(self.terms.iter().map(|t| t.exponents.clone()).collect())?;
        let values = if self.terms.is_empty() {
            Vec::new()
        } else {
            exact_quasimonomials(&exps, x)?
        };
        let mut grad: Vec<Rational> = self.linear.iter().zip(x).map(|(l, xj)| l / xj).collect();
        for (t, q) in self.terms.iter().zip(&values) {
            let value = &t.coefficient * q;
            for (j, b) in t.exponents.iter().enumerate() {
                if !b.is_zero() {
                    grad[j] += &value * b / &x[j];
                }
            }
        }
        Ok(grad)
    }
}

impl Casimir {
    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// `Σ Nⱼ ln xⱼ` in the positive-orthant chart, `Σ Nⱼ yⱼ` in the log chart.
    pub fn eval(&self, coords: &[f64], chart: Chart) -> f64 {
        self.exponents
            .iter()
            .zip(coords)
            .map(|(n, c)| match chart {
                Chart::PositiveOrthant => to_f64(n) * c.ln(),
                Chart::Log => to_f64(n) * c,
            })
            .sum()
    }

    /// `∇φ_N = (Nⱼ / xⱼ)`, exactly.
    pub fn gradient_exact(&self, x: &[Rational]) -> Vec<Rational> {
        self.exponents.iter().zip(x).map(|(n, xj)| n / xj).collect()
    }
}

fn variable(chart: Chart, j: usize) -> String {
    match chart {
        Chart::PositiveOrthant => format!("x{}", j + 1),
        Chart::Log => format!("y{}", j + 1),
    }
}

fn write_signed(f: &mut fmt::Formatter<'_>, first: bool, c: &Rational, body: &str) -> fmt::Result {
    let negative = c.is_negative();
    let magnitude = c.abs();
    match (first, negative) {
        (true, true) => f.write_str("-")?,
        (true, false) => {}
        (false, true) => f.write_str(" - ")?,
        (false, false) => f.write_str(" + ")?,
    }
    if body.is_empty() {
        write!(f, "{magnitude}")
    } else if magnitude.is_one() {
        f.write_str(body)
    } else {
        write!(f, "{magnitude}*{body}")
    }
}

impl fmt::Display for HamiltonianExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for t in &self.terms {
            if t.coefficient.is_zero() {
                continue;
            }
            let body = match self.chart {
                Chart::PositiveOrthant => {
                    let factors: Vec<String> = t
                        .exponents
                        .iter()
                        .enumerate()
                        .filter(|(_, e)| !e.is_zero())
                        .map(|(j, e)| {
                            if e.is_one() {
                                variable(self.chart, j)
                            } else {
                                format!("{}^({e})", variable(self.chart, j))
                            }
                        })
                        .collect();
                    factors.join("*")
                }
                Chart::Log => {
                    let mut s = String::new();
                    for (j, e) in t.exponents.iter().enumerate().filter(|(_, e)| !e.is_zero()) {
                        let sign = if e.is_negative() { "-" } else { "+" };
                        let mag = e.abs();
                        let v = variable(self.chart, j);
                        if s.is_empty() {
                            if e.is_negative() {
                                s.push('-');
                            }
                        } else {
                            s.push_str(sign);
                        }
                        if mag.is_one() {
                            s.push_str(&v);
                        } else {
                            s.push_str(&format!("{mag}*{v}"));
                        }
                    }
                    if s.is_empty() {
                        s.push('0');
                    }
                    format!("exp({s})")
                }
            };
            write_signed(f, first, &t.coefficient, &body)?;
            first = false;
        }
        for (j, l) in self.linear.iter().enumerate() {
            if l.is_zero() {
                continue;
            }
            let body = match self.chart {
                Chart::PositiveOrthant => format!("ln({})", variable(self.chart, j)),
                Chart::Log => variable(self.chart, j),
            };
            write_signed(f, first, l, &body)?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Display for Casimir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, e) in self.exponents.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            if e.is_one() {
                write!(f, "x{}", j + 1)?;
            } else {
                write!(f, "x{}^({e})", j + 1)?;
            }
            first = false;
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}
