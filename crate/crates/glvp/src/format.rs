//! JSON file formats.
//!
//! Rationals are written as bare JSON integers when integral and as
//! `"p/q"` strings otherwise. Systems are printed with a fixed layout, one
//! matrix row per line, so that printing is deterministic and a printed
//! file parses back to the same data.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use glvp_core::rational::{BigInt, Rational};
use glvp_core::{GlvSystem, GlvpFactorization, RatMatrix};
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

/// A rational that serializes as an integer or a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JsonRational(pub Rational);

impl Serialize for JsonRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let q = &self.0;
        if q.denom().is_one() {
            if let Some(v) = q.numer().to_i64() {
                return s.serialize_i64(v);
            }
        }
        s.serialize_str(&q.to_string())
    }
}

impl<'de> Deserialize<'de> for JsonRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RationalVisitor;

        impl Visitor<'_> for RationalVisitor {
            type Value = JsonRational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational: an integer or a \"p/q\" string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(JsonRational(Rational::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(JsonRational(Rational::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Err(E::custom(format!(
                    "{v} is not exact; write rationals as integers or \"p/q\" strings"
                )))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                parse_rational(v).map(JsonRational).map_err(E::custom)
            }
        }

        d.deserialize_any(RationalVisitor)
    }
}

/// Parses `"p"` or `"p/q"` with optional surrounding whitespace.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let bad = || format!("invalid rational {s:?}");
    match s.split_once('/') {
        Some((p, q)) => {
            let p = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Comma-separated rationals, e.g. `1,3/2,-2`.
pub fn parse_rational_list(s: &str) -> Result<Vec<Rational>, String> {
    s.split(',').map(parse_rational).collect()
}

pub fn to_json_rows(m: &RatMatrix) -> Vec<Vec<JsonRational>> {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(JsonRational).collect())
        .collect()
}

pub fn to_json_vec(v: &[Rational]) -> Vec<JsonRational> {
    v.iter().cloned().map(JsonRational).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorizationFile {
    #[serde(rename = "K")]
    pub k: Vec<Vec<JsonRational>>,
    #[serde(rename = "D_diag")]
    pub d_diag: Vec<JsonRational>,
    #[serde(rename = "L")]
    pub l: Vec<JsonRational>,
}

/// On-disk form of a GLV system with an optional GLVP certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub lambda: Vec<JsonRational>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<JsonRational>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<JsonRational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factorization: Option<FactorizationFile>,
}

fn matrix_field(
    field: &str,
    rows: &[Vec<JsonRational>],
    expect_rows: usize,
    expect_cols: usize,
) -> Result<RatMatrix, CliError> {
    if rows.len() != expect_rows {
        return Err(CliError::field(
            field,
            format!("has {} rows, expected {expect_rows}", rows.len()),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != expect_cols {
            return Err(CliError::field(
                &format!("{field}[{i}]"),
                format!("has {} entries, expected {expect_cols}", row.len()),
            ));
        }
    }
    let data = rows.iter().flatten().map(|q| q.0.clone()).collect();
    Ok(RatMatrix::from_row_major(expect_rows, expect_cols, data).expect("shape checked"))
}

fn vector_field(field: &str, v: &[JsonRational], expect: usize) -> Result<Vec<Rational>, CliError> {
    if v.len() != expect {
        return Err(CliError::field(
            field,
            format!("has {} entries, expected {expect}", v.len()),
        ));
    }
    Ok(v.iter().map(|q| q.0.clone()).collect())
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<SystemFile, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Input(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &std::path::Path) -> Result<SystemFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_system(sys: &GlvSystem, f: Option<&GlvpFactorization>) -> SystemFile {
        SystemFile {
            name: sys.name().to_string(),
            n: sys.n(),
            m: sys.m(),
            lambda: to_json_vec(&sys.lambda_vec()),
            a: to_json_rows(sys.a()),
            b: to_json_rows(sys.b()),
            factorization: f.map(|f| FactorizationFile {
                k: to_json_rows(&f.k),
                d_diag: to_json_vec(&f.d_diag),
                l: to_json_vec(&f.l_vec()),
            }),
        }
    }

    /// Validates dimensions and builds the system and optional certificate.
    pub fn to_system(&self) -> Result<(GlvSystem, Option<GlvpFactorization>), CliError> {
        let (n, m) = (self.n, self.m);
        if n == 0 {
            return Err(CliError::field("n", "must be at least 1".into()));
        }
        let lambda = vector_field("lambda", &self.lambda, n)?;
        let a = matrix_field("A", &self.a, n, m)?;
        let b = matrix_field("B", &self.b, m, n)?;
        let sys = GlvSystem::new(self.name.clone(), b, a, RatMatrix::column(lambda))
            .map_err(|e| CliError::Input(e.to_string()))?;
        let f = match &self.factorization {
            None => None,
            Some(file) => {
                let k = matrix_field("factorization.K", &file.k, n, n)?;
                let d = vector_field("factorization.D_diag", &file.d_diag, m)?;
                let l = vector_field("factorization.L", &file.l, n)?;
                Some(GlvpFactorization::new(k, d, RatMatrix::column(l)))
            }
        };
        Ok((sys, f))
    }

    /// Deterministic pretty form: two-space indent, one matrix row per line.
    pub fn to_json_string(&self) -> String {
        let mut out = String::from("{\n");
        let name = serde_json::to_string(&self.name).expect("strings serialize");
        writeln!(out, "  \"name\": {name},").unwrap();
        writeln!(out, "  \"n\": {},", self.n).unwrap();
        writeln!(out, "  \"m\": {},", self.m).unwrap();
        writeln!(out, "  \"lambda\": {},", inline_vec(&self.lambda)).unwrap();
        write_matrix(&mut out, "A", &self.a, 1);
        out.push_str(",\n");
        write_matrix(&mut out, "B", &self.b, 1);
        if let Some(f) = &self.factorization {
            out.push_str(",\n  \"factorization\": {\n");
            write_matrix(&mut out, "K", &f.k, 2);
            out.push_str(",\n");
            writeln!(out, "    \"D_diag\": {},", inline_vec(&f.d_diag)).unwrap();
            writeln!(out, "    \"L\": {}", inline_vec(&f.l)).unwrap();
            out.push_str("  }");
        }
        out.push_str("\n}\n");
        out
    }
}

impl FromStr for SystemFile {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

fn inline_vec(v: &[JsonRational]) -> String {
    let parts: Vec<String> = v
        .iter()
        .map(|q| serde_json::to_string(q).expect("rationals serialize"))
        .collect();
    format!("[{}]", parts.join(", "))
}

fn write_matrix(out: &mut String, key: &str, rows: &[Vec<JsonRational>], depth: usize) {
    let pad = "  ".repeat(depth);
    if rows.is_empty() {
        write!(out, "{pad}\"{key}\": []").unwrap();
        return;
    }
    writeln!(out, "{pad}\"{key}\": [").unwrap();
    for (i, row) in rows.iter().enumerate() {
        let sep = if i + 1 < rows.len() { "," } else { "" };
        writeln!(out, "{pad}  {}{sep}", inline_vec(row)).unwrap();
    }
    write!(out, "{pad}]").unwrap();
}

/// A QMT matrix file: either a bare JSON matrix or `{"C": matrix}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Bare(Vec<Vec<JsonRational>>),
    Keyed {
        #[serde(rename = "C")]
        c: Vec<Vec<JsonRational>>,
    },
}

pub fn parse_matrix(text: &str, field: &str) -> Result<RatMatrix, CliError> {
    let rows = match serde_json::from_str::<MatrixFile>(text) {
        Ok(MatrixFile::Bare(rows)) | Ok(MatrixFile::Keyed { c: rows }) => rows,
        Err(e) => {
            return Err(CliError::Input(format!(
                "{field}: expected a matrix of rationals or {{\"C\": matrix}}: {e}"
            )))
        }
    };
    let cols = rows.first().map_or(0, Vec::len);
    matrix_field(field, &rows, rows.len(), cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use glvp_core::rational::{int, rat};

    #[test]
    fn rationals_serialize_compactly() {
        let json = serde_json::to_string(&vec![
            JsonRational(int(3)),
            JsonRational(rat(-1, 2)),
            JsonRational(int(0)),
        ])
        .unwrap();
        assert_eq!(json, r#"[3,"-1/2",0]"#);
    }

    #[test]
    fn rationals_parse_from_integers_and_strings() {
        let v: Vec<JsonRational> = serde_json::from_str(r#"[4, "6/4", "-7", " 1 / 3 "]"#).unwrap();
        assert_eq!(
            v.into_iter().map(|q| q.0).collect::<Vec<_>>(),
            vec![int(4), rat(3, 2), int(-7), rat(1, 3)]
        );
        assert!(serde_json::from_str::<JsonRational>("0.5").is_err());
        assert!(serde_json::from_str::<JsonRational>(r#""1/0""#).is_err());
        assert!(serde_json::from_str::<JsonRational>(r#""x""#).is_err());
    }

    #[test]
    fn huge_integers_fall_back_to_strings() {
        let big = Rational::from_integer("123456789012345678901234567890".parse().unwrap());
        let s = serde_json::to_string(&JsonRational(big.clone())).unwrap();
        assert_eq!(s, r#""123456789012345678901234567890""#);
        assert_eq!(serde_json::from_str::<JsonRational>(&s).unwrap().0, big);
    }

    #[test]
    fn parse_errors_name_line_and_field() {
        let err = SystemFile::parse("{\n  \"name\": \"x\",\n  \"n\": true\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");

        let text = r#"{"name": "x", "n": 2, "m": 2, "lambda": [1, 2],
            "A": [[0, 1], [1]], "B": [[1, 0], [0, 1]]}"#;
        let err = SystemFile::parse(text).unwrap().to_system().unwrap_err();
        assert!(err.to_string().contains("A[1]"), "{err}");

        let text = r#"{"name": "x", "n": 2, "m": 2, "lambda": [1, 2],
            "A": [[0, 1], [1, 0]], "B": [[1, 2], [2, 4]]}"#;
        let err = SystemFile::parse(text).unwrap().to_system().unwrap_err();
        assert!(err.to_string().contains("B not maximal rank"), "{err}");

        let err = SystemFile::parse(r#"{"name": "x", "extra": 1}"#).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn printed_layout() {
        let text = r#"{"name": "pp", "n": 2, "m": 2, "lambda": [1, -1],
            "A": [[0, "-1/2"], [1, 0]], "B": [[1, 0], [0, 1]]}"#;
        let file = SystemFile::parse(text).unwrap();
        let expected = "{\n  \"name\": \"pp\",\n  \"n\": 2,\n  \"m\": 2,\n  \"lambda\": [1, -1],\n  \"A\": [\n    [0, \"-1/2\"],\n    [1, 0]\n  ],\n  \"B\": [\n    [1, 0],\n    [0, 1]\n  ]\n}\n";
        assert_eq!(file.to_json_string(), expected);
        assert_eq!(SystemFile::parse(expected).unwrap(), file);
    }

    #[test]
    fn matrices_load_bare_or_keyed() {
        let bare = parse_matrix("[[1, 0], [0, \"1/2\"]]", "C").unwrap();
        let keyed = parse_matrix(r#"{"C": [[1, 0], [0, "1/2"]]}"#, "C").unwrap();
        assert_eq!(bare, keyed);
        assert!(parse_matrix("[[1, 0], [0]]", "C").is_err());
    }
}
