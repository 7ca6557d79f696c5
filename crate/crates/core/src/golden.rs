//! Reference-value records of the form `function,input(s),expected,abs_tol`
//! (one per line, `#` starts a comment), and a checker that evaluates them
//! against this crate's special functions.

use crate::error::{Error, Result};
use crate::specfun::{self, Tolerance};

/// Special-function reference values shipped with the crate.
pub const SPECFUN_GOLDEN: &str = include_str!("../golden/specfun.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenRecord {
    pub function: String,
    pub inputs: Vec<f64>,
    pub expected: f64,
    pub abs_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenOutcome {
    pub record: GoldenRecord,
    pub computed: f64,
    pub abs_error: f64,
    pub passed: bool,
}

pub fn parse(text: &str) -> Result<Vec<GoldenRecord>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 4 {
            return Err(Error::Precondition(format!(
                "golden line {}: expected at least 4 fields",
                lineno + 1
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| {
                Error::Precondition(format!("golden line {}: bad number `{s}`", lineno + 1))
            })
        };
        let n = fields.len();
        out.push(GoldenRecord {
            function: fields[0].to_string(),
            inputs: fields[1..n - 2].iter().map(|s| num(s)).collect::<Result<_>>()?,
            expected: num(fields[n - 2])?,
            abs_tol: num(fields[n - 1])?,
        });
    }
    Ok(out)
}

/// Evaluates one record; unknown function names are a precondition error.
pub fn evaluate(record: &GoldenRecord) -> Result<f64> {
    let tol = Tolerance {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        ..Tolerance::default()
    };
    let arity = |n: usize| -> Result<()> {
        if record.inputs.len() == n {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "{} takes {n} inputs, record has {}",
                record.function,
                record.inputs.len()
            )))
        }
    };
    let x = &record.inputs;
    match record.function.as_str() {
        "bessel_j0" => {
            arity(1)?;
            specfun::bessel_j0(x[0])
        }
        "marcum_q1" => {
            arity(2)?;
            specfun::marcum_q1(x[0], x[1], &tol)
        }
        "varrho" => {
            arity(1)?;
            specfun::varrho(x[0])
        }
        "marcum_q1_lower_bound" => {
            arity(3)?;
            specfun::marcum_q1_lower_bound(x[0], x[1], x[2])
        }
        "upper_incomplete_gamma_zero" => {
            arity(1)?;
            specfun::upper_incomplete_gamma_zero(x[0])
        }
        other => Err(Error::Precondition(format!("unknown golden function `{other}`"))),
    }
}

pub fn check_all(records: &[GoldenRecord]) -> Vec<GoldenOutcome> {
    records
        .iter()
        .map(|r| {
            let computed = evaluate(r).unwrap_or(f64::NAN);
            let abs_error = (computed - r.expected).abs();
            GoldenOutcome {
                record: r.clone(),
                computed,
                abs_error,
                passed: abs_error <= r.abs_tol,
            }
        })
        .collect()
}
