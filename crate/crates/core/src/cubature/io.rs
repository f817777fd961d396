//! Rule and rate-study files.
//!
//! A rule is a CSV table with `d+2` columns `x0, …, xd, weight`. A rate study
//! is a CSV table `n, wce` plus a JSON sidecar with the fitted slope.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{CubatureRule, Generator, RateStudy, WeightMode};
use crate::error::{Error, Result};
use crate::kernels::{IsotropicKernel, SpherePoint};
use crate::real::{format_shortest, parse_real, Real};

pub fn write_rule_csv<T: Real, W: Write>(rule: &CubatureRule<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..=rule.dim()).map(|i| format!("x{i}")).collect();
    header.push("weight".into());
    w.write_record(&header)?;
    for (p, wt) in rule.points().iter().zip(rule.weights()) {
        let mut rec: Vec<String> = p.coords().iter().map(|c| format_shortest(*c)).collect();
        rec.push(format_shortest(*wt));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a rule written by [`write_rule_csv`] (or by hand). Points are
/// renormalized; weights are taken as given and tagged [`WeightMode::Equal`]
/// only when they all coincide.
pub fn read_rule_csv<T: Real, R: Read>(input: R) -> Result<CubatureRule<T>> {
    let mut r = csv::Reader::from_reader(input);
    let cols = r.headers()?.len();
    if cols < 3 {
        return Err(Error::Parse(format!(
            "a rule on S^d needs d+2 >= 3 columns, found {cols}"
        )));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|f| {
                parse_real::<T>(f.trim())
                    .ok_or_else(|| Error::Parse(format!("row {row}: bad number {f:?}")))
            })
            .collect::<Result<Vec<T>>>()?;
        let (w, x) = vals.split_last().expect("csv enforces the header width");
        points.push(SpherePoint::new(x.to_vec())?);
        weights.push(*w);
    }
    let mode = if weights.windows(2).all(|p| p[0] == p[1]) {
        WeightMode::Equal
    } else {
        WeightMode::Optimal
    };
    CubatureRule::new(points, weights, Generator::UserSupplied, mode)
}

pub fn write_rate_csv<T: Real, W: Write>(study: &RateStudy<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "wce"])?;
    for r in &study.rows {
        w.write_record([r.n.to_string(), format_shortest(r.wce)])?;
    }
    w.flush()?;
    Ok(())
}

/// Slope metadata stored next to the rate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct RateSidecar<T> {
    pub kernel: IsotropicKernel<T>,
    pub dim: usize,
    pub generator: Generator,
    pub n_grid: Vec<usize>,
    pub slope: T,
    pub intercept: T,
    pub gram_condition: Vec<T>,
    pub jitter_used: Vec<T>,
}

impl<T: Real> RateSidecar<T> {
    pub fn from_study(s: &RateStudy<T>) -> Self {
        Self {
            kernel: s.kernel.clone(),
            dim: s.dim,
            generator: s.generator,
            n_grid: s.rows.iter().map(|r| r.n).collect(),
            slope: s.slope,
            intercept: s.intercept,
            gram_condition: s.rows.iter().map(|r| r.gram_condition).collect(),
            jitter_used: s.rows.iter().map(|r| r.jitter_used).collect(),
        }
    }
}

pub fn write_rate_sidecar<T: Real, W: Write>(study: &RateStudy<T>, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &RateSidecar::from_study(study))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubature::generate_points;

    #[test]
    fn rule_round_trip() {
        let g = Generator::UniformRandom { seed: 7 };
        let pts: Vec<SpherePoint<f64>> = generate_points(g, 5, 3).unwrap();
        let rule =
            CubatureRule::new(pts, vec![0.1, 0.2, 0.3, 0.2, 0.2], g, WeightMode::Optimal).unwrap();
        let mut buf = Vec::new();
        write_rule_csv(&rule, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,x2,x3,weight\n"));
        let back: CubatureRule<f64> = read_rule_csv(&buf[..]).unwrap();
        assert_eq!(back.weights(), rule.weights());
        assert_eq!(back.dim(), 3);
        for (a, b) in back.points().iter().zip(rule.points()) {
            for (x, y) in a.coords().iter().zip(b.coords()) {
                assert!((x - y).abs() < 1e-15);
            }
        }
        assert_eq!(back.weight_mode(), WeightMode::Optimal);
    }

    #[test]
    fn malformed_rules() {
        assert!(read_rule_csv::<f64, _>("x0,weight\n1,1\n".as_bytes()).is_err());
        assert!(read_rule_csv::<f64, _>("x0,x1,x2,weight\n1,0,0,abc\n".as_bytes()).is_err());
        assert!(read_rule_csv::<f64, _>("x0,x1,x2,weight\n1,0,0\n".as_bytes()).is_err());
        assert!(read_rule_csv::<f64, _>("x0,x1,x2,weight\n0,0,0,1\n".as_bytes()).is_err());
    }
}
