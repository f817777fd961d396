//! CSV and JSON export/import of coefficient sequences.
//!
//! CSV columns are `m, b_md, psi_hat_m, provenance, tail_bound`; `psi_hat_m`
//! is empty on the Hilbert sphere and `tail_bound` repeats on every row.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{fourier_from_schoenberg, Dim, Provenance, SchoenbergSequence};
use crate::error::{Error, Result};
use crate::real::{format_shortest, parse_real, Real};

const HEADER: [&str; 5] = ["m", "b_md", "psi_hat_m", "provenance", "tail_bound"];

pub fn write_csv<T: Real, W: Write>(seq: &SchoenbergSequence<T>, out: W) -> Result<()> {
    let fourier = match seq.dim() {
        Dim::Finite(_) => Some(fourier_from_schoenberg(seq)?),
        Dim::Infinite => None,
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    let prov = seq.provenance().to_string();
    let tail = format_shortest(seq.tail_bound());
    for (m, b) in seq.coeffs().iter().enumerate() {
        let psi = fourier
            .as_ref()
            .map(|f| format_shortest(f.coeffs()[m]))
            .unwrap_or_default();
        w.write_record([
            m.to_string(),
            format_shortest(*b),
            psi,
            prov.clone(),
            tail.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_csv`]. Rows must list `m = 0, 1, …` in
/// order; the dimension is not stored in the table and is supplied here.
pub fn read_csv<T: Real, R: Read>(input: R, dim: Dim) -> Result<SchoenbergSequence<T>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().map(str::trim).ne(HEADER) {
        return Err(Error::Parse(format!(
            "expected header {}, found {:?}",
            HEADER.join(","),
            header
        )));
    }
    let mut coeffs = Vec::new();
    let mut provenance = None;
    let mut tail = T::zero();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let m: usize = field(0)
            .parse()
            .map_err(|_| Error::Parse(format!("row {row}: bad m {:?}", field(0))))?;
        if m != row {
            return Err(Error::Parse(format!(
                "row {row}: expected m = {row}, found {m}"
            )));
        }
        let num = |i: usize, name: &str| {
            parse_real::<T>(field(i))
                .ok_or_else(|| Error::Parse(format!("row {row}: bad {name} {:?}", field(i))))
        };
        coeffs.push(num(1, "b_md")?);
        let p: Provenance = field(3).parse()?;
        if *provenance.get_or_insert(p) != p {
            return Err(Error::Parse(format!("row {row}: mixed provenance")));
        }
        tail = num(4, "tail_bound")?;
    }
    let provenance = provenance.ok_or_else(|| Error::Parse("empty coefficient table".into()))?;
    SchoenbergSequence::new(dim, coeffs, tail, provenance)
}

/// JSON form of a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct SequenceRecord<T> {
    pub dim: Dim,
    pub provenance: Provenance,
    pub truncation: usize,
    pub tail_bound: T,
    pub coeffs: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_hat: Option<Vec<T>>,
    #[serde(default)]
    pub mass: Option<T>,
    #[serde(default)]
    pub strictly_positive: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl<T: Real> SequenceRecord<T> {
    pub fn from_sequence(seq: &SchoenbergSequence<T>) -> Result<Self> {
        let psi_hat = match seq.dim() {
            Dim::Finite(_) => Some(fourier_from_schoenberg(seq)?.coeffs().to_vec()),
            Dim::Infinite => None,
        };
        Ok(Self {
            dim: seq.dim(),
            provenance: seq.provenance(),
            truncation: seq.truncation(),
            tail_bound: seq.tail_bound(),
            coeffs: seq.coeffs().to_vec(),
            psi_hat,
            mass: Some(seq.mass()),
            strictly_positive: Some(seq.strictly_positive()),
            notes: seq.notes().to_vec(),
        })
    }

    pub fn into_sequence(self) -> Result<SchoenbergSequence<T>> {
        if self.coeffs.len() != self.truncation + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.truncation + 1,
                found: self.coeffs.len(),
            });
        }
        let seq = SchoenbergSequence::new(self.dim, self.coeffs, self.tail_bound, self.provenance)?;
        Ok(self.notes.into_iter().fold(seq, |s, n| s.with_note(n)))
    }
}

pub fn write_json<T: Real, W: Write>(seq: &SchoenbergSequence<T>, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &SequenceRecord::from_sequence(seq)?)?;
    Ok(())
}

pub fn read_json<T: Real, R: Read>(input: R) -> Result<SchoenbergSequence<T>> {
    serde_json::from_reader::<_, SequenceRecord<T>>(input)?.into_sequence()
}
