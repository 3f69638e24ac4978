//! JSON documents for flags and line tuples.
//!
//! Flag document:
//!
//! ```json
//! {"ambient_n": 5, "m": 4,
//!  "spaces": [{"dim": 1, "rows": 10, "basis": [re, im, re, im, ...]}, ...]}
//! ```
//!
//! `basis` is the `rows × dim` orthonormal basis matrix in row-major order
//! with real and imaginary parts interleaved.
//!
//! Line tuple document: a bare array with one `[re α, im α, re β, im β]`
//! entry per line.
//!
//! Numbers are written with 17 significant digits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::flagside::Flag;
use crate::sphereside::{Line, LineTuple};
use crate::subspace::{CMat, Subspace};

fn number(x: f64) -> Result<Box<RawValue>> {
    if !x.is_finite() {
        return Err(Error::Format(format!("non-finite number {x}")));
    }
    RawValue::from_string(format!("{x:.16e}")).map_err(|e| Error::Format(e.to_string()))
}

#[derive(Serialize)]
struct SpaceOut {
    dim: usize,
    rows: usize,
    basis: Vec<Box<RawValue>>,
}

#[derive(Serialize)]
struct FlagOut {
    ambient_n: usize,
    m: usize,
    spaces: Vec<SpaceOut>,
}

#[derive(Deserialize)]
struct SpaceIn {
    dim: usize,
    rows: usize,
    basis: Vec<f64>,
}

#[derive(Deserialize)]
struct FlagIn {
    ambient_n: usize,
    m: usize,
    spaces: Vec<SpaceIn>,
}

/// A flag read from disk together with its declared `N`.
#[derive(Debug, Clone)]
pub struct FlagDocument {
    pub ambient_n: usize,
    pub flag: Flag,
}

pub fn flag_to_json(flag: &Flag) -> Result<String> {
    let mut spaces = Vec::with_capacity(flag.len());
    for s in flag.spaces() {
        let b = s.basis();
        let mut basis = Vec::with_capacity(2 * b.nrows() * b.ncols());
        for r in 0..b.nrows() {
            for c in 0..b.ncols() {
                basis.push(number(b[(r, c)].re)?);
                basis.push(number(b[(r, c)].im)?);
            }
        }
        spaces.push(SpaceOut { dim: s.dim(), rows: b.nrows(), basis });
    }
    let doc = FlagOut { ambient_n: flag.ambient_dim() / 2, m: flag.len(), spaces };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))
}

pub fn flag_from_json(text: &str) -> Result<FlagDocument> {
    let doc: FlagIn = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if doc.spaces.len() != doc.m {
        return Err(Error::Format(format!("m = {} but {} spaces given", doc.m, doc.spaces.len())));
    }
    let ambient = 2 * doc.ambient_n;
    let mut spaces = Vec::with_capacity(doc.m);
    for (idx, s) in doc.spaces.iter().enumerate() {
        if s.rows != ambient || s.basis.len() != 2 * s.rows * s.dim {
            return Err(Error::Format(format!("space {} has inconsistent shape", idx + 1)));
        }
        let basis = CMat::from_fn(s.rows, s.dim, |r, c| {
            let k = 2 * (r * s.dim + c);
            Complex64::new(s.basis[k], s.basis[k + 1])
        });
        spaces.push(Subspace::from_basis(basis)?);
    }
    Ok(FlagDocument { ambient_n: doc.ambient_n, flag: Flag::new(ambient, spaces)? })
}

pub fn tuple_to_json(t: &LineTuple) -> Result<String> {
    let mut rows = Vec::with_capacity(t.len());
    for l in &t.0 {
        let r = l.rep();
        rows.push(vec![number(r[0].re)?, number(r[0].im)?, number(r[1].re)?, number(r[1].im)?]);
    }
    serde_json::to_string_pretty(&rows).map_err(|e| Error::Format(e.to_string()))
}

pub fn tuple_from_json(text: &str) -> Result<LineTuple> {
    let rows: Vec<[f64; 4]> = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    rows.iter()
        .map(|r| Line::new(Complex64::new(r[0], r[1]), Complex64::new(r[2], r[3])))
        .collect::<Result<Vec<_>>>()
        .map(LineTuple)
}
