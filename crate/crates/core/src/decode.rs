//! Ground-truth decodability and the exact linear decoder.
//!
//! A failure pattern is decodable iff every output block's expansion lies in
//! the rational span of the surviving nodes' expansions. Rank and solve are
//! exact; no floating point enters either test.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::bilinear::{CTarget, ExpansionVector};
use crate::error::{Error, Result};
use crate::exact;
use crate::matrix::{Element, Matrix};
use crate::scheme::{check_tractable, FailurePattern, Scheme};

fn as_row(v: &ExpansionVector) -> Vec<i64> {
    v.coeffs().iter().map(|&c| i64::from(c)).collect()
}

fn spans_targets(available: &[Vec<i64>]) -> bool {
    let base = exact::rank(available);
    let mut with_targets = available.to_vec();
    with_targets.extend(CTarget::ALL.iter().map(|t| as_row(&t.expansion())));
    exact::rank(&with_targets) == base
}

/// Exact rational-span test for one failure pattern.
pub fn is_decodable(scheme: &Scheme, pattern: FailurePattern) -> bool {
    let rows: Vec<Vec<i64>> = pattern.survivors(scheme.m()).map(|i| as_row(&scheme.terms[i].expand())).collect();
    spans_targets(&rows)
}

/// Precomputed decodability for every failure pattern of a scheme.
///
/// Nodes whose expansions agree up to sign contribute the same direction, so
/// the table is indexed by the set of surviving distinct directions.
#[derive(Clone, Debug)]
pub struct DecodabilityTable {
    m: usize,
    class_of: Vec<usize>,
    decodable: Vec<bool>,
}

impl DecodabilityTable {
    pub fn new(scheme: &Scheme) -> Result<Self> {
        let m = scheme.m();
        check_tractable("decodability table", m)?;
        let mut reps: Vec<ExpansionVector> = Vec::new();
        let mut index: HashMap<ExpansionVector, usize> = HashMap::new();
        let class_of = scheme
            .expansions()
            .into_iter()
            .map(|v| {
                let key = if v.coeffs().iter().find(|&&c| c != 0).copied().unwrap_or(1) < 0 { -v } else { v };
                *index.entry(key).or_insert_with(|| {
                    reps.push(key);
                    reps.len() - 1
                })
            })
            .collect();
        let rows: Vec<Vec<i64>> = reps.iter().map(as_row).collect();
        let decodable = (0..1usize << reps.len())
            .into_par_iter()
            .map(|mask| {
                let avail: Vec<Vec<i64>> =
                    rows.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, r)| r.clone()).collect();
                spans_targets(&avail)
            })
            .collect();
        Ok(Self { m, class_of, decodable })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn distinct_directions(&self) -> usize {
        self.decodable.len().trailing_zeros() as usize
    }

    pub fn is_decodable(&self, pattern: FailurePattern) -> bool {
        let mask = pattern.survivors(self.m).fold(0usize, |acc, i| acc | 1 << self.class_of[i]);
        self.decodable[mask]
    }
}

/// Undecodable-pattern counts grouped by the number of failed nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Census {
    pub scheme: String,
    pub m: usize,
    /// `undecodable[k]` = number of undecodable `k`-subsets, `k = 0..=m`.
    pub undecodable: Vec<u64>,
}

impl Census {
    pub fn total_patterns(&self, k: usize) -> u64 {
        binomial(self.m as u64, k as u64)
    }
}

/// CSV: `scheme,k,total_patterns,undecodable_count`.
pub fn write_census_csv<W: std::io::Write>(w: W, censuses: &[Census]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["scheme", "k", "total_patterns", "undecodable_count"])?;
    for c in censuses {
        for (k, u) in c.undecodable.iter().enumerate() {
            out.write_record([c.scheme.clone(), k.to_string(), c.total_patterns(k).to_string(), u.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Exhaustive census over all `2^M` failure patterns.
pub fn decodable_pattern_census(scheme: &Scheme) -> Result<Census> {
    let table = DecodabilityTable::new(scheme)?;
    Ok(census_from_table(&scheme.id, &table))
}

pub fn census_from_table(id: &str, table: &DecodabilityTable) -> Census {
    let m = table.m();
    let chunk = 1u32 << m.saturating_sub(6);
    let undecodable = (0..(1u32 << m).div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; m + 1];
            let lo = c * chunk;
            let hi = (lo + chunk).min(1u32 << m);
            for p in lo..hi {
                let pattern = FailurePattern(p);
                if !table.is_decodable(pattern) {
                    counts[pattern.count()] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; m + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Census { scheme: id.to_string(), m, undecodable }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Rational coefficients over node indices producing one output block.
pub type DecodeCoefficients = Vec<(usize, BigRational)>;

/// Solves for each output block as a rational combination of survivors.
/// `None` when the pattern is undecodable.
pub fn decode_coefficients(scheme: &Scheme, pattern: FailurePattern) -> Option<[DecodeCoefficients; 4]> {
    let survivors: Vec<usize> = pattern.survivors(scheme.m()).collect();
    let columns: Vec<Vec<i64>> = survivors.iter().map(|&i| as_row(&scheme.terms[i].expand())).collect();
    let mut out: [DecodeCoefficients; 4] = Default::default();
    for (slot, t) in out.iter_mut().zip(CTarget::ALL) {
        let x = exact::solve(&columns, &as_row(&t.expansion()))?;
        *slot = survivors.iter().copied().zip(x).filter(|(_, c)| !c.is_zero()).collect();
    }
    Some(out)
}

/// Applies decode coefficients to node results.
pub fn apply_coefficients<T: Element>(
    coeffs: &[DecodeCoefficients; 4],
    values: &[Option<Matrix<T>>],
    shape: (usize, usize),
) -> Result<[Matrix<T>; 4]> {
    let block = |c: &DecodeCoefficients| -> Result<Matrix<T>> {
        if c.is_empty() {
            return Ok(Matrix::zeros(shape.0, shape.1));
        }
        let mats = c
            .iter()
            .map(|(i, _)| {
                values[*i].as_ref().ok_or_else(|| Error::InvalidArgument(format!("missing value for node {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let ws: Vec<BigRational> = c.iter().map(|(_, w)| w.clone()).collect();
        T::combine_rational(&ws, &mats)
    };
    Ok([block(&coeffs[0])?, block(&coeffs[1])?, block(&coeffs[2])?, block(&coeffs[3])?])
}

pub(crate) fn check_values<T: Element>(
    scheme: &Scheme,
    pattern: FailurePattern,
    values: &[Option<Matrix<T>>],
) -> Result<(usize, usize)> {
    if values.len() != scheme.m() {
        return Err(Error::InvalidArgument(format!("{} values for {} nodes", values.len(), scheme.m())));
    }
    let mut shape = None;
    for (i, v) in values.iter().enumerate() {
        match (pattern.contains(i), v) {
            (false, None) => {
                return Err(Error::InvalidArgument(format!(
                    "missing value for surviving node {}",
                    scheme.terms[i].name()
                )))
            }
            (true, Some(_)) => {
                return Err(Error::InvalidArgument(format!(
                    "value supplied for failed node {}",
                    scheme.terms[i].name()
                )))
            }
            (false, Some(m)) => match shape {
                None => shape = Some(m.shape()),
                Some(s) if s != m.shape() => {
                    return Err(Error::DimensionMismatch(format!("node results {s:?} vs {:?}", m.shape())))
                }
                _ => {}
            },
            (true, None) => {}
        }
    }
    shape.ok_or_else(|| Error::InvalidArgument("no surviving node values".into()))
}

/// Exact linear decoder. Returns the four C blocks when decodable.
pub fn linear_decode<T: Element>(
    scheme: &Scheme,
    pattern: FailurePattern,
    values: &[Option<Matrix<T>>],
) -> Result<Option<[Matrix<T>; 4]>> {
    if !pattern.is_valid_for(scheme.m()) {
        return Err(Error::InvalidArgument(format!("pattern {} out of range", pattern.hex())));
    }
    if pattern.count() == scheme.m() {
        return Ok(None);
    }
    let shape = check_values(scheme, pattern, values)?;
    let Some(coeffs) = decode_coefficients(scheme, pattern) else {
        return Ok(None);
    };
    apply_coefficients(&coeffs, values, shape).map(Some)
}
