//! In-process master/worker simulation.
//!
//! The master partitions `A` and `B`, forms each node's combined inputs,
//! injects failures, collects worker results keyed by node id and decodes.

use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::bilinear::BilinearTerm;
use crate::decode::{linear_decode, DecodabilityTable};
use crate::error::{Error, Result};
use crate::matrix::{Element, FloatMatrix, IntMatrix, Matrix};
use crate::peel::{execute_plan, peel, replay};
use crate::rng::StreamKey;
use crate::scheme::{FailurePattern, Scheme};

/// Relative-error threshold for floating-point verification.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Task<T> {
    pub node: usize,
    pub term: BilinearTerm,
    pub lhs: Matrix<T>,
    pub rhs: Matrix<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WorkerStatus<T> {
    Completed(Matrix<T>),
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkerOutcome<T> {
    pub node: usize,
    pub status: WorkerStatus<T>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Decoder {
    #[default]
    Linear,
    Peel,
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decoder::Linear => "linear",
            Decoder::Peel => "peel",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verification {
    Exact { matches: bool },
    Relative { max_relative_error: f64, tolerance: f64 },
    NotDecoded,
}

impl Verification {
    pub fn passed(&self) -> bool {
        match *self {
            Verification::Exact { matches } => matches,
            Verification::Relative { max_relative_error, tolerance } => max_relative_error <= tolerance,
            Verification::NotDecoded => false,
        }
    }
}

/// Elements the master knows how to verify.
pub trait Verify: Element {
    fn verify(got: &Matrix<Self>, want: &Matrix<Self>) -> Verification;
}

impl Verify for i64 {
    fn verify(got: &IntMatrix, want: &IntMatrix) -> Verification {
        Verification::Exact { matches: got == want }
    }
}

impl Verify for f64 {
    fn verify(got: &FloatMatrix, want: &FloatMatrix) -> Verification {
        Verification::Relative { max_relative_error: got.max_relative_error(want), tolerance: FLOAT_TOLERANCE }
    }
}

/// Wall-clock phases in microseconds. Not part of equality or JSON output.
#[derive(Clone, Copy, Debug, Default)]
pub struct Timings {
    pub encode_us: u128,
    pub compute_us: u128,
    pub decode_us: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub version: u32,
    pub scheme: String,
    pub m: usize,
    pub seed: u64,
    pub p_e: f64,
    pub shape: (usize, usize, usize),
    pub pattern: String,
    pub failed: Vec<String>,
    pub decoded: bool,
    pub decoder: Decoder,
    pub verification: Verification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<Vec<String>>,
    #[serde(skip)]
    pub timings: Timings,
}

impl PartialEq for RunReport {
    fn eq(&self, o: &Self) -> bool {
        self.version == o.version
            && self.scheme == o.scheme
            && self.m == o.m
            && self.seed == o.seed
            && self.p_e.to_bits() == o.p_e.to_bits()
            && self.shape == o.shape
            && self.pattern == o.pattern
            && self.failed == o.failed
            && self.decoded == o.decoded
            && self.decoder == o.decoder
            && self.verification == o.verification
            && self.plan == o.plan
    }
}

impl RunReport {
    /// Decoded and verified.
    pub fn succeeded(&self) -> bool {
        self.decoded && self.verification.passed()
    }
}

/// One task per scheme term, inputs already combined by the master.
pub fn encode_tasks<T: Element>(scheme: &Scheme, a: &Matrix<T>, b: &Matrix<T>) -> Result<Vec<Task<T>>> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (pa, pb) = (a.partition()?, b.partition()?);
    scheme
        .terms
        .iter()
        .enumerate()
        .map(|(node, term)| Ok(Task { node, term: term.clone(), lhs: term.a.combine(&pa)?, rhs: term.b.combine(&pb)? }))
        .collect()
}

fn check_p_e(p_e: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p_e) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("p_e = {p_e} outside [0, 1]")))
    }
}

/// Runs the surviving tasks in a seeded shuffled order; results are keyed by
/// node id so the order never affects the outcome.
pub fn execute<T: Element>(tasks: &[Task<T>], pattern: FailurePattern, order_key: &StreamKey) -> Vec<WorkerOutcome<T>> {
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.shuffle(&mut order_key.trial_rng(0));
    let mut done: Vec<WorkerOutcome<T>> = order
        .par_iter()
        .map(|&i| {
            let t = &tasks[i];
            let status = if pattern.contains(t.node) {
                WorkerStatus::Failed
            } else {
                WorkerStatus::Completed(t.lhs.naive_mul(&t.rhs).expect("encoder emits compatible blocks"))
            };
            WorkerOutcome { node: t.node, status }
        })
        .collect();
    done.sort_by_key(|o| o.node);
    done
}

struct Outcome<T> {
    blocks: Option<[Matrix<T>; 4]>,
    plan: Option<Vec<String>>,
}

fn decode<T: Element>(
    scheme: &Scheme,
    pattern: FailurePattern,
    values: &[Option<Matrix<T>>],
    decoder: Decoder,
) -> Result<Outcome<T>> {
    match decoder {
        Decoder::Linear => Ok(Outcome { blocks: linear_decode(scheme, pattern, values)?, plan: None }),
        Decoder::Peel => match peel(scheme, pattern)? {
            None => Ok(Outcome { blocks: None, plan: None }),
            Some(plan) => {
                replay(scheme, pattern, &plan)?;
                let blocks = execute_plan(scheme, &plan, values)?;
                Ok(Outcome { blocks: Some(blocks), plan: Some(plan.describe(scheme)) })
            }
        },
    }
}

/// One end-to-end multiplication under a given failure pattern.
pub fn run_with_pattern<T: Verify>(
    scheme: &Scheme,
    a: &Matrix<T>,
    b: &Matrix<T>,
    pattern: FailurePattern,
    p_e: f64,
    seed: u64,
    decoder: Decoder,
) -> Result<RunReport> {
    check_p_e(p_e)?;
    if !pattern.is_valid_for(scheme.m()) {
        return Err(Error::InvalidArgument(format!("pattern {} out of range", pattern.hex())));
    }
    if decoder == Decoder::Peel && scheme.relations.is_none() {
        return Err(Error::InvalidArgument("peel decoder needs a scheme with relations attached".into()));
    }
    let key = StreamKey::new(seed, &scheme.id, p_e);

    let t0 = Instant::now();
    let tasks = encode_tasks(scheme, a, b)?;
    let t1 = Instant::now();
    let outcomes = execute(&tasks, pattern, &key.derive("schedule"));
    let values: Vec<Option<Matrix<T>>> = outcomes
        .into_iter()
        .map(|o| match o.status {
            WorkerStatus::Completed(m) => Some(m),
            WorkerStatus::Failed => None,
        })
        .collect();
    let t2 = Instant::now();
    let outcome = decode(scheme, pattern, &values, decoder)?;
    let t3 = Instant::now();

    let verification = match &outcome.blocks {
        Some(blocks) => T::verify(&Matrix::assemble(blocks)?, &a.naive_mul(b)?),
        None => Verification::NotDecoded,
    };
    Ok(RunReport {
        version: crate::SCHEMA_VERSION,
        scheme: scheme.id.clone(),
        m: scheme.m(),
        seed,
        p_e,
        shape: (a.rows(), a.cols(), b.cols()),
        pattern: pattern.hex(),
        failed: pattern.names(scheme),
        decoded: outcome.blocks.is_some(),
        decoder,
        verification,
        plan: outcome.plan,
        timings: Timings {
            encode_us: (t1 - t0).as_micros(),
            compute_us: (t2 - t1).as_micros(),
            decode_us: (t3 - t2).as_micros(),
        },
    })
}

/// The failure pattern `run` draws for `(scheme, p_e, seed)`.
pub fn sampled_pattern(scheme: &Scheme, p_e: f64, seed: u64) -> FailurePattern {
    StreamKey::new(seed, &scheme.id, p_e).sample_pattern(0, scheme.m(), p_e)
}

/// One run with Bernoulli(`p_e`) node failures from the seeded stream.
pub fn run<T: Verify>(
    scheme: &Scheme,
    a: &Matrix<T>,
    b: &Matrix<T>,
    p_e: f64,
    seed: u64,
    decoder: Decoder,
) -> Result<RunReport> {
    check_p_e(p_e)?;
    run_with_pattern(scheme, a, b, sampled_pattern(scheme, p_e, seed), p_e, seed, decoder)
}

/// Seeded random integer inputs, entries in `-9..=9`.
pub fn random_inputs(size: usize, seed: u64, trial: u64) -> (IntMatrix, IntMatrix) {
    let key = StreamKey::new(seed, "inputs", 0.0);
    let mut rng = key.trial_rng(trial);
    (IntMatrix::random(&mut rng, size, size, -9, 9), IntMatrix::random(&mut rng, size, size, -9, 9))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BatchRecord {
    pub trial: u64,
    pub pattern_hex: String,
    pub decoded: bool,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchSummary {
    pub scheme: String,
    pub m: usize,
    pub size: usize,
    pub p_e: f64,
    pub trials: u64,
    pub seed: u64,
    pub undecoded: u64,
    pub failure_fraction: f64,
    pub mismatches: u64,
    pub records: Vec<BatchRecord>,
}

/// Repeated runs sharing the Monte Carlo failure stream, so the failure
/// fraction equals `p_fail_monte_carlo` for the same seed.
pub fn batch(scheme: &Scheme, size: usize, p_e: f64, trials: u64, seed: u64) -> Result<BatchSummary> {
    check_p_e(p_e)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if size == 0 || !size.is_multiple_of(2) {
        return Err(Error::OddDimension { rows: size, cols: size });
    }
    let table = DecodabilityTable::new(scheme)?;
    let key = StreamKey::new(seed, &scheme.id, p_e);
    let records = (0..trials)
        .into_par_iter()
        .map(|t| {
            let pattern = key.sample_pattern(t, scheme.m(), p_e);
            if !table.is_decodable(pattern) {
                return Ok(BatchRecord { trial: t, pattern_hex: pattern.hex(), decoded: false, verified: false });
            }
            let (a, b) = random_inputs(size, seed, t);
            let r = run_with_pattern(scheme, &a, &b, pattern, p_e, seed, Decoder::Linear)?;
            let verified = r.succeeded();
            Ok(BatchRecord { trial: t, pattern_hex: r.pattern, decoded: r.decoded, verified })
        })
        .collect::<Result<Vec<_>>>()?;
    let undecoded = records.iter().filter(|r| !r.decoded).count() as u64;
    let mismatches = records.iter().filter(|r| r.decoded && !r.verified).count() as u64;
    Ok(BatchSummary {
        scheme: scheme.id.clone(),
        m: scheme.m(),
        size,
        p_e,
        trials,
        seed,
        undecoded,
        failure_fraction: undecoded as f64 / trials as f64,
        mismatches,
        records,
    })
}

/// CSV: `trial,pattern_hex,decoded,verified`.
pub fn write_batch_csv<W: std::io::Write>(w: W, summary: &BatchSummary) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in &summary.records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
