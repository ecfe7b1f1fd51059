//! Exhaustive search for local computations and parity candidates.
//!
//! Every ternary sign vector over the scheme's terms is visited once. A
//! combination whose expansion equals an output block is a *local*
//! relation; one that factors into a single ternary product `(a·A)(b·B)`,
//! and is not merely one of the inputs, is a *parity* candidate.
//!
//! Relations equal up to a global sign are the same relation. Locals are
//! stored with the orientation that sums to `+C`; parities are stored with
//! their first non-zero sign positive.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bilinear::{expand, BilinearTerm, CTarget, Coeff4, ExpansionVector};
use crate::error::{Error, Result};

/// Largest term count accepted by the exhaustive searches.
pub const MAX_TERMS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationKind {
    Local(CTarget),
    Parity { a: Coeff4, b: Coeff4 },
}

impl RelationKind {
    pub fn expansion(&self) -> ExpansionVector {
        match self {
            Self::Local(t) => t.expansion(),
            Self::Parity { a, b } => crate::bilinear::outer(a, b),
        }
    }
}

/// Signed selection of scheme terms equal to a target expansion.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub signs: Vec<i8>,
    pub kind: RelationKind,
}

impl Relation {
    pub fn support_size(&self) -> usize {
        self.signs.iter().filter(|&&s| s != 0).count()
    }

    pub fn members(&self) -> impl Iterator<Item = (usize, i8)> + '_ {
        self.signs.iter().enumerate().filter(|(_, &s)| s != 0).map(|(i, &s)| (i, s))
    }

    pub fn target(&self) -> Option<CTarget> {
        match self.kind {
            RelationKind::Local(t) => Some(t),
            RelationKind::Parity { .. } => None,
        }
    }

    /// Parses `S2+S4-S6` style expressions over the given term names.
    pub fn parse(expr: &str, names: &[&str], kind: RelationKind) -> Result<Self> {
        let mut signs = vec![0i8; names.len()];
        let expr: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
        let mut rest = expr.as_str();
        while !rest.is_empty() {
            let (sign, tail) = match rest.as_bytes()[0] {
                b'+' => (1, &rest[1..]),
                b'-' => (-1, &rest[1..]),
                _ => (1, rest),
            };
            let end = tail.find(['+', '-']).unwrap_or(tail.len());
            let name = &tail[..end];
            let idx = names.iter().position(|n| *n == name).ok_or_else(|| Error::UnknownLabel(name.to_string()))?;
            signs[idx] = sign;
            rest = &tail[end..];
        }
        Ok(Self { signs, kind })
    }

    /// Renders as `+S2+S4-W6` using the given term names.
    pub fn expression(&self, names: &[String]) -> String {
        self.members().map(|(i, s)| format!("{}{}", if s > 0 { '+' } else { '-' }, names[i])).collect()
    }

    fn order_key(&self) -> (usize, Vec<(usize, i8)>) {
        (self.support_size(), self.members().collect())
    }
}

/// Interpretation of "equals one multiplication" in the parity branch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityMode {
    /// Any ternary rank-1 form `(a·A)(b·B)`.
    #[default]
    RankOne,
    /// Only single elementary products `±A_i B_j`.
    Elementary,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Largest support size visited; `None` means all terms.
    pub k_max: Option<usize>,
    pub parity_mode: ParityMode,
    pub parallel: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { k_max: None, parity_mode: ParityMode::RankOne, parallel: true }
    }
}

/// Output of [`search_lp`]: deduplicated, canonically sorted relations.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationSet {
    pub scheme: String,
    pub k_max: usize,
    pub parity_mode: ParityMode,
    /// Node names, index-aligned with relation sign vectors.
    pub names: Vec<String>,
    pub locals: Vec<Relation>,
    pub parities: Vec<Relation>,
}

impl RelationSet {
    pub fn local_counts(&self) -> BTreeMap<CTarget, usize> {
        let mut counts: BTreeMap<CTarget, usize> = CTarget::ALL.iter().map(|&t| (t, 0)).collect();
        for r in &self.locals {
            if let Some(t) = r.target() {
                *counts.entry(t).or_default() += 1;
            }
        }
        counts
    }

    pub fn locals_for(&self, target: CTarget) -> impl Iterator<Item = &Relation> {
        self.locals.iter().filter(move |r| r.target() == Some(target))
    }

    /// Distinct rank-1 forms among the parity candidates.
    pub fn distinct_parity_forms(&self) -> usize {
        self.parities.iter().map(|r| r.kind).collect::<HashSet<_>>().len()
    }

    pub fn contains(&self, rel: &Relation) -> bool {
        let pool = match rel.kind {
            RelationKind::Local(_) => &self.locals,
            RelationKind::Parity { .. } => &self.parities,
        };
        pool.iter().any(|r| r == rel)
    }

    pub fn empty(scheme: &str, names: Vec<String>) -> Self {
        Self {
            scheme: scheme.to_string(),
            k_max: 0,
            parity_mode: ParityMode::RankOne,
            names,
            locals: Vec::new(),
            parities: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedTerm {
    pub label: String,
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalEntry {
    pub target: CTarget,
    pub terms: Vec<SignedTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityEntry {
    pub a: Coeff4,
    pub b: Coeff4,
    pub terms: Vec<SignedTerm>,
}

/// Serialized form of a [`RelationSet`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDocument {
    pub version: u32,
    pub scheme: String,
    pub k_max: usize,
    pub parity_mode: ParityMode,
    pub names: Vec<String>,
    pub locals: Vec<LocalEntry>,
    pub parities: Vec<ParityEntry>,
}

impl RelationSet {
    fn signed_terms(&self, rel: &Relation) -> Vec<SignedTerm> {
        rel.members().map(|(i, sign)| SignedTerm { label: self.names[i].clone(), sign }).collect()
    }

    pub fn to_document(&self) -> RelationDocument {
        RelationDocument {
            version: crate::SCHEMA_VERSION,
            scheme: self.scheme.clone(),
            k_max: self.k_max,
            parity_mode: self.parity_mode,
            names: self.names.clone(),
            locals: self
                .locals
                .iter()
                .filter_map(|r| Some(LocalEntry { target: r.target()?, terms: self.signed_terms(r) }))
                .collect(),
            parities: self
                .parities
                .iter()
                .filter_map(|r| match r.kind {
                    RelationKind::Parity { a, b } => Some(ParityEntry { a, b, terms: self.signed_terms(r) }),
                    RelationKind::Local(_) => None,
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &RelationDocument) -> Result<Self> {
        if doc.version != crate::SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!("unsupported relation document version {}", doc.version)));
        }
        let names: Vec<&str> = doc.names.iter().map(String::as_str).collect();
        let signs = |terms: &[SignedTerm]| -> Result<Vec<i8>> {
            let mut v = vec![0i8; names.len()];
            for t in terms {
                let i = names.iter().position(|n| *n == t.label).ok_or_else(|| Error::UnknownLabel(t.label.clone()))?;
                if !matches!(t.sign, -1 | 1) {
                    return Err(Error::InvalidCoefficient(i64::from(t.sign)));
                }
                v[i] = t.sign;
            }
            Ok(v)
        };
        Ok(Self {
            scheme: doc.scheme.clone(),
            k_max: doc.k_max,
            parity_mode: doc.parity_mode,
            names: doc.names.clone(),
            locals: doc
                .locals
                .iter()
                .map(|e| Ok(Relation { signs: signs(&e.terms)?, kind: RelationKind::Local(e.target) }))
                .collect::<Result<_>>()?,
            parities: doc
                .parities
                .iter()
                .map(|e| Ok(Relation { signs: signs(&e.terms)?, kind: RelationKind::Parity { a: e.a, b: e.b } }))
                .collect::<Result<_>>()?,
        })
    }

    /// CSV, one relation per row: `kind,target,support,expression,factor`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["kind", "target", "support", "expression", "factor"])?;
        for r in self.locals.iter().chain(&self.parities) {
            let (kind, target, factor) = match r.kind {
                RelationKind::Local(t) => ("local", t.label(), String::new()),
                RelationKind::Parity { a, b } => {
                    ("parity", String::new(), format!("{}{}", a.side_formula('A'), b.side_formula('B')))
                }
            };
            let support = r.support_size().to_string();
            out.write_record([kind, &target, &support, &r.expression(&self.names), &factor])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Canonical factorisation `v = a ⊗ b` with ternary sides, first non-zero of
/// `a` positive. `None` for zero vectors, entries outside `{-1,0,1}`, or rank > 1.
pub fn is_rank_one(v: &ExpansionVector) -> Option<(Coeff4, Coeff4)> {
    let c = v.coeffs();
    if c.iter().any(|x| x.abs() > 1) {
        return None;
    }
    // row i of the 4x4 view is indexed by the A-side position
    let row = |i: usize| -> [i32; 4] { std::array::from_fn(|j| c[4 * j + i]) };
    let lead = (0..4).find(|&i| row(i) != [0; 4])?;
    let b = row(lead);
    let mut a = [0i64; 4];
    a[lead] = 1;
    for (i, slot) in a.iter_mut().enumerate().skip(lead + 1) {
        let r = row(i);
        *slot = if r == [0; 4] {
            0
        } else if r == b {
            1
        } else if r == b.map(|x| -x) {
            -1
        } else {
            return None;
        };
    }
    let a = Coeff4::new(a).ok()?;
    let b = Coeff4::new(b.map(i64::from)).ok()?;
    Some((a, b))
}

fn is_elementary(a: &Coeff4, b: &Coeff4) -> bool {
    let nz = |c: &Coeff4| c.entries().iter().filter(|&&x| x != 0).count();
    nz(a) == 1 && nz(b) == 1
}

/// True iff the signed expansion sum equals the relation's claimed target.
pub fn verify_relation(terms: &[BilinearTerm], relation: &Relation) -> bool {
    if relation.signs.len() != terms.len() || relation.support_size() == 0 {
        return false;
    }
    let sum =
        relation.members().fold(ExpansionVector::ZERO, |acc, (i, s)| acc + expand(&terms[i]).scaled(i32::from(s)));
    sum == relation.kind.expansion()
}

/// Runs the search with default settings and `k_max` bound.
pub fn search_lp(terms: &[BilinearTerm], k_max: usize) -> Result<RelationSet> {
    search_lp_with(terms, "custom", &SearchConfig { k_max: Some(k_max), ..SearchConfig::default() })
}

struct Visitor<'a> {
    vectors: &'a [[i32; 16]],
    targets: [[i32; 16]; 4],
    inputs: HashSet<[i32; 16]>,
    k_max: usize,
    mode: ParityMode,
}

#[derive(Default)]
struct Found {
    locals: Vec<Relation>,
    parities: Vec<Relation>,
}

impl Visitor<'_> {
    fn visit(&self, signs: &[i8], v: &[i32; 16], nnz: usize, out: &mut Found) {
        if nnz == 0 || nnz > self.k_max {
            return;
        }
        if let Some(t) = self.targets.iter().position(|t| t == v) {
            out.locals.push(Relation { signs: signs.to_vec(), kind: RelationKind::Local(CTarget::ALL[t]) });
            return;
        }
        if v.iter().any(|x| x.abs() > 1) || self.inputs.contains(v) {
            return;
        }
        // keep one orientation per global-sign pair
        if signs.iter().find(|&&s| s != 0) != Some(&1) {
            return;
        }
        let Some((a, b)) = is_rank_one(&ExpansionVector::from_coeffs(*v)) else {
            return;
        };
        if self.mode == ParityMode::Elementary && !is_elementary(&a, &b) {
            return;
        }
        out.parities.push(Relation { signs: signs.to_vec(), kind: RelationKind::Parity { a, b } });
    }

    /// Enumerates all assignments of the low `m - fixed.len()` digits with the
    /// top digits pinned to `fixed`.
    fn run_chunk(&self, fixed: &[i8]) -> Found {
        let m = self.vectors.len();
        let low = m - fixed.len();
        let mut signs = vec![0i8; m];
        signs[low..].copy_from_slice(fixed);
        let mut v = [0i32; 16];
        let mut nnz = 0;
        for (i, &s) in signs.iter().enumerate().skip(low) {
            if s != 0 {
                nnz += 1;
                add_scaled(&mut v, &self.vectors[i], i32::from(s));
            }
        }
        let mut out = Found::default();
        loop {
            self.visit(&signs, &v, nnz, &mut out);
            // ternary increment, digit cycle 0 -> 1 -> -1 -> 0 (carry)
            let mut i = 0;
            loop {
                if i == low {
                    return out;
                }
                match signs[i] {
                    0 => {
                        signs[i] = 1;
                        add_scaled(&mut v, &self.vectors[i], 1);
                        nnz += 1;
                        break;
                    }
                    1 => {
                        signs[i] = -1;
                        add_scaled(&mut v, &self.vectors[i], -2);
                        break;
                    }
                    _ => {
                        signs[i] = 0;
                        add_scaled(&mut v, &self.vectors[i], 1);
                        nnz -= 1;
                        i += 1;
                    }
                }
            }
        }
    }
}

fn add_scaled(v: &mut [i32; 16], w: &[i32; 16], k: i32) {
    for (x, y) in v.iter_mut().zip(w) {
        *x += k * y;
    }
}

/// Enumerates local relations and parity candidates over `terms`.
pub fn search_lp_with(terms: &[BilinearTerm], scheme: &str, config: &SearchConfig) -> Result<RelationSet> {
    let m = terms.len();
    if m > MAX_TERMS {
        return Err(Error::Intractable { what: "relation search", m, max: MAX_TERMS });
    }
    let k_max = config.k_max.unwrap_or(m);
    if m == 0 || k_max == 0 || k_max > m {
        return Err(Error::InvalidArgument(format!("k_max must lie in 1..={m}, got {k_max}")));
    }
    let vectors: Vec<[i32; 16]> = terms.iter().map(|t| *expand(t).coeffs()).collect();
    let inputs = vectors.iter().flat_map(|v| [*v, v.map(|x| -x)]).collect();
    let visitor = Visitor {
        vectors: &vectors,
        targets: CTarget::ALL.map(|t| *t.expansion().coeffs()),
        inputs,
        k_max,
        mode: config.parity_mode,
    };

    let top = m.min(3);
    let chunks: Vec<Vec<i8>> = (0..3usize.pow(top as u32))
        .map(|mut n| {
            (0..top)
                .map(|_| {
                    let d = (n % 3) as i8 - 1;
                    n /= 3;
                    d
                })
                .collect()
        })
        .collect();
    let results: Vec<Found> = if config.parallel {
        chunks.par_iter().map(|c| visitor.run_chunk(c)).collect()
    } else {
        chunks.iter().map(|c| visitor.run_chunk(c)).collect()
    };

    let mut locals = Vec::new();
    let mut parities = Vec::new();
    for f in results {
        locals.extend(f.locals);
        parities.extend(f.parities);
    }
    locals.sort_by_cached_key(|r| (r.target(), r.order_key()));
    locals.dedup();
    parities.sort_by_cached_key(|r| (r.order_key().0, r.kind, r.order_key().1));
    parities.dedup();

    Ok(RelationSet {
        scheme: scheme.to_string(),
        k_max,
        parity_mode: config.parity_mode,
        names: terms.iter().map(|t| t.name().to_string()).collect(),
        locals,
        parities,
    })
}

/// Names of the fourteen-term Strassen + Winograd ordering.
pub const HYBRID_NAMES: [&str; 14] =
    ["S1", "S2", "S3", "S4", "S5", "S6", "S7", "W1", "W2", "W3", "W4", "W5", "W6", "W7"];

fn local(expr: &str, target: CTarget) -> Relation {
    Relation::parse(expr, &HYBRID_NAMES, RelationKind::Local(target)).expect("catalog labels are valid")
}

/// The defining output equations of both algorithms over the S+W ordering:
/// Strassen and Winograd forms of each block, eight relations.
pub fn output_equations() -> Vec<Relation> {
    let [c11, c12, c21, c22] = CTarget::ALL;
    vec![
        local("S1+S4-S5+S7", c11),
        local("W1+W2", c11),
        local("S3+S5", c12),
        local("W1+W5+W6-W7", c12),
        local("S2+S4", c21),
        local("W1-W3+W4-W7", c21),
        local("S1-S2+S3+S6", c22),
        local("W1+W4+W5-W7", c22),
    ]
}

/// Mixed Strassen/Winograd local relations, one per output block.
pub fn cross_equations() -> Vec<Relation> {
    let [c11, c12, c21, c22] = CTarget::ALL;
    vec![
        local("S2+S4-S6+S7+W4-W6", c11),
        local("S1+S3+S4+S7-W1-W2", c12),
        local("S2+S3+S4+S5-W1-W5-W6+W7", c21),
        local("S3+S5+W4-W6", c22),
    ]
}

/// Nine further local relations for C11 mixing both algorithms.
pub fn c11_mixed_catalog() -> Vec<Relation> {
    let c11 = CTarget::ALL[0];
    [
        "S2+S4+W2+W3-W4+W7",
        "S3+S5+W2-W5-W6+W7",
        "S1-S2+S3+S6+W2-W4-W5+W7",
        "S1-S2+S3+S7-W3+W4-W5-W6",
        "S1-S2-S5+S6+W1+W2-W4+W6",
        "S1-S2-S5+S7+W1-W3+W4-W7",
        "S1+S3+S4+S7-W1-W5-W6+W7",
        "S2-S3+S4-S5-S6+S7+W1+W4+W5-W7",
        "S2-S3+S4-S5+W1+W2+W3-W4+W5+W6",
    ]
    .into_iter()
    .map(|e| local(e, c11))
    .collect()
}

/// Summary numbers for comparing the local-relation count under several
/// counting conventions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountReport {
    /// Distinct locals after global-sign dedup.
    pub distinct_locals: usize,
    /// Distinct locals excluding the eight single-algorithm output equations.
    pub cross_locals: usize,
    /// Rank of the local sign vectors augmented with a one-hot target column.
    pub augmented_rank: usize,
    /// Distinct parity candidates and distinct rank-1 forms among them.
    pub parity_relations: usize,
    pub parity_forms: usize,
}

impl CountReport {
    pub fn any_equals(&self, n: usize) -> bool {
        [self.distinct_locals, self.cross_locals, self.augmented_rank, self.parity_relations, self.parity_forms]
            .contains(&n)
    }
}

pub fn count_report(set: &RelationSet) -> CountReport {
    let m = set.names.len();
    let rows: Vec<Vec<i64>> = set
        .locals
        .iter()
        .map(|r| {
            let mut row: Vec<i64> = r.signs.iter().map(|&s| i64::from(s)).collect();
            let t = r.target().map_or(0, |t| t.which().ord());
            row.extend((0..4).map(|k| i64::from(k == t)));
            row
        })
        .collect();
    let single_algorithm = set
        .locals
        .iter()
        .filter(|r| {
            let mut groups = r.members().map(|(i, _)| set.names[i].chars().next());
            let first = groups.next();
            groups.all(|g| Some(g) == first)
        })
        .count();
    debug_assert!(rows.iter().all(|r| r.len() == m + 4));
    CountReport {
        distinct_locals: set.locals.len(),
        cross_locals: set.locals.len() - single_algorithm,
        augmented_rank: crate::exact::rank(&rows),
        parity_relations: set.parities.len(),
        parity_forms: set.distinct_parity_forms(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::{outer, strassen_terms, winograd_terms, BlockIndex::*};

    fn hybrid() -> Vec<BilinearTerm> {
        strassen_terms().into_iter().chain(winograd_terms()).collect()
    }

    fn cf(pairs: &[(crate::bilinear::BlockIndex, i64)]) -> Coeff4 {
        Coeff4::from_pairs(pairs).unwrap()
    }

    #[test]
    fn rank_one_examples() {
        let s = strassen_terms();
        let w = winograd_terms();
        let v = expand(&s[2]) + expand(&w[3]);
        assert_eq!(is_rank_one(&v), Some((cf(&[(P21, 1)]), cf(&[(P12, 1), (P22, -1)]))));
        assert_eq!(is_rank_one(&expand(&s[0])), Some((s[0].a, s[0].b)));
        assert_eq!(is_rank_one(&(expand(&s[0]) + expand(&s[1]))), None);
        assert_eq!(is_rank_one(&ExpansionVector::ZERO), None);
        // rank 2 with unit entries
        assert_eq!(is_rank_one(&CTarget::ALL[0].expansion()), None);
    }

    #[test]
    fn rank_one_canonicalises_sign() {
        let a = cf(&[(P12, -1), (P21, 1)]);
        let b = cf(&[(P11, 1)]);
        let (fa, fb) = is_rank_one(&outer(&a, &b)).unwrap();
        assert_eq!(fa, -a);
        assert_eq!(fb, -b);
    }

    #[test]
    fn verify_examples() {
        let terms = hybrid();
        let [c11, _, _, c22] = CTarget::ALL;
        assert!(verify_relation(&terms, &local("S2+S4-S6+S7+W4-W6", c11)));
        assert!(verify_relation(&terms, &local("S3+S5+W4-W6", c22)));
        assert!(!verify_relation(&terms, &local("W1+W2", c22)));
    }

    #[test]
    fn verify_rejects_wrong_length() {
        let rel = local("W1+W2", CTarget::ALL[0]);
        assert!(!verify_relation(&strassen_terms(), &rel));
    }

    #[test]
    fn catalogs_verify() {
        let terms = hybrid();
        for rel in output_equations().iter().chain(&cross_equations()).chain(&c11_mixed_catalog()) {
            assert!(verify_relation(&terms, rel), "{}", rel.expression(&HYBRID_NAMES.map(String::from)));
        }
        assert_eq!(c11_mixed_catalog().len(), 9);
    }

    #[test]
    fn parse_and_render() {
        let rel = local("S2-S3+W7", CTarget::ALL[0]);
        assert_eq!(rel.support_size(), 3);
        assert_eq!(rel.expression(&HYBRID_NAMES.map(String::from)), "+S2-S3+W7");
        assert!(matches!(
            Relation::parse("S9", &HYBRID_NAMES, RelationKind::Local(CTarget::ALL[0])),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn strassen_only_search_finds_its_outputs() {
        let set = search_lp(&strassen_terms(), 7).unwrap();
        assert_eq!(set.locals.len(), 4);
        let names: Vec<_> = HYBRID_NAMES[..7].to_vec();
        for (expr, t) in [("S1+S4-S5+S7", 0), ("S3+S5", 1), ("S2+S4", 2), ("S1-S2+S3+S6", 3)] {
            let rel = Relation::parse(expr, &names, RelationKind::Local(CTarget::ALL[t])).unwrap();
            assert!(set.contains(&rel));
        }
        assert!(set.parities.iter().all(|r| verify_relation(&strassen_terms(), r)));
    }

    #[test]
    fn k_max_bounds_support() {
        let set = search_lp(&hybrid(), 2).unwrap();
        assert!(set.locals.iter().chain(&set.parities).all(|r| r.support_size() <= 2));
        assert!(set.contains(&local("W1+W2", CTarget::ALL[0])));
        assert!(set.contains(&local("S3+S5", CTarget::ALL[1])));
        let s3w4 = Relation {
            signs: local("S3+W4", CTarget::ALL[0]).signs,
            kind: RelationKind::Parity { a: cf(&[(P21, 1)]), b: cf(&[(P12, 1), (P22, -1)]) },
        };
        assert!(set.contains(&s3w4));
    }

    #[test]
    fn elementary_mode_is_a_subset() {
        let terms = hybrid();
        let cfg = SearchConfig { k_max: Some(3), parity_mode: ParityMode::Elementary, parallel: true };
        let el = search_lp_with(&terms, "hybrid_sw", &cfg).unwrap();
        let all = search_lp(&terms, 3).unwrap();
        assert_eq!(el.locals, all.locals);
        assert!(el.parities.iter().all(|r| all.contains(r)));
        for r in &el.parities {
            let RelationKind::Parity { a, b } = r.kind else { unreachable!() };
            assert!(is_elementary(&a, &b));
        }
    }

    #[test]
    fn serial_and_parallel_agree() {
        let terms = hybrid();
        let par = search_lp_with(&terms, "h", &SearchConfig { k_max: Some(4), ..Default::default() }).unwrap();
        let ser = search_lp_with(&terms, "h", &SearchConfig { k_max: Some(4), parallel: false, ..Default::default() })
            .unwrap();
        assert_eq!(par, ser);
    }

    #[test]
    fn bad_bounds_rejected() {
        assert!(matches!(search_lp(&hybrid(), 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(search_lp(&hybrid(), 15), Err(Error::InvalidArgument(_))));
        let many: Vec<_> = (0..4).flat_map(|_| hybrid()).collect();
        assert!(matches!(search_lp(&many, 3), Err(Error::Intractable { m: 56, .. })));
    }
}
