//! Exact representation of 2x2-base bilinear multiplication algorithms.
//!
//! A sub-multiplication is a product `(Σ a_i A_i)(Σ b_j B_j)` with
//! coefficients in `{-1, 0, 1}`. Expanding it over the sixteen elementary
//! products `A_i B_j` gives an [`ExpansionVector`], the object every
//! relation search and decodability test works with.
//!
//! Linear index of `(A_i, B_j)` is `4 * ord(j) + ord(i)`; the support mask
//! puts that index at bit `15 - index`, so `(A11, B11)` is the MSB. Under the
//! product convention `C = A B` this renders the four output blocks as
//! `0x8040`, `0x0804`, `0x2010`, `0x0201`.

use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{Element, Matrix};

/// Row-major position inside a 2x2 block partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BlockIndex {
    #[serde(rename = "11")]
    P11,
    #[serde(rename = "12")]
    P12,
    #[serde(rename = "21")]
    P21,
    #[serde(rename = "22")]
    P22,
}

impl BlockIndex {
    pub const ALL: [BlockIndex; 4] = [Self::P11, Self::P12, Self::P21, Self::P22];

    pub fn ord(self) -> usize {
        self as usize
    }

    pub fn from_ord(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::P11 => "11",
            Self::P12 => "12",
            Self::P21 => "21",
            Self::P22 => "22",
        }
    }
}

impl fmt::Display for BlockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Four ternary coefficients, one per quadrant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coeff4([i8; 4]);

impl Coeff4 {
    pub const ZERO: Coeff4 = Coeff4([0; 4]);

    pub fn new(entries: [i64; 4]) -> Result<Self> {
        let mut out = [0i8; 4];
        for (slot, &e) in out.iter_mut().zip(&entries) {
            if !(-1..=1).contains(&e) {
                return Err(Error::InvalidCoefficient(e));
            }
            *slot = e as i8;
        }
        Ok(Self(out))
    }

    /// Builds from sparse `(position, coefficient)` pairs; unspecified positions are zero.
    pub fn from_pairs(pairs: &[(BlockIndex, i64)]) -> Result<Self> {
        let mut e = [0i64; 4];
        for &(idx, c) in pairs {
            e[idx.ord()] = c;
        }
        Self::new(e)
    }

    pub fn entries(&self) -> [i8; 4] {
        self.0
    }

    pub fn get(&self, idx: BlockIndex) -> i8 {
        self.0[idx.ord()]
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    /// Every non-zero ternary vector, in lexicographic order of entries.
    pub fn all_nonzero() -> impl Iterator<Item = Coeff4> {
        (0..81).filter_map(|mut n| {
            let mut e = [0i8; 4];
            for slot in e.iter_mut().rev() {
                *slot = (n % 3) as i8 - 1;
                n /= 3;
            }
            let c = Coeff4(e);
            (!c.is_zero()).then_some(c)
        })
    }

    /// `Σ coeff_i · blocks[i]` over the four quadrants.
    pub fn combine<T: Element>(&self, blocks: &[Matrix<T>; 4]) -> Result<Matrix<T>> {
        let (rows, cols) = blocks[0].shape();
        let mut acc = Matrix::zeros(rows, cols);
        for (c, blk) in self.0.iter().zip(blocks) {
            acc = match c {
                0 => {
                    if blk.shape() != (rows, cols) {
                        return Err(Error::DimensionMismatch("unequal quadrant shapes".into()));
                    }
                    acc
                }
                1 => acc.add(blk)?,
                _ => acc.sub(blk)?,
            };
        }
        Ok(acc)
    }

    /// Signed sum rendering, e.g. `(A11-A21)` or `B22`.
    pub fn side_formula(&self, name: char) -> String {
        let nz: Vec<_> = BlockIndex::ALL.into_iter().filter(|&i| self.get(i) != 0).collect();
        let mut out = String::new();
        for (k, &i) in nz.iter().enumerate() {
            if self.get(i) < 0 {
                out.push('-');
            } else if k > 0 {
                out.push('+');
            }
            out.push(name);
            out.push_str(i.as_str());
        }
        if nz.len() > 1 || out.starts_with('-') {
            format!("({out})")
        } else {
            out
        }
    }
}

impl Neg for Coeff4 {
    type Output = Coeff4;
    fn neg(self) -> Coeff4 {
        Coeff4(self.0.map(|v| -v))
    }
}

impl Serialize for Coeff4 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(4))?;
        for idx in BlockIndex::ALL {
            map.serialize_entry(idx.as_str(), &self.get(idx))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Coeff4 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = std::collections::BTreeMap::<BlockIndex, i64>::deserialize(d)?;
        let pairs: Vec<_> = raw.into_iter().collect();
        Coeff4::from_pairs(&pairs).map_err(serde::de::Error::custom)
    }
}

/// One sub-matrix multiplication `(a · A)(b · B)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BilinearTerm {
    /// Unique node-level name inside a scheme (e.g. `S1.2` for a second copy).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub id: Option<String>,
    pub label: String,
    pub a: Coeff4,
    pub b: Coeff4,
}

impl BilinearTerm {
    pub fn new(label: impl Into<String>, a: Coeff4, b: Coeff4) -> Result<Self> {
        let label = label.into();
        if a.is_zero() || b.is_zero() {
            return Err(Error::ZeroSide(label));
        }
        Ok(Self { id: None, label, a, b })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    /// Node-level name: the id when set, otherwise the label.
    pub fn name(&self) -> &str {
        self.id.as_deref().unwrap_or(&self.label)
    }

    pub fn expand(&self) -> ExpansionVector {
        expand(self)
    }

    /// Human-readable algebraic form, e.g. `(A11+A22)(B11+B22)`.
    pub fn formula(&self) -> String {
        format!("{}{}", self.a.side_formula('A'), self.b.side_formula('B'))
    }
}

fn term(label: &str, a: &[(BlockIndex, i64)], b: &[(BlockIndex, i64)]) -> BilinearTerm {
    BilinearTerm::new(label, Coeff4::from_pairs(a).unwrap(), Coeff4::from_pairs(b).unwrap())
        .expect("static term tables are valid")
}

/// Strassen's seven products S1..S7.
pub fn strassen_terms() -> Vec<BilinearTerm> {
    use BlockIndex::*;
    vec![
        term("S1", &[(P11, 1), (P22, 1)], &[(P11, 1), (P22, 1)]),
        term("S2", &[(P21, 1), (P22, 1)], &[(P11, 1)]),
        term("S3", &[(P11, 1)], &[(P12, 1), (P22, -1)]),
        term("S4", &[(P22, 1)], &[(P21, 1), (P11, -1)]),
        term("S5", &[(P11, 1), (P12, 1)], &[(P22, 1)]),
        term("S6", &[(P21, 1), (P11, -1)], &[(P11, 1), (P12, 1)]),
        term("S7", &[(P12, 1), (P22, -1)], &[(P21, 1), (P22, 1)]),
    ]
}

/// Winograd's seven products W1..W7.
pub fn winograd_terms() -> Vec<BilinearTerm> {
    use BlockIndex::*;
    vec![
        term("W1", &[(P11, 1)], &[(P11, 1)]),
        term("W2", &[(P12, 1)], &[(P21, 1)]),
        term("W3", &[(P22, 1)], &[(P11, 1), (P12, -1), (P21, -1), (P22, 1)]),
        term("W4", &[(P11, 1), (P21, -1)], &[(P22, 1), (P12, -1)]),
        term("W5", &[(P21, 1), (P22, 1)], &[(P12, 1), (P11, -1)]),
        term("W6", &[(P11, 1), (P12, 1), (P21, -1), (P22, -1)], &[(P22, 1)]),
        term("W7", &[(P11, 1), (P21, -1), (P22, -1)], &[(P11, 1), (P12, -1), (P22, 1)]),
    ]
}

/// Output-assembly signs over S1..S7, one row per C block.
pub const STRASSEN_OUTPUT: [[i8; 7]; 4] =
    [[1, 0, 0, 1, -1, 0, 1], [0, 0, 1, 0, 1, 0, 0], [0, 1, 0, 1, 0, 0, 0], [1, -1, 1, 0, 0, 1, 0]];

/// Output-assembly signs over W1..W7, one row per C block.
pub const WINOGRAD_OUTPUT: [[i8; 7]; 4] =
    [[1, 1, 0, 0, 0, 0, 0], [1, 0, 0, 0, 1, 1, -1], [1, 0, -1, 1, 0, 0, -1], [1, 0, 0, 1, 1, 0, -1]];

/// Integer coefficients over the sixteen elementary products `A_i B_j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpansionVector {
    coeffs: [i32; 16],
}

impl ExpansionVector {
    pub const ZERO: ExpansionVector = ExpansionVector { coeffs: [0; 16] };

    pub fn from_coeffs(coeffs: [i32; 16]) -> Self {
        Self { coeffs }
    }

    pub fn linear_index(a: BlockIndex, b: BlockIndex) -> usize {
        4 * b.ord() + a.ord()
    }

    pub fn coeffs(&self) -> &[i32; 16] {
        &self.coeffs
    }

    pub fn get(&self, a: BlockIndex, b: BlockIndex) -> i32 {
        self.coeffs[Self::linear_index(a, b)]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs == [0; 16]
    }

    pub fn support_mask(&self) -> u16 {
        self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0).fold(0u16, |m, (i, _)| m | (1 << (15 - i)))
    }

    pub fn support_hex(&self) -> String {
        format!("0x{:04X}", self.support_mask())
    }

    pub fn scaled(&self, k: i32) -> Self {
        Self { coeffs: self.coeffs.map(|c| c * k) }
    }
}

impl Index<usize> for ExpansionVector {
    type Output = i32;
    fn index(&self, i: usize) -> &i32 {
        &self.coeffs[i]
    }
}

impl Add for ExpansionVector {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (x, y) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *x += y;
        }
        self
    }
}

impl Sub for ExpansionVector {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (x, y) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *x -= y;
        }
        self
    }
}

impl Neg for ExpansionVector {
    type Output = Self;
    fn neg(self) -> Self {
        self.scaled(-1)
    }
}

impl Serialize for ExpansionVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("coeffs", &self.coeffs)?;
        map.serialize_entry("support_hex", &self.support_hex())?;
        map.end()
    }
}

/// Outer product of the two coefficient sides.
pub fn expand(term: &BilinearTerm) -> ExpansionVector {
    outer(&term.a, &term.b)
}

pub fn outer(a: &Coeff4, b: &Coeff4) -> ExpansionVector {
    let mut coeffs = [0i32; 16];
    for (j, &bj) in b.0.iter().enumerate() {
        for (i, &ai) in a.0.iter().enumerate() {
            coeffs[4 * j + i] = i32::from(ai) * i32::from(bj);
        }
    }
    ExpansionVector { coeffs }
}

/// Entrywise signed sum.
pub fn combine_expansions<'a, I>(terms: I) -> ExpansionVector
where
    I: IntoIterator<Item = (i32, &'a ExpansionVector)>,
{
    terms.into_iter().fold(ExpansionVector::ZERO, |acc, (s, v)| acc + v.scaled(s))
}

/// One of the four output blocks `C11..C22` of `C = A B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CTarget(pub BlockIndex);

impl CTarget {
    pub const ALL: [CTarget; 4] =
        [CTarget(BlockIndex::P11), CTarget(BlockIndex::P12), CTarget(BlockIndex::P21), CTarget(BlockIndex::P22)];

    pub fn which(self) -> BlockIndex {
        self.0
    }

    /// `C_rc = A_r1 B_1c + A_r2 B_2c`.
    pub fn expansion(self) -> ExpansionVector {
        let (r, c) = (self.0.ord() / 2, self.0.ord() % 2);
        let mut coeffs = [0i32; 16];
        for k in 0..2 {
            let a = BlockIndex::from_ord(2 * r + k);
            let b = BlockIndex::from_ord(2 * k + c);
            coeffs[ExpansionVector::linear_index(a, b)] = 1;
        }
        ExpansionVector { coeffs }
    }

    pub fn label(self) -> String {
        format!("C{}", self.0)
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.label() == s)
    }
}

impl fmt::Display for CTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

impl Serialize for CTarget {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for CTarget {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CTarget::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown target {s}")))
    }
}

/// Numeric value of one sub-multiplication on 2x2-partitioned inputs.
pub fn evaluate_term<T: Element>(
    term: &BilinearTerm,
    blocks_a: &[Matrix<T>; 4],
    blocks_b: &[Matrix<T>; 4],
) -> Result<Matrix<T>> {
    let lhs = term.a.combine(blocks_a)?;
    let rhs = term.b.combine(blocks_b)?;
    lhs.naive_mul(&rhs)
}

/// Evaluates C blocks from seven base-algorithm products and an output sign table.
pub fn assemble_outputs<T: Element>(products: &[Matrix<T>], table: &[[i8; 7]; 4]) -> Result<[Matrix<T>; 4]> {
    if products.len() != 7 {
        return Err(Error::InvalidArgument(format!("expected 7 products, got {}", products.len())));
    }
    let (rows, cols) = products[0].shape();
    let mut out: [Matrix<T>; 4] = std::array::from_fn(|_| Matrix::zeros(rows, cols));
    for (dst, row) in out.iter_mut().zip(table) {
        for (p, &s) in products.iter().zip(row) {
            *dst = match s {
                0 => continue,
                1 => dst.add(p)?,
                _ => dst.sub(p)?,
            };
        }
    }
    Ok(out)
}
