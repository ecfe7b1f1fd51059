//! Coded schemes: which sub-multiplication each worker node computes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bilinear::{strassen_terms, winograd_terms, BilinearTerm, BlockIndex, Coeff4, ExpansionVector};
use crate::error::{Error, Result};
use crate::search::{search_lp_with, RelationSet, SearchConfig, MAX_TERMS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseAlgorithm {
    Strassen,
    Winograd,
}

impl BaseAlgorithm {
    pub fn terms(self) -> Vec<BilinearTerm> {
        match self {
            Self::Strassen => strassen_terms(),
            Self::Winograd => winograd_terms(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Strassen => "strassen",
            Self::Winograd => "winograd",
        }
    }
}

/// Which redundant product serves as the second parity node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondParity {
    #[default]
    W2,
    S7,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeKind {
    Replication {
        base: BaseAlgorithm,
        copies: u8,
    },
    HybridSw,
    #[serde(rename = "hybrid_sw_1psmm")]
    HybridSw1Psmm,
    #[serde(rename = "hybrid_sw_2psmm")]
    HybridSw2Psmm {
        second: SecondParity,
    },
}

impl SchemeKind {
    pub fn id(&self) -> String {
        match self {
            Self::Replication { base, copies } => format!("{}_{}copy", base.name(), copies),
            Self::HybridSw => "hybrid_sw".into(),
            Self::HybridSw1Psmm => "hybrid_sw_1psmm".into(),
            Self::HybridSw2Psmm { second: SecondParity::W2 } => "hybrid_sw_2psmm".into(),
            Self::HybridSw2Psmm { second: SecondParity::S7 } => "hybrid_sw_2psmm_s7".into(),
        }
    }

    /// Scheme set compared in the default reliability curves.
    pub fn default_comparison() -> Vec<SchemeKind> {
        let rep = |copies| Self::Replication { base: BaseAlgorithm::Strassen, copies };
        vec![
            rep(1),
            rep(2),
            rep(3),
            Self::HybridSw,
            Self::HybridSw1Psmm,
            Self::HybridSw2Psmm { second: SecondParity::W2 },
        ]
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let kind = match s.as_str() {
            "hybrid_sw" => Self::HybridSw,
            "hybrid_sw_1psmm" => Self::HybridSw1Psmm,
            "hybrid_sw_2psmm" => Self::HybridSw2Psmm { second: SecondParity::W2 },
            "hybrid_sw_2psmm_s7" => Self::HybridSw2Psmm { second: SecondParity::S7 },
            other => {
                let (base, rest) = if let Some(r) = other.strip_prefix("strassen_") {
                    (BaseAlgorithm::Strassen, r)
                } else if let Some(r) = other.strip_prefix("winograd_") {
                    (BaseAlgorithm::Winograd, r)
                } else {
                    return Err(Error::UnknownScheme(s));
                };
                let copies = rest
                    .strip_suffix("copy")
                    .and_then(|c| c.parse::<u8>().ok())
                    .filter(|c| (1..=3).contains(c))
                    .ok_or_else(|| Error::UnknownScheme(s.clone()))?;
                Self::Replication { base, copies }
            }
        };
        Ok(kind)
    }
}

/// First parity product `A21 (B12 - B22)`, equal to `S3 + W4`.
pub fn first_psmm() -> BilinearTerm {
    use BlockIndex::*;
    let a = Coeff4::from_pairs(&[(P21, 1)]).expect("valid");
    let b = Coeff4::from_pairs(&[(P12, 1), (P22, -1)]).expect("valid");
    BilinearTerm::new("P1", a, b).expect("valid")
}

/// Second parity product: a verbatim copy of `W2` (default) or `S7`.
pub fn second_psmm(choice: SecondParity) -> BilinearTerm {
    let src = match choice {
        SecondParity::W2 => winograd_terms()[1].clone(),
        SecondParity::S7 => strassen_terms()[6].clone(),
    };
    BilinearTerm::new("P2", src.a, src.b).expect("valid")
}

/// Ordered one-term-per-node assignment plus its relation set.
#[derive(Clone, Debug)]
pub struct Scheme {
    pub id: String,
    pub kind: SchemeKind,
    pub terms: Vec<BilinearTerm>,
    pub relations: Option<RelationSet>,
    pub psmm_count: usize,
}

pub fn build_scheme(kind: SchemeKind) -> Result<Scheme> {
    let hybrid = || strassen_terms().into_iter().chain(winograd_terms()).collect::<Vec<_>>();
    let (terms, psmm_count) = match kind {
        SchemeKind::Replication { base, copies } => {
            if !(1..=3).contains(&copies) {
                return Err(Error::UnknownScheme(kind.id()));
            }
            let terms = (1..=copies)
                .flat_map(|c| {
                    base.terms().into_iter().map(move |t| {
                        let id = if c == 1 { t.label.clone() } else { format!("{}.{c}", t.label) };
                        t.with_id(id)
                    })
                })
                .collect();
            (terms, 0)
        }
        SchemeKind::HybridSw => (hybrid(), 0),
        SchemeKind::HybridSw1Psmm => {
            let mut t = hybrid();
            t.push(first_psmm());
            (t, 1)
        }
        SchemeKind::HybridSw2Psmm { second } => {
            let mut t = hybrid();
            t.push(first_psmm());
            t.push(second_psmm(second));
            (t, 2)
        }
    };
    Ok(Scheme { id: kind.id(), kind, terms, relations: None, psmm_count })
}

impl Scheme {
    pub fn parse(id: &str) -> Result<Self> {
        build_scheme(id.parse()?)
    }

    pub fn m(&self) -> usize {
        self.terms.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.name().to_string()).collect()
    }

    pub fn expansions(&self) -> Vec<ExpansionVector> {
        self.terms.iter().map(BilinearTerm::expand).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.terms.iter().position(|t| t.name() == name).ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    /// Runs the relation search over this scheme's terms and attaches the result.
    pub fn with_relations(mut self, config: &SearchConfig) -> Result<Self> {
        self.relations = Some(search_lp_with(&self.terms, &self.id, config)?);
        Ok(self)
    }

    pub fn relations(&self) -> Option<&RelationSet> {
        self.relations.as_ref()
    }

    pub fn catalog(&self) -> SchemeCatalog {
        SchemeCatalog {
            version: crate::SCHEMA_VERSION,
            id: self.id.clone(),
            m: self.m(),
            psmm_count: self.psmm_count,
            provenance: self.kind,
            terms: self
                .terms
                .iter()
                .map(|t| CatalogTerm {
                    node: t.name().to_string(),
                    label: t.label.clone(),
                    formula: t.formula(),
                    a: t.a,
                    b: t.b,
                    support_hex: t.expand().support_hex(),
                })
                .collect(),
            psmms: self.terms[self.m() - self.psmm_count..].iter().map(|t| t.name().to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogTerm {
    pub node: String,
    pub label: String,
    pub formula: String,
    pub a: Coeff4,
    pub b: Coeff4,
    pub support_hex: String,
}

/// Serialisable description of a scheme.
#[derive(Clone, Debug, Serialize)]
pub struct SchemeCatalog {
    pub version: u32,
    pub id: String,
    pub m: usize,
    pub psmm_count: usize,
    pub provenance: SchemeKind,
    pub terms: Vec<CatalogTerm>,
    pub psmms: Vec<String>,
}

/// Set of failed (delayed) nodes, as a bitmask over term indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FailurePattern(pub u32);

impl FailurePattern {
    pub const NONE: FailurePattern = FailurePattern(0);

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Self(indices.into_iter().fold(0, |m, i| m | (1 << i)))
    }

    /// Parses node names such as `S3,W5` against a scheme.
    pub fn from_names<S: AsRef<str>>(scheme: &Scheme, names: &[S]) -> Result<Self> {
        let idx = names.iter().map(|n| scheme.index_of(n.as_ref().trim())).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_indices(idx))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_valid_for(self, m: usize) -> bool {
        m >= 32 || self.0 >> m == 0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    pub fn survivors(self, m: usize) -> impl Iterator<Item = usize> {
        (0..m).filter(move |&i| !self.contains(i))
    }

    pub fn hex(self) -> String {
        format!("0x{:06X}", self.0)
    }

    pub fn names(self, scheme: &Scheme) -> Vec<String> {
        self.indices().filter(|&i| i < scheme.m()).map(|i| scheme.terms[i].name().to_string()).collect()
    }
}

pub(crate) fn check_tractable(what: &'static str, m: usize) -> Result<()> {
    if m > MAX_TERMS {
        return Err(Error::Intractable { what, m, max: MAX_TERMS });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::{outer, BlockIndex::*};

    #[test]
    fn replication_layouts() {
        let s2 = Scheme::parse("strassen_2copy").unwrap();
        assert_eq!(s2.m(), 14);
        let labels: Vec<_> = s2.terms.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(&labels[..7], &labels[7..]);
        assert_eq!(s2.terms[7].name(), "S1.2");
        assert_eq!(Scheme::parse("strassen_3copy").unwrap().m(), 21);
        assert_eq!(Scheme::parse("winograd_1copy").unwrap().terms[1].name(), "W2");
    }

    #[test]
    fn hybrid_layouts() {
        assert_eq!(Scheme::parse("hybrid_sw").unwrap().m(), 14);
        let h1 = Scheme::parse("hybrid_sw_1psmm").unwrap();
        assert_eq!((h1.m(), h1.psmm_count), (15, 1));
        let h2 = Scheme::parse("hybrid_sw_2psmm").unwrap();
        assert_eq!((h2.m(), h2.psmm_count), (16, 2));
        let p1 = &h2.terms[14];
        assert_eq!(
            p1.expand(),
            outer(&Coeff4::from_pairs(&[(P21, 1)]).unwrap(), &Coeff4::from_pairs(&[(P12, 1), (P22, -1)]).unwrap())
        );
        assert_eq!(h2.terms[15].expand(), winograd_terms()[1].expand());
        let s7 = Scheme::parse("hybrid_sw_2psmm_s7").unwrap();
        assert_eq!(s7.terms[15].expand(), strassen_terms()[6].expand());
    }

    #[test]
    fn unknown_ids_rejected() {
        for bad in ["strassen_4copy", "strassen", "foo", "hybrid_sw_3psmm", "winograd_0copy"] {
            assert!(matches!(Scheme::parse(bad), Err(Error::UnknownScheme(_))), "{bad}");
        }
    }

    #[test]
    fn ids_round_trip() {
        for kind in SchemeKind::default_comparison() {
            assert_eq!(kind.id().parse::<SchemeKind>().unwrap(), kind);
        }
    }

    #[test]
    fn failure_pattern_names() {
        let h = Scheme::parse("hybrid_sw").unwrap();
        let p = FailurePattern::from_names(&h, &["S3", "W5"]).unwrap();
        assert_eq!(p.indices().collect::<Vec<_>>(), [2, 11]);
        assert_eq!(p.names(&h), ["S3", "W5"]);
        assert!(FailurePattern::from_names(&h, &["P1"]).is_err());
        assert!(p.is_valid_for(14));
        assert!(!FailurePattern(1 << 14).is_valid_for(14));
    }

    #[test]
    fn catalog_json() {
        let json = serde_json::to_value(Scheme::parse("hybrid_sw_2psmm").unwrap().catalog()).unwrap();
        assert_eq!(json["m"], 16);
        assert_eq!(json["psmms"], serde_json::json!(["P1", "P2"]));
        assert_eq!(json["provenance"]["kind"], "hybrid_sw_2psmm");
        assert_eq!(json["terms"][14]["formula"], "A21(B12-B22)");
    }
}
