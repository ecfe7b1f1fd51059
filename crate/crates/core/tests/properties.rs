use std::sync::OnceLock;

use ftsmm::bilinear::{evaluate_term, expand, outer, Coeff4, ExpansionVector};
use ftsmm::decode::{decodable_pattern_census, is_decodable, linear_decode, DecodabilityTable};
use ftsmm::matrix::{IntMatrix, Matrix};
use ftsmm::peel::{execute_plan, peel, replay};
use ftsmm::reliability::{fc_replication_closed_form, p_fail_theoretical, profile_for, ReliabilityProfile};
use ftsmm::scheme::{FailurePattern, Scheme};
use ftsmm::search::{is_rank_one, RelationSet, SearchConfig};
use proptest::prelude::*;

fn hybrid_2psmm() -> &'static (Scheme, DecodabilityTable) {
    static CELL: OnceLock<(Scheme, DecodabilityTable)> = OnceLock::new();
    CELL.get_or_init(|| {
        let s = Scheme::parse("hybrid_sw_2psmm").unwrap().with_relations(&SearchConfig::default()).unwrap();
        let t = DecodabilityTable::new(&s).unwrap();
        (s, t)
    })
}

fn profiles() -> &'static [ReliabilityProfile] {
    static CELL: OnceLock<Vec<ReliabilityProfile>> = OnceLock::new();
    CELL.get_or_init(|| {
        ["strassen_2copy", "hybrid_sw_1psmm"]
            .iter()
            .map(|id| profile_for(&Scheme::parse(id).unwrap()).unwrap())
            .collect()
    })
}

fn coeff() -> impl Strategy<Value = Coeff4> {
    prop::array::uniform4(-1i64..=1).prop_filter_map("non-zero side", |e| Coeff4::new(e).ok().filter(|c| !c.is_zero()))
}

fn int_matrix(n: usize) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-100i64..=100, n * n).prop_map(move |d| IntMatrix::from_vec(n, n, d).unwrap())
}

fn node_values(s: &Scheme, p: FailurePattern, a: &IntMatrix, b: &IntMatrix) -> Vec<Option<IntMatrix>> {
    let (pa, pb) = (a.partition().unwrap(), b.partition().unwrap());
    s.terms.iter().enumerate().map(|(i, t)| (!p.contains(i)).then(|| evaluate_term(t, &pa, &pb).unwrap())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rank_one_round_trip(a in coeff(), b in coeff()) {
        let v = outer(&a, &b);
        let (x, y) = is_rank_one(&v).expect("outer products are rank one");
        prop_assert_eq!(outer(&x, &y), v);
        prop_assert!((x == a && y == b) || (x == -a && y == -b));
    }

    #[test]
    fn expansion_is_bilinear(a in coeff(), b in coeff(), c in coeff()) {
        let sum_a = Coeff4::new(std::array::from_fn(|i| i64::from(a.entries()[i]) + i64::from(c.entries()[i])));
        if let Ok(s) = sum_a {
            if !s.is_zero() {
                prop_assert_eq!(outer(&s, &b), outer(&a, &b) + outer(&c, &b));
            }
        }
        prop_assert_eq!(outer(&-a, &b), -outer(&a, &b));
    }

    #[test]
    fn linear_decode_matches_naive(bits in 0u32..1 << 16, a in int_matrix(4), b in int_matrix(4)) {
        let (s, table) = hybrid_2psmm();
        let p = FailurePattern(bits);
        prop_assume!(p.count() < s.m());
        let out = linear_decode(s, p, &node_values(s, p, &a, &b)).unwrap();
        prop_assert_eq!(out.is_some(), table.is_decodable(p));
        if let Some(blocks) = out {
            prop_assert_eq!(Matrix::assemble(&blocks).unwrap(), a.naive_mul(&b).unwrap());
        }
    }

    #[test]
    fn float_decode_close(bits in 0u32..1 << 16, a in int_matrix(4), b in int_matrix(4)) {
        let (s, table) = hybrid_2psmm();
        let p = FailurePattern(bits);
        prop_assume!(p.count() < s.m() && table.is_decodable(p));
        let (fa, fb) = (a.to_float(), b.to_float());
        let (pa, pb) = (fa.partition().unwrap(), fb.partition().unwrap());
        let values: Vec<_> = s.terms.iter().enumerate()
            .map(|(i, t)| (!p.contains(i)).then(|| evaluate_term(t, &pa, &pb).unwrap()))
            .collect();
        let blocks = linear_decode(s, p, &values).unwrap().unwrap();
        prop_assert!(Matrix::assemble(&blocks).unwrap().max_relative_error(&fa.naive_mul(&fb).unwrap()) < 1e-12);
    }

    #[test]
    fn peel_implies_decodable_and_correct(bits in 0u32..1 << 16, a in int_matrix(2), b in int_matrix(2)) {
        let (s, table) = hybrid_2psmm();
        let p = FailurePattern(bits);
        if let Some(plan) = peel(s, p).unwrap() {
            prop_assert!(table.is_decodable(p));
            prop_assert!(replay(s, p, &plan).is_ok());
            let blocks = execute_plan(s, &plan, &node_values(s, p, &a, &b)).unwrap();
            prop_assert_eq!(Matrix::assemble(&blocks).unwrap(), a.naive_mul(&b).unwrap());
        }
    }

    #[test]
    fn decodability_is_monotone(bits in 0u32..1 << 16, extra in 0usize..16) {
        let (_, table) = hybrid_2psmm();
        let p = FailurePattern(bits);
        let more = FailurePattern(bits | 1 << extra);
        if !table.is_decodable(p) {
            prop_assert!(!table.is_decodable(more));
        }
    }

    #[test]
    fn failure_probability_is_monotone(p in 0.0f64..1.0, q in 0.0f64..1.0) {
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        for profile in profiles() {
            prop_assert!(p_fail_theoretical(profile, lo) <= p_fail_theoretical(profile, hi) + 1e-12);
        }
    }

    #[test]
    fn closed_form_bounded_by_binomial(c in 1u32..=3, k in 0u32..=21) {
        prop_assume!(k <= 7 * c);
        let fc = fc_replication_closed_form(c, k);
        prop_assert!(fc <= ftsmm::decode::binomial(u64::from(7 * c), u64::from(k)));
        if k == 7 * c {
            prop_assert_eq!(fc, 1);
        }
    }
}

#[test]
fn table_agrees_with_direct_oracle_on_hybrid() {
    let s = Scheme::parse("hybrid_sw").unwrap();
    let t = DecodabilityTable::new(&s).unwrap();
    for bits in (0..1u32 << 14).step_by(37) {
        assert_eq!(t.is_decodable(FailurePattern(bits)), is_decodable(&s, FailurePattern(bits)));
    }
}

#[test]
fn census_invariants() {
    for id in ["hybrid_sw", "hybrid_sw_1psmm", "hybrid_sw_2psmm", "hybrid_sw_2psmm_s7", "winograd_2copy"] {
        let c = decodable_pattern_census(&Scheme::parse(id).unwrap()).unwrap();
        assert_eq!(c.undecodable[0], 0, "{id}");
        assert_eq!(c.undecodable[c.m], 1, "{id}");
        assert!((0..=c.m).all(|k| c.undecodable[k] <= c.total_patterns(k)), "{id}");
    }
}

#[test]
fn parity_nodes_remove_fatal_pairs() {
    let pairs = |id: &str| decodable_pattern_census(&Scheme::parse(id).unwrap()).unwrap().undecodable[2];
    assert_eq!(pairs("hybrid_sw"), 2);
    assert_eq!(pairs("hybrid_sw_1psmm"), 1);
    assert_eq!(pairs("hybrid_sw_2psmm"), 0);
    assert_eq!(pairs("hybrid_sw_2psmm_s7"), 0);
}

#[test]
fn relation_document_round_trip() {
    let s = Scheme::parse("hybrid_sw").unwrap().with_relations(&SearchConfig::default()).unwrap();
    let set = s.relations().unwrap();
    let json = serde_json::to_string(&set.to_document()).unwrap();
    let back = RelationSet::from_document(&serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(&back, set);
}

#[test]
fn expansion_agrees_with_scalar_evaluation() {
    let a = IntMatrix::from_vec(2, 2, vec![3, -7, 11, 5]).unwrap();
    let b = IntMatrix::from_vec(2, 2, vec![-2, 13, 4, 9]).unwrap();
    let (pa, pb) = (a.partition().unwrap(), b.partition().unwrap());
    for t in &Scheme::parse("hybrid_sw_2psmm").unwrap().terms {
        let e: ExpansionVector = expand(t);
        let mut want = 0i64;
        for (j, bj) in pb.iter().enumerate() {
            for (i, ai) in pa.iter().enumerate() {
                want += i64::from(e.coeffs()[4 * j + i]) * ai.get(0, 0) * bj.get(0, 0);
            }
        }
        assert_eq!(evaluate_term(t, &pa, &pb).unwrap().get(0, 0), want, "{}", t.name());
    }
}
