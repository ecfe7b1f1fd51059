use std::collections::HashMap;

use ftsmm::bilinear::{outer, Coeff4, ExpansionVector};
use ftsmm::decode::DecodabilityTable;
use ftsmm::peel::{peel, replay};
use ftsmm::scheme::{FailurePattern, Scheme};
use ftsmm::search::{is_rank_one, search_lp_with, ParityMode, SearchConfig};

#[test]
fn rank_one_detection_over_every_ternary_vector() {
    let mut oracle: HashMap<[i32; 16], (Coeff4, Coeff4)> = HashMap::new();
    for a in Coeff4::all_nonzero() {
        for b in Coeff4::all_nonzero() {
            oracle.entry(*outer(&a, &b).coeffs()).or_insert((a, b));
        }
    }
    // Every rank-one form arises from exactly two sign-flipped factorisations.
    assert_eq!(oracle.len(), 80 * 80 / 2);

    let mut found = 0usize;
    for n in 0..3u64.pow(16) {
        let mut c = [0i32; 16];
        let mut x = n;
        for slot in &mut c {
            *slot = (x % 3) as i32 - 1;
            x /= 3;
        }
        let v = ExpansionVector::from_coeffs(c);
        match (is_rank_one(&v), oracle.contains_key(&c)) {
            (Some((a, b)), true) => {
                assert_eq!(outer(&a, &b), v);
                assert!(a.entries().iter().find(|&&e| e != 0) == Some(&1));
                found += 1;
            }
            (None, false) => {}
            (got, want) => panic!("vector {c:?}: detected {got:?}, oracle says rank one = {want}"),
        }
    }
    assert_eq!(found, oracle.len());
}

#[test]
fn decodability_monotone_over_all_patterns() {
    for id in ["hybrid_sw", "hybrid_sw_2psmm"] {
        let s = Scheme::parse(id).unwrap();
        let t = DecodabilityTable::new(&s).unwrap();
        for bits in 0..1u32 << s.m() {
            if t.is_decodable(FailurePattern(bits)) {
                for i in FailurePattern(bits).indices() {
                    assert!(t.is_decodable(FailurePattern(bits & !(1 << i))), "{id} {bits:#x} minus {i}");
                }
            }
        }
    }
}

#[test]
fn peel_success_implies_decodable() {
    for id in ["hybrid_sw", "hybrid_sw_2psmm"] {
        let s = Scheme::parse(id).unwrap().with_relations(&SearchConfig::default()).unwrap();
        let t = DecodabilityTable::new(&s).unwrap();
        let mut peeled = 0u32;
        for bits in 0..1u32 << s.m() {
            let p = FailurePattern(bits);
            if let Some(plan) = peel(&s, p).unwrap() {
                assert!(t.is_decodable(p), "{id} {}", p.hex());
                replay(&s, p, &plan).unwrap();
                peeled += 1;
            }
        }
        assert!(peeled > 0);
    }
}

#[test]
fn serial_and_parallel_search_agree() {
    let s = Scheme::parse("hybrid_sw_1psmm").unwrap();
    let parallel = search_lp_with(&s.terms, &s.id, &SearchConfig::default()).unwrap();
    let serial = search_lp_with(&s.terms, &s.id, &SearchConfig { parallel: false, ..SearchConfig::default() }).unwrap();
    assert_eq!(parallel, serial);
}

#[test]
fn elementary_parity_mode_finds_none_on_hybrid() {
    let s = Scheme::parse("hybrid_sw").unwrap();
    let config = SearchConfig { parity_mode: ParityMode::Elementary, ..SearchConfig::default() };
    let set = search_lp_with(&s.terms, &s.id, &config).unwrap();
    assert!(set.parities.is_empty());
    assert_eq!(set.locals.len(), 57);
}

#[test]
fn k_max_truncates_support() {
    let s = Scheme::parse("hybrid_sw").unwrap();
    let config = SearchConfig { k_max: Some(4), ..SearchConfig::default() };
    let set = search_lp_with(&s.terms, &s.id, &config).unwrap();
    assert!(set.locals.iter().chain(&set.parities).all(|r| r.support_size() <= 4));
    assert_eq!(set.locals.len(), 10);
}
