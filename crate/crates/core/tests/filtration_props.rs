use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;
use twisted_heights::exterior::subspace_height_sq;
use twisted_heights::filtration::{
    candidate_lattice, exceptional_subspace, filtration, flag_subspaces, index_set, local_weight,
    local_weight_from_flags, quotient_pair, quotient_pair_raw, quotient_preimage, restrict_pair,
    special_case_t, weight, DEFAULT_LATTICE_CAP,
};
use twisted_heights::linalg::{dot, qvec, rank, QVec};
use twisted_heights::places::{height_rational, HeightKind};
use twisted_heights::suite::{self, random_pair, random_special_pair, random_subspace};
use twisted_heights::twisted::{compose, shift_exponents, validate};
use twisted_heights::{Place, Subspace, TwistedPair};

fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Minimum exponent sum over `dim U` forms whose restrictions to `U` are independent.
fn brute_local(forms: &[QVec], exps: &[BigRational], u: &Subspace) -> BigRational {
    let k = u.dim();
    if k == 0 {
        return BigRational::zero();
    }
    let restricted: Vec<QVec> = forms
        .iter()
        .map(|f| u.basis().iter().map(|b| dot(f, b)).collect())
        .collect();
    subsets(forms.len(), k)
        .into_iter()
        .filter(|s| rank(&s.iter().map(|&i| restricted[i].clone()).collect::<Vec<_>>()) == k)
        .map(|s| s.iter().map(|&i| exps[i].clone()).sum::<BigRational>())
        .min()
        .expect("forms span the dual")
}

fn brute_weight(pair: &TwistedPair, u: &Subspace) -> BigRational {
    pair.active()
        .values()
        .map(|d| brute_local(&d.forms, &d.exps, u))
        .sum()
}

fn mu(pair: &TwistedPair, u: &Subspace) -> BigRational {
    let n = pair.n();
    (weight(pair, &Subspace::full(n)) - weight(pair, u))
        / BigRational::from_integer(((n - u.dim()) as i64).into())
}

fn case() -> impl Strategy<Value = (TwistedPair, Vec<Subspace>)> {
    (2usize..=4, any::<u64>()).prop_map(|(n, seed)| {
        let mut r = suite::rng(seed);
        let p = random_pair(&mut r, n);
        let us = (0..4).map(|_| random_subspace(&mut r, &p)).collect();
        (p, us)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn greedy_weight_equals_brute_force((pair, us) in case()) {
        for u in &us {
            prop_assert_eq!(weight(&pair, u), brute_weight(&pair, u));
        }
        prop_assert_eq!(weight(&pair, &Subspace::full(pair.n())), brute_weight(&pair, &Subspace::full(pair.n())));
    }

    #[test]
    fn weight_from_flags((pair, us) in case()) {
        for u in &us {
            for (v, d) in pair.active() {
                prop_assert_eq!(local_weight_from_flags(&pair, v, u), local_weight(&d.forms, &d.exps, u));
            }
        }
    }

    #[test]
    fn submodularity((pair, us) in case()) {
        for a in &us {
            for b in &us {
                let lhs = weight(&pair, &a.intersect(b)) + weight(&pair, &a.sum(b));
                prop_assert!(lhs >= weight(&pair, a) + weight(&pair, b));
            }
        }
    }

    #[test]
    fn index_sets_grow((pair, us) in case()) {
        for a in &us {
            for b in &us {
                let big = a.sum(b);
                for d in pair.active().values() {
                    let small = index_set(&d.forms, &d.exps, a);
                    let large = index_set(&d.forms, &d.exps, &big);
                    prop_assert!(small.iter().all(|i| large.contains(i)));
                }
            }
        }
    }

    #[test]
    fn exceptional_subspace_minimizes_mu((pair, us) in case()) {
        let t = exceptional_subspace(&pair).unwrap();
        let best = mu(&pair, &t);
        for u in us.iter().chain(std::iter::once(&Subspace::zero(pair.n()))) {
            let m = mu(&pair, u);
            prop_assert!(m > best || (m == best && u.dim() >= t.dim()));
        }
    }

    #[test]
    fn filtration_is_concave((pair, _us) in case()) {
        let chain = filtration(&pair).unwrap();
        let slopes = chain.slopes();
        prop_assert!(slopes.windows(2).all(|w| w[0] > w[1]));
        prop_assert!(chain.chain.last().unwrap().space.is_full());
        // every candidate point lies on or under the polygon
        let pts: Vec<(usize, BigRational)> = chain.chain.iter().map(|w| (w.space.dim(), w.weight.clone())).collect();
        for u in candidate_lattice(&pair, DEFAULT_LATTICE_CAP).unwrap() {
            let d = u.dim();
            let seg = pts.windows(2).find(|s| s[0].0 <= d && d <= s[1].0).unwrap();
            let (d0, w0) = &seg[0];
            let (d1, w1) = &seg[1];
            let line = w0 + (w1 - w0) * rat((d - d0) as i64, (d1 - d0) as i64);
            prop_assert!(weight(&pair, &u) <= line);
        }
    }

    #[test]
    fn exceptional_subspace_shift_invariant((pair, _us) in case(), a in -3i64..3, b in -3i64..3) {
        let mut theta = BTreeMap::new();
        theta.insert(Place::Inf, rat(a, 2));
        theta.insert(Place::prime(7), rat(b, 3));
        let shifted = shift_exponents(&pair, &theta);
        prop_assert_eq!(exceptional_subspace(&shifted).unwrap(), exceptional_subspace(&pair).unwrap());
    }

    #[test]
    fn exceptional_subspace_under_composition((pair, _us) in case(), entries in prop::collection::vec(-2i64..=2, 16)) {
        let n = pair.n();
        let phi: Vec<QVec> = (0..n).map(|i| (0..n).map(|j| rat(entries[i * 4 + j] + if i == j { 3 } else { 0 }, 1)).collect()).collect();
        prop_assume!(rank(&phi) == n);
        let composed = compose(&pair, &phi).unwrap();
        let t = exceptional_subspace(&pair).unwrap();
        prop_assert_eq!(exceptional_subspace(&composed).unwrap(), t.preimage(&phi));
    }

    #[test]
    fn chain_heights_bounded((pair, _us) in case()) {
        let hmax = pair.form_union().iter().map(|f| height_rational(f, HeightKind::H2Squared).unwrap()).max().unwrap();
        let bound = num_traits::pow(hmax, 4usize.pow(pair.n() as u32));
        for w in &filtration(&pair).unwrap().chain {
            prop_assert!(subspace_height_sq(&w.space) <= bound);
        }
    }

    #[test]
    fn quotient_weights((pair, us) in case(), seed in any::<u64>()) {
        let t = &us[0];
        let raw = quotient_pair_raw(&pair, t).unwrap();
        let wt = weight(&pair, t);
        let mut r = suite::rng(seed);
        let m = raw.n();
        for _ in 0..4 {
            let k = r.gen_range(0..=m);
            let rows: Vec<QVec> = (0..k).map(|_| suite::random_int_vector(&mut r, m, 3)).collect();
            let u = Subspace::span(m, &rows);
            prop_assert_eq!(weight(&raw, &u), weight(&pair, &quotient_preimage(t, &u)) - &wt);
        }
        // the normalized quotient by T is again a valid pair
        if validate(&pair).normalized_ok {
            let texc = exceptional_subspace(&pair).unwrap();
            if !texc.is_zero() {
                let qn = quotient_pair(&pair, &texc).unwrap();
                prop_assert!(validate(&qn).core_ok);
            }
        }
    }

    #[test]
    fn restriction_weights((pair, us) in case(), seed in any::<u64>()) {
        let t = &us[0];
        let res = restrict_pair(&pair, t).unwrap();
        let k = t.dim();
        let mut r = suite::rng(seed);
        for _ in 0..4 {
            let j = r.gen_range(1..=k);
            let coords: Vec<QVec> = (0..j).map(|_| suite::random_int_vector(&mut r, k, 3)).collect();
            let inner = Subspace::span(k, &coords);
            let image: Vec<QVec> = inner
                .basis()
                .iter()
                .map(|c| (0..pair.n()).map(|x| c.iter().zip(t.basis()).map(|(a, b)| a * &b[x]).sum()).collect())
                .collect();
            prop_assert_eq!(weight(&res, &inner), weight(&pair, &Subspace::span(pair.n(), &image)));
        }
    }
}

fn blocks_to_subspace(n: usize, blocks: &[Vec<usize>]) -> Subspace {
    let eqs: Vec<QVec> = blocks
        .iter()
        .map(|b| {
            (0..n)
                .map(|j| {
                    if b.contains(&j) {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    Subspace::common_kernel(n, &eqs)
}

#[test]
fn special_case_agrees_on_seeded_systems() {
    let mut r = suite::rng(11);
    for _ in 0..40 {
        let n = r.gen_range(2..=4);
        let p = random_special_pair(&mut r, n);
        let blocks = special_case_t(&p).unwrap();
        assert_eq!(
            blocks_to_subspace(n, &blocks),
            exceptional_subspace(&p).unwrap()
        );
    }
}

#[test]
fn special_case_rejects_other_forms() {
    let mixed = suite::curated_pairs(0)
        .into_iter()
        .find(|(n, _)| n == "mixed3")
        .unwrap()
        .1;
    assert!(matches!(
        special_case_t(&mixed),
        Err(twisted_heights::Error::Unsupported(_))
    ));
    // X1 + X2 is the all-ones form in two variables
    assert_eq!(special_case_t(&suite::e2()).unwrap(), vec![vec![1]]);
}

#[test]
fn flags_of_e3() {
    let f = flag_subspaces(&suite::e3(), &Place::Inf);
    let dims: Vec<usize> = f.iter().map(|s| s.dim()).collect();
    assert_eq!(dims, vec![3, 2, 1, 0]);
    // ascending exponents: X3 first
    assert!(f[1].contains(&qvec(&[1, 0, 0])) && f[1].contains(&qvec(&[0, 1, 0])));
    assert_eq!(f[2], Subspace::span(3, &[qvec(&[1, 0, 0])]));
}

#[test]
fn e1_filtration_and_t() {
    let p = suite::e1();
    let t = exceptional_subspace(&p).unwrap();
    assert_eq!(t, Subspace::span(2, &[qvec(&[1, 0])]));
    let c = filtration(&p).unwrap();
    assert_eq!(c.slopes(), vec![rat(1, 1), rat(-1, 1)]);
}

#[test]
fn lattice_cap_is_enforced() {
    let p = suite::e3();
    assert!(matches!(
        candidate_lattice(&p, 2),
        Err(twisted_heights::Error::LatticeOverflow { cap: 2 })
    ));
}
