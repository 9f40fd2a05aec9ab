use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use twisted_heights::places::{
    abs_rational, height_rational, product_formula, vec_norm, HeightKind, NormKind,
};
use twisted_heights::{FactoredReal, Place};

fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

/// Trial-division p-adic absolute value, `p^-v_p(x)`.
fn padic_oracle(x: &BigRational, p: i64) -> BigRational {
    let count = |n: &BigInt| {
        let mut n = n.abs();
        let mut k = 0i32;
        let pb = BigInt::from(p);
        while (&n % &pb).is_zero() {
            n /= &pb;
            k += 1;
        }
        k
    };
    let v = count(x.numer()) - count(x.denom());
    let base = rat(p, 1);
    if v >= 0 {
        BigRational::one() / num_traits::pow(base, v as usize)
    } else {
        num_traits::pow(base, (-v) as usize)
    }
}

fn primes_up_to(n: i64) -> Vec<i64> {
    (2..=n)
        .filter(|&k| (2..k).take_while(|d| d * d <= k).all(|d| k % d != 0))
        .collect()
}

fn nonzero_rat() -> impl Strategy<Value = BigRational> {
    (-5000i64..5000, 1i64..5000)
        .prop_filter("nonzero", |(a, _)| *a != 0)
        .prop_map(|(a, b)| rat(a, b))
}

fn int_vec(max_n: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec(-50i64..50, 1..=max_n)
        .prop_filter("nonzero", |v| v.iter().any(|x| *x != 0))
        .prop_map(|v| v.into_iter().map(|x| rat(x, 1)).collect())
}

fn rat_vec(n: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((-30i64..30, 1i64..12), n)
        .prop_map(|v| v.into_iter().map(|(a, b)| rat(a, b)).collect())
}

#[test]
fn product_formula_small_cases() {
    for (a, b) in [(1, 1), (-1, 1), (2, 1), (360, 7), (-1024, 243), (97, 1000)] {
        assert!(product_formula(&rat(a, b)).unwrap().is_one());
    }
    assert!(product_formula(&BigRational::zero()).is_err());
}

#[test]
fn factored_real_json_shape() {
    let x = FactoredReal::from_rational(&rat(12, 5)).unwrap();
    assert_eq!(x.to_json().to_string(), "[[2,2,1],[3,1,1],[5,-1,1]]");
    assert_eq!(FactoredReal::from_json(&x.to_json()).unwrap(), x);
    assert_eq!(FactoredReal::one().to_json().to_string(), "[]");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn product_formula_matches_trial_division(x in nonzero_rat()) {
        let mut prod = x.abs();
        for p in primes_up_to(5000) {
            let oracle = padic_oracle(&x, p);
            prop_assert_eq!(abs_rational(&x, &Place::prime(p)), oracle.clone());
            prod *= oracle;
        }
        prop_assert!(prod.is_one());
        prop_assert!(product_formula(&x).unwrap().is_one());
    }

    #[test]
    fn reciprocal_round_trip(x in nonzero_rat()) {
        let x = x.abs();
        let a = FactoredReal::from_rational(&x).unwrap();
        let b = FactoredReal::from_rational(&(BigRational::one() / &x)).unwrap();
        prop_assert!(a.mul(&b).is_one());
        prop_assert_eq!(a.to_rational(), Some(x));
    }

    #[test]
    fn power_distributes(a in nonzero_rat(), b in nonzero_rat(), num in -6i64..6, den in 1i64..6) {
        let fa = FactoredReal::from_rational(&a.abs()).unwrap();
        let fb = FactoredReal::from_rational(&b.abs()).unwrap();
        let e = rat(num, den);
        prop_assert_eq!(fa.mul(&fb).pow(&e), fa.pow(&e).mul(&fb.pow(&e)));
    }

    #[test]
    fn comparison_agrees_with_floats(a in nonzero_rat(), b in nonzero_rat(), num in -5i64..5, den in 1i64..5) {
        let e = rat(num, den);
        let fa = FactoredReal::from_rational(&a.abs()).unwrap().pow(&e);
        let fb = FactoredReal::from_rational(&b.abs()).unwrap();
        let (x, y) = (fa.ln_f64(), fb.ln_f64());
        if (x - y).abs() > 1e-9 {
            let want = if x < y { Ordering::Less } else { Ordering::Greater };
            prop_assert_eq!(fa.cmp(&fb), want);
        }
        prop_assert_eq!(fa.cmp(&fa.clone()), Ordering::Equal);
    }

    #[test]
    fn height_is_scale_invariant(x in int_vec(5), a in nonzero_rat()) {
        let y: Vec<BigRational> = x.iter().map(|c| c * &a).collect();
        for k in [HeightKind::H, HeightKind::H1, HeightKind::H2Squared] {
            prop_assert_eq!(height_rational(&x, k).unwrap(), height_rational(&y, k).unwrap());
        }
    }

    #[test]
    fn height_chain(x in int_vec(5)) {
        // n^-2 H1^2 <= n^-1 H2^2 <= H^2 <= H2^2 <= H1^2, squared throughout
        let n = rat(x.len() as i64, 1);
        let h = height_rational(&x, HeightKind::H).unwrap();
        let h1 = height_rational(&x, HeightKind::H1).unwrap();
        let h2sq = height_rational(&x, HeightKind::H2Squared).unwrap();
        let h1sq = &h1 * &h1;
        prop_assert!(&h1sq / (&n * &n) <= &h2sq / &n);
        prop_assert!(&h2sq / &n <= &h * &h);
        prop_assert!(&h * &h <= h2sq);
        prop_assert!(h2sq <= h1sq);
    }

    #[test]
    fn cauchy_schwarz_at_each_place((x, y) in (1usize..=5).prop_flat_map(|n| (rat_vec(n), rat_vec(n)))) {
        let dot: BigRational = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        // at infinity, squared
        let lhs = &dot * &dot;
        prop_assert!(lhs <= vec_norm(&x, &Place::Inf, NormKind::TwoSquared) * vec_norm(&y, &Place::Inf, NormKind::TwoSquared));
        for p in [2, 3, 5, 7, 11] {
            let v = Place::prime(p);
            let l = if dot.is_zero() { BigRational::zero() } else { abs_rational(&dot, &v) };
            prop_assert!(l <= vec_norm(&x, &v, NormKind::TwoSquared) * vec_norm(&y, &v, NormKind::TwoSquared));
        }
    }
}
