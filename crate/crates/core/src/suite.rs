//! Curated and seeded test systems, and a deterministic report over all of them.
//!
//! Every generator takes an explicit RNG; [`rng`] builds the crate's standard
//! one from a seed.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::bounds::{bound_constants, reduce_system, BoundParams};
use crate::error::Result;
use crate::filtration::{exceptional_subspace, filtration, special_case_t};
use crate::infima::{gap_experiment, minkowski_check, successive_infima, SystemInstance};
use crate::linalg::{q, qvec, rank, unit, QVec, Subspace};
use crate::places::Place;
use crate::twisted::{pair_invariants, q_int, validate, LocalData, TwistedPair};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ints(rows: &[&[i64]]) -> Vec<Vec<i64>> {
    rows.iter().map(|r| r.to_vec()).collect()
}

fn pair(n: usize, places: Vec<(Place, Vec<Vec<i64>>, Vec<(i64, i64)>)>) -> TwistedPair {
    TwistedPair::from_ints(n, &places).expect("curated pair is valid")
}

/// Coordinate forms at infinity with exponents `(1, -1)`.
pub fn e1() -> TwistedPair {
    pair(
        2,
        vec![(Place::Inf, ints(&[&[1, 0], &[0, 1]]), vec![(1, 1), (-1, 1)])],
    )
}

/// Forms `X1 + X2`, `X2` at infinity with exponents `(1, -1)`.
pub fn e2() -> TwistedPair {
    pair(
        2,
        vec![(Place::Inf, ints(&[&[1, 1], &[0, 1]]), vec![(1, 1), (-1, 1)])],
    )
}

/// Coordinate forms in three variables with exponents `(1, 0, -1)`.
pub fn e3() -> TwistedPair {
    pair(
        3,
        vec![(
            Place::Inf,
            ints(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]),
            vec![(1, 1), (0, 1), (-1, 1)],
        )],
    )
}

/// A pair whose filtration is known in closed form, with its expected slopes
/// `-mu_{l(i)}` and filtration dimensions.
#[derive(Clone, Debug)]
pub struct KnownPair {
    pub name: String,
    pub pair: TwistedPair,
    pub expected_slopes: Vec<BigRational>,
    pub dims: Vec<usize>,
}

fn known(name: &str, pair: TwistedPair, slopes: &[(i64, i64)], dims: &[usize]) -> KnownPair {
    KnownPair {
        name: name.into(),
        pair,
        expected_slopes: slopes
            .iter()
            .map(|&(a, b)| BigRational::new(a.into(), b.into()))
            .collect(),
        dims: dims.to_vec(),
    }
}

/// Diagonal and near-diagonal pairs whose infima are attained at rational points.
pub fn slope_suite() -> Vec<KnownPair> {
    vec![
        known("E1", e1(), &[(-1, 1), (1, 1)], &[0, 1, 2]),
        known("E2", e2(), &[(-1, 1), (1, 1)], &[0, 1, 2]),
        known("E3", e3(), &[(-1, 1), (0, 1), (1, 1)], &[0, 1, 2, 3]),
        known(
            "diag4",
            pair(
                4,
                vec![(
                    Place::Inf,
                    ints(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]),
                    vec![(1, 2), (1, 2), (-1, 2), (-1, 2)],
                )],
            ),
            &[(-1, 2), (-1, 2), (1, 2), (1, 2)],
            &[0, 2, 4],
        ),
        known(
            "near_diag3",
            pair(
                3,
                vec![(
                    Place::Inf,
                    ints(&[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]),
                    vec![(2, 3), (-1, 3), (-1, 3)],
                )],
            ),
            &[(-2, 3), (1, 3), (1, 3)],
            &[0, 1, 3],
        ),
        known(
            "padic2",
            pair(
                2,
                vec![(
                    Place::prime(2),
                    ints(&[&[1, 0], &[0, 1]]),
                    vec![(1, 1), (-1, 1)],
                )],
            ),
            &[(-1, 1), (1, 1)],
            &[0, 1, 2],
        ),
        known(
            "inf_and_3",
            pair(
                2,
                vec![
                    (Place::Inf, ints(&[&[1, 0], &[0, 1]]), vec![(1, 2), (-1, 2)]),
                    (
                        Place::prime(3),
                        ints(&[&[1, 0], &[0, 1]]),
                        vec![(1, 2), (-1, 2)],
                    ),
                ],
            ),
            &[(-1, 1), (1, 1)],
            &[0, 1, 2],
        ),
        known(
            "flat3",
            pair(
                3,
                vec![(
                    Place::Inf,
                    ints(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]),
                    vec![(0, 1), (0, 1), (0, 1)],
                )],
            ),
            &[(0, 1), (0, 1), (0, 1)],
            &[0, 3],
        ),
    ]
}

/// A random rational with numerator and denominator bounded by `bound`, nonzero.
pub fn random_rational<R: Rng>(rng: &mut R, bound: i64) -> BigRational {
    loop {
        let a = rng.gen_range(-bound..=bound);
        let b = rng.gen_range(1..=bound);
        if a != 0 {
            return BigRational::new(a.into(), b.into());
        }
    }
}

pub fn random_int_vector<R: Rng>(rng: &mut R, n: usize, bound: i64) -> QVec {
    loop {
        let v: QVec = (0..n).map(|_| q(rng.gen_range(-bound..=bound))).collect();
        if v.iter().any(|x| !x.is_zero()) {
            return v;
        }
    }
}

fn random_forms<R: Rng>(rng: &mut R, n: usize) -> Vec<QVec> {
    loop {
        let forms: Vec<QVec> = (0..n).map(|_| random_int_vector(rng, n, 2)).collect();
        if rank(&forms) == n {
            return forms;
        }
    }
}

/// Centre integer draws at each place, then scale so the maxima sum to 1.
fn normalized_exps<R: Rng>(rng: &mut R, n: usize, places: usize) -> Vec<Vec<BigRational>> {
    let nq = q(n as i64);
    let mut out: Vec<Vec<BigRational>> = (0..places)
        .map(|_| {
            let raw: Vec<BigRational> = (0..n).map(|_| q(rng.gen_range(-3..=3))).collect();
            let mean = raw.iter().sum::<BigRational>() / &nq;
            raw.iter().map(|c| c - &mean).collect()
        })
        .collect();
    let theta: BigRational = out.iter().map(|c| c.iter().max().unwrap().clone()).sum();
    if theta.is_positive() {
        for c in out.iter_mut().flatten() {
            *c /= &theta;
        }
    }
    out
}

fn random_places<R: Rng>(rng: &mut R) -> Vec<Place> {
    let mut places = vec![Place::Inf];
    if rng.gen_bool(0.5) {
        places.push(Place::prime(*[2, 3, 5].choose(rng).unwrap()));
    }
    places
}

/// A normalized pair with small integer forms at one or two places.
pub fn random_pair<R: Rng>(rng: &mut R, n: usize) -> TwistedPair {
    let places = random_places(rng);
    let exps = normalized_exps(rng, n, places.len());
    let active: BTreeMap<Place, LocalData> = places
        .into_iter()
        .zip(exps)
        .map(|(v, exps)| {
            (
                v,
                LocalData {
                    forms: random_forms(rng, n),
                    exps,
                },
            )
        })
        .collect();
    TwistedPair::new(n, active).expect("independent forms")
}

/// A normalized pair whose forms are drawn from `X_1, ..., X_n, X_1 + ... + X_n`.
pub fn random_special_pair<R: Rng>(rng: &mut R, n: usize) -> TwistedPair {
    let places = random_places(rng);
    let exps = normalized_exps(rng, n, places.len());
    let ones = vec![BigRational::one(); n];
    let active: BTreeMap<Place, LocalData> = places
        .into_iter()
        .zip(exps)
        .map(|(v, exps)| {
            let skip = rng.gen_range(0..=n);
            let mut forms: Vec<QVec> = (0..n).filter(|&i| i != skip).map(|i| unit(n, i)).collect();
            if skip < n {
                forms.push(ones.clone());
            }
            forms.shuffle(rng);
            (v, LocalData { forms, exps })
        })
        .collect();
    TwistedPair::new(n, active).expect("any n of the n+1 forms are independent")
}

/// A proper nonzero subspace: half generic, half built from the pair's own forms.
pub fn random_subspace<R: Rng>(rng: &mut R, pair: &TwistedPair) -> Subspace {
    let n = pair.n();
    let k = rng.gen_range(1..n);
    loop {
        let s = match rng.gen_range(0..4) {
            0 => Subspace::span(
                n,
                &(0..k)
                    .map(|_| random_int_vector(rng, n, 3))
                    .collect::<Vec<_>>(),
            ),
            1 => {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(rng);
                Subspace::span(n, &idx[..k].iter().map(|&i| unit(n, i)).collect::<Vec<_>>())
            }
            _ => {
                // common kernel of n - k forms drawn from the union
                let union = pair.form_union();
                let mut forms = union.clone();
                forms.shuffle(rng);
                let take = rng.gen_range(1..n).min(forms.len());
                let a = Subspace::common_kernel(n, &forms[..take]);
                if rng.gen_bool(0.3) {
                    forms.shuffle(rng);
                    a.sum(&Subspace::common_kernel(n, &forms[..take]))
                } else {
                    a
                }
            }
        };
        if !s.is_zero() && !s.is_full() {
            return s;
        }
    }
}

/// The 20-pair suite: E1, E2, E3, seven structured pairs and ten seeded random ones.
pub fn curated_pairs(seed: u64) -> Vec<(String, TwistedPair)> {
    let mut out: Vec<(String, TwistedPair)> = slope_suite()
        .into_iter()
        .map(|k| (k.name, k.pair))
        .collect();
    out.push((
        "mixed3".into(),
        pair(
            3,
            vec![
                (
                    Place::Inf,
                    ints(&[&[1, 2, 0], &[0, 1, 1], &[1, 0, 1]]),
                    vec![(1, 3), (1, 3), (-2, 3)],
                ),
                (
                    Place::prime(5),
                    ints(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, 1]]),
                    vec![(1, 3), (-1, 6), (-1, 6)],
                ),
            ],
        ),
    ));
    out.push((
        "special4".into(),
        pair(
            4,
            vec![(
                Place::Inf,
                ints(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[1, 1, 1, 1]]),
                vec![(3, 4), (-1, 4), (-1, 4), (-1, 4)],
            )],
        ),
    ));
    let mut r = rng(seed);
    for i in 0..10 {
        let n = 2 + i % 3;
        out.push((format!("random{i}"), random_pair(&mut r, n)));
    }
    out
}

fn sys(n: usize, eps: (i64, i64), places: Vec<(Place, Vec<Vec<i64>>, Vec<i64>)>) -> SystemInstance {
    let places = places
        .into_iter()
        .map(|(v, f, d)| {
            (
                v,
                LocalData {
                    forms: f.iter().map(|r| qvec(r)).collect(),
                    exps: d.into_iter().map(q).collect(),
                },
            )
        })
        .collect::<BTreeMap<_, _>>();
    SystemInstance::new(n, places, BigRational::new(eps.0.into(), eps.1.into()))
        .expect("curated system is valid")
}

/// Small systems of inequalities for the scanner.
pub fn scanner_suite() -> Vec<(String, SystemInstance)> {
    vec![
        (
            "axis".into(),
            sys(
                2,
                (1, 1),
                vec![(Place::Inf, ints(&[&[1, 0], &[0, 1]]), vec![-3, 0])],
            ),
        ),
        (
            "roth_like".into(),
            sys(
                2,
                (1, 1),
                vec![(Place::Inf, ints(&[&[1, -2], &[0, 1]]), vec![-2, -1])],
            ),
        ),
        (
            "two_places".into(),
            sys(
                2,
                (1, 1),
                vec![
                    (Place::Inf, ints(&[&[1, 1], &[0, 1]]), vec![-2, 0]),
                    (Place::prime(2), ints(&[&[1, 0], &[0, 1]]), vec![-1, 0]),
                ],
            ),
        ),
        (
            "three_vars".into(),
            sys(
                3,
                (1, 1),
                vec![(
                    Place::Inf,
                    ints(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, 1]]),
                    vec![-2, -2, 0],
                )],
            ),
        ),
    ]
}

/// Deterministic JSON report over the curated material. Identical seeds give
/// identical bytes.
pub fn full_suite_report(seed: u64) -> Result<String> {
    let mut pairs = Vec::new();
    for (name, p) in curated_pairs(seed) {
        let rep = validate(&p);
        let inv = pair_invariants(&p)?;
        let chain = filtration(&p)?;
        let t = exceptional_subspace(&p)?;
        let est = successive_infima(&p, &q_int(10), 2)?;
        pairs.push(json!({
            "name": name,
            "pair": p.to_json(),
            "normalized": rep.normalized_ok,
            "delta": inv.delta.to_json(),
            "h_l": inv.h_l.to_json(),
            "filtration": chain.to_json(),
            "exceptional_dim": t.dim(),
            "infima_q10": est.to_json(),
            "minkowski_q10": minkowski_check(&p, &q_int(10), 2)?.to_json(),
        }));
    }
    let mut r = rng(seed);
    let mut special = Vec::new();
    for _ in 0..5 {
        let n = r.gen_range(2..=4);
        let p = random_special_pair(&mut r, n);
        let fam = special_case_t(&p)?;
        special.push(json!({ "pair": p.to_json(), "blocks": fam }));
    }
    let mut gaps = Vec::new();
    for i in 0..3 {
        let n = 2 + i;
        let p = random_pair(&mut r, n);
        let a = BigRational::from_integer(BigInt::from(n * n));
        gaps.push(gap_experiment(&p, &q(1), &a, 3)?.to_json());
    }
    let mut reductions = Vec::new();
    for (name, s) in scanner_suite() {
        reductions.push(json!({ "name": name, "reduced": reduce_system(&s)?.to_json() }));
    }
    let bounds = vec![
        bound_constants("2.3", &BoundParams::new(2).delta(q(1)).r(2))?.to_json(),
        bound_constants(
            "8.1",
            &BoundParams::new(3)
                .delta(BigRational::new(1.into(), 2.into()))
                .r(4),
        )?
        .to_json(),
    ];
    let report: Value = json!({
        "seed": seed,
        "pairs": pairs,
        "special": special,
        "gap": gaps,
        "reductions": reductions,
        "bounds": bounds,
    });
    Ok(serde_json::to_string_pretty(&report).expect("serializable"))
}
