//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use twisted_heights::bounds::{
    bound_constants, bound_constants_from, reduce_system, t0_consistency, BoundParams, THEOREMS,
};
use twisted_heights::exterior::{
    hat_subspace, hat_vectors, orth_complement, subspace_height_sq, wedge,
};
use twisted_heights::filtration::{exceptional_subspace, special_case_t, weight};
use twisted_heights::infima::{
    default_box, gap_experiment, minkowski_check, qv, scan_system, slope_profile, MAX_CANDIDATES,
};
use twisted_heights::linalg::{det, dot, rank, unit, QVec};
use twisted_heights::places::{
    abs_rational, height_rational, product_formula, vec_norm, HeightKind, NormKind,
};
use twisted_heights::suite::{
    self, curated_pairs, random_pair, random_special_pair, random_subspace, slope_suite,
};
use twisted_heights::twisted::q_int;
use twisted_heights::{Place, Subspace, TwistedPair};

type Outcome = Result<String, String>;

fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() <= limit, || {
        format!("took {:.1?}, limit {:.0?}", start.elapsed(), limit)
    })
}

fn trial_factor(mut n: u64) -> Vec<(u64, i64)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut k = 0;
        while n % d == 0 {
            n /= d;
            k += 1;
        }
        if k > 0 {
            out.push((d, k));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn product_formula_check() -> Outcome {
    let start = Instant::now();
    let mut r = suite::rng(1);
    for _ in 0..1000 {
        let a: i64 = r.gen_range(1..=1_000_000) * if r.gen_bool(0.5) { -1 } else { 1 };
        let b: i64 = r.gen_range(1..=1_000_000);
        let x = rat(a, b);
        let mut prod = x.abs();
        let mut primes: Vec<u64> = trial_factor(a.unsigned_abs())
            .into_iter()
            .chain(trial_factor(b as u64))
            .map(|(p, _)| p)
            .collect();
        primes.sort();
        primes.dedup();
        for p in primes {
            let v = Place::Prime(BigInt::from(p));
            let local = abs_rational(&x, &v);
            // p^{-v_p(x)} by direct counting
            let vp = trial_factor(a.unsigned_abs())
                .iter()
                .find(|f| f.0 == p)
                .map_or(0, |f| f.1)
                - trial_factor(b as u64)
                    .iter()
                    .find(|f| f.0 == p)
                    .map_or(0, |f| f.1);
            let oracle = if vp >= 0 {
                BigRational::one() / num_traits::pow(rat(p as i64, 1), vp as usize)
            } else {
                num_traits::pow(rat(p as i64, 1), (-vp) as usize)
            };
            ensure(local == oracle, || {
                format!("|{x}|_{p} = {local}, expected {oracle}")
            })?;
            prod *= local;
        }
        ensure(prod.is_one(), || {
            format!("product over places of {x} is {prod}")
        })?;
        ensure(
            product_formula(&x).map_err(|e| e.to_string())?.is_one(),
            || format!("library product for {x}"),
        )?;
    }
    within(start, Duration::from_secs(5))?;
    Ok("1000 rationals".into())
}

fn height_chain_check() -> Outcome {
    let mut r = suite::rng(2);
    for _ in 0..1000 {
        let n = r.gen_range(1..=5);
        let x = loop {
            let v = suite::random_int_vector(&mut r, n, 60);
            if v.iter().any(|c| !c.is_zero()) {
                break v;
            }
        };
        let nn = rat(n as i64, 1);
        let h = height_rational(&x, HeightKind::H).map_err(|e| e.to_string())?;
        let h1 = height_rational(&x, HeightKind::H1).map_err(|e| e.to_string())?;
        let h2sq = height_rational(&x, HeightKind::H2Squared).map_err(|e| e.to_string())?;
        let h1sq = &h1 * &h1;
        let hsq = &h * &h;
        ensure(
            &h1sq / (&nn * &nn) <= &h2sq / &nn && &h2sq / &nn <= hsq && hsq <= h2sq && h2sq <= h1sq,
            || format!("chain fails at {x:?}"),
        )?;
        let y = suite::random_int_vector(&mut r, n, 60);
        let d = dot(&x, &y);
        for v in [
            Place::Inf,
            Place::prime(2),
            Place::prime(3),
            Place::prime(5),
        ] {
            let lhs = if d.is_zero() {
                BigRational::zero()
            } else if v.is_finite() {
                abs_rational(&d, &v)
            } else {
                &d * &d
            };
            let rhs =
                vec_norm(&x, &v, NormKind::TwoSquared) * vec_norm(&y, &v, NormKind::TwoSquared);
            ensure(lhs <= rhs, || format!("Cauchy-Schwarz fails at {v:?}"))?;
        }
    }
    Ok("1000 vectors, n <= 5".into())
}

fn leibniz(m: &[QVec]) -> BigRational {
    fn go(p: &mut Vec<usize>, k: usize, m: &[QVec], total: &mut BigRational) {
        if k == p.len() {
            let inv = (0..p.len())
                .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            let prod: BigRational = p
                .iter()
                .enumerate()
                .map(|(i, &j)| m[i][j].clone())
                .product();
            if inv % 2 == 0 {
                *total += prod
            } else {
                *total -= prod
            }
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            go(p, k + 1, m, total);
            p.swap(k, i);
        }
    }
    let mut p: Vec<usize> = (0..m.len()).collect();
    let mut t = BigRational::zero();
    go(&mut p, 0, m, &mut t);
    t
}

fn exterior_check() -> Outcome {
    let mut r = suite::rng(3);
    let mut hat_cases = 0;
    for n in 2..=4 {
        for p in 1..=n {
            for _ in 0..25 {
                let rows: Vec<QVec> = (0..n)
                    .map(|_| suite::random_int_vector(&mut r, n, 4))
                    .collect();
                let d = leibniz(&rows)
                    .to_integer()
                    .pow(binomial(n - 1, p - 1) as u32);
                let got = det(&hat_vectors(&rows, p).map_err(|e| e.to_string())?);
                let want = BigRational::from_integer(d);
                ensure(got == want || got == -want.clone(), || {
                    format!("hat det n={n} p={p}: {got} vs {want}")
                })?;
                hat_cases += 1;
            }
        }
    }
    for _ in 0..500 {
        let n = r.gen_range(2..=4);
        let p = r.gen_range(1..=n);
        let ls: Vec<QVec> = (0..p)
            .map(|_| suite::random_int_vector(&mut r, n, 4))
            .collect();
        let xs: Vec<QVec> = (0..p)
            .map(|_| suite::random_int_vector(&mut r, n, 4))
            .collect();
        let lhs: BigRational = wedge(&ls)
            .unwrap()
            .iter()
            .zip(&wedge(&xs).unwrap())
            .map(|(a, b)| a * b)
            .sum();
        let gram: Vec<QVec> = ls
            .iter()
            .map(|l| xs.iter().map(|x| dot(l, x)).collect())
            .collect();
        ensure(lhs == leibniz(&gram), || "Laplace identity fails".into())?;
    }
    let mut subspaces = 0;
    while subspaces < 500 {
        let n = r.gen_range(2..=5);
        let k = r.gen_range(1..n);
        let rows: Vec<QVec> = (0..k)
            .map(|_| suite::random_int_vector(&mut r, n, 5))
            .collect();
        let t = Subspace::span(n, &rows);
        if t.is_zero() || t.is_full() {
            continue;
        }
        let h = subspace_height_sq(&t);
        ensure(subspace_height_sq(&orth_complement(&t)) == h, || {
            format!("duality fails for {rows:?}")
        })?;
        let mut basis = t.basis().to_vec();
        let mut span = t.clone();
        for i in 0..n {
            let s = span.sum(&Subspace::span(n, &[unit(n, i)]));
            if s.dim() > span.dim() {
                basis.push(unit(n, i));
                span = s;
            }
        }
        let hat = hat_subspace(&basis, t.dim()).map_err(|e| e.to_string())?;
        ensure(subspace_height_sq(&hat) == h, || {
            format!("hat subspace height fails for {rows:?}")
        })?;
        subspaces += 1;
    }
    Ok(format!(
        "{hat_cases} hat determinants, 500 Laplace, 500 subspaces"
    ))
}

/// Minimum exponent sum over `dim U` forms independent on `U`.
fn brute_weight(pair: &TwistedPair, u: &Subspace) -> BigRational {
    let k = u.dim();
    let mut total = BigRational::zero();
    for d in pair.active().values() {
        if k == 0 {
            continue;
        }
        let restricted: Vec<QVec> = d
            .forms
            .iter()
            .map(|f| u.basis().iter().map(|b| dot(f, b)).collect())
            .collect();
        let m = d.forms.len();
        let best = (0u32..1 << m)
            .filter(|s| s.count_ones() as usize == k)
            .filter(|s| {
                rank(
                    &(0..m)
                        .filter(|i| s >> i & 1 == 1)
                        .map(|i| restricted[i].clone())
                        .collect::<Vec<_>>(),
                ) == k
            })
            .map(|s| {
                (0..m)
                    .filter(|i| s >> i & 1 == 1)
                    .map(|i| d.exps[i].clone())
                    .sum::<BigRational>()
            })
            .min()
            .unwrap();
        total += best;
    }
    total
}

fn weight_check() -> Outcome {
    let mut r = suite::rng(4);
    for i in 0..500 {
        let n = r.gen_range(2..=4);
        let p = random_pair(&mut r, n);
        let u = random_subspace(&mut r, &p);
        ensure(weight(&p, &u) == brute_weight(&p, &u), || {
            format!("instance {i}: greedy and brute force differ")
        })?;
    }
    Ok("500 instances".into())
}

fn submodularity_check() -> Outcome {
    let mut r = suite::rng(5);
    for i in 0..1000 {
        let n = r.gen_range(2..=4);
        let p = random_pair(&mut r, n);
        let a = random_subspace(&mut r, &p);
        let b = random_subspace(&mut r, &p);
        let lhs = weight(&p, &a.intersect(&b)) + weight(&p, &a.sum(&b));
        ensure(lhs >= weight(&p, &a) + weight(&p, &b), || {
            format!("pair {i} violates submodularity")
        })?;
    }
    Ok("1000 pairs".into())
}

fn mu(pair: &TwistedPair, full: &BigRational, u: &Subspace) -> BigRational {
    (full - weight(pair, u)) / rat((pair.n() - u.dim()) as i64, 1)
}

fn falsification_check() -> Outcome {
    let start = Instant::now();
    let pairs = curated_pairs(0);
    let mut r = suite::rng(6);
    for (name, p) in &pairs {
        let t = exceptional_subspace(p).map_err(|e| format!("{name}: {e}"))?;
        let full = weight(p, &Subspace::full(p.n()));
        let best = mu(p, &full, &t);
        for _ in 0..10_000 {
            let u = random_subspace(&mut r, p);
            if u.is_full() {
                continue;
            }
            let m = mu(p, &full, &u);
            ensure(m > best || (m == best && u.dim() >= t.dim()), || {
                format!("{name}: subspace beats T")
            })?;
        }
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!("{} pairs x 10^4 subspaces", pairs.len()))
}

fn special_case_check() -> Outcome {
    let mut r = suite::rng(7);
    for i in 0..100 {
        let n = r.gen_range(2..=5);
        let p = random_special_pair(&mut r, n);
        let blocks = special_case_t(&p).map_err(|e| format!("system {i}: {e}"))?;
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
        ensure(
            Subspace::common_kernel(n, &eqs) == exceptional_subspace(&p).unwrap(),
            || format!("system {i}: blocks disagree"),
        )?;
    }
    Ok("100 systems".into())
}

fn minkowski_suite_check() -> Outcome {
    let mut upper_fail = Vec::new();
    let mut runs = 0;
    for (name, p) in curated_pairs(0) {
        for q in [10, 100, 1000] {
            let qq = q_int(q);
            let b = default_box(&p, &qq, MAX_CANDIDATES);
            let rep = minkowski_check(&p, &qq, b).map_err(|e| format!("{name}: {e}"))?;
            ensure(rep.lower_ok, || format!("{name} Q={q}: lower bound fails"))?;
            if !rep.upper_ok {
                upper_fail.push(format!("{name}@{q}"));
            }
            runs += 1;
        }
    }
    ensure(upper_fail.is_empty(), || {
        format!(
            "upper bound not reached at the default box: {}",
            upper_fail.join(", ")
        )
    })?;
    Ok(format!("{runs} runs, both bounds"))
}

fn slope_check() -> Outcome {
    let q = q_int(10_000);
    let mut worst = 0.0f64;
    for k in slope_suite() {
        let start = Instant::now();
        let prof = slope_profile(&k.pair, std::slice::from_ref(&q), &|q| {
            default_box(&k.pair, q, MAX_CANDIDATES)
        })
        .map_err(|e| format!("{}: {e}", k.name))?;
        let dev = prof.max_deviation(0);
        worst = worst.max(dev);
        ensure(dev <= 0.05, || format!("{}: deviation {dev:.4}", k.name))?;
        ensure(prof.spans_match[0], || {
            format!("{}: spans do not match the filtration", k.name)
        })?;
        ensure(prof.expected == k.expected_slopes, || {
            format!("{}: filtration slopes differ from the closed form", k.name)
        })?;
        within(start, Duration::from_secs(60)).map_err(|e| format!("{}: {e}", k.name))?;
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn gap_check() -> Outcome {
    let mut r = suite::rng(10);
    for i in 0..20 {
        let n = r.gen_range(2..=4);
        let p = random_pair(&mut r, n);
        let a = rat((n * n) as i64, 1);
        let g = gap_experiment(&p, &BigRational::one(), &a, 10)
            .map_err(|e| format!("pair {i}: {e}"))?;
        ensure(g.proper, || format!("pair {i}: solutions span everything"))?;
    }
    Ok("20 pairs".into())
}

fn bounds_check() -> Outcome {
    let mut compared = 0;
    for thm in THEOREMS {
        for (n, dinv, r) in [(2u64, 1i64, 2u64), (3, 4, 9), (6, 10, 30)] {
            let p = BoundParams::new(n)
                .delta(rat(1, dinv))
                .eps(rat(1, dinv))
                .r(r)
                .s(2)
                .h_l(rat(7, 1));
            let a = bound_constants(thm, &p).map_err(|e| e.to_string())?;
            let b = bound_constants_from(thm, &p, 320).map_err(|e| e.to_string())?;
            for (x, y) in a.constants.iter().zip(&b.constants) {
                ensure(x.agrees(y, 10), || {
                    format!("{thm} {}: ladders disagree", x.name)
                })?;
                compared += 1;
            }
        }
    }
    let mut grid = 0;
    for n in 2u64..=6 {
        for r in [6u64, 8, 10, 16, 30] {
            for dinv in [1i64, 2, 3, 5, 10] {
                ensure(
                    t0_consistency(n, r, &rat(1, dinv)).map_err(|e| e.to_string())?,
                    || format!("t0 at n={n} R={r} 1/delta={dinv}"),
                )?;
                grid += 1;
            }
        }
    }
    for (name, sys) in suite::scanner_suite() {
        let red = reduce_system(&sys).map_err(|e| e.to_string())?;
        let rep = scan_system(&sys, &rat(8, 1), 8).map_err(|e| e.to_string())?;
        for s in &rep.solutions {
            ensure(red.predicate(&qv(&s.x)).map_err(|e| e.to_string())?, || {
                format!("{name}: {:?}", s.x)
            })?;
        }
    }
    Ok(format!("{compared} constants, {grid} grid points"))
}

fn determinism_check() -> Outcome {
    let a = suite::full_suite_report(0).map_err(|e| e.to_string())?;
    let b = suite::full_suite_report(0).map_err(|e| e.to_string())?;
    ensure(a == b, || "reports differ".into())?;
    Ok(format!("{} bytes", a.len()))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("product formula", product_formula_check),
        ("height chain and Cauchy-Schwarz", height_chain_check),
        ("exterior identities", exterior_check),
        ("greedy weight vs brute force", weight_check),
        ("submodularity", submodularity_check),
        ("exceptional subspace falsification", falsification_check),
        ("special case agrees", special_case_check),
        ("Minkowski bounds", minkowski_suite_check),
        ("slopes at Q = 10^4", slope_check),
        ("gap principle", gap_check),
        ("bound constants", bounds_check),
        ("deterministic report", determinism_check),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let t = start.elapsed();
        match out {
            Ok(detail) => println!("PASS {:>2} {name} ({detail}) [{t:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{t:.2?}]", i + 1)
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
