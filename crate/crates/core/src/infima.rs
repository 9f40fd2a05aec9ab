//! Brute-force estimates of successive infima over rational points, and the
//! experiments built on them.
//!
//! Estimates are upper bounds: the true infimum over algebraic points is never
//! larger than the value found among the enumerated rational points.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact_reals::FactoredReal;
use crate::exterior::{combinations, wedge};
use crate::filtration::{exceptional_subspace, exterior_pair, filtration};
use crate::interval::ratio_to_f64;
use crate::linalg::{content, det, primitive_normalized, rank, Echelon, QVec, Subspace};
use crate::places::{abs_rational, sup_norm, Place};
use crate::twisted::{
    binomial, pair_invariants, parse_matrix, parse_qvec, parse_rational, qvec_json, rational_json,
    twisted_height, HeightEvaluator, HeightValue, LocalData, TwistedPair,
};

/// Default cap on enumerated candidates per search.
pub const MAX_CANDIDATES: u64 = 1_000_000;

/// Number of sign-normalized vectors in `[-b, b]^n`.
fn box_count(n: usize, b: u64) -> f64 {
    ((2 * b + 1) as f64).powi(n as i32) / 2.0
}

/// Largest box whose candidate count stays within `max_candidates`.
pub fn box_cap(n: usize, max_candidates: u64) -> u64 {
    let mut b = 1u64;
    while box_count(n, b + 1) <= max_candidates as f64 {
        b += 1;
        if b >= max_candidates {
            break;
        }
    }
    b
}

/// `ceil(Q^{c_max})` with `c_max` the largest `|c_iv|`, capped by the candidate budget.
pub fn default_box(pair: &TwistedPair, q: &FactoredReal, max_candidates: u64) -> u64 {
    let c_max = pair
        .active()
        .values()
        .flat_map(|d| d.exps.iter().map(|c| c.abs()))
        .max()
        .unwrap_or_else(BigRational::zero);
    let f = (ratio_to_f64(&c_max) * q.ln_f64()).exp();
    let r = f.round();
    let b = if (f - r).abs() <= 1e-9 * f.max(1.0) {
        r
    } else {
        f.ceil()
    };
    let b = if b.is_finite() && b < u64::MAX as f64 {
        b as u64
    } else {
        u64::MAX
    };
    b.clamp(1, box_cap(pair.n(), max_candidates))
}

/// Primitive integer vectors of sup-norm at most `b`, first nonzero coordinate
/// positive, ordered by sup-norm shell and then lexicographically.
pub fn primitive_vectors(n: usize, b: u64) -> Vec<Vec<i64>> {
    let b = b as i64;
    let mut out = Vec::new();
    let mut x = vec![-b; n];
    loop {
        let lead = x.iter().find(|&&c| c != 0);
        if lead.is_some_and(|&c| c > 0) && x.iter().fold(0i64, |g, &c| g.gcd(&c)) == 1 {
            out.push(x.clone());
        }
        let mut i = n;
        loop {
            if i == 0 {
                out.sort_by_key(|v| v.iter().map(|c| c.abs()).max().unwrap());
                return out;
            }
            i -= 1;
            if x[i] < b {
                x[i] += 1;
                break;
            }
            x[i] = -b;
        }
    }
}

/// Integer vector as a rational vector.
pub fn qv(x: &[i64]) -> QVec {
    x.iter()
        .map(|&c| BigRational::from_integer(c.into()))
        .collect()
}

fn sign_normalize(v: &[BigInt]) -> Option<Vec<i64>> {
    let q: QVec = v
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    primitive_normalized(&q)
        .iter()
        .map(|c| c.to_i64())
        .collect()
}

/// Float keys `ln H(x)` computed with machine integers; only available for
/// coordinate default forms and forms whose integer parts fit in 64 bits.
struct FastKeys {
    places: Vec<(Option<f64>, Vec<(Vec<i64>, f64)>)>,
    inf_active: bool,
}

impl FastKeys {
    fn new(pair: &TwistedPair, ln_q: f64) -> Option<Self> {
        if !pair.has_identity_defaults() {
            return None;
        }
        let mut places = Vec::new();
        for (v, d) in pair.active() {
            let ln_p = match v {
                Place::Inf => None,
                Place::Prime(p) => Some(p.to_f64()?.ln()),
            };
            let mut forms = Vec::new();
            for (f, c) in d.forms.iter().zip(&d.exps) {
                let g = content(f);
                let ints: Option<Vec<i64>> =
                    f.iter().map(|a| (a / &g).to_integer().to_i64()).collect();
                let ln_g = crate::interval::ln_abs_f64(&abs_rational(&g, v));
                forms.push((ints?, ln_g - ratio_to_f64(c) * ln_q));
            }
            places.push((ln_p, forms));
        }
        Some(FastKeys {
            places,
            inf_active: pair.active().contains_key(&Place::Inf),
        })
    }

    fn key(&self, x: &[i64], p_of: &[Option<i128>]) -> Option<f64> {
        let mut total = 0.0;
        for ((ln_p, forms), p) in self.places.iter().zip(p_of) {
            let mut best = f64::NEG_INFINITY;
            for (f, shift) in forms {
                let mut k: i128 = 0;
                for (a, b) in f.iter().zip(x) {
                    k = k.checked_add((*a as i128).checked_mul(*b as i128)?)?;
                }
                if k == 0 {
                    continue;
                }
                let ln_abs = match (ln_p, p) {
                    (Some(lp), Some(p)) => {
                        let mut e = 0;
                        while k % p == 0 {
                            k /= p;
                            e += 1;
                        }
                        -(e as f64) * lp
                    }
                    _ => (k.unsigned_abs() as f64).ln(),
                };
                best = best.max(ln_abs + shift);
            }
            total += best;
        }
        if !self.inf_active {
            total += (x.iter().map(|c| c.unsigned_abs()).max().unwrap() as f64).ln();
        }
        Some(total)
    }
}

#[derive(Clone, Debug)]
pub struct InfimaEstimate {
    pub q: FactoredReal,
    pub box_bound: u64,
    pub candidates: usize,
    /// `lambda_1 <= ... <= lambda_n`, upper estimates.
    pub lambdas: Vec<FactoredReal>,
    /// Float `ln lambda_i`, for reporting.
    pub ln_lambdas: Vec<f64>,
    pub achievers: Vec<Vec<i64>>,
    /// Span of all candidates of height at most `lambda_i`.
    pub spans: Vec<Subspace>,
}

impl InfimaEstimate {
    pub fn to_json(&self) -> Value {
        json!({
            "Q": self.q.to_json(),
            "box": self.box_bound,
            "candidates": self.candidates,
            "lambdas": self.lambdas.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
            "log10_lambdas": self.ln_lambdas.iter().map(|l| format!("{:.12}", l / std::f64::consts::LN_10)).collect::<Vec<_>>(),
            "achievers": self.achievers,
            "spans": self.spans.iter().map(|s| s.basis().iter().map(|b| qvec_json(b)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

pub fn successive_infima(pair: &TwistedPair, q: &FactoredReal, b: u64) -> Result<InfimaEstimate> {
    successive_infima_with(pair, q, b, &[])
}

/// Same as [`successive_infima`], with extra candidate vectors beyond the box.
pub fn successive_infima_with(
    pair: &TwistedPair,
    q: &FactoredReal,
    b: u64,
    extra: &[Vec<i64>],
) -> Result<InfimaEstimate> {
    if b == 0 {
        return Err(Error::Domain("box bound must be at least 1".into()));
    }
    let n = pair.n();
    let ev = HeightEvaluator::new(pair, q)?;
    let mut cands = primitive_vectors(n, b);
    if !extra.is_empty() {
        let mut seen: HashSet<Vec<i64>> = cands.iter().cloned().collect();
        for x in extra {
            let big: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
            let x = sign_normalize(&big)
                .ok_or_else(|| Error::Domain("extra vector too large".into()))?;
            if seen.insert(x.clone()) {
                cands.push(x);
            }
        }
    }
    let exact_of = |x: &[i64]| ev.eval(&qv(&x));

    let fast = FastKeys::new(pair, q.ln_f64());
    let p_of: Vec<Option<i128>> = pair
        .active()
        .keys()
        .map(|v| match v {
            Place::Inf => None,
            Place::Prime(p) => p.to_i128(),
        })
        .collect();
    let mut keys: Vec<f64> = Vec::with_capacity(cands.len());
    let mut exact: Vec<Option<HeightValue>> = vec![None; cands.len()];
    for (i, x) in cands.iter().enumerate() {
        match fast.as_ref().and_then(|f| f.key(x, &p_of)) {
            Some(k) => keys.push(k),
            None => {
                let h = exact_of(x)?;
                keys.push(h.ln);
                exact[i] = Some(h);
            }
        }
    }
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));

    // Float pass: find where n independent vectors are reached.
    let mut ech = Echelon::default();
    let mut kmax = f64::NEG_INFINITY;
    for &i in &order {
        if ech.try_insert(qv(&cands[i])) {
            kmax = keys[i];
            if ech.len() == n {
                break;
            }
        }
    }
    let tol = 1e-9 * kmax.abs().max(1.0);
    let prefix: Vec<usize> = order
        .iter()
        .copied()
        .take_while(|&i| keys[i] <= kmax + tol)
        .collect();

    // Exact pass on the prefix.
    let mut vals: Vec<(usize, HeightValue)> = Vec::with_capacity(prefix.len());
    for &i in &prefix {
        let h = match exact[i].take() {
            Some(h) => h,
            None => exact_of(&cands[i])?,
        };
        vals.push((i, h));
    }
    vals.sort_by(|a, b| ev.cmp(&a.1, &b.1).then(a.0.cmp(&b.0)));
    let mut picked: Vec<(usize, HeightValue)> = Vec::new();
    let mut ech = Echelon::default();
    for (i, h) in &vals {
        if ech.try_insert(qv(&cands[*i])) {
            picked.push((*i, h.clone()));
            if picked.len() == n {
                break;
            }
        }
    }
    let mut spans = Vec::with_capacity(n);
    for (_, lam) in &picked {
        let members: Vec<QVec> = vals
            .iter()
            .take_while(|(_, h)| ev.cmp(h, lam) != Ordering::Greater)
            .map(|(i, _)| qv(&cands[*i]))
            .collect();
        spans.push(Subspace::span(n, &members));
    }
    Ok(InfimaEstimate {
        q: q.clone(),
        box_bound: b,
        candidates: cands.len(),
        lambdas: picked.iter().map(|(_, h)| ev.to_factored(h)).collect(),
        ln_lambdas: picked.iter().map(|(_, h)| h.ln).collect(),
        achievers: picked.iter().map(|(i, _)| cands[*i].clone()).collect(),
        spans,
    })
}

fn fr_int(n: i64) -> FactoredReal {
    FactoredReal::from_integer(n).expect("positive")
}

#[derive(Clone, Debug)]
pub struct MinkowskiReport {
    pub product: FactoredReal,
    pub lower: FactoredReal,
    pub upper: FactoredReal,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl MinkowskiReport {
    pub fn to_json(&self) -> Value {
        json!({
            "product": self.product.to_json(),
            "lower": self.lower.to_json(),
            "upper": self.upper.to_json(),
            "lower_ok": self.lower_ok,
            "upper_ok": self.upper_ok,
        })
    }
}

/// `n^{-n/2} Delta Q^{-alpha} <= prod lambda_i <= 2^{n(n-1)/2} Delta Q^{-alpha}`.
pub fn minkowski_check(pair: &TwistedPair, q: &FactoredReal, b: u64) -> Result<MinkowskiReport> {
    let est = successive_infima(pair, q, b)?;
    minkowski_from(pair, &est)
}

pub fn minkowski_from(pair: &TwistedPair, est: &InfimaEstimate) -> Result<MinkowskiReport> {
    let n = pair.n() as i64;
    let inv = pair_invariants(pair)?;
    let base = inv.delta.mul(&est.q.pow(&-pair.alpha()));
    let lower = fr_int(n)
        .pow(&BigRational::new((-n).into(), 2.into()))
        .mul(&base);
    let upper = fr_int(2)
        .pow(&BigRational::from_integer((n * (n - 1) / 2).into()))
        .mul(&base);
    let product = est
        .lambdas
        .iter()
        .fold(FactoredReal::one(), |a, l| a.mul(l));
    Ok(MinkowskiReport {
        lower_ok: lower <= product,
        upper_ok: product <= upper,
        product,
        lower,
        upper,
    })
}

#[derive(Clone, Debug)]
pub struct SlopeRow {
    pub q: FactoredReal,
    pub i: usize,
    pub log10_lambda: f64,
    pub slope: f64,
}

#[derive(Clone, Debug)]
pub struct SlopeProfile {
    pub rows: Vec<SlopeRow>,
    /// `-mu_{l(i)}` for each index `i`.
    pub expected: Vec<BigRational>,
    /// Per `Q`: whether `T_{d_l}(Q)` equals the filtration member `T_l` for every `l`.
    pub spans_match: Vec<bool>,
    pub estimates: Vec<InfimaEstimate>,
}

impl SlopeProfile {
    /// Largest `|s_i(Q) + mu_{l(i)}|` at the given `Q` index.
    pub fn max_deviation(&self, qi: usize) -> f64 {
        let n = self.expected.len();
        self.rows[qi * n..(qi + 1) * n]
            .iter()
            .map(|r| (r.slope - ratio_to_f64(&self.expected[r.i - 1])).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("Q,i,log10_lambda,slope\n");
        for r in &self.rows {
            let q = match r.q.to_rational() {
                Some(x) => x.to_string(),
                None => format!("{:.12e}", r.q.ln_f64().exp()),
            };
            s.push_str(&format!(
                "{},{},{:.12},{:.12}\n",
                q, r.i, r.log10_lambda, r.slope
            ));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "expected": self.expected.iter().map(rational_json).collect::<Vec<_>>(),
            "spans_match": self.spans_match,
            "estimates": self.estimates.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// `s_i(Q) = ln lambda_i(Q) / ln Q` on each `Q`, against the filtration slopes.
pub fn slope_profile(
    pair: &TwistedPair,
    qs: &[FactoredReal],
    box_of: &dyn Fn(&FactoredReal) -> u64,
) -> Result<SlopeProfile> {
    let chain = filtration(pair)?;
    let n = pair.n();
    let expected: Vec<BigRational> = (1..=n).map(|i| -chain.slope_for_index(i)).collect();
    let mut rows = Vec::new();
    let mut spans_match = Vec::new();
    let mut estimates = Vec::new();
    for q in qs {
        if q.cmp_rational(&BigRational::from_integer(2.into())) == Ordering::Less {
            return Err(Error::Domain("slope profile needs Q >= 2".into()));
        }
        let est = successive_infima(pair, q, box_of(q))?;
        let lnq = q.ln_f64();
        for (i, l) in est.ln_lambdas.iter().enumerate() {
            rows.push(SlopeRow {
                q: q.clone(),
                i: i + 1,
                log10_lambda: l / std::f64::consts::LN_10,
                slope: l / lnq,
            });
        }
        spans_match.push(
            chain.chain[1..]
                .iter()
                .all(|w| est.spans[w.space.dim() - 1] == w.space),
        );
        estimates.push(est);
    }
    Ok(SlopeProfile {
        rows,
        expected,
        spans_match,
        estimates,
    })
}

#[derive(Clone, Debug)]
pub struct ExteriorReport {
    pub p: usize,
    /// Hadamard-type inequality on every `p`-subset of achievers.
    pub hadamard_ok: bool,
    /// `lambda_hat_j <= p^{p/2} nu_j` for all `j`.
    pub upper_ok: bool,
    /// `N^{-npN} nu_j <= lambda_hat_j` for all `j`; estimates only.
    pub lower_ok: bool,
    pub nu: Vec<FactoredReal>,
    pub lambda_hat: Vec<FactoredReal>,
}

impl ExteriorReport {
    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "hadamard_ok": self.hadamard_ok,
            "upper_ok": self.upper_ok,
            "lower_ok": self.lower_ok,
            "nu": self.nu.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
            "lambda_hat": self.lambda_hat.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
        })
    }
}

fn wedge_int(xs: &[&Vec<i64>]) -> Result<Vec<i64>> {
    let rows: Vec<QVec> = xs.iter().map(|x| qv(&x)).collect();
    let w = wedge(&rows)?;
    w.iter()
        .map(|c| {
            c.to_integer()
                .to_i64()
                .ok_or_else(|| Error::Domain("wedge coordinate exceeds 64 bits".into()))
        })
        .collect()
}

pub fn exterior_infima_check(
    pair: &TwistedPair,
    p: usize,
    q: &FactoredReal,
    b: u64,
) -> Result<ExteriorReport> {
    let n = pair.n();
    let est = successive_infima(pair, q, b)?;
    let xp = exterior_pair(pair, p)?;
    let big_n = binomial(n, p).to_i64().unwrap();
    let hada = fr_int(p as i64).pow(&BigRational::new((p as i64).into(), 2.into()));
    let subsets = combinations(n, p);
    let mut hadamard_ok = true;
    let mut nu = Vec::new();
    let mut wedges = Vec::new();
    for s in &subsets {
        let xs: Vec<&Vec<i64>> = s.iter().map(|&i| &est.achievers[i]).collect();
        let w = wedge_int(&xs)?;
        let prod = s
            .iter()
            .fold(FactoredReal::one(), |a, &i| a.mul(&est.lambdas[i]));
        let hw = twisted_height(&xp, q, &qv(&w))?;
        if hw > hada.mul(&prod) {
            hadamard_ok = false;
        }
        nu.push(prod);
        wedges.push(w);
    }
    nu.sort();
    let bx = b.min(box_cap(big_n as usize, MAX_CANDIDATES));
    let hat = successive_infima_with(&xp, q, bx, &wedges)?;
    let low = fr_int(big_n).pow(&BigRational::from_integer(
        (-(n as i64) * p as i64 * big_n).into(),
    ));
    let upper_ok = hat.lambdas.iter().zip(&nu).all(|(l, v)| *l <= hada.mul(v));
    let lower_ok = hat.lambdas.iter().zip(&nu).all(|(l, v)| low.mul(v) <= *l);
    Ok(ExteriorReport {
        p,
        hadamard_ok,
        upper_ok,
        lower_ok,
        nu,
        lambda_hat: hat.lambdas,
    })
}

#[derive(Clone, Debug)]
pub struct GapReport {
    pub solutions: Vec<Vec<i64>>,
    pub span: Subspace,
    pub proper: bool,
}

impl GapReport {
    pub fn to_json(&self) -> Value {
        json!({
            "solutions": self.solutions,
            "span": self.span.basis().iter().map(|b| qvec_json(b)).collect::<Vec<_>>(),
            "span_dim": self.span.dim(),
            "proper": self.proper,
        })
    }
}

/// `A^delta >= n`, decided exactly.
pub fn gap_threshold_holds(n: usize, delta: &BigRational, a: &BigRational) -> bool {
    let fa = match FactoredReal::from_rational(a) {
        Ok(f) => f,
        Err(_) => return false,
    };
    fa.pow(delta)
        .cmp_rational(&BigRational::from_integer(n.into()))
        != Ordering::Less
}

/// All primitive `x` in the box with `H_{L,c,A}(x) < Delta^{1/n} A^{-delta/2}`.
pub fn gap_experiment(
    pair: &TwistedPair,
    delta: &BigRational,
    a: &BigRational,
    b: u64,
) -> Result<GapReport> {
    let n = pair.n();
    if !delta.is_positive() || *delta > BigRational::one() {
        return Err(Error::Domain("delta must lie in (0, 1]".into()));
    }
    if !gap_threshold_holds(n, delta, a) {
        return Err(Error::Domain(format!("A = {a} is below n^(1/delta)")));
    }
    let qa = FactoredReal::from_rational(a)?;
    let inv = pair_invariants(pair)?;
    let bound = inv
        .delta
        .pow(&BigRational::new(1.into(), (n as i64).into()))
        .mul(&qa.pow(&(-delta / BigRational::from_integer(2.into()))));
    let ev = HeightEvaluator::new(pair, &qa)?;
    let ln_bound = bound.ln_f64();
    let mut solutions = Vec::new();
    for x in primitive_vectors(n, b) {
        let xq = qv(&x);
        let h = ev.eval(&xq)?;
        let gap = h.ln - ln_bound;
        let below = if gap.abs() > 1e-9 * ln_bound.abs().max(1.0) {
            gap < 0.0
        } else {
            // h.coeff * A^qexp < bound  <=>  bound * A^-qexp > coeff
            bound.mul(&qa.pow(&-h.qexp.clone())).cmp_rational(&h.coeff) == Ordering::Greater
        };
        if below {
            solutions.push(x);
        }
    }
    let span = Subspace::span(n, &solutions.iter().map(|x| qv(&x)).collect::<Vec<_>>());
    Ok(GapReport {
        proper: span.dim() < n,
        solutions,
        span,
    })
}

/// A system of inequalities `|L_i(x)|_v / |x|_v <= A_v H(x)^{d_iv}` over the places in `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemInstance {
    pub n: usize,
    pub places: BTreeMap<Place, LocalData>,
    pub eps: BigRational,
}

impl SystemInstance {
    pub fn new(n: usize, places: BTreeMap<Place, LocalData>, eps: BigRational) -> Result<Self> {
        let s = SystemInstance { n, places, eps };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if !self.eps.is_positive() || self.eps > BigRational::one() {
            return Err(Error::Validation(format!(
                "eps = {} outside (0, 1]",
                self.eps
            )));
        }
        let mut total = BigRational::zero();
        for (v, d) in &self.places {
            if d.forms.len() != n || d.exps.len() != n || d.forms.iter().any(|f| f.len() != n) {
                return Err(Error::Validation(format!(
                    "place {v}: expected {n} forms in {n} variables"
                )));
            }
            if rank(&d.forms) != n {
                return Err(Error::Validation(format!(
                    "place {v}: forms are linearly dependent"
                )));
            }
            if d.exps.iter().any(|e| e.is_positive()) {
                return Err(Error::Validation(format!("place {v}: positive exponent")));
            }
            total += d.exps.iter().sum::<BigRational>();
        }
        let want = -BigRational::from_integer(n.into()) - &self.eps;
        if total != want {
            return Err(Error::Validation(format!(
                "exponents sum to {total}, expected {want}"
            )));
        }
        Ok(())
    }

    /// `A_v = |det(L^(v))|_v^{1/n}`.
    pub fn a_v(&self, v: &Place) -> FactoredReal {
        let d = &self.places[v];
        let abs = abs_rational(&det(&d.forms), v);
        FactoredReal::from_rational(&abs)
            .expect("nonzero determinant")
            .pow(&BigRational::new(1.into(), (self.n as i64).into()))
    }

    /// Whether `x` satisfies every inequality of the system, decided exactly.
    pub fn is_solution(&self, x: &[i64]) -> bool {
        let xq = qv(&x);
        let h = crate::places::height(&xq, crate::places::HeightKind::H).expect("nonzero");
        self.places.iter().all(|(v, d)| {
            let a = self.a_v(v);
            let norm = sup_norm(&xq, v);
            d.forms.iter().zip(&d.exps).all(|(f, e)| {
                let lhs = abs_rational(&crate::linalg::dot(f, &xq), v) / &norm;
                lhs.is_zero() || a.mul(&h.pow(e)).cmp_rational(&lhs) != Ordering::Less
            })
        })
    }

    pub fn to_json(&self) -> Value {
        let places: Vec<Value> = self
            .places
            .iter()
            .map(|(v, d)| {
                json!({
                    "place": v.to_json(),
                    "forms": d.forms.iter().map(|f| qvec_json(f)).collect::<Vec<_>>(),
                    "exps": qvec_json(&d.exps),
                })
            })
            .collect();
        json!({ "n": self.n, "eps": rational_json(&self.eps), "places": places })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(|n| n.as_u64())
            .ok_or_else(|| Error::Parse("missing integer field n".into()))?
            as usize;
        let eps = parse_rational(
            v.get("eps")
                .ok_or_else(|| Error::Parse("missing eps".into()))?,
        )?;
        let arr = v
            .get("places")
            .and_then(|p| p.as_array())
            .ok_or_else(|| Error::Parse("missing places".into()))?;
        let mut places = BTreeMap::new();
        for p in arr {
            let place = Place::from_json(
                p.get("place")
                    .ok_or_else(|| Error::Parse("missing place".into()))?,
            )?;
            let forms = parse_matrix(
                p.get("forms")
                    .ok_or_else(|| Error::Parse("missing forms".into()))?,
            )?;
            let exps = parse_qvec(
                p.get("exps")
                    .ok_or_else(|| Error::Parse("missing exps".into()))?,
            )?;
            if places
                .insert(place.clone(), LocalData { forms, exps })
                .is_some()
            {
                return Err(Error::Parse(format!("place {place} listed twice")));
            }
        }
        SystemInstance::new(n, places, eps)
    }
}

#[derive(Clone, Debug)]
pub struct ScanSolution {
    pub x: Vec<i64>,
    pub height: BigRational,
    pub in_t_prime: bool,
    /// `H_{L,c,Q}(x) <= Delta^{1/n} Q^{-delta}` with `Q = H(x)^{1+eps/n}`.
    pub reduction_holds: bool,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub solutions: Vec<ScanSolution>,
    pub t_prime: Subspace,
    /// Bins `[r^k, r^{k+1})` with `r = 1 + delta/2`, as `(k, count)`.
    pub histogram: Vec<(u64, usize)>,
    pub ratio: BigRational,
}

impl ScanReport {
    pub fn to_json(&self) -> Value {
        json!({
            "t_prime": self.t_prime.basis().iter().map(|b| qvec_json(b)).collect::<Vec<_>>(),
            "bin_ratio": rational_json(&self.ratio),
            "histogram": self.histogram.iter().map(|(k, c)| json!({"bin": k, "count": c})).collect::<Vec<_>>(),
            "solutions": self.solutions.iter().map(|s| json!({
                "x": s.x,
                "height": rational_json(&s.height),
                "in_t_prime": s.in_t_prime,
                "reduction_holds": s.reduction_holds,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Largest `k` with `r^k <= h`, for `r > 1`, `h >= 1`.
fn bin_index(h: &BigRational, r: &BigRational) -> u64 {
    let mut k = 0u64;
    let mut pow = r.clone();
    while pow <= *h {
        pow *= r;
        k += 1;
    }
    k
}

/// Enumerate primitive `x` with sup-norm at most `b` and `H(x) <= h_max` solving the system.
pub fn scan_system(sys: &SystemInstance, h_max: &BigRational, b: u64) -> Result<ScanReport> {
    sys.validate()?;
    let red = crate::bounds::reduce_system(sys)?;
    let t_prime = exceptional_subspace(&red.pair)?;
    let inv = pair_invariants(&red.pair)?;
    let delta_root = inv
        .delta
        .pow(&BigRational::new(1.into(), (sys.n as i64).into()));
    let ratio = BigRational::one() + &red.delta / BigRational::from_integer(2.into());
    let mut solutions = Vec::new();
    let mut hist: BTreeMap<u64, usize> = BTreeMap::new();
    for x in primitive_vectors(sys.n, b) {
        let h = BigRational::from_integer(x.iter().map(|c| c.unsigned_abs()).max().unwrap().into());
        if h > *h_max || !sys.is_solution(&x) {
            continue;
        }
        let xq = qv(&x);
        let q = FactoredReal::from_rational(&h)?.pow(&red.q_exponent);
        let lhs = twisted_height(&red.pair, &q, &xq)?;
        let rhs = delta_root.mul(&q.pow(&-red.delta.clone()));
        *hist.entry(bin_index(&h, &ratio)).or_default() += 1;
        solutions.push(ScanSolution {
            in_t_prime: t_prime.contains(&xq),
            reduction_holds: lhs <= rhs,
            height: h,
            x,
        });
    }
    Ok(ScanReport {
        solutions,
        t_prime,
        histogram: hist.into_iter().collect(),
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{q, qr, qvec};
    use crate::twisted::{q_int, shift_exponents};

    fn e1() -> TwistedPair {
        TwistedPair::from_ints(
            2,
            &[(
                Place::Inf,
                vec![vec![1, 0], vec![0, 1]],
                vec![(1, 1), (-1, 1)],
            )],
        )
        .unwrap()
    }
    fn e3() -> TwistedPair {
        TwistedPair::from_ints(
            3,
            &[(
                Place::Inf,
                vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
                vec![(1, 1), (0, 1), (-1, 1)],
            )],
        )
        .unwrap()
    }

    #[test]
    fn enumeration() {
        let v = primitive_vectors(2, 1);
        assert_eq!(v, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
        assert_eq!(primitive_vectors(2, 2).len(), 8);
        assert!(box_count(3, box_cap(3, 1000)) <= 1000.0);
    }

    #[test]
    fn infima_examples() {
        let est = successive_infima(&e1(), &q_int(100), 1).unwrap();
        assert_eq!(
            est.lambdas,
            vec![
                FactoredReal::from_rational(&qr(1, 100)).unwrap(),
                q_int(100)
            ]
        );
        assert_eq!(est.achievers, vec![vec![1, 0], vec![0, 1]]);
        let est3 = successive_infima(&e3(), &q_int(10), 1).unwrap();
        assert_eq!(
            est3.lambdas,
            vec![
                FactoredReal::from_rational(&qr(1, 10)).unwrap(),
                q_int(1),
                q_int(10)
            ]
        );
    }

    #[test]
    fn minkowski_examples() {
        let r = minkowski_check(&e1(), &q_int(10), 3).unwrap();
        assert!(r.lower_ok && r.upper_ok);
        assert!(r.product.is_one());
        let mut th = BTreeMap::new();
        th.insert(Place::Inf, q(1));
        let shifted = shift_exponents(&e1(), &th);
        assert_eq!(shifted.alpha(), q(-2));
        let r = minkowski_check(&shifted, &q_int(10), 3).unwrap();
        assert_eq!(r.product, q_int(100));
        assert!(r.lower_ok && r.upper_ok);
    }

    #[test]
    fn slope_examples() {
        let prof = slope_profile(&e1(), &[q_int(10_000)], &|q| {
            default_box(&e1(), q, MAX_CANDIDATES)
        })
        .unwrap();
        assert_eq!(prof.expected, vec![q(-1), q(1)]);
        assert!(prof.max_deviation(0) < 1e-12);
        assert_eq!(prof.spans_match, vec![true]);
    }

    #[test]
    fn exterior_example() {
        let r = exterior_infima_check(&e3(), 2, &q_int(10), 1).unwrap();
        assert!(r.hadamard_ok && r.upper_ok);
    }

    #[test]
    fn gap_example() {
        let r = gap_experiment(&e1(), &q(1), &q(4), 3).unwrap();
        assert_eq!(r.solutions, vec![vec![1, 0]]);
        assert!(r.proper);
        assert!(gap_experiment(&e1(), &q(1), &q(1), 3).is_err());
    }

    #[test]
    fn scan_example() {
        let mut places = BTreeMap::new();
        places.insert(
            Place::Inf,
            LocalData {
                forms: vec![qvec(&[1, 0]), qvec(&[0, 1])],
                exps: vec![q(-3), q(0)],
            },
        );
        let sys = SystemInstance::new(2, places, q(1)).unwrap();
        let rep = scan_system(&sys, &q(5), 5).unwrap();
        let xs: Vec<Vec<i64>> = rep.solutions.iter().map(|s| s.x.clone()).collect();
        assert_eq!(xs, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
        assert!(rep.solutions.iter().all(|s| s.reduction_holds));
        assert_eq!(rep.t_prime, Subspace::span(2, &[qvec(&[0, 1])]));
    }
}
