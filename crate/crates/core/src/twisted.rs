//! Twisted pairs `(L, c)` over the rationals, their validation, the twisted
//! height `H_{L,c,Q}`, and the invariants `Delta_L`, `H_L`.
//!
//! Places outside `active` carry the `default_forms` (the coordinate forms
//! unless a change of variables has been applied) with zero exponents.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exact_reals::{ExactReal, FactoredReal};
use crate::linalg::{content, det, identity, rank, row_times, QVec};
use crate::places::{abs_rational, sup_norm, Place};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalData {
    pub forms: Vec<QVec>,
    pub exps: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedPair {
    n: usize,
    default_forms: Vec<QVec>,
    active: BTreeMap<Place, LocalData>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub core_ok: bool,
    pub normalized_ok: bool,
    pub r: usize,
    pub messages: Vec<String>,
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

impl TwistedPair {
    /// Pair with coordinate forms at every inactive place.
    pub fn new(n: usize, active: BTreeMap<Place, LocalData>) -> Result<Self> {
        Self::with_default_forms(n, identity(n), active)
    }

    pub fn with_default_forms(
        n: usize,
        default_forms: Vec<QVec>,
        active: BTreeMap<Place, LocalData>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("dimension must be at least 1".into()));
        }
        let shape_ok = |forms: &Vec<QVec>| forms.len() == n && forms.iter().all(|f| f.len() == n);
        if !shape_ok(&default_forms) {
            return Err(Error::Validation(
                "default forms must be n forms in n variables".into(),
            ));
        }
        if rank(&default_forms) != n {
            return Err(Error::Validation("default forms are dependent".into()));
        }
        for (v, d) in &active {
            if !shape_ok(&d.forms) || d.exps.len() != n {
                return Err(Error::Validation(format!(
                    "place {v}: expected {n} forms of length {n} and {n} exponents"
                )));
            }
        }
        Ok(TwistedPair {
            n,
            default_forms,
            active,
        })
    }

    /// Single-place convenience constructor from integer data.
    pub fn from_ints(n: usize, places: &[(Place, Vec<Vec<i64>>, Vec<(i64, i64)>)]) -> Result<Self> {
        let mut active = BTreeMap::new();
        for (v, forms, exps) in places {
            active.insert(
                v.clone(),
                LocalData {
                    forms: forms.iter().map(|f| crate::linalg::qvec(f)).collect(),
                    exps: exps
                        .iter()
                        .map(|&(a, b)| BigRational::new(a.into(), b.into()))
                        .collect(),
                },
            );
        }
        Self::new(n, active)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn default_forms(&self) -> &[QVec] {
        &self.default_forms
    }

    pub fn has_identity_defaults(&self) -> bool {
        self.default_forms == identity(self.n)
    }

    pub fn active(&self) -> &BTreeMap<Place, LocalData> {
        &self.active
    }

    pub fn places(&self) -> impl Iterator<Item = &Place> {
        self.active.keys()
    }

    /// Forms and exponents at `v`, falling back to the defaults.
    pub fn local(&self, v: &Place) -> (Vec<QVec>, Vec<BigRational>) {
        match self.active.get(v) {
            Some(d) => (d.forms.clone(), d.exps.clone()),
            None => (
                self.default_forms.clone(),
                vec![BigRational::zero(); self.n],
            ),
        }
    }

    /// Distinct forms over all places (raw coefficient vectors).
    pub fn form_union(&self) -> Vec<QVec> {
        let mut out: Vec<QVec> = Vec::new();
        let all = self
            .default_forms
            .iter()
            .chain(self.active.values().flat_map(|d| d.forms.iter()));
        for f in all {
            if !out.contains(f) {
                out.push(f.clone());
            }
        }
        out
    }

    /// `sum_v max_i c_iv`; inactive places contribute 0.
    pub fn theta(&self) -> BigRational {
        self.active
            .values()
            .map(|d| d.exps.iter().max().cloned().unwrap())
            .sum()
    }

    /// `sum_v sum_i c_iv`.
    pub fn alpha(&self) -> BigRational {
        self.active.values().flat_map(|d| d.exps.iter()).sum()
    }

    /// Largest `|c_iv|`.
    pub fn c_max(&self) -> BigRational {
        self.active
            .values()
            .flat_map(|d| d.exps.iter())
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("n".into(), json!(self.n));
        let places: Vec<Value> = self
            .active
            .iter()
            .map(|(v, d)| {
                json!({
                    "place": v.to_json(),
                    "forms": d.forms.iter().map(|f| qvec_json(f)).collect::<Vec<_>>(),
                    "exps": qvec_json(&d.exps),
                })
            })
            .collect();
        m.insert("places".into(), Value::Array(places));
        if !self.has_identity_defaults() {
            m.insert(
                "default_forms".into(),
                Value::Array(self.default_forms.iter().map(|f| qvec_json(f)).collect()),
            );
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(|n| n.as_u64())
            .ok_or_else(|| Error::Parse("missing integer field n".into()))?
            as usize;
        let places = v
            .get("places")
            .and_then(|p| p.as_array())
            .ok_or_else(|| Error::Parse("missing array field places".into()))?;
        let mut active = BTreeMap::new();
        for p in places {
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
            if active
                .insert(place.clone(), LocalData { forms, exps })
                .is_some()
            {
                return Err(Error::Parse(format!("place {place} listed twice")));
            }
        }
        let defaults = match v.get("default_forms") {
            Some(d) => parse_matrix(d)?,
            None => identity(n),
        };
        Self::with_default_forms(n, defaults, active)
    }
}

pub fn rational_json(x: &BigRational) -> Value {
    Value::String(x.to_string())
}

pub fn qvec_json(v: &[BigRational]) -> Value {
    Value::Array(v.iter().map(rational_json).collect())
}

pub fn parse_rational(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => parse_rational_str(s),
        Value::Number(n) => n
            .as_i64()
            .map(|i| BigRational::from_integer(i.into()))
            .ok_or_else(|| Error::Parse(format!("not a rational: {n}"))),
        _ => Err(Error::Parse(format!("not a rational: {v}"))),
    }
}

pub fn parse_rational_str(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(a, b))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn parse_qvec(v: &Value) -> Result<QVec> {
    v.as_array()
        .ok_or_else(|| Error::Parse("expected an array of rationals".into()))?
        .iter()
        .map(parse_rational)
        .collect()
}

pub fn parse_matrix(v: &Value) -> Result<Vec<QVec>> {
    v.as_array()
        .ok_or_else(|| Error::Parse("expected an array of rows".into()))?
        .iter()
        .map(parse_qvec)
        .collect()
}

pub fn validate(pair: &TwistedPair) -> ValidationReport {
    let n = pair.n;
    let mut messages = Vec::new();
    let mut core_ok = true;
    for (v, d) in &pair.active {
        if rank(&d.forms) != n {
            core_ok = false;
            messages.push(format!("place {v}: forms are linearly dependent"));
        }
    }
    if n < 2 {
        messages.push("n = 1: only degenerate statements apply".into());
    }
    let mut normalized_ok = core_ok;
    for (v, d) in &pair.active {
        let s: BigRational = d.exps.iter().sum();
        if !s.is_zero() {
            normalized_ok = false;
            messages.push(format!("place {v}: exponents sum to {s}, not 0"));
        }
    }
    let theta = pair.theta();
    if theta > BigRational::one() {
        normalized_ok = false;
        messages.push(format!("sum over places of max exponent is {theta} > 1"));
    }
    ValidationReport {
        core_ok,
        normalized_ok,
        r: pair.form_union().len(),
        messages,
    }
}

fn require_core(pair: &TwistedPair) -> Result<()> {
    let rep = validate(pair);
    if rep.core_ok {
        Ok(())
    } else {
        Err(Error::Validation(rep.messages.join("; ")))
    }
}

/// A height value `coeff * Q^qexp` together with a float key for fast ordering.
#[derive(Clone, Debug)]
pub struct HeightValue {
    pub coeff: BigRational,
    pub qexp: BigRational,
    pub ln: f64,
}

/// Precomputed evaluator of `x -> H_{L,c,Q}(x)` for a fixed pair and `Q`.
#[derive(Clone, Debug)]
pub struct HeightEvaluator {
    q: FactoredReal,
    ln_q: f64,
    places: Vec<(Place, Vec<QVec>, Vec<BigRational>)>,
    defaults: Vec<QVec>,
    identity_defaults: bool,
}

/// Relative gap above which float keys decide an ordering outright.
const FLOAT_GAP: f64 = 1e-9;

impl HeightEvaluator {
    pub fn new(pair: &TwistedPair, q: &FactoredReal) -> Result<Self> {
        require_core(pair)?;
        if q.cmp_rational(&BigRational::one()) == Ordering::Less {
            return Err(Error::Domain("Q must be at least 1".into()));
        }
        Ok(HeightEvaluator {
            q: q.clone(),
            ln_q: q.ln_f64(),
            places: pair
                .active
                .iter()
                .map(|(v, d)| (v.clone(), d.forms.clone(), d.exps.clone()))
                .collect(),
            defaults: pair.default_forms.clone(),
            identity_defaults: pair.has_identity_defaults(),
        })
    }

    pub fn q(&self) -> &FactoredReal {
        &self.q
    }

    /// Exact comparison of two height values at this `Q`.
    pub fn cmp(&self, a: &HeightValue, b: &HeightValue) -> Ordering {
        let scale = 1.0f64.max(a.ln.abs()).max(b.ln.abs());
        if (a.ln - b.ln).abs() > FLOAT_GAP * scale {
            return a.ln.partial_cmp(&b.ln).unwrap();
        }
        self.cmp_exact(a, b)
    }

    pub fn cmp_exact(&self, a: &HeightValue, b: &HeightValue) -> Ordering {
        // a.c Q^a.e vs b.c Q^b.e  <=>  a.c / b.c vs Q^(b.e - a.e)
        let ratio = &a.coeff / &b.coeff;
        self.q
            .pow(&(&b.qexp - &a.qexp))
            .cmp_rational(&ratio)
            .reverse()
    }

    fn value(&self, coeff: BigRational, qexp: BigRational) -> HeightValue {
        let ln =
            crate::interval::ln_abs_f64(&coeff) + crate::interval::ratio_to_f64(&qexp) * self.ln_q;
        HeightValue { coeff, qexp, ln }
    }

    pub fn eval(&self, x: &[BigRational]) -> Result<HeightValue> {
        if x.iter().all(|c| c.is_zero()) {
            return Err(Error::Domain("twisted height of the zero vector".into()));
        }
        let mut coeff = BigRational::one();
        let mut qexp = BigRational::zero();
        let y: QVec = if self.identity_defaults {
            x.to_vec()
        } else {
            crate::linalg::mat_vec(&self.defaults, x)
        };
        // product over inactive places of ||y||_v = H(y) / prod over active places
        let mut default_part = sup_norm(&y, &Place::Inf) / content(&y);
        for (v, forms, exps) in &self.places {
            let mut best: Option<HeightValue> = None;
            for (f, c) in forms.iter().zip(exps) {
                let val = crate::linalg::dot(f, x);
                if val.is_zero() {
                    continue;
                }
                let cand = self.value(abs_rational(&val, v), -c);
                best = match best {
                    Some(b) if self.cmp(&b, &cand) != Ordering::Less => Some(b),
                    _ => Some(cand),
                };
            }
            let best = best.expect("independent forms cannot all vanish");
            coeff *= best.coeff;
            qexp += best.qexp;
            default_part /= sup_norm(&y, v);
        }
        coeff *= default_part;
        Ok(self.value(coeff, qexp))
    }

    pub fn to_factored(&self, h: &HeightValue) -> FactoredReal {
        ExactReal::new(h.coeff.clone(), self.q.pow(&h.qexp)).to_factored()
    }
}

/// `H_{L,c,Q}(x)` exactly.
pub fn twisted_height(
    pair: &TwistedPair,
    q: &FactoredReal,
    x: &[BigRational],
) -> Result<FactoredReal> {
    let ev = HeightEvaluator::new(pair, q)?;
    let h = ev.eval(x)?;
    Ok(ev.to_factored(&h))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub delta: FactoredReal,
    pub h_l: FactoredReal,
}

/// All nonzero `n x n` minors drawn from the form union.
fn union_minors(forms: &[QVec], n: usize) -> Vec<BigRational> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    let r = forms.len();
    if r < n {
        return out;
    }
    loop {
        let m: Vec<QVec> = idx.iter().map(|&i| forms[i].clone()).collect();
        let d = det(&m);
        if !d.is_zero() {
            out.push(d);
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < r - n + i {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn pair_invariants(pair: &TwistedPair) -> Result<Invariants> {
    require_core(pair)?;
    // Delta_L: active places directly, inactive ones through the product formula.
    let dd = det(&pair.default_forms);
    let mut delta = BigRational::one();
    for (v, d) in &pair.active {
        delta *= abs_rational(&det(&d.forms), v) / abs_rational(&dd, v);
    }
    // H_L is the height of the vector of all minors of the form union.
    let minors = union_minors(&pair.form_union(), pair.n);
    let h_l = crate::places::height_rational(&minors, crate::places::HeightKind::H)?;
    Ok(Invariants {
        delta: FactoredReal::from_rational(&delta)?,
        h_l: FactoredReal::from_rational(&h_l)?,
    })
}

/// Checks `H_L^(1 - C(r,n)) <= Delta_L <= H_L`.
pub fn sandwich_holds(pair: &TwistedPair, inv: &Invariants) -> bool {
    let r = pair.form_union().len();
    let e = BigRational::from_integer(BigInt::one() - binomial(r, pair.n));
    inv.h_l.pow(&e) <= inv.delta && inv.delta <= inv.h_l
}

/// `n^-1 H_L^(-C(r,n)) Q^(-theta)`, the lower bound valid for every nonzero point.
pub fn lower_height_bound(pair: &TwistedPair, q: &FactoredReal) -> Result<FactoredReal> {
    let inv = pair_invariants(pair)?;
    let r = pair.form_union().len();
    let n_inv = FactoredReal::from_integer(pair.n as i64)?.inv();
    let hl = inv
        .h_l
        .pow(&-BigRational::from_integer(binomial(r, pair.n)));
    Ok(n_inv.mul(&hl).mul(&q.pow(&-pair.theta())))
}

/// `d_iv = c_iv - theta_v`; places in `theta` that were inactive become active.
pub fn shift_exponents(pair: &TwistedPair, theta: &BTreeMap<Place, BigRational>) -> TwistedPair {
    let mut out = pair.clone();
    for (v, t) in theta {
        if t.is_zero() {
            continue;
        }
        let entry = out.active.entry(v.clone()).or_insert_with(|| LocalData {
            forms: pair.default_forms.clone(),
            exps: vec![BigRational::zero(); pair.n],
        });
        for c in entry.exps.iter_mut() {
            *c -= t;
        }
    }
    out
}

/// `L o phi` at every place, with `phi` given by its rows.
pub fn compose(pair: &TwistedPair, phi: &[QVec]) -> Result<TwistedPair> {
    let n = pair.n;
    if phi.len() != n || phi.iter().any(|r| r.len() != n) {
        return Err(Error::Domain("phi must be n x n".into()));
    }
    if det(phi).is_zero() {
        return Err(Error::Domain("phi is singular".into()));
    }
    let map = |forms: &[QVec]| forms.iter().map(|f| row_times(f, phi)).collect::<Vec<_>>();
    let active = pair
        .active
        .iter()
        .map(|(v, d)| {
            (
                v.clone(),
                LocalData {
                    forms: map(&d.forms),
                    exps: d.exps.clone(),
                },
            )
        })
        .collect();
    TwistedPair::with_default_forms(n, map(&pair.default_forms), active)
}

/// Rational `Q` as a factored real.
pub fn q_of(q: &BigRational) -> Result<FactoredReal> {
    FactoredReal::from_rational(q)
}

pub fn q_int(q: i64) -> FactoredReal {
    FactoredReal::from_integer(q).expect("positive Q")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{qr, qvec};

    pub fn e1() -> TwistedPair {
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

    #[test]
    fn validate_examples() {
        let rep = validate(&e1());
        assert!(rep.core_ok && rep.normalized_ok);
        assert_eq!(rep.r, 2);
        let p = TwistedPair::from_ints(
            2,
            &[(
                Place::Inf,
                vec![vec![1, 0], vec![0, 1]],
                vec![(1, 1), (1, 1)],
            )],
        )
        .unwrap();
        assert!(!validate(&p).normalized_ok);
        let p = TwistedPair::from_ints(
            2,
            &[(
                Place::Inf,
                vec![vec![1, 0], vec![2, 0]],
                vec![(1, 1), (-1, 1)],
            )],
        )
        .unwrap();
        assert!(!validate(&p).core_ok);
    }

    #[test]
    fn e1_heights() {
        let q = q_int(100);
        assert_eq!(
            twisted_height(&e1(), &q, &qvec(&[1, 0])).unwrap(),
            FactoredReal::from_rational(&qr(1, 100)).unwrap()
        );
        assert_eq!(
            twisted_height(&e1(), &q, &qvec(&[0, 1])).unwrap(),
            q_int(100)
        );
        assert_eq!(
            twisted_height(&e1(), &q, &qvec(&[0, 3])).unwrap(),
            q_int(100)
        );
    }

    #[test]
    fn invariants_examples() {
        let inv = pair_invariants(&e1()).unwrap();
        assert!(inv.delta.is_one() && inv.h_l.is_one());
        let p = TwistedPair::from_ints(
            2,
            &[(
                Place::Inf,
                vec![vec![1, 0], vec![2, 3]],
                vec![(0, 1), (0, 1)],
            )],
        )
        .unwrap();
        let inv = pair_invariants(&p).unwrap();
        assert_eq!(inv.h_l, q_int(3));
        assert_eq!(inv.delta, q_int(3));
        assert!(sandwich_holds(&p, &inv));
    }

    #[test]
    fn shift_scales_heights() {
        let mut th = BTreeMap::new();
        th.insert(Place::Inf, qr(1, 1));
        let d = shift_exponents(&e1(), &th);
        assert_eq!(d.active()[&Place::Inf].exps, vec![qr(0, 1), qr(-2, 1)]);
        let q = q_int(7);
        let x = qvec(&[3, -5]);
        let lhs = twisted_height(&d, &q, &x).unwrap();
        let rhs = twisted_height(&e1(), &q, &x).unwrap().mul(&q);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn compose_identity_is_noop_and_heights_transport() {
        let p = e1();
        assert_eq!(compose(&p, &identity(2)).unwrap(), p);
        let phi = vec![qvec(&[2, 1]), qvec(&[1, 1])];
        let c = compose(&p, &phi).unwrap();
        let q = q_int(10);
        let x = qvec(&[1, -3]);
        let fx = crate::linalg::mat_vec(&phi, &x);
        assert_eq!(
            twisted_height(&c, &q, &x).unwrap(),
            twisted_height(&p, &q, &fx).unwrap()
        );
        assert_eq!(pair_invariants(&c).unwrap(), pair_invariants(&p).unwrap());
    }

    #[test]
    fn json_round_trip_bit_exact() {
        let p = TwistedPair::from_ints(
            2,
            &[
                (
                    Place::Inf,
                    vec![vec![1, 0], vec![1, 1]],
                    vec![(1, 2), (-1, 2)],
                ),
                (
                    Place::prime(3),
                    vec![vec![0, 1], vec![1, 0]],
                    vec![(1, 3), (-1, 3)],
                ),
            ],
        )
        .unwrap();
        let s = p.to_json().to_string();
        let back = TwistedPair::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json().to_string(), s);
    }

    #[test]
    fn lower_bound_on_e1() {
        let q = q_int(50);
        let lb = lower_height_bound(&e1(), &q).unwrap();
        for x in [[1, 0], [0, 1], [3, 7], [1, -1]] {
            assert!(twisted_height(&e1(), &q, &qvec(&x)).unwrap() >= lb);
        }
    }
}
