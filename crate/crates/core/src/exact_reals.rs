//! Exact positive reals of the form `prod p^(e_p)` with rational exponents.
//!
//! Every height that shows up over the rationals, raised to rational powers,
//! lands in this multiplicative group. Values are canonical (sorted primes,
//! no zero exponents), so structural equality is value equality.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::interval::{format_fixed, ln_bigint_f64, ln_rational, Interval};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FactoredReal {
    exps: BTreeMap<BigInt, BigRational>,
}

pub fn is_prime(p: &BigInt) -> bool {
    if p.sign() != Sign::Plus {
        return false;
    }
    match p.to_u64() {
        Some(v) => num_prime::nt_funcs::is_prime64(v),
        None => num_prime::nt_funcs::is_prime(&p.magnitude().clone(), None).probably(),
    }
}

/// Prime factorization of a positive integer.
pub fn factor(n: &BigInt) -> BTreeMap<BigInt, u64> {
    assert!(n.is_positive(), "factor expects a positive integer");
    let mut out = BTreeMap::new();
    if let Some(v) = n.to_u64() {
        for (p, e) in num_prime::nt_funcs::factorize64(v) {
            out.insert(BigInt::from(p), e as u64);
        }
    } else if let Some(v) = n.to_u128() {
        for (p, e) in num_prime::nt_funcs::factorize128(v) {
            out.insert(BigInt::from(p), e as u64);
        }
    } else {
        let m: BigUint = n.magnitude().clone();
        for (p, e) in num_prime::nt_funcs::factorize(m) {
            out.insert(BigInt::from(p), e as u64);
        }
    }
    out
}

fn lcm_of_denoms<'a>(it: impl Iterator<Item = &'a BigRational>) -> BigInt {
    it.fold(BigInt::one(), |acc, e| acc.lcm(e.denom()))
}

impl FactoredReal {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    /// `p^e`; `p` must be prime.
    pub fn prime_power(p: BigInt, e: BigRational) -> Self {
        let mut exps = BTreeMap::new();
        if !e.is_zero() {
            exps.insert(p, e);
        }
        FactoredReal { exps }
    }

    /// Build from raw `(prime, exponent)` pairs; primality and canonical form are checked.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (BigInt, BigRational)>) -> Result<Self> {
        let mut exps: BTreeMap<BigInt, BigRational> = BTreeMap::new();
        for (p, e) in pairs {
            if !is_prime(&p) {
                return Err(Error::Validation(format!("{p} is not prime")));
            }
            let slot = exps.entry(p).or_insert_with(BigRational::zero);
            *slot += e;
        }
        exps.retain(|_, e| !e.is_zero());
        Ok(FactoredReal { exps })
    }

    pub fn from_rational(r: &BigRational) -> Result<Self> {
        if !r.is_positive() {
            return Err(Error::Domain(format!("{r} is not positive")));
        }
        let mut exps: BTreeMap<BigInt, BigRational> = BTreeMap::new();
        if !r.numer().is_one() {
            for (p, e) in factor(r.numer()) {
                exps.insert(p, BigRational::from_integer(e.into()));
            }
        }
        if !r.denom().is_one() {
            for (p, e) in factor(r.denom()) {
                exps.insert(p, BigRational::from_integer(-BigInt::from(e)));
            }
        }
        Ok(FactoredReal { exps })
    }

    pub fn from_integer(n: i64) -> Result<Self> {
        Self::from_rational(&BigRational::from_integer(n.into()))
    }

    pub fn exponents(&self) -> &BTreeMap<BigInt, BigRational> {
        &self.exps
    }

    pub fn mul(&self, o: &FactoredReal) -> Self {
        let mut exps = self.exps.clone();
        for (p, e) in &o.exps {
            let slot = exps.entry(p.clone()).or_insert_with(BigRational::zero);
            *slot += e;
        }
        exps.retain(|_, e| !e.is_zero());
        FactoredReal { exps }
    }

    pub fn inv(&self) -> Self {
        FactoredReal {
            exps: self.exps.iter().map(|(p, e)| (p.clone(), -e)).collect(),
        }
    }

    pub fn div(&self, o: &FactoredReal) -> Self {
        self.mul(&o.inv())
    }

    pub fn pow(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::one();
        }
        FactoredReal {
            exps: self.exps.iter().map(|(p, e)| (p.clone(), e * q)).collect(),
        }
    }

    /// Exact value when every exponent is an integer.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.exps.values().any(|e| !e.is_integer()) {
            return None;
        }
        Some(self.integer_power_value(&BigInt::one()))
    }

    /// `self^m` as a rational; `m` must clear all exponent denominators.
    fn integer_power_value(&self, m: &BigInt) -> BigRational {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, e) in &self.exps {
            let k = (e * BigRational::from_integer(m.clone())).to_integer();
            let kk = k
                .abs()
                .to_u32()
                .expect("exponent too large for exact comparison");
            if k.is_positive() {
                num *= p.pow(kk);
            } else {
                den *= p.pow(kk);
            }
        }
        BigRational::new(num, den)
    }

    /// Exact comparison with a positive rational.
    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        let m = lcm_of_denoms(self.exps.values());
        let lhs = self.integer_power_value(&m);
        let mm = m.to_u32().expect("denominator lcm too large");
        let rhs = num_traits::pow(r.clone(), mm as usize);
        lhs.cmp(&rhs)
    }

    pub fn ln_f64(&self) -> f64 {
        self.exps
            .iter()
            .map(|(p, e)| crate::interval::ratio_to_f64(e) * ln_bigint_f64(p))
            .sum()
    }

    /// Certified enclosure of the natural logarithm.
    pub fn ln_interval(&self, bits: u32) -> Interval {
        let mut acc = Interval::exact(BigRational::zero());
        for (p, e) in &self.exps {
            let extra = e.numer().bits() as u32 + 2;
            let lp = ln_rational(&BigRational::from_integer(p.clone()), bits + extra);
            acc = acc.add(&lp.scale(e));
        }
        acc.round_out(bits + 2)
    }

    /// Rational `q` with `self = 10^q`, if one exists.
    fn as_power_of_ten(&self) -> Option<BigRational> {
        if self.exps.is_empty() {
            return Some(BigRational::zero());
        }
        let two = self.exps.get(&BigInt::from(2));
        let five = self.exps.get(&BigInt::from(5));
        match (two, five) {
            (Some(a), Some(b)) if a == b && self.exps.len() == 2 => Some(a.clone()),
            _ => None,
        }
    }

    /// log10 to `digits` decimal places.
    pub fn log10(&self, digits: usize) -> Log10Value {
        if let Some(q) = self.as_power_of_ten() {
            return Log10Value {
                value: q,
                digits,
                exact: true,
            };
        }
        let bits = (digits as f64 * 3.33) as u32 + 24;
        let l = self.ln_interval(bits);
        let l10 = ln_rational(&BigRational::from_integer(10.into()), bits);
        let v = l.div(&l10).expect("ln 10 is positive");
        let scale = BigInt::from(10).pow(digits as u32);
        let rounded = (v.mid() * BigRational::from_integer(scale.clone())
            + BigRational::new(1.into(), 2.into()))
        .floor()
        .to_integer();
        Log10Value {
            value: BigRational::new(rounded, scale),
            digits,
            exact: false,
        }
    }

    /// `[[prime, num, den], ...]`
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.exps
                .iter()
                .map(|(p, e)| json!([int_json(p), int_json(e.numer()), int_json(e.denom())]))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("factored real must be an array".into()))?;
        let mut pairs = Vec::new();
        let mut last: Option<BigInt> = None;
        for t in arr {
            let t = t.as_array().filter(|t| t.len() == 3).ok_or_else(|| {
                Error::Parse("factored real entries are [prime, num, den]".into())
            })?;
            let p = json_int(&t[0])?;
            let n = json_int(&t[1])?;
            let d = json_int(&t[2])?;
            if d.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            if let Some(l) = &last {
                if &p <= l {
                    return Err(Error::Parse("primes must be strictly increasing".into()));
                }
            }
            last = Some(p.clone());
            pairs.push((p, BigRational::new(n, d)));
        }
        Self::from_pairs(pairs)
    }
}

impl Ord for FactoredReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.div(other).cmp_rational(&BigRational::one())
    }
}

impl PartialOrd for FactoredReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FactoredReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .exps
            .iter()
            .map(|(p, e)| {
                if e.is_one() {
                    p.to_string()
                } else {
                    format!("{p}^({e})")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Log10Value {
    /// Rounded to `digits` places unless `exact`.
    pub value: BigRational,
    pub digits: usize,
    pub exact: bool,
}

impl Log10Value {
    pub fn error_bound(&self) -> BigRational {
        if self.exact {
            BigRational::zero()
        } else {
            BigRational::new(1.into(), BigInt::from(10).pow(self.digits as u32))
        }
    }

    pub fn render(&self) -> String {
        if self.exact && self.value.is_integer() {
            self.value.to_integer().to_string()
        } else {
            format_fixed(&self.value, self.digits)
        }
    }
}

pub(crate) fn int_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => Value::String(n.to_string()),
    }
}

pub(crate) fn json_int(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from))
            .ok_or_else(|| Error::Parse(format!("not an integer: {n}"))),
        Value::String(s) => s
            .parse()
            .map_err(|_| Error::Parse(format!("not an integer: {s}"))),
        _ => Err(Error::Parse(format!("not an integer: {v}"))),
    }
}

/// A positive real `coeff * rad`, compared without factoring `coeff`.
///
/// Heights of integer vectors are rationals times a power of the twist
/// parameter; factoring every candidate would dominate enumeration time.
#[derive(Clone, Debug)]
pub struct ExactReal {
    pub coeff: BigRational,
    pub rad: FactoredReal,
}

impl ExactReal {
    pub fn new(coeff: BigRational, rad: FactoredReal) -> Self {
        debug_assert!(coeff.is_positive());
        ExactReal { coeff, rad }
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::new(r, FactoredReal::one())
    }

    pub fn mul(&self, o: &ExactReal) -> Self {
        ExactReal {
            coeff: &self.coeff * &o.coeff,
            rad: self.rad.mul(&o.rad),
        }
    }

    pub fn to_factored(&self) -> FactoredReal {
        FactoredReal::from_rational(&self.coeff)
            .expect("positive")
            .mul(&self.rad)
    }

    pub fn ln_f64(&self) -> f64 {
        crate::interval::ln_abs_f64(&self.coeff) + self.rad.ln_f64()
    }
}

impl PartialEq for ExactReal {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for ExactReal {}

impl Ord for ExactReal {
    fn cmp(&self, o: &Self) -> Ordering {
        // a.c * a.r  vs  b.c * b.r   <=>   a.c / b.c  vs  b.r / a.r
        let ratio = &self.coeff / &o.coeff;
        let f = o.rad.div(&self.rad);
        f.cmp_rational(&ratio).reverse()
    }
}

impl PartialOrd for ExactReal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }
    fn fr(pairs: &[(i64, i64, i64)]) -> FactoredReal {
        FactoredReal::from_pairs(pairs.iter().map(|&(p, n, d)| (BigInt::from(p), r(n, d)))).unwrap()
    }

    #[test]
    fn sqrt2_vs_three_halves() {
        assert_eq!(
            fr(&[(2, 1, 2)]).cmp(&fr(&[(2, -1, 1), (3, 1, 1)])),
            Ordering::Less
        );
    }

    #[test]
    fn equal_values_equal_structure() {
        let a = fr(&[(2, 1, 2), (3, 1, 2)]);
        let b = FactoredReal::from_integer(6).unwrap().pow(&r(1, 2));
        assert_eq!(a, b);
        assert_eq!(a.cmp(&b), Ordering::Equal);
    }

    #[test]
    fn log10_examples() {
        let l = fr(&[(2, 1, 1)]).log10(6);
        assert_eq!(l.render(), "0.301030");
        assert!(!l.exact);
        let one = FactoredReal::one().log10(6);
        assert!(one.exact && one.value.is_zero());
        let tenth = fr(&[(2, -1, 1), (5, -1, 1)]).log10(6);
        assert!(tenth.exact);
        assert_eq!(tenth.value, r(-1, 1));
    }

    #[test]
    fn log10_matches_f64() {
        let x = fr(&[(3, 7, 5), (7, -2, 3), (101, 1, 4)]);
        let want = (1.4 * 3f64.ln() - 2.0 / 3.0 * 7f64.ln() + 0.25 * 101f64.ln()) / 10f64.ln();
        let got = crate::interval::ratio_to_f64(&x.log10(12).value);
        assert!((got - want).abs() < 1e-11);
    }

    #[test]
    fn json_round_trip() {
        let x = fr(&[(2, 3, 4), (5, -1, 1)]);
        let v = x.to_json();
        assert_eq!(v.to_string(), "[[2,3,4],[5,-1,1]]");
        assert_eq!(FactoredReal::from_json(&v).unwrap(), x);
    }

    #[test]
    fn rejects_composite_base() {
        assert!(FactoredReal::from_pairs([(BigInt::from(4), r(1, 1))]).is_err());
    }

    #[test]
    fn factor_large_semiprime() {
        let p = BigInt::from(1_000_000_007u64);
        let q = BigInt::from(998_244_353u64);
        let n = &p * &q * &p * BigInt::from(1u128 << 70);
        let f = factor(&n);
        assert_eq!(f.get(&p), Some(&2));
        assert_eq!(f.get(&q), Some(&1));
        assert_eq!(f.get(&BigInt::from(2)), Some(&70));
    }

    #[test]
    fn exact_real_compares_without_factoring() {
        let q = FactoredReal::from_integer(100).unwrap();
        let a = ExactReal::new(r(3, 1), q.pow(&r(-1, 2)));
        let b = ExactReal::new(r(1, 3), FactoredReal::one());
        // 3/10 vs 1/3
        assert_eq!(a.cmp(&b), Ordering::Less);
        assert_eq!(a.to_factored(), fr(&[(2, -1, 1), (3, 1, 1), (5, -1, 1)]));
    }
}
