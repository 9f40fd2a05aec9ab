//! Places of the rationals, normalized absolute values, and absolute heights.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact_reals::{is_prime, FactoredReal};
use crate::linalg::{content, QVec};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    Inf,
    Prime(BigInt),
}

impl Ord for Place {
    fn cmp(&self, o: &Self) -> Ordering {
        match (self, o) {
            (Place::Inf, Place::Inf) => Ordering::Equal,
            (Place::Inf, _) => Ordering::Less,
            (_, Place::Inf) => Ordering::Greater,
            (Place::Prime(a), Place::Prime(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Place {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Inf => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

impl Place {
    pub fn prime(p: i64) -> Self {
        Place::Prime(BigInt::from(p))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) if s == "inf" => Ok(Place::Inf),
            _ => {
                let p = crate::exact_reals::json_int(v)?;
                if !is_prime(&p) {
                    return Err(Error::Validation(format!("place {p} is not prime")));
                }
                Ok(Place::Prime(p))
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Place::Inf => Value::String("inf".into()),
            Place::Prime(p) => crate::exact_reals::int_json(p),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Place::Prime(_))
    }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: &BigInt) -> u64 {
    let mut n = n.abs();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// `|x|_v` as a rational; over Q every normalized absolute value is rational.
pub fn abs_rational(x: &BigRational, v: &Place) -> BigRational {
    if x.is_zero() {
        return BigRational::zero();
    }
    match v {
        Place::Inf => x.abs(),
        Place::Prime(p) => {
            let e = valuation(x.numer(), p) as i64 - valuation(x.denom(), p) as i64;
            let pe = BigRational::from_integer(p.pow(e.unsigned_abs() as u32));
            if e >= 0 {
                pe.recip()
            } else {
                pe
            }
        }
    }
}

/// `|x|_v`, with `None` standing for zero.
pub fn abs_value(x: &BigRational, v: &Place) -> Option<FactoredReal> {
    if x.is_zero() {
        return None;
    }
    Some(FactoredReal::from_rational(&abs_rational(x, v)).expect("positive"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Sup,
    One,
    TwoSquared,
}

/// Local norm of a vector. At finite places every kind is the sup norm.
/// Zero for the zero vector.
pub fn vec_norm(x: &[BigRational], v: &Place, kind: NormKind) -> BigRational {
    let sup = || {
        x.iter()
            .map(|c| abs_rational(c, v))
            .max()
            .unwrap_or_else(BigRational::zero)
    };
    match (v, kind) {
        (Place::Prime(_), _) | (Place::Inf, NormKind::Sup) => sup(),
        (Place::Inf, NormKind::One) => x.iter().fold(BigRational::zero(), |a, c| a + c.abs()),
        (Place::Inf, NormKind::TwoSquared) => x.iter().fold(BigRational::zero(), |a, c| a + c * c),
    }
}

pub fn sup_norm(x: &[BigRational], v: &Place) -> BigRational {
    vec_norm(x, v, NormKind::Sup)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeightKind {
    H,
    H1,
    H2Squared,
}

/// Height of a nonzero vector as a rational. The product over finite places
/// collapses to the reciprocal of the content, so nothing is factored.
pub fn height_rational(x: &[BigRational], kind: HeightKind) -> Result<BigRational> {
    if x.iter().all(|c| c.is_zero()) {
        return Err(Error::Domain("height of the zero vector".into()));
    }
    let g = content(x);
    Ok(match kind {
        HeightKind::H => vec_norm(x, &Place::Inf, NormKind::Sup) / g,
        HeightKind::H1 => vec_norm(x, &Place::Inf, NormKind::One) / g,
        HeightKind::H2Squared => vec_norm(x, &Place::Inf, NormKind::TwoSquared) / (&g * &g),
    })
}

pub fn height(x: &[BigRational], kind: HeightKind) -> Result<FactoredReal> {
    FactoredReal::from_rational(&height_rational(x, kind)?)
}

/// Inhomogeneous height of a form: `H((1, a_1, ..., a_n))`.
pub fn inhomogeneous_height(a: &[BigRational]) -> Result<FactoredReal> {
    let mut v: QVec = vec![BigRational::one()];
    v.extend_from_slice(a);
    height(&v, HeightKind::H)
}

/// Product of `|x|_v` over every place where it differs from 1.
pub fn product_formula(x: &BigRational) -> Result<FactoredReal> {
    if x.is_zero() {
        return Err(Error::Domain("product formula for zero".into()));
    }
    let mut places = vec![Place::Inf];
    for part in [x.numer(), x.denom()] {
        if !part.abs().is_one() {
            places.extend(
                crate::exact_reals::factor(&part.abs())
                    .into_keys()
                    .map(Place::Prime),
            );
        }
    }
    let mut acc = FactoredReal::one();
    for v in &places {
        acc = acc.mul(&abs_value(x, v).expect("nonzero"));
    }
    Ok(acc)
}
