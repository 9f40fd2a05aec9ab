//! Rigorous enclosures of real numbers with rational endpoints.
//!
//! Every transcendental quantity in the crate (logarithms, bound constants)
//! is carried as an `Interval` whose endpoints are dyadic rationals. Floors
//! and comparisons are only reported when the enclosure decides them.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

fn floor_at(x: &BigRational, bits: u32) -> BigRational {
    let s = pow2(bits);
    BigRational::new(
        (x * BigRational::from_integer(s.clone()))
            .floor()
            .to_integer(),
        s,
    )
}

fn ceil_at(x: &BigRational, bits: u32) -> BigRational {
    let s = pow2(bits);
    BigRational::new(
        (x * BigRational::from_integer(s.clone()))
            .ceil()
            .to_integer(),
        s,
    )
}

impl Interval {
    pub fn exact(x: BigRational) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn from_int(x: i64) -> Self {
        Self::exact(BigRational::from_integer(x.into()))
    }

    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    /// Outward rounding to a dyadic grid; keeps denominators bounded.
    pub fn round_out(&self, bits: u32) -> Self {
        Interval {
            lo: floor_at(&self.lo, bits),
            hi: ceil_at(&self.hi, bits),
        }
    }

    pub fn add(&self, o: &Interval) -> Self {
        Interval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &Interval) -> Self {
        Interval {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn neg(&self) -> Self {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn mul(&self, o: &Interval) -> Self {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_negative() {
            Interval {
                lo: &self.hi * r,
                hi: &self.lo * r,
            }
        } else {
            Interval {
                lo: &self.lo * r,
                hi: &self.hi * r,
            }
        }
    }

    /// Division by an interval that excludes zero.
    pub fn div(&self, o: &Interval) -> Option<Self> {
        if o.lo.is_positive() || o.hi.is_negative() {
            let inv = Interval::new(o.hi.recip(), o.lo.recip());
            Some(self.mul(&inv))
        } else {
            None
        }
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Interval::from_int(1);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn max(&self, o: &Interval) -> Self {
        Interval {
            lo: self.lo.clone().max(o.lo.clone()),
            hi: self.hi.clone().max(o.hi.clone()),
        }
    }

    /// Natural logarithm of a positive enclosure.
    pub fn ln(&self, bits: u32) -> Option<Self> {
        if !self.lo.is_positive() {
            return None;
        }
        let a = ln_rational(&self.lo, bits);
        let b = if self.lo == self.hi {
            a.clone()
        } else {
            ln_rational(&self.hi, bits)
        };
        Some(Interval { lo: a.lo, hi: b.hi })
    }

    pub fn log10(&self, bits: u32) -> Option<Self> {
        let l = self.ln(bits)?;
        l.div(&ln_rational(&BigRational::from_integer(10.into()), bits))
    }

    /// `floor` if the enclosure decides it.
    pub fn floor(&self) -> Option<BigInt> {
        let a = self.lo.floor().to_integer();
        let b = self.hi.floor().to_integer();
        (a == b).then_some(a)
    }

    /// Certain comparison with a rational, `None` when undecided.
    pub fn cmp_rational(&self, r: &BigRational) -> Option<Ordering> {
        if &self.hi < r {
            Some(Ordering::Less)
        } else if &self.lo > r {
            Some(Ordering::Greater)
        } else if &self.lo == r && &self.hi == r {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.mid())
    }

    /// Relative width, meaningful away from zero.
    pub fn rel_width_f64(&self) -> f64 {
        let m = self.mid();
        if m.is_zero() {
            return ratio_to_f64(&self.width());
        }
        ratio_to_f64(&(self.width() / m.abs()))
    }

    /// Midpoint rendered with `sig` significant digits in scientific form.
    pub fn to_sci(&self, sig: usize) -> String {
        format_sci(&self.mid(), sig)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            format_sci(&self.lo, 17),
            format_sci(&self.hi, 17)
        )
    }
}

/// f64 approximation of a big rational that tolerates huge numerators.
pub fn ratio_to_f64(x: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    (ln_abs_f64(x)).exp() * sign
}

/// ln|x| in f64 without overflow, for any nonzero rational.
pub fn ln_abs_f64(x: &BigRational) -> f64 {
    ln_bigint_f64(x.numer()) - ln_bigint_f64(x.denom())
}

pub fn ln_bigint_f64(n: &BigInt) -> f64 {
    let n = n.abs();
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (&n >> shift as usize).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// atanh(y) for 0 <= y <= 1/3, enclosed at `bits` of absolute precision.
fn atanh_small(y: &BigRational, bits: u32) -> Interval {
    let w = bits + 32;
    let s = pow2(w);
    let yf = (y * BigRational::from_integer(s.clone()))
        .floor()
        .to_integer();
    let y2 = (&yf * &yf) >> w as usize;
    let mut term = yf;
    let mut sum = BigInt::zero();
    let mut j: u64 = 0;
    while !term.is_zero() {
        sum += &term / BigInt::from(2 * j + 1);
        term = (&term * &y2) >> w as usize;
        j += 1;
    }
    // Every step truncates toward zero; the accumulated deficit is at most a
    // few ulps per term plus a geometric tail, bounded generously here.
    let err = BigInt::from(6 * (j + 4));
    let lo = BigRational::new(sum.clone(), s.clone());
    let hi = BigRational::new(sum + err, s);
    Interval { lo, hi }.round_out(bits + 8)
}

pub fn ln2(bits: u32) -> Interval {
    let third = BigRational::new(1.into(), 3.into());
    atanh_small(&third, bits + 2)
        .scale(&BigRational::from_integer(2.into()))
        .round_out(bits + 4)
}

/// Natural logarithm of a positive rational.
pub fn ln_rational(x: &BigRational, bits: u32) -> Interval {
    assert!(x.is_positive(), "ln of non-positive rational");
    if x.is_one() {
        return Interval::exact(BigRational::zero());
    }
    // x = 2^k * m with 1 <= m < 2
    let mut k: i64 = x.numer().bits() as i64 - x.denom().bits() as i64;
    let two = BigRational::from_integer(2.into());
    let pow = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(pow2(k as u32))
        } else {
            BigRational::new(1.into(), pow2((-k) as u32))
        }
    };
    let mut m = x / pow(k);
    while m >= two {
        k += 1;
        m = x / pow(k);
    }
    while m < BigRational::one() {
        k -= 1;
        m = x / pow(k);
    }
    let one = BigRational::one();
    let y = (&m - &one) / (&m + &one);
    let extra = 64 - (k.unsigned_abs().max(1)).leading_zeros();
    let b = bits + extra + 4;
    let lnm = atanh_small(&y, b).scale(&two);
    let l2 = ln2(b).scale(&BigRational::from_integer(k.into()));
    lnm.add(&l2).round_out(bits + 2)
}

/// Scientific rendering with `sig` significant digits, round-half-up.
pub fn format_sci(x: &BigRational, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let a = x.abs();
    let mut e = (ln_abs_f64(&a) / std::f64::consts::LN_10).floor() as i64;
    let tpow = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(BigInt::from(10).pow(e as u32))
        } else {
            BigRational::new(1.into(), BigInt::from(10).pow((-e) as u32))
        }
    };
    while a >= tpow(e + 1) {
        e += 1;
    }
    while a < tpow(e) {
        e -= 1;
    }
    let scaled = &a / tpow(e - sig as i64 + 1);
    let mut digits = (scaled + BigRational::new(1.into(), 2.into()))
        .floor()
        .to_integer();
    if digits >= BigInt::from(10).pow(sig as u32) {
        digits = digits.div_floor(&BigInt::from(10));
        e += 1;
    }
    let ds = digits.to_string();
    let mant = if sig > 1 {
        format!("{}.{}", &ds[..1], &ds[1..])
    } else {
        ds
    };
    format!("{}{}e{}", if neg { "-" } else { "" }, mant, e)
}

/// Fixed-point rendering with `places` decimals, round-half-up.
pub fn format_fixed(x: &BigRational, places: usize) -> String {
    let s = BigInt::from(10).pow(places as u32);
    let neg = x.is_negative();
    let v = (x.abs() * BigRational::from_integer(s.clone()) + BigRational::new(1.into(), 2.into()))
        .floor()
        .to_integer();
    let (q, r) = v.div_rem(&s);
    let body = if places == 0 {
        q.to_string()
    } else {
        format!("{}.{:0>width$}", q, r.to_string(), width = places)
    };
    if neg && !v.is_zero() {
        format!("-{}", body)
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn ln2_encloses_f64_value() {
        let i = ln2(200);
        assert!(i.cmp_rational(&r(693147, 1000000)) == Some(Ordering::Greater));
        assert!(i.cmp_rational(&r(693148, 1000000)) == Some(Ordering::Less));
        assert!(i.rel_width_f64() < 1e-55);
    }

    #[test]
    fn ln_matches_f64_on_assorted_values() {
        for (n, d) in [
            (3, 1),
            (10, 1),
            (1, 7),
            (123456789, 1000),
            (5, 4),
            (99, 100),
        ] {
            let want = (n as f64 / d as f64).ln();
            let got = ln_rational(&r(n, d), 120);
            assert!((got.to_f64() - want).abs() < 1e-14, "{n}/{d}");
            assert!(got.lo <= got.hi);
        }
    }

    #[test]
    fn ln_of_huge_power_of_two() {
        let x = BigRational::from_integer(pow2(5000));
        let got = ln_rational(&x, 80);
        assert!((got.to_f64() - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn floor_decides_when_enclosure_is_tight() {
        let i = Interval::new(r(29, 10), r(299, 100));
        assert_eq!(i.floor(), Some(2.into()));
        let j = Interval::new(r(29, 10), r(31, 10));
        assert_eq!(j.floor(), None);
    }

    #[test]
    fn formatting() {
        assert_eq!(format_sci(&r(123456, 1), 3), "1.23e5");
        assert_eq!(format_sci(&r(-999, 1000), 2), "-1.0e0");
        assert_eq!(format_fixed(&r(301029995, 1000000000), 6), "0.301030");
        assert_eq!(format_fixed(&r(-1, 1), 2), "-1.00");
    }
}
