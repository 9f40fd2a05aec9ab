//! Explicit constants of the finiteness and interval theorems, interval-cover
//! arithmetic, and the reduction from Diophantine systems to twisted pairs.
//!
//! `log` is the natural logarithm and `[x]` the floor. Real constants are
//! enclosed in intervals; floors and comparisons are only reported once the
//! enclosure decides them, raising the working precision as needed.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact_reals::FactoredReal;
use crate::infima::SystemInstance;
use crate::interval::{format_fixed, format_sci, ln_rational, Interval};
use crate::places::Place;
use crate::twisted::{
    pair_invariants, rational_json, twisted_height, validate, LocalData, TwistedPair,
};

/// Starting precision (bits of absolute error) of the default ladder.
pub const DEFAULT_BITS: u32 = 96;
const MAX_BITS: u32 = 16_384;
/// Significant digits in rendered reports.
pub const REPORT_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tier {
    Exact,
    Log10,
    LogLog10,
}

impl Tier {
    pub fn name(self) -> &'static str {
        match self {
            Tier::Exact => "exact",
            Tier::Log10 => "log10",
            Tier::LogLog10 => "loglog10",
        }
    }
}

/// One named constant of a report.
#[derive(Clone, Debug)]
pub struct Constant {
    pub name: String,
    pub tier: Tier,
    pub exact: Option<BigRational>,
    /// Enclosure of the value, when it is a moderately sized real.
    pub value: Option<Interval>,
    pub log10: Option<Interval>,
    pub loglog10: Option<Interval>,
}

fn rel_digits_ok(iv: &Interval) -> bool {
    iv.rel_width_f64() < 1e-15 || iv.width() < BigRational::new(1.into(), BigInt::from(10).pow(16))
}

impl Constant {
    fn exact(name: &str, x: BigRational) -> Self {
        Constant {
            name: name.into(),
            tier: Tier::Exact,
            exact: Some(x),
            value: None,
            log10: None,
            loglog10: None,
        }
    }

    fn real(name: &str, value: Interval, bits: u32) -> Option<Self> {
        let log10 = value.log10(bits)?;
        Some(Constant {
            name: name.into(),
            tier: Tier::Log10,
            exact: None,
            value: Some(value),
            log10: Some(log10),
            loglog10: None,
        })
    }

    fn from_log10(name: &str, log10: Interval) -> Self {
        Constant {
            name: name.into(),
            tier: Tier::Log10,
            exact: None,
            value: None,
            log10: Some(log10),
            loglog10: None,
        }
    }

    fn from_factored(name: &str, x: &FactoredReal, bits: u32) -> Self {
        match x.to_rational() {
            Some(r) => Constant::exact(name, r),
            None => {
                let ln10 = ln_rational(&BigRational::from_integer(10.into()), bits + 8);
                Constant::from_log10(name, x.ln_interval(bits + 8).div(&ln10).unwrap())
            }
        }
    }

    fn resolved(&self) -> bool {
        [&self.value, &self.log10, &self.loglog10]
            .iter()
            .all(|iv| iv.as_ref().map_or(true, rel_digits_ok))
    }

    /// Float approximation of the most informative stored quantity.
    pub fn approx(&self) -> f64 {
        match self.tier {
            Tier::Exact => crate::interval::ratio_to_f64(self.exact.as_ref().unwrap()),
            Tier::Log10 => match &self.value {
                Some(v) => v.to_f64(),
                None => 10f64.powf(self.log10.as_ref().unwrap().to_f64()),
            },
            Tier::LogLog10 => self.loglog10.as_ref().unwrap().to_f64(),
        }
    }

    /// Agreement with another evaluation to `sig` significant digits.
    pub fn agrees(&self, o: &Constant, sig: i32) -> bool {
        if self.tier != o.tier || self.name != o.name {
            return false;
        }
        let tol = 10f64.powi(-sig);
        let close = |a: &Interval, b: &Interval| {
            let (x, y) = (a.to_f64(), b.to_f64());
            (x - y).abs() <= tol * x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
        };
        match self.tier {
            Tier::Exact => self.exact == o.exact,
            Tier::Log10 => match (&self.value, &o.value) {
                (Some(a), Some(b)) => close(a, b),
                _ => {
                    let (a, b) = (self.log10.as_ref().unwrap(), o.log10.as_ref().unwrap());
                    (a.to_f64() - b.to_f64()).abs() <= tol / std::f64::consts::LN_10
                }
            },
            Tier::LogLog10 => close(
                self.loglog10.as_ref().unwrap(),
                o.loglog10.as_ref().unwrap(),
            ),
        }
    }

    /// Decimal value rendered from the log10 enclosure, `m.mmm...eK`.
    fn sci_from_log10(l: &Interval, sig: usize) -> String {
        let mid = l.mid();
        let k = mid.floor();
        let frac = crate::interval::ratio_to_f64(&(&mid - &k));
        let m = 10f64.powf(frac);
        let s = format!("{:.*e}", sig - 1, m);
        let (mant, e) = s.split_once('e').unwrap();
        let e: i64 = e.parse::<i64>().unwrap() + k.to_integer().to_i64().unwrap_or(0);
        format!("{mant}e{e}")
    }

    pub fn to_json(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("name".into(), json!(self.name));
        m.insert("tier".into(), json!(self.tier.name()));
        match self.tier {
            Tier::Exact => {
                let x = self.exact.as_ref().unwrap();
                m.insert("value".into(), rational_json(x));
            }
            Tier::Log10 => {
                let l = self.log10.as_ref().unwrap();
                let v = match &self.value {
                    Some(v) => v.to_sci(REPORT_DIGITS),
                    None => Self::sci_from_log10(l, REPORT_DIGITS),
                };
                m.insert("value".into(), json!(v));
                m.insert("log10".into(), json!(format_fixed(&l.mid(), REPORT_DIGITS)));
            }
            Tier::LogLog10 => {
                let l = self.loglog10.as_ref().unwrap();
                m.insert(
                    "loglog10".into(),
                    json!(format_sci(&l.mid(), REPORT_DIGITS)),
                );
            }
        }
        Value::Object(m)
    }
}

/// Inputs of the calculator. Fields not used by a theorem are ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundParams {
    pub n: u64,
    pub delta: Option<BigRational>,
    pub eps: Option<BigRational>,
    pub r: Option<u64>,
    /// Degree `D` of the field generated by the forms over `K`.
    pub big_d: u64,
    /// Degree `d` of `K`.
    pub small_d: u64,
    pub s: Option<u64>,
    pub h_l: BigRational,
    pub h_star: BigRational,
}

impl BoundParams {
    pub fn new(n: u64) -> Self {
        BoundParams {
            n,
            delta: None,
            eps: None,
            r: None,
            big_d: 1,
            small_d: 1,
            s: None,
            h_l: BigRational::one(),
            h_star: BigRational::one(),
        }
    }

    pub fn delta(mut self, d: BigRational) -> Self {
        self.delta = Some(d);
        self
    }

    pub fn eps(mut self, e: BigRational) -> Self {
        self.eps = Some(e);
        self
    }

    pub fn r(mut self, r: u64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn h_l(mut self, h: BigRational) -> Self {
        self.h_l = h;
        self
    }

    pub fn h_star(mut self, h: BigRational) -> Self {
        self.h_star = h;
        self
    }

    pub fn s(mut self, s: u64) -> Self {
        self.s = Some(s);
        self
    }

    pub fn to_json(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("n".into(), json!(self.n));
        if let Some(d) = &self.delta {
            m.insert("delta".into(), rational_json(d));
        }
        if let Some(e) = &self.eps {
            m.insert("eps".into(), rational_json(e));
        }
        if let Some(r) = self.r {
            m.insert("R".into(), json!(r));
        }
        if let Some(s) = self.s {
            m.insert("s".into(), json!(s));
        }
        m.insert("D".into(), json!(self.big_d));
        m.insert("d".into(), json!(self.small_d));
        m.insert("H_L".into(), rational_json(&self.h_l));
        m.insert("H_star".into(), rational_json(&self.h_star));
        Value::Object(m)
    }
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub theorem: String,
    pub params: BoundParams,
    pub constants: Vec<Constant>,
    /// Precision at which every constant was resolved.
    pub bits: u32,
}

impl BoundReport {
    pub fn get(&self, name: &str) -> Option<&Constant> {
        self.constants.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "theorem": self.theorem,
            "log": "natural",
            "floor": "[x] = floor(x)",
            "inputs": self.params.to_json(),
            "constants": self.constants.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }
}

pub const THEOREMS: [&str; 10] = [
    "1.1", "1.2", "1.3", "2.1", "2.2", "2.3", "3.1", "3.1b", "3.2", "8.1",
];

fn qi(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn pow_q(base: u64, e: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(base).pow(e as u32))
}

fn in_unit(name: &str, x: &Option<BigRational>) -> Result<BigRational> {
    let x = x
        .clone()
        .ok_or_else(|| Error::Domain(format!("missing parameter {name}")))?;
    if !x.is_positive() || x > BigRational::one() {
        return Err(Error::Domain(format!("{name} = {x} outside (0, 1]")));
    }
    Ok(x)
}

/// Precision-parametrized evaluation helpers.
struct Ev {
    bits: u32,
}

impl Ev {
    fn ln(&self, x: &BigRational) -> Interval {
        ln_rational(x, self.bits)
    }

    fn ln_iv(&self, x: &Interval) -> Option<Interval> {
        x.ln(self.bits)
    }

    fn floor(&self, x: &Interval) -> Option<BigInt> {
        x.floor()
    }
}

/// `(coefficient, delta-power)` evaluation of `[k * delta^-e * log(arg)]`, returned exactly.
fn floor_const(
    ev: &Ev,
    name: &str,
    coeff: BigRational,
    ln_arg: &BigRational,
) -> Option<(Constant, BigInt)> {
    let v = ev.ln(ln_arg).scale(&coeff);
    let m = ev.floor(&v)?;
    Some((
        Constant::exact(name, BigRational::from_integer(m.clone())),
        m,
    ))
}

fn c_zero(p: &BoundParams, delta: &BigRational, r: u64, bits: u32) -> Result<Constant> {
    let hl =
        FactoredReal::from_rational(&p.h_l)?.pow(&BigRational::new(1.into(), (r as i64).into()));
    let nd = FactoredReal::from_integer(p.n as i64)?.pow(&delta.recip());
    Ok(Constant::from_factored("C0", &hl.max(nd), bits))
}

fn c_one(p: &BoundParams, eps: &BigRational, r: u64, bits: u32) -> Result<Constant> {
    let hs = FactoredReal::from_rational(&p.h_star)?
        .pow(&BigRational::new(1.into(), BigInt::from(3 * r * p.big_d)));
    let ne = FactoredReal::from_integer(p.n as i64)?.pow(&(qi(p.n) / eps));
    Ok(Constant::from_factored("C1", &hs.max(ne), bits))
}

fn validate_params(thm: &str, p: &BoundParams) -> Result<()> {
    if !THEOREMS.contains(&thm) {
        return Err(Error::Domain(format!("unknown theorem id {thm}")));
    }
    if p.n < 2 {
        return Err(Error::Domain("n must be at least 2".into()));
    }
    if p.h_l < BigRational::one() || p.h_star < BigRational::one() {
        return Err(Error::Domain("heights must be at least 1".into()));
    }
    if p.big_d == 0 || p.small_d == 0 {
        return Err(Error::Domain("degrees must be positive".into()));
    }
    let needs_r = matches!(thm, "2.1" | "2.2" | "2.3" | "3.1" | "3.2" | "8.1");
    if needs_r {
        let r =
            p.r.ok_or_else(|| Error::Domain("missing parameter R".into()))?;
        let min = if thm.starts_with('3') { 1 } else { p.n };
        if r < min {
            return Err(Error::Domain(format!("R = {r} must be at least {min}")));
        }
    }
    if thm == "3.1b" && p.s.is_none_or(|s| s == 0) {
        return Err(Error::Domain("missing or zero parameter s".into()));
    }
    Ok(())
}

/// One evaluation attempt at fixed precision; `None` if some floor or digit
/// is not yet decided.
fn eval_at(thm: &str, p: &BoundParams, bits: u32) -> Result<Option<Vec<Constant>>> {
    let ev = Ev { bits };
    let n = p.n;
    let k2n = pow_q(2, 2 * n);
    let mut out = Vec::new();
    macro_rules! tryo {
        ($e:expr) => {
            match $e {
                Some(v) => v,
                None => return Ok(None),
            }
        };
    }
    match thm {
        "1.1" | "1.2" => {
            let d = in_unit("delta", &p.delta)?;
            let arg = qi(6 * n) / &d;
            if thm == "1.1" {
                let l = ev.ln(&arg);
                let c = pow_q(10, 6) * &k2n * pow_q(n, 10) / d.pow(3);
                out.push(tryo!(Constant::real("t3", l.mul(&l).scale(&c), bits)));
            } else {
                let c = pow_q(10, 5) * &k2n * pow_q(n, 10) / d.pow(2);
                out.push(tryo!(floor_const(&ev, "m", c, &arg)).0);
                out.push(tryo!(Constant::real(
                    "omega",
                    ev.ln(&qi(6 * n)).scale(&d.recip()),
                    bits
                )));
            }
            out.push(Constant::from_factored(
                "Q_threshold",
                &FactoredReal::from_integer(n as i64)?.pow(&d.recip()),
                bits,
            ));
        }
        "1.3" => {
            let e = in_unit("eps", &p.eps)?;
            let c = pow_q(10, 6) * &k2n * pow_q(n, 12) / e.pow(2);
            out.push(tryo!(floor_const(&ev, "m_prime", c, &(qi(6 * n) / &e))).0);
            let w = ev.ln(&qi(6 * n)).scale(&(qi(2 * n) / &e));
            out.push(tryo!(Constant::real("omega_prime", w, bits)));
            out.push(Constant::from_factored(
                "H_threshold",
                &FactoredReal::from_integer(n as i64)?.pow(&(qi(n) / &e)),
                bits,
            ));
        }
        "2.1" | "2.3" => {
            let d = in_unit("delta", &p.delta)?;
            let r = p.r.unwrap();
            let arg = qi(3 * r) / &d;
            if thm == "2.1" {
                let inner = tryo!(ev.ln_iv(&ev.ln(&qi(3 * r)).scale(&d.recip())));
                let c = pow_q(10, 6) * &k2n * pow_q(n, 10) / d.pow(3);
                out.push(tryo!(Constant::real(
                    "t0",
                    ev.ln(&arg).mul(&inner).scale(&c),
                    bits
                )));
            } else {
                let c = pow_q(10, 5) * &k2n * pow_q(n, 10) / d.pow(2);
                out.push(tryo!(floor_const(&ev, "m0", c, &arg)).0);
                out.push(tryo!(Constant::real(
                    "omega0",
                    ev.ln(&qi(3 * r)).scale(&d.recip()),
                    bits
                )));
            }
            out.push(c_zero(p, &d, r, bits)?);
        }
        "2.2" => {
            let d = in_unit("delta", &p.delta)?;
            let r = p.r.unwrap();
            // log log 3 H_L^{1/R} = log(log 3 + log(H_L) / R)
            let l3h = ev.ln(&qi(3)).add(
                &ev.ln(&p.h_l)
                    .scale(&BigRational::new(1.into(), (r as i64).into())),
            );
            let ll = tryo!(ev.ln_iv(&l3h));
            let big = pow_q(90 * n, n * p.small_d);
            let t1 = ll
                .scale(&qi(3))
                .add(&Interval::exact(big))
                .scale(&d.recip());
            out.push(tryo!(Constant::real("t1", t1, bits)));
            out.push(c_zero(p, &d, r, bits)?);
        }
        "3.1" | "3.2" => {
            let e = in_unit("eps", &p.eps)?;
            let r = p.r.unwrap();
            let rd = r * p.big_d;
            let arg = qi(3 * rd) / &e;
            if thm == "3.1" {
                let inner = tryo!(ev.ln_iv(&ev.ln(&qi(3 * rd)).scale(&e.recip())));
                let c = pow_q(10, 9) * &k2n * pow_q(n, 14) / e.pow(3);
                out.push(tryo!(Constant::real(
                    "count",
                    ev.ln(&arg).mul(&inner).scale(&c),
                    bits
                )));
            } else {
                let c = pow_q(10, 8) * &k2n * pow_q(n, 14) / e.pow(2);
                out.push(tryo!(floor_const(&ev, "m1", c, &arg)).0);
                let w = ev.ln(&qi(3 * rd)).scale(&(qi(3 * n) / &e));
                out.push(tryo!(Constant::real("omega1", w, bits)));
            }
            out.push(c_one(p, &e, r, bits)?);
        }
        "3.1b" => {
            let e = in_unit("eps", &p.eps)?;
            let s = p.s.unwrap();
            let dd = p.big_d;
            let inner = tryo!(ev.ln_iv(&ev.ln(&qi(3 * dd)).scale(&e.recip())));
            let lead = (qi(9 * n * n) / &e).pow((n * s) as i32);
            let c = lead * pow_q(10, 10) * &k2n * pow_q(n, 15) / e.pow(3);
            out.push(tryo!(Constant::real(
                "count",
                ev.ln(&(qi(3 * dd) / &e)).mul(&inner).scale(&c),
                bits
            )));
        }
        "8.1" => {
            let d = in_unit("delta", &p.delta)?;
            let r = p.r.unwrap();
            let c = qi(61) * pow_q(n, 6) * &k2n / d.pow(2);
            let arg = qi(22 * n * n) * pow_q(2, n) * qi(r) / &d;
            let (mc, m2) = tryo!(floor_const(&ev, "m2", c, &arg));
            out.push(mc);
            if !m2.is_positive() {
                return Err(Error::Domain("m2 is not positive".into()));
            }
            let mq = BigRational::from_integer(m2.clone());
            // omega2 = m2^(5/2) = m2^2 * sqrt(m2), enclosed through an integer square root.
            let scale = BigInt::one() << (bits as usize / 2 + 8);
            let root = (&m2 * &scale * &scale).sqrt();
            let sq = Interval::new(
                BigRational::new(root.clone(), scale.clone()),
                BigRational::new(root + 1, scale),
            );
            out.push(tryo!(Constant::real(
                "omega2",
                sq.scale(&(&mq * &mq)),
                bits
            )));
            // log10 log10 C2 = 2 m2 log10 m2 + log10 log10 (2 H_L)
            let l10 = |x: &BigRational| ev.ln(x).div(&ev.ln(&qi(10))).unwrap();
            let lm = l10(&mq).scale(&(qi(2) * &mq));
            let l2h = l10(&(qi(2) * &p.h_l));
            let ll = tryo!(l2h.log10(bits));
            let c2 = Constant {
                name: "C2".into(),
                tier: Tier::LogLog10,
                exact: None,
                value: None,
                log10: None,
                loglog10: Some(lm.add(&ll)),
            };
            out.push(c2);
        }
        _ => unreachable!(),
    }
    if out.iter().all(|c| c.resolved()) {
        Ok(Some(out))
    } else {
        Ok(None)
    }
}

/// Evaluate with a precision ladder starting at `start_bits` and doubling.
pub fn bound_constants_from(thm: &str, p: &BoundParams, start_bits: u32) -> Result<BoundReport> {
    validate_params(thm, p)?;
    let mut bits = start_bits.max(32);
    loop {
        if let Some(constants) = eval_at(thm, p, bits)? {
            return Ok(BoundReport {
                theorem: thm.into(),
                params: p.clone(),
                constants,
                bits,
            });
        }
        bits *= 2;
        if bits > MAX_BITS {
            return Err(Error::Domain(format!(
                "constants of {thm} not resolved at {MAX_BITS} bits"
            )));
        }
    }
}

pub fn bound_constants(thm: &str, p: &BoundParams) -> Result<BoundReport> {
    bound_constants_from(thm, p, DEFAULT_BITS)
}

/// Run `f` at increasing precision until it decides.
fn ladder<T>(mut f: impl FnMut(u32) -> Option<T>) -> Result<T> {
    let mut bits = DEFAULT_BITS;
    while bits <= MAX_BITS {
        if let Some(t) = f(bits) {
            return Ok(t);
        }
        bits *= 2;
    }
    Err(Error::Domain(
        "comparison not decided at maximal precision".into(),
    ))
}

/// `1 + 3 delta^-1 m0 (1 + log omega0) <= t0-bound`, the step from the
/// interval result to the subspace count.
pub fn t0_consistency(n: u64, r: u64, delta: &BigRational) -> Result<bool> {
    let p = BoundParams::new(n).delta(delta.clone()).r(r);
    let m0 = bound_constants("2.3", &p)?
        .get("m0")
        .unwrap()
        .exact
        .clone()
        .unwrap();
    let lhs_coeff = qi(3) * &m0 / delta;
    ladder(|bits| {
        let ev = Ev { bits };
        let om = ev.ln(&qi(3 * r)).scale(&delta.recip());
        let lhs = ev
            .ln_iv(&om)?
            .add(&Interval::from_int(1))
            .scale(&lhs_coeff)
            .add(&Interval::from_int(1));
        let t0 = eval_at("2.1", &p, bits).ok()??.remove(0).value.unwrap();
        if lhs.hi <= t0.lo {
            Some(true)
        } else if lhs.lo > t0.hi {
            Some(false)
        } else {
            None
        }
    })
}

#[derive(Clone, Debug)]
pub struct DiophantineCheck {
    pub m: BigInt,
    pub m_prime: BigInt,
    pub omega_le: bool,
    pub threshold_equal: bool,
}

impl DiophantineCheck {
    pub fn holds(&self) -> bool {
        self.m <= self.m_prime && self.omega_le && self.threshold_equal
    }
}

/// The interval theorem applied with `delta = eps/(n+eps)` and `Q = H^{1+eps/n}`
/// stays within the constants of the corollary for Diophantine inequalities.
pub fn diophantine_consistency(n: u64, eps: &BigRational) -> Result<DiophantineCheck> {
    let delta = eps / (qi(n) + eps);
    let base = bound_constants("2.3", &BoundParams::new(n).delta(delta.clone()).r(2 * n))?;
    let cor = bound_constants("1.3", &BoundParams::new(n).eps(eps.clone()))?;
    let m = base.get("m0").unwrap().exact.clone().unwrap().to_integer();
    let m_prime = cor
        .get("m_prime")
        .unwrap()
        .exact
        .clone()
        .unwrap()
        .to_integer();
    let omega_le = ladder(|bits| {
        let ev = Ev { bits };
        let w = ev.ln(&qi(6 * n)).scale(&delta.recip());
        let wp = ev.ln(&qi(6 * n)).scale(&(qi(2 * n) / eps));
        if w.hi <= wp.lo {
            Some(true)
        } else if w.lo > wp.hi {
            Some(false)
        } else {
            None
        }
    })?;
    let nf = FactoredReal::from_integer(n as i64)?;
    let q_thr = nf.pow(&delta.recip());
    let h_thr = q_thr.pow(&(qi(n) / (qi(n) + eps)));
    Ok(DiophantineCheck {
        m,
        m_prime,
        omega_le,
        threshold_equal: h_thr == nf.pow(&(qi(n) / eps)),
    })
}

/// Smallest `s >= 0` with `r^s >= x`, for `x` enclosed at increasing precision.
fn min_power_at_least(r: &BigRational, x_at: impl Fn(u32) -> Option<Interval>) -> Result<u64> {
    ladder(|bits| {
        let x = x_at(bits)?;
        let mut s = 0u64;
        let mut pw = BigRational::one();
        loop {
            match x.cmp_rational(&pw) {
                Some(std::cmp::Ordering::Greater) => {}
                Some(_) => return Some(s),
                None => return None,
            }
            pw *= r;
            s += 1;
        }
    })
}

/// Largest `k >= 0` with `r^k <= x`, for `x >= 1`.
fn max_power_at_most(r: &BigRational, x_at: impl Fn(u32) -> Option<Interval>) -> Result<u64> {
    ladder(|bits| {
        let x = x_at(bits)?;
        let mut k = 0u64;
        let mut pw = r.clone();
        loop {
            match x.cmp_rational(&pw) {
                Some(std::cmp::Ordering::Less) => return Some(k),
                Some(_) => {}
                None => return None,
            }
            pw *= r;
            k += 1;
        }
    })
}

/// `ln a / ln b` when it is rational, i.e. when `a` is a rational power of `b`.
fn exact_log_ratio(a: &BigRational, b: &BigRational) -> Option<BigRational> {
    let fa = FactoredReal::from_rational(a).ok()?;
    let fb = FactoredReal::from_rational(b).ok()?;
    let (p, e) = fb.exponents().iter().next()?;
    let t = fa.exponents().get(p).cloned().unwrap_or_default() / e;
    (fa == fb.pow(&t)).then_some(t)
}

fn step(delta: &BigRational) -> BigRational {
    BigRational::one() + delta / qi(2)
}

/// Minimal `s` with `(1 + delta/2)^s >= omega`, for rational `omega > 1`.
pub fn interval_cover(omega: &BigRational, delta: &BigRational) -> Result<u64> {
    if *omega <= BigRational::one() {
        return Err(Error::Domain("omega must exceed 1".into()));
    }
    let d = in_unit("delta", &Some(delta.clone()))?;
    let w = omega.clone();
    min_power_at_least(&step(&d), move |_| Some(Interval::exact(w.clone())))
}

/// Same, for `omega` given by enclosures at increasing precision.
pub fn interval_cover_real(omega_at: impl Fn(u32) -> Interval, delta: &BigRational) -> Result<u64> {
    let d = in_unit("delta", &Some(delta.clone()))?;
    min_power_at_least(&step(&d), |b| Some(omega_at(b)))
}

/// `log10` of the endpoints `Q1^{(1+delta/2)^k}`, `k = 0..=s`.
pub fn cover_list(
    q1: &BigRational,
    omega: &BigRational,
    delta: &BigRational,
) -> Result<Vec<String>> {
    if *q1 < BigRational::one() {
        return Err(Error::Domain("Q1 must be at least 1".into()));
    }
    let s = interval_cover(omega, delta)?;
    let l = ln_rational(q1, DEFAULT_BITS)
        .div(&ln_rational(&qi(10), DEFAULT_BITS))
        .unwrap();
    let r = step(delta);
    let mut pw = BigRational::one();
    let mut out = Vec::new();
    for _ in 0..=s {
        out.push(format_fixed(&l.scale(&pw).mid(), REPORT_DIGITS));
        pw *= &r;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SmallQCover {
    pub s: u64,
    pub bound: f64,
    pub within_bound: bool,
}

/// `s1 = 1 + [log(delta log C0 / log n) / log(1 + delta/2)]`, with
/// `C0 = max(H_L^{1/R}, n^{1/delta})`, against `2 + 3 delta^-1 log log 3 H_L^{1/R}`.
pub fn s1(n: u64, delta: &BigRational, r: u64, h_l: &BigRational) -> Result<SmallQCover> {
    let d = in_unit("delta", &Some(delta.clone()))?;
    if n < 2 || r == 0 || *h_l < BigRational::one() {
        return Err(Error::Domain("need n >= 2, R >= 1, H_L >= 1".into()));
    }
    let rr = BigRational::new(1.into(), (r as i64).into());
    // x = delta log C0 / log n = max(delta log H_L / (R log n), 1)
    let exact = exact_log_ratio(h_l, &qi(n))
        .map(|t| Interval::exact((t * &d * &rr).max(BigRational::one())));
    let x_at = |bits: u32| {
        if let Some(x) = &exact {
            return Some(x.clone());
        }
        let ev = Ev { bits };
        let a = ev.ln(h_l).scale(&(&d * &rr)).div(&ev.ln(&qi(n)))?;
        Some(a.max(&Interval::from_int(1)))
    };
    let k = max_power_at_most(&step(&d), x_at)?;
    let s = k + 1;
    let within = ladder(|bits| {
        let ev = Ev { bits };
        let l3h = ev.ln(&qi(3)).add(&ev.ln(h_l).scale(&rr));
        let bound = ev
            .ln_iv(&l3h)?
            .scale(&(qi(3) / &d))
            .add(&Interval::from_int(2));
        bound
            .cmp_rational(&qi(s))
            .map(|o| o != std::cmp::Ordering::Less)
            .map(|ok| (ok, bound.to_f64()))
    })?;
    Ok(SmallQCover {
        s,
        bound: within.1,
        within_bound: within.0,
    })
}

/// `s2 = 1 + [log(log(2 n^{1/2}) / log 2) / log(1 + delta/2)]`, against `4 delta^-1 log log 4 n^{1/2}`.
pub fn s2(n: u64, delta: &BigRational) -> Result<SmallQCover> {
    let d = in_unit("delta", &Some(delta.clone()))?;
    if n < 2 {
        return Err(Error::Domain("need n >= 2".into()));
    }
    // log(2 sqrt n) / log 2 = 1 + log n / (2 log 2)
    let exact =
        exact_log_ratio(&qi(n), &qi(2)).map(|t| Interval::exact(BigRational::one() + t / qi(2)));
    let x_at = |bits: u32| {
        if let Some(x) = &exact {
            return Some(x.clone());
        }
        let ev = Ev { bits };
        Some(
            ev.ln(&qi(n))
                .div(&ev.ln(&qi(2)).scale(&qi(2)))?
                .add(&Interval::from_int(1)),
        )
    };
    let s = max_power_at_most(&step(&d), x_at)? + 1;
    let within = ladder(|bits| {
        let ev = Ev { bits };
        // log log 4 sqrt n = log(log 4 + log(n) / 2)
        let inner = ev
            .ln(&qi(4))
            .add(&ev.ln(&qi(n)).scale(&BigRational::new(1.into(), 2.into())));
        let bound = ev.ln_iv(&inner)?.scale(&(qi(4) / &d));
        bound
            .cmp_rational(&qi(s))
            .map(|o| o == std::cmp::Ordering::Greater)
            .map(|ok| (ok, bound.to_f64()))
    })?;
    Ok(SmallQCover {
        s,
        bound: within.1,
        within_bound: within.0,
    })
}

#[derive(Clone, Debug)]
pub struct MergeResult {
    /// `log10 B_1 < ... < log10 B_{m'}`.
    pub b: Vec<BigRational>,
    /// Number of leading `B_j` needed to cover the input union.
    pub used: usize,
}

/// Re-cover `[1, A0) ∪ ⋃ [A_h, A_h^ω)` by `[1, B0) ∪ ⋃ [B_j, B_j^ω')`, all
/// in `log10` coordinates: `a0 = log10 A0`, `a = (log10 A_h)`, `b0 = log10 B0`.
pub fn merge_intervals(
    a0: &BigRational,
    a: &[BigRational],
    omega: &BigRational,
    b0: &BigRational,
    omega_p: &BigRational,
    m_p: usize,
) -> Result<MergeResult> {
    let one = BigRational::one();
    if a0.is_negative() || b0 < a0 {
        return Err(Error::Domain("need B0 >= A0 >= 1".into()));
    }
    if *omega <= one || omega_p < omega {
        return Err(Error::Domain("need omega' >= omega > 1".into()));
    }
    if a.is_empty() || m_p < a.len() {
        return Err(Error::Domain("need m' >= m > 0".into()));
    }
    if a[0] < *a0 || a.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("need A0 <= A1 < ... < Am".into()));
    }
    let tail = a.last().unwrap() * omega;
    // smallest point of S = ⋃ [a_h, ω a_h) ∪ [ω a_m, ∞) that is >= x
    let next_in_s = |x: &BigRational| -> BigRational {
        if *x >= tail {
            return x.clone();
        }
        for ah in a {
            if x < ah {
                return ah.clone();
            }
            if *x < ah * omega {
                return x.clone();
            }
        }
        tail.clone()
    };
    let mut b = Vec::with_capacity(m_p);
    let mut cursor = b0.clone();
    for _ in 0..m_p {
        let bj = next_in_s(&cursor);
        if b.last().is_some_and(|prev| *prev >= bj) {
            return Err(Error::Domain(
                "merged endpoints are not strictly increasing".into(),
            ));
        }
        cursor = &bj * omega_p;
        b.push(bj);
    }
    // Verify containment of every input interval above b0.
    let covered = |lo: &BigRational, hi: &BigRational| -> bool {
        let mut x = lo.clone().max(b0.clone());
        while x < *hi {
            match b.iter().find(|bj| **bj <= x && x < *bj * omega_p) {
                Some(bj) => x = bj * omega_p,
                None => return false,
            }
        }
        true
    };
    if !a.iter().all(|ah| covered(ah, &(ah * omega))) {
        return Err(Error::Domain(
            "merged intervals do not cover the input".into(),
        ));
    }
    let top = a.iter().map(|ah| ah * omega).max().unwrap();
    let used = b.iter().take_while(|bj| **bj < top).count();
    Ok(MergeResult { b, used })
}

/// Twisted pair attached to a system, with `delta` and the exponent of `Q = H^{1+eps/n}`.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub pair: TwistedPair,
    pub delta: BigRational,
    pub q_exponent: BigRational,
}

impl ReducedSystem {
    pub fn to_json(&self) -> Value {
        json!({
            "pair": self.pair.to_json(),
            "delta": rational_json(&self.delta),
            "q_exponent": rational_json(&self.q_exponent),
        })
    }

    /// `H_{L,c,Q}(x) <= Delta^{1/n} Q^{-delta}` with `Q = H(x)^{1+eps/n}`.
    pub fn predicate(&self, x: &[BigRational]) -> Result<bool> {
        let n = self.pair.n() as i64;
        let h = crate::places::height(x, crate::places::HeightKind::H)?;
        let q = h.pow(&self.q_exponent);
        let lhs = twisted_height(&self.pair, &q, x)?;
        let inv = pair_invariants(&self.pair)?;
        let rhs = inv
            .delta
            .pow(&BigRational::new(1.into(), n.into()))
            .mul(&q.pow(&-self.delta.clone()));
        Ok(lhs <= rhs)
    }
}

/// `c_iv = (n/(n+eps)) (d_iv - (1/n) sum_j d_jv)`, `delta = eps/(n+eps)`.
pub fn reduce_system(sys: &SystemInstance) -> Result<ReducedSystem> {
    sys.validate()?;
    let n = qi(sys.n as u64);
    let factor = &n / (&n + &sys.eps);
    let active: BTreeMap<Place, LocalData> = sys
        .places
        .iter()
        .map(|(v, d)| {
            let mean = d.exps.iter().sum::<BigRational>() / &n;
            let exps = d.exps.iter().map(|e| &factor * (e - &mean)).collect();
            (
                v.clone(),
                LocalData {
                    forms: d.forms.clone(),
                    exps,
                },
            )
        })
        .collect();
    let pair = TwistedPair::new(sys.n, active)?;
    let rep = validate(&pair);
    if !rep.normalized_ok {
        return Err(Error::Validation(format!(
            "reduced pair is not normalized: {}",
            rep.messages.join("; ")
        )));
    }
    Ok(ReducedSystem {
        pair,
        delta: &sys.eps / (&n + &sys.eps),
        q_exponent: BigRational::one() + &sys.eps / &n,
    })
}
