//! Weights of subspaces, the exceptional subspace `T(L, c)`, the slope
//! filtration, and the sub-, quotient- and exterior pairs derived from them.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{combinations, wedge};
use crate::linalg::{coords_in, dot, unit, Echelon, QVec, Subspace};
use crate::places::{height_rational, HeightKind, Place};
use crate::twisted::{qvec_json, rational_json, validate, LocalData, TwistedPair};

/// Default cap on the number of candidate subspaces.
pub const DEFAULT_LATTICE_CAP: usize = 100_000;

/// Indices sorted by ascending exponent, stable on ties.
pub fn sorted_order(exps: &[BigRational]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..exps.len()).collect();
    idx.sort_by(|&a, &b| exps[a].cmp(&exps[b]));
    idx
}

/// Restriction of a form to `U`, as coordinates against the basis of `U`.
fn restrict(form: &[BigRational], u: &Subspace) -> QVec {
    u.basis().iter().map(|b| dot(form, b)).collect()
}

/// The greedy index set `I_v(U)`, in the order the indices were picked.
pub fn index_set(forms: &[QVec], exps: &[BigRational], u: &Subspace) -> Vec<usize> {
    let mut ech = Echelon::default();
    let mut picked = Vec::new();
    for i in sorted_order(exps) {
        if picked.len() == u.dim() {
            break;
        }
        if ech.try_insert(restrict(&forms[i], u)) {
            picked.push(i);
        }
    }
    picked
}

pub fn local_weight(forms: &[QVec], exps: &[BigRational], u: &Subspace) -> BigRational {
    index_set(forms, exps, u)
        .iter()
        .map(|&i| exps[i].clone())
        .sum()
}

/// `w(U)`: the sum of local weights over active places.
pub fn weight(pair: &TwistedPair, u: &Subspace) -> BigRational {
    pair.active()
        .values()
        .map(|d| local_weight(&d.forms, &d.exps, u))
        .sum()
}

/// `mu(U2, U1) = (w(U2) - w(U1)) / (dim U2 - dim U1)`.
pub fn slope(pair: &TwistedPair, u2: &Subspace, u1: &Subspace) -> BigRational {
    let dd = u2.dim() as i64 - u1.dim() as i64;
    (weight(pair, u2) - weight(pair, u1)) / BigRational::from_integer(dd.into())
}

/// `U_0 ⊃ U_1 ⊃ ... ⊃ U_n`: kernels of the first `i` forms after sorting.
pub fn flag_subspaces(pair: &TwistedPair, v: &Place) -> Vec<Subspace> {
    let (forms, exps) = pair.local(v);
    let order = sorted_order(&exps);
    (0..=pair.n())
        .map(|i| {
            let pre: Vec<QVec> = order[..i].iter().map(|&j| forms[j].clone()).collect();
            Subspace::common_kernel(pair.n(), &pre)
        })
        .collect()
}

/// The local weight recomputed from intersection dimensions with the flag.
pub fn local_weight_from_flags(pair: &TwistedPair, v: &Place, u: &Subspace) -> BigRational {
    let (_, exps) = pair.local(v);
    let order = sorted_order(&exps);
    let flags = flag_subspaces(pair, v);
    (1..=pair.n())
        .map(|i| {
            let drop =
                u.intersect(&flags[i - 1]).dim() as i64 - u.intersect(&flags[i]).dim() as i64;
            &exps[order[i - 1]] * BigRational::from_integer(drop.into())
        })
        .sum()
}

/// Flags at strict exponent jumps over all active places. Weights depend only
/// on intersection dimensions with these.
pub fn lattice_generators(pair: &TwistedPair) -> Vec<Subspace> {
    let mut gens = Vec::new();
    for (v, d) in pair.active() {
        let order = sorted_order(&d.exps);
        let flags = flag_subspaces(pair, v);
        for i in 1..pair.n() {
            if d.exps[order[i - 1]] < d.exps[order[i]] && !gens.contains(&flags[i]) {
                gens.push(flags[i].clone());
            }
        }
    }
    gens
}

/// Closure of the generators, `{0}` and the full space under `∩` and `+`.
/// Deterministic order: discovery order.
pub fn candidate_lattice(pair: &TwistedPair, cap: usize) -> Result<Vec<Subspace>> {
    let n = pair.n();
    let mut seen: HashSet<Subspace> = HashSet::new();
    let mut all: Vec<Subspace> = Vec::new();
    let push =
        |s: Subspace, seen: &mut HashSet<Subspace>, all: &mut Vec<Subspace>| -> Result<bool> {
            if seen.contains(&s) {
                return Ok(false);
            }
            if all.len() >= cap {
                return Err(Error::LatticeOverflow { cap });
            }
            seen.insert(s.clone());
            all.push(s);
            Ok(true)
        };
    push(Subspace::zero(n), &mut seen, &mut all)?;
    push(Subspace::full(n), &mut seen, &mut all)?;
    for g in lattice_generators(pair) {
        push(g, &mut seen, &mut all)?;
    }
    let mut i = 0;
    while i < all.len() {
        for j in 0..i {
            let a = all[i].clone();
            let b = all[j].clone();
            push(a.intersect(&b), &mut seen, &mut all)?;
            push(a.sum(&b), &mut seen, &mut all)?;
        }
        i += 1;
    }
    Ok(all)
}

struct WeightCache<'a> {
    pair: &'a TwistedPair,
    memo: HashMap<Subspace, BigRational>,
}

impl<'a> WeightCache<'a> {
    fn new(pair: &'a TwistedPair) -> Self {
        WeightCache {
            pair,
            memo: HashMap::new(),
        }
    }

    fn get(&mut self, u: &Subspace) -> BigRational {
        if let Some(w) = self.memo.get(u) {
            return w.clone();
        }
        let w = weight(self.pair, u);
        self.memo.insert(u.clone(), w.clone());
        w
    }
}

/// Proper `U ⊂ V` from `cands` minimizing `mu(V, U)`, then `dim U`.
fn best_below(cands: &[Subspace], v: &Subspace, cache: &mut WeightCache) -> Result<Subspace> {
    let wv = cache.get(v);
    let mut best: Option<(BigRational, usize, Vec<&Subspace>)> = None;
    for u in cands {
        if u.dim() >= v.dim() || !u.is_subspace_of(v) {
            continue;
        }
        let mu = (&wv - cache.get(u)) / BigRational::from_integer(BigInt::from(v.dim() - u.dim()));
        match &mut best {
            None => best = Some((mu, u.dim(), vec![u])),
            Some((bm, bd, list)) => {
                if mu < *bm || (mu == *bm && u.dim() < *bd) {
                    *bm = mu;
                    *bd = u.dim();
                    *list = vec![u];
                } else if mu == *bm && u.dim() == *bd {
                    list.push(u);
                }
            }
        }
    }
    let (_, _, list) =
        best.ok_or_else(|| Error::Domain("no proper subspace below a zero space".into()))?;
    if list.len() != 1 {
        return Err(Error::Domain(format!(
            "{} candidates tie for the exceptional subspace",
            list.len()
        )));
    }
    Ok(list[0].clone())
}

pub fn exceptional_subspace_with_cap(pair: &TwistedPair, cap: usize) -> Result<Subspace> {
    require_core(pair)?;
    let cands = candidate_lattice(pair, cap)?;
    let mut cache = WeightCache::new(pair);
    best_below(&cands, &Subspace::full(pair.n()), &mut cache)
}

/// `T(L, c)`: the proper subspace of minimal slope to the whole space, of
/// minimal dimension among those. For normalized pairs this maximizes
/// `w(U) / (n - dim U)`.
pub fn exceptional_subspace(pair: &TwistedPair) -> Result<Subspace> {
    exceptional_subspace_with_cap(pair, DEFAULT_LATTICE_CAP)
}

fn require_core(pair: &TwistedPair) -> Result<()> {
    let rep = validate(pair);
    if rep.core_ok {
        Ok(())
    } else {
        Err(Error::Validation(rep.messages.join("; ")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedSubspace {
    pub space: Subspace,
    pub weight: BigRational,
    /// `mu(T_l, T_{l-1})`; absent for `T_0 = {0}`.
    pub slope: Option<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiltrationChain {
    /// `{0} = T_0 ⊂ T_1 ⊂ ... ⊂ T_r = Q^n`
    pub chain: Vec<WeightedSubspace>,
}

impl FiltrationChain {
    pub fn slopes(&self) -> Vec<BigRational> {
        self.chain.iter().filter_map(|w| w.slope.clone()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.chain.iter().map(|w| w.space.dim()).collect()
    }

    /// Slope governing the `i`-th infimum (1-based), i.e. `mu_l` with `d_{l-1} < i <= d_l`.
    pub fn slope_for_index(&self, i: usize) -> BigRational {
        for w in &self.chain[1..] {
            if i <= w.space.dim() {
                return w.slope.clone().unwrap();
            }
        }
        panic!("index {i} beyond dimension");
    }

    pub fn to_json(&self) -> Value {
        let chain: Vec<Value> = self.chain[1..]
            .iter()
            .map(|w| {
                json!({
                    "basis": w.space.basis().iter().map(|b| qvec_json(b)).collect::<Vec<_>>(),
                    "dim": w.space.dim(),
                    "weight": rational_json(&w.weight),
                    "slope": rational_json(w.slope.as_ref().unwrap()),
                })
            })
            .collect();
        json!({ "chain": chain })
    }
}

pub fn filtration_with_cap(pair: &TwistedPair, cap: usize) -> Result<FiltrationChain> {
    require_core(pair)?;
    let n = pair.n();
    let cands = candidate_lattice(pair, cap)?;
    let mut cache = WeightCache::new(pair);
    let mut spaces = vec![Subspace::full(n)];
    let mut v = Subspace::full(n);
    while !v.is_zero() {
        v = best_below(&cands, &v, &mut cache)?;
        spaces.push(v.clone());
    }
    spaces.reverse();
    let mut chain: Vec<WeightedSubspace> = Vec::new();
    for (l, s) in spaces.iter().enumerate() {
        let w = cache.get(s);
        let slope = (l > 0).then(|| {
            let prev = &chain[l - 1];
            (&w - &prev.weight)
                / BigRational::from_integer(BigInt::from(s.dim() - prev.space.dim()))
        });
        chain.push(WeightedSubspace {
            space: s.clone(),
            weight: w,
            slope,
        });
    }
    let sl: Vec<BigRational> = chain.iter().filter_map(|c| c.slope.clone()).collect();
    if sl.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Domain(
            "filtration slopes are not strictly decreasing".into(),
        ));
    }
    Ok(FiltrationChain { chain })
}

pub fn filtration(pair: &TwistedPair) -> Result<FiltrationChain> {
    filtration_with_cap(pair, DEFAULT_LATTICE_CAP)
}

fn all_ones(n: usize) -> QVec {
    vec![BigRational::one(); n]
}

/// Families of pairwise disjoint nonempty subsets of `{0..n-1}`, at least one set.
fn disjoint_families(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            if !cur.is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        rec(i + 1, n, cur, out);
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, n, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        rec(i + 1, n, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

fn family_space(n: usize, fam: &[Vec<usize>]) -> Subspace {
    let eqs: Vec<QVec> = fam
        .iter()
        .map(|set| {
            (0..n)
                .map(|j| {
                    if set.contains(&j) {
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

/// For pairs whose forms are coordinate forms or the all-ones form, the
/// exceptional subspace is cut out by block sums over disjoint index sets.
/// Returns the blocks (0-based) after cross-checking the generic search.
pub fn special_case_t(pair: &TwistedPair) -> Result<Vec<Vec<usize>>> {
    require_core(pair)?;
    let n = pair.n();
    let ones = all_ones(n);
    let eligible = |f: &QVec| *f == ones || (0..n).any(|j| *f == unit(n, j));
    for (v, d) in pair.active() {
        if !d.forms.iter().all(eligible) {
            return Err(Error::Unsupported(format!(
                "place {v} has a form outside the coordinate and all-ones forms"
            )));
        }
    }
    if !pair.has_identity_defaults() {
        return Err(Error::Unsupported(
            "default forms are not the coordinate forms".into(),
        ));
    }
    let full = Subspace::full(n);
    let mut cache = WeightCache::new(pair);
    let wv = cache.get(&full);
    let mut best: Option<(BigRational, usize, Vec<Vec<usize>>, Subspace)> = None;
    for fam in disjoint_families(n) {
        let t = family_space(n, &fam);
        if t.is_full() {
            continue;
        }
        let mu = (&wv - cache.get(&t)) / BigRational::from_integer(BigInt::from(n - t.dim()));
        let better = match &best {
            None => true,
            Some((bm, bd, _, _)) => mu < *bm || (mu == *bm && t.dim() < *bd),
        };
        if better {
            best = Some((mu, t.dim(), fam, t));
        }
    }
    let (_, _, fam, t) = best.expect("singletons always give a proper subspace");
    let generic = exceptional_subspace(pair)?;
    if generic != t {
        return Err(Error::Domain(format!(
            "combinatorial search gives {t}, generic search gives {generic}"
        )));
    }
    Ok(fam)
}

fn check_proper(pair: &TwistedPair, t: &Subspace) -> Result<()> {
    if t.ambient() != pair.n() || t.is_zero() || t.is_full() {
        return Err(Error::Domain(
            "subspace must be nontrivial and proper".into(),
        ));
    }
    Ok(())
}

/// Restriction to `T` through the section `phi'(t) = sum t_j b_j` over the
/// echelon basis of `T`. Keeps the forms indexed by `I_v(T)`.
pub fn restrict_pair(pair: &TwistedPair, t: &Subspace) -> Result<TwistedPair> {
    check_proper(pair, t)?;
    let sub = |forms: &[QVec], exps: &[BigRational]| -> (Vec<QVec>, Vec<BigRational>) {
        let mut idx = index_set(forms, exps, t);
        idx.sort();
        (
            idx.iter().map(|&i| restrict(&forms[i], t)).collect(),
            idx.iter().map(|&i| exps[i].clone()).collect(),
        )
    };
    let zeros = vec![BigRational::zero(); pair.n()];
    let (defaults, _) = sub(pair.default_forms(), &zeros);
    let active: BTreeMap<Place, LocalData> = pair
        .active()
        .iter()
        .map(|(v, d)| {
            let (forms, exps) = sub(&d.forms, &d.exps);
            (v.clone(), LocalData { forms, exps })
        })
        .collect();
    TwistedPair::with_default_forms(t.dim(), defaults, active)
}

/// Pivot-free coordinates: `s(y) = sum y_m e_{np_m}`, a section of `Q^n -> Q^n / T`.
fn quotient_section(t: &Subspace) -> Vec<usize> {
    let n = t.ambient();
    let pivots: Vec<usize> = t
        .basis()
        .iter()
        .map(|b| b.iter().position(|x| !x.is_zero()).unwrap())
        .collect();
    (0..n).filter(|j| !pivots.contains(j)).collect()
}

/// The map `phi''^{-1}` on subspaces: `U -> s(U) + T`.
pub fn quotient_preimage(t: &Subspace, u: &Subspace) -> Subspace {
    let n = t.ambient();
    let np = quotient_section(t);
    let lifted: Vec<QVec> = u
        .basis()
        .iter()
        .map(|y| {
            let mut x = vec![BigRational::zero(); n];
            for (m, &j) in np.iter().enumerate() {
                x[j] = y[m].clone();
            }
            x
        })
        .collect();
    Subspace::span(n, &lifted).sum(t)
}

/// Reduced forms vanishing on `T`, composed with the section, plus their exponents.
fn quotient_local(
    forms: &[QVec],
    exps: &[BigRational],
    t: &Subspace,
) -> (Vec<QVec>, Vec<BigRational>) {
    let order = sorted_order(exps);
    let picked = index_set(forms, exps, t);
    let np = quotient_section(t);
    let mut out: Vec<(usize, QVec)> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if picked.contains(&i) {
            continue;
        }
        let before: Vec<usize> = order[..pos]
            .iter()
            .copied()
            .filter(|j| picked.contains(j))
            .collect();
        let basis: Vec<QVec> = before.iter().map(|&j| restrict(&forms[j], t)).collect();
        let alpha = coords_in(&basis, &restrict(&forms[i], t))
            .expect("greedy leaves dependent restrictions");
        let mut reduced = forms[i].clone();
        for (a, &j) in alpha.iter().zip(&before) {
            for (x, f) in reduced.iter_mut().zip(&forms[j]) {
                *x -= a * f;
            }
        }
        debug_assert!(t.basis().iter().all(|b| dot(&reduced, b).is_zero()));
        out.push((i, np.iter().map(|&j| reduced[j].clone()).collect()));
    }
    out.sort_by_key(|(i, _)| *i);
    let e = out.iter().map(|(i, _)| exps[*i].clone()).collect();
    (out.into_iter().map(|(_, f)| f).collect(), e)
}

/// Quotient by `T` with the exponents carried over unchanged.
pub fn quotient_pair_raw(pair: &TwistedPair, t: &Subspace) -> Result<TwistedPair> {
    check_proper(pair, t)?;
    let zeros = vec![BigRational::zero(); pair.n()];
    let (defaults, _) = quotient_local(pair.default_forms(), &zeros, t);
    let active: BTreeMap<Place, LocalData> = pair
        .active()
        .iter()
        .map(|(v, d)| {
            let (forms, exps) = quotient_local(&d.forms, &d.exps, t);
            (v.clone(), LocalData { forms, exps })
        })
        .collect();
    TwistedPair::with_default_forms(pair.n() - t.dim(), defaults, active)
}

/// Quotient by `T` with exponents recentred and rescaled:
/// `d_iv = ((n - k) / n) (c_iv - theta_v)`, `theta_v` the mean over the kept indices.
pub fn quotient_pair(pair: &TwistedPair, t: &Subspace) -> Result<TwistedPair> {
    let raw = quotient_pair_raw(pair, t)?;
    let n = pair.n() as i64;
    let m = raw.n() as i64;
    let factor = BigRational::new(m.into(), n.into());
    let active: BTreeMap<Place, LocalData> = raw
        .active()
        .iter()
        .map(|(v, d)| {
            let theta: BigRational =
                d.exps.iter().sum::<BigRational>() / BigRational::from_integer(m.into());
            let exps = d.exps.iter().map(|c| &factor * (c - &theta)).collect();
            (
                v.clone(),
                LocalData {
                    forms: d.forms.clone(),
                    exps,
                },
            )
        })
        .collect();
    TwistedPair::with_default_forms(raw.n(), raw.default_forms().to_vec(), active)
}

/// `p`-th exterior power: wedges of `p`-subsets of forms, exponents summed.
pub fn exterior_pair(pair: &TwistedPair, p: usize) -> Result<TwistedPair> {
    let n = pair.n();
    if p == 0 || p >= n {
        return Err(Error::Domain(format!(
            "exterior power {p} out of range for n = {n}"
        )));
    }
    let subsets = combinations(n, p);
    let lift = |forms: &[QVec]| -> Result<Vec<QVec>> {
        subsets
            .iter()
            .map(|s| wedge(&s.iter().map(|&i| forms[i].clone()).collect::<Vec<_>>()))
            .collect()
    };
    let mut active = BTreeMap::new();
    for (v, d) in pair.active() {
        let exps = subsets
            .iter()
            .map(|s| s.iter().map(|&i| d.exps[i].clone()).sum())
            .collect();
        active.insert(
            v.clone(),
            LocalData {
                forms: lift(&d.forms)?,
                exps,
            },
        );
    }
    TwistedPair::with_default_forms(subsets.len(), lift(pair.default_forms())?, active)
}

/// `H_2(T_i)^2 <= (max_{v,i} H_2(L_i^(v))^2)^(4^n)` for every member of the chain.
pub fn filtration_height_bound_holds(pair: &TwistedPair, chain: &FiltrationChain) -> bool {
    let hmax = pair
        .form_union()
        .iter()
        .map(|f| height_rational(f, HeightKind::H2Squared).unwrap())
        .max()
        .unwrap();
    let e = 4usize.pow(pair.n() as u32);
    let bound = num_traits::pow(hmax, e);
    chain
        .chain
        .iter()
        .all(|w| crate::exterior::subspace_height_sq(&w.space) <= bound)
}

/// Brute-force local weight: the minimum exponent sum over all index sets of
/// size `dim U` whose restrictions are independent.
pub fn local_weight_brute(forms: &[QVec], exps: &[BigRational], u: &Subspace) -> BigRational {
    let k = u.dim();
    if k == 0 {
        return BigRational::zero();
    }
    combinations(forms.len(), k)
        .into_iter()
        .filter(|s| {
            let rows: Vec<QVec> = s.iter().map(|&i| restrict(&forms[i], u)).collect();
            crate::linalg::rank(&rows) == k
        })
        .map(|s| s.iter().map(|&i| exps[i].clone()).sum::<BigRational>())
        .min()
        .expect("independent forms restrict to a spanning set")
}
