//! Exact linear algebra over the rationals: echelon forms, kernels,
//! determinants, and subspaces stored by their reduced row echelon basis.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type QVec = Vec<BigRational>;

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn qr(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn qvec(xs: &[i64]) -> QVec {
    xs.iter().map(|&x| q(x)).collect()
}

pub fn unit(n: usize, i: usize) -> QVec {
    (0..n).map(|j| if i == j { q(1) } else { q(0) }).collect()
}

pub fn identity(n: usize) -> Vec<QVec> {
    (0..n).map(|i| unit(n, i)).collect()
}

pub fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter()
        .zip(b)
        .fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn is_zero_vec(v: &[BigRational]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// `row * M` where `M` is given by rows; i.e. composition of a linear form with a map.
pub fn row_times(row: &[BigRational], m: &[QVec]) -> QVec {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| {
            row.iter()
                .zip(m)
                .fold(BigRational::zero(), |acc, (a, r)| acc + a * &r[j])
        })
        .collect()
}

/// `M * v` with `M` given by rows.
pub fn mat_vec(m: &[QVec], v: &[BigRational]) -> QVec {
    m.iter().map(|r| dot(r, v)).collect()
}

pub fn transpose(m: &[QVec]) -> Vec<QVec> {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| m.iter().map(|r| r[j].clone()).collect())
        .collect()
}

/// Reduced row echelon form; returns nonzero rows and pivot columns.
pub fn rref(rows: &[QVec]) -> (Vec<QVec>, Vec<usize>) {
    let mut m: Vec<QVec> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[QVec]) -> usize {
    rref(rows).0.len()
}

/// Basis of `{x : row . x = 0 for every row}` in `Q^n`.
pub fn kernel(rows: &[QVec], n: usize) -> Vec<QVec> {
    let (r, pivots) = rref(rows);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); n];
            v[f] = BigRational::one();
            for (row, &pc) in r.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

pub fn det(m: &[QVec]) -> BigRational {
    let n = m.len();
    let mut a: Vec<QVec> = m.to_vec();
    let mut d = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                for j in c..n {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    d
}

/// Coordinates of `v` in the given (independent) rows, if `v` lies in their span.
pub fn coords_in(basis: &[QVec], v: &[BigRational]) -> Option<QVec> {
    let k = basis.len();
    let n = v.len();
    // Solve sum a_j b_j = v via rref on the augmented transpose.
    let aug: Vec<QVec> = (0..n)
        .map(|i| {
            let mut row: QVec = basis.iter().map(|b| b[i].clone()).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    if aug.is_empty() {
        return Some(vec![]);
    }
    let (r, pivots) = rref(&aug);
    if pivots.contains(&k) {
        return None;
    }
    let mut out = vec![BigRational::zero(); k];
    for (row, &pc) in r.iter().zip(&pivots) {
        out[pc] = row[k].clone();
    }
    Some(out)
}

/// Positive rational `g` such that `v / g` is a primitive integer vector.
pub fn content(v: &[BigRational]) -> BigRational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for x in v {
        num = num.gcd(x.numer());
        den = den.lcm(x.denom());
    }
    BigRational::new(num, den)
}

/// Primitive integer vector proportional to `v` (sign preserved).
pub fn primitive(v: &[BigRational]) -> Vec<BigInt> {
    let g = content(v);
    v.iter().map(|x| (x / &g).to_integer()).collect()
}

/// Primitive, with first nonzero coordinate positive.
pub fn primitive_normalized(v: &[BigRational]) -> Vec<BigInt> {
    let mut p = primitive(v);
    if p.iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.is_negative())
    {
        for x in p.iter_mut() {
            *x = -x.clone();
        }
    }
    p
}

pub fn to_qvec(v: &[BigInt]) -> QVec {
    v.iter()
        .map(|x| BigRational::from_integer(x.clone()))
        .collect()
}

/// Incremental row echelon basis used for greedy independence tests.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<(usize, QVec)>,
}

impl Echelon {
    /// Adds `v` if it is independent of the rows so far.
    pub fn try_insert(&mut self, mut v: QVec) -> bool {
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= &f * r;
                }
            }
        }
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].recip();
        for x in v.iter_mut() {
            *x *= &inv;
        }
        self.rows.push((p, v));
        true
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// A subspace of `Q^n`, stored canonically as its RREF basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    n: usize,
    basis: Vec<QVec>,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace { n, basis: vec![] }
    }

    pub fn full(n: usize) -> Self {
        Subspace {
            n,
            basis: identity(n),
        }
    }

    pub fn span(n: usize, vectors: &[QVec]) -> Self {
        assert!(
            vectors.iter().all(|v| v.len() == n),
            "vector length mismatch"
        );
        Subspace {
            n,
            basis: rref(vectors).0,
        }
    }

    /// `{x : row . x = 0}` for the given forms.
    pub fn common_kernel(n: usize, forms: &[QVec]) -> Self {
        Subspace {
            n,
            basis: rref(&kernel(forms, n)).0,
        }
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QVec] {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.n
    }

    pub fn contains(&self, v: &[BigRational]) -> bool {
        if is_zero_vec(v) {
            return true;
        }
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rank(&rows) == self.dim()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|b| other.contains(b))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Subspace::span(self.n, &rows)
    }

    /// Annihilator under the standard pairing.
    pub fn orth(&self) -> Subspace {
        Subspace::common_kernel(self.n, &self.basis)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        if self.is_full() {
            return other.clone();
        }
        if other.is_full() {
            return self.clone();
        }
        let mut eqs = self.orth().basis;
        eqs.extend(other.orth().basis);
        Subspace::common_kernel(self.n, &eqs)
    }

    /// Image under `x -> M x` (M by rows, `m x n`).
    pub fn image(&self, m: &[QVec]) -> Subspace {
        let imgs: Vec<QVec> = self.basis.iter().map(|b| mat_vec(m, b)).collect();
        Subspace::span(m.len(), &imgs)
    }

    /// Preimage under `x -> M x`.
    pub fn preimage(&self, m: &[QVec]) -> Subspace {
        let n = m.first().map_or(0, |r| r.len());
        let eqs: Vec<QVec> = self.orth().basis.iter().map(|e| row_times(e, m)).collect();
        Subspace::common_kernel(n, &eqs)
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|r| {
                format!(
                    "({})",
                    r.iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            })
            .collect();
        write!(f, "span{{{}}}", rows.join(", "))
    }
}
