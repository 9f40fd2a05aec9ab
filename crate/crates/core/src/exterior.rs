//! Exterior products, Grassmann coordinates and heights of subspaces.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{det, QVec, Subspace};
use crate::places::{height_rational, HeightKind};

/// The `p`-subsets of `{0..n-1}` in lexicographic order.
pub fn subsets_lex(n: usize, p: usize) -> Result<Vec<Vec<usize>>> {
    if p == 0 || p > n {
        return Err(Error::Domain(format!(
            "subset size {p} out of range for n = {n}"
        )));
    }
    Ok(combinations(n, p))
}

pub(crate) fn combinations(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..p).collect();
    if p > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = p;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - p + i {
                idx[i] += 1;
                for j in i + 1..p {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `x_1 ^ ... ^ x_p`: the `p x p` minors in lexicographic column order.
pub fn wedge(vectors: &[QVec]) -> Result<QVec> {
    let p = vectors.len();
    let n = vectors.first().map_or(0, |v| v.len());
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::Domain(
            "wedge of vectors of different lengths".into(),
        ));
    }
    let cols = subsets_lex(n, p)?;
    Ok(cols
        .iter()
        .map(|c| {
            let m: Vec<QVec> = vectors
                .iter()
                .map(|v| c.iter().map(|&j| v[j].clone()).collect())
                .collect();
            det(&m)
        })
        .collect())
}

/// `H_2(T)^2`, with the trivial subspaces at height 1.
pub fn subspace_height_sq(t: &Subspace) -> BigRational {
    if t.is_zero() || t.is_full() {
        return BigRational::one();
    }
    let w = wedge(t.basis()).expect("basis is nonempty");
    height_rational(&w, HeightKind::H2Squared).expect("basis is independent")
}

pub fn orth_complement(t: &Subspace) -> Subspace {
    t.orth()
}

/// The vectors `x_hat_l`: wedges of the rows indexed by each `p`-subset.
pub fn hat_vectors(rows: &[QVec], p: usize) -> Result<Vec<QVec>> {
    let idx = subsets_lex(rows.len(), p)?;
    idx.iter()
        .map(|s| wedge(&s.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>()))
        .collect()
}

/// Evaluate a form given by its coefficient vector.
pub fn eval_form(form: &[BigRational], x: &[BigRational]) -> BigRational {
    form.iter()
        .zip(x)
        .fold(BigRational::zero(), |a, (f, y)| a + f * y)
}

/// The subspace spanned by the first `N - 1` hat vectors of an adapted basis.
///
/// `basis` must have `n` rows whose first `k` rows span `T`; the wedges are
/// taken over `p = n - k` rows.
pub fn hat_subspace(basis: &[QVec], k: usize) -> Result<Subspace> {
    let n = basis.len();
    let p = n - k;
    let hats = hat_vectors(basis, p)?;
    let nn = hats.len();
    Ok(Subspace::span(nn, &hats[..nn - 1]))
}
