//! Root datum of `GL_h` and the explicit truncation cutoff bounds.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootDataError {
    #[error("cocharacter {0:?} is not dominant (weakly decreasing)")]
    NotDominant(Vec<i64>),
    #[error("cocharacter has length {got}, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("the set of cocharacters is empty")]
    EmptySet,
}

/// A weakly decreasing integer vector: a dominant cocharacter of `GL_h`,
/// equivalently the type of a bundle (invariant-factor exponents).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeVector(pub Vec<i64>);

impl TypeVector {
    pub fn new(e: Vec<i64>) -> Result<Self, RootDataError> {
        if !is_dominant(&e) {
            return Err(RootDataError::NotDominant(e));
        }
        Ok(TypeVector(e))
    }

    /// Sorts into the dominant representative.
    pub fn from_unsorted(mut e: Vec<i64>) -> Self {
        e.sort_unstable_by(|a, b| b.cmp(a));
        TypeVector(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Minuscule type with `d` ones and `h - d` zeros.
    pub fn minuscule(h: usize, d: usize) -> Self {
        let mut e = vec![1i64; d];
        e.resize(h, 0);
        TypeVector(e)
    }

    /// Multiplicities of the distinct values, in decreasing value order.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        let mut prev: Option<i64> = None;
        for &v in &self.0 {
            if prev == Some(v) {
                *out.last_mut().unwrap() += 1;
            } else {
                out.push(1);
                prev = Some(v);
            }
        }
        out
    }
}

impl std::fmt::Display for TypeVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn is_dominant(e: &[i64]) -> bool {
    e.windows(2).all(|w| w[0] >= w[1])
}

/// The root datum of `GL_h`: roots `e_i - e_j` for `i != j`, cocharacter
/// lattice `Z^h`, Weyl group the symmetric group on `h` letters.
#[derive(Clone, Debug)]
pub struct RootDatumGL {
    pub h: usize,
}

impl RootDatumGL {
    pub fn new(h: usize) -> Self {
        RootDatumGL { h }
    }

    /// All roots as integer vectors.
    pub fn roots(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(self.h * (self.h - 1));
        for i in 0..self.h {
            for j in 0..self.h {
                if i == j {
                    continue;
                }
                let mut r = vec![0i64; self.h];
                r[i] = 1;
                r[j] = -1;
                out.push(r);
            }
        }
        out
    }

    pub fn weyl_order(&self) -> u64 {
        (1..=self.h as u64).product()
    }

    /// Standard pairing of a root with a cocharacter.
    pub fn pairing(root: &[i64], xi: &[i64]) -> i64 {
        root.iter().zip(xi).map(|(a, b)| a * b).sum()
    }
}

/// Cutoff bounds computed from a finite set of dominant cocharacters:
/// `C` is the maximal pairing of a root with a member of the set, the
/// isogeny bound is `C + 1` and the isomorphism bound is `2C + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutoffReport {
    pub h: usize,
    pub set: Vec<TypeVector>,
    pub c: i64,
    pub isogeny_bound: i64,
    pub isomorphism_bound: i64,
}

pub fn cutoff_bounds(h: usize, set: &[TypeVector]) -> Result<CutoffReport, RootDataError> {
    if set.is_empty() {
        return Err(RootDataError::EmptySet);
    }
    for xi in set {
        if xi.len() != h {
            return Err(RootDataError::WrongLength { expected: h, got: xi.len() });
        }
        if !is_dominant(&xi.0) {
            return Err(RootDataError::NotDominant(xi.0.clone()));
        }
    }
    // max over roots e_i - e_j of <a, xi> is xi_max - xi_min for each xi
    let c = set
        .iter()
        .map(|xi| {
            let max = *xi.0.iter().max().unwrap();
            let min = *xi.0.iter().min().unwrap();
            max - min
        })
        .max()
        .unwrap();
    Ok(CutoffReport {
        h,
        set: set.to_vec(),
        c,
        isogeny_bound: c + 1,
        isomorphism_bound: 2 * c + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minuscule_gl2() {
        let r = cutoff_bounds(2, &[TypeVector::new(vec![1, 0]).unwrap()]).unwrap();
        assert_eq!((r.c, r.isogeny_bound, r.isomorphism_bound), (1, 2, 3));
    }

    #[test]
    fn gl3_one_one_zero() {
        let r = cutoff_bounds(3, &[TypeVector::new(vec![1, 1, 0]).unwrap()]).unwrap();
        assert_eq!((r.c, r.isogeny_bound, r.isomorphism_bound), (1, 2, 3));
    }

    #[test]
    fn two_zero() {
        let r = cutoff_bounds(2, &[TypeVector::new(vec![2, 0]).unwrap()]).unwrap();
        assert_eq!((r.c, r.isogeny_bound, r.isomorphism_bound), (2, 3, 5));
    }

    #[test]
    fn dominance() {
        assert!(is_dominant(&[1, 0]));
        assert!(!is_dominant(&[0, 1]));
        assert!(is_dominant(&[1, 1, 0]));
        assert!(TypeVector::new(vec![0, 1]).is_err());
    }

    #[test]
    fn union_is_max() {
        let a = TypeVector::new(vec![1, 0]).unwrap();
        let b = TypeVector::new(vec![3, -1]).unwrap();
        let ca = cutoff_bounds(2, &[a.clone()]).unwrap().c;
        let cb = cutoff_bounds(2, &[b.clone()]).unwrap().c;
        let cu = cutoff_bounds(2, &[a, b]).unwrap().c;
        assert_eq!(cu, ca.max(cb));
    }

    #[test]
    fn pairing_weyl_invariant() {
        // C is unchanged by permuting coordinates then re-sorting
        let xi = TypeVector::new(vec![2, 1, -1]).unwrap();
        let c0 = cutoff_bounds(3, &[xi.clone()]).unwrap().c;
        let permuted = TypeVector::from_unsorted(vec![-1, 2, 1]);
        let c1 = cutoff_bounds(3, &[permuted]).unwrap().c;
        assert_eq!(c0, c1);
    }

    #[test]
    fn root_count() {
        for h in 2..=4 {
            assert_eq!(RootDatumGL::new(h).roots().len(), h * (h - 1));
        }
    }
}
