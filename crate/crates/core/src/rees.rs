//! Graded modules over the Rees algebra of a v-adic filtration, and the
//! executable vector-bundle criteria.
//!
//! A module is stored on a finite degree window `[j_min, j_max]` as a rank
//! per degree plus matrices `t: M_{j+1} -> M_j` and `u: M_j -> M_{j+1}`
//! satisfying `t.u = u.t = v`. The behavior outside the window is declared
//! by stabilization flags; the checkers verify that the declared behavior
//! is visible at the window edges, which makes the flags falsifiable.
//! Filtered chains are the same data without `u` and with a vanishing-top
//! flag in place of the upper stabilization.

use thiserror::Error;

use crate::dvr::{certified_injective, smith, DvrError, DvrOps};
use crate::field::Field;
use crate::linalg::{mat_mul, rank, LocalRingOps, Mat, RingOps};
use crate::rootdata::TypeVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReesError {
    #[error("window and map shapes are inconsistent")]
    Shape,
    #[error("t.u or u.t differs from multiplication by v at degree {0}")]
    NotVAdic(i64),
    #[error("the base ring does not support this operation")]
    UnsupportedBase,
    #[error("module is not a vector bundle: {0}")]
    NotABundle(String),
    #[error(transparent)]
    Dvr(#[from] DvrError),
}

/// Behavior declared above the top of the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopFlag {
    /// `M_j = 0` for `j > j_max` (filtered chains).
    ZeroAbove,
    /// `u` is an isomorphism for `j >= j_max` (Rees modules).
    UIsoAbove,
}

/// A finitely supported graded module. With `umaps` present this is a
/// module over the Rees algebra; without, a filtered chain.
#[derive(Clone, Debug)]
pub struct GradedModule<E> {
    pub j_min: i64,
    /// rank of the free module at each degree `j_min ..= j_max`
    pub ranks: Vec<usize>,
    /// `tmaps[i]: M_{j_min+i+1} -> M_{j_min+i}`, one per adjacent pair
    pub tmaps: Vec<Mat<E>>,
    /// `umaps[i]: M_{j_min+i} -> M_{j_min+i+1}`
    pub umaps: Option<Vec<Mat<E>>>,
    /// t is an isomorphism below the window
    pub stable_below: bool,
    pub top: TopFlag,
}

impl<E: Clone + PartialEq> GradedModule<E> {
    pub fn j_max(&self) -> i64 {
        self.j_min + self.ranks.len() as i64 - 1
    }

    pub fn rank_at(&self, j: i64) -> Option<usize> {
        let i = j - self.j_min;
        (i >= 0).then(|| self.ranks.get(i as usize).copied()).flatten()
    }

    /// Validates shapes and, when `u` is present, the defining relations
    /// `t.u = u.t = v` on every degree of the window.
    pub fn validate<R>(&self, ring: &R) -> Result<(), ReesError>
    where
        R: LocalRingOps<Elem = E>,
    {
        let w = self.ranks.len();
        if w == 0 || self.tmaps.len() + 1 != w {
            return Err(ReesError::Shape);
        }
        for (i, t) in self.tmaps.iter().enumerate() {
            if t.rows != self.ranks[i] || t.cols != self.ranks[i + 1] {
                return Err(ReesError::Shape);
            }
        }
        if let Some(umaps) = &self.umaps {
            if umaps.len() + 1 != w {
                return Err(ReesError::Shape);
            }
            for (i, u) in umaps.iter().enumerate() {
                if u.rows != self.ranks[i + 1] || u.cols != self.ranks[i] {
                    return Err(ReesError::Shape);
                }
            }
            let v = ring.v_elem();
            for i in 0..w - 1 {
                // t.u = v on M_{j_min+i}
                let tu = mat_mul(ring, &self.tmaps[i], &umaps[i]);
                if !is_scalar(ring, &tu, &v) {
                    return Err(ReesError::NotVAdic(self.j_min + i as i64));
                }
                let ut = mat_mul(ring, &umaps[i], &self.tmaps[i]);
                if !is_scalar(ring, &ut, &v) {
                    return Err(ReesError::NotVAdic(self.j_min + i as i64 + 1));
                }
            }
        }
        Ok(())
    }
}

fn is_scalar<R: RingOps>(ring: &R, m: &Mat<R::Elem>, c: &R::Elem) -> bool {
    if m.rows != m.cols {
        return false;
    }
    for i in 0..m.rows {
        for j in 0..m.cols {
            let expect = if i == j { c.clone() } else { ring.zero() };
            if *m.at(i, j) != expect {
                return false;
            }
        }
    }
    true
}

/// The violated condition reported by a failed bundle check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `t` at degree `j` is not split injective (equivalently over these
    /// chain rings: not injective with free cokernel)
    SplitInjectivityFails { j: i64 },
    /// `t` at degree `j` could not be certified injective over the DVR
    TNotInjective { j: i64 },
    /// `u mod t` at degree `j` is not injective on the graded fibers
    ReductionNotInjective { j: i64 },
    /// a stabilization flag is missing
    NotStabilized { low: bool },
    /// declared stabilization is not visible at the window edge
    EdgeNotIso { j: i64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::SplitInjectivityFails { j } => {
                write!(f, "t into degree {j} is not injective with free cokernel")
            }
            Violation::TNotInjective { j } => {
                write!(f, "t into degree {j} is not injective")
            }
            Violation::ReductionNotInjective { j } => {
                write!(f, "u mod t into degree {j} is not injective")
            }
            Violation::NotStabilized { low } => {
                let side = if *low { "below" } else { "above" };
                write!(f, "no stabilization declared {side} the window")
            }
            Violation::EdgeNotIso { j } => {
                write!(f, "declared stabilization is not an isomorphism at edge degree {j}")
            }
        }
    }
}

pub type Verdict = Result<(), Violation>;

/// Decides whether a filtered chain is a vector bundle over the filtration
/// stack: every `t` must be split injective, the chain must vanish above
/// the window and be stabilized below it.
///
/// Over a field split injectivity is full column rank; over the finite
/// chain rings here it is equivalent to full column rank of the residue
/// matrix.
pub fn is_filtered_vb<R>(ring: &R, m: &GradedModule<R::Elem>) -> Result<Verdict, ReesError>
where
    R: LocalRingOps,
{
    m.validate(ring)?;
    if m.top != TopFlag::ZeroAbove {
        return Err(ReesError::UnsupportedBase);
    }
    if !m.stable_below {
        return Ok(Err(Violation::NotStabilized { low: true }));
    }
    let rf = ring.residue_field();
    for (i, t) in m.tmaps.iter().enumerate() {
        let tbar = residue_mat(ring, t);
        if rank(&rf, &tbar) < t.cols {
            return Ok(Err(Violation::SplitInjectivityFails { j: m.j_min + i as i64 }));
        }
    }
    // declared lower stabilization must be visible: the lowest stored t is
    // an isomorphism
    if let Some(t0) = m.tmaps.first() {
        let tbar = residue_mat(ring, t0);
        if t0.rows != t0.cols || rank(&rf, &tbar) < t0.rows {
            return Ok(Err(Violation::EdgeNotIso { j: m.j_min }));
        }
    }
    Ok(Ok(()))
}

/// Decides whether a graded Rees module is a vector bundle over the Rees
/// stack of an injective `v`, working at the base's precision: the checks
/// are the stabilization conditions at the edges, injectivity of every `t`
/// over the DVR, and injectivity of `u mod t` on the graded fibers.
pub fn is_rees_vb<R>(ring: &R, m: &GradedModule<R::Elem>) -> Result<Verdict, ReesError>
where
    R: DvrOps,
{
    m.validate(ring)?;
    let umaps = m.umaps.as_ref().ok_or(ReesError::Shape)?;
    if m.top != TopFlag::UIsoAbove {
        return Err(ReesError::UnsupportedBase);
    }
    if !m.stable_below {
        return Ok(Err(Violation::NotStabilized { low: true }));
    }
    let rf = ring.residue_field();
    // edge witnesses: lowest t and highest u are isomorphisms
    if let Some(t0) = m.tmaps.first() {
        let tbar = residue_mat(ring, t0);
        if t0.rows != t0.cols || rank(&rf, &tbar) < t0.rows {
            return Ok(Err(Violation::EdgeNotIso { j: m.j_min }));
        }
    }
    if let Some(utop) = umaps.last() {
        let ubar = residue_mat(ring, utop);
        if utop.rows != utop.cols || rank(&rf, &ubar) < utop.rows {
            return Ok(Err(Violation::EdgeNotIso { j: m.j_max() }));
        }
    }
    // t injective over the DVR, certified at working precision
    for (i, t) in m.tmaps.iter().enumerate() {
        if !certified_injective(ring, t)? {
            return Ok(Err(Violation::TNotInjective { j: m.j_min + i as i64 }));
        }
    }
    // u mod t injective on graded fibers: the fiber at degree j is the
    // residue cokernel of t into M_j; above the window t factors through v,
    // so the top fiber is everything
    let w = m.ranks.len();
    let fiber_basis: Vec<Mat<crate::field::FqElem>> = (0..w)
        .map(|i| {
            if i + 1 < w {
                residue_mat(ring, &m.tmaps[i])
            } else {
                Mat::filled(m.ranks[i], 0, 0)
            }
        })
        .collect();
    for i in 1..w {
        let ubar = residue_mat(ring, &umaps[i - 1]);
        if !quotient_map_injective(&rf, &fiber_basis[i - 1], &fiber_basis[i], &ubar) {
            return Ok(Err(Violation::ReductionNotInjective { j: m.j_min + i as i64 }));
        }
    }
    Ok(Ok(()))
}

/// Is the induced map `F^a/im(S) -> F^b/im(T)` of `ubar` injective?
fn quotient_map_injective(
    rf: &Field,
    s: &Mat<crate::field::FqElem>,
    t: &Mat<crate::field::FqElem>,
    ubar: &Mat<crate::field::FqElem>,
) -> bool {
    // kernel of the induced map is (ubar^{-1}(im T) + im S)/im S; it
    // vanishes iff rank [ubar | T] - rank T equals rank of the source
    // quotient, i.e. a - rank S
    let a = s.rows;
    let rk_s = rank(rf, s);
    let rk_t = rank(rf, t);
    let mut aug = Mat::filled(ubar.rows, ubar.cols + t.cols, 0);
    for i in 0..ubar.rows {
        for j in 0..ubar.cols {
            aug.set(i, j, *ubar.at(i, j));
        }
        for j in 0..t.cols {
            aug.set(i, ubar.cols + j, *t.at(i, j));
        }
    }
    // image of the source inside the target quotient has dimension
    // rank [ubar*basis-of-source ... ]; work with the full source and
    // subtract what dies: dim ubar(F^a) mod im T = rank [ubar|T] - rank T.
    // The source quotient has dimension a - rank S, and ubar(im S) lies in
    // im T by compatibility, so injectivity is the dimension equality.
    let rk_aug = rank(rf, &aug);
    rk_aug - rk_t == a - rk_s
}

pub fn residue_mat<R: LocalRingOps>(ring: &R, m: &Mat<R::Elem>) -> Mat<crate::field::FqElem> {
    let mut out = Mat::filled(m.rows, m.cols, 0);
    for i in 0..m.rows {
        for j in 0..m.cols {
            out.set(i, j, ring.residue(m.at(i, j)));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Graded pieces of a filtered chain
// ---------------------------------------------------------------------------

/// Kernel and cokernel data of the `t`-maps, one entry per stored map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedOfFiltered {
    /// degree of the target of each map
    pub degrees: Vec<i64>,
    /// composition length of `ker(t)` into each degree (dimension over a field)
    pub h_minus1: Vec<usize>,
    /// composition length of `coker(t)` into each degree
    pub h_zero: Vec<usize>,
}

/// Computes the graded pieces of a filtered chain: per degree, the kernel
/// and cokernel of `t`. Over a field these are dimensions; over the finite
/// chain rings they are composition lengths, computed from the invariant
/// factors.
pub fn graded_of_filtered<R>(ring: &R, m: &GradedModule<R::Elem>) -> Result<GradedOfFiltered, ReesError>
where
    R: DvrOps,
{
    m.validate(ring)?;
    let e = ring.precision();
    let mut degrees = Vec::new();
    let mut h1 = Vec::new();
    let mut h0 = Vec::new();
    for (i, t) in m.tmaps.iter().enumerate() {
        let out = smith(ring, t);
        // residual entries vanish at precision, i.e. are zero in the
        // finite chain ring, so the outcome is exact here; the kernel of
        // multiplication by pi^v on the chain ring is its annihilator, of
        // length v
        let capped: Vec<usize> = out.pivot_vals.iter().map(|&v| v.min(e)).collect();
        let ker: usize = capped.iter().sum::<usize>() + out.residual_cols * e;
        let coker: usize = capped.iter().sum::<usize>() + out.residual_rows * e;
        degrees.push(m.j_min + i as i64);
        h1.push(ker);
        h0.push(coker);
    }
    Ok(GradedOfFiltered { degrees, h_minus1: h1, h_zero: h0 })
}

/// Same over a plain field: kernels and cokernels by rank.
pub fn graded_of_filtered_field(field: &Field, m: &GradedModule<crate::field::FqElem>) -> Result<GradedOfFiltered, ReesError> {
    m.validate(field)?;
    let mut degrees = Vec::new();
    let mut h1 = Vec::new();
    let mut h0 = Vec::new();
    for (i, t) in m.tmaps.iter().enumerate() {
        let r = rank(field, t);
        degrees.push(m.j_min + i as i64);
        h1.push(t.cols - r);
        h0.push(t.rows - r);
    }
    Ok(GradedOfFiltered { degrees, h_minus1: h1, h_zero: h0 })
}

// ---------------------------------------------------------------------------
// Normal decomposition (twist multiset)
// ---------------------------------------------------------------------------

/// For a graded Rees module that passes [`is_rees_vb`], the multiset of
/// twists: the module is a direct sum of twisted line bundles, and the
/// twist at degree `j` appears with multiplicity the dimension of the
/// graded fiber `M_j / (t M_{j+1} + u M_{j-1})` over the residue field.
pub fn normal_decomposition<R>(ring: &R, m: &GradedModule<R::Elem>) -> Result<TypeVector, ReesError>
where
    R: DvrOps,
{
    match is_rees_vb(ring, m)? {
        Ok(()) => {}
        Err(v) => return Err(ReesError::NotABundle(v.to_string())),
    }
    let dims = fixed_fiber_dims(ring, m)?;
    let mut twists = Vec::new();
    for (j, d) in dims {
        for _ in 0..d {
            twists.push(j);
        }
    }
    twists.sort_unstable_by(|a, b| b.cmp(a));
    Ok(TypeVector(twists))
}

/// Dimensions over the residue field of the fixed-locus fibers
/// `M_j / (t M_{j+1} + u M_{j-1})`, for every degree in the window.
/// Outside contributions are zero by stabilization.
pub fn fixed_fiber_dims<R>(ring: &R, m: &GradedModule<R::Elem>) -> Result<Vec<(i64, usize)>, ReesError>
where
    R: LocalRingOps,
{
    let umaps = m.umaps.as_ref().ok_or(ReesError::Shape)?;
    let rf = ring.residue_field();
    let w = m.ranks.len();
    let mut out = Vec::new();
    for i in 0..w {
        let r = m.ranks[i];
        // columns of [tbar from above | ubar from below]
        let tbar = if i + 1 < w {
            Some(residue_mat(ring, &m.tmaps[i]))
        } else {
            None
        };
        let ubar = if i > 0 {
            Some(residue_mat(ring, &umaps[i - 1]))
        } else {
            None
        };
        let cols = tbar.as_ref().map_or(0, |t| t.cols) + ubar.as_ref().map_or(0, |u| u.cols);
        let mut aug = Mat::filled(r, cols, 0);
        let mut c0 = 0;
        if let Some(t) = &tbar {
            for i2 in 0..r {
                for j2 in 0..t.cols {
                    aug.set(i2, c0 + j2, *t.at(i2, j2));
                }
            }
            c0 += t.cols;
        }
        if let Some(u) = &ubar {
            for i2 in 0..r {
                for j2 in 0..u.cols {
                    aug.set(i2, c0 + j2, *u.at(i2, j2));
                }
            }
        }
        let dim = r - rank(&rf, &aug);
        if dim > 0 {
            out.push((m.j_min + i as i64, dim));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Attractor / repeller / fixed descriptors
// ---------------------------------------------------------------------------

/// Symbolic description of the fixed, repeller, and attractor quotients of
/// the Rees algebra of `(A, v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttractorData {
    /// `B^0 = A/(v)`
    pub fixed: String,
    /// `B^- = R[t]`
    pub repeller: String,
    /// `B^+ = Sym_R`
    pub attractor: String,
}

/// Descriptors for the three distinguished quotients. For `v = 0` the
/// fixed ring is the base itself; otherwise it is the residue field.
pub fn fix_attr_rep<R: LocalRingOps>(ring: &R) -> AttractorData {
    let v = ring.v_elem();
    let fixed = if ring.is_zero(&v) {
        ring.ring_label()
    } else {
        format!("F_{}", ring.residue_field().q())
    };
    AttractorData {
        repeller: format!("{fixed}[t]"),
        attractor: format!("Sym_{fixed}"),
        fixed,
    }
}

/// The three pullbacks of a graded Rees module to the attractor, repeller,
/// and fixed substacks, reported as composition lengths per degree:
/// quotients by the `t`-image, by the `u`-image, and by both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PullbackDims {
    pub degrees: Vec<i64>,
    pub mod_t: Vec<usize>,
    pub mod_u: Vec<usize>,
    pub mod_both: Vec<usize>,
}

pub fn rees_pullback_dims<R>(ring: &R, m: &GradedModule<R::Elem>) -> Result<PullbackDims, ReesError>
where
    R: DvrOps,
{
    let umaps = m.umaps.as_ref().ok_or(ReesError::Shape)?;
    m.validate(ring)?;
    let e = ring.precision();
    let w = m.ranks.len();
    let coker_len = |mat: &Mat<R::Elem>, rows: usize| -> usize {
        let out = smith(ring, mat);
        out.pivot_vals.iter().map(|&v| v.min(e)).sum::<usize>()
            + (rows - out.pivot_vals.len()) * e
    };
    let mut degrees = Vec::new();
    let mut mod_t = Vec::new();
    let mut mod_u = Vec::new();
    let mut mod_both = Vec::new();
    for i in 0..w {
        let r = m.ranks[i];
        degrees.push(m.j_min + i as i64);
        // at the window edges the missing map factors as v times the
        // declared isomorphism, so its cokernel has length r
        mod_t.push(if i + 1 < w { coker_len(&m.tmaps[i], r) } else { r });
        mod_u.push(if i > 0 { coker_len(&umaps[i - 1], r) } else { r });
    }
    let fibers = fixed_fiber_dims(ring, m)?;
    for i in 0..w {
        let j = m.j_min + i as i64;
        let d = fibers.iter().find(|(dj, _)| *dj == j).map_or(0, |(_, d)| *d);
        mod_both.push(d);
    }
    Ok(PullbackDims { degrees, mod_t, mod_u, mod_both })
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// The direct sum of twisted line bundles for a twist multiset, as a graded
/// Rees module: component `i` has `t = v` at and above its twist and the
/// identity below, `u` complementary.
pub fn twisted_bundle<R>(ring: &R, twists: &TypeVector) -> GradedModule<R::Elem>
where
    R: LocalRingOps,
{
    let e = &twists.0;
    let h = e.len();
    let j_min = *e.iter().min().unwrap() - 1;
    let j_max = *e.iter().max().unwrap() + 1;
    let w = (j_max - j_min + 1) as usize;
    let v = ring.v_elem();
    let mut tmaps = Vec::new();
    let mut umaps = Vec::new();
    for i in 0..w - 1 {
        let j = j_min + i as i64;
        let mut t = Mat::filled(h, h, ring.zero());
        let mut u = Mat::filled(h, h, ring.zero());
        for (c, &ec) in e.iter().enumerate() {
            // t: M_{j+1} -> M_j is v at degrees >= twist, identity below
            if j >= ec {
                t.set(c, c, v.clone());
                u.set(c, c, ring.one());
            } else {
                t.set(c, c, ring.one());
                u.set(c, c, v.clone());
            }
        }
        tmaps.push(t);
        umaps.push(u);
    }
    GradedModule {
        j_min,
        ranks: vec![h; w],
        tmaps,
        umaps: Some(umaps),
        stable_below: true,
        top: TopFlag::UIsoAbove,
    }
}

/// The filtered chain of the same direct sum: ranks drop as degrees pass
/// each twist, `t` the inclusion of the surviving components.
pub fn twisted_chain<R>(ring: &R, twists: &TypeVector) -> GradedModule<R::Elem>
where
    R: LocalRingOps,
{
    let e = &twists.0;
    let j_min = *e.iter().min().unwrap() - 1;
    let j_max = *e.iter().max().unwrap();
    let w = (j_max - j_min + 1) as usize;
    let alive = |j: i64| -> Vec<usize> {
        e.iter().enumerate().filter(|(_, &ec)| ec >= j).map(|(c, _)| c).collect()
    };
    let mut ranks = Vec::new();
    let mut tmaps = Vec::new();
    for i in 0..w {
        let j = j_min + i as i64;
        ranks.push(alive(j).len());
    }
    for i in 0..w - 1 {
        let j = j_min + i as i64;
        let lo = alive(j);
        let hi = alive(j + 1);
        let mut t = Mat::filled(lo.len(), hi.len(), ring.zero());
        for (col, c) in hi.iter().enumerate() {
            let row = lo.iter().position(|x| x == c).unwrap();
            t.set(row, col, ring.one());
        }
        tmaps.push(t);
    }
    GradedModule { j_min, ranks, tmaps, umaps: None, stable_below: true, top: TopFlag::ZeroAbove }
}

/// Applies an invertible change of basis per degree: `t'_j = P_j t_j P_{j+1}^{-1}`,
/// `u'_j = P_{j+1} u_j P_j^{-1}`. The result is isomorphic as a graded module.
pub fn change_basis<R>(
    ring: &R,
    m: &GradedModule<R::Elem>,
    ps: &[Mat<R::Elem>],
) -> Option<GradedModule<R::Elem>>
where
    R: LocalRingOps,
{
    let w = m.ranks.len();
    if ps.len() != w {
        return None;
    }
    let inv: Vec<Mat<R::Elem>> = ps
        .iter()
        .map(|p| crate::linalg::mat_inv(ring, p))
        .collect::<Option<Vec<_>>>()?;
    let tmaps = m
        .tmaps
        .iter()
        .enumerate()
        .map(|(i, t)| mat_mul(ring, &ps[i], &mat_mul(ring, t, &inv[i + 1])))
        .collect();
    let umaps = m.umaps.as_ref().map(|umaps| {
        umaps
            .iter()
            .enumerate()
            .map(|(i, u)| mat_mul(ring, &ps[i + 1], &mat_mul(ring, u, &inv[i])))
            .collect()
    });
    Some(GradedModule {
        j_min: m.j_min,
        ranks: m.ranks.clone(),
        tmaps,
        umaps,
        stable_below: m.stable_below,
        top: m.top,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FqElem, FqField};
    use crate::linalg::{SeriesRing, WittRing};
    use crate::witt::WittBase;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn sring(q: u64, k: usize) -> SeriesRing {
        SeriesRing { field: FqField::new(q, 1).unwrap(), level: k }
    }

    fn wring(p: u64, n: usize) -> WittRing {
        WittRing { base: WittBase::Field(FqField::new(p, 1).unwrap()), n }
    }

    #[test]
    fn structure_module_is_bundle() {
        // O(0) over F_2[[z]] at precision 4
        let r = sring(2, 4);
        let m = twisted_bundle(&r, &TypeVector(vec![0]));
        assert_eq!(is_rees_vb(&r, &m).unwrap(), Ok(()));
        // and over W_2(F_2), where v = p
        let rw = wring(2, 2);
        let mw = twisted_bundle(&rw, &TypeVector(vec![0]));
        assert_eq!(is_rees_vb(&rw, &mw).unwrap(), Ok(()));
    }

    #[test]
    fn sums_of_twists_are_bundles() {
        let r = sring(2, 6);
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..25 {
            let h = rng.gen_range(1..=3);
            let mut e: Vec<i64> = (0..h).map(|_| rng.gen_range(-2..=2)).collect();
            e.sort_unstable_by(|a, b| b.cmp(a));
            let m = twisted_bundle(&r, &TypeVector(e.clone()));
            assert_eq!(is_rees_vb(&r, &m).unwrap(), Ok(()));
            assert_eq!(normal_decomposition(&r, &m).unwrap(), TypeVector(e));
        }
    }

    #[test]
    fn constructor_invariant_violation_rejected() {
        let r = sring(2, 4);
        let mut m = twisted_bundle(&r, &TypeVector(vec![0]));
        // breaking u.t = v is caught by the validator
        if let Some(umaps) = &mut m.umaps {
            umaps[0].set(0, 0, r.one());
        }
        assert!(matches!(m.validate(&r), Err(ReesError::NotVAdic(_))));
    }

    #[test]
    fn filtered_chain_accepts_o_e() {
        let f: Field = FqField::new(2, 1).unwrap();
        let c = twisted_chain(&f, &TypeVector(vec![0]));
        assert_eq!(c.ranks, vec![1, 1]);
        assert_eq!(is_filtered_vb(&f, &c).unwrap(), Ok(()));
    }

    #[test]
    fn filtered_chain_rejects_zero_t() {
        let f: Field = FqField::new(2, 1).unwrap();
        let mut c = twisted_chain(&f, &TypeVector(vec![1, 0]));
        // zero out an interior t-map column
        let last = c.tmaps.len() - 1;
        c.tmaps[last] = Mat::filled(c.tmaps[last].rows, c.tmaps[last].cols, 0);
        let verdict = is_filtered_vb(&f, &c).unwrap();
        assert!(matches!(verdict, Err(Violation::SplitInjectivityFails { .. })));
    }

    #[test]
    fn filtered_chain_direct_sum_with_basis_change() {
        let f: Field = FqField::new(2, 1).unwrap();
        let c = twisted_chain(&f, &TypeVector(vec![2, 0]));
        // ranks (...,2,2,1,1,0,...): degrees -1..2 give 2,2,1,1
        assert_eq!(c.ranks, vec![2, 2, 1, 1]);
        assert_eq!(is_filtered_vb(&f, &c).unwrap(), Ok(()));
        let mut rng = StdRng::seed_from_u64(9);
        let ps: Vec<Mat<FqElem>> = c
            .ranks
            .iter()
            .map(|&r| loop {
                let mut p = Mat::filled(r, r, 0);
                for i in 0..r {
                    for j in 0..r {
                        p.set(i, j, rng.gen_range(0..2) as FqElem);
                    }
                }
                if crate::linalg::mat_inv(&f, &p).is_some() {
                    break p;
                }
            })
            .collect();
        let c2 = change_basis(&f, &c, &ps).unwrap();
        assert_eq!(is_filtered_vb(&f, &c2).unwrap(), Ok(()));
    }

    #[test]
    fn torsion_cokernel_rejected_over_w2() {
        let rw = wring(2, 2);
        let mut c = twisted_chain(&rw, &TypeVector(vec![0]));
        // multiply the t-map by p: injectivity with free cokernel fails
        let p = rw.v_elem();
        let t = c.tmaps[0].clone();
        let mut t2 = t.clone();
        for i in 0..t.rows {
            for j in 0..t.cols {
                t2.set(i, j, rw.mul(t.at(i, j), &p));
            }
        }
        c.tmaps[0] = t2;
        let verdict = is_filtered_vb(&rw, &c).unwrap();
        assert!(matches!(verdict, Err(Violation::SplitInjectivityFails { .. }) | Err(Violation::EdgeNotIso { .. })));
    }

    #[test]
    fn broken_stabilization_flag_rejected() {
        let r = sring(2, 4);
        let mut m = twisted_bundle(&r, &TypeVector(vec![0]));
        m.stable_below = false;
        assert_eq!(
            is_rees_vb(&r, &m).unwrap(),
            Err(Violation::NotStabilized { low: true })
        );
        // flag set but edge not an isomorphism: truncate the window so the
        // edge map is multiplication by v
        let mut m2 = twisted_bundle(&r, &TypeVector(vec![0]));
        m2.j_min = 0;
        m2.ranks = vec![1, 1];
        m2.tmaps = vec![m2.tmaps[1].clone()];
        m2.umaps = Some(vec![m2.umaps.as_ref().unwrap()[1].clone()]);
        let verdict = is_rees_vb(&r, &m2).unwrap();
        assert_eq!(verdict, Err(Violation::EdgeNotIso { j: 0 }));
    }

    #[test]
    fn graded_pieces_of_chain() {
        let f: Field = FqField::new(2, 1).unwrap();
        let c = twisted_chain(&f, &TypeVector(vec![0]));
        let g = graded_of_filtered_field(&f, &c).unwrap();
        // single map at degree -1, an isomorphism
        assert_eq!(g.h_minus1, vec![0]);
        assert_eq!(g.h_zero, vec![0]);
        let mut broken = c.clone();
        broken.tmaps[0] = Mat::filled(1, 1, 0);
        let g2 = graded_of_filtered_field(&f, &broken).unwrap();
        assert_eq!(g2.h_minus1, vec![1]);
        assert_eq!(g2.h_zero, vec![1]);
    }

    #[test]
    fn graded_pieces_vanish_for_bundles() {
        // kernels vanish for every chain accepted by the checker
        let r = sring(2, 5);
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..10 {
            let h = rng.gen_range(1..=3);
            let mut e: Vec<i64> = (0..h).map(|_| rng.gen_range(-2..=2)).collect();
            e.sort_unstable_by(|a, b| b.cmp(a));
            let c = twisted_chain(&r, &TypeVector(e));
            assert_eq!(is_filtered_vb(&r, &c).unwrap(), Ok(()));
            let g = graded_of_filtered(&r, &c).unwrap();
            assert!(g.h_minus1.iter().all(|&k| k == 0));
        }
    }

    #[test]
    fn normal_decomposition_examples() {
        let r = sring(2, 6);
        let m = twisted_bundle(&r, &TypeVector(vec![3]));
        assert_eq!(normal_decomposition(&r, &m).unwrap(), TypeVector(vec![3]));
        let m = twisted_bundle(&r, &TypeVector(vec![0, 0]));
        assert_eq!(normal_decomposition(&r, &m).unwrap(), TypeVector(vec![0, 0]));
    }

    #[test]
    fn normal_decomposition_isomorphism_invariant() {
        let r = sring(2, 6);
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..10 {
            let e = {
                let mut e: Vec<i64> = (0..2).map(|_| rng.gen_range(-1..=2)).collect();
                e.sort_unstable_by(|a, b| b.cmp(a));
                TypeVector(e)
            };
            let m = twisted_bundle(&r, &e);
            let ps: Vec<Mat<crate::series::TruncSeries>> = m
                .ranks
                .iter()
                .map(|&rk| loop {
                    let mut p = Mat::filled(rk, rk, r.zero());
                    for i in 0..rk {
                        for j in 0..rk {
                            let coeffs: Vec<FqElem> = (0..r.level)
                                .map(|_| rng.gen_range(0..2) as FqElem)
                                .collect();
                            p.set(
                                i,
                                j,
                                crate::series::TruncSeries {
                                    field: r.field.clone(),
                                    coeffs,
                                },
                            );
                        }
                    }
                    if crate::linalg::mat_inv(&r, &p).is_some() {
                        break p;
                    }
                })
                .collect();
            let m2 = change_basis(&r, &m, &ps).unwrap();
            m2.validate(&r).unwrap();
            assert_eq!(normal_decomposition(&r, &m2).unwrap(), e);
        }
    }

    #[test]
    fn attractor_descriptors() {
        let r = sring(2, 2);
        let d = fix_attr_rep(&r);
        assert_eq!(d.fixed, "F_2");
        assert_eq!(d.repeller, "F_2[t]");
        let f: Field = FqField::new(2, 1).unwrap();
        let d0 = fix_attr_rep(&f);
        assert_eq!(d0.fixed, "F_2"); // v = 0: quotient by the zero ideal
        let w = wring(2, 2);
        let dw = fix_attr_rep(&w);
        assert_eq!(dw.fixed, "F_2");
    }

    #[test]
    fn pullback_dims_of_structure_module() {
        let r = sring(2, 4);
        let m = twisted_bundle(&r, &TypeVector(vec![0]));
        let p = rees_pullback_dims(&r, &m).unwrap();
        // fiber only at the twist degree
        assert_eq!(p.degrees, vec![-1, 0, 1]);
        assert_eq!(p.mod_both, vec![0, 1, 0]);
    }
}
