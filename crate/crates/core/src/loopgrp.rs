//! Truncated loop groups and display groups.
//!
//! For a dominant type `mu` of `GL_h`, an element of the level-`N` display
//! group is an `h x h` array whose `(i, j)` entry represents an element of
//! `z^(m_ij) F[[z]]` modulo `z^(m_ij + N)`, with `m_ij = max(0, mu_j - mu_i)`;
//! only the length-`N` unit part is stored, so the product is well defined
//! because `m_ik + m_kj >= m_ij`. The group embeds into `GL_h(R_N)` by the
//! truncation homomorphism `tau` and maps to it by the Frobenius-conjugate
//! homomorphism `sigma`, the two arrows whose coequalizer classifies
//! truncated shtukas.
//!
//! The coefficient field may be an extension `F_{q^m}` of the base field
//! `F_q`; `sigma` always applies the q-power Frobenius of the base.

use std::sync::Arc;

use thiserror::Error;

use crate::field::{Field, FqElem};
use crate::linalg::{mat_inv, mat_mul, Mat, RingOps, SeriesRing};
use crate::rootdata::TypeVector;
use crate::series::TruncSeries;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("a diagonal block is singular mod z, element not invertible")]
    NotInvertible,
    #[error("operands have different group parameters")]
    ParameterMismatch,
    #[error("state count {0} exceeds the budget {1}")]
    BudgetExceeded(u128, u128),
    #[error("type vector length differs from h")]
    BadType,
}

/// Parameters of a display group: coefficient field (possibly an extension
/// of the base), base-field order driving the Frobenius, rank, type, level.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupParams {
    pub field: Field,
    pub q_frob: u64,
    pub h: usize,
    pub mu: TypeVector,
    pub level: usize,
}

impl GroupParams {
    pub fn new(field: Field, q_frob: u64, mu: TypeVector, level: usize) -> Result<Arc<Self>, GroupError> {
        let h = mu.len();
        if h == 0 {
            return Err(GroupError::BadType);
        }
        Ok(Arc::new(GroupParams { field, q_frob, h, mu, level }))
    }

    /// Required valuation of entry `(i, j)` in the loop matrix picture.
    #[inline]
    pub fn shift(&self, i: usize, j: usize) -> usize {
        (self.mu.0[j] - self.mu.0[i]).max(0) as usize
    }

    /// Valuation shift applied by `sigma` at entry `(i, j)`.
    #[inline]
    pub fn coshift(&self, i: usize, j: usize) -> usize {
        (self.mu.0[i] - self.mu.0[j]).max(0) as usize
    }

    pub fn series_ring(&self) -> SeriesRing {
        SeriesRing { field: self.field.clone(), level: self.level }
    }

    /// Number of distinct mu-blocks and their sizes.
    pub fn blocks(&self) -> Vec<usize> {
        self.mu.block_sizes()
    }

    /// Block index of each row/column.
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.h);
        let mut b = 0;
        for i in 0..self.h {
            if i > 0 && self.mu.0[i] != self.mu.0[i - 1] {
                b += 1;
            }
            out.push(b);
        }
        out
    }

    /// Exact point count of the group over the coefficient field:
    /// the level-1 count times `Q^((N-1) h^2)`.
    pub fn predicted_count(&self) -> u128 {
        let qq = self.field.q() as u128;
        let h = self.h as u32;
        let blocks = self.blocks();
        let mut count: u128 = 1;
        for &n in &blocks {
            count *= gl_order(qq, n);
        }
        let sq: u32 = blocks.iter().map(|&n| (n * n) as u32).sum();
        count *= qq.pow(h * h - sq);
        count * qq.pow((self.level as u32 - 1) * h * h)
    }
}

/// Order of `GL_n` over a field with `q` elements.
pub fn gl_order(q: u128, n: usize) -> u128 {
    let qn = q.pow(n as u32);
    (0..n).map(|k| qn - q.pow(k as u32)).product()
}

/// An element of `GL_h(R_N)` (or of the ambient matrix ring).
#[derive(Clone, Debug, PartialEq)]
pub struct LoopMat {
    pub ring: SeriesRing,
    pub mat: Mat<TruncSeries>,
}

impl LoopMat {
    pub fn identity(ring: &SeriesRing, h: usize) -> Self {
        LoopMat { ring: ring.clone(), mat: crate::linalg::identity(ring, h) }
    }

    pub fn h(&self) -> usize {
        self.mat.rows
    }

    pub fn mul(&self, other: &Self) -> Self {
        LoopMat { ring: self.ring.clone(), mat: mat_mul(&self.ring, &self.mat, &other.mat) }
    }

    pub fn inv(&self) -> Option<Self> {
        mat_inv(&self.ring, &self.mat).map(|mat| LoopMat { ring: self.ring.clone(), mat })
    }

    pub fn is_invertible(&self) -> bool {
        // invertible iff the constant-term matrix is invertible
        let rf = &self.ring.field;
        let mut c = Mat::filled(self.h(), self.h(), 0 as FqElem);
        for i in 0..self.h() {
            for j in 0..self.h() {
                c.set(i, j, self.mat.at(i, j).coeffs[0]);
            }
        }
        crate::linalg::rank(rf, &c) == self.h()
    }

    /// Drops the top coefficient of every entry.
    pub fn truncate(&self) -> Self {
        let ring = SeriesRing { field: self.ring.field.clone(), level: self.ring.level - 1 };
        let mut mat = Mat::filled(self.h(), self.h(), ring.zero());
        for i in 0..self.h() {
            for j in 0..self.h() {
                mat.set(i, j, self.mat.at(i, j).truncate());
            }
        }
        LoopMat { ring, mat }
    }
}

/// A display group element: stored unit parts of the entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplayGroupElem {
    pub params: Arc<GroupParams>,
    pub stored: Mat<TruncSeries>,
}

impl DisplayGroupElem {
    /// Builds an element from stored entries, checking the diagonal-block
    /// criterion: the entries within equal-mu blocks, reduced mod z, must
    /// form invertible square matrices.
    pub fn new(params: &Arc<GroupParams>, stored: Mat<TruncSeries>) -> Result<Self, GroupError> {
        let e = DisplayGroupElem { params: params.clone(), stored };
        if !e.diag_blocks_invertible() {
            return Err(GroupError::NotInvertible);
        }
        Ok(e)
    }

    pub fn identity(params: &Arc<GroupParams>) -> Self {
        let ring = params.series_ring();
        DisplayGroupElem { params: params.clone(), stored: crate::linalg::identity(&ring, params.h) }
    }

    fn diag_blocks_invertible(&self) -> bool {
        let f = &self.params.field;
        let block_of = self.params.block_of();
        let blocks = self.params.blocks();
        let mut start = 0;
        for &n in &blocks {
            let mut b = Mat::filled(n, n, 0 as FqElem);
            for i in 0..n {
                for j in 0..n {
                    debug_assert_eq!(block_of[start + i], block_of[start + j]);
                    b.set(i, j, self.stored.at(start + i, start + j).coeffs[0]);
                }
            }
            if crate::linalg::rank(f, &b) < n {
                return false;
            }
            start += n;
        }
        true
    }

    fn check(&self, other: &Self) -> Result<(), GroupError> {
        if self.params != other.params {
            return Err(GroupError::ParameterMismatch);
        }
        Ok(())
    }

    /// Group law, computed entirely on stored unit parts: the `(i, j)` term
    /// through `k` is shifted by `m_ik + m_kj - m_ij >= 0`.
    pub fn mul(&self, other: &Self) -> Result<Self, GroupError> {
        self.check(other)?;
        let p = &self.params;
        let ring = p.series_ring();
        let mut stored = Mat::filled(p.h, p.h, ring.zero());
        for i in 0..p.h {
            for j in 0..p.h {
                let mut acc = ring.zero();
                for k in 0..p.h {
                    let s = p.shift(i, k) + p.shift(k, j) - p.shift(i, j);
                    let t = self.stored.at(i, k).mul(other.stored.at(k, j)).expect("same ring");
                    acc = acc.add(&t.shift(s)).expect("same ring");
                }
                stored.set(i, j, acc);
            }
        }
        Ok(DisplayGroupElem { params: p.clone(), stored })
    }

    /// Inverse, computed by lifting to level `N + max(m)` where the element
    /// becomes an honest invertible matrix; the lift choice does not matter
    /// because different lifts differ by the ideal that truncation kills.
    pub fn inv(&self) -> Result<Self, GroupError> {
        if !self.diag_blocks_invertible() {
            return Err(GroupError::NotInvertible);
        }
        let p = &self.params;
        let m_max = (0..p.h)
            .flat_map(|i| (0..p.h).map(move |j| (i, j)))
            .map(|(i, j)| p.shift(i, j))
            .max()
            .unwrap_or(0);
        let big = SeriesRing { field: p.field.clone(), level: p.level + m_max };
        let mut lift = Mat::filled(p.h, p.h, big.zero());
        for i in 0..p.h {
            for j in 0..p.h {
                let e = self.stored.at(i, j).at_level(big.level).shift(p.shift(i, j));
                lift.set(i, j, e);
            }
        }
        let inv = mat_inv(&big, &lift).ok_or(GroupError::NotInvertible)?;
        let ring = p.series_ring();
        let mut stored = Mat::filled(p.h, p.h, ring.zero());
        for i in 0..p.h {
            for j in 0..p.h {
                let entry = inv.at(i, j);
                let m = p.shift(i, j);
                debug_assert!(
                    entry.coeffs[..m.min(big.level)].iter().all(|&c| c == 0),
                    "inverse stays in the shape algebra"
                );
                let mut coeffs = entry.coeffs[m..].to_vec();
                coeffs.truncate(p.level);
                coeffs.resize(p.level, 0);
                stored.set(i, j, TruncSeries { field: p.field.clone(), coeffs });
            }
        }
        Ok(DisplayGroupElem { params: p.clone(), stored })
    }

    /// The truncation homomorphism into `GL_h(R_N)`: entry `(i, j)` is
    /// `z^(m_ij)` times the stored series, truncated at level `N`.
    pub fn tau(&self) -> LoopMat {
        let p = &self.params;
        let ring = p.series_ring();
        let mut mat = Mat::filled(p.h, p.h, ring.zero());
        for i in 0..p.h {
            for j in 0..p.h {
                mat.set(i, j, self.stored.at(i, j).shift(p.shift(i, j)));
            }
        }
        LoopMat { ring, mat }
    }

    /// The Frobenius-conjugate homomorphism into `GL_h(R_N)`: entry `(i, j)`
    /// is the coefficientwise q-power of `z^(max(0, mu_i - mu_j))` times the
    /// stored series.
    pub fn sigma(&self) -> LoopMat {
        let p = &self.params;
        let ring = p.series_ring();
        let mut mat = Mat::filled(p.h, p.h, ring.zero());
        for i in 0..p.h {
            for j in 0..p.h {
                let s = self.stored.at(i, j).shift(p.coshift(i, j)).frobenius(p.q_frob);
                mat.set(i, j, s);
            }
        }
        LoopMat { ring, mat }
    }

    /// Drops the top stored coefficient of every entry: the surjection onto
    /// the level `N - 1` group.
    pub fn truncate(&self) -> Result<Self, GroupError> {
        let p = &self.params;
        assert!(p.level >= 2);
        let params = GroupParams::new(p.field.clone(), p.q_frob, p.mu.clone(), p.level - 1)?;
        let ring = params.series_ring();
        let mut stored = Mat::filled(p.h, p.h, ring.zero());
        for i in 0..p.h {
            for j in 0..p.h {
                stored.set(i, j, self.stored.at(i, j).truncate());
            }
        }
        Ok(DisplayGroupElem { params, stored })
    }

    /// Deterministic packed key: entry-major, then degree, field elements
    /// by their integer encoding.
    pub fn key(&self) -> Vec<u16> {
        self.stored.data.iter().flat_map(|s| s.coeffs.iter().copied()).collect()
    }
}

/// Membership test for a loop matrix: every entry must vanish below the
/// valuation the type requires (an entry whose required valuation is at or
/// beyond the level must vanish entirely).
pub fn membership(g: &LoopMat, mu: &TypeVector) -> bool {
    let h = g.h();
    if mu.len() != h {
        return false;
    }
    let n = g.ring.level;
    for i in 0..h {
        for j in 0..h {
            let need = ((mu.0[j] - mu.0[i]).max(0) as usize).min(n);
            if g.mat.at(i, j).coeffs[..need].iter().any(|&c| c != 0) {
                return false;
            }
        }
    }
    true
}

/// Enumerates every element of the display group, in the deterministic
/// order of packed coefficient keys.
pub fn enumerate(params: &Arc<GroupParams>, budget: u128) -> Result<Vec<DisplayGroupElem>, GroupError> {
    let p = params;
    let qq = p.field.q() as u128;
    let cells = (p.h * p.h * p.level) as u32;
    let total = qq
        .checked_pow(cells)
        .filter(|&t| t <= budget)
        .ok_or(GroupError::BudgetExceeded(u128::MAX, budget))?;
    let _ = total;
    let mut out = Vec::new();
    let mut coeffs = vec![0u16; cells as usize];
    let ring = p.series_ring();
    loop {
        let mut stored = Mat::filled(p.h, p.h, ring.zero());
        for i in 0..p.h {
            for j in 0..p.h {
                let off = (i * p.h + j) * p.level;
                let cs = coeffs[off..off + p.level].to_vec();
                stored.set(i, j, TruncSeries { field: p.field.clone(), coeffs: cs });
            }
        }
        if let Ok(e) = DisplayGroupElem::new(p, stored) {
            out.push(e);
        }
        // odometer
        let mut k = coeffs.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            coeffs[k] += 1;
            if (coeffs[k] as u64) < p.field.q() {
                break;
            }
            coeffs[k] = 0;
        }
    }
}

/// Exhaustive count of the kernel of the truncation from level `N + 1` to
/// level `N`: elements whose stored entries agree with the identity below
/// the top coefficient.
pub fn kernel_count(params: &Arc<GroupParams>, budget: u128) -> Result<u128, GroupError> {
    let p = params;
    let up = GroupParams::new(p.field.clone(), p.q_frob, p.mu.clone(), p.level + 1)?;
    let qq = p.field.q() as u128;
    let cells = (p.h * p.h) as u32;
    qq.checked_pow(cells)
        .filter(|&t| t <= budget)
        .ok_or(GroupError::BudgetExceeded(u128::MAX, budget))?;
    let id = DisplayGroupElem::identity(p);
    let mut count = 0u128;
    let mut tops = vec![0u16; cells as usize];
    loop {
        let ring = up.series_ring();
        let mut stored = Mat::filled(p.h, p.h, ring.zero());
        for i in 0..p.h {
            for j in 0..p.h {
                let mut coeffs = id.stored.at(i, j).coeffs.clone();
                coeffs.push(tops[i * p.h + j]);
                stored.set(i, j, TruncSeries { field: p.field.clone(), coeffs });
            }
        }
        if let Ok(e) = DisplayGroupElem::new(&up, stored) {
            if e.truncate()? == id {
                count += 1;
            }
        }
        let mut k = tops.len();
        loop {
            if k == 0 {
                return Ok(count);
            }
            k -= 1;
            tops[k] += 1;
            if (tops[k] as u64) < p.field.q() {
                break;
            }
            tops[k] = 0;
        }
    }
}

/// The unique level-1 factorization into a block-diagonal part and lower
/// and upper unipotent parts: `e = c * u_minus * u_plus`.
pub fn factorize_level1(
    e: &DisplayGroupElem,
) -> Result<(DisplayGroupElem, DisplayGroupElem, DisplayGroupElem), GroupError> {
    let p = &e.params;
    assert_eq!(p.level, 1, "factorization is a level-1 statement");
    let block_of = p.block_of();
    let ring = p.series_ring();
    // block-diagonal part
    let mut c_stored = crate::linalg::identity(&ring, p.h);
    for i in 0..p.h {
        for j in 0..p.h {
            if block_of[i] == block_of[j] {
                c_stored.set(i, j, e.stored.at(i, j).clone());
            }
        }
    }
    let c = DisplayGroupElem::new(p, c_stored)?;
    let f = c.inv()?.mul(e)?;
    let mut um_stored = crate::linalg::identity(&ring, p.h);
    let mut up_stored = crate::linalg::identity(&ring, p.h);
    for i in 0..p.h {
        for j in 0..p.h {
            if block_of[i] > block_of[j] {
                um_stored.set(i, j, f.stored.at(i, j).clone());
            } else if block_of[i] < block_of[j] {
                up_stored.set(i, j, f.stored.at(i, j).clone());
            }
        }
    }
    let um = DisplayGroupElem::new(p, um_stored)?;
    let up = DisplayGroupElem::new(p, up_stored)?;
    Ok((c, um, up))
}
