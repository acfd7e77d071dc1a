//! Dense matrices over a ring context, plus the handful of linear-algebra
//! routines the rest of the crate needs: products, inverses over local
//! rings (unit pivoting), and echelon forms over fields.

use crate::field::{Field, FqElem};
use crate::series::TruncSeries;
use crate::witt::{WittBase, WittVec};

/// Ring operations threaded through a context value, so table-driven rings
/// can share element types.
pub trait RingOps {
    type Elem: Clone + PartialEq;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }
    fn is_unit(&self, a: &Self::Elem) -> bool;
    /// Inverse of a unit; `None` on non-units.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
}

impl RingOps for Field {
    type Elem = FqElem;

    fn zero(&self) -> FqElem {
        0
    }
    fn one(&self) -> FqElem {
        1
    }
    fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.as_ref().add(*a, *b)
    }
    fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.as_ref().sub(*a, *b)
    }
    fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.as_ref().mul(*a, *b)
    }
    fn neg(&self, a: &FqElem) -> FqElem {
        self.as_ref().neg(*a)
    }
    fn is_unit(&self, a: &FqElem) -> bool {
        *a != 0
    }
    fn inv(&self, a: &FqElem) -> Option<FqElem> {
        (*a != 0).then(|| self.as_ref().inv(*a))
    }
}

/// `F_q[[z]]/(z^K)` as a ring context.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRing {
    pub field: Field,
    pub level: usize,
}

impl RingOps for SeriesRing {
    type Elem = TruncSeries;

    fn zero(&self) -> TruncSeries {
        TruncSeries::zero(&self.field, self.level)
    }
    fn one(&self) -> TruncSeries {
        TruncSeries::one(&self.field, self.level)
    }
    fn add(&self, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
        a.add(b).expect("same ring")
    }
    fn sub(&self, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
        a.sub(b).expect("same ring")
    }
    fn mul(&self, a: &TruncSeries, b: &TruncSeries) -> TruncSeries {
        a.mul(b).expect("same ring")
    }
    fn neg(&self, a: &TruncSeries) -> TruncSeries {
        a.neg()
    }
    fn is_zero(&self, a: &TruncSeries) -> bool {
        a.is_zero()
    }
    fn is_unit(&self, a: &TruncSeries) -> bool {
        a.is_unit()
    }
    fn inv(&self, a: &TruncSeries) -> Option<TruncSeries> {
        a.inv().ok()
    }
}

/// `W_N` over a coordinate ring, as a ring context.
#[derive(Clone, Debug)]
pub struct WittRing {
    pub base: WittBase,
    pub n: usize,
}

impl RingOps for WittRing {
    type Elem = WittVec;

    fn zero(&self) -> WittVec {
        WittVec::zero(&self.base, self.n)
    }
    fn one(&self) -> WittVec {
        WittVec::one(&self.base, self.n)
    }
    fn add(&self, a: &WittVec, b: &WittVec) -> WittVec {
        a.add(b).expect("same ring")
    }
    fn sub(&self, a: &WittVec, b: &WittVec) -> WittVec {
        a.sub(b).expect("same ring")
    }
    fn mul(&self, a: &WittVec, b: &WittVec) -> WittVec {
        a.mul(b).expect("same ring")
    }
    fn neg(&self, a: &WittVec) -> WittVec {
        a.neg()
    }
    fn is_zero(&self, a: &WittVec) -> bool {
        a.is_zero()
    }
    fn is_unit(&self, a: &WittVec) -> bool {
        a.is_unit()
    }
    fn inv(&self, a: &WittVec) -> Option<WittVec> {
        a.inv()
    }
}

/// A local ring with residue field `F_q` and a distinguished filtration
/// element `v` (zero, z, or p depending on the ring).
pub trait LocalRingOps: RingOps {
    fn residue(&self, a: &Self::Elem) -> FqElem;
    fn residue_field(&self) -> Field;
    fn v_elem(&self) -> Self::Elem;
    fn ring_label(&self) -> String;
}

impl LocalRingOps for Field {
    fn residue(&self, a: &FqElem) -> FqElem {
        *a
    }
    fn residue_field(&self) -> Field {
        self.clone()
    }
    fn v_elem(&self) -> FqElem {
        0
    }
    fn ring_label(&self) -> String {
        format!("F_{}", self.q())
    }
}

impl LocalRingOps for SeriesRing {
    fn residue(&self, a: &TruncSeries) -> FqElem {
        a.coeffs[0]
    }
    fn residue_field(&self) -> Field {
        self.field.clone()
    }
    fn v_elem(&self) -> TruncSeries {
        TruncSeries::monomial(&self.field, 1, 1, self.level)
    }
    fn ring_label(&self) -> String {
        format!("F_{}[[z]]/(z^{})", self.field.q(), self.level)
    }
}

impl LocalRingOps for WittRing {
    fn residue(&self, a: &WittVec) -> FqElem {
        a.residue()
    }
    fn residue_field(&self) -> Field {
        match &self.base {
            WittBase::Field(f) => f.clone(),
            WittBase::TruncPoly(_) => panic!("residue field needs a field base"),
        }
    }
    fn v_elem(&self) -> WittVec {
        self.one().mul_int(self.base.p()).expect("in range")
    }
    fn ring_label(&self) -> String {
        format!("W_{}(F_{})", self.n, self.base.size())
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Clone> Mat<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        Mat { rows, cols, data: vec![v; rows * cols] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.at(i, j).clone());
            }
        }
        Mat { rows: self.cols, cols: self.rows, data }
    }
}

pub fn identity<R: RingOps>(ring: &R, n: usize) -> Mat<R::Elem> {
    let mut m = Mat::filled(n, n, ring.zero());
    for i in 0..n {
        m.set(i, i, ring.one());
    }
    m
}

pub fn mat_mul<R: RingOps>(ring: &R, a: &Mat<R::Elem>, b: &Mat<R::Elem>) -> Mat<R::Elem> {
    assert_eq!(a.cols, b.rows);
    let mut out = Mat::filled(a.rows, b.cols, ring.zero());
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.at(i, k);
            if ring.is_zero(aik) {
                continue;
            }
            for j in 0..b.cols {
                let t = ring.mul(aik, b.at(k, j));
                let s = ring.add(out.at(i, j), &t);
                out.set(i, j, s);
            }
        }
    }
    out
}

pub fn mat_add<R: RingOps>(ring: &R, a: &Mat<R::Elem>, b: &Mat<R::Elem>) -> Mat<R::Elem> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    let data = a.data.iter().zip(&b.data).map(|(x, y)| ring.add(x, y)).collect();
    Mat { rows: a.rows, cols: a.cols, data }
}

pub fn mat_sub<R: RingOps>(ring: &R, a: &Mat<R::Elem>, b: &Mat<R::Elem>) -> Mat<R::Elem> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    let data = a.data.iter().zip(&b.data).map(|(x, y)| ring.sub(x, y)).collect();
    Mat { rows: a.rows, cols: a.cols, data }
}

/// Inverse over a local ring by Gauss-Jordan with unit pivoting. A square
/// matrix over a local ring is invertible iff elimination always finds a
/// unit pivot.
pub fn mat_inv<R: RingOps>(ring: &R, m: &Mat<R::Elem>) -> Option<Mat<R::Elem>> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a = m.clone();
    let mut inv = identity(ring, n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| ring.is_unit(a.at(r, col)))?;
        if pivot != col {
            for j in 0..n {
                let t = a.at(pivot, j).clone();
                a.set(pivot, j, a.at(col, j).clone());
                a.set(col, j, t);
                let t = inv.at(pivot, j).clone();
                inv.set(pivot, j, inv.at(col, j).clone());
                inv.set(col, j, t);
            }
        }
        let pinv = ring.inv(a.at(col, col))?;
        for j in 0..n {
            a.set(col, j, ring.mul(&pinv, a.at(col, j)));
            inv.set(col, j, ring.mul(&pinv, inv.at(col, j)));
        }
        for r in 0..n {
            if r == col || ring.is_zero(a.at(r, col)) {
                continue;
            }
            let f = a.at(r, col).clone();
            for j in 0..n {
                let t = ring.sub(a.at(r, j), &ring.mul(&f, a.at(col, j)));
                a.set(r, j, t);
                let t = ring.sub(inv.at(r, j), &ring.mul(&f, inv.at(col, j)));
                inv.set(r, j, t);
            }
        }
    }
    Some(inv)
}

/// Column rank over a field.
pub fn rank<R: RingOps>(ring: &R, m: &Mat<R::Elem>) -> usize {
    let mut a = m.clone();
    let mut rank = 0;
    for col in 0..a.cols {
        let pivot = (rank..a.rows).find(|&r| !ring.is_zero(a.at(r, col)));
        let Some(pivot) = pivot else { continue };
        for j in 0..a.cols {
            let t = a.at(pivot, j).clone();
            a.set(pivot, j, a.at(rank, j).clone());
            a.set(rank, j, t);
        }
        let pinv = ring.inv(a.at(rank, col)).expect("field pivot");
        for j in 0..a.cols {
            a.set(rank, j, ring.mul(&pinv, a.at(rank, j)));
        }
        for r in 0..a.rows {
            if r == rank || ring.is_zero(a.at(r, col)) {
                continue;
            }
            let f = a.at(r, col).clone();
            for j in 0..a.cols {
                let t = ring.sub(a.at(r, j), &ring.mul(&f, a.at(rank, j)));
                a.set(r, j, t);
            }
        }
        rank += 1;
    }
    rank
}

/// Reduced column echelon form over a field; the nonzero columns are a
/// canonical basis of the column space. Returns (echelon, pivot rows).
pub fn column_echelon(field: &Field, m: &Mat<FqElem>) -> (Mat<FqElem>, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut col = 0;
    for row in 0..a.rows {
        if col >= a.cols {
            break;
        }
        let pivot_col = (col..a.cols).find(|&c| *a.at(row, c) != 0);
        let Some(pc) = pivot_col else { continue };
        if pc != col {
            for i in 0..a.rows {
                let t = *a.at(i, pc);
                a.set(i, pc, *a.at(i, col));
                a.set(i, col, t);
            }
        }
        let pinv = field.as_ref().inv(*a.at(row, col));
        for i in 0..a.rows {
            let v = field.as_ref().mul(*a.at(i, col), pinv);
            a.set(i, col, v);
        }
        for c in 0..a.cols {
            if c == col || *a.at(row, c) == 0 {
                continue;
            }
            let f = *a.at(row, c);
            for i in 0..a.rows {
                let t = field.as_ref().sub(*a.at(i, c), field.as_ref().mul(f, *a.at(i, col)));
                a.set(i, c, t);
            }
        }
        pivots.push(row);
        col += 1;
    }
    // zero out the trailing columns (they are in the span of the pivots)
    (a, pivots)
}
