//! Truncated p-typical Witt vectors.
//!
//! `W_N(R)` is the set of length-`N` coordinate vectors over an
//! `F_p`-algebra `R`, with addition and multiplication given by the Witt
//! polynomial laws. The laws are solved once per `(p, N)` from the ghost
//! equations over arbitrary-precision integers and cached; coordinates are
//! then computed by evaluating the reduced polynomials in `R`.
//!
//! Supported coordinate rings: finite fields `F_{p^d}` and the truncated
//! polynomial rings `F_p[x]/(x^k)`, which is enough for every desk-scale
//! experiment in this crate.
//!
//! Conventions for the shift operators. The primitive Verschiebung is the
//! injective shift `W_N -> W_{N+1}`, `(a_0, ..) -> (0, a_0, ..)`; the
//! length-preserving `V: W_N -> W_N` is that shift followed by truncation.
//! Both are exposed because both are needed: uniqueness of `V`-preimages
//! holds for the injective shift only, while the ideal `I_N = V(W_N)` and
//! the identity `FV = p` live at fixed length. `v_untwist` recovers the
//! unique length `N-1` preimage of an element of `I_N`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::field::{Field, FieldError};

/// Default cap on the truncation length for law generation.
pub const MAX_WITT_LEN: usize = 6;
/// Cap on the number of terms per generated law polynomial.
const TERM_BUDGET: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WittError {
    #[error("operands live in different Witt rings")]
    MixedRings,
    #[error("length {0} out of range 1..={MAX_WITT_LEN}")]
    BadLength(usize),
    #[error("law generation exceeded the term budget; raise the budget")]
    Overflow,
    #[error("Frobenius drops length but the vector has length 1")]
    LengthUnderflow,
    #[error("first coordinate is nonzero, vector is not in the ideal I_N")]
    NotInIdeal,
    #[error(transparent)]
    Field(#[from] FieldError),
}

// ---------------------------------------------------------------------------
// Coordinate rings
// ---------------------------------------------------------------------------

/// `F_p[x]/(x^k)`: the smallest non-perfect, non-reduced test ring.
/// Elements are encoded as `sum c_i p^i < p^k`.
#[derive(Debug)]
pub struct TruncPolyRing {
    pub p: u64,
    pub k: usize,
    size: u64,
}

impl TruncPolyRing {
    pub fn new(p: u64, k: usize) -> Arc<Self> {
        assert!(k >= 1 && p.pow(k as u32) <= u16::MAX as u64 + 1);
        Arc::new(TruncPolyRing { p, k, size: p.pow(k as u32) })
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    fn coeffs(&self, a: u16) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.k);
        let mut e = a as u64;
        for _ in 0..self.k {
            v.push(e % self.p);
            e /= self.p;
        }
        v
    }

    fn encode(&self, v: &[u64]) -> u16 {
        let mut e = 0u64;
        for i in (0..self.k).rev() {
            e = e * self.p + v.get(i).copied().unwrap_or(0) % self.p;
        }
        e as u16
    }

    fn add(&self, a: u16, b: u16) -> u16 {
        let (va, vb) = (self.coeffs(a), self.coeffs(b));
        let v: Vec<u64> = (0..self.k).map(|i| (va[i] + vb[i]) % self.p).collect();
        self.encode(&v)
    }

    fn neg(&self, a: u16) -> u16 {
        let va = self.coeffs(a);
        let v: Vec<u64> = va.iter().map(|c| (self.p - c % self.p) % self.p).collect();
        self.encode(&v)
    }

    fn mul(&self, a: u16, b: u16) -> u16 {
        let (va, vb) = (self.coeffs(a), self.coeffs(b));
        let mut v = vec![0u64; self.k];
        for i in 0..self.k {
            for j in 0..self.k - i {
                v[i + j] = (v[i + j] + va[i] * vb[j]) % self.p;
            }
        }
        self.encode(&v)
    }
}

impl PartialEq for TruncPolyRing {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k
    }
}

/// The coordinate ring of a Witt vector.
#[derive(Clone, Debug)]
pub enum WittBase {
    Field(Field),
    TruncPoly(Arc<TruncPolyRing>),
}

impl WittBase {
    pub fn p(&self) -> u64 {
        match self {
            WittBase::Field(f) => f.p(),
            WittBase::TruncPoly(r) => r.p,
        }
    }

    pub fn size(&self) -> u64 {
        match self {
            WittBase::Field(f) => f.q(),
            WittBase::TruncPoly(r) => r.size(),
        }
    }

    /// Perfect means the p-power map is bijective; true exactly for fields.
    pub fn is_perfect(&self) -> bool {
        matches!(self, WittBase::Field(_))
    }

    pub fn zero(&self) -> u16 {
        0
    }

    pub fn one(&self) -> u16 {
        1
    }

    pub fn add(&self, a: u16, b: u16) -> u16 {
        match self {
            WittBase::Field(f) => f.add(a, b),
            WittBase::TruncPoly(r) => r.add(a, b),
        }
    }

    pub fn neg(&self, a: u16) -> u16 {
        match self {
            WittBase::Field(f) => f.neg(a),
            WittBase::TruncPoly(r) => r.neg(a),
        }
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        match self {
            WittBase::Field(f) => f.mul(a, b),
            WittBase::TruncPoly(r) => r.mul(a, b),
        }
    }

    pub fn pow(&self, a: u16, mut e: u64) -> u16 {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `a -> a^p`.
    pub fn frobenius(&self, a: u16) -> u16 {
        match self {
            WittBase::Field(f) => f.frobenius(a),
            WittBase::TruncPoly(r) => self.pow(a, r.p),
        }
    }

    /// Embeds `n mod p`.
    pub fn from_int(&self, n: i64) -> u16 {
        let r = n.rem_euclid(self.p() as i64) as u64;
        r as u16
    }

    fn same(&self, other: &Self) -> bool {
        match (self, other) {
            (WittBase::Field(a), WittBase::Field(b)) => a == b,
            (WittBase::TruncPoly(a), WittBase::TruncPoly(b)) => a == b,
            _ => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Law polynomials
// ---------------------------------------------------------------------------

/// Sparse multivariate polynomial with integer coefficients; exponent
/// vectors index the variables `x_0..x_{n-1}, y_0..y_{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u16>, BigInt>,
}

impl MPoly {
    fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0u16; nvars];
        e[i] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, BigInt::one());
        MPoly { nvars, terms }
    }

    fn insert(&mut self, exps: Vec<u16>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn add(&self, other: &Self) -> Result<Self, WittError> {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out.check_budget()?;
        Ok(out)
    }

    fn sub(&self, other: &Self) -> Result<Self, WittError> {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), -c.clone());
        }
        Ok(out)
    }

    fn mul(&self, other: &Self) -> Result<Self, WittError> {
        let mut out = MPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u16> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert(e, ca * cb);
            }
            out.check_budget()?;
        }
        Ok(out)
    }

    fn pow(&self, e: u64) -> Result<Self, WittError> {
        let mut acc = {
            let mut one = MPoly::zero(self.nvars);
            one.insert(vec![0; self.nvars], BigInt::one());
            one
        };
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    fn scale(&self, c: &BigInt) -> Self {
        let terms = self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect();
        MPoly { nvars: self.nvars, terms }
    }

    fn div_exact(&self, d: &BigInt) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(e, v)| {
                debug_assert!((v % d).is_zero(), "ghost division must be exact");
                (e.clone(), v / d)
            })
            .collect();
        MPoly { nvars: self.nvars, terms }
    }

    fn check_budget(&self) -> Result<(), WittError> {
        if self.terms.len() > TERM_BUDGET {
            return Err(WittError::Overflow);
        }
        Ok(())
    }

    /// Terms with coefficient reduced mod p, dropping multiples of p.
    pub fn reduced_mod(&self, p: u64) -> Vec<(Vec<u16>, u64)> {
        let p_big = BigInt::from(p);
        self.terms
            .iter()
            .filter_map(|(e, c)| {
                let mut r = c % &p_big;
                if r.is_negative() {
                    r += &p_big;
                }
                let r: u64 = r.try_into().unwrap();
                (r != 0).then(|| (e.clone(), r))
            })
            .collect()
    }
}

/// Ghost polynomial `w_n = sum_{i<=n} p^i v_i^{p^(n-i)}` in the variables
/// `v_off, ..., v_{off+n}` of an `nvars`-variable polynomial ring.
fn ghost_poly(p: u64, n: usize, off: usize, nvars: usize) -> Result<MPoly, WittError> {
    let mut w = MPoly::zero(nvars);
    let mut pi = BigInt::one();
    for i in 0..=n {
        let vi = MPoly::var(nvars, off + i).pow(p.pow((n - i) as u32))?;
        w = w.add(&vi.scale(&pi))?;
        pi *= p;
    }
    Ok(w)
}

/// The addition, multiplication, and Frobenius law polynomials for `(p, N)`.
///
/// `sum[n]` and `prod[n]` are polynomials in `x_0..x_{N-1}, y_0..y_{N-1}`
/// (the first `N` variables are `x`); `frob[n]` is a polynomial in
/// `x_0..x_{N-1}` computing coordinate `n` of the Frobenius, defined by the
/// ghost identity `w_n(F(a)) = w_{n+1}(a)`.
pub struct WittLaws {
    pub p: u64,
    pub n: usize,
    pub sum: Vec<MPoly>,
    pub prod: Vec<MPoly>,
    pub frob: Vec<MPoly>,
    sum_red: Vec<Vec<(Vec<u16>, u64)>>,
    prod_red: Vec<Vec<(Vec<u16>, u64)>>,
    frob_red: Vec<Vec<(Vec<u16>, u64)>>,
}

fn build_laws(p: u64, n: usize) -> Result<WittLaws, WittError> {
    let nvars = 2 * n;
    let mut sum: Vec<MPoly> = Vec::with_capacity(n);
    let mut prod: Vec<MPoly> = Vec::with_capacity(n);
    for k in 0..n {
        let wx = ghost_poly(p, k, 0, nvars)?;
        let wy = ghost_poly(p, k, n, nvars)?;
        let mut s_target = wx.add(&wy)?;
        let mut m_target = wx.mul(&wy)?;
        let mut pi = BigInt::one();
        for i in 0..k {
            let e = p.pow((k - i) as u32);
            s_target = s_target.sub(&sum[i].pow(e)?.scale(&pi))?;
            m_target = m_target.sub(&prod[i].pow(e)?.scale(&pi))?;
            pi *= p;
        }
        let pk = BigInt::from(p).pow(k as u32);
        sum.push(s_target.div_exact(&pk));
        prod.push(m_target.div_exact(&pk));
    }
    // Frobenius needs n+1 input coordinates to produce n; generate the
    // length n-1 family useable on length-n vectors.
    let mut frob: Vec<MPoly> = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n.saturating_sub(1) {
        let mut target = ghost_poly(p, k + 1, 0, nvars)?;
        let mut pi = BigInt::one();
        for i in 0..k {
            let e = p.pow((k - i) as u32);
            target = target.sub(&frob[i].pow(e)?.scale(&pi))?;
            pi *= p;
        }
        let pk = BigInt::from(p).pow(k as u32);
        frob.push(target.div_exact(&pk));
    }
    let sum_red = sum.iter().map(|f| f.reduced_mod(p)).collect();
    let prod_red = prod.iter().map(|f| f.reduced_mod(p)).collect();
    let frob_red = frob.iter().map(|f| f.reduced_mod(p)).collect();
    Ok(WittLaws { p, n, sum, prod, frob, sum_red, prod_red, frob_red })
}

/// Returns the cached law family for `(p, N)`.
pub fn witt_laws(p: u64, n: usize) -> Result<Arc<WittLaws>, WittError> {
    if n == 0 || n > MAX_WITT_LEN {
        return Err(WittError::BadLength(n));
    }
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<WittLaws>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(l) = guard.get(&(p, n)) {
        return Ok(l.clone());
    }
    let laws = Arc::new(build_laws(p, n)?);
    guard.insert((p, n), laws.clone());
    Ok(laws)
}

fn eval_reduced(base: &WittBase, terms: &[(Vec<u16>, u64)], vals: &[u16]) -> u16 {
    let mut acc = base.zero();
    for (exps, c) in terms {
        let mut t = base.from_int(*c as i64);
        for (i, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if t == base.zero() {
                break;
            }
            t = base.mul(t, base.pow(vals[i], e as u64));
        }
        acc = base.add(acc, t);
    }
    acc
}

// ---------------------------------------------------------------------------
// Witt vectors
// ---------------------------------------------------------------------------

/// A truncated Witt vector `(a_0, ..., a_{N-1})` over its coordinate ring.
#[derive(Clone, Debug)]
pub struct WittVec {
    pub base: WittBase,
    pub coords: Vec<u16>,
}

impl PartialEq for WittVec {
    fn eq(&self, other: &Self) -> bool {
        self.base.same(&other.base) && self.coords == other.coords
    }
}

impl Eq for WittVec {}

impl WittVec {
    pub fn new(base: WittBase, coords: Vec<u16>) -> Result<Self, WittError> {
        if coords.is_empty() || coords.len() > MAX_WITT_LEN {
            return Err(WittError::BadLength(coords.len()));
        }
        Ok(WittVec { base, coords })
    }

    pub fn zero(base: &WittBase, n: usize) -> Self {
        WittVec { base: base.clone(), coords: vec![0; n] }
    }

    pub fn one(base: &WittBase, n: usize) -> Self {
        let mut w = Self::zero(base, n);
        w.coords[0] = base.one();
        w
    }

    /// Teichmüller representative `(c, 0, ..., 0)`.
    pub fn teichmuller(base: &WittBase, c: u16, n: usize) -> Self {
        let mut w = Self::zero(base, n);
        w.coords[0] = c;
        w
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// First coordinate, i.e. the image under `W_N(R) -> R`.
    pub fn residue(&self) -> u16 {
        self.coords[0]
    }

    /// Index of the first nonzero coordinate. For a perfect field base this
    /// is the p-adic valuation of the represented element of `W(F_q)`.
    pub fn valuation(&self) -> Option<usize> {
        self.coords.iter().position(|&c| c != 0)
    }

    /// Units of `W_N` are the vectors with unit first coordinate.
    pub fn is_unit(&self) -> bool {
        match &self.base {
            WittBase::Field(_) => self.coords[0] != 0,
            WittBase::TruncPoly(r) => self.coords[0] as u64 % r.p != 0,
        }
    }

    fn check(&self, other: &Self) -> Result<(), WittError> {
        if !self.base.same(&other.base) || self.len() != other.len() {
            return Err(WittError::MixedRings);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, WittError> {
        self.check(other)?;
        let laws = witt_laws(self.base.p(), self.len())?;
        let vals: Vec<u16> = self.coords.iter().chain(&other.coords).copied().collect();
        let coords = (0..self.len())
            .map(|k| eval_reduced(&self.base, &laws.sum_red[k], &vals))
            .collect();
        Ok(WittVec { base: self.base.clone(), coords })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, WittError> {
        self.check(other)?;
        let laws = witt_laws(self.base.p(), self.len())?;
        let vals: Vec<u16> = self.coords.iter().chain(&other.coords).copied().collect();
        let coords = (0..self.len())
            .map(|k| eval_reduced(&self.base, &laws.prod_red[k], &vals))
            .collect();
        Ok(WittVec { base: self.base.clone(), coords })
    }

    pub fn neg(&self) -> Self {
        if self.base.p() % 2 == 1 {
            // for odd p the ghost components are odd powers, so negation
            // is coordinatewise
            let coords = self.coords.iter().map(|&c| self.base.neg(c)).collect();
            return WittVec { base: self.base.clone(), coords };
        }
        // char(W_N) = p^N, so -a = (p^N - 1) a
        let m = self.base.p().pow(self.len() as u32) - 1;
        self.mul_int(m).expect("same ring")
    }

    pub fn sub(&self, other: &Self) -> Result<Self, WittError> {
        self.add(&other.neg())
    }

    /// Multiplication by an integer scalar, via repeated addition.
    pub fn mul_int(&self, n: u64) -> Result<Self, WittError> {
        let mut acc = Self::zero(&self.base, self.len());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.add(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.add(&base)?;
            }
        }
        Ok(acc)
    }

    /// The injective shift `W_N -> W_{N+1}`.
    pub fn v_raw(&self) -> Result<Self, WittError> {
        if self.len() + 1 > MAX_WITT_LEN {
            return Err(WittError::BadLength(self.len() + 1));
        }
        let mut coords = Vec::with_capacity(self.len() + 1);
        coords.push(0);
        coords.extend_from_slice(&self.coords);
        Ok(WittVec { base: self.base.clone(), coords })
    }

    /// Length-preserving Verschiebung: shift then truncate.
    pub fn v(&self) -> Self {
        let mut coords = Vec::with_capacity(self.len());
        coords.push(0);
        coords.extend_from_slice(&self.coords[..self.len() - 1]);
        WittVec { base: self.base.clone(), coords }
    }

    /// The unique `x` of length `N-1` with `shift(x) = self`, defined on
    /// the ideal `I_N` (first coordinate zero). Length-1 inputs are
    /// rejected since the preimage would have length 0.
    pub fn v_untwist(&self) -> Result<Self, WittError> {
        if self.coords[0] != 0 {
            return Err(WittError::NotInIdeal);
        }
        if self.len() == 1 {
            return Err(WittError::LengthUnderflow);
        }
        Ok(WittVec { base: self.base.clone(), coords: self.coords[1..].to_vec() })
    }

    /// Witt Frobenius. Over a perfect base this is the coordinatewise
    /// p-power at fixed length; over a non-perfect base the output has
    /// length `N-1`, computed from the ghost identity `w_n(F(a)) = w_{n+1}(a)`.
    pub fn frobenius(&self) -> Result<Self, WittError> {
        if self.base.is_perfect() {
            let coords = self.coords.iter().map(|&c| self.base.frobenius(c)).collect();
            return Ok(WittVec { base: self.base.clone(), coords });
        }
        if self.len() == 1 {
            return Err(WittError::LengthUnderflow);
        }
        let laws = witt_laws(self.base.p(), self.len())?;
        let vals: Vec<u16> = self
            .coords
            .iter()
            .copied()
            .chain(std::iter::repeat(0))
            .take(2 * self.len())
            .collect();
        let coords = (0..self.len() - 1)
            .map(|k| eval_reduced(&self.base, &laws.frob_red[k], &vals))
            .collect();
        Ok(WittVec { base: self.base.clone(), coords })
    }

    /// Drops the top coordinate: the ring surjection `W_N -> W_{N-1}`.
    pub fn truncate(&self) -> Result<Self, WittError> {
        if self.len() == 1 {
            return Err(WittError::LengthUnderflow);
        }
        Ok(WittVec { base: self.base.clone(), coords: self.coords[..self.len() - 1].to_vec() })
    }

    /// Inverse of a unit, computed by lifting the residue inverse through
    /// the `I`-adic filtration.
    pub fn inv(&self) -> Option<Self> {
        if !self.is_unit() {
            return None;
        }
        // residue inverse
        let r0 = match &self.base {
            WittBase::Field(f) => f.inv(self.coords[0]),
            WittBase::TruncPoly(r) => {
                // invert mod x^k by Newton on the constant term
                let mut inv = 0u16;
                for cand in 0..r.size() as u16 {
                    if r.mul(self.coords[0], cand) == 1 {
                        inv = cand;
                        break;
                    }
                }
                inv
            }
        };
        let n = self.len();
        let mut x = WittVec::teichmuller(&self.base, r0, n);
        // Newton iteration x -> x(2 - ax) doubles the number of correct
        // coordinates; N <= 6 so a few rounds suffice.
        let two = WittVec::one(&self.base, n).mul_int(2).ok()?;
        for _ in 0..n {
            let ax = self.mul(&x).ok()?;
            let corr = two.sub(&ax).ok()?;
            x = x.mul(&corr).ok()?;
        }
        let check = self.mul(&x).ok()?;
        check.eq(&WittVec::one(&self.base, n)).then_some(x)
    }
}

impl fmt::Display for WittVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match &self.base {
            WittBase::Field(fld) => self.coords.iter().map(|&c| fld.fmt_elem(c)).collect(),
            WittBase::TruncPoly(_) => self.coords.iter().map(|c| c.to_string()).collect(),
        };
        write!(f, "({})", parts.join(","))
    }
}

/// Parses `(a0,a1,...)` using the base's element syntax.
pub fn parse_witt(base: &WittBase, s: &str) -> Result<WittVec, WittError> {
    let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
    let mut coords = Vec::new();
    for part in inner.split(',') {
        let part = part.trim();
        let c = match base {
            WittBase::Field(f) => f.parse_elem(part)?,
            WittBase::TruncPoly(_) => part
                .parse::<u16>()
                .map_err(|_| WittError::Field(FieldError::Parse(part.to_string())))?,
        };
        coords.push(c);
    }
    WittVec::new(base.clone(), coords)
}

// ---------------------------------------------------------------------------
// W_N(F_p) <-> Z/p^N
// ---------------------------------------------------------------------------

/// The ring isomorphism `W_N(F_p) -> Z/p^N`, `a -> sum p^i [a_i]` with `[.]`
/// the Teichmüller lift `[c] = c^(p^(N-1)) mod p^N`.
pub fn witt_to_zpn(w: &WittVec) -> u64 {
    let p = w.base.p();
    let n = w.len() as u32;
    let pn = p.pow(n);
    let mut acc: u64 = 0;
    let mut pi: u64 = 1;
    for (i, &c) in w.coords.iter().enumerate() {
        let _ = i;
        let mut t = c as u64 % pn;
        for _ in 0..n - 1 {
            t = modpow(t, p, pn);
        }
        acc = (acc + pi * t) % pn;
        pi = (pi * p) % pn;
    }
    acc
}

/// Inverse of [`witt_to_zpn`], by digit peeling: the next coordinate is the
/// residue mod p, then the Teichmüller lift is subtracted and p divided out.
pub fn zpn_to_witt(base: &WittBase, mut x: u64, n: usize) -> WittVec {
    let p = base.p();
    x %= p.pow(n as u32);
    let mut coords = Vec::with_capacity(n);
    for i in 0..n {
        let level = (n - i) as u32;
        let m = p.pow(level);
        let c = x % p;
        coords.push(c as u16);
        let mut t = c;
        for _ in 0..level - 1 {
            t = modpow(t, p, m);
        }
        x = ((x + m - t % m) % m) / p;
    }
    WittVec { base: base.clone(), coords }
}

fn modpow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FqField;

    fn w2f2(a: u16, b: u16) -> WittVec {
        let f = FqField::new(2, 1).unwrap();
        WittVec::new(WittBase::Field(f), vec![a, b]).unwrap()
    }

    #[test]
    fn law_polynomials_small() {
        // s1 for p=2 reduces to x1 + y1 + x0*y0
        let laws = witt_laws(2, 2).unwrap();
        let red = &laws.sum_red[1];
        let mut expect = vec![
            (vec![0u16, 1, 0, 0], 1u64),
            (vec![0, 0, 0, 1], 1),
            (vec![1, 0, 1, 0], 1),
        ];
        expect.sort();
        let mut got = red.clone();
        got.sort();
        assert_eq!(got, expect);

        // length 1 is the base ring
        let laws1 = witt_laws(5, 1).unwrap();
        assert_eq!(laws1.sum_red[0], vec![(vec![0, 1], 1), (vec![1, 0], 1)]);
        assert_eq!(laws1.prod_red[0], vec![(vec![1, 1], 1)]);
    }

    #[test]
    fn law_s1_p3() {
        // s1 = x1 + y1 - (x0^2 y0 + x0 y0^2) mod 3
        let laws = witt_laws(3, 2).unwrap();
        let mut got = laws.sum_red[1].clone();
        got.sort();
        let mut expect = vec![
            (vec![0u16, 1, 0, 0], 1u64),
            (vec![0, 0, 0, 1], 1),
            (vec![2, 0, 1, 0], 2),
            (vec![1, 0, 2, 0], 2),
        ];
        expect.sort();
        assert_eq!(got, expect);
    }

    #[test]
    fn one_plus_one_in_w2f2() {
        let one = w2f2(1, 0);
        assert_eq!(one.add(&one).unwrap(), w2f2(0, 1));
    }

    #[test]
    fn additive_identity() {
        let f = FqField::new(3, 1).unwrap();
        let base = WittBase::Field(f);
        for enc in 0..9u16 {
            let a = WittVec::new(base.clone(), vec![enc % 3, enc / 3]).unwrap();
            let z = WittVec::zero(&base, 2);
            assert_eq!(a.add(&z).unwrap(), a);
        }
    }

    #[test]
    fn teichmuller_multiplicative() {
        let f = FqField::new(3, 2).unwrap();
        let base = WittBase::Field(f.clone());
        for a in f.elems() {
            for b in f.elems() {
                let ta = WittVec::teichmuller(&base, a, 3);
                let tb = WittVec::teichmuller(&base, b, 3);
                let prod = ta.mul(&tb).unwrap();
                assert_eq!(prod, WittVec::teichmuller(&base, f.mul(a, b), 3));
            }
        }
    }

    #[test]
    fn shift_and_untwist() {
        let w = w2f2(1, 0);
        assert_eq!(w.v(), w2f2(0, 1));
        let u = w2f2(0, 1).v_untwist().unwrap();
        assert_eq!(u.coords, vec![1]);
        assert_eq!(w2f2(1, 0).v_untwist(), Err(WittError::NotInIdeal));
    }

    #[test]
    fn untwist_inverts_raw_shift() {
        let f = FqField::new(3, 1).unwrap();
        let base = WittBase::Field(f);
        for enc in 0..27u16 {
            let x = WittVec::new(
                base.clone(),
                vec![enc % 3, (enc / 3) % 3, enc / 9],
            )
            .unwrap();
            let shifted = x.v_raw().unwrap();
            assert_eq!(shifted.v_untwist().unwrap(), x);
        }
    }

    #[test]
    fn fv_equals_p() {
        // FV = p, checked exhaustively in W_3(F_3)
        let f = FqField::new(3, 1).unwrap();
        let base = WittBase::Field(f);
        for enc in 0..27u16 {
            let a = WittVec::new(
                base.clone(),
                vec![enc % 3, (enc / 3) % 3, enc / 9],
            )
            .unwrap();
            let fv = a.v().frobenius().unwrap();
            let pa = a.mul_int(3).unwrap();
            assert_eq!(fv, pa);
        }
    }

    #[test]
    fn frobenius_perfect_is_coordinate_power() {
        let f = FqField::new(2, 2).unwrap();
        let base = WittBase::Field(f.clone());
        let g = f.generator();
        let w = WittVec::new(base, vec![g, 1]).unwrap();
        let fw = w.frobenius().unwrap();
        assert_eq!(fw.coords, vec![f.mul(g, g), 1]);
    }

    #[test]
    fn frobenius_nonperfect_drops_length() {
        let r = TruncPolyRing::new(2, 2);
        let base = WittBase::TruncPoly(r);
        let w = WittVec::new(base.clone(), vec![2, 1]).unwrap(); // (x, 1)
        let fw = w.frobenius().unwrap();
        assert_eq!(fw.len(), 1);
        let w1 = WittVec::new(base, vec![2]).unwrap();
        assert_eq!(w1.frobenius(), Err(WittError::LengthUnderflow));
    }

    #[test]
    fn wn_fp_is_zpn() {
        // the Teichmüller-digit map is a ring isomorphism, exhaustively
        for p in [2u64, 3] {
            for n in 1..=3usize {
                let f = FqField::new(p, 1).unwrap();
                let base = WittBase::Field(f);
                let pn = p.pow(n as u32);
                let all: Vec<WittVec> = (0..pn)
                    .map(|e| {
                        let mut coords = Vec::new();
                        let mut e = e;
                        for _ in 0..n {
                            coords.push((e % p) as u16);
                            e /= p;
                        }
                        WittVec::new(base.clone(), coords).unwrap()
                    })
                    .collect();
                // bijectivity
                let mut seen = std::collections::HashSet::new();
                for w in &all {
                    seen.insert(witt_to_zpn(w));
                }
                assert_eq!(seen.len(), pn as usize);
                // ring laws
                for a in &all {
                    assert_eq!(zpn_to_witt(&base, witt_to_zpn(a), n), *a);
                    for b in &all {
                        let s = a.add(b).unwrap();
                        assert_eq!(
                            witt_to_zpn(&s),
                            (witt_to_zpn(a) + witt_to_zpn(b)) % pn
                        );
                        let m = a.mul(b).unwrap();
                        assert_eq!(
                            witt_to_zpn(&m),
                            (witt_to_zpn(a) * witt_to_zpn(b)) % pn
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn units_invert() {
        let f = FqField::new(2, 1).unwrap();
        let base = WittBase::Field(f);
        for enc in 0..8u16 {
            let w = WittVec::new(
                base.clone(),
                vec![enc % 2, (enc / 2) % 2, enc / 4],
            )
            .unwrap();
            match w.inv() {
                Some(inv) => {
                    assert!(w.is_unit());
                    assert_eq!(w.mul(&inv).unwrap(), WittVec::one(&base, 3));
                }
                None => assert!(!w.is_unit()),
            }
        }
    }

    #[test]
    fn parse_display_roundtrip() {
        let f = FqField::new(3, 1).unwrap();
        let base = WittBase::Field(f);
        let w = WittVec::new(base.clone(), vec![2, 0, 1]).unwrap();
        assert_eq!(parse_witt(&base, &w.to_string()).unwrap(), w);
    }
}
