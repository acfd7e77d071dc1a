//! Prime and extension finite fields with table-driven exact arithmetic.
//!
//! A field `F_{p^deg}` is constructed from a monic irreducible modulus over
//! `F_p`; irreducibility is verified at construction by exhaustive factor
//! search, which is cheap at the sizes this crate targets. Elements are
//! stored as indices `sum c_i * p^i` into precomputed operation tables, so
//! all arithmetic is a table lookup.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Element of an [`FqField`], encoded as `sum c_i * p^i` for the coefficient
/// vector `(c_0, ..., c_{deg-1})` of its polynomial representative.
pub type FqElem = u16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus is not monic of degree {0}")]
    BadModulus(usize),
    #[error("modulus is reducible over F_{0}")]
    NotIrreducible(u64),
    #[error("field size {0} exceeds the supported table size")]
    TooLarge(u64),
    #[error("cannot parse field element from {0:?}")]
    Parse(String),
}

/// A finite field `F_q`, `q = p^deg`, with all operation tables precomputed.
#[derive(Clone)]
pub struct FqField {
    p: u64,
    deg: usize,
    q: u64,
    modulus: Vec<u64>,
    add: Vec<FqElem>,
    mul: Vec<FqElem>,
    neg: Vec<FqElem>,
    inv: Vec<FqElem>,
    frob: Vec<FqElem>,
    frob_inv: Vec<FqElem>,
}

/// Shared handle to a field; cloning is cheap and fields compare by content.
pub type Field = Arc<FqField>;

const MAX_Q: u64 = 4096;

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// Dense polynomial helpers over F_p; coefficient vectors are low-to-high
// and not necessarily trimmed.
fn poly_trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_rem(mut a: Vec<u64>, b: &[u64], p: u64) -> Vec<u64> {
    let db = b.len() - 1;
    let lead_inv = mod_inv(b[db], p);
    while a.len() > db {
        let k = a.len() - 1;
        let c = a[k] % p;
        if c != 0 {
            let f = c * lead_inv % p;
            for i in 0..=db {
                let idx = k - db + i;
                a[idx] = (a[idx] + p - f * b[i] % p) % p;
            }
        }
        a.pop();
        a = poly_trim(a);
        if a.is_empty() {
            break;
        }
    }
    a
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p is a small prime, Fermat suffices
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn poly_is_irreducible(m: &[u64], p: u64) -> bool {
    let deg = m.len() - 1;
    if deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    // exhaustive search for a monic factor of degree 1..=deg/2
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for enc in 0..count {
            let mut f = Vec::with_capacity(d + 1);
            let mut e = enc;
            for _ in 0..d {
                f.push(e % p);
                e /= p;
            }
            f.push(1);
            if poly_rem(m.to_vec(), &f, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FqField {
    /// Field with the lexicographically smallest monic irreducible modulus
    /// of the given degree. Deterministic, so encodings are reproducible.
    pub fn new(p: u64, deg: usize) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if deg == 1 {
            return Self::with_modulus(p, vec![0, 1]);
        }
        let count = p.pow(deg as u32);
        for enc in 0..count {
            let mut m = Vec::with_capacity(deg + 1);
            let mut e = enc;
            for _ in 0..deg {
                m.push(e % p);
                e /= p;
            }
            m.push(1);
            if poly_is_irreducible(&m, p) {
                return Self::with_modulus(p, m);
            }
        }
        unreachable!("an irreducible polynomial of every degree exists")
    }

    /// Field with an explicit monic modulus (low-to-high coefficients,
    /// length `deg + 1`); irreducibility is verified.
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let deg = modulus.len().saturating_sub(1);
        if deg == 0 || modulus[deg] % p != 1 {
            return Err(FieldError::BadModulus(deg));
        }
        let modulus: Vec<u64> = modulus.iter().map(|c| c % p).collect();
        if !poly_is_irreducible(&modulus, p) {
            return Err(FieldError::NotIrreducible(p));
        }
        let q = p
            .checked_pow(deg as u32)
            .filter(|&q| q <= MAX_Q)
            .ok_or(FieldError::TooLarge(u64::MAX))?;

        let decode = |e: u64| -> Vec<u64> {
            let mut v = Vec::with_capacity(deg);
            let mut e = e;
            for _ in 0..deg {
                v.push(e % p);
                e /= p;
            }
            v
        };
        let encode = |v: &[u64]| -> FqElem {
            let mut e = 0u64;
            for i in (0..deg).rev() {
                e = e * p + v.get(i).copied().unwrap_or(0) % p;
            }
            e as FqElem
        };

        let qs = q as usize;
        let mut add = vec![0 as FqElem; qs * qs];
        let mut mul = vec![0 as FqElem; qs * qs];
        let mut neg = vec![0 as FqElem; qs];
        for a in 0..q {
            let va = decode(a);
            let vn: Vec<u64> = va.iter().map(|c| (p - c % p) % p).collect();
            neg[a as usize] = encode(&vn);
            for b in 0..q {
                let vb = decode(b);
                let vs: Vec<u64> = (0..deg).map(|i| (va[i] + vb[i]) % p).collect();
                add[(a * q + b) as usize] = encode(&vs);
                let mut prod = vec![0u64; 2 * deg.max(1)];
                for (i, &ca) in va.iter().enumerate() {
                    for (j, &cb) in vb.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + ca * cb) % p;
                    }
                }
                let r = poly_rem(poly_trim(prod), &modulus, p);
                mul[(a * q + b) as usize] = encode(&r);
            }
        }
        let mut inv = vec![0 as FqElem; qs];
        for a in 1..q {
            for b in 1..q {
                if mul[(a * q + b) as usize] == 1 {
                    inv[a as usize] = b as FqElem;
                    break;
                }
            }
            debug_assert!(inv[a as usize] != 0, "every nonzero element is a unit");
        }
        let mut frob = vec![0 as FqElem; qs];
        let mut frob_inv = vec![0 as FqElem; qs];
        for a in 0..q {
            let mut r = a as FqElem;
            let mut acc = 1 as FqElem;
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul[(acc as u64 * q + r as u64) as usize];
                }
                r = mul[(r as u64 * q + r as u64) as usize];
                e >>= 1;
            }
            frob[a as usize] = acc;
        }
        for a in 0..qs {
            frob_inv[frob[a] as usize] = a as FqElem;
        }
        Ok(Arc::new(FqField {
            p,
            deg,
            q,
            modulus,
            add,
            mul,
            neg,
            inv,
            frob,
            frob_inv,
        }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FqElem {
        0
    }

    pub fn one(&self) -> FqElem {
        1
    }

    pub fn elems(&self) -> impl Iterator<Item = FqElem> {
        (0..self.q).map(|e| e as FqElem)
    }

    #[inline]
    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn neg(&self, a: FqElem) -> FqElem {
        self.neg[a as usize]
    }

    #[inline]
    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        self.mul[a as usize * self.q as usize + b as usize]
    }

    /// Multiplicative inverse; zero maps to zero, callers check for units.
    #[inline]
    pub fn inv(&self, a: FqElem) -> FqElem {
        self.inv[a as usize]
    }

    pub fn pow(&self, a: FqElem, mut e: u64) -> FqElem {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Absolute Frobenius `a -> a^p`.
    #[inline]
    pub fn frobenius(&self, a: FqElem) -> FqElem {
        self.frob[a as usize]
    }

    /// Inverse of the absolute Frobenius (unique p-th root).
    #[inline]
    pub fn frobenius_inv(&self, a: FqElem) -> FqElem {
        self.frob_inv[a as usize]
    }

    /// `a -> a^q0` for a power `q0` of `p`; the relative Frobenius of the
    /// extension `F_{q0} <= F_q` when `q0` divides into `q` that way.
    pub fn frobenius_q(&self, a: FqElem, q0: u64) -> FqElem {
        let mut r = a;
        let mut w = q0;
        while w > 1 {
            debug_assert!(w % self.p == 0, "Frobenius exponent must be a power of p");
            r = self.frobenius(r);
            w /= self.p;
        }
        r
    }

    /// Smallest element generating the multiplicative group.
    pub fn generator(&self) -> FqElem {
        'cand: for g in 2..self.q {
            let g = g as FqElem;
            let mut x = g;
            for _ in 1..self.q - 1 {
                if x == 1 {
                    continue 'cand;
                }
                x = self.mul(x, g);
            }
            if x == 1 {
                return g;
            }
        }
        // F_2 has generator 1
        1
    }

    /// Polynomial coefficients `(c_0, ..., c_{deg-1})` of an element.
    pub fn coeffs(&self, a: FqElem) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.deg);
        let mut e = a as u64;
        for _ in 0..self.deg {
            v.push(e % self.p);
            e /= self.p;
        }
        v
    }

    pub fn from_coeffs(&self, v: &[u64]) -> FqElem {
        let mut e = 0u64;
        for i in (0..self.deg).rev() {
            e = e * self.p + v.get(i).copied().unwrap_or(0) % self.p;
        }
        e as FqElem
    }

    /// Embeds an integer via reduction mod p.
    pub fn from_int(&self, n: i64) -> FqElem {
        let r = n.rem_euclid(self.p as i64) as u64;
        r as FqElem
    }

    pub fn fmt_elem(&self, a: FqElem) -> String {
        if self.deg == 1 {
            return format!("{}", a);
        }
        let coeffs = self.coeffs(a);
        let mut parts = Vec::new();
        for i in (0..self.deg).rev() {
            let c = coeffs[i];
            if c == 0 {
                continue;
            }
            let part = match (i, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "x".to_string(),
                (1, c) => format!("{c}*x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}*x^{i}"),
            };
            parts.push(part);
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join("+")
        }
    }

    /// Parses either the integer encoding or a polynomial string like
    /// `2*x^2+x+1`.
    pub fn parse_elem(&self, s: &str) -> Result<FqElem, FieldError> {
        let s = s.trim();
        if let Ok(n) = s.parse::<u64>() {
            if n < self.q {
                return Ok(n as FqElem);
            }
            return Err(FieldError::Parse(s.to_string()));
        }
        let mut coeffs = vec![0u64; self.deg];
        for term in s.replace('-', "+-").split('+') {
            let term = term.trim();
            if term.is_empty() {
                continue;
            }
            let (neg, term) = match term.strip_prefix('-') {
                Some(rest) => (true, rest.trim()),
                None => (false, term),
            };
            let (c, i) = if let Some(rest) = term.strip_prefix("x") {
                (1u64, parse_exp(rest)?)
            } else if let Some((c, x)) = term.split_once("*x") {
                let c: u64 = c.trim().parse().map_err(|_| FieldError::Parse(s.into()))?;
                (c, parse_exp(x)?)
            } else if let Some((c, x)) = term.split_once('x') {
                let c: u64 = c.trim().parse().map_err(|_| FieldError::Parse(s.into()))?;
                (c, parse_exp(x)?)
            } else {
                let c: u64 = term.parse().map_err(|_| FieldError::Parse(s.into()))?;
                (c, 0)
            };
            if i >= self.deg {
                return Err(FieldError::Parse(s.to_string()));
            }
            let c = if neg { (self.p - c % self.p) % self.p } else { c % self.p };
            coeffs[i] = (coeffs[i] + c) % self.p;
        }
        Ok(self.from_coeffs(&coeffs))
    }
}

fn parse_exp(rest: &str) -> Result<usize, FieldError> {
    let rest = rest.trim();
    if rest.is_empty() {
        return Ok(1);
    }
    rest.strip_prefix('^')
        .and_then(|e| e.trim().parse().ok())
        .ok_or_else(|| FieldError::Parse(rest.to_string()))
}

impl PartialEq for FqField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl Eq for FqField {}

impl fmt::Debug for FqField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}
