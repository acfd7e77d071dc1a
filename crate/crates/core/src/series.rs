//! Truncated power series `R_N = F_q[[z]]/(z^N)` with exact coefficient
//! arithmetic and the coefficientwise Frobenius.

use std::fmt;

use thiserror::Error;

use crate::field::{Field, FieldError, FqElem};

/// Truncation levels are kept small; everything here is desk scale.
pub const MAX_LEVEL: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("constant term is zero, series is not a unit")]
    NonUnit,
    #[error("operands live in different rings")]
    MixedRings,
    #[error("truncation level {0} out of range 1..={MAX_LEVEL}")]
    BadLevel(usize),
    #[error("cannot parse series from {0:?}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// An element of `F_q[[z]]/(z^N)`; `coeffs[i]` is the coefficient of `z^i`.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncSeries {
    pub field: Field,
    pub coeffs: Vec<FqElem>,
}

impl TruncSeries {
    pub fn new(field: &Field, mut coeffs: Vec<FqElem>, level: usize) -> Result<Self, SeriesError> {
        if level == 0 || level > MAX_LEVEL {
            return Err(SeriesError::BadLevel(level));
        }
        coeffs.resize(level, 0);
        Ok(TruncSeries { field: field.clone(), coeffs })
    }

    pub fn zero(field: &Field, level: usize) -> Self {
        TruncSeries { field: field.clone(), coeffs: vec![0; level] }
    }

    pub fn one(field: &Field, level: usize) -> Self {
        let mut s = Self::zero(field, level);
        s.coeffs[0] = 1;
        s
    }

    pub fn constant(field: &Field, c: FqElem, level: usize) -> Self {
        let mut s = Self::zero(field, level);
        s.coeffs[0] = c;
        s
    }

    /// The monomial `c * z^k`, zero if `k` is at or above the level.
    pub fn monomial(field: &Field, c: FqElem, k: usize, level: usize) -> Self {
        let mut s = Self::zero(field, level);
        if k < level {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn level(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Unit test: invertible iff the constant term is nonzero.
    pub fn is_unit(&self) -> bool {
        self.coeffs[0] != 0
    }

    /// Index of the lowest nonzero coefficient, `None` for the zero element.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0)
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.field != other.field || self.level() != other.level() {
            return Err(SeriesError::MixedRings);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let f = &self.field;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Ok(TruncSeries { field: self.field.clone(), coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let f = &self.field;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| f.sub(a, b))
            .collect();
        Ok(TruncSeries { field: self.field.clone(), coeffs })
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        let coeffs = self.coeffs.iter().map(|&a| f.neg(a)).collect();
        TruncSeries { field: self.field.clone(), coeffs }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let f = &self.field;
        let n = self.level();
        let mut coeffs = vec![0 as FqElem; n];
        for i in 0..n {
            if self.coeffs[i] == 0 {
                continue;
            }
            for j in 0..n - i {
                if other.coeffs[j] == 0 {
                    continue;
                }
                let t = f.mul(self.coeffs[i], other.coeffs[j]);
                coeffs[i + j] = f.add(coeffs[i + j], t);
            }
        }
        Ok(TruncSeries { field: self.field.clone(), coeffs })
    }

    pub fn scale(&self, c: FqElem) -> Self {
        let f = &self.field;
        let coeffs = self.coeffs.iter().map(|&a| f.mul(a, c)).collect();
        TruncSeries { field: self.field.clone(), coeffs }
    }

    /// Multiplication by `z^k` (shift up, truncating overflow).
    pub fn shift(&self, k: usize) -> Self {
        let n = self.level();
        let mut coeffs = vec![0 as FqElem; n];
        for i in 0..n.saturating_sub(k) {
            coeffs[i + k] = self.coeffs[i];
        }
        TruncSeries { field: self.field.clone(), coeffs }
    }

    /// Inverse of a unit, by back-substitution on coefficients.
    pub fn inv(&self) -> Result<Self, SeriesError> {
        if !self.is_unit() {
            return Err(SeriesError::NonUnit);
        }
        let f = &self.field;
        let n = self.level();
        let c0 = f.inv(self.coeffs[0]);
        let mut out = vec![0 as FqElem; n];
        out[0] = c0;
        for k in 1..n {
            // coefficient k of self * out must vanish
            let mut acc = 0 as FqElem;
            for i in 1..=k {
                acc = f.add(acc, f.mul(self.coeffs[i], out[k - i]));
            }
            out[k] = f.neg(f.mul(acc, c0));
        }
        Ok(TruncSeries { field: self.field.clone(), coeffs: out })
    }

    /// Coefficientwise `a -> a^q0` for a power `q0` of the characteristic.
    /// This is a ring endomorphism of `R_N` fixing `F_{q0}`-coefficients.
    pub fn frobenius(&self, q0: u64) -> Self {
        let f = &self.field;
        let coeffs = self.coeffs.iter().map(|&a| f.frobenius_q(a, q0)).collect();
        TruncSeries { field: self.field.clone(), coeffs }
    }

    /// Drops the top coefficient, landing one level down.
    pub fn truncate(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.pop();
        TruncSeries { field: self.field.clone(), coeffs }
    }

    /// Re-truncates or zero-extends to the requested level.
    pub fn at_level(&self, level: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(level, 0);
        TruncSeries { field: self.field.clone(), coeffs }
    }

    /// Parses strings like `1 + z + 2*z^3` or `x*z^2` (extension-field
    /// coefficients use the field's own element syntax).
    pub fn parse(field: &Field, s: &str, level: usize) -> Result<Self, SeriesError> {
        let mut out = Self::zero(field, level);
        for term in s.split('+') {
            let term = term.trim();
            if term.is_empty() {
                continue;
            }
            let (coeff_str, exp) = if let Some(pos) = term.find('z') {
                let (c, zpart) = term.split_at(pos);
                let c = c.trim().trim_end_matches('*').trim();
                let e = zpart[1..].trim();
                let exp: usize = if e.is_empty() {
                    1
                } else {
                    e.strip_prefix('^')
                        .and_then(|v| v.trim().parse().ok())
                        .ok_or_else(|| SeriesError::Parse(s.to_string()))?
                };
                (if c.is_empty() { "1" } else { c }, exp)
            } else {
                (term, 0)
            };
            let c = field.parse_elem(coeff_str.trim_matches(|ch| ch == '(' || ch == ')'))?;
            if exp < level {
                out.coeffs[exp] = field.add(out.coeffs[exp], c);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let cs = self.field.fmt_elem(c);
            let cs = if cs.contains('+') { format!("({cs})") } else { cs };
            match i {
                0 => write!(f, "{cs}")?,
                1 if c == 1 => write!(f, "z")?,
                1 => write!(f, "{cs}*z")?,
                _ if c == 1 => write!(f, "z^{i}")?,
                _ => write!(f, "{cs}*z^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FqField;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn f2() -> Field {
        FqField::new(2, 1).unwrap()
    }

    #[test]
    fn frobenius_fixes_prime_field_series() {
        let f = f2();
        let s = TruncSeries::parse(&f, "1 + z", 2).unwrap();
        assert_eq!(s.frobenius(2), s);
    }

    #[test]
    fn frobenius_on_extension_coefficient() {
        let f4 = FqField::new(2, 2).unwrap();
        let a = f4.generator();
        let s = TruncSeries::monomial(&f4, a, 1, 2);
        let t = s.frobenius(2);
        assert_eq!(t.coeffs[1], f4.mul(a, a));
        assert_eq!(t.coeffs[0], 0);
    }

    #[test]
    fn frobenius_of_zero() {
        let f = f2();
        let z = TruncSeries::zero(&f, 3);
        assert_eq!(z.frobenius(2), z);
    }

    #[test]
    fn inv_geometric_series() {
        let f = f2();
        let s = TruncSeries::parse(&f, "1 + z", 3).unwrap();
        let inv = s.inv().unwrap();
        assert_eq!(inv, TruncSeries::parse(&f, "1 + z + z^2", 3).unwrap());
        assert_eq!(s.mul(&inv).unwrap(), TruncSeries::one(&f, 3));
    }

    #[test]
    fn inv_of_one() {
        let f = f2();
        let one = TruncSeries::one(&f, 4);
        assert_eq!(one.inv().unwrap(), one);
    }

    #[test]
    fn inv_rejects_non_unit() {
        let f = f2();
        let z = TruncSeries::monomial(&f, 1, 1, 3);
        assert_eq!(z.inv(), Err(SeriesError::NonUnit));
    }

    #[test]
    fn frobenius_is_ring_hom() {
        let f9 = FqField::new(3, 2).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let a = random_series(&f9, 4, &mut rng);
            let b = random_series(&f9, 4, &mut rng);
            let lhs = a.mul(&b).unwrap().frobenius(3);
            let rhs = a.frobenius(3).mul(&b.frobenius(3)).unwrap();
            assert_eq!(lhs, rhs);
            let lhs = a.add(&b).unwrap().frobenius(3);
            let rhs = a.frobenius(3).add(&b.frobenius(3)).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn random_units_invert(){
        let f9 = FqField::new(3, 2).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let mut s = random_series(&f9, 5, &mut rng);
            if s.coeffs[0] == 0 {
                s.coeffs[0] = 1;
            }
            let inv = s.inv().unwrap();
            assert_eq!(s.mul(&inv).unwrap(), TruncSeries::one(&f9, 5));
        }
    }

    #[test]
    fn parse_display_roundtrip() {
        let f = FqField::new(3, 1).unwrap();
        let s = TruncSeries::new(&f, vec![1, 0, 2, 1], 4).unwrap();
        let t = TruncSeries::parse(&f, &s.to_string(), 4).unwrap();
        assert_eq!(s, t);
    }

    pub(crate) fn random_series(
        field: &Field,
        level: usize,
        rng: &mut StdRng,
    ) -> TruncSeries {
        let coeffs = (0..level)
            .map(|_| rng.gen_range(0..field.q()) as FqElem)
            .collect();
        TruncSeries { field: field.clone(), coeffs }
    }
}
