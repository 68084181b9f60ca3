use std::fmt;

use super::{ExactDiv, Fe, Field, Ring};

/// Polynomial in the delay variable `D` over GF(2^m); `coeffs[k]` multiplies `D^k`.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct DPolynomial {
    coeffs: Vec<Fe>,
}

impl DPolynomial {
    pub fn zero() -> Self {
        DPolynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Fe) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Fe::ONE)
    }

    /// `c · D^k`.
    pub fn monomial(c: Fe, k: usize) -> Self {
        let mut coeffs = vec![Fe::ZERO; k + 1];
        coeffs[k] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        DPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Fe {
        self.coeffs.get(k).copied().unwrap_or(Fe::ZERO)
    }

    /// Degree, with -1 for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Fe {
        self.coeffs.last().copied().unwrap_or(Fe::ZERO)
    }

    /// Drops all terms of degree above `max_degree`.
    pub fn truncate(&self, max_degree: usize) -> Self {
        Self::from_coeffs(self.coeffs.iter().take(max_degree + 1).copied().collect())
    }

    pub fn eval(&self, field: &Field, x: Fe) -> Fe {
        self.coeffs
            .iter()
            .rev()
            .fold(Fe::ZERO, |acc, &c| field.mul(acc, x) + c)
    }
}

impl fmt::Debug for DPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for DPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (k, c.0) {
                (0, v) => write!(f, "{v}")?,
                (_, 1) => {}
                (_, v) => write!(f, "{v}*")?,
            }
            match k {
                0 => {}
                1 => write!(f, "D")?,
                _ => write!(f, "D^{k}")?,
            }
        }
        Ok(())
    }
}

/// The ring GF(2^m)[D].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyRing {
    pub field: Field,
}

impl PolyRing {
    pub fn new(field: Field) -> Self {
        PolyRing { field }
    }

    pub fn scale(&self, p: &DPolynomial, c: Fe) -> DPolynomial {
        DPolynomial::from_coeffs(p.coeffs.iter().map(|&a| self.field.mul(a, c)).collect())
    }

    /// Multiply by `D^k`.
    pub fn shift(&self, p: &DPolynomial, k: usize) -> DPolynomial {
        if p.is_zero() {
            return DPolynomial::zero();
        }
        let mut coeffs = vec![Fe::ZERO; k];
        coeffs.extend_from_slice(&p.coeffs);
        DPolynomial { coeffs }
    }

    /// Euclidean division: `(q, r)` with `a = q·b + r`, `deg r < deg b`.
    pub fn div_rem(&self, a: &DPolynomial, b: &DPolynomial) -> (DPolynomial, DPolynomial) {
        assert!(!b.is_zero(), "polynomial division by zero");
        let f = &self.field;
        let mut rem = a.coeffs.clone();
        let db = b.coeffs.len() - 1;
        if rem.len() <= db {
            return (DPolynomial::zero(), a.clone());
        }
        let lead_inv = f.inv(b.leading()).expect("nonzero leading coefficient");
        let mut quot = vec![Fe::ZERO; rem.len() - db];
        for k in (0..quot.len()).rev() {
            let c = f.mul(rem[k + db], lead_inv);
            if c.is_zero() {
                continue;
            }
            quot[k] = c;
            for (i, &bc) in b.coeffs.iter().enumerate() {
                rem[k + i] += f.mul(c, bc);
            }
        }
        (DPolynomial::from_coeffs(quot), DPolynomial::from_coeffs(rem))
    }

    pub fn monic(&self, p: &DPolynomial) -> DPolynomial {
        if p.is_zero() {
            return p.clone();
        }
        let inv = self.field.inv(p.leading()).expect("nonzero leading coefficient");
        self.scale(p, inv)
    }

    /// Monic greatest common divisor (zero iff both inputs are zero).
    pub fn gcd(&self, a: &DPolynomial, b: &DPolynomial) -> DPolynomial {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = self.div_rem(&x, &y);
            x = y;
            y = r;
        }
        self.monic(&x)
    }

    pub fn pow(&self, p: &DPolynomial, e: u32) -> DPolynomial {
        let mut acc = DPolynomial::one();
        for _ in 0..e {
            acc = self.mul(&acc, p);
        }
        acc
    }
}

impl Ring for PolyRing {
    type Elem = DPolynomial;

    fn zero(&self) -> DPolynomial {
        DPolynomial::zero()
    }
    fn one(&self) -> DPolynomial {
        DPolynomial::one()
    }
    fn add(&self, a: &DPolynomial, b: &DPolynomial) -> DPolynomial {
        let n = a.coeffs.len().max(b.coeffs.len());
        DPolynomial::from_coeffs((0..n).map(|k| a.coeff(k) + b.coeff(k)).collect())
    }
    fn neg(&self, a: &DPolynomial) -> DPolynomial {
        a.clone()
    }
    fn mul(&self, a: &DPolynomial, b: &DPolynomial) -> DPolynomial {
        if a.is_zero() || b.is_zero() {
            return DPolynomial::zero();
        }
        let mut out = vec![Fe::ZERO; a.coeffs.len() + b.coeffs.len() - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                out[i + j] += self.field.mul(x, y);
            }
        }
        DPolynomial::from_coeffs(out)
    }
    fn is_zero(&self, a: &DPolynomial) -> bool {
        a.is_zero()
    }
}

impl ExactDiv for PolyRing {
    fn div_exact(&self, a: &DPolynomial, b: &DPolynomial) -> DPolynomial {
        let (q, r) = self.div_rem(a, b);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }
}
