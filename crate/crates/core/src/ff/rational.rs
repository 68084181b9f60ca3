use std::fmt;

use super::{DPolynomial, Fe, Field, FieldOps, Matrix, PolyRing, Ring};

/// Element of GF(2^m)(D), kept reduced with a monic denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DRational {
    num: DPolynomial,
    den: DPolynomial,
}

impl DRational {
    pub fn numerator(&self) -> &DPolynomial {
        &self.num
    }

    pub fn denominator(&self) -> &DPolynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when the denominator is 1.
    pub fn is_polynomial(&self) -> bool {
        self.den == DPolynomial::one()
    }

    pub fn from_poly(p: DPolynomial) -> Self {
        DRational {
            num: p,
            den: DPolynomial::one(),
        }
    }
}

impl fmt::Debug for DRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for DRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// The fraction field GF(2^m)(D).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalField {
    pub polys: PolyRing,
}

impl RationalField {
    pub fn new(field: Field) -> Self {
        RationalField {
            polys: PolyRing::new(field),
        }
    }

    pub fn field(&self) -> &Field {
        &self.polys.field
    }

    /// Builds `num/den` in lowest terms. Panics if `den` is zero.
    pub fn make(&self, num: DPolynomial, den: DPolynomial) -> DRational {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return DRational {
                num,
                den: DPolynomial::one(),
            };
        }
        let g = self.polys.gcd(&num, &den);
        let num = self.polys.div_rem(&num, &g).0;
        let den = self.polys.div_rem(&den, &g).0;
        let lead_inv = self.field().inv(den.leading()).expect("nonzero");
        DRational {
            num: self.polys.scale(&num, lead_inv),
            den: self.polys.scale(&den, lead_inv),
        }
    }

    pub fn constant(&self, c: Fe) -> DRational {
        DRational::from_poly(DPolynomial::constant(c))
    }

    /// Equality by cross-multiplication, independent of normalization.
    pub fn equal(&self, a: &DRational, b: &DRational) -> bool {
        self.polys.mul(&a.num, &b.den) == self.polys.mul(&b.num, &a.den)
    }

    /// Power-series expansion through `D^max_degree`; requires den(0) != 0.
    pub fn series(&self, r: &DRational, max_degree: usize) -> Option<DPolynomial> {
        let f = self.field();
        let d0 = r.den.coeff(0);
        let d0_inv = f.inv(d0)?;
        let mut out = vec![Fe::ZERO; max_degree + 1];
        for k in 0..=max_degree {
            let mut acc = r.num.coeff(k);
            for j in 1..=k.min(r.den.coeffs().len().saturating_sub(1)) {
                acc += f.mul(r.den.coeff(j), out[k - j]);
            }
            out[k] = f.mul(acc, d0_inv);
        }
        Some(DPolynomial::from_coeffs(out))
    }

    /// Determinant by clearing denominators row-wise and running fraction-free elimination
    /// over GF(2^m)[D].
    pub fn det_cleared(&self, m: &Matrix<DRational>) -> DRational {
        assert!(m.is_square());
        let pr = &self.polys;
        let mut scale = DPolynomial::one();
        let mut rows = Vec::with_capacity(m.rows());
        for r in 0..m.rows() {
            let mut l = DPolynomial::one();
            for e in m.row(r) {
                let g = pr.gcd(&l, &e.den);
                l = pr.div_rem(&pr.mul(&l, &e.den), &g).0;
            }
            scale = pr.mul(&scale, &l);
            rows.push(
                m.row(r)
                    .iter()
                    .map(|e| pr.mul(&e.num, &pr.div_rem(&l, &e.den).0))
                    .collect::<Vec<_>>(),
            );
        }
        let pm = Matrix::from_rows(rows);
        let d = if m.rows() == 0 {
            DPolynomial::one()
        } else {
            pm.det_bareiss(pr)
        };
        self.make(d, scale)
    }
}

impl Ring for RationalField {
    type Elem = DRational;

    fn zero(&self) -> DRational {
        DRational::from_poly(DPolynomial::zero())
    }
    fn one(&self) -> DRational {
        DRational::from_poly(DPolynomial::one())
    }
    fn add(&self, a: &DRational, b: &DRational) -> DRational {
        let pr = &self.polys;
        if a.den == b.den {
            return self.make(pr.add(&a.num, &b.num), a.den.clone());
        }
        self.make(
            pr.add(&pr.mul(&a.num, &b.den), &pr.mul(&b.num, &a.den)),
            pr.mul(&a.den, &b.den),
        )
    }
    fn neg(&self, a: &DRational) -> DRational {
        a.clone()
    }
    fn mul(&self, a: &DRational, b: &DRational) -> DRational {
        if a.is_zero() || b.is_zero() {
            return self.zero();
        }
        let pr = &self.polys;
        self.make(pr.mul(&a.num, &b.num), pr.mul(&a.den, &b.den))
    }
    fn is_zero(&self, a: &DRational) -> bool {
        a.is_zero()
    }
}

impl FieldOps for RationalField {
    fn inv(&self, a: &DRational) -> Option<DRational> {
        if a.is_zero() {
            return None;
        }
        Some(self.make(a.den.clone(), a.num.clone()))
    }
}
