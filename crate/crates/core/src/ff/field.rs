//! GF(2^m) arithmetic backed by log/antilog tables.

use std::fmt;
use std::ops::{Add, AddAssign};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Fixed irreducible (and primitive) reduction polynomials, indexed by `m`.
const DEFAULT_POLYS: [u32; 17] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

/// An element of GF(2^m), stored as its polynomial-basis bit pattern.
///
/// Addition is XOR and needs no field context; multiplication goes through a [`Field`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(pub u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

// Characteristic two: addition is XOR.
impl Add for Fe {
    type Output = Fe;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Fe) -> Fe {
        Fe(self.0 ^ rhs.0)
    }
}

impl AddAssign for Fe {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Fe) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug)]
struct Tables {
    m: u32,
    poly: u32,
    /// exp[i] = g^i for i in 0..2*(q-1), doubled so products skip a modulo.
    exp: Vec<u16>,
    /// log[x] for x != 0; log[0] is unused.
    log: Vec<u16>,
}

/// Handle to GF(2^m) with a fixed reduction polynomial. Cheap to clone.
#[derive(Clone)]
pub struct Field {
    tables: Arc<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}; {:#x})", self.tables.m, self.tables.poly)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.tables.m == other.tables.m && self.tables.poly == other.tables.poly
    }
}

impl Eq for Field {}

/// Carry-less multiply of two field-sized operands reduced modulo `poly`.
fn clmul_mod(mut a: u32, mut b: u32, m: u32, poly: u32) -> u32 {
    let mut acc = 0u32;
    let top = 1u32 << m;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= poly;
        }
    }
    acc
}

fn poly_degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

/// Remainder of GF(2)[x] division.
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

/// Exhaustive factor check: no polynomial of degree 1..=deg/2 divides `p`.
pub fn is_irreducible_gf2(p: u32) -> bool {
    let d = poly_degree(p);
    if d < 1 {
        return false;
    }
    if d == 1 {
        return true;
    }
    for cand in 2u32..(1u32 << (d / 2 + 1)) {
        if poly_degree(cand) >= 1 && poly_degree(cand) <= d / 2 && poly_rem(p, cand) == 0 {
            return false;
        }
    }
    true
}

impl Field {
    /// GF(2^m) with the canonical reduction polynomial for `m`.
    pub fn new(m: u32) -> Result<Field> {
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::Usage(format!(
                "extension degree must be in 1..={MAX_DEGREE}, got {m}"
            )));
        }
        Field::with_polynomial(m, DEFAULT_POLYS[m as usize])
    }

    /// GF(q) for `q` a power of two between 2 and 2^16.
    pub fn with_order(q: u32) -> Result<Field> {
        if q < 2 || !q.is_power_of_two() || q > (1 << MAX_DEGREE) {
            return Err(Error::Usage(format!(
                "field order must be a power of two in 2..=65536, got {q}"
            )));
        }
        Field::new(q.trailing_zeros())
    }

    /// GF(2^m) with a user-supplied reduction polynomial (bitmask, bit m set).
    pub fn with_polynomial(m: u32, poly: u32) -> Result<Field> {
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::Usage(format!(
                "extension degree must be in 1..={MAX_DEGREE}, got {m}"
            )));
        }
        if poly_degree(poly) != m as i32 {
            return Err(Error::Usage(format!(
                "reduction polynomial {poly:#x} does not have degree {m}"
            )));
        }
        if !is_irreducible_gf2(poly) {
            return Err(Error::Usage(format!(
                "reduction polynomial {poly:#x} is reducible over GF(2)"
            )));
        }
        let q = 1usize << m;
        let order = q - 1;
        // The reduction polynomial need not be primitive, so search for a generator.
        let generator = (2..q.max(3) as u32)
            .find(|&g| {
                let mut x = 1u32;
                for i in 1..=order {
                    x = clmul_mod(x, g, m, poly);
                    if x == 1 {
                        return i == order;
                    }
                }
                false
            })
            .unwrap_or(1);
        let mut exp = vec![0u16; 2 * order.max(1)];
        let mut log = vec![0u16; q];
        let mut x = 1u32;
        for i in 0..order {
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x = clmul_mod(x, generator, m, poly);
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Field {
            tables: Arc::new(Tables { m, poly, exp, log }),
        })
    }

    pub fn degree(&self) -> u32 {
        self.tables.m
    }

    pub fn polynomial(&self) -> u32 {
        self.tables.poly
    }

    /// Field order q = 2^m.
    pub fn order(&self) -> u32 {
        1u32 << self.tables.m
    }

    /// Checked element construction.
    pub fn element(&self, value: u32) -> Result<Fe> {
        if value >= self.order() {
            return Err(Error::Usage(format!(
                "value {value} is not an element of GF({})",
                self.order()
            )));
        }
        Ok(Fe(value as u16))
    }

    pub fn contains(&self, a: Fe) -> bool {
        (a.0 as u32) < self.order()
    }

    /// All field elements in increasing bit-pattern order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.order()).map(|v| Fe(v as u16))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let t = &self.tables;
        Fe(t.exp[t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize])
    }

    /// Multiplication that rejects operands from outside this field.
    pub fn try_mul(&self, a: Fe, b: Fe) -> Result<Fe> {
        if !self.contains(a) || !self.contains(b) {
            return Err(Error::Usage(format!(
                "operand outside GF({}): {} * {}",
                self.order(),
                a,
                b
            )));
        }
        Ok(self.mul(a, b))
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.0 == 0 {
            return None;
        }
        let t = &self.tables;
        let order = (self.order() - 1) as usize;
        let l = t.log[a.0 as usize] as usize;
        Some(Fe(t.exp[(order - l) % order]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Option<Fe> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.0 == 0 {
            return Fe::ZERO;
        }
        let t = &self.tables;
        let order = (self.order() - 1) as u64;
        let l = t.log[a.0 as usize] as u64;
        Fe(t.exp[((l * (e % order)) % order) as usize])
    }

    /// Reference product by shift-and-add, independent of the tables.
    pub fn mul_slow(&self, a: Fe, b: Fe) -> Fe {
        Fe(clmul_mod(a.0 as u32, b.0 as u32, self.tables.m, self.tables.poly) as u16)
    }
}
