//! Exact arithmetic in GF(q) for prime powers `q <= 256`.
//!
//! Elements are identified with codes `0..q`. For a prime field the code is
//! the residue itself. For `GF(p^e)` the code of `c_0 + c_1 x + ... + c_{e-1} x^{e-1}`
//! is `c_0 + c_1 p + ... + c_{e-1} p^{e-1}`, with multiplication reduced modulo
//! the Conway polynomial of `(p, e)`. Fixing the modulus pins element codes, so
//! serialized subspaces mean the same thing everywhere.
//!
//! ```
//! use qlattice::finite_field::make_field;
//!
//! let gf4 = make_field(4).unwrap();
//! let x = gf4.element(2).unwrap();
//! // x is a root of x^2 + x + 1, so x^2 = x + 1.
//! assert_eq!(gf4.mul(x, x), gf4.add(x, gf4.one()));
//! ```

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Conway polynomials, coefficients from the constant term up (monic).
const CONWAY: &[(u32, u32, &[u8])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 1, 1, 0, 1]),
    (2, 7, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (2, 8, &[1, 0, 1, 1, 1, 0, 0, 0, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 0, 0, 2, 1]),
    (3, 5, &[1, 2, 0, 0, 0, 1]),
    (5, 2, &[2, 4, 1]),
    (5, 3, &[3, 3, 0, 1]),
    (7, 2, &[3, 6, 1]),
    (11, 2, &[2, 7, 1]),
    (13, 2, &[2, 12, 1]),
];

/// An element of a finite field, by code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(u8);

impl FieldElement {
    pub fn code(self) -> u8 {
        self.0
    }

    pub(crate) fn from_raw(code: u8) -> Self {
        FieldElement(code)
    }
}

struct Tables {
    q: u32,
    p: u32,
    e: u32,
    modulus: Option<Vec<u8>>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

/// GF(q) with precomputed operation tables. Cloning is cheap; the tables are
/// shared and immutable.
#[derive(Clone)]
pub struct FieldSpec {
    tables: Arc<Tables>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.tables.q)
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.tables.q == other.tables.q
    }
}

impl Eq for FieldSpec {}

impl std::hash::Hash for FieldSpec {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.tables.q.hash(state)
    }
}

/// Splits `q` as `p^e`, or reports why it cannot be a supported field order.
pub fn prime_power(q: u32) -> Result<(u32, u32)> {
    if q < 2 {
        return Err(Error::NotAPrimePower(q));
    }
    let mut p = 2;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut rest = q;
    let mut e = 0;
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    if rest != 1 {
        return Err(Error::NotAPrimePower(q));
    }
    Ok((p, e))
}

/// Builds GF(q).
pub fn make_field(q: u32) -> Result<FieldSpec> {
    let (p, e) = prime_power(q)?;
    if q > 256 {
        return Err(Error::TooLarge(q));
    }
    let qs = q as usize;
    let modulus = if e == 1 {
        None
    } else {
        let m = CONWAY
            .iter()
            .find(|(cp, ce, _)| *cp == p && *ce == e)
            .map(|(_, _, m)| m.to_vec())
            .expect("every prime power up to 256 has a Conway polynomial in the table");
        Some(m)
    };

    let digits = |code: usize| -> Vec<u32> {
        let mut c = code as u32;
        (0..e)
            .map(|_| {
                let d = c % p;
                c /= p;
                d
            })
            .collect()
    };
    let undigits = |ds: &[u32]| -> u8 {
        ds.iter().rev().fold(0u32, |acc, &d| acc * p + d) as u8
    };

    let mut add = vec![0u8; qs * qs];
    let mut mul = vec![0u8; qs * qs];
    for a in 0..qs {
        let da = digits(a);
        for b in 0..qs {
            let db = digits(b);
            let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
            add[a * qs + b] = undigits(&sum);
            mul[a * qs + b] = match &modulus {
                None => ((a * b) % qs) as u8,
                Some(m) => undigits(&poly_mul_mod(&da, &db, m, p)),
            };
        }
    }
    let mut neg = vec![0u8; qs];
    let mut inv = vec![0u8; qs];
    for a in 0..qs {
        neg[a] = (0..qs).find(|&b| add[a * qs + b] == 0).unwrap() as u8;
        if a != 0 {
            inv[a] = (1..qs).find(|&b| mul[a * qs + b] == 1).unwrap() as u8;
        }
    }
    Ok(FieldSpec {
        tables: Arc::new(Tables {
            q,
            p,
            e,
            modulus,
            add,
            mul,
            neg,
            inv,
        }),
    })
}

fn poly_mul_mod(a: &[u32], b: &[u32], modulus: &[u8], p: u32) -> Vec<u32> {
    let e = a.len();
    let mut prod = vec![0u32; 2 * e - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // x^e = -(m_0 + ... + m_{e-1} x^{e-1})
    for deg in (e..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (i, &m) in modulus[..e].iter().enumerate() {
            let idx = deg - e + i;
            prod[idx] = (prod[idx] + c * (p - m as u32 % p)) % p;
        }
    }
    prod.truncate(e);
    prod
}

impl FieldSpec {
    pub fn q(&self) -> u32 {
        self.tables.q
    }

    pub fn characteristic(&self) -> u32 {
        self.tables.p
    }

    pub fn degree(&self) -> u32 {
        self.tables.e
    }

    /// The reduction polynomial for extension fields, constant term first.
    pub fn modulus(&self) -> Option<&[u8]> {
        self.tables.modulus.as_deref()
    }

    pub fn element(&self, code: u32) -> Result<FieldElement> {
        if code >= self.tables.q {
            return Err(Error::ElementOutOfRange {
                code,
                q: self.tables.q,
            });
        }
        Ok(FieldElement(code as u8))
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(1)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.tables.q).map(|c| FieldElement(c as u8))
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.add_code(a.0, b.0))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.add_code(a.0, self.neg_code(b.0)))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.mul_code(a.0, b.0))
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg_code(a.0))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(FieldElement(self.inv_code(a.0)))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: FieldElement) -> Result<u32> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let mut x = a.0;
        let mut k = 1;
        while x != 1 {
            x = self.mul_code(x, a.0);
            k += 1;
        }
        Ok(k)
    }

    #[inline]
    pub(crate) fn add_code(&self, a: u8, b: u8) -> u8 {
        self.tables.add[a as usize * self.tables.q as usize + b as usize]
    }

    #[inline]
    pub(crate) fn mul_code(&self, a: u8, b: u8) -> u8 {
        self.tables.mul[a as usize * self.tables.q as usize + b as usize]
    }

    #[inline]
    pub(crate) fn neg_code(&self, a: u8) -> u8 {
        self.tables.neg[a as usize]
    }

    #[inline]
    pub(crate) fn inv_code(&self, a: u8) -> u8 {
        self.tables.inv[a as usize]
    }
}
