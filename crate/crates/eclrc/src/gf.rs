//! Exact arithmetic in small finite fields GF(p^a).
//!
//! Elements live in a polynomial basis over GF(p) with a fixed monic
//! irreducible modulus, and are indexed by the integer Σ coeffs[i]·p^i.
//! Fields are capped in size (default 2^16) so every search problem here
//! (roots, square roots, units) is solved by exhaustive scan or a
//! precomputed table; nothing is probabilistic.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Default upper bound on the field size q = p^a.
pub const DEFAULT_FIELD_CAP: u64 = 1 << 16;

const NO_ENTRY: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field size {q} exceeds the cap {cap}")]
    FieldTooLarge { q: u128, cap: u64 },
}

struct FieldData {
    p: u64,
    a: u32,
    q: u64,
    /// Monic modulus, coefficients low degree first, length a+1.
    modulus: Vec<u64>,
    /// exp[i] = g^i for a fixed multiplicative generator g, length q-1.
    exp: Vec<u32>,
    /// log[x] with log[exp[i]] = i; log[0] is unused.
    log: Vec<u32>,
    /// sqrt[x^2] = x (the smallest preimage); NO_ENTRY for non-residues.
    sqrt: Vec<u32>,
    /// Characteristic 2 only: artin[z^2 + z] = z (smallest); else empty.
    artin: Vec<u32>,
}

/// Handle to a finite field GF(p^a). Cheap to clone and share.
#[derive(Clone)]
pub struct Field(Arc<FieldData>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.a == other.0.a
                && self.0.modulus == other.0.modulus)
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.0.q)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Splits q into (p, a) if q is a prime power, else None.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    let f = factorize(q);
    if f.len() == 1 {
        Some(f[0])
    } else {
        None
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// ---- dense polynomial arithmetic over GF(p), used only for field setup ----

fn zp_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn zp_rem(num: &[u64], den: &[u64], p: u64) -> Vec<u64> {
    debug_assert_eq!(*den.last().unwrap(), 1, "divisor must be monic");
    let mut r: Vec<u64> = num.to_vec();
    zp_trim(&mut r);
    let dd = den.len() - 1;
    while r.len() > dd {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dd;
        for i in 0..=dd {
            let idx = shift + i;
            r[idx] = (r[idx] + p - lead * den[i] % p) % p;
        }
        zp_trim(&mut r);
    }
    r
}

fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let deg = poly.len() - 1;
    if deg == 1 {
        return true;
    }
    // Trial division by every monic polynomial of degree 1..=deg/2.
    for fdeg in 1..=deg / 2 {
        let count = p.pow(fdeg as u32);
        for k in 0..count {
            let mut g = Vec::with_capacity(fdeg + 1);
            let mut kk = k;
            for _ in 0..fdeg {
                g.push(kk % p);
                kk /= p;
            }
            g.push(1);
            if zp_rem(poly, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible of degree a over GF(p),
/// where candidates are ordered by their low-degree-first coefficient tuple.
fn smallest_irreducible(p: u64, a: u32) -> Vec<u64> {
    let total = p.checked_pow(a).expect("field setup overflow");
    for k in 0..total {
        let mut coeffs = vec![0u64; a as usize + 1];
        for j in 0..a as usize {
            let digit = (k / p.pow(a - 1 - j as u32)) % p;
            coeffs[j] = digit;
        }
        coeffs[a as usize] = 1;
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over GF(p)")
}

impl FieldData {
    fn digits(&self, idx: u32) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.a as usize);
        let mut k = idx as u64;
        for _ in 0..self.a {
            v.push(k % self.p);
            k /= self.p;
        }
        v
    }

    fn from_digits(&self, d: &[u64]) -> u32 {
        let mut idx = 0u64;
        for &c in d.iter().rev() {
            idx = idx * self.p + c % self.p;
        }
        idx as u32
    }

    fn add_raw(&self, x: u32, y: u32) -> u32 {
        if self.p == 2 {
            return x ^ y;
        }
        let (dx, dy) = (self.digits(x), self.digits(y));
        let sum: Vec<u64> = dx.iter().zip(&dy).map(|(a, b)| (a + b) % self.p).collect();
        self.from_digits(&sum)
    }

    fn neg_raw(&self, x: u32) -> u32 {
        if self.p == 2 {
            return x;
        }
        let dx = self.digits(x);
        let neg: Vec<u64> = dx.iter().map(|a| (self.p - a) % self.p).collect();
        self.from_digits(&neg)
    }

    /// Table-free product used while building the exp/log tables.
    fn mul_slow(&self, x: u32, y: u32) -> u32 {
        let (dx, dy) = (self.digits(x), self.digits(y));
        let a = self.a as usize;
        let mut prod = vec![0u64; 2 * a];
        for (i, &ci) in dx.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            for (j, &cj) in dy.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ci * cj) % self.p;
            }
        }
        // Reduce by the monic modulus.
        for i in (a..2 * a).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..a {
                let t = c * self.modulus[j] % self.p;
                prod[i - a + j] = (prod[i - a + j] + self.p - t) % self.p;
            }
        }
        prod.truncate(a);
        self.from_digits(&prod)
    }

    fn pow_slow(&self, x: u32, mut e: u64) -> u32 {
        let mut base = x;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            e >>= 1;
        }
        acc
    }

    fn mul_raw(&self, x: u32, y: u32) -> u32 {
        if x == 0 || y == 0 {
            return 0;
        }
        let n = self.q - 1;
        let i = (self.log[x as usize] as u64 + self.log[y as usize] as u64) % n;
        self.exp[i as usize]
    }

    fn inv_raw(&self, x: u32) -> u32 {
        assert!(x != 0, "division by zero in GF({})", self.q);
        let n = self.q - 1;
        self.exp[((n - self.log[x as usize] as u64) % n) as usize]
    }

    fn pow_raw(&self, x: u32, e: i64) -> u32 {
        if x == 0 {
            return match e {
                0 => 1,
                _ if e > 0 => 0,
                _ => panic!("division by zero in GF({}): 0^{}", self.q, e),
            };
        }
        let n = (self.q - 1) as i64;
        let r = e.rem_euclid(n.max(1)) as u64;
        let i = (self.log[x as usize] as u64 * r) % (self.q - 1);
        self.exp[i as usize]
    }
}

impl Field {
    pub fn new(p: u64, a: u32) -> Result<Field, GfError> {
        Field::with_cap(p, a, DEFAULT_FIELD_CAP)
    }

    /// Builds GF(p^a) with an explicit size cap.
    pub fn with_cap(p: u64, a: u32, cap: u64) -> Result<Field, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        assert!(a >= 1, "extension degree must be positive");
        let q128 = (p as u128).pow(a);
        if q128 > cap as u128 {
            return Err(GfError::FieldTooLarge { q: q128, cap });
        }
        let q = q128 as u64;
        let modulus = smallest_irreducible(p, a);

        let mut data = FieldData {
            p,
            a,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            sqrt: Vec::new(),
            artin: Vec::new(),
        };

        // Find a multiplicative generator, then tabulate discrete logs.
        let n = q - 1;
        let factors = factorize(n.max(1));
        let mut gen = 1u32;
        if n > 1 {
            'outer: for g in 2..q {
                for &(l, _) in &factors {
                    if data.pow_slow(g as u32, n / l) == 1 {
                        continue 'outer;
                    }
                }
                gen = g as u32;
                break;
            }
        }
        let mut exp = vec![0u32; n.max(1) as usize];
        let mut log = vec![NO_ENTRY; q as usize];
        let mut acc = 1u32;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = acc;
            if log[acc as usize] == NO_ENTRY {
                log[acc as usize] = i as u32;
            }
            acc = data.mul_slow(acc, gen);
        }
        data.exp = exp;
        data.log = log;

        let mut sqrt = vec![NO_ENTRY; q as usize];
        for x in 0..q as u32 {
            let s = data.mul_slow(x, x) as usize;
            if sqrt[s] == NO_ENTRY {
                sqrt[s] = x;
            }
        }
        data.sqrt = sqrt;

        if p == 2 {
            let mut artin = vec![NO_ENTRY; q as usize];
            for z in 0..q as u32 {
                let w = (data.mul_slow(z, z) ^ z) as usize;
                if artin[w] == NO_ENTRY {
                    artin[w] = z;
                }
            }
            data.artin = artin;
        }

        Ok(Field(Arc::new(data)))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }
    pub fn a(&self) -> u32 {
        self.0.a
    }
    pub fn q(&self) -> u64 {
        self.0.q
    }
    pub fn characteristic(&self) -> u64 {
        self.0.p
    }

    /// Modulus coefficients, low degree first, length a+1, monic.
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn element(&self, idx: u64) -> FieldElement {
        assert!(idx < self.0.q, "element index {idx} out of range for {self:?}");
        FieldElement { field: self.clone(), idx: idx as u32 }
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// Canonical image of a rational integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElement {
        self.element(n.rem_euclid(self.0.p as i64) as u64)
    }

    /// All q elements in ascending index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.0.q).map(move |i| self.element(i))
    }

    /// All x with x^n = 1, by exhaustive scan; the count is gcd(n, q-1).
    pub fn roots_of_unity(&self, n: u64) -> Vec<FieldElement> {
        assert!(n >= 1);
        (1..self.0.q)
            .filter(|&x| self.0.pow_raw(x as u32, n as i64) == 1)
            .map(|x| self.element(x))
            .collect()
    }

    /// All roots in the field of the polynomial with the given coefficients
    /// (low degree first), by exhaustive evaluation.
    pub fn poly_roots(&self, coeffs: &[FieldElement]) -> Vec<FieldElement> {
        assert!(
            coeffs.iter().any(|c| !c.is_zero()),
            "root finding on the zero polynomial"
        );
        let raw: Vec<u32> = coeffs.iter().map(|c| c.idx).collect();
        let mut out = Vec::new();
        for x in 0..self.0.q as u32 {
            let mut acc = 0u32;
            for &c in raw.iter().rev() {
                acc = self.0.add_raw(self.0.mul_raw(acc, x), c);
            }
            if acc == 0 {
                out.push(self.element(x as u64));
            }
        }
        out
    }

    /// Roots of the monic quadratic y^2 + b*y + c, ascending, via tables.
    pub(crate) fn solve_monic_quadratic(&self, b: u32, c: u32) -> Vec<u32> {
        let d = &self.0;
        let mut roots = if d.p == 2 {
            if b == 0 {
                // Squaring is a bijection in characteristic 2.
                vec![d.sqrt[c as usize]]
            } else {
                let binv = d.inv_raw(b);
                let w = d.mul_raw(c, d.mul_raw(binv, binv));
                let z = d.artin[w as usize];
                if z == NO_ENTRY {
                    Vec::new()
                } else {
                    vec![d.mul_raw(b, z), d.mul_raw(b, z ^ 1)]
                }
            }
        } else {
            // y = (-b ± sqrt(b^2 - 4c)) / 2
            let b2 = d.mul_raw(b, b);
            let four_c = d.mul_raw(d.from_digits(&[4 % d.p]), c);
            let disc = d.add_raw(b2, d.neg_raw(four_c));
            if disc == 0 {
                let half = d.inv_raw(d.from_digits(&[2]));
                vec![d.mul_raw(d.neg_raw(b), half)]
            } else {
                let s = d.sqrt[disc as usize];
                if s == NO_ENTRY {
                    Vec::new()
                } else {
                    let half = d.inv_raw(d.from_digits(&[2]));
                    vec![
                        d.mul_raw(d.add_raw(d.neg_raw(b), s), half),
                        d.mul_raw(d.add_raw(d.neg_raw(b), d.neg_raw(s)), half),
                    ]
                }
            }
        };
        roots.sort_unstable();
        roots.dedup();
        roots
    }

    pub(crate) fn raw_add(&self, x: u32, y: u32) -> u32 {
        self.0.add_raw(x, y)
    }
    pub(crate) fn raw_mul(&self, x: u32, y: u32) -> u32 {
        self.0.mul_raw(x, y)
    }
    #[cfg(test)]
    pub(crate) fn raw_inv(&self, x: u32) -> u32 {
        self.0.inv_raw(x)
    }
}

/// An element of a specific GF(p^a), canonical by its integer index.
#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    idx: u32,
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Integer index Σ coeffs[i]·p^i; a bijection onto 0..q.
    pub fn idx(&self) -> u64 {
        self.idx as u64
    }

    /// Polynomial-basis coefficients over GF(p), low degree first, length a.
    pub fn coeffs(&self) -> Vec<u64> {
        self.field.0.digits(self.idx)
    }

    pub fn is_zero(&self) -> bool {
        self.idx == 0
    }

    pub fn is_one(&self) -> bool {
        self.idx == 1
    }

    pub fn inv(&self) -> FieldElement {
        self.field.element(self.field.0.inv_raw(self.idx) as u64)
    }

    pub fn try_inv(&self) -> Option<FieldElement> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }

    /// x^e; negative exponents invert (panics on 0 with e < 0).
    pub fn pow(&self, e: i64) -> FieldElement {
        self.field.element(self.field.0.pow_raw(self.idx, e) as u64)
    }

    pub fn frobenius(&self) -> FieldElement {
        self.pow(self.field.p() as i64)
    }

    /// Smallest n >= 1 with x^n = 1; panics on zero.
    pub fn multiplicative_order(&self) -> u64 {
        assert!(!self.is_zero(), "order of zero");
        let n = self.field.q() - 1;
        let mut m = n;
        for (l, _) in factorize(n.max(1)) {
            while m % l == 0 && self.field.0.pow_raw(self.idx, (m / l) as i64) == 1 {
                m /= l;
            }
        }
        m.max(1)
    }

    fn assert_same_field(&self, other: &FieldElement) {
        assert!(
            self.field == other.field,
            "field mismatch: GF({}) vs GF({})",
            self.field.q(),
            other.field.q()
        );
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.idx == other.idx && self.field == other.field
    }
}
impl Eq for FieldElement {}

impl std::hash::Hash for FieldElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.field.q().hash(state);
        self.idx.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.field.q(), self.idx)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.idx)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $raw:ident) => {
        impl std::ops::$trait for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.assert_same_field(rhs);
                self.field
                    .element(self.field.0.$raw(self.idx, rhs.idx) as u64)
            }
        }
        impl std::ops::$trait for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
        impl std::ops::$trait<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
        impl std::ops::$trait<FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, add_raw);
binop!(Mul, mul, mul_raw);

impl std::ops::Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.assert_same_field(rhs);
        let d = &self.field.0;
        self.field.element(d.add_raw(self.idx, d.neg_raw(rhs.idx)) as u64)
    }
}
impl std::ops::Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        &self - &rhs
    }
}
impl std::ops::Sub<&FieldElement> for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        &self - rhs
    }
}
impl std::ops::Sub<FieldElement> for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        self - &rhs
    }
}

impl std::ops::Div for &FieldElement {
    type Output = FieldElement;
    fn div(self, rhs: &FieldElement) -> FieldElement {
        self.assert_same_field(rhs);
        let d = &self.field.0;
        self.field.element(d.mul_raw(self.idx, d.inv_raw(rhs.idx)) as u64)
    }
}
impl std::ops::Div for FieldElement {
    type Output = FieldElement;
    fn div(self, rhs: FieldElement) -> FieldElement {
        &self / &rhs
    }
}

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.field.element(self.field.0.neg_raw(self.idx) as u64)
    }
}
impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smallest_moduli_are_deterministic() {
        assert_eq!(Field::new(2, 2).unwrap().modulus(), &[1, 1, 1]); // x^2+x+1
        assert_eq!(Field::new(2, 1).unwrap().modulus(), &[0, 1]); // x
        assert_eq!(Field::new(3, 2).unwrap().modulus(), &[1, 0, 1]); // x^2+1
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(Field::new(4, 1).unwrap_err(), GfError::NotPrime(4));
        assert_eq!(Field::new(1, 1).unwrap_err(), GfError::NotPrime(1));
        assert!(matches!(
            Field::new(2, 17).unwrap_err(),
            GfError::FieldTooLarge { .. }
        ));
        assert!(Field::new(2, 16).is_ok()); // exactly at the cap
    }

    #[test]
    fn gf4_multiplication_table() {
        let f = Field::new(2, 2).unwrap();
        let w = f.element(2); // root of x^2+x+1
        assert_eq!(&w * &w, f.element(3)); // w^2 = w+1
        assert_eq!(w.inv(), f.element(3)); // w * w^2 = w^3 = 1
        assert_eq!(&w * &w.inv(), f.one());
    }

    #[test]
    fn additive_identities() {
        for (p, a) in [(2, 3), (3, 2), (5, 1), (7, 2)] {
            let f = Field::new(p, a).unwrap();
            for x in f.elements() {
                assert_eq!(&x + &f.zero(), x);
                assert_eq!(&x - &x, f.zero());
                if p == 2 {
                    assert_eq!(&x + &x, f.zero());
                }
            }
        }
    }

    #[test]
    fn pow_and_inverse() {
        for (p, a) in [(2, 4), (3, 3), (5, 2), (13, 1)] {
            let f = Field::new(p, a).unwrap();
            assert_eq!(f.one().inv(), f.one());
            let q = f.q();
            for x in f.elements().skip(1) {
                assert_eq!(x.pow(q as i64 - 1), f.one());
                assert_eq!(&x * &x.pow(-1), f.one());
            }
        }
    }

    #[test]
    #[should_panic(expected = "division by zero")]
    fn zero_has_no_inverse() {
        Field::new(2, 2).unwrap().zero().inv();
    }

    #[test]
    #[should_panic(expected = "field mismatch")]
    fn cross_field_ops_panic() {
        let a = Field::new(2, 2).unwrap().one();
        let b = Field::new(3, 1).unwrap().one();
        let _ = a + b;
    }

    #[test]
    fn enumeration_and_index_round_trip() {
        for (p, a) in [(2, 1), (2, 2), (3, 2), (5, 1)] {
            let f = Field::new(p, a).unwrap();
            let all: Vec<_> = f.elements().collect();
            assert_eq!(all.len() as u64, f.q());
            for (i, x) in all.iter().enumerate() {
                assert_eq!(x.idx(), i as u64);
                assert_eq!(f.element(x.idx()), *x);
                // digits round trip
                let c = x.coeffs();
                let back: u64 = c
                    .iter()
                    .enumerate()
                    .map(|(j, d)| d * p.pow(j as u32))
                    .sum();
                assert_eq!(back, x.idx());
            }
        }
    }

    #[test]
    fn roots_of_unity_counts() {
        let f4 = Field::new(2, 2).unwrap();
        let cubes = f4.roots_of_unity(3);
        assert_eq!(
            cubes,
            vec![f4.element(1), f4.element(2), f4.element(3)]
        );
        for (p, a, n) in [(2u64, 2u32, 1u64), (7, 2, 4), (3, 2, 6), (2, 4, 5)] {
            let f = Field::new(p, a).unwrap();
            let roots = f.roots_of_unity(n);
            assert_eq!(roots.len() as u64, gcd(n, f.q() - 1));
        }
        // GF(49), n=4: gcd(4,48) = 4 roots
        assert_eq!(Field::new(7, 2).unwrap().roots_of_unity(4).len(), 4);
        // n = 1 gives exactly {1}
        let f = Field::new(5, 1).unwrap();
        assert_eq!(f.roots_of_unity(1), vec![f.one()]);
    }

    #[test]
    fn poly_root_scans() {
        let f4 = Field::new(2, 2).unwrap();
        // s^4 + s vanishes identically on GF(4)
        let s4s: Vec<_> = [0u64, 1, 0, 0, 1].iter().map(|&c| f4.element(c)).collect();
        assert_eq!(f4.poly_roots(&s4s).len(), 4);
        // roots of x are {0}
        let x: Vec<_> = [f4.zero(), f4.one()].to_vec();
        assert_eq!(f4.poly_roots(&x), vec![f4.zero()]);
        // t^2 + t + 1 has the two primitive cube roots as roots
        let t2t1: Vec<_> = [1u64, 1, 1].iter().map(|&c| f4.element(c)).collect();
        assert_eq!(f4.poly_roots(&t2t1), vec![f4.element(2), f4.element(3)]);
    }

    #[test]
    fn quadratic_solver_matches_scan() {
        for (p, a) in [(2u64, 3u32), (2, 4), (3, 2), (5, 1), (7, 1)] {
            let f = Field::new(p, a).unwrap();
            for b in 0..f.q() as u32 {
                for c in 0..f.q() as u32 {
                    let fast = f.solve_monic_quadratic(b, c);
                    let slow: Vec<u32> = (0..f.q() as u32)
                        .filter(|&y| {
                            let y2 = f.raw_mul(y, y);
                            let by = f.raw_mul(b, y);
                            f.raw_add(f.raw_add(y2, by), c) == 0
                        })
                        .collect();
                    assert_eq!(fast, slow, "p={p} a={a} b={b} c={c}");
                }
            }
        }
    }

    #[test]
    fn field_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (p, a) in [(2u64, 4u32), (3, 3), (7, 2)] {
            let f = Field::new(p, a).unwrap();
            for _ in 0..1000 {
                let x = f.element(rng.gen_range(0..f.q()));
                let y = f.element(rng.gen_range(0..f.q()));
                let z = f.element(rng.gen_range(0..f.q()));
                assert_eq!((&x + &y) + &z, &x + &(&y + &z));
                assert_eq!((&x * &y) * &z, &x * &(&y * &z));
                assert_eq!(&x + &y, &y + &x);
                assert_eq!(&x * &y, &y * &x);
                assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            }
        }
    }

    #[test]
    fn frobenius_is_a_field_homomorphism() {
        for (p, a) in [(2u64, 2u32), (2, 3), (2, 4), (2, 5), (2, 6), (3, 2), (3, 3), (3, 4), (5, 2), (7, 2)] {
            let f = Field::new(p, a).unwrap();
            if f.q() > 81 {
                continue;
            }
            let all: Vec<_> = f.elements().collect();
            for x in &all {
                for y in &all {
                    assert_eq!((x + y).frobenius(), x.frobenius() + y.frobenius());
                    assert_eq!((x * y).frobenius(), x.frobenius() * y.frobenius());
                }
            }
        }
    }

    #[test]
    fn multiplicative_order_divides_group_order() {
        let f = Field::new(2, 4).unwrap();
        for x in f.elements().skip(1) {
            let m = x.multiplicative_order();
            assert_eq!((f.q() - 1) % m, 0);
            assert_eq!(x.pow(m as i64), f.one());
        }
    }
}
