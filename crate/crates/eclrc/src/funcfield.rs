//! Rational functions on an elliptic curve and their local behaviour.
//!
//! Every function is held in the canonical form (u(x) + v(x) y) / d(x)
//! with gcd(u, v, d) = 1 and d monic; the curve relation
//! y^2 = f(x) - g(x) y (with f = x^3 + a2 x^2 + a4 x + a6 and
//! g = a1 x + a3) eliminates higher powers of y during multiplication.
//!
//! Local questions (values at zeros of the denominator, valuations,
//! Riemann-Roch constraints) are answered through truncated Laurent
//! expansions in a canonical uniformizer, obtained by Newton iteration on
//! the curve equation in the formal power-series ring.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::autgroup::{CurveAut, StabAut};
use crate::curve::{Curve, Point};
use crate::gf::{Field, FieldElement};
use crate::linalg;
use crate::poly::Poly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FuncFieldError {
    #[error(
        "zeros or poles at non-rational places (degree over rational places is {rational_degree}, not 0)"
    )]
    NonRationalSupport { rational_degree: i64 },
}

/// Result of evaluating a function at a rational place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Finite(FieldElement),
    Pole,
}

impl Value {
    pub fn finite(self) -> Option<FieldElement> {
        match self {
            Value::Finite(c) => Some(c),
            Value::Pole => None,
        }
    }

    pub fn unwrap_finite(self) -> FieldElement {
        self.finite().expect("evaluated at a pole")
    }

    pub fn is_pole(&self) -> bool {
        matches!(self, Value::Pole)
    }
}

// ---------------------------------------------------------------- series

/// Truncated Laurent series: sum of coeffs[i] t^(lead+i) + O(t^prec).
/// A series that is zero to its precision has empty coeffs and lead =
/// prec; otherwise coeffs[0] != 0.
#[derive(Clone, Debug)]
struct Ser {
    field: Field,
    lead: i64,
    coeffs: Vec<FieldElement>,
    prec: i64,
}

impl Ser {
    fn zero_to(field: &Field, prec: i64) -> Ser {
        Ser { field: field.clone(), lead: prec, coeffs: Vec::new(), prec }
    }

    fn constant(c: &FieldElement, prec: i64) -> Ser {
        let field = c.field().clone();
        if c.is_zero() || prec <= 0 {
            return Ser::zero_to(&field, prec);
        }
        let mut coeffs = vec![field.zero(); prec as usize];
        coeffs[0] = c.clone();
        Ser { field, lead: 0, coeffs, prec }
    }

    /// t itself.
    fn uniformizer(field: &Field, prec: i64) -> Ser {
        if prec <= 1 {
            return Ser::zero_to(field, prec);
        }
        let mut coeffs = vec![field.zero(); (prec - 1) as usize];
        coeffs[0] = field.one();
        Ser { field: field.clone(), lead: 1, coeffs, prec }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn val(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.lead)
        }
    }

    fn normalized(mut self) -> Ser {
        let mut drop = 0;
        while drop < self.coeffs.len() && self.coeffs[drop].is_zero() {
            drop += 1;
        }
        if drop == self.coeffs.len() {
            return Ser::zero_to(&self.field, self.prec);
        }
        self.coeffs.drain(..drop);
        self.lead += drop as i64;
        self
    }

    /// Coefficient of t^e; e must be below the precision horizon.
    fn coeff(&self, e: i64) -> FieldElement {
        debug_assert!(e < self.prec, "coefficient beyond precision");
        if e < self.lead || e - self.lead >= self.coeffs.len() as i64 {
            self.field.zero()
        } else {
            self.coeffs[(e - self.lead) as usize].clone()
        }
    }

    fn add(&self, other: &Ser) -> Ser {
        let prec = self.prec.min(other.prec);
        if self.is_zero() {
            return other.truncated(prec);
        }
        if other.is_zero() {
            return self.truncated(prec);
        }
        let lead = self.lead.min(other.lead);
        if lead >= prec {
            return Ser::zero_to(&self.field, prec);
        }
        let coeffs = (lead..prec).map(|e| self.coeff(e) + other.coeff(e)).collect();
        Ser { field: self.field.clone(), lead, coeffs, prec }.normalized()
    }

    fn neg(&self) -> Ser {
        Ser {
            field: self.field.clone(),
            lead: self.lead,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            prec: self.prec,
        }
    }

    fn sub(&self, other: &Ser) -> Ser {
        self.add(&other.neg())
    }

    fn mul(&self, other: &Ser) -> Ser {
        if self.is_zero() {
            return Ser::zero_to(&self.field, self.prec + other.val().unwrap_or(other.prec).min(0).max(other.val().unwrap_or(0)));
        }
        if self.is_zero() || other.is_zero() {
            // O(t^p1) * (lead l2 series) = O(t^(p1 + l2)).
            let (zp, nl) = if self.is_zero() {
                (self.prec, other.lead)
            } else {
                (other.prec, self.lead)
            };
            return Ser::zero_to(&self.field, zp + nl);
        }
        let lead = self.lead + other.lead;
        let prec = (self.lead + other.prec).min(other.lead + self.prec);
        let n = (prec - lead).max(0) as usize;
        let mut coeffs = vec![self.field.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= n {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if !b.is_zero() {
                    coeffs[i + j] = &coeffs[i + j] + &(a * b);
                }
            }
        }
        Ser { field: self.field.clone(), lead, coeffs, prec }.normalized()
    }

    fn scale(&self, c: &FieldElement) -> Ser {
        if c.is_zero() {
            return Ser::zero_to(&self.field, self.prec);
        }
        Ser {
            field: self.field.clone(),
            lead: self.lead,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            prec: self.prec,
        }
    }

    /// Multiplicative inverse of a nonzero series; the relative precision
    /// is preserved.
    fn inv(&self) -> Ser {
        assert!(!self.is_zero(), "inverting a zero series");
        let rel = (self.prec - self.lead) as usize;
        let u0_inv = self.coeffs[0].inv();
        let mut out = vec![self.field.zero(); rel];
        out[0] = u0_inv.clone();
        for k in 1..rel {
            // coefficient k of unit * out must vanish
            let mut acc = self.field.zero();
            for i in 1..=k {
                let a = if i < self.coeffs.len() {
                    self.coeffs[i].clone()
                } else {
                    self.field.zero()
                };
                acc = &acc + &(&a * &out[k - i]);
            }
            out[k] = -&(&acc * &u0_inv);
        }
        Ser {
            field: self.field.clone(),
            lead: -self.lead,
            coeffs: out,
            prec: -self.lead + rel as i64,
        }
        .normalized()
    }

    fn truncated(&self, prec: i64) -> Ser {
        if prec >= self.prec {
            return self.clone();
        }
        if self.is_zero() || self.lead >= prec {
            return Ser::zero_to(&self.field, prec);
        }
        let keep = (prec - self.lead) as usize;
        Ser {
            field: self.field.clone(),
            lead: self.lead,
            coeffs: self.coeffs[..keep.min(self.coeffs.len())].to_vec(),
            prec,
        }
    }
}

/// Horner evaluation of a polynomial at a series.
fn poly_at_ser(p: &Poly, x: &Ser, prec: i64) -> Ser {
    let field = p.field();
    let mut acc = Ser::zero_to(field, prec + x.val().unwrap_or(0).abs() * (p.coeffs().len() as i64 + 1));
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(x).add(&Ser::constant(c, prec));
    }
    acc
}

/// Newton iteration for a simple root of sum coeffs[i] Y^i, starting from
/// y0 where the derivative is a unit.
fn newton_root(coeffs: &[Ser], y0: Ser, prec: i64) -> Ser {
    let field = y0.field.clone();
    let field = &field;
    let eval = |y: &Ser| -> Ser {
        let mut acc = Ser::zero_to(field, prec);
        for c in coeffs.iter().rev() {
            acc = acc.mul(y).add(c);
        }
        acc
    };
    let deriv: Vec<Ser> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.scale(&field.from_int(i as i64)))
        .collect();
    let eval_deriv = |y: &Ser| -> Ser {
        let mut acc = Ser::zero_to(field, prec);
        for c in deriv.iter().rev() {
            acc = acc.mul(y).add(c);
        }
        acc
    };
    let cap = 4 * prec.max(1);
    let mut y = y0;
    for _ in 0..cap {
        let r = eval(&y);
        if r.is_zero() {
            return y;
        }
        let d = eval_deriv(&y);
        y = y.sub(&r.mul(&d.inv())).truncated(prec);
    }
    panic!("precision cap exceeded in series expansion (representation bug)");
}

/// Laurent expansions of the coordinate functions x and y at P, in the
/// canonical uniformizer of P, to absolute precision `prec`.
fn expand_xy(curve: &Curve, p: &Point, prec: i64) -> (Ser, Ser) {
    let field = curve.field();
    let t = Ser::uniformizer(field, prec);
    match p {
        Point::Infinity => {
            // Parametrize by t = x/y and w = 1/y:
            // w + a1 t w + a3 w^2 = t^3 + a2 t^2 w + a4 t w^2 + a6 w^3.
            let t2 = t.mul(&t);
            let t3 = t2.mul(&t);
            let c0 = t3.neg();
            let c1 = Ser::constant(&field.one(), prec)
                .add(&t.scale(curve.a1()))
                .sub(&t2.scale(curve.a2()));
            let c2 = Ser::constant(curve.a3(), prec).sub(&t.scale(curve.a4()));
            let c3 = Ser::constant(&(-curve.a6()), prec);
            let w = newton_root(&[c0, c1, c2, c3], Ser::zero_to(field, prec), prec);
            let y = w.inv();
            let x = t.mul(&y);
            (x, y)
        }
        Point::Affine(x0, y0) => {
            let fy = &(&(&field.from_int(2) * y0) + &(curve.a1() * x0)) + curve.a3();
            if !fy.is_zero() {
                // t = x - x0; solve the quadratic in y.
                let x = t.add(&Ser::constant(x0, prec));
                // y^2 + (a1 x + a3) y - (x^3 + a2 x^2 + a4 x + a6) = 0
                let a = poly_at_ser(&g_poly(curve), &x, prec);
                let c = poly_at_ser(&f_poly(curve), &x, prec).neg();
                let one = Ser::constant(&field.one(), prec);
                let y = newton_root(&[c, a, one], Ser::constant(y0, prec), prec);
                (x, y)
            } else {
                // t = y - y0; solve the cubic in x.
                let y = t.add(&Ser::constant(y0, prec));
                // x^3 + a2 x^2 + (a4 - a1 y) x + (a6 - y^2 - a3 y) = 0
                let c0 = Ser::constant(curve.a6(), prec)
                    .sub(&y.mul(&y))
                    .sub(&y.scale(curve.a3()));
                let c1 = Ser::constant(curve.a4(), prec).sub(&y.scale(curve.a1()));
                let c2 = Ser::constant(curve.a2(), prec);
                let c3 = Ser::constant(&field.one(), prec);
                let x = newton_root(&[c0, c1, c2, c3], Ser::constant(x0, prec), prec);
                (x, y)
            }
        }
    }
}

fn f_poly(curve: &Curve) -> Poly {
    let field = curve.field();
    Poly::from_coeffs(
        field,
        vec![
            curve.a6().clone(),
            curve.a4().clone(),
            curve.a2().clone(),
            field.one(),
        ],
    )
}

fn g_poly(curve: &Curve) -> Poly {
    let field = curve.field();
    Poly::from_coeffs(field, vec![curve.a3().clone(), curve.a1().clone()])
}

// ------------------------------------------------------------- functions

/// A rational function (u(x) + v(x) y) / d(x) on a curve, in canonical
/// form.
#[derive(Clone)]
pub struct FuncElem {
    curve: Curve,
    u: Poly,
    v: Poly,
    d: Poly,
}

impl PartialEq for FuncElem {
    fn eq(&self, other: &Self) -> bool {
        self.curve == other.curve && self.u == other.u && self.v == other.v && self.d == other.d
    }
}
impl Eq for FuncElem {}

impl fmt::Debug for FuncElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({}) + ({})*y)/({})", self.u, self.v, self.d)
    }
}

impl fmt::Display for FuncElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FuncElem {
    pub fn zero(curve: &Curve) -> FuncElem {
        FuncElem {
            curve: curve.clone(),
            u: Poly::zero(curve.field()),
            v: Poly::zero(curve.field()),
            d: Poly::one(curve.field()),
        }
    }

    pub fn one(curve: &Curve) -> FuncElem {
        FuncElem::constant(curve, curve.field().one())
    }

    pub fn constant(curve: &Curve, c: FieldElement) -> FuncElem {
        FuncElem::from_parts(
            curve,
            Poly::constant(c),
            Poly::zero(curve.field()),
            Poly::one(curve.field()),
        )
    }

    /// The coordinate function x.
    pub fn x_fn(curve: &Curve) -> FuncElem {
        FuncElem::from_parts(
            curve,
            Poly::x(curve.field()),
            Poly::zero(curve.field()),
            Poly::one(curve.field()),
        )
    }

    /// The coordinate function y.
    pub fn y_fn(curve: &Curve) -> FuncElem {
        FuncElem::from_parts(
            curve,
            Poly::zero(curve.field()),
            Poly::one(curve.field()),
            Poly::one(curve.field()),
        )
    }

    /// Builds (u + v y)/d and normalizes: common factors removed, d monic.
    pub fn from_parts(curve: &Curve, u: Poly, v: Poly, d: Poly) -> FuncElem {
        assert!(!d.is_zero(), "zero denominator");
        let g = u.gcd(&v).gcd(&d);
        let (mut u, mut v, mut d) = if g.degree().unwrap_or(0) > 0 {
            (u.divmod(&g).0, v.divmod(&g).0, d.divmod(&g).0)
        } else {
            (u, v, d)
        };
        let lc_inv = d.leading().inv();
        u = u.scale(&lc_inv);
        v = v.scale(&lc_inv);
        d = d.scale(&lc_inv);
        FuncElem { curve: curve.clone(), u, v, d }
    }

    pub fn from_indices(curve: &Curve, u: &[u64], v: &[u64], d: &[u64]) -> FuncElem {
        let f = curve.field();
        FuncElem::from_parts(
            curve,
            Poly::from_indices(f, u),
            Poly::from_indices(f, v),
            Poly::from_indices(f, d),
        )
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    /// Canonical parts (u, v, d).
    pub fn parts(&self) -> (&Poly, &Poly, &Poly) {
        (&self.u, &self.v, &self.d)
    }

    /// Coefficient indices of (u, v, d), for serialization.
    pub fn part_indices(&self) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
        let idx = |p: &Poly| p.coeffs().iter().map(FieldElement::idx).collect();
        (idx(&self.u), idx(&self.v), idx(&self.d))
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    /// Some(c) when the function is the constant c.
    pub fn as_constant(&self) -> Option<FieldElement> {
        if self.v.is_zero() && self.d.degree() == Some(0) && self.u.degree().unwrap_or(0) == 0 {
            Some(&self.u.coeff(0) / &self.d.coeff(0))
        } else {
            None
        }
    }

    pub fn inv(&self) -> FuncElem {
        assert!(!self.is_zero(), "inverting the zero function");
        // 1/((u + v y)/d) = d (u - v g - v y) / (u^2 - u v g - v^2 f)
        let g = g_poly(&self.curve);
        let f = f_poly(&self.curve);
        let conj_u = &self.u - &(&self.v * &g);
        let conj_v = -&self.v;
        let norm = &(&(&self.u * &self.u) - &(&(&self.u * &self.v) * &g))
            - &(&(&self.v * &self.v) * &f);
        debug_assert!(!norm.is_zero(), "norm of a nonzero function vanished");
        FuncElem::from_parts(
            &self.curve,
            &self.d * &conj_u,
            &self.d * &conj_v,
            norm,
        )
    }

    pub fn pow(&self, e: i64) -> FuncElem {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut acc = FuncElem::one(&self.curve);
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    /// Value at a rational place; total (a pole reports Value::Pole).
    pub fn evaluate(&self, p: &Point) -> Value {
        if self.is_zero() {
            return Value::Finite(self.curve.field().zero());
        }
        match p {
            Point::Infinity => {
                let du = self.u.degree().map(|d| 2 * d as i64);
                let dv = self.v.degree().map(|d| 3 + 2 * d as i64);
                let pn = du.max(dv).expect("nonzero function");
                let v = 2 * self.d.degree().unwrap_or(0) as i64 - pn;
                match v.cmp(&0) {
                    std::cmp::Ordering::Less => Value::Pole,
                    std::cmp::Ordering::Greater => Value::Finite(self.curve.field().zero()),
                    std::cmp::Ordering::Equal => {
                        // Even pole order at O always comes from the u part.
                        Value::Finite(&self.u.leading() / &self.d.leading())
                    }
                }
            }
            Point::Affine(x0, y0) => {
                let den = self.d.eval(x0);
                if !den.is_zero() {
                    let num = &self.u.eval(x0) + &(&self.v.eval(x0) * y0);
                    return Value::Finite(&num / &den);
                }
                let s = self.expand(p, 1);
                match s.valuation() {
                    Some(v) if v < 0 => Value::Pole,
                    Some(0) => Value::Finite(s.coeff(0)),
                    _ => Value::Finite(self.curve.field().zero()),
                }
            }
        }
    }

    /// Bound on |v_P(f)| at any single place, from the degrees of the
    /// parts.
    fn valuation_bound(&self) -> i64 {
        let du = self.u.degree().map(|d| 2 * d as i64).unwrap_or(0);
        let dv = self.v.degree().map(|d| 3 + 2 * d as i64).unwrap_or(0);
        du.max(dv) + 2 * self.d.degree().unwrap_or(0) as i64 + 3
    }

    /// The normalized discrete valuation v_P(f); panics on the zero
    /// function.
    pub fn valuation(&self, p: &Point) -> i64 {
        assert!(!self.is_zero(), "valuation of the zero function");
        match p {
            Point::Infinity => {
                let du = self.u.degree().map(|d| 2 * d as i64);
                let dv = self.v.degree().map(|d| 3 + 2 * d as i64);
                let pn = du.max(dv).expect("nonzero function");
                2 * self.d.degree().unwrap_or(0) as i64 - pn
            }
            Point::Affine(x0, y0) => {
                // Fast path: no zero or pole here.
                let den = self.d.eval(x0);
                if !den.is_zero() {
                    let num = &self.u.eval(x0) + &(&self.v.eval(x0) * y0);
                    if !num.is_zero() {
                        return 0;
                    }
                }
                for prec in [4, 32, self.valuation_bound() + 1] {
                    if let Some(v) = self.expand(p, prec).valuation() {
                        return v;
                    }
                }
                panic!("precision exceeded the valuation bound")
            }
        }
    }

    /// Laurent expansion in the canonical uniformizer of P with
    /// coefficients valid below t^prec.
    pub fn expand(&self, p: &Point, prec: i64) -> LocalSeries {
        let ser = self.expand_raw(p, prec);
        LocalSeries {
            place: p.clone(),
            lead: if ser.is_zero() { ser.prec } else { ser.lead },
            coeffs: ser.coeffs.clone(),
            prec: ser.prec,
        }
    }

    /// Expansion with escalating working precision: leads are usually
    /// tiny, so start cheap and only pay the full valuation bound when a
    /// deep zero keeps the leading terms unresolved.
    fn expand_raw(&self, p: &Point, prec: i64) -> Ser {
        let field = self.curve.field();
        if self.is_zero() {
            return Ser::zero_to(field, prec);
        }
        let cap = prec + self.valuation_bound() + 4;
        let mut work = (prec + 16).min(cap);
        loop {
            let (x, y) = expand_xy(&self.curve, p, work);
            let num =
                poly_at_ser(&self.u, &x, work).add(&poly_at_ser(&self.v, &x, work).mul(&y));
            let den = poly_at_ser(&self.d, &x, work);
            if !num.is_zero() && !den.is_zero() {
                let out = num.mul(&den.inv());
                if out.prec >= prec {
                    return out.truncated(prec);
                }
            }
            assert!(
                work < cap,
                "series vanished below the valuation bound (representation bug)"
            );
            work = (work * 2).min(cap);
        }
    }

    /// Principal divisor over the rational places; errors if any zero or
    /// pole lives at a non-rational place.
    pub fn principal_divisor(&self) -> Result<Divisor, FuncFieldError> {
        assert!(!self.is_zero(), "divisor of the zero function");
        let mut div = Divisor::new(&self.curve);
        for p in self.curve.points() {
            let candidate = match p {
                Point::Infinity => true,
                Point::Affine(x0, y0) => {
                    self.d.eval(x0).is_zero()
                        || (&self.u.eval(x0) + &(&self.v.eval(x0) * y0)).is_zero()
                }
            };
            if !candidate {
                continue;
            }
            let v = self.valuation(p);
            if v != 0 {
                div.set(p, v);
            }
        }
        if div.degree() != 0 {
            return Err(FuncFieldError::NonRationalSupport {
                rational_degree: div.degree(),
            });
        }
        Ok(div)
    }

    /// Membership certificate for L(D): v_P(f) >= -D(P) at every rational
    /// place. Only pole candidates (O and zeros of the denominator) and
    /// the support of D need to be inspected; zeros elsewhere, rational or
    /// not, cannot violate the bound.
    pub fn in_riemann_roch_space(&self, d: &Divisor) -> bool {
        if self.is_zero() {
            return true;
        }
        let mut places: Vec<Point> = vec![Point::Infinity];
        for p in self.curve.points() {
            if let Point::Affine(x0, _) = p {
                if self.d.eval(x0).is_zero() {
                    places.push(p.clone());
                }
            }
        }
        places.extend(d.support());
        places.iter().all(|p| self.valuation(p) >= -d.coeff(p))
    }
}

macro_rules! func_binop {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait for FuncElem {
            type Output = FuncElem;
            fn $method(self, rhs: FuncElem) -> FuncElem {
                (&self).$method(&rhs)
            }
        }
    };
}

impl std::ops::Add for &FuncElem {
    type Output = FuncElem;
    fn add(self, rhs: &FuncElem) -> FuncElem {
        assert!(self.curve == rhs.curve, "functions on different curves");
        let u = &(&self.u * &rhs.d) + &(&rhs.u * &self.d);
        let v = &(&self.v * &rhs.d) + &(&rhs.v * &self.d);
        FuncElem::from_parts(&self.curve, u, v, &self.d * &rhs.d)
    }
}
impl std::ops::Sub for &FuncElem {
    type Output = FuncElem;
    fn sub(self, rhs: &FuncElem) -> FuncElem {
        self + &(-rhs)
    }
}
impl std::ops::Mul for &FuncElem {
    type Output = FuncElem;
    fn mul(self, rhs: &FuncElem) -> FuncElem {
        assert!(self.curve == rhs.curve, "functions on different curves");
        // (u1 + v1 y)(u2 + v2 y) with y^2 = f - g y.
        let f = f_poly(&self.curve);
        let g = g_poly(&self.curve);
        let uu = &self.u * &rhs.u;
        let vv = &self.v * &rhs.v;
        let cross = &(&self.u * &rhs.v) + &(&self.v * &rhs.u);
        let u = &uu + &(&vv * &f);
        let v = &cross - &(&vv * &g);
        FuncElem::from_parts(&self.curve, u, v, &self.d * &rhs.d)
    }
}
impl std::ops::Div for &FuncElem {
    type Output = FuncElem;
    fn div(self, rhs: &FuncElem) -> FuncElem {
        self * &rhs.inv()
    }
}
impl std::ops::Neg for &FuncElem {
    type Output = FuncElem;
    fn neg(self) -> FuncElem {
        FuncElem {
            curve: self.curve.clone(),
            u: -&self.u,
            v: -&self.v,
            d: self.d.clone(),
        }
    }
}
impl std::ops::Neg for FuncElem {
    type Output = FuncElem;
    fn neg(self) -> FuncElem {
        -&self
    }
}
func_binop!(Add, add);
func_binop!(Sub, sub);
func_binop!(Mul, mul);
func_binop!(Div, div);

/// A truncated Laurent expansion of a function at a rational place, in
/// the canonical uniformizer of that place.
#[derive(Clone, Debug)]
pub struct LocalSeries {
    pub place: Point,
    lead: i64,
    coeffs: Vec<FieldElement>,
    prec: i64,
}

impl LocalSeries {
    /// Leading exponent, i.e. the valuation; None when the function is
    /// zero to the computed precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.lead)
        }
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn coeff(&self, e: i64) -> FieldElement {
        assert!(e < self.prec, "coefficient beyond precision");
        let field = self
            .coeffs
            .first()
            .map(|c| c.field().clone())
            .expect("zero series has no field context");
        if e < self.lead || (e - self.lead) as usize >= self.coeffs.len() {
            field.zero()
        } else {
            self.coeffs[(e - self.lead) as usize].clone()
        }
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }
}

/// Expands many functions at one place through a single shared
/// coordinate expansion; much cheaper than repeated [`FuncElem::expand`]
/// when several functions are inspected at the same point.
pub fn expand_batch(fs: &[FuncElem], p: &Point, prec: i64) -> Vec<LocalSeries> {
    let Some(first) = fs.first() else {
        return Vec::new();
    };
    let curve = first.curve();
    let work = prec + 16;
    let (x, y) = expand_xy(curve, p, work);
    fs.iter()
        .map(|f| {
            let ser = if f.is_zero() {
                Ser::zero_to(curve.field(), prec)
            } else {
                let num =
                    poly_at_ser(&f.u, &x, work).add(&poly_at_ser(&f.v, &x, work).mul(&y));
                let den = poly_at_ser(&f.d, &x, work);
                let quick = if num.is_zero() || den.is_zero() {
                    None
                } else {
                    Some(num.mul(&den.inv())).filter(|s| s.prec >= prec)
                };
                // Deep zeros or precision loss: redo at the full bound.
                quick
                    .map(|s| s.truncated(prec))
                    .unwrap_or_else(|| f.expand_raw(p, prec))
            };
            LocalSeries {
                place: p.clone(),
                lead: if ser.is_zero() { ser.prec } else { ser.lead },
                coeffs: ser.coeffs,
                prec: ser.prec,
            }
        })
        .collect()
}

/// Evaluates many functions at one place through a single shared
/// coordinate expansion; the functions may have removable 0/0 there.
pub fn evaluate_batch(fs: &[FuncElem], p: &Point) -> Vec<Value> {
    let Some(first) = fs.first() else {
        return Vec::new();
    };
    let field = first.curve().field().clone();
    // Fast path: at an affine point where no denominator vanishes, plain
    // polynomial evaluation answers everything.
    if let Point::Affine(x0, y0) = p {
        if fs.iter().all(|f| !f.d.eval(x0).is_zero()) {
            return fs
                .iter()
                .map(|f| {
                    let num = &f.u.eval(x0) + &(&f.v.eval(x0) * y0);
                    Value::Finite(&num / &f.d.eval(x0))
                })
                .collect();
        }
    }
    expand_batch(fs, p, 1)
        .into_iter()
        .map(|s| match s.valuation() {
            Some(v) if v < 0 => Value::Pole,
            Some(0) => Value::Finite(s.coeff(0)),
            _ => Value::Finite(field.zero()),
        })
        .collect()
}

/// The canonical uniformizer at P: x/y at O; x - x(P) at affine places
/// where dF/dy does not vanish; y - y(P) otherwise.
pub fn uniformizer(curve: &Curve, p: &Point) -> FuncElem {
    match p {
        Point::Infinity => &FuncElem::x_fn(curve) / &FuncElem::y_fn(curve),
        Point::Affine(x0, y0) => {
            let field = curve.field();
            let fy = &(&(&field.from_int(2) * y0) + &(curve.a1() * x0)) + curve.a3();
            if !fy.is_zero() {
                &FuncElem::x_fn(curve) - &FuncElem::constant(curve, x0.clone())
            } else {
                &FuncElem::y_fn(curve) - &FuncElem::constant(curve, y0.clone())
            }
        }
    }
}

// -------------------------------------------------------------- divisors

/// A divisor supported on rational places: a finite map from places to
/// nonzero integers, keyed by the canonical point index.
#[derive(Clone, PartialEq, Eq)]
pub struct Divisor {
    curve: Curve,
    coeffs: BTreeMap<usize, i64>,
}

impl fmt::Debug for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, n) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}*{}", n, self.curve.point_by_index(*idx))?;
        }
        Ok(())
    }
}

impl Divisor {
    pub fn new(curve: &Curve) -> Divisor {
        Divisor { curve: curve.clone(), coeffs: BTreeMap::new() }
    }

    pub fn from_entries(curve: &Curve, entries: &[(Point, i64)]) -> Divisor {
        let mut d = Divisor::new(curve);
        for (p, n) in entries {
            d.add_to(p, *n);
        }
        d
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn coeff(&self, p: &Point) -> i64 {
        *self.coeffs.get(&self.curve.point_index(p)).unwrap_or(&0)
    }

    pub fn set(&mut self, p: &Point, n: i64) {
        let idx = self.curve.point_index(p);
        if n == 0 {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, n);
        }
    }

    pub fn add_to(&mut self, p: &Point, n: i64) {
        self.set(p, self.coeff(p) + n);
    }

    /// All places are rational, so the degree is the coefficient sum.
    pub fn degree(&self) -> i64 {
        self.coeffs.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Point, i64)> + '_ {
        self.coeffs
            .iter()
            .map(|(idx, n)| (self.curve.point_by_index(*idx).clone(), *n))
    }

    pub fn support(&self) -> impl Iterator<Item = Point> + '_ {
        self.entries().map(|(p, _)| p)
    }

    /// Componentwise d >= other.
    pub fn dominates(&self, other: &Divisor) -> bool {
        let idxs: std::collections::BTreeSet<usize> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .collect();
        idxs.into_iter().all(|i| {
            self.coeffs.get(&i).unwrap_or(&0) >= other.coeffs.get(&i).unwrap_or(&0)
        })
    }

    /// Group-law sum of [n]P over the entries (the Abel map composed with
    /// the class-group isomorphism, for degree-zero divisors).
    pub fn point_sum(&self) -> Point {
        let mut acc = Point::Infinity;
        for (p, n) in self.entries() {
            acc = self.curve.add(&acc, &self.curve.scalar_mul(n, &p));
        }
        acc
    }
}

impl std::ops::Add for &Divisor {
    type Output = Divisor;
    fn add(self, rhs: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, n) in rhs.entries() {
            out.add_to(&p, n);
        }
        out
    }
}
impl std::ops::Neg for &Divisor {
    type Output = Divisor;
    fn neg(self) -> Divisor {
        let mut out = Divisor::new(&self.curve);
        for (p, n) in self.entries() {
            out.set(&p, -n);
        }
        out
    }
}
impl std::ops::Sub for &Divisor {
    type Output = Divisor;
    fn sub(self, rhs: &Divisor) -> Divisor {
        self + &(-rhs)
    }
}

// ---------------------------------------------------------- Riemann-Roch

/// Basis of the Riemann-Roch space L(D) = {z : (z) >= -D} for a divisor
/// with rational support.
///
/// With h = prod (x - x(P))^{n_P} over the affine positive part, every
/// candidate is g/h with g in the monomial space spanned by
/// {x^i y^j : j <= 1, 2i + 3j <= M}, M = n_O + 2 deg h; the requirements
/// at the support of D and at the mirror points of the positive part
/// become linear conditions on local-series coefficients of g, solved by
/// exact Gaussian elimination.
pub fn riemann_roch_basis(curve: &Curve, d: &Divisor) -> Vec<FuncElem> {
    assert!(d.curve() == curve, "divisor on a different curve");
    let field = curve.field();
    let deg = d.degree();
    if deg < 0 {
        return Vec::new();
    }

    // Shift polynomial h and the pole budget at O.
    let mut h = Poly::one(field);
    let mut n_o = 0i64;
    for (p, n) in d.entries() {
        match &p {
            Point::Infinity => n_o = n,
            Point::Affine(x0, _) if n > 0 => {
                let lin = Poly::from_coeffs(field, vec![-x0, field.one()]);
                for _ in 0..n {
                    h = &h * &lin;
                }
            }
            _ => {}
        }
    }
    let m = n_o + 2 * h.degree().unwrap_or(0) as i64;
    if m < 0 {
        return Vec::new();
    }

    // Monomial basis of L(M O), ordered by pole order at O.
    let mut monomials: Vec<(usize, usize)> = Vec::new();
    for j in 0..=1usize {
        for i in 0..=(m as usize) {
            if 2 * i + 3 * j <= m as usize {
                monomials.push((i, j));
            }
        }
    }
    monomials.sort_by_key(|&(i, j)| (2 * i + 3 * j, j));

    // Constraint places: the affine support of D plus the mirrors of the
    // affine positive part.
    let mut constraint_points: BTreeMap<usize, Point> = BTreeMap::new();
    for (p, n) in d.entries() {
        if !p.is_infinity() {
            constraint_points.insert(curve.point_index(&p), p.clone());
            if n > 0 {
                let mirror = curve.neg(&p);
                constraint_points.insert(curve.point_index(&mirror), mirror);
            }
        }
    }

    let mut rows: Vec<Vec<FieldElement>> = Vec::new();
    for r in constraint_points.values() {
        // v_R(h): multiplicity of x(R) among the shift roots, doubled at
        // self-mirror points.
        let x_r = r.x().expect("affine constraint point");
        let mult: i64 = d
            .entries()
            .filter(|(p, n)| *n > 0 && !p.is_infinity() && p.x() == Some(x_r))
            .map(|(_, n)| n)
            .sum();
        let v_here = if *r == curve.neg(r) { 2 } else { 1 };
        let c_r = mult * v_here - d.coeff(r);
        if c_r <= 0 {
            continue;
        }
        // Local expansions of x and y at R; monomial series follow.
        let (xs, ys) = expand_xy(curve, r, c_r + 2);
        let mut xpow: Vec<Ser> = vec![Ser::constant(&field.one(), c_r + 2)];
        for i in 1..=(m as usize / 2) {
            xpow.push(xpow[i - 1].mul(&xs));
        }
        let mono_ser: Vec<Ser> = monomials
            .iter()
            .map(|&(i, j)| {
                let mut s = xpow[i].clone();
                if j == 1 {
                    s = s.mul(&ys);
                }
                s
            })
            .collect();
        for e in 0..c_r {
            rows.push(mono_ser.iter().map(|s| s.coeff(e)).collect());
        }
    }

    let null = if rows.is_empty() {
        // No constraints: the whole monomial space.
        (0..monomials.len())
            .map(|k| {
                let mut v = vec![field.zero(); monomials.len()];
                v[k] = field.one();
                v
            })
            .collect()
    } else {
        linalg::nullspace(field, &rows, monomials.len())
    };

    let basis: Vec<FuncElem> = null
        .iter()
        .map(|lambda| {
            let mut u = vec![field.zero(); m as usize + 1];
            let mut v = vec![field.zero(); m as usize + 1];
            for (k, &(i, j)) in monomials.iter().enumerate() {
                if lambda[k].is_zero() {
                    continue;
                }
                if j == 0 {
                    u[i] = &u[i] + &lambda[k];
                } else {
                    v[i] = &v[i] + &lambda[k];
                }
            }
            FuncElem::from_parts(
                curve,
                Poly::from_coeffs(field, u),
                Poly::from_coeffs(field, v),
                h.clone(),
            )
        })
        .collect();

    if deg >= 1 {
        assert_eq!(
            basis.len() as i64,
            deg,
            "Riemann-Roch dimension mismatch (arithmetic bug)"
        );
    } else {
        assert!(basis.len() <= 1);
    }
    basis
}

// -------------------------------------------------------------- pullback

/// Coordinate functions of the translation-by-Q map: (x o tau_Q, y o
/// tau_Q) as rational functions, from the chord construction.
pub fn translation_maps(curve: &Curve, q: &Point) -> (FuncElem, FuncElem) {
    let (xq, yq) = match q {
        Point::Infinity => return (FuncElem::x_fn(curve), FuncElem::y_fn(curve)),
        Point::Affine(x, y) => (x.clone(), y.clone()),
    };
    let x = FuncElem::x_fn(curve);
    let y = FuncElem::y_fn(curve);
    let cx = FuncElem::constant(curve, xq);
    let cy = FuncElem::constant(curve, yq);
    let a1 = FuncElem::constant(curve, curve.a1().clone());
    let a2 = FuncElem::constant(curve, curve.a2().clone());
    let a3 = FuncElem::constant(curve, curve.a3().clone());
    let lambda = &(&cy - &y) / &(&cx - &x);
    let nu = &y - &(&lambda * &x);
    let x3 = &(&(&(&lambda * &lambda) + &(&a1 * &lambda)) - &a2) - &(&x + &cx);
    let y3 = &(-&(&(&lambda + &a1) * &x3)) - &(&nu + &a3);
    (x3, y3)
}

/// Substitutes the coordinate maps of the automorphism into f, so that
/// pullback(f, s) evaluated at P equals f evaluated at s(P).
pub fn pullback(f: &FuncElem, aut: &CurveAut) -> FuncElem {
    let curve = f.curve();
    let mut out = f.clone();
    if !aut.translate().is_infinity() {
        let (tx, ty) = translation_maps(curve, aut.translate());
        out = substitute(&out, &tx, &ty);
    }
    if !aut.stab().is_identity() {
        let (sx, sy) = stab_maps(curve, aut.stab());
        out = substitute(&out, &sx, &sy);
    }
    out
}

fn stab_maps(curve: &Curve, st: &StabAut) -> (FuncElem, FuncElem) {
    let x = FuncElem::x_fn(curve);
    let y = FuncElem::y_fn(curve);
    let u2 = st.u() * st.u();
    let u3 = &u2 * st.u();
    let sx = &(&FuncElem::constant(curve, u2.clone()) * &x)
        + &FuncElem::constant(curve, st.r().clone());
    let sy = &(&(&FuncElem::constant(curve, u3) * &y)
        + &(&FuncElem::constant(curve, &u2 * st.s()) * &x))
        + &FuncElem::constant(curve, st.t().clone());
    (sx, sy)
}

fn substitute(f: &FuncElem, x_map: &FuncElem, y_map: &FuncElem) -> FuncElem {
    let curve = f.curve();
    let eval_poly = |p: &Poly| -> FuncElem {
        let mut acc = FuncElem::zero(curve);
        for c in p.coeffs().iter().rev() {
            acc = &(&acc * x_map) + &FuncElem::constant(curve, c.clone());
        }
        acc
    };
    let num = &eval_poly(&f.u) + &(&eval_poly(&f.v) * y_map);
    let den = eval_poly(&f.d);
    &num / &den
}
