//! Weierstrass curves over small finite fields.
//!
//! Curves are given by the long Weierstrass equation
//! y^2 + a1*x*y + a3*y = x^3 + a2*x^2 + a4*x + a6, so characteristics 2 and
//! 3 work with the same chord-tangent formulas. Construction eagerly
//! enumerates the rational points, checks the Hasse-Weil bound, computes
//! the j-invariant and determines the invariant-factor decomposition of
//! the point group by an exhaustive order census.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::gf::{self, Field, FieldElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("singular Weierstrass equation (discriminant is zero)")]
    Singular,
    #[error("point group Z/{n1} x Z/{n2} is not admissible for N={n} over GF({q})")]
    StructureContradiction { n1: u64, n2: u64, n: u64, q: u64 },
    #[error("({x}, {y}) does not satisfy the curve equation")]
    PointNotOnCurve { x: u64, y: u64 },
    #[error("no maximal curve found in the scanned families over GF({q})")]
    NoMaximalCurveFound { q: u64 },
}

/// A rational place of the curve: the infinite place or an affine point.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine(FieldElement, FieldElement),
}

impl Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn x(&self) -> Option<&FieldElement> {
        match self {
            Point::Infinity => None,
            Point::Affine(x, _) => Some(x),
        }
    }

    pub fn y(&self) -> Option<&FieldElement> {
        match self {
            Point::Infinity => None,
            Point::Affine(_, y) => Some(y),
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Infinity => write!(f, "O"),
            Point::Affine(x, y) => write!(f, "({x}, {y})"),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

struct CurveData {
    field: Field,
    a1: FieldElement,
    a2: FieldElement,
    a3: FieldElement,
    a4: FieldElement,
    a6: FieldElement,
    discriminant: FieldElement,
    j: FieldElement,
    /// O first, then affine points by ascending (x index, y index).
    points: Vec<Point>,
    affine_index: HashMap<(u32, u32), u32>,
    /// Invariant factors (n1, n2) with n1 | n2 and n1 * n2 = N.
    structure: (u64, u64),
}

#[derive(Clone)]
pub struct Curve(Arc<CurveData>);

impl PartialEq for Curve {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.field == other.0.field && self.coeff_indices() == other.coeff_indices())
    }
}
impl Eq for Curve {}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Curve(q={}, a=[{},{},{},{},{}])",
            self.field().q(),
            self.0.a1,
            self.0.a2,
            self.0.a3,
            self.0.a4,
            self.0.a6
        )
    }
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut s = (n as f64).sqrt() as u64;
    while s * s > n {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    s
}

impl Curve {
    /// Builds the curve from [a1, a2, a3, a4, a6] and computes all caches.
    pub fn new(field: &Field, coeffs: [FieldElement; 5]) -> Result<Curve, CurveError> {
        for c in &coeffs {
            assert!(c.field() == field, "coefficient from a different field");
        }
        let [a1, a2, a3, a4, a6] = coeffs;
        let int = |n: i64| field.from_int(n);

        // Standard b-invariants and discriminant.
        let b2 = &(&a1 * &a1) + &(&int(4) * &a2);
        let b4 = &(&int(2) * &a4) + &(&a1 * &a3);
        let b6 = &(&a3 * &a3) + &(&int(4) * &a6);
        let b8 = &(&(&(&(&a1 * &a1) * &a6) + &(&(&int(4) * &a2) * &a6)) - &(&(&a1 * &a3) * &a4))
            + &(&(&a2 * &(&a3 * &a3)) - &(&a4 * &a4));
        let disc = &(&(&(-&(&(&b2 * &b2) * &b8)) - &(&int(8) * &b4.pow(3)))
            - &(&int(27) * &(&b6 * &b6)))
            + &(&int(9) * &(&(&b2 * &b4) * &b6));
        if disc.is_zero() {
            return Err(CurveError::Singular);
        }
        let c4 = &(&b2 * &b2) - &(&int(24) * &b4);
        let j = &c4.pow(3) / &disc;

        // Enumerate rational points: for each x solve the monic quadratic
        // y^2 + (a1 x + a3) y - f(x) = 0.
        let q = field.q();
        let mut points = vec![Point::Infinity];
        let mut affine_index = HashMap::new();
        for xi in 0..q as u32 {
            let x = field.element(xi as u64);
            let b = &(&a1 * &x) + &a3;
            let fx = &(&(&(&(&x + &a2) * &x) + &a4) * &x) + &a6;
            for yi in field.solve_monic_quadratic(b.idx() as u32, (-&fx).idx() as u32) {
                affine_index.insert((xi, yi), points.len() as u32);
                points.push(Point::Affine(x.clone(), field.element(yi as u64)));
            }
        }
        let n = points.len() as u64;
        let hasse = 2.0 * (q as f64).sqrt();
        assert!(
            ((n as f64) - (q as f64) - 1.0).abs() <= hasse + 1e-9,
            "Hasse-Weil bound violated: N={n}, q={q} (arithmetic bug)"
        );

        let data = CurveData {
            field: field.clone(),
            a1,
            a2,
            a3,
            a4,
            a6,
            discriminant: disc,
            j,
            points,
            affine_index,
            structure: (1, n),
        };
        let curve = Curve(Arc::new(data));
        let structure = curve.census_structure()?;
        // Rebuild with the final structure cached (Arc contents are
        // immutable once shared).
        let inner = Arc::try_unwrap(curve.0).ok().expect("sole owner");
        Ok(Curve(Arc::new(CurveData { structure, ..inner })))
    }

    pub fn field(&self) -> &Field {
        &self.0.field
    }

    pub fn a1(&self) -> &FieldElement {
        &self.0.a1
    }
    pub fn a2(&self) -> &FieldElement {
        &self.0.a2
    }
    pub fn a3(&self) -> &FieldElement {
        &self.0.a3
    }
    pub fn a4(&self) -> &FieldElement {
        &self.0.a4
    }
    pub fn a6(&self) -> &FieldElement {
        &self.0.a6
    }

    pub fn coeff_indices(&self) -> [u64; 5] {
        [
            self.0.a1.idx(),
            self.0.a2.idx(),
            self.0.a3.idx(),
            self.0.a4.idx(),
            self.0.a6.idx(),
        ]
    }

    pub fn discriminant(&self) -> &FieldElement {
        &self.0.discriminant
    }

    pub fn j_invariant(&self) -> &FieldElement {
        &self.0.j
    }

    /// All rational points, O first, then ascending (x index, y index).
    pub fn points(&self) -> &[Point] {
        &self.0.points
    }

    pub fn point_count(&self) -> u64 {
        self.0.points.len() as u64
    }

    /// Invariant factors (n1, n2) of the point group Z/n1 x Z/n2 (n1 = 1
    /// means cyclic).
    pub fn group_structure(&self) -> (u64, u64) {
        self.0.structure
    }

    pub fn is_maximal(&self) -> bool {
        let q = self.field().q();
        let s = isqrt(q);
        s * s == q && self.point_count() == q + 2 * s + 1
    }

    /// Position of a point in the canonical point order.
    pub fn point_index(&self, p: &Point) -> usize {
        match p {
            Point::Infinity => 0,
            Point::Affine(x, y) => {
                let key = (x.idx() as u32, y.idx() as u32);
                *self
                    .0
                    .affine_index
                    .get(&key)
                    .unwrap_or_else(|| panic!("{p} is not on {self:?}")) as usize
            }
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match p {
            Point::Infinity => true,
            Point::Affine(x, y) => {
                if x.field() != self.field() {
                    return false;
                }
                self.0
                    .affine_index
                    .contains_key(&(x.idx() as u32, y.idx() as u32))
            }
        }
    }

    /// Checked affine point constructor.
    pub fn affine(&self, x: FieldElement, y: FieldElement) -> Result<Point, CurveError> {
        let p = Point::Affine(x, y);
        if self.contains(&p) {
            Ok(p)
        } else {
            match p {
                Point::Affine(x, y) => Err(CurveError::PointNotOnCurve {
                    x: x.idx(),
                    y: y.idx(),
                }),
                Point::Infinity => unreachable!(),
            }
        }
    }

    pub fn point_by_index(&self, i: usize) -> &Point {
        &self.0.points[i]
    }

    pub fn neg(&self, p: &Point) -> Point {
        debug_assert!(self.contains(p), "negating a point off the curve");
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => {
                let ny = &(-y) - &(&(&self.0.a1 * x) + &self.0.a3);
                Point::Affine(x.clone(), ny)
            }
        }
    }

    /// Chord-tangent addition, valid in every characteristic.
    pub fn add(&self, p: &Point, q: &Point) -> Point {
        debug_assert!(
            self.contains(p) && self.contains(q),
            "adding points off the curve"
        );
        let (x1, y1) = match p {
            Point::Infinity => return q.clone(),
            Point::Affine(x, y) => (x, y),
        };
        let (x2, y2) = match q {
            Point::Infinity => return p.clone(),
            Point::Affine(x, y) => (x, y),
        };
        if *q == self.neg(p) {
            return Point::Infinity;
        }
        let d = &self.0;
        let (lambda, nu) = if x1 == x2 {
            // Tangent line; the denominator is nonzero because q != -p.
            let den = &(&(&d.field.from_int(2) * y1) + &(&d.a1 * x1)) + &d.a3;
            let three = d.field.from_int(3);
            let two = d.field.from_int(2);
            let num_l =
                &(&(&(&three * x1) * x1) + &(&(&two * &d.a2) * x1)) + &(&d.a4 - &(&d.a1 * y1));
            let num_n =
                &(&(-&x1.pow(3)) + &(&(&d.a4 * x1) + &(&two * &d.a6))) - &(&d.a3 * y1);
            (&num_l / &den, &num_n / &den)
        } else {
            let lambda = &(y2 - y1) / &(x2 - x1);
            let nu = y1 - &(&lambda * x1);
            (lambda, nu)
        };
        let x3 = &(&(&(&lambda * &lambda) + &(&d.a1 * &lambda)) - &d.a2) - &(x1 + x2);
        let y3 = &(-&(&(&lambda + &d.a1) * &x3)) - &(&nu + &d.a3);
        Point::Affine(x3, y3)
    }

    pub fn sub(&self, p: &Point, q: &Point) -> Point {
        self.add(p, &self.neg(q))
    }

    pub fn scalar_mul(&self, m: i64, p: &Point) -> Point {
        let base = if m < 0 { self.neg(p) } else { p.clone() };
        let mut e = m.unsigned_abs();
        let mut acc = Point::Infinity;
        let mut cur = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.add(&acc, &cur);
            }
            e >>= 1;
            if e > 0 {
                cur = self.add(&cur, &cur);
            }
        }
        acc
    }

    /// Smallest m >= 1 with [m]P = O; always divides the point count.
    pub fn order_of_point(&self, p: &Point) -> u64 {
        let n = self.point_count();
        let mut m = n;
        for (l, _) in gf::factorize(n) {
            while m % l == 0 && self.scalar_mul((m / l) as i64, p).is_infinity() {
                m /= l;
            }
        }
        m
    }

    /// The subgroup {P : [h]P = O}.
    pub fn torsion_points(&self, h: u64) -> Vec<Point> {
        self.points()
            .iter()
            .filter(|p| self.scalar_mul(h as i64, p).is_infinity())
            .cloned()
            .collect()
    }

    /// Independent generators (g1, g2) of Z/n1 x Z/n2; g1 is None for
    /// cyclic groups.
    pub fn group_generators(&self) -> (Option<Point>, Point) {
        let (n1, n2) = self.group_structure();
        let g2 = self
            .points()
            .iter()
            .find(|p| self.order_of_point(p) == n2)
            .expect("a point of maximal order exists")
            .clone();
        if n1 == 1 {
            return (None, g2);
        }
        let mut span = std::collections::HashSet::new();
        let mut acc = Point::Infinity;
        for _ in 0..n2 {
            span.insert(self.point_index(&acc));
            acc = self.add(&acc, &g2);
        }
        for p in self.points() {
            if self.order_of_point(p) != n1 {
                continue;
            }
            // Independence: no nonzero multiple of p lies in <g2>.
            let mut acc = p.clone();
            let mut independent = true;
            for _ in 1..n1 {
                if span.contains(&self.point_index(&acc)) {
                    independent = false;
                    break;
                }
                acc = self.add(&acc, p);
            }
            if independent {
                return (Some(p.clone()), g2);
            }
            let _ = acc;
        }
        unreachable!("invariant-factor generators always exist")
    }

    /// A deterministic subgroup of the point group with the given order.
    pub fn subgroup_of_order(&self, h: u64) -> Option<Vec<Point>> {
        let (n1, n2) = self.group_structure();
        if h == 0 || (n1 * n2) % h != 0 {
            return None;
        }
        let b = gf::gcd(h, n2);
        let a = h / b;
        if a == 0 || n1 % a != 0 {
            return None;
        }
        let (g1, g2) = self.group_generators();
        let h2 = self.scalar_mul((n2 / b) as i64, &g2);
        let h1 = match (&g1, a) {
            (_, 1) => Point::Infinity,
            (Some(g1), _) => self.scalar_mul((n1 / a) as i64, g1),
            (None, _) => return None,
        };
        let mut idx = Vec::with_capacity((a * b) as usize);
        let mut p1 = Point::Infinity;
        for _ in 0..a {
            let mut p = p1.clone();
            for _ in 0..b {
                idx.push(self.point_index(&p));
                p = self.add(&p, &h2);
            }
            p1 = self.add(&p1, &h1);
        }
        idx.sort_unstable();
        idx.dedup();
        if idx.len() as u64 != h {
            return None;
        }
        Some(idx.into_iter().map(|i| self.0.points[i].clone()).collect())
    }

    /// Order census: n2 = exponent of the group, n1 = N / n2, validated
    /// against the admissible isogeny-class group structures.
    fn census_structure(&self) -> Result<(u64, u64), CurveError> {
        let n = self.point_count();
        let mut n2 = 1u64;
        for p in self.points() {
            let o = self.order_of_point(p);
            n2 = n2 / gf::gcd(n2, o) * o; // lcm
        }
        let n1 = n / n2;
        let q = self.field().q();
        let p = self.field().p();
        let a = self.field().a();
        let ok = n1 * n2 == n && n2 % n1 == 0 && admissible_structure(q, p, a, n, n1);
        if ok {
            Ok((n1, n2))
        } else {
            Err(CurveError::StructureContradiction { n1, n2, n, q })
        }
    }
}

fn admissible_structure(q: u64, p: u64, a: u32, n: u64, n1: u64) -> bool {
    let t = q as i64 + 1 - n as i64;
    let s = isqrt(q);
    if a % 2 == 0 && (t == 2 * s as i64 || t == -2 * (s as i64)) {
        // Full supersingular case: Z/(sqrt(q) -+ 1) squared.
        return n1 * n1 == n;
    }
    if t != 0 && gf::gcd(t.unsigned_abs(), p) == 1 {
        // Ordinary case: the small factor is prime to p and divides q-1.
        return n1 % p != 0 && (q - 1) % n1 == 0;
    }
    if t == 0 {
        return if q % 4 == 3 { n1 <= 2 } else { n1 == 1 };
    }
    // Remaining supersingular traces: the group is cyclic.
    n1 == 1
}

/// Trace admissibility for isogeny classes of elliptic curves over GF(q).
pub fn admissible_trace(q: u64, t: i64) -> bool {
    let (p, a) = gf::prime_power(q).expect("q must be a prime power");
    if (t as i128) * (t as i128) > 4 * q as i128 {
        return false;
    }
    let tt = t.unsigned_abs();
    // (i) trace prime to the characteristic
    if t != 0 && gf::gcd(tt, p) == 1 {
        return true;
    }
    // (ii) a even: t = +-2 sqrt(q)
    if a % 2 == 0 && tt * tt == 4 * q {
        return true;
    }
    // (iii) a even, p != 1 mod 3: t = +-sqrt(q)
    if a % 2 == 0 && p % 3 != 1 && tt * tt == q {
        return true;
    }
    // (iv) a odd, p in {2, 3}: t = +-p^((a+1)/2)
    if a % 2 == 1 && (p == 2 || p == 3) && tt * tt == p * q {
        return true;
    }
    // (v) a odd, or a even and p != 1 mod 4: t = 0
    if t == 0 && (a % 2 == 1 || p % 4 != 1) {
        return true;
    }
    false
}

/// Scans the standard maximal-curve family for the characteristic of the
/// field and returns the first member attaining the Hasse-Weil bound.
pub fn find_maximal_curve(field: &Field) -> Result<Curve, CurveError> {
    let q = field.q();
    let p = field.p();
    let zero = field.zero();
    let one = field.one();
    let try_curve =
        |coeffs: [FieldElement; 5]| Curve::new(field, coeffs).ok().filter(|c| c.is_maximal());

    if isqrt(q) * isqrt(q) != q {
        return Err(CurveError::NoMaximalCurveFound { q });
    }
    if p == 2 {
        // y^2 + y = x^3 + alpha
        for alpha in field.elements() {
            if let Some(c) =
                try_curve([zero.clone(), zero.clone(), one.clone(), zero.clone(), alpha])
            {
                return Ok(c);
            }
        }
    } else if p == 3 {
        // y^2 = x^3 + alpha*x with -alpha a square
        for alpha in field.elements().skip(1) {
            let minus_alpha = -&alpha;
            let is_square = field.elements().any(|s| &s * &s == minus_alpha);
            if !is_square {
                continue;
            }
            if let Some(c) =
                try_curve([zero.clone(), zero.clone(), zero.clone(), alpha, zero.clone()])
            {
                return Ok(c);
            }
        }
    } else {
        if p % 3 == 2 {
            // y^2 = x^3 + theta^3
            for theta in field.elements().skip(1) {
                if let Some(c) = try_curve([
                    zero.clone(),
                    zero.clone(),
                    zero.clone(),
                    zero.clone(),
                    theta.pow(3),
                ]) {
                    return Ok(c);
                }
            }
        }
        if p % 4 == 3 {
            // y^2 = x^3 + theta^2*x
            for theta in field.elements().skip(1) {
                if let Some(c) = try_curve([
                    zero.clone(),
                    zero.clone(),
                    zero.clone(),
                    theta.pow(2),
                    zero.clone(),
                ]) {
                    return Ok(c);
                }
            }
        }
    }
    Err(CurveError::NoMaximalCurveFound { q })
}

/// Convenience: builds GF(q) and scans for a maximal curve over it.
pub fn find_maximal_curve_over(q: u64) -> Result<Curve, CurveError> {
    let (p, a) = gf::prime_power(q).expect("q must be a prime power");
    let field = Field::new(p, a).expect("field within cap");
    find_maximal_curve(&field)
}
