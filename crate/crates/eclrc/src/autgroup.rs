//! The automorphism group of an elliptic function field over GF(q).
//!
//! Every automorphism decomposes uniquely as a translation composed with
//! an automorphism fixing the infinite place O, so the full group is the
//! semidirect product T_E x| Aut(E, O) with the law
//! (tau_P a)(tau_Q b) = tau_{P + a(Q)} ab.
//!
//! Stabilizer elements are admissible Weierstrass substitutions
//! x -> u^2 x + r, y -> u^3 y + u^2 s x + t; membership is decided solely
//! by coefficient-wise preservation of the curve equation, so no family
//! shortcut can admit a spurious element.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::curve::{Curve, Point};
use crate::gf::FieldElement;

/// Generic substitution scans are quadratic in q; larger fields must hit
/// one of the closed-form family paths.
pub const DEFAULT_SCAN_CAP: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutError {
    #[error("field size {q} exceeds the substitution-scan cap {cap}")]
    FieldTooLargeForScan { q: u64, cap: u64 },
    #[error("the product set TA is not a subgroup (the conjugation criterion fails)")]
    NotASubgroup,
    #[error("expected a subgroup of translations")]
    NotTranslationSubgroup,
    #[error("expected a subgroup of stabilizer elements")]
    NotStabilizerSubgroup,
}

/// An automorphism fixing O, as the substitution
/// x -> u^2 x + r, y -> u^3 y + u^2 s x + t with u != 0.
#[derive(Clone)]
pub struct StabAut {
    curve: Curve,
    u: FieldElement,
    r: FieldElement,
    s: FieldElement,
    t: FieldElement,
}

impl PartialEq for StabAut {
    fn eq(&self, other: &Self) -> bool {
        self.params() == other.params()
    }
}
impl Eq for StabAut {}

impl fmt::Debug for StabAut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (u, r, s, t) = self.params();
        write!(f, "stab(u={u}, r={r}, s={s}, t={t})")
    }
}

impl StabAut {
    /// Checked constructor: the substitution must preserve the equation.
    pub fn new(
        curve: &Curve,
        u: FieldElement,
        r: FieldElement,
        s: FieldElement,
        t: FieldElement,
    ) -> Option<StabAut> {
        if u.is_zero() || !preserves_equation(curve, &u, &r, &s, &t) {
            return None;
        }
        Some(StabAut { curve: curve.clone(), u, r, s, t })
    }

    pub fn identity(curve: &Curve) -> StabAut {
        let f = curve.field();
        StabAut {
            curve: curve.clone(),
            u: f.one(),
            r: f.zero(),
            s: f.zero(),
            t: f.zero(),
        }
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn u(&self) -> &FieldElement {
        &self.u
    }
    pub fn r(&self) -> &FieldElement {
        &self.r
    }
    pub fn s(&self) -> &FieldElement {
        &self.s
    }
    pub fn t(&self) -> &FieldElement {
        &self.t
    }

    pub fn params(&self) -> (u64, u64, u64, u64) {
        (self.u.idx(), self.r.idx(), self.s.idx(), self.t.idx())
    }

    pub fn is_identity(&self) -> bool {
        self.params() == (1, 0, 0, 0)
    }

    /// Point action: O is fixed, affine points move by the substitution.
    pub fn apply_point(&self, p: &Point) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => {
                let u2 = &self.u * &self.u;
                let nx = &(&u2 * x) + &self.r;
                let ny = &(&(&(&u2 * &self.u) * y) + &(&(&u2 * &self.s) * x)) + &self.t;
                debug_assert!(self.curve.contains(&Point::Affine(nx.clone(), ny.clone())));
                Point::Affine(nx, ny)
            }
        }
    }

    /// Composition as point maps: self after other.
    pub fn compose(&self, other: &StabAut) -> StabAut {
        let (a, b) = (self, other);
        let a_u2 = &a.u * &a.u;
        let u = &a.u * &b.u;
        let r = &(&a_u2 * &b.r) + &a.r;
        let s = &(&a.u * &b.s) + &a.s;
        let t = &(&(&(&a_u2 * &a.u) * &b.t) + &(&(&a_u2 * &a.s) * &b.r)) + &a.t;
        StabAut { curve: a.curve.clone(), u, r, s, t }
    }

    pub fn inverse(&self) -> StabAut {
        let u_inv = self.u.inv();
        let u2_inv = &u_inv * &u_inv;
        let r = -&(&u2_inv * &self.r);
        let s = -&(&u_inv * &self.s);
        let t = &(&u2_inv * &u_inv) * &(&(&self.s * &self.r) - &self.t);
        StabAut {
            curve: self.curve.clone(),
            u: u_inv,
            r,
            s,
            t,
        }
    }

    pub fn order(&self) -> u64 {
        let mut acc = self.clone();
        let mut n = 1;
        while !acc.is_identity() {
            acc = acc.compose(self);
            n += 1;
        }
        n
    }
}

/// Coefficient-wise test that F(u^2 x + r, u^3 y + u^2 s x + t) equals
/// u^6 F(x, y) for the curve polynomial F.
fn preserves_equation(
    curve: &Curve,
    u: &FieldElement,
    r: &FieldElement,
    s: &FieldElement,
    t: &FieldElement,
) -> bool {
    let f = curve.field();
    let zero = f.zero();
    // Bivariate polynomials as coeff[i][j] x^i y^j with i <= 3, j <= 2.
    type Biv = Vec<Vec<FieldElement>>;
    let make = || vec![vec![zero.clone(); 3]; 4];
    let mul = |a: &Biv, b: &Biv| {
        let mut out = make();
        for (i, row) in a.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (k, row2) in b.iter().enumerate() {
                    for (l, d) in row2.iter().enumerate() {
                        if d.is_zero() {
                            continue;
                        }
                        debug_assert!(i + k <= 3 && j + l <= 2, "bivariate degree overflow");
                        out[i + k][j + l] = &out[i + k][j + l] + &(c * d);
                    }
                }
            }
        }
        out
    };
    let add = |a: &Biv, b: &Biv| {
        let mut out = make();
        for i in 0..4 {
            for j in 0..3 {
                out[i][j] = &a[i][j] + &b[i][j];
            }
        }
        out
    };
    let scale = |a: &Biv, c: &FieldElement| {
        let mut out = make();
        for i in 0..4 {
            for j in 0..3 {
                out[i][j] = &a[i][j] * c;
            }
        }
        out
    };

    let u2 = u * u;
    let u3 = &u2 * u;
    // Lx = u^2 x + r, Ly = u^3 y + u^2 s x + t
    let mut lx = make();
    lx[1][0] = u2.clone();
    lx[0][0] = r.clone();
    let mut ly = make();
    ly[0][1] = u3;
    ly[1][0] = &u2 * s;
    ly[0][0] = t.clone();

    // F(x, y) = y^2 + a1 x y + a3 y - x^3 - a2 x^2 - a4 x - a6
    let curve_poly = |x: &Biv, y: &Biv| {
        let y2 = mul(y, y);
        let xy = mul(x, y);
        let x2 = mul(x, x);
        let x3 = mul(&x2, x);
        let mut acc = add(&y2, &scale(&xy, curve.a1()));
        acc = add(&acc, &scale(y, curve.a3()));
        acc = add(&acc, &scale(&x3, &(-&f.one())));
        acc = add(&acc, &scale(&x2, &(-curve.a2())));
        acc = add(&acc, &scale(x, &(-curve.a4())));
        let mut a6 = make();
        a6[0][0] = -curve.a6();
        add(&acc, &a6)
    };

    let mut x = make();
    x[1][0] = f.one();
    let mut y = make();
    y[0][1] = f.one();

    let lhs = curve_poly(&lx, &ly);
    let rhs = scale(&curve_poly(&x, &y), &(&u2 * &(&u2 * &u2)));
    lhs == rhs
}

/// All admissible substitutions fixing O, sorted by (u, r, s, t) indices.
///
/// Curves matching one of the standard maximal families are solved in
/// closed form via root scans of the family's parameter equations; other
/// curves fall back to a generic scan (quadratic in q, capped).
pub fn enumerate_stabilizer(curve: &Curve) -> Result<Vec<StabAut>, AutError> {
    enumerate_stabilizer_capped(curve, DEFAULT_SCAN_CAP)
}

pub fn enumerate_stabilizer_capped(curve: &Curve, cap: u64) -> Result<Vec<StabAut>, AutError> {
    let f = curve.field();
    let p = f.p();
    let q = f.q();
    let zero = f.zero();
    let [i1, i2, i3, i4, i6] = curve.coeff_indices();
    let mut out: Vec<StabAut> = Vec::new();
    let mut push = |u: FieldElement, r: FieldElement, s: FieldElement, t: FieldElement| {
        if let Some(st) = StabAut::new(curve, u, r, s, t) {
            out.push(st);
        }
    };

    if p == 2 && i1 == 0 && i2 == 0 && i3 == 1 && i4 == 0 {
        // y^2 + y = x^3 + a6: u^3 = 1, s^4 + s = 0, r = s^2, t^2 + t = s^6.
        let quarts =
            f.poly_roots(&[zero.clone(), f.one(), zero.clone(), zero.clone(), f.one()]);
        for u in f.roots_of_unity(3) {
            for s in &quarts {
                let r = s * s;
                let s6 = s.pow(6);
                for ti in f.solve_monic_quadratic(1, s6.idx() as u32) {
                    push(u.clone(), r.clone(), s.clone(), f.element(ti as u64));
                }
            }
        }
    } else if p == 3 && i1 == 0 && i2 == 0 && i3 == 0 && i6 == 0 && i4 != 0 {
        // y^2 = x^3 + a4 x: u^4 = 1, r^3 + a4 r = 0, s = t = 0.
        let shifts = f.poly_roots(&[zero.clone(), curve.a4().clone(), zero.clone(), f.one()]);
        for u in f.roots_of_unity(4) {
            for r in &shifts {
                push(u.clone(), r.clone(), zero.clone(), zero.clone());
            }
        }
    } else if p > 3 && i1 == 0 && i2 == 0 && i3 == 0 && i4 == 0 && i6 != 0 {
        // y^2 = x^3 + a6: u^6 = 1, r = s = t = 0.
        for u in f.roots_of_unity(6) {
            push(u, zero.clone(), zero.clone(), zero.clone());
        }
    } else if p > 3 && i1 == 0 && i2 == 0 && i3 == 0 && i6 == 0 && i4 != 0 {
        // y^2 = x^3 + a4 x: u^4 = 1, r = s = t = 0.
        for u in f.roots_of_unity(4) {
            push(u, zero.clone(), zero.clone(), zero.clone());
        }
    } else {
        if q > cap {
            return Err(AutError::FieldTooLargeForScan { q, cap });
        }
        generic_stabilizer_scan(curve, &mut push);
    }
    out.sort_by_key(StabAut::params);
    out.dedup();
    Ok(out)
}

/// Candidate generation from the coefficient-matching equations of the
/// substitution; every candidate is still verified by the equation check.
fn generic_stabilizer_scan(
    curve: &Curve,
    push: &mut impl FnMut(FieldElement, FieldElement, FieldElement, FieldElement),
) {
    let f = curve.field();
    let p = f.p();
    let (a1, a2, a3, a4, a6) = (
        curve.a1().clone(),
        curve.a2().clone(),
        curve.a3().clone(),
        curve.a4().clone(),
        curve.a6().clone(),
    );
    for ui in 1..f.q() {
        let u = f.element(ui);
        let u2 = &u * &u;
        let u3 = &u2 * &u;
        let u4 = &u2 * &u2;
        let u6 = &u3 * &u3;
        if p == 2 {
            // u a1 = a1 forces u = 1 whenever a1 != 0.
            if !a1.is_zero() && !u.is_one() {
                continue;
            }
            for si in 0..f.q() {
                let s = f.element(si);
                // From the x^2 coefficient: r = (u^2 - 1) a2 + s a1 + s^2.
                let r = &(&(&(&u2 + &f.one()) * &a2) + &(&s * &a1)) + &(&s * &s);
                if !a1.is_zero() {
                    // The x coefficient is linear in t.
                    let rhs = &(&(&(&u4 + &f.one()) * &a4) + &(&s * &a3))
                        + &(&(&(&r * &s) * &a1) + &(&r * &r));
                    let t = &rhs / &a1;
                    push(u.clone(), r, s, t);
                } else {
                    // The constant coefficient is quadratic in t:
                    // t^2 + a3 t + ((u^6 - 1) a6 + r a4 + r^2 a2 + r^3) = 0.
                    let c = &(&(&(&u6 + &f.one()) * &a6) + &(&r * &a4))
                        + &(&(&(&r * &r) * &a2) + &r.pow(3));
                    for ti in f.solve_monic_quadratic(a3.idx() as u32, c.idx() as u32) {
                        push(u.clone(), r.clone(), s.clone(), f.element(ti as u64));
                    }
                }
            }
        } else {
            let two_inv = f.from_int(2).inv();
            let s = &(&a1 * &(&u - &f.one())) * &two_inv;
            if p == 3 {
                // The x^2 equation no longer pins r; it becomes a filter.
                let lhs = &u2 * &a2;
                let rhs = &(&a2 - &(&s * &a1)) - &(&s * &s);
                if lhs != rhs {
                    continue;
                }
                for ri in 0..f.q() {
                    let r = f.element(ri);
                    let t = &(&(&(&u3 - &f.one()) * &a3) - &(&r * &a1)) * &two_inv;
                    push(u.clone(), r, s.clone(), t);
                }
            } else {
                let three_inv = f.from_int(3).inv();
                let r =
                    &(&(&(&u2 - &f.one()) * &a2) + &(&(&s * &a1) + &(&s * &s))) * &three_inv;
                let t = &(&(&(&u3 - &f.one()) * &a3) - &(&r * &a1)) * &two_inv;
                push(u.clone(), r, s.clone(), t);
            }
        }
    }
}

/// A full automorphism tau_Q . alpha: apply the stabilizer part, then
/// translate by Q.
#[derive(Clone, PartialEq, Eq)]
pub struct CurveAut {
    translate: Point,
    stab: StabAut,
}

impl fmt::Debug for CurveAut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tau_{:?} . {:?}", self.translate, self.stab)
    }
}

impl CurveAut {
    pub fn new(translate: Point, stab: StabAut) -> CurveAut {
        debug_assert!(stab.curve.contains(&translate));
        CurveAut { translate, stab }
    }

    pub fn identity(curve: &Curve) -> CurveAut {
        CurveAut::new(Point::Infinity, StabAut::identity(curve))
    }

    pub fn translation(curve: &Curve, q: &Point) -> CurveAut {
        CurveAut::new(q.clone(), StabAut::identity(curve))
    }

    pub fn from_stab(stab: &StabAut) -> CurveAut {
        CurveAut::new(Point::Infinity, stab.clone())
    }

    pub fn curve(&self) -> &Curve {
        &self.stab.curve
    }

    /// The translation point Q; this is also the image of O.
    pub fn translate(&self) -> &Point {
        &self.translate
    }

    pub fn stab(&self) -> &StabAut {
        &self.stab
    }

    pub fn is_identity(&self) -> bool {
        self.translate.is_infinity() && self.stab.is_identity()
    }

    pub fn is_translation(&self) -> bool {
        self.stab.is_identity()
    }

    pub fn is_stabilizer(&self) -> bool {
        self.translate.is_infinity()
    }

    pub fn apply(&self, p: &Point) -> Point {
        let curve = self.curve();
        curve.add(&self.stab.apply_point(p), &self.translate)
    }

    /// Semidirect law: (tau_P a)(tau_Q b) = tau_{P + a(Q)} ab.
    pub fn compose(&self, other: &CurveAut) -> CurveAut {
        let curve = self.curve();
        let q = curve.add(&self.translate, &self.stab.apply_point(&other.translate));
        CurveAut::new(q, self.stab.compose(&other.stab))
    }

    pub fn inverse(&self) -> CurveAut {
        let curve = self.curve();
        let stab_inv = self.stab.inverse();
        let q = curve.neg(&stab_inv.apply_point(&self.translate));
        CurveAut::new(q, stab_inv)
    }

    pub fn order(&self) -> u64 {
        let mut acc = self.clone();
        let mut n = 1;
        while !acc.is_identity() {
            acc = acc.compose(self);
            n += 1;
        }
        n
    }

    /// Canonical sort key: (point index of Q, u, r, s, t).
    pub fn sort_key(&self) -> (usize, u64, u64, u64, u64) {
        let (u, r, s, t) = self.stab.params();
        (self.curve().point_index(&self.translate), u, r, s, t)
    }
}

/// A subgroup given by its closed element set (canonically sorted) and
/// the generators it was built from.
#[derive(Clone, Debug)]
pub struct Subgroup {
    curve: Curve,
    elements: Vec<CurveAut>,
    generators: Vec<CurveAut>,
}

impl Subgroup {
    pub fn trivial(curve: &Curve) -> Subgroup {
        Subgroup {
            curve: curve.clone(),
            elements: vec![CurveAut::identity(curve)],
            generators: Vec::new(),
        }
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn elements(&self) -> &[CurveAut] {
        &self.elements
    }

    pub fn generators(&self) -> &[CurveAut] {
        &self.generators
    }

    pub fn contains(&self, g: &CurveAut) -> bool {
        self.elements
            .binary_search_by_key(&g.sort_key(), CurveAut::sort_key)
            .is_ok()
    }

    /// The translation part, G intersected with T_E, as a point list.
    pub fn translation_points(&self) -> Vec<Point> {
        self.elements
            .iter()
            .filter(|g| g.is_translation())
            .map(|g| g.translate.clone())
            .collect()
    }

    /// The stabilizer part, G intersected with Aut(E, O).
    pub fn stabilizer_elements(&self) -> Vec<StabAut> {
        self.elements
            .iter()
            .filter(|g| g.is_stabilizer())
            .map(|g| g.stab.clone())
            .collect()
    }

    pub fn is_translation_subgroup(&self) -> bool {
        self.elements.iter().all(CurveAut::is_translation)
    }

    pub fn is_stabilizer_subgroup(&self) -> bool {
        self.elements.iter().all(CurveAut::is_stabilizer)
    }

    pub fn is_abelian(&self) -> bool {
        for a in &self.elements {
            for b in &self.elements {
                if a.compose(b) != b.compose(a) {
                    return false;
                }
            }
        }
        true
    }

    /// Orbit partition of the rational points under the subgroup action.
    /// Orbits are sorted internally and listed by smallest member.
    pub fn orbits(&self) -> Vec<Vec<Point>> {
        let curve = &self.curve;
        let n = curve.point_count() as usize;
        let mut seen = vec![false; n];
        let mut orbits = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut idxs = BTreeSet::new();
            let p = curve.point_by_index(start);
            for g in &self.elements {
                idxs.insert(curve.point_index(&g.apply(p)));
            }
            for &i in &idxs {
                seen[i] = true;
            }
            orbits.push(
                idxs.into_iter()
                    .map(|i| curve.point_by_index(i).clone())
                    .collect(),
            );
        }
        orbits
    }
}

/// Smallest closed set containing the generators.
pub fn closure(curve: &Curve, generators: &[CurveAut]) -> Subgroup {
    let mut set: BTreeMap<(usize, u64, u64, u64, u64), CurveAut> = BTreeMap::new();
    let id = CurveAut::identity(curve);
    set.insert(id.sort_key(), id);
    let mut frontier: VecDeque<CurveAut> = VecDeque::new();
    for g in generators {
        if set.insert(g.sort_key(), g.clone()).is_none() {
            frontier.push_back(g.clone());
        }
    }
    while let Some(g) = frontier.pop_front() {
        let inv = g.inverse();
        if set.insert(inv.sort_key(), inv.clone()).is_none() {
            frontier.push_back(inv);
        }
        let snapshot: Vec<CurveAut> = set.values().cloned().collect();
        for h in snapshot {
            for prod in [g.compose(&h), h.compose(&g)] {
                if set.insert(prod.sort_key(), prod.clone()).is_none() {
                    frontier.push_back(prod);
                }
            }
        }
    }
    Subgroup {
        curve: curve.clone(),
        elements: set.into_values().collect(),
        generators: generators.to_vec(),
    }
}

/// The whole group T_E x| Aut(E, O): all (Q, alpha) pairs.
pub fn full_group(curve: &Curve) -> Result<Subgroup, AutError> {
    let stabs = enumerate_stabilizer(curve)?;
    let mut elements = Vec::with_capacity(curve.points().len() * stabs.len());
    for q in curve.points() {
        for st in &stabs {
            elements.push(CurveAut::new(q.clone(), st.clone()));
        }
    }
    elements.sort_by_key(CurveAut::sort_key);
    let generators = elements
        .iter()
        .filter(|g| !g.is_identity())
        .take(2)
        .cloned()
        .collect();
    Ok(Subgroup {
        curve: curve.clone(),
        elements,
        generators,
    })
}

/// Builds the product subgroup TA after checking the conjugation
/// criterion: tau_{sigma^(-1)(Q)} must lie in T for every sigma in A and
/// tau_Q in T.
pub fn ta_subgroup(t_sub: &Subgroup, a_sub: &Subgroup) -> Result<Subgroup, AutError> {
    if !t_sub.is_translation_subgroup() {
        return Err(AutError::NotTranslationSubgroup);
    }
    if !a_sub.is_stabilizer_subgroup() {
        return Err(AutError::NotStabilizerSubgroup);
    }
    let curve = t_sub.curve();
    let t_points: HashSet<usize> = t_sub
        .translation_points()
        .iter()
        .map(|p| curve.point_index(p))
        .collect();
    for a in a_sub.stabilizer_elements() {
        let inv = a.inverse();
        for q in t_sub.translation_points() {
            let moved = inv.apply_point(&q);
            if !t_points.contains(&curve.point_index(&moved)) {
                return Err(AutError::NotASubgroup);
            }
        }
    }
    let mut elements = Vec::new();
    for q in t_sub.translation_points() {
        for a in a_sub.stabilizer_elements() {
            elements.push(CurveAut::new(q.clone(), a));
        }
    }
    elements.sort_by_key(CurveAut::sort_key);
    elements.dedup_by_key(|g| g.sort_key());
    let mut generators: Vec<CurveAut> = t_sub.generators.clone();
    generators.extend(a_sub.generators.iter().cloned());
    Ok(Subgroup {
        curve: curve.clone(),
        elements,
        generators,
    })
}

/// The order-2 automorphism x -> x, y -> -y - a1 x - a3; on points it is
/// negation.
pub fn involution(curve: &Curve) -> StabAut {
    let f = curve.field();
    StabAut::new(curve, -&f.one(), f.zero(), -curve.a1(), -curve.a3())
        .expect("the hyperelliptic involution always preserves the equation")
}

/// Whether tau_Q and alpha generate an abelian group; equivalent to
/// alpha(Q) = Q.
pub fn abelian_pair(q: &Point, alpha: &StabAut) -> bool {
    alpha.apply_point(q) == *q
}

/// Over all rational Q and all non-identity stabilizers sigma fixing Q,
/// the maximum order of the (abelian) group they generate.
pub fn max_abelian_scan(curve: &Curve) -> Result<u64, AutError> {
    let stabs = enumerate_stabilizer(curve)?;
    let mut max = 0u64;
    for q in curve.points() {
        let tau = CurveAut::translation(curve, q);
        for st in &stabs {
            if st.is_identity() || !abelian_pair(q, st) {
                continue;
            }
            let g = closure(curve, &[tau.clone(), CurveAut::from_stab(st)]);
            debug_assert!(g.is_abelian());
            max = max.max(g.order());
        }
    }
    Ok(max)
}

/// All subgroups of the translation group, via joins of cyclic subgroups.
pub fn translation_subgroups(curve: &Curve) -> Vec<Subgroup> {
    let cyclic: Vec<Subgroup> = curve
        .points()
        .iter()
        .map(|p| closure(curve, &[CurveAut::translation(curve, p)]))
        .collect();
    join_closure(curve, cyclic)
}

/// All subgroups of Aut(E, O), via joins of cyclic subgroups.
pub fn stabilizer_subgroups(curve: &Curve) -> Result<Vec<Subgroup>, AutError> {
    let cyclic: Vec<Subgroup> = enumerate_stabilizer(curve)?
        .iter()
        .map(|st| closure(curve, &[CurveAut::from_stab(st)]))
        .collect();
    Ok(join_closure(curve, cyclic))
}

fn join_closure(curve: &Curve, seed: Vec<Subgroup>) -> Vec<Subgroup> {
    let key = |s: &Subgroup| -> Vec<(usize, u64, u64, u64, u64)> {
        s.elements.iter().map(CurveAut::sort_key).collect()
    };
    let mut subs: BTreeMap<_, Subgroup> = BTreeMap::new();
    subs.insert(key(&Subgroup::trivial(curve)), Subgroup::trivial(curve));
    for s in seed {
        subs.insert(key(&s), s);
    }
    loop {
        let current: Vec<Subgroup> = subs.values().cloned().collect();
        let before = subs.len();
        for a in &current {
            for b in &current {
                let mut gens = a.elements.clone();
                gens.extend(b.elements.iter().cloned());
                let join = closure(curve, &gens);
                subs.entry(key(&join)).or_insert(join);
            }
        }
        if subs.len() == before {
            break;
        }
    }
    subs.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::find_maximal_curve;
    use crate::gf::Field;

    fn gf(p: u64, a: u32) -> Field {
        Field::new(p, a).unwrap()
    }

    fn j0_curve(a: u32) -> Curve {
        let f = gf(2, a);
        let z = f.zero();
        Curve::new(&f, [z.clone(), z.clone(), f.one(), z.clone(), z]).unwrap()
    }

    #[test]
    fn stabilizer_counts_match_the_known_orders() {
        // j = 0, characteristic 2: order 24 whatever the constant term.
        assert_eq!(enumerate_stabilizer(&j0_curve(2)).unwrap().len(), 24);
        assert_eq!(enumerate_stabilizer(&j0_curve(4)).unwrap().len(), 24);
        assert_eq!(enumerate_stabilizer(&j0_curve(6)).unwrap().len(), 24);
        assert_eq!(
            enumerate_stabilizer(&find_maximal_curve(&gf(2, 4)).unwrap())
                .unwrap()
                .len(),
            24
        );
        // y^2 = x^3 + alpha x over GF(9): order 12.
        assert_eq!(
            enumerate_stabilizer(&find_maximal_curve(&gf(3, 2)).unwrap())
                .unwrap()
                .len(),
            12
        );
        // y^2 = x^3 + theta^3 over GF(25): order 6.
        assert_eq!(
            enumerate_stabilizer(&find_maximal_curve(&gf(5, 2)).unwrap())
                .unwrap()
                .len(),
            6
        );
        // y^2 = x^3 + theta^2 x over GF(49): order 4.
        assert_eq!(
            enumerate_stabilizer(&find_maximal_curve(&gf(7, 2)).unwrap())
                .unwrap()
                .len(),
            4
        );
    }

    #[test]
    fn generic_curve_has_only_the_involution() {
        // y^2 = x^3 + x + 1 over GF(5): j not in {0, 1728}.
        let f = gf(5, 1);
        let z = f.zero();
        let c = Curve::new(&f, [z.clone(), z.clone(), z.clone(), f.one(), f.one()]).unwrap();
        assert!(!c.j_invariant().is_zero());
        assert_ne!(*c.j_invariant(), f.from_int(1728));
        let stabs = enumerate_stabilizer(&c).unwrap();
        assert_eq!(stabs.len(), 2);
        assert!(stabs.iter().any(StabAut::is_identity));
        assert!(stabs.contains(&involution(&c)));
    }

    #[test]
    fn fast_path_agrees_with_a_full_quartic_scan() {
        for curve in [j0_curve(2), find_maximal_curve(&gf(3, 2)).unwrap()] {
            let f = curve.field();
            let mut brute = Vec::new();
            for u in 1..f.q() {
                for r in 0..f.q() {
                    for s in 0..f.q() {
                        for t in 0..f.q() {
                            if let Some(st) = StabAut::new(
                                &curve,
                                f.element(u),
                                f.element(r),
                                f.element(s),
                                f.element(t),
                            ) {
                                brute.push(st);
                            }
                        }
                    }
                }
            }
            brute.sort_by_key(StabAut::params);
            assert_eq!(enumerate_stabilizer(&curve).unwrap(), brute);
        }
    }

    #[test]
    fn generic_scan_agrees_with_quartic_scan_on_an_a1_curve() {
        // y^2 + xy = x^3 + 1 over GF(8): a1 != 0 exercises the linear-t
        // branch of the generic scan.
        let f = gf(2, 3);
        let z = f.zero();
        let one = f.one();
        let c = Curve::new(&f, [one.clone(), z.clone(), z.clone(), z.clone(), one]).unwrap();
        let mut brute = Vec::new();
        for u in 1..f.q() {
            for r in 0..f.q() {
                for s in 0..f.q() {
                    for t in 0..f.q() {
                        if let Some(st) = StabAut::new(
                            &c,
                            f.element(u),
                            f.element(r),
                            f.element(s),
                            f.element(t),
                        ) {
                            brute.push(st);
                        }
                    }
                }
            }
        }
        brute.sort_by_key(StabAut::params);
        assert_eq!(enumerate_stabilizer(&c).unwrap(), brute);
    }

    #[test]
    fn stabilizer_part_is_a_point_homomorphism() {
        for curve in [j0_curve(2), find_maximal_curve(&gf(2, 4)).unwrap()] {
            for st in enumerate_stabilizer(&curve).unwrap() {
                assert_eq!(st.apply_point(&Point::Infinity), Point::Infinity);
                for p in curve.points() {
                    assert!(curve.contains(&st.apply_point(p)));
                    for q in curve.points() {
                        assert_eq!(
                            st.apply_point(&curve.add(p, q)),
                            curve.add(&st.apply_point(p), &st.apply_point(q))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn translation_orbit_of_an_order_three_point() {
        let c = j0_curve(2);
        let f = c.field().clone();
        let q = c.affine(f.zero(), f.one()).unwrap();
        let tau = CurveAut::translation(&c, &q);
        let p00 = c.affine(f.zero(), f.zero()).unwrap();
        assert_eq!(tau.apply(&Point::Infinity), q);
        assert_eq!(tau.apply(&q), p00);
        assert_eq!(tau.apply(&p00), Point::Infinity);
        assert_eq!(tau.order(), 3);
        assert_eq!(tau.inverse(), CurveAut::translation(&c, &c.neg(&q)));
    }

    #[test]
    fn composition_agrees_with_pointwise_action() {
        let c = j0_curve(2);
        let g = full_group(&c).unwrap();
        assert_eq!(g.order(), 216);
        for a in g.elements() {
            for b in g.elements() {
                let ab = a.compose(b);
                for p in c.points() {
                    assert_eq!(ab.apply(p), a.apply(&b.apply(p)));
                }
            }
        }
    }

    #[test]
    fn unique_semidirect_decomposition() {
        // (Q, alpha) -> tau_Q alpha is a bijection onto the full group,
        // and Q is recovered as the image of O.
        let c = j0_curve(2);
        let g = full_group(&c).unwrap();
        let mut seen = std::collections::HashSet::new();
        for el in g.elements() {
            assert_eq!(el.apply(&Point::Infinity), *el.translate());
            assert!(seen.insert(el.sort_key()));
            assert!(el.compose(&el.inverse()).is_identity());
        }
        assert_eq!(seen.len(), 216);
    }

    #[test]
    fn closure_examples() {
        let c = j0_curve(2);
        assert_eq!(closure(&c, &[CurveAut::identity(&c)]).order(), 1);
        let g = full_group(&c).unwrap();
        let all = closure(&c, g.elements());
        assert_eq!(all.order(), g.order());
    }

    #[test]
    fn order_nine_abelian_group_over_gf64() {
        let c = j0_curve(6);
        let f = c.field().clone();
        let q = c.affine(f.zero(), f.one()).unwrap();
        let u = f
            .roots_of_unity(3)
            .into_iter()
            .find(|u| !u.is_one())
            .unwrap();
        let sigma = StabAut::new(&c, u, f.zero(), f.zero(), f.zero()).unwrap();
        assert_eq!(sigma.order(), 3);
        assert_eq!(sigma.apply_point(&q), q);
        let g = closure(
            &c,
            &[CurveAut::translation(&c, &q), CurveAut::from_stab(&sigma)],
        );
        assert_eq!(g.order(), 9);
        assert!(g.is_abelian());
    }

    #[test]
    fn ta_subgroup_criterion() {
        let c = j0_curve(6);
        let f = c.field().clone();
        // T trivial with any A returns A itself.
        let a_all = closure(
            &c,
            &enumerate_stabilizer(&c)
                .unwrap()
                .iter()
                .map(CurveAut::from_stab)
                .collect::<Vec<_>>(),
        );
        let t_trivial = Subgroup::trivial(&c);
        assert_eq!(ta_subgroup(&t_trivial, &a_all).unwrap().order(), 24);

        // The involution normalizes every translation subgroup.
        let inv = involution(&c);
        let a_inv = closure(&c, &[CurveAut::from_stab(&inv)]);
        for h in [1u64, 3, 9, 27, 81] {
            let pts = c.subgroup_of_order(h).unwrap();
            let t = closure(
                &c,
                &pts.iter()
                    .map(|p| CurveAut::translation(&c, p))
                    .collect::<Vec<_>>(),
            );
            assert_eq!(t.order(), h);
            let ta = ta_subgroup(&t, &a_inv).unwrap();
            assert_eq!(ta.order(), 2 * h);
        }

        // Order 9: tau_(0,1) with the u-scaling of order 3.
        let q = c.affine(f.zero(), f.one()).unwrap();
        let qs: Vec<Point> = (0..3).map(|k| c.scalar_mul(k, &q)).collect();
        let t = closure(
            &c,
            &qs.iter()
                .map(|p| CurveAut::translation(&c, p))
                .collect::<Vec<_>>(),
        );
        let u = f
            .roots_of_unity(3)
            .into_iter()
            .find(|u| !u.is_one())
            .unwrap();
        let sigma = StabAut::new(&c, u, f.zero(), f.zero(), f.zero()).unwrap();
        let a = closure(&c, &[CurveAut::from_stab(&sigma)]);
        assert_eq!(ta_subgroup(&t, &a).unwrap().order(), 9);
    }

    #[test]
    fn ta_criterion_matches_brute_force_on_gf4() {
        let c = j0_curve(2);
        let t_subs = translation_subgroups(&c);
        let a_subs = stabilizer_subgroups(&c).unwrap();
        assert_eq!(t_subs.len(), 6); // trivial + four Z/3 + full
        for t in &t_subs {
            for a in &a_subs {
                let mut gens = t.elements().to_vec();
                gens.extend(a.elements().iter().cloned());
                let brute = closure(&c, &gens);
                let verdict = ta_subgroup(t, a).is_ok();
                let expected = brute.order() == t.order() * a.order();
                assert_eq!(verdict, expected, "|T|={} |A|={}", t.order(), a.order());
                if verdict {
                    assert_eq!(ta_subgroup(t, a).unwrap().elements(), brute.elements());
                }
            }
        }
    }

    #[test]
    fn cyclic_point_group_never_rejects_ta() {
        // y^2 = x^3 + x + 1 over GF(5) has a cyclic point group.
        let f = gf(5, 1);
        let z = f.zero();
        let c = Curve::new(&f, [z.clone(), z.clone(), z.clone(), f.one(), f.one()]).unwrap();
        assert_eq!(c.group_structure().0, 1);
        for t in translation_subgroups(&c) {
            for a in stabilizer_subgroups(&c).unwrap() {
                assert!(ta_subgroup(&t, &a).is_ok());
            }
        }
    }

    #[test]
    fn orbit_generated_group_orders() {
        // When sigma(Q) lies in <Q>, the group generated by the orbit
        // translations and <sigma> has order ord(sigma) * ord(Q).
        let c = j0_curve(2);
        for st in enumerate_stabilizer(&c).unwrap() {
            let a = closure(&c, &[CurveAut::from_stab(&st)]);
            for q in c.points() {
                let mut gens: Vec<CurveAut> = a
                    .stabilizer_elements()
                    .iter()
                    .map(|rho| CurveAut::translation(&c, &rho.apply_point(q)))
                    .collect();
                gens.extend(a.elements().iter().cloned());
                let ta = closure(&c, &gens);
                assert_eq!(ta.order() % a.order(), 0);
                let m = c.order_of_point(q);
                let in_span = (0..m).any(|k| c.scalar_mul(k as i64, q) == st.apply_point(q));
                if in_span {
                    assert_eq!(ta.order(), a.order() * m);
                }
            }
        }
    }

    #[test]
    fn involution_negates_points() {
        for curve in [
            j0_curve(2),
            find_maximal_curve(&gf(3, 2)).unwrap(),
            find_maximal_curve(&gf(5, 2)).unwrap(),
        ] {
            let inv = involution(&curve);
            assert_eq!(inv.order(), 2);
            for p in curve.points() {
                assert_eq!(inv.apply_point(p), curve.neg(p));
                assert_eq!(inv.apply_point(&inv.apply_point(p)), *p);
            }
        }
        // Characteristic 2, j = 0: y -> y + 1.
        assert_eq!(involution(&j0_curve(2)).params(), (1, 0, 0, 1));
        // Odd characteristic with a1 = a3 = 0: y -> -y.
        let c9 = find_maximal_curve(&gf(3, 2)).unwrap();
        let inv9 = involution(&c9);
        assert!(inv9.s().is_zero() && inv9.t().is_zero());
        assert_eq!(*inv9.u(), -&c9.field().one());
    }

    #[test]
    fn orbit_partitions() {
        let c = j0_curve(6);
        let f = c.field().clone();
        // Trivial group: all orbits are singletons.
        assert_eq!(Subgroup::trivial(&c).orbits().len(), 81);

        // The order-9 abelian group: 8 free orbits, 9 ramified points.
        let q = c.affine(f.zero(), f.one()).unwrap();
        let u = f
            .roots_of_unity(3)
            .into_iter()
            .find(|u| !u.is_one())
            .unwrap();
        let sigma = StabAut::new(&c, u, f.zero(), f.zero(), f.zero()).unwrap();
        let g = closure(
            &c,
            &[CurveAut::translation(&c, &q), CurveAut::from_stab(&sigma)],
        );
        let orbits = g.orbits();
        let free = orbits.iter().filter(|o| o.len() == 9).count();
        let ramified: usize = orbits.iter().filter(|o| o.len() < 9).map(Vec::len).sum();
        assert_eq!(free, 8);
        assert_eq!(ramified, 9);
        for o in &orbits {
            assert_eq!(g.order() % o.len() as u64, 0);
        }
        // Ramified points stay within (r+1) + 2|T|.
        assert!(ramified as u64 <= g.order() + 2 * 3);
    }

    #[test]
    fn abelian_pair_matches_closure_abelianness() {
        let c = j0_curve(2);
        for st in enumerate_stabilizer(&c).unwrap() {
            for q in c.points() {
                let g = closure(
                    &c,
                    &[CurveAut::translation(&c, q), CurveAut::from_stab(&st)],
                );
                assert_eq!(abelian_pair(q, &st), g.is_abelian());
            }
        }
    }

    #[test]
    fn max_abelian_orders() {
        assert_eq!(max_abelian_scan(&j0_curve(2)).unwrap(), 9);
        assert_eq!(max_abelian_scan(&j0_curve(4)).unwrap(), 9);
        // Only the involution: any fixed point is 2-torsion, so the
        // abelian order is at most 4.
        let f = gf(5, 1);
        let z = f.zero();
        let c = Curve::new(&f, [z.clone(), z.clone(), z.clone(), f.one(), f.one()]).unwrap();
        assert!(max_abelian_scan(&c).unwrap() <= 4);
    }

    #[test]
    fn scan_cap_is_enforced() {
        // A curve with a1 != 0 over a large field misses every fast path.
        let f = gf(2, 13); // q = 8192 > 4096
        let one = f.one();
        let z = f.zero();
        let c = Curve::new(&f, [one.clone(), z.clone(), z.clone(), z.clone(), one]).unwrap();
        assert_eq!(
            enumerate_stabilizer(&c).unwrap_err(),
            AutError::FieldTooLargeForScan { q: 8192, cap: 4096 }
        );
    }
}
