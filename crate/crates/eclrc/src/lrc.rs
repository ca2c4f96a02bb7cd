//! Optimal locally repairable codes from automorphism subgroups.
//!
//! Given a subgroup G = T·A of the automorphism group with |G| = r + 1
//! and A nontrivial, the rational points split into free G-orbits
//! ("fibers") of size r + 1 plus a few ramified points. The code
//! evaluates the space
//!
//!   V = span{ z^j : j < t } + span{ z^j w_i : j < t-1, 1 <= i < r }
//!
//! at m fibers, where z generates the fixed field (poles exactly on one
//! designated fiber, zeros of order |A| on the T-orbit of O) and the w_i
//! have pole divisors P_1 + ... + P_{i+1} on that pole fiber. Every r x r
//! minor of the per-fiber evaluation matrix is invertible, which makes
//! every coordinate recoverable from the other r coordinates of its
//! fiber. The pole fiber itself can be used as an evaluation block after
//! normalizing by z^{1-t}. The resulting [n = m(r+1), k = rt-r+1,
//! d = n-(t-1)(r+1)] codes meet the Singleton-type bound
//! d = n - k - ceil(k/r) + 2 with equality.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autgroup::{self, closure, CurveAut, StabAut, Subgroup};
use crate::curve::{self, Curve, Point};
use crate::funcfield::{self, pullback, riemann_roch_basis, Divisor, FuncElem, Value};
use crate::gf::{self, Field, FieldElement};
use crate::linalg;

/// Exact-distance enumeration is capped at q^k <= 2^24 messages.
pub const DISTANCE_ENUM_CAP: u128 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LrcError {
    #[error("no function with the required divisor exists ({0})")]
    NoSuchFunction(String),
    #[error("constructed function is not invariant under the subgroup")]
    InvarianceFailure,
    #[error("pole functions are linearly dependent on the check fiber")]
    DependenceDetected,
    #[error("only {available} usable fibers are available")]
    NotEnoughFibers { available: usize },
    #[error("parameter violation: {0}")]
    ParameterViolation(String),
    #[error("a repair-matrix minor is singular on fiber {group}")]
    MinorSingular { group: usize },
    #[error("repair group {group} has more than one erasure")]
    TooManyErasures { group: usize },
    #[error("coordinate {index} is not erased")]
    NotErased { index: usize },
    #[error("erasure pattern is not decodable (rank deficiency)")]
    Undecodable,
    #[error("message space of size {space} exceeds the enumeration cap {cap}")]
    SearchSpaceTooLarge { space: u128, cap: u128 },
}

/// One completely split fiber: a free G-orbit, canonically sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fiber {
    points: Vec<Point>,
}

impl Fiber {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Scales f so that its first nonzero canonical coefficient is 1.
fn normalize_leading(f: &FuncElem) -> FuncElem {
    let (u, v, _) = f.parts();
    let lead = u
        .coeffs()
        .iter()
        .chain(v.coeffs().iter())
        .find(|c| !c.is_zero())
        .expect("normalizing the zero function")
        .clone();
    let c = FuncElem::constant(f.curve(), lead.inv());
    &c * f
}

/// Builds the fixed-field generator z: poles exactly on the given free
/// fiber, zeros of order |A| at each point of the T-orbit of O, invariant
/// under the subgroup.
pub fn construct_z(
    curve: &Curve,
    group: &Subgroup,
    o_orbit: &[Point],
    pole_fiber: &[Point],
) -> Result<FuncElem, LrcError> {
    let a_order = group.stabilizer_elements().len() as i64;
    if a_order < 2 {
        return Err(LrcError::NoSuchFunction(
            "the stabilizer part of the subgroup is trivial".into(),
        ));
    }
    let mut d = Divisor::new(curve);
    for p in pole_fiber {
        d.add_to(p, 1);
    }
    for p in o_orbit {
        d.add_to(p, -a_order);
    }
    if d.degree() != 0 {
        return Err(LrcError::NoSuchFunction(format!(
            "fiber size {} does not match |A| x |T| = {}",
            pole_fiber.len(),
            a_order as usize * o_orbit.len()
        )));
    }
    let basis = riemann_roch_basis(curve, &d);
    if basis.len() != 1 {
        return Err(LrcError::NoSuchFunction(format!(
            "the divisor is not principal (space dimension {})",
            basis.len()
        )));
    }
    let z = normalize_leading(&basis[0]);

    // Certify the divisor exactly.
    let expected = -&d;
    let got = z
        .principal_divisor()
        .map_err(|_| LrcError::NoSuchFunction("non-rational support".into()))?;
    if got != expected {
        return Err(LrcError::NoSuchFunction(
            "constructed divisor does not match".into(),
        ));
    }
    // Certify invariance under every generator.
    for gen in group.generators() {
        if pullback(&z, gen) != z {
            return Err(LrcError::InvarianceFailure);
        }
    }
    Ok(z)
}

/// Builds w_0 = 1 and, for 1 <= i <= r-1, a function with pole divisor
/// exactly P_1 + ... + P_{i+1}; selection is the first coefficient vector
/// in lexicographic order that meets every pole condition.
pub fn construct_w(curve: &Curve, pole_fiber: &[Point]) -> Result<Vec<FuncElem>, LrcError> {
    let field = curve.field();
    let r = pole_fiber.len() - 1;
    let mut out = vec![FuncElem::one(curve)];
    for i in 1..r {
        let mut d = Divisor::new(curve);
        for p in &pole_fiber[..=i] {
            d.add_to(p, 1);
        }
        if (i + 1) as u64 >= field.q() {
            // The existence count (i+1) q^i < q^(i+1) needs i + 1 < q.
            return Err(LrcError::NoSuchFunction(format!(
                "fiber size {} reaches the field size",
                pole_fiber.len()
            )));
        }
        let basis = riemann_roch_basis(curve, &d);
        // Residues: coefficient of t^{-1} of each basis element at each
        // prescribed pole, one shared expansion per point.
        let mut residues: Vec<Vec<FieldElement>> = vec![Vec::new(); basis.len()];
        for p in &pole_fiber[..=i] {
            for (j, s) in funcfield::expand_batch(&basis, p, 0).iter().enumerate() {
                residues[j].push(match s.valuation() {
                    Some(-1) => s.coeff(-1),
                    _ => field.zero(),
                });
            }
        }
        let digits = lex_first_pole_exact(field, &residues, i + 1).ok_or_else(|| {
            LrcError::NoSuchFunction(format!("no pole-exact combination for w_{i}"))
        })?;
        let mut w = FuncElem::zero(curve);
        for (j, &dj) in digits.iter().enumerate() {
            if dj != 0 {
                w = &w + &(&FuncElem::constant(curve, field.element(dj)) * &basis[j]);
            }
        }
        for p in &pole_fiber[..=i] {
            debug_assert_eq!(w.valuation(p), -1);
        }
        out.push(w);
    }
    Ok(out)
}

/// Lexicographically first coefficient vector whose residue sums are all
/// nonzero, fixed digit by digit (most significant first).
///
/// A partial assignment extends to a valid vector exactly when, for each
/// pole point, the running sum is already nonzero or some remaining basis
/// element still has a residue there: the number of pole conditions is
/// below q, so fewer than q^free completions can be excluded.
fn lex_first_pole_exact(
    field: &Field,
    residues: &[Vec<FieldElement>],
    conditions: usize,
) -> Option<Vec<u64>> {
    let dim = residues.len();
    debug_assert!((conditions as u64) < field.q());
    let mut digits = vec![0u64; dim];
    let mut partial = vec![field.zero(); conditions];
    for pos in 0..dim {
        let mut chosen = None;
        for v in 0..field.q() {
            let ve = field.element(v);
            let sums: Vec<FieldElement> = (0..conditions)
                .map(|k| &partial[k] + &(&ve * &residues[pos][k]))
                .collect();
            let feasible = (0..conditions).all(|k| {
                !sums[k].is_zero()
                    || residues[pos + 1..].iter().any(|row| !row[k].is_zero())
            });
            if feasible {
                chosen = Some((v, sums));
                break;
            }
        }
        let (v, sums) = chosen?;
        digits[pos] = v;
        partial = sums;
    }
    Some(digits)
}

/// Free G-orbits disjoint from the zeros and poles of z, in canonical
/// order; the first m are returned.
pub fn select_fibers(
    curve: &Curve,
    group: &Subgroup,
    z: &FuncElem,
    m: usize,
) -> Result<Vec<Fiber>, LrcError> {
    let support: BTreeSet<usize> = z
        .principal_divisor()
        .map_err(|_| LrcError::NoSuchFunction("z has non-rational support".into()))?
        .support()
        .map(|p| curve.point_index(&p))
        .collect();
    let size = group.order() as usize;
    let fibers: Vec<Fiber> = group
        .orbits()
        .into_iter()
        .filter(|o| o.len() == size)
        .filter(|o| o.iter().all(|p| !support.contains(&curve.point_index(p))))
        .map(|points| Fiber { points })
        .collect();
    if fibers.len() < m {
        return Err(LrcError::NotEnoughFibers { available: fibers.len() });
    }
    Ok(fibers.into_iter().take(m).collect())
}

/// Optimality report produced by [`LrcCode::verify_optimal`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub d_design: u64,
    pub singleton_bound: u64,
    pub identity_holds: bool,
    pub d_exact: Option<u64>,
    pub witness_weight: u64,
    pub certification: String,
}

/// A built locally repairable code.
pub struct LrcCode {
    curve: Curve,
    group: Subgroup,
    t: usize,
    m: usize,
    include_pole_fiber: bool,
    r: usize,
    n: usize,
    k: usize,
    d_design: u64,
    z: FuncElem,
    w: Vec<FuncElem>,
    basis: Vec<FuncElem>,
    pole_fiber: Fiber,
    plain_fibers: Vec<Fiber>,
    fiber_values: Vec<FieldElement>,
    columns: Vec<Point>,
    repair_groups: Vec<Vec<usize>>,
    /// Per repair group, the (r+1) x r local evaluation matrix.
    local_matrices: Vec<Vec<Vec<FieldElement>>>,
    matrix: Vec<Vec<FieldElement>>,
}

/// Builds the code on m fibers; when `include_pole_fiber` is set, the
/// last of the m fibers is the pole fiber of z, evaluated through the
/// z^{1-t} normalization.
pub fn build_code(
    curve: &Curve,
    group: &Subgroup,
    t: usize,
    m: usize,
    include_pole_fiber: bool,
) -> Result<LrcCode, LrcError> {
    let field = curve.field().clone();
    let t_points = group.translation_points();
    let a_elems = group.stabilizer_elements();
    let r_plus_1 = group.order() as usize;
    if t_points.len() * a_elems.len() != r_plus_1 {
        return Err(LrcError::ParameterViolation(
            "the subgroup does not factor as translations times stabilizers".into(),
        ));
    }
    if a_elems.len() < 2 {
        return Err(LrcError::ParameterViolation(
            "the stabilizer part must be nontrivial".into(),
        ));
    }
    if r_plus_1 as u64 > field.q() {
        return Err(LrcError::ParameterViolation(format!(
            "group order {} exceeds the field size {}",
            r_plus_1,
            field.q()
        )));
    }
    if t < 1 || t > m {
        return Err(LrcError::ParameterViolation(format!(
            "need 1 <= t <= m, got t={t}, m={m}"
        )));
    }
    let r = r_plus_1 - 1;

    // The pole fiber is the first free orbit in canonical order.
    let free: Vec<Vec<Point>> = group
        .orbits()
        .into_iter()
        .filter(|o| o.len() == r_plus_1)
        .collect();
    let Some(pole_points) = free.first() else {
        return Err(LrcError::NotEnoughFibers { available: 0 });
    };
    let pole_fiber = Fiber { points: pole_points.clone() };

    let z = construct_z(curve, group, &t_points, &pole_fiber.points)?;
    let plain_needed = m - usize::from(include_pole_fiber);
    let plain_fibers = select_fibers(curve, group, &z, plain_needed)?;
    let w = construct_w(curve, &pole_fiber.points)?;

    // z takes a constant, finite, per-fiber-distinct value on each plain
    // fiber.
    let mut fiber_values = Vec::with_capacity(plain_fibers.len());
    for fiber in &plain_fibers {
        let beta = match z.evaluate(&fiber.points[0]) {
            Value::Finite(c) => c,
            Value::Pole => {
                return Err(LrcError::ParameterViolation(
                    "selected fiber meets the poles of z".into(),
                ))
            }
        };
        for p in &fiber.points[1..] {
            if z.evaluate(p) != Value::Finite(beta.clone()) {
                return Err(LrcError::InvarianceFailure);
            }
        }
        if fiber_values.contains(&beta) {
            return Err(LrcError::ParameterViolation(
                "two fibers share the same z-value".into(),
            ));
        }
        fiber_values.push(beta);
    }

    // V basis: z powers, then z^j w_i blocks (i outer, j inner).
    let mut basis = Vec::new();
    let mut zpow = vec![FuncElem::one(curve)];
    for _ in 1..t.max(1) {
        zpow.push(&zpow[zpow.len() - 1] * &z);
    }
    for j in 0..t {
        basis.push(zpow[j].clone());
    }
    for wi in w.iter().skip(1) {
        for j in 0..t.saturating_sub(1) {
            basis.push(&zpow[j] * wi);
        }
    }
    let k = basis.len();
    debug_assert_eq!(k, r * t - r + 1);

    // Column layout: plain fibers first, pole fiber last.
    let mut columns: Vec<Point> = Vec::new();
    let mut repair_groups: Vec<Vec<usize>> = Vec::new();
    for fiber in &plain_fibers {
        let start = columns.len();
        columns.extend(fiber.points.iter().cloned());
        repair_groups.push((start..columns.len()).collect());
    }
    if include_pole_fiber {
        let start = columns.len();
        columns.extend(pole_fiber.points.iter().cloned());
        repair_groups.push((start..columns.len()).collect());
    }
    let n = columns.len();
    debug_assert_eq!(n, m * r_plus_1);

    // Generator matrix, built column by column through shared local
    // expansions. Plain columns evaluate the basis directly.
    let plain_cols = plain_fibers.len() * r_plus_1;
    let mut matrix = vec![Vec::with_capacity(n); k];
    for p in &columns[..plain_cols] {
        let vals = funcfield::evaluate_batch(&basis, p);
        for (row, val) in matrix.iter_mut().zip(vals) {
            match val {
                Value::Finite(c) => row.push(c),
                Value::Pole => return Err(LrcError::InvarianceFailure),
            }
        }
    }

    // The pole fiber sees z^{1-t} f. Powers z^{j-(t-1)} with j < t-1
    // vanish there and z^0 = 1, so the only computed values are the
    // normalized pole functions w_i / z (which also form the local
    // repair matrix of that fiber).
    let z_inv = z.inv();
    let pole_local: Vec<Vec<FieldElement>> = if include_pole_fiber {
        let normalized: Vec<FuncElem> = w.iter().map(|wi| wi * &z_inv).collect();
        pole_fiber
            .points
            .iter()
            .map(|p| {
                let vals = funcfield::evaluate_batch(&normalized, p);
                vals.into_iter()
                    .enumerate()
                    .map(|(i, v)| if i == 0 { field.one() } else { v.unwrap_finite() })
                    .collect()
            })
            .collect()
    } else {
        Vec::new()
    };
    if include_pole_fiber {
        // Basis order: z^j (j < t), then blocks z^j w_i (j < t-1).
        for (bi, row) in matrix.iter_mut().enumerate() {
            for (pi, _) in pole_fiber.points.iter().enumerate() {
                let entry = if bi < t {
                    // z^{bi}: survives only at the top power.
                    if bi == t - 1 {
                        field.one()
                    } else {
                        field.zero()
                    }
                } else {
                    let i = (bi - t) / (t - 1) + 1;
                    let j = (bi - t) % (t - 1);
                    if j == t - 2 {
                        pole_local[pi][i].clone()
                    } else {
                        field.zero()
                    }
                };
                row.push(entry);
            }
        }
    }
    for (bi, row) in matrix.iter().enumerate() {
        debug_assert_eq!(row.len(), n, "basis row {bi}");
    }

    // Per-fiber local matrices: columns w_0..w_{r-1} on plain fibers and
    // {1, w_1/z, ..., w_{r-1}/z} on the pole fiber.
    let mut local_matrices = Vec::new();
    for fiber in &plain_fibers {
        let mat: Vec<Vec<FieldElement>> = fiber
            .points
            .iter()
            .map(|p| {
                funcfield::evaluate_batch(&w, p)
                    .into_iter()
                    .map(Value::unwrap_finite)
                    .collect()
            })
            .collect();
        local_matrices.push(mat);
    }
    if include_pole_fiber {
        local_matrices.push(pole_local);
    }

    // Independence of the w family on a spare fiber.
    if let Some(mat) = local_matrices.first() {
        let square: Vec<Vec<FieldElement>> = mat[..r].to_vec();
        if linalg::det(&field, &square).is_zero() {
            return Err(LrcError::DependenceDetected);
        }
    }
    // Every r x r minor of every local matrix must be invertible.
    for (gi, mat) in local_matrices.iter().enumerate() {
        for skip in 0..mat.len() {
            let minor: Vec<Vec<FieldElement>> = mat
                .iter()
                .enumerate()
                .filter(|(row, _)| *row != skip)
                .map(|(_, row)| row.clone())
                .collect();
            if linalg::det(&field, &minor).is_zero() {
                return Err(LrcError::MinorSingular { group: gi });
            }
        }
    }

    assert_eq!(linalg::rank(&matrix), k, "generator rank (arithmetic bug)");

    let d_design = (n - (t - 1) * r_plus_1) as u64;
    let singleton = n as u64 - k as u64 - (k as u64).div_ceil(r as u64) + 2;
    assert_eq!(d_design, singleton, "Singleton-type identity (arithmetic bug)");

    Ok(LrcCode {
        curve: curve.clone(),
        group: group.clone(),
        t,
        m,
        include_pole_fiber,
        r,
        n,
        k,
        d_design,
        z,
        w,
        basis,
        pole_fiber,
        plain_fibers,
        fiber_values,
        columns,
        repair_groups,
        local_matrices,
        matrix,
    })
}

impl LrcCode {
    pub fn curve(&self) -> &Curve {
        &self.curve
    }
    pub fn group(&self) -> &Subgroup {
        &self.group
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn t(&self) -> usize {
        self.t
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn includes_pole_fiber(&self) -> bool {
        self.include_pole_fiber
    }
    pub fn d_design(&self) -> u64 {
        self.d_design
    }
    pub fn z(&self) -> &FuncElem {
        &self.z
    }
    pub fn w(&self) -> &[FuncElem] {
        &self.w
    }
    pub fn basis(&self) -> &[FuncElem] {
        &self.basis
    }
    pub fn pole_fiber(&self) -> &Fiber {
        &self.pole_fiber
    }
    pub fn plain_fibers(&self) -> &[Fiber] {
        &self.plain_fibers
    }
    pub fn fiber_values(&self) -> &[FieldElement] {
        &self.fiber_values
    }
    pub fn columns(&self) -> &[Point] {
        &self.columns
    }
    pub fn repair_groups(&self) -> &[Vec<usize>] {
        &self.repair_groups
    }
    pub fn generator_matrix(&self) -> &[Vec<FieldElement>] {
        &self.matrix
    }
    pub fn local_matrices(&self) -> &[Vec<Vec<FieldElement>>] {
        &self.local_matrices
    }

    /// Rank of the generator matrix (always k for a sound build).
    pub fn generator_rank(&self) -> usize {
        linalg::rank(&self.matrix)
    }

    /// Re-runs the local repair-matrix check: every size-r minor of every
    /// fiber's evaluation matrix must be invertible.
    pub fn verify_local_minors(&self) -> bool {
        let field = self.curve.field();
        self.local_matrices.iter().all(|mat| {
            (0..mat.len()).all(|skip| {
                let minor: Vec<Vec<FieldElement>> = mat
                    .iter()
                    .enumerate()
                    .filter(|(row, _)| *row != skip)
                    .map(|(_, row)| row.clone())
                    .collect();
                !linalg::det(field, &minor).is_zero()
            })
        })
    }

    /// Raw generator matrix as element indices.
    pub fn matrix_indices(&self) -> Vec<Vec<u64>> {
        self.matrix
            .iter()
            .map(|row| row.iter().map(FieldElement::idx).collect())
            .collect()
    }

    /// message * generator matrix.
    pub fn encode(&self, message: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(message.len(), self.k, "message length");
        let field = self.curve.field();
        let mut out = vec![field.zero(); self.n];
        for (mi, row) in message.iter().zip(&self.matrix) {
            if mi.is_zero() {
                continue;
            }
            for (o, c) in out.iter_mut().zip(row) {
                *o = &*o + &(mi * c);
            }
        }
        out
    }

    fn group_of(&self, index: usize) -> usize {
        self.repair_groups
            .iter()
            .position(|g| g.contains(&index))
            .expect("column index out of range")
    }

    /// Recovers one erased coordinate from the other r coordinates of its
    /// repair group, by solving the local r x r system.
    pub fn repair(
        &self,
        received: &[Option<FieldElement>],
        index: usize,
    ) -> Result<FieldElement, LrcError> {
        assert_eq!(received.len(), self.n, "received word length");
        if received[index].is_some() {
            return Err(LrcError::NotErased { index });
        }
        let gi = self.group_of(index);
        let grp = &self.repair_groups[gi];
        let local = &self.local_matrices[gi];
        let field = self.curve.field();
        let mut rows = Vec::with_capacity(self.r);
        let mut rhs = Vec::with_capacity(self.r);
        let mut target_row = None;
        for (pos, &col) in grp.iter().enumerate() {
            if col == index {
                target_row = Some(pos);
                continue;
            }
            match &received[col] {
                Some(v) => {
                    rows.push(local[pos].clone());
                    rhs.push(v.clone());
                }
                None => return Err(LrcError::TooManyErasures { group: gi }),
            }
        }
        let coeffs = linalg::solve(field, &rows, &rhs).ok_or(LrcError::MinorSingular { group: gi })?;
        let trow = &local[target_row.expect("index is in its group")];
        let mut acc = field.zero();
        for (c, v) in trow.iter().zip(&coeffs) {
            acc = &acc + &(c * v);
        }
        Ok(acc)
    }

    /// Recovers the message from any pattern of at most d-1 erasures.
    pub fn erasure_decode(
        &self,
        received: &[Option<FieldElement>],
    ) -> Result<Vec<FieldElement>, LrcError> {
        assert_eq!(received.len(), self.n, "received word length");
        let field = self.curve.field();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (j, v) in received.iter().enumerate() {
            if let Some(c) = v {
                rows.push(self.matrix.iter().map(|row| row[j].clone()).collect());
                rhs.push(c.clone());
            }
        }
        linalg::solve(field, &rows, &rhs).ok_or(LrcError::Undecodable)
    }

    /// True minimum Hamming weight by exhaustive message enumeration.
    pub fn min_distance_exact(&self) -> Result<u64, LrcError> {
        let q = self.curve.field().q() as u128;
        let space = q.pow(self.k as u32);
        if space > DISTANCE_ENUM_CAP {
            return Err(LrcError::SearchSpaceTooLarge {
                space,
                cap: DISTANCE_ENUM_CAP,
            });
        }
        let field = self.curve.field();
        let raw: Vec<Vec<u32>> = self
            .matrix
            .iter()
            .map(|row| row.iter().map(|c| c.idx() as u32).collect())
            .collect();
        let mut best = self.n as u64;
        let mut msg = vec![0u32; self.k];
        for counter in 1..space {
            let mut c = counter;
            for digit in msg.iter_mut() {
                *digit = (c % q) as u32;
                c /= q;
            }
            let mut weight = 0u64;
            for j in 0..self.n {
                let mut acc = 0u32;
                for (i, &mi) in msg.iter().enumerate() {
                    if mi != 0 {
                        acc = field.raw_add(acc, field.raw_mul(mi, raw[i][j]));
                    }
                }
                if acc != 0 {
                    weight += 1;
                }
            }
            best = best.min(weight);
        }
        Ok(best)
    }

    /// The codeword of prod_{i=1}^{t-1} (z - beta_i) over distinct plain
    /// fiber values; its weight is exactly n - (t-1)(r+1).
    pub fn min_weight_witness(&self) -> Vec<FieldElement> {
        let field = self.curve.field();
        assert!(
            self.fiber_values.len() >= self.t - 1,
            "not enough plain fibers for the witness"
        );
        // Coefficients of prod (Z - beta_i) in Z.
        let mut coeffs = vec![field.one()];
        for beta in &self.fiber_values[..self.t - 1] {
            let mut next = vec![field.zero(); coeffs.len() + 1];
            for (j, c) in coeffs.iter().enumerate() {
                next[j + 1] = &next[j + 1] + c;
                next[j] = &next[j] - &(c * beta);
            }
            coeffs = next;
        }
        let mut message = vec![field.zero(); self.k];
        for (j, c) in coeffs.iter().enumerate() {
            message[j] = c.clone();
        }
        let word = self.encode(&message);
        let weight = word.iter().filter(|c| !c.is_zero()).count() as u64;
        assert_eq!(weight, self.d_design, "witness weight (arithmetic bug)");
        word
    }

    /// Minimum weight over `samples` random nonzero codewords (seeded).
    pub fn sampled_min_weight(&self, samples: usize, seed: u64) -> u64 {
        let field = self.curve.field();
        let q = field.q();
        let raw: Vec<Vec<u32>> = self
            .matrix
            .iter()
            .map(|row| row.iter().map(|c| c.idx() as u32).collect())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = self.n as u64;
        let mut msg = vec![0u32; self.k];
        for _ in 0..samples {
            loop {
                for digit in msg.iter_mut() {
                    *digit = rng.gen_range(0..q) as u32;
                }
                if msg.iter().any(|&d| d != 0) {
                    break;
                }
            }
            let mut weight = 0u64;
            for j in 0..self.n {
                let mut acc = 0u32;
                for (i, &mi) in msg.iter().enumerate() {
                    if mi != 0 {
                        acc = field.raw_add(acc, field.raw_mul(mi, raw[i][j]));
                    }
                }
                if acc != 0 {
                    weight += 1;
                }
            }
            best = best.min(weight);
        }
        best
    }

    /// Checks the Singleton-type identity and, when feasible, the exact
    /// distance; otherwise certifies by the design bound plus the
    /// explicit witness.
    pub fn verify_optimal(&self) -> OptimalityReport {
        let singleton = self.n as u64 - self.k as u64 - (self.k as u64).div_ceil(self.r as u64) + 2;
        let d_exact = self.min_distance_exact().ok();
        let witness = self.min_weight_witness();
        let witness_weight = witness.iter().filter(|c| !c.is_zero()).count() as u64;
        let certification = match d_exact {
            Some(d) if d == self.d_design => "exact-enumeration".to_string(),
            Some(_) => "exact-enumeration-mismatch".to_string(),
            None if witness_weight == self.d_design => "sandwich".to_string(),
            None => "witness-gap".to_string(),
        };
        OptimalityReport {
            n: self.n,
            k: self.k,
            r: self.r,
            d_design: self.d_design,
            singleton_bound: singleton,
            identity_holds: self.d_design == singleton,
            d_exact,
            witness_weight,
            certification,
        }
    }

    /// Serializable description sufficient to rebuild bit-identically.
    pub fn spec(&self) -> CodeSpec {
        CodeSpec {
            field: FieldSpecDto {
                p: self.curve.field().p(),
                a: self.curve.field().a(),
                modulus: self.curve.field().modulus().to_vec(),
            },
            curve: self.curve.coeff_indices().to_vec(),
            generators: self
                .group
                .generators()
                .iter()
                .map(|g| GeneratorDto {
                    point: g.translate().x().map(|x| {
                        (x.idx(), g.translate().y().unwrap().idx())
                    }),
                    stab: {
                        let (u, r, s, t) = g.stab().params();
                        [u, r, s, t]
                    },
                })
                .collect(),
            t: self.t,
            m: self.m,
            include_pole_fiber: self.include_pole_fiber,
        }
    }

    /// Serializable generator matrix with its header.
    pub fn matrix_file(&self) -> GenMatrixFile {
        GenMatrixFile {
            n: self.n,
            k: self.k,
            q: self.curve.field().q(),
            repair_groups: self.repair_groups.clone(),
            rows: self.matrix_indices(),
        }
    }
}

// ------------------------------------------------------------- file DTOs

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FieldSpecDto {
    pub p: u64,
    pub a: u32,
    pub modulus: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GeneratorDto {
    /// Affine coordinates (x, y) as indices, or None for the infinite
    /// place.
    pub point: Option<(u64, u64)>,
    /// Stabilizer parameters (u, r, s, t) as indices.
    pub stab: [u64; 4],
}

/// Everything needed to rebuild a code bit-identically.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CodeSpec {
    pub field: FieldSpecDto,
    pub curve: Vec<u64>,
    pub generators: Vec<GeneratorDto>,
    pub t: usize,
    pub m: usize,
    pub include_pole_fiber: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GenMatrixFile {
    pub n: usize,
    pub k: usize,
    pub q: u64,
    pub repair_groups: Vec<Vec<usize>>,
    pub rows: Vec<Vec<u64>>,
}

/// Rebuilds a code from its serialized description.
pub fn build_from_spec(spec: &CodeSpec) -> Result<LrcCode, LrcError> {
    let field = Field::new(spec.field.p, spec.field.a)
        .map_err(|e| LrcError::ParameterViolation(e.to_string()))?;
    if field.modulus() != spec.field.modulus.as_slice() {
        return Err(LrcError::ParameterViolation(
            "field modulus does not match the canonical modulus".into(),
        ));
    }
    if spec.curve.len() != 5 {
        return Err(LrcError::ParameterViolation("expected 5 curve coefficients".into()));
    }
    let coeffs: Vec<FieldElement> = spec.curve.iter().map(|&i| field.element(i)).collect();
    let curve = Curve::new(
        &field,
        [
            coeffs[0].clone(),
            coeffs[1].clone(),
            coeffs[2].clone(),
            coeffs[3].clone(),
            coeffs[4].clone(),
        ],
    )
    .map_err(|e| LrcError::ParameterViolation(e.to_string()))?;
    let mut gens = Vec::new();
    for g in &spec.generators {
        let point = match g.point {
            None => Point::Infinity,
            Some((x, y)) => curve
                .affine(field.element(x), field.element(y))
                .map_err(|e| LrcError::ParameterViolation(e.to_string()))?,
        };
        let stab = StabAut::new(
            &curve,
            field.element(g.stab[0]),
            field.element(g.stab[1]),
            field.element(g.stab[2]),
            field.element(g.stab[3]),
        )
        .ok_or_else(|| {
            LrcError::ParameterViolation("stabilizer parameters do not preserve the curve".into())
        })?;
        gens.push(CurveAut::new(point, stab));
    }
    let group = closure(&curve, &gens);
    build_code(&curve, &group, spec.t, spec.m, spec.include_pole_fiber)
}

// -------------------------------------------------------- parameter table

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// T any subgroup, A the involution: locality 2|T| - 1.
    Involution,
    /// T the full h-torsion, A a stabilizer subgroup: locality h^2|A| - 1.
    TorsionStabilizer,
    /// The order-9 abelian subgroup on y^2 + y = x^3 over odd powers of
    /// 4: locality 8.
    AbelianNine,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub family: Family,
    pub t_size: u64,
    pub a_size: u64,
    pub r: usize,
    pub t: usize,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub d: u64,
}

/// The subgroup a table row is built on.
fn family_group(curve: &Curve, family: Family, t_size: u64, a_size: u64) -> Option<Subgroup> {
    match family {
        Family::Involution => {
            let pts = curve.subgroup_of_order(t_size)?;
            let t_sub = closure(
                curve,
                &pts.iter()
                    .map(|p| CurveAut::translation(curve, p))
                    .collect::<Vec<_>>(),
            );
            let inv = autgroup::involution(curve);
            let a_sub = closure(curve, &[CurveAut::from_stab(&inv)]);
            autgroup::ta_subgroup(&t_sub, &a_sub).ok()
        }
        Family::TorsionStabilizer => {
            let h = curve::isqrt(t_size);
            let torsion = curve.torsion_points(h);
            if torsion.len() as u64 != t_size {
                return None;
            }
            let t_sub = closure(
                curve,
                &torsion
                    .iter()
                    .map(|p| CurveAut::translation(curve, p))
                    .collect::<Vec<_>>(),
            );
            let a_sub = autgroup::stabilizer_subgroups(curve)
                .ok()?
                .into_iter()
                .find(|s| s.order() == a_size)?;
            autgroup::ta_subgroup(&t_sub, &a_sub).ok()
        }
        Family::AbelianNine => {
            let f = curve.field();
            let q = curve.affine(f.zero(), f.one()).ok()?;
            let u = f.roots_of_unity(3).into_iter().find(|u| !u.is_one())?;
            let sigma = StabAut::new(curve, u, f.zero(), f.zero(), f.zero())?;
            Some(closure(
                curve,
                &[CurveAut::translation(curve, &q), CurveAut::from_stab(&sigma)],
            ))
        }
    }
}

/// The curve a table row is built on.
pub fn family_curve(q: u64, family: Family) -> Result<Curve, LrcError> {
    match family {
        Family::AbelianNine => {
            let (p, a) = gf::prime_power(q)
                .ok_or_else(|| LrcError::ParameterViolation("q must be a prime power".into()))?;
            let field = Field::new(p, a).map_err(|e| LrcError::ParameterViolation(e.to_string()))?;
            let z = field.zero();
            Curve::new(&field, [z.clone(), z.clone(), field.one(), z.clone(), z])
                .map_err(|e| LrcError::ParameterViolation(e.to_string()))
        }
        _ => curve::find_maximal_curve_over(q)
            .map_err(|e| LrcError::ParameterViolation(e.to_string())),
    }
}

/// Measured number of usable fibers (free orbits, the pole fiber
/// included) for a family subgroup.
fn measured_fibers(group: &Subgroup) -> usize {
    let size = group.order() as usize;
    group.orbits().into_iter().filter(|o| o.len() == size).count()
}

/// Achievable (n, k, d, r) rows over GF(q) from the three constructions,
/// with m capped by both the stated range and the measured fiber census.
pub fn parameter_table(q: u64) -> Vec<TableRow> {
    let mut rows = Vec::new();
    let Some((p, a)) = gf::prime_power(q) else {
        return rows;
    };
    let sq = curve::isqrt(q);
    if a % 2 == 0 && sq * sq == q {
        if let Ok(curve) = curve::find_maximal_curve_over(q) {
            let n_points = curve.point_count();

            // Locality 2h - 1 via the involution.
            for h in 1..=n_points {
                if n_points % h != 0 {
                    continue;
                }
                let r = 2 * h - 1;
                if r + 1 > q {
                    continue;
                }
                let Some(group) = family_group(&curve, Family::Involution, h, 2) else {
                    continue;
                };
                let theorem_m = n_points.div_ceil(r + 1).saturating_sub(2) as usize;
                let m_max = theorem_m.min(measured_fibers(&group));
                for t in 1..=m_max {
                    for m in t..=m_max {
                        rows.push(TableRow {
                            family: Family::Involution,
                            t_size: h,
                            a_size: 2,
                            r: r as usize,
                            t,
                            m,
                            n: m * (r as usize + 1),
                            k: r as usize * t - r as usize + 1,
                            d: (m * (r as usize + 1) - (t - 1) * (r as usize + 1)) as u64,
                        });
                    }
                }
            }

            // Locality h^2 |A| - 1 via torsion translations.
            let allowed_a: &[u64] = if p == 2 {
                &[2, 3, 4, 6, 8, 12, 24]
            } else if p == 3 {
                &[2, 3, 4, 6, 12]
            } else if p % 3 == 2 {
                &[2, 3, 6]
            } else if p % 4 == 3 {
                &[2, 4]
            } else {
                &[]
            };
            let present: Vec<u64> = autgroup::stabilizer_subgroups(&curve)
                .map(|subs| subs.iter().map(Subgroup::order).collect())
                .unwrap_or_default();
            for h in 1..=sq + 1 {
                if (sq + 1) % h != 0 {
                    continue;
                }
                for &a_size in allowed_a {
                    if !present.contains(&a_size) {
                        continue;
                    }
                    let r = h * h * a_size - 1;
                    if r + 1 > q {
                        continue;
                    }
                    let Some(group) =
                        family_group(&curve, Family::TorsionStabilizer, h * h, a_size)
                    else {
                        continue;
                    };
                    let num = q as i64 + 2 * sq as i64 - 2 * (h * h) as i64 - r as i64;
                    if num <= 0 {
                        continue;
                    }
                    let theorem_m = (num as u64).div_ceil(r + 1) as usize;
                    let m_max = theorem_m.min(measured_fibers(&group));
                    for t in 1..m_max {
                        for m in (t + 1)..=m_max {
                            rows.push(TableRow {
                                family: Family::TorsionStabilizer,
                                t_size: h * h,
                                a_size,
                                r: r as usize,
                                t,
                                m,
                                n: m * (r as usize + 1),
                                k: r as usize * t - r as usize + 1,
                                d: (m * (r as usize + 1) - (t - 1) * (r as usize + 1)) as u64,
                            });
                        }
                    }
                }
            }
        }
    }

    // Locality 8 over odd powers of 4.
    if p == 2 && a % 2 == 0 && (a / 2) % 2 == 1 {
        if let Ok(curve) = family_curve(q, Family::AbelianNine) {
            if let Some(group) = family_group(&curve, Family::AbelianNine, 3, 3) {
                let theorem_m = ((q + 2 * sq - 8) / 9) as usize;
                let m_max = theorem_m.min(measured_fibers(&group));
                for t in 1..=m_max {
                    for m in t..=m_max {
                        rows.push(TableRow {
                            family: Family::AbelianNine,
                            t_size: 3,
                            a_size: 3,
                            r: 8,
                            t,
                            m,
                            n: 9 * m,
                            k: 8 * t - 7,
                            d: (9 * m - 9 * t + 9) as u64,
                        });
                    }
                }
            }
        }
    }
    rows
}

/// Builds the code described by a table row (pole fiber included when the
/// plain-fiber census requires it).
pub fn build_table_row(q: u64, row: &TableRow) -> Result<LrcCode, LrcError> {
    let curve = family_curve(q, row.family)?;
    let group = family_group(&curve, row.family, row.t_size, row.a_size)
        .ok_or_else(|| LrcError::ParameterViolation("family subgroup unavailable".into()))?;
    build_code(&curve, &group, row.t, row.m, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autgroup::involution;
    use crate::curve::find_maximal_curve;

    fn gf4_like_curve(a: u32) -> Curve {
        let f = Field::new(2, a).unwrap();
        let z = f.zero();
        Curve::new(&f, [z.clone(), z.clone(), f.one(), z.clone(), z]).unwrap()
    }

    /// The order-9 subgroup of y^2 + y = x^3 over GF(64).
    fn order9_group(c: &Curve) -> Subgroup {
        let f = c.field().clone();
        let q = c.affine(f.zero(), f.one()).unwrap();
        let u = f
            .roots_of_unity(3)
            .into_iter()
            .find(|u| !u.is_one())
            .unwrap();
        let sigma = StabAut::new(c, u, f.zero(), f.zero(), f.zero()).unwrap();
        closure(c, &[CurveAut::translation(c, &q), CurveAut::from_stab(&sigma)])
    }

    /// The [72, 9, 63] code with locality 8 over GF(64).
    fn big_code() -> LrcCode {
        let c = gf4_like_curve(6);
        let g = order9_group(&c);
        build_code(&c, &g, 2, 8, true).unwrap()
    }

    /// The [8, 3, 4] code with locality 1 over GF(16).
    fn small_code() -> LrcCode {
        let c = find_maximal_curve(&Field::new(2, 4).unwrap()).unwrap();
        let inv = involution(&c);
        let g = closure(&c, &[CurveAut::from_stab(&inv)]);
        build_code(&c, &g, 3, 4, true).unwrap()
    }

    #[test]
    fn z_matches_the_explicit_invariant_over_gf64() {
        let c = gf4_like_curve(6);
        let f = c.field().clone();
        let g = order9_group(&c);
        // Pole fiber: the nine zeros of y^3 + y + 1.
        let fiber: Vec<Point> = c
            .points()
            .iter()
            .filter(|p| match p {
                Point::Infinity => false,
                Point::Affine(_, y) => {
                    (&(&(y * y) * y) + &(y + &f.one())).is_zero()
                }
            })
            .cloned()
            .collect();
        assert_eq!(fiber.len(), 9);
        let o_orbit = g.translation_points();
        assert_eq!(o_orbit.len(), 3);
        let z = construct_z(&c, &g, &o_orbit, &fiber).unwrap();
        // Compare with y(y+1)/(y^3+y+1) up to a scalar.
        let y = FuncElem::y_fn(&c);
        let one = FuncElem::one(&c);
        let expected = &(&y * &(&y + &one)) / &(&(&(&y * &y) * &y) + &(&y + &one));
        let ratio = &z / &expected;
        assert!(ratio.as_constant().is_some());
    }

    #[test]
    fn z_for_a_trivial_translation_part() {
        // T = 1, A = <involution> on the GF(16) maximal curve: z is a
        // degree-2 function of x alone, 1/(x - x(P1)) up to scalar (its
        // two simple poles sit on the fiber, its double zero at O).
        let c = find_maximal_curve(&Field::new(2, 4).unwrap()).unwrap();
        let inv = involution(&c);
        let g = closure(&c, &[CurveAut::from_stab(&inv)]);
        let orbits = g.orbits();
        let fiber = orbits.iter().find(|o| o.len() == 2).unwrap();
        let z = construct_z(&c, &g, &[Point::Infinity], fiber).unwrap();
        let x1 = fiber[0].x().unwrap();
        let expected =
            (&FuncElem::x_fn(&c) - &FuncElem::constant(&c, x1.clone())).inv();
        let ratio = &z / &expected;
        assert!(ratio.as_constant().is_some());
        assert_eq!(z.valuation(&Point::Infinity), 2);
        for p in fiber {
            assert_eq!(z.valuation(p), -1);
        }
    }

    #[test]
    fn w_lex_first_selection_matches_a_naive_scan() {
        // Cross-check the digit-by-digit lexicographic selection against
        // brute-force enumeration on small pole prefixes.
        let c = gf4_like_curve(6);
        let g = order9_group(&c);
        let orbits = g.orbits();
        let fiber = orbits.iter().find(|o| o.len() == 9).unwrap();
        let field = c.field().clone();
        let w = construct_w(&c, fiber).unwrap();
        for i in 1..=2usize {
            let mut d = Divisor::new(&c);
            for p in &fiber[..=i] {
                d.add_to(p, 1);
            }
            let basis = riemann_roch_basis(&c, &d);
            let q = field.q();
            let dim = basis.len();
            let mut naive = None;
            'outer: for counter in 0..q.pow(dim as u32) {
                let mut digits = vec![0u64; dim];
                let mut k = counter;
                for j in (0..dim).rev() {
                    digits[j] = k % q;
                    k /= q;
                }
                let mut f = FuncElem::zero(&c);
                for (j, &dj) in digits.iter().enumerate() {
                    if dj != 0 {
                        f = &f + &(&FuncElem::constant(&c, field.element(dj)) * &basis[j]);
                    }
                }
                if f.is_zero() {
                    continue;
                }
                for p in &fiber[..=i] {
                    if f.valuation(p) != -1 {
                        continue 'outer;
                    }
                }
                naive = Some(f);
                break;
            }
            assert_eq!(w[i], naive.unwrap(), "w_{i}");
        }
    }

    #[test]
    fn z_rejects_a_trivial_stabilizer() {
        let c = gf4_like_curve(2);
        let f = c.field().clone();
        let q = c.affine(f.zero(), f.one()).unwrap();
        let g = closure(&c, &[CurveAut::translation(&c, &q)]);
        let orbits = g.orbits();
        let fiber = orbits.iter().find(|o| o.len() == 3).unwrap();
        let err = construct_z(&c, &g, &g.translation_points(), fiber).unwrap_err();
        assert!(matches!(err, LrcError::NoSuchFunction(_)));
    }

    #[test]
    fn w_family_pole_divisors() {
        let c = gf4_like_curve(6);
        let g = order9_group(&c);
        let orbits = g.orbits();
        let fiber = orbits.iter().find(|o| o.len() == 9).unwrap();
        let w = construct_w(&c, fiber).unwrap();
        assert_eq!(w.len(), 8);
        assert_eq!(w[0], FuncElem::one(&c));
        for (i, wi) in w.iter().enumerate().skip(1) {
            // Pole divisor is exactly P_1 + ... + P_{i+1}.
            for (k, p) in fiber.iter().enumerate() {
                if k <= i {
                    assert_eq!(wi.valuation(p), -1, "w_{i} at fiber point {k}");
                } else {
                    assert!(wi.valuation(p) >= 0, "w_{i} finite at fiber point {k}");
                }
            }
            let mut d = Divisor::new(&c);
            for p in &fiber[..=i] {
                d.add_to(p, 1);
            }
            assert!(wi.in_riemann_roch_space(&d));
        }
    }

    #[test]
    fn w_family_for_locality_one() {
        let c = find_maximal_curve(&Field::new(2, 4).unwrap()).unwrap();
        let inv = involution(&c);
        let g = closure(&c, &[CurveAut::from_stab(&inv)]);
        let orbits = g.orbits();
        let fiber = orbits.iter().find(|o| o.len() == 2).unwrap();
        let w = construct_w(&c, fiber).unwrap();
        assert_eq!(w, vec![FuncElem::one(&c)]);
    }

    #[test]
    fn fiber_selection_excludes_the_support_of_z() {
        let c = gf4_like_curve(6);
        let g = order9_group(&c);
        let code = big_code();
        // 8 free orbits in total; one is the pole fiber, so 7 plain.
        assert_eq!(measured_fibers(&g), 8);
        assert_eq!(code.plain_fibers().len(), 7);
        let support: BTreeSet<usize> = code
            .z()
            .principal_divisor()
            .unwrap()
            .support()
            .map(|p| c.point_index(&p))
            .collect();
        for fiber in code.plain_fibers() {
            for p in fiber.points() {
                assert!(!support.contains(&c.point_index(p)));
            }
        }
        // Pairwise disjoint.
        let mut seen = BTreeSet::new();
        for fiber in code.plain_fibers() {
            for p in fiber.points() {
                assert!(seen.insert(c.point_index(p)));
            }
        }
        let err = select_fibers(&c, &g, code.z(), 100).unwrap_err();
        assert_eq!(err, LrcError::NotEnoughFibers { available: 7 });
        assert!(select_fibers(&c, &g, code.z(), 0).unwrap().is_empty());
    }

    #[test]
    fn big_code_parameters() {
        let code = big_code();
        assert_eq!((code.n(), code.k(), code.d_design()), (72, 9, 63));
        assert_eq!(code.r(), 8);
        assert_eq!(linalg::rank(&code.matrix), 9);
        // d = n - k - ceil(k/r) + 2
        assert_eq!(72 - 9 - 2 + 2, 63);
        let report = code.verify_optimal();
        assert!(report.identity_holds);
        assert_eq!(report.witness_weight, 63);
        assert_eq!(report.certification, "sandwich");
    }

    #[test]
    fn small_code_parameters_and_exact_distance() {
        let code = small_code();
        assert_eq!((code.n(), code.k(), code.d_design()), (8, 3, 4));
        assert_eq!(code.r(), 1);
        assert_eq!(code.min_distance_exact().unwrap(), 4);
        let report = code.verify_optimal();
        assert!(report.identity_holds);
        assert_eq!(report.d_exact, Some(4));
        assert_eq!(report.certification, "exact-enumeration");
    }

    #[test]
    fn degenerate_t_one_code() {
        // t = 1: V is the constants, a repetition-like code with d = n.
        let c = find_maximal_curve(&Field::new(2, 4).unwrap()).unwrap();
        let inv = involution(&c);
        let g = closure(&c, &[CurveAut::from_stab(&inv)]);
        let code = build_code(&c, &g, 1, 3, false).unwrap();
        assert_eq!(code.k(), 1);
        assert_eq!(code.d_design(), code.n() as u64);
        assert_eq!(code.min_distance_exact().unwrap(), code.n() as u64);
    }

    #[test]
    fn parameter_validation() {
        let c = find_maximal_curve(&Field::new(2, 4).unwrap()).unwrap();
        let inv = involution(&c);
        let g = closure(&c, &[CurveAut::from_stab(&inv)]);
        assert!(matches!(
            build_code(&c, &g, 5, 4, true),
            Err(LrcError::ParameterViolation(_))
        ));
        assert!(matches!(
            build_code(&c, &g, 1, 40, true),
            Err(LrcError::NotEnoughFibers { .. })
        ));
        // Translations only: the stabilizer part is trivial.
        let f = c.field().clone();
        let p = c.points()[1].clone();
        let t_only = closure(&c, &[CurveAut::translation(&c, &p)]);
        assert!(matches!(
            build_code(&c, &t_only, 1, 1, false),
            Err(LrcError::ParameterViolation(_))
        ));
        let _ = f;
    }

    #[test]
    fn encode_basics() {
        let code = small_code();
        let field = code.curve().field().clone();
        let zero_msg = vec![field.zero(); code.k()];
        assert!(code.encode(&zero_msg).iter().all(FieldElement::is_zero));
        // The unit message on z^0 = 1 evaluates to 1 on plain fibers and
        // 0 on the pole block (t >= 2).
        let mut e1 = vec![field.zero(); code.k()];
        e1[0] = field.one();
        let word = code.encode(&e1);
        let plain_cols = code.plain_fibers().len() * (code.r() + 1);
        for c in &word[..plain_cols] {
            assert!(c.is_one());
        }
        for c in &word[plain_cols..] {
            assert!(c.is_zero());
        }
    }

    #[test]
    fn exhaustive_repair_on_the_small_code() {
        let code = small_code();
        let field = code.curve().field().clone();
        let q = field.q();
        for counter in 0..q.pow(3) {
            let mut msg = Vec::new();
            let mut c = counter;
            for _ in 0..3 {
                msg.push(field.element(c % q));
                c /= q;
            }
            let word = code.encode(&msg);
            for idx in 0..code.n() {
                let mut received: Vec<Option<FieldElement>> =
                    word.iter().cloned().map(Some).collect();
                received[idx] = None;
                assert_eq!(code.repair(&received, idx).unwrap(), word[idx]);
            }
        }
    }

    #[test]
    fn sampled_repair_on_the_big_code() {
        let code = big_code();
        let field = code.curve().field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let msg: Vec<FieldElement> = (0..code.k())
                .map(|_| field.element(rng.gen_range(0..field.q())))
                .collect();
            let word = code.encode(&msg);
            for idx in 0..code.n() {
                let mut received: Vec<Option<FieldElement>> =
                    word.iter().cloned().map(Some).collect();
                received[idx] = None;
                assert_eq!(code.repair(&received, idx).unwrap(), word[idx]);
            }
        }
    }

    #[test]
    fn repair_error_paths() {
        let code = small_code();
        let field = code.curve().field().clone();
        let word = code.encode(&vec![field.zero(); code.k()]);
        let mut received: Vec<Option<FieldElement>> =
            word.iter().cloned().map(Some).collect();
        assert_eq!(
            code.repair(&received, 0).unwrap_err(),
            LrcError::NotErased { index: 0 }
        );
        received[0] = None;
        received[1] = None; // same repair group of the r = 1 code
        assert_eq!(
            code.repair(&received, 0).unwrap_err(),
            LrcError::TooManyErasures { group: 0 }
        );
    }

    #[test]
    fn erasure_decoding() {
        let code = small_code();
        let field = code.curve().field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        // Every pattern of d-1 = 3 erasures, 100 random messages.
        let n = code.n();
        let mut patterns = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for l in j + 1..n {
                    patterns.push([i, j, l]);
                }
            }
        }
        for _ in 0..100 {
            let msg: Vec<FieldElement> = (0..code.k())
                .map(|_| field.element(rng.gen_range(0..field.q())))
                .collect();
            let word = code.encode(&msg);
            for pat in &patterns {
                let mut received: Vec<Option<FieldElement>> =
                    word.iter().cloned().map(Some).collect();
                for &i in pat {
                    received[i] = None;
                }
                assert_eq!(code.erasure_decode(&received).unwrap(), msg);
            }
        }
        // No erasures decodes trivially.
        let msg: Vec<FieldElement> = (0..code.k())
            .map(|_| field.element(rng.gen_range(0..field.q())))
            .collect();
        let word = code.encode(&msg);
        let received: Vec<Option<FieldElement>> = word.iter().cloned().map(Some).collect();
        assert_eq!(code.erasure_decode(&received).unwrap(), msg);
    }

    #[test]
    fn erasure_decoding_on_the_big_code() {
        let code = big_code();
        let field = code.curve().field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let msg: Vec<FieldElement> = (0..code.k())
                .map(|_| field.element(rng.gen_range(0..field.q())))
                .collect();
            let word = code.encode(&msg);
            let mut received: Vec<Option<FieldElement>> =
                word.iter().cloned().map(Some).collect();
            // 62 = d - 1 random erasures.
            let mut positions: Vec<usize> = (0..code.n()).collect();
            for i in 0..62 {
                let j = rng.gen_range(i..positions.len());
                positions.swap(i, j);
            }
            for &i in &positions[..62] {
                received[i] = None;
            }
            assert_eq!(code.erasure_decode(&received).unwrap(), msg);
        }
    }

    #[test]
    fn minimum_weight_witness_vanishes_on_whole_fibers() {
        let code = big_code();
        let witness = code.min_weight_witness();
        let weight = witness.iter().filter(|c| !c.is_zero()).count();
        assert_eq!(weight, 63);
        // Zero coordinates form exactly one full fiber (t - 1 = 1).
        let zero_cols: Vec<usize> = witness
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_zero())
            .map(|(i, _)| i)
            .collect();
        assert_eq!(zero_cols.len(), 9);
        let grp = code.group_of(zero_cols[0]);
        assert!(zero_cols.iter().all(|&i| code.group_of(i) == grp));
    }

    #[test]
    fn search_space_cap() {
        let code = big_code();
        assert!(matches!(
            code.min_distance_exact(),
            Err(LrcError::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn minor_nonsingularity_on_every_fiber() {
        for code in [big_code(), small_code()] {
            let field = code.curve().field().clone();
            for mat in code.local_matrices() {
                assert_eq!(mat.len(), code.r() + 1);
                for skip in 0..mat.len() {
                    let minor: Vec<Vec<FieldElement>> = mat
                        .iter()
                        .enumerate()
                        .filter(|(r, _)| *r != skip)
                        .map(|(_, row)| row.clone())
                        .collect();
                    assert!(!linalg::det(&field, &minor).is_zero());
                }
            }
        }
    }

    #[test]
    fn spec_round_trip_rebuilds_bit_identically() {
        let code = small_code();
        let spec = code.spec();
        let json = serde_json::to_string(&spec).unwrap();
        let back: CodeSpec = serde_json::from_str(&json).unwrap();
        let rebuilt = build_from_spec(&back).unwrap();
        assert_eq!(rebuilt.matrix_indices(), code.matrix_indices());
        assert_eq!(rebuilt.repair_groups(), code.repair_groups());
    }

    #[test]
    fn table_over_gf64_contains_the_locality_eight_row() {
        let rows = parameter_table(64);
        assert!(rows
            .iter()
            .any(|r| (r.n, r.k, r.d, r.r) == (72, 9, 63, 8)));
        // Every listed parameter set satisfies the Singleton-type
        // identity with equality.
        for row in &rows {
            let singleton =
                row.n as u64 - row.k as u64 - (row.k as u64).div_ceil(row.r as u64) + 2;
            assert_eq!(row.d, singleton);
        }
    }

    #[test]
    fn table_over_gf16_matches_the_involution_bound() {
        let rows = parameter_table(16);
        let r1: Vec<&TableRow> = rows.iter().filter(|r| r.r == 1).collect();
        assert!(!r1.is_empty());
        // m <= ceil(25/2) - 2 = 11.
        assert_eq!(r1.iter().map(|r| r.m).max().unwrap(), 11);
    }

    #[test]
    fn table_is_empty_without_even_power_structure() {
        assert!(parameter_table(8).is_empty());
        assert!(parameter_table(2).is_empty());
    }

    #[test]
    fn table_rows_are_constructible() {
        for q in [16u64, 64] {
            let rows = parameter_table(q);
            // Spot-check a spread of rows per family.
            for family in [
                Family::Involution,
                Family::TorsionStabilizer,
                Family::AbelianNine,
            ] {
                let fam_rows: Vec<&TableRow> =
                    rows.iter().filter(|r| r.family == family).collect();
                for row in fam_rows.iter().take(2).chain(fam_rows.iter().rev().take(1)) {
                    let code = build_table_row(q, row).unwrap();
                    assert_eq!(code.n(), row.n, "{row:?}");
                    assert_eq!(code.k(), row.k, "{row:?}");
                    assert_eq!(code.d_design(), row.d, "{row:?}");
                    assert_eq!(code.r(), row.r, "{row:?}");
                }
            }
        }
    }

    #[test]
    fn sampled_weights_respect_the_design_distance() {
        let code = big_code();
        assert!(code.sampled_min_weight(2000, 0) >= 63);
        let small = small_code();
        assert!(small.sampled_min_weight(2000, 0) >= 4);
    }
}
