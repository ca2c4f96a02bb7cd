//! Exact dense linear algebra over a finite field.
//!
//! Pivoting is deterministic (first nonzero column, lowest row), so
//! reduced row echelon forms, nullspace bases and solutions are
//! reproducible across runs and platforms.

use crate::gf::{Field, FieldElement};

pub(crate) type Matrix = Vec<Vec<FieldElement>>;

/// Reduced row echelon form; returns the pivot column of each pivot row.
pub(crate) fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(pr) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, pr);
        let inv = m[row][col].inv();
        for c in col..cols {
            m[row][c] = &m[row][c] * &inv;
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..cols {
                    m[r][c] = &m[r][c] - &(&factor * &m[row][c]);
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    pivots
}

pub(crate) fn rank(m: &Matrix) -> usize {
    let mut copy = m.clone();
    rref(&mut copy).len()
}

/// Canonical basis of {x : m x = 0}, one vector per free column.
pub(crate) fn nullspace(field: &Field, m: &Matrix, cols: usize) -> Vec<Vec<FieldElement>> {
    let mut red = m.clone();
    let pivots = rref(&mut red);
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; cols];
        for &p in &pivots {
            v[p] = true;
        }
        v
    };
    let mut basis = Vec::new();
    for free in 0..cols {
        if is_pivot[free] {
            continue;
        }
        let mut vec = vec![field.zero(); cols];
        vec[free] = field.one();
        for (r, &p) in pivots.iter().enumerate() {
            vec[p] = -&red[r][free];
        }
        basis.push(vec);
    }
    basis
}

/// Unique solution of a consistent full-rank system m x = b, if any.
pub(crate) fn solve(field: &Field, m: &Matrix, b: &[FieldElement]) -> Option<Vec<FieldElement>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut aug: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    // Inconsistent if a pivot lands in the augmented column.
    if pivots.last() == Some(&cols) {
        return None;
    }
    // Underdetermined if fewer pivots than unknowns.
    if pivots.len() < cols {
        return None;
    }
    let mut x = vec![field.zero(); cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = aug[r][cols].clone();
    }
    Some(x)
}

pub(crate) fn det(field: &Field, m: &Matrix) -> FieldElement {
    let n = m.len();
    let mut a = m.clone();
    let mut acc = field.one();
    for col in 0..n {
        let Some(pr) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return field.zero();
        };
        if pr != col {
            a.swap(col, pr);
            acc = -&acc;
        }
        let pivot = a[col][col].clone();
        acc = &acc * &pivot;
        let inv = pivot.inv();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            for c in col..n {
                a[r][c] = &a[r][c] - &(&factor * &a[col][c]);
            }
        }
    }
    acc
}
