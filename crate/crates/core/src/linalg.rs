//! Exact linear algebra: sparse rational elimination and small Laurent matrices.

use std::collections::BTreeMap;

use crate::coeffring::{LaurentPoly, Rational};
use crate::error::{Error, Result};

pub type SparseRow = BTreeMap<usize, Rational>;

/// Incremental row echelon form over the rationals. Each stored row is
/// normalized so that its leading column carries coefficient 1.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseRow>,
}

fn axpy(row: &mut SparseRow, c: &Rational, other: &SparseRow) {
    for (k, v) in other {
        let delta = c * v;
        let e = row.entry(*k).or_insert_with(Rational::zero);
        *e += &delta;
        if e.is_zero() {
            row.remove(k);
        }
    }
}

impl Echelon {
    pub fn new() -> Echelon {
        Echelon::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduce `row` against the stored pivots.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        let mut from = 0usize;
        loop {
            let next = row
                .range(from..)
                .map(|(k, _)| *k)
                .find(|k| self.pivots.contains_key(k));
            let Some(col) = next else { break };
            let c = -row[&col].clone();
            axpy(&mut row, &c, &self.pivots[&col]);
            from = col + 1;
        }
        row
    }

    /// Insert a row; returns its leading column if it was independent.
    pub fn insert(&mut self, row: SparseRow) -> Option<usize> {
        let row = self.reduce(row);
        let (&lead, c) = row.iter().next()?;
        let inv = c.recip().expect("nonzero leading entry");
        let row: SparseRow = row.iter().map(|(k, v)| (*k, v * &inv)).collect();
        self.pivots.insert(lead, row);
        Some(lead)
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = &usize> {
        self.pivots.keys()
    }

    /// Back substitution with free variables set to zero. Entries of column
    /// `rhs_col` are read as the right-hand side.
    pub fn back_substitute(
        &self,
        rhs_col: usize,
        free: &BTreeMap<usize, Rational>,
    ) -> BTreeMap<usize, Rational> {
        let mut x: BTreeMap<usize, Rational> = free.clone();
        for (&col, row) in self.pivots.iter().rev() {
            if col == rhs_col {
                continue;
            }
            let mut v = row.get(&rhs_col).cloned().unwrap_or_else(Rational::zero);
            for (k, c) in row.range(col + 1..) {
                if *k == rhs_col {
                    continue;
                }
                if let Some(xk) = x.get(k) {
                    v -= &(c * xk);
                }
            }
            if !v.is_zero() {
                x.insert(col, v);
            } else {
                x.remove(&col);
            }
        }
        x
    }
}

/// Solution of `A x = b` for sparse `A` given as columns.
#[derive(Debug, Clone)]
pub struct LinearSolve {
    pub solution: Option<BTreeMap<usize, Rational>>,
    pub rank: usize,
    pub ncols: usize,
}

impl LinearSolve {
    pub fn nullity(&self) -> usize {
        self.ncols - self.rank
    }
}

/// Solve `Σ_j x_j · columns[j] = rhs` where vectors are sparse maps from row
/// keys to rationals.
pub fn solve_columns<K: Ord + Clone>(
    columns: &[BTreeMap<K, Rational>],
    rhs: &BTreeMap<K, Rational>,
) -> LinearSolve {
    let mut row_index: BTreeMap<K, usize> = BTreeMap::new();
    for col in columns.iter().chain(std::iter::once(rhs)) {
        for k in col.keys() {
            let n = row_index.len();
            row_index.entry(k.clone()).or_insert(n);
        }
    }
    let ncols = columns.len();
    let rhs_col = ncols;
    let mut rows: Vec<SparseRow> = vec![SparseRow::new(); row_index.len()];
    for (j, col) in columns.iter().enumerate() {
        for (k, v) in col {
            if !v.is_zero() {
                rows[row_index[k]].insert(j, v.clone());
            }
        }
    }
    for (k, v) in rhs {
        if !v.is_zero() {
            rows[row_index[k]].insert(rhs_col, v.clone());
        }
    }
    let mut ech = Echelon::new();
    let mut consistent = true;
    for row in rows {
        if let Some(lead) = ech.insert(row) {
            if lead == rhs_col {
                consistent = false;
            }
        }
    }
    let rank = ech.pivot_columns().filter(|c| **c != rhs_col).count();
    let solution = consistent.then(|| ech.back_substitute(rhs_col, &BTreeMap::new()));
    LinearSolve {
        solution,
        rank,
        ncols,
    }
}

/// Basis of the rational nullspace of the rows (vectors of length `ncols`).
pub fn nullspace(rows: &[SparseRow], ncols: usize) -> Vec<Vec<Rational>> {
    let mut ech = Echelon::new();
    for r in rows {
        ech.insert(r.clone());
    }
    let pivots: std::collections::BTreeSet<usize> = ech.pivot_columns().copied().collect();
    let mut basis = Vec::new();
    for f in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut free = BTreeMap::new();
        free.insert(f, Rational::one());
        let x = ech.back_substitute(usize::MAX, &free);
        let mut v = vec![Rational::zero(); ncols];
        for (k, c) in x {
            v[k] = c;
        }
        basis.push(v);
    }
    basis
}

/// Rank of a dense rational matrix.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut ech = Echelon::new();
    for r in rows {
        let row: SparseRow = r
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(k, v)| (k, v.clone()))
            .collect();
        ech.insert(row);
    }
    ech.rank()
}

/// Inverse of a square rational matrix.
pub fn rational_inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| {
                if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|r| !a[*r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip().ok()?;
        for v in a[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let c = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (v, pv) in a[r].iter_mut().zip(pivot_row.iter()) {
                    *v = &*v - &(&c * pv);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Determinant by cofactor expansion (small matrices only).
pub fn laurent_det(m: &[Vec<LaurentPoly>]) -> LaurentPoly {
    let n = m.len();
    assert!(n > 0);
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = LaurentPoly::zero(m[0][0].ctx());
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<LaurentPoly>> = m[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * &laurent_det(&minor);
        acc = if j % 2 == 0 {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    acc
}

/// Inverse of a Laurent matrix whose determinant is a monomial unit.
pub fn laurent_inverse(m: &[Vec<LaurentPoly>]) -> Result<Vec<Vec<LaurentPoly>>> {
    let n = m.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let det = laurent_det(m);
    let dinv = det
        .unit_invert()
        .map_err(|_| Error::NotAUnit(format!("determinant `{det}` is not a monomial unit")))?;
    if n == 1 {
        return Ok(vec![vec![dinv]]);
    }
    let mut inv = vec![vec![LaurentPoly::zero(m[0][0].ctx()); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<LaurentPoly>> = m
                .iter()
                .enumerate()
                .filter(|(r, _)| *r != i)
                .map(|(_, r)| {
                    r.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let cof = &laurent_det(&minor) * &dinv;
            inv[j][i] = if (i + j) % 2 == 0 { cof } else { -&cof };
        }
    }
    Ok(inv)
}

pub fn laurent_matmul(a: &[Vec<LaurentPoly>], b: &[Vec<LaurentPoly>]) -> Vec<Vec<LaurentPoly>> {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let ctx = a[0][0].ctx().clone();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = LaurentPoly::zero(&ctx);
                    for l in 0..k {
                        acc = &acc + &(&a[i][l] * &b[l][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j].clone()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::PolyCtx;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn solve_small_system() {
        let mut c0 = BTreeMap::new();
        c0.insert(0, r(1));
        c0.insert(1, r(1));
        let mut c1 = BTreeMap::new();
        c1.insert(1, r(2));
        let mut b = BTreeMap::new();
        b.insert(0, r(3));
        b.insert(1, r(7));
        let s = solve_columns(&[c0.clone(), c1.clone()], &b);
        let x = s.solution.clone().unwrap();
        assert_eq!(x[&0], r(3));
        assert_eq!(x[&1], r(2));
        assert_eq!(s.nullity(), 0);
        let mut bad = BTreeMap::new();
        bad.insert(5, r(1));
        assert!(solve_columns(&[c0, c1], &bad).solution.is_none());
    }

    #[test]
    fn nullspace_basis() {
        let row: SparseRow = [(0, r(1)), (1, r(-1))].into_iter().collect();
        let ns = nullspace(&[row], 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert_eq!(&v[0] - &v[1], Rational::zero());
        }
    }

    #[test]
    fn laurent_matrix_inverse() {
        let ctx = PolyCtx::new(vec!["u".into(), "v".into()], &["u"]).unwrap();
        let u = LaurentPoly::var(&ctx, 0);
        let v = LaurentPoly::var(&ctx, 1);
        let uinv = u.unit_invert().unwrap();
        let m = vec![
            vec![-&(&uinv * &uinv), LaurentPoly::zero(&ctx)],
            vec![-&(&v * &(&uinv * &uinv)), uinv.clone()],
        ];
        let inv = laurent_inverse(&m).unwrap();
        let id = laurent_matmul(&m, &inv);
        assert_eq!(id[0][0], LaurentPoly::one(&ctx));
        assert!(id[0][1].is_zero());
        assert!(id[1][0].is_zero());
        assert_eq!(id[1][1], LaurentPoly::one(&ctx));
    }
}
