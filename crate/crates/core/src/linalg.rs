//! Exact rational linear algebra: row reduction, nullspaces, and a small
//! phase-one simplex for nonnegative feasibility.

use num_traits::{One, Signed, Zero};

use crate::rational::Rat;

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<Rat>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, x) in row.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[&[Rat]], dim: usize) -> Self {
        let mut m = Self::zeros(dim, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..dim {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(Rat::zero(), |acc, j| {
                    if v[j].is_zero() {
                        acc
                    } else {
                        acc + &self[(i, j)] * &v[j]
                    }
                })
            })
            .collect()
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self[(r, c)].recip();
            for j in c..self.cols {
                let x = &self[(r, j)] * &inv;
                self[(r, j)] = x;
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let f = self[(i, c)].clone();
                for j in c..self.cols {
                    if self[(r, j)].is_zero() {
                        continue;
                    }
                    let x = &self[(r, j)] * &f;
                    self[(i, j)] -= x;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of `{x : A x = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Rat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![Rat::zero(); self.cols];
                x[f] = Rat::one();
                for (r, &p) in pivots.iter().enumerate() {
                    x[p] = -m[(r, f)].clone();
                }
                x
            })
            .collect()
    }

    /// Unique solution of `A x = b` when `A` has full column rank and the
    /// system is consistent.
    pub fn solve_unique(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) || pivots.len() != self.cols {
            return None;
        }
        Some((0..self.cols).map(|r| aug[(r, self.cols)].clone()).collect())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rat;

    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

/// Incrementally intersected nullspace `{c : M_1 c = 0, M_2 c = 0, ...}`,
/// stored as a basis (columns of `basis`).
#[derive(Clone, Debug)]
pub struct NullspaceTracker {
    dim: usize,
    basis: Vec<Vec<Rat>>,
}

impl NullspaceTracker {
    pub fn full(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| {
                let mut e = vec![Rat::zero(); dim];
                e[i] = Rat::one();
                e
            })
            .collect();
        Self { dim, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Vec<Rat>] {
        &self.basis
    }

    /// Restricts to vectors `c` in the current space with `M c = 0`.
    pub fn intersect(&mut self, m: &Matrix) {
        if self.basis.is_empty() {
            return;
        }
        assert_eq!(m.cols, self.dim);
        let cols: Vec<&[Rat]> = self.basis.iter().map(Vec::as_slice).collect();
        let n = Matrix::from_columns(&cols, self.dim);
        let mn = m.mul(&n);
        if mn.data.iter().all(Zero::is_zero) {
            return;
        }
        let kernel = mn.nullspace();
        self.basis = kernel.iter().map(|y| n.mul_vec(y)).collect();
    }
}

/// Outcome of [`nonnegative_solve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vec<Rat>),
    Infeasible,
}

/// Finds `x >= 0` with `A x = b` by phase-one simplex with Bland's rule.
pub fn nonnegative_solve(a: &Matrix, b: &[Rat]) -> Feasibility {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(b.len(), m);
    // tableau rows: [A | I | b] with rows negated where b < 0
    let width = n + m + 1;
    let mut t = Matrix::zeros(m + 1, width);
    for i in 0..m {
        let flip = b[i].is_negative();
        for j in 0..n {
            t[(i, j)] = if flip { -a[(i, j)].clone() } else { a[(i, j)].clone() };
        }
        t[(i, n + i)] = Rat::one();
        t[(i, width - 1)] = b[i].abs();
    }
    // objective: minimize sum of artificials, expressed in nonbasic terms
    for j in 0..width {
        if (n..n + m).contains(&j) {
            continue;
        }
        let s = (0..m).fold(Rat::zero(), |acc, i| acc + &t[(i, j)]);
        t[(m, j)] = -s;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    while let Some(enter) = (0..width - 1).find(|&j| t[(m, j)].is_negative()) {
        let mut leave: Option<(usize, Rat)> = None;
        for i in 0..m {
            if t[(i, enter)].is_positive() {
                let ratio = &t[(i, width - 1)] / &t[(i, enter)];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            break;
        };
        let inv = t[(r, enter)].recip();
        for j in 0..width {
            let x = &t[(r, j)] * &inv;
            t[(r, j)] = x;
        }
        for i in 0..=m {
            if i == r || t[(i, enter)].is_zero() {
                continue;
            }
            let f = t[(i, enter)].clone();
            for j in 0..width {
                if t[(r, j)].is_zero() {
                    continue;
                }
                let x = &t[(r, j)] * &f;
                t[(i, j)] -= x;
            }
        }
        basis[r] = enter;
    }
    if !t[(m, width - 1)].is_zero() {
        return Feasibility::Infeasible;
    }
    let mut x = vec![Rat::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[(i, width - 1)].clone();
        }
    }
    debug_assert_eq!(a.mul_vec(&x), b.to_vec());
    Feasibility::Feasible(x)
}
