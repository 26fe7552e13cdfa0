//! Exchange matrices and matrix mutation.
//!
//! Indices are 0-based throughout the library. The JSON and CLI surfaces
//! print and accept 1-based indices.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eta::{eta_step, ShearVector};
use crate::rational::Rat;

/// A square integer matrix `B`, skew-symmetrizable by construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExchangeMatrix {
    n: usize,
    entries: Vec<i64>,
}

/// Outcome of the skew-symmetrizability search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Symmetrizer {
    /// Positive integers `d` with `d_i b_ij = -d_j b_ji`, coprime per connected component.
    Witness(Vec<u64>),
    /// A sign or ratio obstruction proves no witness exists.
    None,
    /// Some `d_i` would exceed the configured bound.
    Undecided,
}

pub const DEFAULT_SYMMETRIZER_BOUND: u64 = 1_000_000;

fn check_square(rows: &[Vec<i64>]) -> Result<usize> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::Shape(format!(
                "row {} has length {}, expected {}",
                i + 1,
                r.len(),
                n
            )));
        }
    }
    Ok(n)
}

pub fn is_skew_symmetric(rows: &[Vec<i64>]) -> Result<bool> {
    let n = check_square(rows)?;
    Ok((0..n).all(|i| (0..n).all(|j| rows[i][j] == -rows[j][i])))
}

pub fn is_skew_symmetrizable(rows: &[Vec<i64>]) -> Result<Symmetrizer> {
    is_skew_symmetrizable_bounded(rows, DEFAULT_SYMMETRIZER_BOUND)
}

/// Propagates the ratios `d_j / d_i = -b_ij / b_ji` along nonzero entries.
pub fn is_skew_symmetrizable_bounded(rows: &[Vec<i64>], bound: u64) -> Result<Symmetrizer> {
    let n = check_square(rows)?;
    for i in 0..n {
        if rows[i][i] != 0 {
            return Ok(Symmetrizer::None);
        }
        for j in 0..n {
            let (a, b) = (rows[i][j], rows[j][i]);
            if (a == 0) != (b == 0) || (a != 0 && a.signum() == b.signum()) {
                return Ok(Symmetrizer::None);
            }
        }
    }
    // ratios as (numerator, denominator) pairs of u128, reduced
    let mut d: Vec<Option<(u128, u128)>> = vec![None; n];
    let mut out = vec![0u64; n];
    for root in 0..n {
        if d[root].is_some() {
            continue;
        }
        d[root] = Some((1, 1));
        let mut comp = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            let (pi, qi) = d[i].unwrap();
            for j in 0..n {
                if rows[i][j] == 0 {
                    continue;
                }
                // d_j = d_i * |b_ij| / |b_ji|
                let num = pi * rows[i][j].unsigned_abs() as u128;
                let den = qi * rows[j][i].unsigned_abs() as u128;
                let g = num.gcd(&den);
                let cand = (num / g, den / g);
                // reduced p/q forces q | d_root and p | d_j
                if cand.0 > bound as u128 || cand.1 > bound as u128 {
                    return Ok(Symmetrizer::Undecided);
                }
                match d[j] {
                    Some(prev) => {
                        if prev != cand {
                            return Ok(Symmetrizer::None);
                        }
                    }
                    None => {
                        d[j] = Some(cand);
                        comp.push(j);
                        queue.push_back(j);
                    }
                }
            }
        }
        let l = comp.iter().fold(1u128, |acc, &i| acc.lcm(&d[i].unwrap().1));
        let scaled: Vec<u128> = comp
            .iter()
            .map(|&i| {
                let (p, q) = d[i].unwrap();
                p * (l / q)
            })
            .collect();
        let g = scaled.iter().fold(0u128, |acc, x| acc.gcd(x));
        for (&i, s) in comp.iter().zip(scaled) {
            let v = s / g;
            if v > bound as u128 {
                return Ok(Symmetrizer::Undecided);
            }
            out[i] = v as u64;
        }
    }
    Ok(Symmetrizer::Witness(out))
}

impl ExchangeMatrix {
    /// Builds a matrix, rejecting anything that is not skew-symmetrizable.
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = check_square(&rows)?;
        match is_skew_symmetrizable(&rows)? {
            Symmetrizer::Witness(_) => {}
            Symmetrizer::None => {
                return Err(Error::NotSkewSymmetrizable("sign or ratio obstruction".into()))
            }
            Symmetrizer::Undecided => {
                return Err(Error::NotSkewSymmetrizable("symmetrizer exceeds bound".into()))
            }
        }
        Ok(Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            entries: vec![0; n * n],
        }
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_skew_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == -self.get(j, i)))
    }

    pub fn negated(&self) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|x| -x).collect(),
        }
    }

    pub fn has_zero_row(&self) -> bool {
        (0..self.n).any(|i| (0..self.n).all(|j| self.get(i, j) == 0))
    }

    pub fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.n {
            Err(Error::Index {
                index: k,
                rank: self.n,
            })
        } else {
            Ok(())
        }
    }

    /// Matrix mutation `μ_k`.
    pub fn mutate(&self, k: usize) -> Result<Self> {
        self.check_index(k)?;
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let b = self.get(i, j);
                let v = if i == k || j == k {
                    -b
                } else {
                    let bik = self.get(i, k);
                    let bkj = self.get(k, j);
                    let prod = bik
                        .checked_mul(bkj)
                        .ok_or_else(|| Error::Resource("entry overflow".into()))?;
                    b.checked_add(bkj.signum() * prod.max(0))
                        .ok_or_else(|| Error::Resource("entry overflow".into()))?
                };
                entries.push(v);
            }
        }
        let out = Self { n, entries };
        debug_assert!(!self.is_skew_symmetric() || out.is_skew_symmetric());
        Ok(out)
    }

    /// `[B_1, ..., B_{q+1}]` with `B_1 = B` and `B_{i+1} = μ_{k_i}(B_i)`.
    pub fn mutate_along(&self, seq: &MutationSequence) -> Result<Vec<Self>> {
        let mut out = Vec::with_capacity(seq.len() + 1);
        out.push(self.clone());
        for &k in seq.steps() {
            let next = out.last().unwrap().mutate(k)?;
            out.push(next);
        }
        Ok(out)
    }

    /// Applies the permutation `i -> perm[i]` to rows and columns.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n;
        let seen: HashSet<_> = perm.iter().copied().collect();
        if perm.len() != n || seen.len() != n || perm.iter().any(|&p| p >= n) {
            return Err(Error::Shape("not a permutation".into()));
        }
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[perm[i] * n + perm[j]] = self.get(i, j);
            }
        }
        Ok(Self { n, entries })
    }
}

impl fmt::Display for ExchangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.rows().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Mutation steps in application order: `steps[0]` is applied first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MutationSequence(Vec<usize>);

impl MutationSequence {
    pub fn new(steps: Vec<usize>) -> Self {
        Self(steps)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn steps(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    pub fn validate(&self, rank: usize) -> Result<()> {
        match self.0.iter().find(|&&k| k >= rank) {
            Some(&k) => Err(Error::Index { index: k, rank }),
            None => Ok(()),
        }
    }

    /// 1-based indices, as printed by the CLI.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|k| k + 1).collect()
    }

    pub fn from_one_based(v: &[usize]) -> Result<Self> {
        v.iter()
            .map(|&k| {
                k.checked_sub(1)
                    .ok_or_else(|| Error::Parse("mutation indices are 1-based".into()))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for MutationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|k| k.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientRow {
    pub id: String,
    pub v: Vec<Rat>,
}

/// `B` together with finitely many labelled coefficient rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedExchangeMatrix {
    base: ExchangeMatrix,
    rows: Vec<CoefficientRow>,
    integral: bool,
}

impl ExtendedExchangeMatrix {
    pub fn new(base: ExchangeMatrix, rows: Vec<CoefficientRow>, integral: bool) -> Result<Self> {
        let mut ids = HashSet::new();
        for r in &rows {
            if r.v.len() != base.rank() {
                return Err(Error::Dimension {
                    expected: base.rank(),
                    got: r.v.len(),
                });
            }
            if !ids.insert(r.id.as_str()) {
                return Err(Error::Contract(format!("duplicate coefficient row id {:?}", r.id)));
            }
            if integral && r.v.iter().any(|x| !x.is_integer()) {
                return Err(Error::Contract(format!("row {:?} is not integral", r.id)));
            }
        }
        Ok(Self {
            base,
            rows,
            integral,
        })
    }

    pub fn base(&self) -> &ExchangeMatrix {
        &self.base
    }

    pub fn coefficient_rows(&self) -> &[CoefficientRow] {
        &self.rows
    }

    pub fn is_integral(&self) -> bool {
        self.integral
    }

    pub fn mutate(&self, k: usize) -> Result<Self> {
        let base = self.base.mutate(k)?;
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let v = eta_step(&self.base, k, &ShearVector::new(r.v.clone()))?;
                Ok(CoefficientRow {
                    id: r.id.clone(),
                    v: v.into_inner(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            base,
            rows,
            integral: self.integral,
        })
    }
}
