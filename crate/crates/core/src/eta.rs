//! Piecewise-linear mutation maps `η_k^B` and their compositions.

use std::fmt;
use std::num::NonZeroUsize;
use std::ops::{Add, Index, Neg, Sub};

use lru::LruCache;
use num_traits::{Signed, Zero};
use parking_lot::Mutex;

use crate::error::{Error, Result};
use crate::exchange::{ExchangeMatrix, MutationSequence};
use crate::rational::{format_rat, int, Rat};

/// An exact rational vector in `R^n`; integer-valued for shear coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShearVector(Vec<Rat>);

impl ShearVector {
    pub fn new(v: Vec<Rat>) -> Self {
        Self(v)
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Self(v.iter().map(|&x| int(x)).collect())
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![Rat::zero(); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Rat] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Rat> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self(self.0.iter().map(|x| x * c).collect())
    }

    /// Entries as `i64`, or `None` if any entry is fractional or too large.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(crate::rational::to_i64).collect()
    }

    pub fn min_with_zero(&self) -> Self {
        min_with_zero(self)
    }
}

impl Index<usize> for ShearVector {
    type Output = Rat;

    fn index(&self, i: usize) -> &Rat {
        &self.0[i]
    }
}

impl Add for &ShearVector {
    type Output = ShearVector;

    fn add(self, rhs: &ShearVector) -> ShearVector {
        ShearVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ShearVector {
    type Output = ShearVector;

    fn sub(self, rhs: &ShearVector) -> ShearVector {
        ShearVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &ShearVector {
    type Output = ShearVector;

    fn neg(self) -> ShearVector {
        ShearVector(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for ShearVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rat).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn check_dim(b: &ExchangeMatrix, a: &ShearVector) -> Result<()> {
    if a.dim() != b.rank() {
        Err(Error::Dimension {
            expected: b.rank(),
            got: a.dim(),
        })
    } else {
        Ok(())
    }
}

/// One mutation map `η_k^B`.
pub fn eta_step(b: &ExchangeMatrix, k: usize, a: &ShearVector) -> Result<ShearVector> {
    b.check_index(k)?;
    check_dim(b, a)?;
    Ok(eta_step_unchecked(b, k, a))
}

pub(crate) fn eta_step_unchecked(b: &ExchangeMatrix, k: usize, a: &ShearVector) -> ShearVector {
    let ak = &a.0[k];
    let nonneg = !ak.is_negative();
    let nonpos = !ak.is_positive();
    let out = a
        .0
        .iter()
        .enumerate()
        .map(|(j, aj)| {
            if j == k {
                return -ak;
            }
            let bkj = b.get(k, j);
            if nonneg && bkj >= 0 {
                aj + ak * int(bkj)
            } else if nonpos && bkj <= 0 {
                aj - ak * int(bkj)
            } else {
                aj.clone()
            }
        })
        .collect();
    ShearVector(out)
}

/// `η^B_seq`, applying `seq.steps()[0]` first.
pub fn eta(b: &ExchangeMatrix, seq: &MutationSequence, a: &ShearVector) -> Result<ShearVector> {
    seq.validate(b.rank())?;
    check_dim(b, a)?;
    let mut m = b.clone();
    let mut v = a.clone();
    for &k in seq.steps() {
        v = eta_step_unchecked(&m, k, &v);
        m = m.mutate(k)?;
    }
    Ok(v)
}

/// Inverse of [`eta`]: the reversed sequence applied from `μ_seq(B)`.
pub fn eta_inverse(
    b: &ExchangeMatrix,
    seq: &MutationSequence,
    a: &ShearVector,
) -> Result<ShearVector> {
    seq.validate(b.rank())?;
    let end = b.mutate_along(seq)?.pop().unwrap();
    eta(&end, &seq.reversed(), a)
}

/// Componentwise `min(a_j, 0)`.
pub fn min_with_zero(a: &ShearVector) -> ShearVector {
    ShearVector(
        a.0.iter()
            .map(|x| if x.is_positive() { Rat::zero() } else { x.clone() })
            .collect(),
    )
}

/// Bounded LRU of intermediate matrices keyed by sequence prefix.
///
/// Shareable across threads; results never depend on what is cached.
pub struct MatrixMemo {
    base: ExchangeMatrix,
    cache: Mutex<LruCache<Vec<usize>, ExchangeMatrix>>,
}

impl MatrixMemo {
    pub fn new(base: ExchangeMatrix, capacity: usize) -> Self {
        let cap = NonZeroUsize::new(capacity.max(1)).unwrap();
        Self {
            base,
            cache: Mutex::new(LruCache::new(cap)),
        }
    }

    pub fn base(&self) -> &ExchangeMatrix {
        &self.base
    }

    /// `μ_prefix(B)`, reusing the longest cached prefix.
    pub fn matrix_after(&self, prefix: &[usize]) -> Result<ExchangeMatrix> {
        let (mut start, mut m) = {
            let mut cache = self.cache.lock();
            let mut found = (0, self.base.clone());
            for len in (1..=prefix.len()).rev() {
                if let Some(hit) = cache.get(&prefix[..len]) {
                    found = (len, hit.clone());
                    break;
                }
            }
            found
        };
        while start < prefix.len() {
            m = m.mutate(prefix[start])?;
            start += 1;
            self.cache.lock().put(prefix[..start].to_vec(), m.clone());
        }
        Ok(m)
    }

    pub fn eta(&self, seq: &MutationSequence, a: &ShearVector) -> Result<ShearVector> {
        seq.validate(self.base.rank())?;
        check_dim(&self.base, a)?;
        let steps = seq.steps();
        let mut v = a.clone();
        for i in 0..steps.len() {
            let m = self.matrix_after(&steps[..i])?;
            v = eta_step_unchecked(&m, steps[i], &v);
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.cache.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annulus() -> ExchangeMatrix {
        ExchangeMatrix::new(vec![vec![0, 1, 1], vec![-1, 0, 1], vec![-1, -1, 0]]).unwrap()
    }

    fn v(x: &[i64]) -> ShearVector {
        ShearVector::from_ints(x)
    }

    #[test]
    fn eta_step_examples() {
        let b = annulus();
        assert_eq!(eta_step(&b, 0, &v(&[1, 0, -1])).unwrap(), v(&[-1, 1, 0]));
        assert_eq!(eta_step(&b, 1, &v(&[0, 1, -1])).unwrap(), v(&[0, -1, 0]));
        for k in 0..3 {
            assert_eq!(eta_step(&b, k, &v(&[0, 0, 0])).unwrap(), v(&[0, 0, 0]));
        }
        assert!(eta_step(&b, 3, &v(&[0, 0, 0])).is_err());
        assert!(eta_step(&b, 0, &v(&[0, 0])).is_err());
    }

    #[test]
    fn eta_examples() {
        let b = annulus();
        let a = v(&[3, -2, 5]);
        assert_eq!(eta(&b, &MutationSequence::empty(), &a).unwrap(), a);
        assert_eq!(eta(&b, &MutationSequence::new(vec![0, 0]), &a).unwrap(), a);
        assert_eq!(
            eta(&b, &MutationSequence::new(vec![1]), &v(&[1, -1, 0])).unwrap(),
            v(&[0, 1, 0])
        );
    }

    #[test]
    fn eta_inverse_examples() {
        let b = annulus();
        let seq = MutationSequence::new(vec![1]);
        assert_eq!(eta_inverse(&b, &seq, &v(&[0, 1, 0])).unwrap(), v(&[1, -1, 0]));
        let a = v(&[2, -7, 1]);
        assert_eq!(eta_inverse(&b, &MutationSequence::empty(), &a).unwrap(), a);
    }

    #[test]
    fn min_with_zero_examples() {
        assert_eq!(min_with_zero(&v(&[1, -1, 0])), v(&[0, -1, 0]));
        assert_eq!(min_with_zero(&v(&[4, 0, 2])), v(&[0, 0, 0]));
        assert_eq!(min_with_zero(&v(&[-2, -3])), v(&[-2, -3]));
    }

    #[test]
    fn memo_agrees_with_direct() {
        let b = annulus();
        let memo = MatrixMemo::new(b.clone(), 4);
        for steps in [vec![0, 1, 2, 0], vec![0, 1, 2, 1], vec![2, 1], vec![0, 1, 0, 2, 1]] {
            let seq = MutationSequence::new(steps);
            let a = v(&[1, -3, 2]);
            assert_eq!(memo.eta(&seq, &a).unwrap(), eta(&b, &seq, &a).unwrap());
        }
        assert!(memo.len() <= 4);
    }
}
