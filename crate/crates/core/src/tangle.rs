//! Weighted tangles of curves, null-tangle refutation, disorder and the
//! one-sign elimination rule.
//!
//! A tangle is stored against a fixed reference triangulation: annulus curves
//! are evaluated in [`presets::annulus`], raw vectors are taken verbatim.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coherence::{coherent_in, separating_in, DepthVerdict, SequenceTree, WeightedFamily};
use crate::error::{Error, Result};
use crate::eta::ShearVector;
use crate::exchange::{ExchangeMatrix, MutationSequence};
use crate::par;
use crate::rational::{int, sign};
use crate::surface::{annulus_shear, presets, shear_coordinates, AnnulusCurve, AnnulusFamily};
use crate::surface::Triangulation;

/// Largest support handled by [`disorder`].
pub const MAX_DISORDER_SUPPORT: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TangleCurve {
    Annulus(AnnulusCurve),
    /// A curve known only through its shear vector in the reference triangulation.
    Vector { shear: Vec<i64> },
}

impl TangleCurve {
    /// Shear coordinates in the reference triangulation.
    pub fn reference_shear(&self) -> ShearVector {
        match self {
            Self::Annulus(c) => annulus_shear(c),
            Self::Vector { shear } => ShearVector::from_ints(shear),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Annulus(c) => c.id(),
            Self::Vector { shear } => format!("{shear:?}"),
        }
    }
}

impl From<AnnulusCurve> for TangleCurve {
    fn from(c: AnnulusCurve) -> Self {
        Self::Annulus(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TangleItem {
    pub curve: TangleCurve,
    pub w: i64,
}

/// Distinct curves with integer weights; zero weights are kept but lie
/// outside the support.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct Tangle {
    items: Vec<TangleItem>,
}

impl<'de> Deserialize<'de> for Tangle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            items: Vec<TangleItem>,
        }
        let raw = Raw::deserialize(d)?;
        Tangle::new(raw.items).map_err(serde::de::Error::custom)
    }
}

impl Tangle {
    pub fn new(items: Vec<TangleItem>) -> Result<Self> {
        let mut items = items;
        for it in &mut items {
            if let TangleCurve::Annulus(c) = it.curve {
                it.curve = TangleCurve::Annulus(AnnulusCurve::new(c.family, c.n)?);
            }
        }
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if items[i].curve == items[j].curve {
                    return Err(Error::Contract(format!(
                        "tangle lists curve {} twice",
                        items[i].curve.label()
                    )));
                }
            }
        }
        if let Some(first) = items.first() {
            let n = first.curve.reference_shear().dim();
            for it in &items {
                let d = it.curve.reference_shear().dim();
                if d != n {
                    return Err(Error::Dimension { expected: n, got: d });
                }
            }
        }
        Ok(Self { items })
    }

    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn from_pairs<C: Into<TangleCurve>>(pairs: impl IntoIterator<Item = (C, i64)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(c, w)| TangleItem { curve: c.into(), w })
                .collect(),
        )
    }

    pub fn items(&self) -> &[TangleItem] {
        &self.items
    }

    pub fn weight(&self, c: &TangleCurve) -> i64 {
        self.items.iter().find(|it| &it.curve == c).map_or(0, |it| it.w)
    }

    /// Items with nonzero weight, in stored order.
    pub fn support(&self) -> Vec<&TangleItem> {
        self.items.iter().filter(|it| it.w != 0).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.items.iter().all(|it| it.w == 0)
    }

    /// The weighted family of reference shear vectors over the support.
    /// Curves sharing a vector have their weights merged.
    pub fn family(&self) -> Result<WeightedFamily> {
        let mut merged: BTreeMap<Vec<i64>, (usize, i64)> = BTreeMap::new();
        for (i, it) in self.support().into_iter().enumerate() {
            let v = it.curve.reference_shear().to_i64().expect("integral shear");
            merged.entry(v).or_insert((i, 0)).1 += it.w;
        }
        let mut rows: Vec<_> = merged.into_iter().filter(|(_, (_, w))| *w != 0).collect();
        rows.sort_by_key(|(_, (i, _))| *i);
        WeightedFamily::new(
            rows.into_iter()
                .map(|(v, (_, w))| (ShearVector::from_ints(&v), int(w)))
                .collect(),
        )
    }
}

/// `Σ w_λ b(T, λ)`. Annulus curves are walked in `t`, which must then be
/// the reference annulus up to relabelling-free equality; raw vectors are
/// only meaningful in the reference triangulation and are taken as given.
pub fn tangle_shear(t: &Triangulation, tangle: &Tangle) -> Result<ShearVector> {
    let n = t.arc_count();
    let mut acc = vec![0i64; n];
    let reference = presets::annulus();
    for it in tangle.support() {
        let v = match &it.curve {
            TangleCurve::Annulus(c) => {
                if !t.same_tagged(&reference) {
                    return Err(Error::Unsupported(format!(
                        "annulus curve {} is given against the reference annulus only",
                        c.id()
                    )));
                }
                shear_coordinates(t, &c.to_curve())?
            }
            TangleCurve::Vector { shear } => ShearVector::from_ints(shear),
        };
        if v.dim() != n {
            return Err(Error::Dimension { expected: n, got: v.dim() });
        }
        for (a, x) in acc.iter_mut().zip(v.to_i64().expect("integral shear")) {
            *a += it.w * x;
        }
    }
    Ok(ShearVector::from_ints(&acc))
}

/// Multiset union adding weights of shared curves; first-seen order.
pub fn weighted_union(a: &Tangle, b: &Tangle) -> Tangle {
    let mut items = a.items.clone();
    for it in &b.items {
        match items.iter_mut().find(|x| x.curve == it.curve) {
            Some(x) => x.w += it.w,
            None => items.push(it.clone()),
        }
    }
    Tangle { items }
}

fn check_rank(b: &ExchangeMatrix, tangle: &Tangle) -> Result<()> {
    for it in tangle.items() {
        let d = it.curve.reference_shear().dim();
        if d != b.rank() {
            return Err(Error::Dimension { expected: b.rank(), got: d });
        }
    }
    Ok(())
}

/// Refuted means some sequence up to `depth` sends the weighted shear sum
/// off zero; the witness is a certificate that the tangle is not null.
pub fn null_check_up_to_depth(b: &ExchangeMatrix, tangle: &Tangle, depth: usize) -> Result<DepthVerdict> {
    check_rank(b, tangle)?;
    let tree = SequenceTree::new(b, depth)?;
    null_check_in(&tree, tangle)
}

pub fn null_check_in(tree: &SequenceTree, tangle: &Tangle) -> Result<DepthVerdict> {
    Ok(coherent_in(tree, &tangle.family()?))
}

/// Replays a refutation: the weighted image sum at `coord` after `seq`.
pub fn replay_null_witness(
    b: &ExchangeMatrix,
    tangle: &Tangle,
    seq: &MutationSequence,
    coord: usize,
) -> Result<crate::rational::Rat> {
    let fam = tangle.family()?;
    let mut acc = int(0);
    for (v, w) in fam.items() {
        let im = crate::eta::eta(b, seq, v)?;
        acc += &im[coord] * w;
    }
    Ok(acc)
}

/// Chromatic number of the incompatibility graph on the support.
/// `compat(i, j)` is queried with indices into [`Tangle::support`].
pub fn disorder<F>(tangle: &Tangle, compat: F) -> Result<usize>
where
    F: Fn(usize, usize) -> bool,
{
    let support = tangle.support();
    let n = support.len();
    if n > MAX_DISORDER_SUPPORT {
        return Err(Error::Resource(format!(
            "support of {n} curves exceeds {MAX_DISORDER_SUPPORT}"
        )));
    }
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let bad = !compat(i, j);
            adj[i][j] = bad;
            adj[j][i] = bad;
        }
    }
    Ok(chromatic_number(&adj))
}

/// Compatibility of two vectors: no separating sequence up to `depth`.
pub fn separation_compat(tree: &SequenceTree, a: &ShearVector, c: &ShearVector) -> bool {
    separating_in(tree, a, c).is_none()
}

/// [`disorder`] with compatibility decided by separation in `tree`.
pub fn disorder_by_separation(tree: &SequenceTree, tangle: &Tangle) -> Result<usize> {
    let vs: Vec<ShearVector> = tangle
        .support()
        .iter()
        .map(|it| it.curve.reference_shear())
        .collect();
    if vs.len() > MAX_DISORDER_SUPPORT {
        return disorder(tangle, |_, _| true);
    }
    let pairs: Vec<(usize, usize)> = (0..vs.len())
        .flat_map(|i| (i + 1..vs.len()).map(move |j| (i, j)))
        .collect();
    let ok = par::map(&pairs, |&(i, j)| separation_compat(tree, &vs[i], &vs[j]));
    let table: BTreeMap<(usize, usize), bool> = pairs.into_iter().zip(ok).collect();
    disorder(tangle, |i, j| table[&(i.min(j), i.max(j))])
}

fn chromatic_number(adj: &[Vec<bool>]) -> usize {
    let n = adj.len();
    if n == 0 {
        return 0;
    }
    // highest degree first keeps the backtracking shallow
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(adj[i].iter().filter(|&&x| x).count()));
    (1..=n)
        .find(|&k| {
            let mut colour = vec![usize::MAX; n];
            colourable(adj, &order, 0, k, &mut colour)
        })
        .expect("n colours always suffice")
}

fn colourable(adj: &[Vec<bool>], order: &[usize], pos: usize, k: usize, colour: &mut [usize]) -> bool {
    let Some(&v) = order.get(pos) else {
        return true;
    };
    // symmetry: a fresh colour is only tried once
    let used = order[..pos].iter().map(|&u| colour[u] + 1).max().unwrap_or(0);
    for c in 0..k.min(used + 1) {
        if order[..pos].iter().any(|&u| adj[v][u] && colour[u] == c) {
            continue;
        }
        colour[v] = c;
        if colourable(adj, order, pos + 1, k, colour) {
            return true;
        }
    }
    colour[v] = usize::MAX;
    false
}

/// A support curve whose image is the only strictly positive (or the only
/// strictly negative) one at `coord` after `seq`, which forces its weight
/// in any null tangle to vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isolation {
    pub curve: TangleCurve,
    pub seq: MutationSequence,
    pub coord: usize,
    /// Sign of the isolated image at `coord`.
    pub sign: i8,
}

/// Every support curve isolated by some sequence up to `depth`, with the
/// first witness in search order.
pub fn one_sign_elimination(b: &ExchangeMatrix, tangle: &Tangle, depth: usize) -> Result<Vec<Isolation>> {
    check_rank(b, tangle)?;
    let tree = SequenceTree::new(b, depth)?;
    Ok(one_sign_in(&tree, tangle))
}

pub fn one_sign_in(tree: &SequenceTree, tangle: &Tangle) -> Vec<Isolation> {
    let support = tangle.support();
    let vs: Vec<ShearVector> = support.iter().map(|it| it.curve.reference_shear()).collect();
    let n = tree.rank();
    let mut out = Vec::new();
    for (i, it) in support.iter().enumerate() {
        let hit = tree.first_violation(&vs, |im| {
            (0..n).find(|&j| {
                let s = sign(&im[i][j]);
                s != 0
                    && im
                        .iter()
                        .enumerate()
                        .all(|(k, x)| k == i || sign(&x[j]) * s <= 0)
            })
        });
        if let Some((node, coord)) = hit {
            let seq = tree.sequence(node);
            let im = crate::eta::eta(tree.base(), &seq, &vs[i]).expect("validated sequence");
            out.push(Isolation {
                curve: it.curve.clone(),
                seq,
                coord,
                sign: sign(&im[coord]),
            });
        }
    }
    out
}

/// Random nontrivial tangle over `curves` with weights in `[-wmax, wmax]`.
///
/// When the curves include `λ_1, λ_2, λ_4` (unit vectors in the reference
/// triangulation), their weights are shifted to make the reference shear sum
/// vanish, provided the shifted weights stay in range; otherwise the draw is
/// retried a bounded number of times and the last draw is returned as is.
pub fn random_annulus_tangle<R: Rng>(
    rng: &mut R,
    curves: &[AnnulusCurve],
    max_support: usize,
    wmax: i64,
) -> Tangle {
    assert!(!curves.is_empty() && max_support > 0 && wmax > 0);
    let units: Vec<Option<usize>> = [AnnulusFamily::One, AnnulusFamily::Two, AnnulusFamily::Four]
        .iter()
        .map(|&f| curves.iter().position(|c| c.family == f && c.n == 0))
        .collect();
    let mut last = None;
    for _ in 0..64 {
        let k = rng.gen_range(1..=max_support.min(curves.len()));
        let picked: Vec<usize> = rand::seq::index::sample(rng, curves.len(), k).into_vec();
        let mut w = vec![0i64; curves.len()];
        for &p in &picked {
            let mag = rng.gen_range(1..=wmax);
            w[p] = if rng.gen_bool(0.5) { mag } else { -mag };
        }
        let adjusted = if let [Some(u1), Some(u2), Some(u4)] = units[..] {
            let mut s = [0i64; 3];
            for (c, &x) in curves.iter().zip(&w) {
                let v = annulus_shear(c).to_i64().expect("integral shear");
                for j in 0..3 {
                    s[j] += x * v[j];
                }
            }
            // λ_1 = -e_1, λ_2 = e_2, λ_4 = e_3
            let mut w2 = w.clone();
            w2[u1] += s[0];
            w2[u2] -= s[1];
            w2[u4] -= s[2];
            (w2.iter().all(|x| x.abs() <= wmax) && w2.iter().any(|&x| x != 0)).then_some(w2)
        } else {
            None
        };
        let done = adjusted.is_some() || units.iter().any(Option::is_none);
        let w = adjusted.unwrap_or(w);
        let t = Tangle::from_pairs(
            curves
                .iter()
                .zip(&w)
                .filter(|(_, &x)| x != 0)
                .map(|(c, &x)| (*c, x)),
        )
        .expect("distinct curves");
        if done {
            return t;
        }
        last = Some(t);
    }
    last.expect("at least one draw")
}

/// Outcome of one campaign tangle.
#[derive(Clone, Debug)]
pub struct CampaignEntry {
    pub index: usize,
    pub tangle: Tangle,
    pub verdict: DepthVerdict,
    /// The refutation witness re-evaluated from scratch gives a nonzero value.
    pub replays: bool,
}

/// Generates `count` tangles from `seed` (tangle `i` uses stream `i`) and
/// runs the null check on each, in parallel.
pub fn refutation_campaign(
    b: &ExchangeMatrix,
    curves: &[AnnulusCurve],
    seed: u64,
    count: usize,
    depth: usize,
) -> Result<Vec<CampaignEntry>> {
    if b.rank() != 3 {
        return Err(Error::Dimension { expected: 3, got: b.rank() });
    }
    let tree = SequenceTree::new(b, depth)?;
    let entries = par::map_range(0..count, |i| -> Result<CampaignEntry> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let tangle = random_annulus_tangle(&mut rng, curves, 6, 3);
        let verdict = null_check_in(&tree, &tangle)?;
        let replays = match &verdict.witness {
            Some(w) => replay_refutation(b, &tangle, w)?,
            None => false,
        };
        Ok(CampaignEntry {
            index: i,
            tangle,
            verdict,
            replays,
        })
    });
    entries.into_iter().collect()
}

fn replay_refutation(b: &ExchangeMatrix, tangle: &Tangle, w: &crate::coherence::Witness) -> Result<bool> {
    use num_traits::Zero;
    if !replay_null_witness(b, tangle, &w.seq, w.coord)?.is_zero() {
        return Ok(true);
    }
    if !b.has_zero_row() {
        return Ok(false);
    }
    // the piecewise relation may be the broken one
    let fam = tangle.family()?;
    let mut acc = int(0);
    for (v, c) in fam.items() {
        let im = crate::eta::eta(b, &w.seq, v)?;
        acc += crate::eta::min_with_zero(&im)[w.coord].clone() * c;
    }
    Ok(!acc.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::VerdictStatus;
    use num_traits::Zero;
    use AnnulusFamily::*;

    fn b() -> ExchangeMatrix {
        ExchangeMatrix::new(vec![vec![0, 1, 1], vec![-1, 0, 1], vec![-1, -1, 0]]).unwrap()
    }

    fn c(f: AnnulusFamily) -> AnnulusCurve {
        AnnulusCurve::new(f, 0).unwrap()
    }

    #[test]
    fn shear_of_small_tangles() {
        let t = presets::annulus();
        let x = Tangle::from_pairs([(c(Plus), 1), (c(Minus), 1), (c(Infinity), -1)]).unwrap();
        assert!(tangle_shear(&t, &x).unwrap().is_zero());
        assert!(tangle_shear(&t, &Tangle::trivial()).unwrap().is_zero());
        let y = Tangle::from_pairs([(c(Two), 3)]).unwrap();
        assert_eq!(tangle_shear(&t, &y).unwrap(), ShearVector::from_ints(&[0, 3, 0]));
    }

    #[test]
    fn union_adds_weights() {
        let a = Tangle::from_pairs([(c(Plus), 1)]).unwrap();
        let u = weighted_union(&a, &Tangle::from_pairs([(c(Plus), 2)]).unwrap());
        assert_eq!(u.weight(&c(Plus).into()), 3);
        let z = weighted_union(&a, &Tangle::from_pairs([(c(Plus), -1)]).unwrap());
        assert_eq!(z.items().len(), 1);
        assert!(z.support().is_empty());
        let d = weighted_union(&a, &Tangle::from_pairs([(c(Minus), 4)]).unwrap());
        assert_eq!(d.items().len(), 2);
    }

    #[test]
    fn duplicate_curves_are_rejected() {
        let r = Tangle::from_pairs([(c(Plus), 1), (c(Plus), 1)]);
        assert!(matches!(r, Err(Error::Contract(_))));
        // identified parameters count as the same curve
        let one = AnnulusCurve { family: One, n: -1 };
        assert!(Tangle::from_pairs([(one, 1), (c(Two), 1)]).is_err());
    }

    #[test]
    fn null_checks() {
        let x = Tangle::from_pairs([(c(Plus), 1), (c(Minus), 1), (c(Infinity), -1)]).unwrap();
        let v = null_check_up_to_depth(&b(), &x, 8).unwrap();
        assert_eq!(v.status, VerdictStatus::Refuted);
        let w = v.witness.unwrap();
        assert_eq!(w.seq.len(), 1);
        assert!(!replay_null_witness(&b(), &x, &w.seq, w.coord).unwrap().is_zero());
        assert!(null_check_up_to_depth(&b(), &Tangle::trivial(), 8).unwrap().holds_to_depth());
        let y = Tangle::from_pairs([(c(One), 1), (c(Two), -1)]).unwrap();
        let v = null_check_up_to_depth(&b(), &y, 0).unwrap();
        assert_eq!(v.witness.unwrap(), crate::coherence::Witness { seq: MutationSequence::empty(), coord: 0 });
    }

    #[test]
    fn disorder_values() {
        let tree = SequenceTree::new(&b(), 8).unwrap();
        assert_eq!(disorder_by_separation(&tree, &Tangle::trivial()).unwrap(), 0);
        let compatible = Tangle::from_pairs([(c(Plus), 1), (c(Infinity), 2)]).unwrap();
        assert_eq!(disorder_by_separation(&tree, &compatible).unwrap(), 1);
        let pm = Tangle::from_pairs([(c(Plus), 1), (c(Minus), 1)]).unwrap();
        assert_eq!(disorder_by_separation(&tree, &pm).unwrap(), 2);
        let big = Tangle::from_pairs(annulus_allowable_curves_n(13).into_iter().map(|c| (c, 1))).unwrap();
        assert!(matches!(disorder(&big, |_, _| true), Err(Error::Resource(_))));
    }

    fn annulus_allowable_curves_n(k: usize) -> Vec<AnnulusCurve> {
        crate::surface::annulus_allowable_curves(4).into_iter().take(k).collect()
    }

    #[test]
    fn chromatic_numbers_of_small_graphs() {
        let g = |n: usize, e: &[(usize, usize)]| {
            let mut a = vec![vec![false; n]; n];
            for &(i, j) in e {
                a[i][j] = true;
                a[j][i] = true;
            }
            chromatic_number(&a)
        };
        assert_eq!(g(3, &[]), 1);
        assert_eq!(g(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]), 3);
        assert_eq!(g(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]), 4);
        assert_eq!(g(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]), 2);
    }

    #[test]
    fn one_sign_isolation() {
        let x = Tangle::from_pairs([(c(One), 2), (c(Two), -1)]).unwrap();
        let iso = one_sign_elimination(&b(), &x, 0).unwrap();
        assert_eq!(iso.len(), 2);
        assert_eq!(iso[0].curve, c(One).into());
        assert_eq!((iso[0].coord, iso[0].sign), (0, -1));
        assert!(iso[0].seq.is_empty());
        let single = Tangle::from_pairs([(c(Infinity), 1)]).unwrap();
        assert_eq!(one_sign_elimination(&b(), &single, 0).unwrap().len(), 1);
        assert!(one_sign_elimination(&b(), &Tangle::trivial(), 4).unwrap().is_empty());
    }

    #[test]
    fn random_tangles_are_zero_sum_when_possible() {
        let curves = crate::surface::annulus_allowable_curves(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = presets::annulus();
        let mut zero = 0;
        for _ in 0..200 {
            let x = random_annulus_tangle(&mut rng, &curves, 6, 3);
            assert!(!x.is_trivial());
            assert!(x.items().iter().all(|it| it.w.abs() <= 3));
            zero += tangle_shear(&t, &x).unwrap().is_zero() as usize;
        }
        assert!(zero > 150, "{zero}");
    }
}
