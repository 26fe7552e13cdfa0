//! The annulus with one marked point inside and two outside, its allowable
//! curves and their shear coordinates.
//!
//! Universal cover coordinates: `u` in `[0, 1]` (inner boundary at `u = 0`),
//! `v` in quarter turns with period 4. Inner marked point at `v = 0`, outer
//! ones at `v = ±1`. Arcs, 0-based: arc 0 from `(1,1)` to `(0,4)`, arc 1 from
//! `(0,0)` to `(1,-1)`, arc 2 from `(0,0)` to `(1,1)`.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eta::ShearVector;
use crate::fan::LabeledRay;
use crate::rational::{frac, int, Rat};

use super::curve::{shear_coordinates, Curve, CurveEnd};
use super::presets;
use super::triangulation::Triangulation;

pub const INNER: usize = 0;
pub const OUTER_RIGHT: usize = 1;
pub const OUTER_LEFT: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnnulusFamily {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "inf")]
    Infinity,
}

impl AnnulusFamily {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "1" => Self::One,
            "2" => Self::Two,
            "3" => Self::Three,
            "4" => Self::Four,
            "+" | "plus" => Self::Plus,
            "-" | "minus" => Self::Minus,
            "inf" | "infinity" | "oo" => Self::Infinity,
            _ => return Err(Error::Parse(format!("unknown annulus family {s:?}"))),
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::One => "1",
            Self::Two => "2",
            Self::Three => "3",
            Self::Four => "4",
            Self::Plus => "+",
            Self::Minus => "-",
            Self::Infinity => "inf",
        }
    }

    /// Shear coordinates of the family's base curve.
    pub fn base_vector(self) -> [i64; 3] {
        match self {
            Self::One => [-1, 0, 0],
            Self::Two => [0, 1, 0],
            Self::Three => [0, -1, 0],
            Self::Four => [0, 0, 1],
            Self::Plus => [0, 1, -1],
            Self::Minus => [1, -1, 0],
            Self::Infinity => [1, 0, -1],
        }
    }
}

/// `λ_i^(n)`: families 1 and 3 take `n >= 0`, families 2 and 4 take `n <= 0`,
/// the rest only `n = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnnulusCurve {
    pub family: AnnulusFamily,
    pub n: i64,
}

impl AnnulusCurve {
    /// Normalises across the identifications `λ_1^(-1) = λ_2`,
    /// `λ_2^(1) = λ_1`, `λ_3^(-1) = λ_4`, `λ_4^(1) = λ_3`.
    pub fn new(family: AnnulusFamily, n: i64) -> Result<Self> {
        use AnnulusFamily::*;
        let (family, n) = match (family, n) {
            (One, n) if n < 0 => (Two, n + 1),
            (Two, n) if n > 0 => (One, n - 1),
            (Three, n) if n < 0 => (Four, n + 1),
            (Four, n) if n > 0 => (Three, n - 1),
            (Plus | Minus | Infinity, n) if n != 0 => {
                return Err(Error::Contract(format!(
                    "family {} takes no spiral parameter",
                    family.label()
                )))
            }
            x => x,
        };
        Ok(Self { family, n })
    }

    pub fn id(&self) -> String {
        match self.family {
            AnnulusFamily::Plus | AnnulusFamily::Minus | AnnulusFamily::Infinity => {
                self.family.label().to_string()
            }
            f => format!("{}({})", f.label(), self.n),
        }
    }

    /// Crossing sequence against [`presets::annulus`].
    pub fn to_curve(&self) -> Curve {
        use AnnulusFamily::*;
        let turns = self.n.unsigned_abs() as usize;
        let up = || [0, 1, 2].repeat(turns);
        let down = || [2, 1, 0].repeat(turns);
        let b = CurveEnd::Boundary;
        let with = |mut body: Vec<usize>, tail: &[usize]| {
            body.extend_from_slice(tail);
            body
        };
        match self.family {
            One => Curve::open(b(INNER), with(up(), &[0]), b(OUTER_LEFT)),
            Three => Curve::open(b(INNER), with(up(), &[0, 1]), b(OUTER_RIGHT)),
            Four => Curve::open(b(INNER), with(down(), &[2]), b(OUTER_RIGHT)),
            Two => Curve::open(b(INNER), with(down(), &[2, 1]), b(OUTER_LEFT)),
            Minus => Curve::open(b(OUTER_RIGHT), vec![2, 0, 1], b(OUTER_RIGHT)),
            Plus => Curve::open(b(OUTER_LEFT), vec![1, 2, 0], b(OUTER_LEFT)),
            Infinity => Curve::closed(vec![2, 0, 1]),
        }
    }

    /// A representative path in the universal cover.
    pub fn cover_path(&self) -> CoverPath {
        use AnnulusFamily::*;
        let p = |u: Rat, v: i64| (u, int(v));
        let half = || frac(1, 2);
        let m = self.n.abs();
        let start = p(Rat::zero(), 2);
        let points = match self.family {
            One => vec![start, p(Rat::one(), 2 + 4 * m)],
            Two => vec![start, p(Rat::one(), 2 - 4 * (m + 1))],
            Three => vec![start, p(Rat::one(), 4 * (m + 1))],
            Four => vec![start, p(Rat::one(), -4 * m)],
            Plus => vec![p(Rat::one(), 2), p(half(), 4), p(Rat::one(), 6)],
            Minus => vec![p(Rat::one(), 0), p(half(), 2), p(Rat::one(), 4)],
            Infinity => vec![p(half(), 0), p(half(), 4)],
        };
        CoverPath {
            points,
            closed: self.family == Infinity,
        }
    }
}

impl fmt::Display for AnnulusCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Closed form `v_i + |n| v_inf`.
pub fn annulus_shear(c: &AnnulusCurve) -> ShearVector {
    let base = c.family.base_vector();
    let inf = AnnulusFamily::Infinity.base_vector();
    let k = c.n.abs();
    ShearVector::from_ints(&[0, 1, 2].map(|i| base[i] + k * inf[i]))
}

/// Allowable curves with spiral parameter `|n| <= bound`, families in order
/// 1, 2, 3, 4 then `+`, `-`, `inf`.
pub fn annulus_allowable_curves(bound: usize) -> Vec<AnnulusCurve> {
    use AnnulusFamily::*;
    let mut out = Vec::with_capacity(4 * (bound + 1) + 3);
    for (fam, sign) in [(One, 1), (Two, -1), (Three, 1), (Four, -1)] {
        for n in 0..=bound as i64 {
            out.push(AnnulusCurve { family: fam, n: sign * n });
        }
    }
    for fam in [Plus, Minus, Infinity] {
        out.push(AnnulusCurve { family: fam, n: 0 });
    }
    out
}

/// Rays of [`annulus_allowable_curves`], labelled by curve id.
pub fn annulus_rays(bound: usize) -> Vec<LabeledRay> {
    annulus_allowable_curves(bound)
        .iter()
        .map(|c| LabeledRay {
            id: c.id(),
            v: annulus_shear(c).to_i64().expect("integral shear"),
        })
        .collect()
}

/// A polyline in the universal cover; a closed path's endpoints differ by
/// one period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverPath {
    pub points: Vec<(Rat, Rat)>,
    pub closed: bool,
}

fn cover_arcs(vmin: &Rat, vmax: &Rat) -> Vec<(usize, (Rat, Rat), (Rat, Rat))> {
    let lo = crate::rational::to_i64(&vmin.floor()).unwrap_or(0) / 4 - 2;
    let hi = crate::rational::to_i64(&vmax.ceil()).unwrap_or(0) / 4 + 2;
    let mut out = Vec::new();
    for k in lo..=hi {
        let b = int(4 * k);
        let o = Rat::one();
        let z = Rat::zero();
        out.push((0, (o.clone(), &b + int(1)), (z.clone(), &b + int(4))));
        out.push((1, (z.clone(), b.clone()), (o.clone(), &b - int(1))));
        out.push((2, (z, b.clone()), (o, &b + int(1))));
    }
    out
}

fn boundary_end(p: &(Rat, Rat)) -> Result<CurveEnd> {
    let four = int(4);
    let v = &p.1 - &four * (&p.1 / &four).floor();
    if p.0.is_zero() {
        if v.is_zero() {
            return Err(Error::MalformedCurve("path ends at a marked point".into()));
        }
        return Ok(CurveEnd::Boundary(INNER));
    }
    if p.0 == Rat::one() {
        let v = if v > int(2) { v - four } else { v };
        return match v {
            v if v.abs() < Rat::one() => Ok(CurveEnd::Boundary(OUTER_RIGHT)),
            v if v > Rat::one() => Ok(CurveEnd::Boundary(OUTER_LEFT)),
            _ => Err(Error::MalformedCurve("path ends at a marked point".into())),
        };
    }
    Err(Error::MalformedCurve("open path must end on the boundary".into()))
}

/// Crossing sequence of a cover path against [`presets::annulus`].
pub fn cover_curve(path: &CoverPath) -> Result<Curve> {
    let pts = &path.points;
    if pts.len() < 2 {
        return Err(Error::MalformedCurve("path needs two points".into()));
    }
    let vmin = pts.iter().map(|p| p.1.clone()).min().unwrap();
    let vmax = pts.iter().map(|p| p.1.clone()).max().unwrap();
    let arcs = cover_arcs(&vmin, &vmax);
    let mut crossings = Vec::new();
    for w in pts.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        let d = (&q.0 - &p.0, &q.1 - &p.1);
        let mut hits: Vec<(Rat, usize)> = Vec::new();
        for (id, a, b) in &arcs {
            let e = (&b.0 - &a.0, &b.1 - &a.1);
            let den = &d.0 * &e.1 - &d.1 * &e.0;
            if den.is_zero() {
                continue;
            }
            let r = (&a.0 - &p.0, &a.1 - &p.1);
            let t = (&r.0 * &e.1 - &r.1 * &e.0) / &den;
            let s = (&r.0 * &d.1 - &r.1 * &d.0) / &den;
            if s <= Rat::zero() || s >= Rat::one() || t < Rat::zero() || t > Rat::one() {
                continue;
            }
            if t.is_zero() || t == Rat::one() {
                return Err(Error::MalformedCurve("path vertex lies on an arc".into()));
            }
            hits.push((t, *id));
        }
        hits.sort();
        crossings.extend(hits.into_iter().map(|(_, id)| id));
    }
    if path.closed {
        return Ok(Curve::closed(crossings));
    }
    Ok(Curve::open(
        boundary_end(&pts[0])?,
        crossings,
        boundary_end(pts.last().unwrap())?,
    ))
}

/// The elementary lamination of an arc of the reference annulus: the arc
/// with both ends pushed slightly along the boundary.
pub fn kappa(arc: usize) -> Result<Curve> {
    let eps = || frac(1, 100);
    let z = Rat::zero;
    let o = Rat::one;
    let points = match arc {
        0 => vec![(o(), int(1) + eps()), (z(), int(4) - eps())],
        1 => vec![(z(), -eps()), (o(), int(-1) + eps())],
        2 => vec![(z(), -eps()), (o(), int(1) + eps())],
        _ => return Err(Error::Index { index: arc, rank: 3 }),
    };
    cover_curve(&CoverPath {
        points,
        closed: false,
    })
}

/// Shear coordinates of the elementary lamination of `arc`, which must be
/// `-e_arc`.
pub fn elementary_lamination_check(t: &Triangulation, arc: usize) -> Result<ShearVector> {
    if !t.same_tagged(&presets::annulus()) {
        return Err(Error::Unsupported(
            "elementary laminations are modelled for the reference annulus only".into(),
        ));
    }
    let v = shear_coordinates(t, &kappa(arc)?)?;
    let mut want = vec![0i64; 3];
    want[arc] = -1;
    if v != ShearVector::from_ints(&want) {
        return Err(Error::Contract(format!(
            "elementary lamination of arc {} has shear {v}",
            arc + 1
        )));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_parameters() {
        use AnnulusFamily::*;
        let c = |f, n| AnnulusCurve::new(f, n).unwrap();
        assert_eq!(c(One, -1), c(Two, 0));
        assert_eq!(c(Two, 1), c(One, 0));
        assert_eq!(c(Three, -1), c(Four, 0));
        assert_eq!(c(Four, 1), c(Three, 0));
        assert_eq!(c(One, -3), c(Two, -2));
        assert!(AnnulusCurve::new(Plus, 1).is_err());
    }

    #[test]
    fn closed_form_examples() {
        use AnnulusFamily::*;
        let s = |f, n| annulus_shear(&AnnulusCurve::new(f, n).unwrap());
        assert_eq!(s(One, 0), ShearVector::from_ints(&[-1, 0, 0]));
        assert_eq!(s(One, 2), ShearVector::from_ints(&[1, 0, -2]));
        assert_eq!(s(Infinity, 0), ShearVector::from_ints(&[1, 0, -1]));
        assert_eq!(s(Two, -1), ShearVector::from_ints(&[1, 1, -1]));
    }

    #[test]
    fn allowable_counts() {
        assert_eq!(annulus_allowable_curves(0).len(), 7);
        assert_eq!(annulus_allowable_curves(1).len(), 11);
        let all = annulus_allowable_curves(4);
        assert_eq!(all.len(), 23);
        let mut vs: Vec<ShearVector> = all.iter().map(annulus_shear).collect();
        vs.sort();
        vs.dedup();
        assert_eq!(vs.len(), 23);
    }

    #[test]
    fn cover_paths_match_crossing_lists() {
        for c in annulus_allowable_curves(4) {
            assert_eq!(cover_curve(&c.cover_path()).unwrap(), c.to_curve(), "{c}");
        }
    }
}
