//! Rational cones, truncated quasi-lamination fans and fan-property checks,
//! plus the rank-3 stereographic projection used for plotting.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::coherence::{separating_in, SequenceTree};
use crate::error::{Error, Result};
use crate::exchange::ExchangeMatrix;
use crate::eta::ShearVector;
use crate::linalg::{nonnegative_solve, Feasibility, Matrix};
use crate::par;
use crate::rational::{int, primitive_integer, Rat};

/// Nonnegative span of primitive, pairwise non-parallel integer vectors,
/// stored sorted so equal cones compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawCone")]
pub struct RationalCone {
    gens: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
struct RawCone {
    gens: Vec<Vec<i64>>,
}

impl TryFrom<RawCone> for RationalCone {
    type Error = Error;

    fn try_from(raw: RawCone) -> Result<Self> {
        let gens = raw
            .gens
            .iter()
            .map(|g| ShearVector::from_ints(g))
            .collect::<Vec<_>>();
        let n = gens.first().map_or(0, ShearVector::dim);
        RationalCone::new(n, &gens)
    }
}

/// Primitive integer direction of a nonzero rational vector.
pub fn primitive(v: &ShearVector) -> Result<Vec<i64>> {
    if v.is_zero() {
        return Err(Error::Contract("zero vector has no ray".into()));
    }
    primitive_integer(v.as_slice())
        .iter()
        .map(|x| {
            x.to_i64()
                .ok_or_else(|| Error::Resource("generator entry exceeds i64".into()))
        })
        .collect()
}

impl RationalCone {
    /// The zero cone in `R^rank`.
    pub fn zero() -> Self {
        Self { gens: vec![] }
    }

    pub fn new(rank: usize, gens: &[ShearVector]) -> Result<Self> {
        let mut out: Vec<Vec<i64>> = Vec::with_capacity(gens.len());
        for g in gens {
            if g.dim() != rank {
                return Err(Error::Dimension {
                    expected: rank,
                    got: g.dim(),
                });
            }
            let p = primitive(g)?;
            // primitive vectors spanning the same ray are equal
            if out.contains(&p) {
                return Err(Error::Contract(format!("parallel generators {p:?}")));
            }
            out.push(p);
        }
        out.sort();
        Ok(Self { gens: out })
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.gens
    }

    pub fn generator_vectors(&self) -> Vec<ShearVector> {
        self.gens.iter().map(|g| ShearVector::from_ints(g)).collect()
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    fn matrix(&self, rank: usize) -> Matrix {
        let cols: Vec<Vec<Rat>> = self
            .gens
            .iter()
            .map(|g| g.iter().map(|&x| int(x)).collect())
            .collect();
        let refs: Vec<&[Rat]> = cols.iter().map(Vec::as_slice).collect();
        Matrix::from_columns(&refs, rank)
    }

    /// Dimension of the linear span.
    pub fn dim(&self) -> usize {
        match self.gens.first() {
            None => 0,
            Some(g) => self.matrix(g.len()).rank(),
        }
    }

    pub fn is_simplicial(&self) -> bool {
        self.dim() == self.gens.len()
    }

    /// The cone spanned by all generators but the `i`-th.
    pub fn drop_generator(&self, i: usize) -> Self {
        let mut gens = self.gens.clone();
        gens.remove(i);
        Self { gens }
    }

    fn contains_generators_of(&self, other: &Self) -> bool {
        other.gens.iter().all(|g| self.gens.contains(g))
    }
}

/// Whether `a` lies in the cone, by an exact feasibility solve.
pub fn cone_contains(cone: &RationalCone, a: &ShearVector) -> Result<bool> {
    if a.is_zero() {
        return Ok(true);
    }
    if cone.is_empty() {
        return Ok(false);
    }
    let rank = cone.gens[0].len();
    if a.dim() != rank {
        return Err(Error::Dimension {
            expected: rank,
            got: a.dim(),
        });
    }
    Ok(matches!(
        nonnegative_solve(&cone.matrix(rank), a.as_slice()),
        Feasibility::Feasible(_)
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledRay {
    pub id: String,
    pub v: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanTruncation {
    pub rank: usize,
    /// Truncation parameter of the ray list, when it came from a family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    pub rays: Vec<LabeledRay>,
    pub cones: Vec<RationalCone>,
}

impl FanTruncation {
    pub fn cones_of_dim(&self, d: usize) -> impl Iterator<Item = &RationalCone> {
        self.cones.iter().filter(move |c| c.len() == d)
    }

    /// Number of `d`-generator cones having `face` among their faces.
    pub fn cofaces(&self, face: &RationalCone, d: usize) -> usize {
        self.cones_of_dim(d)
            .filter(|c| c.contains_generators_of(face))
            .count()
    }

    pub fn ray_id(&self, g: &[i64]) -> Option<&str> {
        self.rays.iter().find(|r| r.v == g).map(|r| r.id.as_str())
    }

    pub fn cone_by_ids(&self, ids: &[&str]) -> Option<RationalCone> {
        let mut gens = Vec::new();
        for id in ids {
            gens.push(self.rays.iter().find(|r| r.id == *id)?.v.clone());
        }
        gens.sort();
        Some(RationalCone { gens })
    }
}

/// Enumerates every clique of the compatibility graph with at most `maxdim`
/// members (the empty clique gives the zero cone) and emits its cone.
pub fn build_quasilam_fan<F>(
    rays: &[(String, ShearVector)],
    compat: F,
    maxdim: usize,
) -> Result<FanTruncation>
where
    F: Fn(usize, usize) -> bool,
{
    let rank = rays.first().map_or(0, |(_, v)| v.dim());
    let mut prim = Vec::with_capacity(rays.len());
    for (_, v) in rays {
        if v.dim() != rank {
            return Err(Error::Dimension {
                expected: rank,
                got: v.dim(),
            });
        }
        prim.push(primitive(v)?);
    }
    let m = rays.len();
    let mut adj = vec![vec![false; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let (a, b) = (compat(i, j), compat(j, i));
            if a != b {
                return Err(Error::Contract(format!(
                    "compatibility oracle is not symmetric on rays {} and {}",
                    rays[i].0, rays[j].0
                )));
            }
            adj[i][j] = a;
            adj[j][i] = a;
        }
    }
    let mut cones: BTreeSet<RationalCone> = BTreeSet::new();
    cones.insert(RationalCone::zero());
    let mut clique: Vec<usize> = Vec::new();
    fn grow(
        start: usize,
        clique: &mut Vec<usize>,
        adj: &[Vec<bool>],
        prim: &[Vec<i64>],
        maxdim: usize,
        out: &mut BTreeSet<RationalCone>,
    ) {
        for c in start..adj.len() {
            if clique.iter().all(|&q| adj[q][c]) {
                clique.push(c);
                let mut gens: Vec<Vec<i64>> = clique.iter().map(|&i| prim[i].clone()).collect();
                gens.sort();
                gens.dedup();
                out.insert(RationalCone { gens });
                if clique.len() < maxdim {
                    grow(c + 1, clique, adj, prim, maxdim, out);
                }
                clique.pop();
            }
        }
    }
    grow(0, &mut clique, &adj, &prim, maxdim, &mut cones);
    let mut cones: Vec<RationalCone> = cones.into_iter().collect();
    cones.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    Ok(FanTruncation {
        rank,
        truncation: None,
        rays: rays
            .iter()
            .zip(prim)
            .map(|((id, _), v)| LabeledRay { id: id.clone(), v })
            .collect(),
        cones,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FanFailureKind {
    NotSimplicial,
    MissingFace,
    BadIntersection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanFailure {
    pub kind: FanFailureKind,
    pub first: RationalCone,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second: Option<RationalCone>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanReport {
    pub pass: bool,
    pub cones_checked: usize,
    pub pairs_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FanFailure>,
}

/// A point in both cones outside the span of their shared generators, if any.
/// Both cones must be simplicial.
fn bad_overlap(a: &RationalCone, b: &RationalCone, rank: usize) -> bool {
    let only_a: Vec<&Vec<i64>> = a.gens.iter().filter(|g| !b.gens.contains(g)).collect();
    let only_b: Vec<&Vec<i64>> = b.gens.iter().filter(|g| !a.gens.contains(g)).collect();
    if only_a.is_empty() || only_b.is_empty() {
        return false;
    }
    // columns: a's gens, then negated b's gens; last row normalises the
    // non-shared coefficients to sum to one
    let cols = a.len() + b.len();
    let mut m = Matrix::zeros(rank + 1, cols);
    for (j, g) in a.gens.iter().enumerate() {
        for i in 0..rank {
            m[(i, j)] = int(g[i]);
        }
        if only_a.contains(&g) {
            m[(rank, j)] = Rat::one();
        }
    }
    for (j, g) in b.gens.iter().enumerate() {
        for i in 0..rank {
            m[(i, a.len() + j)] = int(-g[i]);
        }
        if only_b.contains(&g) {
            m[(rank, a.len() + j)] = Rat::one();
        }
    }
    let mut rhs = vec![Rat::zero(); rank + 1];
    rhs[rank] = Rat::one();
    matches!(nonnegative_solve(&m, &rhs), Feasibility::Feasible(_))
}

/// [`build_quasilam_fan`] with two rays compatible when no sequence up to
/// `depth` gives them strictly opposite signs.
pub fn fan_by_separation(
    b: &ExchangeMatrix,
    rays: &[LabeledRay],
    depth: usize,
) -> Result<FanTruncation> {
    let vs: Vec<(String, ShearVector)> = rays
        .iter()
        .map(|r| (r.id.clone(), ShearVector::from_ints(&r.v)))
        .collect();
    for (_, v) in &vs {
        if v.dim() != b.rank() {
            return Err(Error::Dimension {
                expected: b.rank(),
                got: v.dim(),
            });
        }
    }
    let tree = SequenceTree::new(b, depth)?;
    let m = vs.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let ok = par::map(&pairs, |&(i, j)| separating_in(&tree, &vs[i].1, &vs[j].1).is_none());
    let mut compat = vec![vec![true; m]; m];
    for (&(i, j), c) in pairs.iter().zip(ok) {
        compat[i][j] = c;
        compat[j][i] = c;
    }
    build_quasilam_fan(&vs, |i, j| compat[i][j], b.rank())
}

/// Checks simpliciality, face closure and that every pair of cones meets
/// in their common face. Reports the first failure in cone order.
pub fn check_fan(fan: &FanTruncation) -> FanReport {
    let cones = &fan.cones;
    let mut report = FanReport {
        pass: true,
        cones_checked: cones.len(),
        pairs_checked: 0,
        failure: None,
    };
    let fail = |kind, first: &RationalCone, second: Option<&RationalCone>| FanReport {
        pass: false,
        cones_checked: cones.len(),
        pairs_checked: 0,
        failure: Some(FanFailure {
            kind,
            first: first.clone(),
            second: second.cloned(),
        }),
    };
    if let Some((i, _)) = par::find_first(cones, |c| (!c.is_simplicial()).then_some(())) {
        return fail(FanFailureKind::NotSimplicial, &cones[i], None);
    }
    let set: BTreeSet<&RationalCone> = cones.iter().collect();
    for c in cones {
        for i in 0..c.len() {
            let f = c.drop_generator(i);
            if !set.contains(&f) {
                return fail(FanFailureKind::MissingFace, c, Some(&f));
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..cones.len())
        .flat_map(|i| (i + 1..cones.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            !cones[i].contains_generators_of(&cones[j]) && !cones[j].contains_generators_of(&cones[i])
        })
        .collect();
    report.pairs_checked = pairs.len();
    if let Some((p, _)) = par::find_first(&pairs, |&(i, j)| {
        bad_overlap(&cones[i], &cones[j], fan.rank).then_some(())
    }) {
        let (i, j) = pairs[p];
        let mut r = fail(FanFailureKind::BadIntersection, &cones[i], Some(&cones[j]));
        r.pairs_checked = pairs.len();
        return r;
    }
    report
}

/// Stereographic image of a nonzero rank-3 vector: the direction
/// `(1,1,1)` is sent to the origin, projection is from the antipode onto the
/// tangent plane there.
pub fn stereographic_project(a: &ShearVector) -> Result<(f64, f64)> {
    if a.dim() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: a.dim(),
        });
    }
    if a.is_zero() {
        return Err(Error::Contract("cannot project the zero vector".into()));
    }
    let v: Vec<f64> = a.as_slice().iter().map(crate::rational::to_f64).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: Vec<f64> = v.iter().map(|x| x / norm).collect();
    let x = (u[0] - u[1]) / 2f64.sqrt();
    let y = (u[0] + u[1] - 2.0 * u[2]) / 6f64.sqrt();
    let z = (u[0] + u[1] + u[2]) / 3f64.sqrt();
    if 1.0 + z <= 1e-12 {
        return Err(Error::Contract("vector projects to infinity".into()));
    }
    Ok((2.0 * x / (1.0 + z), 2.0 * y / (1.0 + z)))
}

fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// Projected ray coordinates as `id,x,y` rows.
pub fn projection_csv(fan: &FanTruncation) -> Result<String> {
    let mut out = String::from("id,x,y\n");
    for r in &fan.rays {
        let (x, y) = stereographic_project(&ShearVector::from_ints(&r.v))?;
        writeln!(out, "{},{},{}", r.id, fmt6(x), fmt6(y)).unwrap();
    }
    Ok(out)
}

/// Points along the great-circle arc from `a` to `b`, projected.
fn arc(a: &[i64], b: &[i64], steps: usize) -> Result<Vec<(f64, f64)>> {
    let unit = |g: &[i64]| {
        let n = g.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
        g.iter().map(|&x| x as f64 / n).collect::<Vec<f64>>()
    };
    let (ua, ub) = (unit(a), unit(b));
    (0..=steps)
        .map(|s| {
            let t = s as f64 / steps as f64;
            let p: Vec<Rat> = (0..3)
                .map(|i| {
                    let x = (1.0 - t) * ua[i] + t * ub[i];
                    Rat::from_float(x).unwrap_or_else(Rat::zero)
                })
                .collect();
            stereographic_project(&ShearVector::new(p))
        })
        .collect()
}

/// SVG drawing of the projected fan: 3-cones shaded, 2-cones as arcs, rays
/// as labelled dots.
pub fn projection_svg(fan: &FanTruncation) -> Result<String> {
    if fan.rank != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: fan.rank,
        });
    }
    let pts: Vec<(f64, f64)> = fan
        .rays
        .iter()
        .map(|r| stereographic_project(&ShearVector::from_ints(&r.v)))
        .collect::<Result<_>>()?;
    let extent = pts
        .iter()
        .fold(1.0f64, |m, (x, y)| m.max(x.abs()).max(y.abs()))
        * 1.15;
    let size = 600.0;
    let scale = size / (2.0 * extent);
    let map = |(x, y): (f64, f64)| (fmt6((x + extent) * scale), fmt6((extent - y) * scale));
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = size as u32
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let poly = |path: &[(f64, f64)]| {
        path.iter()
            .map(|&p| {
                let (x, y) = map(p);
                format!("{x},{y}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    for c in fan.cones_of_dim(3) {
        let g = &c.gens;
        let mut path = arc(&g[0], &g[1], 16)?;
        path.extend(arc(&g[1], &g[2], 16)?);
        path.extend(arc(&g[2], &g[0], 16)?);
        writeln!(
            out,
            r##"<polygon points="{}" fill="#dbe7f5" stroke="none"/>"##,
            poly(&path)
        )
        .unwrap();
    }
    for c in fan.cones_of_dim(2) {
        let path = arc(&c.gens[0], &c.gens[1], 24)?;
        writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#2b4f81" stroke-width="1"/>"##,
            poly(&path)
        )
        .unwrap();
    }
    for (r, &p) in fan.rays.iter().zip(&pts) {
        let (x, y) = map(p);
        writeln!(out, r##"<circle cx="{x}" cy="{y}" r="3" fill="#c0392b"/>"##).unwrap();
        writeln!(
            out,
            r#"<text x="{x}" y="{y}" dx="5" dy="-5" font-size="11" font-family="sans-serif">{}</text>"#,
            r.id
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[i64]) -> ShearVector {
        ShearVector::from_ints(x)
    }

    #[test]
    fn cone_is_canonical() {
        let a = RationalCone::new(3, &[v(&[0, 2, -2]), v(&[1, 0, -1])]).unwrap();
        let b = RationalCone::new(3, &[v(&[1, 0, -1]), v(&[0, 1, -1])]).unwrap();
        assert_eq!(a, b);
        assert!(RationalCone::new(3, &[v(&[1, 0, 0]), v(&[2, 0, 0])]).is_err());
        assert!(RationalCone::new(3, &[v(&[0, 0, 0])]).is_err());
        // opposite rays are not parallel in the cone sense
        assert!(RationalCone::new(1, &[v(&[1]), v(&[-1])]).is_ok());
    }

    #[test]
    fn containment_examples() {
        let c = RationalCone::new(3, &[v(&[0, 1, -1]), v(&[1, 0, -1])]).unwrap();
        assert!(cone_contains(&c, &v(&[1, 1, -2])).unwrap());
        assert!(cone_contains(&c, &v(&[0, 0, 0])).unwrap());
        assert!(!cone_contains(&c, &v(&[1, 1, -1])).unwrap());
        let e1 = RationalCone::new(3, &[v(&[1, 0, 0])]).unwrap();
        assert!(!cone_contains(&e1, &v(&[-1, 0, 0])).unwrap());
        assert!(cone_contains(&e1, &v(&[1, 0])).is_err());
    }

    #[test]
    fn build_small_fans() {
        let one = vec![("a".to_string(), v(&[1, 0]))];
        let f = build_quasilam_fan(&one, |_, _| true, 2).unwrap();
        assert_eq!(f.cones.len(), 2);
        let two = vec![("a".to_string(), v(&[1, 0])), ("b".to_string(), v(&[0, 1]))];
        let f = build_quasilam_fan(&two, |_, _| false, 2).unwrap();
        assert_eq!(f.cones.len(), 3);
        assert_eq!(f.cones_of_dim(2).count(), 0);
        let f = build_quasilam_fan(&two, |_, _| true, 2).unwrap();
        assert_eq!(f.cones.len(), 4);
        assert!(check_fan(&f).pass);
        assert!(build_quasilam_fan(&two, |i, j| i < j, 2).is_err());
    }

    #[test]
    fn check_fan_rejects_overlap() {
        let rays = vec![
            ("e1".to_string(), v(&[1, 0])),
            ("e2".to_string(), v(&[0, 1])),
            ("d".to_string(), v(&[1, 1])),
            ("f".to_string(), v(&[2, -1])),
        ];
        let f = build_quasilam_fan(&rays, |i, j| (i, j) == (0, 1) || (i, j) == (1, 0) || (i, j) == (2, 3) || (i, j) == (3, 2), 2)
            .unwrap();
        let r = check_fan(&f);
        assert!(!r.pass);
        assert_eq!(r.failure.unwrap().kind, FanFailureKind::BadIntersection);
    }

    #[test]
    fn check_fan_rejects_missing_face_and_non_simplicial() {
        let mut f = FanTruncation {
            rank: 2,
            truncation: None,
            rays: vec![],
            cones: vec![RationalCone::new(2, &[v(&[1, 0]), v(&[0, 1])]).unwrap()],
        };
        assert_eq!(check_fan(&f).failure.unwrap().kind, FanFailureKind::MissingFace);
        f.cones = vec![RationalCone::new(2, &[v(&[1, 0]), v(&[0, 1]), v(&[1, 1])]).unwrap()];
        assert_eq!(check_fan(&f).failure.unwrap().kind, FanFailureKind::NotSimplicial);
        f.cones = vec![RationalCone::zero()];
        assert!(check_fan(&f).pass);
    }

    #[test]
    fn projection_examples() {
        let (x, y) = stereographic_project(&v(&[1, 1, 1])).unwrap();
        assert!(x.abs() < 1e-12 && y.abs() < 1e-12);
        let (x, y) = stereographic_project(&v(&[7, 7, 7])).unwrap();
        assert!(x.abs() < 1e-12 && y.abs() < 1e-12);
        assert!(stereographic_project(&v(&[0, 0, 0])).is_err());
        assert!(stereographic_project(&v(&[-1, -1, -1])).is_err());
        let a = stereographic_project(&v(&[2, -1, 3])).unwrap();
        let b = stereographic_project(&v(&[6, -3, 9])).unwrap();
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_validates() {
        let c: RationalCone = serde_json::from_str(r#"{"gens":[[0,2,-2],[1,0,-1]]}"#).unwrap();
        assert_eq!(c.generators(), &[vec![0, 1, -1], vec![1, 0, -1]]);
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"gens":[[0,1,-1],[1,0,-1]]}"#);
        assert!(serde_json::from_str::<RationalCone>(r#"{"gens":[[1,0],[3,0]]}"#).is_err());
    }
}
