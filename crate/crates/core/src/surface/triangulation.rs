//! Ideal triangulations with tags recorded per puncture.
//!
//! Triangles list their sides clockwise; side `i` runs from `verts[i]` to
//! `verts[i + 1]`, so a glued arc runs in opposite directions in its two
//! triangles. A self-folded triangle is stored as `(r, r, l)` with vertices
//! `(x, p, x)`: radius `r` from the enclosing point `x` to the puncture `p`,
//! loop `l` based at `x`.
//!
//! A tagged triangulation is an ideal triangulation plus a set of notched
//! punctures, where every tagged arc end at a notched puncture is notched. The
//! loop of a self-folded triangle at a plain puncture stands for the radius
//! notched at that puncture.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exchange::ExchangeMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Edge {
    Arc(usize),
    Boundary(usize),
}

impl Edge {
    pub fn arc(self) -> Option<usize> {
        match self {
            Edge::Arc(a) => Some(a),
            Edge::Boundary(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub sides: [Edge; 3],
    pub verts: [usize; 3],
}

impl Triangle {
    pub fn is_self_folded(&self) -> bool {
        self.sides[0] == self.sides[1]
    }

    /// Corners carrying marked point `p`.
    pub fn corners_at(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(move |&c| self.verts[c] == p)
    }

    fn rotated(&self, by: usize) -> Self {
        Self {
            sides: [0, 1, 2].map(|i| self.sides[(i + by) % 3]),
            verts: [0, 1, 2].map(|i| self.verts[(i + by) % 3]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarkedPoint {
    pub name: String,
    pub puncture: bool,
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    n: usize,
    boundary: Vec<String>,
    marked: Vec<MarkedPoint>,
    notched: Vec<bool>,
    triangles: Vec<Triangle>,
    arc_slots: Vec<[(usize, usize); 2]>,
    boundary_slots: Vec<(usize, usize)>,
}

/// Where the sides of the flipped quadrilateral went.
#[derive(Clone, Debug)]
pub(crate) struct FlipMap {
    pub old_a: (usize, usize),
    pub old_b: (usize, usize),
    /// `(old tri, old slot) -> (new tri, new slot)` for the four outer sides.
    pub sides: [((usize, usize), (usize, usize)); 4],
    pub ia: usize,
    pub ib: usize,
}

impl FlipMap {
    pub fn is_flipped(&self, tri: usize, slot: usize) -> bool {
        (tri, slot) == self.old_a || (tri, slot) == self.old_b
    }

    pub fn in_quad(&self, tri: usize) -> bool {
        tri == self.ia || tri == self.ib
    }

    pub fn map_side(&self, tri: usize, slot: usize) -> (usize, usize) {
        self.sides
            .iter()
            .find(|(old, _)| *old == (tri, slot))
            .map(|(_, new)| *new)
            .expect("side of the flipped quadrilateral")
    }
}

impl Triangulation {
    /// Validates and normalises self-folded triangles to `(r, r, l)` form.
    pub fn new(
        n: usize,
        boundary: Vec<String>,
        marked: Vec<MarkedPoint>,
        triangles: Vec<Triangle>,
        notched: &[usize],
    ) -> Result<Self> {
        let mut tris = Vec::with_capacity(triangles.len());
        for t in triangles {
            let rot = (0..3).find(|&i| t.sides[i] == t.sides[(i + 1) % 3]);
            tris.push(match rot {
                Some(i) => t.rotated(i),
                None => t,
            });
        }
        let mut flags = vec![false; marked.len()];
        for &p in notched {
            let m = marked
                .get(p)
                .ok_or_else(|| Error::Triangulation(format!("unknown marked point {p}")))?;
            if !m.puncture {
                return Err(Error::Triangulation(format!(
                    "boundary marked point {} cannot be notched",
                    m.name
                )));
            }
            flags[p] = true;
        }
        Self::assemble(n, boundary, marked, flags, tris)
    }

    fn assemble(
        n: usize,
        boundary: Vec<String>,
        marked: Vec<MarkedPoint>,
        notched: Vec<bool>,
        triangles: Vec<Triangle>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::Triangulation(m));
        let mut arc_occ: Vec<Vec<(usize, usize)>> = vec![vec![]; n];
        let mut bd_occ: Vec<Vec<(usize, usize)>> = vec![vec![]; boundary.len()];
        for (ti, t) in triangles.iter().enumerate() {
            for (s, e) in t.sides.iter().enumerate() {
                match *e {
                    Edge::Arc(a) if a < n => arc_occ[a].push((ti, s)),
                    Edge::Boundary(b) if b < boundary.len() => bd_occ[b].push((ti, s)),
                    _ => return bad(format!("triangle {} has an unknown side", ti + 1)),
                }
            }
            if t.verts.iter().any(|&v| v >= marked.len()) {
                return bad(format!("triangle {} has an unknown vertex", ti + 1));
            }
            if t.is_self_folded() {
                if t.sides[2] == t.sides[0] || t.sides[0].arc().is_none() {
                    return bad(format!("triangle {} is degenerate", ti + 1));
                }
                if t.verts[0] != t.verts[2] || !marked[t.verts[1]].puncture {
                    return bad(format!(
                        "self-folded triangle {} must enclose a puncture",
                        ti + 1
                    ));
                }
            }
        }
        let mut arc_slots = Vec::with_capacity(n);
        for (a, occ) in arc_occ.iter().enumerate() {
            if occ.len() != 2 {
                return bad(format!("arc {} lies on {} triangle sides", a + 1, occ.len()));
            }
            let ((t1, s1), (t2, s2)) = (occ[0], occ[1]);
            let (u, v) = (&triangles[t1], &triangles[t2]);
            if u.verts[s1] != v.verts[(s2 + 1) % 3] || u.verts[(s1 + 1) % 3] != v.verts[s2] {
                return bad(format!("arc {} is glued with inconsistent endpoints", a + 1));
            }
            arc_slots.push([occ[0], occ[1]]);
        }
        let mut boundary_slots = Vec::with_capacity(boundary.len());
        for (b, occ) in bd_occ.iter().enumerate() {
            if occ.len() != 1 {
                return bad(format!("boundary segment {} used {} times", boundary[b], occ.len()));
            }
            boundary_slots.push(occ[0]);
        }
        Ok(Self {
            n,
            boundary,
            marked,
            notched,
            triangles,
            arc_slots,
            boundary_slots,
        })
    }

    pub fn arc_count(&self) -> usize {
        self.n
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn boundary_names(&self) -> &[String] {
        &self.boundary
    }

    pub fn marked_points(&self) -> &[MarkedPoint] {
        &self.marked
    }

    pub fn is_notched(&self, p: usize) -> bool {
        self.notched[p]
    }

    pub fn notched_punctures(&self) -> Vec<usize> {
        (0..self.marked.len()).filter(|&p| self.notched[p]).collect()
    }

    pub fn boundary_index(&self, name: &str) -> Option<usize> {
        self.boundary.iter().position(|b| b == name)
    }

    pub fn marked_index(&self, name: &str) -> Option<usize> {
        self.marked.iter().position(|m| m.name == name)
    }

    pub fn boundary_slot(&self, b: usize) -> (usize, usize) {
        self.boundary_slots[b]
    }

    pub fn arc_slots(&self, a: usize) -> [(usize, usize); 2] {
        self.arc_slots[a]
    }

    pub fn side(&self, tri: usize, slot: usize) -> Edge {
        self.triangles[tri].sides[slot]
    }

    /// The other side glued to `(tri, slot)`, or `None` on the boundary.
    pub fn partner(&self, tri: usize, slot: usize) -> Option<(usize, usize)> {
        let a = self.side(tri, slot).arc()?;
        let [x, y] = self.arc_slots[a];
        Some(if x == (tri, slot) { y } else { x })
    }

    /// For a radius, its self-folded triangle, puncture and loop.
    pub fn radius_info(&self, a: usize) -> Option<(usize, usize, usize)> {
        let [(t1, _), (t2, _)] = self.arc_slots[a];
        let t = &self.triangles[t1];
        (t1 == t2 && t.is_self_folded()).then(|| (t1, t.verts[1], t.sides[2].arc().unwrap()))
    }

    /// Signed adjacency matrix, with each radius taking the row and column of
    /// its enclosing loop.
    pub fn signed_adjacency(&self) -> Result<ExchangeMatrix> {
        let n = self.n;
        let mut m = vec![vec![0i64; n]; n];
        for t in &self.triangles {
            if t.is_self_folded() {
                continue;
            }
            for i in 0..3 {
                if let (Edge::Arc(x), Edge::Arc(y)) = (t.sides[i], t.sides[(i + 1) % 3]) {
                    m[x][y] += 1;
                    m[y][x] -= 1;
                }
            }
        }
        let pi: Vec<usize> = (0..n)
            .map(|a| self.radius_info(a).map_or(a, |(_, _, l)| l))
            .collect();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0 } else { m[pi[i]][pi[j]] }).collect())
            .collect();
        ExchangeMatrix::new(rows)
    }

    /// Flip of a tagged arc; radii of self-folded triangles are flipped by
    /// re-reading the puncture as notched and flipping the loop.
    pub fn flip(&self, a: usize) -> Result<Triangulation> {
        Ok(self.flip_with_map(a)?.0)
    }

    pub(crate) fn flip_with_map(&self, a: usize) -> Result<(Triangulation, FlipMap)> {
        if a >= self.n {
            return Err(Error::Index {
                index: a,
                rank: self.n,
            });
        }
        match self.radius_info(a) {
            Some((_, p, l)) => {
                let mut t = self.clone();
                t.swap_arc_ids(a, l);
                t.notched[p] = !t.notched[p];
                t.ideal_flip(a)
            }
            None => self.ideal_flip(a),
        }
    }

    fn swap_arc_ids(&mut self, x: usize, y: usize) {
        for t in &mut self.triangles {
            for s in &mut t.sides {
                if *s == Edge::Arc(x) {
                    *s = Edge::Arc(y);
                } else if *s == Edge::Arc(y) {
                    *s = Edge::Arc(x);
                }
            }
        }
        self.arc_slots.swap(x, y);
    }

    fn ideal_flip(&self, g: usize) -> Result<(Triangulation, FlipMap)> {
        let [(ia, ga), (ib, gb)] = self.arc_slots[g];
        if ia == ib {
            return Err(Error::Unflippable(g));
        }
        let (ta, tb) = (&self.triangles[ia], &self.triangles[ib]);
        let at = |t: &Triangle, i: usize| (t.sides[i % 3], t.verts[i % 3]);
        let (_, x) = at(ta, ga);
        let (a1, y) = at(ta, ga + 1);
        let (a2, z) = at(ta, ga + 2);
        let (b1, _) = at(tb, gb + 1);
        let (b2, w) = at(tb, gb + 2);
        let new_g = Edge::Arc(g);
        let mut triangles = self.triangles.clone();
        triangles[ia] = Triangle {
            sides: [a2, b1, new_g],
            verts: [z, x, w],
        };
        triangles[ib] = Triangle {
            sides: [b2, a1, new_g],
            verts: [w, y, z],
        };
        let t = Self::assemble(
            self.n,
            self.boundary.clone(),
            self.marked.clone(),
            self.notched.clone(),
            triangles,
        )
        .map_err(|_| Error::Unflippable(g))?;
        let map = FlipMap {
            old_a: (ia, ga),
            old_b: (ib, gb),
            sides: [
                ((ia, (ga + 1) % 3), (ib, 1)),
                ((ia, (ga + 2) % 3), (ia, 0)),
                ((ib, (gb + 1) % 3), (ia, 1)),
                ((ib, (gb + 2) % 3), (ib, 0)),
            ],
            ia,
            ib,
        };
        Ok((t, map))
    }

    /// Representation where no puncture enclosed by a self-folded triangle
    /// is notched, with triangles in a rotation- and order-free form.
    fn canonical(&self) -> (Vec<bool>, Vec<([Edge; 3], [usize; 3])>) {
        let mut t = self.clone();
        for i in 0..t.triangles.len() {
            let tri = t.triangles[i].clone();
            if tri.is_self_folded() && t.notched[tri.verts[1]] {
                let (r, l) = (tri.sides[0].arc().unwrap(), tri.sides[2].arc().unwrap());
                t.swap_arc_ids(r, l);
                t.notched[tri.verts[1]] = false;
            }
        }
        let mut tris: Vec<([Edge; 3], [usize; 3])> = t
            .triangles
            .iter()
            .map(|tri| {
                (0..3)
                    .map(|r| {
                        let x = tri.rotated(r);
                        (x.sides, x.verts)
                    })
                    .min()
                    .unwrap()
            })
            .collect();
        tris.sort();
        (t.notched, tris)
    }

    /// Equality as tagged triangulations.
    pub fn same_tagged(&self, other: &Self) -> bool {
        self.n == other.n
            && self.boundary == other.boundary
            && self.marked == other.marked
            && self.canonical() == other.canonical()
    }

    /// Arc ids per puncture, for reporting.
    pub fn arcs_at(&self, p: usize) -> Vec<usize> {
        let mut out: BTreeMap<usize, ()> = BTreeMap::new();
        for t in &self.triangles {
            for i in 0..3 {
                if let Edge::Arc(a) = t.sides[i] {
                    if t.verts[i] == p || t.verts[(i + 1) % 3] == p {
                        out.insert(a, ());
                    }
                }
            }
        }
        out.into_keys().collect()
    }
}

/// Topological type of a marked surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedSurface {
    pub genus: usize,
    /// Marked points on each boundary component.
    pub boundary_components: Vec<usize>,
    pub punctures: usize,
}

impl MarkedSurface {
    pub fn new(genus: usize, boundary_components: Vec<usize>, punctures: usize) -> Result<Self> {
        let s = Self {
            genus,
            boundary_components,
            punctures,
        };
        let b = s.boundary_components.len();
        if s.boundary_components.contains(&0) {
            return Err(Error::Triangulation(
                "every boundary component needs a marked point".into(),
            ));
        }
        let excluded = match (genus, b, punctures) {
            (0, 0, p) => p < 4,
            (0, 1, 0) => s.boundary_components[0] <= 3,
            (0, 1, 1) => s.boundary_components[0] == 1,
            _ => false,
        };
        if excluded {
            return Err(Error::Triangulation(format!("excluded surface {s:?}")));
        }
        Ok(s)
    }

    /// Number of arcs in any triangulation.
    pub fn arc_count(&self) -> usize {
        let c: usize = self.boundary_components.iter().sum();
        6 * self.genus + 3 * self.boundary_components.len() + 3 * self.punctures + c - 6
    }
}
