//! Curves as crossing sequences, resolved into walks through triangles.
//!
//! A walk is a list of legs `(tri, entry, exit)`. Consecutive legs are glued:
//! leg `t` leaves through `exit` and leg `t + 1` enters through the partner
//! side. A spiral end keeps only its first spiral leg; the rest of the spiral
//! is regenerated on demand. Legs never leave through the side they entered.

use crate::error::{Error, Result};
use crate::eta::ShearVector;
use crate::rational::int;

use super::triangulation::{Edge, FlipMap, Triangulation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpiralDir {
    Cw,
    Ccw,
}

impl SpiralDir {
    pub fn reversed(self) -> Self {
        match self {
            SpiralDir::Cw => SpiralDir::Ccw,
            SpiralDir::Ccw => SpiralDir::Cw,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurveEnd {
    /// Index of a boundary segment.
    Boundary(usize),
    /// Index of a puncture among the marked points.
    Spiral { puncture: usize, dir: SpiralDir },
}

/// A curve given by the arcs it crosses, in order, in minimal position.
///
/// Inside a self-folded triangle the list cannot tell which way the curve
/// passes the puncture; such lists are rejected by [`resolve`] and the curve
/// must be carried as a [`Walk`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Curve {
    /// Two ends for an open curve, none for a closed one.
    pub ends: Vec<CurveEnd>,
    /// 0-based arc ids.
    pub crossings: Vec<usize>,
    pub closed: bool,
}

impl Curve {
    pub fn open(start: CurveEnd, crossings: Vec<usize>, end: CurveEnd) -> Self {
        Self {
            ends: vec![start, end],
            crossings,
            closed: false,
        }
    }

    pub fn closed(crossings: Vec<usize>) -> Self {
        Self {
            ends: vec![],
            crossings,
            closed: true,
        }
    }

    pub fn reversed(&self) -> Self {
        let mut c = self.clone();
        c.ends.reverse();
        c.crossings.reverse();
        c
    }

    fn check_shape(&self) -> Result<()> {
        match (self.closed, self.ends.len()) {
            (true, 0) if !self.crossings.is_empty() => Ok(()),
            (true, 0) => Err(Error::MalformedCurve("closed curve crosses no arc".into())),
            (false, 2) => Ok(()),
            _ => Err(Error::MalformedCurve(
                "open curves need two ends, closed curves none".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Leg {
    pub tri: usize,
    pub entry: usize,
    pub exit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    pub legs: Vec<Leg>,
    /// `None` for closed walks.
    pub start: Option<CurveEnd>,
    pub end: Option<CurveEnd>,
}

impl Walk {
    pub fn is_closed(&self) -> bool {
        self.start.is_none()
    }

    pub fn reversed(&self) -> Self {
        Self {
            legs: self
                .legs
                .iter()
                .rev()
                .map(|l| Leg {
                    tri: l.tri,
                    entry: l.exit,
                    exit: l.entry,
                })
                .collect(),
            start: self.end,
            end: self.start,
        }
    }

    /// Equality of the underlying unoriented curves: closed walks match up
    /// to rotation, any walk up to reversal.
    pub fn same_curve(&self, other: &Walk) -> bool {
        let rotated = |a: &Walk, b: &Walk| {
            let n = a.legs.len();
            n == b.legs.len() && (0..n).any(|k| (0..n).all(|i| a.legs[(i + k) % n] == b.legs[i]))
        };
        let r = other.reversed();
        if !self.is_closed() || !other.is_closed() {
            return self == other || *self == r;
        }
        rotated(self, other) || rotated(self, &r)
    }

    /// The crossing sequence of this walk.
    pub fn to_curve(&self, t: &Triangulation) -> Curve {
        let hops = if self.is_closed() {
            self.legs.len()
        } else {
            self.legs.len().saturating_sub(1)
        };
        let crossings = (0..hops)
            .map(|i| {
                let l = self.legs[i];
                t.side(l.tri, l.exit).arc().expect("walks cross arcs only")
            })
            .collect();
        match (self.start, self.end) {
            (Some(s), Some(e)) => Curve::open(s, crossings, e),
            _ => Curve::closed(crossings),
        }
    }
}

fn spiral_exit(t: &Triangulation, tri: usize, entry: usize, p: usize, dir: SpiralDir) -> Result<usize> {
    let tr = &t.triangles()[tri];
    // an entry side ending at p pins the corner for ccw, one starting at p for cw
    let exit = match dir {
        SpiralDir::Ccw if tr.verts[(entry + 1) % 3] == p => (entry + 1) % 3,
        SpiralDir::Cw if tr.verts[entry] == p => (entry + 2) % 3,
        _ => {
            let corners: Vec<usize> = tr.corners_at(p).collect();
            let c = match corners.as_slice() {
                [c] => *c,
                [] => {
                    return Err(Error::MalformedCurve(format!(
                        "triangle {} has no corner at the spiral puncture",
                        tri + 1
                    )))
                }
                _ => {
                    return Err(Error::MalformedCurve(format!(
                        "ambiguous spiral corner in triangle {}",
                        tri + 1
                    )))
                }
            };
            match dir {
                SpiralDir::Ccw => c,
                SpiralDir::Cw => (c + 2) % 3,
            }
        }
    };
    if exit == entry {
        return Err(Error::MalformedCurve(format!(
            "spiral turns back in triangle {}",
            tri + 1
        )));
    }
    Ok(exit)
}

/// Walk for `curve`, found by following its crossings through `t`.
pub fn resolve(t: &Triangulation, curve: &Curve) -> Result<Walk> {
    curve.check_shape()?;
    for &a in &curve.crossings {
        if a >= t.arc_count() {
            return Err(Error::Index {
                index: a,
                rank: t.arc_count(),
            });
        }
    }
    for e in &curve.ends {
        match *e {
            CurveEnd::Boundary(b) if b >= t.boundary_names().len() => {
                return Err(Error::MalformedCurve(format!("unknown boundary segment {b}")))
            }
            CurveEnd::Spiral { puncture, .. }
                if !t.marked_points().get(puncture).is_some_and(|m| m.puncture) =>
            {
                return Err(Error::MalformedCurve(format!(
                    "spiral end at a non-puncture {puncture}"
                )))
            }
            _ => {}
        }
    }
    if curve.closed {
        return resolve_closed(t, curve);
    }
    if let CurveEnd::Spiral { .. } = curve.ends[0] {
        if let CurveEnd::Boundary(_) = curve.ends[1] {
            return Ok(resolve(t, &curve.reversed())?.reversed());
        }
    }
    let mut starts: Vec<Leg> = Vec::new();
    match curve.ends[0] {
        CurveEnd::Boundary(b) => {
            let (tri, slot) = t.boundary_slot(b);
            starts.push(Leg {
                tri,
                entry: slot,
                exit: usize::MAX,
            });
        }
        CurveEnd::Spiral { puncture, dir } => {
            // both ends spiral: the first leg is a reversed first spiral leg
            let Some(&first) = curve.crossings.first() else {
                return Err(Error::Unsupported(
                    "spiral-to-spiral curve crossing no arc".into(),
                ));
            };
            for (tri, slot) in t.arc_slots(first) {
                if let Ok(entry) = spiral_exit(t, tri, slot, puncture, dir) {
                    starts.push(Leg {
                        tri,
                        entry,
                        exit: usize::MAX,
                    });
                }
            }
        }
    }
    let mut found: Vec<Vec<Leg>> = Vec::new();
    for s in starts {
        let mut legs = vec![s];
        search_open(t, curve, &mut legs, &mut found);
    }
    match found.len() {
        1 => Ok(Walk {
            legs: found.pop().unwrap(),
            start: Some(curve.ends[0]),
            end: Some(curve.ends[1]),
        }),
        0 => Err(Error::MalformedCurve(
            "crossing sequence is inconsistent with the triangulation".into(),
        )),
        _ => Err(Error::MalformedCurve(
            "crossing sequence does not determine a unique path".into(),
        )),
    }
}

fn search_open(t: &Triangulation, curve: &Curve, legs: &mut Vec<Leg>, found: &mut Vec<Vec<Leg>>) {
    let i = legs.len() - 1;
    let cur = legs[i];
    let tri = &t.triangles()[cur.tri];
    if i == curve.crossings.len() {
        let exit = match curve.ends[1] {
            CurveEnd::Boundary(b) => {
                let (bt, bs) = t.boundary_slot(b);
                (bt == cur.tri && bs != cur.entry).then_some(bs)
            }
            CurveEnd::Spiral { puncture, dir } => spiral_exit(t, cur.tri, cur.entry, puncture, dir).ok(),
        };
        if let Some(exit) = exit {
            let mut done = legs.clone();
            done[i].exit = exit;
            found.push(done);
        }
        return;
    }
    let want = Edge::Arc(curve.crossings[i]);
    for q in (0..3).filter(|&q| q != cur.entry && tri.sides[q] == want) {
        let (nt, ns) = t.partner(cur.tri, q).unwrap();
        legs[i].exit = q;
        legs.push(Leg {
            tri: nt,
            entry: ns,
            exit: usize::MAX,
        });
        search_open(t, curve, legs, found);
        legs.pop();
    }
    legs[i].exit = usize::MAX;
}

fn resolve_closed(t: &Triangulation, curve: &Curve) -> Result<Walk> {
    let m = curve.crossings.len();
    let last = curve.crossings[m - 1];
    for (tri, slot) in t.arc_slots(last) {
        let (t0, s0) = t.partner(tri, slot).unwrap();
        let mut legs = vec![Leg {
            tri: t0,
            entry: s0,
            exit: usize::MAX,
        }];
        let mut found = Vec::new();
        follow_closed(t, curve, &mut legs, &mut found);
        if let Some(w) = found.into_iter().next() {
            return Ok(Walk {
                legs: w,
                start: None,
                end: None,
            });
        }
    }
    Err(Error::MalformedCurve(
        "closed crossing sequence does not close up".into(),
    ))
}

fn follow_closed(t: &Triangulation, curve: &Curve, legs: &mut Vec<Leg>, found: &mut Vec<Vec<Leg>>) {
    let i = legs.len() - 1;
    let cur = legs[i];
    let want = Edge::Arc(curve.crossings[i]);
    let tri = &t.triangles()[cur.tri];
    for q in (0..3).filter(|&q| q != cur.entry && tri.sides[q] == want) {
        let (nt, ns) = t.partner(cur.tri, q).unwrap();
        legs[i].exit = q;
        if i + 1 == curve.crossings.len() {
            if (nt, ns) == (legs[0].tri, legs[0].entry) {
                found.push(legs.clone());
            }
        } else {
            legs.push(Leg {
                tri: nt,
                entry: ns,
                exit: usize::MAX,
            });
            follow_closed(t, curve, legs, found);
            legs.pop();
        }
    }
    legs[i].exit = usize::MAX;
}

/// Legs circling `p` after `last`, `count` of them.
fn spiral_tail(t: &Triangulation, last: Leg, p: usize, dir: SpiralDir, count: usize) -> Result<Vec<Leg>> {
    let mut out = Vec::with_capacity(count);
    let mut cur = last;
    for _ in 0..count {
        let (tri, entry) = t.partner(cur.tri, cur.exit).ok_or_else(|| {
            Error::MalformedCurve("spiral runs into the boundary".into())
        })?;
        let exit = spiral_exit(t, tri, entry, p, dir)?;
        cur = Leg { tri, entry, exit };
        out.push(cur);
    }
    Ok(out)
}

fn corners_around(t: &Triangulation, p: usize) -> usize {
    t.triangles().iter().map(|tr| tr.corners_at(p).count()).sum()
}

/// The walk with each spiral end unrolled `turns` extra times around its
/// puncture; the result has no spiral bookkeeping left to do.
pub fn unrolled(t: &Triangulation, w: &Walk, turns: usize) -> Result<Vec<Leg>> {
    let mut legs = w.legs.clone();
    if let Some(CurveEnd::Spiral { puncture, dir }) = w.end {
        let last = *legs.last().unwrap();
        legs.extend(spiral_tail(t, last, puncture, dir, turns * corners_around(t, puncture))?);
    }
    if let Some(CurveEnd::Spiral { puncture, dir }) = w.start {
        let first = legs[0];
        let rev = Leg {
            tri: first.tri,
            entry: first.exit,
            exit: first.entry,
        };
        let head = spiral_tail(t, rev, puncture, dir, turns * corners_around(t, puncture))?;
        let mut out: Vec<Leg> = head
            .into_iter()
            .rev()
            .map(|l| Leg {
                tri: l.tri,
                entry: l.exit,
                exit: l.entry,
            })
            .collect();
        out.extend(legs);
        legs = out;
    }
    Ok(legs)
}

/// `+1`, `-1` or `0` for the crossing from leg `a` into leg `b`.
fn crossing_sign(a: Leg, b: Leg) -> i64 {
    let red_in = a.entry == (a.exit + 1) % 3;
    let blue_in = a.entry == (a.exit + 2) % 3;
    let red_out = b.exit == (b.entry + 1) % 3;
    let blue_out = b.exit == (b.entry + 2) % 3;
    match (red_in && red_out, blue_in && blue_out) {
        (true, _) => 1,
        (_, true) => -1,
        _ => 0,
    }
}

/// Per-arc sums of crossing signs, skipping crossings of radii.
fn raw_shear(t: &Triangulation, legs: &[Leg], closed: bool) -> Vec<i64> {
    let mut v = vec![0i64; t.arc_count()];
    let hops = if closed { legs.len() } else { legs.len().saturating_sub(1) };
    for i in 0..hops {
        let (a, b) = (legs[i], legs[(i + 1) % legs.len()]);
        let arc = t.side(a.tri, a.exit).arc().expect("walks cross arcs only");
        if t.radius_info(arc).is_none() {
            v[arc] += crossing_sign(a, b);
        }
    }
    v
}

const MAX_TURNS: usize = 32;

/// Shear vector of a walk whose spirals are read against `t` as given
/// (no tag handling), with radius coordinates still missing.
fn loop_shear(t: &Triangulation, w: &Walk) -> Result<Vec<i64>> {
    if w.is_closed() {
        return Ok(raw_shear(t, &w.legs, true));
    }
    let has_spiral = matches!(w.start, Some(CurveEnd::Spiral { .. }))
        || matches!(w.end, Some(CurveEnd::Spiral { .. }));
    if !has_spiral {
        return Ok(raw_shear(t, &w.legs, false));
    }
    let mut prev = raw_shear(t, &unrolled(t, w, 1)?, false);
    for k in 2..=MAX_TURNS {
        let next = raw_shear(t, &unrolled(t, w, k)?, false);
        if next == prev {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Resource("spiral contributions did not stabilise".into()))
}

/// The walk with every spiral at `p` turning the other way.
pub fn reverse_spirals_at(t: &Triangulation, w: &Walk, p: usize) -> Result<Walk> {
    let mut w = w.clone();
    if let Some(CurveEnd::Spiral { puncture, dir }) = w.end {
        if puncture == p {
            w.end = Some(CurveEnd::Spiral {
                puncture,
                dir: dir.reversed(),
            });
            w = rethread_end(t, w)?;
        }
    }
    if let Some(CurveEnd::Spiral { puncture, dir }) = w.start {
        if puncture == p {
            let mut r = w.reversed();
            r.end = Some(CurveEnd::Spiral {
                puncture,
                dir: dir.reversed(),
            });
            w = rethread_end(t, r)?.reversed();
        }
    }
    Ok(w)
}

/// Recomputes the first spiral leg after a change of direction, backing off
/// legs that would turn straight back.
fn rethread_end(t: &Triangulation, mut w: Walk) -> Result<Walk> {
    let Some(CurveEnd::Spiral { puncture, dir }) = w.end else {
        return Ok(w);
    };
    loop {
        let last = w.legs.len() - 1;
        let l = w.legs[last];
        match spiral_exit(t, l.tri, l.entry, puncture, dir) {
            Ok(exit) => {
                w.legs[last].exit = exit;
                return Ok(w);
            }
            Err(_) if last > 0 => {
                w.legs.pop();
            }
            Err(e) => return Err(e),
        }
    }
}

/// Shear coordinates of a resolved walk, with tags taken into account.
pub fn walk_shear(t: &Triangulation, w: &Walk) -> Result<ShearVector> {
    let mut w = w.clone();
    for p in t.notched_punctures() {
        w = reverse_spirals_at(t, &w, p)?;
    }
    let mut v = loop_shear(t, &w)?;
    for a in 0..t.arc_count() {
        if let Some((_, p, l)) = t.radius_info(a) {
            let wr = reverse_spirals_at(t, &w, p)?;
            v[a] = loop_shear(t, &wr)?[l];
        }
    }
    Ok(ShearVector::new(v.into_iter().map(int).collect()))
}

/// Shear coordinates of `curve` with respect to `t`.
pub fn shear_coordinates(t: &Triangulation, curve: &Curve) -> Result<ShearVector> {
    walk_shear(t, &resolve(t, curve)?)
}

const TRANSPORT_TURNS: usize = 3;

/// The same curve as a walk in the triangulation obtained by flipping `arc`.
pub fn flip_walk(t: &Triangulation, w: &Walk, arc: usize) -> Result<(Triangulation, Walk)> {
    let (nt, map) = t.flip_with_map(arc)?;
    let mut legs = unrolled(t, w, TRANSPORT_TURNS)?;
    // an unrolled spiral must not stop right on the flipped arc
    if let Some(CurveEnd::Spiral { puncture, dir }) = w.end {
        while legs.last().is_some_and(|l| map.is_flipped(l.tri, l.exit)) {
            let last = *legs.last().unwrap();
            legs.extend(spiral_tail(t, last, puncture, dir, 1)?);
        }
    }
    if let Some(CurveEnd::Spiral { puncture, dir }) = w.start {
        while map.is_flipped(legs[0].tri, legs[0].entry) {
            let rev = Leg {
                tri: legs[0].tri,
                entry: legs[0].exit,
                exit: legs[0].entry,
            };
            let l = spiral_tail(t, rev, puncture, dir, 1)?[0];
            legs.insert(
                0,
                Leg {
                    tri: l.tri,
                    entry: l.exit,
                    exit: l.entry,
                },
            );
        }
    }
    let closed = w.is_closed();
    let mut legs = if closed {
        // rotate so the cycle starts right after a crossing of an unflipped arc
        let n = legs.len();
        let Some(k) = (0..n).find(|&k| {
            let prev = legs[(k + n - 1) % n];
            !map.is_flipped(prev.tri, prev.exit)
        }) else {
            return Err(Error::MalformedCurve(
                "closed curve crosses only the flipped arc".into(),
            ));
        };
        let mut r = legs[k..].to_vec();
        r.extend_from_slice(&legs[..k]);
        transport_legs(&r, &map)?
    } else {
        transport_legs(&legs, &map)?
    };
    if closed {
        check_glued(&nt, &legs, true)?;
        return Ok((
            nt,
            Walk {
                legs,
                start: None,
                end: None,
            },
        ));
    }
    check_glued(&nt, &legs, false)?;
    let mut out = Walk {
        legs: std::mem::take(&mut legs),
        start: w.start,
        end: w.end,
    };
    out = refold_end(&nt, out)?;
    out = refold_end(&nt, out.reversed())?.reversed();
    Ok((nt, out))
}

fn transport_legs(legs: &[Leg], map: &FlipMap) -> Result<Vec<Leg>> {
    let mut out = Vec::with_capacity(legs.len() + 4);
    let mut i = 0;
    while i < legs.len() {
        let l = legs[i];
        if !map.in_quad(l.tri) {
            out.push(l);
            i += 1;
            continue;
        }
        // a run stays in the quadrilateral by crossing the flipped arc only
        let mut j = i;
        while j + 1 < legs.len() && map.is_flipped(legs[j].tri, legs[j].exit) {
            j += 1;
        }
        if map.is_flipped(l.tri, l.entry) || map.is_flipped(legs[j].tri, legs[j].exit) {
            return Err(Error::MalformedCurve(
                "walk ends on the flipped arc".into(),
            ));
        }
        let (t1, s1) = map.map_side(l.tri, l.entry);
        let (t2, s2) = map.map_side(legs[j].tri, legs[j].exit);
        if t1 == t2 {
            if s1 == s2 {
                return Err(Error::MalformedCurve(
                    "curve is not in minimal position".into(),
                ));
            }
            out.push(Leg {
                tri: t1,
                entry: s1,
                exit: s2,
            });
        } else {
            out.push(Leg {
                tri: t1,
                entry: s1,
                exit: 2,
            });
            out.push(Leg {
                tri: t2,
                entry: 2,
                exit: s2,
            });
        }
        i = j + 1;
    }
    Ok(out)
}

fn check_glued(t: &Triangulation, legs: &[Leg], closed: bool) -> Result<()> {
    let hops = if closed { legs.len() } else { legs.len().saturating_sub(1) };
    for i in 0..hops {
        let (a, b) = (legs[i], legs[(i + 1) % legs.len()]);
        if a.entry == a.exit || t.partner(a.tri, a.exit) != Some((b.tri, b.entry)) {
            return Err(Error::MalformedCurve("transported walk is not glued".into()));
        }
    }
    Ok(())
}

/// Cuts an unrolled spiral end back to its first spiral leg.
fn refold_end(t: &Triangulation, mut w: Walk) -> Result<Walk> {
    let Some(CurveEnd::Spiral { puncture, dir }) = w.end else {
        return Ok(w);
    };
    for j in 0..w.legs.len() {
        let l = w.legs[j];
        let Ok(exit) = spiral_exit(t, l.tri, l.entry, puncture, dir) else {
            continue;
        };
        if exit != l.exit {
            continue;
        }
        let rest = w.legs.len() - j - 1;
        if spiral_tail(t, l, puncture, dir, rest).is_ok_and(|tail| tail[..] == w.legs[j + 1..]) {
            w.legs.truncate(j + 1);
            return Ok(w);
        }
    }
    Err(Error::MalformedCurve(
        "transported spiral does not settle".into(),
    ))
}
