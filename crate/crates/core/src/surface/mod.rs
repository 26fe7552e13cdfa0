//! Triangulated marked surfaces, flips, signed adjacency and shear
//! coordinates of curves.

pub mod annulus;
pub mod curve;
pub mod triangulation;

pub use annulus::{
    annulus_allowable_curves, annulus_rays, annulus_shear, cover_curve, elementary_lamination_check, kappa,
    AnnulusCurve, AnnulusFamily, CoverPath,
};
pub use curve::{
    flip_walk, resolve, reverse_spirals_at, shear_coordinates, walk_shear, Curve, CurveEnd, Leg,
    SpiralDir, Walk,
};
pub use triangulation::{Edge, MarkedPoint, MarkedSurface, Triangle, Triangulation};

/// Reference triangulations.
pub mod presets {
    use super::triangulation::{Edge, MarkedPoint, Triangle, Triangulation};

    fn pt(name: &str, puncture: bool) -> MarkedPoint {
        MarkedPoint {
            name: name.into(),
            puncture,
        }
    }

    fn tri(sides: [Edge; 3], verts: [usize; 3]) -> Triangle {
        Triangle { sides, verts }
    }

    use Edge::{Arc as A, Boundary as S};

    /// The annulus with marked points `Q0` inside and `P1`, `P2` outside.
    /// Boundary segments: `c` (inner), `sR`, `sL`.
    pub fn annulus() -> Triangulation {
        Triangulation::new(
            3,
            vec!["c".into(), "sR".into(), "sL".into()],
            vec![pt("Q0", false), pt("P1", false), pt("P2", false)],
            vec![
                tri([A(2), S(1), A(1)], [0, 1, 2]),
                tri([A(0), A(1), S(2)], [1, 0, 2]),
                tri([S(0), A(0), A(2)], [0, 0, 1]),
            ],
            &[],
        )
        .expect("reference annulus is valid")
    }

    /// Once-punctured digon triangulated by the two radii `r1`, `r2` from
    /// the puncture `p`. Boundary segments `a` (from `P1` to `P2`) and `b`.
    pub fn punctured_digon() -> Triangulation {
        Triangulation::new(
            2,
            vec!["a".into(), "b".into()],
            vec![pt("P1", false), pt("P2", false), pt("p", true)],
            vec![
                tri([S(0), A(1), A(0)], [0, 1, 2]),
                tri([S(1), A(0), A(1)], [1, 0, 2]),
            ],
            &[],
        )
        .expect("reference digon is valid")
    }

    /// Hexagon with vertices `0..5` counterclockwise, triangulated by the
    /// diagonals `0-2`, `0-3`, `0-4` (arcs 0, 1, 2). Boundary segment `i`
    /// joins vertices `i` and `i + 1`.
    pub fn hexagon() -> Triangulation {
        let names = (0..6).map(|i| format!("s{}{}", i, (i + 1) % 6)).collect();
        let marked = (0..6).map(|i| pt(&i.to_string(), false)).collect();
        Triangulation::new(
            3,
            names,
            marked,
            vec![
                tri([A(0), S(1), S(0)], [0, 2, 1]),
                tri([A(1), S(2), A(0)], [0, 3, 2]),
                tri([A(2), S(3), A(1)], [0, 4, 3]),
                tri([S(5), S(4), A(2)], [0, 5, 4]),
            ],
            &[],
        )
        .expect("reference hexagon is valid")
    }
}
