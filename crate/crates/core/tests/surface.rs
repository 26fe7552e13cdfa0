use mutfan::surface::presets::{annulus, hexagon, punctured_digon};
use mutfan::surface::{
    annulus_allowable_curves, annulus_shear, cover_curve, elementary_lamination_check, flip_walk,
    resolve, shear_coordinates, walk_shear, AnnulusCurve, AnnulusFamily, CoverPath, Curve,
    CurveEnd, SpiralDir, Triangulation, Walk,
};
use mutfan::{eta_step, ExchangeMatrix, ShearVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(x: &[i64]) -> ShearVector {
    ShearVector::from_ints(x)
}

fn b_annulus() -> ExchangeMatrix {
    ExchangeMatrix::new(vec![vec![0, 1, 1], vec![-1, 0, 1], vec![-1, -1, 0]]).unwrap()
}

#[test]
fn annulus_signed_adjacency_is_reference_matrix() {
    assert_eq!(annulus().signed_adjacency().unwrap(), b_annulus());
}

#[test]
fn flips_mutate_signed_adjacency() {
    for t in [annulus(), punctured_digon(), hexagon()] {
        let b = t.signed_adjacency().unwrap();
        for k in 0..t.arc_count() {
            let f = t.flip(k).unwrap();
            assert_eq!(f.signed_adjacency().unwrap(), b.mutate(k).unwrap());
            assert!(!f.same_tagged(&t));
            assert!(f.flip(k).unwrap().same_tagged(&t), "flip {k} twice");
        }
    }
}

#[test]
fn random_flip_sequences_mutate_signed_adjacency() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t0 in [annulus(), punctured_digon(), hexagon()] {
        for _ in 0..20 {
            let mut t = t0.clone();
            let mut b = t.signed_adjacency().unwrap();
            for _ in 0..8 {
                let k = rng.gen_range(0..t.arc_count());
                t = t.flip(k).unwrap();
                b = b.mutate(k).unwrap();
                assert_eq!(t.signed_adjacency().unwrap(), b);
            }
        }
    }
}

#[test]
fn punctured_digon_two_radii_has_zero_matrix() {
    assert_eq!(punctured_digon().signed_adjacency().unwrap(), ExchangeMatrix::zero(2));
}

#[test]
fn named_annulus_curves_have_reference_shears() {
    let t = annulus();
    let expect = [
        (AnnulusFamily::One, [-1, 0, 0]),
        (AnnulusFamily::Two, [0, 1, 0]),
        (AnnulusFamily::Three, [0, -1, 0]),
        (AnnulusFamily::Four, [0, 0, 1]),
        (AnnulusFamily::Plus, [0, 1, -1]),
        (AnnulusFamily::Minus, [1, -1, 0]),
        (AnnulusFamily::Infinity, [1, 0, -1]),
    ];
    for (f, want) in expect {
        let c = AnnulusCurve::new(f, 0).unwrap();
        assert_eq!(shear_coordinates(&t, &c.to_curve()).unwrap(), v(&want), "{c}");
    }
}

#[test]
fn spiral_family_matches_closed_form() {
    let t = annulus();
    for c in annulus_allowable_curves(4) {
        let walked = shear_coordinates(&t, &cover_curve(&c.cover_path()).unwrap()).unwrap();
        assert_eq!(walked, annulus_shear(&c), "{c}");
    }
    // the curve with two counterclockwise spirals, crossing list written out
    let l12 = Curve::open(
        CurveEnd::Boundary(0),
        vec![0, 1, 2, 0, 1, 2, 0],
        CurveEnd::Boundary(2),
    );
    assert_eq!(shear_coordinates(&t, &l12).unwrap(), v(&[1, 0, -2]));
}

#[test]
fn curve_crossing_nothing_has_zero_shear() {
    let t = hexagon();
    // segments 0-1 and 1-2 share the triangle 0,2,1
    let c = Curve::open(CurveEnd::Boundary(0), vec![], CurveEnd::Boundary(1));
    assert_eq!(shear_coordinates(&t, &c).unwrap(), v(&[0, 0, 0]));
}

#[test]
fn malformed_curves_are_rejected() {
    let t = annulus();
    // arc 2 is not a side of the triangle containing segment c twice over
    let bad = Curve::open(CurveEnd::Boundary(0), vec![1], CurveEnd::Boundary(2));
    assert!(shear_coordinates(&t, &bad).is_err());
    // crossing arc 0 and straight back is a bigon
    let bigon = Curve::open(CurveEnd::Boundary(0), vec![0, 0], CurveEnd::Boundary(0));
    assert!(shear_coordinates(&t, &bigon).is_err());
    let open_without_ends = Curve {
        ends: vec![],
        crossings: vec![0],
        closed: false,
    };
    assert!(shear_coordinates(&t, &open_without_ends).is_err());
}

#[test]
fn elementary_laminations_give_negative_unit_vectors() {
    let t = annulus();
    for k in 0..3 {
        let mut want = vec![0; 3];
        want[k] = -1;
        assert_eq!(elementary_lamination_check(&t, k).unwrap(), v(&want));
    }
    assert!(elementary_lamination_check(&hexagon(), 0).is_err());
}

/// Follows a walk through a flip sequence and checks every step against the
/// mutation maps.
fn check_transport(t0: &Triangulation, w0: &Walk, seq: &[usize]) {
    let mut t = t0.clone();
    let mut w = w0.clone();
    let mut a = walk_shear(&t, &w).unwrap();
    for &k in seq {
        let b = t.signed_adjacency().unwrap();
        let (nt, nw) = flip_walk(&t, &w, k).unwrap();
        let got = walk_shear(&nt, &nw).unwrap();
        let want = eta_step(&b, k, &a).unwrap();
        assert_eq!(got, want, "flip {k} in sequence {seq:?}");
        // the crossing list determines the walk unless it passes a puncture
        // inside a self-folded triangle
        match resolve(&nt, &nw.to_curve(&nt)) {
            Ok(r) => assert!(r.same_curve(&nw), "{r:?} vs {nw:?}"),
            Err(e) => {
                assert!(e.to_string().contains("unique"), "{e}");
                assert!(nw.legs.iter().any(|l| nt.triangles()[l.tri].is_self_folded()));
            }
        }
        t = nt;
        w = nw;
        a = got;
    }
}

#[test]
fn annulus_shears_follow_mutation_maps() {
    let t = annulus();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for c in annulus_allowable_curves(3) {
        let w = resolve(&t, &c.to_curve()).unwrap();
        for k in 0..3 {
            check_transport(&t, &w, &[k]);
        }
        for _ in 0..6 {
            let seq: Vec<usize> = (0..6).map(|_| rng.gen_range(0..3)).collect();
            check_transport(&t, &w, &seq);
        }
    }
}

fn digon_curves() -> Vec<Curve> {
    let mut out = Vec::new();
    for b in [0, 1] {
        for dir in [SpiralDir::Ccw, SpiralDir::Cw] {
            let s = CurveEnd::Spiral { puncture: 2, dir };
            out.push(Curve::open(CurveEnd::Boundary(b), vec![], s));
            out.push(Curve::open(s, vec![], CurveEnd::Boundary(b)));
        }
        out.push(Curve::open(CurveEnd::Boundary(b), vec![0], CurveEnd::Boundary(1 - b)));
        out.push(Curve::open(CurveEnd::Boundary(b), vec![1], CurveEnd::Boundary(1 - b)));
    }
    out
}

#[test]
fn digon_spiral_examples() {
    let t = punctured_digon();
    let ccw = Curve::open(
        CurveEnd::Boundary(0),
        vec![],
        CurveEnd::Spiral {
            puncture: 2,
            dir: SpiralDir::Ccw,
        },
    );
    assert_eq!(shear_coordinates(&t, &ccw).unwrap(), v(&[1, 0]));
    let w = resolve(&t, &ccw).unwrap();
    let (f, fw) = flip_walk(&t, &w, 0).unwrap();
    assert_eq!(walk_shear(&f, &fw).unwrap(), v(&[-1, 0]));
}

#[test]
fn digon_shears_follow_mutation_maps_through_tagged_flips() {
    let t = punctured_digon();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for c in digon_curves() {
        let w = resolve(&t, &c).unwrap();
        for seq in [vec![0], vec![1], vec![0, 1], vec![0, 0], vec![1, 0, 1, 0]] {
            check_transport(&t, &w, &seq);
        }
        for _ in 0..6 {
            let seq: Vec<usize> = (0..8).map(|_| rng.gen_range(0..2)).collect();
            check_transport(&t, &w, &seq);
        }
    }
}

#[test]
fn hexagon_shears_follow_mutation_maps() {
    let t = hexagon();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for s in 0..6 {
        for e in 0..6 {
            if s == e {
                continue;
            }
            // in a disk the dual graph is a tree, so each pair has one walk
            let Some(c) = (0..4usize)
                .flat_map(|len| {
                    (0..3usize.pow(len as u32)).map(move |code| {
                        (0..len).map(|i| code / 3usize.pow(i as u32) % 3).collect::<Vec<_>>()
                    })
                })
                .map(|xs| Curve::open(CurveEnd::Boundary(s), xs, CurveEnd::Boundary(e)))
                .find(|c| resolve(&t, c).is_ok())
            else {
                panic!("no walk from {s} to {e}");
            };
            let w = resolve(&t, &c).unwrap();
            for _ in 0..4 {
                let seq: Vec<usize> = (0..6).map(|_| rng.gen_range(0..3)).collect();
                check_transport(&t, &w, &seq);
            }
        }
    }
}

#[test]
fn closed_cover_path_gives_closed_curve() {
    let p = CoverPath {
        points: vec![
            (mutfan::rational::frac(1, 2), mutfan::rational::int(1)),
            (mutfan::rational::frac(1, 2), mutfan::rational::int(5)),
        ],
        closed: true,
    };
    let c = cover_curve(&p).unwrap();
    assert!(c.closed);
    assert_eq!(shear_coordinates(&annulus(), &c).unwrap(), v(&[1, 0, -1]));
}
