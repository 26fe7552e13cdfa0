//! JSON interchange. Every index on the wire is 1-based; rationals are
//! strings `"p"` or `"p/q"`. Writers go through [`serde_json::Value`], whose
//! maps are ordered, so keys come out sorted and output is byte-stable.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coherence::{
    DepthVerdict, IndependenceReport, SeparationCertificate, VerdictStatus, WeightedFamily,
};
use crate::error::{Error, Result};
use crate::eta::ShearVector;
use crate::exchange::{CoefficientRow, ExchangeMatrix, ExtendedExchangeMatrix, MutationSequence};
use crate::fan::{FanReport, FanTruncation, LabeledRay};
use crate::rational::{format_rat, parse_rat, Rat};
use crate::surface::{Curve, CurveEnd, Edge, MarkedPoint, SpiralDir, Triangle, Triangulation};
use crate::tangle::Tangle;

/// Deserialises with a diagnostic naming the failing field path, line and column.
pub fn from_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(s);
    serde_path_to_error::deserialize(de).map_err(|e| {
        // the inner message ends with the line and column
        let path = e.path().to_string();
        Error::Parse(format!("at `{}`: {}", path, e.into_inner()))
    })
}

/// Indented JSON with sorted keys and a trailing newline; arrays of scalars
/// stay on one line.
pub fn to_string<T: Serialize>(v: &T) -> String {
    let value = serde_json::to_value(v).expect("serialisable");
    let mut out = String::new();
    write_value(&value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Array(xs) if xs.iter().all(|x| !x.is_array() && !x.is_object()) => {
            let parts: Vec<String> = xs
                .iter()
                .map(|x| serde_json::to_string(x).expect("serialisable"))
                .collect();
            out.push('[');
            out.push_str(&parts.join(", "));
            out.push(']');
        }
        Value::Array(xs) => {
            out.push_str("[\n");
            for (i, x) in xs.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < xs.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("serialisable"));
                out.push_str(": ");
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        scalar => out.push_str(&serde_json::to_string(scalar).expect("serialisable")),
    }
}

/// A rational on the wire: a string, or a bare integer on input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireRat {
    Int(i64),
    Str(String),
}

impl WireRat {
    pub fn to_rat(&self) -> Result<Rat> {
        match self {
            WireRat::Int(i) => Ok(Rat::from_integer((*i).into())),
            WireRat::Str(s) => parse_rat(s),
        }
    }

    pub fn from_rat(x: &Rat) -> Self {
        WireRat::Str(format_rat(x))
    }
}

fn rats(v: &[WireRat]) -> Result<Vec<Rat>> {
    v.iter().map(WireRat::to_rat).collect()
}

pub fn vector_to_wire(v: &ShearVector) -> Vec<String> {
    v.as_slice().iter().map(format_rat).collect()
}

/// Parses `"1,0,-1"` or `"1/2, -3"`.
pub fn parse_vector_list(s: &str) -> Result<ShearVector> {
    let s = s.trim().trim_start_matches(['[', '(']).trim_end_matches([']', ')']);
    if s.trim().is_empty() {
        return Ok(ShearVector::new(vec![]));
    }
    s.split(',')
        .map(|x| parse_rat(x.trim()))
        .collect::<Result<Vec<_>>>()
        .map(ShearVector::new)
}

/// Parses `"2,1"` as a 1-based mutation sequence.
pub fn parse_sequence_list(s: &str) -> Result<MutationSequence> {
    let s = s.trim().trim_start_matches('[').trim_end_matches(']');
    if s.trim().is_empty() {
        return Ok(MutationSequence::empty());
    }
    let steps = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("mutation index {x:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    MutationSequence::from_one_based(&steps)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixWire {
    n: usize,
    rows: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeff_rows: Option<Vec<CoeffRowWire>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    integral: Option<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffRowWire {
    id: String,
    v: Vec<WireRat>,
}

fn matrix_from_wire(w: &MatrixWire) -> Result<ExchangeMatrix> {
    if w.rows.len() != w.n {
        return Err(Error::Shape(format!(
            "\"n\" is {} but {} rows are given",
            w.n,
            w.rows.len()
        )));
    }
    ExchangeMatrix::new(w.rows.clone())
}

/// Reads `{"n", "rows"}`; coefficient rows, if present, are ignored.
pub fn read_matrix(s: &str) -> Result<ExchangeMatrix> {
    matrix_from_wire(&from_str::<MatrixWire>(s)?)
}

pub fn read_extended(s: &str) -> Result<ExtendedExchangeMatrix> {
    let w: MatrixWire = from_str(s)?;
    let base = matrix_from_wire(&w)?;
    let rows = w
        .coeff_rows
        .iter()
        .flatten()
        .map(|r| {
            Ok(CoefficientRow {
                id: r.id.clone(),
                v: rats(&r.v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ExtendedExchangeMatrix::new(base, rows, w.integral.unwrap_or(false))
}

pub fn matrix_value(b: &ExchangeMatrix) -> Value {
    json!({"n": b.rank(), "rows": b.rows()})
}

pub fn extended_value(e: &ExtendedExchangeMatrix) -> Value {
    let rows: Vec<Value> = e
        .coefficient_rows()
        .iter()
        .map(|r| json!({"id": r.id, "v": r.v.iter().map(format_rat).collect::<Vec<_>>()}))
        .collect();
    json!({
        "n": e.base().rank(),
        "rows": e.base().rows(),
        "coeff_rows": rows,
        "integral": e.is_integral(),
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyWire {
    items: Vec<FamilyItemWire>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyItemWire {
    v: Vec<WireRat>,
    c: WireRat,
}

pub fn read_family(s: &str) -> Result<WeightedFamily> {
    let w: FamilyWire = from_str(s)?;
    WeightedFamily::new(
        w.items
            .iter()
            .map(|it| Ok((ShearVector::new(rats(&it.v)?), it.c.to_rat()?)))
            .collect::<Result<Vec<_>>>()?,
    )
}

pub fn family_value(f: &WeightedFamily) -> Value {
    let items: Vec<Value> = f
        .items()
        .iter()
        .map(|(v, c)| json!({"v": vector_to_wire(v), "c": format_rat(c)}))
        .collect();
    json!({ "items": items })
}

fn status_str(s: VerdictStatus) -> &'static str {
    match s {
        VerdictStatus::HoldsToDepth => "holds_to_depth",
        VerdictStatus::Refuted => "refuted",
    }
}

pub fn verdict_value(v: &DepthVerdict) -> Value {
    let mut out = json!({"status": status_str(v.status), "depth": v.depth});
    if let Some(w) = &v.witness {
        out["witness"] = json!({"seq": w.seq.one_based(), "coord": w.coord + 1});
    }
    out
}

/// `{"separated": false, "depth"}` when no certificate was found.
pub fn certificate_value(c: Option<&SeparationCertificate>, depth: usize) -> Value {
    match c {
        Some(c) => json!({
            "separated": true,
            "depth": depth,
            "seq": c.seq.one_based(),
            "coord": c.coord + 1,
            "signs": [c.signs.0, c.signs.1],
        }),
        None => json!({"separated": false, "depth": depth}),
    }
}

pub fn independence_value(r: &IndependenceReport) -> Value {
    let mut out = json!({
        "independent": r.independent(),
        "status": status_str(r.status),
        "depth": r.depth,
    });
    if let Some(k) = &r.killed_by {
        out["killed_by"] = json!(k.one_based());
    }
    if let Some(rel) = &r.relation {
        out["relation"] = json!(rel.iter().map(format_rat).collect::<Vec<_>>());
    }
    out
}

/// Ray list for fan construction: `{"rays": [{"id", "v"}], "truncation"?}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaysDoc {
    pub rays: Vec<LabeledRay>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

pub fn read_rays(s: &str) -> Result<RaysDoc> {
    from_str(s)
}

pub fn read_fan(s: &str) -> Result<FanTruncation> {
    from_str(s)
}

pub fn fan_value(f: &FanTruncation, report: Option<&FanReport>) -> Value {
    let mut v = serde_json::to_value(f).expect("serialisable");
    if let Some(r) = report {
        v["check"] = serde_json::to_value(r).expect("serialisable");
    }
    v
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeWire {
    Arc(usize),
    Boundary(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkedWire {
    name: String,
    #[serde(default)]
    puncture: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TriangleWire {
    sides: [EdgeWire; 3],
    vertices: [String; 3],
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct TagsWire {
    #[serde(default)]
    notched: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TriangulationWire {
    arcs: usize,
    boundary: Vec<String>,
    marked: Vec<MarkedWire>,
    triangles: Vec<TriangleWire>,
    #[serde(default)]
    tags: TagsWire,
}

pub fn read_triangulation(s: &str) -> Result<Triangulation> {
    let w: TriangulationWire = from_str(s)?;
    let marked: Vec<MarkedPoint> = w
        .marked
        .iter()
        .map(|m| MarkedPoint {
            name: m.name.clone(),
            puncture: m.puncture,
        })
        .collect();
    let point = |name: &str| {
        marked
            .iter()
            .position(|m| m.name == name)
            .ok_or_else(|| Error::Triangulation(format!("unknown marked point {name:?}")))
    };
    let mut tris = Vec::with_capacity(w.triangles.len());
    for (ti, t) in w.triangles.iter().enumerate() {
        let mut sides = [Edge::Arc(0); 3];
        for (slot, e) in t.sides.iter().enumerate() {
            sides[slot] = match e {
                EdgeWire::Arc(0) => {
                    return Err(Error::Triangulation(format!(
                        "triangle {}: arcs are numbered from 1",
                        ti + 1
                    )))
                }
                EdgeWire::Arc(a) => Edge::Arc(a - 1),
                EdgeWire::Boundary(name) => Edge::Boundary(
                    w.boundary.iter().position(|b| b == name).ok_or_else(|| {
                        Error::Triangulation(format!("unknown boundary segment {name:?}"))
                    })?,
                ),
            };
        }
        let mut verts = [0; 3];
        for (c, name) in t.vertices.iter().enumerate() {
            verts[c] = point(name)?;
        }
        tris.push(Triangle { sides, verts });
    }
    let notched = w
        .tags
        .notched
        .iter()
        .map(|n| point(n))
        .collect::<Result<Vec<_>>>()?;
    Triangulation::new(w.arcs, w.boundary.clone(), marked, tris, &notched)
}

pub fn triangulation_value(t: &Triangulation) -> Value {
    let names: Vec<&str> = t.marked_points().iter().map(|m| m.name.as_str()).collect();
    let triangles: Vec<TriangleWire> = t
        .triangles()
        .iter()
        .map(|tr| TriangleWire {
            sides: tr.sides.map(|e| match e {
                Edge::Arc(a) => EdgeWire::Arc(a + 1),
                Edge::Boundary(b) => EdgeWire::Boundary(t.boundary_names()[b].clone()),
            }),
            vertices: tr.verts.map(|v| names[v].to_string()),
        })
        .collect();
    let w = TriangulationWire {
        arcs: t.arc_count(),
        boundary: t.boundary_names().to_vec(),
        marked: t
            .marked_points()
            .iter()
            .map(|m| MarkedWire {
                name: m.name.clone(),
                puncture: m.puncture,
            })
            .collect(),
        triangles,
        tags: TagsWire {
            notched: t
                .notched_punctures()
                .iter()
                .map(|&p| names[p].to_string())
                .collect(),
        },
    };
    serde_json::to_value(w).expect("serialisable")
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DirWire {
    Cw,
    Ccw,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpiralWire {
    puncture: String,
    dir: DirWire,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum EndWire {
    Boundary(String),
    Spiral(SpiralWire),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveWire {
    #[serde(default)]
    ends: Vec<EndWire>,
    crossings: Vec<usize>,
    #[serde(default)]
    closed: bool,
}

/// Reads a curve whose names refer to `t`.
pub fn read_curve(s: &str, t: &Triangulation) -> Result<Curve> {
    let w: CurveWire = from_str(s)?;
    let ends = w
        .ends
        .iter()
        .map(|e| match e {
            EndWire::Boundary(name) => t
                .boundary_index(name)
                .map(CurveEnd::Boundary)
                .ok_or_else(|| Error::MalformedCurve(format!("unknown boundary segment {name:?}"))),
            EndWire::Spiral(sp) => {
                let p = t
                    .marked_index(&sp.puncture)
                    .ok_or_else(|| Error::MalformedCurve(format!("unknown puncture {:?}", sp.puncture)))?;
                Ok(CurveEnd::Spiral {
                    puncture: p,
                    dir: match sp.dir {
                        DirWire::Cw => SpiralDir::Cw,
                        DirWire::Ccw => SpiralDir::Ccw,
                    },
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let crossings = w
        .crossings
        .iter()
        .map(|&a| {
            a.checked_sub(1)
                .ok_or_else(|| Error::MalformedCurve("arcs are numbered from 1".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Curve {
        ends,
        crossings,
        closed: w.closed,
    })
}

pub fn curve_value(c: &Curve, t: &Triangulation) -> Value {
    let ends: Vec<EndWire> = c
        .ends
        .iter()
        .map(|e| match *e {
            CurveEnd::Boundary(b) => EndWire::Boundary(t.boundary_names()[b].clone()),
            CurveEnd::Spiral { puncture, dir } => EndWire::Spiral(SpiralWire {
                puncture: t.marked_points()[puncture].name.clone(),
                dir: match dir {
                    SpiralDir::Cw => DirWire::Cw,
                    SpiralDir::Ccw => DirWire::Ccw,
                },
            }),
        })
        .collect();
    serde_json::to_value(CurveWire {
        ends,
        crossings: c.crossings.iter().map(|a| a + 1).collect(),
        closed: c.closed,
    })
    .expect("serialisable")
}

pub fn read_tangle(s: &str) -> Result<Tangle> {
    from_str(s)
}

pub fn tangle_value(t: &Tangle) -> Value {
    serde_json::to_value(t).expect("serialisable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::presets;

    #[test]
    fn matrix_round_trip() {
        let s = r#"{"n":3,"rows":[[0,1,1],[-1,0,1],[-1,-1,0]]}"#;
        let b = read_matrix(s).unwrap();
        assert_eq!(read_matrix(&to_string(&matrix_value(&b))).unwrap(), b);
        assert!(read_matrix(r#"{"n":2,"rows":[[0,1,1],[-1,0,1],[-1,-1,0]]}"#).is_err());
    }

    #[test]
    fn extended_round_trip() {
        let s = r#"{"n":2,"rows":[[0,1],[-1,0]],"coeff_rows":[{"id":"a","v":["1/2",3]}]}"#;
        let e = read_extended(s).unwrap();
        assert_eq!(e.coefficient_rows()[0].v[0], crate::rational::frac(1, 2));
        assert_eq!(read_extended(&to_string(&extended_value(&e))).unwrap(), e);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = read_matrix(r#"{"n":2,"rows":[[0,"x"],[0,0]]}"#).unwrap_err().to_string();
        assert!(err.contains("rows[0][1]"), "{err}");
        assert!(err.contains("line 1"), "{err}");
        let err = read_family(r#"{"items":[{"v":[1],"c":"1/0"}]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err}");
    }

    #[test]
    fn scalar_arrays_are_inline() {
        let s = to_string(&json!({"b": [1, 2], "a": [[1, "x,y"]], "c": {}}));
        assert_eq!(s, "{\n  \"a\": [\n    [1, \"x,y\"]\n  ],\n  \"b\": [1, 2],\n  \"c\": {}\n}\n");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"][0][1], json!("x,y"));
    }

    #[test]
    fn keys_are_sorted() {
        let b = presets::annulus().signed_adjacency().unwrap();
        let s = to_string(&matrix_value(&b));
        assert!(s.find("\"n\"").unwrap() < s.find("\"rows\"").unwrap());
        let e = ExtendedExchangeMatrix::new(b, vec![], false).unwrap();
        let s = to_string(&extended_value(&e));
        let pos = |k: &str| s.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("coeff_rows") < pos("integral") && pos("integral") < pos("n"));
    }

    #[test]
    fn triangulation_and_curve_round_trip() {
        for t in [presets::annulus(), presets::punctured_digon(), presets::hexagon()] {
            let back = read_triangulation(&to_string(&triangulation_value(&t))).unwrap();
            assert!(back.same_tagged(&t));
            assert_eq!(back.signed_adjacency().unwrap(), t.signed_adjacency().unwrap());
        }
        let t = presets::punctured_digon().flip(0).unwrap().flip(1).unwrap();
        assert!(!t.notched_punctures().is_empty());
        let back = read_triangulation(&to_string(&triangulation_value(&t))).unwrap();
        assert!(back.same_tagged(&t));
        let c = Curve::open(
            CurveEnd::Boundary(1),
            vec![0],
            CurveEnd::Spiral {
                puncture: 2,
                dir: SpiralDir::Cw,
            },
        );
        let s = to_string(&curve_value(&c, &t));
        assert!(s.contains("\"spiral\""));
        assert_eq!(read_curve(&s, &t).unwrap(), c);
    }

    #[test]
    fn vector_and_sequence_lists() {
        assert_eq!(
            parse_vector_list("1, 0,-1/2").unwrap(),
            ShearVector::new(vec![
                crate::rational::int(1),
                crate::rational::int(0),
                crate::rational::frac(-1, 2)
            ])
        );
        assert_eq!(parse_sequence_list("2,1").unwrap().steps(), &[1, 0]);
        assert!(parse_sequence_list("0").is_err());
        assert!(parse_sequence_list("").unwrap().is_empty());
    }

    #[test]
    fn tangle_json() {
        let s = r#"{"items":[{"curve":{"family":"+","n":0},"w":1},{"curve":{"shear":[1,0,0]},"w":-2}]}"#;
        let t = read_tangle(s).unwrap();
        assert_eq!(t.items().len(), 2);
        assert_eq!(read_tangle(&to_string(&tangle_value(&t))).unwrap(), t);
        let dup = r#"{"items":[{"curve":{"family":"1","n":-1},"w":1},{"curve":{"family":"2","n":0},"w":1}]}"#;
        assert!(read_tangle(dup).is_err());
    }

    #[test]
    fn verdict_and_certificate_are_one_based() {
        let b = presets::annulus().signed_adjacency().unwrap();
        let c = crate::find_separating_sequence(
            &b,
            &ShearVector::from_ints(&[0, 1, -1]),
            &ShearVector::from_ints(&[1, -1, 0]),
            8,
        )
        .unwrap();
        let v = certificate_value(c.as_ref(), 8);
        assert_eq!(v["coord"], json!(2));
        assert_eq!(v["seq"], json!([]));
        assert_eq!(certificate_value(None, 3), json!({"separated": false, "depth": 3}));
    }
}
