//! Subcommands other than `verify`.

use centroaffine::duality::{dual_invariants, dual_pair, involution_error};
use centroaffine::generators::{
    random_framed_polygon, random_integrable_equal_volume, random_planar_pair, random_radial_instance, GenConfig,
};
use centroaffine::pedal::{unpedal, PlanarPair};
use centroaffine::{
    ev_natural_field, DualPair, EdgeSeq, Error, FocalPoint, FramedPolygon, NodeSeq, ToleranceConfig, Vec3,
};
use serde_json::{json, Value};

use crate::document::{parse, render, tagged, PlanarDocument, PolygonDocument};
use crate::{Failure, Format, Kind, Output};

fn constant_field(n: usize) -> NodeSeq<Vec3> {
    NodeSeq::new(vec![Vec3::E3; n]).expect("n validated")
}

fn read_polygon(text: &str) -> Result<PolygonDocument, Failure> {
    let doc: PolygonDocument = parse(text)?;
    doc.validate()?;
    Ok(doc)
}

fn framed_from(doc: &PolygonDocument, cfg: ToleranceConfig) -> Result<FramedPolygon, Failure> {
    let field = doc.field_seq().unwrap_or_else(|| constant_field(doc.n));
    Ok(FramedPolygon::new(doc.node_seq(), field, doc.origin_vec(), cfg)?)
}

fn focal_json(p: &FramedPolygon) -> Value {
    match p.focal_points() {
        Ok(points) => {
            let values: Vec<Value> = points
                .iter()
                .map(|f| match f {
                    FocalPoint::Finite(e) => json!({ "kind": "finite", "point": e.to_array() }),
                    FocalPoint::AtInfinity(d) => json!({ "kind": "at_infinity", "direction": d.to_array() }),
                })
                .collect();
            tagged("edge", &values)
        }
        Err(_) => Value::Null,
    }
}

pub fn analyze(text: &str, cfg: ToleranceConfig) -> Result<Output, Failure> {
    let doc = read_polygon(text)?;
    if doc.indexing != "node" {
        return Err(Failure::input("analyze expects a node-indexed polygon"));
    }
    let p = framed_from(&doc, cfg)?;
    let features = p.features();
    let parallel = p.is_parallel();
    let out = json!({
        "n": p.n(),
        "reoriented": p.nodes() != &doc.node_seq(),
        "alpha": tagged("node", p.alpha().values()),
        "beta": tagged("edge", p.beta().values()),
        "delta": tagged("edge", p.delta().values()),
        "b": p.curvature_b().ok().map(|b| tagged("edge", b.values())),
        "lambda": p.lambda().ok().map(|l| tagged("node", l.values())),
        "focal_points": if parallel { focal_json(&p) } else { Value::Null },
        "vertices": features.vertices.map(|v| tagged("edge", &v)),
        "flattenings": features.flattenings.map(|f| tagged("node", &f)),
        "is_parallel": parallel,
        "is_generic": features.is_generic,
        "is_constant_curvature": features.is_constant_curvature,
        "is_equal_volume": p.is_equal_volume(),
        "is_unimodular": p.is_unimodular(),
    });
    Ok(Output::ok(render(&out) + "\n"))
}

fn dual_report(p: &FramedPolygon, d: &DualPair) -> Result<Value, Failure> {
    if !p.is_parallel() {
        return Ok(Value::Null);
    }
    let r = dual_invariants(p, d)?;
    Ok(json!({
        "beta_dual_residual": r.beta_dual_residual,
        "alpha_dual_residual": r.alpha_dual_residual,
        "wparallel_residual": r.wparallel_residual,
        "sigma_observed": r.sign_sigma,
        "sigma_residual": r.sigma_residual,
    }))
}

pub fn dual(text: &str, roundtrip: bool, cfg: ToleranceConfig) -> Result<Output, Failure> {
    let doc = read_polygon(text)?;
    let field = doc.field_seq().unwrap_or_else(|| constant_field(doc.n));
    // The node-indexed member of the pair drives the report and the round trip.
    let (primal, dual_doc) = if doc.indexing == "node" {
        let p = FramedPolygon::new(doc.node_seq(), field, doc.origin_vec(), cfg)?;
        let d = dual_pair(&p)?;
        let out = PolygonDocument::from_framed(
            &d.y.clone().into_nodes(),
            Some(&d.v.clone().into_nodes()),
            d.origin,
            "edge",
        );
        (p, out)
    } else {
        let pair = DualPair {
            y: doc.edge_seq(),
            v: field.into_edges(),
            origin: doc.origin_vec(),
            cfg,
        };
        let p = pair.dual()?;
        let out = PolygonDocument::from_framed(p.nodes(), Some(p.field()), p.origin(), "node");
        (p, out)
    };
    let d = dual_pair(&primal)?;
    let mut out = json!({
        "dual": dual_doc,
        "report": dual_report(&primal, &d)?,
    });
    let mut code = 0;
    if roundtrip {
        let err = involution_error(&primal)?;
        out["roundtrip_error"] = json!(err);
        if !(err <= cfg.tol_residual) {
            eprintln!("round trip deviates by {err:e}");
            code = 1;
        }
    }
    Ok(Output { text: render(&out) + "\n", code })
}

pub fn pedal(text: &str, invert: bool, cfg: ToleranceConfig) -> Result<Output, Failure> {
    if !invert {
        let doc: PlanarDocument = parse(text)?;
        doc.validate()?;
        if doc.indexing != "node" {
            return Err(Failure::input("pedal expects a node-indexed planar pair"));
        }
        let (x, u) = doc.seqs();
        let result = PlanarPair::centered(x, u, cfg)?.cylindrical_pedal()?;
        let y = result.pedal.into_nodes();
        let out = PolygonDocument::from_framed(&y, Some(&constant_field(y.n())), Vec3::ZERO, "edge");
        return Ok(Output::ok(render(&out) + "\n"));
    }

    let doc = read_polygon(text)?;
    if doc.indexing != "edge" {
        return Err(Failure::input("pedal --invert expects an edge-indexed polygon"));
    }
    let y: EdgeSeq<Vec3> = doc.edge_seq();
    let e = match doc.field_seq() {
        None => Vec3::E3,
        Some(v) if v.iter().all(|w| *w == v[0]) => v[0],
        Some(v) => {
            let framed = FramedPolygon::centered(doc.node_seq(), v, cfg)?;
            let witness = framed.constant_curvature_witness().map_err(|e| match e {
                Error::NotParallel { .. } => Failure::structural(format!("no planar preimage: {e}")),
                other => other.into(),
            })?;
            let Some(w) = witness else {
                return Err(Failure::structural(
                    "no planar preimage: the pair does not have constant curvature",
                ));
            };
            let b0 = framed.curvature_b()?[0];
            if b0 < 0.0 {
                -w
            } else {
                w
            }
        }
    };
    let pair = unpedal(&y, e, cfg).map_err(|e| match e {
        Error::NonTransversal { .. } => Failure::structural(format!("no planar preimage: {e}")),
        other => other.into(),
    })?;
    let out = PlanarDocument::from_pair(pair.x(), pair.u());
    Ok(Output::ok(render(&out) + "\n"))
}

pub fn generate(
    kind: Kind,
    n: usize,
    seed: u64,
    lambda_range: (f64, f64),
    cfg: ToleranceConfig,
) -> Result<Output, Failure> {
    let gen = GenConfig {
        seed,
        n,
        lambda_range,
        tolerances: cfg,
        ..GenConfig::default()
    };
    gen.validate()?;
    let failed = |e: Error| match e {
        Error::InvalidInput(_) | Error::PeriodTooShort(_) => Failure::from(e),
        other => Failure::generation(format!("generation failed: {other}")),
    };
    let text = match kind {
        Kind::Radial => {
            let inst = random_radial_instance(&gen).map_err(failed)?;
            render(&PolygonDocument::from_framed(&inst.x, Some(&constant_field(n)), Vec3::ZERO, "node"))
        }
        Kind::Framed => {
            let p = random_framed_polygon(&gen).map_err(failed)?;
            render(&PolygonDocument::from_framed(p.nodes(), Some(p.field()), p.origin(), "node"))
        }
        Kind::EqualVolume => {
            let x = random_integrable_equal_volume(&gen).map_err(failed)?;
            let natural = ev_natural_field(&x, &cfg).map_err(failed)?;
            render(&PolygonDocument::from_framed(&x, Some(&natural.field), Vec3::ZERO, "node"))
        }
        Kind::Planar => {
            let pair = random_planar_pair(&gen).map_err(failed)?;
            render(&PlanarDocument::from_pair(pair.x(), pair.u()))
        }
    };
    Ok(Output::ok(text + "\n"))
}

pub fn export(text: &str, format: Format, with_focal: bool, cfg: ToleranceConfig) -> Result<Output, Failure> {
    let doc = read_polygon(text)?;
    let Format::Obj = format;
    let mut out = String::from("o polygon\n");
    for p in &doc.nodes {
        out += &format!("v {} {} {}\n", p[0], p[1], p[2]);
    }
    let ring: Vec<String> = (1..=doc.n).chain([1]).map(|i| i.to_string()).collect();
    out += &format!("l {}\n", ring.join(" "));

    if with_focal {
        let p = framed_from(&doc, cfg)?;
        let points = p.focal_points()?;
        let finite: Vec<Vec3> = points
            .iter()
            .filter_map(|f| match f {
                FocalPoint::Finite(e) => Some(*e),
                FocalPoint::AtInfinity(_) => None,
            })
            .collect();
        let skipped = doc.n - finite.len();
        if skipped > 0 {
            eprintln!("warning: {skipped} focal points at infinity omitted");
        }
        if !finite.is_empty() {
            out += "o focal_points\n";
            for e in &finite {
                out += &format!("v {} {} {}\n", e.x, e.y, e.z);
            }
            let line: Vec<String> = (doc.n + 1..=doc.n + finite.len()).map(|i| i.to_string()).collect();
            out += &format!("l {}\n", line.join(" "));
        }
    }
    Ok(Output::ok(out))
}
