//! The dual pair of a framed polygon.
//!
//! For a framed polygon `(X, U)` the dual `(Y, V)` lives on edges and is fixed
//! by six incidence relations per edge:
//!
//! ```text
//! Y(i+½)·X′(i+½) = 0   Y(i+½)·U(i) = 1   Y(i+½)·X(i) = 0
//! V(i+½)·X′(i+½) = 0   V(i+½)·U(i) = 0   V(i+½)·X(i) = 1
//! ```
//!
//! with closed forms `β·Y = X(i) × X(i+1)` and `β·V = X′(i+½) × U(i)`.
//!
//! Indexing: the dual of a node-indexed pair is edge-indexed. The dual of an
//! edge-indexed pair is node-indexed, with `X̂(i)` built from `Y(i−½)` and
//! `Y(i+½)`, so taking the dual twice returns to the original labels.

use crate::centroaffine::{coplanar_edges, flattening_nodes_of, FramedPolygon};
use crate::cyclic::{max_abs, node_diff, sign_of, EdgeSeq, NodeSeq, Sign, ToleranceConfig};
use crate::error::{Error, Result};
use crate::vector::{det3, Vec3};

/// Edge-indexed dual polygon `Y` with dual field `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    pub y: EdgeSeq<Vec3>,
    pub v: EdgeSeq<Vec3>,
    /// Origin of the source polygon, restored when dualizing back.
    pub origin: Vec3,
    pub cfg: ToleranceConfig,
}

/// Residuals of the dual-volume identities and the measured curvature sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualReport {
    /// `β(Y,V)(i)` against `α(i)/(β(i−½)β(i+½))`.
    pub beta_dual_residual: f64,
    /// `α(Y)(i+½)` against `α(i)α(i+1)/(β(i−½)β(i+½)β(i+3/2))`.
    pub alpha_dual_residual: f64,
    /// Sine of the angle between `V′(i)` and `Y′(i)`, maximized over nodes.
    pub wparallel_residual: f64,
    /// Global sign `σ` in `b(Y,V) = σ·λ(X,U)`.
    pub sign_sigma: i8,
    /// `max |b(Y,V) − σλ|` relative to `max |λ|`.
    pub sigma_residual: f64,
}

/// Per-edge comparison of coplanarity of `X(i−1..i+2)` with concurrency of
/// the dual normal lines at `i−½, i+½, i+3/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoplanarityReport {
    pub coplanar: Vec<bool>,
    pub concurrent: Vec<bool>,
}

impl CoplanarityReport {
    pub fn agreement(&self) -> Vec<bool> {
        self.coplanar
            .iter()
            .zip(&self.concurrent)
            .map(|(a, b)| a == b)
            .collect()
    }

    pub fn all_agree(&self) -> bool {
        self.coplanar == self.concurrent
    }
}

/// Flattening nodes of `X` next to vertex edges of the dual, both labelled by
/// the node `i` of `X` (the dual edge between `Y(i−½)` and `Y(i+½)`).
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    pub flattenings: Vec<usize>,
    pub dual_vertices: Vec<usize>,
}

impl Correspondence {
    pub fn agree(&self) -> bool {
        self.flattenings == self.dual_vertices
    }
}

fn relation_residual(value: f64, target: f64, magnitude: f64) -> f64 {
    (value - target).abs() / magnitude.max(target.abs()).max(f64::MIN_POSITIVE)
}

/// Closed-form dual of nodes/field at slots `k, k+1` (field at `k`), written
/// to slot `k`, with all defining relations checked.
fn dual_slots(
    x: &NodeSeq<Vec3>,
    u: &NodeSeq<Vec3>,
    parallel: bool,
    cfg: &ToleranceConfig,
) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    let n = x.n();
    let mut ys = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    let tol = cfg.tol_residual;
    for k in 0..n {
        let (x0, x1, u0) = (x[k], x[k + 1], u[k]);
        let xp = x1 - x0;
        let beta = det3(x0, x1, u0);
        let y = x0.cross(x1) / beta;
        let v = xp.cross(u0) / beta;

        let mut checks: Vec<(&'static str, f64)> = vec![
            ("Y.X' = 0", relation_residual(y.dot(xp), 0.0, y.norm() * xp.norm())),
            ("Y.U(i) = 1", relation_residual(y.dot(u0), 1.0, y.norm() * u0.norm())),
            ("Y.X(i) = 0", relation_residual(y.dot(x0), 0.0, y.norm() * x0.norm())),
            ("V.X' = 0", relation_residual(v.dot(xp), 0.0, v.norm() * xp.norm())),
            ("V.U(i) = 0", relation_residual(v.dot(u0), 0.0, v.norm() * u0.norm())),
            ("V.X(i) = 1", relation_residual(v.dot(x0), 1.0, v.norm() * x0.norm())),
        ];
        if parallel {
            let u1 = u[k + 1];
            checks.extend([
                ("Y.U(i+1) = 1", relation_residual(y.dot(u1), 1.0, y.norm() * u1.norm())),
                ("Y.X(i+1) = 0", relation_residual(y.dot(x1), 0.0, y.norm() * x1.norm())),
                ("V.U(i+1) = 0", relation_residual(v.dot(u1), 0.0, v.norm() * u1.norm())),
                ("V.X(i+1) = 1", relation_residual(v.dot(x1), 1.0, v.norm() * x1.norm())),
            ]);
        }
        if let Some(&(relation, residual)) = checks.iter().find(|(_, r)| !(*r <= tol)) {
            return Err(Error::DualityResidual { relation, residual });
        }
        ys.push(y);
        vs.push(v);
    }
    Ok((ys, vs))
}

/// The dual pair `(Y, V)` of `(X, U)`.
///
/// The six defining relations are always checked; when `U` is parallel the
/// four relations at the far node `i+1` are checked as well.
pub fn dual_pair(p: &FramedPolygon) -> Result<DualPair> {
    let cfg = *p.tolerances();
    let (y, v) = dual_slots(&p.rel_nodes(), p.field(), p.is_parallel(), &cfg)?;
    Ok(DualPair {
        y: EdgeSeq::new(y)?,
        v: EdgeSeq::new(v)?,
        origin: p.origin(),
        cfg,
    })
}

impl DualPair {
    pub fn n(&self) -> usize {
        self.y.n()
    }

    /// Views the dual as an ordinary framed polygon about the origin: node `j`
    /// of the result is the dual node at edge `j+½`, so edge `j+½` of the
    /// result sits at node `j+1` of the source.
    pub fn as_framed(&self) -> Result<FramedPolygon> {
        FramedPolygon::centered(
            self.y.clone().into_nodes(),
            self.v.clone().into_nodes(),
            self.cfg,
        )
    }

    /// `β(Y,V)(i) = [Y(i−½), Y(i+½), V(i+½)]`.
    pub fn beta_dual(&self) -> NodeSeq<f64> {
        let (y, v) = (&self.y, &self.v);
        NodeSeq::from_fn(self.n(), |i| {
            let i = i as i64;
            det3(*y.at(i - 1), *y.at(i), *v.at(i))
        })
        .expect("period preserved")
    }

    /// `α(Y)(i+½) = [Y(i−½), Y(i+½), Y(i+3/2)]`.
    pub fn alpha_dual(&self) -> EdgeSeq<f64> {
        let y = &self.y;
        EdgeSeq::from_fn(self.n(), |k| {
            let k = k as i64;
            det3(*y.at(k - 1), *y.at(k), *y.at(k + 1))
        })
        .expect("period preserved")
    }

    /// Dual curvature `b(Y,V)(i)` with `V′(i) = −b(Y,V)(i)·Y′(i)`, on the nodes
    /// of the source polygon.
    pub fn curvature(&self) -> Result<NodeSeq<f64>> {
        Ok(self.as_framed()?.curvature_b()?.into_nodes().rotated(-1))
    }

    /// Vertex edges of the dual, labelled by source node.
    pub fn vertices(&self) -> Result<Vec<usize>> {
        let n = self.n();
        let mut out: Vec<usize> = self
            .as_framed()?
            .vertex_edges()?
            .into_iter()
            .map(|j| (j + 1) % n)
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Concurrency of the dual normal lines at `i−½, i+½, i+3/2`, decided by
    /// `b(Y,V)(i) = b(Y,V)(i+1)` under the dead-band; indexed by edge `i+½`.
    pub fn concurrent_edges(&self) -> Result<Vec<bool>> {
        let framed = self.as_framed()?;
        let b = self.curvature()?;
        let db = node_diff(&b);
        let scale = max_abs(db.values())
            .max(max_abs(b.values()))
            .max(framed.curvature_scale());
        Ok(db
            .iter()
            .map(|&d| sign_of(d, scale, &self.cfg) == Sign::Zero)
            .collect())
    }

    /// The dual of this edge-indexed pair, which is node-indexed again.
    pub fn dual(&self) -> Result<FramedPolygon> {
        let framed = self.as_framed()?;
        let (x, u) = dual_slots(framed.nodes(), framed.field(), framed.is_parallel(), &self.cfg)?;
        let x = NodeSeq::new(x)?.rotated(-1).map(|p| *p + self.origin);
        let u = NodeSeq::new(u)?.rotated(-1);
        FramedPolygon::new(x, u, self.origin, self.cfg)
    }
}

/// `dual(dual(P))`, which equals `P` for a parallel field.
pub fn dual_of_dual(d: &DualPair) -> Result<FramedPolygon> {
    d.dual()
}

/// Largest node or field deviation of `dual(dual(P))` from `P`, relative to
/// the largest node or field magnitude.
pub fn involution_error(p: &FramedPolygon) -> Result<f64> {
    let back = dual_pair(p)?.dual()?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..p.n() {
        worst = worst
            .max((back.nodes()[i] - p.nodes()[i]).norm())
            .max((back.field()[i] - p.field()[i]).norm());
        scale = scale.max(p.nodes()[i].norm()).max(p.field()[i].norm());
    }
    Ok(worst / scale)
}

/// Dual volume identities, parallelism of `V′` and `Y′`, and the sign `σ`.
pub fn dual_invariants(p: &FramedPolygon, d: &DualPair) -> Result<DualReport> {
    let n = p.n();
    let alpha = p.alpha();
    let beta = p.beta();
    let beta_dual = d.beta_dual();
    let alpha_dual = d.alpha_dual();

    let mut beta_res = 0.0f64;
    let mut alpha_res = 0.0f64;
    for i in 0..n {
        let im = (i + n - 1) % n;
        let expected = alpha[i] / (beta[im] * beta[i]);
        beta_res = beta_res.max((beta_dual[i] - expected).abs() / expected.abs());
        let expected = alpha[i] * alpha[i + 1] / (beta[im] * beta[i] * beta[i + 1]);
        alpha_res = alpha_res.max((alpha_dual[i] - expected).abs() / expected.abs());
    }

    let mut wpar = 0.0f64;
    for i in 0..n as i64 {
        let dv = *d.v.at(i) - *d.v.at(i - 1);
        let dy = *d.y.at(i) - *d.y.at(i - 1);
        let mag = dv.norm() * dy.norm();
        if mag > 0.0 {
            wpar = wpar.max(dv.cross(dy).norm() / mag);
        }
    }

    let lambda = p.lambda()?;
    let b = d.curvature()?;
    let spread = |sigma: f64| {
        b.iter()
            .zip(lambda.iter())
            .fold(0.0f64, |m, (bv, l)| m.max((bv - sigma * l).abs()))
    };
    let (plus, minus) = (spread(1.0), spread(-1.0));
    let (sigma, best) = if plus <= minus { (1, plus) } else { (-1, minus) };
    let scale = max_abs(lambda.values()).max(max_abs(b.values()));
    Ok(DualReport {
        beta_dual_residual: beta_res,
        alpha_dual_residual: alpha_res,
        wparallel_residual: wpar,
        sign_sigma: sigma,
        sigma_residual: if scale > 0.0 { best / scale } else { 0.0 },
    })
}

/// Dual of the reframed pair `(X, cX + dU)`, checked against
/// `(d⁻¹Y, −c·d⁻¹Y + V)`.
pub fn reframed_dual(p: &FramedPolygon, c: f64, d: f64) -> Result<DualPair> {
    let base = dual_pair(p)?;
    let dual = dual_pair(&p.reframe(c, d)?)?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for k in 0..p.n() {
        let y = base.y[k] / d;
        let v = base.v[k] - base.y[k] * (c / d);
        worst = worst
            .max((dual.y[k] - y).norm())
            .max((dual.v[k] - v).norm());
        scale = scale.max(y.norm()).max(v.norm()).max(base.y[k].norm() * (c / d).abs());
    }
    let residual = worst / scale;
    if !(residual <= p.tolerances().tol_residual) {
        return Err(Error::DualityResidual {
            relation: "reframed dual = (Y/d, -cY/d + V)",
            residual,
        });
    }
    Ok(dual)
}

pub fn coplanarity_concurrency_check(p: &FramedPolygon) -> Result<CoplanarityReport> {
    p.curvature_b()?;
    let d = dual_pair(p)?;
    Ok(CoplanarityReport {
        coplanar: coplanar_edges(p.nodes(), p.tolerances()),
        concurrent: d.concurrent_edges()?,
    })
}

/// Flattening nodes of a generic `X` and vertex edges of its dual.
pub fn flattening_vertex_correspondence(p: &FramedPolygon) -> Result<Correspondence> {
    let flattenings = flattening_nodes_of(p.nodes(), p.tolerances())?;
    p.curvature_b()?;
    let dual_vertices = dual_pair(p)?.vertices()?;
    Ok(Correspondence {
        flattenings,
        dual_vertices,
    })
}

/// `b(Y,V)′(i+½) ≠ 0` on every edge under the dead-band.
pub fn dual_curvature_is_generic(p: &FramedPolygon) -> Result<bool> {
    p.curvature_b()?;
    Ok(dual_pair(p)?.concurrent_edges()?.iter().all(|c| !c))
}
