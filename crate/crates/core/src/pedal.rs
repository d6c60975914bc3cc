//! Planar pairs, liftings and the affine cylindrical pedal.
//!
//! A planar pair `(x, u)` lifts to the spatial pair `X = (x, 1)`, `U = (u, 0)`.
//! Its affine cylindrical pedal `Y(i+½) = (y(i+½), −y(i+½)·x(i))`, built from
//! the co-normal `y` (`y·x′ = 0`, `y·u = 1`), is the dual of the lifting with
//! the constant field `E = (0, 0, 1)`. Conversely, any locally convex polygon
//! transversal to a constant field is such a pedal ([`unpedal`]).

use std::f64::consts::TAU;

use nalgebra::Matrix3;

use crate::centroaffine::{junction_edges, FramedPolygon};
use crate::cyclic::{
    edge_diff, max_abs, node_diff, sign_of, strict_signs, EdgeSeq, NodeSeq, Sign, ToleranceConfig,
};
use crate::duality::{dual_pair, DualPair};
use crate::error::{Error, Result};
use crate::vector::{Vec2, Vec3};

/// A planar polygon `x` with a transversal planar field `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPair {
    x: NodeSeq<Vec2>,
    u: NodeSeq<Vec2>,
    origin: Vec2,
    cfg: ToleranceConfig,
}

/// Pedal polygon `Y`, co-normals `y` and pedal heights `−y(i+½)·x(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PedalResult {
    pub pedal: EdgeSeq<Vec3>,
    pub co_normal: EdgeSeq<Vec2>,
    pub heights: EdgeSeq<f64>,
}

/// A polygon `X(i) = λ(i)·(γ(i), 1)` over a planar polygon `γ`.
///
/// The radial scales here are unrelated to the osculating coefficient of
/// [`FramedPolygon::lambda`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialInstance {
    pub gamma: NodeSeq<Vec2>,
    pub scales: NodeSeq<f64>,
    pub x: NodeSeq<Vec3>,
}

impl PlanarPair {
    pub fn new(x: NodeSeq<Vec2>, u: NodeSeq<Vec2>, origin: Vec2, cfg: ToleranceConfig) -> Result<Self> {
        if u.n() != x.n() {
            return Err(Error::LengthMismatch {
                what: "field",
                got: u.n(),
                expected: x.n(),
            });
        }
        if !x.iter().all(|p| p.is_finite()) {
            return Err(Error::NonFinite("nodes"));
        }
        if !u.iter().all(|p| p.is_finite()) || !origin.is_finite() {
            return Err(Error::NonFinite("field"));
        }
        let dx = node_diff(&x);
        for k in 0..x.n() {
            let area = dx[k].cross(u[k]);
            if sign_of(area, dx[k].norm() * u[k].norm(), &cfg) != Sign::Positive {
                return Err(Error::NonTransversal { edge: k });
            }
        }
        Ok(PlanarPair { x, u, origin, cfg })
    }

    pub fn centered(x: NodeSeq<Vec2>, u: NodeSeq<Vec2>, cfg: ToleranceConfig) -> Result<Self> {
        Self::new(x, u, Vec2::ZERO, cfg)
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn x(&self) -> &NodeSeq<Vec2> {
        &self.x
    }

    pub fn u(&self) -> &NodeSeq<Vec2> {
        &self.u
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn tolerances(&self) -> &ToleranceConfig {
        &self.cfg
    }

    fn rel_x(&self) -> NodeSeq<Vec2> {
        self.x.map(|p| *p - self.origin)
    }

    /// Edge curvatures with `u′ = −b·x′`.
    pub fn planar_curvature(&self) -> Result<EdgeSeq<f64>> {
        parallel_ratio(&self.x, &self.u, &self.cfg).map_err(|(edge, residual)| Error::NotParallel { edge, residual })
    }

    /// Co-normal `y(i+½)` with `y·x′(i+½) = 0` and `y·u(i) = 1`.
    pub fn co_normal(&self) -> EdgeSeq<Vec2> {
        let dx = node_diff(&self.x);
        EdgeSeq::from_fn(self.n(), |k| dx[k].perp() / dx[k].cross(self.u[k])).expect("period preserved")
    }

    /// `X = (x, 1)`, `U = (u, 0)`, with `b(X,U) = b(x,u)` checked when `u` is parallel.
    pub fn lift(&self) -> Result<FramedPolygon> {
        let x = self.rel_x().map(|p| p.lift(1.0));
        let u = self.u.map(|p| p.lift(0.0));
        let framed = FramedPolygon::centered(x, u, self.cfg)?;
        if let Ok(planar) = self.planar_curvature() {
            let spatial = framed.curvature_b()?;
            let scale = max_abs(planar.values()).max(framed.curvature_scale());
            let residual = planar
                .iter()
                .zip(spatial.iter())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                / scale.max(f64::MIN_POSITIVE);
            if !(residual <= self.cfg.tol_residual) {
                return Err(Error::Residual {
                    check: "lifted curvature equals planar curvature",
                    residual,
                });
            }
        }
        Ok(framed)
    }

    /// The affine cylindrical pedal.
    ///
    /// Checks that `(Y, E)` with `E = (0,0,1)` is the dual of the lifting and
    /// that it has constant curvature.
    pub fn cylindrical_pedal(&self) -> Result<PedalResult> {
        self.planar_curvature()?;
        let x = self.rel_x();
        let y = self.co_normal();
        let heights = EdgeSeq::from_fn(self.n(), |k| -y[k].dot(x[k]))?;
        let pedal = EdgeSeq::from_fn(self.n(), |k| y[k].lift(heights[k]))?;

        let dual = dual_pair(&self.lift()?)?;
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for k in 0..self.n() {
            worst = worst
                .max((dual.y[k] - pedal[k]).norm())
                .max((dual.v[k] - Vec3::E3).norm());
            scale = scale.max(pedal[k].norm());
        }
        let residual = worst / scale.max(1.0);
        if !(residual <= self.cfg.tol_residual) {
            return Err(Error::DualityResidual {
                relation: "pedal equals dual of lifting",
                residual,
            });
        }
        let with_e = pedal_pair(&pedal, Vec3::E3, self.cfg)?;
        if !with_e.is_constant_curvature()? {
            return Err(Error::Residual {
                check: "pedal pair has constant curvature",
                residual: 1.0,
            });
        }
        Ok(PedalResult {
            pedal,
            co_normal: y,
            heights,
        })
    }

    /// `[x(i)−x(i−1), x(i+1)−x(i)] ≡ 1`.
    pub fn is_equal_area(&self) -> bool {
        let dx = node_diff(&self.x);
        (0..self.n() as i64).all(|i| (dx.at(i - 1).cross(*dx.at(i)) - 1.0).abs() <= self.cfg.tol_residual)
    }

    /// `[x(i+1)−x(i), u(i)] ≡ 1`.
    pub fn is_unimodular(&self) -> bool {
        let dx = node_diff(&self.x);
        (0..self.n()).all(|k| (dx[k].cross(self.u[k]) - 1.0).abs() <= self.cfg.tol_residual)
    }
}

/// `(Y, E)` as a framed polygon about the origin; node `j` is edge `j+½` of `Y`.
fn pedal_pair(y: &EdgeSeq<Vec3>, e: Vec3, cfg: ToleranceConfig) -> Result<FramedPolygon> {
    FramedPolygon::centered(
        y.clone().into_nodes(),
        NodeSeq::new(vec![e; y.n()])?,
        cfg,
    )
}

/// Least-squares ratios `b` with `v′ = −b·y′`, or the first failing edge.
fn parallel_ratio(
    y: &NodeSeq<Vec2>,
    v: &NodeSeq<Vec2>,
    cfg: &ToleranceConfig,
) -> std::result::Result<EdgeSeq<f64>, (usize, f64)> {
    let dy = node_diff(y);
    let dv = node_diff(v);
    let mut b = Vec::with_capacity(y.n());
    for k in 0..y.n() {
        let bk = -dv[k].dot(dy[k]) / dy[k].dot(dy[k]);
        let scale = dv[k].norm() + bk.abs() * dy[k].norm() + v[k].norm();
        let residual = if scale > 0.0 {
            (dv[k] + dy[k] * bk).norm() / scale
        } else {
            0.0
        };
        if !(residual <= cfg.tol_residual) {
            return Err((k, residual));
        }
        b.push(bk);
    }
    Ok(EdgeSeq::new(b).expect("period preserved"))
}

/// Linear map with third row `e` and determinant 1, sending the plane
/// `e·p = 1` to `z = 1`. The identity when `e = (0,0,1)`.
fn plane_normalization(e: Vec3) -> Matrix3<f64> {
    if e == Vec3::E3 {
        return Matrix3::identity();
    }
    let len = e.norm();
    let unit = e / len;
    let axes = [Vec3::E1, Vec3::E2, Vec3::E3];
    let weakest = [unit.x.abs(), unit.y.abs(), unit.z.abs()]
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let a = axes[weakest] - unit * axes[weakest].dot(unit);
    let a = a / a.norm();
    let b = unit.cross(a);
    let r1 = a / len;
    Matrix3::new(r1.x, r1.y, r1.z, b.x, b.y, b.z, e.x, e.y, e.z)
}

fn apply(m: &Matrix3<f64>, p: Vec3) -> Vec3 {
    let v = m * nalgebra::Vector3::new(p.x, p.y, p.z);
    Vec3::new(v[0], v[1], v[2])
}

/// Recovers the planar pair whose affine cylindrical pedal is `y`.
///
/// `y` must be locally convex and transversal to the constant field `e`. The
/// dual of `(y, e)` lies in the plane `e·p = 1` with field parallel to it; a
/// unimodular linear map sends that plane to `z = 1` (identity for
/// `e = (0,0,1)`) and the planar pair is read off there. Slot `i` of the
/// result sits between edges `i−½` and `i+½` of `y`.
pub fn unpedal(y: &EdgeSeq<Vec3>, e: Vec3, cfg: ToleranceConfig) -> Result<PlanarPair> {
    pedal_pair(y, e, cfg)?;
    let dual = DualPair {
        y: y.clone(),
        v: EdgeSeq::new(vec![e; y.n()])?,
        origin: Vec3::ZERO,
        cfg,
    };
    let back = dual.dual()?;
    let (xs, us) = (back.nodes(), back.field());

    let mut planar = 0.0f64;
    for i in 0..xs.n() {
        planar = planar
            .max((xs[i].dot(e) - 1.0).abs() / (xs[i].norm() * e.norm()).max(1.0))
            .max(us[i].dot(e).abs() / (us[i].norm() * e.norm()).max(f64::MIN_POSITIVE));
    }
    if !(planar <= cfg.tol_residual) {
        return Err(Error::NotPlanarDual { residual: planar });
    }

    let m = plane_normalization(e);
    let x = xs.map(|p| apply(&m, *p).xy());
    let u = us.map(|p| apply(&m, *p).xy());
    let pair = PlanarPair::centered(x, u, cfg)?;

    // Covectors transform by the inverse transpose.
    let m_inv_t = m.try_inverse().ok_or(Error::NotPlanarDual { residual: f64::INFINITY })?.transpose();
    let again = pair.cylindrical_pedal()?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for k in 0..y.n() {
        let expected = apply(&m_inv_t, y[k]);
        worst = worst.max((again.pedal[k] - expected).norm());
        scale = scale.max(expected.norm());
    }
    let residual = worst / scale.max(f64::MIN_POSITIVE);
    if !(residual <= cfg.tol_residual) {
        return Err(Error::NotPlanarDual { residual });
    }
    Ok(pair)
}

/// Sum of signed exterior angles divided by `2π`.
pub fn turning_index(poly: &NodeSeq<Vec2>) -> f64 {
    let d = node_diff(poly);
    (0..poly.n() as i64)
        .map(|i| {
            let (a, b) = (*d.at(i - 1), *d.at(i));
            a.cross(b).atan2(a.dot(b))
        })
        .sum::<f64>()
        / TAU
}

/// Convexity: every turn has the same strict sign and the total turning is
/// one full revolution (which rules out locally convex star polygons).
pub fn is_convex(poly: &NodeSeq<Vec2>, cfg: &ToleranceConfig) -> Result<bool> {
    let d = node_diff(poly);
    let mut signs = Vec::with_capacity(poly.n());
    for i in 0..poly.n() as i64 {
        let (a, b) = (*d.at(i - 1), *d.at(i));
        match sign_of(a.cross(b), a.norm() * b.norm(), cfg) {
            Sign::Zero => return Err(Error::DegenerateSign { index: i as usize }),
            s => signs.push(s),
        }
    }
    if signs.iter().any(|&s| s != signs[0]) {
        return Ok(false);
    }
    Ok((turning_index(poly).abs() - 1.0).abs() * TAU <= 1e-6)
}

/// Exactness of `v` along `y`: `v′ = −b·y′` on every edge. Returns the flag
/// and the ratios `b` (least-squares, also when the flag is false).
pub fn is_exact(y: &NodeSeq<Vec2>, v: &NodeSeq<Vec2>, cfg: &ToleranceConfig) -> (bool, EdgeSeq<f64>) {
    match parallel_ratio(y, v, cfg) {
        Ok(b) => (true, b),
        Err(_) => {
            let dy = node_diff(y);
            let dv = node_diff(v);
            let b = EdgeSeq::from_fn(y.n(), |k| -dv[k].dot(dy[k]) / dy[k].dot(dy[k])).expect("period preserved");
            (false, b)
        }
    }
}

/// Vertex edges `k+½` of an exact pair `(y, v)`: `b′(k)·b′(k+1) < 0`.
pub fn planar_vertices(y: &NodeSeq<Vec2>, v: &NodeSeq<Vec2>, cfg: &ToleranceConfig) -> Result<Vec<usize>> {
    if v.n() != y.n() {
        return Err(Error::LengthMismatch {
            what: "field",
            got: v.n(),
            expected: y.n(),
        });
    }
    let b = parallel_ratio(y, v, cfg).map_err(|(node, residual)| Error::NotExact { node, residual })?;
    let db = edge_diff(&b);
    let dy = node_diff(y);
    let field_scale = (0..y.n()).map(|k| v[k].norm() / dy[k].norm()).fold(0.0f64, f64::max);
    let scale = max_abs(db.values()).max(max_abs(b.values())).max(field_scale);
    let signs = strict_signs(db.values(), scale, cfg).map_err(|e| match e {
        Error::DegenerateSign { index } => Error::NotGeneric { edge: index },
        other => other,
    })?;
    Ok(junction_edges(&signs))
}

impl RadialInstance {
    pub fn new(gamma: NodeSeq<Vec2>, scales: NodeSeq<f64>) -> Result<Self> {
        if scales.n() != gamma.n() {
            return Err(Error::LengthMismatch {
                what: "scales",
                got: scales.n(),
                expected: gamma.n(),
            });
        }
        if let Some(node) = scales.iter().position(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::NonProjectable { node });
        }
        let x = NodeSeq::from_fn(gamma.n(), |i| gamma[i].lift(1.0) * scales[i])?;
        Ok(RadialInstance { gamma, scales, x })
    }

    /// `γ` convex with `(0,0)` strictly inside.
    pub fn is_admissible(&self, cfg: &ToleranceConfig) -> bool {
        let convex = matches!(is_convex(&self.gamma, cfg), Ok(true));
        convex && contains_origin(&self.gamma, cfg)
    }

    /// The framed polygon `(X, E)` with the constant field `E = (0,0,1)`.
    pub fn framed(&self, cfg: ToleranceConfig) -> Result<FramedPolygon> {
        FramedPolygon::centered(self.x.clone(), NodeSeq::new(vec![Vec3::E3; self.x.n()])?, cfg)
    }

    /// Planar parts `(y, v)` of the dual of `(X, E)`, which has the form
    /// `Y = (y, 1)`, `V = (v, 0)`. Slot `k` is edge `k+½` of `X`.
    pub fn planar_dual(&self, cfg: ToleranceConfig) -> Result<(NodeSeq<Vec2>, NodeSeq<Vec2>)> {
        let dual = dual_pair(&self.framed(cfg)?)?;
        let mut worst = 0.0f64;
        for k in 0..dual.n() {
            worst = worst
                .max((dual.y[k].z - 1.0).abs())
                .max(dual.v[k].z.abs() / dual.v[k].norm().max(f64::MIN_POSITIVE));
        }
        if !(worst <= cfg.tol_residual) {
            return Err(Error::Residual {
                check: "dual of radial instance is a lifted planar pair",
                residual: worst,
            });
        }
        Ok((
            dual.y.clone().into_nodes().map(|p| p.xy()),
            dual.v.clone().into_nodes().map(|p| p.xy()),
        ))
    }
}

/// For a convex polygon, the origin is strictly inside when every edge sees
/// it on the same strict side.
pub fn contains_origin(poly: &NodeSeq<Vec2>, cfg: &ToleranceConfig) -> bool {
    let signs: Vec<Sign> = (0..poly.n())
        .map(|k| {
            let (a, b) = (poly[k], poly[k + 1]);
            sign_of(a.cross(b), a.norm() * b.norm(), cfg)
        })
        .collect();
    signs[0] != Sign::Zero && signs.iter().all(|&s| s == signs[0])
}

/// `λ(i)` = third coordinate of `X(i) − O`, `γ(i)` = first two divided by it.
pub fn radial_projection(x: &NodeSeq<Vec3>, origin: Vec3, cfg: &ToleranceConfig) -> Result<RadialInstance> {
    let rel = x.map(|p| *p - origin);
    for (node, p) in rel.iter().enumerate() {
        if sign_of(p.z, p.norm(), cfg) != Sign::Positive {
            return Err(Error::NonProjectable { node });
        }
    }
    let scales = rel.map(|p| p.z);
    let gamma = rel.map(|p| p.xy() / p.z);
    Ok(RadialInstance { gamma, scales, x: rel })
}
