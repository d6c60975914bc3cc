//! Centroaffine invariants of a closed spatial polygon with a transversal field.
//!
//! For nodes `X(i)` (taken relative to the origin `O`) and a field `U(i)`:
//!
//! * `α(i) = [X(i−1), X(i), X(i+1)]` (local convexity when positive),
//! * `β(i+½) = [X(i), X(i+1), U(i)]` (transversality when positive),
//! * `b(i+½)` with `U′ = −b X′` when `U` is parallel (edge curvature),
//! * `λ(i)` making `−λX + U` lie in the osculating plane `span{X′, X″}`,
//! * `Δ(i+½) = [X′(i+3/2), X′(i+½), X′(i−½)]` (flattening detection).
//!
//! Every quantity is invariant under volume-preserving linear maps fixing `O`.

use crate::cyclic::{
    edge_diff, max_abs, node_diff, second_diff, sign_of, strict_signs, EdgeSeq, NodeSeq, Sign,
    ToleranceConfig,
};
use crate::error::{Error, Result};
use crate::vector::{det3, hadamard3, Vec3};

/// A locally convex polygon `X` with origin `O` and transversal field `U`.
///
/// Construction guarantees `α > 0` and `β > 0` under the sign dead-band. A
/// polygon whose `α` is negative at every node is accepted and reoriented by
/// the relabeling `i ↦ −i`, which keeps node 0 in place.
#[derive(Debug, Clone, PartialEq)]
pub struct FramedPolygon {
    nodes: NodeSeq<Vec3>,
    origin: Vec3,
    field: NodeSeq<Vec3>,
    cfg: ToleranceConfig,
}

/// The full set of invariants of a framed polygon with parallel field.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantBundle {
    pub alpha: NodeSeq<f64>,
    pub beta: EdgeSeq<f64>,
    pub b: EdgeSeq<f64>,
    pub lambda: NodeSeq<f64>,
    pub delta: EdgeSeq<f64>,
}

/// Meeting point of the normal lines at `i` and `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FocalPoint {
    Finite(Vec3),
    /// The two normal lines are parallel with the given common direction.
    AtInfinity(Vec3),
}

/// Aggregated vertex and flattening detection.
///
/// `None` marks a feature set that is undefined for the input (non-generic
/// polygon, degenerate curvature increments or non-parallel field).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureReport {
    pub vertices: Option<Vec<usize>>,
    pub flattenings: Option<Vec<usize>>,
    pub is_generic: bool,
    pub is_constant_curvature: bool,
}

/// Coefficients of the third difference of an equal-volume polygon:
/// `X‴(i+½) = −ρ₂(i)X′(i+½) + τ(i+½)X(i+1) = −ρ₁(i+1)X′(i+½) + τ(i+½)X(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureFunctions {
    pub rho1: NodeSeq<f64>,
    pub rho2: NodeSeq<f64>,
    pub tau: EdgeSeq<f64>,
}

/// The natural parallel unimodular field `U = X″ + λX` of an equal-volume polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalField {
    pub field: NodeSeq<Vec3>,
    pub lambda: NodeSeq<f64>,
}

fn check_finite(seq: &NodeSeq<Vec3>, what: &'static str) -> Result<()> {
    if seq.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `α(i) = [X(i−1), X(i), X(i+1)]` for nodes already relative to the origin.
pub fn alpha_of(x: &NodeSeq<Vec3>) -> NodeSeq<f64> {
    NodeSeq::from_fn(x.n(), |i| {
        let i = i as i64;
        det3(*x.at(i - 1), *x.at(i), *x.at(i + 1))
    })
    .expect("period preserved")
}

fn alpha_scales(x: &NodeSeq<Vec3>) -> Vec<f64> {
    (0..x.n() as i64)
        .map(|i| hadamard3(*x.at(i - 1), *x.at(i), *x.at(i + 1)))
        .collect()
}

/// `Δ(i+½) = [X(i+2)−X(i+1), X(i+1)−X(i), X(i)−X(i−1)]`.
pub fn delta_of(x: &NodeSeq<Vec3>) -> EdgeSeq<f64> {
    let d = node_diff(x);
    EdgeSeq::from_fn(x.n(), |k| {
        let k = k as i64;
        det3(*d.at(k + 1), *d.at(k), *d.at(k - 1))
    })
    .expect("period preserved")
}

/// Per-edge magnitude scale of `Δ`: the product of the three edge lengths.
fn delta_scales(x: &NodeSeq<Vec3>) -> Vec<f64> {
    let d = node_diff(x);
    (0..x.n() as i64)
        .map(|k| hadamard3(*d.at(k + 1), *d.at(k), *d.at(k - 1)))
        .collect()
}

/// Strict signs of `Δ`, failing with `NotGeneric` at the first coplanar quadruple.
fn delta_signs(x: &NodeSeq<Vec3>, cfg: &ToleranceConfig) -> Result<Vec<Sign>> {
    let delta = delta_of(x);
    delta
        .iter()
        .zip(delta_scales(x))
        .enumerate()
        .map(|(edge, (&v, s))| match sign_of(v, s, cfg) {
            Sign::Zero => Err(Error::NotGeneric { edge }),
            sign => Ok(sign),
        })
        .collect()
}

/// Per-edge coplanarity predicate `Δ(i+½) = 0` under the dead-band.
pub fn coplanar_edges(x: &NodeSeq<Vec3>, cfg: &ToleranceConfig) -> Vec<bool> {
    delta_of(x)
        .iter()
        .zip(delta_scales(x))
        .map(|(&v, s)| sign_of(v, s, cfg) == Sign::Zero)
        .collect()
}

/// No four consecutive nodes coplanar.
pub fn is_generic(x: &NodeSeq<Vec3>, cfg: &ToleranceConfig) -> bool {
    delta_signs(x, cfg).is_ok()
}

/// Nodes `i` with `Δ(i−½)·Δ(i+½) < 0`, sorted.
pub fn flattening_nodes_of(x: &NodeSeq<Vec3>, cfg: &ToleranceConfig) -> Result<Vec<usize>> {
    let signs = delta_signs(x, cfg)?;
    Ok(junction_nodes(&signs))
}

/// For signs on edge slots, the nodes between opposite-signed neighbours.
pub(crate) fn junction_nodes(edge_signs: &[Sign]) -> Vec<usize> {
    let n = edge_signs.len();
    (0..n)
        .filter(|&i| edge_signs[(i + n - 1) % n] != edge_signs[i])
        .collect()
}

/// For signs on node slots, the edges `i+½` between opposite-signed neighbours.
pub(crate) fn junction_edges(node_signs: &[Sign]) -> Vec<usize> {
    let n = node_signs.len();
    (0..n)
        .filter(|&i| node_signs[i] != node_signs[(i + 1) % n])
        .collect()
}

/// `α ≡ 1` within `tol_residual`.
pub fn is_equal_volume(x: &NodeSeq<Vec3>, origin: Vec3, cfg: &ToleranceConfig) -> bool {
    equal_volume_deviation(&x.map(|p| *p - origin)) <= cfg.tol_residual
}

fn equal_volume_deviation(x: &NodeSeq<Vec3>) -> f64 {
    alpha_of(x).iter().fold(0.0f64, |m, a| m.max((a - 1.0).abs()))
}

impl FramedPolygon {
    pub fn new(
        nodes: NodeSeq<Vec3>,
        field: NodeSeq<Vec3>,
        origin: Vec3,
        cfg: ToleranceConfig,
    ) -> Result<Self> {
        if field.n() != nodes.n() {
            return Err(Error::LengthMismatch {
                what: "field",
                got: field.n(),
                expected: nodes.n(),
            });
        }
        check_finite(&nodes, "nodes")?;
        check_finite(&field, "field")?;
        if !origin.is_finite() {
            return Err(Error::NonFinite("origin"));
        }

        let rel = nodes.map(|p| *p - origin);
        let alpha = alpha_of(&rel);
        let signs: Vec<Sign> = alpha
            .iter()
            .zip(alpha_scales(&rel))
            .map(|(&a, s)| sign_of(a, s, &cfg))
            .collect();
        let (nodes, field) = if signs.iter().all(|&s| s == Sign::Positive) {
            (nodes, field)
        } else if signs.iter().all(|&s| s == Sign::Negative) {
            (reverse(&nodes), reverse(&field))
        } else {
            let node = signs
                .iter()
                .position(|&s| s != signs[0] || s == Sign::Zero)
                .unwrap_or(0);
            return Err(Error::NotLocallyConvex { node });
        };

        let polygon = FramedPolygon {
            nodes,
            origin,
            field,
            cfg,
        };
        let rel = polygon.rel_nodes();
        for (edge, b) in polygon.beta().iter().enumerate() {
            let scale = hadamard3(rel[edge], rel[edge + 1], polygon.field[edge]);
            if sign_of(*b, scale, &cfg) != Sign::Positive {
                return Err(Error::NonTransversal { edge });
            }
        }
        Ok(polygon)
    }

    /// Polygon framed with respect to the coordinate origin.
    pub fn centered(nodes: NodeSeq<Vec3>, field: NodeSeq<Vec3>, cfg: ToleranceConfig) -> Result<Self> {
        Self::new(nodes, field, Vec3::ZERO, cfg)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.nodes.n()
    }

    pub fn nodes(&self) -> &NodeSeq<Vec3> {
        &self.nodes
    }

    pub fn field(&self) -> &NodeSeq<Vec3> {
        &self.field
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn tolerances(&self) -> &ToleranceConfig {
        &self.cfg
    }

    /// Same polygon with different tolerances (construction checks are rerun).
    pub fn with_tolerances(&self, cfg: ToleranceConfig) -> Result<Self> {
        Self::new(self.nodes.clone(), self.field.clone(), self.origin, cfg)
    }

    /// Nodes relative to the origin, `X(i) − O`.
    pub fn rel_nodes(&self) -> NodeSeq<Vec3> {
        self.nodes.map(|p| *p - self.origin)
    }

    pub fn alpha(&self) -> NodeSeq<f64> {
        alpha_of(&self.rel_nodes())
    }

    pub fn beta(&self) -> EdgeSeq<f64> {
        let x = self.rel_nodes();
        EdgeSeq::from_fn(self.n(), |k| det3(x[k], x[k + 1], self.field[k])).expect("period preserved")
    }

    pub fn delta(&self) -> EdgeSeq<f64> {
        delta_of(&self.nodes)
    }

    pub fn is_generic(&self) -> bool {
        is_generic(&self.nodes, &self.cfg)
    }

    /// Magnitude scale for curvature values: `max |U(i)| / |X′(i+½)|`.
    pub(crate) fn curvature_scale(&self) -> f64 {
        let d = node_diff(&self.nodes);
        (0..self.n())
            .map(|k| self.field[k].norm() / d[k].norm())
            .fold(0.0f64, f64::max)
    }

    /// Edge curvatures `b` with `U′(i+½) = −b(i+½)·X′(i+½)`.
    ///
    /// `b` is the least-squares ratio `−(U′·X′)/(X′·X′)`; the field is
    /// rejected when the normal part of `U′` exceeds `tol_residual` relative
    /// to `|U′| + |b||X′| + |U(i)|`.
    pub fn curvature_b(&self) -> Result<EdgeSeq<f64>> {
        let dx = node_diff(&self.nodes);
        let du = node_diff(&self.field);
        let mut b = Vec::with_capacity(self.n());
        for k in 0..self.n() {
            let (xp, up) = (dx[k], du[k]);
            let bk = -up.dot(xp) / xp.dot(xp);
            let scale = up.norm() + bk.abs() * xp.norm() + self.field[k].norm();
            let residual = if scale > 0.0 {
                (up + xp * bk).norm() / scale
            } else {
                0.0
            };
            if !(residual <= self.cfg.tol_residual) {
                return Err(Error::NotParallel { edge: k, residual });
            }
            b.push(bk);
        }
        EdgeSeq::new(b)
    }

    pub fn is_parallel(&self) -> bool {
        self.curvature_b().is_ok()
    }

    /// `λ(i) = [X′(i+½), X″(i), U(i)] / α(i)`.
    ///
    /// The denominator `[X′(i+½), X″(i), X(i)]` expands to `α(i)`; the
    /// expansion is checked against the direct determinant.
    pub fn lambda(&self) -> Result<NodeSeq<f64>> {
        let x = self.rel_nodes();
        let d1 = node_diff(&x);
        let d2 = second_diff(&x);
        let alpha = alpha_of(&x);
        let mut out = Vec::with_capacity(self.n());
        for i in 0..self.n() {
            let denom = det3(d1[i], d2[i], x[i]);
            let scale = hadamard3(d1[i], d2[i], x[i]).max(alpha[i].abs());
            let residual = (denom - alpha[i]).abs() / scale;
            if !(residual <= self.cfg.tol_residual) {
                return Err(Error::Residual {
                    check: "osculating denominator equals alpha",
                    residual,
                });
            }
            out.push(det3(d1[i], d2[i], self.field[i]) / alpha[i]);
        }
        NodeSeq::new(out)
    }

    /// Coefficients `(A, B)` with `−λ(i)X(i) + U(i) = A·X′(i−½) + B·X′(i+½)`.
    ///
    /// Checks `α(i)·A = −β(i+½)` and that the left side lies in the
    /// osculating plane.
    pub fn osculating_coefficients(&self, i: usize) -> Result<(f64, f64)> {
        let i = i % self.n();
        let x = self.rel_nodes();
        let d1 = node_diff(&x);
        let lambda = self.lambda()?;
        let w = self.field[i] - x[i] * lambda[i];
        let (a, c) = (*d1.at(i as i64 - 1), d1[i]);
        let (aa, ac, cc) = (a.dot(a), a.dot(c), c.dot(c));
        let (wa, wc) = (w.dot(a), w.dot(c));
        let det = aa * cc - ac * ac;
        let coef_a = (wa * cc - wc * ac) / det;
        let coef_b = (aa * wc - ac * wa) / det;

        let tol = self.cfg.tol_residual;
        let fit = (w - a * coef_a - c * coef_b).norm() / w.norm().max(f64::MIN_POSITIVE);
        if !(fit <= tol) {
            return Err(Error::Residual {
                check: "osculating-plane decomposition",
                residual: fit,
            });
        }
        let expected = -self.beta()[i] / self.alpha()[i];
        let residual = (coef_a - expected).abs() / coef_a.abs().max(expected.abs());
        if !(residual <= tol) {
            return Err(Error::Residual {
                check: "alpha*A = -beta",
                residual,
            });
        }
        Ok((coef_a, coef_b))
    }

    /// Flattening nodes from the `Δ` criterion.
    ///
    /// When the field is parallel the set is cross-checked against the sign
    /// changes of `λ′`, which must agree exactly.
    pub fn flattening_nodes(&self) -> Result<Vec<usize>> {
        let by_delta = flattening_nodes_of(&self.nodes, &self.cfg)?;
        if self.is_parallel() {
            let by_lambda = self.flattening_nodes_by_lambda()?;
            if by_lambda != by_delta {
                return Err(Error::Residual {
                    check: "flattenings from delta and lambda' agree",
                    residual: 1.0,
                });
            }
        }
        Ok(by_delta)
    }

    /// Flattening nodes from the sign changes of `λ′`.
    pub fn flattening_nodes_by_lambda(&self) -> Result<Vec<usize>> {
        let lambda = self.lambda()?;
        let dl = node_diff(&lambda);
        let scale = max_abs(dl.values());
        let signs = strict_signs(dl.values(), scale, &self.cfg)?;
        Ok(junction_nodes(&signs))
    }

    /// Vertex edges `i+½` with `b′(i)·b′(i+1) < 0`.
    pub fn vertex_edges(&self) -> Result<Vec<usize>> {
        let b = self.curvature_b()?;
        let db = edge_diff(&b);
        let scale = max_abs(db.values()).max(max_abs(b.values())).max(self.curvature_scale());
        let signs = strict_signs(db.values(), scale, &self.cfg)?;
        Ok(junction_edges(&signs))
    }

    /// Focal points `E(i+½) = X(i) + U(i)/b(i+½)`.
    ///
    /// The second expression `X(i+1) + U(i+1)/b(i+½)` is checked to agree.
    pub fn focal_points(&self) -> Result<EdgeSeq<FocalPoint>> {
        let b = self.curvature_b()?;
        let scale = self.curvature_scale().max(max_abs(b.values()));
        let mut out = Vec::with_capacity(self.n());
        for k in 0..self.n() {
            if sign_of(b[k], scale, &self.cfg) == Sign::Zero {
                out.push(FocalPoint::AtInfinity(self.field[k]));
                continue;
            }
            let e0 = self.nodes[k] + self.field[k] / b[k];
            let e1 = self.nodes[k + 1] + self.field[k + 1] / b[k];
            let mag = e0
                .norm()
                .max(self.nodes[k].norm())
                .max(self.nodes[k + 1].norm());
            let residual = (e0 - e1).norm() / mag;
            if !(residual <= self.cfg.tol_residual) {
                return Err(Error::Residual {
                    check: "normal lines meet at the focal point",
                    residual,
                });
            }
            out.push(FocalPoint::Finite(e0));
        }
        EdgeSeq::new(out)
    }

    /// When `b` is constant, the constant vector `E = cX + dU` lying in every
    /// normal plane, relative to the origin: `U` itself if `b ≡ 0`, otherwise
    /// the common focal point.
    pub fn constant_curvature_witness(&self) -> Result<Option<Vec3>> {
        let b = self.curvature_b()?;
        let bmax = max_abs(b.values());
        let tol = self.cfg.tol_residual;
        if bmax <= tol * self.curvature_scale() {
            return Ok(Some(self.field[0]));
        }
        let mean = b.iter().sum::<f64>() / self.n() as f64;
        let spread = b.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        if spread > tol * bmax {
            return Ok(None);
        }
        let x = self.rel_nodes();
        Ok(Some(x[0] + self.field[0] / mean))
    }

    pub fn is_constant_curvature(&self) -> Result<bool> {
        Ok(self.constant_curvature_witness()?.is_some())
    }

    /// Largest relative violation of `β(i+½)Δ(i+½) = λ′(i+½)α(i)α(i+1)`,
    /// normalized by the largest term over the whole cycle.
    pub fn delta_lambda_residual(&self) -> Result<f64> {
        self.curvature_b()?;
        let alpha = self.alpha();
        let beta = self.beta();
        let delta = self.delta();
        let dl = node_diff(&self.lambda()?);
        let mut scale = 0.0f64;
        let mut worst = 0.0f64;
        for k in 0..self.n() {
            let lhs = beta[k] * delta[k];
            let rhs = dl[k] * alpha[k] * alpha[k + 1];
            scale = scale.max(lhs.abs()).max(rhs.abs());
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(if scale > 0.0 { worst / scale } else { 0.0 })
    }

    pub fn is_unimodular(&self) -> bool {
        self.beta()
            .iter()
            .all(|b| (b - 1.0).abs() <= self.cfg.tol_residual)
    }

    pub fn is_equal_volume(&self) -> bool {
        is_equal_volume(&self.nodes, self.origin, &self.cfg)
    }

    /// Replaces `U` by `cX + dU` (`X` relative to the origin).
    ///
    /// For a parallel field the curvature becomes `d·b − c`, so vertices are
    /// preserved when `d > 0`.
    pub fn reframe(&self, c: f64, d: f64) -> Result<FramedPolygon> {
        if !(d > 0.0) || !c.is_finite() || !d.is_finite() {
            return Err(Error::NonTransversal { edge: 0 });
        }
        let x = self.rel_nodes();
        let field = NodeSeq::from_fn(self.n(), |i| x[i] * c + self.field[i] * d)?;
        FramedPolygon::new(self.nodes.clone(), field, self.origin, self.cfg)
    }

    pub fn invariants(&self) -> Result<InvariantBundle> {
        Ok(InvariantBundle {
            alpha: self.alpha(),
            beta: self.beta(),
            b: self.curvature_b()?,
            lambda: self.lambda()?,
            delta: self.delta(),
        })
    }

    pub fn features(&self) -> FeatureReport {
        FeatureReport {
            vertices: self.vertex_edges().ok(),
            flattenings: self.flattening_nodes().ok(),
            is_generic: self.is_generic(),
            is_constant_curvature: self.is_constant_curvature().unwrap_or(false),
        }
    }
}

/// Relabels `i ↦ −i`, reversing the orientation while keeping slot 0.
fn reverse<T: Clone>(seq: &NodeSeq<T>) -> NodeSeq<T> {
    let n = seq.n();
    NodeSeq::from_fn(n, |k| seq[(n - k) % n].clone()).expect("period preserved")
}

/// Solves `target = p·e1 + q·e2 + r·(e1 × e2)` and returns `(p, q, residual)`
/// where the residual is the normal component relative to `|target|`.
fn decompose(target: Vec3, e1: Vec3, e2: Vec3) -> (f64, f64, f64) {
    let normal = e1.cross(e2);
    let d = normal.dot(normal);
    let p = det3(target, e2, normal) / d;
    let q = det3(e1, target, normal) / d;
    let r = det3(e1, e2, target) / d;
    let mag = target.norm();
    let residual = if mag > 0.0 { (r * normal.norm()).abs() / mag } else { 0.0 };
    (p, q, residual)
}

/// Third-difference structure of an equal-volume polygon (origin at zero).
pub fn structure_functions(x: &NodeSeq<Vec3>, cfg: &ToleranceConfig) -> Result<StructureFunctions> {
    let deviation = equal_volume_deviation(x);
    if !(deviation <= cfg.tol_residual) {
        return Err(Error::NotEqualVolume { deviation });
    }
    let n = x.n();
    let d1 = node_diff(x);
    let d3 = node_diff(&second_diff(x));
    let mut rho1 = vec![0.0; n];
    let mut rho2 = vec![0.0; n];
    let mut tau = vec![0.0; n];
    let mut tau_alt = vec![0.0; n];
    for k in 0..n {
        let (a, t, r) = decompose(d3[k], d1[k], x[k + 1]);
        if !(r <= cfg.tol_residual) {
            return Err(Error::DecompositionResidual { edge: k, residual: r });
        }
        rho2[k] = -a;
        tau[k] = t;
        let (a, t, r) = decompose(d3[k], d1[k], x[k]);
        if !(r <= cfg.tol_residual) {
            return Err(Error::DecompositionResidual { edge: k, residual: r });
        }
        rho1[(k + 1) % n] = -a;
        tau_alt[k] = t;
    }
    let scale = max_abs(&rho1).max(max_abs(&rho2)).max(max_abs(&tau));
    for k in 0..n {
        let both = (tau[k] - tau_alt[k]).abs();
        let compat = (tau[k] - (rho2[k] - rho1[(k + 1) % n])).abs();
        let residual = both.max(compat) / scale.max(f64::MIN_POSITIVE);
        if !(residual <= cfg.tol_residual) {
            return Err(Error::Residual {
                check: "tau = rho2(i) - rho1(i+1)",
                residual,
            });
        }
    }
    Ok(StructureFunctions {
        rho1: NodeSeq::new(rho1)?,
        rho2: NodeSeq::new(rho2)?,
        tau: EdgeSeq::new(tau)?,
    })
}

/// The natural parallel unimodular field `U = X″ + λX` of an equal-volume
/// polygon (origin at zero).
///
/// `λ` integrates `λ′ = −τ` around the cycle, which requires `Σ τ = 0`. The
/// constant of integration is not determined by the polygon (it only shifts
/// `U` by a multiple of `X`, leaving `β` unchanged); it is fixed by giving `λ`
/// zero mean.
pub fn ev_natural_field(x: &NodeSeq<Vec3>, cfg: &ToleranceConfig) -> Result<NaturalField> {
    let sf = structure_functions(x, cfg)?;
    let n = x.n();
    let sum: f64 = sf.tau.iter().sum();
    let scale: f64 = sf
        .tau
        .iter()
        .zip(sf.rho2.iter())
        .map(|(t, r)| t.abs() + r.abs())
        .sum();
    if !(sum.abs() <= cfg.tol_residual * scale) {
        return Err(Error::IntegrationInconsistent { sum });
    }
    let drift = sum / n as f64;
    let mut lambda = vec![0.0; n];
    for k in 0..n - 1 {
        lambda[k + 1] = lambda[k] - (sf.tau[k] - drift);
    }
    let mean = lambda.iter().sum::<f64>() / n as f64;
    lambda.iter_mut().for_each(|l| *l -= mean);

    let d2 = second_diff(x);
    let field = NodeSeq::from_fn(n, |i| d2[i] + x[i] * lambda[i])?;
    let framed = FramedPolygon::centered(x.clone(), field.clone(), *cfg)?;
    framed.curvature_b()?;
    if !framed.is_unimodular() {
        let residual = framed.beta().iter().fold(0.0f64, |m, b| m.max((b - 1.0).abs()));
        return Err(Error::Residual {
            check: "natural field is unimodular",
            residual,
        });
    }
    Ok(NaturalField {
        field,
        lambda: NodeSeq::new(lambda)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_nodes() -> NodeSeq<Vec3> {
        NodeSeq::new(vec![
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(-1.0, 1.0, 1.0),
            Vec3::new(-1.0, -1.0, 1.0),
            Vec3::new(1.0, -1.0, 1.0),
        ])
        .unwrap()
    }

    fn lifted_square() -> FramedPolygon {
        FramedPolygon::centered(
            square_nodes(),
            NodeSeq::new(vec![Vec3::E3; 4]).unwrap(),
            ToleranceConfig::default(),
        )
        .unwrap()
    }

    /// Hexagon on the unit circle lifted to z = 1, with node 0 raised by `eps`.
    fn perturbed_hexagon(eps: f64) -> NodeSeq<Vec3> {
        NodeSeq::from_fn(6, |i| {
            let t = std::f64::consts::PI * i as f64 / 3.0;
            Vec3::new(t.cos(), t.sin(), 1.0 + if i == 0 { eps } else { 0.0 })
        })
        .unwrap()
    }

    #[test]
    fn square_fixture_invariants() {
        let p = lifted_square();
        assert_eq!(p.alpha().values(), &[4.0; 4]);
        assert_eq!(p.beta().values(), &[2.0; 4]);
        assert_eq!(p.curvature_b().unwrap().values(), &[0.0; 4]);
        assert_eq!(p.lambda().unwrap().values(), &[1.0; 4]);
        assert_eq!(p.delta().values(), &[0.0; 4]);
    }

    #[test]
    fn alpha_scales_cubically() {
        let x = square_nodes().map(|p| *p * 2.0);
        assert_eq!(alpha_of(&x).values(), &[32.0; 4]);
    }

    #[test]
    fn collinear_radial_triple_is_rejected() {
        let mut v = square_nodes().into_values();
        v[1] = (v[0] + v[2]) * 0.5;
        let err = FramedPolygon::centered(
            NodeSeq::new(v).unwrap(),
            NodeSeq::new(vec![Vec3::E3; 4]).unwrap(),
            ToleranceConfig::default(),
        );
        assert!(matches!(err, Err(Error::NotLocallyConvex { .. })));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let cw = reverse(&square_nodes());
        let p = FramedPolygon::centered(
            cw,
            NodeSeq::new(vec![Vec3::E3; 4]).unwrap(),
            ToleranceConfig::default(),
        )
        .unwrap();
        assert_eq!(p.nodes(), &square_nodes());
    }

    #[test]
    fn field_through_nodes_is_not_transversal() {
        let x = square_nodes();
        let err = FramedPolygon::centered(x.clone(), x, ToleranceConfig::default());
        assert!(matches!(err, Err(Error::NonTransversal { .. })));
    }

    #[test]
    fn mismatched_field_length() {
        let err = FramedPolygon::centered(
            square_nodes(),
            NodeSeq::new(vec![Vec3::E3; 3]).unwrap(),
            ToleranceConfig::default(),
        );
        assert!(matches!(err, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn reframing_scales_beta_and_shifts_curvature() {
        let p = lifted_square();
        let q = p.reframe(0.0, 3.0).unwrap();
        assert_eq!(q.beta().values(), &[6.0; 4]);
        assert_eq!(p.reframe(0.0, 1.0).unwrap(), p);

        // U′ = X′ after adding X, hence b ≡ −1.
        let r = p.reframe(1.0, 1.0).unwrap();
        assert_eq!(r.curvature_b().unwrap().values(), &[-1.0; 4]);
        assert!(p.reframe(1.0, 0.0).is_err());
        assert!(p.reframe(1.0, -2.0).is_err());
    }

    #[test]
    fn non_parallel_perturbation_is_detected() {
        let p = lifted_square();
        let mut u = p.field().clone().into_values();
        u[2] = u[2] + Vec3::new(1e-3, 0.0, 0.0);
        let q = FramedPolygon::centered(square_nodes(), NodeSeq::new(u).unwrap(), ToleranceConfig::default())
            .unwrap();
        assert!(matches!(q.curvature_b(), Err(Error::NotParallel { .. })));
    }

    #[test]
    fn lambda_of_horizontal_field_vanishes() {
        let x = square_nodes();
        let u = NodeSeq::from_fn(4, |i| {
            let p = second_diff(&x)[i];
            Vec3::new(p.x, p.y, 0.0)
        })
        .unwrap();
        let p = FramedPolygon::centered(x, u, ToleranceConfig::default()).unwrap();
        assert!(p.lambda().unwrap().iter().all(|&l| l == 0.0));
    }

    #[test]
    fn lambda_shifts_under_adding_nodes() {
        let p = lifted_square();
        let q = p.reframe(0.75, 1.0).unwrap();
        for (a, b) in p.lambda().unwrap().iter().zip(q.lambda().unwrap().iter()) {
            assert!((b - a - 0.75).abs() < 1e-15);
        }
    }

    #[test]
    fn osculating_coefficients_on_square() {
        let p = lifted_square();
        let (a, b) = p.osculating_coefficients(0).unwrap();
        assert!((a + 0.5).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        let (a2, _) = p.reframe(0.4, 1.0).unwrap().osculating_coefficients(0).unwrap();
        assert!((a2 - a).abs() < 1e-15);
    }

    #[test]
    fn delta_on_perturbed_hexagon() {
        let x = perturbed_hexagon(0.1);
        let delta = delta_of(&x);
        // Brute-force oracle: determinant of the three consecutive edge vectors.
        for k in 0..6i64 {
            let e = |j: i64| *x.at(j + 1) - *x.at(j);
            let oracle = det3(e(k + 1), e(k), e(k - 1));
            assert_eq!(delta[k as usize], oracle);
        }
        // Δ vanishes on edges whose quadruple avoids node 0.
        assert!(delta[2].abs() < 1e-15);
        let flats = flattening_nodes_of(&x, &ToleranceConfig::default());
        assert!(matches!(flats, Err(Error::NotGeneric { .. })));
    }

    #[test]
    fn planar_polygons_are_not_generic() {
        let p = lifted_square();
        assert!(!p.is_generic());
        assert!(matches!(p.flattening_nodes(), Err(Error::NotGeneric { .. })));
    }

    #[test]
    fn vertices_from_alternating_curvature() {
        let scan = |b: Vec<f64>| {
            let db = edge_diff(&EdgeSeq::new(b).unwrap());
            let signs = strict_signs(db.values(), max_abs(db.values()), &ToleranceConfig::default()).unwrap();
            junction_edges(&signs)
        };
        assert_eq!(scan(vec![1.0, 2.0, 1.0, 2.0]), vec![0, 1, 2, 3]);
        // b′ = (−5, 2, −1, 3, −1, 2) alternates, so every edge is a vertex.
        assert_eq!(scan(vec![1.0, 3.0, 2.0, 5.0, 4.0, 6.0]), vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn constant_curvature_square() {
        let p = lifted_square();
        assert!(matches!(p.vertex_edges(), Err(Error::DegenerateSign { .. })));
        assert_eq!(p.constant_curvature_witness().unwrap(), Some(Vec3::E3));
        assert!(p
            .focal_points()
            .unwrap()
            .iter()
            .all(|f| *f == FocalPoint::AtInfinity(Vec3::E3)));

        let q = p.reframe(1.0, 1.0).unwrap();
        let focal = q.focal_points().unwrap();
        assert_eq!(focal[0], FocalPoint::Finite(Vec3::new(0.0, 0.0, -1.0)));
        assert!(focal.iter().all(|f| *f == focal[0]));
        assert_eq!(
            q.constant_curvature_witness().unwrap(),
            Some(Vec3::new(0.0, 0.0, -1.0))
        );
    }

    #[test]
    fn square_delta_lambda_residual_is_zero() {
        assert_eq!(lifted_square().delta_lambda_residual().unwrap(), 0.0);
    }

    #[test]
    fn equal_volume_square() {
        let cfg = ToleranceConfig::default();
        let s = 4f64.powf(-1.0 / 3.0);
        let x = square_nodes().map(|p| *p * s);
        assert!(is_equal_volume(&x, Vec3::ZERO, &cfg));
        assert!(!is_equal_volume(&square_nodes(), Vec3::ZERO, &cfg));

        let sf = structure_functions(&x, &cfg).unwrap();
        assert!(sf.tau.iter().all(|t| t.abs() < 1e-15));
        assert!(sf.rho2.iter().all(|r| (r - 2.0).abs() < 1e-12));

        let nat = ev_natural_field(&x, &cfg).unwrap();
        assert!(nat.lambda.iter().all(|l| l.abs() < 1e-15));
        let d2 = second_diff(&x);
        for i in 0..4 {
            assert!((nat.field[i] - d2[i]).norm() < 1e-15);
        }
        let p = FramedPolygon::centered(x, nat.field, cfg).unwrap();
        assert!(p.is_unimodular());
    }

    #[test]
    fn structure_functions_need_equal_volume() {
        let err = structure_functions(&square_nodes(), &ToleranceConfig::default());
        assert!(matches!(err, Err(Error::NotEqualVolume { .. })));
    }
}
