//! Reproducible random instances and named fixtures.
//!
//! All randomness comes from ChaCha8 seeded with [`GenConfig::seed`], so a
//! configuration always yields bit-identical output on every platform. Batch
//! drivers derive independent per-instance seeds with [`derive_seed`].

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::centroaffine::{alpha_of, is_generic, structure_functions, FramedPolygon};
use crate::cyclic::{node_diff, second_diff, NodeSeq, ToleranceConfig};
use crate::error::{Error, Result};
use crate::pedal::{contains_origin, is_convex, PlanarPair, RadialInstance};
use crate::vector::{det3, Vec2, Vec3};

/// Parameters shared by the random generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub n: usize,
    /// Range of the radial scales, sampled log-uniformly.
    pub lambda_range: (f64, f64),
    /// Perturbation magnitude relative to the diameter.
    pub perturb_scale: f64,
    pub max_retries: usize,
    pub tolerances: ToleranceConfig,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            n: 8,
            lambda_range: (0.5, 2.0),
            perturb_scale: 1e-2,
            max_retries: 100,
            tolerances: ToleranceConfig::default(),
        }
    }
}

impl GenConfig {
    pub fn new(seed: u64, n: usize) -> Self {
        GenConfig {
            seed,
            n,
            ..GenConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.lambda_range;
        if self.n < 3 {
            return Err(Error::PeriodTooShort(self.n));
        }
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda_range must satisfy 0 < lo <= hi, got ({lo}, {hi})")));
        }
        if !(self.perturb_scale >= 0.0 && self.perturb_scale.is_finite()) {
            return Err(Error::InvalidInput(format!("perturb_scale must be nonnegative, got {}", self.perturb_scale)));
        }
        if self.max_retries == 0 {
            return Err(Error::InvalidInput("max_retries must be at least 1".into()));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of instance `index` in a batch, independent of generation order.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

fn failed(attempts: usize, reason: &str) -> Error {
    Error::GenerationFailed {
        attempts,
        reason: reason.to_string(),
    }
}

fn convex_polygon_with(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Result<NodeSeq<Vec2>> {
    let n = cfg.n;
    for _ in 0..cfg.max_retries {
        // Nodes on a random ellipse at jittered, sorted angles: each angle
        // stays inside its own sector, so consecutive gaps are bounded below.
        let a: f64 = rng.gen_range(0.5..1.5);
        let b: f64 = rng.gen_range(0.5..1.5);
        let phi = rng.gen_range(0.0..TAU);
        let center = Vec2::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)) * a.min(b);
        let start = rng.gen_range(0.0..TAU);
        let (c, s) = (phi.cos(), phi.sin());
        let poly = NodeSeq::from_fn(n, |k| {
            let t = start + TAU * (k as f64 + rng.gen_range(0.15..0.85)) / n as f64;
            let (px, py) = (a * t.cos(), b * t.sin());
            center + Vec2::new(c * px - s * py, s * px + c * py)
        })?;
        if matches!(is_convex(&poly, &cfg.tolerances), Ok(true)) && contains_origin(&poly, &cfg.tolerances) {
            return Ok(poly);
        }
    }
    Err(failed(cfg.max_retries, "no convex polygon with interior origin"))
}

/// A counterclockwise convex polygon with `(0,0)` strictly inside.
pub fn random_convex_polygon(cfg: &GenConfig) -> Result<NodeSeq<Vec2>> {
    cfg.validate()?;
    convex_polygon_with(&mut cfg.rng(), cfg)
}

fn radial_with(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Result<RadialInstance> {
    let (lo, hi) = cfg.lambda_range;
    for _ in 0..cfg.max_retries {
        let gamma = convex_polygon_with(rng, cfg)?;
        let scales = NodeSeq::from_fn(cfg.n, |_| {
            if lo == hi {
                lo
            } else {
                rng.gen_range(lo.ln()..hi.ln()).exp()
            }
        })?;
        let inst = RadialInstance::new(gamma, scales)?;
        if is_generic(&inst.x, &cfg.tolerances) {
            return Ok(inst);
        }
    }
    Err(failed(cfg.max_retries, "radial instance is never generic"))
}

/// `X(i) = λ(i)(γ(i), 1)` over a random convex `γ`, regenerated until generic.
pub fn random_radial_instance(cfg: &GenConfig) -> Result<RadialInstance> {
    cfg.validate()?;
    radial_with(&mut cfg.rng(), cfg)
}

/// Projects `b` onto the closure constraint `Σ b(k) X′(k+½) = 0`.
fn close_curvature(b: &mut [f64], dx: &[Vec3]) {
    let n = b.len();
    let a = DMatrix::from_fn(3, n, |r, k| dx[k].to_array()[r]);
    let rhs = &a * DVector::from_column_slice(b);
    // Planar edges give a rank-deficient Gram matrix, hence the SVD.
    if let Ok(w) = (&a * a.transpose()).svd(true, true).solve(&rhs, 1e-12) {
        let corr = a.transpose() * w;
        for k in 0..n {
            b[k] -= corr[k];
        }
    }
}

/// A random parallel field on `x` that is transversal along `e`-transversal edges.
fn parallel_field_with(rng: &mut ChaCha8Rng, x: &NodeSeq<Vec3>, e: Vec3) -> NodeSeq<Vec3> {
    let n = x.n();
    let dx = node_diff(x);
    let diameter = x.iter().fold(0.0f64, |m, p| m.max(p.norm()));
    let mut b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0) / diameter).collect();
    close_curvature(&mut b, dx.values());
    let mut w = vec![Vec3::ZERO; n];
    for i in 1..n {
        w[i] = w[i - 1] - dx[i - 1] * b[i - 1];
    }
    let mut t = 1.0f64;
    for k in 0..n {
        let base = det3(x[k], x[k + 1], e);
        let extra = det3(x[k], x[k + 1], w[k]);
        t = t.max(-2.0 * extra / base);
    }
    let t = t * rng.gen_range(1.0..2.0);
    NodeSeq::from_fn(n, |i| e * t + w[i]).expect("period preserved")
}

/// A generic radial polygon with a random parallel transversal field.
pub fn random_framed_polygon(cfg: &GenConfig) -> Result<FramedPolygon> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let inst = radial_with(&mut rng, cfg)?;
    let u = parallel_field_with(&mut rng, &inst.x, Vec3::E3);
    FramedPolygon::centered(inst.x, u, cfg.tolerances)
}

/// A framed polygon with exactly one coplanar consecutive quadruple
/// `X(j−1), X(j), X(j+1), X(j+2)`, i.e. `Δ(j+½) = 0`. Returns `(polygon, j)`.
pub fn planted_coplanar(cfg: &GenConfig) -> Result<(FramedPolygon, usize)> {
    cfg.validate()?;
    if cfg.n < 5 {
        return Err(Error::InvalidInput("planting a single coplanar quadruple needs n >= 5".into()));
    }
    let mut rng = cfg.rng();
    let n = cfg.n;
    for _ in 0..cfg.max_retries {
        let inst = radial_with(&mut rng, cfg)?;
        let j = rng.gen_range(0..n);
        let mut x = inst.x.clone().into_values();
        let (p0, p1, p2) = (x[(j + n - 1) % n], x[j], x[(j + 1) % n]);
        let normal = (p1 - p0).cross(p2 - p1);
        let ray = x[(j + 2) % n];
        let s = normal.dot(p1) / normal.dot(ray);
        if !(s > 0.0 && s.is_finite()) {
            continue;
        }
        x[(j + 2) % n] = ray * s;
        let x = NodeSeq::new(x)?;
        if alpha_of(&x).iter().any(|&a| !(a > 0.0)) {
            continue;
        }
        let flags = crate::centroaffine::coplanar_edges(&x, &cfg.tolerances);
        if flags.iter().enumerate().all(|(k, &f)| f == (k == j)) {
            let u = parallel_field_with(&mut rng, &x, Vec3::E3);
            if let Ok(p) = FramedPolygon::centered(x, u, cfg.tolerances) {
                return Ok((p, j));
            }
        }
    }
    Err(failed(cfg.max_retries, "no instance with a single planted coplanar quadruple"))
}

/// Rescales `X(i) ↦ μ(i)X(i)` so that `α ≡ 1`.
///
/// Since `α(i)` picks up `μ(i−1)μ(i)μ(i+1)`, `ν = ln μ` solves the circulant
/// system `ν(i−1) + ν(i) + ν(i+1) = −ln α(i)`. Its eigenvalues
/// `1 + 2cos(2πk/n)` vanish at `k = n/3`, so for `n ≡ 0 (mod 3)` a solution
/// exists only when the right-hand side is orthogonal to the kernel.
pub fn equal_volume_normalize(x: &NodeSeq<Vec3>, cfg: &ToleranceConfig) -> Result<NodeSeq<Vec3>> {
    let alpha = alpha_of(x);
    if let Some(node) = alpha.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::NotLocallyConvex { node });
    }
    let n = x.n();
    let m = DMatrix::from_fn(n, n, |r, c| {
        let d = (c + n - r) % n;
        if d == 0 || d == 1 || d == n - 1 {
            1.0
        } else {
            0.0
        }
    });
    let rhs = DVector::from_iterator(n, alpha.iter().map(|a| -a.ln()));
    let nu = if n % 3 != 0 {
        m.lu()
            .solve(&rhs)
            .ok_or(Error::SingularNormalization { n, residual: f64::INFINITY })?
    } else {
        let nu = m
            .clone()
            .svd(true, true)
            .solve(&rhs, 1e-10)
            .map_err(|_| Error::SingularNormalization { n, residual: f64::INFINITY })?;
        let residual = (&m * &nu - &rhs).norm() / rhs.norm().max(1.0);
        if !(residual <= cfg.tol_residual) {
            return Err(Error::SingularNormalization { n, residual });
        }
        nu
    };
    let out = NodeSeq::from_fn(n, |i| x[i] * nu[i].exp())?;
    let deviation = alpha_of(&out).iter().fold(0.0f64, |m, a| m.max((a - 1.0).abs()));
    if !(deviation <= cfg.tol_residual) {
        return Err(Error::NotEqualVolume { deviation });
    }
    Ok(out)
}

/// Adds uniform noise of size `perturb_scale · diameter` until the polygon is
/// generic and still locally convex. Returns the input when it is already
/// generic and `perturb_scale = 0`.
pub fn perturb_to_generic(x: &NodeSeq<Vec3>, cfg: &GenConfig) -> Result<NodeSeq<Vec3>> {
    cfg.validate()?;
    if let Some(node) = alpha_of(x).iter().position(|&a| !(a > 0.0)) {
        return Err(Error::NotLocallyConvex { node });
    }
    if cfg.perturb_scale == 0.0 {
        if is_generic(x, &cfg.tolerances) {
            return Ok(x.clone());
        }
        return Err(failed(0, "perturb_scale is zero and the input is not generic"));
    }
    let mut rng = cfg.rng();
    let diameter = x.iter().fold(0.0f64, |m, p| m.max(p.norm())) * 2.0;
    let size = cfg.perturb_scale * diameter;
    for _ in 0..cfg.max_retries {
        let y = x.map(|p| {
            *p + Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ) * size
        });
        if alpha_of(&y).iter().all(|&a| a > 0.0) && is_generic(&y, &cfg.tolerances) {
            return Ok(y);
        }
    }
    Err(failed(cfg.max_retries, "perturbation never produced a generic locally convex polygon"))
}

/// Sum of `τ` over the cycle for the normalized lift of `gamma`, if defined.
fn tau_sum(gamma: &NodeSeq<Vec2>, cfg: &ToleranceConfig) -> Option<f64> {
    if !matches!(is_convex(gamma, cfg), Ok(true)) || !contains_origin(gamma, cfg) {
        return None;
    }
    let x = equal_volume_normalize(&gamma.map(|p| p.lift(1.0)), cfg).ok()?;
    let sf = structure_functions(&x, cfg).ok()?;
    Some(sf.tau.iter().sum())
}

/// An equal-volume polygon on which `τ` sums to zero, so that the natural
/// parallel unimodular field exists.
///
/// A random direction `γ(s) = γ₀ + W₁ + s·W₂` through a perturbed regular
/// polygon is scanned for a sign change of `Σ τ` of the normalized lift, and
/// the root is refined by bisection. Requires `n ≢ 0 (mod 3)`.
pub fn random_integrable_equal_volume(cfg: &GenConfig) -> Result<NodeSeq<Vec3>> {
    cfg.validate()?;
    let n = cfg.n;
    if n % 3 == 0 {
        return Err(Error::GenerationFailed {
            attempts: 0,
            reason: format!("equal-volume normalization is singular for n = {n}, a multiple of 3"),
        });
    }
    let tol = cfg.tolerances;
    let mut rng = cfg.rng();
    let step = TAU / n as f64;
    for _ in 0..cfg.max_retries {
        let start = rng.gen_range(0.0..TAU);
        let mut noise = |amp: f64| -> Vec<Vec2> {
            (0..n)
                .map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp)
                .collect()
        };
        let w1 = noise(0.15 * step);
        let w2 = noise(0.15 * step);
        let at = |s: f64| {
            NodeSeq::from_fn(n, |k| {
                let t = start + step * k as f64;
                Vec2::new(t.cos(), t.sin()) + w1[k] + w2[k] * s
            })
            .expect("period preserved")
        };
        let grid: Vec<f64> = (0..=40).map(|j| -1.0 + j as f64 / 20.0).collect();
        let values: Vec<Option<f64>> = grid.iter().map(|&s| tau_sum(&at(s), &tol)).collect();
        let bracket = (0..grid.len() - 1).find_map(|j| match (values[j], values[j + 1]) {
            (Some(a), Some(b)) if a * b < 0.0 => Some((grid[j], grid[j + 1], a)),
            _ => None,
        });
        let Some((mut lo, mut hi, f_lo)) = bracket else { continue };
        let mut f_lo = f_lo;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            match tau_sum(&at(mid), &tol) {
                Some(f) if f * f_lo > 0.0 => {
                    lo = mid;
                    f_lo = f;
                }
                Some(_) => hi = mid,
                None => break,
            }
        }
        let s = if tau_sum(&at(lo), &tol).map_or(f64::INFINITY, f64::abs)
            <= tau_sum(&at(hi), &tol).map_or(f64::INFINITY, f64::abs)
        {
            lo
        } else {
            hi
        };
        let Ok(x) = equal_volume_normalize(&at(s).map(|p| p.lift(1.0)), &tol) else { continue };
        if is_generic(&x, &tol) && crate::centroaffine::ev_natural_field(&x, &tol).is_ok() {
            return Ok(x);
        }
    }
    Err(failed(cfg.max_retries, "no zero of the tau sum found"))
}

/// A convex planar polygon with a transversal parallel field.
///
/// The field is `u = −s·x + w` where `w′ = −b̃·x′` is a small closed
/// correction, so `b = s + b̃` varies from edge to edge.
pub fn random_planar_pair(cfg: &GenConfig) -> Result<PlanarPair> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    for _ in 0..cfg.max_retries {
        let x = convex_polygon_with(&mut rng, cfg)?;
        let n = x.n();
        let dx = node_diff(&x);
        let lifted: Vec<Vec3> = dx.iter().map(|d| d.lift(0.0)).collect();
        let mut bt: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        close_curvature(&mut bt, &lifted);
        let mut w = vec![Vec2::ZERO; n];
        for i in 1..n {
            w[i] = w[i - 1] - dx[i - 1] * bt[i - 1];
        }
        let s = rng.gen_range(0.5..2.0);
        let mut amp = 0.5;
        for _ in 0..30 {
            let u = NodeSeq::from_fn(n, |i| x[i] * (-s) + w[i] * amp)?;
            if let Ok(pair) = PlanarPair::centered(x.clone(), u, cfg.tolerances) {
                return Ok(pair);
            }
            amp *= 0.5;
        }
    }
    Err(failed(cfg.max_retries, "no transversal planar field"))
}

/// An equal-area convex polygon `x` with `u = x″`: a unimodular affine image
/// of a scaled regular polygon.
pub fn random_equal_area_pair(cfg: &GenConfig) -> Result<PlanarPair> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let n = cfg.n;
    let step = TAU / n as f64;
    // [x′(i−½), x′(i+½)] = r²·4sin²(π/n)·sin(2π/n) on the circle of radius r.
    let r = 1.0 / (4.0 * (step / 2.0).sin().powi(2) * step.sin()).sqrt();
    for _ in 0..cfg.max_retries {
        let (theta, stretch, shear) = (rng.gen_range(0.0..TAU), rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0));
        let (c, s) = (theta.cos(), theta.sin());
        let shift = Vec2::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)) * r;
        let start = rng.gen_range(0.0..TAU);
        let x = NodeSeq::from_fn(n, |k| {
            let t = start + step * k as f64;
            let p = Vec2::new(r * t.cos(), r * t.sin());
            let p = Vec2::new(p.x * stretch + shear * p.y / stretch, p.y / stretch);
            Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y) + shift
        })?;
        let u = second_diff(&x);
        if let Ok(pair) = PlanarPair::centered(x, u, cfg.tolerances) {
            if pair.is_equal_area() {
                return Ok(pair);
            }
        }
    }
    Err(failed(cfg.max_retries, "no equal-area pair"))
}

/// A named canonical instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Fixture {
    Framed(FramedPolygon),
    Planar(PlanarPair),
    Nodes(NodeSeq<Vec3>),
}

fn unit_square() -> [Vec2; 4] {
    [
        Vec2::new(1.0, 1.0),
        Vec2::new(-1.0, 1.0),
        Vec2::new(-1.0, -1.0),
        Vec2::new(1.0, -1.0),
    ]
}

/// Regular hexagon on the unit circle lifted to `z = 1 + h(i)`.
pub fn lifted_hexagon(h: [f64; 6]) -> NodeSeq<Vec3> {
    NodeSeq::from_fn(6, |i| {
        let t = TAU * i as f64 / 6.0;
        Vec3::new(t.cos(), t.sin(), 1.0 + h[i])
    })
    .expect("period preserved")
}

/// Heights giving a generic lifted hexagon.
pub const GENERIC_HEXAGON_HEIGHTS: [f64; 6] = [0.1, -0.05, 0.08, 0.02, -0.07, 0.03];

/// The canonical instances, by name.
pub fn fixtures() -> Vec<(&'static str, Fixture)> {
    let cfg = ToleranceConfig::default();
    let e = |n: usize| NodeSeq::new(vec![Vec3::E3; n]).expect("period preserved");
    let square = NodeSeq::new(unit_square().iter().map(|p| p.lift(1.0)).collect()).expect("period preserved");
    let half = NodeSeq::new(unit_square().iter().map(|p| *p * 0.5).collect()).expect("period preserved");
    let half_pair = PlanarPair::centered(half.clone(), second_diff(&half), cfg).expect("half-square pair is valid");
    let pedal = half_pair.cylindrical_pedal().expect("half-square pair has a pedal").pedal;

    let mut planted = lifted_hexagon(GENERIC_HEXAGON_HEIGHTS).into_values();
    let normal = (planted[1] - planted[0]).cross(planted[2] - planted[1]);
    planted[3] = planted[3] * (normal.dot(planted[1]) / normal.dot(planted[3]));
    let planted = NodeSeq::new(planted).expect("period preserved");

    vec![
        (
            "lifted_square",
            Fixture::Framed(FramedPolygon::centered(square, e(4), cfg).expect("lifted square is valid")),
        ),
        ("half_square_pair", Fixture::Planar(half_pair)),
        ("perturbed_hexagon", Fixture::Nodes(lifted_hexagon([0.1, 0.0, 0.0, 0.0, 0.0, 0.0]))),
        (
            "generic_hexagon",
            Fixture::Framed(
                FramedPolygon::centered(lifted_hexagon(GENERIC_HEXAGON_HEIGHTS), e(6), cfg)
                    .expect("generic hexagon is valid"),
            ),
        ),
        (
            "planted_coplanar_hexagon",
            Fixture::Framed(FramedPolygon::centered(planted, e(6), cfg).expect("planted hexagon is valid")),
        ),
        (
            "pedal_constant_curvature",
            Fixture::Framed(
                FramedPolygon::centered(pedal.into_nodes(), e(4), cfg).expect("pedal pair is valid"),
            ),
        ),
    ]
}

/// Looks up one of [`fixtures`] by name.
pub fn fixture(name: &str) -> Option<Fixture> {
    fixtures().into_iter().find(|(k, _)| *k == name).map(|(_, f)| f)
}
