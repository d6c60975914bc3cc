use centroaffine::centroaffine::{alpha_of, flattening_nodes_of};
use centroaffine::cyclic::{cyclic_sign_changes, edge_diff, node_diff, second_diff, EdgeSeq, NodeSeq, ToleranceConfig};
use centroaffine::duality::dual_pair;
use centroaffine::generators::{
    equal_volume_normalize, random_equal_area_pair, random_framed_polygon, random_integrable_equal_volume,
    random_planar_pair, random_radial_instance, GenConfig,
};
use centroaffine::pedal::{contains_origin, is_convex, planar_vertices, unpedal};
use centroaffine::{cross3, det3, ev_natural_field, Error, FramedPolygon, Vec2, Vec3};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = Vec3> {
    (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unimodular() -> impl Strategy<Value = Matrix3<f64>> {
    proptest::array::uniform9(-0.7..0.7f64)
        .prop_map(|a| Matrix3::from_fn(|r, c| a[3 * r + c] + if r == c { 1.0 } else { 0.0 }))
        .prop_filter("well conditioned, orientation preserving", |m| m.determinant() > 0.2)
        .prop_map(|m| m / m.determinant().cbrt())
}

fn apply(m: &Matrix3<f64>, p: &Vec3) -> Vec3 {
    let v = m * Vector3::new(p.x, p.y, p.z);
    Vec3::new(v[0], v[1], v[2])
}

fn rel_dev(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    let dev = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        0.0
    } else {
        dev / scale
    }
}

fn framed(seed: u64, n: usize) -> FramedPolygon {
    random_framed_polygon(&GenConfig::new(seed, n)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn differences_are_linear(g in prop::collection::vec(vec3(), 3..20), seed in any::<u64>(), a in -5.0..5.0f64) {
        let n = g.len();
        let h: Vec<Vec3> = (0..n).map(|i| g[(i + seed as usize) % n] * 0.5 + Vec3::E2).collect();
        let (g, h) = (NodeSeq::new(g).unwrap(), NodeSeq::new(h).unwrap());
        let combo = NodeSeq::from_fn(n, |i| g[i] * a + h[i]).unwrap();
        let (dg, dh, dc) = (node_diff(&g), node_diff(&h), node_diff(&combo));
        let ddg = edge_diff(&dg);
        let (ddh, ddc) = (edge_diff(&dh), edge_diff(&dc));
        for k in 0..n {
            let scale = 1.0 + g[k].norm() * a.abs() + h[k].norm() + g[k + 1].norm() * a.abs() + h[k + 1].norm();
            prop_assert!((dc[k] - (dg[k] * a + dh[k])).norm() <= 1e-14 * scale);
            prop_assert!((ddc[k] - (ddg[k] * a + ddh[k])).norm() <= 1e-14 * 2.0 * scale);
        }
    }

    #[test]
    fn differences_telescope(g in prop::collection::vec(-100.0..100.0f64, 3..40)) {
        let scale: f64 = g.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        let g = NodeSeq::new(g).unwrap();
        let total: f64 = node_diff(&g).iter().sum();
        prop_assert!(total.abs() <= 1e-12 * scale);
        let total: f64 = second_diff(&g).iter().sum();
        prop_assert!(total.abs() <= 1e-12 * scale);
    }

    #[test]
    fn det_is_triple_product(a in vec3(), b in vec3(), c in vec3()) {
        let d = det3(a, b, c);
        let t = cross3(a, b).dot(c);
        prop_assert!((d - t).abs() <= 1e-12 * a.norm() * b.norm() * c.norm());
    }

    #[test]
    fn sign_change_count_is_even(v in prop::collection::vec(prop_oneof![-10.0..-0.1f64, 0.1..10.0f64], 3..30)) {
        let sc = cyclic_sign_changes(&v, &ToleranceConfig::default()).unwrap();
        prop_assert_eq!(sc.count % 2, 0);
    }

    #[test]
    fn invariants_are_centroaffine(seed in any::<u64>(), n in 5usize..25, m in unimodular()) {
        let p = framed(seed, n);
        let q = FramedPolygon::centered(p.nodes().map(|x| apply(&m, x)), p.field().map(|u| apply(&m, u)), *p.tolerances()).unwrap();
        let (a, b) = (p.invariants().unwrap(), q.invariants().unwrap());
        prop_assert!(rel_dev(a.alpha.values(), b.alpha.values()) <= 1e-9);
        prop_assert!(rel_dev(a.beta.values(), b.beta.values()) <= 1e-9);
        prop_assert!(rel_dev(a.b.values(), b.b.values()) <= 1e-9);
        prop_assert!(rel_dev(a.lambda.values(), b.lambda.values()) <= 1e-9);
        prop_assert!(rel_dev(a.delta.values(), b.delta.values()) <= 1e-9);
        prop_assert_eq!(p.features(), q.features());
    }

    #[test]
    fn flattening_identity_and_reframing(seed in any::<u64>(), n in 5usize..30, c in -3.0..3.0f64, d in 0.2..4.0f64) {
        let p = framed(seed, n);
        prop_assert!(p.delta_lambda_residual().unwrap() <= 1e-9);
        let q = p.reframe(c, d).unwrap();
        prop_assert!(q.delta_lambda_residual().unwrap() <= 1e-9);
        let f = p.flattening_nodes().unwrap();
        prop_assert_eq!(&q.flattening_nodes_by_lambda().unwrap(), &f);
        prop_assert_eq!(f.len() % 2, 0);
        // b̄ = d·b − c
        let (b, bq) = (p.curvature_b().unwrap(), q.curvature_b().unwrap());
        let expected: Vec<f64> = b.iter().map(|v| d * v - c).collect();
        prop_assert!(rel_dev(bq.values(), &expected) <= 1e-9);
        if let Ok(v) = p.vertex_edges() {
            prop_assert_eq!(v.len() % 2, 0);
            prop_assert_eq!(q.vertex_edges().unwrap(), v);
        }
    }

    #[test]
    fn constant_curvature_has_common_focus(seed in any::<u64>(), n in 5usize..20, b in prop_oneof![Just(0.0), -2.0..-0.2f64, 0.2..2.0f64]) {
        let inst = random_radial_instance(&GenConfig::new(seed, n)).unwrap();
        let e = Vec3::new(0.1, -0.2, 3.0);
        // U = b(E − X) has U′ = −bX′ and focal point E; b = 0 gives the constant field E.
        let u = inst.x.map(|x| if b == 0.0 { e } else { (e - *x) * b });
        let Ok(p) = FramedPolygon::centered(inst.x.clone(), u, ToleranceConfig::default()) else {
            return Ok(());
        };
        let w = p.constant_curvature_witness().unwrap().unwrap();
        let foci = p.focal_points().unwrap();
        if b == 0.0 {
            prop_assert!((w - e).norm() <= 1e-12);
            prop_assert!(foci.iter().all(|f| matches!(f, centroaffine::FocalPoint::AtInfinity(_))));
        } else {
            prop_assert!((w - e).norm() <= 1e-9 * e.norm());
            for f in foci.iter() {
                let centroaffine::FocalPoint::Finite(f) = f else { panic!("finite focus expected") };
                prop_assert!((*f - e).norm() <= 1e-9 * e.norm());
            }
        }
        // A random parallel field has non-constant curvature and scattered foci.
        let q = framed(seed, n);
        prop_assert_eq!(q.constant_curvature_witness().unwrap(), None);
    }

    #[test]
    fn duality_is_equivariant(seed in any::<u64>(), n in 5usize..25, m in unimodular()) {
        let p = framed(seed, n);
        let q = FramedPolygon::centered(p.nodes().map(|x| apply(&m, x)), p.field().map(|u| apply(&m, u)), *p.tolerances()).unwrap();
        let (dp, dq) = (dual_pair(&p).unwrap(), dual_pair(&q).unwrap());
        let inv_t = m.try_inverse().unwrap().transpose();
        for k in 0..n {
            let (y, v) = (apply(&inv_t, &dp.y[k]), apply(&inv_t, &dp.v[k]));
            prop_assert!((dq.y[k] - y).norm() <= 1e-9 * y.norm());
            prop_assert!((dq.v[k] - v).norm() <= 1e-9 * v.norm().max(y.norm()));
        }
    }

    #[test]
    fn planar_dual_of_radial_instance(seed in any::<u64>(), n in 5usize..30) {
        let tol = ToleranceConfig::default();
        let inst = random_radial_instance(&GenConfig::new(seed, n)).unwrap();
        prop_assert!(is_convex(&inst.gamma, &tol).unwrap());
        prop_assert!(contains_origin(&inst.gamma, &tol));
        prop_assert!(alpha_of(&inst.x).iter().all(|&a| a > 0.0));
        let (y, v) = inst.planar_dual(tol).unwrap();
        prop_assert!(is_convex(&y, &tol).unwrap());
        let spatial = dual_pair(&inst.framed(tol).unwrap()).unwrap().as_framed().unwrap().vertex_edges();
        match planar_vertices(&y, &v, &tol) {
            Ok(vs) => prop_assert_eq!(vs, spatial.unwrap()),
            Err(Error::NotGeneric { .. }) => prop_assert!(spatial.is_err()),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn pedal_round_trip(seed in any::<u64>(), n in 4usize..30) {
        let pair = random_planar_pair(&GenConfig::new(seed, n)).unwrap();
        let ped = pair.cylindrical_pedal().unwrap();
        let back = unpedal(&ped.pedal, Vec3::E3, ToleranceConfig::default()).unwrap();
        for k in 0..n {
            prop_assert!((back.x()[k] - pair.x()[k]).norm() <= 1e-9);
            prop_assert!((back.u()[k] - pair.u()[k]).norm() <= 1e-9 * pair.u()[k].norm().max(1.0));
        }
    }

    #[test]
    fn constant_curvature_equal_volume_comes_from_equal_area(seed in any::<u64>(), n in 4usize..20, m in unimodular()) {
        let tol = ToleranceConfig::default();
        let pair = random_equal_area_pair(&GenConfig::new(seed, n)).unwrap();
        let ped = pair.cylindrical_pedal().unwrap().pedal;
        let framed = FramedPolygon::centered(ped.clone().into_nodes(), NodeSeq::new(vec![Vec3::E3; n]).unwrap(), tol).unwrap();
        prop_assert!(framed.is_equal_volume() && framed.is_unimodular());
        prop_assert!(framed.is_constant_curvature().unwrap());

        let inv_t = m.try_inverse().unwrap().transpose();
        let moved: EdgeSeq<Vec3> = ped.map(|y| apply(&inv_t, y));
        let back = unpedal(&moved, apply(&inv_t, &Vec3::E3), tol).unwrap();
        prop_assert!(back.is_equal_area());
    }

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>(), n in prop::sample::select(vec![4usize, 5, 7, 8, 10, 11, 13])) {
        let tol = ToleranceConfig::default();
        let inst = random_radial_instance(&GenConfig::new(seed, n)).unwrap();
        let y = equal_volume_normalize(&inst.x, &tol).unwrap();
        prop_assert!(alpha_of(&y).iter().all(|a| (a - 1.0).abs() <= 1e-9));
        let z = equal_volume_normalize(&y, &tol).unwrap();
        for i in 0..n {
            prop_assert!((z[i] - y[i]).norm() <= 1e-9 * y[i].norm());
        }
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), n in 5usize..20) {
        let cfg = GenConfig::new(seed, n);
        prop_assert_eq!(random_framed_polygon(&cfg).unwrap(), random_framed_polygon(&cfg).unwrap());
        prop_assert_eq!(random_radial_instance(&cfg).unwrap(), random_radial_instance(&cfg).unwrap());
        prop_assert_eq!(random_planar_pair(&cfg).unwrap(), random_planar_pair(&cfg).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dual_of_equal_volume_unimodular_pair(seed in any::<u64>(), n in prop::sample::select(vec![5usize, 7, 8])) {
        let tol = ToleranceConfig::default();
        let x = random_integrable_equal_volume(&GenConfig::new(seed, n)).unwrap();
        let nat = ev_natural_field(&x, &tol).unwrap();
        let p = FramedPolygon::centered(x, nat.field, tol).unwrap();
        let d = dual_pair(&p).unwrap();
        prop_assert!(d.beta_dual().iter().all(|b| (b - 1.0).abs() <= 1e-9));
        prop_assert!(d.alpha_dual().iter().all(|a| (a - 1.0).abs() <= 1e-9));
        // Flattenings of an integrable instance still come in pairs.
        prop_assert_eq!(flattening_nodes_of(p.nodes(), &tol).unwrap().len() % 2, 0);
    }
}

/// Every parallel unimodular planar field on an equal-area polygon, via SVD:
/// returns a particular solution and the null-space dimension.
fn planar_parallel_unimodular(x: &NodeSeq<Vec2>) -> (Vec<Vec2>, usize) {
    let n = x.n();
    let dx = node_diff(x);
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    let mut rhs = DVector::zeros(2 * n);
    for k in 0..n {
        let j = (k + 1) % n;
        let e = dx[k];
        // [u(j) − u(k), x′(k)] = 0
        a[(k, 2 * j)] += e.y;
        a[(k, 2 * j + 1)] -= e.x;
        a[(k, 2 * k)] -= e.y;
        a[(k, 2 * k + 1)] += e.x;
        // [x′(k), u(k)] = 1
        a[(n + k, 2 * k)] = -e.y;
        a[(n + k, 2 * k + 1)] = e.x;
        rhs[n + k] = 1.0;
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let null = svd.singular_values.iter().filter(|&&s| s <= 1e-10 * smax).count();
    let sol = svd.solve(&rhs, 1e-10).unwrap();
    ((0..n).map(|i| Vec2::new(sol[2 * i], sol[2 * i + 1])).collect(), null)
}

#[test]
fn second_difference_is_the_only_parallel_unimodular_field() {
    for seed in 0..20 {
        let pair = random_equal_area_pair(&GenConfig::new(seed, 5 + seed as usize % 12)).unwrap();
        let (u, null) = planar_parallel_unimodular(pair.x());
        assert_eq!(null, 0);
        let dd = second_diff(pair.x());
        for (i, ui) in u.iter().enumerate() {
            assert!((*ui - dd[i]).norm() <= 1e-9 * dd[i].norm());
        }
        assert!(pair.is_unimodular());
        assert!(pair.planar_curvature().is_ok());
    }
}
