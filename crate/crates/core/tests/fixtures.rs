use centroaffine::centroaffine::{delta_of, flattening_nodes_of, is_generic};
use centroaffine::cyclic::{node_diff, second_diff, NodeSeq, ToleranceConfig};
use centroaffine::duality::{dual_curvature_is_generic, dual_pair, flattening_vertex_correspondence};
use centroaffine::generators::{
    fixture, fixtures, lifted_hexagon, planted_coplanar, random_framed_polygon, random_radial_instance, Fixture,
    GenConfig, GENERIC_HEXAGON_HEIGHTS,
};
use centroaffine::pedal::{radial_projection, unpedal};
use centroaffine::{det3, structure_functions, Error, FramedPolygon, Vec3};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

#[test]
fn fixture_names_are_unique() {
    let names: Vec<&str> = fixtures().iter().map(|(k, _)| *k).collect();
    let mut sorted = names.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), names.len());
    assert!(fixture("no_such_fixture").is_none());
}

#[test]
fn perturbed_hexagon_is_not_generic() {
    let Some(Fixture::Nodes(x)) = fixture("perturbed_hexagon") else { panic!() };
    let delta = delta_of(&x);
    // Edges whose quadruple avoids the raised node 0 are coplanar.
    assert_eq!(delta[2], 0.0);
    assert_eq!(delta[3], 0.0);
    assert!(delta[0] != 0.0 && delta[5] != 0.0);
    assert!(!is_generic(&x, &tol()));
    assert!(matches!(flattening_nodes_of(&x, &tol()), Err(Error::NotGeneric { .. })));
}

#[test]
fn generic_hexagon_flattenings() {
    let x = lifted_hexagon(GENERIC_HEXAGON_HEIGHTS);
    let delta = delta_of(&x);
    for k in 0..6i64 {
        let e = |j: i64| *x.at(j + 1) - *x.at(j);
        assert_eq!(delta[k as usize], det3(e(k + 1), e(k), e(k - 1)));
    }
    // The radial projection is a regular hexagon, so at least four flattenings.
    let f = flattening_nodes_of(&x, &tol()).unwrap();
    assert!(f.len() >= 4 && f.len() % 2 == 0, "{f:?}");

    let Some(Fixture::Framed(p)) = fixture("generic_hexagon") else { panic!() };
    let c = flattening_vertex_correspondence(&p).unwrap();
    assert_eq!(c.flattenings, f);
    assert!(c.agree());
}

#[test]
fn planted_hexagon_agrees_at_the_planted_edge() {
    let Some(Fixture::Framed(p)) = fixture("planted_coplanar_hexagon") else { panic!() };
    let r = centroaffine::duality::coplanarity_concurrency_check(&p).unwrap();
    assert_eq!(r.coplanar, vec![false, true, false, false, false, false]);
    assert!(r.all_agree());
    assert!(!dual_curvature_is_generic(&p).unwrap());
}

#[test]
fn genericity_matches_dual_curvature() {
    for seed in 0..30 {
        let p = random_framed_polygon(&GenConfig::new(seed, 6 + seed as usize % 20)).unwrap();
        assert_eq!(p.is_generic(), dual_curvature_is_generic(&p).unwrap());
        let (q, _) = planted_coplanar(&GenConfig::new(seed, 6 + seed as usize % 20)).unwrap();
        assert!(!q.is_generic());
        assert!(!dual_curvature_is_generic(&q).unwrap());
    }
}

#[test]
fn dual_of_constant_curvature_pair_is_planar() {
    let Some(Fixture::Framed(p)) = fixture("pedal_constant_curvature") else { panic!() };
    assert!(p.is_constant_curvature().unwrap());
    let back = dual_pair(&p).unwrap().dual().unwrap();
    assert!(delta_of(back.nodes()).iter().all(|d| d.abs() <= 1e-12));

    let pedal = p.nodes().clone().into_edges();
    let pair = unpedal(&pedal, Vec3::E3, tol()).unwrap();
    let Some(Fixture::Planar(half)) = fixture("half_square_pair") else { panic!() };
    for i in 0..4 {
        assert!((pair.x()[i] - half.x()[i]).norm() <= 1e-12);
        assert!((pair.u()[i] - half.u()[i]).norm() <= 1e-12);
    }
}

#[test]
fn any_transversal_constant_field_unpedals() {
    // (Y, E) has b ≡ 0 for every constant E, so the dual is always planar.
    let p = random_framed_polygon(&GenConfig::new(3, 7)).unwrap();
    let d = dual_pair(&p).unwrap();
    let mean = d.v.iter().fold(Vec3::ZERO, |s, v| s + *v) / 7.0;
    match unpedal(&d.y, mean, tol()) {
        Ok(pair) => assert_eq!(pair.n(), 7),
        Err(e) => assert!(matches!(e, Error::NonTransversal { .. })),
    }
    let Some(Fixture::Framed(c)) = fixture("pedal_constant_curvature") else { panic!() };
    let flipped = unpedal(&c.nodes().clone().into_edges(), Vec3::new(0.0, 0.0, -1.0), tol());
    assert!(matches!(flipped, Err(Error::NonTransversal { .. })));
}

#[test]
fn equal_area_square_structure() {
    // The half square already has unit area steps; its lift has α ≡ 1,
    // X‴ = −2·X′ and τ ≡ 0.
    let x = NodeSeq::new(vec![
        Vec3::new(0.5, 0.5, 1.0),
        Vec3::new(-0.5, 0.5, 1.0),
        Vec3::new(-0.5, -0.5, 1.0),
        Vec3::new(0.5, -0.5, 1.0),
    ])
    .unwrap();
    let d1 = node_diff(&x);
    let d3 = node_diff(&second_diff(&x));
    for k in 0..4 {
        assert!((d3[k] + d1[k] * 2.0).norm() <= 1e-15);
    }
    let sf = structure_functions(&x, &tol()).unwrap();
    assert!(sf.tau.iter().all(|t| t.abs() <= 1e-15));
}

#[test]
fn tau_sum_is_generically_nonzero() {
    // Normalizing a generic radial polygon to equal volume does not make τ
    // sum to zero, so the natural field fails to close.
    let tol = tol();
    let inst = random_radial_instance(&GenConfig::new(21, 7)).unwrap();
    let x = centroaffine::generators::equal_volume_normalize(&inst.x, &tol).unwrap();
    let sf = structure_functions(&x, &tol).unwrap();
    let sum: f64 = sf.tau.iter().sum();
    assert!(sum.abs() > 1e-6);
    assert!(matches!(
        centroaffine::ev_natural_field(&x, &tol),
        Err(Error::IntegrationInconsistent { .. })
    ));
}

#[test]
fn radial_instances_round_trip() {
    for seed in 0..20 {
        let inst = random_radial_instance(&GenConfig::new(seed, 5 + seed as usize)).unwrap();
        let back = radial_projection(&inst.x, Vec3::ZERO, &tol()).unwrap();
        for i in 0..inst.x.n() {
            assert!((back.gamma[i] - inst.gamma[i]).norm() <= 1e-12);
            assert!((back.scales[i] - inst.scales[i]).abs() <= 1e-12 * inst.scales[i]);
        }
    }
}

#[test]
fn origin_offset_matches_translated_input() {
    let p = random_framed_polygon(&GenConfig::new(5, 9)).unwrap();
    let o = Vec3::new(0.3, -1.2, 2.0);
    let moved = FramedPolygon::new(p.nodes().map(|x| *x + o), p.field().clone(), o, tol()).unwrap();
    assert_eq!(moved.alpha().n(), 9);
    for i in 0..9 {
        assert!((moved.alpha()[i] - p.alpha()[i]).abs() <= 1e-12 * p.alpha()[i].abs());
        assert!((moved.lambda().unwrap()[i] - p.lambda().unwrap()[i]).abs() <= 1e-9);
    }
}
