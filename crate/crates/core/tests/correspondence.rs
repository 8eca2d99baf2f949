use std::f64::consts::{FRAC_PI_2, PI};

use kfid_core::correspondence::{perturbative_witness, DEFAULT_TOL};
use kfid_core::{
    antipodal_lambda, counterexample_suite, critical_line, eval_h, fidelity_map, fidelity_pure,
    zero_fidelity_pairs, Beta, Error, GridSpec, HVector, ModelSpec, Momentum, ParamPoint,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(pairs: &[(&str, f64)]) -> ParamPoint {
    ParamPoint::from_pairs(pairs)
}

fn triplet(mu: f64) -> ParamPoint {
    q(&[("t", 1.0), ("mu", mu), ("mz", 0.5), ("delta_t", 0.6)])
}

#[test]
fn lambda_from_triplet_zone_edge() {
    let k = Momentum::k2(PI, 0.0);
    let h1 = eval_h("triplet_up", &triplet(-3.0), &k).unwrap();
    let h2 = eval_h("triplet_up", &triplet(-0.1), &k).unwrap();
    assert!((h1.components()[2] - 2.5).abs() < 1e-12);
    assert!((h2.components()[2] + 0.4).abs() < 1e-12);
    let l = antipodal_lambda(&h1, &h2, DEFAULT_TOL).unwrap();
    assert!((l - 0.16).abs() < 1e-12);
}

#[test]
fn critical_line_examples() {
    let m = ModelSpec::lookup("triplet_up").unwrap();
    let line = critical_line(
        &m,
        &triplet(-3.0),
        &triplet(-0.1),
        &Momentum::k2(PI, 0.0),
        1e-10,
    )
    .unwrap();
    let d = &line.direction;
    let t = d.get("t").unwrap();
    assert!((d.get("mu").unwrap() / t + 0.5).abs() < 1e-12);
    assert!((d.get("mz").unwrap() / t - 0.5).abs() < 1e-12);
    assert!((d.get("delta_t").unwrap() / t - 0.6).abs() < 1e-12);
    assert!(line.verified_gap <= 1e-12);

    let m = ModelSpec::lookup("kitaev1d").unwrap();
    let line = critical_line(
        &m,
        &q(&[("t", 1.0), ("mu", 0.0), ("delta", 1.0)]),
        &q(&[("t", 1.0), ("mu", 0.0), ("delta", -1.0)]),
        &Momentum::k1(FRAC_PI_2),
        1e-8,
    )
    .unwrap();
    assert!((line.lambda - 1.0).abs() < 1e-12);
    assert_eq!(line.direction.get("delta"), Some(0.0));
    assert_eq!(line.direction.get("mu"), Some(0.0));
    assert_eq!(line.direction.get("t"), Some(2.0));

    let m = ModelSpec::lookup("rot_flat").unwrap();
    assert!(matches!(
        critical_line(
            &m,
            &q(&[("phi", 0.4)]),
            &q(&[("phi", 0.4 + PI)]),
            &Momentum::k2(0.0, 0.0),
            1e-8
        ),
        Err(Error::LinearityNotDeclared { .. })
    ));
}

#[test]
fn composite_model_uses_the_closing_sector() {
    let m = ModelSpec::lookup("triplet_product").unwrap();
    let line = critical_line(
        &m,
        &triplet(-3.0),
        &triplet(-0.1),
        &Momentum::k2(PI, 0.0),
        1e-10,
    )
    .unwrap();
    assert_eq!(line.sector, 0);
    assert!(line.verified_gap <= 1e-10);
}

#[test]
fn rot_flat_pairs_differ_by_pi() {
    let m = ModelSpec::lookup("rot_flat").unwrap();
    let g = GridSpec::for_model(&m, 3, 3).unwrap();
    let phis = [0.0, PI / 4.0, PI, 5.0 * PI / 4.0];
    let samples: Vec<ParamPoint> = phis.iter().map(|p| q(&[("phi", *p)])).collect();
    let w = zero_fidelity_pairs(&m, &samples, &g, DEFAULT_TOL).unwrap();
    assert_eq!(w.len(), 2 * g.len());
    for x in &w {
        let d = x.q2.get("phi").unwrap() - x.q1.get("phi").unwrap();
        assert!((d - PI).abs() < 1e-12);
    }
}

#[test]
fn polar_plane_quadrant_has_no_zero() {
    let m = ModelSpec::lookup("polar_plane").unwrap();
    let g = GridSpec::for_model(&m, 3, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: Vec<ParamPoint> = (0..50)
        .map(|_| {
            q(&[
                ("rho", rng.random_range(0.0..=1.0)),
                ("phi", rng.random_range(0.0..=FRAC_PI_2)),
            ])
        })
        .collect();
    assert!(zero_fidelity_pairs(&m, &samples, &g, DEFAULT_TOL)
        .unwrap()
        .is_empty());
}

#[test]
fn triplet_pair_has_zone_edge_witnesses() {
    let m = ModelSpec::lookup("triplet_product").unwrap();
    let g = GridSpec::for_model(&m, 201, 201).unwrap();
    let w = zero_fidelity_pairs(&m, &[triplet(-3.0), triplet(-0.1)], &g, DEFAULT_TOL).unwrap();
    assert!(!w.is_empty());
    for x in &w {
        let c = x.k.components();
        let edge = |v: f64| (v.abs() - PI).abs() < 1e-12;
        assert!(
            (edge(c[0]) && c[1] == 0.0) || (c[0] == 0.0 && edge(c[1])),
            "{}",
            x.k
        );
        assert_eq!(x.sector, 0);
    }
}

#[test]
fn witnesses_round_trip_through_fidelity() {
    let m = ModelSpec::lookup("triplet_up").unwrap();
    let g = GridSpec::for_model(&m, 41, 41).unwrap();
    let samples: Vec<ParamPoint> = [-6.0, -3.0, -0.1, 2.0, 5.0]
        .iter()
        .map(|mu| triplet(*mu))
        .collect();
    let w = zero_fidelity_pairs(&m, &samples, &g, DEFAULT_TOL).unwrap();
    assert!(!w.is_empty());
    for x in &w {
        let h1 = m.eval_sectors(&x.q1, &x.k).unwrap()[0];
        let h2 = m.eval_sectors(&x.q2, &x.k).unwrap()[0];
        assert!(fidelity_pure(&h1, &h2).unwrap().value() <= DEFAULT_TOL);
        assert!(x.residual <= 1e-10);
        // the sufficient condition: every witness on linear parameters gives a line
        let line = critical_line(&m, &x.q1, &x.q2, &x.k, 1e-8).unwrap();
        assert!(line.verified_gap <= 1e-8);
        // homogeneity: the gap stays closed along nu * direction
        for i in 0..10_000 {
            let nu = 0.1 + 1.9 * i as f64 / 9_999.0;
            let qn: ParamPoint = line
                .direction
                .iter()
                .map(|(k, v)| (k.to_string(), nu * v))
                .collect();
            let gap = 2.0 * m.eval_sectors(&qn, &x.k).unwrap()[0].norm();
            assert!(gap <= 10.0 * 1e-8, "nu {nu}: {gap}");
        }
    }
}

#[test]
fn perturbative_search_near_gapless_point() {
    let m = ModelSpec::lookup("triplet_up").unwrap();
    let qc = q(&[("t", 1.0), ("mu", -0.5), ("mz", 0.5), ("delta_t", 0.6)]);
    let w =
        perturbative_witness(&m, &qc, &Momentum::k2(PI, 0.0), 1e-5, 16, 1, DEFAULT_TOL).unwrap();
    assert!(w.is_some());
    // away from a gapless point the search is refused
    assert!(perturbative_witness(
        &m,
        &triplet(-3.0),
        &Momentum::k2(PI, 0.0),
        1e-5,
        16,
        1,
        DEFAULT_TOL
    )
    .is_err());
}

#[test]
fn suite_passes() {
    let r = counterexample_suite().unwrap();
    assert_eq!(r.checks.len(), 4);
    assert!(r.all_passed(), "{}", r.to_text());
    assert!(r.generic.passed, "{}", r.to_text());
    let text = r.to_text();
    assert!(text.contains("summary: 4/4 checks passed"));
    let csv = r.to_csv();
    assert!(csv.starts_with("check,passed,detail\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn triplet_without_pairing_has_extended_zero_zone() {
    let m = ModelSpec::lookup("triplet_product").unwrap();
    let g = GridSpec::for_model(&m, 101, 101).unwrap();
    let q1 = q(&[("t", 1.0), ("mu", -3.0), ("mz", 0.5), ("delta_t", 0.0)]);
    let q2 = q(&[("t", 1.0), ("mu", -0.1), ("mz", 0.5), ("delta_t", 0.0)]);
    let f = fidelity_map(&m, &q1, &q2, &g, &Beta::Infinite).unwrap();
    let zeros = f.defined().filter(|(_, v)| *v == 0.0).count();
    assert!(zeros as f64 / g.len() as f64 > 0.01);
}

proptest! {
    #[test]
    fn lambda_reciprocity(v in prop::array::uniform3(-3.0f64..3.0), c in 0.01f64..100.0) {
        prop_assume!(v.iter().map(|x| x * x).sum::<f64>() > 1e-4);
        let h1 = HVector::new(&v).unwrap();
        let h2 = h1.scaled(-c);
        let a = antipodal_lambda(&h1, &h2, DEFAULT_TOL).unwrap();
        let b = antipodal_lambda(&h2, &h1, DEFAULT_TOL).unwrap();
        prop_assert!((a * b - 1.0).abs() <= 1e-10);
    }
}
