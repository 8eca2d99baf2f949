use kfid_core::{
    fidelity_gibbs, fidelity_ising_total, fidelity_oracle, fidelity_pure, Beta, GibbsContext,
    HVector,
};
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = HVector> {
    prop::array::uniform3(-3.0f64..3.0)
        .prop_filter("gapped", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|v| HVector::new(&v).unwrap())
}

fn vec4() -> impl Strategy<Value = HVector> {
    prop::array::uniform4(-3.0f64..3.0)
        .prop_filter("gapped", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|v| HVector::new(&v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gibbs_matches_oracle(a in vec3(), b in vec3(), beta in 0.0f64..60.0) {
        let ctx = GibbsContext::new(beta).unwrap();
        let closed = fidelity_gibbs(&a, &b, &ctx).unwrap().value();
        let brute = fidelity_oracle(&a, &b, &Beta::Finite(ctx)).unwrap().value();
        prop_assert!((closed - brute).abs() <= 1e-10, "{closed} vs {brute}");
    }

    #[test]
    fn pure_matches_oracle_d3(a in vec3(), b in vec3()) {
        let closed = fidelity_pure(&a, &b).unwrap().value();
        let brute = fidelity_oracle(&a, &b, &Beta::Infinite).unwrap().value();
        prop_assert!((closed - brute).abs() <= 1e-10);
    }

    #[test]
    fn pure_matches_oracle_d4(a in vec4(), b in vec4()) {
        let closed = fidelity_pure(&a, &b).unwrap().value();
        let brute = fidelity_oracle(&a, &b, &Beta::Infinite).unwrap().value();
        prop_assert!((closed - brute).abs() <= 1e-10);
    }
}

proptest! {
    #[test]
    fn swap_symmetry(a in vec3(), b in vec3(), beta in 0.0f64..50.0) {
        let ctx = GibbsContext::new(beta).unwrap();
        prop_assert!((fidelity_pure(&a, &b).unwrap().value()
            - fidelity_pure(&b, &a).unwrap().value()).abs() <= 1e-12);
        prop_assert!((fidelity_gibbs(&a, &b, &ctx).unwrap().value()
            - fidelity_gibbs(&b, &a, &ctx).unwrap().value()).abs() <= 1e-12);
    }

    #[test]
    fn scale_invariance(a in vec4(), b in vec4(), c1 in 1e-3f64..1e3, c2 in 1e-3f64..1e3) {
        let f = fidelity_pure(&a, &b).unwrap().value();
        let g = fidelity_pure(&a.scaled(c1), &b.scaled(c2)).unwrap().value();
        prop_assert!((f - g).abs() <= 1e-12);
    }

    #[test]
    fn padding_to_dirac(a in vec3(), b in vec3()) {
        let f = fidelity_pure(&a, &b).unwrap().value();
        let g = fidelity_pure(&a.padded(4).unwrap(), &b.padded(4).unwrap()).unwrap().value();
        prop_assert!((f - g).abs() <= 1e-12);
    }

    #[test]
    fn fidelity_in_unit_interval(a in vec3(), b in vec3(), beta in 0.0f64..1e3) {
        let ctx = GibbsContext::new(beta).unwrap();
        let f = fidelity_gibbs(&a, &b, &ctx).unwrap().value();
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn antipodal_smoothing_is_monotone(a in vec3(), e in -3i32..=3) {
        // power-of-two ratio keeps the pair exactly antipodal in floating point
        let b = a.scaled(-2f64.powi(e));
        let mut prev = 1.0;
        for i in 0..12 {
            let beta = 0.05 * 2f64.powi(i);
            let f = fidelity_gibbs(&a, &b, &GibbsContext::new(beta).unwrap()).unwrap().value();
            prop_assert!(f > 0.0);
            prop_assert!(f < prev, "beta {beta}: {f} !< {prev}");
            prev = f;
        }
    }
}

#[test]
fn antipodal_smoothing_reaches_zero() {
    let a = HVector::new(&[0.0, 0.0, 1.0]).unwrap();
    let b = a.scaled(-0.5);
    let f = fidelity_gibbs(&a, &b, &GibbsContext::new(200.0).unwrap()).unwrap();
    assert!(f.value() < 1e-20);
}

#[test]
fn identical_inputs_through_oracle() {
    let a = HVector::new(&[0.2, 0.9, -0.4]).unwrap();
    for beta in [
        Beta::Infinite,
        Beta::finite(0.5).unwrap(),
        Beta::finite(50.0).unwrap(),
    ] {
        assert!((fidelity_oracle(&a, &a, &beta).unwrap().value() - 1.0).abs() < 1e-12);
    }
}

// cos(theta - theta') against the planar h-vector route
#[test]
fn ising_product_matches_planar_vectors() {
    let n = 64;
    let ks: Vec<f64> = (0..n)
        .map(|i| i as f64 * std::f64::consts::PI / (n - 1) as f64)
        .collect();
    let (h1, h2) = (0.2, 0.8);
    let total = fidelity_ising_total(&ks, h1, h2).unwrap().value();
    let mut expect = 1.0;
    for &k in &ks {
        let a = HVector::new(&[k.sin(), 0.0, k.cos() - h1]).unwrap();
        let b = HVector::new(&[k.sin(), 0.0, k.cos() - h2]).unwrap();
        expect *= fidelity_pure(&a, &b).unwrap().value();
    }
    assert!((total - expect).abs() < 1e-12, "{total} vs {expect}");
}
