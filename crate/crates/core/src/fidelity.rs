//! Closed-form fidelity kernels.
//!
//! Zero temperature: the ground states of `h . gamma` have fidelity
//! `sqrt((1 + n1 . n2) / 2)` with `n = h / |h|`, for Pauli (`d = 3`) and
//! Clifford (`d = 4`, rank-2 ground projector) Hamiltonians alike. It is
//! evaluated as `|n1 + n2| / 2`, which keeps full relative precision next to
//! antipodal pairs.
//!
//! Finite temperature: for a Nambu pair `(c_k, c_-k^dag)` with Bloch matrix
//! `h . sigma` the Gibbs state lives in a four-level Fock space with spectrum
//! `{-|h|, 0, 0, |h|}`. With `E = 2|h|` (the gap) its Uhlmann fidelity is
//!
//! ```text
//!        2 + sqrt(2 (1 + A + B n1.n2))
//! F = ---------------------------------------------
//!     sqrt((2 + 2 cosh(bE1/2)) (2 + 2 cosh(bE2/2)))
//! ```
//!
//! with `A = cosh(bE1/2) cosh(bE2/2)` and `B = sinh(bE1/2) sinh(bE2/2)`.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, GridSpec, GAPLESS_SENTINEL};
use crate::model::{HVector, ModelSpec, Momentum, ParamPoint, GAPLESS_TOLERANCE};

/// A fidelity in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Fidelity(f64);

impl Fidelity {
    pub const ONE: Fidelity = Fidelity(1.0);
    pub const ZERO: Fidelity = Fidelity(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Fidelity(value))
        } else {
            Err(Error::OutOfRange(value))
        }
    }

    pub(crate) fn clamped(value: f64) -> Self {
        Fidelity(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Fidelity> for f64 {
    fn from(f: Fidelity) -> f64 {
        f.0
    }
}

/// Inverse temperature of a Gibbs state. Energies follow the gap
/// convention `E = 2|h|`, so the Boltzmann weights are `exp(-+ beta |h|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GibbsContext {
    beta: f64,
}

impl GibbsContext {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidBeta(beta));
        }
        Ok(GibbsContext { beta })
    }

    pub fn from_temperature(t: f64) -> Result<Self> {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "temperature must be positive, got {t}"
            )));
        }
        Self::new(1.0 / t)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Inverse temperature of a scan: a Gibbs state or the ground state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Beta {
    Infinite,
    Finite(GibbsContext),
}

impl Beta {
    pub fn finite(beta: f64) -> Result<Self> {
        Ok(Beta::Finite(GibbsContext::new(beta)?))
    }
}

fn unit_or_gapless(h: &HVector) -> Result<[f64; 4]> {
    h.unit().ok_or(Error::GaplessInput { norm: h.norm() })
}

fn half_norm_sum(n1: &[f64; 4], n2: &[f64; 4], sign: f64) -> f64 {
    n1.iter()
        .zip(n2)
        .map(|(a, b)| (a + sign * b) * (a + sign * b))
        .sum::<f64>()
        .sqrt()
        / 2.0
}

/// Ground-state fidelity `sqrt((1 + n1 . n2) / 2)`, any Clifford dimension.
pub fn fidelity_pure(h1: &HVector, h2: &HVector) -> Result<Fidelity> {
    if h1.dim() != h2.dim() {
        return Err(Error::VectorDimension {
            expected: "equal dimensions",
            got: h2.dim(),
        });
    }
    let n1 = unit_or_gapless(h1)?;
    let n2 = unit_or_gapless(h2)?;
    Ok(Fidelity::clamped(half_norm_sum(&n1, &n2, 1.0)))
}

/// Finite-temperature fidelity of two Nambu-pair Gibbs states (`d = 3`).
///
/// Evaluated after dividing numerator and denominator by
/// `exp(beta (|h1| + |h2|) / 2)`, which keeps it finite for any beta.
pub fn fidelity_gibbs(h1: &HVector, h2: &HVector, ctx: &GibbsContext) -> Result<Fidelity> {
    for h in [h1, h2] {
        if h.dim() != 3 {
            return Err(Error::VectorDimension {
                expected: "3 for Gibbs states",
                got: h.dim(),
            });
        }
    }
    let a1 = ctx.beta * h1.norm();
    let a2 = ctx.beta * h2.norm();
    // 1 + n1.n2 and 1 - n1.n2; at a band touching the direction drops out.
    let (plus, minus) = match (h1.unit(), h2.unit()) {
        (Some(n1), Some(n2)) => {
            let p = half_norm_sum(&n1, &n2, 1.0);
            let m = half_norm_sum(&n1, &n2, -1.0);
            (2.0 * p * p, 2.0 * m * m)
        }
        _ => (1.0, 1.0),
    };
    let s = 0.5 * (a1 + a2);
    // the radicand is summed in log space: its terms reach exp(-2 beta |h|)
    let mut logs = vec![std::f64::consts::LN_2 - 2.0 * s];
    if plus > 0.0 {
        logs.push((0.5 * plus).ln() + (-4.0 * s).exp().ln_1p());
    }
    if minus > 0.0 {
        logs.push((0.5 * minus).ln() - 2.0 * a1);
        logs.push((0.5 * minus).ln() - 2.0 * a2);
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
    let num = 2.0 * (-s).exp() + (0.5 * lse).exp();
    let den = (1.0 + (-a1).exp()) * (1.0 + (-a2).exp());
    Ok(Fidelity::clamped(num / den))
}

/// Ground state for `Beta::Infinite`, Gibbs state otherwise.
pub fn fidelity_at(h1: &HVector, h2: &HVector, beta: &Beta) -> Result<Fidelity> {
    match beta {
        Beta::Infinite => fidelity_pure(h1, h2),
        Beta::Finite(ctx) => fidelity_gibbs(h1, h2, ctx),
    }
}

/// Fidelity of a product state from its factors.
pub fn fidelity_product(factors: &[Fidelity]) -> Fidelity {
    Fidelity::clamped(factors.iter().map(|f| f.0).product())
}

/// `2 theta_k` of the transverse-field Ising chain.
fn bogoliubov_double_angle(k: f64, h: f64) -> Result<f64> {
    let (s, c) = k.sin_cos();
    let eps = (s * s + (c - h) * (c - h)).sqrt();
    if eps <= GAPLESS_TOLERANCE {
        return Err(Error::GaplessInput { norm: eps });
    }
    Ok(s.atan2(c - h))
}

/// `|cos(theta_k - theta'_k)|` of the Ising chain at one `k` in `[0, pi]`.
pub fn fidelity_ising_k(k: f64, h_field1: f64, h_field2: f64) -> Result<Fidelity> {
    if !(0.0..=std::f64::consts::PI).contains(&k) {
        return Err(Error::InvalidArgument(format!("k = {k} outside [0, pi]")));
    }
    let t1 = bogoliubov_double_angle(k, h_field1)?;
    let t2 = bogoliubov_double_angle(k, h_field2)?;
    Ok(Fidelity::clamped((0.5 * (t1 - t2)).cos().abs()))
}

/// Product of [`fidelity_ising_k`] over a strictly increasing grid in `[0, pi]`.
pub fn fidelity_ising_total(ks: &[f64], h_field1: f64, h_field2: f64) -> Result<Fidelity> {
    if ks.is_empty() {
        return Err(Error::InvalidArgument("empty momentum grid".into()));
    }
    if ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "momentum grid must be strictly increasing".into(),
        ));
    }
    let factors = ks
        .iter()
        .map(|&k| fidelity_ising_k(k, h_field1, h_field2))
        .collect::<Result<Vec<_>>>()?;
    Ok(fidelity_product(&factors))
}

/// Many-body fidelity at one momentum: product over sectors, `None` when
/// any sector of either state is gapless there.
pub fn sector_fidelity(
    model: &ModelSpec,
    p1: &crate::model::Resolved,
    p2: &crate::model::Resolved,
    k: &Momentum,
    beta: &Beta,
) -> Result<Option<Fidelity>> {
    let s1 = model.eval_resolved(p1, k.components());
    let s2 = model.eval_resolved(p2, k.components());
    if s1.iter().chain(s2.iter()).any(HVector::is_gapless) {
        return Ok(None);
    }
    let mut f = 1.0;
    for (a, b) in s1.iter().zip(s2.iter()) {
        f *= fidelity_at(a, b, beta)?.value();
    }
    Ok(Some(Fidelity::clamped(f)))
}

/// Fidelity between `q1` and `q2` over a momentum grid; gapless points hold
/// [`GAPLESS_SENTINEL`].
pub fn fidelity_map(
    model: &ModelSpec,
    q1: &ParamPoint,
    q2: &ParamPoint,
    grid: &GridSpec,
    beta: &Beta,
) -> Result<Grid2D> {
    grid.check_model(model)?;
    let p1 = model.resolve(q1)?;
    let p2 = model.resolve(q2)?;
    let values = grid.evaluate(model.dim_k, |k| {
        match sector_fidelity(model, &p1, &p2, k, beta) {
            Ok(Some(f)) => f.value(),
            // kernels only fail on gapless input, which is screened above
            Ok(None) | Err(_) => GAPLESS_SENTINEL,
        }
    });
    Grid2D::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn h3(x: f64, y: f64, z: f64) -> HVector {
        HVector::new(&[x, y, z]).unwrap()
    }

    #[test]
    fn pure_identity_antipodal_orthogonal() {
        let h = h3(0.3, -1.2, 0.5);
        assert!((fidelity_pure(&h, &h).unwrap().value() - 1.0).abs() < 1e-15);
        assert_eq!(
            fidelity_pure(&h3(0.0, 0.0, 1.0), &h3(0.0, 0.0, -1.0))
                .unwrap()
                .value(),
            0.0
        );
        let f = fidelity_pure(&h3(1.0, 0.0, 0.0), &h3(0.0, 1.0, 0.0)).unwrap();
        assert!((f.value() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pure_rejects_gapless() {
        assert!(matches!(
            fidelity_pure(&h3(0.0, 0.0, 0.0), &h3(1.0, 0.0, 0.0)),
            Err(Error::GaplessInput { .. })
        ));
    }

    #[test]
    fn triplet_pair_vanishes_at_zone_edge() {
        let m = ModelSpec::lookup("triplet_product").unwrap();
        let q1 = ParamPoint::from_pairs(&[("t", 1.0), ("mu", -3.0), ("mz", 0.5), ("delta_t", 0.6)]);
        let q2 = q1.clone().with("mu", -0.1);
        let p1 = m.resolve(&q1).unwrap();
        let p2 = m.resolve(&q2).unwrap();
        let f = sector_fidelity(&m, &p1, &p2, &Momentum::k2(PI, 0.0), &Beta::Infinite)
            .unwrap()
            .unwrap();
        assert!(f.value() < 1e-15);
    }

    #[test]
    fn gibbs_limits() {
        let a = h3(0.4, -0.3, 1.1);
        let b = h3(-0.9, 0.2, 0.1);
        let zero = GibbsContext::new(0.0).unwrap();
        assert!((fidelity_gibbs(&a, &b, &zero).unwrap().value() - 1.0).abs() < 1e-15);
        for beta in [0.1, 1.0, 10.0, 1e3] {
            let ctx = GibbsContext::new(beta).unwrap();
            assert!((fidelity_gibbs(&a, &a, &ctx).unwrap().value() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gibbs_matches_direct_formula_at_moderate_beta() {
        let a = h3(0.4, -0.3, 1.1);
        let b = h3(-0.9, 0.2, 0.1);
        for beta in [0.3, 2.0, 7.5] {
            let e1 = 2.0 * a.norm();
            let e2 = 2.0 * b.norm();
            let (x1, x2) = (beta * e1 / 2.0, beta * e2 / 2.0);
            let aa = x1.cosh() * x2.cosh();
            let bb = x1.sinh() * x2.sinh();
            let c = a.dot(&b) / (a.norm() * b.norm());
            let direct = (2.0 + (2.0 * (1.0 + aa + bb * c)).sqrt())
                / ((2.0 + 2.0 * x1.cosh()) * (2.0 + 2.0 * x2.cosh())).sqrt();
            let ctx = GibbsContext::new(beta).unwrap();
            let got = fidelity_gibbs(&a, &b, &ctx).unwrap().value();
            assert!(
                (got - direct).abs() < 1e-13,
                "beta {beta}: {got} vs {direct}"
            );
        }
    }

    #[test]
    fn gibbs_approaches_pure_at_low_temperature() {
        for gamma in [0.0, 0.7, 1.9, 3.0] {
            let a = h3(1.0, 0.0, 0.0);
            let b = h3(f64::cos(gamma), f64::sin(gamma), 0.0);
            let ctx = GibbsContext::new(40.0).unwrap();
            let g = fidelity_gibbs(&a, &b, &ctx).unwrap().value();
            let p = fidelity_pure(&a, &b).unwrap().value();
            assert!((g - p).abs() < 1e-6);
        }
    }

    #[test]
    fn gibbs_input_errors() {
        let a = h3(1.0, 0.0, 0.0);
        let d4 = HVector::new(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let ctx = GibbsContext::new(1.0).unwrap();
        assert!(matches!(
            fidelity_gibbs(&a, &d4, &ctx),
            Err(Error::VectorDimension { .. })
        ));
        assert!(matches!(
            GibbsContext::new(-1.0),
            Err(Error::InvalidBeta(_))
        ));
        assert!(matches!(
            GibbsContext::new(f64::INFINITY),
            Err(Error::InvalidBeta(_))
        ));
    }

    #[test]
    fn product_of_factors() {
        let f = |v| Fidelity::new(v).unwrap();
        assert_eq!(fidelity_product(&[f(1.0), f(1.0)]).value(), 1.0);
        assert_eq!(fidelity_product(&[f(0.0), f(0.9)]).value(), 0.0);
        assert!((fidelity_product(&[f(0.8), f(0.5)]).value() - 0.4).abs() < 1e-15);
        assert!(Fidelity::new(1.5).is_err());
    }

    #[test]
    fn ising_zero_momentum() {
        assert!((fidelity_ising_k(0.0, 0.2, 0.8).unwrap().value() - 1.0).abs() < 1e-15);
        assert!(fidelity_ising_k(0.0, 0.5, 1.5).unwrap().value() < 1e-15);
        for k in [0.0, 0.3, 1.0, PI] {
            assert!((fidelity_ising_k(k, 0.37, 0.37).unwrap().value() - 1.0).abs() < 1e-15);
        }
        assert!(matches!(
            fidelity_ising_k(0.0, 1.0, 0.5),
            Err(Error::GaplessInput { .. })
        ));
        assert!(fidelity_ising_k(-0.1, 0.5, 0.5).is_err());
    }

    #[test]
    fn ising_total() {
        let ks: Vec<f64> = (0..64).map(|i| i as f64 * PI / 63.0).collect();
        assert_eq!(fidelity_ising_total(&ks, 0.4, 0.4).unwrap().value(), 1.0);
        assert!(fidelity_ising_total(&ks, 0.5, 1.5).unwrap().value() < 1e-15);
        assert!(fidelity_ising_total(&[], 0.5, 1.5).is_err());
        assert!(fidelity_ising_total(&[0.2, 0.1], 0.5, 1.5).is_err());
    }
}
