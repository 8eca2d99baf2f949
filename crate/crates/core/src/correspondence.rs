//! Zero-fidelity pairs, antipodality ratios and critical lines, and the
//! suite of cases where gapless points and fidelity zeros do not match.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fidelity::{fidelity_pure, sector_fidelity, Beta};
use crate::grid::GridSpec;
use crate::model::{
    HVector, ModelId, ModelSpec, Momentum, ParamPoint, DIRAC_K, DIRAC_K_PRIME, GAPLESS_TOLERANCE,
};

/// Default antipodality tolerance on `1 + n1 . n2`.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct AntipodalWitness {
    pub k: Momentum,
    pub q1: ParamPoint,
    pub q2: ParamPoint,
    /// Sector in which `h2 = -lambda h1`.
    pub sector: usize,
    pub lambda: f64,
    /// `|h2 + lambda h1|`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalLine {
    /// `lambda q1 + q2`; the line is `nu * direction` for `nu != 0`.
    pub direction: ParamPoint,
    pub k: Momentum,
    pub sector: usize,
    pub lambda: f64,
    /// `2|h|` at `direction`, `k`.
    pub verified_gap: f64,
}

/// `|h2| / |h1|` when `n1 . n2 <= -1 + tol`.
pub fn antipodal_lambda(h1: &HVector, h2: &HVector, tol: f64) -> Result<f64> {
    let n1 = h1.unit().ok_or(Error::GaplessInput { norm: h1.norm() })?;
    let n2 = h2.unit().ok_or(Error::GaplessInput { norm: h2.norm() })?;
    let cos: f64 = n1.iter().zip(&n2).map(|(a, b)| a * b).sum();
    if cos > -1.0 + tol {
        return Err(Error::NonAntipodal(1.0 + cos));
    }
    Ok(h2.norm() / h1.norm())
}

/// Critical line through the antipodal pair `h_q1(k)`, `h_q2(k)`.
///
/// Every parameter that differs between `q1` and `q2` must be one in which
/// the model is linear; the rest are carried over unchanged. For
/// multi-sector models the first antipodal sector is used.
pub fn critical_line(
    model: &ModelSpec,
    q1: &ParamPoint,
    q2: &ParamPoint,
    k: &Momentum,
    tol: f64,
) -> Result<CriticalLine> {
    let s1 = model.eval_sectors(q1, k)?;
    let s2 = model.eval_sectors(q2, k)?;
    let mut found = None;
    let mut last_err = Error::NonAntipodal(f64::NAN);
    for (i, (a, b)) in s1.iter().zip(s2.iter()).enumerate() {
        match antipodal_lambda(a, b, tol) {
            Ok(l) => {
                found = Some((i, l));
                break;
            }
            Err(e) => last_err = e,
        }
    }
    let (sector, lambda) = found.ok_or(last_err)?;
    let direction = model.linear_combination(lambda, q1, 1.0, q2)?;
    let verified_gap = 2.0 * model.eval_sectors(&direction, k)?[sector].norm();
    if verified_gap > tol {
        return Err(Error::VerificationFailed {
            gap: verified_gap,
            tol,
        });
    }
    Ok(CriticalLine {
        direction,
        k: *k,
        sector,
        lambda,
        verified_gap,
    })
}

fn witness_at(
    model: &ModelSpec,
    q1: &ParamPoint,
    q2: &ParamPoint,
    k: &Momentum,
    tol: f64,
) -> Result<Option<AntipodalWitness>> {
    let p1 = model.resolve(q1)?;
    let p2 = model.resolve(q2)?;
    let f = match sector_fidelity(model, &p1, &p2, k, &Beta::Infinite)? {
        Some(f) => f.value(),
        None => return Ok(None),
    };
    if f > tol {
        return Ok(None);
    }
    let s1 = model.eval_resolved(&p1, k.components());
    let s2 = model.eval_resolved(&p2, k.components());
    let (sector, _) = s1
        .iter()
        .zip(s2.iter())
        .map(|(a, b)| fidelity_pure(a, b).map(|f| f.value()).unwrap_or(1.0))
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |best, (i, v)| if v < best.1 { (i, v) } else { best },
        );
    let (h1, h2) = (s1[sector], s2[sector]);
    let lambda = h2.norm() / h1.norm();
    Ok(Some(AntipodalWitness {
        k: *k,
        q1: q1.clone(),
        q2: q2.clone(),
        sector,
        lambda,
        residual: h2.combine(1.0, &h1, lambda).norm(),
    }))
}

/// Every sample pair `(i < j)` and grid momentum at which the zero-temperature
/// fidelity is `<= tol`, ordered by pair and then grid position.
pub fn zero_fidelity_pairs(
    model: &ModelSpec,
    samples: &[ParamPoint],
    grid: &GridSpec,
    tol: f64,
) -> Result<Vec<AntipodalWitness>> {
    if samples.len() < 2 {
        return Err(Error::InsufficientPoints(format!(
            "{} parameter samples, need 2",
            samples.len()
        )));
    }
    grid.check_model(model)?;
    for s in samples {
        model.resolve(s)?;
    }
    let pairs: Vec<(usize, usize)> = (0..samples.len())
        .flat_map(|i| (i + 1..samples.len()).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for (i, j) in pairs {
        let found: Vec<Option<AntipodalWitness>> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let k = grid.momentum(model.dim_k, idx);
                witness_at(model, &samples[i], &samples[j], &k, tol)
            })
            .collect::<Result<_>>()?;
        out.extend(found.into_iter().flatten());
    }
    Ok(out)
}

/// Randomized search for a pair `q_c +- delta d` around a gapless point
/// `(q_c, k)` whose fidelity at `k` is `<= tol`, over `trials` random
/// directions `d` in the model's full parameter space. To first order in
/// `delta` the two h-vectors are antipodal, so `tol` should scale with
/// `delta` for models that are not linear in every parameter.
pub fn perturbative_witness(
    model: &ModelSpec,
    qc: &ParamPoint,
    k: &Momentum,
    delta: f64,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Option<AntipodalWitness>> {
    let gap = model
        .eval_sectors(qc, k)?
        .iter()
        .map(HVector::norm)
        .fold(f64::INFINITY, f64::min);
    if gap > GAPLESS_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "q_c is not gapless at {k} (|h| = {gap:e})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut q1 = qc.clone();
        let mut q2 = qc.clone();
        for name in model.schema {
            let d: f64 = rng.random_range(-1.0..1.0);
            let v = qc.get(name).unwrap_or(0.0);
            q1.set(name, v + delta * d);
            q2.set(name, v - delta * d);
        }
        if let Some(w) = witness_at(model, &q1, &q2, k, tol)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteCheck {
    pub name: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub checks: Vec<SuiteCheck>,
    /// Randomized search for zeros near gapless points. The claim that they
    /// appear generically is read as "for some sampled direction".
    pub generic: SuiteCheck,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in self.checks.iter().chain(std::iter::once(&self.generic)) {
            let _ = writeln!(
                out,
                "[{}] {}",
                c.name,
                if c.passed { "PASS" } else { "FAIL" }
            );
            for d in &c.details {
                let _ = writeln!(out, "  {d}");
            }
        }
        let _ = writeln!(
            out,
            "summary: {}/{} checks passed",
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len()
        );
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,passed,detail\n");
        for c in self.checks.iter().chain(std::iter::once(&self.generic)) {
            let detail = c.details.join("; ").replace('"', "'");
            let _ = writeln!(out, "{},{},\"{}\"", c.name, c.passed, detail);
        }
        out
    }
}

fn p(pairs: &[(&str, f64)]) -> ParamPoint {
    ParamPoint::from_pairs(pairs)
}

fn check_rot_flat() -> Result<SuiteCheck> {
    let model = ModelSpec::get(ModelId::RotFlat);
    let grid = GridSpec::for_model(&model, 11, 11)?;
    let samples: Vec<ParamPoint> = [0.0, PI / 4.0, PI, 5.0 * PI / 4.0]
        .iter()
        .map(|phi| p(&[("phi", *phi)]))
        .collect();
    let witnesses = zero_fidelity_pairs(&model, &samples, &grid, DEFAULT_TOL)?;
    let mut min_gap = f64::INFINITY;
    for i in 0..=64 {
        let q = p(&[("phi", TAU * i as f64 / 64.0)]);
        let g = crate::spectrum::gap_map(&model, &q, &grid)?;
        min_gap = g.values.iter().copied().fold(min_gap, f64::min);
    }
    let passed = !witnesses.is_empty() && (min_gap - 2.0).abs() < 1e-12;
    Ok(SuiteCheck {
        name: "rot_flat",
        passed,
        details: vec![
            format!("zero-fidelity witnesses: {}", witnesses.len()),
            format!("min gap over phi x zone: {min_gap}"),
        ],
    })
}

fn check_polar_plane() -> Result<SuiteCheck> {
    let model = ModelSpec::get(ModelId::PolarPlane);
    let grid = GridSpec::for_model(&model, 5, 5)?;
    let origin = 2.0
        * model.eval_sectors(&p(&[("rho", 0.0), ("phi", 0.3)]), &Momentum::k2(0.0, 0.0))?[0].norm();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samples: Vec<ParamPoint> = (0..50)
        .map(|_| {
            p(&[
                ("rho", rng.random_range(0.0..=1.0)),
                ("phi", rng.random_range(0.0..=FRAC_PI_2)),
            ])
        })
        .collect();
    let witnesses = zero_fidelity_pairs(&model, &samples, &grid, DEFAULT_TOL)?;
    Ok(SuiteCheck {
        name: "polar_plane",
        passed: origin == 0.0 && witnesses.is_empty(),
        details: vec![
            format!("gap at rho = 0: {origin}"),
            format!(
                "zero-fidelity witnesses among 50 samples: {}",
                witnesses.len()
            ),
        ],
    })
}

fn is_dirac_point(k: &[f64]) -> bool {
    let b = crate::model::Lattice::HoneycombBravais.period_vectors();
    [DIRAC_K, DIRAC_K_PRIME].iter().any(|d| {
        (-3..=3).any(|i| {
            (-3..=3).any(|j| {
                let x = d[0] + i as f64 * b[0][0] + j as f64 * b[1][0];
                let y = d[1] + i as f64 * b[0][1] + j as f64 * b[1][1];
                (k[0] - x).hypot(k[1] - y) < 1e-6
            })
        })
    })
}

fn check_graphene_theta() -> Result<SuiteCheck> {
    let model = ModelSpec::get(ModelId::GrapheneTheta);
    let grid = GridSpec::for_model(&model, 201, 201)?;
    let f = crate::fidelity::fidelity_map(
        &model,
        &p(&[("t0", 1.0), ("theta", 0.0)]),
        &p(&[("t0", 1.0), ("theta", PI)]),
        &grid,
        &Beta::Infinite,
    )?;
    let max_f = f.defined().map(|(_, v)| v).fold(0.0, f64::max);
    let at_k = crate::fidelity::fidelity_map(
        &model,
        &p(&[("t0", 1.0), ("theta", 0.0)]),
        &p(&[("t0", 1.0), ("theta", PI)]),
        &GridSpec::new(1, 1, [[DIRAC_K[0]; 2], [DIRAC_K[1]; 2]])?,
        &Beta::Infinite,
    )?;
    // gap closings over theta: only theta = n pi, only at K and K'
    let n_theta = 96;
    let coarse = GridSpec::for_model(&model, 97, 97)?;
    let mut stray = 0;
    let mut closings = 0;
    let mut min_off = f64::INFINITY;
    for i in 0..=n_theta {
        let theta = TAU * i as f64 / n_theta as f64;
        let on_line = i % (n_theta / 2) == 0;
        let q = p(&[("t0", 1.0), ("theta", theta)]);
        let mut pts = vec![
            Momentum::k2(DIRAC_K[0], DIRAC_K[1]),
            Momentum::k2(DIRAC_K_PRIME[0], DIRAC_K_PRIME[1]),
        ];
        pts.extend((0..coarse.len()).map(|idx| coarse.momentum(2, idx)));
        for k in pts {
            let gap = 2.0 * model.eval_sectors(&q, &k)?[0].norm();
            if !on_line {
                min_off = min_off.min(gap);
            }
            if gap <= 1e-9 {
                if on_line && is_dirac_point(k.components()) {
                    closings += 1;
                } else {
                    stray += 1;
                }
            }
        }
    }
    let passed = max_f <= 1e-12
        && f.sentinel_count() == 0
        && at_k.sentinel_count() == 1
        && closings > 0
        && stray == 0
        && min_off > 1e-9;
    Ok(SuiteCheck {
        name: "graphene_theta",
        passed,
        details: vec![
            format!("max F(theta = 0, pi) over gapped grid points: {max_f:e}"),
            format!("F at K masked as gapless: {}", at_k.sentinel_count() == 1),
            format!("gap closings at K/K' for theta = n pi: {closings}"),
            format!("gap closings elsewhere: {stray}"),
            format!("min gap for theta != n pi: {min_off}"),
        ],
    })
}

fn check_triplet_no_pairing() -> Result<SuiteCheck> {
    let model = ModelSpec::get(ModelId::TripletProduct);
    let grid = GridSpec::for_model(&model, 201, 201)?;
    let q1 = p(&[("t", 1.0), ("mu", -3.0), ("mz", 0.5), ("delta_t", 0.0)]);
    let q2 = p(&[("t", 1.0), ("mu", -0.1), ("mz", 0.5), ("delta_t", 0.0)]);
    let f = crate::fidelity::fidelity_map(&model, &q1, &q2, &grid, &Beta::Infinite)?;
    let p1 = model.resolve(&q1)?;
    let p2 = model.resolve(&q2)?;
    let mut zeros = 0;
    let mut mismatched = 0;
    for (idx, v) in f.defined() {
        let k = grid.momentum(2, idx);
        let s1 = model.eval_resolved(&p1, k.components());
        let s2 = model.eval_resolved(&p2, k.components());
        let flips = s1
            .iter()
            .zip(s2.iter())
            .any(|(a, b)| a.components()[2] * b.components()[2] < 0.0);
        if v == 0.0 {
            zeros += 1;
        }
        if (v == 0.0) != flips {
            mismatched += 1;
        }
    }
    let fraction = zeros as f64 / grid.len() as f64;
    Ok(SuiteCheck {
        name: "triplet_no_pairing",
        passed: mismatched == 0 && fraction > 0.01,
        details: vec![
            format!("zero-fidelity area fraction: {fraction:.4}"),
            format!("points where F = 0 disagrees with a sign flip of eps -+ Mz: {mismatched}"),
        ],
    })
}

fn check_generic() -> Result<SuiteCheck> {
    let cases = [
        (
            ModelSpec::get(ModelId::TripletUp),
            p(&[("t", 1.0), ("mu", -0.5), ("mz", 0.5), ("delta_t", 0.6)]),
            Momentum::k2(PI, 0.0),
        ),
        (
            ModelSpec::get(ModelId::Kitaev1d),
            p(&[("t", 1.0), ("mu", 0.0), ("delta", 0.0)]),
            Momentum::k1(FRAC_PI_2),
        ),
        (
            ModelSpec::get(ModelId::Haldane),
            p(&[
                ("t1", 1.0),
                ("t2", 0.1),
                ("m", 0.3 * 3f64.sqrt()),
                ("phi", FRAC_PI_2),
            ]),
            Momentum::k2(DIRAC_K[0], DIRAC_K[1]),
        ),
    ];
    let (delta, tol) = (1e-5, 1e-3);
    let mut details = vec![format!(
        "operationalization: some direction d must give F(q_c + d, q_c - d) <= {tol} with |d_i| <= {delta}"
    )];
    let mut passed = true;
    for (i, (model, qc, k)) in cases.iter().enumerate() {
        let w = perturbative_witness(model, qc, k, delta, 64, 11 + i as u64, tol)?;
        details.push(format!(
            "{} at {k}: {}",
            model.name(),
            match &w {
                Some(w) => format!("witness, lambda = {:.6}", w.lambda),
                None => "no witness".into(),
            }
        ));
        passed &= w.is_some();
    }
    Ok(SuiteCheck {
        name: "generic_zeros",
        passed,
        details,
    })
}

/// Runs the four published cases where gapless points and fidelity zeros
/// fail to correspond, plus the randomized search for generic zeros.
pub fn counterexample_suite() -> Result<SuiteReport> {
    Ok(SuiteReport {
        checks: vec![
            check_rot_flat()?,
            check_polar_plane()?,
            check_graphene_theta()?,
            check_triplet_no_pairing()?,
        ],
        generic: check_generic()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(v: &[f64]) -> HVector {
        HVector::new(v).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(
            antipodal_lambda(&h(&[1.0, 0.0, 0.0]), &h(&[-2.0, 0.0, 0.0]), 1e-8).unwrap(),
            2.0
        );
        assert!(matches!(
            antipodal_lambda(&h(&[1.0, 0.0, 0.0]), &h(&[0.0, 1.0, 0.0]), 1e-8),
            Err(Error::NonAntipodal(_))
        ));
        assert!(matches!(
            antipodal_lambda(&h(&[0.0, 0.0, 0.0]), &h(&[0.0, 1.0, 0.0]), 1e-8),
            Err(Error::GaplessInput { .. })
        ));
    }

    #[test]
    fn dirac_point_detection() {
        assert!(is_dirac_point(&DIRAC_K));
        assert!(is_dirac_point(&[
            DIRAC_K_PRIME[0] - 4.0 * PI / 3.0,
            DIRAC_K_PRIME[1]
        ]));
        assert!(!is_dirac_point(&[0.0, 0.0]));
    }
}
