//! Gap maps, gapless points along parameter segments, dispersion exponents
//! at fidelity zeros, and the Chern and strong Z2 invariants.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, GridSpec};
use crate::model::{
    HVector, ModelId, ModelSpec, Momentum, ParamPoint, Resolved, GAPLESS_TOLERANCE,
};

/// Refined local minima are located to this width in `s`.
pub const SEGMENT_S_TOLERANCE: f64 = 1e-10;

/// The eight momenta with every component in `{0, pi}`.
pub const TRI_MOMENTA: [[f64; 3]; 8] = [
    [0.0, 0.0, 0.0],
    [PI, 0.0, 0.0],
    [0.0, PI, 0.0],
    [0.0, 0.0, PI],
    [PI, PI, 0.0],
    [PI, 0.0, PI],
    [0.0, PI, PI],
    [PI, PI, PI],
];

fn min_gap(model: &ModelSpec, p: &Resolved, k: &[f64]) -> f64 {
    model
        .eval_resolved(p, k)
        .iter()
        .map(|h| 2.0 * h.norm())
        .fold(f64::INFINITY, f64::min)
}

/// `2|h|` over a grid; the smallest sector gap for multi-sector models.
pub fn gap_map(model: &ModelSpec, q: &ParamPoint, grid: &GridSpec) -> Result<Grid2D> {
    grid.check_model(model)?;
    let p = model.resolve(q)?;
    let values = grid.evaluate(model.dim_k, |k| min_gap(model, &p, k.components()));
    Grid2D::new(grid, values)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentEvent {
    pub k: Momentum,
    /// Position along the segment, `q(s) = (1 - s) q1 + s q2`.
    pub s: f64,
    pub gap: f64,
    /// Sector whose gap closes (always 0 for single-sector models).
    pub sector: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentReport {
    pub q1: ParamPoint,
    pub q2: ParamPoint,
    pub events: Vec<SegmentEvent>,
    pub tolerance: f64,
}

impl SegmentReport {
    /// Distinct momenta carrying at least one event, in event order.
    pub fn momenta(&self) -> Vec<Momentum> {
        let mut out: Vec<Momentum> = Vec::new();
        for e in &self.events {
            if !out.contains(&e.k) {
                out.push(e.k);
            }
        }
        out
    }
}

/// Shrinks `[lo, hi]` around a minimum of a unimodal `g` by comparing it at
/// the quarter points until the bracket is narrower than `width`.
fn refine_minimum(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    while hi - lo > width {
        let d = 0.125 * (hi - lo);
        let m = 0.5 * (lo + hi);
        if g(m - d) <= g(m + d) {
            hi = m + d;
        } else {
            lo = m - d;
        }
    }
    0.5 * (lo + hi)
}

fn segment_events_at(
    model: &ModelSpec,
    p1: &Resolved,
    p2: &Resolved,
    k: &Momentum,
    n_s: usize,
    tol: f64,
) -> Vec<SegmentEvent> {
    let gap = |s: f64, sector: usize| {
        2.0 * model.eval_resolved(&p1.lerp(p2, s), k.components())[sector].norm()
    };
    let s_at = |i: usize| i as f64 / n_s as f64;
    let mut events: Vec<SegmentEvent> = Vec::new();
    for sector in 0..model.sectors {
        let g: Vec<f64> = (0..=n_s).map(|i| gap(s_at(i), sector)).collect();
        for i in 0..=n_s {
            let left = if i == 0 { f64::INFINITY } else { g[i - 1] };
            let right = if i == n_s { f64::INFINITY } else { g[i + 1] };
            // strict on the left so a flat run yields one candidate
            if !(g[i] < left && g[i] <= right) {
                continue;
            }
            let lo = s_at(i.saturating_sub(1));
            let hi = s_at((i + 1).min(n_s));
            let s = refine_minimum(|s| gap(s, sector), lo, hi, SEGMENT_S_TOLERANCE);
            let (s, value) = [(s, gap(s, sector)), (s_at(i), g[i])].into_iter().fold(
                (s, f64::INFINITY),
                |best, c| if c.1 < best.1 { c } else { best },
            );
            if value <= tol
                && !events
                    .iter()
                    .any(|e| e.sector == sector && (e.s - s).abs() < 1e3 * SEGMENT_S_TOLERANCE)
            {
                events.push(SegmentEvent {
                    k: *k,
                    s,
                    gap: value,
                    sector,
                });
            }
        }
    }
    events.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.sector.cmp(&b.sector)));
    events
}

/// Gapless points on the straight segment from `q1` to `q2`.
///
/// At every grid momentum the gap of each sector is sampled at
/// `s = 0, 1/n_s, ..., 1`; each sampled local minimum is refined inside its
/// neighbouring samples and reported when the refined gap is `<= tol`.
/// Events are ordered by grid position, then `s`.
pub fn gapless_on_segment(
    model: &ModelSpec,
    q1: &ParamPoint,
    q2: &ParamPoint,
    grid: &GridSpec,
    n_s: usize,
    tol: f64,
) -> Result<SegmentReport> {
    if n_s < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_s = {n_s}, need at least 2"
        )));
    }
    grid.check_model(model)?;
    let p1 = model.resolve(q1)?;
    let p2 = model.resolve(q2)?;
    let events = (0..grid.len())
        .into_par_iter()
        .flat_map_iter(|idx| {
            let k = grid.momentum(model.dim_k, idx);
            segment_events_at(model, &p1, &p2, &k, n_s, tol)
        })
        .collect();
    Ok(SegmentReport {
        q1: q1.clone(),
        q2: q2.clone(),
        events,
        tolerance: tol,
    })
}

/// Fit window of [`zero_exponent`]: values above this are outside the
/// scaling regime.
pub const EXPONENT_MAX_VALUE: f64 = 0.5;

/// Power `p` in `F ~ |k - k0|^p` near a zero of a gridded fidelity.
///
/// Least-squares slope of `log F` against `log |k - k0|` over grid points in
/// the annulus from one grid step to `radius`, skipping sentinels, exact
/// zeros and values above [`EXPONENT_MAX_VALUE`].
pub fn zero_exponent(fidelity: &Grid2D, k0: &Momentum, radius: f64) -> Result<f64> {
    let c = k0.components();
    let k0 = [c[0], c.get(1).copied().unwrap_or(0.0)];
    let step = fidelity.step(0).max(fidelity.step(1));
    if step == 0.0 || radius < 4.0 * step {
        return Err(Error::InsufficientPoints(format!(
            "radius {radius} spans fewer than 4 grid steps ({step})"
        )));
    }
    let at = fidelity.values[fidelity.nearest(k0)];
    if Grid2D::is_sentinel(at) || at >= 1e-6 {
        return Err(Error::NotAZero(at));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for iy in 0..fidelity.ny {
        for ix in 0..fidelity.nx {
            let v = fidelity.get(ix, iy);
            if Grid2D::is_sentinel(v) || v <= 0.0 || v > EXPONENT_MAX_VALUE {
                continue;
            }
            let d = fidelity.displacement(ix, iy, k0);
            let r = d[0].hypot(d[1]);
            if r < step * (1.0 - 1e-9) || r > radius {
                continue;
            }
            xs.push(r.ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientPoints(format!(
            "{} usable points in the fit annulus",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientPoints("all points at one radius".into()));
    }
    Ok(sxy / sxx)
}

fn two_band_planar(model: &ModelSpec) -> Result<()> {
    if model.dim_k != 2 || model.dim_h != 3 || model.is_composite() {
        return Err(Error::InvalidArgument(format!(
            "`{}` is not a single two-band model in two dimensions",
            model.name()
        )));
    }
    Ok(())
}

/// Lower-band eigenvector of `n . sigma`, from whichever of two gauges is
/// regular at `n`.
fn lower_state(h: &HVector) -> [(f64, f64); 2] {
    let n = h.unit().expect("gap checked by caller");
    let (nx, ny, nz) = (n[0], n[1], n[2]);
    let (a, b) = if nz <= 0.0 {
        (((1.0 - nz), 0.0), (-nx, -ny))
    } else {
        ((nx, -ny), (-1.0 - nz, 0.0))
    };
    let norm = (a.0 * a.0 + a.1 * a.1 + b.0 * b.0 + b.1 * b.1).sqrt();
    [(a.0 / norm, a.1 / norm), (b.0 / norm, b.1 / norm)]
}

/// `<u|v>` for two-component complex states.
fn overlap(u: &[(f64, f64); 2], v: &[(f64, f64); 2]) -> (f64, f64) {
    let mut re = 0.0;
    let mut im = 0.0;
    for (a, b) in u.iter().zip(v) {
        re += a.0 * b.0 + a.1 * b.1;
        im += a.0 * b.1 - a.1 * b.0;
    }
    (re, im)
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn conj(a: (f64, f64)) -> (f64, f64) {
    (a.0, -a.1)
}

/// Chern number of the lower band by summing the lattice field strength
/// over an `n_grid x n_grid` discretization of the model's period cell.
///
/// Sign convention: the result is `-(1/4 pi) int n . (dx n x dy n)`, the
/// negative of the lower-band curvature integral, so that `ti_toy1` with
/// `t2 > t1p - delta/4` gives `+2`.
pub fn chern_number(model: &ModelSpec, q: &ParamPoint, n_grid: usize) -> Result<i32> {
    two_band_planar(model)?;
    if n_grid < 2 {
        return Err(Error::InvalidArgument(format!("n_grid = {n_grid}")));
    }
    let p = model.resolve(q)?;
    let b = model.lattice.period_vectors();
    let n = n_grid;
    let states: Vec<[(f64, f64); 2]> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = ((idx % n) as f64 / n as f64, (idx / n) as f64 / n as f64);
            let k = [i * b[0][0] + j * b[1][0], i * b[0][1] + j * b[1][1]];
            let h = model.eval_resolved(&p, &k)[0];
            if 2.0 * h.norm() <= 1e-9 {
                Err(Error::GaplessInput { norm: h.norm() })
            } else {
                Ok(lower_state(&h))
            }
        })
        .collect::<Result<_>>()?;
    let at = |i: usize, j: usize| &states[(j % n) * n + (i % n)];
    let flux: f64 = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % n, idx / n);
            let u1 = overlap(at(i, j), at(i + 1, j));
            let u2 = overlap(at(i + 1, j), at(i + 1, j + 1));
            let u3 = overlap(at(i, j + 1), at(i + 1, j + 1));
            let u4 = overlap(at(i, j), at(i, j + 1));
            let w = cmul(cmul(u1, u2), conj(cmul(u3, u4)));
            w.1.atan2(w.0)
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let raw = flux / TAU / model.lattice.zones_per_period_cell() as f64;
    let c = raw.round();
    if (raw - c).abs() > 1e-6 {
        return Err(Error::Numerical(format!(
            "lattice Chern sum {raw} is not an integer"
        )));
    }
    Ok(c as i32)
}

fn require_dirac(model: &ModelSpec) -> Result<()> {
    if model.id != ModelId::Dirac3dTi {
        return Err(Error::InvalidArgument(format!(
            "`{}` is not dirac3d_ti",
            model.name()
        )));
    }
    Ok(())
}

/// Masses at the TRI momenta; at these points every kinetic term carries a
/// `sin(0)` or `sin(pi)` and vanishes identically, leaving `h = (0, 0, 0, m)`.
fn tri_masses(model: &ModelSpec, q: &ParamPoint) -> Result<[f64; 8]> {
    require_dirac(model)?;
    let p = model.resolve(q)?;
    let (m, t) = (p.as_slice()[1], p.as_slice()[2]);
    let mut out = [0.0; 8];
    for (o, k) in out.iter_mut().zip(TRI_MOMENTA.iter()) {
        let mass = m - t * k.iter().map(|c| c.cos()).sum::<f64>();
        if mass.abs() <= GAPLESS_TOLERANCE {
            return Err(Error::CriticalPoint(*k));
        }
        *o = mass;
    }
    Ok(out)
}

/// Strong Z2 index: the product of the mass signs at the TRI momenta.
pub fn z2_strong(model: &ModelSpec, q: &ParamPoint) -> Result<i32> {
    Ok(tri_masses(model, q)?
        .iter()
        .map(|m| if *m > 0.0 { 1 } else { -1 })
        .product())
}

/// `n1 . n2` at every TRI momentum; exactly `+1` or `-1`.
pub fn tri_antipodality(
    model: &ModelSpec,
    q1: &ParamPoint,
    q2: &ParamPoint,
) -> Result<Vec<(Momentum, f64)>> {
    let m1 = tri_masses(model, q1)?;
    let m2 = tri_masses(model, q2)?;
    Ok(TRI_MOMENTA
        .iter()
        .zip(m1.iter().zip(&m2))
        .map(|(k, (a, b))| {
            let inner = (a / a.abs()) * (b / b.abs());
            (Momentum::k3(k[0], k[1], k[2]), inner)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(pairs: &[(&str, f64)]) -> ParamPoint {
        ParamPoint::from_pairs(pairs)
    }

    #[test]
    fn refine_finds_kink() {
        let s = refine_minimum(|s| (s - 0.3141).abs(), 0.2, 0.5, 1e-10);
        assert!((s - 0.3141).abs() < 1e-10);
    }

    #[test]
    fn lower_state_is_eigenvector() {
        for v in [
            [0.3, -0.2, 0.9],
            [0.1, 0.5, -0.8],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ] {
            let h = HVector::new(&v).unwrap();
            let n = h.unit().unwrap();
            let u = lower_state(&h);
            // (n . sigma) u = -u
            let r0 = (
                n[2] * u[0].0 + n[0] * u[1].0 + n[1] * u[1].1,
                n[2] * u[0].1 + n[0] * u[1].1 - n[1] * u[1].0,
            );
            let r1 = (
                n[0] * u[0].0 - n[1] * u[0].1 - n[2] * u[1].0,
                n[0] * u[0].1 + n[1] * u[0].0 - n[2] * u[1].1,
            );
            assert!((r0.0 + u[0].0).abs() < 1e-14 && (r0.1 + u[0].1).abs() < 1e-14);
            assert!((r1.0 + u[1].0).abs() < 1e-14 && (r1.1 + u[1].1).abs() < 1e-14);
        }
    }

    #[test]
    fn z2_examples() {
        let m = ModelSpec::get(ModelId::Dirac3dTi);
        let z = |mass: f64| z2_strong(&m, &q(&[("v", 1.0), ("m", mass), ("t", 1.0)])).unwrap();
        assert_eq!(z(2.0), -1);
        assert_eq!(z(4.0), 1);
        assert_eq!(z(0.5), 1);
        assert!(matches!(
            z2_strong(&m, &q(&[("v", 1.0), ("m", 1.0), ("t", 1.0)])),
            Err(Error::CriticalPoint(_))
        ));
    }

    #[test]
    fn antipodal_tri_points_of_the_mass_pair() {
        let m = ModelSpec::get(ModelId::Dirac3dTi);
        let q1 = q(&[("v", 1.0), ("m", 1.0), ("t", 0.5)]);
        let q2 = q(&[("v", 1.0), ("m", 1.0), ("t", 1.5)]);
        let flipped: Vec<[f64; 3]> = tri_antipodality(&m, &q1, &q2)
            .unwrap()
            .into_iter()
            .filter(|(_, inner)| *inner == -1.0)
            .map(|(k, _)| [k.components()[0], k.components()[1], k.components()[2]])
            .collect();
        assert_eq!(
            flipped,
            vec![[PI, 0.0, 0.0], [0.0, PI, 0.0], [0.0, 0.0, PI]]
        );
        for (_, inner) in tri_antipodality(&m, &q1, &q1).unwrap() {
            assert_eq!(inner, 1.0);
        }
    }
}
