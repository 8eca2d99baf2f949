//! The model zoo: every Hamiltonian family as a pure map `(parameters, k) -> h`.
//!
//! Each model is expanded as `H = h0 * I + sum_mu h_mu * gamma_mu` where the
//! `gamma_mu` are Pauli matrices (`dim_h = 3`) or the 4x4 Clifford generators
//! of the 3D insulator (`dim_h = 4`). Bands are `h0 +- |h|`.
//!
//! Multi-sector models (the decoupled triplet superconductor) return one
//! h-vector per sector; their many-body fidelity is the product over sectors.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Norms at or below this are treated as band touchings.
pub const GAPLESS_TOLERANCE: f64 = 1e-12;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Nearest-neighbour vectors of the honeycomb lattice (bond length 1).
pub const HONEYCOMB_A: [[f64; 2]; 3] = [[1.0, 0.0], [-0.5, SQRT3 / 2.0], [-0.5, -SQRT3 / 2.0]];

/// Next-nearest-neighbour vectors `b1 = a2 - a3`, `b2 = a3 - a1`, `b3 = a1 - a2`.
pub const HONEYCOMB_B: [[f64; 2]; 3] = [[0.0, SQRT3], [-1.5, -SQRT3 / 2.0], [1.5, -SQRT3 / 2.0]];

/// Dirac point `K = (2 pi / 3)(1, 1/sqrt 3)`.
pub const DIRAC_K: [f64; 2] = [TAU / 3.0, TAU / (3.0 * SQRT3)];
/// Dirac point `K' = (2 pi / 3)(1, -1/sqrt 3)`.
pub const DIRAC_K_PRIME: [f64; 2] = [TAU / 3.0, -TAU / (3.0 * SQRT3)];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Momentum {
    comps: [f64; 3],
    dim: usize,
}

impl Momentum {
    pub fn new(components: &[f64]) -> Result<Self> {
        let dim = components.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidMomentum(format!(
                "dimension {dim} not in 1..=3"
            )));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMomentum(format!(
                "non-finite component in {components:?}"
            )));
        }
        let mut comps = [0.0; 3];
        comps[..dim].copy_from_slice(components);
        Ok(Momentum { comps, dim })
    }

    pub fn k1(k: f64) -> Self {
        Momentum {
            comps: [k, 0.0, 0.0],
            dim: 1,
        }
    }

    pub fn k2(kx: f64, ky: f64) -> Self {
        Momentum {
            comps: [kx, ky, 0.0],
            dim: 2,
        }
    }

    pub fn k3(kx: f64, ky: f64, kz: f64) -> Self {
        Momentum {
            comps: [kx, ky, kz],
            dim: 3,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.comps[..self.dim]
    }
}

impl fmt::Display for Momentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:.6}")?;
        }
        write!(f, ")")
    }
}

/// Real coefficient vector of a Pauli/Clifford-expanded Bloch Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HVector {
    h: [f64; 4],
    dim: usize,
    /// Coefficient of the identity. It shifts both bands and cancels in
    /// every Gibbs state, so fidelity kernels ignore it.
    pub h0: f64,
}

impl HVector {
    pub fn new(components: &[f64]) -> Result<Self> {
        Self::with_identity(components, 0.0)
    }

    pub fn with_identity(components: &[f64], h0: f64) -> Result<Self> {
        let dim = components.len();
        if !(2..=4).contains(&dim) {
            return Err(Error::VectorDimension {
                expected: "2, 3 or 4",
                got: dim,
            });
        }
        if components.iter().any(|c| !c.is_finite()) || !h0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite h-vector {components:?}, h0 = {h0}"
            )));
        }
        let mut h = [0.0; 4];
        h[..dim].copy_from_slice(components);
        Ok(HVector { h, dim, h0 })
    }

    pub(crate) const fn three(x: f64, y: f64, z: f64) -> Self {
        HVector {
            h: [x, y, z, 0.0],
            dim: 3,
            h0: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.h[..self.dim]
    }

    pub fn norm(&self) -> f64 {
        self.h.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &HVector) -> f64 {
        self.h.iter().zip(other.h.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn is_gapless(&self) -> bool {
        self.norm() <= GAPLESS_TOLERANCE
    }

    /// Unit vector padded to four components, `None` at a band touching.
    pub fn unit(&self) -> Option<[f64; 4]> {
        let n = self.norm();
        if n <= GAPLESS_TOLERANCE {
            return None;
        }
        Some(self.h.map(|x| x / n))
    }

    /// Same vector embedded in a larger Clifford dimension with zero padding.
    pub fn padded(&self, dim: usize) -> Result<HVector> {
        if dim < self.dim || dim > 4 {
            return Err(Error::VectorDimension {
                expected: "at least the current dimension and at most 4",
                got: dim,
            });
        }
        Ok(HVector { dim, ..*self })
    }

    pub fn scaled(&self, c: f64) -> HVector {
        HVector {
            h: self.h.map(|x| c * x),
            dim: self.dim,
            h0: c * self.h0,
        }
    }

    /// `a * self + b * other` on the Clifford part and the identity part.
    pub fn combine(&self, a: f64, other: &HVector, b: f64) -> HVector {
        let mut h = [0.0; 4];
        for (i, v) in h.iter_mut().enumerate() {
            *v = a * self.h[i] + b * other.h[i];
        }
        HVector {
            h,
            dim: self.dim.max(other.dim),
            h0: a * self.h0 + b * other.h0,
        }
    }
}

/// Named parameter values of one point in a model's parameter space.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamPoint {
    values: BTreeMap<String, f64>,
}

impl ParamPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Self {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Componentwise `(1 - s) * self + s * other`; both must share keys.
    pub fn lerp(&self, other: &ParamPoint, s: f64) -> Result<ParamPoint> {
        self.zip_with(other, |a, b| (1.0 - s) * a + s * b)
    }

    fn zip_with(&self, other: &ParamPoint, f: impl Fn(f64, f64) -> f64) -> Result<ParamPoint> {
        if self.values.len() != other.values.len()
            || self
                .values
                .keys()
                .zip(other.values.keys())
                .any(|(a, b)| a != b)
        {
            return Err(Error::SchemaMismatch {
                model: "<pair>".into(),
                detail: "parameter points have different keys".into(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.values())
            .map(|((k, a), b)| (k.clone(), f(*a, *b)))
            .collect())
    }
}

impl FromIterator<(String, f64)> for ParamPoint {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        ParamPoint {
            values: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for ParamPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    TripletUp,
    TripletDown,
    TripletProduct,
    TiToy1,
    TiToy2,
    Kitaev1d,
    Haldane,
    Bcs2d,
    IsingTf,
    GrapheneMassUniform,
    GrapheneMassHaldane,
    GrapheneTheta,
    Dirac3dTi,
    RotFlat,
    PolarPlane,
}

impl ModelId {
    pub const ALL: [ModelId; 15] = [
        ModelId::TripletUp,
        ModelId::TripletDown,
        ModelId::TripletProduct,
        ModelId::TiToy1,
        ModelId::TiToy2,
        ModelId::Kitaev1d,
        ModelId::Haldane,
        ModelId::Bcs2d,
        ModelId::IsingTf,
        ModelId::GrapheneMassUniform,
        ModelId::GrapheneMassHaldane,
        ModelId::GrapheneTheta,
        ModelId::Dirac3dTi,
        ModelId::RotFlat,
        ModelId::PolarPlane,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::TripletUp => "triplet_up",
            ModelId::TripletDown => "triplet_down",
            ModelId::TripletProduct => "triplet_product",
            ModelId::TiToy1 => "ti_toy1",
            ModelId::TiToy2 => "ti_toy2",
            ModelId::Kitaev1d => "kitaev1d",
            ModelId::Haldane => "haldane",
            ModelId::Bcs2d => "bcs2d",
            ModelId::IsingTf => "ising_tf",
            ModelId::GrapheneMassUniform => "graphene_mass_uniform",
            ModelId::GrapheneMassHaldane => "graphene_mass_haldane",
            ModelId::GrapheneTheta => "graphene_theta",
            ModelId::Dirac3dTi => "dirac3d_ti",
            ModelId::RotFlat => "rot_flat",
            ModelId::PolarPlane => "polar_plane",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Lattice geometry of a model: its componentwise period vectors and the
/// default scan window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lattice {
    Chain,
    Square,
    Cubic,
    /// Honeycomb written with nearest-neighbour phases `exp(i k . a_i)`.
    /// h is periodic only under the lattice dual to the bond vectors, whose
    /// cell holds three Brillouin zones.
    HoneycombBond,
    /// Honeycomb written with Bravais phases; periodic on one Brillouin zone.
    HoneycombBravais,
}

impl Lattice {
    /// Primitive vectors of the lattice under which h is componentwise
    /// periodic (one per spatial dimension).
    pub fn period_vectors(self) -> Vec<[f64; 3]> {
        match self {
            Lattice::Chain => vec![[TAU, 0.0, 0.0]],
            Lattice::Square => vec![[TAU, 0.0, 0.0], [0.0, TAU, 0.0]],
            Lattice::Cubic => vec![[TAU, 0.0, 0.0], [0.0, TAU, 0.0], [0.0, 0.0, TAU]],
            Lattice::HoneycombBond => vec![[TAU, TAU / SQRT3, 0.0], [0.0, 2.0 * TAU / SQRT3, 0.0]],
            Lattice::HoneycombBravais => {
                vec![[2.0 * TAU / 3.0, 0.0, 0.0], [-TAU / 3.0, TAU / SQRT3, 0.0]]
            }
        }
    }

    /// Number of Brillouin zones in the cell spanned by `period_vectors`.
    pub fn zones_per_period_cell(self) -> u32 {
        match self {
            Lattice::HoneycombBond => 3,
            _ => 1,
        }
    }

    /// Default scan window per axis. Square lattices use `[-pi, pi]`; the
    /// honeycomb window is `kx in 4/3 [-pi, pi]`, `ky in 2/sqrt3 [-pi, pi]`,
    /// a rectangle tiled by whole periods of every honeycomb model here.
    pub fn scan_bounds(self) -> Vec<[f64; 2]> {
        match self {
            Lattice::Chain => vec![[-PI, PI]],
            Lattice::Square => vec![[-PI, PI], [-PI, PI]],
            Lattice::Cubic => vec![[-PI, PI], [-PI, PI], [-PI, PI]],
            Lattice::HoneycombBond | Lattice::HoneycombBravais => vec![
                [-4.0 * PI / 3.0, 4.0 * PI / 3.0],
                [-2.0 * PI / SQRT3, 2.0 * PI / SQRT3],
            ],
        }
    }
}

/// Up to two h-vectors evaluated at one `(q, k)`.
#[derive(Clone, Copy, Debug)]
pub struct Sectors {
    items: [HVector; 2],
    len: usize,
}

impl Sectors {
    fn one(h: HVector) -> Self {
        Sectors {
            items: [h, h],
            len: 1,
        }
    }

    fn two(a: HVector, b: HVector) -> Self {
        Sectors {
            items: [a, b],
            len: 2,
        }
    }
}

impl Deref for Sectors {
    type Target = [HVector];

    fn deref(&self) -> &[HVector] {
        &self.items[..self.len]
    }
}

/// Parameters resolved into schema order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolved {
    vals: [f64; 5],
    len: usize,
}

impl Resolved {
    pub fn as_slice(&self) -> &[f64] {
        &self.vals[..self.len]
    }

    pub fn lerp(&self, other: &Resolved, s: f64) -> Resolved {
        let mut out = *self;
        for i in 0..self.len {
            out.vals[i] = (1.0 - s) * self.vals[i] + s * other.vals[i];
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelSpec {
    pub id: ModelId,
    pub dim_k: usize,
    pub dim_h: usize,
    /// Parameter names in canonical order.
    pub schema: &'static [&'static str],
    /// Parameters in which h is jointly homogeneous linear, others held fixed.
    pub linear_in: &'static [&'static str],
    pub sectors: usize,
    pub lattice: Lattice,
    pub summary: &'static str,
}

const CATALOG: [ModelSpec; 15] = [
    ModelSpec {
        id: ModelId::TripletUp,
        dim_k: 2,
        dim_h: 3,
        schema: &["t", "mu", "mz", "delta_t"],
        linear_in: &["t", "mu", "mz", "delta_t"],
        sectors: 1,
        lattice: Lattice::Square,
        summary: "triplet superconductor, spin-up block: (-D sin ky, D sin kx, eps - Mz)",
    },
    ModelSpec {
        id: ModelId::TripletDown,
        dim_k: 2,
        dim_h: 3,
        schema: &["t", "mu", "mz", "delta_t"],
        linear_in: &["t", "mu", "mz", "delta_t"],
        sectors: 1,
        lattice: Lattice::Square,
        summary: "triplet superconductor, spin-down block: (D sin ky, D sin kx, eps + Mz)",
    },
    ModelSpec {
        id: ModelId::TripletProduct,
        dim_k: 2,
        dim_h: 3,
        schema: &["t", "mu", "mz", "delta_t"],
        linear_in: &["t", "mu", "mz", "delta_t"],
        sectors: 2,
        lattice: Lattice::Square,
        summary: "triplet superconductor, both spin blocks; fidelity is the sector product",
    },
    ModelSpec {
        id: ModelId::TiToy1,
        dim_k: 2,
        dim_h: 3,
        schema: &["tx1", "ty1", "t2", "t1p", "delta"],
        linear_in: &["tx1", "ty1", "t2", "t1p", "delta"],
        sectors: 1,
        lattice: Lattice::Square,
        summary: "two-band Chern insulator with C = 2 / C = 1 phases",
    },
    ModelSpec {
        id: ModelId::TiToy2,
        dim_k: 2,
        dim_h: 3,
        schema: &["t2"],
        linear_in: &[],
        sectors: 1,
        lattice: Lattice::Square,
        summary: "two-band Chern insulator with C = +-2 set by sgn t2",
    },
    ModelSpec {
        id: ModelId::Kitaev1d,
        dim_k: 1,
        dim_h: 3,
        schema: &["t", "mu", "delta"],
        linear_in: &["t", "mu", "delta"],
        sectors: 1,
        lattice: Lattice::Chain,
        summary: "1d Kitaev chain: (0, 2 D sin k, -2t cos k - mu)",
    },
    ModelSpec {
        id: ModelId::Haldane,
        dim_k: 2,
        dim_h: 3,
        schema: &["t1", "t2", "m", "phi"],
        linear_in: &["t1", "t2", "m"],
        sectors: 1,
        lattice: Lattice::HoneycombBond,
        summary: "Haldane Chern insulator on the honeycomb lattice",
    },
    ModelSpec {
        id: ModelId::Bcs2d,
        dim_k: 2,
        dim_h: 3,
        schema: &["t", "mu", "delta"],
        linear_in: &["t", "mu", "delta"],
        sectors: 1,
        lattice: Lattice::Square,
        summary: "s-wave BCS superconductor in Nambu form: (D, 0, eps)",
    },
    ModelSpec {
        id: ModelId::IsingTf,
        dim_k: 1,
        dim_h: 3,
        schema: &["h"],
        linear_in: &[],
        sectors: 1,
        lattice: Lattice::Chain,
        summary: "transverse-field Ising chain: (sin k, 0, cos k - h)",
    },
    ModelSpec {
        id: ModelId::GrapheneMassUniform,
        dim_k: 2,
        dim_h: 3,
        schema: &["m"],
        linear_in: &[],
        sectors: 1,
        lattice: Lattice::HoneycombBravais,
        summary: "graphene with a uniform mass h_z = m",
    },
    ModelSpec {
        id: ModelId::GrapheneMassHaldane,
        dim_k: 2,
        dim_h: 3,
        schema: &["m"],
        linear_in: &[],
        sectors: 1,
        lattice: Lattice::HoneycombBravais,
        summary: "graphene with a mass of opposite sign at K and K'",
    },
    ModelSpec {
        id: ModelId::GrapheneTheta,
        dim_k: 2,
        dim_h: 3,
        schema: &["t0", "theta"],
        linear_in: &["t0"],
        sectors: 1,
        lattice: Lattice::HoneycombBond,
        summary: "graphene interpolated to a pure mass: t = t0 cos theta, m = t0 sin theta",
    },
    ModelSpec {
        id: ModelId::Dirac3dTi,
        dim_k: 3,
        dim_h: 4,
        schema: &["v", "m", "t"],
        linear_in: &["v", "m", "t"],
        sectors: 1,
        lattice: Lattice::Cubic,
        summary: "3D topological insulator: (v sin k, M - t sum cos k)",
    },
    ModelSpec {
        id: ModelId::RotFlat,
        dim_k: 2,
        dim_h: 3,
        schema: &["phi"],
        linear_in: &[],
        sectors: 1,
        lattice: Lattice::Square,
        summary: "flat bands, h = (cos phi, sin phi, 0)",
    },
    ModelSpec {
        id: ModelId::PolarPlane,
        dim_k: 2,
        dim_h: 3,
        schema: &["rho", "phi"],
        linear_in: &["rho"],
        sectors: 1,
        lattice: Lattice::Square,
        summary: "flat bands, h = (rho cos phi, rho sin phi, 0)",
    },
];

/// Every model, in a fixed order.
pub fn catalog() -> Vec<ModelSpec> {
    CATALOG.to_vec()
}

impl ModelSpec {
    pub fn get(id: ModelId) -> ModelSpec {
        CATALOG
            .iter()
            .copied()
            .find(|m| m.id == id)
            .expect("catalog covers every model id")
    }

    pub fn lookup(name: &str) -> Result<ModelSpec> {
        Ok(Self::get(name.parse()?))
    }

    pub fn name(&self) -> &'static str {
        self.id.name()
    }

    pub fn is_composite(&self) -> bool {
        self.sectors > 1
    }

    pub fn is_linear_in(&self, param: &str) -> bool {
        self.linear_in.contains(&param)
    }

    fn mismatch(&self, detail: String) -> Error {
        Error::SchemaMismatch {
            model: self.name().to_string(),
            detail,
        }
    }

    /// Checks that `q` holds exactly this model's parameters and orders them.
    pub fn resolve(&self, q: &ParamPoint) -> Result<Resolved> {
        for (k, _) in q.iter() {
            if !self.schema.contains(&k) {
                return Err(self.mismatch(format!("unknown parameter `{k}`")));
            }
        }
        let mut vals = [0.0; 5];
        for (i, name) in self.schema.iter().enumerate() {
            let v = q
                .get(name)
                .ok_or_else(|| self.mismatch(format!("missing parameter `{name}`")))?;
            if !v.is_finite() {
                return Err(self.mismatch(format!("parameter `{name}` is not finite")));
            }
            vals[i] = v;
        }
        Ok(Resolved {
            vals,
            len: self.schema.len(),
        })
    }

    pub fn check_momentum(&self, k: &Momentum) -> Result<()> {
        if k.dim() != self.dim_k {
            return Err(Error::MomentumDimension {
                expected: self.dim_k,
                got: k.dim(),
            });
        }
        Ok(())
    }

    /// Evaluates every sector at resolved parameters; no validation.
    pub fn eval_resolved(&self, p: &Resolved, k: &[f64]) -> Sectors {
        let p = p.as_slice();
        match self.id {
            ModelId::TripletUp => Sectors::one(triplet(p, k, true)),
            ModelId::TripletDown => Sectors::one(triplet(p, k, false)),
            ModelId::TripletProduct => Sectors::two(triplet(p, k, true), triplet(p, k, false)),
            ModelId::TiToy1 => {
                let (sx, cx) = k[0].sin_cos();
                let (sy, cy) = k[1].sin_cos();
                let (tx1, ty1, t2, t1p, delta) = (p[0], p[1], p[2], p[3], p[4]);
                Sectors::one(HVector::three(
                    std::f64::consts::SQRT_2 * tx1 * (cx + cy),
                    std::f64::consts::SQRT_2 * ty1 * (cx - cy),
                    4.0 * t2 * sx * sy + 2.0 * t1p * (sx + sy) + delta,
                ))
            }
            ModelId::TiToy2 => {
                let (sx, cx) = k[0].sin_cos();
                let (sy, cy) = k[1].sin_cos();
                Sectors::one(HVector::three(cx + cy, cx - cy, p[0] * sx * sy))
            }
            ModelId::Kitaev1d => {
                let (s, c) = k[0].sin_cos();
                let (t, mu, delta) = (p[0], p[1], p[2]);
                Sectors::one(HVector::three(0.0, 2.0 * delta * s, -2.0 * t * c - mu))
            }
            ModelId::Haldane => Sectors::one(haldane(p, k)),
            ModelId::Bcs2d => {
                let (t, mu, delta) = (p[0], p[1], p[2]);
                let eps = -2.0 * t * (k[0].cos() + k[1].cos()) - mu;
                Sectors::one(HVector::three(delta, 0.0, eps))
            }
            ModelId::IsingTf => {
                let (s, c) = k[0].sin_cos();
                Sectors::one(HVector::three(s, 0.0, c - p[0]))
            }
            ModelId::GrapheneMassUniform => {
                let (hx, hy) = graphene_bravais_xy(k);
                Sectors::one(HVector::three(hx, hy, p[0]))
            }
            ModelId::GrapheneMassHaldane => {
                let (hx, hy) = graphene_bravais_xy(k);
                let y = SQRT3 / 2.0 * k[1];
                let hz = 4.0 * p[0] * y.sin() * ((1.5 * k[0]).cos() - y.cos());
                Sectors::one(HVector::three(hx, hy, hz))
            }
            ModelId::GrapheneTheta => {
                let (t0, theta) = (p[0], p[1]);
                let (re, im) = bond_sum(k);
                let (st, ct) = theta.sin_cos();
                Sectors::one(HVector::three(t0 * ct * re, -t0 * ct * im, t0 * st))
            }
            ModelId::Dirac3dTi => {
                let (v, m, t) = (p[0], p[1], p[2]);
                let mass = m - t * (k[0].cos() + k[1].cos() + k[2].cos());
                Sectors::one(HVector {
                    h: [v * k[0].sin(), v * k[1].sin(), v * k[2].sin(), mass],
                    dim: 4,
                    h0: 0.0,
                })
            }
            ModelId::RotFlat => {
                let (s, c) = p[0].sin_cos();
                Sectors::one(HVector::three(c, s, 0.0))
            }
            ModelId::PolarPlane => {
                let (s, c) = p[1].sin_cos();
                Sectors::one(HVector::three(p[0] * c, p[0] * s, 0.0))
            }
        }
    }

    /// All sectors at `(q, k)` with full validation.
    pub fn eval_sectors(&self, q: &ParamPoint, k: &Momentum) -> Result<Sectors> {
        self.check_momentum(k)?;
        let p = self.resolve(q)?;
        Ok(self.eval_resolved(&p, k.components()))
    }

    /// Componentwise `a * q1 + b * q2` over `linear_in`; every other
    /// parameter must agree between `q1` and `q2` and is carried over.
    pub fn linear_combination(
        &self,
        a: f64,
        q1: &ParamPoint,
        b: f64,
        q2: &ParamPoint,
    ) -> Result<ParamPoint> {
        let p1 = self.resolve(q1)?;
        let p2 = self.resolve(q2)?;
        let mut out = ParamPoint::new();
        let mut nonlinear = Vec::new();
        for (i, name) in self.schema.iter().enumerate() {
            let (x, y) = (p1.as_slice()[i], p2.as_slice()[i]);
            if self.is_linear_in(name) {
                out.set(name, a * x + b * y);
            } else {
                if x != y {
                    nonlinear.push(name.to_string());
                }
                out.set(name, x);
            }
        }
        if !nonlinear.is_empty() {
            return Err(Error::LinearityNotDeclared {
                model: self.name().to_string(),
                params: nonlinear,
            });
        }
        Ok(out)
    }
}

/// Looks up `model` and evaluates its single h-vector at `(q, k)`.
pub fn eval_h(model: &str, q: &ParamPoint, k: &Momentum) -> Result<HVector> {
    let spec = ModelSpec::lookup(model)?;
    if spec.is_composite() {
        return Err(Error::CompositeModel(spec.name().to_string()));
    }
    Ok(spec.eval_sectors(q, k)?[0])
}

/// `(h0 - |h|, h0 + |h|)`.
pub fn band_energies(model: &str, q: &ParamPoint, k: &Momentum) -> Result<(f64, f64)> {
    let h = eval_h(model, q, k)?;
    let n = h.norm();
    Ok((h.h0 - n, h.h0 + n))
}

fn triplet(p: &[f64], k: &[f64], up: bool) -> HVector {
    let (t, mu, mz, dt) = (p[0], p[1], p[2], p[3]);
    let (sx, cx) = k[0].sin_cos();
    let (sy, cy) = k[1].sin_cos();
    let eps = -2.0 * t * (cx + cy) - mu;
    if up {
        HVector::three(-dt * sy, dt * sx, eps - mz)
    } else {
        HVector::three(dt * sy, dt * sx, eps + mz)
    }
}

/// `sum_i exp(i k . a_i)` over the nearest-neighbour vectors.
fn bond_sum(k: &[f64]) -> (f64, f64) {
    HONEYCOMB_A.iter().fold((0.0, 0.0), |(re, im), a| {
        let (s, c) = (k[0] * a[0] + k[1] * a[1]).sin_cos();
        (re + c, im + s)
    })
}

fn haldane(p: &[f64], k: &[f64]) -> HVector {
    let (t1, t2, m, phi) = (p[0], p[1], p[2], p[3]);
    let (re, im) = bond_sum(k);
    let (mut cb, mut sb) = (0.0, 0.0);
    for b in &HONEYCOMB_B {
        let (s, c) = (k[0] * b[0] + k[1] * b[1]).sin_cos();
        cb += c;
        sb += s;
    }
    let (sphi, cphi) = phi.sin_cos();
    HVector {
        h: [t1 * re, t1 * im, m - 2.0 * t2 * sphi * sb, 0.0],
        dim: 3,
        h0: 2.0 * t2 * cphi * cb,
    }
}

/// In-plane components of graphene in the Bravais-phase form
/// `1 + exp(i sqrt3 ky) + exp(i (3/2 kx + sqrt3/2 ky))`.
fn graphene_bravais_xy(k: &[f64]) -> (f64, f64) {
    let y = SQRT3 / 2.0 * k[1];
    let x = 1.5 * k[0];
    let (sy2, cy2) = (SQRT3 * k[1]).sin_cos();
    let (sy, cy) = y.sin_cos();
    let (sx, cx) = x.sin_cos();
    (1.0 + cy2 + cy * cx - sy * sx, sy2 + sy * cx + cy * sx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(pairs: &[(&str, f64)]) -> ParamPoint {
        ParamPoint::from_pairs(pairs)
    }

    #[test]
    fn triplet_gap_closes_at_origin() {
        let h = eval_h(
            "triplet_up",
            &q(&[("t", 1.0), ("mu", -4.0), ("mz", 0.0), ("delta_t", 0.6)]),
            &Momentum::k2(0.0, 0.0),
        )
        .unwrap();
        assert!(h.norm() < 1e-15);
    }

    #[test]
    fn kitaev_at_quarter_zone() {
        let h = eval_h(
            "kitaev1d",
            &q(&[("t", 1.0), ("mu", 0.0), ("delta", 1.0)]),
            &Momentum::k1(PI / 2.0),
        )
        .unwrap();
        let c = h.components();
        assert_eq!(c[0], 0.0);
        assert!((c[1] - 2.0).abs() < 1e-15);
        assert!(c[2].abs() < 1e-15);
        let (lo, hi) = band_energies(
            "kitaev1d",
            &q(&[("t", 1.0), ("mu", 0.0), ("delta", 1.0)]),
            &Momentum::k1(PI / 2.0),
        )
        .unwrap();
        assert!((lo + 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dirac_mass_at_zone_face() {
        let h = eval_h(
            "dirac3d_ti",
            &q(&[("v", 1.0), ("m", 1.0), ("t", 1.5)]),
            &Momentum::k3(0.0, 0.0, PI),
        )
        .unwrap();
        let c = h.components();
        assert_eq!(c.len(), 4);
        assert!(c[0].abs() < 1e-15 && c[1].abs() < 1e-15 && c[2].abs() < 1e-15);
        assert!((c[3] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn flat_bands_are_plus_minus_one() {
        for kx in [-3.0, 0.0, 1.7] {
            let (lo, hi) =
                band_energies("rot_flat", &q(&[("phi", 0.3)]), &Momentum::k2(kx, 0.4)).unwrap();
            assert!((lo + 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn catalog_is_self_describing() {
        let cat = catalog();
        let kit = cat.iter().find(|m| m.name() == "kitaev1d").unwrap();
        assert_eq!((kit.dim_k, kit.dim_h), (1, 3));
        let ti = cat.iter().find(|m| m.name() == "dirac3d_ti").unwrap();
        assert_eq!(ti.dim_h, 4);
        assert_eq!(cat, catalog());
        for m in &cat {
            assert_eq!(ModelSpec::lookup(m.name()).unwrap(), *m);
            for p in m.linear_in {
                assert!(m.schema.contains(p));
            }
        }
    }

    #[test]
    fn schema_and_dimension_errors() {
        assert!(matches!(
            eval_h("nope", &ParamPoint::new(), &Momentum::k1(0.0)),
            Err(Error::UnknownModel(_))
        ));
        assert!(matches!(
            eval_h(
                "kitaev1d",
                &q(&[("t", 1.0), ("mu", 0.0)]),
                &Momentum::k1(0.0)
            ),
            Err(Error::SchemaMismatch { .. })
        ));
        assert!(matches!(
            eval_h(
                "kitaev1d",
                &q(&[("t", 1.0), ("mu", 0.0), ("delta", 1.0), ("x", 2.0)]),
                &Momentum::k1(0.0)
            ),
            Err(Error::SchemaMismatch { .. })
        ));
        assert!(matches!(
            eval_h(
                "kitaev1d",
                &q(&[("t", 1.0), ("mu", 0.0), ("delta", 1.0)]),
                &Momentum::k2(0.0, 0.0)
            ),
            Err(Error::MomentumDimension { .. })
        ));
        assert!(matches!(
            eval_h(
                "triplet_product",
                &q(&[("t", 1.0), ("mu", 0.0), ("mz", 0.0), ("delta_t", 1.0)]),
                &Momentum::k2(0.0, 0.0)
            ),
            Err(Error::CompositeModel(_))
        ));
    }

    #[test]
    fn honeycomb_dirac_points_are_gapless() {
        for k in [DIRAC_K, DIRAC_K_PRIME] {
            let m = Momentum::k2(k[0], k[1]);
            let g = eval_h("graphene_mass_uniform", &q(&[("m", 0.0)]), &m).unwrap();
            assert!(g.norm() < 1e-14);
            let t = eval_h("graphene_theta", &q(&[("t0", 1.0), ("theta", 0.0)]), &m).unwrap();
            assert!(t.norm() < 1e-14);
        }
        // opposite masses at the two cones
        let hk = eval_h(
            "graphene_mass_haldane",
            &q(&[("m", 0.5)]),
            &Momentum::k2(DIRAC_K[0], DIRAC_K[1]),
        )
        .unwrap();
        let hkp = eval_h(
            "graphene_mass_haldane",
            &q(&[("m", 0.5)]),
            &Momentum::k2(DIRAC_K_PRIME[0], DIRAC_K_PRIME[1]),
        )
        .unwrap();
        assert!((hk.components()[2] + hkp.components()[2]).abs() < 1e-12);
        assert!((hk.components()[2].abs() - 1.5 * SQRT3).abs() < 1e-12);
    }

    #[test]
    fn haldane_masses_at_dirac_points() {
        let (t2, m, phi): (f64, f64, f64) = (0.25, 0.1, 0.7);
        let p = q(&[("t1", 1.0), ("t2", t2), ("m", m), ("phi", phi)]);
        let at = |k: [f64; 2]| {
            eval_h("haldane", &p, &Momentum::k2(k[0], k[1]))
                .unwrap()
                .components()[2]
        };
        let s = 3.0 * SQRT3 * t2 * phi.sin();
        assert!((at(DIRAC_K) - (m - s)).abs() < 1e-12);
        assert!((at(DIRAC_K_PRIME) - (m + s)).abs() < 1e-12);
    }
}
