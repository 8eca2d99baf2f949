//! Momentum grids and gridded values.
//!
//! Grids are endpoint-inclusive: axis `i` of `n` points sits at
//! `lo + i (hi - lo) / (n - 1)`, so high-symmetry momenta such as `0`,
//! `pi/2` and `pi` are sampled exactly by the default 201-point axes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ModelSpec, Momentum};

/// Value stored where the bands touch and the fidelity is undefined.
pub const GAPLESS_SENTINEL: f64 = -1.0;

pub const DEFAULT_GRID: usize = 201;

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub bounds: [[f64; 2]; 2],
    /// kz of the plane sampled for 3D models.
    pub kz: f64,
    /// True when the window is tiled by whole periods of the model.
    pub periodic: bool,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, bounds: [[f64; 2]; 2]) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidGrid(format!("empty grid {nx}x{ny}")));
        }
        for b in &bounds {
            if !(b[0].is_finite() && b[1].is_finite()) || b[1] < b[0] {
                return Err(Error::InvalidGrid(format!("bad bounds {bounds:?}")));
            }
        }
        Ok(GridSpec {
            nx,
            ny,
            bounds,
            kz: 0.0,
            periodic: false,
        })
    }

    /// The model's default scan window; 1D models get `ny = 1`.
    pub fn for_model(model: &ModelSpec, nx: usize, ny: usize) -> Result<Self> {
        let b = model.lattice.scan_bounds();
        let (ny, bounds) = if model.dim_k == 1 {
            (1, [b[0], [0.0, 0.0]])
        } else {
            (ny, [b[0], b[1]])
        };
        let mut g = GridSpec::new(nx, ny, bounds)?;
        g.periodic = true;
        Ok(g)
    }

    pub fn with_kz(mut self, kz: f64) -> Self {
        self.kz = kz;
        self
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        axis_coord(
            self.bounds[axis],
            if axis == 0 { self.nx } else { self.ny },
            i,
        )
    }

    /// Momentum of flat index `idx` (kx fastest) for a model with `dim_k`.
    pub fn momentum(&self, dim_k: usize, idx: usize) -> Momentum {
        let kx = self.coord(0, idx % self.nx);
        let ky = self.coord(1, idx / self.nx);
        match dim_k {
            1 => Momentum::k1(kx),
            2 => Momentum::k2(kx, ky),
            _ => Momentum::k3(kx, ky, self.kz),
        }
    }

    /// Evaluates `f` at every grid momentum in parallel; the output is in
    /// row-major (kx fastest) order whatever the schedule.
    pub fn evaluate<F>(&self, dim_k: usize, f: F) -> Vec<f64>
    where
        F: Fn(&Momentum) -> f64 + Sync,
    {
        (0..self.len())
            .into_par_iter()
            .map(|idx| f(&self.momentum(dim_k, idx)))
            .collect()
    }

    pub fn check_model(&self, model: &ModelSpec) -> Result<()> {
        if model.dim_k == 1 && self.ny != 1 {
            return Err(Error::InvalidGrid(format!(
                "1D model `{}` needs ny = 1, got {}",
                model.name(),
                self.ny
            )));
        }
        Ok(())
    }
}

fn axis_coord(b: [f64; 2], n: usize, i: usize) -> f64 {
    let v = if n <= 1 {
        b[0]
    } else if i + 1 == n {
        b[1]
    } else {
        b[0] + (b[1] - b[0]) * i as f64 / (n - 1) as f64
    };
    // keep -0.0 out of emitted coordinates
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// Row-major values over a [`GridSpec`] window.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub bounds: [[f64; 2]; 2],
    pub periodic: bool,
    pub values: Vec<f64>,
}

impl Grid2D {
    pub fn new(spec: &GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {}x{} grid",
                values.len(),
                spec.nx,
                spec.ny
            )));
        }
        Ok(Grid2D {
            nx: spec.nx,
            ny: spec.ny,
            bounds: spec.bounds,
            periodic: spec.periodic,
            values,
        })
    }

    pub fn from_fn(spec: &GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..spec.len())
            .map(|idx| f(spec.coord(0, idx % spec.nx), spec.coord(1, idx / spec.nx)))
            .collect();
        Grid2D {
            nx: spec.nx,
            ny: spec.ny,
            bounds: spec.bounds,
            periodic: spec.periodic,
            values,
        }
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        axis_coord(
            self.bounds[axis],
            if axis == 0 { self.nx } else { self.ny },
            i,
        )
    }

    pub fn step(&self, axis: usize) -> f64 {
        let n = if axis == 0 { self.nx } else { self.ny };
        if n <= 1 {
            0.0
        } else {
            (self.bounds[axis][1] - self.bounds[axis][0]) / (n - 1) as f64
        }
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    pub fn is_sentinel(v: f64) -> bool {
        v == GAPLESS_SENTINEL
    }

    /// Values that are not the gapless sentinel.
    pub fn defined(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, v)| !Self::is_sentinel(*v))
    }

    pub fn min_defined(&self) -> Option<(usize, f64)> {
        self.defined()
            .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
                Some((_, m)) if m <= v => acc,
                _ => Some((i, v)),
            })
    }

    pub fn sentinel_count(&self) -> usize {
        self.values
            .iter()
            .filter(|v| Self::is_sentinel(**v))
            .count()
    }

    /// Displacement from `k0` to grid point `(ix, iy)`, wrapped to the
    /// nearest image when the window is periodic.
    pub fn displacement(&self, ix: usize, iy: usize, k0: [f64; 2]) -> [f64; 2] {
        let mut d = [self.coord(0, ix) - k0[0], self.coord(1, iy) - k0[1]];
        if self.periodic {
            for (axis, di) in d.iter_mut().enumerate() {
                let span = self.bounds[axis][1] - self.bounds[axis][0];
                if span > 0.0 {
                    *di -= span * (*di / span).round();
                }
            }
        }
        d
    }

    /// Flat index of the grid point nearest to `k0`.
    pub fn nearest(&self, k0: [f64; 2]) -> usize {
        let mut best = (0, f64::INFINITY);
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let d = self.displacement(ix, iy, k0);
                let r = d[0].hypot(d[1]);
                if r < best.1 {
                    best = (iy * self.nx + ix, r);
                }
            }
        }
        best.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelId;
    use std::f64::consts::PI;

    #[test]
    fn default_square_grid_hits_high_symmetry_points() {
        let g = GridSpec::for_model(&ModelSpec::get(ModelId::TripletUp), 201, 201).unwrap();
        assert_eq!(g.coord(0, 0), -PI);
        assert_eq!(g.coord(0, 200), PI);
        assert_eq!(g.coord(0, 100), 0.0);
        assert!((g.coord(0, 150) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_models_collapse_y() {
        let g = GridSpec::for_model(&ModelSpec::get(ModelId::Kitaev1d), 11, 7).unwrap();
        assert_eq!((g.nx, g.ny), (11, 1));
        assert_eq!(g.momentum(1, 3).dim(), 1);
    }

    #[test]
    fn evaluation_order_is_row_major() {
        let g = GridSpec::new(3, 2, [[0.0, 2.0], [0.0, 1.0]]).unwrap();
        let v = g.evaluate(2, |k| k.components()[0] + 10.0 * k.components()[1]);
        assert_eq!(v, vec![0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
    }

    #[test]
    fn periodic_displacement_wraps() {
        let g = GridSpec::for_model(&ModelSpec::get(ModelId::TripletUp), 201, 201).unwrap();
        let grid = Grid2D::new(&g, vec![0.0; g.len()]).unwrap();
        let d = grid.displacement(0, 100, [PI, 0.0]);
        assert!(d[0].abs() < 1e-15 && d[1].abs() < 1e-15);
        let n = grid.nearest([PI - 1e-3, 0.0]);
        let d = grid.displacement(n % 201, n / 201, [PI - 1e-3, 0.0]);
        assert!(d[0].hypot(d[1]) <= 1e-3 + 1e-12);
    }
}
