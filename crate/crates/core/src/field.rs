//! Structured-grid scalar fields.
//!
//! Every field in the toolkit lives on a uniform, isotropic cartesian grid and
//! stores its values in double precision with x-fastest linear ordering:
//! `data[i + nx * (j + ny * k)]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary treatment of one grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Indices wrap around.
    Periodic,
    /// The domain ends; stencils are truncated at the edge.
    Clamp,
}

impl Boundary {
    pub fn code(self) -> u8 {
        match self {
            Boundary::Periodic => 0,
            Boundary::Clamp => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Boundary::Periodic),
            1 => Some(Boundary::Clamp),
            _ => None,
        }
    }
}

/// Point counts, spacing and per-axis boundary modes of a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dims: [usize; 3],
    dx: f64,
    boundary: [Boundary; 3],
}

impl GridSpec {
    pub fn new(dims: [usize; 3], dx: f64, boundary: [Boundary; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Domain(format!(
                "grid dimensions must be positive, got {:?}",
                dims
            )));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Domain(format!(
                "grid spacing must be positive, got {dx}"
            )));
        }
        Ok(Self { dims, dx, boundary })
    }

    /// Grid with the same boundary mode on every axis.
    pub fn uniform(dims: [usize; 3], dx: f64, boundary: Boundary) -> Result<Self> {
        Self::new(dims, dx, [boundary; 3])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn nx(&self) -> usize {
        self.dims[0]
    }

    pub fn ny(&self) -> usize {
        self.dims[1]
    }

    pub fn nz(&self) -> usize {
        self.dims[2]
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn boundary(&self) -> [Boundary; 3] {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn linear_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let [nx, ny, _] = self.dims;
        (idx % nx, (idx / nx) % ny, idx / (nx * ny))
    }

    /// Same grid with a different spacing and point counts, used by downsampling.
    pub(crate) fn with_dims_and_spacing(&self, dims: [usize; 3], dx: f64) -> Self {
        Self {
            dims,
            dx,
            boundary: self.boundary,
        }
    }

    pub fn shape_string(&self) -> String {
        format!("{}x{}x{}", self.dims[0], self.dims[1], self.dims[2])
    }
}

/// A scalar sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3D {
    grid: GridSpec,
    data: Vec<f64>,
}

impl ScalarField3D {
    pub fn new(grid: GridSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::Shape(format!(
                "data length {} does not match grid {} ({} points)",
                data.len(),
                grid.shape_string(),
                grid.len()
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation("data", idx, "non-finite value"));
        }
        Ok(Self { grid, data })
    }

    /// Construction for values already known to be finite and correctly sized.
    pub(crate) fn from_parts_unchecked(grid: GridSpec, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        Self { grid, data }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    /// Evaluates `f(i, j, k)` at every grid point.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let [nx, ny, nz] = grid.dims();
        let mut data = Vec::with_capacity(grid.len());
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    data.push(f(i, j, k));
                }
            }
        }
        Self::new(grid, data)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> Result<f64> {
        let [nx, ny, nz] = self.grid.dims();
        if i >= nx || j >= ny || k >= nz {
            return Err(Error::Bounds {
                i,
                j,
                k,
                nx,
                ny,
                nz,
            });
        }
        Ok(self.data[self.grid.linear_index(i, j, k)])
    }

    /// Element-wise combination of two fields on the same grid.
    pub fn map_binary(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.grid, data)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape(format!(
                "grid {} (dx={}) does not match grid {} (dx={})",
                self.grid.shape_string(),
                self.grid.dx(),
                other.grid.shape_string(),
                other.grid.dx()
            )));
        }
        Ok(())
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> f64 {
        crate::metrics::pairwise_sum(&self.data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(dims: [usize; 3]) -> ScalarField3D {
        let grid = GridSpec::uniform(dims, 1.0, Boundary::Periodic).unwrap();
        let n = grid.len();
        ScalarField3D::new(grid, (0..n).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn single_element() {
        let grid = GridSpec::uniform([1, 1, 1], 1e-4, Boundary::Clamp).unwrap();
        let f = ScalarField3D::new(grid, vec![7.0]).unwrap();
        assert_eq!(f.at(0, 0, 0).unwrap(), 7.0);
    }

    #[test]
    fn x_fastest_ordering() {
        let f = ramp([2, 2, 2]);
        assert_eq!(f.at(1, 0, 0).unwrap(), 1.0);
        assert_eq!(f.at(0, 1, 0).unwrap(), 2.0);
        assert_eq!(f.at(0, 0, 1).unwrap(), 4.0);
    }

    #[test]
    fn out_of_range_index_is_bounds_error() {
        let f = ramp([2, 2, 2]);
        assert!(matches!(f.at(2, 0, 0), Err(Error::Bounds { .. })));
        assert!(matches!(f.at(0, 0, 5), Err(Error::Bounds { .. })));
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(GridSpec::uniform([0, 1, 1], 1.0, Boundary::Clamp).is_err());
        assert!(GridSpec::uniform([1, 1, 1], 0.0, Boundary::Clamp).is_err());
        let grid = GridSpec::uniform([2, 1, 1], 1.0, Boundary::Clamp).unwrap();
        assert!(matches!(
            ScalarField3D::new(grid, vec![1.0]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            ScalarField3D::new(grid, vec![1.0, f64::NAN]),
            Err(Error::Validation { index: 1, .. })
        ));
    }

    #[test]
    fn map_binary_examples() {
        let grid = GridSpec::uniform([2, 1, 1], 1.0, Boundary::Clamp).unwrap();
        let a = ScalarField3D::new(grid, vec![1.0, 2.0]).unwrap();
        let b = ScalarField3D::new(grid, vec![3.0, 4.0]).unwrap();
        assert_eq!(a.map_binary(&b, |x, y| x * y).unwrap().data(), &[3.0, 8.0]);
        assert_eq!(a.map_binary(&a, |x, y| x - y).unwrap().data(), &[0.0, 0.0]);

        let g1 = GridSpec::uniform([1, 1, 1], 1.0, Boundary::Clamp).unwrap();
        let six = ScalarField3D::new(g1, vec![6.0]).unwrap();
        let two = ScalarField3D::new(g1, vec![2.0]).unwrap();
        assert_eq!(six.map_binary(&two, |x, y| x / y).unwrap().data(), &[3.0]);
    }

    #[test]
    fn map_binary_grid_mismatch() {
        let a = ramp([2, 2, 2]);
        let b = ramp([2, 2, 1]);
        assert!(matches!(a.map_binary(&b, |x, _| x), Err(Error::Shape(_))));
    }

    proptest! {
        #[test]
        fn linear_index_round_trip(nx in 1usize..9, ny in 1usize..9, nz in 1usize..9, seed in 0usize..10_000) {
            let grid = GridSpec::uniform([nx, ny, nz], 1.0, Boundary::Clamp).unwrap();
            let (i, j, k) = (seed % nx, (seed / 7) % ny, (seed / 13) % nz);
            let idx = grid.linear_index(i, j, k);
            prop_assert_eq!(grid.unravel(idx), (i, j, k));
        }

        #[test]
        fn identity_preserving_map_is_bitwise(values in proptest::collection::vec(-1e6f64..1e6, 8)) {
            let grid = GridSpec::uniform([2, 2, 2], 1.0, Boundary::Periodic).unwrap();
            let a = ScalarField3D::new(grid, values).unwrap();
            let ones = ScalarField3D::constant(grid, 1.0).unwrap();
            let zeros = ScalarField3D::constant(grid, 0.0).unwrap();
            let times_one = a.map_binary(&ones, |x, y| x * y).unwrap();
            let plus_zero = a.map_binary(&zeros, |x, y| x + y).unwrap();
            for (x, y) in a.data().iter().zip(times_one.data()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
            for (x, y) in a.data().iter().zip(plus_zero.data()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}
