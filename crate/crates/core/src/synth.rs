//! Analytic flame-like snapshots with closed-form filtered quantities.
//!
//! The progress variable is an error-function front of width `a` cells,
//! the H2 source term a Gaussian of the same width centred on the front.
//! Filtering with a Gaussian of `sigma` cells widens both to
//! `sqrt(a^2 + sigma^2)` cells, which makes these fields exact oracles for the
//! filter and the thickness measurement.

use std::f64::consts::{PI, SQRT_2};

use crate::bundle::{self, FieldMap, SnapshotBundle};
use crate::error::{Error, Result};
use crate::field::{Boundary, GridSpec, ScalarField3D};
use crate::flamelet::FlameletProfile;
use crate::thermo::MixtureConstants;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFlameSpec {
    pub case_id: String,
    pub time_index: u32,
    /// Transition length scale in cells.
    pub a: f64,
    pub omega_peak: f64,
    /// Fresh and burnt densities; `rho_u == rho_b` gives a constant-density flame.
    pub rho_u: f64,
    pub rho_b: f64,
    pub xi_level: f64,
    /// Linear mixture-fraction ramp `(at j = 0, at j = ny - 1)` replacing `xi_level`.
    pub xi_ramp: Option<(f64, f64)>,
    /// Front displacement amplitude in cells.
    pub amplitude: f64,
    /// Wrinkle wavelengths along y and z, in cells.
    pub lambda: (f64, f64),
    /// Relative along-front modulation of the burning rate for wrinkled fronts.
    pub rate_modulation: f64,
    pub dims: [usize; 3],
    pub dx: f64,
    /// Mean front position in cells; defaults to `nx / 2`.
    pub x0: Option<f64>,
    pub boundary: [Boundary; 3],
    pub mix: MixtureConstants,
}

impl SyntheticFlameSpec {
    /// Planar lean flame at `phi_g = 0.4`, clamped in x and periodic in y and z.
    pub fn planar(a: f64, dims: [usize; 3]) -> Self {
        let mix = MixtureConstants::default();
        Self {
            case_id: "synth".into(),
            time_index: 1,
            a,
            omega_peak: 1.0e4,
            rho_u: 1.0,
            rho_b: 0.25,
            xi_level: mix.xi_from_equivalence_ratio(0.4),
            xi_ramp: None,
            amplitude: 0.0,
            lambda: (dims[1] as f64, dims[2] as f64),
            rate_modulation: 0.5,
            dims,
            dx: 2.0e-5,
            x0: None,
            boundary: [Boundary::Clamp, Boundary::Periodic, Boundary::Periodic],
            mix,
        }
    }

    pub fn front_center(&self) -> f64 {
        self.x0.unwrap_or(self.dims[0] as f64 / 2.0)
    }

    pub fn phi_g(&self) -> f64 {
        let xi = match self.xi_ramp {
            Some((lo, hi)) => 0.5 * (lo + hi),
            None => self.xi_level,
        };
        self.mix.equivalence_ratio(xi)
    }

    fn validate(&self) -> Result<()> {
        if !(self.a >= 2.0) {
            return Err(Error::Domain(format!("front width a = {} cells is below 2", self.a)));
        }
        if !(self.rho_b > 0.0 && self.rho_u >= self.rho_b) {
            return Err(Error::Domain(format!(
                "densities must satisfy rho_u >= rho_b > 0, got {} and {}",
                self.rho_u, self.rho_b
            )));
        }
        if !(self.omega_peak >= 0.0) {
            return Err(Error::Domain("omega_peak must be non-negative".into()));
        }
        if !(self.amplitude >= 0.0) {
            return Err(Error::Domain("wrinkle amplitude must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.rate_modulation) {
            return Err(Error::Domain("rate modulation must lie in [0, 1)".into()));
        }
        let xis = match self.xi_ramp {
            Some((lo, hi)) => vec![lo, hi],
            None => vec![self.xi_level],
        };
        for xi in xis {
            if !(xi > 0.0 && xi < 1.0) {
                return Err(Error::Domain(format!("mixture fraction {xi} outside (0, 1)")));
            }
        }
        if (self.dims[0] as f64) < 8.0 * self.a {
            return Err(Error::Placement(format!(
                "x extent of {} cells is shorter than 8a = {}",
                self.dims[0],
                8.0 * self.a
            )));
        }
        if self.boundary[0] == Boundary::Clamp {
            let x0 = self.front_center();
            let margin = 4.0 * self.a;
            let last = (self.dims[0] - 1) as f64;
            if x0 - self.amplitude < margin || x0 + self.amplitude > last - margin {
                return Err(Error::Placement(format!(
                    "front between x = {} and {} comes within 4a of a clamped x boundary",
                    x0 - self.amplitude,
                    x0 + self.amplitude
                )));
            }
        }
        Ok(())
    }

    fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.dims, self.dx, self.boundary)
    }
}

/// `c(s) = (1 + erf(s / (a sqrt 2))) / 2` with `s` in cells.
pub fn erf_progress(s: f64, a: f64) -> f64 {
    0.5 * (1.0 + libm::erf(s / (a * SQRT_2)))
}

fn gaussian(s: f64, a: f64) -> f64 {
    (-s * s / (2.0 * a * a)).exp()
}

fn generate(spec: &SyntheticFlameSpec, front: impl Fn(usize, usize) -> f64, rate: impl Fn(usize) -> f64) -> Result<SnapshotBundle> {
    spec.validate()?;
    let grid = spec.grid()?;
    let mix = spec.mix;
    let ny = spec.dims[1];
    let xi_at = |j: usize| match spec.xi_ramp {
        Some((lo, hi)) if ny > 1 => lo + (hi - lo) * j as f64 / (ny - 1) as f64,
        Some((lo, _)) => lo,
        None => spec.xi_level,
    };
    let c = ScalarField3D::from_fn(grid, |i, j, k| erf_progress(i as f64 - front(j, k), spec.a))?;
    let xi = ScalarField3D::from_fn(grid, |_, j, _| xi_at(j))?;
    let y_h2 = c.map_binary(&xi, |c, xi| xi - c * (xi - mix.burnt_h2(xi)))?;
    let rho = c.map(|c| spec.rho_u + (spec.rho_b - spec.rho_u) * c)?;
    let omega = ScalarField3D::from_fn(grid, |i, j, k| {
        -spec.omega_peak * rate(j) * gaussian(i as f64 - front(j, k), spec.a)
    })?;
    let mut fields = FieldMap::new();
    fields.insert(bundle::RHO.into(), rho);
    fields.insert(bundle::Y_H2.into(), y_h2);
    fields.insert(bundle::XI.into(), xi);
    fields.insert(bundle::OMEGA_H2.into(), omega);
    SnapshotBundle::new(spec.case_id.clone(), spec.time_index, spec.phi_g(), fields)
}

pub fn make_planar_flame(spec: &SyntheticFlameSpec) -> Result<SnapshotBundle> {
    let x0 = spec.front_center();
    generate(spec, |_, _| x0, |_| 1.0)
}

/// Front at `x0 + A sin(2 pi y / ly) sin(2 pi z / lz)` with the burning rate
/// modulated by `1 + m sin(2 pi y / ly)`. With `A = 0` this is the planar flame.
pub fn make_wrinkled_flame(spec: &SyntheticFlameSpec) -> Result<SnapshotBundle> {
    if spec.amplitude == 0.0 {
        return make_planar_flame(spec);
    }
    if spec.boundary[1] != Boundary::Periodic || spec.boundary[2] != Boundary::Periodic {
        return Err(Error::Domain("wrinkled flames need periodic y and z axes".into()));
    }
    let (ly, lz) = spec.lambda;
    for (axis, lambda, n) in [("y", ly, spec.dims[1]), ("z", lz, spec.dims[2])] {
        let divides = lambda > 0.0 && lambda.fract() == 0.0 && n % (lambda as usize) == 0;
        if !divides {
            return Err(Error::Domain(format!(
                "wavelength {lambda} does not divide the {axis} extent {n}"
            )));
        }
    }
    let x0 = spec.front_center();
    let a = spec.amplitude;
    let m = spec.rate_modulation;
    generate(
        spec,
        |j, k| x0 + a * (2.0 * PI * j as f64 / ly).sin() * (2.0 * PI * k as f64 / lz).sin(),
        |j| 1.0 + m * (2.0 * PI * j as f64 / ly).sin(),
    )
}

/// Area of the `c = level` isosurface of a front that is a single-valued
/// graph `x(y, z)` on periodic y and z axes.
pub fn front_area(c: &ScalarField3D, level: f64) -> Result<f64> {
    let grid = c.grid();
    let [nx, ny, nz] = grid.dims();
    let h = grid.dx();
    let mut xf = vec![0.0; ny * nz];
    for k in 0..nz {
        for j in 0..ny {
            let row = &c.data()[grid.linear_index(0, j, k)..grid.linear_index(0, j, k) + nx];
            let mut hit = None;
            for i in 0..nx - 1 {
                let (lo, hi) = (row[i] - level, row[i + 1] - level);
                if lo < 0.0 && hi >= 0.0 {
                    if hit.is_some() {
                        return Err(Error::Degenerate(format!("front crosses row (y={j}, z={k}) twice")));
                    }
                    hit = Some(i as f64 + lo / (lo - hi));
                }
            }
            xf[j + ny * k] = hit.ok_or_else(|| Error::Degenerate(format!("no front in row (y={j}, z={k})")))?;
        }
    }
    let at = |j: usize, k: usize| xf[(j % ny) + ny * (k % nz)];
    let mut area = 0.0;
    for k in 0..nz {
        for j in 0..ny {
            let fy = (at(j + 1, k) - at(j + ny - 1, k)) / 2.0;
            let fz = (at(j, k + 1) - at(j, k + nz - 1)) / 2.0;
            area += (1.0 + fy * fy + fz * fz).sqrt();
        }
    }
    Ok(area * h * h)
}

/// 1D profile of the planar flame of `spec`, sampled `refine` times finer than
/// the 3D grid over `x0 ± 8a`.
pub fn make_flamelet_profile(spec: &SyntheticFlameSpec, refine: usize) -> Result<FlameletProfile> {
    spec.validate()?;
    if refine == 0 {
        return Err(Error::Domain("refinement factor must be at least 1".into()));
    }
    let half = (8.0 * spec.a * refine as f64).ceil() as i64;
    let h = 1.0 / refine as f64;
    let s: Vec<f64> = (-half..=half).map(|n| n as f64 * h).collect();
    let c: Vec<f64> = s.iter().map(|&s| erf_progress(s, spec.a)).collect();
    let omega = s.iter().map(|&s| spec.omega_peak * gaussian(s, spec.a)).collect();
    let rho = c.iter().map(|c| spec.rho_u + (spec.rho_b - spec.rho_u) * c).collect();
    let x = (-half..=half).map(|n| n as f64 * spec.dx / refine as f64).collect();
    FlameletProfile::new(x, c, omega, rho, Some(spec.phi_g()))
}
