//! Filtered tabulated chemistry: 1D flamelet tables indexed by the filtered
//! progress variable, flame thicknesses, and the fractal wrinkling closure.

use crate::bundle::ThicknessPair;
use crate::error::{Error, Result};
use crate::field::{Boundary, ScalarField3D};
use crate::filter::{filter_line, GaussianKernel1D};

/// Default fractal dimension of the subfilter flame surface.
pub const DEFAULT_FRACTAL_DIMENSION: f64 = 2.5;

/// A freely propagating 1D premixed flame sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FlameletProfile {
    pub x: Vec<f64>,
    pub c: Vec<f64>,
    pub omega: Vec<f64>,
    pub rho: Vec<f64>,
    /// Fresh-gas equivalence ratio, when known.
    pub phi: Option<f64>,
}

impl FlameletProfile {
    pub fn new(x: Vec<f64>, c: Vec<f64>, omega: Vec<f64>, rho: Vec<f64>, phi: Option<f64>) -> Result<Self> {
        let n = x.len();
        if c.len() != n || omega.len() != n || rho.len() != n {
            return Err(Error::Shape(format!(
                "profile columns have lengths x={}, c={}, omega={}, rho={}",
                n,
                c.len(),
                omega.len(),
                rho.len()
            )));
        }
        if n < 3 {
            return Err(Error::Degenerate(format!("profile needs at least 3 points, got {n}")));
        }
        for name_values in [("x", &x), ("c", &c), ("omega", &omega), ("rho", &rho)] {
            if let Some(i) = name_values.1.iter().position(|v| !v.is_finite()) {
                return Err(Error::validation(name_values.0, i, "non-finite value"));
            }
        }
        if let Some(i) = (1..n).find(|&i| x[i] <= x[i - 1]) {
            return Err(Error::validation("x", i, "coordinates must be strictly increasing"));
        }
        let dx = (x[n - 1] - x[0]) / (n - 1) as f64;
        if let Some(i) = (1..n).find(|&i| ((x[i] - x[i - 1]) - dx).abs() > 1e-9 * dx.abs().max(x[i].abs())) {
            return Err(Error::validation("x", i, "spacing is not uniform"));
        }
        if let Some(i) = (1..n).find(|&i| c[i] < c[i - 1]) {
            return Err(Error::validation("c", i, "progress variable must be non-decreasing"));
        }
        if let Some(i) = c.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::validation("c", i, "progress variable outside [0, 1]"));
        }
        if let Some(i) = omega.iter().position(|&v| v < 0.0) {
            return Err(Error::validation("omega", i, "burning rate must be non-negative"));
        }
        if let Some(i) = rho.iter().position(|&v| v <= 0.0) {
            return Err(Error::validation("rho", i, "density must be positive"));
        }
        if !(c[0] < 0.01 && c[n - 1] > 0.99) {
            return Err(Error::Degenerate(format!(
                "profile does not span the flame: c goes from {} to {}",
                c[0],
                c[n - 1]
            )));
        }
        Ok(Self { x, c, omega, rho, phi })
    }

    pub fn dx(&self) -> f64 {
        (self.x[self.x.len() - 1] - self.x[0]) / (self.x.len() - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Unfiltered progress-variable thickness.
    pub fn thickness(&self) -> Result<f64> {
        flame_thickness(&self.c, self.dx())
    }
}

/// Gradient magnitude of `c` at every point: fourth-order central differences
/// in the interior, second-order central next to the ends and second-order
/// one-sided at the ends.
pub fn gradient(c: &[f64], dx: f64) -> Vec<f64> {
    let n = c.len();
    (0..n)
        .map(|i| {
            let d = if i >= 2 && i + 2 < n {
                (8.0 * (c[i + 1] - c[i - 1]) - (c[i + 2] - c[i - 2])) / (12.0 * dx)
            } else if i >= 1 && i + 1 < n {
                (c[i + 1] - c[i - 1]) / (2.0 * dx)
            } else if i == 0 {
                (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * dx)
            } else {
                (3.0 * c[n - 1] - 4.0 * c[n - 2] + c[n - 3]) / (2.0 * dx)
            };
            d.abs()
        })
        .collect()
}

/// `1 / max |dc/dx|`.
pub fn flame_thickness(c: &[f64], dx: f64) -> Result<f64> {
    if c.len() < 3 {
        return Err(Error::Degenerate(format!("need at least 3 points, got {}", c.len())));
    }
    if !(dx > 0.0) {
        return Err(Error::Domain(format!("spacing must be positive, got {dx}")));
    }
    let max = gradient(c, dx).into_iter().fold(0.0, f64::max);
    if max * dx < 1e-12 {
        return Err(Error::Degenerate("progress-variable profile is flat".into()));
    }
    Ok(1.0 / max)
}

/// Filtered burning rate of a 1D flame as a function of the filtered progress variable.
#[derive(Debug, Clone, PartialEq)]
pub struct FlameletTable {
    pub sigma: f64,
    pub phi: Option<f64>,
    pub thickness: ThicknessPair,
    c: Vec<f64>,
    omega: Vec<f64>,
}

impl FlameletTable {
    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.c, &self.omega)
    }

    pub fn peak(&self) -> f64 {
        self.omega.iter().copied().fold(0.0, f64::max)
    }

    /// Peak location in `c`.
    pub fn peak_c(&self) -> f64 {
        let i = self
            .omega
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.c[i]
    }

    /// Linear interpolation in the filtered progress variable, clamped to [0, 1].
    pub fn lookup(&self, c: f64) -> f64 {
        let c = c.clamp(self.c[0], self.c[self.c.len() - 1]);
        let hi = self.c.partition_point(|&k| k <= c);
        if hi == 0 {
            return self.omega[0];
        }
        let lo = hi - 1;
        if hi == self.c.len() || self.c[lo] == c {
            return self.omega[lo];
        }
        let t = (c - self.c[lo]) / (self.c[hi] - self.c[lo]);
        self.omega[lo] + t * (self.omega[hi] - self.omega[lo])
    }
}

/// Filters a flamelet with the 3D filter's 1D kernel and tabulates the
/// filtered burning rate against the Favre-filtered progress variable.
///
/// `sigma` is in profile grid cells. Both ends are extended with their
/// constant end states by the kernel half-width before filtering.
pub fn build_table(profile: &FlameletProfile, sigma: f64) -> Result<FlameletTable> {
    let kernel = GaussianKernel1D::new(sigma)?;
    let dx = profile.dx();
    let delta0 = profile.thickness()?;
    if delta0 / dx < 10.0 {
        return Err(Error::Domain(format!(
            "profile resolves the flame with {:.2} points per thickness; at least 10 are required",
            delta0 / dx
        )));
    }
    let pad = kernel.half_width();
    let extend = |v: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(v.len() + 2 * pad);
        out.extend(std::iter::repeat_n(v[0], pad));
        out.extend_from_slice(v);
        out.extend(std::iter::repeat_n(v[v.len() - 1], pad));
        out
    };
    let rho = extend(&profile.rho);
    let c = extend(&profile.c);
    let omega = extend(&profile.omega);
    let rho_c: Vec<f64> = rho.iter().zip(&c).map(|(r, c)| r * c).collect();

    let rho_bar = filter_line(&rho, &kernel, Boundary::Clamp)?;
    let c_tilde: Vec<f64> = filter_line(&rho_c, &kernel, Boundary::Clamp)?
        .iter()
        .zip(&rho_bar)
        .map(|(num, den)| num / den)
        .collect();
    let omega_bar = filter_line(&omega, &kernel, Boundary::Clamp)?;
    let delta1 = flame_thickness(&c_tilde, dx)?;

    let mut knots_c: Vec<f64> = Vec::with_capacity(c_tilde.len() + 2);
    let mut knots_w: Vec<f64> = Vec::with_capacity(c_tilde.len() + 2);
    for (i, (&ct, &w)) in c_tilde.iter().zip(&omega_bar).enumerate() {
        match knots_c.last() {
            Some(&last) if ct < last - 1e-12 => {
                return Err(Error::validation(
                    "c_tilde",
                    i,
                    "filtered progress variable is not monotone",
                ));
            }
            Some(&last) if ct <= last => continue,
            _ => {
                knots_c.push(ct);
                knots_w.push(w);
            }
        }
    }
    if knots_c[0] > 0.0 {
        knots_c.insert(0, 0.0);
        knots_w.insert(0, 0.0);
    }
    if *knots_c.last().unwrap() < 1.0 {
        knots_c.push(1.0);
        knots_w.push(0.0);
    }
    let peak = knots_w.iter().copied().fold(0.0, f64::max);
    let tol = 1e-6 * peak;
    let first = knots_w[0];
    let last = knots_w[knots_w.len() - 1];
    if first > tol || last > tol {
        return Err(Error::Domain(format!(
            "filtered burning rate does not vanish at the table ends ({first}, {last}); extend the profile"
        )));
    }
    Ok(FlameletTable {
        sigma,
        phi: profile.phi,
        thickness: ThicknessPair { delta0, delta1 },
        c: knots_c,
        omega: knots_w,
    })
}

/// Fractal wrinkling configuration: dimension and cutoff scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrinklingConfig {
    pub fractal_dimension: f64,
    pub outer: f64,
    pub inner: f64,
}

impl WrinklingConfig {
    pub fn new(fractal_dimension: f64, outer: f64, inner: f64) -> Result<Self> {
        if !(2.0..=3.0).contains(&fractal_dimension) {
            return Err(Error::Domain(format!(
                "fractal dimension must lie in [2, 3], got {fractal_dimension}"
            )));
        }
        if !(inner > 0.0 && outer > 0.0) {
            return Err(Error::Domain("cutoff scales must be positive".into()));
        }
        if inner > outer {
            return Err(Error::Domain(format!(
                "inner cutoff {inner} exceeds outer cutoff {outer}"
            )));
        }
        Ok(Self {
            fractal_dimension,
            outer,
            inner,
        })
    }

    /// Outer cutoff at the filtered thickness, inner cutoff at the laminar one.
    pub fn from_thickness(fractal_dimension: f64, t: ThicknessPair) -> Result<Self> {
        Self::new(fractal_dimension, t.delta1, t.delta0)
    }
}

pub fn wrinkling_factor(cfg: &WrinklingConfig) -> f64 {
    (cfg.outer / cfg.inner).powf(cfg.fractal_dimension - 2.0)
}

/// How the subfilter wrinkling factor is obtained for each table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wrinkling {
    /// Fractal model with cutoffs taken from the table's thicknesses.
    Fractal { fractal_dimension: f64 },
    /// A fixed factor.
    Constant(f64),
}

impl Default for Wrinkling {
    fn default() -> Self {
        Wrinkling::Fractal {
            fractal_dimension: DEFAULT_FRACTAL_DIMENSION,
        }
    }
}

impl Wrinkling {
    pub fn factor(&self, table: &FlameletTable) -> Result<f64> {
        match *self {
            Wrinkling::Fractal { fractal_dimension } => Ok(wrinkling_factor(
                &WrinklingConfig::from_thickness(fractal_dimension, table.thickness)?,
            )),
            Wrinkling::Constant(xi) => Ok(xi),
        }
    }
}

/// Flamelet tables at one filter width, ordered by equivalence ratio.
#[derive(Debug, Clone)]
pub struct FlameletLibrary {
    tables: Vec<FlameletTable>,
}

impl FlameletLibrary {
    pub fn new(mut tables: Vec<FlameletTable>) -> Result<Self> {
        if tables.is_empty() {
            return Err(Error::Degenerate("flamelet library is empty".into()));
        }
        if let Some(t) = tables.iter().find(|t| t.phi.is_none()) {
            return Err(Error::Format(format!(
                "flamelet table (sigma {}) has no equivalence ratio",
                t.sigma
            )));
        }
        tables.sort_by(|a, b| a.phi.unwrap().total_cmp(&b.phi.unwrap()));
        if tables.windows(2).any(|w| w[0].phi == w[1].phi) {
            return Err(Error::Format("duplicate equivalence ratio in flamelet library".into()));
        }
        Ok(Self { tables })
    }

    pub fn tables(&self) -> &[FlameletTable] {
        &self.tables
    }

    pub fn phi_range(&self) -> (f64, f64) {
        (
            self.tables[0].phi.unwrap(),
            self.tables[self.tables.len() - 1].phi.unwrap(),
        )
    }

    /// Bracketing tables and the weight of the upper one.
    fn bracket(&self, phi: f64) -> Result<(usize, usize, f64)> {
        let (lo, hi) = self.phi_range();
        let tol = 1e-9 * hi.abs().max(1.0);
        if !(phi >= lo - tol && phi <= hi + tol) {
            return Err(Error::Extrapolation { phi, lo, hi });
        }
        let phis: Vec<f64> = self.tables.iter().map(|t| t.phi.unwrap()).collect();
        if let Some(i) = phis.iter().position(|&p| (p - phi).abs() <= tol) {
            return Ok((i, i, 0.0));
        }
        let upper = phis.partition_point(|&p| p < phi);
        let lower = upper - 1;
        let t = (phi - phis[lower]) / (phis[upper] - phis[lower]);
        Ok((lower, upper, t))
    }

    /// Thicknesses interpolated linearly in the equivalence ratio.
    pub fn thickness_at(&self, phi: f64) -> Result<ThicknessPair> {
        let (a, b, t) = self.bracket(phi)?;
        let ta = self.tables[a].thickness;
        let tb = self.tables[b].thickness;
        Ok(ThicknessPair {
            delta0: ta.delta0 + t * (tb.delta0 - ta.delta0),
            delta1: ta.delta1 + t * (tb.delta1 - ta.delta1),
        })
    }

    fn evaluate(&self, c: f64, phi: f64, factors: &[f64]) -> Result<f64> {
        let (a, b, t) = self.bracket(phi)?;
        let wa = factors[a] * self.tables[a].lookup(c);
        if a == b {
            return Ok(wa);
        }
        let wb = factors[b] * self.tables[b].lookup(c);
        Ok((1.0 - t) * wa + t * wb)
    }
}

/// Equivalence ratio used to select flamelets.
#[derive(Debug, Clone, Copy)]
pub enum PhiSource<'a> {
    /// Global equivalence ratio of the case.
    Global(f64),
    /// Local filtered equivalence ratio.
    Local(&'a ScalarField3D),
}

/// Tabulated-chemistry burning rate with subfilter wrinkling.
pub fn baseline_omega(
    c_tilde: &ScalarField3D,
    phi: PhiSource<'_>,
    library: &FlameletLibrary,
    wrinkling: Wrinkling,
) -> Result<ScalarField3D> {
    let factors = library
        .tables
        .iter()
        .map(|t| wrinkling.factor(t))
        .collect::<Result<Vec<f64>>>()?;
    let mut out = Vec::with_capacity(c_tilde.len());
    match phi {
        PhiSource::Global(phi_g) => {
            for &c in c_tilde.data() {
                out.push(library.evaluate(c, phi_g, &factors)?);
            }
        }
        PhiSource::Local(field) => {
            c_tilde.check_same_grid(field)?;
            for (&c, &p) in c_tilde.data().iter().zip(field.data()) {
                out.push(library.evaluate(c, p, &factors)?);
            }
        }
    }
    ScalarField3D::new(*c_tilde.grid(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    /// erf front of width `a` cells with a Gaussian burning rate, on `n` points.
    fn erf_profile(a: f64, n: usize, phi: f64, peak: f64) -> FlameletProfile {
        let dx = 1e-5;
        let x0 = (n / 2) as f64;
        let x: Vec<f64> = (0..n).map(|i| i as f64 * dx).collect();
        let c: Vec<f64> = (0..n)
            .map(|i| 0.5 * (1.0 + libm::erf((i as f64 - x0) / (a * std::f64::consts::SQRT_2))))
            .collect();
        let omega: Vec<f64> = (0..n)
            .map(|i| peak * (-(i as f64 - x0).powi(2) / (2.0 * a * a)).exp())
            .collect();
        let rho: Vec<f64> = c.iter().map(|c| 1.2 - 1.0 * c).collect();
        FlameletProfile::new(x, c, omega, rho, Some(phi)).unwrap()
    }

    #[test]
    fn linear_ramp_thickness() {
        let l = 2.0;
        let n = 21;
        let dx = l / (n - 1) as f64;
        let c: Vec<f64> = (0..n).map(|i| i as f64 * dx / l).collect();
        assert!((flame_thickness(&c, dx).unwrap() - l).abs() < 1e-12);
        assert!(matches!(flame_thickness(&[0.5; 5], 1.0), Err(Error::Degenerate(_))));
        assert!(matches!(flame_thickness(&[0.0, 1.0], 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn erf_thickness() {
        for a in [3.0, 4.0, 7.5] {
            let p = erf_profile(a, 200, 0.5, 1.0);
            let expected = a * (2.0 * std::f64::consts::PI).sqrt() * p.dx();
            let d = p.thickness().unwrap();
            assert!((d - expected).abs() / expected < 0.01, "a={a}: {d} vs {expected}");
        }
    }

    #[test]
    fn filtered_erf_thickness_ratio() {
        // a = 3 cells filtered with sigma = 4 cells: ratio 3/5.
        let p = erf_profile(3.0, 200, 0.5, 1.0);
        let flat = FlameletProfile::new(p.x.clone(), p.c.clone(), p.omega.clone(), vec![1.0; 200], Some(0.5)).unwrap();
        let c_bar = filter_line(&flat.c, &GaussianKernel1D::new(4.0).unwrap(), Boundary::Clamp).unwrap();
        let d1 = flame_thickness(&c_bar, p.dx()).unwrap();
        let expected = (2.0 * std::f64::consts::PI * 25.0).sqrt() * p.dx();
        assert!((d1 - expected).abs() / expected < 0.01);
        let ratio = flat.thickness().unwrap() / d1;
        assert!((ratio - 0.6).abs() < 0.006);
    }

    #[test]
    fn profile_validation() {
        let x = vec![0.0, 1.0, 2.0];
        let ok = FlameletProfile::new(x.clone(), vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0], vec![1.0; 3], None);
        assert!(ok.is_ok());
        let bad_c = FlameletProfile::new(x.clone(), vec![0.0, 0.6, 0.5], vec![0.0; 3], vec![1.0; 3], None);
        assert!(matches!(bad_c, Err(Error::Validation { ref field, .. }) if field == "c"));
        let bad_x = FlameletProfile::new(vec![0.0, 2.0, 1.0], vec![0.0, 0.5, 1.0], vec![0.0; 3], vec![1.0; 3], None);
        assert!(matches!(bad_x, Err(Error::Validation { ref field, .. }) if field == "x"));
    }

    #[test]
    fn narrow_kernel_reproduces_unfiltered_mapping() {
        let p = erf_profile(8.0, 400, 0.5, 1.0);
        let table = build_table(&p, 0.5).unwrap();
        for i in (150..250).step_by(7) {
            let direct = p.omega[i];
            let tab = table.lookup(p.c[i]);
            assert!((tab - direct).abs() <= 0.02 * p.omega.iter().copied().fold(0.0, f64::max), "{i}: {tab} vs {direct}");
        }
    }

    #[test]
    fn peak_decreases_with_filter_width() {
        let p = erf_profile(8.0, 600, 0.5, 1.0);
        let peaks: Vec<f64> = [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&s| build_table(&p, s).unwrap().peak())
            .collect();
        assert!(peaks.windows(2).all(|w| w[1] <= w[0]), "{peaks:?}");
    }

    #[test]
    fn thickness_grows_with_filter_width() {
        let p = erf_profile(8.0, 600, 0.5, 1.0);
        let mut prev_ratio = f64::INFINITY;
        for s in [2.0, 4.0, 8.0, 16.0] {
            let t = build_table(&p, s).unwrap().thickness;
            assert!(t.delta1 >= t.delta0);
            assert!(t.ratio() < prev_ratio);
            prev_ratio = t.ratio();
        }
    }

    #[test]
    fn table_ends_vanish_and_knots_are_exact() {
        let p = erf_profile(8.0, 400, 0.5, 3.0);
        let t = build_table(&p, 4.0).unwrap();
        assert!(t.lookup(0.0) <= 1e-6 * t.peak());
        assert!(t.lookup(1.0) <= 1e-6 * t.peak());
        let (cs, ws) = t.knots();
        for (c, w) in cs.iter().zip(ws).step_by(13) {
            assert!((t.lookup(*c) - w).abs() < 1e-12);
        }
    }

    #[test]
    fn filtered_integral_is_conserved() {
        let p = erf_profile(8.0, 400, 0.5, 2.0);
        let kernel = GaussianKernel1D::new(8.0).unwrap();
        let pad = kernel.half_width();
        let mut ext = vec![p.omega[0]; pad];
        ext.extend_from_slice(&p.omega);
        ext.extend(std::iter::repeat_n(p.omega[p.omega.len() - 1], pad));
        let filtered = filter_line(&ext, &kernel, Boundary::Clamp).unwrap();
        let before: f64 = p.omega.iter().sum::<f64>() * p.dx();
        let after: f64 = filtered.iter().sum::<f64>() * p.dx();
        assert!(((after - before) / before).abs() < 1e-6);
    }

    #[test]
    fn under_resolved_profile_is_rejected() {
        let p = erf_profile(3.0, 100, 0.5, 1.0);
        assert!(matches!(build_table(&p, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn wrinkling_examples() {
        assert_eq!(wrinkling_factor(&WrinklingConfig::new(2.5, 1.0, 1.0).unwrap()), 1.0);
        assert_eq!(wrinkling_factor(&WrinklingConfig::new(2.5, 4.0, 1.0).unwrap()), 2.0);
        assert_eq!(wrinkling_factor(&WrinklingConfig::new(2.0, 37.0, 1.0).unwrap()), 1.0);
        assert!(matches!(WrinklingConfig::new(2.5, 1.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(WrinklingConfig::new(3.5, 2.0, 1.0), Err(Error::Domain(_))));
    }

    fn library() -> FlameletLibrary {
        FlameletLibrary::new(vec![
            build_table(&erf_profile(8.0, 400, 0.4, 1.0), 4.0).unwrap(),
            build_table(&erf_profile(8.0, 400, 0.6, 2.0), 4.0).unwrap(),
        ])
        .unwrap()
    }

    fn field(values: Vec<f64>) -> ScalarField3D {
        let g = GridSpec::uniform([values.len(), 1, 1], 1.0, Boundary::Clamp).unwrap();
        ScalarField3D::new(g, values).unwrap()
    }

    #[test]
    fn baseline_examples() {
        let lib = library();
        let w = Wrinkling::default();
        let zeros = baseline_omega(&field(vec![0.0; 4]), PhiSource::Global(0.4), &lib, w).unwrap();
        assert!(zeros.data().iter().all(|&v| v <= 1e-6));
        let ones = baseline_omega(&field(vec![1.0; 4]), PhiSource::Global(0.4), &lib, w).unwrap();
        assert!(ones.data().iter().all(|&v| v <= 1e-6 * 2.0 * lib.tables()[0].peak()));

        let table = &lib.tables()[0];
        let peak = baseline_omega(&field(vec![table.peak_c()]), PhiSource::Global(0.4), &lib, Wrinkling::Constant(2.0)).unwrap();
        assert_eq!(peak.data()[0], 2.0 * table.peak());
    }

    #[test]
    fn global_and_local_agree_under_uniform_phi() {
        let lib = library();
        let c = field((0..50).map(|i| i as f64 / 49.0).collect());
        for phi_g in [0.4, 0.47, 0.6] {
            let phi = ScalarField3D::constant(*c.grid(), phi_g).unwrap();
            let f = baseline_omega(&c, PhiSource::Global(phi_g), &lib, Wrinkling::default()).unwrap();
            let fc = baseline_omega(&c, PhiSource::Local(&phi), &lib, Wrinkling::default()).unwrap();
            assert_eq!(f, fc);
        }
    }

    #[test]
    fn homogeneous_in_wrinkling() {
        let lib = library();
        let c = field((0..50).map(|i| i as f64 / 49.0).collect());
        let phi = field((0..50).map(|i| 0.4 + 0.2 * i as f64 / 49.0).collect());
        let one = baseline_omega(&c, PhiSource::Local(&phi), &lib, Wrinkling::Constant(1.7)).unwrap();
        let two = baseline_omega(&c, PhiSource::Local(&phi), &lib, Wrinkling::Constant(3.4)).unwrap();
        for (a, b) in one.data().iter().zip(two.data()) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn no_silent_extrapolation() {
        let lib = library();
        let c = field(vec![0.5]);
        assert!(matches!(
            baseline_omega(&c, PhiSource::Global(0.7), &lib, Wrinkling::default()),
            Err(Error::Extrapolation { .. })
        ));
        let phi = field(vec![0.3]);
        assert!(matches!(
            baseline_omega(&c, PhiSource::Local(&phi), &lib, Wrinkling::default()),
            Err(Error::Extrapolation { .. })
        ));
    }
}
