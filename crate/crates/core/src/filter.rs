//! LES emulation: truncated discrete Gaussian filtering, Favre averaging and
//! strided downsampling.
//!
//! The 3D filter is applied separably along x, then y, then z. Each pass
//! accumulates in double precision with a fixed tap order, so results do not
//! depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{self, DerivedBundle, FieldMap, SnapshotBundle};
use crate::error::{Error, Result};
use crate::field::{Boundary, GridSpec, ScalarField3D};
use crate::thermo::{self, MixtureConstants};

/// Normalized, truncated 1D Gaussian. `sigma` is in grid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel1D {
    sigma: f64,
    half_width: usize,
    weights: Vec<f64>,
}

impl GaussianKernel1D {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!(
                "filter width must be positive, got {sigma}"
            )));
        }
        let half_width = (4.0 * sigma).round() as usize;
        let raw: Vec<f64> = (0..=2 * half_width)
            .map(|t| {
                let u = t as f64 - half_width as f64;
                (-0.5 * (u / sigma) * (u / sigma)).exp()
            })
            .collect();
        // Sum symmetric pairs from the tails inward so w[u] == w[-u] survives normalization.
        let mut total = raw[half_width];
        for u in (1..=half_width).rev() {
            total += 2.0 * raw[half_width + u];
        }
        let weights = raw.iter().map(|w| w / total).collect();
        Ok(Self {
            sigma,
            half_width,
            weights,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Half-width `z`; the kernel has `2 z + 1` taps.
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at signed offset `u`.
    pub fn weight(&self, u: isize) -> f64 {
        let idx = u + self.half_width as isize;
        if idx < 0 || idx as usize >= self.weights.len() {
            0.0
        } else {
            self.weights[idx as usize]
        }
    }
}

pub fn build_kernel(sigma: f64) -> Result<GaussianKernel1D> {
    GaussianKernel1D::new(sigma)
}

/// Tap lists for every output position along one axis.
struct AxisStencil {
    starts: Vec<usize>,
    taps: Vec<(usize, f64)>,
}

impl AxisStencil {
    fn new(kernel: &GaussianKernel1D, n: usize, boundary: Boundary) -> Self {
        let z = kernel.half_width() as isize;
        let mut starts = Vec::with_capacity(n + 1);
        let mut taps = Vec::with_capacity(n * kernel.weights().len());
        for p in 0..n as isize {
            starts.push(taps.len());
            match boundary {
                Boundary::Periodic => {
                    for u in -z..=z {
                        let src = (p + u).rem_euclid(n as isize) as usize;
                        taps.push((src, kernel.weight(u)));
                    }
                }
                Boundary::Clamp => {
                    let lo = (-z).max(-p);
                    let hi = z.min(n as isize - 1 - p);
                    let begin = taps.len();
                    for u in lo..=hi {
                        taps.push(((p + u) as usize, kernel.weight(u)));
                    }
                    if lo != -z || hi != z {
                        let kept: f64 = taps[begin..].iter().map(|t| t.1).sum();
                        for t in &mut taps[begin..] {
                            t.1 /= kept;
                        }
                    }
                }
            }
        }
        starts.push(taps.len());
        Self { starts, taps }
    }

    #[inline]
    fn at(&self, p: usize) -> &[(usize, f64)] {
        &self.taps[self.starts[p]..self.starts[p + 1]]
    }
}

fn check_axis(n: usize, sigma: f64, boundary: Boundary, axis: &str) -> Result<()> {
    if n == 1 && boundary == Boundary::Clamp && sigma >= 1.0 {
        return Err(Error::Domain(format!(
            "cannot filter degenerate clamped {axis} axis of length 1 with sigma {sigma}"
        )));
    }
    Ok(())
}

/// Filters a 1D sequence with the given boundary treatment.
pub fn filter_line(values: &[f64], kernel: &GaussianKernel1D, boundary: Boundary) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Ok(Vec::new());
    }
    check_axis(values.len(), kernel.sigma(), boundary, "line")?;
    let stencil = AxisStencil::new(kernel, values.len(), boundary);
    Ok((0..values.len())
        .map(|p| {
            stencil
                .at(p)
                .iter()
                .fold(0.0, |acc, &(src, w)| acc + w * values[src])
        })
        .collect())
}

/// Filters one axis of a field (`axis` 0 = x, 1 = y, 2 = z).
pub fn filter_axis(field: &ScalarField3D, kernel: &GaussianKernel1D, axis: usize) -> Result<ScalarField3D> {
    if axis > 2 {
        return Err(Error::Domain(format!("axis {axis} out of range")));
    }
    let grid = *field.grid();
    let [nx, ny, _] = grid.dims();
    let n = grid.dims()[axis];
    let boundary = grid.boundary()[axis];
    check_axis(n, kernel.sigma(), boundary, ["x", "y", "z"][axis])?;
    let stencil = AxisStencil::new(kernel, n, boundary);
    let src = field.data();
    let mut out = vec![0.0; grid.len()];
    let plane = nx * ny;
    match axis {
        0 => out.par_chunks_mut(nx).enumerate().for_each(|(row, dst)| {
            let line = &src[row * nx..(row + 1) * nx];
            for (i, d) in dst.iter_mut().enumerate() {
                *d = stencil.at(i).iter().fold(0.0, |acc, &(s, w)| acc + w * line[s]);
            }
        }),
        1 => out.par_chunks_mut(plane).enumerate().for_each(|(k, dst)| {
            let base = &src[k * plane..(k + 1) * plane];
            for j in 0..ny {
                let row = &mut dst[j * nx..(j + 1) * nx];
                for &(s, w) in stencil.at(j) {
                    let from = &base[s * nx..(s + 1) * nx];
                    for (d, v) in row.iter_mut().zip(from) {
                        *d += w * v;
                    }
                }
            }
        }),
        2 => out.par_chunks_mut(plane).enumerate().for_each(|(k, dst)| {
            for &(s, w) in stencil.at(k) {
                let from = &src[s * plane..(s + 1) * plane];
                for (d, v) in dst.iter_mut().zip(from) {
                    *d += w * v;
                }
            }
        }),
        _ => unreachable!(),
    }
    Ok(ScalarField3D::from_parts_unchecked(grid, out))
}

/// Separable 3D Gaussian filter using the boundary modes of the field's grid.
pub fn filter_field(field: &ScalarField3D, sigma: f64) -> Result<ScalarField3D> {
    let kernel = GaussianKernel1D::new(sigma)?;
    filter_with_kernel(field, &kernel)
}

pub fn filter_with_kernel(field: &ScalarField3D, kernel: &GaussianKernel1D) -> Result<ScalarField3D> {
    let grid = field.grid();
    for axis in 0..3 {
        check_axis(
            grid.dims()[axis],
            kernel.sigma(),
            grid.boundary()[axis],
            ["x", "y", "z"][axis],
        )?;
    }
    let fx = filter_axis(field, kernel, 0)?;
    let fy = filter_axis(&fx, kernel, 1)?;
    filter_axis(&fy, kernel, 2)
}

fn check_positive_density(rho: &ScalarField3D) -> Result<()> {
    if let Some(idx) = rho.data().iter().position(|&v| v <= 0.0) {
        return Err(Error::validation(
            bundle::RHO,
            idx,
            format!("non-positive density {}", rho.data()[idx]),
        ));
    }
    Ok(())
}

/// Favre filter given an already filtered density.
fn favre_with(rho: &ScalarField3D, rho_bar: &ScalarField3D, phi: &ScalarField3D, kernel: &GaussianKernel1D) -> Result<ScalarField3D> {
    let weighted = rho.map_binary(phi, |r, p| r * p)?;
    filter_with_kernel(&weighted, kernel)?.map_binary(rho_bar, |num, den| num / den)
}

/// Returns `(filter(rho), filter(rho * phi) / filter(rho))`.
pub fn favre_filter(
    rho: &ScalarField3D,
    phi: &ScalarField3D,
    sigma: f64,
) -> Result<(ScalarField3D, ScalarField3D)> {
    rho.check_same_grid(phi)?;
    check_positive_density(rho)?;
    let kernel = GaussianKernel1D::new(sigma)?;
    let rho_bar = filter_with_kernel(rho, &kernel)?;
    let phi_tilde = favre_with(rho, &rho_bar, phi, &kernel)?;
    Ok((rho_bar, phi_tilde))
}

/// Point-samples every `dsf`-th grid point along each axis, starting at 0.
pub fn downsample(field: &ScalarField3D, dsf: usize) -> Result<ScalarField3D> {
    if dsf < 1 {
        return Err(Error::Domain("downsampling factor must be at least 1".into()));
    }
    let grid = field.grid();
    let [nx, ny, nz] = grid.dims();
    let coarse_dims = [nx.div_ceil(dsf), ny.div_ceil(dsf), nz.div_ceil(dsf)];
    let coarse = grid.with_dims_and_spacing(coarse_dims, grid.dx() * dsf as f64);
    let mut data = Vec::with_capacity(coarse.len());
    for k in (0..nz).step_by(dsf) {
        for j in (0..ny).step_by(dsf) {
            for i in (0..nx).step_by(dsf) {
                data.push(field.data()[grid.linear_index(i, j, k)]);
            }
        }
    }
    Ok(ScalarField3D::from_parts_unchecked(coarse, data))
}

/// Filter width and downsampling factor of one emulated LES resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LesParams {
    /// Gaussian standard deviation in source-grid cells.
    pub sigma: f64,
    /// Downsampling factor.
    pub dsf: usize,
}

impl LesParams {
    pub fn new(sigma: f64, dsf: usize) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        if dsf < 1 {
            return Err(Error::Domain("DSF must be at least 1".into()));
        }
        Ok(Self { sigma, dsf })
    }

    pub fn coarse_spacing(&self, fine_dx: f64) -> f64 {
        self.dsf as f64 * fine_dx
    }

    pub fn coarse_dims(&self, fine: [usize; 3]) -> [usize; 3] {
        fine.map(|n| n.div_ceil(self.dsf))
    }

    /// `delta1 / coarse_dx + 1`.
    pub fn resolution_index(&self, delta1: f64, fine_dx: f64) -> f64 {
        delta1 / self.coarse_spacing(fine_dx) + 1.0
    }
}

/// Turns a resolved snapshot into emulated LES data on the coarse grid.
pub fn emulate_les(
    snapshot: &SnapshotBundle,
    params: LesParams,
    mix: &MixtureConstants,
) -> Result<DerivedBundle> {
    snapshot.validate()?;
    let kernel = GaussianKernel1D::new(params.sigma)?;
    let rho = snapshot.field(bundle::RHO)?;
    let rho_bar = filter_with_kernel(rho, &kernel)?;
    let y_tilde = favre_with(rho, &rho_bar, snapshot.field(bundle::Y_H2)?, &kernel)?;
    let xi_tilde = favre_with(rho, &rho_bar, snapshot.field(bundle::XI)?, &kernel)?;
    let omega_h2_bar = filter_with_kernel(snapshot.field(bundle::OMEGA_H2)?, &kernel)?;

    let rho_bar = downsample(&rho_bar, params.dsf)?;
    let y_tilde = downsample(&y_tilde, params.dsf)?;
    let xi_tilde = downsample(&xi_tilde, params.dsf)?;
    let omega_bar = thermo::burning_rate(&downsample(&omega_h2_bar, params.dsf)?)?;

    let progress = thermo::progress_variable(&y_tilde, &xi_tilde, mix)?;
    let phi_tilde = thermo::equivalence_ratio(&xi_tilde, mix)?;

    let grid: GridSpec = *rho_bar.grid();
    let mut fields = FieldMap::new();
    fields.insert(bundle::RHO_BAR.into(), rho_bar);
    fields.insert(bundle::Y_H2_TILDE.into(), y_tilde);
    fields.insert(bundle::XI_TILDE.into(), xi_tilde);
    fields.insert(bundle::OMEGA_BAR.into(), omega_bar);
    fields.insert(bundle::C_TILDE.into(), progress.field);
    fields.insert(bundle::PHI_TILDE.into(), phi_tilde);

    Ok(DerivedBundle {
        case_id: snapshot.case_id.clone(),
        time_index: snapshot.time_index,
        phi_g: snapshot.phi_g,
        fine_dx: snapshot.grid.dx(),
        params,
        thickness: None,
        grid,
        fields,
        progress_diagnostics: progress.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(dims: [usize; 3], boundary: [Boundary; 3], seed: u64) -> ScalarField3D {
        let grid = GridSpec::new(dims, 1.0, boundary).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ScalarField3D::new(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn kernel_tap_counts() {
        let k = build_kernel(4.0).unwrap();
        assert_eq!(k.half_width(), 16);
        assert_eq!(k.weights().len(), 33);
        assert!((k.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(build_kernel(0.5).unwrap().weights().len(), 5);
        assert!(matches!(build_kernel(0.0), Err(Error::Domain(_))));
        assert!(matches!(build_kernel(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn kernel_central_weight_sigma_one() {
        let expected = 1.0
            / (1.0 + 2.0 * ((-0.5f64).exp() + (-2.0f64).exp() + (-4.5f64).exp() + (-8.0f64).exp()));
        let k = build_kernel(1.0).unwrap();
        assert!((k.weight(0) - expected).abs() < 1e-15);
        assert!((k.weight(0) - 0.398944).abs() < 1e-6);
    }

    #[test]
    fn kernel_invariants() {
        for sigma in [0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0] {
            let k = build_kernel(sigma).unwrap();
            let z = k.half_width() as isize;
            assert!((k.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for u in 0..=z {
                assert_eq!(k.weight(u).to_bits(), k.weight(-u).to_bits());
            }
            assert!(k.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn clamp_renormalizes_at_edges() {
        let k = build_kernel(2.0).unwrap();
        let ones = vec![1.0; 5];
        let out = filter_line(&ones, &k, Boundary::Clamp).unwrap();
        assert!(out.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn degenerate_clamped_axis() {
        let grid = GridSpec::uniform([4, 1, 4], 1.0, Boundary::Clamp).unwrap();
        let f = ScalarField3D::constant(grid, 1.0).unwrap();
        assert!(matches!(filter_field(&f, 1.0), Err(Error::Domain(_))));
        assert!(filter_field(&f, 0.5).is_ok());
        let periodic = GridSpec::uniform([4, 1, 4], 1.0, Boundary::Periodic).unwrap();
        let f = ScalarField3D::constant(periodic, 1.0).unwrap();
        assert!(filter_field(&f, 3.0).is_ok());
    }

    #[test]
    fn favre_two_point_hand_value() {
        // Left point of rho=[1,3], phi=[0,1], sigma=0.5, clamped: only the taps
        // u=0 and u=+1 survive.
        let grid = GridSpec::uniform([2, 1, 1], 1.0, Boundary::Clamp).unwrap();
        let rho = ScalarField3D::new(grid, vec![1.0, 3.0]).unwrap();
        let phi = ScalarField3D::new(grid, vec![0.0, 1.0]).unwrap();
        let (rho_bar, phi_tilde) = favre_filter(&rho, &phi, 0.5).unwrap();
        let e = (-2.0f64).exp();
        let rho_expected = (1.0 + 3.0 * e) / (1.0 + e);
        let phi_expected = (3.0 * e) / (1.0 + 3.0 * e);
        assert!((rho_bar.data()[0] - rho_expected).abs() < 1e-14);
        assert!((phi_tilde.data()[0] - phi_expected).abs() < 1e-14);
        assert!((phi_tilde.data()[0] - 0.288766).abs() < 1e-6);
    }

    #[test]
    fn favre_special_cases() {
        let b = [Boundary::Clamp, Boundary::Periodic, Boundary::Periodic];
        let phi = random_field([9, 9, 9], b, 3);
        let grid = *phi.grid();
        let rho = ScalarField3D::constant(grid, 1.7).unwrap();
        let (_, tilde) = favre_filter(&rho, &phi, 1.5).unwrap();
        let plain = filter_field(&phi, 1.5).unwrap();
        for (a, p) in tilde.data().iter().zip(plain.data()) {
            assert!((a - p).abs() < 1e-12);
        }

        let rho = random_field([9, 9, 9], b, 4).map(|v| 1.5 + v).unwrap();
        let c = ScalarField3D::constant(grid, 0.3).unwrap();
        let (_, tilde) = favre_filter(&rho, &c, 2.0).unwrap();
        assert!(tilde.data().iter().all(|v| (v - 0.3).abs() < 1e-12));

        let bad = rho.map(|v| v - 10.0).unwrap();
        assert!(matches!(favre_filter(&bad, &c, 2.0), Err(Error::Validation { .. })));
    }

    #[test]
    fn favre_unit_density() {
        let phi = random_field([7, 8, 9], [Boundary::Periodic; 3], 11);
        let one = ScalarField3D::constant(*phi.grid(), 1.0).unwrap();
        let (rho_bar, tilde) = favre_filter(&one, &phi, 2.0).unwrap();
        let plain = filter_field(&phi, 2.0).unwrap();
        assert!(rho_bar.data().iter().all(|v| (v - 1.0).abs() < 1e-12));
        for (a, p) in tilde.data().iter().zip(plain.data()) {
            assert!((a - p).abs() < 1e-12);
        }
    }

    #[test]
    fn downsample_examples() {
        let f = random_field([5, 4, 3], [Boundary::Periodic; 3], 1);
        assert_eq!(downsample(&f, 1).unwrap(), f);

        let grid = GridSpec::uniform([4, 1, 1], 0.1, Boundary::Clamp).unwrap();
        let line = ScalarField3D::new(grid, vec![10.0, 11.0, 12.0, 13.0]).unwrap();
        let d = downsample(&line, 2).unwrap();
        assert_eq!(d.data(), &[10.0, 12.0]);
        assert!((d.grid().dx() - 0.2).abs() < 1e-15);

        let big = ScalarField3D::constant(GridSpec::uniform([64; 3], 1e-4, Boundary::Periodic).unwrap(), 0.0).unwrap();
        let d = downsample(&big, 4).unwrap();
        assert_eq!(d.grid().dims(), [16; 3]);
        assert!((d.grid().dx() - 4e-4).abs() < 1e-18);

        let odd = downsample(&f, 2).unwrap();
        assert_eq!(odd.grid().dims(), [3, 2, 2]);
        assert!(matches!(downsample(&f, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn filtering_is_thread_count_independent() {
        let f = random_field([12, 10, 9], [Boundary::Clamp, Boundary::Periodic, Boundary::Periodic], 5);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| filter_field(&f, 2.0).unwrap());
        let b = four.install(|| filter_field(&f, 2.0).unwrap());
        for (x, y) in a.data().iter().zip(b.data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn filter_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0, sigma in 0.5f64..3.0) {
            let bc = [Boundary::Clamp, Boundary::Periodic, Boundary::Clamp];
            let f = random_field([9; 3], bc, seed);
            let g = random_field([9; 3], bc, seed + 7_000);
            let combo = f.map_binary(&g, |x, y| a * x + b * y).unwrap();
            let lhs = filter_field(&combo, sigma).unwrap();
            let ff = filter_field(&f, sigma).unwrap();
            let fg = filter_field(&g, sigma).unwrap();
            for ((l, x), y) in lhs.data().iter().zip(ff.data()).zip(fg.data()) {
                prop_assert!((l - (a * x + b * y)).abs() < 1e-10);
            }
        }

        #[test]
        fn axis_passes_commute(seed in 0u64..1000, sigma in 0.5f64..3.0) {
            let f = random_field([8, 7, 6], [Boundary::Clamp, Boundary::Periodic, Boundary::Periodic], seed);
            let k = build_kernel(sigma).unwrap();
            let xy = filter_axis(&filter_axis(&f, &k, 0).unwrap(), &k, 1).unwrap();
            let yx = filter_axis(&filter_axis(&f, &k, 1).unwrap(), &k, 0).unwrap();
            for (a, b) in xy.data().iter().zip(yx.data()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn filter_respects_bounds(seed in 0u64..1000, sigma in 0.5f64..4.0) {
            let f = random_field([9; 3], [Boundary::Clamp, Boundary::Periodic, Boundary::Clamp], seed);
            let (lo, hi) = (f.min(), f.max());
            let out = filter_field(&f, sigma).unwrap();
            for &v in out.data() {
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }

        #[test]
        fn periodic_filter_conserves_sum(seed in 0u64..1000, sigma in 0.5f64..4.0) {
            let f = random_field([9; 3], [Boundary::Periodic; 3], seed).map(|v| v + 2.0).unwrap();
            let out = filter_field(&f, sigma).unwrap();
            prop_assert!(((out.sum() - f.sum()) / f.sum()).abs() < 1e-8);
        }
    }
}
