//! Training-corpus construction: snapshot-level test split, random cube
//! extraction, orientation augmentation and the train/validation split.
//!
//! Randomness comes from ChaCha8, a counter-based generator. Every snapshot
//! gets its own stream (`seed`, stream = snapshot ordinal), so extraction can
//! run in any order and still produce the same cubes.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::DerivedBundle;
use crate::error::{Error, Result};

pub const DEFAULT_EDGE: usize = 16;
pub const DEFAULT_CUBES_PER_SOLUTION: usize = 40;
pub const DEFAULT_VAL_FRACTION: f64 = 0.10;
/// Probability that augmentation transforms a sample.
pub const AUGMENT_PROBABILITY: f64 = 0.25;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SnapshotRole {
    Test,
    TrainVal,
}

/// Time indices that are multiples of 10 are held out for testing.
pub fn split_snapshots(indices: &[u32]) -> Vec<SnapshotRole> {
    indices
        .iter()
        .map(|&t| if t % 10 == 0 { SnapshotRole::Test } else { SnapshotRole::TrainVal })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u32)]
pub enum Split {
    Train = 0,
    Val = 1,
}

impl Split {
    pub fn tag(self) -> u32 {
        self as u32
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            0 => Some(Split::Train),
            1 => Some(Split::Val),
            _ => None,
        }
    }
}

/// Per-sample provenance stored alongside the channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeMeta {
    pub phi_g: f32,
    pub sigma: f32,
    pub dsf: f32,
    pub thickness_ratio: f32,
    pub case_id: u32,
    pub split: Split,
    pub time_index: u32,
    /// Ordinal of the cube within its source solution.
    pub cube_index: u32,
}

/// Channel order of a sample.
pub const CHANNEL_NAMES: [&str; 4] = ["c_tilde", "phi_tilde", "thickness_ratio", "omega_bar"];

/// An `edge`³ sample: three input channels and the target burning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeSample {
    pub edge: usize,
    /// `[c_tilde, phi_tilde, thickness_ratio, omega_bar]`, x fastest.
    pub channels: [Vec<f32>; 4],
    pub meta: CubeMeta,
}

impl CubeSample {
    pub fn new(edge: usize, channels: [Vec<f32>; 4], meta: CubeMeta) -> Result<Self> {
        let n = edge * edge * edge;
        if edge == 0 || channels.iter().any(|c| c.len() != n) {
            return Err(Error::Shape(format!(
                "cube channels must all hold {n} values for edge {edge}"
            )));
        }
        let sample = Self { edge, channels, meta };
        sample.validate()?;
        Ok(sample)
    }

    pub fn validate(&self) -> Result<()> {
        let ratio = &self.channels[2];
        let r0 = ratio[0];
        if !(r0 > 0.0 && r0 <= 1.0) || ratio.iter().any(|&v| v != r0) {
            return Err(Error::validation(
                CHANNEL_NAMES[2],
                0,
                "thickness ratio must be a constant in (0, 1]",
            ));
        }
        if let Some(i) = self.channels[3].iter().position(|&v| v < 0.0) {
            return Err(Error::validation(CHANNEL_NAMES[3], i, "burning rate must be non-negative"));
        }
        Ok(())
    }

    pub fn c_tilde(&self) -> &[f32] {
        &self.channels[0]
    }

    pub fn phi_tilde(&self) -> &[f32] {
        &self.channels[1]
    }

    pub fn omega_bar(&self) -> &[f32] {
        &self.channels[3]
    }
}

/// Draws `count` cubes with uniformly random corners (with replacement).
///
/// The derived bundle must carry flamelet thicknesses; their ratio fills the
/// third channel.
pub fn extract_cubes(
    bundle: &DerivedBundle,
    case_id: u32,
    count: usize,
    edge: usize,
    rng: &mut impl Rng,
) -> Result<Vec<CubeSample>> {
    if count == 0 {
        return Err(Error::Domain("cube count must be at least 1".into()));
    }
    if edge == 0 {
        return Err(Error::Domain("cube edge must be at least 1".into()));
    }
    let dims = bundle.grid.dims();
    if dims.iter().any(|&n| n < edge) {
        return Err(Error::Domain(format!(
            "domain {} is smaller than a {edge}^3 cube",
            bundle.grid.shape_string()
        )));
    }
    let thickness = bundle.thickness.ok_or_else(|| {
        Error::Format(format!(
            "derived bundle {}@{} has no flamelet thickness ratio",
            bundle.case_id, bundle.time_index
        ))
    })?;
    let ratio = thickness.ratio() as f32;
    let sources = [bundle.c_tilde()?, bundle.phi_tilde()?, bundle.omega_bar()?];
    let grid = bundle.grid;
    let n3 = edge * edge * edge;

    let mut out = Vec::with_capacity(count);
    for cube in 0..count {
        let corner = [
            rng.gen_range(0..=dims[0] - edge),
            rng.gen_range(0..=dims[1] - edge),
            rng.gen_range(0..=dims[2] - edge),
        ];
        let mut channels: [Vec<f32>; 4] = std::array::from_fn(|_| Vec::with_capacity(n3));
        for k in 0..edge {
            for j in 0..edge {
                let start = grid.linear_index(corner[0], corner[1] + j, corner[2] + k);
                let rows = [
                    &sources[0].data()[start..start + edge],
                    &sources[1].data()[start..start + edge],
                    &sources[2].data()[start..start + edge],
                ];
                channels[0].extend(rows[0].iter().map(|&v| v as f32));
                channels[1].extend(rows[1].iter().map(|&v| v as f32));
                channels[3].extend(rows[2].iter().map(|&v| v as f32));
            }
        }
        channels[2] = vec![ratio; n3];
        let meta = CubeMeta {
            phi_g: bundle.phi_g as f32,
            sigma: bundle.params.sigma as f32,
            dsf: bundle.params.dsf as f32,
            thickness_ratio: ratio,
            case_id,
            split: Split::Train,
            time_index: bundle.time_index,
            cube_index: cube as u32,
        };
        out.push(CubeSample::new(edge, channels, meta)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// A cube symmetry drawn by [`augment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    /// `quarter_turns` counter-clockwise 90° rotations about `axis`.
    Rotate { axis: Axis, quarter_turns: u8 },
    Flip(Axis),
}

impl Transform {
    pub fn draw(rng: &mut impl Rng) -> Self {
        if !rng.gen_bool(AUGMENT_PROBABILITY) {
            return Transform::Identity;
        }
        let axis = Axis::ALL[rng.gen_range(0..3)];
        if rng.gen_bool(0.5) {
            Transform::Rotate {
                axis,
                quarter_turns: rng.gen_range(1..=3),
            }
        } else {
            Transform::Flip(axis)
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            Transform::Rotate { axis, quarter_turns } => Transform::Rotate {
                axis,
                quarter_turns: (4 - quarter_turns % 4) % 4,
            },
            t => t,
        }
    }

    /// Source coordinates of destination `(i, j, k)` for one application.
    fn source(self, n: usize, (i, j, k): (usize, usize, usize)) -> (usize, usize, usize) {
        let m = n - 1;
        match self {
            Transform::Identity => (i, j, k),
            Transform::Flip(Axis::X) => (m - i, j, k),
            Transform::Flip(Axis::Y) => (i, m - j, k),
            Transform::Flip(Axis::Z) => (i, j, m - k),
            Transform::Rotate { axis, quarter_turns } => {
                let mut p = (i, j, k);
                for _ in 0..quarter_turns % 4 {
                    p = match axis {
                        Axis::Z => (p.1, m - p.0, p.2),
                        Axis::X => (p.0, p.2, m - p.1),
                        Axis::Y => (m - p.2, p.1, p.0),
                    };
                }
                p
            }
        }
    }

    pub fn apply(self, sample: &CubeSample) -> CubeSample {
        if self == Transform::Identity {
            return sample.clone();
        }
        let n = sample.edge;
        let lin = |(i, j, k): (usize, usize, usize)| i + n * (j + n * k);
        let mut perm = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    perm.push(lin(self.source(n, (i, j, k))));
                }
            }
        }
        let channels = std::array::from_fn(|c| perm.iter().map(|&s| sample.channels[c][s]).collect());
        CubeSample {
            edge: n,
            channels,
            meta: sample.meta,
        }
    }
}

/// With probability 0.25 applies one random rotation or flip to every channel.
pub fn augment(sample: &CubeSample, rng: &mut impl Rng) -> Result<CubeSample> {
    let n3 = sample.edge.pow(3);
    if sample.channels.iter().any(|c| c.len() != n3) {
        return Err(Error::Shape("augmentation requires a cubic sample".into()));
    }
    Ok(Transform::draw(rng).apply(sample))
}

/// Tags `round(fraction * count)` uniformly chosen samples as validation.
pub fn assign_train_val(count: usize, fraction: f64, seed: u64) -> Result<Vec<Split>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Domain(format!(
            "validation fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let n_val = (fraction * count as f64).round() as usize;
    let mut rng = rng_for(seed, u64::MAX);
    let mut splits = vec![Split::Train; count];
    for i in index::sample(&mut rng, count, n_val).into_iter() {
        splits[i] = Split::Val;
    }
    Ok(splits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{ThicknessPair, C_TILDE, OMEGA_BAR, PHI_TILDE};
    use crate::field::{Boundary, GridSpec, ScalarField3D};
    use crate::filter::LesParams;
    use crate::thermo::ProgressDiagnostics;
    use proptest::prelude::*;
    use rand::Rng;

    pub(crate) fn derived(dims: [usize; 3]) -> DerivedBundle {
        let grid = GridSpec::uniform(dims, 2e-4, Boundary::Periodic).unwrap();
        let mut fields = crate::bundle::FieldMap::new();
        let f = |scale: f64| ScalarField3D::from_fn(grid, |i, j, k| scale * (i + 3 * j + 7 * k) as f64).unwrap();
        fields.insert(C_TILDE.into(), f(0.001));
        fields.insert(PHI_TILDE.into(), f(0.002));
        fields.insert(OMEGA_BAR.into(), f(1.0));
        DerivedBundle {
            case_id: "phi040".into(),
            time_index: 3,
            phi_g: 0.4,
            fine_dx: 1e-4,
            params: LesParams::new(4.0, 2).unwrap(),
            thickness: Some(ThicknessPair { delta0: 0.5, delta1: 1.0 }),
            grid,
            fields,
            progress_diagnostics: ProgressDiagnostics::default(),
        }
    }

    fn random_sample(edge: usize, seed: u64) -> CubeSample {
        let mut rng = rng_for(seed, 0);
        let n3 = edge.pow(3);
        let mut channels: [Vec<f32>; 4] = std::array::from_fn(|_| (0..n3).map(|_| rng.gen::<f32>()).collect());
        channels[2] = vec![0.5; n3];
        let meta = CubeMeta {
            phi_g: 0.4,
            sigma: 4.0,
            dsf: 2.0,
            thickness_ratio: 0.5,
            case_id: 0,
            split: Split::Train,
            time_index: 1,
            cube_index: 0,
        };
        CubeSample::new(edge, channels, meta).unwrap()
    }

    #[test]
    fn snapshot_split() {
        let idx: Vec<u32> = (0..60).collect();
        let roles = split_snapshots(&idx);
        let tests: Vec<u32> = idx
            .iter()
            .zip(&roles)
            .filter(|(_, r)| **r == SnapshotRole::Test)
            .map(|(i, _)| *i)
            .collect();
        assert_eq!(tests, vec![0, 10, 20, 30, 40, 50]);
        assert_eq!(roles.iter().filter(|r| **r == SnapshotRole::TrainVal).count(), 54);
        assert_eq!(split_snapshots(&[7]), vec![SnapshotRole::TrainVal]);
        assert_eq!(split_snapshots(&[40]), vec![SnapshotRole::Test]);
    }

    #[test]
    fn exact_fit_domain_has_one_placement() {
        let b = derived([16, 16, 16]);
        let cubes = extract_cubes(&b, 0, 5, 16, &mut rng_for(1, 0)).unwrap();
        assert_eq!(cubes.len(), 5);
        for c in &cubes[1..] {
            assert_eq!(c.channels, cubes[0].channels);
        }
        assert_eq!(cubes[0].omega_bar()[0], 0.0);
    }

    #[test]
    fn extraction_is_deterministic_and_in_bounds() {
        let b = derived([24, 20, 18]);
        let a = extract_cubes(&b, 2, 40, 16, &mut rng_for(9, 3)).unwrap();
        let again = extract_cubes(&b, 2, 40, 16, &mut rng_for(9, 3)).unwrap();
        assert_eq!(a, again);
        assert_eq!(a.len(), 40);
        for c in &a {
            // omega = i + 3j + 7k encodes the corner; its max fits inside the domain.
            let max = c.omega_bar().iter().copied().fold(0.0f32, f32::max);
            assert!(max <= (23 + 3 * 19 + 7 * 17) as f32);
            assert!(c.channels[2].iter().all(|&v| v == 0.5));
            assert_eq!(c.meta.case_id, 2);
        }
    }

    #[test]
    fn extraction_errors() {
        let b = derived([12, 16, 16]);
        assert!(matches!(extract_cubes(&b, 0, 1, 16, &mut rng_for(0, 0)), Err(Error::Domain(_))));
        let mut b = derived([16, 16, 16]);
        b.thickness = None;
        assert!(extract_cubes(&b, 0, 1, 16, &mut rng_for(0, 0)).is_err());
    }

    #[test]
    fn rotation_has_order_four() {
        let s = random_sample(5, 1);
        for axis in Axis::ALL {
            let r = Transform::Rotate { axis, quarter_turns: 1 };
            let mut t = s.clone();
            for step in 0..4 {
                t = r.apply(&t);
                if step < 3 {
                    assert_ne!(t.channels[0], s.channels[0]);
                }
            }
            assert_eq!(t, s);
        }
    }

    #[test]
    fn flip_is_an_involution() {
        let s = random_sample(4, 2);
        for axis in Axis::ALL {
            let f = Transform::Flip(axis);
            assert_eq!(f.apply(&f.apply(&s)), s);
        }
    }

    #[test]
    fn rotations_are_proper() {
        // A quarter turn about z maps +x onto +y.
        let n = 3;
        let mut channels: [Vec<f32>; 4] = std::array::from_fn(|_| vec![0.0; 27]);
        channels[2] = vec![1.0; 27];
        channels[0][2 + 3] = 1.0; // (2, 1, 0)
        let meta = random_sample(3, 0).meta;
        let s = CubeSample::new(n, channels, meta).unwrap();
        let r = Transform::Rotate { axis: Axis::Z, quarter_turns: 1 }.apply(&s);
        assert_eq!(r.channels[0][1 + 2 * 3], 1.0); // (1, 2, 0)
    }

    #[test]
    fn transform_frequency() {
        let mut rng = rng_for(2024, 0);
        let draws = 100_000;
        let transformed = (0..draws)
            .filter(|_| Transform::draw(&mut rng) != Transform::Identity)
            .count();
        let frac = transformed as f64 / draws as f64;
        assert!((frac - 0.25).abs() < 0.01, "{frac}");
    }

    #[test]
    fn train_val_examples() {
        let s = assign_train_val(32_400, 0.1, 5).unwrap();
        assert_eq!(s.iter().filter(|&&v| v == Split::Val).count(), 3_240);
        let s = assign_train_val(10, 0.1, 5).unwrap();
        assert_eq!(s.iter().filter(|&&v| v == Split::Val).count(), 1);
        assert_eq!(assign_train_val(500, 0.1, 77).unwrap(), assign_train_val(500, 0.1, 77).unwrap());
        assert!(assign_train_val(10, 0.0, 1).is_err());
        assert!(assign_train_val(10, 1.0, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn augmentation_is_a_permutation(seed in 0u64..10_000) {
            let s = random_sample(4, seed);
            let mut rng = rng_for(seed, 1);
            let t = augment(&s, &mut rng).unwrap();
            for c in 0..4 {
                let mut a = s.channels[c].clone();
                let mut b = t.channels[c].clone();
                a.sort_by(f32::total_cmp);
                b.sort_by(f32::total_cmp);
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn inverse_undoes_transform(seed in 0u64..10_000) {
            let s = random_sample(3, seed);
            let mut rng = rng_for(seed, 2);
            for _ in 0..8 {
                let t = Transform::draw(&mut rng);
                prop_assert_eq!(t.inverse().apply(&t.apply(&s)), s.clone());
            }
        }
    }
}
