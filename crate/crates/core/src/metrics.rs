//! Error metrics, masked 2D histograms and grouped NMAE reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::ScalarField3D;

/// Progress-variable window used for histogram masking.
pub const MASK_BOUNDS: (f64, f64) = (0.05, 0.95);

const PAIRWISE_BLOCK: usize = 256;
const PARALLEL_CUTOFF: usize = 1 << 16;

/// Sum with a fixed binary-tree order. Halves are reduced in parallel above a
/// cutoff; the split points never depend on the thread count.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    if values.len() >= PARALLEL_CUTOFF {
        let (x, y) = rayon::join(|| pairwise_sum(a), || pairwise_sum(b));
        x + y
    } else {
        pairwise_sum(a) + pairwise_sum(b)
    }
}

fn check_lengths(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!(
            "prediction has {} points, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Degenerate("empty input".into()));
    }
    Ok(())
}

/// Mean absolute error normalized by the mean of the truth.
pub fn nmae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let n = truth.len() as f64;
    let mean_truth = pairwise_sum(truth) / n;
    if !(mean_truth > 0.0) {
        return Err(Error::Degenerate(format!(
            "mean of truth is {mean_truth}; NMAE is undefined"
        )));
    }
    let abs: Vec<f64> = truth.iter().zip(pred).map(|(t, p)| (t - p).abs()).collect();
    Ok(pairwise_sum(&abs) / n / mean_truth)
}

/// NMAE restricted to points whose progress variable lies in [`MASK_BOUNDS`].
pub fn nmae_masked(pred: &[f64], truth: &[f64], c: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    check_lengths(c, truth)?;
    let (p, t): (Vec<f64>, Vec<f64>) = pred
        .iter()
        .zip(truth)
        .zip(c)
        .filter(|(_, &c)| in_mask(c))
        .map(|((&p, &t), _)| (p, t))
        .unzip();
    if t.is_empty() {
        return Err(Error::Degenerate("no points inside the progress-variable mask".into()));
    }
    nmae(&p, &t)
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let sq: Vec<f64> = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).collect();
    Ok((pairwise_sum(&sq) / truth.len() as f64).sqrt())
}

#[inline]
fn in_mask(c: f64) -> bool {
    (MASK_BOUNDS.0..=MASK_BOUNDS.1).contains(&c)
}

/// Prediction, truth and progress variable for one evaluated solution.
#[derive(Debug, Clone)]
pub struct EvalPair {
    pub prediction: ScalarField3D,
    pub truth: ScalarField3D,
    pub c: ScalarField3D,
    /// Maximum burning rate over the evaluation dataset.
    pub normalization: f64,
}

impl EvalPair {
    pub fn new(
        prediction: ScalarField3D,
        truth: ScalarField3D,
        c: ScalarField3D,
        normalization: f64,
    ) -> Result<Self> {
        prediction.check_same_grid(&truth)?;
        truth.check_same_grid(&c)?;
        if !(normalization > 0.0) || !normalization.is_finite() {
            return Err(Error::Degenerate(format!(
                "normalization constant must be positive, got {normalization}"
            )));
        }
        Ok(Self {
            prediction,
            truth,
            c,
            normalization,
        })
    }

    pub fn nmae(&self) -> Result<f64> {
        nmae(self.prediction.data(), self.truth.data())
    }

    pub fn nmae_masked(&self) -> Result<f64> {
        nmae_masked(self.prediction.data(), self.truth.data(), self.c.data())
    }
}

/// Counts of (truth, prediction) pairs on a uniform grid over [0, 1]².
///
/// `counts[t][p]` holds points whose normalized truth falls in bin `t` and
/// normalized prediction in bin `p`. Values outside [0, 1] land in the edge bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Hist2D {
    pub bins: usize,
    pub counts: Vec<Vec<u64>>,
    pub mask: (f64, f64),
}

impl Hist2D {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|b| b as f64 / self.bins as f64).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("truth_bin_lo,truth_bin_hi");
        for p in 0..self.bins {
            write!(out, ",pred_{p}").unwrap();
        }
        out.push('\n');
        let edges = self.edges();
        for (t, row) in self.counts.iter().enumerate() {
            write!(out, "{},{}", edges[t], edges[t + 1]).unwrap();
            for c in row {
                write!(out, ",{c}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn bin_of(v: f64, bins: usize) -> usize {
    if v >= 1.0 {
        bins - 1
    } else if v <= 0.0 {
        0
    } else {
        ((v * bins as f64) as usize).min(bins - 1)
    }
}

pub fn hist2d_masked(pair: &EvalPair, bins: usize) -> Result<Hist2D> {
    if bins < 2 {
        return Err(Error::Domain(format!("need at least 2 bins, got {bins}")));
    }
    let mut counts = vec![vec![0u64; bins]; bins];
    let norm = pair.normalization;
    for ((&p, &t), &c) in pair
        .prediction
        .data()
        .iter()
        .zip(pair.truth.data())
        .zip(pair.c.data())
    {
        if in_mask(c) {
            counts[bin_of(t / norm, bins)][bin_of(p / norm, bins)] += 1;
        }
    }
    Ok(Hist2D {
        bins,
        counts,
        mask: MASK_BOUNDS,
    })
}

/// Type-7 (linear interpolation) sample quantile.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Grouping key of a report row.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GroupKey {
    pub phi_g: f64,
    pub sigma: f64,
    pub dsf: usize,
}

impl GroupKey {
    fn sort_key(&self) -> (u64, u64, usize) {
        (self.phi_g.to_bits(), self.sigma.to_bits(), self.dsf)
    }
}

/// Statistics of one group. `None` fields mean no snapshot produced a value.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub key: GroupKey,
    pub snapshots: usize,
    pub nmae: Vec<f64>,
    pub mean: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub groups: Vec<GroupStats>,
    pub histograms: Vec<(GroupKey, Hist2D)>,
}

/// Options of [`report`].
#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub bins: usize,
    pub masked_nmae: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            bins: 50,
            masked_nmae: false,
        }
    }
}

pub fn report(pairs: &[(GroupKey, EvalPair)], opts: ReportOptions) -> Result<Report> {
    let mut grouped: BTreeMap<(u64, u64, usize), (GroupKey, Vec<&EvalPair>)> = BTreeMap::new();
    for (key, pair) in pairs {
        grouped
            .entry(key.sort_key())
            .or_insert_with(|| (*key, Vec::new()))
            .1
            .push(pair);
    }
    let mut groups = Vec::with_capacity(grouped.len());
    let mut histograms = Vec::with_capacity(grouped.len());
    for (_, (key, members)) in grouped {
        let mut values = Vec::with_capacity(members.len());
        let mut hist: Option<Hist2D> = None;
        for pair in &members {
            let v = if opts.masked_nmae {
                pair.nmae_masked()
            } else {
                pair.nmae()
            };
            match v {
                Ok(v) => values.push(v),
                Err(Error::Degenerate(_)) => {}
                Err(e) => return Err(e),
            }
            let h = hist2d_masked(pair, opts.bins)?;
            hist = Some(match hist {
                None => h,
                Some(mut acc) => {
                    for (ra, rb) in acc.counts.iter_mut().zip(&h.counts) {
                        for (a, b) in ra.iter_mut().zip(rb) {
                            *a += b;
                        }
                    }
                    acc
                }
            });
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let (mean, q1, q3) = if sorted.is_empty() {
            (None, None, None)
        } else {
            (
                Some(values.iter().sum::<f64>() / values.len() as f64),
                Some(quantile(&sorted, 0.25)),
                Some(quantile(&sorted, 0.75)),
            )
        };
        groups.push(GroupStats {
            key,
            snapshots: members.len(),
            nmae: values,
            mean,
            q1,
            q3,
        });
        if let Some(h) = hist {
            histograms.push((key, h));
        }
    }
    Ok(Report { groups, histograms })
}

/// At most six decimals, trailing zeros removed.
fn short(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into())
}

impl Report {
    /// `phi_g,sigma,dsf,snapshots,evaluated,nmae_mean,nmae_q1,nmae_q3`
    pub fn nmae_csv(&self) -> String {
        let mut out = String::from("phi_g,sigma,dsf,snapshots,evaluated,nmae_mean,nmae_q1,nmae_q3\n");
        for g in &self.groups {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                g.key.phi_g,
                g.key.sigma,
                g.key.dsf,
                g.snapshots,
                g.nmae.len(),
                opt(g.mean),
                opt(g.q1),
                opt(g.q3)
            )
            .unwrap();
        }
        out
    }

    pub fn histogram_file_name(key: &GroupKey) -> String {
        format!("hist_phi{}_sigma{}_dsf{}.csv", short(key.phi_g), short(key.sigma), key.dsf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Boundary, GridSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn loop_nmae(pred: &[f64], truth: &[f64]) -> f64 {
        let mut s = 0.0;
        let mut m = 0.0;
        for i in 0..truth.len() {
            s += (truth[i] - pred[i]).abs();
            m += truth[i];
        }
        let n = truth.len() as f64;
        (s / n) / (m / n)
    }

    fn loop_rmse(pred: &[f64], truth: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..truth.len() {
            s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
        }
        (s / truth.len() as f64).sqrt()
    }

    fn field(values: Vec<f64>) -> ScalarField3D {
        let g = GridSpec::uniform([values.len(), 1, 1], 1.0, Boundary::Clamp).unwrap();
        ScalarField3D::new(g, values).unwrap()
    }

    #[test]
    fn nmae_examples() {
        assert_eq!(nmae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((nmae(&[1.1, 0.9], &[1.0, 1.0]).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(nmae(&[1.0], &[0.0]), Err(Error::Degenerate(_))));
        assert!(matches!(nmae(&[1.0], &[1.0, 2.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[3.0, 4.0], &[0.0, 0.0]).unwrap() - 3.5355339).abs() < 1e-6);
        assert!(matches!(rmse(&[], &[]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn metrics_match_loop_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let truth: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.0..10.0)).collect();
        let pred: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.0..10.0)).collect();
        assert!((nmae(&pred, &truth).unwrap() - loop_nmae(&pred, &truth)).abs() < 1e-12);
        assert!((rmse(&pred, &truth).unwrap() - loop_rmse(&pred, &truth)).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_large() {
        let v: Vec<f64> = (0..200_000).map(|i| (i % 17) as f64 * 0.25).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-6);
    }

    #[test]
    fn histogram_examples() {
        let pair = EvalPair::new(field(vec![0.5, 0.7]), field(vec![0.5, 0.7]), field(vec![0.0, 1.0]), 1.0).unwrap();
        assert_eq!(hist2d_masked(&pair, 10).unwrap().total(), 0);

        let pair = EvalPair::new(field(vec![0.5]), field(vec![0.5]), field(vec![0.5]), 1.0).unwrap();
        let h = hist2d_masked(&pair, 10).unwrap();
        assert_eq!(h.counts[5][5], 1);
        assert_eq!(h.total(), 1);

        let t = vec![0.05, 0.2, 0.33, 0.61, 0.99, 1.0];
        let pair = EvalPair::new(field(t.clone()), field(t), field(vec![0.5; 6]), 1.0).unwrap();
        let h = hist2d_masked(&pair, 10).unwrap();
        for (i, row) in h.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if i != j {
                    assert_eq!(c, 0);
                }
            }
        }
        assert_eq!(h.total(), 6);
        assert!(hist2d_masked(&pair, 1).is_err());
    }

    #[test]
    fn eval_pair_rejects_mismatch() {
        let err = EvalPair::new(field(vec![1.0]), field(vec![1.0, 2.0]), field(vec![0.5]), 1.0).unwrap_err();
        assert!(err.to_string().contains("1x1x1") && err.to_string().contains("2x1x1"));
    }

    #[test]
    fn quantile_type7() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert!((quantile(&s, 0.25) - 1.75).abs() < 1e-15);
        assert!((quantile(&s, 0.75) - 3.25).abs() < 1e-15);
        assert_eq!(quantile(&[2.5], 0.25), 2.5);
    }

    #[test]
    fn report_groups_and_quartiles() {
        let mut pairs = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut expected: BTreeMap<(u64, u64), Vec<f64>> = BTreeMap::new();
        for phi in [0.35f64, 0.4, 0.5, 0.6, 0.7] {
            for (sigma, dsf) in [(4.0f64, 2), (8.0, 4), (16.0, 8)] {
                let snaps = if phi == 0.4 { 3 } else { 1 };
                for _ in 0..snaps {
                    let t: Vec<f64> = (0..20).map(|_| rng.gen_range(0.1..1.0)).collect();
                    let p: Vec<f64> = t.iter().map(|v| v * rng.gen_range(0.8..1.2)).collect();
                    expected
                        .entry((phi.to_bits(), sigma.to_bits()))
                        .or_default()
                        .push(loop_nmae(&p, &t));
                    let key = GroupKey { phi_g: phi, sigma, dsf };
                    pairs.push((key, EvalPair::new(field(p), field(t), field(vec![0.5; 20]), 1.0).unwrap()));
                }
            }
        }
        let r = report(&pairs, ReportOptions::default()).unwrap();
        assert_eq!(r.groups.len(), 15);
        for g in &r.groups {
            let exp = &expected[&(g.key.phi_g.to_bits(), g.key.sigma.to_bits())];
            let mean = exp.iter().sum::<f64>() / exp.len() as f64;
            assert!((g.mean.unwrap() - mean).abs() < 1e-12);
            if exp.len() == 1 {
                assert_eq!(g.q1, g.mean);
                assert_eq!(g.q3, g.mean);
            }
        }
        assert_eq!(r.nmae_csv().lines().count(), 16);
        assert_eq!(r.nmae_csv(), report(&pairs, ReportOptions::default()).unwrap().nmae_csv());
    }

    #[test]
    fn undefined_group_is_absent_not_zero() {
        let key = GroupKey { phi_g: 0.4, sigma: 4.0, dsf: 2 };
        let pair = EvalPair::new(field(vec![0.0]), field(vec![0.0]), field(vec![0.5]), 1.0).unwrap();
        let r = report(&[(key, pair)], ReportOptions::default()).unwrap();
        assert_eq!(r.groups[0].mean, None);
        assert!(r.nmae_csv().contains(",NA,NA,NA"));
    }

    proptest! {
        #[test]
        fn nmae_scale_equivariant(
            t in proptest::collection::vec(0.1f64..10.0, 1..50),
            k in 0.01f64..100.0,
        ) {
            let p: Vec<f64> = t.iter().map(|v| v * 1.1 + 0.05).collect();
            let kp: Vec<f64> = p.iter().map(|v| v * k).collect();
            let kt: Vec<f64> = t.iter().map(|v| v * k).collect();
            prop_assert!((nmae(&kp, &kt).unwrap() - nmae(&p, &t).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn rmse_symmetric(a in proptest::collection::vec(-10.0f64..10.0, 1..50)) {
            let b: Vec<f64> = a.iter().map(|v| v * 0.5 - 1.0).collect();
            prop_assert_eq!(rmse(&a, &b).unwrap().to_bits(), rmse(&b, &a).unwrap().to_bits());
        }

        #[test]
        fn histogram_total_is_masked_count(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 64;
            let t: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..2.5)).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.1..1.1)).collect();
            let masked = c.iter().filter(|&&v| (0.05..=0.95).contains(&v)).count() as u64;
            let pair = EvalPair::new(field(p), field(t), field(c), 2.0).unwrap();
            prop_assert_eq!(hist2d_masked(&pair, 7).unwrap().total(), masked);
        }
    }
}
