//! Classical parameter heuristics: the first minimum of the average mutual
//! information for `tau` and false nearest neighbors for `m`.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighbors::NeighborIndex;
use crate::series::{build_from_slice, ReconstructionParams, TimeSeries};

pub const DEFAULT_BINS: usize = 32;
pub const DEFAULT_RTOL: f64 = 15.0;
pub const DEFAULT_ATOL: f64 = 2.0;
pub const DEFAULT_FNN_THRESHOLD: f64 = 0.01;

/// A local minimum of the AMI curve only counts if the curve later climbs
/// back above it by this fraction of its drop from `tau = 1`. Fluctuations
/// on a decayed tail do not.
pub const AMI_MIN_RISE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicResult {
    /// The selected `tau` or `m`; `None` when the heuristic failed.
    pub value: Option<usize>,
    /// `(parameter, statistic)` for every parameter tried.
    pub diagnostic_curve: Vec<(usize, f64)>,
    pub status: HeuristicStatus,
}

impl HeuristicResult {
    fn new(value: Option<usize>, diagnostic_curve: Vec<(usize, f64)>) -> Self {
        let status = if value.is_some() {
            HeuristicStatus::Ok
        } else {
            HeuristicStatus::Failed
        };
        Self {
            value,
            diagnostic_curve,
            status,
        }
    }
}

/// Histogram mutual information between `x[j]` and `x[j - tau]`, with
/// `bins` equal-width bins spanning the range of the whole series.
pub fn histogram_ami(x: &[f64], tau: usize, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::InvalidParameter(format!("bins must be >= 2, got {bins}")));
    }
    if tau == 0 || tau >= x.len() {
        return Err(Error::SeriesTooShort {
            required: tau + 1,
            available: x.len(),
        });
    }
    let labels = bin_labels(x, bins)?;
    Ok(binned_mi(&labels, tau, bins))
}

fn bin_labels(x: &[f64], bins: usize) -> Result<Vec<usize>> {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if !(hi > lo) {
        return Err(Error::DegenerateData("series is constant".into()));
    }
    let width = hi - lo;
    Ok(x.iter()
        .map(|&v| (((v - lo) / width * bins as f64) as usize).min(bins - 1))
        .collect())
}

fn binned_mi(labels: &[usize], tau: usize, bins: usize) -> f64 {
    let n = labels.len() - tau;
    let mut joint = vec![0u64; bins * bins];
    let mut now = vec![0u64; bins];
    let mut past = vec![0u64; bins];
    for j in tau..labels.len() {
        let (a, b) = (labels[j], labels[j - tau]);
        joint[a * bins + b] += 1;
        now[a] += 1;
        past[b] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c > 0 {
                let c = c as f64;
                mi += c / nf * (c * nf / (now[a] as f64 * past[b] as f64)).ln();
            }
        }
    }
    mi
}

/// First clear local minimum of the AMI curve over `tau = 1..=tau_max`.
///
/// A minimum is strict (`c[t] < c[t - 1]` and `c[t] < c[t + 1]`) and must
/// be followed within the curve by a rise of at least [`AMI_MIN_RISE`]
/// times the drop `c[1] - c[t]`. Fails when the curve only decays.
pub fn ami_first_minimum_tau(ts: &TimeSeries, tau_max: usize, bins: usize) -> Result<HeuristicResult> {
    if tau_max < 2 {
        return Err(Error::InvalidParameter(format!("tau_max must be >= 2, got {tau_max}")));
    }
    if bins < 2 {
        return Err(Error::InvalidParameter(format!("bins must be >= 2, got {bins}")));
    }
    let x = ts.values();
    if x.len() <= tau_max + 1 {
        return Err(Error::SeriesTooShort {
            required: tau_max + 2,
            available: x.len(),
        });
    }
    let labels = bin_labels(x, bins)?;
    let curve: Vec<f64> = (1..=tau_max)
        .into_par_iter()
        .map(|tau| binned_mi(&labels, tau, bins))
        .collect();
    let value = first_clear_minimum(&curve).map(|i| i + 1);
    let diagnostic = curve.iter().enumerate().map(|(i, &c)| (i + 1, c)).collect();
    Ok(HeuristicResult::new(value, diagnostic))
}

/// Index into `curve` of the first strict local minimum with enough rise
/// after it.
fn first_clear_minimum(curve: &[f64]) -> Option<usize> {
    (1..curve.len().saturating_sub(1)).find(|&i| {
        let c = curve[i];
        if !(c < curve[i - 1] && c < curve[i + 1]) {
            return false;
        }
        let drop = curve[0] - c;
        let rise = curve[i + 1..].iter().cloned().fold(f64::NEG_INFINITY, f64::max) - c;
        rise > AMI_MIN_RISE * drop
    })
}

/// Thresholds for [`fnn_dimension`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FnnOptions {
    /// Relative test: the appended coordinate's gap over the neighbor distance.
    pub rtol: f64,
    /// Absolute test: the enlarged distance over the series standard deviation.
    pub atol: f64,
    /// Largest acceptable false-neighbor fraction.
    pub threshold: f64,
}

impl Default for FnnOptions {
    fn default() -> Self {
        Self {
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
            threshold: DEFAULT_FNN_THRESHOLD,
        }
    }
}

/// Fraction of false nearest neighbors when going from dimension `m` to
/// `m + 1` at delay `tau`.
pub fn fnn_fraction(x: &[f64], tau: usize, m: usize, opts: &FnnOptions, sd: f64) -> Result<f64> {
    // Rows of the m-dimensional reconstruction that also have an (m+1)-th
    // coordinate, i.e. anchors j >= m * tau.
    let params = ReconstructionParams::new(m + 1, tau, 1)?;
    params.check_len(x.len())?;
    let full = build_from_slice(x, params)?;
    let vectors: Array2<f64> = full.vectors.slice(ndarray::s![.., ..m]).to_owned();
    let index = NeighborIndex::build(vectors.view())?;
    let rows = vectors.nrows();
    if rows < 2 {
        return Err(Error::TooFewSamples { n: rows, min: 2 });
    }
    let flags: Vec<bool> = (0..rows)
        .into_par_iter()
        .map(|i| {
            let row = vectors.row(i);
            let row = row.as_slice().expect("owned slice is contiguous");
            let nn = index.knn_filtered(row, 1, |id| id != i)[0];
            let extra = (full.vectors[[i, m]] - full.vectors[[nn.id, m]]).abs();
            let enlarged = nn.distance.max(extra);
            let relative = if nn.distance > 0.0 {
                extra / nn.distance > opts.rtol
            } else {
                extra > 0.0
            };
            relative || enlarged / sd > opts.atol
        })
        .collect();
    Ok(flags.iter().filter(|&&f| f).count() as f64 / rows as f64)
}

/// Smallest `m` in `1..=m_max` whose false-neighbor fraction drops below
/// the threshold. Uses the max norm and excludes only the point itself.
pub fn fnn_dimension(ts: &TimeSeries, tau: usize, m_max: usize, opts: &FnnOptions) -> Result<HeuristicResult> {
    if m_max < 2 {
        return Err(Error::InvalidParameter(format!("m_max must be >= 2, got {m_max}")));
    }
    if tau == 0 {
        return Err(Error::InvalidParameter("tau must be >= 1".into()));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0 && opts.threshold > 0.0) {
        return Err(Error::InvalidParameter(
            "rtol, atol and threshold must be positive".into(),
        ));
    }
    let x = ts.values();
    ReconstructionParams::new(m_max + 1, tau, 1)?.check_len(x.len())?;
    let sd = ts.std_dev();
    if !(sd > 0.0) {
        return Err(Error::DegenerateData("series is constant".into()));
    }
    let mut curve = Vec::with_capacity(m_max);
    let mut value = None;
    for m in 1..=m_max {
        let f = fnn_fraction(x, tau, m, opts, sd)?;
        curve.push((m, f));
        if f < opts.threshold {
            value = Some(m);
            break;
        }
    }
    Ok(HeuristicResult::new(value, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{generate_benchmark_trace, GenerationProtocol, System};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn sine(n: usize, period: f64, noise: f64, seed: u64) -> TimeSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..n)
            .map(|i| {
                let e: f64 = StandardNormal.sample(&mut rng);
                (2.0 * std::f64::consts::PI * i as f64 / period).sin() + noise * e
            })
            .collect();
        TimeSeries::from_values(v).unwrap()
    }

    /// Direct plug-in estimate from a map of cell counts.
    fn oracle_ami(x: &[f64], tau: usize, bins: usize) -> f64 {
        use std::collections::HashMap;
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let bin = |v: f64| (((v - lo) / (hi - lo) * bins as f64).floor() as usize).min(bins - 1);
        let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
        let mut a: HashMap<usize, f64> = HashMap::new();
        let mut b: HashMap<usize, f64> = HashMap::new();
        let n = (x.len() - tau) as f64;
        for j in tau..x.len() {
            *joint.entry((bin(x[j]), bin(x[j - tau]))).or_default() += 1.0 / n;
            *a.entry(bin(x[j])).or_default() += 1.0 / n;
            *b.entry(bin(x[j - tau])).or_default() += 1.0 / n;
        }
        joint.iter().map(|(&(i, k), &p)| p * (p / (a[&i] * b[&k])).ln()).sum()
    }

    #[test]
    fn histogram_matches_oracle() {
        let ts = sine(3_000, 37.0, 0.3, 1);
        for tau in [1, 5, 17] {
            for bins in [2, 7, 32] {
                let got = histogram_ami(ts.values(), tau, bins).unwrap();
                let want = oracle_ami(ts.values(), tau, bins);
                assert!((got - want).abs() < 1e-9, "tau {tau} bins {bins}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn ami_two_bins_hand_example() {
        // Labels alternate 0,1,0,1: at tau = 1 the pair is deterministic.
        let x = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let mi = histogram_ami(&x, 1, 2).unwrap();
        assert!((mi - std::f64::consts::LN_2).abs() < 1e-12, "{mi}");
        // tau = 2: seven pairs, labels four zeros and three ones.
        let (a, b) = (4.0f64 / 7.0, 3.0f64 / 7.0);
        let h = -(a * a.ln() + b * b.ln());
        assert!((histogram_ami(&x, 2, 2).unwrap() - h).abs() < 1e-12);
    }

    #[test]
    fn sine_quarter_period() {
        for seed in 0..3 {
            let ts = sine(50_000, 100.0, 0.2, seed);
            let r = ami_first_minimum_tau(&ts, 60, DEFAULT_BINS).unwrap();
            assert_eq!(r.status, HeuristicStatus::Ok);
            let tau = r.value.unwrap();
            assert!((23..=27).contains(&tau), "seed {seed}: tau = {tau}");
            assert_eq!(r.diagnostic_curve.len(), 60);
        }
    }

    #[test]
    fn maps_fail() {
        for system in [System::HENON, System::LOGISTIC] {
            let ts = generate_benchmark_trace(&system, &GenerationProtocol::map()).unwrap();
            let r = ami_first_minimum_tau(&ts, 50, DEFAULT_BINS).unwrap();
            assert_eq!(r.status, HeuristicStatus::Failed, "{system:?}");
            assert!(r.value.is_none());
            assert_eq!(r.diagnostic_curve.len(), 50);
        }
    }

    #[test]
    fn ami_positive_affine_keeps_argmin() {
        let ts = sine(20_000, 60.0, 0.05, 9);
        let moved = crate::series::affine_transform(&ts, 3.5, -2.0).unwrap();
        let a = ami_first_minimum_tau(&ts, 30, DEFAULT_BINS).unwrap();
        let b = ami_first_minimum_tau(&moved, 30, DEFAULT_BINS).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn rise_rule() {
        // Monotone decay with tiny wiggles: no clear minimum.
        let wiggly: Vec<f64> = (0..40)
            .map(|i| (-(i as f64) / 5.0).exp() + if i % 2 == 0 { 1e-4 } else { 0.0 })
            .collect();
        assert_eq!(first_clear_minimum(&wiggly), None);
        let dip = [2.0, 1.5, 1.0, 1.2, 1.9];
        assert_eq!(first_clear_minimum(&dip), Some(2));
    }

    #[test]
    fn ami_errors() {
        let ts = sine(10, 5.0, 0.0, 0);
        assert!(matches!(
            ami_first_minimum_tau(&ts, 9, 4),
            Err(Error::SeriesTooShort { .. })
        ));
        assert!(ami_first_minimum_tau(&ts, 1, 4).is_err());
        assert!(ami_first_minimum_tau(&ts, 3, 1).is_err());
        let flat = TimeSeries::from_values(vec![1.0; 20]).unwrap();
        assert!(matches!(
            ami_first_minimum_tau(&flat, 3, 4),
            Err(Error::DegenerateData(_))
        ));
    }

    /// Brute-force nearest neighbor and the two tests, written out directly.
    fn oracle_fnn(x: &[f64], tau: usize, m: usize, opts: &FnnOptions, sd: f64) -> f64 {
        let start = m * tau;
        let anchors: Vec<usize> = (start..x.len() - 1).collect();
        let dist = |a: usize, b: usize| {
            (0..m)
                .map(|c| (x[a - c * tau] - x[b - c * tau]).abs())
                .fold(0.0, f64::max)
        };
        let mut false_count = 0;
        for &a in &anchors {
            let mut best = (f64::INFINITY, usize::MAX);
            for &b in &anchors {
                if a != b {
                    let d = dist(a, b);
                    if d < best.0 {
                        best = (d, b);
                    }
                }
            }
            let extra = (x[a - m * tau] - x[best.1 - m * tau]).abs();
            let rel = if best.0 > 0.0 {
                extra / best.0 > opts.rtol
            } else {
                extra > 0.0
            };
            if rel || best.0.max(extra) / sd > opts.atol {
                false_count += 1;
            }
        }
        false_count as f64 / anchors.len() as f64
    }

    #[test]
    fn fnn_matches_oracle() {
        let ts = sine(600, 23.7, 0.2, 4);
        let opts = FnnOptions::default();
        let sd = ts.std_dev();
        for (tau, m) in [(1, 1), (3, 2), (6, 3)] {
            let got = fnn_fraction(ts.values(), tau, m, &opts, sd).unwrap();
            let want = oracle_fnn(ts.values(), tau, m, &opts, sd);
            assert!((got - want).abs() < 1e-12, "tau {tau} m {m}: {got} vs {want}");
        }
    }

    #[test]
    fn sine_embeds_in_the_plane() {
        // An irrational period, so no state ever repeats to within roundoff.
        let ts = sine(20_000, 100.0 + std::f64::consts::PI / 10.0, 0.0, 0);
        let r = fnn_dimension(&ts, 25, 6, &FnnOptions::default()).unwrap();
        assert_eq!(r.value, Some(2), "{:?}", r.diagnostic_curve);
        assert!(r.diagnostic_curve.iter().all(|&(_, f)| (0.0..=1.0).contains(&f)));
    }

    #[test]
    fn fnn_deterministic_and_errors() {
        let ts = sine(2_000, 31.0, 0.1, 5);
        let a = fnn_dimension(&ts, 3, 5, &FnnOptions::default()).unwrap();
        let b = fnn_dimension(&ts, 3, 5, &FnnOptions::default()).unwrap();
        assert_eq!(a, b);
        assert!(fnn_dimension(&ts, 3, 1, &FnnOptions::default()).is_err());
        let short = sine(10, 5.0, 0.0, 0);
        assert!(matches!(
            fnn_dimension(&short, 3, 4, &FnnOptions::default()),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn noise_never_settles() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let noise: Vec<f64> = (0..3_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let noise = TimeSeries::from_values(noise).unwrap();
        let r = fnn_dimension(&noise, 1, 3, &FnnOptions::default()).unwrap();
        assert_eq!(r.status, HeuristicStatus::Failed);
        assert_eq!(r.diagnostic_curve.len(), 3);
    }
}
