//! Sliding-window embedding of a uniformly sampled scalar series.
//!
//! The embedding dimension is read off the prominent peaks of the Fourier
//! spectrum and the delay is chosen on a grid by making the columns of the
//! exponential matrix `Omega` (one column per retained frequency, conjugates
//! included) as close to pairwise orthogonal as possible.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on sample spacing when reading a series.
pub const SPACING_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidSeries(format!("dt must be positive, got {dt}")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidSeries("need at least 2 samples".into()));
        }
        if !t0.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries("non-finite sample".into()));
        }
        Ok(TimeSeries { t0, dt, values })
    }

    /// Samples `f` at `n` evenly spaced times covering `[t0, t_end]`.
    pub fn sample<F: Fn(f64) -> f64>(t0: f64, t_end: f64, n: usize, f: F) -> Result<Self> {
        if n < 2 || !(t_end > t0) {
            return Err(Error::InvalidSeries("need n >= 2 and t_end > t0".into()));
        }
        let dt = (t_end - t0) / (n - 1) as f64;
        TimeSeries::new(t0, dt, (0..n).map(|j| f(t0 + j as f64 * dt)).collect())
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    /// Linear interpolation at fractional sample position `pos`.
    fn at_position(&self, pos: f64) -> f64 {
        let last = self.len() - 1;
        let pos = pos.clamp(0.0, last as f64);
        let j = (pos.floor() as usize).min(last);
        let frac = pos - j as f64;
        if j == last || frac == 0.0 {
            self.values[j]
        } else {
            self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
        }
    }

    /// Value at time `t` by linear interpolation; clamps outside the range.
    pub fn value_at(&self, t: f64) -> f64 {
        self.at_position((t - self.t0) / self.dt)
    }

    /// Reads `t,value` rows; a header row is optional and spacing must be
    /// uniform to [`SPACING_TOLERANCE`].
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(Error::InvalidSeries(format!("row {row}: expected 2 columns")));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(t), Ok(v)) => {
                    times.push(t);
                    values.push(v);
                }
                _ if row == 0 => continue,
                _ => return Err(Error::InvalidSeries(format!("row {row}: unparsable number"))),
            }
        }
        if times.len() < 2 {
            return Err(Error::InvalidSeries("need at least 2 samples".into()));
        }
        let n = times.len();
        let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
        for (j, t) in times.iter().enumerate() {
            let expected = times[0] + j as f64 * dt;
            if (t - expected).abs() > SPACING_TOLERANCE * dt.abs().max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidSeries(format!("row {j}: non-uniform spacing")));
            }
        }
        TimeSeries::new(times[0], dt, values)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "value"])?;
        for (j, v) in self.values.iter().enumerate() {
            w.write_record([self.time(j).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Angular frequency in rad per unit time.
    pub frequency: f64,
    pub amplitude: f64,
}

/// Prominent spectral peaks, sorted by ascending frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSupport {
    pub peaks: Vec<Peak>,
    pub threshold: f64,
}

impl SpectrumSupport {
    pub fn frequencies(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.frequency).collect()
    }
}

/// Local maxima of the DFT magnitude of the mean-removed signal whose
/// magnitude is at least `threshold_fraction` of the largest one.
pub fn spectrum(ts: &TimeSeries, threshold_fraction: f64) -> Result<SpectrumSupport> {
    if !(threshold_fraction > 0.0 && threshold_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold_fraction must lie in (0, 1], got {threshold_fraction}"
        )));
    }
    let n = ts.len();
    if n < 4 {
        return Err(Error::InvalidSeries("spectrum needs at least 4 samples".into()));
    }
    let mean = ts.values().iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = ts.values().iter().map(|v| Complex64::new(v - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let mags: Vec<f64> = buf[..=half].iter().map(|z| z.norm()).collect();
    let max = mags[1..].iter().cloned().fold(0.0, f64::max);
    let scale = ts.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if max <= 1e-9 * scale * n as f64 {
        return Err(Error::EmptySpectrum);
    }
    let threshold = threshold_fraction * max;
    let bin_to_omega = 2.0 * PI / (n as f64 * ts.dt());
    let peaks = (1..=half)
        .filter(|&k| {
            let left = mags[k - 1];
            let right = if k < half { mags[k + 1] } else { f64::NEG_INFINITY };
            mags[k] >= threshold && mags[k] > left && mags[k] >= right
        })
        .map(|k| Peak { frequency: k as f64 * bin_to_omega, amplitude: mags[k] })
        .collect::<Vec<_>>();
    if peaks.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    Ok(SpectrumSupport { peaks, threshold })
}

/// Number of coordinates per window: each real tone contributes a conjugate
/// pair of complex exponentials.
pub fn embedding_dimension(s: &SpectrumSupport) -> usize {
    2 * s.peaks.len()
}

/// Scalar measure of how far the columns of `Omega` are from orthogonal.
pub trait OrthogonalityScore: Sync {
    fn score(&self, frequencies: &[f64], d: usize, tau: f64) -> f64;
}

/// Mean over distinct column pairs of `|<col_a, col_b>| / d`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanAbsInnerProduct;

impl OrthogonalityScore for MeanAbsInnerProduct {
    fn score(&self, frequencies: &[f64], d: usize, tau: f64) -> f64 {
        let omegas: Vec<f64> = frequencies.iter().flat_map(|&w| [w, -w]).collect();
        let k = omegas.len();
        if k < 2 || d == 0 {
            return 0.0;
        }
        let mut total = 0.0;
        let mut count = 0usize;
        for a in 0..k {
            for b in (a + 1)..k {
                // <col_a, col_b> = sum_m exp(i (w_a - w_b) tau m)
                let delta = (omegas[a] - omegas[b]) * tau;
                let z: Complex64 = (0..d).map(|m| Complex64::from_polar(1.0, delta * m as f64)).sum();
                total += z.norm() / d as f64;
                count += 1;
            }
        }
        total / count as f64
    }
}

pub fn orthogonality_score(s: &SpectrumSupport, d: usize, tau: f64) -> f64 {
    MeanAbsInnerProduct.score(&s.frequencies(), d, tau)
}

/// Scores every grid value; the order of the grid is kept.
pub fn orthogonality_curve<S: OrthogonalityScore>(
    score: &S,
    s: &SpectrumSupport,
    d: usize,
    tau_grid: &[f64],
) -> Vec<(f64, f64)> {
    let freqs = s.frequencies();
    tau_grid.iter().map(|&tau| (tau, score.score(&freqs, d, tau))).collect()
}

/// Scores closer than this to the grid minimum are treated as equal.
pub const DELAY_TIE_TOL: f64 = 1e-12;

/// Grid value minimizing the orthogonality score; ties up to `DELAY_TIE_TOL`
/// go to the smallest tau.
pub fn optimal_delay(s: &SpectrumSupport, d: usize, tau_grid: &[f64]) -> Result<f64> {
    optimal_delay_with(&MeanAbsInnerProduct, s, d, tau_grid)
}

pub fn optimal_delay_with<S: OrthogonalityScore>(
    score: &S,
    s: &SpectrumSupport,
    d: usize,
    tau_grid: &[f64],
) -> Result<f64> {
    if tau_grid.is_empty() || tau_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidParameter("tau grid must be non-empty and positive".into()));
    }
    let curve = orthogonality_curve(score, s, d, tau_grid);
    let min = curve.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    // scores within rounding of the minimum count as ties
    let best =
        curve.iter().filter(|c| c.1 <= min + DELAY_TIE_TOL).min_by(|a, b| a.0.total_cmp(&b.0)).expect("non-empty grid");
    Ok(best.0)
}

/// Uniform grid of `count` delays spanning `(0, longest period]`.
pub fn default_tau_grid(s: &SpectrumSupport, count: usize) -> Vec<f64> {
    let min_freq = s.peaks.iter().map(|p| p.frequency).fold(f64::INFINITY, f64::min);
    let period = 2.0 * PI / min_freq;
    (1..=count).map(|i| period * i as f64 / count as f64).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    /// Coordinates per window.
    pub d: usize,
    pub tau: f64,
}

/// Embedded points with the start time of each window as its label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPointCloud {
    points: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

impl LabeledPointCloud {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::InvalidParameter("points and labels differ in length".into()));
        }
        if let Some(first) = points.first() {
            if points.iter().any(|p| p.len() != first.len()) {
                return Err(Error::InvalidParameter("points of unequal dimension".into()));
            }
        }
        if labels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("labels must be strictly increasing".into()));
        }
        Ok(LabeledPointCloud { points, labels })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }
}

/// Windows `(f(t_j), f(t_j + tau), ..., f(t_j + (d-1) tau))` for every sample
/// time `t_j` whose window fits inside the series.
pub fn sliding_window(ts: &TimeSeries, p: EmbeddingParams) -> Result<LabeledPointCloud> {
    if p.d == 0 || !(p.tau > 0.0) {
        return Err(Error::InvalidParameter(format!("need d >= 1 and tau > 0, got {p:?}")));
    }
    let step = p.tau / ts.dt();
    let span = (p.d - 1) as f64 * step;
    let last = (ts.len() - 1) as f64;
    // slack absorbs rounding in tau / dt
    let slack = 1e-9 * last.max(1.0);
    if span > last + slack {
        return Err(Error::WindowExceedsSeries);
    }
    let count = ((last - span + slack).floor() as usize + 1).min(ts.len());
    let mut points = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for j in 0..count {
        points.push((0..p.d).map(|m| ts.at_position(j as f64 + m as f64 * step)).collect());
        labels.push(ts.time(j));
    }
    LabeledPointCloud::new(points, labels)
}

/// Indices of `k` evenly spaced points from `n`, endpoints included, rounded
/// half to even.
pub fn subsample_indices(n: usize, k: usize) -> Result<Vec<usize>> {
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!("subsample size {k} outside [2, {n}]")));
    }
    let step = (n - 1) as f64 / (k - 1) as f64;
    Ok((0..k).map(|i| (i as f64 * step).round_ties_even() as usize).collect())
}

pub fn subsample(pc: &LabeledPointCloud, k: usize) -> Result<LabeledPointCloud> {
    let idx = subsample_indices(pc.len(), k)?;
    LabeledPointCloud::new(
        idx.iter().map(|&i| pc.points[i].clone()).collect(),
        idx.iter().map(|&i| pc.labels[i]).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn double_sine() -> TimeSeries {
        TimeSeries::sample(0.0, 60.0 * PI, 1000, |t| 2.0 * t.sin() + 1.8 * (3f64.sqrt() * t).sin()).unwrap()
    }

    #[test]
    fn double_sine_has_peaks_at_one_and_sqrt3() {
        let s = spectrum(&double_sine(), 0.1).unwrap();
        assert_eq!(s.peaks.len(), 2);
        // one DFT bin is 2 pi / (n dt) ~ 0.033 rad
        assert!((s.peaks[0].frequency - 1.0).abs() < 0.02, "{:?}", s.peaks);
        assert!((s.peaks[1].frequency - 3f64.sqrt()).abs() < 0.02, "{:?}", s.peaks);
        assert_eq!(embedding_dimension(&s), 4);
    }

    #[test]
    fn single_tone_has_one_peak() {
        let ts = TimeSeries::sample(0.0, 20.0 * PI, 1000, f64::sin).unwrap();
        let s = spectrum(&ts, 0.1).unwrap();
        assert_eq!(s.peaks.len(), 1);
        assert!((s.peaks[0].frequency - 1.0).abs() < 0.05);
        assert_eq!(embedding_dimension(&s), 2);
    }

    #[test]
    fn constant_signal_has_empty_spectrum() {
        let ts = TimeSeries::sample(0.0, 10.0, 100, |_| 3.0).unwrap();
        assert_eq!(spectrum(&ts, 0.1), Err(Error::EmptySpectrum));
    }

    fn single_tone_support() -> SpectrumSupport {
        SpectrumSupport { peaks: vec![Peak { frequency: 1.0, amplitude: 1.0 }], threshold: 0.0 }
    }

    #[test]
    fn quarter_period_is_orthogonal() {
        // columns (1, i) and (1, -i): inner product 1 + i * conj(-i) = 0
        assert_abs_diff_eq!(orthogonality_score(&single_tone_support(), 2, PI / 2.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(orthogonality_score(&single_tone_support(), 2, 1e-9), 1.0, epsilon = 1e-9);
        let s = spectrum(&double_sine(), 0.1).unwrap();
        assert!((orthogonality_score(&s, 4, 1e-9) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn optimal_delay_on_grid() {
        let s = single_tone_support();
        assert_eq!(optimal_delay(&s, 2, &[0.1, PI / 2.0, 3.0]).unwrap(), PI / 2.0);
        assert_eq!(optimal_delay(&s, 2, &[0.7]).unwrap(), 0.7);
        // equal scores at tau and tau + pi: the smaller wins
        assert_eq!(optimal_delay(&s, 2, &[1.5 * PI, PI / 2.0]).unwrap(), PI / 2.0);
        assert!(optimal_delay(&s, 2, &[]).is_err());
    }

    #[test]
    fn double_sine_score_has_interior_minimum() {
        let s = spectrum(&double_sine(), 0.1).unwrap();
        let grid = default_tau_grid(&s, 200);
        let tau = optimal_delay(&s, 4, &grid).unwrap();
        let best = orthogonality_score(&s, 4, tau);
        let i = grid.iter().position(|&t| t == tau).unwrap();
        assert!(i > 0 && i + 1 < grid.len());
        assert!(best < orthogonality_score(&s, 4, grid[i - 1]));
        assert!(best < orthogonality_score(&s, 4, grid[i + 1]));
        assert!(best < 0.5 * orthogonality_score(&s, 4, grid[0]));
    }

    #[test]
    fn sine_quarter_period_window_traces_unit_circle() {
        // 1000 samples per period and tau = 250 dt exactly
        let ts =
            TimeSeries::new(0.0, 2.0 * PI / 1000.0, (0..=2000).map(|j| (j as f64 * 2.0 * PI / 1000.0).sin()).collect())
                .unwrap();
        let pc = sliding_window(&ts, EmbeddingParams { d: 2, tau: PI / 2.0 }).unwrap();
        assert_eq!(pc.len(), 2001 - 250);
        for p in pc.points() {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_series_gives_identical_points() {
        let ts = TimeSeries::sample(0.0, 10.0, 50, |_| 2.0).unwrap();
        let pc = sliding_window(&ts, EmbeddingParams { d: 3, tau: 1.0 }).unwrap();
        assert!(pc.points().iter().all(|p| p == &vec![2.0, 2.0, 2.0]));
        assert!(pc.labels().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn window_too_long_is_rejected() {
        let ts = TimeSeries::sample(0.0, 1.0, 11, |t| t).unwrap();
        assert_eq!(sliding_window(&ts, EmbeddingParams { d: 3, tau: 0.6 }), Err(Error::WindowExceedsSeries));
        assert_eq!(sliding_window(&ts, EmbeddingParams { d: 3, tau: 0.5 }).unwrap().len(), 1);
    }

    #[test]
    fn subsample_index_arithmetic() {
        assert_eq!(subsample_indices(10, 3).unwrap(), vec![0, 4, 9]);
        assert_eq!(subsample_indices(7, 7).unwrap(), (0..7).collect::<Vec<_>>());
        let half = subsample_indices(1000, 500).unwrap();
        assert_eq!(&half[..4], &[0, 2, 4, 6]);
        assert_eq!(*half.last().unwrap(), 999);
        assert!(half.windows(2).all(|w| w[1] - w[0] == 2 || w[1] - w[0] == 3));
        assert!(subsample_indices(5, 1).is_err());
        assert!(subsample_indices(5, 6).is_err());
    }

    #[test]
    fn csv_round_trip_with_and_without_header() {
        let ts = TimeSeries::sample(0.0, 1.0, 5, |t| t * t).unwrap();
        let mut buf = Vec::new();
        ts.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("t,value\n"));
        assert_eq!(TimeSeries::read_csv(buf.as_slice()).unwrap(), ts);
        let bare = "0,1\n0.5,2\n1.0,3\n";
        assert_eq!(TimeSeries::read_csv(bare.as_bytes()).unwrap().values(), &[1.0, 2.0, 3.0]);
        let uneven = "0,1\n0.5,2\n1.2,3\n";
        assert!(TimeSeries::read_csv(uneven.as_bytes()).is_err());
    }
}
