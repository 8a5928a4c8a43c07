//! Observables along a trajectory: well populations, spin polarization,
//! eigenstate projections, time averages and the beat spectrum.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::model::{SpatialGrid, SpinorField};
use crate::stationary::{pauli_expectations, EigenSolution};

const UNIFORM_TOL: f64 = 1e-6;
const PEAK_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Probability in `x < 0` or `x > 0`; a grid point at `x = 0` counts half
/// to each side.
pub fn well_probability(field: &SpinorField, grid: &SpatialGrid, side: Side) -> f64 {
    let mut left = 0.0;
    let mut right = 0.0;
    for (j, x) in grid.x().iter().enumerate() {
        let w = field.up[j].norm_sqr() + field.down[j].norm_sqr();
        if *x < 0.0 {
            left += w;
        } else if *x > 0.0 {
            right += w;
        } else {
            left += 0.5 * w;
            right += 0.5 * w;
        }
    }
    grid.dx()
        * match side {
            Side::Left => left,
            Side::Right => right,
        }
}

/// `S_n = <sigma_n>/2`.
pub fn spin_polarization(field: &SpinorField, grid: &SpatialGrid, axis: Axis) -> f64 {
    let s = pauli_expectations(field, grid.dx());
    0.5 * match axis {
        Axis::X => s[0],
        Axis::Y => s[1],
        Axis::Z => s[2],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projections {
    /// `P_11, P_12, P_21, P_22`.
    pub p: [f64; 4],
    pub all: f64,
}

pub fn eigenstate_projection(field: &SpinorField, solution: &EigenSolution) -> Projections {
    let dx = solution.grid().dx();
    let p = std::array::from_fn(|i| solution.states[i].inner(field, dx).norm_sqr());
    Projections {
        p,
        all: p.iter().sum(),
    }
}

fn check_uniform(times: &[f64], len: usize, min_len: usize) -> Result<f64> {
    if times.len() != len {
        return Err(Error::InvalidSeries(format!(
            "{} values but {} times",
            len,
            times.len()
        )));
    }
    if len < min_len {
        return Err(Error::InvalidSeries(format!(
            "need at least {min_len} samples, got {len}"
        )));
    }
    let h = (times[len - 1] - times[0]) / (len - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::InvalidSeries("times must increase".into()));
    }
    for (i, t) in times.iter().enumerate() {
        if (t - times[0] - i as f64 * h).abs() > UNIFORM_TOL * h.max(1.0) {
            return Err(Error::InvalidSeries(format!("non-uniform sampling at index {i}")));
        }
    }
    Ok(h)
}

/// Trapezoidal mean over the whole recorded window.
pub fn time_average(series: &[f64], times: &[f64]) -> Result<f64> {
    let h = check_uniform(times, series.len(), 2)?;
    let n = series.len();
    let inner: f64 = series[1..n - 1].iter().sum();
    let integral = h * (inner + 0.5 * (series[0] + series[n - 1]));
    Ok(integral / (times[n - 1] - times[0]))
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub p_left: f64,
    pub p_right: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub projections: Projections,
    pub norm: f64,
}

/// Evaluates every recorded observable against a fixed eigenbasis.
#[derive(Debug, Clone)]
pub struct Probes {
    solution: EigenSolution,
}

impl Probes {
    pub fn new(solution: &EigenSolution) -> Self {
        Self {
            solution: solution.clone(),
        }
    }

    pub fn solution(&self) -> &EigenSolution {
        &self.solution
    }

    pub fn measure(&self, field: &SpinorField, t: f64) -> Sample {
        let grid = self.solution.grid();
        let [sx, sy, sz] = pauli_expectations(field, grid.dx());
        Sample {
            t,
            p_left: well_probability(field, grid, Side::Left),
            p_right: well_probability(field, grid, Side::Right),
            sx: 0.5 * sx,
            sy: 0.5 * sy,
            sz: 0.5 * sz,
            projections: eigenstate_projection(field, &self.solution),
            norm: field.norm_sqr(grid.dx()),
        }
    }
}

/// Time-averaged observables of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Averages {
    pub p_left: f64,
    pub p_right: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub p: [f64; 4],
}

#[derive(Debug, Clone, Default)]
pub struct TrajectoryRecord {
    pub samples: Vec<Sample>,
    pub final_state: SpinorField,
    pub final_time: f64,
}

impl TrajectoryRecord {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            samples: Vec::with_capacity(n),
            ..Self::default()
        }
    }

    pub fn push(&mut self, sample: Sample) {
        self.samples.push(sample);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.series(|s| s.t)
    }

    pub fn series(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn p_left(&self) -> Vec<f64> {
        self.series(|s| s.p_left)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.norm - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Samples with `t <= t_max`.
    pub fn truncated(&self, t_max: f64) -> TrajectoryRecord {
        TrajectoryRecord {
            samples: self
                .samples
                .iter()
                .take_while(|s| s.t <= t_max * (1.0 + 1e-12))
                .copied()
                .collect(),
            final_state: self.final_state.clone(),
            final_time: self.final_time,
        }
    }

    pub fn averages(&self) -> Result<Averages> {
        let times = self.times();
        let avg = |f: &dyn Fn(&Sample) -> f64| time_average(&self.series(f), &times);
        Ok(Averages {
            p_left: avg(&|s| s.p_left)?,
            p_right: avg(&|s| s.p_right)?,
            sx: avg(&|s| s.sx)?,
            sy: avg(&|s| s.sy)?,
            sz: avg(&|s| s.sz)?,
            p: [
                avg(&|s| s.projections.p[0])?,
                avg(&|s| s.projections.p[1])?,
                avg(&|s| s.projections.p[2])?,
                avg(&|s| s.projections.p[3])?,
            ],
        })
    }

    pub const CSV_HEADER: &'static str = "t,p_left,p_right,sx,sy,sz,p11,p12,p21,p22,p_all";

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for s in &self.samples {
            let p = s.projections.p;
            let row = [
                s.t,
                s.p_left,
                s.p_right,
                s.sx,
                s.sy,
                s.sz,
                p[0],
                p[1],
                p[2],
                p[3],
                s.projections.all,
            ];
            let cells: Vec<String> = row.iter().map(|v| fmt_num(*v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    pub omega: f64,
    pub amplitude: f64,
    pub label: Option<String>,
}

/// One-sided amplitude spectrum against angular frequency. A component
/// `A cos(w t)` shows up with amplitude `A` at `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub peaks: Vec<Peak>,
    pub bin_width: f64,
    even_length: bool,
}

impl SpectrumResult {
    /// Sum of the mean-square contributions of all bins; equals the variance
    /// of the input series.
    pub fn total_power(&self) -> f64 {
        let last = self.amplitudes.len() - 1;
        self.amplitudes
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| {
                if k == last && self.even_length {
                    a * a
                } else {
                    0.5 * a * a
                }
            })
            .sum()
    }

    /// Peaks sorted by decreasing amplitude.
    pub fn strongest(&self, count: usize) -> Vec<&Peak> {
        let mut peaks: Vec<&Peak> = self.peaks.iter().collect();
        peaks.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
        peaks.truncate(count);
        peaks
    }

    /// Attaches the name of the nearest analytic frequency lying within one
    /// bin of each peak.
    pub fn label_peaks(&mut self, analytic: &[(String, f64)]) {
        for peak in &mut self.peaks {
            peak.label = analytic
                .iter()
                .map(|(name, w)| (name, (w - peak.omega).abs()))
                .filter(|(_, dist)| *dist <= self.bin_width)
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(name, _)| name.clone());
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "omega,amplitude")?;
        for (f, a) in self.frequencies.iter().zip(&self.amplitudes) {
            writeln!(w, "{},{}", fmt_num(*f), fmt_num(*a))?;
        }
        Ok(())
    }

    pub fn write_peaks_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "omega_peak,amplitude,analytic_label")?;
        for p in &self.peaks {
            writeln!(
                w,
                "{},{},{}",
                fmt_num(p.omega),
                fmt_num(p.amplitude),
                p.label.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }
}

/// Spectrum of the mean-subtracted series. With `resolution` set, the window
/// must be long enough that one bin, `2 pi / (N h)`, is no wider than it.
pub fn beat_spectrum(
    series: &[f64],
    times: &[f64],
    resolution: Option<f64>,
) -> Result<SpectrumResult> {
    let h = check_uniform(times, series.len(), 4)?;
    let n = series.len();
    let window = n as f64 * h;
    let bin_width = 2.0 * PI / window;
    if let Some(res) = resolution {
        if bin_width > res {
            return Err(Error::WindowTooShort {
                actual: window,
                resolution: res,
                min_t_final: 2.0 * PI / res,
            });
        }
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = series
        .iter()
        .map(|v| Complex64::new(v - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let amplitudes: Vec<f64> = (0..=half)
        .map(|k| {
            let scale = if k == 0 || (n % 2 == 0 && k == half) { 1.0 } else { 2.0 };
            scale * buf[k].norm() / n as f64
        })
        .collect();
    let frequencies: Vec<f64> = (0..=half).map(|k| k as f64 * bin_width).collect();
    let peaks = find_peaks(&amplitudes, bin_width);
    Ok(SpectrumResult {
        frequencies,
        amplitudes,
        peaks,
        bin_width,
        even_length: n % 2 == 0,
    })
}

/// Local maxima above the relative threshold, refined by a parabola through
/// the neighbouring bins.
fn find_peaks(amplitudes: &[f64], bin_width: f64) -> Vec<Peak> {
    let max = amplitudes.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Vec::new();
    }
    let len = amplitudes.len();
    let mut peaks = Vec::new();
    for k in 1..len {
        let b = amplitudes[k];
        let a = amplitudes[k - 1];
        let c = if k + 1 < len { amplitudes[k + 1] } else { f64::NEG_INFINITY };
        if b < PEAK_THRESHOLD * max || b <= a || b < c {
            continue;
        }
        let (offset, height) = if k + 1 < len {
            let denom = a - 2.0 * b + c;
            if denom < 0.0 {
                let d = 0.5 * (a - c) / denom;
                (d, b - 0.25 * (a - c) * d)
            } else {
                (0.0, b)
            }
        } else {
            (0.0, b)
        };
        peaks.push(Peak {
            omega: (k as f64 + offset) * bin_width,
            amplitude: height,
            label: None,
        });
    }
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize, ModelParams};
    use crate::stationary::{localized_basis, solve};

    fn grid() -> SpatialGrid {
        SpatialGrid::new(-8.0, 8.0, 256).unwrap()
    }

    #[test]
    fn parity_symmetric_field_is_split_evenly() {
        let g = grid();
        let f = SpinorField::from_fn(
            &g,
            |x| Complex64::new((-(x * x)).exp(), 0.0),
            |x| Complex64::new(0.0, 0.5 * (-(x * x) / 2.0).exp()),
        );
        let f = normalize(&f, &g).unwrap();
        let l = well_probability(&f, &g, Side::Left);
        let r = well_probability(&f, &g, Side::Right);
        assert!((l - 0.5).abs() < 1e-10 && (r - 0.5).abs() < 1e-10);
    }

    #[test]
    fn left_localized_state() {
        let g = grid();
        let sol = solve(&g, &ModelParams::default()).unwrap();
        let loc = localized_basis(&sol);
        let f = loc.left_lower();
        assert!(well_probability(f, &g, Side::Left) > 0.95);
        let total = well_probability(f, &g, Side::Left) + well_probability(f, &g, Side::Right);
        assert!((total - 1.0).abs() < 1e-10);

        let proj = eigenstate_projection(f, &sol);
        assert!((proj.p[0] - 0.5).abs() < 1e-10 && (proj.p[1] - 0.5).abs() < 1e-10);
        assert!(proj.p[2] < 1e-10 && proj.p[3] < 1e-10);
        let proj = eigenstate_projection(&sol.states[2], &sol);
        assert!((proj.p[2] - 1.0).abs() < 1e-10);
        assert!(proj.p[0] + proj.p[1] + proj.p[3] < 1e-10);
    }

    #[test]
    fn spin_up_field_has_sz_one_half() {
        let g = grid();
        let f = SpinorField::from_fn(
            &g,
            |x| Complex64::new((-(x * x)).exp(), 0.0),
            |_| Complex64::default(),
        );
        let f = normalize(&f, &g).unwrap();
        assert!((spin_polarization(&f, &g, Axis::Z) - 0.5).abs() < 1e-12);
        assert!(spin_polarization(&f, &g, Axis::X).abs() < 1e-12);
    }

    #[test]
    fn time_average_basics() {
        let times: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        let c = vec![0.3; times.len()];
        assert!((time_average(&c, &times).unwrap() - 0.3).abs() < 1e-14);
        let w = 2.0 * PI / 2.5;
        let cos: Vec<f64> = times.iter().map(|t| (w * t).cos()).collect();
        assert!(time_average(&cos, &times).unwrap().abs() < 1.0 / times.len() as f64);
        assert!(time_average(&[1.0], &[0.0]).is_err());
        assert!(time_average(&[1.0, 2.0, 3.0], &[0.0, 1.0, 3.0]).is_err());
    }

    #[test]
    fn pure_cosine_gives_one_peak() {
        let h = 0.1;
        let times: Vec<f64> = (0..4096).map(|i| i as f64 * h).collect();
        let w0 = 0.83;
        let series: Vec<f64> = times.iter().map(|t| 0.2 + 0.7 * (w0 * t).cos()).collect();
        let spec = beat_spectrum(&series, &times, None).unwrap();
        let top = spec.strongest(1)[0];
        assert!((top.omega - w0).abs() < spec.bin_width);
        assert!((top.amplitude - 0.7).abs() < 0.2);
        let var = series.iter().map(|v| (v - 0.2).powi(2)).sum::<f64>() / 4096.0;
        let mean = series.iter().sum::<f64>() / 4096.0;
        let var_exact = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4096.0;
        assert!((spec.total_power() - var_exact).abs() < 1e-6 * var_exact);
        assert!((var - var_exact).abs() < 1e-3);
    }

    #[test]
    fn window_too_short_reports_minimum() {
        let times: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let series: Vec<f64> = times.iter().map(|t| t.sin()).collect();
        match beat_spectrum(&series, &times, Some(0.01)) {
            Err(Error::WindowTooShort { min_t_final, .. }) => {
                assert!((min_t_final - 2.0 * PI / 0.01).abs() < 1e-9)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn label_peaks_within_one_bin() {
        let times: Vec<f64> = (0..2000).map(|i| i as f64 * 0.5).collect();
        let series: Vec<f64> = times
            .iter()
            .map(|t| (0.05 * t).cos() + (0.08 * t).cos())
            .collect();
        let mut spec = beat_spectrum(&series, &times, Some(0.01)).unwrap();
        spec.label_peaks(&[("f1".into(), 0.08), ("f2".into(), 0.05), ("x".into(), 0.5)]);
        let labels: Vec<_> = spec
            .strongest(2)
            .iter()
            .map(|p| p.label.clone().unwrap())
            .collect();
        assert!(labels.contains(&"f1".to_string()) && labels.contains(&"f2".to_string()));
    }

    #[test]
    fn trajectory_csv_layout() {
        let g = grid();
        let sol = solve(&g, &ModelParams::default()).unwrap();
        let probes = Probes::new(&sol);
        let mut rec = TrajectoryRecord::default();
        rec.push(probes.measure(&sol.states[0], 0.0));
        rec.push(probes.measure(&sol.states[0], 1.0));
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some(TrajectoryRecord::CSV_HEADER));
        assert_eq!(text.lines().count(), 3);
        let avg = rec.averages().unwrap();
        assert!((avg.p[0] - 1.0).abs() < 1e-10);
        assert!((avg.p_left - 0.5).abs() < 1e-8);
    }
}
