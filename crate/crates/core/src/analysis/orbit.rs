//! Equilibrium, recurrence and spectral tests on a single trajectory.

use std::fmt;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::dynamics::Trajectory;

/// Thresholds shared by the orbit tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitSettings {
    /// Largest `|dm/dt|` accepted as stationary.
    pub eps: f64,
    /// Length of the final window checked for stationarity.
    pub window: f64,
    /// Fraction of the run discarded before recurrence and spectral tests.
    pub burn_in: f64,
    /// Recurrence radius relative to the orbit diameter.
    pub delta: f64,
    /// Relative spread allowed between recurrence gaps.
    pub gap_tol: f64,
    pub min_recurrences: usize,
    /// Peaks below this fraction of the largest one are ignored.
    pub peak_floor: f64,
    /// Largest denominator tried when testing a frequency ratio for rationality.
    pub max_denominator: u32,
    pub rational_tol: f64,
}

impl Default for OrbitSettings {
    fn default() -> Self {
        OrbitSettings {
            eps: 1e-6,
            window: 10.0,
            burn_in: 0.5,
            delta: 0.01,
            gap_tol: 0.02,
            min_recurrences: 3,
            peak_floor: 0.1,
            max_denominator: 20,
            rational_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OrbitKind {
    Equilibrium { point: Vec<f64> },
    Periodic { period: f64, amplitude: Vec<f64> },
    /// Evidence is spectral only.
    QuasiPeriodic { frequencies: Vec<f64> },
    Unclassified,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OrbitDiagnostics {
    /// Largest `|dm/dt|` over the final window.
    pub tail_speed: Option<f64>,
    pub diameter: f64,
    pub recurrence_times: Vec<f64>,
    /// Dominant peaks of the first varying coordinate, strongest first.
    pub peaks: Vec<f64>,
    pub bounded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitClass {
    pub kind: OrbitKind,
    pub diagnostics: OrbitDiagnostics,
}

impl OrbitClass {
    pub fn label(&self) -> &'static str {
        match self.kind {
            OrbitKind::Equilibrium { .. } => "equilibrium",
            OrbitKind::Periodic { .. } => "periodic",
            OrbitKind::QuasiPeriodic { .. } => "quasi-periodic (empirical)",
            OrbitKind::Unclassified => "unclassified",
        }
    }

    pub fn period(&self) -> Option<f64> {
        match self.kind {
            OrbitKind::Periodic { period, .. } => Some(period),
            _ => None,
        }
    }

    pub fn is_equilibrium(&self) -> bool {
        matches!(self.kind, OrbitKind::Equilibrium { .. })
    }
}

impl fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "class: {}", self.label())?;
        match &self.kind {
            OrbitKind::Equilibrium { point } => writeln!(f, "point: {}", join(point))?,
            OrbitKind::Periodic { period, amplitude } => {
                writeln!(f, "period: {period}")?;
                writeln!(f, "amplitude: {}", join(amplitude))?;
            }
            OrbitKind::QuasiPeriodic { frequencies } => writeln!(f, "frequencies: {}", join(frequencies))?,
            OrbitKind::Unclassified => {}
        }
        let d = &self.diagnostics;
        if let Some(s) = d.tail_speed {
            writeln!(f, "tail_speed: {s:e}")?;
        }
        writeln!(f, "diameter: {}", d.diameter)?;
        writeln!(f, "recurrences: {}", d.recurrence_times.len())?;
        writeln!(f, "peaks: {}", join(&d.peaks))?;
        writeln!(f, "bounded: {}", d.bounded)
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Largest `|dm_i/dt|` over samples with `t >= end - window`, or `None` if the
/// run is shorter than the window. Uses recorded utilities when present and
/// difference quotients otherwise.
pub fn tail_speed(traj: &Trajectory, window: f64) -> Option<f64> {
    if traj.is_empty() || traj.end_time() - traj.times[0] < window - 1e-9 {
        return None;
    }
    let from = traj.tail_start(traj.end_time() - window);
    let speed = match &traj.utilities {
        Some(u) => u[from..].iter().flatten().fold(0.0f64, |a, &x| a.max(x.abs())),
        None => {
            let mut s: f64 = 0.0;
            for k in from.max(1)..traj.len() {
                let h = traj.times[k] - traj.times[k - 1];
                if h > 0.0 {
                    for (a, b) in traj.states[k].iter().zip(&traj.states[k - 1]) {
                        s = s.max((a - b).abs() / h);
                    }
                }
            }
            s
        }
    };
    Some(speed)
}

/// The terminal state if `|dm/dt| <= eps` throughout the final `window` time units.
pub fn detect_equilibrium(traj: &Trajectory, eps: f64, window: f64) -> Option<Vec<f64>> {
    let speed = tail_speed(traj, window)?;
    (speed <= eps).then(|| traj.last_state().unwrap_or(&[]).to_vec())
}

/// Post-burn-in slice of the samples.
fn tail(traj: &Trajectory, burn_in: f64) -> (&[f64], &[Vec<f64>]) {
    if traj.is_empty() {
        return (&[], &[]);
    }
    let t0 = traj.times[0];
    let from = traj.tail_start(t0 + burn_in * (traj.end_time() - t0));
    (&traj.times[from..], &traj.states[from..])
}

/// Diagonal of the bounding box of `states`.
fn diameter(states: &[Vec<f64>]) -> f64 {
    let Some(first) = states.first() else {
        return 0.0;
    };
    let mut lo = first.clone();
    let mut hi = first.clone();
    for s in states {
        for (i, &x) in s.iter().enumerate() {
            lo[i] = lo[i].min(x);
            hi[i] = hi[i].max(x);
        }
    }
    lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Returns to the first post-burn-in state, as refined times.
pub fn recurrence_times(traj: &Trajectory, settings: &OrbitSettings) -> Vec<f64> {
    let (times, states) = tail(traj, settings.burn_in);
    let diam = diameter(states);
    if states.len() < 3 || !(diam > 1e-12) || !diam.is_finite() {
        return Vec::new();
    }
    let reference = &states[0];
    let radius2 = (settings.delta * diam).powi(2);
    let d: Vec<f64> = states.iter().map(|s| dist2(s, reference)).collect();
    let mut out = Vec::new();
    // Skip the initial stretch inside the radius, then take one minimum per return.
    let mut k = 1;
    while k < d.len() && d[k] < radius2 {
        k += 1;
    }
    while k + 1 < d.len() {
        if d[k] <= d[k - 1] && d[k] < d[k + 1] {
            let (tm, dm) = parabolic_min(&times[k - 1..=k + 1], &d[k - 1..=k + 1]);
            if dm < radius2 {
                out.push(tm);
                // Leave the neighbourhood before looking for the next return.
                while k + 1 < d.len() && d[k] < radius2 {
                    k += 1;
                }
            }
        }
        k += 1;
    }
    out
}

/// Vertex of the parabola through three samples, clamped to their span.
fn parabolic_min(t: &[f64], y: &[f64]) -> (f64, f64) {
    let (t0, t1, t2) = (t[0], t[1], t[2]);
    let (y0, y1, y2) = (y[0], y[1], y[2]);
    let denom = (t0 - t1) * (t0 - t2) * (t1 - t2);
    if denom.abs() < 1e-300 {
        return (t1, y1);
    }
    let a = (t2 * (y1 - y0) + t1 * (y0 - y2) + t0 * (y2 - y1)) / denom;
    let b = (t2 * t2 * (y0 - y1) + t1 * t1 * (y2 - y0) + t0 * t0 * (y1 - y2)) / denom;
    if a <= 0.0 {
        return (t1, y1);
    }
    let tv = (-b / (2.0 * a)).clamp(t0, t2);
    let c = y1 - a * t1 * t1 - b * t1;
    (tv, (a * tv * tv + b * tv + c).max(0.0))
}

/// Period from at least `min_recurrences` returns with consistent gaps.
pub fn detect_period(traj: &Trajectory, settings: &OrbitSettings) -> Option<f64> {
    period_from(traj, settings, &recurrence_times(traj, settings))
}

fn period_from(traj: &Trajectory, settings: &OrbitSettings, returns: &[f64]) -> Option<f64> {
    if returns.len() < settings.min_recurrences {
        return None;
    }
    let (times, _) = tail(traj, settings.burn_in);
    let start = times[0];
    let mut gaps = Vec::with_capacity(returns.len());
    let mut prev = start;
    for &r in returns {
        gaps.push(r - prev);
        prev = r;
    }
    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().copied().fold(0.0, f64::max);
    (lo > 0.0 && hi <= lo * (1.0 + settings.gap_tol)).then(|| (returns[returns.len() - 1] - start) / returns.len() as f64)
}

/// Coordinate `i` on a uniform grid spanning `times`, by linear interpolation.
fn resample(times: &[f64], values: &[f64], step: f64) -> Vec<f64> {
    let t0 = times[0];
    let n = ((times[times.len() - 1] - t0) / step + 1e-9).floor() as usize + 1;
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    for j in 0..n {
        let t = t0 + j as f64 * step;
        while k + 2 < times.len() && times[k + 1] <= t {
            k += 1;
        }
        let (ta, tb) = (times[k], times[k + 1]);
        let w = if tb > ta { ((t - ta) / (tb - ta)).clamp(0.0, 1.0) } else { 1.0 };
        out.push(values[k] + w * (values[k + 1] - values[k]));
    }
    out
}

/// Typical spacing of the regular samples.
fn sample_step(traj: &Trajectory, times: &[f64]) -> f64 {
    if let Some(s) = traj.settings {
        return s.sample_every;
    }
    let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).filter(|&g| g > 0.0).collect();
    gaps.sort_by(f64::total_cmp);
    gaps.get(gaps.len() / 2).copied().unwrap_or(1.0)
}

const ZERO_PAD: usize = 4;

/// Frequencies of the dominant peaks of a Hann-windowed signal, strongest first.
pub fn spectral_peaks(signal: &[f64], step: f64, floor: f64) -> Vec<f64> {
    let n = signal.len();
    if n < 8 {
        return Vec::new();
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    // Zero padding interpolates the spectrum so that close peaks are located
    // to a small fraction of the raw bin width.
    let len = ZERO_PAD * n;
    let mut buf: Vec<Complex<f64>> = signal
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos();
            Complex::new((x - mean) * w, 0.0)
        })
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..len / 2 + 1].iter().map(|c| c.norm()).collect();
    let top = mag[2 * ZERO_PAD..].iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Vec::new();
    }
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for k in 2 * ZERO_PAD..mag.len() - 1 {
        if mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] >= floor * top {
            // Parabolic interpolation of the log magnitude.
            let (a, b, c) = (mag[k - 1].max(1e-300).ln(), mag[k].ln(), mag[k + 1].max(1e-300).ln());
            let denom = a - 2.0 * b + c;
            let offset = if denom < 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
            peaks.push(((k as f64 + offset) / (len as f64 * step), mag[k]));
        }
    }
    peaks.sort_by(|x, y| y.1.total_cmp(&x.1));
    peaks.into_iter().map(|(f, _)| f).collect()
}

/// `true` when `r` is within `tol` of some `p/q` with `q <= max_q`.
pub fn is_near_rational(r: f64, max_q: u32, tol: f64) -> bool {
    (1..=max_q).any(|q| {
        let q = q as f64;
        (r - (r * q).round() / q).abs() <= tol
    })
}

/// First pair of peaks whose ratio passes no rational test.
fn incommensurate_pair(peaks: &[f64], settings: &OrbitSettings) -> Option<(f64, f64)> {
    for (i, &a) in peaks.iter().enumerate() {
        for &b in &peaks[i + 1..] {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if lo > 0.0 && !is_near_rational(hi / lo, settings.max_denominator, settings.rational_tol) {
                return Some((a, b));
            }
        }
    }
    None
}

/// Sup norm stays within a tenth of its first-half value over the second half of the tail.
fn is_bounded(states: &[Vec<f64>]) -> bool {
    if states.iter().flatten().any(|x| !x.is_finite()) {
        return false;
    }
    let half = states.len() / 2;
    let sup = |s: &[Vec<f64>]| s.iter().flatten().fold(0.0f64, |a, &x| a.max(x.abs()));
    sup(&states[half..]) <= 1.1 * sup(&states[..half]) + 1e-9
}

/// Equilibrium, then periodic, then spectrally quasi-periodic, else unclassified.
///
/// The quasi-periodic class needs a bounded orbit and one coordinate whose
/// dominant peaks include an incommensurate pair. A subsystem that receives
/// no input stays periodic, so not every coordinate has to show both tones.
pub fn classify_orbit(traj: &Trajectory, settings: &OrbitSettings) -> OrbitClass {
    let (times, states) = tail(traj, settings.burn_in);
    let mut diagnostics = OrbitDiagnostics {
        tail_speed: tail_speed(traj, settings.window),
        diameter: diameter(states),
        bounded: is_bounded(states),
        ..Default::default()
    };
    if let Some(point) = detect_equilibrium(traj, settings.eps, settings.window) {
        return OrbitClass {
            kind: OrbitKind::Equilibrium { point },
            diagnostics,
        };
    }
    if states.len() < 8 {
        return OrbitClass {
            kind: OrbitKind::Unclassified,
            diagnostics,
        };
    }
    diagnostics.recurrence_times = recurrence_times(traj, settings);
    if let Some(period) = period_from(traj, settings, &diagnostics.recurrence_times) {
        let amplitude = (0..traj.dim())
            .map(|i| {
                let (lo, hi) = states.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s[i]), hi.max(s[i])));
                0.5 * (hi - lo)
            })
            .collect();
        return OrbitClass {
            kind: OrbitKind::Periodic { period, amplitude },
            diagnostics,
        };
    }
    let step = sample_step(traj, times);
    let mut pair = None;
    for i in 0..traj.dim() {
        let values: Vec<f64> = states.iter().map(|s| s[i]).collect();
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if hi - lo <= 1e-6 {
            continue;
        }
        let peaks = spectral_peaks(&resample(times, &values, step), step, settings.peak_floor);
        // Report the spectrum that carries the evidence, or the first one seen.
        if let Some(p) = incommensurate_pair(&peaks, settings) {
            pair = Some(p);
            diagnostics.peaks = peaks;
            break;
        }
        if diagnostics.peaks.is_empty() {
            diagnostics.peaks = peaks;
        }
    }
    let kind = match pair {
        Some((a, b)) if diagnostics.bounded => OrbitKind::QuasiPeriodic { frequencies: vec![a, b] },
        _ => OrbitKind::Unclassified,
    };
    OrbitClass { kind, diagnostics }
}
