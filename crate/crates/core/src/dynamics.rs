//! Integration of `dm/dt = U(m)`.

use std::cell::{Cell, RefCell};
use std::fmt;

use crate::error::{Error, Result};
use crate::format;
use crate::market::{MarketInstance, MultiplierLimits};
use crate::seed::stable_hash;
use crate::utility::{discrete_regime, Evaluator};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Rk4,
    /// Runge-Kutta-Fehlberg 4(5); the 5th-order solution is propagated.
    Rkf45 { atol: f64, rtol: f64 },
}

impl Method {
    pub fn rkf45() -> Self {
        Method::Rkf45 { atol: 1e-9, rtol: 1e-9 }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Rk4 => f.write_str("rk4"),
            Method::Rkf45 { atol, rtol } => write!(f, "rkf45(atol={atol:e},rtol={rtol:e})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    pub horizon: f64,
    /// Fixed step for RK4; initial step for RKF45.
    pub dt: f64,
    pub method: Method,
    pub sample_every: f64,
    pub record_utilities: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            horizon: 100.0,
            dt: 0.01,
            method: Method::Rk4,
            sample_every: 0.1,
            record_utilities: true,
        }
    }
}

impl Settings {
    pub fn new(horizon: f64) -> Self {
        Settings {
            horizon,
            ..Default::default()
        }
    }

    pub fn dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn sample_every(mut self, s: f64) -> Self {
        self.sample_every = s;
        self
    }

    pub fn method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    fn check(&self) -> Result<()> {
        for (name, x) in [("horizon", self.horizon), ("dt", self.dt), ("sample_every", self.sample_every)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {x}")));
            }
        }
        if let Method::Rkf45 { atol, rtol } = self.method {
            if !(atol > 0.0 && rtol >= 0.0) {
                return Err(Error::InvalidArgument("rkf45 tolerances must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub bidders: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Right-hand side at each sample. Equal to `U(m)` except for bidders
    /// pinned at a native floor or ceiling, where the outward part is removed.
    pub utilities: Option<Vec<Vec<f64>>>,
    /// Hash of the instance's canonical JSON; zero if unknown.
    pub fingerprint: u64,
    pub settings: Option<Settings>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn new(bidders: Vec<String>) -> Self {
        Trajectory {
            bidders,
            times: Vec::new(),
            states: Vec::new(),
            utilities: None,
            fingerprint: 0,
            settings: None,
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.bidders.len()
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    pub fn end_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// Samples with `t >= from`.
    pub fn tail_start(&self, from: f64) -> usize {
        self.times.partition_point(|&t| t < from)
    }
}

pub fn fingerprint(inst: &MarketInstance) -> u64 {
    stable_hash(format::to_json(inst).as_bytes())
}

/// `m_i(T) - m_i(0) - integral U_i` with the trapezoid rule on the samples.
pub fn fundamental_identity_residual(traj: &Trajectory) -> Option<Vec<f64>> {
    let u = traj.utilities.as_ref()?;
    let n = traj.dim();
    if traj.is_empty() {
        return Some(vec![0.0; n]);
    }
    let last = traj.len() - 1;
    let mut res: Vec<f64> = (0..n).map(|i| traj.states[last][i] - traj.states[0][i]).collect();
    for k in 0..last {
        let h = traj.times[k + 1] - traj.times[k];
        for i in 0..n {
            res[i] -= 0.5 * h * (u[k][i] + u[k + 1][i]);
        }
    }
    Some(res)
}

/// Offset used to probe either side of a discontinuity in a bidder's own coordinate.
const SLIDE_PROBE: f64 = 1e-9;
/// Smallest drop in `U_i` across the probe that counts as a discontinuity.
const SLIDE_JUMP: f64 = 1e-6;
/// Velocity jumps below this are not recorded as extra samples.
const EVENT_JUMP: f64 = 1e-9;
/// Events allowed within one sampling interval before event handling is switched off.
const MAX_EVENTS_PER_SAMPLE: usize = 10_000;

/// 1 while held at the ceiling, 2 while held at the floor, else 0.
fn limit_flag(m: f64, u: f64, lim: &MultiplierLimits) -> usize {
    usize::from(m >= lim.ceiling && u > 0.0) + 2 * usize::from(m <= lim.floor && u < 0.0)
}

struct System<'a> {
    eval: &'a Evaluator,
    inst: &'a MarketInstance,
    /// Locate winner-set changes and hold attracting discontinuities.
    events: bool,
    /// Coordinates held on an attracting discontinuity (Filippov sliding).
    stuck: Vec<bool>,
    /// Items each bidder values.
    items_of: Vec<Vec<usize>>,
    /// Regime at the start of the current step.
    base: Vec<usize>,
    /// Set by `rhs` when it sees a regime other than `base`.
    dirty: Cell<bool>,
    scratch: RefCell<(Vec<usize>, Vec<f64>)>,
}

impl System<'_> {
    fn rhs(&self, m: &[f64], out: &mut [f64]) -> Result<()> {
        if self.events {
            let mut guard = self.scratch.borrow_mut();
            let regime = &mut guard.0;
            self.eval.utilities_and_regime(self.inst, m, out, regime)?;
            for (&b, lim) in &self.inst.limits {
                regime.push(limit_flag(m[b], out[b], lim));
            }
            if *regime != self.base {
                self.dirty.set(true);
            }
        } else {
            self.eval.utilities_into(self.inst, m, out)?;
        }
        for (&b, lim) in &self.inst.limits {
            if (m[b] >= lim.ceiling && out[b] > 0.0) || (m[b] <= lim.floor && out[b] < 0.0) {
                out[b] = 0.0;
            }
        }
        for (x, &s) in out.iter_mut().zip(&self.stuck) {
            if s {
                *x = 0.0;
            }
        }
        Ok(())
    }

    /// Clamps to zero and to native limits; returns the coordinates clamped at zero.
    fn project(&self, m: &mut [f64]) -> Vec<usize> {
        let mut hit = Vec::new();
        for (i, x) in m.iter_mut().enumerate() {
            if *x < 0.0 {
                *x = 0.0;
                hit.push(i);
            }
        }
        for (&b, lim) in &self.inst.limits {
            m[b] = m[b].clamp(lim.floor, lim.ceiling);
        }
        hit
    }

    fn regime(&self, m: &[f64], out: &mut Vec<usize>) -> Result<()> {
        discrete_regime(self.inst, m, out)?;
        let mut scratch = Vec::new();
        for (&b, lim) in &self.inst.limits {
            // The raw utility only matters on a bound.
            let u = if m[b] >= lim.ceiling || m[b] <= lim.floor {
                scratch.resize(m.len(), 0.0);
                self.eval.partial_utility(self.inst, &self.items_of[b], m, b, &mut scratch)?
            } else {
                0.0
            };
            out.push(limit_flag(m[b], u, lim));
        }
        Ok(())
    }

    fn in_base_regime(&self, m: &[f64]) -> Result<bool> {
        let mut guard = self.scratch.borrow_mut();
        self.regime(m, &mut guard.0)?;
        Ok(guard.0 == self.base)
    }

    fn reset_base(&mut self, m: &[f64]) -> Result<()> {
        let mut base = std::mem::take(&mut self.base);
        self.regime(m, &mut base)?;
        self.base = base;
        Ok(())
    }

    /// `U_i` is positive just below `m_i` and negative just above, with a jump.
    fn slides(&self, m: &[f64], i: usize) -> Result<bool> {
        if let Some(lim) = self.inst.limits.get(&i) {
            if m[i] <= lim.floor || m[i] >= lim.ceiling {
                return Ok(false);
            }
        }
        let d = SLIDE_PROBE * m[i].abs().max(1.0);
        let mut probe = m.to_vec();
        let mut guard = self.scratch.borrow_mut();
        let scratch = &mut guard.1;
        scratch.resize(m.len(), 0.0);
        probe[i] = m[i] - d;
        let below = self.eval.partial_utility(self.inst, &self.items_of[i], &probe, i, scratch)?;
        probe[i] = m[i] + d;
        let above = self.eval.partial_utility(self.inst, &self.items_of[i], &probe, i, scratch)?;
        Ok(below > 0.0 && above < 0.0 && below - above > SLIDE_JUMP)
    }
}

fn rk4_step(sys: &System, m: &[f64], h: f64, k: &mut [Vec<f64>; 4], tmp: &mut [f64], out: &mut [f64]) -> Result<()> {
    let n = m.len();
    let [k1, k2, k3, k4] = k;
    sys.rhs(m, k1)?;
    for i in 0..n {
        tmp[i] = m[i] + 0.5 * h * k1[i];
    }
    sys.rhs(tmp, k2)?;
    for i in 0..n {
        tmp[i] = m[i] + 0.5 * h * k2[i];
    }
    sys.rhs(tmp, k3)?;
    for i in 0..n {
        tmp[i] = m[i] + h * k3[i];
    }
    sys.rhs(tmp, k4)?;
    for i in 0..n {
        out[i] = m[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(())
}

// Fehlberg tableau.
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0];
const B5: [f64; 6] = [16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0];

/// One RKF45 attempt; returns the 5th-order solution in `out` and the error norm relative to tolerance.
#[allow(clippy::too_many_arguments)]
fn rkf45_step(sys: &System, m: &[f64], h: f64, atol: f64, rtol: f64, k: &mut [Vec<f64>; 6], tmp: &mut [f64], out: &mut [f64]) -> Result<f64> {
    let n = m.len();
    for s in 0..6 {
        for i in 0..n {
            let mut acc = m[i];
            for (j, a) in A[s].iter().enumerate().take(s) {
                acc += h * a * k[j][i];
            }
            tmp[i] = acc;
        }
        sys.rhs(tmp, &mut k[s])?;
    }
    let mut err: f64 = 0.0;
    for i in 0..n {
        let mut y4 = m[i];
        let mut y5 = m[i];
        for s in 0..6 {
            y4 += h * B4[s] * k[s][i];
            y5 += h * B5[s] * k[s][i];
        }
        out[i] = y5;
        let scale = atol + rtol * m[i].abs().max(y5.abs());
        err = err.max(((y5 - y4) / scale).abs());
    }
    Ok(err)
}

struct Workspace {
    k4: [Vec<f64>; 4],
    k6: [Vec<f64>; 6],
    tmp: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            k4: std::array::from_fn(|_| vec![0.0; n]),
            k6: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }

    /// One step of size `h`; the error norm is zero for RK4.
    fn step(&mut self, sys: &System, method: Method, m: &[f64], h: f64, out: &mut [f64]) -> Result<f64> {
        match method {
            Method::Rk4 => rk4_step(sys, m, h, &mut self.k4, &mut self.tmp, out).map(|_| 0.0),
            Method::Rkf45 { atol, rtol } => rkf45_step(sys, m, h, atol, rtol, &mut self.k6, &mut self.tmp, out),
        }
    }
}

/// Integrates with the default quadrature.
pub fn integrate(inst: &MarketInstance, m0: &[f64], settings: &Settings) -> Result<Trajectory> {
    integrate_with(&Evaluator::default(), inst, m0, settings)
}

/// Integrates `dm/dt = U(m)` from `m0`, sampling every `settings.sample_every`.
///
/// For instances with fixed-value items or native limits the step is cut at
/// every change of winner set, and both one-sided velocities are recorded as
/// samples at the cut. A bidder whose own utility jumps from positive to
/// negative at the cut is held there until that stops being true.
pub fn integrate_with(eval: &Evaluator, inst: &MarketInstance, m0: &[f64], settings: &Settings) -> Result<Trajectory> {
    settings.check()?;
    inst.ensure_valid()?;
    let n = inst.n_bidders();
    if m0.len() != n {
        return Err(Error::InvalidArgument(format!("instance has {n} bidders but m0 has {} entries", m0.len())));
    }
    if let Some(i) = m0.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("m0[{i}] is not finite")));
    }

    let mut sys = System {
        eval,
        inst,
        events: !inst.limits.is_empty() || inst.items.iter().any(|it| !it.is_smooth()),
        stuck: vec![false; n],
        items_of: (0..n)
            .map(|b| (0..inst.items.len()).filter(|&j| inst.items[j].values.contains_key(&b)).collect())
            .collect(),
        base: Vec::new(),
        dirty: Cell::new(false),
        scratch: RefCell::new((Vec::new(), Vec::new())),
    };
    let mut clamped_at_zero = vec![false; n];
    let mut traj = Trajectory::new(inst.bidders.clone());
    traj.fingerprint = fingerprint(inst);
    traj.settings = Some(*settings);
    let mut u_rec = Vec::new();

    let mut m = m0.to_vec();
    for i in sys.project(&mut m) {
        clamped_at_zero[i] = true;
    }
    if sys.events {
        sys.reset_base(&m)?;
    }
    let mut u = vec![0.0; n];
    let mut u_alt = vec![0.0; n];
    let record = |traj: &mut Trajectory, u_rec: &mut Vec<Vec<f64>>, t: f64, m: &[f64], u: &[f64]| {
        traj.times.push(t);
        traj.states.push(m.to_vec());
        if settings.record_utilities {
            u_rec.push(u.to_vec());
        }
    };
    sys.rhs(&m, &mut u)?;
    record(&mut traj, &mut u_rec, 0.0, &m, &u);

    let n_samples = (settings.horizon / settings.sample_every - 1e-9).ceil() as usize;
    let mut ws = Workspace::new(n);
    let mut next = vec![0.0; n];
    let mut lo_state = vec![0.0; n];
    let mut mid = vec![0.0; n];
    let mut checked_at: Option<Vec<f64>> = None;
    let mut h_adapt = settings.dt;
    let mut t = 0.0;

    for s in 1..=n_samples {
        let t_target = (s as f64 * settings.sample_every).min(settings.horizon);
        let mut n_events = 0;
        loop {
            let remaining = t_target - t;
            if remaining <= 1e-13 * t_target.max(1.0) {
                break;
            }
            if sys.stuck.iter().any(|&x| x) && checked_at.as_deref() != Some(m.as_slice()) {
                sys.rhs(&m, &mut u)?;
                let mut released = false;
                for i in 0..n {
                    if sys.stuck[i] && !sys.slides(&m, i)? {
                        sys.stuck[i] = false;
                        released = true;
                    }
                }
                if released {
                    sys.rhs(&m, &mut u_alt)?;
                    if max_gap(&u, &u_alt) > EVENT_JUMP {
                        record(&mut traj, &mut u_rec, t, &m, &u);
                        record(&mut traj, &mut u_rec, t, &m, &u_alt);
                    }
                }
                checked_at = Some(m.clone());
            }
            let (h, clipped) = match settings.method {
                Method::Rk4 => (remaining / (remaining / settings.dt - 1e-9).ceil().max(1.0), false),
                Method::Rkf45 { .. } => {
                    if h_adapt >= remaining {
                        (remaining, true)
                    } else {
                        (h_adapt, false)
                    }
                }
            };
            sys.dirty.set(false);
            let err = ws.step(&sys, settings.method, &m, h, &mut next)?;
            let hit = sys.project(&mut next);
            let finite = next.iter().all(|x| x.is_finite());
            let clean = !sys.events || !finite || (!sys.dirty.get() && sys.in_base_regime(&next)?);
            if !clean && n_events == MAX_EVENTS_PER_SAMPLE {
                sys.events = false;
                sys.stuck.fill(false);
                traj.warnings.push(format!("event handling switched off after {n_events} events near t = {t}"));
                continue;
            }
            if !clean {
                n_events += 1;
                // Largest fraction of the step that stays inside the current regime.
                let (mut lo, mut hi) = (0.0, 1.0);
                lo_state.copy_from_slice(&m);
                while (hi - lo) * h > 1e-13 * t.max(1.0) {
                    let theta = 0.5 * (lo + hi);
                    sys.dirty.set(false);
                    ws.step(&sys, settings.method, &m, theta * h, &mut mid)?;
                    sys.project(&mut mid);
                    if !sys.dirty.get() && sys.in_base_regime(&mid)? {
                        lo = theta;
                        lo_state.copy_from_slice(&mid);
                    } else {
                        hi = theta;
                    }
                }
                let t_event = t + lo * h;
                sys.rhs(&lo_state, &mut u)?;
                let mut newly_stuck = false;
                for i in 0..n {
                    if !sys.stuck[i] && sys.slides(&lo_state, i)? {
                        sys.stuck[i] = true;
                        newly_stuck = true;
                    }
                }
                if newly_stuck {
                    sys.rhs(&lo_state, &mut u_alt)?;
                    if max_gap(&u, &u_alt) > EVENT_JUMP {
                        record(&mut traj, &mut u_rec, t_event, &lo_state, &u);
                        record(&mut traj, &mut u_rec, t_event, &lo_state, &u_alt);
                    }
                    t = t_event;
                    m.copy_from_slice(&lo_state);
                    checked_at = Some(m.clone());
                    continue;
                }
                // Cross the surface with a short Euler step along the incoming velocity.
                let room = t_target - t_event;
                let mut eps = ((hi - lo) * h).max(1e-15).min(room);
                let mut crossed = false;
                loop {
                    for i in 0..n {
                        mid[i] = lo_state[i] + eps * u[i];
                    }
                    sys.project(&mut mid);
                    if !sys.in_base_regime(&mid)? {
                        crossed = true;
                        break;
                    }
                    if eps > h || eps >= room {
                        break;
                    }
                    eps = (2.0 * eps).min(room);
                }
                if crossed {
                    sys.rhs(&mid, &mut u_alt)?;
                    if max_gap(&u, &u_alt) > EVENT_JUMP {
                        record(&mut traj, &mut u_rec, t_event, &lo_state, &u);
                    }
                    // Even a continuous switch is usually a kink in the velocity.
                    record(&mut traj, &mut u_rec, t_event + eps, &mid, &u_alt);
                    t = t_event + eps;
                    m.copy_from_slice(&mid);
                    sys.reset_base(&m)?;
                    continue;
                }
                // No jump to cross, e.g. a coordinate leaving a bound. Step to the far
                // side of the switch and record the kink there.
                ws.step(&sys, settings.method, &m, hi * h, &mut mid)?;
                sys.project(&mut mid);
                if !sys.in_base_regime(&mid)? {
                    t += hi * h;
                    m.copy_from_slice(&mid);
                    sys.reset_base(&m)?;
                    sys.rhs(&m, &mut u)?;
                    record(&mut traj, &mut u_rec, t, &m, &u);
                    continue;
                }
                // The stages grazed another regime without the path entering it.
            } else if let Method::Rkf45 { .. } = settings.method {
                if finite {
                    let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    if !(clipped && err <= 1.0) {
                        h_adapt = h * factor;
                    }
                    if h_adapt < 1e-14 * settings.horizon.max(1.0) {
                        return Err(Error::InvalidArgument(format!("rkf45 step size underflow at t = {t}")));
                    }
                    if err > 1.0 {
                        continue;
                    }
                }
            }
            for i in hit {
                clamped_at_zero[i] = true;
            }
            std::mem::swap(&mut m, &mut next);
            if sys.events && finite {
                sys.reset_base(&m)?;
            }
            if !finite || h >= remaining || clipped {
                break;
            }
            t += h;
        }
        t = t_target;
        if let Some(i) = m.iter().position(|x| !x.is_finite()) {
            traj.utilities = settings.record_utilities.then_some(u_rec);
            return Err(Error::NonFinite {
                time: t,
                bidder: i,
                partial: Box::new(traj),
            });
        }
        sys.rhs(&m, &mut u)?;
        record(&mut traj, &mut u_rec, t, &m, &u);
    }

    for (i, hit) in clamped_at_zero.iter().enumerate() {
        if *hit {
            traj.warnings.push(format!("multiplier of bidder '{}' was clamped at 0", inst.bidders[i]));
        }
    }
    traj.utilities = settings.record_utilities.then_some(u_rec);
    Ok(traj)
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::ItemSpec;

    #[test]
    fn empty_instance_is_constant() {
        let inst = MarketInstance::numbered(2, vec![], 1.0);
        let traj = integrate(&inst, &[1.3, 2.0], &Settings::new(5.0)).unwrap();
        assert_eq!(traj.len(), 51);
        assert!(traj.states.iter().all(|s| s == &vec![1.3, 2.0]));
        assert_eq!(fundamental_identity_residual(&traj).unwrap(), vec![0.0, 0.0]);
        assert!((traj.end_time() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn lone_bidder_first_price_decays_to_one() {
        // A single fixed item of value 1 at lambda = 0 gives U = 1 - m.
        let inst = MarketInstance::numbered(1, vec![ItemSpec::fixed([(0, 1.0)])], 0.0);
        for method in [Method::Rk4, Method::rkf45()] {
            let traj = integrate(&inst, &[2.0], &Settings::new(3.0).method(method)).unwrap();
            let want = 1.0 + (-3.0f64).exp();
            assert!((traj.last_state().unwrap()[0] - want).abs() < 1e-8, "{method}: {} vs {want}", traj.last_state().unwrap()[0]);
        }
    }

    #[test]
    fn clamp_at_zero_warns() {
        // A lone bidder paying a reserve above its value is pushed down to 0.
        let inst = MarketInstance::numbered(1, vec![ItemSpec::fixed([(0, 1.0)]).with_reserve(0.5)], 0.0);
        // U = 1 - (0.5 + ... ) with first price: 1 - m once m > 0.5; below 0.5 nothing is won.
        let traj = integrate(&inst, &[-0.5], &Settings::new(1.0)).unwrap();
        assert_eq!(traj.states[0][0], 0.0);
        assert_eq!(traj.warnings.len(), 1);
    }

    #[test]
    fn rejects_bad_settings() {
        let inst = MarketInstance::numbered(1, vec![], 1.0);
        assert!(integrate(&inst, &[1.0], &Settings::new(0.0)).is_err());
        assert!(integrate(&inst, &[1.0], &Settings::new(1.0).dt(-1.0)).is_err());
        assert!(integrate(&inst, &[1.0, 2.0], &Settings::new(1.0)).is_err());
    }

    #[test]
    fn samples_land_on_grid() {
        let inst = MarketInstance::numbered(1, vec![], 1.0);
        let traj = integrate(&inst, &[1.0], &Settings::new(1.05).sample_every(0.1)).unwrap();
        assert_eq!(traj.len(), 12);
        assert!((traj.times[3] - 0.3).abs() < 1e-15);
        assert_eq!(traj.end_time(), 1.05);
    }

    fn lone(items: Vec<ItemSpec>) -> MarketInstance {
        MarketInstance::numbered(1, items, 1.0)
    }

    #[test]
    fn crossing_a_jump_is_exact() {
        // U = 1 below 1.5 and 1 + (1 - 1.5) = 0.5 above.
        let inst = lone(vec![ItemSpec::fixed([(0, 1.0)]), ItemSpec::fixed([(0, 1.0)]).with_reserve(1.5)]);
        for method in [Method::Rk4, Method::rkf45()] {
            let traj = integrate(&inst, &[1.0], &Settings::new(2.0).method(method)).unwrap();
            assert!((traj.last_state().unwrap()[0] - 2.25).abs() < 1e-10, "{method}");
            assert!(fundamental_identity_residual(&traj).unwrap()[0].abs() < 1e-10);
            // Two extra rows carry the one-sided velocities at t = 0.5.
            assert_eq!(traj.len(), 23);
            let u = traj.utilities.as_ref().unwrap();
            let k = (0..traj.len() - 1).find(|&k| u[k][0] != u[k + 1][0]).unwrap();
            assert_eq!((u[k][0], u[k + 1][0]), (1.0, 0.5));
            assert!((traj.times[k] - 0.5).abs() < 1e-10 && (traj.times[k + 1] - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn attracting_jump_holds_the_bidder() {
        // U = 1 below 2 and 1 + 10 - 20 = -9 above.
        let ceiling = ItemSpec::fixed([(0, 10.0)]).with_reserve(20.0).with_tie_break(crate::market::TieBreak::Disfavor(0));
        let inst = lone(vec![ItemSpec::fixed([(0, 1.0)]), ceiling]);
        let traj = integrate(&inst, &[1.5], &Settings::new(3.0).dt(0.03)).unwrap();
        assert!((traj.last_state().unwrap()[0] - 2.0).abs() < 1e-12);
        assert_eq!(traj.utilities.as_ref().unwrap().last().unwrap()[0], 0.0);
        assert!(fundamental_identity_residual(&traj).unwrap()[0].abs() < 1e-12);
    }

    #[test]
    fn held_bidder_is_released() {
        // Bidder 0 wins the shared item at price m_1 / 2 while bidder 1 climbs at
        // rate 1, and is held at 2 by the ceiling item until 1 - m_1 / 2 turns
        // negative at t = 1.
        let ceiling = ItemSpec::fixed([(0, 10.0)]).with_reserve(20.0).with_tie_break(crate::market::TieBreak::Disfavor(0));
        let shared = ItemSpec::fixed([(0, 1.0), (1, 0.5)]);
        let inst = MarketInstance::numbered(2, vec![shared, ItemSpec::fixed([(1, 1.0)]), ceiling], 1.0);
        let traj = integrate(&inst, &[1.9, 1.0], &Settings::new(2.0).dt(0.01)).unwrap();
        let x = traj.coordinate(0);
        let at = |t: f64| x[traj.times.iter().position(|&s| (s - t).abs() < 1e-12).unwrap()];
        let free = |t: f64| 1.9 + 0.5 * t - 0.25 * t * t;
        assert!((at(0.2) - free(0.2)).abs() < 1e-12);
        assert!((at(0.5) - 2.0).abs() < 1e-12);
        assert!((at(1.0) - 2.0).abs() < 1e-12);
        assert!((at(2.0) - 1.75).abs() < 1e-4, "{}", at(2.0));
        assert!(fundamental_identity_residual(&traj).unwrap().iter().all(|r| r.abs() < 1e-6));
    }
}
