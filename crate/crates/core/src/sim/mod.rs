//! Exact simulation of planar switched affine systems.
//!
//! Each mode's flow is the closed-form `x_u + e^{At}(x0 - x_u)`, so the
//! sampling step only controls the reporting resolution. Threshold crossings
//! of the first coordinate are located on that exact flow by bisection and
//! followed by the reset jump `(v, h) <- (v_R, h_R(mode))`.

mod flow;
mod io;
mod trap;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{bisect, golden_max};
use crate::planar::{ModeId, ModeTable, PlanarAffineMode, Vec2};

pub use flow::{affine_flow, expm, matrix_exp_2x2};
pub use io::{read_csv, write_csv, CsvError};
pub use trap::{verify_trapping, SwitchCheck, TrapReport, TubeCheck, TRAP_TOL};

/// Time tolerance of threshold-crossing bisection.
pub const CROSSING_TOL: f64 = 1e-10;

/// Sub-intervals scanned per sampling step when looking for a crossing.
const CROSSING_PIECES: usize = 16;

/// Piecewise-constant mode schedule: `switches[i] = (t_i, mode)` holds on
/// `[t_i, t_{i+1})`, the last entry up to `horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSignal {
    switches: Vec<(f64, ModeId)>,
    horizon: f64,
}

impl SwitchingSignal {
    pub fn new(switches: Vec<(f64, ModeId)>, horizon: f64) -> Result<Self> {
        let Some((t0, _)) = switches.first() else {
            return Err(Error::InvalidSignal("no switches".into()));
        };
        if *t0 != 0.0 {
            return Err(Error::InvalidSignal(format!("first switch at t = {t0}, expected 0")));
        }
        for w in switches.windows(2) {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(Error::InvalidSignal(format!(
                    "switch times must increase strictly ({} then {})",
                    w[0].0, w[1].0
                )));
            }
            if w[1].1 == w[0].1 {
                return Err(Error::InvalidSignal(format!(
                    "consecutive entries at t = {} and t = {} repeat mode {}",
                    w[0].0, w[1].0, w[0].1
                )));
            }
        }
        let last = switches.last().map(|s| s.0).unwrap_or(0.0);
        if !(horizon >= last && horizon.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "horizon {horizon} precedes last switch at {last}"
            )));
        }
        Ok(SwitchingSignal { switches, horizon })
    }

    pub fn switches(&self) -> &[(f64, ModeId)] {
        &self.switches
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `(start, end, mode)` for every constant piece.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, &ModeId)> + '_ {
        self.switches.iter().enumerate().map(move |(i, (t, id))| {
            let end = self.switches.get(i + 1).map_or(self.horizon, |s| s.0);
            (*t, end, id)
        })
    }

    /// Shortest inter-switch gap divided by 1000.
    pub fn default_dt(&self) -> f64 {
        let min_gap = self
            .segments()
            .map(|(s, e, _)| e - s)
            .filter(|g| *g > 0.0)
            .fold(f64::INFINITY, f64::min);
        if min_gap.is_finite() {
            min_gap / 1000.0
        } else {
            1e-3
        }
    }

    pub fn mode_order(&self) -> Vec<ModeId> {
        self.switches.iter().map(|s| s.1.clone()).collect()
    }
}

/// Threshold and reset constants of an integrate-and-fire style reset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetRule {
    pub v_th: f64,
    pub v_reset: f64,
    /// Recovery-variable value after a reset, per active mode.
    pub h_reset: BTreeMap<ModeId, f64>,
}

impl ResetRule {
    pub fn new(v_th: f64, v_reset: f64, h_reset: BTreeMap<ModeId, f64>) -> Result<Self> {
        if !(v_reset < v_th) {
            return Err(Error::InvalidParameter {
                name: "v_R",
                value: v_reset,
                reason: "reset potential must lie below the threshold",
            });
        }
        Ok(ResetRule {
            v_th,
            v_reset,
            h_reset,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec2,
    pub mode: ModeId,
    /// Lyapunov value of the active mode.
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Switch,
    Reset,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Switch => "switch",
            EventKind::Reset => "reset",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub detail: String,
}

/// Time-ordered samples plus switch/reset markers.
///
/// At a switch time two samples share `t`: the last one of the old mode and
/// the first one of the new mode. A reset likewise records the state just
/// before and just after the jump.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
}

/// Maximal run of consecutive samples sharing one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<'a> {
    pub mode: &'a ModeId,
    pub samples: &'a [Sample],
}

impl Trajectory {
    pub fn segments(&self) -> Vec<Segment<'_>> {
        self.samples
            .chunk_by(|p, q| p.mode == q.mode)
            .map(|run| Segment {
                mode: &run[0].mode,
                samples: run,
            })
            .collect()
    }

    pub fn resets(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.kind == EventKind::Reset)
    }

    pub fn max_first_coordinate(&self) -> f64 {
        self.samples.iter().map(|s| s.x.x).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// First time in `(t_lo, t_hi]` at which the first coordinate of the flow of
/// `m` from `x0` reaches `v_th`.
///
/// Each of 16 sub-intervals is checked at its end point and, when the
/// derivative changes sign inside it, at its interior maximum, so crossings
/// that turn back within one sub-interval are still caught.
pub fn detect_crossing(m: &PlanarAffineMode, x0: &Vec2, t_lo: f64, t_hi: f64, v_th: f64) -> Option<f64> {
    if !(t_hi > t_lo) {
        return None;
    }
    let v = |t: f64| affine_flow(m, x0, t).x;
    let slope = |t: f64| m.field(&affine_flow(m, x0, t)).x;
    let above = |t: f64| v(t) >= v_th;
    let width = (t_hi - t_lo) / CROSSING_PIECES as f64;
    for j in 0..CROSSING_PIECES {
        let lo = t_lo + width * j as f64;
        let hi = if j + 1 == CROSSING_PIECES { t_hi } else { lo + width };
        let mut hit = if above(hi) { Some(hi) } else { None };
        if hit.is_none() && slope(lo) > 0.0 && slope(hi) < 0.0 {
            let (t_peak, v_peak) = golden_max(v, lo, hi, CROSSING_TOL);
            if v_peak >= v_th {
                hit = Some(t_peak);
            }
        }
        if let Some(end) = hit {
            return Some(bisect(above, lo, end, CROSSING_TOL));
        }
    }
    None
}

fn push_sample(traj: &mut Trajectory, t: f64, x: Vec2, m: &PlanarAffineMode) {
    traj.samples.push(Sample {
        t,
        x,
        mode: m.id().clone(),
        v: m.lyapunov().eval(&x),
    });
}

/// Runs the switched system from `x0` over the signal's horizon, sampling
/// every `dt` (plus every switch time and the horizon).
pub fn simulate(
    modes: &ModeTable,
    signal: &SwitchingSignal,
    x0: &Vec2,
    dt: f64,
    reset: Option<&ResetRule>,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "sampling step must be positive",
        });
    }
    let mut traj = Trajectory::default();
    let mut x = *x0;
    let mut previous: Option<&ModeId> = None;
    for (t_start, t_end, id) in signal.segments() {
        let m = modes.get(id)?;
        // The initial activation is logged as `>id`, so every mode entry has an event.
        traj.events.push(Event {
            t: t_start,
            kind: EventKind::Switch,
            detail: format!("{}>{id}", previous.map_or("", |p| p.as_str())),
        });
        previous = Some(id);
        push_sample(&mut traj, t_start, x, m);

        let steps = ((t_end - t_start) / dt).ceil().max(0.0) as usize;
        let (mut anchor_t, mut anchor_x) = (t_start, x);
        let mut t_prev = t_start;
        for j in 1..=steps {
            let t_next = if j == steps { t_end } else { t_start + dt * j as f64 };
            if let Some(rule) = reset {
                loop {
                    // Only upward crossings trigger a reset.
                    let from = t_prev - anchor_t;
                    if affine_flow(m, &anchor_x, from).x >= rule.v_th {
                        break;
                    }
                    let Some(tc) = detect_crossing(m, &anchor_x, from, t_next - anchor_t, rule.v_th) else {
                        break;
                    };
                    let t_cross = anchor_t + tc;
                    let before = affine_flow(m, &anchor_x, tc);
                    let h = *rule
                        .h_reset
                        .get(id)
                        .ok_or_else(|| Error::UnknownModeId(id.clone()))?;
                    let after = Vec2::new(rule.v_reset, h);
                    push_sample(&mut traj, t_cross, before, m);
                    traj.events.push(Event {
                        t: t_cross,
                        kind: EventKind::Reset,
                        detail: id.to_string(),
                    });
                    push_sample(&mut traj, t_cross, after, m);
                    anchor_t = t_cross;
                    anchor_x = after;
                    t_prev = t_cross;
                }
            }
            x = affine_flow(m, &anchor_x, t_next - anchor_t);
            if !(x.x.is_finite() && x.y.is_finite()) {
                return Err(Error::NonFiniteState { t: t_next });
            }
            push_sample(&mut traj, t_next, x, m);
            t_prev = t_next;
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set1() -> ModeTable {
        let on = PlanarAffineMode::new("ON", -0.75, 0.15, -1.0, -0.35, [1.0, 0.0]).unwrap();
        let off = on.with_offset("OFF", [0.0, 0.0]);
        ModeTable::new([on, off]).unwrap()
    }

    fn square(t: f64, periods: usize) -> SwitchingSignal {
        let mut sw = Vec::new();
        for p in 0..periods {
            sw.push((2.0 * t * p as f64, ModeId::from("ON")));
            sw.push((2.0 * t * p as f64 + t, ModeId::from("OFF")));
        }
        SwitchingSignal::new(sw, 2.0 * t * periods as f64).unwrap()
    }

    #[test]
    fn signal_validation() {
        let id = ModeId::from;
        assert!(SwitchingSignal::new(vec![], 1.0).is_err());
        assert!(SwitchingSignal::new(vec![(0.5, id("A"))], 1.0).is_err());
        assert!(SwitchingSignal::new(vec![(0.0, id("A")), (0.0, id("B"))], 1.0).is_err());
        assert!(SwitchingSignal::new(vec![(0.0, id("A")), (0.5, id("A"))], 1.0).is_err());
        assert!(SwitchingSignal::new(vec![(0.0, id("A")), (2.0, id("B"))], 1.0).is_err());
        let s = SwitchingSignal::new(vec![(0.0, id("A")), (0.25, id("B"))], 1.0).unwrap();
        assert_eq!(s.default_dt(), 0.25 / 1000.0);
    }

    #[test]
    fn equilibrium_start_stays_put() {
        let modes = set1();
        let sig = SwitchingSignal::new(vec![(0.0, "ON".into())], 5.0).unwrap();
        let xu = modes.get(&"ON".into()).unwrap().equilibrium();
        let traj = simulate(&modes, &sig, &xu, 0.1, None).unwrap();
        assert_eq!(traj.samples.len(), 51);
        for s in &traj.samples {
            assert!((s.x - xu).norm() < 1e-14);
        }
        assert_eq!(traj.events.len(), 1);
    }

    #[test]
    fn switch_events_and_duplicate_samples() {
        let traj = simulate(&set1(), &square(3.84, 2), &Vec2::zeros(), 0.01, None).unwrap();
        assert_eq!(traj.events.len(), 4);
        assert_eq!(traj.events[0].detail, ">ON");
        assert_eq!(traj.events[1].detail, "ON>OFF");
        assert_eq!(traj.segments().len(), 4);
        let at_switch: Vec<_> = traj.samples.iter().filter(|s| s.t == 3.84).collect();
        assert_eq!(at_switch.len(), 2);
        assert_eq!(at_switch[0].x, at_switch[1].x);
        assert_ne!(at_switch[0].mode, at_switch[1].mode);
    }

    #[test]
    fn no_reset_below_certified_threshold() {
        let modes = set1();
        let mut h = BTreeMap::new();
        h.insert(ModeId::from("ON"), 0.0);
        h.insert(ModeId::from("OFF"), 0.0);
        let rule = ResetRule::new(2.6, 0.0, h).unwrap();
        let traj = simulate(&modes, &square(3.84, 10), &Vec2::zeros(), 0.01, Some(&rule)).unwrap();
        assert_eq!(traj.resets().count(), 0);
    }

    #[test]
    fn resets_fire_on_low_threshold() {
        let modes = set1();
        let mut h = BTreeMap::new();
        h.insert(ModeId::from("ON"), -0.5);
        h.insert(ModeId::from("OFF"), 0.0);
        let rule = ResetRule::new(0.5, 0.0, h).unwrap();
        let traj = simulate(&modes, &square(3.84, 3), &Vec2::zeros(), 0.01, Some(&rule)).unwrap();
        let resets: Vec<_> = traj.resets().collect();
        assert!(!resets.is_empty());
        for e in resets {
            let pair: Vec<_> = traj.samples.iter().filter(|s| s.t == e.t).collect();
            assert!((pair[0].x.x - 0.5).abs() < 1e-8);
            assert_eq!(pair[1].x, Vec2::new(0.0, -0.5));
        }
        assert!(traj.max_first_coordinate() <= 0.5 + 1e-8);
        assert!(ResetRule::new(0.5, 0.6, BTreeMap::new()).is_err());
    }

    #[test]
    fn crossing_detection() {
        let on = PlanarAffineMode::new("ON", -0.75, 0.15, -1.0, -0.35, [1.0, 0.0]).unwrap();
        assert_eq!(detect_crossing(&on, &Vec2::zeros(), 0.0, 10.0, 5.0), None);
        assert_eq!(detect_crossing(&on, &Vec2::zeros(), 1.0, 1.0, 0.1), None);
        // v_u = 0.848 > 0.5
        let t = detect_crossing(&on, &Vec2::zeros(), 0.0, 10.0, 0.5).unwrap();
        assert!((affine_flow(&on, &Vec2::zeros(), t).x - 0.5).abs() < 1e-8);
        assert!(t > 0.0);
    }

    #[test]
    fn determinism() {
        let a = simulate(&set1(), &square(1.3, 4), &Vec2::new(0.1, 0.2), 0.003, None).unwrap();
        let b = simulate(&set1(), &square(1.3, 4), &Vec2::new(0.1, 0.2), 0.003, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_mode() {
        let sig = SwitchingSignal::new(vec![(0.0, "X".into())], 1.0).unwrap();
        let err = simulate(&set1(), &sig, &Vec2::zeros(), 0.1, None).unwrap_err();
        assert_eq!(err, Error::UnknownModeId("X".into()));
    }
}
