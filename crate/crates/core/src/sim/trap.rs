use serde_json::{json, Value};

use super::{affine_flow, Trajectory};
use crate::error::{Error, Result};
use crate::numfmt::json17;
use crate::optim::golden_max;
use crate::planar::{enclosing_level, ModeId, ModeTable};

/// Absolute slack on every trapping check.
pub const TRAP_TOL: f64 = 1e-6;

/// `V_new(x(t_i)) <= k` at the end of a mode's interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchCheck {
    pub t: f64,
    pub mode: ModeId,
    pub value: f64,
    pub k: f64,
    pub pass: bool,
}

/// `max V_new(x(t)) <= k_i` over one inter-switch interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeCheck {
    pub t_start: f64,
    pub t_end: f64,
    pub mode: ModeId,
    pub max_value: f64,
    pub k_i: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrapReport {
    pub switch_checks: Vec<SwitchCheck>,
    pub tube_checks: Vec<TubeCheck>,
    pub overall: bool,
}

impl TrapReport {
    pub fn switch_failures(&self) -> usize {
        self.switch_checks.iter().filter(|c| !c.pass).count()
    }

    pub fn tube_failures(&self) -> usize {
        self.tube_checks.iter().filter(|c| !c.pass).count()
    }

    pub fn to_json(&self) -> Value {
        let switch: Vec<Value> = self
            .switch_checks
            .iter()
            .map(|c| {
                json!({
                    "t": json17(c.t),
                    "mode": c.mode.as_str(),
                    "V": json17(c.value),
                    "k": json17(c.k),
                    "pass": c.pass,
                })
            })
            .collect();
        let tube: Vec<Value> = self
            .tube_checks
            .iter()
            .map(|c| {
                json!({
                    "t_start": json17(c.t_start),
                    "t_end": json17(c.t_end),
                    "mode": c.mode.as_str(),
                    "max_V": json17(c.max_value),
                    "k_i": json17(c.k_i),
                    "pass": c.pass,
                })
            })
            .collect();
        json!({
            "switch_checks": switch,
            "tube_checks": tube,
            "overall": self.overall,
        })
    }
}

/// Checks the trapping-region conclusions along a recorded trajectory.
///
/// Interval `j` runs mode `u_j`. Its tube level is the enclosing level of
/// `{V_{u_{j-1}} <= k}` in `V_{u_j}`; for the first interval, which has no
/// predecessor, it is `max(k, V_{u_0}(x0))`. Every interval that ends in a
/// switch must end inside `{V_{u_j} <= k}`. Interval maxima come from the
/// samples plus a golden-section refinement on the exact flow around the
/// sampled argmax.
pub fn verify_trapping(traj: &Trajectory, modes: &ModeTable, k: f64) -> Result<TrapReport> {
    if traj.samples.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let reset_times: Vec<f64> = traj.resets().map(|e| e.t).collect();
    let segments = traj.segments();
    let mut report = TrapReport {
        switch_checks: Vec::new(),
        tube_checks: Vec::new(),
        overall: true,
    };
    for (j, seg) in segments.iter().enumerate() {
        let mode = modes.get(seg.mode)?;
        let v_new = mode.lyapunov();
        let level = if j == 0 {
            k.max(v_new.eval(&seg.samples[0].x))
        } else {
            let v_old = modes.get(segments[j - 1].mode)?.lyapunov();
            enclosing_level(&v_old, &v_new, k)?
        };

        let values: Vec<f64> = seg.samples.iter().map(|s| v_new.eval(&s.x)).collect();
        let (arg, mut max_value) = values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
        if seg.samples.len() > 1 {
            let lo = arg.saturating_sub(1);
            let hi = (arg + 1).min(seg.samples.len() - 1);
            let (t_lo, t_hi) = (seg.samples[lo].t, seg.samples[hi].t);
            let crosses_reset = reset_times.iter().any(|&r| r >= t_lo && r <= t_hi);
            if !crosses_reset && t_hi > t_lo {
                let x_lo = seg.samples[lo].x;
                let (_, refined) = golden_max(
                    |t| v_new.eval(&affine_flow(mode, &x_lo, t - t_lo)),
                    t_lo,
                    t_hi,
                    1e-12,
                );
                max_value = max_value.max(refined);
            }
        }
        let first = &seg.samples[0];
        let last = seg.samples.last().expect("segments are non-empty");
        let tube_pass = max_value <= level + TRAP_TOL;
        report.tube_checks.push(TubeCheck {
            t_start: first.t,
            t_end: last.t,
            mode: seg.mode.clone(),
            max_value,
            k_i: level,
            pass: tube_pass,
        });
        report.overall &= tube_pass;

        if j + 1 < segments.len() {
            let value = v_new.eval(&last.x);
            let pass = value <= k + TRAP_TOL;
            report.switch_checks.push(SwitchCheck {
                t: last.t,
                mode: seg.mode.clone(),
                value,
                k,
                pass,
            });
            report.overall &= pass;
        }
    }
    Ok(report)
}
