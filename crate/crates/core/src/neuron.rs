//! Planar linear neuron
//!
//! ```text
//! v' = -g_p v + g_h h + I_in(t)
//! h' = -m v - o_h h
//! ```
//!
//! driven by a square-wave current that is `I` for `T_I` time units and `0`
//! for `T_0`. In the language of [`crate::planar`] this is `a = -g_p`,
//! `b = g_h`, `c = -m`, `d = -o_h` with `B_OFF = (0, 0)` and `B_ON = (I, 0)`.
//! Both modes share one Lyapunov weight pair `(m, g_h)`, so the enclosing
//! level `k_bar` is the same for both transitions and the certificate reduces
//! to a handful of closed-form numbers.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numfmt::json17;
use crate::planar::{ModeId, PlanarAffineMode, Vec2};
use crate::sim::{ResetRule, SwitchingSignal};

pub const OFF: &str = "OFF";
pub const ON: &str = "ON";

/// Level used by both published neuron experiments.
pub const DEFAULT_LEVEL: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct NeuronParams {
    pub g_p: f64,
    pub g_h: f64,
    pub m: f64,
    pub o_h: f64,
    pub current: f64,
    pub t_on: f64,
    pub t_off: f64,
    pub v_th: Option<f64>,
    pub v_reset: Option<f64>,
    /// `h_R` after a reset in the ON and OFF phase respectively.
    pub h_reset: Option<ResetRecovery>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResetRecovery {
    pub on: f64,
    pub off: f64,
}

impl NeuronParams {
    /// Rates and current only; durations default to `1` and are meant to be
    /// overwritten with [`NeuronParams::with_periods`].
    pub fn new(g_p: f64, g_h: f64, m: f64, o_h: f64, current: f64) -> Self {
        NeuronParams {
            g_p,
            g_h,
            m,
            o_h,
            current,
            t_on: 1.0,
            t_off: 1.0,
            v_th: None,
            v_reset: None,
            h_reset: None,
        }
    }

    pub fn with_periods(mut self, t_on: f64, t_off: f64) -> Self {
        self.t_on = t_on;
        self.t_off = t_off;
        self
    }

    pub fn with_threshold(mut self, v_th: f64) -> Self {
        self.v_th = Some(v_th);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g_p", self.g_p),
            ("g_h", self.g_h),
            ("m", self.m),
            ("o_h", self.o_h),
            ("I", self.current),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        // An infinite duration stands for a phase that is never left.
        for (name, value) in [("T_I", self.t_on), ("T_0", self.t_off)] {
            if !(value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        Ok(())
    }

    /// `(v_I, h_I) = I / (g_p o_h + m g_h) * (o_h, -m)`.
    pub fn on_equilibrium(&self) -> Vec2 {
        let scale = self.current / (self.g_p * self.o_h + self.m * self.g_h);
        Vec2::new(scale * self.o_h, -scale * self.m)
    }

    /// Reset rule when threshold, `v_R` and `h_R` are all present.
    pub fn reset_rule(&self) -> Result<Option<ResetRule>> {
        match (self.v_th, self.v_reset, self.h_reset) {
            (Some(v_th), Some(v_reset), Some(h)) => {
                let mut map = BTreeMap::new();
                map.insert(ModeId::from(ON), h.on);
                map.insert(ModeId::from(OFF), h.off);
                ResetRule::new(v_th, v_reset, map).map(Some)
            }
            _ => Ok(None),
        }
    }
}

/// `(OFF, ON)` modes of the neuron.
pub fn neuron_modes(p: &NeuronParams) -> Result<(PlanarAffineMode, PlanarAffineMode)> {
    p.validate()?;
    let on = PlanarAffineMode::new(ON, -p.g_p, p.g_h, -p.m, -p.o_h, [p.current, 0.0])?;
    let off = on.with_offset(OFF, [0.0, 0.0]);
    Ok((off, on))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub k: f64,
    pub v_on: f64,
    pub h_on: f64,
    pub k_bar: f64,
    pub tau_d: f64,
    pub v_bound: f64,
    pub dwell_ok: bool,
    /// `None` when no threshold was supplied.
    pub nonspiking_ok: Option<bool>,
}

impl Certificate {
    /// Whether `x0` lies in `{m v^2 + g_h h^2 <= k}`, the OFF-mode level set the
    /// guarantee starts from.
    pub fn admits_initial(&self, p: &NeuronParams, x0: &Vec2) -> bool {
        p.m * x0.x * x0.x + p.g_h * x0.y * x0.y <= self.k
    }

    /// Overall verdict: dwell condition met and, if a threshold was given,
    /// the threshold lies above the certified bound on `v`.
    pub fn passes(&self) -> bool {
        self.dwell_ok && self.nonspiking_ok.unwrap_or(true)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": json17(self.k),
            "v_I": json17(self.v_on),
            "h_I": json17(self.h_on),
            "k_bar": json17(self.k_bar),
            "tau_d": json17(self.tau_d),
            "v_bound": json17(self.v_bound),
            "dwell_ok": self.dwell_ok,
            "nonspiking_ok": self.nonspiking_ok,
        })
    }
}

/// Non-spiking certificate at level `k`.
pub fn certify(p: &NeuronParams, k: f64) -> Result<Certificate> {
    p.validate()?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidLevels(format!("level k = {k} must be > 0")));
    }
    let on = p.on_equilibrium();
    let shift = (p.m * on.x * on.x + p.g_h * on.y * on.y).sqrt();
    let k_bar = (k.sqrt() + shift).powi(2);
    let tau_d = (k_bar / k).ln() / (2.0 * p.g_p.min(p.o_h));
    let v_bound = on.x + (k_bar / p.m).sqrt();
    Ok(Certificate {
        k,
        v_on: on.x,
        h_on: on.y,
        k_bar,
        tau_d,
        v_bound,
        dwell_ok: p.t_on.min(p.t_off) >= tau_d,
        nonspiking_ok: p.v_th.map(|v_th| v_th > v_bound),
    })
}

/// ON on `[j T, j T + T_I)`, OFF on `[j T + T_I, (j + 1) T)` with
/// `T = T_I + T_0`, for `periods` periods.
pub fn square_wave_signal(p: &NeuronParams, periods: usize) -> Result<SwitchingSignal> {
    if periods == 0 {
        return Err(Error::InvalidSignal("at least one period is required".into()));
    }
    let period = p.t_on + p.t_off;
    let switches = (0..periods)
        .flat_map(|j| {
            let start = period * j as f64;
            [(start, ModeId::from(ON)), (start + p.t_on, ModeId::from(OFF))]
        })
        .collect();
    SwitchingSignal::new(switches, period * periods as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::enclosing_level_shared;

    fn set1() -> NeuronParams {
        NeuronParams::new(0.75, 0.15, 1.0, 0.35, 1.0).with_periods(3.84, 3.84)
    }

    fn set2() -> NeuronParams {
        NeuronParams::new(0.04, 0.5, 1.0, 0.04, 1.0).with_periods(35.7, 35.7)
    }

    #[test]
    fn modes_and_equilibria() {
        let (off, on) = neuron_modes(&set1()).unwrap();
        assert_eq!(off.equilibrium(), Vec2::zeros());
        assert!((on.equilibrium() - Vec2::new(0.848_484_848_484_848_5, -2.424_242_424_242_424)).norm() < 1e-12);
        assert!((set1().on_equilibrium() - on.equilibrium()).norm() < 1e-14);
        let (_, on2) = neuron_modes(&set2()).unwrap();
        assert!((on2.equilibrium() - Vec2::new(0.079_744_816_586_921_85, -1.993_620_414_673_046_3)).norm() < 1e-12);
        let mut bad = set1();
        bad.g_h = 0.0;
        assert!(neuron_modes(&bad).is_err());
    }

    #[test]
    fn published_certificates() {
        let c = certify(&set1(), 0.2).unwrap();
        assert!((c.tau_d - 3.836).abs() < 1e-3);
        assert!((c.v_bound - 2.561).abs() < 5e-3);
        assert!((c.k_bar - 2.933_359_422_553_238).abs() < 1e-12);
        assert!(c.dwell_ok);
        assert_eq!(c.nonspiking_ok, None);
        let c2 = certify(&set2(), 0.2).unwrap();
        assert!((c2.tau_d - 35.621).abs() < 1e-3);
        assert!(c2.dwell_ok);
        let short = certify(&set2().with_periods(32.0, 32.0), 0.2).unwrap();
        assert!(!short.dwell_ok);
        assert!(!short.passes());
        assert!(certify(&set1(), 0.0).is_err());
    }

    #[test]
    fn threshold_verdict() {
        let c = certify(&set1().with_threshold(2.6), 0.2).unwrap();
        assert_eq!(c.nonspiking_ok, Some(true));
        let c = certify(&set1().with_threshold(2.5), 0.2).unwrap();
        assert_eq!(c.nonspiking_ok, Some(false));
        assert!(!c.passes());
    }

    #[test]
    fn k_bar_matches_general_enclosing_level() {
        for p in [set1(), set2()] {
            let (off, on) = neuron_modes(&p).unwrap();
            let c = certify(&p, 0.2).unwrap();
            let up = enclosing_level_shared(&off.lyapunov(), &on.lyapunov(), 0.2).unwrap();
            let down = enclosing_level_shared(&on.lyapunov(), &off.lyapunov(), 0.2).unwrap();
            assert!((up - c.k_bar).abs() / c.k_bar < 1e-12);
            assert!((down - c.k_bar).abs() / c.k_bar < 1e-12);
        }
    }

    #[test]
    fn initial_state_membership() {
        let p = set1();
        let c = certify(&p, 0.2).unwrap();
        assert!(c.admits_initial(&p, &Vec2::zeros()));
        assert!(!c.admits_initial(&p, &Vec2::new(1.0, 0.0)));
    }

    #[test]
    fn square_waves() {
        let s = square_wave_signal(&set1(), 1).unwrap();
        assert_eq!(s.switches(), &[(0.0, ModeId::from(ON)), (3.84, ModeId::from(OFF))]);
        assert_eq!(s.horizon(), 7.68);
        let s = square_wave_signal(&set2(), 2).unwrap();
        assert_eq!(s.switches().len(), 4);
        assert!((s.horizon() - 142.8).abs() < 1e-12);
        let s = square_wave_signal(&NeuronParams::new(1.0, 1.0, 1.0, 1.0, 1.0).with_periods(1.0, 2.0), 1).unwrap();
        assert_eq!(s.horizon(), 3.0);
        assert!(square_wave_signal(&set1(), 0).is_err());
    }

    #[test]
    fn certificate_json_keys() {
        let v = certify(&set1(), 0.2).unwrap().to_json();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        let mut want = vec!["k", "v_I", "h_I", "k_bar", "tau_d", "v_bound", "dwell_ok", "nonspiking_ok"];
        want.sort();
        let mut got = keys.clone();
        got.sort();
        assert_eq!(got, want);
    }
}
